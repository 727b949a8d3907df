//! Fixtures shared by the criterion benches in `benches/`.

use aqstate_core::{Letter, PauliMonomial, PauliObservable, Result};

/// Transverse-field Ising chain `Σ Z_i Z_{i+1} + h Σ X_i` with open boundaries.
pub fn ising_chain(n_qubits: usize, field: f64) -> Result<PauliObservable> {
    let mut h = PauliObservable::zero(n_qubits)?;
    for q in 0..n_qubits {
        if q + 1 < n_qubits {
            let mut letters = vec![Letter::I; n_qubits];
            letters[q] = Letter::Z;
            letters[q + 1] = Letter::Z;
            h.add_term(PauliMonomial::from_letters(&letters)?, 1.0)?;
        }
        h.add_term(PauliMonomial::single(n_qubits, q, Letter::X)?, field)?;
    }
    Ok(h)
}
