//! Dense statevector simulator used to prepare states and as the exact oracle.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_same, Error, Result};
use crate::linalg::{unitarity_deviation, Mat2, Mat4, C64, ZERO};
use crate::pauli::{PauliMonomial, PauliObservable};
use crate::rng::RngStream;

/// Default cap on the qubit count of simulated states.
pub const STATE_QUBIT_LIMIT: usize = 16;

const UNITARY_TOLERANCE: f64 = 1e-10;
const NORM_TOLERANCE: f64 = 1e-10;

/// Normalized pure state of `n_qubits` qubits. Qubit 0 is the most significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

/// Families accepted by [`prepare`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    /// `|0…0⟩`.
    Zeros,
    /// `(|0…0⟩ + |1…1⟩)/√2`.
    Ghz,
    /// Product of single-qubit states with Bloch angles `(theta, phi)`, one pair per qubit.
    Product(Vec<(f64, f64)>),
    /// Haar-random state from normalized complex Gaussian amplitudes.
    RandomHaar(u64),
}

impl Statevector {
    /// Wraps raw amplitudes, checking the length and the norm.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > STATE_QUBIT_LIMIT {
            return Err(Error::Size {
                what: "statevector qubit count",
                size: n_qubits,
                limit: STATE_QUBIT_LIMIT,
            });
        }
        let sv = Self {
            n_qubits,
            amplitudes,
        };
        let dev = (sv.norm() - 1.0).abs();
        if dev > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (|norm - 1| = {dev:.3e})"
            )));
        }
        Ok(sv)
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit < self.n_qubits {
            Ok(())
        } else {
            Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            })
        }
    }

    /// Applies `u` on `qubit` in place.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(qubit)?;
        let dev = unitarity_deviation(u);
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary { deviation: dev });
        }
        self.apply_single_qubit_unchecked(qubit, u);
        Ok(())
    }

    pub(crate) fn apply_single_qubit_unchecked(&mut self, qubit: usize, u: &Mat2) {
        let bit = self.bit(qubit);
        for i0 in 0..self.amplitudes.len() {
            if i0 & bit != 0 {
                continue;
            }
            let i1 = i0 | bit;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            self.amplitudes[i0] = u[0][0] * a0 + u[0][1] * a1;
            self.amplitudes[i1] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    /// Applies a 4×4 unitary on `(first, second)`; `first` owns the high bit of the local index.
    pub fn apply_two_qubit(&mut self, pair: (usize, usize), u: &Mat4) -> Result<()> {
        let (q0, q1) = pair;
        self.check_qubit(q0)?;
        self.check_qubit(q1)?;
        if q0 == q1 {
            return Err(Error::QubitIndex {
                index: q1,
                n_qubits: self.n_qubits,
            });
        }
        let dev = unitarity_deviation(u);
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let (b0, b1) = (self.bit(q0), self.bit(q1));
        for base in 0..self.amplitudes.len() {
            if base & (b0 | b1) != 0 {
                continue;
            }
            let idx = [base, base | b1, base | b0, base | b0 | b1];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amplitudes[i] = (0..4).map(|c| u[r][c] * v[c]).sum();
            }
        }
        Ok(())
    }

    /// `⟨ψ|σ|ψ⟩` for a single monomial (complex in general; real for Hermitian σ).
    pub(crate) fn monomial_expectation(&self, m: &PauliMonomial) -> C64 {
        let flip = m.flip_mask() as usize;
        let sign_mask = m.sign_mask();
        let y_power = (m.y_count() % 4) as u8;
        let mut acc = ZERO;
        for (col, &amp) in self.amplitudes.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let phase = PauliMonomial::column_phase(y_power, sign_mask, col);
            acc += self.amplitudes[col ^ flip].conj() * phase * amp;
        }
        acc
    }

    /// Exact `⟨ψ|O|ψ⟩`.
    pub fn exact_expectation(&self, obs: &PauliObservable) -> Result<f64> {
        ensure_same(self.n_qubits, obs.n_qubits())?;
        let mut total = ZERO;
        for (m, a) in obs.terms() {
            total += self.monomial_expectation(m) * a;
        }
        let scale = obs.terms().map(|(_, a)| a.abs()).sum::<f64>().max(1.0);
        assert!(
            total.im.abs() <= 1e-10 * scale,
            "Hermitian expectation with imaginary part {}",
            total.im
        );
        Ok(total.re)
    }

    /// `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn to_density(&self) -> crate::linalg::DenseMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        &v * v.adjoint()
    }

    /// Probability of each computational-basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Samples a computational-basis index with one uniform draw against the CDF.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_from_weights(self.amplitudes.iter().map(|a| a.norm_sqr()), rng)
    }

    /// Measures all qubits in the computational basis; returns bits in qubit order.
    /// The state itself is left untouched.
    pub fn measure_z_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let idx = self.sample_index(rng);
        index_to_bits(idx, self.n_qubits)
    }

    /// Same as [`Statevector::measure_z_all`], drawing from an addressed stream.
    pub fn measure_z_all_stream(&self, stream: RngStream) -> Vec<u8> {
        self.measure_z_all(&mut stream.rng())
    }

    /// `ψ ⊗ |0⟩` on one more qubit.
    pub fn extend_with_zero(&self) -> Result<Self> {
        let mut amps = vec![ZERO; self.amplitudes.len() * 2];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            amps[2 * i] = a;
        }
        Self::from_amplitudes(amps)
    }

    /// Text form: `n_qubits` followed by one `re im` line per amplitude.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n_qubits);
        for a in &self.amplitudes {
            let _ = writeln!(out, "{:.17e} {:.17e}", a.re, a.im);
        }
        out
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source_name, 0, "empty statevector file"))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::parse(source_name, ln, "expected qubit count"))?;
        if n == 0 || n > STATE_QUBIT_LIMIT {
            return Err(Error::parse(
                source_name,
                ln,
                format!("qubit count {n} outside 1..={STATE_QUBIT_LIMIT}"),
            ));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for (ln, line) in lines {
            let mut parts = line.split_whitespace();
            let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(source_name, ln, "expected `re im`"));
            };
            let parse = |s: &str| {
                f64::from_str(s).map_err(|_| Error::parse(source_name, ln, format!("bad number {s:?}")))
            };
            amps.push(C64::new(parse(re)?, parse(im)?));
        }
        if amps.len() != 1 << n {
            return Err(Error::parse(
                source_name,
                0,
                format!("expected {} amplitudes, found {}", 1usize << n, amps.len()),
            ));
        }
        Self::from_amplitudes(amps).map_err(|e| Error::parse(source_name, 0, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Builds a normalized state of the requested family.
pub fn prepare(kind: &StateKind, n_qubits: usize) -> Result<Statevector> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    if n_qubits > STATE_QUBIT_LIMIT {
        return Err(Error::Size {
            what: "statevector qubit count",
            size: n_qubits,
            limit: STATE_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << n_qubits;
    let mut amps = vec![ZERO; dim];
    match kind {
        StateKind::Zeros => amps[0] = C64::new(1.0, 0.0),
        StateKind::Ghz => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            amps[0] = C64::new(h, 0.0);
            amps[dim - 1] = C64::new(h, 0.0);
        }
        StateKind::Product(angles) => {
            ensure_same(n_qubits, angles.len())?;
            for (idx, amp) in amps.iter_mut().enumerate() {
                let mut a = C64::new(1.0, 0.0);
                for (q, &(theta, phi)) in angles.iter().enumerate() {
                    let bit = (idx >> (n_qubits - 1 - q)) & 1;
                    a *= if bit == 0 {
                        C64::new((theta / 2.0).cos(), 0.0)
                    } else {
                        C64::from_polar((theta / 2.0).sin(), phi)
                    };
                }
                *amp = a;
            }
        }
        StateKind::RandomHaar(seed) => {
            let mut rng = RngStream::new(*seed, 0).rng();
            for a in amps.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *a = C64::new(re, im);
            }
            return Statevector::normalized(amps);
        }
    }
    Statevector::normalized(amps)
}

/// Bits of `index` in qubit order (qubit 0 first, the most significant bit).
pub fn index_to_bits(index: usize, n_qubits: usize) -> Vec<u8> {
    (0..n_qubits)
        .map(|q| ((index >> (n_qubits - 1 - q)) & 1) as u8)
        .collect()
}

/// Draws an index proportionally to the (possibly unnormalized) weights.
pub(crate) fn sample_from_weights<I, R>(weights: I, rng: &mut R) -> usize
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
    R: Rng + ?Sized,
{
    let iter = weights.into_iter();
    let total: f64 = iter.clone().sum();
    let target = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, w) in iter.enumerate() {
        if w > 0.0 {
            last_nonzero = i;
        }
        cumulative += w;
        if target < cumulative {
            return i;
        }
    }
    // Round-off can leave `target` just above the final cumulative sum.
    last_nonzero
}
