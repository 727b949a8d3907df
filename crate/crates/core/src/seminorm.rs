//! Observable seminorms that bound the spread of the snapshot estimator.
//!
//! All three ignore the identity component, whose estimator is constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliMonomial, PauliObservable};

/// Default cap on the qubit count of [`projector_observable`] (it has `2^N` terms).
pub const PROJECTOR_QUBIT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub full: f64,
    pub one: f64,
    pub two: f64,
    /// Highest degree among the monomials.
    pub max_degree: usize,
}

impl SeminormReport {
    pub fn of(obs: &PauliObservable) -> Self {
        Self {
            full: seminorm_full(obs),
            one: seminorm_one(obs),
            two: seminorm_two(obs),
            max_degree: obs.max_degree(),
        }
    }
}

/// `‖O‖ = (Σ_{i,j} 3^{r_ij} Δ_ij |a_i||a_j|)^{1/2}`, quadratic in the term count.
pub fn seminorm_full(obs: &PauliObservable) -> f64 {
    let terms: Vec<(&PauliMonomial, f64)> = obs.non_identity_terms().map(|(m, a)| (m, a.abs())).collect();
    let rows: Vec<f64> = terms
        .par_iter()
        .map(|&(mi, ai)| {
            terms
                .iter()
                .map(|&(mj, aj)| {
                    let (r, delta) = mi.r_delta(mj).expect("terms share a register");
                    if delta == 0 {
                        0.0
                    } else {
                        3f64.powi(r as i32) * ai * aj
                    }
                })
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>().sqrt()
}

/// `‖O‖₂ = (Σ_i 3^{deg i} a_i²)^{1/2}`.
pub fn seminorm_two(obs: &PauliObservable) -> f64 {
    obs.non_identity_terms()
        .map(|(m, a)| 3f64.powi(m.degree() as i32) * a * a)
        .sum::<f64>()
        .sqrt()
}

/// `‖O‖₁ = Σ_i √3^{deg i} |a_i|`, the cheap upper bound on `‖O‖`.
pub fn seminorm_one(obs: &PauliObservable) -> f64 {
    obs.non_identity_terms()
        .map(|(m, a)| 3f64.sqrt().powi(m.degree() as i32) * a.abs())
        .sum()
}

/// `|b⟩⟨b|` for a bitstring of `0`/`1` characters, expanded over `{I, Z}^N`.
pub fn projector_observable(bits: &str) -> Result<PauliObservable> {
    projector_observable_with_limit(bits, PROJECTOR_QUBIT_LIMIT)
}

pub fn projector_observable_with_limit(bits: &str, limit: usize) -> Result<PauliObservable> {
    let bits: Vec<bool> = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidArgument(format!("bitstring character {other:?}"))),
        })
        .collect::<Result<_>>()?;
    let n = bits.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty bitstring".into()));
    }
    if n > limit {
        return Err(Error::Size {
            what: "projector qubits",
            size: n,
            limit,
        });
    }
    let scale = 0.5f64.powi(n as i32);
    let mut out = PauliObservable::zero(n)?;
    for subset in 0u64..(1 << n) {
        let mut mono = PauliMonomial::identity(n)?;
        let mut sign = 1.0;
        for (q, &bit) in bits.iter().enumerate() {
            if subset >> q & 1 == 1 {
                mono.set(q, Letter::Z);
                if bit {
                    sign = -sign;
                }
            }
        }
        out.add_term(mono, sign * scale)?;
    }
    Ok(out)
}

/// `3^{P/2}·‖O‖₂` with `P = min(Q, ⌊N/2⌋)`: the growth allowed by one entangler layer.
pub fn entangler_growth_bound(obs: &PauliObservable, n_qubits: usize) -> f64 {
    let p = obs.max_degree().min(n_qubits / 2);
    3f64.powf(p as f64 / 2.0) * seminorm_two(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{empirical_variance, snapshot_values, Moments};
    use crate::rng::RngStream;
    use crate::snapshot::build_snapshot_set;
    use crate::statevector::{prepare, StateKind};
    use proptest::prelude::*;
    use rand::Rng;

    fn obs(terms: &[(f64, &str)]) -> PauliObservable {
        PauliObservable::from_strs(terms).unwrap()
    }

    fn random_observable<R: Rng>(n: usize, terms: usize, rng: &mut R) -> PauliObservable {
        let mut o = PauliObservable::zero(n).unwrap();
        for _ in 0..terms {
            let letters: Vec<Letter> = (0..n).map(|_| Letter::from_code(rng.random_range(0..4))).collect();
            o.add_term(PauliMonomial::from_letters(&letters).unwrap(), rng.random_range(-1.0..1.0))
                .unwrap();
        }
        o
    }

    #[test]
    fn full_examples() {
        assert!((seminorm_full(&obs(&[(1.0, "X")])) - 3f64.sqrt()).abs() < 1e-15);
        for n in 1..=6 {
            let m: String = "XYZ".chars().cycle().take(n).collect();
            let want = 3f64.powf(n as f64 / 2.0);
            assert!((seminorm_full(&obs(&[(1.0, &m)])) - want).abs() < 1e-12 * want);
        }
        assert_eq!(seminorm_full(&obs(&[(5.0, "II")])), 0.0);
    }

    #[test]
    fn full_counts_compatible_pairs() {
        // ZI and ZZ overlap compatibly on qubit 0: cross term 3·1·1 twice.
        let o = obs(&[(1.0, "ZI"), (1.0, "ZZ")]);
        assert!((seminorm_full(&o).powi(2) - (3.0 + 9.0 + 6.0)).abs() < 1e-12);
        // XI and IZ share no support: r = 0, Δ = 1.
        let o = obs(&[(1.0, "XI"), (1.0, "IZ")]);
        assert!((seminorm_full(&o).powi(2) - 8.0).abs() < 1e-12);
        // XI and ZI conflict: no cross term.
        let o = obs(&[(1.0, "XI"), (1.0, "ZI")]);
        assert!((seminorm_full(&o).powi(2) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn two_examples() {
        assert!((seminorm_two(&obs(&[(1.0, "X"), (1.0, "Z")])) - 6f64.sqrt()).abs() < 1e-15);
        assert!((seminorm_two(&obs(&[(2.0, "XZ")])) - 6.0).abs() < 1e-12);
        let p = projector_observable("00").unwrap();
        assert!((seminorm_two(&p) - (15.0f64 / 16.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_examples() {
        assert!((seminorm_one(&obs(&[(1.0, "X")])) - 3f64.sqrt()).abs() < 1e-15);
        assert!((seminorm_one(&obs(&[(1.0, "XI"), (1.0, "IZ")])) - 2.0 * 3f64.sqrt()).abs() < 1e-15);
        let o = obs(&[(0.6, "XY"), (-0.3, "ZY"), (0.2, "XI")]);
        assert!(seminorm_one(&o) > seminorm_full(&o) + 1e-6);
    }

    #[test]
    fn identity_only_is_zero() {
        let o = PauliObservable::identity(3, -2.0).unwrap();
        let r = SeminormReport::of(&o);
        assert_eq!((r.full, r.one, r.two, r.max_degree), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn projector_expansion() {
        let p = projector_observable("0").unwrap();
        assert_eq!(p, obs(&[(0.5, "I"), (0.5, "Z")]));
        let p = projector_observable("00").unwrap();
        assert_eq!(p, obs(&[(0.25, "II"), (0.25, "IZ"), (0.25, "ZI"), (0.25, "ZZ")]));
        let p = projector_observable("10").unwrap();
        assert_eq!(p, obs(&[(0.25, "II"), (0.25, "IZ"), (-0.25, "ZI"), (-0.25, "ZZ")]));
        let dense = p.to_dense().unwrap();
        assert!((dense[(2, 2)].re - 1.0).abs() < 1e-15);
        assert!(dense.iter().filter(|z| z.norm() > 1e-15).count() == 1);
    }

    #[test]
    fn projector_closed_form() {
        let mut rng = RngStream::new(77, 0).rng();
        for n in 1..=10 {
            let bits: String = (0..n).map(|_| if rng.random::<bool>() { '1' } else { '0' }).collect();
            let p = projector_observable(&bits).unwrap();
            assert_eq!(p.len(), 1 << n);
            let want = 1.0 - 0.25f64.powi(n);
            assert!((seminorm_two(&p).powi(2) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn projector_rejects_bad_input() {
        assert!(matches!(projector_observable_with_limit("0101", 3), Err(Error::Size { .. })));
        assert!(projector_observable("01a").is_err());
        assert!(projector_observable("").is_err());
    }

    #[test]
    fn growth_bound_examples() {
        let o = obs(&[(1.0, "XXIIIIIIII"), (0.5, "IIZIIIIIII")]);
        assert!((entangler_growth_bound(&o, 10) - 3.0 * seminorm_two(&o)).abs() < 1e-12);
        let o = obs(&[(1.0, "XYZXY")]);
        assert!((entangler_growth_bound(&o, 4) - 3.0 * seminorm_two(&o)).abs() < 1e-12);
    }

    #[test]
    fn growth_bound_holds_under_entanglers() {
        let mut rng = RngStream::new(91, 0).rng();
        for trial in 0..200 {
            let n = rng.random_range(2..=6);
            let o = random_observable(n, rng.random_range(1..8), &mut rng);
            let mut out = o.clone();
            let offset = trial % 2;
            for k in (offset..n - 1).step_by(2) {
                let mut axis = PauliMonomial::identity(n).unwrap();
                let letter = Letter::PAULIS[rng.random_range(0..3)];
                axis.set(k, letter);
                axis.set(k + 1, letter);
                out = out.conjugate_by_rotation(&axis, rng.random_range(-4.0..4.0)).unwrap();
            }
            assert!(seminorm_two(&out) <= entangler_growth_bound(&o, n) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn variance_is_dominated_by_full_seminorm() {
        let mut rng = RngStream::new(13, 0).rng();
        for t in 0..10 {
            let n = rng.random_range(1..=3);
            let psi = prepare(&StateKind::RandomHaar(t), n).unwrap();
            let o = random_observable(n, 4, &mut rng);
            let set = build_snapshot_set(&psi, 20_000, t).unwrap();
            let values = snapshot_values(&set, &o).unwrap();
            let mean = Moments::from_slice(&values).mean;
            let dev2: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            let d = Moments::from_slice(&dev2);
            let se = (d.variance() / d.count as f64).sqrt();
            let var = empirical_variance(&set, &o).unwrap();
            assert!(var <= seminorm_full(&o).powi(2) + 5.0 * se, "{var} vs {}", seminorm_full(&o).powi(2));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ordering(seed in any::<u64>(), n in 1usize..6, t in 1usize..10) {
            let o = random_observable(n, t, &mut RngStream::new(seed, 0).rng());
            let (one, full, two) = (seminorm_one(&o), seminorm_full(&o), seminorm_two(&o));
            prop_assert!(two <= full + 1e-12);
            prop_assert!(full <= one + 1e-12);
        }

        #[test]
        fn scaling_is_absolute_homogeneous(seed in any::<u64>(), c in -3.0f64..3.0) {
            let o = random_observable(3, 5, &mut RngStream::new(seed, 0).rng());
            let s = o.scaled(c);
            prop_assert!((seminorm_full(&s) - c.abs() * seminorm_full(&o)).abs() < 1e-10);
            prop_assert!((seminorm_two(&s) - c.abs() * seminorm_two(&o)).abs() < 1e-10);
            prop_assert!((seminorm_one(&s) - c.abs() * seminorm_one(&o)).abs() < 1e-10);
        }
    }
}
