//! Pauli-string measurement baseline: sample a monomial of `O`, measure it, reweight.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EstimateReport, Moments};
use crate::pauli::{Letter, PauliMonomial, PauliObservable};
use crate::rng::RngStream;
use crate::snapshot::{measure_along, pre_measurement_rotation, Direction};
use crate::statevector::Statevector;

/// Precomputed outcome distributions are used while `terms · 2^N` stays below this.
const PRECOMPUTE_LIMIT: usize = 1 << 24;
const CHUNK: usize = 4096;

/// How the monomial measured in each shot is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Uniform over the monomials of `O`.
    UniformSupport,
    /// Proportional to `|a_i|`.
    L1Weighted,
}

impl Sampler {
    /// Exponent `x` of `p̃_x(i) ∝ |a_i|^x`.
    pub fn exponent(self) -> f64 {
        match self {
            Sampler::UniformSupport => 0.0,
            Sampler::L1Weighted => 1.0,
        }
    }
}

/// The non-identity support of `O` with its sampling distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliShotPlan {
    pub sampler: Sampler,
    support: Vec<(PauliMonomial, f64)>,
    probabilities: Vec<f64>,
    pub shots: usize,
}

impl PauliShotPlan {
    pub fn new(obs: &PauliObservable, sampler: Sampler, shots: usize) -> Result<Self> {
        let support: Vec<(PauliMonomial, f64)> = obs
            .non_identity_terms()
            .filter(|(_, a)| *a != 0.0)
            .map(|(m, a)| (m.clone(), a))
            .collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if shots == 0 {
            return Err(Error::EmptySet);
        }
        let x = sampler.exponent();
        let weights: Vec<f64> = support.iter().map(|(_, a)| a.abs().powf(x)).collect();
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            sampler,
            support,
            probabilities,
            shots,
        })
    }

    pub fn support(&self) -> &[(PauliMonomial, f64)] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σ_i a_i² / p̃(i)`, the bound on `E[R̃²]`.
    pub fn second_moment_bound(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|((_, a), p)| a * a / p)
            .sum()
    }
}

/// Direction whose pre-measurement rotation turns a `z` measurement into one of `letter`.
pub fn basis_direction(letter: Letter) -> Direction {
    match letter {
        Letter::X => Direction::new(FRAC_PI_2, 0.0),
        Letter::Y => Direction::new(FRAC_PI_2, FRAC_PI_2),
        Letter::I | Letter::Z => Direction::new(0.0, 0.0),
    }
}

/// Measures every letter of `mono` once and returns the product of the non-identity eigenvalues.
pub fn measure_pauli_string<R: Rng + ?Sized>(psi: &Statevector, mono: &PauliMonomial, rng: &mut R) -> Result<i8> {
    if psi.n_qubits() != mono.n_qubits() {
        return Err(Error::Dimension {
            expected: psi.n_qubits(),
            found: mono.n_qubits(),
        });
    }
    let directions: Vec<Direction> = mono.letters().map(basis_direction).collect();
    let outcomes = measure_along(psi, &directions, rng)?;
    Ok(mono.support().map(|(q, _)| outcomes[q]).product())
}

/// Outcome CDF of `mono`'s measurement setting, and the index bits whose parity is the result.
struct Setting {
    cdf: Vec<f64>,
    parity_mask: usize,
}

impl Setting {
    fn new(psi: &Statevector, mono: &PauliMonomial) -> Self {
        let mut rotated = psi.clone();
        let n = psi.n_qubits();
        let mut parity_mask = 0usize;
        for (q, l) in mono.support() {
            rotated.apply_single_qubit_unchecked(q, &pre_measurement_rotation(&basis_direction(l)));
            parity_mask |= 1 << (n - 1 - q);
        }
        let mut acc = 0.0;
        let cdf = rotated
            .amplitudes()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self { cdf, parity_mask }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i8 {
        let idx = draw(&self.cdf, rng);
        if (idx & self.parity_mask).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

fn draw<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Index of the support monomial measured in shot `j`, drawn from its stream.
pub fn sample_monomial<R: Rng + ?Sized>(plan: &PauliShotPlan, rng: &mut R) -> usize {
    draw(&cumulative(&plan.probabilities), rng)
}

/// Importance-sampled estimate of `⟨O⟩`; shot `j` draws from stream `(seed, j)`.
/// The identity component is added exactly.
pub fn pauli_estimate(psi: &Statevector, obs: &PauliObservable, plan: &PauliShotPlan, seed: u64) -> Result<EstimateReport> {
    if psi.n_qubits() != obs.n_qubits() {
        return Err(Error::Dimension {
            expected: psi.n_qubits(),
            found: obs.n_qubits(),
        });
    }
    if let Some((m, _)) = plan.support.first() {
        if m.n_qubits() != psi.n_qubits() {
            return Err(Error::Dimension {
                expected: psi.n_qubits(),
                found: m.n_qubits(),
            });
        }
    }
    let settings: Option<Vec<Setting>> = (plan.support.len().saturating_mul(psi.dim()) <= PRECOMPUTE_LIMIT)
        .then(|| plan.support.par_iter().map(|(m, _)| Setting::new(psi, m)).collect());
    let monomial_cdf = cumulative(&plan.probabilities);

    let shot = |j: usize| -> f64 {
        let mut rng = RngStream::new(seed, j as u64).rng();
        let i = draw(&monomial_cdf, &mut rng);
        let (mono, a) = &plan.support[i];
        let m = match &settings {
            Some(s) => s[i].sample(&mut rng),
            None => measure_pauli_string(psi, mono, &mut rng).expect("dimensions checked"),
        };
        a * f64::from(m) / plan.probabilities[i]
    };

    let chunks: Vec<Moments> = (0..plan.shots.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let values: Vec<f64> = (c * CHUNK..((c + 1) * CHUNK).min(plan.shots)).map(shot).collect();
            Moments::from_slice(&values)
        })
        .collect();
    let moments = chunks.into_iter().fold(Moments::default(), Moments::merge);
    let sqrt_m = (plan.shots as f64).sqrt();
    let bound = plan.second_moment_bound().sqrt() / sqrt_m;
    Ok(EstimateReport {
        mean: obs.identity_coefficient() + moments.mean,
        bound_full: bound,
        bound_two: bound,
        sample_std: moments.variance().sqrt() / sqrt_m,
        m: plan.shots,
    })
}

/// `Σ|a_i|^{2−x} · Σ|a_j|^x` at each `x`, over the non-identity terms.
pub fn second_moment_curve(obs: &PauliObservable, xs: &[f64]) -> Result<Vec<f64>> {
    let mags: Vec<f64> = obs
        .non_identity_terms()
        .map(|(_, a)| a.abs())
        .filter(|&a| a > 0.0)
        .collect();
    xs.iter()
        .map(|&x| {
            if x.is_nan() || x < 0.0 {
                return Err(Error::InvalidArgument(format!("exponent {x} must be non-negative")));
            }
            let left: f64 = mags.iter().map(|a| a.powf(2.0 - x)).sum();
            let right: f64 = mags.iter().map(|a| a.powf(x)).sum();
            Ok(left * right)
        })
        .collect()
}

/// Outcome of drawing monomials uniformly from `{I,X,Y,Z}^N` and counting support hits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRate {
    pub hits: usize,
    pub samples: usize,
    /// `T / 4^N`
    pub expected: f64,
}

impl HitRate {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// Binomial standard error of [`HitRate::rate`] under the expected rate.
    pub fn standard_error(&self) -> f64 {
        (self.expected * (1.0 - self.expected) / self.samples as f64).sqrt()
    }
}

/// How often a uniformly drawn monomial lands on a non-identity term of `O`.
pub fn uniform_hit_rate(obs: &PauliObservable, samples: usize, seed: u64) -> Result<HitRate> {
    let n = obs.n_qubits();
    if n > 31 {
        return Err(Error::Size {
            what: "hit-rate qubits",
            size: n,
            limit: 31,
        });
    }
    let t = obs.non_identity_terms().count();
    let mut rng = RngStream::new(seed, 0).rng();
    let mut hits = 0;
    for _ in 0..samples {
        let letters: Vec<Letter> = (0..n).map(|_| Letter::from_code(rng.random_range(0..4))).collect();
        let m = PauliMonomial::from_letters(&letters)?;
        if !m.is_identity() && obs.coefficient(&m) != 0.0 {
            hits += 1;
        }
    }
    Ok(HitRate {
        hits,
        samples,
        expected: t as f64 / 4f64.powi(n as i32),
    })
}
