//! Snapshot estimators, the Monte Carlo averaging rule and density reconstruction.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Mat2, C64, ONE, ZERO};
use crate::pauli::{Letter, PauliMonomial, PauliObservable};
use crate::seminorm::{seminorm_full, seminorm_two};
use crate::snapshot::{Direction, Snapshot, SnapshotSet};
use crate::statevector::Statevector;

/// Default qubit cap for [`reconstruct_density`].
pub const RECONSTRUCT_QUBIT_LIMIT: usize = 8;

const CHUNK: usize = 4096;

/// Result of averaging an estimator over a snapshot set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: f64,
    /// `‖O‖ / √M`
    pub bound_full: f64,
    /// `‖O‖₂ / √M`
    pub bound_two: f64,
    /// Empirical standard deviation of the per-snapshot values, divided by `√M`.
    pub sample_std: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

/// Single-qubit estimator: `1` for the identity, `3·m·n_α` for `σ_α`.
pub fn estimator_single(letter: Letter, m: i8, d: &Direction) -> f64 {
    match letter.axis() {
        None => 1.0,
        Some(alpha) => 3.0 * f64::from(m) * d.unit_vector()[alpha],
    }
}

/// Product of single-qubit estimators over the register.
pub fn estimator_monomial(mono: &PauliMonomial, s: &Snapshot) -> Result<f64> {
    if mono.n_qubits() != s.n_qubits() {
        return Err(Error::Dimension {
            expected: mono.n_qubits(),
            found: s.n_qubits(),
        });
    }
    Ok(mono
        .support()
        .map(|(q, l)| estimator_single(l, s.outcomes[q], &s.directions[q]))
        .product())
}

/// Estimator of a full observable on one snapshot.
pub fn estimator_observable(obs: &PauliObservable, s: &Snapshot) -> Result<f64> {
    obs.terms()
        .map(|(m, a)| estimator_monomial(m, s).map(|v| a * v))
        .sum()
}

/// Running count, mean and sum of squared deviations, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    /// Two-pass moments of a slice, with a compensated sum for the mean.
    pub fn from_slice(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mean = neumaier_sum(values.iter().copied()) / values.len() as f64;
        let m2 = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        Self {
            count: values.len(),
            mean,
            m2,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        Self {
            count: self.count + other.count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }

    /// Unbiased variance (denominator `count − 1`); zero for fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Non-identity terms as `(coefficient, [(qubit, axis)])`.
type CompiledTerm = (f64, SmallVec<[(u32, u8); 8]>);

fn compile(obs: &PauliObservable) -> Vec<CompiledTerm> {
    obs.non_identity_terms()
        .map(|(m, a)| {
            let support = m
                .support()
                .map(|(q, l)| (q as u32, l.axis().expect("non-identity letter") as u8))
                .collect();
            (a, support)
        })
        .collect()
}

/// Per-snapshot `3·m·n_α` values laid out as `[snapshot][qubit][axis]`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    n_qubits: usize,
    len: usize,
    data: Vec<[f64; 3]>,
}

impl WeightTable {
    pub fn new(set: &SnapshotSet) -> Self {
        let data = set.snapshots().iter().flat_map(|s| s.pauli_weights()).collect();
        Self {
            n_qubits: set.n_qubits(),
            len: set.len(),
            data,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn row(&self, j: usize) -> &[[f64; 3]] {
        &self.data[j * self.n_qubits..(j + 1) * self.n_qubits]
    }

    #[inline]
    fn value(&self, j: usize, terms: &[CompiledTerm]) -> f64 {
        let row = self.row(j);
        terms
            .iter()
            .map(|(a, support)| {
                a * support
                    .iter()
                    .map(|&(q, ax)| row[q as usize][ax as usize])
                    .product::<f64>()
            })
            .sum()
    }

    fn check(&self, obs: &PauliObservable) -> Result<()> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: obs.n_qubits(),
            });
        }
        if self.len == 0 {
            return Err(Error::EmptySet);
        }
        Ok(())
    }

    /// Moments of the non-identity part of `R[O]` over all snapshots.
    /// Chunks are reduced in index order, so the result does not depend on the thread count.
    pub fn sampled_moments(&self, obs: &PauliObservable) -> Result<Moments> {
        self.check(obs)?;
        let terms = compile(obs);
        if terms.is_empty() {
            return Ok(Moments {
                count: self.len,
                mean: 0.0,
                m2: 0.0,
            });
        }
        let chunks: Vec<Moments> = (0..self.len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let range = c * CHUNK..((c + 1) * CHUNK).min(self.len);
                let values: Vec<f64> = range.map(|j| self.value(j, &terms)).collect();
                Moments::from_slice(&values)
            })
            .collect();
        Ok(chunks.into_iter().fold(Moments::default(), Moments::merge))
    }

    /// Mean of a single monomial's estimator.
    pub fn monomial_mean(&self, mono: &PauliMonomial) -> Result<f64> {
        let obs = PauliObservable::from_terms(mono.n_qubits(), [(mono.clone(), 1.0)])?;
        if mono.is_identity() {
            self.check(&obs)?;
            return Ok(1.0);
        }
        Ok(self.sampled_moments(&obs)?.mean)
    }

    /// Per-snapshot values of `R[O]`, identity part included.
    pub fn values(&self, obs: &PauliObservable) -> Result<Vec<f64>> {
        self.check(obs)?;
        let terms = compile(obs);
        let c0 = obs.identity_coefficient();
        Ok((0..self.len)
            .into_par_iter()
            .map(|j| c0 + self.value(j, &terms))
            .collect())
    }
}

/// Memoized monomial means over a fixed snapshot set. By linearity,
/// `⟨O⟩_S = Σ a_i ⟨σ_i⟩_S`, so repeated objective evaluations reuse earlier work.
#[derive(Debug)]
pub struct MonomialCache {
    table: WeightTable,
    means: Mutex<HashMap<PauliMonomial, f64>>,
}

impl MonomialCache {
    pub fn new(set: &SnapshotSet) -> Self {
        Self {
            table: WeightTable::new(set),
            means: Mutex::new(HashMap::new()),
        }
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn cached_monomials(&self) -> usize {
        self.means.lock().expect("cache lock").len()
    }

    pub fn mean(&self, obs: &PauliObservable) -> Result<f64> {
        self.table.check(obs)?;
        let mut total = obs.identity_coefficient();
        for (m, a) in obs.non_identity_terms() {
            let hit = self.means.lock().expect("cache lock").get(m).copied();
            let v = match hit {
                Some(v) => v,
                None => {
                    let v = self.table.monomial_mean(m)?;
                    self.means.lock().expect("cache lock").insert(m.clone(), v);
                    v
                }
            };
            total += a * v;
        }
        Ok(total)
    }
}

/// `⟨O⟩_S` only, without the seminorm bounds.
pub fn estimate_mean(set: &SnapshotSet, obs: &PauliObservable) -> Result<f64> {
    let moments = WeightTable::new(set).sampled_moments(obs)?;
    Ok(obs.identity_coefficient() + moments.mean)
}

/// `⟨O⟩_S` with analytic and empirical error bars.
pub fn estimate(set: &SnapshotSet, obs: &PauliObservable) -> Result<EstimateReport> {
    let moments = WeightTable::new(set).sampled_moments(obs)?;
    Ok(report_from_moments(obs, &moments))
}

pub(crate) fn report_from_moments(obs: &PauliObservable, moments: &Moments) -> EstimateReport {
    let sqrt_m = (moments.count as f64).sqrt();
    EstimateReport {
        mean: obs.identity_coefficient() + moments.mean,
        bound_full: seminorm_full(obs) / sqrt_m,
        bound_two: seminorm_two(obs) / sqrt_m,
        sample_std: moments.variance().sqrt() / sqrt_m,
        m: moments.count,
    }
}

/// Per-snapshot values of `R[O]`.
pub fn snapshot_values(set: &SnapshotSet, obs: &PauliObservable) -> Result<Vec<f64>> {
    WeightTable::new(set).values(obs)
}

/// Unbiased empirical variance of `R[O]` over the set.
pub fn empirical_variance(set: &SnapshotSet, obs: &PauliObservable) -> Result<f64> {
    Ok(WeightTable::new(set).sampled_moments(obs)?.variance())
}

/// `½(𝟙 + 3m σ·n)`.
pub fn kernel_single(m: i8, d: &Direction) -> Mat2 {
    let [x, y, z] = d.unit_vector().map(|v| 1.5 * f64::from(m) * v);
    [
        [C64::new(0.5 + z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(0.5 - z, 0.0)],
    ]
}

/// Tensor product of the single-qubit kernels of one snapshot.
pub fn kernel_product(s: &Snapshot) -> DenseMatrix {
    let mut out = DenseMatrix::from_element(1, 1, ONE);
    for (d, &m) in s.directions.iter().zip(&s.outcomes) {
        let k = kernel_single(m, d);
        out = crate::linalg::kron(&out, &crate::linalg::mat2_to_dense(&k));
    }
    out
}

/// `ρ̃ = (1/M) Σ_j K(s_j)`.
pub fn reconstruct_density(set: &SnapshotSet) -> Result<DenseMatrix> {
    reconstruct_density_with_limit(set, RECONSTRUCT_QUBIT_LIMIT)
}

pub fn reconstruct_density_with_limit(set: &SnapshotSet, limit: usize) -> Result<DenseMatrix> {
    let n = set.n_qubits();
    if n > limit {
        return Err(Error::Size {
            what: "density reconstruction qubits",
            size: n,
            limit,
        });
    }
    let dim = 1usize << n;
    let partials: Vec<DenseMatrix> = set
        .snapshots()
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = DenseMatrix::from_element(dim, dim, ZERO);
            for s in chunk {
                acc += kernel_product(s);
            }
            acc
        })
        .collect();
    let mut rho = DenseMatrix::from_element(dim, dim, ZERO);
    for p in partials {
        rho += p;
    }
    Ok(rho / C64::new(set.len() as f64, 0.0))
}

/// Mean absolute deviation between `⟨O⟩_S` and the exact `⟨ψ|O|ψ⟩` over the list.
pub fn approx_fidelity(set: &SnapshotSet, psi: &Statevector, observables: &[PauliObservable]) -> Result<f64> {
    if observables.is_empty() {
        return Err(Error::InvalidArgument("observable list is empty".into()));
    }
    if psi.n_qubits() != set.n_qubits() {
        return Err(Error::Dimension {
            expected: set.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    let table = WeightTable::new(set);
    let mut total = 0.0;
    for obs in observables {
        let approx = obs.identity_coefficient() + table.sampled_moments(obs)?.mean;
        total += (approx - psi.exact_expectation(obs)?).abs();
    }
    Ok(total / observables.len() as f64)
}
