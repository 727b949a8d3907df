//! Variational minimization of `⟨O⟩` over circuits applied to a fixed snapshot set.
//!
//! The circuit is pushed onto the observable (`O ↦ U†OU`) symbolically, so every
//! trial parameter vector is evaluated on the same snapshots without new shots.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{estimate, EstimateReport, MonomialCache};
use crate::linalg::{Mat2, Mat4, C64, ZERO};
use crate::pauli::{Letter, PauliMonomial, PauliObservable};
use crate::rng::{derive_seed, RngStream};
use crate::seminorm::{entangler_growth_bound, seminorm_two};
use crate::simplex::{nelder_mead, SimplexOptions};
use crate::snapshot::{build_snapshot_set, Direction, SnapshotSet};
use crate::statevector::Statevector;

/// Default cap on the number of terms produced by [`heisenberg_transform`].
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Two-qubit generator `Σ_k A_k ⊗ B_k`; the gate is `Π_k exp(−i η/2 · A_k ⊗ B_k)`,
/// with the first factor acting last on the state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Generator(Vec<[Letter; 2]>);

impl Generator {
    pub fn new(terms: Vec<[Letter; 2]>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|t| t.contains(&Letter::I)) {
            return Err(Error::InvalidArgument(
                "generator terms must be products of two non-identity letters".into(),
            ));
        }
        Ok(Self(terms))
    }

    pub fn xx() -> Self {
        Self(vec![[Letter::X, Letter::X]])
    }

    pub fn terms(&self) -> &[[Letter; 2]] {
        &self.0
    }
}

impl Default for Generator {
    fn default() -> Self {
        Self::xx()
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let terms = s
            .split('+')
            .map(|t| {
                let letters: Vec<Letter> = t.trim().chars().filter_map(Letter::from_char).collect();
                match letters.as_slice() {
                    [a, b] if t.trim().chars().count() == 2 => Ok([*a, *b]),
                    _ => Err(Error::InvalidArgument(format!("bad generator term {t:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, [a, b]) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            write!(f, "{}{}", a.to_char(), b.to_char())?;
        }
        Ok(())
    }
}

impl TryFrom<String> for Generator {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Generator> for String {
    fn from(g: Generator) -> String {
        g.to_string()
    }
}

/// One layer of the parametric circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    /// `⊗_k exp(−i ψ_k/2 · σ·n_k)`, three parameters `(ψ, θ, φ)` per qubit.
    SingleQubit,
    /// Generator gates on disjoint pairs, one parameter `η` per pair.
    Entangler { pairs: Vec<(usize, usize)>, generator: Generator },
}

impl Layer {
    pub fn n_params(&self, n_qubits: usize) -> usize {
        match self {
            Layer::SingleQubit => 3 * n_qubits,
            Layer::Entangler { pairs, .. } => pairs.len(),
        }
    }
}

/// Brick pairing: `(0,1), (2,3), …` for parity 0 and `(1,2), (3,4), …` for parity 1.
pub fn brick_pairs(n_qubits: usize, parity: usize) -> Vec<(usize, usize)> {
    (parity % 2..n_qubits.saturating_sub(1))
        .step_by(2)
        .map(|k| (k, k + 1))
        .collect()
}

/// Layers listed in the order they act on the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricCircuit {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

impl ParametricCircuit {
    pub fn new(n_qubits: usize, layers: Vec<Layer>) -> Result<Self> {
        for layer in &layers {
            if let Layer::Entangler { pairs, .. } = layer {
                let mut used = vec![false; n_qubits];
                for &(a, b) in pairs {
                    for q in [a, b] {
                        if q >= n_qubits || used[q] {
                            return Err(Error::QubitIndex { index: q, n_qubits });
                        }
                        used[q] = true;
                    }
                }
            }
        }
        Ok(Self { n_qubits, layers })
    }

    /// Entangler on the given brick parity followed by a single-qubit layer.
    pub fn brick_step(n_qubits: usize, parity: usize, generator: Generator) -> Result<Self> {
        Self::new(
            n_qubits,
            vec![
                Layer::Entangler {
                    pairs: brick_pairs(n_qubits, parity),
                    generator,
                },
                Layer::SingleQubit,
            ],
        )
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.n_params(self.n_qubits)).sum()
    }

    fn split_params<'a>(&self, params: &'a [f64]) -> Result<Vec<&'a [f64]>> {
        if params.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                found: params.len(),
            });
        }
        let mut rest = params;
        Ok(self
            .layers
            .iter()
            .map(|l| {
                let (head, tail) = rest.split_at(l.n_params(self.n_qubits));
                rest = tail;
                head
            })
            .collect())
    }

    /// Applies `U(params)` to a state.
    pub fn apply(&self, psi: &mut Statevector, params: &[f64]) -> Result<()> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: psi.n_qubits(),
            });
        }
        for (layer, p) in self.layers.iter().zip(self.split_params(params)?) {
            match layer {
                Layer::SingleQubit => {
                    for (q, z) in p.chunks_exact(3).enumerate() {
                        psi.apply_single_qubit(q, &single_qubit_gate(z[0], z[1], z[2]))?;
                    }
                }
                Layer::Entangler { pairs, generator } => {
                    for (&pair, &eta) in pairs.iter().zip(p) {
                        for term in generator.terms().iter().rev() {
                            psi.apply_two_qubit(pair, &pair_gate(*term, eta))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `exp(−i ψ/2 · σ·n)` with `n` given by `(θ, φ)`.
pub fn single_qubit_gate(psi: f64, theta: f64, phi: f64) -> Mat2 {
    let [x, y, z] = Direction::new(theta, phi).unit_vector();
    let (s, c) = (psi / 2.0).sin_cos();
    // c·𝟙 − i s (x σx + y σy + z σz)
    [
        [C64::new(c, -s * z), C64::new(-s * y, -s * x)],
        [C64::new(s * y, -s * x), C64::new(c, s * z)],
    ]
}

/// `exp(−i η/2 · A⊗B)`, `A` on the high bit of the pair.
pub fn pair_gate(term: [Letter; 2], eta: f64) -> Mat4 {
    let (a, b) = (term[0].matrix(), term[1].matrix());
    let (s, c) = (eta / 2.0).sin_cos();
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            let g = a[r >> 1][col >> 1] * b[r & 1][col & 1];
            out[r][col] = C64::new(0.0, -s) * g + if r == col { C64::new(c, 0.0) } else { ZERO };
        }
    }
    out
}

/// SO(3) image of `exp(−i ψ/2 · σ·n)`: rotation by `ψ` about `n`, so that
/// `U† σ_α U = Σ_β R[α][β] σ_β`.
pub fn rotation_matrix(psi: f64, theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let n = Direction::new(theta, phi).unit_vector();
    let (s, c) = psi.sin_cos();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let cross = match (i, j) {
                (0, 1) => -n[2],
                (1, 0) => n[2],
                (0, 2) => n[1],
                (2, 0) => -n[1],
                (1, 2) => -n[0],
                (2, 1) => n[0],
                _ => 0.0,
            };
            r[i][j] = (1.0 - c) * n[i] * n[j] + s * cross + if i == j { c } else { 0.0 };
        }
    }
    r
}

fn check_budget(obs: &PauliObservable, cap: usize) -> Result<()> {
    if obs.len() > cap {
        Err(Error::TermBudget {
            count: obs.len(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// `U†(params) O U(params)` computed term by term.
pub fn heisenberg_transform(obs: &PauliObservable, circuit: &ParametricCircuit, params: &[f64]) -> Result<PauliObservable> {
    heisenberg_transform_capped(obs, circuit, params, DEFAULT_TERM_CAP)
}

pub fn heisenberg_transform_capped(
    obs: &PauliObservable,
    circuit: &ParametricCircuit,
    params: &[f64],
    term_cap: usize,
) -> Result<PauliObservable> {
    let n = circuit.n_qubits;
    if obs.n_qubits() != n {
        return Err(Error::Dimension {
            expected: n,
            found: obs.n_qubits(),
        });
    }
    let chunks = circuit.split_params(params)?;
    let mut out = obs.clone();
    for (layer, p) in circuit.layers.iter().zip(chunks).rev() {
        match layer {
            Layer::SingleQubit => {
                for (q, z) in p.chunks_exact(3).enumerate() {
                    if z[0] != 0.0 {
                        out = out.conjugate_on_qubit(q, &rotation_matrix(z[0], z[1], z[2]))?;
                        check_budget(&out, term_cap)?;
                    }
                }
            }
            Layer::Entangler { pairs, generator } => {
                for (&(a, b), &eta) in pairs.iter().zip(p) {
                    if eta == 0.0 {
                        continue;
                    }
                    for &[la, lb] in generator.terms() {
                        let axis = PauliMonomial::single(n, a, la)?.with_letter(b, lb);
                        out = out.conjugate_by_rotation(&axis, eta)?;
                        check_budget(&out, term_cap)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `params ↦ ⟨U†OU⟩_S` with monomial means memoized across calls.
pub struct Objective<'a> {
    obs: &'a PauliObservable,
    circuit: &'a ParametricCircuit,
    cache: MonomialCache,
    term_cap: usize,
}

impl<'a> Objective<'a> {
    pub fn new(set: &SnapshotSet, obs: &'a PauliObservable, circuit: &'a ParametricCircuit) -> Result<Self> {
        if set.n_qubits() != obs.n_qubits() || circuit.n_qubits != obs.n_qubits() {
            return Err(Error::Dimension {
                expected: set.n_qubits(),
                found: obs.n_qubits(),
            });
        }
        Ok(Self {
            obs,
            circuit,
            cache: MonomialCache::new(set),
            term_cap: DEFAULT_TERM_CAP,
        })
    }

    pub fn with_term_cap(mut self, cap: usize) -> Self {
        self.term_cap = cap;
        self
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        let transformed = heisenberg_transform_capped(self.obs, self.circuit, params, self.term_cap)?;
        self.cache.mean(&transformed)
    }
}

/// `⟨U†OU⟩_S` for one parameter vector.
pub fn objective(set: &SnapshotSet, obs: &PauliObservable, circuit: &ParametricCircuit, params: &[f64]) -> Result<f64> {
    Objective::new(set, obs, circuit)?.value(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub starts: usize,
    pub simplex: SimplexOptions,
    pub term_cap: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            starts: 4,
            simplex: SimplexOptions::default(),
            term_cap: DEFAULT_TERM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Whether the winning start met the simplex tolerance before its budget ran out.
    pub converged: bool,
}

/// Multi-start simplex search. Start 0 is the all-zero (identity) circuit; the rest
/// are uniform in `[−π/2, π/2]` drawn from stream `(seed, start)`.
pub fn minimize_over_params(
    set: &SnapshotSet,
    obs: &PauliObservable,
    circuit: &ParametricCircuit,
    seed: u64,
    opts: &MinimizeOptions,
) -> Result<Minimum> {
    use rand::Rng;
    let objective = Objective::new(set, obs, circuit)?.with_term_cap(opts.term_cap);
    let dim = circuit.n_params();
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1) as u64)
        .map(|k| {
            if k == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = RngStream::new(seed, k).rng();
                let h = std::f64::consts::FRAC_PI_2;
                (0..dim).map(|_| rng.random_range(-h..h)).collect()
            }
        })
        .collect();
    let results = starts
        .par_iter()
        .map(|x0| nelder_mead(|x| objective.value(x), x0, &opts.simplex))
        .collect::<Result<Vec<_>>>()?;
    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let best = results
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one start");
    Ok(Minimum {
        params: best.point,
        value: best.value,
        evaluations,
        converged: best.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOptions {
    pub shots: usize,
    pub iterations: usize,
    pub seed: u64,
    pub generator: Generator,
    pub minimize: MinimizeOptions,
}

impl ProtocolOptions {
    pub fn new(shots: usize, iterations: usize, seed: u64) -> Self {
        Self {
            shots,
            iterations,
            seed,
            generator: Generator::default(),
            minimize: MinimizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub circuit: ParametricCircuit,
    pub params: Vec<f64>,
    /// Minimized `⟨O(ξ)⟩` on this iteration's snapshot set.
    pub o_t: f64,
    /// The same set's estimate at the identity circuit.
    pub o_identity: f64,
    pub transformed_two: f64,
    pub transformed_terms: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub n_qubits: usize,
    pub seed: u64,
    pub shots_per_iteration: usize,
    /// `3^{P/2}‖O‖₂`, the largest `‖O(ξ)‖₂` one step can produce.
    pub growth_bound: f64,
    /// Allowed rise of `o_t` over `o_{t−1}`: `2·growth_bound/√M`.
    pub monotonicity_slack: f64,
    pub iterations: Vec<IterationRecord>,
    pub final_estimate: EstimateReport,
    /// `⟨ψ_final|O|ψ_final⟩` from the simulator.
    pub final_exact: f64,
    pub final_state: Vec<[f64; 2]>,
}

impl OptimizerTrace {
    /// Indices `t ≥ 1` where `o_t` rose by more than the slack.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.iterations
            .windows(2)
            .filter(|w| w[1].o_t > w[0].o_t + self.monotonicity_slack)
            .map(|w| w[1].iteration)
            .collect()
    }
}

/// Iterates: snapshot the current state, minimize over one brick step, apply the
/// optimum to the state, alternate the brick parity. A fresh set is taken at the end.
pub fn run_protocol(psi0: &Statevector, obs: &PauliObservable, opts: &ProtocolOptions) -> Result<OptimizerTrace> {
    let n = psi0.n_qubits();
    if obs.n_qubits() != n {
        return Err(Error::Dimension {
            expected: n,
            found: obs.n_qubits(),
        });
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("at least one iteration is required".into()));
    }
    if opts.shots == 0 {
        return Err(Error::EmptySet);
    }
    let growth_bound = entangler_growth_bound(obs, n);
    let slack = 2.0 * growth_bound / (opts.shots as f64).sqrt();

    let mut state = psi0.clone();
    let mut records = Vec::with_capacity(opts.iterations);
    for t in 0..opts.iterations {
        let set = build_snapshot_set(&state, opts.shots, derive_seed(opts.seed, t as u64))?;
        let circuit = ParametricCircuit::brick_step(n, t % 2, opts.generator.clone())?;
        let objective = Objective::new(&set, obs, &circuit)?.with_term_cap(opts.minimize.term_cap);
        let o_identity = objective.value(&vec![0.0; circuit.n_params()])?;
        let best = minimize_over_params(&set, obs, &circuit, derive_seed(opts.seed, 1 << 32 | t as u64), &opts.minimize)?;
        let transformed = heisenberg_transform_capped(obs, &circuit, &best.params, opts.minimize.term_cap)?;
        circuit.apply(&mut state, &best.params)?;
        records.push(IterationRecord {
            iteration: t,
            params: best.params,
            o_t: best.value,
            o_identity,
            transformed_two: seminorm_two(&transformed),
            transformed_terms: transformed.len(),
            evaluations: best.evaluations,
            converged: best.converged,
            circuit,
        });
    }
    let final_set = build_snapshot_set(&state, opts.shots, derive_seed(opts.seed, opts.iterations as u64))?;
    Ok(OptimizerTrace {
        n_qubits: n,
        seed: opts.seed,
        shots_per_iteration: opts.shots,
        growth_bound,
        monotonicity_slack: slack,
        iterations: records,
        final_estimate: estimate(&final_set, obs)?,
        final_exact: state.exact_expectation(obs)?,
        final_state: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
    })
}
