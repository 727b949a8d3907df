//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p aqstate-core --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use aqstate_core::estimation::{estimator_observable, Moments};
use aqstate_core::linalg::{hermitian_eigenvalues, kron, mat2_to_dense, trace_distance, DenseMatrix, C64, ONE, ZERO};
use aqstate_core::optimizer::brick_pairs;
use aqstate_core::pauli_baseline::second_moment_curve;
use aqstate_core::seminorm::{entangler_growth_bound, projector_observable};
use aqstate_core::snapshot::Snapshot;
use aqstate_core::*;
use nalgebra::DMatrix;
use rand::Rng;

type StateFamily = Box<dyn Fn(u64) -> Statevector>;

fn report(criterion: u32, ok: bool, detail: String, elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion {criterion}: {detail} ({:.2}s, limit {}s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
    assert!(in_time, "criterion {criterion} exceeded its time limit");
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

/// Random observable with at least one non-identity term, rescaled to `‖O‖ = 1`.
fn random_unit_observable<R: Rng>(n: usize, terms: usize, rng: &mut R) -> PauliObservable {
    loop {
        let o = random_observable(n, terms, rng);
        let s = seminorm_full(&o);
        if s > 1e-3 {
            return o.scaled(1.0 / s);
        }
    }
}

fn identity(dim: usize) -> DenseMatrix {
    DMatrix::from_fn(dim, dim, |r, c| if r == c { ONE } else { ZERO })
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

#[test]
fn criterion_01_quadrature_unbiasedness() {
    let start = Instant::now();
    let nodes = gauss_legendre(32);
    let n_phi = 64;
    let sigma = [Letter::X, Letter::Y, Letter::Z].map(|l| mat2_to_dense(&l.matrix()));
    let mut rng = RngStream::new(1, 0).rng();
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let psi = prepare(&StateKind::RandomHaar(1000 + trial), 1).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let o = PauliObservable::from_strs(&[
            (rng.random_range(-1.0..1.0), "I"),
            (rng.random_range(-1.0..1.0), "X"),
            (rng.random_range(-1.0..1.0), "Y"),
            (rng.random_range(-1.0..1.0), "Z"),
        ])
        .unwrap();
        let mut expectation = 0.0;
        for &(x, w) in &nodes {
            for k in 0..n_phi {
                let phi = 2.0 * PI * k as f64 / n_phi as f64;
                let d = Direction::new(x.clamp(-1.0, 1.0).acos(), phi);
                let n = d.unit_vector();
                let sn = &sigma[0] * C64::new(n[0], 0.0) + &sigma[1] * C64::new(n[1], 0.0) + &sigma[2] * C64::new(n[2], 0.0);
                for m in [1i8, -1] {
                    let proj = (identity(2) + &sn * C64::new(f64::from(m), 0.0)) * C64::new(0.5, 0.0);
                    let p = (v.adjoint() * &proj * &v)[(0, 0)].re;
                    let r = estimator_observable(&o, &Snapshot::new(vec![d], vec![m]).unwrap()).unwrap();
                    expectation += w * (2.0 * PI / n_phi as f64) * p * r / (4.0 * PI);
                }
            }
        }
        worst = worst.max((expectation - psi.exact_expectation(&o).unwrap()).abs());
    }
    report(
        1,
        worst <= 1e-6,
        format!("max |E_quad[R1] - <O>| = {worst:.2e} over 50 states (tol 1e-6)"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_02_second_moment_identity() {
    let start = Instant::now();
    let psi = prepare(&StateKind::RandomHaar(2), 1).unwrap();
    let set = build_snapshot_set(&psi, 100_000, 2).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for l in ["X", "Y", "Z"] {
        let o = PauliObservable::from_strs(&[(1.0, l)]).unwrap();
        let squares: Vec<f64> = estimation::snapshot_values(&set, &o)
            .unwrap()
            .into_iter()
            .map(|v| v * v)
            .collect();
        let mo = Moments::from_slice(&squares);
        let se = (mo.variance() / mo.count as f64).sqrt();
        ok &= (mo.mean - 3.0).abs() <= 5.0 * se;
        details.push(format!("{l}: {:.4} ± {:.4}", mo.mean, se));
    }
    report(
        2,
        ok,
        format!("mean R1^2 within 3 ± 5 se: {}", details.join(", ")),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_03_error_bound_coverage() {
    let start = Instant::now();
    let n = 4;
    let m = 10_000;
    let tol = 3.0 / (m as f64).sqrt();
    let mut rng = RngStream::new(3, 0).rng();
    let families: Vec<(&str, StateFamily)> = vec![
        ("ghz", Box::new(move |_| prepare(&StateKind::Ghz, n).unwrap())),
        ("haar", Box::new(move |t| prepare(&StateKind::RandomHaar(300 + t), n).unwrap())),
        (
            "product",
            Box::new(move |t| {
                let mut r = RngStream::new(301, t).rng();
                let angles = (0..n).map(|_| (r.random_range(0.0..PI), r.random_range(0.0..2.0 * PI))).collect();
                prepare(&StateKind::Product(angles), n).unwrap()
            }),
        ),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (fi, (name, make)) in families.iter().enumerate() {
        let mut covered = 0;
        for t in 0..100u64 {
            let psi = make(t);
            let o = random_unit_observable(n, 6, &mut rng);
            let set = build_snapshot_set(&psi, m, 10_000 * fi as u64 + t).unwrap();
            let est = estimate(&set, &o).unwrap().mean;
            if (est - psi.exact_expectation(&o).unwrap()).abs() <= tol {
                covered += 1;
            }
        }
        ok &= covered >= 99;
        details.push(format!("{name} {covered}/100"));
    }
    report(
        3,
        ok,
        format!("|<O>_S - <O>| <= 3/sqrt(M) (need >= 99): {}", details.join(", ")),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_04_projector_closed_form() {
    let start = Instant::now();
    let mut rng = RngStream::new(4, 0).rng();
    let mut worst = 0.0f64;
    for n in 1..=10 {
        for _ in 0..10 {
            let bits: String = (0..n).map(|_| if rng.random::<bool>() { '1' } else { '0' }).collect();
            let p = projector_observable(&bits).unwrap();
            let want = 1.0 - 4f64.powi(-n);
            worst = worst.max((seminorm_two(&p).powi(2) - want).abs());
        }
    }
    report(
        4,
        worst <= 1e-12,
        format!("max |‖P‖₂² - (1 - 4^-N)| = {worst:.2e} for N = 1..10 (tol 1e-12)"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_05_ordering_and_variance_domination() {
    let start = Instant::now();
    let mut rng = RngStream::new(5, 0).rng();
    let mut order_failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let o = random_observable(n, rng.random_range(1..=12), &mut rng);
        let (two, full, one) = (seminorm_two(&o), seminorm_full(&o), seminorm_one(&o));
        if two > full + 1e-12 || full > one + 1e-12 {
            order_failures += 1;
        }
    }
    let m = 20_000;
    let mut var_failures = 0;
    let mut worst_ratio = 0.0f64;
    for t in 0..50u64 {
        let n = rng.random_range(1..=4);
        let psi = prepare(&StateKind::RandomHaar(500 + t), n).unwrap();
        let o = random_observable(n, rng.random_range(1..=6), &mut rng);
        let values = estimation::snapshot_values(&build_snapshot_set(&psi, m, 500 + t).unwrap(), &o).unwrap();
        let mo = Moments::from_slice(&values);
        let var = mo.variance();
        let m4 = values.iter().map(|v| (v - mo.mean).powi(4)).sum::<f64>() / m as f64;
        let se = ((m4 - var * var).max(0.0) / m as f64).sqrt();
        let bound = seminorm_full(&o).powi(2);
        if var > bound + 5.0 * se {
            var_failures += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(var / bound);
        }
    }
    report(
        5,
        order_failures == 0 && var_failures == 0,
        format!(
            "ordering violations {order_failures}/1000; Var > ‖O‖²+5se in {var_failures}/50 (max Var/‖O‖² = {worst_ratio:.3})"
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

const GENERATORS: [&str; 6] = ["XX", "YY", "ZZ", "XZ", "XX+YY", "ZZ+XY"];

fn random_layer<R: Rng>(n: usize, single: bool, rng: &mut R) -> Layer {
    if single {
        return Layer::SingleQubit;
    }
    let mut pairs = brick_pairs(n, rng.random_range(0..2));
    if rng.random::<bool>() {
        pairs = pairs.into_iter().map(|(a, b)| (b, a)).collect();
    }
    Layer::Entangler {
        pairs,
        generator: GENERATORS[rng.random_range(0..GENERATORS.len())].parse().unwrap(),
    }
}

fn embed(n: usize, ops: &[(usize, DenseMatrix)]) -> DenseMatrix {
    let mut out = identity(1);
    for q in 0..n {
        let factor = ops.iter().find(|(k, _)| *k == q).map(|(_, m)| m.clone()).unwrap_or_else(|| identity(2));
        out = kron(&out, &factor);
    }
    out
}

/// Dense `U` from matrix exponentials of the layer generators.
fn dense_unitary(circuit: &ParametricCircuit, params: &[f64]) -> DenseMatrix {
    let n = circuit.n_qubits;
    let mut u = identity(1 << n);
    let mut offset = 0;
    for layer in &circuit.layers {
        let count = layer.n_params(n);
        let p = &params[offset..offset + count];
        offset += count;
        match layer {
            Layer::SingleQubit => {
                for (q, z) in p.chunks_exact(3).enumerate() {
                    let d = Direction::new(z[1], z[2]).unit_vector();
                    let h = Letter::PAULIS
                        .iter()
                        .zip(d)
                        .map(|(l, c)| mat2_to_dense(&l.matrix()) * C64::new(c, 0.0))
                        .fold(DMatrix::from_element(2, 2, ZERO), |a, b| a + b);
                    let g = (h * C64::new(0.0, -z[0] / 2.0)).exp();
                    u = embed(n, &[(q, g)]) * u;
                }
            }
            Layer::Entangler { pairs, generator } => {
                for (&(a, b), &eta) in pairs.iter().zip(p) {
                    for &[la, lb] in generator.terms().iter().rev() {
                        let h = embed(n, &[(a, mat2_to_dense(&la.matrix())), (b, mat2_to_dense(&lb.matrix()))]);
                        u = (h * C64::new(0.0, -eta / 2.0)).exp() * u;
                    }
                }
            }
        }
    }
    u
}

#[test]
fn criterion_06_conjugation_oracle() {
    let start = Instant::now();
    let mut rng = RngStream::new(6, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let layers = (0..rng.random_range(1..=4)).map(|_| random_layer(n, rng.random::<bool>(), &mut rng)).collect();
        let circuit = ParametricCircuit::new(n, layers).unwrap();
        let params: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let o = random_observable(n, rng.random_range(1..=6), &mut rng);
        let symbolic = heisenberg_transform(&o, &circuit, &params).unwrap().to_dense().unwrap();
        let u = dense_unitary(&circuit, &params);
        let dense = u.adjoint() * o.to_dense().unwrap() * &u;
        worst = worst.max((symbolic - dense).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    report(
        6,
        worst <= 1e-10,
        format!("max entrywise |U†OU - symbolic| = {worst:.2e} over 200 circuits (tol 1e-10)"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_07_seminorm_transformation_laws() {
    let start = Instant::now();
    let mut rng = RngStream::new(7, 0).rng();
    let mut worst_single = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let o = random_observable(n, rng.random_range(1..=8), &mut rng);
        let circuit = ParametricCircuit::new(n, vec![Layer::SingleQubit]).unwrap();
        let params: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let out = heisenberg_transform(&o, &circuit, &params).unwrap();
        worst_single = worst_single.max((seminorm_two(&out) - seminorm_two(&o)).abs());
    }
    let mut entangler_violations = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let o = random_observable(n, rng.random_range(1..=8), &mut rng);
        let circuit = ParametricCircuit::new(n, vec![random_layer(n, false, &mut rng)]).unwrap();
        let params: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let out = heisenberg_transform(&o, &circuit, &params).unwrap();
        let bound = entangler_growth_bound(&o, n);
        if seminorm_two(&out) > bound * (1.0 + 1e-12) {
            entangler_violations += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(seminorm_two(&out) / bound);
        }
    }
    report(
        7,
        worst_single <= 1e-10 && entangler_violations == 0,
        format!(
            "single-qubit max |Δ‖O‖₂| = {worst_single:.2e} (tol 1e-10); entangler bound violated {entangler_violations}/200 (max ratio {worst_ratio:.3})"
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_08_pauli_baseline() {
    let start = Instant::now();
    let mut rng = RngStream::new(8, 0).rng();
    let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let one = xs.iter().position(|&x| (x - 1.0).abs() < 1e-12).unwrap();
    let mut curve_failures = 0;
    for _ in 0..100 {
        let t = rng.random_range(2..=8);
        let o = loop {
            let o = random_observable(3, t, &mut rng);
            let mags: Vec<f64> = o.non_identity_terms().map(|(_, a)| a.abs()).collect();
            let spread = mags.iter().cloned().fold(0.0, f64::max) - mags.iter().cloned().fold(f64::INFINITY, f64::min);
            if mags.len() >= 2 && spread > 1e-3 {
                break o;
            }
        };
        let curve = second_moment_curve(&o, &xs).unwrap();
        let argmin = (0..curve.len()).min_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
        if argmin != one {
            curve_failures += 1;
        }
    }

    let mut details = Vec::new();
    let mut unbiased = true;
    for sampler in [Sampler::L1Weighted, Sampler::UniformSupport] {
        let (mut sum_dev, mut sum_var) = (0.0, 0.0);
        for run in 0..100u64 {
            let psi = prepare(&StateKind::RandomHaar(800 + run), 3).unwrap();
            let o = random_observable(3, 6, &mut rng);
            let plan = PauliShotPlan::new(&o, sampler, 10_000).unwrap();
            let r = pauli_estimate(&psi, &o, &plan, 800 + run).unwrap();
            sum_dev += r.mean - psi.exact_expectation(&o).unwrap();
            sum_var += r.sample_std.powi(2);
        }
        let mean_dev = sum_dev / 100.0;
        let combined_se = sum_var.sqrt() / 100.0;
        unbiased &= mean_dev.abs() <= 3.0 * combined_se;
        details.push(format!("{sampler:?} bias {mean_dev:.2e} (3se {:.2e})", 3.0 * combined_se));
    }
    report(
        8,
        curve_failures == 0 && unbiased,
        format!("curve argmin != 1 in {curve_failures}/100; {}", details.join(", ")),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_09_optimizer_end_to_end() {
    let start = Instant::now();
    let h = PauliObservable::from_strs(&[(-1.0, "ZZ"), (-0.5, "XI"), (-0.5, "IX")]).unwrap();
    let ground = hermitian_eigenvalues(&h.to_dense().unwrap())[0];
    let psi = prepare(&StateKind::Zeros, 2).unwrap();
    let m = 100_000;
    let tol = (3.0 * seminorm_full(&h) / (m as f64).sqrt()).max(0.05);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for seed in 0..10 {
        let trace = run_protocol(&psi, &h, &ProtocolOptions::new(m, 3, seed)).unwrap();
        worst = worst.max((trace.final_estimate.mean - ground).abs());
        violations += trace.monotonicity_violations().len();
    }
    report(
        9,
        worst <= tol && violations == 0,
        format!("max |final - E0| = {worst:.4} (tol {tol:.4}, E0 = {ground:.6}); monotonicity violations {violations}"),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_10_density_reconstruction() {
    let start = Instant::now();
    let sizes = [100usize, 1_000, 10_000];
    let mut mean_dist = [0.0f64; 3];
    let mut worst_trace = 0.0f64;
    for seed in 0..10u64 {
        let psi = prepare(&StateKind::RandomHaar(1000 + seed), 2).unwrap();
        let target = psi.to_density();
        for (k, &m) in sizes.iter().enumerate() {
            let rho = reconstruct_density(&build_snapshot_set(&psi, m, seed).unwrap()).unwrap();
            worst_trace = worst_trace.max((rho.trace() - ONE).norm());
            mean_dist[k] += trace_distance(&rho, &target) / 10.0;
        }
    }
    let decreasing = mean_dist[0] > mean_dist[1] && mean_dist[1] > mean_dist[2];
    report(
        10,
        worst_trace <= 1e-10 && decreasing,
        format!(
            "max |tr ρ̃ - 1| = {worst_trace:.2e} (tol 1e-10); mean trace distance at M = 1e2/1e3/1e4: {:.4}/{:.4}/{:.4}",
            mean_dist[0], mean_dist[1], mean_dist[2]
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}
