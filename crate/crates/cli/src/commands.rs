use std::fmt::Write as _;
use std::path::Path;

use aqstate_core::estimation::{empirical_variance, reconstruct_density_with_limit};
use aqstate_core::linalg::trace_distance;
use aqstate_core::optimizer::{MinimizeOptions, ProtocolOptions};
use aqstate_core::seminorm::projector_observable;
use aqstate_core::snapshot::build_snapshot_set_labeled;
use aqstate_core::{
    build_snapshot_set, estimate, pauli_estimate, prepare, run_protocol, seminorm_full, seminorm_one, seminorm_two,
    Error, Generator, PauliObservable, PauliShotPlan, Sampler, SnapshotSet, StateKind, Statevector,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// Above this many terms the quadratic seminorm is skipped unless forced.
const FULL_SEMINORM_TERM_LIMIT: usize = 100_000;

/// Size of generated states when neither `--qubits` nor an observable fixes it.
pub const DEFAULT_QUBITS: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: arguments, files, or data that do not fit together.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::Dimension { .. }
            | Error::QubitIndex { .. }
            | Error::Size { .. }
            | Error::EmptySet
            | Error::EmptySupport => CliError::Invalid(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<Output, CliError>;

/// What a command prints, in both formats.
pub struct Output {
    pub json: Value,
    pub text: String,
}

impl Output {
    fn new(value: &impl Serialize, text: String) -> Self {
        Self {
            json: serde_json::to_value(value).expect("serializable report"),
            text,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.text.clone(),
            ReportFormat::Json => serde_json::to_string_pretty(&self.json).expect("valid json") + "\n",
        }
    }
}

fn resolve_state(args: &StateArgs, default_qubits: Option<usize>) -> Result<Statevector, CliError> {
    let n = args.qubits.map(|q| q as usize).or(default_qubits);
    let kind = match &args.state {
        StateSpec::File(path) => {
            let psi = Statevector::load(path)?;
            if let Some(n) = n {
                if n != psi.n_qubits() {
                    return Err(CliError::Invalid(format!(
                        "{}: state has {} qubits, expected {n}",
                        path.display(),
                        psi.n_qubits()
                    )));
                }
            }
            return Ok(psi);
        }
        StateSpec::Zeros => StateKind::Zeros,
        StateSpec::Ghz => StateKind::Ghz,
        StateSpec::Haar(seed) => StateKind::RandomHaar(*seed),
    };
    Ok(prepare(&kind, n.unwrap_or(DEFAULT_QUBITS))?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn report_text(r: &aqstate_core::EstimateReport) -> String {
    format!(
        "mean        {:.10}\nbound_full  {:.6e}\nbound_two   {:.6e}\nsample_std  {:.6e}\nM           {}\n",
        r.mean, r.bound_full, r.bound_two, r.sample_std, r.m
    )
}

pub fn build(args: &BuildArgs) -> CmdResult {
    let psi = resolve_state(&args.state, None)?;
    let set = build_snapshot_set_labeled(&psi, args.shots as usize, args.seed, &args.state.state.to_string())?;
    set.save(&args.out)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let summary = json!({
        "path": args.out.display().to_string(),
        "n_qubits": set.n_qubits(),
        "M": set.len(),
        "seed": set.seed,
    });
    let text = format!(
        "wrote {} snapshots of {} qubits to {}\n",
        set.len(),
        set.n_qubits(),
        args.out.display()
    );
    Ok(Output { json: summary, text })
}

pub fn estimate_cmd(args: &EstimateArgs) -> CmdResult {
    let set = SnapshotSet::load(&args.snapshots)?;
    let obs = PauliObservable::load(&args.observable)?;
    let report = estimate(&set, &obs)?;
    Ok(Output::new(&report, report_text(&report)))
}

pub fn seminorm(args: &SeminormArgs) -> CmdResult {
    let obs = PauliObservable::load(&args.observable)?;
    let terms = obs.non_identity_terms().count();
    let full = if terms > FULL_SEMINORM_TERM_LIMIT && !args.force_full {
        eprintln!(
            "warning: {terms} terms; skipping the quadratic-cost seminorm (the one-norm value bounds it from above, --force-full computes it)"
        );
        None
    } else {
        Some(seminorm_full(&obs))
    };
    let n = obs.n_qubits();
    let q = obs.max_degree();
    let p = q.min(n / 2);
    let growth = 3f64.powf(p as f64 / 2.0);
    let value = json!({
        "full": full,
        "one": seminorm_one(&obs),
        "two": seminorm_two(&obs),
        "max_degree": q,
        "terms": terms,
        "n_qubits": n,
        "growth_factor": growth,
    });
    let mut text = String::new();
    match full {
        Some(f) => writeln!(text, "full  {f:.10}").unwrap(),
        None => writeln!(text, "full  (skipped)").unwrap(),
    }
    writeln!(text, "one   {:.10}", seminorm_one(&obs)).unwrap();
    writeln!(text, "two   {:.10}", seminorm_two(&obs)).unwrap();
    writeln!(text, "Q     {q}").unwrap();
    writeln!(text, "entangler growth factor 3^({p}/2) = {growth:.10}").unwrap();
    Ok(Output { json: value, text })
}

pub fn pauli_estimate_cmd(args: &PauliEstimateArgs) -> CmdResult {
    let obs = PauliObservable::load(&args.observable)?;
    let psi = resolve_state(&args.state, Some(obs.n_qubits()))?;
    let sampler = match args.sampler {
        SamplerArg::Uniform => Sampler::UniformSupport,
        SamplerArg::L1 => Sampler::L1Weighted,
    };
    let plan = PauliShotPlan::new(&obs, sampler, args.shots as usize)?;
    let report = pauli_estimate(&psi, &obs, &plan, args.seed)?;
    let exact = psi.exact_expectation(&obs)?;
    let snapshots = if args.compare {
        Some(estimate(&build_snapshot_set(&psi, args.shots as usize, args.seed)?, &obs)?)
    } else {
        None
    };
    let mut text = format!("pauli ({:?})\n{}exact       {exact:.10}\n", sampler, report_text(&report));
    if let Some(s) = &snapshots {
        write!(text, "snapshots\n{}", report_text(s)).unwrap();
        writeln!(
            text,
            "abs error   pauli {:.3e}  snapshots {:.3e}",
            (report.mean - exact).abs(),
            (s.mean - exact).abs()
        )
        .unwrap();
    }
    let value = json!({
        "sampler": sampler,
        "pauli": report,
        "exact": exact,
        "snapshots": snapshots,
    });
    Ok(Output { json: value, text })
}

pub fn optimize(args: &OptimizeArgs) -> CmdResult {
    let obs = PauliObservable::load(&args.hamiltonian)?;
    let psi = resolve_state(&args.state, Some(obs.n_qubits()))?;
    let generator: Generator = args.entangler.parse()?;
    let opts = ProtocolOptions {
        shots: args.shots as usize,
        iterations: args.iters as usize,
        seed: args.seed,
        generator,
        minimize: MinimizeOptions {
            starts: args.starts as usize,
            term_cap: args.term_cap as usize,
            ..MinimizeOptions::default()
        },
    };
    let trace = run_protocol(&psi, &obs, &opts)?;
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&trace).expect("serializable trace");
        write_file(out, &(json + "\n"))?;
    }
    let mut text = String::new();
    writeln!(text, "iter  o_t            o(identity)    ‖O(ξ)‖₂     terms  evals  converged").unwrap();
    for r in &trace.iterations {
        writeln!(
            text,
            "{:<5} {:<14.8} {:<14.8} {:<11.5} {:<6} {:<6} {}",
            r.iteration, r.o_t, r.o_identity, r.transformed_two, r.transformed_terms, r.evaluations, r.converged
        )
        .unwrap();
    }
    write!(text, "final\n{}", report_text(&trace.final_estimate)).unwrap();
    writeln!(text, "monotonicity slack {:.6e}", trace.monotonicity_slack).unwrap();
    let violations = trace.monotonicity_violations();
    if !violations.is_empty() {
        writeln!(text, "o_t rose beyond the slack at iterations {violations:?}").unwrap();
    }
    Ok(Output::new(&trace, text))
}

pub fn reconstruct(args: &ReconstructArgs) -> CmdResult {
    let set = SnapshotSet::load(&args.snapshots)?;
    let rho = reconstruct_density_with_limit(&set, args.dense_limit as usize)?;
    let distance = match &args.state {
        Some(spec) => {
            let state_args = StateArgs {
                state: spec.clone(),
                qubits: Some(set.n_qubits() as u32),
            };
            let psi = resolve_state(&state_args, None)?;
            Some(trace_distance(&rho, &psi.to_density()))
        }
        None => None,
    };
    let tr = rho.trace();
    let matrix: Vec<Vec<[f64; 2]>> = (0..rho.nrows())
        .map(|r| (0..rho.ncols()).map(|c| [rho[(r, c)].re, rho[(r, c)].im]).collect())
        .collect();
    let mut text = String::new();
    for row in &matrix {
        let cells: Vec<String> = row.iter().map(|[re, im]| format!("{re:+.5}{im:+.5}i")).collect();
        writeln!(text, "{}", cells.join("  ")).unwrap();
    }
    writeln!(text, "trace {:.12}{:+.3e}i", tr.re, tr.im).unwrap();
    if let Some(d) = distance {
        writeln!(text, "trace distance {d:.6}").unwrap();
    }
    let value = json!({
        "n_qubits": set.n_qubits(),
        "M": set.len(),
        "trace": [tr.re, tr.im],
        "matrix": matrix,
        "trace_distance": distance,
    });
    Ok(Output { json: value, text })
}

#[derive(Serialize)]
struct VarianceRow {
    name: String,
    mean: f64,
    exact: f64,
    empirical_var: f64,
    full_sq: f64,
    one_sq: f64,
    two_sq: f64,
}

pub fn bench_variance(args: &BenchVarianceArgs) -> CmdResult {
    let mut observables: Vec<(String, PauliObservable)> = Vec::new();
    for path in &args.observable {
        observables.push((path.display().to_string(), PauliObservable::load(path)?));
    }
    for bits in &args.projector {
        observables.push((format!("|{bits}><{bits}|"), projector_observable(bits)?));
    }
    let first = observables
        .first()
        .ok_or_else(|| CliError::Invalid("give at least one --observable or --projector".into()))?;
    let n = first.1.n_qubits();
    if let Some((name, o)) = observables.iter().find(|(_, o)| o.n_qubits() != n) {
        return Err(CliError::Invalid(format!(
            "{name} acts on {} qubits, expected {n}",
            o.n_qubits()
        )));
    }
    let psi = resolve_state(&args.state, Some(n))?;
    let set = build_snapshot_set(&psi, args.shots as usize, args.seed)?;
    let mut rows = Vec::new();
    for (name, o) in &observables {
        rows.push(VarianceRow {
            name: name.clone(),
            mean: estimate(&set, o)?.mean,
            exact: psi.exact_expectation(o)?,
            empirical_var: empirical_variance(&set, o)?,
            full_sq: seminorm_full(o).powi(2),
            one_sq: seminorm_one(o).powi(2),
            two_sq: seminorm_two(o).powi(2),
        });
    }
    let mut text = format!(
        "{:<28} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "observable", "mean", "Var", "‖O‖²", "‖O‖₁²", "‖O‖₂²"
    );
    for r in &rows {
        writeln!(
            text,
            "{:<28} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.name, r.mean, r.empirical_var, r.full_sq, r.one_sq, r.two_sq
        )
        .unwrap();
    }
    let value = json!({ "M": set.len(), "seed": args.seed, "rows": rows });
    Ok(Output { json: value, text })
}

pub fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Build(a) => build(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Seminorm(a) => seminorm(a),
        Command::PauliEstimate(a) => pauli_estimate_cmd(a),
        Command::Optimize(a) => optimize(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::BenchVariance(a) => bench_variance(a),
    }
}
