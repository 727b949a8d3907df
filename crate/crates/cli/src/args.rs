use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aqstate", version, about = "Approximate quantum states from randomized single-qubit measurements")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,

    /// Worker thread cap (defaults to the number of cores).
    #[arg(long, global = true, env = "AQSTATE_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure a simulated state and write the snapshots to a `.aqs` file.
    Build(BuildArgs),
    /// Estimate an observable from a snapshot file.
    Estimate(EstimateArgs),
    /// Print the three seminorms of an observable and its entangler growth factor.
    Seminorm(SeminormArgs),
    /// Estimate an observable by sampling and measuring its Pauli strings.
    PauliEstimate(PauliEstimateArgs),
    /// Run the snapshot-driven variational minimization.
    Optimize(OptimizeArgs),
    /// Rebuild the dense density matrix from a snapshot file.
    Reconstruct(ReconstructArgs),
    /// Compare empirical estimator variances with the seminorm bounds.
    BenchVariance(BenchVarianceArgs),
}

/// `zeros`, `ghz`, `haar:<seed>` or `file:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Zeros,
    Ghz,
    Haar(u64),
    File(PathBuf),
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "zeros" => Ok(StateSpec::Zeros),
            None if s == "ghz" => Ok(StateSpec::Ghz),
            Some(("haar", seed)) => seed
                .parse()
                .map(StateSpec::Haar)
                .map_err(|_| format!("bad Haar seed {seed:?}")),
            Some(("file", path)) if !path.is_empty() => Ok(StateSpec::File(PathBuf::from(path))),
            _ => Err(format!("unknown state {s:?}; expected zeros, ghz, haar:<seed> or file:<path>")),
        }
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateSpec::Zeros => f.write_str("zeros"),
            StateSpec::Ghz => f.write_str("ghz"),
            StateSpec::Haar(seed) => write!(f, "haar:{seed}"),
            StateSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Source state.
    #[arg(long)]
    pub state: StateSpec,

    /// Qubit count for generated states; defaults to the observable's size, else 4.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=20))]
    pub qubits: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Number of snapshots M.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub snapshots: PathBuf,
    #[arg(long)]
    pub observable: PathBuf,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    #[arg(long)]
    pub observable: PathBuf,
    /// Evaluate the quadratic-cost seminorm even for very large observables.
    #[arg(long)]
    pub force_full: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Uniform,
    L1,
}

#[derive(Debug, Args)]
pub struct PauliEstimateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub observable: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, value_enum, default_value_t = SamplerArg::L1)]
    pub sampler: SamplerArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also estimate from randomized snapshots with the same shot budget.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    /// Two-qubit generator, e.g. `XX`, `ZZ` or `XX+YY`.
    #[arg(long, default_value = "XX")]
    pub entangler: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of simplex starts per iteration.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub starts: u64,
    /// Abort when the transformed observable exceeds this many terms.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub term_cap: u64,
    /// Write the trace as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub snapshots: PathBuf,
    /// Reference state for the trace distance.
    #[arg(long)]
    pub state: Option<StateSpec>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=12))]
    pub dense_limit: u64,
}

#[derive(Debug, Args)]
pub struct BenchVarianceArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Observable file; repeat for a sweep.
    #[arg(long)]
    pub observable: Vec<PathBuf>,
    /// Computational-basis projector given as a bitstring; repeatable.
    #[arg(long)]
    pub projector: Vec<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn state_specs() {
        assert_eq!("zeros".parse::<StateSpec>().unwrap(), StateSpec::Zeros);
        assert_eq!("ghz".parse::<StateSpec>().unwrap(), StateSpec::Ghz);
        assert_eq!("haar:17".parse::<StateSpec>().unwrap(), StateSpec::Haar(17));
        assert_eq!(
            "file:/tmp/a.txt".parse::<StateSpec>().unwrap(),
            StateSpec::File("/tmp/a.txt".into())
        );
        assert!("haar:x".parse::<StateSpec>().is_err());
        assert!("file:".parse::<StateSpec>().is_err());
        assert!("bell".parse::<StateSpec>().is_err());
        assert_eq!(StateSpec::Haar(3).to_string(), "haar:3");
    }
}
