//! Randomized single-qubit measurement snapshots.
//!
//! Each snapshot records, per qubit, a direction drawn uniformly from the unit
//! sphere and the `±1` outcome of measuring the spin along it. The measurement
//! is simulated by rotating the qubit so that the direction maps onto `z` and
//! then measuring in the computational basis.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::rng::RngStream;
use crate::statevector::{index_to_bits, Statevector};

/// A point on the unit sphere, `n = (cos φ sin θ, sin φ sin θ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * st, sp * st, ct]
    }
}

/// One run of the randomized measurement: a direction and an outcome per qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub directions: Vec<Direction>,
    /// `+1` for bit 0, `-1` for bit 1.
    pub outcomes: Vec<i8>,
}

impl Snapshot {
    pub fn new(directions: Vec<Direction>, outcomes: Vec<i8>) -> Result<Self> {
        if directions.len() != outcomes.len() {
            return Err(Error::Dimension {
                expected: directions.len(),
                found: outcomes.len(),
            });
        }
        if let Some(bad) = outcomes.iter().find(|&&m| m != 1 && m != -1) {
            return Err(Error::InvalidArgument(format!("outcome {bad} is not ±1")));
        }
        Ok(Self {
            directions,
            outcomes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.outcomes.len()
    }

    /// `3·m·n` for every qubit: the single-qubit estimator values for σx, σy, σz.
    pub fn pauli_weights(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.directions
            .iter()
            .zip(&self.outcomes)
            .map(|(d, &m)| d.unit_vector().map(|v| 3.0 * f64::from(m) * v))
    }
}

/// An approximate quantum state: `M ≥ 1` independent snapshots of one source state.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    n_qubits: usize,
    snapshots: Vec<Snapshot>,
    pub seed: u64,
    pub source: String,
}

impl SnapshotSet {
    pub fn new(n_qubits: usize, snapshots: Vec<Snapshot>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(s) = snapshots.iter().find(|s| s.n_qubits() != n_qubits) {
            return Err(Error::Dimension {
                expected: n_qubits,
                found: s.n_qubits(),
            });
        }
        Ok(Self {
            n_qubits,
            snapshots,
            seed,
            source: source.into(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Writes the `.aqs` text format.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "AQS1 {} {} {}", self.n_qubits, self.snapshots.len(), self.seed)?;
        let mut line = String::new();
        for s in &self.snapshots {
            line.clear();
            for (k, (d, m)) in s.directions.iter().zip(&s.outcomes).enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{:.16e} {:.16e} {}", d.theta, d.phi, m);
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads the `.aqs` text format. Blank lines and `#` lines are skipped.
    pub fn read_from<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
            other => Some((i + 1, other)),
        });
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source_name, 0, "empty snapshot file"))?;
        let header = header.map_err(|e| Error::io(source_name, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, n, m, seed] = fields.as_slice() else {
            return Err(Error::parse(source_name, ln, "expected `AQS1 <n_qubits> <M> <seed>`"));
        };
        if *magic != "AQS1" {
            return Err(Error::parse(source_name, ln, format!("unknown format tag {magic:?}")));
        }
        let bad = |what: &str| Error::parse(source_name, ln, format!("bad {what} in header"));
        let n: usize = n.parse().map_err(|_| bad("qubit count"))?;
        let m: usize = m.parse().map_err(|_| bad("snapshot count"))?;
        let seed: u64 = seed.parse().map_err(|_| bad("seed"))?;
        if n == 0 {
            return Err(bad("qubit count"));
        }

        let mut snapshots = Vec::with_capacity(m);
        for (ln, line) in lines {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 * n {
                return Err(Error::parse(
                    source_name,
                    ln,
                    format!("expected {} values, found {}", 3 * n, tokens.len()),
                ));
            }
            let mut directions = Vec::with_capacity(n);
            let mut outcomes = Vec::with_capacity(n);
            for t in tokens.chunks_exact(3) {
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(source_name, ln, format!("bad number {s:?}")))
                };
                directions.push(Direction::new(num(t[0])?, num(t[1])?));
                outcomes.push(match t[2] {
                    "1" | "+1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(Error::parse(source_name, ln, format!("outcome {other:?} is not ±1")))
                    }
                });
            }
            snapshots.push(Snapshot {
                directions,
                outcomes,
            });
        }
        if snapshots.len() != m {
            return Err(Error::parse(
                source_name,
                0,
                format!("header declares {m} snapshots, found {}", snapshots.len()),
            ));
        }
        Self::new(n, snapshots, seed, source_name)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }
}

/// Area-uniform direction: `cos θ` uniform on `[-1, 1]`, `φ` uniform on `[0, 2π)`.
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let cos_theta = 1.0 - 2.0 * rng.random::<f64>();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    Direction::new(cos_theta.clamp(-1.0, 1.0).acos(), phi)
}

/// `V = exp(iθ σ·n⊥ / 2)` with `n⊥ = (-sin φ, cos φ, 0)`. Measuring `V|ψ⟩` in the
/// computational basis is a measurement of `σ·n` on `|ψ⟩`.
pub fn pre_measurement_rotation(d: &Direction) -> Mat2 {
    let (s, c) = (d.theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, d.phi);
    [
        [C64::new(c, 0.0), e.conj() * s],
        [-e * s, C64::new(c, 0.0)],
    ]
}

/// Measures every qubit of `psi` along the given directions (one shot).
pub fn measure_along<R: Rng + ?Sized>(psi: &Statevector, directions: &[Direction], rng: &mut R) -> Result<Vec<i8>> {
    if directions.len() != psi.n_qubits() {
        return Err(Error::Dimension {
            expected: psi.n_qubits(),
            found: directions.len(),
        });
    }
    let mut rotated = psi.clone();
    for (q, d) in directions.iter().enumerate() {
        rotated.apply_single_qubit_unchecked(q, &pre_measurement_rotation(d));
    }
    let idx = rotated.sample_index(rng);
    Ok(index_to_bits(idx, psi.n_qubits())
        .into_iter()
        .map(|b| 1 - 2 * b as i8)
        .collect())
}

/// One execution of the randomized measurement on `psi`.
pub fn take_snapshot<R: Rng + ?Sized>(psi: &Statevector, rng: &mut R) -> Snapshot {
    let directions: Vec<Direction> = (0..psi.n_qubits()).map(|_| sample_direction(rng)).collect();
    let outcomes = measure_along(psi, &directions, rng).expect("directions match the register");
    Snapshot {
        directions,
        outcomes,
    }
}

/// `m` snapshots of `psi`; snapshot `j` draws from stream `(seed, j)`.
pub fn build_snapshot_set(psi: &Statevector, m: usize, seed: u64) -> Result<SnapshotSet> {
    build_snapshot_set_labeled(psi, m, seed, "")
}

pub fn build_snapshot_set_labeled(psi: &Statevector, m: usize, seed: u64, source: &str) -> Result<SnapshotSet> {
    if m == 0 {
        return Err(Error::EmptySet);
    }
    let snapshots: Vec<Snapshot> = (0..m as u64)
        .into_par_iter()
        .map(|j| take_snapshot(psi, &mut RngStream::new(seed, j).rng()))
        .collect();
    SnapshotSet::new(psi.n_qubits(), snapshots, seed, source)
}
