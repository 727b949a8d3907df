//! Pauli monomials and real linear combinations of them.
//!
//! Qubit `0` is the leftmost letter of a monomial string and the most significant
//! bit of a computational-basis index. Every dense routine in the crate follows
//! that convention.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use smallvec::SmallVec;

use crate::error::{ensure_same, Error, Result};
use crate::linalg::{DenseMatrix, Mat2, C64, I, ONE, ZERO};

/// Default cap on the qubit count of dense `2^N × 2^N` matrices.
pub const DENSE_QUBIT_LIMIT: usize = 12;

const LETTERS_PER_WORD: usize = 32;
const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// Single-qubit Pauli letter. The discriminant is the 2-bit storage code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Letter {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    pub const PAULIS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_code(code: u8) -> Letter {
        match code & 3 {
            0 => Letter::I,
            1 => Letter::X,
            2 => Letter::Y,
            _ => Letter::Z,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c.to_ascii_uppercase() {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }

    /// Cartesian axis index (x=0, y=1, z=2); `None` for the identity.
    pub fn axis(self) -> Option<usize> {
        match self {
            Letter::I => None,
            other => Some(other as usize - 1),
        }
    }

    pub fn from_axis(axis: usize) -> Letter {
        Letter::PAULIS[axis]
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            Letter::I => [[ONE, ZERO], [ZERO, ONE]],
            Letter::X => [[ZERO, ONE], [ONE, ZERO]],
            Letter::Y => [[ZERO, -I], [I, ZERO]],
            Letter::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// A power of `i`: one of `+1, +i, -1, -i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: u8) -> Phase {
        Phase(power & 3)
    }

    /// Exponent `k` with phase `= i^k`.
    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// `±1` for real phases, `None` otherwise.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> C64 {
        [ONE, I, -ONE, -I][self.0 as usize]
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }
}

/// Tensor product of `N` single-qubit Pauli letters, packed two bits per qubit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliMonomial {
    n_qubits: usize,
    words: SmallVec<[u64; 2]>,
}

/// A monomial times a phase from `{±1, ±i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedMonomial {
    pub monomial: PauliMonomial,
    pub phase: Phase,
}

fn word_count(n_qubits: usize) -> usize {
    n_qubits.div_ceil(LETTERS_PER_WORD)
}

/// Marks the low bit of every non-identity 2-bit slot.
#[inline]
fn occupied(word: u64) -> u64 {
    (word | (word >> 1)) & LOW_BITS
}

impl PauliMonomial {
    /// The all-identity monomial on `n_qubits` qubits.
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a monomial needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            words: SmallVec::from_elem(0, word_count(n_qubits)),
        })
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let mut m = Self::identity(letters.len())?;
        for (q, &l) in letters.iter().enumerate() {
            m.set(q, l);
        }
        Ok(m)
    }

    /// Single non-identity letter at `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Result<Self> {
        let mut m = Self::identity(n_qubits)?;
        if qubit >= n_qubits {
            return Err(Error::QubitIndex { index: qubit, n_qubits });
        }
        m.set(qubit, letter);
        Ok(m)
    }

    /// Parses a letter string such as `"XIZy"` (case-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| {
                    Error::InvalidArgument(format!("invalid Pauli letter {c:?} in {s:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn letter(&self, qubit: usize) -> Letter {
        debug_assert!(qubit < self.n_qubits);
        let word = self.words[qubit / LETTERS_PER_WORD];
        Letter::from_code((word >> (2 * (qubit % LETTERS_PER_WORD))) as u8)
    }

    pub fn set(&mut self, qubit: usize, letter: Letter) {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let shift = 2 * (qubit % LETTERS_PER_WORD);
        let w = &mut self.words[qubit / LETTERS_PER_WORD];
        *w = (*w & !(3u64 << shift)) | ((letter.code() as u64) << shift);
    }

    pub fn with_letter(&self, qubit: usize, letter: Letter) -> Self {
        let mut m = self.clone();
        m.set(qubit, letter);
        m
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n_qubits).map(move |q| self.letter(q))
    }

    /// Non-identity positions in increasing qubit order.
    pub fn support(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut occ = occupied(word);
            std::iter::from_fn(move || {
                if occ == 0 {
                    return None;
                }
                let bit = occ.trailing_zeros() as usize;
                occ &= occ - 1;
                let q = wi * LETTERS_PER_WORD + bit / 2;
                Some((q, Letter::from_code((word >> bit) as u8)))
            })
        })
    }

    /// Number of non-identity letters.
    pub fn degree(&self) -> usize {
        self.words.iter().map(|&w| occupied(w).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        ensure_same(self.n_qubits, other.n_qubits)
    }

    /// Per-word mask of positions where both letters are non-identity and differ.
    fn conflicts(&self, other: &Self) -> impl Iterator<Item = u64> + '_ {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(&a, &b)| occupied(a) & occupied(b) & occupied(a ^ b))
            .collect::<SmallVec<[u64; 2]>>()
            .into_iter()
    }

    /// `r`: positions where both are non-identity; `delta`: 1 unless some such position differs.
    pub fn r_delta(&self, other: &Self) -> Result<(usize, u8)> {
        self.check_len(other)?;
        let mut r = 0usize;
        let mut conflict = false;
        for (&a, &b) in self.words.iter().zip(other.words.iter()) {
            let both = occupied(a) & occupied(b);
            r += both.count_ones() as usize;
            conflict |= both & occupied(a ^ b) != 0;
        }
        Ok((r, u8::from(!conflict)))
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        let odd = self.conflicts(other).map(|c| c.count_ones()).sum::<u32>() % 2;
        Ok(odd == 0)
    }

    /// Letterwise product `self · other` with its accumulated phase.
    pub fn product(&self, other: &Self) -> Result<PhasedMonomial> {
        self.check_len(other)?;
        let mut power = 0u8;
        let mut words = SmallVec::with_capacity(self.words.len());
        for (&a, &b) in self.words.iter().zip(other.words.iter()) {
            let mut conflict = occupied(a) & occupied(b) & occupied(a ^ b);
            while conflict != 0 {
                let bit = conflict.trailing_zeros();
                conflict &= conflict - 1;
                let la = ((a >> bit) & 3) as u8;
                let lb = ((b >> bit) & 3) as u8;
                // X·Y = iZ, Y·Z = iX, Z·X = iY; the reversed order picks up -i.
                power += if (lb + 3 - la) % 3 == 1 { 1 } else { 3 };
            }
            words.push(a ^ b);
        }
        Ok(PhasedMonomial {
            monomial: PauliMonomial {
                n_qubits: self.n_qubits,
                words,
            },
            phase: Phase::from_power(power),
        })
    }

    /// Bitmask (over computational-basis indices) of qubits flipped by this monomial.
    /// Qubit `q` maps to bit `n_qubits - 1 - q`. Only valid for `n_qubits <= 64`.
    pub fn flip_mask(&self) -> u64 {
        self.support()
            .filter(|(_, l)| matches!(l, Letter::X | Letter::Y))
            .fold(0u64, |m, (q, _)| m | 1 << (self.n_qubits - 1 - q))
    }

    /// Bitmask of qubits contributing a `(-1)^bit` sign (Y and Z letters).
    pub fn sign_mask(&self) -> u64 {
        self.support()
            .filter(|(_, l)| matches!(l, Letter::Y | Letter::Z))
            .fold(0u64, |m, (q, _)| m | 1 << (self.n_qubits - 1 - q))
    }

    pub fn y_count(&self) -> usize {
        self.support().filter(|(_, l)| *l == Letter::Y).count()
    }

    /// Matrix element `<b ^ flip| σ |b>` for the column `b`; the row is `b ^ flip_mask()`.
    #[inline]
    pub(crate) fn column_phase(y_power: u8, sign_mask: u64, column: usize) -> C64 {
        let sign = ((column as u64) & sign_mask).count_ones() % 2;
        Phase::from_power(y_power + 2 * sign as u8).to_complex()
    }
}

impl fmt::Display for PauliMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliMonomial({self})")
    }
}

/// `r_ij` and `Δ_ij` of two monomials.
pub fn r_delta(a: &PauliMonomial, b: &PauliMonomial) -> Result<(usize, u8)> {
    a.r_delta(b)
}

pub fn monomial_product(a: &PauliMonomial, b: &PauliMonomial) -> Result<PhasedMonomial> {
    a.product(b)
}

/// Hermitian observable `Σ a_i σ_i` with real coefficients, stored sparsely.
///
/// No stored coefficient is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliObservable {
    n_qubits: usize,
    terms: BTreeMap<PauliMonomial, f64>,
}

impl PauliObservable {
    /// The zero observable.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("an observable needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliMonomial, f64)>,
    {
        let mut obs = Self::zero(n_qubits)?;
        for (m, c) in terms {
            obs.add_term(m, c)?;
        }
        Ok(obs)
    }

    /// Builds from `(coefficient, letter string)` pairs.
    pub fn from_strs(terms: &[(f64, &str)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("no terms given".into()))?;
        let n = first.1.len();
        let mut obs = Self::zero(n)?;
        for &(c, s) in terms {
            obs.add_term(PauliMonomial::parse(s)?, c)?;
        }
        Ok(obs)
    }

    pub fn identity(n_qubits: usize, coefficient: f64) -> Result<Self> {
        let mut obs = Self::zero(n_qubits)?;
        obs.add_term(PauliMonomial::identity(n_qubits)?, coefficient)?;
        Ok(obs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Adds `coefficient · monomial`, merging with an existing entry and dropping exact zeros.
    pub fn add_term(&mut self, monomial: PauliMonomial, coefficient: f64) -> Result<()> {
        ensure_same(self.n_qubits, monomial.n_qubits())?;
        if !coefficient.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite coefficient {coefficient} for {monomial}"
            )));
        }
        match self.terms.entry(monomial) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = *e.get() + coefficient;
                if sum == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                if coefficient != 0.0 {
                    e.insert(coefficient);
                }
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&PauliMonomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Terms other than the identity monomial.
    pub fn non_identity_terms(&self) -> impl Iterator<Item = (&PauliMonomial, f64)> {
        self.terms().filter(|(m, _)| !m.is_identity())
    }

    pub fn coefficient(&self, monomial: &PauliMonomial) -> f64 {
        self.terms.get(monomial).copied().unwrap_or(0.0)
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .next()
            .filter(|(m, _)| m.is_identity())
            .map_or(0.0, |(_, &c)| c)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest monomial degree `Q` (0 for identity-only or empty observables).
    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(PauliMonomial::degree).max().unwrap_or(0)
    }

    /// `Σ a_i²` over all terms, identity included.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
        };
        for (m, c) in self.terms() {
            // infallible: same qubit count, finite product for finite factor
            let _ = out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        ensure_same(self.n_qubits, other.n_qubits)?;
        let mut out = self.scaled(a);
        for (m, c) in other.terms() {
            out.add_term(m.clone(), b * c)?;
        }
        Ok(out)
    }

    /// Drops terms with `|a_i| <= tolerance`.
    pub fn pruned(&self, tolerance: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tolerance)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Adjoint action `U† O U` of `U = exp(-i·angle/2·axis)`.
    pub fn conjugate_by_rotation(&self, axis: &PauliMonomial, angle: f64) -> Result<Self> {
        ensure_same(self.n_qubits, axis.n_qubits())?;
        if axis.is_identity() {
            return Err(Error::InvalidAxis);
        }
        let (s, c) = angle.sin_cos();
        let mut out = Self::zero(self.n_qubits)?;
        for (q, a) in self.terms() {
            if q.commutes_with(axis)? {
                out.add_term(q.clone(), a)?;
                continue;
            }
            // U†QU = cos·Q + sin·(i·axis·Q) when Q anticommutes with the axis.
            let prod = axis.product(q)?;
            let sign = (prod.phase * Phase::PLUS_I)
                .real_sign()
                .ok_or(Error::NonRealPhase)?;
            out.add_term(q.clone(), a * c)?;
            out.add_term(prod.monomial, a * s * sign)?;
        }
        Ok(out)
    }

    /// Adjoint action of a single-qubit unitary given by its SO(3) image `rot`,
    /// i.e. `U† σ_α U = Σ_β rot[α][β] σ_β` on `qubit`.
    pub fn conjugate_on_qubit(&self, qubit: usize, rot: &[[f64; 3]; 3]) -> Result<Self> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let mut out = Self::zero(self.n_qubits)?;
        for (m, a) in self.terms() {
            match m.letter(qubit).axis() {
                None => out.add_term(m.clone(), a)?,
                Some(alpha) => {
                    for (beta, &r) in rot[alpha].iter().enumerate() {
                        if r != 0.0 {
                            out.add_term(m.with_letter(qubit, Letter::from_axis(beta)), a * r)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense `2^N × 2^N` matrix, capped at [`DENSE_QUBIT_LIMIT`].
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.to_dense_with_limit(DENSE_QUBIT_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<DenseMatrix> {
        if self.n_qubits > limit {
            return Err(Error::Size {
                what: "dense matrix qubit count",
                size: self.n_qubits,
                limit,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut out = DenseMatrix::zeros(dim, dim);
        for (m, a) in self.terms() {
            let flip = m.flip_mask() as usize;
            let sign_mask = m.sign_mask();
            let y_power = (m.y_count() % 4) as u8;
            for col in 0..dim {
                let phase = PauliMonomial::column_phase(y_power, sign_mask, col);
                out[(col ^ flip, col)] += phase * a;
            }
        }
        Ok(out)
    }

    /// Parses the one-term-per-line text format: `<coefficient> <letters>`, `#` comments.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut obs: Option<Self> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(coef), Some(letters), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(source_name, line_no, "expected `<coefficient> <letters>`"));
            };
            let coef: f64 = coef
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad coefficient {coef:?}")))?;
            let mono = PauliMonomial::parse(letters)
                .map_err(|e| Error::parse(source_name, line_no, e.to_string()))?;
            let target = match &mut obs {
                Some(o) => o,
                None => obs.insert(Self::zero(mono.n_qubits())?),
            };
            if mono.n_qubits() != target.n_qubits {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!(
                        "term has {} letters but earlier terms have {}",
                        mono.n_qubits(),
                        target.n_qubits
                    ),
                ));
            }
            target
                .add_term(mono, coef)
                .map_err(|e| Error::parse(source_name, line_no, e.to_string()))?;
        }
        obs.ok_or_else(|| Error::parse(source_name, 0, "no terms found"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Serializes in the text format accepted by [`PauliObservable::parse`].
    pub fn to_text(&self) -> String {
        self.terms().map(|(m, c)| format!("{c:?} {m}\n")).collect()
    }
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{m}")?;
        }
        Ok(())
    }
}
