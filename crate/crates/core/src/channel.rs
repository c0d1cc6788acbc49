//! Classical-quantum channels, input distributions and the method of types.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{tensor, CMatrix, DensityOperator, HermitianOperator, C64, MAX_DIM};

/// Largest support size for which lifted states are materialized.
pub const MAX_LIFT_ALPHABET: usize = 16;

/// Largest output dimension accepted from channel files and presets.
pub const MAX_CHANNEL_DIM: usize = 64;

const TRACE_TOL: f64 = 1e-10;

/// A finite alphabet mapped to PSD operators on a common space.
///
/// Symbols are kept in lexicographic order, which fixes every block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GcqChannel {
    dim: usize,
    outputs: BTreeMap<String, HermitianOperator>,
}

impl GcqChannel {
    pub fn new<S: Into<String>>(
        outputs: impl IntoIterator<Item = (S, HermitianOperator)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut dim = None;
        for (sym, op) in outputs {
            let sym = sym.into();
            let d = *dim.get_or_insert(op.dim());
            if op.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: op.dim(),
                });
            }
            if !op.is_psd() {
                return Err(Error::NotPsd {
                    min_eigenvalue: op.min_eigenvalue(),
                });
            }
            if map.insert(sym.clone(), op).is_some() {
                return Err(Error::Domain(format!("duplicate symbol {sym:?}")));
            }
        }
        let dim = dim.ok_or_else(|| Error::Domain("channel has an empty alphabet".into()))?;
        Ok(Self { dim, outputs: map })
    }

    /// `x ↦ |x⟩⟨x|` on `d` symbols labelled `"0"`, …, `"d−1"`.
    pub fn noiseless(d: usize) -> Self {
        let outputs = (0..d).map(|i| {
            let mut diag = vec![0.0; d];
            diag[i] = 1.0;
            (i.to_string(), HermitianOperator::from_real_diagonal(&diag))
        });
        Self::new(outputs).expect("noiseless channel is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.outputs.keys().map(String::as_str)
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn output(&self, symbol: &str) -> Result<&HermitianOperator> {
        self.outputs
            .get(symbol)
            .ok_or_else(|| Error::Domain(format!("unknown symbol {symbol:?}")))
    }

    pub fn outputs(&self) -> impl Iterator<Item = (&str, &HermitianOperator)> {
        self.outputs.iter().map(|(s, o)| (s.as_str(), o))
    }

    /// Whether every output has unit trace.
    pub fn is_cq(&self) -> bool {
        self.outputs
            .values()
            .all(|o| (o.trace() - 1.0).abs() <= TRACE_TOL)
    }

    fn check_cq_on(&self, p: &InputDistribution) -> Result<()> {
        for (x, _) in p.support() {
            let tr = self.output(x)?.trace();
            if (tr - 1.0).abs() > TRACE_TOL {
                return Err(Error::Domain(format!(
                    "output for {x:?} has trace {tr}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// `(W(x), P(x))` over the support of `P`, checking that every symbol exists.
    pub fn supported_outputs<'a>(
        &'a self,
        p: &'a InputDistribution,
    ) -> Result<Vec<(&'a HermitianOperator, f64)>> {
        p.support().map(|(x, w)| Ok((self.output(x)?, w))).collect()
    }

    /// `W(P) = Σ_x P(x) W(x)`.
    pub fn average_output(&self, p: &InputDistribution) -> Result<HermitianOperator> {
        let terms = self.supported_outputs(p)?;
        Ok(
            HermitianOperator::weighted_sum(terms.into_iter().map(|(o, w)| (w, o)))
                .expect("distributions have non-empty support"),
        )
    }

    /// `Σ_x P(x)|x⟩⟨x| ⊗ W(x)` over `x ∈ supp P`, blocks in symbol order.
    pub fn lifted_state(&self, p: &InputDistribution) -> Result<DensityOperator> {
        self.check_cq_on(p)?;
        let k = p.support_size();
        if k > MAX_LIFT_ALPHABET {
            return Err(Error::ResourceLimit(format!(
                "lifting supports at most {MAX_LIFT_ALPHABET} symbols, got {k}"
            )));
        }
        let d = self.dim;
        let mut m = CMatrix::zeros(k * d, k * d);
        for (b, (x, w)) in p.support().enumerate() {
            let block = self.output(x)?.matrix().scale(w);
            m.view_mut((b * d, b * d), (d, d)).copy_from(&block);
        }
        DensityOperator::new(HermitianOperator::new(m)?)
    }

    /// `(x, y) ↦ W₁(x) ⊗ W₂(y)` with labels `"x,y"`.
    pub fn product(&self, other: &GcqChannel) -> Result<GcqChannel> {
        let dim = self.dim * other.dim;
        if dim > MAX_DIM {
            return Err(Error::ResourceLimit(format!(
                "product dimension {dim} exceeds {MAX_DIM}"
            )));
        }
        let mut outputs = Vec::with_capacity(self.alphabet_size() * other.alphabet_size());
        for (x, a) in self.outputs() {
            for (y, b) in other.outputs() {
                outputs.push((product_label(x, y), tensor(a, b)?));
            }
        }
        GcqChannel::new(outputs)
    }
}

fn product_label(x: &str, y: &str) -> String {
    format!("{x},{y}")
}

/// `Tr_Q` of a `(k·d)`-dimensional operator in classical ⊗ quantum layout.
pub fn partial_trace_quantum(
    op: &HermitianOperator,
    k: usize,
    d: usize,
) -> Result<HermitianOperator> {
    if op.dim() != k * d {
        return Err(Error::DimensionMismatch {
            expected: k * d,
            found: op.dim(),
        });
    }
    let m = op.matrix();
    HermitianOperator::new(CMatrix::from_fn(k, k, |a, b| {
        (0..d).map(|i| m[(a * d + i, b * d + i)]).sum()
    }))
}

/// `Tr_X` of a `(k·d)`-dimensional operator in classical ⊗ quantum layout.
pub fn partial_trace_classical(
    op: &HermitianOperator,
    k: usize,
    d: usize,
) -> Result<HermitianOperator> {
    if op.dim() != k * d {
        return Err(Error::DimensionMismatch {
            expected: k * d,
            found: op.dim(),
        });
    }
    let m = op.matrix();
    HermitianOperator::new(CMatrix::from_fn(d, d, |i, j| {
        (0..k).map(|a| m[(a * d + i, a * d + j)]).sum()
    }))
}

/// A finitely supported probability vector over symbol labels.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    weights: BTreeMap<String, f64>,
}

impl InputDistribution {
    /// Accepts non-negative weights summing to one within `1e-9` and rescales
    /// them to sum to one exactly up to rounding.
    pub fn new<S: Into<String>>(weights: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, w) in weights {
            let s = s.into();
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Domain(format!("weight of {s:?} is {w}")));
            }
            *map.entry(s).or_insert(0.0) += w;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
        }
        map.values_mut().for_each(|w| *w /= total);
        Ok(Self { weights: map })
    }

    pub fn uniform<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let w = 1.0 / symbols.len() as f64;
        Self::new(symbols.into_iter().map(|s| (s, w)))
    }

    pub fn point(symbol: impl Into<String>) -> Self {
        Self::new([(symbol.into(), 1.0)]).expect("point mass is a distribution")
    }

    pub fn weight(&self, symbol: &str) -> f64 {
        self.weights.get(symbol).copied().unwrap_or(0.0)
    }

    /// All listed symbols, including zero-weight ones.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(s, &w)| (s.as_str(), w))
    }

    /// Symbols with positive weight, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&str, f64)> {
        self.iter().filter(|&(_, w)| w > 0.0)
    }

    pub fn support_size(&self) -> usize {
        self.support().count()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.support().map(|(_, w)| w * w.ln()).sum::<f64>()
    }

    pub fn product(&self, other: &InputDistribution) -> InputDistribution {
        let mut weights = BTreeMap::new();
        for (x, a) in self.support() {
            for (y, b) in other.support() {
                weights.insert(product_label(x, y), a * b);
            }
        }
        InputDistribution { weights }
    }

    pub fn max_abs_diff(&self, other: &InputDistribution) -> f64 {
        let keys: std::collections::BTreeSet<&str> = self
            .weights
            .keys()
            .chain(other.weights.keys())
            .map(String::as_str)
            .collect();
        keys.into_iter()
            .map(|k| (self.weight(k) - other.weight(k)).abs())
            .fold(0.0, f64::max)
    }

    /// `P^{⊗n}(x) = Π_i P(x_i)`.
    pub fn sequence_probability<S: AsRef<str>>(&self, sequence: &[S]) -> f64 {
        sequence.iter().map(|s| self.weight(s.as_ref())).product()
    }
}

/// The empirical distribution of a length-`n` sequence, kept as integer counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    n: u64,
    counts: BTreeMap<String, u64>,
}

impl TypeClass {
    pub fn from_counts<S: Into<String>>(
        counts: impl IntoIterator<Item = (S, u64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, c) in counts {
            if c > 0 {
                *map.entry(s.into()).or_insert(0) += c;
            }
        }
        let n = map.values().sum();
        if n == 0 {
            return Err(Error::Domain("a type needs a positive blocklength".into()));
        }
        Ok(Self { n, counts: map })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn as_distribution(&self) -> InputDistribution {
        let n = self.n as f64;
        InputDistribution::new(self.counts.iter().map(|(s, &c)| (s.clone(), c as f64 / n)))
            .expect("counts form a distribution")
    }

    /// The multinomial coefficient `n! / Π_x c_x!`.
    pub fn size(&self) -> BigUint {
        let mut out = factorial(self.n);
        for &c in self.counts.values() {
            out /= factorial(c);
        }
        out
    }

    /// `e^{nH(T)} = n^n / Π_x c_x^{c_x}` as an exact rational (numerator, denominator).
    pub fn exp_n_entropy(&self) -> (BigUint, BigUint) {
        let num = BigUint::from(self.n).pow(self.n as u32);
        let den = self
            .counts
            .values()
            .map(|&c| BigUint::from(c).pow(c as u32))
            .product();
        (num, den)
    }

    /// The pair `((n+1)^{−|supp|} e^{nH}, e^{nH})` in floating point.
    pub fn size_bounds(&self) -> (f64, f64) {
        let n = self.n as f64;
        let h = self.as_distribution().entropy();
        let upper = (n * h).exp();
        (upper * (n + 1.0).powi(-(self.support_size() as i32)), upper)
    }

    /// Exact check of `(n+1)^{−|supp|} e^{nH} ≤ |T| ≤ e^{nH}` in integer arithmetic.
    pub fn size_bounds_hold(&self) -> bool {
        let size = self.size();
        let (num, den) = self.exp_n_entropy();
        let lower_ok =
            num <= &size * BigUint::from(self.n + 1).pow(self.support_size() as u32) * &den;
        let upper_ok = &size * &den <= num;
        lower_ok && upper_ok
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// The type of a sequence of symbols.
pub fn type_of<S: AsRef<str>>(sequence: &[S]) -> Result<TypeClass> {
    TypeClass::from_counts(sequence.iter().map(|s| (s.as_ref().to_string(), 1u64)))
}

/// `Σ_{x ∈ supp(P)^m} P^{⊗m}(x) P_x` by exhaustive enumeration, where `P_x` is
/// the type of `x`.
pub fn type_mixing_check(p: &InputDistribution, m: u32) -> Result<InputDistribution> {
    let support: Vec<(&str, f64)> = p.support().collect();
    if m == 0 || m > 8 {
        return Err(Error::Domain(format!(
            "sequence length must be in 1..=8, got {m}"
        )));
    }
    if support.len() > 4 {
        return Err(Error::ResourceLimit(format!(
            "enumeration supports at most 4 symbols, got {}",
            support.len()
        )));
    }
    let k = support.len();
    let mut acc = vec![0.0; k];
    let mut digits = vec![0usize; m as usize];
    loop {
        let prob: f64 = digits.iter().map(|&i| support[i].1).product();
        for &i in &digits {
            acc[i] += prob / m as f64;
        }
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return InputDistribution::new(
                    support
                        .iter()
                        .zip(acc)
                        .map(|((s, _), w)| (s.to_string(), w)),
                );
            }
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// On-disk channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub symbols: Vec<String>,
    pub outputs: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<BTreeMap<String, f64>>,
}

impl ChannelFile {
    pub fn from_channel(w: &GcqChannel, p: Option<&InputDistribution>) -> Self {
        let outputs = w
            .outputs()
            .map(|(s, op)| {
                let m = op.matrix();
                let rows = (0..m.nrows())
                    .map(|i| {
                        (0..m.ncols())
                            .map(|j| [m[(i, j)].re, m[(i, j)].im])
                            .collect()
                    })
                    .collect();
                (s.to_string(), rows)
            })
            .collect();
        Self {
            dim: w.dim(),
            symbols: w.symbols().map(String::from).collect(),
            outputs,
            distribution: p.map(|p| p.iter().map(|(s, w)| (s.to_string(), w)).collect()),
        }
    }

    /// Validates the description field by field.
    pub fn into_channel(self) -> Result<(GcqChannel, Option<InputDistribution>)> {
        if self.dim == 0 {
            return Err(Error::Schema("dim: must be positive".into()));
        }
        if self.dim > MAX_CHANNEL_DIM {
            return Err(Error::ResourceLimit(format!(
                "dim {} exceeds {MAX_CHANNEL_DIM}",
                self.dim
            )));
        }
        if self.symbols.is_empty() {
            return Err(Error::Schema("symbols: must be non-empty".into()));
        }
        let mut ops = Vec::with_capacity(self.symbols.len());
        for sym in &self.symbols {
            let rows = self.outputs.get(sym).ok_or_else(|| {
                Error::Schema(format!("outputs.{sym}: missing output for listed symbol"))
            })?;
            if rows.len() != self.dim {
                return Err(Error::Schema(format!(
                    "outputs.{sym}: {} rows, expected {}",
                    rows.len(),
                    self.dim
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.dim {
                    return Err(Error::Schema(format!(
                        "outputs.{sym}[{i}]: {} entries, expected {}",
                        row.len(),
                        self.dim
                    )));
                }
            }
            let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                C64::new(rows[i][j][0], rows[i][j][1])
            });
            let herm_err = (&m - m.adjoint())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            if herm_err > 1e-9 {
                return Err(Error::Schema(format!(
                    "outputs.{sym}: not Hermitian (deviation {herm_err:e})"
                )));
            }
            let op = HermitianOperator::new(m)
                .map_err(|e| Error::Schema(format!("outputs.{sym}: {e}")))?;
            if !op.is_psd() {
                return Err(Error::Schema(format!(
                    "outputs.{sym}: not positive semi-definite (minimum eigenvalue {:e})",
                    op.min_eigenvalue()
                )));
            }
            ops.push((sym.clone(), op));
        }
        if let Some(extra) = self.outputs.keys().find(|k| !self.symbols.contains(k)) {
            return Err(Error::Schema(format!(
                "outputs.{extra}: symbol not listed in symbols"
            )));
        }
        let channel = GcqChannel::new(ops).map_err(|e| Error::Schema(format!("symbols: {e}")))?;
        let distribution = match self.distribution {
            None => None,
            Some(d) => {
                if let Some(bad) = d.keys().find(|k| !self.symbols.contains(k)) {
                    return Err(Error::Schema(format!("distribution.{bad}: unknown symbol")));
                }
                Some(
                    InputDistribution::new(d)
                        .map_err(|e| Error::Schema(format!("distribution: {e}")))?,
                )
            }
        };
        Ok((channel, distribution))
    }
}

/// Parses the channel JSON format; parse errors carry line and column.
pub fn parse_channel_json(text: &str) -> Result<(GcqChannel, Option<InputDistribution>)> {
    let file: ChannelFile = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    file.into_channel()
}

pub fn channel_to_json(w: &GcqChannel, p: Option<&InputDistribution>) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(w, p)).expect("channel serializes")
}
