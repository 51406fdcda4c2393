//! Observables, Birkhoff traces and finite-horizon irregularity evidence.
//!
//! Nothing here can prove that an average converges; a missing certificate
//! only means no evidence was found within the horizon.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::measures::{integrate, neumaier_sum, MeasureModel};
use crate::symbolic::{word_index, ShiftSpace, Symbol, SymbolicPoint, Word};

/// Bits read ahead when a binary sequence is viewed as a point of the circle.
pub const GUARD_BITS: usize = 128;

/// Default certificate tolerance.
pub const DEFAULT_TOL: f64 = 0.01;

/// Fewest checkpoints a certificate is attempted on (three per cluster).
pub const MIN_CERTIFICATE_CHECKPOINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    pub fn name(self) -> &'static str {
        match self {
            TrigKind::Sin => "sin",
            TrigKind::Cos => "cos",
        }
    }

    /// `sin(2πt)` or `cos(2πt)`.
    pub fn eval_turns(self, t: f64) -> f64 {
        let a = std::f64::consts::TAU * t;
        match self {
            TrigKind::Sin => a.sin(),
            TrigKind::Cos => a.cos(),
        }
    }
}

/// Function of the first `range` symbols, stored densely by base-k index.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTable {
    k: usize,
    range: usize,
    values: Vec<f64>,
}

impl LocalTable {
    pub fn new(k: usize, range: usize, values: Vec<f64>) -> Result<Self> {
        if range == 0 {
            return Err(LabError::InvalidObservable("range must be ≥ 1".into()));
        }
        let size = k
            .checked_pow(range as u32)
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| LabError::InvalidObservable(format!("table of range {range} over {k} symbols is too large")))?;
        if values.len() != size {
            return Err(LabError::InvalidObservable(format!(
                "expected {size} table values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidObservable("table values must be finite".into()));
        }
        Ok(LocalTable { k, range, values })
    }

    /// Table from a word map. Every admissible word of length `range` must be
    /// present; inadmissible words default to 0.
    pub fn from_map(space: &ShiftSpace, range: usize, map: &BTreeMap<Word, f64>) -> Result<Self> {
        let k = space.alphabet();
        let mut values = vec![0.0; k.pow(range as u32)];
        for (w, &v) in map {
            if w.len() != range {
                return Err(LabError::InvalidObservable(format!("word {w} does not have length {range}")));
            }
            w.check_alphabet(k)?;
            values[w.index(k)] = v;
        }
        for w in space.enumerate_words(range) {
            if !map.contains_key(&w) {
                return Err(LabError::InvalidObservable(format!("table is missing admissible word {w}")));
            }
        }
        LocalTable::new(k, range, values)
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, w: &[Symbol]) -> f64 {
        self.values[word_index(&w[..self.range], self.k)]
    }

    fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> LocalTable {
        LocalTable {
            k: self.k,
            range: self.range,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    LocallyConstant(LocalTable),
    /// `sin` or `cos` of `2π·frequency·x` on the circle, read through the binary expansion.
    Trig { kind: TrigKind, frequency: u32 },
    /// `c + h − h∘σ`.
    Coboundary { h: LocalTable, c: f64 },
}

impl Observable {
    pub fn locally_constant(k: usize, range: usize, values: Vec<f64>) -> Result<Self> {
        LocalTable::new(k, range, values).map(Observable::LocallyConstant)
    }

    pub fn constant(k: usize, c: f64) -> Result<Self> {
        Observable::locally_constant(k, 1, vec![c; k])
    }

    /// `1[x₀ = s]`.
    pub fn symbol_indicator(k: usize, s: Symbol) -> Result<Self> {
        Observable::locally_constant(k, 1, (0..k).map(|a| f64::from(a == s as usize)).collect())
    }

    /// `1[x₀ = x₁]`.
    pub fn repeat_indicator(k: usize) -> Result<Self> {
        Observable::locally_constant(k, 2, (0..k * k).map(|i| f64::from(i / k == i % k)).collect())
    }

    pub fn trig(kind: TrigKind, frequency: u32) -> Result<Self> {
        if frequency == 0 {
            return Err(LabError::InvalidObservable("frequency must be ≥ 1".into()));
        }
        Ok(Observable::Trig { kind, frequency })
    }

    pub fn coboundary(h: LocalTable, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(LabError::InvalidObservable("constant must be finite".into()));
        }
        Ok(Observable::Coboundary { h, c })
    }

    /// Number of leading symbols the value depends on.
    pub fn window(&self) -> usize {
        match self {
            Observable::LocallyConstant(t) => t.range,
            Observable::Trig { .. } => GUARD_BITS,
            Observable::Coboundary { h, .. } => h.range + 1,
        }
    }

    pub fn alphabet(&self) -> Option<usize> {
        match self {
            Observable::LocallyConstant(t) => Some(t.k),
            Observable::Trig { .. } => Some(2),
            Observable::Coboundary { h, .. } => Some(h.k),
        }
    }

    /// Lookup table; coboundaries are expanded to range `r + 1`.
    pub fn table(&self) -> Result<LocalTable> {
        match self {
            Observable::LocallyConstant(t) => Ok(t.clone()),
            Observable::Coboundary { h, c } => {
                let k = h.k;
                let r = h.range + 1;
                let size = k.pow(r as u32);
                let values = (0..size)
                    .map(|i| {
                        let w = Word::from_index(i, r, k);
                        let s = w.as_slice();
                        c + h.value(&s[..r - 1]) - h.value(&s[1..])
                    })
                    .collect();
                LocalTable::new(k, r, values)
            }
            Observable::Trig { .. } => Err(LabError::Unsupported("trigonometric observables have no finite table".into())),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Observable::LocallyConstant(t) => (t.min(), t.max()),
            Observable::Trig { .. } => (-1.0, 1.0),
            Observable::Coboundary { h, c } => (c + h.min() - h.max(), c + h.max() - h.min()),
        }
    }

    /// `a·φ + b`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Observable> {
        match self {
            Observable::LocallyConstant(t) => Ok(Observable::LocallyConstant(t.map(|v| a * v + b))),
            Observable::Coboundary { h, c } => Ok(Observable::Coboundary {
                h: h.map(|v| a * v),
                c: a * c + b,
            }),
            Observable::Trig { .. } => Observable::LocallyConstant(self.table()?).affine(a, b),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Observable::LocallyConstant(t) => format!("locally constant, range {}", t.range),
            Observable::Trig { kind, frequency } => format!("{}(2π·{frequency}·x)", kind.name()),
            Observable::Coboundary { h, c } => format!("coboundary c={c}, range {}", h.range),
        }
    }

    /// Calls `f(φ(σⁱx))` for `i < n`, given at least `n − 1 + window` symbols.
    pub(crate) fn for_each_value(&self, symbols: &[Symbol], n: usize, mut f: impl FnMut(f64)) -> Result<()> {
        let needed = n + self.window() - 1;
        if n > 0 && symbols.len() < needed {
            return Err(LabError::HorizonExceeded {
                requested: needed,
                available: symbols.len(),
            });
        }
        match self {
            Observable::Trig { kind, frequency } => {
                let mut window = 0u128;
                for &b in symbols.iter().take(GUARD_BITS) {
                    if b > 1 {
                        return Err(LabError::Unsupported("trigonometric observables need binary symbols".into()));
                    }
                    window = (window << 1) | u128::from(b);
                }
                for i in 0..n {
                    f(trig_from_window(window, *kind, *frequency));
                    if let Some(&b) = symbols.get(i + GUARD_BITS) {
                        if b > 1 {
                            return Err(LabError::Unsupported("trigonometric observables need binary symbols".into()));
                        }
                        window = (window << 1) | u128::from(b);
                    }
                }
            }
            _ => {
                let table = self.table()?;
                let (k, r) = (table.k, table.range);
                if symbols.iter().take(needed).any(|&s| s as usize >= k) {
                    return Err(LabError::SymbolOutOfRange {
                        symbol: symbols.iter().copied().find(|&s| s as usize >= k).unwrap_or(0) as u32,
                        k,
                    });
                }
                let size = table.values.len();
                let mut code = word_index(&symbols[..r - 1], k);
                for &s in &symbols[r - 1..needed] {
                    code = (code * k + s as usize) % size;
                    f(table.values[code]);
                }
            }
        }
        Ok(())
    }
}

/// Value of the trigonometric observable at `x ≈ window / 2¹²⁸`.
pub(crate) fn trig_from_window(window: u128, kind: TrigKind, frequency: u32) -> f64 {
    // frac(m·x) in two's complement, i.e. reduced to [−½, ½)
    let scaled = window.wrapping_mul(u128::from(frequency)) as i128;
    kind.eval_turns(scaled as f64 * 2f64.powi(-128))
}

/// Birkhoff averages of several observables at common checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffTrace {
    pub checkpoints: Vec<usize>,
    /// `averages[o][j]` is `A_{n_j}` for observable `o`.
    pub averages: Vec<Vec<f64>>,
}

impl BirkhoffTrace {
    /// CSV with columns `checkpoint,observable_id,average`.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("checkpoint,observable_id,average\n");
        for (j, n) in self.checkpoints.iter().enumerate() {
            for (o, row) in self.averages.iter().enumerate() {
                let id = ids.get(o).cloned().unwrap_or_else(|| o.to_string());
                out.push_str(&format!("{n},{id},{:.17e}\n", row[j]));
            }
        }
        out
    }
}

fn check_increasing(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|p| p[0] >= p[1]) {
        return Err(LabError::Precondition("checkpoints must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn materialize_for(x: &SymbolicPoint, phi: &Observable, last: usize) -> Result<Word> {
    if phi.alphabet().is_some_and(|k| k != x.alphabet()) {
        return Err(LabError::Unsupported("observable and point use different alphabets".into()));
    }
    x.materialize_prefix(last + phi.window() - 1)
}

/// Averages `A_{n_j}` of one observable, computed in a single compensated pass.
pub fn birkhoff_averages(x: &SymbolicPoint, phi: &Observable, checkpoints: &[usize]) -> Result<Vec<f64>> {
    check_increasing(checkpoints)?;
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    let word = materialize_for(x, phi, last)?;
    averages_on(word.as_slice(), phi, checkpoints)
}

pub(crate) fn averages_on(symbols: &[Symbol], phi: &Observable, checkpoints: &[usize]) -> Result<Vec<f64>> {
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut i = 0usize;
    let mut next = 0usize;
    phi.for_each_value(symbols, last, |v| {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        i += 1;
        if next < checkpoints.len() && checkpoints[next] == i {
            out.push((sum + comp) / i as f64);
            next += 1;
        }
    })?;
    Ok(out)
}

pub fn birkhoff_trace(x: &SymbolicPoint, observables: &[Observable], checkpoints: &[usize]) -> Result<BirkhoffTrace> {
    check_increasing(checkpoints)?;
    let last = checkpoints.last().copied().unwrap_or(0);
    let window = observables.iter().map(Observable::window).max().unwrap_or(1);
    let word = if last == 0 {
        Word::empty()
    } else {
        x.materialize_prefix(last + window - 1)?
    };
    let averages = observables
        .iter()
        .map(|phi| {
            if phi.alphabet().is_some_and(|k| k != x.alphabet()) {
                return Err(LabError::Unsupported("observable and point use different alphabets".into()));
            }
            averages_on(word.as_slice(), phi, checkpoints)
        })
        .collect::<Result<_>>()?;
    Ok(BirkhoffTrace {
        checkpoints: checkpoints.to_vec(),
        averages,
    })
}

/// Which indices to sample a Birkhoff trace at.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckpointPlan {
    Explicit(Vec<usize>),
    /// `⌈ratioʲ⌉` for `j = 0, 1, …`.
    Geometric { ratio: f64 },
    /// Ends of construction blocks.
    BlockEnds,
    /// `per_block` checkpoints at the end of each block spaced by `spacing·end`.
    BlockTails { per_block: usize, spacing: f64 },
}

impl Default for CheckpointPlan {
    fn default() -> Self {
        CheckpointPlan::BlockEnds
    }
}

/// Checkpoints together with the construction block each falls in.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoints {
    pub indices: Vec<usize>,
    pub blocks: Option<Vec<usize>>,
}

impl CheckpointPlan {
    /// Resolves the plan up to `horizon`. `block_ends` are the cumulative
    /// end offsets of construction blocks, when known; block-based plans
    /// without them fall back to a geometric plan with ratio 1.5.
    pub fn resolve(&self, horizon: usize, block_ends: Option<&[usize]>) -> Result<Checkpoints> {
        let mut indices: Vec<usize> = match self {
            CheckpointPlan::Explicit(v) => v.iter().copied().filter(|&n| n >= 1 && n <= horizon).collect(),
            CheckpointPlan::Geometric { ratio } => {
                if !(*ratio > 1.0) {
                    return Err(LabError::Precondition("geometric ratio must exceed 1".into()));
                }
                let mut v = Vec::new();
                let mut t = 1.0f64;
                while t.ceil() <= horizon as f64 {
                    v.push(t.ceil() as usize);
                    t *= ratio;
                }
                v
            }
            CheckpointPlan::BlockEnds => match block_ends {
                Some(ends) => ends.iter().map(|&e| e.min(horizon)).filter(|&e| e >= 1).collect(),
                None => return CheckpointPlan::Geometric { ratio: 1.5 }.resolve(horizon, None),
            },
            CheckpointPlan::BlockTails { per_block, spacing } => match block_ends {
                Some(ends) => {
                    let mut v = Vec::new();
                    let mut start = 0usize;
                    for &end in ends {
                        let e = end.min(horizon);
                        let step = ((spacing * e as f64) as usize).max(1);
                        for i in (0..*per_block).rev() {
                            if let Some(c) = e.checked_sub(i * step) {
                                if c > start {
                                    v.push(c);
                                }
                            }
                        }
                        start = end;
                        if end >= horizon {
                            break;
                        }
                    }
                    v
                }
                None => return CheckpointPlan::Geometric { ratio: 1.5 }.resolve(horizon, None),
            },
        };
        indices.sort_unstable();
        indices.dedup();
        let blocks = block_ends.map(|ends| {
            indices
                .iter()
                .map(|&n| ends.iter().position(|&e| n <= e).unwrap_or(ends.len().saturating_sub(1)))
                .collect()
        });
        Ok(Checkpoints { indices, blocks })
    }
}

/// One side of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub indices: Vec<usize>,
    pub averages: Vec<f64>,
    /// Average at the last index.
    pub limit: f64,
    pub oscillation: f64,
}

/// Evidence that the averages of one observable have two distinct
/// accumulation values at finite horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub observable: usize,
    pub tol: f64,
    pub a: Cluster,
    pub b: Cluster,
    pub gap: f64,
}

/// Longest run at the end of `members` with spread ≤ tol, if it has ≥ 3 entries.
fn stable_tail(members: &[(usize, f64)], tol: f64) -> Option<Cluster> {
    let mut start = members.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    while start > 0 {
        let v = members[start - 1].1;
        let (nlo, nhi) = (lo.min(v), hi.max(v));
        if nhi - nlo > tol {
            break;
        }
        lo = nlo;
        hi = nhi;
        start -= 1;
    }
    let tail = &members[start..];
    if tail.len() < 3 {
        return None;
    }
    Some(Cluster {
        indices: tail.iter().map(|m| m.0).collect(),
        averages: tail.iter().map(|m| m.1).collect(),
        limit: tail[tail.len() - 1].1,
        oscillation: hi - lo,
    })
}

/// Deterministic 1-D 2-means, started from the extreme values.
fn two_means(values: &[f64]) -> Vec<bool> {
    let mut c0 = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut c1 = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut labels = vec![false; values.len()];
    for _ in 0..100 {
        let new: Vec<bool> = values.iter().map(|&v| (v - c1).abs() < (v - c0).abs()).collect();
        let mean = |side: bool| {
            let sel: Vec<f64> = values.iter().zip(&new).filter(|p| *p.1 == side).map(|p| *p.0).collect();
            (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64)
        };
        c0 = mean(false).unwrap_or(c0);
        c1 = mean(true).unwrap_or(c1);
        if new == labels {
            break;
        }
        labels = new;
    }
    labels
}

/// Searches a trace for two clusters of averages separated by `2·tol`.
/// With block labels the clusters are the even and odd blocks, otherwise
/// they come from 2-means on the averages.
pub fn certificate_from_averages(
    observable: usize,
    checkpoints: &Checkpoints,
    averages: &[f64],
    tol: f64,
) -> Result<Option<Certificate>> {
    if checkpoints.indices.len() < MIN_CERTIFICATE_CHECKPOINTS {
        return Err(LabError::Precondition(format!(
            "need at least {MIN_CERTIFICATE_CHECKPOINTS} checkpoints, got {}",
            checkpoints.indices.len()
        )));
    }
    let labels: Vec<bool> = match &checkpoints.blocks {
        Some(blocks) => blocks.iter().map(|b| b % 2 == 1).collect(),
        None => two_means(averages),
    };
    let side = |s: bool| -> Vec<(usize, f64)> {
        checkpoints
            .indices
            .iter()
            .zip(averages)
            .zip(&labels)
            .filter(|p| *p.1 == s)
            .map(|p| (*p.0 .0, *p.0 .1))
            .collect()
    };
    let (Some(a), Some(b)) = (stable_tail(&side(false), tol), stable_tail(&side(true), tol)) else {
        return Ok(None);
    };
    let gap = (a.limit - b.limit).abs();
    if gap < 2.0 * tol {
        return Ok(None);
    }
    Ok(Some(Certificate {
        observable,
        tol,
        a,
        b,
        gap,
    }))
}

/// Irregularity certificate for `phi` along `x`.
pub fn irregularity_certificate(
    x: &SymbolicPoint,
    phi: &Observable,
    plan: &CheckpointPlan,
    horizon: usize,
    block_ends: Option<&[usize]>,
    tol: f64,
) -> Result<Option<Certificate>> {
    let cps = plan.resolve(horizon, block_ends)?;
    let averages = birkhoff_averages(x, phi, &cps.indices)?;
    certificate_from_averages(0, &cps, &averages, tol)
}

/// Recomputes both clusters from scratch and checks the certificate's claims.
pub fn verify_certificate(cert: &Certificate, x: &SymbolicPoint, phi: &Observable) -> Result<bool> {
    let check = |c: &Cluster| -> Result<bool> {
        let fresh = birkhoff_averages(x, phi, &c.indices)?;
        let close = fresh.iter().zip(&c.averages).all(|(u, v)| (u - v).abs() <= 1e-12);
        let lo = fresh.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fresh.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(close && c.indices.len() >= 3 && hi - lo <= cert.tol && (fresh[fresh.len() - 1] - c.limit).abs() <= 1e-12)
    };
    Ok(check(&cert.a)? && check(&cert.b)? && (cert.a.limit - cert.b.limit).abs() >= 2.0 * cert.tol)
}

/// Two measures from the pool whose integrals of `phi` differ the most.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub first: usize,
    pub second: usize,
    pub integrals: (f64, f64),
}

impl Witness {
    pub fn gap(&self) -> f64 {
        (self.integrals.0 - self.integrals.1).abs()
    }
}

/// Witness that `phi` separates invariant measures, hence has irregular points.
pub fn truly_observable_witness(phi: &Observable, pool: &[MeasureModel]) -> Result<Option<Witness>> {
    if pool.is_empty() {
        return Err(LabError::Precondition("measure pool is empty".into()));
    }
    let values: Vec<f64> = pool.iter().map(|m| integrate(m, phi)).collect::<Result<_>>()?;
    let argmin = (0..values.len()).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("nonempty");
    let argmax = (0..values.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).expect("nonempty");
    if values[argmax] - values[argmin] <= 1e-9 {
        return Ok(None);
    }
    Ok(Some(Witness {
        first: argmin,
        second: argmax,
        integrals: (values[argmin], values[argmax]),
    }))
}

/// Sum of `phi` over the first `n` positions of `symbols`.
pub fn birkhoff_sum(symbols: &[Symbol], phi: &Observable, n: usize) -> Result<f64> {
    let mut values = Vec::with_capacity(n);
    phi.for_each_value(symbols, n, |v| values.push(v))?;
    Ok(neumaier_sum(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::periodic_measure;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn fixed(cycle: &str) -> SymbolicPoint {
        SymbolicPoint::periodic(&ShiftSpace::full(2).unwrap(), Word::empty(), w(cycle)).unwrap()
    }

    fn ind1() -> Observable {
        Observable::symbol_indicator(2, 1).unwrap()
    }

    #[test]
    fn birkhoff_examples() {
        let avg = birkhoff_averages(&fixed("0"), &ind1(), &[1, 10, 100]).unwrap();
        assert_eq!(avg, vec![0.0; 3]);
        let avg = birkhoff_averages(&fixed("01"), &ind1(), &[2, 4, 1000]).unwrap();
        assert_eq!(avg, vec![0.5; 3]);
        let cps: Vec<usize> = (1..=100_000).map(|i| 3 * i).collect();
        let avg = birkhoff_averages(&fixed("001"), &ind1(), &cps).unwrap();
        assert!(avg.iter().all(|&a| a == 1.0 / 3.0));
    }

    #[test]
    fn checkpoints_must_increase() {
        assert!(birkhoff_averages(&fixed("0"), &ind1(), &[3, 2]).is_err());
        assert!(birkhoff_averages(&fixed("0"), &ind1(), &[0, 2]).is_err());
    }

    #[test]
    fn coboundary_table_telescopes() {
        let h = LocalTable::new(2, 1, vec![0.0, 1.0]).unwrap();
        let phi = Observable::coboundary(h, 0.0).unwrap();
        let t = phi.table().unwrap();
        assert_eq!(t.range(), 2);
        assert_eq!(t.values(), &[0.0, -1.0, 1.0, 0.0]);
        let cps: Vec<usize> = (1..=500).collect();
        let avg = birkhoff_averages(&fixed("0111001"), &phi, &cps).unwrap();
        for (n, a) in cps.iter().zip(avg) {
            assert!(a.abs() <= 2.0 / *n as f64);
        }
    }

    #[test]
    fn trig_window_matches_direct_evaluation() {
        // 1/7 = 0.001001…₂
        let x = fixed("001");
        let phi = Observable::trig(TrigKind::Sin, 1).unwrap();
        let mut vals = Vec::new();
        let word = x.materialize_prefix(3 + GUARD_BITS).unwrap();
        phi.for_each_value(word.as_slice(), 4, |v| vals.push(v)).unwrap();
        let tau = std::f64::consts::TAU;
        let expect = [(tau / 7.0).sin(), (2.0 * tau / 7.0).sin(), (4.0 * tau / 7.0).sin(), (tau / 7.0).sin()];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
    }

    #[test]
    fn block_plans_resolve() {
        let ends = [10, 100, 1000];
        let c = CheckpointPlan::BlockEnds.resolve(500, Some(&ends)).unwrap();
        assert_eq!(c.indices, vec![10, 100, 500]);
        assert_eq!(c.blocks, Some(vec![0, 1, 2]));
        let c = CheckpointPlan::BlockTails { per_block: 3, spacing: 0.01 }
            .resolve(1000, Some(&ends))
            .unwrap();
        assert_eq!(c.indices, vec![8, 9, 10, 98, 99, 100, 980, 990, 1000]);
        let g = CheckpointPlan::Geometric { ratio: 2.0 }.resolve(20, None).unwrap();
        assert_eq!(g.indices, vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn fixed_point_gets_no_certificate() {
        let plan = CheckpointPlan::Geometric { ratio: 1.5 };
        let cert = irregularity_certificate(&fixed("0"), &ind1(), &plan, 10_000, None, 0.01).unwrap();
        assert!(cert.is_none());
    }

    #[test]
    fn too_few_checkpoints_is_an_error() {
        let plan = CheckpointPlan::Explicit(vec![1, 2, 3]);
        assert!(irregularity_certificate(&fixed("0"), &ind1(), &plan, 10, None, 0.01).is_err());
    }

    #[test]
    fn witness_examples() {
        let f = ShiftSpace::full(2).unwrap();
        let pool = vec![periodic_measure(&f, w("0")).unwrap(), periodic_measure(&f, w("1")).unwrap()];
        let wit = truly_observable_witness(&ind1(), &pool).unwrap().unwrap();
        assert_eq!(wit.integrals, (0.0, 1.0));
        let five = Observable::constant(2, 5.0).unwrap();
        assert!(truly_observable_witness(&five, &pool).unwrap().is_none());
        let h = LocalTable::new(2, 2, vec![0.3, -1.0, 2.0, 0.5]).unwrap();
        let cob = Observable::coboundary(h, 0.0).unwrap();
        let pool = vec![
            periodic_measure(&f, w("0")).unwrap(),
            periodic_measure(&f, w("011")).unwrap(),
            periodic_measure(&f, w("01")).unwrap(),
        ];
        assert!(truly_observable_witness(&cob, &pool).unwrap().is_none());
    }

    #[test]
    fn two_means_splits_extremes() {
        assert_eq!(two_means(&[0.0, 1.0, 0.1, 0.9]), vec![false, true, false, true]);
    }
}
