//! Topological pressure, equilibrium states, separated-set entropy and
//! Bowen's equation. All values are in nats.

use serde::Serialize;

use crate::beta::BetaNumber;
use crate::error::{LabError, Result};
use crate::measures::{entropy_rate, integrate, markov_block_measure, MeasureModel};
use crate::observables::{LocalTable, Observable};
use crate::symbolic::{word_index, ShiftSpace, Symbol, Word};
use crate::synthesis::ln_biguint;

/// Relative gap between the Collatz–Wielandt bounds at which power iteration stops.
const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 100_000;
/// Largest `n` accepted by the separated-set enumeration.
pub const SEPARATED_MAX_N: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    TransferExact,
    CylinderEstimate,
    VariationalLower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureResult {
    pub value: f64,
    pub method: PressureMethod,
    pub n: Option<usize>,
    pub depth_offset: Option<usize>,
    pub error_bound: Option<f64>,
}

/// Weighted transfer matrix on admissible words of length `m = max(r − 1, 1)`.
struct Transfer {
    order: usize,
    states: Vec<Word>,
    /// Sparse rows: `(target, weight)`, weights scaled by `e^(−shift)`.
    rows: Vec<Vec<(usize, f64)>>,
    shift: f64,
}

fn transfer_matrix(space: &ShiftSpace, phi: &LocalTable) -> Result<Transfer> {
    if !space.is_markov() {
        return Err(LabError::Unsupported("transfer matrices on β-shifts".into()));
    }
    if space.mixing_gap().is_none() {
        return Err(LabError::NotMixing);
    }
    if phi.alphabet() != space.alphabet() {
        return Err(LabError::Unsupported("potential and space use different alphabets".into()));
    }
    let k = space.alphabet();
    let order = phi.range().saturating_sub(1).max(1);
    let states = space.enumerate_words(order);
    let mut index = vec![usize::MAX; k.pow(order as u32)];
    for (i, s) in states.iter().enumerate() {
        index[s.index(k)] = i;
    }
    let shift = phi.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut rows = Vec::with_capacity(states.len());
    for u in &states {
        let mut row = Vec::new();
        for a in 0..k as Symbol {
            let mut w = u.as_slice().to_vec();
            w.push(a);
            if !space.is_admissible(&w) {
                continue;
            }
            let v = index[word_index(&w[1..], k)];
            row.push((v, (phi.value(&w) - shift).exp()));
        }
        rows.push(row);
    }
    Ok(Transfer {
        order,
        states,
        rows,
        shift,
    })
}

impl Transfer {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(v, w)| w * x[v]).sum())
            .collect()
    }

    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                y[v] += w * x[u];
            }
        }
        y
    }
}

/// Power iteration from the all-ones vector. Returns the Collatz–Wielandt
/// bounds and the final (max-normalized) vector.
fn power_iterate(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Result<(f64, f64, Vec<f64>)> {
    let mut x = vec![1.0; n];
    for _ in 0..POWER_MAX_ITER {
        let y = apply(&x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = y.iter().copied().fold(0.0, f64::max);
        if !(norm > 0.0) || !lo.is_finite() {
            return Err(LabError::Numerical("power iteration degenerated".into()));
        }
        x = y.into_iter().map(|v| v / norm).collect();
        if (hi - lo) <= POWER_TOL * lo {
            return Ok((lo, hi, x));
        }
    }
    Err(LabError::Numerical(format!("power iteration did not converge in {POWER_MAX_ITER} iterations")))
}

fn potential_table(phi: &Observable) -> Result<LocalTable> {
    phi.table()
}

/// `ln ρ(B)` for the weighted transfer matrix of a locally constant potential.
pub fn transfer_pressure(space: &ShiftSpace, phi: &Observable) -> Result<PressureResult> {
    let t = transfer_matrix(space, &potential_table(phi)?)?;
    let (lo, hi, _) = power_iterate(t.states.len(), |x| t.apply(x))?;
    Ok(PressureResult {
        value: (0.5 * (lo + hi)).ln() + t.shift,
        method: PressureMethod::TransferExact,
        n: None,
        depth_offset: None,
        error_bound: Some((hi / lo).ln()),
    })
}

/// Equilibrium Markov chain `P_uv = B_uv r_v / (λ r_u)` together with the pressure.
pub fn equilibrium_markov(space: &ShiftSpace, phi: &Observable) -> Result<(MeasureModel, PressureResult)> {
    let t = transfer_matrix(space, &potential_table(phi)?)?;
    let n = t.states.len();
    let (lo, hi, r) = power_iterate(n, |x| t.apply(x))?;
    let lambda = 0.5 * (lo + hi);
    let mut p = vec![vec![0.0; n]; n];
    for (u, row) in t.rows.iter().enumerate() {
        for &(v, w) in row {
            p[u][v] = w * r[v] / (lambda * r[u]);
        }
        let sum: f64 = p[u].iter().sum();
        for x in &mut p[u] {
            *x /= sum;
        }
    }
    let mu = markov_block_measure(space, t.order, p)?;
    let result = PressureResult {
        value: lambda.ln() + t.shift,
        method: PressureMethod::TransferExact,
        n: None,
        depth_offset: None,
        error_bound: Some((hi / lo).ln()),
    };
    Ok((mu, result))
}

/// Left Perron vector, used to cross-check the stationary law `∝ l·r`.
pub fn perron_vectors(space: &ShiftSpace, phi: &Observable) -> Result<(Vec<Word>, Vec<f64>, Vec<f64>)> {
    let t = transfer_matrix(space, &potential_table(phi)?)?;
    let n = t.states.len();
    let (_, _, r) = power_iterate(n, |x| t.apply(x))?;
    let (_, _, l) = power_iterate(n, |x| t.apply_transpose(x))?;
    Ok((t.states, l, r))
}

/// `h_μ + ∫φ dμ`, a lower bound for the pressure.
pub fn variational_lower(mu: &MeasureModel, phi: &Observable) -> Result<PressureResult> {
    Ok(PressureResult {
        value: entropy_rate(mu) + integrate(mu, phi)?,
        method: PressureMethod::VariationalLower,
        n: None,
        depth_offset: None,
        error_bound: None,
    })
}

/// Set of length-`n` words entering a cylinder partition sum.
#[derive(Clone, Debug, PartialEq)]
pub enum WordSet {
    All,
    Explicit(Vec<Word>),
    /// All admissible words matching the pattern (`None` = any symbol).
    Pattern(Vec<Option<Symbol>>),
}

/// `(1/n)·ln Σ_{w ∈ E} exp(sup_{[w]} S_nφ)`.
///
/// Windows that run past the word are maximized over admissible
/// continuations, which makes the sum for `E = all words` submultiplicative
/// and so an upper approximant of the pressure.
pub fn cylinder_pressure_estimate(space: &ShiftSpace, set: &WordSet, phi: &Observable, n: usize) -> Result<PressureResult> {
    let table = potential_table(phi)?;
    if table.alphabet() != space.alphabet() {
        return Err(LabError::Unsupported("potential and space use different alphabets".into()));
    }
    if n < table.range() {
        return Err(LabError::Precondition(format!("n = {n} is below the potential's range {}", table.range())));
    }
    let log_sum = match set {
        WordSet::All => pattern_log_sum(space, &table, &vec![None; n])?,
        WordSet::Pattern(p) => {
            if p.len() != n {
                return Err(LabError::Precondition("pattern length differs from n".into()));
            }
            pattern_log_sum(space, &table, p)?
        }
        WordSet::Explicit(words) => explicit_log_sum(space, &table, words, n)?,
    };
    Ok(PressureResult {
        value: log_sum / n as f64,
        method: PressureMethod::CylinderEstimate,
        n: Some(n),
        depth_offset: Some(0),
        error_bound: None,
    })
}

/// Best total of the `r − 1` trailing windows over admissible continuations.
fn tail_sup(space: &ShiftSpace, table: &LocalTable, state: usize, tail: &[Symbol]) -> Option<f64> {
    let r = table.range();
    if r == 1 {
        return Some(0.0);
    }
    fn go(space: &ShiftSpace, table: &LocalTable, state: usize, buf: &mut Vec<Symbol>, need: usize) -> Option<f64> {
        let r = table.range();
        if need == 0 {
            // windows starting at each of the first r − 1 positions of buf
            let total = (0..r - 1).map(|i| table.value(&buf[i..i + r])).sum();
            return Some(total);
        }
        let mut best: Option<f64> = None;
        for a in 0..space.alphabet() as Symbol {
            if let Some(t) = space.automaton().step(state, a) {
                buf.push(a);
                if let Some(v) = go(space, table, t, buf, need - 1) {
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
                buf.pop();
            }
        }
        best
    }
    let mut buf = tail.to_vec();
    go(space, table, state, &mut buf, r - 1)
}

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn explicit_log_sum(space: &ShiftSpace, table: &LocalTable, words: &[Word], n: usize) -> Result<f64> {
    if words.is_empty() {
        return Err(LabError::Precondition("empty word set".into()));
    }
    let r = table.range();
    let mut terms = Vec::with_capacity(words.len());
    for w in words {
        let s = w.as_slice();
        if s.len() != n {
            return Err(LabError::Precondition(format!("word {w} does not have length {n}")));
        }
        let state = space.automaton().run(s).ok_or_else(|| LabError::Inadmissible(w.to_string()))?;
        let body: f64 = (0..=n - r).map(|i| table.value(&s[i..i + r])).sum();
        let Some(tail) = tail_sup(space, table, state, &s[n + 1 - r..]) else {
            continue;
        };
        terms.push(body + tail);
    }
    if terms.is_empty() {
        return Err(LabError::Precondition("no word in the set extends".into()));
    }
    Ok(log_sum_exp(terms))
}

/// Dynamic program over (automaton state, last `r − 1` symbols) with
/// per-step renormalization.
fn pattern_log_sum(space: &ShiftSpace, table: &LocalTable, pattern: &[Option<Symbol>]) -> Result<f64> {
    let k = space.alphabet();
    let r = table.range();
    let a = space.automaton();
    let tails = k.pow((r - 1) as u32);
    let states = a.num_states();
    let mut weight = vec![0.0f64; states * tails];
    weight[a.start() * tails] = 1.0;
    let mut log_scale = 0.0f64;
    for (i, slot) in pattern.iter().enumerate() {
        let mut next = vec![0.0f64; states * tails];
        for s in 0..states {
            for tail in 0..tails {
                let w = weight[s * tails + tail];
                if w == 0.0 {
                    continue;
                }
                let symbols: Vec<Symbol> = match slot {
                    Some(sym) => vec![*sym],
                    None => (0..k as Symbol).collect(),
                };
                for sym in symbols {
                    let Some(t) = a.step(s, sym) else { continue };
                    let code = tail * k + sym as usize;
                    let factor = if i + 1 >= r {
                        table.values()[code % (tails * k)].exp()
                    } else {
                        1.0
                    };
                    next[t * tails + code % tails] += w * factor;
                }
            }
        }
        let norm = next.iter().copied().fold(0.0, f64::max);
        if norm == 0.0 {
            return Err(LabError::Precondition("word set is empty".into()));
        }
        for x in &mut next {
            *x /= norm;
        }
        log_scale += norm.ln();
        weight = next;
    }
    let mut total = 0.0;
    for s in 0..states {
        for tail in 0..tails {
            let w = weight[s * tails + tail];
            if w == 0.0 {
                continue;
            }
            let tail_word = Word::from_index(tail, r - 1, k);
            if let Some(extra) = tail_sup(space, table, s, tail_word.as_slice()) {
                total += w * extra.exp();
            }
        }
    }
    if total == 0.0 {
        return Err(LabError::Precondition("no word in the set extends".into()));
    }
    Ok(log_scale + total.ln())
}

/// `(1/n)·ln` of a greedy maximal set of admissible `n`-words pairwise
/// differing in at least `⌈δn⌉` positions, scanned in lexicographic order.
pub fn separated_entropy_estimate(space: &ShiftSpace, n: usize, delta: f64) -> Result<(usize, f64)> {
    if n == 0 || n > SEPARATED_MAX_N {
        return Err(LabError::Precondition(format!("n must lie in 1..={SEPARATED_MAX_N}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::Precondition("delta must lie in (0, 1)".into()));
    }
    let threshold = ((delta * n as f64) - 1e-9).ceil() as usize;
    let mut chosen: Vec<Vec<Symbol>> = Vec::new();
    for w in space.enumerate_words(n) {
        let s = w.as_slice();
        if chosen
            .iter()
            .all(|c| c.iter().zip(s).filter(|(a, b)| a != b).count() >= threshold)
        {
            chosen.push(s.to_vec());
        }
    }
    let count = chosen.len();
    Ok((count, (count as f64).ln() / n as f64))
}

/// The set whose BS-dimension is computed.
#[derive(Clone, Debug, PartialEq)]
pub enum BsTarget {
    Whole,
    /// Fixed-`n` cylinder estimate over a word set.
    Cylinder { set: WordSet, n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BsResult {
    pub value: f64,
    pub bracket: (f64, f64),
    /// `P(−s*φ)` at the returned root.
    pub residual: f64,
    pub method: PressureMethod,
    pub n: Option<usize>,
}

fn pressure_for(space: &ShiftSpace, target: &BsTarget, phi: &Observable) -> Result<PressureResult> {
    match target {
        BsTarget::Whole => transfer_pressure(space, phi),
        BsTarget::Cylinder { set, n } => cylinder_pressure_estimate(space, set, phi, *n),
    }
}

/// Root of Bowen's equation `P(−sφ) = 0` by bisection on `[0, P(0)/min φ]`.
pub fn bs_dimension(space: &ShiftSpace, target: &BsTarget, phi: &Observable, tol: f64) -> Result<BsResult> {
    let table = potential_table(phi)?;
    let (min, _) = Observable::LocallyConstant(table.clone()).bounds();
    if !(min > 0.0) {
        return Err(LabError::Precondition("potential must be strictly positive".into()));
    }
    if !(tol > 0.0) {
        return Err(LabError::Precondition("tolerance must be positive".into()));
    }
    let base = Observable::LocallyConstant(table.clone());
    let at = |s: f64| -> Result<f64> { Ok(pressure_for(space, target, &base.affine(-s, 0.0)?)?.value) };
    let zero = Observable::constant(space.alphabet(), 0.0)?;
    let p0 = pressure_for(space, target, &zero)?.value;
    let (mut lo, mut hi) = (0.0f64, p0.max(0.0) / min);
    let (f_lo, f_hi) = (at(lo)?, at(hi)?);
    if f_lo < -1e-12 || f_hi > 1e-12 {
        return Err(LabError::Numerical(format!(
            "pressure is not decreasing through zero on the bracket ({f_lo}, {f_hi})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    let method = match target {
        BsTarget::Whole => PressureMethod::TransferExact,
        BsTarget::Cylinder { .. } => PressureMethod::CylinderEstimate,
    };
    let n = match target {
        BsTarget::Cylinder { n, .. } => Some(*n),
        BsTarget::Whole => None,
    };
    Ok(BsResult {
        value,
        bracket: (0.0, p0.max(0.0) / min),
        residual: at(value)?,
        method,
        n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaEntropyRow {
    pub n: usize,
    pub estimate: f64,
    pub error: f64,
    /// `estimate / ln β`.
    pub hausdorff: f64,
}

/// `(1/n)·ln` of the number of admissible words of the β-shift.
pub fn beta_entropy_estimate(beta: &BetaNumber, n_list: &[usize]) -> Result<Vec<BetaEntropyRow>> {
    let depth = n_list.iter().copied().max().unwrap_or(1).max(1);
    let space = ShiftSpace::beta(beta.clone(), depth)?;
    let ln_beta = beta.to_f64().ln();
    n_list
        .iter()
        .map(|&n| {
            let estimate = ln_biguint(&space.count_words(n)?) / n as f64;
            Ok(BetaEntropyRow {
                n,
                estimate,
                error: (estimate - ln_beta).abs(),
                hausdorff: estimate / ln_beta,
            })
        })
        .collect()
}
