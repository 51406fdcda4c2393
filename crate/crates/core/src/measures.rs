//! Computable invariant measures: periodic orbits, Markov chains (of any
//! block order), Bernoulli products and finite mixtures. Cylinder
//! probabilities, integrals of locally constant observables and entropy are
//! all exact up to floating-point rounding.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::circle;
use crate::error::{LabError, Result};
use crate::observables::Observable;
use crate::symbolic::{word_index, ShiftSpace, Symbol, Word};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-12;
/// Largest chain solved in exact rational arithmetic.
const EXACT_SOLVE_LIMIT: usize = 16;

/// Markov chain on admissible blocks of length `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    order: usize,
    states: Vec<Word>,
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    index: Vec<Option<usize>>,
}

impl MarkovChain {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub(crate) fn state_of(&self, block: &[Symbol], k: usize) -> Option<usize> {
        self.index[word_index(block, k)]
    }

    /// `‖pP − p‖∞`.
    pub fn stationarity_residual(&self) -> f64 {
        let n = self.states.len();
        (0..n)
            .map(|j| {
                let v: f64 = (0..n).map(|i| self.stationary[i] * self.transition[i][j]).sum();
                (v - self.stationary[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    Periodic { cycle: Word },
    Markov(MarkovChain),
    Bernoulli { weights: Vec<f64> },
    Mixture { components: Vec<(f64, MeasureModel)> },
}

/// Invariant measure with exact cylinder probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureModel {
    k: usize,
    kind: MeasureKind,
}

/// Periodic measure equidistributed on the orbit of `cycle^∞`.
pub fn periodic_measure(space: &ShiftSpace, cycle: Word) -> Result<MeasureModel> {
    if cycle.is_empty() {
        return Err(LabError::InvalidMeasure("empty cycle".into()));
    }
    cycle.check_alphabet(space.alphabet())?;
    if !space.is_cyclically_admissible(cycle.as_slice()) {
        return Err(LabError::Inadmissible(format!("({cycle})^∞")));
    }
    Ok(MeasureModel {
        k: space.alphabet(),
        kind: MeasureKind::Periodic { cycle },
    })
}

/// First-order Markov measure for the `k × k` stochastic matrix `p`.
pub fn markov_measure(space: &ShiftSpace, p: Vec<Vec<f64>>) -> Result<MeasureModel> {
    markov_block_measure(space, 1, p)
}

/// Markov measure on admissible blocks of length `order`, listed in
/// lexicographic order; `p` is indexed by those blocks.
pub fn markov_block_measure(space: &ShiftSpace, order: usize, p: Vec<Vec<f64>>) -> Result<MeasureModel> {
    if order == 0 {
        return Err(LabError::InvalidMeasure("order must be ≥ 1".into()));
    }
    if !space.is_markov() {
        return Err(LabError::Unsupported("Markov measures on β-shifts".into()));
    }
    let k = space.alphabet();
    let states = space.enumerate_words(order);
    let n = states.len();
    if p.len() != n || p.iter().any(|row| row.len() != n) {
        return Err(LabError::InvalidMeasure(format!(
            "transition matrix must be {n}×{n} over admissible blocks of length {order}"
        )));
    }
    let mut index = vec![None; k.pow(order as u32)];
    for (i, s) in states.iter().enumerate() {
        index[s.index(k)] = Some(i);
    }
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(LabError::InvalidMeasure(format!("row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(LabError::InvalidMeasure(format!("row {i} sums to {sum}")));
        }
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 && !block_step_allowed(space, &states[i], &states[j]) {
                return Err(LabError::InvalidMeasure(format!(
                    "transition {} → {} is not allowed by the space",
                    states[i], states[j]
                )));
            }
        }
    }
    if !is_irreducible(&p) {
        return Err(LabError::InvalidMeasure("transition matrix is reducible".into()));
    }
    let stationary = solve_stationary(&p)?;
    let chain = MarkovChain {
        order,
        states,
        transition: p,
        stationary,
        index,
    };
    let residual = chain.stationarity_residual();
    if residual > STATIONARY_TOL {
        return Err(LabError::Numerical(format!("stationarity residual {residual:e}")));
    }
    Ok(MeasureModel {
        k,
        kind: MeasureKind::Markov(chain),
    })
}

fn block_step_allowed(space: &ShiftSpace, u: &Word, v: &Word) -> bool {
    let (u, v) = (u.as_slice(), v.as_slice());
    if u[1..] != v[..v.len() - 1] {
        return false;
    }
    let mut w = u.to_vec();
    w.push(v[v.len() - 1]);
    space.is_admissible(&w)
}

/// Bernoulli product measure. Every word made of positive-weight symbols must
/// be admissible.
pub fn bernoulli_measure(space: &ShiftSpace, weights: Vec<f64>) -> Result<MeasureModel> {
    let k = space.alphabet();
    if weights.len() != k {
        return Err(LabError::InvalidMeasure(format!("expected {k} weights")));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(LabError::InvalidMeasure("weights must be nonnegative".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(LabError::InvalidMeasure(format!("weights sum to {sum}")));
    }
    let support: Vec<Symbol> = (0..k as Symbol).filter(|&s| weights[s as usize] > 0.0).collect();
    let compatible = match space.kind() {
        crate::symbolic::SpaceKind::Beta { .. } => support == [0],
        _ => support.iter().all(|&a| support.iter().all(|&b| space.allows(a, b))),
    };
    if !compatible {
        return Err(LabError::InvalidMeasure("Bernoulli support is not a full subshift of the space".into()));
    }
    Ok(MeasureModel {
        k,
        kind: MeasureKind::Bernoulli { weights },
    })
}

/// Convex combination. Structurally equal components are merged.
pub fn mixture(components: Vec<(f64, MeasureModel)>) -> Result<MeasureModel> {
    let first = components
        .first()
        .ok_or_else(|| LabError::InvalidMeasure("empty mixture".into()))?;
    let k = first.1.k;
    if components.iter().any(|(w, m)| !(*w > 0.0) || m.k != k) {
        return Err(LabError::InvalidMeasure("mixture weights must be positive over one alphabet".into()));
    }
    let sum: f64 = components.iter().map(|c| c.0).sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(LabError::InvalidMeasure(format!("mixture weights sum to {sum}")));
    }
    let mut merged: Vec<(f64, MeasureModel)> = Vec::new();
    for (w, m) in components {
        match merged.iter_mut().find(|(_, existing)| *existing == m) {
            Some(slot) => slot.0 += w,
            None => merged.push((w, m)),
        }
    }
    if merged.len() == 1 {
        return Ok(merged.pop().expect("one component").1);
    }
    Ok(MeasureModel {
        k,
        kind: MeasureKind::Mixture { components: merged },
    })
}

impl MeasureModel {
    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Exact probability of the cylinder `[w]`.
    pub fn cylinder_prob(&self, w: &[Symbol]) -> f64 {
        match &self.kind {
            MeasureKind::Periodic { cycle } => {
                let c = cycle.as_slice();
                let hits = (0..c.len())
                    .filter(|&r| w.iter().enumerate().all(|(i, &s)| c[(r + i) % c.len()] == s))
                    .count();
                hits as f64 / c.len() as f64
            }
            MeasureKind::Bernoulli { weights } => w.iter().map(|&s| weights[s as usize]).product(),
            MeasureKind::Markov(chain) => {
                let m = chain.order;
                if w.len() < m {
                    return chain
                        .states
                        .iter()
                        .zip(&chain.stationary)
                        .filter(|(s, _)| s.as_slice().starts_with(w))
                        .map(|(_, p)| p)
                        .sum();
                }
                let Some(mut state) = chain.state_of(&w[..m], self.k) else {
                    return 0.0;
                };
                let mut prob = chain.stationary[state];
                for i in 1..=w.len() - m {
                    let Some(next) = chain.state_of(&w[i..i + m], self.k) else {
                        return 0.0;
                    };
                    prob *= chain.transition[state][next];
                    if prob == 0.0 {
                        return 0.0;
                    }
                    state = next;
                }
                prob
            }
            MeasureKind::Mixture { components } => {
                components.iter().map(|(wt, m)| wt * m.cylinder_prob(w)).sum()
            }
        }
    }

    pub fn cylinder_distribution(&self, depth: usize) -> CylinderDistribution {
        let size = self.k.pow(depth as u32);
        let probs = (0..size)
            .map(|i| self.cylinder_prob(Word::from_index(i, depth, self.k).as_slice()))
            .collect();
        CylinderDistribution {
            k: self.k,
            depth,
            probs,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, MeasureKind::Periodic { .. })
    }

    /// Whether generic words for this measure can be produced without sampling.
    pub fn is_deterministic(&self) -> bool {
        match &self.kind {
            MeasureKind::Periodic { .. } => true,
            MeasureKind::Mixture { components } => components.iter().all(|(_, m)| m.is_deterministic()),
            _ => false,
        }
    }
}

/// Exact integral `∫ φ dμ`.
pub fn integrate(mu: &MeasureModel, phi: &Observable) -> Result<f64> {
    match phi {
        Observable::Trig { kind, frequency } => match &mu.kind {
            MeasureKind::Periodic { cycle } => {
                if mu.k != 2 {
                    return Err(LabError::Unsupported("trigonometric observables need the binary shift".into()));
                }
                circle::cycle_trig_average(cycle.as_slice(), *kind, *frequency)
            }
            MeasureKind::Mixture { components } => components
                .iter()
                .map(|(w, m)| integrate(m, phi).map(|v| w * v))
                .sum(),
            _ => Err(LabError::Unsupported(
                "trigonometric observables integrate only against periodic measures and their mixtures".into(),
            )),
        },
        _ => {
            let table = phi.table()?;
            if table.alphabet() != mu.k {
                return Err(LabError::Unsupported("observable and measure use different alphabets".into()));
            }
            let dist = mu.cylinder_distribution(table.range());
            Ok(neumaier_sum(
                dist.probs.iter().zip(table.values()).map(|(p, v)| if *p == 0.0 { 0.0 } else { p * v }),
            ))
        }
    }
}

/// Metric entropy in nats.
pub fn entropy_rate(mu: &MeasureModel) -> f64 {
    match &mu.kind {
        MeasureKind::Periodic { .. } => 0.0,
        MeasureKind::Bernoulli { weights } => -weights.iter().map(|&w| xlogx(w)).sum::<f64>(),
        MeasureKind::Markov(chain) => {
            let mut h = 0.0;
            for (p, row) in chain.stationary.iter().zip(&chain.transition) {
                h -= p * row.iter().map(|&x| xlogx(x)).sum::<f64>();
            }
            h
        }
        MeasureKind::Mixture { components } => components.iter().map(|(w, m)| w * entropy_rate(m)).sum(),
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
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

fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward { p[i][j] } else { p[j][i] };
                if edge > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|b| b)
    };
    n > 0 && reach(true) && reach(false)
}

/// Solves `p·(P − I) = 0`, `Σp = 1`.
fn solve_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    if n <= EXACT_SOLVE_LIMIT {
        solve_stationary_exact(p)
    } else {
        solve_stationary_float(p)
    }
}

/// System rows are the columns of `Pᵀ − I`, with the last equation replaced
/// by normalization.
fn stationary_system<T: Clone>(p: &[Vec<f64>], conv: impl Fn(f64) -> T, one: T, zero: T, sub: impl Fn(T, T) -> T) -> Vec<Vec<T>> {
    let n = p.len();
    let mut a = vec![vec![zero.clone(); n + 1]; n];
    for (j, row) in a.iter_mut().enumerate().take(n - 1) {
        for i in 0..n {
            let mut v = conv(p[i][j]);
            if i == j {
                v = sub(v, one.clone());
            }
            row[i] = v;
        }
    }
    for i in 0..n {
        a[n - 1][i] = one.clone();
    }
    a[n - 1][n] = one;
    a
}

fn solve_stationary_exact(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let conv = |x: f64| BigRational::from_float(x).expect("finite entries");
    let one = BigRational::from_integer(BigInt::from(1));
    let mut a = stationary_system(p, conv, one, BigRational::zero(), |x, y| x - y);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| LabError::Numerical("singular stationary system".into()))?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &a[col][c];
                    a[r][c] = &a[r][c] - delta;
                }
            }
        }
    }
    let out: Vec<f64> = a
        .iter()
        .map(|row| row[n].abs().to_f64().unwrap_or(f64::NAN) * if row[n].is_negative() { -1.0 } else { 1.0 })
        .collect();
    Ok(out)
}

fn solve_stationary_float(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = stationary_system(p, |x| x, 1.0, 0.0, |x, y| x - y);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(LabError::Numerical("singular stationary system".into()));
        }
        a.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Ok(x)
}

/// Frequencies of depth-`d` words, stored densely by base-k index.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderDistribution {
    k: usize,
    depth: usize,
    probs: Vec<f64>,
}

impl CylinderDistribution {
    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, w: &[Symbol]) -> f64 {
        if w.len() != self.depth {
            return 0.0;
        }
        self.probs[word_index(w, self.k)]
    }

    /// Nonzero frequencies keyed by word.
    pub fn frequencies(&self) -> BTreeMap<Word, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (Word::from_index(i, self.depth, self.k), p))
            .collect()
    }

    /// Marginal on the first `depth` symbols.
    pub fn marginal(&self, depth: usize) -> Result<CylinderDistribution> {
        if depth > self.depth {
            return Err(LabError::Precondition(format!(
                "cannot refine a depth-{} distribution to depth {depth}",
                self.depth
            )));
        }
        let block = self.k.pow((self.depth - depth) as u32);
        let probs = self.probs.chunks(block).map(|c| c.iter().sum()).collect();
        Ok(CylinderDistribution {
            k: self.k,
            depth,
            probs,
        })
    }

    /// Total variation distance `½ Σ |a[w] − b[w]|`.
    pub fn total_variation(&self, other: &CylinderDistribution) -> f64 {
        debug_assert_eq!(self.probs.len(), other.probs.len());
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// Sliding-window frequencies over the `|w| − d + 1` windows of `w`.
pub fn empirical_distribution(w: &[Symbol], depth: usize, k: usize) -> Result<CylinderDistribution> {
    if depth == 0 || w.len() < depth {
        return Err(LabError::Precondition(format!(
            "word of length {} is shorter than depth {depth}",
            w.len()
        )));
    }
    let size = k.pow(depth as u32);
    let mut counts = vec![0u64; size];
    let mut code = word_index(&w[..depth - 1], k);
    for &s in &w[depth - 1..] {
        code = (code * k + s as usize) % size;
        counts[code] += 1;
    }
    let total = (w.len() - depth + 1) as f64;
    Ok(CylinderDistribution {
        k,
        depth,
        probs: counts.into_iter().map(|c| c as f64 / total).collect(),
    })
}

/// Anything that yields cylinder distributions at depths `1..=D`.
pub trait CylinderSource {
    fn alphabet(&self) -> usize;
    fn distribution_at(&self, depth: usize) -> Result<CylinderDistribution>;
}

impl CylinderSource for MeasureModel {
    fn alphabet(&self) -> usize {
        self.k
    }

    fn distribution_at(&self, depth: usize) -> Result<CylinderDistribution> {
        Ok(self.cylinder_distribution(depth))
    }
}

impl CylinderSource for CylinderDistribution {
    fn alphabet(&self) -> usize {
        self.k
    }

    fn distribution_at(&self, depth: usize) -> Result<CylinderDistribution> {
        self.marginal(depth)
    }
}

/// A finite word seen through its sliding-window frequencies.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalWord<'a> {
    pub symbols: &'a [Symbol],
    pub k: usize,
}

impl CylinderSource for EmpiricalWord<'_> {
    fn alphabet(&self) -> usize {
        self.k
    }

    fn distribution_at(&self, depth: usize) -> Result<CylinderDistribution> {
        empirical_distribution(self.symbols, depth, self.k)
    }
}

/// Default truncation depth of the weak* proxy.
pub const DEFAULT_WEAKSTAR_DEPTH: usize = 8;

/// `Σ_{m=1}^{D} 2^(−m) · ½ Σ_{|w|=m} |a[w] − b[w]|`.
pub fn weakstar_distance(a: &dyn CylinderSource, b: &dyn CylinderSource, depth: usize) -> Result<f64> {
    if a.alphabet() != b.alphabet() {
        return Err(LabError::Unsupported("distance across alphabets".into()));
    }
    let mut total = 0.0;
    for m in 1..=depth {
        let da = a.distribution_at(m)?;
        let db = b.distribution_at(m)?;
        total += 0.5f64.powi(m as i32) * da.total_variation(&db);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full2() -> ShiftSpace {
        ShiftSpace::full(2).unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn indicator_one() -> Observable {
        Observable::locally_constant(2, 1, vec![0.0, 1.0]).unwrap()
    }

    fn indicator_equal() -> Observable {
        Observable::locally_constant(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn periodic_examples() {
        let mu = periodic_measure(&full2(), w("01")).unwrap();
        assert_eq!(mu.cylinder_distribution(1).probabilities(), &[0.5, 0.5]);
        let mu = periodic_measure(&full2(), w("001")).unwrap();
        let d = mu.cylinder_distribution(1);
        assert!((d.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.probabilities()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(periodic_measure(&ShiftSpace::golden_mean(), w("11")).is_err());
        assert!(periodic_measure(&full2(), Word::empty()).is_err());
    }

    #[test]
    fn markov_examples() {
        let mu = markov_measure(&full2(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let MeasureKind::Markov(chain) = mu.kind() else { panic!() };
        assert_eq!(chain.stationary(), &[0.5, 0.5]);

        let golden = ShiftSpace::golden_mean();
        let mu = markov_measure(&golden, vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let MeasureKind::Markov(chain) = mu.kind() else { panic!() };
        assert!((chain.stationary()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((chain.stationary()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(chain.stationarity_residual() <= 1e-12);

        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let parry = markov_measure(&golden, vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]]).unwrap();
        assert!((entropy_rate(&parry) - g.ln()).abs() < 1e-12);
    }

    #[test]
    fn markov_errors() {
        let golden = ShiftSpace::golden_mean();
        // puts mass on 1 → 1
        assert!(markov_measure(&golden, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        // reducible
        assert!(markov_measure(&full2(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        // not stochastic
        assert!(markov_measure(&full2(), vec![vec![0.6, 0.6], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn integrate_examples() {
        let bern = bernoulli_measure(&full2(), vec![0.5, 0.5]).unwrap();
        assert_eq!(integrate(&bern, &indicator_one()).unwrap(), 0.5);
        let per = periodic_measure(&full2(), w("001")).unwrap();
        assert!((integrate(&per, &indicator_one()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let golden = ShiftSpace::golden_mean();
        let mu = markov_measure(&golden, vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!((integrate(&mu, &indicator_equal()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let b = bernoulli_measure(&full2(), vec![0.5, 0.5]).unwrap();
        assert!((entropy_rate(&b) - 2f64.ln()).abs() < 1e-15);
        let b = bernoulli_measure(&full2(), vec![0.25, 0.75]).unwrap();
        assert!((entropy_rate(&b) - 0.562335).abs() < 1e-6);
        assert_eq!(entropy_rate(&periodic_measure(&full2(), w("0110")).unwrap()), 0.0);
        let mix = mixture(vec![(0.5, b.clone()), (0.5, periodic_measure(&full2(), w("0")).unwrap())]).unwrap();
        assert!((entropy_rate(&mix) - 0.5 * entropy_rate(&b)).abs() < 1e-15);
    }

    #[test]
    fn empirical_examples() {
        let x = w("0101010101");
        let d1 = empirical_distribution(x.as_slice(), 1, 2).unwrap();
        assert_eq!(d1.probabilities(), &[0.5, 0.5]);
        let d2 = empirical_distribution(x.as_slice(), 2, 2).unwrap();
        let f = d2.frequencies();
        assert_eq!(f.len(), 2);
        assert!((f[&w("01")] - 5.0 / 9.0).abs() < 1e-15);
        assert!((f[&w("10")] - 4.0 / 9.0).abs() < 1e-15);
        let z = empirical_distribution(w("0000").as_slice(), 2, 2).unwrap();
        assert_eq!(z.frequencies().into_iter().collect::<Vec<_>>(), vec![(w("00"), 1.0)]);
        assert!(empirical_distribution(w("01").as_slice(), 3, 2).is_err());
    }

    #[test]
    fn weakstar_examples() {
        let f = full2();
        let d0 = periodic_measure(&f, w("0")).unwrap();
        let d1 = periodic_measure(&f, w("1")).unwrap();
        assert_eq!(weakstar_distance(&d0, &d0, 8).unwrap(), 0.0);
        assert_eq!(weakstar_distance(&d0, &d1, 1).unwrap(), 0.5);
    }

    #[test]
    fn mixture_merges_equal_components() {
        let f = full2();
        let d0 = periodic_measure(&f, w("0")).unwrap();
        let m = mixture(vec![(0.3, d0.clone()), (0.7, d0.clone())]).unwrap();
        assert_eq!(m, d0);
        assert!(mixture(vec![(0.3, d0.clone())]).is_err());
    }

    #[test]
    fn bernoulli_support_must_fit() {
        let golden = ShiftSpace::golden_mean();
        assert!(bernoulli_measure(&golden, vec![0.5, 0.5]).is_err());
        assert!(bernoulli_measure(&golden, vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn large_chain_uses_float_solver() {
        let k = 5;
        let space = ShiftSpace::full(k).unwrap();
        // order-2 chain: 25 states, beyond the exact limit
        let states = space.enumerate_words(2);
        let n = states.len();
        let mut p = vec![vec![0.0; n]; n];
        for (i, s) in states.iter().enumerate() {
            let succ: Vec<usize> = (0..n)
                .filter(|&j| states[j].as_slice()[0] == s.as_slice()[1])
                .collect();
            for (r, &j) in succ.iter().enumerate() {
                p[i][j] = (r + 1) as f64 / 15.0;
            }
        }
        let mu = markov_block_measure(&space, 2, p).unwrap();
        let MeasureKind::Markov(chain) = mu.kind() else { panic!() };
        assert!(chain.stationarity_residual() <= 1e-12);
        let total: f64 = mu.cylinder_distribution(3).probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
