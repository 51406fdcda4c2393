//! Point construction by gluing generic orbit segments with bridging words.
//!
//! Every builder produces a [`GluePlan`]: the materialized symbols together
//! with per-block records (target, achieved deviation, tolerance, history
//! overhead), so tests can check convergence claims without slack guessing.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::measures::{
    empirical_distribution, integrate, mixture, weakstar_distance, CylinderDistribution, MeasureKind,
    MeasureModel,
};
use crate::observables::{averages_on, certificate_from_averages, Certificate, CheckpointPlan, Observable, DEFAULT_TOL};
use crate::symbolic::{ShiftSpace, SpaceKind, Symbol, SymbolSource, SymbolicPoint, Word};

/// Rule producing the next block length from the last length `l_j` and the
/// total length `S_j` so far.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Growth {
    /// `l_{j+1} = max(2 l_j, j · S_j)`.
    Dominating,
    /// `l_{j+1} = max(2 l_j, ⌈c · S_j⌉)`.
    Proportional(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSchedule {
    pub initial_length: usize,
    pub growth: Growth,
    pub tol_start: f64,
    pub tol_decay: f64,
    pub tol_floor: f64,
    /// Cylinder depth at which segment deviations are measured.
    pub depth: usize,
    /// Total number of symbols to materialize.
    pub horizon: usize,
    pub close_periodic: bool,
    pub max_retries: usize,
}

impl BlockSchedule {
    pub fn new(initial_length: usize, horizon: usize) -> Self {
        BlockSchedule {
            initial_length,
            growth: Growth::Dominating,
            tol_start: 0.05,
            tol_decay: 0.9,
            tol_floor: 0.005,
            depth: 8,
            horizon,
            close_periodic: false,
            max_retries: 20,
        }
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    /// `max(tol_start · tol_decay^j, tol_floor)`.
    pub fn tol(&self, j: usize) -> f64 {
        (self.tol_start * self.tol_decay.powi(j as i32)).max(self.tol_floor)
    }

    fn next_length(&self, j: usize, last: usize, total: usize) -> usize {
        let grown = match self.growth {
            Growth::Dominating => j * total,
            Growth::Proportional(c) => (c * total as f64).ceil() as usize,
        };
        (2 * last).max(grown)
    }

    fn validate(&self) -> Result<()> {
        if self.initial_length == 0 || self.depth == 0 || self.initial_length < self.depth {
            return Err(LabError::Precondition(
                "initial block length must be positive and at least the depth".into(),
            ));
        }
        if self.horizon < self.initial_length {
            return Err(LabError::Precondition(format!(
                "horizon {} is shorter than the first block {}",
                self.horizon, self.initial_length
            )));
        }
        if let Growth::Proportional(c) = self.growth {
            if !(c > 0.0) {
                return Err(LabError::Precondition("growth factor must be positive".into()));
            }
        }
        if !(self.tol_start > 0.0 && self.tol_floor > 0.0 && self.tol_decay > 0.0 && self.tol_decay <= 1.0) {
            return Err(LabError::Precondition("tolerances must be positive and nonincreasing".into()));
        }
        Ok(())
    }
}

/// Seeded stream for block `block`, attempt `attempt`.
pub fn segment_rng(seed: u64, block: usize, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((block as u64) * 64 + attempt as u64);
    rng
}

/// Largest admissible gap tried when bridging.
pub fn bridge_budget(space: &ShiftSpace) -> usize {
    match (space.mixing_gap(), space.kind()) {
        (Some(g), _) => g,
        (None, SpaceKind::Beta { kneading, .. }) => kneading.digits.len() + 1,
        (None, _) => space.alphabet() * space.alphabet(),
    }
}

/// Split of `n` proportional to `weights` by largest remainders.
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut out: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for i in order {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}

/// Unchecked seeded sample of length `n` from the model.
fn sample_word(space: &ShiftSpace, mu: &MeasureModel, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Symbol>> {
    let mut out = Vec::with_capacity(n);
    match mu.kind() {
        MeasureKind::Periodic { cycle } => {
            out.extend(cycle.as_slice().iter().copied().cycle().take(n));
        }
        MeasureKind::Bernoulli { weights } => {
            let dist = WeightedIndex::new(weights).map_err(|e| LabError::InvalidMeasure(e.to_string()))?;
            out.extend((0..n).map(|_| dist.sample(rng) as Symbol));
        }
        MeasureKind::Markov(chain) => {
            let start = WeightedIndex::new(chain.stationary()).map_err(|e| LabError::InvalidMeasure(e.to_string()))?;
            let rows = chain
                .transition()
                .iter()
                .map(|r| WeightedIndex::new(r).map_err(|e| LabError::InvalidMeasure(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let mut state = start.sample(rng);
            out.extend(chain.states()[state].as_slice().iter().take(n));
            while out.len() < n {
                state = rows[state].sample(rng);
                let s = chain.states()[state].as_slice();
                out.push(s[s.len() - 1]);
            }
        }
        MeasureKind::Mixture { components } => {
            let weights: Vec<f64> = components.iter().map(|c| c.0).collect();
            let budget = bridge_budget(space);
            for ((_, m), len) in components.iter().zip(apportion(n, &weights)) {
                if len == 0 {
                    continue;
                }
                let sub = sample_word(space, m, len, rng)?;
                if !out.is_empty() {
                    let b = space.bridge(&out, &sub, budget)?;
                    out.extend_from_slice(b.as_slice());
                }
                out.extend_from_slice(&sub);
            }
            out.truncate(n);
        }
    }
    Ok(out)
}

/// Target cylinder distributions at depths `1..=d`.
fn target_distributions(mu: &MeasureModel, depth: usize) -> Vec<CylinderDistribution> {
    (1..=depth).map(|m| mu.cylinder_distribution(m)).collect()
}

/// Depth-`d` weak* deviation of the empirical measure of `w` from the targets.
fn deviation(w: &[Symbol], k: usize, targets: &[CylinderDistribution]) -> Result<f64> {
    let mut total = 0.0;
    for (m, t) in targets.iter().enumerate() {
        let e = empirical_distribution(w, m + 1, k)?;
        total += 0.5f64.powi(m as i32 + 1) * e.total_variation(t);
    }
    Ok(total)
}

/// A sampled word with its certified deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub word: Word,
    pub deviation: f64,
    pub attempts: usize,
}

/// Admissible word of length `n` whose empirical measure is within `tol` of
/// `mu` in the depth-`depth` weak* distance.
pub fn generic_segment(
    space: &ShiftSpace,
    mu: &MeasureModel,
    n: usize,
    depth: usize,
    tol: f64,
    seed: u64,
) -> Result<Segment> {
    generic_segment_in_block(space, mu, n, depth, tol, seed, 0, 20)
}

#[allow(clippy::too_many_arguments)]
fn generic_segment_in_block(
    space: &ShiftSpace,
    mu: &MeasureModel,
    n: usize,
    depth: usize,
    tol: f64,
    seed: u64,
    block: usize,
    max_retries: usize,
) -> Result<Segment> {
    if mu.alphabet() != space.alphabet() {
        return Err(LabError::InvalidMeasure("measure and space use different alphabets".into()));
    }
    if n < depth || depth == 0 {
        return Err(LabError::Precondition(format!("segment length {n} is below depth {depth}")));
    }
    let targets = target_distributions(mu, depth);
    let attempts = if mu.is_deterministic() { 1 } else { max_retries.max(1) };
    let mut best = f64::INFINITY;
    for attempt in 0..attempts {
        let mut rng = segment_rng(seed, block, attempt);
        let w = sample_word(space, mu, n, &mut rng)?;
        if !space.is_admissible(&w) {
            return Err(LabError::InvalidMeasure("measure is not supported in the space".into()));
        }
        let dev = deviation(&w, space.alphabet(), &targets)?;
        if dev <= tol {
            return Ok(Segment {
                word: Word::new(w),
                deviation: dev,
                attempts: attempt + 1,
            });
        }
        best = best.min(dev);
    }
    Err(LabError::GenericSegment {
        retries: attempts,
        best,
        tol,
    })
}

/// One block of a glued point.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRecord {
    pub block: usize,
    pub target: usize,
    /// Offset of the segment (after its bridge).
    pub start: usize,
    pub length: usize,
    pub deviation: f64,
    pub tolerance: f64,
    /// Offset just past the segment, i.e. `S_j`.
    pub end: usize,
    /// Bound on how far the history before the segment can move the depth-`d`
    /// empirical measure at `end` away from the segment's own.
    pub overhead_bound: f64,
}

/// The full record of a construction.
#[derive(Debug, Clone)]
pub struct GluePlan {
    k: usize,
    symbols: Vec<Symbol>,
    pub targets: Vec<MeasureModel>,
    pub segments: Vec<SegmentRecord>,
    pub bridges: Vec<Word>,
    pub theta: Option<Vec<f64>>,
    pub close_periodic: bool,
    /// Period of the closed loop when `close_periodic` is set.
    pub period: Option<usize>,
    pub depth: usize,
}

impl SymbolSource for GluePlan {
    fn horizon(&self) -> usize {
        self.symbols.len()
    }

    fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }
}

impl GluePlan {
    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn block_ends(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.end).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alphabet": self.k,
            "length": self.symbols.len(),
            "depth": self.depth,
            "close_periodic": self.close_periodic,
            "period": self.period,
            "theta": self.theta,
            "targets": self.targets.len(),
            "bridges": self.bridges.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            "segments": self.segments.iter().map(|s| json!({
                "block": s.block,
                "target": s.target,
                "start": s.start,
                "length": s.length,
                "end": s.end,
                "deviation": s.deviation,
                "tolerance": s.tolerance,
                "overhead_bound": s.overhead_bound,
            })).collect::<Vec<_>>(),
        })
    }
}

fn overhead_bound(end: usize, length: usize, depth: usize) -> f64 {
    (1..=depth)
        .map(|m| {
            let windows = (end + 1).saturating_sub(m).max(1) as f64;
            0.5f64.powi(m as i32) * ((end - length) as f64 / windows).min(1.0)
        })
        .sum()
}

/// Glues generic segments for the targets `target_of(0), target_of(1), …`
/// until the schedule's horizon is filled.
fn glue(
    space: &ShiftSpace,
    schedule: &BlockSchedule,
    seed: u64,
    theta: Option<Vec<f64>>,
    mut target_of: impl FnMut(usize) -> Result<MeasureModel>,
) -> Result<(SymbolicPoint, Arc<GluePlan>)> {
    schedule.validate()?;
    let k = space.alphabet();
    let budget = bridge_budget(space);
    let automaton = space.automaton();
    let mut symbols: Vec<Symbol> = Vec::with_capacity(schedule.horizon);
    let mut state = automaton.start();
    let mut targets: Vec<MeasureModel> = Vec::new();
    let mut segments = Vec::new();
    let mut bridges = Vec::new();
    let mut last_len = schedule.initial_length;
    let mut j = 0usize;
    while symbols.len() < schedule.horizon {
        let used = symbols.len();
        let remaining = schedule.horizon - used;
        if j > 0 && remaining < schedule.initial_length {
            break;
        }
        let planned = if j == 0 {
            schedule.initial_length
        } else {
            schedule.next_length(j - 1, last_len, used)
        };
        let mut len = planned.min(remaining);
        if remaining - len < schedule.initial_length {
            len = remaining;
        }
        let mu = target_of(j)?;
        let target = match targets.iter().position(|t| *t == mu) {
            Some(t) => t,
            None => {
                targets.push(mu.clone());
                targets.len() - 1
            }
        };
        let tol = schedule.tol(j);
        let mut want = len;
        let (segment, bridge) = loop {
            let seg = generic_segment_in_block(space, &mu, want, schedule.depth, tol, seed, j, schedule.max_retries)?;
            let bridge = space.bridge_from_state(state, seg.word.as_slice(), budget)?;
            if bridge.len() + want <= len || want <= schedule.depth {
                break (seg, bridge);
            }
            want = len.saturating_sub(bridge.len()).max(schedule.depth);
        };
        state = automaton
            .run_from(state, bridge.as_slice())
            .and_then(|s| automaton.run_from(s, segment.word.as_slice()))
            .ok_or_else(|| LabError::Numerical("bridge produced an inadmissible concatenation".into()))?;
        symbols.extend_from_slice(bridge.as_slice());
        let start = symbols.len();
        symbols.extend_from_slice(segment.word.as_slice());
        let end = symbols.len();
        segments.push(SegmentRecord {
            block: j,
            target,
            start,
            length: segment.word.len(),
            deviation: segment.deviation,
            tolerance: tol,
            end,
            overhead_bound: overhead_bound(end, segment.word.len(), schedule.depth),
        });
        bridges.push(bridge);
        last_len = segment.word.len();
        j += 1;
    }
    let mut plan = GluePlan {
        k,
        symbols,
        targets,
        segments,
        bridges,
        theta,
        close_periodic: schedule.close_periodic,
        period: None,
        depth: schedule.depth,
    };
    if schedule.close_periodic {
        let closing = space.bridge_from_state(state, &plan.symbols, budget)?;
        let mut cycle = plan.symbols.clone();
        cycle.extend_from_slice(closing.as_slice());
        let point = SymbolicPoint::periodic(space, Word::empty(), Word::new(cycle))?;
        plan.period = Some(plan.symbols.len() + closing.len());
        plan.bridges.push(closing);
        return Ok((point, Arc::new(plan)));
    }
    let plan = Arc::new(plan);
    let point = SymbolicPoint::scheduled(k, plan.clone());
    Ok((point, plan))
}

/// Point whose empirical measures alternate between `mu1` and `mu2`.
pub fn build_irregular_point(
    space: &ShiftSpace,
    mu1: &MeasureModel,
    mu2: &MeasureModel,
    schedule: &BlockSchedule,
    seed: u64,
) -> Result<(SymbolicPoint, Arc<GluePlan>)> {
    build_irregular_with_theta(space, mu1, mu2, schedule, seed, None)
}

fn build_irregular_with_theta(
    space: &ShiftSpace,
    mu1: &MeasureModel,
    mu2: &MeasureModel,
    schedule: &BlockSchedule,
    seed: u64,
    theta: Option<Vec<f64>>,
) -> Result<(SymbolicPoint, Arc<GluePlan>)> {
    if weakstar_distance(mu1, mu2, 8)? <= 1e-15 {
        return Err(LabError::Precondition("the two measures agree on all cylinders up to depth 8".into()));
    }
    let pair = [mu1.clone(), mu2.clone()];
    glue(space, schedule, seed, theta, |j| Ok(pair[j % 2].clone()))
}

/// How certificates are searched for on constructed points.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateOptions {
    pub plan: CheckpointPlan,
    pub tol: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            plan: CheckpointPlan::BlockEnds,
            tol: DEFAULT_TOL,
        }
    }
}

/// Certificates for each observable along a constructed point.
pub fn certify_plan(
    plan: &GluePlan,
    observables: &[Observable],
    options: &CertificateOptions,
) -> Result<Vec<Option<Certificate>>> {
    let window = observables.iter().map(Observable::window).max().unwrap_or(1);
    let horizon = plan.symbols.len() + 1 - window.min(plan.symbols.len());
    let ends = plan.block_ends();
    let cps = options.plan.resolve(horizon, Some(&ends))?;
    observables
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let averages = averages_on(&plan.symbols, phi, &cps.indices)?;
            certificate_from_averages(i, &cps, &averages, options.tol)
        })
        .collect()
}

/// Output of the jointly-irregular builder.
#[derive(Debug, Clone)]
pub struct JointlyIrregular {
    pub point: SymbolicPoint,
    pub plan: Arc<GluePlan>,
    pub theta: Vec<f64>,
    /// `∫φ_j dμ₁ − ∫φ_j dμ₂` for the two mixtures.
    pub separations: Vec<f64>,
    pub certificates: Vec<Option<Certificate>>,
}

/// Weights `θ` with every `Σ_i θ_i d_{j,i} ≠ 0`, chosen as the best of 100
/// seeded draws of rational `λ ∈ (0,1)^k`.
pub fn avoid_hyperplanes(differences: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
    const DRAWS: usize = 100;
    let k = differences.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(LabError::Precondition("no observables".into()));
    }
    let mut rng = segment_rng(seed, usize::MAX / 64, 63);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..DRAWS {
        let lambda: Vec<u32> = (0..k).map(|_| rng.gen_range(1..1000)).collect();
        let total: u32 = lambda.iter().sum();
        let theta: Vec<f64> = lambda.iter().map(|&l| f64::from(l) / f64::from(total)).collect();
        let margin = differences
            .iter()
            .map(|d| d.iter().zip(&theta).map(|(x, t)| x * t).sum::<f64>().abs())
            .fold(f64::INFINITY, f64::min);
        if margin > 1e-9 && best.as_ref().is_none_or(|b| margin > b.0) {
            best = Some((margin, theta));
        }
    }
    best.map(|b| b.1).ok_or(LabError::HyperplaneAvoidance(DRAWS))
}

/// Point irregular for every observable at once: observable `i` is separated
/// by `pairs[i]`, and the pairs are blended into two mixtures.
pub fn build_jointly_irregular_point(
    space: &ShiftSpace,
    observables: &[Observable],
    pairs: &[(MeasureModel, MeasureModel)],
    schedule: &BlockSchedule,
    seed: u64,
    options: &CertificateOptions,
) -> Result<JointlyIrregular> {
    if observables.is_empty() || observables.len() != pairs.len() {
        return Err(LabError::Precondition("need one witness pair per observable".into()));
    }
    // d[j][i] = ∫φ_j dμ_{1,i} − ∫φ_j dμ_{2,i}
    let mut d = vec![vec![0.0; pairs.len()]; observables.len()];
    for (j, phi) in observables.iter().enumerate() {
        for (i, (a, b)) in pairs.iter().enumerate() {
            d[j][i] = integrate(a, phi)? - integrate(b, phi)?;
        }
        if d[j][j].abs() <= 1e-9 {
            return Err(LabError::Precondition(format!("pair {j} does not separate observable {j}")));
        }
    }
    let theta = avoid_hyperplanes(&d, seed)?;
    let mu1 = mixture(pairs.iter().zip(&theta).map(|((a, _), &t)| (t, a.clone())).collect())?;
    let mu2 = mixture(pairs.iter().zip(&theta).map(|((_, b), &t)| (t, b.clone())).collect())?;
    let separations = observables
        .iter()
        .map(|phi| Ok(integrate(&mu1, phi)? - integrate(&mu2, phi)?))
        .collect::<Result<Vec<f64>>>()?;
    let (point, plan) = build_irregular_with_theta(space, &mu1, &mu2, schedule, seed, Some(theta.clone()))?;
    let certificates = certify_plan(&plan, observables, options)?;
    Ok(JointlyIrregular {
        point,
        plan,
        theta,
        separations,
        certificates,
    })
}

/// Point whose block targets sweep a polyline of measures back and forth,
/// refining the net by halving on every sweep.
pub fn build_saturated_point(
    space: &ShiftSpace,
    vertices: &[MeasureModel],
    schedule: &BlockSchedule,
    seed: u64,
) -> Result<(SymbolicPoint, Arc<GluePlan>)> {
    if vertices.is_empty() {
        return Err(LabError::Precondition("polyline needs at least one vertex".into()));
    }
    let mut queue: VecDeque<MeasureModel> = VecDeque::new();
    let mut sweep = 0u32;
    let mut last: Option<MeasureModel> = None;
    glue(space, schedule, seed, None, |_| {
        while queue.is_empty() {
            let mut net = polyline_net(vertices, sweep)?;
            if sweep % 2 == 1 {
                net.reverse();
            }
            if net.len() > 1 && last.as_ref() == net.first() {
                net.remove(0);
            }
            queue.extend(net);
            sweep += 1;
        }
        let next = queue.pop_front().expect("refilled above");
        last = Some(next.clone());
        Ok(next)
    })
}

/// Points `ν_i + t(ν_{i+1} − ν_i)` with `t ∈ 2^(−s)ℤ ∩ [0,1]` along the polyline.
fn polyline_net(vertices: &[MeasureModel], s: u32) -> Result<Vec<MeasureModel>> {
    let mut out = vec![vertices[0].clone()];
    let steps = 1usize << s.min(20);
    for pair in vertices.windows(2) {
        for i in 1..=steps {
            if i == steps {
                out.push(pair[1].clone());
            } else {
                let t = i as f64 / steps as f64;
                out.push(mixture(vec![(1.0 - t, pair[0].clone()), (t, pair[1].clone())])?);
            }
        }
    }
    Ok(out)
}

/// Point cycling round-robin through `net` with growing blocks, so every net
/// measure is a limit point of its empirical measures.
pub fn build_maximal_oscillation_point(
    space: &ShiftSpace,
    net: &[MeasureModel],
    schedule: &BlockSchedule,
    seed: u64,
) -> Result<(SymbolicPoint, Arc<GluePlan>)> {
    if net.is_empty() {
        return Err(LabError::Precondition("net must be nonempty".into()));
    }
    glue(space, schedule, seed, None, |j| Ok(net[j % net.len()].clone()))
}

/// Layout element of a separated family.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyBlock {
    Fixed(Word),
    /// All admissible fillings of this length compatible with the neighbors.
    Free { length: usize, count: BigUint },
}

/// Family of words of length `n` in which every free block ranges over all
/// admissible fillings. Distinct choices give distinct words, so the family
/// is `(n, cylinder)`-separated.
#[derive(Clone, Debug)]
pub struct SeparatedFamily {
    space: ShiftSpace,
    pub n: usize,
    pub blocks: Vec<FamilyBlock>,
    pub cardinality: BigUint,
}

impl SeparatedFamily {
    /// `(1/n)·ln(cardinality)`.
    pub fn rate(&self) -> f64 {
        ln_biguint(&self.cardinality) / self.n as f64
    }

    /// Per-position pattern: `Some(s)` for fixed symbols, `None` for free ones.
    pub fn pattern(&self) -> Vec<Option<Symbol>> {
        let mut out = Vec::with_capacity(self.n);
        for b in &self.blocks {
            match b {
                FamilyBlock::Fixed(w) => out.extend(w.as_slice().iter().map(|&s| Some(s))),
                FamilyBlock::Free { length, .. } => out.extend(std::iter::repeat(None).take(*length)),
            }
        }
        out
    }

    /// Member number `index` (mixed radix over the free blocks, each filling
    /// in lexicographic order).
    pub fn member(&self, index: &BigUint) -> Result<Word> {
        if index >= &self.cardinality {
            return Err(LabError::Precondition("member index out of range".into()));
        }
        let automaton = self.space.automaton();
        let mut rest = index.clone();
        let mut out: Vec<Symbol> = Vec::with_capacity(self.n);
        for (bi, b) in self.blocks.iter().enumerate() {
            match b {
                FamilyBlock::Fixed(w) => out.extend_from_slice(w.as_slice()),
                FamilyBlock::Free { length, count } => {
                    let choice = &rest % count;
                    rest /= count;
                    let state = automaton
                        .run(&out)
                        .ok_or_else(|| LabError::Numerical("family prefix inadmissible".into()))?;
                    let right = self.right_neighbor(bi);
                    let fill = unrank_filling(&self.space, state, *length, right, &choice)?;
                    out.extend_from_slice(&fill);
                }
            }
        }
        Ok(Word::new(out))
    }

    fn right_neighbor(&self, bi: usize) -> &[Symbol] {
        match self.blocks.get(bi + 1) {
            Some(FamilyBlock::Fixed(w)) => w.as_slice(),
            _ => &[],
        }
    }

    /// Uniformly random member.
    pub fn sample_member(&self, rng: &mut impl Rng) -> Result<Word> {
        let bits = self.cardinality.bits();
        loop {
            let bytes: Vec<u8> = (0..bits.div_ceil(8)).map(|_| rng.gen()).collect();
            let mut x = BigUint::from_bytes_le(&bytes);
            x >>= (bits.div_ceil(8) * 8 - bits) as usize;
            if x < self.cardinality {
                return self.member(&x);
            }
        }
    }
}

/// Natural log of a big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift as usize).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `count[i][s]`: fillings of the last `length − i` free positions from
/// automaton state `s` after which `right` is readable.
fn completion_counts(space: &ShiftSpace, length: usize, right: &[Symbol]) -> Vec<Vec<BigUint>> {
    let a = space.automaton();
    let states = a.num_states();
    let mut counts = vec![vec![BigUint::zero(); states]; length + 1];
    for s in 0..states {
        if a.run_from(s, right).is_some() {
            counts[length][s] = BigUint::one();
        }
    }
    for i in (0..length).rev() {
        for s in 0..states {
            let mut c = BigUint::zero();
            for sym in 0..space.alphabet() as Symbol {
                if let Some(t) = a.step(s, sym) {
                    c += &counts[i + 1][t];
                }
            }
            counts[i][s] = c;
        }
    }
    counts
}

fn unrank_filling(space: &ShiftSpace, state: usize, length: usize, right: &[Symbol], rank: &BigUint) -> Result<Vec<Symbol>> {
    let a = space.automaton();
    let counts = completion_counts(space, length, right);
    let mut rank = rank.clone();
    let mut s = state;
    let mut out = Vec::with_capacity(length);
    for i in 0..length {
        let mut chosen = None;
        for sym in 0..space.alphabet() as Symbol {
            if let Some(t) = a.step(s, sym) {
                let c = &counts[i + 1][t];
                if &rank < c {
                    chosen = Some((sym, t));
                    break;
                }
                rank -= c;
            }
        }
        let (sym, t) = chosen.ok_or_else(|| LabError::Numerical("filling rank out of range".into()))?;
        out.push(sym);
        s = t;
    }
    Ok(out)
}

/// Family alternating `[fixed][free b][fixed][free b]…` over `n` symbols. The
/// fixed blocks are seeded samples of `mu1` and `mu2` in turn, with length
/// `round(b(1 − f)/f)` so that free symbols make up a fraction `f`.
pub fn separated_irregular_family(
    space: &ShiftSpace,
    mu1: &MeasureModel,
    mu2: &MeasureModel,
    n: usize,
    free_fraction: f64,
    block_len: usize,
    seed: u64,
) -> Result<SeparatedFamily> {
    if space.mixing_gap().is_none() {
        return Err(LabError::NotMixing);
    }
    if !space.is_markov() {
        return Err(LabError::Unsupported("separated families on β-shifts".into()));
    }
    if block_len < 20 {
        return Err(LabError::Precondition("free block length must be ≥ 20".into()));
    }
    if !(free_fraction > 0.0 && free_fraction <= 1.0) {
        return Err(LabError::Precondition("free fraction must lie in (0, 1]".into()));
    }
    let fixed_len = ((block_len as f64) * (1.0 - free_fraction) / free_fraction).round();
    let fixed_len = if fixed_len > n as f64 { n } else { fixed_len as usize };
    let measures = [mu1, mu2];
    // layout: fixed, free, fixed, free, …
    let mut layout: Vec<(bool, usize)> = Vec::new();
    let mut used = 0;
    let mut fixed_turn = true;
    if fixed_len == 0 {
        layout.push((false, n));
        used = n;
    }
    while used < n {
        let len = if fixed_turn { fixed_len } else { block_len }.min(n - used);
        layout.push((fixed_turn, len));
        used += len;
        fixed_turn = !fixed_turn;
    }
    let mut blocks: Vec<FamilyBlock> = Vec::with_capacity(layout.len());
    let mut fixed_index = 0usize;
    for (is_fixed, len) in &layout {
        if *is_fixed {
            let mu = measures[fixed_index % 2];
            let mut rng = segment_rng(seed, fixed_index, 0);
            let w = sample_word(space, mu, *len, &mut rng)?;
            if !space.is_admissible(&w) {
                return Err(LabError::InvalidMeasure("measure is not supported in the space".into()));
            }
            blocks.push(FamilyBlock::Fixed(Word::new(w)));
            fixed_index += 1;
        } else {
            blocks.push(FamilyBlock::Free {
                length: *len,
                count: BigUint::zero(),
            });
        }
    }
    // count fillings block by block; with a 1-step space the state after a
    // fixed block does not depend on the filling before it
    let automaton = space.automaton();
    let mut cardinality = BigUint::one();
    let mut state = automaton.start();
    for bi in 0..blocks.len() {
        let right: Vec<Symbol> = match blocks.get(bi + 1) {
            Some(FamilyBlock::Fixed(w)) => w.as_slice().to_vec(),
            _ => Vec::new(),
        };
        match &mut blocks[bi] {
            FamilyBlock::Fixed(w) => {
                state = automaton.run_from(state, w.as_slice()).ok_or_else(|| {
                    LabError::Precondition("fixed blocks cannot be joined without a free block between them".into())
                })?;
            }
            FamilyBlock::Free { length, count } => {
                let counts = completion_counts(space, *length, &right);
                *count = counts[0][state].clone();
                if count.is_zero() {
                    return Err(LabError::Precondition("a free block has no admissible filling".into()));
                }
                cardinality *= &*count;
                // any filling leaves the same state once the next fixed block is read
                let fill = unrank_filling(space, state, *length, &right, &BigUint::zero())?;
                state = automaton.run_from(state, &fill).expect("filling is admissible");
            }
        }
    }
    Ok(SeparatedFamily {
        space: space.clone(),
        n,
        blocks,
        cardinality,
    })
}
