use std::collections::{HashMap, HashSet};

use historic::measures::{bernoulli_measure, integrate, markov_block_measure, periodic_measure, MeasureModel};
use historic::observables::{verify_certificate, CheckpointPlan, Observable};
use historic::symbolic::{ShiftSpace, Word};
use historic::synthesis::{
    avoid_hyperplanes, build_irregular_point, build_jointly_irregular_point, build_maximal_oscillation_point,
    build_saturated_point, certify_plan, segment_rng, separated_irregular_family, BlockSchedule, CertificateOptions,
    FamilyBlock, GluePlan, Growth,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn golden_measures(space: &ShiftSpace) -> (MeasureModel, MeasureModel) {
    let g = golden();
    (
        markov_block_measure(space, 1, vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]]).unwrap(),
        periodic_measure(space, w("01")).unwrap(),
    )
}

/// Cylinder probabilities of every word of length `m`, read off by integrating indicators.
fn cylinder_probabilities(mu: &MeasureModel, k: usize, m: usize) -> Vec<f64> {
    let size = k.pow(m as u32);
    (0..size)
        .map(|i| {
            let mut table = vec![0.0; size];
            table[i] = 1.0;
            integrate(mu, &Observable::locally_constant(k, m, table).unwrap()).unwrap()
        })
        .collect()
}

/// `Σ_{m≤depth} 2^-m TV_m` between the sliding-window frequencies of `symbols` and `mu`.
fn empirical_distance(symbols: &[u8], mu: &MeasureModel, k: usize, depth: usize) -> f64 {
    (1..=depth)
        .map(|m| {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for win in symbols.windows(m) {
                let idx = win.iter().fold(0usize, |a, &s| a * k + s as usize);
                *counts.entry(idx).or_default() += 1;
            }
            let total = (symbols.len() - m + 1) as f64;
            let probs = cylinder_probabilities(mu, k, m);
            let tv: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, p)| (counts.get(&i).copied().unwrap_or(0) as f64 / total - p).abs())
                .sum::<f64>()
                / 2.0;
            0.5f64.powi(m as i32) * tv
        })
        .sum()
}

fn check_block_ends(plan: &GluePlan) {
    let symbols = plan.symbols();
    for seg in &plan.segments {
        let target = &plan.targets[seg.target];
        let d = empirical_distance(&symbols[..seg.end], target, plan.alphabet(), plan.depth);
        assert!(
            d <= seg.deviation + seg.overhead_bound + 1e-12,
            "block {}: {d} > {} + {}",
            seg.block,
            seg.deviation,
            seg.overhead_bound
        );
        assert!(seg.deviation <= seg.tolerance);
    }
}

#[test]
fn identical_inputs_give_identical_points() {
    let space = ShiftSpace::full(2).unwrap();
    let mu1 = bernoulli_measure(&space, vec![0.3, 0.7]).unwrap();
    let mu2 = periodic_measure(&space, w("0")).unwrap();
    let schedule = BlockSchedule::new(100, 1_000_000).with_growth(Growth::Proportional(3.0));
    let (x, a) = build_irregular_point(&space, &mu1, &mu2, &schedule, 9).unwrap();
    let (y, b) = build_irregular_point(&space, &mu1, &mu2, &schedule, 9).unwrap();
    assert_eq!(a.symbols(), b.symbols());
    assert_eq!(a.to_json(), b.to_json());
    let first = x.materialize_prefix(1_000_000).unwrap();
    assert_eq!(first, x.materialize_prefix(1_000_000).unwrap());
    assert_eq!(first, y.materialize_prefix(1_000_000).unwrap());
    let (_, c) = build_irregular_point(&space, &mu1, &mu2, &schedule, 10).unwrap();
    assert_ne!(a.symbols(), c.symbols());
}

#[test]
fn golden_points_are_admissible_and_close_at_block_ends() {
    let space = ShiftSpace::golden_mean();
    let (mu1, mu2) = golden_measures(&space);
    let schedule = BlockSchedule::new(200, 1_000_000).with_growth(Growth::Proportional(4.0));
    let (x, plan) = build_irregular_point(&space, &mu1, &mu2, &schedule, 3).unwrap();
    let prefix = x.materialize_prefix(1_000_000).unwrap();
    assert!(!prefix.as_slice().windows(2).any(|p| p == [1, 1]), "found 11");
    assert!(plan.segments.len() >= 4);
    check_block_ends(&plan);
}

#[test]
fn full_shift_block_ends_are_close() {
    let space = ShiftSpace::full(3).unwrap();
    let mu1 = bernoulli_measure(&space, vec![0.2, 0.3, 0.5]).unwrap();
    let mu2 = periodic_measure(&space, w("012")).unwrap();
    let schedule = BlockSchedule::new(5_000, 300_000).with_growth(Growth::Proportional(2.0));
    let (_, plan) = build_irregular_point(&space, &mu1, &mu2, &schedule, 11).unwrap();
    check_block_ends(&plan);
    let targets: Vec<usize> = plan.segments.iter().map(|s| s.target).collect();
    assert!(targets.windows(2).all(|p| p[0] != p[1]), "targets alternate: {targets:?}");
}

#[test]
fn dominating_growth_lengths() {
    let space = ShiftSpace::full(2).unwrap();
    let mu1 = periodic_measure(&space, w("0")).unwrap();
    let mu2 = periodic_measure(&space, w("1")).unwrap();
    let (_, plan) = build_irregular_point(&space, &mu1, &mu2, &BlockSchedule::new(10, 100_000), 1).unwrap();
    let segs = &plan.segments;
    // With `l_{j+1} = max(2 l_j, j · S_j)` from `l_0`, block `j` is at least `(j − 1) · S_{j−1}` long.
    for j in 1..segs.len() - 1 {
        assert!(segs[j].length >= (j - 1) * segs[j - 1].end, "block {j}");
        if j >= 2 {
            assert!(segs[j].length >= segs[j - 1].end, "block {j} does not dominate its history");
        }
        assert!(segs[j].length >= 2 * segs[j - 1].length);
    }
    assert_eq!(segs.last().unwrap().end, 100_000);
}

#[test]
fn bernoulli_against_fixed_point_gap() {
    let space = ShiftSpace::full(2).unwrap();
    let bern = bernoulli_measure(&space, vec![0.5, 0.5]).unwrap();
    let d0 = periodic_measure(&space, w("0")).unwrap();
    let schedule = BlockSchedule::new(500, 1_000_000).with_growth(Growth::Proportional(45.0));
    let options = CertificateOptions {
        plan: CheckpointPlan::BlockTails { per_block: 3, spacing: 0.002 },
        tol: 0.01,
    };
    let phi = Observable::symbol_indicator(2, 1).unwrap();
    for seed in [1u64, 2, 3] {
        let (x, plan) = build_irregular_point(&space, &bern, &d0, &schedule, seed).unwrap();
        let cert = certify_plan(&plan, &[phi.clone()], &options).unwrap().remove(0).expect("certificate");
        assert!((cert.gap - 0.5).abs() <= 0.03, "seed {seed}: gap {}", cert.gap);
        assert!(verify_certificate(&cert, &x, &phi).unwrap());
    }
}

#[test]
fn jointly_irregular_certificates_verify() {
    let space = ShiftSpace::full(2).unwrap();
    let d0 = periodic_measure(&space, w("0")).unwrap();
    let d1 = periodic_measure(&space, w("1")).unwrap();
    let d01 = periodic_measure(&space, w("01")).unwrap();
    let observables = [
        Observable::symbol_indicator(2, 1).unwrap(),
        Observable::locally_constant(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
    ];
    let pairs = [(d0.clone(), d1), (d0, d01)];
    let schedule = BlockSchedule::new(64, 1_000_000).with_growth(Growth::Proportional(30.0));
    let options = CertificateOptions {
        plan: CheckpointPlan::BlockTails { per_block: 3, spacing: 0.002 },
        tol: 0.01,
    };
    let built = build_jointly_irregular_point(&space, &observables, &pairs, &schedule, 5, &options).unwrap();
    assert!((built.theta.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    for (i, phi) in observables.iter().enumerate() {
        assert!(built.separations[i].abs() > 1e-9);
        let cert = built.certificates[i].as_ref().expect("certificate");
        assert!(cert.gap >= 2.0 * options.tol);
        assert!(verify_certificate(cert, &built.point, phi).unwrap());
    }
}

#[test]
fn hyperplane_avoidance() {
    let d = vec![vec![1.0, -1.0], vec![1.0, 0.0], vec![0.0, 2.0]];
    let theta = avoid_hyperplanes(&d, 4).unwrap();
    assert!(theta.iter().all(|&t| t > 0.0));
    for row in &d {
        assert!(row.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>().abs() > 1e-9);
    }
    assert_eq!(theta, avoid_hyperplanes(&d, 4).unwrap());
    assert!(avoid_hyperplanes(&[vec![0.0, 0.0]], 4).is_err());
}

#[test]
fn periodic_closing() {
    for space in [ShiftSpace::full(2).unwrap(), ShiftSpace::golden_mean()] {
        let (mu1, mu2) = if space.alphabet() == 2 && space.mixing_gap() == Some(0) {
            (periodic_measure(&space, w("0")).unwrap(), bernoulli_measure(&space, vec![0.5, 0.5]).unwrap())
        } else {
            golden_measures(&space)
        };
        let mut schedule = BlockSchedule::new(40, 5_000).with_growth(Growth::Proportional(2.0));
        schedule.close_periodic = true;
        let (x, plan) = build_irregular_point(&space, &mu1, &mu2, &schedule, 8).unwrap();
        let p = plan.period.expect("closed loop");
        assert_eq!(x.period(), Some(p));
        let word = x.materialize_prefix(3 * p).unwrap();
        let s = word.as_slice();
        assert!((0..2 * p).all(|i| s[i + p] == s[i]), "shift^p x ≠ x");
        assert!(space.is_admissible(s));
    }
}

#[test]
fn saturated_and_round_robin_points() {
    let space = ShiftSpace::full(2).unwrap();
    let d0 = periodic_measure(&space, w("0")).unwrap();
    let d1 = periodic_measure(&space, w("1")).unwrap();
    let schedule = BlockSchedule::new(64, 200_000).with_growth(Growth::Proportional(1.0));
    let (_, plan) = build_saturated_point(&space, &[d0.clone(), d1.clone()], &schedule, 2).unwrap();
    check_block_ends(&plan);
    let phi = Observable::symbol_indicator(2, 1).unwrap();
    let visited: Vec<f64> = plan.targets.iter().map(|t| integrate(t, &phi).unwrap()).collect();
    assert!(visited.contains(&0.0) && visited.contains(&1.0) && visited.contains(&0.5));
    let (_, plan) = build_maximal_oscillation_point(&space, &[d0, d1], &schedule, 2).unwrap();
    let targets: Vec<usize> = plan.segments.iter().map(|s| s.target).collect();
    assert!(targets.windows(2).all(|p| p[0] != p[1]));
    check_block_ends(&plan);
}

#[test]
fn family_members_are_distinct_admissible_and_follow_the_pattern() {
    let space = ShiftSpace::golden_mean();
    let (mu1, _) = golden_measures(&space);
    let mu2 = markov_block_measure(&space, 1, vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
    let fam = separated_irregular_family(&space, &mu1, &mu2, 2000, 0.8, 100, 7).unwrap();
    let pattern = fam.pattern();
    assert_eq!(pattern.len(), 2000);
    let mut rng = segment_rng(12, 0, 0);
    let mut seen = HashSet::new();
    for _ in 0..100 {
        let a = fam.sample_member(&mut rng).unwrap();
        let b = fam.sample_member(&mut rng).unwrap();
        for m in [&a, &b] {
            assert_eq!(m.len(), 2000);
            assert!(space.is_admissible(m.as_slice()));
            assert!(pattern.iter().zip(m.as_slice()).all(|(p, s)| p.is_none_or(|q| q == *s)));
        }
        seen.insert(a);
        seen.insert(b);
    }
    assert_eq!(seen.len(), 200, "random members should not collide");
    // Distinct indices give distinct words.
    let last = &fam.cardinality - 1u8;
    assert_ne!(fam.member(&BigUint::from(0u8)).unwrap(), fam.member(&last).unwrap());
    assert!(fam.member(&fam.cardinality).is_err());
    let free: usize = fam
        .blocks
        .iter()
        .map(|b| match b {
            FamilyBlock::Free { length, .. } => *length,
            FamilyBlock::Fixed(_) => 0,
        })
        .sum();
    assert_eq!(free, pattern.iter().filter(|p| p.is_none()).count());
}

#[test]
fn family_rates() {
    let full = ShiftSpace::full(2).unwrap();
    let d0 = periodic_measure(&full, w("0")).unwrap();
    let d1 = periodic_measure(&full, w("1")).unwrap();
    let fam = separated_irregular_family(&full, &d0, &d1, 2000, 0.9, 100, 1).unwrap();
    assert!(fam.rate() >= 0.9 * 2f64.ln() - 0.01, "{}", fam.rate());
    // On the full shift each free symbol doubles the family.
    let free = fam.pattern().iter().filter(|p| p.is_none()).count();
    assert_eq!(fam.cardinality, BigUint::from(2u8).pow(free as u32));

    let golden_space = ShiftSpace::golden_mean();
    let (mu1, mu2) = golden_measures(&golden_space);
    let fam = separated_irregular_family(&golden_space, &mu1, &mu2, 2000, 0.8, 100, 1).unwrap();
    assert!(fam.rate() >= 0.8 * golden().ln() - 0.02, "{}", fam.rate());
    let count = fam.cardinality.to_f64().unwrap_or(f64::INFINITY);
    assert!(count.is_infinite() || (count.ln() / 2000.0 - fam.rate()).abs() <= 1e-9);
    assert!(separated_irregular_family(&golden_space, &mu1, &mu2, 2000, 0.8, 10, 1).is_err());
}
