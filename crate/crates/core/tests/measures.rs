use std::collections::HashMap;

use historic::measures::{
    bernoulli_measure, empirical_distribution, entropy_rate, integrate, markov_measure, mixture, periodic_measure,
    weakstar_distance, EmpiricalWord, MeasureKind, MeasureModel,
};
use historic::observables::Observable;
use historic::symbolic::{ShiftSpace, Word};
use historic::synthesis::{generic_segment, segment_rng};
use historic::verify::random_markov;
use proptest::prelude::*;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn spaces() -> Vec<ShiftSpace> {
    vec![
        ShiftSpace::full(2).unwrap(),
        ShiftSpace::full(3).unwrap(),
        ShiftSpace::golden_mean(),
        ShiftSpace::sft(vec![vec![true, true, false], vec![false, true, true], vec![true, false, true]]).unwrap(),
    ]
}

fn random_measure(space: &ShiftSpace, order: usize, seed: u64) -> MeasureModel {
    random_markov(space, order, &mut segment_rng(seed, 7, 0)).unwrap()
}

/// Exact probability of `word` under a block chain, by marginalizing up to the chain order.
fn path_probability(mu: &MeasureModel, word: &[u8]) -> f64 {
    let chain = match mu.kind() {
        MeasureKind::Markov(c) => c,
        _ => panic!("expected a Markov chain"),
    };
    let order = chain.order();
    if word.len() < order {
        return (0..mu.alphabet() as u8)
            .map(|s| {
                let mut v = word.to_vec();
                v.push(s);
                path_probability(mu, &v)
            })
            .sum();
    }
    let index: HashMap<&[u8], usize> = chain.states().iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let Some(&first) = index.get(&word[..order]) else { return 0.0 };
    let mut p = chain.stationary()[first];
    let mut state = first;
    for t in 1..=word.len() - order {
        let Some(&next) = index.get(&word[t..t + order]) else { return 0.0 };
        p *= chain.transition()[state][next];
        state = next;
    }
    p
}

fn all_words(k: usize, n: usize) -> Vec<Vec<u8>> {
    (0..k.pow(n as u32)).map(|i| Word::from_index(i, n, k).into_inner()).collect()
}

#[test]
fn chains_are_stationary_and_stochastic() {
    for (i, space) in spaces().iter().enumerate() {
        for order in 1..=3 {
            for seed in 0..20 {
                let mu = random_measure(space, order, 1000 * i as u64 + seed);
                let MeasureKind::Markov(chain) = mu.kind() else { panic!() };
                assert!(chain.stationarity_residual() <= 1e-12);
                for row in chain.transition() {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
                for (a, row) in chain.states().iter().zip(chain.transition()) {
                    for (b, &p) in chain.states().iter().zip(row) {
                        if p > 0.0 {
                            let mut word = a.as_slice().to_vec();
                            word.push(*b.as_slice().last().unwrap());
                            assert!(space.is_admissible(&word));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn integrate_matches_brute_force_word_sums() {
    for (i, space) in spaces().iter().enumerate() {
        let k = space.alphabet();
        for order in 1..=2 {
            let mu = random_measure(space, order, 77 + i as u64 * 10 + order as u64);
            for r in 1..=4 {
                let values: Vec<f64> = (0..k.pow(r as u32)).map(|j| ((j * 37 + 11) % 19) as f64 / 7.0 - 1.0).collect();
                let phi = Observable::locally_constant(k, r, values.clone()).unwrap();
                let brute: f64 = all_words(k, r)
                    .iter()
                    .enumerate()
                    .map(|(j, word)| path_probability(&mu, word) * values[j])
                    .sum();
                let got = integrate(&mu, &phi).unwrap();
                assert!((got - brute).abs() <= 1e-12, "space {i} order {order} r {r}: {got} vs {brute}");
            }
        }
    }
}

#[test]
fn periodic_and_mixture_integrals() {
    let space = ShiftSpace::full(2).unwrap();
    let c = periodic_measure(&space, w("001")).unwrap();
    let ind = Observable::symbol_indicator(2, 1).unwrap();
    assert_eq!(integrate(&c, &ind).unwrap(), 1.0 / 3.0);
    let b = bernoulli_measure(&space, vec![0.25, 0.75]).unwrap();
    let m = mixture(vec![(0.5, c.clone()), (0.5, b.clone())]).unwrap();
    let expected = 0.5 / 3.0 + 0.5 * 0.75;
    assert!((integrate(&m, &ind).unwrap() - expected).abs() <= 1e-15);
    let h = 0.5 * entropy_rate(&b);
    assert!((entropy_rate(&m) - h).abs() <= 1e-15, "entropy is affine");
    assert!(periodic_measure(&ShiftSpace::golden_mean(), w("011")).is_err());
}

#[test]
fn empirical_examples() {
    let d = empirical_distribution(w("0101010101").as_slice(), 2, 2).unwrap();
    assert!((d.get(w("01").as_slice()) - 5.0 / 9.0).abs() < 1e-15);
    assert!((d.get(w("10").as_slice()) - 4.0 / 9.0).abs() < 1e-15);
    let d = empirical_distribution(w("0000").as_slice(), 2, 2).unwrap();
    assert_eq!(d.get(w("00").as_slice()), 1.0);
    assert!(empirical_distribution(w("0").as_slice(), 2, 2).is_err());
}

#[test]
fn weakstar_examples() {
    let space = ShiftSpace::full(2).unwrap();
    let d0 = periodic_measure(&space, w("0")).unwrap();
    let d1 = periodic_measure(&space, w("1")).unwrap();
    assert_eq!(weakstar_distance(&d0, &d1, 1).unwrap(), 0.5);
    assert_eq!(weakstar_distance(&d0, &d0, 8).unwrap(), 0.0);
}

#[test]
fn generic_segment_is_within_tolerance_of_target() {
    let space = ShiftSpace::full(2).unwrap();
    let mu = bernoulli_measure(&space, vec![0.5, 0.5]).unwrap();
    let seg = generic_segment(&space, &mu, 2000, 3, 0.02, 42).unwrap();
    assert!(seg.deviation <= 0.02);
    // Recount the windows by hand.
    let s = seg.word.as_slice();
    let mut dev = 0.0;
    for m in 1..=3usize {
        let mut counts: HashMap<&[u8], usize> = HashMap::new();
        for win in s.windows(m) {
            *counts.entry(win).or_default() += 1;
        }
        let total = (s.len() - m + 1) as f64;
        let tv: f64 = all_words(2, m)
            .iter()
            .map(|word| (counts.get(word.as_slice()).copied().unwrap_or(0) as f64 / total - 0.5f64.powi(m as i32)).abs())
            .sum::<f64>()
            / 2.0;
        dev += 0.5f64.powi(m as i32) * tv;
    }
    assert!((dev - seg.deviation).abs() <= 1e-12);
    let via_metric = weakstar_distance(&EmpiricalWord { symbols: s, k: 2 }, &mu, 3).unwrap();
    assert!((via_metric - seg.deviation).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weakstar_is_a_pseudometric(which in 0usize..4, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), depth in 1usize..6) {
        let space = &spaces()[which];
        let (x, y, z) = (random_measure(space, 1, a), random_measure(space, 2, b), random_measure(space, 1, c));
        let xy = weakstar_distance(&x, &y, depth).unwrap();
        prop_assert_eq!(xy, weakstar_distance(&y, &x, depth).unwrap());
        let xz = weakstar_distance(&x, &z, depth).unwrap();
        let zy = weakstar_distance(&z, &y, depth).unwrap();
        prop_assert!(xy <= xz + zy + 1e-15);
        prop_assert!(weakstar_distance(&x, &x, depth).unwrap() == 0.0);
    }
}

proptest! {
    #[test]
    fn integrate_is_linear(
        which in 0usize..4,
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        r in 1usize..4,
        raw in prop::collection::vec(-1.0f64..1.0, 128),
    ) {
        let space = &spaces()[which];
        let k = space.alphabet();
        let size = k.pow(r as u32);
        let u: Vec<f64> = raw[..size].to_vec();
        let v: Vec<f64> = raw[raw.len() - size..].to_vec();
        let combined: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let mu = random_measure(space, 1 + (seed % 2) as usize, seed);
        let phi = Observable::locally_constant(k, r, u).unwrap();
        let psi = Observable::locally_constant(k, r, v).unwrap();
        let both = Observable::locally_constant(k, r, combined).unwrap();
        let lhs = integrate(&mu, &both).unwrap();
        let rhs = a * integrate(&mu, &phi).unwrap() + b * integrate(&mu, &psi).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn markov_rows_must_sum_to_one(p in 0.0f64..1.0, eps in 1e-9f64..1e-3) {
        let space = ShiftSpace::full(2).unwrap();
        prop_assert!(markov_measure(&space, vec![vec![p, 1.0 - p + eps], vec![0.5, 0.5]]).is_err());
    }
}
