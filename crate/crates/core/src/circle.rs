//! The doubling map `x ↦ 2x mod 1`, evaluated through binary itineraries.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::measures::periodic_measure;
use crate::observables::{BirkhoffTrace, Certificate, CheckpointPlan, Observable, TrigKind, GUARD_BITS};
use crate::symbolic::{ShiftSpace, Symbol, SymbolicPoint, Word};
use crate::synthesis::{build_jointly_irregular_point, BlockSchedule, CertificateOptions, Growth};

/// Reduced fraction `p/q` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational {
    pub p: u64,
    pub q: u64,
}

impl Rational {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p >= q {
            return Err(LabError::Precondition(format!("{p}/{q} is not in [0, 1)")));
        }
        let g = p.gcd(&q);
        Ok(Rational { p: p / g, q: q / g })
    }

    /// `2x mod 1`.
    pub fn double(self) -> Rational {
        let p = ((u128::from(self.p) * 2) % u128::from(self.q)) as u64;
        Rational::new(p, self.q).expect("doubling stays in [0, 1)")
    }

    /// `frac(m · 2^j · x)` as a numerator over `q`.
    fn scaled_numerator(self, m: u64, j: u64) -> u64 {
        let q = u128::from(self.q);
        let pow = mod_pow2(j, q);
        let v = u128::from(self.p) * pow % q;
        (v * (u128::from(m) % q) % q) as u64
    }

    pub fn to_f64(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn mod_pow2(mut e: u64, q: u128) -> u128 {
    let mut base = 2 % q;
    let mut acc = 1 % q;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    acc
}

/// Trig value at the fraction `num/q`, reduced to `[−½, ½)` first.
fn trig_at(num: u64, q: u64, kind: TrigKind) -> f64 {
    let centered = if 2 * u128::from(num) >= u128::from(q) {
        num as f64 - q as f64
    } else {
        num as f64
    };
    kind.eval_turns(centered / q as f64)
}

/// Orbit of a rational point: transient part followed by the cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitData {
    pub preperiod: Vec<Rational>,
    pub cycle: Vec<Rational>,
}

pub fn rational_orbit(p: u64, q: u64) -> Result<OrbitData> {
    if q == 0 || p >= q {
        return Err(LabError::Precondition(format!("{p}/{q} is not in [0, 1)")));
    }
    if p.gcd(&q) != 1 {
        return Err(LabError::Precondition(format!("{p}/{q} is not reduced")));
    }
    let mut seen = std::collections::HashMap::new();
    let mut orbit = Vec::new();
    let mut x = Rational { p, q };
    while !seen.contains_key(&x) {
        seen.insert(x, orbit.len());
        orbit.push(x);
        x = x.double();
    }
    let start = seen[&x];
    let cycle = orbit.split_off(start);
    Ok(OrbitData { preperiod: orbit, cycle })
}

impl OrbitData {
    /// Binary digits along the orbit: `⌊2x⌋` for each listed point.
    pub fn itinerary(&self) -> (Word, Word) {
        let bit = |r: &Rational| -> Symbol { Symbol::from(2 * r.p >= r.q) };
        (
            Word::new(self.preperiod.iter().map(bit).collect()),
            Word::new(self.cycle.iter().map(bit).collect()),
        )
    }
}

/// A point of the circle.
#[derive(Clone, Debug)]
pub enum CirclePoint {
    Rational(Rational),
    /// Point given by its binary expansion; iterate `j` reads bits `j … j + guard_bits`.
    BitBacked { point: SymbolicPoint, guard_bits: usize },
}

impl CirclePoint {
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        Rational::new(p, q).map(CirclePoint::Rational)
    }

    pub fn bit_backed(point: SymbolicPoint, guard_bits: usize) -> Result<Self> {
        if point.alphabet() != 2 {
            return Err(LabError::Precondition("bit-backed points need a binary sequence".into()));
        }
        if !(64..=GUARD_BITS).contains(&guard_bits) {
            return Err(LabError::Precondition(format!("guard bits must lie in 64..={GUARD_BITS}")));
        }
        Ok(CirclePoint::BitBacked { point, guard_bits })
    }

    /// Binary expansion as a point of the 2-shift (terminating expansion for dyadics).
    pub fn to_symbolic(&self) -> Result<SymbolicPoint> {
        match self {
            CirclePoint::Rational(r) => {
                let (pre, cyc) = rational_orbit(r.p, r.q)?.itinerary();
                SymbolicPoint::periodic(&ShiftSpace::full(2)?, pre, cyc)
            }
            CirclePoint::BitBacked { point, .. } => Ok(point.clone()),
        }
    }
}

/// `sin` or `cos` of `2πm · f^j(x)`.
pub fn evaluate_trig_along(x: &CirclePoint, kind: TrigKind, m: u32, j: usize) -> Result<f64> {
    if m == 0 {
        return Err(LabError::InvalidObservable("frequency must be ≥ 1".into()));
    }
    match x {
        CirclePoint::Rational(r) => Ok(trig_at(r.scaled_numerator(u64::from(m), j as u64), r.q, kind)),
        CirclePoint::BitBacked { point, guard_bits } => {
            let mut window = 0u128;
            for i in 0..*guard_bits {
                window = (window << 1) | u128::from(point.symbol_at(j + i)?);
            }
            window <<= GUARD_BITS - guard_bits;
            Ok(crate::observables::trig_from_window(window, kind, m))
        }
    }
}

/// Average of the observable over the cycle, i.e. its integral against the
/// periodic measure on the cycle.
pub fn trig_integral_periodic(orbit: &OrbitData, kind: TrigKind, m: u32) -> Result<f64> {
    if orbit.cycle.is_empty() {
        return Err(LabError::Precondition("empty cycle".into()));
    }
    let total: f64 = orbit
        .cycle
        .iter()
        .map(|r| trig_at(r.scaled_numerator(u64::from(m), 0), r.q, kind))
        .sum();
    Ok(total / orbit.cycle.len() as f64)
}

/// Cycle average of the observable for the orbit with binary itinerary `cycle^∞`.
pub fn cycle_trig_average(cycle: &[Symbol], kind: TrigKind, m: u32) -> Result<f64> {
    let len = cycle.len();
    if len == 0 || len > 62 {
        return Err(LabError::Unsupported("binary cycles of length 1..=62".into()));
    }
    // x = c / (2^L − 1)
    let q = (1u64 << len) - 1;
    let c = cycle.iter().try_fold(0u64, |acc, &b| {
        if b > 1 {
            Err(LabError::Unsupported("trigonometric observables need binary symbols".into()))
        } else {
            Ok((acc << 1) | u64::from(b))
        }
    })?;
    if c == q {
        // 1^∞ is the point 1 ≡ 0
        return Ok(kind.eval_turns(0.0));
    }
    let total: f64 = (0..len as u64)
        .map(|j| {
            let x = Rational { p: c, q };
            trig_at(x.scaled_numerator(u64::from(m), j), q, kind)
        })
        .sum();
    Ok(total / len as f64)
}

/// Integral gaps for one frequency of the family `sin 2mπx, cos 2mπx`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyWitness {
    pub m: u32,
    /// Integrals against the fixed point 0 and the orbit of `1/(7m)`.
    pub sin_integrals: (f64, f64),
    pub cos_integrals: (f64, f64),
    pub sin_gap: f64,
    pub cos_gap: f64,
}

#[derive(Clone, Debug)]
pub struct Section4Report {
    pub frequencies: Vec<FrequencyWitness>,
    pub horizon: usize,
    pub seed: u64,
    pub theta: Vec<f64>,
    /// Certificates for `sin 2πx` and `cos 2πx` along the constructed point.
    pub certificates: Vec<Option<Certificate>>,
    pub trace: BirkhoffTrace,
}

/// Witnesses for frequencies `1..=max_frequency` and a constructed point
/// irregular for both `sin 2πx` and `cos 2πx`, alternating between the fixed
/// point 0 and the orbit of `1/7`.
pub fn section4_report(horizon: usize, seed: u64, max_frequency: u32) -> Result<Section4Report> {
    if horizon < 100_000 {
        return Err(LabError::Precondition("horizon must be at least 100000".into()));
    }
    let mut frequencies = Vec::new();
    let fixed = rational_orbit(0, 1)?;
    for m in 1..=max_frequency {
        let orbit = rational_orbit(1, 7 * u64::from(m))?;
        let s = (
            trig_integral_periodic(&fixed, TrigKind::Sin, m)?,
            trig_integral_periodic(&orbit, TrigKind::Sin, m)?,
        );
        let c = (
            trig_integral_periodic(&fixed, TrigKind::Cos, m)?,
            trig_integral_periodic(&orbit, TrigKind::Cos, m)?,
        );
        frequencies.push(FrequencyWitness {
            m,
            sin_integrals: s,
            cos_integrals: c,
            sin_gap: (s.0 - s.1).abs(),
            cos_gap: (c.0 - c.1).abs(),
        });
    }

    let space = ShiftSpace::full(2)?;
    let delta0 = periodic_measure(&space, "0".parse()?)?;
    let mu1 = periodic_measure(&space, "001".parse()?)?;
    let observables = [Observable::trig(TrigKind::Sin, 1)?, Observable::trig(TrigKind::Cos, 1)?];
    let pairs = [(delta0.clone(), mu1.clone()), (delta0, mu1)];
    let schedule = BlockSchedule::new((horizon / 62_500).max(8), horizon + GUARD_BITS - 1)
        .with_growth(Growth::Proportional(250.0));
    let options = CertificateOptions {
        plan: CheckpointPlan::BlockTails {
            per_block: 3,
            spacing: 0.002,
        },
        tol: crate::observables::DEFAULT_TOL,
    };
    let built = build_jointly_irregular_point(&space, &observables, &pairs, &schedule, seed, &options)?;
    let cps = CheckpointPlan::Geometric { ratio: 1.1 }.resolve(horizon, None)?;
    let trace = crate::observables::birkhoff_trace(&built.point, &observables, &cps.indices)?;
    Ok(Section4Report {
        frequencies,
        horizon,
        seed,
        theta: built.theta,
        certificates: built.certificates,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: u64, q: u64) -> Rational {
        Rational { p, q }
    }

    #[test]
    fn orbit_examples() {
        let o = rational_orbit(1, 7).unwrap();
        assert!(o.preperiod.is_empty());
        assert_eq!(o.cycle, vec![r(1, 7), r(2, 7), r(4, 7)]);
        let o = rational_orbit(0, 1).unwrap();
        assert_eq!(o.cycle, vec![r(0, 1)]);
        let o = rational_orbit(1, 6).unwrap();
        assert_eq!(o.preperiod, vec![r(1, 6)]);
        assert_eq!(o.cycle, vec![r(1, 3), r(2, 3)]);
        assert!(rational_orbit(2, 6).is_err());
    }

    #[test]
    fn zero_evaluates_trivially() {
        let x = CirclePoint::rational(0, 1).unwrap();
        for j in [0, 5, 100] {
            assert_eq!(evaluate_trig_along(&x, TrigKind::Sin, 3, j).unwrap(), 0.0);
            assert_eq!(evaluate_trig_along(&x, TrigKind::Cos, 3, j).unwrap(), 1.0);
        }
    }

    #[test]
    fn itinerary_of_one_seventh() {
        let (pre, cyc) = rational_orbit(1, 7).unwrap().itinerary();
        assert!(pre.is_empty());
        assert_eq!(cyc.to_string(), "001");
        let (pre, cyc) = rational_orbit(1, 2).unwrap().itinerary();
        assert_eq!(pre.to_string(), "1");
        assert_eq!(cyc.to_string(), "0");
    }

    #[test]
    fn seventh_cycle_averages() {
        let o = rational_orbit(1, 7).unwrap();
        let s = trig_integral_periodic(&o, TrigKind::Sin, 1).unwrap();
        let c = trig_integral_periodic(&o, TrigKind::Cos, 1).unwrap();
        assert!((s - 7f64.sqrt() / 6.0).abs() < 1e-12);
        assert!((c + 1.0 / 6.0).abs() < 1e-12);
        let bits = cycle_trig_average(&[0, 0, 1], TrigKind::Sin, 1).unwrap();
        assert!((bits - s).abs() < 1e-15);
    }

    #[test]
    fn bit_backed_matches_rational() {
        let x = CirclePoint::rational(1, 7).unwrap();
        let bits = CirclePoint::bit_backed(x.to_symbolic().unwrap(), 128).unwrap();
        for j in [0, 1, 2, 17, 1000] {
            let a = evaluate_trig_along(&x, TrigKind::Sin, 1, j).unwrap();
            let b = evaluate_trig_along(&bits, TrigKind::Sin, 1, j).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }
}
