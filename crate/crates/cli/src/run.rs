//! Dispatch from a validated configuration to the library.

use historic::beta::{beta_kneading, required_precision_bits, validate_beta, BetaNumber};
use historic::circle::section4_report;
use historic::measures::{entropy_rate, integrate, MeasureModel};
use historic::observables::{
    birkhoff_trace, certificate_from_averages, BirkhoffTrace, CheckpointPlan, Checkpoints, Observable, DEFAULT_TOL,
    MIN_CERTIFICATE_CHECKPOINTS,
};
use historic::pressure::{
    beta_entropy_estimate, bs_dimension, cylinder_pressure_estimate, transfer_pressure, BsTarget, WordSet,
};
use historic::symbolic::{ShiftSpace, SpaceKind, Symbol, SymbolicPoint};
use historic::synthesis::{
    build_irregular_point, build_jointly_irregular_point, build_maximal_oscillation_point, build_saturated_point,
    separated_irregular_family, BlockSchedule, CertificateOptions, FamilyBlock, GluePlan,
};
use historic::verify;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Operation};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_BSDIM_TOL: f64 = 1e-10;
pub const DEFAULT_KNEADING_DIGITS: usize = 64;
pub const DEFAULT_N_LIST: [usize; 4] = [8, 12, 16, 20];
pub const DEFAULT_DEMO_HORIZON: usize = 1_000_000;
pub const DEFAULT_MAX_FREQUENCY: u32 = 8;

/// Everything a run emits.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    pub json: Value,
    pub csv: Option<String>,
    pub summary: String,
    /// False when the operation ran but reported a failed check.
    pub passed: bool,
}

fn provenance(cfg: &ExperimentConfig) -> Value {
    json!({
        "operation": cfg.operation.to_string(),
        "function": cfg.operation.function(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "version": VERSION,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle, CliError> {
    cfg.validate()?;
    let (results, csv, summary, passed) = match cfg.operation {
        Operation::SpaceInfo => space_info(cfg)?,
        Operation::BetaKneading => kneading(cfg)?,
        Operation::MeasureIntegrate => measure_integrate(cfg)?,
        Operation::Trace => trace(cfg)?,
        Operation::SynthIrregular
        | Operation::SynthJointly
        | Operation::SynthSaturated
        | Operation::SynthGmax => synth(cfg)?,
        Operation::SynthFamily => family(cfg)?,
        Operation::PressureTransfer | Operation::PressureCylinder => pressure(cfg)?,
        Operation::PressureBsdim => bsdim(cfg)?,
        Operation::PressureBeta => beta_pressure(cfg)?,
        Operation::DemoSection4 => demo(cfg)?,
        Operation::VerifyAll => verify_all()?,
    };
    let mut json = results;
    json.as_object_mut()
        .expect("results are objects")
        .insert("provenance".into(), provenance(cfg));
    Ok(ReportBundle {
        json,
        csv,
        summary,
        passed,
    })
}

type Outcome = (Value, Option<String>, String, bool);

fn build_space(cfg: &ExperimentConfig) -> Result<ShiftSpace, CliError> {
    match &cfg.space {
        Some(d) => d.build().map_err(CliError::invalid("space")),
        None => ShiftSpace::full(2).map_err(CliError::invalid("space")),
    }
}

fn build_measures(cfg: &ExperimentConfig, space: &ShiftSpace) -> Result<Vec<MeasureModel>, CliError> {
    cfg.measures
        .iter()
        .enumerate()
        .map(|(i, d)| d.build(space).map_err(|e| CliError::Config(format!("field `measures[{i}]`: {e}"))))
        .collect()
}

fn build_observables(cfg: &ExperimentConfig, space: &ShiftSpace) -> Result<Vec<Observable>, CliError> {
    cfg.observables
        .iter()
        .enumerate()
        .map(|(i, d)| d.build(space).map_err(|e| CliError::Config(format!("field `observables[{i}]`: {e}"))))
        .collect()
}

fn potential(cfg: &ExperimentConfig, space: &ShiftSpace) -> Result<Observable, CliError> {
    match build_observables(cfg, space)?.into_iter().next() {
        Some(phi) => Ok(phi),
        None => Observable::constant(space.alphabet(), 0.0).map_err(CliError::invalid("observables")),
    }
}

fn schedule(cfg: &ExperimentConfig, observables: &[Observable]) -> BlockSchedule {
    let window = observables.iter().map(Observable::window).max().unwrap_or(1);
    let horizon = cfg.horizon.expect("validated") + window - 1;
    cfg.schedule.clone().unwrap_or_default().build(horizon)
}

fn parse_beta(text: &str) -> Result<BetaNumber, CliError> {
    let beta = BetaNumber::parse(text).map_err(CliError::invalid("params.beta"))?;
    validate_beta(&beta).map_err(CliError::invalid("params.beta"))?;
    Ok(beta)
}

/// Parses a checkpoint plan such as `geometric:1.5`.
pub fn parse_checkpoints(text: &str) -> Result<CheckpointPlan, CliError> {
    let bad = || CliError::Config(format!("field `checkpoints`: cannot parse {text:?}"));
    let mut parts = text.splitn(2, ':');
    let head = parts.next().unwrap_or_default();
    let rest = parts.next();
    match (head, rest) {
        ("block_ends", None) => Ok(CheckpointPlan::BlockEnds),
        ("geometric", Some(r)) => Ok(CheckpointPlan::Geometric {
            ratio: r.parse().map_err(|_| bad())?,
        }),
        ("block_tails", Some(r)) => {
            let (count, spacing) = r.split_once(':').ok_or_else(bad)?;
            Ok(CheckpointPlan::BlockTails {
                per_block: count.parse().map_err(|_| bad())?,
                spacing: spacing.parse().map_err(|_| bad())?,
            })
        }
        ("explicit", Some(r)) => Ok(CheckpointPlan::Explicit(
            r.split(',')
                .map(|t| crate::config::parse_count(t).map_err(|_| bad()))
                .collect::<Result<_, _>>()?,
        )),
        _ => Err(bad()),
    }
}

/// Pattern string with one base-36 digit per fixed position and `.` for free ones.
fn parse_pattern(text: &str, k: usize) -> Result<Vec<Option<Symbol>>, CliError> {
    text.chars()
        .map(|c| match c {
            '.' | '*' => Ok(None),
            _ => c
                .to_digit(36)
                .filter(|&d| (d as usize) < k)
                .map(|d| Some(d as Symbol))
                .ok_or_else(|| CliError::Config(format!("field `params.pattern`: bad symbol {c:?}"))),
        })
        .collect()
}

fn pattern_string(p: &[Option<Symbol>]) -> String {
    p.iter()
        .map(|s| match s {
            Some(s) => std::char::from_digit(u32::from(*s), 36).unwrap_or('?'),
            None => '.',
        })
        .collect()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn space_info(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let counts = (1..=10)
        .map(|n| {
            let c = space.count_words(n).map_err(CliError::failed("symbolic::ShiftSpace::count_words"))?;
            Ok(json!({"n": n, "count": c.to_string()}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (entropy, kneading) = match space.kind() {
        SpaceKind::Beta { beta, kneading } => (
            json!({"value": beta.to_f64().ln(), "method": "log_beta", "error_bound": 0.0}),
            json!({"digits": kneading.digits.as_slice(), "terminates": kneading.terminates}),
        ),
        _ => {
            let zero = Observable::constant(space.alphabet(), 0.0).map_err(CliError::invalid("space"))?;
            let p = transfer_pressure(&space, &zero).map_err(CliError::failed("pressure::transfer_pressure"))?;
            (serde_json::to_value(p).expect("serializable"), Value::Null)
        }
    };
    let summary = format!(
        "{} shift on {} symbols, mixing gap {:?}, entropy {}",
        space.type_name(),
        space.alphabet(),
        space.mixing_gap(),
        entropy["value"]
    );
    Ok((
        json!({
            "type": space.type_name(),
            "alphabet": space.alphabet(),
            "markov": space.is_markov(),
            "automaton_states": space.automaton().num_states(),
            "mixing_gap": space.mixing_gap(),
            "word_counts": counts,
            "entropy": entropy,
            "kneading": kneading,
        }),
        None,
        summary,
        true,
    ))
}

fn kneading(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let text = cfg.params.beta.as_deref().expect("validated");
    let beta = parse_beta(text)?;
    let digits = cfg.params.digits.unwrap_or(DEFAULT_KNEADING_DIGITS);
    let required = required_precision_bits(&beta, digits);
    let bits = cfg.params.precision_bits.unwrap_or(required);
    let k = beta_kneading(&beta, digits, bits).map_err(CliError::failed("beta::beta_kneading"))?;
    let summary = format!("kneading digits of 1 in base {text}: {}", k.digits);
    Ok((
        json!({
            "beta": text,
            "digits": k.digits.as_slice(),
            "terminates": k.terminates,
            "precision_bits": bits,
            "required_precision_bits": required,
            "method": "exact_field_arithmetic",
        }),
        None,
        summary,
        true,
    ))
}

fn measure_integrate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let measures = build_measures(cfg, &space)?;
    let observables = build_observables(cfg, &space)?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for (i, mu) in measures.iter().enumerate() {
        for (j, phi) in observables.iter().enumerate() {
            let v = integrate(mu, phi).map_err(CliError::failed("measures::integrate"))?;
            rows.push(json!({"measure": i, "observable": j, "value": v, "method": "exact_cylinder_sum", "tolerance": 1e-12}));
            summary.push_str(&format!("∫ observable {j} d(measure {i}) = {v:.15}\n"));
        }
    }
    let entropies: Vec<Value> = measures
        .iter()
        .enumerate()
        .map(|(i, mu)| json!({"measure": i, "value": entropy_rate(mu), "method": "entropy_rate"}))
        .collect();
    Ok((json!({"integrals": rows, "entropy_rates": entropies}), None, summary.trim_end().to_string(), true))
}

fn trace(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let point: SymbolicPoint = cfg
        .point
        .as_ref()
        .expect("validated")
        .build(&space)
        .map_err(CliError::invalid("point"))?;
    let observables = build_observables(cfg, &space)?;
    let horizon = cfg.horizon.expect("validated");
    let plan = parse_checkpoints(cfg.checkpoints.as_deref().unwrap_or("geometric:1.5"))?;
    let cps = plan.resolve(horizon, None).map_err(CliError::failed("observables::CheckpointPlan::resolve"))?;
    let trace = birkhoff_trace(&point, &observables, &cps.indices).map_err(CliError::failed("observables::birkhoff_trace"))?;
    let last = final_averages(&trace);
    let summary = format!("{} checkpoints up to {horizon}; final averages {last:?}", trace.checkpoints.len());
    Ok((
        json!({"horizon": horizon, "checkpoints": trace.checkpoints.len(), "final_averages": last}),
        Some(trace.to_csv(&ids(observables.len()))),
        summary,
        true,
    ))
}

fn final_averages(trace: &BirkhoffTrace) -> Vec<f64> {
    trace.averages.iter().map(|row| row.last().copied().unwrap_or(f64::NAN)).collect()
}

fn certificates_json(certs: &[Option<historic::observables::Certificate>]) -> Value {
    Value::Array(
        certs
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Some(c) => json!({
                    "observable": i,
                    "gap": c.gap,
                    "tol": c.tol,
                    "limits": [c.a.limit, c.b.limit],
                    "oscillations": [c.a.oscillation, c.b.oscillation],
                    "checkpoints": [c.a.indices, c.b.indices],
                    "method": "cluster_certificate",
                }),
                None => json!({"observable": i, "gap": Value::Null, "method": "cluster_certificate"}),
            })
            .collect(),
    )
}

fn synth(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let measures = build_measures(cfg, &space)?;
    let mut observables = build_observables(cfg, &space)?;
    if observables.is_empty() {
        observables = (0..space.alphabet())
            .map(|s| Observable::symbol_indicator(space.alphabet(), s as Symbol))
            .collect::<historic::Result<_>>()
            .map_err(CliError::invalid("observables"))?;
    }
    let schedule = schedule(cfg, &observables);
    let seed = cfg.seed.expect("validated");
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let plan_spec = parse_checkpoints(cfg.checkpoints.as_deref().unwrap_or("block_ends"))?;
    let ctx = cfg.operation.function();
    let mut extra = json!({});
    let (point, plan, builder_certs): (SymbolicPoint, std::sync::Arc<GluePlan>, Option<Vec<_>>) = match cfg.operation {
        Operation::SynthIrregular => {
            let (x, p) = build_irregular_point(&space, &measures[0], &measures[1], &schedule, seed)
                .map_err(CliError::failed(ctx))?;
            (x, p, None)
        }
        Operation::SynthJointly => {
            let pairs: Vec<_> = measures.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            let options = CertificateOptions {
                plan: plan_spec.clone(),
                tol,
            };
            let built = build_jointly_irregular_point(&space, &observables, &pairs, &schedule, seed, &options)
                .map_err(CliError::failed(ctx))?;
            extra = json!({"separations": built.separations});
            (built.point, built.plan, Some(built.certificates))
        }
        Operation::SynthSaturated => {
            let (x, p) = build_saturated_point(&space, &measures, &schedule, seed).map_err(CliError::failed(ctx))?;
            (x, p, None)
        }
        Operation::SynthGmax => {
            let (x, p) =
                build_maximal_oscillation_point(&space, &measures, &schedule, seed).map_err(CliError::failed(ctx))?;
            (x, p, None)
        }
        _ => unreachable!("dispatched above"),
    };
    let horizon = cfg.horizon.expect("validated");
    let ends = plan.block_ends();
    let cps = plan_spec
        .resolve(horizon, Some(&ends))
        .map_err(CliError::failed("observables::CheckpointPlan::resolve"))?;
    let trace = birkhoff_trace(&point, &observables, &cps.indices).map_err(CliError::failed("observables::birkhoff_trace"))?;
    let certs = match builder_certs {
        Some(c) => c,
        None if cps.indices.len() < MIN_CERTIFICATE_CHECKPOINTS => vec![None; observables.len()],
        None => {
            // Two-target constructions alternate by block parity; longer
            // cycles of targets are clustered from the averages alone.
            let cps = match cfg.operation {
                Operation::SynthIrregular => cps.clone(),
                _ => Checkpoints {
                    indices: cps.indices.clone(),
                    blocks: None,
                },
            };
            trace
                .averages
                .iter()
                .enumerate()
                .map(|(i, avg)| certificate_from_averages(i, &cps, avg, tol))
                .collect::<historic::Result<_>>()
                .map_err(CliError::failed("observables::certificate_from_averages"))?
        }
    };
    let certified = certs.iter().filter(|c| c.is_some()).count();
    let summary = format!(
        "{} blocks, {} symbols, {certified}/{} observables certified irregular at tol {tol}",
        plan.segments.len(),
        plan.symbols().len(),
        certs.len()
    );
    let mut out = json!({
        "horizon": horizon,
        "plan": plan.to_json(),
        "certificates": certificates_json(&certs),
        "final_averages": final_averages(&trace),
    });
    if let (Some(o), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        o.extend(e.clone());
    }
    Ok((out, Some(trace.to_csv(&ids(observables.len()))), summary, true))
}

fn family(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let measures = build_measures(cfg, &space)?;
    let p = &cfg.params;
    let fam = separated_irregular_family(
        &space,
        &measures[0],
        &measures[1],
        p.n.expect("validated"),
        p.free_fraction.expect("validated"),
        p.block_len.expect("validated"),
        cfg.seed.expect("validated"),
    )
    .map_err(CliError::failed(cfg.operation.function()))?;
    let blocks: Vec<Value> = fam
        .blocks
        .iter()
        .map(|b| match b {
            FamilyBlock::Fixed(w) => json!({"fixed": w.to_string()}),
            FamilyBlock::Free { length, count } => json!({"free": length, "count": count.to_string()}),
        })
        .collect();
    let summary = format!("{} members of length {}, rate {:.6}", fam.cardinality, fam.n, fam.rate());
    Ok((
        json!({
            "n": fam.n,
            "cardinality": fam.cardinality.to_string(),
            "rate": fam.rate(),
            "method": "exact_completion_count",
            "pattern": pattern_string(&fam.pattern()),
            "blocks": blocks,
        }),
        None,
        summary,
        true,
    ))
}

fn pressure(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let phi = potential(cfg, &space)?;
    let ctx = cfg.operation.function();
    let result = match cfg.operation {
        Operation::PressureTransfer => transfer_pressure(&space, &phi),
        _ => {
            let n = cfg.params.n.expect("validated");
            let set = match &cfg.params.pattern {
                Some(p) => WordSet::Pattern(parse_pattern(p, space.alphabet())?),
                None => WordSet::All,
            };
            cylinder_pressure_estimate(&space, &set, &phi, n)
        }
    }
    .map_err(CliError::failed(ctx))?;
    let summary = format!("pressure {:.12} ({:?})", result.value, result.method);
    Ok((serde_json::to_value(result).expect("serializable"), None, summary, true))
}

fn bsdim(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = build_space(cfg)?;
    let phi = potential(cfg, &space)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_BSDIM_TOL);
    let target = match cfg.params.n {
        None => BsTarget::Whole,
        Some(n) => BsTarget::Cylinder {
            set: match &cfg.params.pattern {
                Some(p) => WordSet::Pattern(parse_pattern(p, space.alphabet())?),
                None => WordSet::All,
            },
            n,
        },
    };
    let r = bs_dimension(&space, &target, &phi, tol).map_err(CliError::failed(cfg.operation.function()))?;
    let summary = format!("BS-dimension {:.12} (bisection tolerance {tol})", r.value);
    Ok((
        json!({
            "value": r.value,
            "method": r.method,
            "n": r.n,
            "error_bound": tol / 2.0,
            "bracket": [r.bracket.0, r.bracket.1],
            "residual": r.residual,
        }),
        None,
        summary,
        true,
    ))
}

fn beta_pressure(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let text = cfg.params.beta.as_deref().expect("validated");
    let beta = parse_beta(text)?;
    let n_list = if cfg.params.n_list.is_empty() {
        DEFAULT_N_LIST.to_vec()
    } else {
        cfg.params.n_list.clone()
    };
    let rows = beta_entropy_estimate(&beta, &n_list).map_err(CliError::failed(cfg.operation.function()))?;
    let b = beta.to_f64();
    let last = rows.last().ok_or_else(|| CliError::Config("field `params.n_list`: empty".into()))?;
    let bound = (b * b / (b - 1.0)).ln() / last.n as f64;
    let summary = format!(
        "entropy estimate {:.6} at n = {} (ln β = {:.6})",
        last.estimate,
        last.n,
        b.ln()
    );
    Ok((
        json!({
            "value": last.estimate,
            "method": "cylinder_count",
            "n": last.n,
            "error_bound": bound,
            "log_beta": b.ln(),
            "rows": rows,
        }),
        None,
        summary,
        true,
    ))
}

fn demo(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let horizon = cfg.horizon.unwrap_or(DEFAULT_DEMO_HORIZON);
    let max_m = cfg.params.max_frequency.unwrap_or(DEFAULT_MAX_FREQUENCY);
    let report = section4_report(horizon, cfg.seed.expect("validated"), max_m)
        .map_err(CliError::failed(cfg.operation.function()))?;
    let gaps: Vec<String> = report
        .certificates
        .iter()
        .map(|c| c.as_ref().map_or("none".into(), |c| format!("{:.6}", c.gap)))
        .collect();
    let summary = format!("sin/cos certificate gaps at horizon {horizon}: {}", gaps.join(", "));
    Ok((
        json!({
            "horizon": report.horizon,
            "theta": report.theta,
            "frequencies": report.frequencies,
            "certificates": certificates_json(&report.certificates),
        }),
        Some(report.trace.to_csv(&["sin".to_string(), "cos".to_string()])),
        summary,
        true,
    ))
}

fn verify_all() -> Result<Outcome, CliError> {
    let outcomes = verify::run_all();
    let passed = outcomes.iter().all(|o| o.passed);
    let summary = outcomes.iter().map(|o| o.summary_line()).collect::<Vec<_>>().join("\n");
    Ok((json!({"passed": passed, "criteria": outcomes}), None, summary, passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_specs() {
        assert_eq!(parse_checkpoints("geometric:1.5").unwrap(), CheckpointPlan::Geometric { ratio: 1.5 });
        assert_eq!(parse_checkpoints("block_ends").unwrap(), CheckpointPlan::BlockEnds);
        assert_eq!(
            parse_checkpoints("block_tails:3:0.002").unwrap(),
            CheckpointPlan::BlockTails {
                per_block: 3,
                spacing: 0.002
            }
        );
        assert_eq!(parse_checkpoints("explicit:10,1e3").unwrap(), CheckpointPlan::Explicit(vec![10, 1000]));
        assert!(parse_checkpoints("geometric").is_err());
    }

    #[test]
    fn patterns_round_trip() {
        let p = parse_pattern("0.1.", 2).unwrap();
        assert_eq!(p, vec![Some(0), None, Some(1), None]);
        assert_eq!(pattern_string(&p), "0.1.");
        assert!(parse_pattern("2", 2).is_err());
    }
}
