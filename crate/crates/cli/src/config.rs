//! Experiment configuration: loading, seed resolution and hashing.

use std::fmt;
use std::path::Path;

use historic::schema::{
    MeasureDescription, ObservableDescription, PointDescription, ScheduleDescription, SpaceDescription,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SEED_ENV: &str = "LAB_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    SpaceInfo,
    BetaKneading,
    MeasureIntegrate,
    Trace,
    SynthIrregular,
    SynthJointly,
    SynthSaturated,
    SynthGmax,
    SynthFamily,
    PressureTransfer,
    PressureCylinder,
    PressureBsdim,
    PressureBeta,
    DemoSection4,
    VerifyAll,
}

impl Operation {
    /// Operations that draw random samples and so need a seed.
    pub fn samples(self) -> bool {
        matches!(
            self,
            Operation::SynthIrregular
                | Operation::SynthJointly
                | Operation::SynthSaturated
                | Operation::SynthGmax
                | Operation::SynthFamily
                | Operation::DemoSection4
        )
    }

    /// The library function the results come from.
    pub fn function(self) -> &'static str {
        match self {
            Operation::SpaceInfo => "symbolic::ShiftSpace::count_words",
            Operation::BetaKneading => "beta::beta_kneading",
            Operation::MeasureIntegrate => "measures::integrate",
            Operation::Trace => "observables::birkhoff_trace",
            Operation::SynthIrregular => "synthesis::build_irregular_point",
            Operation::SynthJointly => "synthesis::build_jointly_irregular_point",
            Operation::SynthSaturated => "synthesis::build_saturated_point",
            Operation::SynthGmax => "synthesis::build_maximal_oscillation_point",
            Operation::SynthFamily => "synthesis::separated_irregular_family",
            Operation::PressureTransfer => "pressure::transfer_pressure",
            Operation::PressureCylinder => "pressure::cylinder_pressure_estimate",
            Operation::PressureBsdim => "pressure::bs_dimension",
            Operation::PressureBeta => "pressure::beta_entropy_estimate",
            Operation::DemoSection4 => "circle::section4_report",
            Operation::VerifyAll => "verify::run_all",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// Operation-specific parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    /// Cylinder pattern, one character per position, `.` for a free symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_frequency: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescription>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureDescription>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `geometric:<ratio>`, `block_ends`, `block_tails:<count>:<spacing>` or
    /// `explicit:<n1>,<n2>,…`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<String>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub output: Vec<String>,
}

impl ExperimentConfig {
    pub fn new(operation: Operation) -> Self {
        ExperimentConfig {
            operation,
            space: None,
            measures: Vec::new(),
            observables: Vec::new(),
            point: None,
            schedule: None,
            horizon: None,
            seed: None,
            tol: None,
            checkpoints: None,
            params: Params::default(),
            output: Vec::new(),
        }
    }

    /// Applies the seed precedence: flag, then `LAB_SEED`, then the config.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> Result<(), CliError> {
        let env_seed = match env {
            Some(text) => Some(
                text.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Config(format!("{SEED_ENV}: not an unsigned integer: {text:?}")))?,
            ),
            None => None,
        };
        self.seed = flag.or(env_seed).or(self.seed);
        Ok(())
    }

    /// Field-level checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let op = self.operation;
        let missing = |field: &str, why: &str| Err(CliError::Config(format!("{op}: missing field `{field}`: {why}")));
        if op.samples() && self.seed.is_none() {
            return missing("seed", "this operation samples and needs --seed, LAB_SEED or a config seed");
        }
        let needs_space = matches!(
            op,
            Operation::SpaceInfo
                | Operation::MeasureIntegrate
                | Operation::SynthIrregular
                | Operation::SynthJointly
                | Operation::SynthSaturated
                | Operation::SynthGmax
                | Operation::SynthFamily
                | Operation::PressureTransfer
                | Operation::PressureCylinder
                | Operation::PressureBsdim
        );
        if needs_space && self.space.is_none() {
            return missing("space", "pass --space <file>");
        }
        let needs_horizon = matches!(
            op,
            Operation::Trace
                | Operation::SynthIrregular
                | Operation::SynthJointly
                | Operation::SynthSaturated
                | Operation::SynthGmax
        );
        if needs_horizon && self.horizon.is_none() {
            return missing("horizon", "pass --horizon <N>");
        }
        match op {
            Operation::BetaKneading | Operation::PressureBeta if self.params.beta.is_none() => {
                return missing("params.beta", "pass --beta <value>");
            }
            Operation::MeasureIntegrate if self.measures.is_empty() || self.observables.is_empty() => {
                return missing("measures/observables", "pass --measures and --observables");
            }
            Operation::Trace if self.point.is_none() => return missing("point", "pass --point <file>"),
            Operation::Trace if self.observables.is_empty() => {
                return missing("observables", "pass --observables");
            }
            Operation::SynthIrregular if self.measures.len() != 2 => {
                return Err(CliError::Config(format!(
                    "{op}: field `measures`: expected exactly 2, got {}",
                    self.measures.len()
                )));
            }
            Operation::SynthJointly if self.observables.is_empty() || self.measures.len() != 2 * self.observables.len() => {
                return Err(CliError::Config(format!(
                    "{op}: field `measures`: expected 2 per observable ({} observables), got {}",
                    self.observables.len(),
                    self.measures.len()
                )));
            }
            Operation::SynthSaturated | Operation::SynthGmax if self.measures.is_empty() => {
                return missing("measures", "pass at least one measure");
            }
            Operation::SynthFamily => {
                if self.measures.len() != 2 {
                    return Err(CliError::Config(format!(
                        "{op}: field `measures`: expected exactly 2, got {}",
                        self.measures.len()
                    )));
                }
                for (field, present) in [
                    ("params.n", self.params.n.is_some()),
                    ("params.free_fraction", self.params.free_fraction.is_some()),
                    ("params.block_len", self.params.block_len.is_some()),
                ] {
                    if !present {
                        return missing(field, "families need --n, --free-fraction and --block-len");
                    }
                }
            }
            Operation::PressureCylinder if self.params.n.is_none() => return missing("params.n", "pass --n <length>"),
            Operation::PressureBsdim if self.observables.is_empty() => {
                return missing("observables", "pass the potential with --observables");
            }
            _ => {}
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("{op}: field `tol`: must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, leaving out the seed and output paths.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.seed = None;
        canonical.output.clear();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads and parses a JSON file, reporting the file, line and column on failure.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!("{origin}: line {} column {}: {e}", e.line(), e.column()))
    })
}

/// Parses `1000000`, `1e6` or `10^6`.
pub fn parse_count(text: &str) -> Result<usize, String> {
    let t = text.trim().replace('_', "");
    if let Ok(n) = t.parse::<usize>() {
        return Ok(n);
    }
    if let Some((base, exp)) = t.split_once('^') {
        let base: usize = base.parse().map_err(|_| format!("invalid count {text:?}"))?;
        let exp: u32 = exp.parse().map_err(|_| format!("invalid count {text:?}"))?;
        return base.checked_pow(exp).ok_or_else(|| format!("count {text:?} overflows"));
    }
    let v: f64 = t.parse().map_err(|_| format!("invalid count {text:?}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1e18 {
        Ok(v as usize)
    } else {
        Err(format!("count {text:?} is not a nonnegative integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("10^7"), Ok(10_000_000));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn seed_precedence() {
        let mut c = ExperimentConfig::new(Operation::SynthIrregular);
        c.seed = Some(1);
        c.resolve_seed(None, None).unwrap();
        assert_eq!(c.seed, Some(1));
        c.resolve_seed(None, Some("2")).unwrap();
        assert_eq!(c.seed, Some(2));
        c.resolve_seed(Some(3), Some("2")).unwrap();
        assert_eq!(c.seed, Some(3));
        assert!(c.resolve_seed(None, Some("x")).is_err());
    }

    #[test]
    fn missing_seed_is_a_schema_error() {
        let c: ExperimentConfig = parse_json(
            r#"{"operation":"synth_irregular","space":{"type":"full","k":2},"horizon":1000,
                "measures":[{"type":"periodic","cycle":"0"},{"type":"periodic","cycle":"1"}]}"#,
            "cfg",
        )
        .unwrap();
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("`seed`"), "{err}");
    }

    #[test]
    fn unknown_fields_report_position() {
        let err = parse_json::<ExperimentConfig>("{\n  \"operation\": \"space_info\",\n  \"bogus\": 1\n}", "cfg")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3") && err.contains("bogus"), "{err}");
    }

    #[test]
    fn hash_ignores_seed_and_output() {
        let mut a = ExperimentConfig::new(Operation::SpaceInfo);
        let h = a.hash();
        a.seed = Some(9);
        a.output.push("x.json".into());
        assert_eq!(a.hash(), h);
        a.horizon = Some(5);
        assert_ne!(a.hash(), h);
    }
}
