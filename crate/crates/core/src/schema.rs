//! JSON descriptions of spaces, measures, observables, schedules and points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::beta::BetaNumber;
use crate::circle::CirclePoint;
use crate::error::{LabError, Result};
use crate::measures::{bernoulli_measure, markov_block_measure, mixture, periodic_measure, MeasureModel};
use crate::observables::{LocalTable, Observable, TrigKind};
use crate::symbolic::{ShiftSpace, SymbolicPoint, Word};
use crate::synthesis::{BlockSchedule, Growth};

pub const DEFAULT_KNEADING_DEPTH: usize = 64;

fn parse_word(text: &str) -> Result<Word> {
    text.parse()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescription {
    #[serde(rename = "type")]
    pub kind: SpaceType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kneading_depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceType {
    Full,
    Sft,
    Beta,
}

impl SpaceDescription {
    pub fn build(&self) -> Result<ShiftSpace> {
        match self.kind {
            SpaceType::Full => ShiftSpace::full(
                self.k
                    .ok_or_else(|| LabError::Parse("full shift needs \"k\"".into()))?,
            ),
            SpaceType::Sft => {
                let t = self
                    .transition
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("sft needs \"transition\"".into()))?;
                if let Some(k) = self.k {
                    if k != t.len() {
                        return Err(LabError::Parse(format!("\"k\" = {k} but transition has {} rows", t.len())));
                    }
                }
                let rows = t
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&b| match b {
                                0 => Ok(false),
                                1 => Ok(true),
                                _ => Err(LabError::Parse(format!("transition entries must be 0 or 1, got {b}"))),
                            })
                            .collect()
                    })
                    .collect::<Result<Vec<Vec<bool>>>>()?;
                ShiftSpace::sft(rows)
            }
            SpaceType::Beta => {
                let text = self
                    .beta
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("beta shift needs \"beta\"".into()))?;
                ShiftSpace::beta(
                    BetaNumber::parse(text)?,
                    self.kneading_depth.unwrap_or(DEFAULT_KNEADING_DEPTH),
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDescription {
    Periodic {
        cycle: String,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default = "one")]
        order: usize,
    },
    Bernoulli {
        weights: Vec<f64>,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub measure: MeasureDescription,
}

impl MeasureDescription {
    pub fn build(&self, space: &ShiftSpace) -> Result<MeasureModel> {
        match self {
            MeasureDescription::Periodic { cycle } => periodic_measure(space, parse_word(cycle)?),
            MeasureDescription::Markov { transition, order } => markov_block_measure(space, *order, transition.clone()),
            MeasureDescription::Bernoulli { weights } => bernoulli_measure(space, weights.clone()),
            MeasureDescription::Mixture { components } => mixture(
                components
                    .iter()
                    .map(|c| Ok((c.weight, c.measure.build(space)?)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDescription {
    pub range: usize,
    pub table: BTreeMap<String, f64>,
}

impl TableDescription {
    pub fn build(&self, space: &ShiftSpace) -> Result<LocalTable> {
        let map = self
            .table
            .iter()
            .map(|(w, v)| Ok((parse_word(w)?, *v)))
            .collect::<Result<BTreeMap<Word, f64>>>()?;
        LocalTable::from_map(space, self.range, &map)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableDescription {
    LocallyConstant {
        range: usize,
        table: BTreeMap<String, f64>,
    },
    Trig {
        kind: TrigName,
        frequency: u32,
    },
    Coboundary {
        h: TableDescription,
        #[serde(default)]
        c: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigName {
    Sin,
    Cos,
}

impl From<TrigName> for TrigKind {
    fn from(t: TrigName) -> Self {
        match t {
            TrigName::Sin => TrigKind::Sin,
            TrigName::Cos => TrigKind::Cos,
        }
    }
}

impl ObservableDescription {
    pub fn build(&self, space: &ShiftSpace) -> Result<Observable> {
        match self {
            ObservableDescription::LocallyConstant { range, table } => {
                let t = TableDescription {
                    range: *range,
                    table: table.clone(),
                };
                Ok(Observable::LocallyConstant(t.build(space)?))
            }
            ObservableDescription::Trig { kind, frequency } => {
                if space.alphabet() != 2 {
                    return Err(LabError::Unsupported("trigonometric observables need the binary shift".into()));
                }
                Observable::trig((*kind).into(), *frequency)
            }
            ObservableDescription::Coboundary { h, c } => Observable::coboundary(h.build(space)?, *c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthDescription {
    Dominating,
    Proportional(f64),
}

/// Block schedule overrides; missing fields take the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDescription {
    #[serde(default)]
    pub initial_length: Option<usize>,
    #[serde(default)]
    pub growth: Option<GrowthDescription>,
    #[serde(default)]
    pub tol_start: Option<f64>,
    #[serde(default)]
    pub tol_decay: Option<f64>,
    #[serde(default)]
    pub tol_floor: Option<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub close_periodic: Option<bool>,
    #[serde(default)]
    pub max_retries: Option<usize>,
}

pub const DEFAULT_INITIAL_LENGTH: usize = 1000;

impl ScheduleDescription {
    pub fn build(&self, horizon: usize) -> BlockSchedule {
        let mut s = BlockSchedule::new(self.initial_length.unwrap_or(DEFAULT_INITIAL_LENGTH), horizon);
        if let Some(g) = &self.growth {
            s.growth = match g {
                GrowthDescription::Dominating => Growth::Dominating,
                GrowthDescription::Proportional(c) => Growth::Proportional(*c),
            };
        }
        s.tol_start = self.tol_start.unwrap_or(s.tol_start);
        s.tol_decay = self.tol_decay.unwrap_or(s.tol_decay);
        s.tol_floor = self.tol_floor.unwrap_or(s.tol_floor);
        s.depth = self.depth.unwrap_or(s.depth);
        s.close_periodic = self.close_periodic.unwrap_or(s.close_periodic);
        s.max_retries = self.max_retries.unwrap_or(s.max_retries);
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointDescription {
    /// `prefix · cycle^∞` in the given space.
    Periodic {
        #[serde(default)]
        prefix: String,
        cycle: String,
    },
    /// Rational point of the circle, read through its binary expansion.
    Rational { p: u64, q: u64 },
}

impl PointDescription {
    pub fn build(&self, space: &ShiftSpace) -> Result<SymbolicPoint> {
        match self {
            PointDescription::Periodic { prefix, cycle } => {
                SymbolicPoint::periodic(space, parse_word(prefix)?, parse_word(cycle)?)
            }
            PointDescription::Rational { p, q } => {
                if space.alphabet() != 2 {
                    return Err(LabError::Unsupported("rational points live on the binary shift".into()));
                }
                CirclePoint::rational(*p, *q)?.to_symbolic()
            }
        }
    }
}
