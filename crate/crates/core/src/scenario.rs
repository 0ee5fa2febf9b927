//! Scenario configuration: the JSON surface shared by the CLI and the
//! bundled scenario files. Coordinates and times are exact rationals,
//! written as integers or strings like "7/2" or "1.25". Seeds are mandatory;
//! nothing draws ambient randomness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{enclosing_simplex, rat_parse, Rat, SpacetimePoint, SpatialPoint};
use crate::pc::{PcParams, PcScenario};
use crate::pc_opt::{PcOptScenario, TickSchedule};
use crate::pv::PvInstance;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config at {pointer}: {message}")]
    Invalid { pointer: String, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
}

fn invalid(pointer: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { pointer: pointer.to_string(), message: message.into() }
}

/// A rational in JSON: a plain integer or a string like "7/2" or "-1.25".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatSpec {
    Int(i64),
    Str(String),
}

impl RatSpec {
    pub fn to_rat(&self, pointer: &str) -> Result<Rat, ConfigError> {
        match self {
            RatSpec::Int(v) => Ok(crate::geometry::rat_int(*v)),
            RatSpec::Str(s) => {
                rat_parse(s).ok_or_else(|| invalid(pointer, format!("bad rational '{s}'")))
            }
        }
    }

    pub fn from_rat(r: &Rat) -> RatSpec {
        if r.is_integer() {
            if let Ok(v) = i64::try_from(r.numer()) {
                return RatSpec::Int(v);
            }
        }
        RatSpec::Str(format!("{}/{}", r.numer(), r.denom()))
    }
}

/// A spacetime point in JSON: spatial coordinates plus a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    #[serde(rename = "L")]
    pub l: Vec<RatSpec>,
    pub t: RatSpec,
}

impl PointSpec {
    pub fn to_point(&self, d: usize, pointer: &str) -> Result<SpacetimePoint, ConfigError> {
        if self.l.len() != d {
            return Err(invalid(pointer, format!("expected {d} coordinates, got {}", self.l.len())));
        }
        let pos: Result<Vec<Rat>, _> = self
            .l
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_rat(&format!("{pointer}/L/{i}")))
            .collect();
        Ok(SpacetimePoint::new(pos?, self.t.to_rat(&format!("{pointer}/t"))?))
    }

    pub fn from_point(p: &SpacetimePoint) -> PointSpec {
        PointSpec {
            l: p.pos.iter().map(RatSpec::from_rat).collect(),
            t: RatSpec::from_rat(&p.t),
        }
    }
}

/// One scenario file. Which fields matter depends on the subcommand: `pv`
/// needs `target`, the commitment pipelines need `S` (and `R` for the
/// zero-knowledge run), the optimized scheme needs the tick grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verifiers: Option<Vec<Vec<RatSpec>>>,
    /// Auto-placement margin: verifiers at an enclosing simplex of S (or of
    /// the target) expanded by this margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<RatSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PointSpec>,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<PointSpec>>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r_region: Option<Vec<PointSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    pub n: usize,
    pub r: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_com: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload_bits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<RatSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ticks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<RatSpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn points(&self, pointer: &str) -> Result<Vec<SpacetimePoint>, ConfigError> {
        let Some(s) = &self.s else {
            return Err(invalid(pointer, "missing S"));
        };
        if s.is_empty() {
            return Err(invalid(pointer, "S must be nonempty"));
        }
        s.iter()
            .enumerate()
            .map(|(i, p)| p.to_point(self.d, &format!("{pointer}/{i}")))
            .collect()
    }

    /// Explicit verifiers, or an enclosing simplex of the committable set
    /// (falling back to the target) expanded by the margin.
    pub fn resolve_verifiers(&self) -> Result<Vec<SpatialPoint>, ConfigError> {
        if let Some(vs) = &self.verifiers {
            if vs.is_empty() {
                return Err(invalid("/verifiers", "need at least one verifier"));
            }
            return vs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    if v.len() != self.d {
                        return Err(invalid(
                            &format!("/verifiers/{i}"),
                            format!("expected {} coordinates", self.d),
                        ));
                    }
                    v.iter()
                        .enumerate()
                        .map(|(j, c)| c.to_rat(&format!("/verifiers/{i}/{j}")))
                        .collect()
                })
                .collect();
        }
        let margin = self
            .margin
            .as_ref()
            .ok_or_else(|| invalid("/verifiers", "either verifiers or margin required"))?
            .to_rat("/margin")?;
        let pts = if self.s.is_some() {
            self.points("/S")?
        } else if let Some(t) = &self.target {
            vec![t.to_point(self.d, "/target")?]
        } else {
            return Err(invalid("/margin", "margin placement needs S or target"));
        };
        enclosing_simplex(&pts, &margin)
            .map_err(|e| invalid("/margin", format!("placement failed: {e}")))
    }

    pub fn to_pv_instance(&self) -> Result<PvInstance, ConfigError> {
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| invalid("/target", "missing target"))?
            .to_point(self.d, "/target")?;
        let inst = PvInstance {
            dim: self.d,
            verifiers: self.resolve_verifiers()?,
            target,
            n: self.n,
            rounds: self.r,
        };
        inst.validate()
            .map_err(|e| invalid("/target", format!("instance invalid: {e}")))?;
        Ok(inst)
    }

    pub fn pc_params(&self) -> PcParams {
        let d = PcParams::default();
        PcParams {
            n: self.n,
            rounds: self.r,
            kappa: self.kappa.unwrap_or(d.kappa),
            lambda_com: self.lambda_com.unwrap_or(d.lambda_com),
            payload_bits: self.payload_bits.unwrap_or(d.payload_bits),
        }
    }

    pub fn to_pc_scenario(&self) -> Result<PcScenario, ConfigError> {
        let s_points = self.points("/S")?;
        PcScenario::new(self.d, self.resolve_verifiers()?, s_points, self.pc_params(), self.seed)
            .map_err(|e| invalid("/S", format!("scenario invalid: {e}")))
    }

    /// Region points resolved to indices into S (value equality).
    pub fn region_indices(&self, scenario: &PcScenario) -> Result<Vec<u32>, ConfigError> {
        let Some(region) = &self.r_region else {
            return Err(invalid("/R", "missing R"));
        };
        region
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let pt = p.to_point(self.d, &format!("/R/{i}"))?;
                scenario
                    .s_points
                    .iter()
                    .position(|s| *s == pt)
                    .map(|idx| idx as u32)
                    .ok_or_else(|| invalid(&format!("/R/{i}"), "region point not in S"))
            })
            .collect()
    }

    pub fn to_pc_opt_scenario(&self) -> Result<PcOptScenario, ConfigError> {
        let delta = self
            .delta
            .as_ref()
            .ok_or_else(|| invalid("/delta", "missing delta"))?
            .to_rat("/delta")?;
        if !num::Signed::is_positive(&delta) {
            return Err(invalid("/delta", "delta must be positive"));
        }
        let ticks = self.ticks.ok_or_else(|| invalid("/ticks", "missing ticks"))?;
        let t_start = match &self.t_start {
            Some(t) => t.to_rat("/t_start")?,
            None => crate::geometry::rat_int(0),
        };
        Ok(PcOptScenario {
            dim: self.d,
            verifiers: self.resolve_verifiers()?,
            schedule: TickSchedule { t_start, delta, ticks },
            n: self.n,
            kappa: self.kappa.unwrap_or(PcParams::default().kappa),
            lambda_com: self.lambda_com.unwrap_or(PcParams::default().lambda_com),
            seed: self.seed,
        })
    }
}
