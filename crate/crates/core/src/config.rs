//! Experiment configuration files.
//!
//! Configs are JSON with one hard rule: every physical value is a string
//! with an explicit unit suffix ("100 G", "2 kHz", "20 us", "0.154 nm").
//! Bare numbers for physical quantities are rejected, naming the key.
//! Unknown keys are rejected. Scenario aliases (fig2, fig4, ...) expand to
//! the built-in parameter sets; sections given alongside an alias override
//! the expanded ones wholesale.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{BxWaveform, FieldSchedule, TWO_PI};
use crate::propagation::TimeGrid;

/// Reference critical time of the constant-field configuration (Bx = 100 G,
/// Bz = 50 G), used by the steering presets.
pub const TC1_SECONDS: f64 = 2.4e-6;

/// A number with a mandatory unit suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Self { value, unit: unit.to_string() }
    }

    fn expect(&self, kind: &str, allowed: &[(&str, f64)]) -> Result<f64> {
        for (u, scale) in allowed {
            if self.unit == *u {
                return Ok(self.value * scale);
            }
        }
        Err(Error::Config(format!(
            "`{} {}` is not a {kind}; allowed units: {}",
            self.value,
            self.unit,
            allowed.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
        )))
    }

    pub fn as_gauss(&self) -> Result<f64> {
        self.expect("magnetic field", &[("G", 1.0), ("mT", 10.0), ("T", 1e4)])
    }

    pub fn as_seconds(&self) -> Result<f64> {
        self.expect("time", &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)])
    }

    /// Plain frequency converted to angular rad/s.
    pub fn as_rad_per_s(&self) -> Result<f64> {
        self.expect(
            "frequency",
            &[("Hz", TWO_PI), ("kHz", TWO_PI * 1e3), ("MHz", TWO_PI * 1e6)],
        )
    }

    pub fn as_meters(&self) -> Result<f64> {
        self.expect("length", &[("m", 1.0), ("nm", 1e-9), ("pm", 1e-12)])
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl TryFrom<String> for Quantity {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        let t = s.trim();
        let split = t
            .find(|ch: char| ch.is_ascii_alphabetic())
            .ok_or_else(|| format!("`{t}` has no unit suffix; write e.g. \"100 G\" or \"2 kHz\""))?;
        let (num, unit) = t.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("`{t}`: cannot parse `{}` as a number", num.trim()))?;
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(format!("`{t}` has an empty unit"));
        }
        Ok(Quantity { value, unit: unit.to_string() })
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.to_string()
    }
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Quantity;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a unit-suffixed string like \"100 G\", \"2 kHz\" or \"20 us\"")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Quantity, E> {
                Quantity::try_from(s.to_string()).map_err(E::custom)
            }
        }
        d.deserialize_str(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_nuclei: Option<usize>,
    /// pair coupling in the (b/2) two-spin convention
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Quantity>,
    /// named hyperfine set for central-spin quenches
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// run the same experiment for several chain lengths
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BxSection {
    Constant {
        bx0: Quantity,
    },
    Oscillating {
        bx0: Quantity,
        amplitude: Quantity,
        #[serde(skip_serializing_if = "Option::is_none")]
        period: Option<Quantity>,
        /// one run per listed period
        #[serde(skip_serializing_if = "Option::is_none")]
        periods: Option<Vec<Quantity>>,
    },
    Gaussian {
        amplitude: Quantity,
        center: Quantity,
        sigma: Quantity,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSection {
    pub bz: Quantity,
    pub bx: BxSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_end: Quantity,
    pub n_output: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_internal: Option<Quantity>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    /// nuclear basis label, e.g. "dd" or "ud"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    /// central-spin quench target manifold (+1 or -1)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms_target: Option<i8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub bx_min: Quantity,
    pub bx_max: Quantity,
    pub nx: usize,
    pub bz_min: Quantity,
    pub bz_max: Quantity,
    pub nz: usize,
    pub horizon: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_output: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FisherSection {
    /// finite-difference step; defaults to max(1e-4 * coupling, 1 Hz)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Quantity>,
    /// 1-based nucleus number whose up-probability is read out
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_site: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RelaxationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2n_star: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2e: Option<Quantity>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

pub const SCENARIOS: [&str; 6] =
    ["field-quench", "central-quench", "sweep", "fisher", "validate", "entanglement"];

pub const ALIASES: [&str; 9] =
    ["fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6", "fig8", "fig9", "fig10"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quench: Option<QuenchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fisher: Option<FisherSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<RelaxationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl ExperimentConfig {
    /// Parse, alias-expand and validate a config from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Config(format!("{inner}"))
            } else {
                Error::Config(format!("at key `{path}`: {inner}"))
            }
        })?;
        let resolved = raw.expand()?;
        resolved.validate()?;
        Ok(resolved)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Built-in parameter set for a scenario name or figure alias.
    pub fn preset(name: &str) -> Option<Self> {
        presets::preset(name)
    }

    /// Replace the alias scenario with its preset, keeping any sections the
    /// file supplied; fill missing sections of base scenarios with defaults.
    fn expand(self) -> Result<Self> {
        let name = self.scenario.clone();
        let Some(base) = presets::preset(&name) else {
            return Err(Error::UnknownScenario(name));
        };
        Ok(ExperimentConfig {
            scenario: base.scenario,
            system: self.system.or(base.system),
            fields: self.fields.or(base.fields),
            grid: self.grid.or(base.grid),
            quench: self.quench.or(base.quench),
            sweep: self.sweep.or(base.sweep),
            fisher: self.fisher.or(base.fisher),
            relaxation: self.relaxation.or(base.relaxation),
            output: self.output.or(base.output),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return Err(Error::UnknownScenario(self.scenario.clone()));
        }
        if let Some(f) = &self.fields {
            self.schedules_checked(f)?;
        }
        if let Some(g) = &self.grid {
            self.time_grid_from(g)?;
        }
        if self.scenario == "sweep" && self.sweep.is_none() {
            return Err(Error::Config("sweep scenario needs a `sweep` section".into()));
        }
        if let Some(q) = &self.quench {
            if let Some(ms) = q.ms_target {
                if !matches!(ms, -1 | 1) {
                    return Err(Error::Config(format!("quench.ms_target must be +1 or -1, got {ms}")));
                }
            }
        }
        Ok(())
    }

    pub fn n_nuclei(&self) -> usize {
        self.system.as_ref().and_then(|s| s.n_nuclei).unwrap_or(2)
    }

    /// Pair coupling in rad/s ((b/2) two-spin convention).
    pub fn coupling_rad(&self) -> Result<f64> {
        match self.system.as_ref().and_then(|s| s.coupling.as_ref()) {
            Some(q) => q.as_rad_per_s(),
            None => Ok(TWO_PI * 2e3),
        }
    }

    pub fn initial_state_label(&self) -> String {
        self.quench
            .as_ref()
            .and_then(|q| q.initial_state.clone())
            .unwrap_or_else(|| "d".repeat(self.n_nuclei()))
    }

    pub fn ms_target(&self) -> i8 {
        self.quench.as_ref().and_then(|q| q.ms_target).unwrap_or(1)
    }

    /// One field schedule per requested variant: single entry unless an
    /// oscillating waveform lists several periods.
    pub fn field_schedules(&self) -> Result<Vec<(String, FieldSchedule)>> {
        let fields = self
            .fields
            .as_ref()
            .ok_or_else(|| Error::Config("this scenario needs a `fields` section".into()))?;
        self.schedules_checked(fields)
    }

    fn schedules_checked(&self, fields: &FieldsSection) -> Result<Vec<(String, FieldSchedule)>> {
        let bz = fields.bz.as_gauss()?;
        let mut out = Vec::new();
        match &fields.bx {
            BxSection::Constant { bx0 } => {
                let s = FieldSchedule { bz, bx: BxWaveform::Constant { bx0: bx0.as_gauss()? } };
                out.push(("run".to_string(), s));
            }
            BxSection::Oscillating { bx0, amplitude, period, periods } => {
                let bx0 = bx0.as_gauss()?;
                let amplitude = amplitude.as_gauss()?;
                let mut list: Vec<Quantity> = Vec::new();
                if let Some(p) = period {
                    list.push(p.clone());
                }
                if let Some(ps) = periods {
                    list.extend(ps.iter().cloned());
                }
                if list.is_empty() {
                    return Err(Error::Config(
                        "oscillating bx needs `period` or `periods`".into(),
                    ));
                }
                for p in list {
                    let period_s = p.as_seconds()?;
                    let tag = format!("T{:.4}us", period_s * 1e6);
                    let s = FieldSchedule {
                        bz,
                        bx: BxWaveform::Oscillating { bx0, amplitude, period: period_s },
                    };
                    s.validate()?;
                    out.push((tag, s));
                }
            }
            BxSection::Gaussian { amplitude, center, sigma } => {
                let s = FieldSchedule {
                    bz,
                    bx: BxWaveform::Gaussian {
                        amplitude: amplitude.as_gauss()?,
                        center: center.as_seconds()?,
                        sigma: sigma.as_seconds()?,
                    },
                };
                s.validate()?;
                out.push(("run".to_string(), s));
            }
        }
        Ok(out)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let grid = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::Config("this scenario needs a `grid` section".into()))?;
        self.time_grid_from(grid)
    }

    fn time_grid_from(&self, grid: &GridSection) -> Result<TimeGrid> {
        let t_end = grid.t_end.as_seconds()?;
        match &grid.dt_internal {
            Some(dt) => TimeGrid::new(0.0, t_end, grid.n_output, dt.as_seconds()?),
            None => TimeGrid::uniform(t_end, grid.n_output),
        }
    }

    pub fn svg_requested(&self) -> bool {
        self.output.as_ref().and_then(|o| o.svg).unwrap_or(false)
    }

    pub fn output_dir(&self) -> Option<String> {
        self.output.as_ref().and_then(|o| o.dir.clone())
    }

    /// Hex SHA-256 of the resolved config's canonical JSON.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

mod presets {
    use super::*;

    fn q(value: f64, unit: &str) -> Quantity {
        Quantity::new(value, unit)
    }

    fn grid(t_end_us: f64, n_output: usize) -> Option<GridSection> {
        Some(GridSection { t_end: q(t_end_us, "us"), n_output, dt_internal: Some(q(1.0, "ns")) })
    }

    fn constant_fields(bx0: f64, bz: f64) -> Option<FieldsSection> {
        Some(FieldsSection { bz: q(bz, "G"), bx: BxSection::Constant { bx0: q(bx0, "G") } })
    }

    fn two_spin_system(coupling_khz: f64) -> Option<SystemSection> {
        Some(SystemSection {
            n_nuclei: Some(2),
            coupling: Some(q(coupling_khz, "kHz")),
            dataset: None,
            chain_sizes: None,
        })
    }

    pub fn preset(name: &str) -> Option<ExperimentConfig> {
        let mut cfg = ExperimentConfig {
            scenario: "field-quench".into(),
            system: two_spin_system(2.0),
            fields: constant_fields(100.0, 50.0),
            grid: grid(20.0, 2001),
            quench: Some(QuenchSection { initial_state: Some("dd".into()), ms_target: None }),
            sweep: None,
            fisher: None,
            relaxation: None,
            output: None,
        };
        let tc1_us = TC1_SECONDS * 1e6;
        match name {
            "field-quench" | "fig2" => {}
            "central-quench" | "fig4" => {
                cfg.scenario = "central-quench".into();
                cfg.system = Some(SystemSection {
                    n_nuclei: Some(2),
                    coupling: Some(q(2.0, "kHz")),
                    dataset: Some("dreau".into()),
                    chain_sizes: None,
                });
                cfg.fields = None;
                cfg.grid = grid(60.0, 6001);
                cfg.quench = Some(QuenchSection {
                    initial_state: Some("dd".into()),
                    ms_target: Some(1),
                });
            }
            "sweep" | "fig3" => {
                cfg.scenario = "sweep".into();
                cfg.fields = None;
                cfg.grid = None;
                cfg.quench = None;
                cfg.sweep = Some(SweepSection {
                    bx_min: q(0.0, "G"),
                    bx_max: q(300.0, "G"),
                    nx: 60,
                    bz_min: q(0.0, "G"),
                    bz_max: q(100.0, "G"),
                    nz: 60,
                    horizon: q(20.0, "us"),
                    n_output: Some(2000),
                });
            }
            "fisher" => {
                cfg.scenario = "fisher".into();
                cfg.fields = constant_fields(0.0, 50.0);
                cfg.quench = Some(QuenchSection { initial_state: Some("ud".into()), ms_target: None });
                cfg.fisher = Some(FisherSection { delta: None, measured_site: Some(1) });
            }
            "fig6" => {
                cfg.scenario = "fisher".into();
                cfg.fields = Some(FieldsSection {
                    bz: q(50.0, "G"),
                    bx: BxSection::Gaussian {
                        amplitude: q(200.0, "G"),
                        center: q(3.0 * tc1_us, "us"),
                        sigma: q(1.5 * tc1_us, "us"),
                    },
                });
                cfg.quench = Some(QuenchSection { initial_state: Some("dd".into()), ms_target: None });
                cfg.fisher = Some(FisherSection { delta: None, measured_site: Some(1) });
            }
            "validate" => {
                cfg.scenario = "validate".into();
                cfg.relaxation = Some(RelaxationSection {
                    t2n_star: Some(q(0.5, "ms")),
                    t2e: Some(q(7.0, "us")),
                });
            }
            "fig5a" => {
                cfg.fields = Some(FieldsSection {
                    bz: q(50.0, "G"),
                    bx: BxSection::Oscillating {
                        bx0: q(50.0, "G"),
                        amplitude: q(50.0, "G"),
                        period: None,
                        periods: Some(vec![q(2.0 * tc1_us, "us"), q(6.0 * tc1_us, "us")]),
                    },
                });
                cfg.grid = grid(15.0, 1501);
            }
            "fig5b" => {
                cfg.fields = Some(FieldsSection {
                    bz: q(50.0, "G"),
                    bx: BxSection::Gaussian {
                        amplitude: q(200.0, "G"),
                        center: q(3.0 * tc1_us, "us"),
                        sigma: q(1.5 * tc1_us, "us"),
                    },
                });
                cfg.grid = grid(25.0, 2501);
            }
            "entanglement" | "fig8" => {
                cfg.scenario = "entanglement".into();
                cfg.system = two_spin_system(8.0);
                cfg.fields = constant_fields(100.0, 5.0);
                cfg.grid = grid(40.0, 4001);
            }
            "fig9" => {
                cfg.scenario = "entanglement".into();
                cfg.system = Some(SystemSection {
                    n_nuclei: Some(3),
                    coupling: Some(q(8.0, "kHz")),
                    dataset: None,
                    chain_sizes: None,
                });
                cfg.fields = constant_fields(100.0, 5.0);
                cfg.grid = grid(40.0, 2001);
                cfg.quench = Some(QuenchSection { initial_state: Some("ddd".into()), ms_target: None });
            }
            "fig10" => {
                cfg.system = Some(SystemSection {
                    n_nuclei: None,
                    coupling: Some(q(2.0, "kHz")),
                    dataset: None,
                    chain_sizes: Some(vec![2, 4, 8]),
                });
                cfg.quench = Some(QuenchSection { initial_state: None, ms_target: None });
            }
            _ => return None,
        }
        Some(cfg)
    }
}
