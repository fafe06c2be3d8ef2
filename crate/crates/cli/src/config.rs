//! Sweep configuration and the figure presets.

use serde::{Deserialize, Serialize};
use twobath::dissipators::RateConvention;
use twobath::langevin::QuadratureConfig;
use twobath::model::CouplingKind;
use twobath::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    LocalME,
    GlobalME,
    Langevin,
    Gibbs,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::LocalME => "LocalME",
            Method::GlobalME => "GlobalME",
            Method::Langevin => "Langevin",
            Method::Gibbs => "Gibbs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Occupation1,
    Occupation2,
    MutualInformation,
}

impl Observable {
    pub fn label(self) -> &'static str {
        match self {
            Observable::Occupation1 => "occupation1",
            Observable::Occupation2 => "occupation2",
            Observable::MutualInformation => "mutual_information",
        }
    }
}

/// How (T1, T2) follow from ΔT = T2 − T1 and the base temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureAnchor {
    /// T1 = base.t1, T2 = T1 + ΔT.
    FirstFixed,
    /// T2 = base.t2, T1 = T2 − ΔT.
    SecondFixed,
    /// ΔT ≥ 0: T1 = base.t1, T2 = T1 + ΔT; ΔT < 0: T2 = base.t2, T1 = T2 − ΔT.
    SignDependent,
}

impl TemperatureAnchor {
    pub fn temperatures(self, base: &BaseParams, delta_t: f64) -> (f64, f64) {
        match self {
            TemperatureAnchor::FirstFixed => (base.t1, base.t1 + delta_t),
            TemperatureAnchor::SecondFixed => (base.t2 - delta_t, base.t2),
            TemperatureAnchor::SignDependent if delta_t >= 0.0 => (base.t1, base.t1 + delta_t),
            TemperatureAnchor::SignDependent => (base.t2 - delta_t, base.t2),
        }
    }
}

/// Model parameters shared by every grid point; λ and the temperatures are set per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Prefix of the output files.
    pub name: String,
    pub base: BaseParams,
    pub kind: Vec<CouplingKind>,
    pub methods: Vec<Method>,
    pub lambda_grid: Vec<f64>,
    #[serde(rename = "deltaT_list")]
    pub delta_t_list: Vec<f64>,
    pub temperature_anchor: TemperatureAnchor,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    pub output_path: String,
    #[serde(default)]
    pub rate_convention: RateConvention,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// The ΔT list is a stand-in for values the figure legends do not state.
    #[serde(default)]
    pub legend_unverified: bool,
}

fn default_workers() -> usize {
    1
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.kind.is_empty() {
            return bad("kind must list at least one coupling kind".into());
        }
        if self.observables.is_empty() {
            return bad("observables must not be empty".into());
        }
        if let Some(x) = self.lambda_grid.iter().find(|x| !(**x >= 0.0 && **x < 1.0)) {
            return bad(format!("lambda_grid entries must lie in [0, 1), got {x}"));
        }
        if self.delta_t_list.iter().any(|x| !x.is_finite()) {
            return bad("deltaT_list entries must be finite".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name {:?} is not a valid file prefix", self.name));
        }
        for &dt in &self.delta_t_list {
            let (t1, t2) = self.temperature_anchor.temperatures(&self.base, dt);
            if !(t1 > 0.0 && t2 > 0.0) {
                return bad(format!("deltaT = {dt} gives non-positive temperatures ({t1}, {t2})"));
            }
        }
        self.quadrature.validate()
    }
}

pub const PRESETS: [&str; 7] = ["fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "figS1"];

pub const HIGH_TEMPERATURE: f64 = 98.0;
pub const LOW_TEMPERATURE: f64 = 1.96;

/// 60 points on [0, 0.95] followed by 0.96 … 0.99.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..60).map(|k| 0.95 * k as f64 / 59.0).collect();
    grid.extend([0.96, 0.97, 0.98, 0.99]);
    grid
}

fn high_t_biases() -> Vec<f64> {
    vec![-60.0, -30.0, -10.0, 10.0, 30.0, 60.0]
}

/// High-temperature biases scaled by LOW_TEMPERATURE / HIGH_TEMPERATURE.
fn low_t_biases() -> Vec<f64> {
    vec![-1.2, -0.6, -0.2, 0.2, 0.6, 1.2]
}

pub fn preset(id: &str) -> Result<SweepConfig> {
    use CouplingKind::{PositionPosition as Pp, RotatingWave as Rw};
    use Method::*;
    let base = |t: f64| BaseParams { omega1: 5.0, omega2: 2.0, gamma1: 1.5e-4, gamma2: 1.5e-4, t1: t, t2: t };
    let make = |kind: Vec<CouplingKind>, methods: Vec<Method>, t: f64, biases: Vec<f64>, anchor, observables: Vec<Observable>, unverified| SweepConfig {
        name: id.to_string(),
        base: base(t),
        kind,
        methods,
        lambda_grid: default_lambda_grid(),
        delta_t_list: biases,
        temperature_anchor: anchor,
        observables,
        quadrature: QuadratureConfig::default(),
        output_path: ".".into(),
        rate_convention: RateConvention::default(),
        workers: 1,
        legend_unverified: unverified,
    };
    let occupations = vec![Observable::Occupation1, Observable::Occupation2];
    let ratio_methods = vec![LocalME, GlobalME, Langevin];
    let cfg = match id {
        "fig2" => make(vec![Pp, Rw], vec![LocalME, GlobalME, Langevin, Gibbs], HIGH_TEMPERATURE, vec![0.0], TemperatureAnchor::FirstFixed, occupations, false),
        "fig3a" => make(vec![Pp], ratio_methods, HIGH_TEMPERATURE, high_t_biases(), TemperatureAnchor::SignDependent, occupations, true),
        "fig3b" => make(vec![Pp], ratio_methods, LOW_TEMPERATURE, low_t_biases(), TemperatureAnchor::SecondFixed, occupations, true),
        "fig4a" => make(vec![Rw], ratio_methods, HIGH_TEMPERATURE, high_t_biases(), TemperatureAnchor::SignDependent, occupations, true),
        "fig4b" => make(vec![Rw], ratio_methods, LOW_TEMPERATURE, low_t_biases(), TemperatureAnchor::SecondFixed, occupations, true),
        "fig5" => make(
            vec![Pp, Rw],
            vec![LocalME, GlobalME, Langevin, Gibbs],
            HIGH_TEMPERATURE,
            vec![0.0],
            TemperatureAnchor::FirstFixed,
            vec![Observable::MutualInformation, Observable::Occupation1],
            false,
        ),
        "figS1" => make(vec![Pp, Rw], ratio_methods, HIGH_TEMPERATURE, high_t_biases(), TemperatureAnchor::SignDependent, occupations, true),
        _ => return Err(Error::UnknownPreset(id.to_string())),
    };
    Ok(cfg)
}
