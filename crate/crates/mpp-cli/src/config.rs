//! JSON scenario configs. Every field is optional and defaults to the
//! built-in "paper-5.2" stationary-lead-vehicle scenario; speeds accept
//! either a plain number (m/s) or `{"value": .., "unit": "km/h"|"m/s"}`.

use serde::Deserialize;

use mpp::simulator::{Controller, LeaderProfile, MonitorKind, ScenarioConfig};
use mpp::units::kmh_to_ms;
use mpp::ModelParams;

/// The built-in parameter preset name.
pub const PRESET: &str = "paper-5.2";

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Plain(f64),
    WithUnit { value: f64, unit: SpeedUnit },
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum SpeedUnit {
    #[serde(rename = "m/s")]
    MetersPerSecond,
    #[serde(rename = "km/h")]
    KilometersPerHour,
}

impl Quantity {
    pub fn speed_ms(&self) -> f64 {
        match *self {
            Quantity::Plain(v) => v,
            Quantity::WithUnit {
                value,
                unit: SpeedUnit::MetersPerSecond,
            } => value,
            Quantity::WithUnit {
                value,
                unit: SpeedUnit::KilometersPerHour,
            } => kmh_to_ms(value),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ParamsSpec {
    Preset(String),
    Overrides(ParamOverrides),
}

// hand-rolled instead of #[serde(untagged)] so override errors keep the
// offending key in the message
impl<'de> serde::Deserialize<'de> for ParamsSpec {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(name) => Ok(ParamsSpec::Preset(name)),
            other => serde_json::from_value(other)
                .map(ParamsSpec::Overrides)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub zeta: Option<f64>,
    pub zeta_min: Option<f64>,
    pub tau: Option<f64>,
    pub tau_react: Option<f64>,
    pub tau_react2: Option<f64>,
    pub mu: Option<Quantity>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub beta_leader: Option<f64>,
    pub dt: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, p: &mut ModelParams) {
        let set = |dst: &mut f64, src: &Option<f64>| {
            if let Some(v) = src {
                *dst = *v;
            }
        };
        set(&mut p.zeta, &self.zeta);
        set(&mut p.zeta_min, &self.zeta_min);
        set(&mut p.tau, &self.tau);
        set(&mut p.tau_react, &self.tau_react);
        set(&mut p.tau_react2, &self.tau_react2);
        if let Some(q) = &self.mu {
            p.mu = q.speed_ms();
        }
        set(&mut p.alpha, &self.alpha);
        set(&mut p.beta, &self.beta);
        set(&mut p.beta_leader, &self.beta_leader);
        set(&mut p.dt, &self.dt);
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialOverrides {
    pub t: Option<f64>,
    pub x_follower: Option<f64>,
    pub x_leader: Option<f64>,
    pub v: Option<Quantity>,
    pub v_leader: Option<Quantity>,
}

/// Leader profile with unit-aware speeds; recorded series are plain m/s.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeaderSpec {
    Stationary,
    ConstantSpeed { v: Quantity },
    PiecewiseBraking { segments: Vec<(f64, f64)> },
    Recorded { speeds: Vec<f64> },
}

impl LeaderSpec {
    fn to_profile(&self) -> LeaderProfile {
        match self {
            LeaderSpec::Stationary => LeaderProfile::Stationary,
            LeaderSpec::ConstantSpeed { v } => LeaderProfile::ConstantSpeed { v: v.speed_ms() },
            LeaderSpec::PiecewiseBraking { segments } => LeaderProfile::PiecewiseBraking {
                segments: segments.clone(),
            },
            LeaderSpec::Recorded { speeds } => LeaderProfile::Recorded {
                speeds: speeds.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub params: Option<ParamsSpec>,
    pub initial: Option<InitialOverrides>,
    pub leader: Option<LeaderSpec>,
    pub duration: Option<f64>,
    pub controller: Option<Controller>,
    pub monitors: Option<Vec<MonitorKind>>,
    pub stride: Option<usize>,
    pub compliant_leader: Option<bool>,
}

/// Resolves a params spec (preset name or overrides) against the preset.
pub fn resolve_params(spec: Option<&ParamsSpec>) -> Result<ModelParams, String> {
    let mut p = ModelParams::reference();
    match spec {
        None => {}
        Some(ParamsSpec::Preset(name)) if name == PRESET => {}
        Some(ParamsSpec::Preset(name)) => {
            return Err(format!("unknown parameter preset '{name}'; known: {PRESET}"));
        }
        Some(ParamsSpec::Overrides(o)) => o.apply(&mut p),
    }
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

impl ConfigDoc {
    /// Builds the full scenario by layering the document over the default
    /// stationary-lead-vehicle scenario.
    pub fn into_scenario(self) -> Result<ScenarioConfig, String> {
        let mut cfg = ScenarioConfig::reference_slvp();
        cfg.params = resolve_params(self.params.as_ref())?;
        if let Some(init) = &self.initial {
            let st = &mut cfg.initial;
            if let Some(t) = init.t {
                st.t = t;
            }
            if let Some(x) = init.x_follower {
                st.x_follower = x;
            }
            if let Some(x) = init.x_leader {
                st.x_leader = x;
            }
            if let Some(q) = &init.v {
                st.v = q.speed_ms();
            }
            if let Some(q) = &init.v_leader {
                st.v_leader = q.speed_ms();
            }
        }
        if let Some(leader) = &self.leader {
            cfg.leader = leader.to_profile();
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if let Some(c) = self.controller {
            cfg.controller = c;
        }
        if let Some(m) = self.monitors {
            cfg.monitors = m;
        }
        if let Some(s) = self.stride {
            cfg.stride = s;
        }
        if let Some(c) = self.compliant_leader {
            cfg.compliant_leader = c;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Parses a config document and resolves it to a runnable scenario.
pub fn parse_scenario(json: &str) -> Result<ScenarioConfig, String> {
    let doc: ConfigDoc = serde_json::from_str(json).map_err(|e| e.to_string())?;
    doc.into_scenario()
}
