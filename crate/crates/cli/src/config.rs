//! Experiment configuration: JSON file, then `--override` flags, then validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sli_core::linear::{scalar_mode, wave_solution};
use sli_core::{GreensChoice, Jet, ModelParams, Profile, ScalarKind, VectorKind, Window};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<sli_core::Error> for ConfigError {
    fn from(e: sli_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda_a: f64,
    pub lambda_i: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// Defaults to `2 lambda_A + 4 lambda_I`.
    pub nu: Option<f64>,
    /// Accept a `nu` that breaks the Euler-Lagrange equations.
    pub force_nu: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        ModelConfig {
            lambda_a: p.lambda_a,
            lambda_i: p.lambda_i,
            delta: p.delta,
            epsilon: p.epsilon,
            nu: None,
            force_nu: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub t_min: i64,
    pub t_max: i64,
    pub x_min: i64,
    pub x_max: i64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            t_min: -40,
            t_max: 40,
            x_min: -80,
            x_max: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetKind {
    RightMover,
    LeftMover,
    ScalarMode,
    Bump,
}

/// One summand of a jet. `values`, when given, replaces the triangular bump
/// and starts at `center`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetSpec {
    pub kind: JetKind,
    #[serde(default)]
    pub center: i64,
    #[serde(default = "one_i64")]
    pub width: i64,
    #[serde(default = "one_f64")]
    pub amplitude: f64,
    /// Reference slice of a scalar mode, or the slice carrying a bump.
    #[serde(default)]
    pub time: i64,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn one_i64() -> i64 {
    1
}

fn one_f64() -> f64 {
    1.0
}

impl JetSpec {
    pub fn new(kind: JetKind, center: i64, width: i64, amplitude: f64) -> Self {
        JetSpec {
            kind,
            center,
            width,
            amplitude,
            time: 0,
            values: None,
        }
    }

    fn profile(&self) -> Profile {
        match &self.values {
            Some(v) => Profile::Tabulated {
                start: self.center,
                values: v.iter().map(|x| x * self.amplitude).collect(),
            },
            None => Profile::bump(self.center, self.width, self.amplitude),
        }
    }

    fn build(&self, p: &ModelParams, w: &Window) -> Result<Jet, ConfigError> {
        let prof = self.profile();
        let jet = match self.kind {
            JetKind::RightMover => wave_solution(&Profile::zero(), &prof, w)?,
            JetKind::LeftMover => wave_solution(&prof, &Profile::zero(), w)?,
            JetKind::ScalarMode => scalar_mode(&prof, self.time, p, w)?,
            JetKind::Bump => {
                if !w.times().contains(&self.time) {
                    return Err(bad(format!("bump slice {} outside the window", self.time)));
                }
                let mut j = Jet::zero(*w);
                for x in w.x_min..=w.x_max {
                    j.u_phi.set(sli_core::Site::new(self.time, x), prof.eval(x));
                }
                j
            }
        };
        Ok(jet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorName {
    #[default]
    Retarded,
    Advanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarName {
    #[default]
    Banded,
    Frequency,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreensConfig {
    pub vector: VectorName,
    pub scalar: ScalarName,
}

impl GreensConfig {
    pub fn choice(&self) -> GreensChoice {
        let v = match self.vector {
            VectorName::Retarded => VectorKind::Retarded,
            VectorName::Advanced => VectorKind::Advanced,
        };
        let s = match self.scalar {
            ScalarName::Banded => ScalarKind::BandedSolve,
            ScalarName::Frequency => ScalarKind::Frequency,
        };
        GreensChoice::new(v, s)
    }
}

/// Inclusive slice range `from..=to`. Past regions for sweeps, a slab for
/// `perturb-verify` and `greens-dependence`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceConfig {
    pub from: i64,
    pub to: i64,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig { from: -5, to: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub el: f64,
    pub linear: f64,
    pub green_defect: f64,
    pub backend_agreement: f64,
    pub sigma_closed: f64,
    pub sigma_spread: f64,
    pub symm_closed: f64,
    pub symm_volume: f64,
    pub conservation: f64,
    pub dependence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            el: 1e-12,
            linear: 1e-10,
            green_defect: 1e-10,
            backend_agreement: 1e-9,
            sigma_closed: 1e-12,
            sigma_spread: 1e-10,
            symm_closed: 1e-12,
            symm_volume: 1e-10,
            conservation: 1e-9,
            dependence: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub window: WindowConfig,
    pub u: Vec<JetSpec>,
    pub v: Vec<JetSpec>,
    /// Images of the rank-one modifiers in `greens-dependence`.
    pub modifier_image: Vec<JetSpec>,
    pub modifier_count: usize,
    pub greens: GreensConfig,
    pub slices: SliceConfig,
    /// Truncation order `P` of the perturbation hierarchy.
    pub order: usize,
    pub seed: u64,
    /// Random dual jets drawn by `greens-verify`.
    pub trials: usize,
    pub el_samples: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        use JetKind::*;
        let pi = std::f64::consts::PI;
        ExperimentConfig {
            model: ModelConfig::default(),
            window: WindowConfig::default(),
            u: vec![
                JetSpec::new(RightMover, -3, 2, 1.0),
                JetSpec::new(LeftMover, 2, 2, 0.5),
            ],
            v: vec![
                JetSpec::new(LeftMover, 3, 3, 0.8),
                JetSpec::new(RightMover, -1, 1, -0.6),
            ],
            modifier_image: vec![
                JetSpec::new(RightMover, 1, 2, 1.0),
                JetSpec::new(ScalarMode, 0, 3, 0.5),
            ],
            modifier_count: 5,
            greens: GreensConfig::default(),
            slices: SliceConfig::default(),
            order: 3,
            seed: 1,
            trials: 20,
            el_samples: vec![0.0, pi / 4.0, -pi / 4.0, pi / 2.0, -pi / 2.0, pi],
            tolerances: Tolerances::default(),
        }
    }
}

/// Validated run inputs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub window: Window,
    pub u: Jet,
    pub v: Jet,
    pub image: Jet,
}

fn set_path(root: &mut Value, key: &str, raw: &str) -> Result<(), ConfigError> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| bad(format!("override key `{key}` does not name a field")))?;
        if !obj.contains_key(*part) {
            return Err(bad(format!("unknown override key `{key}`")));
        }
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.get_mut(*part).expect("checked above");
    }
    Ok(())
}

impl ExperimentConfig {
    /// Reads `path` (or the defaults) and applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let base = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| bad(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str::<ExperimentConfig>(&text)
                    .map_err(|e| bad(format!("{}: {e}", p.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if overrides.is_empty() {
            return Ok(base);
        }
        let mut tree = serde_json::to_value(&base).map_err(|e| bad(e.to_string()))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| bad(format!("override `{o}` is not key=value")))?;
            set_path(&mut tree, k.trim(), v.trim())?;
        }
        serde_json::from_value(tree).map_err(|e| bad(format!("after overrides: {e}")))
    }

    pub fn validate(self) -> Result<Experiment, ConfigError> {
        let m = &self.model;
        let mut params = ModelParams::new(m.lambda_a, m.lambda_i, m.delta, m.epsilon)?;
        if let Some(nu) = m.nu {
            let want = params.default_nu();
            if nu != want && !m.force_nu {
                return Err(bad(format!(
                    "nu = {nu} violates the Euler-Lagrange equations (needs {want}); set model.force_nu to run anyway"
                )));
            }
            params = params.with_nu(nu);
        }
        let wc = &self.window;
        let window = Window::new(wc.t_min, wc.t_max, wc.x_min, wc.x_max)?;
        if !(1..=3).contains(&self.order) {
            return Err(bad(format!("order must lie in 1..=3, got {}", self.order)));
        }
        let s = &self.slices;
        if s.from > s.to || s.from <= wc.t_min || s.to >= wc.t_max {
            return Err(bad(format!(
                "slice range [{}, {}] must lie strictly inside [{}, {}]",
                s.from, s.to, wc.t_min, wc.t_max
            )));
        }
        let build = |specs: &[JetSpec], name: &str| -> Result<Jet, ConfigError> {
            let mut jet = Jet::zero(window);
            for spec in specs {
                let part = spec
                    .build(&params, &window)
                    .map_err(|e| bad(format!("jet `{name}`: {e}")))?;
                jet.axpy(1.0, &part);
            }
            check_margin(&jet, &window, self.order)
                .map_err(|e| bad(format!("jet `{name}`: {e}")))?;
            Ok(jet)
        };
        let u = build(&self.u, "u")?;
        let v = build(&self.v, "v")?;
        let image = build(&self.modifier_image, "modifier_image")?;
        Ok(Experiment {
            params,
            window,
            u,
            v,
            image,
            config: self,
        })
    }
}

/// Jets must vanish on the `order + 1` outermost columns.
fn check_margin(jet: &Jet, w: &Window, order: usize) -> Result<(), ConfigError> {
    let m = order as i64 + 1;
    for t in w.times() {
        for x in (w.x_min..w.x_min + m).chain(w.x_max - m + 1..=w.x_max) {
            let s = sli_core::Site::new(t, x);
            if jet.a.at(s) != 0.0 || jet.u_phi.at(s) != 0.0 {
                return Err(bad(format!(
                    "support comes within {m} columns of the spatial edge at {s:?}"
                )));
            }
        }
    }
    Ok(())
}
