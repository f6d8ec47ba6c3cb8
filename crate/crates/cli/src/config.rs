//! Experiment configuration: TOML input, validation with path-qualified messages,
//! and conversion into core objects.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nek_core::geometry::{DomainModel, WindowSpec};
use nek_core::green_kernel::{BallNoDriftGreen, GreenProvider, UserSuppliedGreen};
use nek_core::mc_escape::{BiasModel, BoundaryMonitoring, Reflection, SDEConfig, StartPoint};
use nek_core::potential::{PotentialField, TabulatedPotential};
use nek_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    domain: RawDomain,
    potential: RawPotential,
    window: RawWindow,
    green: RawGreen,
    mc: RawMc,
    kernel: RawKernel,
    operators: RawOperators,
    outputs: RawOutputs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDomain {
    radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPotential {
    kind: Option<String>,
    value: Option<f64>,
    beta: Option<f64>,
    axis: Option<Vec<f64>>,
    file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawWindow {
    theta: Option<f64>,
    phi: Option<f64>,
    eps: Option<Vec<f64>>,
    a: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGreen {
    provider: Option<String>,
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawStart {
    Name(String),
    Point(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMc {
    dt: Option<f64>,
    n_paths: Option<i64>,
    seed: Option<u64>,
    start: Option<RawStart>,
    max_time: Option<f64>,
    reflection: Option<String>,
    monitoring: Option<String>,
    refinement_levels: Option<i64>,
    bias_model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawKernel {
    direction_angle: Option<f64>,
    distances: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOperators {
    a: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutputs {
    directory: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    LinearAxis { beta: f64, axis: [f64; 3] },
    Tabulated { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum GreenSpec {
    Ball,
    User { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowConfig {
    pub theta: f64,
    pub phi: f64,
    pub eps: Vec<f64>,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub start: StartPoint<f64>,
    pub max_time: Option<f64>,
    pub reflection: Reflection,
    pub monitoring: BoundaryMonitoring,
    pub refinement_levels: usize,
    pub bias_model: BiasModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConfig {
    pub direction_angle: f64,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputsConfig {
    pub directory: Option<PathBuf>,
    pub formats: Vec<String>,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub radius: f64,
    pub potential: PotentialSpec,
    pub window: WindowConfig,
    pub green: GreenSpec,
    pub mc: McConfig,
    pub kernel: KernelConfig,
    pub operators_a: Vec<f64>,
    #[serde(skip)]
    pub outputs: OutputsConfig,
}

pub const DEFAULT_OPERATOR_A: [f64; 4] = [1.0, 0.75, 0.5, 0.25];
pub const OUTPUT_FORMATS: [&str; 2] = ["csv", "jsonl"];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            potential: PotentialSpec::Zero,
            window: WindowConfig {
                theta: 0.0,
                phi: 0.0,
                eps: vec![0.2, 0.1],
                a: vec![1.0],
            },
            green: GreenSpec::Ball,
            mc: McConfig {
                dt: 2e-3,
                n_paths: 100_000,
                seed: 20_240_601,
                start: StartPoint::UniformVolume,
                max_time: None,
                reflection: Reflection::NormalProjection,
                monitoring: BoundaryMonitoring::BridgeCorrected,
                refinement_levels: 3,
                bias_model: BiasModel::SqrtDt,
            },
            kernel: KernelConfig {
                direction_angle: 0.0,
                distances: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            },
            operators_a: DEFAULT_OPERATOR_A.to_vec(),
            outputs: OutputsConfig {
                directory: None,
                formats: OUTPUT_FORMATS.iter().map(|s| s.to_string()).collect(),
            },
        }
    }
}

/// Collects every validation problem before failing.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn finite(&mut self, path: &str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.push(path, format!("must be finite, got {v}"));
            false
        }
    }

    fn positive(&mut self, path: &str, v: f64) -> bool {
        if self.finite(path, v) && v > 0.0 {
            true
        } else {
            if v.is_finite() {
                self.push(path, format!("must be positive, got {v}"));
            }
            false
        }
    }
}

fn check_aspects(p: &mut Problems, path: &str, list: &[f64]) {
    if list.is_empty() {
        p.push(path, "must not be empty");
    }
    for (i, &a) in list.iter().enumerate() {
        if !(a > 0.0 && a <= 1.0) {
            p.push(&format!("{path}[{i}]"), format!("aspect ratio must lie in (0, 1], got {a}"));
        } else if a < nek_core::disk_operators::MIN_ASPECT {
            p.push(
                &format!("{path}[{i}]"),
                format!("aspect ratio below the supported minimum {}", nek_core::disk_operators::MIN_ASPECT),
            );
        }
    }
}

/// Checks a list of aspect ratios given on the command line.
pub fn validate_aspects(path: &str, list: &[f64]) -> Result<(), CliError> {
    let mut p = Problems::default();
    check_aspects(&mut p, path, list);
    if p.0.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(p.0.join("\n")))
    }
}

fn parse_choice<E: Copy>(p: &mut Problems, path: &str, value: &str, choices: &[(&str, E)]) -> Option<E> {
    match choices.iter().find(|(n, _)| *n == value) {
        Some((_, e)) => Some(*e),
        None => {
            let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
            p.push(path, format!("unknown value '{value}', expected one of {}", names.join(", ")));
            None
        }
    }
}

fn resolve(base: Option<&Path>, file: PathBuf) -> PathBuf {
    match base {
        Some(dir) if file.is_relative() => dir.join(file),
        _ => file,
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text, path.parent())
    }

    /// Parses and validates; relative file paths are resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut p = Problems::default();
        let mut cfg = Self::default();

        if let Some(r) = raw.domain.radius {
            p.positive("domain.radius", r);
            cfg.radius = r;
        }

        let pot = &raw.potential;
        let kind = pot.kind.as_deref().unwrap_or("zero");
        let axis = match &pot.axis {
            None => [0.0, 0.0, 1.0],
            Some(v) if v.len() == 3 && v.iter().all(|x| x.is_finite()) && v.iter().any(|&x| x != 0.0) => {
                [v[0], v[1], v[2]]
            }
            Some(_) => {
                p.push("potential.axis", "must be three finite numbers, not all zero");
                [0.0, 0.0, 1.0]
            }
        };
        let unused = |p: &mut Problems, field: &str, set: bool| {
            if set {
                p.push(&format!("potential.{field}"), format!("not used by kind '{kind}'"));
            }
        };
        cfg.potential = match kind {
            "zero" => {
                unused(&mut p, "value", pot.value.is_some());
                unused(&mut p, "beta", pot.beta.is_some());
                unused(&mut p, "file", pot.file.is_some());
                PotentialSpec::Zero
            }
            "constant" => {
                let value = pot.value.unwrap_or(0.0);
                p.finite("potential.value", value);
                unused(&mut p, "beta", pot.beta.is_some());
                unused(&mut p, "file", pot.file.is_some());
                PotentialSpec::Constant { value }
            }
            "linear_axis" => {
                let beta = match pot.beta {
                    Some(b) => b,
                    None => {
                        p.push("potential.beta", "required for kind 'linear_axis'");
                        0.0
                    }
                };
                p.finite("potential.beta", beta);
                unused(&mut p, "value", pot.value.is_some());
                unused(&mut p, "file", pot.file.is_some());
                PotentialSpec::LinearAxis { beta, axis }
            }
            "tabulated" => match &pot.file {
                Some(f) => PotentialSpec::Tabulated {
                    file: resolve(base, f.clone()),
                },
                None => {
                    p.push("potential.file", "required for kind 'tabulated'");
                    PotentialSpec::Zero
                }
            },
            other => {
                p.push(
                    "potential.kind",
                    format!("unknown kind '{other}', expected zero, constant, linear_axis or tabulated"),
                );
                PotentialSpec::Zero
            }
        };

        let w = &raw.window;
        if let Some(t) = w.theta {
            if p.finite("window.theta", t) && !(0.0..=std::f64::consts::PI).contains(&t) {
                p.push("window.theta", format!("polar angle must lie in [0, π], got {t}"));
            }
            cfg.window.theta = t;
        }
        if let Some(f) = w.phi {
            p.finite("window.phi", f);
            cfg.window.phi = f;
        }
        if let Some(eps) = &w.eps {
            if eps.is_empty() {
                p.push("window.eps", "must not be empty");
            }
            for (i, &e) in eps.iter().enumerate() {
                p.positive(&format!("window.eps[{i}]"), e);
                if i > 0 && !(e < eps[i - 1]) {
                    p.push(&format!("window.eps[{i}]"), "list must be strictly descending");
                }
            }
            cfg.window.eps = eps.clone();
        }
        if let Some(a) = &w.a {
            check_aspects(&mut p, "window.a", a);
            cfg.window.a = a.clone();
        }

        cfg.green = match raw.green.provider.as_deref().unwrap_or("ball") {
            "ball" => {
                if raw.green.file.is_some() {
                    p.push("green.file", "not used by provider 'ball'");
                }
                GreenSpec::Ball
            }
            "user" => match &raw.green.file {
                Some(f) => GreenSpec::User {
                    file: resolve(base, f.clone()),
                },
                None => {
                    p.push("green.file", "required for provider 'user'");
                    GreenSpec::Ball
                }
            },
            other => {
                p.push("green.provider", format!("unknown provider '{other}', expected ball or user"));
                GreenSpec::Ball
            }
        };

        let m = &raw.mc;
        if let Some(dt) = m.dt {
            p.positive("mc.dt", dt);
            cfg.mc.dt = dt;
        }
        if let Some(n) = m.n_paths {
            if n < 1 {
                p.push("mc.n_paths", format!("must be at least 1, got {n}"));
            } else {
                cfg.mc.n_paths = n as u64;
            }
        }
        if let Some(s) = m.seed {
            cfg.mc.seed = s;
        }
        match &m.start {
            None => {}
            Some(RawStart::Name(s)) if s == "uniform" => cfg.mc.start = StartPoint::UniformVolume,
            Some(RawStart::Name(s)) if s == "center" => cfg.mc.start = StartPoint::Point(Vec3::zero()),
            Some(RawStart::Name(s)) => {
                p.push("mc.start", format!("unknown start '{s}', expected uniform, center or [x, y, z]"))
            }
            Some(RawStart::Point(v)) => {
                if v.len() != 3 || !v.iter().all(|x| x.is_finite()) {
                    p.push("mc.start", "point must be three finite numbers");
                } else {
                    let x = Vec3::new(v[0], v[1], v[2]);
                    if x.norm() > cfg.radius {
                        p.push("mc.start", "point lies outside the domain");
                    }
                    cfg.mc.start = StartPoint::Point(x);
                }
            }
        }
        if let Some(t) = m.max_time {
            if p.positive("mc.max_time", t) && t <= cfg.mc.dt {
                p.push("mc.max_time", "must exceed mc.dt");
            }
            cfg.mc.max_time = Some(t);
        }
        if let Some(r) = &m.reflection {
            if let Some(v) = parse_choice(
                &mut p,
                "mc.reflection",
                r,
                &[("normal_projection", Reflection::NormalProjection), ("specular", Reflection::Specular)],
            ) {
                cfg.mc.reflection = v;
            }
        }
        if let Some(r) = &m.monitoring {
            if let Some(v) = parse_choice(
                &mut p,
                "mc.monitoring",
                r,
                &[
                    ("bridge_corrected", BoundaryMonitoring::BridgeCorrected),
                    ("discrete", BoundaryMonitoring::Discrete),
                ],
            ) {
                cfg.mc.monitoring = v;
            }
        }
        if let Some(l) = m.refinement_levels {
            if !(1..=8).contains(&l) {
                p.push("mc.refinement_levels", format!("must lie in 1..=8, got {l}"));
            } else {
                cfg.mc.refinement_levels = l as usize;
            }
        }
        if let Some(b) = &m.bias_model {
            if let Some(v) = parse_choice(
                &mut p,
                "mc.bias_model",
                b,
                &[("sqrt_dt", BiasModel::SqrtDt), ("linear_dt", BiasModel::LinearDt)],
            ) {
                cfg.mc.bias_model = v;
            }
        }

        if let Some(a) = raw.kernel.direction_angle {
            p.finite("kernel.direction_angle", a);
            cfg.kernel.direction_angle = a;
        }
        if let Some(d) = &raw.kernel.distances {
            if d.is_empty() {
                p.push("kernel.distances", "must not be empty");
            }
            for (i, &x) in d.iter().enumerate() {
                if p.positive(&format!("kernel.distances[{i}]"), x) && x >= std::f64::consts::PI * cfg.radius {
                    p.push(&format!("kernel.distances[{i}]"), "must be shorter than the antipodal distance");
                }
            }
            cfg.kernel.distances = d.clone();
        }

        if let Some(a) = &raw.operators.a {
            check_aspects(&mut p, "operators.a", a);
            cfg.operators_a = a.clone();
        }

        if let Some(d) = &raw.outputs.directory {
            cfg.outputs.directory = Some(resolve(base, d.clone()));
        }
        if let Some(f) = &raw.outputs.formats {
            for (i, x) in f.iter().enumerate() {
                if !OUTPUT_FORMATS.contains(&x.as_str()) {
                    p.push(&format!("outputs.formats[{i}]"), format!("unknown format '{x}', expected csv or jsonl"));
                }
            }
            if !f.iter().any(|x| x == "csv") {
                p.push("outputs.formats", "must include csv");
            }
            cfg.outputs.formats = f.clone();
        }

        if p.0.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config(p.0.join("\n")))
        }
    }

    pub fn domain(&self) -> Result<DomainModel<f64>, CliError> {
        Ok(DomainModel::unit_ball(self.radius)?)
    }

    pub fn potential_field(&self) -> Result<PotentialField<f64>, CliError> {
        Ok(match &self.potential {
            PotentialSpec::Zero => PotentialField::Zero,
            PotentialSpec::Constant { value } => PotentialField::Constant(*value),
            PotentialSpec::LinearAxis { beta, axis } => {
                PotentialField::linear_axis(*beta, Vec3::new(axis[0], axis[1], axis[2]))?
            }
            PotentialSpec::Tabulated { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| CliError::Io(file.clone(), e))?;
                PotentialField::Tabulated(
                    TabulatedPotential::parse(&text)
                        .map_err(|e| CliError::Config(format!("potential.file: {e}")))?,
                )
            }
        })
    }

    pub fn provider(&self, domain: &DomainModel<f64>) -> Result<Arc<dyn GreenProvider<f64>>, CliError> {
        Ok(match &self.green {
            GreenSpec::Ball => Arc::new(BallNoDriftGreen::new(domain)),
            GreenSpec::User { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| CliError::Io(file.clone(), e))?;
                Arc::new(
                    UserSuppliedGreen::<f64>::parse(&text)
                        .map_err(|e| CliError::Config(format!("green.file: {e}")))?,
                )
            }
        })
    }

    /// Window centre on the sphere of radius `R` from the polar and azimuthal angles.
    pub fn window_center(&self) -> Vec3<f64> {
        let (t, f) = (self.window.theta, self.window.phi);
        Vec3::new(t.sin() * f.cos(), t.sin() * f.sin(), t.cos()) * self.radius
    }

    pub fn window(&self, domain: &DomainModel<f64>, eps: f64, a: f64) -> Result<WindowSpec<f64>, CliError> {
        Ok(WindowSpec::new(domain, self.window_center(), eps, a)?)
    }

    pub fn sde_config(&self, seed: u64) -> SDEConfig<f64> {
        SDEConfig {
            dt: self.mc.dt,
            n_paths: self.mc.n_paths,
            seed,
            start: self.mc.start,
            max_time: self.mc.max_time,
            reflection: self.mc.reflection,
            monitoring: self.mc.monitoring,
            threads: None,
        }
    }

    pub fn wants_jsonl(&self) -> bool {
        self.outputs.formats.iter().any(|f| f == "jsonl")
    }
}
