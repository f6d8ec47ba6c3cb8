//! Monte Carlo estimates of mean escape times for `dX = F dt + √2 dW` in a ball
//! with a reflecting boundary and an absorbing window.
//!
//! Each path draws from its own ChaCha8 stream (`seed`, stream = path index), and
//! results are reduced in path order, so estimates do not depend on the number
//! of worker threads.
//!
//! After every Euler–Maruyama step the segment `x_old → x_new` is tested against
//! the sphere. A crossing point inside the target absorbs the path; otherwise the
//! new point is reflected back. With [`BoundaryMonitoring::BridgeCorrected`] a
//! step that stays inside is also tested for a hidden excursion with the Brownian
//! bridge probability `exp(−d_old d_new / dt)`, where `d` is the distance to the
//! sphere; a hidden excursion is located at the radial projection of the step
//! midpoint.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NekError, Result};
use crate::geometry::{DomainModel, WindowSpec};
use crate::potential::{weighted_volume, PotentialField};
use crate::{pairwise_sum, Scalar, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint<T> {
    Point(Vec3<T>),
    UniformVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    /// Radial fold to `2R − |x|`.
    #[default]
    NormalProjection,
    /// Mirror across the tangent plane at the exit point.
    Specular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMonitoring {
    /// Only crossings of the step segment are detected.
    Discrete,
    /// Adds hidden excursions through the Brownian bridge probability.
    #[default]
    BridgeCorrected,
}

/// Absorbing part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<T> {
    Window(WindowSpec<T>),
    /// Whole sphere absorbing; used to calibrate the diffusion convention.
    WholeBoundary,
}

impl<T: Scalar> Target<T> {
    #[inline]
    fn absorbs(&self, p: Vec3<T>) -> bool {
        match self {
            Self::Window(w) => w.contains_boundary_point(p),
            Self::WholeBoundary => true,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Window(w) => format!(
                "window center=({}, {}, {}) eps={} a={}",
                w.center.x, w.center.y, w.center.z, w.eps, w.a
            ),
            Self::WholeBoundary => "whole boundary".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SDEConfig<T> {
    pub dt: T,
    pub n_paths: u64,
    pub seed: u64,
    pub start: StartPoint<T>,
    /// Per-path time budget; `None` uses [`DEFAULT_BUDGET_FACTOR`] times the
    /// expected escape time scale.
    pub max_time: Option<T>,
    pub reflection: Reflection,
    pub monitoring: BoundaryMonitoring,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl<T: Scalar> SDEConfig<T> {
    pub fn new(dt: T, n_paths: u64, seed: u64, start: StartPoint<T>) -> Self {
        Self {
            dt,
            n_paths,
            seed,
            start,
            max_time: None,
            reflection: Reflection::default(),
            monitoring: BoundaryMonitoring::default(),
            threads: None,
        }
    }

    fn validate(&self, domain: &DomainModel<T>) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(NekError::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(NekError::InvalidArgument("at least one path is required".into()));
        }
        if let Some(m) = self.max_time {
            if !(m > self.dt) {
                return Err(NekError::InvalidArgument(format!("time budget {m} must exceed the time step")));
            }
        }
        if let StartPoint::Point(x) = self.start {
            if !domain.contains(x) {
                return Err(NekError::Domain("start point outside the domain".into()));
            }
        }
        Ok(())
    }
}

/// Default budget as a multiple of the expected escape time.
pub const DEFAULT_BUDGET_FACTOR: f64 = 100.0;

/// Censoring fraction above which an estimate is flagged.
pub const CENSOR_FLAG_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `√n_absorbed`.
    pub stderr: T,
    pub n_paths: u64,
    pub n_absorbed: u64,
    pub n_censored: u64,
    pub dt: T,
    pub seed: u64,
    pub max_time: T,
    /// Censoring fraction at or above [`CENSOR_FLAG_FRACTION`].
    pub flagged: bool,
}

/// Euler–Maruyama step `x + F(x) dt + √(2 dt) ξ`, before boundary handling.
#[inline]
pub fn step<T: Scalar>(x: Vec3<T>, force: Vec3<T>, dt: T, noise: Vec3<T>) -> Vec3<T> {
    x + force * dt + noise * (T::lit(2.0) * dt).sqrt()
}

/// [`step`] with the force taken from `phi` at `x`.
pub fn step_with_potential<T: Scalar>(
    domain: &DomainModel<T>,
    x: Vec3<T>,
    phi: &PotentialField<T>,
    dt: T,
    noise: Vec3<T>,
) -> Result<Vec3<T>> {
    Ok(step(x, phi.force(domain, x)?, dt, noise))
}

/// First point of the segment `a → b` on the sphere `|x| = R`, for `|a| ≤ R < |b|`.
#[inline]
fn segment_exit<T: Scalar>(a: Vec3<T>, b: Vec3<T>, r: T) -> Vec3<T> {
    let d = b - a;
    let dd = d.norm_squared();
    let ad = a.dot(d);
    let c = a.norm_squared() - r * r;
    // Root in (0, 1] of dd s² + 2 ad s + c = 0 with c ≤ 0.
    let disc = (ad * ad - dd * c).max(T::zero()).sqrt();
    let s = if ad >= T::zero() { -c / (ad + disc) } else { (disc - ad) / dd };
    let p = a + d * s.max(T::zero()).min(T::one());
    p * (r / p.norm())
}

/// Brings a point that left the ball back inside.
pub fn reflect<T: Scalar>(
    x_new: Vec3<T>,
    x_old: Vec3<T>,
    domain: &DomainModel<T>,
    mode: Reflection,
) -> Result<Vec3<T>> {
    let r = domain.radius();
    let n2 = x_new.norm_squared();
    if n2 <= r * r {
        return Ok(x_new);
    }
    let n = n2.sqrt();
    if n > T::lit(3.0) * r {
        return Err(NekError::StepTooLarge(format!("step reached radius {n}, beyond three domain radii")));
    }
    Ok(reflect_outside(x_new, n, x_old, r, mode))
}

#[inline]
fn reflect_outside<T: Scalar>(x_new: Vec3<T>, norm: T, x_old: Vec3<T>, r: T, mode: Reflection) -> Vec3<T> {
    let fold = |x: Vec3<T>, nx: T| x * ((r + r - nx) / nx);
    match mode {
        Reflection::NormalProjection => fold(x_new, norm),
        Reflection::Specular => {
            let p = segment_exit(x_old, x_new, r);
            let nu = p * (T::one() / r);
            let y = x_new - nu * (T::lit(2.0) * (x_new - p).dot(nu));
            let ny = y.norm();
            if ny <= r {
                y
            } else {
                fold(y, ny)
            }
        }
    }
}

/// Expected escape time used for the default budget: `K_a Φ(x*) / (4π² a ε)` for a
/// window, `R²` for the whole boundary.
pub fn expected_time_scale<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    target: &Target<T>,
) -> Result<T> {
    match target {
        Target::WholeBoundary => Ok(domain.radius() * domain.radius()),
        Target::Window(w) => {
            let vol = weighted_volume(domain, phi, w.center, T::lit(1e-6))?.value;
            let ka = crate::disk_operators::elliptic_ka(w.a)?.ka;
            Ok(ka * vol / (T::lit(4.0) * T::PI() * T::PI() * w.a * w.eps))
        }
    }
}

enum Drift<'a, T> {
    Constant(Vec3<T>),
    Field(&'a PotentialField<T>, T),
}

impl<T: Scalar> Drift<'_, T> {
    #[inline]
    fn at(&self, x: Vec3<T>) -> Vec3<T> {
        match self {
            Self::Constant(f) => *f,
            Self::Field(phi, h) => phi.gradient(x, *h),
        }
    }
}

struct PathSimulator<'a, T> {
    radius: T,
    dt: T,
    sqrt_2dt: T,
    /// Steps starting deeper than this cannot have a hidden excursion worth testing.
    bridge_shell: T,
    max_steps: u64,
    drift: Drift<'a, T>,
    target: Target<T>,
    cfg: SDEConfig<T>,
}

impl<T: Scalar> PathSimulator<'_, T> {
    fn start(&self, rng: &mut ChaCha8Rng) -> Vec3<T> {
        match self.cfg.start {
            StartPoint::Point(x) => x,
            StartPoint::UniformVolume => loop {
                let mut u = || T::lit(rng.random::<f64>() * 2.0 - 1.0);
                let p = Vec3::new(u(), u(), u());
                if p.norm_squared() < T::one() {
                    return p * self.radius;
                }
            },
        }
    }

    /// Number of steps until absorption, or `None` when censored.
    fn run(&self, index: u64) -> Result<Option<u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        let mut x = self.start(&mut rng);
        let r = self.radius;
        let r2 = r * r;
        let shell2 = {
            let inner = (r - self.bridge_shell).max(T::zero());
            inner * inner
        };
        let bridge = self.cfg.monitoring == BoundaryMonitoring::BridgeCorrected;
        for n in 1..=self.max_steps {
            let z: [f64; 3] = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let noise = Vec3::new(T::lit(z[0]), T::lit(z[1]), T::lit(z[2]));
            let f = self.drift.at(x);
            let y = x + f * self.dt + noise * self.sqrt_2dt;
            let y2 = y.norm_squared();
            if y2 > r2 {
                let p = segment_exit(x, y, r);
                if self.target.absorbs(p) {
                    return Ok(Some(n));
                }
                let ny = y2.sqrt();
                if ny > T::lit(3.0) * r {
                    return Err(NekError::StepTooLarge(format!(
                        "step reached radius {ny}; reduce the time step"
                    )));
                }
                x = reflect_outside(y, ny, x, r, self.cfg.reflection);
                continue;
            }
            if bridge && (y2 > shell2 || x.norm_squared() > shell2) {
                let d0 = r - x.norm();
                let d1 = r - y2.sqrt();
                let p_hit = (-(d0 * d1) / self.dt).exp();
                if T::lit(rng.random::<f64>()) < p_hit {
                    let mid = (x + y) * T::lit(0.5);
                    let m = mid.norm();
                    if m > T::zero() && self.target.absorbs(mid * (r / m)) {
                        return Ok(Some(n));
                    }
                }
            }
            x = y;
        }
        Ok(None)
    }
}

/// Sample mean and standard error with pairwise (order-fixed) reductions.
pub fn mean_and_stderr<T: Scalar>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let mean = pairwise_sum(values) / T::count(n);
    if n == 1 {
        return (mean, T::infinity());
    }
    let sq: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / T::count(n - 1);
    (mean, (var / T::count(n)).sqrt())
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| NekError::InvalidArgument(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Mean escape time over `cfg.n_paths` paths.
pub fn estimate_mean_escape<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    target: &Target<T>,
    cfg: &SDEConfig<T>,
) -> Result<EscapeEstimate<T>> {
    cfg.validate(domain)?;
    let max_time = match cfg.max_time {
        Some(m) => m,
        None => expected_time_scale(domain, phi, target)? * T::lit(DEFAULT_BUDGET_FACTOR),
    };
    let max_steps = (max_time / cfg.dt).ceil().to_u64().unwrap_or(u64::MAX);
    let drift = if phi.has_constant_force() {
        Drift::Constant(phi.gradient(Vec3::zero(), T::one()))
    } else {
        Drift::Field(phi, PotentialField::fd_step(domain))
    };
    let sqrt_2dt = (T::lit(2.0) * cfg.dt).sqrt();
    let sim = PathSimulator {
        radius: domain.radius(),
        dt: cfg.dt,
        sqrt_2dt,
        // Both endpoints deeper than this give exp(−d0 d1 / dt) < e^{-36}.
        bridge_shell: (T::lit(36.0) * cfg.dt).sqrt(),
        max_steps,
        drift,
        target: *target,
        cfg: *cfg,
    };
    let outcomes: Vec<Result<Option<u64>>> =
        with_pool(cfg.threads, || (0..cfg.n_paths).into_par_iter().map(|i| sim.run(i)).collect())?;
    let mut times = Vec::with_capacity(outcomes.len());
    let mut censored = 0u64;
    for o in outcomes {
        match o? {
            Some(steps) => times.push(T::lit(steps as f64) * cfg.dt),
            None => censored += 1,
        }
    }
    if times.is_empty() {
        return Err(NekError::NoAbsorption { censored });
    }
    let (mean, stderr) = mean_and_stderr(&times);
    Ok(EscapeEstimate {
        mean,
        stderr,
        n_paths: cfg.n_paths,
        n_absorbed: times.len() as u64,
        n_censored: censored,
        dt: cfg.dt,
        seed: cfg.seed,
        max_time,
        flagged: (censored as f64) >= CENSOR_FLAG_FRACTION * cfg.n_paths as f64,
    })
}

/// Discretisation bias assumed by [`dt_refinement`]. Bridge monitoring removes the leading error on a fully
/// absorbing sphere, but near the rim of a small window steps of size `√dt ~ ε`
/// still leave an `O(√dt)` term, so `SqrtDt` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasModel {
    /// `mean(dt) = m0 + b √dt`.
    #[default]
    SqrtDt,
    /// `mean(dt) = m0 + b dt`.
    LinearDt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedEstimate<T> {
    /// Extrapolated mean, or the finest level when `flagged`.
    pub mean: T,
    pub stderr: T,
    pub model: BiasModel,
    /// Fitted bias coefficient `b`.
    pub slope: T,
    pub levels: Vec<EscapeEstimate<T>>,
    /// Level means are not monotone in `dt` beyond their noise.
    pub flagged: bool,
}

/// Seed used at refinement level `k`.
pub fn level_seed(seed: u64, level: usize) -> u64 {
    seed ^ (level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `levels` estimates at `dt, dt/2, …` and extrapolates to `dt → 0` by a
/// weighted least-squares fit under `model`. The standard error of the intercept
/// is inflated by `max(1, √(χ²/dof))`.
pub fn dt_refinement<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    target: &Target<T>,
    cfg: &SDEConfig<T>,
    levels: usize,
    model: BiasModel,
) -> Result<RefinedEstimate<T>> {
    if levels < 2 {
        return Err(NekError::InvalidArgument(format!("refinement needs at least two levels, got {levels}")));
    }
    let mut results = Vec::with_capacity(levels);
    let mut dt = cfg.dt;
    for k in 0..levels {
        let c = SDEConfig {
            dt,
            seed: level_seed(cfg.seed, k),
            ..*cfg
        };
        results.push(estimate_mean_escape(domain, phi, target, &c)?);
        dt = dt * T::lit(0.5);
    }
    let xs: Vec<f64> = results
        .iter()
        .map(|e| match model {
            BiasModel::SqrtDt => e.dt.as_f64().sqrt(),
            BiasModel::LinearDt => e.dt.as_f64(),
        })
        .collect();
    let ys: Vec<f64> = results.iter().map(|e| e.mean.as_f64()).collect();
    let ws: Vec<f64> = results.iter().map(|e| 1.0 / e.stderr.as_f64().powi(2)).collect();
    let (intercept, slope, var_intercept, chi2) = weighted_line_fit(&xs, &ys, &ws);
    let dof = levels.saturating_sub(2);
    let inflate = if dof > 0 { (chi2 / dof as f64).sqrt().max(1.0) } else { 1.0 };

    let finest = *results.last().expect("at least two levels");
    let non_monotone = results.windows(3).any(|w| {
        let d1 = w[1].mean.as_f64() - w[0].mean.as_f64();
        let d2 = w[2].mean.as_f64() - w[1].mean.as_f64();
        let s1 = 3.0 * (w[0].stderr.as_f64().powi(2) + w[1].stderr.as_f64().powi(2)).sqrt();
        let s2 = 3.0 * (w[1].stderr.as_f64().powi(2) + w[2].stderr.as_f64().powi(2)).sqrt();
        d1.abs() > s1 && d2.abs() > s2 && d1.signum() != d2.signum()
    });
    if non_monotone {
        return Ok(RefinedEstimate {
            mean: finest.mean,
            stderr: finest.stderr,
            model,
            slope: T::lit(slope),
            levels: results,
            flagged: true,
        });
    }
    Ok(RefinedEstimate {
        mean: T::lit(intercept),
        stderr: T::lit(var_intercept.sqrt() * inflate),
        model,
        slope: T::lit(slope),
        levels: results,
        flagged: false,
    })
}

/// Weighted least squares `y = a + b x`; returns `(a, b, var(a), χ²)`.
fn weighted_line_fit(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64, f64, f64) {
    let s: f64 = ws.iter().sum();
    let sx: f64 = ws.iter().zip(xs).map(|(w, x)| w * x).sum();
    let sy: f64 = ws.iter().zip(ys).map(|(w, y)| w * y).sum();
    let sxx: f64 = ws.iter().zip(xs).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = ws.iter().zip(xs).zip(ys).map(|((w, x), y)| w * x * y).sum();
    let det = s * sxx - sx * sx;
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    let chi2: f64 = ws
        .iter()
        .zip(xs)
        .zip(ys)
        .map(|((w, x), y)| w * (y - a - b * x).powi(2))
        .sum();
    (a, b, sxx / det, chi2)
}

/// One JSON-lines record per Monte Carlo run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord<T> {
    pub label: String,
    pub target: String,
    pub config: SDEConfig<T>,
    pub estimate: EscapeEstimate<T>,
    pub wall_time_s: f64,
}

/// [`estimate_mean_escape`] plus a run record.
pub fn estimate_with_record<T: Scalar>(
    label: &str,
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    target: &Target<T>,
    cfg: &SDEConfig<T>,
) -> Result<(EscapeEstimate<T>, RunRecord<T>)> {
    let t0 = Instant::now();
    let est = estimate_mean_escape(domain, phi, target, cfg)?;
    let rec = RunRecord {
        label: label.to_string(),
        target: target.describe(),
        config: *cfg,
        estimate: est,
        wall_time_s: t0.elapsed().as_secs_f64(),
    };
    Ok((est, rec))
}
