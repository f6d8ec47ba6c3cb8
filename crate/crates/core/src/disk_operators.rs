//! Integral operators on the unit disk `𝔻` with the anisotropic distance
//! `ρ_a(t, s) = ((t1 − s1)² + a² (t2 − s2)²)^{1/2}`:
//!
//! * `L_a f(t)     = a ∫ f(s) / ρ_a(t, s) ds`
//! * `R_log,a f(t) = a ∫ log ρ_a(t, s) f(s) ds`
//! * `R_∞,a f(t)   = a ∫ ((t1 − s1)² − a²(t2 − s2)²) / ρ_a² f(s) ds`
//! * `R_F,a f(t)   = a ∫ (F1 (t1 − s1) + a F2 (t2 − s2)) / ρ_a f(s) ds`
//!
//! together with the equilibrium density `L_a⁻¹ 1 = K_a⁻¹ (1 − |t|²)^{-1/2}`.
//!
//! Single applications are evaluated in polar coordinates centred at the target,
//! `s = t + ρ (cos ψ, sin ψ)`. The Jacobian `ρ` cancels the `1/ρ` singularity, and
//! along each ray the substitution `ρ = −p + h cos θ` turns the edge weight
//! `(1 − |s|²)^{-1/2} dρ` into `dθ` exactly, so the remaining integrands are smooth
//! (the `ρ log ρ` endpoint of `R_log` is handled by a cubic grading).

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{NekError, Result};
use crate::quadrature::GaussLegendre;
use crate::{pairwise_sum, Scalar};

/// Smallest supported eccentricity parameter.
pub const MIN_ASPECT: f64 = 1e-4;

fn check_aspect<T: Scalar>(a: T) -> Result<()> {
    if a >= T::lit(MIN_ASPECT) && a <= T::one() {
        Ok(())
    } else {
        Err(NekError::InvalidArgument(format!(
            "eccentricity parameter must lie in [{MIN_ASPECT}, 1], got {a}"
        )))
    }
}

/// `K_a` with its eccentricity parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticConstant<T> {
    pub a: T,
    pub ka: T,
}

/// `K_a = (π/2) ∫_0^{2π} (cos²θ + sin²θ / a²)^{-1/2} dθ`.
///
/// The integrand is analytic and `π`-periodic, so the trapezoid rule converges
/// geometrically; the number of nodes is doubled until two estimates agree.
pub fn elliptic_ka<T: Scalar>(a: T) -> Result<EllipticConstant<T>> {
    check_aspect(a)?;
    let inv_a2 = T::one() / (a * a);
    let f = |th: T| {
        let (s, c) = th.sin_cos();
        T::one() / (c * c + s * s * inv_a2).sqrt()
    };
    let period = T::PI();
    let trapezoid = |n: usize| {
        let h = period / T::count(n);
        let terms: Vec<T> = (0..n).map(|j| f(h * T::count(j))).collect();
        pairwise_sum(&terms) * h
    };
    let mut n = 16;
    let mut prev = trapezoid(n);
    loop {
        n *= 2;
        let next = trapezoid(n);
        let converged = (next - prev).abs() <= T::lit(1e-14).max(T::epsilon() * T::lit(8.0)) * next.abs();
        if converged || n >= 1 << 24 {
            // Integral over [0, 2π] is twice the integral over one period.
            let ka = T::FRAC_PI_2() * next * T::lit(2.0);
            return Ok(EllipticConstant { a, ka });
        }
        prev = next;
    }
}

/// Density on the unit disk. When `carries_edge_singularity` is set the density is
/// `smooth(t) / (1 − |t|²)^{1/2}` and only the smooth factor is stored.
#[derive(Clone)]
pub struct DiskDensity<T> {
    smooth: Arc<dyn Fn(T, T) -> T + Send + Sync>,
    pub carries_edge_singularity: bool,
}

impl<T: Scalar> std::fmt::Debug for DiskDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskDensity")
            .field("carries_edge_singularity", &self.carries_edge_singularity)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> DiskDensity<T> {
    pub fn from_fn<F>(carries_edge_singularity: bool, smooth: F) -> Self
    where
        F: Fn(T, T) -> T + Send + Sync + 'static,
    {
        Self {
            smooth: Arc::new(smooth),
            carries_edge_singularity,
        }
    }

    pub fn constant(carries_edge_singularity: bool, c: T) -> Self {
        Self::from_fn(carries_edge_singularity, move |_, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(false, T::zero())
    }

    #[inline]
    pub fn smooth_factor(&self, t1: T, t2: T) -> T {
        (self.smooth)(t1, t2)
    }

    /// Full density value, edge weight included. Only defined strictly inside the disk.
    pub fn value(&self, t1: T, t2: T) -> T {
        let g = self.smooth_factor(t1, t2);
        if self.carries_edge_singularity {
            g / (T::one() - t1 * t1 - t2 * t2).sqrt()
        } else {
            g
        }
    }

    /// `α f + β g`; both densities must carry the same edge weight.
    pub fn linear_combination(alpha: T, f: &Self, beta: T, g: &Self) -> Result<Self> {
        if f.carries_edge_singularity != g.carries_edge_singularity {
            return Err(NekError::InvalidArgument(
                "cannot combine densities with different edge weights".into(),
            ));
        }
        let (sf, sg) = (f.smooth.clone(), g.smooth.clone());
        Ok(Self::from_fn(f.carries_edge_singularity, move |x, y| alpha * sf(x, y) + beta * sg(x, y)))
    }

    /// Node values and weights on the tensor rule `rule`; the edge weight, when
    /// present, is folded into the weights.
    pub fn tabulate(&self, rule: &DiskRule<T>) -> TabulatedDensity<T> {
        let nodes = rule.nodes(self.carries_edge_singularity);
        let values = nodes.iter().map(|n| self.smooth_factor(n.t1, n.t2)).collect();
        TabulatedDensity { nodes, values }
    }

    /// `∫_𝔻 density(t) g(t) dt`.
    pub fn integrate_against<F: Fn(T, T) -> T>(&self, rule: &DiskRule<T>, g: F) -> T {
        let tab = self.tabulate(rule);
        let terms: Vec<T> = tab
            .nodes
            .iter()
            .zip(&tab.values)
            .map(|(n, &v)| n.weight * v * g(n.t1, n.t2))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn integral(&self, rule: &DiskRule<T>) -> T {
        self.tabulate(rule).integral()
    }
}

/// Node values of a density on a tensor rule.
#[derive(Debug, Clone)]
pub struct TabulatedDensity<T> {
    pub nodes: Vec<DiskNode<T>>,
    pub values: Vec<T>,
}

impl<T: Scalar> TabulatedDensity<T> {
    pub fn integral(&self) -> T {
        let terms: Vec<T> = self.nodes.iter().zip(&self.values).map(|(n, &v)| n.weight * v).collect();
        pairwise_sum(&terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskNode<T> {
    pub t1: T,
    pub t2: T,
    pub weight: T,
}

/// Polar tensor rule on the disk.
///
/// With the edge weight, `r = (1 − u²)^{1/2}` maps `r dr / (1 − r²)^{1/2}` to `du`
/// and `u` carries a Gauss–Legendre rule; without it Gauss–Legendre runs in `r`.
/// The azimuth uses the trapezoid rule.
#[derive(Debug, Clone)]
pub struct DiskRule<T> {
    radial: GaussLegendre<T>,
    angular: usize,
}

impl<T: Scalar> DiskRule<T> {
    pub fn new(radial: usize, angular: usize) -> Self {
        Self {
            radial: GaussLegendre::new(radial),
            angular,
        }
    }

    pub fn nodes(&self, edge_weight: bool) -> Vec<DiskNode<T>> {
        let d_az = T::TAU() / T::count(self.angular);
        let mut out = Vec::with_capacity(self.radial.len() * self.angular);
        for (x, w) in self.radial.on_interval(T::zero(), T::one()) {
            let (r, wr) = if edge_weight {
                ((T::one() - x * x).sqrt(), w)
            } else {
                (x, w * x)
            };
            for j in 0..self.angular {
                let (s, c) = (d_az * T::count(j)).sin_cos();
                out.push(DiskNode {
                    t1: r * c,
                    t2: r * s,
                    weight: wr * d_az,
                });
            }
        }
        out
    }
}

/// Node counts for the disk quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskQuadrature {
    /// Gauss nodes along each ray from the target.
    pub ray: usize,
    /// Directions around the target.
    pub directions: usize,
    /// Radial nodes of the outer tensor rule for double integrals.
    pub outer_radial: usize,
    /// Azimuthal nodes of the outer tensor rule.
    pub outer_angular: usize,
}

impl Default for DiskQuadrature {
    fn default() -> Self {
        Self {
            ray: 24,
            directions: 128,
            outer_radial: 24,
            outer_angular: 48,
        }
    }
}

impl DiskQuadrature {
    pub fn doubled(self) -> Self {
        Self {
            ray: 2 * self.ray,
            directions: 2 * self.directions,
            outer_radial: 2 * self.outer_radial,
            outer_angular: 2 * self.outer_angular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RayWeight {
    One,
    Rho,
    RhoLogRho,
}

/// Target-centred polar evaluator shared by all single applications.
struct RayIntegrator<T> {
    gauss: GaussLegendre<T>,
    directions: usize,
}

impl<T: Scalar> RayIntegrator<T> {
    fn new(q: &DiskQuadrature) -> Self {
        Self {
            gauss: GaussLegendre::new(q.ray),
            directions: q.directions,
        }
    }

    /// `∫_0^{ρmax} w(ρ) f(t + ρ e) dρ` along the direction `e = (c, s)`.
    fn ray(&self, t: (T, T), (c, s): (T, T), f: &DiskDensity<T>, weight: RayWeight) -> T {
        let q0 = (T::one() - t.0 * t.0 - t.1 * t.1).max(T::zero());
        let p = t.0 * c + t.1 * s;
        let h = (p * p + q0).sqrt();
        if h == T::zero() {
            return T::zero();
        }
        // ρ = −p + h cos θ sweeps [0, ρmax] for θ ∈ [0, θ0].
        let theta0 = (p / h).max(-T::one()).min(T::one()).acos();
        if theta0 == T::zero() {
            return T::zero();
        }
        let three = T::lit(3.0);
        let mut acc = T::zero();
        for (&x, &w) in self.gauss.nodes.iter().zip(&self.gauss.weights) {
            let v = (x + T::one()) * T::lit(0.5);
            let (theta, jac) = if weight == RayWeight::RhoLogRho {
                // Cubic grading towards θ0, where ρ → 0.
                let om = T::one() - v;
                (theta0 * (T::one() - om * om * om), three * theta0 * om * om)
            } else {
                (theta0 * v, theta0)
            };
            let (sin_t, cos_t) = theta.sin_cos();
            let rho = (-p + h * cos_t).max(T::zero());
            let s1 = t.0 + rho * c;
            let s2 = t.1 + rho * s;
            let mut g = f.smooth_factor(s1, s2);
            if !f.carries_edge_singularity {
                g = g * h * sin_t;
            }
            let kernel = match weight {
                RayWeight::One => T::one(),
                RayWeight::Rho => rho,
                RayWeight::RhoLogRho => {
                    if rho > T::zero() {
                        rho * rho.ln()
                    } else {
                        T::zero()
                    }
                }
            };
            acc = acc + w * T::lit(0.5) * jac * kernel * g;
        }
        acc
    }

    /// `∫_0^{2π} A(ψ) · ray(ψ) dψ` with directions clustered around the two
    /// tangents to the circle `|s| = |t|`, where the ray length changes abruptly
    /// for targets close to the edge.
    fn around<A>(&self, t: (T, T), mut angular: A) -> T
    where
        A: FnMut((T, T)) -> T,
    {
        let r = (t.0 * t.0 + t.1 * t.1).sqrt();
        let q0 = (T::one() - r * r).max(T::zero());
        let alpha = if r > T::zero() { t.1.atan2(t.0) } else { T::zero() };
        let kappa = (T::one() - T::lit(2.0) * q0.sqrt()).max(T::zero()).min(T::lit(0.999));
        let half = T::lit(0.5);
        let ds = T::TAU() / T::count(self.directions);
        let mut terms = Vec::with_capacity(self.directions);
        for j in 0..self.directions {
            let sv = ds * T::count(j);
            let two_s = sv + sv;
            let psi = alpha + T::FRAC_PI_2() + sv - kappa * half * two_s.sin();
            let dpsi = T::one() - kappa * two_s.cos();
            let (sn, cs) = psi.sin_cos();
            terms.push(angular((cs, sn)) * dpsi);
        }
        pairwise_sum(&terms) * ds
    }
}

fn check_target<T: Scalar>(t: (T, T), open: bool) -> Result<()> {
    let r2 = t.0 * t.0 + t.1 * t.1;
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    let bad = if open { r2 >= T::one() } else { r2 > T::one() + tol };
    if bad || !r2.is_finite() {
        let which = if open { "strictly inside" } else { "in the closed" };
        return Err(NekError::Domain(format!(
            "target ({}, {}) must lie {which} unit disk",
            t.0, t.1
        )));
    }
    Ok(())
}

/// Evaluator for the disk operators at a fixed quadrature setting.
pub struct DiskOperators<T> {
    rays: RayIntegrator<T>,
    settings: DiskQuadrature,
}

impl<T: Scalar> DiskOperators<T> {
    pub fn new(settings: DiskQuadrature) -> Self {
        Self {
            rays: RayIntegrator::new(&settings),
            settings,
        }
    }

    pub fn settings(&self) -> DiskQuadrature {
        self.settings
    }

    /// `L_a f(t)` for `t` strictly inside the disk.
    pub fn apply_la(&self, f: &DiskDensity<T>, t: (T, T), a: T) -> Result<T> {
        check_aspect(a)?;
        check_target(t, true)?;
        let a2 = a * a;
        let v = self.rays.around(t, |(c, s)| {
            let q = c * c + a2 * s * s;
            self.rays.ray(t, (c, s), f, RayWeight::One) / q.sqrt()
        });
        Ok(a * v)
    }

    /// `R_log,a f(t)` for `t` in the closed disk.
    pub fn apply_rlog(&self, f: &DiskDensity<T>, t: (T, T), a: T) -> Result<T> {
        check_aspect(a)?;
        check_target(t, false)?;
        let a2 = a * a;
        let half = T::lit(0.5);
        let v = self.rays.around(t, |(c, s)| {
            let q = c * c + a2 * s * s;
            self.rays.ray(t, (c, s), f, RayWeight::RhoLogRho)
                + half * q.ln() * self.rays.ray(t, (c, s), f, RayWeight::Rho)
        });
        Ok(a * v)
    }

    /// `R_∞,a f(t)` for `t` in the closed disk. The kernel only depends on the direction.
    pub fn apply_rinfty(&self, f: &DiskDensity<T>, t: (T, T), a: T) -> Result<T> {
        check_aspect(a)?;
        check_target(t, false)?;
        let a2 = a * a;
        let v = self.rays.around(t, |(c, s)| {
            let k = rinfty_direction_kernel(c, s, a2);
            k * self.rays.ray(t, (c, s), f, RayWeight::Rho)
        });
        Ok(a * v)
    }

    /// `R_F,a f(t)` for the tangential force components `(F1, F2)`.
    pub fn apply_rf(&self, f: &DiskDensity<T>, t: (T, T), a: T, force: (T, T)) -> Result<T> {
        check_aspect(a)?;
        check_target(t, false)?;
        if force.0 == T::zero() && force.1 == T::zero() {
            return Ok(T::zero());
        }
        let a2 = a * a;
        let v = self.rays.around(t, |(c, s)| {
            // t − s = −ρ (c, s)
            let k = -(force.0 * c + a * force.1 * s) / (c * c + a2 * s * s).sqrt();
            k * self.rays.ray(t, (c, s), f, RayWeight::Rho)
        });
        Ok(a * v)
    }

    /// `∫_𝔻 w(t) V(t) dt` with `w = (1 − |t|²)^{-1/2}`, `V` evaluated at the
    /// nodes of the outer tensor rule in parallel and summed in node order.
    fn edge_weighted_outer<V>(&self, v: V) -> Result<T>
    where
        V: Fn((T, T)) -> Result<T> + Sync,
    {
        let rule = DiskRule::<T>::new(self.settings.outer_radial, self.settings.outer_angular);
        let nodes = rule.nodes(true);
        let values: Vec<Result<T>> = nodes.par_iter().map(|n| v((n.t1, n.t2)).map(|x| x * n.weight)).collect();
        let values: Vec<T> = values.into_iter().collect::<Result<_>>()?;
        Ok(pairwise_sum(&values))
    }

    /// `∫∫ w(s) w(t) log ρ_a(t, s) dt ds`.
    pub fn integral_ilog(&self, a: T) -> Result<T> {
        check_aspect(a)?;
        let w = DiskDensity::constant(true, T::one());
        let total = self.edge_weighted_outer(|t| self.apply_rlog(&w, t, a))?;
        Ok(total / a)
    }

    /// `∫∫ w(s) w(t) ((t1 − s1)² − a²(t2 − s2)²) / ρ_a² dt ds`.
    pub fn integral_ianiso(&self, a: T) -> Result<T> {
        check_aspect(a)?;
        let w = DiskDensity::constant(true, T::one());
        let total = self.edge_weighted_outer(|t| self.apply_rinfty(&w, t, a))?;
        Ok(total / a)
    }

    /// `∫_𝔻 L_a⁻¹ R_F,a L_a⁻¹ 1`, evaluated as `⟨L_a⁻¹1, R_F,a L_a⁻¹1⟩` using the
    /// self-adjointness of `L_a⁻¹`. Vanishes for every `a` and `F`.
    pub fn check_rf_vanishing(&self, a: T, force: (T, T)) -> Result<T> {
        let eq = equilibrium_density(a)?;
        let ka = elliptic_ka(a)?.ka;
        if force.0 == T::zero() && force.1 == T::zero() {
            return Ok(T::zero());
        }
        let total = self.edge_weighted_outer(|t| self.apply_rf(&eq, t, a, force))?;
        Ok(total / ka)
    }
}

impl<T: Scalar> Default for DiskOperators<T> {
    fn default() -> Self {
        Self::new(DiskQuadrature::default())
    }
}

#[inline]
pub fn rinfty_direction_kernel<T: Scalar>(c: T, s: T, a2: T) -> T {
    let num = c * c - a2 * s * s;
    let den = c * c + a2 * s * s;
    num / den
}

/// `L_a⁻¹ 1 = K_a⁻¹ (1 − |t|²)^{-1/2}`.
pub fn equilibrium_density<T: Scalar>(a: T) -> Result<DiskDensity<T>> {
    let ka = elliptic_ka(a)?.ka;
    Ok(DiskDensity::constant(true, T::one() / ka))
}

/// Double integrals entering the ellipse constant, with a self-consistency check
/// under quadrature doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskIntegrals<T> {
    pub a: T,
    pub ka: T,
    pub ilog: T,
    pub ianiso: T,
    /// `|value(doubled) − value|`, maximum over the two integrals; `None` when not checked.
    pub doubling_difference: Option<T>,
}

/// Evaluates `K_a`, `I_log(a)` and `I_aniso(a)`; with `check_doubling` the integrals
/// are recomputed at doubled order and the doubled values are returned.
pub fn disk_integrals<T: Scalar>(a: T, settings: DiskQuadrature, check_doubling: bool) -> Result<DiskIntegrals<T>> {
    let ka = elliptic_ka(a)?.ka;
    let ops = DiskOperators::<T>::new(settings);
    let ilog = ops.integral_ilog(a)?;
    let ianiso = ops.integral_ianiso(a)?;
    if !check_doubling {
        return Ok(DiskIntegrals {
            a,
            ka,
            ilog,
            ianiso,
            doubling_difference: None,
        });
    }
    let fine = DiskOperators::<T>::new(settings.doubled());
    let ilog2 = fine.integral_ilog(a)?;
    let ianiso2 = fine.integral_ianiso(a)?;
    let diff = (ilog2 - ilog).abs().max((ianiso2 - ianiso).abs());
    Ok(DiskIntegrals {
        a,
        ka,
        ilog: ilog2,
        ianiso: ianiso2,
        doubling_difference: Some(diff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ka_at_one_is_pi_squared() {
        assert_relative_eq!(elliptic_ka(1.0f64).unwrap().ka, PI * PI, epsilon = 1e-12);
        assert!(elliptic_ka(0.0f64).is_err());
        assert!(elliptic_ka(1.5f64).is_err());
        assert!(elliptic_ka(1e-9f64).is_err());
        assert!(elliptic_ka(1e-4f64).unwrap().ka > 0.0);
    }

    #[test]
    fn equilibrium_density_identities() {
        let ops = DiskOperators::<f64>::default();
        let eq1 = equilibrium_density(1.0).unwrap();
        assert_relative_eq!(ops.apply_la(&eq1, (0.0, 0.0), 1.0).unwrap(), 1.0, epsilon = 1e-6);
        let eq5 = equilibrium_density(0.5).unwrap();
        assert_relative_eq!(ops.apply_la(&eq5, (0.3, -0.2), 0.5).unwrap(), 1.0, epsilon = 1e-5);
        assert_eq!(ops.apply_la(&DiskDensity::zero(), (0.1, 0.1), 0.7).unwrap(), 0.0);
        assert!(matches!(ops.apply_la(&eq1, (1.0, 0.0), 1.0), Err(NekError::Domain(_))));
    }

    #[test]
    fn equilibrium_moments() {
        let rule = DiskRule::<f64>::new(16, 32);
        let eq1 = equilibrium_density(1.0).unwrap();
        assert_relative_eq!(eq1.integral(&rule), 2.0 / PI, epsilon = 1e-12);
        for a in [0.3, 0.8] {
            let eq = equilibrium_density(a).unwrap();
            let ka = elliptic_ka(a).unwrap().ka;
            assert_relative_eq!(eq.integral(&rule), 2.0 * PI / ka, epsilon = 1e-12);
            assert!(eq.integrate_against(&rule, |t1, _| t1).abs() < 1e-14);
            assert!(eq.integrate_against(&rule, |_, t2| t2).abs() < 1e-14);
        }
    }

    #[test]
    fn rinfty_kernel_vanishes_on_diagonals_at_a_one() {
        for (d1, d2) in [(0.3f64, 0.3f64), (-0.2, 0.2), (0.7, -0.7)] {
            let r: f64 = (d1 * d1 + d2 * d2).sqrt();
            assert!(rinfty_direction_kernel(d1 / r, d2 / r, 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rinfty_of_rotation_invariant_density_at_centre() {
        let ops = DiskOperators::<f64>::default();
        let eq = equilibrium_density(1.0).unwrap();
        assert!(ops.apply_rinfty(&eq, (0.0, 0.0), 1.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn rlog_at_centre_matches_radial_closed_form() {
        // ∫ log|s| (1 − |s|²)^{-1/2} ds = 2π (ln 2 − 1).
        let ops = DiskOperators::<f64>::default();
        let w = DiskDensity::constant(true, 1.0);
        let v = ops.apply_rlog(&w, (0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(v, 2.0 * PI * (2f64.ln() - 1.0), epsilon = 1e-9);
    }

    #[test]
    fn rf_with_zero_force_is_exactly_zero() {
        let ops = DiskOperators::<f64>::default();
        let eq = equilibrium_density(0.5).unwrap();
        assert_eq!(ops.apply_rf(&eq, (0.2, 0.1), 0.5, (0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(ops.check_rf_vanishing(0.5, (0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn mixed_edge_weights_do_not_combine() {
        let f = DiskDensity::<f64>::constant(true, 1.0);
        let g = DiskDensity::<f64>::constant(false, 1.0);
        assert!(DiskDensity::linear_combination(1.0, &f, 1.0, &g).is_err());
    }

    #[test]
    fn smooth_density_without_edge_weight() {
        // L_1 applied to the constant 1 at the centre: ∫ 1/|s| ds = 2π.
        let ops = DiskOperators::<f64>::default();
        let one = DiskDensity::constant(false, 1.0);
        assert_relative_eq!(ops.apply_la(&one, (0.0, 0.0), 1.0).unwrap(), 2.0 * PI, epsilon = 1e-10);
        // ∫ log|s| ds = −π/2.
        assert_relative_eq!(ops.apply_rlog(&one, (0.0, 0.0), 1.0).unwrap(), -PI / 2.0, epsilon = 1e-9);
    }
}
