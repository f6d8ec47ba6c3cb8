//! Boundary Neumann Green kernel: its singular expansion near the diagonal,
//! the auxiliary function `𝒢`, and providers for the regular part `R(x*, x*)` and
//! the interior Green function `G(x*, x)`.
//!
//! Near the diagonal, for `x, y` on the boundary,
//!
//! ```text
//! G_∂(x, y) = 1/(2π d_g) − (H + ∂_νφ)/(4π) log d_h
//!           + (II(v̂) − II(*v̂))/(16π) − ⟨F∥, v̂⟩/(4π) + R(x, y)
//! ```
//!
//! with `v̂` the unit vector of `exp_x⁻¹(y)` and `*` the rotation by `π/2`.
//! `ν` is always the outward normal, so the inward normal component of the force
//! is `F³ = −∂_νφ`.
//!
//! # User supplied provider files
//!
//! One record per line, `#` starts a comment. Coordinates are three numbers or a
//! single `*` matching every point:
//!
//! ```text
//! regular_part   <x y z | *>      <value>
//! script_g       <x y z | *>      <value>
//! green          <x* | *> <x | *> <value>
//! green_integral <x* | *>         <value>
//! script_g_integral               <value>
//! ```
//!
//! Points are matched to within `1e-9` in every coordinate; the first matching
//! record wins.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NekError, Result};
use crate::geometry::{BoundaryFrame, DomainModel};
use crate::potential::PotentialField;
use crate::{Scalar, Vec3};

/// Selects between the two sign choices found for the drift-dependent terms.
///
/// `CurvaturePlusDrift` uses `−⟨F∥, v̂⟩/(4π)` in the kernel and `(H + ∂_νφ)` in the
/// escape time constants. `CurvatureMinusDrift` uses `+⟨F∥, v̂⟩/(4π)` in the
/// kernel and `(H − ∂_νφ)` in the constants. The kernel log term is
/// `−(H + ∂_νφ)/(4π)` under both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Selected on the command line as `theorem`.
    #[default]
    #[serde(rename = "theorem")]
    CurvaturePlusDrift,
    /// Selected on the command line as `section4`.
    #[serde(rename = "section4")]
    CurvatureMinusDrift,
}

impl SignConvention {
    /// Sign in front of `⟨F∥, v̂⟩/(4π)`.
    pub fn drift_sign<T: Scalar>(self) -> T {
        match self {
            Self::CurvaturePlusDrift => -T::one(),
            Self::CurvatureMinusDrift => T::one(),
        }
    }

    /// Curvature and drift combination multiplying the `log ε` term and the
    /// disk integral in the escape time constants.
    pub fn log_coefficient<T: Scalar>(self, mean_curvature: T, normal_derivative: T) -> T {
        match self {
            Self::CurvaturePlusDrift => mean_curvature + normal_derivative,
            Self::CurvatureMinusDrift => mean_curvature - normal_derivative,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CurvaturePlusDrift => "theorem",
            Self::CurvatureMinusDrift => "section4",
        }
    }
}

impl FromStr for SignConvention {
    type Err = NekError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Self::CurvaturePlusDrift),
            "section4" => Ok(Self::CurvatureMinusDrift),
            other => Err(NekError::Parse(format!(
                "unknown sign convention '{other}' (expected 'theorem' or 'section4')"
            ))),
        }
    }
}

/// The four singular terms of the boundary kernel at a pair of boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularKernelTerms<T> {
    /// `1 / (2π d_g)`.
    pub coulomb: T,
    /// `−(H + ∂_νφ) log d_h / (4π)`.
    pub log_term: T,
    /// `(II(v̂) − II(*v̂)) / (16π)`.
    pub ii_difference: T,
    /// `∓⟨F∥, v̂⟩ / (4π)`.
    pub drift_directional: T,
    pub total_singular: T,
}

/// Singular part of `G_∂(x, y)` with `x = frame.point`.
pub fn kernel_singular<T: Scalar>(
    domain: &DomainModel<T>,
    frame: &BoundaryFrame<T>,
    y: Vec3<T>,
    force: Vec3<T>,
    convention: SignConvention,
) -> Result<SingularKernelTerms<T>> {
    let x = frame.point;
    let y = domain.project_to_boundary(y)?;
    let d_g = domain.chord_distance(x, y);
    if d_g <= domain.boundary_tolerance() {
        return Err(NekError::SingularEvaluation("kernel evaluated on the diagonal".into()));
    }
    let v = domain.log_map(x, y)?;
    let d_h = v.norm();
    let v_hat = v * (T::one() / d_h);
    let four_pi = T::lit(4.0) * T::PI();

    let coulomb = T::one() / (T::lit(2.0) * T::PI() * d_g);
    let normal_derivative = force.dot(frame.nu);
    let log_term = -(frame.mean_curvature + normal_derivative) * d_h.ln() / four_pi;
    let ii_difference = (frame.second_fundamental(v_hat) - frame.second_fundamental(frame.hodge_star(v_hat)))
        / (T::lit(4.0) * four_pi);
    let drift_directional = convention.drift_sign::<T>() * frame.tangential_part(force).dot(v_hat) / four_pi;
    Ok(SingularKernelTerms {
        coulomb,
        log_term,
        ii_difference,
        drift_directional,
        total_singular: coulomb + log_term + ii_difference + drift_directional,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedFormBallNoDrift,
    UserSupplied,
}

/// Green function data needed by the escape time expansions.
pub trait GreenProvider<T: Scalar>: Send + Sync {
    fn provenance(&self) -> Provenance;

    /// Fails when the provider has no data for this potential.
    fn check_supports(&self, phi: &PotentialField<T>) -> Result<()>;

    /// `R(x*, x*)`.
    fn regular_part(&self, x_star: Vec3<T>) -> Result<T>;

    /// `G(x*, x)`.
    fn interior_green(&self, x_star: Vec3<T>, x: Vec3<T>) -> Result<T>;

    /// `𝒢(x)`.
    fn script_g(&self, x: Vec3<T>) -> Result<T>;

    /// `∫_M 𝒢`.
    fn script_g_integral(&self) -> Result<T>;

    /// `∫_M G(x, x*) dx`.
    fn green_volume_integral(&self, x_star: Vec3<T>) -> Result<T>;
}

/// Diagonal limit of `G_∂(x*, y) − total_singular(x*, y)` along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularPartEstimate<T> {
    pub value: T,
    /// Convergence order seen across the three samples.
    pub observed_order: T,
    pub distances: [T; 3],
    pub samples: [T; 3],
}

/// Samples the regular part at geodesic distances `d, d/2, d/4` along the tangent
/// `direction` and extrapolates to the diagonal assuming an error `∝ d^p`, with
/// `p` taken from the samples (clamped to `[0.25, 4]`).
pub fn extrapolate_regular_part<T, G>(
    domain: &DomainModel<T>,
    frame: &BoundaryFrame<T>,
    direction: Vec3<T>,
    largest_distance: T,
    force: Vec3<T>,
    convention: SignConvention,
    boundary_green: G,
) -> Result<RegularPartEstimate<T>>
where
    T: Scalar,
    G: Fn(Vec3<T>, Vec3<T>) -> Result<T>,
{
    let dir = frame
        .tangential_part(direction)
        .normalized()
        .ok_or_else(|| NekError::InvalidArgument("extrapolation direction must have a tangential part".into()))?;
    let half = T::lit(0.5);
    let distances = [largest_distance, largest_distance * half, largest_distance * half * half];
    let mut samples = [T::zero(); 3];
    for (s, &d) in samples.iter_mut().zip(&distances) {
        let y = domain.exp_map(frame.point, dir * d);
        let sing = kernel_singular(domain, frame, y, force, convention)?;
        *s = boundary_green(frame.point, y)? - sing.total_singular;
    }
    let d1 = samples[0] - samples[1];
    let d2 = samples[1] - samples[2];
    let (value, order) = if d2 == T::zero() || d1 == T::zero() || (d1 / d2) <= T::zero() {
        (samples[2], T::zero())
    } else {
        let p = (d1 / d2).log2().max(T::lit(0.25)).min(T::lit(4.0));
        let factor = T::lit(2.0).powf(p) - T::one();
        (samples[2] - d2 / factor, (d1 / d2).log2())
    };
    Ok(RegularPartEstimate {
        value,
        observed_order: order,
        distances,
        samples,
    })
}

/// Closed-form Neumann Green function of a ball of radius `R` for `F = 0`, with
/// flux `−1/|∂M|` and zero boundary mean. For `R = 1`,
///
/// ```text
/// 4π G(x, y) = 1/|x − y| + 1/ρ + log(2 / (1 − x·y + ρ)) − 2,
/// ρ = (1 − 2 x·y + |x|²|y|²)^{1/2} = |y| |x − y/|y|²|.
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallNoDriftGreen<T> {
    domain: DomainModel<T>,
    /// Largest geodesic distance used by the diagonal extrapolation, relative to `R`.
    pub extrapolation_distance: T,
}

impl<T: Scalar> BallNoDriftGreen<T> {
    pub fn new(domain: &DomainModel<T>) -> Self {
        Self {
            domain: *domain,
            extrapolation_distance: T::lit(1e-2),
        }
    }

    pub fn domain(&self) -> &DomainModel<T> {
        &self.domain
    }

    fn check_closed(&self, x: Vec3<T>) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(NekError::Domain("point outside the ball".into()))
        }
    }

    /// Unit-ball Green function at scaled points.
    fn unit_green(x: Vec3<T>, y: Vec3<T>) -> T {
        let diff = x - y;
        let dist2 = diff.norm_squared();
        let (nx, ny) = (x.norm_squared(), y.norm_squared());
        // 1 − x·y without cancellation for nearby points.
        let one_minus_dot = (dist2 + T::lit(2.0) - nx - ny) * T::lit(0.5);
        let rho = (T::lit(2.0) * one_minus_dot - T::one() + nx * ny).max(T::zero()).sqrt();
        let val = T::one() / dist2.sqrt() + T::one() / rho + (T::lit(2.0) / (one_minus_dot + rho)).ln() - T::lit(2.0);
        val / (T::lit(4.0) * T::PI())
    }

    /// `G_∂(x, y)` for two distinct boundary points.
    pub fn boundary_green(&self, x: Vec3<T>, y: Vec3<T>) -> Result<T> {
        let x = self.domain.project_to_boundary(x)?;
        let y = self.domain.project_to_boundary(y)?;
        self.interior_green(x, y)
    }

    /// Directional estimate of `R(x*, x*)`.
    pub fn regular_part_along(
        &self,
        x_star: Vec3<T>,
        direction: Vec3<T>,
        convention: SignConvention,
    ) -> Result<RegularPartEstimate<T>> {
        let frame = self.domain.boundary_frame(x_star)?;
        extrapolate_regular_part(
            &self.domain,
            &frame,
            direction,
            self.extrapolation_distance * self.domain.radius(),
            Vec3::zero(),
            convention,
            |a, b| self.boundary_green(a, b),
        )
    }
}

impl<T: Scalar> GreenProvider<T> for BallNoDriftGreen<T> {
    fn provenance(&self) -> Provenance {
        Provenance::ClosedFormBallNoDrift
    }

    fn check_supports(&self, phi: &PotentialField<T>) -> Result<()> {
        if phi.is_force_free() {
            Ok(())
        } else {
            Err(NekError::NotConfigured(
                "the closed-form ball provider only covers force-free potentials; supply Green function data".into(),
            ))
        }
    }

    /// Mean of the extrapolated limits along `E1` and `E2`.
    fn regular_part(&self, x_star: Vec3<T>) -> Result<T> {
        let frame = self.domain.boundary_frame(x_star)?;
        let conv = SignConvention::default();
        let a = self.regular_part_along(x_star, frame.e1, conv)?;
        let b = self.regular_part_along(x_star, frame.e2, conv)?;
        Ok((a.value + b.value) * T::lit(0.5))
    }

    fn interior_green(&self, x_star: Vec3<T>, x: Vec3<T>) -> Result<T> {
        self.check_closed(x_star)?;
        self.check_closed(x)?;
        let r = self.domain.radius();
        if x_star.distance(x) <= self.domain.boundary_tolerance() {
            return Err(NekError::SingularEvaluation("Green function evaluated on the diagonal".into()));
        }
        let inv = T::one() / r;
        Ok(Self::unit_green(x_star * inv, x * inv) * inv)
    }

    /// `(R² − |x|²) / 6`.
    fn script_g(&self, x: Vec3<T>) -> Result<T> {
        self.check_closed(x)?;
        let r = self.domain.radius();
        Ok(((r * r - x.norm_squared()) / T::lit(6.0)).max(T::zero()))
    }

    /// `4π R⁵ / 45`.
    fn script_g_integral(&self) -> Result<T> {
        Ok(T::lit(4.0) * T::PI() * self.domain.radius().powi(5) / T::lit(45.0))
    }

    /// Equals `𝒢(x*)`: both solve `Δu = −1` with the same flux and boundary mean.
    fn green_volume_integral(&self, x_star: Vec3<T>) -> Result<T> {
        self.script_g(x_star)
    }
}

/// Exact value of `R(x*, x*)` for the force-free ball, `(log(2R) − 2) / (4πR)`.
pub fn ball_regular_part_exact<T: Scalar>(radius: T) -> T {
    ((T::lit(2.0) * radius).ln() - T::lit(2.0)) / (T::lit(4.0) * T::PI() * radius)
}

/// `𝒢(x) = (1 − |x|²)/6` on the unit ball.
pub fn ball_script_g<T: Scalar>(x: Vec3<T>) -> Result<T> {
    let domain = DomainModel::unit_ball(T::one())?;
    BallNoDriftGreen::new(&domain).script_g(x)
}

#[derive(Debug, Clone, PartialEq)]
enum PointKey<T> {
    Any,
    At(Vec3<T>),
}

impl<T: Scalar> PointKey<T> {
    fn matches(&self, p: Vec3<T>) -> bool {
        match self {
            Self::Any => true,
            Self::At(q) => {
                let tol = T::lit(1e-9);
                (q.x - p.x).abs() <= tol && (q.y - p.y).abs() <= tol && (q.z - p.z).abs() <= tol
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Record<T> {
    RegularPart(PointKey<T>, T),
    ScriptG(PointKey<T>, T),
    Green(PointKey<T>, PointKey<T>, T),
    GreenIntegral(PointKey<T>, T),
    ScriptGIntegral(T),
}

/// Green data read from a text table; see the module documentation for the format.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserSuppliedGreen<T> {
    records: Vec<Record<T>>,
}

impl<T: Scalar> UserSuppliedGreen<T> {
    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| NekError::Parse(format!("green table line {}: {msg}", lineno + 1));
            let mut pos = 1;
            let point = |pos: &mut usize| -> Result<PointKey<T>> {
                match toks.get(*pos) {
                    Some(&"*") => {
                        *pos += 1;
                        Ok(PointKey::Any)
                    }
                    Some(_) => {
                        let mut c = [T::zero(); 3];
                        for (k, ck) in c.iter_mut().enumerate() {
                            let tok = toks.get(*pos + k).ok_or_else(|| err("missing coordinate"))?;
                            *ck = parse_number(tok).map_err(|_| err(&format!("bad coordinate '{tok}'")))?;
                        }
                        *pos += 3;
                        Ok(PointKey::At(Vec3::from_array(c)))
                    }
                    None => Err(err("missing point")),
                }
            };
            let rec = match toks[0] {
                "regular_part" => Record::RegularPart(point(&mut pos)?, T::zero()),
                "script_g" => Record::ScriptG(point(&mut pos)?, T::zero()),
                "green" => {
                    let a = point(&mut pos)?;
                    let b = point(&mut pos)?;
                    Record::Green(a, b, T::zero())
                }
                "green_integral" => Record::GreenIntegral(point(&mut pos)?, T::zero()),
                "script_g_integral" => Record::ScriptGIntegral(T::zero()),
                other => return Err(err(&format!("unknown record kind '{other}'"))),
            };
            if toks.len() != pos + 1 {
                return Err(err("expected exactly one value after the points"));
            }
            let v = parse_number(toks[pos]).map_err(|_| err(&format!("bad value '{}'", toks[pos])))?;
            records.push(match rec {
                Record::RegularPart(p, _) => Record::RegularPart(p, v),
                Record::ScriptG(p, _) => Record::ScriptG(p, v),
                Record::Green(a, b, _) => Record::Green(a, b, v),
                Record::GreenIntegral(p, _) => Record::GreenIntegral(p, v),
                Record::ScriptGIntegral(_) => Record::ScriptGIntegral(v),
            });
        }
        Ok(Self { records })
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn missing(what: &str) -> NekError {
        NekError::NotConfigured(format!("user supplied Green data has no {what} record"))
    }
}

fn parse_number<T: Scalar>(tok: &str) -> std::result::Result<T, std::num::ParseFloatError> {
    tok.parse::<f64>().map(T::lit)
}

impl<T: Scalar> GreenProvider<T> for UserSuppliedGreen<T> {
    fn provenance(&self) -> Provenance {
        Provenance::UserSupplied
    }

    fn check_supports(&self, _phi: &PotentialField<T>) -> Result<()> {
        if self.records.is_empty() {
            Err(Self::missing("usable"))
        } else {
            Ok(())
        }
    }

    fn regular_part(&self, x_star: Vec3<T>) -> Result<T> {
        self.records
            .iter()
            .find_map(|r| match r {
                Record::RegularPart(p, v) if p.matches(x_star) => Some(*v),
                _ => None,
            })
            .ok_or_else(|| Self::missing("regular_part"))
    }

    fn interior_green(&self, x_star: Vec3<T>, x: Vec3<T>) -> Result<T> {
        self.records
            .iter()
            .find_map(|r| match r {
                Record::Green(a, b, v) if a.matches(x_star) && b.matches(x) => Some(*v),
                _ => None,
            })
            .ok_or_else(|| Self::missing("green"))
    }

    fn script_g(&self, x: Vec3<T>) -> Result<T> {
        self.records
            .iter()
            .find_map(|r| match r {
                Record::ScriptG(p, v) if p.matches(x) => Some(*v),
                _ => None,
            })
            .ok_or_else(|| Self::missing("script_g"))
    }

    fn script_g_integral(&self) -> Result<T> {
        self.records
            .iter()
            .find_map(|r| match r {
                Record::ScriptGIntegral(v) => Some(*v),
                _ => None,
            })
            .ok_or_else(|| Self::missing("script_g_integral"))
    }

    fn green_volume_integral(&self, x_star: Vec3<T>) -> Result<T> {
        self.records
            .iter()
            .find_map(|r| match r {
                Record::GreenIntegral(p, v) if p.matches(x_star) => Some(*v),
                _ => None,
            })
            .ok_or_else(|| Self::missing("green_integral"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ball() -> DomainModel<f64> {
        DomainModel::unit_ball(1.0).unwrap()
    }

    #[test]
    fn singular_terms_on_the_unit_sphere() {
        let d = ball();
        let f = d.boundary_frame(Vec3::unit_z()).unwrap();
        let y = d.exp_map(f.point, f.e1 * 0.1);
        let t = kernel_singular(&d, &f, y, Vec3::zero(), SignConvention::default()).unwrap();
        assert_relative_eq!(t.coulomb, 1.0 / (2.0 * PI * 2.0 * 0.05f64.sin()), epsilon = 1e-14);
        assert_relative_eq!(t.log_term, -(0.1f64).ln() / (4.0 * PI), epsilon = 1e-14);
        assert!((t.log_term - 0.1832).abs() < 1e-4);
        assert_eq!(t.ii_difference, 0.0);
        assert_eq!(t.drift_directional, 0.0);
    }

    #[test]
    fn diagonal_and_antipode_are_rejected() {
        let d = ball();
        let f = d.boundary_frame(Vec3::unit_z()).unwrap();
        let conv = SignConvention::default();
        assert!(matches!(
            kernel_singular(&d, &f, Vec3::unit_z(), Vec3::zero(), conv),
            Err(NekError::SingularEvaluation(_))
        ));
        assert!(matches!(
            kernel_singular(&d, &f, -Vec3::unit_z(), Vec3::zero(), conv),
            Err(NekError::Chart(_))
        ));
    }

    #[test]
    fn drift_term_is_odd_and_flips_with_convention() {
        let d = ball();
        let f = d.boundary_frame(Vec3::unit_x()).unwrap();
        let force = Vec3::unit_z();
        let plus = d.exp_map(f.point, f.e2 * 0.05);
        let minus = d.exp_map(f.point, f.e2 * -0.05);
        let th = SignConvention::CurvaturePlusDrift;
        let s4 = SignConvention::CurvatureMinusDrift;
        let a = kernel_singular(&d, &f, plus, force, th).unwrap().drift_directional;
        let b = kernel_singular(&d, &f, minus, force, th).unwrap().drift_directional;
        let c = kernel_singular(&d, &f, plus, force, s4).unwrap().drift_directional;
        assert!(a.abs() > 0.01);
        assert_relative_eq!(a, -b, epsilon = 1e-12);
        assert_relative_eq!(a, -c, epsilon = 1e-15);
        assert!(a.abs() <= 1.0 / (4.0 * PI) + 1e-15);
    }

    #[test]
    fn script_g_values() {
        assert_relative_eq!(ball_script_g(Vec3::<f64>::zero()).unwrap(), 1.0 / 6.0);
        assert_eq!(ball_script_g(Vec3::<f64>::unit_y()).unwrap(), 0.0);
        assert!(ball_script_g(Vec3::new(0.0f64, 0.0, 1.1)).is_err());
        let p = BallNoDriftGreen::new(&ball());
        assert_relative_eq!(p.script_g_integral().unwrap(), 4.0 * PI / 45.0, epsilon = 1e-15);
    }

    #[test]
    fn regular_part_extrapolates_to_closed_form() {
        let p = BallNoDriftGreen::new(&ball());
        let x = Vec3::from_spherical(1.0, 0.8, 0.3);
        let r: f64 = p.regular_part(x).unwrap();
        assert!((r - ball_regular_part_exact(1.0)).abs() < 1e-5, "{r}");
        let big = DomainModel::unit_ball(2.5).unwrap();
        let p = BallNoDriftGreen::new(&big);
        let r: f64 = p.regular_part(Vec3::from_spherical(2.5, 2.0, 1.0)).unwrap();
        assert!((r - ball_regular_part_exact(2.5)).abs() < 1e-5, "{r}");
    }

    #[test]
    fn provider_rejects_forces() {
        let p = BallNoDriftGreen::new(&ball());
        assert!(p.check_supports(&PotentialField::Constant(3.0)).is_ok());
        let lin = PotentialField::linear_axis(1.0, Vec3::unit_z()).unwrap();
        assert!(matches!(p.check_supports(&lin), Err(NekError::NotConfigured(_))));
    }

    #[test]
    fn user_table_lookup() {
        let text = "# constant table\nregular_part * -0.25\nscript_g 0 0 1 0.0\ngreen * 0 0 0 0.3\nscript_g_integral 0.5\n";
        let u = UserSuppliedGreen::<f64>::parse(text).unwrap();
        assert_eq!(u.regular_part(Vec3::unit_x()).unwrap(), -0.25);
        assert_eq!(u.script_g(Vec3::unit_z()).unwrap(), 0.0);
        assert!(matches!(u.script_g(Vec3::unit_x()), Err(NekError::NotConfigured(_))));
        assert_eq!(u.interior_green(Vec3::unit_z(), Vec3::zero()).unwrap(), 0.3);
        assert_eq!(u.script_g_integral().unwrap(), 0.5);
        assert!(matches!(u.green_volume_integral(Vec3::unit_z()), Err(NekError::NotConfigured(_))));
        let empty = UserSuppliedGreen::<f64>::parse("").unwrap();
        assert!(matches!(empty.regular_part(Vec3::unit_z()), Err(NekError::NotConfigured(_))));
        assert!(UserSuppliedGreen::<f64>::parse("regular_part 1 2 -0.1").is_err());
        assert!(UserSuppliedGreen::<f64>::parse("bogus * 1").is_err());
    }

    #[test]
    fn sign_convention_parsing() {
        assert_eq!("theorem".parse::<SignConvention>().unwrap(), SignConvention::CurvaturePlusDrift);
        assert_eq!("section4".parse::<SignConvention>().unwrap(), SignConvention::CurvatureMinusDrift);
        assert!("other".parse::<SignConvention>().is_err());
        assert_eq!(SignConvention::CurvatureMinusDrift.log_coefficient(1.0, 0.5), 0.5);
        assert_eq!(SignConvention::CurvaturePlusDrift.log_coefficient(1.0, 0.5), 1.5);
    }
}
