//! Domain models, boundary frames, geodesic windows and rescaled boundary charts.
//!
//! The shipped domain is the ball of radius `R`, for which the exponential map of
//! the boundary sphere, its inverse and all distances are closed form. The interior
//! distance `d_g` is the chord length, the boundary distance `d_h` is the
//! great-circle length.

use serde::{Deserialize, Serialize};

use crate::error::{NekError, Result};
use crate::quadrature::GaussLegendre;
use crate::{Scalar, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainKind<T> {
    UnitBall { radius: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainModel<T> {
    pub kind: DomainKind<T>,
    pub volume: T,
    pub boundary_area: T,
}

impl<T: Scalar> DomainModel<T> {
    pub fn unit_ball(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(NekError::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        let pi = T::PI();
        Ok(Self {
            kind: DomainKind::UnitBall { radius },
            volume: T::lit(4.0) / T::lit(3.0) * pi * radius.powi(3),
            boundary_area: T::lit(4.0) * pi * radius * radius,
        })
    }

    pub fn radius(&self) -> T {
        match self.kind {
            DomainKind::UnitBall { radius } => radius,
        }
    }

    /// Tolerance for boundary membership: `1e-10 R`, widened to a few ulps for `f32`.
    pub fn boundary_tolerance(&self) -> T {
        let rel = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
        rel * self.radius()
    }

    /// Negative inside, zero on the boundary.
    pub fn signed_distance(&self, x: Vec3<T>) -> T {
        x.norm() - self.radius()
    }

    /// Gradient of the signed distance; the outward unit normal on the boundary.
    pub fn outward_normal(&self, x: Vec3<T>) -> Result<Vec3<T>> {
        x.normalized()
            .ok_or_else(|| NekError::Domain("normal undefined at the centre of the ball".into()))
    }

    /// Closed domain membership (boundary included up to tolerance).
    pub fn contains(&self, x: Vec3<T>) -> bool {
        self.signed_distance(x) <= self.boundary_tolerance()
    }

    pub fn is_on_boundary(&self, x: Vec3<T>) -> bool {
        self.signed_distance(x).abs() <= self.boundary_tolerance()
    }

    /// Projects a point lying within tolerance of the boundary onto it.
    pub fn project_to_boundary(&self, x: Vec3<T>) -> Result<Vec3<T>> {
        if !self.is_on_boundary(x) {
            return Err(NekError::Domain(format!(
                "point at signed distance {} is not on the boundary",
                self.signed_distance(x)
            )));
        }
        Ok(self.outward_normal(x)? * self.radius())
    }

    /// Injectivity radius of the boundary sphere.
    pub fn injectivity_radius(&self) -> T {
        T::PI() * self.radius()
    }

    /// Interior (chord) distance `d_g`.
    pub fn chord_distance(&self, x: Vec3<T>, y: Vec3<T>) -> T {
        x.distance(y)
    }

    /// Boundary geodesic (great-circle) distance `d_h` between two boundary points.
    pub fn geodesic_distance(&self, x: Vec3<T>, y: Vec3<T>) -> T {
        let angle = x.cross(y).norm().atan2(x.dot(y));
        self.radius() * angle
    }

    /// Boundary exponential map: follows the great circle from `base` with
    /// initial velocity `v` (tangent at `base`) for unit time.
    pub fn exp_map(&self, base: Vec3<T>, v: Vec3<T>) -> Vec3<T> {
        let r = self.radius();
        let speed = v.norm();
        if speed == T::zero() {
            return base;
        }
        let angle = speed / r;
        base * angle.cos() + v * (angle.sin() * r / speed)
    }

    /// Inverse of [`Self::exp_map`]: tangent vector at `base` whose length is the
    /// geodesic distance to `y`.
    pub fn log_map(&self, base: Vec3<T>, y: Vec3<T>) -> Result<Vec3<T>> {
        let n = base.normalized().ok_or_else(|| NekError::Domain("degenerate base point".into()))?;
        let tangential = y - n * y.dot(n);
        let dist = self.geodesic_distance(base, y);
        if dist == T::zero() {
            return Ok(Vec3::zero());
        }
        if dist >= self.injectivity_radius() * (T::one() - T::lit(1e-12).max(T::epsilon() * T::lit(16.0))) {
            return Err(NekError::Chart("antipodal point has no unique boundary geodesic".into()));
        }
        let dir = tangential
            .normalized()
            .ok_or_else(|| NekError::Chart("tangent direction undefined".into()))?;
        Ok(dir * dist)
    }

    /// Principal frame of the boundary at `x`.
    ///
    /// The sphere is umbilic, so the tangent pair is fixed by convention:
    /// `E1 = normalize(ẑ × ν)` (or `x̂` at the poles) and `E2 = ν × E1`.
    pub fn boundary_frame(&self, x: Vec3<T>) -> Result<BoundaryFrame<T>> {
        let point = self.project_to_boundary(x)?;
        let nu = self.outward_normal(point)?;
        let zc = Vec3::unit_z().cross(nu);
        let e1 = if zc.norm() > T::lit(1e-8) {
            zc.normalized().expect("nonzero")
        } else {
            Vec3::unit_x()
        };
        let e2 = nu.cross(e1);
        // Curvatures with respect to the inward normal: positive on a sphere.
        let k = T::one() / self.radius();
        Ok(BoundaryFrame {
            point,
            nu,
            e1,
            e2,
            lambda1: k,
            lambda2: k,
            mean_curvature: k,
        })
    }
}

/// Orthonormal frame `{E1, E2, ν}` with principal curvatures at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame<T> {
    pub point: Vec3<T>,
    /// Outward unit normal.
    pub nu: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub lambda1: T,
    pub lambda2: T,
    /// `(λ1 + λ2) / 2`.
    pub mean_curvature: T,
}

impl<T: Scalar> BoundaryFrame<T> {
    /// Scalar second fundamental form `II(v, v)` for a tangent vector `v`.
    pub fn second_fundamental(&self, v: Vec3<T>) -> T {
        let (c1, c2) = self.tangent_coordinates(v);
        self.lambda1 * c1 * c1 + self.lambda2 * c2 * c2
    }

    /// Rotation by `π/2` in the tangent plane (Hodge star on the boundary surface).
    pub fn hodge_star(&self, v: Vec3<T>) -> Vec3<T> {
        self.nu.cross(v)
    }

    pub fn tangent_coordinates(&self, v: Vec3<T>) -> (T, T) {
        (v.dot(self.e1), v.dot(self.e2))
    }

    pub fn tangent_vector(&self, c1: T, c2: T) -> Vec3<T> {
        self.e1 * c1 + self.e2 * c2
    }

    /// Tangential part of a vector field value.
    pub fn tangential_part(&self, f: Vec3<T>) -> Vec3<T> {
        f - self.nu * f.dot(self.nu)
    }
}

/// Absorbing geodesic ellipse
/// `{ exp_{x*}(ε t1 E1 + ε t2 E2) : t1² + t2²/a² ≤ 1 }` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec<T> {
    pub center: Vec3<T>,
    pub eps: T,
    pub a: T,
    pub frame: BoundaryFrame<T>,
    domain: DomainModel<T>,
}

impl<T: Scalar> WindowSpec<T> {
    pub fn new(domain: &DomainModel<T>, center: Vec3<T>, eps: T, a: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(NekError::InvalidArgument(format!("window size must be positive, got {eps}")));
        }
        if !(a > T::zero() && a <= T::one()) {
            return Err(NekError::InvalidArgument(format!(
                "eccentricity parameter must lie in (0, 1], got {a}"
            )));
        }
        // The whole window has to sit well inside the injectivity region of its centre.
        if eps >= domain.injectivity_radius() * T::lit(0.5) {
            return Err(NekError::InvalidArgument(format!(
                "window size {eps} exceeds the chart bound {}",
                domain.injectivity_radius() * T::lit(0.5)
            )));
        }
        let frame = domain.boundary_frame(center)?;
        Ok(Self {
            center: frame.point,
            eps,
            a,
            frame,
            domain: *domain,
        })
    }

    /// Disk window of geodesic radius `eps` centred at spherical angles
    /// `(theta, phi)` on the boundary of `domain`.
    pub fn disk_at_angles(domain: &DomainModel<T>, theta: T, phi: T, eps: T) -> Result<Self> {
        Self::new(domain, Vec3::from_spherical(domain.radius(), theta, phi), eps, T::one())
    }

    pub fn domain(&self) -> &DomainModel<T> {
        &self.domain
    }

    pub fn is_disk(&self) -> bool {
        self.a == T::one()
    }

    /// Rescaled geodesic chart `t' ↦ exp_{x*}(ε t1 E1 + ε t2 E2)`.
    pub fn rescaled_chart(&self, t1: T, t2: T) -> Result<Vec3<T>> {
        let v = self.frame.tangent_vector(t1 * self.eps, t2 * self.eps);
        if v.norm() >= self.domain.injectivity_radius() {
            return Err(NekError::Chart(format!(
                "rescaled coordinates ({t1}, {t2}) leave the injectivity region"
            )));
        }
        Ok(self.domain.exp_map(self.center, v))
    }

    /// Inverse of [`Self::rescaled_chart`].
    pub fn chart_coordinates(&self, y: Vec3<T>) -> Result<(T, T)> {
        let y = self.domain.project_to_boundary(y)?;
        let v = self.domain.log_map(self.center, y)?;
        let (c1, c2) = self.frame.tangent_coordinates(v);
        Ok((c1 / self.eps, c2 / self.eps))
    }

    /// Window membership of a boundary point.
    pub fn contains(&self, y: Vec3<T>) -> Result<bool> {
        let y = self.domain.project_to_boundary(y)?;
        if self.domain.geodesic_distance(self.center, y) > self.eps * T::lit(1.000_001) {
            return Ok(false);
        }
        let (t1, t2) = self.chart_coordinates(y)?;
        Ok(t1 * t1 + t2 * t2 / (self.a * self.a) <= T::one())
    }

    /// Fast membership test for a point already on the boundary, used in the
    /// Monte Carlo inner loop. Same result as [`Self::contains`].
    #[inline]
    pub fn contains_boundary_point(&self, y: Vec3<T>) -> bool {
        let r = self.domain.radius();
        let n = y * (T::one() / y.norm());
        let cos_angle = n.dot(self.center) / r;
        // Quick rejection on the angular radius of the circumscribed disk.
        if cos_angle < (self.eps / r).cos() - T::lit(1e-12) {
            return false;
        }
        let angle = n.cross(self.center * (T::one() / r)).norm().atan2(cos_angle);
        let tangential = n - self.center * (cos_angle / r);
        let tn = tangential.norm();
        if tn == T::zero() {
            return true;
        }
        let scale = r * angle / (tn * self.eps);
        let t1 = tangential.dot(self.frame.e1) * scale;
        let t2 = tangential.dot(self.frame.e2) * scale;
        t1 * t1 + t2 * t2 / (self.a * self.a) <= T::one()
    }

    /// Boundary area of the window, exact geodesic polar integration.
    pub fn area(&self) -> T {
        // In geodesic polar coordinates dA = R sin(ρ/R) dρ dθ; the ellipse boundary
        // sits at ρ(θ) = ε a / sqrt(a² cos² θ + sin² θ).
        let r = self.domain.radius();
        let gl = GaussLegendre::<T>::new(64);
        let quarter = gl.integrate(T::zero(), T::FRAC_PI_2(), |th| {
            let (s, c) = th.sin_cos();
            let rho = self.eps * self.a / (self.a * self.a * c * c + s * s).sqrt();
            r * r * (T::one() - (rho / r).cos())
        });
        quarter * T::lit(4.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ball(r: f64) -> DomainModel<f64> {
        DomainModel::unit_ball(r).unwrap()
    }

    #[test]
    fn ball_volume_and_area() {
        assert_relative_eq!(ball(1.0).volume, 4.0 * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(ball(1.0).volume, 4.18879, epsilon = 1e-5);
        assert_relative_eq!(ball(2.0).boundary_area, 16.0 * PI, max_relative = 1e-12);
        assert!(DomainModel::unit_ball(0.0).is_err());
        assert!(DomainModel::unit_ball(-1.0).is_err());
        assert!(DomainModel::<f64>::unit_ball(f64::NAN).is_err());
    }

    #[test]
    fn signed_distance_and_normal() {
        let d = ball(2.0);
        assert!(d.signed_distance(Vec3::new(0.5, 0.0, 0.0)) < 0.0);
        assert_eq!(d.signed_distance(Vec3::new(0.0, 2.0, 0.0)), 0.0);
        let n = d.outward_normal(Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert_relative_eq!(n.y, 1.0);
    }

    #[test]
    fn frame_at_north_pole_and_curvatures() {
        let f = ball(1.0).boundary_frame(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(f.lambda1, 1.0);
        assert_eq!(f.lambda2, 1.0);
        assert_eq!(f.mean_curvature, 1.0);
        assert_eq!(f.e1, Vec3::unit_x());
        let f2 = ball(2.0).boundary_frame(Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert_eq!(f2.mean_curvature, 0.5);
        assert!(matches!(
            ball(1.0).boundary_frame(Vec3::zero()),
            Err(NekError::Domain(_))
        ));
    }

    #[test]
    fn frame_is_orthonormal_and_positively_oriented() {
        let d = ball(1.5);
        for i in 0..40 {
            let th = PI * (i as f64 + 0.5) / 40.0;
            let ph = 0.7 * i as f64;
            let f = d.boundary_frame(Vec3::from_spherical(1.5, th, ph)).unwrap();
            let vs = [f.e1, f.e2, f.nu];
            for a in 0..3 {
                for b in 0..3 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((vs[a].dot(vs[b]) - expect).abs() < 1e-12);
                }
            }
            assert!(f.e1.cross(f.e2).dot(f.nu) > 0.0);
            assert_relative_eq!(f.mean_curvature, 0.5 * (f.lambda1 + f.lambda2));
        }
    }

    #[test]
    fn exp_and_log_are_inverse() {
        let d = ball(1.0);
        let base = Vec3::from_spherical(1.0, 0.4, 1.1);
        let f = d.boundary_frame(base).unwrap();
        let v = f.tangent_vector(0.3, -0.2);
        let y = d.exp_map(base, v);
        assert!(d.is_on_boundary(y));
        let back = d.log_map(base, y).unwrap();
        assert!((back - v).norm() < 1e-13);
        assert!(matches!(d.log_map(base, -base), Err(NekError::Chart(_))));
    }

    #[test]
    fn window_membership_examples() {
        let d = ball(1.0);
        let w = WindowSpec::new(&d, Vec3::unit_z(), 0.1, 1.0).unwrap();
        assert!(w.contains(w.center).unwrap());
        let off = d.exp_map(w.center, w.frame.e1 * (1.001 * 0.1));
        assert!(!w.contains(off).unwrap());
        let inside = d.exp_map(w.center, w.frame.e1 * (0.999 * 0.1));
        assert!(w.contains(inside).unwrap());

        let e = WindowSpec::new(&d, Vec3::unit_z(), 0.1, 0.5).unwrap();
        let y = d.exp_map(e.center, e.frame.e2 * 0.08);
        assert!(!e.contains(y).unwrap());
        let y = d.exp_map(e.center, e.frame.e2 * 0.049);
        assert!(e.contains(y).unwrap());
        let y = d.exp_map(e.center, e.frame.e1 * 0.08);
        assert!(e.contains(y).unwrap());

        assert!(matches!(w.contains(Vec3::new(0.0, 0.0, 0.5)), Err(NekError::Domain(_))));
    }

    #[test]
    fn fast_membership_agrees_with_reference() {
        let d = ball(1.0);
        let w = WindowSpec::new(&d, Vec3::from_spherical(1.0, 1.0, 2.0), 0.2, 0.6).unwrap();
        for i in 0..2000 {
            let t1 = -1.4 + 2.8 * ((i * 37 % 2000) as f64) / 2000.0;
            let t2 = -1.4 + 2.8 * ((i * 91 % 2000) as f64) / 2000.0;
            let y = w.rescaled_chart(t1, t2).unwrap();
            assert_eq!(w.contains(y).unwrap(), w.contains_boundary_point(y), "at ({t1}, {t2})");
        }
    }

    #[test]
    fn window_validation() {
        let d = ball(1.0);
        assert!(WindowSpec::new(&d, Vec3::unit_z(), 0.0, 1.0).is_err());
        assert!(WindowSpec::new(&d, Vec3::unit_z(), 0.1, 1.5).is_err());
        assert!(WindowSpec::new(&d, Vec3::unit_z(), 0.1, 0.0).is_err());
        assert!(WindowSpec::new(&d, Vec3::unit_z(), 2.0, 1.0).is_err());
        assert!(WindowSpec::new(&d, Vec3::new(0.0, 0.0, 0.9), 0.1, 1.0).is_err());
    }

    #[test]
    fn rescaled_chart_center_and_unit_speed() {
        let d = ball(1.0);
        let w = WindowSpec::new(&d, Vec3::from_spherical(1.0, 0.3, 0.2), 0.05, 0.7).unwrap();
        assert!((w.rescaled_chart(0.0, 0.0).unwrap() - w.center).norm() < 1e-15);
        let p = w.rescaled_chart(1.0, 0.0).unwrap();
        assert_relative_eq!(d.geodesic_distance(w.center, p), 0.05, epsilon = 1e-12);
        let (t1, t2) = w.chart_coordinates(w.rescaled_chart(0.4, -1.3).unwrap()).unwrap();
        assert_relative_eq!(t1, 0.4, epsilon = 1e-11);
        assert_relative_eq!(t2, -1.3, epsilon = 1e-11);
        assert!(matches!(w.rescaled_chart(70.0, 0.0), Err(NekError::Chart(_))));
    }

    #[test]
    fn cap_area_matches_closed_form() {
        let d = ball(1.0);
        let w = WindowSpec::new(&d, Vec3::unit_z(), 0.3, 1.0).unwrap();
        assert_relative_eq!(w.area(), 2.0 * PI * (1.0 - 0.3f64.cos()), max_relative = 1e-13);
    }
}
