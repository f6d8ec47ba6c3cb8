//! Potentials `φ`, their force fields `F = ∇φ`, and the weighted volume
//! `Φ(x) = ∫_M exp(φ(z) − φ(x)) dz`.
//!
//! # Tabulated potential files
//!
//! Plain text, `#` starts a comment line:
//!
//! ```text
//! nx ny nz
//! xmin ymin zmin xmax ymax zmax
//! v_000 v_001 ... (nx*ny*nz values)
//! ```
//!
//! Values are row-major over `(ix, iy, iz)` with `iz` varying fastest, on the
//! uniform grid spanning the bounding box (both ends included). Between grid
//! points the potential is trilinear.

use rayon::prelude::*;

use crate::error::{NekError, Result};
use crate::geometry::{BoundaryFrame, DomainModel};
use crate::quadrature::GaussLegendre;
use crate::{pairwise_sum, Scalar, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialField<T> {
    Zero,
    Constant(T),
    /// `φ(z) = β ⟨z, e⟩` with `e` a unit vector.
    LinearAxis { beta: T, axis: Vec3<T> },
    Tabulated(TabulatedPotential<T>),
}

impl<T: Scalar> PotentialField<T> {
    pub fn linear_axis(beta: T, axis: Vec3<T>) -> Result<Self> {
        let axis = axis
            .normalized()
            .ok_or_else(|| NekError::InvalidArgument("potential axis must be nonzero".into()))?;
        if !beta.is_finite() {
            return Err(NekError::InvalidArgument(format!("potential slope must be finite, got {beta}")));
        }
        Ok(Self::LinearAxis { beta, axis })
    }

    pub fn value(&self, x: Vec3<T>) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Constant(c) => *c,
            Self::LinearAxis { beta, axis } => *beta * x.dot(*axis),
            Self::Tabulated(t) => t.interpolate(x),
        }
    }

    /// `∇φ(x)`. Tabulated potentials use centred differences with step `1e-5 R`.
    pub fn force(&self, domain: &DomainModel<T>, x: Vec3<T>) -> Result<Vec3<T>> {
        if !domain.contains(x) {
            return Err(NekError::Domain(format!(
                "force requested at a point outside the domain (signed distance {})",
                domain.signed_distance(x)
            )));
        }
        Ok(self.gradient(x, Self::fd_step(domain)))
    }

    pub fn fd_step(domain: &DomainModel<T>) -> T {
        T::lit(1e-5) * domain.radius()
    }

    /// Unchecked gradient; `h` is only used by tabulated potentials.
    #[inline]
    pub fn gradient(&self, x: Vec3<T>, h: T) -> Vec3<T> {
        match self {
            Self::Zero | Self::Constant(_) => Vec3::zero(),
            Self::LinearAxis { beta, axis } => *axis * *beta,
            Self::Tabulated(t) => {
                let two_h = h + h;
                let d = |e: Vec3<T>| (t.interpolate(x + e * h) - t.interpolate(x - e * h)) / two_h;
                Vec3::new(d(Vec3::unit_x()), d(Vec3::unit_y()), d(Vec3::unit_z()))
            }
        }
    }

    /// `∂_ν φ` with `ν` the outward normal of `frame`.
    pub fn normal_derivative(&self, domain: &DomainModel<T>, frame: &BoundaryFrame<T>) -> Result<T> {
        Ok(self.force(domain, frame.point)?.dot(frame.nu))
    }

    /// True when the force field is the same at every point.
    pub fn has_constant_force(&self) -> bool {
        !matches!(self, Self::Tabulated(_))
    }

    /// True when the force field vanishes identically.
    pub fn is_force_free(&self) -> bool {
        match self {
            Self::Zero | Self::Constant(_) => true,
            Self::LinearAxis { beta, .. } => *beta == T::zero(),
            Self::Tabulated(_) => false,
        }
    }
}

/// Potential sampled on a uniform grid, trilinear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential<T> {
    pub dims: [usize; 3],
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> TabulatedPotential<T> {
    pub fn new(dims: [usize; 3], lo: Vec3<T>, hi: Vec3<T>, values: Vec<T>) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(NekError::InvalidArgument(format!("grid needs at least 2 points per axis, got {dims:?}")));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if values.len() != expected {
            return Err(NekError::InvalidArgument(format!(
                "grid {dims:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(NekError::InvalidArgument("empty bounding box".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NekError::InvalidArgument("non-finite potential value".into()));
        }
        Ok(Self { dims, lo, hi, values })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| NekError::Parse(format!("tabulated potential: missing {what}")))
        };
        let mut dims = [0usize; 3];
        for (i, d) in dims.iter_mut().enumerate() {
            let tok = next("grid dimension")?;
            *d = tok
                .parse()
                .map_err(|_| NekError::Parse(format!("tabulated potential: bad dimension #{i} '{tok}'")))?;
        }
        let mut bbox = [T::zero(); 6];
        for b in bbox.iter_mut() {
            *b = parse_scalar(next("bounding box")?)?;
        }
        let n = dims[0] * dims[1] * dims[2];
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(parse_scalar(next("grid value")?)?);
        }
        if next("end of data").is_ok() {
            return Err(NekError::Parse("tabulated potential: trailing values after grid".into()));
        }
        Self::new(
            dims,
            Vec3::new(bbox[0], bbox[1], bbox[2]),
            Vec3::new(bbox[3], bbox[4], bbox[5]),
            values,
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\n{:e} {:e} {:e} {:e} {:e} {:e}\n",
            self.dims[0], self.dims[1], self.dims[2], self.lo.x, self.lo.y, self.lo.z, self.hi.x, self.hi.y, self.hi.z
        );
        for chunk in self.values.chunks(self.dims[2]) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Samples an analytic potential on the grid.
    pub fn sample<F: Fn(Vec3<T>) -> T>(dims: [usize; 3], lo: Vec3<T>, hi: Vec3<T>, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        let coord = |i: usize, n: usize, a: T, b: T| a + (b - a) * T::count(i) / T::count(n - 1);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    values.push(f(Vec3::new(
                        coord(i, dims[0], lo.x, hi.x),
                        coord(j, dims[1], lo.y, hi.y),
                        coord(k, dims[2], lo.z, hi.z),
                    )));
                }
            }
        }
        Self::new(dims, lo, hi, values)
    }

    /// Trilinear interpolation; points outside the box are clamped onto it.
    pub fn interpolate(&self, x: Vec3<T>) -> T {
        let locate = |v: T, a: T, b: T, n: usize| {
            let cells = T::count(n - 1);
            let s = ((v - a) / (b - a) * cells).max(T::zero()).min(cells);
            let i = s.floor().to_usize().unwrap_or(0).min(n - 2);
            (i, s - T::count(i))
        };
        let [nx, ny, nz] = self.dims;
        let (i, fx) = locate(x.x, self.lo.x, self.hi.x, nx);
        let (j, fy) = locate(x.y, self.lo.y, self.hi.y, ny);
        let (k, fz) = locate(x.z, self.lo.z, self.hi.z, nz);
        let at = |i: usize, j: usize, k: usize| self.values[(i * ny + j) * nz + k];
        let lerp = |a: T, b: T, t: T| a + (b - a) * t;
        let c00 = lerp(at(i, j, k), at(i + 1, j, k), fx);
        let c10 = lerp(at(i, j + 1, k), at(i + 1, j + 1, k), fx);
        let c01 = lerp(at(i, j, k + 1), at(i + 1, j, k + 1), fx);
        let c11 = lerp(at(i, j + 1, k + 1), at(i + 1, j + 1, k + 1), fx);
        lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz)
    }
}

fn parse_scalar<T: Scalar>(tok: &str) -> Result<T> {
    tok.parse::<f64>()
        .map(T::lit)
        .map_err(|_| NekError::Parse(format!("tabulated potential: bad number '{tok}'")))
}

/// `Φ(x)` together with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedVolume<T> {
    pub value: T,
    pub base_point: Vec3<T>,
    pub quadrature_error_estimate: T,
}

const MAX_ORDER: usize = 128;

/// `Φ(x) = ∫_M exp(φ(z) − φ(x)) dz` by a product rule on the ball
/// (Gauss–Legendre in `r` and `cos θ`, trapezoid in azimuth), doubling the
/// order until successive estimates agree to `tol` relative.
pub fn weighted_volume<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    x: Vec3<T>,
    tol: T,
) -> Result<WeightedVolume<T>> {
    if !(tol >= T::lit(1e-12) && tol <= T::lit(1e-2)) {
        return Err(NekError::InvalidArgument(format!("tolerance must lie in [1e-12, 1e-2], got {tol}")));
    }
    if !domain.contains(x) {
        return Err(NekError::Domain("weighted volume base point outside the domain".into()));
    }
    let base = phi.value(x);
    let mut previous: Option<T> = None;
    let mut order = 8;
    loop {
        let estimate = ball_product_rule(domain, order, |z| (phi.value(z) - base).exp());
        if let Some(prev) = previous {
            let err = (estimate - prev).abs();
            if err <= tol * estimate.abs() {
                return Ok(WeightedVolume {
                    value: estimate,
                    base_point: x,
                    quadrature_error_estimate: err,
                });
            }
            if order >= MAX_ORDER {
                return Err(NekError::QuadratureFailure {
                    message: format!("weighted volume did not reach relative tolerance {tol}"),
                    partial_estimate: estimate.as_f64(),
                    error_estimate: err.as_f64(),
                });
            }
        }
        previous = Some(estimate);
        order *= 2;
    }
}

/// Product rule of order `n` over the ball; shells are summed in a fixed order.
pub(crate) fn ball_product_rule<T: Scalar, F>(domain: &DomainModel<T>, n: usize, f: F) -> T
where
    F: Fn(Vec3<T>) -> T + Sync,
{
    let radius = domain.radius();
    let radial: Vec<(T, T)> = GaussLegendre::<T>::new(n).on_interval(T::zero(), radius).collect();
    let polar = GaussLegendre::<T>::new(n);
    let n_az = 2 * n;
    let az_step = T::TAU() / T::count(n_az);
    let shells: Vec<T> = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut terms = Vec::with_capacity(n * n_az);
            for (&mu, &wmu) in polar.nodes.iter().zip(&polar.weights) {
                let s = (T::one() - mu * mu).sqrt();
                for k in 0..n_az {
                    let (sa, ca) = (az_step * T::count(k)).sin_cos();
                    let z = Vec3::new(r * s * ca, r * s * sa, r * mu);
                    terms.push(wmu * f(z));
                }
            }
            wr * r * r * az_step * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&shells)
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
    fn force_examples() {
        let d = ball();
        let x = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(PotentialField::Zero.force(&d, x).unwrap(), Vec3::zero());
        assert_eq!(PotentialField::Constant(7.0).force(&d, x).unwrap(), Vec3::zero());
        let lin = PotentialField::linear_axis(0.5, Vec3::unit_z()).unwrap();
        assert_eq!(lin.force(&d, x).unwrap(), Vec3::new(0.0, 0.0, 0.5));
        assert!(matches!(lin.force(&d, Vec3::new(0.0, 0.0, 1.5)), Err(NekError::Domain(_))));
        assert!(PotentialField::linear_axis(1.0, Vec3::zero()).is_err());
    }

    #[test]
    fn weighted_volume_of_constant_potentials_is_the_volume() {
        let d = ball();
        let x = Vec3::unit_z();
        for phi in [PotentialField::Zero, PotentialField::Constant(3.5)] {
            let w = weighted_volume(&d, &phi, x, 1e-10).unwrap();
            assert_relative_eq!(w.value, 4.0 * PI / 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_volume_tolerance_range() {
        let d = ball();
        assert!(weighted_volume(&d, &PotentialField::Zero, Vec3::zero(), 1e-13).is_err());
        assert!(weighted_volume(&d, &PotentialField::Zero, Vec3::zero(), 0.1).is_err());
        assert!(weighted_volume(&d, &PotentialField::Zero, Vec3::new(2.0, 0.0, 0.0), 1e-6).is_err());
    }

    #[test]
    fn tabulated_round_trip_and_linear_exactness() {
        let lo = Vec3::new(-1.0, -1.0, -1.0);
        let hi = Vec3::new(1.0, 1.0, 1.0);
        let tab = TabulatedPotential::sample([5, 4, 6], lo, hi, |z| 0.3 * z.x - 0.2 * z.y + 0.7 * z.z + 1.0).unwrap();
        let back = TabulatedPotential::<f64>::parse(&tab.to_text()).unwrap();
        assert_eq!(back.dims, tab.dims);
        for (a, b) in back.values.iter().zip(&tab.values) {
            assert_relative_eq!(*a, *b, max_relative = 1e-15);
        }
        let phi = PotentialField::Tabulated(back);
        let f = phi.force(&ball(), Vec3::new(0.13, -0.41, 0.27)).unwrap();
        assert_relative_eq!(f.x, 0.3, epsilon = 1e-8);
        assert_relative_eq!(f.y, -0.2, epsilon = 1e-8);
        assert_relative_eq!(f.z, 0.7, epsilon = 1e-8);
    }

    #[test]
    fn tabulated_parse_errors() {
        assert!(TabulatedPotential::<f64>::parse("2 2").is_err());
        assert!(TabulatedPotential::<f64>::parse("2 2 2\n0 0 0 1 1 1\n1 2 3").is_err());
        assert!(TabulatedPotential::<f64>::parse("2 2 2\n0 0 0 1 1 1\n1 2 3 4 5 6 7 8 9").is_err());
        assert!(TabulatedPotential::<f64>::parse("2 2 2\n0 0 0 1 1 1\n1 2 3 4 5 6 7 x").is_err());
        assert!(TabulatedPotential::<f64>::parse("# header\n2 2 2 # dims\n0 0 0 1 1 1\n1 2 3 4 5 6 7 8").is_ok());
    }
}
