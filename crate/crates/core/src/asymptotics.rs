//! Narrow escape time expansions for a geodesic disk or ellipse window:
//!
//! ```text
//! C_{ε,a} = K_a Φ / (4π² a ε) − c Φ/(4π) log ε + R Φ − 𝒢(x*)
//!           − c Φ/(16π³) I_log(a) + (λ1 − λ2) Φ/(64π³) I_aniso(a)
//! ```
//!
//! with `c = H + ∂_νφ` (or `H − ∂_νφ`, see [`SignConvention`]). For the disk the last
//! two terms reduce to `−c Φ/(4π) (2 log 2 − 3/2)`. The omitted remainder is
//! `O(ε log ε)` for the constant and `O(ε)` for the pointwise field.

use std::sync::Arc;

use serde::Serialize;

use crate::disk_operators::{disk_integrals, DiskIntegrals, DiskQuadrature};
use crate::error::{NekError, Result};
use crate::geometry::{DomainModel, WindowSpec};
use crate::green_kernel::{GreenProvider, SignConvention};
use crate::potential::{weighted_volume, PotentialField};
use crate::{Scalar, Vec3};

pub const CONSTANT_ERROR_ORDER: &str = "O(eps log eps)";
pub const FIELD_ERROR_ORDER: &str = "O(eps)";

/// Relative tolerance used for `Φ(x*)`.
pub const WEIGHTED_VOLUME_TOL: f64 = 1e-10;

/// Geometric and potential data at the window centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowData<T> {
    pub center: Vec3<T>,
    /// `Φ(x*)`.
    pub weighted_volume: T,
    pub mean_curvature: T,
    /// `∂_νφ(x*)` with `ν` outward.
    pub normal_derivative: T,
    pub lambda1: T,
    pub lambda2: T,
}

impl<T: Scalar> WindowData<T> {
    pub fn new(domain: &DomainModel<T>, phi: &PotentialField<T>, window: &WindowSpec<T>) -> Result<Self> {
        let frame = window.frame;
        let vol = weighted_volume(domain, phi, window.center, T::lit(WEIGHTED_VOLUME_TOL))?;
        Ok(Self {
            center: window.center,
            weighted_volume: vol.value,
            mean_curvature: frame.mean_curvature,
            normal_derivative: phi.normal_derivative(domain, &frame)?,
            lambda1: frame.lambda1,
            lambda2: frame.lambda2,
        })
    }

    pub fn log_coefficient(&self, convention: SignConvention) -> T {
        convention.log_coefficient(self.mean_curvature, self.normal_derivative)
    }
}

/// `K_a Φ / (4π² a ε)`.
pub fn leading_term<T: Scalar>(ka: T, weighted_volume: T, a: T, eps: T) -> T {
    ka * weighted_volume / (T::lit(4.0) * T::PI() * T::PI() * a * eps)
}

/// `−c Φ/(4π) log ε`.
pub fn log_term<T: Scalar>(coefficient: T, weighted_volume: T, eps: T) -> T {
    -coefficient * weighted_volume / (T::lit(4.0) * T::PI()) * eps.ln()
}

/// Every input of the expansion, echoed with the result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionInputs<T> {
    pub eps: T,
    pub a: T,
    pub weighted_volume: T,
    pub mean_curvature: T,
    pub normal_derivative: T,
    pub lambda1: T,
    pub lambda2: T,
    pub ka: T,
    pub regular_part: T,
    pub script_g_center: T,
    /// `None` for the disk formula, which uses `2 log 2 − 3/2` instead.
    pub ilog: Option<T>,
    pub ianiso: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NETExpansion<T> {
    pub leading: T,
    pub log_term: T,
    pub constant_term: T,
    pub total: T,
    pub error_order: &'static str,
    pub convention: SignConvention,
    pub inputs: ExpansionInputs<T>,
}

/// Provider values at the window centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProviderData<T> {
    pub regular_part: T,
    pub script_g_center: T,
}

impl<T: Scalar> ProviderData<T> {
    pub fn new(provider: &dyn GreenProvider<T>, phi: &PotentialField<T>, center: Vec3<T>) -> Result<Self> {
        provider.check_supports(phi)?;
        Ok(Self {
            regular_part: provider.regular_part(center)?,
            script_g_center: provider.script_g(center)?,
        })
    }
}

/// Disk constant `C_ε` from precomputed window and provider data.
pub fn assemble_disk<T: Scalar>(
    eps: T,
    data: &WindowData<T>,
    provider: &ProviderData<T>,
    convention: SignConvention,
) -> NETExpansion<T> {
    let phi = data.weighted_volume;
    let c = data.log_coefficient(convention);
    let leading = phi / (T::lit(4.0) * eps);
    let log_t = log_term(c, phi, eps);
    let bridge = T::lit(2.0) * T::LN_2() - T::lit(1.5);
    let constant_term = provider.regular_part * phi - provider.script_g_center
        - c * phi / (T::lit(4.0) * T::PI()) * bridge;
    NETExpansion {
        leading,
        log_term: log_t,
        constant_term,
        total: leading + log_t + constant_term,
        error_order: CONSTANT_ERROR_ORDER,
        convention,
        inputs: ExpansionInputs {
            eps,
            a: T::one(),
            weighted_volume: phi,
            mean_curvature: data.mean_curvature,
            normal_derivative: data.normal_derivative,
            lambda1: data.lambda1,
            lambda2: data.lambda2,
            ka: T::PI() * T::PI(),
            regular_part: provider.regular_part,
            script_g_center: provider.script_g_center,
            ilog: None,
            ianiso: None,
        },
    }
}

/// Ellipse constant `C_{ε,a}` from precomputed disk integrals.
pub fn assemble_ellipse<T: Scalar>(
    eps: T,
    integrals: &DiskIntegrals<T>,
    data: &WindowData<T>,
    provider: &ProviderData<T>,
    convention: SignConvention,
) -> NETExpansion<T> {
    let phi = data.weighted_volume;
    let c = data.log_coefficient(convention);
    let pi3 = T::PI() * T::PI() * T::PI();
    let leading = leading_term(integrals.ka, phi, integrals.a, eps);
    let log_t = log_term(c, phi, eps);
    let constant_term = provider.regular_part * phi - provider.script_g_center
        - c * phi / (T::lit(16.0) * pi3) * integrals.ilog
        + (data.lambda1 - data.lambda2) * phi / (T::lit(64.0) * pi3) * integrals.ianiso;
    NETExpansion {
        leading,
        log_term: log_t,
        constant_term,
        total: leading + log_t + constant_term,
        error_order: CONSTANT_ERROR_ORDER,
        convention,
        inputs: ExpansionInputs {
            eps,
            a: integrals.a,
            weighted_volume: phi,
            mean_curvature: data.mean_curvature,
            normal_derivative: data.normal_derivative,
            lambda1: data.lambda1,
            lambda2: data.lambda2,
            ka: integrals.ka,
            regular_part: provider.regular_part,
            script_g_center: provider.script_g_center,
            ilog: Some(integrals.ilog),
            ianiso: Some(integrals.ianiso),
        },
    }
}

/// `C_ε` for a disk window.
pub fn net_constant_disk<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    window: &WindowSpec<T>,
    provider: &dyn GreenProvider<T>,
    convention: SignConvention,
) -> Result<NETExpansion<T>> {
    if !window.is_disk() {
        return Err(NekError::InvalidArgument(format!(
            "disk constant requested for an ellipse window (a = {}); use the ellipse variant",
            window.a
        )));
    }
    let data = WindowData::new(domain, phi, window)?;
    let prov = ProviderData::new(provider, phi, window.center)?;
    Ok(assemble_disk(window.eps, &data, &prov, convention))
}

/// `C_{ε,a}` for an ellipse window (any `a` in `(0, 1]`).
pub fn net_constant_ellipse<T: Scalar>(
    domain: &DomainModel<T>,
    phi: &PotentialField<T>,
    window: &WindowSpec<T>,
    provider: &dyn GreenProvider<T>,
    convention: SignConvention,
    quadrature: DiskQuadrature,
) -> Result<NETExpansion<T>> {
    let data = WindowData::new(domain, phi, window)?;
    let prov = ProviderData::new(provider, phi, window.center)?;
    let integrals = disk_integrals(window.a, quadrature, false)?;
    Ok(assemble_ellipse(window.eps, &integrals, &data, &prov, convention))
}

/// Pointwise mean sojourn time `C + 𝒢(x) − Φ(x*) G(x*, x)` away from the window.
#[derive(Clone)]
pub struct SojournField<T> {
    pub expansion: NETExpansion<T>,
    pub provider: Arc<dyn GreenProvider<T>>,
    pub window: WindowSpec<T>,
}

impl<T: Scalar> SojournField<T> {
    /// Points closer than this many window sizes to the centre are rejected.
    pub const VALIDITY_RADIUS: f64 = 10.0;

    pub fn new(expansion: NETExpansion<T>, provider: Arc<dyn GreenProvider<T>>, window: WindowSpec<T>) -> Self {
        Self {
            expansion,
            provider,
            window,
        }
    }

    pub fn evaluate(&self, x: Vec3<T>) -> Result<T> {
        let domain = self.window.domain();
        if !domain.contains(x) {
            return Err(NekError::Domain("sojourn field evaluated outside the domain".into()));
        }
        let min = self.window.eps * T::lit(Self::VALIDITY_RADIUS);
        let d = x.distance(self.window.center);
        if d < min {
            return Err(NekError::OutOfValidity(format!(
                "point at distance {d} from the window centre; the expansion needs at least {min}"
            )));
        }
        let g = self.provider.interior_green(self.window.center, x)?;
        Ok(self.expansion.total + self.provider.script_g(x)? - self.expansion.inputs.weighted_volume * g)
    }

    /// Spatial average `(C |M| + ∫𝒢 − Φ ∫ G(·, x*)) / |M|`.
    pub fn averaged(&self) -> Result<T> {
        let volume = self.window.domain().volume;
        let int_g = self.provider.script_g_integral()?;
        let int_green = self.provider.green_volume_integral(self.window.center)?;
        Ok((self.expansion.total * volume + int_g - self.expansion.inputs.weighted_volume * int_green) / volume)
    }
}

/// Free-function form of [`SojournField::averaged`].
pub fn averaged_sojourn<T: Scalar>(field: &SojournField<T>) -> Result<T> {
    field.averaged()
}

/// Free-function form of [`SojournField::evaluate`].
pub fn sojourn_field<T: Scalar>(field: &SojournField<T>, x: Vec3<T>) -> Result<T> {
    field.evaluate(x)
}
