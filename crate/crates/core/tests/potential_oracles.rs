use nek_core::geometry::DomainModel;
use nek_core::potential::{weighted_volume, PotentialField, TabulatedPotential};
use nek_core::Vec3;
use proptest::prelude::*;

/// `∫_{|z|<1} exp(β z3) dz` by its Taylor series: the odd moments vanish and
/// `∫ z3^{2k} = 4π / ((2k + 1)(2k + 3))`.
fn series_oracle(beta: f64) -> f64 {
    let mut sum = 0.0;
    let mut coef = 1.0;
    for k in 0..40 {
        if k > 0 {
            coef *= beta * beta / ((2 * k - 1) as f64 * (2 * k) as f64);
        }
        sum += coef * 4.0 * std::f64::consts::PI / ((2 * k + 1) as f64 * (2 * k + 3) as f64);
    }
    sum
}

#[test]
fn linear_potential_at_origin_matches_series() {
    let ball = DomainModel::unit_ball(1.0).unwrap();
    let phi = PotentialField::linear_axis(1.0, Vec3::unit_z()).unwrap();
    let v = weighted_volume(&ball, &phi, Vec3::zero(), 1e-10).unwrap();
    let oracle = series_oracle(1.0);
    assert!((oracle - 4.0 * std::f64::consts::PI / std::f64::consts::E).abs() < 1e-12);
    assert!((v.value - oracle).abs() < 1e-9 * oracle, "{} vs {oracle}", v.value);
    assert!((v.value - 4.6229).abs() < 1e-4);
}

#[test]
fn weighted_volume_at_north_pole_decreases_with_beta() {
    let ball = DomainModel::unit_ball(1.0).unwrap();
    let pole = Vec3::unit_z();
    let vals: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&b| {
            let phi = PotentialField::linear_axis(b, Vec3::unit_z()).unwrap();
            let v = weighted_volume(&ball, &phi, pole, 1e-9).unwrap().value;
            // Φ(pole) = e^{−β} ∫ e^{β z3}.
            assert!((v - (-b as f64).exp() * series_oracle(b)).abs() < 1e-8);
            v
        })
        .collect();
    assert!(vals[0] > vals[1] && vals[1] > vals[2]);
}

#[test]
fn tabulated_linear_potential_reproduces_force() {
    let ball = DomainModel::unit_ball(1.0).unwrap();
    let lo = Vec3::new(-1.0, -1.0, -1.0);
    let hi = Vec3::new(1.0, 1.0, 1.0);
    let tab = TabulatedPotential::sample([9, 9, 9], lo, hi, |z| 0.3 * z.x - 0.7 * z.z + 2.0).unwrap();
    let phi = PotentialField::Tabulated(tab);
    let f: Vec3<f64> = phi.force(&ball, Vec3::new(0.1, 0.2, -0.3)).unwrap();
    assert!((f.x - 0.3).abs() < 1e-8 && f.y.abs() < 1e-8 && (f.z + 0.7).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn weighted_volume_is_gauge_invariant(
        beta in -1.0f64..1.0,
        shift in -20.0f64..20.0,
        theta in 0.0f64..std::f64::consts::PI,
    ) {
        let ball = DomainModel::unit_ball(1.0).unwrap();
        let axis = Vec3::from_spherical(1.0, theta, 0.3);
        let base = PotentialField::linear_axis(beta, axis).unwrap();
        let lo = Vec3::new(-1.0, -1.0, -1.0);
        let hi = Vec3::new(1.0, 1.0, 1.0);
        let shifted = PotentialField::Tabulated(
            TabulatedPotential::sample([5, 5, 5], lo, hi, |z| beta * z.dot(axis) + shift).unwrap(),
        );
        let x = Vec3::new(0.2, -0.1, 0.4);
        let a = weighted_volume(&ball, &base, x, 1e-8).unwrap().value;
        let b = weighted_volume(&ball, &shifted, x, 1e-8).unwrap().value;
        prop_assert!((a - b).abs() < 1e-7 * a);
    }
}
