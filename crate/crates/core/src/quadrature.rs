//! One-dimensional quadrature building blocks.

use crate::Scalar;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Nodes in ascending order. Newton iteration on the three-term recurrence,
    /// always carried out in `f64`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn on_interval(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut acc = T::zero();
        for (x, w) in self.on_interval(a, b) {
            acc = acc + w * f(x);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Composite trapezoid rule for a `2π`-periodic integrand over one period.
pub fn periodic_trapezoid<T: Scalar, F: FnMut(T) -> T>(n: usize, mut f: F) -> T {
    let step = T::TAU() / T::count(n);
    let mut acc = T::zero();
    for j in 0..n {
        acc = acc + f(step * T::count(j));
    }
    acc * step
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 16, 33, 128] {
            let gl = GaussLegendre::<f64>::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
            for i in 0..n {
                assert_relative_eq!(gl.nodes[i], -gl.nodes[n - 1 - i], epsilon = 1e-15);
            }
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::<f64>::new(6);
        for k in 0..12 {
            let got = gl.integrate(0.0, 1.0, |x| x.powi(k));
            assert_relative_eq!(got, 1.0 / (k as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn f32_rule_is_usable() {
        let gl = GaussLegendre::<f32>::new(10);
        let got = gl.integrate(0.0, std::f32::consts::PI, |x| x.sin());
        assert!((got - 2.0).abs() < 1e-5);
    }

    #[test]
    fn trapezoid_is_spectral_for_periodic_functions() {
        // Integral of exp(cos θ) over a period is 2π I0(1).
        let got = periodic_trapezoid::<f64, _>(32, |t| t.cos().exp());
        assert_relative_eq!(got, 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4, epsilon = 1e-13);
    }
}
