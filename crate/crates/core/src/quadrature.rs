//! Gauss–Legendre rules and radial quadratures on [0, R].

use crate::error::{config_err, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Quadrature on an interval [0, R] used for radial integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly on each panel.
    pub exact_degree: usize,
}

impl RadialQuadrature {
    /// Default node count for radial integrals.
    pub const DEFAULT_NODES: usize = 256;

    /// Single Gauss–Legendre panel on [0, r_max].
    pub fn gauss(r_max: f64, nodes: usize) -> Result<Self> {
        Self::composite(r_max, 1, nodes)
    }

    /// `panels` equal Gauss–Legendre panels of `order` nodes on [0, r_max].
    pub fn composite(r_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return config_err("r_max", format!("radial extent must be positive, got {r_max}"));
        }
        if panels == 0 || order == 0 {
            return config_err("nodes", "radial quadrature needs at least one node");
        }
        let (x, w) = gauss_legendre(order);
        let width = r_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        Ok(RadialQuadrature {
            nodes,
            weights,
            exact_degree: 2 * order - 1,
        })
    }

    /// Reference rule on [0, 1]; scale with [`RadialQuadrature::scaled`].
    pub fn unit(nodes: usize) -> Self {
        Self::gauss(1.0, nodes).expect("unit interval is valid")
    }

    /// Iterator over (node·len, weight·len): the rule mapped to [0, len].
    pub fn scaled(&self, len: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (x * len, w * len))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length of the covered interval (the weights of contiguous panels sum to it).
    pub fn r_max(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64, 256, 1000] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            assert!(w.iter().all(|&wi| wi > 0.0));
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_to_degree() {
        let (x, w) = gauss_legendre(6);
        for deg in 0..=11 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn composite_rule_integrates_gaussian() {
        let rq = RadialQuadrature::composite(10.0, 16, 16).unwrap();
        let v = rq.integrate(|r| (-r * r).exp());
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((rq.r_max() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_extent() {
        assert!(RadialQuadrature::gauss(0.0, 8).is_err());
        assert!(RadialQuadrature::composite(1.0, 0, 8).is_err());
    }
}
