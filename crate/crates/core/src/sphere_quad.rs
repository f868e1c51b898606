//! Quadrature grids on the unit sphere S^{n-1}, n ∈ {2, 3}.
//!
//! * n = 2: equispaced (midpoint-offset) trapezoid rule in θ ∈ [0, 2π).
//! * n = 3: Gauss–Legendre in z = cos θ times a trapezoid rule in the azimuth.
//!
//! The cell-aligned variant splits the sphere into the same cells used by
//! piecewise-constant boundary profiles (equal-angle arcs on S¹, equal-area
//! latitude–longitude cells on S²) and places every node strictly inside a
//! cell, so cellwise-constant integrands are integrated exactly.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Error, Result};
use crate::geometry::{Dim, Direction};
use crate::par;

/// How a [`SphereQuadrature`] was generated; kept so it can be refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Tensor rule aligned with `cells` bands/arcs (`cells = 1` is the plain rule).
    Tensor { resolution: usize, cells: usize },
    /// Uniform random directions with equal weights.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: Dim,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    exact_degree: usize,
    layout: Layout,
}

pub const MIN_RESOLUTION: usize = 4;

impl SphereQuadrature {
    /// Standard grid: `resolution` trapezoid nodes on S¹, or `resolution`
    /// Gauss–Legendre nodes in cos θ × `2·resolution` azimuthal nodes on S².
    pub fn build(dim: Dim, resolution: usize) -> Result<Self> {
        Self::cell_aligned(dim, resolution, 1)
    }

    /// Grid whose nodes lie strictly inside the cells of a piecewise-constant
    /// profile with `cells` arcs (n = 2) or `cells` bands × `2·cells` sectors (n = 3).
    /// The per-cell node count is rounded up so the total resolution is at least
    /// `resolution`.
    pub fn cell_aligned(dim: Dim, resolution: usize, cells: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return config_err(
                "resolution",
                format!("sphere resolution must be at least {MIN_RESOLUTION}, got {resolution}"),
            );
        }
        if cells == 0 {
            return config_err("cells", "cell count must be positive");
        }
        let per_cell = resolution.div_ceil(cells);
        let layout = Layout::Tensor { resolution, cells };
        match dim {
            Dim::Two => {
                let n = cells * per_cell;
                let h = 2.0 * PI / n as f64;
                let nodes = (0..n).map(|i| Direction::from_angle((i as f64 + 0.5) * h)).collect();
                Ok(SphereQuadrature {
                    dim,
                    nodes,
                    weights: vec![h; n],
                    exact_degree: n - 1,
                    layout,
                })
            }
            Dim::Three => {
                let (gx, gw) = crate::quadrature::gauss_legendre(per_cell);
                let n_phi = 2 * cells * per_cell;
                let dphi = 2.0 * PI / n_phi as f64;
                let band = 2.0 / cells as f64;
                let mut nodes = Vec::with_capacity(cells * per_cell * n_phi);
                let mut weights = Vec::with_capacity(nodes.capacity());
                for b in 0..cells {
                    let z0 = -1.0 + b as f64 * band;
                    for (x, w) in gx.iter().zip(&gw) {
                        let z = z0 + 0.5 * band * (x + 1.0);
                        let wz = 0.5 * band * w;
                        for l in 0..n_phi {
                            let phi = (l as f64 + 0.5) * dphi;
                            nodes.push(Direction::from_z_phi(z, phi));
                            weights.push(wz * dphi);
                        }
                    }
                }
                Ok(SphereQuadrature {
                    dim,
                    nodes,
                    weights,
                    exact_degree: 2 * per_cell - 1,
                    layout,
                })
            }
        }
    }

    /// Equal-weight Monte Carlo rule over uniformly distributed directions.
    /// Intended for profiles that are not Riemann integrable, where tensor rules
    /// have no error guarantee.
    pub fn monte_carlo(dim: Dim, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return config_err("samples", "need at least one Monte Carlo sample");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..samples)
            .map(|_| match dim {
                Dim::Two => Direction::from_angle(rng.random::<f64>() * 2.0 * PI),
                Dim::Three => {
                    let z = 2.0 * rng.random::<f64>() - 1.0;
                    let phi = rng.random::<f64>() * 2.0 * PI;
                    Direction::from_z_phi(z, phi)
                }
            })
            .collect();
        Ok(SphereQuadrature {
            dim,
            nodes,
            weights: vec![dim.sphere_area() / samples as f64; samples],
            exact_degree: 0,
            layout: Layout::MonteCarlo { samples, seed },
        })
    }

    /// Same layout with twice the resolution (or twice the samples).
    pub fn refined(&self) -> Result<Self> {
        match self.layout {
            Layout::Tensor { resolution, cells } => Self::cell_aligned(self.dim, 2 * resolution, cells),
            Layout::MonteCarlo { samples, seed } => Self::monte_carlo(self.dim, 2 * samples, seed),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i g(ν_i). Node evaluations may run in parallel; the reduction is
    /// in fixed index order.
    pub fn integrate<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(&Direction) -> f64 + Sync + Send,
    {
        let values = par::map_slice(&self.nodes, g);
        self.weighted_sum(&values)
    }

    /// Σ w_i v_i for precomputed node values.
    pub fn weighted_sum(&self, values: &[f64]) -> Result<f64> {
        debug_assert_eq!(values.len(), self.weights.len());
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Evaluation { node, value });
        }
        Ok(par::sum_indexed(values.len(), |i| self.weights[i] * values[i]))
    }
}

/// Builds the standard grid; see [`SphereQuadrature::build`].
pub fn build_sphere_quadrature(dim: Dim, resolution: usize) -> Result<SphereQuadrature> {
    SphereQuadrature::build(dim, resolution)
}

/// Integrates `g` over the sphere with the rule `q`.
pub fn integrate_sphere<G>(q: &SphereQuadrature, g: G) -> Result<f64>
where
    G: Fn(&Direction) -> f64 + Sync + Send,
{
    q.integrate(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_measure() {
        let q2 = build_sphere_quadrature(Dim::Two, 64).unwrap();
        assert!((q2.weights().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        let q3 = build_sphere_quadrature(Dim::Three, 16).unwrap();
        assert!((q3.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        assert_eq!(q3.len(), 16 * 32);
        assert_eq!(q3.exact_degree(), 31);
    }

    #[test]
    fn cos_squared_on_circle() {
        let q = build_sphere_quadrature(Dim::Two, 64).unwrap();
        let v = q.integrate(|nu| nu.coords()[0].powi(2)).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn z_squared_on_sphere() {
        let q = build_sphere_quadrature(Dim::Three, 16).unwrap();
        assert!((q.integrate(|_| 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let v = q.integrate(|nu| nu.coords()[2].powi(2)).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn upper_half_indicator_is_exact() {
        let q = build_sphere_quadrature(Dim::Two, 64).unwrap();
        let v = q.integrate(|nu| if nu.coords()[1] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        // 32 of 64 nodes hit; only summation rounding remains
        assert!((v - PI).abs() < 1e-13);
    }

    #[test]
    fn spherical_polynomials_to_exact_degree() {
        let q = build_sphere_quadrature(Dim::Three, 6).unwrap();
        // ∫_{S²} x^a y^b z^c = 2Γ((a+1)/2)Γ((b+1)/2)Γ((c+1)/2)/Γ((a+b+c+3)/2), even a, b, c
        let moment = |a: f64, b: f64, c: f64| {
            2.0 * gamma_half(a + 1.0) * gamma_half(b + 1.0) * gamma_half(c + 1.0) / gamma_half(a + b + c + 3.0)
        };
        for (a, b, c) in [(4, 2, 4), (2, 2, 2), (0, 0, 10), (6, 0, 4)] {
            let v = q
                .integrate(|nu| {
                    let p = nu.coords();
                    p[0].powi(a) * p[1].powi(b) * p[2].powi(c)
                })
                .unwrap();
            let exact = moment(a as f64, b as f64, c as f64);
            assert!((v - exact).abs() < 1e-10, "({a},{b},{c}): {v} vs {exact}");
        }
    }

    // Γ(k/2) for positive integer k
    fn gamma_half(k: f64) -> f64 {
        let k = k as u32;
        if k.is_multiple_of(2) {
            (1..k / 2).map(|i| i as f64).product()
        } else {
            let mut g = PI.sqrt();
            let mut x = 0.5;
            while x < k as f64 / 2.0 - 0.25 {
                g *= x;
                x += 1.0;
            }
            g
        }
    }

    #[test]
    fn trig_polynomials_exact_on_circle() {
        let q = build_sphere_quadrature(Dim::Two, 8).unwrap();
        for k in 1..8 {
            let v = q.integrate(|nu| (k as f64 * nu.azimuth()).cos()).unwrap();
            assert!(v.abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn refinement_converges() {
        let g = |nu: &Direction| (nu.coords()[0] + 0.3 * nu.coords()[2]).exp();
        let mut prev = build_sphere_quadrature(Dim::Three, 4).unwrap();
        let mut diffs = Vec::new();
        for _ in 0..3 {
            let next = prev.refined().unwrap();
            diffs.push((prev.integrate(g).unwrap() - next.integrate(g).unwrap()).abs());
            prev = next;
        }
        assert!(diffs[1] < diffs[0] && diffs[2] <= diffs[1].max(1e-13));
    }

    #[test]
    fn deterministic_grids() {
        let a = SphereQuadrature::build(Dim::Three, 12).unwrap();
        let b = SphereQuadrature::build(Dim::Three, 12).unwrap();
        assert_eq!(a, b);
        let m1 = SphereQuadrature::monte_carlo(Dim::Two, 100, 7).unwrap();
        let m2 = SphereQuadrature::monte_carlo(Dim::Two, 100, 7).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn rejects_small_resolution() {
        assert!(matches!(
            SphereQuadrature::build(Dim::Two, 3),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn reports_non_finite_node() {
        let q = build_sphere_quadrature(Dim::Two, 8).unwrap();
        let err = q
            .integrate(|nu| if nu.azimuth() > 3.0 { f64::NAN } else { 1.0 })
            .unwrap_err();
        assert!(matches!(err, Error::Evaluation { node: 4, .. }), "{err:?}");
    }

    #[test]
    fn aligned_nodes_avoid_cell_edges() {
        let q = SphereQuadrature::cell_aligned(Dim::Three, 10, 3).unwrap();
        assert!((q.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        for nu in q.nodes() {
            let z = nu.coords()[2];
            let band = (z + 1.0) * 1.5;
            assert!((band - band.round()).abs() > 1e-6);
        }
    }
}
