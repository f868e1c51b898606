//! Embedded-boundary classification of a Cartesian grid against a star domain.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::geometry::{Dim, Point};
use crate::par;
use crate::star_geometry::StarDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Interior,
    /// Inside Ω with at least one grid neighbour outside.
    NearBoundary,
    Exterior,
}

/// Neighbour directions in the order E, W, N, S.
pub const ARMS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Nodes x = (i h, j h) with |i|, |j| ≤ m.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub m: i64,
    pub class: Vec<NodeClass>,
    /// Unknown number of each inside node.
    pub unknown: Vec<Option<usize>>,
    /// Lattice coordinates (i, j) of each unknown.
    pub nodes: Vec<(i64, i64)>,
    /// Per unknown, the arm length in units of h towards E, W, N, S:
    /// 1 when the neighbour is inside, the cut fraction θ ∈ (0, 1] otherwise.
    pub arms: Vec<[f64; 4]>,
    /// Largest | |x*| - b(x*/|x*|) | over all cut points x*.
    pub max_cut_residual: f64,
}

impl Grid {
    pub fn side(&self) -> usize {
        (2 * self.m + 1) as usize
    }

    pub fn flat(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.m || j.abs() > self.m {
            return None;
        }
        Some(((j + self.m) as usize) * self.side() + (i + self.m) as usize)
    }

    pub fn point(&self, i: i64, j: i64) -> Point {
        [i as f64 * self.h, j as f64 * self.h, 0.0]
    }

    pub fn unknown_at(&self, i: i64, j: i64) -> Option<usize> {
        self.flat(i, j).and_then(|k| self.unknown[k])
    }

    pub fn count(&self, c: NodeClass) -> usize {
        self.class.iter().filter(|x| **x == c).count()
    }
}

/// Bisection for the boundary crossing on the segment x + t·h·e, t ∈ [0, 1],
/// where x is inside and x + h·e is not. Returns (θ, residual).
fn cut_fraction(domain: &StarDomain, x: &Point, e: (i64, i64), h: f64) -> (f64, f64) {
    let at = |t: f64| [x[0] + t * h * e.0 as f64, x[1] + t * h * e.1 as f64, 0.0];
    let g = |t: f64| domain.boundary_residual(&at(t));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut g_hi = g(hi);
    for _ in 0..200 {
        if g_hi.abs() < 1e-14 || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    (hi, g_hi.abs())
}

/// Classifies the grid of spacing `h` against Ω and computes cut fractions.
pub fn discretize(domain: &StarDomain, h: f64) -> Result<Grid> {
    if domain.dim() != Dim::Two {
        return Err(Error::Unsupported("the Dirichlet solver is planar".into()));
    }
    if !domain.profile.is_continuous() {
        return Err(Error::Unsupported(format!(
            "`{}` profiles do not bound a domain with continuous boundary",
            domain.profile.spec().kind_name()
        )));
    }
    let c_low = domain.profile.c_low();
    if !(h > 0.0) || !(h < c_low / 8.0) {
        return config_err(
            "h",
            format!("grid spacing must satisfy 0 < h < c_low/8 = {}, got {h}", c_low / 8.0),
        );
    }
    let m = (domain.profile.c_high() / h).ceil() as i64 + 1;
    let side = (2 * m + 1) as usize;
    let inside = par::map_indexed(side * side, |k| {
        let (i, j) = ((k % side) as i64 - m, (k / side) as i64 - m);
        domain.contains(&[i as f64 * h, j as f64 * h, 0.0])
    });
    let is_in = |i: i64, j: i64| i.abs() <= m && j.abs() <= m && inside[((j + m) as usize) * side + (i + m) as usize];

    let mut unknown = vec![None; side * side];
    let mut nodes = Vec::new();
    for (k, u) in unknown.iter_mut().enumerate() {
        if inside[k] {
            *u = Some(nodes.len());
            nodes.push(((k % side) as i64 - m, (k / side) as i64 - m));
        }
    }
    let cuts = par::map_slice(&nodes, |&(i, j)| {
        let x = [i as f64 * h, j as f64 * h, 0.0];
        let mut arms = [1.0; 4];
        let mut worst = 0.0f64;
        for (a, &(di, dj)) in ARMS.iter().enumerate() {
            if !is_in(i + di, j + dj) {
                let (theta, res) = cut_fraction(domain, &x, (di, dj), h);
                arms[a] = theta;
                worst = worst.max(res);
            }
        }
        (arms, worst)
    });
    let mut class: Vec<NodeClass> = inside
        .iter()
        .map(|&b| if b { NodeClass::Interior } else { NodeClass::Exterior })
        .collect();
    for (u, &(i, j)) in nodes.iter().enumerate() {
        if cuts[u].0.iter().any(|t| *t < 1.0) || ARMS.iter().any(|&(di, dj)| !is_in(i + di, j + dj)) {
            class[((j + m) as usize) * side + (i + m) as usize] = NodeClass::NearBoundary;
        }
    }
    let max_cut_residual = cuts.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(Grid {
        h,
        m,
        class,
        unknown,
        nodes,
        arms: cuts.into_iter().map(|c| c.0).collect(),
        max_cut_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;
    use crate::star_geometry::{BoundaryProfile, ProfileSpec};
    use std::f64::consts::PI;

    fn disk() -> StarDomain {
        StarDomain::new(BoundaryProfile::constant(Dim::Two, 1.0).unwrap())
    }

    #[test]
    fn disk_node_count_and_cuts() {
        let h = 1.0 / 64.0;
        let g = discretize(&disk(), h).unwrap();
        let inside = g.nodes.len() as f64;
        assert!((inside / (PI / (h * h)) - 1.0).abs() < 0.02);
        assert!(g.max_cut_residual < 1e-12);
        assert_eq!(
            g.count(NodeClass::Interior) + g.count(NodeClass::NearBoundary),
            g.nodes.len()
        );
        for (u, &(i, j)) in g.nodes.iter().enumerate() {
            for (a, &(di, dj)) in ARMS.iter().enumerate() {
                let t = g.arms[u][a];
                assert!(t > 0.0 && t <= 1.0);
                if t < 1.0 {
                    let p = [(i as f64 + t * di as f64) * h, (j as f64 + t * dj as f64) * h, 0.0];
                    assert!((norm(&p) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exterior_nodes_are_outside() {
        let cusp = BoundaryProfile::new(
            Dim::Two,
            ProfileSpec::Cusp {
                c0: 1.0,
                theta0: 0.0,
                alpha: 0.5,
            },
        )
        .unwrap();
        let d = StarDomain::new(cusp);
        let g = discretize(&d, 1.0 / 32.0).unwrap();
        for j in -g.m..=g.m {
            for i in -g.m..=g.m {
                let k = g.flat(i, j).unwrap();
                let x = g.point(i, j);
                match g.class[k] {
                    NodeClass::Exterior => assert!(d.boundary_residual(&x) >= 0.0),
                    _ => assert!(d.boundary_residual(&x) < 0.0),
                }
            }
        }
        assert!(g.max_cut_residual < 1e-9);
    }

    #[test]
    fn rejects_coarse_or_rough() {
        assert!(matches!(
            discretize(&disk(), 0.2),
            Err(Error::Config { field: "h", .. })
        ));
        let pw = BoundaryProfile::new(Dim::Two, ProfileSpec::PiecewiseValues { values: vec![1.0, 2.0] }).unwrap();
        assert!(matches!(
            discretize(&StarDomain::new(pw), 0.01),
            Err(Error::Unsupported(_))
        ));
        let ball = StarDomain::new(BoundaryProfile::constant(Dim::Three, 1.0).unwrap());
        assert!(matches!(discretize(&ball, 0.01), Err(Error::Unsupported(_))));
    }
}
