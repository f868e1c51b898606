//! Dirichlet problem −Δf + f = u in Ω, f = h on ∂Ω, on planar star domains.
//!
//! Boundary data always arrives as a carrier q whose trace is h. The solver
//! works with the lifted unknown v = f − q, which vanishes on ∂Ω and solves
//! (−Δ + I)v = Δq − q + u. The discrete Laplacian is the symmetric cut-cell
//! stencil: along each axis, −v'' ≈ [(v_P − v_E)/(θ_E h) + (v_P − v_W)/(θ_W h)]/h
//! with v = 0 at cut points, so the assembled matrix is SPD and CG applies.

mod grid;
mod linalg;

pub use grid::{discretize, Grid, NodeClass, ARMS};
pub use linalg::{conjugate_gradient, CgOutcome, CsrMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::fit::ExponentFit;
use crate::function_spaces::{FunctionSpec, TestFunction};
use crate::geometry::{norm, Dim, Point};
use crate::par;
use crate::special::bessel_i0;
use crate::star_geometry::StarDomain;

/// Relative residual at which CG stops unless told otherwise.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const MAX_ITERATIONS: usize = 100_000;

/// Right-hand side u of −Δf + f = u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    Zero,
    /// u = g
    Field {
        function: FunctionSpec,
    },
    /// u = −Δg + g, so that g itself solves the equation.
    Helmholtz {
        function: FunctionSpec,
    },
    Sum {
        terms: Vec<Forcing>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledForcing {
    /// (apply −Δ + I?, g)
    terms: Vec<(bool, TestFunction)>,
}

impl CompiledForcing {
    fn new(dim: Dim, f: &Forcing) -> Result<Self> {
        let mut terms = Vec::new();
        fn walk(dim: Dim, f: &Forcing, out: &mut Vec<(bool, TestFunction)>) -> Result<()> {
            match f {
                Forcing::Zero => {}
                Forcing::Field { function } => out.push((false, TestFunction::new(dim, function.clone())?)),
                Forcing::Helmholtz { function } => out.push((true, TestFunction::new(dim, function.clone())?)),
                Forcing::Sum { terms } => terms.iter().try_for_each(|t| walk(dim, t, out))?,
            }
            Ok(())
        }
        walk(dim, f, &mut terms)?;
        Ok(CompiledForcing { terms })
    }

    fn eval(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(helm, g)| if *helm { g.eval(x) - g.laplacian(x) } else { g.eval(x) })
            .sum()
    }
}

/// Ω, the forcing u and the boundary carrier q.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletProblem {
    pub domain: StarDomain,
    pub forcing: Forcing,
    pub carrier: TestFunction,
    compiled: CompiledForcing,
}

impl DirichletProblem {
    pub fn new(domain: StarDomain, forcing: Forcing, carrier: FunctionSpec) -> Result<Self> {
        if domain.dim() != Dim::Two {
            return Err(Error::Unsupported("the Dirichlet solver is planar".into()));
        }
        let compiled = CompiledForcing::new(Dim::Two, &forcing)?;
        let carrier = TestFunction::new(Dim::Two, carrier)?;
        Ok(DirichletProblem {
            domain,
            forcing,
            carrier,
            compiled,
        })
    }

    pub fn forcing_at(&self, x: &Point) -> f64 {
        self.compiled.eval(x)
    }

    /// Δq − q + u at x.
    pub fn lifted_rhs(&self, x: &Point) -> f64 {
        self.carrier.laplacian(x) - self.carrier.eval(x) + self.forcing_at(x)
    }
}

/// Assembles I − Δ_h over the unknowns of `grid`.
pub fn assemble(grid: &Grid) -> CsrMatrix {
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let rows = par::map_indexed(grid.nodes.len(), |u| {
        let (i, j) = grid.nodes[u];
        let mut diag = 1.0;
        let mut row = Vec::with_capacity(5);
        for (a, &(di, dj)) in ARMS.iter().enumerate() {
            let theta = grid.arms[u][a];
            diag += inv_h2 / theta;
            if theta == 1.0 {
                if let Some(k) = grid.unknown_at(i + di, j + dj) {
                    row.push((k, -inv_h2));
                }
            }
        }
        row.push((u, diag));
        row
    });
    CsrMatrix::from_rows(rows)
}

/// Discrete solution f = v + q on the unknowns of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub grid: Grid,
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl GridSolution {
    /// f at lattice node (i, j), if it is inside Ω.
    pub fn value_at(&self, i: i64, j: i64) -> Option<f64> {
        self.grid.unknown_at(i, j).map(|k| self.f[k])
    }

    /// f at the physical point x, which must be a node of this grid.
    pub fn value_at_point(&self, x: &Point) -> Option<f64> {
        let i = (x[0] / self.grid.h).round();
        let j = (x[1] / self.grid.h).round();
        if (i * self.grid.h - x[0]).abs() > 1e-9 * self.grid.h || (j * self.grid.h - x[1]).abs() > 1e-9 * self.grid.h {
            return None;
        }
        self.value_at(i as i64, j as i64)
    }

    /// max |f_h − f_exact| over all unknowns.
    pub fn max_error<F: Fn(&Point) -> f64 + Sync + Send>(&self, exact: F) -> f64 {
        par::map_indexed(self.f.len(), |k| {
            let (i, j) = self.grid.nodes[k];
            (self.f[k] - exact(&self.grid.point(i, j))).abs()
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// (x, f) along the row y = 0.
    pub fn x_axis_slice(&self) -> Vec<(f64, f64)> {
        (-self.grid.m..=self.grid.m)
            .filter_map(|i| self.value_at(i, 0).map(|v| (i as f64 * self.grid.h, v)))
            .collect()
    }
}

/// Solves the lifted problem on the grid of spacing `h` to relative residual `tol`.
pub fn solve_lifted(problem: &DirichletProblem, h: f64, tol: f64) -> Result<GridSolution> {
    if !(tol > 0.0) {
        return config_err("tolerance", format!("solver tolerance must be positive, got {tol}"));
    }
    let grid = discretize(&problem.domain, h)?;
    let a = assemble(&grid);
    let rhs = par::map_indexed(grid.nodes.len(), |k| {
        let (i, j) = grid.nodes[k];
        problem.lifted_rhs(&grid.point(i, j))
    });
    if let Some((node, &value)) = rhs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Evaluation { node, value });
    }
    let (v, out) = conjugate_gradient(&a, &rhs, tol, MAX_ITERATIONS)?;
    let f = par::map_indexed(v.len(), |k| {
        let (i, j) = grid.nodes[k];
        v[k] + problem.carrier.eval(&grid.point(i, j))
    });
    Ok(GridSolution {
        grid,
        v,
        f,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// What the discrete solutions of a convergence study are compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Reference {
    /// A closed-form exact solution.
    Exact { function: FunctionSpec },
    /// f = 1 − I₀(|x|)/I₀(R): the solution for u ≡ 1, q ≡ 0 on the disk of radius R.
    DiskBessel { radius: f64 },
    /// A solve at half the finest spacing, compared on the coarsest grid's nodes.
    FineGrid,
}

/// 1 − I₀(|x|)/I₀(R).
pub fn disk_bessel_solution(radius: f64) -> impl Fn(&Point) -> f64 + Sync + Send {
    let denom = bessel_i0(radius);
    move |x: &Point| 1.0 - bessel_i0(norm(x)) / denom
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub h: f64,
    pub unknowns: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelRecord>,
    pub fit: Option<ExponentFit>,
    /// Errors strictly decrease from level to level.
    pub monotone: bool,
    /// (x, f) along y = 0 on the finest level.
    pub finest_slice: Vec<(f64, f64)>,
}

/// Solves on every spacing in `hs` (at least 4, each half the previous) and
/// measures max-norm errors against `reference`.
pub fn convergence_study(
    problem: &DirichletProblem,
    hs: &[f64],
    reference: &Reference,
    tol: f64,
) -> Result<ConvergenceReport> {
    if hs.len() < 4 {
        return config_err(
            "h",
            format!("a convergence study needs at least 4 levels, got {}", hs.len()),
        );
    }
    if hs.windows(2).any(|w| ((w[1] * 2.0) / w[0] - 1.0).abs() > 1e-12) {
        return config_err("h", "each level must halve the previous spacing");
    }
    let c_low = problem.domain.profile.c_low();
    if !(hs[0] > 0.0 && hs[0] < c_low / 8.0) {
        return config_err(
            "h",
            format!(
                "grid spacing must satisfy 0 < h < c_low/8 = {}, got {}",
                c_low / 8.0,
                hs[0]
            ),
        );
    }
    let solutions = hs
        .iter()
        .map(|&h| solve_lifted(problem, h, tol))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = match reference {
        Reference::Exact { function } => {
            let exact = TestFunction::new(Dim::Two, function.clone())?;
            solutions.iter().map(|s| s.max_error(|x| exact.eval(x))).collect()
        }
        Reference::DiskBessel { radius } => {
            let exact = disk_bessel_solution(*radius);
            solutions.iter().map(|s| s.max_error(&exact)).collect()
        }
        Reference::FineGrid => {
            let fine = solve_lifted(problem, hs[hs.len() - 1] / 2.0, tol)?;
            let coarse = &solutions[0].grid;
            solutions
                .iter()
                .map(|s| {
                    coarse
                        .nodes
                        .iter()
                        .map(|&(i, j)| {
                            let x = coarse.point(i, j);
                            let a = s.value_at_point(&x).expect("nested grids share nodes");
                            let b = fine.value_at_point(&x).expect("nested grids share nodes");
                            (a - b).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .collect()
        }
    };
    let levels: Vec<LevelRecord> = solutions
        .iter()
        .zip(&errors)
        .map(|(s, &max_error)| LevelRecord {
            h: s.grid.h,
            unknowns: s.grid.nodes.len(),
            iterations: s.iterations,
            relative_residual: s.relative_residual,
            max_error,
        })
        .collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let fit = ExponentFit::fit(hs, &errors).ok();
    let finest_slice = solutions.last().expect("at least 4 levels").x_axis_slice();
    Ok(ConvergenceReport {
        levels,
        fit,
        monotone,
        finest_slice,
    })
}

/// Spacings 2^{-k} for k in `ks`.
pub fn dyadic_spacings(ks: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    ks.map(|k| 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_spaces::Monomial;
    use crate::star_geometry::{BoundaryProfile, ProfileSpec};

    fn disk() -> StarDomain {
        StarDomain::new(BoundaryProfile::constant(Dim::Two, 1.0).unwrap())
    }

    fn exp_x() -> FunctionSpec {
        FunctionSpec::ExpLinear {
            direction: vec![1.0, 0.0],
        }
    }

    fn bump(radius: f64) -> FunctionSpec {
        FunctionSpec::Bump { radius }
    }

    fn unit_forcing() -> Forcing {
        Forcing::Field {
            function: FunctionSpec::Constant { value: 1.0 },
        }
    }

    #[test]
    fn matrix_is_spd_shaped() {
        let trig = BoundaryProfile::new(
            Dim::Two,
            ProfileSpec::SmoothTrig {
                mean: 1.0,
                cos: vec![0.3],
                sin: vec![0.1],
            },
        )
        .unwrap();
        let g = discretize(&StarDomain::new(trig), 1.0 / 32.0).unwrap();
        let a = assemble(&g);
        assert!(a.is_symmetric(0.0));
        // strict diagonal dominance certifies positive definiteness
        for i in 0..a.n {
            let off: f64 = a.row(i).filter(|e| e.0 != i).map(|e| e.1.abs()).sum();
            assert!(a.get(i, i) > off);
        }
    }

    #[test]
    fn manufactured_exponential_is_exact() {
        let p = DirichletProblem::new(disk(), Forcing::Zero, exp_x()).unwrap();
        let s = solve_lifted(&p, 1.0 / 32.0, DEFAULT_TOLERANCE).unwrap();
        assert!(s.max_error(|x| x[0].exp()) < 1e-12);
        assert!(s.v.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_data_zero_solution() {
        let p = DirichletProblem::new(disk(), Forcing::Zero, FunctionSpec::Constant { value: 0.0 }).unwrap();
        let s = solve_lifted(&p, 1.0 / 16.0, DEFAULT_TOLERANCE).unwrap();
        assert!(s.f.iter().all(|v| v.abs() <= DEFAULT_TOLERANCE));
    }

    #[test]
    fn bessel_centre_value() {
        let p = DirichletProblem::new(disk(), unit_forcing(), FunctionSpec::Constant { value: 0.0 }).unwrap();
        let s = solve_lifted(&p, 1.0 / 64.0, DEFAULT_TOLERANCE).unwrap();
        let exact = 1.0 - 1.0 / bessel_i0(1.0);
        assert!((s.value_at(0, 0).unwrap() - exact).abs() < 1e-3);
        assert!(s.relative_residual <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn maximum_principle() {
        let cusp = BoundaryProfile::new(
            Dim::Two,
            ProfileSpec::Cusp {
                c0: 1.0,
                theta0: 0.0,
                alpha: 0.5,
            },
        )
        .unwrap();
        // q = Gaussian has −Δq + q ≥ 0 only near the origin, so use q = 1 (−Δq + q = 1 ≥ 0)
        let p = DirichletProblem::new(
            StarDomain::new(cusp),
            unit_forcing(),
            FunctionSpec::Constant { value: 1.0 },
        )
        .unwrap();
        let s = solve_lifted(&p, 1.0 / 32.0, DEFAULT_TOLERANCE).unwrap();
        assert!(s.f.iter().all(|v| *v >= -1e-10));
    }

    #[test]
    fn carrier_does_not_matter_beyond_its_trace() {
        let h = 1.0 / 64.0;
        let forcing = unit_forcing();
        let plain = DirichletProblem::new(disk(), forcing.clone(), exp_x()).unwrap();
        let shifted_carrier = FunctionSpec::Sum {
            terms: vec![
                crate::function_spaces::Term {
                    coef: 1.0,
                    function: exp_x(),
                },
                crate::function_spaces::Term {
                    coef: 3.0,
                    function: bump(0.6),
                },
            ],
        };
        let shifted = DirichletProblem::new(disk(), forcing, shifted_carrier).unwrap();
        let a = solve_lifted(&plain, h, 1e-12).unwrap();
        let b = solve_lifted(&shifted, h, 1e-12).unwrap();
        // discretization error of either problem, estimated from the 2h solve
        let self_difference = |fine: &GridSolution, p: &DirichletProblem| {
            let coarse = solve_lifted(p, 2.0 * h, 1e-12).unwrap();
            (0..coarse.f.len())
                .map(|k| {
                    let (i, j) = coarse.grid.nodes[k];
                    (coarse.f[k] - fine.value_at(2 * i, 2 * j).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        };
        let disc = self_difference(&a, &plain).max(self_difference(&b, &shifted));
        let diff = a.f.iter().zip(&b.f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 2.0 * disc, "{diff} vs {disc}");
    }

    #[test]
    fn interior_bump_converges_second_order() {
        let f_exact = FunctionSpec::Sum {
            terms: vec![
                crate::function_spaces::Term {
                    coef: 1.0,
                    function: exp_x(),
                },
                crate::function_spaces::Term {
                    coef: 1.0,
                    function: bump(0.9),
                },
            ],
        };
        let p = DirichletProblem::new(disk(), Forcing::Helmholtz { function: bump(0.9) }, exp_x()).unwrap();
        let r = convergence_study(
            &p,
            &dyadic_spacings(5..=8),
            &Reference::Exact { function: f_exact },
            1e-12,
        )
        .unwrap();
        let slope = r.fit.unwrap().slope;
        assert!((slope - 2.0).abs() < 0.5, "{slope}");
    }

    #[test]
    fn vanishing_polynomial_gaussian() {
        // (1 − |x|²)e^{−|x|²/2} vanishes on the unit circle
        let g = FunctionSpec::PolyGaussian {
            a: 0.5,
            terms: vec![
                Monomial {
                    coef: 1.0,
                    powers: [0, 0, 0],
                },
                Monomial {
                    coef: -1.0,
                    powers: [2, 0, 0],
                },
                Monomial {
                    coef: -1.0,
                    powers: [0, 2, 0],
                },
            ],
        };
        let p = DirichletProblem::new(
            disk(),
            Forcing::Helmholtz { function: g.clone() },
            FunctionSpec::Constant { value: 0.0 },
        )
        .unwrap();
        let r = convergence_study(&p, &dyadic_spacings(4..=7), &Reference::Exact { function: g }, 1e-12).unwrap();
        assert!(r.monotone);
        assert!(r.fit.unwrap().slope >= 1.5);
    }

    #[test]
    fn study_validation() {
        let p = DirichletProblem::new(disk(), Forcing::Zero, exp_x()).unwrap();
        assert!(convergence_study(&p, &dyadic_spacings(4..=6), &Reference::FineGrid, 1e-10).is_err());
        assert!(convergence_study(&p, &[0.1, 0.05, 0.02, 0.01], &Reference::FineGrid, 1e-10).is_err());
        assert!(solve_lifted(&p, 0.05, 0.0).is_err());
    }
}
