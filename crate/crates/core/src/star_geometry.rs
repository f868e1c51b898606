//! Boundary profiles b(ν), star-shaped hypersurfaces S_ρ = {ρ b(ν) ν} and
//! domains Ω = {|x| < b(x/|x|)}, with the radial bijection P and the pullback
//! measures transported from S^{n-1}.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::geometry::{norm, Dim, Direction, Point};
use crate::sphere_quad::SphereQuadrature;

/// Serializable description of a boundary profile.
///
/// Angular conventions: on S¹ the angle θ ∈ [0, 2π) runs counterclockwise
/// from +x. On S² the smooth and cusp kinds use the embedding coordinates,
/// while `lipschitz` knots are spread over the colatitude [0, π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// b = mean + Σ_k cos_k·Re((x+iy)^k) + sin_k·Im((x+iy)^k); on S¹ this is
    /// the trigonometric polynomial mean + Σ cos_k cos kθ + sin_k sin kθ.
    SmoothTrig {
        mean: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    /// Piecewise-linear interpolation of equally spaced knot values.
    Lipschitz {
        knots: Vec<f64>,
    },
    /// b = c0 + dist(ν, ν0)^alpha with geodesic distance and 0 < alpha < 1.
    Cusp {
        c0: f64,
        theta0: f64,
        alpha: f64,
    },
    /// Cellwise-constant values drawn uniformly from [low, high].
    PiecewiseConstant {
        cells: usize,
        seed: u64,
        low: f64,
        high: f64,
    },
    /// Cellwise-constant with explicit values (K on S¹, 2K² on S²).
    PiecewiseValues {
        values: Vec<f64>,
    },
}

impl ProfileSpec {
    pub fn is_continuous(&self) -> bool {
        !matches!(
            self,
            ProfileSpec::PiecewiseConstant { .. } | ProfileSpec::PiecewiseValues { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProfileSpec::Constant { .. } => "constant",
            ProfileSpec::SmoothTrig { .. } => "trig",
            ProfileSpec::Lipschitz { .. } => "lipschitz",
            ProfileSpec::Cusp { .. } => "cusp",
            ProfileSpec::PiecewiseConstant { .. } => "piecewise",
            ProfileSpec::PiecewiseValues { .. } => "values",
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Constant { value } => write!(f, "constant:{value}"),
            ProfileSpec::SmoothTrig { mean, cos, sin } => {
                let mut parts = vec![*mean];
                for k in 0..cos.len().max(sin.len()) {
                    parts.push(cos.get(k).copied().unwrap_or(0.0));
                    parts.push(sin.get(k).copied().unwrap_or(0.0));
                }
                write!(f, "trig:{}", join(&parts))
            }
            ProfileSpec::Lipschitz { knots } => write!(f, "lipschitz:{}", join(knots)),
            ProfileSpec::Cusp { c0, theta0, alpha } => write!(f, "cusp:{c0},{theta0},{alpha}"),
            ProfileSpec::PiecewiseConstant { cells, seed, low, high } => {
                write!(f, "piecewise:{cells},{seed},{low},{high}")
            }
            ProfileSpec::PiecewiseValues { values } => write!(f, "values:{}", join(values)),
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    /// Parses the compact form used on the command line, e.g. `constant:1`,
    /// `trig:1,0.3,0`, `cusp:1,0,0.5`, `piecewise:8,42,0.5,2`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| Error::Config {
                        field: "profile",
                        message: format!("`{t}` is not a number in `{s}`"),
                    })
                })
                .collect()
        };
        let arity = |v: &Vec<f64>, n: usize| -> Result<()> {
            if v.len() != n {
                return config_err("profile", format!("`{kind}` takes {n} parameters, got `{s}`"));
            }
            Ok(())
        };
        let spec = match kind.trim() {
            "constant" => {
                let v = nums()?;
                arity(&v, 1)?;
                ProfileSpec::Constant { value: v[0] }
            }
            "trig" => {
                let v = nums()?;
                if v.is_empty() || v.len() % 2 == 0 {
                    return config_err("profile", "trig takes mean followed by (cos, sin) pairs");
                }
                let cos = v[1..].iter().step_by(2).copied().collect();
                let sin = v[2..].iter().step_by(2).copied().collect();
                ProfileSpec::SmoothTrig { mean: v[0], cos, sin }
            }
            "lipschitz" => ProfileSpec::Lipschitz { knots: nums()? },
            "cusp" => {
                let v = nums()?;
                arity(&v, 3)?;
                ProfileSpec::Cusp {
                    c0: v[0],
                    theta0: v[1],
                    alpha: v[2],
                }
            }
            "piecewise" => {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return config_err("profile", "piecewise takes cells,seed,low,high");
                }
                let bad = |t: &str| Error::Config {
                    field: "profile",
                    message: format!("cannot parse `{t}` in `{s}`"),
                };
                ProfileSpec::PiecewiseConstant {
                    cells: parts[0].parse().map_err(|_| bad(parts[0]))?,
                    seed: parts[1].parse().map_err(|_| bad(parts[1]))?,
                    low: parts[2].parse().map_err(|_| bad(parts[2]))?,
                    high: parts[3].parse().map_err(|_| bad(parts[3]))?,
                }
            }
            "values" => ProfileSpec::PiecewiseValues { values: nums()? },
            other => return config_err("profile", format!("unknown profile kind `{other}`")),
        };
        Ok(spec)
    }
}

/// A validated boundary profile b: S^{n-1} → [c_low, c_high] with c_low > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProfile {
    dim: Dim,
    spec: ProfileSpec,
    /// Resolved cell values for the piecewise kinds.
    cell_values: Vec<f64>,
    /// Number of arcs (S¹) or latitude bands (S²) of a piecewise profile.
    cells: usize,
    cusp_center: Option<Direction>,
    c_low: f64,
    c_high: f64,
}

impl BoundaryProfile {
    pub fn new(dim: Dim, spec: ProfileSpec) -> Result<Self> {
        let bad = |m: String| config_err::<()>("profile", m);
        let mut cell_values = Vec::new();
        let mut cells = 0;
        let mut cusp_center = None;
        let (lo, hi) = match &spec {
            ProfileSpec::Constant { value } => (*value, *value),
            ProfileSpec::SmoothTrig { mean, cos, sin } => {
                let amp: f64 = cos.iter().chain(sin).map(|c| c.abs()).sum();
                (mean - amp, mean + amp)
            }
            ProfileSpec::Lipschitz { knots } => {
                let min_knots = if dim == Dim::Two { 1 } else { 2 };
                if knots.len() < min_knots {
                    bad(format!("lipschitz needs at least {min_knots} knots"))?;
                }
                fold_bounds(knots)
            }
            ProfileSpec::Cusp { c0, theta0, alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    bad(format!("cusp exponent must lie in (0, 1), got {alpha}"))?;
                }
                cusp_center = Some(match dim {
                    Dim::Two => Direction::from_angle(*theta0),
                    Dim::Three => Direction::from_spherical(*theta0, 0.0),
                });
                (*c0, c0 + PI.powf(*alpha))
            }
            ProfileSpec::PiecewiseConstant {
                cells: k,
                seed,
                low,
                high,
            } => {
                if *k == 0 {
                    bad("piecewise profile needs at least one cell".into())?;
                }
                if !(low <= high) {
                    bad(format!("empty value range [{low}, {high}]"))?;
                }
                cells = *k;
                let count = match dim {
                    Dim::Two => *k,
                    Dim::Three => 2 * k * k,
                };
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                cell_values = (0..count).map(|_| low + (high - low) * rng.random::<f64>()).collect();
                (*low, *high)
            }
            ProfileSpec::PiecewiseValues { values } => {
                cells = match dim {
                    Dim::Two => values.len(),
                    Dim::Three => {
                        let k = ((values.len() / 2) as f64).sqrt().round() as usize;
                        if 2 * k * k != values.len() {
                            bad(format!(
                                "a piecewise profile on S² needs 2K² values, got {}",
                                values.len()
                            ))?;
                        }
                        k
                    }
                };
                if cells == 0 {
                    bad("piecewise profile needs at least one value".into())?;
                }
                cell_values = values.clone();
                fold_bounds(values)
            }
        };
        if !(lo > 0.0) || !hi.is_finite() {
            bad(format!(
                "profile must satisfy 0 < c_low ≤ b ≤ c_high < ∞; bounds are [{lo}, {hi}]"
            ))?;
        }
        Ok(BoundaryProfile {
            dim,
            spec,
            cell_values,
            cells,
            cusp_center,
            c_low: lo,
            c_high: hi,
        })
    }

    pub fn constant(dim: Dim, value: f64) -> Result<Self> {
        Self::new(dim, ProfileSpec::Constant { value })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn c_low(&self) -> f64 {
        self.c_low
    }

    pub fn c_high(&self) -> f64 {
        self.c_high
    }

    pub fn is_continuous(&self) -> bool {
        self.spec.is_continuous()
    }

    /// Cell count of a piecewise profile, used to align quadrature grids.
    pub fn cells(&self) -> Option<usize> {
        (!self.spec.is_continuous()).then_some(self.cells)
    }

    pub fn cell_values(&self) -> &[f64] {
        &self.cell_values
    }

    /// Index of the cell containing ν (piecewise kinds).
    pub fn cell_index(&self, nu: &Direction) -> usize {
        let k = self.cells.max(1);
        match self.dim {
            Dim::Two => ((nu.azimuth() / (2.0 * PI) * k as f64) as usize).min(k - 1),
            Dim::Three => {
                let z = nu.coords()[2];
                let band = (((z + 1.0) * 0.5 * k as f64) as usize).min(k - 1);
                let sectors = 2 * k;
                let sector = ((nu.azimuth() / (2.0 * PI) * sectors as f64) as usize).min(sectors - 1);
                band * sectors + sector
            }
        }
    }

    /// b(ν).
    pub fn eval(&self, nu: &Direction) -> f64 {
        match &self.spec {
            ProfileSpec::Constant { value } => *value,
            ProfileSpec::SmoothTrig { mean, cos, sin } => {
                let p = nu.coords();
                let (mut re, mut im) = (1.0, 0.0);
                let mut b = *mean;
                for k in 0..cos.len().max(sin.len()) {
                    let nre = re * p[0] - im * p[1];
                    im = re * p[1] + im * p[0];
                    re = nre;
                    b += cos.get(k).copied().unwrap_or(0.0) * re + sin.get(k).copied().unwrap_or(0.0) * im;
                }
                b
            }
            ProfileSpec::Lipschitz { knots } => {
                let k = knots.len();
                let (t, periodic) = match self.dim {
                    Dim::Two => (nu.azimuth() / (2.0 * PI) * k as f64, true),
                    Dim::Three => (nu.colatitude() / PI * (k - 1) as f64, false),
                };
                let j = (t.floor() as usize).min(if periodic { k - 1 } else { k.saturating_sub(2) });
                let frac = t - j as f64;
                let next = if periodic { (j + 1) % k } else { (j + 1).min(k - 1) };
                knots[j] + frac * (knots[next] - knots[j])
            }
            ProfileSpec::Cusp { c0, alpha, .. } => {
                let center = self.cusp_center.as_ref().expect("cusp center resolved");
                c0 + nu.angle_to(center).powf(*alpha)
            }
            ProfileSpec::PiecewiseConstant { .. } | ProfileSpec::PiecewiseValues { .. } => {
                self.cell_values[self.cell_index(nu)]
            }
        }
    }

    /// b'(θ) on S¹ for the smooth trigonometric kind.
    pub fn derivative_theta(&self, theta: f64) -> Result<f64> {
        match (&self.spec, self.dim) {
            (ProfileSpec::Constant { .. }, Dim::Two) => Ok(0.0),
            (ProfileSpec::SmoothTrig { cos, sin, .. }, Dim::Two) => {
                let mut d = 0.0;
                for k in 0..cos.len().max(sin.len()) {
                    let kf = (k + 1) as f64;
                    let a = cos.get(k).copied().unwrap_or(0.0);
                    let b = sin.get(k).copied().unwrap_or(0.0);
                    d += kf * (-a * (kf * theta).sin() + b * (kf * theta).cos());
                }
                Ok(d)
            }
            _ => Err(Error::Unsupported(format!(
                "analytic angular derivative needs a smooth profile on S¹, got `{}` in {}D",
                self.spec.kind_name(),
                self.dim.n()
            ))),
        }
    }

    /// The sphere grid suited to this profile: cell-aligned for piecewise
    /// kinds, the standard tensor rule otherwise.
    pub fn quadrature(&self, resolution: usize) -> Result<SphereQuadrature> {
        match self.cells() {
            Some(k) => SphereQuadrature::cell_aligned(self.dim, resolution, k),
            None => SphereQuadrature::build(self.dim, resolution),
        }
    }
}

fn fold_bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

pub fn eval_profile(p: &BoundaryProfile, nu: &Direction) -> f64 {
    p.eval(nu)
}

pub(crate) fn check_dims(profile: &BoundaryProfile, q: &SphereQuadrature) -> Result<()> {
    if profile.dim() != q.dim() {
        return config_err(
            "dim",
            format!(
                "profile lives in {}D but the quadrature in {}D",
                profile.dim().n(),
                q.dim().n()
            ),
        );
    }
    Ok(())
}

/// The hypersurface S_ρ = {ρ b(ν) ν : ν ∈ S^{n-1}}.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSurface {
    pub profile: BoundaryProfile,
    pub rho: f64,
}

impl StarSurface {
    pub fn new(profile: BoundaryProfile, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return config_err("rho", format!("scale must be positive, got {rho}"));
        }
        Ok(StarSurface { profile, rho })
    }

    pub fn unit(profile: BoundaryProfile) -> Self {
        StarSurface { profile, rho: 1.0 }
    }

    pub fn dim(&self) -> Dim {
        self.profile.dim()
    }

    /// P(ω) = ω/|ω|.
    pub fn project(&self, omega: &Point) -> Result<Direction> {
        Direction::from_point(omega)
    }

    /// P^{-1}(ν) = ρ b(ν) ν.
    pub fn lift(&self, nu: &Direction) -> Point {
        nu.at_radius(self.rho * self.profile.eval(nu))
    }

    /// ∫_{S_ρ} f dm_{S_ρ} = ρ^{n-1} Σ w_i f(ρ b(ν_i) ν_i).
    pub fn integrate<F>(&self, q: &SphereQuadrature, f: F) -> Result<f64>
    where
        F: Fn(&Point) -> f64 + Sync + Send,
    {
        check_dims(&self.profile, q)?;
        let jac = self.rho.powi(self.dim().n() as i32 - 1);
        Ok(jac * q.integrate(|nu| f(&self.lift(nu)))?)
    }

    /// (∫ |f|^p dm_{S_ρ})^{1/p}.
    pub fn lp_norm<F>(&self, q: &SphereQuadrature, f: F, p: f64) -> Result<f64>
    where
        F: Fn(&Point) -> f64 + Sync + Send,
    {
        if !(p >= 1.0) || !p.is_finite() {
            return config_err("p", format!("Lebesgue exponent must satisfy 1 ≤ p < ∞, got {p}"));
        }
        Ok(self.integrate(q, |x| f(x).abs().powf(p))?.powf(1.0 / p))
    }

    /// (f, g) in L²_b(S): Σ w_i f(b ν_i) g(b ν_i) b(ν_i)^n. Defined on S = S_1 only.
    pub fn inner_product_l2b<F, G>(&self, q: &SphereQuadrature, f: F, g: G) -> Result<f64>
    where
        F: Fn(&Point) -> f64 + Sync + Send,
        G: Fn(&Point) -> f64 + Sync + Send,
    {
        if self.rho != 1.0 {
            return config_err("rho", "the weighted space L²_b is defined on S = S_1");
        }
        check_dims(&self.profile, q)?;
        let n = self.dim().n() as i32;
        q.integrate(|nu| {
            let b = self.profile.eval(nu);
            let w = nu.at_radius(b);
            f(&w) * g(&w) * b.powi(n)
        })
    }
}

pub fn project_p(surface: &StarSurface, omega: &Point) -> Result<Direction> {
    surface.project(omega)
}

pub fn lift_pinv(surface: &StarSurface, nu: &Direction) -> Point {
    surface.lift(nu)
}

pub fn integrate_surface<F>(surface: &StarSurface, q: &SphereQuadrature, f: F) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync + Send,
{
    surface.integrate(q, f)
}

pub fn lp_norm_boundary<F>(surface: &StarSurface, q: &SphereQuadrature, f: F, p: f64) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync + Send,
{
    surface.lp_norm(q, f, p)
}

pub fn weighted_inner_product_l2b<F, G>(surface: &StarSurface, q: &SphereQuadrature, f: F, g: G) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync + Send,
    G: Fn(&Point) -> f64 + Sync + Send,
{
    surface.inner_product_l2b(q, f, g)
}

/// The bounded star-shaped domain Ω = {x : |x| < b(x/|x|)}.
#[derive(Debug, Clone, PartialEq)]
pub struct StarDomain {
    pub profile: BoundaryProfile,
}

impl StarDomain {
    pub fn new(profile: BoundaryProfile) -> Self {
        StarDomain { profile }
    }

    pub fn dim(&self) -> Dim {
        self.profile.dim()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.boundary_residual(x) < 0.0
    }

    /// |x| − b(x/|x|): negative inside, zero on ∂Ω. The origin maps to −c_low.
    pub fn boundary_residual(&self, x: &Point) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return -self.profile.c_low();
        }
        let nu = Direction::from_point(x).expect("nonzero point");
        r - self.profile.eval(&nu)
    }

    /// The boundary ∂Ω as the surface S_1.
    pub fn boundary(&self) -> StarSurface {
        StarSurface::unit(self.profile.clone())
    }
}
