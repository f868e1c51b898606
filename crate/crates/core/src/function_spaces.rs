//! Closed-form test functions and the Sobolev norms evaluated on them.
//!
//! Every [`TestFunction`] carries an exact gradient and Laplacian. Radially
//! symmetric kinds also expose their radial profile, and the Gaussian family
//! a radial Fourier modulus, so W^{(s)}_2(R^n) norms never need an FFT.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::geometry::{dot, norm, Dim, Point};
use crate::par;
use crate::quadrature::RadialQuadrature;
use crate::special::bessel_j0;
use crate::sphere_quad::SphereQuadrature;
use crate::star_geometry::{check_dims, StarDomain, StarSurface};

/// c · x^i y^j z^k
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub powers: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub function: FunctionSpec,
}

/// Serializable description of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// e^{-a|x|²}
    Gaussian {
        a: f64,
    },
    /// e^{-(|x| - r0)² / (2σ²)}
    ShellGaussian {
        r0: f64,
        sigma: f64,
    },
    /// P(x)·e^{-a|x|²}
    PolyGaussian {
        a: f64,
        terms: Vec<Monomial>,
    },
    /// e^{d·x}
    ExpLinear {
        direction: Vec<f64>,
    },
    /// exp(-1/(1 - |x|²/R²)) inside |x| < R, zero outside.
    Bump {
        radius: f64,
    },
    /// cos(κ|x|)·e^{-a|x|²}
    Oscillatory {
        kappa: f64,
        a: f64,
    },
    /// Σ coef·f
    Sum {
        terms: Vec<Term>,
    },
}

impl FunctionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionSpec::Constant { .. } => "constant",
            FunctionSpec::Gaussian { .. } => "gaussian",
            FunctionSpec::ShellGaussian { .. } => "shell",
            FunctionSpec::PolyGaussian { .. } => "poly-gaussian",
            FunctionSpec::ExpLinear { .. } => "exp",
            FunctionSpec::Bump { .. } => "bump",
            FunctionSpec::Oscillatory { .. } => "osc",
            FunctionSpec::Sum { .. } => "sum",
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Constant { value } => write!(f, "constant:{value}"),
            FunctionSpec::Gaussian { a } => write!(f, "gaussian:{a}"),
            FunctionSpec::ShellGaussian { r0, sigma } => write!(f, "shell:{r0},{sigma}"),
            FunctionSpec::ExpLinear { direction } => {
                let d: Vec<String> = direction.iter().map(|x| x.to_string()).collect();
                write!(f, "exp:{}", d.join(","))
            }
            FunctionSpec::Bump { radius } => write!(f, "bump:{radius}"),
            FunctionSpec::Oscillatory { kappa, a } => write!(f, "osc:{kappa},{a}"),
            FunctionSpec::PolyGaussian { a, terms } => {
                write!(f, "poly-gaussian:{a}")?;
                for m in terms {
                    write!(f, ";{}*{}.{}.{}", m.coef, m.powers[0], m.powers[1], m.powers[2])?;
                }
                Ok(())
            }
            FunctionSpec::Sum { terms } => {
                let parts: Vec<String> = terms.iter().map(|t| format!("{}*({})", t.coef, t.function)).collect();
                write!(f, "sum[{}]", parts.join(" + "))
            }
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    /// Compact command-line form: `gaussian:0.5`, `shell:4,1`, `exp:1,0`,
    /// `bump:0.2`, `osc:16,0.5`, `constant:1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let v: Vec<f64> = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Config {
                    field: "function",
                    message: format!("`{t}` is not a number in `{s}`"),
                })
            })
            .collect::<Result<_>>()?;
        let want = |n: usize| -> Result<()> {
            if v.len() != n {
                return config_err("function", format!("`{kind}` takes {n} parameters, got `{s}`"));
            }
            Ok(())
        };
        Ok(match kind.trim() {
            "constant" => {
                want(1)?;
                FunctionSpec::Constant { value: v[0] }
            }
            "gaussian" => {
                want(1)?;
                FunctionSpec::Gaussian { a: v[0] }
            }
            "shell" => {
                want(2)?;
                FunctionSpec::ShellGaussian { r0: v[0], sigma: v[1] }
            }
            "exp" => FunctionSpec::ExpLinear { direction: v },
            "bump" => {
                want(1)?;
                FunctionSpec::Bump { radius: v[0] }
            }
            "osc" => {
                want(2)?;
                FunctionSpec::Oscillatory { kappa: v[0], a: v[1] }
            }
            other => return config_err("function", format!("unknown function kind `{other}`")),
        })
    }
}

/// A validated closed-form scalar field on R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    dim: Dim,
    spec: FunctionSpec,
}

impl TestFunction {
    pub fn new(dim: Dim, spec: FunctionSpec) -> Result<Self> {
        validate_spec(dim, &spec)?;
        Ok(TestFunction {
            dim,
            spec: pad_directions(spec),
        })
    }

    pub fn gaussian(dim: Dim, a: f64) -> Result<Self> {
        Self::new(dim, FunctionSpec::Gaussian { a })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    /// α·f, represented as a one-term sum.
    pub fn scaled(&self, alpha: f64) -> TestFunction {
        TestFunction {
            dim: self.dim,
            spec: FunctionSpec::Sum {
                terms: vec![Term {
                    coef: alpha,
                    function: self.spec.clone(),
                }],
            },
        }
    }

    /// f + g.
    pub fn plus(&self, other: &TestFunction) -> TestFunction {
        TestFunction {
            dim: self.dim,
            spec: FunctionSpec::Sum {
                terms: vec![
                    Term {
                        coef: 1.0,
                        function: self.spec.clone(),
                    },
                    Term {
                        coef: 1.0,
                        function: other.spec.clone(),
                    },
                ],
            },
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        eval_spec(&self.spec, x)
    }

    pub fn gradient(&self, x: &Point) -> Point {
        grad_spec(&self.spec, x)
    }

    pub fn laplacian(&self, x: &Point) -> f64 {
        lap_spec(&self.spec, self.dim.nf(), x)
    }

    pub fn is_radial(&self) -> bool {
        is_radial_spec(&self.spec)
    }

    /// (f(r), f'(r)) along any ray, for radially symmetric kinds.
    pub fn radial_profile(&self, r: f64) -> Result<(f64, f64)> {
        radial_spec(&self.spec, r)
            .ok_or_else(|| Error::Unsupported(format!("`{}` is not radially symmetric", self.spec.kind_name())))
    }

    /// Radius beyond which |f| ≤ rel·sup|f|; `None` for non-decaying kinds.
    pub fn decay_radius(&self, rel: f64) -> Option<f64> {
        decay_spec(&self.spec, rel)
    }

    /// Length scale on which the function varies; sets radial panel widths.
    pub fn length_scale(&self) -> f64 {
        scale_spec(&self.spec)
    }

    /// Modulus of the unitary Fourier transform (2π)^{-n/2}∫e^{-ik·x}f(x)dx as a
    /// function of |k|, for the Gaussian family.
    pub fn radial_fourier(&self, k: f64) -> Result<f64> {
        fourier_spec(&self.spec, self.dim, k)
    }

    fn has_fourier(&self) -> bool {
        has_fourier_spec(&self.spec)
    }
}

fn validate_spec(dim: Dim, spec: &FunctionSpec) -> Result<()> {
    let positive = |field: &'static str, v: f64| -> Result<()> {
        if !(v > 0.0) || !v.is_finite() {
            return config_err(field, format!("must be positive and finite, got {v}"));
        }
        Ok(())
    };
    match spec {
        FunctionSpec::Constant { value } if !value.is_finite() => config_err("value", "constant must be finite"),
        FunctionSpec::Constant { .. } => Ok(()),
        FunctionSpec::Gaussian { a } => positive("a", *a),
        FunctionSpec::ShellGaussian { r0, sigma } => {
            positive("sigma", *sigma)?;
            if !(*r0 >= 0.0) {
                return config_err("r0", format!("shell radius must be non-negative, got {r0}"));
            }
            Ok(())
        }
        FunctionSpec::PolyGaussian { a, terms } => {
            positive("a", *a)?;
            if dim == Dim::Two && terms.iter().any(|m| m.powers[2] != 0) {
                return config_err("terms", "z powers are not allowed in 2D");
            }
            Ok(())
        }
        FunctionSpec::ExpLinear { direction } => {
            if direction.len() != dim.n() {
                return config_err(
                    "direction",
                    format!("expected {} components, got {}", dim.n(), direction.len()),
                );
            }
            Ok(())
        }
        FunctionSpec::Bump { radius } => positive("radius", *radius),
        FunctionSpec::Oscillatory { kappa, a } => {
            positive("a", *a)?;
            if !(*kappa >= 0.0) || !kappa.is_finite() {
                return config_err("kappa", format!("frequency must be non-negative, got {kappa}"));
            }
            Ok(())
        }
        FunctionSpec::Sum { terms } => terms.iter().try_for_each(|t| validate_spec(dim, &t.function)),
    }
}

/// Pads exponential directions to three components for Point arithmetic.
fn pad_directions(spec: FunctionSpec) -> FunctionSpec {
    match spec {
        FunctionSpec::ExpLinear { mut direction } => {
            direction.resize(3, 0.0);
            FunctionSpec::ExpLinear { direction }
        }
        FunctionSpec::Sum { terms } => FunctionSpec::Sum {
            terms: terms
                .into_iter()
                .map(|t| Term {
                    coef: t.coef,
                    function: pad_directions(t.function),
                })
                .collect(),
        },
        other => other,
    }
}

fn r2(x: &Point) -> f64 {
    dot(x, x)
}

fn eval_spec(spec: &FunctionSpec, x: &Point) -> f64 {
    match spec {
        FunctionSpec::Constant { value } => *value,
        FunctionSpec::PolyGaussian { a, terms } => poly_eval(terms, x) * (-a * r2(x)).exp(),
        FunctionSpec::ExpLinear { direction } => {
            (direction[0] * x[0] + direction[1] * x[1] + direction[2] * x[2]).exp()
        }
        FunctionSpec::Sum { terms } => terms.iter().map(|t| t.coef * eval_spec(&t.function, x)).sum(),
        radial => radial_spec(radial, norm(x)).expect("radial kind").0,
    }
}

fn grad_spec(spec: &FunctionSpec, x: &Point) -> Point {
    match spec {
        FunctionSpec::Constant { .. } => [0.0; 3],
        FunctionSpec::PolyGaussian { a, terms } => {
            let e = (-a * r2(x)).exp();
            let p = poly_eval(terms, x);
            let mut g = [0.0; 3];
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = (poly_partial(terms, x, j) - 2.0 * a * x[j] * p) * e;
            }
            g
        }
        FunctionSpec::ExpLinear { direction } => {
            let f = eval_spec(spec, x);
            [direction[0] * f, direction[1] * f, direction[2] * f]
        }
        FunctionSpec::Sum { terms } => {
            let mut g = [0.0; 3];
            for t in terms {
                let gt = grad_spec(&t.function, x);
                for j in 0..3 {
                    g[j] += t.coef * gt[j];
                }
            }
            g
        }
        radial => {
            let r = norm(x);
            if r == 0.0 {
                return [0.0; 3];
            }
            let (_, d) = radial_spec(radial, r).expect("radial kind");
            [d * x[0] / r, d * x[1] / r, d * x[2] / r]
        }
    }
}

fn lap_spec(spec: &FunctionSpec, n: f64, x: &Point) -> f64 {
    let rr = r2(x);
    let r = rr.sqrt();
    match spec {
        FunctionSpec::Constant { .. } => 0.0,
        FunctionSpec::Gaussian { a } => (4.0 * a * a * rr - 2.0 * a * n) * (-a * rr).exp(),
        FunctionSpec::ShellGaussian { r0, sigma } => {
            let s2 = sigma * sigma;
            let u = r - r0;
            let f = (-u * u / (2.0 * s2)).exp();
            let d1 = -u / s2 * f;
            let d2 = (u * u / (s2 * s2) - 1.0 / s2) * f;
            d2 + (n - 1.0) * d1 / r
        }
        FunctionSpec::Bump { radius } => {
            let t = rr / (radius * radius);
            if t >= 1.0 {
                return 0.0;
            }
            let om = 1.0 - t;
            let f = (-1.0 / om).exp();
            let g1 = -1.0 / (om * om);
            let g2 = -2.0 / (om * om * om);
            let grad_t2 = 4.0 * t / (radius * radius);
            let lap_t = 2.0 * n / (radius * radius);
            f * (g1 * g1 * grad_t2 + g2 * grad_t2 + g1 * lap_t)
        }
        FunctionSpec::Oscillatory { kappa, a } => {
            let e = (-a * rr).exp();
            let (s, c) = (kappa * r).sin_cos();
            let d2 = -kappa * kappa * c + 4.0 * a * r * kappa * s + c * (4.0 * a * a * rr - 2.0 * a);
            // f'/r with sin(κr)/r → κ at the origin
            let sinc = if kappa * r < 1e-8 { *kappa } else { s / r };
            let d1_over_r = -kappa * sinc - 2.0 * a * c;
            (d2 + (n - 1.0) * d1_over_r) * e
        }
        FunctionSpec::PolyGaussian { a, terms } => {
            // Δ(P e^g) = (ΔP + 2∇P·∇g + P(Δg + |∇g|²)) e^g with g = -a|x|²
            let e = (-a * rr).exp();
            let p = poly_eval(terms, x);
            let lap_p: f64 = (0..3).map(|j| poly_second(terms, x, j)).sum();
            let grad_dot: f64 = (0..3).map(|j| poly_partial(terms, x, j) * x[j]).sum();
            (lap_p - 4.0 * a * grad_dot + p * (4.0 * a * a * rr - 2.0 * a * n)) * e
        }
        FunctionSpec::ExpLinear { direction } => {
            let d2: f64 = direction.iter().map(|d| d * d).sum();
            d2 * eval_spec(spec, x)
        }
        FunctionSpec::Sum { terms } => terms.iter().map(|t| t.coef * lap_spec(&t.function, n, x)).sum(),
    }
}

fn is_radial_spec(spec: &FunctionSpec) -> bool {
    match spec {
        FunctionSpec::PolyGaussian { .. } | FunctionSpec::ExpLinear { .. } => false,
        FunctionSpec::Sum { terms } => terms.iter().all(|t| is_radial_spec(&t.function)),
        _ => true,
    }
}

fn radial_spec(spec: &FunctionSpec, r: f64) -> Option<(f64, f64)> {
    Some(match spec {
        FunctionSpec::Constant { value } => (*value, 0.0),
        FunctionSpec::Gaussian { a } => {
            let f = (-a * r * r).exp();
            (f, -2.0 * a * r * f)
        }
        FunctionSpec::ShellGaussian { r0, sigma } => {
            let u = r - r0;
            let f = (-u * u / (2.0 * sigma * sigma)).exp();
            (f, -u / (sigma * sigma) * f)
        }
        FunctionSpec::Bump { radius } => {
            let t = r * r / (radius * radius);
            if t >= 1.0 {
                (0.0, 0.0)
            } else {
                let om = 1.0 - t;
                let f = (-1.0 / om).exp();
                (f, -f * 2.0 * r / (radius * radius * om * om))
            }
        }
        FunctionSpec::Oscillatory { kappa, a } => {
            let e = (-a * r * r).exp();
            let (s, c) = (kappa * r).sin_cos();
            (c * e, (-kappa * s - 2.0 * a * r * c) * e)
        }
        FunctionSpec::Sum { terms } => {
            let mut acc = (0.0, 0.0);
            for t in terms {
                let (f, d) = radial_spec(&t.function, r)?;
                acc.0 += t.coef * f;
                acc.1 += t.coef * d;
            }
            acc
        }
        FunctionSpec::PolyGaussian { .. } | FunctionSpec::ExpLinear { .. } => return None,
    })
}

fn decay_spec(spec: &FunctionSpec, rel: f64) -> Option<f64> {
    let l = -rel.ln();
    match spec {
        FunctionSpec::Constant { .. } | FunctionSpec::ExpLinear { .. } => None,
        FunctionSpec::Gaussian { a } | FunctionSpec::Oscillatory { a, .. } => Some((l / a).sqrt()),
        FunctionSpec::ShellGaussian { r0, sigma } => Some(r0 + sigma * (2.0 * l).sqrt()),
        FunctionSpec::Bump { radius } => Some(*radius),
        FunctionSpec::PolyGaussian { a, terms } => {
            let total: f64 = terms.iter().map(|m| m.coef.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            let envelope = |r: f64| -> f64 {
                terms
                    .iter()
                    .map(|m| m.coef.abs() * r.powi((m.powers[0] + m.powers[1] + m.powers[2]) as i32))
                    .sum::<f64>()
                    * (-a * r * r).exp()
            };
            let mut r = (l / a).sqrt();
            while envelope(r) > rel * total {
                r += 0.05 / a.sqrt();
            }
            Some(r)
        }
        FunctionSpec::Sum { terms } => terms
            .iter()
            .map(|t| decay_spec(&t.function, rel))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r))),
    }
}

fn scale_spec(spec: &FunctionSpec) -> f64 {
    match spec {
        FunctionSpec::Constant { .. } => 1.0,
        FunctionSpec::Gaussian { a } | FunctionSpec::PolyGaussian { a, .. } => 0.5 / a.sqrt(),
        FunctionSpec::ShellGaussian { sigma, .. } => 0.5 * sigma,
        FunctionSpec::Bump { radius } => radius / 8.0,
        FunctionSpec::Oscillatory { kappa, a } => {
            let osc = if *kappa > 0.0 { PI / kappa } else { f64::INFINITY };
            (0.5 / a.sqrt()).min(osc)
        }
        FunctionSpec::ExpLinear { direction } => {
            let d = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        }
        FunctionSpec::Sum { terms } => terms
            .iter()
            .map(|t| scale_spec(&t.function))
            .fold(f64::INFINITY, f64::min),
    }
}

fn has_fourier_spec(spec: &FunctionSpec) -> bool {
    match spec {
        FunctionSpec::Gaussian { .. } | FunctionSpec::Oscillatory { .. } => true,
        FunctionSpec::Sum { terms } => terms.iter().all(|t| has_fourier_spec(&t.function)),
        _ => false,
    }
}

fn fourier_spec(spec: &FunctionSpec, dim: Dim, k: f64) -> Result<f64> {
    let n = dim.nf();
    match spec {
        FunctionSpec::Gaussian { a } => Ok((2.0 * a).powf(-0.5 * n) * (-k * k / (4.0 * a)).exp()),
        FunctionSpec::Oscillatory { kappa, a } => match dim {
            Dim::Three => Ok(oscillatory_fourier_3d(*kappa, *a, k)),
            Dim::Two => Ok(hankel_transform_2d(
                |r| (kappa * r).cos() * (-a * r * r).exp(),
                k,
                (40.0 / a).sqrt(),
                kappa + k,
            )),
        },
        FunctionSpec::Sum { terms } => terms
            .iter()
            .map(|t| fourier_spec(&t.function, dim, k).map(|v| t.coef * v))
            .sum(),
        other => Err(Error::Unsupported(format!(
            "no closed-form Fourier profile for `{}`",
            other.kind_name()
        ))),
    }
}

/// Fourier profile of cos(κr)e^{-ar²} in R³ from the sine transform
/// F(k) = √(2/π) k^{-1} ∫ r f(r) sin(kr) dr, evaluated in closed form.
fn oscillatory_fourier_3d(kappa: f64, a: f64, k: f64) -> f64 {
    let pref = (2.0 / a).sqrt() / (4.0 * a);
    let g = |u: f64| (-u * u / (4.0 * a)).exp();
    if k < 1e-6 {
        // limit k → 0 of [(k+κ)g(k+κ) + (k-κ)g(k-κ)] / (2k)
        return pref * g(kappa) * (1.0 - kappa * kappa / (2.0 * a));
    }
    pref * ((k + kappa) * g(k + kappa) + (k - kappa) * g(k - kappa)) / (2.0 * k)
}

/// ∫_0^{r_max} f(r) J₀(kr) r dr: the 2D radial Fourier transform, on panels
/// short enough to resolve the oscillation `freq` of the integrand.
pub fn hankel_transform_2d<F: Fn(f64) -> f64 + Sync + Send>(f: F, k: f64, r_max: f64, freq: f64) -> f64 {
    let panels = ((r_max * freq / PI).ceil() as usize).max(16);
    let rq = RadialQuadrature::composite(r_max, panels, 8).expect("positive extent");
    par::sum_indexed(rq.len(), |i| {
        let r = rq.nodes[i];
        rq.weights[i] * f(r) * bessel_j0(k * r) * r
    })
}

fn poly_eval(terms: &[Monomial], x: &Point) -> f64 {
    terms
        .iter()
        .map(|m| m.coef * x[0].powi(m.powers[0] as i32) * x[1].powi(m.powers[1] as i32) * x[2].powi(m.powers[2] as i32))
        .sum()
}

fn monomial_factor(x: f64, p: u32, order: u32) -> f64 {
    match (p, order) {
        (p, 0) => x.powi(p as i32),
        (0, _) => 0.0,
        (p, 1) => p as f64 * x.powi(p as i32 - 1),
        (1, 2) => 0.0,
        (p, _) => (p * (p - 1)) as f64 * x.powi(p as i32 - 2),
    }
}

fn poly_derivative(terms: &[Monomial], x: &Point, j: usize, order: u32) -> f64 {
    terms
        .iter()
        .map(|m| {
            let mut v = m.coef;
            for (axis, &p) in m.powers.iter().enumerate() {
                v *= monomial_factor(x[axis], p, if axis == j { order } else { 0 });
            }
            v
        })
        .sum()
}

fn poly_partial(terms: &[Monomial], x: &Point, j: usize) -> f64 {
    poly_derivative(terms, x, j, 1)
}

fn poly_second(terms: &[Monomial], x: &Point, j: usize) -> f64 {
    poly_derivative(terms, x, j, 2)
}

/// `count` polynomials of total degree ≤ 2 with coefficients uniform in
/// [-1, 1], times e^{-|x|²/2}. Deterministic in `seed`.
pub fn poly_gaussian_family(dim: Dim, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exps: Vec<[u32; 3]> = Vec::new();
    for i in 0..=2u32 {
        for j in 0..=2u32 {
            for k in 0..=2u32 {
                if i + j + k <= 2 && (dim == Dim::Three || k == 0) {
                    exps.push([i, j, k]);
                }
            }
        }
    }
    (0..count)
        .map(|_| {
            let terms = exps
                .iter()
                .map(|&powers| Monomial {
                    coef: rng.random::<f64>() * 2.0 - 1.0,
                    powers,
                })
                .collect();
            TestFunction::new(dim, FunctionSpec::PolyGaussian { a: 0.5, terms }).expect("valid family")
        })
        .collect()
}

/// Radial grid on [0, R_max] where the integrand |f|² has dropped below
/// 1e-16 of its peak, with panels no wider than the function's length scale.
pub fn radial_grid_for(f: &TestFunction, stretch: f64) -> Result<RadialQuadrature> {
    let r_max = f.decay_radius(1e-8).ok_or_else(|| {
        Error::Unsupported(format!(
            "`{}` does not decay; its integral over R^n diverges",
            f.spec().kind_name()
        ))
    })? * stretch;
    let width = f.length_scale() * stretch;
    let panels = ((r_max / width).ceil() as usize).max(8);
    RadialQuadrature::composite(r_max, panels, 16)
}

/// ‖f‖_{W^{(1)}_p(Ω)} = (∫_Ω |f|^p + Σ_i |∂_i f|^p)^{1/p}, in spherical
/// coordinates: ∫_{S^{n-1}} ∫_0^{b(ν)} (·) r^{n-1} dr dν. `rq` is a rule on
/// [0, 1] that is rescaled to [0, b(ν)] on each ray.
pub fn w1p_norm_domain(
    domain: &StarDomain,
    q: &SphereQuadrature,
    rq: &RadialQuadrature,
    f: &TestFunction,
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return config_err("p", format!("Sobolev exponent must satisfy 1 ≤ p < ∞, got {p}"));
    }
    check_dims(&domain.profile, q)?;
    let n = domain.dim().n();
    let len = rq.r_max();
    let total = q.integrate(|nu| {
        let b = domain.profile.eval(nu);
        rq.scaled(b / len)
            .map(|(r, w)| {
                let x = nu.at_radius(r);
                let g = f.gradient(&x);
                let dens = f.eval(&x).abs().powf(p) + g[..n].iter().map(|d| d.abs().powf(p)).sum::<f64>();
                w * dens * r.powi(n as i32 - 1)
            })
            .sum()
    })?;
    Ok(total.powf(1.0 / p))
}

/// ‖f‖_{W^{(1)}_p(R^n)} by spherical quadrature over a ball that contains the
/// numerical support of f.
pub fn w1p_norm_rn(f: &TestFunction, q: &SphereQuadrature, p: f64) -> Result<f64> {
    let r_max = radial_grid_for(f, 1.0)?.r_max();
    let ball = StarDomain::new(crate::star_geometry::BoundaryProfile::constant(f.dim(), r_max)?);
    let rq = RadialQuadrature::composite(1.0, ((r_max / f.length_scale()).ceil() as usize).max(8), 16)?;
    w1p_norm_domain(&ball, q, &rq, f, p)
}

/// ‖f‖_{W^{(1)}_2(R^n)} of a radial function: (|S^{n-1}| ∫ (f² + f'²) r^{n-1} dr)^{1/2}.
pub fn w12_norm_radial(f: &TestFunction) -> Result<f64> {
    let rq = radial_grid_for(f, 1.0)?;
    let n = f.dim().n() as i32;
    f.radial_profile(0.0)?;
    let s = par::sum_indexed(rq.len(), |i| {
        let r = rq.nodes[i];
        let (v, d) = f.radial_profile(r).expect("radial");
        rq.weights[i] * (v * v + d * d) * r.powi(n - 1)
    });
    Ok((f.dim().sphere_area() * s).sqrt())
}

/// ‖f‖_{L²(R^n)} of a radial function.
pub fn l2_norm_radial(f: &TestFunction) -> Result<f64> {
    let rq = radial_grid_for(f, 1.0)?;
    let n = f.dim().n() as i32;
    f.radial_profile(0.0)?;
    let s = par::sum_indexed(rq.len(), |i| {
        let r = rq.nodes[i];
        let v = f.radial_profile(r).expect("radial").0;
        rq.weights[i] * v * v * r.powi(n - 1)
    });
    Ok((f.dim().sphere_area() * s).sqrt())
}

/// Frequency grid covering the support of the Fourier profile of `f`.
pub fn frequency_grid_for(f: &TestFunction) -> Result<RadialQuadrature> {
    // (k - κ)²/(4a) > 40 makes |F|² < e^{-80}
    fn extent(spec: &FunctionSpec) -> Option<(f64, f64)> {
        match spec {
            FunctionSpec::Gaussian { a } => Some(((160.0 * a).sqrt(), a.sqrt())),
            FunctionSpec::Oscillatory { kappa, a } => Some((kappa + (160.0 * a).sqrt(), a.sqrt())),
            FunctionSpec::Sum { terms } => terms
                .iter()
                .map(|t| extent(&t.function))
                .try_fold((0.0f64, f64::INFINITY), |(k, w), e| {
                    e.map(|(k2, w2)| (k.max(k2), w.min(w2)))
                }),
            _ => None,
        }
    }
    let (k_max, width) = extent(f.spec())
        .ok_or_else(|| Error::Unsupported(format!("no Fourier profile for `{}`", f.spec().kind_name())))?;
    let panels = ((k_max / width).ceil() as usize).max(8);
    RadialQuadrature::composite(k_max, panels, 16)
}

/// ‖f‖_{W^{(s)}_2(R^n)} = (|S^{n-1}| ∫_0^∞ (1+k²)^s |F f(k)|² k^{n-1} dk)^{1/2}.
pub fn ws2_norm_rn(f: &TestFunction, s: f64) -> Result<f64> {
    let kq = frequency_grid_for(f)?;
    ws2_norm_with(f, s, &kq)
}

/// As [`ws2_norm_rn`] with an explicit frequency quadrature.
pub fn ws2_norm_with(f: &TestFunction, s: f64, kq: &RadialQuadrature) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return config_err("s", format!("smoothness index must be non-negative, got {s}"));
    }
    if !f.has_fourier() {
        return Err(Error::Unsupported(format!(
            "`{}` has no closed-form Fourier profile",
            f.spec().kind_name()
        )));
    }
    let n = f.dim().n() as i32;
    let values = par::map_indexed(kq.len(), |i| f.radial_fourier(kq.nodes[i]));
    let mut total = 0.0;
    for (i, v) in values.into_iter().enumerate() {
        let k = kq.nodes[i];
        let v = v?;
        total += kq.weights[i] * (1.0 + k * k).powf(s) * v * v * k.powi(n - 1);
    }
    Ok((f.dim().sphere_area() * total).sqrt())
}

/// Samples of (Uf)(ρ, ω) = ρ^{(n-1)/2} f(ρω) on ω ∈ S, together with the
/// norm in L²((0,∞); L²_b(S)).
#[derive(Debug, Clone, PartialEq)]
pub struct UTransform {
    pub rho: Vec<f64>,
    /// values[j * nodes + i] = (Uf)(ρ_j, b(ν_i)ν_i)
    pub values: Vec<f64>,
    pub nodes: usize,
    pub norm: f64,
}

/// Applies U on the unit surface S and evaluates its norm
/// (∫ dρ ∫_S |Uf|² b^n dm_S)^{1/2}.
pub fn apply_u(
    surface: &StarSurface,
    f: &TestFunction,
    rho_q: &RadialQuadrature,
    q: &SphereQuadrature,
) -> Result<UTransform> {
    if surface.rho != 1.0 {
        return config_err("rho", "U acts on the unit surface S");
    }
    check_dims(&surface.profile, q)?;
    if f.decay_radius(1e-8).is_none() {
        return Err(Error::Unsupported(format!(
            "U f is not square integrable for `{}`",
            f.spec().kind_name()
        )));
    }
    let n = surface.dim().n() as i32;
    let m = q.len();
    let omegas: Vec<(Point, f64)> = q
        .nodes()
        .iter()
        .map(|nu| {
            let b = surface.profile.eval(nu);
            (nu.at_radius(b), b.powi(n))
        })
        .collect();
    let half = 0.5 * (n - 1) as f64;
    let values = par::map_indexed(rho_q.len() * m, |idx| {
        let rho = rho_q.nodes[idx / m];
        let (w, _) = &omegas[idx % m];
        rho.powf(half) * f.eval(&[rho * w[0], rho * w[1], rho * w[2]])
    });
    let weights = q.weights();
    let sq = par::sum_indexed(values.len(), |idx| {
        let (j, i) = (idx / m, idx % m);
        rho_q.weights[j] * weights[i] * omegas[i].1 * values[idx] * values[idx]
    });
    if !sq.is_finite() {
        return Err(Error::Evaluation { node: 0, value: sq });
    }
    Ok(UTransform {
        rho: rho_q.nodes.clone(),
        values,
        nodes: m,
        norm: sq.sqrt(),
    })
}

/// ρ-grid for [`apply_u`]: covers ρ·c_low up to the decay radius of f.
pub fn rho_grid_for(f: &TestFunction, surface: &StarSurface, panels_per_unit: f64) -> Result<RadialQuadrature> {
    let base = radial_grid_for(f, 1.0)?;
    let r_max = base.r_max() / surface.profile.c_low();
    let width = f.length_scale() / surface.profile.c_high();
    let panels = ((r_max / width * panels_per_unit).ceil() as usize).max(8);
    RadialQuadrature::composite(r_max, panels, 16)
}
