//! Volumes and integrals decomposed over the level sets of the gauge
//! a(x) = |x| / b(x/|x|), with Monte-Carlo and classical-coarea oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::function_spaces::TestFunction;
use crate::geometry::{norm, Dim, Direction, Point};
use crate::par;
use crate::quadrature::{gauss_legendre, RadialQuadrature};
use crate::sphere_quad::SphereQuadrature;
use crate::star_geometry::{check_dims, BoundaryProfile};

/// The gauge a(x) = |x|/b(x/|x|); its sublevel sets {a < λ} are the dilates λΩ.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunction {
    pub profile: BoundaryProfile,
}

impl LevelFunction {
    pub fn new(profile: BoundaryProfile) -> Self {
        LevelFunction { profile }
    }

    pub fn dim(&self) -> Dim {
        self.profile.dim()
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let nu = Direction::from_point(x).expect("nonzero point");
        r / self.profile.eval(&nu)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return config_err("lambda", format!("level must be positive, got {lambda}"));
    }
    Ok(())
}

fn moment_bn(level: &LevelFunction, q: &SphereQuadrature) -> Result<f64> {
    check_dims(&level.profile, q)?;
    let n = level.dim().n() as i32;
    q.integrate(|nu| level.profile.eval(nu).powi(n))
}

/// V_λ = |{a < λ}| = (λ^n/n) Σ w_i b(ν_i)^n.
pub fn volume(level: &LevelFunction, q: &SphereQuadrature, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let n = level.dim().n() as i32;
    Ok(lambda.powi(n) / n as f64 * moment_bn(level, q)?)
}

/// dV_λ/dλ = ∫_{S_λ} b^n dm_{S_λ} = λ^{n-1} Σ w_i b(ν_i)^n.
pub fn dv_dlambda(level: &LevelFunction, q: &SphereQuadrature, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let n = level.dim().n() as i32;
    Ok(lambda.powi(n - 1) * moment_bn(level, q)?)
}

/// ρ-rule for [`integral_full_space`]: reaches the decay radius of f on the
/// innermost ray and resolves f on the outermost one.
pub fn level_grid_for(level: &LevelFunction, f: &TestFunction) -> Result<RadialQuadrature> {
    let r_f = f.decay_radius(1e-17).ok_or_else(|| {
        Error::Unsupported(format!(
            "`{}` does not decay; its integral over R^n diverges",
            f.spec().kind_name()
        ))
    })?;
    let rho_max = r_f / level.profile.c_low();
    let width = f.length_scale() / level.profile.c_high();
    let panels = ((rho_max / width).ceil() as usize).max(8);
    RadialQuadrature::composite(rho_max, panels, 16)
}

/// ∫_{R^n} f = ∫_0^∞ dρ Σ_i w_i f(ρ b_i ν_i) b_i^n ρ^{n-1}: the integral
/// decomposed over the level surfaces S_ρ = {a = ρ}.
pub fn integral_full_space(
    level: &LevelFunction,
    q: &SphereQuadrature,
    rq: &RadialQuadrature,
    f: &TestFunction,
) -> Result<f64> {
    check_dims(&level.profile, q)?;
    if f.decay_radius(1e-8).is_none() {
        return Err(Error::Unsupported(format!(
            "`{}` does not decay; its integral over R^n diverges",
            f.spec().kind_name()
        )));
    }
    let n = level.dim().n() as i32;
    let m = q.len();
    let rays: Vec<(Direction, f64)> = q.nodes().iter().map(|nu| (*nu, level.profile.eval(nu))).collect();
    let w = q.weights();
    let total = par::sum_indexed(rq.len() * m, |idx| {
        let (j, i) = (idx / m, idx % m);
        let rho = rq.nodes[j];
        let (nu, b) = &rays[i];
        rq.weights[j] * w[i] * f.eval(&nu.at_radius(rho * b)) * b.powi(n) * rho.powi(n - 1)
    });
    if !total.is_finite() {
        return Err(Error::Evaluation { node: 0, value: total });
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Samples drawn per independently seeded stream.
pub const MC_CHUNK: usize = 1 << 14;

pub const MC_MIN_SAMPLES: usize = 10_000;

/// Runs `body` on every point of the seeded sample in [-half, half]^n and
/// returns per-chunk (Σv, Σv²). Chunk c draws from stream c of the seed, so
/// the result does not depend on the thread count.
fn mc_sums<F>(dim: Dim, half: f64, samples: usize, seed: u64, body: F) -> (f64, f64)
where
    F: Fn(&Point) -> f64 + Sync + Send,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts = par::map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = MC_CHUNK.min(samples - c * MC_CHUNK);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let mut x = [0.0; 3];
            for xi in x.iter_mut().take(dim.n()) {
                *xi = half * (2.0 * rng.random::<f64>() - 1.0);
            }
            let v = body(&x);
            s1 += v;
            s2 += v * v;
        }
        (s1, s2)
    });
    parts.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MC_MIN_SAMPLES {
        return config_err(
            "samples",
            format!("need at least {MC_MIN_SAMPLES} samples, got {samples}"),
        );
    }
    Ok(())
}

/// Rejection estimate of V_λ from the box [-λc_high, λc_high]^n with its
/// binomial standard error.
pub fn mc_volume_oracle(level: &LevelFunction, lambda: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_lambda(lambda)?;
    check_samples(samples)?;
    let dim = level.dim();
    let half = lambda * level.profile.c_high() * (1.0 + 1e-12);
    let (hits, _) = mc_sums(dim, half, samples, seed, |x| {
        f64::from(u8::from(level.eval(x) < lambda))
    });
    let box_volume = (2.0 * half).powi(dim.n() as i32);
    let p = hits / samples as f64;
    Ok(McEstimate {
        estimate: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Plain Monte-Carlo estimate of ∫_{[-half, half]^n} f.
pub fn mc_integral_oracle(f: &TestFunction, half: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    if !(half > 0.0) || !half.is_finite() {
        return config_err("half", "box half-width must be positive");
    }
    let dim = f.dim();
    let (s1, s2) = mc_sums(dim, half, samples, seed, |x| f.eval(x));
    let m = samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    let box_volume = (2.0 * half).powi(dim.n() as i32);
    Ok(McEstimate {
        estimate: box_volume * mean,
        std_error: box_volume * (var / m).sqrt(),
        samples,
    })
}

/// Pointwise comparison of the two sides of (1/|∇a|)|f'(θ)| = ρ b(θ)².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub rho: f64,
    pub theta: Vec<f64>,
    /// (1/|∇a|)·|f'(θ)| with both factors from their own closed forms.
    pub lhs: Vec<f64>,
    /// ρ b(θ)²
    pub rhs: Vec<f64>,
    pub max_abs_error: f64,
}

/// The two independently computed factors at (ρ, θ): the arclength density
/// |f'(θ)| of θ ↦ ρb(θ)(cos θ, sin θ) and |∇a| at that point, from the
/// Cartesian gradient e(θ)·x̂ + e'(θ)·θ̂ with e = 1/b.
fn crosscheck_factors(profile: &BoundaryProfile, rho: f64, theta: f64) -> Result<(f64, f64)> {
    let b = profile.eval(&Direction::from_angle(theta));
    let db = profile.derivative_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let tangent = [rho * (db * c - b * s), rho * (db * s + b * c)];
    let arclength = tangent[0].hypot(tangent[1]);
    let e = 1.0 / b;
    let de = -db / (b * b);
    let grad = [e * c - de * s, e * s + de * c];
    Ok((arclength, grad[0].hypot(grad[1])))
}

/// Evaluates the 2D identity at `angles` equispaced θ for a smooth profile.
pub fn classical_crosscheck_2d(profile: &BoundaryProfile, rho: f64, angles: usize) -> Result<CrosscheckReport> {
    if profile.dim() != Dim::Two {
        return Err(Error::Unsupported("the classical cross-check is planar".into()));
    }
    if angles == 0 {
        return config_err("angles", "need at least one sample angle");
    }
    let theta: Vec<f64> = (0..angles)
        .map(|i| std::f64::consts::TAU * i as f64 / angles as f64)
        .collect();
    let mut lhs = Vec::with_capacity(angles);
    let mut rhs = Vec::with_capacity(angles);
    for &t in &theta {
        let (arc, grad) = crosscheck_factors(profile, rho, t)?;
        lhs.push(arc / grad);
        let b = profile.eval(&Direction::from_angle(t));
        rhs.push(rho * b * b);
    }
    let max_abs_error = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(CrosscheckReport {
        rho,
        theta,
        lhs,
        rhs,
        max_abs_error,
    })
}

/// ∫_0^λ ∫_0^{2π} (1/|∇a|)|f'_ρ(θ)| dθ dρ by tensor Gauss–Legendre in ρ and
/// the trapezoid rule in θ; the classical coarea formula says this is V_λ.
pub fn classical_volume_2d(profile: &BoundaryProfile, lambda: f64, angles: usize, radial: usize) -> Result<f64> {
    check_lambda(lambda)?;
    let (gx, gw) = gauss_legendre(radial);
    let h = std::f64::consts::TAU / angles as f64;
    let mut total = 0.0;
    for (x, w) in gx.iter().zip(&gw) {
        let rho = 0.5 * lambda * (x + 1.0);
        let mut inner = 0.0;
        for i in 0..angles {
            let (arc, grad) = crosscheck_factors(profile, rho, i as f64 * h)?;
            inner += arc / grad;
        }
        total += 0.5 * lambda * w * h * inner;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoareaRecord {
    pub lambda: f64,
    pub volume: f64,
    pub dv_formula: f64,
    pub dv_finite_difference: f64,
    pub mc_volume: Option<McEstimate>,
}

/// Volumes and their λ-derivatives on a λ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoareaReport {
    pub records: Vec<CoareaRecord>,
}

/// Builds the report; `mc` = Some((samples, seed)) adds a Monte-Carlo volume
/// per λ, seeded with seed + index.
pub fn coarea_report(
    level: &LevelFunction,
    q: &SphereQuadrature,
    lambdas: &[f64],
    mc: Option<(usize, u64)>,
) -> Result<CoareaReport> {
    let mut records = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let h = 1e-4 * lambda;
        let fd = (volume(level, q, lambda + h)? - volume(level, q, lambda - h)?) / (2.0 * h);
        let mc_volume = match mc {
            Some((samples, seed)) => Some(mc_volume_oracle(level, lambda, samples, seed.wrapping_add(i as u64))?),
            None => None,
        };
        records.push(CoareaRecord {
            lambda,
            volume: volume(level, q, lambda)?,
            dv_formula: dv_dlambda(level, q, lambda)?,
            dv_finite_difference: fd,
            mc_volume,
        });
    }
    Ok(CoareaReport { records })
}
