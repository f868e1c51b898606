//! Trace maps onto star-shaped surfaces and the experiments that probe their
//! boundedness, decay in ρ, and Hölder continuity in ρ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::fit::ExponentFit;
use crate::function_spaces::{w12_norm_radial, w1p_norm_domain, w1p_norm_rn, ws2_norm_rn, FunctionSpec, TestFunction};
use crate::quadrature::{gauss_legendre, RadialQuadrature};
use crate::sphere_quad::SphereQuadrature;
use crate::star_geometry::{check_dims, BoundaryProfile, StarDomain, StarSurface};

/// Boundary values f(ρ b(ν_i) ν_i) and their norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub rho: f64,
    pub values: Vec<f64>,
    pub norm: f64,
}

fn sample(profile: &BoundaryProfile, rho: f64, q: &SphereQuadrature, f: &TestFunction) -> Result<Vec<f64>> {
    check_dims(profile, q)?;
    if f.dim() != profile.dim() {
        return config_err("function", "function and profile live in different dimensions");
    }
    let s = StarSurface::new(profile.clone(), rho)?;
    let values: Vec<f64> = q.nodes().iter().map(|nu| f.eval(&s.lift(nu))).collect();
    if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Evaluation { node, value });
    }
    Ok(values)
}

fn lp_of(q: &SphereQuadrature, values: &[f64], p: f64) -> Result<f64> {
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    Ok(q.weighted_sum(&powered)?.powf(1.0 / p))
}

/// T_p f on ∂Ω with its L^p(∂Ω) norm under the pullback measure.
pub fn trace_tp(domain: &StarDomain, q: &SphereQuadrature, f: &TestFunction, p: f64) -> Result<TraceSample> {
    if !(p >= 1.0) || !p.is_finite() {
        return config_err("p", format!("Lebesgue exponent must satisfy 1 ≤ p < ∞, got {p}"));
    }
    let values = sample(&domain.profile, 1.0, q, f)?;
    let norm = lp_of(q, &values, p)?;
    Ok(TraceSample { rho: 1.0, values, norm })
}

/// T_s(ρ) f: the values of f on S_ρ, pulled back to S, with the L²(S) norm
/// (Σ w_i f(ρ b_i ν_i)²)^{1/2}. Bounded only above the threshold s > 1/2.
pub fn trace_ts(
    profile: &BoundaryProfile,
    rho: f64,
    q: &SphereQuadrature,
    f: &TestFunction,
    s: f64,
) -> Result<TraceSample> {
    check_s(s)?;
    let values = sample(profile, rho, q, f)?;
    let norm = lp_of(q, &values, 2.0)?;
    Ok(TraceSample { rho, values, norm })
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.5) || !s.is_finite() {
        return config_err("s", format!("traces on hypersurfaces need s > 1/2, got {s}"));
    }
    Ok(())
}

/// One function's trace-to-Sobolev ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub index: usize,
    pub kind: String,
    pub trace_norm: f64,
    pub sobolev_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConstantReport {
    pub resolution: usize,
    pub records: Vec<RatioRecord>,
    /// Members whose W¹_p norm vanished; no ratio is defined for them.
    pub skipped: Vec<usize>,
    pub max_ratio: f64,
    pub refined_max_ratio: f64,
    /// |max_refined / max - 1|
    pub refinement_delta: f64,
}

fn ratios(
    domain: &StarDomain,
    q: &SphereQuadrature,
    rq: &RadialQuadrature,
    family: &[TestFunction],
    p: f64,
) -> Result<(Vec<RatioRecord>, Vec<usize>)> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (index, f) in family.iter().enumerate() {
        let sobolev_norm = w1p_norm_domain(domain, q, rq, f, p)?;
        if sobolev_norm == 0.0 {
            skipped.push(index);
            continue;
        }
        let trace_norm = trace_tp(domain, q, f, p)?.norm;
        records.push(RatioRecord {
            index,
            kind: f.spec().kind_name().to_string(),
            trace_norm,
            sobolev_norm,
            ratio: trace_norm / sobolev_norm,
        });
    }
    Ok((records, skipped))
}

/// Ratios ‖T_p f‖_{L^p(∂Ω)} / ‖f‖_{W¹_p(Ω)} over a family, at `resolution`
/// and again at twice that resolution.
pub fn trace_constant_experiment(
    domain: &StarDomain,
    resolution: usize,
    family: &[TestFunction],
    p: f64,
) -> Result<TraceConstantReport> {
    if family.is_empty() {
        return config_err("family", "the test family is empty");
    }
    let rq = RadialQuadrature::composite(1.0, 8, 16)?;
    let q = domain.profile.quadrature(resolution)?;
    let q2 = domain.profile.quadrature(2 * resolution)?;
    let (records, skipped) = ratios(domain, &q, &rq, family, p)?;
    if records.is_empty() {
        return config_err("family", "every member has zero Sobolev norm");
    }
    let (refined, _) = ratios(domain, &q2, &rq, family, p)?;
    let max_of = |r: &[RatioRecord]| r.iter().map(|x| x.ratio).fold(0.0, f64::max);
    let max_ratio = max_of(&records);
    let refined_max_ratio = max_of(&refined);
    Ok(TraceConstantReport {
        resolution,
        records,
        skipped,
        max_ratio,
        refined_max_ratio,
        refinement_delta: (refined_max_ratio / max_ratio - 1.0).abs(),
    })
}

/// ‖f‖_{W^s_2(R^n)}: physical-space W¹₂ at s = 1 (radial fast path when
/// available), the Fourier-side definition otherwise.
pub fn sobolev_norm_rn(f: &TestFunction, s: f64, q: &SphereQuadrature) -> Result<f64> {
    if s == 1.0 {
        if f.is_radial() {
            w12_norm_radial(f)
        } else {
            w1p_norm_rn(f, q, 2.0)
        }
    } else {
        ws2_norm_rn(f, s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub rho: f64,
    pub trace_norm: f64,
    pub sobolev_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub records: Vec<DecayRecord>,
    pub fit: ExponentFit,
    /// -(n-1)/2
    pub expected_slope: f64,
}

/// For each ρ, the shell Gaussian centred on |x| = ρ (width `sigma`) and its
/// ratio ‖T(ρ)f_ρ‖_{L²(S)} / ‖f_ρ‖_{W¹₂(R^n)}; slope of the ratio against ρ.
pub fn decay_experiment(
    profile: &BoundaryProfile,
    q: &SphereQuadrature,
    rhos: &[f64],
    sigma: f64,
) -> Result<DecayReport> {
    decay_experiment_with(profile, q, rhos, |rho| FunctionSpec::ShellGaussian { r0: rho, sigma })
}

/// As [`decay_experiment`] with an arbitrary ρ-indexed family.
pub fn decay_experiment_with<F>(
    profile: &BoundaryProfile,
    q: &SphereQuadrature,
    rhos: &[f64],
    family: F,
) -> Result<DecayReport>
where
    F: Fn(f64) -> FunctionSpec,
{
    if rhos.len() < 4 {
        return config_err("rhos", format!("need at least 4 scales, got {}", rhos.len()));
    }
    if let Some(r) = rhos.iter().find(|r| !(**r >= 1.0) || !r.is_finite()) {
        return config_err("rhos", format!("scales must satisfy ρ ≥ 1, got {r}"));
    }
    let dim = profile.dim();
    let mut records = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let f = TestFunction::new(dim, family(rho))?;
        let trace_norm = trace_ts(profile, rho, q, &f, 1.0)?.norm;
        let sobolev_norm = sobolev_norm_rn(&f, 1.0, q)?;
        records.push(DecayRecord {
            rho,
            trace_norm,
            sobolev_norm,
            ratio: trace_norm / sobolev_norm,
        });
    }
    let ys: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let fit = ExponentFit::fit(rhos, &ys)?;
    Ok(DecayReport {
        records,
        fit,
        expected_slope: -0.5 * (dim.n() as f64 - 1.0),
    })
}

/// Upper truncation of the kernel integral.
pub const KERNEL_X_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    /// Analytic estimate of the truncated tail, already included in `value`.
    pub tail: f64,
    /// Set when the tail is not negligible against the value.
    pub imprecise: bool,
}

/// K_s(ρ, ρ₁) = ∫_R 4 sin²(x(ρ-ρ₁)/2) / (1+|x|)^{2s} dx.
///
/// Quadrature runs on [0, X] over panels that break both at the geometric
/// sequence 2^k/100 (the algebraic decay) and at multiples of π/|ρ-ρ₁| (the
/// oscillation). The tail beyond X is replaced by its mean value
/// 4(1+X)^{1-2s}/(2s-1).
pub fn kernel_bound_k(s: f64, rho: f64, rho1: f64) -> Result<KernelValue> {
    check_s(s)?;
    if !(rho > 0.0) || !(rho1 > 0.0) {
        return config_err("rho", "scales must be positive");
    }
    let d = (rho - rho1).abs();
    if d == 0.0 {
        return Ok(KernelValue {
            value: 0.0,
            tail: 0.0,
            imprecise: false,
        });
    }
    let x_max = KERNEL_X_MAX;
    let mut breaks = vec![0.0];
    let mut g = 0.01;
    while g < x_max {
        breaks.push(g);
        g *= 2.0;
    }
    let period = PI / d;
    let count = (x_max / period).floor() as usize;
    breaks.extend((1..=count).map(|j| j as f64 * period));
    breaks.push(x_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    let (gx, gw) = gauss_legendre(12);
    let integrand = |x: f64| {
        let sn = (0.5 * x * d).sin();
        4.0 * sn * sn * (1.0 + x).powf(-2.0 * s)
    };
    let half = crate::par::sum_indexed(breaks.len() - 1, |i| {
        let (a, b) = (breaks[i], breaks[i + 1]);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter()
            .zip(&gw)
            .map(|(t, w)| w * h * integrand(m + h * t))
            .sum::<f64>()
    });
    let tail = 4.0 * (1.0 + x_max).powf(1.0 - 2.0 * s) / (2.0 * s - 1.0);
    let value = 2.0 * half + tail;
    Ok(KernelValue {
        value,
        tail,
        imprecise: tail > 1e-3 * value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub delta: f64,
    pub k: f64,
    pub tail: f64,
    pub imprecise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub s: f64,
    pub rho0: f64,
    pub records: Vec<KernelRecord>,
    pub fit: ExponentFit,
    /// min(2s-1, 2), the power of δ predicted away from s = 3/2.
    pub expected_slope: f64,
    /// max/min over δ of K/(δ²(1+|ln δ|)); meaningful at s = 3/2.
    pub log_band_ratio: f64,
}

/// K_s(ρ0, ρ0+δ) over a δ list, with the power-law fit and the logarithmic band.
pub fn kernel_study(s: f64, rho0: f64, deltas: &[f64]) -> Result<KernelReport> {
    if deltas.len() < 2 {
        return config_err("deltas", "need at least two offsets");
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return config_err("deltas", format!("offsets must be positive, got {d}"));
    }
    let records = deltas
        .iter()
        .map(|&delta| {
            kernel_bound_k(s, rho0, rho0 + delta).map(|kv| KernelRecord {
                delta,
                k: kv.value,
                tail: kv.tail,
                imprecise: kv.imprecise,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<f64> = records.iter().map(|r| r.k).collect();
    let fit = ExponentFit::fit(deltas, &ks)?;
    let band: Vec<f64> = records
        .iter()
        .map(|r| r.k / (r.delta * r.delta * (1.0 + r.delta.ln().abs())))
        .collect();
    let hi = band.iter().cloned().fold(f64::MIN, f64::max);
    let lo = band.iter().cloned().fold(f64::MAX, f64::min);
    Ok(KernelReport {
        s,
        rho0,
        records,
        fit,
        expected_slope: (2.0 * s - 1.0).min(2.0),
        log_band_ratio: hi / lo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRecord {
    pub member: String,
    pub delta: f64,
    pub difference_norm: f64,
    pub sobolev_norm: f64,
    pub ratio: f64,
    /// C_emp·δ^{s-1/2}
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub s: f64,
    pub rho0: f64,
    pub c_emp: f64,
    pub records: Vec<HolderRecord>,
    pub violations: usize,
    /// Slope of the near-extremal diagonal: f_δ paired with its own δ.
    pub fit: ExponentFit,
    pub expected_slope: f64,
}

/// Slack allowed above the empirical constant.
pub const HOLDER_SLACK: f64 = 1.05;

/// Envelope exponent of the oscillatory family cos(|x|/δ)·e^{-a|x|²}.
pub const HOLDER_ENVELOPE: f64 = 0.5;

/// ‖(T(ρ0) - T(ρ0+δ))f‖_{L²(S)} / ‖f‖_{W^s_2} for the oscillatory family
/// f_δ (one member per δ) plus the supplied smooth functions, every member
/// tested at every δ. C_emp is the family maximum of ratio/δ^{s-1/2} at the
/// first (largest) δ; a record violates the bound when it exceeds
/// [`HOLDER_SLACK`]·C_emp·δ^{s-1/2}.
pub fn holder_experiment(
    profile: &BoundaryProfile,
    q: &SphereQuadrature,
    s: f64,
    rho0: f64,
    deltas: &[f64],
    smooth: &[TestFunction],
) -> Result<HolderReport> {
    if !(s > 0.5 && s < 1.5) {
        return config_err("s", format!("the Hölder regime needs 1/2 < s < 3/2, got {s}"));
    }
    if deltas.len() < 2 {
        return config_err("deltas", "need at least two offsets");
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return config_err("deltas", format!("offsets must be positive, got {d}"));
    }
    let dim = profile.dim();
    let mut members: Vec<(String, TestFunction)> = deltas
        .iter()
        .map(|&d| {
            TestFunction::new(
                dim,
                FunctionSpec::Oscillatory {
                    kappa: 1.0 / d,
                    a: HOLDER_ENVELOPE,
                },
            )
            .map(|f| (format!("osc[1/{d}]"), f))
        })
        .collect::<Result<_>>()?;
    members.extend(
        smooth
            .iter()
            .enumerate()
            .map(|(i, f)| (format!("{}#{i}", f.spec().kind_name()), f.clone())),
    );

    let expo = s - 0.5;
    let mut raw = Vec::new();
    for (name, f) in &members {
        let sobolev_norm = sobolev_norm_rn(f, s, q)?;
        let base = sample(profile, rho0, q, f)?;
        for &delta in deltas {
            let shifted = sample(profile, rho0 + delta, q, f)?;
            let diff: Vec<f64> = base.iter().zip(&shifted).map(|(a, b)| a - b).collect();
            let difference_norm = lp_of(q, &diff, 2.0)?;
            raw.push((name.clone(), delta, difference_norm, sobolev_norm));
        }
    }
    let d0 = deltas[0];
    let c_emp = raw
        .iter()
        .filter(|r| r.1 == d0)
        .map(|r| r.2 / r.3 / d0.powf(expo))
        .fold(0.0, f64::max);
    let records: Vec<HolderRecord> = raw
        .into_iter()
        .map(|(member, delta, difference_norm, sobolev_norm)| {
            let ratio = difference_norm / sobolev_norm;
            let bound = c_emp * delta.powf(expo);
            HolderRecord {
                member,
                delta,
                difference_norm,
                sobolev_norm,
                ratio,
                bound,
                violated: ratio > HOLDER_SLACK * bound,
            }
        })
        .collect();
    let violations = records.iter().filter(|r| r.violated).count();
    let diag: Vec<f64> = deltas
        .iter()
        .enumerate()
        .map(|(i, _)| records[i * deltas.len() + i].ratio)
        .collect();
    let fit = ExponentFit::fit(deltas, &diag)?;
    Ok(HolderReport {
        s,
        rho0,
        c_emp,
        records,
        violations,
        fit,
        expected_slope: expo,
    })
}

/// δ_k = 2^{-k} for k in `ks`.
pub fn dyadic(ks: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    ks.map(|k| 2f64.powi(-k)).collect()
}
