//! The pipeline behind each subcommand: run the experiment, tabulate it,
//! and declare the checks that decide the exit code.

use std::f64::consts::PI;

use crate::coarea::{classical_crosscheck_2d, coarea_report, integral_full_space, level_grid_for, LevelFunction};
use crate::dirichlet::{convergence_study, DirichletProblem, Reference};
use crate::error::Result;
use crate::function_spaces::{apply_u, l2_norm_radial, rho_grid_for, FunctionSpec, TestFunction};
use crate::geometry::Dim;
use crate::quadrature::RadialQuadrature;
use crate::star_geometry::{ProfileSpec, StarDomain, StarSurface};
use crate::trace_ops::{decay_experiment, holder_experiment, kernel_study, trace_constant_experiment};

use super::config::{Settings, SubcommandKind};
use super::report::{Cell, Check, FitSummary, RunReport};

/// An auxiliary CSV: file stem, columns, rows.
pub type Table = (String, Vec<&'static str>, Vec<Vec<Cell>>);

/// A report plus any auxiliary tables.
pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

fn blank() -> Cell {
    Cell::Text(String::new())
}

fn echo(settings: &Settings) -> serde_json::Value {
    let mut c = settings.config.clone();
    c.out_dir = None;
    serde_json::to_value(&c).expect("config serializes")
}

pub fn run(settings: &Settings) -> Result<Outcome> {
    let report = match settings.config.subcommand {
        SubcommandKind::SphereCheck => sphere_check(settings)?,
        SubcommandKind::TraceDomain => trace_domain(settings)?,
        SubcommandKind::TraceRn => trace_rn(settings)?,
        SubcommandKind::KernelBound => kernel_bound(settings)?,
        SubcommandKind::Coarea => coarea(settings)?,
        SubcommandKind::Dirichlet => return dirichlet(settings),
    };
    Ok(Outcome {
        report,
        tables: Vec::new(),
    })
}

fn sphere_check(st: &Settings) -> Result<RunReport> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &[
            "dim",
            "profile",
            "resolution",
            "rho",
            "nodes",
            "measure",
            "expected",
            "abs_error",
        ],
    );
    let res = c.resolution.expect("resolved");
    let q = st.profile.quadrature(res)?;
    let area = st.dim.sphere_area();
    for &rho in c.rho.as_ref().expect("resolved") {
        let s = StarSurface::new(st.profile.clone(), rho)?;
        let measure = s.integrate(&q, |_| 1.0)?;
        let expected = rho.powi(st.dim.n() as i32 - 1) * area;
        r.push_row(vec![
            st.dim.n().into(),
            st.profile.spec().to_string().into(),
            res.into(),
            rho.into(),
            q.len().into(),
            measure.into(),
            expected.into(),
            (measure - expected).abs().into(),
        ]);
        r.checks.push(Check::within(
            format!("pullback-measure[rho={rho}]"),
            measure,
            expected,
            1e-12 * expected.max(1.0),
        ));
    }
    Ok(r)
}

fn trace_domain(st: &Settings) -> Result<RunReport> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &["profile", "index", "f_kind", "p", "trace_norm", "sobolev_norm", "ratio"],
    );
    let p = c.p.expect("resolved");
    let domain = StarDomain::new(st.profile.clone());
    let exp = trace_constant_experiment(&domain, c.resolution.expect("resolved"), &st.functions, p)?;
    for rec in &exp.records {
        r.push_row(vec![
            st.profile.spec().to_string().into(),
            rec.index.into(),
            rec.kind.clone().into(),
            p.into(),
            rec.trace_norm.into(),
            rec.sobolev_norm.into(),
            rec.ratio.into(),
        ]);
    }
    for i in &exp.skipped {
        r.notes
            .push(format!("member {i} has zero Sobolev norm and was skipped"));
    }
    r.notes.push(format!(
        "max ratio {:?} at resolution {}, {:?} at {}",
        exp.max_ratio,
        exp.resolution,
        exp.refined_max_ratio,
        2 * exp.resolution
    ));
    r.checks
        .push(Check::at_most("max-ratio-refinement-delta", exp.refinement_delta, 0.01));
    Ok(r)
}

fn trace_rn(st: &Settings) -> Result<RunReport> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &[
            "section",
            "profile",
            "f_kind",
            "s",
            "rho",
            "delta",
            "norm",
            "sobolev_norm",
            "ratio",
        ],
    );
    let prof = st.profile.spec().to_string();
    let q = st.profile.quadrature(c.resolution.expect("resolved"))?;
    let s = c.s.expect("resolved");

    let decay = decay_experiment(&st.profile, &q, c.rho.as_ref().expect("resolved"), 1.0)?;
    for rec in &decay.records {
        r.push_row(vec![
            "decay".into(),
            prof.clone().into(),
            "shell".into(),
            1.0.into(),
            rec.rho.into(),
            blank(),
            rec.trace_norm.into(),
            rec.sobolev_norm.into(),
            rec.ratio.into(),
        ]);
    }
    r.fits.insert("decay".into(), FitSummary::from(&decay.fit));
    r.checks
        .push(Check::within("decay-slope", decay.fit.slope, decay.expected_slope, 0.1));

    let g = TestFunction::gaussian(st.dim, 0.5)?;
    let unit = StarSurface::unit(st.profile.clone());
    let u = apply_u(&unit, &g, &rho_grid_for(&g, &unit, 1.0)?, &q)?;
    let l2 = l2_norm_radial(&g)?;
    r.push_row(vec![
        "unitarity".into(),
        prof.clone().into(),
        "gaussian".into(),
        blank(),
        blank(),
        blank(),
        u.norm.into(),
        l2.into(),
        (u.norm / l2).into(),
    ]);
    r.checks.push(Check::within(
        "u-unitarity-relative-error",
        u.norm / l2 - 1.0,
        0.0,
        1e-6,
    ));

    let smooth = if st.functions.is_empty() {
        vec![g]
    } else {
        st.functions.clone()
    };
    let rho0 = c.rho0.expect("resolved");
    let holder = holder_experiment(&st.profile, &q, s, rho0, c.deltas.as_ref().expect("resolved"), &smooth)?;
    for rec in &holder.records {
        r.push_row(vec![
            "holder".into(),
            prof.clone().into(),
            rec.member.clone().into(),
            s.into(),
            rho0.into(),
            rec.delta.into(),
            rec.difference_norm.into(),
            rec.sobolev_norm.into(),
            rec.ratio.into(),
        ]);
    }
    r.fits.insert("holder".into(), FitSummary::from(&holder.fit));
    r.notes.push(format!("empirical Hölder constant {:?}", holder.c_emp));
    r.checks
        .push(Check::at_most("holder-violations", holder.violations as f64, 0.0));
    r.checks.push(Check::at_least(
        "holder-slope",
        holder.fit.slope,
        holder.expected_slope - 0.1,
    ));
    Ok(r)
}

fn kernel_bound(st: &Settings) -> Result<RunReport> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &["s", "rho0", "delta", "k", "tail", "imprecise", "k_over_delta2_log"],
    );
    let s = c.s.expect("resolved");
    let rho0 = c.rho0.expect("resolved");
    let study = kernel_study(s, rho0, c.deltas.as_ref().expect("resolved"))?;
    for rec in &study.records {
        r.push_row(vec![
            s.into(),
            rho0.into(),
            rec.delta.into(),
            rec.k.into(),
            rec.tail.into(),
            rec.imprecise.into(),
            (rec.k / (rec.delta * rec.delta * (1.0 + rec.delta.ln().abs()))).into(),
        ]);
        if rec.imprecise {
            r.notes.push(format!(
                "δ = {:?}: truncated tail is not negligible; K is imprecise",
                rec.delta
            ));
        }
    }
    r.fits.insert("kernel".into(), FitSummary::from(&study.fit));
    if s == 1.5 {
        r.checks
            .push(Check::at_most("log-band-ratio", study.log_band_ratio, 3.0));
    } else {
        r.checks.push(Check::within(
            "kernel-slope",
            study.fit.slope,
            study.expected_slope,
            0.1,
        ));
    }
    Ok(r)
}

/// ∫_{R^n} f for the radial kinds, straight from the radial profile.
fn radial_integral(f: &TestFunction) -> Option<f64> {
    if let FunctionSpec::Gaussian { a } = f.spec() {
        return Some((PI / a).powf(0.5 * f.dim().nf()));
    }
    let r_max = f.decay_radius(1e-17)?;
    f.radial_profile(0.0).ok()?;
    let rq = RadialQuadrature::composite(r_max, ((r_max / f.length_scale()).ceil() as usize).max(8), 16).ok()?;
    let n = f.dim().n() as i32;
    Some(f.dim().sphere_area() * rq.integrate(|r| f.radial_profile(r).expect("radial").0 * r.powi(n - 1)))
}

fn coarea(st: &Settings) -> Result<RunReport> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &["section", "lambda", "function", "value", "expected", "std_error"],
    );
    let level = LevelFunction::new(st.profile.clone());
    let q = st.profile.quadrature(c.resolution.expect("resolved"))?;
    let samples = c.samples.expect("resolved");
    let mc = (samples > 0).then(|| (samples, c.seed.expect("resolved")));
    let lambdas = c.lambda.as_ref().expect("resolved");
    let report = coarea_report(&level, &q, lambdas, mc)?;
    let n = st.dim.n() as i32;
    let closed = match st.profile.spec() {
        ProfileSpec::Constant { value } => Some(st.dim.ball_volume() * value.powi(n)),
        _ => None,
    };
    let v1 = report.records[0].volume / report.records[0].lambda.powi(n);
    for rec in &report.records {
        let lam = rec.lambda;
        let expected = closed.map(|v| Cell::Num(v * lam.powi(n))).unwrap_or_else(blank);
        r.push_row(vec![
            "volume".into(),
            lam.into(),
            blank(),
            rec.volume.into(),
            expected.clone(),
            blank(),
        ]);
        if let Some(v) = closed {
            r.checks.push(Check::within(
                format!("volume-closed-form[lambda={lam}]"),
                rec.volume,
                v * lam.powi(n),
                1e-12 * rec.volume.max(1.0),
            ));
        }
        r.checks.push(Check::within(
            format!("volume-homogeneity[lambda={lam}]"),
            rec.volume / lam.powi(n),
            v1,
            1e-12 * v1,
        ));
        let n_v_over_l = f64::from(n) * rec.volume / lam;
        r.push_row(vec![
            "dv-formula".into(),
            lam.into(),
            blank(),
            rec.dv_formula.into(),
            n_v_over_l.into(),
            blank(),
        ]);
        r.checks.push(Check::within(
            format!("dv-equals-nv-over-lambda[lambda={lam}]"),
            rec.dv_formula,
            n_v_over_l,
            1e-12 * rec.dv_formula.max(1.0),
        ));
        r.push_row(vec![
            "dv-finite-difference".into(),
            lam.into(),
            blank(),
            rec.dv_finite_difference.into(),
            rec.dv_formula.into(),
            blank(),
        ]);
        r.checks.push(Check::within(
            format!("dv-finite-difference[lambda={lam}]"),
            rec.dv_finite_difference,
            rec.dv_formula,
            1e-6 * rec.dv_formula.max(1.0),
        ));
        if let Some(m) = rec.mc_volume {
            r.push_row(vec![
                "mc-volume".into(),
                lam.into(),
                blank(),
                m.estimate.into(),
                rec.volume.into(),
                m.std_error.into(),
            ]);
            r.checks.push(Check::within(
                format!("mc-volume-3sigma[lambda={lam}]"),
                m.estimate,
                rec.volume,
                3.0 * m.std_error,
            ));
        }
    }

    let functions = if st.functions.is_empty() {
        vec![TestFunction::gaussian(st.dim, 1.0)?]
    } else {
        st.functions.clone()
    };
    for f in &functions {
        let rq = level_grid_for(&level, f)?;
        let v = integral_full_space(&level, &q, &rq, f)?;
        let reference = radial_integral(f);
        r.push_row(vec![
            "full-space-integral".into(),
            blank(),
            f.spec().to_string().into(),
            v.into(),
            reference.map(Cell::Num).unwrap_or_else(blank),
            blank(),
        ]);
        if let Some(exact) = reference {
            r.checks.push(Check::within(
                format!("full-space-integral[{}]", f.spec()),
                v,
                exact,
                1e-6 * exact.abs().max(1.0),
            ));
        }
    }

    if st.dim == Dim::Two
        && matches!(
            st.profile.spec(),
            ProfileSpec::SmoothTrig { .. } | ProfileSpec::Constant { .. }
        )
    {
        let x = classical_crosscheck_2d(&st.profile, 1.0, 256)?;
        r.push_row(vec![
            "crosscheck-max-error".into(),
            1.0.into(),
            blank(),
            x.max_abs_error.into(),
            0.0.into(),
            blank(),
        ]);
        r.checks
            .push(Check::at_most("classical-crosscheck", x.max_abs_error, 1e-10));
    }
    Ok(r)
}

fn dirichlet(st: &Settings) -> Result<Outcome> {
    let c = &st.config;
    let mut r = RunReport::new(
        c.subcommand.name(),
        echo(st),
        &["h", "unknowns", "iterations", "relative_residual", "max_error"],
    );
    let problem = DirichletProblem::new(
        StarDomain::new(st.profile.clone()),
        c.forcing.clone().expect("resolved"),
        c.carrier.clone().expect("resolved"),
    )?;
    let tol = c.tolerance.expect("resolved");
    let reference = c.reference.clone().expect("resolved");
    let study = convergence_study(&problem, c.h.as_ref().expect("resolved"), &reference, tol)?;
    for l in &study.levels {
        r.push_row(vec![
            l.h.into(),
            l.unknowns.into(),
            l.iterations.into(),
            l.relative_residual.into(),
            l.max_error.into(),
        ]);
        r.checks
            .push(Check::at_most(format!("residual[h={}]", l.h), l.relative_residual, tol));
    }
    if let Some(fit) = &study.fit {
        r.fits.insert("convergence".into(), FitSummary::from(fit));
    }
    let smooth = matches!(
        st.profile.spec(),
        ProfileSpec::Constant { .. } | ProfileSpec::SmoothTrig { .. }
    );
    match (&reference, smooth, &study.fit) {
        (Reference::Exact { .. } | Reference::DiskBessel { .. }, true, Some(fit)) => {
            r.checks.push(Check::at_least("convergence-slope", fit.slope, 1.5));
        }
        _ => {
            r.checks.push(Check::at_least(
                "monotone-error-decrease",
                f64::from(u8::from(study.monotone)),
                1.0,
            ));
            r.notes
                .push("no convergence order is asserted for this profile/reference".into());
        }
    }
    let slice = study
        .finest_slice
        .iter()
        .map(|&(x, f)| vec![Cell::Num(x), Cell::Num(f)])
        .collect();
    Ok(Outcome {
        report: r,
        tables: vec![("dirichlet_slice".into(), vec!["x", "f"], slice)],
    })
}
