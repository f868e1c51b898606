//! Acceptance criteria 1–10, run in order. Each criterion prints one
//! PASS/FAIL line with its runtime; the test fails if any criterion does.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use startrace::coarea::{classical_crosscheck_2d, coarea_report, integral_full_space, level_grid_for, LevelFunction};
use startrace::dirichlet::{convergence_study, dyadic_spacings, solve_lifted, DirichletProblem, Forcing, Reference};
use startrace::function_spaces::{apply_u, l2_norm_radial, rho_grid_for, FunctionSpec, TestFunction};
use startrace::special::bessel_i0;
use startrace::star_geometry::{BoundaryProfile, StarDomain, StarSurface};
use startrace::trace_ops::{decay_experiment, dyadic, holder_experiment, kernel_study, trace_constant_experiment};
use startrace::Dim;

type Checks = Vec<(String, bool)>;

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Option<Duration>,
    run: fn() -> Checks,
}

fn check(out: &mut Checks, name: impl Into<String>, ok: bool) {
    out.push((name.into(), ok));
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn profile(dim: Dim, s: &str) -> BoundaryProfile {
    BoundaryProfile::new(dim, s.parse().unwrap()).unwrap()
}

fn kinds(dim: Dim) -> Vec<BoundaryProfile> {
    [
        "constant:1",
        "trig:1,0.3,0.1",
        "lipschitz:1,1.4,0.8,1.2,0.9",
        "cusp:1,0,0.3",
        "piecewise:8,42,0.5,2",
    ]
    .iter()
    .map(|s| profile(dim, s))
    .collect()
}

fn c1() -> Checks {
    let mut out = Vec::new();
    for dim in [Dim::Two, Dim::Three] {
        for p in kinds(dim) {
            let q = p.quadrature(64).unwrap();
            let s = StarSurface::new(p.clone(), 1.0).unwrap();
            let m = s.integrate(&q, |_| 1.0).unwrap();
            let err = (m - dim.sphere_area()).abs();
            check(
                &mut out,
                format!("n={} {} |m-area|={err:.2e}", dim.n(), p.spec()),
                err <= 1e-12,
            );
        }
    }
    out
}

fn c2() -> Checks {
    let mut out = Vec::new();
    let g = TestFunction::gaussian(Dim::Two, 1.0).unwrap();
    let l2 = l2_norm_radial(&g).unwrap();
    for (spec, tol) in [
        ("constant:1", 1e-8),
        ("trig:1,0.3,0", 1e-6),
        ("piecewise:8,42,0.5,2", 1e-6),
    ] {
        let p = profile(Dim::Two, spec);
        let q = p.quadrature(256).unwrap();
        let unit = StarSurface::unit(p.clone());
        let u = apply_u(&unit, &g, &rho_grid_for(&g, &unit, 1.0).unwrap(), &q).unwrap();
        let e = rel(u.norm, l2);
        check(&mut out, format!("{spec} rel={e:.2e}"), e <= tol);
    }
    out
}

fn c3() -> Checks {
    let p = profile(Dim::Two, "cusp:1,0,0.3");
    let family = startrace::function_spaces::poly_gaussian_family(Dim::Two, 20, 7);
    let r = trace_constant_experiment(&StarDomain::new(p), 256, &family, 2.0).unwrap();
    vec![(
        format!(
            "max ratio {:.6} -> {:.6}, relative change {:.2e}",
            r.max_ratio, r.refined_max_ratio, r.refinement_delta
        ),
        r.refinement_delta < 0.01 && r.skipped.is_empty(),
    )]
}

fn c4() -> Checks {
    let mut out = Vec::new();
    for dim in [Dim::Two, Dim::Three] {
        // the shell family is near-extremal only when it is centred on the surface
        let p = BoundaryProfile::constant(dim, 1.0).unwrap();
        let q = p.quadrature(64).unwrap();
        let r = decay_experiment(&p, &q, &[2.0, 4.0, 8.0, 16.0, 32.0], 1.0).unwrap();
        let target = -(dim.nf() - 1.0) / 2.0;
        check(
            &mut out,
            format!("n={} slope {:.4} vs {target}", dim.n(), r.fit.slope),
            (r.fit.slope - target).abs() <= 0.1,
        );
    }
    out
}

fn c5() -> Checks {
    let mut out = Vec::new();
    let deltas = dyadic(4..=14);
    for (s, target) in [(1.0, 1.0), (2.0, 2.0)] {
        let r = kernel_study(s, 1.0, &deltas).unwrap();
        check(
            &mut out,
            format!("s={s} slope {:.4}", r.fit.slope),
            (r.fit.slope - target).abs() <= 0.1,
        );
    }
    let r = kernel_study(1.5, 1.0, &deltas).unwrap();
    check(
        &mut out,
        format!("s=1.5 band ratio {:.4}", r.log_band_ratio),
        r.log_band_ratio < 3.0,
    );
    out
}

fn c6() -> Checks {
    let p = BoundaryProfile::constant(Dim::Two, 1.0).unwrap();
    let q = p.quadrature(256).unwrap();
    let smooth: Vec<TestFunction> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&a| TestFunction::gaussian(Dim::Two, a).unwrap())
        .collect();
    let r = holder_experiment(&p, &q, 1.0, 1.0, &dyadic(4..=14), &smooth).unwrap();
    vec![(
        format!(
            "C_emp {:.4}, {} violations over {} records",
            r.c_emp,
            r.violations,
            r.records.len()
        ),
        r.violations == 0,
    )]
}

fn c7() -> Checks {
    let mut out = Vec::new();
    let closed = [
        (profile(Dim::Two, "constant:1"), PI),
        (profile(Dim::Two, "values:1,2"), 2.5 * PI),
    ];
    let lambdas = [0.5, 1.0, 2.0];
    for (i, (p, v1)) in closed.iter().enumerate() {
        let level = LevelFunction::new(p.clone());
        let q = p.quadrature(256).unwrap();
        let r = coarea_report(&level, &q, &lambdas, Some((1_000_000, 11 + i as u64))).unwrap();
        for rec in &r.records {
            let l = rec.lambda;
            let exact = v1 * l * l;
            check(
                &mut out,
                format!("{} V({l}) closed form", p.spec()),
                rel(rec.volume, exact) <= 1e-12,
            );
            check(
                &mut out,
                format!("{} dV({l}) = nV/λ", p.spec()),
                rel(rec.dv_formula, 2.0 * rec.volume / l) <= 1e-12,
            );
            let mc = rec.mc_volume.unwrap();
            check(
                &mut out,
                format!(
                    "{} MC({l}) within 3σ ({:.2}σ)",
                    p.spec(),
                    (mc.estimate - rec.volume).abs() / mc.std_error
                ),
                (mc.estimate - rec.volume).abs() <= 3.0 * mc.std_error,
            );
        }
    }
    for dim in [Dim::Two, Dim::Three] {
        let g = TestFunction::gaussian(dim, 1.0).unwrap();
        let exact = PI.powf(dim.nf() / 2.0);
        for p in kinds(dim) {
            let level = LevelFunction::new(p.clone());
            let q = p.quadrature(if dim == Dim::Two { 256 } else { 32 }).unwrap();
            let v = integral_full_space(&level, &q, &level_grid_for(&level, &g).unwrap(), &g).unwrap();
            let e = rel(v, exact);
            check(
                &mut out,
                format!("n={} {} ∫gaussian rel={e:.1e}", dim.n(), p.spec()),
                e <= 1e-6,
            );
        }
    }
    out
}

fn c8() -> Checks {
    let p = profile(Dim::Two, "trig:1,0.3,0");
    let mut out = Vec::new();
    for rho in [0.5, 1.0, 2.0] {
        let x = classical_crosscheck_2d(&p, rho, 256).unwrap();
        check(
            &mut out,
            format!("ρ={rho} max error {:.2e}", x.max_abs_error),
            x.max_abs_error <= 1e-10,
        );
    }
    out
}

fn unit_forcing() -> Forcing {
    Forcing::Field {
        function: FunctionSpec::Constant { value: 1.0 },
    }
}

fn zero() -> FunctionSpec {
    FunctionSpec::Constant { value: 0.0 }
}

fn c9() -> Checks {
    let mut out = Vec::new();

    // (a) q = e^x solves −Δq + q = 0, so the lifted unknown is identically zero
    let trig = StarDomain::new(profile(Dim::Two, "trig:1,0.3,0"));
    let carrier = FunctionSpec::ExpLinear {
        direction: vec![1.0, 0.0],
    };
    let p = DirichletProblem::new(trig, Forcing::Zero, carrier).unwrap();
    let s = solve_lifted(&p, 1.0 / 64.0, 1e-12).unwrap();
    let e = s.max_error(|x| x[0].exp());
    check(&mut out, format!("(a) manufactured max error {e:.1e}"), e <= 1e-9);

    let disk = StarDomain::new(BoundaryProfile::constant(Dim::Two, 1.0).unwrap());
    let p = DirichletProblem::new(disk, unit_forcing(), zero()).unwrap();
    let s = solve_lifted(&p, 1.0 / 256.0, 1e-10).unwrap();
    let f0 = s.value_at(0, 0).unwrap();
    let exact = 1.0 - 1.0 / bessel_i0(1.0);
    check(
        &mut out,
        format!("(b) f(0) = {f0:.6} vs {exact:.6}"),
        (f0 - exact).abs() <= 1e-3,
    );

    let r = convergence_study(
        &p,
        &dyadic_spacings(4..=8),
        &Reference::DiskBessel { radius: 1.0 },
        1e-10,
    )
    .unwrap();
    let slope = r.fit.as_ref().map_or(f64::NAN, |f| f.slope);
    check(
        &mut out,
        format!("(c) slope {slope:.3} over {} halvings", r.levels.len() - 1),
        slope >= 1.5,
    );

    let cusp = StarDomain::new(profile(Dim::Two, "cusp:1,0,0.5"));
    let p = DirichletProblem::new(cusp, unit_forcing(), zero()).unwrap();
    let r = convergence_study(&p, &dyadic_spacings(4..=7), &Reference::FineGrid, 1e-10).unwrap();
    let errs: Vec<String> = r.levels.iter().map(|l| format!("{:.1e}", l.max_error)).collect();
    check(&mut out, format!("(d) errors [{}]", errs.join(", ")), r.monotone);
    out
}

const SMALL_CONFIGS: &[(&str, &str)] = &[
    (
        "sphere-check",
        "subcommand = \"sphere-check\"\ndim = 3\nresolution = 16\nrho = [1.0, 2.0]\n",
    ),
    (
        "trace-domain",
        "subcommand = \"trace-domain\"\nresolution = 64\nfamily_size = 4\nseed = 3\n",
    ),
    (
        "trace-rn",
        "subcommand = \"trace-rn\"\nresolution = 32\ndeltas = [0.0625, 0.03125, 0.015625]\n",
    ),
    ("kernel-bound", "subcommand = \"kernel-bound\"\ns = 2.0\n"),
    (
        "coarea",
        "subcommand = \"coarea\"\nresolution = 64\nlambda = [1.0, 2.0]\nsamples = 20000\nseed = 5\n",
    ),
    (
        "dirichlet",
        "subcommand = \"dirichlet\"\nh = [0.0625, 0.03125, 0.015625, 0.0078125]\n",
    ),
];

fn run_cli(sub: &str, config: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_startrace"))
        .args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn c10() -> Checks {
    let mut out = Vec::new();
    let tmp = tempfile::tempdir().unwrap();
    for (sub, toml) in SMALL_CONFIGS {
        let cfg = tmp.path().join(format!("{sub}.toml"));
        std::fs::write(&cfg, toml).unwrap();
        let (a, b) = (tmp.path().join(format!("{sub}-a")), tmp.path().join(format!("{sub}-b")));
        let codes = (run_cli(sub, &cfg, &a), run_cli(sub, &cfg, &b));
        let mut names: Vec<_> = std::fs::read_dir(&a)
            .map(|d| d.map(|e| e.unwrap().file_name()).collect())
            .unwrap_or_default();
        names.sort();
        let identical = !names.is_empty()
            && names
                .iter()
                .all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok());
        check(
            &mut out,
            format!("{sub}: exit codes {codes:?}, {} files byte-identical", names.len()),
            codes.0 == codes.1 && codes.0 != 1 && identical,
        );
    }
    out
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            id: "1",
            title: "pullback-measure identity",
            budget: Some(Duration::from_secs(1)),
            run: c1,
        },
        Criterion {
            id: "2",
            title: "U unitarity",
            budget: Some(Duration::from_secs(5)),
            run: c2,
        },
        Criterion {
            id: "3",
            title: "trace inequality stability",
            budget: Some(Duration::from_secs(10)),
            run: c3,
        },
        Criterion {
            id: "4",
            title: "decay exponent",
            budget: Some(Duration::from_secs(30)),
            run: c4,
        },
        Criterion {
            id: "5",
            title: "kernel regimes",
            budget: Some(Duration::from_secs(10)),
            run: c5,
        },
        Criterion {
            id: "6",
            title: "Hölder bound",
            budget: Some(Duration::from_secs(30)),
            run: c6,
        },
        Criterion {
            id: "7",
            title: "coarea formulas",
            budget: Some(Duration::from_secs(60)),
            run: c7,
        },
        Criterion {
            id: "8",
            title: "2D classical cross-check",
            budget: Some(Duration::from_secs(1)),
            run: c8,
        },
        Criterion {
            id: "9",
            title: "Dirichlet solver",
            budget: Some(Duration::from_secs(120)),
            run: c9,
        },
        Criterion {
            id: "10",
            title: "CLI determinism",
            budget: None,
            run: c10,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let t = Instant::now();
        let checks = (c.run)();
        let elapsed = t.elapsed();
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let ok = in_budget && checks.iter().all(|(_, ok)| *ok);
        // written to the raw stdout handle so the summary survives test capture
        let mut out = std::io::stdout().lock();
        writeln!(
            out,
            "criterion {:>2} {}: {} ({:.2}s{})",
            c.id,
            c.title,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.map_or(String::new(), |b| format!(" of {}s", b.as_secs()))
        )
        .unwrap();
        for (name, ok) in &checks {
            writeln!(out, "    [{}] {name}", if *ok { "ok" } else { "FAIL" }).unwrap();
        }
        if !ok {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
