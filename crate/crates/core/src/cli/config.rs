//! Experiment configuration: TOML files, inline overrides and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dirichlet::{Forcing, Reference, DEFAULT_TOLERANCE};
use crate::error::{config_err, Error, Result};
use crate::function_spaces::{poly_gaussian_family, FunctionSpec, TestFunction};
use crate::geometry::Dim;
use crate::sphere_quad::MIN_RESOLUTION;
use crate::star_geometry::{BoundaryProfile, ProfileSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubcommandKind {
    SphereCheck,
    TraceDomain,
    TraceRn,
    KernelBound,
    Coarea,
    Dirichlet,
}

impl SubcommandKind {
    pub const ALL: [SubcommandKind; 6] = [
        SubcommandKind::SphereCheck,
        SubcommandKind::TraceDomain,
        SubcommandKind::TraceRn,
        SubcommandKind::KernelBound,
        SubcommandKind::Coarea,
        SubcommandKind::Dirichlet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubcommandKind::SphereCheck => "sphere-check",
            SubcommandKind::TraceDomain => "trace-domain",
            SubcommandKind::TraceRn => "trace-rn",
            SubcommandKind::KernelBound => "kernel-bound",
            SubcommandKind::Coarea => "coarea",
            SubcommandKind::Dirichlet => "dirichlet",
        }
    }
}

impl fmt::Display for SubcommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a run depends on. Unset fields take per-subcommand defaults
/// (see [`ExperimentConfig::resolved`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: SubcommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<Dim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<Forcing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(subcommand: SubcommandKind) -> Self {
        ExperimentConfig {
            subcommand,
            dim: None,
            profile: None,
            functions: Vec::new(),
            resolution: None,
            seed: None,
            s: None,
            p: None,
            rho: None,
            rho0: None,
            deltas: None,
            lambda: None,
            samples: None,
            family_size: None,
            forcing: None,
            carrier: None,
            h: None,
            reference: None,
            tolerance: None,
            out_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            field: "config",
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            field: "config",
            message: e.to_string(),
        })
    }

    /// Copy with every unset field replaced by its default for the subcommand.
    /// `out_dir` is left untouched.
    pub fn resolved(&self) -> ExperimentConfig {
        use SubcommandKind::*;
        let sub = self.subcommand;
        let mut c = self.clone();
        c.dim.get_or_insert(Dim::Two);
        c.profile.get_or_insert(match sub {
            TraceDomain => ProfileSpec::Cusp {
                c0: 1.0,
                theta0: 0.0,
                alpha: 0.3,
            },
            _ => ProfileSpec::Constant { value: 1.0 },
        });
        c.seed.get_or_insert(match sub {
            TraceDomain => 7,
            _ => 1,
        });
        let dyadic = || (4..=14).map(|k| 2f64.powi(-k)).collect::<Vec<_>>();
        match sub {
            SphereCheck => {
                c.resolution.get_or_insert(64);
                c.rho.get_or_insert(vec![1.0]);
            }
            TraceDomain => {
                c.resolution.get_or_insert(256);
                c.p.get_or_insert(2.0);
                if c.functions.is_empty() {
                    c.family_size.get_or_insert(20);
                }
            }
            TraceRn => {
                c.resolution.get_or_insert(64);
                c.s.get_or_insert(1.0);
                c.rho.get_or_insert(vec![2.0, 4.0, 8.0, 16.0, 32.0]);
                c.rho0.get_or_insert(1.0);
                c.deltas.get_or_insert_with(dyadic);
            }
            KernelBound => {
                c.s.get_or_insert(1.0);
                c.rho0.get_or_insert(1.0);
                c.deltas.get_or_insert_with(dyadic);
            }
            Coarea => {
                c.resolution.get_or_insert(256);
                c.lambda.get_or_insert(vec![1.0]);
                c.samples.get_or_insert(100_000);
            }
            Dirichlet => {
                c.forcing.get_or_insert(Forcing::Field {
                    function: FunctionSpec::Constant { value: 1.0 },
                });
                c.carrier.get_or_insert(FunctionSpec::Constant { value: 0.0 });
                c.h.get_or_insert((4..=7).map(|k| 2f64.powi(-k)).collect());
                c.tolerance.get_or_insert(DEFAULT_TOLERANCE);
                if c.reference.is_none() {
                    c.reference = Some(match c.profile {
                        Some(ProfileSpec::Constant { value })
                            if c.forcing == Some(unit_forcing()) && c.carrier == Some(zero()) =>
                        {
                            Reference::DiskBessel { radius: value }
                        }
                        _ => Reference::FineGrid,
                    });
                }
            }
        }
        c
    }
}

fn unit_forcing() -> Forcing {
    Forcing::Field {
        function: FunctionSpec::Constant { value: 1.0 },
    }
}

fn zero() -> FunctionSpec {
    FunctionSpec::Constant { value: 0.0 }
}

/// A resolved, validated configuration together with the objects it names.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: ExperimentConfig,
    pub dim: Dim,
    pub profile: BoundaryProfile,
    pub functions: Vec<TestFunction>,
}

impl Settings {
    /// Checks every field that the subcommand will use. Nothing expensive runs here.
    pub fn validate(config: &ExperimentConfig) -> Result<Settings> {
        use SubcommandKind::*;
        let c = config.resolved();
        let sub = c.subcommand;
        let dim = c.dim.expect("resolved");
        let profile = BoundaryProfile::new(dim, c.profile.clone().expect("resolved"))?;
        if let Some(seed) = c.seed {
            if seed > i64::MAX as u64 {
                return config_err("seed", format!("seed must be below 2^63, got {seed}"));
            }
        }
        if let Some(r) = c.resolution {
            if r < MIN_RESOLUTION {
                return config_err("resolution", format!("need at least {MIN_RESOLUTION}, got {r}"));
            }
        }
        let mut functions = c
            .functions
            .iter()
            .map(|f| TestFunction::new(dim, f.clone()))
            .collect::<Result<Vec<_>>>()?;
        let positive_list = |field: &'static str, v: &Option<Vec<f64>>| -> Result<()> {
            match v {
                Some(list) if list.is_empty() => config_err(field, "list is empty"),
                Some(list) => match list.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                    Some(x) => config_err(field, format!("entries must be positive and finite, got {x}")),
                    None => Ok(()),
                },
                None => Ok(()),
            }
        };
        positive_list("rho", &c.rho)?;
        positive_list("deltas", &c.deltas)?;
        positive_list("lambda", &c.lambda)?;
        positive_list("h", &c.h)?;
        match sub {
            SphereCheck => {}
            TraceDomain => {
                let p = c.p.expect("resolved");
                if !(p >= 1.0) || !p.is_finite() {
                    return config_err("p", format!("Sobolev exponent must satisfy 1 ≤ p < ∞, got {p}"));
                }
                if functions.is_empty() {
                    let n = c.family_size.expect("resolved");
                    if n == 0 {
                        return config_err("family_size", "the test family is empty");
                    }
                    functions = poly_gaussian_family(dim, n, c.seed.expect("resolved"));
                }
            }
            TraceRn => {
                let s = c.s.expect("resolved");
                if !(s > 0.5 && s < 1.5) {
                    return config_err("s", format!("trace-rn needs 1/2 < s < 3/2, got {s}"));
                }
                let rhos = c.rho.as_ref().expect("resolved");
                if rhos.len() < 4 || rhos.iter().any(|r| *r < 1.0) {
                    return config_err("rho", "decay needs at least 4 scales, all ≥ 1");
                }
                if c.deltas.as_ref().expect("resolved").len() < 2 {
                    return config_err("deltas", "need at least two offsets");
                }
                if s != 1.0 && functions.iter().any(|f| !f.is_radial()) {
                    return config_err("functions", "fractional norms need radial Gaussian-family functions");
                }
            }
            KernelBound => {
                let s = c.s.expect("resolved");
                if !(s > 0.5) || !s.is_finite() {
                    return config_err("s", format!("the kernel needs s > 1/2, got {s}"));
                }
                if c.deltas.as_ref().expect("resolved").len() < 2 {
                    return config_err("deltas", "need at least two offsets");
                }
                let rho0 = c.rho0.expect("resolved");
                if !(rho0 > 0.0) {
                    return config_err("rho0", format!("must be positive, got {rho0}"));
                }
            }
            Coarea => {
                let samples = c.samples.expect("resolved");
                if samples != 0 && samples < crate::coarea::MC_MIN_SAMPLES {
                    return config_err(
                        "samples",
                        format!(
                            "use 0 to skip Monte Carlo or at least {}",
                            crate::coarea::MC_MIN_SAMPLES
                        ),
                    );
                }
                if functions.iter().any(|f| f.decay_radius(1e-8).is_none()) {
                    return config_err("functions", "full-space integrals need decaying functions");
                }
            }
            Dirichlet => {
                if dim != Dim::Two {
                    return config_err("dim", "the Dirichlet solver is planar");
                }
                if !profile.is_continuous() {
                    return config_err("profile", "the Dirichlet solver needs a continuous profile");
                }
                crate::dirichlet::DirichletProblem::new(
                    crate::star_geometry::StarDomain::new(profile.clone()),
                    c.forcing.clone().expect("resolved"),
                    c.carrier.clone().expect("resolved"),
                )?;
                let hs = c.h.as_ref().expect("resolved");
                if hs.len() < 4 {
                    return config_err("h", format!("need at least 4 grid levels, got {}", hs.len()));
                }
                if hs.windows(2).any(|w| ((2.0 * w[1]) / w[0] - 1.0).abs() > 1e-12) {
                    return config_err("h", "each level must halve the previous spacing");
                }
                if !(hs[0] < profile.c_low() / 8.0) {
                    return config_err(
                        "h",
                        format!("coarsest spacing must be below c_low/8 = {}", profile.c_low() / 8.0),
                    );
                }
                let tol = c.tolerance.expect("resolved");
                if !(tol > 0.0 && tol < 1.0) {
                    return config_err("tolerance", format!("must lie in (0, 1), got {tol}"));
                }
                if let Some(Reference::Exact { function }) = &c.reference {
                    TestFunction::new(Dim::Two, function.clone())?;
                }
            }
        }
        Ok(Settings {
            config: c,
            dim,
            profile,
            functions,
        })
    }
}

/// Parses a list of positive numbers: `1,2,4`, `2^-3`, or a dyadic range
/// `2^-4..2^-14` (both ends included, ratio 2 between entries).
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::Config {
        field: "list",
        message: msg,
    };
    if let Some((a, b)) = s.split_once("..") {
        let exponent = |t: &str| -> Result<i32> {
            let t = t.trim();
            t.strip_prefix("2^")
                .and_then(|e| e.parse::<i32>().ok())
                .ok_or_else(|| bad(format!("range ends must look like 2^k, got `{t}`")))
        };
        let (lo, hi) = (exponent(a)?, exponent(b)?);
        let step = if hi >= lo { 1 } else { -1 };
        let mut out = Vec::new();
        let mut k = lo;
        loop {
            out.push(2f64.powi(k));
            if k == hi {
                break;
            }
            k += step;
        }
        return Ok(out);
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if let Some(e) = t.strip_prefix("2^") {
                e.parse::<i32>()
                    .map(|k| 2f64.powi(k))
                    .map_err(|_| bad(format!("bad power `{t}`")))
            } else {
                t.parse::<f64>().map_err(|_| bad(format!("`{t}` is not a number")))
            }
        })
        .collect()
}

/// `zero`, `field:<function>` or `helmholtz:<function>`.
pub fn parse_forcing(s: &str) -> Result<Forcing> {
    match s.split_once(':') {
        _ if s.trim() == "zero" => Ok(Forcing::Zero),
        Some(("field", f)) => Ok(Forcing::Field {
            function: FunctionSpec::from_str(f)?,
        }),
        Some(("helmholtz", f)) => Ok(Forcing::Helmholtz {
            function: FunctionSpec::from_str(f)?,
        }),
        _ => config_err(
            "forcing",
            format!("expected zero, field:<f> or helmholtz:<f>, got `{s}`"),
        ),
    }
}

/// `fine-grid`, `disk-bessel:<R>` or `exact:<function>`.
pub fn parse_reference(s: &str) -> Result<Reference> {
    match s.split_once(':') {
        _ if s.trim() == "fine-grid" => Ok(Reference::FineGrid),
        Some(("disk-bessel", r)) => r
            .trim()
            .parse()
            .map(|radius| Reference::DiskBessel { radius })
            .map_err(|_| Error::Config {
                field: "reference",
                message: format!("bad radius `{r}`"),
            }),
        Some(("exact", f)) => Ok(Reference::Exact {
            function: FunctionSpec::from_str(f)?,
        }),
        _ => config_err(
            "reference",
            format!("expected fine-grid, disk-bessel:<R> or exact:<f>, got `{s}`"),
        ),
    }
}
