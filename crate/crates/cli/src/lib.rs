//! Subcommand implementations for the `nabla-radius` binary.
//!
//! Every subcommand reads a JSON descriptor, runs one analysis and produces a
//! single JSON document on standard output. Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | ok / positive evidence                               |
//! | 1    | unreadable input, schema error or bad arguments      |
//! | 2    | connection is not integrable                         |
//! | 3    | negative evidence                                    |
//! | 4    | inconclusive                                         |

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nabla_core::connection::{integrability_check, Integrability, ModuleDescriptor};
use nabla_core::curves::{curve_witness_search, generic_equality_check, specialize, SearchOptions, UnitPoint};
use nabla_core::newton::{
    dominant_term, shrink_interval, sup_norm_on_interval, unit_certificate_check, AlignedInterval,
};
use nabla_core::padic::{format_rational, parse_rational, LogRadius};
use nabla_core::radius::{intrinsic_radius, oc_ir_test, taylor_probe, RadiusOptions, TaylorStatus, VerdictKind};
use nabla_core::{corpus, ConnectionModule, Error, LaurentPoly, RadiusVector, TermRecord};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "nabla-radius/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_INTEGRABLE: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "nabla-radius",
    version,
    about = "Generic radii and overconvergence evidence for connections on p-adic polyannuli"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a descriptor's schema and integrability.
    Validate { descriptor: PathBuf },
    /// Estimate the intrinsic generic radius at a radius vector.
    Ir {
        descriptor: PathBuf,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Radius exponent per variable (ρ_i = p^{-r}); defaults to all 0.
        #[arg(long = "radius", value_name = "R")]
        radii: Vec<String>,
    },
    /// Test IR(E, 1) = 1.
    Oc {
        descriptor: PathBuf,
        #[command(flatten)]
        radius: RadiusArgs,
    },
    /// Restrict to the coordinate curve in one direction through a unit point.
    Specialize {
        descriptor: PathBuf,
        #[arg(long)]
        direction: usize,
        /// Coordinates for the other variables, in order.
        #[arg(long = "point", value_name = "C", num_args = 1.., value_delimiter = ',')]
        point: Vec<String>,
    },
    /// Search for a curve witness, or check one point with --direction/--point.
    Cutcheck {
        descriptor: PathBuf,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        direction: Option<usize>,
        #[arg(long = "point", value_name = "C", num_args = 1.., value_delimiter = ',')]
        point: Vec<String>,
        /// Radius exponent of the curve variable for the point check.
        #[arg(long = "radius", value_name = "R")]
        radius_exp: Option<String>,
        #[arg(long, default_value_t = 1000)]
        sample_range: i64,
    },
    /// Dominant term, shrunken interval and unit certificate for a one-variable polynomial.
    Techlemma {
        polynomial: PathBuf,
        /// Exponent of the inner radius α.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Exponent of the outer radius β.
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Probe the Taylor-series decay criterion.
    Taylor {
        descriptor: PathBuf,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        lambda: String,
        /// Largest multi-index size |j|.
        #[arg(long, default_value_t = 64)]
        bound: usize,
        #[arg(long, default_value = "1")]
        divergence: String,
    },
    /// Print a bundled example descriptor.
    Corpus {
        name: Option<String>,
        #[arg(long, default_value_t = 3)]
        prime: u64,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long, default_value_t = 200)]
    pub depth: usize,
    #[arg(long, default_value = "1/4")]
    pub window: String,
    #[arg(long, default_value = "1/20")]
    pub tol: String,
    #[arg(long, default_value_t = nabla_core::connection::DEFAULT_DEPTH_CAP)]
    pub depth_cap: usize,
}

impl RadiusArgs {
    fn options(&self) -> Result<RadiusOptions, Failure> {
        Ok(RadiusOptions {
            window: parse_rational(&self.window)?,
            tol: parse_rational(&self.tol)?,
            depth_cap: self.depth_cap,
        })
    }

    fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "window": self.window,
            "tol": self.tol,
            "depth_cap": self.depth_cap,
        })
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotIntegrable { .. } => EXIT_NOT_INTEGRABLE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

/// One-variable polynomial file used by `techlemma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDescriptor {
    pub prime: u64,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    pub terms: Vec<TermRecord>,
}

fn one() -> usize {
    1
}

struct Loaded {
    module: ConnectionModule,
    hash: String,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let bytes = fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| invalid(format!("schema error in {}: {e}", path.display())))
}

/// SHA-256 of the canonical descriptor serialization.
pub fn descriptor_hash(d: &ModuleDescriptor) -> String {
    let canonical = ModuleDescriptor {
        expected: None,
        ..d.clone()
    };
    let bytes = serde_json::to_vec(&canonical).expect("descriptor serializes");
    hex::encode(Sha256::digest(bytes))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let desc = read_json::<ModuleDescriptor>(path)?;
    let module = desc.to_module().map_err(|e| invalid(format!("schema error: {e}")))?;
    if module.rank() != desc.rank {
        return Err(invalid("declared rank does not match the matrices"));
    }
    let hash = descriptor_hash(&ModuleDescriptor::from_module(&module));
    Ok(Loaded { module, hash })
}

fn envelope(command: &str, loaded: Option<&Loaded>, parameters: Value, result: Value) -> Value {
    let mut doc = json!({
        "schema": SCHEMA,
        "command": command,
    });
    if let Some(l) = loaded {
        doc["descriptor_sha256"] = json!(l.hash);
        doc["label"] = json!(l.module.label());
        doc["prime"] = json!(l.module.prime());
    }
    doc["parameters"] = parameters;
    doc["result"] = result;
    doc
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn parse_radius(s: &str) -> Result<LogRadius, Failure> {
    s.parse::<LogRadius>().map_err(Failure::from)
}

fn direction_index(direction: usize, module: &ConnectionModule) -> Result<usize, Failure> {
    if direction == 0 || direction > module.nvars() {
        return Err(invalid(format!(
            "--direction must lie in 1..={}, got {direction}",
            module.nvars()
        )));
    }
    Ok(direction - 1)
}

fn verdict_code(v: VerdictKind) -> i32 {
    match v {
        VerdictKind::OverconvergentEvidence => EXIT_OK,
        VerdictKind::NotOverconvergentEvidence => EXIT_NEGATIVE,
        VerdictKind::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn execute(command: &Command) -> Result<(Value, i32), Failure> {
    match command {
        Command::Validate { descriptor } => {
            let loaded = load(descriptor)?;
            let check = integrability_check(&loaded.module);
            let (result, code) = match &check {
                Integrability::Integrable => (json!({"status": "ok", "integrable": true}), EXIT_OK),
                Integrability::Violation(c) => (
                    json!({
                        "status": "non_integrable",
                        "integrable": false,
                        "i": c.i + 1,
                        "j": c.j + 1,
                        "witness": c.witness.to_records(),
                    }),
                    EXIT_NOT_INTEGRABLE,
                ),
            };
            let params = json!({
                "n": loaded.module.n(),
                "m": loaded.module.m(),
                "rank": loaded.module.rank(),
            });
            Ok((envelope("validate", Some(&loaded), params, result), code))
        }
        Command::Ir {
            descriptor,
            radius,
            radii,
        } => {
            let loaded = load(descriptor)?;
            let opts = radius.options()?;
            let nvars = loaded.module.nvars();
            let rho = if radii.is_empty() {
                RadiusVector::ones(nvars)
            } else {
                let entries = radii.iter().map(|r| parse_radius(r)).collect::<Result<Vec<_>, _>>()?;
                RadiusVector::new(entries, loaded.module.n(), loaded.module.m())?
            };
            let report = intrinsic_radius(&loaded.module, &rho, radius.depth, &opts)?;
            let mut params = radius.to_json();
            params["radius"] = to_value(&rho);
            Ok((envelope("ir", Some(&loaded), params, to_value(&report)), EXIT_OK))
        }
        Command::Oc { descriptor, radius } => {
            let loaded = load(descriptor)?;
            let verdict = oc_ir_test(&loaded.module, radius.depth, &radius.options()?)?;
            let code = verdict_code(verdict.verdict);
            Ok((
                envelope("oc", Some(&loaded), radius.to_json(), to_value(&verdict)),
                code,
            ))
        }
        Command::Specialize {
            descriptor,
            direction,
            point,
        } => {
            let loaded = load(descriptor)?;
            let i = direction_index(*direction, &loaded.module)?;
            let c = UnitPoint::parse(point, loaded.module.prime())?;
            let curve = specialize(&loaded.module, i, &c)?;
            let params = json!({"direction": direction, "point": c.to_strings()});
            let result = json!({"module": ModuleDescriptor::from_module(&curve)});
            Ok((envelope("specialize", Some(&loaded), params, result), EXIT_OK))
        }
        Command::Cutcheck {
            descriptor,
            radius,
            trials,
            seed,
            direction,
            point,
            radius_exp,
            sample_range,
        } => {
            let loaded = load(descriptor)?;
            let point_mode = direction.is_some() || !point.is_empty();
            if point_mode {
                if trials.is_some() || seed.is_some() {
                    return Err(invalid("--trials/--seed conflict with --direction/--point"));
                }
                let Some(direction) = direction else {
                    return Err(invalid("--point requires --direction"));
                };
                if point.is_empty() {
                    return Err(invalid("--direction requires --point"));
                }
                let i = direction_index(*direction, &loaded.module)?;
                let c = UnitPoint::parse(point, loaded.module.prime())?;
                let rho = match radius_exp {
                    Some(r) => parse_radius(r)?,
                    None => LogRadius::one(),
                };
                let check = generic_equality_check(&loaded.module, i, &c, radius.depth, &rho)?;
                let code = if check.is_equal() { EXIT_OK } else { EXIT_NEGATIVE };
                let params = json!({
                    "depth": radius.depth,
                    "direction": direction,
                    "point": c.to_strings(),
                    "radius": rho,
                });
                Ok((envelope("cutcheck", Some(&loaded), params, to_value(&check)), code))
            } else {
                if radius_exp.is_some() {
                    return Err(invalid("--radius applies only with --direction/--point"));
                }
                let trials = trials.unwrap_or(10);
                let seed = seed.unwrap_or(0);
                let opts = SearchOptions {
                    radius: radius.options()?,
                    sample_range: *sample_range,
                };
                let search = curve_witness_search(&loaded.module, radius.depth, trials, seed, &opts)?;
                let code = match (&search.witness, search.full_verdict) {
                    (Some(_), _) => EXIT_OK,
                    (None, VerdictKind::OverconvergentEvidence) => EXIT_OK,
                    (None, _) => EXIT_INCONCLUSIVE,
                };
                let mut params = radius.to_json();
                params["trials"] = json!(trials);
                params["seed"] = json!(seed);
                params["sample_range"] = json!(sample_range);
                Ok((envelope("cutcheck", Some(&loaded), params, to_value(&search)), code))
            }
        }
        Command::Techlemma {
            polynomial,
            alpha,
            beta,
            samples,
        } => {
            let desc = read_json::<PolyDescriptor>(polynomial)?;
            if desc.n + desc.m != 1 {
                return Err(invalid("techlemma expects a one-variable polynomial"));
            }
            let a = LaurentPoly::from_records(desc.prime, desc.n, desc.m, &desc.terms)
                .map_err(|e| invalid(format!("schema error: {e}")))?;
            let interval = AlignedInterval::new(parse_rational(alpha)?, parse_rational(beta)?)?;
            let sup = sup_norm_on_interval(&a, &interval)?;
            let dom = dominant_term(&a, &interval)?;
            let cert = shrink_interval(&a, &interval)?;
            let check = unit_certificate_check(&a, &cert, *samples)?;
            let code = if check.is_ok() { EXIT_OK } else { EXIT_NEGATIVE };
            let params = json!({
                "prime": desc.prime,
                "polynomial": a.to_records(),
                "interval": interval,
                "samples": samples,
            });
            let result = json!({
                "sup_norm": sup,
                "dominance": dom,
                "certificate": cert,
                "check": check,
            });
            Ok((envelope("techlemma", None, params, result), code))
        }
        Command::Taylor {
            descriptor,
            eta,
            lambda,
            bound,
            divergence,
        } => {
            let loaded = load(descriptor)?;
            let eta = parse_radius(eta)?;
            let lambda = parse_radius(lambda)?;
            let divergence: BigRational = parse_rational(divergence)?;
            let report = taylor_probe(&loaded.module, &eta, &lambda, *bound, &divergence)?;
            let code = match report.status {
                TaylorStatus::Pass => EXIT_OK,
                TaylorStatus::Fail => EXIT_NEGATIVE,
                TaylorStatus::Inconclusive => EXIT_INCONCLUSIVE,
            };
            let params = json!({
                "eta": eta,
                "lambda": lambda,
                "bound": bound,
                "divergence": format_rational(&divergence),
            });
            Ok((envelope("taylor", Some(&loaded), params, to_value(&report)), code))
        }
        Command::Corpus { name, prime, list } => {
            if *list || name.is_none() {
                return Ok((
                    json!({"schema": SCHEMA, "command": "corpus", "names": corpus::NAMES}),
                    EXIT_OK,
                ));
            }
            let name = name.as_deref().unwrap_or_default();
            let module =
                corpus::named(name, *prime)?.ok_or_else(|| invalid(format!("unknown corpus entry {name:?}")))?;
            Ok((to_value(&ModuleDescriptor::from_module(&module)), EXIT_OK))
        }
    }
}

impl From<Failure> for Outcome {
    fn from(f: Failure) -> Self {
        let doc = json!({
            "schema": SCHEMA,
            "error": f.message,
            "exit_code": f.code,
        });
        Outcome {
            stdout: String::new(),
            stderr: format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            code: f.code,
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok((doc, code)) => Outcome {
            stdout: format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            stderr: String::new(),
            code,
        },
        Err(f) => f.into(),
    }
}
