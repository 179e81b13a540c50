//! Command-line front end: lattice validation, quotient zeta data, local
//! factors, Euler assembly, extension comparison, polyhedral domains, and
//! Denef evaluation.  Exit codes: 0 success, 2 validation failure, 3 size
//! bound refusal, 4 oracle mismatch.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::json;

use crate::denef::{self, DenefData, RayData};
use crate::domain::{
    self, parse_rational, PolyhedralDomain, SparseExponentPolynomial,
};
use crate::lattice::{self, LieLattice};
use crate::orbit;
use crate::quotient::{self, Bounds, QuotientError};
use crate::ring::GaloisRing;
use crate::series::{self, Method, SeriesError, ZetaKind};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SIZE_BOUND: i32 = 3;
pub const EXIT_ORACLE_MISMATCH: i32 = 4;

#[derive(Parser)]
#[command(name = "bizeta", version, about = "Exact bivariate zeta data of unipotent group schemes")]
struct Cli {
    /// worker threads for parallel sweeps (output is independent of this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// write the JSON artifact here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Cc,
    Irr,
}

impl From<KindArg> for ZetaKind {
    fn from(k: KindArg) -> ZetaKind {
        match k {
            KindArg::Cc => ZetaKind::Cc,
            KindArg::Irr => ZetaKind::Irr,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Brute,
    Linear,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Brute => Method::Brute,
            MethodArg::Linear => Method::Linear,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Args)]
struct LatticeSource {
    /// path to a lattice JSON file
    #[arg(long, conflicts_with = "builtin")]
    lattice: Option<PathBuf>,
    /// name of a built-in lattice (heisenberg, abelian_z2, heisenberg_plus_z,
    /// free_class2_rank3, free_class3_rank2)
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a lattice and report its structural profile
    LatticeCheck {
        #[command(flatten)]
        src: LatticeSource,
    },
    /// Conjugacy-class or character-degree data of one finite quotient
    QuotientZeta {
        #[command(flatten)]
        src: LatticeSource,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: u32,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
    },
    /// Truncated bivariate local factor at one prime
    LocalFactor {
        #[command(flatten)]
        src: LatticeSource,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: u32,
        #[arg(long = "n-max", default_value_t = 1)]
        n_max: u32,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
    },
    /// Finite Euler assembly over rational primes
    Euler {
        #[command(flatten)]
        src: LatticeSource,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long = "primes-up-to")]
        primes_up_to: u64,
        #[arg(long = "n-max", default_value_t = 1)]
        n_max: u32,
        #[arg(long, value_enum, default_value = "linear")]
        method: MethodArg,
    },
    /// Fit coefficient laws in q and compare against a degree-2 extension
    CompareExtensions {
        #[command(flatten)]
        src: LatticeSource,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// comma-separated fitting primes; the last is the holdout
        #[arg(long, default_value = "3,5,7,11")]
        primes: String,
        #[arg(long = "n-max", default_value_t = 1)]
        n_max: u32,
        #[arg(long, value_enum, default_value = "linear")]
        method: MethodArg,
    },
    /// Polyhedral domain computations
    Domain {
        #[command(subcommand)]
        cmd: DomainCommand,
    },
    /// Xi evaluation and optional shape check against ray data
    Xi {
        /// path to DenefData JSON
        #[arg(long)]
        data: PathBuf,
        /// comma-separated U subset of T (may be empty)
        #[arg(long, default_value = "")]
        u: String,
        #[arg(long)]
        q: u64,
        /// comma-separated rational s-point, e.g. "3" or "2,3"
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 40)]
        depth: u32,
        /// path to RayData JSON; runs the shape check when given
        #[arg(long)]
        rays: Option<PathBuf>,
    },
    /// Character degrees of one finite quotient via Dixon's algorithm
    Dixon {
        #[command(flatten)]
        src: LatticeSource,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: u32,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
    },
}

#[derive(Subcommand)]
enum DomainCommand {
    /// W_c(delta) from a sparse exponent polynomial
    Wc {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        c: Option<i64>,
        #[arg(long, default_value = "1")]
        delta: String,
    },
    /// Remove redundant half-planes
    Canonicalize {
        #[arg(long)]
        domain: PathBuf,
    },
    /// Boundary-sharing index set R of a half-plane family
    Rset {
        #[arg(long)]
        domain: PathBuf,
    },
    /// Numerical convergence probe of the Euler product (heuristic)
    Probe {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        c: Option<i64>,
        #[arg(long)]
        sigma1: String,
        #[arg(long)]
        sigma2: String,
        #[arg(long = "prime-bound", default_value_t = 100_000)]
        prime_bound: u64,
        #[arg(long, default_value = "1/100")]
        margin: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn validation(msg: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_VALIDATION,
            message: msg.into(),
        }
    }
}

fn classify_series_error(e: &SeriesError) -> i32 {
    match e {
        SeriesError::Quotient(QuotientError::SizeBound { .. })
        | SeriesError::Orbit(orbit::OrbitError::SizeBound { .. }) => EXIT_SIZE_BOUND,
        SeriesError::OracleMismatch { .. } => EXIT_ORACLE_MISMATCH,
        _ => EXIT_VALIDATION,
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Failure {
        Failure {
            code: classify_series_error(&e),
            message: e.to_string(),
        }
    }
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Failure {
        let code = match e {
            QuotientError::SizeBound { .. } => EXIT_SIZE_BOUND,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<orbit::OrbitError> for Failure {
    fn from(e: orbit::OrbitError) -> Failure {
        let code = match e {
            orbit::OrbitError::SizeBound { .. } => EXIT_SIZE_BOUND,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<domain::DomainError> for Failure {
    fn from(e: domain::DomainError) -> Failure {
        Failure::validation(e.to_string())
    }
}

impl From<denef::DenefError> for Failure {
    fn from(e: denef::DenefError) -> Failure {
        let code = match e {
            denef::DenefError::MismatchBeyondTail(_) => EXIT_ORACLE_MISMATCH,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bounds_from_env() -> Bounds {
    let mut bounds = Bounds::default();
    if let Ok(v) = std::env::var("BIZETA_MAX_GROUP_ORDER") {
        if let Ok(n) = v.parse() {
            bounds.max_group_order = n;
        }
    }
    bounds
}

fn load_lattice(src: &LatticeSource) -> Result<LieLattice, Failure> {
    match (&src.lattice, &src.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::validation(format!("bad JSON in {}: {e}", path.display())))?;
            LieLattice::from_json(&value).map_err(Failure::validation)
        }
        (None, Some(name)) => lattice::corpus::by_name(name)
            .ok_or_else(|| Failure::validation(format!("unknown built-in lattice {name}"))),
        _ => Err(Failure::validation(
            "exactly one of --lattice and --builtin is required",
        )),
    }
}

fn load_json(path: &PathBuf) -> Result<serde_json::Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::validation(format!("bad JSON in {}: {e}", path.display())))
}

fn parse_rational_arg(s: &str, what: &str) -> Result<BigRational, Failure> {
    parse_rational(s).map_err(|e| Failure::validation(format!("bad {what}: {e}")))
}

fn parse_index_list(s: &str) -> Result<Vec<usize>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Failure::validation(format!("bad index {x}")))
        })
        .collect()
}

fn profile_of(l: &LieLattice) -> Result<lattice::LatticeProfile, Failure> {
    l.validate().map_err(|e| Failure::validation(e.to_string()))?;
    lattice::profile(l).map_err(|e| Failure::validation(e.to_string()))
}

fn counts_json(counts: &std::collections::BTreeMap<u64, u64>) -> serde_json::Value {
    json!(counts
        .iter()
        .map(|(&n, &c)| json!({"n": n, "count": c}))
        .collect::<Vec<_>>())
}

/// Runs the CLI and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // ignore failure if a pool already exists (repeat invocation in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match dispatch(&cli.command) {
        Ok(artifact) => {
            let mut doc = artifact;
            doc["schema_version"] = json!(SCHEMA_VERSION);
            let text = serde_json::to_string_pretty(&doc).expect("artifact serialization");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text + "\n") {
                        eprintln!("cannot write {}: {e}", path.display());
                        return EXIT_VALIDATION;
                    }
                }
                None => println!("{text}"),
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: &Command) -> Result<serde_json::Value, Failure> {
    let bounds = bounds_from_env();
    match cmd {
        Command::LatticeCheck { src } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            Ok(json!({
                "command": "lattice-check",
                "name": l.name,
                "rank": prof.h,
                "class": l.class_c,
                "a": prof.a,
                "b": prof.b,
                "r": prof.r,
                "z": prof.z,
                "bad_index_primes": prof.bad_index_primes,
            }))
        }
        Command::QuotientZeta {
            src,
            p,
            f,
            n,
            kind,
            method,
        } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            let ring = GaloisRing::make(*p, *n, *f)
                .map_err(|e| Failure::validation(e.to_string()))?;
            let kind: ZetaKind = (*kind).into();
            let run_brute = || -> Result<std::collections::BTreeMap<u64, u64>, Failure> {
                let g = quotient::build_group(&prof, &ring, &bounds)?;
                Ok(match kind {
                    ZetaKind::Cc => quotient::conjugacy_classes(&g).sizes,
                    ZetaKind::Irr => quotient::character_degrees(&g, &bounds)?.degrees,
                })
            };
            let run_linear = || -> Result<std::collections::BTreeMap<u64, u64>, Failure> {
                Ok(match kind {
                    ZetaKind::Cc => orbit::cc_zeta_from_a(&prof, &ring, &bounds)?.sizes,
                    ZetaKind::Irr => orbit::irr_zeta_from_b(&prof, &ring, &bounds)?.degrees,
                })
            };
            let (artifact, mismatch) = match Method::from(*method) {
                Method::Brute => {
                    let c = run_brute()?;
                    (json!({"counts": counts_json(&c), "method": "brute"}), false)
                }
                Method::Linear => {
                    let c = run_linear()?;
                    (json!({"counts": counts_json(&c), "method": "linear"}), false)
                }
                Method::Both => {
                    let b = run_brute()?;
                    let l2 = run_linear()?;
                    let mismatch = b != l2;
                    let mut diff = Vec::new();
                    if mismatch {
                        let keys: std::collections::BTreeSet<u64> =
                            b.keys().chain(l2.keys()).copied().collect();
                        for k in keys {
                            let (vb, vl) = (b.get(&k).copied(), l2.get(&k).copied());
                            if vb != vl {
                                diff.push(json!({"n": k, "brute": vb, "linear": vl}));
                            }
                        }
                    }
                    (
                        json!({
                            "counts": counts_json(&b),
                            "method": "both",
                            "routes_agree": !mismatch,
                            "diff": diff,
                        }),
                        mismatch,
                    )
                }
            };
            let mut doc = json!({
                "command": "quotient-zeta",
                "lattice": l.name,
                "p": p,
                "f": f,
                "N": n,
                "kind": match kind { ZetaKind::Cc => "cc", ZetaKind::Irr => "irr" },
            });
            for (k, v) in artifact.as_object().unwrap() {
                doc[k] = v.clone();
            }
            if mismatch {
                let text = serde_json::to_string_pretty(&doc).expect("artifact");
                eprintln!("{text}");
                return Err(Failure {
                    code: EXIT_ORACLE_MISMATCH,
                    message: "brute and linear routes disagree; diff embedded in artifact"
                        .to_string(),
                });
            }
            Ok(doc)
        }
        Command::LocalFactor {
            src,
            p,
            f,
            n_max,
            kind,
            method,
        } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            let z = series::local_factor_truncated(
                &prof,
                *p,
                *f,
                *n_max,
                (*kind).into(),
                (*method).into(),
                &bounds,
            )?;
            eprintln!("{}", z.render());
            Ok(json!({
                "command": "local-factor",
                "lattice": l.name,
                "p": p,
                "f": f,
                "n_max": n_max,
                "series": z.to_json(),
            }))
        }
        Command::Euler {
            src,
            kind,
            primes_up_to,
            n_max,
            method,
        } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            let out = series::euler_assemble(
                &prof,
                (*kind).into(),
                *primes_up_to,
                *n_max,
                (*method).into(),
                &bounds,
            )?;
            eprintln!("{}", out.series.render());
            Ok(json!({
                "command": "euler",
                "lattice": l.name,
                "primes_up_to": primes_up_to,
                "n_max": n_max,
                "used_primes": out.used_primes,
                "skipped_primes": out.skipped.iter().map(|(p, why)| json!({
                    "p": p, "reason": why,
                })).collect::<Vec<_>>(),
                "series": out.series.to_json(),
            }))
        }
        Command::CompareExtensions {
            src,
            kind,
            primes,
            n_max,
            method,
        } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            let primes: Vec<u64> = primes
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Failure::validation(format!("bad prime {x}")))
                })
                .collect::<Result<_, _>>()?;
            let kind: ZetaKind = (*kind).into();
            let method: Method = (*method).into();
            let law = series::fit_coefficient_law(&prof, kind, &primes, *n_max, method, &bounds)?;
            // field-independence check against the quadratic extension of the
            // first fitting prime
            let p0 = primes[0];
            let q_ext = p0 * p0;
            let direct =
                series::local_factor_truncated(&prof, p0, 2, *n_max, kind, method, &bounds)?;
            let mut rows = Vec::new();
            let mut all_match = true;
            for (key, poly) in &law.laws {
                let predicted = series::eval_poly(poly, q_ext);
                let actual = direct
                    .terms
                    .get(key)
                    .cloned()
                    .unwrap_or_else(num_traits::Zero::zero);
                let matches = predicted
                    == BigRational::from_integer(num_bigint::BigInt::from(actual.clone()));
                all_match &= matches;
                rows.push(json!({
                    "j": key.0,
                    "m": key.1,
                    "law": series::render_poly(poly),
                    "predicted_at_q": predicted.to_string(),
                    "direct": actual.to_string(),
                    "match": matches,
                }));
            }
            let doc = json!({
                "command": "compare-extensions",
                "lattice": l.name,
                "q_extension": q_ext,
                "laws": law.to_json(),
                "comparison": rows,
                "all_match": all_match,
            });
            if !all_match {
                let text = serde_json::to_string_pretty(&doc).expect("artifact");
                eprintln!("{text}");
                return Err(Failure {
                    code: EXIT_ORACLE_MISMATCH,
                    message: format!(
                        "fitted laws disagree with direct GR({p0}, 2) enumeration"
                    ),
                });
            }
            Ok(doc)
        }
        Command::Domain { cmd } => run_domain(cmd),
        Command::Xi {
            data,
            u,
            q,
            s,
            depth,
            rays,
        } => {
            let value = load_json(data)?;
            let data: DenefData = serde_json::from_value(value)
                .map_err(|e| Failure::validation(format!("bad DenefData: {e}")))?;
            let u_set = parse_index_list(u)?;
            let s_point: Vec<BigRational> = s
                .split(',')
                .map(|x| parse_rational_arg(x, "s coordinate"))
                .collect::<Result<_, _>>()?;
            let xi = denef::xi_truncated(&data, &u_set, *q, &s_point, *depth)?;
            let mut doc = json!({
                "command": "xi",
                "q": q,
                "depth": depth,
                "value": xi.value.to_string(),
                "tail_bound_heuristic": xi.tail_bound,
                "terms": xi.terms,
            });
            if let Some(ray_path) = rays {
                let rays = RayData::from_json(&load_json(ray_path)?)
                    .map_err(Failure::validation)?;
                let report =
                    denef::denef_shape_check(&data, &u_set, &rays, *q, &[s_point], *depth)?;
                eprintln!("{}", report.render());
                doc["shape_check"] = json!({
                    "all_pass": report.all_pass,
                    "points": report.points.iter().map(|p| json!({
                        "s": p.s,
                        "xi_value": p.xi_value,
                        "closed_value": p.closed_value,
                        "difference_heuristic": p.difference,
                        "tail_bound_heuristic": p.tail_bound,
                        "pass": p.pass,
                        "low_power": p.low_power,
                    })).collect::<Vec<_>>(),
                });
            }
            Ok(doc)
        }
        Command::Dixon { src, p, f, n } => {
            let l = load_lattice(src)?;
            let prof = profile_of(&l)?;
            let ring = GaloisRing::make(*p, *n, *f)
                .map_err(|e| Failure::validation(e.to_string()))?;
            let g = quotient::build_group(&prof, &ring, &bounds)?;
            let dd = quotient::character_degrees(&g, &bounds)?;
            Ok(json!({
                "command": "dixon",
                "lattice": l.name,
                "p": p,
                "f": f,
                "N": n,
                "order": g.order(),
                "degrees": counts_json(&dd.degrees),
            }))
        }
    }
}

fn run_domain(cmd: &DomainCommand) -> Result<serde_json::Value, Failure> {
    match cmd {
        DomainCommand::Wc { poly, c, delta } => {
            let value = load_json(poly)?;
            let (h, c_json) =
                SparseExponentPolynomial::from_json(&value).map_err(Failure::validation)?;
            let c = c.unwrap_or(c_json);
            let delta = parse_rational_arg(delta, "delta")?;
            let d = domain::wc_domain(&h, c, &delta)?;
            Ok(json!({
                "command": "domain-wc",
                "c": c,
                "delta": delta.to_string(),
                "domain": d.to_json(),
            }))
        }
        DomainCommand::Canonicalize { domain: path } => {
            let d = PolyhedralDomain::from_json(&load_json(path)?).map_err(Failure::validation)?;
            let canon = domain::canonicalize(&d);
            Ok(json!({
                "command": "domain-canonicalize",
                "input_halfplanes": d.halfplanes.len(),
                "domain": canon.to_json(),
            }))
        }
        DomainCommand::Rset { domain: path } => {
            let d = PolyhedralDomain::from_json(&load_json(path)?).map_err(Failure::validation)?;
            let r = domain::r_set(&d.halfplanes);
            Ok(json!({
                "command": "domain-rset",
                "indices": r.indices,
                "groups": r.groups,
            }))
        }
        DomainCommand::Probe {
            poly,
            c,
            sigma1,
            sigma2,
            prime_bound,
            margin,
        } => {
            let value = load_json(poly)?;
            let (h, c_json) =
                SparseExponentPolynomial::from_json(&value).map_err(Failure::validation)?;
            let c = c.unwrap_or(c_json);
            let s1 = parse_rational_arg(sigma1, "sigma1")?;
            let s2 = parse_rational_arg(sigma2, "sigma2")?;
            let margin = parse_rational_arg(margin, "margin")?;
            let report = domain::probe_convergence(&h, c, &s1, &s2, *prime_bound, &margin)?;
            Ok(json!({
                "command": "domain-probe",
                "verdict": format!("{:?}", report.verdict),
                "min_exponent": report.min_exponent.map(|e| e.to_string()),
                "partial_sum_heuristic": report.partial_sum,
                "last_increment_heuristic": report.last_increment,
                "primes_used": report.primes_used,
                "note": "partial sums are floating point and heuristic; the verdict is exact in the exponents",
            }))
        }
    }
}
