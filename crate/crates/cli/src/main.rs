use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use kinks_core::checks::{run_all, SuiteSizes};
use kinks_core::families::{family_lambda, kink_theorem_check, lambda_diff_swan, DiffSwan};
use kinks_core::io::{CoverJson, FamilyJson, ProfileJson, TowerJson};
use kinks_core::profile::{build_profile, closed_disk_at, lambda_by_scan, vanishing_cycles_report};
use kinks_core::rat::{fmt_q, parse_q};
use kinks_core::swan::{lambda_closed_form, swan_at, swan_at_auto};
use kinks_core::towers::tower_disk_decision;
use kinks_core::{Error, Settings, Q};

#[derive(Parser)]
#[command(name = "kinks", version, about = "Swan conductor profiles, kinks and disk criteria for Z/p covers of p-adic disks")]
struct Cli {
    /// relative precision in π-adic digits (overrides the input file)
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// cap on e·f of automatically enlarged fields
    #[arg(long, global = true, default_value_t = 64)]
    max_extension: u32,
    /// refinement depth of the profile builder
    #[arg(long, global = true, default_value_t = 12)]
    grid_cap: u32,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Depth profile of a cover as CSV (or JSON with --json)
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// δ and ω at one radius
    SwanAt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: String,
        /// enlarge the field when e·r is not an integer
        #[arg(long)]
        auto: bool,
    },
    /// λ by the closed form and by scanning the profile
    Lambda {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Whether the preimage of D[r] is a closed disk
    DiskCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: String,
        #[arg(long)]
        assume_connected: bool,
    },
    /// Vanishing cycles per residue point at r
    VcReport {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: String,
    },
    /// Disk decision for a tower at r
    Tower {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: String,
    },
    /// Minimizer certificate for a family
    FamilyMin {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Closed)]
        mode: Mode,
    },
    /// Witness and open-disk checks for a family
    KinkTheorem {
        #[arg(long = "in")]
        input: PathBuf,
        /// extra witness as r:member
        #[arg(long = "witness")]
        witnesses: Vec<String>,
    },
    /// Randomized invariant suites
    Selfcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// acceptance-size corpora
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Closed,
    Diff,
    Swan,
}

enum Failure {
    Usage(String),
    Schema(String),
    Io(String),
    Core(Error),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::InvalidInput(_)
        | Error::AssumptionViolation(_)
        | Error::UnsupportedSlope(_)
        | Error::WitnessInvalid { .. }
        | Error::DomainMismatch
        | Error::SeriesMismatch(_)
        | Error::NonUnit
        | Error::NotAPthPower => ("schema", 2),
        Error::ExtensionRequired { .. } | Error::ExtensionCapExceeded { .. } => ("extension", 3),
        Error::PrecisionLoss(_) | Error::TailUnbounded(_) => ("precision", 4),
        Error::Inconclusive(_)
        | Error::NoConvergence(_)
        | Error::GridTooCoarse(..)
        | Error::NotADiskBelow(_)
        | Error::ConnectednessNotEstablished(_)
        | Error::InseparabilityUnverified(_) => ("inconclusive", 5),
        Error::InternalInconsistency(_) | Error::TheoremViolated { .. } => ("inconsistency", 6),
    }
}

fn variant_name(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

impl Failure {
    fn report(&self) -> (serde_json::Value, u8) {
        match self {
            Failure::Usage(m) => (json!({ "kind": "usage", "message": m }), 1),
            Failure::Schema(m) => (json!({ "kind": "schema", "message": m }), 2),
            Failure::Io(m) => (json!({ "kind": "io", "message": m }), 2),
            Failure::Checks(m) => (json!({ "kind": "inconsistency", "message": m }), 6),
            Failure::Core(e) => {
                let (kind, code) = error_kind(e);
                (json!({ "kind": kind, "error": variant_name(e), "message": e.to_string() }), code)
            }
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

fn radius(s: &str) -> Result<Q, Failure> {
    parse_q(s).map_err(|e| Failure::Usage(format!("bad radius {s:?}: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let settings = Settings { max_extension: cli.max_extension, grid_cap: cli.grid_cap };
    let prec = cli.precision;
    let text = match &cli.cmd {
        Cmd::Profile { input, json } => {
            let cover = read_json::<CoverJson>(input)?.to_cover(prec)?;
            let prof = build_profile(&cover, &settings)?;
            if *json {
                to_json(&ProfileJson::from_profile(&prof))
            } else {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in prof.csv_rows() {
                    w.serialize(row).map_err(|e| Failure::Io(e.to_string()))?;
                }
                String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?).expect("utf-8 csv")
            }
        }
        Cmd::SwanAt { input, r, auto } => {
            let cover = read_json::<CoverJson>(input)?.to_cover(prec)?;
            let r = radius(r)?;
            let v = if *auto { swan_at_auto(&cover, &r, &settings)? } else { swan_at(&cover, &r)? };
            let slopes = v.slopes().map(|(l, rr)| json!({ "left": l, "right": rr }));
            to_json(&json!({ "r": fmt_q(&r), "value": v, "slopes": slopes }))
        }
        Cmd::Lambda { input } => {
            let cover = read_json::<CoverJson>(input)?.to_cover(prec)?;
            let prof = build_profile(&cover, &settings)?;
            let scan = lambda_by_scan(&prof, cover.target_slope());
            let (closed, note) = match lambda_closed_form(&cover) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            if let Some(c) = &closed {
                if c.lambda != scan {
                    return Err(Failure::Core(Error::InternalInconsistency(format!(
                        "closed form {} and scan {} disagree",
                        fmt_q(&c.lambda),
                        fmt_q(&scan)
                    ))));
                }
            }
            to_json(&json!({ "lambda": fmt_q(&scan), "closedForm": closed, "closedFormError": note, "scan": fmt_q(&scan) }))
        }
        Cmd::DiskCheck { input, r, assume_connected } => {
            let cover = read_json::<CoverJson>(input)?.to_cover(prec)?;
            to_json(&closed_disk_at(&cover, &radius(r)?, *assume_connected, &settings)?)
        }
        Cmd::VcReport { input, r } => {
            let cover = read_json::<CoverJson>(input)?.to_cover(prec)?;
            to_json(&vanishing_cycles_report(&cover, &radius(r)?, &settings)?)
        }
        Cmd::Tower { input, r } => {
            let tower = read_json::<TowerJson>(input)?.to_tower(prec)?;
            to_json(&tower_disk_decision(&tower, &radius(r)?, &settings)?)
        }
        Cmd::FamilyMin { input, mode } => {
            let fam = read_json::<FamilyJson>(input)?.to_family(prec)?;
            let cert = match mode {
                Mode::Closed => family_lambda(&fam, &settings)?,
                Mode::Diff => lambda_diff_swan(&fam, DiffSwan::Diff, &settings)?,
                Mode::Swan => lambda_diff_swan(&fam, DiffSwan::Swan, &settings)?,
            };
            to_json(&cert)
        }
        Cmd::KinkTheorem { input, witnesses } => {
            let spec = read_json::<FamilyJson>(input)?;
            let fam = spec.to_family(prec)?;
            let mut list = spec.witness_list()?;
            for w in witnesses {
                let (r, m) = w.split_once(':').ok_or_else(|| Failure::Usage(format!("witness {w:?} is not r:member")))?;
                list.push((radius(r)?, m.to_string()));
            }
            to_json(&kink_theorem_check(&fam, &list, &settings)?)
        }
        Cmd::Selfcheck { seed, full } => {
            let sizes = if *full { SuiteSizes::full() } else { SuiteSizes::quick() };
            let sizes = SuiteSizes { precision: prec.unwrap_or(sizes.precision), ..sizes };
            let reports = run_all(*seed, &sizes, &settings)?;
            let text = to_json(&json!({ "seed": seed, "suites": reports }));
            emit(&cli.out, &text)?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(Failure::Checks(format!("failing suites: {}", failed.join(", "))));
            }
            return Ok(());
        }
    };
    emit(&cli.out, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "kind": "usage", "message": e.to_string() }));
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (v, code) = f.report();
            eprintln!("{v}");
            ExitCode::from(code)
        }
    }
}
