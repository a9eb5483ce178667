//! orientcalc: run formal-group-law Chern/Thom/cobordism computations from
//! the command line and verify the identity suite.
//!
//! Every command is a thin wrapper over the library; no computation happens
//! here. Exit codes: 0 success, 1 identity-verification failure, 2
//! usage/config error, 3 internal invariant breach.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use orientcalc::chern::BundleData;
use orientcalc::cobordism::{
    blowup_dropped_matrix, blowup_gysin_matrix, f_intersection_multiplicity, pn_class_det,
    pn_class_recurrence, pn_class_series, CobordismTable,
};
use orientcalc::duality::{dual_matrix, pairing_gram, CoeffMatrix};
use orientcalc::error::Error;
use orientcalc::fgl::{FglConfig, FormalGroupLaw, UnivariateSeries};
use orientcalc::projspace::{
    diagonal_class_closed, diagonal_class_direct, thom_class, CohomologyModel, ThomRoute,
};
use orientcalc::ring::{QuotientRing, RingElement, Variable};
use orientcalc::verify::{feasible_bound, run_suite};

#[derive(Parser)]
#[command(
    name = "orientcalc",
    about = "Exact formal-group-law Chern/Thom/cobordism calculus",
    version
)]
struct Cli {
    /// FGL preset (additive, multiplicative, generic, generic:<W>) or path
    /// to a JSON config file. Falls back to $ORIENTCALC_FGL, then additive.
    #[arg(long, global = true)]
    fgl: Option<String>,

    /// Override the degree bound / truncation window of the law.
    #[arg(long, global = true)]
    truncation: Option<u32>,

    /// Emit canonical JSON instead of aligned text.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,

    /// Emit aligned text (the default).
    #[arg(long, global = true)]
    text: bool,

    /// Also write the payload to a file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Formal-group-law queries.
    Fgl {
        #[command(subcommand)]
        sub: FglCommand,
    },
    /// Diagonal class of P^n in dual generators c, d.
    Diagonal {
        n: u32,
        #[arg(long, value_enum, default_value_t = DiagonalMethod::Closed)]
        method: DiagonalMethod,
    },
    /// The duality matrix M_n.
    DualMatrix { n: u32 },
    /// Cobordism classes [P^0..P^N].
    PnClass {
        n: u32,
        #[arg(long, value_enum, default_value_t = PnMethod::Recurrence)]
        method: PnMethod,
    },
    /// Thom class of a split bundle described by a JSON file.
    Thom {
        bundle_file: PathBuf,
        #[arg(long, value_enum, default_value_t = RouteArg::Relation)]
        route: RouteArg,
    },
    /// F-intersection multiplicity of ramification index r over
    /// A[nu]/(nu^k).
    Multiplicity {
        r: i64,
        #[arg(long, default_value_t = 4)]
        nilpotency: u32,
    },
    /// Blow-up matrix for a codimension-n center with trivialized normal
    /// bundle.
    BlowupMatrix { n: u32 },
    /// Poincare pairing Gram matrix of P^n.
    Pairing { n: u32 },
    /// Replay the identity suite up to size max-n.
    Verify {
        #[arg(long, default_value_t = 4)]
        max_n: u32,
    },
}

#[derive(Subcommand)]
enum FglCommand {
    /// Check the axioms; exits 1 when violations are found.
    Check,
    /// The formal inverse series m(x).
    Inverse,
    /// The n-series [n]_F.
    Nseries {
        #[arg(allow_hyphen_values = true)]
        n: i64,
    },
    /// The series omega(x) = dF/dy(x, 0).
    Omega,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagonalMethod {
    Closed,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum PnMethod {
    Recurrence,
    Series,
    Det,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Relation,
    Twist,
    Quotient,
}

/// What a command produces: printed as text or canonical JSON.
enum Payload {
    Element(RingElement),
    Series(UnivariateSeries),
    Matrix(CoeffMatrix),
    Table { config: FglConfig, table: CobordismTable },
    BlowupMatrix { matrix: CoeffMatrix, dropped_det: RingElement },
    Report { lines: Vec<String>, json: serde_json::Value },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            if cli.json {
                let payload = serde_json::json!({
                    "error": {"kind": e.kind(), "message": e.to_string()},
                });
                eprintln!("{payload}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        // impossible states: the identities guarantee these never fire
        Error::LayoutInconsistent | Error::NoSolution | Error::AmbiguousSolution => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let (config, law) = load_fgl(cli)?;

    let (payload, exit) = match &cli.command {
        Command::Fgl { sub } => match sub {
            FglCommand::Check => {
                let violations = law.check_axioms()?;
                let failed = !violations.is_empty();
                let lines = if failed {
                    violations.iter().map(|v| format!("violation: {v}")).collect()
                } else {
                    vec!["ok".to_string()]
                };
                let json = serde_json::json!({
                    "ok": !failed,
                    "violations": violations.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                });
                (
                    Payload::Report { lines, json },
                    if failed { ExitCode::from(1) } else { ExitCode::SUCCESS },
                )
            }
            FglCommand::Inverse => {
                (Payload::Series(law.formal_inverse()?), ExitCode::SUCCESS)
            }
            FglCommand::Nseries { n } => {
                (Payload::Series(law.n_series(*n)?), ExitCode::SUCCESS)
            }
            FglCommand::Omega => (Payload::Series(law.omega_series()?), ExitCode::SUCCESS),
        },
        Command::Diagonal { n, method } => {
            let (_, elem) = match method {
                DiagonalMethod::Closed => diagonal_class_closed(&law, *n)?,
                DiagonalMethod::Direct => diagonal_class_direct(&law, *n)?,
            };
            (Payload::Element(elem), ExitCode::SUCCESS)
        }
        Command::DualMatrix { n } => {
            (Payload::Matrix(dual_matrix(&law, *n)?), ExitCode::SUCCESS)
        }
        Command::PnClass { n, method } => {
            let table = match method {
                PnMethod::Recurrence => pn_class_recurrence(&law, *n)?,
                PnMethod::Series => pn_class_series(&law, *n)?,
                PnMethod::Det => pn_class_det(&law, *n)?,
            };
            (Payload::Table { config: config.clone(), table }, ExitCode::SUCCESS)
        }
        Command::Thom { bundle_file, route } => {
            let text = std::fs::read_to_string(bundle_file)
                .map_err(|e| Error::Config(format!("cannot read bundle file: {e}")))?;
            let json: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad bundle file: {e}")))?;
            let ring_json = json
                .get("ring")
                .ok_or_else(|| Error::Config("bundle file needs a `ring` field".into()))?;
            let base = QuotientRing::from_json(ring_json)?;
            let bundle = BundleData::from_json(&base, &json)?;
            let model = CohomologyModel::thom(&bundle, "xi")?;
            let route = match route {
                RouteArg::Relation => ThomRoute::Relation,
                RouteArg::Twist => ThomRoute::Twist,
                RouteArg::Quotient => ThomRoute::Quotient,
            };
            (Payload::Element(thom_class(&law, &model, route)?), ExitCode::SUCCESS)
        }
        Command::Multiplicity { r, nilpotency } => {
            let base = law
                .coeff_ring()
                .extend(vec![Variable::nilpotent("nu", 1, (*nilpotency).max(2))])?;
            let nu = base.var("nu")?;
            let rho = f_intersection_multiplicity(&law, *r, &nu)?;
            (Payload::Element(rho), ExitCode::SUCCESS)
        }
        Command::BlowupMatrix { n } => {
            let matrix = blowup_gysin_matrix(&law, *n)?;
            let dropped_det = blowup_dropped_matrix(&law, *n)?.determinant()?;
            (Payload::BlowupMatrix { matrix, dropped_det }, ExitCode::SUCCESS)
        }
        Command::Pairing { n } => {
            (Payload::Matrix(pairing_gram(&law, *n)?), ExitCode::SUCCESS)
        }
        Command::Verify { max_n } => {
            let bound = feasible_bound(&law);
            if *max_n > bound {
                return Err(Error::Config(format!(
                    "max-n {} exceeds the feasible bound {} for this law",
                    max_n, bound
                )));
            }
            let results = run_suite(&law, *max_n);
            let failed = results.iter().any(|r| !r.passed);
            let lines = results
                .iter()
                .map(|r| {
                    format!(
                        "[{}] {:<42} {:>6} ms  {}",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.name,
                        r.millis,
                        if r.passed { "" } else { r.detail.as_str() }
                    )
                })
                .collect();
            let json = serde_json::json!(results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "name": r.name,
                        "passed": r.passed,
                        "detail": r.detail,
                        "millis": r.millis,
                    })
                })
                .collect::<Vec<_>>());
            (
                Payload::Report { lines, json },
                if failed { ExitCode::from(1) } else { ExitCode::SUCCESS },
            )
        }
    };

    emit(cli, &payload)?;
    Ok(exit)
}

/// Resolve the law from --fgl, $ORIENTCALC_FGL or the additive default,
/// with --truncation overriding the degree bound.
fn load_fgl(cli: &Cli) -> Result<(FglConfig, FormalGroupLaw), Error> {
    let selector = cli
        .fgl
        .clone()
        .or_else(|| std::env::var("ORIENTCALC_FGL").ok())
        .unwrap_or_else(|| "additive".to_string());
    let d_default = cli.truncation.unwrap_or(8);
    let config = match selector.as_str() {
        "additive" => FglConfig::Additive { d: d_default },
        "multiplicative" => FglConfig::Multiplicative { d: d_default },
        "generic" => FglConfig::Log { d: d_default, log_coeffs: Vec::new() },
        other => {
            if let Some(w) = other.strip_prefix("generic:") {
                let d = w
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("bad generic window `{w}`")))?;
                FglConfig::Log { d: cli.truncation.unwrap_or(d), log_coeffs: Vec::new() }
            } else {
                let text = std::fs::read_to_string(other)
                    .map_err(|e| Error::Config(format!("cannot read fgl config: {e}")))?;
                let mut config: FglConfig = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("bad fgl config: {e}")))?;
                if let Some(w) = cli.truncation {
                    match &mut config {
                        FglConfig::Additive { d }
                        | FglConfig::Multiplicative { d }
                        | FglConfig::Log { d, .. }
                        | FglConfig::Explicit { d, .. } => *d = w,
                    }
                }
                config
            }
        }
    };
    let law = FormalGroupLaw::from_config(&config)?;
    Ok((config, law))
}

fn emit(cli: &Cli, payload: &Payload) -> Result<(), Error> {
    let rendered = if cli.json {
        let value = match payload {
            Payload::Element(e) => e.to_json(),
            Payload::Series(s) => serde_json::json!({
                "coeffs": s.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }),
            Payload::Matrix(m) => m.to_json(),
            Payload::Table { config, table } => serde_json::json!({
                "fgl": config,
                "classes": table.classes_json(),
            }),
            Payload::BlowupMatrix { matrix, dropped_det } => serde_json::json!({
                "matrix": matrix.to_json(),
                "dropped_determinant": dropped_det.to_json(),
            }),
            Payload::Report { json, .. } => json.clone(),
        };
        serde_json::to_string_pretty(&value)
            .map_err(|e| Error::Config(format!("serialization failed: {e}")))?
    } else {
        match payload {
            Payload::Element(e) => e.to_string(),
            Payload::Series(s) => s.to_string(),
            Payload::Matrix(m) => m.to_string(),
            Payload::Table { table, .. } => {
                let cells: Vec<String> =
                    table.classes.iter().map(|c| c.to_string()).collect();
                format!("[{}]", cells.join(", "))
            }
            Payload::BlowupMatrix { matrix, dropped_det } => {
                format!("{matrix}dropped-column determinant: {dropped_det}")
            }
            Payload::Report { lines, .. } => lines.join("\n"),
        }
    };
    if let Some(path) = &cli.out {
        std::fs::write(path, rendered.clone() + "\n")
            .map_err(|e| Error::Config(format!("cannot write output file: {e}")))?;
    }
    // a closed pipe downstream (e.g. `| head`) is not an error
    use std::io::Write;
    if writeln!(std::io::stdout(), "{rendered}").is_err() {
        std::process::exit(0);
    }
    Ok(())
}
