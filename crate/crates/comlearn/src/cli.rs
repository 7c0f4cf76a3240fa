//! Command-line front end.
//!
//! Subcommands: `check` (decide rationalizability under a model), `witness`
//! (construct and print a verified witness), `verify` (re-check a stored
//! witness), `discriminate` (covariate audit) and `predict` (admissible
//! next-period profiles).
//!
//! Exit codes: 0 means the test passed or the witness verified; 1 means the
//! model is refuted on this data (or the witness was rejected); 2 means an
//! input or configuration error. Runs are fully deterministic: identical
//! inputs and flags produce byte-identical output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{audit_discrimination, predict_counterfactuals, AnalysisError};
use crate::comonotone::{
    construct_comonotone_invariant, construct_comonotone_varying, verify_comonotone,
};
use crate::cycles::{find_consecutive_cycle, find_cycle};
use crate::dataset::ChoiceDataset;
use crate::permute::{
    apply_permutation, blocked_flip_combos, solve_general_preferences_binary,
    solve_general_preferences_multi,
};
use crate::rational::Rat;
use crate::report::{
    to_json_string, AssignmentReport, BlockedPairReport, CheckReport, ComonotoneWitnessFile,
    CounterfactualReportJson, CycleReport, DiscriminationReportJson, GeneralWitnessFile,
};
use crate::witness::{construct_witness, verify_witness, RationalizationWitness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser)]
#[command(
    name = "comlearn",
    version,
    about = "Rationalizability tests and witnesses for panel choice data under common learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the panel is rationalizable under a model
    Check(CheckArgs),
    /// Construct, self-verify and print a rationalization witness
    Witness(CheckArgs),
    /// Re-check a stored witness file against the panel
    Verify(VerifyArgs),
    /// Audit a binary covariate for discrimination patterns
    Discriminate(DiscriminateArgs),
    /// Enumerate admissible next-period action profiles
    Predict(PredictArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Common beliefs, two alternatives, state-matching preferences
    Baseline,
    /// Common beliefs, per-agent relabelings allowed
    General,
    /// Common beliefs, any number of ordered alternatives
    Multi,
    /// Private aligned signals, fixed state
    ComonotoneInvariant,
    /// Private aligned signals, moving state
    ComonotoneVarying,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Baseline => "baseline",
            Model::General => "general",
            Model::Multi => "multi",
            Model::ComonotoneInvariant => "comonotone-invariant",
            Model::ComonotoneVarying => "comonotone-varying",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Text,
    Json,
}

#[derive(Args)]
struct InputArgs {
    /// Input file; `-` or omitted reads standard input
    input: Option<PathBuf>,
    /// Input format; default: inferred from the extension, else CSV
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Model::Baseline)]
    model: Model,
    #[arg(long, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
    /// Attach a verified witness to the report when the check passes
    #[arg(long)]
    emit_witness: bool,
    /// Attach fully enumerated joint signal distributions (private-signal
    /// witnesses, up to 6 agents)
    #[arg(long)]
    enumerate_joint: bool,
    /// Allow weakly co-monotone experiments: quiet periods use uninformative
    /// signals instead of strict drift
    #[arg(long)]
    weak_experiments: bool,
    /// Per-agent thresholds for the private-signal models, e.g. 1/2,2/3
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<String>>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Model::Baseline)]
    model: Model,
    /// Witness file produced by `witness` or `check --emit-witness`
    #[arg(long)]
    witness: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct DiscriminateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Covariate key to partition on
    #[arg(long)]
    key: String,
    /// Covariate value of the favored group
    #[arg(long)]
    favored: String,
    #[arg(long, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fix an agent's next choice, e.g. --fix j=y (repeatable)
    #[arg(long = "fix", value_name = "AGENT=ALT")]
    fix: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

/// Entry point for the binary.
pub fn run_main() -> i32 {
    let args: Vec<OsString> = std::env::args_os().collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against explicit arguments and streams; first argument is the
/// program name.
pub fn run<W: Write, E: Write>(args: Vec<OsString>, out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_ERROR
                }
            };
        }
    };
    let result = match cli.command {
        Command::Check(args) => cmd_check(&args, false, out),
        Command::Witness(args) => cmd_check(&args, true, out),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::Discriminate(args) => cmd_discriminate(&args, out),
        Command::Predict(args) => cmd_predict(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<i32, String>;

fn load_dataset(args: &InputArgs) -> Result<ChoiceDataset, String> {
    let (content, is_json_path) = match &args.input {
        Some(path) if path != Path::new("-") => {
            let content = fs::read_to_string(path)
                .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
            let is_json = path.extension().is_some_and(|ext| ext == "json");
            (content, is_json)
        }
        _ => {
            let mut content = String::new();
            std::io::stdin()
                .read_to_string(&mut content)
                .map_err(|e| format!("cannot read standard input: {e}"))?;
            (content, false)
        }
    };
    let format = args.format.unwrap_or(if is_json_path {
        Format::Json
    } else {
        Format::Csv
    });
    match format {
        Format::Csv => ChoiceDataset::from_csv(&content).map_err(|e| e.to_string()),
        Format::Json => ChoiceDataset::from_json(&content).map_err(|e| e.to_string()),
    }
}

fn parse_cutoffs(args: &CheckArgs, data: &ChoiceDataset) -> Result<Option<Vec<Rat>>, String> {
    match &args.cutoffs {
        None => Ok(None),
        Some(raw) => {
            let cuts: Result<Vec<Rat>, _> = raw.iter().map(|s| s.parse::<Rat>()).collect();
            let cuts = cuts.map_err(|e| e.to_string())?;
            if cuts.len() != data.n_agents() {
                return Err(format!(
                    "{} cutoffs supplied for {} agents",
                    cuts.len(),
                    data.n_agents()
                ));
            }
            Ok(Some(cuts))
        }
    }
}

fn require_binary(data: &ChoiceDataset, model: Model) -> Result<(), String> {
    if data.n_alternatives() != 2 {
        return Err(format!(
            "model `{}` needs binary data; this panel has {} alternatives (try --model multi)",
            model.name(),
            data.n_alternatives()
        ));
    }
    Ok(())
}

/// Witnesses are always re-verified before they are printed.
fn verified_witness_json(
    data: &ChoiceDataset,
    witness: &RationalizationWitness,
) -> Result<serde_json::Value, String> {
    match verify_witness(data, witness) {
        Ok(v) if v.is_accepted() => {}
        Ok(v) => {
            return Err(format!(
                "internal: constructed witness failed self-check: {v:?}"
            ))
        }
        Err(e) => return Err(format!("internal: witness self-check errored: {e}")),
    }
    serde_json::to_value(witness).map_err(|e| e.to_string())
}

fn emit_check(report: &CheckReport, mode: OutputMode, out: &mut impl Write) {
    match mode {
        OutputMode::Json => {
            let _ = write!(out, "{}", to_json_string(report));
        }
        OutputMode::Text => {
            let _ = write!(out, "{}", report.render_text());
        }
    }
}

fn cmd_check(args: &CheckArgs, force_witness: bool, out: &mut impl Write) -> CmdResult {
    let data = load_dataset(&args.input)?;
    let emit = args.emit_witness || force_witness;
    let mut report = CheckReport {
        model: args.model.name().to_string(),
        rationalizable: false,
        cycle: None,
        blocked_flip_combos: None,
        assignment: None,
        witness: None,
    };

    match args.model {
        Model::Baseline | Model::Multi => {
            if args.model == Model::Baseline {
                require_binary(&data, args.model)?;
            }
            match find_cycle(&data) {
                Some(w) => {
                    report.cycle = Some(CycleReport::new(&data, &w));
                }
                None => {
                    report.rationalizable = true;
                    if emit {
                        let witness = construct_witness(&data).map_err(|e| e.to_string())?;
                        report.witness = Some(verified_witness_json(&data, &witness)?);
                    }
                }
            }
        }
        Model::General => {
            let assignment = if data.n_alternatives() == 2 {
                solve_general_preferences_binary(&data).map_err(|e| e.to_string())?
            } else {
                solve_general_preferences_multi(&data).map_err(|e| e.to_string())?
            };
            match assignment {
                Some(assignment) => {
                    report.rationalizable = true;
                    report.assignment = Some(AssignmentReport::new(&data, &assignment));
                    if emit {
                        let permuted =
                            apply_permutation(&data, &assignment).map_err(|e| e.to_string())?;
                        let witness = construct_witness(&permuted).map_err(|e| e.to_string())?;
                        verified_witness_json(&permuted, &witness)?;
                        let file = GeneralWitnessFile {
                            assignment,
                            witness,
                        };
                        report.witness =
                            Some(serde_json::to_value(&file).map_err(|e| e.to_string())?);
                    }
                }
                None => {
                    if data.n_alternatives() == 2 {
                        let blocked = blocked_flip_combos(&data).map_err(|e| e.to_string())?;
                        report.blocked_flip_combos = Some(
                            blocked
                                .iter()
                                .map(|(&(i, j), combos)| BlockedPairReport {
                                    agents: [data.agents()[i].clone(), data.agents()[j].clone()],
                                    combos: combos.iter().map(|&(a, b)| [a, b]).collect(),
                                })
                                .collect(),
                        );
                    }
                }
            }
        }
        Model::ComonotoneInvariant => {
            require_binary(&data, args.model)?;
            let cutoffs = parse_cutoffs(args, &data)?;
            match find_consecutive_cycle(&data) {
                Some(w) => {
                    report.cycle = Some(CycleReport::new(&data, &w));
                }
                None => {
                    report.rationalizable = true;
                    if emit {
                        let witness =
                            construct_comonotone_invariant(&data, cutoffs, !args.weak_experiments)
                                .map_err(|e| e.to_string())?;
                        match verify_comonotone(&data, &witness) {
                            Ok(v) if v.is_accepted() => {}
                            other => {
                                return Err(format!(
                                    "internal: constructed witness failed self-check: {other:?}"
                                ))
                            }
                        }
                        let file = ComonotoneWitnessFile::new(&data, witness, args.enumerate_joint)
                            .map_err(|e| e.to_string())?;
                        report.witness =
                            Some(serde_json::to_value(&file).map_err(|e| e.to_string())?);
                    }
                }
            }
        }
        Model::ComonotoneVarying => {
            require_binary(&data, args.model)?;
            let cutoffs = parse_cutoffs(args, &data)?;
            report.rationalizable = true;
            if emit {
                let witness =
                    construct_comonotone_varying(&data, cutoffs).map_err(|e| e.to_string())?;
                match verify_comonotone(&data, &witness) {
                    Ok(v) if v.is_accepted() => {}
                    other => {
                        return Err(format!(
                            "internal: constructed witness failed self-check: {other:?}"
                        ))
                    }
                }
                let file = ComonotoneWitnessFile::new(&data, witness, args.enumerate_joint)
                    .map_err(|e| e.to_string())?;
                report.witness = Some(serde_json::to_value(&file).map_err(|e| e.to_string())?);
            }
        }
    }

    emit_check(&report, args.output, out);
    Ok(if report.rationalizable {
        EXIT_OK
    } else {
        EXIT_REFUTED
    })
}

fn cmd_verify(args: &VerifyArgs, out: &mut impl Write) -> CmdResult {
    let data = load_dataset(&args.input)?;
    let content = fs::read_to_string(&args.witness)
        .map_err(|e| format!("cannot read `{}`: {e}", args.witness.display()))?;

    let (accepted, detail) = match args.model {
        Model::Baseline | Model::Multi => {
            if args.model == Model::Baseline {
                require_binary(&data, args.model)?;
            }
            let witness: RationalizationWitness =
                serde_json::from_str(&content).map_err(|e| e.to_string())?;
            let verdict = verify_witness(&data, &witness).map_err(|e| e.to_string())?;
            (verdict.is_accepted(), format!("{verdict:?}"))
        }
        Model::General => {
            let file: GeneralWitnessFile =
                serde_json::from_str(&content).map_err(|e| e.to_string())?;
            let permuted = apply_permutation(&data, &file.assignment).map_err(|e| e.to_string())?;
            let verdict = verify_witness(&permuted, &file.witness).map_err(|e| e.to_string())?;
            (verdict.is_accepted(), format!("{verdict:?}"))
        }
        Model::ComonotoneInvariant | Model::ComonotoneVarying => {
            require_binary(&data, args.model)?;
            // Accept both the wrapped file format and a bare witness.
            let witness = serde_json::from_str::<ComonotoneWitnessFile>(&content)
                .map(|f| f.witness)
                .or_else(|_| serde_json::from_str(&content))
                .map_err(|e: serde_json::Error| e.to_string())?;
            let verdict = verify_comonotone(&data, &witness).map_err(|e| e.to_string())?;
            (verdict.is_accepted(), format!("{verdict:?}"))
        }
    };

    match args.output {
        OutputMode::Json => {
            #[derive(serde::Serialize)]
            struct VerifyReport<'a> {
                model: &'a str,
                accepted: bool,
                detail: &'a str,
            }
            let _ = write!(
                out,
                "{}",
                to_json_string(&VerifyReport {
                    model: args.model.name(),
                    accepted,
                    detail: &detail,
                })
            );
        }
        OutputMode::Text => {
            let _ = writeln!(
                out,
                "witness {}: {detail}",
                if accepted { "accepted" } else { "rejected" }
            );
        }
    }
    Ok(if accepted { EXIT_OK } else { EXIT_REFUTED })
}

fn cmd_discriminate(args: &DiscriminateArgs, out: &mut impl Write) -> CmdResult {
    let data = load_dataset(&args.input)?;
    let report =
        audit_discrimination(&data, &args.key, &args.favored).map_err(|e| e.to_string())?;
    let json = DiscriminationReportJson::new(&data, &report);
    match args.output {
        OutputMode::Json => {
            let _ = write!(out, "{}", to_json_string(&json));
        }
        OutputMode::Text => {
            let _ = write!(out, "{}", json.render_text());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_predict(args: &PredictArgs, out: &mut impl Write) -> CmdResult {
    let data = load_dataset(&args.input)?;
    let mut fixed = BTreeMap::new();
    for raw in &args.fix {
        let (agent_label, alt_label) = raw
            .split_once('=')
            .ok_or_else(|| format!("--fix takes AGENT=ALT, got `{raw}`"))?;
        let agent = data
            .agent_index(agent_label)
            .ok_or_else(|| format!("unknown agent `{agent_label}`"))?;
        let pos = data
            .alternative_index(alt_label)
            .ok_or_else(|| format!("unknown alternative `{alt_label}`"))?;
        fixed.insert(agent, pos);
    }
    match predict_counterfactuals(&data, &fixed) {
        Ok(report) => {
            let json = CounterfactualReportJson::new(&data, &report);
            match args.output {
                OutputMode::Json => {
                    let _ = write!(out, "{}", to_json_string(&json));
                }
                OutputMode::Text => {
                    let _ = write!(out, "{}", json.render_text());
                }
            }
            Ok(EXIT_OK)
        }
        Err(AnalysisError::Cycle { witness }) => {
            let _ = writeln!(
                out,
                "no predictions: the panel itself is not rationalizable: {}",
                witness.describe(&data)
            );
            Ok(EXIT_REFUTED)
        }
        Err(e) => Err(e.to_string()),
    }
}
