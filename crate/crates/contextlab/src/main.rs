//! Command-line front end. Machine-readable JSON goes to stdout, human
//! diagnostics to stderr. Exit codes: 0 success (or expected outcome), 1
//! falsifier detected (invalid file, failed property, violation found), 2
//! search finished without its expected find, 64 usage/parse/io errors, 65
//! domain errors, 70 internal check failures.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use contextlab::deciders::{
    c_feasibility_problem, criterion_by_name, decide_c, decide_ks, ks_feasibility_problem,
    Multimaximal, SizeLimits,
};
use contextlab::format::{
    behavior_to_doc, disturbance_to_doc, load_behavior, sha256_hex, verdict_to_doc,
    write_behavior_doc,
};
use contextlab::numlab::{check_axioms, n1_anomaly, scan_equivalence, MismatchKind};
use contextlab::principles::{
    check_principle, family_of, search_counterexamples, verify_consistification_properties,
    DeciderKind, SearchConfig, TransformFamily,
};
use contextlab::transforms::{consistify, deconsistify, TransformSpec};
use contextlab::{Error, Rational, Result};

#[derive(Parser)]
#[command(
    name = "contextlab",
    version,
    about = "Exact deciders, transforms, and principle checks for finite measurement behaviors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TheoryArg {
    /// Existence of one global joint distribution.
    Ks,
    /// Existence of an incidence joint with multimaximal couplings.
    Cbd2,
}

impl From<TheoryArg> for DeciderKind {
    fn from(t: TheoryArg) -> Self {
        match t {
            TheoryArg::Ks => DeciderKind::Ks,
            TheoryArg::Cbd2 => DeciderKind::Cbd2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrincipleArg {
    Nest,
    CoarseGrain,
    PostProcess,
}

impl From<PrincipleArg> for TransformFamily {
    fn from(p: PrincipleArg) -> Self {
        match p {
            PrincipleArg::Nest => TransformFamily::Nest,
            PrincipleArg::CoarseGrain => TransformFamily::CoarseGrain,
            PrincipleArg::PostProcess => TransformFamily::PostProcess,
        }
    }
}

fn family_name(f: TransformFamily) -> &'static str {
    match f {
        TransformFamily::Nest => "nest",
        TransformFamily::CoarseGrain => "coarse-grain",
        TransformFamily::PostProcess => "post-process",
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a behavior file's distributions; report violations and
    /// disturbance status
    Validate { file: PathBuf },
    /// Decide contextuality of a behavior file
    Decide {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        file: PathBuf,
        /// Load even if weights are negative or don't sum to one
        #[arg(long)]
        no_validate: bool,
        /// Cap on joint-outcome variables in the constructed system
        #[arg(long)]
        max_vars: Option<usize>,
        /// Write the constraint system as TSV before solving
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Apply a transform spec file to a behavior file
    Transform {
        /// JSON transform spec
        #[arg(long)]
        spec: PathBuf,
        file: PathBuf,
        /// Also write the resulting behavior document here
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_validate: bool,
    },
    /// Check the incidence construction's contract on one behavior:
    /// nondisturbing output, exact round trip, verdict agreement
    VerifyConsistification {
        file: PathBuf,
        #[arg(long)]
        max_vars: Option<usize>,
    },
    /// Decide a behavior before and after one transform and classify the
    /// pair as respected or violated
    CheckPrinciple {
        #[arg(long, value_enum)]
        principle: PrincipleArg,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        theory: TheoryArg,
        file: PathBuf,
        #[arg(long)]
        max_vars: Option<usize>,
    },
    /// Scan seeded random behaviors for monotonicity violations
    Search {
        /// JSON search config
        #[arg(long)]
        config: PathBuf,
        /// Exit 0 when violations are found and 2 when none are, instead
        /// of treating a find as a falsifier
        #[arg(long)]
        expect_violations: bool,
        #[arg(long)]
        max_vars: Option<usize>,
    },
    /// Scan the arithmetic analogue of the construction
    Numlab {
        #[arg(long)]
        nmax: u64,
    },
}

fn limits_with(max_vars: Option<usize>) -> SizeLimits {
    let mut limits = SizeLimits::default();
    if let Some(v) = max_vars {
        limits.max_lp_vars = v;
    }
    limits
}

fn emit(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn read_spec(path: &PathBuf) -> Result<TransformSpec> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { file } => {
            let loaded = load_behavior::<Rational>(&file, false)?;
            let violations = loaded.behavior.validate();
            let witness = loaded.behavior.check_nondisturbance();
            emit(&json!({
                "command": "validate",
                "input_sha256": loaded.sha256,
                "valid": violations.is_empty(),
                "violations": violations
                    .iter()
                    .map(|v| json!({"context": v.context, "message": v.message}))
                    .collect::<Vec<_>>(),
                "nondisturbing": witness.is_none(),
                "disturbance": witness.as_ref().map(disturbance_to_doc),
            }));
            Ok(if violations.is_empty() { 0 } else { 1 })
        }
        Command::Decide {
            theory,
            file,
            no_validate,
            max_vars,
            dump_lp,
        } => {
            let loaded = load_behavior::<Rational>(&file, !no_validate)?;
            let limits = limits_with(max_vars);
            let b = &loaded.behavior;
            if matches!(theory, TheoryArg::Ks) {
                if let Some(w) = b.check_nondisturbance() {
                    emit(&json!({
                        "command": "decide",
                        "input_sha256": loaded.sha256,
                        "theory": "ks",
                        "error": "behavior is disturbing; the global-joint notion is undefined on it",
                        "witness": disturbance_to_doc(&w),
                    }));
                    eprintln!("decide: input is disturbing; witness on stdout");
                    return Ok(65);
                }
            }
            if let Some(path) = &dump_lp {
                let (problem, _) = match theory {
                    TheoryArg::Ks => ks_feasibility_problem(b, &limits)?,
                    TheoryArg::Cbd2 => c_feasibility_problem(b, &Multimaximal, &limits)?,
                };
                let mut fh = std::fs::File::create(path)?;
                problem.dump_tsv(&mut fh)?;
                eprintln!("wrote constraint system to {}", path.display());
            }
            let verdict = match theory {
                TheoryArg::Ks => decide_ks(b, &limits)?,
                TheoryArg::Cbd2 => decide_c(b, &Multimaximal, &limits)?,
            };
            let mut envelope =
                serde_json::to_value(verdict_to_doc(&verdict)).expect("verdict serializes");
            envelope["command"] = "decide".into();
            envelope["input_sha256"] = loaded.sha256.clone().into();
            emit(&envelope);
            Ok(0)
        }
        Command::Transform {
            spec,
            file,
            output,
            no_validate,
        } => {
            let spec = read_spec(&spec)?;
            let loaded = load_behavior::<Rational>(&file, !no_validate)?;
            let (result, tag) = match &spec {
                TransformSpec::Consistify { criterion } => {
                    let crit = criterion_by_name::<Rational>(criterion)?;
                    let (cb, tag) = consistify(&loaded.behavior, crit.as_ref())?;
                    (cb, Some(tag))
                }
                TransformSpec::Deconsistify => {
                    let tag = loaded.provenance.clone().ok_or_else(|| {
                        Error::Provenance(
                            "input document carries no provenance tag to undo".into(),
                        )
                    })?;
                    (deconsistify(&loaded.behavior, &tag)?, None)
                }
                other => (other.apply_principle(&loaded.behavior)?, None),
            };
            let mut doc = behavior_to_doc(&result);
            doc.provenance = tag;
            if let Some(out) = &output {
                write_behavior_doc(out, &doc)?;
                eprintln!("wrote {}", out.display());
            }
            emit(&json!({
                "command": "transform",
                "input_sha256": loaded.sha256,
                "transform": spec,
                "behavior": doc,
            }));
            Ok(0)
        }
        Command::VerifyConsistification { file, max_vars } => {
            let loaded = load_behavior::<Rational>(&file, true)?;
            let report =
                verify_consistification_properties(&loaded.behavior, &limits_with(max_vars))?;
            emit(&json!({
                "command": "verify-consistification",
                "input_sha256": loaded.sha256,
                "nondisturbing": report.nondisturbing,
                "round_trip": report.round_trip,
                "direct": verdict_to_doc(&report.direct),
                "through": verdict_to_doc(&report.through),
                "agree": report.agree,
                "all_hold": report.all_hold(),
            }));
            if !report.all_hold() {
                eprintln!("verify-consistification: a structural property failed; this falsifies the construction");
            }
            Ok(if report.all_hold() { 0 } else { 1 })
        }
        Command::CheckPrinciple {
            principle,
            spec,
            theory,
            file,
            max_vars,
        } => {
            let spec = read_spec(&spec)?;
            let family = family_of(&spec).ok_or_else(|| {
                Error::TransformSpec("spec is not a monotonicity-family transform".into())
            })?;
            let wanted: TransformFamily = principle.into();
            if family != wanted {
                return Err(Error::TransformSpec(format!(
                    "spec is a {} transform, but --principle asked for {}",
                    family_name(family),
                    family_name(wanted)
                )));
            }
            let loaded = load_behavior::<Rational>(&file, true)?;
            let check = check_principle(
                &loaded.behavior,
                &spec,
                theory.into(),
                &limits_with(max_vars),
            )?;
            emit(&json!({
                "command": "check-principle",
                "input_sha256": loaded.sha256,
                "principle": family_name(family),
                "theory": DeciderKind::from(theory).name(),
                "transform": spec,
                "before": verdict_to_doc(&check.before),
                "after": verdict_to_doc(&check.after),
                "status": if check.violated { "violated" } else { "respected" },
            }));
            Ok(if check.violated { 1 } else { 0 })
        }
        Command::Search {
            config,
            expect_violations,
            max_vars,
        } => {
            let bytes = std::fs::read(&config)?;
            let mut cfg: SearchConfig = serde_json::from_slice(&bytes)
                .map_err(|e| Error::Parse(format!("{}: {e}", config.display())))?;
            let sha = sha256_hex(&bytes);
            if let Ok(value) = std::env::var("CONTEXTLAB_SEED") {
                let seed: u64 = value.trim().parse().map_err(|_| {
                    Error::Parse(format!(
                        "CONTEXTLAB_SEED must be an unsigned integer, got `{value}`"
                    ))
                })?;
                eprintln!("seed overridden by CONTEXTLAB_SEED={seed}");
                cfg.seed = seed;
            }
            let report = search_counterexamples(&cfg, &limits_with(max_vars))?;
            let found = !report.violations.is_empty();
            emit(&json!({
                "command": "search",
                "input_sha256": sha,
                "report": report,
            }));
            match (found, expect_violations) {
                (true, true) => Ok(0),
                (true, false) => {
                    eprintln!(
                        "search: {} violation(s) found; falsifier detected",
                        report.violations.len()
                    );
                    Ok(1)
                }
                (false, false) => Ok(0),
                (false, true) => {
                    eprintln!(
                        "search: no violation in {} samples; widen the budget, raise the denominator, or vary the seed",
                        cfg.samples
                    );
                    Ok(2)
                }
            }
        }
        Command::Numlab { nmax } => {
            let mismatches = scan_equivalence(nmax)?;
            let axioms = check_axioms(nmax)?;
            let anomaly = n1_anomaly();
            let injectivity_holds = mismatches
                .iter()
                .all(|m| m.kind != MismatchKind::Injectivity);
            let clean = mismatches.is_empty() && axioms.axiom_counterexamples.is_empty();
            emit(&json!({
                "command": "numlab",
                "nmax": nmax,
                "equivalence_scan": {
                    "from": 2,
                    "to": nmax,
                    "mismatches": mismatches,
                    "clean": mismatches.is_empty(),
                },
                "injectivity_holds": injectivity_holds,
                "axiom": {
                    "counterexamples": axioms.axiom_counterexamples,
                    "holds": axioms.axiom_counterexamples.is_empty(),
                },
                "transported_axiom": {
                    "counterexamples": axioms.transported_counterexamples,
                    "smallest": axioms.smallest_transported,
                },
                "anomaly": anomaly,
            }));
            Ok(if clean { 0 } else { 1 })
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 64,
        Error::Internal(_) => 70,
        _ => 65,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
