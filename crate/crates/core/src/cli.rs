//! Command-line front end.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on domain errors.
//! Every report is plain text and depends only on the arguments.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    break_tie, canonical_expected_utility, incremental_evaluate_with, Alternative,
    EvaluationOptions, TerminationCriterion,
};
use crate::game::{self, GameSpec, UtilityTransform, MAX_POSITION};
use crate::plans::{truncate, Plan, TruncationReport};
use crate::rational::{format_ratio, parse_ratio, Rational};
use crate::simulation::simulate_truncated_game;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "relnet",
    version,
    about = "Relative net utility evaluation of doubling coin-toss games and additive-utility plans"
)]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Exact payoff table of the St. Petersburg game (probability, prize and
    /// expected payoff per position, optionally with the fold row).
    Table(TableArgs),
    /// Incremental net utility evaluation with a dynamic reference point.
    Evaluate(EvaluateArgs),
    /// Theorem of Indifference: cut a plan to its shortest most valuable prefix.
    Truncate(TruncateArgs),
    /// Resource-preserving tie-break among alternatives of equal utility.
    Tiebreak(TiebreakArgs),
    /// Partial sums of the expected utility under a concave prize transform.
    Transform(TransformArgs),
    /// Seeded Monte Carlo play of the game capped at a number of tosses.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Number of played positions.
    #[arg(long)]
    pub n: u32,
    /// Prefix the table with the fold (stay out) row.
    #[arg(long)]
    pub fold: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Stop after this many consecutive non-improving positions (default 3).
    #[arg(long, conflicts_with_all = ["horizon", "eval_budget"])]
    pub patience: Option<u32>,
    /// Stop after evaluating this position.
    #[arg(long, conflicts_with = "eval_budget")]
    pub horizon: Option<u32>,
    /// Stop before cumulative evaluation time (one toss duration per step)
    /// would exceed this cap.
    #[arg(long = "eval-budget", value_parser = parse_rational_arg)]
    pub eval_budget: Option<BigRational>,
    /// Buy-in cost.
    #[arg(long, value_parser = parse_rational_arg)]
    pub cost: Option<BigRational>,
    /// Player budget; defaults to the buy-in cost.
    #[arg(long, value_parser = parse_rational_arg)]
    pub budget: Option<BigRational>,
    /// Duration of a single toss.
    #[arg(long = "toss-duration", value_parser = parse_rational_arg)]
    pub toss_duration: Option<BigRational>,
    /// Largest position the evaluation may reach.
    #[arg(long = "max-position", default_value_t = MAX_POSITION)]
    pub max_position: u32,
    /// Subtract the buy-in from every played position.
    #[arg(long = "net-of-cost")]
    pub net_of_cost: bool,
}

#[derive(Debug, Args)]
pub struct TruncateArgs {
    /// TOML plan document.
    #[arg(long)]
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct TiebreakArgs {
    /// TOML document with an `alternatives` array of `{ name, utility, resources }`.
    #[arg(long)]
    pub alts: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// identity, log or sqrt.
    #[arg(long)]
    pub kind: String,
    /// Number of series terms.
    #[arg(long)]
    pub terms: u32,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "max-tosses")]
    pub max_tosses: u32,
    #[arg(long)]
    pub trials: u64,
    /// Decimal or 0x-prefixed hexadecimal.
    #[arg(long, value_parser = parse_seed)]
    pub seed: u64,
}

fn parse_rational_arg(s: &str) -> std::result::Result<BigRational, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

pub fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
struct AlternativeDocument {
    #[serde(default)]
    name: Option<String>,
    utility: Rational,
    #[serde(default)]
    resources: Vec<Rational>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AlternativesDocument {
    #[serde(default)]
    resource_names: Vec<String>,
    alternatives: Vec<AlternativeDocument>,
}

#[derive(Debug, Serialize)]
struct TiebreakReport {
    index: usize,
    name: Option<String>,
    utility: Rational,
    resources: Vec<Rational>,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

fn table(args: &TableArgs) -> Result<String> {
    let rows = game::payoff_table(args.n, args.fold)?;
    Ok(game::render_table(&rows))
}

fn evaluate(args: &EvaluateArgs) -> Result<String> {
    let cost = args.cost.clone().unwrap_or_else(BigRational::zero);
    let budget = args.budget.clone().unwrap_or_else(|| cost.clone());
    let toss = args.toss_duration.clone().unwrap_or_else(BigRational::one);
    let spec = GameSpec::new(cost, budget, toss, args.max_position)?;
    let term = match (&args.patience, &args.horizon, &args.eval_budget) {
        (_, Some(h), _) => TerminationCriterion::Horizon(*h),
        (_, _, Some(b)) => TerminationCriterion::Budget(b.clone()),
        (Some(p), _, _) => TerminationCriterion::Patience(*p),
        _ => TerminationCriterion::default(),
    };
    let opts = EvaluationOptions {
        net_of_cost: args.net_of_cost,
    };
    let eval = incremental_evaluate_with(&spec, &term, &opts, canonical_expected_utility)?;
    Ok(format!(
        "nuc_star={} ref_pos={}\n{}",
        format_ratio(&eval.nuc_star),
        eval.ref_pos,
        eval.trace.to_tsv()
    ))
}

fn truncate_cmd(args: &TruncateArgs) -> Result<String> {
    let plan = Plan::from_toml(&read(&args.plan)?)?;
    let result = truncate(&plan);
    Ok(TruncationReport::new(&plan, &result).to_toml())
}

fn tiebreak(args: &TiebreakArgs) -> Result<String> {
    let doc: AlternativesDocument =
        toml::from_str(&read(&args.alts)?).map_err(|e| Error::Document(e.to_string()))?;
    let alts: Vec<Alternative> = doc
        .alternatives
        .iter()
        .map(|a| {
            Alternative::new(
                a.utility.0.clone(),
                a.resources.iter().map(|r| r.0.clone()).collect(),
            )
        })
        .collect();
    if !doc.resource_names.is_empty() {
        if let Some(a) = alts.first() {
            if a.resources.len() != doc.resource_names.len() {
                return Err(Error::ResourceArity {
                    index: 0,
                    expected: doc.resource_names.len(),
                    found: a.resources.len(),
                });
            }
        }
    }
    let index = break_tie(&alts)?;
    let chosen = &doc.alternatives[index];
    let report = TiebreakReport {
        index,
        name: chosen.name.clone(),
        utility: chosen.utility.clone(),
        resources: chosen.resources.clone(),
    };
    Ok(toml::to_string(&report).expect("reports always serialize"))
}

fn transform(args: &TransformArgs) -> Result<String> {
    let kind: UtilityTransform = args.kind.parse()?;
    let sums = game::transformed_partial_sums(&kind, args.terms)?;
    let mut out = String::from("n\tpartial_sum\n");
    for (i, s) in sums.iter().enumerate() {
        out.push_str(&format!("{}\t{}\n", i + 1, s));
    }
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<String> {
    Ok(simulate_truncated_game(args.max_tosses, args.trials, args.seed)?.to_toml())
}

/// Runs one command and returns the report text.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Table(a) => table(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Truncate(a) => truncate_cmd(a),
        Command::Tiebreak(a) => tiebreak(a),
        Command::Transform(a) => transform(a),
        Command::Simulate(a) => simulate(a),
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// the report. Returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_DOMAIN;
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, report.as_bytes()),
        None => stdout.write_all(report.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write report: {e}");
            EXIT_DOMAIN
        }
    }
}
