//! JSON problem-file front end for the `seminfo` binary.
//!
//! A problem file is a single JSON object with optional sections; each
//! subcommand picks the sections it needs and rejects files that lack them:
//!
//! - `source`: `{ "symbols": [...], "probs": [...] }` — a source distribution;
//! - `partition_u`: cells of 0-based indices partitioning the source (or
//!   channel-input) alphabet;
//! - `joint`: `{ "row_symbols", "col_symbols", "probs" }` — a joint matrix;
//! - `partition_v`: cells partitioning the column (or channel-output) alphabet;
//! - `channel`: `{ "matrix" }` — row-stochastic transition matrix;
//! - `distortion`: `{ "matrix", "domain": "semantic" }` — cell-by-cell costs;
//! - `recon_partition`: cells partitioning the reconstruction alphabet.
//!
//! Commands: `measures` (joint + both partitions), `capacity` and
//! `simulate-channel` (channel + both partitions; `simulate-channel` uses
//! `source.probs` as the input distribution when present), `rd` (source +
//! `partition_u` + distortion + `recon_partition`), `aep` and
//! `simulate-source` (source + `partition_u`).
//!
//! Reports are written once, on stdout, after all computation succeeds. The
//! JSON form is canonical: keys sorted, floats fixed at six decimals, no
//! timing fields, so identical inputs and seeds give byte-identical output.
//! Exit codes: 0 success, 1 invalid input or infeasible experiment, 2 solver
//! non-convergence (the report is still emitted, flagged in diagnostics).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::ba_capacity;
use crate::codingsim::{
    simulate_channel_coding, simulate_source_coding, ChannelCodeExperiment, SourceCodeExperiment,
    SimMode,
};
use crate::measures::{chain_rule_audit, entropy, measure_report, semantic_entropy};
use crate::model::{
    Alphabet, Channel, Distribution, JointModel, SemanticVariable, SynonymousPartition,
};
use crate::semlimits::{
    rd_curve, semantic_capacity, semantic_rd, DistortionSpec, SearchConfig,
    SemanticChannelProblem, SemanticRdProblem,
};
use crate::typicality::{
    enumerate_typical, monte_carlo_aep, SequenceModel, ENUMERATION_BUDGET,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("{path}: invalid JSON: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("problem file is missing the required `{0}` section")]
    MissingSection(&'static str),
    #[error("{0}")]
    Flag(String),
    #[error("{command}: {message}")]
    Run {
        command: &'static str,
        message: String,
    },
}

fn validation(path: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Validation {
        path: path.to_string(),
        message: err.to_string(),
    }
}

fn run_error(command: &'static str, err: impl std::fmt::Display) -> CliError {
    CliError::Run {
        command,
        message: err.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub symbols: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSection {
    pub row_symbols: Vec<String>,
    pub col_symbols: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionSection {
    pub matrix: Vec<Vec<f64>>,
    pub domain: String,
}

/// A validated-on-demand problem description. Sections are optional;
/// commands require the ones they use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_u: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_v: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recon_partition: Option<Vec<Vec<usize>>>,
}

impl ProblemFile {
    pub fn from_json(bytes: &[u8]) -> Result<Self, String> {
        serde_json::from_slice(bytes).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files are serializable")
    }

    /// Source distribution under `partition_u`.
    pub fn source_variable(&self) -> Result<SemanticVariable, CliError> {
        let src = self
            .source
            .as_ref()
            .ok_or(CliError::MissingSection("source"))?;
        let cells = self
            .partition_u
            .as_ref()
            .ok_or(CliError::MissingSection("partition_u"))?;
        let alphabet =
            Alphabet::new(src.symbols.clone()).map_err(|e| validation("source.symbols", e))?;
        let dist = Distribution::new(alphabet.clone(), src.probs.clone())
            .map_err(|e| validation("source.probs", e))?;
        let part = SynonymousPartition::new(alphabet, cells.clone())
            .map_err(|e| validation("partition_u", e))?;
        SemanticVariable::new(dist, part).map_err(|e| validation("source", e))
    }

    /// Joint matrix under `partition_u` (rows) and `partition_v` (columns).
    pub fn joint_model(&self) -> Result<JointModel, CliError> {
        let joint = self.joint.as_ref().ok_or(CliError::MissingSection("joint"))?;
        let cells_u = self
            .partition_u
            .as_ref()
            .ok_or(CliError::MissingSection("partition_u"))?;
        let cells_v = self
            .partition_v
            .as_ref()
            .ok_or(CliError::MissingSection("partition_v"))?;
        let rows = Alphabet::new(joint.row_symbols.clone())
            .map_err(|e| validation("joint.row_symbols", e))?;
        let cols = Alphabet::new(joint.col_symbols.clone())
            .map_err(|e| validation("joint.col_symbols", e))?;
        let pu = SynonymousPartition::new(rows, cells_u.clone())
            .map_err(|e| validation("partition_u", e))?;
        let pv = SynonymousPartition::new(cols, cells_v.clone())
            .map_err(|e| validation("partition_v", e))?;
        JointModel::new(pu, pv, joint.probs.clone()).map_err(|e| validation("joint.probs", e))
    }

    /// Channel under `partition_u` (input) and `partition_v` (output).
    pub fn channel_problem(&self) -> Result<SemanticChannelProblem, CliError> {
        let ch = self
            .channel
            .as_ref()
            .ok_or(CliError::MissingSection("channel"))?;
        let cells_u = self
            .partition_u
            .as_ref()
            .ok_or(CliError::MissingSection("partition_u"))?;
        let cells_v = self
            .partition_v
            .as_ref()
            .ok_or(CliError::MissingSection("partition_v"))?;
        if ch.matrix.is_empty() || ch.matrix[0].is_empty() {
            return Err(validation("channel.matrix", "must be a nonempty matrix"));
        }
        let input = Alphabet::indexed("x", ch.matrix.len());
        let output = Alphabet::indexed("y", ch.matrix[0].len());
        let channel = Channel::new(input.clone(), output.clone(), ch.matrix.clone())
            .map_err(|e| validation("channel.matrix", e))?;
        let pu = SynonymousPartition::new(input, cells_u.clone())
            .map_err(|e| validation("partition_u", e))?;
        let pv = SynonymousPartition::new(output, cells_v.clone())
            .map_err(|e| validation("partition_v", e))?;
        SemanticChannelProblem::new(channel, pu, pv).map_err(|e| validation("channel", e))
    }

    /// Rate-distortion problem: source + `partition_u` + `distortion` +
    /// `recon_partition`.
    pub fn rd_problem(&self) -> Result<SemanticRdProblem, CliError> {
        let source = self.source_variable()?;
        let dist = self
            .distortion
            .as_ref()
            .ok_or(CliError::MissingSection("distortion"))?;
        let recon = self
            .recon_partition
            .as_ref()
            .ok_or(CliError::MissingSection("recon_partition"))?;
        if dist.domain != "semantic" {
            return Err(validation(
                "distortion.domain",
                format!("expected \"semantic\", got \"{}\"", dist.domain),
            ));
        }
        if dist.matrix.is_empty() || dist.matrix[0].is_empty() {
            return Err(validation("distortion.matrix", "must be a nonempty matrix"));
        }
        let width = dist.matrix[0].len();
        for (i, row) in dist.matrix.iter().enumerate() {
            if row.len() != width {
                return Err(validation(
                    "distortion.matrix",
                    format!("row {i} has {} entries, expected {width}", row.len()),
                ));
            }
        }
        let max_index = recon.iter().flatten().copied().max().ok_or_else(|| {
            validation("recon_partition", "must contain at least one nonempty cell")
        })?;
        let recon_part = SynonymousPartition::new(
            Alphabet::indexed("xhat", max_index + 1),
            recon.clone(),
        )
        .map_err(|e| validation("recon_partition", e))?;
        let spec =
            DistortionSpec::new(dist.matrix.clone()).map_err(|e| validation("distortion.matrix", e))?;
        SemanticRdProblem::new(source, recon_part, spec).map_err(|e| validation("distortion", e))
    }
}

pub fn parse_problem_file(path: &Path) -> Result<ProblemFile, CliError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    ProblemFile::from_json(&bytes).map_err(|message| CliError::Parse {
        path: shown,
        message,
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One scalar result with its unit (`bits`, `sebits`, `probability`, or
/// `count`).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultValue {
    pub value: f64,
    pub unit: &'static str,
}

/// A JSON-serializable diagnostic value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    List(Vec<Value>),
    Map(BTreeMap<String, Value>),
}

/// The single document every subcommand emits.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    /// `sha256:<hex>` digest of the raw problem-file bytes.
    pub digest: String,
    /// Resolved run parameters, stringified.
    pub params: BTreeMap<String, String>,
    pub results: BTreeMap<String, ResultValue>,
    pub diagnostics: BTreeMap<String, Value>,
}

/// Fixed six-decimal float form; `-0.0` normalizes to `0.0`.
fn fmt6(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn push_json_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Num(x) => out.push_str(&fmt6(*x)),
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Text(s) => push_json_string(s, out),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Map(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_json_string(k, out);
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Table => self.to_table(),
        }
    }

    /// Canonical JSON: sorted keys, `%.6f` floats, one line.
    pub fn to_json(&self) -> String {
        let mut inputs = BTreeMap::new();
        inputs.insert("digest".to_string(), Value::Text(self.digest.clone()));
        inputs.insert(
            "params".to_string(),
            Value::Map(
                self.params
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::Text(v.clone())))
                    .collect(),
            ),
        );
        let mut results = BTreeMap::new();
        for (name, rv) in &self.results {
            let mut entry = BTreeMap::new();
            entry.insert("unit".to_string(), Value::Text(rv.unit.to_string()));
            entry.insert("value".to_string(), Value::Num(rv.value));
            results.insert(name.clone(), Value::Map(entry));
        }
        let mut root = BTreeMap::new();
        root.insert("command".to_string(), Value::Text(self.command.to_string()));
        root.insert("diagnostics".to_string(), Value::Map(self.diagnostics.clone()));
        root.insert("inputs".to_string(), Value::Map(inputs));
        root.insert("results".to_string(), Value::Map(results));
        root.insert("schema_version".to_string(), Value::Int(SCHEMA_VERSION as i64));
        let mut out = String::new();
        write_value(&Value::Map(root), &mut out);
        out.push('\n');
        out
    }

    /// One row per result key.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value,unit\n");
        for (name, rv) in &self.results {
            out.push_str(&format!("{name},{},{}\n", fmt6(rv.value), rv.unit));
        }
        out
    }

    /// Human-aligned columns.
    pub fn to_table(&self) -> String {
        let name_width = self
            .results
            .keys()
            .map(|k| k.len())
            .chain(std::iter::once("measure".len()))
            .max()
            .unwrap_or(7);
        let mut out = format!("{:<name_width$}  {:>14}  unit\n", "measure", "value");
        for (name, rv) in &self.results {
            out.push_str(&format!(
                "{name:<name_width$}  {:>14}  {}\n",
                fmt6(rv.value),
                rv.unit
            ));
        }
        out
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.as_slice() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "seminfo",
    version,
    about = "Semantic information measures, limits, and coding simulations over partitioned alphabets"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (UTF-8 JSON).
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: OutputFormat,
    /// Seed for every stochastic path (solver restarts, Monte Carlo).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Typicality margin for aep and the simulators (default 0.1).
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Block length for aep and the simulators.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Monte Carlo trials (default 1000).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Solver convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Solver iteration cap.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Distortion target for rd.
    #[arg(long, global = true)]
    d: Option<f64>,
    /// Comma-separated distortion grid for rd.
    #[arg(long, global = true, value_delimiter = ',')]
    d_grid: Option<Vec<f64>>,
    /// Code rate for the simulators (sebits per symbol).
    #[arg(long, global = true)]
    rate: Option<f64>,
    /// Within-set syntactic rate for simulate-source.
    #[arg(long, global = true, default_value_t = 0.0)]
    syn_rate: f64,
    /// Codewords per synonymous set for simulate-channel.
    #[arg(long, global = true, default_value_t = 1)]
    codewords_per_set: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical and semantic measures of a joint model.
    Measures,
    /// Semantic channel capacity with the classical baseline.
    Capacity,
    /// Semantic rate-distortion at a target (--d) or over a grid (--d-grid).
    Rd,
    /// Monte Carlo probability that a block is synonymous typical.
    Aep,
    /// Semantic source-coding error-rate simulation.
    SimulateSource,
    /// Semantic channel-coding error-rate simulation.
    SimulateChannel,
}

/// Parses `args`, runs the selected command, and writes the report to
/// stdout. Returns the process exit code: 0 success, 1 invalid input,
/// 2 solver non-convergence (report still written).
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 1 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let text = outcome.report.render(cli.output);
            let mut stdout = std::io::stdout();
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            if outcome.converged {
                0
            } else {
                2
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

#[derive(Debug)]
struct Outcome {
    report: Report,
    converged: bool,
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Flag("--input is required".to_string()))?;
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let file = ProblemFile::from_json(&bytes).map_err(|message| CliError::Parse {
        path: shown,
        message,
    })?;
    let digest = format!("sha256:{}", sha256_hex(&bytes));
    dispatch(cli, &file, digest)
}

fn search_config(cli: &Cli) -> SearchConfig {
    let mut cfg = SearchConfig::default();
    cfg.seed = cli.seed;
    if let Some(tol) = cli.tol {
        cfg.solver.tolerance = tol;
    }
    if let Some(max_iter) = cli.max_iter {
        cfg.solver.max_iterations = max_iter;
    }
    cfg
}

fn dispatch(cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Measures => cmd_measures(cli, file, digest),
        Command::Capacity => cmd_capacity(cli, file, digest),
        Command::Rd => cmd_rd(cli, file, digest),
        Command::Aep => cmd_aep(cli, file, digest),
        Command::SimulateSource => cmd_simulate_source(cli, file, digest),
        Command::SimulateChannel => cmd_simulate_channel(cli, file, digest),
    }
}

fn result(value: f64, unit: &'static str) -> ResultValue {
    ResultValue { value, unit }
}

fn cmd_measures(_cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    let jm = file.joint_model()?;
    let r = measure_report(&jm);
    let audit = chain_rule_audit(&jm);
    let mut results = BTreeMap::new();
    results.insert("H_U".to_string(), result(r.h_u, "bits"));
    results.insert("H_V".to_string(), result(r.h_v, "bits"));
    results.insert("H_UV".to_string(), result(r.h_uv, "bits"));
    results.insert("H_U_given_V".to_string(), result(r.h_u_given_v, "bits"));
    results.insert("H_V_given_U".to_string(), result(r.h_v_given_u, "bits"));
    results.insert("I_UV".to_string(), result(r.i_uv, "bits"));
    results.insert("Hs_U".to_string(), result(r.hs_u, "sebits"));
    results.insert("Hs_V".to_string(), result(r.hs_v, "sebits"));
    results.insert("Hs_UV".to_string(), result(r.hs_uv, "sebits"));
    results.insert("Hs_U_given_V".to_string(), result(r.hs_u_given_v, "sebits"));
    results.insert("Hs_V_given_U".to_string(), result(r.hs_v_given_u, "sebits"));
    results.insert("I_up".to_string(), result(r.i_up, "sebits"));
    results.insert("I_down_raw".to_string(), result(r.i_down_raw, "sebits"));
    results.insert("I_down".to_string(), result(r.i_down, "sebits"));
    results.insert(
        "I_bound_lower_via_V".to_string(),
        result(r.hs_v - r.h_v_given_u, "bits"),
    );
    results.insert(
        "I_bound_upper_via_V".to_string(),
        result(r.h_v - r.hs_v_given_u, "bits"),
    );
    results.insert(
        "I_bound_lower_via_U".to_string(),
        result(r.hs_u - r.h_u_given_v, "bits"),
    );
    results.insert(
        "I_bound_upper_via_U".to_string(),
        result(r.h_u - r.hs_u_given_v, "bits"),
    );
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("chains_hold".to_string(), Value::Bool(audit.all_hold));
    Ok(Outcome {
        report: Report {
            command: "measures",
            digest,
            params: BTreeMap::new(),
            results,
            diagnostics,
        },
        converged: true,
    })
}

fn cmd_capacity(cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    let prob = file.channel_problem()?;
    let cfg = search_config(cli);
    let res = semantic_capacity(&prob, &cfg);
    let base = ba_capacity(prob.channel(), &cfg.solver);
    let mut results = BTreeMap::new();
    results.insert("C_s".to_string(), result(res.capacity, "sebits"));
    results.insert("C".to_string(), result(base.capacity, "bits"));
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("converged".to_string(), Value::Bool(res.converged));
    diagnostics.insert(
        "baseline_converged".to_string(),
        Value::Bool(base.converged),
    );
    diagnostics.insert(
        "baseline_iterations".to_string(),
        Value::Int(base.iterations as i64),
    );
    diagnostics.insert(
        "input_dist".to_string(),
        Value::List(res.input_dist.iter().map(|&p| Value::Num(p)).collect()),
    );
    if let Some(oracle) = &res.oracle {
        diagnostics.insert("oracle_value".to_string(), Value::Num(oracle.value));
        diagnostics.insert("oracle_gap".to_string(), Value::Num(oracle.gap));
    }
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), cli.seed.to_string());
    params.insert("tol".to_string(), cfg.solver.tolerance.to_string());
    params.insert(
        "max_iter".to_string(),
        cfg.solver.max_iterations.to_string(),
    );
    let converged = res.converged && base.converged;
    Ok(Outcome {
        report: Report {
            command: "capacity",
            digest,
            params,
            results,
            diagnostics,
        },
        converged,
    })
}

fn cmd_rd(cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    let prob = file.rd_problem()?;
    let cfg = search_config(cli);
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), cli.seed.to_string());
    params.insert("tol".to_string(), cfg.solver.tolerance.to_string());
    params.insert(
        "max_iter".to_string(),
        cfg.solver.max_iterations.to_string(),
    );
    match (cli.d, cli.d_grid.as_deref()) {
        (Some(_), Some(_)) => Err(CliError::Flag(
            "--d and --d-grid are mutually exclusive".to_string(),
        )),
        (None, None) => Err(CliError::Flag("rd requires --d or --d-grid".to_string())),
        (Some(d), None) => {
            let res = semantic_rd(&prob, d, &cfg).map_err(|e| run_error("rd", e))?;
            params.insert("d".to_string(), d.to_string());
            let mut results = BTreeMap::new();
            results.insert("R_s".to_string(), result(res.rate, "sebits"));
            results.insert("R_s_raw".to_string(), result(res.raw_rate, "sebits"));
            results.insert("R".to_string(), result(res.baseline.rate, "bits"));
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("converged".to_string(), Value::Bool(res.converged));
            diagnostics.insert(
                "baseline_converged".to_string(),
                Value::Bool(res.baseline.converged),
            );
            diagnostics.insert(
                "baseline_iterations".to_string(),
                Value::Int(res.baseline.iterations as i64),
            );
            diagnostics.insert("target".to_string(), Value::Num(d));
            diagnostics.insert(
                "semantic_distortion".to_string(),
                Value::Num(res.distortion),
            );
            diagnostics.insert(
                "baseline_distortion".to_string(),
                Value::Num(res.baseline.distortion),
            );
            if let Some(oracle) = &res.oracle {
                diagnostics.insert("oracle_value".to_string(), Value::Num(oracle.value));
                diagnostics.insert("oracle_gap".to_string(), Value::Num(oracle.gap));
            }
            let converged = res.converged && res.baseline.converged;
            Ok(Outcome {
                report: Report {
                    command: "rd",
                    digest,
                    params,
                    results,
                    diagnostics,
                },
                converged,
            })
        }
        (None, Some(grid)) => {
            if grid.is_empty() {
                return Err(CliError::Flag(
                    "--d-grid needs at least one value".to_string(),
                ));
            }
            let curve = rd_curve(&prob, grid, &cfg).map_err(|e| run_error("rd", e))?;
            params.insert(
                "d_grid".to_string(),
                grid.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            let mut results = BTreeMap::new();
            results.insert(
                "points".to_string(),
                result(curve.points.len() as f64, "count"),
            );
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert(
                "repaired_any".to_string(),
                Value::Bool(curve.repaired_any),
            );
            let points = curve
                .points
                .iter()
                .map(|p| {
                    let mut m = BTreeMap::new();
                    m.insert("d".to_string(), Value::Num(p.d));
                    m.insert("rate".to_string(), Value::Num(p.rate));
                    m.insert("raw_rate".to_string(), Value::Num(p.raw_rate));
                    m.insert("repaired".to_string(), Value::Bool(p.repaired));
                    Value::Map(m)
                })
                .collect();
            diagnostics.insert("curve".to_string(), Value::List(points));
            Ok(Outcome {
                report: Report {
                    command: "rd",
                    digest,
                    params,
                    results,
                    diagnostics,
                },
                converged: true,
            })
        }
    }
}

fn cmd_aep(cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    let sv = file.source_variable()?;
    let n = cli
        .n
        .ok_or_else(|| CliError::Flag("aep requires --n".to_string()))?;
    let epsilon = cli.epsilon.unwrap_or(0.1);
    let trials = cli.trials.unwrap_or(1000);
    let h = entropy(sv.dist().probs());
    let hs = semantic_entropy(&sv);
    let model = SequenceModel::new(sv, n, epsilon).map_err(|e| run_error("aep", e))?;
    let est = monte_carlo_aep(&model, trials, cli.seed);
    let mut results = BTreeMap::new();
    results.insert(
        "prob_typical".to_string(),
        result(est.prob_typical, "probability"),
    );
    results.insert("H".to_string(), result(h, "bits"));
    results.insert("H_s".to_string(), result(hs, "sebits"));
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("ci95_low".to_string(), Value::Num(est.ci95.0));
    diagnostics.insert("ci95_high".to_string(), Value::Num(est.ci95.1));
    diagnostics.insert("trials".to_string(), Value::Int(est.trials as i64));
    let total = (model.source().alphabet().size() as f64).powf(n as f64);
    if total <= ENUMERATION_BUDGET {
        let summary = enumerate_typical(&model).map_err(|e| run_error("aep", e))?;
        diagnostics.insert("scanned".to_string(), Value::Int(summary.scanned as i64));
        diagnostics.insert(
            "typical_count".to_string(),
            Value::Int(summary.typical_count as i64),
        );
        diagnostics.insert(
            "typical_probability".to_string(),
            Value::Num(summary.typical_probability),
        );
        diagnostics.insert(
            "classes".to_string(),
            Value::Int(summary.classes.len() as i64),
        );
        diagnostics.insert(
            "class_bound_low".to_string(),
            Value::Num(summary.class_size_bounds.0),
        );
        diagnostics.insert(
            "class_bound_high".to_string(),
            Value::Num(summary.class_size_bounds.1),
        );
        diagnostics.insert(
            "bound_violations".to_string(),
            Value::Int(summary.bound_violations as i64),
        );
    }
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), cli.seed.to_string());
    params.insert("n".to_string(), n.to_string());
    params.insert("epsilon".to_string(), epsilon.to_string());
    params.insert("trials".to_string(), trials.to_string());
    Ok(Outcome {
        report: Report {
            command: "aep",
            digest,
            params,
            results,
            diagnostics,
        },
        converged: true,
    })
}

fn cmd_simulate_source(cli: &Cli, file: &ProblemFile, digest: String) -> Result<Outcome, CliError> {
    let sv = file.source_variable()?;
    let rate = cli
        .rate
        .ok_or_else(|| CliError::Flag("simulate-source requires --rate".to_string()))?;
    let n = cli
        .n
        .ok_or_else(|| CliError::Flag("simulate-source requires --n".to_string()))?;
    let trials = cli.trials.unwrap_or(1000);
    let epsilon = cli.epsilon.unwrap_or(0.1);
    let exp = SourceCodeExperiment::new(sv, n, rate, cli.syn_rate, trials, cli.seed, epsilon)
        .map_err(|e| run_error("simulate-source", e))?;
    let rep = simulate_source_coding(&exp).map_err(|e| run_error("simulate-source", e))?;
    let mut results = BTreeMap::new();
    results.insert("P_e".to_string(), result(rep.p_e, "probability"));
    results.insert("coverage".to_string(), result(rep.coverage, "probability"));
    let mut diagnostics = BTreeMap::new();
    if rep.codebook_log2.is_finite() {
        results.insert(
            "codebook_log2".to_string(),
            result(rep.codebook_log2, "sebits"),
        );
    } else {
        diagnostics.insert(
            "codebook_log2".to_string(),
            Value::Text(rep.codebook_log2.to_string()),
        );
    }
    diagnostics.insert("ci95_low".to_string(), Value::Num(rep.ci95.0));
    diagnostics.insert("ci95_high".to_string(), Value::Num(rep.ci95.1));
    diagnostics.insert("trials".to_string(), Value::Int(rep.trials as i64));
    if rep.codebook_size.is_finite() && rep.codebook_size < 1e15 {
        diagnostics.insert("codebook_size".to_string(), Value::Num(rep.codebook_size));
    }
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), cli.seed.to_string());
    params.insert("n".to_string(), n.to_string());
    params.insert("rate".to_string(), rate.to_string());
    params.insert("syn_rate".to_string(), cli.syn_rate.to_string());
    params.insert("trials".to_string(), trials.to_string());
    params.insert("epsilon".to_string(), epsilon.to_string());
    Ok(Outcome {
        report: Report {
            command: "simulate-source",
            digest,
            params,
            results,
            diagnostics,
        },
        converged: true,
    })
}

fn cmd_simulate_channel(
    cli: &Cli,
    file: &ProblemFile,
    digest: String,
) -> Result<Outcome, CliError> {
    let prob = file.channel_problem()?;
    let rate = cli
        .rate
        .ok_or_else(|| CliError::Flag("simulate-channel requires --rate".to_string()))?;
    let n = cli
        .n
        .ok_or_else(|| CliError::Flag("simulate-channel requires --n".to_string()))?;
    let trials = cli.trials.unwrap_or(1000);
    let epsilon = cli.epsilon.unwrap_or(0.1);
    let n_inputs = prob.channel().input_alphabet().size();
    let mut exp = ChannelCodeExperiment::new(prob, n, rate, trials, cli.seed, epsilon)
        .map_err(|e| run_error("simulate-channel", e))?
        .with_codewords_per_set(cli.codewords_per_set)
        .map_err(|e| run_error("simulate-channel", e))?;
    if let Some(src) = &file.source {
        if src.probs.len() != n_inputs {
            return Err(validation(
                "source.probs",
                format!(
                    "has {} entries, channel input has {n_inputs} symbols",
                    src.probs.len()
                ),
            ));
        }
        exp = exp
            .with_input_dist(src.probs.clone())
            .map_err(|e| validation("source.probs", e))?;
    }
    let rep = simulate_channel_coding(&exp).map_err(|e| run_error("simulate-channel", e))?;
    let mut results = BTreeMap::new();
    results.insert("P_e".to_string(), result(rep.p_e, "probability"));
    results.insert(
        "semantic_accuracy".to_string(),
        result(rep.semantic_accuracy, "probability"),
    );
    results.insert(
        "syntactic_accuracy".to_string(),
        result(rep.syntactic_accuracy, "probability"),
    );
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("ci95_low".to_string(), Value::Num(rep.ci95.0));
    diagnostics.insert("ci95_high".to_string(), Value::Num(rep.ci95.1));
    diagnostics.insert("trials".to_string(), Value::Int(rep.trials as i64));
    diagnostics.insert(
        "mode".to_string(),
        Value::Text(
            match rep.mode {
                SimMode::Explicit => "explicit",
                SimMode::Ensemble => "ensemble",
            }
            .to_string(),
        ),
    );
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), cli.seed.to_string());
    params.insert("n".to_string(), n.to_string());
    params.insert("rate".to_string(), rate.to_string());
    params.insert("trials".to_string(), trials.to_string());
    params.insert("epsilon".to_string(), epsilon.to_string());
    params.insert(
        "codewords_per_set".to_string(),
        cli.codewords_per_set.to_string(),
    );
    Ok(Outcome {
        report: Report {
            command: "simulate-channel",
            digest,
            params,
            results,
            diagnostics,
        },
        converged: true,
    })
}
