//! Command implementations behind the `hsnet` binary.
//!
//! Every command renders to a string; JSON output has sorted keys and
//! reduced `"p/q"` rationals, so identical inputs give identical bytes.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hsnet::closed_form::{self, ValueReport};
use hsnet::designer::{self, DesignError, DesignedNetwork};
use hsnet::formats::{self, GraphJson};
use hsnet::oracle::{self, EnumerationReport};
use hsnet::payoff::UtilityJson;
use hsnet::rational::{self, parse_rational, Rational};
use hsnet::{game, payoff, MixedStrategy, UtilitySpec};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "hsnet", version, about = "Hider-seeker network design games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the game on a given graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        utility: UtilityArgs,
    },
    /// Build the optimal network for n nodes with equilibrium strategies.
    Design {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        utility: UtilityArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: DesignFormat,
        /// Also write the DOT rendering to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Tabulate the closed-form quantities over (n, s, m).
    ValueTable {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[command(flatten)]
        utility: UtilityArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
    },
    /// Check the closed forms against exhaustive enumeration.
    Verify {
        /// Smallest n checked. Below 4 the closed forms are known not to
        /// describe the optimum.
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        /// Permit n = 8 (12346 graphs).
        #[arg(long)]
        long: bool,
        /// Component-value families to sweep.
        #[arg(long, value_delimiter = ',', default_value = "identity,square")]
        families: Vec<String>,
        /// Capture penalties to sweep.
        #[arg(long, value_delimiter = ',', default_value = "0,1/2,1,2,5,50")]
        betas: Vec<String>,
        /// Sweep a single utility (JSON or @file) instead of the family grid.
        #[arg(long, conflicts_with_all = ["families", "betas"])]
        utility: Option<String>,
        /// Write a per-cell CSV summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Self-test: compare against a deliberately wrong closed form.
        #[arg(long)]
        mutate: bool,
    },
    /// List all graphs on n nodes up to isomorphism.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        long: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Convert a graph file, or export a designed network.
    Export {
        #[arg(long, conflicts_with = "n")]
        graph: Option<PathBuf>,
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        /// Singleton count for the design (defaults to the optimal one).
        #[arg(long, requires = "n")]
        s: Option<usize>,
        #[command(flatten)]
        utility: UtilityArgs,
        #[arg(long, value_enum, default_value = "dot")]
        format: ExportFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Clone, Args)]
pub struct UtilityArgs {
    /// Utility spec as JSON, or `@path` to a JSON file.
    #[arg(long, conflicts_with_all = ["family", "slope", "gamma", "values", "beta"])]
    pub utility: Option<String>,
    /// identity, square, linear, power, ratio_power or table.
    #[arg(long, default_value = "identity")]
    pub family: String,
    #[arg(long)]
    pub slope: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Table values f(0), f(1), ... separated by commas.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<String>>,
    /// Capture penalty.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: String,
}

/// How a run ended. Errors (exit code 2) are returned as `Err`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ChecksFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::ChecksFailed => 1,
        }
    }
}

pub struct Output {
    pub status: Status,
    pub text: String,
    /// Extra files to write (path, contents).
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { status: Status::Success, text, files: Vec::new() }
    }
}

fn read_input(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_utility_json(text: &str) -> anyhow::Result<UtilitySpec> {
    let body = match text.strip_prefix('@') {
        Some(path) => read_input(&PathBuf::from(path))?,
        None => text.to_string(),
    };
    let json: UtilityJson = serde_json::from_str(&body).context("invalid utility JSON")?;
    Ok(UtilitySpec::from_json(&json)?)
}

impl UtilityArgs {
    pub fn resolve(&self) -> anyhow::Result<UtilitySpec> {
        if let Some(text) = &self.utility {
            return parse_utility_json(text);
        }
        let beta = parse_rational(&self.beta).map_err(|e| anyhow!("invalid --beta: {e}"))?;
        let mut params = BTreeMap::new();
        let family = match self.family.as_str() {
            "identity" => {
                params.insert("slope".to_string(), json!("1"));
                "linear"
            }
            "square" => {
                params.insert("gamma".to_string(), json!("2"));
                "power"
            }
            other => other,
        };
        if let Some(v) = &self.slope {
            params.insert("slope".to_string(), json!(v));
        }
        if let Some(v) = &self.gamma {
            params.insert("gamma".to_string(), json!(v));
        }
        if let Some(v) = &self.values {
            params.insert("values".to_string(), json!(v));
        }
        Ok(UtilitySpec::builtin(family, &params, beta)?)
    }
}

/// Renders rationals exactly, or to 17 significant digits when the utility
/// is only known in floating point.
#[derive(Debug, Clone, Copy)]
struct Render {
    float: bool,
}

impl Render {
    fn for_utility(u: &UtilitySpec) -> Self {
        Render { float: !u.is_exact() }
    }

    fn num(&self, value: &Rational) -> Value {
        if self.float {
            Value::String(format!("{:.16e}", rational::to_f64(value)))
        } else {
            Value::String(rational::format_rational(value))
        }
    }

    fn strategy(&self, s: &MixedStrategy) -> Value {
        Value::Array(s.probs().iter().map(|p| self.num(p)).collect())
    }
}

/// Rebuilds every object with its keys in sorted order.
fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sort_keys(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn render_json(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&sort_keys(value)).expect("serializable");
    text.push('\n');
    text
}

fn utility_json(u: &UtilitySpec) -> Value {
    serde_json::to_value(u.to_json()).expect("serializable")
}

fn graph_json(g: &hsnet::Graph) -> Value {
    serde_json::to_value(GraphJson::from(g)).expect("serializable")
}

pub fn cmd_solve(graph: &PathBuf, u: &UtilitySpec) -> anyhow::Result<Output> {
    let g = formats::parse_graph(&read_input(graph)?).with_context(|| format!("in {}", graph.display()))?;
    let matrix = payoff::payoff_matrix(&g, u)?;
    let sol = game::solve_zero_sum(&matrix);
    let capture = designer::capture_probability(&g, &sol.row_strategy, &sol.col_strategy, None);
    let r = Render::for_utility(u);
    Ok(Output::ok(render_json(json!({
        "command": "solve",
        "float": r.float,
        "utility": utility_json(u),
        "graph": graph_json(&g),
        "value": r.num(&sol.value),
        "hider_strategy": r.strategy(&sol.row_strategy),
        "seeker_strategy": r.strategy(&sol.col_strategy),
        "capture_probability": r.num(&capture),
    }))))
}

fn roles_json(net: &DesignedNetwork) -> Value {
    json!({
        "component": net.component,
        "singletons": net.singletons,
        "core": net.core,
        "periphery": net.periphery,
        "orphans": net.orphans,
        "middle_orphan": net.middle_orphan,
    })
}

/// Design failures that mean the constructed equilibrium did not verify.
fn design_check_failed(err: &anyhow::Error) -> bool {
    matches!(
        err.downcast_ref::<DesignError>(),
        Some(DesignError::NotEquilibrium { .. } | DesignError::ValueMismatch { .. })
    )
}

pub fn cmd_design(n: usize, u: &UtilitySpec, format: DesignFormat, dot: Option<&PathBuf>) -> anyhow::Result<Output> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let d = match designer::design_optimal(n, u) {
        Ok(d) => d,
        Err(e) => {
            let err = anyhow::Error::from(e);
            if design_check_failed(&err) {
                return Ok(Output { status: Status::ChecksFailed, text: format!("{err}\n"), files: Vec::new() });
            }
            return Err(err);
        }
    };
    let r = Render::for_utility(u);
    let dot_text = formats::network_to_dot(&d.network);
    let text = match format {
        DesignFormat::Dot => dot_text.clone(),
        DesignFormat::Json => {
            let capture = designer::capture_probability(d.graph(), &d.hider, &d.seeker, None);
            render_json(json!({
                "command": "design",
                "float": r.float,
                "utility": utility_json(u),
                "n": n,
                "s_star": d.s_star,
                "optimal_s": d.optimal_s,
                "topology": d.topology.to_string(),
                "predicted_value": r.num(&d.predicted_value),
                "graph": graph_json(d.graph()),
                "roles": roles_json(&d.network),
                "hider_strategy": r.strategy(&d.hider),
                "seeker_strategy": r.strategy(&d.seeker),
                "capture_probability": r.num(&capture),
            }))
        }
    };
    let files = dot.map(|p| vec![(p.clone(), dot_text)]).unwrap_or_default();
    Ok(Output { status: Status::Success, text, files })
}

pub const VALUE_TABLE_COLUMNS: [&str; 10] = ["n", "s", "m", "T", "A", "B", "rho", "lambda_S", "Q", "Qbar"];

/// One row per admissible `(n, s, m)`: `s` in `{0..n-4} u {n}`, `2m <= n - s`.
fn value_table_rows(n_min: usize, n_max: usize, u: &UtilitySpec) -> anyhow::Result<Vec<[Option<String>; 10]>> {
    if n_min == 0 || n_min > n_max {
        bail!("need 1 <= --n-min <= --n-max");
    }
    u.validate(n_max)?;
    let r = Render::for_utility(u);
    let cell = |v: &Option<Rational>| v.as_ref().map(|x| r.num(x).as_str().unwrap().to_string());
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let singles = (0..=n).filter(|&s| s + 4 <= n || s == n);
        for s in singles {
            let m_max = if s == n { 0 } else { (n - s) / 2 };
            for m in 0..=m_max {
                let v = ValueReport::compute(n, m, s, u)?;
                rows.push([
                    Some(n.to_string()),
                    Some(s.to_string()),
                    Some(m.to_string()),
                    cell(&v.t),
                    cell(&v.a),
                    cell(&v.b),
                    cell(&v.rho),
                    cell(&v.lambda_s),
                    cell(&v.q),
                    cell(&v.qbar),
                ]);
            }
        }
    }
    Ok(rows)
}

pub fn cmd_value_table(n_min: usize, n_max: usize, u: &UtilitySpec, format: TableFormat) -> anyhow::Result<Output> {
    let rows = value_table_rows(n_min, n_max, u)?;
    let text = match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(VALUE_TABLE_COLUMNS)?;
            for row in &rows {
                w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        TableFormat::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (name, c) in VALUE_TABLE_COLUMNS.iter().zip(row) {
                        obj.insert(name.to_string(), c.as_ref().map_or(Value::Null, |s| json!(s)));
                    }
                    Value::Object(obj)
                })
                .collect();
            render_json(json!({
                "command": "value-table",
                "float": !u.is_exact(),
                "utility": utility_json(u),
                "rows": records,
            }))
        }
    };
    Ok(Output::ok(text))
}

/// Deliberately wrong prediction for the mutation self-test: always uses the
/// cycle-side bound `Q(n, 0, s)`, ignoring core-periphery designs.
fn mutated_prediction(n: usize, u: &UtilitySpec) -> Result<Rational, closed_form::ClosedFormError> {
    let candidates = (0..=n).filter(|&s| s + 4 <= n || s == n);
    let mut best: Option<Rational> = None;
    for s in candidates {
        let q = closed_form::bound_q(n, 0, s, u)?;
        if best.as_ref().is_none_or(|b| q < *b) {
            best = Some(q);
        }
    }
    Ok(-best.expect("s = n is always a candidate"))
}

pub struct VerifyOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub long: bool,
    pub utilities: Vec<(String, UtilitySpec)>,
    pub mutate: bool,
}

pub fn verify_grid(families: &[String], betas: &[String]) -> anyhow::Result<Vec<(String, UtilitySpec)>> {
    let mut out = Vec::new();
    for family in families {
        for beta in betas {
            let args = UtilityArgs {
                utility: None,
                family: family.clone(),
                slope: None,
                gamma: None,
                values: None,
                beta: beta.clone(),
            };
            out.push((family.clone(), args.resolve()?));
        }
    }
    Ok(out)
}

pub fn cmd_verify(opts: &VerifyOptions) -> anyhow::Result<(Output, String)> {
    let limit = if opts.long { 8 } else { oracle::DEFAULT_MAX_NODES };
    if opts.n_min == 0 || opts.n_min > opts.n_max {
        bail!("need 1 <= --n-min <= --n-max");
    }
    if opts.n_max > limit {
        bail!("--n-max {} exceeds {limit}{}", opts.n_max, if opts.long { "" } else { " (use --long for 8)" });
    }
    let mut cells = Vec::new();
    let mut monotonicity = Vec::new();
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["n", "family", "beta", "graph_count", "best_value", "closed_form_value", "passed", "failed_checks"])?;
    let mut all_passed = true;
    for n in opts.n_min..=opts.n_max {
        let mut by_family: BTreeMap<&str, Vec<EnumerationReport>> = BTreeMap::new();
        for (family, u) in &opts.utilities {
            let report = if opts.mutate {
                oracle::exhaustive_optimum_against(n, u, mutated_prediction)?
            } else {
                oracle::exhaustive_optimum(n, u)?
            };
            all_passed &= report.passed();
            let failed: Vec<&str> = report
                .structural_checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            let r = Render::for_utility(u);
            summary.write_record([
                n.to_string(),
                family.clone(),
                rational::format_rational(&u.beta),
                report.graph_count.to_string(),
                r.num(&report.best_value).as_str().unwrap().to_string(),
                r.num(&report.closed_form_value).as_str().unwrap().to_string(),
                report.passed().to_string(),
                failed.join(";"),
            ])?;
            let mut cell = report.to_json();
            cell["family"] = json!(family);
            cells.push(cell);
            by_family.entry(family.as_str()).or_default().push(report);
        }
        for (family, reports) in by_family {
            let refs: Vec<&EnumerationReport> = reports.iter().collect();
            let check = oracle::check_beta_monotonicity(&refs);
            all_passed &= check.passed;
            monotonicity.push(json!({"n": n, "family": family, "check": check}));
        }
    }
    let status = if all_passed { Status::Success } else { Status::ChecksFailed };
    let text = render_json(json!({
        "command": "verify",
        "mutated": opts.mutate,
        "cells": cells,
        "monotonicity": monotonicity,
        "passed": all_passed,
    }));
    let summary = String::from_utf8(summary.into_inner()?)?;
    Ok((Output { status, text, files: Vec::new() }, summary))
}

pub fn cmd_enumerate(n: usize, long: bool, format: GraphFormat) -> anyhow::Result<Output> {
    if n > oracle::DEFAULT_MAX_NODES && !long {
        bail!("n = {n} needs --long");
    }
    let graphs = oracle::enumerate_graphs(n)?;
    let text = match format {
        GraphFormat::Json => render_json(json!({
            "command": "enumerate",
            "n": n,
            "graph_count": graphs.len(),
            "graphs": graphs.iter().map(graph_json).collect::<Vec<_>>(),
        })),
        GraphFormat::Text => graphs.iter().map(formats::write_graph_text).collect::<Vec<_>>().join("\n"),
    };
    Ok(Output::ok(text))
}

pub fn cmd_export(
    graph: Option<&PathBuf>,
    n: Option<usize>,
    s: Option<usize>,
    utility: &UtilityArgs,
    format: ExportFormat,
) -> anyhow::Result<Output> {
    let (g, net) = match (graph, n) {
        (Some(path), _) => (formats::parse_graph(&read_input(path)?).with_context(|| format!("in {}", path.display()))?, None),
        (None, Some(n)) => {
            let u = utility.resolve()?;
            u.validate(n)?;
            let s = match s {
                Some(s) => s,
                None => closed_form::optimal_singletons(n, &u)?.0[0],
            };
            let net = designer::design_network(n, s, &u)?;
            (net.graph.clone(), Some(net))
        }
        (None, None) => bail!("export needs --graph or --n"),
    };
    let text = match format {
        ExportFormat::Json => render_json(graph_json(&g)),
        ExportFormat::Text => formats::write_graph_text(&g),
        ExportFormat::Dot => match &net {
            Some(net) => formats::network_to_dot(net),
            None => formats::graph_to_dot(&g),
        },
    };
    Ok(Output::ok(text))
}

/// Runs a parsed command line. Returns the output and, for `verify` with
/// `--summary`, the summary file to write.
pub fn run(cli: &Cli) -> anyhow::Result<Output> {
    match &cli.command {
        Command::Solve { graph, utility } => cmd_solve(graph, &utility.resolve()?),
        Command::Design { n, utility, format, dot } => cmd_design(*n, &utility.resolve()?, *format, dot.as_ref()),
        Command::ValueTable { n_min, n_max, utility, format } => {
            cmd_value_table(*n_min, *n_max, &utility.resolve()?, *format)
        }
        Command::Verify { n_min, n_max, long, families, betas, utility, summary, mutate } => {
            let utilities = match utility {
                Some(text) => vec![("custom".to_string(), parse_utility_json(text)?)],
                None => verify_grid(families, betas)?,
            };
            let opts = VerifyOptions { n_min: *n_min, n_max: *n_max, long: *long, utilities, mutate: *mutate };
            let (mut out, csv) = cmd_verify(&opts)?;
            if let Some(path) = summary {
                out.files.push((path.clone(), csv));
            }
            Ok(out)
        }
        Command::Enumerate { n, long, format } => cmd_enumerate(*n, *long, *format),
        Command::Export { graph, n, s, utility, format } => cmd_export(graph.as_ref(), *n, *s, utility, *format),
    }
}
