use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spantree::dtree::write_tree;
use spantree::experiment::{run_experiment, ExperimentError, ExperimentOptions, Inputs, MAX_EPSILON};
use spantree::problems::{GraphError, GraphInstance, Problem};
use spantree::qsim::{Instance, Mode, DEFAULT_MEMORY_BUDGET};
use spantree::report::to_json;
use spantree::suite::{run_suite, SuiteOptions};

/// Overrides the memory budget (bytes) of every command.
const BUDGET_ENV: &str = "SPANTREE_MEMORY_BUDGET";

mod exit {
    pub const BELOW_THRESHOLD: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const PARAMETER: u8 = 3;
    pub const BUDGET: u8 = 4;
    pub const IO: u8 = 5;
    pub const INTERNAL: u8 = 6;
}

#[derive(Parser)]
#[command(name = "spantree", version, about = "Span-program algorithms from guess-colored decision trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulated algorithm and write a JSON report.
    Run(RunArgs),
    /// Run the self-check suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Print a frontend's decision tree in the text format.
    Tree(TreeArgs),
    /// Print the decision-graph matrix M̃ as `row col value` triplets.
    Matrix(MatrixArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ProblemName {
    FirstMarked,
    Bfs,
    Bipartite,
    Cycle,
    Matching,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeName {
    ExactSpectral,
    Ancilla,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::ExactSpectral => Mode::ExactSpectral,
            ModeName::Ancilla => Mode::Ancilla,
        }
    }
}

/// Every field of a run; file values are overridden by flags.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ExperimentConfig {
    problem: Option<ProblemName>,
    n: Option<usize>,
    directed: Option<bool>,
    graph: Option<PathBuf>,
    seed: Option<u64>,
    edge_probability: Option<f64>,
    input: Option<String>,
    epsilon: Option<f64>,
    mode: Option<ModeName>,
    #[serde(alias = "paper-faithful")]
    pad_cycles: Option<bool>,
    memory_budget: Option<u64>,
    output: Option<PathBuf>,
}

impl ExperimentConfig {
    fn overlay(self, top: ExperimentConfig) -> Self {
        Self {
            problem: top.problem.or(self.problem),
            n: top.n.or(self.n),
            directed: top.directed.or(self.directed),
            graph: top.graph.or(self.graph),
            seed: top.seed.or(self.seed),
            edge_probability: top.edge_probability.or(self.edge_probability),
            input: top.input.or(self.input),
            epsilon: top.epsilon.or(self.epsilon),
            mode: top.mode.or(self.mode),
            pad_cycles: top.pad_cycles.or(self.pad_cycles),
            memory_budget: top.memory_budget.or(self.memory_budget),
            output: top.output.or(self.output),
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: Option<ProblemName>,
    /// Input length (first-marked) or vertex count (graph problems).
    #[arg(long)]
    n: Option<usize>,
    /// Directed graph (BFS only).
    #[arg(long)]
    directed: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// JSON or TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph file: adjacency matrix or 1-indexed edge list.
    #[arg(long, conflicts_with_all = ["seed", "input"])]
    graph: Option<PathBuf>,
    /// Generate a random graph from this seed.
    #[arg(long, conflicts_with = "input")]
    seed: Option<u64>,
    /// Edge probability of the random graph.
    #[arg(long, requires = "seed")]
    edge_probability: Option<f64>,
    /// A single input string of 0/1 symbols; all inputs are run otherwise.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    /// Pad black cycles to power-of-two lengths.
    #[arg(long, alias = "paper-faithful")]
    pad_cycles: bool,
    /// Memory budget in bytes.
    #[arg(long)]
    budget: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Only trees with n ≤ 3.
    #[arg(long)]
    quick: bool,
    /// Perturb one entry of M̃; the kernel suite must then fail.
    #[arg(long)]
    corrupt: bool,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Also write the full JSON report here.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Pad black cycles to power-of-two lengths.
    #[arg(long, alias = "paper-faithful")]
    pad_cycles: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        use spantree::dtree::TreeError;
        let code = match &e {
            ExperimentError::Parameter(_) => exit::PARAMETER,
            ExperimentError::Budget { .. } => exit::BUDGET,
            ExperimentError::Graph(_) => exit::PARSE,
            ExperimentError::Tree(TreeError::Input(_) | TreeError::Parse { .. }) => exit::PARSE,
            ExperimentError::Tree(TreeError::Unsupported(_) | TreeError::TooLarge(_)) => exit::PARAMETER,
            _ => exit::INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        ExperimentError::from(e).into()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(exit::IO, format!("cannot read {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(exit::IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = read(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    let mut cfg: ExperimentConfig =
        parsed.map_err(|e| Failure::new(exit::PARSE, format!("config {}: {e}", path.display())))?;
    // Relative graph paths are relative to the config file.
    if let (Some(g), Some(dir)) = (&cfg.graph, path.parent()) {
        if g.is_relative() {
            cfg.graph = Some(dir.join(g));
        }
    }
    Ok(cfg)
}

fn env_budget() -> Result<Option<u64>, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::new(exit::PARAMETER, format!("{BUDGET_ENV}={v:?} is not a byte count"))),
        Err(_) => Ok(None),
    }
}

fn make_problem(name: ProblemName, n: usize, directed: bool) -> Result<Problem, Failure> {
    if directed && name != ProblemName::Bfs {
        return Err(Failure::new(exit::PARAMETER, "--directed applies to bfs only"));
    }
    Ok(match name {
        ProblemName::FirstMarked => Problem::FirstMarked { n },
        ProblemName::Bfs => Problem::Bfs { n, directed },
        ProblemName::Bipartite => Problem::Bipartite { n },
        ProblemName::Cycle => Problem::Cycle { n },
        ProblemName::Matching => Problem::Matching { n },
    })
}

fn parse_bits(s: &str) -> Result<Vec<usize>, Failure> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Failure::new(exit::PARSE, format!("input symbol {other:?} is not 0 or 1"))),
        })
        .collect()
}

fn tree_problem(args: &ProblemArgs) -> Result<Problem, Failure> {
    let name = args.problem.ok_or_else(|| Failure::new(exit::PARAMETER, "--problem is required"))?;
    let n = args.n.ok_or_else(|| Failure::new(exit::PARAMETER, "--n is required"))?;
    make_problem(name, n, args.directed)
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    let flags = ExperimentConfig {
        problem: args.problem.problem,
        n: args.problem.n,
        directed: args.problem.directed.then_some(true),
        graph: args.graph,
        seed: args.seed,
        edge_probability: args.edge_probability,
        input: args.input,
        epsilon: args.epsilon,
        mode: args.mode,
        pad_cycles: args.pad_cycles.then_some(true),
        memory_budget: None,
        output: args.output,
    };
    let mut cfg = file.overlay(flags);
    if let Some(b) = env_budget()? {
        cfg.memory_budget = Some(b);
    }
    if let Some(b) = args.budget {
        cfg.memory_budget = Some(b);
    }

    let name = cfg.problem.ok_or_else(|| Failure::new(exit::PARAMETER, "--problem is required"))?;
    let directed = cfg.directed.unwrap_or(false);
    let graph = match (&cfg.graph, cfg.seed) {
        (Some(path), _) => Some(GraphInstance::parse(&read(path)?, directed)?),
        (None, Some(seed)) => {
            let n = cfg.n.ok_or_else(|| Failure::new(exit::PARAMETER, "--seed needs --n"))?;
            Some(GraphInstance::random_seeded(seed, n, cfg.edge_probability.unwrap_or(0.5), directed)?)
        }
        (None, None) => None,
    };
    let n = match (&graph, cfg.n) {
        (Some(g), Some(n)) if g.n() != n => {
            return Err(Failure::new(exit::PARAMETER, format!("graph has {} vertices but --n is {n}", g.n())))
        }
        (Some(g), _) => g.n(),
        (None, Some(n)) => n,
        (None, None) => return Err(Failure::new(exit::PARAMETER, "--n or --graph is required")),
    };
    let problem = make_problem(name, n, directed)?;
    let inputs = match (&graph, &cfg.input) {
        (Some(g), _) => Inputs::Given(vec![problem.encode(g)?]),
        (None, Some(bits)) => Inputs::Given(vec![parse_bits(bits)?]),
        (None, None) => Inputs::All,
    };
    let opts = ExperimentOptions {
        epsilon: cfg.epsilon.unwrap_or(0.05),
        mode: cfg.mode.map_or(Mode::ExactSpectral, Mode::from),
        pad: cfg.pad_cycles.unwrap_or(false),
        memory_budget: cfg.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET),
        ..Default::default()
    };
    let report = run_experiment(&problem, &inputs, &opts)?;
    emit(cfg.output.as_deref(), &to_json(&report))?;
    let s = &report.summary;
    eprintln!(
        "{} n={}: {} inputs, min success {:.6}, answers {}",
        report.problem,
        report.n,
        s.inputs,
        s.min_success,
        if s.all_correct { "correct" } else { "WRONG" }
    );
    Ok(if s.passed { 0 } else { exit::BELOW_THRESHOLD })
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    if !(args.epsilon > 0.0 && args.epsilon <= MAX_EPSILON) {
        return Err(Failure::new(exit::PARAMETER, format!("ε must lie in (0, {MAX_EPSILON}]")));
    }
    let report = run_suite(&SuiteOptions {
        quick: args.quick,
        corrupt: args.corrupt,
        epsilon: args.epsilon,
    })?;
    println!("{:<14} {:<16} {:<6} {:>12}  detail", "suite", "subject", "result", "deviation");
    for c in &report.checks {
        println!(
            "{:<14} {:<16} {:<6} {:>12.3e}  {}",
            c.suite,
            c.subject,
            if c.passed { "pass" } else { "FAIL" },
            c.value,
            c.detail
        );
    }
    let failed = report.failures().count();
    println!("{} checks, {failed} failed", report.checks.len());
    if let Some(p) = &args.output {
        emit(Some(p), &to_json(&report))?;
    }
    Ok(if report.passed { 0 } else { exit::BELOW_THRESHOLD })
}

fn cmd_tree(args: TreeArgs) -> Result<u8, Failure> {
    let f = tree_problem(&args.problem)?.build().map_err(ExperimentError::from)?;
    emit(args.output.as_deref(), &write_tree(&f.tree))?;
    Ok(0)
}

fn cmd_matrix(args: MatrixArgs) -> Result<u8, Failure> {
    let opts = ExperimentOptions {
        epsilon: args.epsilon,
        ..Default::default()
    };
    opts.validate()?;
    let f = tree_problem(&args.problem)?.build().map_err(ExperimentError::from)?;
    let inst = Instance::<f64>::new(&f.tree, args.epsilon, args.pad_cycles).map_err(ExperimentError::from)?;
    emit(args.output.as_deref(), &inst.matrix().to_triplet_text())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Tree(a) => cmd_tree(a),
        Command::Matrix(a) => cmd_matrix(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
