use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lateration::error::Error;
use lateration::{
    apply_noise, embedding_error, find_laterative_ordering, geometric_graph, level_medians, loglog_slope, median,
    minimize_gd, minimize_smacof, preset, read_results_csv, run_experiment, sample_domain, sequential_laterate_best,
    sequential_laterate_first, theory_bound, verify_perturbation_bound, write_results_csv, write_svg_scatter,
    CliqueStrategy, Configuration, DissimilarityGraph, DomainSpec, Init, LaterationOptions, Method, NoiseModel,
    NoiseSpec, OptimizerConfig, Overrides, ScenarioConfig,
};
use serde_json::json;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "lateration", version, about = "Anchor-free graph embedding by sequential lateration")]
struct Cli {
    /// Seed for every random draw (latent sampling, noise, clique sampling, random starts).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Primary output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON configuration: scenario(s) for `exp`, optimizer settings for `stress-min`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a latent configuration on the hollow rectangle, build its geometric graph and add noise.
    Gen(GenArgs),
    /// Embed a graph by sequential lateration.
    Laterate(LaterateArgs),
    /// Minimize s-stress by gradient descent or SMACOF.
    StressMin(StressMinArgs),
    /// Accuracy constant and noise threshold of sequential lateration on a latent configuration.
    Bound(BoundArgs),
    /// Run a perturbation or timing study.
    Exp(ExpArgs),
    /// Log-log scatter of embedding error against mean perturbation from a results CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Fraction of each side hollowed out of the domain.
    #[arg(long, default_value_t = 0.2)]
    h: f64,
    /// Half-width of the domain; its half-height is 1/kappa.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.3)]
    radius: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma2: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Additive)]
    noise: NoiseArg,
    /// Also write the latent configuration here.
    #[arg(long)]
    latent: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Additive,
    Multiplicative,
    None,
}

impl From<NoiseArg> for NoiseModel {
    fn from(a: NoiseArg) -> Self {
        match a {
            NoiseArg::Additive => NoiseModel::AdditiveGaussian,
            NoiseArg::Multiplicative => NoiseModel::MultiplicativeGaussian,
            NoiseArg::None => NoiseModel::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    First,
    Best,
}

#[derive(Args)]
struct LaterateArgs {
    /// Graph CSV as written by `gen`.
    #[arg(long)]
    graph: PathBuf,
    /// Embedding dimension; defaults to the one recorded in the graph file.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum, default_value_t = Variant::First)]
    variant: Variant,
    /// Candidate seed cliques tried by the 'best' variant.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    /// Stop the seed clique at p + 1 nodes.
    #[arg(long)]
    minimal_seed: bool,
    /// Latent configuration; adds the embedding error and accuracy ratio to the diagnostics.
    #[arg(long)]
    latent: Option<PathBuf>,
    /// Write the diagnostics JSON here instead of standard error.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Optimizer {
    Gd,
    Smacof,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    /// Sequential lateration, falling back to a random start if the graph is not laterable.
    Auto,
    Lateration,
    Random,
}

#[derive(Args)]
struct StressMinArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum, default_value_t = Optimizer::Smacof)]
    method: Optimizer,
    #[arg(long, value_enum, default_value_t = InitArg::Auto)]
    init: InitArg,
    /// Start from this configuration instead (overrides --init).
    #[arg(long)]
    init_file: Option<PathBuf>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    latent: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    latent: PathBuf,
    /// Graph on the latent nodes; the ordering is found by greedy search.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long)]
    minimal_seed: bool,
}

#[derive(Args)]
struct ExpArgs {
    /// Built-in study; `--config` supplies scenarios instead.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Comma-separated noise variances.
    #[arg(long, value_delimiter = ',')]
    sigma2: Option<Vec<f64>>,
    /// Comma-separated methods: seq-lateration-first, seq-lateration-best, gd, smacof.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Also draw the results as an SVG scatter.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Results CSV written by `exp`.
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value = "embedding error vs mean perturbation")]
    title: String,
}

/// Command failures carry the exit code they map to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Json(_) | Error::Csv(_) => EXIT_INVALID,
            Error::ScenarioInfeasible(_) | Error::NotLaterable | Error::DegenerateStep { .. } => EXIT_INFEASIBLE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Gen(a) => gen(cli, a),
        Command::Laterate(a) => laterate(cli, a),
        Command::StressMin(a) => stress_min(cli, a),
        Command::Bound(a) => bound(cli, a),
        Command::Exp(a) => exp(cli, a),
        Command::Plot(a) => plot(cli, a),
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("{}: {e}", path.display()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("{}: {e}", path.display()),
    })
}

/// `--out` if given, else standard output.
fn output(cli: &Cli) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cli.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_graph(path: &Path, p: Option<usize>) -> Result<(DissimilarityGraph, usize), Failure> {
    let (graph, recorded) = DissimilarityGraph::read_csv(open(path)?)?;
    Ok((graph, p.unwrap_or(recorded)))
}

fn read_config(path: &Path) -> Result<Configuration, Failure> {
    Ok(Configuration::read_csv(open(path)?)?)
}

fn write_json(value: &serde_json::Value, target: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(value)?;
    match target {
        Some(path) => writeln!(create(path)?, "{text}")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn gen(cli: &Cli, a: &GenArgs) -> CmdResult {
    let domain = DomainSpec::new(a.h, a.kappa)?;
    let latent = sample_domain(&domain, a.n, cli.seed)?;
    let clean = geometric_graph(&latent, a.radius)?;
    let spec = NoiseSpec {
        model: a.noise.into(),
        variance: a.sigma2,
        seed: cli.seed,
    };
    let (noisy, report) = apply_noise(&clean, &spec)?;
    noisy.write_csv(output(cli)?, latent.dim())?;
    if let Some(path) = &a.latent {
        latent.write_csv(create(path)?)?;
    }
    eprintln!(
        "{} nodes, {} edges, {} clamped at zero, s(eps)^2 = {:e}",
        noisy.node_count(),
        noisy.edge_count(),
        report.truncated,
        report.drawn_sq_sum / noisy.edge_count().max(1) as f64
    );
    Ok(())
}

fn lateration_options(cli: &Cli, minimal_seed: bool, p: usize) -> LaterationOptions {
    LaterationOptions {
        clique: if minimal_seed {
            CliqueStrategy::minimal(p)
        } else {
            CliqueStrategy::default()
        },
        seed: cli.seed,
    }
}

fn laterate(cli: &Cli, a: &LaterateArgs) -> CmdResult {
    let (graph, p) = read_graph(&a.graph, a.p)?;
    let opts = lateration_options(cli, a.minimal_seed, p);
    let res = match a.variant {
        Variant::First => sequential_laterate_first(&graph, p, &opts)?,
        Variant::Best => sequential_laterate_best(&graph, p, a.budget, &opts)?,
    };
    res.write_csv(output(cli)?)?;
    let mut diag = match &a.latent {
        Some(path) => {
            let latent = read_config(path)?;
            let check = verify_perturbation_bound(&latent, &graph, &res)?;
            let mut d = res.diagnostics_json(check.ratio);
            d["embedding_error"] = json!(embedding_error(&res.config, &latent)?);
            d["eps_sq_sum"] = json!(check.eps_sq_sum);
            d
        }
        None => res.diagnostics_json(None),
    };
    diag["variant"] = json!(match a.variant {
        Variant::First => "first",
        Variant::Best => "best",
    });
    write_json(&diag, a.diagnostics.as_deref())
}

fn stress_min(cli: &Cli, a: &StressMinArgs) -> CmdResult {
    let (graph, p) = read_graph(&a.graph, a.p)?;
    let mut opt: OptimizerConfig = match &cli.config {
        Some(path) => serde_json::from_reader(open(path)?)?,
        None => OptimizerConfig::default(),
    };
    opt.seed = cli.seed;
    opt.trace = opt.trace || a.trace.is_some();
    if let Some(v) = a.max_iters {
        opt.max_iters = v;
    }
    if let Some(v) = a.step_size {
        opt.step_size = v;
    }
    if let Some(v) = a.rel_tol {
        opt.rel_tol = v;
    }
    let init = match (&a.init_file, a.init) {
        (Some(path), _) => Init::Given(read_config(path)?),
        (None, InitArg::Auto) => Init::Auto,
        (None, InitArg::Lateration) => Init::SequentialLateration,
        (None, InitArg::Random) => Init::Random,
    };
    let rep = match a.method {
        Optimizer::Gd => minimize_gd(&graph, p, &init, &opt)?,
        Optimizer::Smacof => minimize_smacof(&graph, p, &init, &opt)?,
    };
    rep.config.write_csv(output(cli)?)?;
    if let Some(path) = &a.trace {
        rep.write_trace_csv(create(path)?)?;
    }
    let mut summary = json!({
        "method": match a.method { Optimizer::Gd => "gd", Optimizer::Smacof => "smacof" },
        "iterations": rep.iterations,
        "converged": rep.converged,
        "initial_s_stress": rep.initial_s_stress,
        "s_stress": rep.s_stress,
        "raw_stress": rep.raw_stress,
    });
    if let Some(path) = &a.latent {
        summary["embedding_error"] = json!(embedding_error(&rep.config, &read_config(path)?)?);
    }
    write_json(&summary, None)
}

fn bound(cli: &Cli, a: &BoundArgs) -> CmdResult {
    let latent = read_config(&a.latent)?;
    let (graph, p) = read_graph(&a.graph, Some(latent.dim()))?;
    let opts = lateration_options(cli, a.minimal_seed, p);
    let ordering = find_laterative_ordering(&graph, p, &opts.clique)?.ok_or(Error::NotLaterable)?;
    let b = theory_bound(&latent, &ordering, a.c1, a.c2, p)?;
    let mut out = output(cli)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&b)?)?;
    Ok(())
}

fn exp(cli: &Cli, a: &ExpArgs) -> CmdResult {
    let mut scenarios = match (&a.preset, &cli.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => ScenarioConfig::from_json(&std::fs::read_to_string(path)?)?,
        (Some(_), Some(_)) => return Err(invalid("give either --preset or --config, not both")),
        (None, None) => return Err(invalid("exp needs --preset or --config")),
    };
    Overrides {
        n: a.n,
        trials: a.trials,
        radius: a.radius,
        sigma2: a.sigma2.clone(),
        methods: a.methods.clone(),
        // a scenario file carries its own seeds unless --seed is given explicitly
        seed: (a.preset.is_some() || cli.seed != 0).then_some(cli.seed),
    }
    .apply(&mut scenarios);
    for s in &scenarios {
        s.validate()?;
    }
    let rows = run_experiment(&scenarios)?;
    write_results_csv(&rows, output(cli)?)?;
    if let Some(path) = &a.svg {
        let title = a.preset.as_deref().unwrap_or("experiment");
        write_svg_scatter(&rows, title, create(path)?)?;
    }
    let mut summary = Vec::new();
    for s in &scenarios {
        let mine: Vec<_> = rows.iter().filter(|r| r.scenario == s.name).cloned().collect();
        for &m in &s.methods {
            let times: Vec<f64> = mine.iter().filter(|r| r.method == m).map(|r| r.wall_time_ms).collect();
            summary.push(json!({
                "scenario": s.name,
                "method": m,
                "slope": loglog_slope(&mine, m).ok().map(|f| f.slope),
                "median_error": level_medians(&mine, m).iter().map(|l| l.embedding_error).collect::<Vec<_>>(),
                "median_wall_time_ms": (!times.is_empty()).then(|| median(&times)),
            }));
        }
    }
    write_json(&json!(summary), None)
}

fn plot(cli: &Cli, a: &PlotArgs) -> CmdResult {
    let rows = read_results_csv(open(&a.results)?)?;
    write_svg_scatter(&rows, &a.title, output(cli)?)?;
    Ok(())
}
