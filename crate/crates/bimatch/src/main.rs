use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bimatch::experiment::{run_experiment, write_outputs, ExperimentSpec};
use bimatch::formats::{self, OdeSummary};
use bimatch::harness::{self, match_records, MatchSource};
use bimatch::{with_threads, Error, Result};
use bimatch_core::degrees::{sample_conditioned, DEFAULT_MAX_ATTEMPTS};
use bimatch_core::hydro::{integrate, HydroState, KernelKind, OdeSettings};
use bimatch_core::matching::configuration_model;
use bimatch_core::{Criterion, DistributionSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Online matching on bipartite configuration-model graphs.
#[derive(Debug, Parser)]
#[command(name = "bimatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a configuration-model graph and write it as an edge list.
    Gen(GenArgs),
    /// Run a matching criterion and print one record per replication.
    Match(MatchArgs),
    /// Integrate the fluid-limit ODE and print its summary.
    Ode(OdeArgs),
    /// Run a JSON experiment spec.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    Minres,
}

impl Algo {
    fn criterion(self) -> Criterion {
        match self {
            Algo::Greedy => Criterion::Greedy,
            Algo::Minres => Criterion::MinRes,
        }
    }

    fn kernel(self) -> KernelKind {
        match self {
            Algo::Greedy => KernelKind::Greedy,
            Algo::Minres => KernelKind::MinRes,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

/// Degree laws: `--dist` for both sides, or one flag per side.
#[derive(Debug, Args)]
struct Dists {
    /// Degree law of both sides: dirac:<p>, poisson:<lambda> or pmf:<p0>,<p1>,...
    #[arg(long, conflicts_with_all = ["dist_plus", "dist_minus"])]
    dist: Option<DistributionSpec>,
    #[arg(long, requires = "dist_minus")]
    dist_plus: Option<DistributionSpec>,
    #[arg(long, requires = "dist_plus")]
    dist_minus: Option<DistributionSpec>,
}

impl Dists {
    fn resolve(&self) -> Option<(DistributionSpec, DistributionSpec)> {
        match (&self.dist, &self.dist_plus, &self.dist_minus) {
            (Some(d), _, _) => Some((d.clone(), d.clone())),
            (None, Some(p), Some(m)) => Some((p.clone(), m.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    dists: Dists,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Edge-list file to explore.
    #[arg(long, conflicts_with_all = ["joint", "dist", "dist_plus", "dist_minus"])]
    graph: Option<PathBuf>,
    /// Build the graph jointly with the matching instead of exploring it.
    #[arg(long)]
    joint: bool,
    #[command(flatten)]
    dists: Dists,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Nodes per side for sampled graphs.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include measure snapshots (JSON output only).
    #[arg(long)]
    trajectory: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct OdeArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[command(flatten)]
    dists: Dists,
    #[arg(long, default_value_t = OdeSettings::default().h)]
    h: f64,
    #[arg(long, default_value_t = OdeSettings::default().epsilon)]
    epsilon: f64,
    /// Directory receiving summary.json and trajectory.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Spec file, or the name of a bundled spec such as table1.json.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(what.to_string())
}

fn gen(args: GenArgs) -> Result<()> {
    let (plus, minus) = args
        .dists
        .resolve()
        .ok_or_else(|| missing("--dist or --dist-plus/--dist-minus is required"))?;
    let mut rng = harness::rng_at(args.seed, &[]);
    let sample = sample_conditioned(&plus, &minus, args.n, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
    let graph = configuration_model(&sample, &mut rng)?;
    emit(args.out.as_deref(), &formats::edge_list_string(&graph))
}

fn read_graph(path: &Path) -> Result<bimatch_core::BipartiteMultigraph> {
    let file = fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    formats::read_edge_list(BufReader::new(file))
}

fn run_match(args: MatchArgs) -> Result<()> {
    if args.reps == 0 {
        return Err(missing("--reps must be at least 1"));
    }
    let source = match (&args.graph, args.dists.resolve()) {
        (Some(path), _) => MatchSource::Graph(read_graph(path)?),
        (None, Some((xi_plus, xi_minus))) => {
            let n = args
                .n
                .ok_or_else(|| missing("--n is required with sampled graphs"))?;
            if args.joint {
                MatchSource::Joint {
                    xi_plus,
                    xi_minus,
                    n,
                }
            } else {
                MatchSource::Fresh {
                    xi_plus,
                    xi_minus,
                    n,
                }
            }
        }
        (None, None) => return Err(missing("either --graph or a degree law is required")),
    };
    let criterion = args.algo.criterion();
    let records = with_threads(args.threads, || {
        match_records(&source, &criterion, args.reps, args.seed, args.trajectory)
    })??;
    let text = match args.format {
        Format::Csv => formats::records_csv(&records),
        Format::Json => formats::records_json(&records),
    };
    emit(args.out.as_deref(), &text)
}

fn ode(args: OdeArgs) -> Result<()> {
    let (plus, minus) = args
        .dists
        .resolve()
        .ok_or_else(|| missing("--dist or --dist-plus/--dist-minus is required"))?;
    let settings = OdeSettings {
        h: args.h,
        epsilon: args.epsilon,
    };
    let kernel = args.algo.kernel();
    let state = HydroState::from_specs(&plus, &minus)?;
    let run = integrate(&state, &kernel, &settings)?;
    let summary = OdeSummary::new(
        &kernel.to_string(),
        plus.to_string(),
        minus.to_string(),
        &settings,
        &run,
    );
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    if let Some(dir) = &args.out {
        let io = |path: PathBuf| move |e| Error::Io { path, source: e };
        fs::create_dir_all(dir).map_err(io(dir.clone()))?;
        fs::write(dir.join("summary.json"), &json).map_err(io(dir.join("summary.json")))?;
        fs::write(dir.join("trajectory.csv"), formats::trajectory_csv(&run))
            .map_err(io(dir.join("trajectory.csv")))?;
    }
    emit(None, &json)
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.spec)?;
    let outcome = with_threads(args.threads, || run_experiment(&spec))??;
    let written = write_outputs(&spec, &outcome, &args.out)?;
    emit(
        None,
        &format!("{}\n{}\n", written.csv.display(), written.summary.display()),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Match(a) => run_match(a),
        Command::Ode(a) => ode(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
