//! `iagl` command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input or usage, 2 on numerical
//! failure. Diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iagl::bench::{bound_curves, run_experiment, sample_locations, variogram_covariance, ExperimentConfig, VariogramSpec};
use iagl::gft::{compute_gft, sample_gwss, PsdModel};
use iagl::io;
use iagl::learn::{learn, LearnConfig, WeightInit};
use iagl::solver::{objective_of, Mode};
use iagl::verify::{bound_report, kkt_report, trim_graph, BOUND_TOL};
use iagl::{CovarianceMatrix64, Error, Graph64};
use ndarray::{Array1, Array2};

#[derive(Parser, Debug)]
#[command(name = "iagl", version, about = "Graph Laplacian and vertex importance learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample locations and write an exact variogram covariance.
    Synth(SynthArgs),
    /// Learn a graph from a covariance CSV.
    Learn(LearnArgs),
    /// KKT and edge-bound checks for a learned graph.
    Verify(VerifyArgs),
    /// Graph Fourier spectrum of a graph, optionally transforming signals.
    Gft(GftArgs),
    /// Draw graph-stationary signals from a graph model.
    Sample(SampleArgs),
    /// Multi-trial variogram benchmark table.
    Experiment(ExperimentArgs),
    /// Edge-weight upper-bound curves for variogram covariances.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long)]
    range: f64,
    #[arg(long, default_value_t = 10.0)]
    sill: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_cov: PathBuf,
    #[arg(long)]
    out_points: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Joint,
    Baseline,
}

impl From<Method> for Mode {
    fn from(m: Method) -> Self {
        match m {
            Method::Joint => Mode::Joint,
            Method::Baseline => Mode::Baseline,
        }
    }
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    cov: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Joint)]
    method: Method,
    #[arg(long, default_value_t = 1e-4)]
    qmin: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    q_init: f64,
    #[arg(long, default_value_t = 50)]
    refresh_every: usize,
    /// Vertex locations for the Gaussian-kernel initialization.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Drop pairs with nonpositive covariance before learning.
    #[arg(long)]
    screen: bool,
    #[arg(long)]
    out: PathBuf,
    /// Sidecar metadata; defaults to `<out>.meta.json`.
    #[arg(long)]
    out_meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cov: PathBuf,
    /// KKT residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Edge-bound violation tolerance.
    #[arg(long, default_value_t = BOUND_TOL)]
    bound_tol: f64,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    out_kkt: Option<PathBuf>,
    #[arg(long)]
    out_bounds: Option<PathBuf>,
    /// Per-edge bound table (i,j,d,w,bound,violated).
    #[arg(long)]
    bounds_csv: Option<PathBuf>,
    /// Remove edges violating their bound.
    #[arg(long)]
    trim: bool,
    /// Where the trimmed graph goes; defaults to rewriting `--graph`.
    #[arg(long)]
    out_graph: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GftArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out_lambdas: PathBuf,
    #[arg(long)]
    out_modes: PathBuf,
    /// Signals to transform, one per row.
    #[arg(long, requires = "out_coeffs")]
    signals: Option<PathBuf>,
    #[arg(long, requires = "signals")]
    out_coeffs: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Psd {
    /// 1 / (1 + lambda)
    Proposed,
    /// 0 at lambda = 0, 1 / lambda otherwise
    Combinatorial,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Psd::Proposed)]
    psd: Psd,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.1,0.2,1")]
    ranges: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "baseline,joint")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 10.0)]
    sill: f64,
    #[arg(long, default_value_t = 1e-4)]
    qmin: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.1,0.2,1")]
    ranges: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    sill: f64,
    #[arg(long, default_value_t = 1.5)]
    d_max: f64,
    #[arg(long, default_value_t = 301)]
    samples: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn dispatch(command: Command) -> iagl::Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Learn(a) => learn_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Gft(a) => gft(a),
        Command::Sample(a) => sample(a),
        Command::Experiment(a) => experiment(a),
        Command::Bounds(a) => bounds(a),
    }
}

fn synth(a: SynthArgs) -> iagl::Result<()> {
    if a.n < 2 {
        return Err(Error::InvalidConfig("--n must be at least 2".into()));
    }
    let sample = sample_locations(a.n, a.seed);
    let spec = VariogramSpec::new(a.sill, a.range)?;
    let s: CovarianceMatrix64 = variogram_covariance(&sample, &spec)?;
    io::write_covariance_csv(&a.out_cov, &s)?;
    if let Some(p) = &a.out_points {
        io::write_points_csv(p, &sample.points)?;
    }
    Ok(())
}

fn learn_cmd(a: LearnArgs) -> iagl::Result<()> {
    let s = io::read_covariance_csv(&a.cov)?;
    let init = match &a.points {
        Some(p) => WeightInit::GaussianKernel(io::read_points_csv(p)?),
        None => WeightInit::UniformOverN,
    };
    let cfg = LearnConfig {
        method: a.method.into(),
        q_min: a.qmin,
        stop_tol: a.tol,
        max_epochs: a.max_epochs,
        init,
        q_init: a.q_init,
        refresh_every: a.refresh_every,
        screen: a.screen,
        kkt_tol: None,
    };
    let res = learn(&s, &cfg)?;
    eprintln!(
        "{}: objective {} after {} epochs ({}), {} edges, {:.3}s",
        res.method.name(),
        res.objective,
        res.epochs_run,
        if res.converged { "converged" } else { "max epochs reached" },
        res.graph.edges().len(),
        res.wall_time_seconds
    );
    io::write_graph_json(&a.out, &res.graph)?;
    let meta_path = a.out_meta.unwrap_or_else(|| sidecar_path(&a.out));
    io::write_json(&meta_path, &io::ResultMeta::from(&res))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.meta.json"))
}

fn load_pair(graph: &Path, cov: &Path) -> iagl::Result<(Graph64, CovarianceMatrix64)> {
    let g = io::read_graph_json(graph)?;
    let s = io::read_covariance_csv(cov)?;
    if g.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: s.n(),
        });
    }
    Ok((g, s))
}

fn verify(a: VerifyArgs) -> iagl::Result<()> {
    let (g, s) = load_pair(&a.graph, &a.cov)?;
    let points = a.points.as_deref().map(io::read_points_csv).transpose()?;
    if let Some(p) = &points {
        if p.len() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                got: p.len(),
            });
        }
    }
    let kkt = kkt_report(&g, &s, a.tol)?;
    let bounds = bound_report(&g, &s, a.bound_tol)?;
    eprintln!(
        "kkt: {} (edge residual {:e}, vertex residual {:e}, {} violations)",
        if kkt.pass { "pass" } else { "FAIL" },
        kkt.max_edge_residual,
        kkt.max_vertex_residual,
        kkt.complementary_slackness_violations
    );
    eprintln!(
        "bounds: {} of {} applicable edges violated (max excess {:e})",
        bounds.violated, bounds.applicable, bounds.max_excess
    );
    match &a.out_kkt {
        Some(p) => io::write_json(p, &kkt)?,
        None => println!("{}", serde_json::to_string_pretty(&kkt)?),
    }
    if let Some(p) = &a.out_bounds {
        io::write_json(p, &bounds)?;
    }
    if let Some(p) = &a.bounds_csv {
        io::write_text(p, &io::format_bound_table_csv(&bounds, points.as_deref()))?;
    }
    if a.trim {
        let trimmed = trim_graph(&g, &bounds)?;
        let objective = objective_of(&trimmed, &s)?;
        eprintln!("trim: removed {} edges, objective {}", bounds.violated, objective);
        let dest = a.out_graph.as_deref().unwrap_or(&a.graph);
        io::write_graph_json(dest, &trimmed)?;
    }
    Ok(())
}

fn importances_or_ones(g: &Graph64) -> Array1<f64> {
    match g.q() {
        Some(q) => Array1::from(q.to_vec()),
        None => Array1::ones(g.n()),
    }
}

fn gft(a: GftArgs) -> iagl::Result<()> {
    let g = io::read_graph_json(&a.graph)?;
    let spectrum = compute_gft(g.laplacian().view(), importances_or_ones(&g).view())?;
    io::write_text(&a.out_lambdas, &io::format_lambdas_csv(&spectrum))?;
    io::write_text(&a.out_modes, &io::format_matrix_csv(&spectrum.modes))?;
    if let (Some(input), Some(output)) = (&a.signals, &a.out_coeffs) {
        let x = io::parse_matrix_csv(&io::read_text(input)?)?;
        let mut coeffs = Array2::<f64>::zeros(x.dim());
        for (k, row) in x.rows().into_iter().enumerate() {
            coeffs.row_mut(k).assign(&spectrum.forward(row)?);
        }
        io::write_text(output, &io::format_matrix_csv(&coeffs))?;
    }
    Ok(())
}

fn sample(a: SampleArgs) -> iagl::Result<()> {
    let g = io::read_graph_json(&a.graph)?;
    let spectrum = compute_gft(g.laplacian().view(), importances_or_ones(&g).view())?;
    let psd = match a.psd {
        Psd::Proposed => PsdModel::Proposed,
        Psd::Combinatorial => PsdModel::Combinatorial,
    };
    if a.count == 0 {
        return Err(Error::InvalidConfig("--count must be at least 1".into()));
    }
    let x = sample_gwss(&spectrum, &psd, a.count, a.seed);
    io::write_text(&a.out, &io::format_matrix_csv(&x))
}

fn experiment(a: ExperimentArgs) -> iagl::Result<()> {
    let cfg = ExperimentConfig {
        ranges: a.ranges,
        n: a.n,
        trials: a.trials,
        base_seed: a.seed,
        methods: a.methods.into_iter().map(Mode::from).collect(),
        sill: a.sill,
        learn: LearnConfig {
            q_min: a.qmin,
            stop_tol: a.tol,
            max_epochs: a.max_epochs,
            ..LearnConfig::default()
        },
        parallel: a.parallel.max(1),
    };
    let table = run_experiment(&cfg)?;
    for f in &table.failures {
        eprintln!("warning: {} r={} trial {} excluded: {}", f.method.name(), f.range, f.trial, f.message);
    }
    let unconverged = table.trials.iter().filter(|t| !t.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} trials hit --max-epochs before converging");
    }
    io::write_text(&a.out, &io::format_table_csv(&table))
}

fn bounds(a: BoundsArgs) -> iagl::Result<()> {
    let curves = bound_curves(a.sill, &a.ranges, a.d_max, a.samples);
    io::write_text(&a.out, &io::format_bound_curves_csv(&curves))
}
