//! `pcdenoise` command-line tool.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pcdenoise::bench::{run_benchmark, sample_shape, BenchPlan, Shape};
use pcdenoise::fields::{build_mls_field, FieldAtlas, OracleField, ProviderSpec};
use pcdenoise::geometry::{build_knn_graph, io, normalize, NormTransform, PointCloud};
use pcdenoise::learned::{train_field, CleanReference, LearnedField, PerceptronParams, TrainConfig};
use pcdenoise::metrics::{MetricReport, Provenance};
use pcdenoise::noise::{add_noise, NoiseKind, NoiseSpec};
use pcdenoise::solver::{denoise, AscentConfig};
use pcdenoise::{Error, Result};

use config::FileConfig;

const DEFAULT_KNN: usize = 4;

#[derive(Parser)]
#[command(name = "pcdenoise", version, about = "Point cloud denoising by momentum gradient ascent")]
struct Cli {
    /// Log filter for stderr (error, warn, info, debug, trace); RUST_LOG overrides.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a clean cloud from a built-in shape or an OFF mesh.
    Sample(SampleArgs),
    /// Perturb a cloud with seeded per-axis noise.
    AddNoise(AddNoiseArgs),
    /// Denoise a cloud by gradient ascent over a field.
    Denoise(DenoiseArgs),
    /// Chamfer and point-to-mesh distances against a clean reference.
    Metric(MetricArgs),
    /// Run a benchmark plan and write results.csv and results.json.
    Benchmark(BenchmarkArgs),
    /// Train a perceptron gradient field.
    TrainField(TrainArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// sphere, cube, torus, plane, or a path to a .off mesh.
    #[arg(long)]
    shape: Shape,
    /// Number of points.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the shape's mesh as OFF.
    #[arg(long)]
    mesh_out: Option<PathBuf>,
}

#[derive(Args)]
struct AddNoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// gaussian, laplace or uniform [default: gaussian]
    #[arg(long)]
    kind: Option<NoiseKind>,
    /// Noise scale as a fraction of the bounding radius [default: 0.02]
    #[arg(long)]
    level: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// mls, oracle:<mesh.off> or learned:<model> [default: mls]
    #[arg(long)]
    field: Option<String>,
    /// Number of steps T [default: 15]
    #[arg(long)]
    steps: Option<usize>,
    /// Momentum weight in (0, 1]; 1 is classical ascent [default: 0.9]
    #[arg(long)]
    alpha: Option<f64>,
    /// Step size [default: 0.2]
    #[arg(long)]
    beta: Option<f64>,
    /// Step decay in (0, 1] [default: 0.95]
    #[arg(long)]
    gamma: Option<f64>,
    /// Ensemble neighborhood size [default: 4]
    #[arg(long)]
    knn: Option<usize>,
    /// Classical ascent (alpha = 1).
    #[arg(long)]
    classical: bool,
    /// Work in the input's own frame instead of centering and scaling it
    /// to unit radius.
    #[arg(long)]
    no_normalize: bool,
    /// Write per-step statistics as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    denoised: PathBuf,
    #[arg(long)]
    clean: PathBuf,
    /// Reference mesh for point-to-mesh distance.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Clean reference: a .off mesh or an .xyz cloud.
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    noisy: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Sampling width as a fraction of the bounding radius [default: 0.03]
    #[arg(long)]
    sigma_s: Option<f64>,
    /// [default: 16]
    #[arg(long)]
    samples_per_anchor: Option<usize>,
    /// [default: 0.1]
    #[arg(long)]
    learning_rate: Option<f64>,
    /// [default: 20]
    #[arg(long)]
    epochs: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Hidden layer widths, comma separated [default: 64,64]
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Feature neighborhood size [default: 48]
    #[arg(long)]
    fit_k: Option<usize>,
    /// Disable centering and scaling to unit radius.
    #[arg(long)]
    no_normalize: bool,
    /// Write per-epoch losses as JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn echo(what: &str, value: &impl Serialize) {
    log::info!("{what}: {}", serde_json::to_string(value).expect("config serializes"));
}

fn write_json_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for item in items {
        let line = serde_json::to_string(&item).expect("record serializes");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn sample(args: SampleArgs) -> Result<()> {
    let (cloud, mesh) = sample_shape(&args.shape, args.n, args.seed)?;
    io::write_xyz(&args.out, cloud.points())?;
    if let Some(path) = &args.mesh_out {
        io::write_off(path, &mesh)?;
    }
    log::info!("wrote {} points sampled on {}", cloud.len(), args.shape);
    Ok(())
}

fn add_noise_cmd(args: AddNoiseArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let spec = NoiseSpec {
        kind: args.kind.or(file.noise.kind).unwrap_or(NoiseKind::Gaussian),
        level: args.level.or(file.noise.level).unwrap_or(0.02),
        seed: args.seed.or(file.noise.seed).unwrap_or(0),
    };
    echo("noise", &spec);
    let cloud = io::read_xyz(&args.input)?;
    let noisy = add_noise(&cloud, &spec)?;
    io::write_xyz(&args.out, noisy.points())
}

#[derive(Serialize)]
struct DenoiseSettings {
    field: String,
    knn: usize,
    normalize: bool,
    ascent: AscentConfig,
}

fn denoise_cmd(args: DenoiseArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let d = AscentConfig::default();
    let mut ascent = AscentConfig {
        steps: args.steps.or(file.ascent.steps).unwrap_or(d.steps),
        alpha: args.alpha.or(file.ascent.alpha).unwrap_or(d.alpha),
        beta: args.beta.or(file.ascent.beta).unwrap_or(d.beta),
        gamma: args.gamma.or(file.ascent.gamma).unwrap_or(d.gamma),
    };
    if args.classical {
        if args.alpha.is_some_and(|a| a != 1.0) {
            return Err(Error::InvalidInput("--classical contradicts --alpha".into()));
        }
        ascent.alpha = 1.0;
    }
    let settings = DenoiseSettings {
        field: args.field.or(file.field).unwrap_or_else(|| "mls".into()),
        knn: args.knn.or(file.knn).unwrap_or(DEFAULT_KNN),
        normalize: !args.no_normalize && file.normalize.unwrap_or(true),
        ascent,
    };
    ascent.validate()?;
    let provider: ProviderSpec = settings.field.parse()?;
    echo("denoise", &settings);

    let input = io::read_xyz(&args.input)?;
    let (cloud, transform) = if settings.normalize {
        normalize(&input)?
    } else {
        (input, NormTransform::IDENTITY)
    };
    let graph = build_knn_graph(&cloud, settings.knn)?;
    let field = match &provider {
        ProviderSpec::Mls => FieldAtlas::Mls(build_mls_field(&cloud, &graph)?),
        ProviderSpec::Oracle(path) => {
            let mesh = io::read_off(path)?.transformed(&transform);
            FieldAtlas::Oracle(OracleField::new(Arc::new(mesh), cloud.len())?)
        }
        ProviderSpec::Learned(path) => {
            let params = Arc::new(PerceptronParams::load(path)?);
            FieldAtlas::Learned(LearnedField::for_cloud(params, &cloud, &graph)?)
        }
    };
    let (out, trajectory) = denoise(&cloud, &field, &graph, &ascent, args.trace.is_some())?;
    io::write_xyz(&args.out, out.points())?;
    if let (Some(path), Some(t)) = (&args.trace, trajectory) {
        write_json_lines(path, &t.steps)?;
    }
    log::info!("denoised {} points in {} steps", out.len(), ascent.steps);
    Ok(())
}

fn metric_cmd(args: MetricArgs) -> Result<()> {
    let denoised = io::read_xyz(&args.denoised)?;
    let clean = io::read_xyz(&args.clean)?;
    let mesh = args.mesh.as_deref().map(io::read_off).transpose()?;
    let provenance = Provenance {
        denoised: Some(args.denoised.display().to_string()),
        clean: Some(args.clean.display().to_string()),
        mesh: args.mesh.as_ref().map(|p| p.display().to_string()),
        config_hash: None,
    };
    let report = MetricReport::compute(&denoised, &clean, mesh.as_ref(), provenance)?;
    match report.p2m_display() {
        Some(p2m) => log::info!("CD x1e4 = {:.6}, P2M x1e4 = {p2m:.6}", report.cd_display()),
        None => log::info!("CD x1e4 = {:.6}", report.cd_display()),
    }
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json + "\n").map_err(io_err(path))?;
    }
    Ok(())
}

fn benchmark_cmd(args: BenchmarkArgs) -> Result<()> {
    let mut plan = BenchPlan::load(&args.plan)?;
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    echo("plan", &plan);
    log::info!("plan hash {}", plan.hash());
    let result = run_benchmark(&plan)?;
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    result.write_dir(&args.out)?;
    log::info!("{} rows ({failed} failed) written to {}", result.rows.len(), args.out.display());
    Ok(())
}

fn train_cmd(args: TrainArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?.train;
    let d = TrainConfig::default();
    let config = TrainConfig {
        sigma_s: args.sigma_s.or(file.sigma_s).unwrap_or(d.sigma_s),
        samples_per_anchor: args.samples_per_anchor.or(file.samples_per_anchor).unwrap_or(d.samples_per_anchor),
        learning_rate: args.learning_rate.or(file.learning_rate).unwrap_or(d.learning_rate),
        epochs: args.epochs.or(file.epochs).unwrap_or(d.epochs),
        batch_size: args.batch_size.or(file.batch_size).unwrap_or(d.batch_size),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        hidden: args.hidden.or(file.hidden).unwrap_or(d.hidden),
        fit_k: args.fit_k.or(file.fit_k).unwrap_or(d.fit_k),
    };
    echo("train", &config);
    let noisy = io::read_xyz(&args.noisy)?;
    let (noisy, transform) = if args.no_normalize {
        (noisy, NormTransform::IDENTITY)
    } else {
        normalize(&noisy)?
    };
    let is_mesh = args.clean.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"));
    let reference = if is_mesh {
        CleanReference::Mesh(Arc::new(io::read_off(&args.clean)?.transformed(&transform)))
    } else {
        let clean = io::read_xyz(&args.clean)?;
        let moved = clean.points().iter().map(|p| transform.apply(p)).collect();
        CleanReference::from_cloud(&PointCloud::new(moved)?)
    };
    let model = train_field(&reference, &noisy, &config)?;
    model.params.save(&args.out)?;
    if let Some(path) = &args.log {
        write_json_lines(path, &model.log)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::AddNoise(a) => add_noise_cmd(a),
        Command::Denoise(a) => denoise_cmd(a),
        Command::Metric(a) => metric_cmd(a),
        Command::Benchmark(a) => benchmark_cmd(a),
        Command::TrainField(a) => train_cmd(a),
    }
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .parse_env("RUST_LOG")
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
