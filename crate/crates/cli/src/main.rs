use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flatfield::datasets::{self, Jitter, Surface, SurfaceSpec};
use flatfield::export::read_trace;
use flatfield::pipeline::{self, OutputPaths, ReduceConfig};
use flatfield::spectral::component_ratio_trace;
use flatfield::Error;

mod svg;

const EXIT_OUTPUT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INGESTION: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;

/// Flatten a sampled data manifold and read out its intrinsic dimension.
#[derive(Parser)]
#[command(name = "flatfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic surface as CSV.
    Generate(GenerateArgs),
    /// Deform a CSV point cloud until flat and export the embedding.
    Reduce(ReduceArgs),
    /// Plot the PCA component ratios recorded in a trace file.
    TracePlot(TracePlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    HalfCylinder,
    Gaussian,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 12)]
    grid_u: usize,
    #[arg(long, default_value_t = 10)]
    grid_v: usize,
    /// Cylinder radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Cylinder height.
    #[arg(long, default_value_t = 2.5)]
    height: f64,
    /// Gaussian variance (sigma squared).
    #[arg(long, default_value_t = 6.0)]
    variance: f64,
    /// Gaussian peak height.
    #[arg(long, default_value_t = 3.0)]
    peak: f64,
    /// Gaussian sampling half-width.
    #[arg(long, default_value_t = 5.0)]
    half_width: f64,
    /// Grid jitter as a fraction of the spacing.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct ReduceArgs {
    /// Input CSV, one point per row.
    input: PathBuf,
    /// Output prefix for the .embedding.csv, .edges.csv, .trace.csv and .manifest files.
    #[arg(long)]
    out: PathBuf,
    /// key=value settings file (a previous run's manifest works); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also render <prefix>.svg.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha1_amplitude: Option<f64>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    clamp_alpha1_nonnegative: Option<bool>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    trace_pca_every: Option<usize>,
    #[arg(long)]
    ratio_threshold: Option<f64>,
    /// Output dimension (default: the estimated intrinsic dimension).
    #[arg(long)]
    dim: Option<usize>,
}

impl ReduceArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k, val: Option<String>| {
            if let Some(val) = val {
                v.push((k, val));
            }
        };
        put("k", self.k.map(|x| x.to_string()));
        put("alpha1-amplitude", self.alpha1_amplitude.map(|x| x.to_string()));
        put("period", self.period.map(|x| x.to_string()));
        put("alpha2", self.alpha2.map(|x| x.to_string()));
        put("clamp-alpha1-nonnegative", self.clamp_alpha1_nonnegative.map(|x| x.to_string()));
        put("epsilon", self.epsilon.map(|x| x.to_string()));
        put("max-steps", self.max_steps.map(|x| x.to_string()));
        put("trace-pca-every", self.trace_pca_every.map(|x| x.to_string()));
        put("ratio-threshold", self.ratio_threshold.map(|x| x.to_string()));
        put("dim", self.dim.map(|x| x.to_string()));
        v
    }
}

#[derive(clap::Args)]
struct TracePlotArgs {
    trace: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_CONFIG,
            Error::Ingestion { .. } => EXIT_INGESTION,
            Error::Divergence { .. } => EXIT_DIVERGENCE,
            Error::Io(_) => EXIT_OUTPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_OUTPUT,
        message: format!("{}: {e}", path.display()),
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let surface = match args.kind {
        Kind::HalfCylinder => Surface::HalfCylinder {
            radius: args.radius,
            height: args.height,
        },
        Kind::Gaussian => Surface::Gaussian {
            variance: args.variance,
            peak: args.peak,
            half_width: args.half_width,
        },
    };
    let spec = SurfaceSpec {
        surface,
        grid_u: args.grid_u,
        grid_v: args.grid_v,
        jitter: args.jitter.map(|amplitude| Jitter { amplitude, seed: args.seed }),
    };
    let cloud = spec.generate()?;
    datasets::save_csv(&args.out, &cloud).map_err(|e| output_error(&args.out, e))?;
    println!("wrote {} points in R^{} to {}", cloud.len(), cloud.dim(), args.out.display());
    Ok(())
}

fn reduce(args: ReduceArgs) -> Result<(), Failure> {
    let mut config = ReduceConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_CONFIG,
            message: format!("{}: {e}", path.display()),
        })?;
        config
            .apply_settings(&text)
            .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) })?;
    }
    for (key, value) in args.overrides() {
        config.set(key, &value)?;
    }
    config.validate()?;

    let cloud = datasets::load_csv(&args.input)?;
    let reduction = pipeline::reduce(&cloud, &config)?;
    let paths = OutputPaths::from_prefix(&args.out, args.svg);
    pipeline::write_outputs(&paths, &args.input, &cloud, &config, &reduction)
        .map_err(|e| output_error(&args.out, e))?;
    if let Some(svg_path) = &paths.svg {
        let edges: Vec<(usize, usize)> = reduction.embedding.edges.iter().map(|e| (e.from, e.to)).collect();
        fs::write(svg_path, svg::embedding(&reduction.embedding.coordinates, &edges))
            .map_err(|e| output_error(svg_path, e))?;
    }
    let ratios: Vec<String> = reduction.embedding.ratios.iter().take(6).map(|r| format!("{r:.4}")).collect();
    println!(
        "{} points in R^{}: stopped after {} steps ({}); intrinsic dimension {}; ratios {}",
        cloud.len(),
        cloud.dim(),
        reduction.steps,
        reduction.stop_reason,
        reduction.embedding.intrinsic_dimension,
        ratios.join(" ")
    );
    Ok(())
}

fn trace_plot(args: TracePlotArgs) -> Result<(), Failure> {
    let file = fs::File::open(&args.trace).map_err(|e| Failure {
        code: EXIT_INGESTION,
        message: format!("{}: {e}", args.trace.display()),
    })?;
    let trace = read_trace(BufReader::new(file), &args.trace)?;
    let rows = component_ratio_trace(&trace, 6);
    if rows.is_empty() {
        return Err(Failure {
            code: EXIT_INGESTION,
            message: format!(
                "{}: no PCA ratio records (run reduce with --trace-pca-every N)",
                args.trace.display()
            ),
        });
    }
    fs::write(&args.out, svg::ratio_trace(&rows)).map_err(|e| output_error(&args.out, e))?;
    println!("plotted {} traced steps to {}", rows.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Reduce(a) => reduce(a),
        Command::TracePlot(a) => trace_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::debug!("exit code {}", f.code);
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
