//! `compmotion` command-line driver.
//!
//! Exit codes: 0 success, 1 validation failure, 2 parse/config/IO error,
//! 3 degenerate cells under `--strict`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use compmotion::heatmap::{self, ColorScale, HeatmapOptions};
use compmotion::ingest::{self, CsvSchemaConfig};
use compmotion::model::{validate_dataset, ValidationOptions};
use compmotion::pipeline::{self, compute_orientation, PipelineConfig};
use compmotion::synth::{self, SynthParams};
use compmotion::{DatasetF64, GridNumbering, GridSpec, Orientation};

#[derive(Parser, Debug)]
#[command(name = "compmotion", version, about = "Compensatory-motion metrics over a 7x7 reaching grid")]
struct Cli {
    /// TOML config (NROM path, schema, grid, pipeline options).
    #[arg(long, global = true, env = "COMPMOTION_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a dataset is complete and well formed.
    Validate(DatasetArgs),
    /// Compute per-target metrics and write metrics CSVs.
    Compute(ComputeArgs),
    /// Render one metrics column as a heatmap.
    Render(RenderArgs),
    /// Generate a synthetic dataset in the canonical layout.
    Synth(SynthArgs),
    /// Compute, then render L, A, J, H and I heatmaps.
    Report(ComputeArgs),
}

#[derive(Args, Debug, Clone)]
struct DatasetArgs {
    /// Dataset directory or a single reach CSV.
    dataset: PathBuf,
    /// Column/unit schema (TOML); canonical layout when omitted.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// NROM table; defaults to the config entry, then `<dataset>/nrom.csv`.
    #[arg(long)]
    nrom: Option<PathBuf>,
    /// Treat missing cells as warnings.
    #[arg(long)]
    allow_partial: bool,
    /// Number of subjects a complete dataset must contain.
    #[arg(long, default_value_t = 7)]
    subjects: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    Horizontal,
    Vertical,
    Both,
}

impl OrientationArg {
    fn list(self) -> Vec<Orientation> {
        match self {
            OrientationArg::Horizontal => vec![Orientation::Horizontal],
            OrientationArg::Vertical => vec![Orientation::Vertical],
            OrientationArg::Both => Orientation::ALL.to_vec(),
        }
    }
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, value_enum, default_value = "both")]
    orientation: OrientationArg,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Worker threads (0 = automatic). Outputs are identical for any value.
    #[arg(long)]
    jobs: Option<usize>,
    /// Exit with code 3 if any target has a degenerate separability.
    #[arg(long)]
    strict: bool,
    /// Z-score features before separability and clustering.
    #[arg(long)]
    standardize: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Svg,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NumberingArg {
    TopLeft,
    TopRight,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// A metrics CSV written by `compute`.
    metrics: PathBuf,
    /// Column to draw, e.g. `I`, `L`, `H_e`, `dA_s_z`.
    #[arg(long)]
    metric: String,
    /// Output file; `-` writes to stdout.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "svg")]
    format: Format,
    /// `auto` or `fixed:<lo>,<hi>`.
    #[arg(long, default_value = "auto")]
    scale: String,
    #[arg(long)]
    title: Option<String>,
    /// Overrides the config's grid numbering.
    #[arg(long, value_enum)]
    numbering: Option<NumberingArg>,
    #[arg(long, default_value_t = 2)]
    decimals: usize,
    /// ANSI colours in text output.
    #[arg(long)]
    ansi: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Generator parameters (TOML); defaults otherwise.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Compensation gain.
    #[arg(long)]
    gain: Option<f64>,
    /// Per-subject strategy noise.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    nrom: Option<PathBuf>,
    schema: Option<PathBuf>,
    grid: GridSpec,
    pipeline: PipelineConfig,
}

/// An error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

type CmdResult = Result<(), Failure>;

fn load_config(path: Option<&Path>) -> anyhow::Result<(Config, Option<PathBuf>)> {
    let Some(path) = path else {
        return Ok((Config::default(), None));
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let cfg: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    cfg.grid.validate()?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

/// Paths in the config are relative to the config file.
fn resolve(base: &Option<PathBuf>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn load(args: &DatasetArgs, cfg: &Config, base: &Option<PathBuf>) -> anyhow::Result<DatasetF64> {
    let schema_path = args.schema.clone().or_else(|| cfg.schema.as_ref().map(|p| resolve(base, p)));
    let schema = match schema_path {
        Some(p) => CsvSchemaConfig::from_path(&p)?,
        None => CsvSchemaConfig::canonical(),
    };
    let nrom = args.nrom.clone().or_else(|| cfg.nrom.as_ref().map(|p| resolve(base, p)));
    let d = ingest::load_dataset(&args.dataset, &schema, nrom.as_deref())
        .with_context(|| format!("loading {}", args.dataset.display()))?;
    Ok(d)
}

fn validated(args: &DatasetArgs, cfg: &Config, base: &Option<PathBuf>) -> Result<DatasetF64, Failure> {
    let d = load(args, cfg, base)?;
    let opts = ValidationOptions { expected_subjects: args.subjects, allow_partial: args.allow_partial };
    let report = validate_dataset(&d, &opts);
    if !report.passed() {
        eprint!("{report}");
        return Err(Failure::new(1, anyhow!("dataset failed validation")));
    }
    if report.warning_count() > 0 {
        eprint!("{report}");
    }
    Ok(d)
}

fn cmd_validate(args: &DatasetArgs, cfg: &Config, base: &Option<PathBuf>) -> CmdResult {
    let d = load(args, cfg, base)?;
    let opts = ValidationOptions { expected_subjects: args.subjects, allow_partial: args.allow_partial };
    let report = validate_dataset(&d, &opts);
    if report.passed() {
        print!("{report}");
        Ok(())
    } else {
        eprint!("{report}");
        Err(Failure::new(1, anyhow!("dataset failed validation")))
    }
}

fn cmd_compute(args: &ComputeArgs, cfg: &Config, base: &Option<PathBuf>) -> Result<Vec<PathBuf>, Failure> {
    let d = validated(&args.data, cfg, base)?;
    let mut pcfg = cfg.pipeline.clone();
    if let Some(j) = args.jobs {
        pcfg.jobs = j;
    }
    pcfg.group.standardize |= args.standardize;

    let mut written = Vec::new();
    let mut degenerate = 0;
    for o in args.orientation.list() {
        let m = compute_orientation(&d, o, &pcfg).map_err(|e| Failure::new(1, e))?;
        for w in &m.warnings {
            eprintln!("warning ({}): {w}", o.name());
        }
        degenerate += m.targets.iter().filter(|t| t.separability_flagged()).count();
        let files =
            m.write_files(&args.out, &cfg.grid).with_context(|| format!("writing into {}", args.out.display()))?;
        let metrics_path = &files[0];
        for col in ["L", "A", "J", "H", "I"] {
            let v = pipeline::read_metric_column(metrics_path, col).map_err(anyhow::Error::from)?;
            match pipeline::column_mean(&v) {
                Some(mean) => println!("{:<10} mean {col} = {mean:.4}", o.name()),
                None => println!("{:<10} mean {col} = n/a", o.name()),
            }
        }
        written.extend(files);
    }
    if args.strict && degenerate > 0 {
        return Err(Failure::new(3, anyhow!("{degenerate} target(s) with degenerate separability")));
    }
    Ok(written)
}

fn grid_for(cfg: &Config, numbering: Option<NumberingArg>) -> GridSpec {
    let mut grid = cfg.grid.clone();
    match numbering {
        Some(NumberingArg::TopLeft) => grid.numbering = GridNumbering::RowMajorTopLeft,
        Some(NumberingArg::TopRight) => grid.numbering = GridNumbering::RowMajorTopRight,
        None => {}
    }
    grid
}

fn render_to_string(
    values: &[Option<f64>],
    grid: &GridSpec,
    format: Format,
    opts: &HeatmapOptions,
) -> anyhow::Result<String> {
    Ok(match format {
        Format::Svg => heatmap::render_svg(values, grid, opts)?,
        Format::Csv => heatmap::render_csv(values, grid)?,
        Format::Text => heatmap::render_text(values, grid, opts)?,
    })
}

fn cmd_render(args: &RenderArgs, cfg: &Config) -> CmdResult {
    let values = pipeline::read_metric_column(&args.metrics, &args.metric).map_err(anyhow::Error::from)?;
    let scale: ColorScale = args.scale.parse().map_err(anyhow::Error::from)?;
    let opts = HeatmapOptions {
        title: args.title.clone(),
        scale,
        decimals: args.decimals,
        ansi: args.ansi,
        ..Default::default()
    };
    let grid = grid_for(cfg, args.numbering);
    let body = render_to_string(&values, &grid, args.format, &opts).map_err(|e| Failure::new(1, e))?;
    if args.out.as_os_str() == "-" {
        print!("{body}");
    } else {
        std::fs::write(&args.out, body).with_context(|| format!("writing {}", args.out.display()))?;
    }
    Ok(())
}

fn cmd_report(args: &ComputeArgs, cfg: &Config, base: &Option<PathBuf>) -> CmdResult {
    let strict_failure = match cmd_compute(args, cfg, base) {
        Ok(_) => None,
        Err(f) if f.code == 3 => Some(f),
        Err(f) => return Err(f),
    };
    for o in args.orientation.list() {
        let metrics = args.out.join(format!("metrics_{}.csv", o.name()));
        for col in ["L", "A", "J", "H", "I"] {
            let values = pipeline::read_metric_column(&metrics, col).map_err(anyhow::Error::from)?;
            let opts = HeatmapOptions { title: Some(format!("{col} ({})", o.name())), ..Default::default() };
            let out = args.out.join(format!("heatmap_{}_{col}.svg", o.name()));
            match heatmap::render_svg(&values, &cfg.grid, &opts) {
                Ok(svg) => std::fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?,
                Err(e) => eprintln!("skipping {}: {e}", out.display()),
            }
        }
    }
    strict_failure.map_or(Ok(()), Err)
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let mut p = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<SynthParams>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SynthParams::default(),
    };
    if let Some(s) = args.seed {
        p.seed = s;
    }
    if let Some(g) = args.gain {
        p.compensation_gain = g;
    }
    if let Some(n) = args.noise {
        p.strategy_noise = n;
    }
    let d: DatasetF64 = synth::generate_dataset(&p).map_err(|e| Failure::new(1, e))?;
    ingest::write_dataset(&args.out, &d).map_err(anyhow::Error::from)?;
    println!("wrote {} reaches for {} subjects to {}", d.records.len(), d.subjects.len(), args.out.display());
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let (cfg, base) = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Validate(a) => cmd_validate(a, &cfg, &base),
        Command::Compute(a) => cmd_compute(a, &cfg, &base).map(|_| ()),
        Command::Render(a) => cmd_render(a, &cfg),
        Command::Synth(a) => cmd_synth(a),
        Command::Report(a) => cmd_report(a, &cfg, &base),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            // Library errors often inline their source already.
            let mut msg = String::new();
            for cause in f.error.chain().map(|c| c.to_string()) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(f.code)
        }
    }
}
