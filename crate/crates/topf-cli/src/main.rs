//! Command-line front end: feature extraction, persistence diagrams, the
//! clustering benchmark, and robustness sweeps.
//!
//! Machine-readable output (paths of written files) goes to stdout; logs go
//! to stderr. Exit codes: 0 success, 1 runtime failure, 2 invalid usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use topf::bench::{
    benchmark_csv, benchmark_json, robustness_sweep, run_benchmark, sweep_csv, sweep_json,
    SweepKind,
};
use topf::features::{describe_meta, ComplexChoice, TopfConfig};
use topf::harmonic::WeightScheme;
use topf::persistence::compute_persistence;
use topf::selection::SelectionParams;
use topf::{
    generate_benchmark, load_point_cloud, save_point_cloud, BenchmarkDataset, BenchmarkSpec,
    InputFormat, PointCloud,
};

#[derive(Parser)]
#[command(
    name = "topf",
    version,
    about = "Topological point features for point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-point topological features and write them as CSV.
    Features(FeaturesArgs),
    /// Compute the persistence diagram only and write it as JSON.
    Persistence(PersistenceArgs),
    /// Run the clustering benchmark over the synthetic suite.
    Benchmark(BenchmarkArgs),
    /// Sweep noise or outlier levels and report clustering quality.
    Sweep(SweepArgs),
    /// Generate a synthetic benchmark cloud and write it as CSV.
    Generate(GenerateArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Whitespace,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> InputFormat {
        match f {
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Whitespace => InputFormat::Whitespace,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ComplexArg {
    Auto,
    Alpha,
    Vr,
}

#[derive(Copy, Clone, ValueEnum)]
enum WeightsArg {
    None,
    Triangle,
    Effres,
}

#[derive(Copy, Clone, ValueEnum)]
enum DatasetArg {
    #[value(name = "4Spheres", alias = "4spheres", alias = "fourspheres")]
    FourSpheres,
    #[value(name = "Ellipses", alias = "ellipses")]
    Ellipses,
    #[value(name = "SpheresGrid", alias = "spheresgrid", alias = "spheres+grid")]
    SpheresGrid,
    #[value(name = "HalvedCircle", alias = "halvedcircle")]
    HalvedCircle,
    #[value(
        name = "2Spheres2Circles",
        alias = "2spheres2circles",
        alias = "twospherestwocircles"
    )]
    TwoSpheresTwoCircles,
    #[value(name = "SphereInCircle", alias = "sphereincircle")]
    SphereInCircle,
    #[value(name = "Spaceship", alias = "spaceship")]
    Spaceship,
}

impl From<DatasetArg> for BenchmarkDataset {
    fn from(d: DatasetArg) -> BenchmarkDataset {
        match d {
            DatasetArg::FourSpheres => BenchmarkDataset::FourSpheres,
            DatasetArg::Ellipses => BenchmarkDataset::Ellipses,
            DatasetArg::SpheresGrid => BenchmarkDataset::SpheresGrid,
            DatasetArg::HalvedCircle => BenchmarkDataset::HalvedCircle,
            DatasetArg::TwoSpheresTwoCircles => BenchmarkDataset::TwoSpheresTwoCircles,
            DatasetArg::SphereInCircle => BenchmarkDataset::SphereInCircle,
            DatasetArg::Spaceship => BenchmarkDataset::Spaceship,
        }
    }
}

/// Input selection: a file or a generated benchmark cloud.
#[derive(Args)]
struct InputArgs {
    /// Point-cloud file, one point per row.
    #[arg(long, conflicts_with = "bench")]
    input: Option<PathBuf>,

    /// Input layout.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Treat the final column of the input file as an integer label.
    #[arg(long)]
    labels: bool,

    /// Generate a benchmark dataset instead of reading a file.
    #[arg(long, value_enum)]
    bench: Option<DatasetArg>,

    /// Point-count multiplier for generated datasets.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

impl InputArgs {
    fn load(&self, seed: u64) -> Result<PointCloud> {
        match (&self.input, self.bench) {
            (Some(path), None) => load_point_cloud(path, self.format.into(), self.labels)
                .with_context(|| format!("loading {}", path.display())),
            (None, Some(ds)) => {
                let spec = BenchmarkSpec::new(ds.into(), seed).with_scale(self.scale);
                Ok(generate_benchmark(&spec)?)
            }
            _ => bail!("exactly one of --input or --bench is required"),
        }
    }
}

/// Pipeline hyperparameters. Defaults are the reference values.
#[derive(Args)]
struct PipelineArgs {
    /// Maximum homology dimension (default: ambient dimension - 1).
    #[arg(long)]
    max_dim: Option<usize>,

    /// Filtration: auto picks alpha for ambient dimension <= 3, else VR.
    #[arg(long, value_enum, default_value = "auto")]
    complex: ComplexArg,

    /// Distance cutoff for the VR filtration.
    #[arg(long)]
    max_radius: Option<f64>,

    /// Cap on the total number of simplices.
    #[arg(long, default_value_t = topf::DEFAULT_SIMPLEX_BUDGET)]
    budget: usize,

    /// Interpolation coefficient for the snapshot step.
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,

    /// Use linear instead of geometric interpolation of the snapshot step.
    #[arg(long)]
    linear_interpolation: bool,

    /// Normalization threshold for harmonic representatives.
    #[arg(long, default_value_t = 0.07)]
    delta: f64,

    /// Feature-selection bias toward more features.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,

    /// Quotients at or below this value are decisive cut points.
    #[arg(long, default_value_t = 0.1)]
    min_rel_quot: f64,

    /// Cross-dimension cut-strength guard.
    #[arg(long, default_value_t = 10.0)]
    max_total_quot: f64,

    /// Dimension-0 persistence guard relative to higher dimensions.
    #[arg(long, default_value_t = 5.0)]
    min_0_ratio: f64,

    /// Simplicial weight scheme for the harmonic projection.
    #[arg(long, value_enum, default_value = "triangle")]
    weights: WeightsArg,

    /// Simplex cap for effective-resistance weights (dense pseudoinverse).
    #[arg(long, default_value_t = topf::harmonic::DEFAULT_EFFRES_BUDGET)]
    effres_budget: usize,
}

impl PipelineArgs {
    fn config(&self) -> TopfConfig {
        TopfConfig {
            max_dim: self.max_dim,
            complex: match self.complex {
                ComplexArg::Auto => ComplexChoice::Auto,
                ComplexArg::Alpha => ComplexChoice::Alpha,
                ComplexArg::Vr => ComplexChoice::VietorisRips,
            },
            max_radius: self.max_radius,
            simplex_budget: self.budget,
            lambda: self.lambda,
            linear_interpolation: self.linear_interpolation,
            delta: self.delta,
            selection: SelectionParams {
                beta: self.beta,
                min_rel_quot: self.min_rel_quot,
                max_total_quot: self.max_total_quot,
                min_0_ratio: self.min_0_ratio,
            },
            weights: match self.weights {
                WeightsArg::None => WeightScheme::Unweighted,
                WeightsArg::Triangle => WeightScheme::Triangle,
                WeightsArg::Effres => WeightScheme::EffectiveResistance,
            },
            effres_budget: self.effres_budget,
            dump_harmonic: false,
        }
    }
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    pipeline: PipelineArgs,

    /// Master seed for generated data.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output CSV path.
    #[arg(long, default_value = "topf_features.csv")]
    out: PathBuf,

    /// Metadata JSON path (default: output path with .meta.json).
    #[arg(long)]
    meta: Option<PathBuf>,

    /// Append a "no feature" column 1 - max(row) to the CSV.
    #[arg(long)]
    no_feature_column: bool,

    /// Write the filtration as text ("v0 v1 ... vk : value" per line).
    #[arg(long)]
    dump_filtration: Option<PathBuf>,

    /// Write each harmonic representative as CSV into this directory.
    #[arg(long)]
    dump_harmonic: Option<PathBuf>,
}

#[derive(Args)]
struct PersistenceArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    pipeline: PipelineArgs,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output JSON path.
    #[arg(long, default_value = "topf_diagram.json")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Run every dataset of the suite.
    #[arg(long, conflicts_with = "datasets")]
    all: bool,

    /// Comma-separated dataset names.
    #[arg(long, value_enum, value_delimiter = ',')]
    datasets: Vec<DatasetArg>,

    #[command(flatten)]
    pipeline: PipelineArgs,

    /// Repeats per dataset with distinct derived seeds.
    #[arg(long, default_value_t = 20)]
    repeats: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Point-count multiplier.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,

    #[arg(long, default_value = "topf_benchmark.csv")]
    out_csv: PathBuf,

    #[arg(long, default_value = "topf_benchmark.json")]
    out_json: PathBuf,

    /// Write zeros for wall-clock columns (byte-identical reruns).
    #[arg(long)]
    redact_timings: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Dataset to perturb.
    #[arg(long, value_enum)]
    dataset: DatasetArg,

    /// Perturbation family.
    #[arg(long, value_enum)]
    kind: SweepKindArg,

    /// Grid as start:step:end (inclusive), e.g. 0:0.05:0.25.
    #[arg(long)]
    grid: String,

    #[command(flatten)]
    pipeline: PipelineArgs,

    #[arg(long, default_value_t = 5)]
    repeats: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 1.0)]
    scale: f64,

    #[arg(long, default_value = "topf_sweep.csv")]
    out_csv: PathBuf,

    #[arg(long, default_value = "topf_sweep.json")]
    out_json: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum SweepKindArg {
    Gaussian,
    Outliers,
}

#[derive(Args)]
struct GenerateArgs {
    /// Dataset to generate.
    #[arg(long, value_enum)]
    bench: DatasetArg,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 1.0)]
    scale: f64,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Output path; labels are appended as a final integer column.
    #[arg(long, default_value = "topf_cloud.csv")]
    out: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:step:end, got {spec:?}");
    }
    let start: f64 = parts[0].parse().context("grid start")?;
    let step: f64 = parts[1].parse().context("grid step")?;
    let end: f64 = parts[2].parse().context("grid end")?;
    if !(step > 0.0) || end < start {
        bail!("grid requires step > 0 and end >= start");
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let v = start + step * i as f64;
        if v > end + 1e-12 {
            break;
        }
        grid.push(v);
        i += 1;
    }
    Ok(grid)
}

fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    let pc = args.input.load(args.seed)?;
    let mut config = args.pipeline.config();
    config.dump_harmonic = args.dump_harmonic.is_some();

    if let Some(path) = &args.dump_filtration {
        let max_dim = config.max_dim.unwrap_or_else(|| pc.ambient_dim().saturating_sub(1));
        let fc = match config.complex {
            ComplexChoice::Alpha => topf::build_alpha_filtration(&pc, max_dim)?,
            ComplexChoice::VietorisRips => {
                topf::build_vr_filtration(&pc, max_dim, config.max_radius, config.simplex_budget)?
            }
            ComplexChoice::Auto => {
                if (2..=3).contains(&pc.ambient_dim()) {
                    topf::build_alpha_filtration(&pc, max_dim)?
                } else {
                    topf::build_vr_filtration(&pc, max_dim, config.max_radius, config.simplex_budget)?
                }
            }
        };
        write_file(path, &fc.dump())?;
    }

    let t0 = std::time::Instant::now();
    let result = topf::topf(&pc, &config)?;
    log::info!(
        "computed {} features in {:.3} s",
        result.matrix.n_features(),
        t0.elapsed().as_secs_f64()
    );
    for meta in &result.matrix.meta {
        log::info!("selected {}", describe_meta(meta));
    }
    for cut in &result.cuts {
        log::info!(
            "dimension {}: {} selected, cut quotient {:?}{}",
            cut.dim,
            cut.n_selected,
            cut.cut_quotient,
            if cut.vetoed { " (vetoed)" } else { "" }
        );
    }

    let mut csv = result.matrix.to_csv(&pc);
    if args.no_feature_column {
        // Rebuild with the augmented rows appended as an extra column.
        let mut lines: Vec<String> = Vec::with_capacity(pc.len() + 1);
        let mut header: Vec<String> = (0..pc.ambient_dim()).map(|i| format!("x{i}")).collect();
        header.extend((0..result.matrix.n_features()).map(|i| format!("f{i}")));
        header.push("no_feature".into());
        lines.push(header.join(","));
        for (i, row) in result.matrix.augmented_rows().iter().enumerate() {
            let mut fields: Vec<String> = pc.point(i).iter().map(|c| format!("{c}")).collect();
            fields.extend(row.iter().map(|v| format!("{v}")));
            lines.push(fields.join(","));
        }
        csv = lines.join("\n");
        csv.push('\n');
    }
    write_file(&args.out, &csv)?;

    let meta_path = args.meta.clone().unwrap_or_else(|| {
        let mut p = args.out.clone();
        p.set_extension("meta.json");
        p
    });
    write_file(&meta_path, &result.matrix.metadata_json())?;

    if let Some(dir) = &args.dump_harmonic {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (index, csv) in &result.harmonic_csv {
            write_file(&dir.join(format!("feature_{index}.csv")), csv)?;
        }
    }
    Ok(())
}

fn cmd_persistence(args: &PersistenceArgs) -> Result<()> {
    let pc = args.input.load(args.seed)?;
    let config = args.pipeline.config();
    let max_dim = config
        .max_dim
        .unwrap_or_else(|| pc.ambient_dim().saturating_sub(1));
    let use_alpha = match config.complex {
        ComplexChoice::Alpha => true,
        ComplexChoice::VietorisRips => false,
        ComplexChoice::Auto => (2..=3).contains(&pc.ambient_dim()),
    };
    let fc = if use_alpha {
        topf::build_alpha_filtration(&pc, max_dim)?
    } else {
        topf::build_vr_filtration(&pc, max_dim, config.max_radius, config.simplex_budget)?
    };
    let diagram = compute_persistence(&fc, max_dim)?;
    log::info!(
        "persistence: {} pairs across dimensions 0..={max_dim}",
        diagram.pairs.len()
    );
    write_file(&args.out, &diagram.to_json())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let datasets: Vec<BenchmarkDataset> = if args.all || args.datasets.is_empty() {
        BenchmarkDataset::ALL.to_vec()
    } else {
        args.datasets.iter().map(|&d| d.into()).collect()
    };
    let config = args.pipeline.config();
    let report = run_benchmark(&datasets, &config, args.repeats, args.seed, args.scale);
    for row in &report.rows {
        log::info!(
            "{}: mean ARI {:.3} (std {:.3}) over {} repeats, {} failures",
            row.dataset,
            row.mean_ari,
            row.std_ari,
            row.repeats,
            row.failures
        );
    }
    write_file(&args.out_csv, &benchmark_csv(&report, args.redact_timings))?;
    write_file(&args.out_json, &benchmark_json(&report, args.redact_timings))?;
    let total_failures: usize = report.rows.iter().map(|r| r.failures).sum();
    let total_cells: usize = report.rows.iter().map(|r| r.repeats).sum();
    if total_failures == total_cells && total_cells > 0 {
        bail!("every benchmark cell failed");
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let kind = match args.kind {
        SweepKindArg::Gaussian => SweepKind::Gaussian,
        SweepKindArg::Outliers => SweepKind::Outliers,
    };
    let config = args.pipeline.config();
    let report = robustness_sweep(
        args.dataset.into(),
        kind,
        &grid,
        args.repeats,
        &config,
        args.seed,
        args.scale,
    )?;
    for cell in &report.cells {
        log::info!(
            "level {}: mean ARI {:.3} +- {:.3} ({} failures)",
            cell.level,
            cell.mean_ari,
            cell.ci95,
            cell.failures
        );
    }
    write_file(&args.out_csv, &sweep_csv(&report))?;
    write_file(&args.out_json, &sweep_json(&report))?;
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = BenchmarkSpec::new(args.bench.into(), args.seed).with_scale(args.scale);
    let pc = generate_benchmark(&spec)?;
    save_point_cloud(&pc, &args.out, args.format.into())?;
    println!("{}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Features(args) => cmd_features(args),
        Command::Persistence(args) => cmd_persistence(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
