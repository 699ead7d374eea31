use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spxeval::analysis::{
    average_curves, correlation_table, multiscale_contour_map, pr_sweep, uniform_thresholds,
    PrCurve, SweepTable, DEFAULT_THRESHOLD_COUNT,
};
use spxeval::color::{fit_compression, mse, reconstruct};
use spxeval::eval::{
    correlation_csv, round_sig, run_eval, run_sweep, EvalConfig, MetricSelection, OutputFormat,
    DEFAULT_EPSILON,
};
use spxeval::io::{read_image, read_label_map, write_image};
use spxeval::model::{boundary_mask, Image};
use spxeval::regularity::region_regularity;
use spxeval::synth::{
    add_boundary_noise, generate, shape_canvas, size_for_area, ShapeKind, ShapeSpec,
};
use spxeval::Error;

/// Evaluate superpixel decompositions: color homogeneity, object adherence
/// and shape regularity.
#[derive(Parser)]
#[command(name = "spxeval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute metrics for one or more decompositions of an image.
    Eval(EvalArgs),
    /// Evaluate several decompositions and correlate regularity with performance.
    Sweep(EvalArgs),
    /// Generate synthetic shapes and tabulate their circularity and SRC.
    Shapes(ShapesArgs),
    /// Fit per-region cubic polynomials and report the reconstruction MSE.
    Compress(CompressArgs),
    /// Average boundaries over scales and sweep precision/recall thresholds.
    Contours(ContoursArgs),
    /// Correlation table of a saved sweep (JSON written by `sweep`).
    Correlate(CorrelateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    image: PathBuf,
    /// Decomposition label maps (PGM, PNG or CSV).
    #[arg(long = "labels", required = true, num_args = 1..)]
    labels: Vec<PathBuf>,
    /// Ground-truth label maps; object metrics are averaged over them.
    #[arg(long = "gt", num_args = 1..)]
    gt: Vec<PathBuf>,
    /// Boundary tolerance in pixels.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Contour thresholds, recorded in the report.
    #[arg(long, num_args = 1..)]
    nu: Vec<f64>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    no_color: bool,
    #[arg(long)]
    no_objects: bool,
    #[arg(long)]
    no_regularity: bool,
    #[arg(long)]
    no_compression: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ShapesArgs {
    /// Shape kinds (default: all).
    #[arg(long, num_args = 1.., value_parser = parse_kind)]
    kinds: Vec<ShapeKind>,
    /// Target area in pixels; each shape gets the size closest to it.
    #[arg(long, default_value_t = 2000, conflicts_with = "size")]
    area: usize,
    /// Fixed bounding size instead of a target area.
    #[arg(long)]
    size: Option<usize>,
    /// Boundary noise amplitude for the noisy variant.
    #[arg(long, default_value_t = 2)]
    noise: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write each shape as a PGM canvas into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Write the reconstructed image (PGM, PPM or PNG).
    #[arg(long)]
    reconstruction: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ContoursArgs {
    /// One decomposition per scale.
    #[arg(long = "labels", required = true, num_args = 1..)]
    labels: Vec<PathBuf>,
    #[arg(long = "gt", required = true, num_args = 1..)]
    gt: Vec<PathBuf>,
    /// Superpixel count of each scale, recorded in the output.
    #[arg(long, num_args = 1..)]
    scales: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Thresholds in [0, 1], ascending (default: 51 uniform values).
    #[arg(long, num_args = 1..)]
    nu: Vec<f64>,
    /// Write the contour map as an 8-bit PGM or PNG.
    #[arg(long)]
    map: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Sweep JSON, either the full `sweep` output or a bare table.
    #[arg(long)]
    table: PathBuf,
    #[command(flatten)]
    out: Output,
}

fn parse_kind(s: &str) -> Result<ShapeKind, String> {
    ShapeKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = ShapeKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown shape {s:?}; expected one of {}", names.join(", "))
    })
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(out: &Output, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::from(e).in_file(path).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn eval_config(args: &EvalArgs) -> CliResult<EvalConfig> {
    let config = EvalConfig {
        image: args.image.clone(),
        decompositions: args.labels.clone(),
        ground_truths: args.gt.clone(),
        epsilon: args.epsilon,
        nu: args.nu.clone(),
        metrics: MetricSelection {
            color: !args.no_color,
            objects: !args.no_objects,
            regularity: !args.no_regularity,
            compression: !args.no_compression,
        },
        format: args.out.format.into(),
        jobs: args.jobs,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let config = eval_config(&args)?;
    let report = run_eval(&config)?;
    emit(&args.out, &report.render(config.format))
}

fn cmd_sweep(args: EvalArgs) -> CliResult<()> {
    if args.labels.len() < 2 {
        return Err(usage("sweep needs at least 2 decompositions"));
    }
    let config = eval_config(&args)?;
    let out = run_sweep(&config)?;
    let text = match config.format {
        OutputFormat::Json => out.to_json(),
        OutputFormat::Csv => out.to_csv(),
    };
    emit(&args.out, &text)
}

#[derive(Serialize)]
struct ShapeRow {
    kind: &'static str,
    size: usize,
    area: usize,
    c: Option<f64>,
    src: Option<f64>,
    noisy_area: Option<usize>,
    noisy_c: Option<f64>,
    noisy_src: Option<f64>,
    flag: Option<String>,
}

#[derive(Serialize)]
struct ShapesReport {
    noise_amplitude: usize,
    seed: u64,
    target_area: Option<usize>,
    shapes: Vec<ShapeRow>,
}

fn write_canvas(dir: &Path, name: &str, region: &spxeval::model::Region) -> CliResult<()> {
    let canvas = shape_canvas(region, 2)?;
    let (w, h) = canvas.dimensions();
    let data = canvas
        .as_slice()
        .iter()
        .map(|&v| 255.0 * v as f64)
        .collect();
    let image = Image::new(w, h, 1, data)?;
    write_image(&image, dir.join(format!("{name}.pgm")))?;
    Ok(())
}

fn cmd_shapes(args: ShapesArgs) -> CliResult<()> {
    if args.size.is_some_and(|s| s < 3) {
        return Err(usage("--size must be at least 3"));
    }
    if args.area == 0 {
        return Err(usage("--area must be positive"));
    }
    let kinds = if args.kinds.is_empty() {
        ShapeKind::ALL.to_vec()
    } else {
        args.kinds.clone()
    };
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    }
    let mut rows = Vec::new();
    for kind in kinds {
        let base = ShapeSpec::new(kind, 3);
        let size = match args.size {
            Some(s) => s,
            None => size_for_area(&base, args.area)?,
        };
        let smooth = generate(&ShapeSpec { size, ..base })?;
        let r = region_regularity(&smooth);
        let mut row = ShapeRow {
            kind: kind.name(),
            size,
            area: smooth.area(),
            c: round_sig(r.circularity),
            src: round_sig(r.src_term()),
            noisy_area: None,
            noisy_c: None,
            noisy_src: None,
            flag: None,
        };
        match add_boundary_noise(&smooth, args.noise, args.seed) {
            Ok(noisy) => {
                let q = region_regularity(&noisy);
                row.noisy_area = Some(noisy.area());
                row.noisy_c = round_sig(q.circularity);
                row.noisy_src = round_sig(q.src_term());
                if let Some(dir) = &args.out_dir {
                    write_canvas(dir, &format!("{}_noisy", kind.name()), &noisy)?;
                }
            }
            Err(e @ Error::DegenerateShape(_)) => row.flag = Some(e.to_string()),
            Err(e) => return Err(e.into()),
        }
        if let Some(dir) = &args.out_dir {
            write_canvas(dir, kind.name(), &smooth)?;
        }
        rows.push(row);
    }
    let text = match args.out.format {
        Format::Json => json(&ShapesReport {
            noise_amplitude: args.noise,
            seed: args.seed,
            target_area: args.size.is_none().then_some(args.area),
            shapes: rows,
        }),
        Format::Csv => {
            let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let mut s = String::from("kind,size,area,c,src,noisy_area,noisy_c,noisy_src\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.kind,
                    r.size,
                    r.area,
                    cell(r.c),
                    cell(r.src),
                    r.noisy_area.map(|a| a.to_string()).unwrap_or_default(),
                    cell(r.noisy_c),
                    cell(r.noisy_src)
                ));
            }
            s
        }
    };
    emit(&args.out, &text)
}

#[derive(Serialize)]
struct CompressReport {
    image: String,
    labels: String,
    regions: usize,
    mse: Option<f64>,
}

fn cmd_compress(args: CompressArgs) -> CliResult<()> {
    let image = read_image(&args.image)?;
    let labels = read_label_map(&args.labels)?;
    labels
        .ensure_same_dimensions(image.dimensions())
        .map_err(|e| e.in_file(&args.labels))?;
    let model = fit_compression(&image, &labels)?;
    let recon = reconstruct(&model, &labels)?;
    let error = mse(&image, &recon)?;
    if let Some(path) = &args.reconstruction {
        write_image(&recon, path)?;
    }
    let report = CompressReport {
        image: args.image.display().to_string(),
        labels: args.labels.display().to_string(),
        regions: labels.region_count(),
        mse: round_sig(error),
    };
    let text = match args.out.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "image,labels,regions,mse\n{},{},{},{}\n",
            report.image,
            report.labels,
            report.regions,
            report.mse.map(|v| v.to_string()).unwrap_or_default()
        ),
    };
    emit(&args.out, &text)
}

#[derive(Serialize)]
struct ContoursReport {
    decompositions: Vec<String>,
    scales: Vec<usize>,
    ground_truths: Vec<String>,
    epsilon: f64,
    thresholds: Vec<f64>,
    per_annotation: Vec<PrCurve>,
    mean: PrCurve,
}

fn cmd_contours(args: ContoursArgs) -> CliResult<()> {
    if args.epsilon.is_nan() || args.epsilon <= 0.0 {
        return Err(usage("--epsilon must be positive"));
    }
    if !args.scales.is_empty() && args.scales.len() != args.labels.len() {
        return Err(usage(format!(
            "--scales has {} entries for {} decompositions",
            args.scales.len(),
            args.labels.len()
        )));
    }
    let thresholds = if args.nu.is_empty() {
        uniform_thresholds(DEFAULT_THRESHOLD_COUNT)
    } else {
        args.nu.clone()
    };
    if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(usage("--nu values must lie in [0, 1]"));
    }
    if thresholds
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(usage("--nu values must be ascending"));
    }
    let mut masks = Vec::new();
    for p in &args.labels {
        masks.push(boundary_mask(&read_label_map(p)?));
    }
    let map = multiscale_contour_map(&masks, 0.0)?;
    let mut curves = Vec::new();
    for p in &args.gt {
        let gt = boundary_mask(&read_label_map(p)?);
        curves.push(pr_sweep(&map, &gt, args.epsilon, &thresholds).map_err(|e| e.in_file(p))?);
    }
    let mean = average_curves(&curves)?;
    if let Some(path) = &args.map {
        let (w, h) = map.dimensions();
        let data = map.values().iter().map(|v| (v * 255.0).round()).collect();
        write_image(&Image::new(w, h, 1, data)?, path)?;
    }
    let text = match args.out.format {
        Format::Json => json(&ContoursReport {
            decompositions: args
                .labels
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            scales: args.scales.clone(),
            ground_truths: args.gt.iter().map(|p| p.display().to_string()).collect(),
            epsilon: args.epsilon,
            thresholds,
            per_annotation: curves,
            mean,
        }),
        Format::Csv => {
            let mut s = String::from("threshold,precision,recall,f,empty_prediction\n");
            for p in &mean.points {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.threshold.unwrap_or_default(),
                    round_sig(p.precision).unwrap_or_default(),
                    round_sig(p.recall).unwrap_or_default(),
                    round_sig(p.f_measure).unwrap_or_default(),
                    p.empty_prediction
                ));
            }
            s
        }
    };
    emit(&args.out, &text)
}

fn cmd_correlate(args: CorrelateArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.table).map_err(|e| Error::from(e).in_file(&args.table))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            offset: 0,
            message: format!("invalid JSON: {e}"),
        }
        .in_file(&args.table)
    })?;
    let table_value = value.get("table").cloned().unwrap_or(value);
    let table: SweepTable = serde_json::from_value(table_value).map_err(|e| {
        Error::Parse {
            offset: 0,
            message: format!("not a sweep table: {e}"),
        }
        .in_file(&args.table)
    })?;
    if table.rows.len() < 2 {
        return Err(usage("correlation needs at least 2 sweep rows"));
    }
    let corr = correlation_table(&table)?;
    let text = match args.out.format {
        Format::Json => json(&corr),
        Format::Csv => correlation_csv(&corr),
    };
    emit(&args.out, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Shapes(a) => cmd_shapes(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Contours(a) => cmd_contours(a),
        Command::Correlate(a) => cmd_correlate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
