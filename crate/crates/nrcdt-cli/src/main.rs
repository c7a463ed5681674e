//! Command-line surface: dataset generation, signature-curve export,
//! nearest-neighbor and cross-validated classification, and pairwise
//! distance matrices.
//!
//! Exit codes: 0 success, 1 runtime/data error, 2 usage error. All
//! randomness is seeded; reports echo the seeds so every run is
//! reproducible from its flags. Output files are written atomically.
//! `NRCDT_THREADS` caps internal parallelism (0/unset = automatic).

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nrcdt::cdt::{
    curve_distance, mnrcdt_with, rcdt, sliced_wasserstein2, MnrcdtCurve, MnrcdtOptions, Norm,
    QuantileGrid,
};
use nrcdt::classify::{
    cross_validate, nn_accuracy, nn_iterate_references, CvConfig, FeatureExtractor, FeatureVector,
    Pipeline, Representation, SplitMode, SvmConfig,
};
use nrcdt::datasets::formats::write_atomic;
use nrcdt::datasets::{
    generate_academic, make_template, AffineSamplerConfig, GridSamplerConfig, LabeledDataset,
    Sampler, TemplateKind,
};
use nrcdt::error::Error;
use nrcdt::measures::DiscreteMeasure2D;
use nrcdt::radon::AngleGrid;

use config::{
    resolve, FileConfig, DEFAULT_ANGLES, DEFAULT_EPS_STD, DEFAULT_FOLDS, DEFAULT_QUANTILES,
    DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "nrcdt",
    version,
    about = "Affine-invariant signature curves for labeled measure datasets"
)]
struct Cli {
    /// JSON config file supplying defaults for run knobs (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic affine-class dataset from template symbols.
    GenAcademic(GenAcademicArgs),
    /// Export the signature curve of every dataset item as CSV.
    Transform(TransformArgs),
    /// Nearest-neighbor classification against templates or iterated
    /// per-class references.
    ClassifyNn(ClassifyNnArgs),
    /// Stratified k-fold cross-validation (train on one fold, test on
    /// the rest) over a feature representation.
    CrossValidate(CrossValidateArgs),
    /// Export a pairwise distance matrix between dataset items.
    Distances(DistancesArgs),
}

#[derive(Args)]
struct Knobs {
    /// Number of projection angles in [0, pi).
    #[arg(long)]
    angles: Option<usize>,
    /// Number of quantile levels.
    #[arg(long)]
    quantiles: Option<usize>,
    /// Lower bound on directional standard deviations.
    #[arg(long)]
    eps_std: Option<f64>,
}

struct ResolvedKnobs {
    angles: usize,
    quantiles: usize,
    eps_std: f64,
}

impl Knobs {
    fn resolve(&self, file: &FileConfig) -> Result<ResolvedKnobs, Error> {
        let angles = resolve(self.angles, file.angles, DEFAULT_ANGLES);
        let quantiles = resolve(self.quantiles, file.quantiles, DEFAULT_QUANTILES);
        let eps_std = resolve(self.eps_std, file.eps_std, DEFAULT_EPS_STD);
        if angles < 1 {
            return Err(Error::InvalidConfig("angles must be >= 1".into()));
        }
        if quantiles < 2 {
            return Err(Error::InvalidConfig("quantiles must be >= 2".into()));
        }
        if !eps_std.is_finite() || eps_std <= 0.0 {
            return Err(Error::InvalidConfig("eps-std must be > 0".into()));
        }
        Ok(ResolvedKnobs {
            angles,
            quantiles,
            eps_std,
        })
    }
}

#[derive(Args)]
struct GenAcademicArgs {
    /// Number of template classes (1-3: cross, shield, disk_ring).
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Items generated per class.
    #[arg(long)]
    per_class: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Template raster resolution.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Restrict transforms to the subgroup preserving an --angles grid
    /// (grid rotations, grid reflections, isotropic scalings,
    /// translations).
    #[arg(long)]
    grid_preserving: bool,
    #[command(flatten)]
    knobs: Knobs,
    #[arg(long)]
    rotation_min: Option<f64>,
    #[arg(long)]
    rotation_max: Option<f64>,
    #[arg(long)]
    scale_min: Option<f64>,
    #[arg(long)]
    scale_max: Option<f64>,
    #[arg(long)]
    shear_min: Option<f64>,
    #[arg(long)]
    shear_max: Option<f64>,
    #[arg(long)]
    translation_min: Option<f64>,
    #[arg(long)]
    translation_max: Option<f64>,
    #[arg(long)]
    allow_reflection: bool,
    /// Output directory for atom files and manifest.json.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Dataset manifest (JSON).
    #[arg(long, value_name = "MANIFEST")]
    dataset: PathBuf,
    #[command(flatten)]
    knobs: Knobs,
    /// Output CSV path (default curves.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyNnArgs {
    /// Dataset manifest (JSON).
    #[arg(long, value_name = "MANIFEST")]
    dataset: PathBuf,
    /// Reference mode: "templates" (regenerated template symbols) or
    /// "iterate" (every instance serves once as its class reference).
    #[arg(long, default_value = "templates")]
    references: String,
    /// Template raster resolution (templates mode).
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Distance norm: inf or l2.
    #[arg(long)]
    norm: Option<String>,
    #[command(flatten)]
    knobs: Knobs,
    /// JSON report path (default nn-report.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CrossValidateArgs {
    /// Dataset manifest (JSON).
    #[arg(long, value_name = "MANIFEST")]
    dataset: PathBuf,
    /// Feature representation: euclidean, rcdt, or mnrcdt.
    #[arg(long)]
    representation: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Classifier: svm or nn.
    #[arg(long, default_value = "svm")]
    pipeline: String,
    /// Distance norm for the nn pipeline: inf or l2.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    svm_reg: Option<f64>,
    #[arg(long)]
    svm_max_iters: Option<usize>,
    #[arg(long)]
    svm_tol: Option<f64>,
    /// Train on k-1 folds and test on one, instead of the inverted
    /// default (train on one fold, test on the rest).
    #[arg(long)]
    conventional_split: bool,
    /// Raster side length for the euclidean representation.
    #[arg(long, default_value_t = 32)]
    raster_size: usize,
    #[command(flatten)]
    knobs: Knobs,
    /// JSON report path (default cv-report.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistancesArgs {
    /// Dataset manifest (JSON).
    #[arg(long, value_name = "MANIFEST")]
    dataset: PathBuf,
    /// Distance: "sliced-w2" (stacked projection curves) or "mnrcdt"
    /// (signature curves under --norm).
    #[arg(long, default_value = "mnrcdt")]
    metric: String,
    /// Norm for signature distances: inf or l2.
    #[arg(long)]
    norm: Option<String>,
    #[command(flatten)]
    knobs: Knobs,
    /// Output CSV path (default distances.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidConfig(_) | Error::OutOfRange(_) | Error::InvalidK(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("NRCDT_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenAcademic(args) => gen_academic(args, &file),
        Command::Transform(args) => transform(args, &file),
        Command::ClassifyNn(args) => classify_nn(args, &file),
        Command::CrossValidate(args) => cross_validate_cmd(args, &file),
        Command::Distances(args) => distances(args, &file),
    }
}

fn parse_norm(flag: Option<&str>, file: &FileConfig) -> CliResult<Norm> {
    let name = flag
        .map(str::to_owned)
        .or_else(|| file.norm.clone())
        .unwrap_or_else(|| "inf".to_owned());
    Ok(name.parse::<Norm>()?)
}

fn norm_name(norm: Norm) -> &'static str {
    match norm {
        Norm::Chebyshev => "inf",
        Norm::Euclidean => "l2",
    }
}

fn template_set(classes: usize, resolution: usize) -> CliResult<Vec<DiscreteMeasure2D>> {
    let kinds = TemplateKind::all();
    if classes == 0 || classes > kinds.len() {
        return Err(CliError::usage(format!(
            "classes must be in 1..={}, got {classes}",
            kinds.len()
        )));
    }
    kinds[..classes]
        .iter()
        .map(|&k| make_template(k, resolution).map_err(CliError::from))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(())
}

fn gen_academic(args: GenAcademicArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve(args.seed, file.seed, DEFAULT_SEED);
    let templates = template_set(args.classes, args.resolution)?;

    let sampler = if args.grid_preserving {
        let knobs = args.knobs.resolve(file)?;
        let defaults = GridSamplerConfig::default();
        Sampler::GridPreserving(GridSamplerConfig {
            angle_count: knobs.angles,
            scale: (
                args.scale_min.unwrap_or(defaults.scale.0),
                args.scale_max.unwrap_or(defaults.scale.1),
            ),
            translation: (
                args.translation_min.unwrap_or(defaults.translation.0),
                args.translation_max.unwrap_or(defaults.translation.1),
            ),
            allow_reflection: args.allow_reflection,
            seed,
        })
    } else {
        let defaults = AffineSamplerConfig::default();
        Sampler::General(AffineSamplerConfig {
            rotation: (
                args.rotation_min.unwrap_or(defaults.rotation.0),
                args.rotation_max.unwrap_or(defaults.rotation.1),
            ),
            scale: (
                args.scale_min.unwrap_or(defaults.scale.0),
                args.scale_max.unwrap_or(defaults.scale.1),
            ),
            shear: (
                args.shear_min.unwrap_or(defaults.shear.0),
                args.shear_max.unwrap_or(defaults.shear.1),
            ),
            translation: (
                args.translation_min.unwrap_or(defaults.translation.0),
                args.translation_max.unwrap_or(defaults.translation.1),
            ),
            allow_reflection: args.allow_reflection,
            seed,
        })
    };

    let dataset = generate_academic(&templates, args.per_class, &sampler)?;
    dataset.save(&args.out)?;

    println!(
        "wrote {} items to {} (seed {seed})",
        dataset.len(),
        args.out.display()
    );
    for (label, size) in dataset.class_sizes().iter().enumerate() {
        println!(
            "  class {label} ({}): {size}",
            TemplateKind::all()[label].name()
        );
    }
    Ok(())
}

fn load_dataset(path: &Path) -> CliResult<LabeledDataset> {
    LabeledDataset::load(path).map_err(CliError::from)
}

fn transform(args: TransformArgs, file: &FileConfig) -> CliResult<()> {
    let knobs = args.knobs.resolve(file)?;
    let out = resolve(
        args.out,
        file.output_path.clone(),
        PathBuf::from("curves.csv"),
    );
    let dataset = load_dataset(&args.dataset)?;

    let angles = AngleGrid::new(knobs.angles)?;
    let grid = QuantileGrid::new(knobs.quantiles)?;
    let options = MnrcdtOptions {
        eps_std: knobs.eps_std,
        ..MnrcdtOptions::default()
    };

    let mut csv = String::from("item_id,label,level,value\n");
    for (id, item) in dataset.items().iter().enumerate() {
        let curve = mnrcdt_with(&item.measure, &angles, &grid, &options)
            .map_err(|e| CliError::from(e).context(&format!("item {id}")))?;
        for (level, value) in grid.levels().iter().zip(curve.values()) {
            writeln!(csv, "{id},{},{level},{value}", item.label).expect("string write");
        }
    }
    write_atomic(&out, csv.as_bytes())?;
    println!(
        "wrote {} curve rows ({} items x {} levels) to {}",
        dataset.len() * knobs.quantiles,
        dataset.len(),
        knobs.quantiles,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct NnReport {
    mode: String,
    norm: String,
    angles: usize,
    quantiles: usize,
    items: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<Vec<f64>>,
}

fn classify_nn(args: ClassifyNnArgs, file: &FileConfig) -> CliResult<()> {
    let knobs = args.knobs.resolve(file)?;
    let norm = parse_norm(args.norm.as_deref(), file)?;
    let out = resolve(
        args.out,
        file.output_path.clone(),
        PathBuf::from("nn-report.json"),
    );
    let dataset = load_dataset(&args.dataset)?;

    let mut extractor =
        FeatureExtractor::new(Representation::Mnrcdt, knobs.angles, knobs.quantiles)?;
    extractor.options.eps_std = knobs.eps_std;
    let measures: Vec<&DiscreteMeasure2D> = dataset.items().iter().map(|i| &i.measure).collect();
    let features = extractor.features_all(&measures)?;
    let labels: Vec<usize> = dataset.items().iter().map(|i| i.label).collect();

    let report = match args.references.as_str() {
        "templates" => {
            let templates = template_set(dataset.class_count(), args.resolution)?;
            let refs: Vec<(FeatureVector, usize)> = templates
                .iter()
                .enumerate()
                .map(|(label, t)| Ok((extractor.features(t)?, label)))
                .collect::<Result<_, Error>>()?;
            let queries: Vec<(FeatureVector, usize)> = features.into_iter().zip(labels).collect();
            let accuracy = nn_accuracy(&refs, &queries, norm)?;
            println!(
                "accuracy {accuracy:.4} (templates mode, {} norm, {} angles, {} items)",
                norm_name(norm),
                knobs.angles,
                queries.len()
            );
            NnReport {
                mode: "templates".into(),
                norm: norm_name(norm).into(),
                angles: knobs.angles,
                quantiles: knobs.quantiles,
                items: queries.len(),
                accuracy: Some(accuracy),
                mean: None,
                std: None,
                rounds: None,
            }
        }
        "iterate" => {
            let rounds = nn_iterate_references(&features, &labels, dataset.class_count(), norm)?;
            println!(
                "accuracy {:.4} +/- {:.4} over {} reference rounds ({} norm, {} angles)",
                rounds.mean,
                rounds.std,
                rounds.fold_accuracies.len(),
                norm_name(norm),
                knobs.angles
            );
            NnReport {
                mode: "iterate".into(),
                norm: norm_name(norm).into(),
                angles: knobs.angles,
                quantiles: knobs.quantiles,
                items: dataset.len(),
                accuracy: None,
                mean: Some(rounds.mean),
                std: Some(rounds.std),
                rounds: Some(rounds.fold_accuracies),
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown references mode {other:?}, expected templates or iterate"
            )))
        }
    };

    write_json(&out, &report)?;
    println!("report written to {}", out.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CvJsonReport {
    representation: String,
    angles: usize,
    class_size: usize,
    mean: f64,
    std: f64,
    folds: Vec<f64>,
    quantiles: usize,
    fold_count: usize,
    seed: u64,
    pipeline: String,
    split: String,
}

fn cross_validate_cmd(args: CrossValidateArgs, file: &FileConfig) -> CliResult<()> {
    let knobs = args.knobs.resolve(file)?;
    let folds = resolve(args.folds, file.folds, DEFAULT_FOLDS);
    if folds < 2 {
        return Err(Error::InvalidK(folds).into());
    }
    let seed = resolve(args.seed, file.seed, DEFAULT_SEED);
    let representation: Representation = args
        .representation
        .as_deref()
        .map(str::to_owned)
        .or_else(|| file.representation.clone())
        .unwrap_or_else(|| "mnrcdt".to_owned())
        .parse()?;
    let out = resolve(
        args.out,
        file.output_path.clone(),
        PathBuf::from("cv-report.json"),
    );
    let dataset = load_dataset(&args.dataset)?;

    let mut extractor = FeatureExtractor::new(representation, knobs.angles, knobs.quantiles)?;
    extractor.raster_size = args.raster_size;
    extractor.options.eps_std = knobs.eps_std;

    let pipeline = match args.pipeline.as_str() {
        "svm" => {
            let defaults = SvmConfig::default();
            Pipeline::Svm(SvmConfig {
                reg: args.svm_reg.unwrap_or(defaults.reg),
                max_iters: args.svm_max_iters.unwrap_or(defaults.max_iters),
                tol: args.svm_tol.unwrap_or(defaults.tol),
            })
        }
        "nn" => Pipeline::NearestNeighbor {
            norm: parse_norm(args.norm.as_deref(), file)?,
        },
        other => {
            return Err(CliError::usage(format!(
                "unknown pipeline {other:?}, expected svm or nn"
            )))
        }
    };
    let split = if args.conventional_split {
        SplitMode::TrainRestTestOne
    } else {
        SplitMode::TrainOneTestRest
    };

    let report = cross_validate(
        &dataset,
        &extractor,
        &pipeline,
        &CvConfig { folds, seed, split },
    )?;
    let class_size = dataset.class_sizes().into_iter().min().unwrap_or(0);

    println!(
        "{}: mean accuracy {:.4} +/- {:.4} over {} folds (class size {class_size}, {} angles, seed {seed})",
        representation.name(),
        report.mean,
        report.std,
        folds,
        knobs.angles
    );
    let json = CvJsonReport {
        representation: representation.name().into(),
        angles: knobs.angles,
        class_size,
        mean: report.mean,
        std: report.std,
        folds: report.fold_accuracies,
        quantiles: knobs.quantiles,
        fold_count: folds,
        seed,
        pipeline: args.pipeline.clone(),
        split: match split {
            SplitMode::TrainOneTestRest => "train-1-test-rest".into(),
            SplitMode::TrainRestTestOne => "train-rest-test-1".into(),
        },
    };
    write_json(&out, &json)?;
    println!("report written to {}", out.display());
    Ok(())
}

fn distances(args: DistancesArgs, file: &FileConfig) -> CliResult<()> {
    let knobs = args.knobs.resolve(file)?;
    let out = resolve(
        args.out,
        file.output_path.clone(),
        PathBuf::from("distances.csv"),
    );
    let dataset = load_dataset(&args.dataset)?;
    let angles = AngleGrid::new(knobs.angles)?;
    let grid = QuantileGrid::new(knobs.quantiles)?;

    let n = dataset.len();
    let mut matrix = vec![vec![0.0f64; n]; n];
    match args.metric.as_str() {
        "sliced-w2" => {
            let fields: Vec<_> = dataset
                .items()
                .iter()
                .map(|item| rcdt(&item.measure, &angles, &grid))
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = sliced_wasserstein2(&fields[i], &fields[j])?;
                    matrix[i][j] = d;
                    matrix[j][i] = d;
                }
            }
        }
        "mnrcdt" => {
            let norm = parse_norm(args.norm.as_deref(), file)?;
            let options = MnrcdtOptions {
                eps_std: knobs.eps_std,
                ..MnrcdtOptions::default()
            };
            let curves: Vec<MnrcdtCurve> = dataset
                .items()
                .iter()
                .enumerate()
                .map(|(id, item)| {
                    mnrcdt_with(&item.measure, &angles, &grid, &options)
                        .map_err(|e| CliError::from(e).context(&format!("item {id}")))
                })
                .collect::<CliResult<_>>()?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = curve_distance(&curves[i], &curves[j], norm)?;
                    matrix[i][j] = d;
                    matrix[j][i] = d;
                }
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown metric {other:?}, expected sliced-w2 or mnrcdt"
            )))
        }
    }

    let mut csv = String::from("item_id");
    for j in 0..n {
        write!(csv, ",{j}").expect("string write");
    }
    csv.push('\n');
    for (i, row) in matrix.iter().enumerate() {
        write!(csv, "{i}").expect("string write");
        for d in row {
            write!(csv, ",{d}").expect("string write");
        }
        csv.push('\n');
    }
    write_atomic(&out, csv.as_bytes())?;
    println!(
        "wrote {n}x{n} {} distance matrix to {}",
        args.metric,
        out.display()
    );
    Ok(())
}
