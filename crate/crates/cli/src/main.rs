//! `meshclass` command-line driver.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error, 3 data
//! error, 4 training divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meshclass::bench::{self, EpochMetrics, Metrics, ReportRow, TrainError, TrainReport};
use meshclass::dataset::{self, Dataset, SynthSpec};
use meshclass::decimation::build_hierarchy;
use meshclass::mesh::{self, MeshFormat};
use meshclass::models::{apply_overrides, Model, ModelError, ModelKind, RunConfig, DEFAULT_SEED};
use meshclass::Exec;
use serde_json::{json, Value};

const CONFIG_FILE: &str = "config.json";
const CHECKPOINT_FILE: &str = "checkpoint.bin";
const METRICS_FILE: &str = "metrics.json";
const TIMING_FILE: &str = "timing.json";
const DATA_SPEC_FILE: &str = "dataset_spec.json";

#[derive(Parser)]
#[command(name = "meshclass", version, about = "Mesh convolution benchmark on synthetic shapes")]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// JSON config file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set optimizer.lr=0.001`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory with a manifest.
    GenerateData {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a pooling hierarchy for a mesh.
    Decimate {
        /// Input mesh (.off, .obj or .ply); defaults to the dataset template.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Icosphere level used when no input is given.
        #[arg(long, default_value_t = 3)]
        template_level: u32,
        /// Comma-separated vertex reduction factors, one per level.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        factors: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model and write a self-describing run directory.
    Train {
        #[arg(long)]
        model: Option<ModelKind>,
        #[command(flatten)]
        overrides: Overrides,
        /// Dataset directory; a dataset is generated when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Spec for the generated dataset when `--data` is omitted.
        #[arg(long)]
        data_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-evaluate a trained run on its dataset.
    Eval {
        #[arg(long)]
        run: PathBuf,
        /// Use this dataset instead of the one recorded in the run.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write per-edge importance of a trained MeshCNN run as `.edgeattr`.
    ExportImportance {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the results table for one or more run directories.
    Report {
        /// Run directories, or directories containing run directories.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Also write the rows as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Data(String),
    Divergence(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Divergence(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Other(_) => "error",
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Divergence(_) => "divergence",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Divergence(m) | CliError::Other(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(m) => CliError::Config(m),
            ModelError::Template(m) => CliError::Data(m),
            ModelError::Mesh(_) | ModelError::EdgeNet(_) | ModelError::Decimate(_) | ModelError::Laplacian(_) => {
                CliError::Data(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Model(m) => m.into(),
            TrainError::Divergence { .. } => CliError::Divergence(e.to_string()),
            TrainError::EmptySplit(_) => CliError::Data(e.to_string()),
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn other_err(e: impl std::fmt::Display) -> CliError {
    CliError::Other(e.to_string())
}

fn read_json(path: &Path, err: fn(String) -> CliError) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| err(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(other_err)?;
    std::fs::write(path, text + "\n").map_err(|e| other_err(format!("{}: {e}", path.display())))
}

fn parse_sets(sets: &[String]) -> Result<Vec<(String, String)>, CliError> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("`--set {s}` is not KEY=VALUE")))
        })
        .collect()
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("MESHCLASS_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("MESHCLASS_SEED `{s}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Seed precedence: `--set seed=` over the config file over `MESHCLASS_SEED`
/// over the built-in default.
fn file_or_env_seed(file: &Value, key_present: bool, default: u64) -> Result<u64, CliError> {
    if key_present {
        return file
            .get("seed")
            .and_then(Value::as_u64)
            .ok_or_else(|| CliError::Config("seed must be an unsigned integer".into()));
    }
    Ok(env_seed()?.unwrap_or(default))
}

fn synth_spec(path: Option<&Path>, sets: &[(String, String)]) -> Result<SynthSpec, CliError> {
    let file = match path {
        Some(p) => read_json(p, CliError::Config)?,
        None => json!({}),
    };
    if !file.is_object() {
        return Err(CliError::Config("dataset config must be a JSON object".into()));
    }
    let mut spec: SynthSpec = serde_json::from_value(file.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    spec.seed = file_or_env_seed(&file, file.get("seed").is_some(), spec.seed)?;
    let mut v = serde_json::to_value(&spec).map_err(other_err)?;
    apply_overrides(&mut v, sets, &[]).map_err(CliError::Config)?;
    let spec: SynthSpec = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

fn run_config(model: Option<ModelKind>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let file = match &overrides.config {
        Some(p) => read_json(p, CliError::Config)?,
        None => json!({}),
    };
    if !file.is_object() {
        return Err(CliError::Config("run config must be a JSON object".into()));
    }
    let file_model = match file.get("model") {
        Some(v) => Some(
            serde_json::from_value::<ModelKind>(v.clone()).map_err(|e| CliError::Config(format!("model: {e}")))?,
        ),
        None => None,
    };
    let kind = match (model, file_model) {
        (Some(m), Some(f)) if m != f => {
            return Err(CliError::Config(format!("--model {m} conflicts with model {f} in the config file")));
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(CliError::Config("no model given (use --model or a `model` key)".into())),
    };
    let mut cfg = RunConfig::from_partial(kind, &file).map_err(CliError::Config)?;
    cfg.seed = file_or_env_seed(&file, file.get("seed").is_some(), DEFAULT_SEED)?;
    let cfg = cfg.with_overrides(&parse_sets(&overrides.set)?).map_err(CliError::Config)?;
    if cfg.model != kind {
        return Err(CliError::Config("the model cannot be changed with --set".into()));
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn build_model(cfg: &RunConfig, data: &Dataset) -> Result<Model, CliError> {
    let template = cfg.model.uses_template().then_some(&data.template);
    Ok(Model::new(cfg, template)?)
}

/// Dataset for a run: the recorded directory, or regenerated from the
/// recorded spec.
fn run_dataset(run: &Path, cfg: &RunConfig, data: Option<&Path>, exec: Exec) -> Result<Dataset, CliError> {
    if let Some(dir) = data.or(cfg.dataset.as_deref()) {
        return dataset::load_dataset(dir).map_err(data_err);
    }
    let spec: SynthSpec =
        serde_json::from_value(read_json(&run.join(DATA_SPEC_FILE), CliError::Data)?).map_err(data_err)?;
    dataset::generate(&spec, exec).map_err(data_err)
}

fn load_run(run: &Path) -> Result<RunConfig, CliError> {
    let v = read_json(&run.join(CONFIG_FILE), CliError::Config)?;
    let cfg: RunConfig = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn load_trained(run: &Path, cfg: &RunConfig, data: &Dataset) -> Result<Model, CliError> {
    let mut model = build_model(cfg, data)?;
    model.load(&run.join(CHECKPOINT_FILE)).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(model)
}

fn generate_data(overrides: &Overrides, out: &Path, exec: Exec) -> Result<(), CliError> {
    let spec = synth_spec(overrides.config.as_deref(), &parse_sets(&overrides.set)?)?;
    let data = dataset::generate(&spec, exec).map_err(data_err)?;
    let manifest = dataset::save_dataset(&data, out).map_err(data_err)?;
    println!(
        "{}",
        json!({
            "out": out,
            "train": data.train.len(),
            "test": data.test.len(),
            "template_sha256": manifest.template_sha256,
            "separability": dataset::separability_check(&data),
        })
    );
    Ok(())
}

fn decimate(input: Option<&Path>, level: u32, factors: &[f64], out: &Path) -> Result<(), CliError> {
    let mesh = match input {
        Some(p) => mesh::load_mesh(p, MeshFormat::from_path(p).map_err(data_err)?).map_err(data_err)?,
        None => mesh::primitives::icosphere(level),
    };
    let h = build_hierarchy(&mesh, factors).map_err(|e| match e {
        meshclass::decimation::DecimateError::InvalidFactor(_) => CliError::Config(e.to_string()),
        other => data_err(other),
    })?;
    h.save(out).map_err(data_err)?;
    println!("{}", json!({ "out": out, "level_sizes": h.level_sizes() }));
    Ok(())
}

/// History without wall times, so identical runs give identical files.
fn metrics_json(report: &TrainReport) -> Value {
    let history: Vec<EpochMetrics> = report
        .history
        .iter()
        .map(|e| EpochMetrics {
            seconds: 0.0,
            ..e.clone()
        })
        .collect();
    json!({
        "model": report.model,
        "method": report.model.method_name(),
        "template": report.model.uses_template(),
        "parameters": report.parameters,
        "initial_test": report.initial_test,
        "final_test": report.final_test(),
        "history": history,
    })
}

fn train(
    model: Option<ModelKind>,
    overrides: &Overrides,
    data_dir: Option<&Path>,
    data_config: Option<&Path>,
    out: &Path,
    exec: Exec,
) -> Result<(), CliError> {
    let mut cfg = run_config(model, overrides)?;
    if let Some(d) = data_dir {
        cfg.dataset = Some(std::fs::canonicalize(d).map_err(|e| CliError::Data(format!("{}: {e}", d.display())))?);
    }
    let data = match &cfg.dataset {
        Some(d) => dataset::load_dataset(d).map_err(data_err)?,
        None => {
            let spec = synth_spec(data_config, &[])?;
            std::fs::create_dir_all(out).map_err(other_err)?;
            write_json(&out.join(DATA_SPEC_FILE), &spec)?;
            dataset::generate(&spec, exec).map_err(data_err)?
        }
    };
    let mut m = build_model(&cfg, &data)?;
    let prepared = bench::prepare(&m, &data, exec)?;
    std::fs::create_dir_all(out).map_err(other_err)?;
    write_json(&out.join(CONFIG_FILE), &cfg)?;
    let report = bench::train(&mut m, &prepared, exec)?;
    m.save(&out.join(CHECKPOINT_FILE)).map_err(other_err)?;
    write_json(&out.join(METRICS_FILE), &metrics_json(&report))?;
    let seconds: Vec<f64> = report.history.iter().map(|e| e.seconds).collect();
    write_json(
        &out.join(TIMING_FILE),
        &json!({ "epoch_seconds": seconds, "median_epoch_seconds": report.median_epoch_seconds() }),
    )?;
    let last = report.final_test();
    println!(
        "{}",
        json!({ "model": cfg.model, "epochs": cfg.epochs, "test": last, "parameters": report.parameters })
    );
    Ok(())
}

fn eval(run: &Path, data: Option<&Path>, exec: Exec) -> Result<(), CliError> {
    let cfg = load_run(run)?;
    let dataset = run_dataset(run, &cfg, data, exec)?;
    let model = load_trained(run, &cfg, &dataset)?;
    let mut out = serde_json::Map::new();
    for (name, samples) in [("train", &dataset.train), ("test", &dataset.test)] {
        let (inputs, labels) = bench::prepare_split(&model, samples, exec)?;
        let metrics: Metrics = bench::evaluate(&model, &inputs, &labels, exec)?;
        out.insert(name.into(), serde_json::to_value(metrics).map_err(other_err)?);
    }
    println!("{}", Value::Object(out));
    Ok(())
}

fn export_importance(run: &Path, mesh_path: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = load_run(run)?;
    if cfg.model != ModelKind::MeshCnn {
        return Err(CliError::Config(format!("{} has no edge pooling to export", cfg.model)));
    }
    let mut model = Model::new(&cfg, None)?;
    model.load(&run.join(CHECKPOINT_FILE)).map_err(data_err)?;
    let mesh = mesh::load_mesh(mesh_path, MeshFormat::from_path(mesh_path).map_err(data_err)?).map_err(data_err)?;
    let input = model.prepare(&mesh)?;
    let (em, values) = model.edge_importance(&input)?;
    em.export_importance(out).map_err(other_err)?;
    println!("{}", json!({ "out": out, "edges": values.len() }));
    Ok(())
}

fn run_dirs(roots: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs = Vec::new();
    for root in roots {
        if root.join(METRICS_FILE).is_file() {
            dirs.push(root.clone());
            continue;
        }
        let entries = std::fs::read_dir(root).map_err(|e| CliError::Data(format!("{}: {e}", root.display())))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.join(METRICS_FILE).is_file())
            .collect();
        if found.is_empty() {
            return Err(CliError::Data(format!("{}: no run directories found", root.display())));
        }
        found.sort();
        dirs.extend(found);
    }
    Ok(dirs)
}

fn report(roots: &[PathBuf], json_out: Option<&Path>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for dir in run_dirs(roots)? {
        let metrics = read_json(&dir.join(METRICS_FILE), CliError::Data)?;
        let kind: ModelKind = serde_json::from_value(metrics["model"].clone()).map_err(data_err)?;
        let test: Metrics = serde_json::from_value(metrics["final_test"].clone()).map_err(data_err)?;
        let parameters = metrics["parameters"]
            .as_u64()
            .ok_or_else(|| CliError::Data(format!("{}: missing parameter count", dir.display())))?;
        let median = read_json(&dir.join(TIMING_FILE), CliError::Data)
            .ok()
            .and_then(|t| t["median_epoch_seconds"].as_f64())
            .unwrap_or(0.0);
        rows.push(ReportRow::from_run(kind, &test, parameters as usize, median));
    }
    rows.sort_by_key(|r| {
        ModelKind::ALL
            .iter()
            .position(|k| k.method_name() == r.method)
            .unwrap_or(usize::MAX)
    });
    print!("{}", bench::format_table(&rows));
    if let Some(p) = json_out {
        write_json(p, &rows)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match &cli.command {
        Command::GenerateData { overrides, out } => generate_data(overrides, out, exec),
        Command::Decimate {
            input,
            template_level,
            factors,
            out,
        } => decimate(input.as_deref(), *template_level, factors, out),
        Command::Train {
            model,
            overrides,
            data,
            data_config,
            out,
        } => train(*model, overrides, data.as_deref(), data_config.as_deref(), out, exec),
        Command::Eval { run, data } => eval(run, data.as_deref(), exec),
        Command::ExportImportance { run, mesh, out } => export_importance(run, mesh, out),
        Command::Report { runs, json } => report(runs, json.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.message() }));
            ExitCode::from(e.code())
        }
    }
}
