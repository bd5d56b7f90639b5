//! The `nadek` command line: training, evaluation, sampling, inpainting,
//! ordering statistics and the enumeration check.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use crate::data::{binarize_by_sampling, empirical_mean, load_text_matrix, write_rows, Dataset};
use crate::error::Error;
use crate::evaluation::{
    enumerate_distribution, enumerate_mixture, ordering_stats, EnsembleSpec, EvalReport, Ordering,
    MAX_ENUMERATION_DIM,
};
use crate::model::{Activation, Model, StructureConfig};
use crate::numerics::Rng;
use crate::sampling::{inpaint, reconstruction_trace, sample_from_mixture};
use crate::training::{train, write_history, TrainConfig, TrainMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Residual bound accepted by `enumcheck`.
pub const ENUMCHECK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "nadek", version, about = "NADE-k density estimation")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write checkpoint, manifest and history.
    Train(TrainArgs),
    /// Average log-probability of a dataset, optionally as an ensemble.
    Eval(EvalArgs),
    /// Draw samples from the ordering mixture.
    Sample(SampleArgs),
    /// Fill in unobserved components by conditional sampling.
    Inpaint(InpaintArgs),
    /// Spread of log p(x|o) over orderings and samples.
    Stats(StatsArgs),
    /// Check that exhaustive enumeration sums to one.
    Enumcheck(EnumcheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    PretrainThenFinetune,
    FinetuneOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ActivationArg {
    Tanh,
    Sigmoid,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    valid: PathBuf,
    #[arg(long)]
    hidden1: usize,
    #[arg(long)]
    hidden2: Option<usize>,
    /// Layers per iteration (2 or 3); inferred from --hidden2 when omitted.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Fine-tuning epochs.
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    pretrain_epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    /// Early-stopping patience in epochs; 0 disables.
    #[arg(long, default_value_t = 0)]
    patience: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pretrain-then-finetune")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "tanh")]
    activation: ActivationArg,
    #[arg(long, default_value_t = crate::training::AdaDeltaState::DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = crate::training::AdaDeltaState::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Binarize non-binary inputs by sampling (seeded from --seed).
    #[arg(long)]
    binarize: bool,
    /// Checkpoint path; `<out>.manifest` and `<out>.history` are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1)]
    orderings: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report the mixture log-probability over the orderings.
    #[arg(long)]
    ensemble: bool,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long)]
    binarize: bool,
    /// Report path (default `<model>.eval.tsv`).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the samples as a PGM image grid.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Grid layout as ROWSxCOLS.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    img_w: Option<usize>,
    #[arg(long)]
    img_h: Option<usize>,
    #[arg(long)]
    k_override: Option<usize>,
}

#[derive(Debug, Args)]
struct InpaintArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Observed indices: one whitespace-separated line for all rows, or one
    /// line per data row.
    #[arg(long)]
    obs_file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write x, v(0), ..., v(k) for each row to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    k_override: Option<usize>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 2)]
    orderings: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long)]
    binarize: bool,
    /// Report path (default `<model>.stats.tsv`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumcheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1)]
    orderings: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k_override: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(Error::io(path, e))
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(usage("--threads must be >= 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out)),
            Err(e) => Err(CliError::Runtime(Error::Config(e.to_string()))),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Train(a) => cmd_train(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Inpaint(a) => cmd_inpaint(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Enumcheck(a) => cmd_enumcheck(a, out),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Load a dataset and make sure it is binary, binarizing on request.
fn load_binary(path: &Path, binarize: bool, rng: &Rng) -> CliResult<Dataset> {
    let data = load_text_matrix(path)?;
    if data.is_binary() {
        Ok(data)
    } else if binarize {
        Ok(binarize_by_sampling(&data, &mut rng.clone()))
    } else {
        Err(Error::from(crate::error::DataError::NotBinary).into())
    }
}

fn check_dim(model: &Model, data: &Dataset) -> CliResult {
    if model.dim() != data.dim() {
        return Err(Error::Dimension {
            context: "checkpoint vs data",
            expected: model.dim(),
            found: data.dim(),
        }
        .into());
    }
    Ok(())
}

fn check_k_override(k: Option<usize>) -> CliResult {
    if k == Some(0) {
        return Err(usage("--k-override must be >= 1"));
    }
    Ok(())
}

/// Fully resolved configuration of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }
}

fn structure_from_args(a: &TrainArgs, dim: usize) -> CliResult<StructureConfig> {
    let layers = a.layers.unwrap_or(if a.hidden2.is_some() { 3 } else { 2 });
    let hidden2 = match (layers, a.hidden2) {
        (2, None) => None,
        (3, Some(h2)) => Some(h2),
        (2, Some(_)) => return Err(usage("--hidden2 requires a three-layer structure (--layers 3)")),
        (3, None) => return Err(usage("--layers 3 requires --hidden2")),
        (n, _) => return Err(usage(format!("--layers must be 2 or 3, got {n}"))),
    };
    let config = StructureConfig {
        dim,
        k: a.k,
        hidden1: a.hidden1,
        hidden2,
        activation: match a.activation {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Sigmoid => Activation::Sigmoid,
        },
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> CliResult {
    if matches!(a.mode, ModeArg::FinetuneOnly) && a.pretrain_epochs > 0 {
        return Err(usage("--pretrain-epochs conflicts with --mode finetune-only"));
    }
    if a.k == 0 || a.hidden1 == 0 || a.hidden2 == Some(0) {
        return Err(usage("--k, --hidden1 and --hidden2 must be >= 1"));
    }
    let train_config = TrainConfig {
        minibatch_size: a.batch,
        pretrain_epochs: a.pretrain_epochs,
        finetune_epochs: a.epochs,
        weight_decay: a.weight_decay,
        patience: a.patience,
        seed: a.seed,
        rho: a.rho,
        epsilon: a.epsilon,
    };
    train_config.validate().map_err(|e| usage(e.to_string()))?;

    let root = Rng::new(a.seed);
    let train_set = load_binary(&a.data, a.binarize, &root.stream("binarize-train"))?;
    let valid_set = load_binary(&a.valid, a.binarize, &root.stream("binarize-valid"))?;
    let config = structure_from_args(&a, train_set.dim())?;
    if valid_set.dim() != train_set.dim() {
        return Err(Error::Dimension {
            context: "validation vs training data",
            expected: train_set.dim(),
            found: valid_set.dim(),
        }
        .into());
    }

    let mean = empirical_mean(&train_set)?;
    let model = Model::initialized(config, mean, &mut root.stream("init"))?;
    let mode = match a.mode {
        ModeArg::PretrainThenFinetune => TrainMode::PretrainThenFinetune,
        ModeArg::FinetuneOnly => TrainMode::FinetuneOnly,
    };
    let outcome = train(model, &train_set, &valid_set, &train_config, mode)?;

    let meta = CheckpointMeta {
        epochs_completed: outcome.epochs_completed,
        best_valid: outcome.best_valid,
        seed: a.seed,
        extra: [(
            "best_epoch".to_string(),
            outcome.best_epoch.map_or("none".to_string(), |e| e.to_string()),
        )]
        .into(),
    };
    save_checkpoint(&a.out, &outcome.model, &meta)?;

    let history_path = with_suffix(&a.out, ".history");
    let mut h = create(&history_path)?;
    write_history(&outcome.history, &mut h)
        .and_then(|_| h.flush())
        .map_err(io_err(&history_path))?;

    let manifest = RunManifest {
        entries: vec![
            ("command".into(), "train".into()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("data".into(), a.data.display().to_string()),
            ("data_sha256".into(), sha256_file(&a.data)?),
            ("valid".into(), a.valid.display().to_string()),
            ("valid_sha256".into(), sha256_file(&a.valid)?),
            ("binarize".into(), a.binarize.to_string()),
            ("layers".into(), config.layers().to_string()),
            ("hidden1".into(), config.hidden1.to_string()),
            ("hidden2".into(), config.hidden2.map_or("none".into(), |h| h.to_string())),
            ("k".into(), config.k.to_string()),
            ("activation".into(), config.activation.to_string()),
            ("mode".into(), format!("{:?}", a.mode)),
            ("pretrain_epochs".into(), a.pretrain_epochs.to_string()),
            ("epochs".into(), a.epochs.to_string()),
            ("weight_decay".into(), a.weight_decay.to_string()),
            ("batch".into(), a.batch.to_string()),
            ("patience".into(), a.patience.to_string()),
            ("rho".into(), a.rho.to_string()),
            ("epsilon".into(), a.epsilon.to_string()),
            ("seed".into(), a.seed.to_string()),
            ("out".into(), a.out.display().to_string()),
        ],
    };
    let manifest_path = with_suffix(&a.out, ".manifest");
    let mut m = create(&manifest_path)?;
    manifest.write(&mut m).and_then(|_| m.flush()).map_err(io_err(&manifest_path))?;

    let _ = writeln!(
        out,
        "trained {} epochs; best validation loss {}",
        outcome.epochs_completed,
        outcome.best_valid.map_or("n/a".to_string(), |v| format!("{v:.6}"))
    );
    Ok(())
}

fn write_report(path: &Path, report: &EvalReport) -> CliResult {
    let mut w = create(path)?;
    report.write_text(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> CliResult {
    check_k_override(a.k_override)?;
    if a.orderings == 0 {
        return Err(usage("--orderings must be >= 1"));
    }
    let (model, _) = load_checkpoint(&a.model)?;
    let data = load_binary(&a.data, a.binarize, &Rng::new(a.seed).stream("binarize"))?;
    check_dim(&model, &data)?;
    let spec = EnsembleSpec::draw(model.dim(), a.orderings, a.seed)?;
    let report = ordering_stats(&model, &data, &spec, a.k_override)?;
    let _ = writeln!(out, "mean_log_prob {:.6}", report.mean);
    if a.ensemble {
        let _ = writeln!(out, "ensemble_log_prob {:.6}", report.mean_ensemble());
    }
    let path = a.report.unwrap_or_else(|| with_suffix(&a.model, ".eval.tsv"));
    write_report(&path, &report)
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write) -> CliResult {
    check_k_override(a.k_override)?;
    if a.orderings == 0 {
        return Err(usage("--orderings must be >= 1"));
    }
    let (model, _) = load_checkpoint(&a.model)?;
    let data = load_binary(&a.data, a.binarize, &Rng::new(a.seed).stream("binarize"))?;
    check_dim(&model, &data)?;
    let spec = EnsembleSpec::draw(model.dim(), a.orderings, a.seed)?;
    let report = ordering_stats(&model, &data, &spec, a.k_override)?;
    let opt = |v: Option<f64>| v.map_or("absent".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(out, "mean {:.6}", report.mean);
    let _ = writeln!(out, "sqrt_E_x_Var_o {}", opt(report.sd_over_orderings));
    let _ = writeln!(out, "sqrt_E_o_Var_x {}", opt(report.sd_over_samples));
    let path = a.out.unwrap_or_else(|| with_suffix(&a.model, ".stats.tsv"));
    write_report(&path, &report)
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("--grid {s:?} is not ROWSxCOLS")))?;
    let r = r.parse().map_err(|_| usage(format!("--grid rows {r:?}")))?;
    let c = c.parse().map_err(|_| usage(format!("--grid cols {c:?}")))?;
    Ok((r, c))
}

/// Binary PGM (P5) of `images` tiled row-major into a `rows × cols` grid.
/// Pixel value is `round(255·v)`; unused cells are black.
pub fn write_pgm_grid(
    out: &mut impl Write,
    images: &[Vec<f64>],
    img_w: usize,
    img_h: usize,
    rows: usize,
    cols: usize,
) -> std::io::Result<()> {
    let width = cols * img_w;
    let height = rows * img_h;
    write!(out, "P5\n{width} {height}\n255\n")?;
    let mut pixels = vec![0u8; width * height];
    for (n, img) in images.iter().take(rows * cols).enumerate() {
        let (gr, gc) = (n / cols, n % cols);
        for y in 0..img_h {
            for x in 0..img_w {
                let v = img[y * img_w + x].clamp(0.0, 1.0);
                pixels[(gr * img_h + y) * width + gc * img_w + x] = (255.0 * v).round() as u8;
            }
        }
    }
    out.write_all(&pixels)
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> CliResult {
    check_k_override(a.k_override)?;
    let grid = a.grid.as_deref().map(parse_grid).transpose()?;
    if a.pgm.is_none() && (grid.is_some() || a.img_w.is_some() || a.img_h.is_some()) {
        return Err(usage("--grid, --img-w and --img-h only apply with --pgm"));
    }
    let (model, _) = load_checkpoint(&a.model)?;
    let pgm = match &a.pgm {
        Some(path) => {
            let (w, h) = match (a.img_w, a.img_h) {
                (Some(w), Some(h)) if w * h == model.dim() => (w, h),
                (Some(w), Some(h)) => {
                    return Err(usage(format!("--img-w {w} x --img-h {h} does not equal D = {}", model.dim())))
                }
                _ => return Err(usage("--pgm requires --img-w and --img-h")),
            };
            let (rows, cols) = grid.unwrap_or_else(|| {
                let cols = (a.count as f64).sqrt().ceil() as usize;
                (if cols == 0 { 0 } else { a.count.div_ceil(cols) }, cols)
            });
            Some((path.clone(), w, h, rows, cols))
        }
        None => None,
    };

    let batch = sample_from_mixture(&model, a.count, &Rng::new(a.seed).stream("sampling"), a.k_override)?;
    let mut w = create(&a.out)?;
    write_rows(&mut w, batch.vectors.iter().map(Vec::as_slice))
        .and_then(|_| w.flush())
        .map_err(io_err(&a.out))?;
    if let Some((path, iw, ih, rows, cols)) = pgm {
        let mut p = create(&path)?;
        write_pgm_grid(&mut p, &batch.vectors, iw, ih, rows, cols)
            .and_then(|_| p.flush())
            .map_err(io_err(&path))?;
    }
    let _ = writeln!(out, "wrote {} samples to {}", batch.count(), a.out.display());
    Ok(())
}

fn read_observed(path: &Path, rows: usize, dim: usize) -> CliResult<Vec<Vec<usize>>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(&text).split('\n').collect();
    let parsed = lines
        .iter()
        .enumerate()
        .map(|(n, line)| {
            line.split_whitespace()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(i) if i < dim => Ok(i),
                    _ => Err(Error::contract(format!(
                        "{}: line {}: bad observed index {tok:?}",
                        path.display(),
                        n + 1
                    ))),
                })
                .collect::<Result<Vec<usize>, Error>>()
        })
        .collect::<Result<Vec<_>, Error>>()?;
    match parsed.len() {
        1 => Ok(vec![parsed[0].clone(); rows]),
        n if n == rows => Ok(parsed),
        n => Err(Error::contract(format!(
            "{}: {n} lines of observed indices for {rows} data rows",
            path.display()
        ))
        .into()),
    }
}

fn cmd_inpaint(a: InpaintArgs, out: &mut dyn Write) -> CliResult {
    check_k_override(a.k_override)?;
    let (model, _) = load_checkpoint(&a.model)?;
    let data = load_text_matrix(&a.data)?;
    check_dim(&model, &data)?;
    let observed = read_observed(&a.obs_file, data.len(), model.dim())?;
    let root = Rng::new(a.seed).stream("inpaint");

    let mut filled = Vec::with_capacity(data.len());
    let mut trace_rows = Vec::new();
    for (i, (x, obs)) in data.rows().zip(&observed).enumerate() {
        if let Some(&j) = obs.iter().find(|&&j| x[j] != 0.0 && x[j] != 1.0) {
            return Err(Error::contract(format!("row {}: observed value at {j} is not binary", i + 1)).into());
        }
        filled.push(inpaint(&model, x, obs, &mut root.substream(i as u64), a.k_override)?);
        if a.trace.is_some() {
            trace_rows.push(x.to_vec());
            trace_rows.extend(reconstruction_trace(&model, x, obs, a.k_override)?);
        }
    }
    let mut w = create(&a.out)?;
    write_rows(&mut w, filled.iter().map(Vec::as_slice))
        .and_then(|_| w.flush())
        .map_err(io_err(&a.out))?;
    if let Some(path) = &a.trace {
        let mut t = create(path)?;
        write_rows(&mut t, trace_rows.iter().map(Vec::as_slice))
            .and_then(|_| t.flush())
            .map_err(io_err(path))?;
    }
    let _ = writeln!(out, "inpainted {} rows to {}", filled.len(), a.out.display());
    Ok(())
}

fn cmd_enumcheck(a: EnumcheckArgs, out: &mut dyn Write) -> CliResult {
    check_k_override(a.k_override)?;
    if a.orderings == 0 {
        return Err(usage("--orderings must be >= 1"));
    }
    let (model, _) = load_checkpoint(&a.model)?;
    if model.dim() > MAX_ENUMERATION_DIM {
        return Err(Error::contract(format!(
            "enumeration refused: D = {} exceeds {MAX_ENUMERATION_DIM}",
            model.dim()
        ))
        .into());
    }
    let spec = if a.orderings == 1 && a.seed == 0 {
        EnsembleSpec::from_orderings(vec![Ordering::identity(model.dim())])?
    } else {
        EnsembleSpec::draw(model.dim(), a.orderings, a.seed)?
    };
    let mut worst: f64 = 0.0;
    for (n, o) in spec.orderings.iter().enumerate() {
        let total: f64 = enumerate_distribution(&model, o, a.k_override)?.iter().sum();
        let residual = (total - 1.0).abs();
        worst = worst.max(residual);
        let _ = writeln!(out, "ordering {n} residual {residual:e}");
    }
    if spec.len() > 1 {
        let total: f64 = enumerate_mixture(&model, &spec, a.k_override)?.iter().sum();
        let residual = (total - 1.0).abs();
        worst = worst.max(residual);
        let _ = writeln!(out, "mixture residual {residual:e}");
    }
    let _ = writeln!(out, "max residual {worst:e} (tolerance {ENUMCHECK_TOLERANCE:e})");
    if worst < ENUMCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(Error::contract(format!("normalization residual {worst:e} exceeds tolerance")).into())
    }
}
