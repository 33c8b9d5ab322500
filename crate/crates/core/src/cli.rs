//! Command-line front end: `complete`, `synth`, `eval` and `spectrum`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::completion::{SamplingMask, Solver, SolverConfig, SolverReport, TriggerMode};
use crate::error::Error;
use crate::linalg::{singular_values, write_spectrum_csv};
use crate::media::{load_mask_for, load_media, save_mask, save_media, Media};
use crate::metrics::{self, MetricConfig};
use crate::synth::{pure_tucker_tensor, rng};
use crate::tensor::QuaternionTensor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "quatfill",
    version,
    about = "Low-rank quaternion completion of color images and videos"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop pixels from media (or apply a mask) and recover them.
    Complete(CompleteArgs),
    /// Generate a low-rank pure tensor, mask it and recover it.
    Synth(SynthArgs),
    /// Compare recovered media against a reference.
    Eval(EvalArgs),
    /// Singular values of one unfolding, one per line.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Matrix,
    Tensor,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// LRC-QM (matrix) or LRC-QT (tensor); defaults to matrix for order-2 data.
    #[arg(long, value_enum)]
    pub mode: Option<SolverMode>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub beta0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub beta_max: Option<Vec<f64>>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eta_trigger: Option<f64>,
    #[arg(long, value_enum)]
    pub trigger_mode: Option<TriggerArg>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Worker threads for the per-mode updates.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TriggerArg {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Args)]
pub struct CompleteArgs {
    /// PNG/BMP image, frame directory or .qt1 tensor.
    #[arg(long)]
    pub input: PathBuf,
    /// Fraction of entries kept; conflicts with --mask.
    #[arg(long, conflicts_with = "mask")]
    pub sr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// QMSK1 mask file.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Also write the generated mask here.
    #[arg(long)]
    pub save_mask: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
    #[arg(long)]
    pub sr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Receives truth.qt1, mask.qmsk, recovered.qt1 and report.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub recovered: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Unfolding mode.
    #[arg(long, default_value_t = 0)]
    pub mode: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Solver settings echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: SolverMode,
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub threads: Option<usize>,
}

/// Quality indexes; `psnr` is the string `"inf"` for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(with = "psnr_json")]
    pub psnr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ssim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub assim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: String,
    pub shape: Vec<usize>,
    pub order: usize,
    pub sr: f64,
    pub seed: Option<u64>,
    pub mask_file: Option<String>,
    pub config: ConfigEcho,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub metrics: MetricsReport,
    pub delta_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relative_error: Option<f64>,
}

mod psnr_json {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad psnr value {t:?}"))),
        }
    }
}

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(e) => exit_code_for(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ShapeMismatch(_) | Error::InvalidMode { .. } | Error::InvalidArgument(_) => {
            EXIT_USAGE
        }
        Error::Decomposition(_) => EXIT_NUMERICAL,
        Error::UnsupportedFormat(_)
        | Error::UnsupportedDepth(_)
        | Error::Malformed(_)
        | Error::Codec(_)
        | Error::Io(_) => EXIT_IO,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Complete(a) => cmd_complete(a).map(|_| ()),
        Command::Synth(a) => cmd_synth(a).map(|_| ()),
        Command::Eval(a) => {
            let m = cmd_eval(a)?;
            println!("{}", to_json(&m)?);
            Ok(())
        }
        Command::Spectrum(a) => cmd_spectrum(a),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Run(Error::Io(e.into())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    fs::write(path, to_json(v)? + "\n")?;
    Ok(())
}

fn default_mode(order: usize) -> SolverMode {
    if order == 2 {
        SolverMode::Matrix
    } else {
        SolverMode::Tensor
    }
}

/// Builds the solver configuration for data of the given order, starting from
/// the defaults and applying overrides.
pub fn build_config(a: &SolverArgs, order: usize) -> Result<ConfigEcho, CliError> {
    let mode = a.mode.unwrap_or_else(|| default_mode(order));
    if mode == SolverMode::Matrix && order != 2 {
        return Err(CliError::Usage(format!(
            "matrix mode needs order-2 data, got order {order}"
        )));
    }
    let modes = match mode {
        SolverMode::Matrix => 1,
        SolverMode::Tensor => order,
    };
    let mut cfg = match (mode, &a.alpha, &a.beta0) {
        (SolverMode::Matrix, _, _) => SolverConfig::matrix_default(),
        (SolverMode::Tensor, Some(_), Some(_)) => SolverConfig {
            beta_max: vec![1e3; modes],
            ..SolverConfig::matrix_default()
        },
        (SolverMode::Tensor, _, _) => {
            SolverConfig::default_for_order(order).map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    if let Some(v) = &a.alpha {
        cfg.alpha = v.clone();
    }
    if let Some(v) = &a.beta0 {
        cfg.beta0 = v.clone();
    }
    if let Some(v) = &a.beta_max {
        cfg.beta_max = v.clone();
    }
    if let Some(v) = a.eta0 {
        cfg.eta0 = v;
    }
    if let Some(v) = a.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = a.eta_trigger {
        cfg.eta_trigger = v;
    }
    if let Some(v) = a.trigger_mode {
        cfg.trigger_mode = match v {
            TriggerArg::Absolute => TriggerMode::Absolute,
            TriggerArg::Relative => TriggerMode::Relative,
        };
    }
    if let Some(v) = a.max_iter {
        cfg.max_iter = v;
    }
    if a.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    cfg.validate(modes)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(ConfigEcho {
        mode,
        solver: cfg,
        threads: a.threads,
    })
}

/// Runs the selected solver; `y` must already be masked.
fn solve(
    y: &QuaternionTensor,
    mask: &SamplingMask,
    echo: &ConfigEcho,
) -> Result<(QuaternionTensor, SolverReport), CliError> {
    let mut solver = Solver::new(echo.solver.clone()).on_iteration(|info| {
        log::debug!(
            "iter {:>4} delta {:.6e} beta {:?}",
            info.tau,
            info.delta,
            info.beta
        );
    });
    if let Some(n) = echo.threads {
        solver = solver.threads(n);
    }
    let (t, report) = match echo.mode {
        SolverMode::Matrix => {
            let (m, r) = solver.complete_matrix(&y.unfold(0)?, mask)?;
            (QuaternionTensor::from_matrix(&m), r)
        }
        SolverMode::Tensor => solver.complete_tensor(y, mask)?,
    };
    log::info!(
        "{} iterations, converged = {}, {:.3} s",
        report.iterations,
        report.converged,
        report.wall_time
    );
    Ok((t, report))
}

/// PSNR plus SSIM (images) or ASSIM (videos) of `recovered` against `reference`.
pub fn media_metrics(recovered: &Media, reference: &Media) -> Result<MetricsReport, Error> {
    let cfg = MetricConfig::default();
    match (recovered, reference) {
        (Media::Image(x), Media::Image(t)) => Ok(MetricsReport {
            psnr: metrics::psnr(x, t, &cfg)?,
            ssim: Some(metrics::ssim(x, t, &cfg)?),
            assim: None,
        }),
        (Media::Video(x), Media::Video(t)) => Ok(MetricsReport {
            psnr: metrics::psnr_video(x, t, &cfg)?,
            ssim: None,
            assim: Some(metrics::assim(x, t, &cfg)?),
        }),
        (x, t) => {
            let (x, t) = (x.to_tensor(), t.to_tensor());
            x.check_same_shape(&t)?;
            Ok(MetricsReport {
                psnr: metrics::psnr_scalars(
                    x.planes().iter().map(Vec::as_slice),
                    t.planes().iter().map(Vec::as_slice),
                    &cfg,
                )?,
                ssim: None,
                assim: None,
            })
        }
    }
}

pub fn cmd_complete(a: &CompleteArgs) -> Result<RunReport, CliError> {
    let media = load_media(&a.input)?;
    let truth = media.to_tensor();
    let shape = truth.shape().to_vec();
    let echo = build_config(&a.solver, shape.len())?;
    let (mask, seed) = match (&a.mask, a.sr) {
        (Some(path), _) => (load_mask_for(path, &shape)?, None),
        (None, Some(sr)) => (
            SamplingMask::generate(&shape, sr, a.seed)
                .map_err(|e| CliError::Usage(e.to_string()))?,
            Some(a.seed),
        ),
        (None, None) => return Err(CliError::Usage("either --sr or --mask is required".into())),
    };
    if let Some(p) = &a.save_mask {
        save_mask(p, &mask)?;
    }
    let y = mask.apply(&truth)?;
    let start = Instant::now();
    let (t, solver_report) = solve(&y, &mask, &echo)?;
    let wall = start.elapsed().as_secs_f64();
    let recovered = media.like(&t)?;
    save_media(&a.out, &recovered)?;
    let report = RunReport {
        input: a.input.display().to_string(),
        order: shape.len(),
        shape,
        sr: mask.sr(),
        seed,
        mask_file: a.mask.as_ref().map(|p| p.display().to_string()),
        config: echo,
        iterations: solver_report.iterations,
        converged: solver_report.converged,
        wall_time_s: wall,
        metrics: media_metrics(&recovered, &media)?,
        delta_trace: solver_report.delta_history,
        relative_error: None,
    };
    if let Some(p) = &a.report {
        write_json(p, &report)?;
    }
    Ok(report)
}

pub fn cmd_synth(a: &SynthArgs) -> Result<RunReport, CliError> {
    let mut r = rng(a.seed);
    let truth = pure_tucker_tensor(&mut r, &a.shape, &a.ranks)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let echo = build_config(&a.solver, truth.order())?;
    let mask = SamplingMask::generate(truth.shape(), a.sr, a.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    fs::create_dir_all(&a.out_dir)?;
    save_media(&a.out_dir.join("truth.qt1"), &Media::Tensor(truth.clone()))?;
    save_mask(&a.out_dir.join("mask.qmsk"), &mask)?;
    let y = mask.apply(&truth)?;
    let start = Instant::now();
    let (t, solver_report) = solve(&y, &mask, &echo)?;
    let wall = start.elapsed().as_secs_f64();
    save_media(&a.out_dir.join("recovered.qt1"), &Media::Tensor(t.clone()))?;

    let rel = t.sub(&truth)?.frobenius() / truth.frobenius();
    // unit-scale data: PSNR is taken against the largest truth magnitude
    let peak = truth
        .planes()
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let cfg = MetricConfig {
        peakval: peak,
        ..MetricConfig::default()
    };
    let psnr = metrics::psnr_scalars(
        t.planes().iter().map(Vec::as_slice),
        truth.planes().iter().map(Vec::as_slice),
        &cfg,
    )?;
    let report = RunReport {
        input: format!("synthetic:tucker{:?}", a.ranks),
        shape: a.shape.clone(),
        order: a.shape.len(),
        sr: mask.sr(),
        seed: Some(a.seed),
        mask_file: None,
        config: echo,
        iterations: solver_report.iterations,
        converged: solver_report.converged,
        wall_time_s: wall,
        metrics: MetricsReport {
            psnr,
            ssim: None,
            assim: None,
        },
        delta_trace: solver_report.delta_history,
        relative_error: Some(rel),
    };
    write_json(&a.out_dir.join("report.json"), &report)?;
    Ok(report)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<MetricsReport, CliError> {
    let x = load_media(&a.recovered)?;
    let t = load_media(&a.reference)?;
    let m = media_metrics(&x, &t)?;
    if let Some(p) = &a.report {
        write_json(p, &m)?;
    }
    Ok(m)
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let t = load_media(&a.input)?.to_tensor();
    let values = singular_values(&t.unfold(a.mode)?)?;
    match &a.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_spectrum_csv(&mut w, &values)?;
            w.flush()?;
        }
        None => write_spectrum_csv(io::stdout().lock(), &values)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver_args() -> SolverArgs {
        SolverArgs {
            mode: None,
            alpha: None,
            beta0: None,
            beta_max: None,
            eta0: None,
            eps: None,
            eta_trigger: None,
            trigger_mode: None,
            max_iter: None,
            threads: None,
        }
    }

    #[test]
    fn config_defaults_by_order() {
        let a = solver_args();
        let m = build_config(&a, 2).unwrap();
        assert_eq!(m.mode, SolverMode::Matrix);
        assert_eq!(m.solver, SolverConfig::matrix_default());
        let t = build_config(&a, 3).unwrap();
        assert_eq!(t.solver, SolverConfig::tensor_default());
        assert!(matches!(build_config(&a, 4), Err(CliError::Usage(_))));
    }

    #[test]
    fn config_overrides() {
        let a = SolverArgs {
            mode: Some(SolverMode::Tensor),
            alpha: Some(vec![1.0, 1.0]),
            beta0: Some(vec![0.5, 0.5]),
            eps: Some(1e-4),
            trigger_mode: Some(TriggerArg::Absolute),
            ..solver_args()
        };
        let c = build_config(&a, 2).unwrap();
        assert_eq!(c.solver.beta_max, vec![1e3, 1e3]);
        assert_eq!(c.solver.epsilon, 1e-4);
        assert_eq!(c.solver.trigger_mode, TriggerMode::Absolute);
        let bad = SolverArgs {
            mode: Some(SolverMode::Matrix),
            ..solver_args()
        };
        assert!(build_config(&bad, 3).is_err());
        let zero = SolverArgs {
            threads: Some(0),
            ..solver_args()
        };
        assert!(build_config(&zero, 2).is_err());
    }

    #[test]
    fn psnr_inf_round_trips() {
        let m = MetricsReport {
            psnr: f64::INFINITY,
            ssim: Some(1.0),
            assim: None,
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"psnr":"inf","ssim":1.0}"#);
        assert_eq!(serde_json::from_str::<MetricsReport>(&s).unwrap(), m);
        assert!(serde_json::from_str::<MetricsReport>(r#"{"psnr":"nan"}"#).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::arg("x")), EXIT_USAGE);
        assert_eq!(
            exit_code_for(&Error::Decomposition("x".into())),
            EXIT_NUMERICAL
        );
        assert_eq!(exit_code_for(&Error::malformed("x")), EXIT_IO);
        assert_eq!(run(["quatfill", "bogus"]), EXIT_USAGE);
    }
}
