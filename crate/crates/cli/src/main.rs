//! Command-line pipeline for ice-bottom surface reconstruction:
//! `synth` generates benchmark data, `train` fits model parameters,
//! `infer` reconstructs a surface, `eval` scores it, `export-plot`
//! renders slice overlays and a depth map.
//!
//! Exit codes: 0 success, 1 infeasible instance, 2 bad input, 3 I/O failure.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use icebound_core::baselines::{solve_independent, BetaMode};
use icebound_core::trw::{self, TrwConfig};
use icebound_core::{
    dataio, eval, synth, training, validate_sequence, DataError, EnergyParams, ExtraEvidence,
    MessageKernel, ModelError, Surface, TopoSequence,
};

#[derive(Parser)]
#[command(name = "icebound", version, about = "3D ice-bottom surface reconstruction from radar tomography slices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverKind {
    /// Tree-reweighted message passing over the full 3D grid.
    Trw,
    /// Per-slice Viterbi with one fixed smoothness weight.
    Viterbi,
    /// Per-slice Viterbi with dynamic per-column weights.
    Dv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence container plus ground-truth surface.
    Synth {
        /// TOML generator configuration (alternative to --suite).
        #[arg(long, conflicts_with = "suite")]
        config: Option<PathBuf>,
        /// Named benchmark suite entry: easy, noisy, or rough.
        #[arg(long)]
        suite: Option<String>,
        /// Master seed; overrides the seed in --config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the container and ground_truth.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn template and pairwise parameters from labeled sequences.
    Train {
        /// Sequence container directories (one per labeled surface).
        #[arg(long = "data", required = true)]
        data: Vec<PathBuf>,
        /// Ground-truth surface CSVs, matching --data order.
        #[arg(long = "labels", required = true)]
        labels: Vec<PathBuf>,
        /// Output parameter manifest.
        #[arg(long)]
        out: PathBuf,
        /// Template length in pixels (odd).
        #[arg(long, default_value_t = 11)]
        template_len: usize,
        /// Air-margin threshold in rows.
        #[arg(long, default_value_t = 10)]
        tau: usize,
        /// Use one constant smoothness weight instead of per-column weights.
        #[arg(long)]
        constant_beta: bool,
    },
    /// Reconstruct a surface from a sequence container.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum)]
        solver: SolverKind,
        /// Extra-evidence CSV (`i,j,lo,hi`; a pin has lo == hi).
        #[arg(long)]
        extra: Option<PathBuf>,
        /// Iteration cap for the trw solver (default: slice width).
        #[arg(long)]
        iters: Option<usize>,
        /// Use the exhaustive message kernel instead of the fast one.
        #[arg(long)]
        naive_messages: bool,
        /// Output surface CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a predicted surface against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Precision tolerances in pixels.
        #[arg(long = "k", value_delimiter = ',', default_values_t = vec![1usize, 5])]
        k: Vec<usize>,
        /// Output prefix: writes <out>.txt and <out>.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render per-slice overlays and a depth map as PPM images.
    ExportPlot {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        surface: PathBuf,
        /// Output prefix: writes <prefix>_depth.ppm and <prefix>_slice_NNNN.ppm.
        #[arg(long)]
        out: String,
    },
}

/// Failure classified by exit code.
enum Failure {
    Infeasible(String),
    BadInput(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::BadInput(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Infeasible(m) | Failure::BadInput(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Infeasible { .. } | ModelError::EmptyFeasibleSet { .. } => {
                Failure::Infeasible(e.to_string())
            }
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => Failure::Io(e.to_string()),
            DataError::Model(m) => m.into(),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth { config, suite, seed, out } => cmd_synth(config, suite, seed, &out),
        Command::Train { data, labels, out, template_len, tau, constant_beta } => {
            cmd_train(&data, &labels, &out, template_len, tau, constant_beta)
        }
        Command::Infer { data, params, solver, extra, iters, naive_messages, out } => {
            cmd_infer(&data, &params, solver, extra.as_deref(), iters, naive_messages, &out)
        }
        Command::Eval { pred, gt, k, out } => cmd_eval(&pred, &gt, &k, &out),
        Command::ExportPlot { data, surface, out } => cmd_export_plot(&data, &surface, &out),
    }
}

fn cmd_synth(
    config: Option<PathBuf>,
    suite: Option<String>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    let mut cfg = match (config, suite) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Failure::BadInput(format!("cannot read config {}: {e}", path.display()))
            })?;
            toml::from_str::<synth::SynthConfig>(&text)
                .map_err(|e| Failure::BadInput(format!("config {}: {e}", path.display())))?
        }
        (None, Some(name)) => synth::suite_config(&name, seed.unwrap_or(0)).ok_or_else(|| {
            Failure::BadInput(format!("unknown suite entry {name:?} (easy, noisy, rough)"))
        })?,
        _ => {
            return Err(Failure::BadInput(
                "exactly one of --config and --suite is required".into(),
            ))
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (seq, gt) = synth::generate(&cfg)?;
    dataio::write_sequence(&seq, out)?;
    dataio::write_surface(&gt, &out.join("ground_truth.csv"))?;
    let (l, phi, rho) = seq.dims();
    println!(
        "wrote {l}x{phi}x{rho} sequence (seed {}) to {}",
        cfg.seed,
        out.display()
    );
    Ok(())
}

fn load_validated_sequence(dir: &Path) -> Result<TopoSequence, Failure> {
    let seq = dataio::read_sequence(dir)?;
    let violations = validate_sequence(&seq);
    if !violations.is_empty() {
        let mut msg = format!("{} invariant violations in {}:", violations.len(), dir.display());
        for v in violations.iter().take(5) {
            msg.push_str(&format!("\n  {v}"));
        }
        return Err(Failure::BadInput(msg));
    }
    Ok(seq)
}

fn cmd_train(
    data: &[PathBuf],
    labels: &[PathBuf],
    out: &Path,
    template_len: usize,
    tau: usize,
    constant_beta: bool,
) -> Result<(), Failure> {
    if data.len() != labels.len() {
        return Err(Failure::BadInput(format!(
            "{} --data directories but {} --labels files",
            data.len(),
            labels.len()
        )));
    }
    let mut pairs = Vec::new();
    for (d, lbl) in data.iter().zip(labels) {
        let seq = load_validated_sequence(d)?;
        let surf = dataio::read_surface(lbl)?;
        pairs.push((seq, surf));
    }
    let borrowed: Vec<(&TopoSequence, &Surface)> =
        pairs.iter().map(|(s, g)| (s, g)).collect();
    let template = training::learn_template(&borrowed, template_len)?;
    let surfaces: Vec<&Surface> = pairs.iter().map(|(_, g)| g).collect();
    let est = training::learn_pairwise(&surfaces, !constant_beta)?;
    let params = EnergyParams::new(template, tau, est.alpha, est.sigma_hat, est.beta)?;
    dataio::write_params(&params, out)?;
    println!(
        "learned template (t = {}), alpha = {}, sigma_hat = {:.4}; wrote {}",
        params.template.len(),
        params.alpha,
        params.sigma_hat,
        out.display()
    );
    Ok(())
}

fn cmd_infer(
    data: &Path,
    params_path: &Path,
    solver: SolverKind,
    extra_path: Option<&Path>,
    iters: Option<usize>,
    naive_messages: bool,
    out: &Path,
) -> Result<(), Failure> {
    let seq = load_validated_sequence(data)?;
    let params = dataio::read_params(params_path)?;
    params.check_phi(seq.columns())?;
    let extra = match extra_path {
        Some(p) => {
            let e = dataio::read_extra(p)?;
            e.validate(&seq)?;
            e
        }
        None => ExtraEvidence::default(),
    };
    let kernel = if naive_messages {
        MessageKernel::Naive
    } else {
        MessageKernel::Fast
    };

    let surface = match solver {
        SolverKind::Trw => {
            let cfg = TrwConfig {
                max_iterations: iters,
                kernel,
                ..TrwConfig::default()
            };
            let outcome = trw::infer(&seq, &params, &extra, &cfg)?;
            println!(
                "trw: energy {:.6}, lower bound {:.6} after {} iterations",
                outcome.energy,
                outcome.bound_trace.last().copied().unwrap_or(f64::NEG_INFINITY),
                outcome.bound_trace.len()
            );
            outcome.surface
        }
        SolverKind::Viterbi | SolverKind::Dv => {
            let mode = match solver {
                SolverKind::Viterbi => BetaMode::Fixed,
                _ => BetaMode::Dynamic,
            };
            let surface = solve_independent(&seq, &params, &extra, mode, kernel)?;
            let energy = icebound_core::total_energy(&surface, &seq, &params, &extra);
            println!("{solver:?}: per-slice optimum, total 3D energy {energy:.6}");
            surface
        }
    };
    dataio::write_surface(&surface, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_eval(pred: &Path, gt: &Path, ks: &[usize], out: &Path) -> Result<(), Failure> {
    let pred = dataio::read_surface(pred)?;
    let gt = dataio::read_surface(gt)?;
    let report = eval::evaluate(&pred, &gt, ks)?;
    let table = report.text_table();
    print!("{table}");
    let txt_path = out.with_extension("txt");
    dataio::write_atomic(&txt_path, table.as_bytes())?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let json_path = out.with_extension("json");
    dataio::write_atomic(&json_path, json.as_bytes())?;
    println!("wrote {} and {}", txt_path.display(), json_path.display());
    Ok(())
}

fn cmd_export_plot(data: &Path, surface_path: &Path, prefix: &str) -> Result<(), Failure> {
    let seq = load_validated_sequence(data)?;
    let surface = dataio::read_surface(surface_path)?;
    let (l, phi, rho) = seq.dims();
    if surface.dims() != (l, phi) {
        return Err(Failure::BadInput(format!(
            "surface is {:?} but the sequence is {l}x{phi}",
            surface.dims()
        )));
    }
    if !surface.in_bounds(rho) {
        return Err(Failure::BadInput("surface label exceeds rho - 1".into()));
    }
    let depth = plot::depth_map_ppm(&surface, rho);
    dataio::write_atomic(Path::new(&format!("{prefix}_depth.ppm")), &depth)?;
    for i in 0..l {
        let img = plot::slice_overlay_ppm(&seq, &surface, i);
        dataio::write_atomic(Path::new(&format!("{prefix}_slice_{i:04}.ppm")), &img)?;
    }
    println!("wrote {prefix}_depth.ppm and {l} slice overlays");
    Ok(())
}
