//! Experiment command line: dataset generation, Gram matrices, training,
//! table reproduction, decision-boundary grids and fidelity sweeps.

pub mod config;
pub mod tables;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{load_csv, save_csv, split, Dataset, PhaseScaler};
use crate::dqc1::{average_fidelity, noisy_offdiagonal, predicted_fidelity, NoiseModel};
use crate::circuit::FeatureMapSpec;
use crate::error::{Error, Result};
use crate::kernel::{quantum_gram, GramMatrix};
use crate::svm::{cross_validate_gram, score, train_smo, CScanReport, SmoParams, SvmModel};
use crate::util::{format_sig12, mix_seed};

pub use config::{CSetting, DatasetKind, ExperimentConfig, KernelMode, RegisterKind};
pub use tables::{reproduce_tables, TablesOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dqc1", version, about = "One-clean-qubit quantum kernel experiments")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset, split it and fit the phase scaler.
    GenData(ExpArgs),
    /// Quantum Gram matrices (train×train, test×train) from generated data.
    Gram(ExpArgs),
    /// Train an SVM on the Gram matrices and score it.
    TrainEval(ExpArgs),
    /// Rebuild both accuracy tables and compare with the published numbers.
    ReproduceTables(ExpArgs),
    /// Decision values of the trained model on a regular grid.
    BoundaryGrid {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Average fidelity of the noisy circuit against its closed form.
    FidelitySweep {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.05, 0.1, 0.2, 0.3])]
        p_values: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenData(_) => "gen-data",
            Command::Gram(_) => "gram",
            Command::TrainEval(_) => "train-eval",
            Command::ReproduceTables(_) => "reproduce-tables",
            Command::BoundaryGrid { .. } => "boundary-grid",
            Command::FidelitySweep { .. } => "fidelity-sweep",
        }
    }

    fn exp(&self) -> &ExpArgs {
        match self {
            Command::GenData(e)
            | Command::Gram(e)
            | Command::TrainEval(e)
            | Command::ReproduceTables(e)
            | Command::BoundaryGrid { exp: e, .. }
            | Command::FidelitySweep { exp: e, .. } => e,
        }
    }
}

/// Per-experiment overrides of config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct ExpArgs {
    /// Dataset family.
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetKind>,
    /// Gaussian noise standard deviation added to the points.
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    /// Total number of points before the split.
    #[arg(long)]
    pub n: Option<usize>,
    /// Inner-circle radius for the circles dataset.
    #[arg(long)]
    pub factor: Option<f64>,
    /// Fraction of points used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Feature-map depth.
    #[arg(long)]
    pub r: Option<usize>,
    /// Initial state of the work register.
    #[arg(long, value_enum)]
    pub register: Option<RegisterKind>,
    /// Exact, shot-sampled or depolarized kernel.
    #[arg(long, value_enum)]
    pub mode: Option<KernelMode>,
    /// Shots per quadrature.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Target estimation accuracy for sampled mode.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Allowed failure probability for sampled mode.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Control-qubit polarization.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Depolarizing strength per block.
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// SVM C; several comma-separated values are chosen between by cross-validation.
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// SMO KKT tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// SMO passes without progress before stopping.
    #[arg(long)]
    pub max_passes: Option<usize>,
    /// Lower end of the phase interval features are scaled into.
    #[arg(long, allow_negative_numbers = true)]
    pub phase_start: Option<f64>,
    /// Width of the phase interval.
    #[arg(long)]
    pub phase_width: Option<f64>,
}

impl ExpArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$target = v; })*
            };
        }
        set!(dataset => dataset, zeta => zeta, n => n, factor => factor,
             train_fraction => train_fraction, r => r, register => register,
             mode => kernel_mode, folds => folds, tol => tol, max_passes => max_passes);
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = Some(v); })*
            };
        }
        set_opt!(shots, epsilon, delta, beta, noise_p);
        if let Some(cs) = &self.c {
            cfg.svm_c = if cs.len() == 1 {
                CSetting::Single(cs[0])
            } else {
                CSetting::Scan(cs.clone())
            };
        }
        if let Some(s) = self.phase_start {
            cfg.phase_interval.start = s;
        }
        if let Some(w) = self.phase_width {
            cfg.phase_interval.width = w;
        }
    }
}

/// Config file, then global flags, then command flags.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    cli.command.exp().apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CommandRecord {
    pub config: ExperimentConfig,
    pub timings_s: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub details: serde_json::Value,
}

/// `manifest.json`: one record per command last run in the directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub library_version: String,
    pub commands: BTreeMap<String, CommandRecord>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn record(dir: &Path, name: &str, rec: CommandRecord) -> Result<()> {
        let mut m = Manifest::load(dir).unwrap_or_default();
        m.library_version = crate::VERSION.to_string();
        m.commands.insert(name.to_string(), rec);
        write_text(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&m)? + "\n"))
    }

    pub fn command(&self, name: &str) -> Result<&CommandRecord> {
        self.commands
            .get(name)
            .ok_or_else(|| Error::invalid(format!("manifest has no record of `{name}`; run it first")))
    }
}

struct Timer {
    start: Instant,
    laps: BTreeMap<String, f64>,
}

impl Timer {
    fn new() -> Self {
        Timer {
            start: Instant::now(),
            laps: BTreeMap::new(),
        }
    }

    fn lap(&mut self, name: &str) {
        let t = self.start.elapsed().as_secs_f64();
        let prev: f64 = self.laps.values().sum();
        self.laps.insert(name.to_string(), t - prev);
    }

    fn finish(mut self) -> BTreeMap<String, f64> {
        let total = self.start.elapsed().as_secs_f64();
        self.laps.insert("total".to_string(), total);
        self.laps
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Summary of a completed command: files written and structured details.
pub struct Outcome {
    pub outputs: Vec<String>,
    pub details: serde_json::Value,
    pub summary: String,
}

pub fn gen_data(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let ds = tables::generate(cfg, cfg.dataset, cfg.zeta, cfg.seed)?;
    let (train, test) = split(&ds, cfg.train_fraction, mix_seed(cfg.seed, 1, 0))?;
    let scaler = PhaseScaler::fit_with_interval(&train, cfg.phase_interval)?;
    save_csv(&train, &dir.join("train.csv"))?;
    save_csv(&test, &dir.join("test.csv"))?;
    scaler.save(&dir.join("scaler.json"))?;
    let (tp, tn) = train.class_counts();
    let (sp, sn) = test.class_counts();
    Ok(Outcome {
        outputs: vec!["train.csv".into(), "test.csv".into(), "scaler.json".into()],
        details: serde_json::json!({
            "train": {"size": train.len(), "positive": tp, "negative": tn},
            "test": {"size": test.len(), "positive": sp, "negative": sn},
        }),
        summary: format!(
            "{} zeta={}: train {} (+1: {tp}, -1: {tn}), test {} (+1: {sp}, -1: {sn})",
            tables::family_name(cfg.dataset),
            cfg.zeta,
            train.len(),
            test.len()
        ),
    })
}

struct PhaseData {
    train: Dataset,
    test: Dataset,
    scaler: PhaseScaler,
}

fn load_phase_data(dir: &Path) -> Result<PhaseData> {
    let train = load_csv(&dir.join("train.csv"))?;
    let test = load_csv(&dir.join("test.csv"))?;
    let scaler = PhaseScaler::load(&dir.join("scaler.json"))?;
    Ok(PhaseData { train, test, scaler })
}

pub fn gram(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dir = &cfg.output_dir;
    let data = load_phase_data(dir)?;
    let xtr = data.scaler.apply(&data.train).points;
    let xte = data.scaler.apply(&data.test).points;
    let prep = cfg.register.prep();
    let mode = cfg.gram_mode()?;
    let g_train = quantum_gram(&xtr, &xtr, cfg.r, &prep, mode)?;
    let g_test = quantum_gram(&xte, &xtr, cfg.r, &prep, mode)?;
    g_train.save_csv(&dir.join("gram_train.csv"))?;
    g_train.save_binary(&dir.join("gram_train.bin"))?;
    g_test.save_csv(&dir.join("gram_test.csv"))?;
    g_test.save_binary(&dir.join("gram_test.bin"))?;
    let shots_needed = match cfg.kernel_mode {
        KernelMode::Sampled => Some(cfg.shot_plan()?.shots_x),
        _ => None,
    };
    let diag_min = (0..g_train.rows()).map(|i| g_train.get(i, i)).fold(f64::INFINITY, f64::min);
    let diag_max = (0..g_train.rows()).map(|i| g_train.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        outputs: ["gram_train.csv", "gram_train.bin", "gram_test.csv", "gram_test.bin"]
            .map(String::from)
            .to_vec(),
        details: serde_json::json!({
            "method": g_train.method,
            "params": g_train.params,
            "train_shape": [g_train.rows(), g_train.cols()],
            "test_shape": [g_test.rows(), g_test.cols()],
            "shots_needed": shots_needed,
            "train_diagonal_range": [diag_min, diag_max],
        }),
        summary: format!(
            "{:?} {} r={}: train {}x{}, test {}x{}, diagonal in [{}, {}]",
            cfg.kernel_mode,
            prep.label(),
            cfg.r,
            g_train.rows(),
            g_train.cols(),
            g_test.rows(),
            g_test.cols(),
            format_sig12(diag_min),
            format_sig12(diag_max)
        ),
    })
}

fn load_grams(dir: &Path) -> Result<(GramMatrix, GramMatrix)> {
    let m = Manifest::load(dir)?;
    let rec = m.command("gram")?;
    let method = serde_json::from_value(rec.details["method"].clone())?;
    let params = serde_json::from_value(rec.details["params"].clone())?;
    let tr = GramMatrix::load_binary(&dir.join("gram_train.bin"), method, params)?;
    let params = serde_json::from_value(rec.details["params"].clone())?;
    let te = GramMatrix::load_binary(&dir.join("gram_test.bin"), method, params)?;
    Ok((tr, te))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainReport {
    pub c: f64,
    pub train_score: f64,
    pub test_score: f64,
    pub n_support: usize,
    pub converged: bool,
    pub solver: crate::svm::SolverInfo,
    pub c_scan: Option<CScanReport>,
}

fn smo_params(cfg: &ExperimentConfig, c: f64) -> SmoParams {
    SmoParams {
        c,
        tol: cfg.tol,
        max_passes: cfg.max_passes,
        seed: cfg.seed,
    }
}

pub fn train_eval(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dir = &cfg.output_dir;
    let data = load_phase_data(dir)?;
    let (g_train, g_test) = load_grams(dir)?;
    if g_train.rows() != data.train.len() || g_test.rows() != data.test.len() {
        return Err(Error::dims(
            "train_eval",
            "Gram matrices do not match the dataset files; rerun gram",
        ));
    }
    let (c, c_scan) = match &cfg.svm_c {
        CSetting::Single(c) => (*c, None),
        CSetting::Scan(cs) => {
            let r = cross_validate_gram(&g_train, &data.train.labels, cfg.folds, cs, smo_params(cfg, 1.0))?;
            (r.best_c, Some(r))
        }
    };
    let model = train_smo(&g_train, &data.train.labels, smo_params(cfg, c))?;
    let report = TrainReport {
        c,
        train_score: score(&model, &g_train, &data.train.labels)?,
        test_score: score(&model, &g_test, &data.test.labels)?,
        n_support: model.support_indices.len(),
        converged: model.solver.converged,
        solver: model.solver.clone(),
        c_scan,
    };
    write_text(&dir.join("model.json"), &to_json(&model)?)?;
    write_text(&dir.join("report.json"), &to_json(&report)?)?;
    let flag = if report.converged { "" } else { " (solver did not converge)" };
    Ok(Outcome {
        outputs: vec!["model.json".into(), "report.json".into()],
        details: serde_json::to_value(&report)?,
        summary: format!(
            "C={} train={} test={} support={}{flag}",
            format_sig12(c),
            format_sig12(report.train_score),
            format_sig12(report.test_score),
            report.n_support
        ),
    })
}

pub fn run_reproduce_tables(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let out = reproduce_tables(cfg)?;
    for (name, text) in &out.files {
        write_text(&dir.join(name), text)?;
    }
    write_text(&dir.join("report.json"), &to_json(&out.cells)?)?;
    let within = out.cells.iter().filter(|c| c.within_tolerance()).count();
    let mut summary = String::new();
    for name in ["moons.txt", "circles.txt"] {
        summary.push_str(&out.files[name]);
        summary.push('\n');
    }
    write!(summary, "{within}/{} cells within tolerance", out.cells.len()).unwrap();
    let mut outputs: Vec<String> = out.files.keys().cloned().collect();
    outputs.push("report.json".into());
    Ok(Outcome {
        outputs,
        details: serde_json::json!({"cells_within_tolerance": within, "cells": out.cells.len()}),
        summary,
    })
}

/// `resolution × resolution` evaluation points over the box, row by row.
pub fn grid_points(bounds: [(f64, f64); 2], resolution: usize) -> Vec<[f64; 2]> {
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let pad = 0.1 * (hi - lo);
        let (a, b) = (lo - pad, hi + pad);
        (0..resolution)
            .map(|k| a + (b - a) * k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let (xs, ys) = (axis(bounds[0]), axis(bounds[1]));
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
        .collect()
}

pub fn boundary_grid(cfg: &ExperimentConfig, resolution: usize) -> Result<Outcome> {
    if resolution < 2 {
        return Err(Error::invalid(format!("resolution must be at least 2, got {resolution}")));
    }
    let dir = &cfg.output_dir;
    let data = load_phase_data(dir)?;
    let model_path = dir.join("model.json");
    let text = fs::read_to_string(&model_path).map_err(|e| Error::io(&model_path, e))?;
    let model: SvmModel = serde_json::from_str(&text)?;
    if model.training_size() != data.train.len() {
        return Err(Error::dims("boundary_grid", "model does not match train.csv"));
    }
    let kcfg = Manifest::load(dir)?.command("gram")?.config.clone();
    let bounds = data.train.bounds().expect("non-empty training set");
    let pts = grid_points(bounds, resolution);
    let phase_pts: Vec<[f64; 2]> = pts.iter().map(|&p| data.scaler.transform_point(p)).collect();
    let xtr = data.scaler.apply(&data.train).points;
    let g = quantum_gram(&phase_pts, &xtr, kcfg.r, &kcfg.register.prep(), kcfg.gram_mode()?)?;
    let mut csv = String::from("x,y,decision_value,predicted_label\n");
    let mut counts = [0usize; 2];
    for (i, p) in pts.iter().enumerate() {
        let d = model.decision_value(g.row(i))?;
        let label = if d >= 0.0 { 1 } else { -1 };
        counts[(label < 0) as usize] += 1;
        writeln!(csv, "{},{},{},{label}", format_sig12(p[0]), format_sig12(p[1]), format_sig12(d)).unwrap();
    }
    write_text(&dir.join("boundary.csv"), &csv)?;
    Ok(Outcome {
        outputs: vec!["boundary.csv".into()],
        details: serde_json::json!({"resolution": resolution, "positive": counts[0], "negative": counts[1]}),
        summary: format!(
            "{resolution}x{resolution} grid: {} predicted +1, {} predicted -1",
            counts[0], counts[1]
        ),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FidelityRow {
    pub p: f64,
    pub measured: f64,
    pub predicted: f64,
}

/// Mean fidelity over 25 seeded training points for each depolarizing strength.
pub fn fidelity_rows(cfg: &ExperimentConfig, p_values: &[f64]) -> Result<Vec<FidelityRow>> {
    if p_values.is_empty() {
        return Err(Error::invalid("no p values given"));
    }
    let ds = tables::generate(cfg, cfg.dataset, cfg.zeta, cfg.seed)?;
    let (train, _) = split(&ds, cfg.train_fraction, mix_seed(cfg.seed, 1, 0))?;
    let scaled = PhaseScaler::fit_with_interval(&train, cfg.phase_interval)?.apply(&train);
    let mut idx: Vec<usize> = (0..scaled.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 2, 0)));
    idx.truncate(25);
    let prep = cfg.register.prep();
    let n_dim = 1 << crate::circuit::ENCODING_QUBITS;
    p_values
        .iter()
        .map(|&p| {
            let noise = NoiseModel::depolarizing(p)?;
            let mut total = 0.0;
            for &i in &idx {
                let spec = FeatureMapSpec::new(&scaled.points[i], cfg.r)?;
                let k = noisy_offdiagonal(&spec, &spec, &prep, noise)?;
                total += average_fidelity(k, n_dim)?;
            }
            Ok(FidelityRow {
                p,
                measured: total / idx.len() as f64,
                predicted: predicted_fidelity(p, cfg.r, n_dim),
            })
        })
        .collect()
}

pub fn fidelity_sweep(cfg: &ExperimentConfig, p_values: &[f64]) -> Result<Outcome> {
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let rows = fidelity_rows(cfg, p_values)?;
    let mut csv = String::from("p,measured_fidelity,predicted_fidelity,abs_diff\n");
    let mut worst: f64 = 0.0;
    for r in &rows {
        let d = (r.measured - r.predicted).abs();
        worst = worst.max(d);
        writeln!(
            csv,
            "{},{},{},{}",
            format_sig12(r.p),
            format_sig12(r.measured),
            format_sig12(r.predicted),
            format_sig12(d)
        )
        .unwrap();
    }
    write_text(&dir.join("fidelity.csv"), &csv)?;
    Ok(Outcome {
        outputs: vec!["fidelity.csv".into()],
        details: serde_json::to_value(&rows)?,
        summary: format!("{} noise levels, max |measured - predicted| = {worst:e}", rows.len()),
    })
}

fn dispatch(cli: &Cli, cfg: &ExperimentConfig) -> Result<Outcome> {
    match &cli.command {
        Command::GenData(_) => gen_data(cfg),
        Command::Gram(_) => gram(cfg),
        Command::TrainEval(_) => train_eval(cfg),
        Command::ReproduceTables(_) => run_reproduce_tables(cfg),
        Command::BoundaryGrid { resolution, .. } => boundary_grid(cfg, *resolution),
        Command::FidelitySweep { p_values, .. } => {
            if let Some(p) = p_values.iter().find(|p| !(0.0..1.0).contains(*p)) {
                return Err(Error::invalid(format!("p values must lie in [0, 1), got {p}")));
            }
            fidelity_sweep(cfg, p_values)
        }
    }
}

/// Resolves the config, runs the command on the requested thread count and
/// records it in the output directory's manifest.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(cli)?;
    let mut timer = Timer::new();
    let outcome = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {t} threads: {e}")))?
            .install(|| dispatch(cli, &cfg))?,
        None => dispatch(cli, &cfg)?,
    };
    timer.lap(cli.command.name());
    Manifest::record(
        &cfg.output_dir,
        cli.command.name(),
        CommandRecord {
            config: cfg.clone(),
            timings_s: timer.finish(),
            outputs: outcome.outputs.clone(),
            details: outcome.details.clone(),
        },
    )?;
    Ok(outcome)
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
