//! Command-line surface: experiment orchestration and plot-data emission.
//!
//! Every subcommand resolves one [`FileConfig`], runs deterministically
//! from `--seed`, writes its artifacts atomically into `--out`, and
//! finishes with a `manifest.json` hashing every file. Rerunning the
//! same invocation reproduces every artifact byte for byte.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::activation::{ActivationKind, ActivationSpec};
use crate::adc::{
    error_decomposition, inl_mc, mc_calibration, measure_inl, sample_column,
    transfer_sweep, AdcConfig, Converter, RampTable, DEFAULT_SA_SIGMA,
};
use crate::adc::calibrate_column_saturating;
use crate::codec::{encode_multibit, scheme_costs, CostMethod, MultiBitScheme};
use crate::config::FileConfig;
use crate::error::{Error, Result};
use crate::hwat::{hwat_benefit, train_toy, TrainConfig};
use crate::lstm::{
    latency_report, map_layer, max_input_units, IntegerLstm, LstmModel, MacroLstm,
    PipelineModel,
};
use crate::ramp::{anchor_units, build_schedule, build_steps, ideal_levels_units, sample_inverse, step_deltas, quantize_steps, RampMode};
use crate::report::{fmt_f64, sha256_hex, Artifacts, CalibFile, CalibRecord, CsvTable};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream index for random feature generation, distinct from the model
/// weight stream (which consumes the seed directly).
const STREAM_FEATURES: u64 = 101;

#[derive(Debug, Parser)]
#[command(
    name = "nlimsim",
    version,
    about = "Behavioral simulator for an SRAM analog compute-in-memory macro \
             with a reconfigurable nonlinear in-memory ramp ADC"
)]
pub struct Cli {
    /// Output directory. Defaults to $NLIMSIM_OUT, then ./out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Base RNG seed, recorded in every manifest.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// TOML experiment config; omitted sections use library defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Independent repetitions fanned out across worker threads. Run i
    /// writes to <out>/run-<i> with seed base+i.
    #[arg(long, global = true, default_value_t = 1)]
    pub runs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Emit the quantized ramp step table for one activation.
    Ramp(RampArgs),
    /// Sweep the ideal converter transfer across the MAC span.
    ConvertSweep(SweepArgs),
    /// Sample mismatched columns, calibrate each, persist the states.
    Calibrate(CalibrateArgs),
    /// Monte Carlo INL of calibrated columns, per level.
    Inl(InlArgs),
    /// Decompose conversion error into quantization vs mismatch by resolution.
    McMismatch(McArgs),
    /// Exhaustive multi-bit weight encoding table and realization costs.
    Encode(EncodeArgs),
    /// Map an LSTM layer onto the array and report the schedule.
    Map(MapArgs),
    /// Run a random reference LSTM on the simulated macro against the
    /// integer golden model.
    RunLstm(RunLstmArgs),
    /// Train the toy LSTM with disturbance injection; optionally run the
    /// paired robustness study.
    Train(TrainArgs),
    /// Ramp cost table (cells and cycles) across resolutions and modes.
    LatencyTable(LatencyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ramp(_) => "ramp",
            Command::ConvertSweep(_) => "convert-sweep",
            Command::Calibrate(_) => "calibrate",
            Command::Inl(_) => "inl",
            Command::McMismatch(_) => "mc-mismatch",
            Command::Encode(_) => "encode",
            Command::Map(_) => "map",
            Command::RunLstm(_) => "run-lstm",
            Command::Train(_) => "train",
            Command::LatencyTable(_) => "latency-table",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RampArgs {
    /// Activation name; overrides the config [adc] section.
    #[arg(long)]
    pub activation: Option<String>,
    /// Converter resolution in bits.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Ramp realization: pwm or mcl.
    #[arg(long)]
    pub mode: Option<String>,
    /// Step quantization divisor override.
    #[arg(long)]
    pub divisor: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sample count across (and 10% past) the ramp span.
    #[arg(long, default_value_t = 257)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Columns to sample and calibrate.
    #[arg(long, default_value_t = 64)]
    pub columns: usize,
    /// Comparator offset sigma in ramp LSB.
    #[arg(long)]
    pub sa_sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InlArgs {
    #[arg(long, default_value_t = 100)]
    pub columns: usize,
    #[arg(long)]
    pub sa_sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo draws per resolution (>= 100).
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// Weight precision 2..=5; overrides the config [lstm] section.
    #[arg(long)]
    pub weight_bits: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub weight_bits: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct RunLstmArgs {
    #[arg(long)]
    pub weight_bits: Option<u32>,
    /// Timestep count; overrides the config [lstm] seq_len.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Simulate one mismatched chip instead of the ideal macro.
    #[arg(long)]
    pub mismatch: bool,
    #[arg(long)]
    pub sa_sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Also run the paired disturbance-robustness study.
    #[arg(long)]
    pub benefit: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub quant_bits: Option<u32>,
    /// Comma-separated seeds for the paired study.
    #[arg(long, default_value = "101,202,303,404,505")]
    pub seeds: String,
}

#[derive(Debug, Clone, Args)]
pub struct LatencyArgs {
    /// Comma-separated resolutions.
    #[arg(long, default_value = "4,5")]
    pub bits: String,
    /// Comma-separated ramp modes.
    #[arg(long, default_value = "pwm,mcl")]
    pub modes: String,
    #[arg(long, default_value = "sigmoid")]
    pub activation: String,
}

/// Entry point behind `main`: resolve config and output dir, then run the
/// experiment once or fan out `--runs` copies.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    // hash the fully resolved config so the manifest pins defaults too
    let canonical = toml::to_string(&cfg)
        .map_err(|e| Error::Config(format!("config not serializable: {e}")))?;
    let config_sha = sha256_hex(canonical.as_bytes());
    let out = resolve_out_dir(cli.out.as_deref());

    if cli.runs == 0 {
        return Err(Error::Config("run count must be >= 1".into()));
    }
    if cli.runs == 1 {
        return execute(&cfg, &cli.command, cli.seed, &out, &config_sha);
    }

    // Fan out across workers: disjoint output dirs, shifted seeds, no
    // shared mutable state.
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(cli.runs);
        for idx in 0..cli.runs {
            let dir = out.join(format!("run-{idx:03}"));
            let cfg = &cfg;
            let command = &cli.command;
            let config_sha = &config_sha;
            let seed = cli.seed + idx as u64;
            handles.push(scope.spawn(move || {
                execute(cfg, command, seed, &dir, config_sha)
            }));
        }
        for h in handles {
            h.join().expect("worker panicked")?;
        }
        Ok(())
    })
}

fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(env) = std::env::var_os("NLIMSIM_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("out")
}

fn execute(
    cfg: &FileConfig,
    command: &Command,
    seed: u64,
    dir: &Path,
    config_sha: &str,
) -> Result<()> {
    let mut art = Artifacts::create(dir)?;
    match command {
        Command::Ramp(a) => cmd_ramp(cfg, a, &mut art)?,
        Command::ConvertSweep(a) => cmd_convert_sweep(cfg, a, &mut art)?,
        Command::Calibrate(a) => cmd_calibrate(cfg, a, seed, &mut art)?,
        Command::Inl(a) => cmd_inl(cfg, a, seed, &mut art)?,
        Command::McMismatch(a) => cmd_mc_mismatch(cfg, a, seed, &mut art)?,
        Command::Encode(a) => cmd_encode(cfg, a, &mut art)?,
        Command::Map(a) => cmd_map(cfg, a, &mut art)?,
        Command::RunLstm(a) => cmd_run_lstm(cfg, a, seed, &mut art)?,
        Command::Train(a) => cmd_train(cfg, a, seed, &mut art)?,
        Command::LatencyTable(a) => cmd_latency_table(cfg, a, &mut art)?,
    }
    let manifest = art.finish(command.name(), seed, config_sha)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

/// The [adc] section with ramp-specific flag overrides applied.
fn resolved_adc(cfg: &FileConfig, a: &RampArgs) -> Result<AdcConfig> {
    let mut section = cfg.adc.clone();
    if let Some(name) = &a.activation {
        section.activation = name.clone();
        // a named activation implies its own documented range and divisor
        section.output_range = None;
        section.quant_divisor = None;
    }
    if let Some(bits) = a.bits {
        section.n_bits = bits;
    }
    if let Some(mode) = &a.mode {
        section.mode = mode.clone();
    }
    if let Some(d) = a.divisor {
        section.quant_divisor = Some(d);
    }
    section.to_adc()
}

fn cmd_ramp(cfg: &FileConfig, a: &RampArgs, art: &mut Artifacts) -> Result<()> {
    let adc = resolved_adc(cfg, a)?;
    // steps and schedule only: the row budget is a mapping concern, the
    // table itself is printable for any supported resolution
    let pts = sample_inverse(&adc.activation, adc.n_bits)?;
    let qs = quantize_steps(step_deltas(&pts)?, adc.activation.quant_divisor)?;
    let sched = build_schedule(&qs, adc.mode);
    let anchor = anchor_units(&qs, &pts, adc.init_style);
    let levels = ideal_levels_units(&qs, anchor);

    let mut table = CsvTable::new([
        "step",
        "cells",
        "cycles",
        "units",
        "level_units",
        "target_output",
        "threshold_input",
    ]);
    for (i, &(cells, cycles)) in sched.per_step.iter().enumerate() {
        table.row([
            (i + 1).to_string(),
            cells.to_string(),
            cycles.to_string(),
            qs.quantized[i].to_string(),
            fmt_f64(levels[i + 1]),
            fmt_f64(pts.points[i + 1].0),
            fmt_f64(pts.points[i + 1].1),
        ]);
    }
    art.write_csv("ramp_steps.csv", &table)?;
    println!(
        "{} {}-bit {}: {} steps, {} cells, {} cycles, lsb {} (x units), anchor {} units",
        adc.activation.kind.name(),
        adc.n_bits,
        adc.mode.name(),
        qs.step_count(),
        sched.total_cells,
        sched.total_cycles,
        fmt_f64(qs.lsb),
        fmt_f64(anchor),
    );
    Ok(())
}

fn cmd_convert_sweep(cfg: &FileConfig, a: &SweepArgs, art: &mut Artifacts) -> Result<()> {
    if a.points < 2 {
        return Err(Error::Config("sweep needs at least 2 points".into()));
    }
    let adc = cfg.to_adc()?;
    let table = RampTable::build(&adc, &cfg.macro_cfg)?;
    let conv = Converter::ideal(&table);
    let mut csv = CsvTable::new(["mac_units", "code", "t_hat", "t_exact"]);
    for p in transfer_sweep(&conv, a.points) {
        csv.row([
            fmt_f64(p.mac_units),
            p.code.to_string(),
            fmt_f64(p.t_hat),
            fmt_f64(p.t_exact),
        ]);
    }
    art.write_csv("transfer.csv", &csv)?;
    println!(
        "{} transfer points, codes 0..={}",
        a.points,
        table.max_code()
    );
    Ok(())
}

fn cmd_calibrate(
    cfg: &FileConfig,
    a: &CalibrateArgs,
    seed: u64,
    art: &mut Artifacts,
) -> Result<()> {
    let adc = cfg.to_adc()?;
    let sa_sigma = a.sa_sigma.unwrap_or(DEFAULT_SA_SIGMA);
    let report = mc_calibration(&adc, &cfg.macro_cfg, a.columns, sa_sigma, seed)?;

    let table = RampTable::build(&adc, &cfg.macro_cfg)?;
    let mut records = Vec::with_capacity(a.columns);
    let mut csv = CsvTable::new(["column", "pre_rmse", "post_rmse", "correction_units"]);
    for (col, &(pre, post, units)) in report.per_column.iter().enumerate() {
        let column = sample_column(&table, cfg.macro_cfg.sigma_iu, sa_sigma, seed, col as u64)?;
        let state = calibrate_column_saturating(&table, &column);
        debug_assert_eq!(state.correction_pulse_units(), units);
        csv.row([
            col.to_string(),
            fmt_f64(pre),
            fmt_f64(post),
            units.to_string(),
        ]);
        records.push(CalibRecord {
            column: col,
            correction_units: units,
            state,
        });
    }
    art.write_csv("calib_summary.csv", &csv)?;
    art.write_json(
        "calib_state.json",
        &CalibFile {
            chip_seed: seed,
            sigma_iu: cfg.macro_cfg.sigma_iu,
            sa_sigma,
            columns: records,
        },
    )?;
    println!(
        "{} columns: pre {} post {} LSB rmse, improvement {}x, {} saturated",
        report.columns,
        fmt_f64(report.pre_rmse),
        fmt_f64(report.post_rmse),
        fmt_f64(report.improvement),
        report.saturated_columns,
    );
    Ok(())
}

fn cmd_inl(cfg: &FileConfig, a: &InlArgs, seed: u64, art: &mut Artifacts) -> Result<()> {
    let adc = cfg.to_adc()?;
    let sa_sigma = a.sa_sigma.unwrap_or(DEFAULT_SA_SIGMA);
    let table = RampTable::build(&adc, &cfg.macro_cfg)?;
    let exact = table.exact_levels();

    let mut csv = CsvTable::new(["column", "code", "ideal", "measured", "inl"]);
    let mut per_column = Vec::with_capacity(a.columns);
    for col in 0..a.columns {
        let column = sample_column(&table, cfg.macro_cfg.sigma_iu, sa_sigma, seed, col as u64)?;
        let mut conv = Converter::with_column(&table, column);
        conv.calib = calibrate_column_saturating(&table, &conv.column);
        for (code, &ideal) in exact.iter().enumerate() {
            let measured = conv.effective_level(code);
            csv.row([
                col.to_string(),
                code.to_string(),
                fmt_f64(ideal),
                fmt_f64(measured),
                fmt_f64(measured - ideal),
            ]);
        }
        per_column.push(measure_inl(&conv));
    }
    art.write_csv("inl.csv", &csv)?;

    let report = inl_mc(&adc, &cfg.macro_cfg, a.columns, sa_sigma, seed)?;
    debug_assert_eq!(report.per_column, per_column);
    println!(
        "avg INL over {} columns: {} LSB (quantization floor {})",
        report.columns,
        fmt_f64(report.mean_inl),
        fmt_f64(report.ideal_inl),
    );
    Ok(())
}

fn cmd_mc_mismatch(cfg: &FileConfig, a: &McArgs, seed: u64, art: &mut Artifacts) -> Result<()> {
    let adc = cfg.to_adc()?;
    let rows = error_decomposition(&adc, &cfg.macro_cfg, a.samples, seed)?;
    let mut csv = CsvTable::new(["bits", "quant_rmse", "mismatch_mean", "mismatch_std"]);
    for r in &rows {
        csv.row([
            r.n_bits.to_string(),
            fmt_f64(r.quantization_rmse),
            fmt_f64(r.mismatch_rmse_mean),
            fmt_f64(r.mismatch_rmse_std),
        ]);
    }
    art.write_csv("decomposition.csv", &csv)?;
    println!(
        "{} draws per resolution, 1..=5 bits, sigma_iu {}",
        a.samples,
        fmt_f64(cfg.macro_cfg.sigma_iu)
    );
    Ok(())
}

fn cmd_encode(cfg: &FileConfig, a: &EncodeArgs, art: &mut Artifacts) -> Result<()> {
    let bits = a.weight_bits.unwrap_or(cfg.lstm.weight_bits);
    let scheme = MultiBitScheme::for_bits(bits)?;
    let mut header = vec!["weight".to_string()];
    for c in 0..scheme.cells_per_weight {
        header.push(format!("cell{c}"));
    }
    header.push("decoded".to_string());
    let mut csv = CsvTable::new(header);
    let m = scheme.max_level();
    for w in -m..=m {
        let enc = encode_multibit(w, &scheme)?;
        let decoded = crate::codec::decode_multibit(&enc, &scheme)?;
        assert_eq!(decoded, w, "round-trip is an encoder invariant");
        let mut row = vec![w.to_string()];
        row.extend(enc.cell_weights.iter().map(|c| c.to_string()));
        row.push(decoded.to_string());
        csv.row(row);
    }
    art.write_csv("encoded.csv", &csv)?;

    let mut costs = CsvTable::new(["weight_bits", "method", "cells_per_weight", "latency_clocks"]);
    for nw in 2..=5u32 {
        for method in [CostMethod::Proposed, CostMethod::PwmOnly, CostMethod::MulticellOnly] {
            let (cells, clocks) = scheme_costs(nw, method)?;
            let name = match method {
                CostMethod::Proposed => "proposed",
                CostMethod::PwmOnly => "pwm_only",
                CostMethod::MulticellOnly => "multicell_only",
            };
            costs.row([
                nw.to_string(),
                name.to_string(),
                cells.to_string(),
                clocks.to_string(),
            ]);
        }
    }
    art.write_csv("costs.csv", &costs)?;
    println!(
        "{}-bit scheme: {} cells/weight, {} clocks/unit input, levels -{}..={}",
        bits, scheme.cells_per_weight, scheme.latency_clocks, m, m
    );
    Ok(())
}

fn cmd_map(cfg: &FileConfig, a: &MapArgs, art: &mut Artifacts) -> Result<()> {
    let bits = a.weight_bits.unwrap_or(cfg.lstm.weight_bits);
    let adc = cfg.to_adc()?;
    let l = &cfg.lstm;
    let model = LstmModel::new(
        l.input_dim,
        l.hidden_dim,
        l.seq_len,
        l.classes,
        crate::lstm::IntMat::zeros(l.input_dim + l.hidden_dim, 4 * l.hidden_dim),
        crate::lstm::IntMat::zeros(l.hidden_dim, l.classes),
    )?;
    let mapping = map_layer(&model, &cfg.macro_cfg, &adc, bits)?;
    art.write_json("mapping.json", &mapping)?;
    println!(
        "{}x{} layer at {} weight bits: {} rows/group x {} splits, {} logical cols in {} passes (budget {})",
        l.input_dim + l.hidden_dim,
        4 * l.hidden_dim,
        bits,
        mapping.rows_per_group,
        mapping.row_splits,
        mapping.logical_cols,
        mapping.col_passes,
        mapping.row_budget,
    );
    Ok(())
}

fn cmd_run_lstm(
    cfg: &FileConfig,
    a: &RunLstmArgs,
    seed: u64,
    art: &mut Artifacts,
) -> Result<()> {
    let bits = a.weight_bits.unwrap_or(cfg.lstm.weight_bits);
    let adc = cfg.to_adc()?;
    let l = &cfg.lstm;
    let seq_len = a.steps.unwrap_or(l.seq_len);
    let model = LstmModel::random(l.input_dim, l.hidden_dim, seq_len, l.classes, bits, seed)?;

    let max_in = max_input_units(adc.n_bits);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_FEATURES);
    let features: Vec<Vec<i32>> = (0..seq_len)
        .map(|_| (0..l.input_dim).map(|_| rng.gen_range(-max_in..=max_in)).collect())
        .collect();

    let sa_sigma = a.sa_sigma.unwrap_or(DEFAULT_SA_SIGMA);
    let sim = if a.mismatch {
        MacroLstm::with_mismatch(&model, &cfg.macro_cfg, &adc, bits, sa_sigma, seed)?
    } else {
        MacroLstm::new(&model, &cfg.macro_cfg, &adc, bits)?
    };
    let golden = IntegerLstm::new(&model, &cfg.macro_cfg, &adc)?;
    let macro_out = sim.run_sequence(&features)?;
    let golden_out = golden.run_sequence(&features)?;

    let mut csv = CsvTable::new(["class", "macro_logit", "golden_logit"]);
    for (k, (&m, &g)) in macro_out.logits.iter().zip(&golden_out.logits).enumerate() {
        csv.row([k.to_string(), m.to_string(), g.to_string()]);
    }
    art.write_csv("logits.csv", &csv)?;

    let mapping = map_layer(&model, &cfg.macro_cfg, &adc, bits)?;
    let table = RampTable::build(&adc, &cfg.macro_cfg)?;
    let pipeline = PipelineModel::for_hidden(l.hidden_dim);
    let latency = latency_report(&mapping, &table, &pipeline, &cfg.macro_cfg, seq_len);

    // the golden model is purely functional: it carries no saturation or
    // dynamic-range diagnostics, so equality means the functional fields
    let bit_exact = macro_out.logits == golden_out.logits
        && macro_out.final_h_q6 == golden_out.final_h_q6
        && macro_out.class == golden_out.class;
    art.write_json(
        "run_summary.json",
        &serde_json::json!({
            "weight_bits": bits,
            "seq_len": seq_len,
            "mismatch": a.mismatch,
            "class_macro": macro_out.class,
            "class_golden": golden_out.class,
            "bit_exact": bit_exact,
            "saturated_codes": macro_out.saturated_codes,
            "dr_events": macro_out.dr_events,
            "latency": latency,
        }),
    )?;
    println!(
        "macro class {} vs golden {}; bit_exact {}; {} cycles/timestep",
        macro_out.class, golden_out.class, bit_exact, latency.timestep_cycles
    );
    Ok(())
}

fn cmd_train(cfg: &FileConfig, a: &TrainArgs, seed: u64, art: &mut Artifacts) -> Result<()> {
    let mut tc: TrainConfig = cfg.train.clone();
    tc.seed = seed;
    if let Some(e) = a.epochs {
        tc.epochs = e;
    }
    if let Some(s) = a.noise_sigma {
        tc.noise_sigma = s;
    }
    if let Some(b) = a.quant_bits {
        tc.quant_bits = b;
    }
    tc.validate()?;

    let run = train_toy(&tc)?;
    let mut csv = CsvTable::new(["epoch", "loss", "clean_acc", "noisy_acc"]);
    for m in &run.metrics {
        csv.row([
            m.epoch.to_string(),
            fmt_f64(m.loss),
            fmt_f64(m.clean_acc),
            fmt_f64(m.noisy_acc),
        ]);
    }
    art.write_csv("metrics.csv", &csv)?;

    let scheme = MultiBitScheme::for_bits(tc.quant_bits)?;
    let export = crate::hwat::export_for_macro(&run.net, &scheme)?;
    art.write_json("weights.json", &export)?;
    println!(
        "trained {} epochs: clean {} noisy {}; exported {}-bit weights ({} zero fraction)",
        tc.epochs,
        fmt_f64(run.final_clean_acc),
        fmt_f64(run.final_noisy_acc),
        tc.quant_bits,
        fmt_f64(export.zero_fraction),
    );

    if a.benefit {
        let seeds = parse_u64_list(&a.seeds)?;
        let report = hwat_benefit(&tc, &seeds)?;
        let mut csv = CsvTable::new([
            "seed",
            "hwat_clean",
            "hwat_noisy",
            "naive_clean",
            "naive_noisy",
        ]);
        for p in &report.pairs {
            csv.row([
                p.seed.to_string(),
                fmt_f64(p.hwat_clean),
                fmt_f64(p.hwat_noisy),
                fmt_f64(p.naive_clean),
                fmt_f64(p.naive_noisy),
            ]);
        }
        art.write_csv("benefit.csv", &csv)?;
        println!(
            "paired study over {} seeds: hwat {} vs naive {} mean noisy accuracy",
            report.pairs.len(),
            fmt_f64(report.mean_hwat_noisy),
            fmt_f64(report.mean_naive_noisy),
        );
    }
    Ok(())
}

fn cmd_latency_table(cfg: &FileConfig, a: &LatencyArgs, art: &mut Artifacts) -> Result<()> {
    let bits = parse_u32_list(&a.bits)?;
    let modes: Vec<RampMode> = a
        .modes
        .split(',')
        .map(|s| RampMode::parse(s.trim()))
        .collect::<Result<_>>()?;
    if bits.is_empty() || modes.is_empty() {
        return Err(Error::Config("need at least one resolution and one mode".into()));
    }
    let kind = ActivationKind::parse(&a.activation)?;
    let spec = ActivationSpec::preset(kind);
    let _ = &cfg.macro_cfg; // costs are array-free: no budget check here

    let mut csv = CsvTable::new(["bits", "mode", "ramp_cells", "ramp_cycles"]);
    for &b in &bits {
        let qs = build_steps(&spec, b)?;
        for &mode in &modes {
            let sched = build_schedule(&qs, mode);
            csv.row([
                b.to_string(),
                mode.name().to_string(),
                sched.total_cells.to_string(),
                sched.total_cycles.to_string(),
            ]);
            println!(
                "{b}-bit {}: {} cells, {} cycles",
                mode.name(),
                sched.total_cells,
                sched.total_cycles
            );
        }
    }
    art.write_csv("latency.csv", &csv)?;
    Ok(())
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("not an integer: {t:?}")))
        })
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("not an integer: {t:?}")))
        })
        .collect()
}
