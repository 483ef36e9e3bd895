//! Bitcell-array physics at behavioral level: ternary multiply, bitline
//! discharge and MAC voltage, dynamic-range checking, the dual-supply
//! bit-weight ratio, Monte Carlo mismatch, and temperature models.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Thermal voltage slope k_B/q in volts per kelvin.
pub const BOLTZMANN_V_PER_K: f64 = 8.617e-5;

/// Measured core-supply split for a 4:1 rail ratio. The subthreshold
/// model instead predicts ≈51 mV at κ = 0.7; both values are exposed so
/// analyses can compare the model against the measured operating point.
pub const MEASURED_RATIO4_DELTA_VDD: f64 = 0.060;

/// Per-cell current spread calibrated so that a sampled MSB/LSB pair at
/// target ratio 2 reproduces the measured ratio distribution
/// (σ_ratio ≈ 0.078): std(n·(1+a)/(1+b)) ≈ n·σ·√2 for small σ.
pub const BWR_PAIR_SIGMA: f64 = 0.078 / (2.0 * std::f64::consts::SQRT_2);

/// Static electrical and geometric parameters of the macro.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroConfig {
    /// Clock period in seconds (100 MHz default).
    pub clock_period: f64,
    /// Bitline capacitance in farads.
    pub c_bl: f64,
    /// Nominal unit discharge current in amperes.
    pub i_u: f64,
    /// Relative standard deviation of the per-cell discharge current.
    pub sigma_iu: f64,
    pub vdd: f64,
    /// Read word line high level.
    pub v_rwl: f64,
    /// Low-side core supply (LSB rail).
    pub vdd_core: f64,
    /// Cascode threshold of the readout device.
    pub v_t1: f64,
    /// Subthreshold slope factor.
    pub kappa: f64,
    pub temperature: f64,
    pub rows: usize,
    pub cols: usize,
    /// Rows of the replica block that builds the ramp.
    pub adc_rows: usize,
    /// Usable bitline swing in volts; discharge below vdd − dr_limit is
    /// flagged.
    pub dr_limit: f64,
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig {
            clock_period: 10e-9,
            c_bl: 20e-15,
            i_u: 10e-9,
            sigma_iu: 0.05,
            vdd: 1.0,
            v_rwl: 0.8,
            vdd_core: 0.45,
            v_t1: 0.35,
            kappa: 0.7,
            temperature: 300.0,
            rows: 160,
            cols: 100,
            adc_rows: 30,
            dr_limit: 0.70,
        }
    }
}

impl MacroConfig {
    /// Thermal voltage U_T = k_B·T/q.
    pub fn u_t(&self) -> f64 {
        BOLTZMANN_V_PER_K * self.temperature
    }

    /// Voltage removed from a bitline by one cell in one cycle:
    /// I_u·T/C_BL (5 mV at defaults).
    pub fn unit_step(&self) -> f64 {
        self.i_u * self.clock_period / self.c_bl
    }

    /// Lowest bitline voltage still inside the usable swing.
    pub fn bitline_floor(&self) -> f64 {
        self.vdd - self.dr_limit
    }

    /// V_RWL − V_T1, the headroom that limits a plain cascode readout.
    pub fn cascode_headroom(&self) -> f64 {
        self.v_rwl - self.v_t1
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clock_period", self.clock_period),
            ("c_bl", self.c_bl),
            ("i_u", self.i_u),
            ("vdd", self.vdd),
            ("v_rwl", self.v_rwl),
            ("vdd_core", self.vdd_core),
            ("v_t1", self.v_t1),
            ("kappa", self.kappa),
            ("temperature", self.temperature),
            ("dr_limit", self.dr_limit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..0.25).contains(&self.sigma_iu) {
            return Err(Error::Config(format!(
                "sigma_iu must be in [0, 0.25), got {}",
                self.sigma_iu
            )));
        }
        if self.v_rwl >= self.vdd {
            return Err(Error::Config("v_rwl must be below vdd".into()));
        }
        if self.vdd_core >= self.v_rwl {
            return Err(Error::Config("vdd_core must be below v_rwl".into()));
        }
        if self.dr_limit >= self.vdd {
            return Err(Error::Config("dr_limit must be below vdd".into()));
        }
        if self.rows == 0 || self.cols == 0 || self.adc_rows == 0 {
            return Err(Error::Config("rows, cols and adc_rows must be >= 1".into()));
        }
        Ok(())
    }
}

/// Readout-circuit presets for the usable bitline swing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrPreset {
    /// Switched readout that keeps the cell current constant over most of
    /// the supply range.
    ExtendedSwing,
    /// Plain cascode readout.
    Cascode,
    /// Single read transistor.
    SingleTransistor,
}

impl DrPreset {
    /// Usable swing in volts below VDD.
    pub fn limit(self) -> f64 {
        match self {
            DrPreset::ExtendedSwing => 0.70,
            DrPreset::Cascode => 0.51,
            DrPreset::SingleTransistor => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DrPreset::ExtendedSwing => "extended_swing",
            DrPreset::Cascode => "cascode",
            DrPreset::SingleTransistor => "single_transistor",
        }
    }
}

/// Row group a cell belongs to, selecting its core supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rail {
    Msb,
    Lsb,
}

/// One ternary bitcell.
#[derive(Debug, Clone, Copy)]
pub struct CellState {
    /// Stored ternary weight in {−1, 0, +1}.
    pub weight: i8,
    pub rail: Rail,
    /// Multiplier on I_u, mean 1, strictly positive.
    pub mismatch_factor: f64,
}

impl CellState {
    pub fn new(weight: i8, rail: Rail, mismatch_factor: f64) -> Result<Self> {
        if !(-1..=1).contains(&weight) {
            return Err(Error::Config(format!(
                "cell weight must be ternary, got {weight}"
            )));
        }
        if !(mismatch_factor.is_finite() && mismatch_factor > 0.0) {
            return Err(Error::Config(format!(
                "mismatch factor must be positive, got {mismatch_factor}"
            )));
        }
        Ok(CellState {
            weight,
            rail,
            mismatch_factor,
        })
    }

    /// Nominal cell: unit current, no mismatch.
    pub fn ideal(weight: i8, rail: Rail) -> Self {
        CellState::new(weight, rail, 1.0).expect("ternary weight")
    }
}

/// The two core supplies and the rail current ratio they set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupplyPair {
    pub v_msb: f64,
    pub v_lsb: f64,
    /// Target I_MSB/I_LSB.
    pub n_bwr: f64,
}

impl SupplyPair {
    /// Both rails on the base supply: ratio 1.
    pub fn unity(cfg: &MacroConfig) -> Self {
        SupplyPair {
            v_msb: cfg.vdd_core,
            v_lsb: cfg.vdd_core,
            n_bwr: 1.0,
        }
    }

    /// Split the core supply to realize a target ratio via the
    /// subthreshold law ΔVDD = (U_T/κ)·ln(ratio).
    pub fn for_ratio(ratio: f64, cfg: &MacroConfig) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 1.0) {
            return Err(Error::Config(format!(
                "rail ratio must be >= 1, got {ratio}"
            )));
        }
        let delta = cfg.u_t() / cfg.kappa * ratio.ln();
        Ok(SupplyPair {
            v_msb: cfg.vdd_core + delta,
            v_lsb: cfg.vdd_core,
            n_bwr: ratio,
        })
    }

    pub fn delta_vdd(&self) -> f64 {
        self.v_msb - self.v_lsb
    }

    /// Current multiplier for a rail relative to the LSB rail.
    pub fn rail_gain(&self, rail: Rail) -> f64 {
        match rail {
            Rail::Msb => self.n_bwr,
            Rail::Lsb => 1.0,
        }
    }
}

/// Signed input pulse: `sign` in {−1, 0, +1}, applied for `cycles` clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputPulse {
    pub sign: i8,
    pub cycles: u32,
}

impl InputPulse {
    pub fn new(sign: i8, cycles: u32) -> Result<Self> {
        if !(-1..=1).contains(&sign) {
            return Err(Error::Config(format!(
                "input sign must be in {{-1, 0, +1}}, got {sign}"
            )));
        }
        Ok(InputPulse { sign, cycles })
    }

    pub const IDLE: InputPulse = InputPulse { sign: 0, cycles: 0 };
}

/// Per-cycle bitline record of one column evaluation.
#[derive(Debug, Clone)]
pub struct ColumnTrace {
    /// Left bitline voltage, index 0 = precharged VDD, one entry per cycle
    /// after that.
    pub v_rbll: Vec<f64>,
    pub v_rblr: Vec<f64>,
    /// Final V_RBLR − V_RBLL.
    pub v_mac: f64,
    /// Same quantity in unit steps (exact integer in ideal mode).
    pub mac_units: f64,
    pub dr_violation: bool,
    /// Cell-cycle discharge events (energy proxy).
    pub discharge_events: u64,
}

impl ColumnTrace {
    pub fn cycles(&self) -> usize {
        self.v_rbll.len().saturating_sub(1)
    }

    pub fn min_bitline_voltage(&self) -> f64 {
        self.v_rbll
            .iter()
            .chain(&self.v_rblr)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Route one cell's discharge. The product of input sign and stored
/// weight picks the bitline: +1 discharges the left line (raising
/// V_RBLR − V_RBLL), −1 discharges the right line, 0 leaves both alone.
/// Returns (left_units, right_units) before rail gain and mismatch.
pub fn ternary_multiply(input: InputPulse, cell: &CellState) -> (u32, u32) {
    match (input.sign * cell.weight).signum() {
        1 => (input.cycles, 0),
        -1 => (0, input.cycles),
        _ => (0, 0),
    }
}

/// Evaluate one column: every cell discharges its bitline for the pulse
/// duration, currents scaled by rail gain (and mismatch when enabled).
///
/// Accumulation happens in unit-step space and converts to volts with a
/// single multiply, so the ideal-mode result is an exact integer times
/// the unit step and scaling I_u rescales every voltage without changing
/// any comparison.
pub fn mac_voltage(
    cells: &[CellState],
    inputs: &[InputPulse],
    cfg: &MacroConfig,
    supplies: &SupplyPair,
    with_mismatch: bool,
) -> Result<ColumnTrace> {
    if cells.len() != inputs.len() {
        return Err(Error::Dimension(format!(
            "column has {} cells but {} input pulses",
            cells.len(),
            inputs.len()
        )));
    }
    let max_cycles = inputs.iter().map(|p| p.cycles).max().unwrap_or(0) as usize;
    let unit = cfg.unit_step();
    let floor = cfg.bitline_floor();
    let mut left_units = 0.0f64;
    let mut right_units = 0.0f64;
    let mut v_rbll = Vec::with_capacity(max_cycles + 1);
    let mut v_rblr = Vec::with_capacity(max_cycles + 1);
    v_rbll.push(cfg.vdd);
    v_rblr.push(cfg.vdd);
    let mut discharge_events = 0u64;
    let mut dr_violation = false;
    for cycle in 1..=max_cycles {
        for (cell, input) in cells.iter().zip(inputs) {
            if (input.cycles as usize) < cycle {
                continue;
            }
            let (l, r) = ternary_multiply(
                InputPulse {
                    sign: input.sign,
                    cycles: 1,
                },
                cell,
            );
            if l == 0 && r == 0 {
                continue;
            }
            let gain = supplies.rail_gain(cell.rail)
                * if with_mismatch { cell.mismatch_factor } else { 1.0 };
            left_units += l as f64 * gain;
            right_units += r as f64 * gain;
            discharge_events += 1;
        }
        let vl = cfg.vdd - left_units * unit;
        let vr = cfg.vdd - right_units * unit;
        if vl < floor || vr < floor {
            dr_violation = true;
        }
        v_rbll.push(vl);
        v_rblr.push(vr);
    }
    let mac_units = left_units - right_units;
    Ok(ColumnTrace {
        v_rbll,
        v_rblr,
        v_mac: mac_units * unit,
        mac_units,
        dr_violation,
        discharge_events,
    })
}

/// Outcome of a dynamic-range check against a readout preset.
#[derive(Debug, Clone, Copy)]
pub struct DrCheck {
    pub ok: bool,
    pub min_voltage: f64,
    /// Lowest allowed bitline voltage, vdd − preset limit.
    pub floor: f64,
    /// First cycle at which either bitline fell below the floor.
    pub first_violation_cycle: Option<usize>,
}

/// Re-evaluate a recorded trace against a readout preset's swing.
pub fn check_dynamic_range(trace: &ColumnTrace, cfg: &MacroConfig, preset: DrPreset) -> DrCheck {
    let floor = cfg.vdd - preset.limit();
    let mut first = None;
    for cycle in 0..trace.v_rbll.len() {
        if trace.v_rbll[cycle] < floor || trace.v_rblr[cycle] < floor {
            first = Some(cycle);
            break;
        }
    }
    DrCheck {
        ok: first.is_none(),
        min_voltage: trace.min_bitline_voltage(),
        floor,
        first_violation_cycle: first,
    }
}

/// Per-cell discharge-current multipliers for a full array, sampled once
/// per chip seed.
#[derive(Debug, Clone)]
pub struct MismatchField {
    pub rows: usize,
    pub cols: usize,
    pub sigma: f64,
    /// Column-major factors, length rows × cols.
    factors: Vec<f64>,
}

impl MismatchField {
    pub fn factor(&self, row: usize, col: usize) -> f64 {
        self.factors[col * self.rows + row]
    }

    /// All factors of one column (a contiguous slice by construction).
    pub fn column(&self, col: usize) -> &[f64] {
        &self.factors[col * self.rows..(col + 1) * self.rows]
    }

    pub fn mean(&self) -> f64 {
        self.factors.iter().sum::<f64>() / self.factors.len() as f64
    }
}

/// Draw one truncated-normal multiplier: N(1, σ) rejected outside ±4σ.
fn truncated_factor<R: Rng>(rng: &mut R, normal: &Normal<f64>, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    loop {
        let x = normal.sample(rng);
        if (x - 1.0).abs() <= 4.0 * sigma {
            return x;
        }
    }
}

/// Sample an array's worth of I_u multipliers: truncated normal
/// N(1, σ_Iu) cut at ±4σ, one independent stream per column so columns
/// can be evaluated in any order or in parallel.
pub fn sample_mismatch(cfg: &MacroConfig, seed: u64) -> Result<MismatchField> {
    if !(0.0..0.25).contains(&cfg.sigma_iu) {
        return Err(Error::Config(format!(
            "sigma_iu must be in [0, 0.25) for a positive truncated factor, got {}",
            cfg.sigma_iu
        )));
    }
    let normal = Normal::new(1.0, cfg.sigma_iu.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(format!("mismatch distribution: {e}")))?;
    let mut factors = Vec::with_capacity(cfg.rows * cfg.cols);
    for col in 0..cfg.cols {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(col as u64);
        for _ in 0..cfg.rows {
            factors.push(truncated_factor(&mut rng, &normal, cfg.sigma_iu));
        }
    }
    Ok(MismatchField {
        rows: cfg.rows,
        cols: cfg.cols,
        sigma: cfg.sigma_iu,
        factors,
    })
}

/// Moments of the realized MSB/LSB current ratio over sampled cell pairs.
#[derive(Debug, Clone, Copy)]
pub struct BwrStats {
    pub mean: f64,
    pub std: f64,
    pub rel_std: f64,
}

/// Monte Carlo of the realized rail ratio: each pair draws independent
/// multipliers for the MSB and LSB cell, ratio = target·(1+a)/(1+b).
pub fn bwr_pair_stats(target: f64, sigma_cell: f64, pairs: usize, seed: u64) -> Result<BwrStats> {
    if pairs == 0 {
        return Err(Error::Config("pair count must be >= 1".into()));
    }
    if !(0.0..0.25).contains(&sigma_cell) {
        return Err(Error::Config(format!(
            "sigma_cell must be in [0, 0.25), got {sigma_cell}"
        )));
    }
    let normal = Normal::new(1.0, sigma_cell.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(format!("ratio distribution: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..pairs {
        let msb = truncated_factor(&mut rng, &normal, sigma_cell);
        let lsb = truncated_factor(&mut rng, &normal, sigma_cell);
        let ratio = target * msb / lsb;
        sum += ratio;
        sum_sq += ratio * ratio;
    }
    let mean = sum / pairs as f64;
    let var = (sum_sq / pairs as f64 - mean * mean).max(0.0);
    let std = var.sqrt();
    Ok(BwrStats {
        mean,
        std,
        rel_std: std / mean,
    })
}

/// Rail ratio set by a supply split: exp(κ·ΔVDD/U_T).
pub fn n_bwr_from_supplies(delta_vdd: f64, cfg: &MacroConfig) -> Result<f64> {
    if !(delta_vdd.is_finite() && delta_vdd >= 0.0) {
        return Err(Error::Config(format!(
            "supply split must be >= 0, got {delta_vdd}"
        )));
    }
    Ok((cfg.kappa * delta_vdd / cfg.u_t()).exp())
}

/// Rail ratio when the supply split is generated by a
/// proportional-to-absolute-temperature current through a resistor:
/// ΔVDD = R·I_PTAT with I_PTAT = coeff·T, so the exponent
/// κ·R·coeff·T/(k_B/q·T) is temperature-free.
pub fn ptat_n_bwr(
    temperature: f64,
    r_ohms: f64,
    iptat_coeff: f64,
    cfg: &MacroConfig,
) -> Result<f64> {
    if !(273.0..=344.0).contains(&temperature) {
        return Err(Error::Config(format!(
            "temperature {temperature} K outside the modeled 273..=344 K window"
        )));
    }
    if r_ohms < 0.0 || iptat_coeff < 0.0 {
        return Err(Error::Config(
            "resistance and PTAT coefficient must be >= 0".into(),
        ));
    }
    let i_ptat = iptat_coeff * temperature;
    let u_t = BOLTZMANN_V_PER_K * temperature;
    Ok((cfg.kappa * r_ohms * i_ptat / u_t).exp())
}

/// Resistance that sets a target PTAT ratio for a given current slope.
pub fn ptat_resistance_for(target: f64, iptat_coeff: f64, cfg: &MacroConfig) -> Result<f64> {
    if !(target.is_finite() && target >= 1.0) {
        return Err(Error::Config(format!("target ratio must be >= 1, got {target}")));
    }
    if iptat_coeff <= 0.0 {
        return Err(Error::Config("PTAT coefficient must be positive".into()));
    }
    Ok(target.ln() * BOLTZMANN_V_PER_K / (cfg.kappa * iptat_coeff))
}
