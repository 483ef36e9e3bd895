//! Integer LSTM inference on the analog MAC array.
//!
//! The gate matrix lives in the array as ternary cells; gate pre-activations
//! are converted straight to activated codes by the nonlinear ramp, so the
//! sigmoid and tanh evaluations cost no digital work. The recurrent element
//! update runs in a small fixed-point unit on Q6 values (6 fractional bits).
//! [`MacroLstm`] drives the full analog path cycle by cycle;
//! [`IntegerLstm`] is the pure-integer reference the analog path must match
//! bit for bit when mismatch is disabled.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::activation::{ActivationKind, ActivationSpec};
use crate::adc::{
    calibrate_column_saturating, sample_column, AdcColumn, AdcConfig, CalibState, Converter,
    RampTable,
};
use crate::analog::{mac_voltage, CellState, InputPulse, MacroConfig, SupplyPair};
use crate::codec::{encode_multibit, MultiBitScheme};
use crate::error::{Error, Result};

/// Row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i32>,
}

impl IntMat {
    pub fn new(rows: usize, cols: usize, data: Vec<i32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(IntMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> i32 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i32) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn max_abs(&self) -> i32 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// Which gate a logical array column computes. Columns are laid out
/// input | forget | candidate | output, each block `hidden_dim` wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Candidate,
    Output,
}

impl Gate {
    pub fn of_column(col: usize, hidden_dim: usize) -> Gate {
        match col / hidden_dim {
            0 => Gate::Input,
            1 => Gate::Forget,
            2 => Gate::Candidate,
            _ => Gate::Output,
        }
    }

    /// The candidate gate is the only tanh-shaped one.
    pub fn is_tanh(self) -> bool {
        self == Gate::Candidate
    }
}

/// A bias-free LSTM layer plus a dense classifier head, all weights as
/// signed integer levels. The gate matrix is stored concatenated:
/// rows 0..input_dim take the feature vector, the rest take the previous
/// hidden state; columns follow the [`Gate`] layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub seq_len: usize,
    pub classes: usize,
    /// (input_dim + hidden_dim) x (4 * hidden_dim) gate weights.
    pub w_cat: IntMat,
    /// hidden_dim x classes classifier weights, applied off-array.
    pub fc: IntMat,
}

impl LstmModel {
    pub fn new(
        input_dim: usize,
        hidden_dim: usize,
        seq_len: usize,
        classes: usize,
        w_cat: IntMat,
        fc: IntMat,
    ) -> Result<Self> {
        let model = LstmModel {
            input_dim,
            hidden_dim,
            seq_len,
            classes,
            w_cat,
            fc,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.seq_len == 0 || self.classes == 0 {
            return Err(Error::Dimension(
                "model dimensions must all be nonzero".into(),
            ));
        }
        let rows = self.input_dim + self.hidden_dim;
        let cols = 4 * self.hidden_dim;
        if self.w_cat.rows != rows || self.w_cat.cols != cols {
            return Err(Error::Dimension(format!(
                "gate matrix is {}x{}, expected {rows}x{cols}",
                self.w_cat.rows, self.w_cat.cols
            )));
        }
        if self.fc.rows != self.hidden_dim || self.fc.cols != self.classes {
            return Err(Error::Dimension(format!(
                "classifier is {}x{}, expected {}x{}",
                self.fc.rows, self.fc.cols, self.hidden_dim, self.classes
            )));
        }
        Ok(())
    }

    /// Gate weights plus classifier weights.
    pub fn param_count(&self) -> usize {
        self.w_cat.rows * self.w_cat.cols + self.fc.rows * self.fc.cols
    }

    /// Uniform random integer weights bounded by what a `weight_bits`
    /// encoding can hold.
    pub fn random(
        input_dim: usize,
        hidden_dim: usize,
        seq_len: usize,
        classes: usize,
        weight_bits: u32,
        seed: u64,
    ) -> Result<Self> {
        let scheme = MultiBitScheme::for_bits(weight_bits)?;
        let m = scheme.max_level();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = input_dim + hidden_dim;
        let cols = 4 * hidden_dim;
        let w: Vec<i32> = (0..rows * cols).map(|_| rng.gen_range(-m..=m)).collect();
        let f: Vec<i32> = (0..hidden_dim * classes)
            .map(|_| rng.gen_range(-m..=m))
            .collect();
        LstmModel::new(
            input_dim,
            hidden_dim,
            seq_len,
            classes,
            IntMat::new(rows, cols, w)?,
            IntMat::new(hidden_dim, classes, f)?,
        )
    }

    /// The reference deployment shape: 40 features, 38 hidden units, 49
    /// timesteps, 12 classes.
    pub fn random_reference(weight_bits: u32, seed: u64) -> Result<Self> {
        LstmModel::random(40, 38, 49, 12, weight_bits, seed)
    }
}

/// One column-pass tile: which logical gate columns convert together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub pass: usize,
    pub col_start: usize,
    pub cols: usize,
}

/// How a gate matrix lands on the array.
///
/// Every logical column stacks `cells_per_weight` cells per weight. When the
/// stack exceeds the MAC row budget the weights split into `row_splits`
/// groups evaluated as successive pulse phases on the same bitline, so the
/// column is still converted once. Columns beyond the physical width tile
/// into `col_passes` passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerMapping {
    pub weight_bits: u32,
    pub scheme: MultiBitScheme,
    pub cells_per_weight: usize,
    /// Rows left for MAC cells after ramp-calibration spill-over.
    pub row_budget: usize,
    /// Calibration rows that did not fit next to the ramp cells.
    pub calib_overflow_rows: usize,
    pub row_splits: usize,
    pub weights_per_group: usize,
    /// Cells per logical column in one pulse phase.
    pub rows_per_group: usize,
    pub logical_cols: usize,
    pub col_passes: usize,
    pub tiles: Vec<Tile>,
}

/// Place one gate matrix on the array, or explain why it cannot fit.
pub fn map_layer(
    model: &LstmModel,
    cfg: &MacroConfig,
    adc: &AdcConfig,
    weight_bits: u32,
) -> Result<LayerMapping> {
    model.validate()?;
    cfg.validate()?;
    let scheme = MultiBitScheme::for_bits(weight_bits)?;
    let table = RampTable::build(adc, cfg)?;

    // Calibration cells sit with the ramp when the converter block has
    // spare rows; otherwise they displace MAC rows.
    let spare = cfg.adc_rows.saturating_sub(table.schedule.total_cells as usize);
    let calib_overflow = adc.calib_rows.saturating_sub(spare);
    let row_budget = cfg.rows.saturating_sub(calib_overflow);

    let weights = model.input_dim + model.hidden_dim;
    let cpw = scheme.cells_per_weight;
    if cpw > row_budget {
        return Err(Error::Infeasible(format!(
            "one {weight_bits}-bit weight needs {cpw} rows but only {row_budget} are usable"
        )));
    }
    // Smallest split whose per-group stack fits the budget.
    let row_splits = (1..=weights)
        .find(|s| weights.div_ceil(*s) * cpw <= row_budget)
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "{} cells per column exceed the {row_budget}-row budget",
                weights * cpw
            ))
        })?;
    let weights_per_group = weights.div_ceil(row_splits);

    let logical_cols = 4 * model.hidden_dim;
    if cfg.cols == 0 {
        return Err(Error::Infeasible("array has no columns".into()));
    }
    let col_passes = logical_cols.div_ceil(cfg.cols);
    let tiles = (0..col_passes)
        .map(|p| {
            let col_start = p * cfg.cols;
            Tile {
                pass: p,
                col_start,
                cols: (logical_cols - col_start).min(cfg.cols),
            }
        })
        .collect();

    Ok(LayerMapping {
        weight_bits,
        scheme,
        cells_per_weight: cpw,
        row_budget,
        calib_overflow_rows: calib_overflow,
        row_splits,
        weights_per_group,
        rows_per_group: weights_per_group * cpw,
        logical_cols,
        col_passes,
        tiles,
    })
}

/// Largest pulse count one signed input may request at a given converter
/// resolution.
pub fn max_input_units(n_bits: u32) -> i32 {
    (1i32 << (n_bits - 1)) - 1
}

/// Piecewise-linear tanh knots in Q6, one per eighth over [0, 4].
/// Frozen so every build interpolates identically.
pub const TANH_KNOTS_Q6: [i32; 33] = [
    0, 8, 16, 23, 30, 35, 41, 45, 49, 52, 54, 56, 58, 59, 60, 61, 62, 62, 63, 63, 63, 63, 63, 64,
    64, 64, 64, 64, 64, 64, 64, 64, 64,
];

/// Sigmoid gate code to Q6. The decoded output is (code+1)/32, which is
/// exact in Q6.
pub fn sigmoid_code_q6(code: u32) -> i32 {
    2 * (code as i32 + 1)
}

/// Tanh gate code to Q6. The decoded output is (code+1)/16 − 1.
pub fn tanh_code_q6(code: u32) -> i32 {
    4 * (code as i32 + 1) - 64
}

/// Symmetric 12-bit saturation for the element state.
pub fn saturate_q12(v: i64) -> i32 {
    v.clamp(-2047, 2047) as i32
}

/// c_t = f*c + i*g in Q6 with saturation. The shift is arithmetic, as the
/// hardware's would be.
pub fn cell_update_q6(f_q6: i32, i_q6: i32, g_q6: i32, c_prev_q6: i32) -> i32 {
    let acc = f_q6 as i64 * c_prev_q6 as i64 + i_q6 as i64 * g_q6 as i64;
    saturate_q12(acc >> 6)
}

/// 64-segment odd-symmetric tanh on Q6 state, saturating at ±1.0 (±64).
pub fn tanh_pwl_q6(c_q6: i32) -> i32 {
    let mag = c_q6.unsigned_abs() as i32;
    let v = if mag >= 256 {
        64
    } else {
        let seg = (mag >> 3) as usize;
        let frac = mag & 7;
        let lo = TANH_KNOTS_Q6[seg];
        let hi = TANH_KNOTS_Q6[seg + 1];
        lo + (((hi - lo) * frac) >> 3)
    };
    if c_q6 < 0 {
        -v
    } else {
        v
    }
}

/// h_t = o * tanh(c_t) in Q6.
pub fn hidden_update_q6(o_q6: i32, tanh_q6: i32) -> i32 {
    ((o_q6 as i64 * tanh_q6 as i64) >> 6) as i32
}

/// Round the Q6 hidden value onto the signed pulse-count grid fed back as
/// next-step input.
pub fn rescale_hidden(h_q6: i32, max_in: i32) -> i32 {
    let m = ((h_q6.unsigned_abs() as i64 * max_in as i64 + 32) >> 6) as i32;
    if h_q6 < 0 {
        -m
    } else {
        m
    }
}

/// Recurrent state: element state and hidden value in Q6, plus the hidden
/// value already requantized to input pulse counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LstmState {
    pub c_q6: Vec<i32>,
    pub h_q6: Vec<i32>,
    pub h_int: Vec<i32>,
}

impl LstmState {
    pub fn zero(hidden_dim: usize) -> Self {
        LstmState {
            c_q6: vec![0; hidden_dim],
            h_q6: vec![0; hidden_dim],
            h_int: vec![0; hidden_dim],
        }
    }
}

/// Per-step conversion record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTrace {
    /// One activated code per logical column, gate-major.
    pub codes: Vec<u32>,
    pub saturated_codes: u32,
    /// Column groups whose bitline left the linear window this step.
    pub dr_columns: u32,
}

/// Result of running a full sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceResult {
    pub logits: Vec<i64>,
    /// argmax of the logits, first index on ties.
    pub class: usize,
    pub final_h_q6: Vec<i32>,
    pub saturated_codes: u64,
    pub dr_events: u64,
}

fn argmax_first(logits: &[i64]) -> usize {
    let mut best = 0;
    for (i, v) in logits.iter().enumerate().skip(1) {
        if *v > logits[best] {
            best = i;
        }
    }
    best
}

fn classify(model: &LstmModel, h_q6: &[i32]) -> Vec<i64> {
    (0..model.classes)
        .map(|k| {
            (0..model.hidden_dim)
                .map(|u| model.fc.at(u, k) as i64 * h_q6[u] as i64)
                .sum()
        })
        .collect()
}

fn check_features(model: &LstmModel, x: &[i32], max_in: i32) -> Result<()> {
    if x.len() != model.input_dim {
        return Err(Error::Dimension(format!(
            "feature vector has {} entries, model takes {}",
            x.len(),
            model.input_dim
        )));
    }
    if let Some(v) = x.iter().find(|v| v.abs() > max_in) {
        return Err(Error::Config(format!(
            "input {v} exceeds the ±{max_in} pulse range"
        )));
    }
    Ok(())
}

struct ColumnPlan {
    cells: Vec<CellState>,
}

/// The analog inference path: encoded cells, cycle-level MAC evaluation,
/// ramp conversion, fixed-point element update.
pub struct MacroLstm<'m> {
    pub model: &'m LstmModel,
    pub mapping: LayerMapping,
    cfg: MacroConfig,
    supplies: SupplyPair,
    sig_table: RampTable,
    tanh_table: RampTable,
    columns: Vec<ColumnPlan>,
    /// Per logical column when mismatch is on.
    adc_columns: Vec<Option<AdcColumn>>,
    calib: Vec<CalibState>,
    with_mismatch: bool,
    max_in: i32,
}

impl<'m> MacroLstm<'m> {
    /// Ideal instance: unit cell currents, ideal converters. Bit-exact
    /// against [`IntegerLstm`].
    pub fn new(
        model: &'m LstmModel,
        cfg: &MacroConfig,
        adc: &AdcConfig,
        weight_bits: u32,
    ) -> Result<Self> {
        Self::build(model, cfg, adc, weight_bits, None)
    }

    /// One simulated chip: cell currents and comparator offsets drawn from
    /// `seed`, per-column calibration applied.
    pub fn with_mismatch(
        model: &'m LstmModel,
        cfg: &MacroConfig,
        adc: &AdcConfig,
        weight_bits: u32,
        sa_sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::build(model, cfg, adc, weight_bits, Some((sa_sigma, seed)))
    }

    fn build(
        model: &'m LstmModel,
        cfg: &MacroConfig,
        adc: &AdcConfig,
        weight_bits: u32,
        mismatch: Option<(f64, u64)>,
    ) -> Result<Self> {
        let mapping = map_layer(model, cfg, adc, weight_bits)?;
        // Each gate picks its own ramp shape; everything else follows the
        // caller's converter config.
        let mut sig_adc = adc.clone();
        sig_adc.activation = ActivationSpec::preset(ActivationKind::Sigmoid);
        let mut tanh_adc = adc.clone();
        tanh_adc.activation = ActivationSpec::preset(ActivationKind::Tanh);
        let sig_table = RampTable::build(&sig_adc, cfg)?;
        let tanh_table = RampTable::build(&tanh_adc, cfg)?;

        let field = match mismatch {
            Some((_, seed)) => Some(crate::analog::sample_mismatch(cfg, seed)?),
            None => None,
        };

        let weights = model.input_dim + model.hidden_dim;
        let scheme = &mapping.scheme;
        let mut columns = Vec::with_capacity(mapping.logical_cols);
        for lc in 0..mapping.logical_cols {
            let pcol = lc % cfg.cols;
            let mut cells = Vec::with_capacity(weights * mapping.cells_per_weight);
            for w in 0..weights {
                let enc = encode_multibit(model.w_cat.at(w, lc), scheme)?;
                // Row groups time-share the same physical rows, so the
                // factor depends on the in-group position only.
                let row_base = (w % mapping.weights_per_group) * mapping.cells_per_weight;
                for (j, cw) in enc.cell_weights.iter().enumerate() {
                    let factor = match &field {
                        Some(f) => f.factor(row_base + j, pcol),
                        None => 1.0,
                    };
                    cells.push(CellState::new(*cw, scheme.rail_assignment[j], factor)?);
                }
            }
            columns.push(ColumnPlan { cells });
        }

        let mut adc_columns = vec![None; mapping.logical_cols];
        let mut calib = Vec::with_capacity(mapping.logical_cols);
        for lc in 0..mapping.logical_cols {
            let table = if Gate::of_column(lc, model.hidden_dim).is_tanh() {
                &tanh_table
            } else {
                &sig_table
            };
            match mismatch {
                Some((sa_sigma, seed)) => {
                    let pcol = (lc % cfg.cols) as u64;
                    let col = sample_column(table, cfg.sigma_iu, sa_sigma, seed, pcol)?;
                    calib.push(calibrate_column_saturating(table, &col));
                    adc_columns[lc] = Some(col);
                }
                None => calib.push(CalibState::zero(adc)),
            }
        }

        let supplies = SupplyPair::for_ratio(scheme.n_bwr, cfg)?;
        let max_in = max_input_units(adc.n_bits);
        Ok(MacroLstm {
            model,
            mapping,
            cfg: cfg.clone(),
            supplies,
            sig_table,
            tanh_table,
            columns,
            adc_columns,
            calib,
            with_mismatch: mismatch.is_some(),
            max_in,
        })
    }

    pub fn max_input(&self) -> i32 {
        self.max_in
    }

    fn gate_table(&self, lc: usize) -> &RampTable {
        if Gate::of_column(lc, self.model.hidden_dim).is_tanh() {
            &self.tanh_table
        } else {
            &self.sig_table
        }
    }

    /// One timestep: evaluate every gate column on the array, convert, and
    /// update the recurrent state in place.
    pub fn step(&self, x: &[i32], state: &mut LstmState) -> Result<StepTrace> {
        check_features(self.model, x, self.max_in)?;
        let h = self.model.hidden_dim;
        let weights = self.model.input_dim + h;
        let cpw = self.mapping.cells_per_weight;
        let mults = &self.mapping.scheme.pulse_multipliers;

        let full: Vec<i32> = x.iter().chain(state.h_int.iter()).copied().collect();

        let mut codes = vec![0u32; self.mapping.logical_cols];
        let mut saturated = 0u32;
        let mut dr_columns = 0u32;
        let mut pulses: Vec<InputPulse> = Vec::with_capacity(self.mapping.rows_per_group);
        for lc in 0..self.mapping.logical_cols {
            let plan = &self.columns[lc];
            let mut mac_units = 0.0;
            for g in 0..self.mapping.row_splits {
                let w_lo = g * self.mapping.weights_per_group;
                let w_hi = (w_lo + self.mapping.weights_per_group).min(weights);
                pulses.clear();
                for w in w_lo..w_hi {
                    let v = full[w];
                    for &m in mults.iter().take(cpw) {
                        if v == 0 {
                            pulses.push(InputPulse::IDLE);
                        } else {
                            pulses.push(InputPulse::new(
                                v.signum() as i8,
                                v.unsigned_abs() * m,
                            )?);
                        }
                    }
                }
                let trace = mac_voltage(
                    &plan.cells[w_lo * cpw..w_hi * cpw],
                    &pulses,
                    &self.cfg,
                    &self.supplies,
                    self.with_mismatch,
                )?;
                if trace.dr_violation {
                    dr_columns += 1;
                }
                // Pulse phases accumulate on the bitline before the single
                // conversion.
                mac_units += trace.mac_units;
            }
            let table = self.gate_table(lc);
            let mut conv = match &self.adc_columns[lc] {
                Some(col) => Converter::with_column(table, col.clone()),
                None => Converter::ideal(table),
            };
            conv.calib = self.calib[lc].clone();
            let r = conv.convert_units(mac_units);
            if r.saturated {
                saturated += 1;
            }
            codes[lc] = r.code;
        }

        update_state(&codes, h, self.max_in, state);
        Ok(StepTrace {
            codes,
            saturated_codes: saturated,
            dr_columns,
        })
    }

    pub fn run_sequence(&self, features: &[Vec<i32>]) -> Result<SequenceResult> {
        let mut state = LstmState::zero(self.model.hidden_dim);
        let mut saturated = 0u64;
        let mut dr = 0u64;
        for x in features {
            let t = self.step(x, &mut state)?;
            saturated += t.saturated_codes as u64;
            dr += t.dr_columns as u64;
        }
        let logits = classify(self.model, &state.h_q6);
        Ok(SequenceResult {
            class: argmax_first(&logits),
            logits,
            final_h_q6: state.h_q6,
            saturated_codes: saturated,
            dr_events: dr,
        })
    }
}

/// Shared fixed-point element update over the converted gate codes.
fn update_state(codes: &[u32], hidden_dim: usize, max_in: i32, state: &mut LstmState) {
    for u in 0..hidden_dim {
        let i_q = sigmoid_code_q6(codes[u]);
        let f_q = sigmoid_code_q6(codes[hidden_dim + u]);
        let g_q = tanh_code_q6(codes[2 * hidden_dim + u]);
        let o_q = sigmoid_code_q6(codes[3 * hidden_dim + u]);
        let c = cell_update_q6(f_q, i_q, g_q, state.c_q6[u]);
        let h_new = hidden_update_q6(o_q, tanh_pwl_q6(c));
        state.c_q6[u] = c;
        state.h_q6[u] = h_new;
        state.h_int[u] = rescale_hidden(h_new, max_in);
    }
}

/// Pure-integer reference path. Gate codes come from counting ramp levels
/// below the integer dot product; the element update is the same Q6 unit
/// the analog path uses.
pub struct IntegerLstm<'m> {
    pub model: &'m LstmModel,
    sig_levels: Vec<i64>,
    tanh_levels: Vec<i64>,
    max_code: u32,
    max_in: i32,
}

impl<'m> IntegerLstm<'m> {
    pub fn new(model: &'m LstmModel, cfg: &MacroConfig, adc: &AdcConfig) -> Result<Self> {
        model.validate()?;
        let mut sig_adc = adc.clone();
        sig_adc.activation = ActivationSpec::preset(ActivationKind::Sigmoid);
        let mut tanh_adc = adc.clone();
        tanh_adc.activation = ActivationSpec::preset(ActivationKind::Tanh);
        let sig = RampTable::build(&sig_adc, cfg)?;
        let tanh = RampTable::build(&tanh_adc, cfg)?;
        Ok(IntegerLstm {
            model,
            max_code: sig.max_code(),
            sig_levels: integer_levels(&sig)?,
            tanh_levels: integer_levels(&tanh)?,
            max_in: max_input_units(adc.n_bits),
        })
    }

    pub fn max_input(&self) -> i32 {
        self.max_in
    }

    fn gate_code(&self, lc: usize, mac: i64) -> u32 {
        let levels = if Gate::of_column(lc, self.model.hidden_dim).is_tanh() {
            &self.tanh_levels
        } else {
            &self.sig_levels
        };
        let raw = levels.iter().filter(|l| **l < mac).count() as u32;
        raw.min(self.max_code)
    }

    pub fn step(&self, x: &[i32], state: &mut LstmState) -> Result<StepTrace> {
        check_features(self.model, x, self.max_in)?;
        let h = self.model.hidden_dim;
        let weights = self.model.input_dim + h;
        let full: Vec<i32> = x.iter().chain(state.h_int.iter()).copied().collect();
        let codes: Vec<u32> = (0..4 * h)
            .map(|lc| {
                let mac: i64 = (0..weights)
                    .map(|w| self.model.w_cat.at(w, lc) as i64 * full[w] as i64)
                    .sum();
                self.gate_code(lc, mac)
            })
            .collect();
        update_state(&codes, h, self.max_in, state);
        Ok(StepTrace {
            codes,
            saturated_codes: 0,
            dr_columns: 0,
        })
    }

    pub fn run_sequence(&self, features: &[Vec<i32>]) -> Result<SequenceResult> {
        let mut state = LstmState::zero(self.model.hidden_dim);
        for x in features {
            self.step(x, &mut state)?;
        }
        let logits = classify(self.model, &state.h_q6);
        Ok(SequenceResult {
            class: argmax_first(&logits),
            logits,
            final_h_q6: state.h_q6,
            saturated_codes: 0,
            dr_events: 0,
        })
    }
}

/// The ideal ramp levels are integers by construction; anything else means
/// the table cannot back an integer reference.
fn integer_levels(table: &RampTable) -> Result<Vec<i64>> {
    table
        .ideal_levels
        .iter()
        .map(|l| {
            if l.fract() == 0.0 {
                Ok(*l as i64)
            } else {
                Err(Error::Config(format!("non-integer ramp level {l}")))
            }
        })
        .collect()
}

/// Operation counts for one timestep, split by where the work runs.
/// Multiplies and adds count separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpBreakdown {
    /// MAC multiply-adds executed inside the array.
    pub linear_on_macro: u64,
    /// Gate activations folded into the ramp conversion.
    pub nonlinear_on_macro: u64,
    /// tanh(c) evaluations left to the digital element unit.
    pub nonlinear_off_macro: u64,
    /// Digital element-update multiplies and adds.
    pub linear_off_macro: u64,
}

impl OpBreakdown {
    pub fn total(&self) -> u64 {
        self.linear_on_macro
            + self.nonlinear_on_macro
            + self.nonlinear_off_macro
            + self.linear_off_macro
    }

    /// Share of nonlinear evaluations the converter absorbs.
    pub fn nonlinear_on_fraction(&self) -> f64 {
        self.nonlinear_on_macro as f64
            / (self.nonlinear_on_macro + self.nonlinear_off_macro) as f64
    }

    /// Share of linear work the array absorbs.
    pub fn linear_on_fraction(&self) -> f64 {
        self.linear_on_macro as f64 / (self.linear_on_macro + self.linear_off_macro) as f64
    }
}

/// Count one timestep's operations. Each stored weight costs a multiply
/// and an add on the array; each hidden unit costs four multiplies and an
/// add in the element update (f*c, i*g, their sum, o*tanh, and the
/// feedback rescale).
pub fn op_breakdown(model: &LstmModel) -> OpBreakdown {
    let h = model.hidden_dim as u64;
    let weights = (model.input_dim + model.hidden_dim) as u64;
    OpBreakdown {
        linear_on_macro: 2 * weights * 4 * h,
        nonlinear_on_macro: 4 * h,
        nonlinear_off_macro: h,
        linear_off_macro: 5 * h,
    }
}

/// The digital element-update pipeline that follows the converters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub pe_count: usize,
    pub dims_per_pe: usize,
    pub stage_latency: u32,
    /// Cycles from last code to last hidden value.
    pub total_latency: u32,
}

impl PipelineModel {
    pub fn for_hidden(hidden_dim: usize) -> Self {
        let dims_per_pe = 2;
        PipelineModel {
            pe_count: hidden_dim.div_ceil(dims_per_pe),
            dims_per_pe,
            stage_latency: 4,
            total_latency: 5,
        }
    }
}

/// Cycle accounting for one mapped layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub n_bits: u32,
    pub weight_bits: u32,
    /// Longest input pulse train of one phase.
    pub mac_phase_cycles: u32,
    pub init_cycles: u32,
    pub ramp_cycles: u32,
    /// MAC phases, offset init, and ramp for one conversion.
    pub conversion_cycles: u32,
    pub col_passes: u32,
    pub row_splits: u32,
    pub pipeline_latency: u32,
    pub timestep_cycles: u32,
    pub sequence_cycles: u64,
    pub timestep_seconds: f64,
}

/// Cycles per timestep: every column pass runs its pulse phases (the offset
/// init fires under them), then the ramp; the element pipeline drains once
/// at the end.
pub fn latency_report(
    mapping: &LayerMapping,
    table: &RampTable,
    pipeline: &PipelineModel,
    cfg: &MacroConfig,
    seq_len: usize,
) -> LatencyReport {
    let mac_phase =
        max_input_units(table.adc.n_bits) as u32 * mapping.scheme.latency_clocks;
    let init = table.schedule.init_pulse_cycles;
    let ramp = table.schedule.total_cycles;
    let conversion = (mac_phase * mapping.row_splits as u32).max(init) + ramp;
    let timestep = conversion * mapping.col_passes as u32 + pipeline.total_latency;
    LatencyReport {
        n_bits: table.adc.n_bits,
        weight_bits: mapping.weight_bits,
        mac_phase_cycles: mac_phase,
        init_cycles: init,
        ramp_cycles: ramp,
        conversion_cycles: conversion,
        col_passes: mapping.col_passes as u32,
        row_splits: mapping.row_splits as u32,
        pipeline_latency: pipeline.total_latency,
        timestep_cycles: timestep,
        sequence_cycles: timestep as u64 * seq_len as u64,
        timestep_seconds: timestep as f64 * cfg.clock_period,
    }
}
