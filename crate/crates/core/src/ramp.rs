//! Nonlinear ramp construction: inverse sampling of an activation,
//! step quantization, PWM/MCL scheduling, latency, and
//! reconstruction-error metrology.
//!
//! The converter realizes the activation f by sweeping a reference built
//! from f⁻¹: equidistant output samples t_k map to voltages V_k = f⁻¹(t_k),
//! and the voltage increments ΔV_k, rounded to integer multiples of the
//! smallest increment, become cell/pulse counts of the step generator.

use crate::activation::ActivationCurve;
use crate::analog::MacroConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Equidistant output samples and their inverse images.
#[derive(Debug, Clone)]
pub struct SamplePoints {
    pub n_bits: u32,
    /// (t_k, V_k) for k = 1..2ⁿ−1; both strictly increasing.
    pub points: Vec<(f64, f64)>,
}

impl SamplePoints {
    /// Output quantization step (f_max − f_min)/2ⁿ implied by the grid.
    pub fn output_lsb(&self) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        self.points[1].0 - self.points[0].0
    }
}

/// Voltage increments between consecutive samples and their integer
/// quantization.
#[derive(Debug, Clone)]
pub struct QuantizedSteps {
    pub n_bits: u32,
    /// ΔV_k = V_{k+1} − V_k, length 2ⁿ−2, all positive.
    pub deltas: Vec<f64>,
    /// Qnt(ΔV_k) = round(ΔV_k / lsb), all ≥ 1. Empty until
    /// [`quantize_steps`] fills it.
    pub quantized: Vec<u32>,
    /// min ΔV_k before subdivision.
    pub min_delta: f64,
    /// Step unit: min_delta / divisor. One ramp LSB in activation-x units.
    pub lsb: f64,
    pub divisor: u32,
}

impl QuantizedSteps {
    /// Σ Qnt, the PWM ramp-phase cycle count and MCL cell count.
    pub fn total_units(&self) -> u32 {
        self.quantized.iter().sum()
    }

    /// Cumulative unit positions [0, q₁, q₁+q₂, …], length 2ⁿ−1. Entry p
    /// is the ramp position after p steps, in step units.
    pub fn cumulative_units(&self) -> Vec<u32> {
        let mut cum = Vec::with_capacity(self.quantized.len() + 1);
        let mut acc = 0u32;
        cum.push(0);
        for &q in &self.quantized {
            acc += q;
            cum.push(acc);
        }
        cum
    }

    pub fn step_count(&self) -> usize {
        self.deltas.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampMode {
    /// One cell per step, pulse width Qnt cycles.
    Pwm,
    /// Qnt cells per step, one cycle each.
    Mcl,
}

impl RampMode {
    pub fn name(self) -> &'static str {
        match self {
            RampMode::Pwm => "pwm",
            RampMode::Mcl => "mcl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pwm" => Ok(RampMode::Pwm),
            "mcl" => Ok(RampMode::Mcl),
            other => Err(Error::Config(format!(
                "unknown ramp mode '{other}' (expected pwm or mcl)"
            ))),
        }
    }
}

/// Cell and pulse assignment realizing a quantized step table.
#[derive(Debug, Clone)]
pub struct RampSchedule {
    pub mode: RampMode,
    /// (cell_count, pulse_cycles) per step.
    pub per_step: Vec<(u32, u32)>,
    /// 2ⁿ⁻¹−1 cells generate the initial offset; they are the first ramp
    /// cells reused with the opposite word line, not extra rows.
    pub init_cells: u32,
    /// Duration of the simultaneous init firing: the widest init pulse in
    /// PWM mode, one cycle in MCL mode.
    pub init_pulse_cycles: u32,
    pub total_cells: u32,
    /// Ramp-phase cycles (init counted separately).
    pub total_cycles: u32,
}

/// How the initial ramp offset is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStyle {
    /// Integer offset minimizing the mean level error. Reduces exactly to
    /// −ΣQnt/2 for mirror-symmetric step tables and anchors asymmetric
    /// curves correctly.
    #[default]
    LsqAnchor,
    /// −ΣQnt/2 (half-integral when ΣQnt is odd). Only correct for
    /// symmetric curves.
    HalfSum,
    /// −(sum of the first 2ⁿ⁻¹−1 step weights): the plan of firing the
    /// first-half cells with their own pulse widths. Coincides with
    /// HalfSum for symmetric curves.
    FirstHalf,
}

impl InitStyle {
    pub fn name(self) -> &'static str {
        match self {
            InitStyle::LsqAnchor => "lsq_anchor",
            InitStyle::HalfSum => "half_sum",
            InitStyle::FirstHalf => "first_half",
        }
    }
}

/// Sample the inverse activation at 2ⁿ−1 equidistant output points
/// t_k = f_min + k·(f_max−f_min)/2ⁿ, k = 1..2ⁿ−1 (endpoints excluded).
pub fn sample_inverse<A: ActivationCurve + ?Sized>(act: &A, n_bits: u32) -> Result<SamplePoints> {
    if !(1..=5).contains(&n_bits) {
        return Err(Error::Resolution(n_bits));
    }
    let (lo, hi) = act.output_range();
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::ClipRange {
            lo,
            hi,
            reason: "range must be finite with lo < hi".into(),
        });
    }
    let n = 1usize << n_bits;
    let width = hi - lo;
    let mut points = Vec::with_capacity(n - 1);
    for k in 1..n {
        let t = lo + width * k as f64 / n as f64;
        let v = act.inverse(t)?;
        points.push((t, v));
    }
    for w in points.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::Activation(format!(
                "inverse is not strictly increasing between t = {} and t = {}",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(SamplePoints { n_bits, points })
}

/// Voltage differences ΔV_k = V_{k+1} − V_k and their minimum. The
/// quantized column stays empty until [`quantize_steps`].
pub fn step_deltas(pts: &SamplePoints) -> Result<QuantizedSteps> {
    let mut deltas = Vec::with_capacity(pts.points.len().saturating_sub(1));
    for w in pts.points.windows(2) {
        let d = w[1].1 - w[0].1;
        if d <= 0.0 {
            return Err(Error::Activation(
                "non-positive voltage increment (monotonicity violated)".into(),
            ));
        }
        deltas.push(d);
    }
    let min_delta = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let min_delta = if deltas.is_empty() { 0.0 } else { min_delta };
    Ok(QuantizedSteps {
        n_bits: pts.n_bits,
        deltas,
        quantized: Vec::new(),
        min_delta,
        lsb: min_delta,
        divisor: 1,
    })
}

/// Fill the integer step weights: Qnt(ΔV_k) = round(ΔV_k / lsb) with
/// lsb = min ΔV_k / divisor. Ties round half away from zero.
pub fn quantize_steps(mut qs: QuantizedSteps, divisor: u32) -> Result<QuantizedSteps> {
    if divisor == 0 {
        return Err(Error::Config("step divisor must be >= 1".into()));
    }
    qs.divisor = divisor;
    qs.lsb = qs.min_delta / divisor as f64;
    qs.quantized = qs
        .deltas
        .iter()
        .map(|d| (d / qs.lsb).round() as u32)
        .collect();
    debug_assert!(qs.quantized.iter().all(|&q| q >= 1));
    Ok(qs)
}

/// Sample, difference, and quantize in one call using the curve's own
/// divisor.
pub fn build_steps<A: ActivationCurve + ?Sized>(act: &A, n_bits: u32) -> Result<QuantizedSteps> {
    let pts = sample_inverse(act, n_bits)?;
    quantize_steps(step_deltas(&pts)?, act.quant_divisor())
}

/// Assign cells and pulse widths per step for the chosen mode.
pub fn build_schedule(qs: &QuantizedSteps, mode: RampMode) -> RampSchedule {
    let per_step: Vec<(u32, u32)> = match mode {
        RampMode::Pwm => qs.quantized.iter().map(|&q| (1, q)).collect(),
        RampMode::Mcl => qs.quantized.iter().map(|&q| (q, 1)).collect(),
    };
    let total_cells = per_step.iter().map(|s| s.0).sum();
    let total_cycles = match mode {
        RampMode::Pwm => qs.total_units(),
        RampMode::Mcl => qs.step_count() as u32,
    };
    let init_cells = (1u32 << (qs.n_bits - 1)) - 1;
    let init_pulse_cycles = if init_cells == 0 {
        0
    } else {
        match mode {
            RampMode::Pwm => qs
                .quantized
                .iter()
                .take(init_cells as usize)
                .copied()
                .max()
                .unwrap_or(0),
            RampMode::Mcl => 1,
        }
    };
    RampSchedule {
        mode,
        per_step,
        init_cells,
        init_pulse_cycles,
        total_cells,
        total_cycles,
    }
}

/// Ramp-phase cycle count (the init phase is reported separately).
pub fn schedule_latency(sched: &RampSchedule) -> u32 {
    sched.total_cycles
}

/// Initial offset in step units under the chosen anchoring.
pub fn anchor_units(qs: &QuantizedSteps, pts: &SamplePoints, style: InitStyle) -> f64 {
    if qs.quantized.is_empty() {
        return 0.0; // single-level converter has no steps to anchor against
    }
    match style {
        InitStyle::HalfSum => -(qs.total_units() as f64) / 2.0,
        InitStyle::FirstHalf => {
            let half = (1usize << (qs.n_bits - 1)) - 1;
            -(qs.quantized.iter().take(half).sum::<u32>() as f64)
        }
        InitStyle::LsqAnchor => {
            let cum = qs.cumulative_units();
            let mean: f64 = pts
                .points
                .iter()
                .zip(&cum)
                .map(|(&(_, v), &c)| v / qs.lsb - c as f64)
                .sum::<f64>()
                / cum.len() as f64;
            mean.round()
        }
    }
}

/// The 2ⁿ−1 transition levels in step units: anchor + cumulative sum.
pub fn ideal_levels_units(qs: &QuantizedSteps, anchor: f64) -> Vec<f64> {
    qs.cumulative_units()
        .iter()
        .map(|&c| anchor + c as f64)
        .collect()
}

/// Ramp voltages per clock index p = 0..2ⁿ−2 with the half-sum initial
/// offset: V_Ramp⁰ = −(unit/2)·ΣQnt, each step adds Qnt·unit, and the
/// final value mirrors the initial one.
pub fn ideal_ramp(qs: &QuantizedSteps, cfg: &MacroConfig) -> Vec<f64> {
    let unit = cfg.unit_step();
    let half = qs.total_units() as f64 / 2.0;
    qs.cumulative_units()
        .iter()
        .map(|&c| (c as f64 - half) * unit)
        .collect()
}

/// Per-level reconstruction error of the quantized ramp against the exact
/// inverse curve, in every normalization anyone asks for.
#[derive(Debug, Clone)]
pub struct RampErrorReport {
    pub anchor_units: f64,
    /// RMSE of the reconstructed V_k in activation-x units.
    pub rmse_x: f64,
    /// rmse_x / (min ΔV_k / divisor): the ramp-LSB normalization.
    pub rmse_ramp_lsb: f64,
    /// RMSE of f(level) − t_k over the output grid, in output LSB
    /// ((f_max−f_min)/2ⁿ).
    pub rmse_output_lsb: f64,
    /// max |f(level) − t_k| in output LSB; the sub-LSB design target.
    pub max_abs_output_lsb: f64,
    /// (k, t_k, ideal V_k, realized level, error in output LSB).
    pub per_level: Vec<(usize, f64, f64, f64, f64)>,
}

/// Compare the anchored integer ramp against the exact inverse samples.
pub fn reconstruction_report<A: ActivationCurve + ?Sized>(
    act: &A,
    pts: &SamplePoints,
    qs: &QuantizedSteps,
    style: InitStyle,
) -> RampErrorReport {
    let anchor = anchor_units(qs, pts, style);
    let levels = ideal_levels_units(qs, anchor);
    let out_lsb = pts.output_lsb();
    let mut sq_x = 0.0;
    let mut sq_out = 0.0;
    let mut max_out: f64 = 0.0;
    let mut per_level = Vec::with_capacity(levels.len());
    for (p, &lu) in levels.iter().enumerate() {
        let (t, v) = pts.points[p];
        let level_x = lu * qs.lsb;
        let err_x = level_x - v;
        let err_out = if out_lsb > 0.0 {
            (act.forward(level_x) - t) / out_lsb
        } else {
            0.0
        };
        sq_x += err_x * err_x;
        sq_out += err_out * err_out;
        max_out = max_out.max(err_out.abs());
        per_level.push((p + 1, t, v, level_x, err_out));
    }
    let n = levels.len() as f64;
    let rmse_x = (sq_x / n).sqrt();
    RampErrorReport {
        anchor_units: anchor,
        rmse_x,
        rmse_ramp_lsb: if qs.lsb > 0.0 { rmse_x / qs.lsb } else { 0.0 },
        rmse_output_lsb: (sq_out / n).sqrt(),
        max_abs_output_lsb: max_out,
        per_level,
    }
}

/// Output-LSB reconstruction RMSE as the per-step cell budget grows:
/// each multiplier further subdivides the step unit, spending `m` times
/// the cells (MCL) or cycles (PWM) of the base table. The error falls
/// monotonically with the budget.
pub fn cell_budget_trend<A: ActivationCurve + ?Sized>(
    act: &A,
    n_bits: u32,
    multipliers: &[u32],
) -> Result<Vec<(u32, f64)>> {
    let pts = sample_inverse(act, n_bits)?;
    let base = step_deltas(&pts)?;
    let mut rows = Vec::with_capacity(multipliers.len());
    for &m in multipliers {
        let divisor = act
            .quant_divisor()
            .checked_mul(m)
            .ok_or_else(|| Error::Config("budget multiplier overflow".into()))?;
        let qs = quantize_steps(base.clone(), divisor)?;
        let report = reconstruction_report(act, &pts, &qs, InitStyle::LsqAnchor);
        rows.push((m, report.rmse_output_lsb));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{ActivationKind, ActivationSpec, CustomActivation};
    use approx::assert_relative_eq;

    fn steps_for(kind: ActivationKind, n_bits: u32) -> (SamplePoints, QuantizedSteps) {
        let act = ActivationSpec::preset(kind);
        let pts = sample_inverse(&act, n_bits).unwrap();
        let qs = quantize_steps(step_deltas(&pts).unwrap(), act.quant_divisor()).unwrap();
        (pts, qs)
    }

    #[test]
    fn sigmoid_5bit_sampling_hits_known_points() {
        let (pts, _) = steps_for(ActivationKind::Sigmoid, 5);
        assert_eq!(pts.points.len(), 31);
        assert_eq!(pts.points[15].0, 0.5);
        assert_eq!(pts.points[15].1, 0.0);
        assert_relative_eq!(pts.points[0].1, (1.0f64 / 31.0).ln(), max_relative = 1e-12);
    }

    #[test]
    fn sigmoid_5bit_step_table_is_frozen() {
        // Oracle: deltas of ln(k/(32−k)); the center delta ln(17/15) is the
        // smallest and every ratio rounds to the sequence below.
        let (_, qs) = steps_for(ActivationKind::Sigmoid, 5);
        assert_relative_eq!(qs.lsb, (17.0f64 / 15.0).ln(), max_relative = 1e-12);
        assert_relative_eq!(qs.lsb, 0.125163142954006, max_relative = 1e-12);
        let expected: Vec<u32> = {
            let head = [6, 4, 3, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1];
            let mut v: Vec<u32> = head.to_vec();
            v.extend(head.iter().rev());
            v
        };
        assert_eq!(qs.quantized, expected);
        assert_eq!(qs.total_units(), 56);
    }

    #[test]
    fn sigmoid_4bit_step_table_is_frozen() {
        let (_, qs) = steps_for(ActivationKind::Sigmoid, 4);
        assert_eq!(qs.quantized, vec![3, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 3]);
        assert_eq!(qs.total_units(), 20);
        assert_relative_eq!(qs.lsb, (9.0f64 / 7.0).ln(), max_relative = 1e-12);
    }

    #[test]
    fn tanh_shares_the_sigmoid_table_at_half_scale() {
        // tanh⁻¹ over (−1,1) is the sigmoid inverse scaled by 1/2, so the
        // integer table is identical and the lsb halves.
        let (_, sig) = steps_for(ActivationKind::Sigmoid, 5);
        let (pts, tanh) = steps_for(ActivationKind::Tanh, 5);
        assert_eq!(sig.quantized, tanh.quantized);
        assert_relative_eq!(tanh.lsb, sig.lsb / 2.0, max_relative = 1e-12);
        for (p, w) in pts.points.windows(2).enumerate() {
            let (_, lo) = w[0];
            let (_, hi) = w[1];
            // symmetric deltas about the center
            let mirror = tanh.deltas[tanh.deltas.len() - 1 - p];
            assert_relative_eq!(hi - lo, mirror, max_relative = 1e-9);
        }
    }

    #[test]
    fn linear_degenerates_to_a_uniform_staircase() {
        let act = ActivationSpec::preset(ActivationKind::Linear);
        for n in 1..=5 {
            let pts = sample_inverse(&act, n).unwrap();
            let qs = quantize_steps(step_deltas(&pts).unwrap(), 1).unwrap();
            assert!(qs.quantized.iter().all(|&q| q == 1));
            if n == 4 {
                for d in &qs.deltas {
                    assert_relative_eq!(*d, 1.0 / 16.0, max_relative = 1e-12);
                }
            }
            if n > 1 {
                let report = reconstruction_report(&act, &pts, &qs, InitStyle::LsqAnchor);
                assert!(report.rmse_x < 1e-12);
            }
        }
    }

    #[test]
    fn schedules_reproduce_the_mode_duality_table() {
        for (kind, bits, mode, cells, cycles) in [
            (ActivationKind::Sigmoid, 5, RampMode::Pwm, 30, 56),
            (ActivationKind::Sigmoid, 5, RampMode::Mcl, 56, 30),
            (ActivationKind::Sigmoid, 4, RampMode::Pwm, 14, 20),
            (ActivationKind::Sigmoid, 4, RampMode::Mcl, 20, 14),
        ] {
            let (_, qs) = steps_for(kind, bits);
            let sched = build_schedule(&qs, mode);
            assert_eq!((sched.total_cells, sched.total_cycles), (cells, cycles));
            assert_eq!(schedule_latency(&sched), cycles);
        }
        let (_, qs) = steps_for(ActivationKind::Sigmoid, 5);
        let sched = build_schedule(&qs, RampMode::Pwm);
        assert_eq!(sched.init_cells, 15);
        assert_eq!(sched.init_pulse_cycles, 6); // widest pulse in the first half
    }

    #[test]
    fn ideal_ramp_is_monotone_and_mirror_bounded() {
        let cfg = MacroConfig::default();
        let (_, qs) = steps_for(ActivationKind::Sigmoid, 5);
        let ramp = ideal_ramp(&qs, &cfg);
        assert_eq!(ramp.len(), 31);
        assert_relative_eq!(ramp[0], -28.0 * cfg.unit_step(), max_relative = 1e-12);
        assert_relative_eq!(*ramp.last().unwrap(), -ramp[0], max_relative = 1e-12);
        for w in ramp.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn anchors_match_the_frozen_values() {
        // LSQ anchor equals −ΣQnt/2 for symmetric tables and the
        // least-squares integer for asymmetric ones.
        for (kind, anchor, total) in [
            (ActivationKind::Sigmoid, -28.0, 56),
            (ActivationKind::Tanh, -28.0, 56),
            (ActivationKind::Elu, -11.0, 36),
            (ActivationKind::Selu, -12.0, 87),
            (ActivationKind::Softsign, -225.0, 450),
            (ActivationKind::Softplus, -28.0, 87),
        ] {
            let (pts, qs) = steps_for(kind, 5);
            assert_eq!(qs.total_units(), total, "{}", kind.name());
            assert_eq!(
                anchor_units(&qs, &pts, InitStyle::LsqAnchor),
                anchor,
                "{}",
                kind.name()
            );
        }
        let (pts, qs) = steps_for(ActivationKind::Sigmoid, 5);
        assert_eq!(anchor_units(&qs, &pts, InitStyle::HalfSum), -28.0);
        assert_eq!(anchor_units(&qs, &pts, InitStyle::FirstHalf), -28.0);
    }

    #[test]
    fn reconstruction_errors_match_the_frozen_values() {
        let (pts, qs) = steps_for(ActivationKind::Sigmoid, 5);
        let act = ActivationSpec::preset(ActivationKind::Sigmoid);
        let report = reconstruction_report(&act, &pts, &qs, InitStyle::LsqAnchor);
        assert_relative_eq!(report.rmse_ramp_lsb, 0.4982076246566626, max_relative = 1e-9);
        assert_relative_eq!(
            report.max_abs_output_lsb,
            0.8340305555689307,
            max_relative = 1e-9
        );
    }

    #[test]
    fn all_six_presets_stay_sub_lsb_at_5_bits() {
        for (kind, frozen_max) in [
            (ActivationKind::Sigmoid, 0.834031),
            (ActivationKind::Tanh, 0.834031),
            (ActivationKind::Elu, 0.682340),
            (ActivationKind::Selu, 0.567256),
            (ActivationKind::Softsign, 0.333333),
            (ActivationKind::Softplus, 0.807978),
        ] {
            let act = ActivationSpec::preset(kind);
            let pts = sample_inverse(&act, 5).unwrap();
            let qs = quantize_steps(step_deltas(&pts).unwrap(), act.quant_divisor()).unwrap();
            let report = reconstruction_report(&act, &pts, &qs, InitStyle::LsqAnchor);
            assert!(
                report.max_abs_output_lsb < 1.0,
                "{} exceeds one output LSB",
                kind.name()
            );
            assert_relative_eq!(report.max_abs_output_lsb, frozen_max, max_relative = 1e-5);
        }
    }

    #[test]
    fn budget_trend_is_strictly_decreasing() {
        let act = ActivationSpec::preset(ActivationKind::Sigmoid);
        let rows = cell_budget_trend(&act, 5, &[1, 2, 4, 8]).unwrap();
        assert_relative_eq!(rows[0].1, 0.327, epsilon = 5e-3);
        for w in rows.windows(2) {
            assert!(w[1].1 < w[0].1, "{rows:?}");
        }
    }

    #[test]
    fn one_bit_table_degenerates_cleanly() {
        let act = ActivationSpec::preset(ActivationKind::Sigmoid);
        let pts = sample_inverse(&act, 1).unwrap();
        assert_eq!(pts.points.len(), 1);
        let qs = quantize_steps(step_deltas(&pts).unwrap(), 1).unwrap();
        assert!(qs.quantized.is_empty());
        assert_eq!(anchor_units(&qs, &pts, InitStyle::LsqAnchor), 0.0);
        let sched = build_schedule(&qs, RampMode::Pwm);
        assert_eq!((sched.init_cells, sched.total_cells), (0, 0));
    }

    #[test]
    fn out_of_range_resolution_is_rejected() {
        let act = ActivationSpec::preset(ActivationKind::Sigmoid);
        assert!(sample_inverse(&act, 0).is_err());
        assert!(sample_inverse(&act, 6).is_err());
    }

    #[test]
    fn custom_curves_sample_through_the_same_path() {
        let cube = CustomActivation {
            forward: |x: f64| x * x * x,
            output_range: (-1.0, 1.0),
            domain_hint: (-1.5, 1.5),
            quant_divisor: 1,
        };
        let pts = sample_inverse(&cube, 3).unwrap();
        assert_eq!(pts.points.len(), 7);
        let qs = quantize_steps(step_deltas(&pts).unwrap(), 1).unwrap();
        assert!(qs.quantized.iter().all(|&q| q >= 1));
    }

    #[test]
    fn non_monotone_custom_curve_is_rejected() {
        let hump = CustomActivation {
            forward: |x: f64| -(x * x),
            output_range: (-4.0, -0.1),
            domain_hint: (0.1, 2.0),
            quant_divisor: 1,
        };
        assert!(sample_inverse(&hump, 3).is_err());
    }
}
