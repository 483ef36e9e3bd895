//! Cross-module invariants exercised over randomized inputs: every
//! structural promise the simulator makes, checked against generated
//! activations, resolutions, weights, and chips rather than the frozen
//! oracle tables.

use proptest::prelude::*;

use nlimsim::activation::{ActivationCurve, ActivationKind, ActivationSpec};
use nlimsim::adc::{
    calibrate_column_saturating, functional_oracle_code, sample_column, AdcConfig,
    Converter, RampTable,
};
use nlimsim::analog::{
    mac_voltage, n_bwr_from_supplies, sample_mismatch, CellState, InputPulse,
    MacroConfig, Rail, SupplyPair,
};
use nlimsim::codec::{decode_multibit, encode_multibit, ternarize, MultiBitScheme};
use nlimsim::lstm::{op_breakdown, IntegerLstm, LstmModel, LstmState};
use nlimsim::ramp::{
    build_schedule, build_steps, ideal_ramp, sample_inverse, RampMode,
};

fn any_kind() -> impl Strategy<Value = ActivationKind> {
    prop_oneof![
        Just(ActivationKind::Sigmoid),
        Just(ActivationKind::Tanh),
        Just(ActivationKind::Elu),
        Just(ActivationKind::Selu),
        Just(ActivationKind::Softsign),
        Just(ActivationKind::Softplus),
    ]
}

fn table_for(kind: ActivationKind, n_bits: u32) -> (AdcConfig, MacroConfig, RampTable) {
    let adc = AdcConfig::new(n_bits, RampMode::Pwm, ActivationSpec::preset(kind));
    let cfg = MacroConfig::default();
    let table = RampTable::build(&adc, &cfg).expect("reference table builds");
    (adc, cfg, table)
}

proptest! {
    /// Swapping pulse width against cell count is an exact transpose of
    /// the schedule: total cells and total cycles trade places.
    #[test]
    fn mode_duality(kind in any_kind(), bits in 2u32..=5) {
        let qs = build_steps(&ActivationSpec::preset(kind), bits).unwrap();
        let pwm = build_schedule(&qs, RampMode::Pwm);
        let mcl = build_schedule(&qs, RampMode::Mcl);
        prop_assert_eq!(pwm.total_cells, mcl.total_cycles);
        prop_assert_eq!(pwm.total_cycles, mcl.total_cells);
        for ((pc, py), (mc, my)) in pwm.per_step.iter().zip(&mcl.per_step) {
            prop_assert_eq!((pc, py), (my, mc));
        }
    }

    /// Sampled inverse points rise strictly in both coordinates and every
    /// quantized step stays >= 1, so the ramp is strictly monotone.
    #[test]
    fn ramps_are_strictly_monotone(kind in any_kind(), bits in 2u32..=5) {
        let spec = ActivationSpec::preset(kind);
        let pts = sample_inverse(&spec, bits).unwrap();
        for w in pts.points.windows(2) {
            prop_assert!(w[1].0 > w[0].0);
            prop_assert!(w[1].1 > w[0].1);
        }
        let qs = build_steps(&spec, bits).unwrap();
        prop_assert!(qs.quantized.iter().all(|&q| q >= 1));
        let (_, _, table) = table_for(kind, bits);
        for w in table.ideal_levels.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }

    /// With the half-sum anchor the ramp is symmetric: the final value
    /// mirrors the initial offset.
    #[test]
    fn half_sum_ramp_ends_where_it_started(kind in any_kind(), bits in 2u32..=5) {
        let qs = build_steps(&ActivationSpec::preset(kind), bits).unwrap();
        let ramp = ideal_ramp(&qs, &MacroConfig::default());
        let first = *ramp.first().unwrap();
        let last = *ramp.last().unwrap();
        prop_assert!((first + last).abs() < 1e-12, "{first} vs {last}");
    }

    /// A linear activation degenerates the nonlinear ramp into the uniform
    /// single-slope converter: every step quantizes to the same unit.
    #[test]
    fn linear_activation_degenerates_to_uniform_steps(bits in 2u32..=5) {
        let spec = ActivationSpec::preset(ActivationKind::Linear);
        let qs = build_steps(&spec, bits).unwrap();
        prop_assert!(qs.quantized.iter().all(|&q| q == qs.quantized[0]));
    }

    /// Sign-magnitude multi-bit encoding inverts exactly, and every cell
    /// carries the weight's sign.
    #[test]
    fn codec_round_trips(bits in 2u32..=5, raw in -15i32..=15) {
        let scheme = MultiBitScheme::for_bits(bits).unwrap();
        let m = scheme.max_level();
        let w = raw.clamp(-m, m);
        let enc = encode_multibit(w, &scheme).unwrap();
        prop_assert_eq!(decode_multibit(&enc, &scheme).unwrap(), w);
        for &c in &enc.cell_weights {
            prop_assert!(c == 0 || (c as i32).signum() == w.signum());
        }
    }

    /// The ternary quantizer depends only on weight shape, not scale.
    #[test]
    fn ternarize_is_scale_invariant(
        w in prop::collection::vec(-100.0f64..100.0, 1..32),
        alpha in 0.01f64..100.0,
    ) {
        let scaled: Vec<f64> = w.iter().map(|v| v * alpha).collect();
        prop_assert_eq!(ternarize(&w).unwrap(), ternarize(&scaled).unwrap());
    }

    /// Conversion is monotone in the MAC value and pins to the code range
    /// ends outside the span.
    #[test]
    fn conversion_is_monotone_and_saturates(
        kind in any_kind(),
        bits in 2u32..=5,
        a in -80.0f64..80.0,
        b in -80.0f64..80.0,
    ) {
        let (_, _, table) = table_for(kind, bits);
        let conv = Converter::ideal(&table);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(conv.convert_units(lo).code <= conv.convert_units(hi).code);
        let span = table.ideal_levels.last().unwrap() - table.ideal_levels[0];
        let below = conv.convert_units(table.ideal_levels[0] - span - 1.0);
        prop_assert_eq!(below.code, 0);
        prop_assert!(below.saturated);
        let above = conv.convert_units(table.ideal_levels.last().unwrap() + span + 1.0);
        prop_assert_eq!(above.code, table.max_code());
        prop_assert!(above.saturated);
    }

    /// Whenever the correction range can absorb a sampled chip's offset,
    /// zero-cross calibration lands a zero MAC exactly on the mid code.
    #[test]
    fn calibration_centers_the_zero_code(
        kind in prop_oneof![Just(ActivationKind::Sigmoid), Just(ActivationKind::Tanh)],
        bits in 4u32..=5,
        seed in 0u64..1000,
        col in 0u64..16,
    ) {
        let (adc, cfg, table) = table_for(kind, bits);
        let column = sample_column(&table, cfg.sigma_iu, 2.25, seed, col).unwrap();
        let state = calibrate_column_saturating(&table, &column);
        let mut conv = Converter::with_column(&table, column);
        conv.calib = state;
        if conv.calib.correction_pulse_units().abs() < adc.calib_range() {
            prop_assert_eq!(conv.convert_units(0.0).code, table.midcode());
        }
    }

    /// Flipping all stored weights (or all input signs) negates the MAC
    /// voltage exactly; products of equal magnitude cancel.
    #[test]
    fn mac_voltage_is_odd(
        weights in prop::collection::vec(-1i8..=1, 1..8),
        signs in prop::collection::vec(-1i8..=1, 8),
        cycles in prop::collection::vec(0u32..4, 8),
    ) {
        let cfg = MacroConfig::default();
        let supplies = SupplyPair::unity(&cfg);
        let cells: Vec<CellState> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let rail = if i % 2 == 0 { Rail::Msb } else { Rail::Lsb };
                CellState::ideal(w, rail)
            })
            .collect();
        let n = cells.len();
        let inputs: Vec<InputPulse> = signs
            .iter()
            .zip(&cycles)
            .take(n)
            .map(|(&s, &c)| InputPulse::new(s, c).unwrap())
            .collect();
        let neg_cells: Vec<CellState> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let rail = if i % 2 == 0 { Rail::Msb } else { Rail::Lsb };
                CellState::ideal(-w, rail)
            })
            .collect();
        let neg_inputs: Vec<InputPulse> = inputs
            .iter()
            .map(|p| InputPulse::new(-p.sign, p.cycles).unwrap())
            .collect();

        let base = mac_voltage(&cells, &inputs, &cfg, &supplies, false).unwrap();
        let flip_w = mac_voltage(&neg_cells, &inputs, &cfg, &supplies, false).unwrap();
        let flip_x = mac_voltage(&cells, &neg_inputs, &cfg, &supplies, false).unwrap();
        prop_assert!((base.mac_units + flip_w.mac_units).abs() < 1e-9);
        prop_assert!((base.mac_units + flip_x.mac_units).abs() < 1e-9);
    }

    /// A supply pair built for a target rail ratio realizes it exactly in
    /// the subthreshold current model.
    #[test]
    fn supply_pair_realizes_its_ratio(ratio in 1.0f64..6.0) {
        let cfg = MacroConfig::default();
        let pair = SupplyPair::for_ratio(ratio, &cfg).unwrap();
        let realized = pair.rail_gain(Rail::Msb) / pair.rail_gain(Rail::Lsb);
        prop_assert!((realized - ratio).abs() < 1e-9 * ratio);
        let from_split = n_bwr_from_supplies(pair.delta_vdd(), &cfg).unwrap();
        prop_assert!((from_split - ratio).abs() < 1e-9 * ratio);
    }

    /// The ramp replicates the MAC cells, so a global unit-current shift
    /// (temperature, supply drift) scales both sides of the comparison and
    /// the code never moves.
    #[test]
    fn codes_are_invariant_under_global_current_scaling(
        kind in any_kind(),
        bits in 4u32..=5,
        units in -60i32..=60,
        scale in 0.7f64..1.3,
    ) {
        let (_, cfg, table) = table_for(kind, bits);
        let conv = Converter::ideal(&table);
        let mut scaled = cfg.clone();
        scaled.i_u = cfg.i_u * scale;
        let nominal = conv.convert(units as f64 * cfg.unit_step(), &cfg);
        let drifted = conv.convert(units as f64 * scaled.unit_step(), &scaled);
        prop_assert_eq!(nominal.code, drifted.code);
    }

    /// Chip sampling is a pure function of (seed, column): the same draw
    /// twice and independence across adjacent columns.
    #[test]
    fn mismatch_sampling_is_deterministic(seed in 0u64..5000) {
        let (_, cfg, table) = table_for(ActivationKind::Sigmoid, 5);
        let a = sample_column(&table, cfg.sigma_iu, 2.25, seed, 3).unwrap();
        let b = sample_column(&table, cfg.sigma_iu, 2.25, seed, 3).unwrap();
        prop_assert_eq!(&a.levels, &b.levels);
        prop_assert_eq!(a.sa_offset, b.sa_offset);
        let other = sample_column(&table, cfg.sigma_iu, 2.25, seed, 4).unwrap();
        prop_assert_ne!(&a.levels, &other.levels);

        let field_a = sample_mismatch(&cfg, seed).unwrap();
        let field_b = sample_mismatch(&cfg, seed).unwrap();
        prop_assert_eq!(field_a.factor(7, 9), field_b.factor(7, 9));
    }

    /// Operation counting loses nothing: the four categories always sum to
    /// the total, whatever the layer shape.
    #[test]
    fn op_breakdown_conserves_counts(
        input_dim in 1usize..64,
        hidden_dim in 1usize..64,
        classes in 2usize..16,
    ) {
        let model = LstmModel::random(input_dim, hidden_dim, 4, classes, 3, 1).unwrap();
        let b = op_breakdown(&model);
        let total = b.linear_on_macro
            + b.nonlinear_on_macro
            + b.nonlinear_off_macro
            + b.linear_off_macro;
        prop_assert_eq!(total, b.total());
        prop_assert!(b.nonlinear_on_fraction() > 0.0 && b.nonlinear_on_fraction() <= 1.0);
        prop_assert!(b.linear_on_fraction() > 0.0 && b.linear_on_fraction() <= 1.0);
    }

    /// Fixed-point state stays inside its hardware registers for any input
    /// stream: |c| <= 2047 (Q6 12-bit) and |h| <= 64 (Q6 7-bit).
    #[test]
    fn lstm_state_stays_in_its_registers(
        seed in 0u64..500,
        steps in 1usize..12,
    ) {
        let model = LstmModel::random(6, 5, steps, 3, 3, seed).unwrap();
        let cfg = MacroConfig::default();
        let adc = AdcConfig::new(
            5,
            RampMode::Pwm,
            ActivationSpec::preset(ActivationKind::Sigmoid),
        );
        let golden = IntegerLstm::new(&model, &cfg, &adc).unwrap();
        let mut rng_state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            // xorshift keeps the feature stream dependency-free here
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state % 31) as i32 - 15
        };
        let mut state = LstmState::zero(5);
        for _ in 0..steps {
            let x: Vec<i32> = (0..6).map(|_| next()).collect();
            golden.step(&x, &mut state).unwrap();
            for (&c, (&h, &hi)) in state
                .c_q6
                .iter()
                .zip(state.h_q6.iter().zip(&state.h_int))
            {
                prop_assert!(c.abs() <= 2047, "cell state {c}");
                prop_assert!(h.abs() <= 64, "hidden state {h}");
                prop_assert!(hi.abs() <= 15, "replayed input {hi}");
            }
        }
    }

    /// The physical single-slope conversion agrees with direct functional
    /// quantization to within one code everywhere in the span.
    #[test]
    fn conversion_tracks_the_functional_oracle(
        kind in any_kind(),
        bits in 2u32..=5,
        mac in -70.0f64..70.0,
    ) {
        let (_, _, table) = table_for(kind, bits);
        let conv = Converter::ideal(&table);
        let code = conv.convert_units(mac).code;
        let oracle = functional_oracle_code(&table, mac);
        let diff = code.abs_diff(oracle);
        prop_assert!(diff <= 1, "code {code} vs oracle {oracle} at {mac}");
    }
}
