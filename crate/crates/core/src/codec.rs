//! Weight quantization and encoding: real matrices to ternary levels, and
//! multi-bit signed integers onto small groups of ternary cells whose
//! rail currents and pulse widths realize power-of-two magnitudes.

use crate::analog::Rail;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Quantize to {−1, 0, +1}: entries beyond 0.7·mean(|W|) keep their sign,
/// the rest drop to zero. The threshold scales with the matrix, so
/// ternarize(c·W) = ternarize(W) for any c > 0.
pub fn ternarize(weights: &[f64]) -> Result<Vec<i8>> {
    if weights.is_empty() {
        return Err(Error::Dimension("cannot ternarize an empty matrix".into()));
    }
    let m = weights.iter().map(|w| w.abs()).sum::<f64>() / weights.len() as f64;
    let threshold = 0.7 * m;
    Ok(weights
        .iter()
        .map(|&w| {
            if w > threshold {
                1
            } else if w < -threshold {
                -1
            } else {
                0
            }
        })
        .collect())
}

/// How a signed n_w-bit weight spreads over ternary cells. Each cell's
/// effective magnitude is its rail current ratio times its pulse
/// multiplier; together they cover {1, 2, …, 2^(n_w−2)} exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiBitScheme {
    pub n_w: u32,
    pub cells_per_weight: usize,
    /// Input-pulse width multiplier per cell, in scheme order.
    pub pulse_multipliers: Vec<u32>,
    pub rail_assignment: Vec<Rail>,
    /// MSB-rail current relative to the LSB rail.
    pub n_bwr: f64,
    /// Widest pulse multiplier: extra clocks a unit input costs.
    pub latency_clocks: u32,
}

impl MultiBitScheme {
    /// The fixed cell maps for 2..=5 weight bits.
    pub fn for_bits(n_w: u32) -> Result<Self> {
        use Rail::{Lsb, Msb};
        let (pulse, rails, n_bwr) = match n_w {
            2 => (vec![1], vec![Lsb], 1.0),
            3 => (vec![1, 1], vec![Msb, Lsb], 2.0),
            4 => (vec![2, 1, 1], vec![Msb, Msb, Lsb], 2.0),
            5 => (vec![2, 1, 2, 1], vec![Msb, Msb, Lsb, Lsb], 4.0),
            other => return Err(Error::WeightBits(other)),
        };
        let latency_clocks = *pulse.iter().max().expect("non-empty");
        Ok(MultiBitScheme {
            n_w,
            cells_per_weight: pulse.len(),
            pulse_multipliers: pulse,
            rail_assignment: rails,
            n_bwr,
            latency_clocks,
        })
    }

    /// Effective magnitude per cell (rail ratio × pulse multiplier),
    /// descending.
    pub fn magnitudes(&self) -> Vec<u32> {
        self.pulse_multipliers
            .iter()
            .zip(&self.rail_assignment)
            .map(|(&p, &rail)| {
                let gain = match rail {
                    Rail::Msb => self.n_bwr as u32,
                    Rail::Lsb => 1,
                };
                p * gain
            })
            .collect()
    }

    /// Largest representable |w|: 2^(n_w−1) − 1.
    pub fn max_level(&self) -> i32 {
        (1 << (self.n_w - 1)) - 1
    }
}

/// A signed weight spread over the cells of one scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedWeight {
    /// Ternary value per cell, scheme order (descending magnitude).
    pub cell_weights: Vec<i8>,
    pub n_w: u32,
}

/// Sign-magnitude encoding: every nonzero cell carries the weight's sign
/// and the binary digit of |w| at that cell's magnitude.
pub fn encode_multibit(w: i32, scheme: &MultiBitScheme) -> Result<EncodedWeight> {
    if w.abs() > scheme.max_level() {
        return Err(Error::WeightRange {
            level: w,
            bits: scheme.n_w,
        });
    }
    let sign = w.signum() as i8;
    let mag = w.unsigned_abs();
    let cell_weights = scheme
        .magnitudes()
        .iter()
        .map(|&m| sign * ((mag >> m.trailing_zeros()) & 1) as i8)
        .collect();
    Ok(EncodedWeight {
        cell_weights,
        n_w: scheme.n_w,
    })
}

/// Inverse of [`encode_multibit`]: Σ cell·magnitude. Nonzero cells with
/// opposing signs cannot come from any weight and are rejected.
pub fn decode_multibit(e: &EncodedWeight, scheme: &MultiBitScheme) -> Result<i32> {
    if e.n_w != scheme.n_w || e.cell_weights.len() != scheme.cells_per_weight {
        return Err(Error::Dimension(format!(
            "encoded weight has {} cells for {} bits, scheme wants {} for {}",
            e.cell_weights.len(),
            e.n_w,
            scheme.cells_per_weight,
            scheme.n_w
        )));
    }
    let mut pos = false;
    let mut neg = false;
    for &c in &e.cell_weights {
        if !(-1..=1).contains(&c) {
            return Err(Error::InvalidEncoding(format!("non-ternary cell {c}")));
        }
        pos |= c > 0;
        neg |= c < 0;
    }
    if pos && neg {
        return Err(Error::InvalidEncoding(
            "mixed-sign cells in a sign-magnitude group".into(),
        ));
    }
    Ok(e.cell_weights
        .iter()
        .zip(scheme.magnitudes())
        .map(|(&c, m)| c as i32 * m as i32)
        .sum())
}

/// Alternative single-mechanism realizations a scheme is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMethod {
    /// Rail-split plus pulse-width scheme.
    Proposed,
    /// One cell, pulse width carries all magnitude.
    PwmOnly,
    /// One cell per unit of magnitude, single clock.
    MulticellOnly,
}

/// (cells per weight, input latency in clocks) for each realization.
pub fn scheme_costs(n_w: u32, method: CostMethod) -> Result<(u32, u32)> {
    if !(2..=5).contains(&n_w) {
        return Err(Error::WeightBits(n_w));
    }
    let full = (1u32 << (n_w - 1)) - 1;
    Ok(match method {
        CostMethod::Proposed => {
            let s = MultiBitScheme::for_bits(n_w)?;
            (s.cells_per_weight as u32, s.latency_clocks)
        }
        CostMethod::PwmOnly => (1, full),
        CostMethod::MulticellOnly => (full, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::{
        mac_voltage, CellState, InputPulse, MacroConfig, SupplyPair,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn ternarize_matches_the_threshold_rule() {
        let t = ternarize(&[1.0, -1.0, 0.1, -0.1]).unwrap();
        assert_eq!(t, vec![1, -1, 0, 0]); // m = 0.55, threshold 0.385
        assert_eq!(ternarize(&[0.0, 0.0]).unwrap(), vec![0, 0]);
        assert_eq!(ternarize(&[3.0, -3.0]).unwrap(), vec![1, -1]);
        assert!(ternarize(&[]).is_err());
    }

    #[test]
    fn ternarize_is_scale_invariant() {
        let w = [0.9, -0.2, 0.4, -1.3, 0.05, 0.7];
        let base = ternarize(&w).unwrap();
        for c in [0.5, 2.0, 1e6, 1e-6] {
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            assert_eq!(ternarize(&scaled).unwrap(), base, "c = {c}");
        }
    }

    #[test]
    fn schemes_cover_binary_magnitudes_exactly_once() {
        for n_w in 2..=5 {
            let s = MultiBitScheme::for_bits(n_w).unwrap();
            let mut mags = s.magnitudes();
            mags.sort_unstable();
            let expected: Vec<u32> = (0..n_w - 1).map(|b| 1 << b).collect();
            assert_eq!(mags, expected, "n_w = {n_w}");
            assert_eq!(s.cells_per_weight, s.pulse_multipliers.len());
            assert_eq!(s.cells_per_weight, s.rail_assignment.len());
        }
        let s3 = MultiBitScheme::for_bits(3).unwrap();
        assert_eq!((s3.cells_per_weight, s3.latency_clocks), (2, 1));
        assert_eq!(s3.n_bwr, 2.0);
        let s5 = MultiBitScheme::for_bits(5).unwrap();
        assert_eq!((s5.cells_per_weight, s5.latency_clocks), (4, 2));
        assert_eq!(s5.n_bwr, 4.0);
        assert!(MultiBitScheme::for_bits(1).is_err());
        assert!(MultiBitScheme::for_bits(6).is_err());
    }

    #[test]
    fn five_bit_encoding_matches_the_published_rows() {
        let s = MultiBitScheme::for_bits(5).unwrap();
        assert_eq!(s.magnitudes(), vec![8, 4, 2, 1]);
        let rows = [
            (-15, vec![-1, -1, -1, -1]),
            (-14, vec![-1, -1, -1, 0]),
            (0, vec![0, 0, 0, 0]),
            (5, vec![0, 1, 0, 1]),
            (15, vec![1, 1, 1, 1]),
        ];
        for (w, cells) in rows {
            assert_eq!(encode_multibit(w, &s).unwrap().cell_weights, cells, "w = {w}");
        }
    }

    #[test]
    fn round_trip_is_identity_for_every_scheme() {
        for n_w in 2..=5 {
            let s = MultiBitScheme::for_bits(n_w).unwrap();
            for w in -s.max_level()..=s.max_level() {
                let e = encode_multibit(w, &s).unwrap();
                assert_eq!(decode_multibit(&e, &s).unwrap(), w);
            }
            assert!(encode_multibit(s.max_level() + 1, &s).is_err());
            assert!(encode_multibit(-s.max_level() - 1, &s).is_err());
        }
    }

    #[test]
    fn mixed_sign_groups_are_rejected() {
        let s = MultiBitScheme::for_bits(5).unwrap();
        let bad = EncodedWeight {
            cell_weights: vec![1, -1, 0, 0],
            n_w: 5,
        };
        assert!(matches!(
            decode_multibit(&bad, &s),
            Err(Error::InvalidEncoding(_))
        ));
        let nonternary = EncodedWeight {
            cell_weights: vec![2, 0, 0, 0],
            n_w: 5,
        };
        assert!(decode_multibit(&nonternary, &s).is_err());
    }

    #[test]
    fn cost_table_matches_the_scheme_comparison() {
        assert_eq!(scheme_costs(5, CostMethod::Proposed).unwrap(), (4, 2));
        assert_eq!(scheme_costs(5, CostMethod::MulticellOnly).unwrap(), (15, 1));
        assert_eq!(scheme_costs(5, CostMethod::PwmOnly).unwrap(), (1, 15));
        assert_eq!(scheme_costs(3, CostMethod::Proposed).unwrap(), (2, 1));
        assert_eq!(scheme_costs(2, CostMethod::Proposed).unwrap(), (1, 1));
        assert!(scheme_costs(6, CostMethod::Proposed).is_err());
    }

    #[test]
    fn encoded_mac_equals_integer_mac_exactly() {
        // weights through cells and rails vs plain integer dot product
        let cfg = MacroConfig::default();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for n_w in 2..=5 {
            let scheme = MultiBitScheme::for_bits(n_w).unwrap();
            let supplies = SupplyPair::for_ratio(scheme.n_bwr, &cfg).unwrap();
            for _ in 0..250 {
                let len = rng.gen_range(1..=8);
                let mut cells = Vec::new();
                let mut inputs = Vec::new();
                let mut expected = 0i64;
                for _ in 0..len {
                    let w = rng.gen_range(-scheme.max_level()..=scheme.max_level());
                    let x = rng.gen_range(-7i32..=7);
                    expected += (w as i64) * (x as i64);
                    let encoded = encode_multibit(w, &scheme).unwrap();
                    for (j, &cw) in encoded.cell_weights.iter().enumerate() {
                        cells.push(CellState::ideal(cw, scheme.rail_assignment[j]));
                        inputs.push(
                            InputPulse::new(
                                x.signum() as i8,
                                x.unsigned_abs() * scheme.pulse_multipliers[j],
                            )
                            .unwrap(),
                        );
                    }
                }
                let trace = mac_voltage(&cells, &inputs, &cfg, &supplies, false).unwrap();
                assert_eq!(trace.mac_units, expected as f64, "n_w = {n_w}");
            }
        }
    }
}
