//! Monotone activation curves, their inverses, and the presets the ramp
//! builder samples.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Standard selu scale parameter.
pub const SELU_LAMBDA: f64 = 1.0507009873554805;
/// Standard selu alpha parameter.
pub const SELU_ALPHA: f64 = 1.6732632423543772;

/// Absolute x tolerance of the bisection inverse.
const BISECT_TOL: f64 = 1e-13;

/// A strictly increasing scalar map with a computable inverse. The ramp
/// builder only needs these four facts about a curve.
pub trait ActivationCurve {
    /// f(x).
    fn forward(&self, x: f64) -> f64;
    /// f⁻¹(t) for t strictly inside the sampled output range.
    fn inverse(&self, t: f64) -> Result<f64>;
    /// (f_min, f_max), the sampled span of f. Endpoints are excluded from
    /// the sampling grid, so they may sit on an asymptote.
    fn output_range(&self) -> (f64, f64);
    /// Extra subdivision of the quantization unit: the step unit becomes
    /// min ΔV_k / divisor. 1 is the coarsest (one cell-cycle per minimum
    /// step); curves with a slope discontinuity need 2 to stay sub-LSB.
    fn quant_divisor(&self) -> u32 {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Elu,
    Selu,
    Softsign,
    Softplus,
    Linear,
}

impl ActivationKind {
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Elu => "elu",
            ActivationKind::Selu => "selu",
            ActivationKind::Softsign => "softsign",
            ActivationKind::Softplus => "softplus",
            ActivationKind::Linear => "linear",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "elu" => Ok(ActivationKind::Elu),
            "selu" => Ok(ActivationKind::Selu),
            "softsign" => Ok(ActivationKind::Softsign),
            "softplus" => Ok(ActivationKind::Softplus),
            "linear" => Ok(ActivationKind::Linear),
            other => Err(Error::Activation(format!("unknown activation '{other}'"))),
        }
    }

    /// All curve kinds with a nonlinear preset (everything except linear).
    pub fn nonlinear() -> [ActivationKind; 6] {
        [
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Elu,
            ActivationKind::Selu,
            ActivationKind::Softsign,
            ActivationKind::Softplus,
        ]
    }
}

/// Curve parameters. Only the fields a kind reads are meaningful:
/// elu reads `alpha`; selu reads `alpha` and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for ActivationParams {
    fn default() -> Self {
        ActivationParams {
            alpha: 1.0,
            lambda: 1.0,
        }
    }
}

/// A named activation plus the sampled output range and quantization
/// divisor. Construct through [`ActivationSpec::preset`] unless a study
/// needs a non-default range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub params: ActivationParams,
    /// (f_min, f_max) in output units; the sampling grid lives strictly
    /// inside this interval.
    pub output_range: (f64, f64),
    pub quant_divisor: u32,
}

impl ActivationSpec {
    /// Documented default range and step divisor per curve.
    ///
    /// Bounded curves use their natural image; unbounded curves use a fixed
    /// clip. selu and softplus carry divisor 2: their inverse-slope jump at
    /// the origin (respectively their long flat tail) otherwise accumulates
    /// more than one output LSB of step-rounding error at 5 bits.
    pub fn preset(kind: ActivationKind) -> Self {
        let (range, params, divisor) = match kind {
            ActivationKind::Sigmoid => ((0.0, 1.0), ActivationParams::default(), 1),
            ActivationKind::Tanh => ((-1.0, 1.0), ActivationParams::default(), 1),
            ActivationKind::Elu => ((-1.0, 4.0), ActivationParams::default(), 1),
            ActivationKind::Selu => (
                (-1.0, 4.0),
                ActivationParams {
                    alpha: SELU_ALPHA,
                    lambda: SELU_LAMBDA,
                },
                2,
            ),
            ActivationKind::Softsign => ((-1.0, 1.0), ActivationParams::default(), 1),
            ActivationKind::Softplus => ((0.02, 4.0), ActivationParams::default(), 2),
            ActivationKind::Linear => ((0.0, 1.0), ActivationParams::default(), 1),
        };
        ActivationSpec {
            kind,
            params,
            output_range: range,
            quant_divisor: divisor,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.output_range = (lo, hi);
        self
    }

    pub fn with_divisor(mut self, divisor: u32) -> Self {
        self.quant_divisor = divisor;
        self
    }

    /// Open interval of attainable outputs; the configured range must sit
    /// inside its closure.
    fn image(&self) -> (f64, f64) {
        let a = self.params.alpha;
        let l = self.params.lambda;
        match self.kind {
            ActivationKind::Sigmoid => (0.0, 1.0),
            ActivationKind::Tanh | ActivationKind::Softsign => (-1.0, 1.0),
            ActivationKind::Elu => (-a, f64::INFINITY),
            ActivationKind::Selu => (-l * a, f64::INFINITY),
            ActivationKind::Softplus => (0.0, f64::INFINITY),
            ActivationKind::Linear => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.output_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::ClipRange {
                lo,
                hi,
                reason: "range must be finite with lo < hi".into(),
            });
        }
        if self.quant_divisor == 0 {
            return Err(Error::Activation("quant_divisor must be >= 1".into()));
        }
        if self.params.alpha <= 0.0 || self.params.lambda <= 0.0 {
            return Err(Error::Activation(
                "alpha and lambda must be positive".into(),
            ));
        }
        let (ilo, ihi) = self.image();
        if lo < ilo || hi > ihi {
            return Err(Error::ClipRange {
                lo,
                hi,
                reason: format!(
                    "outside the attainable outputs of {} ([{ilo}, {ihi}])",
                    self.kind.name()
                ),
            });
        }
        Ok(())
    }
}

impl ActivationCurve for ActivationSpec {
    fn forward(&self, x: f64) -> f64 {
        let a = self.params.alpha;
        let l = self.params.lambda;
        match self.kind {
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Elu => {
                if x > 0.0 {
                    x
                } else {
                    a * x.exp_m1()
                }
            }
            ActivationKind::Selu => {
                if x > 0.0 {
                    l * x
                } else {
                    l * a * x.exp_m1()
                }
            }
            ActivationKind::Softsign => x / (1.0 + x.abs()),
            ActivationKind::Softplus => x.exp().ln_1p(),
            ActivationKind::Linear => x,
        }
    }

    fn inverse(&self, t: f64) -> Result<f64> {
        let (ilo, ihi) = self.image();
        if self.kind != ActivationKind::Linear && !(t > ilo && t < ihi) {
            return Err(Error::Activation(format!(
                "{}: {t} is outside the open image ({ilo}, {ihi})",
                self.kind.name()
            )));
        }
        let a = self.params.alpha;
        let l = self.params.lambda;
        match self.kind {
            ActivationKind::Sigmoid => Ok((t / (1.0 - t)).ln()),
            ActivationKind::Tanh => Ok(t.atanh()),
            ActivationKind::Elu => Ok(if t >= 0.0 { t } else { (t / a).ln_1p() }),
            ActivationKind::Selu => Ok(if t >= 0.0 {
                t / l
            } else {
                (t / (l * a)).ln_1p()
            }),
            ActivationKind::Softsign => Ok(t / (1.0 - t.abs())),
            // No closed form is used here on purpose: the bisection path is
            // the one exercised for every curve without one.
            ActivationKind::Softplus => {
                let lo = t.ln() - 1.0; // softplus(ln t - 1) = ln(1 + t/e) < t
                let hi = t; // softplus(t) > t
                bisect_inverse(|x| self.forward(x), t, lo, hi)
            }
            ActivationKind::Linear => Ok(t),
        }
    }

    fn output_range(&self) -> (f64, f64) {
        self.output_range
    }

    fn quant_divisor(&self) -> u32 {
        self.quant_divisor
    }
}

/// A user-supplied strictly increasing curve, inverted by bisection.
/// `domain_hint` seeds the bracket and is widened automatically.
pub struct CustomActivation<F: Fn(f64) -> f64> {
    pub forward: F,
    pub output_range: (f64, f64),
    pub domain_hint: (f64, f64),
    pub quant_divisor: u32,
}

impl<F: Fn(f64) -> f64> ActivationCurve for CustomActivation<F> {
    fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    fn inverse(&self, t: f64) -> Result<f64> {
        let (mut lo, mut hi) = self.domain_hint;
        let mut width = (hi - lo).max(1.0);
        // Widen until the bracket straddles t; a monotone curve must admit one.
        for _ in 0..64 {
            if (self.forward)(lo) <= t && t <= (self.forward)(hi) {
                return bisect_inverse(&self.forward, t, lo, hi);
            }
            lo -= width;
            hi += width;
            width *= 2.0;
        }
        Err(Error::Activation(format!(
            "custom inverse failed to bracket t = {t}"
        )))
    }

    fn output_range(&self) -> (f64, f64) {
        self.output_range
    }

    fn quant_divisor(&self) -> u32 {
        self.quant_divisor
    }
}

/// Bisection solve of f(x) = t on [lo, hi] for increasing f.
/// Requires f(lo) <= t <= f(hi).
pub fn bisect_inverse(f: impl Fn(f64) -> f64, t: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    if !(f(lo) <= t && t <= f(hi)) {
        return Err(Error::Activation(format!(
            "bisection bracket [{lo}, {hi}] does not straddle t = {t}"
        )));
    }
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval below float resolution
        }
        if f(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
