//! Closed-form quantities of the Exponential duration model truncated by a
//! Uniform birth window.
//!
//! A latent unit has duration `X ~ Exp(θ)` and age-at-study-begin
//! `T ~ Uni[0, G]`, independent. It is observed when its second event falls
//! into the observation window of length `s`, i.e. when `(X, T)` lies in
//!
//! ```text
//! D = {(x, t) : 0 < t ≤ x ≤ t + s, t ≤ G}.
//! ```
//!
//! All rates are per time unit; the caller fixes the unit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimator::SufficientStats;
use crate::numeric::{self, gap, gap_slope, one_minus_exp_neg};

/// Default lower bound of the parameter space `[ε, 1/ε]`.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Below this value of `θ·(G+s)` the offset is replaced by its limit `(s+G)/2`.
const OFFSET_LIMIT_SWITCH: f64 = 1e-6;

/// Below this value of `θ·(G+s)` the first-moment closed form loses too many
/// digits to cancellation and the moment is taken from the offset instead.
const MEAN_CLOSED_FORM_SWITCH: f64 = 0.05;

/// Truncation geometry and parameter-space bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    g: f64,
    s: f64,
    epsilon: f64,
}

/// A rate inside the parameter space of some [`ModelConfig`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Theta(f64);

impl Theta {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Theta> for f64 {
    fn from(t: Theta) -> f64 {
        t.0
    }
}

/// How [`ModelConfig::second_moment_truncated`] evaluates `E[X²]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondMomentMethod {
    /// Coefficients `A^q, B^q, C^q` with constant `1/(4θ³)`, taken as
    /// `α·E[X²]` and divided by `α`. Exact only for `G = 24`.
    PrintedForm,
    /// Exact closed form obtained by integrating `x²` against the marginal density.
    ClosedForm,
    /// Adaptive quadrature of `x²·f^X(x)`.
    Quadrature,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ModelConfig {
    pub fn new(g: f64, s: f64, epsilon: f64) -> Result<Self> {
        check_positive("G", g)?;
        check_positive("s", s)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self { g, s, epsilon })
    }

    /// Geometry with [`DEFAULT_EPSILON`].
    pub fn with_default_epsilon(g: f64, s: f64) -> Result<Self> {
        Self::new(g, s, DEFAULT_EPSILON)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(ε, 1/ε)`.
    pub fn theta_bounds(&self) -> (f64, f64) {
        (self.epsilon, 1.0 / self.epsilon)
    }

    pub fn contains(&self, theta: f64) -> bool {
        let (lo, hi) = self.theta_bounds();
        theta >= lo && theta <= hi
    }

    /// Wraps `value` as a [`Theta`] if it lies in `[ε, 1/ε]`.
    pub fn theta(&self, value: f64) -> Result<Theta> {
        if self.contains(value) {
            Ok(Theta(value))
        } else {
            let (lo, hi) = self.theta_bounds();
            Err(domain(format!(
                "theta = {value} outside the parameter space [{lo}, {hi}]"
            )))
        }
    }

    /// Membership of `(x, t)` in the observable region `D`.
    pub fn in_region(&self, x: f64, t: f64) -> bool {
        0.0 < t && t <= x && x <= t + self.s && t <= self.g
    }

    /// Selection probability `α_θ = (1 − e^{−θs})(1 − e^{−Gθ})/(Gθ)`.
    pub fn selection_prob(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        Ok(self.alpha(theta))
    }

    fn alpha(&self, theta: f64) -> f64 {
        one_minus_exp_neg(theta * self.s) * one_minus_exp_neg(theta * self.g) / (self.g * theta)
    }

    /// `s/(e^{θs} − 1) + G/(e^{θG} − 1)`, so that `c(θ) = 2/θ − k(θ)`.
    fn expm1_tail(&self, theta: f64) -> f64 {
        self.s / (theta * self.s).exp_m1() + self.g / (theta * self.g).exp_m1()
    }

    fn offset_unchecked(&self, theta: f64) -> f64 {
        if theta * (self.g + self.s) < OFFSET_LIMIT_SWITCH {
            0.5 * (self.s + self.g)
        } else {
            self.s * gap(theta * self.s) + self.g * gap(theta * self.g)
        }
    }

    fn slope_unchecked(&self, theta: f64) -> f64 {
        let (s, g) = (self.s, self.g);
        s * s * gap_slope(theta * s) + g * g * gap_slope(theta * g)
    }

    /// First derivative `α̇_θ`.
    ///
    /// Evaluated as `α·(1/θ − c(θ))`, the logarithmic derivative of `α`,
    /// which is algebraically the closed form but free of the `O(θ²)`
    /// cancellation in its numerator. Positive for small `θ` (where
    /// `α ≈ θs`) and negative beyond the maximum of `α`.
    pub fn selection_prob_d1(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        Ok(self.alpha(theta) * (1.0 / theta - self.offset_unchecked(theta)))
    }

    /// Second derivative `α̈_θ = α·(ψ̇(θ) − c(θ)·k(θ))`.
    pub fn selection_prob_d2(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        let c = self.s * gap(theta * self.s) + self.g * gap(theta * self.g);
        Ok(self.alpha(theta) * (self.slope_unchecked(theta) - c * self.expm1_tail(theta)))
    }

    /// Third derivative of `α`, by central difference of [`Self::selection_prob_d2`].
    ///
    /// Step `h = max(1e−5, 1e−5·θ)`, capped at `θ/2` so the stencil stays in `θ > 0`.
    pub fn selection_prob_d3(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        let h = (1e-5f64).max(1e-5 * theta).min(0.5 * theta);
        let up = self.selection_prob_d2(theta + h)?;
        let down = self.selection_prob_d2(theta - h)?;
        Ok((up - down) / (2.0 * h))
    }

    /// `c(θ) = 1/θ − α̇_θ/α_θ`, the point where a unit's score contribution vanishes.
    ///
    /// Equal to `s·gap(θs) + G·gap(θG)`; returns the limit `(s+G)/2` once
    /// `θ·(G+s) < 1e−6`.
    pub fn offset_c(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        Ok(self.offset_unchecked(theta))
    }

    /// Derivative of a unit's score contribution in `θ`:
    /// `2/θ² − s²e^{−θs}/(1−e^{−θs})² − G²e^{−Gθ}/(1−e^{−Gθ})²`.
    pub(crate) fn score_slope(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        Ok(self.slope_unchecked(theta))
    }

    /// Conditional density of an observed pair: `θe^{−θx}/(Gα_θ)` on `D`, zero elsewhere.
    pub fn joint_density(&self, theta: f64, x: f64, t: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        if !self.in_region(x, t) {
            return Ok(0.0);
        }
        Ok(theta * (-theta * x).exp() / (self.g * self.alpha(theta)))
    }

    /// Length of `{t ∈ [0, G] : x − s ≤ t ≤ x}`; the trapezoidal weight of the marginal.
    pub fn marginal_weight(&self, x: f64) -> f64 {
        (x.min(self.g) - (x - self.s).max(0.0)).max(0.0)
    }

    /// Marginal density of an observed duration on `[0, G+s]`.
    pub fn marginal_density(&self, theta: f64, x: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        if !(0.0..=self.g + self.s).contains(&x) {
            return Ok(0.0);
        }
        Ok(theta * (-theta * x).exp() / (self.g * self.alpha(theta)) * self.marginal_weight(x))
    }

    /// `α_θ·E_θ[X]` from the three-exponential closed form.
    fn scaled_mean_closed(&self, theta: f64) -> f64 {
        let (s, g) = (self.s, self.g);
        let gt = g * theta;
        let gt2 = gt * theta;
        let a = -s / gt - 2.0 / gt2;
        let b = -1.0 / theta - 2.0 / gt2;
        let c = (g + s) / gt + 2.0 / gt2;
        a * (-theta * s).exp() + b * (-theta * g).exp() + c * (-theta * (g + s)).exp() + 2.0 / gt2
    }

    /// Mean of an observed duration.
    ///
    /// Uses the three-exponential closed form for `α·E[X]`; for
    /// `θ·(G+s) < 0.05` that form cancels badly and the identity `E[X] = c(θ)`
    /// is used instead.
    pub fn mean_truncated(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        if theta * (self.g + self.s) < MEAN_CLOSED_FORM_SWITCH {
            return Ok(self.offset_unchecked(theta));
        }
        Ok(self.scaled_mean_closed(theta) / self.alpha(theta))
    }

    /// `α_θ·E_θ[X]` straight from the closed form (no switch).
    pub fn scaled_mean_truncated(&self, theta: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        Ok(self.scaled_mean_closed(theta))
    }

    /// Second moment of an observed duration.
    pub fn second_moment_truncated(&self, theta: f64, method: SecondMomentMethod) -> Result<f64> {
        check_positive("theta", theta)?;
        let (s, g) = (self.s, self.g);
        let alpha = self.alpha(theta);
        let t = theta;
        match method {
            SecondMomentMethod::PrintedForm => {
                let a = -s * s / (g * t) - s / (6.0 * t * t) - 1.0 / (4.0 * t.powi(3));
                let b = -g / t - 4.0 / (t * t) - 1.0 / (4.0 * t.powi(3));
                let c =
                    (g + s).powi(2) / (g * t) + (g + s) / (6.0 * t * t) + 1.0 / (4.0 * t.powi(3));
                let scaled = a * (-t * s).exp()
                    + b * (-t * g).exp()
                    + c * (-t * (g + s)).exp()
                    + 1.0 / (4.0 * t.powi(3));
                Ok(scaled / alpha)
            }
            SecondMomentMethod::ClosedForm => {
                let gt = g * t;
                let gt2 = gt * t;
                let gt3 = gt2 * t;
                let a = -s * s / gt - 4.0 * s / gt2 - 6.0 / gt3;
                let b = -g * g / gt - 4.0 * g / gt2 - 6.0 / gt3;
                let c = (g + s).powi(2) / gt + 4.0 * (g + s) / gt2 + 6.0 / gt3;
                let scaled =
                    a * (-t * s).exp() + b * (-t * g).exp() + c * (-t * (g + s)).exp() + 6.0 / gt3;
                Ok(scaled / alpha)
            }
            SecondMomentMethod::Quadrature => {
                let value = numeric::integrate_pieces(
                    |x| x * x * (-t * x).exp() * self.marginal_weight(x),
                    &self.marginal_breaks(),
                    0.0,
                    1e-13,
                );
                Ok(value * t / (g * alpha))
            }
        }
    }

    /// Kinks of the marginal weight: `0, min(s,G), max(s,G), G+s`.
    pub fn marginal_breaks(&self) -> [f64; 4] {
        [0.0, self.s.min(self.g), self.s.max(self.g), self.g + self.s]
    }

    /// Log-likelihood of the Poisson-approximated truncated process, up to
    /// additive constants free of `θ` and `n`:
    ///
    /// `m·ln θ − θ·Σx + m·ln n − n·α_θ`.
    pub fn log_likelihood(&self, stats: &SufficientStats, theta: f64, n: f64) -> Result<f64> {
        check_positive("theta", theta)?;
        check_positive("n", n)?;
        let m = stats.m() as f64;
        let alpha = self.alpha(theta);
        let log_terms = if stats.m() == 0 {
            0.0
        } else {
            m * (theta.ln() + n.ln())
        };
        Ok(log_terms - theta * stats.sum_x() - n * alpha)
    }
}

impl std::fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "G={}, s={}, epsilon={}", self.g, self.s, self.epsilon)
    }
}
