//! Score machinery and estimators for the truncated-Exponential model.
//!
//! Observed durations enter only through the sufficient statistics
//! `(m, Σx, Σx²)`. For a unit with indicator `i` of being observed, the score
//! contribution is `ψ_θ = i·(x − c(θ))` with `c(θ) = 1/θ − α̇_θ/α_θ`, and the
//! aggregated score `Σx − m·c(θ)` is non-decreasing in `θ`. The MLE is its
//! zero inside `[ε, 1/ε]`, or the boundary point when no zero exists.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{ModelConfig, Theta};
use crate::sampling::TruncatedSample;

/// Relative tolerance on the bracket width of the root search.
const ROOT_REL_TOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 400;

/// Relative slack allowed in the Cauchy–Schwarz check `m·Σx² ≥ (Σx)²`, to
/// absorb rounding of sums over identical durations.
const CS_SLACK: f64 = 1e-12;

/// `(m, Σx, Σx²)` of an observed (truncated) sample.
///
/// `sum_x2` is optional: the point estimate needs only `(m, Σx)`; the
/// standard error also needs `Σx²`. Consistency of `Σx²` with `(m, Σx)` is
/// checked when the standard error is computed, so that a point estimate is
/// still available from inconsistent published statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    m: u64,
    sum_x: f64,
    sum_x2: Option<f64>,
}

impl SufficientStats {
    pub fn new(m: u64, sum_x: f64, sum_x2: Option<f64>) -> Result<Self> {
        if !(sum_x.is_finite() && sum_x >= 0.0) {
            return Err(domain(format!(
                "sum of durations must be finite and non-negative, got {sum_x}"
            )));
        }
        if let Some(q) = sum_x2 {
            if !(q.is_finite() && q >= 0.0) {
                return Err(domain(format!(
                    "sum of squared durations must be finite and non-negative, got {q}"
                )));
            }
        }
        if m == 0 && (sum_x != 0.0 || sum_x2.is_some_and(|q| q != 0.0)) {
            return Err(Error::Inconsistent(
                "m = 0 but the sums are non-zero".into(),
            ));
        }
        Ok(Self { m, sum_x, sum_x2 })
    }

    /// Reduces a list of observed durations, summing in the given order.
    pub fn from_durations(durations: &[f64]) -> Result<Self> {
        if let Some(bad) = durations.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(domain(format!(
                "durations must be finite and non-negative, got {bad}"
            )));
        }
        let sum_x = durations.iter().sum();
        let sum_x2 = durations.iter().map(|x| x * x).sum();
        Self::new(durations.len() as u64, sum_x, Some(sum_x2))
    }

    pub fn from_sample(sample: &TruncatedSample) -> Self {
        let (mut sum_x, mut sum_x2) = (0.0, 0.0);
        for &(x, _) in sample.pairs() {
            sum_x += x;
            sum_x2 += x * x;
        }
        Self {
            m: sample.m() as u64,
            sum_x,
            sum_x2: Some(sum_x2),
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn sum_x(&self) -> f64 {
        self.sum_x
    }

    pub fn sum_x2(&self) -> Option<f64> {
        self.sum_x2
    }

    /// Centered sum of squares `Σx² − (Σx)²/m`, or an error naming the
    /// Cauchy–Schwarz violation `m·Σx² < (Σx)²`.
    pub fn centered_sum_squares(&self) -> Result<f64> {
        let q = self
            .sum_x2
            .ok_or_else(|| Error::NotApplicable("sum of squared durations not supplied".into()))?;
        if self.m == 0 {
            return Err(Error::NoData);
        }
        let m = self.m as f64;
        let lhs = m * q;
        let rhs = self.sum_x * self.sum_x;
        if lhs < rhs * (1.0 - CS_SLACK) {
            return Err(Error::Inconsistent(format!(
                "Cauchy-Schwarz violated: m*sum_x2 = {lhs:e} < sum_x^2 = {rhs:e} \
                 (mean of squares below squared mean)"
            )));
        }
        Ok((q - rhs / m).max(0.0))
    }
}

/// Which end of the parameter space, if any, the MLE was pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    None,
    Lower,
    Upper,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::None => "none",
            Boundary::Lower => "lower",
            Boundary::Upper => "upper",
        })
    }
}

/// Score contribution of one latent unit: `x − c(θ)` if observed, else 0.
pub fn psi(cfg: &ModelConfig, theta: f64, x: f64, observed: bool) -> Result<f64> {
    let c = cfg.offset_c(theta)?;
    Ok(if observed { x - c } else { 0.0 })
}

/// Slope of an observed unit's score contribution in `θ`; always positive.
pub fn psi_d1(cfg: &ModelConfig, theta: f64) -> Result<f64> {
    cfg.score_slope(theta)
}

/// Aggregated score `n·Ψ_n(θ) = Σx − m·c(θ)`.
pub fn score(cfg: &ModelConfig, stats: &SufficientStats, theta: f64) -> Result<f64> {
    let c = cfg.offset_c(theta)?;
    Ok(stats.sum_x - stats.m as f64 * c)
}

/// Left limit of the score as `θ ↘ 0`, sign-flipped: `m·(s+G)/2 − Σx`.
///
/// A positive value means the score starts negative on the left of the
/// parameter space, so no lower-boundary maximum occurs.
pub fn boundary_diagnostic(cfg: &ModelConfig, stats: &SufficientStats) -> f64 {
    stats.m as f64 * 0.5 * (cfg.s() + cfg.g()) - stats.sum_x
}

/// Point estimate of the rate with its boundary flag and latent-size estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub theta_hat: Theta,
    pub boundary: Boundary,
    /// `m/α_θ̂`, the maximiser of the likelihood in `n` at `θ̂`.
    pub n_hat: f64,
}

/// Maximum-likelihood estimate of `θ` by bracketed bisection of the score.
///
/// Bisection runs on the geometric midpoint, since `[ε, 1/ε]` spans many
/// orders of magnitude; the score's monotonicity makes the root unique.
pub fn fit_mle(cfg: &ModelConfig, stats: &SufficientStats) -> Result<MleFit> {
    if stats.m == 0 {
        return Err(Error::NoData);
    }
    let (mut lo, mut hi) = cfg.theta_bounds();
    let finish = |theta: f64, boundary| -> Result<MleFit> {
        let alpha = cfg.selection_prob(theta)?;
        Ok(MleFit {
            theta_hat: cfg.theta(theta)?,
            boundary,
            n_hat: stats.m as f64 / alpha,
        })
    };

    let at_lo = score(cfg, stats, lo)?;
    if at_lo > 0.0 {
        return finish(lo, Boundary::Lower);
    }
    let at_hi = score(cfg, stats, hi)?;
    if at_hi < 0.0 {
        return finish(hi, Boundary::Upper);
    }
    if at_lo == 0.0 {
        return finish(lo, Boundary::None);
    }
    if at_hi == 0.0 {
        return finish(hi, Boundary::None);
    }

    for _ in 0..ROOT_MAX_ITER {
        let mid = (lo * hi).sqrt();
        if hi - lo <= ROOT_REL_TOL * mid || mid <= lo || mid >= hi {
            return finish(mid.clamp(lo, hi), Boundary::None);
        }
        let v = score(cfg, stats, mid)?;
        if v == 0.0 {
            return finish(mid, Boundary::None);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "bisection did not reach relative width {ROOT_REL_TOL:e} in {ROOT_MAX_ITER} steps"
    )))
}

/// Standard error `√(Σψ²)/Σψ̇` of an interior estimate.
///
/// `Σψ² = Σx² − 2c·Σx + m·c²` is evaluated as the centered sum of squares
/// plus `m·(x̄ − c)²`. Only observed units contribute to either sum, so the
/// unknown latent size cancels.
pub fn estimate_se(cfg: &ModelConfig, stats: &SufficientStats, theta_hat: f64) -> Result<f64> {
    if stats.m == 0 {
        return Err(Error::NoData);
    }
    let centered = stats.centered_sum_squares()?;
    let m = stats.m as f64;
    let c = cfg.offset_c(theta_hat)?;
    let mean_gap = stats.sum_x / m - c;
    let sum_psi2 = centered + m * mean_gap * mean_gap;
    let sum_psi_dot = m * psi_d1(cfg, theta_hat)?;
    if sum_psi_dot.is_nan() || sum_psi_dot <= 0.0 {
        return Err(Error::Numerical(format!(
            "non-positive score slope {sum_psi_dot:e}"
        )));
    }
    Ok(sum_psi2.sqrt() / sum_psi_dot)
}

/// Estimate and standard error under the naive simple-random-sample design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrsFit {
    pub theta: f64,
    pub se: f64,
}

/// `(m/Σx, √m/Σx)`.
pub fn fit_srs(stats: &SufficientStats) -> Result<SrsFit> {
    if stats.m == 0 {
        return Err(Error::NoData);
    }
    if stats.sum_x <= 0.0 {
        return Err(Error::Degenerate("sum of durations is zero".into()));
    }
    let m = stats.m as f64;
    Ok(SrsFit {
        theta: m / stats.sum_x,
        se: m.sqrt() / stats.sum_x,
    })
}

/// Everything reported for one data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub theta_hat: f64,
    /// Absent for boundary estimates or when `Σx²` is not supplied.
    pub se_hat: Option<f64>,
    pub boundary: Boundary,
    pub n_hat: f64,
    pub theta_srs: f64,
    pub se_srs: f64,
    pub vif_hat: Option<f64>,
    pub boundary_diagnostic: f64,
}

/// Design effect `(se_hat/se_srs)²`.
pub fn vif_hat(report: &EstimateReport) -> Result<f64> {
    if report.boundary != Boundary::None {
        return Err(Error::NotApplicable(format!(
            "estimate is on the {} boundary",
            report.boundary
        )));
    }
    let se = report.se_hat.ok_or_else(|| {
        Error::NotApplicable("no standard error for the truncation design".into())
    })?;
    let ratio = se / report.se_srs;
    Ok(ratio * ratio)
}

/// Fits both designs and assembles an [`EstimateReport`].
///
/// Fails on an inconsistent `Σx²` rather than reporting a meaningless SE.
pub fn estimate(cfg: &ModelConfig, stats: &SufficientStats) -> Result<EstimateReport> {
    let fit = fit_mle(cfg, stats)?;
    let srs = fit_srs(stats)?;
    let theta_hat = fit.theta_hat.value();
    let se_hat = match (fit.boundary, stats.sum_x2) {
        (Boundary::None, Some(_)) => Some(estimate_se(cfg, stats, theta_hat)?),
        _ => None,
    };
    let mut report = EstimateReport {
        theta_hat,
        se_hat,
        boundary: fit.boundary,
        n_hat: fit.n_hat,
        theta_srs: srs.theta,
        se_srs: srs.se,
        vif_hat: None,
        boundary_diagnostic: boundary_diagnostic(cfg, stats),
    };
    report.vif_hat = vif_hat(&report).ok();
    Ok(report)
}
