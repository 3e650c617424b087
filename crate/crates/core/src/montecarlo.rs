//! Simulation study runner: generate, truncate, estimate, aggregate.
//!
//! Replications are grouped into fixed-size chunks that run in parallel.
//! Each chunk folds its records into compensated accumulators, and chunk
//! accumulators are merged in index order, so a report does not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimator::{self, Boundary, SufficientStats};
use crate::model::ModelConfig;
use crate::sampling::{draw_latent, truncate, SeedSpec};

const CHUNK: usize = 16;

/// One cell of the simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationScenario {
    pub theta0: f64,
    pub cfg: ModelConfig,
    /// Latent sample size per replication.
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
}

impl SimulationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(domain("at least one replication is required"));
        }
        if self.n == 0 {
            return Err(domain("latent sample size must be at least 1"));
        }
        let (lo, hi) = self.cfg.theta_bounds();
        if !(self.theta0 > lo && self.theta0 < hi) {
            return Err(domain(format!(
                "theta0 = {} must be interior to [{lo}, {hi}]",
                self.theta0
            )));
        }
        Ok(())
    }

    pub fn seed(&self, v: u64) -> SeedSpec {
        SeedSpec::new(self.master_seed, v)
    }
}

/// Outcome of one simulated data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: u64,
    pub m: usize,
    pub theta_hat: f64,
    pub se_hat: Option<f64>,
    pub vif_hat: Option<f64>,
    pub boundary: Boundary,
}

/// Runs replication `v`; fails with [`Error::NoData`] when nothing is observed.
pub fn run_replication(scenario: &SimulationScenario, v: u64) -> Result<ReplicationRecord> {
    let latent = draw_latent(&scenario.cfg, scenario.theta0, scenario.n, scenario.seed(v))?;
    let observed = truncate(&scenario.cfg, &latent);
    let stats = SufficientStats::from_sample(&observed);
    let report = estimator::estimate(&scenario.cfg, &stats)?;
    Ok(ReplicationRecord {
        index: v,
        m: observed.m(),
        theta_hat: report.theta_hat,
        se_hat: report.se_hat,
        vif_hat: report.vif_hat,
        boundary: report.boundary,
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    used: usize,
    empty: usize,
    boundary: usize,
    bias: CompensatedSum,
    sq_dev: CompensatedSum,
    sigma2: CompensatedSum,
    sigma2_count: usize,
    vif: CompensatedSum,
    vif_count: usize,
}

impl Accumulator {
    fn push(&mut self, record: &ReplicationRecord, theta0: f64, n: f64) {
        let dev = record.theta_hat - theta0;
        self.used += 1;
        self.bias.add(dev);
        self.sq_dev.add(dev * dev);
        if record.boundary != Boundary::None {
            self.boundary += 1;
        }
        if let Some(se) = record.se_hat {
            self.sigma2.add(n * se * se);
            self.sigma2_count += 1;
        }
        if let Some(v) = record.vif_hat {
            self.vif.add(v);
            self.vif_count += 1;
        }
    }

    fn merge(&mut self, other: &Self) {
        self.used += other.used;
        self.empty += other.empty;
        self.boundary += other.boundary;
        self.bias.merge(&other.bias);
        self.sq_dev.merge(&other.sq_dev);
        self.sigma2.merge(&other.sigma2);
        self.sigma2_count += other.sigma2_count;
        self.vif.merge(&other.vif);
        self.vif_count += other.vif_count;
    }
}

/// Aggregated results of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: SimulationScenario,
    /// Selection probability at the true rate.
    pub alpha: f64,
    /// Average of `θ̂ − θ₀`.
    pub mean_bias: f64,
    /// Monte Carlo standard error of `mean_bias`.
    pub bias_mc_se: f64,
    /// Average of `σ̂² = n·se_hat²` over replications with an interior estimate.
    pub mean_sigma2_hat: Option<f64>,
    /// `n·(1/R)·Σ(θ̂ − θ₀)²`.
    pub n_var_sim: f64,
    pub mean_vif: Option<f64>,
    pub boundary_count: usize,
    /// Replications with no observed unit; excluded from every average.
    pub empty_count: usize,
    pub replications_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<ReplicationRecord>>,
}

/// Runs every replication of `scenario` and aggregates the results.
pub fn run_scenario(scenario: &SimulationScenario) -> Result<SimulationReport> {
    run_scenario_with(scenario, false)
}

/// As [`run_scenario`], optionally keeping the per-replication records.
pub fn run_scenario_with(
    scenario: &SimulationScenario,
    keep_records: bool,
) -> Result<SimulationReport> {
    scenario.validate()?;
    let r = scenario.replications;
    let n = scenario.n as f64;
    let chunks: Result<Vec<(Accumulator, Vec<ReplicationRecord>)>> = (0..r.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Accumulator::default();
            let mut kept = Vec::new();
            for v in chunk * CHUNK..((chunk + 1) * CHUNK).min(r) {
                match run_replication(scenario, v as u64) {
                    Ok(record) => {
                        acc.push(&record, scenario.theta0, n);
                        if keep_records {
                            kept.push(record);
                        }
                    }
                    Err(Error::NoData) => acc.empty += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((acc, kept))
        })
        .collect();

    let mut total = Accumulator::default();
    let mut records = keep_records.then(Vec::new);
    for (acc, kept) in chunks? {
        total.merge(&acc);
        if let Some(all) = records.as_mut() {
            all.extend(kept);
        }
    }
    if total.used == 0 {
        return Err(Error::ScenarioFailed(r));
    }

    let k = total.used as f64;
    let mean_bias = total.bias.value() / k;
    let mean_sq = total.sq_dev.value() / k;
    let bias_mc_se = if total.used > 1 {
        ((mean_sq - mean_bias * mean_bias).max(0.0) * k / (k - 1.0) / k).sqrt()
    } else {
        f64::NAN
    };
    let mean_of =
        |sum: &CompensatedSum, count: usize| (count > 0).then(|| sum.value() / count as f64);
    Ok(SimulationReport {
        scenario: *scenario,
        alpha: scenario.cfg.selection_prob(scenario.theta0)?,
        mean_bias,
        bias_mc_se,
        mean_sigma2_hat: mean_of(&total.sigma2, total.sigma2_count),
        n_var_sim: n * mean_sq,
        mean_vif: mean_of(&total.vif, total.vif_count),
        boundary_count: total.boundary,
        empty_count: total.empty,
        replications_used: total.used,
        records,
    })
}

/// One [`SimulationReport`] per latent size in `n_list`, sharing every other setting.
pub fn convergence_sweep(
    theta0: f64,
    cfg: ModelConfig,
    n_list: &[usize],
    replications: usize,
    master_seed: u64,
) -> Result<Vec<SimulationReport>> {
    if n_list.is_empty() {
        return Err(domain("convergence sweep needs at least one latent size"));
    }
    n_list
        .iter()
        .map(|&n| {
            run_scenario(&SimulationScenario {
                theta0,
                cfg,
                n,
                replications,
                master_seed,
            })
        })
        .collect()
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn skewness_kurtosis(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= k;
    m3 /= k;
    m4 /= k;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}
