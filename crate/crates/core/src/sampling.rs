//! Random generation of latent and truncated samples.
//!
//! Each [`SeedSpec`] maps to its own ChaCha8 stream: the master seed keys
//! the generator and the replication index selects the stream, so
//! replications are independent and reproducible in any execution order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::ModelConfig;

/// Seed of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replication_index: u64) -> Self {
        Self {
            master_seed,
            replication_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replication_index);
        rng
    }
}

/// The `n` latent pairs `(x̃, t̃)` before truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pairs: Vec<(f64, f64)>,
}

impl LatentSample {
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }
}

/// The observed pairs `(x, t)`, all inside the observable region.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSample {
    pairs: Vec<(f64, f64)>,
    n_latent: Option<usize>,
}

impl TruncatedSample {
    /// Wraps observed pairs, rejecting any outside the observable region.
    pub fn new(cfg: &ModelConfig, pairs: Vec<(f64, f64)>, n_latent: Option<usize>) -> Result<Self> {
        if let Some(&(x, t)) = pairs.iter().find(|&&(x, t)| !cfg.in_region(x, t)) {
            return Err(domain(format!(
                "pair (x={x}, t={t}) is not observable under {cfg}"
            )));
        }
        Ok(Self { pairs, n_latent })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    /// Latent size, known only for simulated data.
    pub fn n_latent(&self) -> Option<usize> {
        self.n_latent
    }

    pub fn durations(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }
}

fn check_draw_args(theta0: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("latent sample size must be at least 1"));
    }
    if !(theta0.is_finite() && theta0 > 0.0) {
        return Err(domain(format!("theta0 must be positive, got {theta0}")));
    }
    Ok(())
}

/// `n` independent pairs with `x̃ ~ Exp(θ₀)` and `t̃ ~ Uni[0, G]`.
pub fn draw_latent(
    cfg: &ModelConfig,
    theta0: f64,
    n: usize,
    seed: SeedSpec,
) -> Result<LatentSample> {
    check_draw_args(theta0, n)?;
    let exp = Exp::new(theta0).map_err(|e| domain(e.to_string()))?;
    let mut rng = seed.rng();
    let g = cfg.g();
    let pairs = (0..n)
        .map(|_| {
            let x = exp.sample(&mut rng);
            let t = g * rng.random::<f64>();
            (x, t)
        })
        .collect();
    Ok(LatentSample { pairs })
}

/// Keeps the latent pairs that fall into the observable region, in order.
pub fn truncate(cfg: &ModelConfig, latent: &LatentSample) -> TruncatedSample {
    let pairs = latent
        .pairs
        .iter()
        .copied()
        .filter(|&(x, t)| cfg.in_region(x, t))
        .collect();
    TruncatedSample {
        pairs,
        n_latent: Some(latent.n()),
    }
}

/// Poisson-mixed approximation of the truncated sample: `Z ~ Poisson(n·α_θ₀)`
/// pairs drawn i.i.d. from the conditional law on the observable region.
///
/// Pairs come from rejection sampling with proposal `x ~ Exp(θ₀)` restricted
/// to `[0, G+s]` (inverse CDF) and `t ~ Uni[0, G]`.
pub fn draw_truncated_poisson(
    cfg: &ModelConfig,
    theta0: f64,
    n: usize,
    seed: SeedSpec,
) -> Result<TruncatedSample> {
    check_draw_args(theta0, n)?;
    let alpha = cfg.selection_prob(theta0)?;
    let mut rng = seed.rng();
    let count = Poisson::new(n as f64 * alpha).map_err(|e| domain(e.to_string()))?;
    let z = count.sample(&mut rng) as usize;
    Ok(TruncatedSample {
        pairs: draw_conditional(cfg, theta0, z, &mut rng),
        n_latent: None,
    })
}

/// `count` i.i.d. draws from the conditional density of an observed pair.
pub fn draw_conditional<R: Rng + ?Sized>(
    cfg: &ModelConfig,
    theta0: f64,
    count: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let (g, s) = (cfg.g(), cfg.s());
    // expm1(−θ(G+s)) = −P{X ≤ G+s}
    let tail = (-theta0 * (g + s)).exp_m1();
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let u: f64 = rng.random();
        let x = -(u * tail).ln_1p() / theta0;
        let t = g * rng.random::<f64>();
        if cfg.in_region(x, t) {
            pairs.push((x, t));
        }
    }
    pairs
}
