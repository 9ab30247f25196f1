//! Seeded per-link arrival processes.
//!
//! Every draw comes from a ChaCha8 stream selected by the link id and
//! positioned by the slot index, so the arrivals of link `l` in slot `k`
//! depend only on `(seed, l, k)`. Runs are reproducible regardless of the
//! order in which links or slots are sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Support size used by the Zipf experiments: values 0..=999.
pub const DEFAULT_ZIPF_SUPPORT: usize = 1000;

/// Largest Zipf support accepted.
pub const MAX_ZIPF_SUPPORT: usize = 1 << 20;

/// 32-bit words reserved per slot in each link's stream.
const WORDS_PER_SLOT: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrafficKind {
    None,
    /// i.i.d. Poisson(lambda) packets per link per slot.
    Poisson {
        lambda: f64,
    },
    /// With probability `p` a file of Poisson(lambda / p) packets arrives.
    File {
        p: f64,
        lambda: f64,
    },
    /// Packets per slot drawn from P(X = v) ∝ (v + 1)^(-s), v < support,
    /// with `s` chosen so the mean is `lambda`.
    Zipf {
        lambda: f64,
        support: usize,
    },
}

impl TrafficKind {
    pub fn lambda(&self) -> f64 {
        match *self {
            TrafficKind::None => 0.0,
            TrafficKind::Poisson { lambda }
            | TrafficKind::File { lambda, .. }
            | TrafficKind::Zipf { lambda, .. } => lambda,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TrafficKind::None => "none",
            TrafficKind::Poisson { .. } => "poisson",
            TrafficKind::File { .. } => "file",
            TrafficKind::Zipf { .. } => "zipf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub kind: TrafficKind,
    pub seed: u64,
}

impl TrafficModel {
    pub fn none() -> Self {
        TrafficModel {
            kind: TrafficKind::None,
            seed: 0,
        }
    }

    pub fn poisson(lambda: f64, seed: u64) -> Self {
        TrafficModel {
            kind: TrafficKind::Poisson { lambda },
            seed,
        }
    }

    pub fn file(p: f64, lambda: f64, seed: u64) -> Self {
        TrafficModel {
            kind: TrafficKind::File { p, lambda },
            seed,
        }
    }

    pub fn zipf(lambda: f64, seed: u64) -> Self {
        TrafficModel {
            kind: TrafficKind::Zipf {
                lambda,
                support: DEFAULT_ZIPF_SUPPORT,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |lambda: f64| {
            if lambda.is_finite() && lambda > 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!(
                    "arrival rate must be positive, got {lambda}"
                )))
            }
        };
        match self.kind {
            TrafficKind::None => Ok(()),
            TrafficKind::Poisson { lambda } => positive(lambda),
            TrafficKind::File { p, lambda } => {
                positive(lambda)?;
                if p > 0.0 && p <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::param(format!(
                        "file arrival probability must lie in (0, 1], got {p}"
                    )))
                }
            }
            TrafficKind::Zipf { lambda, support } => {
                positive(lambda)?;
                solve_zipf_exponent(lambda, support).map(|_| ())
            }
        }
    }
}

/// Draws per-link arrivals for a validated [`TrafficModel`].
#[derive(Debug, Clone)]
pub struct ArrivalSampler {
    model: TrafficModel,
    zipf_cdf: Vec<f64>,
}

impl ArrivalSampler {
    pub fn new(model: TrafficModel) -> Result<Self> {
        model.validate()?;
        let zipf_cdf = match model.kind {
            TrafficKind::Zipf { lambda, support } => {
                let s = solve_zipf_exponent(lambda, support)?;
                zipf_cdf(s, support)
            }
            _ => Vec::new(),
        };
        Ok(ArrivalSampler { model, zipf_cdf })
    }

    pub fn model(&self) -> &TrafficModel {
        &self.model
    }

    fn stream(&self, link: usize, slot: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.model.seed);
        rng.set_stream(link as u64);
        rng.set_word_pos(slot as u128 * WORDS_PER_SLOT);
        rng
    }

    /// Arrivals on one link in one slot.
    pub fn sample_link(&self, link: usize, slot: u64) -> u64 {
        match self.model.kind {
            TrafficKind::None => 0,
            TrafficKind::Poisson { lambda } => {
                let mut rng = self.stream(link, slot);
                poisson_inversion(lambda, rng.gen::<f64>())
            }
            TrafficKind::File { p, lambda } => {
                let mut rng = self.stream(link, slot);
                let coin: f64 = rng.gen();
                let u: f64 = rng.gen();
                if coin < p {
                    poisson_inversion(lambda / p, u)
                } else {
                    0
                }
            }
            TrafficKind::Zipf { .. } => {
                let mut rng = self.stream(link, slot);
                let u: f64 = rng.gen();
                self.zipf_cdf
                    .partition_point(|&c| c <= u)
                    .min(self.zipf_cdf.len() - 1) as u64
            }
        }
    }

    /// Arrivals on every link in slot `slot`.
    pub fn sample_arrivals(&self, links: usize, slot: u64) -> Vec<u64> {
        (0..links).map(|l| self.sample_link(l, slot)).collect()
    }
}

/// Smallest `x` with P(X <= x) > u for X ~ Poisson(lambda), by sequential
/// search from zero.
pub fn poisson_inversion(lambda: f64, u: f64) -> u64 {
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut x = 0u64;
    while u >= cdf {
        x += 1;
        p *= lambda / x as f64;
        let next = cdf + p;
        if next <= cdf {
            // Tail mass below f64 resolution.
            break;
        }
        cdf = next;
    }
    x
}

fn zipf_cdf(s: f64, support: usize) -> Vec<f64> {
    let pmf: Vec<f64> = (0..support).map(|v| ((v + 1) as f64).powf(-s)).collect();
    let total: f64 = pmf.iter().sum();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = pmf
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// Mean of P(X = v) ∝ (v + 1)^(-s) on v in 0..support.
pub fn zipf_mean(s: f64, support: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for v in 0..support {
        let w = ((v + 1) as f64).powf(-s);
        num += v as f64 * w;
        den += w;
    }
    num / den
}

/// Exponent `s` in (0, 64] for which the Zipf mean equals `lambda`.
///
/// The mean decreases strictly in `s` from `(support - 1) / 2` at `s = 0`,
/// so the root is unique and bisection finds it.
pub fn solve_zipf_exponent(lambda: f64, support: usize) -> Result<f64> {
    const S_MAX: f64 = 64.0;
    if !(2..=MAX_ZIPF_SUPPORT).contains(&support) {
        return Err(Error::param(format!(
            "zipf support must contain between 2 and {MAX_ZIPF_SUPPORT} values, got {support}"
        )));
    }
    let upper_mean = (support - 1) as f64 / 2.0;
    let lower_mean = zipf_mean(S_MAX, support);
    if !(lambda.is_finite() && lambda > lower_mean && lambda < upper_mean) {
        return Err(Error::param(format!(
            "zipf mean {lambda} is outside the attainable range ({lower_mean:e}, {upper_mean})"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, S_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if zipf_mean(mid, support) > lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(if s > 0.0 { s } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_is_all_zero() {
        let s = ArrivalSampler::new(TrafficModel::none()).unwrap();
        assert!(s.sample_arrivals(5, 3).iter().all(|&a| a == 0));
    }

    #[test]
    fn poisson_inversion_small_cases() {
        let p0 = (-0.5f64).exp();
        assert_eq!(poisson_inversion(0.5, 0.0), 0);
        assert_eq!(poisson_inversion(0.5, p0 - 1e-12), 0);
        assert_eq!(poisson_inversion(0.5, p0 + 1e-12), 1);
        assert!(poisson_inversion(3.0, 0.999_999) > 5);
    }

    #[test]
    fn deterministic_and_order_independent() {
        let a = ArrivalSampler::new(TrafficModel::poisson(0.7, 42)).unwrap();
        let b = ArrivalSampler::new(TrafficModel::poisson(0.7, 42)).unwrap();
        let forward: Vec<u64> = (0..50).map(|k| a.sample_link(3, k)).collect();
        let backward: Vec<u64> = (0..50).rev().map(|k| b.sample_link(3, k)).collect();
        assert_eq!(forward, backward.into_iter().rev().collect::<Vec<_>>());
        let c = ArrivalSampler::new(TrafficModel::poisson(0.7, 43)).unwrap();
        let other: Vec<u64> = (0..50).map(|k| c.sample_link(3, k)).collect();
        assert_ne!(forward, other);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TrafficModel::poisson(0.0, 1).validate().is_err());
        assert!(TrafficModel::poisson(-1.0, 1).validate().is_err());
        assert!(TrafficModel::file(0.0, 0.1, 1).validate().is_err());
        assert!(TrafficModel::file(1.5, 0.1, 1).validate().is_err());
        assert!(TrafficModel::zipf(499.5, 1).validate().is_err());
        assert!(TrafficModel::zipf(600.0, 1).validate().is_err());
    }

    #[test]
    fn zipf_near_uniform_limit() {
        let s = solve_zipf_exponent(499.5 - 1e-3, 1000).unwrap();
        assert!(s > 0.0 && s < 1e-4, "s = {s}");
    }

    #[test]
    fn zipf_samples_in_support() {
        let s = ArrivalSampler::new(TrafficModel::zipf(5.0, 9)).unwrap();
        for k in 0..2000 {
            assert!(s.sample_link(0, k) < 1000);
        }
    }
}
