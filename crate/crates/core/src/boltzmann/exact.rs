//! Brute-force enumeration over every joint state. Only feasible for tiny
//! networks; used to check the sampling-based machinery.

use super::{DbmParams, LayerState, RbmParams};
use crate::error::{Error, Result};

/// Largest total unit count accepted for exact enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy)]
pub enum Model<'a> {
    Rbm(&'a RbmParams),
    Dbm(&'a DbmParams),
}

impl Model<'_> {
    fn layer_sizes(&self) -> Vec<usize> {
        match self {
            Model::Rbm(p) => vec![p.n_visible(), p.n_hidden()],
            Model::Dbm(p) => vec![p.n_visible(), p.n_hidden1(), p.n_hidden2()],
        }
    }

    fn n_visible(&self) -> usize {
        self.layer_sizes()[0]
    }

    fn check_capacity(&self) -> Result<()> {
        let units: usize = self.layer_sizes().iter().sum();
        if units > ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                units,
                limit: ENUMERATION_LIMIT,
            });
        }
        Ok(())
    }

    /// `log Σ_hidden exp(-E(v, hidden))` by enumeration.
    fn log_unnormalized(&self, v: &LayerState) -> Result<f64> {
        let terms: Vec<f64> = match self {
            Model::Rbm(p) => enumerate_states(p.n_hidden())
                .map(|h| p.energy(v, &h).map(|e| -e))
                .collect::<Result<_>>()?,
            Model::Dbm(p) => {
                let mut t = Vec::new();
                for h1 in enumerate_states(p.n_hidden1()) {
                    for h2 in enumerate_states(p.n_hidden2()) {
                        t.push(-p.energy(v, &h1, &h2)?);
                    }
                }
                t
            }
        };
        Ok(log_sum_exp(&terms))
    }
}

/// Every binary state of `n` units; unit `i` is bit `i` of the index.
pub fn enumerate_states(n: usize) -> impl Iterator<Item = LayerState> {
    assert!(n < 64, "cannot enumerate {n} units");
    (0u64..1 << n).map(move |bits| LayerState::from_bits(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResult {
    pub log_z: f64,
    pub z: f64,
    /// Marginal probability of the queried visible state.
    pub prob: f64,
}

/// Partition function and `p(v)` by exhaustive enumeration.
pub fn partition_and_prob(v: &LayerState, model: Model<'_>) -> Result<PartitionResult> {
    model.check_capacity()?;
    if v.len() != model.n_visible() {
        return Err(Error::invalid("visible state length does not match the model"));
    }
    let per_visible: Vec<f64> = enumerate_states(model.n_visible())
        .map(|x| model.log_unnormalized(&x))
        .collect::<Result<_>>()?;
    let log_z = log_sum_exp(&per_visible);
    let log_pv = model.log_unnormalized(v)?;
    Ok(PartitionResult {
        log_z,
        z: log_z.exp(),
        prob: (log_pv - log_z).exp(),
    })
}

/// `p(v)` for every visible state, indexed as in [`enumerate_states`].
pub fn visible_distribution(model: Model<'_>) -> Result<Vec<f64>> {
    model.check_capacity()?;
    let logs: Vec<f64> = enumerate_states(model.n_visible())
        .map(|x| model.log_unnormalized(&x))
        .collect::<Result<_>>()?;
    let log_z = log_sum_exp(&logs);
    Ok(logs.into_iter().map(|l| (l - log_z).exp()).collect())
}
