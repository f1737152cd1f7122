//! Reads the deepest hidden layer back out as a skin pattern.
//!
//! The decode is a single top-down pass. Each hidden layer normally hears
//! from both neighbours, so the `h2 -> h1` weights are doubled to make up
//! for the missing bottom-up half. The visible layer only ever has one
//! neighbour, so the `h1 -> v` weights are used as they are.

use ndarray::Array1;
use rand::Rng;

use crate::boltzmann::{sample_unchecked, sigmoid, DbmParams, LayerState};
use crate::error::{Error, Result};
use crate::metrics::performance_q;
use crate::patterns::{Dataset, TactilePattern};

/// Factor applied to the `h2 -> h1` weights during decoding.
pub const DEEP_STAGE_GAIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    /// Bernoulli draw at each stage.
    #[default]
    Stochastic,
    /// Unit is on iff its probability exceeds 0.5; exactly 0.5 is off.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub mode: DecodeMode,
    pub samples_per_decode: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            mode: DecodeMode::Stochastic,
            samples_per_decode: 100,
        }
    }
}

fn realize<R: Rng + ?Sized>(probs: &Array1<f64>, mode: DecodeMode, rng: &mut R) -> LayerState {
    match mode {
        DecodeMode::Stochastic => sample_unchecked(probs, rng),
        DecodeMode::Threshold => LayerState::from_bits(&probs.iter().map(|&p| p > 0.5).collect::<Vec<_>>()),
    }
}

/// `p(h1 | h2)` of the decode pass: `σ(2·W2·h2 + c1)`.
pub fn decode_hidden1_prob(params: &DbmParams, h2: &LayerState) -> Array1<f64> {
    (params.w2.dot(h2.as_array()) * DEEP_STAGE_GAIN + &params.hidden1_bias).mapv(sigmoid)
}

/// `p(v | h1)` of the decode pass: `σ(W1·h1 + b)`, weights not doubled.
pub fn decode_visible_prob(params: &DbmParams, h1: &LayerState) -> Array1<f64> {
    (params.w1.dot(h1.as_array()) + &params.visible_bias).mapv(sigmoid)
}

pub fn decode<R: Rng + ?Sized>(
    params: &DbmParams,
    h2: &LayerState,
    config: &DecodeConfig,
    rng: &mut R,
) -> Result<TactilePattern> {
    if h2.len() != params.n_hidden2() {
        return Err(Error::invalid("hidden2 state length does not match the DBM"));
    }
    params.check_finite()?;
    let h1 = realize(&decode_hidden1_prob(params, h2), config.mode, rng);
    let v = realize(&decode_visible_prob(params, &h1), config.mode, rng);
    Ok(v.to_pattern())
}

/// Mean `Q` of `samples_per_decode` independent decodes of `h2`.
pub fn decode_performance<R: Rng + ?Sized>(
    params: &DbmParams,
    h2: &LayerState,
    dataset: &Dataset,
    config: &DecodeConfig,
    rng: &mut R,
) -> Result<f64> {
    if config.samples_per_decode == 0 {
        return Err(Error::invalid("samples_per_decode must be at least 1"));
    }
    let mut total = 0.0;
    for _ in 0..config.samples_per_decode {
        total += performance_q(&decode(params, h2, config, rng)?, dataset)?;
    }
    Ok(total / config.samples_per_decode as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::ConnectivityMask;
    use crate::patterns::{make_triangle_dataset, SkinGeometry};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_dbm() -> DbmParams {
        DbmParams::zeros(ConnectivityMask::full(18, 18), ConnectivityMask::full(18, 18))
    }

    fn identity_dbm() -> DbmParams {
        let mut p = zero_dbm();
        p.w1 = Array2::eye(18) * 10.0;
        p.w2 = Array2::eye(18) * 10.0;
        p
    }

    fn threshold() -> DecodeConfig {
        DecodeConfig {
            mode: DecodeMode::Threshold,
            samples_per_decode: 1,
        }
    }

    #[test]
    fn zero_params_give_fair_coins() {
        let p = zero_dbm();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h2 = LayerState::random(18, &mut rng);
        let n = 10_000;
        let mut on = 0usize;
        for _ in 0..n {
            on += decode(&p, &h2, &DecodeConfig::default(), &mut rng)
                .unwrap()
                .active_count();
        }
        assert!((on as f64 / (18 * n) as f64 - 0.5).abs() < 0.01);
    }

    // σ(2·10) and σ(10) are both above 0.5; σ(0) = 0.5 maps to off.
    #[test]
    fn identity_network_decodes_exactly() {
        let p = identity_dbm();
        let d = make_triangle_dataset(SkinGeometry::STANDARD);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for pat in &d {
            let out = decode(&p, &LayerState::from(pat), &threshold(), &mut rng).unwrap();
            assert_eq!(&out, pat);
            let q = decode_performance(&p, &LayerState::from(pat), &d, &threshold(), &mut rng).unwrap();
            assert_eq!(q, 1.0);
        }
    }

    #[test]
    fn threshold_tie_maps_to_off() {
        let p = zero_dbm();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = decode(&p, &LayerState::zeros(18), &threshold(), &mut rng).unwrap();
        assert_eq!(out.active_count(), 0);
    }

    #[test]
    fn stochastic_decode_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = zero_dbm();
        p.w1.mapv_inplace(|_| rng.random_range(-2.0..2.0));
        p.w2.mapv_inplace(|_| rng.random_range(-2.0..2.0));
        let h2 = LayerState::random(18, &mut rng);
        let cfg = DecodeConfig::default();
        let a = decode(&p, &h2, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = decode(&p, &h2, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    // Only W2 is doubled: with h2 = e_k, W2 = a·I, W1 = b·I and zero biases,
    // p(h1_k) must be σ(2a) and, for h1 = e_k, p(v_k) must be σ(b).
    #[test]
    fn doubling_applies_to_deep_stage_only() {
        let mut p = zero_dbm();
        let (a, b) = (0.7, 0.3);
        p.w1 = Array2::eye(18) * b;
        p.w2 = Array2::eye(18) * a;
        let mut e = vec![false; 18];
        e[4] = true;
        let unit = LayerState::from_bits(&e);
        assert!((decode_hidden1_prob(&p, &unit)[4] - sigmoid(2.0 * a)).abs() < 1e-15);
        assert!((decode_visible_prob(&p, &unit)[4] - sigmoid(b)).abs() < 1e-15);
    }

    #[test]
    fn averaging_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = zero_dbm();
        p.w1.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        p.w2.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        let d = make_triangle_dataset(SkinGeometry::STANDARD);
        let h2 = LayerState::random(18, &mut rng);
        let n = 4000;
        let single = DecodeConfig {
            mode: DecodeMode::Stochastic,
            samples_per_decode: 1,
        };
        let repeated: f64 = (0..n)
            .map(|_| decode_performance(&p, &h2, &d, &single, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let pooled = DecodeConfig {
            mode: DecodeMode::Stochastic,
            samples_per_decode: n,
        };
        let batch = decode_performance(&p, &h2, &d, &pooled, &mut rng).unwrap();
        // Per-decode Q has sd below 0.5; two means of 4000 differ by < 0.04 at > 5 sd.
        assert!((repeated - batch).abs() < 0.04);
        assert!((0.0..=1.0).contains(&batch));
    }
}
