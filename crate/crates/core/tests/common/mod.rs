//! Reference computations written independently of the library: plain
//! loops over every joint state, no shared helpers.

#![allow(dead_code, clippy::needless_range_loop)]

use tactile_dbm::boltzmann::RbmParams;

/// Bits of `index` as a 0/1 vector, unit `i` = bit `i`.
pub fn bits(index: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| ((index >> i) & 1) as f64).collect()
}

fn energy(p: &RbmParams, v: &[f64], h: &[f64]) -> f64 {
    let mut e = 0.0;
    for i in 0..v.len() {
        e -= p.visible_bias[i] * v[i];
        for j in 0..h.len() {
            e -= v[i] * p.weights[[i, j]] * h[j];
        }
    }
    for j in 0..h.len() {
        e -= p.hidden_bias[j] * h[j];
    }
    e
}

/// `-log Σ_h exp(-E(v, h))`, summing the exponentials directly.
pub fn brute_free_energy(p: &RbmParams, v: &[f64]) -> f64 {
    let nh = p.hidden_bias.len();
    let z: f64 = (0..1usize << nh).map(|k| (-energy(p, v, &bits(k, nh))).exp()).sum();
    -z.ln()
}

/// Exact `p(v)` for every visible configuration, indexed like `bits`.
pub fn visible_probs(p: &RbmParams) -> Vec<f64> {
    let (nv, nh) = (p.visible_bias.len(), p.hidden_bias.len());
    let mut un = vec![0.0; 1 << nv];
    for (a, u) in un.iter_mut().enumerate() {
        let v = bits(a, nv);
        for k in 0..1usize << nh {
            *u += (-energy(p, &v, &bits(k, nh))).exp();
        }
    }
    let z: f64 = un.iter().sum();
    un.iter().map(|u| u / z).collect()
}

/// `KL(data ‖ model)` for a uniform empirical distribution over `data`
/// (visible configurations given by index, assumed distinct).
pub fn kl_data_model(p: &RbmParams, data: &[usize]) -> f64 {
    let probs = visible_probs(p);
    let q = 1.0 / data.len() as f64;
    data.iter().map(|&a| q * (q / probs[a]).ln()).sum()
}

/// Exact gradient of the mean data log-likelihood as one flat vector:
/// weights row-major, then visible biases, then hidden biases.
pub fn exact_gradient(p: &RbmParams, data: &[usize]) -> Vec<f64> {
    let (nv, nh) = (p.visible_bias.len(), p.hidden_bias.len());
    let n = nv * nh + nv + nh;

    // Expectation of the sufficient statistics under a weighting of joint
    // states; `weight(a, k)` is the unnormalised weight of (v=a, h=k).
    let expect = |visible: &[usize]| -> Vec<f64> {
        let mut acc = vec![0.0; n];
        let mut total = 0.0;
        for &a in visible {
            let v = bits(a, nv);
            for k in 0..1usize << nh {
                let h = bits(k, nh);
                let w = (-energy(p, &v, &h)).exp();
                total += w;
                for i in 0..nv {
                    for j in 0..nh {
                        acc[i * nh + j] += w * v[i] * h[j];
                    }
                    acc[nv * nh + i] += w * v[i];
                }
                for j in 0..nh {
                    acc[nv * nh + nv + j] += w * h[j];
                }
            }
        }
        acc.iter().map(|x| x / total).collect()
    };

    // Data term: average over data points of E[stats | v].
    let mut data_term = vec![0.0; n];
    for &a in data {
        for (d, x) in data_term.iter_mut().zip(expect(&[a])) {
            *d += x / data.len() as f64;
        }
    }
    let all: Vec<usize> = (0..1usize << nv).collect();
    let model_term = expect(&all);
    data_term.iter().zip(&model_term).map(|(d, m)| d - m).collect()
}

pub fn flatten(p: &RbmParams) -> Vec<f64> {
    p.weights
        .iter()
        .chain(p.visible_bias.iter())
        .chain(p.hidden_bias.iter())
        .copied()
        .collect()
}

/// Index of a visible configuration given by its on units.
pub fn index_of(on: &[usize]) -> usize {
    on.iter().map(|&i| 1usize << i).sum()
}

fn dice(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let total = a.iter().filter(|x| **x).count() + b.iter().filter(|x| **x).count();
    if total == 0 {
        1.0
    } else {
        2.0 * inter as f64 / total as f64
    }
}

/// Exact `E[Q]` of a uniformly random 18-cell pattern against the three
/// column patterns {0,1,2}, {6,7,8}, {12,13,14}.
pub fn fair_coin_expected_q() -> f64 {
    let targets: Vec<Vec<bool>> = [[0, 1, 2], [6, 7, 8], [12, 13, 14]]
        .iter()
        .map(|cells| (0..18).map(|c| cells.contains(&c)).collect())
        .collect();
    let mut sum = 0.0;
    for s in 0..1usize << 18 {
        let pattern: Vec<bool> = (0..18).map(|i| (s >> i) & 1 == 1).collect();
        sum += targets.iter().map(|t| dice(&pattern, t)).fold(0.0, f64::max);
    }
    sum / (1u64 << 18) as f64
}

/// The value of `fair_coin_expected_q`, frozen.
pub const FAIR_COIN_EXPECTED_Q: f64 = 0.3685081118579406;
