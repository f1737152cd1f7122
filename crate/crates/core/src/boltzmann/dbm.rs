use ndarray::{Array1, Array2};

use super::{ensure_finite, sigmoid_vec, LayerState, RbmParams};
use crate::connectivity::ConnectivityMask;
use crate::error::{Error, Result};

/// Three-layer DBM `v - h1 - h2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmParams {
    /// Shape `(visible, hidden1)`.
    pub w1: Array2<f64>,
    /// Shape `(hidden1, hidden2)`.
    pub w2: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden1_bias: Array1<f64>,
    pub hidden2_bias: Array1<f64>,
    pub mask1: ConnectivityMask,
    pub mask2: ConnectivityMask,
}

impl DbmParams {
    pub fn zeros(mask1: ConnectivityMask, mask2: ConnectivityMask) -> Self {
        let (nv, n1) = mask1.dim();
        let (m1, n2) = mask2.dim();
        assert_eq!(n1, m1, "mask shapes do not chain");
        Self {
            w1: Array2::zeros((nv, n1)),
            w2: Array2::zeros((n1, n2)),
            visible_bias: Array1::zeros(nv),
            hidden1_bias: Array1::zeros(n1),
            hidden2_bias: Array1::zeros(n2),
            mask1,
            mask2,
        }
    }

    /// Stacks two RBMs: the lower one supplies `W1`, `b` and `c1`; the
    /// upper one supplies `W2` and `c2`. The upper RBM's visible bias is
    /// discarded.
    pub fn from_rbms(lower: &RbmParams, upper: &RbmParams) -> Result<Self> {
        if lower.n_hidden() != upper.n_visible() {
            return Err(Error::invalid("RBM layer sizes do not chain"));
        }
        Ok(Self {
            w1: lower.weights.clone(),
            w2: upper.weights.clone(),
            visible_bias: lower.visible_bias.clone(),
            hidden1_bias: lower.hidden_bias.clone(),
            hidden2_bias: upper.hidden_bias.clone(),
            mask1: lower.mask.clone(),
            mask2: upper.mask.clone(),
        })
    }

    /// The `v - h1` pair as an RBM.
    pub fn lower_rbm(&self) -> RbmParams {
        RbmParams {
            weights: self.w1.clone(),
            visible_bias: self.visible_bias.clone(),
            hidden_bias: self.hidden1_bias.clone(),
            mask: self.mask1.clone(),
        }
    }

    pub fn n_visible(&self) -> usize {
        self.w1.nrows()
    }

    pub fn n_hidden1(&self) -> usize {
        self.w1.ncols()
    }

    pub fn n_hidden2(&self) -> usize {
        self.w2.ncols()
    }

    pub fn enforce_masks(&mut self) {
        self.mask1.enforce(&mut self.w1);
        self.mask2.enforce(&mut self.w2);
    }

    pub fn check_finite(&self) -> Result<()> {
        ensure_finite("DBM W1", self.w1.iter())?;
        ensure_finite("DBM W2", self.w2.iter())?;
        ensure_finite(
            "DBM biases",
            self.visible_bias
                .iter()
                .chain(self.hidden1_bias.iter())
                .chain(self.hidden2_bias.iter()),
        )
    }

    fn check_shapes(&self, v: &LayerState, h1: Option<&LayerState>, h2: Option<&LayerState>) -> Result<()> {
        let ok = v.len() == self.n_visible()
            && h1.is_none_or(|h| h.len() == self.n_hidden1())
            && h2.is_none_or(|h| h.len() == self.n_hidden2());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("layer state lengths do not match the DBM"))
        }
    }

    /// `p(h1_j = 1 | v, h2) = σ(Σ_i v_i W1_ij + Σ_k W2_jk h2_k + c1_j)`.
    pub fn middle_prob(&self, v: &LayerState, h2: &LayerState) -> Result<Array1<f64>> {
        self.check_shapes(v, None, Some(h2))?;
        self.check_finite()?;
        Ok(self.middle_prob_unchecked(v.as_array(), h2.as_array()))
    }

    pub fn visible_prob(&self, h1: &LayerState) -> Result<Array1<f64>> {
        if h1.len() != self.n_hidden1() {
            return Err(Error::invalid("hidden1 state length does not match the DBM"));
        }
        self.check_finite()?;
        Ok(self.visible_prob_unchecked(h1.as_array()))
    }

    pub fn top_prob(&self, h1: &LayerState) -> Result<Array1<f64>> {
        if h1.len() != self.n_hidden1() {
            return Err(Error::invalid("hidden1 state length does not match the DBM"));
        }
        self.check_finite()?;
        Ok(self.top_prob_unchecked(h1.as_array()))
    }

    pub(crate) fn middle_prob_unchecked(&self, v: &Array1<f64>, h2: &Array1<f64>) -> Array1<f64> {
        sigmoid_vec(self.w1.t().dot(v) + self.w2.dot(h2) + &self.hidden1_bias)
    }

    pub(crate) fn visible_prob_unchecked(&self, h1: &Array1<f64>) -> Array1<f64> {
        sigmoid_vec(self.w1.dot(h1) + &self.visible_bias)
    }

    pub(crate) fn top_prob_unchecked(&self, h1: &Array1<f64>) -> Array1<f64> {
        sigmoid_vec(self.w2.t().dot(h1) + &self.hidden2_bias)
    }

    /// `E = -bᵀv - c1ᵀh1 - c2ᵀh2 - vᵀW1h1 - h1ᵀW2h2`.
    pub fn energy(&self, v: &LayerState, h1: &LayerState, h2: &LayerState) -> Result<f64> {
        self.check_shapes(v, Some(h1), Some(h2))?;
        let (v, h1, h2) = (v.as_array(), h1.as_array(), h2.as_array());
        Ok(-self.visible_bias.dot(v)
            - self.hidden1_bias.dot(h1)
            - self.hidden2_bias.dot(h2)
            - v.dot(&self.w1.dot(h1))
            - h1.dot(&self.w2.dot(h2)))
    }
}
