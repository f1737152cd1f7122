use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{ensure_finite, sigmoid_vec, softplus, LayerState};
use crate::connectivity::ConnectivityMask;
use crate::error::{Error, Result};

/// Standard deviation of the Gaussian weight initialization.
pub const INIT_WEIGHT_STD: f64 = 0.01;

/// Parameters of one visible/hidden layer pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    /// Shape `(visible, hidden)`; masked-out entries are always zero.
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
    pub mask: ConnectivityMask,
}

impl RbmParams {
    pub fn zeros(mask: ConnectivityMask) -> Self {
        let (nv, nh) = mask.dim();
        Self {
            weights: Array2::zeros((nv, nh)),
            visible_bias: Array1::zeros(nv),
            hidden_bias: Array1::zeros(nh),
            mask,
        }
    }

    /// Gaussian weights with standard deviation 0.01, zero biases.
    pub fn init_random<R: Rng + ?Sized>(mask: ConnectivityMask, rng: &mut R) -> Self {
        let mut p = Self::zeros(mask);
        let normal = Normal::new(0.0, INIT_WEIGHT_STD).expect("valid normal");
        p.weights.mapv_inplace(|_| normal.sample(rng));
        p.mask.enforce(&mut p.weights);
        p
    }

    /// Builds parameters from explicit values, enforcing the mask.
    pub fn new(
        mut weights: Array2<f64>,
        visible_bias: Array1<f64>,
        hidden_bias: Array1<f64>,
        mask: ConnectivityMask,
    ) -> Result<Self> {
        if weights.dim() != mask.dim() || visible_bias.len() != weights.nrows() || hidden_bias.len() != weights.ncols()
        {
            return Err(Error::invalid("RBM parameter shapes are inconsistent"));
        }
        mask.enforce(&mut weights);
        Ok(Self {
            weights,
            visible_bias,
            hidden_bias,
            mask,
        })
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn check_finite(&self) -> Result<()> {
        ensure_finite("RBM weights", self.weights.iter())?;
        ensure_finite("RBM visible bias", self.visible_bias.iter())?;
        ensure_finite("RBM hidden bias", self.hidden_bias.iter())
    }

    fn check_visible(&self, v: &LayerState) -> Result<()> {
        if v.len() != self.n_visible() {
            return Err(Error::invalid(format!(
                "visible state of length {} for {} visible units",
                v.len(),
                self.n_visible()
            )));
        }
        Ok(())
    }

    fn check_hidden(&self, h: &LayerState) -> Result<()> {
        if h.len() != self.n_hidden() {
            return Err(Error::invalid(format!(
                "hidden state of length {} for {} hidden units",
                h.len(),
                self.n_hidden()
            )));
        }
        Ok(())
    }

    /// `p(h_j = 1 | v) = σ(Σ_i v_i W_ij + c_j)`.
    pub fn hidden_prob(&self, v: &LayerState) -> Result<Array1<f64>> {
        self.check_visible(v)?;
        self.check_finite()?;
        Ok(self.hidden_prob_unchecked(v.as_array()))
    }

    /// `p(v_i = 1 | h) = σ(Σ_j W_ij h_j + b_i)`.
    pub fn visible_prob(&self, h: &LayerState) -> Result<Array1<f64>> {
        self.check_hidden(h)?;
        self.check_finite()?;
        Ok(self.visible_prob_unchecked(h.as_array()))
    }

    pub(crate) fn hidden_prob_unchecked(&self, v: &Array1<f64>) -> Array1<f64> {
        sigmoid_vec(self.weights.t().dot(v) + &self.hidden_bias)
    }

    pub(crate) fn visible_prob_unchecked(&self, h: &Array1<f64>) -> Array1<f64> {
        sigmoid_vec(self.weights.dot(h) + &self.visible_bias)
    }

    /// `E(v, h) = -bᵀv - cᵀh - vᵀWh`.
    pub fn energy(&self, v: &LayerState, h: &LayerState) -> Result<f64> {
        self.check_visible(v)?;
        self.check_hidden(h)?;
        let (v, h) = (v.as_array(), h.as_array());
        Ok(-self.visible_bias.dot(v) - self.hidden_bias.dot(h) - v.dot(&self.weights.dot(h)))
    }

    /// Marginal free energy `F(v) = -bᵀv - Σ_j log(1 + exp(Σ_i v_i W_ij + c_j))`,
    /// the closed form of `-log Σ_h exp(-E(v, h))`.
    pub fn free_energy(&self, v: &LayerState) -> Result<f64> {
        self.check_visible(v)?;
        self.check_finite()?;
        let va = v.as_array();
        let pre = self.weights.t().dot(va) + &self.hidden_bias;
        Ok(-self.visible_bias.dot(va) - pre.iter().map(|&x| softplus(x)).sum::<f64>())
    }
}
