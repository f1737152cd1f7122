//! Column-restricted receptive fields between adjacent layers.
//!
//! Every layer uses the skin's column assignment, so neuron `i` of any
//! layer belongs to column `i / rows`. Two neurons may be connected when
//! their columns are equal or adjacent; the circular variant wraps the
//! first and last columns around.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::patterns::SkinGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceptiveFieldKind {
    Linear,
    Circular,
}

impl ReceptiveFieldKind {
    pub const ALL: [ReceptiveFieldKind; 2] = [ReceptiveFieldKind::Circular, ReceptiveFieldKind::Linear];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReceptiveFieldKind::Linear => "linear",
            ReceptiveFieldKind::Circular => "circular",
        }
    }

    /// Column distance under this kind's topology.
    pub fn column_distance(&self, a: usize, b: usize, cols: usize) -> usize {
        let d = a.abs_diff(b);
        match self {
            ReceptiveFieldKind::Linear => d,
            ReceptiveFieldKind::Circular => d.min(cols - d),
        }
    }
}

impl fmt::Display for ReceptiveFieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReceptiveFieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(ReceptiveFieldKind::Linear),
            "circular" => Ok(ReceptiveFieldKind::Circular),
            other => Err(Error::Config(format!(
                "unknown receptive field {other:?}, expected \"linear\" or \"circular\""
            ))),
        }
    }
}

/// Boolean adjacency between a pre-layer (rows) and a post-layer (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityMask {
    allowed: Array2<bool>,
}

impl ConnectivityMask {
    pub fn from_allowed(allowed: Array2<bool>) -> Self {
        Self { allowed }
    }

    /// Dense connectivity, used for unconstrained layers.
    pub fn full(pre: usize, post: usize) -> Self {
        Self {
            allowed: Array2::from_elem((pre, post), true),
        }
    }

    pub fn allowed(&self) -> &Array2<bool> {
        &self.allowed
    }

    pub fn dim(&self) -> (usize, usize) {
        self.allowed.dim()
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[[i, j]]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.allowed.row(i).iter().filter(|&&a| a).count()
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&a| a)
    }

    pub fn transpose(&self) -> Self {
        Self {
            allowed: self.allowed.t().to_owned(),
        }
    }

    /// Zeroes every masked-out entry of `weights` in place.
    pub fn enforce(&self, weights: &mut Array2<f64>) {
        debug_assert_eq!(weights.dim(), self.allowed.dim());
        ndarray::Zip::from(weights).and(&self.allowed).for_each(|w, &a| {
            if !a {
                *w = 0.0;
            }
        });
    }
}

pub fn build_mask(kind: ReceptiveFieldKind, geometry: SkinGeometry) -> ConnectivityMask {
    let n = geometry.cell_count();
    let allowed = Array2::from_shape_fn((n, n), |(i, j)| {
        kind.column_distance(geometry.column_of(i), geometry.column_of(j), geometry.cols) <= 1
    });
    ConnectivityMask { allowed }
}

pub fn apply_mask(weights: &Array2<f64>, mask: &ConnectivityMask) -> Result<Array2<f64>> {
    if weights.dim() != mask.dim() {
        return Err(Error::invalid(format!(
            "weights {:?} and mask {:?} differ in shape",
            weights.dim(),
            mask.dim()
        )));
    }
    let mut out = weights.clone();
    mask.enforce(&mut out);
    Ok(out)
}
