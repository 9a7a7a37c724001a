//! Closed-form quantities for diagonal Gaussians.
//!
//! Every log or division over a variance goes through [`floor_var`], which
//! clamps at [`VAR_FLOOR`]. Entropies are in nats.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

/// Lower bound applied to every variance before it enters a log or a division.
pub const VAR_FLOOR: f64 = 1e-8;

/// Norms below this make a vector degenerate for cosine similarity.
pub const NORM_FLOOR: f64 = 1e-12;

#[inline]
pub fn floor_var(v: f64) -> f64 {
    v.max(VAR_FLOOR)
}

/// Multivariate normal with diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGaussian {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl DiagonalGaussian {
    /// Panics if the two vectors differ in length or are empty.
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Self {
        assert_eq!(mean.len(), var.len(), "mean/var length mismatch");
        assert!(!mean.is_empty(), "zero-dimensional Gaussian");
        Self { mean, var }
    }

    /// N(0, I_k).
    pub fn standard(k: usize) -> Self {
        Self::new(vec![0.0; k], vec![1.0; k])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Differential entropy, `(k/2) log(2 pi e) + (1/2) sum_j log var_j`.
    pub fn entropy(&self) -> f64 {
        entropy(self)
    }

    pub fn kl_to_standard(&self) -> f64 {
        kl_to_standard(self)
    }

    /// `[mean, var]` concatenated, the vector used for similarity scoring.
    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim());
        v.extend_from_slice(&self.mean);
        v.extend_from_slice(&self.var);
        v
    }
}

/// Entropy of a single standard normal dimension, `0.5 * ln(2 pi e)`.
pub fn unit_entropy() -> f64 {
    0.5 * (2.0 * PI * E).ln()
}

pub fn entropy(g: &DiagonalGaussian) -> f64 {
    let k = g.dim() as f64;
    let log_det: f64 = g.var.iter().map(|&v| floor_var(v).ln()).sum();
    k * unit_entropy() + 0.5 * log_det
}

/// `KL(g || N(0, I))`.
pub fn kl_to_standard(g: &DiagonalGaussian) -> f64 {
    g.mean
        .iter()
        .zip(&g.var)
        .map(|(&m, &v)| v + m * m - 1.0 - floor_var(v).ln())
        .sum::<f64>()
        * 0.5
}

/// Log of the expected inner product `∫ N(x; m1, V1) N(x; m2, V2) dx`,
/// i.e. `log N(0; m1 - m2, V1 + V2)`.
pub fn expected_log_inner_product(g1: &DiagonalGaussian, g2: &DiagonalGaussian) -> f64 {
    assert_eq!(g1.dim(), g2.dim(), "dimension mismatch");
    let k = g1.dim() as f64;
    let mut log_det = 0.0;
    let mut quad = 0.0;
    for j in 0..g1.dim() {
        let s = floor_var(g1.var[j]) + floor_var(g2.var[j]);
        let d = g1.mean[j] - g2.mean[j];
        log_det += s.ln();
        quad += d * d / s;
    }
    -0.5 * log_det - 0.5 * k * (2.0 * PI).ln() - 0.5 * quad
}

/// Partial derivatives of [`expected_log_inner_product`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElipGrad {
    pub d_mean1: Vec<f64>,
    pub d_var1: Vec<f64>,
    pub d_mean2: Vec<f64>,
    pub d_var2: Vec<f64>,
}

pub fn expected_log_inner_product_grad(g1: &DiagonalGaussian, g2: &DiagonalGaussian) -> ElipGrad {
    let k = g1.dim();
    let mut out = ElipGrad {
        d_mean1: vec![0.0; k],
        d_var1: vec![0.0; k],
        d_mean2: vec![0.0; k],
        d_var2: vec![0.0; k],
    };
    for j in 0..k {
        let s = floor_var(g1.var[j]) + floor_var(g2.var[j]);
        let d = g1.mean[j] - g2.mean[j];
        out.d_mean1[j] = -d / s;
        out.d_mean2[j] = d / s;
        let d_s = -0.5 / s + 0.5 * d * d / (s * s);
        // clamped variances are constant
        if g1.var[j] > VAR_FLOOR {
            out.d_var1[j] = d_s;
        }
        if g2.var[j] > VAR_FLOOR {
            out.d_var2[j] = d_s;
        }
    }
    out
}

/// Cosine similarity together with a flag for the degenerate zero-vector case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub degenerate: bool,
}

pub fn cosine_checked(v1: &[f64], v2: &[f64]) -> Cosine {
    assert_eq!(v1.len(), v2.len(), "dimension mismatch");
    let n1 = norm(v1);
    let n2 = norm(v2);
    if n1 < NORM_FLOOR || n2 < NORM_FLOOR {
        return Cosine { value: 0.0, degenerate: true };
    }
    Cosine { value: (dot(v1, v2) / (n1 * n2)).clamp(-1.0, 1.0), degenerate: false }
}

/// Returns 0 when either vector has norm below [`NORM_FLOOR`].
pub fn cosine(v1: &[f64], v2: &[f64]) -> f64 {
    cosine_checked(v1, v2).value
}

/// Gradient of `cosine(u, v)` with respect to `u`; zero in the degenerate case.
pub fn cosine_grad_first(u: &[f64], v: &[f64]) -> Vec<f64> {
    let nu = norm(u);
    let nv = norm(v);
    if nu < NORM_FLOOR || nv < NORM_FLOOR {
        return vec![0.0; u.len()];
    }
    let c = dot(u, v) / (nu * nv);
    u.iter()
        .zip(v)
        .map(|(&ui, &vi)| vi / (nu * nv) - c * ui / (nu * nu))
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
