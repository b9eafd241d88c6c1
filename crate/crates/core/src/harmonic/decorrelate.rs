use serde::Serialize;

use crate::{Error, Result};

/// Lower-triangular `M` with `M·Cov·Mᵀ = I`, and the angle of the image of
/// the quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecorrelationResult {
    pub matrix: [[f64; 2]; 2],
    pub rho: f64,
    /// `α = arccos(−ρ)`.
    pub cone_angle: f64,
    /// `p = 2α/π`.
    pub p: f64,
}

impl DecorrelationResult {
    /// `M·C·Mᵀ`.
    pub fn transform_covariance(&self, cov: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let m = self.matrix;
        let mut mc = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                mc[i][j] = m[i][0] * cov[0][j] + m[i][1] * cov[1][j];
            }
        }
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = mc[i][0] * m[j][0] + mc[i][1] * m[j][1];
            }
        }
        out
    }

    /// Cosine of the angle between `M·e₁` and `M·e₂`.
    pub fn cone_cosine(&self) -> f64 {
        let m = self.matrix;
        let (u, v) = ([m[0][0], m[1][0]], [m[0][1], m[1][1]]);
        let dot = u[0] * v[0] + u[1] * v[1];
        dot / (libm::hypot(u[0], u[1]) * libm::hypot(v[0], v[1]))
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let m = self.matrix;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }
}

/// `M = [[1/σ₁, 0], [−ρ/(σ₁√(1−ρ²)), 1/(σ₂√(1−ρ²))]]`.
pub fn decorrelate(cov: [[f64; 2]; 2]) -> Result<DecorrelationResult> {
    let (v1, v2, c) = (cov[0][0], cov[1][1], cov[0][1]);
    if !(v1 > 0.0 && v2 > 0.0) || !(v1.is_finite() && v2.is_finite() && c.is_finite()) {
        return Err(Error::InvalidArgument("variances must be positive and finite".into()));
    }
    if (cov[1][0] - c).abs() > 1e-12 * libm::sqrt(v1 * v2) {
        return Err(Error::InvalidArgument("covariance must be symmetric".into()));
    }
    let (s1, s2) = (libm::sqrt(v1), libm::sqrt(v2));
    let rho = c / (s1 * s2);
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "covariance is singular (rho = {rho})"
        )));
    }
    let k = libm::sqrt(1.0 - rho * rho);
    let cone_angle = libm::acos(-rho);
    Ok(DecorrelationResult {
        matrix: [[1.0 / s1, 0.0], [-rho / (s1 * k), 1.0 / (s2 * k)]],
        rho,
        cone_angle,
        p: 2.0 * cone_angle / core::f64::consts::PI,
    })
}
