//! Gauss–Hermite rules for the weight `e^{-λ²}`.

use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }
}

/// Normalized Hermite functions `h_0..h_n` at `x`, where `h_k = p_k e^{-x²/2}`
/// and the `p_k` are orthonormal for `e^{-x²}`. Working with `h_k` keeps the
/// recurrence finite at large `|x|`.
fn hermite_functions(x: f64, n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n >= 1 {
        h.push(std::f64::consts::SQRT_2 * x * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        h.push((2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1]);
    }
    h
}

/// `n`-point Gauss–Hermite rule, `Σ w_i f(x_i) ≈ ∫ f(λ) e^{-λ²} dλ`.
///
/// Nodes come from the Jacobi matrix and are polished by Newton steps on the
/// three-term recurrence; weights are the Christoffel numbers `1/Σ_k p_k(x_i)²`.
pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::param("order", "quadrature order must be positive"));
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_functions(*x, n);
            if n == 1 {
                break;
            }
            // p_n' = √(2n) p_{n-1}
            let step = h[n] / ((2.0 * n as f64).sqrt() * h[n - 1]);
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
        let h = hermite_functions(*x, n - 1);
        let s: f64 = h.iter().map(|v| v * v).sum();
        weights.push(if s > 0.0 { (-*x * *x).exp() / s } else { 0.0 });
    }
    Ok(QuadratureRule { nodes, weights })
}
