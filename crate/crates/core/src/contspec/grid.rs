//! Free particle on a periodic grid and the Aharonov–Bohm time operator.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Largest relative mass the `k = 0` Fourier mode may carry before `P^{-1}` is refused.
pub const ZERO_MODE_TOL: f64 = 1e-10;
/// Packets must stay this many standard deviations of `|ψ|²` (times `√2`) inside the box.
pub const CONTAINMENT_SIGMAS: f64 = 6.0;

/// Samples of a wave function on `x_j = -L + j·2L/N`, `j = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    half_width: f64,
    mass: f64,
    samples: Vec<C64>,
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, v: &mut [C64]) {
        self.forward.process(v);
    }

    fn inverse(&self, v: &mut [C64]) {
        self.inverse.process(v);
        let scale = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|z| *z *= scale);
    }
}

impl GridState {
    pub fn new(half_width: f64, mass: f64, samples: Vec<C64>) -> Result<Self> {
        let n = samples.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::param("N", format!("grid size must be a power of two, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("L", "half-width must be positive"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("m", "mass must be positive"));
        }
        if samples.iter().any(|z| !z.is_finite()) {
            return Err(Error::param("samples", "samples must be finite"));
        }
        Ok(Self { half_width, mass, samples })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.len() as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.len()).map(|j| -self.half_width + j as f64 * dx).collect()
    }

    /// Wave numbers in FFT order: `(π/L)·q` for `q < N/2`, `(π/L)(q - N)` above.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.len();
        let dk = PI / self.half_width;
        (0..n).map(|q| if q < n / 2 { q as f64 * dk } else { (q as f64 - n as f64) * dk }).collect()
    }

    /// `(Σ |ψ_j|² dx)^{1/2}`
    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(C64::norm_sqr).sum::<f64>() * self.dx()).sqrt()
    }

    /// Grid inner product `Σ conj(φ_j) ψ_j dx`.
    pub fn inner(&self, other: &GridState) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum::<C64>() * self.dx())
    }

    pub fn distance(&self, other: &GridState) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.dx()).sqrt())
    }

    fn check_compatible(&self, other: &GridState) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        if self.half_width != other.half_width || self.mass != other.mass {
            return Err(Error::param("grid", "states live on different grids"));
        }
        Ok(())
    }

    fn with_samples(&self, samples: Vec<C64>) -> GridState {
        GridState { half_width: self.half_width, mass: self.mass, samples }
    }

    pub fn scale(&self, c: C64) -> GridState {
        self.with_samples(self.samples.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &GridState) -> Result<GridState> {
        self.check_compatible(other)?;
        Ok(self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect()))
    }

    /// Discrete Fourier coefficients, unnormalized, in FFT order.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut v = self.samples.clone();
        Transforms::new(self.len()).forward(&mut v);
        v
    }

    /// Fraction of `Σ |ψ̂_q|²` carried by the `k = 0` mode.
    pub fn zero_mode_fraction(&self) -> f64 {
        let s = self.spectrum();
        let total: f64 = s.iter().map(C64::norm_sqr).sum();
        if total == 0.0 { 0.0 } else { s[0].norm_sqr() / total }
    }

    /// `(⟨x⟩, Δx)` of the probability density `|ψ|²`.
    pub fn position_moments(&self) -> (f64, f64) {
        let x = self.positions();
        let p: Vec<f64> = self.samples.iter().map(C64::norm_sqr).collect();
        let total: f64 = p.iter().sum();
        let mean = x.iter().zip(&p).map(|(x, p)| x * p).sum::<f64>() / total;
        let var = x.iter().zip(&p).map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() / total;
        (mean, var.sqrt())
    }

    /// Whether `|⟨x⟩| + 6√2·Δx ≤ L`.
    pub fn is_contained(&self) -> bool {
        let (mean, sd) = self.position_moments();
        mean.abs() + CONTAINMENT_SIGMAS * std::f64::consts::SQRT_2 * sd <= self.half_width
    }

    fn check_zero_mode(&self) -> Result<()> {
        let f = self.zero_mode_fraction();
        if f >= ZERO_MODE_TOL {
            return Err(Error::Inadmissible(format!("k = 0 mode carries {f:e} of the mass (limit {ZERO_MODE_TOL:e})")));
        }
        Ok(())
    }
}

/// Normalized Gaussian packet `e^{i k0 x} e^{-(x - x0)²/2σ²}`.
pub fn make_packet(half_width: f64, n: usize, mass: f64, x0: f64, k0: f64, sigma: f64) -> Result<GridState> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "width must be positive"));
    }
    if k0.is_nan() || k0.abs() < 4.0 / sigma {
        return Err(Error::Inadmissible(format!("|k0| = {} is below 4/sigma = {}", k0.abs(), 4.0 / sigma)));
    }
    if x0.is_nan() || x0.abs() + CONTAINMENT_SIGMAS * sigma >= half_width || half_width.is_nan() {
        return Err(Error::Inadmissible(format!("|x0| + 6 sigma = {} does not fit in L = {half_width}", x0.abs() + 6.0 * sigma)));
    }
    let probe = GridState::new(half_width, mass, vec![C64::new(0.0, 0.0); n])?;
    let samples = probe
        .positions()
        .iter()
        .map(|&x| C64::from_polar((-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp(), k0 * x))
        .collect();
    let state = probe.with_samples(samples);
    let norm = state.norm();
    Ok(state.scale(C64::new(1.0 / norm, 0.0)))
}

/// `P^{-1}ψ` with `P = -i d/dx`; the `k = 0` mode is dropped.
fn inverse_momentum(plan: &Transforms, v: &[C64], k: &[f64]) -> Vec<C64> {
    let mut w = v.to_vec();
    plan.forward(&mut w);
    w[0] = C64::new(0.0, 0.0);
    for (z, &kq) in w.iter_mut().zip(k).skip(1) {
        *z /= kq;
    }
    plan.inverse(&mut w);
    w
}

/// `T_AB ψ = (m/2)(Q P^{-1} + P^{-1} Q)ψ`.
pub fn ab_apply(psi: &GridState) -> Result<GridState> {
    psi.check_zero_mode()?;
    let x = psi.positions();
    let k = psi.wavenumbers();
    let plan = Transforms::new(psi.len());
    let xpsi: Vec<C64> = psi.samples.iter().zip(&x).map(|(z, x)| z * *x).collect();
    let qp = inverse_momentum(&plan, &psi.samples, &k);
    let pq = inverse_momentum(&plan, &xpsi, &k);
    let half_m = 0.5 * psi.mass;
    Ok(psi.with_samples(qp.iter().zip(&x).zip(&pq).map(|((a, x), b)| (a * *x + b) * half_m).collect()))
}

/// `e^{-itH_0}ψ` with `H_0 = P²/2m`, exactly unitary on the grid.
pub fn free_evolve(psi: &GridState, t: f64) -> GridState {
    if t == 0.0 {
        return psi.clone();
    }
    let plan = Transforms::new(psi.len());
    let mut w = psi.samples.clone();
    plan.forward(&mut w);
    let m = psi.mass;
    for (z, k) in w.iter_mut().zip(psi.wavenumbers()) {
        *z *= C64::from_polar(1.0, -t * k * k / (2.0 * m));
    }
    plan.inverse(&mut w);
    psi.with_samples(w)
}

fn check_window(psi: &GridState, evolved: &GridState) -> Result<()> {
    for (state, when) in [(psi, "initially"), (evolved, "after evolution")] {
        if !state.is_contained() {
            let (mean, sd) = state.position_moments();
            return Err(Error::Inadmissible(format!(
                "packet {when} is not contained: |<x>| = {:.3}, dx = {sd:.3}, L = {}",
                mean.abs(),
                state.half_width
            )));
        }
    }
    Ok(())
}

/// `‖T_AB e^{-itH_0}ψ - e^{-itH_0}(T_AB + t)ψ‖ / ‖ψ‖`.
pub fn weak_weyl_residual(psi: &GridState, t: f64) -> Result<f64> {
    let evolved = free_evolve(psi, t);
    check_window(psi, &evolved)?;
    let lhs = ab_apply(&evolved)?;
    let shifted = ab_apply(psi)?.add(&psi.scale(C64::new(t, 0.0)))?;
    let rhs = free_evolve(&shifted, t);
    Ok(lhs.distance(&rhs)? / psi.norm())
}

/// `‖e^{itH_0} T_AB e^{-itH_0}ψ - (T_AB + t)ψ‖ / ‖ψ‖`, the strong form of the same relation.
pub fn strong_relation_residual(psi: &GridState, t: f64) -> Result<f64> {
    let evolved = free_evolve(psi, t);
    check_window(psi, &evolved)?;
    let lhs = free_evolve(&ab_apply(&evolved)?, -t);
    let rhs = ab_apply(psi)?.add(&psi.scale(C64::new(t, 0.0)))?;
    Ok(lhs.distance(&rhs)? / psi.norm())
}

/// Largest `t > 0` for which a free Gaussian packet keeps `|x0 + k0 t/m| + 6σ(t) ≤ L`,
/// with `σ(t) = σ √(1 + (t/mσ²)²)`. Zero if the packet does not fit at `t = 0`.
pub fn t_max(half_width: f64, mass: f64, x0: f64, k0: f64, sigma: f64) -> f64 {
    let fits = |t: f64| {
        let width = sigma * (1.0 + (t / (mass * sigma * sigma)).powi(2)).sqrt();
        (x0 + k0 * t / mass).abs() + CONTAINMENT_SIGMAS * width <= half_width
    };
    if !fits(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while fits(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) { lo = mid } else { hi = mid }
    }
    lo
}
