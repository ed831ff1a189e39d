//! Seeded random test vectors in the constrained domains.
//!
//! Coefficients are drawn uniformly from the square `[-1, 1]²` of the complex
//! plane, projected onto the kernel of the domain's linear constraint
//! `Σ_n w_n v_n = 0`, and normalized.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;

pub fn uniform_complex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
}

/// Orthogonal projection of `v` onto `{x : Σ w_n x_n = 0}` for real weights.
pub fn project_onto_kernel(v: &DVector<C64>, weights: &[f64]) -> DVector<C64> {
    let w2: f64 = weights.iter().map(|w| w * w).sum();
    if w2 == 0.0 {
        return v.clone();
    }
    let dot: C64 = v.iter().zip(weights).map(|(x, w)| x * *w).sum();
    let c = dot / w2;
    DVector::from_iterator(v.len(), v.iter().zip(weights).map(|(x, w)| x - c * *w))
}

/// A unit vector with `Σ w_n v_n = 0`, or `None` when that kernel is trivial.
pub fn random_in_kernel<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<DVector<C64>> {
    if weights.len() < 2 {
        return None;
    }
    let v = project_onto_kernel(&uniform_complex(rng, weights.len()), weights);
    let norm = v.norm();
    (norm > 0.0).then(|| v / C64::new(norm, 0.0))
}

/// A unit vector in the span of eigenvector differences `e_n - e_m`.
pub fn random_difference_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Option<DVector<C64>> {
    random_in_kernel(rng, &vec![1.0; n])
}
