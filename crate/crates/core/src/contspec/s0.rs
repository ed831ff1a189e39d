//! The strong time operator `Y = i d/dλ + (i/2)W` of multiplication by `λ`
//! on `L²(ℝ, ρ dλ)`, where `W = ρ'/ρ`.
//!
//! Test functions are finite combinations `Σ c_j e^{i s_j λ}`. For a density
//! whose log-derivative is affine, `Y` maps them to combinations with affine
//! coefficients, so the strong relation can be checked symbolically.

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use super::quadrature::{gauss_hermite, QuadratureRule};
use crate::{Error, Result};

pub trait SpectralDensity {
    fn value(&self, lambda: f64) -> f64;

    /// `W(λ) = ρ'(λ)/ρ(λ)`
    fn log_derivative(&self, lambda: f64) -> f64;

    /// `(w0, w1)` with `W(λ) = w0 + w1 λ`, when `W` is affine.
    fn affine_log_derivative(&self) -> Option<(f64, f64)>;

    /// Rule with `Σ w_i f(x_i) ≈ ∫ f ρ dλ`.
    fn quadrature(&self, order: usize) -> Result<QuadratureRule>;
}

/// `ρ(λ) = e^{-λ²}/√π`
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Gaussian;

impl SpectralDensity for Gaussian {
    fn value(&self, lambda: f64) -> f64 {
        (-lambda * lambda).exp() / std::f64::consts::PI.sqrt()
    }

    fn log_derivative(&self, lambda: f64) -> f64 {
        -2.0 * lambda
    }

    fn affine_log_derivative(&self) -> Option<(f64, f64)> {
        Some((0.0, -2.0))
    }

    fn quadrature(&self, order: usize) -> Result<QuadratureRule> {
        let mut rule = gauss_hermite(order)?;
        let norm = std::f64::consts::PI.sqrt();
        rule.weights.iter_mut().for_each(|w| *w /= norm);
        Ok(rule)
    }
}

/// `f(λ) = Σ c_j e^{i s_j λ}`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpCombination {
    pub terms: Vec<(C64, f64)>,
}

impl ExpCombination {
    pub fn new(terms: Vec<(C64, f64)>) -> Self {
        Self { terms }
    }

    pub fn exp(s: f64) -> Self {
        Self { terms: vec![(C64::new(1.0, 0.0), s)] }
    }

    pub fn eval(&self, lambda: f64) -> C64 {
        self.terms.iter().map(|(c, s)| c * C64::from_polar(1.0, s * lambda)).sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().fold(0.0_f64, |m, (_, s)| m.max(s.abs()))
    }

    /// `k` terms with coefficients on `[-1, 1]²` and frequencies on `[-s_max, s_max]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize, s_max: f64) -> Self {
        let terms = (0..k)
            .map(|_| {
                let c = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                (c, rng.gen_range(-s_max..=s_max))
            })
            .collect();
        Self { terms }
    }
}

/// `Σ (a_j + b_j λ) e^{i s_j λ}`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineExpCombination {
    /// `(a_j, b_j, s_j)`
    pub terms: Vec<(C64, C64, f64)>,
}

impl AffineExpCombination {
    pub fn eval(&self, lambda: f64) -> C64 {
        self.terms.iter().map(|(a, b, s)| (a + b * lambda) * C64::from_polar(1.0, s * lambda)).sum()
    }
}

/// `Y f` for a density with affine log-derivative. For the Gaussian,
/// `Y e^{isλ} = (-s - iλ) e^{isλ}`.
pub fn s0_apply<D: SpectralDensity>(density: &D, f: &ExpCombination) -> Result<AffineExpCombination> {
    let (w0, w1) = density
        .affine_log_derivative()
        .ok_or_else(|| Error::param("density", "symbolic application needs an affine log-derivative"))?;
    let i = C64::new(0.0, 1.0);
    let terms = f
        .terms
        .iter()
        .map(|&(c, s)| (c * (-s + 0.5 * i * w0), c * (0.5 * i * w1), s))
        .collect();
    Ok(AffineExpCombination { terms })
}

/// `a + ib` with rational parts.
#[derive(Debug, Clone, PartialEq)]
struct ComplexRational {
    re: BigRational,
    im: BigRational,
}

impl ComplexRational {
    fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    fn imag(im: BigRational) -> Self {
        Self { re: BigRational::zero(), im }
    }

    fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Self) -> Self {
        Self { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn abs_sum(&self) -> BigRational {
        self.re.abs() + self.im.abs()
    }
}

/// One exact term `(a + bλ) e^{isλ}`.
#[derive(Debug, Clone, PartialEq)]
struct ExactTerm {
    a: ComplexRational,
    b: ComplexRational,
    s: BigRational,
}

/// Exact `Y` for the Gaussian density on a single term with coefficients `(a, b)`.
/// `Y[(a + bλ)e^{isλ}] = (i b - s a + (-s b - i a)λ - i b λ²) e^{isλ}`;
/// the callers keep `b = 0` on input so no quadratic part arises.
fn exact_gaussian_y(c: &ComplexRational, s: &BigRational) -> ExactTerm {
    let minus_s = ComplexRational::real(-s.clone());
    let minus_i = ComplexRational::imag(-BigRational::from_integer(1.into()));
    ExactTerm { a: c.mul(&minus_s), b: c.mul(&minus_i), s: s.clone() }
}

fn rational(x: f64, name: &'static str) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::param(name, "must be finite"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongRelation {
    pub exact: bool,
    /// `|Δa| + |Δb|` of the affine coefficients, as a float; zero when exact.
    pub coefficient_defect: f64,
}

/// Verifies `e^{itλ} Y[e^{-itλ} e^{isλ}] = (Y + t) e^{isλ}` in exact rational arithmetic.
///
/// `s` and `t` are converted to rationals exactly, so the comparison involves no rounding.
pub fn s0_strong_relation_check(s: f64, t: f64) -> Result<StrongRelation> {
    let s = rational(s, "s")?;
    let t = rational(t, "t")?;
    let one = ComplexRational::real(BigRational::from_integer(1.into()));

    // left side: apply Y to e^{i(s - t)λ}, then multiply by e^{itλ}
    let inner = exact_gaussian_y(&one, &(&s - &t));
    let lhs = ExactTerm { s: &inner.s + &t, ..inner };

    // right side: Y e^{isλ} + t e^{isλ}
    let y = exact_gaussian_y(&one, &s);
    let rhs = ExactTerm { a: y.a.add(&ComplexRational::real(t.clone())), ..y };

    if lhs.s != rhs.s {
        return Ok(StrongRelation { exact: false, coefficient_defect: f64::INFINITY });
    }
    let defect = lhs.a.sub(&rhs.a).abs_sum() + lhs.b.sub(&rhs.b).abs_sum();
    let exact = defect.is_zero();
    let coefficient_defect = if exact { 0.0 } else { num_traits::ToPrimitive::to_f64(&defect).unwrap_or(f64::INFINITY) };
    Ok(StrongRelation { exact, coefficient_defect })
}

/// Smallest admissible quadrature order for frequencies up to `s_max`.
pub fn min_quadrature_order(s_max: f64) -> usize {
    64.max((8.0 * s_max + 16.0).ceil() as usize)
}

/// `|(f, Yg) - (Yf, g)|` in `L²(ℝ, ρ dλ)` at the minimal admissible order.
pub fn s0_symmetry_residual(f: &ExpCombination, g: &ExpCombination) -> Result<f64> {
    let s_max = f.max_frequency().max(g.max_frequency());
    s0_symmetry_residual_with_order(&Gaussian, f, g, min_quadrature_order(s_max))
}

pub fn s0_symmetry_residual_with_order<D: SpectralDensity>(
    density: &D,
    f: &ExpCombination,
    g: &ExpCombination,
    order: usize,
) -> Result<f64> {
    let s_max = f.max_frequency().max(g.max_frequency());
    let needed = (8.0 * s_max + 16.0).ceil() as usize;
    if order < needed {
        return Err(Error::param("order", format!("quadrature order {order} is below 8 max|s| + 16 = {needed}")));
    }
    let rule = density.quadrature(order)?;
    let yf = s0_apply(density, f)?;
    let yg = s0_apply(density, g)?;
    let z: C64 = rule.integrate(|x| f.eval(x).conj() * yg.eval(x) - yf.eval(x).conj() * g.eval(x));
    Ok(z.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn y_on_constants_and_plane_waves() {
        let y1 = s0_apply(&Gaussian, &ExpCombination::exp(0.0)).unwrap();
        assert_eq!(y1.terms, vec![(C64::new(0.0, 0.0), C64::new(0.0, -1.0), 0.0)]);
        let y = s0_apply(&Gaussian, &ExpCombination::exp(1.0)).unwrap();
        assert_eq!(y.terms, vec![(C64::new(-1.0, 0.0), C64::new(0.0, -1.0), 1.0)]);
    }

    #[test]
    fn symbolic_y_matches_finite_difference() {
        let f = ExpCombination::new(vec![(C64::new(0.4, -0.2), 1.3), (C64::new(-1.0, 0.5), -2.1)]);
        let y = s0_apply(&Gaussian, &f).unwrap();
        let h = 1e-5;
        for lambda in [-1.0, 0.0, 0.7] {
            let d = (f.eval(lambda + h) - f.eval(lambda - h)) / (2.0 * h);
            let direct = C64::new(0.0, 1.0) * d + C64::new(0.0, 0.5) * Gaussian.log_derivative(lambda) * f.eval(lambda);
            assert!((direct - y.eval(lambda)).norm() < 1e-8);
        }
    }

    #[test]
    fn gaussian_log_derivative_matches_density() {
        let h = 1e-6;
        for lambda in [-0.8, 0.0, 1.5] {
            let d = (Gaussian.value(lambda + h).ln() - Gaussian.value(lambda - h).ln()) / (2.0 * h);
            assert!((d - Gaussian.log_derivative(lambda)).abs() < 1e-8);
        }
    }

    #[test]
    fn strong_relation_is_exact() {
        assert_eq!(s0_strong_relation_check(2.0, 3.0).unwrap(), StrongRelation { exact: true, coefficient_defect: 0.0 });
        assert!(s0_strong_relation_check(0.0, 0.0).unwrap().exact);
        assert!(s0_strong_relation_check(0.1, 0.2).unwrap().exact);
        assert!(s0_strong_relation_check(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn symmetry_residuals() {
        let one = ExpCombination::exp(0.0);
        assert!(s0_symmetry_residual(&one, &one).unwrap() <= 1e-12);
        let e = ExpCombination::exp(1.0);
        assert!(s0_symmetry_residual(&e, &e).unwrap() <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = ExpCombination::random(&mut rng, 3, 4.0);
            let g = ExpCombination::random(&mut rng, 3, 4.0);
            assert!(s0_symmetry_residual(&f, &g).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn low_order_is_refused() {
        let e = ExpCombination::exp(10.0);
        assert!(s0_symmetry_residual_with_order(&Gaussian, &e, &e, 64).is_err());
        assert!(s0_symmetry_residual(&e, &e).is_ok());
    }
}
