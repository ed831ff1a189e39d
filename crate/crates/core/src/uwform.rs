//! Ultra-weak time operators on the point spectrum.
//!
//! For a simple channel with eigenvalues `E_n` (nonzero, accumulating at zero)
//! let `S` be the time operator of `H^{-1}` and define
//!
//! ```text
//! t[φ, ψ] = -1/2 { (Sφ, H^{-2}ψ) + (H^{-2}φ, Sψ) }.
//! ```
//!
//! On `Ẽ = H^{-1}E`, the image of the difference span, the identity
//! `t[Hφ, ψ] - t[φ, Hψ] = -i(φ, ψ)` is finite algebra and holds exactly at
//! truncation. Direct sums over channels inherit it blockwise. Whether some
//! operator represents `t` is not addressed; only the form is evaluated.
//!
//! `H^{-2}` is applied as exact diagonal arithmetic, never by inversion.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose_spectrum, ChannelDecomposition, DEFAULT_EXPONENT};
use crate::sampling::random_in_kernel;
use crate::spectra::{Accumulation, DiscreteSpectrum};
use crate::timeop::{galapon_matrix, TimeOperatorKind, TimeOperatorMatrix};
use crate::{Error, Result};

/// Relative tolerance of the `Σ E_n c_n = 0` membership test for `Ẽ`.
pub const UW_DOMAIN_TOL: f64 = 1e-10;
/// Unit-norm tolerance for [`uncertainty_check`].
pub const UNIT_TOL: f64 = 1e-12;
/// Slack allowed on the uncertainty bound and the imaginary-part identity.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

/// One simple channel: `H = diag(E)` and `S`, the time operator of `H^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormChannel {
    energies: Vec<f64>,
    s: TimeOperatorMatrix,
    inv_sq: Vec<f64>,
}

impl FormChannel {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn inverse_time_operator(&self) -> &TimeOperatorMatrix {
        &self.s
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    fn evaluate(&self, phi: &DVector<C64>, psi: &DVector<C64>) -> C64 {
        let s = self.s.data();
        let h2 = |v: &DVector<C64>| DVector::from_iterator(v.len(), v.iter().zip(&self.inv_sq).map(|(x, w)| x * *w));
        -0.5 * (inner(&(s * phi), &h2(psi)) + inner(&h2(phi), &(s * psi)))
    }

    /// Coefficient matrix `A` with `t[φ, ψ] = φ^† A ψ`.
    fn kernel(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let s = self.s.data();
        DMatrix::from_fn(n, n, |r, c| -0.5 * s[(r, c)] * (self.inv_sq[r] + self.inv_sq[c]))
    }
}

/// The form `t_p = Σ_j t_j` over a direct sum of channels.
///
/// Its symmetric domain is the whole truncated space (the span of the
/// eigenvectors); its ultra-weak CCR domain is the direct sum of the
/// `H_j^{-1} E_j`, i.e. coefficient vectors with `Σ_n E_n c_n = 0` on every
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SesquilinearForm {
    channels: Vec<FormChannel>,
    offsets: Vec<usize>,
}

impl SesquilinearForm {
    pub fn channels(&self) -> &[FormChannel] {
        &self.channels
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dimension(&self) -> usize {
        self.channels.iter().map(FormChannel::dimension).sum()
    }

    /// Diagonal of `H` over the concatenated basis.
    pub fn energies(&self) -> Vec<f64> {
        self.channels.iter().flat_map(|c| c.energies.iter().copied()).collect()
    }

    fn check_len(&self, v: &DVector<C64>) -> Result<()> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: v.len() });
        }
        Ok(())
    }

    /// `t[φ, ψ]`, antilinear in `φ`.
    pub fn evaluate(&self, phi: &DVector<C64>, psi: &DVector<C64>) -> Result<C64> {
        self.check_len(phi)?;
        self.check_len(psi)?;
        Ok(self
            .channels
            .iter()
            .zip(&self.offsets)
            .map(|(c, &o)| {
                let d = c.dimension();
                c.evaluate(&phi.rows(o, d).into_owned(), &psi.rows(o, d).into_owned())
            })
            .sum())
    }

    /// `Hv` with `H` diagonal in the channel eigenbasis.
    pub fn apply_h(&self, v: &DVector<C64>) -> DVector<C64> {
        let e = self.energies();
        DVector::from_iterator(v.len(), v.iter().zip(&e).map(|(x, e)| x * *e))
    }

    /// Dense coefficient matrix of the whole form.
    pub fn kernel(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (c, &o) in self.channels.iter().zip(&self.offsets) {
            let d = c.dimension();
            m.view_mut((o, o), (d, d)).copy_from(&c.kernel());
        }
        m
    }

    /// Largest per-channel `|Σ_n E_n c_n|`, relative to `‖E‖‖c‖`.
    pub fn uw_domain_defect(&self, v: &DVector<C64>) -> f64 {
        let mut worst = 0.0_f64;
        for (c, &o) in self.channels.iter().zip(&self.offsets) {
            let part = v.rows(o, c.dimension());
            let s: C64 = part.iter().zip(&c.energies).map(|(x, e)| x * *e).sum();
            let e_norm = c.energies.iter().map(|e| e * e).sum::<f64>().sqrt();
            let scale = e_norm * part.norm();
            let d = if scale > 0.0 { s.norm() / scale } else { s.norm() };
            worst = worst.max(d);
        }
        worst
    }

    pub fn check_uw_domain(&self, v: &DVector<C64>) -> Result<()> {
        self.check_len(v)?;
        let defect = self.uw_domain_defect(v);
        if defect > UW_DOMAIN_TOL {
            return Err(Error::OutsideDomain { domain: "ultra-weak CCR", defect, allowed: UW_DOMAIN_TOL });
        }
        Ok(())
    }

    /// A seeded unit vector of `Ẽ`, drawn channelwise; `None` if every channel is one-dimensional.
    pub fn random_uw_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<DVector<C64>> {
        let mut v = DVector::zeros(self.dimension());
        let mut any = false;
        for (c, &o) in self.channels.iter().zip(&self.offsets) {
            if let Some(part) = random_in_kernel(rng, &c.energies) {
                v.rows_mut(o, c.dimension()).copy_from(&part);
                any = true;
            }
        }
        let n = v.norm();
        any.then(|| v / C64::new(n, 0.0))
    }

    /// A seeded unit vector of `Ẽ` supported on a single channel.
    pub fn random_channel_vector<R: Rng + ?Sized>(&self, rng: &mut R, channel: usize) -> Option<DVector<C64>> {
        let c = &self.channels[channel];
        let part = random_in_kernel(rng, &c.energies)?;
        let mut v = DVector::zeros(self.dimension());
        v.rows_mut(self.offsets[channel], c.dimension()).copy_from(&part);
        Some(v)
    }
}

/// Form for one simple channel; eigenvalues must be nonzero and strictly increasing.
///
/// Used directly for transformed spectra, whose values need not be negative.
pub fn uwform_channel(energies: &[f64]) -> Result<SesquilinearForm> {
    // the inverse-conjugate matrix i E_n E_k/(E_k - E_n) = i/(1/E_n - 1/E_k) is
    // the direct time operator of the reciprocal spectrum, in the basis of H
    let s = galapon_matrix(energies, TimeOperatorKind::InverseConjugate)?;
    let inv_sq = energies.iter().map(|e| 1.0 / (e * e)).collect();
    Ok(SesquilinearForm {
        channels: vec![FormChannel { energies: energies.to_vec(), s, inv_sq }],
        offsets: vec![0],
    })
}

/// Form for one simple channel of a bound-state spectrum `E_1 < E_2 < ... < 0`.
pub fn uwform_point(energies: &[f64]) -> Result<SesquilinearForm> {
    if let Some(i) = energies.iter().position(|e| *e >= 0.0) {
        return Err(Error::param("energies", format!("eigenvalue {} at index {i} is not negative", energies[i])));
    }
    uwform_channel(energies)
}

pub fn direct_sum_form(forms: Vec<SesquilinearForm>) -> Result<SesquilinearForm> {
    if forms.is_empty() {
        return Err(Error::param("forms", "no channels to sum"));
    }
    let mut channels = Vec::new();
    let mut offsets = Vec::new();
    let mut offset = 0;
    for form in forms {
        for c in form.channels {
            if c.energies.len() != c.s.dimension() || c.inv_sq.len() != c.energies.len() {
                return Err(Error::DimensionMismatch { expected: c.energies.len(), found: c.s.dimension() });
            }
            offsets.push(offset);
            offset += c.dimension();
            channels.push(c);
        }
    }
    Ok(SesquilinearForm { channels, offsets })
}

/// Decomposes a bound-state spectrum and builds the direct-sum form over its channels.
pub fn point_form(s: &DiscreteSpectrum) -> Result<(ChannelDecomposition, SesquilinearForm)> {
    if s.accumulation() != Accumulation::ToZero {
        return Err(Error::InvalidSpectrum("ultra-weak forms need a spectrum accumulating at zero".into()));
    }
    let c = decompose_spectrum(s, DEFAULT_EXPONENT)?;
    let forms = (0..c.channel_count()).map(|j| uwform_point(&c.channel_spectrum(j))).collect::<Result<Vec<_>>>()?;
    let form = direct_sum_form(forms)?;
    Ok((c, form))
}

/// `|t[Hφ, ψ] - t[φ, Hψ] + i(φ, ψ)|` for `φ, ψ ∈ Ẽ`.
pub fn uw_ccr_residual(form: &SesquilinearForm, phi: &DVector<C64>, psi: &DVector<C64>) -> Result<f64> {
    form.check_uw_domain(phi)?;
    form.check_uw_domain(psi)?;
    let lhs = form.evaluate(&form.apply_h(phi), psi)? - form.evaluate(phi, &form.apply_h(psi))?;
    Ok((lhs + I * inner(phi, psi)).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uncertainty {
    /// `|(t - a)[(H - b)ψ, ψ]|`
    pub value: f64,
    /// `Im (t - a)[(H - b)ψ, ψ]`, which equals `-1/2` exactly.
    pub imaginary_part: f64,
    pub im_identity_defect: f64,
    pub passes: bool,
}

/// Evaluates the uncertainty bound `|(t - a)[(H - b)ψ, ψ]| ≥ 1/2` for a unit `ψ ∈ Ẽ`.
pub fn uncertainty_check(form: &SesquilinearForm, psi: &DVector<C64>, a: f64, b: f64) -> Result<Uncertainty> {
    form.check_uw_domain(psi)?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::param("psi", format!("must be a unit vector, norm is {norm}")));
    }
    let shifted = form.apply_h(psi) - psi * C64::new(b, 0.0);
    let z = form.evaluate(&shifted, psi)? - a * inner(&shifted, psi);
    let value = z.norm();
    let im_identity_defect = (z.im + 0.5).abs();
    Ok(Uncertainty {
        value,
        imaginary_part: z.im,
        im_identity_defect,
        passes: value >= 0.5 - UNCERTAINTY_TOL && im_identity_defect <= UNCERTAINTY_TOL,
    })
}

/// Real functions of `H` with an ultra-weak time operator on the point spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction", into = "RawFunction")]
pub enum FunctionSpec {
    /// `e^{-βx}`
    Exp(f64),
    /// `Σ_j a_j x^j`, coefficients from `a_0` up.
    Polynomial(Vec<f64>),
    /// `sin(2πβx)`
    Sin(f64),
}

#[derive(Serialize, Deserialize)]
struct RawFunction {
    kind: String,
    params: Vec<f64>,
}

impl TryFrom<RawFunction> for FunctionSpec {
    type Error = Error;

    fn try_from(raw: RawFunction) -> Result<Self> {
        let single = |name: &str| match raw.params.as_slice() {
            [b] => Ok(*b),
            _ => Err(Error::param("params", format!("`{name}` takes exactly one parameter"))),
        };
        let f = match raw.kind.as_str() {
            "exp" => FunctionSpec::Exp(single("exp")?),
            "sin" => FunctionSpec::Sin(single("sin")?),
            "poly" => FunctionSpec::Polynomial(raw.params.clone()),
            other => return Err(Error::param("kind", format!("unknown function kind `{other}`"))),
        };
        f.validate()?;
        Ok(f)
    }
}

impl From<FunctionSpec> for RawFunction {
    fn from(f: FunctionSpec) -> Self {
        match f {
            FunctionSpec::Exp(b) => RawFunction { kind: "exp".into(), params: vec![b] },
            FunctionSpec::Sin(b) => RawFunction { kind: "sin".into(), params: vec![b] },
            FunctionSpec::Polynomial(a) => RawFunction { kind: "poly".into(), params: a },
        }
    }
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Exp(b) | FunctionSpec::Sin(b) if *b == 0.0 || !b.is_finite() => {
                Err(Error::param("beta", "must be finite and nonzero"))
            }
            FunctionSpec::Polynomial(a) if a.is_empty() || *a.last().unwrap() == 0.0 => {
                Err(Error::param("params", "leading polynomial coefficient must be nonzero"))
            }
            FunctionSpec::Polynomial(a) if a.iter().any(|x| !x.is_finite()) => {
                Err(Error::param("params", "coefficients must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Exp(b) => (-b * x).exp(),
            FunctionSpec::Sin(b) => (2.0 * std::f64::consts::PI * b * x).sin(),
            FunctionSpec::Polynomial(a) => a.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    /// `f(x) - f(0)`. For polynomials the constant term is dropped symbolically.
    pub fn eval_shifted(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Exp(b) => (-b * x).exp_m1(),
            FunctionSpec::Sin(_) => self.eval(x),
            FunctionSpec::Polynomial(a) => x * a[1..].iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

/// `β = k / (2 E_level)`; `level` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SinWitness {
    pub k: i64,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// `f(E_n) ≠ f(0)` for every level.
    pub avoids_f0: bool,
    /// 1-based levels with `f(E_n) = f(0)`.
    pub f0_hits: Vec<usize>,
    pub levels: usize,
    /// Number of distinct values of `f` on the truncated spectrum.
    pub distinct_values: usize,
    /// 1-based level pairs mapped to the same value.
    pub collisions: Vec<(usize, usize)>,
    pub k_max: Option<i64>,
    pub sin_witnesses: Vec<SinWitness>,
    /// `Σ_{j≥1} a_j x^{j-1} ≠ 0` on `x ≥ 0`.
    pub polynomial_condition: Option<bool>,
    pub polynomial_witness: Option<f64>,
}

const F0_TOL: f64 = 1e-12;
const COLLISION_TOL: f64 = 1e-12;
const SIN_TOL: f64 = 1e-12;
const POLY_GRID: usize = 1000;

fn collision_tol(values: &[f64]) -> f64 {
    COLLISION_TOL * values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE)
}

/// Checks the admissibility conditions for `f(H)` over the truncated spectrum.
///
/// Whether `f` takes infinitely many values on the untruncated spectrum cannot
/// be decided here; the report gives the distinctness census instead.
pub fn f_condition_check(f: &FunctionSpec, s: &DiscreteSpectrum) -> Result<Admissibility> {
    f.validate()?;
    if s.accumulation() != Accumulation::ToZero {
        return Err(Error::InvalidSpectrum("admissibility is defined for spectra accumulating at zero".into()));
    }
    let e = s.values();
    let shifted: Vec<f64> = e.iter().map(|&x| f.eval_shifted(x)).collect();
    let scale = f.eval(0.0).abs().max(1.0);
    let f0_hits: Vec<usize> =
        shifted.iter().enumerate().filter(|(_, v)| v.abs() <= F0_TOL * scale).map(|(i, _)| i + 1).collect();

    let tol = collision_tol(&shifted);
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| shifted[a].total_cmp(&shifted[b]));
    let mut collisions = Vec::new();
    let mut distinct_values = 0;
    let mut anchor = f64::NAN;
    let mut anchor_level = 0;
    for &i in &order {
        if shifted[i] - anchor <= tol {
            collisions.push((anchor_level.min(i) + 1, anchor_level.max(i) + 1));
        } else {
            distinct_values += 1;
            anchor = shifted[i];
            anchor_level = i;
        }
    }

    let mut report = Admissibility {
        admissible: false,
        avoids_f0: f0_hits.is_empty(),
        f0_hits,
        levels: e.len(),
        distinct_values,
        collisions,
        k_max: None,
        sin_witnesses: Vec::new(),
        polynomial_condition: None,
        polynomial_witness: None,
    };

    match f {
        FunctionSpec::Sin(beta) => {
            let e_max = e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let k_max = (2.0 * beta.abs() * e_max).ceil() as i64 + 1;
            report.k_max = Some(k_max);
            for (n, &en) in e.iter().enumerate() {
                for k in (-k_max..=k_max).filter(|&k| k != 0) {
                    let candidate = k as f64 / (2.0 * en);
                    if (beta - candidate).abs() <= SIN_TOL * beta.abs() {
                        report.sin_witnesses.push(SinWitness { k, level: n + 1 });
                    }
                }
            }
        }
        FunctionSpec::Polynomial(a) => {
            let (ok, witness) = polynomial_condition(a, &e);
            report.polynomial_condition = Some(ok);
            report.polynomial_witness = witness;
        }
        FunctionSpec::Exp(_) => {}
    }

    report.admissible =
        report.avoids_f0 && report.sin_witnesses.is_empty() && report.polynomial_condition.unwrap_or(true);
    Ok(report)
}

/// Sign condition `g(x) = Σ_{j≥1} a_j x^{j-1} ≠ 0` on `x ≥ 0`: a grid scan over
/// `[0, 10 max|E|]` plus the real nonnegative roots of `g`. Any hit fails.
fn polynomial_condition(a: &[f64], e: &[f64]) -> (bool, Option<f64>) {
    let g: Vec<f64> = a[1..].to_vec();
    if g.iter().all(|&c| c == 0.0) {
        return (false, Some(0.0));
    }
    let eval = |x: f64| g.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let upper = 10.0 * e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut prev = eval(0.0);
    if prev == 0.0 {
        return (false, Some(0.0));
    }
    for i in 1..=POLY_GRID {
        let x = upper * i as f64 / POLY_GRID as f64;
        let y = eval(x);
        if y == 0.0 || y.signum() != prev.signum() {
            return (false, Some(x));
        }
        prev = y;
    }
    // trailing zero coefficients lower the degree
    let deg = g.iter().rposition(|&c| c != 0.0).unwrap();
    if deg == 0 {
        return (true, None);
    }
    let lead = g[deg];
    let companion = DMatrix::from_fn(deg, deg, |r, c| {
        if r == 0 {
            -g[deg - 1 - c] / lead
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    for z in companion.complex_eigenvalues().iter() {
        if z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) && z.re >= -1e-12 {
            return (false, Some(z.re.max(0.0)));
        }
    }
    (true, None)
}

/// The ultra-weak form of `f(H)` on the point spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FTransform {
    /// Spectrum of `f(H) - f(0)`, with coinciding values merged.
    pub spectrum: DiscreteSpectrum,
    pub decomposition: ChannelDecomposition,
    pub form: SesquilinearForm,
    /// `f(0)`; a scalar shift that drops out of every commutator.
    pub shift: f64,
}

/// Builds the form of `f(H)` from the form of `f̃(H) = f(H) - f(0)`.
pub fn f_transform_form(f: &FunctionSpec, s: &DiscreteSpectrum) -> Result<FTransform> {
    let report = f_condition_check(f, s)?;
    if !report.admissible {
        return Err(Error::NotAdmissible(format!(
            "f(E_n) = f(0) at levels {:?}, sin witnesses {:?}, polynomial condition {:?}",
            report.f0_hits, report.sin_witnesses, report.polynomial_condition
        )));
    }
    let shifted: Vec<f64> = s.values().iter().map(|&x| f.eval_shifted(x)).collect();
    let tol = collision_tol(&shifted);
    let pairs = shifted.iter().zip(s.multiplicities()).map(|(&v, m)| (v, m)).collect();
    let spectrum = DiscreteSpectrum::from_unsorted(pairs, tol, Accumulation::ToZero, format!("f~ of {}", s.label()))?;
    let decomposition = decompose_spectrum(&spectrum, DEFAULT_EXPONENT)?;
    let forms = (0..decomposition.channel_count())
        .map(|j| uwform_channel(&decomposition.channel_spectrum(j)))
        .collect::<Result<Vec<_>>>()?;
    let form = direct_sum_form(forms)?;
    Ok(FTransform { spectrum, decomposition, form, shift: f.eval(0.0) })
}
