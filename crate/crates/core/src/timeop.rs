//! Galapon-type time operators on simple channels and their direct sums.
//!
//! For a simple spectrum `E_1 < ... < E_N` with eigenvectors `e_n`, the matrix
//! with entries `T_{nk} = i/(E_n - E_k)` (zero diagonal) satisfies
//! `[H, T] = i(J - 1)`, `J` the all-ones matrix. On the span of differences
//! `e_n - e_m` the `J` term vanishes and `[H, T] = -i` holds exactly; no
//! truncation error enters.
//!
//! The inverse-conjugate variant `T_{nk} = i E_n E_k / (E_k - E_n)` is the same
//! construction for `H^{-1}` written in the eigenbasis of `H`; it is the time
//! operator used for spectra accumulating at zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::decompose::ChannelDecomposition;
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, max_abs};
use crate::spectra::Accumulation;
use crate::{Error, Result};

/// Channels above this size are rejected; dense eigensolves are O(N³).
pub const MAX_CHANNEL: usize = 4096;

/// Relative tolerance of the zero-sum test for membership in the difference span.
pub const DIFFERENCE_SPAN_TOL: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOperatorKind {
    /// `i/(E_n - E_k)`: a time operator of `H`.
    Direct,
    /// `i E_n E_k/(E_k - E_n)`: a time operator of `H^{-1}`.
    InverseConjugate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeOperatorMatrix {
    eigenvalues: Vec<f64>,
    data: DMatrix<C64>,
    kind: TimeOperatorKind,
}

impl TimeOperatorMatrix {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn kind(&self) -> TimeOperatorKind {
        self.kind
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.data)
    }

    /// Diagonal of the operator this matrix is a time operator of: `E` for
    /// [`TimeOperatorKind::Direct`], `1/E` for [`TimeOperatorKind::InverseConjugate`].
    pub fn generator(&self) -> Vec<f64> {
        generator(&self.eigenvalues, self.kind)
    }
}

fn generator(eigenvalues: &[f64], kind: TimeOperatorKind) -> Vec<f64> {
    match kind {
        TimeOperatorKind::Direct => eigenvalues.to_vec(),
        TimeOperatorKind::InverseConjugate => eigenvalues.iter().map(|e| 1.0 / e).collect(),
    }
}

/// Time-operator matrix of a simple channel in its eigenbasis.
pub fn galapon_matrix(eigenvalues: &[f64], kind: TimeOperatorKind) -> Result<TimeOperatorMatrix> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(Error::param("eigenvalues", "channel is empty"));
    }
    if n > MAX_CHANNEL {
        return Err(Error::TooLarge { size: n, limit: MAX_CHANNEL });
    }
    if let Some(i) = eigenvalues.iter().position(|e| !e.is_finite()) {
        return Err(Error::param("eigenvalues", format!("non-finite eigenvalue at index {i}")));
    }
    for (i, w) in eigenvalues.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::DuplicateEigenvalue { i, j: i + 1, first: w[0], second: w[1] });
        }
        if w[1] < w[0] {
            return Err(Error::param("eigenvalues", format!("not increasing at index {}", i + 1)));
        }
    }
    if kind == TimeOperatorKind::InverseConjugate {
        if let Some(i) = eigenvalues.iter().position(|&e| e == 0.0) {
            return Err(Error::ZeroEigenvalue(i));
        }
    }
    let e = eigenvalues;
    let data = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            return C64::new(0.0, 0.0);
        }
        match kind {
            TimeOperatorKind::Direct => I / (e[r] - e[c]),
            TimeOperatorKind::InverseConjugate => I * (e[r] * e[c] / (e[c] - e[r])),
        }
    });
    Ok(TimeOperatorMatrix { eigenvalues: eigenvalues.to_vec(), data, kind })
}

/// `Σ_n v_n`; zero exactly on the span of differences `e_n - e_m`.
fn coefficient_sum(v: &DVector<C64>) -> C64 {
    v.iter().sum()
}

fn check_difference_span(v: &DVector<C64>) -> Result<()> {
    let defect = coefficient_sum(v).norm();
    let allowed = DIFFERENCE_SPAN_TOL * v.norm();
    if defect > allowed {
        return Err(Error::OutsideDomain { domain: "difference-span", defect, allowed });
    }
    Ok(())
}

/// `‖[G, T] v + i v‖` with `G = diag(generator)`.
fn commutator_defect(gen: &[f64], t: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    let tv = t * v;
    let gv = DVector::from_iterator(v.len(), v.iter().zip(gen).map(|(x, g)| x * g));
    let tgv = t * gv;
    let mut r = 0.0;
    for k in 0..v.len() {
        let z = tv[k] * gen[k] - tgv[k] + I * v[k];
        r += z.norm_sqr();
    }
    r.sqrt()
}

/// Residual of the canonical commutation relation on a vector of the difference span.
///
/// The commutator is taken with `diag(eigenvalues)` for a direct time operator
/// and with `diag(1/eigenvalues)` for an inverse-conjugate one, i.e. with the
/// operator `T` is a time operator of.
pub fn ccr_residual(eigenvalues: &[f64], t: &TimeOperatorMatrix, v: &DVector<C64>) -> Result<f64> {
    if eigenvalues.len() != t.dimension() {
        return Err(Error::DimensionMismatch { expected: t.dimension(), found: eigenvalues.len() });
    }
    if v.len() != t.dimension() {
        return Err(Error::DimensionMismatch { expected: t.dimension(), found: v.len() });
    }
    check_difference_span(v)?;
    Ok(commutator_defect(&generator(eigenvalues, t.kind), &t.data, v))
}

/// `e_k - e_l` in a space of dimension `n`.
pub fn difference_vector(n: usize, k: usize, l: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n);
    v[k] += C64::new(1.0, 0.0);
    v[l] -= C64::new(1.0, 0.0);
    v
}

/// Largest CCR residual over all `e_k - e_l` of one channel; zero for 1-element channels.
pub fn max_difference_residual(t: &TimeOperatorMatrix) -> f64 {
    let n = t.dimension();
    let gen = t.generator();
    let mut worst = 0.0_f64;
    for k in 0..n {
        for l in (k + 1)..n {
            worst = worst.max(commutator_defect(&gen, &t.data, &difference_vector(n, k, l)));
        }
    }
    worst
}

/// One diagonal block of a direct sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub h: Vec<f64>,
    pub t: TimeOperatorMatrix,
}

/// Block-diagonal `H ⊕ ...` and `T ⊕ ...` over a concatenated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

impl BlockOperator {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.h.len()).sum()
    }

    pub fn dense_h(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dimension(), self.dimension());
        for (b, &o) in self.blocks.iter().zip(&self.offsets) {
            for (i, &e) in b.h.iter().enumerate() {
                m[(o + i, o + i)] = C64::new(e, 0.0);
            }
        }
        m
    }

    pub fn dense_t(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (b, &o) in self.blocks.iter().zip(&self.offsets) {
            let d = b.h.len();
            m.view_mut((o, o), (d, d)).copy_from(&b.t.data);
        }
        m
    }

    /// CCR residual on the algebraic direct sum of the blocks' difference spans.
    pub fn ccr_residual(&self, v: &DVector<C64>) -> Result<f64> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: v.len() });
        }
        let mut total = 0.0;
        for (b, &o) in self.blocks.iter().zip(&self.offsets) {
            let part = v.rows(o, b.h.len()).into_owned();
            let r = ccr_residual(&b.h, &b.t, &part)?;
            total += r * r;
        }
        Ok(total.sqrt())
    }

    pub fn max_abs_t(&self) -> f64 {
        self.blocks.iter().map(|b| b.t.max_abs()).fold(0.0, f64::max)
    }
}

pub fn direct_sum(blocks: Vec<(Vec<f64>, TimeOperatorMatrix)>) -> Result<BlockOperator> {
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    let mut out = Vec::with_capacity(blocks.len());
    for (h, t) in blocks {
        if h.len() != t.dimension() {
            return Err(Error::DimensionMismatch { expected: t.dimension(), found: h.len() });
        }
        offsets.push(offset);
        offset += h.len();
        out.push(Block { h, t });
    }
    Ok(BlockOperator { blocks: out, offsets })
}

/// Per-channel time operators for a decomposed spectrum, assembled into a direct sum.
///
/// Spectra accumulating at infinity get direct time operators of `H`; spectra
/// accumulating at zero get inverse-conjugate time operators of `H^{-1}`.
pub fn assemble(c: &ChannelDecomposition) -> Result<BlockOperator> {
    let kind = match c.source().accumulation() {
        Accumulation::ToInfinity => TimeOperatorKind::Direct,
        Accumulation::ToZero => TimeOperatorKind::InverseConjugate,
    };
    let blocks = (0..c.channel_count())
        .map(|j| {
            let e = c.channel_spectrum(j);
            galapon_matrix(&e, kind).map(|t| (e, t))
        })
        .collect::<Result<Vec<_>>>()?;
    direct_sum(blocks)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatorSpectrum {
    pub eigenvalues: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

/// Eigenvalues of the `n × n` truncation of the oscillator time operator,
/// the Hermitian Toeplitz matrix with entries `(i/ω)/(j - k)`.
///
/// The closure of the untruncated operator has spectrum `[-π/ω, π/ω]`.
pub fn osc_timeop_spectrum(omega: f64, n: usize) -> Result<OscillatorSpectrum> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param("omega", "must be positive"));
    }
    if n < 2 {
        return Err(Error::param("n", "matrix size must be at least 2"));
    }
    let levels: Vec<f64> = (0..n).map(|k| omega * (k as f64 + 0.5)).collect();
    let t = galapon_matrix(&levels, TimeOperatorKind::Direct)?;
    let eigenvalues = hermitian_eigenvalues(&t.data);
    let min = eigenvalues[0];
    let max = eigenvalues[n - 1];
    Ok(OscillatorSpectrum { eigenvalues, min, max })
}
