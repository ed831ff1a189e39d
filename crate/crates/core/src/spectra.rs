//! Model spectra: harmonic oscillators, the hydrogen point spectrum and the
//! truncated Rabi Hamiltonian.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::HermitianMatrix;
use crate::{Error, Result};

/// Where the eigenvalues of the untruncated model accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    ToZero,
    ToInfinity,
}

impl Accumulation {
    pub fn flipped(self) -> Self {
        match self {
            Accumulation::ToZero => Accumulation::ToInfinity,
            Accumulation::ToInfinity => Accumulation::ToZero,
        }
    }
}

/// One eigenvalue together with its multiplicity. Serialized as `[value, multiplicity]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, usize)", into = "(f64, usize)")]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

impl From<(f64, usize)> for Level {
    fn from((value, multiplicity): (f64, usize)) -> Self {
        Level { value, multiplicity }
    }
}

impl From<Level> for (f64, usize) {
    fn from(l: Level) -> Self {
        (l.value, l.multiplicity)
    }
}

#[derive(Deserialize)]
struct RawSpectrum {
    label: String,
    accumulation: Accumulation,
    entries: Vec<Level>,
}

/// A truncated discrete spectrum: strictly increasing eigenvalues with
/// multiplicities.
///
/// A spectrum accumulating at zero never contains zero itself. The negative
/// sign convention `E_1 < E_2 < ... < 0` of bound-state spectra is enforced by
/// the consumers that rely on it (see [`crate::uwform::uwform_point`]), not
/// here, so that reciprocals and `f`-transforms of spectra stay representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum")]
pub struct DiscreteSpectrum {
    label: String,
    accumulation: Accumulation,
    entries: Vec<Level>,
}

impl TryFrom<RawSpectrum> for DiscreteSpectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        DiscreteSpectrum::new(raw.entries, raw.accumulation, raw.label)
    }
}

impl DiscreteSpectrum {
    pub fn new(entries: Vec<Level>, accumulation: Accumulation, label: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues".into()));
        }
        for (i, l) in entries.iter().enumerate() {
            if !l.value.is_finite() {
                return Err(Error::InvalidSpectrum(format!("non-finite eigenvalue at index {i}")));
            }
            if l.multiplicity == 0 {
                return Err(Error::InvalidSpectrum(format!("zero multiplicity at index {i}")));
            }
        }
        for (i, w) in entries.windows(2).enumerate() {
            if w[1].value == w[0].value {
                return Err(Error::DuplicateEigenvalue { i, j: i + 1, first: w[0].value, second: w[1].value });
            }
            if w[1].value < w[0].value {
                return Err(Error::InvalidSpectrum(format!("eigenvalues not increasing at index {}", i + 1)));
            }
        }
        if accumulation == Accumulation::ToZero {
            if let Some(i) = entries.iter().position(|l| l.value == 0.0) {
                return Err(Error::ZeroEigenvalue(i));
            }
        }
        Ok(Self { label: label.into(), accumulation, entries })
    }

    /// Builds a spectrum from unsorted `(value, multiplicity)` pairs, merging
    /// values that agree within `merge_tol` (absolute).
    pub fn from_unsorted(
        mut pairs: Vec<(f64, usize)>,
        merge_tol: f64,
        accumulation: Accumulation,
        label: impl Into<String>,
    ) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<Level> = Vec::new();
        let mut anchor = f64::NAN;
        for (value, multiplicity) in pairs {
            match entries.last_mut() {
                Some(last) if value - anchor <= merge_tol => last.multiplicity += multiplicity,
                _ => {
                    anchor = value;
                    entries.push(Level { value, multiplicity });
                }
            }
        }
        Self::new(entries, accumulation, label)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn accumulation(&self) -> Accumulation {
        self.accumulation
    }

    pub fn entries(&self) -> &[Level] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|l| l.value).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.entries.iter().map(|l| l.multiplicity).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of states, i.e. the sum of multiplicities.
    pub fn total_states(&self) -> usize {
        self.entries.iter().map(|l| l.multiplicity).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.entries.iter().all(|l| l.multiplicity == 1)
    }
}

impl fmt::Display for DiscreteSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} levels, {} states)", self.label, self.len(), self.total_states())
    }
}

/// Spectrum of `Σ_j ω_j (a_j^* a_j + 1/2)` over the lattice points with `Σ_j n_j ≤ n_max`.
///
/// Sums that agree within `1e-10 · max ω` are treated as one degenerate level.
pub fn harmonic_spectrum(omega: &[f64], n_max: usize) -> Result<DiscreteSpectrum> {
    if omega.is_empty() {
        return Err(Error::param("omega", "at least one frequency is required"));
    }
    if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::param("omega", format!("frequencies must be positive, got {w}")));
    }
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let omega_max = omega.iter().copied().fold(0.0, f64::max);
    let zero_point: f64 = omega.iter().map(|w| 0.5 * w).sum();

    let mut values = Vec::new();
    let mut occupation = vec![0usize; omega.len()];
    collect_lattice(omega, n_max, 0, &mut occupation, &mut values);

    let pairs = values.into_iter().map(|v| (v + zero_point, 1)).collect();
    DiscreteSpectrum::from_unsorted(
        pairs,
        1e-10 * omega_max,
        Accumulation::ToInfinity,
        format!("harmonic omega={omega:?} n_max={n_max}"),
    )
}

fn collect_lattice(omega: &[f64], budget: usize, axis: usize, occ: &mut Vec<usize>, out: &mut Vec<f64>) {
    if axis == omega.len() {
        out.push(occ.iter().zip(omega).map(|(&n, w)| n as f64 * w).sum());
        return;
    }
    for n in 0..=budget {
        occ[axis] = n;
        collect_lattice(omega, budget - n, axis + 1, occ, out);
    }
    occ[axis] = 0;
}

/// Bound-state energies `-m γ² / (2 n²)` of the Coulomb problem for `n = 1..=n_max`.
///
/// The multiplicity `n²` is the textbook degeneracy of the hydrogen level
/// (spin ignored); it is an input to this model rather than something derived
/// here.
pub fn hydrogen_point_spectrum(m: f64, gamma: f64, n_max: usize) -> Result<DiscreteSpectrum> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::param("m", "mass must be positive"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::param("gamma", "coupling must be positive"));
    }
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let entries = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            Level { value: -m * gamma * gamma / (2.0 * nf * nf), multiplicity: n * n }
        })
        .collect();
    DiscreteSpectrum::new(entries, Accumulation::ToZero, format!("hydrogen m={m} gamma={gamma} n_max={n_max}"))
}

/// Matrix of `μ σ_z ⊗ 1 + ω 1 ⊗ a^*a + g σ_x ⊗ (a + a^*)` on `C² ⊗ span{|0>, ..., |cutoff>}`.
///
/// Basis index `s · (cutoff + 1) + n` holds spin `s` (0 = up, `σ_z = +1`) and
/// photon number `n`. Couplings that would leave the truncated Fock space are
/// dropped.
pub fn rabi_hamiltonian(mu: f64, omega: f64, g: f64, fock_cutoff: usize) -> Result<HermitianMatrix> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::param("mu", "must be positive"));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param("omega", "must be positive"));
    }
    if !g.is_finite() {
        return Err(Error::param("g", "must be finite"));
    }
    if fock_cutoff < 2 {
        return Err(Error::param("fock_cutoff", "must be at least 2"));
    }
    let nf = fock_cutoff + 1;
    let dim = 2 * nf;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for s in 0..2 {
        let sz = if s == 0 { 1.0 } else { -1.0 };
        for n in 0..nf {
            h[(s * nf + n, s * nf + n)] = C64::new(mu * sz + omega * n as f64, 0.0);
            if n + 1 < nf {
                // σ_x flips the spin, a + a^* moves n <-> n + 1
                let c = C64::new(g * ((n + 1) as f64).sqrt(), 0.0);
                let (i, j) = (s * nf + n, (1 - s) * nf + n + 1);
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
        }
    }
    let labels = (0..2)
        .flat_map(|s| (0..nf).map(move |n| format!("{}{}", if s == 0 { "up" } else { "down" }, n)))
        .collect();
    HermitianMatrix::new(h, labels)
}

/// For `n < count`, whether the `2n`-th eigenvalue (ascending, with
/// multiplicity) lies in `[ωn - g²/ω - μ, ωn - g²/ω + μ]`.
pub fn rabi_bound_check(eigenvalues: &[f64], mu: f64, omega: f64, g: f64, count: usize) -> Result<Vec<bool>> {
    if 2 * count > eigenvalues.len() {
        return Err(Error::param(
            "count",
            format!("{count} levels need {} eigenvalues, have {}", 2 * count, eigenvalues.len()),
        ));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("eigenvalues", "must be sorted ascending"));
    }
    Ok((0..count)
        .map(|n| {
            let nu = omega * n as f64 - g * g / omega;
            let e = eigenvalues[2 * n];
            nu - mu <= e && e <= nu + mu
        })
        .collect())
}

/// The spectrum of `H^{-1}`: reciprocals, re-sorted, with the accumulation
/// point swapped between zero and infinity.
pub fn invert_spectrum(s: &DiscreteSpectrum) -> Result<DiscreteSpectrum> {
    if let Some(i) = s.entries.iter().position(|l| l.value == 0.0) {
        return Err(Error::ZeroEigenvalue(i));
    }
    let mut entries: Vec<Level> =
        s.entries.iter().map(|l| Level { value: 1.0 / l.value, multiplicity: l.multiplicity }).collect();
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    let label = match s.label.strip_prefix("inverse of ") {
        Some(inner) => inner.to_string(),
        None => format!("inverse of {}", s.label),
    };
    DiscreteSpectrum::new(entries, s.accumulation.flipped(), label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn one_dimensional_oscillator() {
        let s = harmonic_spectrum(&[1.0], 3).unwrap();
        assert_eq!(s.values(), vec![0.5, 1.5, 2.5, 3.5]);
        assert!(s.is_simple());
        assert_eq!(s.accumulation(), Accumulation::ToInfinity);
    }

    #[test]
    fn isotropic_oscillator_degeneracy() {
        let s = harmonic_spectrum(&[1.0, 1.0], 2).unwrap();
        assert_eq!(s.values(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.multiplicities(), vec![1, 2, 3]);
        for d in 1..=3 {
            let s = harmonic_spectrum(&vec![1.0; d], 10).unwrap();
            for (n, l) in s.entries().iter().enumerate() {
                assert_eq!(l.multiplicity, binomial(n + d - 1, d - 1), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn incommensurate_frequencies_are_simple() {
        // lattice points with n1 + n2 <= 2: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
        let r2 = 2f64.sqrt();
        let s = harmonic_spectrum(&[1.0, r2], 2).unwrap();
        let mut expected: Vec<f64> = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
            .iter()
            .map(|&(a, b)| (a as f64 + 0.5) + r2 * (b as f64 + 0.5))
            .collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(s.len(), 6);
        assert!(s.is_simple());
        for (a, b) in s.values().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn harmonic_rejects_bad_frequencies() {
        assert!(harmonic_spectrum(&[], 3).is_err());
        assert!(harmonic_spectrum(&[1.0, 0.0], 3).is_err());
        assert!(harmonic_spectrum(&[-1.0], 3).is_err());
    }

    #[test]
    fn hydrogen_levels() {
        let s = hydrogen_point_spectrum(1.0, 1.0, 2).unwrap();
        assert_eq!(s.entries(), &[Level { value: -0.5, multiplicity: 1 }, Level { value: -0.125, multiplicity: 4 }]);
        let s = hydrogen_point_spectrum(1.0, 1.0, 1).unwrap();
        assert_eq!(s.entries(), &[Level { value: -0.5, multiplicity: 1 }]);
        let s = hydrogen_point_spectrum(2.0, 0.5, 3).unwrap();
        let expect = [(-0.25, 1), (-0.0625, 4), (-0.25 / 9.0, 9)];
        for (l, (v, m)) in s.entries().iter().zip(expect) {
            assert!((l.value - v).abs() < 1e-15);
            assert_eq!(l.multiplicity, m);
        }
        let s = hydrogen_point_spectrum(1.0, 1.0, 7).unwrap();
        assert_eq!(s.total_states(), (1..=7).map(|n| n * n).sum::<usize>());
        assert_eq!(s.accumulation(), Accumulation::ToZero);
    }

    #[test]
    fn decoupled_rabi_is_exact() {
        let h = rabi_hamiltonian(0.5, 1.0, 0.0, 2).unwrap();
        assert_eq!(h.dimension(), 6);
        let eig = h.eigenvalues();
        let expected = [-0.5, 0.5, 0.5, 1.5, 1.5, 2.5];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(rabi_bound_check(&eig, 0.5, 1.0, 0.0, 3).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn rabi_is_hermitian_and_ground_state_bounded() {
        let h = rabi_hamiltonian(0.5, 1.0, 0.3, 50).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        let h = rabi_hamiltonian(0.5, 1.0, 0.3, 200).unwrap();
        let e0 = h.eigenvalues()[0];
        assert!((-0.59..=0.41).contains(&e0), "{e0}");
    }

    #[test]
    fn shifted_eigenvalues_violate_bound() {
        let eig: Vec<f64> = rabi_hamiltonian(0.5, 1.0, 0.3, 60).unwrap().eigenvalues().iter().map(|e| e + 2.0 * 0.5).collect();
        let checks = rabi_bound_check(&eig, 0.5, 1.0, 0.3, 5).unwrap();
        assert!(!checks[0]);
        assert!(rabi_bound_check(&eig, 0.5, 1.0, 0.3, eig.len()).is_err());
    }

    #[test]
    fn inversion() {
        let s = hydrogen_point_spectrum(1.0, 1.0, 2).unwrap();
        let inv = invert_spectrum(&s).unwrap();
        assert_eq!(inv.entries(), &[Level { value: -8.0, multiplicity: 4 }, Level { value: -2.0, multiplicity: 1 }]);
        assert_eq!(inv.accumulation(), Accumulation::ToInfinity);
        assert_eq!(invert_spectrum(&inv).unwrap(), s);

        let entries = (1..=5).map(|n| Level { value: -1.0 / (n * n) as f64, multiplicity: 1 }).collect();
        let s = DiscreteSpectrum::new(entries, Accumulation::ToZero, "x").unwrap();
        let inv = invert_spectrum(&s).unwrap();
        for (v, e) in inv.values().iter().zip([-25.0, -16.0, -9.0, -4.0, -1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_rejects_zero() {
        let s = DiscreteSpectrum::new(vec![Level { value: 0.0, multiplicity: 1 }, Level { value: 1.0, multiplicity: 1 }], Accumulation::ToInfinity, "z").unwrap();
        assert_eq!(invert_spectrum(&s), Err(Error::ZeroEigenvalue(0)));
    }

    #[test]
    fn invariants_enforced_on_construction() {
        let l = |v, m| Level { value: v, multiplicity: m };
        assert!(DiscreteSpectrum::new(vec![l(1.0, 1), l(1.0, 1)], Accumulation::ToInfinity, "").is_err());
        assert!(DiscreteSpectrum::new(vec![l(2.0, 1), l(1.0, 1)], Accumulation::ToInfinity, "").is_err());
        assert!(DiscreteSpectrum::new(vec![l(1.0, 0)], Accumulation::ToInfinity, "").is_err());
        assert!(DiscreteSpectrum::new(vec![l(-1.0, 1), l(0.0, 1)], Accumulation::ToZero, "").is_err());
    }

    #[test]
    fn json_schema() {
        let s = hydrogen_point_spectrum(1.0, 1.0, 2).unwrap();
        let js = serde_json::to_value(&s).unwrap();
        assert_eq!(js["accumulation"], "to_zero");
        assert_eq!(js["entries"], serde_json::json!([[-0.5, 1], [-0.125, 4]]));
        let back: DiscreteSpectrum = serde_json::from_value(js).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"label": "", "accumulation": "to_zero", "entries": [[-1.0, 1], [-2.0, 1]]});
        assert!(serde_json::from_value::<DiscreteSpectrum>(bad).is_err());
    }
}
