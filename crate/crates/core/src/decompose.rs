//! Splitting a spectrum into simple channels with summable eigenvalues.
//!
//! A null sequence is partitioned greedily: the values are prescaled into
//! `(0, 1]`, grouped into buckets `J_k = {a : 1/(k+1) < |a| ≤ 1/k}`, and each
//! round extracts one element from every nonempty bucket into a new channel.
//! A channel therefore occupies strictly increasing bucket levels `k_1 < k_2 < ...`
//! and satisfies `Σ |a|^p ≤ Σ 1/k_n^p`.
//!
//! Degenerate spectra are first split into columns: copy `k` of every
//! eigenvalue with multiplicity at least `k` goes to column `k`. Each column is
//! simple and is partitioned as above. Spectra accumulating at infinity are
//! partitioned through their reciprocals.
//!
//! At finite truncation the column construction covers every multiplicity
//! pattern; the regrouping needed to keep infinitely many infinite channels in
//! the untruncated setting has no finite counterpart and is not modeled. The
//! element taken from a bucket is the one with the lowest original index. Any
//! choice would do, so the decomposition (and every time operator built on it)
//! is one of many valid ones.

use std::collections::{BTreeMap, VecDeque};

use serde::{Serialize, Serializer};

use crate::spectra::{Accumulation, DiscreteSpectrum, Level};
use crate::{Error, Result};

pub const DEFAULT_EXPONENT: f64 = 2.0;

/// The unique `k ≥ 1` with `1/(k+1) < |a| ≤ 1/k`.
///
/// The bucket edges are the floating-point values of `1/k`, so `a = 1.0 / 5.0`
/// lands in bucket 5.
pub fn bucket_index(a: f64) -> Result<u64> {
    let m = a.abs();
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::param("a", format!("|a| must lie in (0, 1], got {a}")));
    }
    let mut k = (1.0 / m).floor().max(1.0) as u64;
    while m > 1.0 / k as f64 {
        k -= 1;
    }
    while m <= 1.0 / (k + 1) as f64 {
        k += 1;
    }
    Ok(k)
}

/// One copy of one eigenvalue: `level` indexes the spectrum entries, `copy`
/// counts from 0 up to the multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub level: usize,
    pub copy: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition {
    source: DiscreteSpectrum,
    slots: Vec<Slot>,
    channels: Vec<Vec<usize>>,
    bucket_certificates: Vec<Vec<u64>>,
    p: f64,
    prescale: f64,
    /// Largest bucketed magnitude; values are divided by it before bucketing.
    divisor: f64,
}

impl ChannelDecomposition {
    /// Assembles a decomposition without checking it; see [`verify_decomposition`].
    pub fn from_parts(
        source: DiscreteSpectrum,
        slots: Vec<Slot>,
        channels: Vec<Vec<usize>>,
        bucket_certificates: Vec<Vec<u64>>,
        p: f64,
        prescale: f64,
    ) -> Self {
        Self { source, slots, channels, bucket_certificates, p, prescale, divisor: 1.0 / prescale }
    }

    pub fn source(&self) -> &DiscreteSpectrum {
        &self.source
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn channels(&self) -> &[Vec<usize>] {
        &self.channels
    }

    pub fn bucket_certificates(&self) -> &[Vec<u64>] {
        &self.bucket_certificates
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn prescale(&self) -> f64 {
        self.prescale
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Eigenvalue of a slot.
    pub fn slot_value(&self, slot: usize) -> f64 {
        self.source.entries()[self.slots[slot].level].value
    }

    /// Eigenvalues of a channel, in channel (bucket) order.
    pub fn channel_values(&self, channel: usize) -> Vec<f64> {
        self.channels[channel].iter().map(|&s| self.slot_value(s)).collect()
    }

    /// Eigenvalues of a channel sorted ascending, ready for a time operator.
    pub fn channel_spectrum(&self, channel: usize) -> Vec<f64> {
        let mut v = self.channel_values(channel);
        v.sort_by(f64::total_cmp);
        v
    }

    /// Value actually placed into buckets: the eigenvalue itself, or its
    /// reciprocal when the spectrum accumulates at infinity.
    fn bucketed(&self, value: f64) -> f64 {
        match self.source.accumulation() {
            Accumulation::ToZero => value,
            Accumulation::ToInfinity => 1.0 / value,
        }
    }

    /// Overwrites a channel; intended for building adversarial inputs to the verifier.
    pub fn set_channel(&mut self, channel: usize, slots: Vec<usize>, certificate: Vec<u64>) {
        self.channels[channel] = slots;
        self.bucket_certificates[channel] = certificate;
    }
}

impl Serialize for ChannelDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            prescale: f64,
            p: f64,
            channels: &'a [Vec<usize>],
            certificates: &'a [Vec<u64>],
        }
        Repr { prescale: self.prescale, p: self.p, channels: &self.channels, certificates: &self.bucket_certificates }
            .serialize(serializer)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("summability exponent must exceed 1, got {p}")));
    }
    Ok(())
}

type Rounds = (Vec<Vec<usize>>, Vec<Vec<u64>>);

/// Greedy bucket rounds over `(slot, magnitude)` items already scaled into (0, 1].
/// Items must be listed in tie-break order.
fn bucket_rounds(items: &[(usize, f64)]) -> Result<Rounds> {
    let mut buckets: BTreeMap<u64, VecDeque<usize>> = BTreeMap::new();
    for &(slot, a) in items {
        buckets.entry(bucket_index(a)?).or_default().push_back(slot);
    }
    let mut channels = Vec::new();
    let mut certificates = Vec::new();
    while buckets.values().any(|q| !q.is_empty()) {
        let mut channel = Vec::new();
        let mut cert = Vec::new();
        for (&k, queue) in buckets.iter_mut() {
            if let Some(slot) = queue.pop_front() {
                channel.push(slot);
                cert.push(k);
            }
        }
        channels.push(channel);
        certificates.push(cert);
    }
    Ok((channels, certificates))
}

/// Partitions a finite sequence of distinct nonzero reals into channels.
///
/// The result is expressed over a synthetic simple spectrum of the sorted
/// values; slot `i` is the `i`-th input value, so channels list original
/// indices (0-based).
pub fn partition_null_sequence(values: &[f64], p: f64) -> Result<ChannelDecomposition> {
    check_exponent(p)?;
    if values.is_empty() {
        return Err(Error::param("values", "sequence is empty"));
    }
    if let Some(i) = values.iter().position(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::ZeroEigenvalue(i));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    for w in order.windows(2) {
        if values[w[0]] == values[w[1]] {
            return Err(Error::DuplicateEigenvalue { i: w[0], j: w[1], first: values[w[0]], second: values[w[1]] });
        }
    }
    let entries = order.iter().map(|&i| Level { value: values[i], multiplicity: 1 }).collect();
    let source = DiscreteSpectrum::new(entries, Accumulation::ToZero, "sequence")?;
    let mut position = vec![0; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        position[i] = rank;
    }
    let slots: Vec<Slot> = position.iter().map(|&level| Slot { level, copy: 0 }).collect();

    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let prescale = 1.0 / max;
    let items: Vec<(usize, f64)> = values.iter().enumerate().map(|(i, v)| (i, v.abs() / max)).collect();
    let (channels, bucket_certificates) = bucket_rounds(&items)?;
    Ok(ChannelDecomposition { source, slots, channels, bucket_certificates, p, prescale, divisor: max })
}

/// Splits a spectrum into simple channels, one column per multiplicity copy.
pub fn decompose_spectrum(s: &DiscreteSpectrum, p: f64) -> Result<ChannelDecomposition> {
    check_exponent(p)?;
    let bucketed: Vec<f64> = match s.accumulation() {
        Accumulation::ToZero => s.values(),
        Accumulation::ToInfinity => {
            if let Some(i) = s.entries().iter().position(|l| l.value == 0.0) {
                return Err(Error::ZeroEigenvalue(i));
            }
            s.values().iter().map(|v| 1.0 / v).collect()
        }
    };
    let max = bucketed.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let prescale = 1.0 / max;

    let mut slots = Vec::with_capacity(s.total_states());
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for (level, l) in s.entries().iter().enumerate() {
        for copy in 0..l.multiplicity {
            if columns.len() <= copy {
                columns.push(Vec::new());
            }
            columns[copy].push(slots.len());
            slots.push(Slot { level, copy });
        }
    }

    let mut channels = Vec::new();
    let mut bucket_certificates = Vec::new();
    for column in &columns {
        let items: Vec<(usize, f64)> =
            column.iter().map(|&slot| (slot, bucketed[slots[slot].level].abs() / max)).collect();
        let (ch, certs) = bucket_rounds(&items)?;
        channels.extend(ch);
        bucket_certificates.extend(certs);
    }
    Ok(ChannelDecomposition { source: s.clone(), slots, channels, bucket_certificates, p, prescale, divisor: max })
}

/// Per-channel summary of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub channel: usize,
    pub size: usize,
    pub simple: bool,
    pub increasing_buckets: bool,
    pub certificates_match: bool,
    /// `Σ_n 1/k_n^p` over the occupied bucket levels.
    pub certificate_sum: f64,
    /// `Σ_{k=1}^{k_last} 1/k^p`, the partial zeta sum dominating the certificate sum.
    pub zeta_partial_bound: f64,
    /// `Σ_n |a_n|^p` of the prescaled channel values.
    pub power_sum: f64,
}

impl ChannelCheck {
    pub fn passed(&self) -> bool {
        self.simple
            && self.increasing_buckets
            && self.certificates_match
            && self.certificate_sum <= self.zeta_partial_bound
            && self.power_sum <= self.certificate_sum * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub disjoint_cover: bool,
    pub channels: Vec<ChannelCheck>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.disjoint_cover && self.channels.iter().all(ChannelCheck::passed)
    }

    pub fn simple(&self) -> bool {
        self.channels.iter().all(|c| c.simple)
    }
}

/// Checks the channel invariants. Violations are reported, never raised.
pub fn verify_decomposition(c: &ChannelDecomposition) -> DecompositionReport {
    let mut seen = vec![0usize; c.slots.len()];
    let mut in_range = true;
    for &slot in c.channels.iter().flatten() {
        match seen.get_mut(slot) {
            Some(n) => *n += 1,
            None => in_range = false,
        }
    }
    let disjoint_cover = in_range && seen.iter().all(|&n| n == 1);

    let channels = c
        .channels
        .iter()
        .zip(&c.bucket_certificates)
        .enumerate()
        .map(|(channel, (members, cert))| {
            let members: Vec<usize> = members.iter().copied().filter(|&s| s < c.slots.len()).collect();
            let mut values: Vec<f64> = members.iter().map(|&s| c.slot_value(s)).collect();
            let scaled_values: Vec<f64> = values.iter().map(|&v| c.bucketed(v).abs() / c.divisor).collect();
            values.sort_by(f64::total_cmp);
            let simple = values.windows(2).all(|w| w[0] != w[1]);
            let increasing_buckets = cert.windows(2).all(|w| w[0] < w[1]);
            let certificates_match = cert.len() == members.len()
                && scaled_values.iter().zip(cert).all(|(&a, &k)| bucket_index(a).ok() == Some(k));
            let certificate_sum = cert.iter().map(|&k| (k as f64).powf(-c.p)).sum();
            let k_last = cert.iter().copied().max().unwrap_or(0);
            let zeta_partial_bound = (1..=k_last).map(|k| (k as f64).powf(-c.p)).sum();
            let power_sum = scaled_values.iter().map(|a| a.powf(c.p)).sum();
            ChannelCheck {
                channel,
                size: members.len(),
                simple,
                increasing_buckets,
                certificates_match,
                certificate_sum,
                zeta_partial_bound,
                power_sum,
            }
        })
        .collect();
    DecompositionReport { disjoint_cover, channels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{harmonic_spectrum, hydrogen_point_spectrum};

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket_index(1.0).unwrap(), 1);
        assert_eq!(bucket_index(0.3).unwrap(), 3);
        assert_eq!(bucket_index(-0.3).unwrap(), 3);
        assert_eq!(bucket_index(1.0 / 5.0).unwrap(), 5);
        assert_eq!(bucket_index(0.5).unwrap(), 2);
        assert_eq!(bucket_index(0.5000001).unwrap(), 1);
        assert!(bucket_index(0.0).is_err());
        assert!(bucket_index(1.5).is_err());
    }

    #[test]
    fn harmonic_sequence_is_one_channel() {
        let values: Vec<f64> = (1..=8).map(|n| -1.0 / n as f64).collect();
        let c = partition_null_sequence(&values, 2.0).unwrap();
        assert_eq!(c.channels(), &[(0..8).collect::<Vec<_>>()]);
        assert_eq!(c.bucket_certificates(), &[(1..=8).collect::<Vec<u64>>()]);
    }

    #[test]
    fn inverse_square_root_sequence() {
        let values: Vec<f64> = (1..=8).map(|n| -1.0 / (n as f64).sqrt()).collect();
        let c = partition_null_sequence(&values, 2.0).unwrap();
        // 1-based: {1,4}, {2,5}, {3,6}, {7}, {8}
        assert_eq!(c.channels(), &[vec![0, 3], vec![1, 4], vec![2, 5], vec![6], vec![7]]);
        assert_eq!(c.bucket_certificates()[0], vec![1, 2]);
        assert_eq!(c.bucket_certificates()[3], vec![2]);
    }

    #[test]
    fn single_value() {
        let c = partition_null_sequence(&[-0.7], 2.0).unwrap();
        assert_eq!(c.channels(), &[vec![0]]);
        assert_eq!(c.prescale(), 1.0 / 0.7);
    }

    #[test]
    fn sequence_errors() {
        assert!(partition_null_sequence(&[0.5, 0.5], 2.0).is_err());
        assert!(partition_null_sequence(&[0.5, 0.0], 2.0).is_err());
        assert!(partition_null_sequence(&[0.5], 1.0).is_err());
    }

    #[test]
    fn hydrogen_columns() {
        let s = hydrogen_point_spectrum(1.0, 1.0, 3).unwrap();
        let c = decompose_spectrum(&s, 2.0).unwrap();
        // magnitudes 1, 1/4, 1/9 after prescale: one channel per column
        assert_eq!(c.channel_count(), 9);
        let e = s.values();
        assert_eq!(c.channel_spectrum(0), e.clone());
        for k in 1..4 {
            assert_eq!(c.channel_spectrum(k), vec![e[1], e[2]]);
        }
        for k in 4..9 {
            assert_eq!(c.channel_spectrum(k), vec![e[2]]);
        }
        for (slot, s) in c.slots().iter().enumerate() {
            let ch = c.channels().iter().position(|ch| ch.contains(&slot)).unwrap();
            assert_eq!(ch, s.copy);
        }
        assert!(verify_decomposition(&c).passed());
    }

    #[test]
    fn isotropic_oscillator_columns() {
        let s = harmonic_spectrum(&[1.0, 1.0], 2).unwrap();
        let c = decompose_spectrum(&s, 2.0).unwrap();
        let sets: Vec<Vec<f64>> = (0..c.channel_count()).map(|k| c.channel_spectrum(k)).collect();
        assert_eq!(sets, vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0], vec![3.0]]);
    }

    #[test]
    fn simple_spectrum_matches_sequence_partition() {
        let values: Vec<f64> = (1..=12).map(|n| -1.0 / (n as f64).sqrt()).collect();
        let entries = values.iter().map(|&v| Level { value: v, multiplicity: 1 }).collect();
        let s = DiscreteSpectrum::new(entries, Accumulation::ToZero, "x").unwrap();
        let a = decompose_spectrum(&s, 2.0).unwrap();
        let b = partition_null_sequence(&values, 2.0).unwrap();
        assert_eq!(a.channels(), b.channels());
        assert_eq!(a.bucket_certificates(), b.bucket_certificates());

        let osc = harmonic_spectrum(&[1.0], 30).unwrap();
        let a = decompose_spectrum(&osc, 2.0).unwrap();
        let recips: Vec<f64> = osc.values().iter().map(|v| 1.0 / v).collect();
        let b = partition_null_sequence(&recips, 2.0).unwrap();
        assert_eq!(a.channels(), b.channels());
    }

    #[test]
    fn verifier_flags_duplicate_value() {
        let s = hydrogen_point_spectrum(1.0, 1.0, 2).unwrap();
        let mut c = decompose_spectrum(&s, 2.0).unwrap();
        assert!(verify_decomposition(&c).passed());
        // slots 1 and 2 are copies 0 and 1 of E_2
        let mut ch = c.channels()[0].clone();
        ch.push(2);
        let mut cert = c.bucket_certificates()[0].clone();
        cert.push(cert.last().unwrap() + 1);
        c.set_channel(0, ch, cert);
        let report = verify_decomposition(&c);
        assert!(!report.simple());
        assert!(!report.disjoint_cover);
        assert!(!report.passed());
    }

    #[test]
    fn certificate_sum_below_zeta_two() {
        let values: Vec<f64> = (1..=100).map(|n| -1.0 / n as f64).collect();
        let c = partition_null_sequence(&values, 2.0).unwrap();
        let r = verify_decomposition(&c);
        assert!(r.passed());
        assert_eq!(r.channels.len(), 1);
        assert!(r.channels[0].certificate_sum <= std::f64::consts::PI.powi(2) / 6.0);
    }

    #[test]
    fn json_shape() {
        let c = partition_null_sequence(&[-1.0, -0.5], 2.0).unwrap();
        let js = serde_json::to_value(&c).unwrap();
        assert_eq!(js, serde_json::json!({"prescale": 1.0, "p": 2.0, "channels": [[0, 1]], "certificates": [[1, 2]]}));
    }
}
