use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tempora::contspec::{free_evolve, make_packet};
use tempora::decompose::{decompose_spectrum, partition_null_sequence, verify_decomposition};
use tempora::sampling::{random_difference_vector, uniform_complex};
use tempora::spectra::{invert_spectrum, Accumulation, DiscreteSpectrum, Level};
use tempora::timeop::{ccr_residual, galapon_matrix, TimeOperatorKind};
use tempora::uwform::{
    direct_sum_form, f_transform_form, uw_ccr_residual, uwform_point, FunctionSpec, SesquilinearForm,
};

/// Strictly increasing values with gaps bounded below, so the Galapon entries stay moderate.
fn increasing(len: std::ops::Range<usize>, lo: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..2.0, len).prop_map(move |gaps| {
        let mut acc = lo;
        gaps.iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect()
    })
}

/// Negative, strictly increasing, bounded away from zero.
fn bound_levels(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|gaps| {
        let total: f64 = gaps.iter().sum();
        let mut acc = -(total + 0.05);
        gaps.iter()
            .map(|g| {
                let v = acc;
                acc += g;
                v
            })
            .collect()
    })
}

fn null_sequence() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1e-3f64..1.0, any::<bool>()), 1..60)
        .prop_map(|v| v.into_iter().map(|(a, neg)| if neg { -a } else { a }).collect())
}

fn multiplicity_spectrum() -> impl Strategy<Value = DiscreteSpectrum> {
    prop::collection::vec(1usize..5, 1..8).prop_map(|mult| {
        let entries = mult.iter().enumerate().map(|(i, &m)| Level { value: -1.0 / (i as f64 + 1.0).powi(2), multiplicity: m }).collect();
        DiscreteSpectrum::new(entries, Accumulation::ToZero, "random").unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn galapon_scaling_covariance(e in increasing(2..20, -5.0), alpha in prop::sample::select(vec![0.5, 2.0, 10.0, -3.0])) {
        let t = galapon_matrix(&e, TimeOperatorKind::Direct).unwrap();
        let scaled: Vec<f64> = e.iter().map(|x| alpha * x).collect();
        let mut sorted = scaled.clone();
        sorted.sort_by(f64::total_cmp);
        let ts = galapon_matrix(&sorted, TimeOperatorKind::Direct).unwrap();
        let n = e.len();
        // negative alpha reverses the order; map indices back
        let idx = |i: usize| if alpha > 0.0 { i } else { n - 1 - i };
        for i in 0..n {
            for j in 0..n {
                let expected = t.data()[(i, j)] / alpha;
                let got = ts.data()[(idx(i), idx(j))];
                prop_assert!((got - expected).norm() <= 1e-13 * expected.norm().max(1.0));
            }
        }
    }

    #[test]
    fn galapon_is_hermitian_with_zero_diagonal(e in increasing(1..30, -10.0)) {
        let t = galapon_matrix(&e, TimeOperatorKind::Direct).unwrap();
        prop_assert!(t.hermiticity_defect() <= 1e-12);
        for i in 0..e.len() {
            prop_assert_eq!(t.data()[(i, i)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn inverse_conjugate_is_direct_on_reciprocals(e in bound_levels(2..20)) {
        let s = galapon_matrix(&e, TimeOperatorKind::InverseConjugate).unwrap();
        // 1/E reverses order for negative E
        let mut inv: Vec<f64> = e.iter().map(|x| 1.0 / x).collect();
        inv.sort_by(f64::total_cmp);
        let d = galapon_matrix(&inv, TimeOperatorKind::Direct).unwrap();
        let n = e.len();
        for i in 0..n {
            for j in 0..n {
                let a = s.data()[(i, j)];
                let b = d.data()[(n - 1 - i, n - 1 - j)];
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn ccr_holds_on_difference_span(e in increasing(2..40, 0.1), seed in any::<u64>()) {
        let t = galapon_matrix(&e, TimeOperatorKind::Direct).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_difference_vector(&mut rng, e.len()).unwrap();
        prop_assert!(ccr_residual(&e, &t, &v).unwrap() <= 1e-10 * t.max_abs().max(1.0));
    }

    #[test]
    fn decomposition_invariants_on_null_sequences(values in null_sequence()) {
        let c = partition_null_sequence(&values, 2.0).unwrap();
        let report = verify_decomposition(&c);
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn decomposition_is_prescale_invariant(values in null_sequence(), scale in 1e-3f64..1e3) {
        let a = partition_null_sequence(&values, 2.0).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let b = partition_null_sequence(&scaled, 2.0).unwrap();
        // bucketing after prescaling only sees ratios; floating ratios may cross a
        // bucket edge, so compare only when no value sits within 1e-12 of an edge
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let near_edge = values.iter().any(|v| {
            let r = max / v.abs();
            (r - r.round()).abs() < 1e-9 * r
        });
        if !near_edge {
            prop_assert_eq!(a.channels(), b.channels());
        }
    }

    #[test]
    fn decomposition_is_deterministic(s in multiplicity_spectrum()) {
        let a = decompose_spectrum(&s, 2.0).unwrap();
        let b = decompose_spectrum(&s, 2.0).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(verify_decomposition(&a).passed());
        let covered: usize = a.channels().iter().map(Vec::len).sum();
        prop_assert_eq!(covered, s.total_states());
    }

    #[test]
    fn inversion_is_an_involution(s in multiplicity_spectrum()) {
        let back = invert_spectrum(&invert_spectrum(&s).unwrap()).unwrap();
        prop_assert_eq!(back.label(), s.label());
        prop_assert_eq!(back.multiplicities(), s.multiplicities());
        for (a, b) in back.values().iter().zip(s.values()) {
            prop_assert!((a - b).abs() <= 1e-15 * b.abs());
        }
    }

    #[test]
    fn form_is_hermitian_symmetric(e in bound_levels(2..15), seed in any::<u64>()) {
        let form = uwform_point(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = uniform_complex(&mut rng, e.len());
        let psi = uniform_complex(&mut rng, e.len());
        let a = form.evaluate(&phi, &psi).unwrap();
        let b = form.evaluate(&psi, &phi).unwrap();
        let scale = phi.norm() * psi.norm() * form.kernel().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((a.conj() - b).norm() <= 1e-12 * scale);
    }

    #[test]
    fn form_is_sesquilinear(e in bound_levels(2..10), seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let form = uwform_point(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = uniform_complex(&mut rng, e.len());
        let psi = uniform_complex(&mut rng, e.len());
        let c = C64::new(re, im);
        let t = form.evaluate(&phi, &psi).unwrap();
        let left = form.evaluate(&(&phi * c), &psi).unwrap();
        let right = form.evaluate(&phi, &(&psi * c)).unwrap();
        let tol = 1e-12 * (1.0 + t.norm()) * (1.0 + c.norm());
        prop_assert!((left - c.conj() * t).norm() <= tol);
        prop_assert!((right - c * t).norm() <= tol);
    }

    #[test]
    fn uw_ccr_and_imaginary_identity(e in bound_levels(2..15), seed in any::<u64>()) {
        let form = uwform_point(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = form.random_uw_vector(&mut rng).unwrap();
        let psi = form.random_uw_vector(&mut rng).unwrap();
        let scale = form.kernel().iter().map(|z| z.norm()).fold(1.0, f64::max)
            * e.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        prop_assert!(uw_ccr_residual(&form, &phi, &psi).unwrap() <= 1e-12 * scale);
        let z = form.evaluate(&form.apply_h(&psi), &psi).unwrap();
        prop_assert!((z.im + 0.5 * psi.norm_squared()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn direct_sums_keep_the_ccr(a in bound_levels(2..8), b in bound_levels(2..8), seed in any::<u64>()) {
        let form = direct_sum_form(vec![uwform_point(&a).unwrap(), uwform_point(&b).unwrap()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = form.random_uw_vector(&mut rng).unwrap();
        let psi = form.random_uw_vector(&mut rng).unwrap();
        let scale = form.kernel().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(uw_ccr_residual(&form, &phi, &psi).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn monotone_transforms_keep_the_channel_count(s in multiplicity_spectrum(), beta in 0.2f64..3.0) {
        let f = FunctionSpec::Exp(beta);
        let ft = f_transform_form(&f, &s).unwrap();
        let pairs = s.values().iter().zip(s.multiplicities()).map(|(&v, m)| (f.eval_shifted(v), m)).collect();
        let direct = DiscreteSpectrum::from_unsorted(pairs, 0.0, Accumulation::ToZero, "direct").unwrap();
        let c = decompose_spectrum(&direct, 2.0).unwrap();
        prop_assert_eq!(ft.decomposition.channel_count(), c.channel_count());
    }

    #[test]
    fn free_evolution_is_unitary(t in -2.0f64..2.0, s in -2.0f64..2.0, k0 in 3.0f64..8.0) {
        let p = make_packet(50.0, 512, 1.0, 0.0, k0, 2.0).unwrap();
        let a = free_evolve(&free_evolve(&p, t), s);
        let b = free_evolve(&p, t + s);
        prop_assert!((a.norm() - 1.0).abs() <= 1e-13);
        prop_assert!(a.distance(&b).unwrap() <= 1e-12);
    }
}

#[test]
fn toeplitz_truncations_respect_the_symbol_bound() {
    let mut previous = f64::NEG_INFINITY;
    for n in [10, 20, 40, 80, 160] {
        let s = tempora::timeop::osc_timeop_spectrum(1.0, n).unwrap();
        assert!(s.max <= std::f64::consts::PI + 1e-9);
        assert!(s.min >= -std::f64::consts::PI - 1e-9);
        // spectrum of i·(antisymmetric real) is symmetric about zero
        assert!((s.max + s.min).abs() < 1e-10);
        assert!(s.max >= previous);
        previous = s.max;
    }
    let half = tempora::timeop::osc_timeop_spectrum(2.0, 40).unwrap();
    let unit = tempora::timeop::osc_timeop_spectrum(1.0, 40).unwrap();
    assert!((half.max - unit.max / 2.0).abs() < 1e-12);
}

#[test]
fn random_domain_vectors_are_reproducible() {
    let form: SesquilinearForm = uwform_point(&[-1.0, -0.5, -0.2]).unwrap();
    let a = form.random_uw_vector(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = form.random_uw_vector(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    let sum: C64 = a.iter().zip(form.energies()).map(|(c, e)| c * e).sum();
    assert!(sum.norm() < 1e-14);
    let _: DVector<C64> = a;
}
