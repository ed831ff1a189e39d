use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use tempora::contspec::{
    make_packet, s0_strong_relation_check, s0_symmetry_residual, strong_relation_residual, weak_weyl_residual,
    ExpCombination,
};
use tempora::decompose::{decompose_spectrum, verify_decomposition, ChannelDecomposition};
use tempora::sampling::random_in_kernel;
use tempora::spectra::{rabi_bound_check, rabi_hamiltonian, Accumulation, DiscreteSpectrum};
use tempora::timeop::{assemble, max_difference_residual, osc_timeop_spectrum};
use tempora::uwform::{
    f_condition_check, f_transform_form, point_form, uncertainty_check, uw_ccr_residual, FunctionSpec,
    SesquilinearForm,
};

use crate::config::{GridParams, Model, Pipeline, RunConfig};
use crate::report::{Check, Report, Table};
use crate::{CliError, CliResult};

/// Random pairs drawn for the ultra-weak CCR check.
pub const UW_PAIRS: usize = 200;
/// Random `(a, b, ψ)` samples for the uncertainty check.
pub const UNCERTAINTY_SAMPLES: usize = 100;
/// Random difference-span vectors per time-operator run.
pub const CCR_RANDOM_VECTORS: usize = 100;
/// Range of the random shifts `a`, `b` in the uncertainty check.
pub const SHIFT_RANGE: f64 = 5.0;

/// Executes one pipeline. Module-level rejections become errors with context;
/// numerical outcomes become checks.
pub fn run(config: &RunConfig) -> CliResult<Report> {
    config.validate()?;
    let start = Instant::now();
    let input = serde_json::to_value(config).expect("config serializes");
    let mut report = Report::new(config.pipeline.name(), input, config.effective_tolerances()?);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = config.model.as_ref();
    match &config.pipeline {
        Pipeline::Spectrum => spectrum(&mut report, model.expect("validated"))?,
        Pipeline::Decompose => {
            let s = model.expect("validated").discrete_spectrum()?;
            decomposition(&mut report, &s, config.p)?;
        }
        Pipeline::TimeOp => time_operator(&mut report, &model.expect("validated").discrete_spectrum()?, config.p, &mut rng)?,
        Pipeline::UWForm { f } => {
            ultra_weak(&mut report, &model.expect("validated").discrete_spectrum()?, f.as_ref(), &mut rng)?
        }
        Pipeline::FTransform { f } => {
            ultra_weak(&mut report, &model.expect("validated").discrete_spectrum()?, Some(f), &mut rng)?
        }
        Pipeline::OscSpectrum { omega, n_list } => oscillator_spectrum(&mut report, *omega, n_list)?,
        Pipeline::ABWeyl(g) => weyl(&mut report, g)?,
        Pipeline::S0Check { samples } => s0(&mut report, *samples, &mut rng)?,
    }
    report.time("total", start.elapsed());
    Ok(report)
}

fn context(stage: &'static str) -> impl Fn(tempora::Error) -> CliError {
    move |e| CliError::Module { stage, source: e }
}

fn spectrum(report: &mut Report, model: &Model) -> CliResult<()> {
    let Model::Rabi { mu, omega, g, cutoff, count } = *model else {
        let s = model.discrete_spectrum()?;
        spectrum_statistics(report, &s);
        report.result("spectrum", &s);
        return Ok(());
    };
    // the coarser cutoff of the stability comparison
    let coarse = cutoff * 3 / 4;
    let t = Instant::now();
    let fine = rabi_hamiltonian(mu, omega, g, cutoff).map_err(context("rabi hamiltonian"))?.eigenvalues();
    let rough = rabi_hamiltonian(mu, omega, g, coarse).map_err(context("rabi hamiltonian"))?.eigenvalues();
    report.time("eigensolve", t.elapsed());
    let bounds = rabi_bound_check(&fine, mu, omega, g, count).map_err(context("rabi bounds"))?;
    let levels = 2 * count;
    let drift = fine.iter().zip(&rough).take(levels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut table = Table::new("rabi_levels", &["n", "nu_prime_2n", "lower", "upper"]);
    for (n, e) in fine.iter().step_by(2).take(count).enumerate() {
        let nu = omega * n as f64 - g * g / omega;
        table.rows.push(vec![n as f64, *e, nu - mu, nu + mu]);
    }
    report.tables.push(table);
    report.stat("dimension", 2 * (cutoff + 1));
    report.stat("stability_cutoff", coarse);
    report.result("eigenvalues", &fine[..levels.min(fine.len())]);
    report.result("bound_checks", &bounds);
    report.result("eigenvalue_drift", drift);
    report.check(Check::holds("rabi_bounds", bounds.iter().all(|&b| b)));
    let tol = report.tol("rabi_stability");
    report.check(Check::at_most("rabi_cutoff_stability", drift, "rabi_stability", tol));
    Ok(())
}

fn spectrum_statistics(report: &mut Report, s: &DiscreteSpectrum) {
    report.stat("levels", s.len());
    report.stat("total_states", s.total_states());
    report.stat("simple", s.is_simple());
    report.stat("accumulation", s.accumulation());
}

fn decomposition(report: &mut Report, s: &DiscreteSpectrum, p: f64) -> CliResult<ChannelDecomposition> {
    spectrum_statistics(report, s);
    let c = decompose_spectrum(s, p).map_err(context("decomposition"))?;
    let v = verify_decomposition(&c);
    report.stat("channels", c.channel_count());
    report.stat("channel_sizes", c.channels().iter().map(Vec::len).collect::<Vec<_>>());
    report.result("decomposition", &c);
    report.result("verification", &v);
    report.check(Check::holds("disjoint_cover", v.disjoint_cover));
    report.check(Check::holds("channels_simple", v.simple()));
    report.check(Check::holds("buckets_increasing", v.channels.iter().all(|c| c.increasing_buckets)));
    report.check(Check::holds("certificates", v.passed()));
    Ok(c)
}

fn time_operator(report: &mut Report, s: &DiscreteSpectrum, p: f64, rng: &mut ChaCha8Rng) -> CliResult<()> {
    let c = decomposition(report, s, p)?;
    let t = Instant::now();
    let op = assemble(&c).map_err(context("time operator"))?;
    let t_max = op.max_abs_t();
    let residuals: Vec<f64> = op.blocks().par_iter().map(|b| max_difference_residual(&b.t)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    // each channel is measured against its own max |T_nk|
    let worst_relative = residuals
        .iter()
        .zip(op.blocks())
        .filter(|(_, b)| b.t.dimension() >= 2)
        .map(|(r, b)| r / b.t.max_abs())
        .fold(0.0, f64::max);
    let mut random_worst = 0.0_f64;
    let weights = vec![1.0; op.dimension()];
    for _ in 0..CCR_RANDOM_VECTORS {
        // channelwise projection keeps the vector in the direct sum of difference spans
        let mut v = DVector::zeros(op.dimension());
        for (b, &o) in op.blocks().iter().zip(op.offsets()) {
            if let Some(part) = random_in_kernel(rng, &weights[..b.h.len()]) {
                v.rows_mut(o, b.h.len()).copy_from(&part);
            }
        }
        let norm = v.norm();
        if norm == 0.0 {
            break;
        }
        random_worst = random_worst.max(op.ccr_residual(&v).map_err(context("ccr residual"))? / norm);
    }
    report.time("ccr", t.elapsed());
    report.stat("dimension", op.dimension());
    report.result("max_abs_t", t_max);
    report.result("max_ccr_residual", worst);
    report.result("channel_ccr_residuals", &residuals);
    report.result("max_random_ccr_residual", random_worst);
    let tol = report.tol("ccr");
    report.result("max_relative_ccr_residual", worst_relative);
    report.check(Check::at_most("ccr_difference_vectors", worst_relative, "ccr", tol));
    let tol = report.tol("ccr_random");
    report.check(Check::at_most("ccr_random_vectors", random_worst, "ccr_random", tol));
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormStatistics {
    pub max_uw_ccr_residual: f64,
    pub min_uncertainty_value: f64,
    pub im_identity_defect: f64,
}

/// Seeded sweep of the ultra-weak CCR and the uncertainty relation on `form`.
///
/// Pairs alternate between a single multi-dimensional channel (cycled) and
/// the full direct sum.
pub fn form_statistics(form: &SesquilinearForm, rng: &mut ChaCha8Rng) -> CliResult<Option<FormStatistics>> {
    let wide: Vec<usize> = (0..form.channels().len()).filter(|&j| form.channels()[j].dimension() >= 2).collect();
    if wide.is_empty() {
        return Ok(None);
    }
    let mut max_res = 0.0_f64;
    for i in 0..UW_PAIRS {
        let (phi, psi) = if i % 2 == 0 {
            let j = wide[(i / 2) % wide.len()];
            (form.random_channel_vector(rng, j).unwrap(), form.random_channel_vector(rng, j).unwrap())
        } else {
            (form.random_uw_vector(rng).unwrap(), form.random_uw_vector(rng).unwrap())
        };
        let r = uw_ccr_residual(form, &phi, &psi).map_err(context("ultra-weak ccr"))?;
        max_res = max_res.max(r / (phi.norm() * psi.norm()));
    }
    let mut min_value = f64::INFINITY;
    let mut im_defect = 0.0_f64;
    for _ in 0..UNCERTAINTY_SAMPLES {
        let psi = form.random_uw_vector(rng).unwrap();
        let a = rng.gen_range(-SHIFT_RANGE..=SHIFT_RANGE);
        let b = rng.gen_range(-SHIFT_RANGE..=SHIFT_RANGE);
        let u = uncertainty_check(form, &psi, a, b).map_err(context("uncertainty"))?;
        min_value = min_value.min(u.value);
        im_defect = im_defect.max(u.im_identity_defect);
    }
    Ok(Some(FormStatistics { max_uw_ccr_residual: max_res, min_uncertainty_value: min_value, im_identity_defect: im_defect }))
}

fn ultra_weak(report: &mut Report, s: &DiscreteSpectrum, f: Option<&FunctionSpec>, rng: &mut ChaCha8Rng) -> CliResult<()> {
    if s.accumulation() != Accumulation::ToZero {
        return Err(CliError::Config("ultra-weak forms need a spectrum accumulating at zero".into()));
    }
    spectrum_statistics(report, s);
    let (c, form) = match f {
        Some(f) => {
            let adm = f_condition_check(f, s).map_err(context("admissibility"))?;
            report.result("admissible", adm.admissible);
            report.result("witnesses", json!({
                "f0_hits": adm.f0_hits,
                "sin": adm.sin_witnesses,
                "polynomial": adm.polynomial_witness,
            }));
            report.result("admissibility", &adm);
            report.check(Check::holds("admissible", adm.admissible));
            if !adm.admissible {
                return Ok(());
            }
            let ft = f_transform_form(f, s).map_err(context("f transform"))?;
            report.result("shift", ft.shift);
            report.result("transformed_spectrum", &ft.spectrum);
            (ft.decomposition, ft.form)
        }
        None => {
            report.result("admissible", true);
            report.result("witnesses", json!({}));
            point_form(s).map_err(context("point form"))?
        }
    };
    report.stat("channels", c.channel_count());
    report.stat("form_dimension", form.dimension());
    report.check(Check::holds("decomposition", verify_decomposition(&c).passed()));
    let t = Instant::now();
    let stats = form_statistics(&form, rng)?;
    report.time("sweep", t.elapsed());
    let Some(st) = stats else {
        return Err(CliError::Config("every channel is one-dimensional, so the ultra-weak domain is trivial".into()));
    };
    report.result("max_uw_ccr_residual", st.max_uw_ccr_residual);
    report.result("min_uncertainty_value", st.min_uncertainty_value);
    report.result("im_identity_defect", st.im_identity_defect);
    let tol = report.tol("uw_ccr");
    report.check(Check::at_most("uw_ccr", st.max_uw_ccr_residual, "uw_ccr", tol));
    let tol = report.tol("uncertainty");
    report.check(Check::at_least("uncertainty_bound", st.min_uncertainty_value, "uncertainty", 0.5 - tol));
    report.check(Check::at_most("imaginary_part_identity", st.im_identity_defect, "uncertainty", tol));
    Ok(())
}

fn oscillator_spectrum(report: &mut Report, omega: f64, n_list: &[usize]) -> CliResult<()> {
    if n_list.is_empty() {
        return Err(CliError::Config("oscspec needs at least one matrix size".into()));
    }
    let t = Instant::now();
    let spectra = n_list
        .par_iter()
        .map(|&n| osc_timeop_spectrum(omega, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(context("oscillator spectrum"))?;
    report.time("eigensolves", t.elapsed());
    let mut table = Table::new("oscspec", &["N", "lambda_min", "lambda_max"]);
    for (n, s) in n_list.iter().zip(&spectra) {
        table.rows.push(vec![*n as f64, s.min, s.max]);
    }
    report.tables.push(table);
    let edge = std::f64::consts::PI / omega;
    let overshoot = spectra.iter().map(|s| (s.max - edge).max(-edge - s.min)).fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..n_list.len()).collect();
    order.sort_by_key(|&i| n_list[i]);
    let monotone = order.windows(2).all(|w| spectra[w[1]].max >= spectra[w[0]].max);
    let largest = spectra[*order.last().unwrap()].max;
    report.result("n_list", n_list);
    report.result("lambda_max", spectra.iter().map(|s| s.max).collect::<Vec<_>>());
    report.result("lambda_min", spectra.iter().map(|s| s.min).collect::<Vec<_>>());
    report.result("symbol_edge", edge);
    let tol = report.tol("toeplitz_bound");
    report.check(Check::at_most("symbol_bound", overshoot, "toeplitz_bound", tol / omega));
    report.check(Check::holds("lambda_max_monotone", monotone));
    let floor = report.tol("toeplitz_lambda_floor");
    report.check(Check::at_least("lambda_max_largest_n", largest, "toeplitz_lambda_floor", floor / omega));
    Ok(())
}

fn weyl(report: &mut Report, g: &GridParams) -> CliResult<()> {
    if g.steps == 0 || g.tmax.is_nan() || g.tmax <= 0.0 {
        return Err(CliError::Config("abweyl needs tmax > 0 and at least one step".into()));
    }
    let coarse = make_packet(g.half_width, g.n, g.m, g.x0, g.k0, g.sigma).map_err(context("wave packet"))?;
    let fine = make_packet(g.half_width, 2 * g.n, g.m, g.x0, g.k0, g.sigma).map_err(context("wave packet"))?;
    let times: Vec<f64> = (0..=g.steps).map(|i| g.tmax * i as f64 / g.steps as f64).collect();
    let t = Instant::now();
    let rows = times
        .par_iter()
        .map(|&t| Ok(vec![t, weak_weyl_residual(&coarse, t)?, strong_relation_residual(&coarse, t)?]))
        .collect::<Result<Vec<_>, tempora::Error>>()
        .map_err(context("weak weyl relation"))?;
    let r_coarse = rows.last().unwrap()[1];
    let r_fine = weak_weyl_residual(&fine, g.tmax).map_err(context("weak weyl relation"))?;
    report.time("residuals", t.elapsed());
    let max_residual = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    let max_strong = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let mut table = Table::new("abweyl", &["t", "residual", "strong_residual"]);
    table.rows = rows;
    report.tables.push(table);
    report.stat("dx", coarse.dx());
    report.result("max_residual", max_residual);
    report.result("max_strong_residual", max_strong);
    report.result("residual_n", r_coarse);
    report.result("residual_2n", r_fine);
    report.result("refinement_ratio", r_fine / r_coarse);
    let tol = report.tol("weyl");
    report.check(Check::at_most("weak_weyl", max_residual, "weyl", tol));
    report.check(Check::at_most("strong_relation", max_strong, "weyl", tol));
    report.check(Check::holds("refinement", r_fine <= r_coarse));
    Ok(())
}

fn s0(report: &mut Report, samples: usize, rng: &mut ChaCha8Rng) -> CliResult<()> {
    let mut all_exact = true;
    for _ in 0..samples {
        let s = rng.gen_range(-10.0..=10.0);
        let t = rng.gen_range(-10.0..=10.0);
        all_exact &= s0_strong_relation_check(s, t).map_err(context("strong relation"))?.exact;
    }
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let f = ExpCombination::random(rng, 3, 4.0);
        let g = ExpCombination::random(rng, 3, 4.0);
        worst = worst.max(s0_symmetry_residual(&f, &g).map_err(context("symmetry"))?);
    }
    report.stat("samples", samples);
    report.result("strong_relation_all_exact", all_exact);
    report.result("symmetry_max_residual", worst);
    report.check(Check::holds("strong_relation_exact", all_exact));
    let tol = report.tol("s0_symmetry");
    report.check(Check::at_most("symmetry", worst, "s0_symmetry", tol));
    Ok(())
}
