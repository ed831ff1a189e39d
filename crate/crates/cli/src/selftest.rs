use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tempora::decompose::{partition_null_sequence, verify_decomposition};
use tempora::spectra::{hydrogen_point_spectrum, harmonic_spectrum};
use tempora::timeop::{galapon_matrix, TimeOperatorKind};
use tempora::uwform::{f_condition_check, FunctionSpec, SinWitness};

use crate::config::{GridParams, Model, Pipeline, RunConfig};
use crate::pipelines::run;
use crate::report::{Check, Report};
use crate::{CliError, CliResult};

/// One acceptance criterion: number, title, runtime budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub budget_seconds: Option<f64>,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "exact CCR on the difference span", budget_seconds: Some(1.0) },
    Criterion { id: 2, title: "ultra-weak CCR", budget_seconds: Some(1.0) },
    Criterion { id: 3, title: "uncertainty identity", budget_seconds: Some(1.0) },
    Criterion { id: 4, title: "oscillator time-operator spectrum", budget_seconds: Some(30.0) },
    Criterion { id: 5, title: "partition algorithm", budget_seconds: Some(1.0) },
    Criterion { id: 6, title: "Rabi bounds", budget_seconds: Some(5.0) },
    Criterion { id: 7, title: "weak Weyl relation on the grid", budget_seconds: Some(5.0) },
    Criterion { id: 8, title: "S0 strong time operator", budget_seconds: Some(1.0) },
    Criterion { id: 9, title: "f(H) transforms", budget_seconds: Some(2.0) },
    Criterion { id: 10, title: "scaling covariance", budget_seconds: None },
];

/// Number of random null sequences in the partition criterion.
pub const NULL_SEQUENCES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub criterion: Criterion,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

struct Ctx<'a> {
    overrides: &'a BTreeMap<String, f64>,
    seed: u64,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn config(&self, model: Option<Model>, pipeline: Pipeline) -> RunConfig {
        RunConfig { tolerances: self.overrides.clone(), seed: self.seed, ..RunConfig::new(model, pipeline) }
    }

    fn tol(&self, name: &str) -> CliResult<f64> {
        Ok(self.config(None, Pipeline::S0Check { samples: 0 }).effective_tolerances()?[name])
    }

    /// Runs a pipeline and keeps the named checks, prefixed with `tag`.
    fn take(&mut self, tag: &str, config: RunConfig, names: &[&str]) -> CliResult<Report> {
        let report = run(&config)?;
        for name in names {
            let c = report
                .checks
                .iter()
                .find(|c| c.name == *name)
                .cloned()
                .unwrap_or_else(|| Check::holds(*name, false));
            self.checks.push(Check { name: format!("{tag}.{}", c.name), ..c });
        }
        Ok(report)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn hydrogen(n_max: usize) -> Model {
    Model::Hydrogen { m: 1.0, gamma: 1.0, n_max }
}

/// Runs criterion `id` with the default tolerances merged with `overrides`.
pub fn run_criterion(id: u8, overrides: &BTreeMap<String, f64>, seed: u64) -> CliResult<Outcome> {
    let criterion = *CRITERIA.iter().find(|c| c.id == id).ok_or_else(|| CliError::Config(format!("no criterion {id}")))?;
    let mut ctx = Ctx { overrides, seed, checks: Vec::new() };
    let start = Instant::now();
    match id {
        1 => {
            let r = ctx.take("hydrogen", ctx.config(Some(hydrogen(4)), Pipeline::TimeOp), &["ccr_difference_vectors", "ccr_random_vectors"])?;
            ctx.push(Check::holds("hydrogen.states_30", r.statistics["total_states"] == json!(30)));
            ctx.push(Check::holds("hydrogen.channels_16", r.statistics["channels"] == json!(16)));
            let osc = Model::Oscillator { omega: vec![1.0], n_max: 50 };
            ctx.take("oscillator", ctx.config(Some(osc), Pipeline::TimeOp), &["ccr_difference_vectors", "ccr_random_vectors"])?;
        }
        2 => {
            ctx.take("hydrogen", ctx.config(Some(hydrogen(4)), Pipeline::UWForm { f: None }), &["uw_ccr"])?;
        }
        3 => {
            ctx.take(
                "hydrogen",
                ctx.config(Some(hydrogen(4)), Pipeline::UWForm { f: None }),
                &["uncertainty_bound", "imaginary_part_identity"],
            )?;
        }
        4 => {
            let p = Pipeline::OscSpectrum { omega: 1.0, n_list: vec![100, 200, 400, 800] };
            ctx.take("oscillator", ctx.config(None, p), &["symbol_bound", "lambda_max_monotone", "lambda_max_largest_n"])?;
        }
        5 => partition(&mut ctx)?,
        6 => {
            let m = Model::Rabi { mu: 0.5, omega: 1.0, g: 0.3, cutoff: 200, count: 20 };
            ctx.take("rabi", ctx.config(Some(m), Pipeline::Spectrum), &["rabi_bounds", "rabi_cutoff_stability"])?;
        }
        7 => {
            // t = 0, 0.25, 0.5, 0.75, 1; refinement compares N and 2N at t = 1
            let g = GridParams { tmax: 1.0, steps: 4, ..GridParams::default() };
            ctx.take("grid", ctx.config(None, Pipeline::ABWeyl(g)), &["weak_weyl", "refinement"])?;
        }
        8 => {
            ctx.take("s0", ctx.config(None, Pipeline::S0Check { samples: 100 }), &["strong_relation_exact", "symmetry"])?;
        }
        9 => transforms(&mut ctx)?,
        10 => scaling(&mut ctx)?,
        _ => unreachable!(),
    }
    let elapsed = start.elapsed();
    let passed = ctx.checks.iter().all(|c| c.passed);
    Ok(Outcome { criterion, checks: ctx.checks, passed, elapsed })
}

fn partition(ctx: &mut Ctx) -> CliResult<()> {
    let harmonic: Vec<f64> = (1..=8).map(|n| -1.0 / n as f64).collect();
    let c = partition_null_sequence(&harmonic, 2.0)?;
    ctx.push(Check::holds("trace.reciprocals_one_channel", c.channels() == [(0..8).collect::<Vec<_>>()]));
    let roots: Vec<f64> = (1..=8).map(|n| -1.0 / (n as f64).sqrt()).collect();
    let c = partition_null_sequence(&roots, 2.0)?;
    let expected: Vec<Vec<usize>> = vec![vec![0, 3], vec![1, 4], vec![2, 5], vec![6], vec![7]];
    ctx.push(Check::holds("trace.root_reciprocals_five_channels", c.channels() == expected.as_slice()));

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut failures = 0;
    for _ in 0..NULL_SEQUENCES {
        let len = rng.gen_range(1..=60);
        let decay = rng.gen_range(0.3..2.0);
        let values: Vec<f64> = (1..=len)
            .map(|i| {
                let a = rng.gen_range(0.05..=1.0) * (i as f64).powf(-decay);
                if rng.gen_bool(0.5) { -a } else { a }
            })
            .collect();
        let v = verify_decomposition(&partition_null_sequence(&values, 2.0)?);
        if !(v.passed() && v.disjoint_cover && v.simple()) {
            failures += 1;
        }
    }
    ctx.push(Check::holds(format!("random.{NULL_SEQUENCES}_sequences_verified"), failures == 0));
    Ok(())
}

fn transforms(ctx: &mut Ctx) -> CliResult<()> {
    let fs = [
        ("exp", FunctionSpec::Exp(1.0)),
        ("identity", FunctionSpec::Polynomial(vec![0.0, 1.0])),
        ("sin", FunctionSpec::Sin(0.3)),
    ];
    for (tag, f) in fs {
        ctx.take(tag, ctx.config(Some(hydrogen(4)), Pipeline::FTransform { f }), &["admissible", "decomposition", "uw_ccr"])?;
    }
    let s = hydrogen_point_spectrum(1.0, 1.0, 4)?;
    let beta = 1.0 / (2.0 * s.values()[0]);
    let report = f_condition_check(&FunctionSpec::Sin(beta), &s)?;
    ctx.push(Check::holds("resonant_sin.rejected", !report.admissible));
    ctx.push(Check::holds("resonant_sin.witness_k1_level1", report.sin_witnesses.contains(&SinWitness { k: 1, level: 1 })));
    Ok(())
}

fn scaling(ctx: &mut Ctx) -> CliResult<()> {
    let tol = ctx.tol("scaling")?;
    let oscillator = harmonic_spectrum(&[1.0], 50)?.values();
    let hydrogen: Vec<f64> = (1..=50).map(|n| -0.5 / (n * n) as f64).collect();
    for (tag, e) in [("oscillator", oscillator), ("hydrogen", hydrogen)] {
        let t = galapon_matrix(&e, TimeOperatorKind::Direct)?;
        for alpha in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = e.iter().map(|x| alpha * x).collect();
            let ts = galapon_matrix(&scaled, TimeOperatorKind::Direct)?;
            // entrywise relative defect; the diagonal is exactly zero on both sides
            let defect = t
                .data()
                .iter()
                .zip(ts.data().iter())
                .map(|(a, b)| {
                    let expected = a / alpha;
                    let d = (b - expected).norm();
                    if expected.norm() > 0.0 { d / expected.norm() } else { d }
                })
                .fold(0.0, f64::max);
            ctx.push(Check::at_most(format!("{tag}.alpha_{alpha}"), defect, "scaling", tol));
        }
    }
    Ok(())
}

/// Runs every criterion and gathers the checks into one report.
pub fn selftest(overrides: &BTreeMap<String, f64>, seed: u64) -> CliResult<Report> {
    let tolerances = RunConfig { tolerances: overrides.clone(), ..RunConfig::new(None, Pipeline::S0Check { samples: 0 }) }
        .effective_tolerances()?;
    let input = json!({ "seed": seed, "tolerance_overrides": overrides });
    let mut report = Report::new("selftest", input, tolerances);
    let mut summary = Vec::new();
    for c in CRITERIA {
        let outcome = run_criterion(c.id, overrides, seed)?;
        for check in &outcome.checks {
            report.check(Check { name: format!("{}.{}", c.id, check.name), ..check.clone() });
        }
        report.time(&format!("criterion_{}", c.id), outcome.elapsed);
        summary.push(json!({ "id": c.id, "title": c.title, "passed": outcome.passed, "budget_seconds": c.budget_seconds }));
    }
    report.result("criteria", summary);
    Ok(report)
}
