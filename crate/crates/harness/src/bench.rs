//! Batch experiments: per-row instance build, LP solve, algorithm run,
//! exact optimum where affordable, and certified assertions on every row.

use std::time::Instant;

use atsp_core::error::{Error, Result};
use atsp_core::instance::{from_unit_graph, Backbone};
use atsp_core::ratio::{format_rat, Rat};
use atsp_core::svensson::{run, Config};

use crate::gen::generate_unit_instance;
use crate::opt::exact_opt;

/// Largest `n` for which bench rows compute the exact optimum.
pub const BENCH_OPT_MAX: usize = 12;

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub n: usize,
    pub seed: u64,
    pub prob: Rat,
    pub lp: Rat,
    pub alg_cost: Rat,
    pub opt: Option<Rat>,
    pub ratio_alg_lp: Rat,
    pub restarts: usize,
    pub runtime_ms: u128,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub seeds: u64,
    pub probs: Vec<Rat>,
    pub algo: Config,
    pub opt_limit: usize,
}

impl BenchConfig {
    pub fn new(n_min: usize, n_max: usize, seeds: u64) -> Self {
        BenchConfig {
            n_min,
            n_max,
            seeds,
            probs: vec![atsp_core::ratio::rat(1, 10), atsp_core::ratio::rat(3, 10)],
            algo: Config::default_params(),
            opt_limit: BENCH_OPT_MAX,
        }
    }
}

/// Runs the sweep ordered by (n, prob, seed). Every row asserts
/// `lp ≤ opt ≤ alg_cost` (where the optimum is computed) and relies on the
/// runtime certification inside the solver; any violation is an error.
pub fn bench(config: &BenchConfig) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for n in config.n_min..=config.n_max {
        for prob in &config.probs {
            for seed in 1..=config.seeds {
                rows.push(bench_row(n, prob, seed, config)?);
            }
        }
    }
    Ok(rows)
}

pub fn bench_row(n: usize, prob: &Rat, seed: u64, config: &BenchConfig) -> Result<ExperimentRow> {
    let started = Instant::now();
    let g = generate_unit_instance(n, prob, seed)?;
    let inst = from_unit_graph(g)?;
    let backbone = Backbone::empty();
    let (_, report) = run(&inst, &backbone, &config.algo)?;
    let lp = inst.lp_value().clone();
    let alg_cost = report.tour_cost.clone();
    let opt = if n <= config.opt_limit {
        Some(exact_opt(&inst.g)?)
    } else {
        None
    };
    if let Some(opt) = &opt {
        if !(lp <= *opt && *opt <= alg_cost) {
            return Err(Error::CertificationFailed(format!(
                "sandwich violated at n={} seed={}: lp={} opt={} alg={}",
                n,
                seed,
                format_rat(&lp),
                format_rat(opt),
                format_rat(&alg_cost)
            )));
        }
    }
    if alg_cost < lp {
        return Err(Error::CertificationFailed(format!(
            "tour beats the LP lower bound at n={} seed={}",
            n, seed
        )));
    }
    let ratio_alg_lp = &alg_cost / &lp;
    Ok(ExperimentRow {
        n,
        seed,
        prob: prob.clone(),
        lp,
        alg_cost,
        opt,
        ratio_alg_lp,
        restarts: report.restarts,
        runtime_ms: started.elapsed().as_millis(),
    })
}

/// CSV rendering, ordered as computed. Timings are off by default so the
/// output is byte-identical across runs with the same config and seeds.
pub fn rows_to_csv(rows: &[ExperimentRow], include_timings: bool) -> String {
    let mut out = String::new();
    out.push_str("n,seed,prob,lp,alg_cost,opt,ratio_alg_lp,restarts");
    if include_timings {
        out.push_str(",runtime_ms");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            row.n,
            row.seed,
            format_rat(&row.prob),
            format_rat(&row.lp),
            format_rat(&row.alg_cost),
            row.opt.as_ref().map(format_rat).unwrap_or_default(),
            format_rat(&row.ratio_alg_lp),
            row.restarts
        ));
        if include_timings {
            out.push_str(&format!(",{}", row.runtime_ms));
        }
        out.push('\n');
    }
    out
}
