//! The acceptance suite: ten numbered criteria exercising the analytic
//! constants, both trainers, the sampling constructions, and the recursion
//! certificates, each with its tolerances pinned in code. Statistical
//! tolerances (3-sigma bands, absolute Monte-Carlo slack) scale with
//! `tolerance_scale` so a zeroed scale demonstrates the checks are live.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tron_core::adversary::{make_realization_attack, BetaFn, OracleConfig, Perturbation};
use tron_core::data::Dataset;
use tron_core::distributions::{estimate_moments, InputDistribution, MomentEstimates};
use tron_core::error::Result;
use tron_core::glm_tron::{
    check_step_decrease, glm_tron_run, noise_risk_certificate, Activation, GlmTronConfig,
};
use tron_core::linalg::{leaky_relu, relu, spectral_norm};
use tron_core::neurotron::{
    consistency_check, lemma2_check, net_forward, neurotron_gradient, neurotron_run,
    sample_full_rank_m, sample_net_class, surrogate_risk, theorem5_schedule, NetClass,
};
use tron_core::recursion::{certify_draws, LemmaId};
use tron_core::relu_tron::{
    case1_schedule, case2_schedule, contraction_ratios, default_gamma, default_k,
    relu_tron_train, CaseConstants, ReluTronConfig, DEFAULT_DELTA0,
};
use tron_core::{RealMatrix, RealVector};

#[derive(Debug, Clone, Copy)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Multiplier on statistical tolerances; 1.0 for real runs, 0.0 to
    /// verify that the Monte-Carlo checks can fail.
    pub tolerance_scale: f64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            seed: 7,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub check: String,
    pub measured: f64,
    pub requirement: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

pub const CRITERION_IDS: [&str; 13] = [
    "1", "2", "3", "4", "5", "6", "7", "8", "9a", "9b", "9c", "9d", "10",
];

pub fn run_all(opts: &AcceptanceOptions) -> Result<Vec<CriterionResult>> {
    CRITERION_IDS
        .iter()
        .map(|id| run_criterion(id, opts))
        .collect()
}

pub fn run_criterion(id: &str, opts: &AcceptanceOptions) -> Result<CriterionResult> {
    match id {
        "1" => criterion_1(opts),
        "2" => criterion_2(opts),
        "3" => criterion_3(opts),
        "4" => criterion_4(opts),
        "5" => criterion_5(opts),
        "6" => criterion_6(opts),
        "7" => criterion_7(opts),
        "8" => criterion_8(opts),
        "9a" => criterion_9a(opts),
        "9b" => criterion_9b(opts),
        "9c" => criterion_9c(opts),
        "9d" => criterion_9d(opts),
        "10" => criterion_10(opts),
        other => Err(tron_core::TronError::InvalidParameter {
            name: "criterion",
            detail: format!("unknown criterion {other:?}"),
        }),
    }
}

fn sub_seed(opts: &AcceptanceOptions, salt: u64) -> u64 {
    opts.seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(salt)
}

fn push(checks: &mut Vec<CheckLine>, check: impl Into<String>, measured: f64, requirement: impl Into<String>, passed: bool) {
    checks.push(CheckLine {
        check: check.into(),
        measured,
        requirement: requirement.into(),
        passed,
    });
}

fn result(id: &'static str, name: &'static str, checks: Vec<CheckLine>) -> CriterionResult {
    let passed = checks.iter().all(|c| c.passed);
    CriterionResult {
        id,
        name,
        passed,
        checks,
    }
}

/// Least-squares slope of `ys` against 0..len.
fn regression_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

fn box2() -> InputDistribution {
    InputDistribution::unit_box(2)
}

fn w_example() -> RealVector {
    RealVector::new(vec![-1.0, 1.0]).unwrap()
}

const MC_ACCEPT: usize = 1_000_000;

// --- criterion 1: analytic-constant reproduction on the boxed 2-d example ---

fn criterion_1(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let scale = opts.tolerance_scale;
    // pinned values: 1/6 at theta* = 0 and 1/96 at event threshold 2 theta* = 1
    // (theta* = 0.5; the circulating "lambda1(1)" label conflates the event
    // threshold with theta*, see the supplementary check below)
    let pins = [(0.0f64, 1.0 / 6.0), (0.5, 1.0 / 96.0)];
    for (i, (theta, pin)) in pins.iter().enumerate() {
        let m = estimate_moments(
            &box2(),
            &w_example(),
            *theta,
            &BetaFn::constant(1.0),
            MC_ACCEPT,
            sub_seed(opts, 100 + i as u64),
        )?;
        let diff = (m.lambda1_theta - pin).abs();
        push(
            &mut checks,
            format!("lambda1({theta}) vs {pin:.6} within 3 std errs"),
            diff,
            format!("<= {:.2e}", scale * 3.0 * m.std_err.lambda1_theta),
            diff <= scale * 3.0 * m.std_err.lambda1_theta,
        );
        push(
            &mut checks,
            format!("lambda1({theta}) vs {pin:.6} absolute"),
            diff,
            format!("<= {:.3}", scale * 0.005),
            diff <= scale * 0.005,
        );
    }
    // at theta* = 1 the threshold-2theta* event is empty: exactly zero
    let m1 = estimate_moments(
        &box2(),
        &w_example(),
        1.0,
        &BetaFn::constant(1.0),
        MC_ACCEPT,
        sub_seed(opts, 102),
    )?;
    push(
        &mut checks,
        "lambda1(1.0) empty-event sanity",
        m1.lambda1_theta,
        "== 0 exactly",
        m1.lambda1_theta == 0.0,
    );
    Ok(result("1", "analytic-constant reproduction (2-d box example)", checks))
}

// --- criterion 2: gaussian example ---

fn criterion_2(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let scale = opts.tolerance_scale;
    let d = InputDistribution::isotropic_gaussian(1, 1.0)?;
    let m = estimate_moments(
        &d,
        &RealVector::new(vec![1.0])?,
        0.0,
        &BetaFn::constant(1.0),
        MC_ACCEPT,
        sub_seed(opts, 200),
    )?;
    // quadrature oracle: integral_0^inf x^2 phi(x) dx = 1/2
    let diff = (m.lambda1_theta - 0.5).abs();
    push(
        &mut checks,
        "gaussian lambda1(0) vs 0.5 absolute",
        diff,
        format!("<= {:.3}", scale * 0.005),
        diff <= scale * 0.005,
    );
    push(
        &mut checks,
        "gaussian lambda1(0) vs 0.5 within 3 std errs",
        diff,
        format!("<= {:.2e}", scale * 3.0 * m.std_err.lambda1_theta),
        diff <= scale * 3.0 * m.std_err.lambda1_theta,
    );
    Ok(result("2", "gaussian truncated second moment", checks))
}

// --- criterion 3: Case I convergence with contraction and rate regression ---

fn case1_setup(
    opts: &AcceptanceOptions,
    salt: u64,
    batch: usize,
    eps: f64,
    delta: f64,
) -> Result<(MomentEstimates, CaseConstants)> {
    let m = estimate_moments(
        &box2(),
        &w_example(),
        0.0,
        &BetaFn::constant(1.0),
        MC_ACCEPT,
        sub_seed(opts, salt),
    )?;
    let w_err0 = w_example().norm_sq();
    let s = case1_schedule(&m, batch, DEFAULT_DELTA0, w_err0, eps, delta)?;
    Ok((m, s))
}

fn criterion_3(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let scale = opts.tolerance_scale;
    let (eps, delta) = (1e-2, 0.1);
    let (_, schedule) = case1_setup(opts, 300, 8, eps, delta)?;
    let oracle = OracleConfig::honest(w_example());
    let cfg = ReluTronConfig::new(8, schedule.eta, 100_000, RealVector::zeros(2))?;
    let report = relu_tron_train(&box2(), &oracle, &cfg, &schedule, 50, sub_seed(opts, 301))?;

    push(
        &mut checks,
        "success rate over 50 repeats",
        report.success_rate,
        ">= 0.9",
        report.success_rate >= 0.9,
    );
    let emp_t = report
        .empirical_convergence_step
        .map(|t| t as f64)
        .unwrap_or(f64::INFINITY);
    push(
        &mut checks,
        "empirical convergence step vs 2x predicted T",
        emp_t,
        format!("<= {}", 2 * schedule.predicted_t),
        emp_t <= (2 * schedule.predicted_t) as f64,
    );
    let ratios = contraction_ratios(&report);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for (ratio, se) in &ratios {
        let excess = ratio - (schedule.alpha_rate + scale * 3.0 * se);
        worst_excess = worst_excess.max(excess);
        if excess > 0.0 {
            violations += 1;
        }
    }
    push(
        &mut checks,
        "per-step contraction of mean sq err (violations)",
        violations as f64,
        format!("0 steps above alpha + 3 se (alpha = {:.4})", schedule.alpha_rate),
        violations == 0,
    );
    // headline rate: slope of log mean-squared-error vs t
    let t_star = report
        .empirical_convergence_step
        .unwrap_or(report.steps)
        .max(2);
    let logs: Vec<f64> = report.mean_sq_err[..=t_star]
        .iter()
        .map(|x| x.max(1e-300).ln())
        .collect();
    let slope = regression_slope(&logs);
    let cap = schedule.alpha_rate.ln() + 0.05;
    push(
        &mut checks,
        "log-linear rate regression slope",
        slope,
        format!("<= ln(alpha) + 0.05 = {cap:.4}"),
        slope <= cap,
    );
    Ok(result("3", "Case I convergence (clean labels, batch 8)", checks))
}

// --- criterion 4: Case II error floors and their corruption scaling ---

fn criterion_4(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let thetas = [0.025f64, 0.05, 0.1];
    let delta = 0.1;
    let mut measured_floors = Vec::new();
    for (i, theta) in thetas.iter().enumerate() {
        let m = estimate_moments(
            &box2(),
            &w_example(),
            *theta,
            &BetaFn::constant(0.2),
            MC_ACCEPT,
            sub_seed(opts, 400 + i as u64),
        )?;
        let k = default_k(m.lambda1_theta)?;
        let b1 = 2.0 * m.lambda1_theta - 1.0 / k;
        let c3 = k * theta * theta * m.beta1 * m.beta1;
        let target = 4.0 * c3 / b1;
        let eps = (target / delta).sqrt();
        let w_err0 = w_example().norm_sq();
        let gamma = default_gamma(&m, 8, k, w_err0, eps, delta)?;
        let mut schedule = case2_schedule(&m, 8, k, gamma, w_err0, eps, delta)?;
        // run past the predicted horizon so the trajectory has plateaued
        schedule.predicted_t *= 2;
        let oracle = OracleConfig::new(
            w_example(),
            *theta,
            BetaFn::constant(0.2),
            Perturbation::Uniform,
        )?;
        let cfg = ReluTronConfig::new(8, schedule.eta, 100_000, RealVector::zeros(2))?;
        let report =
            relu_tron_train(&box2(), &oracle, &cfg, &schedule, 50, sub_seed(opts, 410 + i as u64))?;
        let terminal = *report.mean_sq_err.last().expect("non-empty");
        push(
            &mut checks,
            format!("theta* = {theta}: mean terminal sq err"),
            terminal,
            format!(
                "<= predicted floor + eps^2 delta = {:.3e}",
                schedule.predicted_floor + target
            ),
            terminal <= schedule.predicted_floor + target,
        );
        // plateau estimate: tail mean over the last quarter of the run
        let tail = report.steps / 4;
        let tail_vals = &report.mean_sq_err[report.mean_sq_err.len() - tail.max(1)..];
        let floor_est = tail_vals.iter().sum::<f64>() / tail_vals.len() as f64;
        measured_floors.push(floor_est);
    }
    push(
        &mut checks,
        "measured floors monotone increasing in theta*",
        measured_floors[2] - measured_floors[0],
        "f(0.025) < f(0.05) < f(0.1)",
        measured_floors[0] < measured_floors[1] && measured_floors[1] < measured_floors[2],
    );
    for i in 0..2 {
        let ratio = measured_floors[i + 1] / measured_floors[i];
        push(
            &mut checks,
            format!(
                "floor({}) / floor({}) quadratic scaling",
                thetas[i + 1],
                thetas[i]
            ),
            ratio,
            "in [2, 8]",
            (2.0..=8.0).contains(&ratio),
        );
    }
    Ok(result("4", "Case II floors under 20% corruption", checks))
}

// --- criterion 5: batch-size monotonicity ---

fn criterion_5(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let (eps, delta) = (1e-2, 0.1);
    let m = estimate_moments(
        &box2(),
        &w_example(),
        0.0,
        &BetaFn::constant(1.0),
        MC_ACCEPT,
        sub_seed(opts, 500),
    )?;
    let oracle = OracleConfig::honest(w_example());
    let w_err0 = w_example().norm_sq();
    let batches = [1usize, 2, 4, 8, 16, 32];
    let mut predicted = Vec::new();
    let mut empirical = Vec::new();
    for (i, b) in batches.iter().enumerate() {
        let mut s = case1_schedule(&m, *b, DEFAULT_DELTA0, w_err0, eps, delta)?;
        predicted.push(s.predicted_t);
        // 30% headroom so the mean trajectory's crossing point is observed
        s.predicted_t = (s.predicted_t as f64 * 1.3).ceil() as usize;
        let cfg = ReluTronConfig::new(*b, s.eta, 100_000, RealVector::zeros(2))?;
        let report = relu_tron_train(&box2(), &oracle, &cfg, &s, 50, sub_seed(opts, 510 + i as u64))?;
        empirical.push(
            report
                .empirical_convergence_step
                .map(|t| t as f64)
                .unwrap_or(f64::INFINITY),
        );
    }
    let pred_ok = predicted.windows(2).all(|w| w[1] <= w[0]);
    push(
        &mut checks,
        "predicted T non-increasing over b in {1..32}",
        predicted[predicted.len() - 1] as f64,
        format!("sequence {predicted:?} non-increasing"),
        pred_ok,
    );
    let emp_ok = empirical.windows(2).all(|w| w[1] <= w[0] + 1.0);
    push(
        &mut checks,
        "empirical convergence step non-increasing within 1",
        empirical[empirical.len() - 1],
        format!("sequence {empirical:?} within one step of monotone"),
        emp_ok,
    );
    Ok(result("5", "batch-size monotonicity of convergence time", checks))
}

// --- criterion 6: realization attack saturates the recovery bound ---

fn criterion_6(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let w_star = w_example();
    let mut w_adv = w_star.clone();
    w_adv.axpy(0.3, &RealVector::basis(2, 0));
    let oracle = make_realization_attack(w_star.clone(), w_adv.clone(), 2.0f64.sqrt())?;
    // data is exactly realizable by w_adv, so Case I applies relative to it
    let m_adv = estimate_moments(
        &box2(),
        &w_adv,
        0.0,
        &BetaFn::constant(1.0),
        MC_ACCEPT,
        sub_seed(opts, 600),
    )?;
    let schedule = case1_schedule(&m_adv, 8, DEFAULT_DELTA0, w_adv.norm_sq(), 1e-4, 0.1)?;
    let cfg = ReluTronConfig::new(8, schedule.eta, 100_000, RealVector::zeros(2))?;
    let report = relu_tron_train(&box2(), &oracle, &cfg, &schedule, 5, sub_seed(opts, 601))?;
    let mut worst_adv: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for w in &report.terminal_weights {
        worst_adv = worst_adv.max(w.sub(&w_adv).norm());
        worst_gap = worst_gap.max((w.sub(&w_star).norm() - 0.3).abs());
    }
    push(
        &mut checks,
        "terminal distance to w_adv (worst of 5 repeats)",
        worst_adv,
        "< 1e-3",
        worst_adv < 1e-3,
    );
    push(
        &mut checks,
        "measured error to w* saturates ||w_adv - w*|| = 0.3",
        worst_gap,
        "<= 1e-3",
        worst_gap <= 1e-3,
    );
    Ok(result("6", "realization attack converges to the adversary's filter", checks))
}

// --- criteria 7/8: GLM-Tron ---

/// Uniform unit-disc points labeled by a ReLU gate plus caller noise.
fn unit_disc_dataset(
    w_star: &RealVector,
    s: usize,
    rng: &mut ChaCha8Rng,
    mut noise: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Dataset {
    let n = w_star.dim();
    let mut pairs = Vec::with_capacity(s);
    for _ in 0..s {
        let dir: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radius = rng.random::<f64>().powf(1.0 / n as f64);
        let x: Vec<f64> = dir.iter().map(|v| v / norm.max(1e-12) * radius).collect();
        let xv = RealVector::new(x.clone()).unwrap();
        let y = relu(w_star.dot(&xv)) + noise(rng);
        pairs.push((x, y));
    }
    Dataset::from_pairs(pairs).unwrap()
}

fn criterion_7(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let w_star = RealVector::new(vec![0.6, 0.8])?;
    let eps = 0.05;
    let cfg = GlmTronConfig::new(Activation::relu(), 10_000, eps)?;
    let mut successes = 0usize;
    let mut first_logs: Option<Vec<f64>> = None;
    for i in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 700 + i));
        let d = unit_disc_dataset(&w_star, 200, &mut rng, |_| 0.0);
        let trace = glm_tron_run(&d, &cfg, Some(&w_star))?;
        let terminal = *trace.effective_erm.last().expect("non-empty");
        if terminal < eps {
            successes += 1;
        }
        if first_logs.is_none() {
            let logs: Vec<f64> = trace
                .effective_erm
                .iter()
                .take_while(|v| **v > 1e-18)
                .map(|v| v.ln())
                .collect();
            first_logs = Some(logs);
        }
    }
    push(
        &mut checks,
        "effective risk below eps at T = 20 (seeds passing)",
        successes as f64,
        "20 / 20",
        successes == 20,
    );

    // per-step decrease property across 100 randomized instances, including
    // bounded adversarial noise up to 0.1; labels are realizable under each
    // instance's own gate so eta = theta is a valid residual bound
    let mut all_hold = 0usize;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 800 + i));
        let n = 1 + (i as usize % 4);
        let act = match i % 3 {
            0 => Activation::relu(),
            1 => Activation::leaky_relu(0.3)?,
            _ => Activation::clipped_linear(),
        };
        let w_gen = RealVector::new((0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())?;
        let theta = if i % 2 == 0 { 0.0 } else { 0.1 * rng.random::<f64>() };
        let base = unit_disc_dataset(&w_gen, 40 + i as usize % 60, &mut rng, |_| 0.0);
        let relabeled: Vec<(Vec<f64>, f64)> = base
            .iter()
            .map(|s| {
                let y = act.eval(w_gen.dot(&s.x)) + theta * (2.0 * rng.random::<f64>() - 1.0);
                (s.x.as_slice().to_vec(), y)
            })
            .collect();
        let d = Dataset::from_pairs(relabeled)?;
        let inst_cfg = GlmTronConfig::new(act, 25, 0.05)?;
        let trace = glm_tron_run(&d, &inst_cfg, Some(&w_gen))?;
        let w_cap = trace
            .iterates
            .iter()
            .map(|w| w.sub(&w_gen).norm())
            .fold(0.0f64, f64::max);
        let oks = check_step_decrease(&trace, &d, &w_gen, theta, w_cap + 1e-9)?;
        if oks.iter().all(|b| *b) {
            all_hold += 1;
        }
    }
    push(
        &mut checks,
        "per-step decrease holds on randomized instances",
        all_hold as f64,
        "100 / 100",
        all_hold == 100,
    );

    // headline: realizable training decays its risk log-linearly
    let logs = first_logs.expect("at least one run");
    if logs.len() >= 3 {
        let slope = regression_slope(&logs[..]);
        push(
            &mut checks,
            "log effective-risk regression slope",
            slope,
            "<= -0.05",
            slope <= -0.05,
        );
    }
    Ok(result("7", "GLM-Tron realizable convergence and step decrease", checks))
}

fn criterion_8(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let w_star = RealVector::new(vec![0.6, 0.8])?;
    let eps = 0.05;
    let theta = 0.1;
    let cfg = GlmTronConfig::new(Activation::relu(), 10_000, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 900));
    // fixed inputs, fresh centered noise each redraw
    let base = unit_disc_dataset(&w_star, 200, &mut rng, |_| 0.0);
    let mut acc = 0.0;
    let redraws = 200;
    for _ in 0..redraws {
        let noisy: Vec<(Vec<f64>, f64)> = base
            .iter()
            .map(|s| {
                let xi = theta * (2.0 * rng.random::<f64>() - 1.0);
                (s.x.as_slice().to_vec(), s.y + xi)
            })
            .collect();
        let d = Dataset::from_pairs(noisy)?;
        let trace = glm_tron_run(&d, &cfg, Some(&w_star))?;
        acc += *trace.true_erm.last().expect("non-empty");
    }
    let avg = acc / redraws as f64;
    // E[xi^2] = theta^2/3 = 1/300 for Unif[-0.1, 0.1]
    let cert = noise_risk_certificate(avg, 0.01 / 3.0, 1.0, eps, theta, w_star.norm())?;
    push(
        &mut checks,
        "200-redraw average terminal risk vs certificate",
        avg,
        format!("<= {:.6}", cert.bound),
        cert.satisfied,
    );
    Ok(result("8", "expected-risk certificate under centered noise", checks))
}

// --- criterion 9: Neuro-Tron ---

fn criterion_9a(_opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let d = Dataset::from_pairs(vec![(vec![1.0], 0.0), (vec![-1.0], 0.0)])?;
    let nc = NetClass::relu_gate(1);
    let m = RealMatrix::identity(1);
    let schedule = theorem5_schedule(&nc, &m, 1.0, 1.0, 0.0, f64::NAN, 2.0, 1.0, 1e-6)?;
    let trace = neurotron_run(&d, &nc, &m, schedule.eta, 200, &RealVector::new(vec![1.0])?)?;
    let terminal = trace.last().expect("non-empty").get(0).abs();
    push(
        &mut checks,
        "two-point example |w_T| within 200 steps",
        terminal,
        "< 1e-6",
        terminal < 1e-6,
    );
    Ok(result("9a", "two-point interpolation reaches the zero filter", checks))
}

fn sphere_points(n: usize, half: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * half);
    for _ in 0..half {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = raw.iter().map(|v| v / norm.max(1e-9)).collect();
        out.push(x.iter().map(|v| -v).collect());
        out.push(x);
    }
    out
}

fn realizable_symmetric_dataset(
    nc: &NetClass,
    w_ref: &RealVector,
    half: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset> {
    let pts = sphere_points(nc.input_dim(), half, rng);
    let pairs: Vec<(Vec<f64>, f64)> = pts
        .into_iter()
        .map(|x| {
            let xv = RealVector::new(x.clone())?;
            Ok((x, net_forward(nc, w_ref, &xv)?))
        })
        .collect::<Result<_>>()?;
    Dataset::from_pairs(pairs)
}

fn criterion_9b(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 910));
    let m_raw = sample_full_rank_m(3, 4, 30, &mut rng)?;
    let m = m_raw.scale(1.0 / spectral_norm(&m_raw));
    let c = {
        let entries: Vec<f64> = (0..12).map(|_| 0.04 * (rng.random::<f64>() - 0.5)).collect();
        RealMatrix::new(3, 4, entries)?
    };
    let nc = sample_net_class(&m, &c, 2, 0.0)?;
    let w_ref = RealVector::new(vec![0.4, -0.3, 0.8])?;
    let d = realizable_symmetric_dataset(&nc, &w_ref, 10, &mut rng)?;
    let sigma = d.empirical_covariance();
    let (consistent, lambda1) = consistency_check(&nc, &sigma, &m)?;
    push(
        &mut checks,
        "sampled pair is consistent (lambda1 > 0)",
        lambda1,
        "> 0",
        consistent,
    );
    let eps = 1e-6;
    let run = |w_init: &RealVector| -> Result<(Vec<RealVector>, usize, f64)> {
        let s = theorem5_schedule(
            &nc,
            &m,
            d.radius(),
            lambda1,
            0.0,
            f64::NAN,
            2.0,
            w_init.distance_sq(&w_ref),
            eps,
        )?;
        let trace = neurotron_run(&d, &nc, &m, s.eta, s.predicted_t, w_init)?;
        Ok((trace, s.predicted_t, s.alpha_rate))
    };
    let w_init_a = RealVector::new(vec![0.9, -0.3, 0.8])?;
    let (trace_a, predicted_t, alpha_rate) = run(&w_init_a)?;
    let err_a = trace_a.last().expect("non-empty").sub(&w_ref).norm();
    push(
        &mut checks,
        format!("recovery error within predicted T = {predicted_t}"),
        err_a,
        "< 1e-6",
        err_a < eps,
    );
    let w_init_b = RealVector::new(vec![-0.2, 0.5, 0.2])?;
    let (trace_b, _, _) = run(&w_init_b)?;
    let gap = trace_a
        .last()
        .expect("non-empty")
        .sub(trace_b.last().expect("non-empty"))
        .norm();
    push(
        &mut checks,
        "two inits agree at termination (uniqueness)",
        gap,
        "< 2e-6",
        gap < 2.0 * eps,
    );
    // headline rate regression on the first run
    let logs: Vec<f64> = trace_a
        .iter()
        .map(|w| w.distance_sq(&w_ref))
        .take_while(|v| *v > 1e-24)
        .map(|v| v.ln())
        .collect();
    if logs.len() >= 3 {
        let slope = regression_slope(&logs);
        let cap = alpha_rate.ln() + 0.05;
        push(
            &mut checks,
            "log squared-error regression slope",
            slope,
            format!("<= ln(alpha) + 0.05 = {cap:.4}"),
            slope <= cap,
        );
    }
    Ok(result("9b", "sampled net class: geometric recovery and uniqueness", checks))
}

fn criterion_9c(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let mut lemma2_ok = 0usize;
    let mut lemma4_ok = 0usize;
    let instances = 100u64;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 920 + i));
        let r = 2 + (i as usize % 2);
        let n = r + 1;
        let alpha = [0.0, 0.1, 1.0][i as usize % 3];
        let m_raw = sample_full_rank_m(r, n, 20, &mut rng)?;
        let m = m_raw.scale(1.0 / spectral_norm(&m_raw));
        let c = {
            let entries: Vec<f64> = (0..r * n)
                .map(|_| 0.05 * (rng.random::<f64>() - 0.5))
                .collect();
            RealMatrix::new(r, n, entries)?
        };
        let nc = sample_net_class(&m, &c, 1 + i as usize % 2, alpha)?;
        let w_ref = RealVector::new((0..r).map(|_| rng.random::<f64>() - 0.5).collect())?;
        let theta = if i % 2 == 0 { 0.0 } else { 0.05 };
        let base = realizable_symmetric_dataset(&nc, &w_ref, 8, &mut rng)?;
        let d = if theta == 0.0 {
            base
        } else {
            // bounded label perturbation; the reference filter's residual
            // bound is then computed exactly by the checker
            let pairs: Vec<(Vec<f64>, f64)> = base
                .iter()
                .map(|s| {
                    (
                        s.x.as_slice().to_vec(),
                        s.y + theta * (2.0 * rng.random::<f64>() - 1.0),
                    )
                })
                .collect();
            Dataset::from_pairs(pairs)?
        };
        let sigma = d.empirical_covariance();
        let (consistent, lambda1) = consistency_check(&nc, &sigma, &m)?;
        if !consistent {
            continue; // measure-zero with these generators
        }
        let s = theorem5_schedule(&nc, &m, d.radius(), lambda1, 0.0, f64::NAN, 2.0, 1.0, 1e-4)?;
        let w_init = RealVector::new((0..r).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())?;
        let trace = neurotron_run(&d, &nc, &m, s.eta, 40, &w_init)?;
        if lemma2_check(&trace, &d, &nc, &m, &w_ref, s.eta)?.iter().all(|b| *b) {
            lemma2_ok += 1;
        }

        // reflection identity on the same symmetric input set
        let a_probe = {
            let entries: Vec<f64> = (0..r * n)
                .map(|_| 2.0 * (rng.random::<f64>() - 0.5))
                .collect();
            RealMatrix::new(r, n, entries)?
        };
        let m_probe = {
            let entries: Vec<f64> = (0..r * n)
                .map(|_| 2.0 * (rng.random::<f64>() - 0.5))
                .collect();
            RealMatrix::new(r, n, entries)?
        };
        let z1 = RealVector::new((0..r).map(|_| rng.random::<f64>() - 0.5).collect())?;
        let z2 = RealVector::new((0..r).map(|_| rng.random::<f64>() - 0.5).collect())?;
        let lhs: f64 = d
            .iter()
            .map(|smp| {
                leaky_relu(z1.dot(&a_probe.matvec(&smp.x)), alpha) * m_probe.matvec(&smp.x).dot(&z2)
            })
            .sum();
        let rhs = d.len() as f64 * (1.0 + alpha) / 2.0
            * z1.dot(
                &a_probe
                    .matmul(&d.empirical_covariance())
                    .matmul(&m_probe.transpose())
                    .matvec(&z2),
            );
        if (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0) {
            lemma4_ok += 1;
        }
    }
    push(
        &mut checks,
        "consecutive-iterate inequality instances",
        lemma2_ok as f64,
        "100 / 100",
        lemma2_ok == instances as usize,
    );
    push(
        &mut checks,
        "reflection identity instances (1e-9 relative)",
        lemma4_ok as f64,
        "100 / 100",
        lemma4_ok == instances as usize,
    );
    Ok(result("9c", "per-step inequality and reflection identity sweeps", checks))
}

fn criterion_9d(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(opts, 930));
    let a_raw = sample_full_rank_m(2, 2, 12, &mut rng)?;
    let a1 = a_raw.scale(1.0 / spectral_norm(&a_raw));
    let nc = NetClass::new(0.0, vec![a1.clone()])?;
    let w_gen = RealVector::new(vec![0.7, -0.4])?;
    let d = realizable_symmetric_dataset(&nc, &w_gen, 12, &mut rng)?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let w = RealVector::new(vec![
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        ])?;
        let g = neurotron_gradient(&d, &nc, &a1, &w)?;
        let h = 1e-6;
        let mut fd = Vec::with_capacity(2);
        for i in 0..2 {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp.axpy(h, &RealVector::basis(2, i));
            wm.axpy(-h, &RealVector::basis(2, i));
            fd.push(
                (surrogate_risk(&d, &nc, &wp)? - surrogate_risk(&d, &nc, &wm)?) / (2.0 * h),
            );
        }
        let fd = RealVector::new(fd)?;
        let rel = fd.add(&g).norm() / g.norm().max(1e-6);
        worst = worst.max(rel);
    }
    push(
        &mut checks,
        "finite-difference surrogate gradient vs -g (worst rel err)",
        worst,
        "<= 1e-5",
        worst <= 1e-5,
    );
    Ok(result("9d", "surrogate-risk gradient matches the update direction", checks))
}

// --- criterion 10: recursion certification ---

fn criterion_10(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for (i, lemma) in [LemmaId::Recurse1, LemmaId::Recurse2, LemmaId::Recurse2Lemma6]
        .iter()
        .enumerate()
    {
        let report = certify_draws(*lemma, 500, sub_seed(opts, 1000 + i as u64))?;
        push(
            &mut checks,
            format!("{lemma:?} certified draws"),
            report.certified as f64,
            "500 / 500",
            report.certified == 500,
        );
        if matches!(lemma, LemmaId::Recurse2Lemma6) {
            push(
                &mut checks,
                "floor matches beta/(1-alpha) closed form",
                report.max_floor_gap,
                "<= 1e-10",
                report.max_floor_gap <= 1e-10,
            );
        }
    }
    Ok(result("10", "recursion bounds certified by worst-case unrolling", checks))
}

/// The one-line-per-criterion table the suite prints.
pub fn format_table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("[{status}] criterion {:>2}  {}\n", r.id, r.name));
        for c in &r.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!(
                "    {mark} {:<55} measured {: <12.6e} requirement {}\n",
                c.check, c.measured, c.requirement
            ));
        }
    }
    let total = results.len();
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{total} criteria passed\n"));
    out
}
