//! Modified mini-batch SGD for a single ReLU gate under the probabilistic
//! label-corruption oracle: the update keeps only batch samples whose label
//! clears the corruption bound,
//!
//! ```text
//! g_t = -(1/b) sum_i 1{y_i > theta*} (y_i - w_t.x_i) x_i,    w_{t+1} = w_t - eta g_t
//! ```
//!
//! and the Case I / Case II schedules turn the moment constants into a step
//! size, a per-step mean-square contraction factor, a predicted iteration
//! count, and (Case II) the irreducible error floor.
//!
//! Constant conventions: the recursion-level `c2p`/`c3p` recorded here follow
//! the contraction recursion actually analyzed (additive terms
//! `eta^2 c2 + eta c3` with `c2 = (theta*^2/b)(beta3^2 + (beta2 a1)^2 (b-1) +
//! beta2 + (b-1) beta1^2)` and `c3 = K theta*^2 beta1^2`). A circulating
//! statement-level variant divides the `c2` block by `beta1` instead of `b`;
//! the two do not reconcile, so that variant is carried verbatim in
//! `theorem_c2p`/`theorem_c3p` for reference and is not used in schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{query, OracleConfig, OracleReply};
use crate::distributions::{InputDistribution, MomentEstimates};
use crate::error::{Result, TronError};
use crate::linalg::RealVector;
use crate::recursion::{recurse2, recurse_case1, RecursionParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReluTronConfig {
    pub batch_size: usize,
    pub eta: f64,
    pub max_iters: usize,
    /// Arbitrary starting point; the guarantees do not constrain it.
    pub w_init: RealVector,
}

impl ReluTronConfig {
    pub fn new(batch_size: usize, eta: f64, max_iters: usize, w_init: RealVector) -> Result<Self> {
        if batch_size == 0 {
            return Err(TronError::InvalidParameter {
                name: "batch_size",
                detail: "must be >= 1".into(),
            });
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(TronError::InvalidParameter {
                name: "eta",
                detail: format!("must be finite and > 0, got {eta}"),
            });
        }
        Ok(ReluTronConfig {
            batch_size,
            eta,
            max_iters,
            w_init,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseId {
    I,
    II,
}

/// A fully solved schedule: constants, step size, contraction factor,
/// predicted iteration count, and error floor (zero in Case I).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseConstants {
    pub case: CaseId,
    pub b1p: f64,
    pub c1p: f64,
    /// Recursion-level additive constants (theta*^2 absorbed); zero in Case I.
    pub c2p: f64,
    pub c3p: f64,
    /// Statement-level variants (theta*^2 factored out); see module docs.
    pub theorem_c2p: f64,
    pub theorem_c3p: f64,
    pub gamma: f64,
    pub k_const: f64,
    pub delta0: f64,
    pub eta: f64,
    /// Per-step contraction of the mean squared parameter error.
    pub alpha_rate: f64,
    pub predicted_t: usize,
    /// Asymptote of the mean squared error under corruption; 0 in Case I.
    pub predicted_floor: f64,
    pub eps: f64,
    pub delta: f64,
    pub w_err0: f64,
    pub theta_star: f64,
}

fn validate_targets(w_err0: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(w_err0 > 0.0 && w_err0.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "w_err0",
            detail: format!("initial squared error must be finite and > 0, got {w_err0}"),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "eps",
            detail: format!("must be finite and > 0, got {eps}"),
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TronError::InvalidParameter {
            name: "delta",
            detail: format!("must be in (0,1), got {delta}"),
        });
    }
    let target = eps * eps * delta;
    if target >= w_err0 {
        return Err(TronError::AlreadyConverged {
            target,
            initial: w_err0,
        });
    }
    Ok(target)
}

/// Case I (clean labels): `b1 = 2 lambda1`, `c1 = (a4 + a2^2 (b-1))/b`,
/// step `eta = b1 / (c1 (1 + delta0))` under `c1 > b1^2 delta0/(1+delta0)^2`,
/// contraction `alpha = 1 - (b1^2/c1) delta0/(1+delta0)^2`.
pub fn case1_schedule(
    m: &MomentEstimates,
    batch_size: usize,
    delta0: f64,
    w_err0: f64,
    eps: f64,
    delta: f64,
) -> Result<CaseConstants> {
    if batch_size == 0 {
        return Err(TronError::InvalidParameter {
            name: "batch_size",
            detail: "must be >= 1".into(),
        });
    }
    let target = validate_targets(w_err0, eps, delta)?;
    let lambda1 = m.lambda1_theta;
    if !(lambda1 > 0.0) {
        return Err(TronError::hypothesis("lambda1 > 0", lambda1));
    }
    let b = batch_size as f64;
    let b1 = 2.0 * lambda1;
    let c1 = (m.a4 + m.a2 * m.a2 * (b - 1.0)) / b;
    let params = RecursionParams {
        b1,
        c1,
        c2: 0.0,
        c3: 0.0,
        eta_prime: 0.0,
        big_c: w_err0,
        eps_prime_sq: target,
        gamma: 0.0,
        delta0,
    };
    let bound = recurse_case1(&params)?;
    Ok(CaseConstants {
        case: CaseId::I,
        b1p: b1,
        c1p: c1,
        c2p: 0.0,
        c3p: 0.0,
        theorem_c2p: 0.0,
        theorem_c3p: 0.0,
        gamma: f64::NAN,
        k_const: f64::NAN,
        delta0,
        eta: bound.eta_prime,
        alpha_rate: bound.alpha,
        predicted_t: bound.predicted_t,
        predicted_floor: 0.0,
        eps,
        delta,
        w_err0,
        theta_star: 0.0,
    })
}

/// Default slack parameter for Case I; maximizes the contraction whenever the
/// hypothesis `c1 > b1^2/4` admits it.
pub const DEFAULT_DELTA0: f64 = 1.0;

/// Default oversizing of the Case II truncation constant: `K = 2/lambda1`,
/// giving `b1 = 1.5 lambda1`.
pub fn default_k(lambda1_theta: f64) -> Result<f64> {
    if !(lambda1_theta > 0.0) {
        return Err(TronError::hypothesis("lambda1(theta*) > 0", lambda1_theta));
    }
    Ok(2.0 / lambda1_theta)
}

struct Case2Raw {
    b1: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    theorem_c2p: f64,
    theorem_c3p: f64,
}

fn case2_constants(m: &MomentEstimates, batch_size: usize, k_const: f64) -> Result<Case2Raw> {
    if batch_size == 0 {
        return Err(TronError::InvalidParameter {
            name: "batch_size",
            detail: "must be >= 1".into(),
        });
    }
    if !(k_const > 0.0 && k_const.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "K",
            detail: format!("must be finite and > 0, got {k_const}"),
        });
    }
    let lambda1 = m.lambda1_theta;
    let b1 = 2.0 * lambda1 - 1.0 / k_const;
    if !(b1 > 0.0) {
        return Err(TronError::hypothesis("2 lambda1(theta*) - 1/K > 0", b1));
    }
    let b = batch_size as f64;
    let t2 = m.theta_star * m.theta_star;
    let c1 = (1.0 + m.a4 + (1.0 + m.a2 * m.a2) * (b - 1.0)) / b;
    let block = m.beta3 * m.beta3
        + (m.beta2 * m.a1).powi(2) * (b - 1.0)
        + m.beta2
        + (b - 1.0) * m.beta1 * m.beta1;
    let c2 = t2 / b * block;
    let c3 = k_const * t2 * m.beta1 * m.beta1;
    let theorem_c2p = if m.beta1 > 0.0 { block / m.beta1 } else { 0.0 };
    let theorem_c3p = k_const * m.beta1 * m.beta1;
    Ok(Case2Raw {
        b1,
        c1,
        c2,
        c3,
        theorem_c2p,
        theorem_c3p,
    })
}

/// Default `gamma` for Case II: twice the largest lower bound.
pub fn default_gamma(
    m: &MomentEstimates,
    batch_size: usize,
    k_const: f64,
    w_err0: f64,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    let raw = case2_constants(m, batch_size, k_const)?;
    let target = validate_targets(w_err0, eps, delta)?;
    let mut lb = (raw.b1 * raw.b1 / raw.c1).max(1.0);
    if raw.c3 > 0.0 {
        let irreducible = raw.c3 / raw.b1;
        if target <= irreducible {
            return Err(TronError::TargetBelowFloor {
                target,
                floor: irreducible,
            });
        }
        lb = lb.max((target + raw.c2 / raw.c1) / (target - irreducible));
    }
    Ok(2.0 * lb)
}

/// Case II (corrupted labels): constants from the contraction recursion with
/// `b1 = 2 lambda1(theta*) - 1/K`, step `eta = b1/(gamma c1)`, error floor
/// `(c2/c1 + gamma c3/b1)/(gamma - 1)`. With `theta* = 0` the additive terms
/// vanish and the schedule degenerates to a geometric one (floor 0), matching
/// Case I up to the `(1 + a4)` vs `a4` shift in `c1`.
pub fn case2_schedule(
    m: &MomentEstimates,
    batch_size: usize,
    k_const: f64,
    gamma: f64,
    w_err0: f64,
    eps: f64,
    delta: f64,
) -> Result<CaseConstants> {
    let raw = case2_constants(m, batch_size, k_const)?;
    let target = validate_targets(w_err0, eps, delta)?;
    let params = RecursionParams {
        b1: raw.b1,
        c1: raw.c1,
        c2: raw.c2,
        c3: raw.c3,
        eta_prime: 0.0,
        big_c: w_err0,
        eps_prime_sq: target,
        gamma,
        delta0: 0.0,
    };
    let (eta, alpha, floor, predicted_t) = if raw.c2 == 0.0 && raw.c3 == 0.0 {
        // clean-label degeneration: geometric decay at the gamma-tuned step
        let lb = (raw.b1 * raw.b1 / raw.c1).max(1.0);
        if gamma <= lb {
            return Err(TronError::hypothesis(
                "gamma > max(b1'^2/c1', 1)",
                gamma - lb,
            ));
        }
        let eta = raw.b1 / (gamma * raw.c1);
        let alpha = 1.0 - (raw.b1 * raw.b1 / raw.c1) * (1.0 / gamma - 1.0 / (gamma * gamma));
        let steps = ((w_err0 / target).ln() / (1.0 / alpha).ln()).ceil().max(0.0) as usize;
        (eta, alpha, 0.0, 1 + steps)
    } else {
        let bound = recurse2(&params)?;
        (bound.eta_prime, bound.alpha, bound.floor, bound.predicted_t)
    };
    Ok(CaseConstants {
        case: CaseId::II,
        b1p: raw.b1,
        c1p: raw.c1,
        c2p: raw.c2,
        c3p: raw.c3,
        theorem_c2p: raw.theorem_c2p,
        theorem_c3p: raw.theorem_c3p,
        gamma,
        k_const,
        delta0: f64::NAN,
        eta,
        alpha_rate: alpha,
        predicted_t,
        predicted_floor: floor,
        eps,
        delta,
        w_err0,
        theta_star: m.theta_star,
    })
}

/// One thresholded least-squares step on a labeled batch; samples whose label
/// does not exceed the corruption bound contribute nothing.
pub fn relu_tron_step(
    w_t: &RealVector,
    batch: &[(RealVector, OracleReply)],
    theta_star: f64,
    eta: f64,
) -> Result<RealVector> {
    if batch.is_empty() {
        return Err(TronError::InvalidParameter {
            name: "batch",
            detail: "must be non-empty".into(),
        });
    }
    let mut g = RealVector::zeros(w_t.dim());
    let inv_b = 1.0 / batch.len() as f64;
    for (x, reply) in batch {
        if x.dim() != w_t.dim() {
            return Err(TronError::DimensionMismatch {
                context: "relu_tron_step",
                expected: w_t.dim(),
                got: x.dim(),
            });
        }
        if reply.y > theta_star {
            g.axpy(-inv_b * (reply.y - w_t.dot(x)), x);
        }
    }
    let mut w_next = w_t.clone();
    w_next.axpy(-eta, &g);
    Ok(w_next)
}

/// Aggregate result of seeded repeated trainings.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    /// `[repeat][t]` squared distance to the oracle's true filter, `t = 0..=steps`.
    pub per_repeat_sq_err: Vec<Vec<f64>>,
    #[serde(skip)]
    pub terminal_weights: Vec<RealVector>,
    /// Mean over repeats at each step (the Monte-Carlo estimate of the
    /// mean squared error trajectory).
    pub mean_sq_err: Vec<f64>,
    /// Fraction of repeats with terminal squared error <= eps^2.
    pub success_rate: f64,
    /// First step at which the mean trajectory crosses eps^2 delta.
    pub empirical_convergence_step: Option<usize>,
    pub steps: usize,
    pub eps: f64,
    pub delta: f64,
}

/// Run `n_repeats` independent seeded trainings of Algorithm's update for the
/// schedule's predicted step count (capped by `cfg.max_iters`), measuring the
/// squared distance to the oracle's true filter after every step.
///
/// Each repeat draws fresh i.i.d. mini-batches from `dist` (sampling with
/// replacement from the distribution, not epochs over a fixed set) on its own
/// RNG stream, so results are independent of thread scheduling.
pub fn relu_tron_train(
    dist: &InputDistribution,
    oracle: &OracleConfig,
    cfg: &ReluTronConfig,
    schedule: &CaseConstants,
    n_repeats: usize,
    seed: u64,
) -> Result<TrainReport> {
    if n_repeats == 0 {
        return Err(TronError::InvalidParameter {
            name: "n_repeats",
            detail: "must be >= 1".into(),
        });
    }
    if cfg.w_init.dim() != oracle.dim() || dist.dim() != oracle.dim() {
        return Err(TronError::DimensionMismatch {
            context: "relu_tron_train",
            expected: oracle.dim(),
            got: cfg.w_init.dim().max(dist.dim()),
        });
    }
    let steps = schedule.predicted_t.min(cfg.max_iters);
    let runs: Vec<Result<(Vec<f64>, RealVector)>> = (0..n_repeats)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            run_single(dist, oracle, cfg, schedule.eta, steps, &mut rng)
        })
        .collect();

    let mut per_repeat = Vec::with_capacity(n_repeats);
    let mut terminal = Vec::with_capacity(n_repeats);
    for r in runs {
        let (errs, w) = r?;
        per_repeat.push(errs);
        terminal.push(w);
    }
    let mean_sq_err: Vec<f64> = (0..=steps)
        .map(|t| per_repeat.iter().map(|r| r[t]).sum::<f64>() / n_repeats as f64)
        .collect();
    let eps_sq = schedule.eps * schedule.eps;
    let success = per_repeat
        .iter()
        .filter(|r| *r.last().expect("non-empty") <= eps_sq)
        .count() as f64
        / n_repeats as f64;
    let target = eps_sq * schedule.delta;
    let empirical_convergence_step = mean_sq_err.iter().position(|x| *x <= target);
    Ok(TrainReport {
        per_repeat_sq_err: per_repeat,
        terminal_weights: terminal,
        mean_sq_err,
        success_rate: success,
        empirical_convergence_step,
        steps,
        eps: schedule.eps,
        delta: schedule.delta,
    })
}

fn run_single(
    dist: &InputDistribution,
    oracle: &OracleConfig,
    cfg: &ReluTronConfig,
    eta: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, RealVector)> {
    let mut w = cfg.w_init.clone();
    let mut errs = Vec::with_capacity(steps + 1);
    errs.push(w.distance_sq(&oracle.w_star));
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for _ in 0..steps {
        batch.clear();
        for _ in 0..cfg.batch_size {
            let x = dist.sample_one(rng);
            let reply = query(oracle, &x, rng)?;
            batch.push((x, reply));
        }
        w = relu_tron_step(&w, &batch, oracle.theta_star, eta)?;
        errs.push(w.distance_sq(&oracle.w_star));
    }
    Ok((errs, w))
}

/// Per-step ratio of consecutive mean squared errors with a delta-method
/// standard error (covariance included; consecutive errors are strongly
/// correlated across a run). Entries are `(ratio, std_err)` for each step.
pub fn contraction_ratios(report: &TrainReport) -> Vec<(f64, f64)> {
    let n = report.per_repeat_sq_err.len() as f64;
    let steps = report.steps;
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let xs: Vec<f64> = report.per_repeat_sq_err.iter().map(|r| r[t]).collect();
        let ys: Vec<f64> = report.per_repeat_sq_err.iter().map(|r| r[t + 1]).collect();
        let m1 = xs.iter().sum::<f64>() / n;
        let m2 = ys.iter().sum::<f64>() / n;
        let v11 = xs.iter().map(|x| (x - m1) * (x - m1)).sum::<f64>() / n;
        let v22 = ys.iter().map(|y| (y - m2) * (y - m2)).sum::<f64>() / n;
        let c12 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - m1) * (y - m2))
            .sum::<f64>()
            / n;
        if m1 <= 0.0 {
            out.push((f64::NAN, f64::INFINITY));
            continue;
        }
        let ratio = m2 / m1;
        let var = (v22 / (m1 * m1) + m2 * m2 * v11 / m1.powi(4)
            - 2.0 * m2 * c12 / m1.powi(3))
            / n;
        out.push((ratio, var.max(0.0).sqrt()));
    }
    out
}

/// Monte-Carlo check of the conditional drift bound at a fixed iterate: the
/// estimate of `E[<w_t - w*, 1{y > theta*} (y - w_t.x) x>]` must respect
/// `-lambda1(theta*) ||w_t - w*||^2 + theta* beta1 ||w_t - w*||` within MC error.
/// Returns `(mc_mean, mc_std_err, bound_rhs)`.
pub fn term1_conditional_check(
    dist: &InputDistribution,
    oracle: &OracleConfig,
    m: &MomentEstimates,
    w_t: &RealVector,
    mc_samples: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let diff = w_t.sub(&oracle.w_star);
    let dist_norm = diff.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..mc_samples {
        let x = dist.sample_one(&mut rng);
        let reply = query(oracle, &x, &mut rng)?;
        let v = if reply.y > oracle.theta_star {
            (reply.y - w_t.dot(&x)) * diff.dot(&x)
        } else {
            0.0
        };
        sum += v;
        sumsq += v * v;
    }
    let nf = mc_samples as f64;
    let mean = sum / nf;
    let var = (sumsq / nf - mean * mean).max(0.0);
    let se = (var / nf).sqrt();
    let rhs = -m.lambda1_theta * dist_norm * dist_norm
        + oracle.theta_star * m.beta1 * dist_norm;
    Ok((mean, se, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{BetaFn, Perturbation};
    use crate::distributions::estimate_moments;

    fn vecf(v: &[f64]) -> RealVector {
        RealVector::new(v.to_vec()).unwrap()
    }

    fn reply(y: f64) -> OracleReply {
        OracleReply {
            y,
            attacked: false,
            xi: 0.0,
        }
    }

    fn example_moments(theta_star: f64, beta_p: f64) -> MomentEstimates {
        estimate_moments(
            &InputDistribution::unit_box(2),
            &vecf(&[-1.0, 1.0]),
            theta_star,
            &BetaFn::constant(beta_p),
            100_000,
            42,
        )
        .unwrap()
    }

    #[test]
    fn step_formula_single_sample() {
        let w = RealVector::zeros(2);
        let batch = vec![(vecf(&[1.0, 0.0]), reply(0.7))];
        let eta = 0.5;
        let w_next = relu_tron_step(&w, &batch, 0.0, eta).unwrap();
        // g = -0.7 (1,0), so w' = 0.7 eta (1,0)
        assert_eq!(w_next.as_slice(), &[0.7 * eta, 0.0]);
    }

    #[test]
    fn inactive_batch_leaves_weight_unchanged() {
        let w = vecf(&[0.4, -0.2]);
        let batch = vec![
            (vecf(&[1.0, 0.0]), reply(0.05)),
            (vecf(&[0.0, 1.0]), reply(-0.3)),
        ];
        let w_next = relu_tron_step(&w, &batch, 0.1, 1.0).unwrap();
        assert_eq!(w_next, w);
    }

    #[test]
    fn averaging_divides_by_full_batch_size() {
        let w = RealVector::zeros(2);
        let single = relu_tron_step(&w, &[(vecf(&[1.0, 0.0]), reply(0.8))], 0.0, 1.0).unwrap();
        let padded = relu_tron_step(
            &w,
            &[
                (vecf(&[1.0, 0.0]), reply(0.8)),
                (vecf(&[0.0, 1.0]), reply(-1.0)),
            ],
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(padded.get(0), single.get(0) / 2.0);
    }

    #[test]
    fn true_filter_is_a_fixed_point_without_corruption() {
        let w_star = vecf(&[-1.0, 1.0]);
        let oracle = OracleConfig::honest(w_star.clone());
        let dist = InputDistribution::unit_box(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = dist.sample_one(&mut rng);
            let r = query(&oracle, &x, &mut rng).unwrap();
            let w_next = relu_tron_step(&w_star, &[(x, r)], 0.0, 0.7).unwrap();
            assert_eq!(w_next, w_star);
        }
    }

    #[test]
    fn case1_schedule_is_contractive_on_example_moments() {
        let m = example_moments(0.0, 1.0);
        let s = case1_schedule(&m, 8, DEFAULT_DELTA0, 2.0, 1e-2, 0.1).unwrap();
        assert!(s.alpha_rate > 0.0 && s.alpha_rate < 1.0, "alpha {}", s.alpha_rate);
        assert!(s.eta > 0.0);
        assert!(s.predicted_t >= 1);
        assert_eq!(s.predicted_floor, 0.0);
    }

    #[test]
    fn case1_predicted_t_nonincreasing_in_batch_size() {
        let m = example_moments(0.0, 1.0);
        let mut last = usize::MAX;
        for b in [1usize, 2, 4, 8, 16, 32] {
            let s = case1_schedule(&m, b, DEFAULT_DELTA0, 2.0, 1e-2, 0.1).unwrap();
            assert!(
                s.predicted_t <= last,
                "predicted_t increased at b = {b}: {} > {last}",
                s.predicted_t
            );
            last = s.predicted_t;
        }
    }

    #[test]
    fn case1_names_failed_hypothesis() {
        // lambda1 huge relative to c1 so no delta0 = 1 works
        let m = MomentEstimates::analytic(1.0, 0.2, 0.3, 0.2, 0.0, 0.0, 0.0, 10.0, 0.0).unwrap();
        let err = case1_schedule(&m, 1, 1.0, 2.0, 1e-2, 0.1).unwrap_err();
        match err {
            TronError::HypothesisViolated { name, .. } => {
                assert!(name.contains("c1 > b1^2 delta0"), "got {name}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn case1_already_converged_signal() {
        let m = example_moments(0.0, 1.0);
        assert!(matches!(
            case1_schedule(&m, 8, 1.0, 1e-6, 1e-2, 0.1),
            Err(TronError::AlreadyConverged { .. })
        ));
    }

    #[test]
    fn case2_with_zero_theta_degenerates_to_floorless_schedule() {
        let m = example_moments(0.0, 0.2);
        let k = default_k(m.lambda1_theta).unwrap();
        let gamma = default_gamma(&m, 8, k, 2.0, 1e-2, 0.1).unwrap();
        let s = case2_schedule(&m, 8, k, gamma, 2.0, 1e-2, 0.1).unwrap();
        assert_eq!(s.predicted_floor, 0.0);
        assert_eq!(s.c2p, 0.0);
        assert_eq!(s.c3p, 0.0);
        assert!(s.alpha_rate > 0.0 && s.alpha_rate < 1.0);
        // same contraction family as Case I, shifted by the extra 1 + a2^2 block
        let c1_expected = (1.0 + m.a4 + (1.0 + m.a2 * m.a2) * 7.0) / 8.0;
        assert!((s.c1p - c1_expected).abs() < 1e-12);
    }

    #[test]
    fn case2_k_reciprocal_gives_half_b1() {
        let m = example_moments(0.05, 0.2);
        let k = 1.0 / m.lambda1_theta;
        let gamma = default_gamma(&m, 8, k, 2.0, 0.5, 0.5).unwrap();
        let s = case2_schedule(&m, 8, k, gamma, 2.0, 0.5, 0.5).unwrap();
        assert!((s.b1p - m.lambda1_theta).abs() < 1e-12);
    }

    #[test]
    fn case2_example_distribution_constants_finite_with_positive_floor() {
        let m = example_moments(0.05, 0.2);
        let k = default_k(m.lambda1_theta).unwrap();
        // pick a target comfortably above the irreducible floor
        let floor0 = s_floor_seed(&m, k);
        let eps = (4.0 * floor0 / 0.1).sqrt();
        let gamma = default_gamma(&m, 8, k, 2.0, eps, 0.1).unwrap();
        let s = case2_schedule(&m, 8, k, gamma, 2.0, eps, 0.1).unwrap();
        assert!(s.predicted_floor > 0.0);
        assert!(s.predicted_t >= 1 && s.predicted_t < 1_000_000);
        for v in [s.b1p, s.c1p, s.c2p, s.c3p, s.eta, s.alpha_rate, s.predicted_floor] {
            assert!(v.is_finite());
        }
        // recursion-level vs statement-level constants differ exactly by the
        // documented theta*^2/b vs 1/beta1 factor
        let t2 = m.theta_star * m.theta_star;
        assert!((s.c2p - t2 / 8.0 * (s.theorem_c2p * m.beta1)).abs() <= 1e-12 * s.c2p.abs());
        assert!((s.c3p - t2 * s.theorem_c3p).abs() <= 1e-15);
    }

    fn s_floor_seed(m: &MomentEstimates, k: f64) -> f64 {
        // irreducible part of the floor, used to pick sane targets in tests
        let lambda1 = m.lambda1_theta;
        let b1 = 2.0 * lambda1 - 1.0 / k;
        k * m.theta_star * m.theta_star * m.beta1 * m.beta1 / b1
    }

    #[test]
    fn case2_rejects_target_below_floor() {
        let m = example_moments(0.1, 0.5);
        let k = default_k(m.lambda1_theta).unwrap();
        let floor0 = s_floor_seed(&m, k);
        let eps = (0.5 * floor0 / 0.1).sqrt();
        let err = default_gamma(&m, 8, k, 2.0, eps, 0.1).unwrap_err();
        assert!(matches!(err, TronError::TargetBelowFloor { .. }));
    }

    #[test]
    fn predicted_floor_monotone_in_attack_probability_and_theta() {
        let theta = 0.05;
        let gamma = 8.0;
        let mut last_floor = 0.0;
        for p in [0.1, 0.3, 0.6] {
            let m = example_moments(theta, p);
            let k = default_k(m.lambda1_theta).unwrap();
            let floor0 = s_floor_seed(&m, k);
            let eps = (8.0 * floor0 / 0.1).sqrt();
            let s = case2_schedule(&m, 8, k, gamma, 2.0, eps, 0.1).unwrap();
            assert!(
                s.predicted_floor >= last_floor,
                "floor decreased as sup beta grew: {} -> {}",
                last_floor,
                s.predicted_floor
            );
            last_floor = s.predicted_floor;
        }
        let mut last_floor = 0.0;
        for theta in [0.02, 0.05, 0.1] {
            let m = example_moments(theta, 0.2);
            let k = default_k(m.lambda1_theta).unwrap();
            let floor0 = s_floor_seed(&m, k);
            let eps = (8.0 * floor0 / 0.1).sqrt();
            let s = case2_schedule(&m, 8, k, gamma, 2.0, eps, 0.1).unwrap();
            assert!(s.predicted_floor >= last_floor);
            last_floor = s.predicted_floor;
        }
    }

    #[test]
    fn mean_square_contraction_matches_schedule_rate() {
        // Case I invariant: the Monte-Carlo estimate of X_{t+1}/X_t stays
        // below alpha within its error bars at every step.
        let m = example_moments(0.0, 1.0);
        let s = case1_schedule(&m, 8, DEFAULT_DELTA0, 2.0, 0.05, 0.1).unwrap();
        let cfg = ReluTronConfig::new(8, s.eta, 100_000, RealVector::zeros(2)).unwrap();
        let oracle = OracleConfig::honest(vecf(&[-1.0, 1.0]));
        let report =
            relu_tron_train(&InputDistribution::unit_box(2), &oracle, &cfg, &s, 40, 3).unwrap();
        for (t, (ratio, se)) in contraction_ratios(&report).iter().enumerate() {
            assert!(
                *ratio <= s.alpha_rate + 3.0 * se,
                "step {t}: ratio {ratio} vs alpha {} (se {se})",
                s.alpha_rate
            );
        }
    }

    #[test]
    fn training_converges_on_clean_labels() {
        let m = example_moments(0.0, 1.0);
        let w_star = vecf(&[-1.0, 1.0]);
        let s = case1_schedule(&m, 8, DEFAULT_DELTA0, 2.0, 0.05, 0.1).unwrap();
        let cfg = ReluTronConfig::new(8, s.eta, 100_000, RealVector::zeros(2)).unwrap();
        let oracle = OracleConfig::honest(w_star);
        let report = relu_tron_train(
            &InputDistribution::unit_box(2),
            &oracle,
            &cfg,
            &s,
            20,
            7,
        )
        .unwrap();
        assert!(
            report.success_rate >= 0.9,
            "success rate {}",
            report.success_rate
        );
        assert!(report.mean_sq_err.last().unwrap() < report.mean_sq_err.first().unwrap());
    }

    #[test]
    fn training_with_initial_weight_at_truth_stays_there() {
        let w_star = vecf(&[-1.0, 1.0]);
        let m = example_moments(0.0, 1.0);
        let s = case1_schedule(&m, 4, DEFAULT_DELTA0, 2.0, 0.1, 0.1).unwrap();
        let cfg = ReluTronConfig::new(4, s.eta, 1000, w_star.clone()).unwrap();
        let oracle = OracleConfig::honest(w_star);
        let report = relu_tron_train(
            &InputDistribution::unit_box(2),
            &oracle,
            &cfg,
            &s,
            3,
            11,
        )
        .unwrap();
        for trace in &report.per_repeat_sq_err {
            for v in trace {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let m = example_moments(0.0, 1.0);
        let w_star = vecf(&[-1.0, 1.0]);
        let s = case1_schedule(&m, 4, DEFAULT_DELTA0, 2.0, 0.2, 0.1).unwrap();
        let cfg = ReluTronConfig::new(4, s.eta, 1000, RealVector::zeros(2)).unwrap();
        let oracle = OracleConfig::new(
            vecf(&[-1.0, 1.0]),
            0.0,
            BetaFn::constant(0.0),
            Perturbation::Uniform,
        )
        .unwrap();
        let _ = w_star;
        let dist = InputDistribution::unit_box(2);
        let a = relu_tron_train(&dist, &oracle, &cfg, &s, 5, 33).unwrap();
        let b = relu_tron_train(&dist, &oracle, &cfg, &s, 5, 33).unwrap();
        assert_eq!(a.per_repeat_sq_err, b.per_repeat_sq_err);
    }

    #[test]
    fn term1_bound_holds_at_checkpoints() {
        let m = example_moments(0.05, 0.2);
        let oracle = OracleConfig::new(
            vecf(&[-1.0, 1.0]),
            0.05,
            BetaFn::constant(0.2),
            Perturbation::Uniform,
        )
        .unwrap();
        let dist = InputDistribution::unit_box(2);
        for (i, w) in [
            vecf(&[0.0, 0.0]),
            vecf(&[-0.5, 0.2]),
            vecf(&[-1.2, 1.4]),
        ]
        .iter()
        .enumerate()
        {
            let (mean, se, rhs) =
                term1_conditional_check(&dist, &oracle, &m, w, 200_000, 50 + i as u64).unwrap();
            assert!(
                mean <= rhs + 3.0 * se + 1e-9,
                "checkpoint {i}: mean {mean} rhs {rhs} se {se}"
            );
        }
    }
}
