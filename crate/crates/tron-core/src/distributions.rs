//! Input-distribution samplers and Monte-Carlo estimators for the
//! distributional constants the convergence schedules consume:
//!
//! - truncated norm moments `a_i = E[1{w*.x > 0} ||x||^i]`, i = 1..4,
//! - attack-weighted moments `beta_j = E[beta(x) 1{w*.x > 0} ||x||^j]`, j = 1..3,
//! - `lambda1(theta*) = lambda_min(E[1{w*.x > 2 theta*} x x^T])`.
//!
//! `lambda1` is the eigenvalue of the Monte-Carlo-averaged matrix (not an
//! average of per-sample eigenvalues), and its standard error is the
//! Rayleigh-quotient standard error at the estimated bottom eigenvector — a
//! first-order-perturbation heuristic, reported as such.
//!
//! [`example1_analytic`] carries the closed forms for the 2-d uniform box
//! with filter `(-1, 1)`. Note: the printed closed form for the off-diagonal
//! moment `d2` circulating with this example is misprinted (it disagrees with
//! direct integration away from thresholds {0, 1/2, 1}); the form here is
//! re-derived and verified against Monte-Carlo in the tests.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adversary::BetaFn;
use crate::error::{Result, TronError};
use crate::linalg::{lambda_min_symmetric_with_vector, RealMatrix, RealVector};

/// Sampling access to a distribution on R^n; deterministic given a seed.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDistribution {
    UniformBox { low: RealVector, high: RealVector },
    IsotropicGaussian { n: usize, sigma: f64 },
    #[serde(skip)]
    Custom {
        n: usize,
        sampler: Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync>,
    },
}

impl fmt::Debug for InputDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputDistribution::UniformBox { low, high } => f
                .debug_struct("UniformBox")
                .field("low", &low.as_slice())
                .field("high", &high.as_slice())
                .finish(),
            InputDistribution::IsotropicGaussian { n, sigma } => f
                .debug_struct("IsotropicGaussian")
                .field("n", n)
                .field("sigma", sigma)
                .finish(),
            InputDistribution::Custom { n, .. } => {
                f.debug_struct("Custom").field("n", n).finish_non_exhaustive()
            }
        }
    }
}

impl InputDistribution {
    pub fn uniform_box(low: RealVector, high: RealVector) -> Result<Self> {
        if low.dim() != high.dim() {
            return Err(TronError::DimensionMismatch {
                context: "uniform_box",
                expected: low.dim(),
                got: high.dim(),
            });
        }
        for i in 0..low.dim() {
            if !(low.get(i) < high.get(i)) {
                return Err(TronError::InvalidParameter {
                    name: "uniform_box",
                    detail: format!(
                        "low must be < high componentwise, got low[{i}]={} high[{i}]={}",
                        low.get(i),
                        high.get(i)
                    ),
                });
            }
        }
        Ok(InputDistribution::UniformBox { low, high })
    }

    /// The symmetric box `[-1, 1]^n`.
    pub fn unit_box(n: usize) -> Self {
        InputDistribution::UniformBox {
            low: RealVector::new(vec![-1.0; n]).expect("n > 0"),
            high: RealVector::new(vec![1.0; n]).expect("n > 0"),
        }
    }

    pub fn isotropic_gaussian(n: usize, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(TronError::InvalidParameter {
                name: "isotropic_gaussian",
                detail: "dimension must be positive".into(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(TronError::InvalidParameter {
                name: "isotropic_gaussian",
                detail: format!("sigma must be finite and > 0, got {sigma}"),
            });
        }
        Ok(InputDistribution::IsotropicGaussian { n, sigma })
    }

    pub fn custom(n: usize, sampler: Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync>) -> Self {
        InputDistribution::Custom { n, sampler }
    }

    pub fn dim(&self) -> usize {
        match self {
            InputDistribution::UniformBox { low, .. } => low.dim(),
            InputDistribution::IsotropicGaussian { n, .. } => *n,
            InputDistribution::Custom { n, .. } => *n,
        }
    }

    /// One draw; coordinates are consumed from `rng` in index order, so the
    /// stream is reproducible across calls and passes.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> RealVector {
        match self {
            InputDistribution::UniformBox { low, high } => {
                let v: Vec<f64> = (0..low.dim())
                    .map(|i| {
                        let u: f64 = rng.random();
                        low.get(i) + (high.get(i) - low.get(i)) * u
                    })
                    .collect();
                RealVector::new(v).expect("finite box sample")
            }
            InputDistribution::IsotropicGaussian { n, sigma } => {
                let v: Vec<f64> = (0..*n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        sigma * z
                    })
                    .collect();
                RealVector::new(v).expect("finite gaussian sample")
            }
            InputDistribution::Custom { sampler, .. } => {
                // Custom samplers get a deterministic sub-stream.
                let mut sub = ChaCha8Rng::seed_from_u64(rng.random());
                RealVector::new(sampler(&mut sub)).expect("finite custom sample")
            }
        }
    }

    /// `count` i.i.d. draws, deterministic given `rng_seed`.
    pub fn sample(&self, rng_seed: u64, count: usize) -> Result<Vec<RealVector>> {
        if count == 0 {
            return Err(TronError::InvalidParameter {
                name: "count",
                detail: "must be >= 1".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        Ok((0..count).map(|_| self.sample_one(&mut rng)).collect())
    }
}

/// Per-constant standard errors (`sd / sqrt(N)`); `lambda1_theta`'s entry is
/// the Rayleigh-quotient heuristic described in the module docs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
pub struct MomentStdErr {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub lambda1_theta: f64,
}

/// The distributional constants attached to `(D, w*, theta*, beta)`, with
/// sample-count provenance and per-constant error bars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub lambda1_theta: f64,
    pub theta_star: f64,
    pub n_samples: u64,
    pub std_err: MomentStdErr,
}

impl MomentEstimates {
    /// Exact constants (no Monte-Carlo): zero error bars, `n_samples = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn analytic(
        a1: f64,
        a2: f64,
        a3: f64,
        a4: f64,
        beta1: f64,
        beta2: f64,
        beta3: f64,
        lambda1_theta: f64,
        theta_star: f64,
    ) -> Result<Self> {
        let m = MomentEstimates {
            a1,
            a2,
            a3,
            a4,
            beta1,
            beta2,
            beta3,
            lambda1_theta,
            theta_star,
            n_samples: 0,
            std_err: MomentStdErr::default(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Internal consistency checks: nonnegativity, the Cauchy-Schwarz bound
    /// `a2^2 <= a4` on the truncated distribution (with Monte-Carlo slack),
    /// and domination `beta_j <= a_j` since `beta <= 1`.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("theta_star", self.theta_star),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(TronError::InvalidParameter {
                    name: "MomentEstimates",
                    detail: format!("{name} must be finite and >= 0, got {v}"),
                });
            }
        }
        if !self.lambda1_theta.is_finite() {
            return Err(TronError::NonFinite("lambda1_theta"));
        }
        let cs_slack = 3.0 * (2.0 * self.a2 * self.std_err.a2 + self.std_err.a4) + 1e-12;
        if self.a2 * self.a2 > self.a4 + cs_slack {
            return Err(TronError::hypothesis(
                "a2^2 <= a4 (Cauchy-Schwarz on the truncated distribution)",
                self.a4 + cs_slack - self.a2 * self.a2,
            ));
        }
        for (name, b, a) in [
            ("beta1 <= a1", self.beta1, self.a1),
            ("beta2 <= a2", self.beta2, self.a2),
            ("beta3 <= a3", self.beta3, self.a3),
        ] {
            if b > a + 1e-12 {
                return Err(TronError::hypothesis(name, a + 1e-12 - b));
            }
        }
        Ok(())
    }
}

/// Monte-Carlo estimation of every constant in [`MomentEstimates`].
///
/// Two passes over the same seeded stream: the first accumulates scalar
/// moments and the truncated second-moment matrix, the second (after the
/// bottom eigenvector is known) accumulates the Rayleigh-quotient variance
/// for `lambda1`'s error bar. Accumulation order is fixed, so results are
/// deterministic for a given seed.
pub fn estimate_moments(
    dist: &InputDistribution,
    w_star: &RealVector,
    theta_star: f64,
    beta_fn: &BetaFn,
    mc_samples: usize,
    seed: u64,
) -> Result<MomentEstimates> {
    if mc_samples < 1000 {
        return Err(TronError::InvalidParameter {
            name: "mc_samples",
            detail: format!("must be >= 1000, got {mc_samples}"),
        });
    }
    if w_star.dim() != dist.dim() {
        return Err(TronError::DimensionMismatch {
            context: "estimate_moments",
            expected: dist.dim(),
            got: w_star.dim(),
        });
    }
    if !(theta_star >= 0.0 && theta_star.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "theta_star",
            detail: format!("must be finite and >= 0, got {theta_star}"),
        });
    }

    let n = dist.dim();
    let nf = mc_samples as f64;
    // sums and sums of squares for a1..a4, beta1..beta3
    let mut sum = [0.0f64; 7];
    let mut sumsq = [0.0f64; 7];
    let mut sigma = RealMatrix::zeros(n, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..mc_samples {
        let x = dist.sample_one(&mut rng);
        let proj = w_star.dot(&x);
        let ind0 = proj > 0.0;
        let ind2t = proj > 2.0 * theta_star;
        if ind2t {
            sigma.add_outer(1.0, &x);
        }
        if !ind0 {
            continue; // every scalar term carries the 1{w*.x > 0} factor
        }
        let r = x.norm();
        let r2 = r * r;
        let b = beta_fn.eval(&x);
        let terms = [r, r2, r2 * r, r2 * r2, b * r, b * r2, b * r2 * r];
        for (k, t) in terms.iter().enumerate() {
            sum[k] += t;
            sumsq[k] += t * t;
        }
    }

    let mean = |k: usize| sum[k] / nf;
    let se = |k: usize| {
        let m = sum[k] / nf;
        let var = (sumsq[k] / nf - m * m).max(0.0);
        (var / nf).sqrt()
    };

    let sigma_mean = sigma.scale(1.0 / nf);
    let (lambda1, bottom) = lambda_min_symmetric_with_vector(&sigma_mean)?;

    // Second pass over the identical stream: variance of the Rayleigh
    // quotient 1{w*.x > 2 theta*} (v.x)^2 at the estimated eigenvector.
    let mut q_sum = 0.0f64;
    let mut q_sumsq = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..mc_samples {
        let x = dist.sample_one(&mut rng);
        let proj = w_star.dot(&x);
        if proj > 2.0 * theta_star {
            let q = bottom.dot(&x).powi(2);
            q_sum += q;
            q_sumsq += q * q;
        }
    }
    let q_mean = q_sum / nf;
    let q_var = (q_sumsq / nf - q_mean * q_mean).max(0.0);
    let lambda1_se = (q_var / nf).sqrt();

    let est = MomentEstimates {
        a1: mean(0),
        a2: mean(1),
        a3: mean(2),
        a4: mean(3),
        beta1: mean(4),
        beta2: mean(5),
        beta3: mean(6),
        lambda1_theta: lambda1,
        theta_star,
        n_samples: mc_samples as u64,
        std_err: MomentStdErr {
            a1: se(0),
            a2: se(1),
            a3: se(2),
            a4: se(3),
            beta1: se(4),
            beta2: se(5),
            beta3: se(6),
            lambda1_theta: lambda1_se,
        },
    };
    est.validate()?;
    Ok(est)
}

/// Closed-form constants for `x ~ Unif[-1,1]^2`, `w* = (-1, 1)`:
/// `d1 = E[1{-x1+x2 > 2 theta*} x1^2]`, `d2 = E[1{-x1+x2 > 2 theta*} x1 x2]`,
/// and `lambda1 = d1 - |d2|` (the truncated second-moment matrix is
/// `[[d1, d2], [d2, d1]]` by the reflection symmetry of the event).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Constants {
    pub d1: f64,
    pub d2: f64,
    pub lambda1: f64,
}

/// Analytic constants for the boxed 2-d example at corruption bound
/// `theta_star` (event threshold `2 theta_star`).
///
/// Valid for `theta_star in [0, 1]`; beyond 1 the event has measure zero and
/// all three constants are exactly 0. `d1` follows the standard printed form;
/// `d2` is the re-derived polynomial `-t/3 + t^2/2 - t^4/6` (see module docs
/// for why the printed variant is not used).
pub fn example1_analytic(theta_star: f64) -> Result<Example1Constants> {
    if !(theta_star >= 0.0 && theta_star.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "theta_star",
            detail: format!("must be finite and >= 0, got {theta_star}"),
        });
    }
    if theta_star >= 1.0 {
        return Ok(Example1Constants {
            d1: 0.0,
            d2: 0.0,
            lambda1: 0.0,
        });
    }
    let t = theta_star;
    let d1 = (7.0 - 8.0 * t + (2.0 * t - 1.0).powi(4)) / 48.0;
    let d2 = -t / 3.0 + t * t / 2.0 - t.powi(4) / 6.0;
    Ok(Example1Constants {
        d1,
        d2,
        lambda1: d1 - d2.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vecf(v: &[f64]) -> RealVector {
        RealVector::new(v.to_vec()).unwrap()
    }

    fn box2() -> InputDistribution {
        InputDistribution::unit_box(2)
    }

    fn w_example() -> RealVector {
        vecf(&[-1.0, 1.0])
    }

    const UNIT_N: usize = 100_000;

    #[test]
    fn sample_mean_of_centered_box_is_near_zero() {
        let d = box2();
        let samples = d.sample(42, UNIT_N).unwrap();
        let mut mean = [0.0f64; 2];
        for s in &samples {
            mean[0] += s.get(0);
            mean[1] += s.get(1);
        }
        for m in mean.iter_mut() {
            *m /= samples.len() as f64;
        }
        // 3 sigma / sqrt(N) with per-coordinate sigma = 1/sqrt(3)
        let bound = 3.0 / (3.0f64.sqrt() * (UNIT_N as f64).sqrt());
        assert!(mean[0].abs() < bound.max(0.02) && mean[1].abs() < bound.max(0.02));
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let d = InputDistribution::isotropic_gaussian(1, 1.0).unwrap();
        let a = d.sample(7, 3).unwrap();
        let b = d.sample(7, 3).unwrap();
        assert_eq!(a, b);
        let c = d.sample(8, 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn box_samples_stay_in_support() {
        let d = InputDistribution::uniform_box(vecf(&[0.0]), vecf(&[1.0])).unwrap();
        for s in d.sample(3, 5000).unwrap() {
            assert!((0.0..=1.0).contains(&s.get(0)));
        }
    }

    #[test]
    fn uniform_box_rejects_inverted_bounds() {
        assert!(InputDistribution::uniform_box(vecf(&[1.0]), vecf(&[0.0])).is_err());
        assert!(InputDistribution::isotropic_gaussian(2, 0.0).is_err());
    }

    #[test]
    fn moments_match_example_at_zero_corruption() {
        let m = estimate_moments(&box2(), &w_example(), 0.0, &BetaFn::constant(1.0), UNIT_N, 11)
            .unwrap();
        let lam = 1.0 / 6.0;
        assert!(
            (m.lambda1_theta - lam).abs() <= 3.0 * m.std_err.lambda1_theta + 1e-3,
            "lambda1 {} vs 1/6 (se {})",
            m.lambda1_theta,
            m.std_err.lambda1_theta
        );
        // E[1 ||x||^2] = 1/3 by symmetry of the half-space event
        assert!((m.a2 - 1.0 / 3.0).abs() <= 3.0 * m.std_err.a2 + 1e-3);
    }

    #[test]
    fn moments_match_example_at_half_corruption() {
        // event threshold 2 theta* = 1 gives lambda1 = 1/16 - 5/96 = 1/96
        let m = estimate_moments(&box2(), &w_example(), 0.5, &BetaFn::constant(1.0), UNIT_N, 13)
            .unwrap();
        assert!(
            (m.lambda1_theta - 1.0 / 96.0).abs() <= 3.0 * m.std_err.lambda1_theta + 1e-3,
            "lambda1 {} vs 1/96",
            m.lambda1_theta
        );
    }

    #[test]
    fn moments_at_theta_one_are_exactly_zero() {
        // -x1 + x2 > 2 has measure zero on the box: the truncated matrix is 0.
        let m = estimate_moments(&box2(), &w_example(), 1.0, &BetaFn::constant(1.0), 10_000, 17)
            .unwrap();
        assert_eq!(m.lambda1_theta, 0.0);
        assert_eq!(m.std_err.lambda1_theta, 0.0);
    }

    #[test]
    fn gaussian_1d_moments_match_quadrature() {
        // oracle: integral_0^inf x^2 phi(x) dx = 1/2
        let d = InputDistribution::isotropic_gaussian(1, 1.0).unwrap();
        let m = estimate_moments(&d, &vecf(&[1.0]), 0.0, &BetaFn::constant(1.0), UNIT_N, 19)
            .unwrap();
        assert!((m.a2 - 0.5).abs() <= 3.0 * m.std_err.a2 + 1e-3);
        assert!((m.lambda1_theta - 0.5).abs() <= 3.0 * m.std_err.lambda1_theta + 1e-3);
    }

    #[test]
    fn lambda1_is_monotone_nonincreasing_in_theta() {
        let grid = [0.0, 0.1, 0.25, 0.4, 0.6, 0.8];
        let mut prev: Option<(f64, f64)> = None;
        for (i, t) in grid.iter().enumerate() {
            let m = estimate_moments(
                &box2(),
                &w_example(),
                *t,
                &BetaFn::constant(1.0),
                50_000,
                100 + i as u64,
            )
            .unwrap();
            if let Some((lam_prev, se_prev)) = prev {
                assert!(
                    m.lambda1_theta <= lam_prev + 3.0 * (se_prev + m.std_err.lambda1_theta),
                    "lambda1 increased: {} -> {} at theta {}",
                    lam_prev,
                    m.lambda1_theta,
                    t
                );
            }
            prev = Some((m.lambda1_theta, m.std_err.lambda1_theta));
        }
    }

    #[test]
    fn constant_one_beta_reproduces_truncated_moments_exactly() {
        let m = estimate_moments(&box2(), &w_example(), 0.0, &BetaFn::constant(1.0), 10_000, 5)
            .unwrap();
        assert_eq!(m.beta1, m.a1);
        assert_eq!(m.beta2, m.a2);
        assert_eq!(m.beta3, m.a3);
    }

    #[test]
    fn positive_rescaling_of_filter_leaves_zero_theta_constants_unchanged() {
        let m1 = estimate_moments(&box2(), &w_example(), 0.0, &BetaFn::constant(0.3), 10_000, 21)
            .unwrap();
        let m2 = estimate_moments(
            &box2(),
            &w_example().scale(17.0),
            0.0,
            &BetaFn::constant(0.3),
            10_000,
            21,
        )
        .unwrap();
        assert_eq!(m1.a2, m2.a2);
        assert_eq!(m1.a4, m2.a4);
        assert_eq!(m1.beta2, m2.beta2);
        assert_eq!(m1.lambda1_theta, m2.lambda1_theta);
    }

    #[test]
    fn example1_analytic_pinned_values() {
        let at0 = example1_analytic(0.0).unwrap();
        assert_abs_diff_eq!(at0.d1, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at0.d2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at0.lambda1, 1.0 / 6.0, epsilon = 1e-15);

        // event threshold 1 (theta* = 1/2): d1 = 1/16, d2 = -5/96, lambda1 = 1/96
        let at_half = example1_analytic(0.5).unwrap();
        assert_abs_diff_eq!(at_half.d1, 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at_half.d2, -5.0 / 96.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at_half.lambda1, 1.0 / 96.0, epsilon = 1e-15);

        // at theta* = 1 the event is empty
        let at1 = example1_analytic(1.0).unwrap();
        assert_eq!(at1.lambda1, 0.0);
    }

    #[test]
    fn example1_analytic_agrees_with_monte_carlo_on_grid() {
        for (i, t) in [0.0, 0.25, 0.5, 1.0].iter().enumerate() {
            let analytic = example1_analytic(*t).unwrap();
            let m = estimate_moments(
                &box2(),
                &w_example(),
                *t,
                &BetaFn::constant(1.0),
                UNIT_N,
                200 + i as u64,
            )
            .unwrap();
            assert!(
                (m.lambda1_theta - analytic.lambda1).abs()
                    <= 3.0 * m.std_err.lambda1_theta + 1e-4,
                "theta {}: mc {} vs analytic {} (se {})",
                t,
                m.lambda1_theta,
                analytic.lambda1,
                m.std_err.lambda1_theta
            );
        }
    }

    #[test]
    fn example1_d1_cross_checked_by_direct_monte_carlo() {
        // independent oracle: E[1{-x1+x2 > 0} x1^2] by raw averaging
        let d = box2();
        let w = w_example();
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = d.sample_one(&mut rng);
            let v = if w.dot(&x) > 0.0 { x.get(0) * x.get(0) } else { 0.0 };
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let se = (((sumsq / n as f64) - mean * mean).max(0.0) / n as f64).sqrt();
        let d1 = example1_analytic(0.0).unwrap().d1;
        assert!((mean - d1).abs() <= 3.0 * se, "mc {mean} vs analytic {d1}");
    }

    #[test]
    fn example1_d2_cross_checked_by_direct_monte_carlo_off_grid() {
        // theta = 0.25 separates the corrected d2 from the misprinted form
        // (-0.0527 vs -0.0684); the Monte-Carlo arbitrates.
        let d = box2();
        let w = w_example();
        let mut rng = ChaCha8Rng::seed_from_u64(304);
        let n = 400_000;
        let theta = 0.25f64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = d.sample_one(&mut rng);
            let v = if w.dot(&x) > 2.0 * theta {
                x.get(0) * x.get(1)
            } else {
                0.0
            };
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let se = (((sumsq / n as f64) - mean * mean).max(0.0) / n as f64).sqrt();
        let d2 = example1_analytic(theta).unwrap().d2;
        assert!(
            (mean - d2).abs() <= 3.0 * se,
            "mc {mean} vs corrected analytic {d2} (se {se})"
        );
        let misprinted = -theta / 3.0 - theta * theta / 6.0 + 2.0 * theta.powi(3)
            - 1.5 * theta.powi(4);
        assert!(
            (mean - misprinted).abs() > 10.0 * se,
            "misprinted form unexpectedly matches"
        );
    }

    #[test]
    fn moment_estimates_json_field_names() {
        let m = estimate_moments(&box2(), &w_example(), 0.0, &BetaFn::constant(1.0), 1000, 1)
            .unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        for key in [
            "a1",
            "a2",
            "a3",
            "a4",
            "beta1",
            "beta2",
            "beta3",
            "lambda1_theta",
            "theta_star",
            "n_samples",
        ] {
            assert!(v.get(key).is_some(), "missing field {key}");
        }
    }

    #[test]
    fn estimate_moments_rejects_tiny_sample_counts() {
        let err =
            estimate_moments(&box2(), &w_example(), 0.0, &BetaFn::constant(1.0), 10, 1).unwrap_err();
        assert!(matches!(err, TronError::InvalidParameter { .. }));
    }
}
