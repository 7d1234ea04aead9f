//! Closed-form analysis of the contraction recursions
//!
//! ```text
//! Delta_{t+1} <= (1 - eta' b1 + eta'^2 c1) Delta_t + eta'^2 c2 [+ eta' c3]
//! ```
//!
//! that both trainers reduce to: hypothesis validation with named margins,
//! the prescribed step `eta'`, the per-step factor `alpha`, the additive term
//! `beta`, the asymptotic floor `beta / (1 - alpha)`, and the exact iteration
//! count `T` solved from `alpha^{T-1} = (eps'^2 (1-alpha) - beta) / (C (1-alpha) - beta)`
//! (the O-free form the proofs derive before loosening).
//!
//! [`unroll_worst_case`] certifies every bound by brute force: it iterates
//! the recursion at equality — the worst sequence covered — and checks the
//! target is met at the predicted step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TronError};

/// Raw inputs to the three analyses. Per-lemma hypotheses are validated by
/// the corresponding function, not here; `eta_prime` is overwritten with the
/// prescription of whichever analysis runs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecursionParams {
    pub b1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eta_prime: f64,
    /// Initial value `Delta_1`.
    pub big_c: f64,
    /// Target `eps'^2`.
    pub eps_prime_sq: f64,
    pub gamma: f64,
    pub delta0: f64,
}

/// One named hypothesis with its numeric margin (negative = violated).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub satisfied: bool,
    pub margin: f64,
}

/// Which analysis produced a bound; names match the CLI surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// Zero additive term, geometric decay.
    Recurse1,
    /// Additive `eta'^2 c2` term with the eps-tuned step.
    Recurse2,
    /// Additive `eta'^2 c2 + eta' c3` with the gamma-tuned step.
    Recurse2Lemma6,
}

impl LemmaId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "recurse1" => Ok(LemmaId::Recurse1),
            "recurse2" => Ok(LemmaId::Recurse2),
            "recurse2lemma6" => Ok(LemmaId::Recurse2Lemma6),
            other => Err(TronError::InvalidParameter {
                name: "lemma",
                detail: format!(
                    "unknown lemma {other:?}; expected recurse1, recurse2, or recurse2lemma6"
                ),
            }),
        }
    }
}

/// The derived contraction data: a valid bound has `alpha` in (0,1) and
/// `predicted_t >= 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionBound {
    pub lemma: LemmaId,
    pub alpha: f64,
    pub beta: f64,
    /// Asymptote of the equality recursion, `beta / (1 - alpha)`; 0 when beta = 0.
    pub floor: f64,
    pub eta_prime: f64,
    pub predicted_t: usize,
    pub hypotheses: Vec<Hypothesis>,
}

fn require(hyps: &mut Vec<Hypothesis>, name: &str, margin: f64) -> Result<()> {
    let satisfied = margin >= 0.0;
    hyps.push(Hypothesis {
        name: name.to_string(),
        satisfied,
        margin,
    });
    if satisfied {
        Ok(())
    } else {
        Err(TronError::hypothesis(name, margin))
    }
}

/// Tolerance of the brute-force certificate; also used to keep `T` finite
/// when the target coincides with the asymptote (e.g. `c2 = c1` puts the
/// asymptote exactly at `eps'^2`, approachable but never strictly crossed).
pub const CERT_TOL: f64 = 1e-12;

/// `T` solving `alpha^{T-1} (C - floor) + floor = eps2` exactly, ceiled.
/// Returns 1 when the sequence starts at or below the target. When the target
/// sits within [`CERT_TOL`] of the asymptote the solve is done against
/// `eps2 + CERT_TOL` (matching the certificate's tolerance); below that the
/// target is unreachable and errors.
fn solve_t(alpha: f64, beta: f64, big_c: f64, eps2: f64) -> Result<usize> {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let one_minus = 1.0 - alpha;
    if eps2 >= big_c {
        return Ok(1);
    }
    let mut num = eps2 * one_minus - beta;
    if num <= 0.0 {
        num = (eps2 + CERT_TOL) * one_minus - beta;
        if num <= 0.0 {
            return Err(TronError::TargetBelowFloor {
                target: eps2,
                floor: beta / one_minus,
            });
        }
    }
    let den = big_c * one_minus - beta;
    // eps2 < C and num > 0 imply den > num > 0
    let q = num / den;
    let steps = (q.ln() / alpha.ln()).ceil().max(0.0);
    Ok(1 + steps as usize)
}

/// Geometric case: `c2 = 0`. Requires `C > 0`, `b1 > 0`, `delta0 > 0`, and
/// `c1 > b1^2 delta0 / (1+delta0)^2`; prescribes `eta' = b1 / ((1+delta0) c1)`,
/// giving `alpha = 1 - (b1^2/c1) delta0/(1+delta0)^2`.
pub fn recurse_case1(p: &RecursionParams) -> Result<RecursionBound> {
    let mut hyps = Vec::new();
    require(&mut hyps, "c2 == 0", -p.c2.abs())?;
    require(&mut hyps, "C > 0", p.big_c - f64::MIN_POSITIVE)?;
    require(&mut hyps, "b1 > 0", p.b1 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "c1 > 0", p.c1 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "delta0 > 0", p.delta0 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "eps'^2 > 0", p.eps_prime_sq - f64::MIN_POSITIVE)?;
    let d = p.delta0;
    let bound = p.b1 * p.b1 * d / ((1.0 + d) * (1.0 + d));
    require(&mut hyps, "c1 > b1^2 delta0/(1+delta0)^2", p.c1 - bound - f64::MIN_POSITIVE)?;

    let eta = p.b1 / ((1.0 + d) * p.c1);
    let alpha = 1.0 - eta * p.b1 + eta * eta * p.c1;
    let predicted_t = solve_t(alpha, 0.0, p.big_c, p.eps_prime_sq)?;
    Ok(RecursionBound {
        lemma: LemmaId::Recurse1,
        alpha,
        beta: 0.0,
        floor: 0.0,
        eta_prime: eta,
        predicted_t,
        hypotheses: hyps,
    })
}

/// Additive case with the eps-tuned step: `0 < c2 <= c1`, `eps'^2 <= C`, and
/// `b1^2/c1 <= (sqrt(eps') + 1/sqrt(eps'))^2` (the stated, stronger-than-
/// necessary form; positivity of alpha only needs `(eps' + 1/eps')^2`).
/// Prescribes `eta' = (b1/c1) eps'^2 / (1 + eps'^2)`.
pub fn recurse_case2(p: &RecursionParams) -> Result<RecursionBound> {
    let mut hyps = Vec::new();
    require(&mut hyps, "c2 > 0", p.c2 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "c2 <= c1", p.c1 - p.c2)?;
    require(&mut hyps, "b1 > 0", p.b1 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "eps'^2 > 0", p.eps_prime_sq - f64::MIN_POSITIVE)?;
    require(&mut hyps, "eps'^2 <= C", p.big_c - p.eps_prime_sq)?;
    let eps2 = p.eps_prime_sq;
    let eps_prime = eps2.sqrt();
    let sqrt_eps = eps_prime.sqrt();
    let cap = (sqrt_eps + 1.0 / sqrt_eps).powi(2);
    require(
        &mut hyps,
        "b1^2/c1 <= (sqrt(eps') + 1/sqrt(eps'))^2",
        cap - p.b1 * p.b1 / p.c1,
    )?;

    let eta = (p.b1 / p.c1) * eps2 / (1.0 + eps2);
    let ratio = p.b1 * p.b1 / p.c1;
    let alpha = 1.0 - ratio * eps2 / ((1.0 + eps2) * (1.0 + eps2));
    let beta = eta * eta * p.c2;
    // At this step choice the asymptote is (c2/c1) eps'^2 <= eps'^2.
    let floor = beta / (1.0 - alpha);
    let predicted_t = solve_t(alpha, beta, p.big_c, eps2)?;
    Ok(RecursionBound {
        lemma: LemmaId::Recurse2,
        alpha,
        beta,
        floor,
        eta_prime: eta,
        predicted_t,
        hypotheses: hyps,
    })
}

/// Additive case with a linear term and the gamma-tuned step: all of
/// `b1, c1, c2, c3 > 0`, `Delta_1 > c3/b1`, `eps'^2 in (c3/b1, Delta_1]`, and
/// `gamma > max{b1^2/c1, (eps'^2 + c2/c1)/(eps'^2 - c3/b1)}` (strict).
/// Prescribes `eta' = b1/(gamma c1)`; the reachable floor is
/// `(c2/c1 + gamma c3/b1)/(gamma - 1)`.
pub fn recurse2(p: &RecursionParams) -> Result<RecursionBound> {
    let mut hyps = Vec::new();
    require(&mut hyps, "b1 > 0", p.b1 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "c1 > 0", p.c1 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "c2 > 0", p.c2 - f64::MIN_POSITIVE)?;
    require(&mut hyps, "c3 > 0", p.c3 - f64::MIN_POSITIVE)?;
    let irreducible = p.c3 / p.b1;
    require(&mut hyps, "Delta_1 > c3/b1", p.big_c - irreducible - f64::MIN_POSITIVE)?;
    require(
        &mut hyps,
        "eps'^2 > c3/b1",
        p.eps_prime_sq - irreducible - f64::MIN_POSITIVE,
    )?;
    let gamma_lb = (p.b1 * p.b1 / p.c1)
        .max((p.eps_prime_sq + p.c2 / p.c1) / (p.eps_prime_sq - irreducible));
    require(
        &mut hyps,
        "gamma > max(b1^2/c1, (eps'^2 + c2/c1)/(eps'^2 - c3/b1))",
        p.gamma - gamma_lb - f64::MIN_POSITIVE,
    )?;
    require(&mut hyps, "gamma > 1", p.gamma - 1.0 - f64::MIN_POSITIVE)?;

    let gamma = p.gamma;
    let eta = p.b1 / (gamma * p.c1);
    let alpha = 1.0 - (p.b1 * p.b1 / p.c1) * (1.0 / gamma - 1.0 / (gamma * gamma));
    let beta = eta * eta * p.c2 + eta * p.c3;
    let floor = (p.c2 / p.c1 + gamma * irreducible) / (gamma - 1.0);
    if p.eps_prime_sq <= floor {
        return Err(TronError::TargetBelowFloor {
            target: p.eps_prime_sq,
            floor,
        });
    }
    let predicted_t = solve_t(alpha, beta, p.big_c, p.eps_prime_sq)?;
    Ok(RecursionBound {
        lemma: LemmaId::Recurse2Lemma6,
        alpha,
        beta,
        floor,
        eta_prime: eta,
        predicted_t,
        hypotheses: hyps,
    })
}

/// Run one of the three analyses by id.
pub fn analyze(p: &RecursionParams, which: LemmaId) -> Result<RecursionBound> {
    match which {
        LemmaId::Recurse1 => recurse_case1(p),
        LemmaId::Recurse2 => recurse_case2(p),
        LemmaId::Recurse2Lemma6 => recurse2(p),
    }
}

/// Iterate the recursion AT EQUALITY (`Delta_{t+1} = alpha Delta_t + beta`,
/// the worst sequence the bound covers) from `Delta_1 = C` for `predicted_t`
/// entries, and certify `Delta_{predicted_t} <= eps'^2 (+1e-12)`.
pub fn unroll_worst_case(p: &RecursionParams, bound: &RecursionBound) -> (Vec<f64>, bool) {
    debug_assert!(bound.hypotheses.iter().all(|h| h.satisfied));
    let mut seq = Vec::with_capacity(bound.predicted_t);
    let mut d = p.big_c;
    seq.push(d);
    for _ in 1..bound.predicted_t {
        d = bound.alpha * d + bound.beta;
        seq.push(d);
    }
    let certified = *seq.last().expect("non-empty") <= p.eps_prime_sq + 1e-12;
    (seq, certified)
}

/// Draw hypothesis-satisfying parameters for one analysis, with ranges sized
/// so predicted iteration counts stay desk-scale (well under 1e5).
pub fn random_satisfying_params(lemma: LemmaId, rng: &mut ChaCha8Rng) -> RecursionParams {
    let u = |rng: &mut ChaCha8Rng| rng.random::<f64>();
    match lemma {
        LemmaId::Recurse1 => {
            let b1 = 0.1 + 4.9 * u(rng);
            let delta0 = 0.1 + 2.9 * u(rng);
            let hypothesis_bound = b1 * b1 * delta0 / ((1.0 + delta0) * (1.0 + delta0));
            let c1 = hypothesis_bound * (1.05 + 3.0 * u(rng));
            let big_c = 0.5 + 99.5 * u(rng);
            let eps_prime_sq = (big_c * 10f64.powf(-4.0 * u(rng))).max(1e-9);
            RecursionParams {
                b1,
                c1,
                c2: 0.0,
                c3: 0.0,
                eta_prime: 0.0,
                big_c,
                eps_prime_sq,
                gamma: 0.0,
                delta0,
            }
        }
        LemmaId::Recurse2 => {
            let eps_prime_sq = 0.05 + 0.95 * u(rng);
            let eps_prime = eps_prime_sq.sqrt();
            let cap = (eps_prime.sqrt() + 1.0 / eps_prime.sqrt()).powi(2);
            let ratio = cap * (0.05 + 0.9 * u(rng));
            let c1 = 0.1 + 9.9 * u(rng);
            let b1 = (ratio * c1).sqrt();
            let c2 = c1 * (0.02 + 0.96 * u(rng));
            let big_c = eps_prime_sq * (1.0 + 9.0 * u(rng));
            RecursionParams {
                b1,
                c1,
                c2,
                c3: 0.0,
                eta_prime: 0.0,
                big_c,
                eps_prime_sq,
                gamma: 0.0,
                delta0: 0.0,
            }
        }
        LemmaId::Recurse2Lemma6 => {
            let c1 = 0.1 + 4.9 * u(rng);
            let ratio = 0.05 + 19.95 * u(rng);
            let b1 = (ratio * c1).sqrt();
            let eps_prime_sq = 0.01 + 0.99 * u(rng);
            let c3 = b1 * eps_prime_sq * (0.05 + 0.85 * u(rng));
            let c2 = c1 * eps_prime_sq * (0.01 + 1.99 * u(rng));
            let big_c = eps_prime_sq * (1.5 + 20.0 * u(rng));
            let lb = (b1 * b1 / c1)
                .max((eps_prime_sq + c2 / c1) / (eps_prime_sq - c3 / b1))
                .max(1.0);
            let gamma = lb * (1.5 + 2.5 * u(rng));
            RecursionParams {
                b1,
                c1,
                c2,
                c3,
                eta_prime: 0.0,
                big_c,
                eps_prime_sq,
                gamma,
                delta0: 0.0,
            }
        }
    }
}

/// Outcome of a randomized certification sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub lemma: LemmaId,
    pub draws: usize,
    pub certified: usize,
    /// Draw indices whose unrolled sequence missed the target.
    pub failures: Vec<usize>,
    pub max_predicted_t: usize,
    /// Worst relative gap between the reported floor and the closed-form
    /// asymptote `beta/(1-alpha)` across draws (0 for the geometric case).
    pub max_floor_gap: f64,
}

/// Draw-and-certify loop: each draw is analyzed, the bound is unrolled at
/// equality, and the terminal value is checked against the target.
pub fn certify_draws(lemma: LemmaId, draws: usize, seed: u64) -> Result<CertificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut certified = 0usize;
    let mut failures = Vec::new();
    let mut max_t = 0usize;
    let mut max_floor_gap = 0.0f64;
    for i in 0..draws {
        let p = random_satisfying_params(lemma, &mut rng);
        let bound = analyze(&p, lemma)?;
        max_t = max_t.max(bound.predicted_t);
        if bound.beta > 0.0 {
            let asymptote = bound.beta / (1.0 - bound.alpha);
            let gap = (bound.floor - asymptote).abs() / asymptote.max(1e-300);
            max_floor_gap = max_floor_gap.max(gap);
        }
        let (_, ok) = unroll_worst_case(&p, &bound);
        if ok {
            certified += 1;
        } else {
            failures.push(i);
        }
    }
    Ok(CertificationReport {
        lemma,
        draws,
        certified,
        failures,
        max_predicted_t: max_t,
        max_floor_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> RecursionParams {
        RecursionParams {
            b1: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            eta_prime: 0.0,
            big_c: 1.0,
            eps_prime_sq: 0.01,
            gamma: 0.0,
            delta0: 0.0,
        }
    }

    #[test]
    fn case1_hand_computed_schedule() {
        // b1=2, c1=4, delta0=1, C=1, eps'^2=0.01: eta'=0.25, alpha=0.75,
        // T = 1 + ceil(ln 100 / ln(4/3)) = 18.
        let p = RecursionParams {
            b1: 2.0,
            c1: 4.0,
            delta0: 1.0,
            ..params()
        };
        let b = recurse_case1(&p).unwrap();
        assert_abs_diff_eq!(b.eta_prime, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b.alpha, 0.75, epsilon = 1e-15);
        assert_eq!(b.predicted_t, 18);
        assert_eq!(b.floor, 0.0);
        let (_, certified) = unroll_worst_case(&p, &b);
        assert!(certified);
    }

    #[test]
    fn case1_target_at_start_is_one_step() {
        let p = RecursionParams {
            b1: 2.0,
            c1: 4.0,
            delta0: 1.0,
            eps_prime_sq: 1.0,
            ..params()
        };
        assert_eq!(recurse_case1(&p).unwrap().predicted_t, 1);
    }

    #[test]
    fn case1_rejects_bad_delta0() {
        // c1 must exceed b1^2 delta0/(1+delta0)^2; b1=2, c1=0.5, delta0=1 fails.
        let p = RecursionParams {
            b1: 2.0,
            c1: 0.5,
            delta0: 1.0,
            ..params()
        };
        let err = recurse_case1(&p).unwrap_err();
        match err {
            TronError::HypothesisViolated { name, .. } => {
                assert!(name.contains("c1 > b1^2 delta0"), "unexpected name {name}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn case2_boundary_equal_target_is_one_step() {
        // c2 = c1 and eps'^2 = C: already at the floor and the target.
        let p = RecursionParams {
            b1: 1.0,
            c1: 1.0,
            c2: 1.0,
            eps_prime_sq: 1.0,
            big_c: 1.0,
            ..params()
        };
        let b = recurse_case2(&p).unwrap();
        assert_eq!(b.predicted_t, 1);
    }

    #[test]
    fn case2_plug_in_certified_by_unroll() {
        let p = RecursionParams {
            b1: 1.0,
            c1: 1.0,
            c2: 1.0,
            big_c: 1.0,
            eps_prime_sq: 0.25,
            ..params()
        };
        let b = recurse_case2(&p).unwrap();
        assert!(b.alpha > 0.0 && b.alpha < 1.0);
        // eta' = (b1/c1) eps'^2/(1+eps'^2) = 0.2; alpha = 1 - 0.25/1.5625 = 0.84
        assert_abs_diff_eq!(b.eta_prime, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(b.alpha, 0.84, epsilon = 1e-15);
        let (seq, certified) = unroll_worst_case(&p, &b);
        assert!(certified, "terminal {} > target", seq.last().unwrap());
    }

    #[test]
    fn case2_rejects_oversized_contraction_ratio() {
        // b1^2/c1 = 100 exceeds (sqrt(eps') + 1/sqrt(eps'))^2 for eps' = 0.5.
        let p = RecursionParams {
            b1: 10.0,
            c1: 1.0,
            c2: 0.5,
            eps_prime_sq: 0.25,
            ..params()
        };
        let err = recurse_case2(&p).unwrap_err();
        assert!(matches!(err, TronError::HypothesisViolated { .. }));
    }

    #[test]
    fn recurse2_plug_in_certified_by_unroll() {
        let lb = (1.0f64 / 2.0).max((0.2 + 0.05) / (0.2 - 0.05));
        let p = RecursionParams {
            b1: 1.0,
            c1: 2.0,
            c2: 0.1,
            c3: 0.05,
            big_c: 1.0,
            eps_prime_sq: 0.2,
            gamma: 2.0 * lb,
            ..params()
        };
        let b = recurse2(&p).unwrap();
        assert!(b.alpha > 0.0 && b.alpha < 1.0);
        assert!(b.floor < 0.2);
        let (seq, certified) = unroll_worst_case(&p, &b);
        assert!(certified, "terminal {} > target", seq.last().unwrap());
        // floor is the asymptote beta/(1-alpha)
        assert_abs_diff_eq!(b.floor, b.beta / (1.0 - b.alpha), epsilon = 1e-12);
    }

    #[test]
    fn recurse2_tiny_additive_terms_approach_geometric_decay() {
        let p = RecursionParams {
            b1: 1.0,
            c1: 2.0,
            c2: 1e-12,
            c3: 1e-12,
            big_c: 1.0,
            eps_prime_sq: 0.01,
            gamma: 4.0,
            ..params()
        };
        let b = recurse2(&p).unwrap();
        assert!(b.floor < 1e-10);
        let geometric = RecursionParams {
            c2: 0.0,
            c3: 0.0,
            delta0: 1.0,
            ..p
        };
        // delta0 = 1 reproduces eta' = b1/(2 c1) = gamma=2 tuning; rates differ
        // only through the gamma choice, so just check both contract to target.
        let g = recurse_case1(&geometric).unwrap();
        assert!(unroll_worst_case(&p, &b).1);
        assert!(unroll_worst_case(&geometric, &g).1);
    }

    #[test]
    fn recurse2_rejects_gamma_at_exact_lower_bound() {
        let lb = (1.0f64 / 2.0).max((0.2 + 0.05) / (0.2 - 0.05));
        let p = RecursionParams {
            b1: 1.0,
            c1: 2.0,
            c2: 0.1,
            c3: 0.05,
            big_c: 1.0,
            eps_prime_sq: 0.2,
            gamma: lb,
            ..params()
        };
        assert!(matches!(
            recurse2(&p),
            Err(TronError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn unroll_hand_sequence() {
        // alpha = 0.5, beta = 0, C = 1, target 0.3: 1, 0.5, 0.25 certifies at T = 3.
        let p = RecursionParams {
            big_c: 1.0,
            eps_prime_sq: 0.3,
            ..params()
        };
        let b = RecursionBound {
            lemma: LemmaId::Recurse1,
            alpha: 0.5,
            beta: 0.0,
            floor: 0.0,
            eta_prime: 1.0,
            predicted_t: 3,
            hypotheses: vec![],
        };
        let (seq, certified) = unroll_worst_case(&p, &b);
        assert_eq!(seq, vec![1.0, 0.5, 0.25]);
        assert!(certified);
    }

    #[test]
    fn unrolled_sequence_matches_geometric_closed_form() {
        let lb = (1.0f64 / 2.0).max((0.2 + 0.05) / (0.2 - 0.05));
        let p = RecursionParams {
            b1: 1.0,
            c1: 2.0,
            c2: 0.1,
            c3: 0.05,
            big_c: 1.0,
            eps_prime_sq: 0.2,
            gamma: 2.0 * lb,
            ..params()
        };
        let b = recurse2(&p).unwrap();
        let (seq, _) = unroll_worst_case(&p, &b);
        for (t, d) in seq.iter().enumerate() {
            let closed = b.alpha.powi(t as i32) * (p.big_c - b.floor) + b.floor;
            assert!(
                (d - closed).abs() <= 1e-10 * closed.abs().max(1.0),
                "t {t}: {d} vs {closed}"
            );
            assert!(*d >= b.floor - 1e-12);
        }
    }

    #[test]
    fn predicted_t_monotone_in_target_and_start() {
        let base = RecursionParams {
            b1: 2.0,
            c1: 4.0,
            delta0: 1.0,
            ..params()
        };
        let mut last_t = usize::MAX;
        for eps2 in [0.001, 0.01, 0.1, 0.5] {
            let t = recurse_case1(&RecursionParams { eps_prime_sq: eps2, ..base })
                .unwrap()
                .predicted_t;
            assert!(t <= last_t, "T not non-increasing in eps'^2");
            last_t = t;
        }
        let mut last_t = 0usize;
        for big_c in [0.5, 1.0, 10.0, 100.0] {
            let t = recurse_case1(&RecursionParams { big_c, ..base })
                .unwrap()
                .predicted_t;
            assert!(t >= last_t, "T not non-decreasing in C");
            last_t = t;
        }
    }
}
