//! The sum-of-norms criterion and joint-measurability decisions.
//!
//! For Bloch vectors `z_1, .., z_N` the criterion compares
//!
//! ```text
//! min_{F_N} sum_{mu in D^N} ‖sum_{odd S} z(S) chi_S(mu)‖
//! ```
//!
//! against `2^(N-1)`. Exceeding the bound rules out a joint POVM for any
//! biases; staying below it is sufficient when every bias vanishes.

use std::collections::BTreeMap;
use std::fmt;

use crate::construction::{construct_joint, WitnessReport};
use crate::error::{JmError, Result};
use crate::hypercube::{check_count, chi, configuration_set, SubsetLabel, DEFAULT_NMAX};
use crate::povm::{Assemblage, FourierCoefficients, Tolerances, Vec3};
use crate::solver::{minimize, SolveResult, SolverOptions, SumOfNormsProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    JointlyMeasurable,
    Incompatible,
    NecessaryHolds,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::JointlyMeasurable => "JointlyMeasurable",
            Verdict::Incompatible => "Incompatible",
            Verdict::NecessaryHolds => "NecessaryHolds",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecideOptions {
    /// Relative width of the band around the bound that is never rounded
    /// into a verdict.
    pub tol: f64,
    pub solver: SolverOptions,
    pub tolerances: Tolerances,
    pub nmax: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            tol: 1e-7,
            solver: SolverOptions::default(),
            tolerances: Tolerances::default(),
            nmax: DEFAULT_NMAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub n: usize,
    /// Minimized sum of norms (the primal value).
    pub objective: f64,
    pub bound: f64,
    pub primal_value: f64,
    pub dual_lower_bound: f64,
    pub gap: f64,
    pub optimal_coefficients: BTreeMap<SubsetLabel, Vec3>,
    pub iterations: usize,
    pub converged: bool,
    /// Present when a joint POVM was built, i.e. for unbiased inputs whose
    /// primal value is within the tolerance band of the bound.
    pub witness: Option<WitnessReport>,
    pub note: Option<String>,
}

/// `sum_{mu in D^N} ‖sum_{odd S} z(S) chi_S(mu)‖` with degree-one vectors
/// from the assemblage and the given higher-order vectors (missing labels
/// are zero). Evaluated term by term.
pub fn objective(assemblage: &Assemblage, higher: &BTreeMap<SubsetLabel, Vec3>) -> Result<f64> {
    let n = assemblage.len();
    check_count(n, 1)?;
    for label in higher.keys() {
        if !label.is_within(n) || label.len() < 3 || label.len() % 2 == 0 {
            return Err(JmError::InvalidArgument(format!(
                "{label} is not an odd subset of size at least 3 within [1, {n}]"
            )));
        }
    }
    let z = assemblage.bloch_vectors();
    let mut total = 0.0;
    for mu in configuration_set(n)? {
        let mut v = Vec3::zeros();
        for (i, zi) in z.iter().enumerate() {
            v += zi * chi(SubsetLabel::singleton(i + 1), &mu)? as f64;
        }
        for (label, w) in higher {
            v += w * chi(*label, &mu)? as f64;
        }
        total += v.norm();
    }
    Ok(total)
}

/// `‖z1 - z2‖ + ‖z1 + z2‖`; a pair of unbiased measurements is jointly
/// measurable iff this is at most 2.
pub fn busch_pair(z1: &Vec3, z2: &Vec3) -> f64 {
    (z1 - z2).norm() + (z1 + z2).norm()
}

/// The four points whose Fermat-Torricelli value equals the minimized
/// three-measurement objective: `x0 = z1 + z2 + z3` and `2 z_i - x0`.
/// The optimal third-order vector is minus the Fermat-Torricelli point.
pub fn triple_points(z1: &Vec3, z2: &Vec3, z3: &Vec3) -> [Vec3; 4] {
    let x0 = z1 + z2 + z3;
    [x0, 2.0 * z1 - x0, 2.0 * z2 - x0, 2.0 * z3 - x0]
}

/// Minimized objective for three measurements; compatible unbiased triples
/// have value at most 4.
pub fn triple_criterion(z1: &Vec3, z2: &Vec3, z3: &Vec3) -> f64 {
    let problem = SumOfNormsProblem::from_bloch_vectors(&[*z1, *z2, *z3])
        .expect("three measurements are always in range");
    minimize(&problem, &SolverOptions::default()).primal
}

fn check_nmax(n: usize, nmax: usize) -> Result<()> {
    if n > nmax {
        return Err(JmError::MeasurementCount {
            n,
            min: 1,
            max: nmax,
        });
    }
    Ok(())
}

fn bound_for(n: usize) -> f64 {
    (1u64 << (n - 1)) as f64
}

/// Decides joint measurability of the assemblage.
///
/// Incompatible is reported only when the dual lower bound exceeds
/// `2^(N-1) (1 + tol)`. JointlyMeasurable is reported only for unbiased
/// input and only when the constructed joint POVM passes verification.
/// Biased input below the bound gets NecessaryHolds. Everything else is
/// Inconclusive.
pub fn decide(assemblage: &Assemblage, opts: &DecideOptions) -> Result<DecisionReport> {
    let n = assemblage.len();
    check_count(n, 1)?;
    check_nmax(n, opts.nmax)?;
    let problem = SumOfNormsProblem::from_assemblage(assemblage)?;
    let solve = minimize(&problem, &opts.solver);
    let bound = bound_for(n);
    let unbiased = assemblage.is_unbiased(opts.tolerances.eq);
    let coefficients = problem.to_map(&solve.x_star);

    let mut report = DecisionReport {
        verdict: Verdict::Inconclusive,
        n,
        objective: solve.primal,
        bound,
        primal_value: solve.primal,
        dual_lower_bound: solve.dual,
        gap: solve.gap(),
        optimal_coefficients: coefficients,
        iterations: solve.iterations,
        converged: solve.converged,
        witness: None,
        note: None,
    };

    if n == 1 {
        // a single measurement is its own joint measurement
        report.verdict = Verdict::JointlyMeasurable;
        let povm = FourierCoefficients::from_assemblage(assemblage).to_povm();
        if unbiased {
            report.witness = Some(construct_joint(
                assemblage,
                &BTreeMap::new(),
                opts.tolerances,
            )?);
        } else {
            report.note = Some(format!(
                "single measurement; effects have minimum eigenvalue {:e}",
                povm.min_eigenvalue()
            ));
        }
        return Ok(report);
    }

    let upper = bound * (1.0 + opts.tol);
    if solve.dual > upper {
        report.verdict = Verdict::Incompatible;
        return Ok(report);
    }
    if solve.primal <= upper {
        if unbiased {
            let witness =
                construct_joint(assemblage, &report.optimal_coefficients, opts.tolerances)?;
            if witness.valid {
                report.verdict = Verdict::JointlyMeasurable;
            } else {
                report.note = Some(format!(
                    "witness failed verification (min eigenvalue {:e})",
                    witness.min_effect_eigenvalue
                ));
            }
            report.witness = Some(witness);
        } else {
            report.verdict = Verdict::NecessaryHolds;
        }
        return Ok(report);
    }
    report.note = Some(if solve.converged {
        format!(
            "bound {bound} lies in the certified interval [{}, {}]",
            solve.dual, solve.primal
        )
    } else {
        format!(
            "solver stopped after {} iterations with interval [{}, {}]",
            solve.iterations, solve.dual, solve.primal
        )
    });
    Ok(report)
}

/// Left side, right side and margin of the chain condition
/// `‖z_1 + z_N‖ + sum_p ‖z_p - z_(p+1)‖ <= 2 (1 - max_k |b_k|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; positive means the chain condition fails.
    pub margin: f64,
}

/// Evaluates the chain condition in the order given.
pub fn coplanar_chain(assemblage: &Assemblage) -> Result<ChainReport> {
    let n = assemblage.len();
    if n < 2 {
        return Err(JmError::MeasurementCount {
            n,
            min: 2,
            max: crate::hypercube::MAX_MEASUREMENTS,
        });
    }
    let z = assemblage.bloch_vectors();
    let lhs = (z[0] + z[n - 1]).norm() + z.windows(2).map(|w| (w[0] - w[1]).norm()).sum::<f64>();
    let rhs = 2.0 * (1.0 - assemblage.max_abs_bias());
    Ok(ChainReport {
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub eta_star: f64,
    pub objective_at_star: f64,
    pub gap: f64,
    /// False when no flip occurred in `[eta_lo, eta_hi]`; `eta_star` is then
    /// the boundary value that was never crossed.
    pub flipped: bool,
    pub evaluations: usize,
}

fn scaled_solve(directions: &[Vec3], eta: f64, opts: &DecideOptions) -> Result<SolveResult> {
    let scaled: Vec<Vec3> = directions.iter().map(|d| d * eta).collect();
    let assemblage = Assemblage::from_bloch_vectors(&scaled)?;
    let problem = SumOfNormsProblem::from_assemblage(&assemblage)?;
    Ok(minimize(&problem, &opts.solver))
}

/// Bisects for the noise level where `eta * directions` becomes certifiably
/// incompatible.
pub fn threshold_sweep(
    directions: &[Vec3],
    eta_lo: f64,
    eta_hi: f64,
    tol_eta: f64,
    opts: &DecideOptions,
) -> Result<SweepResult> {
    let n = directions.len();
    check_count(n, 1)?;
    check_nmax(n, opts.nmax)?;
    if !(0.0..=1.0).contains(&eta_lo) || !(eta_lo..=1.0).contains(&eta_hi) {
        return Err(JmError::InvalidArgument(format!(
            "need 0 <= eta_lo <= eta_hi <= 1, got [{eta_lo}, {eta_hi}]"
        )));
    }
    if tol_eta.is_nan() || tol_eta <= 0.0 {
        return Err(JmError::InvalidArgument(format!(
            "tol_eta must be positive, got {tol_eta}"
        )));
    }
    let upper = bound_for(n) * (1.0 + opts.tol);
    let mut evaluations = 0;
    let mut incompatible = |eta: f64| -> Result<SolveResult> {
        evaluations += 1;
        scaled_solve(directions, eta, opts)
    };

    let at_hi = incompatible(eta_hi)?;
    if at_hi.dual <= upper {
        return Ok(SweepResult {
            eta_star: eta_hi,
            objective_at_star: at_hi.primal,
            gap: at_hi.gap(),
            flipped: false,
            evaluations,
        });
    }
    let at_lo = incompatible(eta_lo)?;
    if at_lo.dual > upper {
        return Ok(SweepResult {
            eta_star: eta_lo,
            objective_at_star: at_lo.primal,
            gap: at_lo.gap(),
            flipped: false,
            evaluations,
        });
    }
    let (mut lo, mut hi) = (eta_lo, eta_hi);
    while hi - lo > tol_eta {
        let mid = 0.5 * (lo + hi);
        if incompatible(mid)?.dual > upper {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let eta_star = 0.5 * (lo + hi);
    let at_star = incompatible(eta_star)?;
    Ok(SweepResult {
        eta_star,
        objective_at_star: at_star.primal,
        gap: at_star.gap(),
        flipped: true,
        evaluations,
    })
}
