//! Independent checks: alternating projections for joint-POVM feasibility
//! and a Weiszfeld solver for Fermat-Torricelli points.
//!
//! The feasibility oracle works on the `2^N` effects directly. The affine set
//! of candidate joint POVMs fixes the empty-set and degree-one Fourier
//! coefficients, so projecting onto it is a matter of resetting those
//! coordinates. The cone of positive effects is handled effect by effect.

use crate::error::{JmError, Result};
use crate::hypercube::{check_count, fwht};
use crate::povm::{verify_povm, Assemblage, Hermitian2, JointPovm, Tolerances, Vec3};

/// Largest number of measurements the feasibility oracle accepts.
pub const ORACLE_NMAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub tol: Tolerances,
    pub max_iters: usize,
    /// Iterations between two attempts at extracting a separating functional.
    pub check_every: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: Tolerances::default(),
            max_iters: 100_000,
            check_every: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    /// A joint POVM that passed verification.
    Feasible {
        povm: JointPovm,
        iterations: usize,
    },
    /// A functional separating the affine set from the positive cone was
    /// found; `distance_lower_bound` bounds the distance between the two
    /// sets (in the Euclidean norm of Pauli coordinates) from below.
    InfeasibleEvidence {
        distance_lower_bound: f64,
        iterations: usize,
        /// Distance from the affine iterate to the cone at every check.
        trace: Vec<f64>,
    },
    Undecided {
        distance: f64,
        iterations: usize,
    },
}

impl OracleOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, OracleOutcome::InfeasibleEvidence { .. })
    }
}

/// Fixed Fourier data of the affine set, in Pauli coordinates.
struct AffineSet {
    n: usize,
    fixed: Vec<(usize, Hermitian2)>,
}

impl AffineSet {
    fn new(assemblage: &Assemblage) -> Self {
        let mut fixed = vec![(0, Hermitian2::identity())];
        for (k, o) in assemblage.observables().iter().enumerate() {
            fixed.push((1 << k, Hermitian2::from_parts(o.bias, o.bloch)));
        }
        AffineSet {
            n: assemblage.len(),
            fixed,
        }
    }

    fn size(&self) -> usize {
        1 << self.n
    }

    fn project(&self, effects: &mut [Hermitian2]) {
        fwht(effects);
        let scale = self.size() as f64;
        for &(mask, value) in &self.fixed {
            effects[mask] = value;
        }
        // the transform squares to 2^N times the identity
        fwht(effects);
        for e in effects.iter_mut() {
            *e = *e * (1.0 / scale);
        }
    }

    /// Effects of the point with only the fixed coefficients nonzero.
    fn base_point(&self) -> Vec<Hermitian2> {
        let mut f = vec![Hermitian2::zero(); self.size()];
        for &(mask, value) in &self.fixed {
            f[mask] = value;
        }
        fwht(&mut f);
        let scale = 1.0 / self.size() as f64;
        f.into_iter().map(|e| e * scale).collect()
    }
}

fn inner(a: &Hermitian2, b: &Hermitian2) -> f64 {
    a.c0 * b.c0 + a.c.dot(&b.c)
}

fn norm_sq(effects: &[Hermitian2]) -> f64 {
    effects.iter().map(|e| inner(e, e)).sum()
}

/// Projection onto `{c0 - ‖c‖ >= delta}`.
fn project_shifted_cone(e: &Hermitian2, delta: f64) -> Hermitian2 {
    let shifted = Hermitian2::from_parts(e.c0 - delta, e.c).psd_part();
    Hermitian2::from_parts(shifted.c0 + delta, shifted.c)
}

/// Tries to turn the negative part of an affine iterate into a separating
/// functional. Returns the certified distance lower bound if it separates.
fn separation_bound(set: &AffineSet, x: &[Hermitian2]) -> Option<f64> {
    // negative part of every effect: -g is positive
    let mut g: Vec<Hermitian2> = x.iter().map(|e| *e - e.psd_part()).collect();
    // keep only the components orthogonal to the free directions
    fwht(&mut g);
    for (mask, v) in g.iter_mut().enumerate() {
        if mask != 0 && !mask.is_power_of_two() {
            *v = Hermitian2::zero();
        }
    }
    fwht(&mut g);
    let scale = 1.0 / set.size() as f64;
    for v in g.iter_mut() {
        *v = *v * scale;
    }
    // shift by a multiple of the identity until every effect is negative
    let worst = g
        .iter()
        .map(|v| v.c0 + v.c.norm())
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > 0.0 {
        for v in g.iter_mut() {
            v.c0 -= worst;
        }
    }
    let value: f64 = g
        .iter()
        .zip(set.base_point())
        .map(|(a, b)| inner(a, &b))
        .sum();
    let norm = norm_sq(&g).sqrt();
    if norm > 0.0 && value > 0.0 {
        Some(value / norm)
    } else {
        None
    }
}

/// Alternating projections between the affine set of candidate joint POVMs
/// and (slightly shrunken) cones of positive effects.
pub fn feasibility_oracle(assemblage: &Assemblage, opts: &OracleOptions) -> Result<OracleOutcome> {
    let n = assemblage.len();
    check_count(n, 1)?;
    if n > ORACLE_NMAX {
        return Err(JmError::MeasurementCount {
            n,
            min: 1,
            max: ORACLE_NMAX,
        });
    }
    let set = AffineSet::new(assemblage);
    let unit = 1.0 / set.size() as f64;
    let phases = [1e-2, 1e-4, 1e-6, 1e-8, 0.0];
    let per_phase = (opts.max_iters / phases.len()).max(1);

    let mut y = set.base_point();
    let mut x = y.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for delta in phases.iter().map(|d| d * unit) {
        for _ in 0..per_phase {
            x.clone_from(&y);
            set.project(&mut x);
            iterations += 1;
            let min_eig = x
                .iter()
                .map(|e| e.min_eigenvalue())
                .fold(f64::INFINITY, f64::min);
            if min_eig >= -opts.tol.pos {
                let povm = JointPovm::from_effects(n, x.clone())?;
                if verify_povm(&povm, Some(assemblage), opts.tol).valid {
                    return Ok(OracleOutcome::Feasible { povm, iterations });
                }
            }
            if iterations % opts.check_every == 0 {
                let dist = x
                    .iter()
                    .map(|e| {
                        let d = *e - e.psd_part();
                        inner(&d, &d)
                    })
                    .sum::<f64>()
                    .sqrt();
                trace.push(dist);
                if let Some(bound) = separation_bound(&set, &x) {
                    return Ok(OracleOutcome::InfeasibleEvidence {
                        distance_lower_bound: bound,
                        iterations,
                        trace,
                    });
                }
            }
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = project_shifted_cone(xi, delta);
            }
        }
    }
    let distance = x
        .iter()
        .map(|e| {
            let d = *e - e.psd_part();
            inner(&d, &d)
        })
        .sum::<f64>()
        .sqrt();
    Ok(OracleOutcome::Undecided {
        distance,
        iterations,
    })
}

fn distance_sum(points: &[Vec3], x: &Vec3) -> f64 {
    points.iter().map(|p| (p - x).norm()).sum()
}

/// Geometric median of `points`: returns the point and its distance sum.
///
/// Every input point is first tested for optimality (the subgradient
/// condition at an anchor); otherwise Weiszfeld iterations run from the
/// centroid until the optimality gap bound `‖∇f(x)‖ · max_i ‖x - p_i‖`
/// drops below `tol`.
pub fn weiszfeld_ft(points: &[Vec3], tol: f64) -> Result<(Vec3, f64)> {
    if points.is_empty() {
        return Err(JmError::InvalidArgument("need at least one point".into()));
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
    let coincide = 1e-15 * scale;

    let mut best: Option<(Vec3, f64)> = None;
    for p in points {
        let mut pull = Vec3::zeros();
        let mut weight = 0.0;
        for q in points {
            let d = (p - q).norm();
            if d <= coincide {
                weight += 1.0;
            } else {
                pull += (p - q) / d;
            }
        }
        if pull.norm() <= weight {
            let value = distance_sum(points, p);
            if best.is_none_or(|(_, v)| value < v) {
                best = Some((*p, value));
            }
        }
    }
    if let Some(b) = best {
        return Ok(b);
    }

    let mut x = points.iter().sum::<Vec3>() / points.len() as f64;
    for _ in 0..1_000_000 {
        let mut num = Vec3::zeros();
        let mut den = 0.0;
        let mut grad = Vec3::zeros();
        let mut at_anchor = None;
        for p in points {
            let d = (x - p).norm();
            if d <= coincide {
                at_anchor = Some(*p);
                continue;
            }
            num += p / d;
            den += 1.0 / d;
            grad += (x - p) / d;
        }
        if at_anchor.is_some() {
            // anchors were ruled out above; step off along the descent
            // direction using the Vardi-Zhang correction
            let r = grad.norm();
            let t = (1.0 / r).min(1.0);
            let target = num / den;
            x = x * t + target * (1.0 - t) + (-grad) * 1e-12 * scale;
            continue;
        }
        let reach = points.iter().map(|p| (x - p).norm()).fold(0.0, f64::max);
        if grad.norm() * reach <= tol {
            break;
        }
        x = num / den;
    }
    Ok((x, distance_sum(points, &x)))
}
