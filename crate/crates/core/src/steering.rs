//! Two-outcome qubit steering assemblages and their steering-equivalent
//! measurements `J_i(mu) = rho^(-1/2) sigma_i(mu) rho^(-1/2)`.
//!
//! An assemblage admits a local hidden state model exactly when the mapped
//! measurements are jointly measurable, so the criterion of
//! [`crate::criterion`] doubles as a family of steering inequalities.

use crate::criterion::{decide, DecideOptions, DecisionReport};
use crate::error::{JmError, Result};
use crate::povm::{Assemblage, BlochObservable, Hermitian2, Tolerances, Vec3};

/// Eigenvalues of the reduced state below this are treated as zero.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// Subnormalized conditional states `sigma_i(+1), sigma_i(-1)` for each
/// input `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAssemblage {
    members: Vec<[Hermitian2; 2]>,
}

impl StateAssemblage {
    /// Checks positivity of every member and that `sigma_i(+) + sigma_i(-)`
    /// is the same operator for every input.
    pub fn new(members: Vec<[Hermitian2; 2]>, tol: Tolerances) -> Result<Self> {
        if members.is_empty() {
            return Err(JmError::EmptyAssemblage);
        }
        for (i, pair) in members.iter().enumerate() {
            for s in pair {
                let coords = s.coords();
                if coords.iter().any(|v| !v.is_finite()) {
                    return Err(JmError::InvalidArgument(format!(
                        "input {} has non-finite coordinates",
                        i + 1
                    )));
                }
                if !s.is_psd(tol.pos) {
                    return Err(JmError::NotPositive {
                        min_eigenvalue: s.min_eigenvalue(),
                    });
                }
            }
        }
        let first = members[0][0] + members[0][1];
        let deviation = members
            .iter()
            .map(|p| (p[0] + p[1] - first).op_norm())
            .fold(0.0, f64::max);
        if deviation > tol.eq {
            return Err(JmError::InconsistentStates { deviation });
        }
        Ok(StateAssemblage { members })
    }

    pub fn members(&self) -> &[[Hermitian2; 2]] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Applies `m · sigma · m` to every member.
    pub fn conjugated(&self, m: &Hermitian2) -> StateAssemblage {
        StateAssemblage {
            members: self
                .members
                .iter()
                .map(|p| [p[0].conjugate_by(m), p[1].conjugate_by(m)])
                .collect(),
        }
    }

    /// Rotates the Bloch part of every member, i.e. conjugates by the
    /// corresponding unitary.
    pub fn rotated(&self, r: &nalgebra::Rotation3<f64>) -> StateAssemblage {
        let rot = |h: &Hermitian2| Hermitian2::from_parts(h.c0, r * h.c);
        StateAssemblage {
            members: self
                .members
                .iter()
                .map(|p| [rot(&p[0]), rot(&p[1])])
                .collect(),
        }
    }
}

/// The common outcome sum `rho_B`, averaged over inputs.
pub fn reduced_state(sa: &StateAssemblage) -> Hermitian2 {
    let mut acc = Hermitian2::zero();
    for p in sa.members() {
        acc += p[0] + p[1];
    }
    acc * (1.0 / sa.len() as f64)
}

/// Pseudo-inverse square root of a 2x2 positive operator together with the
/// projector onto its support.
fn pinv_sqrt(rho: &Hermitian2) -> (Hermitian2, Hermitian2) {
    let r = rho.c.norm();
    let (lo, hi) = (rho.c0 - r, rho.c0 + r);
    let inv = |l: f64| {
        if l > PSEUDO_INVERSE_CUTOFF {
            1.0 / l.sqrt()
        } else {
            0.0
        }
    };
    let keep = |l: f64| if l > PSEUDO_INVERSE_CUTOFF { 1.0 } else { 0.0 };
    if r <= PSEUDO_INVERSE_CUTOFF {
        let a = inv(rho.c0);
        let k = keep(rho.c0);
        return (Hermitian2::identity() * a, Hermitian2::identity() * k);
    }
    let n = rho.c / r;
    // spectral decomposition with projectors ½(1 ± n·σ)
    let m = Hermitian2::from_parts(0.5 * (inv(hi) + inv(lo)), n * (0.5 * (inv(hi) - inv(lo))));
    let p = Hermitian2::from_parts(
        0.5 * (keep(hi) + keep(lo)),
        n * (0.5 * (keep(hi) - keep(lo))),
    );
    (m, p)
}

/// Maps the state assemblage to its steering-equivalent measurements.
///
/// When `rho_B` is rank deficient the mapped effects only sum to the
/// projector `P` onto its support; each `J_i(+)` is then completed by
/// `(1 - p_i)(1 - P)` and `J_i(-)` by `p_i (1 - P)`, where `p_i` is the
/// weight of `J_i(+)` on the support. This keeps the measurements unbiased
/// and commuting with `P`.
pub fn steering_equivalent(sa: &StateAssemblage, tol: Tolerances) -> Result<Assemblage> {
    let rho = reduced_state(sa);
    if !rho.is_psd(tol.pos) {
        return Err(JmError::NotPositive {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    let (m, support) = pinv_sqrt(&rho);
    let complement = Hermitian2::identity() - support;
    let rank_deficient = complement.op_norm() > 0.0;
    let observables = sa
        .members()
        .iter()
        .map(|p| {
            let mut plus = p[0].conjugate_by(&m);
            if rank_deficient {
                let weight = plus.trace() / support.trace().max(f64::MIN_POSITIVE);
                plus += complement * (1.0 - weight);
            }
            BlochObservable::new(2.0 * plus.c0 - 1.0, plus.c * 2.0)
        })
        .collect();
    Assemblage::new(observables, tol.pos.max(1e-9))
}

/// Joint-measurability decision for the steering-equivalent measurements.
/// Incompatible means steerable; JointlyMeasurable means a local hidden
/// state model exists. Biased mapped measurements only get the necessary
/// test.
pub fn steering_decision(sa: &StateAssemblage, opts: &DecideOptions) -> Result<DecisionReport> {
    let mapped = steering_equivalent(sa, opts.tolerances)?;
    decide(&mapped, opts)
}

/// Assemblage on Bob's side of a singlet with visibility `v` when Alice
/// measures `a_i · σ`: `sigma_i(±) = ¼(1 ∓ v a_i · σ)`.
pub fn noisy_singlet(v: f64, directions: &[Vec3]) -> Result<StateAssemblage> {
    let members = directions
        .iter()
        .map(|a| {
            [
                Hermitian2::from_parts(0.25, a * (-0.25 * v)),
                Hermitian2::from_parts(0.25, a * (0.25 * v)),
            ]
        })
        .collect();
    StateAssemblage::new(members, Tolerances::default())
}

/// Assemblage produced by measuring `assemblage` on half of a state whose
/// reduced state is `rho`: `sigma_i(mu) = rho^½ J_i(mu) rho^½`.
pub fn assemblage_from_povms(assemblage: &Assemblage, rho: &Hermitian2) -> Result<StateAssemblage> {
    let r = rho.c.norm();
    let s = |l: f64| l.max(0.0).sqrt();
    let root = if r == 0.0 {
        Hermitian2::identity() * s(rho.c0)
    } else {
        let n = rho.c / r;
        let (lo, hi) = (rho.c0 - r, rho.c0 + r);
        Hermitian2::from_parts(0.5 * (s(hi) + s(lo)), n * (0.5 * (s(hi) - s(lo))))
    };
    let members = assemblage
        .observables()
        .iter()
        .map(|o| {
            [
                o.effect(1).conjugate_by(&root),
                o.effect(-1).conjugate_by(&root),
            ]
        })
        .collect();
    StateAssemblage::new(members, Tolerances::default())
}
