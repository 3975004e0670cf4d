//! Explicit joint POVMs for unbiased assemblages.
//!
//! Odd-order Fourier coefficients are vectors (the Bloch vectors plus the
//! free higher-order ones), even-order coefficients are scalars chosen so
//! that every effect on the configuration set except `mu_+` sits exactly on
//! the boundary of the positive cone:
//!
//! ```text
//! 1 + sum_{even S} z'(S) chi_S(mu) = ‖sum_{odd S} z'(S) chi_S(mu)‖
//! ```
//!
//! The effect at `mu_+` is then positive exactly when the norm sum over the
//! configuration set is at most `2^(N-1)`, and the reflected half inherits
//! positivity because `mu -> -mu` keeps even terms and flips odd ones.

use std::collections::BTreeMap;

use crate::error::{JmError, Result};
use crate::hypercube::{apply_a_inverse, check_count, fwht, LabelOrders, SubsetLabel};
use crate::povm::{verify_povm, Assemblage, FourierCoefficients, JointPovm, Tolerances, Vec3};
use crate::solver::SumOfNormsProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub joint: JointPovm,
    /// Even-order scalars `z'(S)`, `|S| >= 2`.
    pub even_scalars: BTreeMap<SubsetLabel, f64>,
    pub min_effect_eigenvalue: f64,
    /// Smallest eigenvalue over outcomes with `mu_1 = +1`.
    pub min_eigenvalue_configuration: f64,
    /// Smallest eigenvalue over outcomes with `mu_1 = -1`.
    pub min_eigenvalue_reflected: f64,
    pub marginal_residual: f64,
    pub identity_residual: f64,
    /// Largest violation of the boundary equations on the configuration set.
    pub system_residual: f64,
    pub valid: bool,
}

/// Builds and verifies the joint POVM for an unbiased assemblage with the
/// given higher-order odd vectors (missing labels are zero).
///
/// A report is returned even when the result is not positive; `valid` then
/// is false and no joint measurability is implied.
pub fn construct_joint(
    assemblage: &Assemblage,
    higher: &BTreeMap<SubsetLabel, Vec3>,
    tol: Tolerances,
) -> Result<WitnessReport> {
    let n = assemblage.len();
    check_count(n, 1)?;
    if let Some((index, o)) = assemblage
        .observables()
        .iter()
        .enumerate()
        .find(|(_, o)| o.bias.abs() > tol.eq)
    {
        return Err(JmError::Biased {
            index: index + 1,
            bias: o.bias,
        });
    }
    let problem = SumOfNormsProblem::from_assemblage(assemblage)?;
    let x = problem.from_map(higher)?;
    let norms: Vec<f64> = problem.residuals(&x).iter().map(|r| r.norm()).collect();

    let orders = LabelOrders::new(n)?;
    let rhs: Vec<f64> = orders
        .b_labels
        .iter()
        .map(|b| norms[(b.mask() >> 1) as usize] - 1.0)
        .collect();
    let solution = apply_a_inverse(n, &rhs)?;
    let even_scalars: BTreeMap<SubsetLabel, f64> =
        orders.x_labels.iter().copied().zip(solution).collect();

    let mut coeffs = FourierCoefficients::from_assemblage(assemblage);
    for (label, v) in problem.slot_labels().iter().zip(&x) {
        coeffs.set_vector(*label, *v)?;
    }
    for (label, s) in &even_scalars {
        coeffs.set_scalar(*label, *s)?;
    }
    let joint = coeffs.to_povm();

    // scalar parts on the half cube, computed apart from the effects
    let mut scalar_values = vec![0.0; 1 << (n - 1)];
    scalar_values[0] = 1.0;
    for (label, s) in &even_scalars {
        scalar_values[(label.mask() >> 1) as usize] = *s;
    }
    fwht(&mut scalar_values);
    let system_residual = scalar_values
        .iter()
        .zip(&norms)
        .skip(1)
        .map(|(s, r)| (s - r).abs())
        .fold(0.0, f64::max);

    let mut min_conf = f64::INFINITY;
    let mut min_refl = f64::INFINITY;
    for (mask, e) in joint.effects().iter().enumerate() {
        let ev = e.min_eigenvalue();
        if mask & 1 == 0 {
            min_conf = min_conf.min(ev);
        } else {
            min_refl = min_refl.min(ev);
        }
    }
    let check = verify_povm(&joint, Some(assemblage), tol);
    Ok(WitnessReport {
        min_effect_eigenvalue: check.min_eigenvalue,
        min_eigenvalue_configuration: min_conf,
        min_eigenvalue_reflected: min_refl,
        marginal_residual: check.max_marginal_residual,
        identity_residual: check.identity_residual,
        system_residual,
        valid: check.valid,
        even_scalars,
        joint,
    })
}

/// Largest bias or Bloch-vector distance between the marginals of `witness`
/// and the assemblage.
pub fn check_marginals(witness: &JointPovm, assemblage: &Assemblage) -> Result<f64> {
    if witness.n() != assemblage.len() {
        return Err(JmError::LengthMismatch {
            expected: witness.n(),
            found: assemblage.len(),
        });
    }
    let mut worst = 0.0f64;
    for (k, o) in assemblage.observables().iter().enumerate() {
        worst = worst.max(witness.marginal(k + 1)?.distance(o));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::configuration_set;
    use crate::povm::{BlochObservable, Hermitian2};
    use crate::solver::{minimize, SolverOptions};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unbiased(v: &[[f64; 3]]) -> Assemblage {
        let vs: Vec<Vec3> = v.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect();
        Assemblage::from_bloch_vectors(&vs).unwrap()
    }

    #[test]
    fn busch_boundary_pair() {
        let a = unbiased(&[[FRAC_1_SQRT_2, 0.0, 0.0], [0.0, 0.0, FRAC_1_SQRT_2]]);
        let w = construct_joint(&a, &BTreeMap::new(), Tolerances::default()).unwrap();
        let z12 = w.even_scalars[&SubsetLabel::from_indices(&[1, 2]).unwrap()];
        assert!(z12.abs() < 1e-15);
        for (mu, e) in w.joint.iter() {
            let m = mu.entries();
            let expected = Hermitian2::new(
                0.25,
                0.25 * FRAC_1_SQRT_2 * m[0] as f64,
                0.0,
                0.25 * FRAC_1_SQRT_2 * m[1] as f64,
            );
            assert!((*e - expected).op_norm() < 1e-15, "{mu}");
        }
        assert!(w.valid);
        assert!(w.min_effect_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn zero_vectors_split_between_all_plus_and_all_minus() {
        // every boundary equation reads 1 + sum z'(S) chi_S(mu) = 0, which
        // puts weight 1/2 on mu_+ and on -mu_+ and nothing elsewhere
        for n in 2..=5 {
            let a = unbiased(&vec![[0.0; 3]; n]);
            let w = construct_joint(&a, &BTreeMap::new(), Tolerances::default()).unwrap();
            assert!(w.even_scalars.values().all(|s| *s == 1.0));
            let last = (1 << n) - 1;
            for (mask, e) in w.joint.effects().iter().enumerate() {
                let expected = if mask == 0 || mask == last { 0.5 } else { 0.0 };
                assert_eq!(*e, Hermitian2::identity() * expected);
            }
            assert!(w.valid);
        }
        let single = unbiased(&[[0.0; 3]]);
        let w = construct_joint(&single, &BTreeMap::new(), Tolerances::default()).unwrap();
        assert!(w.even_scalars.is_empty());
        assert!(w
            .joint
            .effects()
            .iter()
            .all(|e| *e == Hermitian2::identity() * 0.5));
    }

    #[test]
    fn rejects_biased_input() {
        let a = Assemblage::new(
            vec![
                BlochObservable::new(0.2, Vec3::new(0.5, 0.0, 0.0)),
                BlochObservable::unbiased(Vec3::new(0.0, 0.5, 0.0)),
            ],
            1e-10,
        )
        .unwrap();
        let err = construct_joint(&a, &BTreeMap::new(), Tolerances::default()).unwrap_err();
        assert!(matches!(err, JmError::Biased { index: 1, .. }));
    }

    #[test]
    fn rejects_foreign_labels() {
        let a = unbiased(&[[0.1, 0.0, 0.0]; 3]);
        let mut h = BTreeMap::new();
        h.insert(SubsetLabel::from_indices(&[1, 2]).unwrap(), Vec3::zeros());
        assert!(construct_joint(&a, &h, Tolerances::default()).is_err());
    }

    #[test]
    fn counterexample_witness() {
        let a = unbiased(&[
            [0.7, 0.0, 0.0],
            [0.8, 0.4, 0.0],
            [0.3, 0.4, 0.0],
            [0.1, 0.2, 0.0],
        ]);
        let p = SumOfNormsProblem::from_assemblage(&a).unwrap();
        let r = minimize(&p, &SolverOptions::default());
        let w = construct_joint(&a, &p.to_map(&r.x_star), Tolerances::default()).unwrap();
        assert!(w.valid);
        assert!(w.min_effect_eigenvalue >= -1e-10);
        assert!(w.marginal_residual <= 1e-10);
        assert!(w.system_residual <= 1e-12);
        assert!(check_marginals(&w.joint, &a).unwrap() <= 1e-10);
        // slack at mu_+ is (8 - primal) / 16
        let plus = w.joint.effects()[0].min_eigenvalue();
        assert!((plus - (8.0 - r.primal) / 16.0).abs() < 1e-12);
    }

    #[test]
    fn incompatible_pair_is_not_positive() {
        let a = unbiased(&[[0.9, 0.0, 0.0], [0.0, 0.0, 0.9]]);
        let w = construct_joint(&a, &BTreeMap::new(), Tolerances::default()).unwrap();
        assert!(!w.valid);
        assert!(w.min_eigenvalue_configuration < 0.0);
    }

    #[test]
    fn even_scalar_sum_identity() {
        let a = unbiased(&[
            [0.3, 0.1, 0.0],
            [0.0, 0.4, 0.2],
            [0.1, -0.3, 0.2],
            [0.2, 0.0, -0.1],
        ]);
        let mut h = BTreeMap::new();
        h.insert(
            SubsetLabel::from_indices(&[1, 2, 3]).unwrap(),
            Vec3::new(0.05, 0.0, 0.1),
        );
        let w = construct_joint(&a, &h, Tolerances::default()).unwrap();
        let p = SumOfNormsProblem::from_assemblage(&a).unwrap();
        let x = p.from_map(&h).unwrap();
        let norms: f64 = p.residuals(&x).iter().skip(1).map(|r| r.norm()).sum();
        let lhs: f64 = w.even_scalars.values().sum();
        assert!((lhs - (7.0 - norms)).abs() < 1e-12);
        // the boundary equations also hold when evaluated effect by effect
        for mu in configuration_set(4).unwrap().iter().skip(1) {
            let e = w.joint.effect(mu).unwrap();
            assert!(e.min_eigenvalue().abs() < 1e-14, "{mu}");
        }
    }

    #[test]
    fn uniform_against_nonzero_assemblage() {
        let a = unbiased(&[[0.3, 0.0, 0.0], [0.0, 0.6, 0.0]]);
        let u = FourierCoefficients::new(2).unwrap().to_povm();
        assert!((check_marginals(&u, &a).unwrap() - 0.6).abs() < 1e-15);
    }
}
