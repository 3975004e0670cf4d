//! Named assemblages used by the tests and the command-line tool.

use crate::povm::{Assemblage, Vec3};

/// Bloch vectors of the four coplanar unbiased measurements that violate
/// the chain condition yet are jointly measurable.
pub const COUNTEREXAMPLE: [[f64; 3]; 4] = [
    [0.7, 0.0, 0.0],
    [0.8, 0.4, 0.0],
    [0.3, 0.4, 0.0],
    [0.1, 0.2, 0.0],
];

pub fn counterexample() -> Assemblage {
    from_arrays(&COUNTEREXAMPLE)
}

pub fn from_arrays(v: &[[f64; 3]]) -> Assemblage {
    let vs: Vec<Vec3> = v.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect();
    Assemblage::from_bloch_vectors(&vs).expect("fixture vectors are valid")
}

pub fn x() -> Vec3 {
    Vec3::new(1.0, 0.0, 0.0)
}

pub fn y() -> Vec3 {
    Vec3::new(0.0, 1.0, 0.0)
}

pub fn z() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Unbiased noisy `sigma_x` and `sigma_z` with visibility `eta`.
pub fn xz_pair(eta: f64) -> Assemblage {
    Assemblage::from_bloch_vectors(&[x() * eta, z() * eta]).expect("eta within [0, 1]")
}

/// Unbiased noisy `sigma_x`, `sigma_y`, `sigma_z` with visibility `eta`.
pub fn orthogonal_triple(eta: f64) -> Assemblage {
    Assemblage::from_bloch_vectors(&[x() * eta, y() * eta, z() * eta]).expect("eta within [0, 1]")
}
