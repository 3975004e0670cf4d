//! Seeded random assemblages.

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::povm::{Assemblage, BlochObservable, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// `n` unbiased observables with uniform directions and Bloch norms
/// uniform in `[0, 1]`.
pub fn random_unbiased<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Assemblage> {
    let v: Vec<Vec3> = (0..n)
        .map(|_| random_direction(rng) * rng.gen_range(0.0..=1.0))
        .collect();
    Assemblage::from_bloch_vectors(&v)
}

/// `n` observables with bias uniform in `[-1, 1]` and Bloch norm uniform in
/// `[0, 1 - |bias|]`.
pub fn random_biased<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Assemblage> {
    let obs = (0..n)
        .map(|_| {
            let bias: f64 = rng.gen_range(-1.0..=1.0);
            let norm = rng.gen_range(0.0..=1.0) * (1.0 - bias.abs());
            BlochObservable::new(bias, random_direction(rng) * norm)
        })
        .collect();
    Assemblage::new(obs, 0.0)
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let axis = Unit::new_normalize(random_direction(rng));
    // the rotation angle of a Haar-random rotation has density (1 - cos t) / pi
    loop {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        if rng.gen_range(0.0..2.0) <= 1.0 - t.cos() {
            return Rotation3::from_axis_angle(&axis, t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_valid() {
        let a = random_unbiased(&mut rng(7), 4).unwrap();
        let b = random_unbiased(&mut rng(7), 4).unwrap();
        assert_eq!(a, b);
        assert!(a.is_unbiased(0.0));
        let mut r = rng(3);
        for _ in 0..100 {
            let c = random_biased(&mut r, 3).unwrap();
            for o in c.observables() {
                assert!(o.bloch.norm() <= 1.0 - o.bias.abs() + 1e-15);
            }
        }
    }

    #[test]
    fn directions_are_unit_and_centered() {
        let mut r = rng(11);
        let mut mean = Vec3::zeros();
        for _ in 0..20_000 {
            let d = random_direction(&mut r);
            assert!((d.norm() - 1.0).abs() < 1e-12);
            mean += d;
        }
        assert!((mean / 20_000.0).norm() < 0.03);
    }

    #[test]
    fn rotations_are_proper() {
        let mut r = rng(5);
        for _ in 0..20 {
            let m = random_rotation(&mut r).into_inner();
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            assert!((m.transpose() * m - nalgebra::Matrix3::identity()).norm() < 1e-12);
        }
    }
}
