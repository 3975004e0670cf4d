//! Bloch-picture data model for binary qubit measurements and their joint
//! POVMs. Operators are kept in Pauli coordinates `c0·1 + c·σ`.

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::Vector3;

use crate::error::{JmError, Result};
use crate::hypercube::{check_count, fwht, OutcomeVector, SubsetLabel};

pub type Vec3 = Vector3<f64>;

/// Positivity and equality tolerances shared by the verification routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub pos: f64,
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pos: 1e-10,
            eq: 1e-10,
        }
    }
}

/// Hermitian 2x2 operator `c0·1 + c·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hermitian2 {
    pub c0: f64,
    pub c: Vec3,
}

impl Hermitian2 {
    pub fn new(c0: f64, cx: f64, cy: f64, cz: f64) -> Self {
        Hermitian2 {
            c0,
            c: Vec3::new(cx, cy, cz),
        }
    }

    pub fn from_parts(c0: f64, c: Vec3) -> Self {
        Hermitian2 { c0, c }
    }

    pub fn identity() -> Self {
        Hermitian2::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn zero() -> Self {
        Hermitian2::default()
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.c0, self.c.x, self.c.y, self.c.z]
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.c0
    }

    /// `(smaller, larger)` eigenvalues `c0 ∓ ‖c‖`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.c.norm();
        (self.c0 - r, self.c0 + r)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.c0 - self.c.norm()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Operator norm `|c0| + ‖c‖`.
    pub fn op_norm(&self) -> f64 {
        self.c0.abs() + self.c.norm()
    }

    /// Nearest positive semidefinite operator in Hilbert-Schmidt distance.
    pub fn psd_part(&self) -> Hermitian2 {
        let r = self.c.norm();
        if self.c0 >= r {
            *self
        } else if self.c0 <= -r {
            Hermitian2::zero()
        } else {
            let half = 0.5 * (self.c0 + r);
            Hermitian2::from_parts(half, self.c * (half / r))
        }
    }

    /// The product `m · self · m`.
    pub fn conjugate_by(&self, m: &Hermitian2) -> Hermitian2 {
        let (m0, mv) = (m.c0, m.c);
        let (x0, xv) = (self.c0, self.c);
        let mm = mv.norm_squared();
        let mx = mv.dot(&xv);
        Hermitian2 {
            c0: x0 * (m0 * m0 + mm) + 2.0 * m0 * mx,
            c: xv * (m0 * m0 - mm) + mv * (2.0 * mx + 2.0 * m0 * x0),
        }
    }

    /// Matrix entries as `(re, im)` pairs in the computational basis.
    pub fn matrix_entries(&self) -> [[(f64, f64); 2]; 2] {
        let Hermitian2 { c0, c } = *self;
        [
            [(c0 + c.z, 0.0), (c.x, -c.y)],
            [(c.x, c.y), (c0 - c.z, 0.0)],
        ]
    }
}

impl Add for Hermitian2 {
    type Output = Hermitian2;
    fn add(self, rhs: Hermitian2) -> Hermitian2 {
        Hermitian2::from_parts(self.c0 + rhs.c0, self.c + rhs.c)
    }
}

impl AddAssign for Hermitian2 {
    fn add_assign(&mut self, rhs: Hermitian2) {
        self.c0 += rhs.c0;
        self.c += rhs.c;
    }
}

impl Sub for Hermitian2 {
    type Output = Hermitian2;
    fn sub(self, rhs: Hermitian2) -> Hermitian2 {
        Hermitian2::from_parts(self.c0 - rhs.c0, self.c - rhs.c)
    }
}

impl Mul<f64> for Hermitian2 {
    type Output = Hermitian2;
    fn mul(self, rhs: f64) -> Hermitian2 {
        Hermitian2::from_parts(self.c0 * rhs, self.c * rhs)
    }
}

/// A binary qubit measurement with effects `½((1 ± bias)·1 ± bloch·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochObservable {
    pub bias: f64,
    pub bloch: Vec3,
}

impl BlochObservable {
    pub fn new(bias: f64, bloch: Vec3) -> Self {
        BlochObservable { bias, bloch }
    }

    pub fn unbiased(bloch: Vec3) -> Self {
        BlochObservable { bias: 0.0, bloch }
    }

    /// Both effects positive within `tol_pos`.
    pub fn check(&self, tol_pos: f64) -> std::result::Result<(), String> {
        if !self.bias.is_finite() || self.bloch.iter().any(|v| !v.is_finite()) {
            return Err("non-finite coordinates".into());
        }
        if self.bias.abs() > 1.0 + tol_pos {
            return Err(format!("|bias| = {} exceeds 1", self.bias.abs()));
        }
        let slack = 1.0 - self.bias.abs() - self.bloch.norm();
        if slack < -tol_pos {
            return Err(format!(
                "‖bloch‖ = {} exceeds 1 - |bias| = {}",
                self.bloch.norm(),
                1.0 - self.bias.abs()
            ));
        }
        Ok(())
    }

    /// Effect for outcome `+1` or `-1`.
    pub fn effect(&self, outcome: i8) -> Hermitian2 {
        let s = if outcome >= 0 { 1.0 } else { -1.0 };
        Hermitian2::from_parts(0.5 * (1.0 + s * self.bias), self.bloch * (0.5 * s))
    }

    pub fn is_unbiased(&self, tol: f64) -> bool {
        self.bias.abs() <= tol
    }

    /// `max(|Δbias|, ‖Δbloch‖)`.
    pub fn distance(&self, other: &BlochObservable) -> f64 {
        (self.bias - other.bias)
            .abs()
            .max((self.bloch - other.bloch).norm())
    }
}

/// An ordered list of `N >= 1` binary qubit measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    observables: Vec<BlochObservable>,
}

impl Assemblage {
    pub fn new(observables: Vec<BlochObservable>, tol_pos: f64) -> Result<Self> {
        if observables.is_empty() {
            return Err(JmError::EmptyAssemblage);
        }
        check_count(observables.len(), 1)?;
        for (k, o) in observables.iter().enumerate() {
            o.check(tol_pos)
                .map_err(|reason| JmError::InvalidObservable {
                    index: k + 1,
                    reason,
                })?;
        }
        Ok(Assemblage { observables })
    }

    /// Unbiased assemblage from Bloch vectors, validated with the default
    /// positivity tolerance.
    pub fn from_bloch_vectors(vectors: &[Vec3]) -> Result<Self> {
        Assemblage::new(
            vectors
                .iter()
                .map(|&v| BlochObservable::unbiased(v))
                .collect(),
            Tolerances::default().pos,
        )
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[BlochObservable] {
        &self.observables
    }

    pub fn bloch_vectors(&self) -> Vec<Vec3> {
        self.observables.iter().map(|o| o.bloch).collect()
    }

    pub fn is_unbiased(&self, tol: f64) -> bool {
        self.observables.iter().all(|o| o.is_unbiased(tol))
    }

    pub fn max_abs_bias(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.bias.abs())
            .fold(0.0, f64::max)
    }

    /// Applies `f` to every observable and revalidates.
    pub fn map(&self, f: impl Fn(&BlochObservable) -> BlochObservable) -> Result<Self> {
        Assemblage::new(
            self.observables.iter().map(f).collect(),
            Tolerances::default().pos,
        )
    }
}

/// Fourier coefficients `(z(S), z(S))` of a function on `{-1,1}^N` with
/// values in Pauli coordinates, stored densely by subset mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    n: usize,
    scalars: Vec<f64>,
    vectors: Vec<Vec3>,
}

impl FourierCoefficients {
    /// All coefficients zero except the forced `z({}) = 1`.
    pub fn new(n: usize) -> Result<Self> {
        check_count(n, 1)?;
        let mut scalars = vec![0.0; 1 << n];
        scalars[0] = 1.0;
        Ok(FourierCoefficients {
            n,
            scalars,
            vectors: vec![Vec3::zeros(); 1 << n],
        })
    }

    /// Degree-one coefficients taken from the assemblage, all others zero.
    pub fn from_assemblage(assemblage: &Assemblage) -> Self {
        let mut out = FourierCoefficients::new(assemblage.len()).expect("validated size");
        for (k, o) in assemblage.observables().iter().enumerate() {
            out.scalars[1 << k] = o.bias;
            out.vectors[1 << k] = o.bloch;
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, s: SubsetLabel) -> Result<usize> {
        if !s.is_within(self.n) {
            return Err(JmError::IndexOutOfRange {
                index: *s.indices().last().unwrap_or(&0),
                n: self.n,
            });
        }
        Ok(s.mask() as usize)
    }

    fn writable_slot(&self, s: SubsetLabel) -> Result<usize> {
        if s.is_empty() {
            return Err(JmError::InvalidArgument(
                "the empty-set coefficients are fixed by normalization".into(),
            ));
        }
        self.slot(s)
    }

    pub fn scalar(&self, s: SubsetLabel) -> Result<f64> {
        Ok(self.scalars[self.slot(s)?])
    }

    pub fn vector(&self, s: SubsetLabel) -> Result<Vec3> {
        Ok(self.vectors[self.slot(s)?])
    }

    pub fn set_scalar(&mut self, s: SubsetLabel, value: f64) -> Result<()> {
        let k = self.writable_slot(s)?;
        self.scalars[k] = value;
        Ok(())
    }

    pub fn set_vector(&mut self, s: SubsetLabel, value: Vec3) -> Result<()> {
        let k = self.writable_slot(s)?;
        self.vectors[k] = value;
        Ok(())
    }

    /// Single effect `J(mu)` evaluated term by term.
    pub fn effect(&self, mu: &OutcomeVector) -> Result<Hermitian2> {
        if mu.len() != self.n {
            return Err(JmError::LengthMismatch {
                expected: self.n,
                found: mu.len(),
            });
        }
        let mut acc = Hermitian2::zero();
        for (mask, (&s, v)) in self.scalars.iter().zip(&self.vectors).enumerate() {
            let sign = crate::hypercube::parity_sign(mask as u32 & mu.minus_mask()) as f64;
            acc.c0 += sign * s;
            acc.c += v * sign;
        }
        Ok(acc * (1.0 / (1u64 << self.n) as f64))
    }

    /// All `2^N` effects at once through a fast transform.
    pub fn to_povm(&self) -> JointPovm {
        let mut data: Vec<Hermitian2> = self
            .scalars
            .iter()
            .zip(&self.vectors)
            .map(|(&s, &v)| Hermitian2::from_parts(s, v))
            .collect();
        fwht(&mut data);
        let scale = 1.0 / (1u64 << self.n) as f64;
        JointPovm {
            n: self.n,
            effects: data.into_iter().map(|e| e * scale).collect(),
        }
    }

    /// Marginal `i` read off from the degree-one coefficients.
    pub fn marginal(&self, i: usize) -> Result<BlochObservable> {
        if i == 0 || i > self.n {
            return Err(JmError::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let k = 1 << (i - 1);
        Ok(BlochObservable::new(self.scalars[k], self.vectors[k]))
    }
}

/// Effect `J(mu)` of the POVM with the given Fourier coefficients.
pub fn effect_from_fourier(coeffs: &FourierCoefficients, mu: &OutcomeVector) -> Result<Hermitian2> {
    coeffs.effect(mu)
}

/// `2^N` effects indexed by outcome vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovm {
    n: usize,
    effects: Vec<Hermitian2>,
}

impl JointPovm {
    /// `effects[m]` is the effect of the outcome whose `-1` entries are the
    /// set bits of `m`.
    pub fn from_effects(n: usize, effects: Vec<Hermitian2>) -> Result<Self> {
        check_count(n, 1)?;
        if effects.len() != 1 << n {
            return Err(JmError::LengthMismatch {
                expected: 1 << n,
                found: effects.len(),
            });
        }
        Ok(JointPovm { n, effects })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn effects(&self) -> &[Hermitian2] {
        &self.effects
    }

    pub fn effect(&self, mu: &OutcomeVector) -> Result<Hermitian2> {
        if mu.len() != self.n {
            return Err(JmError::LengthMismatch {
                expected: self.n,
                found: mu.len(),
            });
        }
        Ok(self.effects[mu.minus_mask() as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeVector, &Hermitian2)> {
        let n = self.n;
        self.effects
            .iter()
            .enumerate()
            .map(move |(m, e)| (OutcomeVector::from_minus_mask_unchecked(n, m as u32), e))
    }

    pub fn total(&self) -> Hermitian2 {
        self.effects
            .iter()
            .fold(Hermitian2::zero(), |acc, &e| acc + e)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.effects
            .iter()
            .map(Hermitian2::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, factor: f64) -> JointPovm {
        JointPovm {
            n: self.n,
            effects: self.effects.iter().map(|&e| e * factor).collect(),
        }
    }

    /// Marginal `i` by summing the effects with `mu_i = +1`.
    pub fn marginal(&self, i: usize) -> Result<BlochObservable> {
        if i == 0 || i > self.n {
            return Err(JmError::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let bit = 1usize << (i - 1);
        let plus = self
            .effects
            .iter()
            .enumerate()
            .filter(|(m, _)| m & bit == 0)
            .fold(Hermitian2::zero(), |acc, (_, &e)| acc + e);
        Ok(BlochObservable::new(2.0 * plus.c0 - 1.0, plus.c * 2.0))
    }

    /// Fourier coefficients of the effects (inverse of
    /// [`FourierCoefficients::to_povm`]).
    pub fn fourier(&self) -> FourierCoefficients {
        let mut data = self.effects.clone();
        fwht(&mut data);
        FourierCoefficients {
            n: self.n,
            scalars: data.iter().map(|e| e.c0).collect(),
            vectors: data.iter().map(|e| e.c).collect(),
        }
    }
}

/// Marginal of a joint POVM by direct summation.
pub fn marginal(povm: &JointPovm, i: usize) -> Result<BlochObservable> {
    povm.marginal(i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmVerification {
    pub min_eigenvalue: f64,
    /// Operator norm of `sum_mu J(mu) - 1`.
    pub identity_residual: f64,
    /// Per-marginal mismatch against the reference assemblage, if any.
    pub marginal_residuals: Vec<f64>,
    pub max_marginal_residual: f64,
    pub valid: bool,
}

/// Checks positivity, normalization and (optionally) marginals.
pub fn verify_povm(
    povm: &JointPovm,
    reference: Option<&Assemblage>,
    tol: Tolerances,
) -> PovmVerification {
    let min_eigenvalue = povm.min_eigenvalue();
    let identity_residual = (povm.total() - Hermitian2::identity()).op_norm();
    let marginal_residuals: Vec<f64> = match reference {
        Some(a) if a.len() == povm.n() => a
            .observables()
            .iter()
            .enumerate()
            .map(|(k, o)| {
                povm.marginal(k + 1)
                    .map(|m| m.distance(o))
                    .unwrap_or(f64::INFINITY)
            })
            .collect(),
        Some(_) => vec![f64::INFINITY],
        None => Vec::new(),
    };
    let max_marginal_residual = marginal_residuals.iter().copied().fold(0.0, f64::max);
    let valid = min_eigenvalue >= -tol.pos
        && identity_residual <= tol.eq
        && max_marginal_residual <= tol.eq;
    PovmVerification {
        min_eigenvalue,
        identity_residual,
        marginal_residuals,
        max_marginal_residual,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::configuration_set;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn example_pair_povm() -> (FourierCoefficients, JointPovm) {
        let mut f = FourierCoefficients::new(2).unwrap();
        f.set_vector(
            SubsetLabel::singleton(1),
            Vec3::new(FRAC_1_SQRT_2, 0.0, 0.0),
        )
        .unwrap();
        f.set_vector(
            SubsetLabel::singleton(2),
            Vec3::new(0.0, 0.0, FRAC_1_SQRT_2),
        )
        .unwrap();
        let p = f.to_povm();
        (f, p)
    }

    #[test]
    fn uniform_povm() {
        for n in 1..=4 {
            let p = FourierCoefficients::new(n).unwrap().to_povm();
            let expected = Hermitian2::identity() * (1.0 / (1 << n) as f64);
            assert!(p.effects().iter().all(|e| *e == expected));
            for i in 1..=n {
                let m = p.marginal(i).unwrap();
                assert!(m.bias.abs() < 1e-15 && m.bloch.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn example_pair_effects_and_marginals() {
        let (f, p) = example_pair_povm();
        for m in 0..4u32 {
            let mu = OutcomeVector::from_minus_mask(2, m).unwrap();
            let e = mu.entries();
            let expected = Hermitian2::new(
                0.25,
                0.25 * FRAC_1_SQRT_2 * e[0] as f64,
                0.0,
                0.25 * FRAC_1_SQRT_2 * e[1] as f64,
            );
            let direct = f.effect(&mu).unwrap();
            let fast = p.effect(&mu).unwrap();
            assert!((direct - expected).op_norm() < 1e-15);
            assert!((fast - expected).op_norm() < 1e-15);
        }
        let m1 = p.marginal(1).unwrap();
        assert!(m1.bias.abs() < 1e-15);
        assert!((m1.bloch - Vec3::new(FRAC_1_SQRT_2, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_sharp_measurement() {
        let mut f = FourierCoefficients::new(1).unwrap();
        f.set_vector(SubsetLabel::singleton(1), Vec3::z()).unwrap();
        let p = f.to_povm();
        assert_eq!(p.effects()[0], Hermitian2::new(0.5, 0.0, 0.0, 0.5));
        assert_eq!(p.effects()[1], Hermitian2::new(0.5, 0.0, 0.0, -0.5));
    }

    #[test]
    fn product_povm_marginal() {
        let z = BlochObservable::unbiased(Vec3::z());
        let effects = (0..4u32)
            .map(|m| {
                let e1 = z.effect(if m & 1 == 0 { 1 } else { -1 });
                let e2 = z.effect(if m & 2 == 0 { 1 } else { -1 });
                // commuting diagonal effects: product is again diagonal
                let d1 = (e1.c0 + e1.c.z, e1.c0 - e1.c.z);
                let d2 = (e2.c0 + e2.c.z, e2.c0 - e2.c.z);
                let (a, b) = (d1.0 * d2.0, d1.1 * d2.1);
                Hermitian2::new(0.5 * (a + b), 0.0, 0.0, 0.5 * (a - b))
            })
            .collect();
        let p = JointPovm::from_effects(2, effects).unwrap();
        let m2 = p.marginal(2).unwrap();
        assert!(m2.bias.abs() < 1e-15);
        assert!((m2.bloch - Vec3::z()).norm() < 1e-15);
    }

    #[test]
    fn verify_examples() {
        let (_, p) = example_pair_povm();
        let reference = Assemblage::from_bloch_vectors(&[
            Vec3::new(FRAC_1_SQRT_2, 0.0, 0.0),
            Vec3::new(0.0, 0.0, FRAC_1_SQRT_2),
        ])
        .unwrap();
        let v = verify_povm(&p, Some(&reference), Tolerances::default());
        assert!(v.valid);
        assert!(v.min_eigenvalue.abs() < 1e-15);
        assert!(v.identity_residual < 1e-15);
        assert!(v.max_marginal_residual < 1e-15);

        let scaled = verify_povm(&p.scaled(0.9), None, Tolerances::default());
        assert!(!scaled.valid);
        assert!((scaled.identity_residual - 0.1).abs() < 1e-12);

        let mut effects = p.effects().to_vec();
        effects[0] = Hermitian2::new(0.1, 0.3, 0.0, 0.0);
        effects[3] += Hermitian2::new(0.15, -0.3, 0.0, 0.0);
        let bad = verify_povm(
            &JointPovm::from_effects(2, effects).unwrap(),
            None,
            Tolerances::default(),
        );
        assert!(bad.min_eigenvalue < -0.19);
        assert!(!bad.valid);
    }

    #[test]
    fn fourier_rejects_mismatch_and_empty_slot() {
        let mut f = FourierCoefficients::new(2).unwrap();
        let mu3 = OutcomeVector::new(&[1, 1, 1]).unwrap();
        assert!(f.effect(&mu3).is_err());
        assert!(f.set_scalar(SubsetLabel::EMPTY, 2.0).is_err());
        assert!(f.set_vector(SubsetLabel::singleton(3), Vec3::x()).is_err());
        assert!(f.marginal(3).is_err());
    }

    #[test]
    fn identity_sum_for_arbitrary_coefficients() {
        let mut f = FourierCoefficients::new(3).unwrap();
        for mask in 1..8u32 {
            let s = SubsetLabel::from_mask(mask);
            f.set_scalar(s, mask as f64 * 0.3 - 1.0).unwrap();
            f.set_vector(s, Vec3::new(mask as f64, -2.0, 0.5)).unwrap();
        }
        let total = configuration_set(3)
            .unwrap()
            .iter()
            .flat_map(|mu| [*mu, mu.negated()])
            .map(|mu| f.effect(&mu).unwrap())
            .fold(Hermitian2::zero(), |a, e| a + e);
        assert!((total - Hermitian2::identity()).op_norm() < 1e-13);
    }

    #[test]
    fn conjugation_matches_matrix_product() {
        let m = Hermitian2::new(0.7, 0.1, -0.2, 0.3);
        let x = Hermitian2::new(0.4, -0.3, 0.25, 0.1);
        let mm = m.matrix_entries();
        let xm = x.matrix_entries();
        let mul = |a: [[(f64, f64); 2]; 2], b: [[(f64, f64); 2]; 2]| {
            let mut out = [[(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let (ar, ai) = a[i][k];
                        let (br, bi) = b[k][j];
                        out[i][j].0 += ar * br - ai * bi;
                        out[i][j].1 += ar * bi + ai * br;
                    }
                }
            }
            out
        };
        let expected = mul(mul(mm, xm), mm);
        let got = x.conjugate_by(&m).matrix_entries();
        for i in 0..2 {
            for j in 0..2 {
                assert!((expected[i][j].0 - got[i][j].0).abs() < 1e-14);
                assert!((expected[i][j].1 - got[i][j].1).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn observable_validation() {
        assert!(BlochObservable::new(0.5, Vec3::new(0.6, 0.0, 0.0))
            .check(1e-10)
            .is_err());
        assert!(BlochObservable::new(0.5, Vec3::new(0.5, 0.0, 0.0))
            .check(1e-10)
            .is_ok());
        assert!(Assemblage::new(vec![], 1e-10).is_err());
        assert!(matches!(
            Assemblage::from_bloch_vectors(&[Vec3::x(), Vec3::new(0.0, 1.1, 0.0)]),
            Err(JmError::InvalidObservable { index: 2, .. })
        ));
    }
}
