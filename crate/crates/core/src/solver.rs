//! Minimizer for `min_x sum_mu ‖A_mu x + b_mu‖` over the configuration set,
//! where `x` stacks the odd-order (`|S| >= 3`) Fourier vectors.
//!
//! Blocks and variable slots both live in the half-cube layout of
//! [`crate::hypercube`]: block `k` is the outcome with `mu_1 = +1` and `-1`
//! entries at the set bits of `k << 1`, and the odd subset `S` sits at half
//! index `S >> 1`. With every odd subset present the map from coefficients to
//! block values is a Walsh-Hadamard transform, so residuals, gradients and
//! Gram matrices all cost `O(N 2^N)`.
//!
//! The method is iteratively reweighted least squares on the smoothed
//! objective `sum sqrt(‖r_mu‖² + eps²)` with a decreasing `eps`. If a short
//! warm-up does not close the gap, a log-barrier path on the dual (only `3N`
//! unknowns) takes over and supplies both certificates and primal points.
//! Every iterate is certified by a dual point, so the returned pair
//! `(primal, dual)` always brackets the true minimum.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Dyn, Matrix3, OMatrix, U3};

use crate::error::{JmError, Result};
use crate::hypercube::{
    check_count, fwht, half_index, higher_odd_labels, OutcomeVector, SubsetLabel,
};
use crate::povm::{Assemblage, Vec3};

/// Above this many variable slots the normal equations are solved by
/// conjugate gradients instead of a dense Cholesky factorization.
const DENSE_SLOT_LIMIT: usize = 512;

/// Relative thresholds below which a block is pinned to zero when polishing.
const POLISH_TAUS: [f64; 5] = [1e-9, 1e-7, 1e-5, 1e-3, 1e-2];

/// Cap on the ball/affine alternations in the active-set dual.
const MAX_BALL_PROJECTIONS: usize = 500;

/// Ridge used when a factorization or the dual projection is rank deficient.
const RIDGE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SumOfNormsProblem {
    n: usize,
    /// Degree-one coefficients in half-index layout; zero elsewhere.
    fixed: Vec<Vec3>,
    offsets: Vec<Vec3>,
    slots: Vec<usize>,
    labels: Vec<SubsetLabel>,
}

impl SumOfNormsProblem {
    /// Problem for Bloch vectors `z_1, .., z_N`: `b_mu = sum_k z_k mu_k`.
    pub fn from_bloch_vectors(vectors: &[Vec3]) -> Result<Self> {
        let n = vectors.len();
        check_count(n, 1)?;
        let m = 1usize << (n - 1);
        let mut fixed = vec![Vec3::zeros(); m];
        fixed[0] = vectors[0];
        for (i, z) in vectors.iter().enumerate().skip(1) {
            fixed[1 << (i - 1)] = *z;
        }
        let mut offsets = fixed.clone();
        fwht(&mut offsets);
        let labels = higher_odd_labels(n)?;
        let slots = labels.iter().map(|&s| half_index(s)).collect();
        Ok(SumOfNormsProblem {
            n,
            fixed,
            offsets,
            slots,
            labels,
        })
    }

    pub fn from_assemblage(assemblage: &Assemblage) -> Result<Self> {
        SumOfNormsProblem::from_bloch_vectors(&assemblage.bloch_vectors())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `M = 2^(N-1)`.
    pub fn num_blocks(&self) -> usize {
        self.offsets.len()
    }

    /// Number of free 3-vectors, `2^(N-1) - N`.
    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Labels of the free slots, in variable order.
    pub fn slot_labels(&self) -> &[SubsetLabel] {
        &self.labels
    }

    /// Offsets `b_mu` indexed by block.
    pub fn offsets(&self) -> &[Vec3] {
        &self.offsets
    }

    /// Variable vector as a map from slot label to 3-vector.
    pub fn to_map(&self, x: &[Vec3]) -> BTreeMap<SubsetLabel, Vec3> {
        self.check_len(x);
        self.labels.iter().copied().zip(x.iter().copied()).collect()
    }

    /// Variable vector from a label map; missing labels are zero.
    pub fn from_map(&self, higher: &BTreeMap<SubsetLabel, Vec3>) -> Result<Vec<Vec3>> {
        let mut x = vec![Vec3::zeros(); self.labels.len()];
        for (label, v) in higher {
            let j = self.labels.binary_search(label).map_err(|_| {
                JmError::InvalidArgument(format!(
                    "{label} is not an odd subset of size at least 3 within [1, {}]",
                    self.n
                ))
            })?;
            x[j] = *v;
        }
        Ok(x)
    }

    pub fn block_outcome(&self, k: usize) -> OutcomeVector {
        OutcomeVector::from_minus_mask_unchecked(self.n, (k as u32) << 1)
    }

    /// Sign `chi_S(mu)` of slot `j` in block `k`.
    pub fn sign(&self, k: usize, j: usize) -> i8 {
        crate::hypercube::parity_sign((k & self.slots[j]) as u32)
    }

    /// Largest offset norm; the natural scale of the problem.
    pub fn scale(&self) -> f64 {
        self.offsets.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    fn check_len(&self, x: &[Vec3]) {
        assert_eq!(
            x.len(),
            self.slots.len(),
            "variable vector has {} slots, problem has {}",
            x.len(),
            self.slots.len()
        );
    }

    /// Block values `A_mu x + b_mu`.
    pub fn residuals(&self, x: &[Vec3]) -> Vec<Vec3> {
        self.check_len(x);
        let mut c = self.fixed.clone();
        for (&t, v) in self.slots.iter().zip(x) {
            c[t] = *v;
        }
        fwht(&mut c);
        c
    }

    pub fn objective(&self, x: &[Vec3]) -> f64 {
        self.residuals(x).iter().map(|r| r.norm()).sum()
    }

    pub fn smoothed_objective(&self, x: &[Vec3], eps: f64) -> f64 {
        self.residuals(x)
            .iter()
            .map(|r| (r.norm_squared() + eps * eps).sqrt())
            .sum()
    }

    /// Gradient of [`Self::smoothed_objective`].
    pub fn smoothed_gradient(&self, x: &[Vec3], eps: f64) -> Vec<Vec3> {
        let mut g: Vec<Vec3> = self
            .residuals(x)
            .iter()
            .map(|r| r / (r.norm_squared() + eps * eps).sqrt())
            .collect();
        fwht(&mut g);
        self.slots.iter().map(|&t| g[t]).collect()
    }

    /// Applies the transpose map `y -> (sum_mu chi_S(mu) y_mu)_S` to all
    /// odd subsets at once (half-index layout).
    fn adjoint_all(&self, y: &[Vec3]) -> Vec<Vec3> {
        let mut c = y.to_vec();
        fwht(&mut c);
        c
    }

    /// Value of a dual candidate: project onto `sum_mu A_mu^T y_mu = 0`,
    /// scale into the unit balls, return `sum_mu <b_mu, y_mu>`.
    fn certify(&self, mut y: Vec<Vec3>) -> f64 {
        if !self.slots.is_empty() {
            // The Gram matrix of the slot characters over the half cube is
            // exactly M·I, so the least-squares projection removes the
            // slot coefficients. The ridge keeps the divisor positive.
            let coeffs = self.adjoint_all(&y);
            let mut correction = vec![Vec3::zeros(); y.len()];
            for &t in &self.slots {
                correction[t] = coeffs[t];
            }
            fwht(&mut correction);
            let denom = (y.len() as f64) * (1.0 + RIDGE);
            for (yk, ck) in y.iter_mut().zip(&correction) {
                *yk -= ck / denom;
            }
        }
        let largest = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let shrink = largest.max(1.0);
        self.offsets
            .iter()
            .zip(&y)
            .map(|(b, v)| b.dot(v))
            .sum::<f64>()
            / shrink
    }
}

/// Lower bound on the minimum from the dual candidate
/// `y_mu = r_mu / max(‖r_mu‖, epsilon)` at `x`. Valid for every `x`.
///
/// The candidate is made feasible by least squares twice over: once by
/// projecting the whole vector, once by re-solving only the duals of blocks
/// with `‖r_mu‖ <= epsilon`. The better of the two is returned.
pub fn dual_bound(problem: &SumOfNormsProblem, x: &[Vec3], epsilon: f64) -> f64 {
    let residuals = problem.residuals(x);
    let pinned = pinned_dual(problem, &residuals, epsilon);
    let y = residuals
        .into_iter()
        .map(|r| {
            let d = r.norm().max(epsilon);
            if d > 0.0 {
                r / d
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    problem.certify(y).max(pinned)
}

fn smoothed_dual(problem: &SumOfNormsProblem, residuals: &[Vec3], eps: f64) -> f64 {
    let y = residuals
        .iter()
        .map(|r| {
            let d = (r.norm_squared() + eps * eps).sqrt();
            if d > 0.0 {
                r / d
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    problem.certify(y)
}

/// Iterations between active-set polishing attempts.
const POLISH_EVERY: usize = 25;

/// Largest slot count for which threshold-guessed polishing is attempted.
const POLISH_SLOT_LIMIT: usize = 64;

/// Polishing on the barrier path is skipped when more free slots than this
/// remain after pinning.
const POLISH_FREE_LIMIT: usize = 48;

/// Newton refinement on a guessed set of vanishing blocks.
///
/// Blocks with `‖r_mu‖ <= tau·scale` are pinned to zero (an affine
/// constraint on `x`); on the remaining affine set the objective is smooth
/// and damped Newton converges quadratically. Returns `None` when there is
/// nothing to refine or the linear algebra is unavailable.
fn polish_primal(problem: &SumOfNormsProblem, x: &[Vec3], tau: f64) -> Option<Vec<Vec3>> {
    let scale = problem.scale();
    let res = problem.residuals(x);
    let zero_set: Vec<usize> = (0..res.len())
        .filter(|&k| res[k].norm() <= tau * scale)
        .collect();
    polish_on(problem, x, &zero_set)
}

fn polish_on(problem: &SumOfNormsProblem, x: &[Vec3], zero_set: &[usize]) -> Option<Vec<Vec3>> {
    let m = problem.num_slots();
    if m == 0 || m > DENSE_SLOT_LIMIT {
        return None;
    }
    let res = problem.residuals(x);

    let to_mat = |v: &[Vec3]| {
        let mut out = OMatrix::<f64, Dyn, U3>::zeros(v.len());
        for (i, r) in v.iter().enumerate() {
            out.set_row(i, &r.transpose());
        }
        out
    };
    let from_mat = |mat: &OMatrix<f64, Dyn, U3>| -> Vec<Vec3> {
        (0..mat.nrows())
            .map(|i| Vec3::new(mat[(i, 0)], mat[(i, 1)], mat[(i, 2)]))
            .collect()
    };

    // affine set {x : r_mu(x) = 0 for mu in the zero set} = x_p + span(basis)
    let mut xp = to_mat(x);
    let basis = if zero_set.is_empty() {
        DMatrix::identity(m, m)
    } else {
        let cons = DMatrix::from_fn(zero_set.len(), m, |z, j| {
            problem.sign(zero_set[z], j) as f64
        });
        let target = to_mat(&zero_set.iter().map(|&k| res[k]).collect::<Vec<_>>());
        let svd = cons.clone().svd(true, true);
        let shift = svd.solve(&target, 1e-10).ok()?;
        xp -= shift;
        let v_t = svd.v_t.as_ref()?;
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&sv| sv > 1e-10 * smax.max(1.0))
            .count();
        // right singular vectors beyond the rank span the null space
        let mut full = DMatrix::<f64>::zeros(m, m);
        full.view_mut((0, 0), (v_t.nrows(), m)).copy_from(v_t);
        if v_t.nrows() < m {
            // complete the row space basis with the orthogonal complement
            let qr = full.transpose().qr();
            full = qr.q().transpose();
        }
        let q = m - rank;
        if q == 0 {
            return Some(from_mat(&xp));
        }
        full.rows(rank, q).transpose()
    };
    let q = basis.ncols();
    let x0 = from_mat(&xp);
    let active: Vec<usize> = (0..res.len()).filter(|k| !zero_set.contains(k)).collect();
    // a_k = basis^T s_k for every block
    let coeff: Vec<nalgebra::DVector<f64>> = (0..res.len())
        .map(|k| {
            let s = nalgebra::DVector::from_fn(m, |j, _| problem.sign(k, j) as f64);
            basis.transpose() * s
        })
        .collect();
    let point = |u: &DMatrix<f64>| -> Vec<Vec3> {
        let moved = &basis * u;
        x0.iter()
            .enumerate()
            .map(|(j, v)| v + Vec3::new(moved[(j, 0)], moved[(j, 1)], moved[(j, 2)]))
            .collect()
    };
    let mut u = DMatrix::<f64>::zeros(q, 3);
    let mut current = point(&u);
    let mut value = problem.objective(&current);
    for _ in 0..50 {
        let r = problem.residuals(&current);
        let mut grad = nalgebra::DVector::<f64>::zeros(3 * q);
        let mut hess = DMatrix::<f64>::zeros(3 * q, 3 * q);
        for &k in &active {
            let norm = r[k].norm();
            if norm <= 1e-300 {
                continue;
            }
            let unit = r[k] / norm;
            let curv = (nalgebra::Matrix3::identity() - unit * unit.transpose()) / norm;
            let a = &coeff[k];
            for i in 0..q {
                for c in 0..3 {
                    grad[3 * i + c] += a[i] * unit[c];
                }
                for l in 0..q {
                    let w = a[i] * a[l];
                    if w == 0.0 {
                        continue;
                    }
                    for c in 0..3 {
                        for d in 0..3 {
                            hess[(3 * i + c, 3 * l + d)] += w * curv[(c, d)];
                        }
                    }
                }
            }
        }
        if grad.norm() <= 1e-15 * (active.len() as f64).max(1.0) {
            break;
        }
        let damping = 1e-12 * hess.diagonal().amax().max(1.0);
        for i in 0..3 * q {
            hess[(i, i)] += damping;
        }
        let Some(step) = hess.cholesky().map(|c| c.solve(&grad)) else {
            break;
        };
        let step = DMatrix::from_fn(q, 3, |i, c| step[3 * i + c]);
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-8 {
            let trial_u = &u - &step * t;
            let trial = point(&trial_u);
            let trial_value = problem.objective(&trial);
            if trial_value < value {
                u = trial_u;
                current = trial;
                value = trial_value;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some(current)
}

/// Dual candidate built from a guessed set of vanishing blocks.
///
/// Blocks with `‖r_mu‖ > cutoff` get `y_mu = r_mu / ‖r_mu‖`; the duals of
/// the remaining blocks are then chosen by minimum-norm least squares so
/// that `sum_mu A_mu^T y_mu = 0`. When the guessed set is the true one this
/// closes the gap to rounding error, which plain reweighting only
/// approaches linearly.
fn pinned_dual(problem: &SumOfNormsProblem, residuals: &[Vec3], cutoff: f64) -> f64 {
    let zero_set: Vec<usize> = (0..residuals.len())
        .filter(|&k| residuals[k].norm() <= cutoff)
        .collect();
    pinned_on(problem, residuals, &zero_set)
}

fn pinned_on(problem: &SumOfNormsProblem, residuals: &[Vec3], zero_set: &[usize]) -> f64 {
    let m = problem.num_slots();
    if m == 0 || m > DENSE_SLOT_LIMIT || zero_set.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut y: Vec<Vec3> = residuals
        .iter()
        .map(|r| {
            let d = r.norm();
            if d > 0.0 {
                r / d
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    for &k in zero_set {
        y[k] = Vec3::zeros();
    }
    let coeffs = problem.adjoint_all(&y);
    let lhs = DMatrix::from_fn(m, zero_set.len(), |j, z| {
        problem.sign(zero_set[z], j) as f64
    });
    let mut rhs = OMatrix::<f64, Dyn, U3>::zeros(m);
    for (j, &t) in problem.slots.iter().enumerate() {
        rhs.set_row(j, &(-coeffs[t]).transpose());
    }
    let Ok(pinv) = lhs.clone().pseudo_inverse(1e-12) else {
        return f64::NEG_INFINITY;
    };
    let mut sol = &pinv * &rhs;
    // the minimum-norm solution may put more than unit norm on some block;
    // alternate with the product of unit balls to find a solution that
    // does not
    for _ in 0..MAX_BALL_PROJECTIONS {
        let worst = sol.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        if worst <= 1.0 + 1e-12 {
            break;
        }
        for mut row in sol.row_iter_mut() {
            let n = row.norm();
            if n > 1.0 {
                row /= n;
            }
        }
        let miss = &lhs * &sol - &rhs;
        sol -= &pinv * miss;
    }
    for (z, &k) in zero_set.iter().enumerate() {
        y[k] = Vec3::new(sol[(z, 0)], sol[(z, 1)], sol[(z, 2)]);
    }
    problem.certify(y)
}

fn polished_dual(problem: &SumOfNormsProblem, residuals: &[Vec3]) -> f64 {
    let scale = problem.scale();
    [1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2]
        .iter()
        .map(|tau| pinned_dual(problem, residuals, tau * scale))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Factor by which the barrier weight grows between centerings.
const BARRIER_GROWTH: f64 = 8.0;

/// Newton steps allowed per centering.
const MAX_CENTERING: usize = 60;

/// IRLS iterations before the barrier phase starts.
const BARRIER_AFTER: usize = 20;

/// Log-barrier path following on the dual problem
/// `max M sum_i <z_i, l_i>` subject to `‖sum_i mu_i l_i‖ <= 1` for every
/// block, which has only `3N` unknowns whatever the number of blocks.
///
/// After each centering `visit` receives the block duals `y_mu` and the
/// barrier weight; returning `true` stops the path. Returns the number of
/// Newton steps taken.
fn barrier_path(
    problem: &SumOfNormsProblem,
    s0: f64,
    s_max: f64,
    budget: usize,
    mut visit: impl FnMut(&[Vec3], f64) -> bool,
) -> usize {
    let pos: Vec<usize> = (0..problem.n)
        .map(|i| if i == 0 { 0 } else { 1 << (i - 1) })
        .collect();
    let n = pos.len();
    let blocks = problem.num_blocks();
    let mf = blocks as f64;
    let z: Vec<Vec3> = pos.iter().map(|&t| problem.fixed[t]).collect();
    let spread = |lam: &[Vec3]| {
        let mut c = vec![Vec3::zeros(); blocks];
        for (&t, l) in pos.iter().zip(lam) {
            c[t] = *l;
        }
        fwht(&mut c);
        c
    };
    let linear = |lam: &[Vec3]| z.iter().zip(lam).map(|(a, b)| a.dot(b)).sum::<f64>() * mf;
    let potential = |lam: &[Vec3], s: f64| -> Option<f64> {
        let mut v = -s * linear(lam);
        for yk in spread(lam) {
            let slack = 1.0 - yk.norm_squared();
            if slack <= 0.0 {
                return None;
            }
            v -= slack.ln();
        }
        Some(v)
    };

    let mut lam = vec![Vec3::zeros(); n];
    let mut s = s0;
    let mut steps = 0;
    loop {
        for _ in 0..MAX_CENTERING {
            if steps >= budget {
                return steps;
            }
            let y = spread(&lam);
            let mut g = Vec::with_capacity(blocks);
            let mut h = Vec::with_capacity(blocks);
            for yk in &y {
                let slack = 1.0 - yk.norm_squared();
                g.push(yk * (2.0 / slack));
                h.push(
                    Matrix3::identity() * (2.0 / slack)
                        + yk * yk.transpose() * (4.0 / (slack * slack)),
                );
            }
            fwht(&mut g);
            fwht(&mut h);
            let grad = DVector::from_fn(3 * n, |r, _| {
                g[pos[r / 3]][r % 3] - s * mf * z[r / 3][r % 3]
            });
            let hess = DMatrix::from_fn(3 * n, 3 * n, |r, c| {
                h[pos[r / 3] ^ pos[c / 3]][(r % 3, c % 3)]
            });
            let Some(chol) = hess.cholesky() else {
                break;
            };
            let dir = -chol.solve(&grad);
            let decrement = -grad.dot(&dir);
            if decrement <= 1e-12 {
                break;
            }
            let Some(here) = potential(&lam, s) else {
                break;
            };
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let trial: Vec<Vec3> = lam
                    .iter()
                    .enumerate()
                    .map(|(i, l)| l + Vec3::new(dir[3 * i], dir[3 * i + 1], dir[3 * i + 2]) * t)
                    .collect();
                if let Some(v) = potential(&trial, s) {
                    if v <= here - 0.25 * t * decrement {
                        lam = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            steps += 1;
            if !moved {
                break;
            }
        }
        if visit(&spread(&lam), s) || s >= s_max {
            return steps;
        }
        s *= BARRIER_GROWTH;
    }
}

/// Primal point on the barrier path: `r_mu = (2/s) y_mu / (1 - ‖y_mu‖²)`,
/// mapped back to slot coefficients.
fn central_primal(problem: &SumOfNormsProblem, y: &[Vec3], s: f64) -> Vec<Vec3> {
    let mut r: Vec<Vec3> = y
        .iter()
        .map(|yk| yk * (2.0 / (s * (1.0 - yk.norm_squared()))))
        .collect();
    fwht(&mut r);
    let mf = problem.num_blocks() as f64;
    problem.slots.iter().map(|&t| r[t] / mf).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol_rel: f64,
    pub max_iters: usize,
    pub eps0: f64,
    pub eps_decay: f64,
    pub eps_min: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_rel: 1e-9,
            max_iters: 10_000,
            eps0: 1e-2,
            eps_decay: 0.7,
            eps_min: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_star: Vec<Vec3>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveResult {
    pub fn gap(&self) -> f64 {
        self.primal - self.dual
    }
}

/// Weighted least-squares step: minimizes `sum_mu w_mu ‖A_mu x + b_mu‖²`.
struct NormalSystem<'a> {
    problem: &'a SumOfNormsProblem,
}

impl NormalSystem<'_> {
    fn solve(&self, weights: &[f64], warm: &[Vec3]) -> Vec<Vec3> {
        let p = self.problem;
        // right-hand side: -(A^T W b) restricted to the slots
        let mut wb: Vec<Vec3> = p.offsets.iter().zip(weights).map(|(b, w)| b * *w).collect();
        fwht(&mut wb);
        let rhs: Vec<Vec3> = p.slots.iter().map(|&t| -wb[t]).collect();
        if p.slots.len() <= DENSE_SLOT_LIMIT {
            self.solve_dense(weights, &rhs)
        } else {
            self.solve_cg(weights, &rhs, warm)
        }
    }

    fn solve_dense(&self, weights: &[f64], rhs: &[Vec3]) -> Vec<Vec3> {
        let p = self.problem;
        let m = p.slots.len();
        let mut what = weights.to_vec();
        fwht(&mut what);
        // G_ab = sum_mu w_mu chi_{S_a}(mu) chi_{S_b}(mu) = what[t_a ^ t_b]
        let gram = DMatrix::from_fn(m, m, |a, b| what[p.slots[a] ^ p.slots[b]]);
        let mut b = OMatrix::<f64, Dyn, U3>::zeros(m);
        for (i, r) in rhs.iter().enumerate() {
            b.set_row(i, &r.transpose());
        }
        let sol = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&b),
            None => {
                let ridge = RIDGE * what[0].abs().max(1.0);
                let shifted = gram + DMatrix::identity(m, m) * ridge;
                match shifted.clone().cholesky() {
                    Some(ch) => ch.solve(&b),
                    None => shifted
                        .lu()
                        .solve(&b)
                        .unwrap_or_else(|| OMatrix::<f64, Dyn, U3>::zeros(m)),
                }
            }
        };
        (0..m)
            .map(|i| Vec3::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)]))
            .collect()
    }

    fn apply(&self, weights: &[f64], x: &[Vec3]) -> Vec<Vec3> {
        let p = self.problem;
        let mut c = vec![Vec3::zeros(); p.num_blocks()];
        for (&t, v) in p.slots.iter().zip(x) {
            c[t] = *v;
        }
        fwht(&mut c);
        for (ck, w) in c.iter_mut().zip(weights) {
            *ck *= *w;
        }
        fwht(&mut c);
        p.slots.iter().map(|&t| c[t]).collect()
    }

    fn solve_cg(&self, weights: &[f64], rhs: &[Vec3], warm: &[Vec3]) -> Vec<Vec3> {
        let dot = |a: &[Vec3], b: &[Vec3]| a.iter().zip(b).map(|(u, v)| u.dot(v)).sum::<f64>();
        let mut x = warm.to_vec();
        let ax = self.apply(weights, &x);
        let mut r: Vec<Vec3> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        let target = 1e-24 * dot(rhs, rhs).max(f64::MIN_POSITIVE);
        for _ in 0..(4 * x.len()).min(2000) {
            if rr <= target {
                break;
            }
            let ad = self.apply(weights, &d);
            let alpha = rr / dot(&d, &ad);
            for i in 0..x.len() {
                x[i] += d[i] * alpha;
                r[i] -= ad[i] * alpha;
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..d.len() {
                d[i] = r[i] + d[i] * beta;
            }
        }
        x
    }
}

/// Minimizes the sum of norms from `x = 0`.
///
/// The result is deterministic for identical inputs. When the iteration
/// budget runs out `converged` is false, but `primal` and `dual` are still
/// valid upper and lower bounds.
pub fn minimize(problem: &SumOfNormsProblem, opts: &SolverOptions) -> SolveResult {
    let m = problem.num_slots();
    let zero = vec![Vec3::zeros(); m];
    let scale = problem.scale();
    if m == 0 || scale == 0.0 {
        let primal = problem.objective(&zero);
        let dual = dual_bound(problem, &zero, 0.0).min(primal);
        return SolveResult {
            x_star: zero,
            primal,
            dual,
            iterations: 0,
            converged: true,
        };
    }

    let system = NormalSystem { problem };
    let eps_floor = opts.eps_min * scale;
    let mut eps = opts.eps0 * scale;
    let mut x = zero;
    let mut best_x = x.clone();
    let mut best_primal = f64::INFINITY;
    let mut best_dual = f64::NEG_INFINITY;
    let mut last_progress = (f64::INFINITY, 0usize);
    let mut restarts = 0usize;
    const JITTER: [f64; 3] = [1.0, 0.37, 2.9];

    let mut prev_weights: Option<Vec<f64>> = None;
    let mut extra = 0usize;

    for it in 0..opts.max_iters {
        if it + extra >= opts.max_iters {
            break;
        }
        let res = problem.residuals(&x);
        let primal: f64 = res.iter().map(|r| r.norm()).sum();
        if primal < best_primal {
            best_primal = primal;
            best_x.clone_from(&x);
        }
        let mut dual = smoothed_dual(problem, &res, eps).max(dual_bound(problem, &x, eps));
        if let Some(w) = &prev_weights {
            // stationarity of the last weighted least-squares step makes
            // w_mu r_mu feasible up to the accuracy of the linear solve
            let y = res.iter().zip(w).map(|(r, w)| r * *w).collect();
            dual = dual.max(problem.certify(y));
        }
        if it >= POLISH_EVERY && it % POLISH_EVERY == 0 && m <= POLISH_SLOT_LIMIT {
            for tau in POLISH_TAUS {
                let Some(candidate) = polish_primal(problem, &best_x, tau) else {
                    continue;
                };
                let cres = problem.residuals(&candidate);
                let value: f64 = cres.iter().map(|r| r.norm()).sum();
                dual = dual.max(polished_dual(problem, &cres));
                if value < best_primal {
                    best_primal = value;
                    best_x = candidate;
                }
            }
            dual = dual.max(polished_dual(problem, &res));
        }
        best_dual = best_dual.max(dual);

        let done = |p: f64, d: f64| p - d <= opts.tol_rel * p.max(1.0);
        if it == BARRIER_AFTER && !done(best_primal, best_dual) {
            let s0 = problem.num_blocks() as f64 / best_primal;
            extra += barrier_path(
                problem,
                s0,
                s0 * 100.0 / opts.tol_rel,
                opts.max_iters - it,
                |y, s| {
                    best_dual = best_dual.max(problem.certify(y.to_vec()));
                    let xc = central_primal(problem, y, s);
                    let rc = problem.residuals(&xc);
                    let cut = (2.0 * scale / s).sqrt();
                    let zero_set: Vec<usize> =
                        (0..rc.len()).filter(|&k| rc[k].norm() <= cut).collect();
                    let mut candidates = vec![xc.clone()];
                    if m.saturating_sub(zero_set.len()) <= POLISH_FREE_LIMIT {
                        candidates.extend(polish_on(problem, &xc, &zero_set));
                    }
                    for cand in candidates {
                        let cres = problem.residuals(&cand);
                        let value: f64 = cres.iter().map(|r| r.norm()).sum();
                        best_dual = best_dual.max(pinned_on(problem, &cres, &zero_set));
                        if value < best_primal {
                            best_primal = value;
                            best_x = cand;
                        }
                    }
                    done(best_primal, best_dual)
                },
            );
        }
        if done(best_primal, best_dual) {
            return SolveResult {
                x_star: best_x,
                primal: best_primal,
                dual: best_dual.min(best_primal),
                iterations: (it + extra).min(opts.max_iters),
                converged: true,
            };
        }
        let gap = best_primal - best_dual;

        if gap < 0.5 * last_progress.0 {
            last_progress = (gap, it);
        } else if eps <= eps_floor && it - last_progress.1 > 100 {
            // plateau: reopen the smoothing around the current gap
            eps = (gap / problem.num_blocks() as f64).max(eps_floor) * JITTER[restarts % 3];
            restarts += 1;
            last_progress = (gap, it);
        }

        let weights: Vec<f64> = res
            .iter()
            .map(|r| 1.0 / (r.norm_squared() + eps * eps).sqrt())
            .collect();
        x = system.solve(&weights, &x);
        prev_weights = Some(weights);
        eps = (eps * opts.eps_decay).max(eps_floor);
    }

    SolveResult {
        x_star: best_x,
        primal: best_primal,
        dual: best_dual.min(best_primal),
        iterations: opts.max_iters,
        converged: false,
    }
}
