//! Combinatorics of the Boolean cube `{-1, +1}^N`.
//!
//! Subsets of `[N] = {1, .., N}` are stored as bit masks (index `i` lives in
//! bit `i - 1`) and outcome vectors as the mask of their `-1` positions, so a
//! character `chi_S(mu)` is the parity of `popcount(S & minus(mu))`.
//!
//! The half cube `{mu : mu_1 = +1}` is used throughout the crate. Its
//! elements are addressed by a "half index" `k` in `0..2^(N-1)`, where bit `j`
//! of `k` says whether `mu_(j+2) = -1`. Odd subsets and even subsets of `[N]`
//! are each in bijection with half indices by dropping index 1, which turns
//! every sum over the half cube into a Walsh-Hadamard transform of length
//! `2^(N-1)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use itertools::Itertools;

use crate::error::{JmError, Result};

/// Hard upper bound on the number of measurements handled by any routine.
pub const MAX_MEASUREMENTS: usize = 20;

/// Default working limit on the number of measurements.
pub const DEFAULT_NMAX: usize = 16;

/// Largest `N` for which [`build_a`] materializes the dense matrix.
pub const DENSE_A_LIMIT: usize = 12;

pub(crate) fn check_count(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_MEASUREMENTS {
        return Err(JmError::MeasurementCount {
            n,
            min,
            max: MAX_MEASUREMENTS,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn parity_sign(bits: u32) -> i8 {
    if bits.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A subset `S` of `[N]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SubsetLabel {
    mask: u32,
}

impl SubsetLabel {
    pub const EMPTY: SubsetLabel = SubsetLabel { mask: 0 };

    pub fn from_mask(mask: u32) -> Self {
        SubsetLabel { mask }
    }

    /// Builds a label from 1-based indices. Repeated indices are rejected.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i == 0 || i > 32 {
                return Err(JmError::IndexOutOfRange { index: i, n: 32 });
            }
            let bit = 1u32 << (i - 1);
            if mask & bit != 0 {
                return Err(JmError::InvalidArgument(format!(
                    "index {i} repeated in subset"
                )));
            }
            mask |= bit;
        }
        Ok(SubsetLabel { mask })
    }

    pub fn singleton(i: usize) -> Self {
        assert!((1..=32).contains(&i), "index {i} out of range");
        SubsetLabel { mask: 1 << (i - 1) }
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=32).contains(&i) && self.mask & (1 << (i - 1)) != 0
    }

    /// Sorted 1-based indices.
    pub fn indices(self) -> Vec<usize> {
        (0..32)
            .filter(|b| self.mask & (1 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    /// True when every index is at most `n`.
    pub fn is_within(self, n: usize) -> bool {
        n >= 32 || self.mask >> n == 0
    }

    pub fn intersection(self, other: SubsetLabel) -> SubsetLabel {
        SubsetLabel {
            mask: self.mask & other.mask,
        }
    }

    pub fn symmetric_difference(self, other: SubsetLabel) -> SubsetLabel {
        SubsetLabel {
            mask: self.mask ^ other.mask,
        }
    }
}

/// Ascending cardinality, then lexicographic on the sorted index tuples.
impl Ord for SubsetLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.mask ^ other.mask;
            if diff == 0 {
                Ordering::Equal
            } else if self.mask & (diff & diff.wrapping_neg()) != 0 {
                // the first differing index belongs to self
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for SubsetLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.indices().iter().join(","))
    }
}

impl fmt::Debug for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A point `mu` of `{-1, +1}^N`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    n: usize,
    minus: u32,
}

impl OutcomeVector {
    pub fn new(entries: &[i8]) -> Result<Self> {
        check_count(entries.len(), 1)?;
        let mut minus = 0u32;
        for (b, &e) in entries.iter().enumerate() {
            match e {
                1 => {}
                -1 => minus |= 1 << b,
                other => return Err(JmError::InvalidOutcome(other as i64)),
            }
        }
        Ok(OutcomeVector {
            n: entries.len(),
            minus,
        })
    }

    /// The all-`+1` vector `mu_+`.
    pub fn all_plus(n: usize) -> Result<Self> {
        check_count(n, 1)?;
        Ok(OutcomeVector { n, minus: 0 })
    }

    /// Outcome vector whose `-1` entries sit at the set bits of `mask`.
    pub fn from_minus_mask(n: usize, mask: u32) -> Result<Self> {
        check_count(n, 1)?;
        if mask >> n != 0 {
            return Err(JmError::InvalidArgument(format!(
                "minus mask {mask:#b} has bits beyond N = {n}"
            )));
        }
        Ok(OutcomeVector { n, minus: mask })
    }

    pub(crate) fn from_minus_mask_unchecked(n: usize, mask: u32) -> Self {
        OutcomeVector { n, minus: mask }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn minus_mask(&self) -> u32 {
        self.minus
    }

    /// Entry `mu_i` for a 1-based index.
    pub fn entry(&self, i: usize) -> Result<i8> {
        if i == 0 || i > self.n {
            return Err(JmError::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        Ok(if self.minus & (1 << (i - 1)) != 0 {
            -1
        } else {
            1
        })
    }

    pub fn entries(&self) -> Vec<i8> {
        (0..self.n)
            .map(|b| if self.minus & (1 << b) != 0 { -1 } else { 1 })
            .collect()
    }

    /// The reflection `-mu`.
    pub fn negated(&self) -> Self {
        let full = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        OutcomeVector {
            n: self.n,
            minus: !self.minus & full,
        }
    }

    /// Whether `mu` lies in the configuration set (`mu_1 = +1`).
    pub fn in_configuration_set(&self) -> bool {
        self.minus & 1 == 0
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs = self
            .entries()
            .iter()
            .map(|&e| if e > 0 { "+" } else { "-" })
            .join(",");
        write!(f, "({signs})")
    }
}

impl fmt::Debug for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Character `chi_S(mu) = prod_{i in S} mu_i`, with `chi_{}(mu) = 1`.
pub fn chi(s: SubsetLabel, mu: &OutcomeVector) -> Result<i8> {
    if !s.is_within(mu.len()) {
        let index = *s.indices().last().unwrap_or(&0);
        return Err(JmError::IndexOutOfRange { index, n: mu.len() });
    }
    Ok(parity_sign(s.mask & mu.minus))
}

/// `d(N) = 2^(N-1) - 1`, the size of the even-scalar linear system.
pub fn system_size(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (1usize << (n - 1)) - 1
    }
}

fn ordered_subsets(pool: &[usize], keep: impl Fn(usize) -> bool) -> Vec<SubsetLabel> {
    let mut out = Vec::new();
    for k in 1..=pool.len() {
        if !keep(k) {
            continue;
        }
        for combo in pool.iter().copied().combinations(k) {
            // `pool` is sorted, so combinations arrive in lexicographic order
            out.push(SubsetLabel::from_indices(&combo).expect("pool indices are valid"));
        }
    }
    out
}

/// The ordered label lists for the even-scalar system: `x_labels` are the
/// nonempty even subsets of `[N]`, `b_labels` the nonempty subsets of
/// `{2, .., N}` (the `-1` positions of `mu` in the configuration set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelOrders {
    pub n: usize,
    pub x_labels: Vec<SubsetLabel>,
    pub b_labels: Vec<SubsetLabel>,
}

impl LabelOrders {
    pub fn new(n: usize) -> Result<Self> {
        check_count(n, 1)?;
        let all: Vec<usize> = (1..=n).collect();
        let x_labels = ordered_subsets(&all, |k| k % 2 == 0);
        let b_labels = ordered_subsets(&all[1..], |_| true);
        Ok(LabelOrders {
            n,
            x_labels,
            b_labels,
        })
    }

    pub fn size(&self) -> usize {
        self.x_labels.len()
    }
}

/// Odd subsets of `[N]` with at least three elements, in label order.
pub fn higher_odd_labels(n: usize) -> Result<Vec<SubsetLabel>> {
    check_count(n, 1)?;
    let all: Vec<usize> = (1..=n).collect();
    Ok(ordered_subsets(&all, |k| k % 2 == 1 && k >= 3))
}

/// The configuration set `D^N = {mu : mu_1 = +1}`: `mu_+` first, then the
/// remaining vectors in `b_labels` order.
pub fn configuration_set(n: usize) -> Result<Vec<OutcomeVector>> {
    let orders = LabelOrders::new(n)?;
    let mut out = Vec::with_capacity(1 << (n - 1));
    out.push(OutcomeVector::from_minus_mask_unchecked(n, 0));
    out.extend(
        orders
            .b_labels
            .iter()
            .map(|b| OutcomeVector::from_minus_mask_unchecked(n, b.mask())),
    );
    Ok(out)
}

/// `sum_{mu in {-1,1}^N} chi_S(mu)` by direct summation.
pub fn sum_chi_over_cube(s: SubsetLabel, n: usize) -> Result<i64> {
    check_count(n, 1)?;
    if !s.is_within(n) {
        return Err(JmError::IndexOutOfRange {
            index: *s.indices().last().unwrap_or(&0),
            n,
        });
    }
    let mut total = 0i64;
    for m in 0..(1u32 << n) {
        total += chi(s, &OutcomeVector::from_minus_mask_unchecked(n, m))? as i64;
    }
    Ok(total)
}

/// Entry of the system matrix for row label `b` and column label `x`:
/// `(-1)^{|b ∩ x|}`.
#[inline]
pub fn a_entry(b: SubsetLabel, x: SubsetLabel) -> i8 {
    parity_sign(b.mask & x.mask)
}

/// Dense `d(N) x d(N)` system matrix; rows follow `b_labels`, columns
/// `x_labels`. Only available for `N <= DENSE_A_LIMIT`.
pub fn build_a(n: usize) -> Result<Vec<Vec<i8>>> {
    if !(2..=DENSE_A_LIMIT).contains(&n) {
        return Err(JmError::MeasurementCount {
            n,
            min: 2,
            max: DENSE_A_LIMIT,
        });
    }
    let orders = LabelOrders::new(n)?;
    Ok(orders
        .b_labels
        .iter()
        .map(|&b| orders.x_labels.iter().map(|&x| a_entry(b, x)).collect())
        .collect())
}

/// Solves `A x = b` with the closed-form inverse
/// `x_i = 2^-(N-1) * sum_k (A_ki - 1) b_k`, without forming `A`.
///
/// `b` is indexed by `b_labels` and the result by `x_labels`. Runs in
/// `O(N 2^N)` through a Walsh-Hadamard transform over `{2, .., N}`.
pub fn apply_a_inverse(n: usize, b: &[f64]) -> Result<Vec<f64>> {
    check_count(n, 1)?;
    let d = system_size(n);
    if b.len() != d {
        return Err(JmError::LengthMismatch {
            expected: d,
            found: b.len(),
        });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let orders = LabelOrders::new(n)?;
    let mut f = vec![0.0; d + 1];
    for (label, &value) in orders.b_labels.iter().zip(b) {
        f[(label.mask() >> 1) as usize] = value;
    }
    let total: f64 = b.iter().sum();
    fwht(&mut f);
    let scale = 1.0 / (1u64 << (n - 1)) as f64;
    // b-labels never contain index 1, so |B ∩ X| = |B ∩ (X \ {1})|
    Ok(orders
        .x_labels
        .iter()
        .map(|x| (f[(x.mask() >> 1) as usize] - total) * scale)
        .collect())
}

/// In-place unnormalized Walsh-Hadamard transform:
/// `out[k] = sum_t (-1)^{popcount(t & k)} data[t]`. The length must be a
/// power of two.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = data.len();
    assert!(
        len.is_power_of_two(),
        "transform length must be a power of two"
    );
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Odd subset of `[N]` addressed by half index `t` (index 1 added when
/// `t` has even popcount).
#[cfg(test)]
pub(crate) fn odd_subset_of_half_index(t: usize) -> SubsetLabel {
    let t = t as u32;
    let one = if t.count_ones().is_multiple_of(2) {
        1
    } else {
        0
    };
    SubsetLabel::from_mask((t << 1) | one)
}

/// Half index of a subset: the mask with index 1 removed.
#[inline]
pub(crate) fn half_index(s: SubsetLabel) -> usize {
    (s.mask() >> 1) as usize
}
