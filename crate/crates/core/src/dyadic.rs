//! Exact dyadic index arithmetic.
//!
//! Hierarchical levels are `d`-tuples with entries in `{-1, 0, 1, ...}`. Level
//! `-1` carries the two boundary functions of an axis, level `j >= 0` carries
//! the `2^j` tents of width `2^-j`. Node coordinates are kept as exact dyadic
//! rationals so that sample caches and node sets deduplicate bit-exactly.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FaberError, Result};

/// Largest admissible level entry; `2^62` still fits the `u64` index space
/// with room for the half-step stencil points at level 63.
pub const MAX_LEVEL: i32 = 62;

/// A hierarchical level `j` in `{-1, 0, 1, ...}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct LevelVector(Vec<i32>);

impl LevelVector {
    pub fn new(entries: Vec<i32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FaberError::ZeroDimension);
        }
        if let Some(&bad) = entries.iter().find(|&&j| !(-1..=MAX_LEVEL).contains(&j)) {
            return Err(FaberError::LevelOutOfRange(bad as i64));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|j|_1 = sum_i max(j_i, 0)`.
    pub fn reduced_order(&self) -> u32 {
        self.0.iter().map(|&j| j.max(0) as u32).sum()
    }

    /// Number of axes with `j_i != -1`, i.e. `|e(j)|`.
    pub fn active_axes(&self) -> usize {
        self.0.iter().filter(|&&j| j >= 0).count()
    }

    /// Whether every entry is `>= 0`.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&j| j >= 0)
    }

    /// Per-axis translation counts `c_i`.
    pub fn axis_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&j| axis_count(j))
    }

    /// `|D_j|`, the number of translations at this level.
    pub fn translation_count(&self) -> usize {
        self.axis_counts().product::<u64>() as usize
    }

    /// Row-major position of `k` in the dense coefficient array of this level
    /// (last axis fastest).
    pub fn linear_index(&self, k: &TranslationVector) -> Result<usize> {
        self.check_translation(k)?;
        let mut index = 0u64;
        for (c, &ki) in self.axis_counts().zip(k.entries()) {
            index = index * c + ki;
        }
        Ok(index as usize)
    }

    /// Inverse of [`LevelVector::linear_index`].
    pub fn translation_at(&self, mut index: usize) -> TranslationVector {
        let counts: Vec<u64> = self.axis_counts().collect();
        let mut k = vec![0u64; counts.len()];
        for (slot, &c) in k.iter_mut().zip(&counts).rev() {
            *slot = index as u64 % c;
            index /= c as usize;
        }
        TranslationVector(k)
    }

    pub fn check_translation(&self, k: &TranslationVector) -> Result<()> {
        let ok =
            k.dim() == self.dim() && self.axis_counts().zip(k.entries()).all(|(c, &ki)| ki < c);
        if ok {
            Ok(())
        } else {
            Err(FaberError::TranslationOutOfRange {
                level: self.0.clone(),
                k: k.0.clone(),
            })
        }
    }
}

impl TryFrom<Vec<i32>> for LevelVector {
    type Error = FaberError;

    fn try_from(entries: Vec<i32>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<LevelVector> for Vec<i32> {
    fn from(level: LevelVector) -> Self {
        level.0
    }
}

impl fmt::Display for LevelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

/// Number of translations on one axis: `2^j` for `j >= 0`, two for `j = -1`.
pub fn axis_count(j: i32) -> u64 {
    if j < 0 {
        2
    } else {
        1u64 << j
    }
}

/// A translation `k in D_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TranslationVector(Vec<u64>);

impl TranslationVector {
    pub fn new(entries: Vec<u64>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// One exact coordinate `numerator * 2^-level`, always kept canonical: the
/// numerator is odd unless the coordinate is `0` or `1` at level `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicCoord {
    numerator: u64,
    level: u32,
}

impl DyadicCoord {
    pub const ZERO: DyadicCoord = DyadicCoord {
        numerator: 0,
        level: 0,
    };
    pub const ONE: DyadicCoord = DyadicCoord {
        numerator: 1,
        level: 0,
    };

    pub fn new(numerator: u64, level: u32) -> Result<Self> {
        if level > 63 || numerator > (1u64 << level) {
            return Err(FaberError::InvalidDyadic { numerator, level });
        }
        Ok(Self::canonical(numerator, level))
    }

    fn canonical(mut numerator: u64, mut level: u32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let shift = numerator.trailing_zeros().min(level);
        numerator >>= shift;
        level -= shift;
        Self { numerator, level }
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 * (-(self.level as f64)).exp2()
    }
}

impl Ord for DyadicCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = (self.numerator as u128) << other.level;
        let rhs = (other.numerator as u128) << self.level;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for DyadicCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A point of `[0, 1]^d` with exact dyadic coordinates. Ordering is
/// lexicographic by geometric coordinate value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint(Vec<DyadicCoord>);

impl DyadicPoint {
    pub fn new(coords: Vec<DyadicCoord>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[DyadicCoord] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64()).collect()
    }
}

/// All levels with `|j|_1 <= n` in lexicographic order.
pub fn levels_up_to(n: u32, d: usize) -> Result<Vec<LevelVector>> {
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    if n > MAX_LEVEL as u32 {
        return Err(FaberError::BudgetTooLarge(n));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    push_levels(n, d, &mut current, &mut out);
    Ok(out)
}

fn push_levels(remaining: u32, d: usize, current: &mut Vec<i32>, out: &mut Vec<LevelVector>) {
    if current.len() == d {
        out.push(LevelVector(current.clone()));
        return;
    }
    for j in -1..=remaining as i32 {
        current.push(j);
        push_levels(remaining - j.max(0) as u32, d, current, out);
        current.pop();
    }
}

/// Iterator over `D_j` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Translations {
    counts: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for Translations {
    type Item = TranslationVector;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut advanced = current.clone();
        for axis in (0..advanced.len()).rev() {
            advanced[axis] += 1;
            if advanced[axis] < self.counts[axis] {
                self.next = Some(advanced);
                break;
            }
            advanced[axis] = 0;
        }
        Some(TranslationVector(current))
    }
}

pub fn translations(j: &LevelVector) -> Translations {
    Translations {
        counts: j.axis_counts().collect(),
        next: Some(vec![0; j.dim()]),
    }
}

/// The node `x_{j,k}` with coordinates `k_i 2^{-(j_i)_+}`.
pub fn node(j: &LevelVector, k: &TranslationVector) -> Result<DyadicPoint> {
    j.check_translation(k)?;
    let coords = j
        .entries()
        .iter()
        .zip(k.entries())
        .map(|(&ji, &ki)| DyadicCoord::canonical(ki, ji.max(0) as u32))
        .collect();
    Ok(DyadicPoint(coords))
}

/// Per-axis abscissae of the coefficient stencil, as `(numerator, level)`
/// pairs: `{x, x + h, x + 2h}` with `h = 2^{-(j_i + 1)}` on active axes and
/// the node coordinate itself on `j_i = -1` axes.
pub(crate) fn stencil_axis(j: i32, k: u64) -> Vec<DyadicCoord> {
    if j < 0 {
        vec![DyadicCoord::canonical(k, 0)]
    } else {
        let level = j as u32 + 1;
        (0..3)
            .map(|s| DyadicCoord::canonical(2 * k + s, level))
            .collect()
    }
}

/// The `3^{|e(j)|}` evaluation points of the mixed second difference at
/// `x_{j,k}`, in tensor order with the last axis fastest.
pub fn coeff_sample_points(j: &LevelVector, k: &TranslationVector) -> Result<Vec<DyadicPoint>> {
    j.check_translation(k)?;
    let axes: Vec<Vec<DyadicCoord>> = j
        .entries()
        .iter()
        .zip(k.entries())
        .map(|(&ji, &ki)| stencil_axis(ji, ki))
        .collect();
    Ok(tensor_points(&axes))
}

pub(crate) fn tensor_points(axes: &[Vec<DyadicCoord>]) -> Vec<DyadicPoint> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(DyadicPoint(
            idx.iter().zip(axes).map(|(&i, a)| a[i]).collect(),
        ));
        for axis in (0..axes.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    out
}

/// Abscissae of the full sampling grid of one level: the union of all
/// coefficient stencils of that level on one axis.
pub(crate) fn level_grid_axis(j: i32) -> Vec<DyadicCoord> {
    if j < 0 {
        vec![DyadicCoord::ZERO, DyadicCoord::ONE]
    } else {
        let level = j as u32 + 1;
        (0..=(1u64 << level))
            .map(|num| DyadicCoord::canonical(num, level))
            .collect()
    }
}

/// Deduplicated sparse-grid node set of the truncated interpolant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSet {
    dim: usize,
    budget: u32,
    points: Vec<DyadicPoint>,
}

impl NodeSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    /// `m(n, d)`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points sorted lexicographically by coordinate value.
    pub fn points(&self) -> &[DyadicPoint] {
        &self.points
    }

    pub fn contains(&self, p: &DyadicPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }
}

/// Union of all coefficient stencils with `|j|_1 <= n`.
pub fn node_set(n: u32, d: usize) -> Result<NodeSet> {
    let levels = levels_up_to(n, d)?;
    let mut seen: HashSet<DyadicPoint> = HashSet::new();
    for level in &levels {
        let axes: Vec<Vec<DyadicCoord>> = level
            .entries()
            .iter()
            .map(|&j| level_grid_axis(j))
            .collect();
        seen.extend(tensor_points(&axes));
    }
    let mut points: Vec<DyadicPoint> = seen.into_iter().collect();
    points.sort_unstable();
    Ok(NodeSet {
        dim: d,
        budget: n,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(e: &[i32]) -> LevelVector {
        LevelVector::new(e.to_vec()).unwrap()
    }

    fn tv(e: &[u64]) -> TranslationVector {
        TranslationVector::new(e.to_vec())
    }

    fn dc(num: u64, level: u32) -> DyadicCoord {
        DyadicCoord::new(num, level).unwrap()
    }

    #[test]
    fn levels_small_cases() {
        let l = levels_up_to(0, 1).unwrap();
        assert_eq!(l, vec![lv(&[-1]), lv(&[0])]);
        assert_eq!(levels_up_to(1, 2).unwrap().len(), 8);
        let l = levels_up_to(0, 3).unwrap();
        assert_eq!(l.len(), 8);
        assert!(l
            .iter()
            .all(|j| j.entries().iter().all(|&e| e == -1 || e == 0)));
        assert!(matches!(levels_up_to(2, 0), Err(FaberError::ZeroDimension)));
    }

    #[test]
    fn levels_are_sorted_and_unique() {
        let l = levels_up_to(4, 3).unwrap();
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn level_bounds() {
        assert!(LevelVector::new(vec![-2]).is_err());
        assert!(LevelVector::new(vec![63]).is_err());
        assert!(LevelVector::new(vec![]).is_err());
        assert!(levels_up_to(63, 1).is_err());
        assert_eq!(lv(&[3, -1, 2]).reduced_order(), 5);
        assert_eq!(lv(&[3, -1, 2]).active_axes(), 2);
    }

    #[test]
    fn translation_counts() {
        let t: Vec<_> = translations(&lv(&[3])).collect();
        assert_eq!(t.len(), 8);
        assert_eq!(t[5], tv(&[5]));
        assert_eq!(translations(&lv(&[-1])).count(), 2);
        let t: Vec<_> = translations(&lv(&[1, -1])).collect();
        assert_eq!(t, vec![tv(&[0, 0]), tv(&[0, 1]), tv(&[1, 0]), tv(&[1, 1])]);
    }

    #[test]
    fn linear_index_matches_iteration_order() {
        let j = lv(&[2, -1, 1]);
        for (i, k) in translations(&j).enumerate() {
            assert_eq!(j.linear_index(&k).unwrap(), i);
            assert_eq!(j.translation_at(i), k);
        }
        assert!(j.linear_index(&tv(&[4, 0, 0])).is_err());
    }

    #[test]
    fn nodes() {
        assert_eq!(
            node(&lv(&[-1]), &tv(&[1])).unwrap().coords(),
            &[DyadicCoord::ONE]
        );
        assert_eq!(node(&lv(&[3]), &tv(&[5])).unwrap().coords(), &[dc(5, 3)]);
        assert_eq!(
            node(&lv(&[2, -1]), &tv(&[3, 0])).unwrap().to_f64(),
            vec![0.75, 0.0]
        );
        assert!(node(&lv(&[2]), &tv(&[4])).is_err());
        assert!(node(&lv(&[-1]), &tv(&[2])).is_err());
    }

    #[test]
    fn canonical_equality() {
        // 1/2 at level 1 and 8/16 at level 4
        let a = node(&lv(&[1]), &tv(&[1])).unwrap();
        let b = node(&lv(&[4]), &tv(&[8])).unwrap();
        assert_eq!(a, b);
        assert_eq!(dc(0, 5), DyadicCoord::ZERO);
        assert_eq!(dc(32, 5), DyadicCoord::ONE);
        assert_eq!(dc(12, 4), dc(3, 2));
        assert!(DyadicCoord::new(17, 4).is_err());
        assert!(dc(3, 3) < dc(1, 1));
    }

    #[test]
    fn stencils() {
        let p = coeff_sample_points(&lv(&[0]), &tv(&[0])).unwrap();
        let v: Vec<f64> = p.iter().map(|x| x.to_f64()[0]).collect();
        assert_eq!(v, vec![0.0, 0.5, 1.0]);

        let p = coeff_sample_points(&lv(&[-1, 0]), &tv(&[1, 0])).unwrap();
        let v: Vec<Vec<f64>> = p.iter().map(|x| x.to_f64()).collect();
        assert_eq!(v, vec![vec![1.0, 0.0], vec![1.0, 0.5], vec![1.0, 1.0]]);

        let p = coeff_sample_points(&lv(&[1, 1]), &tv(&[0, 1])).unwrap();
        assert_eq!(p.len(), 9);
        for x in p.iter().map(|x| x.to_f64()) {
            assert!([0.0, 0.25, 0.5].contains(&x[0]));
            assert!([0.5, 0.75, 1.0].contains(&x[1]));
        }
    }

    #[test]
    fn node_set_counts() {
        assert_eq!(node_set(3, 1).unwrap().len(), 17);
        assert_eq!(node_set(0, 1).unwrap().len(), 3);
        for n in 0..=12 {
            assert_eq!(node_set(n, 1).unwrap().len(), (1usize << (n + 1)) + 1);
        }
        let m = node_set(10, 2).unwrap().len() as f64;
        let ratio = m / (1024.0 * 10.0);
        assert!((0.5..=8.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn node_set_equals_stencil_union() {
        for d in 1..=3 {
            for n in 0..=3 {
                let mut union = HashSet::new();
                for j in levels_up_to(n, d).unwrap() {
                    for k in translations(&j) {
                        union.extend(coeff_sample_points(&j, &k).unwrap());
                    }
                }
                let set = node_set(n, d).unwrap();
                assert_eq!(set.len(), union.len());
                assert!(union.iter().all(|p| set.contains(p)));
            }
        }
    }
}
