use std::collections::HashMap;

use crate::dyadic::{levels_up_to, LevelVector, TranslationVector};
use crate::error::{FaberError, Result};

use super::{check_point, tent};

/// Coefficients `{d_{j,k}}` for all levels `|j|_1 <= n`, one dense array per
/// level indexed by [`LevelVector::linear_index`].
#[derive(Clone, Debug, PartialEq)]
pub struct FaberSeries {
    dim: usize,
    budget: u32,
    levels: Vec<LevelVector>,
    coeffs: Vec<Vec<f64>>,
    index: HashMap<LevelVector, usize>,
}

impl FaberSeries {
    /// The all-zero series with budget `n`.
    pub fn zeros(dim: usize, budget: u32) -> Result<Self> {
        let levels = levels_up_to(budget, dim)?;
        let coeffs = levels
            .iter()
            .map(|j| vec![0.0; j.translation_count()])
            .collect();
        Ok(Self::from_parts(dim, budget, levels, coeffs))
    }

    /// Builds a series by evaluating `value(j, k)` for every stored index.
    pub fn from_fn<F>(dim: usize, budget: u32, mut value: F) -> Result<Self>
    where
        F: FnMut(&LevelVector, &TranslationVector) -> f64,
    {
        let mut series = Self::zeros(dim, budget)?;
        for (level, data) in series.levels.iter().zip(series.coeffs.iter_mut()) {
            for (i, slot) in data.iter_mut().enumerate() {
                let v = value(level, &level.translation_at(i));
                if !v.is_finite() {
                    return Err(FaberError::InvalidParameter(format!(
                        "non-finite coefficient {v} at level {level}"
                    )));
                }
                *slot = v;
            }
        }
        Ok(series)
    }

    pub(crate) fn from_parts(
        dim: usize,
        budget: u32,
        levels: Vec<LevelVector>,
        coeffs: Vec<Vec<f64>>,
    ) -> Self {
        let index = levels
            .iter()
            .enumerate()
            .map(|(i, j)| (j.clone(), i))
            .collect();
        Self {
            dim,
            budget,
            levels,
            coeffs,
            index,
        }
    }

    /// Evaluation-only copy holding the levels with a non-zero coefficient.
    pub(crate) fn without_zero_levels(&self) -> Self {
        let (levels, coeffs) = self
            .levels
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.iter().any(|&v| v != 0.0))
            .map(|(j, c)| (j.clone(), c.clone()))
            .unzip();
        Self::from_parts(self.dim, self.budget, levels, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn levels(&self) -> &[LevelVector] {
        &self.levels
    }

    /// Iterates `(level, coefficients)` in level order.
    pub fn iter(&self) -> impl Iterator<Item = (&LevelVector, &[f64])> {
        self.levels
            .iter()
            .zip(self.coeffs.iter().map(Vec::as_slice))
    }

    pub fn level_coeffs(&self, j: &LevelVector) -> Option<&[f64]> {
        self.index.get(j).map(|&i| self.coeffs[i].as_slice())
    }

    pub fn coefficient_count(&self) -> usize {
        self.coeffs.iter().map(Vec::len).sum()
    }

    pub fn get(&self, j: &LevelVector, k: &TranslationVector) -> Result<f64> {
        let data = self
            .level_coeffs(j)
            .ok_or_else(|| FaberError::MissingLevel(j.to_string()))?;
        Ok(data[j.linear_index(k)?])
    }

    pub fn set(&mut self, j: &LevelVector, k: &TranslationVector, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(FaberError::InvalidParameter(format!(
                "non-finite coefficient {value}"
            )));
        }
        let slot = *self
            .index
            .get(j)
            .ok_or_else(|| FaberError::MissingLevel(j.to_string()))?;
        let pos = j.linear_index(k)?;
        self.coeffs[slot][pos] = value;
        Ok(())
    }

    /// Entrywise `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &FaberSeries, beta: f64) -> Result<FaberSeries> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect())
            .collect();
        Ok(Self::from_parts(
            self.dim,
            self.budget,
            self.levels.clone(),
            coeffs,
        ))
    }

    pub fn scaled(&self, alpha: f64) -> FaberSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.iter().map(|x| alpha * x).collect())
            .collect();
        Self::from_parts(self.dim, self.budget, self.levels.clone(), coeffs)
    }

    /// Maximum absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &FaberSeries) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_compatible(&self, other: &FaberSeries) -> Result<()> {
        if self.dim != other.dim {
            return Err(FaberError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.budget != other.budget {
            return Err(FaberError::InvalidParameter(format!(
                "budget mismatch: {} vs {}",
                self.budget, other.budget
            )));
        }
        Ok(())
    }

    /// Pointwise value of the truncated series.
    ///
    /// Per level at most one tent per active axis is non-zero at `x`; the
    /// cell is chosen left-closed, and at a cell interface both neighbours
    /// vanish so the choice does not matter.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dim, x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut terms = vec![[(0u64, 0.0f64); 2]; d];
        let mut lens = vec![0usize; d];
        let mut idx = vec![0usize; d];
        let mut total = 0.0;
        'levels: for (level, data) in self.levels.iter().zip(&self.coeffs) {
            for (axis, &j) in level.entries().iter().enumerate() {
                let xi = x[axis];
                if j < 0 {
                    terms[axis] = [(0, 1.0 - xi), (1, xi)];
                    lens[axis] = 2;
                } else {
                    let cells = 1u64 << j;
                    let t = xi * cells as f64;
                    let k = (t.floor() as u64).min(cells - 1);
                    let w = tent(t - k as f64);
                    if w == 0.0 {
                        continue 'levels;
                    }
                    terms[axis][0] = (k, w);
                    lens[axis] = 1;
                }
            }
            // odometer over the (at most 2^d) contributing translations
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut pos = 0u64;
                let mut weight = 1.0;
                for (axis, c) in level.axis_counts().enumerate() {
                    let (k, w) = terms[axis][idx[axis]];
                    pos = pos * c + k;
                    weight *= w;
                }
                total += data[pos as usize] * weight;
                let mut axis = d;
                loop {
                    if axis == 0 {
                        continue 'levels;
                    }
                    axis -= 1;
                    idx[axis] += 1;
                    if idx[axis] < lens[axis] {
                        break;
                    }
                    idx[axis] = 0;
                }
            }
        }
        total
    }

    /// Exact integral of the truncated series over `[0, 1]^d`: every tent of
    /// level `j >= 0` has area `2^{-j-1}`, each boundary function area `1/2`.
    pub fn integrate(&self) -> f64 {
        self.iter()
            .map(|(level, data)| {
                let w: f64 = level
                    .entries()
                    .iter()
                    .map(|&j| (-(j.max(0) as f64) - 1.0).exp2())
                    .product();
                w * data.iter().sum::<f64>()
            })
            .sum()
    }
}
