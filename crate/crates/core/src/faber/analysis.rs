use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use crate::dyadic::{
    level_grid_axis, levels_up_to, stencil_axis, tensor_points, DyadicPoint, LevelVector,
    TranslationVector,
};
use crate::error::{FaberError, Result};

use super::FaberSeries;

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A deterministic black-box function on `[0, 1]^d` that counts how often it
/// is evaluated. Clones share the evaluator and the counter.
#[derive(Clone)]
pub struct FunctionHandle {
    dim: usize,
    label: String,
    evaluator: Arc<Evaluator>,
    count: Arc<AtomicU64>,
    exact_integral: Option<f64>,
    resolution_level: Option<u32>,
}

impl FunctionHandle {
    pub fn new<F>(dim: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            evaluator: Arc::new(f),
            count: Arc::new(AtomicU64::new(0)),
            exact_integral: None,
            resolution_level: None,
        }
    }

    /// Attaches the analytic value of `∫_{[0,1]^d} f`.
    pub fn with_exact_integral(mut self, value: f64) -> Self {
        self.exact_integral = Some(value);
        self
    }

    /// Declares that `f` is smooth (multilinear, for Faber sums) on every
    /// dyadic cell of this level. Quadrature uses it to place mesh lines on
    /// all kinks.
    pub fn with_resolution_level(mut self, level: u32) -> Self {
        self.resolution_level = Some(level);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact_integral
    }

    pub fn resolution_level(&self) -> Option<u32> {
        self.resolution_level
    }

    pub fn eval_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    /// Evaluates `f(x)` and bumps the counter. No domain check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.evaluator)(x)
    }

    /// Evaluates at an exact dyadic point, rejecting non-finite values.
    pub fn eval_point(&self, p: &DyadicPoint) -> Result<f64> {
        if p.dim() != self.dim {
            return Err(FaberError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        let x = p.to_f64();
        let value = self.eval(&x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(FaberError::NonFinite { point: x, value })
        }
    }
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("eval_count", &self.eval_count())
            .finish()
    }
}

/// Function values keyed by exact node, shared across levels. Each node is
/// evaluated at most once even under concurrent access.
#[derive(Debug, Default)]
pub struct SampleCache {
    values: DashMap<DyadicPoint, f64>,
}

impl SampleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get_or_eval(&self, f: &FunctionHandle, p: &DyadicPoint) -> Result<f64> {
        if let Some(v) = self.values.get(p) {
            return Ok(*v);
        }
        let entry = self
            .values
            .entry(p.clone())
            .or_try_insert_with(|| f.eval_point(p))?;
        Ok(*entry)
    }
}

/// A single coefficient `d_{j,k}(f)` from its `3^{|e(j)|}` stencil values.
pub fn coeff(
    f: &FunctionHandle,
    j: &LevelVector,
    k: &TranslationVector,
    cache: &SampleCache,
) -> Result<f64> {
    j.check_translation(k)?;
    let axes: Vec<_> = j
        .entries()
        .iter()
        .zip(k.entries())
        .map(|(&ji, &ki)| stencil_axis(ji, ki))
        .collect();
    let points = tensor_points(&axes);
    let mut sum = 0.0;
    let mut idx = vec![0usize; axes.len()];
    for p in &points {
        let weight: f64 = idx
            .iter()
            .zip(j.entries())
            .map(|(&i, &ji)| if ji < 0 { 1.0 } else { [1.0, -2.0, 1.0][i] })
            .product();
        sum += weight * cache.get_or_eval(f, p)?;
        for axis in (0..axes.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(sum * (-0.5f64).powi(j.active_axes() as i32))
}

/// Computes the truncated Faber-Schauder series `I_n f` from samples.
///
/// Uses a fresh cache, so `f` is evaluated exactly once per node of
/// `node_set(n, d)`.
pub fn analyze(f: &FunctionHandle, n: u32) -> Result<FaberSeries> {
    analyze_with_cache(f, n, &SampleCache::new())
}

pub fn analyze_with_cache(f: &FunctionHandle, n: u32, cache: &SampleCache) -> Result<FaberSeries> {
    let levels = levels_up_to(n, f.dim())?;
    let coeffs = levels
        .par_iter()
        .map(|j| level_coefficients(f, j, cache))
        .collect::<Result<Vec<_>>>()?;
    Ok(FaberSeries::from_parts(f.dim(), n, levels, coeffs))
}

/// Samples the full level grid and applies the univariate surplus operator
/// `b - (a + c) / 2` along every active axis.
fn level_coefficients(
    f: &FunctionHandle,
    j: &LevelVector,
    cache: &SampleCache,
) -> Result<Vec<f64>> {
    let axes: Vec<_> = j.entries().iter().map(|&ji| level_grid_axis(ji)).collect();
    let mut shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut values = tensor_points(&axes)
        .iter()
        .map(|p| cache.get_or_eval(f, p))
        .collect::<Result<Vec<f64>>>()?;

    for (axis, &ji) in j.entries().iter().enumerate() {
        if ji < 0 {
            continue;
        }
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let len_in = shape[axis];
        let len_out = 1usize << ji;
        let mut next = vec![0.0; outer * len_out * inner];
        for o in 0..outer {
            for k in 0..len_out {
                for i in 0..inner {
                    let at = |s: usize| values[(o * len_in + s) * inner + i];
                    let (a, b, c) = (at(2 * k), at(2 * k + 1), at(2 * k + 2));
                    next[(o * len_out + k) * inner + i] = b - 0.5 * (a + c);
                }
            }
        }
        values = next;
        shape[axis] = len_out;
    }
    Ok(values)
}

/// Wraps a finite Faber sum as a function handle.
pub fn synthesize(series: FaberSeries) -> FunctionHandle {
    let integral = series.integrate();
    let resolution = series
        .iter()
        .filter(|(_, c)| c.iter().any(|&v| v != 0.0))
        .map(|(j, _)| j.entries().iter().map(|&e| e + 1).max().unwrap_or(0) as u32)
        .max()
        .unwrap_or(0);
    let dim = series.dim();
    let label = format!("faber-sum(d={dim}, n={})", series.budget());
    let series = Arc::new(series.without_zero_levels());
    FunctionHandle::new(dim, label, move |x| {
        if x.len() == dim && x.iter().all(|v| (0.0..=1.0).contains(v)) {
            series.evaluate_unchecked(x)
        } else {
            f64::NAN
        }
    })
    .with_exact_integral(integral)
    .with_resolution_level(resolution)
}
