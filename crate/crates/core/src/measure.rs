//! `L_q` norms on `[0, 1]^d`.
//!
//! Three methods are available: composite Gauss-Legendre quadrature on a
//! uniform dyadic mesh (`d <= 3`), stratified Monte Carlo, and a grid
//! maximum for `q = ∞`. All reductions run in a fixed pairwise order so the
//! results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::LevelVector;
use crate::error::{FaberError, Result};
use crate::faber::{FaberSeries, FunctionHandle};
use crate::seqnorm::Exponent;

pub const DEFAULT_GAUSS_ORDER: usize = 5;
pub const DEFAULT_MC_SAMPLES: usize = 200_000;
pub const DEFAULT_SEED: u64 = 7;
/// Mesh level used when neither the caller nor the function fixes one.
pub const FALLBACK_MESH_LEVEL: u32 = 8;
/// Upper bound on composite cells (including the Richardson refinement) and
/// on sup-grid points.
pub const MAX_CELLS: u128 = 1 << 24;

const BLOCK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Method {
    /// Tensor Gauss rule of `order` points per axis on every cell of the
    /// uniform mesh of `mesh_level`. `None` picks the level from the
    /// integrand's declared resolution.
    CompositeGauss {
        order: usize,
        mesh_level: Option<u32>,
    },
    /// One uniform draw per stratum of the level `⌊log2(N)/d⌋` mesh plus
    /// plain uniform draws for the remainder.
    StratifiedMc { samples: usize, seed: u64 },
    /// Maximum over the full grid of `mesh_level`; a lower bound of the sup.
    SupGrid { mesh_level: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureSpec {
    pub q: Exponent,
    pub method: Method,
}

impl MeasureSpec {
    pub fn composite(q: f64) -> Self {
        Self {
            q: Exponent::Finite(q),
            method: Method::CompositeGauss {
                order: DEFAULT_GAUSS_ORDER,
                mesh_level: None,
            },
        }
    }

    pub fn stratified(q: f64, seed: u64) -> Self {
        Self {
            q: Exponent::Finite(q),
            method: Method::StratifiedMc {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            },
        }
    }

    pub fn sup_grid(mesh_level: u32) -> Self {
        Self {
            q: Exponent::Infinity,
            method: Method::SupGrid { mesh_level },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.q, self.method) {
            (Exponent::Finite(q), _) if !(q >= 1.0 && q.is_finite()) => Err(
                FaberError::InvalidParameter(format!("q = {q} must be >= 1")),
            ),
            (Exponent::Infinity, Method::SupGrid { mesh_level }) if mesh_level >= 1 => Ok(()),
            (Exponent::Infinity, _) => Err(FaberError::InvalidParameter(
                "q = inf needs the sup_grid method with mesh level >= 1".into(),
            )),
            (Exponent::Finite(_), Method::SupGrid { .. }) => Err(FaberError::InvalidParameter(
                "sup_grid measures q = inf only".into(),
            )),
            (_, Method::CompositeGauss { order, mesh_level }) => {
                if order < 2 {
                    return Err(FaberError::InvalidParameter(format!(
                        "Gauss order {order} must be >= 2"
                    )));
                }
                if mesh_level == Some(0) {
                    return Err(FaberError::InvalidParameter(
                        "mesh level must be >= 1".into(),
                    ));
                }
                Ok(())
            }
            (_, Method::StratifiedMc { samples, .. }) if samples < 1000 => Err(
                FaberError::InvalidParameter(format!("{samples} samples, at least 1000 needed")),
            ),
            _ => Ok(()),
        }
    }
}

/// A measured value and a non-negative heuristic uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// `‖g‖_q` on the unit cube.
pub fn lq_norm(g: &FunctionHandle, spec: &MeasureSpec) -> Result<Estimate> {
    spec.validate()?;
    let d = g.dim();
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    match (spec.q, spec.method) {
        (Exponent::Finite(q), Method::CompositeGauss { order, mesh_level }) => {
            let level = mesh_level.unwrap_or_else(|| {
                g.resolution_level()
                    .map(|r| r + 1)
                    .unwrap_or(FALLBACK_MESH_LEVEL)
            });
            composite(g, q, order, level)
        }
        (Exponent::Finite(q), Method::StratifiedMc { samples, seed }) => {
            Ok(stratified(g, q, samples, seed))
        }
        (Exponent::Infinity, Method::SupGrid { mesh_level }) => sup_grid(g, mesh_level),
        _ => unreachable!("rejected by validate"),
    }
}

/// `‖f - I_n f‖_q` where `s` holds `I_n f`.
///
/// Without an explicit mesh level the composite rule uses one level finer
/// than `max(n + 1, resolution(f))`, i.e. `n + 2` for smooth `f`, so that
/// every kink of both `f` and the interpolant lies on a mesh line.
pub fn lq_error(f: &FunctionHandle, s: &FaberSeries, spec: &MeasureSpec) -> Result<Estimate> {
    if f.dim() != s.dim() {
        return Err(FaberError::DimensionMismatch {
            expected: s.dim(),
            got: f.dim(),
        });
    }
    let resolution = (s.budget() + 1).max(f.resolution_level().unwrap_or(0));
    let f_inner = f.clone();
    let series = std::sync::Arc::new(s.clone());
    let diff = FunctionHandle::new(f.dim(), format!("{} - I_n", f.label()), move |x| {
        f_inner.eval(x) - series.evaluate_unchecked(x)
    })
    .with_resolution_level(resolution);
    lq_norm(&diff, spec)
}

/// `‖sum_k c_k v_{j,k}‖_q` for a single level with all `j_i >= 0`, whose
/// tents have disjoint interiors.
pub fn block_lq_exact(j: &LevelVector, coeffs: &[f64], q: f64) -> Result<f64> {
    if !j.is_interior() {
        return Err(FaberError::InvalidParameter(format!(
            "level {j} has a -1 entry; its basis functions overlap"
        )));
    }
    if coeffs.len() != j.translation_count() {
        return Err(FaberError::InvalidParameter(format!(
            "level {j} needs {} coefficients, got {}",
            j.translation_count(),
            coeffs.len()
        )));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(FaberError::InvalidParameter(format!(
            "q = {q} must be >= 1"
        )));
    }
    let volume = (-(j.reduced_order() as f64)).exp2() / (q + 1.0).powi(j.dim() as i32);
    let sum: f64 = coeffs.iter().map(|c| c.abs().powf(q)).sum();
    Ok((sum * volume).powf(1.0 / q))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Strict halving pairwise summation; exact for `2^k` equal terms.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn composite(g: &FunctionHandle, q: f64, order: usize, level: u32) -> Result<Estimate> {
    let d = g.dim();
    if d > 3 {
        return Err(FaberError::InvalidParameter(format!(
            "composite quadrature supports d <= 3, got d = {d}; use stratified_mc"
        )));
    }
    let fine_cells = 1u128
        .checked_shl((level + 1) * d as u32)
        .unwrap_or(u128::MAX);
    if level >= 40 || fine_cells > MAX_CELLS {
        return Err(FaberError::MeshTooLarge { cells: fine_cells });
    }
    let coarse = composite_integral(g, q, order, level);
    let fine = composite_integral(g, q, order, level + 1);
    let value = coarse.powf(1.0 / q);
    Ok(Estimate {
        value,
        error_estimate: (value - fine.powf(1.0 / q)).abs(),
    })
}

/// `∫ |g|^q` by the composite tensor rule on the level mesh.
fn composite_integral(g: &FunctionHandle, q: f64, order: usize, level: u32) -> f64 {
    let d = g.dim();
    let (nodes, weights) = gauss_legendre(order);
    let per_axis = 1usize << level;
    let cells = per_axis.pow(d as u32);
    let h = 1.0 / per_axis as f64;
    let cell_volume = h.powi(d as i32);
    let points_per_cell = order.pow(d as u32);

    let block_sums: Vec<f64> = (0..cells.div_ceil(BLOCK))
        .into_par_iter()
        .map(|block| {
            let mut x = vec![0.0; d];
            let mut corner = vec![0usize; d];
            let mut cell_values = Vec::with_capacity(BLOCK);
            let mut point_values = vec![0.0; points_per_cell];
            for cell in block * BLOCK..((block + 1) * BLOCK).min(cells) {
                let mut rest = cell;
                for c in corner.iter_mut().rev() {
                    *c = rest % per_axis;
                    rest /= per_axis;
                }
                for (p, slot) in point_values.iter_mut().enumerate() {
                    let mut rest = p;
                    let mut w = 1.0;
                    for axis in (0..d).rev() {
                        let i = rest % order;
                        rest /= order;
                        x[axis] = (corner[axis] as f64 + nodes[i]) * h;
                        w *= weights[i];
                    }
                    *slot = w * g.eval(&x).abs().powf(q);
                }
                cell_values.push(pairwise_sum(&point_values) * cell_volume);
            }
            pairwise_sum(&cell_values)
        })
        .collect();
    pairwise_sum(&block_sums)
}

fn stratified(g: &FunctionHandle, q: f64, samples: usize, seed: u64) -> Estimate {
    let d = g.dim();
    let level = ((samples as f64).log2().floor() as usize / d) as u32;
    let per_axis = 1usize << level;
    let strata = per_axis.pow(d as u32);
    let (strata, remainder) = if strata >= 2 {
        (strata, samples - strata)
    } else {
        (0, samples)
    };
    let h = 1.0 / per_axis as f64;
    let strata_blocks = strata.div_ceil(BLOCK);

    let draw = |stream: u64, count: usize, offset: usize, stratified: bool| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut x = vec![0.0; d];
        (offset..offset + count)
            .map(|index| {
                if stratified {
                    let mut rest = index;
                    for xi in x.iter_mut().rev() {
                        let c = rest % per_axis;
                        rest /= per_axis;
                        *xi = (c as f64 + rng.gen::<f64>()) * h;
                    }
                } else {
                    x.iter_mut().for_each(|xi| *xi = rng.gen::<f64>());
                }
                g.eval(&x).abs().powf(q)
            })
            .collect()
    };

    let strata_values: Vec<f64> = (0..strata_blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let start = b * BLOCK;
            draw(b as u64, BLOCK.min(strata - start), start, true)
        })
        .collect();
    let remainder_values: Vec<f64> = (0..remainder.div_ceil(BLOCK))
        .into_par_iter()
        .flat_map_iter(|b| {
            let start = b * BLOCK;
            draw(
                (strata_blocks + b) as u64,
                BLOCK.min(remainder - start),
                start,
                false,
            )
        })
        .collect();

    // stratified part: variance from adjacent stratum pairs
    let (mut total, mut variance) = (0.0, 0.0);
    if strata > 0 {
        let s = strata as f64;
        let mean = pairwise_sum(&strata_values) / s;
        let pair_sq: Vec<f64> = strata_values
            .chunks_exact(2)
            .map(|c| (c[0] - c[1]).powi(2))
            .collect();
        let var_mean = pairwise_sum(&pair_sq) / (s * s);
        total += s * mean;
        variance += s * s * var_mean;
    }
    if remainder > 0 {
        let r = remainder as f64;
        let mean = pairwise_sum(&remainder_values) / r;
        let sq: Vec<f64> = remainder_values
            .iter()
            .map(|v| (v - mean).powi(2))
            .collect();
        let var_mean = if remainder > 1 {
            pairwise_sum(&sq) / (r - 1.0) / r
        } else {
            0.0
        };
        total += r * mean;
        variance += r * r * var_mean;
    }
    let n = (strata + remainder) as f64;
    let integral = total / n;
    let sigma = variance.sqrt() / n;
    let value = integral.powf(1.0 / q);
    let error_estimate = if integral > 0.0 {
        value / (q * integral) * sigma
    } else {
        0.0
    };
    Estimate {
        value,
        error_estimate,
    }
}

fn sup_grid(g: &FunctionHandle, level: u32) -> Result<Estimate> {
    let d = g.dim();
    let points = (1u128 << level.min(100)) + 1;
    let total = points.checked_pow(d as u32).unwrap_or(u128::MAX);
    if level >= 40 || total > MAX_CELLS {
        return Err(FaberError::MeshTooLarge { cells: total });
    }
    let grid_max = |level: u32| -> f64 {
        let per_axis = (1usize << level) + 1;
        let total = per_axis.pow(d as u32);
        let h = (-(level as f64)).exp2();
        (0..total.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut x = vec![0.0; d];
                let mut m = 0.0f64;
                for idx in b * BLOCK..((b + 1) * BLOCK).min(total) {
                    let mut rest = idx;
                    for xi in x.iter_mut().rev() {
                        *xi = (rest % per_axis) as f64 * h;
                        rest /= per_axis;
                    }
                    m = m.max(g.eval(&x).abs());
                }
                m
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    };
    let value = grid_max(level);
    let coarser = grid_max(level - 1);
    Ok(Estimate {
        value,
        error_estimate: value - coarser,
    })
}
