//! Test functions with controlled mixed smoothness.

use std::f64::consts::{E, FRAC_1_SQRT_2};

use crate::dyadic::{LevelVector, TranslationVector};
use crate::error::{FaberError, Result};
use crate::faber::{hat_eval, synthesize, FaberSeries, FunctionHandle};

/// A test function together with whatever exact data is known about it.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub handle: FunctionHandle,
    /// Exact Faber expansion, for finite sums.
    pub series: Option<FaberSeries>,
    /// Exact `L_2` norm, when known analytically.
    pub exact_l2: Option<f64>,
}

impl TestFunction {
    fn plain(handle: FunctionHandle) -> Self {
        Self {
            handle,
            series: None,
            exact_l2: None,
        }
    }

    fn from_series(series: FaberSeries) -> Self {
        Self {
            handle: synthesize(series.clone()),
            series: Some(series),
            exact_l2: None,
        }
    }
}

/// Catalog entries addressable by string id.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunctionSpec {
    Extremal { p: f64, depth: u32, seed: u64 },
    Spike { depth: u32, seed: u64 },
    Kink { center: Option<Vec<f64>> },
    Smooth { id: String },
    Hat { level: u32 },
    Prescribed(FaberSeries),
}

/// Ids accepted by [`TestFunctionSpec::from_id`].
pub const CATALOG_IDS: &[&str] = &[
    "extremal",
    "spike",
    "kink",
    "hat",
    "const",
    "multilinear",
    "x2",
    "exp",
    "poly-mix",
];

impl TestFunctionSpec {
    /// Resolves a catalog id. `p`, `depth`, `seed`, `level` and `center` are
    /// only read by the kinds that use them.
    pub fn from_id(
        id: &str,
        p: f64,
        depth: u32,
        seed: u64,
        level: u32,
        center: Option<Vec<f64>>,
    ) -> Result<Self> {
        Ok(match id {
            "extremal" => Self::Extremal { p, depth, seed },
            "spike" => Self::Spike { depth, seed },
            "kink" => Self::Kink { center },
            "hat" => Self::Hat { level },
            "const" | "multilinear" | "x2" | "exp" | "poly-mix" => Self::Smooth { id: id.into() },
            other => {
                return Err(FaberError::InvalidParameter(format!(
                    "unknown function `{other}`; known: {}",
                    CATALOG_IDS.join(", ")
                )))
            }
        })
    }

    pub fn build(&self, d: usize) -> Result<TestFunction> {
        match self {
            Self::Extremal { p, depth, seed } => extremal(*p, *depth, *seed, d),
            Self::Spike { depth, seed } => spike(*depth, *seed, d),
            Self::Kink { center } => {
                let c = match center {
                    Some(c) => c.clone(),
                    None => default_kink_center(d),
                };
                kink(&c).map(TestFunction::plain)
            }
            Self::Smooth { id } => smooth(id, d),
            Self::Hat { level } => hat_family(*level, d).map(TestFunction::from_series),
            Self::Prescribed(series) => {
                if series.dim() != d {
                    return Err(FaberError::DimensionMismatch {
                        expected: d,
                        got: series.dim(),
                    });
                }
                Ok(TestFunction::from_series(series.clone()))
            }
        }
    }
}

/// Counter-based sign generator: a splitmix64 hash of `(seed, j, k)`.
fn sign(seed: u64, j: &LevelVector, k: &TranslationVector) -> f64 {
    let h = k
        .entries()
        .iter()
        .fold(splitmix(seed ^ hash_level(j)), |h, &e| splitmix(h ^ e));
    if h >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 {
        return Err(FaberError::InvalidParameter("depth must be >= 1".into()));
    }
    Ok(())
}

/// `c_{j,k} = 2^{-|j|_1/p} σ_{j,k}` on every level `|j|_1 <= depth` with all
/// `j_i >= 0`, zero on boundary levels. Every interior level then has
/// `ℓ_p` norm exactly one.
pub fn extremal(p: f64, depth: u32, seed: u64, d: usize) -> Result<TestFunction> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FaberError::InvalidParameter(format!(
            "p = {p} must be >= 1"
        )));
    }
    check_depth(depth)?;
    let series = FaberSeries::from_fn(d, depth, |j, k| {
        if j.is_interior() {
            (-(j.reduced_order() as f64) / p).exp2() * sign(seed, j, k)
        } else {
            0.0
        }
    })?;
    Ok(TestFunction::from_series(series))
}

/// One unit coefficient per interior level at a seeded position, zero
/// elsewhere. Its level `ℓ_p` norms are one for every `p`, so it sits in
/// the unit ball of `s^{1/p}_{p,∞}b` for all `p` at once while concentrating
/// the `L_q` mass of each level in a single tent.
pub fn spike(depth: u32, seed: u64, d: usize) -> Result<TestFunction> {
    check_depth(depth)?;
    let mut series = FaberSeries::zeros(d, depth)?;
    let levels: Vec<LevelVector> = series
        .levels()
        .iter()
        .filter(|j| j.is_interior())
        .cloned()
        .collect();
    for j in levels {
        let count = j.translation_count() as u64;
        let pick = splitmix(seed ^ hash_level(&j)) % count;
        let k = j.translation_at(pick as usize);
        series.set(&j, &k, sign(seed, &j, &k))?;
    }
    Ok(TestFunction::from_series(series))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_level(j: &LevelVector) -> u64 {
    j.entries()
        .iter()
        .fold(0x51_7cc1_b727_220a, |h, &e| splitmix(h ^ (e as i64 as u64)))
}

/// Default kink anchor `c_i = frac(1/√2 + i/√3)`, `i = 0..d`.
pub fn default_kink_center(d: usize) -> Vec<f64> {
    let step = 1.0 / 3f64.sqrt();
    (0..d)
        .map(|i| (FRAC_1_SQRT_2 + i as f64 * step).fract())
        .collect()
}

/// `f(x) = prod_i |x_i - c_i|` with `c` strictly inside and non-dyadic.
pub fn kink(center: &[f64]) -> Result<FunctionHandle> {
    if center.is_empty() {
        return Err(FaberError::ZeroDimension);
    }
    for &c in center {
        if !(c > 0.0 && c < 1.0) {
            return Err(FaberError::InvalidParameter(format!(
                "kink anchor {c} must lie strictly inside (0, 1)"
            )));
        }
        // a short binary expansion would make the expansion finite
        if (c * (40f64).exp2()).fract() == 0.0 {
            return Err(FaberError::InvalidParameter(format!(
                "kink anchor {c} is dyadic"
            )));
        }
    }
    let integral: f64 = center
        .iter()
        .map(|c| (c * c + (1.0 - c) * (1.0 - c)) / 2.0)
        .product();
    let c = center.to_vec();
    Ok(FunctionHandle::new(center.len(), "kink", move |x| {
        x.iter().zip(&c).map(|(xi, ci)| (xi - ci).abs()).product()
    })
    .with_exact_integral(integral))
}

/// The exact expansion of `v_{j,0}(x_1)`, constant along the other axes.
pub fn hat_family(level: u32, d: usize) -> Result<FaberSeries> {
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    let mut entries = vec![-1; d];
    entries[0] = level as i32;
    let j = LevelVector::new(entries)?;
    let mut series = FaberSeries::zeros(d, level)?;
    // 1 = v_{-1,0} + v_{-1,1} along each remaining axis
    for i in 0..(1usize << (d - 1)) {
        let mut k = vec![0u64; d];
        for (axis, slot) in k.iter_mut().enumerate().skip(1) {
            *slot = ((i >> (axis - 1)) & 1) as u64;
        }
        series.set(&j, &TranslationVector::new(k), 1.0)?;
    }
    Ok(series)
}

/// `v_{j,0}(x_1)` as a plain handle, evaluated directly from the tent.
pub fn hat_handle(level: u32, d: usize) -> Result<FunctionHandle> {
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    hat_eval(level as i32, 0, 0.0)?;
    let j = level as i32;
    Ok(
        FunctionHandle::new(d, format!("v_{{{level},0}}"), move |x| {
            hat_eval(j, 0, x[0]).unwrap_or(f64::NAN)
        })
        .with_exact_integral((-(level as f64) - 1.0).exp2())
        .with_resolution_level(level + 1),
    )
}

/// Smooth references with exact integral and `L_2` norm.
pub fn smooth(id: &str, d: usize) -> Result<TestFunction> {
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    let di = d as i32;
    let (handle, l2_sq) = match id {
        "const" => (
            FunctionHandle::new(d, "const", |_| 1.0).with_exact_integral(1.0),
            1.0,
        ),
        // prod (1 + x_i): multilinear, reproduced exactly at every budget
        "multilinear" => (
            FunctionHandle::new(d, "multilinear", |x| x.iter().map(|v| 1.0 + v).product())
                .with_exact_integral(1.5f64.powi(di)),
            (7.0f64 / 3.0).powi(di),
        ),
        "x2" => (
            FunctionHandle::new(d, "x2", |x| x.iter().map(|v| v * v).product())
                .with_exact_integral(3f64.powi(-di)),
            5f64.powi(-di),
        ),
        "exp" => (
            FunctionHandle::new(d, "exp", |x| x.iter().sum::<f64>().exp())
                .with_exact_integral((E - 1.0).powi(di)),
            ((E * E - 1.0) / 2.0).powi(di),
        ),
        // ∫ (1 + x - 2x^3) = 1, ∫ (1 + x - 2x^3)^2 = 116/105
        "poly-mix" => (
            FunctionHandle::new(d, "poly-mix", |x| {
                x.iter().map(|v| 1.0 + v - 2.0 * v * v * v).product()
            })
            .with_exact_integral(1.0),
            (116.0f64 / 105.0).powi(di),
        ),
        other => {
            return Err(FaberError::InvalidParameter(format!(
                "unknown smooth function `{other}`"
            )))
        }
    };
    Ok(TestFunction {
        handle,
        series: None,
        exact_l2: Some(l2_sq.sqrt()),
    })
}
