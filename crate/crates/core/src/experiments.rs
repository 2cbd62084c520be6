//! Convergence studies, rate fits, and the supporting numeric checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FaberError, Result};
use crate::faber::{analyze_with_cache, FunctionHandle, SampleCache};
use crate::measure::{lq_error, MeasureSpec};
use crate::seqnorm::{decay_profile, Exponent};
use crate::testbed::hat_handle;

/// One row of an error-versus-budget study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRecord {
    pub n: u32,
    /// Number of distinct samples used by `I_n`.
    pub m: u64,
    pub error: f64,
    pub error_estimate: f64,
    /// Theoretical envelope at `n` with unit constant.
    pub reference: f64,
    #[serde(skip)]
    pub p: f64,
    #[serde(skip)]
    pub q: f64,
    #[serde(skip)]
    pub d: usize,
}

/// Least-squares fit of `log2(error) - e * log2(max(n, 1)) = slope * n + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub fixed_log_exponent: f64,
    /// Budgets left out because the error did not exceed ten times its
    /// estimated measurement uncertainty.
    pub excluded: Vec<u32>,
}

/// `max(n, 1)^e`, so the logarithmic factor is 1 at `n = 0`.
fn log_factor(n: u32, exponent: f64) -> f64 {
    (n.max(1) as f64).powf(exponent)
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FaberError::InvalidParameter(format!(
            "p = {p} must be >= 1"
        )));
    }
    if !(q >= p && q.is_finite()) {
        return Err(FaberError::InvalidParameter(format!(
            "q = {q} must satisfy p <= q < inf"
        )));
    }
    Ok(())
}

/// Logarithmic exponent of the upper envelope: `d - 1` for `q = p`,
/// `(d - 1)/q` for `p < q`.
pub fn theoretical_log_exponent(p: f64, q: f64, d: usize) -> f64 {
    let d1 = d as f64 - 1.0;
    if q == p {
        d1
    } else {
        d1 / q
    }
}

/// Upper envelope `2^{-n/p} n^{d-1}` (`q = p`) or `2^{-n/q} n^{(d-1)/q}` (`p < q`).
pub fn reference_envelope(n: u32, p: f64, q: f64, d: usize) -> f64 {
    let main = if q == p { p } else { q };
    (-(n as f64) / main).exp2() * log_factor(n, theoretical_log_exponent(p, q, d))
}

fn check_range(n_range: &[u32]) -> Result<()> {
    if n_range.is_empty() {
        return Err(FaberError::InvalidParameter("empty budget range".into()));
    }
    if n_range.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FaberError::InvalidParameter(
            "budget range must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Measures `‖f - I_n f‖_q` for every `n` in `n_range`. `spec.q` is
/// overwritten with `q`.
pub fn convergence_study(
    f: &FunctionHandle,
    p: f64,
    q: f64,
    n_range: &[u32],
    spec: &MeasureSpec,
) -> Result<Vec<RateRecord>> {
    check_exponents(p, q)?;
    check_range(n_range)?;
    let spec = MeasureSpec {
        q: Exponent::Finite(q),
        ..*spec
    };
    spec.validate()?;
    let d = f.dim();
    n_range
        .par_iter()
        .map(|&n| {
            let cache = SampleCache::new();
            let series = analyze_with_cache(f, n, &cache)?;
            let estimate = lq_error(f, &series, &spec)?;
            Ok(RateRecord {
                n,
                m: cache.len() as u64,
                error: estimate.value,
                error_estimate: estimate.error_estimate,
                reference: reference_envelope(n, p, q, d),
                p,
                q,
                d,
            })
        })
        .collect()
}

/// Fits the per-level exponent of 2 with the logarithmic exponent held fixed.
pub fn fit_rate(records: &[RateRecord], fixed_log_exponent: f64) -> Result<RateFit> {
    let (usable, excluded): (Vec<&RateRecord>, Vec<&RateRecord>) = records
        .iter()
        .partition(|r| r.error > 0.0 && r.error.is_finite() && r.error > 10.0 * r.error_estimate);
    if usable.len() < 4 {
        return Err(FaberError::TooFewRecords {
            usable: usable.len(),
        });
    }
    let points: Vec<(f64, f64)> = usable
        .iter()
        .map(|r| {
            let y = r.error.log2() - fixed_log_exponent * (r.n.max(1) as f64).log2();
            (r.n as f64, y)
        })
        .collect();
    let (slope, intercept) = least_squares(&points);
    let residual_rms = (points
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual_rms,
        fixed_log_exponent,
        excluded: excluded.iter().map(|r| r.n).collect(),
    })
}

/// Ordinary least squares `y = a x + b`, centred for conditioning.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombRow {
    pub n: u32,
    pub ratio_tail: f64,
    pub ratio_bulk: f64,
}

/// Shells `|j'|_1 = s` of `N_0^{dim}` enumerated explicitly.
fn for_each_in_shell(dim: usize, s: u32, visit: &mut impl FnMut(&[u32])) {
    fn rec(rem: u32, left: usize, cur: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if left == 1 {
            cur.push(rem);
            visit(cur);
            cur.pop();
            return;
        }
        for v in 0..=rem {
            cur.push(v);
            rec(rem - v, left - 1, cur, visit);
            cur.pop();
        }
    }
    if dim == 0 {
        if s == 0 {
            visit(&[]);
        }
        return;
    }
    rec(s, dim, &mut Vec::with_capacity(dim), visit);
}

/// `Σ_{|j|_1 > n} 2^{-α|j|_1}` over `j ∈ N_0^d`: explicit enumeration of the
/// first `d - 1` axes and a closed geometric tail in the last.
pub fn tail_sum(alpha: f64, d: usize, n: u32) -> f64 {
    let r = (-alpha).exp2();
    let closure = 1.0 / (1.0 - r);
    let mut total = 0.0;
    let mut s = 0u32;
    loop {
        let mut shell = 0.0;
        for_each_in_shell(d - 1, s, &mut |_| {
            let start = (n + 1).saturating_sub(s);
            shell += (-alpha * (s + start) as f64).exp2() * closure;
        });
        total += shell;
        // shells past n decay geometrically; stop once negligible
        if s > n && (shell == 0.0 || shell < total * 1e-18) {
            break;
        }
        if d == 1 {
            break;
        }
        s += 1;
    }
    total
}

/// `Σ_{|j|_1 <= n} 2^{|j|_1}` over `j ∈ N_0^d`.
pub fn bulk_sum(d: usize, n: u32) -> f64 {
    let mut total = 0.0;
    for s in 0..=n {
        for_each_in_shell(d - 1, s, &mut |_| {
            // Σ_{t=0}^{n-s} 2^{s+t}
            total += (s as f64).exp2() * (((n - s + 1) as f64).exp2() - 1.0);
        });
    }
    total
}

/// Normalised tail and bulk sums; both stay in fixed bands as `n` grows.
pub fn comb_check(alpha: f64, d: usize, n_range: &[u32]) -> Result<Vec<CombRow>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FaberError::InvalidParameter(format!(
            "alpha = {alpha} must be > 0"
        )));
    }
    if d == 0 {
        return Err(FaberError::ZeroDimension);
    }
    check_range(n_range)?;
    Ok(n_range
        .iter()
        .map(|&n| {
            let lf = log_factor(n, d as f64 - 1.0);
            CombRow {
                n,
                ratio_tail: tail_sum(alpha, d, n) / (lf * (-alpha * n as f64).exp2()),
                ratio_bulk: bulk_sum(d, n) / (lf * (n as f64).exp2()),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceRow {
    pub j: u32,
    pub l: u32,
    pub witness: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoncompactReport {
    pub max_level: u32,
    pub p: f64,
    pub distances: Vec<DistanceRow>,
    /// Decay profile of each `v_{j,0}` as `(order, level ℓ_p norm)`.
    pub profiles: Vec<Vec<(u32, f64)>>,
    pub conclusion: String,
}

/// The hat family `v_{j,0}`, `j = 0..=max_level`: pairwise sup-distances at
/// the peak of the coarser hat, where the finer hat vanishes, and the decay
/// profile of every member.
pub fn noncompact_demo(max_level: u32, p: f64) -> Result<NoncompactReport> {
    if max_level < 2 {
        return Err(FaberError::InvalidParameter(format!(
            "max level must be >= 2, got {max_level}"
        )));
    }
    let hats = (0..=max_level)
        .map(|j| hat_handle(j, 1))
        .collect::<Result<Vec<_>>>()?;
    let mut distances = Vec::new();
    for j in 0..=max_level {
        for l in 0..=max_level {
            let witness = (-(j.min(l) as f64) - 1.0).exp2();
            let distance =
                (hats[j as usize].eval(&[witness]) - hats[l as usize].eval(&[witness])).abs();
            distances.push(DistanceRow {
                j,
                l,
                witness,
                distance,
            });
        }
    }
    let profiles = hats
        .iter()
        .map(|h| decay_profile(h, p, max_level))
        .collect::<Result<Vec<_>>>()?;
    let bounded = profiles
        .iter()
        .all(|prof| prof.iter().all(|&(_, v)| v <= 1.0 + 1e-12));
    let separated = distances
        .iter()
        .all(|r| (r.j == r.l && r.distance == 0.0) || (r.j != r.l && r.distance == 1.0));
    let conclusion = if bounded && separated {
        format!(
            "all {} hats have s^{{1/p}}_{{p,inf}}b norm 1 and pairwise sup-distance 1: \
             bounded in the sequence norm, no L_inf-convergent subsequence",
            max_level + 1
        )
    } else {
        "unexpected: the hat family is not uniformly separated and bounded".to_string()
    };
    Ok(NoncompactReport {
        max_level,
        p,
        distances,
        profiles,
        conclusion,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthRow {
    pub m: u64,
    pub error: f64,
    pub upper_ref: f64,
    pub lower_ref: f64,
}

/// Upper envelope of the sampling width in terms of `m`:
/// `m^{-1/p} (log^{d-1} m)^{1/p + 1}` for `q = p`,
/// `m^{-1/q} (log^{d-1} m)^{2/q}` for `p < q`.
pub fn width_upper_envelope(m: u64, p: f64, q: f64, d: usize) -> f64 {
    let m = m.max(2) as f64;
    let log_term = m.ln().powf(d as f64 - 1.0);
    if q == p {
        m.powf(-1.0 / p) * log_term.powf(1.0 / p + 1.0)
    } else {
        m.powf(-1.0 / q) * log_term.powf(2.0 / q)
    }
}

/// The `n`-indexed study re-indexed by sample count `m`, with the upper
/// envelope and the `m^{-1/q}` lower envelope (unit constants, recorded only).
pub fn sampling_width_table(
    f: &FunctionHandle,
    p: f64,
    q: f64,
    n_range: &[u32],
    spec: &MeasureSpec,
) -> Result<Vec<WidthRow>> {
    let d = f.dim();
    Ok(convergence_study(f, p, q, n_range, spec)?
        .into_iter()
        .map(|r| WidthRow {
            m: r.m,
            error: r.error,
            upper_ref: width_upper_envelope(r.m, p, q, d),
            lower_ref: (r.m as f64).powf(-1.0 / q),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubatureRow {
    pub n: u32,
    pub m: u64,
    pub abs_error: f64,
    /// `2^{-n} n^{d-1}`.
    pub reference: f64,
}

/// Integration error of `∫ I_n f` against the exact integral of `f`.
pub fn cubature_study(f: &FunctionHandle, n_range: &[u32]) -> Result<Vec<CubatureRow>> {
    let exact = f.exact_integral().ok_or_else(|| {
        FaberError::InvalidParameter(format!("`{}` has no exact integral", f.label()))
    })?;
    check_range(n_range)?;
    let d = f.dim();
    n_range
        .par_iter()
        .map(|&n| {
            let cache = SampleCache::new();
            let series = analyze_with_cache(f, n, &cache)?;
            Ok(CubatureRow {
                n,
                m: cache.len() as u64,
                abs_error: (series.integrate() - exact).abs(),
                reference: (-(n as f64)).exp2() * log_factor(n, d as f64 - 1.0),
            })
        })
        .collect()
}
