//! Faber-Schauder analysis and synthesis on `[0, 1]^d`.
//!
//! The univariate system consists of the two boundary functions
//! `v_{-1,0}(x) = 1 - x`, `v_{-1,1}(x) = x` and the tents
//! `v_{j,k}(x) = v(2^j x - k)`, where `v` is the integrated Haar function
//! (`2t` on `[0, 1/2]`, `2 - 2t` on `[1/2, 1]`, zero elsewhere). The tensor
//! system takes products over the axes.
//!
//! A continuous `f` expands as `sum_j sum_k d_{j,k}(f) v_{j,k}` with
//! `d_{j,k}(f) = (-2)^{-|e(j)|} Delta^{2,e(j)}_{2^{-(j+1)}}(f, x_{j,k})`,
//! i.e. the tensorised hierarchical surplus. Truncating at `|j|_1 <= n` gives
//! the sparse-grid interpolant `I_n f`, stored as a [`FaberSeries`].

mod analysis;
pub mod io;
mod series;

pub use analysis::{analyze, analyze_with_cache, coeff, synthesize, FunctionHandle, SampleCache};
pub use series::FaberSeries;

use crate::dyadic::{axis_count, LevelVector, TranslationVector};
use crate::error::{FaberError, Result};

/// The integrated Haar function.
#[inline]
pub(crate) fn tent(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        0.0
    } else if t <= 0.5 {
        2.0 * t
    } else {
        2.0 - 2.0 * t
    }
}

/// Univariate basis function `v_{j,k}(x)`.
pub fn hat_eval(j: i32, k: u64, x: f64) -> Result<f64> {
    if !(-1..=crate::dyadic::MAX_LEVEL).contains(&j) {
        return Err(FaberError::LevelOutOfRange(j as i64));
    }
    if k >= axis_count(j) {
        return Err(FaberError::TranslationOutOfRange {
            level: vec![j],
            k: vec![k],
        });
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(FaberError::OutsideCube(vec![x]));
    }
    Ok(hat_unchecked(j, k, x))
}

#[inline]
pub(crate) fn hat_unchecked(j: i32, k: u64, x: f64) -> f64 {
    if j < 0 {
        if k == 0 {
            1.0 - x
        } else {
            x
        }
    } else {
        tent(x * ((j as f64).exp2()) - k as f64)
    }
}

/// Tensor basis function `v_{j,k}(x) = prod_i v_{j_i,k_i}(x_i)`.
pub fn tensor_eval(j: &LevelVector, k: &TranslationVector, x: &[f64]) -> Result<f64> {
    j.check_translation(k)?;
    check_point(j.dim(), x)?;
    Ok(j.entries()
        .iter()
        .zip(k.entries())
        .zip(x)
        .map(|((&ji, &ki), &xi)| hat_unchecked(ji, ki, xi))
        .product())
}

pub(crate) fn check_point(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(FaberError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().any(|xi| !(0.0..=1.0).contains(xi)) {
        return Err(FaberError::OutsideCube(x.to_vec()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(e: &[i32]) -> LevelVector {
        LevelVector::new(e.to_vec()).unwrap()
    }

    #[test]
    fn hat_values() {
        assert_eq!(hat_eval(0, 0, 0.5).unwrap(), 1.0);
        assert_eq!(hat_eval(-1, 0, 0.25).unwrap(), 0.75);
        assert_eq!(hat_eval(-1, 1, 0.25).unwrap(), 0.25);
        assert_eq!(hat_eval(2, 1, 5.0 / 16.0).unwrap(), 0.5);
        assert_eq!(hat_eval(2, 1, 0.75).unwrap(), 0.0);
        assert!(hat_eval(2, 4, 0.5).is_err());
        assert!(hat_eval(-1, 2, 0.5).is_err());
        assert!(hat_eval(0, 0, 1.5).is_err());
    }

    #[test]
    fn tensor_values() {
        let k = TranslationVector::new(vec![0, 0]);
        assert_eq!(tensor_eval(&lv(&[0, 0]), &k, &[0.5, 0.5]).unwrap(), 1.0);
        let k = TranslationVector::new(vec![1, 0]);
        assert_eq!(tensor_eval(&lv(&[1, 0]), &k, &[0.3, 0.5]).unwrap(), 0.0);
        let k = TranslationVector::new(vec![0, 1]);
        assert_eq!(tensor_eval(&lv(&[1, -1]), &k, &[0.25, 0.5]).unwrap(), 0.5);
        assert!(tensor_eval(&lv(&[1, -1]), &k, &[0.25]).is_err());
    }
}
