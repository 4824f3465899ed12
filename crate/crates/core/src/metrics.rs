//! NMSE after removing the diagonal scaling ambiguity.
//!
//! `(H2 L, L^-1 H1)` produces the same tensor as `(H2, H1)` for any
//! invertible diagonal `L`, so both the truth and the estimate are put in the
//! canonical form where `H1` has an all-ones first column before comparing.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelPair;
use crate::error::{Error, Result};
use crate::tensor::{frobenius_sq, ComplexMatrix, C64};

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmseRecord {
    pub nmse_h1: f64,
    pub nmse_h2: f64,
    pub nmse_h1_db: f64,
    pub nmse_h2_db: f64,
}

impl NmseRecord {
    pub fn new(nmse_h1: f64, nmse_h2: f64) -> Self {
        NmseRecord {
            nmse_h1,
            nmse_h2,
            nmse_h1_db: to_db(nmse_h1),
            nmse_h2_db: to_db(nmse_h2),
        }
    }
}

/// Divide row `n` of `H1` by `H1[n, 0]` and multiply column `n` of `H2` by
/// the same value. The products `H2 D_p H1` are unchanged.
pub fn normalize_first_column(
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if h1.nrows() != h2.ncols() {
        return Err(Error::dim(
            "normalize_first_column",
            format!("H1 has {} rows but H2 has {} columns", h1.nrows(), h2.ncols()),
        ));
    }
    let pivots: Vec<C64> = (0..h1.nrows()).map(|n| h1[(n, 0)]).collect();
    if let Some(row) = pivots
        .iter()
        .position(|d| *d == C64::new(0.0, 0.0) || !d.re.is_finite() || !d.im.is_finite())
    {
        return Err(Error::DegenerateScaling { row });
    }
    let h1n = Mat::from_fn(h1.nrows(), h1.ncols(), |n, m| h1[(n, m)] / pivots[n]);
    let h2n = Mat::from_fn(h2.nrows(), h2.ncols(), |k, n| h2[(k, n)] * pivots[n]);
    Ok((h1n, h2n))
}

/// `||truth - estimate||_F^2 / ||truth||_F^2`.
pub fn nmse(truth: MatRef<'_, C64>, estimate: MatRef<'_, C64>) -> Result<f64> {
    if truth.shape() != estimate.shape() {
        return Err(Error::dim(
            "nmse",
            format!("truth is {:?}, estimate is {:?}", truth.shape(), estimate.shape()),
        ));
    }
    let norm = frobenius_sq(truth);
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(frobenius_sq((truth - estimate).as_ref()) / norm)
}

/// NMSE of both channels with truth and estimate each normalized by
/// [`normalize_first_column`].
pub fn aligned_nmse(truth: &ChannelPair, estimate: &ChannelPair) -> Result<NmseRecord> {
    let (t1, t2) = normalize_first_column(truth.h1.as_ref(), truth.h2.as_ref())?;
    let (e1, e2) = normalize_first_column(estimate.h1.as_ref(), estimate.h2.as_ref())?;
    Ok(NmseRecord::new(
        nmse(t1.as_ref(), e1.as_ref())?,
        nmse(t2.as_ref(), e2.as_ref())?,
    ))
}
