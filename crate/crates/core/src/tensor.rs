//! Dense complex-matrix kernels for the three-way PARAFAC model.
//!
//! The received tensor has entries
//! `z[k, m, p] = sum_n H2[k, n] * H1[n, m] * Phi[p, n]`, and the estimator
//! works on two of its matricizations. Row orderings (0-based here):
//!
//! | mode | shape      | row index     | product              |
//! |------|------------|---------------|----------------------|
//! | 1    | `PM x K`   | `m * P + p`   | `(H1^T ∘ Phi) H2^T`  |
//! | 2    | `KP x M`   | `p * K + k`   | `(Phi ∘ H2) H1`      |
//! | 3    | `MK x P`   | `k * M + m`   | `(H2 ∘ H1^T) Phi^T`  |
//!
//! With the Khatri-Rao convention used below (first factor varies slowest),
//! these are the only orderings under which the products equal the scalar
//! model entrywise.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix used for every channel, pilot and unfolding.
pub type ComplexMatrix = Mat<C64>;

/// Build a matrix from row-major entries, rejecting NaN/Inf.
pub fn matrix_from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::dim("matrix", format!("empty shape {rows}x{cols}")));
    }
    if entries.len() != rows * cols {
        return Err(Error::dim(
            "matrix",
            format!("{} entries for shape {rows}x{cols}", entries.len()),
        ));
    }
    let m = Mat::from_fn(rows, cols, |i, j| entries[i * cols + j]);
    ensure_finite(m.as_ref())?;
    Ok(m)
}

/// Build a matrix from nested rows, rejecting ragged input and NaN/Inf.
pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::dim("matrix", "ragged rows"));
    }
    let flat: Vec<C64> = rows.iter().flatten().copied().collect();
    matrix_from_row_major(rows.len(), cols, &flat)
}

pub fn matrix_to_rows(m: MatRef<'_, C64>) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn ensure_finite(m: MatRef<'_, C64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn frobenius_sq(m: MatRef<'_, C64>) -> f64 {
    m.squared_norm_l2()
}

/// Which matricization of the `K x M x P` tensor a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnfoldingMode {
    /// `PM x K`, rows `m * P + p`.
    Mode1,
    /// `KP x M`, rows `p * K + k`.
    Mode2,
    /// `MK x P`, rows `k * M + m`.
    Mode3,
}

impl UnfoldingMode {
    /// Shape `(rows, cols)` of the unfolding for a tensor of size `K x M x P`.
    pub fn shape(self, k: usize, m: usize, p: usize) -> (usize, usize) {
        match self {
            UnfoldingMode::Mode1 => (p * m, k),
            UnfoldingMode::Mode2 => (k * p, m),
            UnfoldingMode::Mode3 => (m * k, p),
        }
    }

    /// Position `(row, col)` of tensor entry `(k, m, p)`, 0-based.
    pub fn position(self, dims: (usize, usize, usize), k: usize, m: usize, p: usize) -> (usize, usize) {
        let (kk, mm, pp) = dims;
        match self {
            UnfoldingMode::Mode1 => (m * pp + p, k),
            UnfoldingMode::Mode2 => (p * kk + k, m),
            UnfoldingMode::Mode3 => (k * mm + m, p),
        }
    }

    /// Inverse of [`position`](Self::position).
    pub fn entry(self, dims: (usize, usize, usize), row: usize, col: usize) -> (usize, usize, usize) {
        let (kk, mm, pp) = dims;
        match self {
            UnfoldingMode::Mode1 => (col, row / pp, row % pp),
            UnfoldingMode::Mode2 => (row % kk, col, row / kk),
            UnfoldingMode::Mode3 => (row / mm, row % mm, col),
        }
    }
}

/// Column-wise Kronecker product. Row `r1 * R2 + r2` of column `n` holds
/// `a[r1, n] * b[r2, n]`.
pub fn khatri_rao(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<ComplexMatrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::dim(
            "khatri_rao",
            format!("column counts {} and {}", a.ncols(), b.ncols()),
        ));
    }
    let rb = b.nrows();
    Ok(Mat::from_fn(a.nrows() * rb, a.ncols(), |r, n| {
        a[(r / rb, n)] * b[(r % rb, n)]
    }))
}

struct FactorDims {
    k: usize,
    p: usize,
}

fn check_factors(
    op: &'static str,
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
    phi: MatRef<'_, C64>,
) -> Result<FactorDims> {
    let n = h1.nrows();
    if h2.ncols() != n || phi.ncols() != n {
        return Err(Error::dim(
            op,
            format!(
                "H1 is {}x{}, H2 is {}x{}, Phi is {}x{}",
                h1.nrows(),
                h1.ncols(),
                h2.nrows(),
                h2.ncols(),
                phi.nrows(),
                phi.ncols()
            ),
        ));
    }
    Ok(FactorDims {
        k: h2.nrows(),
        p: phi.nrows(),
    })
}

/// Mode-1 unfolding `(H1^T ∘ Phi) H2^T`, shape `PM x K`.
pub fn unfold_mode1(
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
    phi: MatRef<'_, C64>,
) -> Result<ComplexMatrix> {
    check_factors("unfold_mode1", h1, h2, phi)?;
    Ok(khatri_rao(h1.transpose(), phi)? * h2.transpose())
}

/// Mode-2 unfolding `(Phi ∘ H2) H1`, shape `KP x M`.
pub fn unfold_mode2(
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
    phi: MatRef<'_, C64>,
) -> Result<ComplexMatrix> {
    check_factors("unfold_mode2", h1, h2, phi)?;
    Ok(khatri_rao(phi, h2)? * h1)
}

/// Mode-3 unfolding `(H2 ∘ H1^T) Phi^T`, shape `MK x P`.
pub fn unfold_mode3(
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
    phi: MatRef<'_, C64>,
) -> Result<ComplexMatrix> {
    check_factors("unfold_mode3", h1, h2, phi)?;
    Ok(khatri_rao(h2, h1.transpose())? * phi.transpose())
}

/// Frontal slices `Z_p = H2 diag(Phi[p, :]) H1`, each `K x M`.
pub fn model_slices(
    h1: MatRef<'_, C64>,
    h2: MatRef<'_, C64>,
    phi: MatRef<'_, C64>,
) -> Result<Vec<ComplexMatrix>> {
    let d = check_factors("model_slices", h1, h2, phi)?;
    let n = h1.nrows();
    Ok((0..d.p)
        .map(|p| {
            let scaled = Mat::from_fn(d.k, n, |k, i| h2[(k, i)] * phi[(p, i)]);
            scaled * h1
        })
        .collect())
}

/// Moore-Penrose pseudo-inverse together with the rank it was computed at.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: ComplexMatrix,
    /// Number of singular values kept.
    pub rank: usize,
    /// All singular values, non-increasing.
    pub singular_values: Vec<f64>,
}

/// Default relative cutoff: machine epsilon times the larger dimension.
pub fn default_pinv_tol(rows: usize, cols: usize) -> f64 {
    f64::EPSILON * rows.max(cols) as f64
}

/// SVD-based pseudo-inverse. Singular values at or below `tol * s_max` are
/// treated as zero.
///
/// Tall inputs are first reduced with a thin QR so the SVD runs on the
/// square `R` factor; wide inputs go through the adjoint.
pub fn pseudo_inverse(a: MatRef<'_, C64>, tol: f64) -> Result<PseudoInverse> {
    ensure_finite(a)?;
    if a.nrows() < a.ncols() {
        let t = pseudo_inverse(a.adjoint().to_owned().as_ref(), tol)?;
        return Ok(PseudoInverse {
            matrix: t.matrix.adjoint().to_owned(),
            ..t
        });
    }
    let cols = a.ncols();
    // a = Q R, R = U S V^H  =>  a^+ = V S^+ U^H Q^H
    let (q, svd) = if a.nrows() > cols {
        let qr = a.qr();
        let r = qr.thin_R().to_owned();
        let svd = r
            .svd()
            .map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
        (Some(qr.compute_thin_Q()), svd)
    } else {
        let svd = a
            .svd()
            .map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
        (None, svd)
    };
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..cols).map(|i| s[i].re).collect();
    let cutoff = tol * singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .take_while(|&&v| v > cutoff && v > 0.0)
        .count();

    let u = svd.U().subcols(0, rank);
    let v = svd.V().subcols(0, rank);
    let v_scaled = Mat::from_fn(cols, rank, |i, j| v[(i, j)] / singular_values[j]);
    let core = &v_scaled * u.adjoint();
    let matrix = match q {
        Some(q) => core * q.adjoint(),
        None => core,
    };
    Ok(PseudoInverse {
        matrix,
        rank,
        singular_values,
    })
}
