//! Alternating least-squares estimation of the cascaded RIS channels.
//!
//! The noiseless tensor factors as `Z' = (H1^T ∘ Phi) H2^T` (mode 1) and
//! `Z'' = (Phi ∘ H2) H1` (mode 2). With `Phi` known, each factor is a linear
//! least-squares problem given the other, and the estimator alternates the
//! two closed-form updates until either estimate stops moving.

use std::fmt;

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelPair, PhaseMatrix, ReceivedTensor, SystemDims};
use crate::error::{Error, Result};
use crate::tensor::{default_pinv_tol, frobenius_sq, khatri_rao, pseudo_inverse, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// `M < N`
    AntennasBelowElements { m: usize, n: usize },
    /// `K < N`
    UsersBelowElements { k: usize, n: usize },
    /// `P > N`
    PhasesAboveElements { p: usize, n: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::AntennasBelowElements { m, n } => write!(f, "M >= N violated (M={m}, N={n})"),
            Violation::UsersBelowElements { k, n } => write!(f, "K >= N violated (K={k}, N={n})"),
            Violation::PhasesAboveElements { p, n } => write!(f, "P <= N violated (P={p}, N={n})"),
        }
    }
}

/// Outcome of the identifiability check; empty means feasible.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn phases_only(p: usize, n: usize) -> Self {
        FeasibilityReport {
            violations: vec![Violation::PhasesAboveElements { p, n }],
        }
    }

    fn into_result(self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible(self))
        }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "feasible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn feasibility(m: usize, k: usize, n: usize, p: usize) -> FeasibilityReport {
    let mut violations = Vec::new();
    if m < n {
        violations.push(Violation::AntennasBelowElements { m, n });
    }
    if k < n {
        violations.push(Violation::UsersBelowElements { k, n });
    }
    if p > n {
        violations.push(Violation::PhasesAboveElements { p, n });
    }
    FeasibilityReport { violations }
}

/// `M >= N`, `K >= N` and `P <= N`.
pub fn check_feasibility(dims: &SystemDims) -> FeasibilityReport {
    feasibility(dims.m, dims.k, dims.n, dims.p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlsConfig {
    /// Threshold on the relative squared change of either estimate.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Relative singular-value cutoff for the pseudo-inverses; `None` uses
    /// machine epsilon times the larger dimension.
    #[serde(default)]
    pub pinv_tol: Option<f64>,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            epsilon: 1e-5,
            max_iters: 20,
            pinv_tol: None,
        }
    }
}

impl AlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || self.epsilon.is_infinite() {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if let Some(tol) = self.pinv_tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::Config(format!("pinv_tol must be nonnegative, got {tol}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub h1_hat: ComplexMatrix,
    pub h2_hat: ComplexMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `(H1 change, H2 change)` per iteration, both relative squared
    /// Frobenius. There is no previous `H2` at the first iteration, so its
    /// entry is `+inf` there.
    pub relative_change_history: Vec<(f64, f64)>,
    /// `||Z' - (H1^T ∘ Phi) H2^T||_F^2` after each full iteration.
    pub residual_history: Vec<f64>,
}

impl EstimationResult {
    pub fn channels(&self) -> ChannelPair {
        ChannelPair {
            h1: self.h1_hat.clone(),
            h2: self.h2_hat.clone(),
        }
    }
}

/// Initial `H1`: the `N` dominant right singular vectors of `Z''` as rows,
/// i.e. `V_N^H`. Its row space is the estimated row space of `H1`.
pub fn init_h1(z: &ReceivedTensor, n: usize) -> Result<ComplexMatrix> {
    init_h1_with_tol(z, n, None)
}

fn init_h1_with_tol(z: &ReceivedTensor, n: usize, tol: Option<f64>) -> Result<ComplexMatrix> {
    let z2 = z.stack_mode2();
    if n == 0 || n > z2.ncols() {
        return Err(Error::dim(
            "init_h1",
            format!("cannot take {n} singular vectors of a {}-column unfolding", z2.ncols()),
        ));
    }
    let tol = tol.unwrap_or_else(|| default_pinv_tol(z2.nrows(), z2.ncols()));
    let svd = z2
        .thin_svd()
        .map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let s_max = s[0].re;
    let nonzero = (0..s.nrows()).filter(|&i| s[i].re > tol * s_max && s[i].re > 0.0).count();
    if nonzero < n {
        return Err(Error::Degenerate(format!(
            "mode-2 unfolding has {nonzero} numerically nonzero singular values, need {n}"
        )));
    }
    Ok(svd.V().subcols(0, n).adjoint().to_owned())
}

fn ill_posed(step: &'static str, rank: usize, required: usize) -> Error {
    Error::IllPosed {
        step,
        rank,
        required,
        iteration: None,
    }
}

fn update_h2(
    z1: MatRef<'_, C64>,
    h1_hat: MatRef<'_, C64>,
    phi: &PhaseMatrix,
    tol: Option<f64>,
) -> Result<ComplexMatrix> {
    let n = phi.elements();
    let expected_rows = phi.phases() * h1_hat.ncols();
    if h1_hat.nrows() != n || z1.nrows() != expected_rows {
        return Err(Error::dim(
            "als_step_h2",
            format!(
                "Z' is {}x{}, H1 is {}x{}, Phi is {}x{}",
                z1.nrows(),
                z1.ncols(),
                h1_hat.nrows(),
                h1_hat.ncols(),
                phi.phases(),
                n
            ),
        ));
    }
    let a1 = khatri_rao(h1_hat.transpose(), phi.as_ref())?;
    let tol = tol.unwrap_or_else(|| default_pinv_tol(a1.nrows(), a1.ncols()));
    let pinv = pseudo_inverse(a1.as_ref(), tol)?;
    if pinv.rank < n {
        return Err(ill_posed("H2", pinv.rank, n));
    }
    Ok((&pinv.matrix * z1).transpose().to_owned())
}

fn update_h1(
    z2: MatRef<'_, C64>,
    h2_hat: MatRef<'_, C64>,
    phi: &PhaseMatrix,
    tol: Option<f64>,
) -> Result<ComplexMatrix> {
    let n = phi.elements();
    let expected_rows = phi.phases() * h2_hat.nrows();
    if h2_hat.ncols() != n || z2.nrows() != expected_rows {
        return Err(Error::dim(
            "als_step_h1",
            format!(
                "Z'' is {}x{}, H2 is {}x{}, Phi is {}x{}",
                z2.nrows(),
                z2.ncols(),
                h2_hat.nrows(),
                h2_hat.ncols(),
                phi.phases(),
                n
            ),
        ));
    }
    let a2 = khatri_rao(phi.as_ref(), h2_hat)?;
    let tol = tol.unwrap_or_else(|| default_pinv_tol(a2.nrows(), a2.ncols()));
    let pinv = pseudo_inverse(a2.as_ref(), tol)?;
    if pinv.rank < n {
        return Err(ill_posed("H1", pinv.rank, n));
    }
    Ok(&pinv.matrix * z2)
}

/// `H2 = ((H1^T ∘ Phi)^+ Z')^T`, the minimizer of `||Z' - A1 H2^T||_F`.
pub fn als_step_h2(z1: MatRef<'_, C64>, h1_hat: MatRef<'_, C64>, phi: &PhaseMatrix) -> Result<ComplexMatrix> {
    update_h2(z1, h1_hat, phi, None)
}

/// `H1 = (Phi ∘ H2)^+ Z''`, the minimizer of `||Z'' - A2 H1||_F`.
pub fn als_step_h1(z2: MatRef<'_, C64>, h2_hat: MatRef<'_, C64>, phi: &PhaseMatrix) -> Result<ComplexMatrix> {
    update_h1(z2, h2_hat, phi, None)
}

fn relative_change(new: MatRef<'_, C64>, old: MatRef<'_, C64>) -> f64 {
    let diff = frobenius_sq((new - old).as_ref());
    let norm = frobenius_sq(new);
    if norm > 0.0 {
        diff / norm
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn check_tensor_against_phase(z: &ReceivedTensor, phi: &PhaseMatrix) -> Result<()> {
    if z.phases() != phi.phases() {
        return Err(Error::dim(
            "als_estimate",
            format!("tensor has {} slices but Phi has {} rows", z.phases(), phi.phases()),
        ));
    }
    feasibility(z.antennas(), z.users(), phi.elements(), phi.phases()).into_result()
}

/// Full estimator: initialise `H1` from the mode-2 unfolding, then alternate
/// [`als_step_h2`] and [`als_step_h1`].
pub fn als_estimate(z: &ReceivedTensor, phi: &PhaseMatrix, cfg: &AlsConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    check_tensor_against_phase(z, phi)?;
    let h1_init = init_h1_with_tol(z, phi.elements(), cfg.pinv_tol)?;
    als_estimate_from(z, phi, cfg, h1_init)
}

/// The iteration loop from a caller-supplied `H1` starting point.
///
/// Stops after iteration `i` when the relative squared change of `H1` or of
/// `H2` is at most `epsilon`, or when `i == max_iters`.
pub fn als_estimate_from(
    z: &ReceivedTensor,
    phi: &PhaseMatrix,
    cfg: &AlsConfig,
    h1_init: ComplexMatrix,
) -> Result<EstimationResult> {
    cfg.validate()?;
    check_tensor_against_phase(z, phi)?;
    if h1_init.shape() != (phi.elements(), z.antennas()) {
        return Err(Error::dim(
            "als_estimate",
            format!(
                "initial H1 is {}x{}, expected {}x{}",
                h1_init.nrows(),
                h1_init.ncols(),
                phi.elements(),
                z.antennas()
            ),
        ));
    }
    let z1 = z.stack_mode1();
    let z2 = z.stack_mode2();

    let mut h1 = h1_init;
    let mut h2: Option<ComplexMatrix> = None;
    let mut changes = Vec::with_capacity(cfg.max_iters);
    let mut residuals = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;

    for i in 1..=cfg.max_iters {
        let h2_new = update_h2(z1.as_ref(), h1.as_ref(), phi, cfg.pinv_tol).map_err(|e| e.at_iteration(i))?;
        let h1_new = update_h1(z2.as_ref(), h2_new.as_ref(), phi, cfg.pinv_tol).map_err(|e| e.at_iteration(i))?;

        let d1 = relative_change(h1_new.as_ref(), h1.as_ref());
        let d2 = h2
            .as_ref()
            .map_or(f64::INFINITY, |old| relative_change(h2_new.as_ref(), old.as_ref()));
        changes.push((d1, d2));

        let fit = khatri_rao(h1_new.transpose(), phi.as_ref())? * h2_new.transpose();
        residuals.push(frobenius_sq((&z1 - &fit).as_ref()));

        h1 = h1_new;
        h2 = Some(h2_new);
        if d1 <= cfg.epsilon || d2 <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok(EstimationResult {
        h1_hat: h1,
        h2_hat: h2.expect("max_iters >= 1"),
        iterations: changes.len(),
        converged,
        relative_change_history: changes,
        residual_history: residuals,
    })
}

/// LS estimate of `H2` with `H1` known exactly.
pub fn genie_ls_h2(z: &ReceivedTensor, h1_true: MatRef<'_, C64>, phi: &PhaseMatrix) -> Result<ComplexMatrix> {
    check_tensor_against_phase(z, phi)?;
    als_step_h2(z.stack_mode1().as_ref(), h1_true, phi)
}

/// LS estimate of `H1` with `H2` known exactly.
pub fn genie_ls_h1(z: &ReceivedTensor, h2_true: MatRef<'_, C64>, phi: &PhaseMatrix) -> Result<ComplexMatrix> {
    check_tensor_against_phase(z, phi)?;
    als_step_h1(z.stack_mode2().as_ref(), h2_true, phi)
}

/// Tensor implied by a factor pair, for reconstruction checks.
pub fn reconstruct(pair: &ChannelPair, phi: &PhaseMatrix) -> Result<ReceivedTensor> {
    let slices = crate::tensor::model_slices(pair.h1.as_ref(), pair.h2.as_ref(), phi.as_ref())?;
    ReceivedTensor::from_slices(slices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{dft_phase, generate_channels, generate_pilots, simulate_received, NoiseSpec};
    use crate::metrics::aligned_nmse;
    use crate::tensor::{matrix_from_rows, unfold_mode1, unfold_mode2};
    use faer::Mat;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn instance(dims: SystemDims, seed: u64, snr_db: f64) -> (ChannelPair, PhaseMatrix, ReceivedTensor) {
        let truth = generate_channels(&dims, seed).unwrap();
        let phi = dft_phase(dims.p, dims.n).unwrap();
        let x = generate_pilots(dims.m, dims.t).unwrap();
        let noise = NoiseSpec::from_snr_db(snr_db).unwrap();
        let z = simulate_received(&dims, &truth, &phi, &x, &noise, seed ^ 0xabc).unwrap();
        (truth, phi, z)
    }

    fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
        (0..a.nrows())
            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
            .fold(0.0, f64::max)
    }

    fn small() -> SystemDims {
        SystemDims::new(8, 8, 4, 4, 8).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let fig2 = SystemDims::new(32, 16, 16, 16, 32).unwrap();
        assert!(check_feasibility(&fig2).is_feasible());
        let fig4 = SystemDims::new(64, 64, 64, 40, 64).unwrap();
        assert!(check_feasibility(&fig4).is_feasible());
        let bad = SystemDims::new(4, 2, 3, 2, 4).unwrap();
        let report = check_feasibility(&bad);
        assert_eq!(report.violations, vec![Violation::UsersBelowElements { k: 2, n: 3 }]);
        assert_eq!(report.to_string(), "K >= N violated (K=2, N=3)");
        let all = SystemDims::new(2, 2, 3, 4, 2).unwrap();
        assert_eq!(check_feasibility(&all).violations.len(), 3);
    }

    #[test]
    fn default_config_matches_reference_settings() {
        let cfg = AlsConfig::default();
        assert_eq!(cfg.epsilon, 1e-5);
        assert_eq!(cfg.max_iters, 20);
        assert!(AlsConfig { epsilon: 0.0, ..cfg }.validate().is_err());
        assert!(AlsConfig { max_iters: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn scalar_steps() {
        let phi = PhaseMatrix::new(matrix_from_rows(&[vec![c(1.0)]]).unwrap()).unwrap();
        let z = matrix_from_rows(&[vec![c(6.0)]]).unwrap();
        let h1 = matrix_from_rows(&[vec![c(3.0)]]).unwrap();
        let h2 = matrix_from_rows(&[vec![c(2.0)]]).unwrap();
        let got = als_step_h2(z.as_ref(), h1.as_ref(), &phi).unwrap();
        assert!((got[(0, 0)] - c(2.0)).norm() < 1e-15);
        let got = als_step_h1(z.as_ref(), h2.as_ref(), &phi).unwrap();
        assert!((got[(0, 0)] - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_steps() {
        let (truth, phi, _) = instance(small(), 1, f64::INFINITY);
        let z1 = Mat::<C64>::zeros(4 * 8, 8);
        let z2 = Mat::<C64>::zeros(4 * 8, 8);
        let h2 = als_step_h2(z1.as_ref(), truth.h1.as_ref(), &phi).unwrap();
        assert_eq!(h2.shape(), (8, 4));
        assert_eq!(frobenius_sq(h2.as_ref()), 0.0);
        let h1 = als_step_h1(z2.as_ref(), truth.h2.as_ref(), &phi).unwrap();
        assert_eq!(h1.shape(), (4, 8));
        assert_eq!(frobenius_sq(h1.as_ref()), 0.0);
    }

    #[test]
    fn steps_recover_truth_from_exact_other_factor() {
        let (truth, phi, _) = instance(small(), 2, f64::INFINITY);
        let z1 = unfold_mode1(truth.h1.as_ref(), truth.h2.as_ref(), phi.as_ref()).unwrap();
        let z2 = unfold_mode2(truth.h1.as_ref(), truth.h2.as_ref(), phi.as_ref()).unwrap();
        let h2 = als_step_h2(z1.as_ref(), truth.h1.as_ref(), &phi).unwrap();
        assert!(max_abs_diff(h2.as_ref(), truth.h2.as_ref()) < 1e-10);
        let h1 = als_step_h1(z2.as_ref(), truth.h2.as_ref(), &phi).unwrap();
        assert!(max_abs_diff(h1.as_ref(), truth.h1.as_ref()) < 1e-10);
    }

    #[test]
    fn rank_deficient_update_is_ill_posed() {
        let (truth, phi, _) = instance(small(), 3, f64::INFINITY);
        let z1 = Mat::<C64>::zeros(4 * 8, 8);
        let mut h1 = truth.h1.clone();
        for m in 0..8 {
            h1[(1, m)] = h1[(0, m)];
        }
        // with Phi columns 0 and 1 distinct the product still has full rank,
        // so zero a whole row instead
        for m in 0..8 {
            h1[(2, m)] = c(0.0);
        }
        match als_step_h2(z1.as_ref(), h1.as_ref(), &phi) {
            Err(Error::IllPosed { step: "H2", rank: 3, required: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(als_step_h2(Mat::<C64>::zeros(5, 8).as_ref(), truth.h1.as_ref(), &phi).is_err());
    }

    #[test]
    fn init_spans_true_row_space() {
        let (truth, _, z) = instance(small(), 4, f64::INFINITY);
        let v = init_h1(&z, 4).unwrap();
        assert_eq!(v.shape(), (4, 8));
        // rows are orthonormal
        let gram = &v * v.adjoint();
        assert!(max_abs_diff(gram.as_ref(), Mat::<C64>::identity(4, 4).as_ref()) < 1e-12);
        // projecting H1 onto the row space of v loses nothing
        let proj = &truth.h1 * v.adjoint() * &v;
        let resid = frobenius_sq((&truth.h1 - &proj).as_ref()) / frobenius_sq(truth.h1.as_ref());
        assert!(resid < 1e-12, "{resid}");
    }

    #[test]
    fn init_square_case_is_unitary() {
        let dims = SystemDims::new(4, 4, 4, 4, 4).unwrap();
        let (_, _, z) = instance(dims, 5, f64::INFINITY);
        let v = init_h1(&z, 4).unwrap();
        let gram = v.adjoint() * &v;
        assert!(max_abs_diff(gram.as_ref(), Mat::<C64>::identity(4, 4).as_ref()) < 1e-12);
    }

    #[test]
    fn init_rejects_zero_tensor() {
        let z = ReceivedTensor::from_slices(vec![Mat::<C64>::zeros(8, 8); 4]).unwrap();
        assert!(matches!(init_h1(&z, 4), Err(Error::Degenerate(_))));
    }

    #[test]
    fn seeded_at_truth_converges_immediately() {
        let (truth, phi, z) = instance(small(), 6, f64::INFINITY);
        let res = als_estimate_from(&z, &phi, &AlsConfig::default(), truth.h1.clone()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.relative_change_history.len(), 1);
        assert!(res.relative_change_history[0].1.is_infinite());
        assert!(max_abs_diff(res.h1_hat.as_ref(), truth.h1.as_ref()) < 1e-10);
    }

    #[test]
    fn noiseless_recovery_over_many_seeds() {
        for seed in 0..100 {
            let (truth, phi, z) = instance(small(), 1000 + seed, f64::INFINITY);
            let res = als_estimate(&z, &phi, &AlsConfig::default()).unwrap();
            assert!(res.iterations <= 20);
            assert_eq!(res.relative_change_history.len(), res.iterations);
            let rec = aligned_nmse(&truth, &res.channels()).unwrap();
            assert!(rec.nmse_h1 <= 1e-8 && rec.nmse_h2 <= 1e-8, "seed {seed}: {rec:?}");
        }
    }

    #[test]
    fn residuals_do_not_increase_on_noiseless_data() {
        let dims = SystemDims::new(8, 6, 6, 3, 8).unwrap();
        for seed in 0..20 {
            let (_, phi, z) = instance(dims, 50 + seed, f64::INFINITY);
            let cfg = AlsConfig {
                epsilon: 1e-14,
                ..AlsConfig::default()
            };
            let res = als_estimate(&z, &phi, &cfg).unwrap();
            for w in res.residual_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "seed {seed}: {:?}", res.residual_history);
            }
        }
    }

    #[test]
    fn rescaled_factors_give_the_same_tensor() {
        let (truth, phi, _) = instance(small(), 7, f64::INFINITY);
        let lambda = [c(2.0), C64::new(0.0, -1.5), C64::new(0.3, 0.4), c(-7.0)];
        let scaled = ChannelPair {
            h1: Mat::from_fn(4, 8, |n, m| truth.h1[(n, m)] / lambda[n]),
            h2: Mat::from_fn(8, 4, |k, n| truth.h2[(k, n)] * lambda[n]),
        };
        let a = reconstruct(&truth, &phi).unwrap();
        let b = reconstruct(&scaled, &phi).unwrap();
        for (x, y) in a.slices().iter().zip(b.slices()) {
            assert!(max_abs_diff(x.as_ref(), y.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn genie_is_one_half_step_at_truth() {
        let (truth, phi, z) = instance(small(), 8, 15.0);
        let g2 = genie_ls_h2(&z, truth.h1.as_ref(), &phi).unwrap();
        let s2 = als_step_h2(z.stack_mode1().as_ref(), truth.h1.as_ref(), &phi).unwrap();
        assert_eq!(g2, s2);
        let g1 = genie_ls_h1(&z, truth.h2.as_ref(), &phi).unwrap();
        let s1 = als_step_h1(z.stack_mode2().as_ref(), truth.h2.as_ref(), &phi).unwrap();
        assert_eq!(g1, s1);

        let (truth, phi, z) = instance(small(), 9, f64::INFINITY);
        let g1 = genie_ls_h1(&z, truth.h2.as_ref(), &phi).unwrap();
        assert!(max_abs_diff(g1.as_ref(), truth.h1.as_ref()) < 1e-10);
        let g2 = genie_ls_h2(&z, truth.h1.as_ref(), &phi).unwrap();
        assert!(max_abs_diff(g2.as_ref(), truth.h2.as_ref()) < 1e-10);
    }

    #[test]
    fn infeasible_or_mismatched_inputs_are_rejected() {
        let (_, _, z) = instance(small(), 10, 20.0);
        let wrong_p = dft_phase(3, 4).unwrap();
        assert!(als_estimate(&z, &wrong_p, &AlsConfig::default()).is_err());
        let too_many = dft_phase(4, 9).unwrap();
        assert!(matches!(
            als_estimate(&z, &too_many, &AlsConfig::default()),
            Err(Error::Infeasible(_))
        ));
        let phi = dft_phase(4, 4).unwrap();
        let bad_init = Mat::<C64>::zeros(3, 8);
        assert!(als_estimate_from(&z, &phi, &AlsConfig::default(), bad_init).is_err());
    }

    #[test]
    fn iteration_cap_is_respected() {
        let (_, phi, z) = instance(SystemDims::new(8, 8, 8, 4, 8).unwrap(), 11, 0.0);
        let cfg = AlsConfig {
            epsilon: 1e-300,
            max_iters: 3,
            pinv_tol: None,
        };
        let res = als_estimate(&z, &phi, &cfg).unwrap();
        assert_eq!(res.iterations, 3);
        assert!(!res.converged);
        assert_eq!(res.residual_history.len(), 3);
    }
}
