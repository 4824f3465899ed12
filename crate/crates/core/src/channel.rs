//! Signal model: channels, RIS phase training, pilots, noise and the
//! received tensor after pilot removal.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, complex_gaussian};
use crate::tensor::{model_slices, ComplexMatrix, C64};

/// `(M, K, N, P, T)`: BS antennas, users, RIS elements, training phases and
/// pilot slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemDims {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub p: usize,
    pub t: usize,
}

impl SystemDims {
    pub fn new(m: usize, k: usize, n: usize, p: usize, t: usize) -> Result<Self> {
        let dims = SystemDims { m, k, n, p, t };
        dims.validate()?;
        Ok(dims)
    }

    /// Positivity and `T >= M`. Identifiability is a separate question, see
    /// [`check_feasibility`](crate::estimator::check_feasibility).
    pub fn validate(&self) -> Result<()> {
        let SystemDims { m, k, n, p, t } = *self;
        if [m, k, n, p, t].contains(&0) {
            return Err(Error::InvalidDims(format!(
                "all of M, K, N, P, T must be positive (got M={m}, K={k}, N={n}, P={p}, T={t})"
            )));
        }
        if t < m {
            return Err(Error::InvalidDims(format!(
                "T >= M required for pilot orthogonality (got T={t}, M={m})"
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self) -> bool {
        crate::estimator::check_feasibility(self).is_feasible()
    }
}

/// `H1` (`N x M`, RIS to BS side) and `H2` (`K x N`, users to RIS side).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
}

impl ChannelPair {
    pub fn new(h1: ComplexMatrix, h2: ComplexMatrix) -> Result<Self> {
        if h1.nrows() != h2.ncols() {
            return Err(Error::dim(
                "channel pair",
                format!("H1 has {} rows but H2 has {} columns", h1.nrows(), h2.ncols()),
            ));
        }
        Ok(ChannelPair { h1, h2 })
    }

    pub fn elements(&self) -> usize {
        self.h1.nrows()
    }
}

/// `P x N` matrix of unit-modulus RIS training configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix(ComplexMatrix);

impl PhaseMatrix {
    const MODULUS_TOL: f64 = 1e-9;

    pub fn new(phi: ComplexMatrix) -> Result<Self> {
        for i in 0..phi.nrows() {
            for j in 0..phi.ncols() {
                let z: C64 = phi[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if (z.norm() - 1.0).abs() > Self::MODULUS_TOL {
                    return Err(Error::Degenerate(format!(
                        "phase entry ({i}, {j}) has modulus {}",
                        z.norm()
                    )));
                }
            }
        }
        Ok(PhaseMatrix(phi))
    }

    pub fn phases(&self) -> usize {
        self.0.nrows()
    }

    pub fn elements(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_ref(&self) -> MatRef<'_, C64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// `D_p = diag(Phi[p, :])`.
    pub fn diag(&self, p: usize) -> ComplexMatrix {
        let n = self.elements();
        Mat::from_fn(n, n, |i, j| if i == j { self.0[(p, i)] } else { C64::new(0.0, 0.0) })
    }
}

/// `M x T` pilot block with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix(ComplexMatrix);

impl PilotMatrix {
    const ORTHO_TOL: f64 = 1e-10;

    pub fn new(x: ComplexMatrix) -> Result<Self> {
        if x.nrows() > x.ncols() {
            return Err(Error::InvalidDims(format!(
                "pilot block {}x{} cannot have orthonormal rows",
                x.nrows(),
                x.ncols()
            )));
        }
        let gram = &x * x.adjoint();
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - C64::new(target, 0.0)).norm() > Self::ORTHO_TOL {
                    return Err(Error::Degenerate("pilot rows are not orthonormal".into()));
                }
            }
        }
        Ok(PilotMatrix(x))
    }

    pub fn as_ref(&self) -> MatRef<'_, C64> {
        self.0.as_ref()
    }
}

/// Per-entry noise variance `sigma2 = 10^(-snr_db / 10)`. Channels and pilots
/// have unit per-entry power, so 0 dB means unit-variance noise.
/// `snr_db = +inf` is the noiseless model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub sigma2: f64,
}

impl NoiseSpec {
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("invalid SNR {snr_db} dB")));
        }
        Ok(NoiseSpec {
            snr_db,
            sigma2: 10f64.powf(-snr_db / 10.0),
        })
    }

    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        if sigma2.is_nan() || sigma2 < 0.0 || sigma2.is_infinite() {
            return Err(Error::Config(format!("invalid noise variance {sigma2}")));
        }
        Ok(NoiseSpec {
            snr_db: -10.0 * sigma2.log10(),
            sigma2,
        })
    }

    pub fn noiseless() -> Self {
        NoiseSpec {
            snr_db: f64::INFINITY,
            sigma2: 0.0,
        }
    }
}

/// Where a received tensor came from, when known.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub dims: Option<SystemDims>,
    pub noise_seed: Option<u64>,
    pub snr_db: Option<f64>,
}

/// The `P` post-pilot-removal slices `Z~_p`, each `K x M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedTensor {
    slices: Vec<ComplexMatrix>,
    pub provenance: Provenance,
}

impl ReceivedTensor {
    pub fn from_slices(slices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::dim("received tensor", "no slices"))?;
        let shape = first.shape();
        if slices.iter().any(|s| s.shape() != shape) {
            return Err(Error::dim("received tensor", "slices differ in shape"));
        }
        Ok(ReceivedTensor {
            slices,
            provenance: Provenance::default(),
        })
    }

    pub fn slices(&self) -> &[ComplexMatrix] {
        &self.slices
    }

    pub fn users(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn antennas(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn phases(&self) -> usize {
        self.slices.len()
    }

    /// `Z~'`, `PM x K`: row `m * P + p`, column `k` holds `Z~_p[k, m]`.
    pub fn stack_mode1(&self) -> ComplexMatrix {
        let (k, m, p) = (self.users(), self.antennas(), self.phases());
        Mat::from_fn(p * m, k, |r, c| self.slices[r % p][(c, r / p)])
    }

    /// `Z~''`, `KP x M`: row `p * K + k`, column `m` holds `Z~_p[k, m]`.
    pub fn stack_mode2(&self) -> ComplexMatrix {
        let (k, m, p) = (self.users(), self.antennas(), self.phases());
        Mat::from_fn(k * p, m, |r, c| self.slices[r / k][(r % k, c)])
    }
}

/// I.i.d. CN(0, 1) channels. `H1` is drawn first, row-major, then `H2`.
pub fn generate_channels(dims: &SystemDims, seed: u64) -> Result<ChannelPair> {
    dims.validate()?;
    let mut rng = rng::stream(seed);
    let mut draw = |rows: usize, cols: usize| {
        let mut mat = Mat::<C64>::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                mat[(i, j)] = complex_gaussian(&mut rng, 1.0);
            }
        }
        mat
    };
    let h1 = draw(dims.n, dims.m);
    let h2 = draw(dims.k, dims.n);
    Ok(ChannelPair { h1, h2 })
}

/// `exp(-j 2 pi (a * b mod len) / len)`, reduced before the trig call so
/// exact points like `-1` come out exact.
fn dft_entry(a: usize, b: usize, len: usize) -> C64 {
    let idx = (a * b) % len;
    let angle = -2.0 * PI * idx as f64 / len as f64;
    C64::from_polar(1.0, angle)
}

/// First `P` rows of the `N`-point DFT matrix (unnormalized, unit modulus),
/// so `Phi Phi^H = N I_P`.
pub fn dft_phase(p: usize, n: usize) -> Result<PhaseMatrix> {
    if p == 0 || n == 0 {
        return Err(Error::InvalidDims(format!("P={p}, N={n} must be positive")));
    }
    if p > n {
        return Err(Error::Infeasible(crate::estimator::FeasibilityReport::phases_only(p, n)));
    }
    Ok(PhaseMatrix(Mat::from_fn(p, n, |i, j| dft_entry(i, j, n))))
}

/// First `M` rows of the unitary `T`-point DFT matrix, so `X X^H = I_M`.
pub fn generate_pilots(m: usize, t: usize) -> Result<PilotMatrix> {
    if m == 0 || t < m {
        return Err(Error::InvalidDims(format!(
            "pilots need 0 < M <= T (got M={m}, T={t})"
        )));
    }
    let scale = 1.0 / (t as f64).sqrt();
    Ok(PilotMatrix(Mat::from_fn(m, t, |i, j| dft_entry(i, j, t) * scale)))
}

/// `Y_p = H2 D_p(Phi) H1 X + W_p` for every training phase `p`, with `W_p`
/// i.i.d. CN(0, sigma2) drawn from the stream seeded by `noise_seed`
/// (slice by slice, row-major within a slice).
pub fn synthesize_received(
    channels: &ChannelPair,
    phi: &PhaseMatrix,
    x: &PilotMatrix,
    noise: &NoiseSpec,
    noise_seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    if x.as_ref().nrows() != channels.h1.ncols() {
        return Err(Error::dim(
            "synthesize_received",
            format!(
                "pilots have {} rows but H1 has {} columns",
                x.as_ref().nrows(),
                channels.h1.ncols()
            ),
        ));
    }
    let slices = model_slices(channels.h1.as_ref(), channels.h2.as_ref(), phi.as_ref())?;
    let mut rng = rng::stream(noise_seed);
    Ok(slices
        .into_iter()
        .map(|z| {
            let mut y = z * x.as_ref();
            if noise.sigma2 > 0.0 {
                for i in 0..y.nrows() {
                    for j in 0..y.ncols() {
                        y[(i, j)] += complex_gaussian(&mut rng, noise.sigma2);
                    }
                }
            }
            y
        })
        .collect())
}

/// `Z~_p = Y_p X^H`.
pub fn remove_pilots(y: &[ComplexMatrix], x: &PilotMatrix) -> Result<ReceivedTensor> {
    let t = x.as_ref().ncols();
    if let Some(bad) = y.iter().find(|s| s.ncols() != t) {
        return Err(Error::dim(
            "remove_pilots",
            format!("slice has {} columns, pilots span {t} slots", bad.ncols()),
        ));
    }
    ReceivedTensor::from_slices(y.iter().map(|s| s * x.as_ref().adjoint()).collect())
}

/// Channels, phase training, pilots and noise composed into the received
/// tensor, with provenance filled in.
pub fn simulate_received(
    dims: &SystemDims,
    channels: &ChannelPair,
    phi: &PhaseMatrix,
    x: &PilotMatrix,
    noise: &NoiseSpec,
    noise_seed: u64,
) -> Result<ReceivedTensor> {
    let y = synthesize_received(channels, phi, x, noise, noise_seed)?;
    let mut z = remove_pilots(&y, x)?;
    z.provenance = Provenance {
        dims: Some(*dims),
        noise_seed: Some(noise_seed),
        snr_db: Some(noise.snr_db),
    };
    Ok(z)
}
