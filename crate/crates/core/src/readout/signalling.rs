use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::quantum::{Povm, PureState};

use super::devices::{device_distribution, Device};
use super::distribution::OutcomeDistribution;
use super::mixture::ProperMixture;

/// Parts with weight below this are dropped after a remote measurement.
const PART_EPSILON: f64 = 1e-12;

/// Projective measurement on the B side of a bipartite pure state,
/// producing the proper mixture of collapsed states
/// `psi_x = (1 (x) Q_x) psi / sqrt(p_x)` with `p_x = <psi|1 (x) Q_x|psi>`.
pub fn remote_projective_measure(
    psi: &PureState,
    dims: (usize, usize),
    remote: &Povm,
) -> Result<ProperMixture> {
    let (a, b) = dims;
    if psi.dim() != a * b {
        return Err(Error::BadFactorization { dim: psi.dim(), a, b });
    }
    if remote.dim() != b {
        return Err(Error::DimensionMismatch { expected: b, actual: remote.dim() });
    }
    let projectivity = remote.projectivity_error();
    if projectivity > 1e-10 {
        return Err(Error::NotProjective { deviation: projectivity });
    }

    let v = psi.amplitudes();
    let mut parts: Vec<(f64, PureState)> = Vec::new();
    for q in remote.effects() {
        // (1_a (x) Q) psi without forming the Kronecker product
        let mut collapsed = CVector::zeros(a * b);
        for i in 0..a {
            for j in 0..b {
                let mut acc = Complex64::ZERO;
                for j2 in 0..b {
                    acc += q[(j, j2)] * v[i * b + j2];
                }
                collapsed[i * b + j] = acc;
            }
        }
        let p = collapsed.norm_squared();
        if p < PART_EPSILON {
            continue;
        }
        parts.push((p, PureState::normalized(collapsed)?));
    }
    // renormalize the surviving weights (drops remove at most ~1e-12 each)
    let total: f64 = parts.iter().map(|(p, _)| *p).sum();
    for (p, _) in parts.iter_mut() {
        *p /= total;
    }
    ProperMixture::new(parts, dims)
}

/// Device statistics before and after a remote projective measurement.
#[derive(Debug, Clone, Serialize)]
pub struct SignallingReport {
    pub device: String,
    pub baseline: OutcomeDistribution,
    pub post_measurement: OutcomeDistribution,
    pub tv_distance: f64,
    pub tol: f64,
    pub signalling: bool,
}

/// Compares a device's outcome distribution on `{(1, psi)}` against the
/// proper mixture created by measuring `remote` on subsystem B. A total
/// variation distance above `tol` flags signalling.
pub fn detect_signalling(
    psi: &PureState,
    dims: (usize, usize),
    remote: &Povm,
    device: &Device,
    tol: f64,
) -> Result<SignallingReport> {
    let baseline_input = ProperMixture::from_pure(psi.clone(), dims)?;
    let post_input = remote_projective_measure(psi, dims, remote)?;
    let baseline = device_distribution(device, &baseline_input)?;
    let post_measurement = device_distribution(device, &post_input)?;
    let tv_distance = baseline.tv_distance(&post_measurement);
    Ok(SignallingReport {
        device: device.label(),
        baseline,
        post_measurement,
        tv_distance,
        tol,
        signalling: tv_distance > tol,
    })
}
