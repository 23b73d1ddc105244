use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{outer, CMatrix, CVector};

/// A ray of a finite-dimensional Hilbert space, stored as a unit vector.
///
/// The vector representative is arbitrary up to a global phase; use
/// [`PureState::same_ray`] for physical equality.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;
    const RAY_TOL: f64 = 1e-10;

    /// Wraps an amplitude vector, requiring unit norm within `1e-12`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "norm {norm} deviates from 1 by more than {}",
                Self::NORM_TOL
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidState("cannot normalize a (near-)zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    /// Computational basis state `|i>`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index out of range");
        Self { amplitudes: crate::linalg::basis_vector(dim, i) }
    }

    /// `(|00> + |11> + ...)/sqrt(d)` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = w;
        }
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Ray equality: `|<psi|phi>| >= 1 - 1e-10`.
    pub fn same_ray(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.inner(other).norm() >= 1.0 - Self::RAY_TOL
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { amplitudes: crate::linalg::kron_vec(&self.amplitudes, &other.amplitudes) }
    }

    /// `|psi><psi|`
    pub fn projector(&self) -> CMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { matrix: self.projector() }
    }
}

/// Which tensor factor of a bipartite system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// A validated density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const EIGENVALUE_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.is_empty() {
            return Err(Error::InvalidDensity("matrix must be square and nonempty".into()));
        }
        let herm = crate::linalg::hermiticity_error(&matrix);
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity deviation {herm:.3e}")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > Self::TRACE_TOL || trace.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} deviates from 1")));
        }
        let (lo, _) = crate::linalg::hermitian_eig_bounds(&matrix);
        if lo < -Self::EIGENVALUE_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: crate::linalg::identity(dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues, ascending. Valid inputs give values in `[-1e-10, 1+1e-10]`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// `tr(rho^2)`; equals the squared Frobenius norm for Hermitian input.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Traces out one tensor factor of a bipartite density matrix.
pub fn partial_trace(
    state: &DensityMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let (a, b) = dims;
    if a * b != state.dim() {
        return Err(Error::BadFactorization { dim: state.dim(), a, b });
    }
    let rho = state.matrix();
    let kept = match keep {
        Subsystem::A => a,
        Subsystem::B => b,
    };
    let mut out = CMatrix::zeros(kept, kept);
    match keep {
        Subsystem::A => {
            for i in 0..a {
                for i2 in 0..a {
                    let mut acc = Complex64::ZERO;
                    for j in 0..b {
                        acc += rho[(i * b + j, i2 * b + j)];
                    }
                    out[(i, i2)] = acc;
                }
            }
        }
        Subsystem::B => {
            for j in 0..b {
                for j2 in 0..b {
                    let mut acc = Complex64::ZERO;
                    for i in 0..a {
                        acc += rho[(i * b + j, i * b + j2)];
                    }
                    out[(j, j2)] = acc;
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// Reduced density matrix of a bipartite pure state, by direct contraction.
pub fn reduced_density(
    psi: &PureState,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let (a, b) = dims;
    if a * b != psi.dim() {
        return Err(Error::BadFactorization { dim: psi.dim(), a, b });
    }
    let v = psi.amplitudes();
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(a, a, |i, i2| {
            (0..b).map(|j| v[i * b + j] * v[i2 * b + j].conj()).sum()
        }),
        Subsystem::B => CMatrix::from_fn(b, b, |j, j2| {
            (0..a).map(|i| v[i * b + j] * v[i * b + j2].conj()).sum()
        }),
    };
    DensityMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::{c, identity, kron, max_abs};

    fn bell() -> PureState {
        PureState::maximally_entangled(2)
    }

    #[test]
    fn rejects_unnormalized() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(PureState::new(v).is_err());
    }

    #[test]
    fn ray_equality_ignores_global_phase() {
        let psi = PureState::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = PureState::new(psi.amplitudes().map(|z| z * phase)).unwrap();
        assert!(psi.same_ray(&rotated));
        let other = PureState::basis(2, 0);
        assert!(!psi.same_ray(&other));
    }

    #[test]
    fn bell_partial_trace_is_maximally_mixed() {
        let rho = partial_trace(&bell().density(), (2, 2), Subsystem::A).unwrap();
        assert!(max_abs(&(rho.matrix() - identity(2).unscale(2.0))) < 1e-14);
    }

    #[test]
    fn product_state_partial_trace_recovers_factor() {
        let mut rng = haar::seeded_rng(11);
        let psi = haar::haar_state(2, &mut rng);
        let phi = haar::haar_state(3, &mut rng);
        let joint = psi.tensor(&phi);
        let rho = partial_trace(&joint.density(), (2, 3), Subsystem::A).unwrap();
        assert!(max_abs(&(rho.matrix() - psi.projector())) < 1e-12);
        let rho_b = partial_trace(&joint.density(), (2, 3), Subsystem::B).unwrap();
        assert!(max_abs(&(rho_b.matrix() - phi.projector())) < 1e-12);
    }

    // Independent route: rho_A[i,i'] = tr(rho * (|i'><i| (x) 1_b)).
    fn partial_trace_oracle(rho: &CMatrix, a: usize, b: usize) -> CMatrix {
        CMatrix::from_fn(a, a, |i, i2| {
            let e = outer(
                &crate::linalg::basis_vector(a, i2),
                &crate::linalg::basis_vector(a, i),
            );
            (rho * kron(&e, &identity(b))).trace()
        })
    }

    #[test]
    fn partial_trace_matches_operator_oracle() {
        let mut rng = haar::seeded_rng(5);
        let psi = haar::haar_state(6, &mut rng);
        let got = partial_trace(&psi.density(), (2, 3), Subsystem::A).unwrap();
        let expect = partial_trace_oracle(&psi.projector(), 2, 3);
        assert!(max_abs(&(got.matrix() - expect)) < 1e-12);
    }

    #[test]
    fn random_bipartite_reductions_are_states() {
        let mut rng = haar::seeded_rng(7);
        for _ in 0..1000 {
            let psi = haar::haar_state(6, &mut rng);
            let rho = reduced_density(&psi, (2, 3), Subsystem::A).unwrap();
            // DensityMatrix::new validated PSD and unit trace; spot-check.
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
            assert!(rho.eigenvalues()[0] > -1e-10);
        }
    }

    #[test]
    fn reduced_density_agrees_with_partial_trace() {
        let mut rng = haar::seeded_rng(13);
        for _ in 0..50 {
            let psi = haar::haar_state(6, &mut rng);
            let via_rho = partial_trace(&psi.density(), (3, 2), Subsystem::B).unwrap();
            let direct = reduced_density(&psi, (3, 2), Subsystem::B).unwrap();
            assert!(max_abs(&(via_rho.matrix() - direct.matrix())) < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let psi = PureState::basis(6, 0);
        assert!(matches!(
            reduced_density(&psi, (4, 2), Subsystem::A),
            Err(Error::BadFactorization { .. })
        ));
    }
}
