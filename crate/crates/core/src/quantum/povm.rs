use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::state::{DensityMatrix, PureState};

/// A positive operator-valued measure: effects `0 <= X_i <= 1` summing to
/// the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub const BOUND_TOL: f64 = 1e-10;
    pub const COMPLETENESS_TOL: f64 = 1e-10;

    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let dim = effects[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, x) in effects.iter().enumerate() {
            if !x.is_square() || x.nrows() != dim {
                return Err(Error::InvalidPovm(format!("effect {i} has inconsistent shape")));
            }
            let herm = linalg::hermiticity_error(x);
            if herm > Self::BOUND_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} hermiticity deviation {herm:.3e}"
                )));
            }
            let (lo, hi) = linalg::hermitian_eig_bounds(x);
            if lo < -Self::BOUND_TOL || hi > 1.0 + Self::BOUND_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} eigenvalues [{lo:.3e}, {hi:.3e}] outside [0, 1]"
                )));
            }
            sum += x;
        }
        let dev = linalg::max_abs(&(sum - linalg::identity(dim)));
        if dev > Self::COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("effects sum deviates from 1 by {dev:.3e}")));
        }
        Ok(Self { effects })
    }

    /// Computational-basis projectors on `C^dim`.
    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|i| {
                let e = linalg::basis_vector(dim, i);
                linalg::outer(&e, &e)
            })
            .collect();
        Self { effects }
    }

    /// Rank-1 projectors onto the columns of a unitary.
    pub fn basis_projectors(u: &CMatrix) -> Result<Self> {
        let dev = linalg::unitarity_error(u);
        if dev > 1e-10 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let effects = (0..u.ncols())
            .map(|i| {
                let col = u.column(i).clone_owned();
                linalg::outer(&col, &col)
            })
            .collect();
        Ok(Self { effects })
    }

    /// The trivial single-outcome measurement.
    pub fn trivial(dim: usize) -> Self {
        Self { effects: vec![linalg::identity(dim)] }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &CMatrix {
        &self.effects[i]
    }

    /// Largest deviation of any effect from being a projector.
    pub fn projectivity_error(&self) -> f64 {
        self.effects
            .iter()
            .map(|x| linalg::max_abs(&(x * x - x)))
            .fold(0.0, f64::max)
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.projectivity_error() <= tol
    }

    /// Born-rule outcome probabilities on a pure state.
    pub fn born_probs(&self, psi: &PureState) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: psi.dim() });
        }
        Ok(self
            .effects
            .iter()
            .map(|x| {
                let v = psi.amplitudes();
                (v.adjoint() * x * v)[(0, 0)].re.clamp(0.0, 1.0)
            })
            .collect())
    }

    /// Born-rule outcome probabilities on a density matrix.
    pub fn born_probs_density(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rho.dim() });
        }
        Ok(self
            .effects
            .iter()
            .map(|x| (x * rho.matrix()).trace().re.clamp(0.0, 1.0))
            .collect())
    }
}

#[allow(dead_code)]
fn effect_expectation(x: &CMatrix, psi: &PureState) -> Complex64 {
    let v = psi.amplitudes();
    (v.adjoint() * x * v)[(0, 0)]
}
