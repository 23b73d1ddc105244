use crate::error::{Error, Result};
use crate::opf::validate_weights;
use crate::quantum::PureState;

/// A proper mixture: a finite ensemble of bipartite pure states with
/// classical weights. Contrast with the improper mixture obtained by
/// tracing out half of a single entangled pure state.
#[derive(Debug, Clone)]
pub struct ProperMixture {
    parts: Vec<(f64, PureState)>,
    dims: (usize, usize),
}

impl ProperMixture {
    pub const WEIGHT_TOL: f64 = 1e-12;

    pub fn new(parts: Vec<(f64, PureState)>, dims: (usize, usize)) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyInput("mixture with no parts".into()));
        }
        let (a, b) = dims;
        for (_, psi) in &parts {
            if psi.dim() != a * b {
                return Err(Error::BadFactorization { dim: psi.dim(), a, b });
            }
        }
        let weights: Vec<f64> = parts.iter().map(|(p, _)| *p).collect();
        validate_weights(&weights, Self::WEIGHT_TOL)?;
        Ok(Self { parts, dims })
    }

    /// The trivial ensemble `{(1, psi)}`.
    pub fn from_pure(psi: PureState, dims: (usize, usize)) -> Result<Self> {
        Self::new(vec![(1.0, psi)], dims)
    }

    pub fn parts(&self) -> &[(f64, PureState)] {
        &self.parts
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_normalize() {
        let psi = PureState::basis(4, 0);
        assert!(ProperMixture::new(vec![(0.7, psi.clone()), (0.7, psi)], (2, 2)).is_err());
    }

    #[test]
    fn parts_must_fit_the_factorization() {
        let psi = PureState::basis(6, 0);
        assert!(ProperMixture::from_pure(psi, (2, 2)).is_err());
    }
}
