use serde::{Deserialize, Serialize};

use super::state::DensityMatrix;

/// Eigenvalues within this window of [0,1] are clamped before the logs;
/// finite-precision PSD drift otherwise produces NaNs.
const CLAMP_WINDOW: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyKind {
    VonNeumann,
    Renyi2,
}

impl EntropyKind {
    pub fn entropy(&self, rho: &DensityMatrix) -> f64 {
        match self {
            EntropyKind::VonNeumann => von_neumann_entropy(rho),
            EntropyKind::Renyi2 => renyi2_entropy(rho),
        }
    }

    /// Same entropy for a qubit state with ground population `p`.
    pub fn binary(&self, p: f64) -> f64 {
        match self {
            EntropyKind::VonNeumann => binary_entropy(p),
            EntropyKind::Renyi2 => renyi2_binary(p),
        }
    }
}

impl std::fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntropyKind::VonNeumann => write!(f, "von-neumann"),
            EntropyKind::Renyi2 => write!(f, "renyi2"),
        }
    }
}

fn clamped_eigenvalues(rho: &DensityMatrix) -> Vec<f64> {
    rho.eigenvalues()
        .into_iter()
        .map(|v| {
            debug_assert!(v > -CLAMP_WINDOW && v < 1.0 + CLAMP_WINDOW);
            v.clamp(0.0, 1.0)
        })
        .collect()
}

/// Von Neumann entropy in bits, with `0 log 0 := 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    clamped_eigenvalues(rho)
        .into_iter()
        .filter(|&v| v > 0.0)
        .map(|v| -v * v.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Second-order Renyi entropy in bits, `-log2 tr(rho^2)`.
pub fn renyi2_entropy(rho: &DensityMatrix) -> f64 {
    (-rho.purity().log2()).max(0.0)
}

/// `-p log2 p - (1-p) log2 (1-p)`
pub fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}

/// `-log2(p^2 + (1-p)^2)`
pub fn renyi2_binary(p: f64) -> f64 {
    let q = 1.0 - p;
    -(p * p + q * q).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::{c, CMatrix, CVector};
    use crate::quantum::{reduced_density, PureState, Subsystem};

    fn diag_density(p: f64) -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(p, 0.0),
            c(1.0 - p, 0.0),
        ])))
        .unwrap()
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let rho = PureState::basis(3, 1).density();
        assert!(von_neumann_entropy(&rho).abs() < 1e-12);
        assert!(renyi2_entropy(&rho).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_is_one_bit() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&rho) - 1.0).abs() < 1e-14);
        assert!((renyi2_entropy(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quarter_three_quarter_values() {
        let rho = diag_density(0.25);
        // Oracle: binary entropy formula evaluated directly.
        let expect = binary_entropy(0.25);
        assert!((expect - 0.8112781244591328).abs() < 1e-12);
        assert!((von_neumann_entropy(&rho) - expect).abs() < 1e-12);
        // Oracle: direct purity computation.
        let expect_r2 = -(0.25f64 * 0.25 + 0.75 * 0.75).log2();
        assert!((expect_r2 - (16.0f64 / 10.0).log2()).abs() < 1e-14);
        assert!((renyi2_entropy(&rho) - expect_r2).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_log_dim() {
        let mut rng = haar::seeded_rng(3);
        for _ in 0..200 {
            let rho = haar::random_density(4, &mut rng);
            let s = von_neumann_entropy(&rho);
            assert!((0.0..=2.0 + 1e-9).contains(&s));
            assert!(renyi2_entropy(&rho) <= s + 1e-9);
        }
    }

    #[test]
    fn invariant_under_unitary_conjugation() {
        let mut rng = haar::seeded_rng(17);
        for _ in 0..1000 {
            let rho = haar::random_density(3, &mut rng);
            let u = haar::haar_unitary(3, &mut rng);
            let rotated = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).unwrap();
            assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&rotated)).abs() < 1e-9);
            assert!((renyi2_entropy(&rho) - renyi2_entropy(&rotated)).abs() < 1e-9);
        }
    }

    #[test]
    fn schmidt_symmetry_of_bipartite_reductions() {
        let mut rng = haar::seeded_rng(23);
        for _ in 0..300 {
            let psi = haar::haar_state(6, &mut rng);
            let sa = von_neumann_entropy(&reduced_density(&psi, (2, 3), Subsystem::A).unwrap());
            let sb = von_neumann_entropy(&reduced_density(&psi, (2, 3), Subsystem::B).unwrap());
            assert!((sa - sb).abs() < 1e-9);
        }
    }
}
