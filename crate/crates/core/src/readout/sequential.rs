use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::gpt::OutcomeFn;
use crate::haar::{self, Stream};
use crate::linalg::{self, CMatrix};
use crate::quantum::{Povm, PureState};

/// Joint statistics `P(j, i)` of a readout-then-POVM sequence.
#[derive(Debug, Clone, Serialize)]
pub struct JointDistribution {
    /// `probs[j][i]`: second-measurement outcome `j`, first outcome `i`.
    pub probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    /// Marginal over the first (readout) measurement.
    pub fn first_marginal(&self) -> Vec<f64> {
        let cols = self.probs[0].len();
        (0..cols).map(|i| self.probs.iter().map(|row| row[i]).sum()).collect()
    }

    /// Marginal over the second (POVM) measurement.
    pub fn second_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn prob(&self, j: usize, i: usize) -> f64 {
        self.probs[j][i]
    }
}

/// Statistics of a stochastic positive-operator readout of `X` followed
/// by an ordinary POVM `Y` on the same system.
///
/// The readout leaves the state untouched, so
/// `P(j, i) = <psi|Y_j|psi> . <psi|X_i|psi>` — in particular `P(j|i)`
/// does not depend on `i`, and the joint value is quartic, not
/// quadratic, in the amplitudes.
pub fn sequential_spo_then_povm(
    psi: &PureState,
    first: &Povm,
    second: &Povm,
) -> Result<JointDistribution> {
    if first.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), actual: first.dim() });
    }
    if second.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), actual: second.dim() });
    }
    let p_first = first.born_probs(psi)?;
    let p_second = second.born_probs(psi)?;
    let probs = p_second
        .iter()
        .map(|&pj| p_first.iter().map(|&pi| pj * pi).collect())
        .collect();
    Ok(JointDistribution { probs })
}

/// Orthonormal Hermitian operator basis of `C^{dim x dim}` (real span).
pub fn hermitian_basis(dim: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] = Complex64::ONE;
        basis.push(m);
    }
    let w = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut sym = CMatrix::zeros(dim, dim);
            sym[(i, j)] = Complex64::new(w, 0.0);
            sym[(j, i)] = Complex64::new(w, 0.0);
            basis.push(sym);
            let mut asym = CMatrix::zeros(dim, dim);
            asym[(i, j)] = Complex64::new(0.0, w);
            asym[(j, i)] = Complex64::new(0.0, -w);
            basis.push(asym);
        }
    }
    basis
}

/// Least-squares fit of a probability function by a Hermitian quadratic
/// form `psi -> <psi|Z|psi>`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticFit {
    /// `sqrt( sum (p_s - <psi_s|Z|psi_s>)^2 / sum p_s^2 )`
    pub relative_residual: f64,
    pub n_samples: usize,
    /// Fitted operator, row-major `[re, im]` pairs.
    #[serde(skip)]
    pub operator: CMatrix,
}

/// Fits the best Hermitian `Z` to `prob_fn` over Haar-random samples and
/// reports the relative residual. A residual well above sampling noise
/// certifies that no quantum effect reproduces the statistics.
pub fn quadratic_fit_residual(
    prob_fn: &OutcomeFn,
    n_samples: usize,
    seed: u64,
) -> Result<QuadraticFit> {
    let dim = prob_fn.dim();
    let needed = 4 * dim * dim;
    if n_samples < needed {
        return Err(Error::InsufficientSamples { needed, got: n_samples });
    }
    let basis = hermitian_basis(dim);

    let rows: Vec<(Vec<f64>, f64)> = exec::map_indexed(n_samples, |s| {
        let mut rng = haar::derived_rng(seed, Stream::FitSample, s as u64);
        let psi = haar::haar_state(dim, &mut rng);
        let v = psi.amplitudes();
        let design: Vec<f64> = basis
            .iter()
            .map(|b| (v.adjoint() * b * v)[(0, 0)].re)
            .collect();
        (design, prob_fn.eval(&psi).expect("dimension checked"))
    });

    let m = basis.len();
    let a = DMatrix::<f64>::from_fn(n_samples, m, |s, k| rows[s].0[k]);
    let y = nalgebra::DVector::<f64>::from_fn(n_samples, |s, _| rows[s].1);

    let svd = a.clone().svd(true, true);
    let coeffs = svd.solve(&y, 1e-12).map_err(|e| Error::InvalidState(e.to_string()))?;
    let residual_vec = a * &coeffs - &y;
    let denom = y.norm_squared();
    let relative_residual = if denom > 0.0 {
        (residual_vec.norm_squared() / denom).sqrt()
    } else {
        0.0
    };

    let mut operator = CMatrix::zeros(dim, dim);
    for (b, &x) in basis.iter().zip(coeffs.iter()) {
        operator += b.scale(x);
    }
    Ok(QuadraticFit { relative_residual, n_samples, operator })
}

#[allow(dead_code)]
fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b))
}
