//! Seeded random sampling: Haar states and unitaries, random densities,
//! POVMs, and mixing weights.
//!
//! All randomness flows from explicit seeds. Independent work items use
//! [`derived_rng`] with a stream tag and item index, so parallel runs are
//! reproducible and identical to sequential ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{DensityMatrix, Povm, PureState};

/// Independent RNG streams for the crate's Monte Carlo loops.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    AxiomTrial = 1,
    SpanFunction = 2,
    SpanState = 3,
    FitSample = 4,
    GptSample = 5,
    Scenario = 6,
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for work item `index` of `stream`; distinct (stream, index) pairs
/// never collide for index < 2^48.
pub fn derived_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 48));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) | index);
    rng
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random ray: normalized complex Gaussian vector.
pub fn haar_state(dim: usize, rng: &mut impl Rng) -> PureState {
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary via QR of a Gaussian matrix with phase correction.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..dim {
        let d = r[(i, i)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for row in 0..dim {
            q[(row, i)] *= phase;
        }
    }
    q
}

/// Random full-rank density matrix, `G G† / tr`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).expect("Gaussian construction is PSD with unit trace")
}

/// Random POVM with `outcomes` effects: `X_i = S^{-1/2} G_i† G_i S^{-1/2}`
/// with `S` the sum of the Gram matrices. Complete by construction.
pub fn random_povm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Povm {
    assert!(outcomes >= 1);
    let grams: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = gaussian_matrix(dim, dim, rng);
            g.adjoint() * g
        })
        .collect();
    let mut s = CMatrix::zeros(dim, dim);
    for g in &grams {
        s += g;
    }
    let w = linalg::inv_sqrt(&s);
    let effects = grams
        .into_iter()
        .map(|g| linalg::hermitize(&(&w * g * &w)))
        .collect();
    Povm::new(effects).expect("isometry construction yields a valid POVM")
}

/// Haar-random rank-1 projective measurement (d outcomes on C^d).
pub fn random_projective_povm(dim: usize, rng: &mut impl Rng) -> Povm {
    let u = haar_unitary(dim, rng);
    Povm::basis_projectors(&u).expect("Haar unitary is unitary")
}

/// Uniform point on the probability simplex (normalized exponentials).
pub fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(n >= 1);
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
