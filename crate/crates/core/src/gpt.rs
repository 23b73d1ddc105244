//! Operational state/effect layer.
//!
//! A preparation is represented by the vector of probabilities it assigns
//! to a chosen set of fiducial outcomes. Outcome probabilities are affine
//! in that vector, which makes the linear span of all outcome functions
//! one dimension larger than the affine span of the states; both
//! dimensions are estimated here from sampled data.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::haar::{self, Stream};
use crate::linalg::{self, CMatrix};
use crate::opf::{validate_weights, Opf};
use crate::quantum::PureState;

type EvalFn = Arc<dyn Fn(&PureState) -> f64 + Send + Sync>;

/// An evaluable outcome function on the rays of `C^dim`.
#[derive(Clone)]
pub struct OutcomeFn {
    label: String,
    dim: usize,
    eval: EvalFn,
}

impl std::fmt::Debug for OutcomeFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OutcomeFn")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish()
    }
}

impl OutcomeFn {
    pub fn new(label: impl Into<String>, dim: usize, eval: EvalFn) -> Self {
        Self { label: label.into(), dim, eval }
    }

    /// Born-rule function `psi -> <psi|X|psi>` of an effect `0 <= X <= 1`.
    pub fn from_effect(label: impl Into<String>, effect: CMatrix) -> Result<Self> {
        let opf = Opf::from_effect(effect)?;
        Ok(Self::from_opf(label, opf))
    }

    pub fn from_opf(label: impl Into<String>, opf: Opf) -> Self {
        let dim = opf.dim();
        Self::new(label, dim, Arc::new(move |psi| opf.eval(psi).expect("dimension checked")))
    }

    /// The constant-1 outcome.
    pub fn unit(dim: usize) -> Self {
        Self::new("unit", dim, Arc::new(|_| 1.0))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: psi.dim() });
        }
        Ok((self.eval)(psi))
    }

    /// Composition with a unitary: `psi -> f(U psi)`.
    pub fn compose_unitary(&self, u: &CMatrix) -> Result<Self> {
        let dev = linalg::unitarity_error(u);
        if dev > 1e-10 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        if u.nrows() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: u.nrows() });
        }
        let u = u.clone();
        let inner = self.eval.clone();
        Ok(Self {
            label: format!("{}∘U", self.label),
            dim: self.dim,
            eval: Arc::new(move |psi| {
                let rotated = PureState::normalized(&u * psi.amplitudes())
                    .expect("unitary preserves norm");
                inner(&rotated)
            }),
        })
    }
}

/// A finite fiducial outcome set: the probabilities of these outcomes
/// determine the state. Countable sets are truncated to finite lists.
#[derive(Debug, Clone)]
pub struct FiducialSet {
    dim: usize,
    outcomes: Vec<OutcomeFn>,
}

impl FiducialSet {
    pub fn new(dim: usize, outcomes: Vec<OutcomeFn>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyInput("fiducial set with no outcomes".into()));
        }
        for f in &outcomes {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: f.dim() });
            }
        }
        Ok(Self { dim, outcomes })
    }

    /// Qubit tomography set: projections onto `|0>`, `|+>`, `|+i>`, plus
    /// the unit outcome.
    pub fn qubit_pauli() -> Self {
        let zero = crate::linalg::basis_vector(2, 0);
        let plus = crate::linalg::CVector::from_vec(vec![
            linalg::c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            linalg::c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let plus_i = crate::linalg::CVector::from_vec(vec![
            linalg::c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            linalg::c(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ]);
        let outcomes = vec![
            OutcomeFn::from_effect("z+", linalg::outer(&zero, &zero)).unwrap(),
            OutcomeFn::from_effect("x+", linalg::outer(&plus, &plus)).unwrap(),
            OutcomeFn::from_effect("y+", linalg::outer(&plus_i, &plus_i)).unwrap(),
            OutcomeFn::unit(2),
        ];
        Self { dim: 2, outcomes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[OutcomeFn] {
        &self.outcomes
    }

    /// Checks that no two outcomes agree on a dense random sample.
    pub fn separates_points(&self, n_samples: usize, seed: u64, tol: f64) -> Result<bool> {
        let states: Vec<PureState> = (0..n_samples)
            .map(|s| haar::haar_state(self.dim, &mut haar::derived_rng(seed, Stream::GptSample, s as u64)))
            .collect();
        for i in 0..self.outcomes.len() {
            for j in (i + 1)..self.outcomes.len() {
                let mut max_gap = 0.0f64;
                for psi in &states {
                    let gap = (self.outcomes[i].eval(psi)? - self.outcomes[j].eval(psi)?).abs();
                    max_gap = max_gap.max(gap);
                }
                if max_gap <= tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// A preparation: a ray or a finite classical mixture of rays.
#[derive(Debug, Clone)]
pub enum Preparation {
    Pure(PureState),
    Mixture(Vec<(f64, PureState)>),
}

impl Preparation {
    pub fn pure(psi: PureState) -> Self {
        Preparation::Pure(psi)
    }

    pub fn mixture(parts: Vec<(f64, PureState)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyInput("mixture with no parts".into()));
        }
        let weights: Vec<f64> = parts.iter().map(|(p, _)| *p).collect();
        validate_weights(&weights, 1e-12)?;
        let dim = parts[0].1.dim();
        for (_, psi) in &parts {
            if psi.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: psi.dim() });
            }
        }
        Ok(Preparation::Mixture(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Preparation::Pure(psi) => psi.dim(),
            Preparation::Mixture(parts) => parts[0].1.dim(),
        }
    }

    fn expectation(&self, f: &OutcomeFn) -> Result<f64> {
        match self {
            Preparation::Pure(psi) => f.eval(psi),
            Preparation::Mixture(parts) => {
                let mut acc = 0.0;
                for (p, psi) in parts {
                    acc += p * f.eval(psi)?;
                }
                Ok(acc)
            }
        }
    }
}

/// The probability vector a preparation assigns to a fiducial set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GptState {
    probs: Vec<f64>,
}

impl GptState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for &p in &probs {
            if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::InvalidState(format!("entry {p} outside [0, 1]")));
            }
        }
        Ok(Self { probs: probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max_abs_diff(&self, other: &GptState) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates every fiducial outcome on a preparation.
pub fn fiducial_probs(prep: &Preparation, fiducials: &FiducialSet) -> Result<GptState> {
    if prep.dim() != fiducials.dim() {
        return Err(Error::DimensionMismatch { expected: fiducials.dim(), actual: prep.dim() });
    }
    let probs = fiducials
        .outcomes()
        .iter()
        .map(|f| prep.expectation(f))
        .collect::<Result<Vec<_>>>()?;
    GptState::new(probs)
}

/// Entrywise convex combination of state vectors.
pub fn mix(states: &[GptState], weights: &[f64]) -> Result<GptState> {
    if states.is_empty() {
        return Err(Error::EmptyInput("mix of zero states".into()));
    }
    if states.len() != weights.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    validate_weights(weights, 1e-12)?;
    let n = states[0].len();
    for s in states {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: s.len() });
        }
    }
    let probs = (0..n)
        .map(|i| states.iter().zip(weights).map(|(s, &w)| w * s.probs[i]).sum())
        .collect();
    GptState::new(probs)
}

/// Estimated dimensions of the sampled state cloud and the span of the
/// outcome-function family, with a conclusiveness flag from the
/// singular-value gap at each rank cut.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceDimensions {
    pub dim_states: usize,
    pub dim_effects: usize,
    pub conclusive: bool,
    pub n_samples: usize,
    pub tol: f64,
}

fn numerical_rank(svals: &[f64], threshold: f64) -> (usize, bool) {
    let rank = svals.iter().filter(|&&s| s > threshold).count();
    // A singular value within a decade of the cut makes the rank estimate
    // unstable; flag rather than guess.
    let murky = svals.iter().any(|&s| s > threshold * 0.1 && s <= threshold * 10.0 && s <= svals[0]);
    (rank, !murky)
}

/// Samples states, evaluates the family on them, and measures:
/// the affine dimension of the resulting probability-vector cloud
/// (`dim_states`) and the linear dimension of the span of the functions
/// on the sample (`dim_effects`).
pub fn space_dimensions(
    functions: &[OutcomeFn],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SpaceDimensions> {
    space_dimensions_with_sampler(
        functions,
        n_samples,
        seed,
        tol,
        |dim, rng| haar::haar_state(dim, rng),
    )
}

pub fn space_dimensions_with_sampler(
    functions: &[OutcomeFn],
    n_samples: usize,
    seed: u64,
    tol: f64,
    sampler: impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> PureState + Sync + Send,
) -> Result<SpaceDimensions> {
    if functions.is_empty() {
        return Err(Error::EmptyInput("no outcome functions".into()));
    }
    let dim = functions[0].dim();
    for f in functions {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: f.dim() });
        }
    }
    let needed = 10 * functions.len();
    if n_samples < needed {
        return Err(Error::InsufficientSamples { needed, got: n_samples });
    }

    // columns: per-state probability vectors over the function family
    let columns: Vec<Vec<f64>> = exec::map_indexed(n_samples, |s| {
        let mut rng = haar::derived_rng(seed, Stream::GptSample, s as u64);
        let psi = sampler(dim, &mut rng);
        functions
            .iter()
            .map(|f| f.eval(&psi).expect("dimensions checked"))
            .collect()
    });

    let rows = functions.len();
    let a = nalgebra::DMatrix::<f64>::from_fn(rows, n_samples, |i, s| columns[s][i]);

    let effect_svals = a.clone().singular_values();
    let mean = a.column_mean();
    let mut centered = a;
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let state_svals = centered.singular_values();

    let eff_thresh = tol * effect_svals[0].max(f64::MIN_POSITIVE);
    let (dim_effects, eff_ok) =
        numerical_rank(effect_svals.as_slice(), eff_thresh);
    let st_thresh = tol * effect_svals[0].max(f64::MIN_POSITIVE);
    let (dim_states, st_ok) = numerical_rank(state_svals.as_slice(), st_thresh);

    Ok(SpaceDimensions {
        dim_states,
        dim_effects,
        conclusive: eff_ok && st_ok,
        n_samples,
        tol,
    })
}

/// `count` Haar-random rank-1 effects plus the unit outcome; spans the
/// quantum effect space for generous `count`.
pub fn random_effect_functions(dim: usize, count: usize, seed: u64) -> Vec<OutcomeFn> {
    let mut out = Vec::with_capacity(count + 1);
    out.push(OutcomeFn::unit(dim));
    for i in 0..count {
        let mut rng = haar::derived_rng(seed, Stream::GptSample, (1 << 40) + i as u64);
        let psi = haar::haar_state(dim, &mut rng);
        out.push(
            OutcomeFn::from_effect(format!("proj{i}"), psi.projector())
                .expect("projector is an effect"),
        );
    }
    out
}

/// Diagonal (classical) outcome functions on a qubit: both basis
/// populations plus the unit outcome.
pub fn classical_bit_functions() -> Vec<OutcomeFn> {
    let e0 = crate::linalg::basis_vector(2, 0);
    let e1 = crate::linalg::basis_vector(2, 1);
    vec![
        OutcomeFn::unit(2),
        OutcomeFn::from_effect("p0", linalg::outer(&e0, &e0)).unwrap(),
        OutcomeFn::from_effect("p1", linalg::outer(&e1, &e1)).unwrap(),
    ]
}
