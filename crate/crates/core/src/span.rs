//! Numerical-rank analysis of outcome-function families.
//!
//! A family indexed by random unitaries spans a linear space of functions
//! on rays. Quantum (polynomial) families saturate at the effect-space
//! dimension; entropy-bin indicator families keep growing with every new
//! member, the numerical footprint of an infinite-dimensional span.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::gpt::OutcomeFn;
use crate::haar::{self, Stream};
use crate::readout::{cnot_entropy_opf, EntropyBin};
use crate::linalg::CMatrix;
use crate::opf::{Opf, SymPower};
use crate::quantum::EntropyKind;

type Generator = Arc<dyn Fn(usize, u64) -> OutcomeFn + Send + Sync>;

/// A deterministic family of outcome functions: member `n` under seed `s`
/// is always the same function.
#[derive(Clone)]
pub struct FunctionFamily {
    label: String,
    dim: usize,
    generator: Generator,
}

impl std::fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionFamily")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish()
    }
}

impl FunctionFamily {
    pub fn new(label: impl Into<String>, dim: usize, generator: Generator) -> Self {
        Self { label: label.into(), dim, generator }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn function(&self, n: usize, seed: u64) -> OutcomeFn {
        (self.generator)(n, seed)
    }

    fn member_unitary(dim: usize, n: usize, seed: u64) -> CMatrix {
        let mut rng = haar::derived_rng(seed, Stream::SpanFunction, n as u64);
        haar::haar_unitary(dim, &mut rng)
    }

    /// Born-rule family: `psi -> <psi|U_n† X U_n|psi>` for a fixed effect.
    pub fn born(dim: usize, effect: CMatrix, label: impl Into<String>) -> Result<Self> {
        let base = Opf::from_effect(effect)?;
        Ok(Self::new(label, dim, Arc::new(move |n, seed| {
            let u = Self::member_unitary(dim, n, seed);
            let rotated = base.compose_unitary(&u).expect("Haar member is unitary");
            OutcomeFn::from_opf(format!("born{n}"), rotated)
        })))
    }

    /// Qubit Born family with the ground-state projector as base effect.
    pub fn born_qubit() -> Self {
        let e0 = crate::linalg::basis_vector(2, 0);
        Self::born(2, crate::linalg::outer(&e0, &e0), "born").expect("projector is an effect")
    }

    /// Power-two family on a qubit: the conjugation orbit of a fixed
    /// non-scalar F-matrix on the two-fold symmetric subspace.
    pub fn power_two_qubit() -> Self {
        let fmat = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            crate::linalg::c(1.0, 0.0),
            crate::linalg::c(0.5, 0.0),
            crate::linalg::c(0.2, 0.0),
        ]));
        let base = Opf::new(2, SymPower::new(2).expect("2 >= 1"), fmat).expect("admissible");
        Self::new("k2", 2, Arc::new(move |n, seed| {
            let u = Self::member_unitary(2, n, seed);
            let rotated = base.compose_unitary(&u).expect("Haar member is unitary");
            OutcomeFn::from_opf(format!("k2-{n}"), rotated)
        }))
    }

    /// Entropy-bin indicator family on a qubit: the three-step protocol
    /// indicator for `bin`, composed with random unitaries.
    pub fn entropy_bin(bin: EntropyBin, entropy: EntropyKind) -> Self {
        let label = match entropy {
            EntropyKind::VonNeumann => "entropy-bin",
            EntropyKind::Renyi2 => "renyi-bin",
        };
        Self::new(label, 2, Arc::new(move |n, seed| {
            let u = Self::member_unitary(2, n, seed);
            cnot_entropy_opf(bin, entropy)
                .compose_unitary(&u)
                .expect("Haar member is unitary")
        }))
    }

    /// The von Neumann entropy-bin family at the top bin.
    pub fn entropy_bin_default() -> Self {
        Self::entropy_bin(EntropyBin::from_hundredths(99), EntropyKind::VonNeumann)
    }

    /// Second-order Renyi variant of the entropy-bin family.
    pub fn renyi_family(bin: EntropyBin) -> Self {
        Self::entropy_bin(bin, EntropyKind::Renyi2)
    }

    /// The unit OPF repeated forever; rank saturates at 1 immediately.
    pub fn constant_unit(dim: usize) -> Self {
        Self::new("constant", dim, Arc::new(move |_n, _seed| OutcomeFn::unit(dim)))
    }
}

/// Numerical rank of the span of the first `n` family members, for each
/// `n`, measured on a fixed Haar-random state sample.
#[derive(Debug, Clone, Serialize)]
pub struct RankProfile {
    pub label: String,
    pub dim: usize,
    pub count: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// `ranks[n-1]` is the numerical rank of the first `n` rows.
    pub ranks: Vec<usize>,
    /// Singular values of each leading row block.
    pub singular_values: Vec<Vec<f64>>,
}

impl RankProfile {
    pub fn final_rank(&self) -> usize {
        *self.ranks.last().unwrap()
    }

    /// Two-column CSV: `n, rank`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,rank")?;
        for (i, r) in self.ranks.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, r)?;
        }
        Ok(())
    }
}

/// Default number of sample states per family member.
pub const DEFAULT_SAMPLE_FACTOR: usize = 8;
/// Default relative singular-value threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Evaluates the first `count` family members on `samples` fixed
/// Haar-random states and computes the numerical rank of every leading
/// row block. The threshold is `tol` times the largest singular value of
/// the full matrix, so the rank sequence is nondecreasing.
pub fn rank_profile(
    family: &FunctionFamily,
    count: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RankProfile> {
    if count < 1 {
        return Err(Error::InsufficientSamples { needed: 1, got: count });
    }
    if samples < 4 * count {
        return Err(Error::InsufficientSamples { needed: 4 * count, got: samples });
    }
    let dim = family.dim();
    let states: Vec<crate::quantum::PureState> = (0..samples)
        .map(|s| haar::haar_state(dim, &mut haar::derived_rng(seed, Stream::SpanState, s as u64)))
        .collect();

    let rows: Vec<Vec<f64>> = exec::map_indexed(count, |n| {
        let f = family.function(n, seed);
        states
            .iter()
            .map(|psi| f.eval(psi).expect("family dimension matches sampler"))
            .collect()
    });

    let full = DMatrix::<f64>::from_fn(count, samples, |n, s| rows[n][s]);
    let sigma_max = full.clone().singular_values()[0].max(f64::MIN_POSITIVE);
    let threshold = tol * sigma_max;

    let mut ranks = Vec::with_capacity(count);
    let mut singular_values = Vec::with_capacity(count);
    for n in 1..=count {
        let block = full.rows(0, n).clone_owned();
        let svals: Vec<f64> = block.singular_values().iter().copied().collect();
        ranks.push(svals.iter().filter(|&&s| s > threshold).count());
        singular_values.push(svals);
    }
    Ok(RankProfile {
        label: family.label().to_string(),
        dim,
        count,
        samples,
        seed,
        tol,
        ranks,
        singular_values,
    })
}

/// Verdict on a rank profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    /// Rank pinned at `dim` over the whole trailing quarter of the profile.
    Saturating { dim: usize },
    /// Rank still tracking the family size at the end (within slack 2,
    /// which tolerates occasional degenerate members).
    Growing,
    /// Neither pattern; the trailing ranks are included for diagnosis.
    Inconclusive { tail: Vec<usize> },
}

/// Classifies a profile with at least 8 steps.
pub fn classify(profile: &RankProfile) -> Result<Classification> {
    let n = profile.count;
    if n < 8 {
        return Err(Error::InsufficientSamples { needed: 8, got: n });
    }
    let tail_len = n.div_ceil(4);
    let tail = &profile.ranks[n - tail_len..];
    let plateau = tail.windows(2).all(|w| w[0] == w[1]);
    let final_rank = profile.final_rank();
    if plateau && final_rank < n - 2 {
        return Ok(Classification::Saturating { dim: tail[0] });
    }
    if final_rank >= n - 2 {
        return Ok(Classification::Growing);
    }
    Ok(Classification::Inconclusive { tail: tail.to_vec() })
}
