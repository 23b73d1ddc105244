//! Outcome probability functions (OPFs).
//!
//! An OPF maps rays of `C^a` to probabilities. Every finite-dimensional
//! OPF set closed under unitaries and mixing is generated by a Hermitian
//! matrix `F` on the k-fold symmetric subspace of `(C^a)^{(x)k}`:
//!
//! ```text
//! f(psi) = tr( F . V† (|psi><psi|)^{(x)k} V )
//! ```
//!
//! with `V` the symmetric isometry. `k = 1` is the ordinary Born rule.
//! Admissibility is fixed to `0 <= F <= 1`, which keeps all evaluations
//! in `[0, 1]` and contains the quantum case.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{Povm, PureState, SymmetricSubspace};

/// Tensor power of the symmetric representation. Distinct from the
/// entropy-meter bin label, which is a different quantity altogether.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymPower(usize);

impl SymPower {
    pub const ONE: SymPower = SymPower(1);

    pub fn new(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::UnsupportedPower { got: k });
        }
        Ok(Self(k))
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

/// An outcome probability function, represented by its `F`-matrix on the
/// symmetric subspace.
#[derive(Debug, Clone)]
pub struct Opf {
    dim: usize,
    power: SymPower,
    fmat: CMatrix,
}

impl Opf {
    pub const ADMISSIBILITY_TOL: f64 = 1e-10;

    /// Wraps an `F`-matrix, validating `0 <= F <= 1` on the symmetric
    /// subspace of the stated dimension and power.
    pub fn new(dim: usize, power: SymPower, fmat: CMatrix) -> Result<Self> {
        let d = crate::quantum::symmetric_dimension(dim, power.get());
        if fmat.nrows() != d || fmat.ncols() != d {
            return Err(Error::InvalidOpf(format!(
                "F must be {d}x{d} for dim {dim}, power {}; got {}x{}",
                power.get(),
                fmat.nrows(),
                fmat.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&fmat);
        if herm > Self::ADMISSIBILITY_TOL {
            return Err(Error::InvalidOpf(format!("hermiticity deviation {herm:.3e}")));
        }
        let (lo, hi) = linalg::hermitian_eig_bounds(&fmat);
        if lo < -Self::ADMISSIBILITY_TOL || hi > 1.0 + Self::ADMISSIBILITY_TOL {
            return Err(Error::InvalidOpf(format!(
                "eigenvalues [{lo:.3e}, {hi:.3e}] outside [0, 1]"
            )));
        }
        Ok(Self { dim, power, fmat })
    }

    /// The unit OPF `u_a`: probability 1 on every ray.
    pub fn unit(dim: usize, power: SymPower) -> Self {
        let d = crate::quantum::symmetric_dimension(dim, power.get());
        Self { dim, power, fmat: linalg::identity(d) }
    }

    /// The zero OPF `0_a`: probability 0 on every ray.
    pub fn zero(dim: usize, power: SymPower) -> Self {
        let d = crate::quantum::symmetric_dimension(dim, power.get());
        Self { dim, power, fmat: CMatrix::zeros(d, d) }
    }

    /// Quantum (`k = 1`) OPF from a POVM effect.
    pub fn from_effect(effect: CMatrix) -> Result<Self> {
        let dim = effect.nrows();
        Self::new(dim, SymPower::ONE, effect)
    }

    /// OPF from an operator `0 <= X <= 1` on the full product space
    /// `(C^a)^{(x)k}`, restricted to the symmetric subspace.
    pub fn from_full_operator(dim: usize, power: SymPower, x: &CMatrix) -> Result<Self> {
        let sym = SymmetricSubspace::get(dim, power.get())?;
        Self::new(dim, power, sym.restrict_operator(x)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn power(&self) -> SymPower {
        self.power
    }

    pub fn fmat(&self) -> &CMatrix {
        &self.fmat
    }

    fn subspace(&self) -> Result<Arc<SymmetricSubspace>> {
        SymmetricSubspace::get(self.dim, self.power.get())
    }

    /// Evaluates the OPF on a ray; the raw quadratic form is clamped to
    /// `[0, 1]` against roundoff drift.
    pub fn eval(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: psi.dim() });
        }
        let w: CVector = self.subspace()?.symmetric_coords(psi.amplitudes())?;
        let raw = (w.adjoint() * &self.fmat * w)[(0, 0)].re;
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Affine extension to a finite ensemble of rays.
    pub fn eval_ensemble(&self, parts: &[(f64, PureState)]) -> Result<f64> {
        let mut acc = 0.0;
        for (p, psi) in parts {
            acc += p * self.eval(psi)?;
        }
        Ok(acc)
    }

    /// `f ∘ U`: the OPF evaluating to `f(U psi)`, realized by conjugating
    /// `F` with the symmetric restriction of `U^{(x)k}`.
    pub fn compose_unitary(&self, u: &CMatrix) -> Result<Self> {
        let sym = self.subspace()?;
        let w = sym.restrict_unitary(u)?;
        let fmat = linalg::hermitize(&(w.adjoint() * &self.fmat * &w));
        Self::new(self.dim, self.power, fmat)
    }

    /// Convex mixture of OPFs sharing (dim, power).
    pub fn mix(fs: &[Opf], weights: &[f64]) -> Result<Self> {
        if fs.is_empty() {
            return Err(Error::EmptyInput("mix of zero OPFs".into()));
        }
        if fs.len() != weights.len() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} OPFs",
                weights.len(),
                fs.len()
            )));
        }
        validate_weights(weights, 1e-12)?;
        let (dim, power) = (fs[0].dim, fs[0].power);
        let d = fs[0].fmat.nrows();
        let mut fmat = CMatrix::zeros(d, d);
        for (f, &p) in fs.iter().zip(weights) {
            if f.dim != dim || f.power != power {
                return Err(Error::DimensionMismatch { expected: dim, actual: f.dim });
            }
            fmat += f.fmat.scale(p);
        }
        Self::new(dim, power, fmat)
    }

    /// Plugs a fixed ancilla into the second factor: the OPF on `C^a`
    /// evaluating to `f(psi (x) phi)` for `f` on `C^{a.b}`.
    pub fn restrict_with_ancilla(&self, phi: &PureState) -> Result<Self> {
        let b = phi.dim();
        let ab = self.dim;
        if b < 1 || ab % b != 0 || ab / b < 1 {
            return Err(Error::BadFactorization { dim: ab, a: ab / b.max(1), b });
        }
        let a = ab / b;
        let k = self.power.get();
        let sym_ab = self.subspace()?;
        let sym_a = SymmetricSubspace::get(a, k)?;

        let a_full = a.pow(k as u32);
        let b_full = b.pow(k as u32);
        let phi_pow = linalg::kron_power_vec(phi.amplitudes(), k);

        // M: C^{a^k} -> symmetric coords of C^{(ab)^k}; column x is
        // V_ab† applied to the interleaving of |x> with phi^{(x)k}.
        let v_ab = sym_ab.isometry();
        let mut m = CMatrix::zeros(sym_ab.rank(), a_full);
        for xi in 0..a_full {
            let mut a_digits = vec![0usize; k];
            let mut rest = xi;
            for d in a_digits.iter_mut() {
                *d = rest % a;
                rest /= a;
            }
            for yi in 0..b_full {
                let coeff = phi_pow[yi];
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let mut b_digits = vec![0usize; k];
                let mut rest = yi;
                for d in b_digits.iter_mut() {
                    *d = rest % b;
                    rest /= b;
                }
                // interleaved index: factor t of (C^a (x) C^b)^{(x)k}
                let mut row = 0usize;
                let mut stride = 1usize;
                for t in 0..k {
                    row += (a_digits[t] * b + b_digits[t]) * stride;
                    stride *= a * b;
                }
                for out_row in 0..sym_ab.rank() {
                    m[(out_row, xi)] += v_ab[(row, out_row)].conj() * coeff;
                }
            }
        }
        let g_full = m.adjoint() * &self.fmat * m;
        let g = sym_a.isometry().adjoint() * g_full * sym_a.isometry();
        Self::new(a, self.power, linalg::hermitize(&g))
    }

    /// Distance of `F` from the unit matrix, as a quick classifier.
    pub fn deviation_from_unit(&self) -> f64 {
        linalg::max_abs(&(&self.fmat - linalg::identity(self.fmat.nrows())))
    }
}

pub(crate) fn validate_weights(weights: &[f64], tol: f64) -> Result<()> {
    if weights.iter().any(|&p| !(p >= -tol)) {
        return Err(Error::BadWeights("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

/// A finite-outcome measurement: OPFs sharing (dim, power) whose
/// `F`-matrices sum to the identity.
#[derive(Debug, Clone)]
pub struct Measurement {
    outcomes: Vec<Opf>,
}

impl Measurement {
    pub const COMPLETENESS_TOL: f64 = 1e-10;

    pub fn new(outcomes: Vec<Opf>) -> Result<Self> {
        let m = Self::unnormalized(outcomes)?;
        let dev = m.completeness_error();
        if dev > Self::COMPLETENESS_TOL {
            return Err(Error::InvalidOpf(format!(
                "outcome F-matrices sum deviates from 1 by {dev:.3e}"
            )));
        }
        Ok(m)
    }

    /// Skips the completeness check; for feeding deliberately broken
    /// collections to the diagnostics.
    pub fn unnormalized(outcomes: Vec<Opf>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyInput("measurement with no outcomes".into()));
        }
        let (dim, power) = (outcomes[0].dim, outcomes[0].power);
        for f in &outcomes {
            if f.dim != dim || f.power != power {
                return Err(Error::DimensionMismatch { expected: dim, actual: f.dim });
            }
        }
        Ok(Self { outcomes })
    }

    pub fn from_povm(povm: &Povm) -> Result<Self> {
        let outcomes = povm
            .effects()
            .iter()
            .map(|x| Opf::from_effect(x.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
    }

    pub fn outcomes(&self) -> &[Opf] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].dim
    }

    pub fn power(&self) -> SymPower {
        self.outcomes[0].power
    }

    /// `max |sum F_i - 1|`, the algebraic completeness deviation.
    pub fn completeness_error(&self) -> f64 {
        let d = self.outcomes[0].fmat.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for f in &self.outcomes {
            sum += &f.fmat;
        }
        linalg::max_abs(&(sum - linalg::identity(d)))
    }

    /// Scales every outcome; useful only for constructing broken inputs.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|f| Opf::new(f.dim, f.power, f.fmat.scale(factor)))
            .collect::<Result<Vec<_>>>()?;
        Self::unnormalized(outcomes)
    }
}

/// Result of probing a measurement's normalization on a state sample.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizationReport {
    /// `max_s |sum_i f_i(psi_s) - 1|`
    pub max_state_deviation: f64,
    /// `max |sum_i F_i - 1|`
    pub algebraic_deviation: f64,
}

/// Probes `sum_i f_i(psi) = 1` over a state sample, alongside the
/// algebraic check on the F-matrices.
pub fn check_normalization(m: &Measurement, states: &[PureState]) -> Result<NormalizationReport> {
    if states.is_empty() {
        return Err(Error::EmptyInput("empty state sample".into()));
    }
    let mut max_dev: f64 = 0.0;
    for psi in states {
        let total: f64 = m
            .outcomes
            .iter()
            .map(|f| f.eval(psi))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        max_dev = max_dev.max((total - 1.0).abs());
    }
    Ok(NormalizationReport {
        max_state_deviation: max_dev,
        algebraic_deviation: m.completeness_error(),
    })
}

// --- serialization -------------------------------------------------------

/// Wire format: `{a, k, f}` with `f` the row-major F-matrix as
/// `[re, im]` pairs. Round-trips are exact (f64 shortest-repr encoding).
#[derive(Serialize, Deserialize)]
struct OpfRepr {
    a: usize,
    k: usize,
    f: Vec<[f64; 2]>,
}

impl Serialize for Opf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.fmat.nrows();
        let mut f = Vec::with_capacity(d * d);
        for row in 0..d {
            for col in 0..d {
                let z = self.fmat[(row, col)];
                f.push([z.re, z.im]);
            }
        }
        OpfRepr { a: self.dim, k: self.power.get(), f }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Opf {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = OpfRepr::deserialize(deserializer)?;
        let power = SymPower::new(repr.k).map_err(DeError::custom)?;
        let d = crate::quantum::symmetric_dimension(repr.a, repr.k);
        if repr.f.len() != d * d {
            return Err(DeError::custom(format!(
                "expected {} F entries for dim {}, power {}; got {}",
                d * d,
                repr.a,
                repr.k,
                repr.f.len()
            )));
        }
        let fmat = CMatrix::from_fn(d, d, |row, col| {
            let [re, im] = repr.f[row * d + col];
            Complex64::new(re, im)
        });
        Opf::new(repr.a, power, fmat).map_err(DeError::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{self, Stream};
    use crate::linalg::{c, identity, max_abs, outer};
    use proptest::prelude::*;

    fn projector_opf(dim: usize, i: usize) -> Opf {
        let e = crate::linalg::basis_vector(dim, i);
        Opf::from_effect(outer(&e, &e)).unwrap()
    }

    fn plus_state() -> PureState {
        PureState::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap()
    }

    use crate::linalg::CVector;

    #[test]
    fn born_rule_on_plus_state() {
        let f = projector_opf(2, 0);
        assert!((f.eval(&plus_state()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unit_opf_is_one_everywhere() {
        let mut rng = haar::seeded_rng(1);
        for _ in 0..20 {
            let psi = haar::haar_state(3, &mut rng);
            for k in [1, 2, 3] {
                let u = Opf::unit(3, SymPower::new(k).unwrap());
                assert!((u.eval(&psi).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn power_two_projector_gives_fourth_power() {
        // F = |00><00| restricted to Sym^2; on (|0>+|1>)/sqrt2 the value
        // is |<00|psi psi>|^2 = 0.25.
        let e00 = crate::linalg::basis_vector(4, 0);
        let x = outer(&e00, &e00);
        let f = Opf::from_full_operator(2, SymPower::new(2).unwrap(), &x).unwrap();
        assert!((f.eval(&plus_state()).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn k1_eval_matches_quadratic_form_exactly() {
        let mut rng = haar::seeded_rng(2);
        for _ in 0..100 {
            let f = crate::star::random_opf(3, SymPower::ONE, &mut rng);
            let psi = haar::haar_state(3, &mut rng);
            let v = psi.amplitudes();
            let direct = (v.adjoint() * f.fmat() * v)[(0, 0)].re;
            assert!((f.eval(&psi).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_is_global_phase_invariant() {
        let mut rng = haar::seeded_rng(3);
        let f = crate::star::random_opf(2, SymPower::new(2).unwrap(), &mut rng);
        for _ in 0..25 {
            let psi = haar::haar_state(2, &mut rng);
            let phase = Complex64::from_polar(1.0, rng.gen::<f64>() * 6.28);
            let rotated = PureState::new(psi.amplitudes().map(|z| z * phase)).unwrap();
            assert!((f.eval(&psi).unwrap() - f.eval(&rotated).unwrap()).abs() < 1e-12);
        }
    }

    use rand::Rng;

    #[test]
    fn compose_with_identity_is_identity() {
        let mut rng = haar::seeded_rng(4);
        let f = crate::star::random_opf(2, SymPower::new(2).unwrap(), &mut rng);
        let g = f.compose_unitary(&identity(2)).unwrap();
        assert!(max_abs(&(g.fmat() - f.fmat())) < 1e-12);
    }

    #[test]
    fn compose_with_bit_flip_swaps_projectors() {
        let f = projector_opf(2, 0);
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let g = f.compose_unitary(&x).unwrap();
        let expect = projector_opf(2, 1);
        assert!(max_abs(&(g.fmat() - expect.fmat())) < 1e-12);
    }

    #[test]
    fn compose_evaluates_on_rotated_state() {
        let mut rng = haar::seeded_rng(5);
        for k in [1, 2] {
            let f = crate::star::random_opf(2, SymPower::new(k).unwrap(), &mut rng);
            let u = haar::haar_unitary(2, &mut rng);
            let g = f.compose_unitary(&u).unwrap();
            for _ in 0..100 {
                let psi = haar::haar_state(2, &mut rng);
                let rotated = PureState::normalized(&u * psi.amplitudes()).unwrap();
                assert!((g.eval(&psi).unwrap() - f.eval(&rotated).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn compose_is_a_group_action() {
        let mut rng = haar::seeded_rng(6);
        for _ in 0..100 {
            let f = crate::star::random_opf(2, SymPower::new(2).unwrap(), &mut rng);
            let u = haar::haar_unitary(2, &mut rng);
            let v = haar::haar_unitary(2, &mut rng);
            let lhs = f.compose_unitary(&u).unwrap().compose_unitary(&v).unwrap();
            let rhs = f.compose_unitary(&(&u * &v)).unwrap();
            assert!(max_abs(&(lhs.fmat() - rhs.fmat())) < 1e-9);
        }
    }

    #[test]
    fn zero_opf_is_fixed_by_every_unitary() {
        let mut rng = haar::seeded_rng(7);
        for _ in 0..20 {
            let u = haar::haar_unitary(3, &mut rng);
            let z = Opf::zero(3, SymPower::new(2).unwrap());
            let composed = z.compose_unitary(&u).unwrap();
            assert!(max_abs(composed.fmat()) < 1e-14);
        }
    }

    #[test]
    fn non_unitary_composition_rejected() {
        let f = projector_opf(2, 0);
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0); 4]);
        assert!(matches!(f.compose_unitary(&bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn mix_single_is_identity_and_commutes_with_eval() {
        let mut rng = haar::seeded_rng(8);
        let f = crate::star::random_opf(2, SymPower::ONE, &mut rng);
        let same = Opf::mix(std::slice::from_ref(&f), &[1.0]).unwrap();
        assert!(max_abs(&(same.fmat() - f.fmat())) < 1e-14);

        let g = crate::star::random_opf(2, SymPower::ONE, &mut rng);
        let h = crate::star::random_opf(2, SymPower::ONE, &mut rng);
        let w = haar::random_weights(3, &mut rng);
        let mixed = Opf::mix(&[f.clone(), g.clone(), h.clone()], &w).unwrap();
        for _ in 0..100 {
            let psi = haar::haar_state(2, &mut rng);
            let pointwise = w[0] * f.eval(&psi).unwrap()
                + w[1] * g.eval(&psi).unwrap()
                + w[2] * h.eval(&psi).unwrap();
            assert!((mixed.eval(&psi).unwrap() - pointwise).abs() < 1e-12);
        }
    }

    #[test]
    fn mix_of_unit_and_zero_is_constant() {
        let p = 0.3;
        let mixed = Opf::mix(
            &[Opf::unit(2, SymPower::ONE), Opf::zero(2, SymPower::ONE)],
            &[p, 1.0 - p],
        )
        .unwrap();
        let mut rng = haar::seeded_rng(9);
        for _ in 0..20 {
            let psi = haar::haar_state(2, &mut rng);
            assert!((mixed.eval(&psi).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn mix_then_compose_equals_compose_then_mix() {
        let mut rng = haar::seeded_rng(10);
        for _ in 0..100 {
            let f = crate::star::random_opf(2, SymPower::ONE, &mut rng);
            let g = crate::star::random_opf(2, SymPower::ONE, &mut rng);
            let u = haar::haar_unitary(2, &mut rng);
            let p = rng.gen::<f64>();
            let lhs = Opf::mix(&[f.clone(), g.clone()], &[p, 1.0 - p])
                .unwrap()
                .compose_unitary(&u)
                .unwrap();
            let rhs = Opf::mix(
                &[f.compose_unitary(&u).unwrap(), g.compose_unitary(&u).unwrap()],
                &[p, 1.0 - p],
            )
            .unwrap();
            assert!(max_abs(&(lhs.fmat() - rhs.fmat())) < 1e-9);
        }
    }

    #[test]
    fn ancilla_restriction_contracts_tensor_effects() {
        let mut rng = haar::seeded_rng(11);
        // k=1: F = X_A (x) X_B must restrict to X_A . <phi|X_B|phi>.
        let xa = haar::random_povm(2, 2, &mut rng).effect(0).clone();
        let xb = haar::random_povm(3, 2, &mut rng).effect(0).clone();
        let f = Opf::from_effect(crate::linalg::kron(&xa, &xb)).unwrap();
        let phi = haar::haar_state(3, &mut rng);
        let g = f.restrict_with_ancilla(&phi).unwrap();
        let v = phi.amplitudes();
        let scale = (v.adjoint() * &xb * v)[(0, 0)].re;
        assert!(max_abs(&(g.fmat() - xa.scale(scale))) < 1e-10);
    }

    #[test]
    fn ancilla_restriction_preserves_unit_and_zero() {
        let phi = PureState::basis(2, 1);
        for k in [1, 2] {
            let power = SymPower::new(k).unwrap();
            let unit = Opf::unit(6, power).restrict_with_ancilla(&phi).unwrap();
            assert!(max_abs(&(unit.fmat() - identity(unit.fmat().nrows()))) < 1e-10);
            let zero = Opf::zero(6, power).restrict_with_ancilla(&phi).unwrap();
            assert!(max_abs(zero.fmat()) < 1e-12);
        }
    }

    #[test]
    fn ancilla_restriction_evaluates_as_product() {
        let mut rng = haar::seeded_rng(12);
        for k in [1, 2] {
            let f = crate::star::random_opf(6, SymPower::new(k).unwrap(), &mut rng);
            let phi = haar::haar_state(3, &mut rng);
            let g = f.restrict_with_ancilla(&phi).unwrap();
            for _ in 0..50 {
                let psi = haar::haar_state(2, &mut rng);
                let expect = f.eval(&psi.tensor(&phi)).unwrap();
                assert!((g.eval(&psi).unwrap() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ancilla_restriction_rejects_bad_factorization() {
        let f = Opf::unit(5, SymPower::ONE);
        let phi = PureState::basis(2, 0);
        assert!(f.restrict_with_ancilla(&phi).is_err());
    }

    #[test]
    fn measurement_completeness_enforced_and_probed() {
        let m = Measurement::from_povm(&Povm::computational(2)).unwrap();
        let mut rng = haar::seeded_rng(13);
        let states: Vec<PureState> = (0..50).map(|_| haar::haar_state(2, &mut rng)).collect();
        let report = check_normalization(&m, &states).unwrap();
        assert!(report.max_state_deviation < 1e-10);
        assert!(report.algebraic_deviation < 1e-10);

        let scaled = m.scaled(0.9).unwrap();
        let report = check_normalization(&scaled, &states).unwrap();
        assert!((report.max_state_deviation - 0.1).abs() < 1e-9);
        assert!((report.algebraic_deviation - 0.1).abs() < 1e-9);

        assert!(Measurement::new(scaled.outcomes().to_vec()).is_err());
    }

    #[test]
    fn random_povm_measurements_normalize() {
        let mut rng = haar::seeded_rng(14);
        let states: Vec<PureState> = (0..50).map(|_| haar::haar_state(3, &mut rng)).collect();
        for _ in 0..20 {
            let m = Measurement::from_povm(&haar::random_povm(3, 4, &mut rng)).unwrap();
            let report = check_normalization(&m, &states).unwrap();
            assert!(report.max_state_deviation < 1e-9);
        }
    }

    #[test]
    fn admissibility_bounds_rejected() {
        let too_big = linalg::identity(2).scale(1.5);
        assert!(Opf::new(2, SymPower::ONE, too_big).is_err());
        let negative = linalg::identity(2).scale(-0.1);
        assert!(Opf::new(2, SymPower::ONE, negative).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = haar::derived_rng(99, Stream::AxiomTrial, 0);
        for k in [1, 2] {
            let f = crate::star::random_opf(2, SymPower::new(k).unwrap(), &mut rng);
            let json = serde_json::to_string(&f).unwrap();
            let back: Opf = serde_json::from_str(&json).unwrap();
            assert_eq!(back.dim(), f.dim());
            assert_eq!(back.power(), f.power());
            for (a, b) in back.fmat().iter().zip(f.fmat().iter()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    proptest! {
        #[test]
        fn serialized_opfs_round_trip(seed in 0u64..500) {
            let mut rng = haar::seeded_rng(seed);
            let f = crate::star::random_opf(2, SymPower::ONE, &mut rng);
            let json = serde_json::to_string(&f).unwrap();
            let back: Opf = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back.fmat(), f.fmat());
        }

        #[test]
        fn evals_stay_in_unit_interval(seed in 0u64..500) {
            let mut rng = haar::seeded_rng(seed);
            let f = crate::star::random_opf(2, SymPower::new(2).unwrap(), &mut rng);
            let psi = haar::haar_state(2, &mut rng);
            let v = f.eval(&psi).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
