//! Composition rules for OPFs and the numerical axiom-checker suite.
//!
//! A star product assigns to local OPFs `f` on `C^a` and `h` on `C^b` a
//! joint OPF on `C^{ab}`. The quantum instantiation is the tensor product
//! of effects. The checkers measure, by seeded Monte Carlo, the worst
//! violation of each consistency constraint a composition rule must obey;
//! violations are data, not errors.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::haar::{self, Stream};
use crate::linalg;
use crate::opf::{Measurement, Opf, SymPower};
use crate::quantum::PureState;

type Rule = Arc<dyn Fn(&Opf, &Opf) -> Result<Opf> + Send + Sync>;

/// A composition rule `(f, h) -> f * h` with output on the product space.
#[derive(Clone)]
pub struct StarProduct {
    label: String,
    rule: Rule,
}

impl std::fmt::Debug for StarProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StarProduct").field("label", &self.label).finish()
    }
}

impl StarProduct {
    pub fn new(label: impl Into<String>, rule: Rule) -> Self {
        Self { label: label.into(), rule }
    }

    /// The quantum rule: tensor product of effects (`k = 1`).
    pub fn quantum() -> Self {
        Self::new("quantum", Arc::new(|f, h| quantum_star(f, h)))
    }

    /// Tensor product followed by a global scaling; `factor != 1` breaks
    /// the unit constraint by exactly `1 - factor`.
    pub fn scaled(factor: f64) -> Self {
        Self::new(
            format!("scaled({factor})"),
            Arc::new(move |f, h| {
                let base = quantum_star(f, h)?;
                Opf::new(base.dim(), base.power(), base.fmat().scale(factor))
            }),
        )
    }

    /// Tensor product plus an `epsilon`-weighted cross term that is
    /// quadratic in the first factor, renormalized to stay admissible.
    /// Breaks bilinearity (and with it no-signalling) at order `epsilon`
    /// while leaving the unit and zero constraints intact.
    pub fn broken_bilinear(epsilon: f64) -> Self {
        Self::new(
            format!("broken-bilinear({epsilon})"),
            Arc::new(move |f, h| {
                let base = quantum_star(f, h)?;
                let da = f.fmat().nrows() as f64;
                let db = h.fmat().nrows() as f64;
                let cross = (f.fmat() * f.fmat()).trace().re / da * h.fmat().trace().re / db;
                let d = base.fmat().nrows();
                let fmat = (base.fmat() + linalg::identity(d).scale(epsilon * cross))
                    .unscale(1.0 + epsilon);
                Opf::new(base.dim(), base.power(), fmat)
            }),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Applies the rule, checking that output dimensions multiply.
    pub fn apply(&self, f: &Opf, h: &Opf) -> Result<Opf> {
        let out = (self.rule)(f, h)?;
        let expected = f.dim() * h.dim();
        if out.dim() != expected {
            return Err(Error::DimensionMismatch { expected, actual: out.dim() });
        }
        Ok(out)
    }
}

/// Quantum composition of two `k = 1` OPFs: `F = F_f (x) F_h`.
pub fn quantum_star(f: &Opf, h: &Opf) -> Result<Opf> {
    for k in [f.power().get(), h.power().get()] {
        if k != 1 {
            return Err(Error::UnsupportedPower { got: k });
        }
    }
    Opf::new(f.dim() * h.dim(), SymPower::ONE, linalg::kron(f.fmat(), h.fmat()))
}

/// Random admissible OPF: `F = G†G / lambda_max` with `G` complex Gaussian.
pub fn random_opf(dim: usize, power: SymPower, rng: &mut impl Rng) -> Opf {
    let d = crate::quantum::symmetric_dimension(dim, power.get());
    let g = haar::gaussian_matrix(d, d, rng);
    let m = linalg::hermitize(&(g.adjoint() * &g));
    let (_, hi) = linalg::hermitian_eig_bounds(&m);
    Opf::new(dim, power, m.unscale(hi.max(1e-12))).expect("normalized Gram matrix is admissible")
}

/// Random `k = 1` measurement backed by a random POVM.
pub fn random_measurement(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Measurement {
    Measurement::from_povm(&haar::random_povm(dim, outcomes, rng))
        .expect("random POVM is complete")
}

/// The consistency constraints a composition rule must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    /// Mixing commutes with the product, in each argument separately.
    Bilinearity,
    /// Local unitaries commute with the product.
    Covariance,
    /// `u_a * u_b = u_ab`
    Unit,
    /// `0_a * u_b = 0_ab`
    Zero,
    /// `(f * u_b)(psi (x) phi) = f(psi)`
    ReducedState,
    /// `(f * g)(psi (x) phi) = f(psi) g(phi)`
    Factorization,
    /// `(f * g) * h = f * (g * h)`
    Associativity,
    /// Local marginals do not depend on the remote measurement choice.
    NoSignalling,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Bilinearity,
        Axiom::Covariance,
        Axiom::Unit,
        Axiom::Zero,
        Axiom::ReducedState,
        Axiom::Factorization,
        Axiom::Associativity,
        Axiom::NoSignalling,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Axiom::Bilinearity => "bilinearity",
            Axiom::Covariance => "covariance",
            Axiom::Unit => "unit",
            Axiom::Zero => "zero",
            Axiom::ReducedState => "reduced-state",
            Axiom::Factorization => "factorization",
            Axiom::Associativity => "associativity",
            Axiom::NoSignalling => "no-signalling",
        }
    }
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Worst observed violation per axiom over a seeded trial batch.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub star: String,
    pub dims: (usize, usize, usize),
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub violations: BTreeMap<Axiom, f64>,
}

impl AxiomReport {
    pub fn violation(&self, axiom: Axiom) -> f64 {
        self.violations[&axiom]
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.values().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_violation() <= self.tol
    }
}

fn seeded_state(dim: usize, rng: &mut impl Rng) -> PureState {
    haar::haar_state(dim, rng)
}

/// One trial of the full axiom battery; returns per-axiom violations.
fn axiom_trial(star: &StarProduct, dims: (usize, usize, usize), rng: &mut impl Rng) -> Result<[f64; 8]> {
    let (a, b, c) = dims;
    let one = SymPower::ONE;

    let f1 = random_opf(a, one, rng);
    let f2 = random_opf(a, one, rng);
    let h1 = random_opf(b, one, rng);
    let h2 = random_opf(b, one, rng);
    let g = random_opf(b, one, rng);
    let e = random_opf(c, one, rng);
    let u_a = haar::haar_unitary(a, rng);
    let v_b = haar::haar_unitary(b, rng);
    let p = rng.gen::<f64>();
    let psi_ab = seeded_state(a * b, rng);
    let psi_a = seeded_state(a, rng);
    let phi_b = seeded_state(b, rng);
    let psi_abc = seeded_state(a * b * c, rng);
    let product_ab = psi_a.tensor(&phi_b);
    let meas_one = Measurement::from_povm(&haar::random_projective_povm(a, rng))?;
    let meas_two = random_measurement(a, 3, rng);

    let mut out = [0.0f64; 8];

    // bilinearity: mixing before or after composing agrees, per argument
    {
        let weights = [p, 1.0 - p];
        let left_pre = star.apply(&Opf::mix(&[f1.clone(), f2.clone()], &weights)?, &h1)?;
        let left_post = Opf::mix(
            &[star.apply(&f1, &h1)?, star.apply(&f2, &h1)?],
            &weights,
        );
        let left = match left_post {
            Ok(mixed) => (left_pre.eval(&psi_ab)? - mixed.eval(&psi_ab)?).abs(),
            Err(_) => f64::INFINITY,
        };
        let right_pre = star.apply(&f1, &Opf::mix(&[h1.clone(), h2.clone()], &weights)?)?;
        let right_post = Opf::mix(
            &[star.apply(&f1, &h1)?, star.apply(&f1, &h2)?],
            &weights,
        )?;
        let right = (right_pre.eval(&psi_ab)? - right_post.eval(&psi_ab)?).abs();
        out[0] = left.max(right);
    }

    // covariance: local unitaries move through the product
    {
        let lhs = star.apply(&f1.compose_unitary(&u_a)?, &h1)?;
        let rhs = star
            .apply(&f1, &h1)?
            .compose_unitary(&linalg::kron(&u_a, &linalg::identity(b)))?;
        let left = (lhs.eval(&psi_ab)? - rhs.eval(&psi_ab)?).abs();
        let lhs2 = star.apply(&f1, &h1.compose_unitary(&v_b)?)?;
        let rhs2 = star
            .apply(&f1, &h1)?
            .compose_unitary(&linalg::kron(&linalg::identity(a), &v_b))?;
        let right = (lhs2.eval(&psi_ab)? - rhs2.eval(&psi_ab)?).abs();
        out[1] = left.max(right);
    }

    // unit and zero
    out[2] = (star.apply(&Opf::unit(a, one), &Opf::unit(b, one))?.eval(&psi_ab)? - 1.0).abs();
    out[3] = star.apply(&Opf::zero(a, one), &Opf::unit(b, one))?.eval(&psi_ab)?.abs();

    // reduced state on product preparations
    out[4] = (star.apply(&f1, &Opf::unit(b, one))?.eval(&product_ab)? - f1.eval(&psi_a)?).abs();

    // factorization on product preparations
    out[5] = (star.apply(&f1, &g)?.eval(&product_ab)? - f1.eval(&psi_a)? * g.eval(&phi_b)?).abs();

    // associativity on a tripartite state
    {
        let left = star.apply(&star.apply(&f1, &g)?, &e)?;
        let right = star.apply(&f1, &star.apply(&g, &e)?)?;
        out[6] = (left.eval(&psi_abc)? - right.eval(&psi_abc)?).abs();
    }

    // no-signalling: marginal of g under two different remote measurements
    {
        let total = |m: &Measurement| -> Result<f64> {
            let mut acc = 0.0;
            for f in m.outcomes() {
                acc += star.apply(f, &g)?.eval(&psi_ab)?;
            }
            Ok(acc)
        };
        out[7] = (total(&meas_one)? - total(&meas_two)?).abs();
    }

    Ok(out)
}

/// Runs the eight-axiom battery over seeded random trials.
///
/// Trials are independent and run on the worker pool; each derives its
/// RNG from `(seed, index)`, and the max-reduction is order-independent,
/// so reports are reproducible at any thread count.
pub fn check_axioms(
    star: &StarProduct,
    dims: (usize, usize, usize),
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<AxiomReport> {
    if trials < 1 {
        return Err(Error::InsufficientSamples { needed: 1, got: trials });
    }
    let per_trial: Vec<Result<[f64; 8]>> = exec::map_indexed(trials, |t| {
        let mut rng = haar::derived_rng(seed, Stream::AxiomTrial, t as u64);
        axiom_trial(star, dims, &mut rng)
    });
    let mut max = [0.0f64; 8];
    for trial in per_trial {
        let v = trial?;
        for (slot, value) in max.iter_mut().zip(v) {
            *slot = slot.max(value);
        }
    }
    let violations = Axiom::ALL.iter().copied().zip(max).collect();
    Ok(AxiomReport { star: star.label().to_string(), dims, trials, seed, tol, violations })
}

/// Max no-signalling violation over seeded random trials: two remote
/// measurements on `C^a` must induce the same marginal for any OPF on
/// `C^b` and any joint state.
pub fn check_no_signalling(
    star: &StarProduct,
    dims: (usize, usize),
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 1 {
        return Err(Error::InsufficientSamples { needed: 1, got: trials });
    }
    let (a, b) = dims;
    let per_trial: Vec<Result<f64>> = exec::map_indexed(trials, |t| {
        let mut rng = haar::derived_rng(seed, Stream::AxiomTrial, t as u64);
        let g = random_opf(b, SymPower::ONE, &mut rng);
        let psi_ab = haar::haar_state(a * b, &mut rng);
        let meas_one = Measurement::from_povm(&haar::random_projective_povm(a, &mut rng))?;
        let meas_two = random_measurement(a, 3, &mut rng);
        let total = |m: &Measurement| -> Result<f64> {
            let mut acc = 0.0;
            for f in m.outcomes() {
                acc += star.apply(f, &g)?.eval(&psi_ab)?;
            }
            Ok(acc)
        };
        Ok((total(&meas_one)? - total(&meas_two)?).abs())
    });
    let mut max = 0.0f64;
    for v in per_trial {
        max = max.max(v?);
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, outer};

    fn basis_opf(dim: usize, i: usize) -> Opf {
        let e = crate::linalg::basis_vector(dim, i);
        Opf::from_effect(outer(&e, &e)).unwrap()
    }

    #[test]
    fn quantum_star_of_units_is_unit() {
        let out = quantum_star(&Opf::unit(2, SymPower::ONE), &Opf::unit(3, SymPower::ONE)).unwrap();
        assert!(max_abs(&(out.fmat() - linalg::identity(6))) < 1e-14);
    }

    #[test]
    fn quantum_star_of_zero_is_zero() {
        let out = quantum_star(&Opf::zero(2, SymPower::ONE), &Opf::unit(3, SymPower::ONE)).unwrap();
        assert!(max_abs(out.fmat()) < 1e-14);
    }

    #[test]
    fn quantum_star_on_bell_state() {
        let f = basis_opf(2, 0);
        let h = basis_opf(2, 1);
        let joint = quantum_star(&f, &h).unwrap();
        // (|00> + |11>)/sqrt2 assigns 1/2 .. 0 to the |01> outcome pair:
        // <psi| (|0><0| (x) |1><1|) |psi> = |psi_01|^2 = 0.
        let bell = PureState::maximally_entangled(2);
        assert!(joint.eval(&bell).unwrap().abs() < 1e-12);
        let same = quantum_star(&f, &basis_opf(2, 0)).unwrap();
        assert!((same.eval(&bell).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantum_star_rejects_higher_powers() {
        let f = Opf::unit(2, SymPower::new(2).unwrap());
        let h = Opf::unit(2, SymPower::ONE);
        assert!(matches!(quantum_star(&f, &h), Err(Error::UnsupportedPower { got: 2 })));
    }

    #[test]
    fn quantum_axioms_hold_tightly() {
        let report =
            check_axioms(&StarProduct::quantum(), (2, 2, 2), 200, 11, 1e-9).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn factorization_on_many_product_states() {
        let star = StarProduct::quantum();
        let mut rng = haar::seeded_rng(42);
        for _ in 0..1000 {
            let f = random_opf(2, SymPower::ONE, &mut rng);
            let g = random_opf(2, SymPower::ONE, &mut rng);
            let psi = haar::haar_state(2, &mut rng);
            let phi = haar::haar_state(2, &mut rng);
            let joint = star.apply(&f, &g).unwrap();
            let lhs = joint.eval(&psi.tensor(&phi)).unwrap();
            let rhs = f.eval(&psi).unwrap() * g.eval(&phi).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn associativity_on_random_tripartite_states() {
        let star = StarProduct::quantum();
        let mut rng = haar::seeded_rng(43);
        for _ in 0..100 {
            let f = random_opf(2, SymPower::ONE, &mut rng);
            let g = random_opf(2, SymPower::ONE, &mut rng);
            let h = random_opf(2, SymPower::ONE, &mut rng);
            let psi = haar::haar_state(8, &mut rng);
            let left = star.apply(&star.apply(&f, &g).unwrap(), &h).unwrap();
            let right = star.apply(&f, &star.apply(&g, &h).unwrap()).unwrap();
            assert!((left.eval(&psi).unwrap() - right.eval(&psi).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn covariance_identity_on_random_draws() {
        let star = StarProduct::quantum();
        let mut rng = haar::seeded_rng(44);
        for _ in 0..100 {
            let f = random_opf(2, SymPower::ONE, &mut rng);
            let h = random_opf(2, SymPower::ONE, &mut rng);
            let u = haar::haar_unitary(2, &mut rng);
            let psi = haar::haar_state(4, &mut rng);
            let lhs = star.apply(&f.compose_unitary(&u).unwrap(), &h).unwrap();
            let rhs = star
                .apply(&f, &h)
                .unwrap()
                .compose_unitary(&linalg::kron(&u, &linalg::identity(2)))
                .unwrap();
            assert!((lhs.eval(&psi).unwrap() - rhs.eval(&psi).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_marginal_map_recovers_local_value() {
        // g -> (u_a * g)(psi (x) phi) must equal g(phi).
        let star = StarProduct::quantum();
        let mut rng = haar::seeded_rng(45);
        for _ in 0..100 {
            let g = random_opf(2, SymPower::ONE, &mut rng);
            let psi = haar::haar_state(2, &mut rng);
            let phi = haar::haar_state(2, &mut rng);
            let joint = star.apply(&Opf::unit(2, SymPower::ONE), &g).unwrap();
            let lhs = joint.eval(&psi.tensor(&phi)).unwrap();
            assert!((lhs - g.eval(&phi).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn scaled_product_breaks_the_unit_axiom_by_the_scale() {
        let report = check_axioms(&StarProduct::scaled(0.99), (2, 2, 2), 50, 3, 1e-9).unwrap();
        let unit = report.violation(Axiom::Unit);
        assert!((unit - 0.01).abs() < 1e-9, "unit violation {unit}");
    }

    #[test]
    fn broken_product_keeps_unit_and_zero() {
        let report =
            check_axioms(&StarProduct::broken_bilinear(0.01), (2, 2, 2), 100, 5, 1e-9).unwrap();
        assert!(report.violation(Axiom::Unit) < 1e-10);
        assert!(report.violation(Axiom::Zero) < 1e-10);
    }

    #[test]
    fn broken_product_is_flagged() {
        let report =
            check_axioms(&StarProduct::broken_bilinear(0.01), (2, 2, 2), 1000, 7, 1e-9).unwrap();
        assert!(
            report.violation(Axiom::Bilinearity) >= 1e-3,
            "bilinearity violation {}",
            report.violation(Axiom::Bilinearity)
        );
        assert!(report.violation(Axiom::NoSignalling) >= 1e-4);
        let ns = check_no_signalling(&StarProduct::broken_bilinear(0.01), (2, 2), 1000, 7).unwrap();
        assert!(ns > 1e-4);
    }

    #[test]
    fn quantum_no_signalling_is_tight() {
        let ns = check_no_signalling(&StarProduct::quantum(), (2, 2), 200, 9).unwrap();
        assert!(ns < 1e-9);
    }

    #[test]
    fn reports_are_reproducible_for_a_seed() {
        let star = StarProduct::quantum();
        let r1 = check_axioms(&star, (2, 2, 2), 64, 123, 1e-9).unwrap();
        let r2 = check_axioms(&star, (2, 2, 2), 64, 123, 1e-9).unwrap();
        for ax in Axiom::ALL {
            assert_eq!(r1.violation(ax).to_bits(), r2.violation(ax).to_bits());
        }
    }

    #[test]
    fn report_serializes_with_kebab_axiom_ids() {
        let report = check_axioms(&StarProduct::quantum(), (2, 2, 2), 4, 1, 1e-9).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        for ax in Axiom::ALL {
            assert!(json.contains(&format!("\"{}\"", ax.id())), "missing {ax} in {json}");
        }
    }

    #[test]
    fn dims_must_multiply() {
        let bad = StarProduct::new(
            "wrong-dims",
            Arc::new(|f: &Opf, _h: &Opf| Ok(f.clone())),
        );
        let f = Opf::unit(2, SymPower::ONE);
        let h = Opf::unit(2, SymPower::ONE);
        assert!(matches!(bad.apply(&f, &h), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn star_of_projectors_evaluates_via_born_rule() {
        let mut rng = haar::seeded_rng(46);
        let f = basis_opf(2, 0);
        let h = basis_opf(3, 2);
        let joint = quantum_star(&f, &h).unwrap();
        for _ in 0..20 {
            let psi = haar::haar_state(6, &mut rng);
            let direct = {
                let v = psi.amplitudes();
                v[0 * 3 + 2].norm_sqr()
            };
            assert!((joint.eval(&psi).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn trial_count_must_be_positive() {
        assert!(check_axioms(&StarProduct::quantum(), (2, 2, 2), 0, 1, 1e-9).is_err());
    }
}
