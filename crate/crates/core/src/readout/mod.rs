//! Simulators for hypothetical post-quantum readout devices.
//!
//! These devices read global properties of a preparation — the reduced
//! density matrix itself, or a finite-precision entropy of it — rather
//! than sampling a POVM. Feeding them proper mixtures of bipartite pure
//! states reproduces the operational phenomena they create: signalling
//! through remote measurements, distinguishability of proper from
//! improper mixtures, and sequential statistics no quadratic form fits.

mod devices;
mod distribution;
mod mixture;
mod sequential;
mod signalling;

pub use devices::{
    cnot_entropy_opf, cnot_gate, device_distribution, fpem_closed_form_bin, fpem_protocol_bin,
    m_fpem, m_sr, Device, EntropyBin,
};
pub use distribution::{OutcomeDistribution, OutcomeKey, SrOutcome};
pub use mixture::ProperMixture;
pub use sequential::{
    hermitian_basis, quadratic_fit_residual, sequential_spo_then_povm, JointDistribution,
    QuadraticFit,
};
pub use signalling::{detect_signalling, remote_projective_measure, SignallingReport};
