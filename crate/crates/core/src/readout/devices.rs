use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::OutcomeFn;
use crate::linalg::{self, CMatrix};
use crate::quantum::{reduced_density, EntropyKind, Povm, PureState, Subsystem};

use super::distribution::{OutcomeDistribution, OutcomeKey};
use super::mixture::ProperMixture;

/// Grid width of the entropy meter's outcome set.
const BIN_WIDTH: f64 = 0.01;

/// An entropy-meter outcome: a multiple of 0.01, stored in hundredths.
/// Not to be confused with the symmetric tensor power of an OPF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct EntropyBin {
    hundredths: u32,
}

impl EntropyBin {
    pub fn from_hundredths(hundredths: u32) -> Self {
        Self { hundredths }
    }

    /// Parses a grid value like `0.72`; must be a multiple of 0.01
    /// within 1e-12.
    pub fn from_value(value: f64) -> Result<Self> {
        if !(0.0..=1e6).contains(&value) {
            return Err(Error::InvalidState(format!("bin value {value} out of range")));
        }
        let scaled = value / BIN_WIDTH;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "bin value {value} is not a multiple of {BIN_WIDTH}"
            )));
        }
        Ok(Self { hundredths: rounded as u32 })
    }

    pub fn hundredths(&self) -> u32 {
        self.hundredths
    }

    pub fn value(&self) -> f64 {
        self.hundredths as f64 * BIN_WIDTH
    }

    /// Number of bins available for a system of dimension `dim`:
    /// the grid {0, 0.01, ...} covering entropies up to `log2(dim)`,
    /// with the exact top value absorbed into the last bin.
    pub fn bin_count(dim: usize) -> u32 {
        ((dim as f64).log2() * 100.0).ceil() as u32
    }

    /// Bins an entropy value for a system of dimension `dim`: the largest
    /// grid value `<= s`, with `s = log2(dim)` mapped to the top bin.
    pub fn of_entropy(s: f64, dim: usize) -> Self {
        let raw = (s.max(0.0) / BIN_WIDTH).floor() as i64;
        let top = i64::from(Self::bin_count(dim)) - 1;
        Self { hundredths: raw.min(top).max(0) as u32 }
    }

    /// Indicator `bin <= s < bin + 0.01` (top bin takes the closed end).
    pub fn contains(&self, s: f64, dim: usize) -> bool {
        Self::of_entropy(s, dim) == *self
    }
}

impl std::fmt::Display for EntropyBin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}", self.value())
    }
}

/// Rounds every entry of a matrix to the lattice `precision * Z^2`.
fn round_matrix(m: &CMatrix, precision: f64) -> CMatrix {
    m.map(|z| {
        Complex64::new(
            (z.re / precision).round() * precision,
            (z.im / precision).round() * precision,
        )
    })
}

/// State-readout device: for each part of the mixture, emits a classical
/// description of the reduced density matrix of the first subsystem,
/// rounded entrywise at `precision`; identical readouts merge.
pub fn m_sr(input: &ProperMixture, precision: f64) -> Result<OutcomeDistribution> {
    if !(precision > 0.0) {
        return Err(Error::InvalidState(format!("precision {precision} must be positive")));
    }
    let dims = input.dims();
    let mut dist = OutcomeDistribution::new();
    for (p, psi) in input.parts() {
        let rho = reduced_density(psi, dims, Subsystem::A)?;
        let rounded = round_matrix(rho.matrix(), precision);
        dist.add(OutcomeKey::from_rounded_matrix(&rounded), *p);
    }
    Ok(dist)
}

/// Finite-precision entropy meter: bins the chosen entropy of the reduced
/// state of `side` for each part of the mixture.
pub fn m_fpem(
    input: &ProperMixture,
    side: Subsystem,
    entropy: EntropyKind,
) -> Result<OutcomeDistribution> {
    let dims = input.dims();
    let d = match side {
        Subsystem::A => dims.0,
        Subsystem::B => dims.1,
    };
    let mut dist = OutcomeDistribution::new();
    for (p, psi) in input.parts() {
        let rho = reduced_density(psi, dims, side)?;
        let s = entropy.entropy(&rho);
        dist.add(OutcomeKey::Bin(EntropyBin::of_entropy(s, d)), *p);
    }
    Ok(dist)
}

/// A readout applied to proper mixtures of bipartite pure states.
#[derive(Debug, Clone)]
pub enum Device {
    /// Post-quantum state readout of subsystem A.
    StateReadout { precision: f64 },
    /// Post-quantum finite-precision entropy meter.
    EntropyMeter { side: Subsystem, entropy: EntropyKind },
    /// Ordinary quantum device: Born-rule marginal of a POVM on A.
    BornMarginal { povm: Povm },
}

impl Device {
    pub fn label(&self) -> String {
        match self {
            Device::StateReadout { precision } => format!("state-readout(precision={precision})"),
            Device::EntropyMeter { side, entropy } => {
                format!("entropy-meter({side:?}, {entropy})")
            }
            Device::BornMarginal { povm } => format!("born-marginal({} outcomes)", povm.len()),
        }
    }
}

/// Outcome distribution of a device on a proper mixture.
pub fn device_distribution(device: &Device, input: &ProperMixture) -> Result<OutcomeDistribution> {
    match device {
        Device::StateReadout { precision } => m_sr(input, *precision),
        Device::EntropyMeter { side, entropy } => m_fpem(input, *side, *entropy),
        Device::BornMarginal { povm } => {
            let dims = input.dims();
            if povm.dim() != dims.0 {
                return Err(Error::DimensionMismatch { expected: dims.0, actual: povm.dim() });
            }
            let mut dist = OutcomeDistribution::new();
            for (p, psi) in input.parts() {
                let rho = reduced_density(psi, dims, Subsystem::A)?;
                for (i, q) in povm.born_probs_density(&rho)?.into_iter().enumerate() {
                    if q > 0.0 {
                        dist.add(OutcomeKey::Index(i), p * q);
                    }
                }
            }
            Ok(dist)
        }
    }
}

/// Controlled-NOT on two qubits, control first.
pub fn cnot_gate() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = Complex64::ONE;
    m[(1, 1)] = Complex64::ONE;
    m[(2, 3)] = Complex64::ONE;
    m[(3, 2)] = Complex64::ONE;
    m
}

/// Runs the three-step entropy-readout protocol on a qubit ray: prepare
/// an ancilla in `|0>`, apply CNOT, feed subsystem A to the entropy
/// meter. Returns the single deterministic bin.
pub fn fpem_protocol_bin(psi: &PureState, entropy: EntropyKind) -> Result<EntropyBin> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: psi.dim() });
    }
    let joint = PureState::new(cnot_gate() * linalg::kron_vec(
        psi.amplitudes(),
        &linalg::basis_vector(2, 0),
    ))?;
    let mixture = ProperMixture::from_pure(joint, (2, 2))?;
    let dist = m_fpem(&mixture, Subsystem::A, entropy)?;
    let mut entries = dist.entries();
    match (entries.next(), entries.next()) {
        (Some((OutcomeKey::Bin(bin), _)), None) => Ok(*bin),
        _ => Err(Error::InvalidState("protocol did not yield a single bin".into())),
    }
}

/// Closed-form bin of the same protocol, straight from the amplitudes.
pub fn fpem_closed_form_bin(psi: &PureState, entropy: EntropyKind) -> Result<EntropyBin> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: psi.dim() });
    }
    let p0 = psi.amplitudes()[0].norm_sqr();
    let p1 = psi.amplitudes()[1].norm_sqr();
    let s = match entropy {
        EntropyKind::VonNeumann => {
            let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
            term(p0) + term(p1)
        }
        EntropyKind::Renyi2 => -(p0 * p0 + p1 * p1).log2(),
    };
    Ok(EntropyBin::of_entropy(s, 2))
}

/// The 0/1-valued outcome function selecting one entropy bin, realized by
/// the full three-step protocol.
pub fn cnot_entropy_opf(bin: EntropyBin, entropy: EntropyKind) -> OutcomeFn {
    OutcomeFn::new(
        format!("entropy-bin[{bin}, {entropy}]"),
        2,
        std::sync::Arc::new(move |psi| {
            let got = fpem_protocol_bin(psi, entropy).expect("qubit protocol");
            f64::from(got == bin)
        }),
    )
}
