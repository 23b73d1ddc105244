use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Default cap on the embedding dimension `a^k` of a symmetric subspace.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// `binom(a+k-1, k)`, the dimension of the k-fold symmetric subspace of
/// `(C^a)^{(x)k}`.
pub fn symmetric_dimension(a: usize, k: usize) -> usize {
    // n choose k with n = a+k-1; sizes stay well inside u128.
    let n = (a + k - 1) as u128;
    let k = k as u128;
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out as usize
}

/// The k-fold symmetric subspace of `(C^a)^{(x)k}`: an isometry onto an
/// orthonormal occupation-number basis, and the corresponding projector.
#[derive(Debug)]
pub struct SymmetricSubspace {
    dim: usize,
    power: usize,
    isometry: CMatrix,
    projector: OnceLock<CMatrix>,
}

impl SymmetricSubspace {
    pub const IDEMPOTENCY_TOL: f64 = 1e-10;

    /// Cached lookup; builds the subspace on first use.
    pub fn get(a: usize, k: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SymmetricSubspace>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(hit) = cache.lock().unwrap().get(&(a, k)) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::build(a, k, DEFAULT_SIZE_CAP)?);
        cache.lock().unwrap().insert((a, k), built.clone());
        Ok(built)
    }

    /// Uncached construction with an explicit size cap on `a^k`.
    pub fn build(a: usize, k: usize, cap: usize) -> Result<Self> {
        if a < 2 {
            return Err(Error::InvalidState(format!("subsystem dimension {a} must be >= 2")));
        }
        if k < 1 {
            return Err(Error::UnsupportedPower { got: k });
        }
        let full: usize = a
            .checked_pow(k as u32)
            .filter(|&f| f <= cap)
            .ok_or(Error::SizeCapExceeded { requested: a.saturating_pow(k as u32), cap })?;

        // Group the a^k product-basis sequences by their sorted digit
        // multiset; each class carries one normalized symmetric basis vector.
        let mut classes: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
        for seq in 0..full {
            let mut digits = Vec::with_capacity(k);
            let mut rest = seq;
            for _ in 0..k {
                digits.push((rest % a) as u8);
                rest /= a;
            }
            digits.sort_unstable();
            classes.entry(digits).or_default().push(seq);
        }
        let d = symmetric_dimension(a, k);
        debug_assert_eq!(classes.len(), d);

        let mut isometry = CMatrix::zeros(full, d);
        for (col, members) in classes.values().enumerate() {
            let w = Complex64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
            for &row in members {
                isometry[(row, col)] = w;
            }
        }
        Ok(Self { dim: a, power: k, isometry, projector: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn power(&self) -> usize {
        self.power
    }

    /// Symmetric-subspace dimension `D`.
    pub fn rank(&self) -> usize {
        self.isometry.ncols()
    }

    /// Embedding dimension `a^k`.
    pub fn full_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// The `a^k x D` isometry `V` with `V† V = 1_D`.
    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    /// The `a^k x a^k` orthogonal projector `V V†`, built lazily.
    pub fn projector(&self) -> &CMatrix {
        self.projector.get_or_init(|| &self.isometry * self.isometry.adjoint())
    }

    /// Coordinates of `psi^{(x)k}` in the symmetric basis.
    pub fn symmetric_coords(&self, psi: &CVector) -> Result<CVector> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: psi.len() });
        }
        let power = linalg::kron_power_vec(psi, self.power);
        Ok(self.isometry.adjoint() * power)
    }

    /// Restriction `V† U^{(x)k} V` of a product unitary to the subspace.
    pub fn restrict_unitary(&self, u: &CMatrix) -> Result<CMatrix> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: u.nrows() });
        }
        let dev = linalg::unitarity_error(u);
        if dev > 1e-10 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let upow = linalg::kron_power(u, self.power);
        Ok(self.isometry.adjoint() * upow * &self.isometry)
    }

    /// Restriction `V† X V` of an arbitrary operator on `(C^a)^{(x)k}`.
    pub fn restrict_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        let full = self.full_dim();
        if x.nrows() != full || x.ncols() != full {
            return Err(Error::DimensionMismatch { expected: full, actual: x.nrows() });
        }
        Ok(self.isometry.adjoint() * x * &self.isometry)
    }
}
