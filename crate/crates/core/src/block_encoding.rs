//! Dense simulation of the QFT block-encoding circuit
//! `U = (F^-1 (x) I) U_D (F (x) I)` on a register and one ancilla qubit.
//!
//! Basis ordering is register-major: basis state `|k>|a>` has index
//! `2k + a`. The QFT is `F[j, k] = e^{2 pi i jk/N}/sqrt(N)`, the convention
//! under which `F^-1 diag(lambda) F` equals the spectrally built circulant.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fft::root_of_unity;
use crate::kernel::KernelSpec;
use crate::lattice::{signed_index, FrequencyGrid};
use crate::{Error, Result};

/// Largest simulated unitary dimension in one dimension (`2N`).
pub const MAX_UNITARY_DIM_1D: usize = 1 << 13;
/// Largest simulated unitary dimension in three dimensions (`2N^3`).
pub const MAX_UNITARY_DIM_3D: usize = 1 << 8;

/// Normalized symbol values `phi_k = symbol(xi_k)/lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolOracle {
    phis: Vec<f64>,
    lambda_max: f64,
}

impl SymbolOracle {
    /// One-dimensional oracle. `phi_k = (2|k'|/N)^alpha`, which is the
    /// normalized symbol written so that rational grid points stay exact.
    pub fn one_dimensional(spec: &KernelSpec, n: usize) -> Result<Self> {
        FrequencyGrid::new(n, spec.h())?;
        let phis = (0..n)
            .map(|k| {
                let ratio = 2.0 * signed_index(k, n).unsigned_abs() as f64 / n as f64;
                libm::pow(ratio, spec.alpha())
            })
            .collect();
        Ok(Self {
            phis,
            lambda_max: spec.lambda_max(),
        })
    }

    /// Isotropic three-dimensional oracle normalized by `(sqrt(3) pi/h)^alpha`.
    pub fn three_dimensional(spec: &KernelSpec, n: usize) -> Result<Self> {
        FrequencyGrid::new(n, spec.h())?;
        let r = |k: usize| 2.0 * signed_index(k, n).unsigned_abs() as f64 / n as f64;
        let mut phis = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let q = (r(x) * r(x) + r(y) * r(y) + r(z) * r(z)) / 3.0;
                    phis.push(libm::pow(q, spec.alpha() / 2.0));
                }
            }
        }
        Ok(Self {
            phis,
            lambda_max: spec.lambda_max_3d(),
        })
    }

    /// Arbitrary values; validated by [`diagonal_oracle`].
    pub fn from_phis(phis: Vec<f64>, lambda_max: f64) -> Self {
        Self { phis, lambda_max }
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

/// `U_D = sum_k |k><k| (x) R_y(2 arccos phi_k)`, each block
/// `[[phi, -sqrt(1-phi^2)], [sqrt(1-phi^2), phi]]`.
pub fn diagonal_oracle(oracle: &SymbolOracle) -> Result<DMatrix<Complex64>> {
    let n = oracle.len();
    if let Some((k, phi)) = oracle
        .phis
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0 && **p <= 1.0))
    {
        return Err(Error::domain(format!(
            "oracle amplitude phi_{k} = {phi} lies outside [0, 1]"
        )));
    }
    let mut u = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for (k, &phi) in oracle.phis.iter().enumerate() {
        let s = libm::sqrt(1.0 - phi * phi);
        u[(2 * k, 2 * k)] = Complex64::new(phi, 0.0);
        u[(2 * k, 2 * k + 1)] = Complex64::new(-s, 0.0);
        u[(2 * k + 1, 2 * k)] = Complex64::new(s, 0.0);
        u[(2 * k + 1, 2 * k + 1)] = Complex64::new(phi, 0.0);
    }
    Ok(u)
}

/// `F[j, k] = e^{2 pi i jk/N}/sqrt(N)`.
pub fn qft_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::domain(format!("QFT size must be a power of two, got {n}")));
    }
    let norm = 1.0 / libm::sqrt(n as f64);
    Ok(DMatrix::from_fn(n, n, |j, k| {
        root_of_unity((j * k) as u64, n as u64, 1.0) * norm
    }))
}

/// Dense circuit unitary with its extracted ancilla-`<0|` block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncodingSim {
    register_dim: usize,
    unitary: DMatrix<Complex64>,
    block: DMatrix<Complex64>,
    lambda_max: f64,
}

impl BlockEncodingSim {
    fn assemble(qft: &DMatrix<Complex64>, oracle: &SymbolOracle) -> Result<Self> {
        let n = qft.nrows();
        let ud = diagonal_oracle(oracle)?;
        let id2 = DMatrix::<Complex64>::identity(2, 2);
        let layer = qft.kronecker(&id2);
        let unitary = layer.adjoint() * ud * layer;
        let block = DMatrix::from_fn(n, n, |i, j| unitary[(2 * i, 2 * j)]);
        Ok(Self {
            register_dim: n,
            unitary,
            block,
            lambda_max: oracle.lambda_max,
        })
    }

    pub fn register_dim(&self) -> usize {
        self.register_dim
    }

    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    /// `(I (x) <0|) U (I (x) |0>)`.
    pub fn block(&self) -> &DMatrix<Complex64> {
        &self.block
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Runs the circuit on `|psi>|0>` and returns the unnormalized
    /// ancilla-0 branch of the output.
    pub fn post_selected(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.register_dim {
            return Err(Error::domain("state length does not match the register"));
        }
        let mut full = nalgebra::DVector::<Complex64>::zeros(2 * self.register_dim);
        for (k, v) in psi.iter().enumerate() {
            full[2 * k] = *v;
        }
        let out = &self.unitary * full;
        Ok((0..self.register_dim).map(|k| out[2 * k]).collect())
    }
}

/// Native block encoding of the size-`N` circulant surrogate.
pub fn native_block_encoding(spec: &KernelSpec, n: usize) -> Result<BlockEncodingSim> {
    if 2 * n > MAX_UNITARY_DIM_1D {
        return Err(Error::resource(
            format!("simulated unitary dimension {} exceeds {MAX_UNITARY_DIM_1D}", 2 * n),
            Some(2 * n as u64),
        ));
    }
    let oracle = SymbolOracle::one_dimensional(spec, n)?;
    BlockEncodingSim::assemble(&qft_matrix(n)?, &oracle)
}

/// `(P^T (x) <0|) U^(M) (P (x) |0>)` with `P` the zero-padding isometry.
pub fn compressed_block(spec: &KernelSpec, n: usize, m: usize) -> Result<DMatrix<Complex64>> {
    if !n.is_power_of_two() || !m.is_power_of_two() || m < 2 * n {
        return Err(Error::domain(format!(
            "compressed block needs powers of two with M >= 2N, got N={n}, M={m}"
        )));
    }
    let sim = native_block_encoding(spec, m)?;
    // Isometry |j> -> |j>|0> for j < N.
    let iso = DMatrix::<Complex64>::from_fn(2 * m, n, |r, c| {
        if r == 2 * c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(iso.adjoint() * sim.unitary() * iso)
}

/// Block encoding of the isotropic 3D circulant with `F^(x)3`.
pub fn block_encoding_3d(spec: &KernelSpec, n: usize) -> Result<BlockEncodingSim> {
    let dim = 2 * n * n * n;
    if dim > MAX_UNITARY_DIM_3D {
        return Err(Error::resource(
            format!("simulated 3D unitary dimension {dim} exceeds {MAX_UNITARY_DIM_3D}"),
            Some(dim as u64),
        ));
    }
    let oracle = SymbolOracle::three_dimensional(spec, n)?;
    let f = qft_matrix(n)?;
    let f3 = f.kronecker(&f).kronecker(&f);
    BlockEncodingSim::assemble(&f3, &oracle)
}

/// Phase angle of the oracle rotation, `2 arccos(phi)`.
pub fn rotation_angle(phi: f64) -> f64 {
    2.0 * libm::acos(phi.clamp(-1.0, 1.0))
}
