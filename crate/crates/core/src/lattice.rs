//! Lattice operators: the open-boundary Toeplitz target, the periodic
//! circulant surrogate, zero-padded compressions and their residuals, the
//! exact doubled embedding, and the three-dimensional tensor-product forms.
//!
//! Circulants are built spectrally (inverse DFT of the sampled symbol). The
//! image-sum identities relating them to the kernel are verified in tests,
//! never used as constructors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fft;
use crate::kernel::{symbol, KernelSpec, KernelTable};
use crate::kernel3d::Kernel3dTable;
use crate::{Error, Result};

/// Largest register size for dense 3D targets and compressions.
pub const MAX_DENSE_3D_N: usize = 8;
/// Largest padded size for dense 3D operators.
pub const MAX_DENSE_3D_M: usize = 16;

/// Imaginary residue allowed after an inverse transform, relative to the
/// largest symbol sample.
const IMAG_TOL: f64 = 1e-12;

fn require_power_of_two(n: usize, what: &str) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::domain(format!(
            "{what} must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

fn require_padding(n: usize, m: usize) -> Result<()> {
    require_power_of_two(m, "M")?;
    if !n.is_power_of_two() {
        return Err(Error::domain(format!("N must be a power of two, got {n}")));
    }
    if m < 2 * n {
        return Err(Error::domain(format!(
            "compression needs M >= 2N, got N={n}, M={m}"
        )));
    }
    Ok(())
}

/// FFT-ordered frequencies `2 pi k'/(N h)` with `k' = k` for `k < N/2` and
/// `k' = k - N` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    n: usize,
    h: f64,
    freqs: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        require_power_of_two(n, "register size N")?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("h must be positive, got {h}")));
        }
        let freqs = (0..n)
            .map(|k| 2.0 * PI * signed_index(k, n) as f64 / (n as f64 * h))
            .collect();
        Ok(Self { n, h, freqs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }
}

/// Signed FFT index of slot `k` on an `n`-point grid.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn frequency_grid(n: usize, h: f64) -> Result<FrequencyGrid> {
    FrequencyGrid::new(n, h)
}

/// Geometry tag carried by every [`DenseOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    ToeplitzOpen,
    CirculantPeriodic,
    Compressed,
    Residual,
}

impl Geometry {
    pub fn as_str(&self) -> &'static str {
        match self {
            Geometry::ToeplitzOpen => "toeplitz-open",
            Geometry::CirculantPeriodic => "circulant-periodic",
            Geometry::Compressed => "compressed",
            Geometry::Residual => "residual",
        }
    }
}

/// Spatial layout of the operator's index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// A line of `dim` sites.
    Line,
    /// A cube of `n^3` sites, flat index `(x n + y) n + z`.
    Cube { n: usize },
}

/// Dense real square operator with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    geometry: Geometry,
    spec: Option<KernelSpec>,
    meta: Option<(usize, usize)>,
    layout: Layout,
    spectrum: Option<Vec<Complex64>>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    /// `(N, M)` for compressed and residual operators.
    pub fn meta(&self) -> Option<(usize, usize)> {
        self.meta
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Eigenvalues of a circulant in DFT order (mode `k` has eigenvector
    /// `e^{2 pi i j k / L}`).
    pub fn spectrum(&self) -> Option<&[Complex64]> {
        self.spectrum.as_deref()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// `A x`. One-dimensional circulants of power-of-two size use their
    /// stored spectrum and two FFTs; everything else is a dense product.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "vector length {} does not match operator dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if let (Some(spec), Layout::Line) = (&self.spectrum, self.layout) {
            if x.len().is_power_of_two() {
                return apply_circulant(spec, x);
            }
        }
        let v = nalgebra::DVector::from_column_slice(x);
        Ok((&self.matrix * v).iter().copied().collect())
    }

    fn with_meta(mut self, meta: (usize, usize)) -> Self {
        self.meta = Some(meta);
        self
    }
}

fn apply_circulant(spectrum: &[Complex64], x: &[f64]) -> Result<Vec<f64>> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut buf, false)?;
    for (b, l) in buf.iter_mut().zip(spectrum) {
        *b *= l;
    }
    let out = fft::inverse(&buf)?;
    Ok(out.into_iter().map(|v| v.re).collect())
}

/// Matrix-free circulant surrogate of size `m`, stored as its symbol
/// samples. Used for padded actions where the dense `m x m` matrix is never
/// needed.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOperator {
    spec: KernelSpec,
    spectrum: Vec<Complex64>,
}

impl PeriodicOperator {
    pub fn new(spec: &KernelSpec, m: usize) -> Result<Self> {
        let samples = symbol_samples(spec, m)?;
        Ok(Self {
            spec: *spec,
            spectrum: samples.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::domain("vector length does not match the periodic operator"));
        }
        apply_circulant(&self.spectrum, x)
    }

    /// `compress(A^(M) pad(u))`.
    pub fn padded_apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let padded = pad(u, self.dim())?;
        let out = self.apply(&padded)?;
        compress(&out, u.len())
    }
}

/// Symbol sampled on the FFT grid, `|xi_k|^alpha`.
pub fn symbol_samples(spec: &KernelSpec, n: usize) -> Result<Vec<f64>> {
    let grid = FrequencyGrid::new(n, spec.h())?;
    grid.freqs().iter().map(|&xi| symbol(spec, xi)).collect()
}

fn toeplitz_from(coeff: impl Fn(i64) -> f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| coeff(i as i64 - j as i64))
}

/// Open-boundary target `(A)_{ij} = c_{i-j}`.
pub fn toeplitz_target(spec: &KernelSpec, n: usize, table: &KernelTable) -> Result<DenseOperator> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    table.require(spec, n - 1)?;
    let matrix = toeplitz_from(|d| table.get(d).expect("range checked"), n);
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::ToeplitzOpen,
        spec: Some(*spec),
        meta: None,
        layout: Layout::Line,
        spectrum: None,
    })
}

/// Periodic surrogate: inverse DFT of the symbol sampled on the FFT grid.
pub fn circulant_surrogate(spec: &KernelSpec, n: usize) -> Result<DenseOperator> {
    let samples = symbol_samples(spec, n)?;
    let column = fft::inverse_real(&samples, IMAG_TOL * spec.lambda_max().max(1.0))?;
    let matrix = DMatrix::from_fn(n, n, |i, j| column[(i + n - j) % n]);
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::CirculantPeriodic,
        spec: Some(*spec),
        meta: None,
        layout: Layout::Line,
        spectrum: Some(samples.into_iter().map(|v| Complex64::new(v, 0.0)).collect()),
    })
}

/// `circulant_surrogate - toeplitz_target`, the periodic images.
pub fn aliasing_difference(spec: &KernelSpec, n: usize, table: &KernelTable) -> Result<DenseOperator> {
    let c = circulant_surrogate(spec, n)?;
    let t = toeplitz_target(spec, n, table)?;
    Ok(DenseOperator {
        matrix: c.matrix - t.matrix,
        geometry: Geometry::Residual,
        spec: Some(*spec),
        meta: Some((n, n)),
        layout: Layout::Line,
        spectrum: None,
    })
}

/// Zero-extends a length-`N` vector to length `m`.
pub fn pad<T: Copy + Default>(v: &[T], m: usize) -> Result<Vec<T>> {
    if m < v.len() {
        return Err(Error::domain(format!(
            "cannot pad length {} down to {m}",
            v.len()
        )));
    }
    let mut out = vec![T::default(); m];
    out[..v.len()].copy_from_slice(v);
    Ok(out)
}

/// Keeps the first `n` entries.
pub fn compress<T: Copy>(v: &[T], n: usize) -> Result<Vec<T>> {
    if n > v.len() {
        return Err(Error::domain(format!(
            "cannot compress length {} up to {n}",
            v.len()
        )));
    }
    Ok(v[..n].to_vec())
}

/// Leading `count` entries of the first column of the size-`m` circulant
/// surrogate, computed without forming the `m`-point symbol vector.
pub fn periodic_column(spec: &KernelSpec, m: usize, count: usize) -> Result<Vec<f64>> {
    require_power_of_two(m, "M")?;
    let width = count.next_power_of_two().min(m);
    let h = spec.h();
    let alpha = spec.alpha();
    let mf = m as f64;
    let sample = |k: u64| {
        let s = signed_index(k as usize, m) as f64;
        // |2 pi s/(M h)|^alpha; |s| <= M/2 keeps it inside the cell.
        libm::pow((2.0 * PI * s / (mf * h)).abs(), alpha)
    };
    let mut col = fft::leading_inverse(m as u64, width, sample, IMAG_TOL * spec.lambda_max().max(1.0))?;
    col.truncate(count);
    Ok(col)
}

/// Leading `N x N` block of the size-`M` circulant, `M >= 2N`.
pub fn compressed_operator(spec: &KernelSpec, n: usize, m: usize) -> Result<DenseOperator> {
    require_padding(n, m)?;
    let col = periodic_column(spec, m, n)?;
    // Symmetric circulant: entry (i, j) is col[|i - j|] for |i - j| < N.
    let matrix = toeplitz_from(|d| col[d.unsigned_abs() as usize], n);
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::Compressed,
        spec: Some(*spec),
        meta: None,
        layout: Layout::Line,
        spectrum: None,
    }
    .with_meta((n, m)))
}

/// `compressed_operator - toeplitz_target`.
pub fn residual(spec: &KernelSpec, n: usize, m: usize, table: &KernelTable) -> Result<DenseOperator> {
    let c = compressed_operator(spec, n, m)?;
    let t = toeplitz_target(spec, n, table)?;
    Ok(DenseOperator {
        matrix: c.matrix - t.matrix,
        geometry: Geometry::Residual,
        spec: Some(*spec),
        meta: Some((n, m)),
        layout: Layout::Line,
        spectrum: None,
    })
}

/// Generator `(c_0, .., c_{N-1}, 0, c_{N-1}, .., c_1)` of the `2N`
/// circulant whose leading `N x N` block is exactly the Toeplitz target.
pub fn exact_embedding_generator(spec: &KernelSpec, n: usize, table: &KernelTable) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    table.require(spec, n - 1)?;
    let c = table.coeffs();
    let mut g = Vec::with_capacity(2 * n);
    g.extend_from_slice(&c[..n]);
    g.push(0.0);
    g.extend((1..n).rev().map(|r| c[r]));
    Ok(g)
}

/// Circulant with entries `g[(i - j) mod L]`.
pub fn circulant_from_generator(g: &[f64]) -> Result<DenseOperator> {
    let l = g.len();
    if l == 0 {
        return Err(Error::domain("generator must be non-empty"));
    }
    let matrix = DMatrix::from_fn(l, l, |i, j| g[(i + l - j) % l]);
    let gc: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spectrum = if l.is_power_of_two() {
        fft::forward(&gc)?
    } else {
        fft::forward_naive(&gc)
    };
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::CirculantPeriodic,
        spec: None,
        meta: None,
        layout: Layout::Line,
        spectrum: Some(spectrum),
    })
}

/// Leading `N x N` block of a dense operator (the compression `P^T A P`).
pub fn compress_operator(op: &DenseOperator, n: usize) -> Result<DenseOperator> {
    if n > op.dim() {
        return Err(Error::domain("compression size exceeds the operator"));
    }
    Ok(DenseOperator {
        matrix: op.matrix.view((0, 0), (n, n)).into_owned(),
        geometry: Geometry::Compressed,
        spec: op.spec,
        meta: Some((n, op.dim())),
        layout: Layout::Line,
        spectrum: None,
    })
}

/// Splits a flat cube index into its three coordinates.
pub fn unflatten(i: usize, n: usize) -> [usize; 3] {
    [i / (n * n), (i / n) % n, i % n]
}

fn cube_operator(n: usize, entry: impl Fn([usize; 3], [usize; 3]) -> f64) -> DMatrix<f64> {
    let dim = n * n * n;
    DMatrix::from_fn(dim, dim, |i, j| entry(unflatten(i, n), unflatten(j, n)))
}

/// Three-dimensional block-Toeplitz target `c_{i - j}`.
pub fn toeplitz_target_3d(spec: &KernelSpec, n: usize, table: &Kernel3dTable) -> Result<DenseOperator> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if n > MAX_DENSE_3D_N {
        return Err(Error::resource(
            format!("dense 3D target caps N at {MAX_DENSE_3D_N}, got {n}"),
            Some((n * n * n) as u64),
        ));
    }
    table.require(spec, n - 1)?;
    let matrix = cube_operator(n, |a, b| {
        let d = [0, 1, 2].map(|k| a[k] as i64 - b[k] as i64);
        table.get(d).expect("range checked")
    });
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::ToeplitzOpen,
        spec: Some(*spec),
        meta: None,
        layout: Layout::Cube { n },
        spectrum: None,
    })
}

/// Isotropic symbol `(|xi_x|^2 + |xi_y|^2 + |xi_z|^2)^{alpha/2}` on the
/// `n^3` grid, flat index `(x n + y) n + z`.
pub fn symbol_samples_3d(spec: &KernelSpec, n: usize) -> Result<Vec<f64>> {
    let grid = FrequencyGrid::new(n, spec.h())?;
    let f = grid.freqs();
    let mut out = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let s2 = f[x] * f[x] + f[y] * f[y] + f[z] * f[z];
                out.push(libm::pow(s2, spec.alpha() / 2.0));
            }
        }
    }
    Ok(out)
}

/// First column of the `m^3` circulant, indexed by the wrapped offset.
fn periodic_column_3d(spec: &KernelSpec, m: usize) -> Result<Vec<f64>> {
    let samples = symbol_samples_3d(spec, m)?;
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::inverse_3d(&mut buf, m)?;
    let tol = IMAG_TOL * spec.lambda_max_3d().max(1.0);
    let residue = buf.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
    if residue > tol {
        return Err(Error::numerical("3D inverse transform left an imaginary residue", residue));
    }
    Ok(buf.into_iter().map(|v| v.re).collect())
}

/// Three-dimensional periodic surrogate of size `n^3`.
pub fn circulant_surrogate_3d(spec: &KernelSpec, n: usize) -> Result<DenseOperator> {
    require_power_of_two(n, "register size N")?;
    if n > MAX_DENSE_3D_M {
        return Err(Error::resource(
            format!("dense 3D circulant caps N at {MAX_DENSE_3D_M}, got {n}"),
            Some((n * n * n) as u64),
        ));
    }
    let col = periodic_column_3d(spec, n)?;
    let matrix = cube_operator(n, |a, b| {
        let w = [0, 1, 2].map(|k| (a[k] + n - b[k]) % n);
        col[(w[0] * n + w[1]) * n + w[2]]
    });
    let spectrum = symbol_samples_3d(spec, n)?
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::CirculantPeriodic,
        spec: Some(*spec),
        meta: None,
        layout: Layout::Cube { n },
        spectrum: Some(spectrum),
    })
}

/// Per-axis compression of the `m^3` circulant onto the `n^3` cube.
pub fn compressed_operator_3d(spec: &KernelSpec, n: usize, m: usize) -> Result<DenseOperator> {
    require_padding(n, m)?;
    if m > MAX_DENSE_3D_M || n > MAX_DENSE_3D_N {
        return Err(Error::resource(
            format!("dense 3D compression caps N at {MAX_DENSE_3D_N} and M at {MAX_DENSE_3D_M}"),
            Some((m * m * m) as u64),
        ));
    }
    let col = periodic_column_3d(spec, m)?;
    let matrix = cube_operator(n, |a, b| {
        let w = [0, 1, 2].map(|k| (a[k] + m - b[k]) % m);
        col[(w[0] * m + w[1]) * m + w[2]]
    });
    Ok(DenseOperator {
        matrix,
        geometry: Geometry::Compressed,
        spec: Some(*spec),
        meta: Some((n, m)),
        layout: Layout::Cube { n },
        spectrum: None,
    })
}

/// `compressed_operator_3d - toeplitz_target_3d`.
pub fn residual_3d(spec: &KernelSpec, n: usize, m: usize, table: &Kernel3dTable) -> Result<DenseOperator> {
    let c = compressed_operator_3d(spec, n, m)?;
    let t = toeplitz_target_3d(spec, n, table)?;
    Ok(DenseOperator {
        matrix: c.matrix - t.matrix,
        geometry: Geometry::Residual,
        spec: Some(*spec),
        meta: Some((n, m)),
        layout: Layout::Cube { n },
        spectrum: None,
    })
}

/// `circulant_surrogate_3d - toeplitz_target_3d`.
pub fn aliasing_difference_3d(spec: &KernelSpec, n: usize, table: &Kernel3dTable) -> Result<DenseOperator> {
    let c = circulant_surrogate_3d(spec, n)?;
    let t = toeplitz_target_3d(spec, n, table)?;
    Ok(DenseOperator {
        matrix: c.matrix - t.matrix,
        geometry: Geometry::Residual,
        spec: Some(*spec),
        meta: Some((n, n)),
        layout: Layout::Cube { n },
        spectrum: None,
    })
}
