//! Functional and state-level experiments comparing the open-boundary
//! target, the native periodic surrogate and the zero-padded compression.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::kernel::{tail_sum, KernelSpec, KernelTable, QuadratureConfig};
use crate::lattice::{circulant_surrogate, compressed_operator, toeplitz_target, DenseOperator};
use crate::{Error, Result};

/// Sampled input function on `x_j = j h`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub name: &'static str,
    pub samples: Vec<f64>,
}

/// Gaussian bump (width `N/16` sites) at the midpoint, `(1 - y^2)^2` on the
/// mapped unit interval, and a half-period sine. All vanish at both ends.
pub fn benchmark_functions(n: usize, h: f64) -> Result<[TestFunction; 3]> {
    if n < 8 {
        return Err(Error::domain(format!("benchmark functions need N >= 8, got {n}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("h must be positive, got {h}")));
    }
    let length = (n - 1) as f64 * h;
    let mid = (n - 1) as f64 / 2.0;
    let sigma = n as f64 / 16.0;
    let gaussian = (0..n)
        .map(|j| {
            let d = j as f64 - mid;
            libm::exp(-d * d / (2.0 * sigma * sigma))
        })
        .collect();
    let poly = (0..n)
        .map(|j| {
            let y = 2.0 * j as f64 * h / length - 1.0;
            let b = (1.0 - y * y).max(0.0);
            b * b
        })
        .collect();
    let sine = (0..n)
        .map(|j| {
            // The right end is pinned to zero rather than sin(pi) ~ 1e-16.
            if j == n - 1 {
                0.0
            } else {
                libm::sin(PI * j as f64 * h / length)
            }
        })
        .collect();
    Ok([
        TestFunction { name: "gaussian", samples: gaussian },
        TestFunction { name: "poly", samples: poly },
        TestFunction { name: "sine", samples: sine },
    ])
}

/// Target, native and padded actions on one input.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalComparison {
    pub target: Vec<f64>,
    pub native: Vec<f64>,
    pub padded: Vec<f64>,
    pub native_error: Vec<f64>,
    pub padded_error: Vec<f64>,
}

impl FunctionalComparison {
    pub fn max_native_error(&self) -> f64 {
        self.native_error.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_padded_error(&self) -> f64 {
        self.padded_error.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// The three operators of a comparison, built once and reused.
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    pub target: DenseOperator,
    pub native: DenseOperator,
    pub padded: DenseOperator,
}

impl OperatorTriple {
    pub fn new(spec: &KernelSpec, n: usize, m: usize) -> Result<Self> {
        let table = KernelTable::new(*spec, n.saturating_sub(1), QuadratureConfig::default().tol)?;
        Ok(Self {
            target: toeplitz_target(spec, n, &table)?,
            native: circulant_surrogate(spec, n)?,
            padded: compressed_operator(spec, n, m)?,
        })
    }

    pub fn compare(&self, u: &[f64]) -> Result<FunctionalComparison> {
        let target = self.target.apply(u)?;
        let native = self.native.apply(u)?;
        let padded = self.padded.apply(u)?;
        let diff = |v: &[f64]| v.iter().zip(&target).map(|(a, b)| (a - b).abs()).collect();
        Ok(FunctionalComparison {
            native_error: diff(&native),
            padded_error: diff(&padded),
            target,
            native,
            padded,
        })
    }
}

/// `A u`, native `A~ u` and `P^T A~^(M) P u` with pointwise errors.
pub fn functional_comparison(
    spec: &KernelSpec,
    n: usize,
    m: usize,
    u: &TestFunction,
) -> Result<FunctionalComparison> {
    if u.samples.len() != n {
        return Err(Error::domain(format!(
            "function '{}' has {} samples but N = {n}",
            u.name,
            u.samples.len()
        )));
    }
    OperatorTriple::new(spec, n, m)?.compare(&u.samples)
}

/// Unit-norm Gaussian `exp(-(j - j0)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n: usize,
    center: usize,
    sigma: f64,
    samples: Vec<f64>,
}

impl GaussianState {
    pub fn new(n: usize, center: usize, sigma: f64) -> Result<Self> {
        if center >= n {
            return Err(Error::domain(format!("center {center} outside [0, {n})")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        let mut samples: Vec<f64> = (0..n)
            .map(|j| {
                let d = j as f64 - center as f64;
                libm::exp(-d * d / (2.0 * sigma * sigma))
            })
            .collect();
        let norm = libm::sqrt(samples.iter().map(|v| v * v).sum::<f64>());
        samples.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { n, center, sigma, samples })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

fn relative_gap(v: &[f64], target: &[f64]) -> f64 {
    let d: Vec<f64> = v.iter().zip(target).map(|(a, b)| a - b).collect();
    norm(&d) / norm(target)
}

/// Operator outputs on a Gaussian state, padded with `M = 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDiagnostics {
    pub state: GaussianState,
    pub target: Vec<f64>,
    pub native: Vec<f64>,
    pub padded: Vec<f64>,
}

impl GaussianDiagnostics {
    /// `||(A~ - A) u|| / ||A u||`.
    pub fn native_relative_error(&self) -> f64 {
        relative_gap(&self.native, &self.target)
    }

    /// `||(P^T A~^(2N) P - A) u|| / ||A u||`.
    pub fn padded_relative_error(&self) -> f64 {
        relative_gap(&self.padded, &self.target)
    }
}

pub fn gaussian_diagnostics(spec: &KernelSpec, n: usize, center: usize, sigma: f64) -> Result<GaussianDiagnostics> {
    let state = GaussianState::new(n, center, sigma)?;
    let c = OperatorTriple::new(spec, n, 2 * n)?.compare(state.samples())?;
    Ok(GaussianDiagnostics {
        state,
        target: c.target,
        native: c.native,
        padded: c.padded,
    })
}

/// Relative state errors at one sweep center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub center: usize,
    pub native: f64,
    pub padded: f64,
}

/// Relative errors of both surrogates (padded with `M = 2N`) for Gaussians
/// centered at each entry of `centers`.
pub fn center_sweep(spec: &KernelSpec, n: usize, sigma: f64, centers: &[usize]) -> Result<Vec<SweepPoint>> {
    let ops = OperatorTriple::new(spec, n, 2 * n)?;
    centers
        .iter()
        .map(|&center| {
            let state = GaussianState::new(n, center, sigma)?;
            let c = ops.compare(state.samples())?;
            Ok(SweepPoint {
                center,
                native: relative_gap(&c.native, &c.target),
                padded: relative_gap(&c.padded, &c.target),
            })
        })
        .collect()
}

/// The `(0, N-1)` entries of target and native surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerReport {
    pub n: usize,
    /// `c_{-(N-1)}`.
    pub target: f64,
    pub surrogate: f64,
    pub difference: f64,
    /// The nearest image `c_1`.
    pub dominant_image: f64,
    /// Bound on `|difference - c_1|`: every other image sits at distance at
    /// least `N + 1`.
    pub remainder_bound: f64,
}

impl CornerReport {
    pub fn image_dominates(&self) -> bool {
        (self.difference - self.dominant_image).abs() <= self.remainder_bound
    }
}

pub fn corner_report(spec: &KernelSpec, n: usize) -> Result<CornerReport> {
    if n < 2 {
        return Err(Error::domain(format!("corner report needs N >= 2, got {n}")));
    }
    let table = KernelTable::new(*spec, n.max(2) - 1, QuadratureConfig::default().tol)?;
    let target = toeplitz_target(spec, n, &table)?.entry(0, n - 1);
    let surrogate = circulant_surrogate(spec, n)?.entry(0, n - 1);
    let k = n as u64 + 1;
    let remainder_bound = tail_sum(spec, k, k + crate::error_analysis::DEFAULT_TAIL_WINDOW)?.bound();
    Ok(CornerReport {
        n,
        target,
        surrogate,
        difference: surrogate - target,
        dominant_image: table.get(1).expect("N >= 2"),
        remainder_bound,
    })
}

/// Matrices behind the structure heatmap.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapData {
    pub target: DMatrix<f64>,
    pub surrogate: DMatrix<f64>,
    /// Entrywise `|A~ - A|`.
    pub difference: DMatrix<f64>,
}

impl HeatmapData {
    /// True when the largest entry of `difference` lies in one of the two
    /// opposite corner blocks of side `block`.
    pub fn corner_blocks_dominate(&self, block: usize) -> bool {
        let n = self.difference.nrows();
        let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
        for j in 0..n {
            for i in 0..n {
                let v = self.difference[(i, j)];
                if v > best {
                    best = v;
                    at = (i, j);
                }
            }
        }
        let (i, j) = at;
        (i < block && j >= n - block) || (i >= n - block && j < block)
    }
}

pub fn heatmap(spec: &KernelSpec, n: usize) -> Result<HeatmapData> {
    let table = KernelTable::new(*spec, n.saturating_sub(1), QuadratureConfig::default().tol)?;
    let target = toeplitz_target(spec, n, &table)?.into_matrix();
    let surrogate = circulant_surrogate(spec, n)?.into_matrix();
    let difference = (&surrogate - &target).abs();
    Ok(HeatmapData { target, surrogate, difference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_analysis::residual_norm;
    use proptest::prelude::*;

    fn spec(alpha: f64) -> KernelSpec {
        KernelSpec::new(alpha, 1.0).unwrap()
    }

    #[test]
    fn benchmark_endpoints_vanish() {
        for f in benchmark_functions(64, 1.0).unwrap() {
            let max = f.samples.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            assert!(f.samples[0].abs() < 1e-8 * max, "{}", f.name);
            assert!(f.samples[63].abs() < 1e-8 * max, "{}", f.name);
        }
        let [g, p, _] = benchmark_functions(64, 0.5).unwrap();
        for j in 0..64 {
            assert_eq!(g.samples[j], g.samples[63 - j]);
        }
        assert_eq!((p.samples[0], p.samples[63]), (0.0, 0.0));
        assert!(benchmark_functions(4, 1.0).is_err());
    }

    #[test]
    fn functional_errors_frozen() {
        // Max pointwise errors from an independent numpy prototype
        // (scipy quad for the kernel, numpy ifft for the circulants).
        let want = [
            ("gaussian", 6.434427e-4, 8.095783e-6),
            ("poly", 5.595097e-3, 2.733463e-5),
            ("sine", 1.131302e-2, 3.266987e-5),
        ];
        let s = spec(1.5);
        for (f, (name, native, padded)) in benchmark_functions(64, 1.0).unwrap().iter().zip(want) {
            assert_eq!(f.name, name);
            let c = functional_comparison(&s, 64, 256, f).unwrap();
            assert!((c.max_native_error() / native - 1.0).abs() < 1e-5, "{name}");
            assert!((c.max_padded_error() / padded - 1.0).abs() < 1e-5, "{name}");
            assert!(c.max_padded_error() < c.max_native_error());
        }
    }

    #[test]
    fn native_error_sits_at_the_boundary() {
        let s = spec(1.5);
        for f in benchmark_functions(64, 1.0).unwrap() {
            let c = functional_comparison(&s, 64, 128, &f).unwrap();
            let edge = c.native_error[..16].iter().chain(&c.native_error[48..]).fold(0.0f64, |a, &b| a.max(b));
            let bulk = c.native_error[16..48].iter().fold(0.0f64, |a, &b| a.max(b));
            assert!(edge > bulk, "{}", f.name);
        }
    }

    #[test]
    fn padded_error_within_operator_norm() {
        let s = spec(1.0);
        let e = residual_norm(&s, 64, 128).unwrap();
        for f in benchmark_functions(64, 1.0).unwrap() {
            let c = functional_comparison(&s, 64, 128, &f).unwrap();
            assert!(norm(&c.padded_error) <= e * norm(&f.samples) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gaussian_state_is_normalized() {
        let g = GaussianState::new(64, 0, 4.0).unwrap();
        assert!((norm(g.samples()) - 1.0).abs() < 1e-12);
        assert!(g.samples()[0] > g.samples()[1]);
        assert!(GaussianState::new(64, 64, 4.0).is_err());
        assert!(GaussianState::new(64, 3, 0.0).is_err());
    }

    #[test]
    fn center_sweep_frozen() {
        let want = [
            (0, 0.93056578486, 7.4594364e-4),
            (8, 0.67707555015, 1.8058228e-3),
            (16, 0.030754456755, 1.6177025e-3),
            (24, 0.014541483649, 1.5315927e-3),
            (32, 0.011957319420, 1.5066149e-3),
        ];
        let centers: Vec<usize> = want.iter().map(|w| w.0).collect();
        let sweep = center_sweep(&spec(1.5), 64, 4.0, &centers).unwrap();
        for (p, (c, native, padded)) in sweep.iter().zip(want) {
            assert_eq!(p.center, c);
            assert!((p.native / native - 1.0).abs() < 1e-6, "{c}: {}", p.native);
            assert!((p.padded / padded - 1.0).abs() < 1e-5, "{c}: {}", p.padded);
            assert!(p.padded < p.native);
        }
        for w in sweep.windows(2) {
            assert!(w[1].native <= w[0].native);
        }
        assert!(sweep[0].native / sweep[4].native >= 10.0);
    }

    #[test]
    fn gaussian_diagnostics_matches_sweep() {
        let s = spec(1.5);
        let d = gaussian_diagnostics(&s, 64, 0, 4.0).unwrap();
        let p = center_sweep(&s, 64, 4.0, &[0]).unwrap()[0];
        assert_eq!(d.native_relative_error(), p.native);
        assert_eq!(d.padded_relative_error(), p.padded);
        let bound = residual_norm(&s, 64, 128).unwrap() / norm(&d.target);
        assert!(d.padded_relative_error() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn corner_reports_frozen() {
        for (alpha, n, target, surrogate) in [
            (1.0, 8, -0.012992240252399, -0.670379265333622),
            (1.0, 64, -1.6039802780745e-4, -0.637131345806903),
            (2.0, 4, -0.222222222222222, -2.46740110027234),
        ] {
            let r = corner_report(&spec(alpha), n).unwrap();
            assert!((r.target - target).abs() < 1e-12, "{alpha} {n}");
            assert!((r.surrogate - surrogate).abs() < 1e-12, "{alpha} {n}");
            assert!(r.image_dominates(), "{alpha} {n}");
        }
        let r = corner_report(&spec(1.0), 8).unwrap();
        assert!((r.dominant_image + 2.0 / PI).abs() < 1e-14);
        // Even separations vanish at alpha = 1.
        let t3 = KernelTable::new(spec(1.0), 2, 1e-12).unwrap();
        assert_eq!(toeplitz_target(&spec(1.0), 3, &t3).unwrap().entry(0, 2), 0.0);
    }

    #[test]
    fn corner_alpha_two_image_enumeration() {
        // alpha = 2 closed form c_m = 2(-1)^m/m^2; the images of (0, 3) at
        // N = 4 are c_{-3+4l}, l != 0.
        let mut sum = 0.0;
        for l in 1..200_000i64 {
            for m in [-3 + 4 * l, -3 - 4 * l] {
                let mf = m as f64;
                sum += 2.0 * if m % 2 == 0 { 1.0 } else { -1.0 } / (mf * mf);
            }
        }
        let r = corner_report(&spec(2.0), 4).unwrap();
        assert!((r.difference - sum).abs() < 1e-5, "{} vs {sum}", r.difference);
    }

    #[test]
    fn heatmap_peaks_in_corners() {
        for alpha in [1.0, 1.5] {
            let h = heatmap(&spec(alpha), 64).unwrap();
            assert!(h.corner_blocks_dominate(8), "alpha={alpha}");
        }
        let h = heatmap(&spec(1.5), 64).unwrap();
        assert!((h.difference[(0, 63)] - 1.1632620582116).abs() < 1e-10);
        assert!(h.difference[(32, 33)] < 1e-2 * h.difference[(0, 63)]);
    }

    #[test]
    fn interior_spike_sees_all_operators_agree() {
        let s = spec(1.5);
        let ops = OperatorTriple::new(&s, 64, 128).unwrap();
        let mut u = alloc::vec![0.0; 64];
        u[32] = 1.0;
        let c = ops.compare(&u).unwrap();
        // Images of sites within N/8 of the spike are at distance >= 3N/4.
        let tol = 2.0 * crate::kernel::decay_bound(&s, 48).unwrap();
        for i in 24..=40 {
            assert!(c.native_error[i] <= tol && c.padded_error[i] <= tol, "{i}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gaussian_unit_norm(n_log in 3u32..8, frac in 0.0f64..1.0, sigma in 0.5f64..20.0) {
            let n = 1usize << n_log;
            let center = ((n as f64 - 1.0) * frac) as usize;
            let g = GaussianState::new(n, center, sigma).unwrap();
            prop_assert!((norm(g.samples()) - 1.0).abs() < 1e-12);
            let peak = g.samples().iter().cloned().fold(0.0, f64::max);
            prop_assert_eq!(peak, g.samples()[center]);
        }
    }
}
