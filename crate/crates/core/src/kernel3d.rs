//! Isotropic three-dimensional kernel
//! `c_r = (2 pi)^-3 h^-alpha integral_{[-pi,pi]^3} |s|^alpha e^{i s.r} ds`.
//!
//! For `0 < alpha < 2` the coefficients come from the subordination identity
//!
//! ```text
//! |s|^alpha = 1/Gamma(-alpha/2) integral_0^inf (e^{-t|s|^2} - 1) t^{-1-alpha/2} dt ,
//! ```
//!
//! which turns the singular cube integral into a smooth one-dimensional
//! integral over `t` of products of one-dimensional Gaussian moments. Small
//! and large `t` are handled by their analytic expansions. For `alpha = 2`
//! the kernel is the sum of one-dimensional kernels along the axes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::kernel::{closed_form, tail_sum_with, KernelEvaluator, KernelSpec, QuadratureConfig, TailSum};
use crate::quadrature::{gauss_legendre, CompensatedSum};
use crate::{Error, Result};

/// Largest offset a table may cover. Construction cost grows like the cube.
pub const MAX_TABLE_INDEX: usize = 96;

const T_SMALL: f64 = 1e-7;
const T_LARGE: f64 = 8.0;
const OUTER_PANEL: f64 = 0.5;
const GAMMA_SERIES_LIMIT: f64 = 64.0;

/// Coefficients `c_r` for `r` in `[-R, R]^3`, stored on the non-negative
/// octant (the kernel is even in each component).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel3dTable {
    spec: KernelSpec,
    max_index: usize,
    coeffs: Vec<f64>,
}

impl Kernel3dTable {
    pub fn new(spec: KernelSpec, max_index: usize) -> Result<Self> {
        if max_index > MAX_TABLE_INDEX {
            return Err(Error::resource(
                alloc::format!("3D kernel table index {max_index} exceeds the cap {MAX_TABLE_INDEX}"),
                Some(max_index as u64),
            ));
        }
        let coeffs = if spec.alpha() == 2.0 {
            axis_sum_table(&spec, max_index)
        } else {
            subordination_table(&spec, max_index)
        };
        Ok(Self {
            spec,
            max_index,
            coeffs,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    fn slot(&self, r: [u64; 3]) -> usize {
        let n = self.max_index + 1;
        (r[0] as usize * n + r[1] as usize) * n + r[2] as usize
    }

    /// `c_r` for `max |r_a| <= max_index`.
    pub fn get(&self, r: [i64; 3]) -> Option<f64> {
        let a = r.map(|v| v.unsigned_abs());
        if a.iter().any(|&v| v > self.max_index as u64) {
            return None;
        }
        Some(self.coeffs[self.slot(a)])
    }

    pub(crate) fn require(&self, spec: &KernelSpec, max_index: usize) -> Result<()> {
        if self.spec != *spec {
            return Err(Error::domain("3D kernel table was built for a different spec"));
        }
        if self.max_index < max_index {
            return Err(Error::domain(alloc::format!(
                "3D kernel table covers offsets up to {} but {max_index} is required",
                self.max_index
            )));
        }
        Ok(())
    }
}

fn axis_sum_table(spec: &KernelSpec, r_max: usize) -> Vec<f64> {
    let n = r_max + 1;
    let one_d: Vec<f64> = (0..n as i64).map(|m| closed_form(spec, m).unwrap_or(0.0)).collect();
    let mut out = vec![0.0; n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let zeros = [x, y, z].iter().filter(|&&v| v == 0).count();
                let v = if zeros == 3 {
                    3.0 * one_d[0]
                } else if zeros == 2 {
                    one_d[x + y + z]
                } else {
                    0.0
                };
                out[(x * n + y) * n + z] = v;
            }
        }
    }
    out
}

/// `integral_{-pi}^{pi} x^{2p} cos(n x) dx` for `p = 0, 1, 2`.
fn moment(p: u32, n: usize) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    match (p, n) {
        (0, 0) => 2.0 * PI,
        (0, _) => 0.0,
        (1, 0) => 2.0 * PI * PI * PI / 3.0,
        (1, _) => 4.0 * PI * sign / (nf * nf),
        (2, 0) => 2.0 * libm::pow(PI, 5.0) / 5.0,
        (2, _) => sign * (8.0 * PI * PI * PI / (nf * nf) - 48.0 * PI / (nf * nf * nf * nf)),
        _ => unreachable!("only moments up to x^4 are used"),
    }
}

/// `integral_t^inf s^{-beta-1} e^{-a/s} ds = a^-beta gamma(beta, a/t)`.
///
/// Below `GAMMA_SERIES_LIMIT` this is `t^-beta e^{-x} sum_k x^k /
/// (beta)_{k+1}` with `x = a/t`. Beyond it the upper incomplete gamma is
/// under `1e-20` of `Gamma(beta)` for the `beta <= 2.5` used here, and the
/// series would overflow long before `x = 745`.
fn gaussian_tail(beta: f64, a: f64, t: f64) -> f64 {
    let x = a / t;
    if x > GAMMA_SERIES_LIMIT {
        return libm::pow(a, -beta) * libm::tgamma(beta);
    }
    let mut term = 1.0 / beta;
    let mut sum = term;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= x / (beta + k);
        sum += term;
        k += 1.0;
    }
    libm::pow(t, -beta) * libm::exp(-x) * sum
}

/// Inner Legendre grid on `[0, pi]` shared by every `t`, with the cosine
/// table `cos(n x_q)` for `n <= r_max`.
struct InnerGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cosines: Vec<Vec<f64>>,
}

impl InnerGrid {
    fn new(r_max: usize) -> Self {
        let rule = gauss_legendre(16);
        let panels = (2 * r_max).max(8);
        let width = PI / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 16);
        let mut weights = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            let a = p as f64 * width;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(a + 0.5 * width * (x + 1.0));
                // Factor 2 folds [-pi, 0] onto [0, pi].
                weights.push(w * width);
            }
        }
        let cosines = (0..=r_max)
            .map(|n| nodes.iter().map(|x| libm::cos(n as f64 * x)).collect())
            .collect();
        Self {
            nodes,
            weights,
            cosines,
        }
    }

    /// `d_t(n) = integral_{-pi}^{pi} (e^{-t x^2} - 1) cos(n x) dx`.
    fn gaussian_defects(&self, t: f64, out: &mut [f64]) {
        let f: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * libm::expm1(-t * x * x))
            .collect();
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = self.cosines[n].iter().zip(&f).map(|(c, v)| c * v).sum();
        }
    }
}

fn subordination_table(spec: &KernelSpec, r_max: usize) -> Vec<f64> {
    let alpha = spec.alpha();
    let half = alpha / 2.0;
    let n = r_max + 1;
    let two_pi = 2.0 * PI;
    let mut integral = vec![CompensatedSum::new(); n * n * n];

    // Small t: e^{-t|s|^2} - 1 = -t|s|^2 + t^2|s|^4/2 + O(t^3).
    let small1 = libm::pow(T_SMALL, 1.0 - half) / (1.0 - half);
    let small2 = libm::pow(T_SMALL, 2.0 - half) / (2.0 - half);
    // Large t: the periodic Gaussian integrals equal full-line Gaussians up
    // to e^{-pi^2 t}, giving an incomplete-gamma tail.
    let beta3 = half + 1.5;
    let pi32 = libm::pow(PI, 1.5);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let m = |p: u32, v: usize| moment(p, v);
                let a1 = -(m(1, x) * m(0, y) * m(0, z)
                    + m(0, x) * m(1, y) * m(0, z)
                    + m(0, x) * m(0, y) * m(1, z));
                let a2 = 0.5
                    * (m(2, x) * m(0, y) * m(0, z)
                        + m(0, x) * m(2, y) * m(0, z)
                        + m(0, x) * m(0, y) * m(2, z)
                        + 2.0
                            * (m(1, x) * m(1, y) * m(0, z)
                                + m(1, x) * m(0, y) * m(1, z)
                                + m(0, x) * m(1, y) * m(1, z)));
                let r2 = (x * x + y * y + z * z) as f64;
                let mut large = pi32 * gaussian_tail(beta3, r2 / 4.0, T_LARGE);
                if r2 == 0.0 {
                    large -= two_pi * two_pi * two_pi * libm::pow(T_LARGE, -half) / half;
                }
                let slot = &mut integral[(x * n + y) * n + z];
                slot.add(a1 * small1);
                slot.add(a2 * small2);
                slot.add(large);
            }
        }
    }

    let inner = InnerGrid::new(r_max);
    let outer = gauss_legendre(16);
    let u_lo = libm::log(T_SMALL);
    let u_hi = libm::log(T_LARGE);
    let panels = libm::ceil((u_hi - u_lo) / OUTER_PANEL) as usize;
    let width = (u_hi - u_lo) / panels as f64;
    let mut d = vec![0.0; n];
    let mut g = vec![0.0; n];
    let p0 = two_pi;
    for p in 0..panels {
        let a = u_lo + p as f64 * width;
        for (node, w) in outer.nodes.iter().zip(&outer.weights) {
            let u = a + 0.5 * width * (node + 1.0);
            let t = libm::exp(u);
            // dt/t = du, so the weight carries t^{-alpha/2}.
            let weight = 0.5 * width * w * libm::pow(t, -half);
            inner.gaussian_defects(t, &mut d);
            for v in 0..n {
                g[v] = d[v] + if v == 0 { p0 } else { 0.0 };
            }
            // prod(p + d) - prod(p) expanded so nothing cancels.
            for x in 0..n {
                for y in 0..n {
                    let gxy = g[y];
                    for z in 0..n {
                        let mut beta = d[x] * gxy * g[z];
                        if x == 0 {
                            let mut inner_sum = d[y] * g[z];
                            if y == 0 {
                                inner_sum += p0 * d[z];
                            }
                            beta += p0 * inner_sum;
                        }
                        integral[(x * n + y) * n + z].add(weight * beta);
                    }
                }
            }
        }
    }

    let prefactor = spec.scale() / (two_pi * two_pi * two_pi * libm::tgamma(-half));
    integral.iter().map(|s| prefactor * s.value()).collect()
}

/// Three-dimensional tail `sum_{||r||_inf >= k} |c_r|`: the explicit part
/// over the table plus a bound beyond it.
pub fn tail_bound_3d(table: &Kernel3dTable, k: u64) -> Result<TailSum> {
    if k < 1 {
        return Err(Error::domain("3D tail sums start at K >= 1"));
    }
    let spec = table.spec;
    let r_max = table.max_index as u64;
    if spec.alpha() == 2.0 {
        // Nonzero only on the axes: three copies of the 1D tail.
        let eval = KernelEvaluator::new(spec, QuadratureConfig::default())?;
        let one_d = if k <= r_max {
            tail_sum_with(&eval, k, r_max)?
        } else {
            let rem = tail_sum_with(&eval, k, k)?;
            TailSum {
                value: 0.0,
                remainder: rem.bound(),
            }
        };
        return Ok(TailSum {
            value: 3.0 * one_d.value,
            remainder: 3.0 * one_d.remainder,
        });
    }
    let mut value = CompensatedSum::new();
    let n = table.max_index + 1;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let norm = x.max(y).max(z) as u64;
                if norm < k {
                    continue;
                }
                let nonzero = [x, y, z].iter().filter(|&&v| v != 0).count();
                let mult = (1u32 << nonzero) as f64;
                value.add(mult * table.coeffs[(x * n + y) * n + z].abs());
            }
        }
    }
    let remainder = envelope_tail_3d(&spec, k.max(r_max + 1), OUTER_PANEL);
    Ok(TailSum {
        value: value.value(),
        remainder,
    })
}

/// Bound on `sum_{||r||_inf >= k} |c_r|` for `0 < alpha < 2`, `k >= 2`.
///
/// Uses `|c_r| <= h^-alpha / ((2 pi)^3 |Gamma(-alpha/2)|) integral
/// t^{-alpha/2-1} prod_a |G_t(r_a)| dt` with the one-dimensional bounds
/// `|G_t(0)| <= B0 = min(2 pi, sqrt(pi/t))` and, for `n != 0`,
/// `|G_t(n)| <= min(B0, D_t/n^2)` where `D_t` bounds the boundary term plus
/// the total variation of `d/dx e^{-t x^2}` on `[-pi, pi]`. The `t`
/// integral is evaluated by composite quadrature in `ln t` with a 10%
/// margin for the kinks of the `min` envelopes; the two ends are bounded
/// analytically.
pub fn envelope_tail_3d(spec: &KernelSpec, k: u64, panel: f64) -> f64 {
    assert!(k >= 2, "the 3D envelope tail needs k >= 2");
    let alpha = spec.alpha();
    let half = alpha / 2.0;
    let kf = k as f64;
    let sqrt_pi = libm::sqrt(PI);
    let sqrt_2e = libm::sqrt(2.0 / core::f64::consts::E);

    let envelope = |u: f64| -> (f64, f64) {
        let e_half = libm::exp(u / 2.0);
        let b0 = (2.0 * PI).min(sqrt_pi / e_half);
        let t = libm::exp(u);
        let boundary = 4.0 * PI * libm::exp(u - PI * PI * t);
        let taylor = 4.0 * PI * t + 8.0 * PI * PI * PI / 3.0 * t * t;
        let d = boundary + taylor.min(4.0 * sqrt_2e * e_half);
        (b0, d)
    };
    // Integral of min(B0, D/x^2) over [a, inf).
    let line_tail = |b0: f64, d: f64, a: f64| -> f64 {
        let knee = libm::sqrt(d / b0);
        if a >= knee {
            d / a
        } else {
            2.0 * libm::sqrt(b0 * d) - a * b0
        }
    };
    let integrand = |u: f64| -> f64 {
        let (b0, d) = envelope(u);
        let mut inside = b0;
        for m in 1..k {
            inside += 2.0 * b0.min(d / (m * m) as f64);
        }
        let tau = 2.0 * line_tail(b0, d, kf - 1.0);
        let full = inside + tau;
        let shell = tau * (full * full + full * inside + inside * inside);
        libm::exp(-half * u) * shell
    };

    let u_lo = -(92.0f64).max(55.3 / (1.0 - half)).min(1400.0);
    let u_hi = (92.0f64).max(55.3 / half).min(1400.0);

    // t < e^{u_lo}: D <= delta0 t, so the shell is at most
    // (2 delta0 t/(K-1)) * 3 (2 pi + 1)^2.
    let t_lo = libm::exp(u_lo);
    let delta0 = 8.0 * PI + 8.0 * PI * PI * PI / 3.0 * t_lo;
    let c_small = 6.0 * delta0 * (2.0 * PI + 1.0) * (2.0 * PI + 1.0) / (kf - 1.0);
    let small = c_small * libm::exp((1.0 - half) * u_lo) / (1.0 - half);

    // t > e^{u_hi}: every line sum is at most (2K-1) B0 + 4 sqrt(B0 D).
    let b0_hi = sqrt_pi * libm::exp(-u_hi / 2.0);
    let bd = 4.0 * sqrt_pi * sqrt_2e + 4.0 * PI * sqrt_pi * libm::exp(u_hi / 2.0 - PI * PI * libm::exp(u_hi));
    let s_sup = (2.0 * kf - 1.0) * b0_hi + 4.0 * libm::sqrt(bd);
    let large = s_sup * s_sup * s_sup * libm::exp(-half * u_hi) / half;

    let rule = gauss_legendre(16);
    let panels = libm::ceil((u_hi - u_lo) / panel) as usize;
    let width = (u_hi - u_lo) / panels as f64;
    let mut middle = CompensatedSum::new();
    for p in 0..panels {
        let a = u_lo + p as f64 * width;
        middle.add(rule.integrate(a, a + width, integrand));
    }

    let two_pi = 2.0 * PI;
    let prefactor = spec.scale() / (two_pi * two_pi * two_pi * libm::tgamma(-half).abs());
    prefactor * (small + 1.1 * middle.value() + large)
}

/// Reference kernel from an `n_ref^3` inverse DFT of the sampled symbol.
/// Carries the periodic images of the true kernel, so it only agrees with
/// [`Kernel3dTable`] up to an aliasing error that shrinks as `n_ref` grows.
pub fn reference_grid_kernel(spec: &KernelSpec, n_ref: usize, r: [i64; 3]) -> Result<f64> {
    let grid = crate::lattice::FrequencyGrid::new(n_ref, spec.h())?;
    let freqs = grid.freqs();
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); n_ref * n_ref * n_ref];
    for x in 0..n_ref {
        for y in 0..n_ref {
            for z in 0..n_ref {
                let s2 = freqs[x] * freqs[x] + freqs[y] * freqs[y] + freqs[z] * freqs[z];
                buf[(x * n_ref + y) * n_ref + z].re = libm::pow(s2, alpha_half(spec));
            }
        }
    }
    crate::fft::inverse_3d(&mut buf, n_ref)?;
    let w = |v: i64| v.rem_euclid(n_ref as i64) as usize;
    Ok(buf[(w(r[0]) * n_ref + w(r[1])) * n_ref + w(r[2])].re)
}

fn alpha_half(spec: &KernelSpec) -> f64 {
    spec.alpha() / 2.0
}
