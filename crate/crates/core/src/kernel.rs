//! Semi-discrete convolution kernel of the fractional Laplacian.
//!
//! For a mesh `h` and exponent `0 < alpha <= 2` the lattice operator acts as
//! `(A u)_k = sum_j c_{k-j} u_j` with
//!
//! ```text
//! c_m = h^-alpha / pi * integral_0^pi s^alpha cos(m s) ds .
//! ```
//!
//! Coefficients are evaluated by oscillation-aware quadrature: for moderate
//! `m` the interval is split at the zeros of `cos(m s)` (the first piece,
//! which holds the `s^alpha` endpoint singularity, is integrated by its power
//! series), and for large `m` the integral is deformed onto two vertical
//! rays in the complex plane and evaluated with Gauss–Laguerre rules.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::{gauss_laguerre, gauss_legendre, CompensatedSum, GaussRule};
use crate::{Error, Result};

/// Exponent and mesh size of the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    alpha: f64,
    h: f64,
}

impl KernelSpec {
    /// Validates `0 < alpha <= 2` and `h > 0`.
    pub fn new(alpha: f64, h: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!(
                "alpha must satisfy 0 < alpha <= 2, got {alpha}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("h must be positive and finite, got {h}")));
        }
        Ok(Self { alpha, h })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `h^-alpha`, the overall scale of every coefficient.
    pub fn scale(&self) -> f64 {
        libm::pow(self.h, -self.alpha)
    }

    /// Half-width `pi/h` of the semi-discrete Fourier cell.
    pub fn cell_edge(&self) -> f64 {
        PI / self.h
    }

    /// Decay exponent of the kernel, `min(2, 1 + alpha)`.
    pub fn decay_exponent(&self) -> f64 {
        (1.0 + self.alpha).min(2.0)
    }

    /// Largest symbol value on the one-dimensional cell, `(pi/h)^alpha`.
    pub fn lambda_max(&self) -> f64 {
        libm::pow(PI / self.h, self.alpha)
    }

    /// Largest isotropic symbol value on the cube, `(sqrt(3) pi/h)^alpha`.
    pub fn lambda_max_3d(&self) -> f64 {
        libm::pow(libm::sqrt(3.0) * PI / self.h, self.alpha)
    }

    /// True when a closed form for the coefficients is known (alpha 1 or 2).
    pub fn has_closed_form(&self) -> bool {
        self.alpha == 1.0 || self.alpha == 2.0
    }
}

/// Continuum symbol `|xi|^alpha` on the cell `|xi| <= pi/h`.
pub fn symbol(spec: &KernelSpec, xi: f64) -> Result<f64> {
    let edge = spec.cell_edge();
    // Grid frequencies are assembled in floating point, so allow the cell
    // edge a few ulps of slack.
    if !(xi.abs() <= edge * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::domain(format!(
            "frequency {xi} lies outside the cell [{}, {}]",
            -edge, edge
        )));
    }
    Ok(libm::pow(xi.abs(), spec.alpha))
}

/// Closed-form coefficient for alpha 1 or 2, `None` otherwise.
///
/// `alpha = 1`: `c_0 = pi/2`, `c_m = ((-1)^m - 1) / (pi m^2)`.
/// `alpha = 2`: `c_0 = pi^2/3`, `c_m = 2 (-1)^m / m^2`. This is the spectral
/// symbol `|xi|^2`, not the second-difference stencil.
pub fn closed_form(spec: &KernelSpec, m: i64) -> Option<f64> {
    let m = m.unsigned_abs();
    let scale = spec.scale();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mf = m as f64;
    if spec.alpha == 1.0 {
        Some(if m == 0 {
            scale * PI / 2.0
        } else {
            scale * (sign - 1.0) / (PI * mf * mf)
        })
    } else if spec.alpha == 2.0 {
        Some(if m == 0 {
            scale * PI * PI / 3.0
        } else {
            scale * 2.0 * sign / (mf * mf)
        })
    } else {
        None
    }
}

/// Quadrature controls for [`KernelEvaluator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on each coefficient.
    pub tol: f64,
    /// Largest number of subintervals the split rule may use.
    pub max_subintervals: u64,
    /// Indices above this use the complex-ray representation.
    pub contour_threshold: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_subintervals: 1 << 21,
            contour_threshold: 128,
        }
    }
}

/// Reusable coefficient evaluator holding the quadrature rules.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    spec: KernelSpec,
    config: QuadratureConfig,
    legendre_hi: GaussRule,
    legendre_lo: GaussRule,
    laguerre: [(GaussRule, GaussRule); 2],
    /// `Gamma(alpha + 1) sin(alpha pi / 2)`, the endpoint-singularity weight.
    singular_weight: f64,
}

/// Route taken by [`KernelEvaluator::scaled_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRoute {
    Antiderivative,
    Split,
    Contour,
}

impl KernelEvaluator {
    pub fn new(spec: KernelSpec, config: QuadratureConfig) -> Result<Self> {
        if !(config.tol > 0.0) {
            return Err(Error::domain(format!(
                "quadrature tolerance must be positive, got {}",
                config.tol
            )));
        }
        let alpha = spec.alpha;
        Ok(Self {
            spec,
            config,
            legendre_hi: gauss_legendre(16),
            legendre_lo: gauss_legendre(12),
            laguerre: [
                (gauss_laguerre(32), gauss_laguerre(24)),
                (gauss_laguerre(16), gauss_laguerre(12)),
            ],
            singular_weight: libm::tgamma(alpha + 1.0) * libm::sin(alpha * PI / 2.0),
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    /// `c_m`, using the closed form when one exists.
    pub fn coeff(&self, m: i64) -> Result<f64> {
        match closed_form(&self.spec, m) {
            Some(v) => Ok(v),
            None => self.quadrature_coeff(m),
        }
    }

    /// `c_m` by quadrature regardless of closed forms.
    pub fn quadrature_coeff(&self, m: i64) -> Result<f64> {
        let m = m.unsigned_abs();
        let route = if m == 0 {
            QuadratureRoute::Antiderivative
        } else if m <= self.config.contour_threshold {
            QuadratureRoute::Split
        } else {
            QuadratureRoute::Contour
        };
        self.coeff_by(m, route)
    }

    /// `c_m` along an explicit route, for cross-validation.
    pub fn coeff_by(&self, m: u64, route: QuadratureRoute) -> Result<f64> {
        let (value, estimate) = self.scaled_integral(m, route)?;
        let factor = self.spec.scale() / PI;
        let c = factor * value;
        let est = factor * estimate;
        let floor = 64.0 * f64::EPSILON * factor * libm::pow(PI, self.spec.alpha + 1.0);
        if est > self.config.tol.max(floor) {
            return Err(Error::numerical(
                format!("coefficient c_{m} missed the quadrature tolerance {}", self.config.tol),
                est,
            ));
        }
        Ok(c)
    }

    /// `integral_0^pi s^alpha cos(m s) ds` and an error estimate.
    pub fn scaled_integral(&self, m: u64, route: QuadratureRoute) -> Result<(f64, f64)> {
        let alpha = self.spec.alpha;
        match route {
            QuadratureRoute::Antiderivative => {
                if m != 0 {
                    return Err(Error::domain("the antiderivative route only covers m = 0"));
                }
                Ok((libm::pow(PI, alpha + 1.0) / (alpha + 1.0), 0.0))
            }
            QuadratureRoute::Split => {
                if m == 0 {
                    return Err(Error::domain("the split route needs m >= 1"));
                }
                self.split_integral(m)
            }
            QuadratureRoute::Contour => {
                if m == 0 {
                    return Err(Error::domain("the contour route needs m >= 1"));
                }
                Ok(self.contour_integral(m))
            }
        }
    }

    fn split_integral(&self, m: u64) -> Result<(f64, f64)> {
        let pieces = m + 1;
        if pieces > self.config.max_subintervals {
            return Err(Error::numerical(
                format!(
                    "split quadrature for m = {m} needs {pieces} subintervals, budget is {}",
                    self.config.max_subintervals
                ),
                f64::INFINITY,
            ));
        }
        let alpha = self.spec.alpha;
        let mf = m as f64;
        let delta = PI / (2.0 * mf);

        let (head, mut estimate) = singular_head(alpha, mf, delta);
        let mut total = CompensatedSum::new();
        total.add(head);

        // Piece j starts at the zero a_j = (2j-1) pi/(2m) of cos(m s). Writing
        // s = a_j + t gives cos(m s) = (-1)^j sin(m t), which keeps the phase
        // exact even when m s is large.
        for j in 1..=m {
            let a = (2 * j - 1) as f64 * delta;
            let width = if j == m { PI - a } else { 2.0 * delta };
            let integrand = |t: f64| libm::pow(a + t, alpha) * libm::sin(mf * t);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let hi = sign * self.legendre_hi.integrate(0.0, width, integrand);
            let lo = sign * self.legendre_lo.integrate(0.0, width, integrand);
            total.add(hi);
            estimate += (hi - lo).abs();
        }
        Ok((total.value(), estimate))
    }

    fn contour_integral(&self, m: u64) -> (f64, f64) {
        let alpha = self.spec.alpha;
        let mf = m as f64;
        let (hi_rule, lo_rule) = if m <= 1024 {
            (&self.laguerre[0].0, &self.laguerre[0].1)
        } else {
            (&self.laguerre[1].0, &self.laguerre[1].1)
        };
        let ray = |rule: &GaussRule| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                acc += Complex64::new(PI, u / mf).powf(alpha) * *w;
            }
            acc
        };
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let origin = -self.singular_weight * libm::pow(mf, -alpha - 1.0);
        // Re[i z] = -Im z.
        let far = |j: Complex64| sign * j.im / mf;
        let hi = origin + far(ray(hi_rule));
        let lo = origin + far(ray(lo_rule));
        (hi, (hi - lo).abs())
    }
}

/// `integral_0^delta s^alpha cos(m s) ds` by its alternating power series,
/// with the first omitted term as the error estimate.
fn singular_head(alpha: f64, m: f64, delta: f64) -> (f64, f64) {
    let x2 = (m * delta) * (m * delta);
    let base = libm::pow(delta, alpha + 1.0);
    let mut power = 1.0;
    let mut sum = CompensatedSum::new();
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            power *= -x2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        }
        let term = base * power / (alpha + 2.0 * kf + 1.0);
        sum.add(term);
        last = term.abs();
        if last < 1e-18 * base {
            break;
        }
    }
    (sum.value(), last)
}

/// `c_m` with the default quadrature configuration.
pub fn kernel_coeff(spec: &KernelSpec, m: i64) -> Result<f64> {
    KernelEvaluator::new(*spec, QuadratureConfig::default())?.coeff(m)
}

/// Cached coefficients `c_0..=c_max_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    spec: KernelSpec,
    coeffs: Vec<f64>,
    quad_tol: f64,
}

impl KernelTable {
    /// Builds the table. Closed forms (alpha 1 and 2) are cross-checked
    /// against quadrature entry by entry.
    pub fn new(spec: KernelSpec, max_index: usize, quad_tol: f64) -> Result<Self> {
        let config = QuadratureConfig {
            tol: quad_tol,
            ..QuadratureConfig::default()
        };
        let eval = KernelEvaluator::new(spec, config)?;
        let mut coeffs = Vec::with_capacity(max_index + 1);
        for m in 0..=max_index as i64 {
            let quad = eval.quadrature_coeff(m).map_err(|e| annotate(e, m))?;
            let value = match closed_form(&spec, m) {
                Some(exact) => {
                    let gap = (exact - quad).abs();
                    let floor = 64.0 * f64::EPSILON * exact.abs().max(spec.scale());
                    if gap > quad_tol.max(floor) {
                        return Err(Error::numerical(
                            format!("closed form and quadrature disagree at c_{m}"),
                            gap,
                        ));
                    }
                    exact
                }
                None => quad,
            };
            coeffs.push(value);
        }
        Ok(Self {
            spec,
            coeffs,
            quad_tol,
        })
    }

    /// Rebuilds a table from stored values (for example a cached JSON record).
    pub fn from_parts(spec: KernelSpec, coeffs: Vec<f64>, quad_tol: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("a kernel table needs at least c_0"));
        }
        Ok(Self {
            spec,
            coeffs,
            quad_tol,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// `c_m` for `|m| <= max_index`.
    pub fn get(&self, m: i64) -> Option<f64> {
        usize::try_from(m.unsigned_abs())
            .ok()
            .and_then(|i| self.coeffs.get(i).copied())
    }

    pub(crate) fn require(&self, spec: &KernelSpec, max_index: usize) -> Result<()> {
        if self.spec != *spec {
            return Err(Error::domain(format!(
                "kernel table was built for alpha={}, h={} but alpha={}, h={} was requested",
                self.spec.alpha, self.spec.h, spec.alpha, spec.h
            )));
        }
        if self.max_index() < max_index {
            return Err(Error::domain(format!(
                "kernel table covers indices up to {} but {max_index} is required",
                self.max_index()
            )));
        }
        Ok(())
    }
}

fn annotate(e: Error, m: i64) -> Error {
    match e {
        Error::Numerical { message, estimate } => Error::Numerical {
            message: format!("index {m}: {message}"),
            estimate,
        },
        other => other,
    }
}

/// Coefficients of the pointwise envelope
/// `|c_r| <= h^-alpha/pi * (a r^{-alpha-1} + b r^{-2} + d r^{-3})`, `r >= 1`.
///
/// Two integrations by parts on the ray representation give
/// `a = Gamma(alpha+1)|sin(alpha pi/2)|`, `b = alpha pi^(alpha-1)` and
/// `d = alpha (alpha-1)_+ pi^(alpha-2)`.
///
/// At alpha = 1 the envelope is attained exactly by every odd index, so the
/// terms carry a relative margin of `1e-10` to absorb rounding in both the
/// coefficients and the bound.
fn envelope_terms(alpha: f64) -> (f64, f64, f64) {
    const MARGIN: f64 = 1.0 + 1e-10;
    let a = (libm::tgamma(alpha + 1.0) * libm::sin(alpha * PI / 2.0)).abs();
    let b = alpha * libm::pow(PI, alpha - 1.0);
    let d = alpha * (alpha - 1.0).max(0.0) * libm::pow(PI, alpha - 2.0);
    (a * MARGIN, b * MARGIN, d * MARGIN)
}

/// Constant `C_alpha` with `|c_m| <= C_alpha h^-alpha |m|^-r_alpha` for
/// every `m != 0`, where `r_alpha = min(2, 1 + alpha)`. At alpha = 1 this is
/// `2/pi` up to the rounding margin.
pub fn decay_constant(alpha: f64) -> f64 {
    let (a, b, d) = envelope_terms(alpha);
    (a + b + d) / PI
}

/// `C_alpha h^-alpha |m|^-r_alpha`.
pub fn decay_bound(spec: &KernelSpec, m: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("the decay bound is only stated for m != 0"));
    }
    let mf = m.unsigned_abs() as f64;
    Ok(decay_constant(spec.alpha) * spec.scale() * libm::pow(mf, -spec.decay_exponent()))
}

/// Pointwise envelope `B(r) >= |c_r|` for real `r >= 1`; decreasing in `r`.
pub fn envelope(spec: &KernelSpec, r: f64) -> f64 {
    let (a, b, d) = envelope_terms(spec.alpha);
    spec.scale() / PI
        * (a * libm::pow(r, -spec.alpha - 1.0) + b / (r * r) + d / (r * r * r))
}

/// `integral_t^inf B(y) dy`, which dominates `sum_{r > t} |c_r|`.
pub fn envelope_integral(spec: &KernelSpec, t: f64) -> f64 {
    let (a, b, d) = envelope_terms(spec.alpha);
    spec.scale() / PI
        * (a * libm::pow(t, -spec.alpha) / spec.alpha + b / t + d / (2.0 * t * t))
}

/// Two-sided tail sum split into an explicit part and a certified remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    /// `sum_{K <= |r| <= truncation} |c_r|`.
    pub value: f64,
    /// Upper bound on `sum_{|r| > truncation} |c_r|`.
    pub remainder: f64,
}

impl TailSum {
    /// Certified upper bound on the full tail.
    pub fn bound(&self) -> f64 {
        self.value + self.remainder
    }
}

/// Tail of the absolute kernel, `sum_{|r| >= k} |c_r|`, summed explicitly up
/// to `truncation` and bounded analytically beyond it.
pub fn tail_sum(spec: &KernelSpec, k: u64, truncation: u64) -> Result<TailSum> {
    let eval = KernelEvaluator::new(*spec, QuadratureConfig::default())?;
    tail_sum_with(&eval, k, truncation)
}

/// [`tail_sum`] with a caller-provided evaluator.
pub fn tail_sum_with(eval: &KernelEvaluator, k: u64, truncation: u64) -> Result<TailSum> {
    if k < 1 {
        return Err(Error::domain("tail sums start at K >= 1"));
    }
    if truncation < k {
        return Err(Error::domain(format!(
            "truncation {truncation} must be at least K = {k}"
        )));
    }
    let mut sum = CompensatedSum::new();
    // Smallest terms first.
    for r in (k..=truncation).rev() {
        let c = eval.coeff(r as i64).map_err(|e| annotate(e, r as i64))?;
        sum.add(c.abs());
    }
    Ok(TailSum {
        value: 2.0 * sum.value(),
        remainder: 2.0 * envelope_integral(&eval.spec, truncation as f64),
    })
}

/// Bound on `sum_{|l| > images} |c_{d + l P}|` uniformly over `|d| < P`.
///
/// Every excluded index satisfies `|d + l P| >= images P + 1`, consecutive
/// indices on each side are `P` apart and the envelope is decreasing, so each
/// side is at most `B(K) + (1/P) integral_K^inf B`.
pub fn image_remainder(spec: &KernelSpec, period: u64, images: u64) -> f64 {
    let k = (images * period + 1) as f64;
    let p = period as f64;
    2.0 * (envelope(spec, k) + envelope_integral(spec, k) / p)
}
