//! Closed-form reference for the loaded half space.
//!
//! A uniform strip pressure of half width `b` on a damped elastic half
//! space admits a wavenumber-integral solution for the vertical surface
//! amplitude:
//!
//! ```text
//! v(x) = (2 p0 ks^2 / (pi mu_c)) I(x)
//! I(x) = integral over tau >= 0 of
//!        alpha sin(b tau) cos(x tau) / (tau ((2 tau^2 - ks^2)^2 - 4 tau^2 alpha beta))
//! ```
//!
//! with `alpha = sqrt(tau^2 - kp^2)`, `beta = sqrt(tau^2 - ks^2)` on the
//! principal branch, complex wavenumbers `k^2 = (w/c)^2 / (1 + 2 i zeta)`,
//! and the complex shear modulus `mu_c = mu (1 + 2 i zeta)`. Damping moves
//! the Rayleigh pole off the real axis, so the integrand is smooth; the
//! bracket in the denominator is the classical free-surface function whose
//! real-axis zero would otherwise sit at the Rayleigh wavenumber. `v` is
//! positive upward; a downward (negative) pressure load gives `Re v < 0`
//! in the static limit.
//!
//! The integral is evaluated by composite Simpson integration over
//! growing segments until a segment stops contributing. Segment widths
//! double up to a cap that keeps the panel spacing a few samples per
//! period of `sin(b tau) cos(x tau)`.

use num_complex::Complex64;

use crate::error::{Result, SolverError};
use crate::material::{complex_modulus_factor, Material};

/// Relative contribution below which the segment sum is accepted. Two
/// decades tighter than needed for plot-level accuracy: the last accepted
/// segment bounds the discarded tail, so this also caps the truncation
/// error, and the reference must stay well below the discretization errors
/// it is used to measure.
const SEGMENT_TOL: f64 = 1e-8;
/// Three-interval Simpson panels per segment.
const PANELS_PER_SEGMENT: usize = 4096;
/// Give up after this many growing segments.
const MAX_SEGMENTS: usize = 60;

/// Uniform vertical strip pressure on a damped half space.
#[derive(Debug, Clone)]
pub struct HalfspaceProblem {
    pub material: Material,
    /// Pressure magnitude, acting downward on the surface.
    pub pressure: f64,
    /// Half width of the loaded strip around x = 0.
    pub half_width: f64,
}

impl HalfspaceProblem {
    pub fn new(material: Material, pressure: f64, half_width: f64) -> Result<Self> {
        if material.damping_ratio <= 0.0 {
            return Err(SolverError::InvalidMaterial(
                "the half-space reference needs hysteretic damping; an undamped medium keeps \
                 its surface pole on the integration path"
                    .into(),
            ));
        }
        if !(pressure.is_finite() && half_width > 0.0 && half_width.is_finite()) {
            return Err(SolverError::OutOfRange(format!(
                "strip pressure {pressure} with half width {half_width}"
            )));
        }
        Ok(Self { material, pressure, half_width })
    }

    /// Vertical surface amplitude at horizontal offset `x` for an
    /// excitation at `omega` rad/s. Positive up, in meters per unit of the
    /// stored pressure.
    pub fn surface_displacement(&self, omega: f64, x: f64) -> Result<Complex64> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(SolverError::OutOfRange(format!(
                "excitation frequency must be positive, got {omega} rad/s"
            )));
        }
        let (cp, cs) = self.material.wave_speeds();
        let f = complex_modulus_factor(self.material.damping_ratio);
        let ks = omega / cs;
        let khp2 = Complex64::new((omega / cp).powi(2), 0.0) / f;
        let khs2 = Complex64::new(ks * ks, 0.0) / f;
        let mu = self.material.shear_modulus();
        let prefactor = 2.0 * self.pressure * khs2 / (std::f64::consts::PI * mu * f);

        let b = self.half_width;
        let integrand = |tau: f64| -> Complex64 {
            let alpha = (Complex64::new(tau * tau, 0.0) - khp2).sqrt();
            if tau == 0.0 {
                // sin(b tau) / (tau ks^4) limit.
                return alpha * b / (khs2 * khs2);
            }
            let beta = (Complex64::new(tau * tau, 0.0) - khs2).sqrt();
            let t2 = tau * tau;
            let bracket = (2.0 * t2 - khs2).powu(2) - 4.0 * t2 * alpha * beta;
            alpha * ((b * tau).sin() * (x * tau).cos()) / (tau * bracket)
        };

        // sin(b tau) cos(x tau) has spectral content up to b + |x|; cap the
        // segment width so each panel keeps at least 16 samples per
        // oscillation period. Wider segments alias, and Simpson's error on
        // an oscillatory tail scales with the envelope rather than the
        // cancellation-small segment values, so the sampling rate directly
        // bounds the achievable accuracy.
        let period = 2.0 * std::f64::consts::PI / (b + x.abs());
        let width_cap = (3 * PANELS_PER_SEGMENT) as f64 * period / 16.0;
        let integral = integrate_tail(&integrand, 8.0 * ks, width_cap)?;
        Ok(prefactor * integral)
    }
}

/// Composite three-eighths Simpson rule with `panels` panels of three
/// intervals each. Exact for cubics on every panel.
pub fn simpson38<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    assert!(panels > 0 && b > a);
    let h = (b - a) / (3 * panels) as f64;
    let mut sum = Complex64::ZERO;
    for p in 0..panels {
        let t0 = a + 3.0 * h * p as f64;
        sum += f(t0)
            + 3.0 * f(t0 + h)
            + 3.0 * f(t0 + 2.0 * h)
            + f(t0 + 3.0 * h);
    }
    sum * (3.0 * h / 8.0)
}

/// Integrates over `[0, inf)` by summing Simpson segments `[0, w]`,
/// `[w, 2w]`, `[2w, 4w]`, ... until one stops mattering. Widths double up
/// to `width_cap` and stay there, so the fixed panel count keeps resolving
/// the integrand's oscillation however far the tail runs.
fn integrate_tail<F: Fn(f64) -> Complex64>(
    f: &F,
    first_width: f64,
    width_cap: f64,
) -> Result<Complex64> {
    let mut total = simpson38(f, 0.0, first_width.min(width_cap), PANELS_PER_SEGMENT);
    let mut lo = first_width.min(width_cap);
    let mut width = lo;
    for _ in 0..MAX_SEGMENTS {
        let segment = simpson38(f, lo, lo + width, PANELS_PER_SEGMENT);
        total += segment;
        if segment.norm() <= SEGMENT_TOL * total.norm().max(f64::MIN_POSITIVE) {
            return Ok(total);
        }
        lo += width;
        width = (width * 2.0).min(width_cap);
    }
    Err(SolverError::IntegralDivergence(format!(
        "tail still contributing after {MAX_SEGMENTS} growing segments (reached tau = {lo:.3e})"
    )))
}
