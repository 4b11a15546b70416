//! Isotropic plane-strain material, hysteretic damping profiles and wave speeds.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Result, SolverError};

/// Isotropic material with a hysteretic damping ratio.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub damping_ratio: f64,
}

impl Material {
    pub fn new(young_modulus: f64, poisson_ratio: f64, density: f64, damping_ratio: f64) -> Result<Self> {
        let m = Self { young_modulus, poisson_ratio, density, damping_ratio };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young_modulus.is_finite() && self.young_modulus > 0.0) {
            return Err(SolverError::InvalidMaterial(format!(
                "young_modulus must be positive, got {}",
                self.young_modulus
            )));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 0.5) {
            return Err(SolverError::InvalidMaterial(format!(
                "poisson_ratio must lie in (-1, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(SolverError::InvalidMaterial(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !(0.0..=1.0).contains(&self.damping_ratio) {
            return Err(SolverError::InvalidMaterial(format!(
                "damping_ratio must lie in [0, 1], got {}",
                self.damping_ratio
            )));
        }
        Ok(())
    }

    /// Plane-strain elasticity matrix relating (eps_x, eps_y, gamma_xy)
    /// to (sigma_x, sigma_y, tau_xy).
    pub fn elasticity_matrix(&self) -> Matrix3<f64> {
        let e = self.young_modulus;
        let nu = self.poisson_ratio;
        let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let d11 = c * (1.0 - nu);
        let d12 = c * nu;
        let d33 = e / (2.0 * (1.0 + nu));
        Matrix3::new(d11, d12, 0.0, d12, d11, 0.0, 0.0, 0.0, d33)
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// Pressure and shear wave speeds `(c_p, c_s)` of the undamped medium,
    /// `c_p = sqrt(D11/rho)` and `c_s = sqrt(mu/rho)`.
    pub fn wave_speeds(&self) -> (f64, f64) {
        let d = self.elasticity_matrix();
        ((d[(0, 0)] / self.density).sqrt(), (d[(2, 2)] / self.density).sqrt())
    }
}

/// Viscoelastic stiffness scaling `1 + 2 i zeta`.
pub fn complex_modulus_factor(zeta: f64) -> Complex64 {
    Complex64::new(1.0, 2.0 * zeta)
}

/// Damping ratio along the radial coordinate of one subdomain.
///
/// `Linear` grades from `zeta_start` at the grid's starting point to
/// `zeta_end` at the open (loaded) end; absorbing layers use a high ratio at
/// the truncated face that relaxes to the physical value at the interface.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingProfile {
    Constant { zeta: f64 },
    Linear { zeta_start: f64, zeta_end: f64 },
}

impl DampingProfile {
    pub fn validate(&self) -> Result<()> {
        let check = |z: f64, name: &str| {
            if (0.0..=1.0).contains(&z) {
                Ok(())
            } else {
                Err(SolverError::OutOfRange(format!("{name} must lie in [0, 1], got {z}")))
            }
        };
        match *self {
            DampingProfile::Constant { zeta } => check(zeta, "zeta"),
            DampingProfile::Linear { zeta_start, zeta_end } => {
                check(zeta_start, "zeta_start")?;
                check(zeta_end, "zeta_end")
            }
        }
    }

    /// Damping ratio at radial coordinate `xi` for a grid running from
    /// `xi_start` to `xi_open`.
    pub fn at(&self, xi: f64, xi_start: f64, xi_open: f64) -> Result<f64> {
        match *self {
            DampingProfile::Constant { zeta } => Ok(zeta),
            DampingProfile::Linear { zeta_start, zeta_end } => {
                let span = xi_open - xi_start;
                if span == 0.0 {
                    return Err(SolverError::OutOfRange(
                        "degenerate radial span for damping profile".into(),
                    ));
                }
                let t = (xi - xi_start) / span;
                if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                    return Err(SolverError::OutOfRange(format!(
                        "xi = {xi} outside the grid span [{xi_start}, {xi_open}]"
                    )));
                }
                let t = t.clamp(0.0, 1.0);
                Ok((1.0 - t) * zeta_start + t * zeta_end)
            }
        }
    }
}
