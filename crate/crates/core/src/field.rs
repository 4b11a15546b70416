//! Displacement field recovery and export.
//!
//! The global solve yields boundary amplitudes; each subdomain's recovery
//! operators extend them inward along the radial grid. Sampling between
//! grid points interpolates linearly in the radial coordinate (matching
//! the order of the difference scheme) and through the element basis along
//! the boundary. Sampling exactly at a mesh node returns the global
//! solution value untouched.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::assembly::{BasisCache, DofMap};
use crate::error::{Result, SolverError};
use crate::geometry::map_point;
use crate::global::{eta_at_x, surface_x, CVector};
use crate::mesh::{Mesh, RadialGrid, Subdomain};
use crate::radial::RadialCondensation;

/// Recovered amplitudes of one subdomain: entry `i` holds the boundary-dof
/// vector at radial grid point `i`, the last entry being the boundary
/// trace itself.
#[derive(Debug, Clone)]
pub struct SubdomainField {
    pub subdomain: usize,
    pub grid: RadialGrid,
    pub dofs: DofMap,
    pub values: Vec<DVector<Complex64>>,
}

/// Extracts the boundary trace of one subdomain from the global solution.
pub fn boundary_trace(dofs: &DofMap, solution: &CVector) -> DVector<Complex64> {
    let mut out = DVector::zeros(dofs.n_dofs());
    for (l, &node) in dofs.nodes().iter().enumerate() {
        out[2 * l] = solution[2 * node];
        out[2 * l + 1] = solution[2 * node + 1];
    }
    out
}

/// Runs interior recovery for every subdomain that kept its operators.
pub fn recover_fields(
    parts: &[(RadialCondensation, DofMap)],
    solution: &CVector,
) -> Result<Vec<SubdomainField>> {
    parts
        .iter()
        .enumerate()
        .map(|(s, (cond, dofs))| {
            let trace = boundary_trace(dofs, solution);
            let values = cond.recover_interior(&trace)?;
            Ok(SubdomainField {
                subdomain: s,
                grid: cond.grid(),
                dofs: dofs.clone(),
                values,
            })
        })
        .collect()
}

impl SubdomainField {
    /// Displacement of one element of the subdomain at `(xi, eta)`,
    /// together with the physical point. `element` indexes the mesh's
    /// element table.
    pub fn sample(
        &self,
        mesh: &Mesh,
        cache: &BasisCache,
        element: usize,
        xi: f64,
        eta: f64,
    ) -> Result<([f64; 2], [Complex64; 2])> {
        let sub = &mesh.subdomains[self.subdomain];
        if !sub.elements.contains(&element) {
            return Err(SolverError::OutOfRange(format!(
                "element {element} is not part of subdomain {}",
                self.subdomain
            )));
        }
        let radial = self.radial_weights(xi)?;
        let elem = &mesh.elements[element];
        let coords = mesh.element_coords(elem);
        let basis = cache.get(elem.degree());
        let (values, _) = basis.shape_functions(eta);
        let mut u = [Complex64::ZERO; 2];
        for (local, &node) in elem.nodes.iter().enumerate() {
            let l = self
                .dofs
                .local(node)
                .expect("dof map covers subdomain elements");
            for c in 0..2 {
                let along = match radial {
                    RadialWeight::At(i) => self.values[i][2 * l + c],
                    RadialWeight::Between(i, t) => {
                        (1.0 - t) * self.values[i][2 * l + c]
                            + t * self.values[i + 1][2 * l + c]
                    }
                };
                u[c] += values[local] * along;
            }
        }
        let point = map_point(&coords, basis, sub.center, xi, eta);
        Ok((point, u))
    }

    fn radial_weights(&self, xi: f64) -> Result<RadialWeight> {
        let n = self.grid.n_steps;
        if xi == RadialGrid::XI_END {
            return Ok(RadialWeight::At(n));
        }
        let h = self.grid.step();
        let offset = (xi - self.grid.xi_start) / h;
        if !(-1e-12..=n as f64 + 1e-12).contains(&offset) {
            return Err(SolverError::OutOfRange(format!(
                "radial position {xi} outside the grid span [{}, 1]",
                self.grid.xi_start
            )));
        }
        let i = (offset.floor().max(0.0) as usize).min(n - 1);
        let t = offset - i as f64;
        if t.abs() < 1e-12 {
            Ok(RadialWeight::At(i))
        } else if (t - 1.0).abs() < 1e-12 {
            Ok(RadialWeight::At(i + 1))
        } else {
            Ok(RadialWeight::Between(i, t))
        }
    }
}

enum RadialWeight {
    At(usize),
    Between(usize, f64),
}

/// Instantaneous value of a phasor at the given phase angle.
pub fn phase_snapshot(u: Complex64, phase: f64) -> f64 {
    u.re * phase.cos() - u.im * phase.sin()
}

/// Vertical surface amplitude at the requested x positions on `y = 0`.
/// A position matching a surface node exactly returns that node's solution
/// value; anything else is interpolated through the element basis.
pub fn surface_samples(
    mesh: &Mesh,
    cache: &BasisCache,
    solution: &CVector,
    positions: &[f64],
) -> Result<Vec<(f64, Complex64)>> {
    let extent = mesh
        .nodes
        .iter()
        .map(|n| n[0].abs().max(n[1].abs()))
        .fold(0.0, f64::max);
    let tol = 1e-9 * extent;

    struct SurfaceElement {
        element: usize,
        x_lo: f64,
        x_hi: f64,
        increasing: bool,
    }
    let mut table = Vec::new();
    for (e, elem) in mesh.elements.iter().enumerate() {
        if elem.nodes.iter().any(|&n| mesh.nodes[n][1].abs() > tol) {
            continue;
        }
        let first = mesh.nodes[elem.nodes[0]][0];
        let last = mesh.nodes[*elem.nodes.last().unwrap()][0];
        table.push(SurfaceElement {
            element: e,
            x_lo: first.min(last),
            x_hi: first.max(last),
            increasing: last > first,
        });
    }
    if table.is_empty() {
        return Err(SolverError::LoadOutsideMesh(
            "the mesh has no elements on the free surface y = 0".into(),
        ));
    }

    positions
        .iter()
        .map(|&x| {
            // Exact node hit: bypass interpolation entirely.
            for se in &table {
                let elem = &mesh.elements[se.element];
                for &node in &elem.nodes {
                    if mesh.nodes[node][0] == x {
                        return Ok((x, solution[2 * node + 1]));
                    }
                }
            }
            let se = table
                .iter()
                .find(|se| (se.x_lo - tol..=se.x_hi + tol).contains(&x))
                .ok_or_else(|| {
                    SolverError::OutOfRange(format!(
                        "surface position x = {x} is not on any surface element"
                    ))
                })?;
            let elem = &mesh.elements[se.element];
            let coords = mesh.element_coords(elem);
            let basis = cache.get(elem.degree());
            let eta = eta_at_x(&coords, basis, x, se.increasing);
            debug_assert!((surface_x(&coords, basis, eta) - x).abs() < 1e-6 * (1.0 + x.abs()));
            let (values, _) = basis.shape_functions(eta);
            let mut v = Complex64::ZERO;
            for (local, &node) in elem.nodes.iter().enumerate() {
                v += values[local] * solution[2 * node + 1];
            }
            Ok((x, v))
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes `x,re_uy,im_uy` rows for a surface sample set.
pub fn write_surface_csv<W: Write>(out: &mut W, samples: &[(f64, Complex64)]) -> Result<()> {
    writeln!(out, "x,re_uy,im_uy")?;
    for &(x, v) in samples {
        writeln!(out, "{},{},{}", fmt(x), fmt(v.re), fmt(v.im))?;
    }
    Ok(())
}

/// Writes the recovered field of every subdomain as
/// `x,y,re_ux,im_ux,re_uy,im_uy`, sampled at each radial grid point and
/// each element node.
pub fn write_field_csv<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    cache: &BasisCache,
    fields: &[SubdomainField],
) -> Result<()> {
    writeln!(out, "x,y,re_ux,im_ux,re_uy,im_uy")?;
    for field in fields {
        let sub: &Subdomain = &mesh.subdomains[field.subdomain];
        for i in 0..=field.grid.n_steps {
            let xi = field.grid.xi(i);
            for &e in &sub.elements {
                let elem = &mesh.elements[e];
                let basis = cache.get(elem.degree());
                for &eta in basis.nodes() {
                    let (p, u) = field.sample(mesh, cache, e, xi, eta)?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        fmt(p[0]),
                        fmt(p[1]),
                        fmt(u[0].re),
                        fmt(u[0].im),
                        fmt(u[1].re),
                        fmt(u[1].im)
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Writes the instantaneous field at one phase angle (radians) as
/// `x,y,ux,uy`, over the same sample points as [`write_field_csv`].
pub fn write_phase_csv<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    cache: &BasisCache,
    fields: &[SubdomainField],
    phase: f64,
) -> Result<()> {
    writeln!(out, "x,y,ux,uy")?;
    for field in fields {
        let sub: &Subdomain = &mesh.subdomains[field.subdomain];
        for i in 0..=field.grid.n_steps {
            let xi = field.grid.xi(i);
            for &e in &sub.elements {
                let elem = &mesh.elements[e];
                let basis = cache.get(elem.degree());
                for &eta in basis.nodes() {
                    let (p, u) = field.sample(mesh, cache, e, xi, eta)?;
                    writeln!(
                        out,
                        "{},{},{},{}",
                        fmt(p[0]),
                        fmt(p[1]),
                        fmt(phase_snapshot(u[0], phase)),
                        fmt(phase_snapshot(u[1], phase))
                    )?;
                }
            }
        }
    }
    Ok(())
}
