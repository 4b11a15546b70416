//! Global system: condensed subdomain stiffnesses scattered onto the shared
//! node set, surface loading, symmetry constraints, and the linear solve.
//!
//! Global dofs are two per mesh node, interleaved: node `k` owns dofs `2k`
//! (x) and `2k + 1` (y). The free surface is the line `y = 0`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::assembly::{BasisCache, DofMap};
use crate::basis::gauss_legendre;
use crate::error::{Result, SolverError};
use crate::linalg::CMatrix;
use crate::mesh::Mesh;
use crate::radial::RadialCondensation;

pub type CVector = DVector<Complex64>;

/// Assembled dynamic stiffness of the whole model at one frequency.
#[derive(Debug)]
pub struct GlobalSystem {
    matrix: CMatrix,
    omega: f64,
}

impl GlobalSystem {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_dofs(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Scatters every subdomain stiffness into the global matrix. All parts
/// must stem from the same frequency, and together they must touch every
/// mesh node.
pub fn assemble_global(
    mesh: &Mesh,
    parts: &[(&RadialCondensation, &DofMap)],
) -> Result<GlobalSystem> {
    let n_dofs = 2 * mesh.nodes.len();
    let mut matrix = CMatrix::zeros(n_dofs, n_dofs);
    let mut touched = vec![false; mesh.nodes.len()];
    let omega = match parts.first() {
        Some((c, _)) => c.omega(),
        None => {
            return Err(SolverError::InvalidMesh(
                "no subdomain stiffnesses to assemble".into(),
            ))
        }
    };
    for (cond, dofs) in parts {
        if cond.omega() != omega {
            return Err(SolverError::InconsistentFrequency(omega, cond.omega()));
        }
        let s = cond.stiffness();
        if s.nrows() != dofs.n_dofs() {
            return Err(SolverError::UnmatchedInterfaceNodes(format!(
                "stiffness is {} dofs but the dof map carries {}",
                s.nrows(),
                dofs.n_dofs()
            )));
        }
        let nodes = dofs.nodes();
        for (li, &ni) in nodes.iter().enumerate() {
            touched[ni] = true;
            for (lj, &nj) in nodes.iter().enumerate() {
                for ci in 0..2 {
                    for cj in 0..2 {
                        matrix[(2 * ni + ci, 2 * nj + cj)] += s[(2 * li + ci, 2 * lj + cj)];
                    }
                }
            }
        }
    }
    let orphans: Vec<usize> = (0..mesh.nodes.len()).filter(|&k| !touched[k]).collect();
    if !orphans.is_empty() {
        return Err(SolverError::UnmatchedInterfaceNodes(format!(
            "nodes {orphans:?} belong to no condensed subdomain"
        )));
    }
    Ok(GlobalSystem { matrix, omega })
}

/// Uniform vertical pressure on the strip `|x| <= half_width` of the free
/// surface, pushing downward (negative y).
#[derive(Debug, Clone, Copy)]
pub struct StripLoad {
    pub pressure: f64,
    pub half_width: f64,
}

fn mesh_extent(mesh: &Mesh) -> f64 {
    mesh.nodes
        .iter()
        .map(|n| n[0].abs().max(n[1].abs()))
        .fold(0.0, f64::max)
}

/// Interpolated x coordinate on an element at `eta`.
pub(crate) fn surface_x(coords: &[[f64; 2]], basis: &crate::basis::ReferenceBasis, eta: f64) -> f64 {
    let (values, _) = basis.shape_functions(eta);
    coords.iter().zip(&values).map(|(c, &v)| c[0] * v).sum()
}

/// Finds eta with `x(eta) = target` on a monotone element span by bisection.
pub(crate) fn eta_at_x(
    coords: &[[f64; 2]],
    basis: &crate::basis::ReferenceBasis,
    target: f64,
    increasing: bool,
) -> f64 {
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let x = surface_x(coords, basis, mid);
        if (x < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Consistent nodal forces of the strip load. Fails with `LoadOutsideMesh`
/// unless the meshed free surface covers the whole strip (its `x >= 0`
/// half when the mesh stops at the symmetry plane).
pub fn strip_load_vector(mesh: &Mesh, cache: &BasisCache, load: &StripLoad) -> Result<CVector> {
    if !(load.pressure.is_finite() && load.half_width > 0.0) {
        return Err(SolverError::OutOfRange(format!(
            "strip load needs a finite pressure and a positive half width, got {} and {}",
            load.pressure, load.half_width
        )));
    }
    let tol = 1e-9 * mesh_extent(mesh).max(load.half_width);
    let mut rhs = CVector::zeros(2 * mesh.nodes.len());
    let mut covered: Vec<(f64, f64)> = Vec::new();
    let mut surface_min_x = f64::INFINITY;
    let mut any_surface = false;

    for elem in &mesh.elements {
        if elem.nodes.iter().any(|&n| mesh.nodes[n][1].abs() > tol) {
            continue;
        }
        any_surface = true;
        let coords = mesh.element_coords(elem);
        let basis = cache.get(elem.degree());
        let x_a = coords.first().unwrap()[0];
        let x_b = coords.last().unwrap()[0];
        let (x_lo, x_hi) = (x_a.min(x_b), x_a.max(x_b));
        surface_min_x = surface_min_x.min(x_lo);

        let strip_lo = -load.half_width;
        let strip_hi = load.half_width;
        let lo = x_lo.max(strip_lo);
        let hi = x_hi.min(strip_hi);
        if hi - lo <= tol {
            continue;
        }
        covered.push((lo, hi));

        let increasing = x_b > x_a;
        let eta_of = |x: f64| {
            if x <= x_lo + tol && !increasing {
                return 1.0;
            }
            if x <= x_lo + tol {
                return -1.0;
            }
            if x >= x_hi - tol {
                return if increasing { 1.0 } else { -1.0 };
            }
            eta_at_x(&coords, basis, x, increasing)
        };
        let (eta_1, eta_2) = (eta_of(lo), eta_of(hi));
        let (eta_lo, eta_hi) = if eta_1 < eta_2 { (eta_1, eta_2) } else { (eta_2, eta_1) };

        let (gx, gw) = gauss_legendre(elem.degree() + 2)?;
        let mid = 0.5 * (eta_lo + eta_hi);
        let half = 0.5 * (eta_hi - eta_lo);
        for (&p, &w) in gx.iter().zip(&gw) {
            let eta = mid + half * p;
            let (values, derivs) = basis.shape_functions(eta);
            let (mut tx, mut ty) = (0.0, 0.0);
            for (c, &d) in coords.iter().zip(&derivs) {
                tx += d * c[0];
                ty += d * c[1];
            }
            let ds = (tx * tx + ty * ty).sqrt() * half * w;
            for (local, &node) in elem.nodes.iter().enumerate() {
                rhs[2 * node + 1] += Complex64::new(-load.pressure * values[local] * ds, 0.0);
            }
        }
    }

    if !any_surface {
        return Err(SolverError::LoadOutsideMesh(
            "the mesh has no elements on the free surface y = 0".into(),
        ));
    }

    // The strip must be fully carried by surface elements: from -b to b on
    // a full model, from 0 to b when the mesh starts at the symmetry plane.
    let required_lo = if surface_min_x < -tol { -load.half_width } else { 0.0 };
    covered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut reach = required_lo;
    for &(lo, hi) in &covered {
        if lo > reach + tol {
            break;
        }
        reach = reach.max(hi);
    }
    if reach < load.half_width - tol {
        return Err(SolverError::LoadOutsideMesh(format!(
            "surface elements cover the strip only up to x = {reach} of [{required_lo}, {}]",
            load.half_width
        )));
    }
    Ok(rhs)
}

/// Pins the x displacement of every node on the symmetry plane `x = 0`.
/// Constrained rows and columns are zeroed with a unit-scale diagonal so
/// conditioning is preserved.
pub fn apply_symmetry_constraints(system: &mut GlobalSystem, rhs: &mut CVector, mesh: &Mesh) {
    let tol = 1e-9 * mesh_extent(mesh);
    let n = system.matrix.nrows();
    let mut scale = 0.0;
    for k in 0..n {
        scale += system.matrix[(k, k)].norm();
    }
    scale = (scale / n as f64).max(1.0);
    for (node, coord) in mesh.nodes.iter().enumerate() {
        if coord[0].abs() > tol {
            continue;
        }
        let dof = 2 * node;
        for k in 0..n {
            system.matrix[(dof, k)] = Complex64::ZERO;
            system.matrix[(k, dof)] = Complex64::ZERO;
        }
        system.matrix[(dof, dof)] = Complex64::new(scale, 0.0);
        rhs[dof] = Complex64::ZERO;
    }
}

/// Relative residual above which a solve is reported as unstable.
const RESIDUAL_LIMIT: f64 = 1e-10;

/// Direct solve with an a posteriori residual check.
pub fn solve(system: &GlobalSystem, rhs: &CVector) -> Result<CVector> {
    let lu = system.matrix.clone().lu();
    let solution = lu.solve(rhs).ok_or_else(|| {
        SolverError::SingularGlobalMatrix("factorization found a zero pivot".into())
    })?;
    let residual = (&system.matrix * &solution - rhs).norm();
    let denom = system.matrix.norm() * solution.norm() + rhs.norm();
    if !(residual.is_finite() && denom.is_finite()) || residual > RESIDUAL_LIMIT * denom.max(1e-300)
    {
        return Err(SolverError::SingularGlobalMatrix(format!(
            "relative residual {:.3e} after the direct solve",
            residual / denom
        )));
    }
    Ok(solution)
}
