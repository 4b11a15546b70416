//! Boundary coefficient matrices of a subdomain.
//!
//! Integrating the strain blocks against the elasticity matrix over the
//! boundary yields four real matrices per subdomain. With `B1` the radial
//! block and `B2` the circumferential one:
//!
//! * `E0 = integral of B1' D B1 |J|`
//! * `E1 = integral of B2' D B1 |J|`
//! * `E2 = integral of B2' D B2 |J|`
//! * `M0 = integral of N' rho N |J|`
//!
//! All four are assembled once per mesh; frequency and damping enter later.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::{gauss_legendre, ReferenceBasis};
use crate::error::{Result, SolverError};
use crate::geometry::{jacobian_at, strain_blocks_at};
use crate::mesh::{Mesh, Subdomain};

/// Reference bases shared across elements, keyed by polynomial degree.
#[derive(Debug, Default)]
pub struct BasisCache {
    map: HashMap<usize, ReferenceBasis>,
}

impl BasisCache {
    /// Builds bases for every element degree present in the mesh.
    pub fn for_mesh(mesh: &Mesh) -> Result<Self> {
        let mut map = HashMap::new();
        for elem in &mesh.elements {
            let degree = elem.degree();
            if !map.contains_key(&degree) {
                map.insert(degree, ReferenceBasis::gauss_lobatto(degree)?);
            }
        }
        Ok(Self { map })
    }

    pub fn get(&self, degree: usize) -> &ReferenceBasis {
        self.map
            .get(&degree)
            .expect("basis cache built for a different mesh")
    }
}

/// Boundary nodes of one subdomain in ascending node id, two interleaved
/// dofs per node: `2 local + 0` is the x component, `2 local + 1` the y.
#[derive(Debug, Clone)]
pub struct DofMap {
    nodes: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl DofMap {
    pub fn for_subdomain(mesh: &Mesh, sub: &Subdomain) -> Result<Self> {
        let mut nodes: Vec<usize> = Vec::new();
        for &e in &sub.elements {
            let elem = mesh
                .elements
                .get(e)
                .ok_or_else(|| SolverError::InvalidMesh(format!("element {e} out of range")))?;
            let mut local = elem.nodes.clone();
            local.sort_unstable();
            for w in local.windows(2) {
                if w[0] == w[1] {
                    return Err(SolverError::DuplicateNode(w[0]));
                }
            }
            for &n in &elem.nodes {
                if n >= mesh.nodes.len() {
                    return Err(SolverError::DanglingNode(n));
                }
                nodes.push(n);
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        let index = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        Ok(Self { nodes, index })
    }

    /// Boundary node ids, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn local(&self, node: usize) -> Option<usize> {
        self.index.get(&node).copied()
    }

    /// Global-within-subdomain dof of a node component (0 = x, 1 = y).
    pub fn dof(&self, node: usize, component: usize) -> Option<usize> {
        debug_assert!(component < 2);
        self.local(node).map(|l| 2 * l + component)
    }
}

/// The four real coefficient matrices of a subdomain, dofs per `DofMap`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrices {
    pub e0: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub m0: DMatrix<f64>,
}

/// Threshold on the condition number of `E0` beyond which the subdomain is
/// reported as degenerate.
const E0_COND_LIMIT: f64 = 1e14;

/// Assembles the coefficient matrices of one subdomain with a Gauss rule
/// of `degree + 2` points per element, exact for straight elements.
pub fn assemble_coefficients(
    mesh: &Mesh,
    sub: &Subdomain,
    cache: &BasisCache,
) -> Result<(CoefficientMatrices, DofMap)> {
    assemble_with_extra_points(mesh, sub, cache, 2)
}

fn assemble_with_extra_points(
    mesh: &Mesh,
    sub: &Subdomain,
    cache: &BasisCache,
    extra: usize,
) -> Result<(CoefficientMatrices, DofMap)> {
    let dofs = DofMap::for_subdomain(mesh, sub)?;
    let m = dofs.n_dofs();
    let material = &mesh.materials[sub.material];
    let d = material.elasticity_matrix();
    let rho = material.density;

    let mut e0 = DMatrix::zeros(m, m);
    let mut e1 = DMatrix::zeros(m, m);
    let mut e2 = DMatrix::zeros(m, m);
    let mut m0 = DMatrix::zeros(m, m);

    for &e in &sub.elements {
        let elem = &mesh.elements[e];
        let coords = mesh.element_coords(elem);
        let basis = cache.get(elem.degree());
        let (gauss_x, gauss_w) = gauss_legendre(elem.degree() + extra)?;
        let np = basis.points();
        let me = 2 * np;

        let mut e0_loc = DMatrix::<f64>::zeros(me, me);
        let mut e1_loc = DMatrix::<f64>::zeros(me, me);
        let mut e2_loc = DMatrix::<f64>::zeros(me, me);
        let mut m0_loc = DMatrix::<f64>::zeros(me, me);

        for (&x, &w) in gauss_x.iter().zip(&gauss_w) {
            let (values, derivs) = basis.shape_functions(x);
            let jac = jacobian_at(&coords, &values, &derivs, sub.center, x)?;
            let (b1, b2) = strain_blocks_at(&values, &derivs, &jac);
            let w_det = w * jac.det;
            let db1 = &d * &b1;
            let db2 = &d * &b2;
            e0_loc.gemm_tr(w_det, &b1, &db1, 1.0);
            e1_loc.gemm_tr(w_det, &b2, &db1, 1.0);
            e2_loc.gemm_tr(w_det, &b2, &db2, 1.0);
            let w_rho = w_det * rho;
            for i in 0..np {
                for j in 0..np {
                    let v = w_rho * values[i] * values[j];
                    m0_loc[(2 * i, 2 * j)] += v;
                    m0_loc[(2 * i + 1, 2 * j + 1)] += v;
                }
            }
        }

        let gdof: Vec<usize> = elem
            .nodes
            .iter()
            .map(|&n| dofs.dof(n, 0).expect("dof map covers element nodes"))
            .collect();
        for li in 0..np {
            for lj in 0..np {
                for ci in 0..2 {
                    for cj in 0..2 {
                        let (gi, gj) = (gdof[li] + ci, gdof[lj] + cj);
                        let (si, sj) = (2 * li + ci, 2 * lj + cj);
                        e0[(gi, gj)] += e0_loc[(si, sj)];
                        e1[(gi, gj)] += e1_loc[(si, sj)];
                        e2[(gi, gj)] += e2_loc[(si, sj)];
                        m0[(gi, gj)] += m0_loc[(si, sj)];
                    }
                }
            }
        }
    }

    check_e0(&e0)?;
    Ok((CoefficientMatrices { e0, e1, e2, m0 }, dofs))
}

fn check_e0(e0: &DMatrix<f64>) -> Result<()> {
    let sym = SymmetricEigen::new(e0.clone());
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for &l in sym.eigenvalues.iter() {
        min = min.min(l);
        max = max.max(l.abs());
    }
    let rcond = if max > 0.0 { min / max } else { 0.0 };
    if !(rcond.is_finite() && rcond > 1.0 / E0_COND_LIMIT) {
        return Err(SolverError::SingularE0 { rcond });
    }
    Ok(())
}
