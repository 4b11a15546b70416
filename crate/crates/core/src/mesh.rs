//! Mesh model: shared nodes, boundary line elements, and subdomains that
//! scale those elements from their own center over a radial grid.

use serde::Deserialize;

use crate::basis::ReferenceBasis;
use crate::error::{Result, SolverError};
use crate::geometry::{jacobian, BoundaryElement, ScalingCenter};
use crate::material::{DampingProfile, Material};

/// Whether a subdomain fills the interior of its boundary or the exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubdomainKind {
    Bounded,
    Unbounded,
}

/// Uniform grid in the radial coordinate. The boundary end is always
/// `xi = 1`; bounded grids start near the scaling center (`0 < start < 1`)
/// and unbounded grids start in the exterior (`start > 1`), so their step
/// is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub xi_start: f64,
    pub n_steps: usize,
}

impl RadialGrid {
    pub const XI_END: f64 = 1.0;

    pub fn new(xi_start: f64, n_steps: usize) -> Self {
        Self { xi_start, n_steps }
    }

    pub fn validate(&self, kind: SubdomainKind) -> Result<()> {
        if self.n_steps < 2 {
            return Err(SolverError::InvalidGrid(format!(
                "radial grid needs at least 2 steps, got {}",
                self.n_steps
            )));
        }
        if !self.xi_start.is_finite() {
            return Err(SolverError::InvalidGrid(format!(
                "radial grid start must be finite, got {}",
                self.xi_start
            )));
        }
        match kind {
            SubdomainKind::Bounded => {
                if self.xi_start <= 0.0 || self.xi_start >= Self::XI_END {
                    return Err(SolverError::InvalidGrid(format!(
                        "bounded grid start must lie in (0, 1), got {}",
                        self.xi_start
                    )));
                }
            }
            SubdomainKind::Unbounded => {
                if self.xi_start <= Self::XI_END {
                    return Err(SolverError::InvalidGrid(format!(
                        "unbounded grid start must exceed 1, got {}",
                        self.xi_start
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signed step; negative on unbounded grids.
    pub fn step(&self) -> f64 {
        (Self::XI_END - self.xi_start) / self.n_steps as f64
    }

    /// Grid point `i` of `0..=n_steps`; `xi(n_steps)` is exactly 1.
    pub fn xi(&self, i: usize) -> f64 {
        if i == self.n_steps {
            Self::XI_END
        } else {
            self.xi_start + self.step() * i as f64
        }
    }
}

/// One scaled boundary subdomain.
#[derive(Debug, Clone)]
pub struct Subdomain {
    pub kind: SubdomainKind,
    pub center: ScalingCenter,
    /// Indices into `Mesh::elements`, chained tip to tail.
    pub elements: Vec<usize>,
    /// Index into `Mesh::materials`.
    pub material: usize,
    pub grid: RadialGrid,
    pub damping: DampingProfile,
}

/// Full model: node pool, element pool, and the subdomains tying them to
/// materials and radial grids.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<BoundaryElement>,
    pub materials: Vec<Material>,
    pub subdomains: Vec<Subdomain>,
}

impl Mesh {
    /// Node coordinates of one element, in element order.
    pub fn element_coords(&self, element: &BoundaryElement) -> Vec<[f64; 2]> {
        element.nodes.iter().map(|&n| self.nodes[n]).collect()
    }

    /// Structural and geometric checks. Verifies ids, per-subdomain chain
    /// connectivity, grid ranges, and that every element is traversed
    /// counterclockwise around its subdomain's center (a star-shaped
    /// boundary screen, 32 samples per element plus the nodes).
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(SolverError::InvalidMesh("mesh has no nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n[0].is_finite() && n[1].is_finite()) {
                return Err(SolverError::InvalidMesh(format!(
                    "node {i} has non-finite coordinates"
                )));
            }
        }
        for (e, elem) in self.elements.iter().enumerate() {
            if elem.nodes.len() < 2 {
                return Err(SolverError::InvalidMesh(format!(
                    "element {e} has fewer than 2 nodes"
                )));
            }
            let mut seen = elem.nodes.clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(SolverError::DuplicateNode(w[0]));
                }
            }
            for &n in &elem.nodes {
                if n >= self.nodes.len() {
                    return Err(SolverError::DanglingNode(n));
                }
            }
        }
        if self.subdomains.is_empty() {
            return Err(SolverError::InvalidMesh("mesh has no subdomains".into()));
        }
        let mut owner = vec![usize::MAX; self.elements.len()];
        for (s, sub) in self.subdomains.iter().enumerate() {
            if sub.elements.is_empty() {
                return Err(SolverError::InvalidMesh(format!(
                    "subdomain {s} has no elements"
                )));
            }
            if sub.material >= self.materials.len() {
                return Err(SolverError::InvalidMesh(format!(
                    "subdomain {s} references material {} of {}",
                    sub.material,
                    self.materials.len()
                )));
            }
            sub.grid.validate(sub.kind)?;
            sub.damping.validate().map_err(|e| {
                SolverError::InvalidMesh(format!("subdomain {s} damping: {e}"))
            })?;
            for &e in &sub.elements {
                if e >= self.elements.len() {
                    return Err(SolverError::InvalidMesh(format!(
                        "subdomain {s} references element {e} of {}",
                        self.elements.len()
                    )));
                }
                if owner[e] != usize::MAX {
                    return Err(SolverError::InvalidMesh(format!(
                        "element {e} belongs to subdomains {} and {s}",
                        owner[e]
                    )));
                }
                owner[e] = s;
            }
            for w in sub.elements.windows(2) {
                let tail = *self.elements[w[0]].nodes.last().unwrap();
                let head = self.elements[w[1]].nodes[0];
                if tail != head {
                    return Err(SolverError::InvalidMesh(format!(
                        "subdomain {s}: elements {} and {} do not chain (node {tail} vs {head})",
                        w[0], w[1]
                    )));
                }
            }
            self.screen_orientation(s, sub)?;
        }
        if let Some(e) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(SolverError::InvalidMesh(format!(
                "element {e} belongs to no subdomain"
            )));
        }
        Ok(())
    }

    fn screen_orientation(&self, s: usize, sub: &Subdomain) -> Result<()> {
        for &e in &sub.elements {
            let elem = &self.elements[e];
            let coords = self.element_coords(elem);
            let basis = ReferenceBasis::gauss_lobatto(elem.degree())?;
            let mut etas: Vec<f64> = (0..32).map(|k| -1.0 + 2.0 * k as f64 / 31.0).collect();
            etas.extend_from_slice(basis.nodes());
            for eta in etas {
                jacobian(&coords, &basis, sub.center, eta).map_err(|err| match err {
                    SolverError::NonPositiveJacobian { eta, det } => SolverError::InvalidMesh(
                        format!(
                            "subdomain {s}, element {e}: boundary not counterclockwise around \
                             the scaling center (det {det:.3e} at eta {eta:.3})"
                        ),
                    ),
                    other => other,
                })?;
            }
        }
        Ok(())
    }
}
