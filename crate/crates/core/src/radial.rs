//! Radial condensation: reduce the field inside one subdomain to a dynamic
//! stiffness acting on its boundary dofs.
//!
//! With the boundary discretized, the displacement amplitude along the
//! radial coordinate obeys
//!
//! ```text
//! E0 xi^2 u'' + (E0 + E1' - E1) xi u' + (w^2 xi^2 M0 - E2) u = 0
//! ```
//!
//! with the internal force `q(xi) = xi E0 u' + E1' u`. Hysteretic damping
//! multiplies the stiffness-like matrices by `1 + 2 i zeta(xi)`. Second
//! order central differences on a uniform grid turn this into a block
//! three-term recurrence; one ghost point past each end carries the force
//! boundary conditions. Eliminating rows from the closed end towards the
//! boundary leaves the relation `q = S u` on the boundary dofs and a chain
//! of recovery operators `u_i = R_i u_{i+1}` for the interior.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::assembly::CoefficientMatrices;
use crate::error::{Result, SolverError};
use crate::linalg::{zgemm, CMatrix, PivotLu};
use crate::material::{complex_modulus_factor, DampingProfile};
use crate::mesh::{RadialGrid, SubdomainKind};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MINUS_ONE: Complex64 = Complex64::new(-1.0, 0.0);

/// One block row of the radial difference scheme: coefficients of the
/// previous, current, and next grid values.
#[derive(Debug, Clone)]
pub struct BlockRow {
    pub theta: CMatrix,
    pub phi: CMatrix,
    pub psi: CMatrix,
}

/// Difference operator of one subdomain at one frequency. Rows are built
/// on demand; only O(1) blocks are alive at a time during condensation.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    /// `E0`.
    a: nalgebra::DMatrix<f64>,
    /// `E0 + E1' - E1`, the advection-like combination.
    b: nalgebra::DMatrix<f64>,
    /// `E1'`, the force coupling.
    e1t: nalgebra::DMatrix<f64>,
    e2: nalgebra::DMatrix<f64>,
    m0: nalgebra::DMatrix<f64>,
    grid: RadialGrid,
    damping: DampingProfile,
    omega: f64,
}

impl RadialOperator {
    pub fn new(
        coeff: &CoefficientMatrices,
        kind: SubdomainKind,
        grid: RadialGrid,
        damping: DampingProfile,
        omega: f64,
    ) -> Result<Self> {
        grid.validate(kind)?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(SolverError::OutOfRange(format!(
                "angular frequency must be finite and nonnegative, got {omega}"
            )));
        }
        let e1t = coeff.e1.transpose();
        let b = &coeff.e0 + &e1t - &coeff.e1;
        Ok(Self {
            a: coeff.e0.clone(),
            b,
            e1t,
            e2: coeff.e2.clone(),
            m0: coeff.m0.clone(),
            grid,
            damping,
            omega,
        })
    }

    pub fn block_size(&self) -> usize {
        self.a.nrows()
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn factor_at(&self, xi: f64) -> Result<Complex64> {
        let zeta = self
            .damping
            .at(xi, self.grid.xi_start, RadialGrid::XI_END)?;
        Ok(complex_modulus_factor(zeta))
    }

    fn combine(&self, terms: &[(Complex64, &nalgebra::DMatrix<f64>)]) -> CMatrix {
        let m = self.block_size();
        let mut out = CMatrix::zeros(m, m);
        for &(s, mat) in terms {
            for (o, &v) in out.iter_mut().zip(mat.iter()) {
                *o += s * v;
            }
        }
        out
    }

    /// Difference row centered on grid point `i`.
    pub fn interior_row(&self, i: usize) -> Result<BlockRow> {
        if i > self.grid.n_steps {
            return Err(SolverError::OutOfRange(format!(
                "grid point {i} beyond {}",
                self.grid.n_steps
            )));
        }
        let xi = self.grid.xi(i);
        let h = self.grid.step();
        let f = self.factor_at(xi)?;
        let curv = f * (xi * xi / (h * h));
        let adv = f * (xi / (2.0 * h));
        let inertia = Complex64::new(xi * xi * self.omega * self.omega, 0.0);
        Ok(BlockRow {
            theta: self.combine(&[(curv, &self.a), (-adv, &self.b)]),
            phi: self.combine(&[(-2.0 * curv, &self.a), (-f, &self.e2), (inertia, &self.m0)]),
            psi: self.combine(&[(curv, &self.a), (adv, &self.b)]),
        })
    }

    /// Force row through the ghost point past one end: the central
    /// difference form of `q = xi E0 u' + E1' u` at the first or the last
    /// grid point, ordered (ghost, end value, inner neighbor) like an
    /// interior row.
    pub fn ghost_row(&self, at_open_end: bool) -> Result<BlockRow> {
        let i = if at_open_end { self.grid.n_steps } else { 0 };
        let xi = self.grid.xi(i);
        let h = self.grid.step();
        let f = self.factor_at(xi)?;
        let grad = f * (xi / (2.0 * h));
        Ok(BlockRow {
            theta: self.combine(&[(-grad, &self.a)]),
            phi: self.combine(&[(f, &self.e1t)]),
            psi: self.combine(&[(grad, &self.a)]),
        })
    }
}

/// Whether to keep the recovery operators for later interior evaluation.
/// Keeping them costs `n_steps` dense blocks of memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryStore {
    Keep,
    Discard,
}

/// Result of condensing a subdomain: its boundary dynamic stiffness plus,
/// optionally, the sweep operators for interior recovery.
pub struct RadialCondensation {
    stiffness: CMatrix,
    recovery: Option<Vec<CMatrix>>,
    grid: RadialGrid,
    omega: f64,
}

impl RadialCondensation {
    /// Dynamic stiffness on the boundary dofs, force per displacement as
    /// seen by the global system.
    pub fn stiffness(&self) -> &CMatrix {
        &self.stiffness
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Interior values at every grid point given the boundary solution.
    /// Index `i` of the result is grid point `i`; the last entry is the
    /// boundary value itself.
    pub fn recover_interior(&self, boundary: &DVector<Complex64>) -> Result<Vec<DVector<Complex64>>> {
        let recovery = self.recovery.as_ref().ok_or(SolverError::RecoveryDiscarded)?;
        let n = recovery.len();
        let mut values = vec![DVector::zeros(0); n + 1];
        values[n] = boundary.clone();
        for i in (0..n).rev() {
            values[i] = &recovery[i] * &values[i + 1];
        }
        Ok(values)
    }
}

/// Condenses the difference scheme of one subdomain onto its boundary.
///
/// The closed-end ghost is eliminated first, then the open-end ghost
/// against the untouched last interior row, then a forward sweep walks the
/// recurrence towards the boundary. Right-hand sides stay identically zero
/// through every step, so none are carried.
pub fn condense(
    op: &RadialOperator,
    kind: SubdomainKind,
    store: RecoveryStore,
) -> Result<RadialCondensation> {
    let n = op.grid().n_steps;

    // Closed end: q = 0 there, so the ghost solves to a combination of the
    // first two interior values.
    let ghost = op.ghost_row(false)?;
    let lu = PivotLu::new(ghost.theta, -1)?;
    let t_phi = lu.solve(&ghost.phi);
    let t_psi = lu.solve(&ghost.psi);
    let row0 = op.interior_row(0)?;
    let mut phi_prev = row0.phi;
    let mut psi_prev = row0.psi;
    zgemm(MINUS_ONE, &row0.theta, &t_phi, ONE, &mut phi_prev);
    zgemm(MINUS_ONE, &row0.theta, &t_psi, ONE, &mut psi_prev);

    // Open end: eliminate the inner neighbor from the force row using the
    // last interior row before the sweep rewrites it.
    let row_n = op.interior_row(n)?;
    let mut force_phi;
    let mut force_psi;
    {
        let ghost = op.ghost_row(true)?;
        let lu = PivotLu::new(row_n.theta.clone(), n as i64)?;
        let t_phi = lu.solve(&row_n.phi);
        let t_psi = lu.solve(&row_n.psi);
        force_phi = ghost.phi;
        force_psi = ghost.psi;
        zgemm(MINUS_ONE, &ghost.theta, &t_phi, ONE, &mut force_phi);
        zgemm(MINUS_ONE, &ghost.theta, &t_psi, ONE, &mut force_psi);
    }

    // Sweep towards the boundary: u_{i-1} = R_{i-1} u_i folds row i - 1
    // into row i.
    let mut recovery = (store == RecoveryStore::Keep).then(|| Vec::with_capacity(n));
    let mut row_n = Some(row_n);
    for i in 1..=n {
        let lu = PivotLu::new(phi_prev, (i - 1) as i64)?;
        let mut r = psi_prev;
        lu.solve_in_place(&mut r);
        r.neg_mut();
        let mut row = if i < n {
            op.interior_row(i)?
        } else {
            row_n.take().expect("last row consumed once")
        };
        zgemm(ONE, &row.theta, &r, ONE, &mut row.phi);
        phi_prev = row.phi;
        psi_prev = row.psi;
        if let Some(list) = recovery.as_mut() {
            list.push(r);
        }
    }

    // The swept last row links the boundary value to the open-end ghost;
    // substituting the ghost into the force row leaves q = S u.
    let lu = PivotLu::new(psi_prev, n as i64)?;
    let k = lu.solve(&phi_prev);
    let mut stiffness = force_phi;
    zgemm(MINUS_ONE, &force_psi, &k, ONE, &mut stiffness);
    if kind == SubdomainKind::Unbounded {
        stiffness.neg_mut();
    }

    Ok(RadialCondensation {
        stiffness,
        recovery,
        grid: op.grid(),
        omega: op.omega(),
    })
}
