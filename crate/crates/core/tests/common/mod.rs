//! Shared helpers for the integration tests.
//!
//! `DenseRadial` is a reference solver for the radial difference system of
//! one subdomain: every grid value and both ghost blocks form one unknown
//! vector, the block rows are typed out here directly from the difference
//! formulas, and the whole thing goes through a single dense LU. It shares
//! no elimination code with the library's sweep, so agreement checks the
//! condensation algorithm, not one implementation against itself.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use sbfem_core::assembly::CoefficientMatrices;
use sbfem_core::geometry::{BoundaryElement, ScalingCenter};
use sbfem_core::material::{DampingProfile, Material};
use sbfem_core::mesh::{Mesh, RadialGrid, Subdomain, SubdomainKind};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Path of a bundled configuration file, relative to the workspace root.
pub fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

fn scale(mat: &DMatrix<f64>, s: Complex64) -> CMat {
    CMat::from_fn(mat.nrows(), mat.ncols(), |r, c| s * mat[(r, c)])
}

/// Dense factorization of one subdomain's radial system.
///
/// Unknowns are the blocks `u_{-1}, u_0, .., u_n, u_{n+1}` (storage block j
/// holds `u_{j-1}`). Equations: the zero-force row through the closed-end
/// ghost, the difference row at every grid point, and a prescription of the
/// boundary value `u_n`. The boundary force then comes off the force row
/// through the open-end ghost, negated for unbounded subdomains.
pub struct DenseRadial {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Open-end force row: blocks multiplying `u_{n-1}, u_n, u_{n+1}`.
    force: [CMat; 3],
    m: usize,
    n: usize,
    sign: f64,
}

impl DenseRadial {
    pub fn new(
        coeff: &CoefficientMatrices,
        kind: SubdomainKind,
        grid: RadialGrid,
        damping: DampingProfile,
        omega: f64,
    ) -> Self {
        let m = coeff.e0.nrows();
        let n = grid.n_steps;
        let h = grid.step();
        let e1t = coeff.e1.transpose();
        let advect = &coeff.e0 + &e1t - &coeff.e1;

        let zeta = |xi: f64| match damping {
            DampingProfile::Constant { zeta } => zeta,
            DampingProfile::Linear {
                zeta_start,
                zeta_end,
            } => {
                let t = (xi - grid.xi_start) / (RadialGrid::XI_END - grid.xi_start);
                (1.0 - t) * zeta_start + t * zeta_end
            }
        };
        // q(xi) = xi E0^ u' + E1'^ u with a central difference for u'.
        let force_row = |xi: f64| -> [CMat; 3] {
            let f = Complex64::new(1.0, 2.0 * zeta(xi));
            [
                scale(&coeff.e0, -f * xi / (2.0 * h)),
                scale(&e1t, f),
                scale(&coeff.e0, f * xi / (2.0 * h)),
            ]
        };

        let dim = (n + 3) * m;
        let mut full = CMat::zeros(dim, dim);
        let mut put = |row: usize, col: usize, mat: &CMat| {
            full.view_mut((row * m, col * m), (m, m)).copy_from(mat);
        };

        let closed = force_row(grid.xi(0));
        put(0, 0, &closed[0]);
        put(0, 1, &closed[1]);
        put(0, 2, &closed[2]);

        for i in 0..=n {
            let xi = grid.xi(i);
            let f = Complex64::new(1.0, 2.0 * zeta(xi));
            let curv = f * xi * xi / (h * h);
            let adv = f * xi / (2.0 * h);
            let theta = scale(&coeff.e0, curv) - scale(&advect, adv);
            let phi = scale(&coeff.e0, -2.0 * curv) - scale(&coeff.e2, f)
                + scale(&coeff.m0, Complex64::new(xi * xi * omega * omega, 0.0));
            let psi = scale(&coeff.e0, curv) + scale(&advect, adv);
            put(i + 1, i, &theta);
            put(i + 1, i + 1, &phi);
            put(i + 1, i + 2, &psi);
        }

        put(n + 2, n + 1, &CMat::identity(m, m));

        Self {
            lu: full.lu(),
            force: force_row(grid.xi(n)),
            m,
            n,
            sign: match kind {
                SubdomainKind::Bounded => 1.0,
                SubdomainKind::Unbounded => -1.0,
            },
        }
    }

    /// Interior values at grid points `0..=n` (last is the boundary value
    /// itself) and the boundary force for one prescribed boundary vector.
    pub fn solve(&self, boundary: &CVec) -> (Vec<CVec>, CVec) {
        let mut rhs = CVec::zeros((self.n + 3) * self.m);
        rhs.rows_mut((self.n + 2) * self.m, self.m).copy_from(boundary);
        let sol = self.lu.solve(&rhs).expect("dense radial system not solvable");
        let block = |j: usize| sol.rows(j * self.m, self.m).into_owned();
        let values: Vec<CVec> = (0..=self.n).map(|i| block(i + 1)).collect();
        let q = &self.force[0] * block(self.n)
            + &self.force[1] * block(self.n + 1)
            + &self.force[2] * block(self.n + 2);
        (values, q * Complex64::new(self.sign, 0.0))
    }

    pub fn stiffness(&self) -> CMat {
        let mut s = CMat::zeros(self.m, self.m);
        for k in 0..self.m {
            let mut b = CVec::zeros(self.m);
            b[k] = Complex64::new(1.0, 0.0);
            let (_, q) = self.solve(&b);
            s.set_column(k, &q);
        }
        s
    }
}

/// One randomized subdomain with its excitation frequency.
pub struct RandomCase {
    pub mesh: Mesh,
    pub omega: f64,
}

impl RandomCase {
    pub fn subdomain(&self) -> &Subdomain {
        &self.mesh.subdomains[0]
    }
}

/// Draws a small random subdomain: an open counterclockwise chain of one to
/// three elements around the origin with gently varying radii, random
/// material, grid, damping profile, and frequency. Sizes stay within 20
/// boundary dofs and 30 radial steps. Geometry is rejection-sampled against
/// the mesh screen; mild radii make rejections rare.
pub fn random_case(rng: &mut impl Rng) -> RandomCase {
    loop {
        let kind = if rng.random_bool(0.5) {
            SubdomainKind::Bounded
        } else {
            SubdomainKind::Unbounded
        };
        let n_elems = rng.random_range(1..=3usize);
        let degree = rng.random_range(2..=(9 / n_elems).min(4));
        let n_nodes = n_elems * degree + 1;

        let span = rng.random_range(0.8..4.5);
        let start = rng.random_range(0.0..std::f64::consts::TAU);
        let mut radius: f64 = rng.random_range(0.9..1.4);
        let nodes: Vec<[f64; 2]> = (0..n_nodes)
            .map(|j| {
                let t = j as f64 / (n_nodes - 1) as f64;
                let angle = start + span * t + rng.random_range(-0.2..0.2) * span / n_nodes as f64;
                radius = (radius * rng.random_range(0.95..1.05)).clamp(0.7, 1.8);
                [radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        let elements: Vec<BoundaryElement> = (0..n_elems)
            .map(|e| BoundaryElement {
                nodes: (e * degree..=e * degree + degree).collect(),
            })
            .collect();

        let material = Material::new(
            rng.random_range(1.0e9..20.0e9),
            rng.random_range(0.05..0.45),
            rng.random_range(1000.0..5000.0),
            rng.random_range(0.0..0.5),
        )
        .expect("generated material in range");
        let grid = RadialGrid::new(
            match kind {
                SubdomainKind::Bounded => rng.random_range(1e-6..0.5),
                SubdomainKind::Unbounded => rng.random_range(1.2..3.0),
            },
            rng.random_range(2..=30),
        );
        let damping = if rng.random_bool(0.5) {
            DampingProfile::Constant {
                zeta: rng.random_range(0.0..1.0),
            }
        } else {
            DampingProfile::Linear {
                zeta_start: rng.random_range(0.0..1.0),
                zeta_end: rng.random_range(0.0..1.0),
            }
        };
        let omega = rng.random_range(0.0..500.0);

        let mesh = Mesh {
            nodes,
            elements,
            materials: vec![material],
            subdomains: vec![Subdomain {
                kind,
                center: ScalingCenter { x: 0.0, y: 0.0 },
                elements: (0..n_elems).collect(),
                material: 0,
                grid,
                damping,
            }],
        };
        if mesh.validate().is_ok() {
            return RandomCase { mesh, omega };
        }
    }
}
