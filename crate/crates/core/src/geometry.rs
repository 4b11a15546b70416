//! Scaled boundary geometry: line elements on the subdomain boundary,
//! mapped over the radial coordinate from a scaling center.
//!
//! A point of a subdomain is `x(xi, eta) = x_c + xi (x_p(eta) - x_c)` where
//! `x_p` interpolates the boundary element nodes. `xi` is 0 at the center,
//! 1 on the boundary and greater than 1 in the exterior of unbounded
//! subdomains.

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::basis::ReferenceBasis;
use crate::error::{Result, SolverError};

/// Scaling center of a subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ScalingCenter {
    pub x: f64,
    pub y: f64,
}

/// One boundary line element: ordered node ids, counterclockwise as seen
/// from the scaling center. Degree is the node count minus one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryElement {
    pub nodes: Vec<usize>,
}

impl BoundaryElement {
    pub fn degree(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// Boundary Jacobian data at a circumferential position: determinant and
/// the inverse entries scaled by it.
#[derive(Debug, Clone, Copy)]
pub struct JacobianData {
    pub det: f64,
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
    /// Interpolated boundary point.
    pub point: [f64; 2],
    /// Tangent d(x_p, y_p)/d eta.
    pub tangent: [f64; 2],
}

impl JacobianData {
    /// Arc-length measure of the boundary element, `|d x_p / d eta|`.
    pub fn surface_measure(&self) -> f64 {
        (self.tangent[0] * self.tangent[0] + self.tangent[1] * self.tangent[1]).sqrt()
    }
}

fn interpolate(coords: &[[f64; 2]], values: &[f64], derivs: &[f64]) -> ([f64; 2], [f64; 2]) {
    let mut p = [0.0; 2];
    let mut t = [0.0; 2];
    for (c, (&n, &d)) in coords.iter().zip(values.iter().zip(derivs)) {
        p[0] += n * c[0];
        p[1] += n * c[1];
        t[0] += d * c[0];
        t[1] += d * c[1];
    }
    (p, t)
}

/// Physical coordinates of `(xi, eta)` for an element with node coordinates
/// `coords`, interpolated with `basis` and scaled from `center`.
pub fn map_point(
    coords: &[[f64; 2]],
    basis: &ReferenceBasis,
    center: ScalingCenter,
    xi: f64,
    eta: f64,
) -> [f64; 2] {
    debug_assert_eq!(coords.len(), basis.points());
    let (values, derivs) = basis.shape_functions(eta);
    let (p, _) = interpolate(coords, &values, &derivs);
    [center.x + xi * (p[0] - center.x), center.y + xi * (p[1] - center.y)]
}

/// Boundary Jacobian at `eta`. Fails with `NonPositiveJacobian` when the
/// element is traversed clockwise around the center or collapses.
pub fn jacobian(
    coords: &[[f64; 2]],
    basis: &ReferenceBasis,
    center: ScalingCenter,
    eta: f64,
) -> Result<JacobianData> {
    let (values, derivs) = basis.shape_functions(eta);
    jacobian_at(coords, &values, &derivs, center, eta)
}

pub(crate) fn jacobian_at(
    coords: &[[f64; 2]],
    values: &[f64],
    derivs: &[f64],
    center: ScalingCenter,
    eta: f64,
) -> Result<JacobianData> {
    debug_assert_eq!(coords.len(), values.len());
    let (p, t) = interpolate(coords, values, derivs);
    let rx = p[0] - center.x;
    let ry = p[1] - center.y;
    let det = rx * t[1] - ry * t[0];
    let scale = rx * rx + ry * ry + t[0] * t[0] + t[1] * t[1];
    if det <= scale * 1e-14 {
        return Err(SolverError::NonPositiveJacobian { eta, det });
    }
    Ok(JacobianData {
        det,
        j11: t[1] / det,
        j12: -ry / det,
        j21: -t[0] / det,
        j22: rx / det,
        point: p,
        tangent: t,
    })
}

/// The two strain-displacement blocks at `eta`: `B1 = b1 N` acts on the
/// radial derivative direction and `B2 = b2 dN/deta` on the circumferential
/// one. Shape `3 x 2(degree + 1)` each, dofs interleaved (x, y) per node.
pub fn strain_blocks(
    coords: &[[f64; 2]],
    basis: &ReferenceBasis,
    center: ScalingCenter,
    eta: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (values, derivs) = basis.shape_functions(eta);
    let jac = jacobian_at(coords, &values, &derivs, center, eta)?;
    Ok(strain_blocks_at(&values, &derivs, &jac))
}

pub(crate) fn strain_blocks_at(
    values: &[f64],
    derivs: &[f64],
    jac: &JacobianData,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let np = values.len();
    let mut b1 = DMatrix::zeros(3, 2 * np);
    let mut b2 = DMatrix::zeros(3, 2 * np);
    for i in 0..np {
        let (n, d) = (values[i], derivs[i]);
        b1[(0, 2 * i)] = jac.j11 * n;
        b1[(1, 2 * i + 1)] = jac.j21 * n;
        b1[(2, 2 * i)] = jac.j21 * n;
        b1[(2, 2 * i + 1)] = jac.j11 * n;
        b2[(0, 2 * i)] = jac.j12 * d;
        b2[(1, 2 * i + 1)] = jac.j22 * d;
        b2[(2, 2 * i)] = jac.j22 * d;
        b2[(2, 2 * i + 1)] = jac.j12 * d;
    }
    (b1, b2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn basis(n: usize) -> ReferenceBasis {
        ReferenceBasis::gauss_lobatto(n).unwrap()
    }

    #[test]
    fn map_point_collapses_to_center_at_origin() {
        let coords = [[2.0, 0.0], [2.0, 2.0]];
        let center = ScalingCenter { x: 0.5, y: -0.25 };
        let p = map_point(&coords, &basis(1), center, 0.0, 0.31);
        assert_eq!(p, [0.5, -0.25]);
    }

    #[test]
    fn map_point_reproduces_boundary_and_midpoint() {
        let coords = [[2.0, 0.0], [2.0, 2.0]];
        let center = ScalingCenter { x: 0.0, y: 0.0 };
        let b = basis(1);
        let p = map_point(&coords, &b, center, 1.0, -1.0);
        assert_eq!(p, [2.0, 0.0]);
        let p = map_point(&coords, &b, center, 0.5, 0.0);
        assert_eq!(p, [1.0, 0.5]);
    }

    #[test]
    fn jacobian_of_vertical_segment() {
        // Element from (1, -1) to (1, 1), center at the origin: |J| = 1,
        // j11 = 1 and j12 = 0 at eta = 0.
        let coords = [[1.0, -1.0], [1.0, 1.0]];
        let center = ScalingCenter { x: 0.0, y: 0.0 };
        let jac = jacobian(&coords, &basis(1), center, 0.0).unwrap();
        assert!((jac.det - 1.0).abs() < 1e-15);
        assert!((jac.j11 - 1.0).abs() < 1e-15);
        assert_eq!(jac.j12, 0.0);
        assert_eq!(jac.j21, 0.0);
        assert!((jac.j22 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_element_is_rejected() {
        let coords = [[1.0, 1.0], [1.0, -1.0]];
        let center = ScalingCenter { x: 0.0, y: 0.0 };
        let err = jacobian(&coords, &basis(1), center, 0.0).unwrap_err();
        assert!(matches!(err, SolverError::NonPositiveJacobian { .. }));
    }

    #[test]
    fn circular_arc_jacobian() {
        // Quadratic element on a circle of radius r about the center,
        // half-angle t0. The interpolated geometry at eta = 0 gives
        // |J| = r^2 sin(t0).
        let r = 3.0;
        let t0 = 0.4;
        let b = basis(2);
        let coords: Vec<[f64; 2]> = b
            .nodes()
            .iter()
            .map(|&eta| {
                let a = t0 * eta;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        let center = ScalingCenter { x: 0.0, y: 0.0 };
        let jac = jacobian(&coords, &b, center, 0.0).unwrap();
        assert!((jac.det - r * r * t0.sin()).abs() < 1e-12 * r * r);
    }

    #[test]
    fn mapping_derivative_consistency() {
        // d(map)/d eta at fixed xi must equal xi * tangent.
        let b = basis(4);
        let coords: Vec<[f64; 2]> = b
            .nodes()
            .iter()
            .map(|&eta| [2.0 + eta, 0.5 * eta * eta - 1.0 + 0.2 * eta])
            .collect();
        let center = ScalingCenter { x: 0.3, y: 0.1 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..100 {
            let xi: f64 = rng.random_range(0.05..1.5);
            let eta: f64 = rng.random_range(-0.99..0.99);
            let jac = jacobian(&coords, &b, center, eta).unwrap();
            let pp = map_point(&coords, &b, center, xi, eta + h);
            let pm = map_point(&coords, &b, center, xi, eta - h);
            for c in 0..2 {
                let fd = (pp[c] - pm[c]) / (2.0 * h);
                assert!((fd - xi * jac.tangent[c]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
            // d(map)/d xi equals the ray from the center to the boundary point.
            let pp = map_point(&coords, &b, center, xi + h, eta);
            let pm = map_point(&coords, &b, center, xi - h, eta);
            let ray = [jac.point[0] - center.x, jac.point[1] - center.y];
            for c in 0..2 {
                let fd = (pp[c] - pm[c]) / (2.0 * h);
                assert!((fd - ray[c]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn strain_block_pattern_on_vertical_segment() {
        let coords = [[1.0, -1.0], [1.0, 1.0]];
        let center = ScalingCenter { x: 0.0, y: 0.0 };
        let (b1, b2) = strain_blocks(&coords, &basis(1), center, 0.0).unwrap();
        // j11 = 1, j21 = 0: B1 columns carry (N_i, 0) in rows (0, 2).
        assert!((b1[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(b1[(1, 1)], 0.0);
        assert!((b1[(2, 1)] - 0.5).abs() < 1e-15);
        // j12 = 0, j22 = 1: B2 carries dN_i in rows (1, 2). dN is -1/2 for
        // the first node and +1/2 for the second.
        assert_eq!(b2[(0, 0)], 0.0);
        assert!((b2[(1, 1)] + 0.5).abs() < 1e-15);
        assert!((b2[(2, 0)] + 0.5).abs() < 1e-15);
        assert!((b2[(1, 3)] - 0.5).abs() < 1e-15);
        assert!((b2[(2, 2)] - 0.5).abs() < 1e-15);
        assert_eq!(b1.ncols(), 4);
        assert_eq!(b1.nrows(), 3);
    }

    #[test]
    fn strain_blocks_translation_kernel() {
        // A rigid translation produces no circumferential strain: B2 r = 0.
        let b = basis(3);
        let coords: Vec<[f64; 2]> = b
            .nodes()
            .iter()
            .map(|&eta| [1.0 + 0.3 * eta, eta - 0.1 * eta * eta])
            .collect();
        let center = ScalingCenter { x: -0.2, y: 0.0 };
        for &eta in &[-0.77, 0.0, 0.31, 0.9] {
            let (_, b2) = strain_blocks(&coords, &b, center, eta).unwrap();
            for dir in 0..2 {
                let mut r = nalgebra::DVector::zeros(2 * b.points());
                for i in 0..b.points() {
                    r[2 * i + dir] = 1.0;
                }
                let s = &b2 * &r;
                assert!(s.norm() < 1e-13, "eta = {eta}, dir = {dir}");
            }
        }
    }
}
