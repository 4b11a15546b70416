//! Gauss-Lobatto-Legendre reference basis on [-1, 1]: nodes, quadrature
//! weights and Lagrange shape functions, plus plain Gauss-Legendre rules
//! for the coefficient-matrix integrals.

use crate::error::{Result, SolverError};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;
pub const MAX_DEGREE: usize = 64;

/// Legendre polynomial `P_n` and its derivative at `x`.
///
/// Three-term recurrence for the value; the derivative is tracked through
/// `P'_k = P'_{k-2} + (2k-1) P_{k-1}`, which stays finite at the endpoints.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        let d_next = d_prev + (2.0 * kf - 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Nodes and weights of a reference interval rule together with the degree
/// of the Lagrange basis spanned by the nodes.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ReferenceBasis {
    /// Gauss-Lobatto-Legendre rule of degree `n` (that is, `n + 1` points
    /// including both endpoints). The interior nodes are the roots of
    /// `P'_n`, found by Newton iteration from Chebyshev-Lobatto seeds.
    pub fn gauss_lobatto(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(SolverError::DegreeOutOfRange(n));
        }
        let mut nodes = vec![0.0; n + 1];
        nodes[0] = -1.0;
        nodes[n] = 1.0;
        for i in 1..n {
            // Seed sorted ascending; cos is decreasing on [0, pi].
            let mut x = -(std::f64::consts::PI * i as f64 / n as f64).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITERS {
                let (p, dp) = legendre(n, x);
                // Newton step on P'_n, with P'' from the Legendre equation
                // (1-x^2) P'' = 2x P' - n(n+1) P.
                let ddp = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
                let step = dp / ddp;
                x -= step;
                if step.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(SolverError::NonConvergence { degree: n, index: i });
            }
            nodes[i] = x;
        }
        // The root set is symmetric; average out the last bits of Newton noise.
        for i in 0..=n / 2 {
            let s = 0.5 * (nodes[i] - nodes[n - i]);
            nodes[i] = s;
            nodes[n - i] = -s;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre(n, x);
                2.0 / ((n * (n + 1)) as f64 * p * p)
            })
            .collect();
        Ok(Self { degree: n, nodes, weights })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes, `degree + 1`.
    pub fn points(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Lagrange shape functions and their derivatives at `eta`.
    ///
    /// `N_i(eta) = prod_{j != i} (eta - eta_j)/(eta_i - eta_j)`; the
    /// derivative is the product-rule sum, evaluated with prefix/suffix
    /// products so nodes themselves are exact (no division by zero).
    pub fn shape_functions(&self, eta: f64) -> (Vec<f64>, Vec<f64>) {
        let nodes = &self.nodes;
        let np = nodes.len();
        let mut values = vec![0.0; np];
        let mut derivs = vec![0.0; np];
        let mut diffs = vec![0.0; np];
        for i in 0..np {
            let mut denom = 1.0;
            let mut k = 0;
            for j in 0..np {
                if j != i {
                    denom *= nodes[i] - nodes[j];
                    diffs[k] = eta - nodes[j];
                    k += 1;
                }
            }
            let m = np - 1;
            // prefix[t] = d_0 .. d_{t-1}, suffix[t] = d_t .. d_{m-1}
            let mut prefix = vec![1.0; m + 1];
            for t in 0..m {
                prefix[t + 1] = prefix[t] * diffs[t];
            }
            let mut suffix = vec![1.0; m + 1];
            for t in (0..m).rev() {
                suffix[t] = suffix[t + 1] * diffs[t];
            }
            values[i] = prefix[m] / denom;
            let mut dsum = 0.0;
            for t in 0..m {
                dsum += prefix[t] * suffix[t + 1];
            }
            derivs[i] = dsum / denom;
        }
        (values, derivs)
    }
}

/// Gauss-Legendre rule with `npts` points (exact through degree `2*npts - 1`).
pub fn gauss_legendre(npts: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if npts == 0 || npts > MAX_DEGREE + 2 {
        return Err(SolverError::DegreeOutOfRange(npts));
    }
    let n = npts;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::NonConvergence { degree: n, index: i });
        }
        nodes[i] = x;
    }
    for i in 0..=n / 2 {
        let s = 0.5 * (nodes[i] - nodes[n - 1 - i]);
        nodes[i] = s;
        nodes[n - 1 - i] = -s;
    }
    for i in 0..n {
        let (_, dp) = legendre(n, nodes[i]);
        weights[i] = 2.0 / ((1.0 - nodes[i] * nodes[i]) * dp * dp);
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Rodrigues formula oracle: P_n = d^n/dx^n (x^2-1)^n / (2^n n!),
    /// expanded to monomial coefficients exactly.
    fn rodrigues(n: usize, x: f64) -> (f64, f64) {
        // (x^2 - 1)^n = sum_k C(n,k) (-1)^(n-k) x^(2k)
        let mut coeff = vec![0.0f64; 2 * n + 1];
        let mut binom = 1.0f64;
        for k in 0..=n {
            if k > 0 {
                binom *= (n - k + 1) as f64 / k as f64;
            }
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            coeff[2 * k] = sign * binom;
        }
        // differentiate n times
        for _ in 0..n {
            for p in 0..coeff.len() - 1 {
                coeff[p] = (p + 1) as f64 * coeff[p + 1];
            }
            let len = coeff.len();
            coeff[len - 1] = 0.0;
        }
        let mut scale = 1.0f64;
        for k in 1..=n {
            scale *= 2.0 * k as f64;
        }
        let mut value = 0.0;
        let mut deriv = 0.0;
        for p in (0..coeff.len()).rev() {
            deriv = deriv * x + value;
            value = value * x + coeff[p];
        }
        (value / scale, deriv / scale)
    }

    #[test]
    fn legendre_low_orders() {
        assert_eq!(legendre(0, 0.3), (1.0, 0.0));
        assert_eq!(legendre(1, 0.3), (0.3, 1.0));
        let (p2, d2) = legendre(2, 0.5);
        assert!((p2 - (1.5 * 0.25 - 0.5)).abs() < 1e-15);
        assert!((d2 - 3.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn legendre_matches_rodrigues_differentiation() {
        // Frozen from the Rodrigues oracle below: P_5(0.7), P_5'(0.7).
        let (p, d) = legendre(5, 0.7);
        assert!((p - (-0.36519875)).abs() < 1e-14, "P5(0.7) = {p}");
        assert!((d - (-1.53356250)).abs() < 1e-13, "P5'(0.7) = {d}");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 0..=10 {
            for _ in 0..50 {
                let x: f64 = rng.random_range(-1.0..=1.0);
                let (p, d) = legendre(n, x);
                let (pr, dr) = rodrigues(n, x);
                assert!((p - pr).abs() < 1e-11, "n={n} x={x}: {p} vs {pr}");
                assert!((d - dr).abs() < 1e-9, "n={n} x={x}: {d} vs {dr}");
            }
        }
    }

    #[test]
    fn legendre_endpoint_derivative() {
        for n in 1..=20 {
            let (_, d) = legendre(n, 1.0);
            let expected = (n * (n + 1)) as f64 / 2.0;
            assert!((d - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn gll_degree_one_and_two() {
        let b = ReferenceBasis::gauss_lobatto(1).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 1.0]);
        assert_eq!(b.weights(), &[1.0, 1.0]);

        let b = ReferenceBasis::gauss_lobatto(2).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 0.0, 1.0]);
        let w = b.weights();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 4.0 / 3.0).abs() < 1e-15);
        assert!((w[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gll_degree_three_interior_nodes() {
        // Interior roots of P'_3 at +-1/sqrt(5); weights {1/6, 5/6, 5/6, 1/6}.
        let b = ReferenceBasis::gauss_lobatto(3).unwrap();
        let s = 1.0 / 5.0f64.sqrt();
        assert!((b.nodes()[1] + s).abs() < 1e-15);
        assert!((b.nodes()[2] - s).abs() < 1e-15);
        let w = b.weights();
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((w[1] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn gll_node_symmetry_and_weight_positivity() {
        for n in 1..=MAX_DEGREE {
            let b = ReferenceBasis::gauss_lobatto(n).unwrap();
            let nodes = b.nodes();
            let weights = b.weights();
            assert_eq!(nodes.len(), n + 1);
            for i in 0..=n {
                assert_eq!(nodes[i], -nodes[n - i], "degree {n} node {i}");
                assert!(weights[i] > 0.0);
                if i > 0 {
                    assert!(nodes[i] > nodes[i - 1], "nodes must be sorted");
                }
            }
            let sum: f64 = weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-12 * (n as f64 + 1.0), "degree {n}: {sum}");
        }
    }

    #[test]
    fn gll_degree_bounds_rejected() {
        assert!(matches!(
            ReferenceBasis::gauss_lobatto(0),
            Err(SolverError::DegreeOutOfRange(0))
        ));
        assert!(matches!(
            ReferenceBasis::gauss_lobatto(65),
            Err(SolverError::DegreeOutOfRange(65))
        ));
    }

    #[test]
    fn gll_quadrature_exactness() {
        // (n+1)-point Lobatto is exact through degree 2n - 1.
        for n in 1..=10 {
            let b = ReferenceBasis::gauss_lobatto(n).unwrap();
            for k in 0..=(2 * n - 1) {
                let num: f64 = b
                    .nodes()
                    .iter()
                    .zip(b.weights())
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((num - exact).abs() < 1e-13, "n={n} k={k}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn shape_functions_kronecker_delta() {
        for n in [1usize, 2, 5, 9] {
            let b = ReferenceBasis::gauss_lobatto(n).unwrap();
            for (k, &eta) in b.nodes().iter().enumerate() {
                let (values, _) = b.shape_functions(eta);
                for (i, &v) in values.iter().enumerate() {
                    let expected = if i == k { 1.0 } else { 0.0 };
                    assert_eq!(v, expected, "exact delta property at nodes, n={n}");
                }
            }
        }
    }

    #[test]
    fn shape_functions_linear_element() {
        let b = ReferenceBasis::gauss_lobatto(1).unwrap();
        let (values, derivs) = b.shape_functions(0.0);
        assert_eq!(values, vec![0.5, 0.5]);
        assert_eq!(derivs, vec![-0.5, 0.5]);
    }

    #[test]
    fn shape_functions_partition_of_unity() {
        let b = ReferenceBasis::gauss_lobatto(6).unwrap();
        let (values, derivs) = b.shape_functions(0.43);
        let s: f64 = values.iter().sum();
        let ds: f64 = derivs.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(ds.abs() < 1e-12);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=10 {
            let b = ReferenceBasis::gauss_lobatto(n).unwrap();
            for _ in 0..1000 {
                let eta: f64 = rng.random_range(-1.0..=1.0);
                let (values, derivs) = b.shape_functions(eta);
                let s: f64 = values.iter().sum();
                let ds: f64 = derivs.iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} eta={eta}");
                assert!(ds.abs() < 1e-10, "n={n} eta={eta}");
            }
        }
    }

    #[test]
    fn shape_function_derivatives_match_finite_differences() {
        let b = ReferenceBasis::gauss_lobatto(7).unwrap();
        let h = 1e-6;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let eta: f64 = rng.random_range(-0.99..=0.99);
            let (_, derivs) = b.shape_functions(eta);
            let (vp, _) = b.shape_functions(eta + h);
            let (vm, _) = b.shape_functions(eta - h);
            for i in 0..derivs.len() {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((derivs[i] - fd).abs() < 1e-5, "i={i} eta={eta}");
            }
        }
    }

    #[test]
    fn gauss_legendre_rule() {
        let (nodes, weights) = gauss_legendre(3).unwrap();
        // 3-point Gauss: nodes {0, +-sqrt(3/5)}, exact through degree 5.
        assert!((nodes[1]).abs() < 1e-15);
        assert!((nodes[2] - (0.6f64).sqrt()).abs() < 1e-15);
        let int_x4: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * x.powi(4))
            .sum();
        assert!((int_x4 - 0.4).abs() < 1e-14);
        for npts in 1..=20 {
            let (nodes, weights) = gauss_legendre(npts).unwrap();
            for k in 0..2 * npts {
                let num: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((num - exact).abs() < 1e-12, "npts={npts} k={k}");
            }
        }
    }
}
