//! Fixed-node Gaussian quadrature against Beta and Dirichlet densities.
//!
//! Expected utilities over conjugate posteriors are computed with
//! Gauss-Jacobi rules, which absorb the density's `theta^(a-1)(1-theta)^(b-1)`
//! weight exactly. The rule is exact for polynomial integrands up to degree
//! 2n-1, so affine utilities reproduce the posterior mean to machine
//! precision for any shape parameters, including endpoint-singular ones.
//!
//! Nodes and weights come from the Golub-Welsch construction: eigenvalues of
//! the symmetric tridiagonal matrix of the Jacobi-polynomial three-term
//! recurrence are the nodes, squared first eigenvector components the
//! weights.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Default node count for Beta expectations.
pub const BETA_QUAD_NODES: usize = 256;

/// Gauss-Jacobi rule on (0,1) for the weight `x^(alpha-1) (1-x)^(beta-1)`.
///
/// Returns `(nodes, weights)` with the weights normalized to sum to one, so
/// `sum(w_i * f(x_i))` approximates the expectation of `f` under
/// `Beta(alpha, beta)`.
pub fn gauss_jacobi_01(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature needs >= 1 node".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Beta shape parameters must be positive finite, got ({alpha}, {beta})"
        )));
    }
    // Jacobi weight (1-t)^a (1+t)^b on [-1,1]; t = 2x-1 maps
    // x^(alpha-1)(1-x)^(beta-1) to a = beta-1, b = alpha-1.
    let a = beta - 1.0;
    let b = alpha - 1.0;
    let ab = a + b;

    let mut diag = vec![0.0f64; n];
    let mut off = vec![0.0f64; n.saturating_sub(1)];
    diag[0] = (b - a) / (ab + 2.0);
    for (k, d) in diag.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *d = (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
    }
    if n > 1 {
        off[0] = (4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0))).sqrt();
    }
    for (k, o) in off.iter_mut().enumerate().skip(1) {
        let k = (k + 1) as f64;
        let num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        let den = (2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
        *o = (num / den).sqrt();
    }

    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j || j + 1 == i {
            off[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        nodes.push((eig.eigenvalues[i] + 1.0) / 2.0);
        weights.push(eig.eigenvectors[(0, i)].powi(2));
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok((nodes, weights))
}

/// Expectation of `f` under `Beta(alpha, beta)` via a 256-node rule.
pub fn beta_expectation<F: Fn(f64) -> f64>(alpha: f64, beta: f64, f: F) -> Result<f64> {
    let (nodes, weights) = gauss_jacobi_01(BETA_QUAD_NODES, alpha, beta)?;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let v = f(*x);
        if !v.is_finite() {
            return Err(Error::NonFiniteUtility);
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Expectation of `f` under `Dirichlet(alphas)` via nested Gauss-Jacobi
/// rules over the stick-breaking decomposition.
///
/// `theta_i = z_i * prod_{j<i}(1 - z_j)` with independent
/// `z_i ~ Beta(alpha_i, sum_{j>i} alpha_j)`, so the simplex integral
/// factorizes into b-1 one-dimensional Beta expectations. Node count per
/// dimension is chosen so the total grid carries at least 256 nodes.
pub fn dirichlet_expectation<F: Fn(&[f64]) -> f64>(alphas: &[f64], f: F) -> Result<f64> {
    let b = alphas.len();
    if b < 2 {
        return Err(Error::InvalidParameter(
            "Dirichlet expectation needs >= 2 categories".into(),
        ));
    }
    let dims = b - 1;
    let per_dim = match dims {
        1 => 256,
        2 => 32,
        3 => 16,
        _ => 8,
    };

    // Per-dimension rules for the stick-breaking Beta factors.
    let mut rules = Vec::with_capacity(dims);
    let mut tail: f64 = alphas.iter().sum();
    for &alpha_i in alphas.iter().take(dims) {
        tail -= alpha_i;
        rules.push(gauss_jacobi_01(per_dim, alpha_i, tail)?);
    }

    let mut theta = vec![0.0f64; b];
    let mut acc = 0.0;
    let mut err = None;
    nested(&rules, 0, 1.0, 1.0, &mut theta, &mut |theta, w| {
        let v = f(theta);
        if !v.is_finite() {
            err = Some(Error::NonFiniteUtility);
        }
        acc += w * v;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn nested(
    rules: &[(Vec<f64>, Vec<f64>)],
    dim: usize,
    remaining: f64,
    weight: f64,
    theta: &mut Vec<f64>,
    visit: &mut impl FnMut(&[f64], f64),
) {
    if dim == rules.len() {
        theta[dim] = remaining;
        visit(theta, weight);
        return;
    }
    let (nodes, weights) = &rules[dim];
    for (z, w) in nodes.iter().zip(weights) {
        theta[dim] = remaining * z;
        nested(rules, dim + 1, remaining * (1.0 - z), weight * w, theta, visit);
    }
}
