//! Gauss–Hermite quadrature against the standard normal density.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::linalg::{matrix_exp, HermitianMatrix};

/// Nodes and weights with `Σ w_i f(x_i) ≈ E f(Z)`, `Z ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `n`-point rule from the Golub–Welsch eigenproblem of the Jacobi
    /// matrix of the probabilists' Hermite polynomials (off-diagonal `√k`).
    /// Exact for polynomials of degree `≤ 2n − 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "quadrature needs at least one node"));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000)
            .ok_or(Error::NoConvergence { iterations: 10_000 })?;
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                (eig.eigenvalues[k], v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `E exp(x·θ·H)` for standard normal `x`, by quadrature.
pub fn gaussian_matrix_mgf(
    h: &HermitianMatrix,
    theta: f64,
    rule: &GaussHermite,
) -> Result<HermitianMatrix> {
    let dim = h.dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let e = matrix_exp(&h.scale(x * theta)?)?;
        acc += e.as_nalgebra() * w;
    }
    HermitianMatrix::symmetrize(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let rule = GaussHermite::new(64).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(rule.expect(|x| x).abs() < 1e-12);
        assert!((rule.expect(|x| x * x) - 1.0).abs() < 1e-12);
        assert!((rule.expect(|x| x.powi(4)) - 3.0).abs() < 1e-11);
        assert!((rule.expect(|x| x.powi(6)) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn scalar_mgf_is_exact() {
        let rule = GaussHermite::new(64).unwrap();
        for theta in [-2.0, -0.5, 0.5, 1.0, 2.0] {
            let got = rule.expect(|x| (theta * x).exp());
            let exact = (0.5 * theta * theta).exp();
            assert!((got - exact).abs() < 1e-12 * exact, "theta = {theta}");
        }
    }

    #[test]
    fn small_rules() {
        let one = GaussHermite::new(1).unwrap();
        assert_eq!(one.nodes.len(), 1);
        assert!(one.nodes[0].abs() < 1e-15);
        let two = GaussHermite::new(2).unwrap();
        assert!((two.nodes[1] - 1.0).abs() < 1e-14);
        assert!((two.weights[0] - 0.5).abs() < 1e-14);
        assert!(GaussHermite::new(0).is_err());
    }
}
