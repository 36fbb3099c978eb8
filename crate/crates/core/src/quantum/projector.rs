//! Numerical check that every projector of an orthonormal basis is recovered from the
//! vector-valued observable X = Σ_i v_i Π_i and its index powers X^j = Σ_t v_{jt mod d} Π_t:
//! v_0 Π_i = (1/d) Σ_j v_{−ji} ∘ X^j.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::outcome_vector;
use crate::bell::is_prime;
use crate::error::{Error, Result};

type Matrix = Vec<Complex64>;

/// Operator Σ_m v_m ⊗ M_m kept in label form so that ∘ acts on labels.
struct LabeledOp {
    d: usize,
    parts: Vec<Matrix>,
}

impl LabeledOp {
    fn zero(d: usize) -> Self {
        LabeledOp { d, parts: vec![vec![Complex64::new(0.0, 0.0); d * d]; d] }
    }

    /// X^j = Σ_t v_{jt mod d} Π_t.
    fn power(projectors: &[Matrix], j: usize) -> Self {
        let d = projectors.len();
        let mut op = Self::zero(d);
        for (t, pi) in projectors.iter().enumerate() {
            add_into(&mut op.parts[(j * t) % d], pi, 1.0);
        }
        op
    }

    /// v_a ∘ (Σ_m v_m M_m) = Σ_m v_{a+m} M_m.
    fn compose(&self, a: usize) -> Self {
        let mut op = Self::zero(self.d);
        for (m, part) in self.parts.iter().enumerate() {
            op.parts[(a + m) % self.d] = part.clone();
        }
        op
    }

    /// The d−1 component matrices Σ_m (v_m)_c M_m.
    fn geometric(&self) -> Vec<Matrix> {
        let d = self.d;
        let vs: Vec<_> = (0..d).map(|m| outcome_vector(m, d).expect("m < d")).collect();
        (0..d - 1)
            .map(|c| {
                let mut out = vec![Complex64::new(0.0, 0.0); d * d];
                for (m, part) in self.parts.iter().enumerate() {
                    add_into(&mut out, part, vs[m].components[c]);
                }
                out
            })
            .collect()
    }
}

fn add_into(acc: &mut Matrix, m: &Matrix, s: f64) {
    acc.iter_mut().zip(m).for_each(|(a, b)| *a += b * s);
}

/// Haar-distributed orthonormal basis by Gram–Schmidt on complex Gaussian vectors.
fn random_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<Complex64> =
            (0..d).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
        for b in &basis {
            let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(b).for_each(|(y, x)| *y -= overlap * x);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn projector(u: &[Complex64]) -> Matrix {
    let d = u.len();
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = u[i] * u[j].conj();
        }
    }
    m
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProjectorReport {
    pub d: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub passed: bool,
}

/// Runs `trials` bases (the first is the computational basis) and reports the worst residual.
pub fn verify_projector_identity(d: usize, trials: usize, seed: u64) -> Result<ProjectorReport> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    for trial in 0..trials {
        let basis: Vec<Vec<Complex64>> = if trial == 0 {
            (0..d).map(|i| (0..d).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect()
        } else {
            random_basis(d, &mut rng)
        };
        let projectors: Vec<Matrix> = basis.iter().map(|u| projector(u)).collect();
        let powers: Vec<LabeledOp> = (0..d).map(|j| LabeledOp::power(&projectors, j)).collect();
        for i in 0..d {
            let mut rhs = LabeledOp::zero(d);
            for (j, xj) in powers.iter().enumerate() {
                let label = (d - (j * i) % d) % d;
                let term = xj.compose(label);
                for (acc, part) in rhs.parts.iter_mut().zip(&term.parts) {
                    add_into(acc, part, 1.0 / d as f64);
                }
            }
            let mut lhs = LabeledOp::zero(d);
            lhs.parts[0] = projectors[i].clone();
            for (a, b) in lhs.geometric().iter().zip(rhs.geometric()) {
                for (x, y) in a.iter().zip(&b) {
                    max_residual = max_residual.max((x - y).norm());
                }
            }
        }
    }
    Ok(ProjectorReport { d, trials, max_residual, passed: max_residual < 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn computational_basis_d3() {
        assert!(verify_projector_identity(3, 1, 0).unwrap().passed);
    }

    #[test]
    fn random_bases_d5() {
        let r = verify_projector_identity(5, 10, 7).unwrap();
        assert!(r.passed, "residual {}", r.max_residual);
    }

    #[test]
    fn composite_rejected() {
        assert_eq!(verify_projector_identity(4, 1, 0), Err(Error::NotPrime(4)));
    }
}
