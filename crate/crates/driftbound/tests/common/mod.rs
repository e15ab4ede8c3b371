//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use driftbound::{parse_model, ReactionNetwork};
use nalgebra::{DMatrix, DVector};

pub const GENE: &str = "species M P\n\
                        reaction 0 -> M @ 100\n\
                        reaction M -> 0 @ 1\n\
                        reaction M -> M + P @ 1\n\
                        reaction P -> 0 @ 0.1\n";

pub const LIN3: &str = "species x1 x2 x3\n\
                        reaction 0 -> x1 @ 10\n\
                        reaction x1 -> 0 @ 0.1\n\
                        reaction x1 -> x2 @ 10\n\
                        reaction x2 -> 0 @ 0.1\n\
                        reaction x2 -> x3 @ 20\n\
                        reaction x3 -> 0 @ 0.1\n\
                        reaction x3 -> x1 @ 30\n";

pub const NONLIN3: &str = "species s1 s2 s3\n\
                           reaction 0 -> s1 @ 10\n\
                           reaction s1 -> 0 @ 1\n\
                           reaction 0 -> s2 @ 10\n\
                           reaction s2 -> 0 @ 1\n\
                           reaction s1 + s2 -> s3 @ 1\n\
                           reaction s3 -> 0 @ 1\n";

pub const BIRTH_DEATH: &str = "species M\n\
                               reaction 0 -> M @ 100\n\
                               reaction M -> 0 @ 1\n";

pub fn gene() -> ReactionNetwork {
    parse_model(GENE).unwrap()
}

pub fn lin3() -> ReactionNetwork {
    parse_model(LIN3).unwrap()
}

pub fn nonlin3() -> ReactionNetwork {
    parse_model(NONLIN3).unwrap()
}

pub fn birth_death() -> ReactionNetwork {
    parse_model(BIRTH_DEATH).unwrap()
}

/// Exact stationary means and covariance of an affine-rate network.
///
/// For affine propensities the moment equations close: the mean is the
/// drift fixed point `x̄ = −A⁻¹B` and the covariance solves the Lyapunov
/// equation `A C + C Aᵀ + D(x̄) = 0` with `D(x̄) = Σₖ qₖ(x̄) rₖrₖᵀ`. This is
/// the independent oracle for the Table values: `E[xᵢxⱼ] = Cᵢⱼ + x̄ᵢx̄ⱼ`.
pub struct ExactMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl ExactMoments {
    pub fn of(network: &ReactionNetwork) -> Self {
        let n = network.dim();
        let drift = network.drift_matrices(true).expect("affine network");
        let mean = drift
            .a
            .clone()
            .lu()
            .solve(&(-&drift.b))
            .expect("A invertible");
        let state: Vec<i64> = mean.iter().map(|&v| v.round() as i64).collect();
        // Evaluate q at the (real-valued) fixed point through the rate laws.
        let mut diffusion = DMatrix::zeros(n, n);
        for tr in network.transitions() {
            let q = match tr.rate {
                driftbound::RateLaw::Constant(c) => c,
                driftbound::RateLaw::Linear { species, coeff } => coeff * mean[species],
                driftbound::RateLaw::Bimolecular { .. } => panic!("affine only"),
            };
            let rv = DVector::from_iterator(n, tr.delta.iter().map(|&d| d as f64));
            diffusion += &rv * rv.transpose() * q;
        }
        let _ = state;
        // Vectorised Lyapunov solve A C + C Aᵀ = −D.
        let m = n * n;
        let mut big = DMatrix::zeros(m, m);
        for a in 0..n {
            for b in 0..n {
                let row = a * n + b;
                for c in 0..n {
                    big[(row, c * n + b)] += drift.a[(a, c)];
                    big[(row, a * n + c)] += drift.a[(b, c)];
                }
            }
        }
        let rhs = DVector::from_fn(m, |k, _| -diffusion[(k / n, k % n)]);
        let v = big.lu().solve(&rhs).expect("Lyapunov solvable");
        let cov = DMatrix::from_fn(n, n, |a, b| v[a * n + b]);
        Self { mean, cov }
    }

    pub fn second_moment(&self, i: usize, j: usize) -> f64 {
        self.cov[(i, j)] + self.mean[i] * self.mean[j]
    }
}
