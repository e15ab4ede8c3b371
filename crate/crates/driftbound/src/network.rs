//! Reaction networks as continuous-time Markov chains on `ℕⁿ₀`.
//!
//! A [`ReactionNetwork`] holds species, mass-action reactions and the derived
//! per-reaction [`Transition`]s (state-change vector plus rate law). For the
//! affine part of the network the drift vector `Σ qₖ(x) rₖ` collapses to
//! `A x + B`, exposed as a [`DriftPair`].
//!
//! Rate-law convention: the arrow label of a reaction is a mass-action rate
//! constant, and the propensity is that constant times the product of
//! reactant counts. A homodimerisation `2A -> …` with constant `k` fires at
//! `k·x_A·(x_A − 1)`; no symmetry factor of 1/2 is folded in.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// A chemical species; `index` is its position in the state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

/// A reaction between multisets of species with a positive rate constant.
///
/// Multisets are sparse `(species index, count)` lists, sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    pub rate_constant: f64,
}

impl Reaction {
    /// Builds the reaction with canonical multisets: entries sorted by
    /// species index and duplicates merged.
    pub fn new(
        reactants: Vec<(usize, u32)>,
        products: Vec<(usize, u32)>,
        rate_constant: f64,
    ) -> Self {
        let canonical = |mut ms: Vec<(usize, u32)>| -> Vec<(usize, u32)> {
            ms.sort_unstable_by_key(|&(s, _)| s);
            let mut out: Vec<(usize, u32)> = Vec::with_capacity(ms.len());
            for (s, c) in ms {
                match out.last_mut() {
                    Some((ls, lc)) if *ls == s => *lc += c,
                    _ => out.push((s, c)),
                }
            }
            out
        };
        Self {
            reactants: canonical(reactants),
            products: canonical(products),
            rate_constant,
        }
    }

    /// Total number of reactant molecules (the mass-action order).
    pub fn order(&self) -> u32 {
        self.reactants.iter().map(|&(_, c)| c).sum()
    }
}

/// Mass-action rate law of a single transition.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    /// `q(x) = c`, order 0.
    Constant(f64),
    /// `q(x) = coeff · x[species]`, order 1.
    Linear { species: usize, coeff: f64 },
    /// Order 2: `coeff · x_i · x_j` for `i ≠ j`, or `coeff · x_i (x_i − 1)`
    /// when `i == j`.
    Bimolecular { i: usize, j: usize, coeff: f64 },
}

impl RateLaw {
    pub fn is_affine(&self) -> bool {
        !matches!(self, RateLaw::Bimolecular { .. })
    }

    /// Evaluate the law at a nonnegative state.
    pub fn evaluate(&self, state: &[i64]) -> f64 {
        match *self {
            RateLaw::Constant(c) => c,
            RateLaw::Linear { species, coeff } => coeff * state[species] as f64,
            RateLaw::Bimolecular { i, j, coeff } => {
                if i == j {
                    coeff * state[i] as f64 * (state[i] - 1) as f64
                } else {
                    coeff * state[i] as f64 * state[j] as f64
                }
            }
        }
    }
}

/// A transition of the chain: jump vector `r` and its rate law `q(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub delta: Vec<i64>,
    pub rate: RateLaw,
}

/// The affine drift pair: `Σ_affine qₖ(x) rₖ = A x + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftPair {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("reaction {reaction} references undeclared species index {species}")]
    UnknownSpecies { reaction: usize, species: usize },
    #[error("reaction {0} has zero net state change")]
    ZeroNetChange(usize),
    #[error("reaction {reaction} has mass-action order {order} > 2")]
    OrderTooHigh { reaction: usize, order: u32 },
    #[error("duplicate species name `{0}`")]
    DuplicateName(String),
    #[error("state has negative component at index {0}")]
    NegativeState(usize),
    #[error("network contains order-2 transitions but a strictly affine drift was requested")]
    NonlinearPresent,
}

/// Species list plus reactions, with transitions derived at construction.
///
/// Immutable after construction; cheap to share read-only across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    transitions: Vec<Transition>,
}

/// Build a network, deriving one transition per reaction.
///
/// `r = products − reactants`; the rate law follows the mass-action order of
/// the reactant multiset (order 0 constant, order 1 linear, order 2
/// bimolecular).
pub fn build_network(
    species_names: &[&str],
    reactions: Vec<Reaction>,
) -> Result<ReactionNetwork, NetworkError> {
    let mut species = Vec::with_capacity(species_names.len());
    for (index, name) in species_names.iter().enumerate() {
        if species.iter().any(|s: &Species| s.name == *name) {
            return Err(NetworkError::DuplicateName(name.to_string()));
        }
        species.push(Species {
            name: name.to_string(),
            index,
        });
    }
    let n = species.len();

    let mut transitions = Vec::with_capacity(reactions.len());
    for (ridx, reaction) in reactions.iter().enumerate() {
        for &(s, _) in reaction.reactants.iter().chain(reaction.products.iter()) {
            if s >= n {
                return Err(NetworkError::UnknownSpecies {
                    reaction: ridx,
                    species: s,
                });
            }
        }
        let order = reaction.order();
        if order > 2 {
            return Err(NetworkError::OrderTooHigh {
                reaction: ridx,
                order,
            });
        }

        let mut delta = vec![0i64; n];
        for &(s, c) in &reaction.reactants {
            delta[s] -= c as i64;
        }
        for &(s, c) in &reaction.products {
            delta[s] += c as i64;
        }
        if delta.iter().all(|&d| d == 0) {
            return Err(NetworkError::ZeroNetChange(ridx));
        }

        let k = reaction.rate_constant;
        let rate = match order {
            0 => RateLaw::Constant(k),
            1 => {
                let species = reaction.reactants[0].0;
                RateLaw::Linear { species, coeff: k }
            }
            2 => {
                if reaction.reactants.len() == 1 {
                    let i = reaction.reactants[0].0;
                    RateLaw::Bimolecular { i, j: i, coeff: k }
                } else {
                    let i = reaction.reactants[0].0;
                    let j = reaction.reactants[1].0;
                    RateLaw::Bimolecular { i, j, coeff: k }
                }
            }
            _ => unreachable!(),
        };
        transitions.push(Transition { delta, rate });
    }

    Ok(ReactionNetwork {
        species,
        reactions,
        transitions,
    })
}

impl ReactionNetwork {
    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Number of species (state dimension).
    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Split transition indices into (affine, order-2) sets.
    ///
    /// The partition is exhaustive and disjoint.
    pub fn classify_rates(&self) -> (Vec<usize>, Vec<usize>) {
        let mut affine = Vec::new();
        let mut nonlinear = Vec::new();
        for (k, t) in self.transitions.iter().enumerate() {
            if t.rate.is_affine() {
                affine.push(k);
            } else {
                nonlinear.push(k);
            }
        }
        (affine, nonlinear)
    }

    /// Drift pair of the affine transitions: `A = Σ rₖ aₖᵀ`, `B = Σ rₖ cₖ`.
    ///
    /// Order-2 transitions are skipped; `strict` demands there are none.
    pub fn drift_matrices(&self, strict: bool) -> Result<DriftPair, NetworkError> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for t in &self.transitions {
            match t.rate {
                RateLaw::Constant(c) => {
                    for i in 0..n {
                        b[i] += c * t.delta[i] as f64;
                    }
                }
                RateLaw::Linear { species, coeff } => {
                    for i in 0..n {
                        a[(i, species)] += coeff * t.delta[i] as f64;
                    }
                }
                RateLaw::Bimolecular { .. } => {
                    if strict {
                        return Err(NetworkError::NonlinearPresent);
                    }
                }
            }
        }
        Ok(DriftPair { a, b })
    }

    /// Propensity vector `q(x)` at a componentwise-nonnegative state.
    pub fn propensity(&self, state: &[i64]) -> Result<Vec<f64>, NetworkError> {
        if let Some(i) = state.iter().position(|&x| x < 0) {
            return Err(NetworkError::NegativeState(i));
        }
        Ok(self
            .transitions
            .iter()
            .map(|t| t.rate.evaluate(state))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testnet::{gene, lin3, nonlin3};
    use approx::assert_relative_eq;

    #[test]
    fn gene_transitions_and_rates() {
        let net = gene();
        assert_eq!(net.transitions().len(), 4);
        // At (m, p) = (3, 7) the rates are (100, m, m, 0.1 p).
        let q = net.propensity(&[3, 7]).unwrap();
        assert_eq!(q, vec![100.0, 3.0, 3.0, 0.1 * 7.0]);
        assert_eq!(net.transitions()[2].delta, vec![0, 1]);
    }

    #[test]
    fn empty_reaction_list() {
        let net = build_network(&["A"], vec![]).unwrap();
        assert!(net.transitions().is_empty());
        let d = net.drift_matrices(true).unwrap();
        assert!(d.a.iter().all(|&v| v == 0.0));
        assert!(d.b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_three_rejected() {
        let err = build_network(
            &["A", "B"],
            vec![Reaction::new(vec![(0, 3)], vec![(1, 1)], 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::OrderTooHigh { order: 3, .. }));
    }

    #[test]
    fn zero_net_change_rejected() {
        let err = build_network(&["A"], vec![Reaction::new(vec![(0, 1)], vec![(0, 1)], 1.0)])
            .unwrap_err();
        assert!(matches!(err, NetworkError::ZeroNetChange(0)));
    }

    #[test]
    fn unknown_species_rejected() {
        let err =
            build_network(&["A"], vec![Reaction::new(vec![(1, 1)], vec![], 1.0)]).unwrap_err();
        assert!(matches!(
            err,
            NetworkError::UnknownSpecies { species: 1, .. }
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = build_network(&["A", "A"], vec![]).unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateName(_)));
    }

    #[test]
    fn classify_gene_all_affine() {
        let (aff, non) = gene().classify_rates();
        assert_eq!(aff.len(), 4);
        assert!(non.is_empty());
    }

    #[test]
    fn classify_nonlin3() {
        let net = nonlin3(1.0);
        let (aff, non) = net.classify_rates();
        assert_eq!((aff.len(), non.len()), (5, 1));
        assert_eq!(net.transitions()[non[0]].delta, vec![-1, -1, 1]);
    }

    #[test]
    fn classify_single_bimolecular() {
        let net = build_network(
            &["A", "B", "C"],
            vec![Reaction::new(vec![(0, 1), (1, 1)], vec![(2, 1)], 1.0)],
        )
        .unwrap();
        let (aff, non) = net.classify_rates();
        assert_eq!((aff.len(), non.len()), (0, 1));
    }

    #[test]
    fn gene_drift_matrices() {
        let d = gene().drift_matrices(true).unwrap();
        let expect_a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, -0.1]);
        assert_eq!(d.a, expect_a);
        assert_eq!(d.b, DVector::from_row_slice(&[100.0, 0.0]));
    }

    #[test]
    fn lin3_drift_and_fixed_point() {
        let d = lin3().drift_matrices(true).unwrap();
        let expect_a = DMatrix::from_row_slice(
            3,
            3,
            &[-10.1, 0.0, 30.0, 10.0, -20.1, 0.0, 0.0, 20.0, -30.1],
        );
        assert_eq!(d.a, expect_a);
        assert_eq!(d.b, DVector::from_row_slice(&[10.0, 0.0, 0.0]));
        // Fixed point -A^{-1}B matches the hand linear solve.
        let x = d.a.clone().lu().solve(&(-&d.b)).unwrap();
        assert_relative_eq!(x[0], 54.7016, epsilon = 1e-3);
        assert_relative_eq!(x[1], 27.2147, epsilon = 1e-3);
        assert_relative_eq!(x[2], 18.0829, epsilon = 1e-3);
    }

    #[test]
    fn drift_strict_rejects_bimolecular() {
        let err = nonlin3(1.0).drift_matrices(true).unwrap_err();
        assert_eq!(err, NetworkError::NonlinearPresent);
    }

    #[test]
    fn nonlin3_bimolecular_propensity() {
        let q = nonlin3(1.0).propensity(&[2, 3, 1]).unwrap();
        assert_eq!(q[4], 6.0);
    }

    #[test]
    fn propensity_rejects_negative_state() {
        let err = gene().propensity(&[1, -1]).unwrap_err();
        assert_eq!(err, NetworkError::NegativeState(1));
    }

    #[test]
    fn homodimer_rate_law() {
        let net = build_network(&["A"], vec![Reaction::new(vec![(0, 2)], vec![], 3.0)]).unwrap();
        // 3 * x (x-1): zero at x in {0, 1}, 18 at x = 3.
        assert_eq!(net.propensity(&[0]).unwrap()[0], 0.0);
        assert_eq!(net.propensity(&[1]).unwrap()[0], 0.0);
        assert_eq!(net.propensity(&[3]).unwrap()[0], 18.0);
    }

    /// The affine drift identity Σ qₖ(x) rₖ = A x + B holds exactly at
    /// integer states (all quantities are dyadic-exact here).
    #[test]
    fn drift_identity_random_states() {
        let nets = [gene(), lin3()];
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            rng_state
        };
        for net in &nets {
            let d = net.drift_matrices(true).unwrap();
            let n = net.dim();
            for _ in 0..10_000 {
                let state: Vec<i64> = (0..n).map(|_| (next() % 2000) as i64).collect();
                let q = net.propensity(&state).unwrap();
                let mut drift = vec![0.0; n];
                for (k, t) in net.transitions().iter().enumerate() {
                    for (di, &delta) in drift.iter_mut().zip(&t.delta) {
                        *di += q[k] * delta as f64;
                    }
                }
                let xf = DVector::from_iterator(n, state.iter().map(|&v| v as f64));
                let lin = &d.a * &xf + &d.b;
                for i in 0..n {
                    assert_relative_eq!(drift[i], lin[i], max_relative = 1e-12, epsilon = 1e-9);
                }
            }
        }
    }
}
