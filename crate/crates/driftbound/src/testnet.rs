//! Shared unit-test fixtures.

use crate::network::{build_network, Reaction, ReactionNetwork};

/// Gene expression model: 0 -> M @ 100, M -> 0 @ 1, M -> M + P @ 1, P -> 0 @ 0.1.
pub fn gene() -> ReactionNetwork {
    build_network(
        &["M", "P"],
        vec![
            Reaction::new(vec![], vec![(0, 1)], 100.0),
            Reaction::new(vec![(0, 1)], vec![], 1.0),
            Reaction::new(vec![(0, 1)], vec![(0, 1), (1, 1)], 1.0),
            Reaction::new(vec![(1, 1)], vec![], 0.1),
        ],
    )
    .unwrap()
}

/// Three-species linear chain with recycle.
pub fn lin3() -> ReactionNetwork {
    build_network(
        &["x1", "x2", "x3"],
        vec![
            Reaction::new(vec![], vec![(0, 1)], 10.0),
            Reaction::new(vec![(0, 1)], vec![], 0.1),
            Reaction::new(vec![(0, 1)], vec![(1, 1)], 10.0),
            Reaction::new(vec![(1, 1)], vec![], 0.1),
            Reaction::new(vec![(1, 1)], vec![(2, 1)], 20.0),
            Reaction::new(vec![(2, 1)], vec![], 0.1),
            Reaction::new(vec![(2, 1)], vec![(0, 1)], 30.0),
        ],
    )
    .unwrap()
}

/// Three species with one bimolecular association s1 + s2 -> s3.
pub fn nonlin3(bimolecular_rate: f64) -> ReactionNetwork {
    build_network(
        &["s1", "s2", "s3"],
        vec![
            Reaction::new(vec![], vec![(0, 1)], 10.0),
            Reaction::new(vec![(0, 1)], vec![], 1.0),
            Reaction::new(vec![], vec![(1, 1)], 10.0),
            Reaction::new(vec![(1, 1)], vec![], 1.0),
            Reaction::new(vec![(0, 1), (1, 1)], vec![(2, 1)], bimolecular_rate),
            Reaction::new(vec![(2, 1)], vec![], 1.0),
        ],
    )
    .unwrap()
}

/// One-species birth-death: stationary law Poisson(birth/death).
pub fn birth_death(birth: f64, death: f64) -> ReactionNetwork {
    build_network(
        &["M"],
        vec![
            Reaction::new(vec![], vec![(0, 1)], birth),
            Reaction::new(vec![(0, 1)], vec![], death),
        ],
    )
    .unwrap()
}

/// Pure birth with no removal; transient, no Lyapunov certificate exists.
pub fn pure_birth() -> ReactionNetwork {
    build_network(&["S"], vec![Reaction::new(vec![], vec![(0, 1)], 10.0)]).unwrap()
}
