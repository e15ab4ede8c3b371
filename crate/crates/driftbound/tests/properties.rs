//! Randomised property suites for the parser, the generator algebra and
//! the geometry helpers.

mod common;

use driftbound::{
    apply_generator, evaluate_direct, level_set_ellipsoid, parse_model, psd_embedding,
    serialize_model, LevelSet, LyapunovSpec, QuadraticForm, Reaction, ReactionNetwork,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn species_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i}")).collect()
}

/// Random mass-action network: up to 6 species, up to 12 order-<=2
/// reactions with a nonzero net change each.
fn arb_network() -> impl Strategy<Value = ReactionNetwork> {
    (1usize..=6).prop_flat_map(|n| {
        let reaction = (
            proptest::collection::vec((0..n, 1u32..=2), 0..=2),
            proptest::collection::vec((0..n, 1u32..=2), 0..=2),
            1u32..=4,
            -3i32..=3,
        )
            .prop_filter_map(
                "order <= 2, nonzero change",
                move |(reactants, products, mant, exp)| {
                    let mut reactant_counts = vec![0i64; n];
                    for &(s, c) in &reactants {
                        reactant_counts[s] += c as i64;
                    }
                    if reactant_counts.iter().sum::<i64>() > 2 {
                        return None;
                    }
                    let mut delta = reactant_counts.iter().map(|&c| -c).collect::<Vec<_>>();
                    for &(s, c) in &products {
                        delta[s] += c as i64;
                    }
                    if delta.iter().all(|&d| d == 0) {
                        return None;
                    }
                    if reactants.is_empty() && products.is_empty() {
                        return None;
                    }
                    let rate = mant as f64 * 10f64.powi(exp);
                    Some(Reaction::new(reactants, products, rate))
                },
            );
        proptest::collection::vec(reaction, 1..=12).prop_map(move |reactions| {
            let names = species_names(n);
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            driftbound::build_network(&refs, reactions).expect("validated above")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// parse(serialize(n)) == n for generated networks.
    #[test]
    fn parser_round_trip(net in arb_network()) {
        let text = serialize_model(&net);
        let back = parse_model(&text).expect("serialised model parses");
        prop_assert_eq!(back, net);
    }

    /// The rate-law partition is exhaustive and propensities stay
    /// nonnegative over the orthant.
    #[test]
    fn partition_and_propensity(net in arb_network(), raw in proptest::collection::vec(0i64..500, 6)) {
        let (affine, nonlinear) = net.classify_rates();
        prop_assert_eq!(affine.len() + nonlinear.len(), net.transitions().len());
        let state: Vec<i64> = raw.into_iter().take(net.dim()).collect();
        if state.len() == net.dim() {
            let q = net.propensity(&state).expect("state is nonnegative");
            prop_assert!(q.iter().all(|&v| v >= 0.0));
        }
    }

    /// The affine drift identity holds exactly at integer states.
    #[test]
    fn affine_drift_identity(net in arb_network(), raw in proptest::collection::vec(0i64..300, 6)) {
        let (_, nonlinear) = net.classify_rates();
        prop_assume!(nonlinear.is_empty());
        let n = net.dim();
        let state: Vec<i64> = raw.into_iter().take(n).collect();
        prop_assume!(state.len() == n);
        let drift = net.drift_matrices(true).expect("affine");
        let q = net.propensity(&state).expect("nonnegative");
        let x = DVector::from_iterator(n, state.iter().map(|&v| v as f64));
        let lin = &drift.a * &x + &drift.b;
        for i in 0..n {
            let direct: f64 = net
                .transitions()
                .iter()
                .zip(&q)
                .map(|(t, &qk)| qk * t.delta[i] as f64)
                .sum();
            prop_assert!((direct - lin[i]).abs() <= 1e-9 * (1.0 + direct.abs()));
        }
    }

    /// Symbolic drift equals the direct generator sum on affine networks.
    #[test]
    fn generator_oracle_equivalence(
        net in arb_network(),
        seed in proptest::array::uniform16(-1.0f64..1.0),
        states in proptest::collection::vec(proptest::collection::vec(0i64..200, 6), 8),
    ) {
        let (_, nonlinear) = net.classify_rates();
        prop_assume!(nonlinear.is_empty());
        let n = net.dim();
        let a = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % 16]);
        let r = &a * a.transpose() * 1e-4;
        let y0 = DVector::from_fn(n, |i, _| seed[(7 * i + 3) % 16] * 1e-3);
        let spec = LyapunovSpec::from_r_y0(r, y0);
        let qv = apply_generator(&net, &spec).expect("affine network");
        for raw in &states {
            let state: Vec<i64> = raw.iter().copied().take(n).collect();
            if state.len() < n {
                continue;
            }
            let direct = evaluate_direct(&net, &spec, &state).expect("nonnegative");
            let sym = qv.eval_state(&state);
            prop_assert!(
                (direct - sym).abs() <= 1e-9 * (1.0 + direct.abs()),
                "state {:?}: {} vs {}", state, direct, sym
            );
        }
    }

    /// PSD embedding soundness: a PSD embedding means f is (numerically)
    /// nonnegative everywhere; a clearly indefinite embedding yields an
    /// explicit witness with f(x) < 0 by eigenvector descent.
    #[test]
    fn embedding_soundness(
        entries in proptest::collection::vec(-2.0f64..2.0, 10),
        points in proptest::collection::vec(-30.0f64..30.0, 24),
    ) {
        let n = 3usize;
        let mut t = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                t[(i, j)] = entries[k];
                t[(j, i)] = entries[k];
                k += 1;
            }
        }
        let u = DVector::from_row_slice(&entries[6..9]);
        let beta = entries[9];
        let f = QuadraticForm::new(t, u, beta);
        let m = psd_embedding(&f);
        let eig = m.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);

        if lmin >= 0.0 {
            for chunk in points.chunks(n) {
                let x = DVector::from_row_slice(chunk);
                prop_assert!(f.eval(&x) >= -1e-9 * (1.0 + x.norm_squared()));
            }
        } else if lmin < -1e-3 {
            // Witness from the most negative eigenvector (w, t): for t away
            // from zero use x = w/t, otherwise descend along w.
            let idx = (0..eig.eigenvalues.len())
                .min_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
                .unwrap();
            let v = eig.eigenvectors.column(idx);
            let (w, tail) = (v.rows(0, n).clone_owned(), v[n]);
            let witness = if tail.abs() > 1e-6 {
                &w / tail
            } else {
                &w * 1e6
            };
            prop_assert!(
                f.eval(&witness) < 0.0,
                "lmin = {}, witness value {}", lmin, f.eval(&witness)
            );
        }
    }

    /// Level-set membership coincides with the quadratic's value.
    #[test]
    fn level_set_membership(
        diag in proptest::collection::vec(0.1f64..4.0, 2),
        cross in -0.05f64..0.05,
        u in proptest::collection::vec(-2.0f64..2.0, 2),
        beta in -5.0f64..5.0,
        c in -20.0f64..0.0,
        points in proptest::collection::vec(-15.0f64..15.0, 30),
    ) {
        let t = DMatrix::from_row_slice(2, 2, &[-diag[0], cross, cross, -diag[1]]);
        let qv = QuadraticForm::new(t, DVector::from_row_slice(&u), beta);
        match level_set_ellipsoid(&qv, c) {
            Ok(LevelSet::Ellipsoid(e)) => {
                for chunk in points.chunks(2) {
                    let x = DVector::from_row_slice(chunk);
                    let val = qv.eval(&x);
                    if (val - c).abs() > 1e-7 * (1.0 + val.abs()) {
                        prop_assert_eq!(e.contains(&x), val >= c);
                    }
                }
            }
            Ok(LevelSet::Empty) => {
                for chunk in points.chunks(2) {
                    let x = DVector::from_row_slice(chunk);
                    prop_assert!(qv.eval(&x) < c + 1e-9);
                }
            }
            other => prop_assert!(false, "unexpected classification {:?}", other),
        }
    }

    /// Parse errors always point at a real position in the input.
    #[test]
    fn parse_error_positions_are_real(lines in proptest::collection::vec("[ -~]{0,30}", 1..8)) {
        let text = lines.join("\n");
        if let Err(e) = parse_model(&text) {
            prop_assert!(e.line >= 1 && e.line <= lines.len());
            let line = &lines[e.line - 1];
            prop_assert!(e.column >= 1 && e.column <= line.len().max(1));
        }
    }
}

/// Empirical mass is nonincreasing in the threshold (deterministic core of
/// the property; the SSA layer is exercised in its own tests).
#[test]
fn empirical_mass_monotone_in_threshold() {
    let net = common::gene();
    let cfg = driftbound::SimulationConfig {
        seed: 17,
        burn_in: 20.0,
        samples: 4000,
        dt: 1.0,
        trajectories: 4,
        initial_state: Vec::new(),
    };
    let samples = driftbound::simulate(&net, &cfg).unwrap();
    let qv = QuadraticForm::new(
        -DMatrix::identity(2, 2),
        DVector::from_row_slice(&[100.0, 1000.0]),
        0.0,
    );
    let mut last = 1.0;
    for threshold in [-1e7, -1e6, -1e5, -1e4, 0.0, 1e4] {
        let m = driftbound::empirical_mass(&samples, &qv, threshold).unwrap();
        assert!(m <= last + 1e-12);
        last = m;
    }
}
