//! Quadratic stochastic Lyapunov certificates for reaction-network CTMCs.
//!
//! Given a continuous-time Markov chain with affine (plus optionally a few
//! bimolecular) mass-action transition rates, this crate synthesises
//! quadratic Lyapunov functions by semidefinite programming and turns them
//! into ergodicity certificates, stationary level sets with guaranteed
//! probability mass, and upper bounds on stationary moments. A built-in
//! Gillespie simulator serves as the independent verification oracle.
//!
//! Modules:
//! - [`network`]: reaction networks, transition vectors, affine drift pairs
//! - [`dsl`]: the line-oriented model text format
//! - [`quad`]: generator algebra on quadratic forms, PSD embeddings,
//!   S-procedure templates, level-set geometry
//! - [`sdp`]: a dense primal-dual interior-point solver for small SDPs
//! - [`analysis`]: the Lyapunov level-set and moment programs, certificates,
//!   shifted level sets and ergodicity reports
//! - [`ssa`]: exact stochastic simulation with batch-means statistics
//!
//! ```
//! use driftbound::{
//!     parse_model, probability_bound, shift_for_mass, solve_levelset_problem,
//!     solve_moment_problem, AnalysisOptions, QuadraticForm, RegionD,
//! };
//!
//! let network = parse_model(
//!     "species M P\n\
//!      reaction 0 -> M @ 100\n\
//!      reaction M -> 0 @ 1\n\
//!      reaction M -> M + P @ 1\n\
//!      reaction P -> 0 @ 0.1\n",
//! )?;
//! let options = AnalysisOptions::default();
//!
//! // Ergodicity certificate and the refuge-set probability bound.
//! let region = RegionD::ball(&[100.0, 1000.0], 1e5);
//! let cert = solve_levelset_problem(&network, &region, &options)?;
//! assert!(cert.b_prime >= 0.0 && probability_bound(&cert) > 0.999);
//!
//! // An ellipsoid guaranteed to hold 80% of the stationary mass.
//! let set = shift_for_mass(&cert, 0.2)?;
//! assert!(set.set.unwrap().contains(&nalgebra::dvector![100.0, 1000.0]));
//!
//! // A stationary moment bound: E_pi[m] <= 100 for the mRNA count.
//! let bound = solve_moment_problem(&network, &QuadraticForm::mean(2, 0), &options)?;
//! assert!((bound.bound - 100.0).abs() < 0.1);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod dsl;
pub mod network;
pub mod quad;
pub mod sdp;
pub mod ssa;

#[cfg(test)]
pub(crate) mod testnet;

pub use analysis::{
    ergodicity_certificate, nonlinear_constraints, probability_bound, shift_for_mass,
    solve_levelset_problem, solve_moment_problem, AnalysisError, AnalysisOptions, ErgodicityReport,
    LyapunovCertificate, MassLevelSet, MomentBound, RegionD,
};
pub use dsl::{parse_model, serialize_model, ModelDocument, ParseError, ParseErrorKind};
pub use network::{
    build_network, DriftPair, NetworkError, RateLaw, Reaction, ReactionNetwork, Species, Transition,
};
pub use quad::{
    apply_generator, evaluate_direct, level_set_ellipsoid, psd_embedding, s_procedure_combine,
    Ellipsoid, LevelSet, LyapunovSpec, QuadError, QuadraticForm,
};
pub use sdp::{check_solution, solve, SdpError, SdpProblem, SdpSolution, SdpStatus, SolveOptions};
pub use ssa::{
    empirical_mass, empirical_moments, simulate, MomentEstimate, SampleSet, SimulationConfig,
    SsaError,
};
