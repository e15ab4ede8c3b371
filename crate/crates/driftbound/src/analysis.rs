//! Lyapunov certificate synthesis: the level-set and moment SDPs, shifted
//! level sets with guaranteed stationary mass, and ergodicity reports.
//!
//! The level-set program searches the cone of quadratic candidates
//! `V(x) = xᵀRx − 2y₀ᵀx`, `R ⪰ 0`, for the one whose drift ceiling
//! `b′ = sup_x QV(x)` is minimal. Certificates are scale-covariant (any
//! positive multiple of `(R, y₀)` certifies the same sets), so the search
//! is normalised by `tr(R) = 1` and the result reported at a small
//! canonical scale (`trace_scale`), which keeps `b = 1 + b′` essentially 1
//! and the set-probability bound `π(C) ≥ 1/b` near its tightest. A
//! compact region `D` rules out the trivial `V ≡ 0` through an S-procedure
//! block (`QV ≤ 0` outside `D`); its inhomogeneous margin (`QV ≤ −m`
//! outside `D`) is maximised in a second pass and stored with the
//! certificate. Order-2 transitions are eliminated exactly through
//! `R r_b = 0` and `y₀ᵀr_b = 0`, which keeps the drift quadratic and
//! independent of the bimolecular rate constants.

use crate::network::{RateLaw, ReactionNetwork};
use crate::quad::{
    apply_generator, level_set_ellipsoid, min_eigenvalue, psd_embedding, Ellipsoid, LevelSet,
    LyapunovSpec, QuadError, QuadraticForm,
};
use crate::sdp::{self, SdpError, SdpProblem, SdpSolution, SdpStatus, SolveOptions};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no quadratic Lyapunov certificate found (SDP infeasible)")]
    Infeasible,
    #[error("SDP solver failed to converge ({0})")]
    NumericalFailure(String),
    #[error(
        "order-2 transition {index} has componentwise nonnegative change vector {vector:?}; \
         no lower-bounded quadratic certificate can eliminate it"
    )]
    CertificationImpossible { index: usize, vector: Vec<i64> },
    #[error("moment function has unsupported degree {0} (max 2)")]
    UnsupportedDegree(u32),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("shifted level set is empty")]
    EmptySet,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// How a box region enters the S-procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxMode {
    /// One multiplier on the enclosing ball (default; one certificate).
    #[default]
    EnclosingBall,
    /// One multiplier and one LMI block per quadratic face pair.
    FacePairs,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub scaling: bool,
    /// Canonical trace of the reported certificate; the solve itself runs
    /// at unit trace and is scaled afterwards (exactly, by homogeneity).
    pub trace_scale: f64,
    pub box_mode: BoxMode,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            scaling: true,
            trace_scale: 1e-12,
            box_mode: BoxMode::EnclosingBall,
        }
    }
}

/// Solve with a deterministic accuracy ladder: some degenerate instances
/// (large optimal faces, rank-deficient optima) bottom out above the
/// requested tolerance, in which case the solve is repeated at the next
/// rung so that an `Optimal` status always means its reported tolerance.
/// Returns the solution and the tolerance it was obtained at.
fn solve_with_ladder(
    problem: &SdpProblem,
    options: &AnalysisOptions,
) -> Result<(SdpSolution, f64), AnalysisError> {
    dump_problem(problem);
    let mut tols = vec![options.tolerance];
    for t in [1e-6, 1e-4] {
        if t > options.tolerance {
            tols.push(t);
        }
    }
    let mut last = None;
    for tol in tols {
        let sol = sdp::solve(
            problem,
            &SolveOptions {
                tolerance: tol,
                max_iterations: options.max_iterations,
                scaling: options.scaling,
            },
        )?;
        match sol.status {
            SdpStatus::NumericalFailure => last = Some((sol, tol)),
            _ => return Ok((sol, tol)),
        }
    }
    Ok(last.expect("ladder ran at least once"))
}

/// With `DRIFTBOUND_DUMP_SDP=<dir>` set, every assembled problem is written
/// there as JSON (variable names, row-major block matrices, equalities) for
/// diffing against external solvers.
fn dump_problem(problem: &SdpProblem) {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let Ok(dir) = std::env::var("DRIFTBOUND_DUMP_SDP") else {
        return;
    };
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::path::Path::new(&dir).join(format!("sdp-{k:04}.json"));
    if let Ok(text) = serde_json::to_string_pretty(&problem.to_json()) {
        let _ = std::fs::write(path, text);
    }
}

/// Compact region `D` used to exclude the trivial solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionD {
    Ball { center: Vec<f64>, radius2: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl RegionD {
    pub fn ball(center: &[f64], radius2: f64) -> Self {
        RegionD::Ball {
            center: center.to_vec(),
            radius2,
        }
    }

    pub fn box_region(lower: &[f64], upper: &[f64]) -> Self {
        RegionD::Box {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }
    }

    /// Default region: a ball at the deterministic fixed point `−A⁻¹B` with
    /// `radius² = 10‖center‖²`; results are insensitive to this choice.
    pub fn default_for(network: &ReactionNetwork) -> Self {
        let n = network.dim();
        let drift = network
            .drift_matrices(false)
            .expect("non-strict drift cannot fail");
        let center = drift
            .a
            .clone()
            .lu()
            .solve(&(-&drift.b))
            .unwrap_or_else(|| DVector::zeros(n));
        let norm2 = center.norm_squared();
        let radius2 = if norm2 > 0.0 { 10.0 * norm2 } else { 1e6 };
        RegionD::Ball {
            center: center.iter().cloned().collect(),
            radius2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionD::Ball { center, .. } => center.len(),
            RegionD::Box { lower, .. } => lower.len(),
        }
    }

    /// Quadratics `g` with `D = {x : g(x) ≤ 0}` (every `g ≤ 0` for a box).
    pub fn quadratics(&self, mode: BoxMode) -> Vec<QuadraticForm> {
        match self {
            RegionD::Ball { center, radius2 } => {
                let n = center.len();
                let c = DVector::from_row_slice(center);
                vec![QuadraticForm::new(
                    DMatrix::identity(n, n),
                    -c.clone(),
                    c.norm_squared() - radius2,
                )]
            }
            RegionD::Box { lower, upper } => match mode {
                BoxMode::EnclosingBall => {
                    let n = lower.len();
                    let c = DVector::from_iterator(
                        n,
                        lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)),
                    );
                    let r2: f64 = lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| (0.5 * (u - l)).powi(2))
                        .sum();
                    vec![QuadraticForm::new(
                        DMatrix::identity(n, n),
                        -c.clone(),
                        c.norm_squared() - r2,
                    )]
                }
                BoxMode::FacePairs => {
                    let n = lower.len();
                    (0..n)
                        .map(|i| {
                            let mut t = DMatrix::zeros(n, n);
                            t[(i, i)] = 1.0;
                            let mut u = DVector::zeros(n);
                            u[i] = -0.5 * (lower[i] + upper[i]);
                            QuadraticForm::new(t, u, lower[i] * upper[i])
                        })
                        .collect()
                }
            },
        }
    }
}

/// One eliminated order-2 transition: `R r_b = 0` and `y₀ᵀ r_b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearElimination {
    pub transition: usize,
    pub vector: Vec<i64>,
}

/// Equality constraints eliminating order-2 transitions from the drift.
///
/// Rejects any change vector with all components nonnegative: such a
/// direction lies inside the positive orthant and a `V` constant along it
/// cannot be radially unbounded there.
pub fn nonlinear_constraints(
    network: &ReactionNetwork,
) -> Result<Vec<NonlinearElimination>, AnalysisError> {
    let (_, nonlinear) = network.classify_rates();
    let mut out = Vec::with_capacity(nonlinear.len());
    for k in nonlinear {
        let delta = network.transitions()[k].delta.clone();
        if delta.iter().all(|&d| d >= 0) {
            return Err(AnalysisError::CertificationImpossible {
                index: k,
                vector: delta,
            });
        }
        out.push(NonlinearElimination {
            transition: k,
            vector: delta,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: SdpStatus,
    pub iterations: usize,
    pub duality_gap: f64,
    pub equality_residual: f64,
    pub min_block_eig: f64,
    /// Residuals recomputed from scratch by [`sdp::check_solution`],
    /// independent of the solver's own bookkeeping.
    pub check_min_block_eig: f64,
    pub check_equality_residual: f64,
    pub check_duality_gap: f64,
}

impl SolverStats {
    fn from_checked(sol: &SdpSolution, problem: &SdpProblem) -> Self {
        let report = sdp::check_solution(problem, sol);
        Self {
            status: sol.status,
            iterations: sol.iterations,
            duality_gap: sol.residuals.duality_gap,
            equality_residual: sol.residuals.equality_residual,
            min_block_eig: sol
                .residuals
                .block_min_eig
                .iter()
                .cloned()
                .fold(0.0, f64::min),
            check_min_block_eig: report.block_min_eig.iter().cloned().fold(0.0, f64::min),
            check_equality_residual: report.equality_residual,
            check_duality_gap: report.duality_gap,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub solver: f64,
    pub psd: f64,
    pub equality: f64,
}

/// A solved Lyapunov function with its drift ceiling and region data.
#[derive(Debug, Clone)]
pub struct LyapunovCertificate {
    pub species: Vec<String>,
    pub spec: LyapunovSpec,
    /// Global drift ceiling `b′ = sup_x QV(x)` at the certificate scale.
    pub b_prime: f64,
    pub region: RegionD,
    /// S-procedure multipliers, one per region quadratic; empty when the
    /// region constraint could not be satisfied.
    pub lambda: Vec<f64>,
    /// Certified margin `m ≥ 0`: `QV ≤ −m` outside `D`. At the reported
    /// certificate scale this is `trace_scale ×` the unit-trace margin.
    pub margin: f64,
    /// False when the region block was infeasible (e.g. `D` excludes the
    /// drift fixed point) and was dropped; the refuge is then determined by
    /// the drift ceiling alone.
    pub region_active: bool,
    pub qv: QuadraticForm,
    pub box_mode_face_pairs: bool,
    pub tolerances: Tolerances,
    pub solver_stats: SolverStats,
}

impl LyapunovCertificate {
    /// `b = b′ + 1`.
    pub fn b(&self) -> f64 {
        self.b_prime + 1.0
    }
}

/// Mapping of SDP scalars for the Lyapunov programs.
struct VarMap {
    n: usize,
    r_vars: Vec<(usize, usize, usize)>, // (i, j, var) with i <= j
    y0_vars: Vec<usize>,
    b_prime: usize,
    lambdas: Vec<usize>,
}

impl VarMap {
    fn r_basis(n: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(n, n);
        if i == j {
            s[(i, i)] = 1.0;
        } else {
            s[(i, j)] = 1.0;
            s[(j, i)] = 1.0;
        }
        s
    }

    fn extract(&self, z: &[f64]) -> (DMatrix<f64>, DVector<f64>, f64, Vec<f64>) {
        let mut r = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.r_vars {
            r[(i, j)] = z[v];
            r[(j, i)] = z[v];
        }
        let y0 = DVector::from_iterator(self.n, self.y0_vars.iter().map(|&v| z[v]));
        let lambdas = self.lambdas.iter().map(|&v| z[v]).collect();
        (r, y0, z[self.b_prime], lambdas)
    }
}

/// Diagonal state scaling `x = D x̃` balancing the LMI data: coordinates of
/// magnitude 10³ would otherwise spread the embedding entries over six
/// orders inside one block.
fn state_scale(network: &ReactionNetwork, region: Option<&RegionD>) -> DVector<f64> {
    let n = network.dim();
    match region {
        Some(RegionD::Ball { center, radius2 }) => {
            let r = radius2.max(1.0).sqrt();
            DVector::from_iterator(n, center.iter().map(|c| (c.abs() + r).max(1.0)))
        }
        Some(RegionD::Box { lower, upper }) => DVector::from_iterator(
            n,
            lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l.abs().max(u.abs()).max(1.0)),
        ),
        None => match drift_fixed_point(network) {
            Some(x) => DVector::from_iterator(n, x.iter().map(|v| (2.0 * v.abs()).max(1.0))),
            None => DVector::from_element(n, 1.0),
        },
    }
}

/// Per-variable coefficient forms of `QV` over the affine transitions, in
/// the scaled coordinates `x = D x̃` with variables `R̃ = DRD`, `ỹ₀ = Dy₀`.
///
/// In original coordinates `QV = Σ_v z_v · basis_v` with
/// `T(R) = AᵀR + RA`, `u(R, y₀) = RB + ½Σ(rᵀRr)aₖ − Aᵀy₀`,
/// `β(R, y₀) = Σcₖ(rᵀRr) − 2Bᵀy₀`. Order-2 transitions contribute nothing
/// under the eliminations `R r_b = 0`, `y₀ᵀ r_b = 0`.
fn qv_basis(
    network: &ReactionNetwork,
    map: &VarMap,
    dscale: &DVector<f64>,
) -> Vec<(usize, QuadraticForm)> {
    let n = network.dim();
    let drift = network.drift_matrices(false).expect("drift");
    let dinv = DMatrix::from_diagonal(&dscale.map(|v| 1.0 / v));
    let mut out = Vec::new();
    for &(i, j, var) in &map.r_vars {
        // R contribution of the scaled variable: R = D⁻¹ S̃ D⁻¹.
        let s = &dinv * VarMap::r_basis(n, i, j) * &dinv;
        let t = drift.a.transpose() * &s + &s * &drift.a;
        let mut u = &s * &drift.b;
        let mut beta = 0.0;
        for tr in network.transitions() {
            let rv = DVector::from_iterator(n, tr.delta.iter().map(|&d| d as f64));
            let quad = rv.dot(&(&s * &rv));
            match tr.rate {
                RateLaw::Constant(c) => beta += c * quad,
                RateLaw::Linear { species, coeff } => u[species] += 0.5 * coeff * quad,
                RateLaw::Bimolecular { .. } => {}
            }
        }
        out.push((var, QuadraticForm::new(t, u, beta).change_coords(dscale)));
    }
    for (i, &var) in map.y0_vars.iter().enumerate() {
        let mut e = DVector::zeros(n);
        e[i] = 1.0 / dscale[i];
        let u = -(drift.a.transpose() * &e);
        let beta = -2.0 * drift.b.dot(&e);
        out.push((
            var,
            QuadraticForm::new(DMatrix::zeros(n, n), u, beta).change_coords(dscale),
        ));
    }
    out
}

/// Corner indicator: embedding of the constant 1.
fn corner(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(n, n)] = 1.0;
    m
}

struct Assembled {
    problem: SdpProblem,
    map: VarMap,
}

/// Phase of the level-set solve being assembled.
enum LevelsetPhase<'a> {
    /// Minimise the global drift ceiling `b'`.
    MinCeiling,
    /// At a fixed ceiling, minimise `t` with `−T ⪯ t·Σ⁻¹` so the level-set
    /// metric follows the stationary covariance estimate `Σ` (both in
    /// scaled coordinates here).
    AdaptShape {
        ceiling: f64,
        sigma_inv_scaled: &'a DMatrix<f64>,
    },
}

fn assemble_levelset(
    network: &ReactionNetwork,
    eliminations: &[NonlinearElimination],
    dscale: &DVector<f64>,
    phase: LevelsetPhase<'_>,
) -> Result<Assembled, AnalysisError> {
    let n = network.dim();
    let mut p = SdpProblem::new();
    let mut r_vars = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = p.add_var(format!("R[{i},{j}]"));
            r_vars.push((i, j, v));
        }
    }
    let y0_vars: Vec<usize> = (0..n).map(|i| p.add_var(format!("y0[{i}]"))).collect();
    let b_prime = p.add_var(match phase {
        LevelsetPhase::MinCeiling => "b_prime",
        LevelsetPhase::AdaptShape { .. } => "t_metric",
    });
    let map = VarMap {
        n,
        r_vars,
        y0_vars,
        b_prime,
        lambdas: Vec::new(),
    };

    p.set_objective(&[(map.b_prime, 1.0)]);
    let basis = qv_basis(network, &map, dscale);

    // Global ceiling: embedding(b' - QV) >= 0 with b' either the objective
    // variable or a fixed constant from phase 1.
    let mut global_coeffs: Vec<(usize, DMatrix<f64>)> =
        basis.iter().map(|(v, f)| (*v, -psd_embedding(f))).collect();
    let mut global_f0 = DMatrix::zeros(n + 1, n + 1);
    match phase {
        LevelsetPhase::MinCeiling => global_coeffs.push((map.b_prime, corner(n))),
        LevelsetPhase::AdaptShape { ceiling, .. } => global_f0 += corner(n) * ceiling,
    }
    p.add_lmi_block("global-ceiling", global_f0, global_coeffs)?;

    if let LevelsetPhase::AdaptShape {
        sigma_inv_scaled, ..
    } = phase
    {
        // t Σ⁻¹ + T(R) >= 0: the drift curvature is dominated by t times
        // the inverse covariance metric; minimising t rounds the level
        // sets to the stationary shape.
        let mut coeffs: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for (v, f) in &basis {
            if f.t().amax() > 0.0 {
                coeffs.push((*v, f.t().clone()));
            }
        }
        coeffs.push((map.b_prime, sigma_inv_scaled.clone()));
        p.add_lmi_block("metric", DMatrix::zeros(n, n), coeffs)?;
    }

    // R >= 0 and the unit-trace normalisation.
    let r_coeffs: Vec<(usize, DMatrix<f64>)> = map
        .r_vars
        .iter()
        .map(|&(i, j, v)| (v, VarMap::r_basis(n, i, j)))
        .collect();
    p.add_lmi_block("R-psd", DMatrix::zeros(n, n), r_coeffs)?;
    // Unit trace of the original R: tr(D⁻¹R̃D⁻¹) = Σ R̃ᵢᵢ/dᵢ² = 1.
    let trace_terms: Vec<(usize, f64)> = map
        .r_vars
        .iter()
        .filter(|&&(i, j, _)| i == j)
        .map(|&(i, _, v)| (v, 1.0 / (dscale[i] * dscale[i])))
        .collect();
    p.add_equality(&trace_terms, 1.0)?;

    add_eliminations(&mut p, &map, eliminations, dscale)?;
    Ok(Assembled { problem: p, map })
}

fn add_eliminations(
    p: &mut SdpProblem,
    map: &VarMap,
    eliminations: &[NonlinearElimination],
    dscale: &DVector<f64>,
) -> Result<(), AnalysisError> {
    for elim in eliminations {
        // R r_b = 0 in scaled variables reads R̃ (D⁻¹ r_b) = 0, and the
        // same vector drives ỹ₀ᵀ(D⁻¹r_b) = y₀ᵀr_b = 0.
        let v: Vec<f64> = elim
            .vector
            .iter()
            .zip(dscale.iter())
            .map(|(&d, &s)| d as f64 / s)
            .collect();
        // (R r_b)_i = 0 for each row i.
        for i in 0..map.n {
            let mut terms = Vec::new();
            for &(a, b, var) in &map.r_vars {
                let coeff = if a == i {
                    v[b]
                } else if b == i {
                    v[a]
                } else {
                    0.0
                };
                if coeff != 0.0 {
                    terms.push((var, coeff));
                }
            }
            if !terms.is_empty() {
                p.add_equality(&terms, 0.0)?;
            }
        }
        // y0 . r_b = 0 keeps the residual quadratic term out of QV.
        let terms: Vec<(usize, f64)> = map
            .y0_vars
            .iter()
            .enumerate()
            .filter(|(i, _)| v[*i] != 0.0)
            .map(|(i, &var)| (var, v[i]))
            .collect();
        if !terms.is_empty() {
            p.add_equality(&terms, 0.0)?;
        }
    }
    Ok(())
}

/// Maximise the S-procedure margin `m` at a fixed drift shape:
/// `embedding(−QV − m − λ_k g_k) ⪰ 0`, `λ ≥ 0`, `m ≥ 0`.
fn solve_margin(
    qv: &QuadraticForm,
    region_quads: &[QuadraticForm],
    options: &AnalysisOptions,
) -> Option<(f64, Vec<f64>)> {
    let n = qv.dim();
    let mut p = SdpProblem::new();
    let m_var = p.add_var("margin");
    let lambda_vars: Vec<usize> = (0..region_quads.len())
        .map(|k| p.add_var(format!("lambda[{k}]")))
        .collect();
    p.set_objective(&[(m_var, -1.0)]);
    for (k, g) in region_quads.iter().enumerate() {
        p.add_lmi_block(
            format!("region[{k}]"),
            psd_embedding(&qv.scale(-1.0)),
            vec![(m_var, -corner(n)), (lambda_vars[k], -psd_embedding(g))],
        )
        .ok()?;
        p.add_nonneg(lambda_vars[k], format!("lambda[{k}] >= 0"))
            .ok()?;
    }
    p.add_nonneg(m_var, "margin >= 0").ok()?;
    let (sol, _) = solve_with_ladder(&p, options).ok()?;
    if sol.status != SdpStatus::Optimal {
        return None;
    }
    let m = sol.z[m_var].max(0.0);
    let lambdas = lambda_vars.iter().map(|&v| sol.z[v].max(0.0)).collect();
    Some((m, lambdas))
}

/// Solve the level-set problem in three phases, all over unit-trace PSD
/// `R` with the order-2 eliminations:
///
/// 1. minimise the global drift ceiling `b' = sup_x QV(x)`;
/// 2. among the minimisers, round the drift level sets to the stationary
///    shape by minimising `t` with `−T ⪯ t·Σ⁻¹`, where `Σ` is the
///    linear-noise covariance estimate at the drift fixed point (a
///    selection heuristic only; every candidate it picks from already
///    carries the phase-1 ceiling);
/// 3. maximise the S-procedure margin `m` of `QV ≤ −m` outside `D` at the
///    solved shape, which excludes `V ≡ 0` through the region and yields
///    the certificate multipliers.
///
/// The certificate is reported at `options.trace_scale` (certificates are
/// a cone; the tiny canonical scale keeps `b = 1 + b'` at its tightest for
/// the `π(C) ≥ 1/b` bound). The region enters only through phase 3, so the
/// solved shape is insensitive to `D` by construction.
pub fn solve_levelset_problem(
    network: &ReactionNetwork,
    region: &RegionD,
    options: &AnalysisOptions,
) -> Result<LyapunovCertificate, AnalysisError> {
    let n = network.dim();
    if region.dim() != n {
        return Err(AnalysisError::DimensionMismatch(format!(
            "region dimension {} vs network dimension {}",
            region.dim(),
            n
        )));
    }
    let eliminations = nonlinear_constraints(network)?;
    let region_quads = region.quadratics(options.box_mode);
    // The scaling comes from the drift fixed point, not the region, so the
    // solved shape is bit-identical across region choices.
    let dscale = state_scale(network, None);
    let dinv = DMatrix::from_diagonal(&dscale.map(|v| 1.0 / v));

    // Phase 1: minimal drift ceiling.
    let assembled = assemble_levelset(network, &eliminations, &dscale, LevelsetPhase::MinCeiling)?;
    let (sol, mut solved_tol) = solve_with_ladder(&assembled.problem, options)?;
    match sol.status {
        SdpStatus::Optimal => {}
        // A drift ceiling unbounded below contradicts b' >= 0, which every
        // certificate of an ergodic chain satisfies; the feasible set is
        // empty (possibly only weakly so). Either way: no certificate.
        SdpStatus::Infeasible | SdpStatus::Unbounded => return Err(AnalysisError::Infeasible),
        SdpStatus::NumericalFailure => {
            return Err(AnalysisError::NumericalFailure(format!(
                "no convergence in {} iterations",
                sol.iterations
            )))
        }
    }
    let (r_tilde, y0_tilde, b_hat, _) = assembled.map.extract(&sol.z);
    let mut stats = SolverStats::from_checked(&sol, &assembled.problem);

    // Phase 2: stationary-shape adaptation at a fixed, slightly slackened
    // ceiling. A tight slack preserves ceiling optimality; when it leaves R
    // too close to singular (the ceiling itself can force near-rank-one R,
    // as for conversion-dominated chains), a 1% slack buys roundness.
    // Skipped entirely when no covariance estimate is available.
    let mut best = (r_tilde, y0_tilde);
    if let Some(sigma) = lna_covariance(network) {
        if let Some(chol) = sigma.clone().cholesky() {
            let sigma_inv = chol.inverse();
            // Congruence to scaled coordinates: −T̃ ⪯ t·(DΣ⁻¹D).
            let sigma_inv_scaled =
                DMatrix::from_diagonal(&dscale) * sigma_inv * DMatrix::from_diagonal(&dscale);
            for slack in [1e-6, 1e-2] {
                let ceiling = b_hat + slack * (1.0 + b_hat.abs());
                let Ok(shape) = assemble_levelset(
                    network,
                    &eliminations,
                    &dscale,
                    LevelsetPhase::AdaptShape {
                        ceiling,
                        sigma_inv_scaled: &sigma_inv_scaled,
                    },
                ) else {
                    break;
                };
                let Ok((sol2, tol2)) = solve_with_ladder(&shape.problem, options) else {
                    break;
                };
                if sol2.status != SdpStatus::Optimal {
                    continue;
                }
                let (r2, y02, _, _) = shape.map.extract(&sol2.z);
                let eig = r2.clone().symmetric_eigen();
                let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
                let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
                let comfortably_pd = eliminations.is_empty() && lmax > 0.0 && lmin >= 1e-5 * lmax;
                best = (r2, y02);
                stats = SolverStats::from_checked(&sol2, &shape.problem);
                solved_tol = solved_tol.max(tol2);
                // With eliminations R is singular by construction; the
                // loose rung is then pointless.
                if comfortably_pd || !eliminations.is_empty() {
                    break;
                }
            }
        }
    }

    // Map the scaled variables back: R = D⁻¹R̃D⁻¹, y₀ = D⁻¹ỹ₀.
    let r_hat = &dinv * best.0 * &dinv;
    let y0_hat = &dinv * best.1;
    let spec_hat = LyapunovSpec::from_r_y0(r_hat, y0_hat);
    let qv_hat = apply_generator(network, &spec_hat)?;
    // The reported ceiling is the exact peak of the solved drift.
    let b_final = qv_peak(&qv_hat).unwrap_or(b_hat);

    // Phase 3: S-procedure margin at the solved shape, in scaled
    // coordinates (margins and multipliers are drift values, unchanged by
    // the coordinates). An unsatisfiable region (for instance one that
    // excludes the drift fixed point) simply yields no margin.
    let qv_scaled = qv_hat.change_coords(&dscale);
    let region_scaled: Vec<QuadraticForm> = region_quads
        .iter()
        .map(|g| g.change_coords(&dscale))
        .collect();
    let (region_active, margin_hat, lambda_hat) =
        match solve_margin(&qv_scaled, &region_scaled, options) {
            Some((m, l)) if m > 0.0 => (true, m, l),
            _ => (false, 0.0, vec![0.0; region_quads.len()]),
        };

    // Exact positive scaling to the canonical certificate scale.
    let tau = options.trace_scale;
    let spec = LyapunovSpec::from_r_y0(&spec_hat.r * tau, &spec_hat.y0 * tau);
    let qv = qv_hat.scale(tau);

    Ok(LyapunovCertificate {
        species: network.species().iter().map(|s| s.name.clone()).collect(),
        spec,
        b_prime: b_final * tau,
        region: region.clone(),
        lambda: lambda_hat.iter().map(|l| l * tau).collect(),
        margin: margin_hat * tau,
        region_active,
        qv,
        box_mode_face_pairs: options.box_mode == BoxMode::FacePairs,
        tolerances: Tolerances {
            solver: solved_tol,
            psd: 1e-6,
            equality: 1e-8,
        },
        solver_stats: stats,
    })
}

/// Peak value of a concave-ish quadratic: `β − uᵀT⁺u` through the
/// eigendecomposition, provided `T ⪯ 0` and `u` lies in range(T).
fn qv_peak(qv: &QuadraticForm) -> Option<f64> {
    let eig = qv.t().clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let tol = 1e-10 * (1.0 + scale);
    let mut peak = qv.beta();
    let ut = eig.eigenvectors.transpose() * qv.u();
    for i in 0..eig.eigenvalues.len() {
        let l = eig.eigenvalues[i];
        if l > tol {
            return None;
        }
        if l < -tol {
            peak -= ut[i] * ut[i] / l;
        } else if ut[i].abs() > 1e-6 * (1.0 + qv.u().amax()) {
            // Unbounded along a null direction of T.
            return None;
        }
    }
    Some(peak)
}

/// Stationary covariance estimate from the linear-noise approximation:
/// `J Σ + Σ Jᵀ + D(x̄) = 0` at the drift fixed point `x̄`, with `J` the
/// drift Jacobian and `D(x̄) = Σₖ qₖ(x̄) rₖrₖᵀ`. Returns `None` when the
/// fixed point or the Lyapunov solve is not usable.
fn lna_covariance(network: &ReactionNetwork) -> Option<DMatrix<f64>> {
    let n = network.dim();
    let x_bar = drift_fixed_point(network)?;
    if x_bar.iter().any(|&v| v < 0.0) {
        return None;
    }
    let jac = drift_jacobian(network, &x_bar);
    let mut diffusion = DMatrix::zeros(n, n);
    for tr in network.transitions() {
        let q = rate_at(&tr.rate, &x_bar);
        if q < 0.0 {
            return None;
        }
        let rv = DVector::from_iterator(n, tr.delta.iter().map(|&d| d as f64));
        diffusion += &rv * rv.transpose() * q;
    }
    let sigma = lyapunov_solve(&jac, &diffusion)?;
    let sym = (&sigma + sigma.transpose()) * 0.5;
    // Usable only when comfortably positive definite.
    let eig = sym.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if lmax <= 0.0 || lmin <= 1e-10 * lmax {
        return None;
    }
    Some(sym)
}

fn rate_at(rate: &RateLaw, x: &DVector<f64>) -> f64 {
    match *rate {
        RateLaw::Constant(c) => c,
        RateLaw::Linear { species, coeff } => coeff * x[species],
        RateLaw::Bimolecular { i, j, coeff } => {
            if i == j {
                coeff * x[i] * (x[i] - 1.0)
            } else {
                coeff * x[i] * x[j]
            }
        }
    }
}

/// Fixed point of the full drift (Newton from the affine-part solution).
fn drift_fixed_point(network: &ReactionNetwork) -> Option<DVector<f64>> {
    let n = network.dim();
    let drift = network.drift_matrices(false).ok()?;
    let mut x = drift
        .a
        .clone()
        .lu()
        .solve(&(-&drift.b))
        .unwrap_or_else(|| DVector::from_element(n, 1.0));
    for _ in 0..100 {
        let f = full_drift(network, &x);
        let scale = 1.0 + x.amax();
        if f.amax() <= 1e-10 * (1.0 + scale) {
            return Some(x);
        }
        let jac = drift_jacobian(network, &x);
        let step = jac.lu().solve(&f)?;
        x -= step;
    }
    let f = full_drift(network, &x);
    if f.amax() <= 1e-6 * (1.0 + x.amax()) {
        Some(x)
    } else {
        None
    }
}

fn full_drift(network: &ReactionNetwork, x: &DVector<f64>) -> DVector<f64> {
    let n = network.dim();
    let mut d = DVector::zeros(n);
    for tr in network.transitions() {
        let q = rate_at(&tr.rate, x);
        for i in 0..n {
            d[i] += q * tr.delta[i] as f64;
        }
    }
    d
}

fn drift_jacobian(network: &ReactionNetwork, x: &DVector<f64>) -> DMatrix<f64> {
    let n = network.dim();
    let mut jac = DMatrix::zeros(n, n);
    for tr in network.transitions() {
        match tr.rate {
            RateLaw::Constant(_) => {}
            RateLaw::Linear { species, coeff } => {
                for i in 0..n {
                    jac[(i, species)] += coeff * tr.delta[i] as f64;
                }
            }
            RateLaw::Bimolecular { i, j, coeff } => {
                if i == j {
                    let g = coeff * (2.0 * x[i] - 1.0);
                    for row in 0..n {
                        jac[(row, i)] += g * tr.delta[row] as f64;
                    }
                } else {
                    for row in 0..n {
                        jac[(row, i)] += coeff * x[j] * tr.delta[row] as f64;
                        jac[(row, j)] += coeff * x[i] * tr.delta[row] as f64;
                    }
                }
            }
        }
    }
    jac
}

/// Solve `J S + S Jᵀ = −D` by vectorising to an `n²×n²` linear system.
fn lyapunov_solve(jac: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = jac.nrows();
    let m = n * n;
    let mut big = DMatrix::zeros(m, m);
    // (J S)_{ab} = Σ_c J_{ac} S_{cb};  (S Jᵀ)_{ab} = Σ_c S_{ac} J_{bc}.
    for a in 0..n {
        for b in 0..n {
            let row = a * n + b;
            for cc in 0..n {
                big[(row, cc * n + b)] += jac[(a, cc)];
                big[(row, a * n + cc)] += jac[(b, cc)];
            }
        }
    }
    let rhs = DVector::from_fn(m, |k, _| -d[(k / n, k % n)]);
    let v = big.lu().solve(&rhs)?;
    Some(DMatrix::from_fn(n, n, |a, b| v[a * n + b]))
}

/// An upper bound on the stationary expectation `π(f)`.
#[derive(Debug, Clone)]
pub struct MomentBound {
    pub f: QuadraticForm,
    pub bound: f64,
    pub spec: LyapunovSpec,
    pub solver_stats: SolverStats,
}

/// Solve the moment program `min b′ s.t. QV + f ≤ b′ ∀x, R ⪰ 0`; the bound
/// is `b′` (the `f ≥ 1` premise is absorbed by shifting `f` and the bound
/// together by 1, which leaves the program unchanged).
pub fn solve_moment_problem(
    network: &ReactionNetwork,
    f: &QuadraticForm,
    options: &AnalysisOptions,
) -> Result<MomentBound, AnalysisError> {
    let n = network.dim();
    if f.dim() != n {
        return Err(AnalysisError::DimensionMismatch(format!(
            "moment function dimension {} vs network dimension {}",
            f.dim(),
            n
        )));
    }
    let eliminations = nonlinear_constraints(network)?;
    // Along an eliminated direction v the drift of any admissible V is
    // constant, so the ceiling can never dominate an f that grows
    // quadratically along v: vᵀT_f v > 0 makes the program infeasible.
    for elim in &eliminations {
        let v = DVector::from_iterator(n, elim.vector.iter().map(|&d| d as f64));
        let grow = (v.transpose() * f.t() * &v)[(0, 0)];
        if grow > 1e-12 * (1.0 + f.t().amax()) {
            return Err(AnalysisError::Infeasible);
        }
    }
    let dscale = state_scale(network, None);

    let mut p = SdpProblem::new();
    let mut r_vars = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = p.add_var(format!("R[{i},{j}]"));
            r_vars.push((i, j, v));
        }
    }
    let y0_vars: Vec<usize> = (0..n).map(|i| p.add_var(format!("y0[{i}]"))).collect();
    let b_prime = p.add_var("b_prime");
    let map = VarMap {
        n,
        r_vars,
        y0_vars,
        b_prime,
        lambdas: Vec::new(),
    };
    p.set_objective(&[(map.b_prime, 1.0)]);

    // embedding(b' - QV - f) >= 0, assembled in scaled coordinates. The
    // program is jointly homogeneous in (R, y0, b') and f, so f is
    // normalised to unit size here and the solution rescaled afterwards.
    let basis = qv_basis(network, &map, &dscale);
    let f_scaled = f.change_coords(&dscale);
    let fscale = f_scaled
        .t()
        .amax()
        .max(f_scaled.u().amax())
        .max(f_scaled.beta().abs())
        .max(1e-300);
    let f_unit = f_scaled.scale(1.0 / fscale);
    let mut coeffs: Vec<(usize, DMatrix<f64>)> = basis
        .iter()
        .map(|(v, form)| (*v, -psd_embedding(form)))
        .collect();
    coeffs.push((map.b_prime, corner(n)));
    p.add_lmi_block("moment-ceiling", -psd_embedding(&f_unit), coeffs)?;

    let r_coeffs: Vec<(usize, DMatrix<f64>)> = map
        .r_vars
        .iter()
        .map(|&(i, j, v)| (v, VarMap::r_basis(n, i, j)))
        .collect();
    p.add_lmi_block("R-psd", DMatrix::zeros(n, n), r_coeffs)?;
    add_eliminations(&mut p, &map, &eliminations, &dscale)?;

    let (sol, _) = solve_with_ladder(&p, options)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible | SdpStatus::Unbounded => return Err(AnalysisError::Infeasible),
        SdpStatus::NumericalFailure => {
            return Err(AnalysisError::NumericalFailure(format!(
                "no convergence in {} iterations",
                sol.iterations
            )))
        }
    }
    let (r_tilde, y0_tilde, b, _) = map.extract(&sol.z);
    let dinv = DMatrix::from_diagonal(&dscale.map(|v| 1.0 / v));
    Ok(MomentBound {
        f: f.clone(),
        bound: b * fscale,
        spec: LyapunovSpec::from_r_y0(&dinv * r_tilde * &dinv * fscale, &dinv * y0_tilde * fscale),
        solver_stats: SolverStats::from_checked(&sol, &p),
    })
}

/// `π(C) ≥ 1/b` with `C = {x : QV(x) ≥ −1}` and `b = b′ + 1`.
pub fn probability_bound(cert: &LyapunovCertificate) -> f64 {
    1.0 / cert.b()
}

/// A shifted super-level set `C_ε = {x : QV(x) ≥ −1+δ}` with stationary
/// mass at least `1−ε`.
#[derive(Debug, Clone)]
pub struct MassLevelSet {
    pub epsilon: f64,
    pub delta: f64,
    pub threshold: f64,
    /// `None` when the quadratic part is degenerate (singular `R`
    /// directions); the set is then an unbounded cylinder, still usable
    /// through its threshold.
    pub set: Option<Ellipsoid>,
    pub guaranteed_mass: f64,
}

/// Compute the δ-shift for mass `1−ε`: `δ = (1 − (1−ε)b)/ε`, which solves
/// `(1−δ)/(b−δ) = 1−ε`.
pub fn shift_for_mass(
    cert: &LyapunovCertificate,
    epsilon: f64,
) -> Result<MassLevelSet, AnalysisError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalysisError::InvalidEpsilon(epsilon));
    }
    let b = cert.b();
    let delta = (1.0 - (1.0 - epsilon) * b) / epsilon;
    debug_assert!(
        ((1.0 - delta) / (b - delta) - (1.0 - epsilon)).abs() <= 1e-6,
        "shift must solve its defining equation"
    );
    let threshold = -1.0 + delta;
    let set = match level_set_ellipsoid(&cert.qv, threshold) {
        Ok(LevelSet::Ellipsoid(e)) => Some(e),
        Ok(LevelSet::Empty) => return Err(AnalysisError::EmptySet),
        Ok(LevelSet::Unbounded) | Err(QuadError::SingularT(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(MassLevelSet {
        epsilon,
        delta,
        threshold,
        set,
        guaranteed_mass: 1.0 - epsilon,
    })
}

/// Outcome of the ergodicity checks on a solved certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityReport {
    pub psd_ok: bool,
    /// Both LMIs recomputed from `(R, y₀, b′, λ, margin)` through the
    /// generator algebra, independent of the solver.
    pub drift_ok: bool,
    /// `null(R) ∩ ℝⁿ₊ = {0}`, decided by a small LP over a null-space basis.
    pub radially_unbounded: bool,
    /// All order-2 vectors mixed-sign, `‖R r_b‖∞` and `|y₀ᵀ r_b|` below tol.
    pub nonlinear_eliminated: bool,
    pub details: Vec<String>,
}

impl ErgodicityReport {
    pub fn all_ok(&self) -> bool {
        self.psd_ok && self.drift_ok && self.radially_unbounded && self.nonlinear_eliminated
    }
}

pub fn ergodicity_certificate(
    cert: &LyapunovCertificate,
    network: &ReactionNetwork,
) -> ErgodicityReport {
    let mut details = Vec::new();
    let r = &cert.spec.r;
    let eig = r.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let psd_tol = 1e-6 * (1.0 + lmax);
    let psd_ok = lmin >= -psd_tol;
    if !psd_ok {
        details.push(format!("R has eigenvalue {lmin:.3e} < -{psd_tol:.1e}"));
    }

    let drift_ok = match apply_generator(network, &cert.spec) {
        Ok(qv) => {
            let mut ok = true;
            let scale = 1.0 + cert.qv.t().amax().max(cert.b_prime.abs());
            let ceiling = qv
                .scale(-1.0)
                .add(&QuadraticForm::constant(qv.dim(), cert.b_prime));
            let e1 = min_eigenvalue(&psd_embedding(&ceiling));
            if e1 < -1e-6 * scale {
                ok = false;
                details.push(format!("global ceiling LMI min eig {e1:.3e}"));
            }
            if cert.region_active {
                let mode = if cert.box_mode_face_pairs {
                    BoxMode::FacePairs
                } else {
                    BoxMode::EnclosingBall
                };
                for (k, g) in cert.region.quadratics(mode).iter().enumerate() {
                    let lam = cert.lambda.get(k).copied().unwrap_or(0.0);
                    let combo = qv
                        .scale(-1.0)
                        .add(&QuadraticForm::constant(qv.dim(), -cert.margin))
                        .add(&g.scale(-lam));
                    let e2 = min_eigenvalue(&psd_embedding(&combo));
                    if e2 < -1e-6 * scale {
                        ok = false;
                        details.push(format!("region LMI {k} min eig {e2:.3e}"));
                    }
                }
            }
            // The symbolic drift must match the stored certificate form.
            let dt = (qv.t() - cert.qv.t()).amax();
            if dt > 1e-6 * scale {
                ok = false;
                details.push(format!("stored QV deviates from generator by {dt:.3e}"));
            }
            ok
        }
        Err(e) => {
            details.push(format!("generator: {e}"));
            false
        }
    };

    // Radial unboundedness on the orthant: no nonzero null direction of R
    // with all components nonnegative. Maximise the component sum of a null
    // vector under nonnegativity and box bounds; a positive optimum fails.
    let null_tol = if lmax > 0.0 { 1e-8 * lmax } else { f64::MAX };
    let null_cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() <= null_tol)
        .collect();
    let radially_unbounded = if null_cols.is_empty() {
        true
    } else {
        match orthant_null_lp(&eig.eigenvectors, &null_cols) {
            Some(opt) => {
                if opt > 1e-6 {
                    details.push(format!(
                        "null(R) meets the positive orthant (component sum {opt:.3e})"
                    ));
                    false
                } else {
                    true
                }
            }
            None => {
                details.push("radial unboundedness LP failed".into());
                false
            }
        }
    };

    let mut nonlinear_eliminated = true;
    for (k, tr) in network.transitions().iter().enumerate() {
        if let RateLaw::Bimolecular { .. } = tr.rate {
            let rv = DVector::from_iterator(r.nrows(), tr.delta.iter().map(|&d| d as f64));
            if tr.delta.iter().all(|&d| d >= 0) {
                nonlinear_eliminated = false;
                details.push(format!("transition {k} has nonnegative change vector"));
            }
            let res = (r * &rv).amax();
            if res > 1e-8 * (1.0 + lmax) {
                nonlinear_eliminated = false;
                details.push(format!("||R r_b||_inf = {res:.3e} for transition {k}"));
            }
            let dy = cert.spec.y0.dot(&rv).abs();
            if dy > 1e-8 * (1.0 + cert.spec.y0.amax()) {
                nonlinear_eliminated = false;
                details.push(format!("|y0 . r_b| = {dy:.3e} for transition {k}"));
            }
        }
    }

    ErgodicityReport {
        psd_ok,
        drift_ok,
        radially_unbounded,
        nonlinear_eliminated,
        details,
    }
}

/// LP: maximise `Σᵢ (Nw)ᵢ` subject to `Nw ≥ 0`, `‖w‖∞ ≤ 1`, where the
/// columns of `N` are the null eigenvectors. Positive optimum means a
/// nonzero null direction lies in the orthant.
fn orthant_null_lp(eigenvectors: &DMatrix<f64>, null_cols: &[usize]) -> Option<f64> {
    let n = eigenvectors.nrows();
    let k = null_cols.len();
    let mut p = SdpProblem::new();
    let w: Vec<usize> = (0..k).map(|l| p.add_var(format!("w[{l}]"))).collect();
    let mut obj = vec![0.0; k];
    for (l, &col) in null_cols.iter().enumerate() {
        for i in 0..n {
            obj[l] -= eigenvectors[(i, col)];
        }
    }
    p.set_objective(&w.iter().cloned().zip(obj).collect::<Vec<_>>());
    for i in 0..n {
        let coeffs: Vec<(usize, DMatrix<f64>)> = (0..k)
            .map(|l| {
                (
                    w[l],
                    DMatrix::from_element(1, 1, eigenvectors[(i, null_cols[l])]),
                )
            })
            .collect();
        p.add_lmi_block(format!("(Nw)[{i}] >= 0"), DMatrix::zeros(1, 1), coeffs)
            .ok()?;
    }
    for (l, &wl) in w.iter().enumerate() {
        p.add_lmi_block(
            format!("1 - w[{l}] >= 0"),
            DMatrix::from_element(1, 1, 1.0),
            vec![(wl, DMatrix::from_element(1, 1, -1.0))],
        )
        .ok()?;
        p.add_lmi_block(
            format!("1 + w[{l}] >= 0"),
            DMatrix::from_element(1, 1, 1.0),
            vec![(wl, DMatrix::from_element(1, 1, 1.0))],
        )
        .ok()?;
    }
    let sol = sdp::solve(&p, &SolveOptions::default()).ok()?;
    if sol.status != SdpStatus::Optimal {
        return None;
    }
    Some(-sol.objective_value)
}

// ---------------------------------------------------------------------------
// Certificate serialization (schema 1)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct QvJson {
    t: Vec<f64>,
    u: Vec<f64>,
    beta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateJson {
    schema: u32,
    species: Vec<String>,
    r: Vec<f64>,
    y0: Vec<f64>,
    x0: Option<Vec<f64>>,
    b_prime: f64,
    lambda: Vec<f64>,
    margin: f64,
    region: RegionD,
    region_active: bool,
    box_mode_face_pairs: bool,
    qv: QvJson,
    tolerances: Tolerances,
    solver_stats: SolverStats,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn from_row_major(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

impl LyapunovCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.spec.dim();
        let doc = CertificateJson {
            schema: 1,
            species: self.species.clone(),
            r: row_major(&self.spec.r),
            y0: self.spec.y0.iter().cloned().collect(),
            x0: self.spec.x0.as_ref().map(|x| x.iter().cloned().collect()),
            b_prime: self.b_prime,
            lambda: self.lambda.clone(),
            margin: self.margin,
            region: self.region.clone(),
            region_active: self.region_active,
            box_mode_face_pairs: self.box_mode_face_pairs,
            qv: QvJson {
                t: row_major(self.qv.t()),
                u: self.qv.u().iter().cloned().collect(),
                beta: self.qv.beta(),
            },
            tolerances: self.tolerances,
            solver_stats: self.solver_stats.clone(),
        };
        let _ = n;
        serde_json::to_value(doc).expect("certificate serialises")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let doc: CertificateJson =
            serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        if doc.schema != 1 {
            return Err(format!("unsupported certificate schema {}", doc.schema));
        }
        let n = doc.species.len();
        if doc.r.len() != n * n || doc.y0.len() != n || doc.qv.t.len() != n * n {
            return Err("certificate dimensions are inconsistent".into());
        }
        let r = from_row_major(&doc.r, n);
        let y0 = DVector::from_row_slice(&doc.y0);
        let mut spec = LyapunovSpec::from_r_y0(r, y0);
        if let Some(x0) = doc.x0 {
            spec.x0 = Some(DVector::from_row_slice(&x0));
        }
        let qv = QuadraticForm::new(
            from_row_major(&doc.qv.t, n),
            DVector::from_row_slice(&doc.qv.u),
            doc.qv.beta,
        );
        Ok(Self {
            species: doc.species,
            spec,
            b_prime: doc.b_prime,
            region: doc.region,
            lambda: doc.lambda,
            margin: doc.margin,
            region_active: doc.region_active,
            qv,
            box_mode_face_pairs: doc.box_mode_face_pairs,
            tolerances: doc.tolerances,
            solver_stats: doc.solver_stats,
        })
    }

    /// Violated invariants, empty when the certificate is internally
    /// consistent with the network. Used when verifying untrusted files.
    pub fn validate(&self, network: &ReactionNetwork) -> Vec<String> {
        let mut violations = Vec::new();
        if self.b() < 1.0 - 1e-6 {
            violations.push(format!(
                "b = 1 + b' = {:.6e} violates b >= 1 (every ergodic chain has \
                 nonnegative peak drift)",
                self.b()
            ));
        }
        let report = ergodicity_certificate(self, network);
        if !report.psd_ok {
            violations.push("R is not positive semidefinite".into());
        }
        if !report.drift_ok {
            violations.push("drift LMIs fail at the stored values".into());
        }
        if !report.radially_unbounded {
            violations.push("V is not radially unbounded on the orthant".into());
        }
        if !report.nonlinear_eliminated {
            violations.push("order-2 transitions are not eliminated".into());
        }
        violations.extend(report.details);
        violations
    }
}
