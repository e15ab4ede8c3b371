//! Small dense semidefinite programs.
//!
//! A problem is a linear objective over named scalar variables subject to
//! affine LMI blocks `F₀ + Σ zᵢ Fᵢ ⪰ 0`, linear equalities `Ez = g` and
//! sign constraints (encoded as 1×1 blocks). Problems of this size, with
//! blocks of dimension up to about 12 and at most a few hundred scalars,
//! are solved by an in-repo primal-dual
//! interior-point method (HKM search direction with a Mehrotra corrector,
//! fraction-to-boundary 0.99, optional Ruiz equilibration). The solver is
//! deterministic: a problem, options and the fixed identity-scaled central
//! start produce an identical iterate sequence on every run.

mod ipm;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One affine LMI block `F₀ + Σ zᵢ Fᵢ ⪰ 0`.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub label: String,
    pub dim: usize,
    pub f0: DMatrix<f64>,
    /// Sparse list of `(variable index, Fᵢ)`, each `Fᵢ` symmetric `dim×dim`.
    pub coeffs: Vec<(usize, DMatrix<f64>)>,
}

/// Linear objective, LMI blocks and linear equality constraints.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    vars: Vec<String>,
    objective: Vec<f64>,
    blocks: Vec<LmiBlock>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("block `{label}`: {message}")]
    DimensionMismatch { label: String, message: String },
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Residuals the solver claims at termination.
#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// Smallest eigenvalue of each assembled block at `z`.
    pub block_min_eig: Vec<f64>,
    /// `‖Ez − g‖∞`.
    pub equality_residual: f64,
    /// `Σ tr(Xⱼ Sⱼ)` scaled by `1/(1 + |primal| + |dual|)`.
    pub duality_gap: f64,
}

/// Infeasibility / unboundedness certificate direction.
#[derive(Debug, Clone)]
pub enum RayCertificate {
    /// Dual improving ray `(X̄ⱼ, ȳ)`: `Σ tr(FᵢX̄) + (Eᵀȳ)ᵢ ≈ 0` with
    /// `−Σ tr(F₀X̄) + gᵀȳ > 0`; proves primal infeasibility.
    DualRay {
        blocks: Vec<DMatrix<f64>>,
        eq: Vec<f64>,
    },
    /// Primal improving ray `z̄`: `Σ z̄ᵢFᵢ ⪰ 0`, `Ez̄ = 0`, `cᵀz̄ < 0`.
    PrimalRay(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Dual matrix per block at termination.
    pub dual_blocks: Vec<DMatrix<f64>>,
    /// Equality multipliers at termination.
    pub dual_eq: Vec<f64>,
    pub certificate: Option<RayCertificate>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub scaling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            scaling: true,
        }
    }
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.vars.push(name.into());
        self.objective.push(0.0);
        self.vars.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    /// Set `min Σ coeff·z[var]` terms; later calls overwrite per variable.
    pub fn set_objective(&mut self, terms: &[(usize, f64)]) {
        for &(i, c) in terms {
            self.objective[i] = c;
        }
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn equalities(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.eq_rows, &self.eq_rhs)
    }

    pub fn add_lmi_block(
        &mut self,
        label: impl Into<String>,
        f0: DMatrix<f64>,
        coeffs: Vec<(usize, DMatrix<f64>)>,
    ) -> Result<(), SdpError> {
        let label = label.into();
        let dim = f0.nrows();
        let check = |m: &DMatrix<f64>| -> Result<(), String> {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(format!(
                    "matrix is {}x{}, block dimension is {}",
                    m.nrows(),
                    m.ncols(),
                    dim
                ));
            }
            let asym = (m - m.transpose()).amax();
            if asym > 1e-12 * (1.0 + m.amax()) {
                return Err(format!("matrix is not symmetric (skew part {asym:.2e})"));
            }
            Ok(())
        };
        check(&f0).map_err(|message| SdpError::DimensionMismatch {
            label: label.clone(),
            message,
        })?;
        for (i, m) in &coeffs {
            if *i >= self.vars.len() {
                return Err(SdpError::UnknownVariable(*i));
            }
            check(m).map_err(|message| SdpError::DimensionMismatch {
                label: label.clone(),
                message,
            })?;
        }
        self.blocks.push(LmiBlock {
            label,
            dim,
            f0,
            coeffs,
        });
        Ok(())
    }

    /// Constrain `z[var] ≥ 0` as a 1×1 LMI block.
    pub fn add_nonneg(&mut self, var: usize, label: impl Into<String>) -> Result<(), SdpError> {
        self.add_lmi_block(
            label,
            DMatrix::zeros(1, 1),
            vec![(var, DMatrix::from_element(1, 1, 1.0))],
        )
    }

    /// Add the equality `Σ coeff·z[var] = rhs`.
    pub fn add_equality(&mut self, terms: &[(usize, f64)], rhs: f64) -> Result<(), SdpError> {
        let mut row = vec![0.0; self.vars.len()];
        for &(i, c) in terms {
            if i >= self.vars.len() {
                return Err(SdpError::UnknownVariable(i));
            }
            row[i] += c;
        }
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        Ok(())
    }

    /// Assemble `F₀ + Σ zᵢFᵢ` for a block at an assignment.
    pub fn assemble_block(&self, block: &LmiBlock, z: &[f64]) -> DMatrix<f64> {
        let mut m = block.f0.clone();
        for (i, fi) in &block.coeffs {
            m += fi * z[*i];
        }
        m
    }

    /// Debug dump: variable names, row-major block matrices, equalities.
    pub fn to_json(&self) -> serde_json::Value {
        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            let mut v = Vec::with_capacity(m.nrows() * m.ncols());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v.push(m[(i, j)]);
                }
            }
            v
        };
        serde_json::json!({
            "variables": self.vars,
            "objective": self.objective,
            "blocks": self.blocks.iter().map(|b| serde_json::json!({
                "label": b.label,
                "dim": b.dim,
                "f0": row_major(&b.f0),
                "coeffs": b.coeffs.iter().map(|(i, m)| serde_json::json!({
                    "var": i,
                    "matrix": row_major(m),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "equalities": {
                "rows": self.eq_rows,
                "rhs": self.eq_rhs,
            },
        })
    }
}

/// Solve the problem; see [`SolveOptions`] for tolerances.
pub fn solve(problem: &SdpProblem, options: &SolveOptions) -> Result<SdpSolution, SdpError> {
    ipm::solve(problem, options)
}

/// Residuals recomputed from scratch at a given assignment, never trusting
/// solver-internal bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub block_min_eig: Vec<f64>,
    pub equality_residual: f64,
    pub dual_feasibility: f64,
    pub duality_gap: f64,
}

/// Recompute every residual of `solution` against `problem` data.
pub fn check_solution(problem: &SdpProblem, solution: &SdpSolution) -> ResidualReport {
    let z = &solution.z;
    let block_min_eig: Vec<f64> = problem
        .blocks
        .iter()
        .map(|b| crate::quad::min_eigenvalue(&problem.assemble_block(b, z)))
        .collect();

    let (rows, rhs) = problem.equalities();
    let mut equality_residual = 0.0f64;
    for (row, &g) in rows.iter().zip(rhs) {
        let v: f64 = row.iter().zip(z).map(|(a, b)| a * b).sum();
        equality_residual = equality_residual.max((v - g).abs());
    }

    // Dual feasibility: cᵢ − Σⱼ tr(Fᵢ Xⱼ) − (Eᵀy)ᵢ.
    let mut dual_feasibility = 0.0f64;
    if solution.dual_blocks.len() == problem.blocks.len() {
        for i in 0..problem.num_vars() {
            let mut lhs = 0.0;
            for (b, x) in problem.blocks.iter().zip(&solution.dual_blocks) {
                for (vi, fi) in &b.coeffs {
                    if *vi == i {
                        lhs += fi.dot(x); // tr(FᵢX) for symmetric matrices
                    }
                }
            }
            for (row, &y) in rows.iter().zip(&solution.dual_eq) {
                lhs += row[i] * y;
            }
            dual_feasibility = dual_feasibility.max((problem.objective[i] - lhs).abs());
        }
    }

    // Gap recomputed as |primal − dual| / (1 + |primal| + |dual|).
    let primal: f64 = problem.objective.iter().zip(z).map(|(c, v)| c * v).sum();
    let mut dual = 0.0;
    for (b, x) in problem.blocks.iter().zip(&solution.dual_blocks) {
        dual -= b.f0.dot(x);
    }
    for (&g, &y) in rhs.iter().zip(&solution.dual_eq) {
        dual += g * y;
    }
    let duality_gap = (primal - dual).abs() / (1.0 + primal.abs() + dual.abs());

    ResidualReport {
        block_min_eig,
        equality_residual,
        dual_feasibility,
        duality_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    /// min t s.t. [t] >= 0 -> 0.
    #[test]
    fn scalar_cone() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        p.set_objective(&[(t, 1.0)]);
        p.add_nonneg(t, "t >= 0").unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.z[t].abs() < 1e-6, "t* = {}", sol.z[t]);
    }

    /// min t s.t. [[t,1],[1,t]] >= 0 -> 1 (eigenvalues t ± 1).
    #[test]
    fn toeplitz_2x2() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        p.set_objective(&[(t, 1.0)]);
        p.add_lmi_block(
            "toeplitz",
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            vec![(t, DMatrix::identity(2, 2))],
        )
        .unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.z[t], 1.0, epsilon = 1e-6);

        // check_solution agrees with the solver's own residual claims.
        let report = check_solution(&p, &sol);
        assert!(report.block_min_eig[0] >= -1e-7);
        assert!(report.duality_gap <= 1e-6);
        assert!((report.block_min_eig[0] - sol.residuals.block_min_eig[0]).abs() <= 1e-7);
    }

    /// min x + y s.t. [[x,1],[1,y]] >= 0 -> 2 at x = y = 1 (xy >= 1, AM-GM).
    #[test]
    fn am_gm_corner() {
        let mut p = SdpProblem::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.set_objective(&[(x, 1.0), (y, 1.0)]);
        let mut fx = DMatrix::zeros(2, 2);
        fx[(0, 0)] = 1.0;
        let mut fy = DMatrix::zeros(2, 2);
        fy[(1, 1)] = 1.0;
        p.add_lmi_block(
            "arrow",
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            vec![(x, fx), (y, fy)],
        )
        .unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.objective_value, 2.0, epsilon = 1e-6);
        assert_relative_eq!(sol.z[x], 1.0, epsilon = 1e-4);
        assert_relative_eq!(sol.z[y], 1.0, epsilon = 1e-4);

        // Brute-force grid confirmation of the optimum.
        let mut best = f64::MAX;
        for i in 1..=400 {
            let xv = i as f64 * 0.01;
            let yv = 1.0 / xv;
            best = best.min(xv + yv);
        }
        assert!(sol.objective_value >= best - 1e-4);
    }

    /// t >= 1 and -t >= 0 together are infeasible; a dual ray certifies it.
    #[test]
    fn infeasible_pair() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        p.set_objective(&[(t, 1.0)]);
        p.add_lmi_block("t - 1 >= 0", scalar(-1.0), vec![(t, scalar(1.0))])
            .unwrap();
        p.add_lmi_block("-t >= 0", scalar(0.0), vec![(t, scalar(-1.0))])
            .unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        match sol.certificate {
            Some(RayCertificate::DualRay { blocks, .. }) => {
                // tr(F_t X) = X1 - X2 ~ 0 and -tr(F0 X) = X1 > 0.
                let x1 = blocks[0][(0, 0)];
                let x2 = blocks[1][(0, 0)];
                assert!((x1 - x2).abs() <= 1e-6 * (1.0 + x1.abs()));
                assert!(x1 > 1e-6);
            }
            other => panic!("expected dual ray, got {other:?}"),
        }
    }

    /// min -t s.t. [t] >= 0 is unbounded along t -> infinity.
    #[test]
    fn unbounded_ray() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        p.set_objective(&[(t, -1.0)]);
        p.add_nonneg(t, "t >= 0").unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Unbounded);
        match sol.certificate {
            Some(RayCertificate::PrimalRay(ray)) => assert!(ray[t] > 0.0),
            other => panic!("expected primal ray, got {other:?}"),
        }
    }

    /// Equalities: min x + y s.t. x - y = 3, x >= 0, y >= 0 -> (3, 0).
    #[test]
    fn equality_lp() {
        let mut p = SdpProblem::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.set_objective(&[(x, 1.0), (y, 1.0)]);
        p.add_nonneg(x, "x >= 0").unwrap();
        p.add_nonneg(y, "y >= 0").unwrap();
        p.add_equality(&[(x, 1.0), (y, -1.0)], 3.0).unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.z[x], 3.0, epsilon = 1e-6);
        assert!(sol.z[y].abs() < 1e-6);
        assert!(sol.residuals.equality_residual <= 1e-8);
    }

    #[test]
    fn inconsistent_equalities_infeasible() {
        let mut p = SdpProblem::new();
        let x = p.add_var("x");
        p.add_nonneg(x, "x >= 0").unwrap();
        p.add_equality(&[(x, 1.0)], 1.0).unwrap();
        p.add_equality(&[(x, 1.0)], 2.0).unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn check_solution_reports_violation() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        p.set_objective(&[(t, 1.0)]);
        p.add_lmi_block(
            "toeplitz",
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            vec![(t, DMatrix::identity(2, 2))],
        )
        .unwrap();
        let mut sol = solve(&p, &SolveOptions::default()).unwrap();
        sol.z[t] = 0.5; // hand-built infeasible point
        let report = check_solution(&p, &sol);
        assert_relative_eq!(report.block_min_eig[0], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn empty_problem_all_residuals_zero() {
        let p = SdpProblem::new();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let report = check_solution(&p, &sol);
        assert_eq!(report.equality_residual, 0.0);
        assert_eq!(report.duality_gap, 0.0);
        assert!(report.block_min_eig.is_empty());
    }

    #[test]
    fn deterministic_solutions() {
        let build = || {
            let mut p = SdpProblem::new();
            let x = p.add_var("x");
            let y = p.add_var("y");
            p.set_objective(&[(x, 1.0), (y, 2.0)]);
            let mut fx = DMatrix::zeros(2, 2);
            fx[(0, 0)] = 1.0;
            let mut fy = DMatrix::zeros(2, 2);
            fy[(1, 1)] = 1.0;
            p.add_lmi_block(
                "arrow",
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                vec![(x, fx), (y, fy)],
            )
            .unwrap();
            p
        };
        let s1 = solve(&build(), &SolveOptions::default()).unwrap();
        let s2 = solve(&build(), &SolveOptions::default()).unwrap();
        assert_eq!(s1.z, s2.z);
        assert_eq!(s1.iterations, s2.iterations);
        assert_eq!(s1.objective_value, s2.objective_value);
    }

    #[test]
    fn objective_scale_robustness() {
        let build = |scale: f64| {
            let mut p = SdpProblem::new();
            let x = p.add_var("x");
            let y = p.add_var("y");
            p.set_objective(&[(x, scale), (y, scale)]);
            let mut fx = DMatrix::zeros(2, 2);
            fx[(0, 0)] = 1.0;
            let mut fy = DMatrix::zeros(2, 2);
            fy[(1, 1)] = 1.0;
            p.add_lmi_block(
                "arrow",
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                vec![(x, fx), (y, fy)],
            )
            .unwrap();
            p
        };
        let s1 = solve(&build(1.0), &SolveOptions::default()).unwrap();
        let s2 = solve(&build(1e3), &SolveOptions::default()).unwrap();
        for i in 0..2 {
            assert_relative_eq!(s1.z[i], s2.z[i], max_relative = 1e-6, epsilon = 1e-6);
        }
    }

    #[test]
    fn rejects_asymmetric_block() {
        let mut p = SdpProblem::new();
        let t = p.add_var("t");
        let err = p
            .add_lmi_block(
                "bad",
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
                vec![(t, DMatrix::identity(2, 2))],
            )
            .unwrap_err();
        assert!(matches!(err, SdpError::DimensionMismatch { .. }));
    }
}
