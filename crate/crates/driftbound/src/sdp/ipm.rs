//! Infeasible-start primal-dual interior-point method for dense LMI
//! problems, HKM direction with a Mehrotra corrector.
//!
//! Pipeline: Ruiz-equilibrate the data (power-of-two factors, so scaling is
//! exact), eliminate linear equalities through an orthonormal null-space
//! basis, run the predictor-corrector iteration on the reduced problem, and
//! map variables, duals and certificates back to the original space.

use super::{
    LmiBlock, RayCertificate, Residuals, SdpError, SdpProblem, SdpSolution, SdpStatus, SolveOptions,
};
use nalgebra::{DMatrix, DVector};

/// Fraction-to-boundary step factor.
const STEP_FRACTION: f64 = 0.99;
/// Ray-certificate quality required to declare infeasible/unbounded.
const RAY_TOL: f64 = 1e-7;
/// Iterate magnitude that triggers ray checks.
const RAY_MAGNITUDE: f64 = 1e5;

fn round_pow2(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        1.0
    } else {
        2f64.powi(x.log2().round() as i32)
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Per-block precomputed products `X·G_l` and `S⁻¹·G_l`.
type BlockProducts = (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>);

fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    sym(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MAX, f64::min)
}

/// Largest step `α` keeping `P + α ΔP ≻ 0`, via `λ_min(L⁻¹ ΔP L⁻ᵀ)`.
fn max_step(p: &DMatrix<f64>, dp: &DMatrix<f64>) -> Option<f64> {
    let chol = p.clone().cholesky()?;
    let l = chol.l();
    let li_dp = l.solve_lower_triangular(dp)?;
    let w = l.solve_lower_triangular(&li_dp.transpose())?;
    let lam = min_eig(&w);
    if lam >= 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(-1.0 / lam)
    }
}

struct Scaled {
    c: Vec<f64>,
    blocks: Vec<LmiBlock>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    /// Variable scales: z_original = d ∘ z_scaled.
    d: Vec<f64>,
    /// Per-block scales.
    s: Vec<f64>,
    /// Objective scale: objective_original = omega · objective_scaled.
    omega: f64,
}

/// Ruiz equilibration with power-of-two factors; a no-op when disabled.
fn equilibrate(problem: &SdpProblem, enabled: bool) -> Scaled {
    let m = problem.num_vars();
    let mut blocks: Vec<LmiBlock> = problem.blocks().to_vec();
    let (rows0, rhs0) = problem.equalities();
    let mut eq_rows: Vec<Vec<f64>> = rows0.to_vec();
    let mut eq_rhs: Vec<f64> = rhs0.to_vec();
    let mut d = vec![1.0f64; m];
    let mut s = vec![1.0f64; blocks.len()];

    if enabled {
        for _ in 0..8 {
            // Block (row-group) scaling keeps each block's data near unit.
            for (j, b) in blocks.iter_mut().enumerate() {
                let mut r: f64 = b.f0.amax();
                for (_, f) in &b.coeffs {
                    r = r.max(f.amax());
                }
                if r > 0.0 {
                    let f = round_pow2(1.0 / r.sqrt()).min(1e150);
                    if f != 1.0 {
                        b.f0 *= f;
                        for (_, fm) in b.coeffs.iter_mut() {
                            *fm *= f;
                        }
                        s[j] *= f;
                    }
                }
            }
            for (row, rhs) in eq_rows.iter_mut().zip(eq_rhs.iter_mut()) {
                let r = row.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                if r > 0.0 {
                    let f = round_pow2(1.0 / r.sqrt()).min(1e150);
                    for v in row.iter_mut() {
                        *v *= f;
                    }
                    *rhs *= f;
                }
            }
            // Variable (column) scaling.
            for i in 0..m {
                let mut cmax = 0.0f64;
                for b in &blocks {
                    for (vi, f) in &b.coeffs {
                        if *vi == i {
                            cmax = cmax.max(f.amax());
                        }
                    }
                }
                for row in &eq_rows {
                    cmax = cmax.max(row[i].abs());
                }
                if cmax > 0.0 {
                    let f = round_pow2(1.0 / cmax.sqrt()).min(1e150);
                    if f != 1.0 {
                        for b in blocks.iter_mut() {
                            for (vi, fm) in b.coeffs.iter_mut() {
                                if *vi == i {
                                    *fm *= f;
                                }
                            }
                        }
                        for row in eq_rows.iter_mut() {
                            row[i] *= f;
                        }
                        d[i] *= f;
                    }
                }
            }
        }
    }

    let mut c: Vec<f64> = problem
        .objective()
        .iter()
        .zip(&d)
        .map(|(ci, di)| ci * di)
        .collect();
    let cmax = c.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let omega = if enabled && cmax > 0.0 {
        round_pow2(cmax)
    } else {
        1.0
    };
    for v in c.iter_mut() {
        *v /= omega;
    }

    Scaled {
        c,
        blocks,
        eq_rows,
        eq_rhs,
        d,
        s,
        omega,
    }
}

struct Reduction {
    /// Particular solution of `Ez = g` (scaled space).
    zp: DVector<f64>,
    /// Orthonormal null-space basis columns, m × q.
    nbasis: DMatrix<f64>,
    inconsistent: bool,
    /// Farkas direction when inconsistent: y with Eᵀy = 0, gᵀy > 0.
    farkas_y: Vec<f64>,
}

fn reduce_equalities(scaled: &Scaled) -> Reduction {
    let m = scaled.c.len();
    let p = scaled.eq_rows.len();
    if p == 0 {
        return Reduction {
            zp: DVector::zeros(m),
            nbasis: DMatrix::identity(m, m),
            inconsistent: false,
            farkas_y: Vec::new(),
        };
    }
    let e = DMatrix::from_fn(p, m, |i, j| scaled.eq_rows[i][j]);
    let g = DVector::from_vec(scaled.eq_rhs.clone());
    let svd = e.clone().svd_unordered(true, true);
    let u = svd.u.clone().unwrap();
    let vt = svd.v_t.clone().unwrap();
    let sigma = svd.singular_values.clone();
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let rank_tol = smax * 1e-12 * (m.max(p) as f64);

    // Min-norm particular solution z_p = V Σ⁺ Uᵀ g.
    let utg = u.transpose() * &g;
    let mut coeff = DVector::zeros(sigma.len());
    for i in 0..sigma.len() {
        if sigma[i] > rank_tol {
            coeff[i] = utg[i] / sigma[i];
        }
    }
    let zp = vt.transpose() * coeff;
    let resid = &e * &zp - &g;
    let rnorm = resid.amax();
    if rnorm > 1e-9 * (1.0 + g.amax()) {
        // Inconsistent system; resid lies in null(Eᵀ) and gᵀresid < 0 for
        // resid = Ezp − g, so −resid is the Farkas direction.
        let y: Vec<f64> = resid.iter().map(|v| -v).collect();
        return Reduction {
            zp,
            nbasis: DMatrix::zeros(m, 0),
            inconsistent: true,
            farkas_y: y,
        };
    }

    // Null-space basis: rows of Vᵀ beyond the rank, plus any missing
    // dimensions when p < m (svd_unordered yields min(p, m) rows of Vᵀ).
    let mut null_cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..sigma.len() {
        if sigma[i] <= rank_tol {
            null_cols.push(vt.row(i).transpose());
        }
    }
    if vt.nrows() < m {
        // Complete the basis by Gram-Schmidt against the V rows.
        let mut basis: Vec<DVector<f64>> = (0..vt.nrows()).map(|i| vt.row(i).transpose()).collect();
        for k in 0..m {
            let mut v = DVector::zeros(m);
            v[k] = 1.0;
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
            let norm = v.norm();
            if norm > 1e-8 {
                let v = v / norm;
                basis.push(v.clone());
                if sigma.len() < m {
                    null_cols.push(v);
                }
            }
        }
    }
    let q = null_cols.len();
    let mut nbasis = DMatrix::zeros(m, q);
    for (l, col) in null_cols.iter().enumerate() {
        nbasis.set_column(l, col);
    }
    Reduction {
        zp,
        nbasis,
        inconsistent: false,
        farkas_y: Vec::new(),
    }
}

struct CoreBlock {
    g0: DMatrix<f64>,
    /// Sparse `(w-index, coefficient matrix)` pairs.
    gs: Vec<(usize, DMatrix<f64>)>,
}

enum CoreOutcome {
    Converged,
    Infeasible,
    Unbounded,
    Failed,
}

struct CoreState {
    w: DVector<f64>,
    x: Vec<DMatrix<f64>>,
    iterations: usize,
    outcome: CoreOutcome,
    primal_ray: Option<DVector<f64>>,
    dual_ray: Option<Vec<DMatrix<f64>>>,
}

/// Core iteration on `min cᵀw  s.t.  G0ⱼ + Σ w_l G_lⱼ ⪰ 0`.
fn run_core(c: &DVector<f64>, blocks: &[CoreBlock], options: &SolveOptions) -> CoreState {
    let q = c.len();
    let nblocks = blocks.len();
    let total_dim: usize = blocks.iter().map(|b| b.g0.nrows()).sum();
    let tol = options.tolerance;

    let mut w = DVector::zeros(q);
    // Identity-scaled central start: S dominates the data norms so the
    // first primal steps stay sane; X balances the objective scale.
    let eta = {
        let mut e = 1.0f64;
        for (l, cl) in c.iter().enumerate() {
            let mut gmax = 0.0f64;
            for b in blocks {
                for (bl, g) in &b.gs {
                    if *bl == l {
                        gmax = gmax.max(g.amax());
                    }
                }
            }
            if gmax > 0.0 {
                e = e.max(cl.abs() / gmax);
            }
        }
        e
    };
    let mut s_mats: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| {
            let mut scale = 1.0 + b.g0.amax();
            for (_, g) in &b.gs {
                scale = scale.max(g.amax());
            }
            DMatrix::identity(b.g0.nrows(), b.g0.nrows()) * scale
        })
        .collect();
    let mut x_mats: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| DMatrix::identity(b.g0.nrows(), b.g0.nrows()) * eta)
        .collect();

    let cnorm = 1.0 + c.amax();
    let g0norm: Vec<f64> = blocks.iter().map(|b| 1.0 + b.g0.amax()).collect();

    let mut stall = 0usize;
    // Best iterate seen so far, by the worst of the three residuals; it is
    // restored at every exit so late-iteration dual wandering near a
    // degenerate optimum cannot spoil an already-good solve.
    let mut best_score = f64::MAX;
    let mut best_iterate: Option<(DVector<f64>, Vec<DMatrix<f64>>)> = None;
    for iter in 0..options.max_iterations {
        // Residuals.
        let aw: Vec<DMatrix<f64>> = blocks
            .iter()
            .map(|b| {
                let mut m = b.g0.clone();
                for (l, g) in &b.gs {
                    m += g * w[*l];
                }
                m
            })
            .collect();
        let rp: Vec<DMatrix<f64>> = aw.iter().zip(&s_mats).map(|(a, s)| a - s).collect();
        let mut adjoint = DVector::zeros(q);
        for (b, x) in blocks.iter().zip(&x_mats) {
            for (l, g) in &b.gs {
                adjoint[*l] += g.dot(x);
            }
        }
        let rd = &adjoint - c;

        let mu = x_mats
            .iter()
            .zip(&s_mats)
            .map(|(x, s)| trace_prod(x, s))
            .sum::<f64>()
            / total_dim.max(1) as f64;

        let pinf = rp
            .iter()
            .zip(&g0norm)
            .map(|(r, gn)| r.amax() / gn)
            .fold(0.0f64, f64::max);
        let dinf = rd.amax() / (cnorm + adjoint.amax());
        let pobj = c.dot(&w);
        let dobj: f64 = -blocks
            .iter()
            .zip(&x_mats)
            .map(|(b, x)| b.g0.dot(x))
            .sum::<f64>();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        if std::env::var("DRIFTBOUND_IPM_TRACE").is_ok() {
            eprintln!(
                "iter {iter:3}  mu {mu:9.2e}  pinf {pinf:9.2e}  dinf {dinf:9.2e}  gap {gap:9.2e}  pobj {pobj:12.5e}  dobj {dobj:12.5e}"
            );
        }
        let score = pinf.max(dinf).max(gap);
        if score < best_score {
            best_score = score;
            best_iterate = Some((w.clone(), x_mats.clone()));
        }
        if pinf <= tol && dinf <= tol && gap <= tol {
            return CoreState {
                w,
                x: x_mats,
                iterations: iter,
                outcome: CoreOutcome::Converged,
                primal_ray: None,
                dual_ray: None,
            };
        }

        // Ray certificates once the iterates blow up.
        let xnorm: f64 = x_mats.iter().map(|x| x.amax()).fold(0.0, f64::max);
        if xnorm > RAY_MAGNITUDE {
            let xbar: Vec<DMatrix<f64>> = x_mats.iter().map(|x| x / xnorm).collect();
            let mut adj_vec: DVector<f64> = DVector::zeros(q);
            for (b, x) in blocks.iter().zip(&xbar) {
                for (l, g) in &b.gs {
                    adj_vec[*l] += g.dot(x);
                }
            }
            let adj_inf = adj_vec.amax();
            let dirobj: f64 = -blocks
                .iter()
                .zip(&xbar)
                .map(|(b, x)| b.g0.dot(x))
                .sum::<f64>();
            // A dual improving ray certifies primal infeasibility only once
            // the dual side itself is essentially feasible.
            if adj_inf <= RAY_TOL && dirobj > RAY_TOL && dinf <= 1e-6 {
                return CoreState {
                    w,
                    x: x_mats,
                    iterations: iter,
                    outcome: CoreOutcome::Infeasible,
                    primal_ray: None,
                    dual_ray: Some(xbar),
                };
            }
        }
        let wnorm = w.amax();
        if wnorm > RAY_MAGNITUDE {
            let wbar = &w / wnorm;
            let mut dirmin = f64::MAX;
            for b in blocks {
                let mut m = DMatrix::zeros(b.g0.nrows(), b.g0.nrows());
                for (l, g) in &b.gs {
                    m += g * wbar[*l];
                }
                dirmin = dirmin.min(min_eig(&m));
            }
            let cobj = c.dot(&wbar);
            // A primal improving ray that stays (asymptotically) in the
            // cone; the loose feasibility guard keeps weakly infeasible
            // escapes, which carry the same ray, classified here too.
            if dirmin >= -RAY_TOL && cobj < -RAY_TOL && pinf <= 1e-2 {
                return CoreState {
                    w,
                    x: x_mats,
                    iterations: iter,
                    outcome: CoreOutcome::Unbounded,
                    primal_ray: Some(wbar),
                    dual_ray: None,
                };
            }
        }

        // Factorizations and Schur complement.
        let mut chols = Vec::with_capacity(nblocks);
        let mut ok = true;
        for s in &s_mats {
            match s.clone().cholesky() {
                Some(c) => chols.push(c),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            let (bw, bx) = best_iterate.take().unwrap_or((w, x_mats));
            return CoreState {
                w: bw,
                x: bx,
                iterations: iter,
                outcome: CoreOutcome::Failed,
                primal_ray: None,
                dual_ray: None,
            };
        }
        let sinv: Vec<DMatrix<f64>> = chols.iter().map(|c| c.inverse()).collect();

        // Per block precompute P_l = X G_l, Q_l = S⁻¹ G_l.
        let mut m_mat = DMatrix::zeros(q, q);
        let mut pq: Vec<BlockProducts> = Vec::with_capacity(nblocks);
        for (j, b) in blocks.iter().enumerate() {
            let p_l: Vec<DMatrix<f64>> = b.gs.iter().map(|(_, g)| &x_mats[j] * g).collect();
            let q_l: Vec<DMatrix<f64>> = b.gs.iter().map(|(_, g)| &sinv[j] * g).collect();
            for (a, (la, _)) in b.gs.iter().enumerate() {
                for (bb, (lb, _)) in b.gs.iter().enumerate().skip(a) {
                    let v = 0.5 * (trace_prod(&q_l[bb], &p_l[a]) + trace_prod(&p_l[bb], &q_l[a]));
                    m_mat[(*la, *lb)] += v;
                    if la != lb {
                        m_mat[(*lb, *la)] += v;
                    }
                }
            }
            pq.push((p_l, q_l));
        }
        // Tiny deterministic regularisation keeps the factorization alive
        // when blocks become nearly rank-deficient at the optimum; two
        // refinement passes remove the residual it would otherwise leave in
        // the dual-feasibility equations.
        let reg = 1e-13 * (1.0 + m_mat.amax());
        let m_reg = {
            let mut m = m_mat.clone();
            for i in 0..q {
                m[(i, i)] += reg;
            }
            m
        };
        let m_fact = m_reg.clone().cholesky();
        let m_lu = if m_fact.is_none() {
            Some(m_reg.clone().lu())
        } else {
            None
        };
        let solve_m = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
            let base = |r: &DVector<f64>| -> Option<DVector<f64>> {
                match (&m_fact, &m_lu) {
                    (Some(ch), _) => Some(ch.solve(r)),
                    (None, Some(lu)) => lu.solve(r),
                    _ => None,
                }
            };
            let mut x = base(rhs)?;
            for _ in 0..2 {
                let resid = rhs - &m_mat * &x;
                let corr = base(&resid)?;
                x += corr;
            }
            Some(x)
        };

        // K_j = sym(X Rp S⁻¹) enters both predictor and corrector rhs.
        let k_mats: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|j| sym(&(&x_mats[j] * &rp[j] * &sinv[j])))
            .collect();

        let rhs_for = |mu_target: f64, corr: Option<&Vec<DMatrix<f64>>>| -> DVector<f64> {
            let mut h = -c.clone();
            for (j, b) in blocks.iter().enumerate() {
                for (idx, (l, g)) in b.gs.iter().enumerate() {
                    let mut v = -g.dot(&k_mats[j]);
                    if mu_target != 0.0 {
                        v += mu_target * pq[j].1[idx].trace();
                    }
                    if let Some(cs) = corr {
                        v -= g.dot(&cs[j]);
                    }
                    h[*l] += v;
                }
            }
            h
        };

        let direction = |dw: &DVector<f64>,
                         mu_target: f64,
                         corr: Option<&Vec<DMatrix<f64>>>|
         -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
            let mut ds = Vec::with_capacity(nblocks);
            let mut dx = Vec::with_capacity(nblocks);
            for (j, b) in blocks.iter().enumerate() {
                let mut dsj = rp[j].clone();
                for (l, g) in &b.gs {
                    dsj += g * dw[*l];
                }
                let mut dxj =
                    &sinv[j] * mu_target - &x_mats[j] - sym(&(&x_mats[j] * &dsj * &sinv[j]));
                if let Some(cs) = corr {
                    dxj -= &cs[j];
                }
                ds.push(dsj);
                dx.push(sym(&dxj));
            }
            (ds, dx)
        };

        // Predictor (affine scaling).
        let h_aff = rhs_for(0.0, None);
        let dw_aff = match solve_m(&h_aff) {
            Some(v) => v,
            None => {
                let (bw, bx) = best_iterate.take().unwrap_or((w, x_mats));
                return CoreState {
                    w: bw,
                    x: bx,
                    iterations: iter,
                    outcome: CoreOutcome::Failed,
                    primal_ray: None,
                    dual_ray: None,
                };
            }
        };
        let (ds_aff, dx_aff) = direction(&dw_aff, 0.0, None);
        let step_p_aff = step_length(&s_mats, &ds_aff);
        let step_d_aff = step_length(&x_mats, &dx_aff);

        let mu_aff = {
            let mut t = 0.0;
            for j in 0..nblocks {
                let xs = &x_mats[j] + &dx_aff[j] * step_d_aff;
                let ss = &s_mats[j] + &ds_aff[j] * step_p_aff;
                t += trace_prod(&xs, &ss);
            }
            (t / total_dim.max(1) as f64).max(0.0)
        };
        let sigma = if mu > 0.0 {
            ((mu_aff / mu).powi(3)).clamp(1e-8, 0.999)
        } else {
            0.1
        };

        // Corrector.
        let corr: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|j| sym(&(&dx_aff[j] * &ds_aff[j] * &sinv[j])))
            .collect();
        let h_cc = rhs_for(sigma * mu, Some(&corr));
        let dw = match solve_m(&h_cc) {
            Some(v) => v,
            None => dw_aff.clone(),
        };
        let (ds, dx) = direction(&dw, sigma * mu, Some(&corr));
        let mut alpha_p = step_length(&s_mats, &ds);
        let mut alpha_d = step_length(&x_mats, &dx);

        // Safeguard: near-singular Schur systems can emit enormous
        // directions; backtrack both steps until mu grows at most tenfold,
        // which keeps the iterate near the central path.
        let mu_cap = 10.0 * mu.max(tol);
        for _ in 0..90 {
            let mut t = 0.0;
            for j in 0..nblocks {
                let xs = &x_mats[j] + &dx[j] * alpha_d;
                let ss = &s_mats[j] + &ds[j] * alpha_p;
                t += trace_prod(&xs, &ss);
            }
            if t / total_dim.max(1) as f64 <= mu_cap {
                break;
            }
            alpha_p *= 0.5;
            alpha_d *= 0.5;
        }

        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            stall += 1;
            if stall >= 3 {
                // No further progress is possible in finite precision.
                let (bw, bx) = best_iterate.take().unwrap_or((w, x_mats));
                return CoreState {
                    w: bw,
                    x: bx,
                    iterations: iter,
                    outcome: CoreOutcome::Failed,
                    primal_ray: None,
                    dual_ray: None,
                };
            }
        } else {
            stall = 0;
        }

        w += &dw * alpha_p;
        for j in 0..nblocks {
            s_mats[j] += &ds[j] * alpha_p;
            x_mats[j] += &dx[j] * alpha_d;
            s_mats[j] = sym(&s_mats[j]);
            x_mats[j] = sym(&x_mats[j]);
        }
    }

    let (bw, bx) = best_iterate.unwrap_or((w, x_mats));
    CoreState {
        w: bw,
        x: bx,
        iterations: options.max_iterations,
        outcome: CoreOutcome::Failed,
        primal_ray: None,
        dual_ray: None,
    }
}

fn step_length(mats: &[DMatrix<f64>], dirs: &[DMatrix<f64>]) -> f64 {
    let mut alpha = 1.0f64;
    for (m, d) in mats.iter().zip(dirs) {
        let a = max_step(m, d).unwrap_or(0.0);
        alpha = alpha.min(STEP_FRACTION * a).min(1.0);
    }
    alpha.max(0.0)
}

pub(super) fn solve(problem: &SdpProblem, options: &SolveOptions) -> Result<SdpSolution, SdpError> {
    // Scale, then eliminate equalities.
    let scaled = equilibrate(problem, options.scaling);
    let red = reduce_equalities(&scaled);
    if red.inconsistent {
        let z: Vec<f64> = red.zp.iter().zip(&scaled.d).map(|(v, d)| v * d).collect();
        let certificate = RayCertificate::DualRay {
            blocks: problem
                .blocks()
                .iter()
                .map(|b| DMatrix::zeros(b.dim, b.dim))
                .collect(),
            eq: red.farkas_y.clone(),
        };
        return Ok(finish(
            problem,
            z,
            Vec::new(),
            red.farkas_y,
            0,
            SdpStatus::Infeasible,
            Some(certificate),
        ));
    }

    // Reduced blocks over w, with unconstrained-variable handling.
    let q_full = red.nbasis.ncols();
    let mut core_blocks: Vec<CoreBlock> = Vec::with_capacity(scaled.blocks.len());
    let mut used = vec![false; q_full];
    for b in &scaled.blocks {
        let dim = b.dim;
        let mut g0 = b.f0.clone();
        for (i, f) in &b.coeffs {
            g0 += f * red.zp[*i];
        }
        let mut gs = Vec::new();
        for (l, used_l) in used.iter_mut().enumerate() {
            let mut g = DMatrix::zeros(dim, dim);
            let mut any = false;
            for (i, f) in &b.coeffs {
                let w = red.nbasis[(*i, l)];
                if w != 0.0 {
                    g += f * w;
                    any = true;
                }
            }
            if any && g.amax() > 1e-14 * (1.0 + b.f0.amax()) {
                *used_l = true;
                gs.push((l, g));
            }
        }
        core_blocks.push(CoreBlock { g0, gs });
    }
    let c_full = {
        let c = DVector::from_vec(scaled.c.clone());
        red.nbasis.transpose() * c
    };

    // A variable absent from every block is free: unbounded if its reduced
    // cost is nonzero, otherwise pinned to zero.
    for l in 0..q_full {
        if !used[l] && c_full[l].abs() > 1e-12 {
            let ray_w = {
                let mut v = DVector::zeros(q_full);
                v[l] = -c_full[l].signum();
                v
            };
            let ray_z: Vec<f64> = (&red.nbasis * &ray_w)
                .iter()
                .zip(&scaled.d)
                .map(|(v, d)| v * d)
                .collect();
            let z: Vec<f64> = red.zp.iter().zip(&scaled.d).map(|(v, d)| v * d).collect();
            return Ok(finish(
                problem,
                z,
                Vec::new(),
                Vec::new(),
                0,
                SdpStatus::Unbounded,
                Some(RayCertificate::PrimalRay(ray_z)),
            ));
        }
    }

    // Keep only used columns.
    let keep: Vec<usize> = (0..q_full).filter(|&l| used[l]).collect();
    let remap: Vec<Option<usize>> = {
        let mut r = vec![None; q_full];
        for (new, &old) in keep.iter().enumerate() {
            r[old] = Some(new);
        }
        r
    };
    let q = keep.len();
    let c_core = DVector::from_iterator(q, keep.iter().map(|&l| c_full[l]));
    for b in core_blocks.iter_mut() {
        for (l, _) in b.gs.iter_mut() {
            *l = remap[*l].unwrap();
        }
    }

    // Constant blocks are decided here and dropped: with no variable
    // coefficients they are either trivially satisfied or unsatisfiable on
    // the whole equality-feasible subspace.
    let mut const_violation: Option<usize> = None;
    let mut kept_blocks = Vec::with_capacity(core_blocks.len());
    let mut kept_index: Vec<usize> = Vec::new();
    for (j, b) in core_blocks.into_iter().enumerate() {
        if b.gs.is_empty() {
            if min_eig(&b.g0) < -1e-9 * (1.0 + b.g0.amax()) && const_violation.is_none() {
                const_violation = Some(j);
            }
        } else {
            kept_blocks.push(b);
            kept_index.push(j);
        }
    }
    let core_blocks = kept_blocks;
    if let Some(j) = const_violation {
        let z: Vec<f64> = red.zp.iter().zip(&scaled.d).map(|(v, d)| v * d).collect();
        // Farkas direction: the violated eigenvector of the constant block.
        let blocks_ray: Vec<DMatrix<f64>> = problem
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, b)| {
                if k == j {
                    let m = problem.assemble_block(b, &z);
                    let eig = ((&m + m.transpose()) * 0.5).symmetric_eigen();
                    let mut best = 0usize;
                    for i in 0..eig.eigenvalues.len() {
                        if eig.eigenvalues[i] < eig.eigenvalues[best] {
                            best = i;
                        }
                    }
                    let v = eig.eigenvectors.column(best).clone_owned();
                    &v * v.transpose()
                } else {
                    DMatrix::zeros(b.dim, b.dim)
                }
            })
            .collect();
        let eq = recover_eq_duals(problem, &blocks_ray, false);
        return Ok(finish(
            problem,
            z,
            Vec::new(),
            Vec::new(),
            0,
            SdpStatus::Infeasible,
            Some(RayCertificate::DualRay {
                blocks: blocks_ray,
                eq,
            }),
        ));
    }

    let core = if q == 0 && core_blocks.is_empty() {
        CoreState {
            w: DVector::zeros(0),
            x: Vec::new(),
            iterations: 0,
            outcome: CoreOutcome::Converged,
            primal_ray: None,
            dual_ray: None,
        }
    } else if core_blocks.is_empty() {
        // No blocks at all: with zero reduced costs the origin is optimal.
        CoreState {
            w: DVector::zeros(q),
            x: Vec::new(),
            iterations: 0,
            outcome: CoreOutcome::Converged,
            primal_ray: None,
            dual_ray: None,
        }
    } else {
        run_core(&c_core, &core_blocks, options)
    };

    // Map w back to z (scaled, then original variable scales).
    let mut w_full = DVector::zeros(q_full);
    for (new, &old) in keep.iter().enumerate() {
        w_full[old] = core.w[new];
    }
    let z_scaled = &red.zp + &red.nbasis * &w_full;
    let z: Vec<f64> = z_scaled.iter().zip(&scaled.d).map(|(v, d)| v * d).collect();

    // Dual matrices back to original space: X_orig = ω s_j X̃, with zero
    // duals for constant blocks that were dropped.
    let dual_blocks: Vec<DMatrix<f64>> = {
        let mut full: Vec<DMatrix<f64>> = problem
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        for (x, &j) in core.x.iter().zip(&kept_index) {
            full[j] = x * (scaled.omega * scaled.s[j]);
        }
        full
    };

    // Equality multipliers by least squares on cᵢ − Σ tr(FᵢX) = (Eᵀy)ᵢ.
    let dual_eq = recover_eq_duals(problem, &dual_blocks, true);

    let status = match core.outcome {
        CoreOutcome::Converged => SdpStatus::Optimal,
        CoreOutcome::Infeasible => SdpStatus::Infeasible,
        CoreOutcome::Unbounded => SdpStatus::Unbounded,
        CoreOutcome::Failed => SdpStatus::NumericalFailure,
    };

    let certificate = match core.outcome {
        CoreOutcome::Infeasible => core.dual_ray.map(|xs| {
            let mut blocks: Vec<DMatrix<f64>> = problem
                .blocks()
                .iter()
                .map(|b| DMatrix::zeros(b.dim, b.dim))
                .collect();
            for (x, &j) in xs.iter().zip(&kept_index) {
                blocks[j] = x * scaled.s[j];
            }
            let eq = recover_eq_duals(problem, &blocks, false);
            RayCertificate::DualRay { blocks, eq }
        }),
        CoreOutcome::Unbounded => core.primal_ray.map(|wbar| {
            let mut w_full = DVector::zeros(q_full);
            for (new, &old) in keep.iter().enumerate() {
                w_full[old] = wbar[new];
            }
            let dir = &red.nbasis * &w_full;
            RayCertificate::PrimalRay(dir.iter().zip(&scaled.d).map(|(v, d)| v * d).collect())
        }),
        _ => None,
    };

    Ok(finish(
        problem,
        z,
        dual_blocks,
        dual_eq,
        core.iterations,
        status,
        certificate,
    ))
}

/// Least-squares equality multipliers from stationarity: `Eᵀy = rhs` with
/// `rhs = c − Σ tr(FᵢX)` for solutions, or `−Σ tr(FᵢX̄)` for dual rays.
fn recover_eq_duals(
    problem: &SdpProblem,
    dual_blocks: &[DMatrix<f64>],
    include_objective: bool,
) -> Vec<f64> {
    let (rows, _) = problem.equalities();
    let p = rows.len();
    if p == 0 {
        return Vec::new();
    }
    let m = problem.num_vars();
    let mut rhs = DVector::zeros(m);
    if include_objective {
        for i in 0..m {
            rhs[i] = problem.objective()[i];
        }
    }
    for (b, x) in problem.blocks().iter().zip(dual_blocks) {
        for (vi, f) in &b.coeffs {
            rhs[*vi] -= f.dot(x);
        }
    }
    let et = DMatrix::from_fn(m, p, |i, k| rows[k][i]);
    et.svd_unordered(true, true)
        .solve(&rhs, 1e-12)
        .map(|v| v.iter().cloned().collect())
        .unwrap_or_else(|_| vec![0.0; p])
}

/// Assemble the final solution with residuals recomputed on original data.
fn finish(
    problem: &SdpProblem,
    z: Vec<f64>,
    dual_blocks: Vec<DMatrix<f64>>,
    dual_eq: Vec<f64>,
    iterations: usize,
    status: SdpStatus,
    certificate: Option<RayCertificate>,
) -> SdpSolution {
    let block_min_eig: Vec<f64> = problem
        .blocks()
        .iter()
        .map(|b| min_eig(&problem.assemble_block(b, &z)))
        .collect();
    let (rows, rhs) = problem.equalities();
    let mut equality_residual = 0.0f64;
    for (row, &g) in rows.iter().zip(rhs) {
        let v: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
        equality_residual = equality_residual.max((v - g).abs());
    }
    let pobj: f64 = problem.objective().iter().zip(&z).map(|(c, v)| c * v).sum();
    let mut dobj = 0.0;
    if dual_blocks.len() == problem.blocks().len() {
        for (b, x) in problem.blocks().iter().zip(&dual_blocks) {
            dobj -= b.f0.dot(x);
        }
        for (&g, &y) in rhs.iter().zip(&dual_eq) {
            dobj += g * y;
        }
    }
    let duality_gap = if dual_blocks.len() == problem.blocks().len() {
        (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs())
    } else {
        f64::NAN
    };

    SdpSolution {
        status,
        objective_value: pobj,
        iterations,
        residuals: Residuals {
            block_min_eig,
            equality_residual,
            duality_gap,
        },
        z,
        dual_blocks,
        dual_eq,
        certificate,
    }
}
