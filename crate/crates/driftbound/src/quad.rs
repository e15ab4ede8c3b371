//! Quadratic forms, the generator applied to quadratic functions, PSD
//! embeddings, S-procedure templates and level-set geometry.
//!
//! Candidate Lyapunov functions are `V(x) = xᵀRx − 2y₀ᵀx` (equivalently
//! `(x−x₀)ᵀR(x−x₀)` up to a constant when `y₀ = Rx₀`). Applying the
//! generator of an affine-rate network to `V` yields another quadratic,
//! computed symbolically by [`apply_generator`] and checked against the
//! defining sum [`evaluate_direct`].

use crate::network::{NetworkError, RateLaw, ReactionNetwork};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative tolerance scale used by the geometric predicates here.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("order-2 transition {index} has ||R r_b|| = {norm:.3e}; generator output is cubic")]
    NonVanishingNonlinear { index: usize, norm: f64 },
    #[error("state has negative component at index {0}")]
    NegativeState(usize),
    #[error("quadratic term is only marginally definite (|lambda_max| = {0:.3e})")]
    SingularT(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// `f(x) = xᵀTx + 2uᵀx + β` with `T` stored symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    t: DMatrix<f64>,
    u: DVector<f64>,
    beta: f64,
}

impl QuadraticForm {
    /// Builds the form, symmetrising `t` as `(T + Tᵀ)/2`.
    pub fn new(t: DMatrix<f64>, u: DVector<f64>, beta: f64) -> Self {
        assert_eq!(t.nrows(), t.ncols(), "T must be square");
        assert_eq!(t.nrows(), u.len(), "T and u dimensions differ");
        let t = (&t + t.transpose()) * 0.5;
        Self { t, u, beta }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            t: DMatrix::zeros(n, n),
            u: DVector::zeros(n),
            beta: 0.0,
        }
    }

    /// Constant form `f ≡ c` in dimension `n`.
    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            t: DMatrix::zeros(n, n),
            u: DVector::zeros(n),
            beta: c,
        }
    }

    /// Monomial `x_i`.
    pub fn mean(n: usize, i: usize) -> Self {
        let mut u = DVector::zeros(n);
        u[i] = 0.5;
        Self {
            t: DMatrix::zeros(n, n),
            u,
            beta: 0.0,
        }
    }

    /// Monomial `x_i²`.
    pub fn second_moment(n: usize, i: usize) -> Self {
        let mut t = DMatrix::zeros(n, n);
        t[(i, i)] = 1.0;
        Self {
            t,
            u: DVector::zeros(n),
            beta: 0.0,
        }
    }

    /// Monomial `x_i x_j` for `i ≠ j`.
    pub fn cross_moment(n: usize, i: usize, j: usize) -> Self {
        assert_ne!(i, j);
        let mut t = DMatrix::zeros(n, n);
        t[(i, j)] = 0.5;
        t[(j, i)] = 0.5;
        Self {
            t,
            u: DVector::zeros(n),
            beta: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.t * x)[(0, 0)] + 2.0 * self.u.dot(x) + self.beta
    }

    pub fn eval_state(&self, state: &[i64]) -> f64 {
        let x = DVector::from_iterator(state.len(), state.iter().map(|&v| v as f64));
        self.eval(&x)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            t: &self.t * c,
            u: &self.u * c,
            beta: self.beta * c,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            t: &self.t + &other.t,
            u: &self.u + &other.u,
            beta: self.beta + other.beta,
        }
    }

    /// The form in scaled coordinates `x = D x̃`: `f̃(x̃) = f(Dx̃)` with
    /// `T̃ = DTD`, `ũ = Du`, `β̃ = β` for diagonal `D`.
    pub fn change_coords(&self, d: &DVector<f64>) -> Self {
        let n = self.dim();
        assert_eq!(d.len(), n);
        let mut t = self.t.clone();
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] *= d[i] * d[j];
            }
        }
        let u = DVector::from_iterator(n, self.u.iter().zip(d.iter()).map(|(u, s)| u * s));
        Self {
            t,
            u,
            beta: self.beta,
        }
    }

    /// Degree of the form: 2, 1 or 0 up to `tol` on the coefficients.
    pub fn degree(&self, tol: f64) -> u32 {
        if self.t.amax() > tol {
            2
        } else if self.u.amax() > tol {
            1
        } else {
            0
        }
    }
}

/// A quadratic Lyapunov candidate `(R, y₀)` with `x₀ = R⁻¹y₀` recovered when
/// `R` is comfortably invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpec {
    pub r: DMatrix<f64>,
    pub y0: DVector<f64>,
    pub x0: Option<DVector<f64>>,
}

impl LyapunovSpec {
    /// Builds the spec from `(R, y₀)`, recovering `x₀` only when
    /// `λ_min(R) > 10⁻⁶ λ_max(R)`; otherwise the `y₀` form is kept.
    pub fn from_r_y0(r: DMatrix<f64>, y0: DVector<f64>) -> Self {
        let r = (&r + r.transpose()) * 0.5;
        let eig = r.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        let x0 = if lmax > 0.0 && lmin > 1e-6 * lmax {
            r.clone().lu().solve(&y0)
        } else {
            None
        };
        Self { r, y0, x0 }
    }

    pub fn from_r_x0(r: DMatrix<f64>, x0: DVector<f64>) -> Self {
        let r = (&r + r.transpose()) * 0.5;
        let y0 = &r * &x0;
        Self {
            r,
            y0,
            x0: Some(x0),
        }
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    /// `V(x) = xᵀRx − 2y₀ᵀx` (the `x₀ᵀRx₀` shift is dropped; it cancels in
    /// every generator difference).
    pub fn v(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.r * x)[(0, 0)] - 2.0 * self.y0.dot(x)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            r: &self.r * c,
            y0: &self.y0 * c,
            x0: self.x0.clone(),
        }
    }
}

/// `{x : (x − center)ᵀ M (x − center) ≤ radius²}` with `M ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    pub radius2: f64,
}

impl Ellipsoid {
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        let d = x - &self.center;
        (d.transpose() * &self.shape * &d)[(0, 0)] <= self.radius2
    }

    /// Semi-axis lengths, longest direction last (eigenvalue order of `M`).
    pub fn semi_axes(&self) -> Vec<f64> {
        let eig = self.shape.clone().symmetric_eigen();
        let mut axes: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| (self.radius2 / l).sqrt())
            .collect();
        axes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        axes
    }
}

/// Super-level set classification of `{x : qv(x) ≥ c}`.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSet {
    Ellipsoid(Ellipsoid),
    Empty,
    /// `T` has a nonnegative eigenvalue; the set is unbounded in `ℝⁿ`.
    Unbounded,
}

/// Classify `{x : qv(x) ≥ c}`.
///
/// With `T ≺ 0` the set is the ellipsoid centred at `−T⁻¹u` with shape `−T`
/// and `radius² = peak − c`, `peak = β − uᵀT⁻¹u`; empty when `peak < c`.
/// A `T` that fails definiteness only marginally is reported as
/// [`QuadError::SingularT`], not guessed.
pub fn level_set_ellipsoid(qv: &QuadraticForm, c: f64) -> Result<LevelSet, QuadError> {
    let eig = qv.t.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    // Certificates live at an arbitrary positive scale, so definiteness is
    // judged relative to the spectrum itself.
    let tol = DEFAULT_TOL * scale;
    if lmax > tol {
        return Ok(LevelSet::Unbounded);
    }
    if scale == 0.0 || lmax.abs() <= tol {
        return Err(QuadError::SingularT(lmax.abs()));
    }
    let center =
        qv.t.clone()
            .lu()
            .solve(&(-&qv.u))
            .ok_or(QuadError::SingularT(lmax.abs()))?;
    let peak = qv.beta + qv.u.dot(&center);
    if peak < c {
        return Ok(LevelSet::Empty);
    }
    Ok(LevelSet::Ellipsoid(Ellipsoid {
        center,
        shape: -qv.t.clone(),
        radius2: peak - c,
    }))
}

/// `f(x) ≥ 0 ∀x ⟺ [[T, u], [uᵀ, β]] ⪰ 0`; this builds that matrix.
pub fn psd_embedding(f: &QuadraticForm) -> DMatrix<f64> {
    let n = f.dim();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&f.t);
    for i in 0..n {
        m[(i, n)] = f.u[i];
        m[(n, i)] = f.u[i];
    }
    m[(n, n)] = f.beta;
    m
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MAX, f64::min)
}

/// S-procedure template for `main(x) − λ·g(x)`, affine in `λ`.
///
/// PSD-ness of `instantiate(λ)` with `λ ≥ 0` certifies `main(x) ≥ 0`
/// wherever `g(x) ≥ 0` (outside `D = {g ≤ 0}`).
#[derive(Debug, Clone)]
pub struct SProcedureTemplate {
    pub base: DMatrix<f64>,
    pub region: DMatrix<f64>,
}

pub fn s_procedure_combine(main: &QuadraticForm, region: &QuadraticForm) -> SProcedureTemplate {
    SProcedureTemplate {
        base: psd_embedding(main),
        region: psd_embedding(region),
    }
}

impl SProcedureTemplate {
    pub fn instantiate(&self, lambda: f64) -> DMatrix<f64> {
        &self.base - &self.region * lambda
    }
}

/// Symbolic generator action: `QV` as a quadratic form in `x` for
/// `V(x) = xᵀRx − 2y₀ᵀx`.
///
/// Affine transitions contribute exactly. An order-2 transition requires
/// `R r_b ≈ 0`; its residual `−2(y₀ᵀr_b)·q_b(x)` is still quadratic and is
/// included whenever `y₀ᵀr_b` is above floating-point noise, so the result
/// always agrees with [`evaluate_direct`].
pub fn apply_generator(
    network: &ReactionNetwork,
    spec: &LyapunovSpec,
) -> Result<QuadraticForm, QuadError> {
    let n = network.dim();
    assert_eq!(spec.dim(), n, "spec dimension must match network");
    let drift = network.drift_matrices(false)?;
    let r = &spec.r;
    let y0 = &spec.y0;

    // T = AᵀR + RA,  u = RB + ½ Σ (rₖᵀRrₖ) aₖ − Aᵀy₀,  β = Σ cₖ rₖᵀRrₖ − 2Bᵀy₀.
    let mut t = drift.a.transpose() * r + r * &drift.a;
    let mut u = r * &drift.b - drift.a.transpose() * y0;
    let mut beta = -2.0 * drift.b.dot(y0);

    let r_scale = r.amax();
    for (k, tr) in network.transitions().iter().enumerate() {
        let rv = DVector::from_iterator(n, tr.delta.iter().map(|&d| d as f64));
        let w = r * &rv;
        let quad = rv.dot(&w); // rᵀRr
        match tr.rate {
            RateLaw::Constant(c) => beta += c * quad,
            RateLaw::Linear { species, coeff } => u[species] += 0.5 * coeff * quad,
            RateLaw::Bimolecular { i, j, coeff } => {
                let wn = w.amax();
                if wn > DEFAULT_TOL * (1.0 + r_scale) {
                    return Err(QuadError::NonVanishingNonlinear { index: k, norm: wn });
                }
                // With R r_b = 0 the term q_b(x)(2r_bᵀRx + r_bᵀRr_b) vanishes
                // and only −2(y₀ᵀr_b) q_b(x) can survive.
                let d = y0.dot(&rv);
                let noise = 64.0 * f64::EPSILON * (1.0 + y0.amax()) * rv.amax() * n as f64;
                if d.abs() > noise {
                    let s = -2.0 * d * coeff;
                    if i == j {
                        // q = coeff·x_i(x_i − 1)
                        t[(i, i)] += s;
                        u[i] -= 0.5 * s;
                    } else {
                        t[(i, j)] += 0.5 * s;
                        t[(j, i)] += 0.5 * s;
                    }
                }
            }
        }
    }
    Ok(QuadraticForm::new(t, u, beta))
}

/// Ground-truth drift: `Σₖ qₖ(x)(V(x+rₖ) − V(x))` evaluated term by term.
pub fn evaluate_direct(
    network: &ReactionNetwork,
    spec: &LyapunovSpec,
    state: &[i64],
) -> Result<f64, QuadError> {
    if let Some(i) = state.iter().position(|&x| x < 0) {
        return Err(QuadError::NegativeState(i));
    }
    let n = network.dim();
    let x = DVector::from_iterator(n, state.iter().map(|&v| v as f64));
    let q = network.propensity(state)?;
    let mut total = 0.0;
    for (k, tr) in network.transitions().iter().enumerate() {
        if q[k] == 0.0 {
            continue;
        }
        let xr = &x + DVector::from_iterator(n, tr.delta.iter().map(|&d| d as f64));
        total += q[k] * (spec.v(&xr) - spec.v(&x));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testnet::{gene, nonlin3};
    use approx::assert_relative_eq;

    fn identity_spec(n: usize) -> LyapunovSpec {
        LyapunovSpec::from_r_y0(DMatrix::identity(n, n), DVector::zeros(n))
    }

    #[test]
    fn gene_generator_with_identity() {
        let qv = apply_generator(&gene(), &identity_spec(2)).unwrap();
        let expect_t = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -0.2]);
        assert_relative_eq!(qv.t(), &expect_t, epsilon = 1e-12);
        assert_relative_eq!(qv.u()[0], 101.0, epsilon = 1e-12);
        assert_relative_eq!(qv.u()[1], 0.05, epsilon = 1e-12);
        assert_relative_eq!(qv.beta(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_spec_gives_zero_form() {
        let spec = LyapunovSpec::from_r_y0(DMatrix::zeros(2, 2), DVector::zeros(2));
        let qv = apply_generator(&gene(), &spec).unwrap();
        assert_eq!(qv, QuadraticForm::zero(2));
        assert_eq!(evaluate_direct(&gene(), &spec, &[5, 7]).unwrap(), 0.0);
    }

    #[test]
    fn direct_drift_values() {
        let spec = identity_spec(2);
        assert_relative_eq!(
            evaluate_direct(&gene(), &spec, &[0, 0]).unwrap(),
            100.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            evaluate_direct(&gene(), &spec, &[1, 0]).unwrap(),
            300.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn symbolic_matches_direct_on_grid() {
        let spec = LyapunovSpec::from_r_y0(
            DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 1.3]),
            DVector::from_row_slice(&[3.0, -2.0]),
        );
        let net = gene();
        let qv = apply_generator(&net, &spec).unwrap();
        for m in 0..8 {
            for p in 0..8 {
                let direct = evaluate_direct(&net, &spec, &[m, p]).unwrap();
                let sym = qv.eval_state(&[m, p]);
                assert_relative_eq!(direct, sym, epsilon = 1e-9, max_relative = 1e-11);
            }
        }
    }

    /// R with r_b = (-1,-1,1) in its null space: the bimolecular term is
    /// absent and QV is bit-identical when the order-2 constant changes.
    #[test]
    fn bimolecular_elimination_invariance() {
        // v = (-1,-1,1); R = I - vvᵀ/3 annihilates v exactly in this basis.
        let v = DVector::from_row_slice(&[-1.0, -1.0, 1.0]);
        let r = DMatrix::identity(3, 3) - &v * v.transpose() / 3.0;
        // y₀ = R z lies in range(R) so y₀ᵀ r_b = 0 up to noise.
        let y0 = &r * DVector::from_row_slice(&[1.0, 2.0, 0.5]);
        let spec = LyapunovSpec::from_r_y0(r, y0);
        let qv1 = apply_generator(&nonlin3(1.0), &spec).unwrap();
        let qv5 = apply_generator(&nonlin3(5.0), &spec).unwrap();
        assert_eq!(qv1, qv5);

        for state in [[0, 0, 0], [2, 3, 1], [10, 4, 7]] {
            let direct = evaluate_direct(&nonlin3(1.0), &spec, &state).unwrap();
            assert_relative_eq!(qv1.eval_state(&state), direct, epsilon = 1e-8);
        }
    }

    #[test]
    fn bimolecular_residual_term_included() {
        // R annihilates v but y₀ does not: the quadratic residual must be
        // kept for the symbolic form to agree with the direct sum.
        let v = DVector::from_row_slice(&[-1.0, -1.0, 1.0]);
        let r = DMatrix::identity(3, 3) - &v * v.transpose() / 3.0;
        let y0 = DVector::from_row_slice(&[0.4, -0.3, 1.1]);
        let spec = LyapunovSpec::from_r_y0(r, y0);
        let net = nonlin3(2.0);
        let qv = apply_generator(&net, &spec).unwrap();
        for state in [[1, 1, 0], [4, 2, 3], [7, 9, 2]] {
            let direct = evaluate_direct(&net, &spec, &state).unwrap();
            assert_relative_eq!(qv.eval_state(&state), direct, epsilon = 1e-7);
        }
    }

    #[test]
    fn non_vanishing_nonlinear_rejected() {
        let err = apply_generator(&nonlin3(1.0), &identity_spec(3)).unwrap_err();
        assert!(matches!(
            err,
            QuadError::NonVanishingNonlinear { index: 4, .. }
        ));
    }

    #[test]
    fn embedding_examples() {
        // x² -> [[1,0],[0,0]] is PSD.
        let f = QuadraticForm::new(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1), 0.0);
        let m = psd_embedding(&f);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(min_eigenvalue(&m) >= -1e-12);

        // (x-1)² -> [[1,-1],[-1,1]] is PSD.
        let f = QuadraticForm::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, -1.0),
            1.0,
        );
        assert!(min_eigenvalue(&psd_embedding(&f)) >= -1e-12);

        // -x² + 2x - 2 = -(x-1)² - 1: embedding indefinite and -f >= 1.
        let f = QuadraticForm::new(
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, 1.0),
            -2.0,
        );
        assert!(min_eigenvalue(&psd_embedding(&f)) < -1e-3);
        for i in -20..=20 {
            let x = DVector::from_element(1, i as f64 * 0.25);
            assert!(-f.eval(&x) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn s_procedure_1d_grid_check() {
        // main = x² - 1 over the region {g >= 0} with g = x² - 1 (outside
        // the unit interval D = {g <= 0}). λ = 1 gives the zero matrix,
        // which is PSD, so the template certifies main >= 0 wherever g >= 0.
        let main = QuadraticForm::new(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1), -1.0);
        let g = main.clone();
        let tpl = s_procedure_combine(&main, &g);
        assert_eq!(tpl.instantiate(0.0), psd_embedding(&main));
        let inst = tpl.instantiate(1.0);
        assert!(min_eigenvalue(&inst) >= -1e-12);
        for i in -40..=40 {
            let x = DVector::from_element(1, i as f64 * 0.1);
            if g.eval(&x) >= 0.0 {
                assert!(main.eval(&x) >= -1e-12, "claim fails at x = {x}");
            }
        }
    }

    #[test]
    fn level_set_unit_ball() {
        let qv = QuadraticForm::new(-DMatrix::identity(2, 2), DVector::zeros(2), 0.0);
        match level_set_ellipsoid(&qv, -1.0).unwrap() {
            LevelSet::Ellipsoid(e) => {
                assert_relative_eq!(e.radius2, 1.0);
                assert!(e.center.amax() < 1e-12);
                assert_relative_eq!(e.shape, DMatrix::identity(2, 2));
            }
            other => panic!("expected ellipsoid, got {other:?}"),
        }
    }

    #[test]
    fn level_set_completed_square() {
        // T = -diag(1,4), u = (1,0), β = 0, c = -2:
        // peak = β - uᵀT⁻¹u = 1, center (1, 0), radius² = 3.
        let qv = QuadraticForm::new(
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -4.0]),
            DVector::from_row_slice(&[1.0, 0.0]),
            0.0,
        );
        match level_set_ellipsoid(&qv, -2.0).unwrap() {
            LevelSet::Ellipsoid(e) => {
                assert_relative_eq!(e.center[0], 1.0, epsilon = 1e-12);
                assert_relative_eq!(e.center[1], 0.0, epsilon = 1e-12);
                assert_relative_eq!(e.radius2, 3.0, epsilon = 1e-12);
                assert_relative_eq!(e.shape[(0, 0)], 1.0);
                assert_relative_eq!(e.shape[(1, 1)], 4.0);
            }
            other => panic!("expected ellipsoid, got {other:?}"),
        }
    }

    #[test]
    fn level_set_indefinite_unbounded() {
        let qv = QuadraticForm::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DVector::zeros(2),
            0.0,
        );
        assert_eq!(level_set_ellipsoid(&qv, 0.0).unwrap(), LevelSet::Unbounded);
    }

    #[test]
    fn level_set_empty_and_singular() {
        let qv = QuadraticForm::new(-DMatrix::identity(1, 1), DVector::zeros(1), 0.0);
        assert_eq!(level_set_ellipsoid(&qv, 1.0).unwrap(), LevelSet::Empty);

        let qv = QuadraticForm::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0), 0.0);
        assert!(matches!(
            level_set_ellipsoid(&qv, 0.0),
            Err(QuadError::SingularT(_))
        ));
    }

    #[test]
    fn level_set_membership_iff_value() {
        let qv = QuadraticForm::new(
            DMatrix::from_row_slice(2, 2, &[-2.0, 0.3, 0.3, -0.5]),
            DVector::from_row_slice(&[1.0, -0.7]),
            4.0,
        );
        let c = -3.0;
        let ellipsoid = match level_set_ellipsoid(&qv, c).unwrap() {
            LevelSet::Ellipsoid(e) => e,
            other => panic!("{other:?}"),
        };
        let mut s = 0x243f6a8885a308d3u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let x = DVector::from_row_slice(&[next() * 20.0 - 10.0, next() * 20.0 - 10.0]);
            let inside = ellipsoid.contains(&x);
            let val = qv.eval(&x);
            if (val - c).abs() > 1e-9 {
                assert_eq!(inside, val >= c, "x = {x:?}, val = {val}");
            }
        }
    }

    #[test]
    fn x0_recovery_threshold() {
        let spec = LyapunovSpec::from_r_y0(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            DVector::from_row_slice(&[2.0, 3.0]),
        );
        let x0 = spec.x0.as_ref().unwrap();
        assert_relative_eq!(x0[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x0[1], 3.0, epsilon = 1e-12);

        let singular = LyapunovSpec::from_r_y0(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DVector::from_row_slice(&[1.0, 0.0]),
        );
        assert!(singular.x0.is_none());
    }
}
