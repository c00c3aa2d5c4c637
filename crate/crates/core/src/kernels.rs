//! Dense-complex numerical kernels shared by the beamforming solvers:
//! generalized Rayleigh-quotient maximization, generalized power iteration
//! (GPI) for products of Rayleigh quotients, nullspace projection,
//! Sherman-Morrison resolvent application, and quartic real-root extraction.
//!
//! Every matrix here is Hermitian positive definite and small, except the
//! lifted phase-vector operands which grow with the IRS size. Those are
//! always "scaled identity plus a few outer products", so the GPI solve goes
//! through a Woodbury identity instead of a dense factorization and each
//! iteration stays O(dim).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{CMatrix, CVector};
use crate::error::{Error, Result};

/// Relative objective-change tolerance for GPI.
pub const GPI_DEFAULT_TOL: f64 = 1e-6;
/// Iteration cap for GPI.
pub const GPI_DEFAULT_MAX_ITER: usize = 100;
/// Singular values below `cutoff * sigma_max` count as zero.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Rotate `v` so its first entry of non-negligible magnitude is real and
/// positive. Makes eigen/GPI outputs reproducible.
pub fn canonical_phase(v: &mut CVector) {
    let max_abs = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return;
    }
    for k in 0..v.len() {
        let z = v[k];
        if z.norm() > 1e-12 * max_abs {
            let rot = (z / z.norm()).conj();
            for x in v.iter_mut() {
                *x *= rot;
            }
            return;
        }
    }
}

/// A Hermitian PSD matrix `ident * I + sum_k coeff_k u_k u_k^H`.
#[derive(Debug, Clone)]
pub struct IdentPlusLowRank {
    pub dim: usize,
    pub ident: f64,
    pub terms: Vec<(f64, CVector)>,
}

impl IdentPlusLowRank {
    pub fn new(dim: usize, ident: f64, terms: Vec<(f64, CVector)>) -> Result<Self> {
        for (c, u) in &terms {
            if u.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "low-rank term has length {} in dimension {dim}",
                    u.len()
                )));
            }
            if !c.is_finite() || *c < 0.0 {
                return Err(Error::InvalidArgument(
                    "low-rank coefficients must be finite and non-negative".into(),
                ));
            }
        }
        Ok(IdentPlusLowRank { dim, ident, terms })
    }
}

/// One operand of a Rayleigh quotient: dense, or structured identity plus
/// low rank.
#[derive(Debug, Clone)]
pub enum HermitianOp {
    Dense(CMatrix),
    LowRank(IdentPlusLowRank),
}

impl HermitianOp {
    pub fn dim(&self) -> usize {
        match self {
            HermitianOp::Dense(m) => m.nrows(),
            HermitianOp::LowRank(lr) => lr.dim,
        }
    }

    /// Real quadratic form `w^H A w`.
    pub fn quad(&self, w: &CVector) -> f64 {
        match self {
            HermitianOp::Dense(m) => w.dotc(&(m * w)).re,
            HermitianOp::LowRank(lr) => {
                let mut q = lr.ident * w.norm_squared();
                for (c, u) in &lr.terms {
                    q += c * u.dotc(w).norm_sqr();
                }
                q
            }
        }
    }

    /// Matrix-vector product `A w`.
    pub fn apply(&self, w: &CVector) -> CVector {
        match self {
            HermitianOp::Dense(m) => m * w,
            HermitianOp::LowRank(lr) => {
                let mut out = w * Complex64::new(lr.ident, 0.0);
                for (c, u) in &lr.terms {
                    let inner = u.dotc(w) * *c;
                    out.axpy(inner, u, Complex64::new(1.0, 0.0));
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            HermitianOp::Dense(m) => m.clone(),
            HermitianOp::LowRank(lr) => {
                let mut m = CMatrix::identity(lr.dim, lr.dim) * Complex64::new(lr.ident, 0.0);
                for (c, u) in &lr.terms {
                    m += (u * u.adjoint()) * Complex64::new(*c, 0.0);
                }
                m
            }
        }
    }

    fn hermitian_defect(&self) -> f64 {
        match self {
            HermitianOp::Dense(m) => {
                let d = m - m.adjoint();
                d.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            HermitianOp::LowRank(_) => 0.0,
        }
    }
}

/// The four operands of a product-of-Rayleigh-quotients problem
/// `max (w^H E w / w^H F w) * (w^H M w / w^H N w)`.
#[derive(Debug, Clone)]
pub struct GpiOperands {
    pub e: HermitianOp,
    pub f: HermitianOp,
    pub m: HermitianOp,
    pub n: HermitianOp,
}

impl GpiOperands {
    pub fn new(e: HermitianOp, f: HermitianOp, m: HermitianOp, n: HermitianOp) -> Result<Self> {
        let dim = e.dim();
        for (name, op) in [("E", &e), ("F", &f), ("M", &m), ("N", &n)] {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "operand {name} has dimension {} (expected {dim})",
                    op.dim()
                )));
            }
            if op.hermitian_defect() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "operand {name} is not Hermitian within 1e-10"
                )));
            }
        }
        Ok(GpiOperands { e, f, m, n })
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }

    /// The product objective at `w` (scale invariant in `w`).
    pub fn objective(&self, w: &CVector) -> Result<f64> {
        let (qe, qf, qm, qn) = (
            self.e.quad(w),
            self.f.quad(w),
            self.m.quad(w),
            self.n.quad(w),
        );
        if !(qf > 0.0) || !(qn > 0.0) || !qe.is_finite() || !qm.is_finite() {
            return Err(Error::NumericalFailure(
                "GPI operand lost positive definiteness".into(),
            ));
        }
        let f = (qe / qf) * (qm / qn);
        if !f.is_finite() {
            return Err(Error::NumericalFailure("non-finite GPI objective".into()));
        }
        Ok(f)
    }
}

/// Solve `(sf * F + sn * N) x = y` where F, N are the denominator operands.
fn solve_denominator(
    f: &HermitianOp,
    n: &HermitianOp,
    sf: f64,
    sn: f64,
    y: &CVector,
) -> Result<CVector> {
    match (f, n) {
        (HermitianOp::LowRank(a), HermitianOp::LowRank(b)) => {
            let alpha = sf * a.ident + sn * b.ident;
            if !(alpha > 0.0) {
                return Err(Error::NumericalFailure(
                    "denominator lost its positive identity part".into(),
                ));
            }
            let mut terms: Vec<(f64, &CVector)> = Vec::new();
            for (c, u) in &a.terms {
                let d = sf * c;
                if d > 0.0 && u.norm_squared() > 0.0 {
                    terms.push((d, u));
                }
            }
            for (c, u) in &b.terms {
                let d = sn * c;
                if d > 0.0 && u.norm_squared() > 0.0 {
                    terms.push((d, u));
                }
            }
            woodbury_solve(alpha, &terms, y)
        }
        _ => {
            let mut dense = f.to_dense() * Complex64::new(sf, 0.0);
            dense += n.to_dense() * Complex64::new(sn, 0.0);
            dense
                .lu()
                .solve(y)
                .ok_or_else(|| Error::NumericalFailure("singular GPI denominator".into()))
        }
    }
}

/// Woodbury solve of `(alpha I + sum d_k u_k u_k^H) x = y`, O(dim * k^2).
fn woodbury_solve(alpha: f64, terms: &[(f64, &CVector)], y: &CVector) -> Result<CVector> {
    let k = terms.len();
    if k == 0 {
        return Ok(y / Complex64::new(alpha, 0.0));
    }
    // S = diag(alpha / d_k) + U^H U
    let mut s = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            s[(i, j)] = terms[i].1.dotc(terms[j].1);
        }
        s[(i, i)] += Complex64::new(alpha / terms[i].0, 0.0);
    }
    let rhs = DMatrix::<Complex64>::from_fn(k, 1, |i, _| terms[i].1.dotc(y));
    let z = s
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("singular Woodbury core".into()))?;
    let mut x = y.clone();
    for (i, (_, u)) in terms.iter().enumerate() {
        x.axpy(-z[(i, 0)], u, Complex64::new(1.0, 0.0));
    }
    Ok(x / Complex64::new(alpha, 0.0))
}

/// Result of a GPI run.
#[derive(Debug, Clone)]
pub struct GpiOutcome {
    /// Best unit-norm iterate seen (including the start).
    pub w: CVector,
    /// Objective at `w`.
    pub objective: f64,
    /// Iterations actually executed.
    pub iterations: usize,
    /// False when the iteration cap was hit before the tolerance.
    pub converged: bool,
}

/// Generalized power iteration for `max (w^H E w / w^H F w)(w^H M w / w^H N w)`
/// over unit vectors.
///
/// Fixed-point update: `w <- normalize(B(w)^-1 A(w) w)` with
/// `A(w) = E / (w^H E w) + M / (w^H M w)` and
/// `B(w) = F / (w^H F w) + N / (w^H N w)`. Tracks the best iterate seen, so
/// the returned objective never falls below the start's.
pub fn gpi_product_rayleigh(
    ops: &GpiOperands,
    w0: &CVector,
    tol: f64,
    max_iter: usize,
) -> Result<GpiOutcome> {
    if w0.len() != ops.dim() {
        return Err(Error::DimensionMismatch(format!(
            "GPI start has length {} in dimension {}",
            w0.len(),
            ops.dim()
        )));
    }
    let nrm = w0.norm();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::InvalidArgument("GPI start must be a unit vector".into()));
    }
    let mut w = w0 / Complex64::new(nrm, 0.0);

    let mut best_w = w.clone();
    let mut best_f = ops.objective(&w)?;
    let mut prev_f = best_f;
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=max_iter {
        iterations = it;
        let (qe, qf, qm, qn) = (
            ops.e.quad(&w),
            ops.f.quad(&w),
            ops.m.quad(&w),
            ops.n.quad(&w),
        );
        if !(qe > 0.0 && qf > 0.0 && qm > 0.0 && qn > 0.0) {
            return Err(Error::NumericalFailure(
                "GPI operand lost positive definiteness".into(),
            ));
        }
        let mut y = ops.e.apply(&w) / Complex64::new(qe, 0.0);
        y += ops.m.apply(&w) / Complex64::new(qm, 0.0);
        let x = solve_denominator(&ops.f, &ops.n, 1.0 / qf, 1.0 / qn, &y)?;
        let xn = x.norm();
        if !(xn > 0.0) || !xn.is_finite() {
            return Err(Error::NumericalFailure("GPI iterate collapsed".into()));
        }
        w = x / Complex64::new(xn, 0.0);
        let f_now = ops.objective(&w)?;
        if f_now > best_f {
            best_f = f_now;
            best_w = w.clone();
        }
        if (f_now - prev_f).abs() <= tol * prev_f.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        prev_f = f_now;
    }

    canonical_phase(&mut best_w);
    Ok(GpiOutcome {
        w: best_w,
        objective: best_f,
        iterations,
        converged,
    })
}

/// Unit vector maximizing `w^H A w / w^H B w` for Hermitian PSD `A` and
/// Hermitian PD `B`: the top eigenvector of the definite pencil `(A, B)`.
///
/// Reduction: `B = L L^H`, then the standard Hermitian eigenproblem on
/// `L^-1 A L^-H`, mapped back and normalized. Deterministic phase.
pub fn max_generalized_rayleigh(num: &CMatrix, den: &CMatrix) -> Result<CVector> {
    let n = num.nrows();
    if num.ncols() != n || den.nrows() != n || den.ncols() != n {
        return Err(Error::DimensionMismatch(
            "generalized Rayleigh operands must be square and same size".into(),
        ));
    }
    let chol = den
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("singular Rayleigh denominator".into()))?;
    let l = chol.l();
    // C = L^-1 A L^-H
    let la = l
        .solve_lower_triangular(num)
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&la.adjoint())
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    // enforce exact Hermitian symmetry before the eigensolver
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = c.symmetric_eigen();
    let mut top = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
    }
    let u = eig.eigenvectors.column(top).into_owned();
    let mut w = chol
        .l()
        .adjoint()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let nrm = w.norm();
    if !(nrm > 0.0) {
        return Err(Error::NumericalFailure("zero Rayleigh eigenvector".into()));
    }
    w /= Complex64::new(nrm, 0.0);
    canonical_phase(&mut w);
    Ok(w)
}

/// Ratio `w^H A w / w^H B w`.
pub fn rayleigh_ratio(num: &CMatrix, den: &CMatrix, w: &CVector) -> f64 {
    w.dotc(&(num * w)).re / w.dotc(&(den * w)).re
}

/// Orthogonal projector onto the nullspace of `g`:
/// `T = I - G^H (G G^H)^+ G`, built from the SVD of `g` with singular values
/// below `PINV_CUTOFF * sigma_max` treated as zero. `T` is Hermitian,
/// idempotent, and satisfies `T G^H = 0`.
pub fn nullspace_projector(g: &CMatrix) -> CMatrix {
    let n = g.ncols();
    let mut t = CMatrix::identity(n, n);
    if g.nrows() == 0 || n == 0 {
        return t;
    }
    let svd = g.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return t;
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > PINV_CUTOFF * smax {
            let row = v_t.row(k);
            // T -= v_k v_k^H
            for i in 0..n {
                for j in 0..n {
                    t[(i, j)] -= row[i].conj() * row[j];
                }
            }
        }
    }
    t
}

/// Apply `-(a a^H + lambda I)^-1` to `b` through the Sherman-Morrison
/// identity: `-(1/lambda) (b - a (a^H b) / (lambda + a^H a))`.
///
/// Errors when `lambda` sits within `1e-6 (1 + a^H a)` of either pole
/// (`0` and `-a^H a`); callers treat that as "skip this root".
pub fn rank_one_resolvent_apply(a: &CVector, lambda: f64, b: &CVector) -> Result<CVector> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(
            "resolvent vectors must share a dimension".into(),
        ));
    }
    let a1 = a.norm_squared();
    let margin = 1e-6 * (1.0 + a1);
    if lambda.abs() <= margin || (lambda + a1).abs() <= margin {
        return Err(Error::ResolventPole { lambda });
    }
    let ahb = a.dotc(b);
    let mut out = b.clone();
    out.axpy(
        -ahb / Complex64::new(lambda + a1, 0.0),
        a,
        Complex64::new(1.0, 0.0),
    );
    Ok(out * Complex64::new(-1.0 / lambda, 0.0))
}

/// Real coefficients of the norm-constraint quartic in the Lagrange
/// multiplier, together with the defining inner-product scalars.
///
/// `coeffs[i]` multiplies `lambda^(4-i)`.
#[derive(Debug, Clone)]
pub struct QuarticCoefficients {
    pub coeffs: [f64; 5],
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub e1: f64,
}

impl QuarticCoefficients {
    /// Plain coefficient constructor for generic root finding.
    pub fn from_coefficients(coeffs: [f64; 5]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("quartic coefficients must be finite".into()));
        }
        if coeffs[0] == 0.0 {
            return Err(Error::InvalidArgument("quartic leading coefficient is zero".into()));
        }
        Ok(QuarticCoefficients {
            coeffs,
            a1: 0.0,
            b1: 0.0,
            c1: 0.0,
            d1: 0.0,
            e1: 0.0,
        })
    }

    /// Build the constraint quartic
    /// `nr l^4 + 2 nr a1 l^3 + (nr a1^2 - b1) l^2 - 2 (c1 - e1) l + d1 - a1^2 b1 = 0`
    /// from the scalars `a1 = a^H a`, `b1 = b^H b`, `c1 = b1 a1`,
    /// `d1 = (b^H a)(a^H a)(a^H b)`, `e1 = |a^H b|^2`. These are exactly the
    /// coefficients produced by expanding
    /// `b^H (a a^H + l I)^-2 b = nr` with the Sherman-Morrison inverse; its
    /// roots satisfy the norm constraint identically.
    pub fn from_constraint_scalars(
        nr: f64,
        a1: f64,
        b1: f64,
        c1: f64,
        d1: f64,
        e1: f64,
    ) -> Result<Self> {
        if !(nr > 0.0) {
            return Err(Error::InvalidArgument(
                "constraint quartic needs a positive element count".into(),
            ));
        }
        let slack = 1e-9 * (1.0 + a1 * b1);
        if a1 < -slack || b1 < -slack || e1 > a1 * b1 + slack {
            return Err(Error::InvalidArgument(
                "constraint scalars violate their Cauchy-Schwarz bounds".into(),
            ));
        }
        let coeffs = [
            nr,
            2.0 * nr * a1,
            nr * a1 * a1 - b1,
            -2.0 * (c1 - e1),
            d1 - a1 * a1 * b1,
        ];
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite quartic coefficients".into()));
        }
        Ok(QuarticCoefficients {
            coeffs,
            a1,
            b1,
            c1,
            d1,
            e1,
        })
    }

    /// Evaluate the quartic at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        ((4.0 * c[0] * x + 3.0 * c[1]) * x + 2.0 * c[2]) * x + c[3]
    }

    /// Magnitude scale of the polynomial evaluated at `x` (sum of absolute
    /// term magnitudes), used to make the residual test relative.
    pub fn residual_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs
            .iter()
            .fold(0.0_f64, |acc, &c| acc * ax + c.abs())
            .max(f64::MIN_POSITIVE)
    }
}

/// All real roots of the quartic, via companion-matrix eigenvalues with a
/// Newton polish. Complex pairs are filtered on relative imaginary part;
/// repeated roots collapse to one entry. Returned ascending.
pub fn quartic_real_roots(q: &QuarticCoefficients) -> Result<Vec<f64>> {
    let c = &q.coeffs;
    let lead = c[0];
    // monic form
    let p = [c[1] / lead, c[2] / lead, c[3] / lead, c[4] / lead];
    let mut companion = DMatrix::<f64>::zeros(4, 4);
    companion[(0, 3)] = -p[3];
    companion[(1, 3)] = -p[2];
    companion[(2, 3)] = -p[1];
    companion[(3, 3)] = -p[0];
    for i in 1..4 {
        companion[(i, i - 1)] = 1.0;
    }
    let eigs = companion.complex_eigenvalues();

    let mut roots: Vec<f64> = Vec::new();
    for z in eigs.iter() {
        let scale = z.norm().max(1.0);
        if z.im.abs() > 1e-8 * scale {
            continue;
        }
        // polish on the real axis
        let mut x = z.re;
        for _ in 0..3 {
            let d = q.eval_derivative(x);
            if d.abs() < f64::MIN_POSITIVE {
                break;
            }
            let step = q.eval(x) / d;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        if !x.is_finite() {
            continue;
        }
        if q.eval(x).abs() > 1e-8 * q.residual_scale(x) {
            continue;
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-8 * (1.0 + a.abs().max(b.abs())));
    Ok(roots)
}
