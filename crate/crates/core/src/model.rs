//! State-space and port-Hamiltonian data model, the structured matrices built from it,
//! and the spectral function `gamma(xi, omega)`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::radius;
use crate::scalar::Real;
use nalgebra::ComplexField;
use nalgebra::{Cholesky, Complex, DMatrix, LU};

/// Default relative rank tolerance for the controllability/observability tests.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Linear time-invariant model `x' = Ax + Bu`, `y = Cx + Du` with `m` inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel<T: Real> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
    /// Result of the numerical Kalman rank tests.
    pub minimal: bool,
}

fn check_dims<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>, d: &DMatrix<T>) -> Result<()> {
    let n = a.nrows();
    let m = d.nrows();
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch("n and m must be positive".into()));
    }
    let ok = [("A", a.shape(), (n, n)), ("B", b.shape(), (n, m)), ("C", c.shape(), (m, n)), ("D", d.shape(), (m, m))];
    for (name, got, want) in ok {
        if got != want {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {}x{}",
                got.0, got.1, want.0, want.1
            )));
        }
    }
    for (name, mat) in [("A", a), ("B", b), ("C", c), ("D", d)] {
        if !linalg::is_finite(mat) {
            return Err(Error::NonFiniteEntry(name.into()));
        }
    }
    Ok(())
}

/// Checks dimensions and finiteness and sets `minimal` from the Kalman rank tests
/// (`sigma_k > rank_tol * sigma_1`).
pub fn validate_model<T: Real>(
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
    d: DMatrix<T>,
    rank_tol: T,
) -> Result<StateSpaceModel<T>> {
    check_dims(&a, &b, &c, &d)?;
    if !(rank_tol > T::zero()) {
        return Err(Error::InvariantViolation("rank tolerance must be positive".into()));
    }
    let mut model = StateSpaceModel { a, b, c, d, minimal: false };
    let (rc, ro) = model.kalman_ranks(rank_tol);
    model.minimal = rc == model.n() && ro == model.n();
    Ok(model)
}

impl<T: Real> StateSpaceModel<T> {
    /// Validated model with the default rank tolerance.
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, d: DMatrix<T>) -> Result<Self> {
        validate_model(a, b, c, d, T::c(DEFAULT_RANK_TOL))
    }

    /// Scalar model `{a, b, c, d}`.
    pub fn scalar(a: T, b: T, c: T, d: T) -> Self {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, d),
        )
        .expect("finite scalar model")
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    /// Ranks of the controllability and observability matrices.
    pub fn kalman_ranks(&self, rank_tol: T) -> (usize, usize) {
        let n = self.n();
        let m = self.m();
        let mut ctrb = DMatrix::zeros(n, n * m);
        let mut blk = self.b.clone();
        for k in 0..n {
            ctrb.view_mut((0, k * m), (n, m)).copy_from(&blk);
            blk = &self.a * blk;
        }
        let mut obsv = DMatrix::zeros(n * m, n);
        let mut blk = self.c.clone();
        for k in 0..n {
            obsv.view_mut((k * m, 0), (m, n)).copy_from(&blk);
            blk *= &self.a;
        }
        (linalg::rank(&ctrb, rank_tol), linalg::rank(&obsv, rank_tol))
    }

    pub fn require_minimal(&self) -> Result<()> {
        if self.minimal {
            return Ok(());
        }
        let (c, o) = self.kalman_ranks(T::c(DEFAULT_RANK_TOL));
        Err(Error::NotMinimal { controllable_rank: c, observable_rank: o, n: self.n() })
    }

    /// `D^T + D`.
    pub fn d_sym(&self) -> DMatrix<T> {
        &self.d + self.d.transpose()
    }

    /// Frobenius norm of the stacked data `[[A, B], [C, D]]`, at least one.
    pub fn scale(&self) -> T {
        let s = self.a.norm_squared() + self.b.norm_squared() + self.c.norm_squared() + self.d.norm_squared();
        s.sqrt().max(T::one())
    }

    /// The matrix `[[-A, -B], [C, D]]` whose Hermitian part is `W(I, M) / 2`.
    pub fn system_matrix(&self) -> DMatrix<T> {
        let (n, m) = (self.n(), self.m());
        let mut s = DMatrix::zeros(n + m, n + m);
        s.view_mut((0, 0), (n, n)).copy_from(&(-&self.a));
        s.view_mut((0, n), (n, m)).copy_from(&(-&self.b));
        s.view_mut((n, 0), (m, n)).copy_from(&self.c);
        s.view_mut((n, n), (m, m)).copy_from(&self.d);
        s
    }

    /// Model `{T A T^-1, T B, C T^-1, D}` for an invertible state transformation `T`.
    pub fn transform(&self, t: &DMatrix<T>) -> Result<Self> {
        let lu = LU::new(t.clone());
        let tinv =
            lu.try_inverse().ok_or_else(|| Error::NotPositiveDefinite("state transformation is singular".into()))?;
        Ok(Self {
            a: t * &self.a * &tinv,
            b: t * &self.b,
            c: &self.c * &tinv,
            d: self.d.clone(),
            minimal: self.minimal,
        })
    }
}

/// Returns `W(X, M) = [[-A^T X - X A, C^T - X B], [C - B^T X, D^T + D]]`.
pub fn assemble_w<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = model.n();
    let m = model.m();
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("X is {}x{}, expected {n}x{n}", x.nrows(), x.ncols())));
    }
    let w11 = linalg::symmetrize(&(-(model.a.transpose() * x) - x * &model.a));
    let w12 = model.c.transpose() - x * &model.b;
    let mut w = DMatrix::zeros(n + m, n + m);
    w.view_mut((0, 0), (n, n)).copy_from(&w11);
    w.view_mut((0, n), (n, m)).copy_from(&w12);
    w.view_mut((n, 0), (m, n)).copy_from(&w12.transpose());
    w.view_mut((n, n), (m, m)).copy_from(&linalg::symmetrize(&model.d_sym()));
    Ok(w)
}

/// Evaluates `Phi = T_xi(iw)^H + T_xi(iw)` with
/// `T_xi(s) = C((s - xi/2) I - A)^{-1} B + D - xi I/2`, and `gamma = lambda_min(Phi)`.
pub fn eval_gamma<T: Real>(model: &StateSpaceModel<T>, xi: T, omega: T) -> Result<(CMatrix<T>, T)> {
    let n = model.n();
    let half = T::c(0.5);
    let z = Complex::new(-xi * half, omega);
    let mut r = linalg::to_complex(&(-&model.a));
    for i in 0..n {
        r[(i, i)] += z;
    }
    let rnorm = r.iter().fold(T::zero(), |acc, v| acc.max(v.modulus()));
    let lu = LU::new(r);
    let u = lu.u();
    let pivot = (0..n).fold(T::huge(), |acc, i| acc.min(u[(i, i)].modulus()));
    let singular = || Error::ResolventSingular { xi: xi.f(), omega: omega.f() };
    if pivot <= T::c(16.0) * T::default_epsilon() * rnorm.max(T::tiny()) {
        return Err(singular());
    }
    let sol = lu.solve(&linalg::to_complex(&model.b)).ok_or_else(singular)?;
    let mut tf = linalg::to_complex(&model.c) * sol;
    for i in 0..model.m() {
        for j in 0..model.m() {
            tf[(i, j)] += Complex::new(model.d[(i, j)], T::zero());
        }
        tf[(i, i)] -= Complex::new(xi * half, T::zero());
    }
    let phi = tf.adjoint() + &tf;
    if phi.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(singular());
    }
    let gamma = linalg::herm_lambda_min(&phi);
    Ok((phi, gamma))
}

/// Returns `M_xi = {A + xi I/2, B, C, D - xi I/2}`; a negative `xi` gives the
/// outward shift used for passivation.
pub fn shift_model<T: Real>(model: &StateSpaceModel<T>, xi: T) -> StateSpaceModel<T> {
    let h = xi * T::c(0.5);
    let mut out = model.clone();
    for i in 0..model.n() {
        out.a[(i, i)] += h;
    }
    for i in 0..model.m() {
        out.d[(i, i)] -= h;
    }
    out
}

/// Returns the Hamiltonian matrix `H_xi` of the shifted model.
pub fn assemble_hamiltonian<T: Real>(model: &StateSpaceModel<T>, xi: T) -> Result<DMatrix<T>> {
    let n = model.n();
    let shifted = shift_model(model, xi);
    let r = linalg::symmetrize(&shifted.d_sym());
    let lmin = linalg::sym_eig(&r).values.iter().fold(T::huge(), |acc, v| acc.min(v.abs()));
    let rscale = linalg::norm2(&r).max(T::one());
    let chol = LU::new(r.clone());
    if lmin <= T::c(1e-12) * rscale {
        return Err(Error::SingularDBlock { xi: xi.f(), lambda_min: linalg::lambda_min(&r).f() });
    }
    let rinv_c = chol.solve(&model.c).expect("nonsingular D block");
    let rinv_bt = chol.solve(&model.b.transpose()).expect("nonsingular D block");
    let f = &shifted.a - &model.b * &rinv_c;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&f);
    h.view_mut((0, n), (n, n)).copy_from(&(-(&model.b * &rinv_bt)));
    h.view_mut((n, 0), (n, n)).copy_from(&linalg::symmetrize(&(model.c.transpose() * &rinv_c)));
    h.view_mut((n, n), (n, n)).copy_from(&(-f.transpose()));
    Ok(h)
}

/// The system pencil `S_xi(s) = P - s E` of size `2n + m`.
#[derive(Debug, Clone)]
pub struct Pencil<T: Real> {
    pub p: DMatrix<T>,
    pub e: DMatrix<T>,
}

/// Assembles `P = [[0, A_xi, B], [A_xi^T, 0, C^T], [B^T, C, D^T + D - xi I]]`
/// and `E = [[0, I, 0], [-I, 0, 0], [0, 0, 0]]` with `A_xi = A + xi I/2`.
pub fn assemble_pencil<T: Real>(model: &StateSpaceModel<T>, xi: T) -> Pencil<T> {
    let n = model.n();
    let m = model.m();
    let s = shift_model(model, xi);
    let dxi = s.d_sym();
    let size = 2 * n + m;
    let mut p = DMatrix::zeros(size, size);
    p.view_mut((0, n), (n, n)).copy_from(&s.a);
    p.view_mut((n, 0), (n, n)).copy_from(&s.a.transpose());
    p.view_mut((0, 2 * n), (n, m)).copy_from(&s.b);
    p.view_mut((2 * n, 0), (m, n)).copy_from(&s.b.transpose());
    p.view_mut((n, 2 * n), (n, m)).copy_from(&s.c.transpose());
    p.view_mut((2 * n, n), (m, n)).copy_from(&s.c);
    p.view_mut((2 * n, 2 * n), (m, m)).copy_from(&dxi);
    let mut e = DMatrix::zeros(size, size);
    for i in 0..n {
        e[(i, n + i)] = T::one();
        e[(n + i, i)] = -T::one();
    }
    Pencil { p, e }
}

impl<T: Real> Pencil<T> {
    /// `S_xi(s)` evaluated at a complex point.
    pub fn at(&self, s: Complex<T>) -> CMatrix<T> {
        linalg::to_complex(&self.p) - linalg::to_complex(&self.e) * s
    }

    /// Finite generalized eigenvalues and a regularity flag.
    pub fn eigenvalues(&self) -> Result<linalg::PencilEig<T>> {
        linalg::pencil_eigenvalues(&self.p, &self.e)
    }
}

/// Classification of a certificate candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateClass {
    Interior,
    Boundary,
    Infeasible,
}

/// A symmetric candidate `X` for `W(X, M) >= 0` together with its classification.
#[derive(Debug, Clone)]
pub struct Certificate<T: Real> {
    pub x: DMatrix<T>,
    pub lambda_min_x: T,
    pub lambda_min_w: T,
    /// Largest `xi` with `W(X, M) >= xi diag(X, I)`; NaN when `X` is not positive definite.
    pub xi_star: T,
    pub class: CertificateClass,
}

impl<T: Real> Certificate<T> {
    /// Classifies `X` with the default tolerance `1e-8` relative to `||W||`.
    pub fn new(model: &StateSpaceModel<T>, x: DMatrix<T>) -> Result<Self> {
        Self::with_tol(model, x, T::tol(1e-8))
    }

    /// `tol` is relative: `|lambda_min(W)| <= tol * max(1, ||W||_2)` counts as zero.
    pub fn with_tol(model: &StateSpaceModel<T>, x: DMatrix<T>, tol: T) -> Result<Self> {
        let asym = linalg::asymmetry(&x);
        let xs = linalg::max_abs(&x).max(T::one());
        if asym > T::tol(1e-8) * xs {
            return Err(Error::NotSymmetric { name: "X".into(), asymmetry: asym.f() });
        }
        let x = linalg::symmetrize(&x);
        let w = assemble_w(model, &x)?;
        let lambda_min_x = linalg::lambda_min(&x);
        let lambda_min_w = linalg::lambda_min(&w);
        let wscale = linalg::norm2(&w).max(T::one());
        let pd = lambda_min_x > T::zero() && Cholesky::new(x.clone()).is_some();
        let xi_star = if pd { radius::xi_star(model, &x)? } else { T::not_a_number() };
        let class = if !pd || lambda_min_w < -tol * wscale {
            CertificateClass::Infeasible
        } else if lambda_min_w <= tol * wscale {
            CertificateClass::Boundary
        } else {
            CertificateClass::Interior
        };
        Ok(Self { x, lambda_min_x, lambda_min_w, xi_star, class })
    }
}

/// Port-Hamiltonian realization with `Q = I`:
/// `A = J - R`, `B = G - K`, `C = (G + K)^T`, `D = S + N`.
#[derive(Debug, Clone)]
pub struct PHRealization<T: Real> {
    pub j: DMatrix<T>,
    pub r: DMatrix<T>,
    pub g: DMatrix<T>,
    pub k: DMatrix<T>,
    pub s: DMatrix<T>,
    /// Skew-symmetric feedthrough part (the `N` block).
    pub n: DMatrix<T>,
    /// State transformation with `X = T^T T`.
    pub t: DMatrix<T>,
    pub x: DMatrix<T>,
}

impl<T: Real> PHRealization<T> {
    /// The dissipation block `[[R, K], [K^T, S]]`.
    pub fn dissipation(&self) -> DMatrix<T> {
        let n = self.r.nrows();
        let m = self.s.nrows();
        let mut w = DMatrix::zeros(n + m, n + m);
        w.view_mut((0, 0), (n, n)).copy_from(&self.r);
        w.view_mut((0, n), (n, m)).copy_from(&self.k);
        w.view_mut((n, 0), (m, n)).copy_from(&self.k.transpose());
        w.view_mut((n, n), (m, m)).copy_from(&self.s);
        w
    }

    /// Checks skew-symmetry of `J`, `N` and positive semidefiniteness of the
    /// dissipation block, with `tol` relative to the largest entry.
    pub fn check(&self, tol: T) -> Result<()> {
        let n = self.r.nrows();
        let m = self.s.nrows();
        let shapes = [
            self.j.shape() == (n, n),
            self.r.shape() == (n, n),
            self.g.shape() == (n, m),
            self.k.shape() == (n, m),
            self.n.shape() == (m, m),
        ];
        if shapes.iter().any(|ok| !ok) {
            return Err(Error::DimensionMismatch("inconsistent pH block sizes".into()));
        }
        let scale = [&self.j, &self.r, &self.g, &self.k, &self.s, &self.n]
            .iter()
            .fold(T::one(), |acc, mat| acc.max(linalg::max_abs(mat)));
        for (name, mat) in [("J", &self.j), ("N", &self.n)] {
            let skew = (mat + mat.transpose()).abs().max();
            if skew > tol * scale {
                return Err(Error::InvariantViolation(format!("{name} is not skew-symmetric ({skew:.3e})")));
            }
        }
        let diss = self.dissipation();
        let asym = linalg::asymmetry(&diss);
        if asym > tol * scale {
            return Err(Error::InvariantViolation(format!("R or S is not symmetric ({asym:.3e})")));
        }
        let lmin = linalg::lambda_min(&diss);
        if lmin < -tol * scale {
            return Err(Error::InvariantViolation(format!(
                "dissipation block is indefinite (smallest eigenvalue {lmin:.3e})"
            )));
        }
        Ok(())
    }

    /// Converts back to `{J - R, G - K, (G + K)^T, S + N}` after checking the invariants
    /// with tolerance `1e-8`.
    pub fn to_model(&self) -> Result<StateSpaceModel<T>> {
        from_ph_form(self)
    }
}

/// Converts a pH realization to `{J - R, G - K, (G + K)^T, S + N}`.
pub fn from_ph_form<T: Real>(p: &PHRealization<T>) -> Result<StateSpaceModel<T>> {
    p.check(T::tol(1e-8))?;
    StateSpaceModel::new(&p.j - &p.r, &p.g - &p.k, (&p.g + &p.k).transpose(), &p.s + &p.n)
}

/// Builds the pH realization induced by `X = T^T T` (upper-triangular `T` from Cholesky).
pub fn transform_to_ph<T: Real>(model: &StateSpaceModel<T>, cert: &Certificate<T>) -> Result<PHRealization<T>> {
    let chol = Cholesky::new(cert.x.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("certificate X has no Cholesky factor".into()))?;
    if cert.class == CertificateClass::Infeasible {
        return Err(Error::InfeasibleCertificate { lambda_min_w: cert.lambda_min_w.f() });
    }
    let t = chol.l().transpose();
    let mt = model.transform(&t)?;
    let s = mt.system_matrix();
    let half = T::c(0.5);
    let herm = (&s + s.transpose()) * half;
    let skew = (&s - s.transpose()) * half;
    let n = model.n();
    let m = model.m();
    Ok(PHRealization {
        j: -skew.view((0, 0), (n, n)).into_owned(),
        r: herm.view((0, 0), (n, n)).into_owned(),
        g: -skew.view((0, n), (n, m)).into_owned(),
        k: herm.view((0, n), (n, m)).into_owned(),
        s: herm.view((n, n), (m, m)).into_owned(),
        n: skew.view((n, n), (m, m)).into_owned(),
        t,
        x: cert.x.clone(),
    })
}

/// One sample of `gamma(xi, omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample<T: Real> {
    pub xi: T,
    pub omega: T,
    pub gamma: T,
}

/// Grid of `gamma(xi, omega)` samples sorted by `(xi, omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyScan<T: Real> {
    pub samples: Vec<ScanSample<T>>,
}

impl<T: Real> FrequencyScan<T> {
    /// Evaluates `gamma` on the tensor grid; points where the resolvent is singular are skipped.
    pub fn compute(model: &StateSpaceModel<T>, xis: &[T], omegas: &[T]) -> Result<Self> {
        if xis.is_empty() || omegas.is_empty() {
            return Err(Error::EmptyGrid("scan needs at least one xi and one omega".into()));
        }
        let mut samples = Vec::with_capacity(xis.len() * omegas.len());
        for &xi in xis {
            for &omega in omegas {
                match eval_gamma(model, xi, omega) {
                    Ok((_, gamma)) => samples.push(ScanSample { xi, omega, gamma }),
                    Err(Error::ResolventSingular { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        samples.sort_by(|a, b| (a.xi, a.omega).partial_cmp(&(b.xi, b.omega)).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self { samples })
    }

    /// CSV text with header `xi,omega,gamma` and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,omega,gamma\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.xi, s.omega, s.gamma));
        }
        out
    }

    /// Smallest `gamma` among samples with the given `xi`.
    pub fn min_gamma_at(&self, xi: T) -> Option<T> {
        self.samples.iter().filter(|s| s.xi == xi).map(|s| s.gamma).reduce(|a, b| a.min(b))
    }
}
