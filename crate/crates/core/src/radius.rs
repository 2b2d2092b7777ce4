//! `xi*(X)`, the X-passivity radius with its rank-one worst-case perturbation and
//! analytic bounds, and structured perturbations of a model.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{assemble_w, Certificate, CertificateClass, PHRealization, StateSpaceModel};
use crate::scalar::Real;
use crate::search::golden_section;
use nalgebra::{Cholesky, DMatrix, DVector, SVD};

/// Model perturbation `{dA, dB, dC, dD}` and its `Delta_S = [[-dA, -dB], [dC, dD]]` form.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPerturbation<T: Real> {
    pub da: DMatrix<T>,
    pub db: DMatrix<T>,
    pub dc: DMatrix<T>,
    pub dd: DMatrix<T>,
    pub as_delta_s: DMatrix<T>,
    pub norm_2: T,
    pub norm_f: T,
}

impl<T: Real> StructuredPerturbation<T> {
    pub fn new(da: DMatrix<T>, db: DMatrix<T>, dc: DMatrix<T>, dd: DMatrix<T>) -> Result<Self> {
        let n = da.nrows();
        let m = dd.nrows();
        if da.shape() != (n, n) || db.shape() != (n, m) || dc.shape() != (m, n) || dd.shape() != (m, m) {
            return Err(Error::DimensionMismatch("inconsistent perturbation blocks".into()));
        }
        let mut s = DMatrix::zeros(n + m, n + m);
        s.view_mut((0, 0), (n, n)).copy_from(&(-&da));
        s.view_mut((0, n), (n, m)).copy_from(&(-&db));
        s.view_mut((n, 0), (m, n)).copy_from(&dc);
        s.view_mut((n, n), (m, m)).copy_from(&dd);
        let norm_2 = linalg::norm2(&s);
        let norm_f = s.norm();
        Ok(Self { da, db, dc, dd, as_delta_s: s, norm_2, norm_f })
    }

    /// Splits `Delta_S` with state dimension `n` back into model blocks.
    pub fn from_delta_s(delta_s: &DMatrix<T>, n: usize) -> Result<Self> {
        let size = delta_s.nrows();
        if delta_s.ncols() != size || n >= size {
            return Err(Error::DimensionMismatch("Delta_S must be square with m > 0".into()));
        }
        let m = size - n;
        Self::new(
            -delta_s.view((0, 0), (n, n)).into_owned(),
            -delta_s.view((0, n), (n, m)).into_owned(),
            delta_s.view((n, 0), (m, n)).into_owned(),
            delta_s.view((n, n), (m, m)).into_owned(),
        )
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self::from_delta_s(&DMatrix::zeros(n + m, n + m), n).expect("valid zero perturbation")
    }
}

/// Returns `{A + dA, B + dB, C + dC, D + dD}`.
pub fn apply_perturbation<T: Real>(
    model: &StateSpaceModel<T>,
    p: &StructuredPerturbation<T>,
) -> Result<StateSpaceModel<T>> {
    if p.da.shape() != model.a.shape() || p.dd.shape() != model.d.shape() {
        return Err(Error::DimensionMismatch("perturbation does not match model".into()));
    }
    StateSpaceModel::new(&model.a + &p.da, &model.b + &p.db, &model.c + &p.dc, &model.d + &p.dd)
}

fn x_hat<T: Real>(x: &DMatrix<T>, m: usize) -> DMatrix<T> {
    linalg::block_diag(x, &DMatrix::identity(m, m))
}

/// Largest `xi` with `W(X, M) >= xi diag(X, I)`, i.e. `lambda_min(L^-1 W L^-T)` for
/// `L L^T = diag(X, I)`.
pub fn xi_star<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<T> {
    let w = assemble_w(model, x)?;
    let chol = Cholesky::new(x_hat(&linalg::symmetrize(x), model.m()))
        .ok_or_else(|| Error::NotPositiveDefinite("X is not positive definite".into()))?;
    let l = chol.l();
    let linv_w =
        l.solve_lower_triangular(&w).ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let g = l
        .solve_lower_triangular(&linv_w.transpose())
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    Ok(linalg::lambda_min(&g))
}

/// The function `gamma -> lambda_max(gamma^2 W^-1/2 X^2 W^-1/2 + W^-1 / gamma^2)` for a
/// fixed interior pair `(M, X)`.
#[derive(Debug, Clone)]
pub struct RadiusFunction<T: Real> {
    w: DMatrix<T>,
    xh: DMatrix<T>,
    w_inv_half: DMatrix<T>,
    p1: DMatrix<T>,
    p2: DMatrix<T>,
}

impl<T: Real> RadiusFunction<T> {
    pub fn new(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<Self> {
        let w = assemble_w(model, x)?;
        let xh = x_hat(&linalg::symmetrize(x), model.m());
        let e = linalg::sym_eig(&w);
        if !(e.values[0] > T::zero()) || !(linalg::lambda_min(&xh) > T::zero()) {
            return Err(Error::NotInterior { lambda_min_x: linalg::lambda_min(x).f(), lambda_min_w: e.values[0].f() });
        }
        let q = &e.vectors;
        let dih = DMatrix::from_diagonal(&e.values.map(|v| T::one() / v.sqrt()));
        let di = DMatrix::from_diagonal(&e.values.map(|v| T::one() / v));
        let w_inv_half = linalg::symmetrize(&(q * dih * q.transpose()));
        let p1 = linalg::symmetrize(&(&w_inv_half * &xh * &xh * &w_inv_half));
        let p2 = linalg::symmetrize(&(q * di * q.transpose()));
        Ok(Self { w, xh, w_inv_half, p1, p2 })
    }

    pub fn lambda_max(&self, gamma: T) -> T {
        let g2 = gamma * gamma;
        linalg::lambda_max(&(&self.p1 * g2 + &self.p2 / g2))
    }

    /// `M(gamma)` as a `2(n+m)` square positive semidefinite matrix.
    pub fn m_matrix(&self, gamma: T) -> DMatrix<T> {
        let k = self.k_matrix(gamma);
        linalg::symmetrize(&(k.transpose() * k))
    }

    fn k_matrix(&self, gamma: T) -> DMatrix<T> {
        let size = self.w.nrows();
        let mut k = DMatrix::zeros(size, 2 * size);
        k.view_mut((0, 0), (size, size)).copy_from(&(&self.w_inv_half * &self.xh * gamma));
        k.view_mut((0, size), (size, size)).copy_from(&(&self.w_inv_half / gamma));
        k
    }
}

/// Result of the X-passivity radius computation.
#[derive(Debug, Clone)]
pub struct RadiusReport<T: Real> {
    pub rho: T,
    pub gamma_star: T,
    pub lambda_max: T,
    pub u: DVector<T>,
    pub v: DVector<T>,
    /// Worst-case rank-one perturbation `-u v^T / lambda_max` in `Delta_S` form.
    pub perturbation: StructuredPerturbation<T>,
    /// `lambda_min(W(X, M + Delta))` after applying `perturbation`.
    pub residual_lambda_min: T,
    pub lower_bound: T,
    pub upper_bound: T,
    pub alpha: T,
    pub beta: T,
    /// Largest overlap `|v^T w|` used for the upper bound.
    pub overlap: T,
    pub iterations: usize,
}

/// Orthonormal basis of the eigenvectors whose eigenvalues lie within `rel` of the extreme one.
fn extreme_eigenspace<T: Real>(e: &linalg::SymEig<T>, top: bool, rel: T) -> DMatrix<T> {
    let n = e.values.len();
    let scale = e.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs())).max(T::tiny());
    let cols: Vec<usize> = if top {
        let lmax = e.values[n - 1];
        (0..n).filter(|&i| lmax - e.values[i] <= rel * scale).collect()
    } else {
        let lmin = e.values[0];
        (0..n).filter(|&i| e.values[i] - lmin <= rel * scale).collect()
    };
    DMatrix::from_columns(&cols.iter().map(|&i| e.vectors.column(i)).collect::<Vec<_>>())
}

/// Deterministic unit vector from the column space of `q`: the projection of the
/// coordinate vector with the largest projection, sign-normalized so that its
/// largest-magnitude entry is positive.
fn canonical_vector<T: Real>(q: &DMatrix<T>) -> DVector<T> {
    let mut best = 0;
    let mut best_norm = T::zero();
    for i in 0..q.nrows() {
        let rn = q.row(i).norm();
        if rn > best_norm * (T::one() + T::c(1e-8)) {
            best = i;
            best_norm = rn;
        }
    }
    let c = q.row(best).transpose();
    let z = q * c;
    sign_normalize(z.normalize())
}

fn sign_normalize<T: Real>(z: DVector<T>) -> DVector<T> {
    let mut k = 0;
    for i in 0..z.len() {
        if z[i].abs() > z[k].abs() * (T::one() + T::c(1e-10)) {
            k = i;
        }
    }
    if z[k] < T::zero() {
        -z
    } else {
        z
    }
}

/// Picks a top eigenvector `z = [u; v]` of `M(gamma*)` with `||u|| = ||v||`.
fn balanced_top_vector<T: Real>(m: &DMatrix<T>, size: usize) -> DVector<T> {
    let e = linalg::sym_eig(m);
    let q = extreme_eigenspace(&e, true, T::tol(1e-8));
    if q.ncols() == 1 {
        return sign_normalize(q.column(0).into_owned());
    }
    let qu = q.rows(0, size).into_owned();
    let qv = q.rows(size, size).into_owned();
    let h = qu.transpose() * &qu - qv.transpose() * &qv;
    let he = linalg::sym_eig(&h);
    let k = he.values.len();
    let (hmin, hmax) = (he.values[0], he.values[k - 1]);
    let flat = T::tol(1e-8);
    if hmax.abs() <= flat && hmin.abs() <= flat {
        return canonical_vector(&q);
    }
    let c = if hmin < T::zero() && hmax > T::zero() {
        let span = hmax - hmin;
        he.vectors.column(0) * (hmax / span).sqrt() + he.vectors.column(k - 1) * (-hmin / span).sqrt()
    } else if hmax.abs() < hmin.abs() {
        he.vectors.column(k - 1).into_owned()
    } else {
        he.vectors.column(0).into_owned()
    };
    sign_normalize((&q * c).normalize())
}

/// Computes the X-passivity radius for an interior certificate.
pub fn x_passivity_radius<T: Real>(model: &StateSpaceModel<T>, cert: &Certificate<T>) -> Result<RadiusReport<T>> {
    if cert.class != CertificateClass::Interior {
        return Err(Error::NotInterior { lambda_min_x: cert.lambda_min_x.f(), lambda_min_w: cert.lambda_min_w.f() });
    }
    radius_for_x(model, &cert.x)
}

/// As [`x_passivity_radius`] but for a raw matrix `X` (which must be interior).
pub fn radius_for_x<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<RadiusReport<T>> {
    let f = RadiusFunction::new(model, x)?;
    let ten = T::c(10.0);
    let g = golden_section(|t: T| f.lambda_max(ten.powf(t)), T::c(-8.0), T::c(8.0), T::tol(1e-10), 200)?;
    let gamma_star = ten.powf(g.x);
    let lambda_max = g.fx;
    let size = f.w.nrows();
    let n = model.n();
    let z = balanced_top_vector(&f.m_matrix(gamma_star), size);
    let u = z.rows(0, size).normalize();
    let v = z.rows(size, size).normalize();

    let mut best: Option<(T, DMatrix<T>)> = None;
    for sign in [-T::one(), T::one()] {
        let ds = &u * v.transpose() * (sign / lambda_max);
        let wd = &f.w + &f.xh * &ds + ds.transpose() * &f.xh;
        let lmin = linalg::lambda_min(&wd);
        if best.as_ref().is_none_or(|(b, _)| lmin.abs() < b.abs()) {
            best = Some((lmin, ds));
        }
    }
    let (residual_lambda_min, ds) = best.expect("two candidate signs");
    let perturbation = StructuredPerturbation::from_delta_s(&ds, n)?;

    // Bounds: alpha^2 = lambda_min(W), beta^2 = lambda_min(X^-1 W X^-1).
    let we = linalg::sym_eig(&f.w);
    let alpha = we.values[0].sqrt();
    let xh_inv = f.xh.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite("X is singular".into()))?;
    let beta = linalg::lambda_min(&(&xh_inv * &f.w * &xh_inv)).max(T::zero()).sqrt();
    let vspace = extreme_eigenspace(&we, false, T::tol(1e-8));
    let k = &f.w_inv_half * &f.xh;
    let svd = SVD::new(k, true, false);
    let smax = svd.singular_values.max();
    let lu = svd.u.expect("u requested");
    let wcols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| smax - svd.singular_values[i] <= T::tol(1e-8) * smax)
        .map(|i| lu.column(i).into_owned())
        .collect();
    let wspace = DMatrix::from_columns(&wcols);
    let overlap = linalg::norm2(&(vspace.transpose() * wspace)).min(T::one());
    let lower_bound = alpha * beta / T::c(2.0);
    let upper_bound = alpha * beta / (T::one() + overlap);

    Ok(RadiusReport {
        rho: T::one() / lambda_max,
        gamma_star,
        lambda_max,
        u,
        v,
        perturbation,
        residual_lambda_min,
        lower_bound,
        upper_bound,
        alpha,
        beta,
        overlap,
        iterations: g.iterations,
    })
}

/// I-passivity radius of a pH realization: `lambda_min([[R, K], [K^T, S]])`.
pub fn ph_radius<T: Real>(p: &PHRealization<T>) -> Result<T> {
    p.check(T::tol(1e-8))?;
    Ok(linalg::lambda_min(&p.dissipation()))
}
