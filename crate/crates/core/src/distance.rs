//! Distance to passivity and to stability by a diagonal shift, the Frobenius-norm
//! refinement of that shift, and the complex stability radius of a Hurwitz matrix.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{shift_model, Certificate, StateSpaceModel};
use crate::optimal::{is_passive, passivity_status, AXIS_TOL};
use crate::radius::{apply_perturbation, StructuredPerturbation};
use crate::riccati::{solve_shifted_are, AreMode};
use crate::scalar::Real;
use crate::search::golden_section;
use nalgebra::{Cholesky, Complex, DMatrix, LU, SVD};
use std::fmt;

/// One of the shifted strict-passivity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `A - xi I/2` Hurwitz.
    A1,
    /// `D^T + D + xi I` positive definite.
    A2,
    /// No imaginary-axis eigenvalue of the shifted pencil.
    A3,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::A1 => "A1'",
            Condition::A2 => "A2'",
            Condition::A3 => "A3'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassivationNorms<T> {
    /// `Xi / 2`.
    pub spectral: T,
    /// `Xi sqrt(n + m) / 2`.
    pub frobenius_diagonal: T,
    /// Frobenius norm of the refined perturbation, once computed.
    pub frobenius_refined: Option<T>,
}

/// Result of the diagonal-shift passivation and, optionally, its refinement.
#[derive(Debug, Clone)]
pub struct PassivationResult<T: Real> {
    /// Smallest shift found to make `M_{-xi}` strictly passive (upper end of the bracket).
    pub xi: T,
    /// Lower end of the final bracket; `M_{-xi_lo}` is not strictly passive.
    pub xi_lo: T,
    /// Conditions failing at `xi_lo`; empty when the model was already passive.
    pub binding: Vec<Condition>,
    pub iterations: usize,
    /// `Delta_S = (Xi/2) I`.
    pub diagonal_perturbation: StructuredPerturbation<T>,
    pub refined_perturbation: Option<StructuredPerturbation<T>>,
    /// Certificate for the diagonally perturbed model `M_{-Xi}`.
    pub certificate: Certificate<T>,
    /// Weight of `X_+` in the certificate actually used.
    pub certificate_weight: T,
    pub norms: PassivationNorms<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassivationOptions<T> {
    pub axis_tol: T,
    /// Certificate `X = (1 - w) X_- + w X_+` from the extremal Riccati solutions of
    /// `M_{-Xi}`; `0.5` is the midpoint.
    pub certificate_weight: T,
}

impl<T: Real> Default for PassivationOptions<T> {
    fn default() -> Self {
        Self { axis_tol: T::tol(AXIS_TOL), certificate_weight: T::c(0.5) }
    }
}

fn strictly_passive_shift<T: Real>(model: &StateSpaceModel<T>, xi: T, axis_tol: T) -> Result<bool> {
    Ok(passivity_status(model, -xi, axis_tol)?.strictly_passive())
}

/// Diagonal stage with default options.
pub fn passivation_diagonal<T: Real>(model: &StateSpaceModel<T>, tau: T) -> Result<PassivationResult<T>> {
    passivation_diagonal_with(model, tau, &PassivationOptions::default())
}

/// Bisects for the smallest `xi` (within `tau`) such that `M_{-xi}` is strictly passive.
pub fn passivation_diagonal_with<T: Real>(
    model: &StateSpaceModel<T>,
    tau: T,
    opts: &PassivationOptions<T>,
) -> Result<PassivationResult<T>> {
    model.require_minimal()?;
    if !(tau > T::zero()) {
        return Err(Error::ConstraintViolated("tau must be positive".into()));
    }
    let (n, m) = (model.n(), model.m());
    let axis_tol = opts.axis_tol;
    let eps = T::tol(1e-8) * model.scale();
    let mut iterations = 0;
    let (xi, xi_lo, binding, cert_shift) = if strictly_passive_shift(model, T::zero(), axis_tol)? {
        (T::zero(), T::zero(), Vec::new(), T::zero())
    } else if is_passive(model, T::tol(1e-8), axis_tol)? {
        (T::zero(), T::zero(), Vec::new(), eps)
    } else {
        let alpha = linalg::spectral_abscissa(&model.a)?;
        let dmin = linalg::lambda_min(&model.d_sym());
        let mut lo = (T::c(2.0) * alpha).max(-dmin).max(T::zero());
        let mut step = tau.max(T::c(1e-3) * model.scale());
        let mut hi = lo + step;
        while !strictly_passive_shift(model, hi, axis_tol)? {
            iterations += 1;
            if iterations > 200 {
                return Err(Error::ConvergenceFailure("no passivating shift found".into()));
            }
            lo = hi;
            step *= T::c(2.0);
            hi = lo + step;
        }
        while hi - lo > tau {
            iterations += 1;
            let mid = T::c(0.5) * (lo + hi);
            if strictly_passive_shift(model, mid, axis_tol)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let st = passivity_status(model, -lo, axis_tol)?;
        let mut binding = Vec::new();
        if !st.a1 {
            binding.push(Condition::A1);
        }
        if !st.a2 {
            binding.push(Condition::A2);
        }
        if !st.a3 {
            binding.push(Condition::A3);
        }
        (hi, lo, binding, T::zero())
    };
    let half = T::c(0.5) * xi;
    let diagonal_perturbation = StructuredPerturbation::from_delta_s(&(DMatrix::identity(n + m, n + m) * half), n)?;
    let perturbed = shift_model(model, -xi);
    let (x, certificate_weight) = interior_certificate(model, -(xi + cert_shift), opts.certificate_weight)?;
    let certificate = Certificate::new(&perturbed, x)?;
    Ok(PassivationResult {
        xi,
        xi_lo,
        binding,
        iterations,
        diagonal_perturbation,
        refined_perturbation: None,
        certificate,
        certificate_weight,
        norms: PassivationNorms {
            spectral: half,
            frobenius_diagonal: half * T::of_usize(n + m).sqrt(),
            frobenius_refined: None,
        },
    })
}

/// `(1 - w) X_- + w X_+` for the strictly passive `M_shift`, with the weight used.
/// Falls back to `X_-` (weight 0) when `X_+` cannot be computed or is ill-conditioned.
fn interior_certificate<T: Real>(model: &StateSpaceModel<T>, shift: T, w: T) -> Result<(DMatrix<T>, T)> {
    if !(w >= T::zero() && w <= T::one()) {
        return Err(Error::ConstraintViolated("certificate weight must lie in [0, 1]".into()));
    }
    let lo = solve_shifted_are(model, shift, AreMode::Stabilizing)?;
    if w == T::zero() {
        return Ok((lo.x, w));
    }
    match solve_shifted_are(model, shift, AreMode::Antistabilizing) {
        Ok(hi) if hi.x.norm() <= T::c(1e8) * (T::one() + lo.x.norm()) => {
            Ok((linalg::symmetrize(&(lo.x * (T::one() - w) + hi.x * w)), w))
        }
        _ => Ok((lo.x, T::zero())),
    }
}

/// Diagonal stage followed by the refinement at the diagonal-stage certificate.
pub fn passivate<T: Real>(
    model: &StateSpaceModel<T>,
    tau: T,
    opts: &PassivationOptions<T>,
) -> Result<PassivationResult<T>> {
    let mut res = passivation_diagonal_with(model, tau, opts)?;
    let refined = passivation_refine(model, res.xi, &res.certificate)?;
    res.norms.frobenius_refined = Some(refined.norm_f);
    res.refined_perturbation = Some(refined);
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    PerPair,
    Triangular,
}

/// Minimum-Frobenius `Delta` with `Xh (S + Delta) + (S + Delta)^T Xh >= 0`, given that
/// `Xh S + S^T Xh + xi Xh >= 0`.
fn refine_core<T: Real>(s: &DMatrix<T>, xh: &DMatrix<T>, xi: T, split: Split) -> Result<DMatrix<T>> {
    let size = s.nrows();
    let tol = T::tol(1e-8);
    let chol = Cholesky::new(linalg::symmetrize(xh))
        .ok_or_else(|| Error::NotPositiveDefinite("certificate X is not positive definite".into()))?;
    let w = linalg::symmetrize(&(xh * s + s.transpose() * xh));
    let shifted = &w + xh * xi;
    let wscale = linalg::norm2(&w).max(xi.abs() * linalg::norm2(xh)).max(T::one());
    let pre = linalg::lambda_min(&shifted);
    if pre < -tol * wscale {
        return Err(Error::ConstraintViolated(format!(
            "certificate violates the shifted inequality (lambda_min = {:.3e})",
            pre.f()
        )));
    }
    // Xh = T^T T with T = L^T; SVD T = U Sigma V^T.
    let t = chol.l().transpose();
    let svd = SVD::new(t.clone(), true, true);
    let u = svd.u.ok_or_else(|| Error::ConvergenceFailure("SVD of T".into()))?;
    let v = svd.v_t.ok_or_else(|| Error::ConvergenceFailure("SVD of T".into()))?.transpose();
    let sigma = svd.singular_values;
    let t_inv = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite("singular certificate factor".into()))?;
    let s_hat = &t * s * &t_inv;
    let r_hat = linalg::symmetrize(&s_hat);
    let r_rot = linalg::symmetrize(&(u.transpose() * r_hat * &u));
    let eig = linalg::sym_eig(&r_rot);
    let thr = T::tol(1e-12) * linalg::norm2(&r_rot).max(T::one());
    let mut dr = DMatrix::<T>::zeros(size, size);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam < -thr {
            let q = eig.vectors.column(k);
            dr -= q * q.transpose() * lam;
        }
    }
    let dr = linalg::symmetrize(&dr);
    let mut d_rot = DMatrix::<T>::zeros(size, size);
    for i in 0..size {
        d_rot[(i, i)] = dr[(i, i)];
        for j in 0..i {
            let r = dr[(i, j)];
            match split {
                Split::PerPair => {
                    let p = sigma[i] / sigma[j];
                    let q = sigma[j] / sigma[i];
                    let den = p * p + q * q;
                    d_rot[(i, j)] = T::c(2.0) * r * p / den;
                    d_rot[(j, i)] = T::c(2.0) * r * q / den;
                }
                Split::Triangular => {
                    d_rot[(i, j)] = T::c(2.0) * r * sigma[j] / sigma[i];
                }
            }
        }
    }
    let mut scaled = d_rot.clone();
    for i in 0..size {
        for j in 0..size {
            scaled[(i, j)] = scaled[(i, j)] * sigma[i] / sigma[j];
        }
    }
    let residual = (linalg::symmetrize(&scaled) - &dr).norm();
    if residual > tol * dr.norm().max(T::one()) {
        return Err(Error::ConstraintViolated(format!(
            "Hermitian-part residual {:.3e} after refinement",
            residual.f()
        )));
    }
    let delta = &v * d_rot * v.transpose();
    let sp = s + &delta;
    let post = linalg::lambda_min(&linalg::symmetrize(&(xh * &sp + sp.transpose() * xh)));
    if post < -tol * wscale {
        return Err(Error::ConstraintViolated(format!("refined perturbation leaves lambda_min(W) = {:.3e}", post.f())));
    }
    let bound = T::c(0.5) * xi.max(T::zero()) * T::of_usize(size).sqrt();
    if split == Split::PerPair && delta.norm() > bound + tol * wscale {
        return Err(Error::ConstraintViolated(format!(
            "refined norm {:.6e} exceeds the diagonal bound {:.6e}",
            delta.norm().f(),
            bound.f()
        )));
    }
    Ok(delta)
}

fn passivation_refine_split<T: Real>(
    model: &StateSpaceModel<T>,
    xi: T,
    cert: &Certificate<T>,
    split: Split,
) -> Result<StructuredPerturbation<T>> {
    let n = model.n();
    if cert.x.shape() != (n, n) {
        return Err(Error::DimensionMismatch("certificate does not match the model".into()));
    }
    let xh = linalg::block_diag(&cert.x, &DMatrix::identity(model.m(), model.m()));
    let delta = refine_core(&model.system_matrix(), &xh, xi, split)?;
    StructuredPerturbation::from_delta_s(&delta, n)
}

/// Refines the diagonal shift `xi` into a smaller Frobenius-norm perturbation using a
/// certificate `X` with `W(X, M_{-xi}) >= 0`.
///
/// In coordinates where `diag(X, I) = I` the Hermitian part of the system matrix is
/// corrected by its negative spectral part; each off-diagonal entry pair of the
/// correction is distributed by a closed-form weighted least-squares split.
pub fn passivation_refine<T: Real>(
    model: &StateSpaceModel<T>,
    xi: T,
    cert: &Certificate<T>,
) -> Result<StructuredPerturbation<T>> {
    passivation_refine_split(model, xi, cert, Split::PerPair)
}

/// Same correction as [`passivation_refine`], but distributed as twice the strictly lower
/// triangle plus the diagonal. Kept as a reference construction.
pub fn passivation_refine_triangular<T: Real>(
    model: &StateSpaceModel<T>,
    xi: T,
    cert: &Certificate<T>,
) -> Result<StructuredPerturbation<T>> {
    passivation_refine_split(model, xi, cert, Split::Triangular)
}

/// `M + Delta` for a refined or diagonal perturbation.
pub fn perturbed_model<T: Real>(
    model: &StateSpaceModel<T>,
    p: &StructuredPerturbation<T>,
) -> Result<StateSpaceModel<T>> {
    apply_perturbation(model, p)
}

/// Diagonal stabilization `A - (Xi/2) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stabilization<T: Real> {
    pub xi: T,
    pub a_stab: DMatrix<T>,
    pub norm_2: T,
    pub norm_f: T,
    /// `X > 0` with `-(A - Xi I/2)^T X - X (A - Xi I/2) >= 0`, when one was found.
    pub certificate: Option<DMatrix<T>>,
}

/// `Xi = max(0, 2 max Re lambda(A))`. `tau` is the margin used for the fallback
/// certificate when `A - Xi I/2` has no well-conditioned eigenvector basis.
pub fn stabilization_diagonal<T: Real>(a: &DMatrix<T>, tau: T) -> Result<Stabilization<T>> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch("A must be square and nonempty".into()));
    }
    if !linalg::is_finite(a) {
        return Err(Error::NonFiniteEntry("A".into()));
    }
    let alpha = linalg::spectral_abscissa(a)?;
    let xi = (T::c(2.0) * alpha).max(T::zero());
    let half = T::c(0.5) * xi;
    let a_stab = a - DMatrix::identity(n, n) * half;
    let certificate = stabilization_certificate(&a_stab, tau)?;
    Ok(Stabilization { xi, a_stab, norm_2: half, norm_f: half * T::of_usize(n).sqrt(), certificate })
}

/// `Re(V^-H V^-1)` from an eigenvector basis of `B`, else the Lyapunov solution for
/// `B - tau/2 I`; kept only if it satisfies `-B^T X - X B >= 0` to tolerance.
fn stabilization_certificate<T: Real>(b: &DMatrix<T>, tau: T) -> Result<Option<DMatrix<T>>> {
    let n = b.nrows();
    let mut candidates = Vec::new();
    if let Some(v) = linalg::eigenvectors(b)? {
        if let Some(vi) = LU::new(v).try_inverse() {
            let x = (vi.adjoint() * vi).map(|z| z.re);
            candidates.push(linalg::symmetrize(&x));
        }
    }
    let shifted = b - DMatrix::identity(n, n) * (T::c(0.5) * tau.abs());
    if let Ok(x) = linalg::lyapunov(&shifted, &DMatrix::identity(n, n)) {
        candidates.push(x);
    }
    for x in candidates {
        let xs = linalg::norm2(&x).max(T::tiny());
        let x = x / xs;
        if linalg::lambda_min(&x) <= T::zero() {
            continue;
        }
        let g = linalg::symmetrize(&(-(b.transpose() * &x) - &x * b));
        if linalg::lambda_min(&g) >= -T::tol(1e-8) * linalg::norm2(b).max(T::one()) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Refines the stabilizing shift `xi` with a certificate `X` satisfying
/// `-(A - xi I/2)^T X - X (A - xi I/2) >= 0`; returns `dA`.
pub fn stabilization_refine<T: Real>(a: &DMatrix<T>, xi: T, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if a.shape() != (n, n) || x.shape() != (n, n) {
        return Err(Error::DimensionMismatch("A and X must be square of equal size".into()));
    }
    let delta = refine_core(&(-a), x, xi, Split::PerPair)?;
    Ok(-delta)
}

/// Sampling of `[0, 2 ||A||]` for the stability radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilityGrid {
    /// Points of the linear grid; the same number of log-spaced points is added.
    pub points: usize,
}

impl Default for StabilityGrid {
    fn default() -> Self {
        Self { points: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityRadius<T: Real> {
    /// `min_omega sigma_min(A - i omega I)`.
    pub value: T,
    pub omega: T,
    /// `-sigma u v^H`; `A + destabilizer` has the eigenvalue `i omega`.
    pub destabilizer: CMatrix<T>,
}

fn sigma_at<T: Real>(a: &CMatrix<T>, omega: T) -> T {
    let n = a.nrows();
    let shifted = a - CMatrix::<T>::identity(n, n) * Complex::new(T::zero(), omega);
    SVD::new(shifted, false, false).singular_values.min()
}

/// Complex stability radius of a Hurwitz `A` with its minimizing frequency and rank-one
/// destabilizing perturbation.
pub fn stability_radius<T: Real>(a: &DMatrix<T>, grid: &StabilityGrid) -> Result<StabilityRadius<T>> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch("A must be square and nonempty".into()));
    }
    if grid.points < 2 {
        return Err(Error::EmptyGrid("stability grid needs at least 2 points".into()));
    }
    let abscissa = linalg::spectral_abscissa(a)?;
    if !(abscissa < T::zero()) {
        return Err(Error::NotStable { abscissa: abscissa.f() });
    }
    let ac = linalg::to_complex(a);
    let omega_max = (T::c(2.0) * linalg::norm2(a)).max(T::tiny());
    let last = T::of_usize(grid.points - 1);
    let mut omegas: Vec<T> = (0..grid.points).map(|k| omega_max * T::of_usize(k) / last).collect();
    omegas
        .extend((0..grid.points).map(|k| omega_max * T::c(10.0).powf(T::c(-6.0) + T::c(6.0) * T::of_usize(k) / last)));
    omegas.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    omegas.dedup();
    let vals: Vec<T> = omegas.iter().map(|&w| sigma_at(&ac, w)).collect();
    let mut minima: Vec<usize> = (0..omegas.len())
        .filter(|&k| (k == 0 || vals[k] <= vals[k - 1]) && (k + 1 == omegas.len() || vals[k] <= vals[k + 1]))
        .collect();
    minima.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
    minima.truncate(3);
    let (mut best_w, mut best_v) = (omegas[minima[0]], vals[minima[0]]);
    for &k in &minima {
        let lo = omegas[k.saturating_sub(1)];
        let hi = omegas[(k + 1).min(omegas.len() - 1)];
        let g = golden_section(|w| sigma_at(&ac, w), lo, hi, T::tol(1e-12) * omega_max, 400)?;
        if g.fx < best_v {
            best_v = g.fx;
            best_w = g.x;
        }
    }
    let shifted = &ac - CMatrix::<T>::identity(n, n) * Complex::new(T::zero(), best_w);
    let (sigma, u, v) = linalg::sigma_min_triple(&shifted);
    let destabilizer = -(u * v.adjoint()) * Complex::new(sigma, T::zero());
    Ok(StabilityRadius { value: sigma, omega: best_w, destabilizer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal::passivity_status;
    use nalgebra::dmatrix;

    fn m1u() -> StateSpaceModel<f64> {
        StateSpaceModel::scalar(1.0, 1.0, 1.0, 1.0)
    }

    #[test]
    fn scalar_unstable_model_diagonal_stage() {
        let r = passivation_diagonal(&m1u(), 1e-6).unwrap();
        assert!(r.xi >= 2.0 && r.xi <= 2.0 + 1e-6, "{}", r.xi);
        assert!(r.binding.contains(&Condition::A1));
        assert!((r.norms.spectral - r.xi / 2.0).abs() < 1e-15);
        assert!((r.norms.frobenius_diagonal - r.xi / 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((r.diagonal_perturbation.norm_f - r.norms.frobenius_diagonal).abs() < 1e-14);
        assert_eq!(r.diagonal_perturbation.da[(0, 0)], -r.xi / 2.0);
        assert_eq!(r.diagonal_perturbation.dd[(0, 0)], r.xi / 2.0);
    }

    #[test]
    fn boundary_shift_model_has_unit_certificate() {
        let p = StateSpaceModel::scalar(0.0, 1.0, 1.0, 2.0);
        let w = crate::model::assemble_w(&p, &dmatrix![1.0]).unwrap();
        assert_eq!(w, dmatrix![0.0, 0.0; 0.0, 4.0]);
    }

    #[test]
    fn strictly_passive_model_needs_no_shift() {
        let m1 = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 1.0);
        let r = passivate(&m1, 1e-6, &PassivationOptions::default()).unwrap();
        assert_eq!(r.xi, 0.0);
        assert_eq!(r.diagonal_perturbation.norm_f, 0.0);
        assert!(r.binding.is_empty());
        assert_eq!(r.refined_perturbation.unwrap().norm_f, 0.0);
    }

    #[test]
    fn refinement_with_unit_certificate() {
        let m = m1u();
        let cert = Certificate::new(&StateSpaceModel::scalar(0.0, 1.0, 1.0, 2.0), dmatrix![1.0]).unwrap();
        let d = passivation_refine(&m, 2.0, &cert).unwrap();
        assert!((d.as_delta_s.clone() - dmatrix![1.0, 0.0; 0.0, 0.0]).norm() < 1e-14);
        assert!((d.norm_f - 1.0).abs() < 1e-14);
        let p = apply_perturbation(&m, &d).unwrap();
        assert!(is_passive(&p, 1e-8, 1e-8).unwrap());
        let tri = passivation_refine_triangular(&m, 2.0, &cert).unwrap();
        assert!((tri.norm_f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_passivation_of_scalar_model() {
        let m = m1u();
        let r = passivate(&m, 1e-6, &PassivationOptions::default()).unwrap();
        let refined = r.refined_perturbation.unwrap();
        assert!(refined.norm_f <= 1.0 + 1e-8, "{}", refined.norm_f);
        let p = apply_perturbation(&m, &refined).unwrap();
        assert!(is_passive(&p, 1e-8, 1e-8).unwrap());
        let st = passivity_status(&shift_model(&p, -1e-6), 0.0, 1e-8).unwrap();
        assert!(st.a3);
        assert!(crate::riccati::extremal_solutions(&shift_model(&p, -1e-6)).is_ok());
    }

    #[test]
    fn certificate_outside_shifted_set_is_rejected() {
        let cert = Certificate::new(&m1u(), dmatrix![1.0]).unwrap();
        assert!(matches!(passivation_refine(&m1u(), 1.0, &cert), Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn non_minimal_model_is_rejected() {
        let m =
            StateSpaceModel::new(dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![1.0; 0.0], dmatrix![1.0, 0.0], dmatrix![1.0])
                .unwrap();
        assert!(matches!(passivation_diagonal(&m, 1e-6), Err(Error::NotMinimal { .. })));
    }

    #[test]
    fn stabilization_examples() {
        let s = stabilization_diagonal(&dmatrix![1.0], 1e-6).unwrap();
        assert_eq!(s.xi, 2.0);
        assert_eq!(s.a_stab, dmatrix![0.0]);
        let s = stabilization_diagonal(&dmatrix![-1.0, 0.0; 0.0, -2.0], 1e-6).unwrap();
        assert_eq!(s.xi, 0.0);
        assert_eq!(s.a_stab, dmatrix![-1.0, 0.0; 0.0, -2.0]);
        let s = stabilization_diagonal(&dmatrix![0.0, 4.0; 0.0, 0.0], 1e-6).unwrap();
        assert_eq!(s.xi, 0.0);
    }

    #[test]
    fn stabilization_refinement() {
        let da = stabilization_refine(&dmatrix![1.0f64], 2.0, &dmatrix![1.0]).unwrap();
        assert!((da[(0, 0)] + 1.0).abs() < 1e-14);
        let a = dmatrix![-1.0, 3.0; 0.0, -2.0];
        let s = stabilization_diagonal(&a, 1e-6).unwrap();
        let da = stabilization_refine(&a, s.xi, &s.certificate.unwrap()).unwrap();
        assert!(da.norm() < 1e-14);
        let a = dmatrix![1.0, 5.0; 0.0, -1.0];
        let s = stabilization_diagonal(&a, 1e-6).unwrap();
        let da = stabilization_refine(&a, s.xi, s.certificate.as_ref().unwrap()).unwrap();
        assert!(da.norm() <= s.norm_f + 1e-10, "{} vs {}", da.norm(), s.norm_f);
        assert!(linalg::spectral_abscissa(&(&a + &da)).unwrap() <= 1e-7);
    }

    #[test]
    fn stability_radius_examples() {
        let g = StabilityGrid::default();
        let r = stability_radius(&dmatrix![-1.0f64], &g).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10 && r.omega.abs() < 1e-6);
        let r = stability_radius(&dmatrix![-1.0f64, 0.0; 0.0, -3.0], &g).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let a = dmatrix![-0.5f64, 4.0; -4.0, -0.5];
        let r = stability_radius(&a, &g).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8);
        let pert = linalg::to_complex(&a) + &r.destabilizer;
        let ev = linalg::ComplexSchur::new(pert).unwrap().eigenvalues();
        assert!(ev.iter().any(|z| z.re.abs() <= 1e-8));
        assert!(matches!(stability_radius(&dmatrix![0.0, 4.0; 0.0, 0.0], &g), Err(Error::NotStable { .. })));
    }
}
