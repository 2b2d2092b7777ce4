//! Extremal solutions of the algebraic Riccati equation
//! `-XA - A^T X - (C^T - XB)(D^T + D)^{-1}(C - B^T X) = 0`
//! from invariant subspaces of the Hamiltonian matrix.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ComplexSchur};
use crate::model::{assemble_hamiltonian, shift_model, StateSpaceModel};
use crate::scalar::Real;
use nalgebra::{Complex, ComplexField, DMatrix, LU, SVD};

/// Which half-plane the closed-loop spectrum is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreMode {
    /// Closed loop in the left half plane; yields the minimal solution `X_-`.
    Stabilizing,
    /// Closed loop in the right half plane; yields the maximal solution `X_+`.
    Antistabilizing,
}

#[derive(Debug, Clone)]
pub struct AreSolution<T: Real> {
    pub x: DMatrix<T>,
    /// `||Ricc(X)||_F / ((1 + ||X||_F)(1 + ||A||_F))`.
    pub residual: T,
    pub closed_loop_eigs: Vec<Complex<T>>,
    pub mode: AreMode,
}

/// Relative residual bound accepted for a solution.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Hamiltonian eigenvalues with `|Re| <= AXIS_TOL * ||H||` count as imaginary.
pub const AXIS_TOL: f64 = 1e-8;

/// `Ricc(X)` for the given model.
pub fn riccati_operator<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let r = model.d_sym();
    let lu = LU::new(r);
    let f = model.c.transpose() - x * &model.b;
    let sol = lu.solve(&f.transpose()).ok_or(Error::SingularDBlock { xi: 0.0, lambda_min: 0.0 })?;
    Ok(-(x * &model.a) - model.a.transpose() * x - f * sol)
}

fn scaled_residual<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<T> {
    let r = riccati_operator(model, x)?.norm();
    Ok(r / ((T::one() + x.norm()) * (T::one() + model.a.norm())))
}

/// Newton steps `A_c^T E + E A_c = Ricc(X)`, `A_c = A - B R^-1 (C - B^T X)`, taken while
/// the residual exceeds the bound and keeps decreasing.
fn newton_polish<T: Real>(model: &StateSpaceModel<T>, x: DMatrix<T>) -> Result<(DMatrix<T>, T)> {
    newton_steps(model, x, 6, T::tol(RESIDUAL_TOL))
}

fn newton_steps<T: Real>(
    model: &StateSpaceModel<T>,
    mut x: DMatrix<T>,
    max_steps: usize,
    target: T,
) -> Result<(DMatrix<T>, T)> {
    let mut residual = scaled_residual(model, &x)?;
    let lu = LU::new(model.d_sym());
    for _ in 0..max_steps {
        if residual <= target {
            break;
        }
        let k = lu
            .solve(&(&model.c - model.b.transpose() * &x))
            .ok_or(Error::SingularDBlock { xi: 0.0, lambda_min: 0.0 })?;
        let ac = &model.a - &model.b * k;
        let ric = riccati_operator(model, &x)?;
        let e = match linalg::lyapunov(&ac, &(-ric)) {
            Ok(e) => e,
            Err(_) => break,
        };
        let cand = linalg::symmetrize(&(&x + e));
        let r = scaled_residual(model, &cand)?;
        if !(r < residual) {
            break;
        }
        x = cand;
        residual = r;
    }
    Ok((x, residual))
}

/// Solves the Riccati equation for the requested closed-loop half plane from the
/// invariant subspace of the Hamiltonian matrix, followed by Newton refinement.
pub fn solve_are<T: Real>(model: &StateSpaceModel<T>, mode: AreMode) -> Result<AreSolution<T>> {
    model.require_minimal()?;
    hamiltonian_route(model, mode)
}

fn wanted<T: Real>(mode: AreMode) -> impl Fn(Complex<T>) -> bool {
    move |z| match mode {
        AreMode::Stabilizing => z.re < T::zero(),
        AreMode::Antistabilizing => z.re > T::zero(),
    }
}

fn hamiltonian_route<T: Real>(model: &StateSpaceModel<T>, mode: AreMode) -> Result<AreSolution<T>> {
    let n = model.n();
    let h = assemble_hamiltonian(model, T::zero())?;
    let mut schur = ComplexSchur::new(linalg::to_complex(&h))?;
    let hnorm = h.norm().max(T::tiny());
    let min_re = schur.eigenvalues().iter().fold(T::huge(), |acc, z| acc.min(z.re.abs()));
    if min_re <= T::tol(AXIS_TOL) * hnorm {
        return Err(Error::ImaginaryAxisEigenvalues { min_real_part: min_re.f() });
    }
    let sel = wanted(mode);
    let k = schur.reorder(&sel);
    if k != n {
        return Err(Error::ImaginaryAxisEigenvalues { min_real_part: min_re.f() });
    }
    let u1 = schur.q.view((0, 0), (n, n)).into_owned();
    let u2 = schur.q.view((n, 0), (n, n)).into_owned();
    let eigs = (0..n).map(|i| schur.t[(i, i)]).collect();
    graph_solution(model, &u1, &u2, eigs, mode)
}

/// `X = -U2 U1^{-1}` from a basis `[U1; U2]` of a Lagrangian subspace, with symmetry,
/// realness and residual checks.
fn graph_solution<T: Real>(
    model: &StateSpaceModel<T>,
    u1: &CMatrix<T>,
    u2: &CMatrix<T>,
    closed_loop_eigs: Vec<Complex<T>>,
    mode: AreMode,
) -> Result<AreSolution<T>> {
    let sv = SVD::new(u1.clone(), false, false).singular_values;
    let rcond = sv.min() / sv.max();
    if !(rcond > T::tol(1e-12)) {
        return Err(Error::SingularU1 { rcond: rcond.f() });
    }
    // X U1 = -U2, solved as U1^T X^T = -U2^T.
    let xt = LU::new(u1.transpose()).solve(&(-u2.transpose())).ok_or(Error::SingularU1 { rcond: rcond.f() })?;
    let xc = xt.transpose();
    let xnorm = xc.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared()).sqrt().max(T::tiny());
    let imag = xc.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
    let x = xc.map(|z| z.re);
    let asym = linalg::asymmetry(&x).max(imag);
    if asym > T::tol(1e-6) * xnorm {
        return Err(Error::AsymmetricSolution { asymmetry: (asym / xnorm).f() });
    }
    let (x, residual) = newton_polish(model, linalg::symmetrize(&x))?;
    if !(residual <= T::tol(RESIDUAL_TOL)) {
        return Err(Error::ResidualTooLarge { residual: residual.f(), bound: RESIDUAL_TOL });
    }
    Ok(AreSolution { x, residual, closed_loop_eigs, mode })
}

fn closed_loop<T: Real>(model: &StateSpaceModel<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let k = LU::new(model.d_sym())
        .solve(&(&model.c - model.b.transpose() * x))
        .ok_or(Error::SingularDBlock { xi: 0.0, lambda_min: 0.0 })?;
    Ok(&model.a - &model.b * k)
}

/// Riccati solution of `M_xi = shift_model(model, xi)`.
///
/// Close to the boundary of strict passivity `D^T + D - xi I` or the spectral gap of the
/// Hamiltonian can be too small for the subspace methods. The solution at the nearest
/// smaller shift `xi - 4^k eps scale(M)` where they succeed is then continued to `xi` by
/// Newton steps and accepted if the residual and the closed-loop half plane check out.
pub fn solve_shifted_are<T: Real>(model: &StateSpaceModel<T>, xi: T, mode: AreMode) -> Result<AreSolution<T>> {
    let target = shift_model(model, xi);
    let first = match solve_are(&target, mode) {
        Ok(s) => return Ok(s),
        Err(
            e @ (Error::ImaginaryAxisEigenvalues { .. }
            | Error::SingularU1 { .. }
            | Error::AsymmetricSolution { .. }
            | Error::ResidualTooLarge { .. }),
        ) => e,
        Err(e) => return Err(e),
    };
    let mut back = T::tol(1e-8) * model.scale();
    for _ in 0..20 {
        if let Ok(start) = solve_are(&shift_model(model, xi - back), mode) {
            // Near a double root Newton converges linearly, so it runs to stagnation.
            let (x, residual) = newton_steps(&target, start.x, 80, T::zero())?;
            if !(residual <= T::tol(RESIDUAL_TOL)) {
                return Err(first);
            }
            let closed_loop_eigs = linalg::eigenvalues(&closed_loop(&target, &x)?)?;
            let side_ok = closed_loop_eigs.iter().all(|z| match mode {
                AreMode::Stabilizing => z.re < T::zero(),
                AreMode::Antistabilizing => z.re > T::zero(),
            });
            if !side_ok {
                return Err(first);
            }
            return Ok(AreSolution { x, residual, closed_loop_eigs, mode });
        }
        back *= T::c(4.0);
    }
    Err(first)
}

/// The minimal and maximal Riccati solutions `(X_-, X_+)`.
pub fn extremal_solutions<T: Real>(model: &StateSpaceModel<T>) -> Result<(AreSolution<T>, AreSolution<T>)> {
    let lo = solve_are(model, AreMode::Stabilizing)?;
    let hi = solve_are(model, AreMode::Antistabilizing)?;
    let gap = linalg::lambda_min(&(&hi.x - &lo.x));
    let scale = hi.x.norm().max(lo.x.norm()).max(T::one());
    if gap < -T::tol(1e-8) * scale {
        return Err(Error::InvariantViolation(format!(
            "X_+ - X_- is not positive semidefinite (lambda_min = {:.3e})",
            gap.f()
        )));
    }
    Ok((lo, hi))
}
