//! The optimal robustness margin `Xi`: passivity conditions of shifted models,
//! bisection and frequency-midpoint algorithms, and the optimally robust pH realization.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ComplexSchur};
use crate::model::{
    assemble_pencil, eval_gamma, shift_model, transform_to_ph, Certificate, PHRealization, StateSpaceModel,
};
use crate::radius::{self, xi_star};
use crate::riccati::{solve_shifted_are, AreMode};
use crate::scalar::Real;
use nalgebra::{Complex, ComplexField, DMatrix};

/// Default relative tolerance for imaginary-axis detection.
pub const AXIS_TOL: f64 = 1e-8;

/// Conditions for strict passivity of the shifted model `M_xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PassivityStatus<T: Real> {
    /// `A + xi I/2` is Hurwitz.
    pub a1: bool,
    /// `D^T + D - xi I` is positive definite.
    pub a2: bool,
    /// No generalized eigenvalue of the pencil on the imaginary axis.
    pub a3: bool,
    pub spectral_abscissa: T,
    pub d_margin: T,
    /// Imaginary parts of the axis eigenvalues, sorted, both signs kept.
    pub crossings: Vec<T>,
    /// The pencil is numerically singular; `a3` is then reported false.
    pub degenerate: bool,
}

impl<T: Real> PassivityStatus<T> {
    pub fn strictly_passive(&self) -> bool {
        self.a1 && self.a2 && self.a3
    }
}

/// Evaluates conditions A1-A3 for `M_xi`.
///
/// A finite pencil eigenvalue `s` counts as an imaginary-axis crossing when
/// `|Re s| <= axis_tol * ||P||`. Eigenvalues with `|Re s| <= sqrt(axis_tol) * max(||P||, |s|)`
/// also count when their mirror image `-conj(s)` is absent from the spectrum (the
/// spectrum is symmetric about the axis, so an unpaired eigenvalue belongs on it) or
/// when `gamma` is nonpositive near `Im s`; this catches ill-conditioned and defective
/// axis eigenvalues that drift off the axis in floating point.
///
/// A1 and A2 require a margin of `64 eps (1 + ||.||_F)`, so a shift that zeroes the
/// abscissa or `lambda_min(D^T + D - xi I)` up to rounding is not strictly passive.
pub fn passivity_status<T: Real>(model: &StateSpaceModel<T>, xi: T, axis_tol: T) -> Result<PassivityStatus<T>> {
    let shifted = shift_model(model, xi);
    let spectral_abscissa = linalg::spectral_abscissa(&shifted.a)?;
    let d_sym = shifted.d_sym();
    let d_margin = linalg::lambda_min(&d_sym);
    let rounding = |m: &DMatrix<T>| T::c(64.0) * T::default_epsilon() * (T::one() + m.norm());
    let pencil = assemble_pencil(model, xi);
    let pe = pencil.eigenvalues()?;
    let pn = pencil.p.norm().max(T::tiny());
    let mut crossings: Vec<T> = Vec::new();
    let snap = axis_tol.powf(T::c(2.0 / 3.0)) * pn;
    for (idx, s) in pe.finite.iter().enumerate() {
        let re = s.re.abs();
        let on_axis = if re <= axis_tol * pn {
            true
        } else if re <= axis_tol.sqrt() * pn.max(s.modulus()) {
            let mirror = Complex::new(-s.re, s.im);
            let paired =
                pe.finite.iter().enumerate().any(|(k, t)| k != idx && (*t - mirror).modulus() <= T::c(0.5) * re);
            !paired || gamma_window_min(model, xi, s.im, T::c(10.0) * re)? <= axis_tol * pn
        } else {
            false
        };
        if on_axis {
            crossings.push(if s.im.abs() <= snap { T::zero() } else { s.im });
        }
    }
    crossings.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    crossings.dedup_by(|a, b| (*a - *b).abs() <= T::tol(1e-6) * T::one().max(a.abs()));
    Ok(PassivityStatus {
        a1: spectral_abscissa < -rounding(&shifted.a),
        a2: d_margin > rounding(&d_sym),
        a3: pe.regular && crossings.is_empty(),
        spectral_abscissa,
        d_margin,
        crossings,
        degenerate: !pe.regular,
    })
}

/// Smallest `gamma(xi, .)` at `omega - r`, `omega`, `omega + r`; a singular resolvent counts as zero.
fn gamma_window_min<T: Real>(model: &StateSpaceModel<T>, xi: T, omega: T, r: T) -> Result<T> {
    let mut best = T::huge();
    for w in [omega - r, omega, omega + r] {
        best = best.min(gamma_or_zero(model, xi, w)?);
    }
    Ok(best)
}

/// Whether `M` is passive (possibly not strictly): `M_{-eps}` is strictly passive for
/// `eps = tol * scale(M)`.
pub fn is_passive<T: Real>(model: &StateSpaceModel<T>, tol: T, axis_tol: T) -> Result<bool> {
    let eps = tol * model.scale();
    Ok(passivity_status(model, -eps, axis_tol)?.strictly_passive())
}

/// `min(-2 max Re lambda(A), lambda_min(D^T + D))` for strictly passive models, else 0.
pub fn xi_upper_bound<T: Real>(model: &StateSpaceModel<T>) -> Result<T> {
    xi_upper_bound_with(model, T::tol(AXIS_TOL))
}

pub fn xi_upper_bound_with<T: Real>(model: &StateSpaceModel<T>, axis_tol: T) -> Result<T> {
    let st = passivity_status(model, T::zero(), axis_tol)?;
    if !st.strictly_passive() {
        return Ok(T::zero());
    }
    Ok((-T::c(2.0) * st.spectral_abscissa).min(st.d_margin))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMethod {
    Bisection,
    Accelerated,
}

/// What happened at one trial shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiDecision {
    /// `M_xi` strictly passive: raises the lower end.
    Passive,
    /// `M_xi` not strictly passive: lowers the upper end.
    NotPassive,
    /// Upper end moved to a real root of the pencil at a midpoint frequency.
    RootUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiTraceEntry<T> {
    pub xi: T,
    pub decision: XiDecision,
    pub xi_lo: T,
    pub xi_hi: T,
}

/// Final bracket `[xi_lo, xi_hi]` for `Xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiResult<T: Real> {
    pub xi_lo: T,
    pub xi_hi: T,
    /// Upper bound the search started from.
    pub xi_up: T,
    pub iterations: usize,
    /// Number of strict-passivity tests performed.
    pub evaluations: usize,
    pub trace: Vec<XiTraceEntry<T>>,
    pub method: XiMethod,
    /// The accelerated iteration failed to shrink the bracket and bisection finished the job.
    pub stalled: bool,
}

impl<T: Real> XiResult<T> {
    fn trivial(method: XiMethod) -> Self {
        Self {
            xi_lo: T::zero(),
            xi_hi: T::zero(),
            xi_up: T::zero(),
            iterations: 0,
            evaluations: 1,
            trace: Vec::new(),
            method,
            stalled: false,
        }
    }

    pub fn width(&self) -> T {
        self.xi_hi - self.xi_lo
    }
}

fn bisect_bracket<T: Real>(
    model: &StateSpaceModel<T>,
    lo: &mut T,
    hi: &mut T,
    tau: T,
    axis_tol: T,
    trace: &mut Vec<XiTraceEntry<T>>,
    evaluations: &mut usize,
) -> Result<usize> {
    let mut it = 0;
    while *hi - *lo > tau {
        let mid = (*lo + *hi) * T::c(0.5);
        if mid <= *lo || mid >= *hi {
            break;
        }
        *evaluations += 1;
        it += 1;
        let passive = passivity_status(model, mid, axis_tol)?.strictly_passive();
        if passive {
            *lo = mid;
        } else {
            *hi = mid;
        }
        let decision = if passive { XiDecision::Passive } else { XiDecision::NotPassive };
        trace.push(XiTraceEntry { xi: mid, decision, xi_lo: *lo, xi_hi: *hi });
    }
    Ok(it)
}

/// Bisection on `[0, Xi_up]` with the strict-passivity test of `M_xi`.
pub fn xi_bisection<T: Real>(model: &StateSpaceModel<T>, tau: T) -> Result<XiResult<T>> {
    xi_bisection_with(model, tau, T::tol(AXIS_TOL))
}

pub fn xi_bisection_with<T: Real>(model: &StateSpaceModel<T>, tau: T, axis_tol: T) -> Result<XiResult<T>> {
    check_tau(tau)?;
    let xi_up = xi_upper_bound_with(model, axis_tol)?;
    if xi_up <= T::zero() {
        return Ok(XiResult::trivial(XiMethod::Bisection));
    }
    let (mut lo, mut hi) = (T::zero(), xi_up);
    let mut trace = Vec::new();
    let mut evaluations = 1;
    let iterations = bisect_bracket(model, &mut lo, &mut hi, tau, axis_tol, &mut trace, &mut evaluations)?;
    Ok(XiResult {
        xi_lo: lo,
        xi_hi: hi,
        xi_up,
        iterations,
        evaluations,
        trace,
        method: XiMethod::Bisection,
        stalled: false,
    })
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvariantViolation("tau must be positive and finite".into()))
    }
}

fn sort_reals<T: Real>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
}

/// Maximal frequency intervals on which `gamma(xi, omega) < 0`, found by testing the
/// sign of `gamma` between consecutive axis crossings. Unbounded end intervals are
/// reported with an infinite endpoint.
pub fn negative_intervals<T: Real>(model: &StateSpaceModel<T>, xi: T) -> Result<Vec<(T, T)>> {
    negative_intervals_with(model, xi, T::tol(AXIS_TOL))
}

pub fn negative_intervals_with<T: Real>(model: &StateSpaceModel<T>, xi: T, axis_tol: T) -> Result<Vec<(T, T)>> {
    let st = passivity_status(model, xi, axis_tol)?;
    intervals_from_crossings(model, xi, &st.crossings, axis_tol)
}

fn gamma_or_zero<T: Real>(model: &StateSpaceModel<T>, xi: T, omega: T) -> Result<T> {
    match eval_gamma(model, xi, omega) {
        Ok((_, g)) => Ok(g),
        Err(Error::ResolventSingular { .. }) => Ok(T::zero()),
        Err(e) => Err(e),
    }
}

fn intervals_from_crossings<T: Real>(
    model: &StateSpaceModel<T>,
    xi: T,
    crossings: &[T],
    axis_tol: T,
) -> Result<Vec<(T, T)>> {
    if crossings.is_empty() {
        return Ok(Vec::new());
    }
    let mut w: Vec<T> = crossings.to_vec();
    sort_reals(&mut w);
    let thresh = -axis_tol * (T::one() + linalg::norm2(&shift_model(model, xi).d_sym()));
    let inf = T::huge();
    let mut cand: Vec<(T, T, T)> = Vec::new();
    let first = w[0];
    cand.push((-inf, first, first - T::one().max(first.abs())));
    for pair in w.windows(2) {
        cand.push((pair[0], pair[1], (pair[0] + pair[1]) * T::c(0.5)));
    }
    let last = w[w.len() - 1];
    cand.push((last, inf, last + T::one().max(last.abs())));
    let mut out: Vec<(T, T)> = Vec::new();
    for (a, b, mid) in cand {
        if gamma_or_zero(model, xi, mid)? >= thresh {
            continue;
        }
        if let Some(prev) = out.last_mut() {
            if prev.1 == a && gamma_or_zero(model, xi, a)? < thresh {
                prev.1 = b;
                continue;
            }
        }
        out.push((a, b));
    }
    Ok(out
        .into_iter()
        .map(|(a, b)| (if a == -inf { -T::huge() } else { a }, if b == inf { T::huge() } else { b }))
        .collect())
}

/// Real `xi` for which `S_xi(i omega_hat)` is singular, ascending. Uses
/// `S_xi(i w) = S_0(i w) + xi G` with `G = [[0, I/2, 0], [I/2, 0, 0], [0, 0, -I]]`, so the
/// roots are the eigenvalues of `-G^{-1} S_0(i w)`.
pub fn real_shift_roots<T: Real>(model: &StateSpaceModel<T>, omega_hat: T) -> Result<Vec<T>> {
    let n = model.n();
    let m = model.m();
    let pencil = assemble_pencil(model, T::zero());
    let s0: CMatrix<T> = pencil.at(Complex::new(T::zero(), omega_hat));
    // -G^{-1} = [[0, -2I, 0], [-2I, 0, 0], [0, 0, I]] applied to S_0.
    let size = 2 * n + m;
    let mut k = CMatrix::<T>::zeros(size, size);
    let two = Complex::new(T::c(-2.0), T::zero());
    for j in 0..size {
        for i in 0..n {
            k[(i, j)] = two * s0[(n + i, j)];
            k[(n + i, j)] = two * s0[(i, j)];
        }
        for i in 0..m {
            k[(2 * n + i, j)] = s0[(2 * n + i, j)];
        }
    }
    if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularPencil { xi: f64::NAN });
    }
    let ev = ComplexSchur::new(k)?.eigenvalues();
    let mut roots: Vec<T> =
        ev.iter().filter(|z| z.im.abs() <= T::tol(1e-6) * (T::one() + z.re.abs())).map(|z| z.re).collect();
    sort_reals(&mut roots);
    Ok(roots)
}

/// Frequency-midpoint algorithm: test `Xi_up - tau`; if not strictly passive, move
/// `Xi_up` to the smallest real shift root at the midpoint of the largest negative
/// interval and repeat. Falls back to bisection (and sets `stalled`) when the bracket
/// stops shrinking.
pub fn xi_accelerated<T: Real>(model: &StateSpaceModel<T>, tau: T) -> Result<XiResult<T>> {
    xi_accelerated_with(model, tau, T::tol(AXIS_TOL))
}

pub fn xi_accelerated_with<T: Real>(model: &StateSpaceModel<T>, tau: T, axis_tol: T) -> Result<XiResult<T>> {
    check_tau(tau)?;
    let xi_up = xi_upper_bound_with(model, axis_tol)?;
    if xi_up <= T::zero() {
        return Ok(XiResult::trivial(XiMethod::Accelerated));
    }
    let step = tau * (T::one() - T::c(8.0) * T::default_epsilon());
    let (mut lo, mut hi) = (T::zero(), xi_up);
    let mut trace = Vec::new();
    let mut evaluations = 1;
    let mut iterations = 0;
    let mut stalled = false;
    while hi - lo > tau {
        iterations += 1;
        let hi_before = hi;
        let xhat = (hi - step).max(lo);
        evaluations += 1;
        let st = passivity_status(model, xhat, axis_tol)?;
        if st.strictly_passive() {
            lo = xhat;
            trace.push(XiTraceEntry { xi: xhat, decision: XiDecision::Passive, xi_lo: lo, xi_hi: hi });
            break;
        }
        hi = xhat;
        trace.push(XiTraceEntry { xi: xhat, decision: XiDecision::NotPassive, xi_lo: lo, xi_hi: hi });
        let intervals =
            if st.a1 && st.a2 { intervals_from_crossings(model, xhat, &st.crossings, axis_tol)? } else { Vec::new() };
        let mut root_moved = false;
        if let Some(&(w1, w2)) =
            intervals.iter().reduce(|best, cur| if cur.1 - cur.0 > best.1 - best.0 { cur } else { best })
        {
            let omega_hat = if w1 <= -T::huge() {
                w2 - T::one().max(w2.abs())
            } else if w2 >= T::huge() {
                w1 + T::one().max(w1.abs())
            } else {
                (w1 + w2) * T::c(0.5)
            };
            let roots = real_shift_roots(model, omega_hat)?;
            if let Some(&r) = roots.iter().find(|&&r| r > lo && r <= hi) {
                evaluations += 1;
                if passivity_status(model, r, axis_tol)?.strictly_passive() {
                    lo = r;
                    trace.push(XiTraceEntry { xi: r, decision: XiDecision::Passive, xi_lo: lo, xi_hi: hi });
                } else {
                    hi = r;
                    trace.push(XiTraceEntry { xi: r, decision: XiDecision::RootUpdate, xi_lo: lo, xi_hi: hi });
                    root_moved = true;
                }
            }
        }
        let shrink = hi_before - hi;
        if !root_moved && shrink <= tau * T::c(1.5) || iterations >= 100 {
            stalled = true;
            iterations += bisect_bracket(model, &mut lo, &mut hi, tau, axis_tol, &mut trace, &mut evaluations)?;
            break;
        }
    }
    Ok(XiResult { xi_lo: lo, xi_hi: hi, xi_up, iterations, evaluations, trace, method: XiMethod::Accelerated, stalled })
}

/// Runs the chosen algorithm.
pub fn compute_xi<T: Real>(model: &StateSpaceModel<T>, tau: T, method: XiMethod, axis_tol: T) -> Result<XiResult<T>> {
    match method {
        XiMethod::Bisection => xi_bisection_with(model, tau, axis_tol),
        XiMethod::Accelerated => xi_accelerated_with(model, tau, axis_tol),
    }
}

/// Optimally robust pH realization together with the data that produced it.
#[derive(Debug, Clone)]
pub struct OptimalPh<T: Real> {
    pub ph: PHRealization<T>,
    pub xi: XiResult<T>,
    pub certificate: Certificate<T>,
    /// I-passivity radius of `ph`.
    pub ph_radius: T,
}

/// Computes `Xi`, takes the stabilizing Riccati solution of `M_{xi_lo}` as certificate
/// and returns the induced pH realization of `M`.
pub fn optimal_ph<T: Real>(model: &StateSpaceModel<T>, tau: T) -> Result<OptimalPh<T>> {
    optimal_ph_with(model, tau, XiMethod::Accelerated, T::tol(AXIS_TOL))
}

pub fn optimal_ph_with<T: Real>(
    model: &StateSpaceModel<T>,
    tau: T,
    method: XiMethod,
    axis_tol: T,
) -> Result<OptimalPh<T>> {
    model.require_minimal()?;
    if !passivity_status(model, T::zero(), axis_tol)?.strictly_passive() {
        return Err(Error::NotStrictlyPassive);
    }
    let xi = compute_xi(model, tau, method, axis_tol)?;
    let are = solve_shifted_are(model, xi.xi_lo, AreMode::Stabilizing)?;
    let certificate = Certificate::new(model, are.x)?;
    let xs = xi_star(model, &certificate.x)?;
    if xs < xi.xi_lo - T::c(2.0) * tau {
        return Err(Error::ConstraintViolated(format!(
            "xi*(X) = {:.6e} is below xi_lo - 2 tau = {:.6e}",
            xs.f(),
            (xi.xi_lo - T::c(2.0) * tau).f()
        )));
    }
    let ph = transform_to_ph(model, &certificate)?;
    let ph_radius = radius::ph_radius(&ph)?;
    Ok(OptimalPh { ph, xi, certificate, ph_radius })
}

/// `sigma_min(S_xi(i omega)) / ||S_xi(i omega)||_F`, used to confirm pencil roots.
pub fn pencil_sigma_min<T: Real>(model: &StateSpaceModel<T>, xi: T, omega: T) -> T {
    let s = assemble_pencil(model, xi).at(Complex::new(T::zero(), omega));
    let nrm = s.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared()).sqrt().max(T::tiny());
    linalg::sigma_min_triple(&s).0 / nrm
}
