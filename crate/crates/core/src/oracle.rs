//! Brute-force references: grid estimate of `Xi`, randomized search for radius upper
//! bounds, closed forms for scalar models, and a generator of random passive models.
//!
//! Random streams come from `ChaCha8Rng`; restart `k` of a search seeded with `s`
//! uses the stream seeded with `s + k * 0x9E37_79B9_7F4A_7C15` (wrapping).

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{eval_gamma, Certificate, CertificateClass, StateSpaceModel};
use crate::optimal::{passivity_status, xi_upper_bound_with, AXIS_TOL};
use crate::riccati::extremal_solutions;
use crate::scalar::Real;
use crate::search::golden_section;
use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream for restart `k` of a search seeded with `seed`.
pub fn derived_rng(seed: u64, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(k.wrapping_mul(SEED_STRIDE)))
}

fn gaussian<T: Real, R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let v: f64 = StandardNormal.sample(rng);
        T::c(v)
    })
}

/// Sampling grid for [`grid_xi_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub xi_points: usize,
    pub omega_points: usize,
    pub omega_max: T,
    pub log_spacing: bool,
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.xi_points < 2 || self.omega_points < 2 {
            return Err(Error::EmptyGrid("grid needs at least two points per axis".into()));
        }
        if !(self.omega_max > T::zero()) {
            return Err(Error::EmptyGrid("omega_max must be positive".into()));
        }
        Ok(())
    }

    /// Nonnegative frequency samples, always starting at 0.
    pub fn omegas(&self) -> Vec<T> {
        let k = self.omega_points;
        if self.log_spacing {
            let lo = (self.omega_max * T::c(1e-4)).log10();
            let hi = self.omega_max.log10();
            let mut w = vec![T::zero()];
            w.extend(
                (0..k - 1).map(|i| T::c(10.0).powf(lo + (hi - lo) * T::of_usize(i) / T::of_usize(k - 2).max(T::one()))),
            );
            w
        } else {
            (0..k).map(|i| self.omega_max * T::of_usize(i) / T::of_usize(k - 1)).collect()
        }
    }
}

/// Smallest `gamma(xi, .)` over the frequency grid, refined by golden-section search
/// around the three lowest grid minima. Returns `-inf` when the resolvent is singular.
fn min_gamma_on_grid<T: Real>(model: &StateSpaceModel<T>, xi: T, omegas: &[T]) -> Result<T> {
    let mut vals = Vec::with_capacity(omegas.len());
    for &w in omegas {
        match eval_gamma(model, xi, w) {
            Ok((_, g)) => vals.push(g),
            Err(Error::ResolventSingular { .. }) => return Ok(-T::huge()),
            Err(e) => return Err(e),
        }
    }
    let mut best = vals.iter().fold(T::huge(), |a, &b| a.min(b));
    let k = vals.len();
    let mut minima: Vec<usize> =
        (0..k).filter(|&i| (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == k || vals[i] <= vals[i + 1])).collect();
    minima.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
    for &i in minima.iter().take(3) {
        let lo = omegas[i.saturating_sub(1)];
        let hi = omegas[(i + 1).min(k - 1)];
        if hi <= lo {
            continue;
        }
        let f = |w: T| eval_gamma(model, xi, w).map(|r| r.1).unwrap_or(-T::huge());
        let g = golden_section(f, lo, hi, (hi - lo) * T::tol(1e-9), 200)?;
        best = best.min(g.fx);
    }
    Ok(best)
}

/// Grid estimate of `Xi`: the smallest grid shift in `[0, Xi_up]` at which `gamma` reaches
/// zero somewhere on the frequency grid (infinite frequency included through
/// `lambda_min(D^T + D - xi I)`). The grid is searched by bisection over its indices,
/// which relies on the nesting of the strictly passive shifts.
pub fn grid_xi_oracle<T: Real>(model: &StateSpaceModel<T>, g: &GridSpec<T>) -> Result<T> {
    g.validate()?;
    let axis_tol = T::tol(AXIS_TOL);
    if !passivity_status(model, T::zero(), axis_tol)?.strictly_passive() {
        return Ok(T::zero());
    }
    let xi_up = xi_upper_bound_with(model, axis_tol)?;
    let omegas = g.omegas();
    let k = g.xi_points;
    let xi_at = |i: usize| xi_up * T::of_usize(i) / T::of_usize(k - 1);
    let fails = |i: usize| -> Result<bool> {
        let xi = xi_at(i);
        let dinf = linalg::lambda_min(&(model.d_sym() - DMatrix::identity(model.m(), model.m()) * xi));
        if dinf <= T::zero() {
            return Ok(true);
        }
        Ok(min_gamma_on_grid(model, xi, &omegas)? <= T::zero())
    };
    // Index 0 passes (strictly passive model), index k - 1 fails (A1 or A2 saturates).
    let (mut lo, mut hi) = (0usize, k - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if fails(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(xi_at(hi))
}

/// Upper bound on the X-passivity radius: for random unit-Frobenius directions
/// `Delta_S`, the smallest `t` with `lambda_min(W(X, M + t Delta)) <= 0` is found by
/// doubling and bisection, and the minimum over all directions is returned.
pub fn random_perturbation_search<T: Real>(
    model: &StateSpaceModel<T>,
    cert: &Certificate<T>,
    restarts: usize,
    seed: u64,
) -> Result<T> {
    random_perturbation_search_with(model, cert, restarts, seed, &[])
}

/// As [`random_perturbation_search`], additionally trying the given directions first.
pub fn random_perturbation_search_with<T: Real>(
    model: &StateSpaceModel<T>,
    cert: &Certificate<T>,
    restarts: usize,
    seed: u64,
    extra_directions: &[DMatrix<T>],
) -> Result<T> {
    if cert.class != CertificateClass::Interior {
        return Err(Error::NotInterior { lambda_min_x: cert.lambda_min_x.f(), lambda_min_w: cert.lambda_min_w.f() });
    }
    let n = model.n();
    let m = model.m();
    let w = crate::model::assemble_w(model, &cert.x)?;
    let xh = linalg::block_diag(&cert.x, &DMatrix::identity(m, m));
    let mut best = T::huge();
    let mut try_dir = |d: &DMatrix<T>| {
        let nrm = d.norm();
        if nrm == T::zero() {
            return;
        }
        let d = d / nrm;
        let e = &xh * &d + d.transpose() * &xh;
        let fails = |t: T| Cholesky::new(linalg::symmetrize(&(&w + &e * t))).is_none();
        let mut hi = T::one();
        let mut grow = 0;
        while !fails(hi) {
            hi *= T::c(2.0);
            grow += 1;
            if grow > 60 || hi >= best {
                return;
            }
        }
        let mut lo = T::zero();
        while hi - lo > T::tol(1e-13) * hi {
            let mid = (lo + hi) * T::c(0.5);
            if fails(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi < best {
            best = hi;
        }
    };
    for d in extra_directions {
        if d.shape() != (n + m, n + m) {
            continue;
        }
        try_dir(d);
    }
    for k in 0..restarts {
        let mut rng = derived_rng(seed, k as u64);
        try_dir(&gaussian::<T, _>(&mut rng, n + m, n + m));
    }
    Ok(best)
}

/// `gamma(xi, omega)` of the scalar model `{a, b, c, d}`.
pub fn scalar_gamma(a: f64, b: f64, c: f64, d: f64, xi: f64, omega: f64) -> f64 {
    let s = a + xi / 2.0;
    2.0 * (-c * b * s / (s * s + omega * omega) + d - xi / 2.0)
}

/// Both roots `(X_-, X_+)` of the scalar Riccati equation `b^2 X^2 + (4ad - 2bc) X + c^2 = 0`.
pub fn scalar_are(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let p = 4.0 * a * d - 2.0 * b * c;
    let disc = (p * p - 4.0 * b * b * c * c).sqrt();
    ((-p - disc) / (2.0 * b * b), (-p + disc) / (2.0 * b * b))
}

/// `xi*(X)` of the scalar model `{a, b, c, d}`.
pub fn scalar_xi_star(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    let (p, q, r) = (-2.0 * a, 2.0 * d, c - b * x);
    ((p + q) - ((p - q) * (p - q) + 4.0 * r * r / x).sqrt()) / 2.0
}

/// Random strictly passive model built from pH data:
/// `A = (J - R) Q`, `B = G - K`, `C = (G + K)^T Q`, `D = S + N` with a positive definite
/// dissipation block and a random positive definite `Q` (so `X = Q` is an interior certificate).
#[derive(Debug, Clone)]
pub struct RandomPassive<T: Real> {
    pub model: StateSpaceModel<T>,
    pub q: DMatrix<T>,
}

pub fn random_passive_model<T: Real, R: Rng>(rng: &mut R, n: usize, m: usize) -> RandomPassive<T> {
    loop {
        let jr = gaussian::<T, _>(rng, n, n);
        let j = (&jr - jr.transpose()) * T::c(0.5);
        let l = gaussian::<T, _>(rng, n + m, n + m);
        let diss = &l * l.transpose() * T::c(1.0 / (n + m) as f64) + DMatrix::identity(n + m, n + m) * T::c(0.1);
        let r = diss.view((0, 0), (n, n)).into_owned();
        let k = diss.view((0, n), (n, m)).into_owned();
        let s = diss.view((n, n), (m, m)).into_owned();
        let g = gaussian::<T, _>(rng, n, m);
        let nr = gaussian::<T, _>(rng, m, m);
        let nn = (&nr - nr.transpose()) * T::c(0.5);
        let qr = gaussian::<T, _>(rng, n, n);
        let q = &qr * qr.transpose() * T::c(1.0 / n as f64) + DMatrix::identity(n, n) * T::c(0.5);
        let q = linalg::symmetrize(&q);
        let a = (&j - &r) * &q;
        let b = &g - &k;
        let c = (&g + &k).transpose() * &q;
        let d = &s + &nn;
        if let Ok(model) = StateSpaceModel::new(a, b, c, d) {
            if model.minimal {
                return RandomPassive { model, q };
            }
        }
    }
}

/// Random interior certificates: convex combinations of `X_-`, `X_+` and `extra`,
/// kept only if classified interior.
pub fn random_interior_certificates<T: Real, R: Rng>(
    model: &StateSpaceModel<T>,
    extra: &DMatrix<T>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Certificate<T>>> {
    let (lo, hi) = extremal_solutions(model)?;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 200 * count.max(1) {
            return Err(Error::ConvergenceFailure("sampling interior certificates".into()));
        }
        let w: [f64; 3] = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() + 0.2];
        let sum: f64 = w.iter().sum();
        let x = &lo.x * T::c(w[0] / sum) + &hi.x * T::c(w[1] / sum) + extra * T::c(w[2] / sum);
        let cert = Certificate::new(model, linalg::symmetrize(&x))?;
        if cert.class == CertificateClass::Interior {
            out.push(cert);
        }
    }
    Ok(out)
}
