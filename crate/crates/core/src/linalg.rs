//! Dense linear-algebra kernels on top of nalgebra: symmetric eigen-decompositions,
//! a reorderable complex Schur form, pencil eigenvalues by shift-and-invert, and
//! Lyapunov solves.

use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{Complex, ComplexField, DMatrix, DVector, Hessenberg, SymmetricEigen, LU, SVD};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Returns `(M + M^T) / 2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::c(0.5)
}

/// Largest entrywise deviation from symmetry.
pub fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn is_finite<T: Real>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct SymEig<T: Real> {
    pub values: DVector<T>,
    pub vectors: DMatrix<T>,
}

/// Symmetric eigen-decomposition; the input is symmetrized first.
pub fn sym_eig<T: Real>(m: &DMatrix<T>) -> SymEig<T> {
    let n = m.nrows();
    let e = SymmetricEigen::new(symmetrize(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = DVector::from_iterator(n, idx.iter().map(|&k| e.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (j, &k) in idx.iter().enumerate() {
        vectors.set_column(j, &e.eigenvectors.column(k));
    }
    SymEig { values, vectors }
}

pub fn lambda_min<T: Real>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

pub fn lambda_max<T: Real>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.max()
}

/// Smallest eigenvalue of a Hermitian matrix (the Hermitian part is taken first).
pub fn herm_lambda_min<T: Real>(m: &CMatrix<T>) -> T {
    let h = (m + m.adjoint()) * Complex::new(T::c(0.5), T::zero());
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

pub fn to_complex<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Spectral norm (largest singular value).
pub fn norm2<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    SVD::new(m.clone(), false, false).singular_values.max()
}

/// Numerical rank: number of singular values above `rel_tol * sigma_1`.
pub fn rank<T: Real>(m: &DMatrix<T>, rel_tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let s1 = sv.max();
    if s1 == T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * s1).count()
}

/// Smallest singular triple `(sigma, u, v)` of a complex matrix, `M v = sigma u`.
pub fn sigma_min_triple<T: Real>(m: &CMatrix<T>) -> (T, CVector<T>, CVector<T>) {
    let svd = SVD::new(m.clone(), true, true);
    let k = svd.singular_values.len() - 1;
    let u = svd.u.as_ref().expect("u requested").column(k).into_owned();
    let v = svd.v_t.as_ref().expect("v_t requested").row(k).adjoint();
    (svd.singular_values[k], u, v)
}

/// Givens pair `(c, s)` with real `c` such that `[[c, s], [-conj(s), c]] [f; g] = [r; 0]`.
fn givens<T: Real>(f: Complex<T>, g: Complex<T>) -> (T, Complex<T>) {
    let af = f.modulus();
    let ag = g.modulus();
    if ag == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    if af == T::zero() {
        return (T::zero(), g.conj() * Complex::new(T::one() / ag, T::zero()));
    }
    let rho = af.hypot(ag);
    let c = af / rho;
    let s = (f * Complex::new(T::one() / af, T::zero())) * g.conj() * Complex::new(T::one() / rho, T::zero());
    (c, s)
}

/// Applies the rotation to rows `k, k+1` of `h`, columns `cols`.
fn rot_rows<T: Real>(h: &mut CMatrix<T>, k: usize, cols: std::ops::Range<usize>, c: T, s: Complex<T>) {
    let cc = Complex::new(c, T::zero());
    for j in cols {
        let x = h[(k, j)];
        let y = h[(k + 1, j)];
        h[(k, j)] = cc * x + s * y;
        h[(k + 1, j)] = cc * y - s.conj() * x;
    }
}

/// Multiplies columns `k, k+1` of `h`, rows `rows`, by the adjoint rotation from the right.
fn rot_cols<T: Real>(h: &mut CMatrix<T>, k: usize, rows: std::ops::Range<usize>, c: T, s: Complex<T>) {
    let cc = Complex::new(c, T::zero());
    for i in rows {
        let x = h[(i, k)];
        let y = h[(i, k + 1)];
        h[(i, k)] = cc * x + s.conj() * y;
        h[(i, k + 1)] = cc * y - s * x;
    }
}

/// Complex Schur decomposition `M = Q T Q^H` with unitary `Q` and upper-triangular `T`.
#[derive(Debug, Clone)]
pub struct ComplexSchur<T: Real> {
    pub q: CMatrix<T>,
    pub t: CMatrix<T>,
}

impl<T: Real> ComplexSchur<T> {
    /// Computes the decomposition by Hessenberg reduction and single-shift QR.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::DimensionMismatch("Schur form needs a square matrix".into()));
        }
        if n == 0 {
            return Ok(Self { q: m.clone(), t: m });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry("eigenvalue input".into()));
        }
        let scale = m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()));
        if scale == T::zero() {
            return Ok(Self { q: CMatrix::identity(n, n), t: m });
        }
        let inv = Complex::new(T::one() / scale, T::zero());
        let (mut q, mut h) = Hessenberg::new(m * inv).unpack();
        for j in 0..n {
            for i in (j + 2)..n {
                h[(i, j)] = Complex::new(T::zero(), T::zero());
            }
        }
        let eps = T::default_epsilon();
        let zero = Complex::new(T::zero(), T::zero());
        let mut hi = n - 1;
        let mut its = 0usize;
        let mut total = 0usize;
        let max_total = 60 * n.max(2);
        while hi > 0 {
            let mut lo = hi;
            while lo > 0 {
                let mut s = h[(lo - 1, lo - 1)].norm1() + h[(lo, lo)].norm1();
                if s == T::zero() {
                    s = T::one();
                }
                if h[(lo, lo - 1)].norm1() <= eps * s {
                    h[(lo, lo - 1)] = zero;
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                its = 0;
                continue;
            }
            its += 1;
            total += 1;
            if total > max_total {
                return Err(Error::ConvergenceFailure("complex Schur QR iteration".into()));
            }
            let mu = if its.is_multiple_of(10) {
                h[(hi, hi)] + Complex::new(T::c(0.75) * h[(hi, hi - 1)].re.abs(), T::zero())
            } else {
                let a = h[(hi - 1, hi - 1)];
                let b = h[(hi - 1, hi)];
                let c = h[(hi, hi - 1)];
                let d = h[(hi, hi)];
                let p = (a - d) * Complex::new(T::c(0.5), T::zero());
                let disc = (p * p + b * c).sqrt();
                let r1 = p + disc;
                let r2 = p - disc;
                if r1.modulus() <= r2.modulus() {
                    d + r1
                } else {
                    d + r2
                }
            };
            for k in lo..hi {
                let (f, g) =
                    if k == lo { (h[(lo, lo)] - mu, h[(lo + 1, lo)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
                let (c, s) = givens(f, g);
                let start = if k > lo { k - 1 } else { k };
                rot_rows(&mut h, k, start..n, c, s);
                let end = (k + 3).min(hi + 1);
                rot_cols(&mut h, k, 0..end, c, s);
                rot_cols(&mut q, k, 0..n, c, s);
                if k > lo {
                    h[(k + 1, k - 1)] = zero;
                }
            }
        }
        let t = h * Complex::new(scale, T::zero());
        let mut t = t;
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = zero;
            }
        }
        Ok(Self { q, t })
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps the adjacent diagonal entries `k` and `k+1` by a unitary similarity.
    fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rot_rows(&mut self.t, k, k..n, c, s);
        rot_cols(&mut self.t, k, 0..k + 2, c, s);
        rot_cols(&mut self.q, k, 0..n, c, s);
        self.t[(k + 1, k)] = Complex::new(T::zero(), T::zero());
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }

    /// Moves every eigenvalue satisfying `select` to the leading block and returns
    /// the size of that block.
    pub fn reorder<F: Fn(Complex<T>) -> bool>(&mut self, select: F) -> usize {
        let n = self.t.nrows();
        let mut target = 0;
        for j in 0..n {
            if select(self.t[(j, j)]) {
                let mut k = j;
                while k > target {
                    self.swap(k - 1);
                    k -= 1;
                }
                target += 1;
            }
        }
        target
    }
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues<T: Real>(a: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    Ok(ComplexSchur::new(to_complex(a))?.eigenvalues())
}

/// Largest real part of the eigenvalues of `a` (negative infinity for empty `a`).
pub fn spectral_abscissa<T: Real>(a: &DMatrix<T>) -> Result<T> {
    Ok(eigenvalues(a)?.iter().fold(-T::huge(), |acc, z| acc.max(z.re)))
}

/// Eigenvector matrix `V` with `A = V diag(lambda) V^{-1}` for a diagonalizable real `A`,
/// computed from the complex Schur form. Returns `None` when `A` is (numerically) defective.
pub fn eigenvectors<T: Real>(a: &DMatrix<T>) -> Result<Option<CMatrix<T>>> {
    let n = a.nrows();
    let schur = ComplexSchur::new(to_complex(a))?;
    let t = &schur.t;
    let tnorm = t.iter().fold(T::zero(), |acc, z| acc.max(z.modulus())).max(T::tiny());
    let eps = T::default_epsilon();
    let mut xt = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        xt[(k, k)] = Complex::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let mut num = Complex::new(T::zero(), T::zero());
            for j in (i + 1)..=k {
                num += t[(i, j)] * xt[(j, k)];
            }
            let den = t[(i, i)] - lam;
            if den.modulus() <= T::c(1e3) * eps * tnorm {
                if num.modulus() <= eps.sqrt() * tnorm {
                    xt[(i, k)] = Complex::new(T::zero(), T::zero());
                    continue;
                }
                return Ok(None);
            }
            xt[(i, k)] = -num / den;
        }
        let nrm = xt.column(k).norm();
        let inv = Complex::new(T::one() / nrm, T::zero());
        for i in 0..=k {
            xt[(i, k)] *= inv;
        }
    }
    let v = &schur.q * xt;
    let sv = SVD::new(v.clone(), false, false).singular_values;
    if !(sv.min() > T::tol(1e-10) * sv.max()) {
        return Ok(None);
    }
    Ok(Some(v))
}

/// Finite generalized eigenvalues of a square real pencil `P - s E`.
#[derive(Debug, Clone)]
pub struct PencilEig<T: Real> {
    /// `false` when `P - s E` is numerically singular for every trial shift.
    pub regular: bool,
    pub finite: Vec<Complex<T>>,
    /// Number of eigenvalues classified as infinite.
    pub infinite: usize,
}

/// Real shift `sigma` with the best reciprocal condition of `P - sigma E` among a fixed
/// set of trial points scaled by `||P|| / ||E||`, together with that condition number.
fn best_shift<T: Real>(p: &DMatrix<T>, e: &DMatrix<T>) -> (T, T, T) {
    let pn = p.norm().max(T::tiny());
    let en = e.norm().max(T::tiny());
    let scale = pn / en;
    let trial = [0.618_034, -0.414_214, 1.324_718, -0.732_051, 2.236_068, -1.847_759];
    let mut best: Option<(T, T)> = None;
    for &c in &trial {
        let sigma = scale * T::c(c);
        let sv = SVD::new(p - e * sigma, false, false).singular_values;
        let smax = sv.max();
        let rcond = if smax > T::zero() { sv.min() / smax } else { T::zero() };
        if best.is_none_or(|(r, _)| rcond > r) {
            best = Some((rcond, sigma));
        }
    }
    let (rcond, sigma) = best.expect("at least one trial shift");
    (rcond, sigma, scale)
}

fn is_infinite_mu<T: Real>(mu: Complex<T>, cnorm: T, scale: T) -> bool {
    let am = mu.modulus();
    am <= T::c(1e3) * T::default_epsilon() * cnorm || am * T::c(1e7) * scale <= T::one()
}

/// Generalized eigenvalues by shift-and-invert: with a well-conditioned real shift
/// `sigma`, eigenvalues `mu` of `(P - sigma E)^{-1} E` map to `sigma + 1/mu`.
pub fn pencil_eigenvalues<T: Real>(p: &DMatrix<T>, e: &DMatrix<T>) -> Result<PencilEig<T>> {
    let (rcond, sigma, scale) = best_shift(p, e);
    if rcond <= T::tol(1e-10) {
        return Ok(PencilEig { regular: false, finite: Vec::new(), infinite: 0 });
    }
    let cm = LU::new(p - e * sigma)
        .solve(e)
        .ok_or_else(|| Error::ConvergenceFailure("shift-and-invert factorization".into()))?;
    let cnorm = cm.norm();
    let mut finite = Vec::new();
    let mut infinite = 0;
    for mu in eigenvalues(&cm)? {
        if is_infinite_mu(mu, cnorm, scale) {
            infinite += 1;
        } else {
            finite.push(Complex::new(sigma, T::zero()) + Complex::new(T::one(), T::zero()) / mu);
        }
    }
    Ok(PencilEig { regular: true, finite, infinite })
}

/// Solves `A^T X + X A = -Q` for symmetric `X`; `A` must have no pair of eigenvalues
/// with `lambda_i + conj(lambda_j) = 0`.
pub fn lyapunov<T: Real>(a: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let schur = ComplexSchur::new(to_complex(a))?;
    let u = &schur.q;
    let t = &schur.t;
    let f = -(u.adjoint() * to_complex(q) * u);
    let th = t.adjoint();
    let mut y = CMatrix::<T>::zeros(n, n);
    let tiny = T::default_epsilon() * a.norm().max(T::one());
    for j in 0..n {
        let mut rhs = f.column(j).into_owned();
        for k in 0..j {
            let tk = t[(k, j)];
            for i in 0..n {
                rhs[i] -= y[(i, k)] * tk;
            }
        }
        let shift = t[(j, j)];
        for i in 0..n {
            let mut acc = rhs[i];
            for l in 0..i {
                acc -= th[(i, l)] * y[(l, j)];
            }
            let diag = th[(i, i)] + shift;
            if diag.modulus() <= tiny {
                return Err(Error::ConvergenceFailure("Lyapunov solve (singular Sylvester operator)".into()));
            }
            y[(i, j)] = acc / diag;
        }
    }
    let x = u * y * u.adjoint();
    Ok(symmetrize(&x.map(|z| z.re)))
}
