//! Dense and banded linear algebra on complex matrices.
//!
//! Dense Hermitian problems go to LAPACK `zheevd`. Large lattice windows are
//! handled by a banded LU of `H - sigma` followed by block inverse iteration,
//! which only resolves the eigenpairs closest to zero.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C = Complex64;
pub type CMat = DMatrix<C>;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);
pub const I: C = C::new(0.0, 1.0);

/// Matrices up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 1200;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag_real(d: &[f64]) -> CMat {
    let n = d.len();
    let mut m = CMat::zeros(n, n);
    for (i, x) in d.iter().enumerate() {
        m[(i, i)] = C::new(*x, 0.0);
    }
    m
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| C::new(rows[i][j], 0.0))
}

/// Direct sum of square blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(*b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).map(|z| z * 0.5)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    lapack_heevd(a, true).map(|(w, v)| (w, v.expect("vectors requested")))
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    lapack_heevd(a, false).map(|(w, _)| w)
}

fn lapack_heevd(a: &CMat, vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("eigh needs a square matrix, got {}x{}", n, a.ncols())));
    }
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| CMat::zeros(0, 0))));
    }
    let mut m = a.clone();
    let mut w = vec![0.0; n];
    let jobz = if vectors { b'V' } else { b'N' };
    let ni = n as i32;
    let mut info = 0;
    let mut wq = [ZERO];
    let mut rq = [0.0];
    let mut iq = [0];
    unsafe {
        lapack::zheevd(jobz, b'U', ni, m.as_mut_slice(), ni, &mut w, &mut wq, -1, &mut rq, -1, &mut iq, -1, &mut info);
    }
    let lwork = (wq[0].re as usize).max(1);
    let lrwork = (rq[0] as usize).max(1);
    let liwork = (iq[0] as usize).max(1);
    let mut work = vec![ZERO; lwork];
    let mut rwork = vec![0.0; lrwork];
    let mut iwork = vec![0i32; liwork];
    unsafe {
        lapack::zheevd(
            jobz,
            b'U',
            ni,
            m.as_mut_slice(),
            ni,
            &mut w,
            &mut work,
            lwork as i32,
            &mut rwork,
            lrwork as i32,
            &mut iwork,
            liwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zheevd info={info}")));
    }
    Ok((w, vectors.then_some(m)))
}

/// `sign(h) = h |h|^{-1}` through the eigendecomposition.
pub fn sign_flatten(h: &CMat, gap_floor: f64) -> Result<CMat> {
    let (w, v) = eigh(h)?;
    if let Some(bad) = w.iter().find(|x| x.abs() <= gap_floor) {
        return Err(Error::assumption(
            crate::error::Assumption::Sgc1,
            format!("eigenvalue {bad:e} within gap floor {gap_floor:e}; flattening refused"),
        ));
    }
    let s: Vec<f64> = w.iter().map(|x| x.signum()).collect();
    Ok(&v * diag_real(&s) * v.adjoint())
}

/// Orthonormal basis of the column span (thin Q factor).
pub fn orthonormalize(x: &CMat) -> CMat {
    let p = x.ncols().min(x.nrows());
    let q = x.clone().qr().q();
    q.columns(0, p).into_owned()
}

/// Compressed-row sparse complex matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C>,
}

impl SparseMatrix {
    /// Duplicates are summed; exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, C)>) -> Self {
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<C> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(trips.len());
        for (i, j, v) in trips {
            debug_assert!(i < nrows && j < ncols);
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                rows_of.push(i);
                last = Some((i, j));
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c0), v) in rows_of.iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c0);
                keep_vals.push(v);
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix { nrows, ncols, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    pub fn from_dense(a: &CMat) -> Self {
        let mut t = Vec::new();
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != ZERO {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, ONE)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        self.row(i).find(|(c0, _)| *c0 == j).map_or(ZERO, |(_, v)| v)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().into_iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    t.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, t)
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn mul_dense(&self, x: &CMat) -> CMat {
        assert_eq!(x.nrows(), self.ncols);
        let mut out = CMat::zeros(self.nrows, x.ncols());
        for k in 0..x.ncols() {
            let col = x.column(k);
            for i in 0..self.nrows {
                let mut acc = ZERO;
                for (j, v) in self.row(i) {
                    acc += v * col[j];
                }
                out[(i, k)] = acc;
            }
        }
        out
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            d = d.max((v - self.get(j, i).conj()).norm());
        }
        d
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// (lower, upper) bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// Row-sum bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Hermitian dilation `[[0, A*], [A, 0]]` with interleaved indices:
    /// slot `2j` carries the domain copy, slot `2i+1` the codomain copy.
    /// The grading `+1` on even slots, `-1` on odd slots anticommutes with it.
    pub fn dilation(&self) -> Self {
        assert_eq!(self.nrows, self.ncols, "dilation of a square matrix");
        let mut t = Vec::with_capacity(2 * self.nnz());
        for (i, j, v) in self.triplets() {
            t.push((2 * i + 1, 2 * j, v));
            t.push((2 * j, 2 * i + 1, v.conj()));
        }
        Self::from_triplets(2 * self.nrows, 2 * self.ncols, t)
    }

    /// Site-diagonal lift `1_sites ⊗ u` of an orbital matrix acting on `x`.
    pub fn fiber_lift(u: &CMat, sites: usize) -> Self {
        let n = u.nrows();
        let mut t = Vec::with_capacity(sites * n * n);
        for s in 0..sites {
            for a in 0..n {
                for b in 0..n {
                    if u[(a, b)] != ZERO {
                        t.push((s * n + a, s * n + b, u[(a, b)]));
                    }
                }
            }
        }
        Self::from_triplets(sites * n, sites * n, t)
    }
}

/// Banded LU factorization of `A - shift·1` (LAPACK `zgbtrf`).
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C>,
    ipiv: Vec<i32>,
}

impl BandLu {
    pub fn factor(a: &SparseMatrix, shift: f64) -> Result<Self> {
        let n = a.nrows();
        let (kl, ku) = a.bandwidth();
        let (kl, ku) = (kl.max(1), ku.max(1));
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![ZERO; ldab * n];
        for (i, j, v) in a.triplets() {
            ab[kl + ku + i - j + j * ldab] += v;
        }
        for i in 0..n {
            ab[kl + ku + i * ldab] -= C::new(shift, 0.0);
        }
        let mut ipiv = vec![0i32; n];
        let mut info = 0;
        unsafe {
            lapack::zgbtrf(n as i32, n as i32, kl as i32, ku as i32, &mut ab, ldab as i32, &mut ipiv, &mut info);
        }
        if info < 0 {
            return Err(Error::Numerical(format!("zgbtrf info={info}")));
        }
        if info > 0 {
            return Err(Error::Numerical("exactly singular shift".into()));
        }
        Ok(BandLu { n, kl, ku, ldab, ab, ipiv })
    }

    pub fn solve(&self, b: &mut CMat) -> Result<()> {
        assert_eq!(b.nrows(), self.n);
        let mut info = 0;
        unsafe {
            lapack::zgbtrs(
                b'N',
                self.n as i32,
                self.kl as i32,
                self.ku as i32,
                b.ncols() as i32,
                &self.ab,
                self.ldab as i32,
                &self.ipiv,
                b.as_mut_slice(),
                self.n as i32,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Numerical(format!("zgbtrs info={info}")));
        }
        Ok(())
    }
}

/// Eigenpairs of a Hermitian operator with |E| below a window.
#[derive(Clone, Debug)]
pub struct NearZero {
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// Smallest |E| outside the window that was resolved, if any.
    pub smallest_outside: Option<f64>,
}

pub fn near_zero_eigenpairs(h: &SparseMatrix, window: f64) -> Result<NearZero> {
    let n = h.nrows();
    if n <= DENSE_LIMIT {
        let (w, v) = eigh(&h.to_dense())?;
        let keep: Vec<usize> = (0..n).filter(|&k| w[k].abs() < window).collect();
        let outside = w.iter().filter(|x| x.abs() >= window).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let vectors = CMat::from_fn(n, keep.len(), |i, k| v[(i, keep[k])]);
        return Ok(NearZero {
            values: keep.iter().map(|&k| w[k]).collect(),
            vectors,
            smallest_outside: outside.is_finite().then_some(outside),
        });
    }
    shift_invert(h, window, 16)
}

/// Smallest |eigenvalue| of a Hermitian operator.
pub fn smallest_abs_eigenvalue(h: &SparseMatrix) -> Result<f64> {
    let n = h.nrows();
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    if n <= DENSE_LIMIT {
        let w = eigvalsh(&h.to_dense())?;
        return Ok(w.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min));
    }
    let nz = shift_invert(h, 0.0, 4)?;
    Ok(nz.smallest_outside.unwrap_or(0.0))
}

/// Block inverse iteration with `S = (H - σ)^{-1}`, `σ` tiny and irrational.
///
/// Pairs `±λ` are nearly degenerate for `S`, so Ritz vectors of `H` on the
/// block only converge inside the window. The next level outside is read off
/// the Ritz values of `S^2`, which converge in magnitude regardless.
fn shift_invert(h: &SparseMatrix, window: f64, p0: usize) -> Result<NearZero> {
    let n = h.nrows();
    let scale = h.norm_bound().max(1.0);
    let tol = 1e-10 * scale;
    let mut sigma = 0.618_033_988_75 * 1e-9 * scale;
    let lu = loop {
        match BandLu::factor(h, sigma) {
            Ok(lu) => break lu,
            Err(Error::Numerical(_)) if sigma.abs() < 1e-3 => sigma *= -3.1,
            Err(e) => return Err(e),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c0a_11e5);
    let mut p = p0.min(n);
    let mut x = CMat::zeros(n, 0);
    loop {
        let extra = CMat::from_fn(n, p - x.ncols(), |_, _| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let cols: Vec<_> = x.column_iter().chain(extra.column_iter()).map(|c| c.into_owned()).collect();
        x = orthonormalize(&CMat::from_columns(&cols));
        let mut prev_level = f64::NAN;
        let mut found = None;
        let mut saturated = false;
        let (mut theta, mut res) = rayleigh_ritz(h, &mut x)?;
        for _ in 0..400 {
            let inside: Vec<usize> = (0..p).filter(|&k| theta[k].abs() < window && res[k] < tol).collect();
            let m = inside.len();
            if m >= p {
                saturated = true;
                break;
            }
            let mut y = x.clone();
            lu.solve(&mut y)?;
            let rest: Vec<usize> = (0..p).filter(|k| !inside.contains(k)).collect();
            let y_out = CMat::from_fn(n, rest.len(), |i, k| y[(i, rest[k])]);
            let r = eigvalsh(&hermitize(&(y_out.adjoint() * &y_out)))?;
            let level = 1.0 / r.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE).sqrt() - sigma.abs();
            let stable = (level - prev_level).abs() <= 1e-3 * level.abs();
            prev_level = level;
            if stable && level >= 1.01 * window {
                let vectors = CMat::from_fn(n, m, |i, k| x[(i, inside[k])]);
                found = Some(NearZero { values: inside.iter().map(|&k| theta[k]).collect(), vectors, smallest_outside: Some(level) });
                break;
            }
            x = orthonormalize(&y);
            (theta, res) = rayleigh_ritz(h, &mut x)?;
        }
        match found {
            Some(nz) => return Ok(nz),
            None if p < n && (saturated || p < 64) => p = (2 * p).min(n),
            None => return Err(Error::Numerical("block inverse iteration did not converge".into())),
        }
    }
}

/// Rotates the orthonormal block `x` onto Ritz vectors of `h`; returns the
/// Ritz values and residual norms.
fn rayleigh_ritz(h: &SparseMatrix, x: &mut CMat) -> Result<(Vec<f64>, Vec<f64>)> {
    let hx = h.mul_dense(x);
    let (theta, s) = eigh(&hermitize(&(x.adjoint() * &hx)))?;
    *x = &*x * &s;
    let hx = hx * &s;
    let res = (0..x.ncols()).map(|k| (hx.column(k) - x.column(k) * C::new(theta[k], 0.0)).norm()).collect();
    Ok((theta, res))
}

/// Orthonormal basis `B` of C^N with `U conj(B) = B`, for `U conj(U) = 1`.
/// In the coordinates `B^* x` the real structure `x -> U conj(x)` is plain
/// complex conjugation.
pub fn real_structure_basis(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    let mut basis: Vec<nalgebra::DVector<C>> = Vec::new();
    let apply = |v: &nalgebra::DVector<C>| u * v.map(|z| z.conj());
    for k in 0..n {
        for phase in [ONE, I] {
            if basis.len() == n {
                break;
            }
            let mut e = nalgebra::DVector::<C>::zeros(n);
            e[k] = phase;
            let mut x = &e + apply(&e);
            for b in &basis {
                let coef = b.dotc(&x);
                x -= b * C::new(coef.re, 0.0);
            }
            let nrm = x.norm();
            if nrm > 0.1 {
                basis.push(x / C::new(nrm, 0.0));
            }
        }
    }
    if basis.len() != n {
        return Err(Error::Symmetry("could not build a real basis; U conj(U) != 1?".into()));
    }
    Ok(CMat::from_columns(&basis))
}

/// Orthonormal basis `(b1, A b1, b2, A b2, ...)` for `A x = U conj(x)` with
/// `U conj(U) = -1`. In these coordinates `A` is `j(x, y) = (-conj y, conj x)`.
pub fn quaternionic_basis(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    if n % 2 != 0 {
        return Err(Error::Symmetry("quaternionic structure on odd dimension".into()));
    }
    let mut basis: Vec<nalgebra::DVector<C>> = Vec::new();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut x = nalgebra::DVector::<C>::zeros(n);
        x[k] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&x);
                x -= b * coef;
            }
        }
        let nrm = x.norm();
        if nrm > 0.1 {
            let b1 = x / C::new(nrm, 0.0);
            let b2 = u * b1.map(|z| z.conj());
            basis.push(b1);
            basis.push(b2);
        }
    }
    if basis.len() != n {
        return Err(Error::Symmetry("could not build a quaternionic basis".into()));
    }
    Ok(CMat::from_columns(&basis))
}

/// Canonical quaternionic unit `diag(j, …, j)` with `j = [[0,-1],[1,0]]`.
pub fn canonical_j(n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for k in 0..n / 2 {
        m[(2 * k, 2 * k + 1)] = -ONE;
        m[(2 * k + 1, 2 * k)] = ONE;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_of_pauli_z() {
        let m = diag_real(&[1.0, -1.0]);
        let (w, _) = eigh(&m).unwrap();
        assert_eq!(w, vec![-1.0, 1.0]);
    }

    #[test]
    fn sign_flatten_diag() {
        let s = sign_flatten(&diag_real(&[2.0, -3.0]), 1e-12).unwrap();
        assert!(max_abs_diff(&s, &diag_real(&[1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn banded_solver_agrees_with_dense() {
        // Open chain starting and ending on a weak bond: one zero mode per end.
        let n = 1500;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            let hop = if i % 2 == 0 { 0.3 } else { 1.0 };
            t.push((i, i + 1, C::new(hop, 0.0)));
            t.push((i + 1, i, C::new(hop, 0.0)));
        }
        let h = SparseMatrix::from_triplets(n, n, t);
        let nz = shift_invert(&h, 1e-6, 8).unwrap();
        assert_eq!(nz.values.len(), 2);
        let nz2 = shift_invert(&h, 0.5, 4).unwrap();
        let dense = eigvalsh(&h.to_dense()).unwrap();
        let count = dense.iter().filter(|x| x.abs() < 0.5).count();
        assert_eq!(nz2.values.len(), count);
    }

    #[test]
    fn quaternionic_basis_canonicalizes() {
        let u = kron(&identity(2), &canonical_j(2));
        let b = quaternionic_basis(&u).unwrap();
        let j = b.adjoint() * &u * conj(&b);
        assert!(max_abs_diff(&j, &canonical_j(4)) < 1e-12);
    }

    #[test]
    fn real_basis_canonicalizes() {
        let u = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = real_structure_basis(&u).unwrap();
        let r = b.adjoint() * &u * conj(&b);
        assert!(max_abs_diff(&r, &identity(2)) < 1e-12);
    }
}
