//! Dense linear algebra over generic ring objects.
//!
//! Includes fraction-free (Bareiss) determinants usable over any ring with
//! exact division, reduced row echelon form with a recorded transform for
//! repeated solves against the same matrix, Sylvester resultants, and the
//! Bezout cofactor identity `u*A + v*B = Res(A, B)` computed exactly via
//! Cramer minors.

use crate::error::{Error, Result};
use crate::poly::{BiPoly, PolyRing, UniPoly};
use crate::ring::{FieldRing, Ring};
use std::ops::{Index, IndexMut};

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<T>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            writeln!(f, "  {:?}", &self.data[i * self.ncols..(i + 1) * self.ncols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<[usize; 2]> for Mat<T> {
    type Output = T;
    fn index(&self, idx: [usize; 2]) -> &T {
        debug_assert!(idx[0] < self.nrows && idx[1] < self.ncols);
        &self.data[idx[0] * self.ncols + idx[1]]
    }
}

impl<T> IndexMut<[usize; 2]> for Mat<T> {
    fn index_mut(&mut self, idx: [usize; 2]) -> &mut T {
        debug_assert!(idx[0] < self.nrows && idx[1] < self.ncols);
        &mut self.data[idx[0] * self.ncols + idx[1]]
    }
}

impl<T: Clone> Mat<T> {
    pub fn filled(nrows: usize, ncols: usize, fill: T) -> Self {
        Mat { nrows, ncols, data: vec![fill; nrows * ncols] }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn row_slice(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }
}

pub fn identity<R: Ring>(n: usize, ring: &R) -> Mat<R::Elem> {
    Mat::from_fn(n, n, |i, j| if i == j { ring.one() } else { ring.zero() })
}

pub fn mat_mul<R: Ring>(a: &Mat<R::Elem>, b: &Mat<R::Elem>, ring: &R) -> Mat<R::Elem> {
    assert_eq!(a.ncols, b.nrows, "dimension mismatch in matrix product");
    Mat::from_fn(a.nrows, b.ncols, |i, j| {
        let mut acc = ring.zero();
        for k in 0..a.ncols {
            acc = ring.mul_add(&acc, &a[[i, k]], &b[[k, j]]);
        }
        acc
    })
}

pub fn mat_vec<R: Ring>(a: &Mat<R::Elem>, v: &[R::Elem], ring: &R) -> Vec<R::Elem> {
    assert_eq!(a.ncols, v.len(), "dimension mismatch in matrix-vector product");
    (0..a.nrows)
        .map(|i| {
            let mut acc = ring.zero();
            for k in 0..a.ncols {
                acc = ring.mul_add(&acc, &a[[i, k]], &v[k]);
            }
            acc
        })
        .collect()
}

pub fn mat_add<R: Ring>(a: &Mat<R::Elem>, b: &Mat<R::Elem>, ring: &R) -> Mat<R::Elem> {
    assert_eq!((a.nrows, a.ncols), (b.nrows, b.ncols));
    Mat::from_fn(a.nrows, a.ncols, |i, j| ring.add(&a[[i, j]], &b[[i, j]]))
}

/// Fraction-free determinant (Bareiss).  Every division performed is exact in
/// any integral domain, so this works over polynomial rings and `Z[X]/(pi)`.
pub fn det_bareiss<R: Ring>(m: &Mat<R::Elem>, ring: &R) -> R::Elem {
    assert_eq!(m.nrows, m.ncols, "determinant of a non-square matrix");
    let n = m.nrows;
    if n == 0 {
        return ring.one();
    }
    let mut a = m.clone();
    let mut sign_flip = false;
    let mut prev = ring.one();
    for k in 0..n - 1 {
        if ring.is_zero(&a[[k, k]]) {
            let swap = (k + 1..n).find(|&i| !ring.is_zero(&a[[i, k]]));
            match swap {
                Some(i) => {
                    a.swap_rows(k, i);
                    sign_flip = !sign_flip;
                }
                None => return ring.zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = ring.sub(
                    &ring.mul(&a[[k, k]], &a[[i, j]]),
                    &ring.mul(&a[[i, k]], &a[[k, j]]),
                );
                a[[i, j]] = ring
                    .exact_div(&num, &prev)
                    .expect("Bareiss division is exact in an integral domain");
            }
            a[[i, k]] = ring.zero();
        }
        prev = a[[k, k]].clone();
    }
    let det = a[[n - 1, n - 1]].clone();
    if sign_flip {
        ring.neg(&det)
    } else {
        det
    }
}

/// Reduced row echelon form of `a` together with the transform `t` such that
/// `t * a = r`.  Prefactoring a matrix this way lets many right-hand sides be
/// solved by a single matrix-vector product each.
pub struct Rref<F: FieldRing> {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub r: Mat<F::Elem>,
    pub t: Mat<F::Elem>,
}

pub fn rref_with_transform<F: FieldRing>(a: &Mat<F::Elem>, field: &F) -> Rref<F> {
    let mut r = a.clone();
    let mut t = identity(a.nrows, field);
    let mut pivots = Vec::new();
    let mut row = 0usize;
    for col in 0..a.ncols {
        if row == a.nrows {
            break;
        }
        let pivot = (row..a.nrows).find(|&i| !field.is_zero(&r[[i, col]]));
        let Some(p) = pivot else { continue };
        r.swap_rows(row, p);
        t.swap_rows(row, p);
        let inv = field.invert(&r[[row, col]]).expect("nonzero field element");
        for j in 0..r.ncols {
            r[[row, j]] = field.mul(&r[[row, j]], &inv);
        }
        for j in 0..t.ncols {
            t[[row, j]] = field.mul(&t[[row, j]], &inv);
        }
        for i in 0..a.nrows {
            if i == row || field.is_zero(&r[[i, col]]) {
                continue;
            }
            let factor = r[[i, col]].clone();
            for j in 0..r.ncols {
                let delta = field.mul(&factor, &r[[row, j]]);
                r[[i, j]] = field.sub(&r[[i, j]], &delta);
            }
            for j in 0..t.ncols {
                let delta = field.mul(&factor, &t[[row, j]]);
                t[[i, j]] = field.sub(&t[[i, j]], &delta);
            }
        }
        pivots.push(col);
        row += 1;
    }
    Rref { rank: row, pivots, r, t }
}

impl<F: FieldRing> Rref<F> {
    /// Solve `A x = b` using the prefactored form.  Requires full column
    /// rank for a unique solution; inconsistent systems are reported.
    pub fn solve(&self, b: &[F::Elem], field: &F) -> Result<Vec<F::Elem>> {
        if self.rank < self.r.ncols {
            return Err(Error::RankDeficient);
        }
        let y = mat_vec(&self.t, b, field);
        for item in y.iter().skip(self.rank) {
            if !field.is_zero(item) {
                return Err(Error::Inconsistent);
            }
        }
        // with full column rank the top of r is the identity
        Ok(y[..self.rank].to_vec())
    }
}

/// Solve a dense system `A x = b` over a field, requiring a unique solution.
/// The solution is verified against the original system before returning.
pub fn dense_solve<F: FieldRing>(
    a: &Mat<F::Elem>,
    b: &[F::Elem],
    field: &F,
) -> Result<Vec<F::Elem>> {
    let fact = rref_with_transform(a, field);
    let x = fact.solve(b, field)?;
    let back = mat_vec(a, &x, field);
    for (lhs, rhs) in back.iter().zip(b) {
        if lhs != rhs {
            return Err(Error::Inconsistent);
        }
    }
    Ok(x)
}

/// Sylvester matrix of two polynomials in `y` with coefficients in `R[t]`
/// (coefficients listed high degree first, standard layout).
pub fn sylvester_y<R: Ring>(
    a: &BiPoly<R>,
    b: &BiPoly<R>,
    ring: &R,
) -> Mat<UniPoly<R>> {
    let m = a.deg_y().expect("nonzero polynomial");
    let n = b.deg_y().expect("nonzero polynomial");
    let size = m + n;
    let mut mat = Mat::filled(size, size, UniPoly::<R>::zero());
    let _ = ring;
    for i in 0..n {
        for k in 0..=m {
            mat[[i, i + k]] = a.row(m - k);
        }
    }
    for j in 0..m {
        for k in 0..=n {
            mat[[n + j, j + k]] = b.row(n - k);
        }
    }
    mat
}

/// Resultant with respect to `y` of two bivariate polynomials, an element of
/// `R[t]`.
pub fn resultant_y<R: Ring>(a: &BiPoly<R>, b: &BiPoly<R>, ring: &R) -> UniPoly<R> {
    if a.is_zero() || b.is_zero() {
        return UniPoly::zero();
    }
    if a.deg_y0() == 0 && b.deg_y0() == 0 {
        return UniPoly::one(ring); // empty Sylvester matrix
    }
    let syl = sylvester_y(a, b, ring);
    let pring = PolyRing::new(ring.clone());
    det_bareiss(&syl, &pring)
}

/// Exact Bezout identity: returns `(u, v, r)` with `u*a + v*b = r` where `r`
/// is the resultant `Res_y(a, b)`, `deg_y u < deg_y b` and `deg_y v < deg_y a`.
/// Fails with `RankDeficient` when the resultant vanishes.
pub fn bezout_cofactors<R: Ring>(
    a: &BiPoly<R>,
    b: &BiPoly<R>,
    ring: &R,
) -> Result<(BiPoly<R>, BiPoly<R>, UniPoly<R>)> {
    let m = a.deg_y().expect("nonzero polynomial");
    let n = b.deg_y().expect("nonzero polynomial");
    assert!(m + n > 0, "both inputs constant in y");
    let syl = sylvester_y(a, b, ring);
    let size = m + n;
    let pring = PolyRing::new(ring.clone());
    // Cramer solve of S^T c = r * e_last: c_i is the signed minor of S with
    // row i and the last column removed.
    let mut coeffs: Vec<UniPoly<R>> = Vec::with_capacity(size);
    for i in 0..size {
        let minor = Mat::from_fn(size - 1, size - 1, |r_, c_| {
            let src_row = if r_ < i { r_ } else { r_ + 1 };
            syl[[src_row, c_]].clone()
        });
        let det = det_bareiss(&minor, &pring);
        // sign (-1)^(i + size-1)
        let signed = if (i + size - 1) % 2 == 0 { det } else { det.neg(ring) };
        coeffs.push(signed);
    }
    // rows 0..n of S hold shifts of a, so their multipliers form u (degree
    // n-1 in y, highest shift first); rows n.. form v.
    let u = BiPoly::from_rows((0..n).map(|i| coeffs[n - 1 - i].clone()).collect());
    let v = BiPoly::from_rows((0..m).map(|j| coeffs[size - 1 - j].clone()).collect());
    let combo = u.mul(a, ring).add(&v.mul(b, ring), ring);
    if combo.deg_y0() != 0 {
        return Err(Error::InvariantViolation(
            "Bezout combination is not constant in y".into(),
        ));
    }
    let r = combo.row(0);
    if r.is_zero() {
        return Err(Error::RankDeficient);
    }
    debug_assert_eq!(r, resultant_y(a, b, ring), "Cramer route must match the resultant");
    Ok((u, v, r))
}

/// Invert a square matrix of polynomials modulo `B`, i.e. over `k[t]/B`.
/// Returns `NotInvertibleModB` when no unit pivot can be found (the
/// determinant is a zero divisor mod `B`).
pub fn polymatrix_inverse_mod<F, Q>(m: &Mat<UniPoly<F>>, quot: &Q) -> Result<Mat<UniPoly<F>>>
where
    F: FieldRing,
    Q: Ring<Elem = UniPoly<F>>,
{
    assert_eq!(m.nrows, m.ncols);
    let n = m.nrows;
    let mut a = m.clone();
    let mut inv = identity(n, quot);
    for col in 0..n {
        let pivot = (col..n).find_map(|i| {
            quot.invert(&a[[i, col]]).map(|piv_inv| (i, piv_inv))
        });
        let Some((prow, piv_inv)) = pivot else {
            return Err(Error::NotInvertibleModB);
        };
        a.swap_rows(col, prow);
        inv.swap_rows(col, prow);
        for j in 0..n {
            a[[col, j]] = quot.mul(&a[[col, j]], &piv_inv);
            inv[[col, j]] = quot.mul(&inv[[col, j]], &piv_inv);
        }
        for i in 0..n {
            if i == col || quot.is_zero(&a[[i, col]]) {
                continue;
            }
            let factor = a[[i, col]].clone();
            for j in 0..n {
                let d1 = quot.mul(&factor, &a[[col, j]]);
                a[[i, j]] = quot.sub(&a[[i, j]], &d1);
                let d2 = quot.mul(&factor, &inv[[col, j]]);
                inv[[i, j]] = quot.sub(&inv[[i, j]], &d2);
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QuotRing;
    use crate::ring::Zp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(c: &[u64], f: &Zp) -> UniPoly<Zp> {
        UniPoly::from_coeffs(c.to_vec(), f)
    }

    #[test]
    fn det_small() {
        let f = Zp::new(101);
        let m = Mat::from_fn(2, 2, |i, j| ((i * 2 + j + 1) as u64) % 101); // [[1,2],[3,4]]
        assert_eq!(det_bareiss(&m, &f), f.from_i64(-2));
        // singular matrix (rows in arithmetic progression)
        let s = Mat::from_fn(3, 3, |i, j| ((i + j) as u64) % 101);
        assert_eq!(det_bareiss(&s, &f), 0);
    }

    #[test]
    fn det_matches_expansion_fuzz() {
        let f = Zp::new(13);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.gen_range(1..5);
            let m = Mat::from_fn(n, n, |_, _| rng.gen_range(0..13u64));
            let expect = det_permanent_expansion(&m, &f);
            assert_eq!(det_bareiss(&m, &f), expect);
        }
    }

    fn det_permanent_expansion(m: &Mat<u64>, f: &Zp) -> u64 {
        // Laplace expansion along the first row (test-only, exponential)
        let n = m.nrows;
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[[0, 0]];
        }
        let mut acc = 0u64;
        for j in 0..n {
            if m[[0, j]] == 0 {
                continue;
            }
            let sub = Mat::from_fn(n - 1, n - 1, |r, c| {
                m[[r + 1, if c < j { c } else { c + 1 }]]
            });
            let term = f.mul(&m[[0, j]], &det_permanent_expansion(&sub, f));
            acc = if j % 2 == 0 { f.add(&acc, &term) } else { f.sub(&acc, &term) };
        }
        acc
    }

    #[test]
    fn rref_solver() {
        let f = Zp::new(7);
        // A = [[1,2],[3,4],[5,6]] (full column rank), b = A * [2,3]
        let a = Mat::from_fn(3, 2, |i, j| ((i * 2 + j + 1) as u64) % 7);
        let x_true = vec![2u64, 3u64];
        let b = mat_vec(&a, &x_true, &f);
        let x = dense_solve(&a, &b, &f).unwrap();
        assert_eq!(x, x_true);
        // inconsistent right-hand side
        let mut bad = b.clone();
        bad[2] = f.add(&bad[2], &1);
        assert!(matches!(dense_solve(&a, &bad, &f), Err(Error::Inconsistent)));
        // rank-deficient matrix
        let r = Mat::from_fn(2, 2, |i, _| if i == 0 { 1u64 } else { 2u64 });
        assert!(matches!(dense_solve(&r, &[1, 2], &f), Err(Error::RankDeficient)));
    }

    #[test]
    fn resultant_simple() {
        let f = Zp::new(5);
        // A = y^2 - t, B = 2y: Res = -4t = t over F_5
        let a = BiPoly::from_rows(vec![poly(&[0, 4], &f), UniPoly::zero(), poly(&[1], &f)]);
        let b = BiPoly::from_rows(vec![UniPoly::zero(), poly(&[2], &f)]);
        let r = resultant_y(&a, &b, &f);
        assert_eq!(r, poly(&[0, 1], &f));
    }

    #[test]
    fn resultant_detects_common_factor() {
        let f = Zp::new(7);
        // plant a common factor (y - t)
        let common = BiPoly::from_rows(vec![poly(&[0, 6], &f), poly(&[1], &f)]);
        let a = common.mul(
            &BiPoly::from_rows(vec![poly(&[1, 1], &f), poly(&[3], &f)]),
            &f,
        );
        let b = common.mul(
            &BiPoly::from_rows(vec![poly(&[2], &f), poly(&[0, 5], &f)]),
            &f,
        );
        assert!(resultant_y(&a, &b, &f).is_zero());
    }

    #[test]
    fn bezout_identity_fuzz() {
        let f = Zp::new(11);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut found = 0;
        for _ in 0..60 {
            let da = rng.gen_range(1..4);
            let db = rng.gen_range(1..4);
            let rand_bi = |rng: &mut ChaCha8Rng, d: usize| {
                BiPoly::from_rows(
                    (0..=d)
                        .map(|j| {
                            let len = rng.gen_range(1..4);
                            let mut c: Vec<u64> =
                                (0..len).map(|_| rng.gen_range(0..11)).collect();
                            if j == d && c.iter().all(|&v| v == 0) {
                                c[0] = 1;
                            }
                            poly(&c, &f)
                        })
                        .collect(),
                )
            };
            let a = rand_bi(&mut rng, da);
            let b = rand_bi(&mut rng, db);
            match bezout_cofactors(&a, &b, &f) {
                Ok((u, v, r)) => {
                    found += 1;
                    let combo = u.mul(&a, &f).add(&v.mul(&b, &f), &f);
                    assert_eq!(combo.deg_y0(), 0);
                    assert_eq!(combo.row(0), r);
                    assert_eq!(r, resultant_y(&a, &b, &f));
                    assert!(u.deg_y0() < db);
                    assert!(v.deg_y0() < da);
                }
                Err(Error::RankDeficient) => {} // genuinely resultant zero
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
        assert!(found > 30, "most random pairs are coprime");
    }

    #[test]
    fn polymatrix_inverse() {
        let f = Zp::new(5);
        // 1x1: inverse of (1+t) mod t^3 is 1 + 4t + t^2
        let q = QuotRing::new(f.clone(), poly(&[0, 0, 0, 1], &f));
        let m = Mat::from_fn(1, 1, |_, _| poly(&[1, 1], &f));
        let inv = polymatrix_inverse_mod(&m, &q).unwrap();
        assert_eq!(inv[[0, 0]], poly(&[1, 4, 1], &f));
        // 2x2 with t on the diagonal is not invertible mod t^3
        let bad = Mat::from_fn(2, 2, |i, j| if i == j { poly(&[0, 1], &f) } else { UniPoly::zero() });
        assert!(matches!(polymatrix_inverse_mod(&bad, &q), Err(Error::NotInvertibleModB)));
        // random invertible matrices round-trip
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..4);
            let m = Mat::from_fn(n, n, |_, _| {
                poly(&(0..3).map(|_| rng.gen_range(0..5)).collect::<Vec<_>>(), &f)
            });
            if let Ok(inv) = polymatrix_inverse_mod(&m, &q) {
                let prod = mat_mul(&m, &inv, &q);
                assert_eq!(prod, identity(n, &q));
            }
        }
    }
}
