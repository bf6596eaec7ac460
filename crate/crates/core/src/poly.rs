//! Dense univariate and bivariate polynomials over a generic ring.
//!
//! Coefficients are stored low degree first and kept trimmed (no trailing
//! zeros), so the zero polynomial has an empty coefficient vector.
//! Multiplication switches from the schoolbook product to Karatsuba above a
//! fixed size cutoff.

use crate::error::{Error, Result};
use crate::ring::{FieldRing, Ring};

/// Products with both operands at least this long use Karatsuba.
pub const KARATSUBA_CUTOFF: usize = 64;

#[derive(Clone)]
pub struct UniPoly<R: Ring> {
    c: Vec<R::Elem>,
}

impl<R: Ring> PartialEq for UniPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c
    }
}

impl<R: Ring> std::fmt::Debug for UniPoly<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("UniPoly").field(&self.c).finish()
    }
}

impl<R: Ring> UniPoly<R> {
    pub fn from_coeffs(mut c: Vec<R::Elem>, ring: &R) -> Self {
        while let Some(last) = c.last() {
            if ring.is_zero(last) {
                c.pop();
            } else {
                break;
            }
        }
        UniPoly { c }
    }

    pub fn zero() -> Self {
        UniPoly { c: Vec::new() }
    }

    pub fn one(ring: &R) -> Self {
        UniPoly { c: vec![ring.one()] }
    }

    pub fn constant(a: R::Elem, ring: &R) -> Self {
        Self::from_coeffs(vec![a], ring)
    }

    /// The monomial `a * t^k`.
    pub fn monomial(a: R::Elem, k: usize, ring: &R) -> Self {
        if ring.is_zero(&a) {
            return Self::zero();
        }
        let mut c = vec![ring.zero(); k + 1];
        c[k] = a;
        UniPoly { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with the convention `deg 0 = 0` (handy for bounds arithmetic).
    pub fn deg0(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize, ring: &R) -> R::Elem {
        self.c.get(k).cloned().unwrap_or_else(|| ring.zero())
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.c
    }

    pub fn leading(&self) -> Option<&R::Elem> {
        self.c.last()
    }

    pub fn add(&self, other: &Self, ring: &R) -> Self {
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(ring.add(&self.coeff(i, ring), &other.coeff(i, ring)));
        }
        Self::from_coeffs(c, ring)
    }

    pub fn sub(&self, other: &Self, ring: &R) -> Self {
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(ring.sub(&self.coeff(i, ring), &other.coeff(i, ring)));
        }
        Self::from_coeffs(c, ring)
    }

    pub fn neg(&self, ring: &R) -> Self {
        UniPoly { c: self.c.iter().map(|a| ring.neg(a)).collect() }
    }

    pub fn scale(&self, a: &R::Elem, ring: &R) -> Self {
        Self::from_coeffs(self.c.iter().map(|x| ring.mul(x, a)).collect(), ring)
    }

    /// Multiply by `t^k`.
    pub fn shift_up(&self, k: usize, ring: &R) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![ring.zero(); k];
        c.extend(self.c.iter().cloned());
        UniPoly { c }
    }

    pub fn mul(&self, other: &Self, ring: &R) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let c = mul_slices(&self.c, &other.c, ring);
        Self::from_coeffs(c, ring)
    }

    /// Product truncated to the first `prec` coefficients.
    pub fn mul_trunc(&self, other: &Self, prec: usize, ring: &R) -> Self {
        let mut prod = self.mul(other, ring);
        prod.c.truncate(prec);
        Self::from_coeffs(prod.c, ring)
    }

    pub fn eval(&self, x: &R::Elem, ring: &R) -> R::Elem {
        let mut acc = ring.zero();
        for a in self.c.iter().rev() {
            acc = ring.add(&ring.mul(&acc, x), a);
        }
        acc
    }

    pub fn derivative(&self, ring: &R) -> Self {
        if self.c.len() <= 1 {
            return Self::zero();
        }
        let mut c = Vec::with_capacity(self.c.len() - 1);
        for (i, a) in self.c.iter().enumerate().skip(1) {
            c.push(ring.mul(&ring.from_i64(i as i64), a));
        }
        Self::from_coeffs(c, ring)
    }

    /// Substitute `t -> t + a`.
    pub fn shift_argument(&self, a: &R::Elem, ring: &R) -> Self {
        // Horner: p(t + a) built from the top coefficient down.
        let mut acc = Self::zero();
        let lin = Self::from_coeffs(vec![a.clone(), ring.one()], ring);
        for coeff in self.c.iter().rev() {
            acc = acc.mul(&lin, ring).add(&Self::constant(coeff.clone(), ring), ring);
        }
        acc
    }

    /// Quotient and remainder; requires the divisor's leading coefficient to
    /// be a unit.
    pub fn divrem(&self, b: &Self, ring: &R) -> Result<(Self, Self)> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let lead_inv = ring.invert(b.leading().unwrap()).ok_or(Error::InexactDivision)?;
        let db = b.deg0();
        let mut rem = self.c.clone();
        if rem.len() < b.c.len() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![ring.zero(); rem.len() - db];
        for i in (db..rem.len()).rev() {
            let top = rem[i].clone();
            if ring.is_zero(&top) {
                continue;
            }
            let q = ring.mul(&top, &lead_inv);
            let off = i - db;
            for (j, bc) in b.c.iter().enumerate() {
                rem[off + j] = ring.sub(&rem[off + j], &ring.mul(&q, bc));
            }
            quot[off] = q;
        }
        rem.truncate(db);
        Ok((Self::from_coeffs(quot, ring), Self::from_coeffs(rem, ring)))
    }

    /// Exact division in `R[t]`; works over any ring in which the necessary
    /// coefficient divisions are exact.  Fails with `InexactDivision` if the
    /// division leaves a remainder at any point.
    pub fn exact_div(&self, b: &Self, ring: &R) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.c.len() < b.c.len() {
            return Err(Error::InexactDivision);
        }
        let db = b.deg0();
        let lead = b.leading().unwrap();
        let mut rem = self.c.clone();
        let mut quot = vec![ring.zero(); rem.len() - db];
        for i in (db..rem.len()).rev() {
            let top = rem[i].clone();
            if ring.is_zero(&top) {
                continue;
            }
            let q = ring.exact_div(&top, lead).ok_or(Error::InexactDivision)?;
            let off = i - db;
            for (j, bc) in b.c.iter().enumerate() {
                rem[off + j] = ring.sub(&rem[off + j], &ring.mul(&q, bc));
            }
            quot[off] = q;
        }
        if rem.iter().any(|a| !ring.is_zero(a)) {
            return Err(Error::InexactDivision);
        }
        Ok(Self::from_coeffs(quot, ring))
    }

    pub fn map_coeffs<S: Ring>(&self, ring: &S, f: impl Fn(&R::Elem) -> S::Elem) -> UniPoly<S> {
        UniPoly::from_coeffs(self.c.iter().map(f).collect(), ring)
    }
}

impl<R: FieldRing> UniPoly<R> {
    /// Make the polynomial monic (no-op on zero).
    pub fn monic(&self, ring: &R) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let inv = ring.invert(l).expect("nonzero leading coefficient over a field");
                self.scale(&inv, ring)
            }
        }
    }

    /// Monic gcd over a field.
    pub fn gcd(&self, other: &Self, ring: &R) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b, ring).expect("field division");
            a = b;
            b = r;
        }
        a.monic(ring)
    }

    /// Extended gcd: returns `(g, u, v)` with `u*self + v*other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Self, ring: &R) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(ring), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one(ring));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1, ring).expect("field division");
            (r0, r1) = (r1, r);
            let ns = s0.sub(&q.mul(&s1, ring), ring);
            (s0, s1) = (s1, ns);
            let nt = t0.sub(&q.mul(&t1, ring), ring);
            (t0, t1) = (t1, nt);
        }
        match r0.leading() {
            None => (r0, s0, t0),
            Some(l) => {
                let inv = ring.invert(l).unwrap();
                (r0.scale(&inv, ring), s0.scale(&inv, ring), t0.scale(&inv, ring))
            }
        }
    }

    /// `self^e mod m` by square and multiply.
    pub fn pow_mod(&self, e: u64, m: &Self, ring: &R) -> Self {
        let mut base = self.divrem(m, ring).expect("field division").1;
        let mut acc = Self::one(ring);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ring).divrem(m, ring).unwrap().1;
            }
            base = base.mul(&base, ring).divrem(m, ring).unwrap().1;
            e >>= 1;
        }
        acc
    }
}

fn mul_slices<R: Ring>(a: &[R::Elem], b: &[R::Elem], ring: &R) -> Vec<R::Elem> {
    if a.len().min(b.len()) < KARATSUBA_CUTOFF {
        return mul_classical(a, b, ring);
    }
    mul_karatsuba(a, b, ring)
}

fn mul_classical<R: Ring>(a: &[R::Elem], b: &[R::Elem], ring: &R) -> Vec<R::Elem> {
    let mut out = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if ring.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = ring.mul_add(&out[i + j], x, y);
        }
    }
    out
}

fn mul_karatsuba<R: Ring>(a: &[R::Elem], b: &[R::Elem], ring: &R) -> Vec<R::Elem> {
    let n = a.len().max(b.len());
    let half = n.div_ceil(2);
    if a.len() <= half || b.len() <= half {
        // Too unbalanced to split both operands; fall back to splitting the
        // longer one.
        let (long, short, swap) = if a.len() >= b.len() { (a, b, false) } else { (b, a, true) };
        let _ = swap;
        let mut out = vec![ring.zero(); a.len() + b.len() - 1];
        let mut off = 0;
        while off < long.len() {
            let end = (off + half).min(long.len());
            let part = mul_slices(&long[off..end], short, ring);
            for (i, v) in part.into_iter().enumerate() {
                out[off + i] = ring.add(&out[off + i], &v);
            }
            off = end;
        }
        return out;
    }
    let (a0, a1) = a.split_at(half);
    let (b0, b1) = b.split_at(half);
    let z0 = mul_slices(a0, b0, ring);
    let z2 = mul_slices(a1, b1, ring);
    let asum: Vec<R::Elem> = (0..half)
        .map(|i| {
            let lo = &a0[i];
            match a1.get(i) {
                Some(hi) => ring.add(lo, hi),
                None => lo.clone(),
            }
        })
        .collect();
    let bsum: Vec<R::Elem> = (0..half)
        .map(|i| {
            let lo = &b0[i];
            match b1.get(i) {
                Some(hi) => ring.add(lo, hi),
                None => lo.clone(),
            }
        })
        .collect();
    let mut z1 = mul_slices(&asum, &bsum, ring);
    for (i, v) in z0.iter().enumerate() {
        z1[i] = ring.sub(&z1[i], v);
    }
    for (i, v) in z2.iter().enumerate() {
        z1[i] = ring.sub(&z1[i], v);
    }
    let mut out = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, v) in z0.into_iter().enumerate() {
        out[i] = ring.add(&out[i], &v);
    }
    for (i, v) in z1.into_iter().enumerate() {
        if half + i < out.len() {
            out[half + i] = ring.add(&out[half + i], &v);
        }
    }
    for (i, v) in z2.into_iter().enumerate() {
        out[2 * half + i] = ring.add(&out[2 * half + i], &v);
    }
    out
}

/// The polynomial ring `R[t]` viewed as a ring object (units are the unit
/// constants).
#[derive(Clone, Debug)]
pub struct PolyRing<R: Ring> {
    pub base: R,
}

impl<R: Ring> PolyRing<R> {
    pub fn new(base: R) -> Self {
        PolyRing { base }
    }
}

impl<R: Ring> Ring for PolyRing<R> {
    type Elem = UniPoly<R>;

    fn zero(&self) -> UniPoly<R> {
        UniPoly::zero()
    }
    fn one(&self) -> UniPoly<R> {
        UniPoly::one(&self.base)
    }
    fn is_zero(&self, a: &UniPoly<R>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &UniPoly<R>, b: &UniPoly<R>) -> UniPoly<R> {
        a.add(b, &self.base)
    }
    fn sub(&self, a: &UniPoly<R>, b: &UniPoly<R>) -> UniPoly<R> {
        a.sub(b, &self.base)
    }
    fn neg(&self, a: &UniPoly<R>) -> UniPoly<R> {
        a.neg(&self.base)
    }
    fn mul(&self, a: &UniPoly<R>, b: &UniPoly<R>) -> UniPoly<R> {
        a.mul(b, &self.base)
    }
    fn invert(&self, a: &UniPoly<R>) -> Option<UniPoly<R>> {
        if a.degree() == Some(0) {
            self.base.invert(&a.coeffs()[0]).map(|i| UniPoly::constant(i, &self.base))
        } else {
            None
        }
    }
    fn from_i64(&self, n: i64) -> UniPoly<R> {
        UniPoly::constant(self.base.from_i64(n), &self.base)
    }
    fn exact_div(&self, a: &UniPoly<R>, b: &UniPoly<R>) -> Option<UniPoly<R>> {
        a.exact_div(b, &self.base).ok()
    }
}

/// The quotient ring `k[t]/B` over a field `k`.  Elements are represented by
/// their canonical remainder of degree `< deg B`.
#[derive(Clone, Debug)]
pub struct QuotRing<F: FieldRing> {
    pub base: F,
    pub modulus: UniPoly<F>,
}

impl<F: FieldRing> QuotRing<F> {
    pub fn new(base: F, modulus: UniPoly<F>) -> Self {
        assert!(modulus.deg0() >= 1, "modulus must have positive degree");
        QuotRing { base, modulus }
    }

    pub fn reduce(&self, a: &UniPoly<F>) -> UniPoly<F> {
        a.divrem(&self.modulus, &self.base).expect("field division").1
    }
}

impl<F: FieldRing> Ring for QuotRing<F> {
    type Elem = UniPoly<F>;

    fn zero(&self) -> UniPoly<F> {
        UniPoly::zero()
    }
    fn one(&self) -> UniPoly<F> {
        UniPoly::one(&self.base)
    }
    fn is_zero(&self, a: &UniPoly<F>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &UniPoly<F>, b: &UniPoly<F>) -> UniPoly<F> {
        a.add(b, &self.base)
    }
    fn sub(&self, a: &UniPoly<F>, b: &UniPoly<F>) -> UniPoly<F> {
        a.sub(b, &self.base)
    }
    fn neg(&self, a: &UniPoly<F>) -> UniPoly<F> {
        a.neg(&self.base)
    }
    fn mul(&self, a: &UniPoly<F>, b: &UniPoly<F>) -> UniPoly<F> {
        self.reduce(&a.mul(b, &self.base))
    }
    fn invert(&self, a: &UniPoly<F>) -> Option<UniPoly<F>> {
        if a.is_zero() {
            return None;
        }
        let (g, u, _) = a.ext_gcd(&self.modulus, &self.base);
        if g.degree() == Some(0) {
            Some(self.reduce(&u))
        } else {
            None
        }
    }
    fn from_i64(&self, n: i64) -> UniPoly<F> {
        UniPoly::constant(self.base.from_i64(n), &self.base)
    }
}

/// Dense bivariate polynomial; `rows[j]` is the coefficient of `y^j` as a
/// polynomial in `t`.
#[derive(Clone)]
pub struct BiPoly<R: Ring> {
    rows: Vec<UniPoly<R>>,
}

impl<R: Ring> PartialEq for BiPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl<R: Ring> std::fmt::Debug for BiPoly<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("BiPoly").field(&self.rows).finish()
    }
}

impl<R: Ring> BiPoly<R> {
    pub fn from_rows(mut rows: Vec<UniPoly<R>>) -> Self {
        while rows.last().map(|r| r.is_zero()).unwrap_or(false) {
            rows.pop();
        }
        BiPoly { rows }
    }

    pub fn zero() -> Self {
        BiPoly { rows: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Degree in `y`, or `None` for the zero polynomial.
    pub fn deg_y(&self) -> Option<usize> {
        self.rows.len().checked_sub(1)
    }

    pub fn deg_y0(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Degree in `t` (max over rows), 0 for the zero polynomial.
    pub fn deg_t0(&self) -> usize {
        self.rows.iter().map(|r| r.deg0()).max().unwrap_or(0)
    }

    pub fn rows(&self) -> &[UniPoly<R>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> UniPoly<R> {
        self.rows.get(j).cloned().unwrap_or_else(UniPoly::zero)
    }

    pub fn coeff(&self, i: usize, j: usize, ring: &R) -> R::Elem {
        match self.rows.get(j) {
            Some(r) => r.coeff(i, ring),
            None => ring.zero(),
        }
    }

    pub fn add(&self, other: &Self, ring: &R) -> Self {
        let n = self.rows.len().max(other.rows.len());
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            rows.push(self.row(j).add(&other.row(j), ring));
        }
        Self::from_rows(rows)
    }

    pub fn sub(&self, other: &Self, ring: &R) -> Self {
        let n = self.rows.len().max(other.rows.len());
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            rows.push(self.row(j).sub(&other.row(j), ring));
        }
        Self::from_rows(rows)
    }

    pub fn neg(&self, ring: &R) -> Self {
        BiPoly { rows: self.rows.iter().map(|r| r.neg(ring)).collect() }
    }

    pub fn mul(&self, other: &Self, ring: &R) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let n = self.rows.len() + other.rows.len() - 1;
        let mut rows = vec![UniPoly::zero(); n];
        for (i, a) in self.rows.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.rows.iter().enumerate() {
                rows[i + j] = rows[i + j].add(&a.mul(b, ring), ring);
            }
        }
        Self::from_rows(rows)
    }

    pub fn scale_t(&self, a: &UniPoly<R>, ring: &R) -> Self {
        Self::from_rows(self.rows.iter().map(|r| r.mul(a, ring)).collect())
    }

    /// Partial derivative with respect to `y`.
    pub fn deriv_y(&self, ring: &R) -> Self {
        if self.rows.len() <= 1 {
            return Self::zero();
        }
        let mut rows = Vec::with_capacity(self.rows.len() - 1);
        for (j, r) in self.rows.iter().enumerate().skip(1) {
            rows.push(r.scale(&ring.from_i64(j as i64), ring));
        }
        Self::from_rows(rows)
    }

    /// Partial derivative with respect to `t`.
    pub fn deriv_t(&self, ring: &R) -> Self {
        Self::from_rows(self.rows.iter().map(|r| r.derivative(ring)).collect())
    }

    /// Evaluate at `t = a`, leaving a polynomial in `y`.
    pub fn eval_t(&self, a: &R::Elem, ring: &R) -> UniPoly<R> {
        UniPoly::from_coeffs(self.rows.iter().map(|r| r.eval(a, ring)).collect(), ring)
    }

    /// Substitute `t -> t + a`.
    pub fn shift_t(&self, a: &R::Elem, ring: &R) -> Self {
        Self::from_rows(self.rows.iter().map(|r| r.shift_argument(a, ring)).collect())
    }

    pub fn map_coeffs<S: Ring>(&self, ring: &S, f: impl Fn(&R::Elem) -> S::Elem) -> BiPoly<S> {
        BiPoly::from_rows(self.rows.iter().map(|r| r.map_coeffs(ring, &f)).collect())
    }

    /// Exact division (as polynomials in `y` over `R[t]`); every coefficient
    /// division must be exact.
    pub fn exact_div(&self, b: &Self, ring: &R) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let db = b.deg_y0();
        if self.rows.len() < b.rows.len() {
            return Err(Error::InexactDivision);
        }
        let lead = &b.rows[db];
        let mut rem: Vec<UniPoly<R>> = self.rows.clone();
        let mut quot: Vec<UniPoly<R>> = vec![UniPoly::zero(); rem.len() - db];
        for i in (db..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = rem[i].exact_div(lead, ring)?;
            let off = i - db;
            for (j, bc) in b.rows.iter().enumerate() {
                rem[off + j] = rem[off + j].sub(&q.mul(bc, ring), ring);
            }
            quot[off] = q;
        }
        if rem.iter().any(|r| !r.is_zero()) {
            return Err(Error::InexactDivision);
        }
        Ok(Self::from_rows(quot))
    }

    /// Pseudo-reduction modulo a divisor `E` (in `y` over `R[t]`): returns
    /// `(Q, e)` with `lead(E)^e * self = (...)*E + Q` and `deg_y Q < deg_y E`.
    pub fn pseudo_rem(&self, e_poly: &Self, ring: &R) -> (Self, u32) {
        let d = e_poly.deg_y0();
        assert!(d >= 1 || !e_poly.is_zero(), "divisor must be nonzero");
        let lead = e_poly.rows.last().expect("nonzero divisor").clone();
        let mut rem = self.clone();
        let mut scale_count = 0u32;
        while rem.deg_y().map(|dy| dy >= d).unwrap_or(false) {
            let dy = rem.deg_y0();
            let top = rem.rows[dy].clone();
            // lead * rem - top * y^(dy-d) * E
            let mut rows: Vec<UniPoly<R>> =
                rem.rows.iter().map(|r| r.mul(&lead, ring)).collect();
            for (j, ec) in e_poly.rows.iter().enumerate() {
                let k = dy - d + j;
                rows[k] = rows[k].sub(&top.mul(ec, ring), ring);
            }
            rem = Self::from_rows(rows);
            scale_count += 1;
            debug_assert!(rem.deg_y0() < dy || rem.is_zero());
        }
        (rem, scale_count)
    }
}
