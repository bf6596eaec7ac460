//! Truncated p-adic arithmetic.
//!
//! `PadicCtx` models `W = Z_q / p^m` for the unramified extension
//! `Z_q = Z_p[X]/(pi_hat)` of degree `s`: elements are coefficient vectors of
//! length `s` with entries reduced mod `p^m`.  Reduction mod `p` lands in the
//! residue field `F_{p^s}` and `canonical_lift` goes back with coordinates in
//! `[0, p)`.
//!
//! `ZPiRing` is the exact (unbounded precision) ring `Z[X]/(pi_hat)`; it
//! supports exact division whenever the quotient happens to be integral,
//! which is what fraction-free elimination needs.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::poly::UniPoly;
use crate::ring::{FieldRing, Ring};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct PadicElem {
    c: Vec<BigUint>,
}

impl PadicElem {
    pub fn coords(&self) -> &[BigUint] {
        &self.c
    }
}

/// Arithmetic context for `Z_q / p^m`.
#[derive(Debug, Clone)]
pub struct PadicCtx {
    pub p: u64,
    pub m: u32,
    pub s: usize,
    pub pm: BigUint,
    pi_hat: Vec<BigInt>,
    field: FieldCtx,
}

impl PadicCtx {
    /// Lift a finite field context to precision `p^m`, using the canonical
    /// (coefficients in `[0, p)`) lift of the field's modulus.
    pub fn new(field: &FieldCtx, m: u32) -> Self {
        assert!(m >= 1, "precision must be at least 1");
        let p = field.p;
        let pm = BigUint::from(p).pow(m);
        let pi_hat: Vec<BigInt> = (0..=field.s)
            .map(|i| BigInt::from(field.modulus().coeff(i, field.prime_ring())))
            .collect();
        PadicCtx { p, m, s: field.s, pm, pi_hat, field: field.clone() }
    }

    pub fn residue_field(&self) -> &FieldCtx {
        &self.field
    }

    /// The same context at lower precision `m - v`.
    pub fn lowered(&self, v: u32) -> Self {
        assert!(v < self.m, "cannot lower precision to zero");
        Self::new(&self.field, self.m - v)
    }

    fn reduce_bigint(&self, x: &BigInt) -> BigUint {
        let pm_int = BigInt::from_biguint(Sign::Plus, self.pm.clone());
        let mut r = x % &pm_int;
        if r.is_negative() {
            r += &pm_int;
        }
        r.to_biguint().unwrap()
    }

    /// Reduce a polynomial (degree possibly >= s) modulo `pi_hat` and `p^m`.
    fn reduce_poly(&self, mut poly: Vec<BigInt>) -> PadicElem {
        // pi_hat is monic, so division over Z is exact in the leading terms
        while poly.len() > self.s {
            let top = poly.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let off = poly.len() - self.s;
            for (j, c) in self.pi_hat.iter().take(self.s).enumerate() {
                let delta = &top * c;
                poly[off + j] -= delta;
            }
        }
        poly.resize(self.s, BigInt::zero());
        PadicElem { c: poly.iter().map(|x| self.reduce_bigint(x)).collect() }
    }

    pub fn elem_from_biguints(&self, coords: &[BigUint]) -> Result<PadicElem> {
        if coords.len() > self.s {
            return Err(Error::ContextMismatch);
        }
        let mut c: Vec<BigUint> = coords.iter().map(|x| x % &self.pm).collect();
        c.resize(self.s, BigUint::zero());
        Ok(PadicElem { c })
    }

    /// Reduction to the residue field.
    pub fn reduce_mod_p(&self, a: &PadicElem) -> FieldElem {
        let p = BigUint::from(self.p);
        let coords: Vec<u64> = a.c.iter().map(|x| {
            let r = x % &p;
            r.iter_u64_digits().next().unwrap_or(0)
        }).collect();
        self.field.elem_from_coords(&coords).expect("coordinate count matches")
    }

    /// The canonical lift with coordinates in `[0, p)`.
    pub fn canonical_lift(&self, a: &FieldElem) -> Result<PadicElem> {
        if a.coords().len() != self.s {
            return Err(Error::ContextMismatch);
        }
        Ok(PadicElem { c: a.coords().iter().map(|&v| BigUint::from(v)).collect() })
    }

    pub fn is_unit(&self, a: &PadicElem) -> bool {
        !self.field.is_zero(&self.reduce_mod_p(a))
    }

    /// Inverse of a unit: invert in the residue field, then Newton-lift the
    /// inverse, doubling the p-adic precision each step.
    pub fn unit_inverse(&self, a: &PadicElem) -> Result<PadicElem> {
        let bar = self.reduce_mod_p(a);
        let bar_inv = self.field.invert(&bar).ok_or(Error::NotAUnit)?;
        let mut x = self.canonical_lift(&bar_inv)?;
        let two = self.from_i64(2);
        let mut prec = 1u32;
        while prec < self.m {
            // x <- x * (2 - a*x)
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
            prec *= 2;
        }
        debug_assert_eq!(self.mul(a, &x), self.one());
        Ok(x)
    }

    /// The p-adic valuation of `a` (capped at `m` for zero).
    pub fn valuation(&self, a: &PadicElem) -> u32 {
        let p = BigUint::from(self.p);
        let mut v = self.m;
        for coord in &a.c {
            if coord.is_zero() {
                continue;
            }
            let mut x = coord.clone();
            let mut vc = 0u32;
            while (&x % &p).is_zero() {
                x /= &p;
                vc += 1;
            }
            v = v.min(vc);
        }
        v
    }

    /// Divide by `p^v` exactly, landing in the context of precision `m - v`.
    /// Fails with `NotDivisible` if any coordinate has valuation below `v`.
    pub fn divide_exact_p_power(&self, a: &PadicElem, v: u32) -> Result<(PadicCtx, PadicElem)> {
        if v == 0 {
            return Ok((self.clone(), a.clone()));
        }
        if v >= self.m {
            return Err(Error::NotDivisible);
        }
        let pv = BigUint::from(self.p).pow(v);
        let mut c = Vec::with_capacity(self.s);
        for coord in &a.c {
            if !(coord % &pv).is_zero() {
                return Err(Error::NotDivisible);
            }
            c.push(coord / &pv);
        }
        let lowered = self.lowered(v);
        let elem = lowered.elem_from_biguints(&c)?;
        Ok((lowered, elem))
    }

    pub fn same_as(&self, other: &PadicCtx) -> bool {
        self.p == other.p && self.m == other.m && self.pi_hat == other.pi_hat
    }
}

impl Ring for PadicCtx {
    type Elem = PadicElem;

    fn zero(&self) -> PadicElem {
        PadicElem { c: vec![BigUint::zero(); self.s] }
    }

    fn one(&self) -> PadicElem {
        let mut c = vec![BigUint::zero(); self.s];
        c[0] = BigUint::one() % &self.pm;
        PadicElem { c }
    }

    fn is_zero(&self, a: &PadicElem) -> bool {
        a.c.iter().all(|x| x.is_zero())
    }

    fn add(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        PadicElem {
            c: a.c.iter().zip(&b.c).map(|(x, y)| (x + y) % &self.pm).collect(),
        }
    }

    fn sub(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        PadicElem {
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(x, y)| (x + &self.pm - (y % &self.pm)) % &self.pm)
                .collect(),
        }
    }

    fn neg(&self, a: &PadicElem) -> PadicElem {
        self.sub(&self.zero(), a)
    }

    fn mul(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        if self.s == 1 {
            return PadicElem { c: vec![(&a.c[0] * &b.c[0]) % &self.pm] };
        }
        let mut prod = vec![BigInt::zero(); 2 * self.s - 1];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let xi = BigInt::from_biguint(Sign::Plus, x.clone());
            for (j, y) in b.c.iter().enumerate() {
                prod[i + j] += &xi * &BigInt::from_biguint(Sign::Plus, y.clone());
            }
        }
        self.reduce_poly(prod)
    }

    fn invert(&self, a: &PadicElem) -> Option<PadicElem> {
        self.unit_inverse(a).ok()
    }

    fn from_i64(&self, n: i64) -> PadicElem {
        let mut c = vec![BigUint::zero(); self.s];
        c[0] = self.reduce_bigint(&BigInt::from(n));
        PadicElem { c }
    }
}

/// The rationals as a ring object (used internally for exact division in
/// `Z[X]/(pi_hat)`).
#[derive(Debug, Clone)]
struct QRing;

impl Ring for QRing {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn invert(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl FieldRing for QRing {}

/// The exact ring `Z[X]/(pi_hat)`, an integral domain when `pi_hat` is
/// irreducible over `Q` (true for any monic lift of an irreducible polynomial
/// mod `p`).  Elements are integer coordinate vectors of length `s`.
#[derive(Debug, Clone)]
pub struct ZPiRing {
    pub s: usize,
    pi_hat: Vec<BigInt>,
}

impl ZPiRing {
    pub fn new(field: &FieldCtx) -> Self {
        let pi_hat: Vec<BigInt> = (0..=field.s)
            .map(|i| BigInt::from(field.modulus().coeff(i, field.prime_ring())))
            .collect();
        ZPiRing { s: field.s, pi_hat }
    }

    fn reduce_poly(&self, mut poly: Vec<BigInt>) -> Vec<BigInt> {
        while poly.len() > self.s {
            let top = poly.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let off = poly.len() - self.s;
            for (j, c) in self.pi_hat.iter().take(self.s).enumerate() {
                let delta = &top * c;
                poly[off + j] -= delta;
            }
        }
        poly.resize(self.s, BigInt::zero());
        poly
    }

    /// Reduce coordinates into a `PadicCtx` with the same minimal polynomial.
    pub fn reduce_to_padic(&self, a: &[BigInt], ctx: &PadicCtx) -> PadicElem {
        assert_eq!(self.s, ctx.s);
        let coords: Vec<BigUint> = a.iter().map(|x| ctx.reduce_bigint(x)).collect();
        ctx.elem_from_biguints(&coords).expect("length matches")
    }

    /// Reduce coordinates mod `p` into the residue field.
    pub fn reduce_to_field(&self, a: &[BigInt], field: &FieldCtx) -> FieldElem {
        assert_eq!(self.s, field.s);
        let p = BigInt::from(field.p);
        let coords: Vec<u64> = a
            .iter()
            .map(|x| {
                let mut r = x % &p;
                if r.is_negative() {
                    r += &p;
                }
                r.to_biguint().unwrap().iter_u64_digits().next().unwrap_or(0)
            })
            .collect();
        field.elem_from_coords(&coords).expect("length matches")
    }

    /// Lift a residue field element with coordinates in `[0, p)`.
    pub fn lift_from_field(&self, a: &FieldElem) -> Vec<BigInt> {
        a.coords().iter().map(|&v| BigInt::from(v)).collect()
    }

    /// Gcd of all integer coordinates (0 for the zero element).
    pub fn content(&self, a: &[BigInt]) -> BigInt {
        use num_integer::Integer;
        let mut g = BigInt::zero();
        for c in a {
            g = g.gcd(c);
        }
        g
    }

    pub fn divide_by_int(&self, a: &[BigInt], d: &BigInt) -> Option<Vec<BigInt>> {
        let mut out = Vec::with_capacity(a.len());
        for c in a {
            let (q, r) = num_integer::Integer::div_rem(c, d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    fn to_rat_poly(&self, a: &[BigInt]) -> UniPoly<QRing> {
        UniPoly::from_coeffs(
            a.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
            &QRing,
        )
    }

    fn pi_rat(&self) -> UniPoly<QRing> {
        self.to_rat_poly(&self.pi_hat)
    }
}

impl Ring for ZPiRing {
    type Elem = Vec<BigInt>;

    fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.s]
    }

    fn one(&self) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); self.s];
        c[0] = BigInt::one();
        c
    }

    fn is_zero(&self, a: &Vec<BigInt>) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    fn add(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn sub(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn neg(&self, a: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().map(|x| -x).collect()
    }

    fn mul(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        if self.s == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut prod = vec![BigInt::zero(); 2 * self.s - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        self.reduce_poly(prod)
    }

    fn invert(&self, a: &Vec<BigInt>) -> Option<Vec<BigInt>> {
        self.exact_div(&self.one(), a)
    }

    fn from_i64(&self, n: i64) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); self.s];
        c[0] = BigInt::from(n);
        c
    }

    /// `a / b` computed in `Q[X]/(pi_hat)`, accepted only when the quotient
    /// has integer coordinates.
    fn exact_div(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Option<Vec<BigInt>> {
        if self.is_zero(b) {
            return None;
        }
        if self.is_zero(a) {
            return Some(self.zero());
        }
        let q = QRing;
        let pb = self.to_rat_poly(b);
        let (g, u, _) = pb.ext_gcd(&self.pi_rat(), &q);
        if g.degree() != Some(0) {
            return None; // b is a zero divisor (cannot happen for irreducible pi_hat)
        }
        let pa = self.to_rat_poly(a);
        let quot_poly = pa.mul(&u, &q).divrem(&self.pi_rat(), &q).unwrap().1;
        let mut out = vec![BigInt::zero(); self.s];
        for i in 0..self.s {
            let c = quot_poly.coeff(i, &q);
            if !c.denom().is_one() && !(c.numer().clone() % c.denom()).is_zero() {
                return None;
            }
            out[i] = c.to_integer();
        }
        // verify: rounding of an inexact rational must not slip through
        if &self.mul(&out, b) != a {
            return None;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_inverse_prime_case() {
        // Z/25: inverse of 7 is 18
        let f5 = FieldCtx::prime_field(5).unwrap();
        let w = PadicCtx::new(&f5, 2);
        let seven = w.from_i64(7);
        let inv = w.unit_inverse(&seven).unwrap();
        assert_eq!(inv, w.from_i64(18));
        assert!(matches!(w.unit_inverse(&w.from_i64(10)), Err(Error::NotAUnit)));
    }

    #[test]
    fn unit_inverse_extension() {
        // (Z/9)[X]/(X^2+1): X * 8X = 8X^2 = -8 = 1
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let w = PadicCtx::new(&f9, 2);
        let x = w.elem_from_biguints(&[0u32.into(), 1u32.into()]).unwrap();
        let inv = w.unit_inverse(&x).unwrap();
        assert_eq!(inv, w.elem_from_biguints(&[0u32.into(), 8u32.into()]).unwrap());
    }

    #[test]
    fn exact_p_power_division() {
        let f5 = FieldCtx::prime_field(5).unwrap();
        let w = PadicCtx::new(&f5, 3); // Z/125
        let (ctx1, q) = w.divide_exact_p_power(&w.from_i64(50), 2).unwrap();
        assert_eq!(ctx1.m, 1);
        assert_eq!(q, ctx1.from_i64(2));
        assert!(matches!(
            w.divide_exact_p_power(&w.from_i64(7), 1),
            Err(Error::NotDivisible)
        ));
        assert_eq!(w.valuation(&w.from_i64(50)), 2);
        assert_eq!(w.valuation(&w.zero()), 3);
    }

    #[test]
    fn reduce_and_lift_roundtrip() {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let w = PadicCtx::new(&f9, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let a = f9.sample_uniform(&mut rng);
            let lifted = w.canonical_lift(&a).unwrap();
            assert_eq!(w.reduce_mod_p(&lifted), a);
        }
    }

    #[test]
    fn random_unit_inverses() {
        let fields = [
            FieldCtx::prime_field(5).unwrap(),
            FieldCtx::extension(3, &[1, 0, 1]).unwrap(),
            FieldCtx::extension(2, &[1, 1, 0, 1]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut count = 0;
        for f in &fields {
            for m in [1u32, 3, 6] {
                let w = PadicCtx::new(f, m);
                for _ in 0..40 {
                    let coords: Vec<BigUint> = (0..f.s)
                        .map(|_| BigUint::from(rng.gen_range(0..1_000_000u64)) % &w.pm)
                        .collect();
                    let a = w.elem_from_biguints(&coords).unwrap();
                    if !w.is_unit(&a) {
                        continue;
                    }
                    count += 1;
                    let inv = w.unit_inverse(&a).unwrap();
                    assert_eq!(w.mul(&a, &inv), w.one());
                }
            }
        }
        assert!(count > 200);
    }

    #[test]
    fn zpi_exact_division() {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let r = ZPiRing::new(&f9);
        let a = vec![BigInt::from(1), BigInt::from(1)]; // 1 + X
        let b = vec![BigInt::from(3), BigInt::from(2)]; // 3 + 2X
        let prod = r.mul(&a, &b);
        assert_eq!(r.exact_div(&prod, &b).unwrap(), a);
        assert_eq!(r.exact_div(&prod, &a).unwrap(), b);
        // 1/2 is not integral
        assert!(r.exact_div(&r.one(), &r.from_i64(2)).is_none());
        // X^2 = -1 in this ring
        let x = vec![BigInt::zero(), BigInt::one()];
        assert_eq!(r.mul(&x, &x), r.from_i64(-1));
        // content and integer division
        let c = vec![BigInt::from(6), BigInt::from(-9)];
        assert_eq!(r.content(&c), BigInt::from(3));
        assert_eq!(
            r.divide_by_int(&c, &BigInt::from(3)).unwrap(),
            vec![BigInt::from(2), BigInt::from(-3)]
        );
        assert!(r.divide_by_int(&c, &BigInt::from(4)).is_none());
    }

    #[test]
    fn zpi_reductions() {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let r = ZPiRing::new(&f9);
        let w = PadicCtx::new(&f9, 2);
        let a = vec![BigInt::from(-1), BigInt::from(11)];
        let red = r.reduce_to_padic(&a, &w);
        assert_eq!(red, w.elem_from_biguints(&[8u32.into(), 2u32.into()]).unwrap());
        let bar = r.reduce_to_field(&a, &f9);
        assert_eq!(bar, f9.elem_from_coords(&[2, 2]).unwrap());
    }
}
