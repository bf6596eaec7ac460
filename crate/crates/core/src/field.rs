//! Finite fields `F_{p^s}` presented as `F_p[X]/(pi)` for a monic
//! irreducible `pi` of degree `s`.
//!
//! Elements are coefficient vectors of length `s`, low degree first, with
//! entries reduced mod `p`.  For `s = 1` the modulus is `X` and elements are
//! plain residues.

use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::ring::{is_prime_u64, FieldRing, Ring, Zp};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldElem {
    c: Vec<u64>,
}

impl FieldElem {
    pub fn coords(&self) -> &[u64] {
        &self.c
    }
}

/// Context for arithmetic in `F_{p^s}`.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    pub p: u64,
    pub s: usize,
    zp: Zp,
    pi: UniPoly<Zp>,
}

impl FieldCtx {
    /// Prime field `F_p`.
    pub fn prime_field(p: u64) -> Result<Self> {
        Self::extension(p, &[0, 1])
    }

    /// `F_p[X]/(pi)`; `pi` is given by its coefficient vector, low degree
    /// first, and must be monic and irreducible mod `p`.
    pub fn extension(p: u64, pi: &[u64]) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NonPrime(p));
        }
        let zp = Zp::new(p);
        if pi.len() < 2 {
            return Err(Error::NotMonic);
        }
        if pi.last() != Some(&1) {
            return Err(Error::NotMonic);
        }
        let pi = UniPoly::from_coeffs(pi.iter().map(|&a| a % p).collect(), &zp);
        let s = pi.deg0();
        if !is_irreducible_mod_p(&pi, &zp) {
            return Err(Error::Reducible);
        }
        Ok(FieldCtx { p, s, zp, pi })
    }

    /// Field size `p^s` if it fits in `u64`.
    pub fn order(&self) -> Option<u64> {
        let mut q: u64 = 1;
        for _ in 0..self.s {
            q = q.checked_mul(self.p)?;
        }
        Some(q)
    }

    pub fn modulus(&self) -> &UniPoly<Zp> {
        &self.pi
    }

    pub fn prime_ring(&self) -> &Zp {
        &self.zp
    }

    fn pad(&self, mut c: Vec<u64>) -> FieldElem {
        c.resize(self.s, 0);
        FieldElem { c }
    }

    fn to_poly(&self, a: &FieldElem) -> UniPoly<Zp> {
        UniPoly::from_coeffs(a.c.clone(), &self.zp)
    }

    fn from_poly(&self, p: &UniPoly<Zp>) -> FieldElem {
        debug_assert!(p.deg0() < self.s || p.is_zero());
        self.pad(p.coeffs().to_vec())
    }

    /// Element from raw coordinates (low degree first); values are reduced
    /// mod `p`, missing high coordinates are zero.
    pub fn elem_from_coords(&self, coords: &[u64]) -> Result<FieldElem> {
        if coords.len() > self.s {
            return Err(Error::InvariantViolation(format!(
                "element has {} coordinates but the field has degree {}",
                coords.len(),
                self.s
            )));
        }
        Ok(self.pad(coords.iter().map(|&a| a % self.p).collect()))
    }

    /// The residue class of `X` (a generator of the extension over `F_p`).
    pub fn gen_x(&self) -> FieldElem {
        if self.s == 1 {
            // X == -pi(0) is zero here since pi = X; fall back to 0
            return self.zero();
        }
        let mut c = vec![0; self.s];
        c[1] = 1;
        FieldElem { c }
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: &FieldElem) -> FieldElem {
        if self.s == 1 {
            return a.clone();
        }
        self.pow_u64(a, self.p)
    }

    /// Inverse of Frobenius: the unique `b` with `b^p = a`.
    pub fn pth_root(&self, a: &FieldElem) -> FieldElem {
        let mut b = a.clone();
        for _ in 0..self.s.saturating_sub(1) {
            b = self.frobenius(&b);
        }
        b
    }

    /// `a^(p^l)`: Frobenius iterated `l` times (reduced mod the order `s` of
    /// Frobenius, so `l` may be astronomically large).
    pub fn frobenius_iter(&self, a: &FieldElem, l: u64) -> FieldElem {
        let reps = (l % self.s as u64) as usize;
        let mut b = a.clone();
        for _ in 0..reps {
            b = self.frobenius(&b);
        }
        b
    }

    pub fn pow_u64(&self, a: &FieldElem, mut e: u64) -> FieldElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Uniformly random element.
    pub fn sample_uniform<G: Rng>(&self, rng: &mut G) -> FieldElem {
        FieldElem { c: (0..self.s).map(|_| rng.gen_range(0..self.p)).collect() }
    }

    /// Serialize as `s` space-separated residues, low degree first.
    pub fn format_elem(&self, a: &FieldElem) -> String {
        a.c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    }

    /// Enumerate the element with the given index in the base-`p` ordering
    /// (index `n` has coordinates given by the base-`p` digits of `n`).
    pub fn elem_from_index(&self, mut n: u64) -> FieldElem {
        let mut c = vec![0u64; self.s];
        for slot in c.iter_mut() {
            *slot = n % self.p;
            n /= self.p;
        }
        FieldElem { c }
    }

    /// Whether the two contexts describe the same field presentation.
    pub fn same_as(&self, other: &FieldCtx) -> bool {
        self.p == other.p && self.pi == other.pi
    }
}

impl Ring for FieldCtx {
    type Elem = FieldElem;

    fn zero(&self) -> FieldElem {
        FieldElem { c: vec![0; self.s] }
    }

    fn one(&self) -> FieldElem {
        let mut c = vec![0; self.s];
        c[0] = 1 % self.p;
        FieldElem { c }
    }

    fn is_zero(&self, a: &FieldElem) -> bool {
        a.c.iter().all(|&v| v == 0)
    }

    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            c: a.c.iter().zip(&b.c).map(|(&x, &y)| self.zp.add(&x, &y)).collect(),
        }
    }

    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            c: a.c.iter().zip(&b.c).map(|(&x, &y)| self.zp.sub(&x, &y)).collect(),
        }
    }

    fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem { c: a.c.iter().map(|x| self.zp.neg(x)).collect() }
    }

    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        if self.s == 1 {
            return FieldElem { c: vec![self.zp.mul(&a.c[0], &b.c[0])] };
        }
        let prod = self.to_poly(a).mul(&self.to_poly(b), &self.zp);
        let (_, rem) = prod.divrem(&self.pi, &self.zp).expect("monic modulus");
        self.from_poly(&rem)
    }

    fn invert(&self, a: &FieldElem) -> Option<FieldElem> {
        if self.is_zero(a) {
            return None;
        }
        if self.s == 1 {
            return self.zp.invert(&a.c[0]).map(|v| FieldElem { c: vec![v] });
        }
        let (g, u, _) = self.to_poly(a).ext_gcd(&self.pi, &self.zp);
        if g.degree() != Some(0) {
            return None; // modulus not irreducible; guarded at construction
        }
        let (_, rem) = u.divrem(&self.pi, &self.zp).unwrap();
        Some(self.from_poly(&rem))
    }

    fn from_i64(&self, n: i64) -> FieldElem {
        let mut c = vec![0; self.s];
        c[0] = self.zp.from_i64(n);
        FieldElem { c }
    }
}

impl FieldRing for FieldCtx {}

/// Irreducibility over `F_p`: a polynomial of degree `s` is reducible iff it
/// shares a factor with `X^(p^i) - X` for some `i <= s/2`.
fn is_irreducible_mod_p(pi: &UniPoly<Zp>, zp: &Zp) -> bool {
    let s = pi.deg0();
    if s == 0 {
        return false;
    }
    if s == 1 {
        return true;
    }
    let x = UniPoly::monomial(1u64, 1, zp);
    // X^(p^i) mod pi, advanced by the Frobenius of the quotient ring each step
    let mut xq = x.clone();
    for _ in 1..=s / 2 {
        xq = xq.pow_mod(zp.p, pi, zp);
        let g = xq.sub(&x, zp).gcd(pi, zp);
        if g.degree() != Some(0) {
            return false;
        }
    }
    // no factor of degree <= s/2 exists, so pi is irreducible
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prime_field_arithmetic() {
        let f5 = FieldCtx::prime_field(5).unwrap();
        let three = f5.from_i64(3);
        let four = f5.from_i64(4);
        assert_eq!(f5.add(&three, &four), f5.from_i64(2));
        assert_eq!(f5.mul(&three, &four), f5.from_i64(2));
        assert_eq!(f5.invert(&f5.from_i64(2)).unwrap(), f5.from_i64(3));
        assert_eq!(f5.from_i64(-1), f5.from_i64(4));
        assert!(f5.invert(&f5.zero()).is_none());
    }

    #[test]
    fn f9_extension() {
        // F_9 = F_3[X]/(X^2 + 1)
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        assert_eq!(f9.s, 2);
        let x = f9.gen_x();
        // X * X = -1 = 2
        assert_eq!(f9.mul(&x, &x), f9.from_i64(2));
        // Frobenius: X^3 = X * X^2 = 2X
        let fx = f9.frobenius(&x);
        assert_eq!(fx, f9.elem_from_coords(&[0, 2]).unwrap());
        // pth root inverts Frobenius
        assert_eq!(f9.pth_root(&fx), x);
        // every element satisfies a^9 = a
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = f9.sample_uniform(&mut rng);
            assert_eq!(f9.pow_u64(&a, 9), a);
            assert_eq!(f9.frobenius(&f9.pth_root(&a)), a);
        }
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(FieldCtx::extension(6, &[1, 1]), Err(Error::NonPrime(6))));
        // X^2 + 1 = (X+2)(X+3) mod 5
        assert!(matches!(FieldCtx::extension(5, &[1, 0, 1]), Err(Error::Reducible)));
        assert!(matches!(FieldCtx::extension(5, &[1, 0, 2]), Err(Error::NotMonic)));
        assert!(matches!(FieldCtx::extension(7, &[3]), Err(Error::NotMonic)));
        // X^3 + X + 1 is irreducible mod 2 but X^3 + X^2 + X + 1 = (X+1)(X^2+1) is not
        assert!(FieldCtx::extension(2, &[1, 1, 0, 1]).is_ok());
        assert!(matches!(FieldCtx::extension(2, &[1, 1, 1, 1]), Err(Error::Reducible)));
    }

    #[test]
    fn field_axioms_fuzz() {
        let fields = [
            FieldCtx::prime_field(13).unwrap(),
            FieldCtx::extension(3, &[1, 0, 1]).unwrap(),
            FieldCtx::extension(2, &[1, 1, 0, 1]).unwrap(),
            FieldCtx::extension(101, &[2, 100, 1]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for f in &fields {
            for _ in 0..50 {
                let a = f.sample_uniform(&mut rng);
                let b = f.sample_uniform(&mut rng);
                let c = f.sample_uniform(&mut rng);
                // distributivity and associativity
                let lhs = f.mul(&a, &f.add(&b, &c));
                let rhs = f.add(&f.mul(&a, &b), &f.mul(&a, &c));
                assert_eq!(lhs, rhs);
                assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                // inverses
                if !f.is_zero(&a) {
                    let inv = f.invert(&a).unwrap();
                    assert_eq!(f.mul(&a, &inv), f.one());
                }
                // Frobenius is additive
                assert_eq!(
                    f.frobenius(&f.add(&a, &b)),
                    f.add(&f.frobenius(&a), &f.frobenius(&b))
                );
            }
        }
    }

    #[test]
    fn extension_modulus_validation_large() {
        // X^2 - 2 is irreducible mod 101 (2 is a non-residue: 101 = 3 mod 8... check by construction)
        // Instead use X^2 - g for a verified non-residue: 2^50 mod 101 = 100 = -1, so 2 is a non-residue.
        let f = FieldCtx::extension(101, &[99, 0, 1]).unwrap(); // X^2 - 2
        let x = f.gen_x();
        assert_eq!(f.mul(&x, &x), f.from_i64(2));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| f9.sample_uniform(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
        // rough uniformity: over 900 draws every element appears
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..900 {
            seen.insert(f9.sample_uniform(&mut rng).coords().to_vec());
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn index_enumeration_covers_field() {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let mut seen = std::collections::HashSet::new();
        for n in 0..9 {
            seen.insert(f9.elem_from_index(n).coords().to_vec());
        }
        assert_eq!(seen.len(), 9);
        assert_eq!(f9.elem_from_index(0), f9.zero());
    }
}
