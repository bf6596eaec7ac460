//! Ring abstraction used by the generic polynomial, series and matrix code.
//!
//! Elements are plain data; all arithmetic goes through a ring object that
//! carries the modulus / defining polynomial.  This keeps elements small and
//! lets the same polynomial code run over a finite field, a truncated p-adic
//! ring, or exact integers.

use std::fmt::Debug;

/// A commutative ring with identity.
///
/// `invert` returns `None` for non-units.  `exact_div` is division that must
/// come out exact; rings that are not fields (exact integers, truncated
/// p-adics) override it.
pub trait Ring: Clone {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Image of a signed integer under the unique map from Z.
    fn from_i64(&self, n: i64) -> Self::Elem;

    /// `a / b` when the quotient exists in the ring; `None` otherwise.
    fn exact_div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        if self.is_zero(a) && !self.is_zero(b) {
            return Some(self.zero());
        }
        self.invert(b).map(|bi| self.mul(a, &bi))
    }

    /// Convenience: `a + b*c`.
    fn mul_add(&self, a: &Self::Elem, b: &Self::Elem, c: &Self::Elem) -> Self::Elem {
        self.add(a, &self.mul(b, c))
    }
}

/// Marker for rings in which every nonzero element is a unit.
pub trait FieldRing: Ring {}

/// The prime field Z/p with machine-word elements.
///
/// Used on its own for base-field polynomial work (irreducibility tests,
/// searching for defining polynomials) and as the coefficient arithmetic
/// backing extension-field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zp {
    pub p: u64,
}

impl Zp {
    pub fn new(p: u64) -> Self {
        Zp { p }
    }

    #[inline]
    pub fn reduce_i64(&self, n: i64) -> u64 {
        let m = n.rem_euclid(self.p as i64);
        m as u64
    }

    /// Modular exponentiation.
    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64 % self.p;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &a);
            }
            a = self.mul(&a.clone(), &a.clone());
            e >>= 1;
        }
        acc
    }
}

impl Ring for Zp {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn invert(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (*a as i128, self.p as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1, "p must be prime");
        Some(s0.rem_euclid(self.p as i128) as u64)
    }
    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }
}

impl FieldRing for Zp {}

/// Deterministic primality check for 64-bit integers (trial division by small
/// primes, then Miller-Rabin with a fixed witness set valid for all u64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let zp = Zp::new(n);
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = zp.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = zp.mul(&x, &x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zp_basic_arithmetic() {
        let f = Zp::new(5);
        assert_eq!(f.add(&3, &4), 2);
        assert_eq!(f.mul(&3, &4), 2);
        assert_eq!(f.sub(&1, &3), 3);
        assert_eq!(f.invert(&2), Some(3));
        assert_eq!(f.invert(&0), None);
        assert_eq!(f.from_i64(-1), 4);
    }

    #[test]
    fn zp_pow() {
        let f = Zp::new(101);
        for a in 1..20u64 {
            assert_eq!(f.pow(a, 100), 1, "Fermat for a={a}");
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(101));
        assert!(is_prime_u64(211));
        assert!(is_prime_u64(401));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(91));
        assert!(!is_prime_u64(561));
    }
}
