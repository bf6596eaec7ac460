//! Root finding over finite fields, random irreducible polynomials, and
//! subfield embeddings.
//!
//! Just enough factorization machinery for origin changes: distinct-degree
//! splitting to isolate the linear part of a polynomial, equal-degree
//! (Cantor-Zassenhaus, odd characteristic) splitting to enumerate roots, a
//! rejection sampler for irreducible moduli, and field embeddings
//! `k -> l` realized by a root of `k`'s modulus in `l` with preimages by
//! linear algebra.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::{dense_solve, Mat};
use crate::poly::UniPoly;
use crate::ring::Ring;
use num_bigint::BigUint;
use rand::Rng;

/// `base^e mod m` with an arbitrarily large exponent.
fn pow_mod_big(
    base: &UniPoly<FieldCtx>,
    e: &BigUint,
    m: &UniPoly<FieldCtx>,
    ctx: &FieldCtx,
) -> UniPoly<FieldCtx> {
    let mut result = UniPoly::one(ctx);
    let mut sq = base.divrem(m, ctx).expect("unit leading coefficient").1;
    let bits = e.bits();
    for i in 0..bits {
        if e.bit(i) {
            result = result.mul(&sq, ctx).divrem(m, ctx).unwrap().1;
        }
        if i + 1 < bits {
            sq = sq.mul(&sq, ctx).divrem(m, ctx).unwrap().1;
        }
    }
    result
}

/// `X^(q^e) mod m` where `q = p^s` is the field order, via `e*s` repeated
/// `p`-power steps (avoids forming `q^e` as an integer).
fn frobenius_power_x(e: usize, m: &UniPoly<FieldCtx>, ctx: &FieldCtx) -> UniPoly<FieldCtx> {
    let x = UniPoly::monomial(ctx.one(), 1, ctx);
    let mut acc = x.divrem(m, ctx).unwrap().1;
    for _ in 0..e * ctx.s {
        acc = acc.pow_mod(ctx.p, m, ctx);
    }
    acc
}

/// All roots of `f` in the coefficient field, sorted by coordinate for
/// reproducibility.  Multiple roots are reported once.
pub fn roots_in_field(
    f: &UniPoly<FieldCtx>,
    ctx: &FieldCtx,
    rng: &mut impl Rng,
) -> Vec<FieldElem> {
    let mut roots = Vec::new();
    let f = f.monic(ctx);
    if f.deg0() == 0 {
        return roots;
    }
    // linear part: gcd(f, X^q - X)
    let x = UniPoly::monomial(ctx.one(), 1, ctx);
    let xq = frobenius_power_x(1, &f, ctx);
    let lin = f.gcd(&xq.sub(&x, ctx), ctx);
    split_linear(&lin.monic(ctx), ctx, rng, &mut roots);
    roots.sort_by(|a, b| a.coords().cmp(b.coords()));
    roots.dedup();
    roots
}

/// Equal-degree splitting of a product of distinct linear factors.
fn split_linear(
    f: &UniPoly<FieldCtx>,
    ctx: &FieldCtx,
    rng: &mut impl Rng,
    out: &mut Vec<FieldElem>,
) {
    match f.degree() {
        None | Some(0) => {}
        Some(1) => {
            // X + c -> root -c
            out.push(ctx.neg(&f.coeff(0, ctx)));
        }
        Some(_) => {
            if ctx.p == 2 {
                // char 2: brute-force the linear factors via trace-free
                // sampling is awkward; fields in this crate are tiny when
                // p = 2, so evaluate directly
                let mut idx = 0u64;
                loop {
                    let cand = ctx.elem_from_index(idx);
                    if ctx.is_zero(&f.eval(&cand, ctx)) {
                        out.push(cand.clone());
                        let lin = UniPoly::from_coeffs(vec![ctx.neg(&cand), ctx.one()], ctx);
                        let rest = f.exact_div(&lin, ctx).expect("root divides");
                        split_linear(&rest, ctx, rng, out);
                        return;
                    }
                    idx += 1;
                }
            }
            // odd characteristic Cantor-Zassenhaus: gcd with
            // (X + a)^((q-1)/2) - 1 splits the roots in half on average
            let qm1 = pow_of_order(ctx) - BigUint::from(1u32);
            let half = &qm1 / BigUint::from(2u32);
            loop {
                let a = ctx.sample_uniform(rng);
                let shifted = UniPoly::from_coeffs(vec![a, ctx.one()], ctx);
                let power = pow_mod_big(&shifted, &half, f, ctx);
                let g = f.gcd(&power.sub(&UniPoly::one(ctx), ctx), ctx).monic(ctx);
                if g.deg0() > 0 && g.deg0() < f.deg0() {
                    let rest = f.exact_div(&g, ctx).expect("gcd divides");
                    split_linear(&g, ctx, rng, out);
                    split_linear(&rest, ctx, rng, out);
                    return;
                }
            }
        }
    }
}

fn pow_of_order(ctx: &FieldCtx) -> BigUint {
    let mut q = BigUint::from(1u32);
    for _ in 0..ctx.s {
        q *= BigUint::from(ctx.p);
    }
    q
}

/// A random monic irreducible polynomial of the given degree over `F_p`,
/// returned as its coefficient vector (constant first, including the leading
/// 1), suitable for `FieldCtx::extension`.
pub fn random_irreducible_coeffs(p: u64, deg: usize, rng: &mut impl Rng) -> Vec<u64> {
    assert!(deg >= 1);
    if deg == 1 {
        return vec![0, 1];
    }
    loop {
        let mut coeffs: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..p)).collect();
        coeffs.push(1);
        if FieldCtx::extension(p, &coeffs).is_ok() {
            return coeffs;
        }
    }
}

/// An embedding of `k` into `l` (with `[l : F_p]` a multiple of
/// `[k : F_p]`), realized by a root of `k`'s defining modulus inside `l`.
pub struct Embedding {
    pub from: FieldCtx,
    pub to: FieldCtx,
    /// Image of `k`'s generator in `l`.
    pub root: FieldElem,
    root_powers: Vec<FieldElem>,
}

impl Embedding {
    pub fn new(from: &FieldCtx, to: &FieldCtx, rng: &mut impl Rng) -> Result<Embedding> {
        if from.p != to.p || to.s % from.s != 0 {
            return Err(Error::ContextMismatch);
        }
        // k's modulus, read in l[X]
        let pi_in_l = UniPoly::from_coeffs(
            from.modulus()
                .coeffs()
                .iter()
                .map(|&c| to.from_i64(c as i64))
                .collect(),
            to,
        );
        let roots = roots_in_field(&pi_in_l, to, rng);
        let root = roots
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvariantViolation("modulus has no root in target field".into()))?;
        let mut root_powers = Vec::with_capacity(from.s);
        let mut acc = to.one();
        for _ in 0..from.s {
            root_powers.push(acc.clone());
            acc = to.mul(&acc, &root);
        }
        Ok(Embedding { from: from.clone(), to: to.clone(), root, root_powers })
    }

    /// Map an element of `k` into `l`.
    pub fn map(&self, a: &FieldElem) -> FieldElem {
        let mut acc = self.to.zero();
        for (c, pw) in a.coords().iter().zip(&self.root_powers) {
            let scaled = self.to.mul(&self.to.from_i64(*c as i64), pw);
            acc = self.to.add(&acc, &scaled);
        }
        acc
    }

    /// Preimage in `k` of an element of `l` lying in the image (solve a
    /// small `F_p`-linear system).  `Inconsistent` when it does not.
    pub fn preimage(&self, b: &FieldElem) -> Result<FieldElem> {
        let zp = self.from.prime_ring().clone();
        let mat = Mat::from_fn(self.to.s, self.from.s, |i, j| self.root_powers[j].coords()[i]);
        let rhs: Vec<u64> = b.coords().to_vec();
        let sol = dense_solve(&mat, &rhs, &zp)?;
        self.from.elem_from_coords(&sol)
    }
}
