//! Digit-by-digit extraction of algebraic series coefficients.
//!
//! Over `F_{p^s}`, the `N`-th coefficient of the algebraic series `f` can be
//! reached by walking the base-`p` digits of `N` (least significant first)
//! through section operators acting on a fixed finite-dimensional space of
//! bivariate polynomials: states `P(t, y)` stand for the series
//! `P(t, f)/E_y(t, f)`, the digit step for `r` maps `P` to
//! `Λ_{r,p-1}(P · E^(p-1))`, and the answer is the constant term of the
//! final state's series, raised to the `p^ℓ`-th power (`ℓ` = digit count).
//!
//! Two engines share this walk: a direct bivariate one that multiplies by
//! `E^(p-1)` at every step, and a matrix one that precomputes the step as a
//! `d × d` matrix over `k[t]` modulo a well-chosen modulus `B` and then only
//! performs matrix-vector products.  A small Laurent-series toolkit at the
//! bottom supports independent verification of the evaluation-as-residue
//! identity these walks rely on.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::{polymatrix_inverse_mod, bezout_cofactors, identity, Mat};
use crate::poly::{BiPoly, QuotRing, UniPoly};
use crate::ring::Ring;
use crate::series::{AlgebraicInstance, TruncSeries};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

/// Base-`p` digits of `n`, least significant first; `n = 0` gives `[0]`.
pub fn digits_base_p(n: &BigUint, p: u64) -> Vec<u64> {
    if n.is_zero() {
        return vec![0];
    }
    let big_p = BigUint::from(p);
    let mut rest = n.clone();
    let mut out = Vec::new();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&big_p);
        out.push(r.to_u64().expect("remainder below p fits in u64"));
        rest = q;
    }
    out
}

/// Section operator `Λ_{r,s}` on `k[t,y]`: keeps the coefficients at
/// bidegrees `(pi+r, pj+s)`, takes their `p`-th roots, and reindexes them to
/// `(i, j)`.
pub fn bivariate_section(
    p_poly: &BiPoly<FieldCtx>,
    r: u64,
    s: u64,
    ctx: &FieldCtx,
) -> Result<BiPoly<FieldCtx>> {
    section_raw(p_poly, r, s, ctx, true)
}

fn section_raw(
    p_poly: &BiPoly<FieldCtx>,
    r: u64,
    s: u64,
    ctx: &FieldCtx,
    take_roots: bool,
) -> Result<BiPoly<FieldCtx>> {
    for digit in [r, s] {
        if digit >= ctx.p {
            return Err(Error::DigitOutOfRange { digit, p: ctx.p });
        }
    }
    let p = ctx.p as usize;
    let mut rows = Vec::new();
    let mut src_j = s as usize;
    while src_j < p_poly.rows().len() {
        let row = &p_poly.rows()[src_j];
        let mut c = Vec::new();
        let mut src_i = r as usize;
        while src_i < row.coeffs().len() {
            let a = &row.coeffs()[src_i];
            c.push(if take_roots { ctx.pth_root(a) } else { a.clone() });
            src_i += p;
        }
        rows.push(UniPoly::from_coeffs(c, ctx));
        src_j += p;
    }
    Ok(BiPoly::from_rows(rows))
}

/// Entrywise section of a univariate polynomial (used on matrix entries and
/// coordinate vectors): coefficient `pk + r` of the input, `p`-th-rooted,
/// becomes coefficient `k`.
pub fn poly_section(u: &UniPoly<FieldCtx>, r: u64, ctx: &FieldCtx) -> UniPoly<FieldCtx> {
    let p = ctx.p as usize;
    let mut c = Vec::new();
    let mut idx = r as usize;
    while idx < u.coeffs().len() {
        c.push(ctx.pth_root(&u.coeffs()[idx]));
        idx += p;
    }
    UniPoly::from_coeffs(c, ctx)
}

/// The state representing `y` itself: `P = -Σ_{i<d} (d-i) e_i(t) y^i`, so
/// that `P(t,f) = f·E_y(t,f)`.
pub fn represent_y(inst: &AlgebraicInstance) -> BiPoly<FieldCtx> {
    let ctx = &inst.field;
    let d = inst.d as i64;
    let rows = (0..inst.d)
        .map(|i| inst.e.row(i).scale(&ctx.from_i64(-(d - i as i64)), ctx))
        .collect();
    BiPoly::from_rows(rows)
}

/// One digit step on a state polynomial: `Q = Λ_{r,p-1}(P · E^(p-1))`.
///
/// Degree bookkeeping: states always satisfy `deg_t ≤ h` and `deg_y < d`;
/// once any digit `r > 0` has been processed (or the input was already
/// strict), `deg_t < h` holds and is preserved.  A violation of the closed
/// box is a fatal internal error, never user input.
pub fn stable_section(
    inst: &AlgebraicInstance,
    p_state: &BiPoly<FieldCtx>,
    r: u64,
) -> Result<BiPoly<FieldCtx>> {
    let ctx = &inst.field;
    let prod = p_state.mul(&inst.e_pow_pm1(), ctx);
    let q = bivariate_section(&prod, r, ctx.p - 1, ctx)?;
    assert!(
        q.deg_y0() + 1 <= inst.d && q.deg_t0() <= inst.h,
        "section image left the stable degree box"
    );
    debug_assert!(
        r == 0 || q.is_zero() || q.deg_t0() < inst.h,
        "nonzero digit must yield a strict t-degree"
    );
    debug_assert!(
        p_state.deg_t0() == inst.h || q.is_zero() || q.deg_t0() < inst.h,
        "strict t-degree must be preserved"
    );
    debug_assert!(
        p_state.deg_y0() + 2 > inst.d || q.deg_y0() + 2 <= inst.d || q.is_zero(),
        "y-degree <= d-2 must be preserved"
    );
    Ok(q)
}

fn trivial_prefix(inst: &AlgebraicInstance, n: &BigUint) -> Option<FieldElem> {
    if *n <= BigUint::from(2 * inst.rho) {
        let idx = n.to_usize().expect("small index");
        Some(inst.init[idx].clone())
    } else {
        None
    }
}

fn finish_walk(
    inst: &AlgebraicInstance,
    state: &BiPoly<FieldCtx>,
    num_digits: usize,
) -> Result<FieldElem> {
    let value = inst.eval_state(state)?;
    Ok(inst.field.frobenius_iter(&value, num_digits as u64))
}

/// Direct engine: apply the digit step literally, multiplying by `E^(p-1)`
/// for every digit of `N`.
///
/// With `defer_roots` the inner `p`-th roots are skipped during the walk and
/// accounted for by Frobenius-twisting the multiplier (and untwisting once at
/// the end); both paths return identical values, the deferred one trading
/// root extractions for `s`-periodic twists of `E^(p-1)`.
pub fn nth_coeff_bivariate(
    inst: &AlgebraicInstance,
    n: &BigUint,
    defer_roots: bool,
) -> Result<FieldElem> {
    if let Some(v) = trivial_prefix(inst, n) {
        return Ok(v);
    }
    let ctx = &inst.field;
    let digits = digits_base_p(n, ctx.p);
    let mut state = represent_y(inst);
    if !defer_roots {
        for &r in &digits {
            state = stable_section(inst, &state, r)?;
        }
    } else {
        let epm1 = inst.e_pow_pm1();
        let mut twists: Vec<Option<BiPoly<FieldCtx>>> = vec![None; ctx.s];
        for (k, &r) in digits.iter().enumerate() {
            let m = k % ctx.s;
            let twisted = twists[m].get_or_insert_with(|| {
                epm1.map_coeffs(ctx, |a| ctx.frobenius_iter(a, m as u64))
            });
            let prod = state.mul(twisted, ctx);
            state = section_raw(&prod, r, ctx.p - 1, ctx, false)?;
        }
        let back = (ctx.s - digits.len() % ctx.s) % ctx.s;
        state = state.map_coeffs(ctx, |a| ctx.frobenius_iter(a, back as u64));
    }
    finish_walk(inst, &state, digits.len())
}

pub type PolyMat = Mat<UniPoly<FieldCtx>>;

/// Precomputed matrix form of the digit step in the basis
/// `(y^j / E_y)_{0 <= j < d}`.
pub struct SectionMatrixSet {
    /// Working modulus `B(t)`, degree `h(p-1) + 1`.
    pub modulus: UniPoly<FieldCtx>,
    /// Matrix of the basis after one inverse-Frobenius step:  column `j`
    /// holds the coordinates of `y^{pj}/E_y^{p-1}`, reduced mod `B`.
    pub m: PolyMat,
    /// `M^{-1} mod B`; its entries are the true polynomial entries of the
    /// inverse, of degree at most `h(p-1) < deg B`.
    pub minv: PolyMat,
    /// `sections[r]` = entrywise digit-`r` section of `minv`; column `j`
    /// holds the coordinates of the digit-`r` image of `y^j/E_y`.
    pub sections: Vec<PolyMat>,
}

/// Arithmetic in `S[y]/(E)` with `S = k[t]/B`, for a possibly non-monic `E`
/// whose leading coefficient is invertible in `S`.
struct ModEArith<'a> {
    quot: &'a QuotRing<FieldCtx>,
    e_rows: Vec<UniPoly<FieldCtx>>,
    lead_inv: UniPoly<FieldCtx>,
    d: usize,
}

impl<'a> ModEArith<'a> {
    fn reduce(&self, mut v: Vec<UniPoly<FieldCtx>>) -> Vec<UniPoly<FieldCtx>> {
        while v.len() > self.d {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let q = self.quot.mul(&top, &self.lead_inv);
            let base = v.len() - self.d;
            for i in 0..self.d {
                let sub = self.quot.mul(&q, &self.e_rows[i]);
                v[base + i] = self.quot.sub(&v[base + i], &sub);
            }
        }
        v.resize(self.d, self.quot.zero());
        v
    }

    fn mul(&self, a: &[UniPoly<FieldCtx>], b: &[UniPoly<FieldCtx>]) -> Vec<UniPoly<FieldCtx>> {
        let mut prod = vec![self.quot.zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                let term = self.quot.mul(ai, bj);
                prod[i + j] = self.quot.add(&prod[i + j], &term);
            }
        }
        self.reduce(prod)
    }

    fn pow(&self, base: &[UniPoly<FieldCtx>], mut e: u64) -> Vec<UniPoly<FieldCtx>> {
        let mut result = {
            let mut one = vec![self.quot.zero(); self.d];
            one[0] = self.quot.one();
            one
        };
        let mut sq = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        result
    }
}

fn try_build_with_modulus(
    inst: &AlgebraicInstance,
    b: &UniPoly<FieldCtx>,
) -> Result<SectionMatrixSet> {
    let ctx = &inst.field;
    let d = inst.d;
    let p = ctx.p;
    let quot = QuotRing::new(ctx.clone(), b.clone());
    let lead_inv = quot.invert(&quot.reduce(inst.lead())).ok_or(Error::NotInvertibleModB)?;
    let e_y = inst.e.deriv_y(ctx);
    let (_, v, r_poly) = bezout_cofactors(&inst.e, &e_y, ctx)?;
    let r_inv = quot.invert(&quot.reduce(&r_poly)).ok_or(Error::NotInvertibleModB)?;
    let arith = ModEArith {
        quot: &quot,
        e_rows: (0..d).map(|i| quot.reduce(&inst.e.row(i))).collect(),
        lead_inv,
        d,
    };
    // E_y^{-1} = v / Res(E, E_y) mod (E, B), from u E + v E_y = Res
    let mut ey_inv: Vec<UniPoly<FieldCtx>> = (0..d)
        .map(|i| quot.mul(&quot.reduce(&v.row(i)), &r_inv))
        .collect();
    ey_inv = arith.reduce(ey_inv);
    debug_assert!({
        let ey_vec = arith.reduce((0..d).map(|i| quot.reduce(&e_y.row(i))).collect());
        let prod = arith.mul(&ey_inv, &ey_vec);
        prod[0] == quot.one() && prod[1..].iter().all(|c| c.is_zero())
    });
    let w = arith.pow(&ey_inv, p - 1);
    // y^p mod (E, B)
    let y_vec = {
        let mut yv = vec![quot.zero(); 2];
        yv[1] = quot.one();
        arith.reduce(yv)
    };
    let y_p = arith.pow(&y_vec, p);
    let mut cols = Vec::with_capacity(d);
    let mut col = w;
    for _ in 0..d {
        cols.push(col.clone());
        col = arith.mul(&col, &y_p);
    }
    let m = Mat::from_fn(d, d, |i, j| cols[j][i].clone());
    let minv = polymatrix_inverse_mod(&m, &quot)?;
    debug_assert!({
        let prod = crate::linalg::mat_mul(&m, &minv, &quot);
        let id = identity(d, &quot);
        (0..d).all(|i| (0..d).all(|j| quot.reduce(&prod[[i, j]]) == id[[i, j]]))
    });
    let sections = (0..p)
        .map(|r| minv.map(|entry| poly_section(entry, r, ctx)))
        .collect();
    Ok(SectionMatrixSet { modulus: b.clone(), m, minv, sections })
}

/// Build the digit-step matrices.  The modulus is `t^(h(p-1)+1)` whenever
/// `t` divides neither the leading coefficient `L` nor the resultant `R`;
/// otherwise a squarefree split modulus with random interpolation points
/// avoiding the roots of `L·R` is drawn (a few attempts, then
/// `NoGoodModulus`).
pub fn build_section_matrices(
    inst: &AlgebraicInstance,
    rng: &mut impl Rng,
) -> Result<SectionMatrixSet> {
    let ctx = &inst.field;
    let deg_b = inst.h * (ctx.p as usize - 1) + 1;
    let lr = inst.lead().mul(inst.res(), ctx);
    if !ctx.is_zero(&lr.coeff(0, ctx)) {
        let b = UniPoly::monomial(ctx.one(), deg_b, ctx);
        return match try_build_with_modulus(inst, &b) {
            Err(Error::NotInvertibleModB) => Err(Error::NoGoodModulus),
            other => other,
        };
    }
    // t is a root of L*R: fall back to a split modulus prod (t - beta_i)
    // over fresh points where L*R does not vanish.
    for _attempt in 0..5 {
        let mut points: Vec<FieldElem> = Vec::with_capacity(deg_b);
        let mut tries = 0usize;
        while points.len() < deg_b {
            tries += 1;
            if tries > 200 * deg_b {
                return Err(Error::NoGoodModulus);
            }
            let beta = ctx.sample_uniform(rng);
            if points.contains(&beta) || ctx.is_zero(&lr.eval(&beta, ctx)) {
                continue;
            }
            points.push(beta);
        }
        let mut b = UniPoly::one(ctx);
        for beta in &points {
            let lin = UniPoly::from_coeffs(vec![ctx.neg(beta), ctx.one()], ctx);
            b = b.mul(&lin, ctx);
        }
        match try_build_with_modulus(inst, &b) {
            Err(Error::NotInvertibleModB) => continue,
            other => return other,
        }
    }
    Err(Error::NoGoodModulus)
}

/// Outcome of the matrix walk, with the digit-loop count — the only part of
/// the computation whose cost depends on `N`.
pub struct MatrixOutcome {
    pub value: FieldElem,
    pub digit_steps: usize,
}

/// Matrix engine: same digit walk as `nth_coeff_bivariate`, but each step is
/// an exact matrix-vector product by `M^{-1}` (true polynomial entries)
/// followed by an entrywise digit section of the coordinates.
pub fn nth_coeff_matrix_with_stats(
    inst: &AlgebraicInstance,
    n: &BigUint,
    rng: &mut impl Rng,
) -> Result<MatrixOutcome> {
    if let Some(v) = trivial_prefix(inst, n) {
        return Ok(MatrixOutcome { value: v, digit_steps: 0 });
    }
    let ctx = &inst.field;
    let matrices = build_section_matrices(inst, rng)?;
    let digits = digits_base_p(n, ctx.p);
    let mut coords: Vec<UniPoly<FieldCtx>> = {
        let p0 = represent_y(inst);
        (0..inst.d).map(|i| p0.row(i)).collect()
    };
    let mut digit_steps = 0;
    for &r in &digits {
        let mut next = Vec::with_capacity(inst.d);
        for i in 0..inst.d {
            let mut w = UniPoly::zero();
            for (j, x) in coords.iter().enumerate() {
                w = w.add(&matrices.minv[[i, j]].mul(x, ctx), ctx);
            }
            next.push(poly_section(&w, r, ctx));
        }
        coords = next;
        digit_steps += 1;
    }
    let state = BiPoly::from_rows(coords);
    let value = finish_walk(inst, &state, digits.len())?;
    Ok(MatrixOutcome { value, digit_steps })
}

pub fn nth_coeff_matrix(
    inst: &AlgebraicInstance,
    n: &BigUint,
    rng: &mut impl Rng,
) -> Result<FieldElem> {
    Ok(nth_coeff_matrix_with_stats(inst, n, rng)?.value)
}

/// Truncated Laurent series in an auxiliary variable `T`, with truncated
/// `t`-series coefficients.  `coeffs[k]` is the coefficient of
/// `T^(low + k)`.
pub struct LaurentT {
    pub low: i64,
    pub coeffs: Vec<TruncSeries<FieldCtx>>,
}

impl LaurentT {
    /// Coefficient of `T^e` (zero when outside the stored window).
    pub fn coeff_t_exp(&self, e: i64, ctx: &FieldCtx) -> TruncSeries<FieldCtx> {
        let idx = e - self.low;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            let prec = self.coeffs.first().map(|c| c.prec()).unwrap_or(0);
            return TruncSeries::zero(prec, ctx);
        }
        self.coeffs[idx as usize].clone()
    }
}

/// `P(t, f + T)` expanded as a polynomial in `T` (degree below `t_prec_t`)
/// whose coefficients are `t`-series at precision `t_prec`.
pub fn taylor_at_f(
    p_poly: &BiPoly<FieldCtx>,
    inst: &AlgebraicInstance,
    t_prec: usize,
    t_prec_t: usize,
) -> Result<LaurentT> {
    let ctx = &inst.field;
    let f = inst.hensel_lift(t_prec)?;
    let dy = p_poly.deg_y0();
    // Pascal triangle mod p for the binomials in the Taylor shift
    let mut binom = vec![vec![ctx.zero(); dy + 1]; dy + 1];
    for j in 0..=dy {
        binom[j][0] = ctx.one();
        for m in 1..=j {
            let up = binom[j - 1][m].clone();
            binom[j][m] = ctx.add(&binom[j - 1][m - 1], &up);
        }
    }
    let mut coeffs = Vec::new();
    for m in 0..t_prec_t.min(dy + 2) {
        let mut acc = TruncSeries::zero(t_prec, ctx);
        if m <= dy {
            // sum over j >= m of binom(j, m) P_j(t) f^(j-m), Horner in f
            for j in (m..=dy).rev() {
                acc = acc.mul(&f, ctx);
                let term = TruncSeries::from_poly(&p_poly.row(j), t_prec, ctx)
                    .scale(&binom[j][m], ctx);
                acc = acc.add(&term, ctx);
            }
        }
        coeffs.push(acc);
    }
    Ok(LaurentT { low: 0, coeffs })
}

/// Laurent quotient in `T`, by forward substitution: with the divisor's
/// `T`-valuation stripped, `out_k = (num_k - Σ_{i>=1} den_i out_{k-i}) / den_0`.
///
/// Each step divides by `den_0`, whose `t`-valuation may be positive; a later
/// quotient coefficient that is not a power series in `t` truncates the
/// `T`-precision there (the leading coefficient failing is an error).
pub fn laurent_quotient(num: &LaurentT, den: &LaurentT, ctx: &FieldCtx) -> Result<LaurentT> {
    let wd = den
        .coeffs
        .iter()
        .position(|c| !c.is_zero(ctx))
        .ok_or(Error::ZeroDivisor)?;
    let c0 = &den.coeffs[wd];
    let t_prec_t = num.coeffs.len().min(den.coeffs.len() - wd);
    let mut out: Vec<TruncSeries<FieldCtx>> = Vec::with_capacity(t_prec_t);
    for k in 0..t_prec_t {
        let mut rhs = num.coeffs[k].clone();
        for i in 1..=k {
            let ci = match den.coeffs.get(wd + i) {
                Some(c) => c,
                None => continue,
            };
            let prod = ci.mul(&out[k - i], ctx);
            let n = rhs.prec().min(prod.prec());
            rhs = rhs.truncate(n).sub(&prod.truncate(n), ctx);
        }
        match rhs.div(c0, ctx) {
            Ok(q) => out.push(q),
            Err(Error::NotASeries) if k > 0 => break,
            Err(e) => return Err(e),
        }
    }
    Ok(LaurentT { low: num.low - den.low - wd as i64, coeffs: out })
}

/// The `T^{-1}` coefficient.
pub fn residue(x: &LaurentT, ctx: &FieldCtx) -> TruncSeries<FieldCtx> {
    x.coeff_t_exp(-1, ctx)
}
