//! Digit walk that reads section data off a holonomic recurrence instead of
//! expanding series coefficient by coefficient.
//!
//! Every state `Q` in the walk denotes the algebraic function
//! `g = Q(t,f)/E_y(t,f)`, and `g` satisfies a linear ODE with polynomial
//! coefficients that can be derived exactly (over `Z[x]/(pi-hat)`, the
//! canonical characteristic-zero lift of the coefficient field) by
//! fraction-free elimination.  The ODE turns into a recurrence for the
//! factorial-normalized coefficients `n! * g_n`, which stays meaningful over
//! a truncated unramified p-adic ring `W` even where `n!` is divisible by
//! `p`; choosing the precision of `W` from the largest index visited makes
//! the read-off of `g_n mod p` exact.  The recurrence is unrolled with
//! baby-step/giant-step products of its companion matrix, so one digit costs
//! roughly `sqrt(p)` block multiplications instead of `p` scalar steps.
//!
//! When the recurrence degenerates at the origin (its leading coefficient is
//! not a unit there, or the instance itself is singular at `t = 0`), the
//! digit is processed at a translated origin `t = alpha` over a small
//! extension of the coefficient field and the resulting state is pulled
//! back; when the leading coefficient vanishes identically mod `p`, the
//! state is first split into a sum of two states with usable recurrences.

use crate::christol::{digits_base_p, represent_y};
use crate::error::{Error, Result};
use crate::factor::{random_irreducible_coeffs, roots_in_field, Embedding};
use crate::field::{FieldCtx, FieldElem};
use crate::hermite_pade::{build_hp_system, nth_coeff_hp, HpSystem};
use crate::linalg::{bezout_cofactors, det_bareiss, identity, mat_mul, mat_vec, Mat};
use crate::padic::{PadicCtx, PadicElem, ZPiRing};
use crate::poly::{BiPoly, PolyRing, UniPoly};
use crate::ring::Ring;
use crate::series::{eval_bipoly_at_series, AlgebraicInstance, TruncSeries};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::Rng;
use std::sync::Mutex;

/// Use giant steps only when they repay the cost of building the block
/// polynomial: enough steps per block, and entries small enough that
/// polynomial matrix products stay cheap.
const BSGS_MIN_BETA: i64 = 8;
const BSGS_MAX_POLY_AREA: usize = 96;

/// How many random splits to try before giving up on a state whose
/// recurrence has an identically degenerate leading coefficient.
const SPLIT_RETRIES: usize = 5;

/// Cap on the number of translation candidates examined in one field.
const ALPHA_SEARCH_CAP: u64 = 10_000;

// ---------------------------------------------------------------------------
// Working precision
// ---------------------------------------------------------------------------

fn factorial_valuation(n: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

/// p-adic working precision needed to read every section coefficient of one
/// digit-`r` step exactly: one digit more than the valuation of `n!` at the
/// largest index `n = r + 2d(h+1)*p` the unrolled recurrence visits (the
/// reconstruction consumes `2d(h+1)` coefficients per digit).
pub fn derive_precision(inst: &AlgebraicInstance, r: u64) -> u32 {
    let p = inst.field.p;
    let top = r + 2 * (inst.d as u64) * (inst.h as u64 + 1) * p;
    (factorial_valuation(top, p) + 1) as u32
}

// ---------------------------------------------------------------------------
// Characteristic-zero lift of an instance
// ---------------------------------------------------------------------------

/// An instance lifted to characteristic zero: exact coefficients in
/// `Z[x]/(pi-hat)` for the ODE derivation, truncated p-adic coefficients in
/// `W` for the recurrence, and a cached `W`-lift of the series root.
pub struct LiftedInstance {
    pub w: PadicCtx,
    pub zq: ZPiRing,
    pub e_exact: BiPoly<ZPiRing>,
    pub e_w: BiPoly<PadicCtx>,
    /// Whether the instance is regular at the origin (`L(0) != 0` and
    /// `R(0) != 0`), which is what makes the lifted root usable there.
    regular_at_zero: bool,
    f_cache: Mutex<Option<TruncSeries<PadicCtx>>>,
}

fn lift_unchecked(inst: &AlgebraicInstance, m: u32) -> LiftedInstance {
    let k = &inst.field;
    let w = PadicCtx::new(k, m);
    let zq = ZPiRing::new(k);
    let e_exact = inst.e.map_coeffs(&zq, |c| zq.lift_from_field(c));
    let e_w = e_exact.map_coeffs(&w, |c| zq.reduce_to_padic(c, &w));
    let regular_at_zero = !k.is_zero(&inst.lead().coeff(0, k)) && !k.is_zero(&inst.res().coeff(0, k));
    LiftedInstance { w, zq, e_exact, e_w, regular_at_zero, f_cache: Mutex::new(None) }
}

/// Lift an instance to p-adic precision `m`.  Requires the instance to be
/// regular at the origin; singular-at-zero instances are still handled by
/// the full engine, which translates the origin away before lifting roots.
pub fn lift_instance(inst: &AlgebraicInstance, m: u32) -> Result<LiftedInstance> {
    let lifted = lift_unchecked(inst, m);
    if !lifted.regular_at_zero {
        return Err(Error::H1Violated);
    }
    Ok(lifted)
}

/// Newton refinement of a mod-p series root to a root over `W`, at the
/// t-precision of the starting series.  The derivative must be a unit
/// series; the result is verified exactly.
fn padic_root_refine(
    e_w: &BiPoly<PadicCtx>,
    start: &TruncSeries<PadicCtx>,
    w: &PadicCtx,
) -> Result<TruncSeries<PadicCtx>> {
    let e_y = e_w.deriv_y(w);
    let prec = start.prec();
    let mut x = start.clone();
    let mut gain = 1u64;
    while gain < w.m as u64 {
        let ex = eval_bipoly_at_series(e_w, &x, prec, w);
        let dex = eval_bipoly_at_series(&e_y, &x, prec, w);
        x = x.sub(&ex.mul(&dex.inverse(w)?, w), w);
        gain *= 2;
    }
    if !eval_bipoly_at_series(e_w, &x, prec, w).is_zero(w) {
        return Err(Error::InvariantViolation(
            "p-adic Newton refinement did not reach an exact root".into(),
        ));
    }
    Ok(x)
}

impl LiftedInstance {
    /// The `W`-lift of the instance's series root, to `prec` coefficients.
    pub fn f_hat(&self, inst: &AlgebraicInstance, prec: usize) -> Result<TruncSeries<PadicCtx>> {
        if !self.regular_at_zero {
            return Err(Error::H1Violated);
        }
        let mut guard = self.f_cache.lock().expect("series cache");
        let have = guard.as_ref().map(|s| s.prec()).unwrap_or(0);
        if have < prec {
            let base = inst.hensel_lift(prec)?;
            let start =
                base.map::<PadicCtx>(|c| self.w.canonical_lift(c).expect("residue-field element"));
            *guard = Some(padic_root_refine(&self.e_w, &start, &self.w)?);
        }
        Ok(guard.as_ref().expect("just filled").truncate(prec))
    }
}

// ---------------------------------------------------------------------------
// Exact ODE derivation
// ---------------------------------------------------------------------------

/// Denominator-tracked element `num(t,y) / (L^el * R^er)` modulo `E`, where
/// `L` is the y-leading coefficient of `E` and `R` the Bezout resultant of
/// `(E, E_y)`.  Closed under d/dt without any division.
struct FracElem {
    num: BiPoly<ZPiRing>,
    el: u32,
    er: u32,
}

struct FracCtx<'a> {
    zq: &'a ZPiRing,
    e: &'a BiPoly<ZPiRing>,
    lead: UniPoly<ZPiRing>,
    rres: UniPoly<ZPiRing>,
    v_cof: BiPoly<ZPiRing>,
    etv: BiPoly<ZPiRing>,
    lr: UniPoly<ZPiRing>,
    lead_d: UniPoly<ZPiRing>,
    rres_d: UniPoly<ZPiRing>,
}

fn frac_ctx<'a>(zq: &'a ZPiRing, e: &'a BiPoly<ZPiRing>) -> Result<FracCtx<'a>> {
    let e_y = e.deriv_y(zq);
    let (_, v_cof, rres) = bezout_cofactors(e, &e_y, zq)?;
    let lead = e.rows().last().expect("nonzero defining polynomial").clone();
    let etv = e.deriv_t(zq).mul(&v_cof, zq);
    let lr = lead.mul(&rres, zq);
    let lead_d = lead.derivative(zq);
    let rres_d = rres.derivative(zq);
    Ok(FracCtx { zq, e, lead, rres, v_cof, etv, lr, lead_d, rres_d })
}

impl FracCtx<'_> {
    /// d/dt of `num/(L^el R^er)`, using `f' = -E_t(f)·v(f)/R` (from the
    /// Bezout identity `u·E + v·E_y = R`) and pseudo-reduction by `E`.
    fn derivative(&self, x: &FracElem) -> FracElem {
        let zq = self.zq;
        let term1 = x.num.deriv_t(zq).scale_t(&self.lr, zq);
        let term2 = x.num.deriv_y(zq).mul(&self.etv, zq).scale_t(&self.lead, zq);
        let fac = self
            .lead_d
            .mul(&self.rres, zq)
            .scale(&zq.from_i64(x.el as i64), zq)
            .add(&self.rres_d.mul(&self.lead, zq).scale(&zq.from_i64(x.er as i64), zq), zq);
        let term3 = x.num.scale_t(&fac, zq);
        let raw = term1.sub(&term2, zq).sub(&term3, zq);
        let (rem, extra) = raw.pseudo_rem(self.e, zq);
        FracElem { num: rem, el: x.el + 1 + extra, er: x.er + 1 }
    }
}

/// A linear ODE `sum_j a_j(t) g^(j)(t) = 0` with exact coefficients.
pub struct OdeSystem {
    pub zq: ZPiRing,
    /// `a_0 ... a_order`, normalized: no common power of `t`, no common
    /// `L`/`R` factor, integer content 1.
    pub coeffs: Vec<UniPoly<ZPiRing>>,
    pub order: usize,
}

impl OdeSystem {
    pub fn max_deg(&self) -> usize {
        self.coeffs.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }

    /// Coefficient `a_j` reduced into a truncated p-adic ring.
    pub fn reduced_coeff(&self, j: usize, w: &PadicCtx) -> UniPoly<PadicCtx> {
        self.coeffs[j].map_coeffs(w, |c| self.zq.reduce_to_padic(c, w))
    }

    fn leading_mod_p(&self, field: &FieldCtx) -> UniPoly<FieldCtx> {
        self.coeffs[self.order].map_coeffs(field, |c| self.zq.reduce_to_field(c, field))
    }

    /// The recurrence at the origin is usable iff `a_order(0)` is a unit.
    pub fn is_ordinary(&self, field: &FieldCtx) -> bool {
        !field.is_zero(&self.leading_mod_p(field).coeff(0, field))
    }

    /// Some translated origin is usable iff `a_order mod p` is not the zero
    /// polynomial.
    pub fn leading_good(&self, field: &FieldCtx) -> bool {
        !self.leading_mod_p(field).is_zero()
    }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if size > n {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 0..=n - size {
        for mut rest in subsets(n - first - 1, size - 1) {
            for r in rest.iter_mut() {
                *r += first + 1;
            }
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Derive a linear ODE annihilating `g = P(t,f)/E_y(t,f)`, of the least
/// order (at most `deg_y E`) at which the derivatives become dependent.
pub fn derive_ode(lifted: &LiftedInstance, state: &BiPoly<FieldCtx>) -> Result<OdeSystem> {
    let zq = &lifted.zq;
    let d = lifted.e_exact.deg_y0();
    let fc = frac_ctx(zq, &lifted.e_exact)?;
    let p_exact = state.map_coeffs(zq, |c| zq.lift_from_field(c));
    // g^(0) = P·v / (L^e0 · R): the Bezout cofactor replaces 1/E_y.
    let (n0, e0) = p_exact.mul(&fc.v_cof, zq).pseudo_rem(&lifted.e_exact, zq);
    let mut elems = vec![FracElem { num: n0, el: e0, er: 1 }];
    for _ in 0..d {
        elems.push(fc.derivative(elems.last().expect("nonempty")));
    }
    let pring = PolyRing::new(zq.clone());
    for order in 1..=d {
        // Clear denominators across columns 0..=order only, keeping degrees
        // as small as this subset allows.
        let emax = elems[..=order].iter().map(|x| x.el).max().expect("nonempty");
        let rmax = elems[..=order].iter().map(|x| x.er).max().expect("nonempty");
        let cols: Vec<BiPoly<ZPiRing>> = elems[..=order]
            .iter()
            .map(|x| {
                let mut fpoly = UniPoly::one(zq);
                for _ in 0..emax - x.el {
                    fpoly = fpoly.mul(&fc.lead, zq);
                }
                for _ in 0..rmax - x.er {
                    fpoly = fpoly.mul(&fc.rres, zq);
                }
                x.num.scale_t(&fpoly, zq)
            })
            .collect();
        for rows in subsets(d, order) {
            // Kernel vector of the row-restricted (order)x(order+1) system by
            // signed maximal minors, then verified against every row.
            let minor_mat = |drop: usize| {
                Mat::from_fn(order, order, |i, j| {
                    let col = if j < drop { j } else { j + 1 };
                    cols[col].row(rows[i])
                })
            };
            let mut cand: Vec<UniPoly<ZPiRing>> = Vec::with_capacity(order + 1);
            for (j, item) in (0..=order).enumerate() {
                let det = det_bareiss(&minor_mat(item), &pring);
                cand.push(if j % 2 == 1 { det.neg(zq) } else { det });
            }
            if cand.iter().all(|c| c.is_zero()) {
                continue;
            }
            let combo = cols
                .iter()
                .zip(cand.iter())
                .fold(BiPoly::zero(), |acc, (col, a)| acc.add(&col.scale_t(a, zq), zq));
            if !combo.is_zero() {
                continue;
            }
            return Ok(normalize_ode(zq, &fc, cand, order));
        }
    }
    Err(Error::SingularDerivation)
}

fn normalize_ode(
    zq: &ZPiRing,
    fc: &FracCtx<'_>,
    mut coeffs: Vec<UniPoly<ZPiRing>>,
    order: usize,
) -> OdeSystem {
    // Common power of t.
    let tval = coeffs
        .iter()
        .filter_map(|c| c.coeffs().iter().position(|a| !zq.is_zero(a)))
        .min()
        .unwrap_or(0);
    if tval > 0 {
        coeffs = coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    UniPoly::zero()
                } else {
                    UniPoly::from_coeffs(c.coeffs()[tval..].to_vec(), zq)
                }
            })
            .collect();
    }
    // Common L / R polynomial factors (the elimination tends to produce
    // them in bulk, and they blow up the recurrence order downstream).
    for factor in [&fc.rres, &fc.lead] {
        if factor.deg0() == 0 {
            continue;
        }
        loop {
            let divided: Result<Vec<UniPoly<ZPiRing>>> =
                coeffs.iter().map(|c| c.exact_div(factor, zq)).collect();
            match divided {
                Ok(next) => coeffs = next,
                Err(_) => break,
            }
        }
    }
    // Integer content.
    let mut content = BigInt::from(0);
    for c in &coeffs {
        for a in c.coeffs() {
            content = num_integer::gcd(content.clone(), zq.content(a));
        }
    }
    if content > BigInt::from(1) {
        coeffs = coeffs
            .iter()
            .map(|c| {
                c.map_coeffs(zq, |a| {
                    zq.divide_by_int(a, &content).expect("content divides every coefficient")
                })
            })
            .collect();
    }
    OdeSystem { zq: zq.clone(), coeffs, order }
}

// ---------------------------------------------------------------------------
// Recurrence for factorial-normalized coefficients
// ---------------------------------------------------------------------------

/// Companion form of the recurrence satisfied by `g~_n = n! * g_n`:
/// `V_n = M(n) V_{n-1}` for `n >= order`, where `V_n` stacks
/// `g~_n ... g~_{n-order+1}`.
pub struct RecurrenceSystem {
    pub companion: Mat<UniPoly<PadicCtx>>,
    pub order: usize,
}

fn falling_factorial(k: usize, w: &PadicCtx) -> UniPoly<PadicCtx> {
    let mut acc = UniPoly::one(w);
    for i in 0..k {
        let lin = UniPoly::from_coeffs(vec![w.from_i64(-(i as i64)), w.one()], w);
        acc = acc.mul(&lin, w);
    }
    acc
}

/// Convert an ODE (coefficients over `W`) into the companion recurrence for
/// `g~_n = n! g_n`.  Writing `a_j = sum_k a_{jk} t^k`, the t^n coefficient
/// of the ODE times `n!` gives
/// `sum_{j,k} a_{jk} FF(n,k) g~_{n+j-k} = 0`,
/// whose top term `g~_{n+order}` carries the constant `a_{order,0}`; that
/// constant must be a unit.
pub fn ode_to_recurrence(
    coeffs: &[UniPoly<PadicCtx>],
    w: &PadicCtx,
) -> Result<RecurrenceSystem> {
    let order = coeffs.len() - 1;
    let dmax = coeffs.iter().filter_map(|c| c.degree()).max().unwrap_or(0);
    let rr = order + dmax;
    let b0 = coeffs[order].coeff(0, w);
    if !w.is_unit(&b0) {
        return Err(Error::NotAUnit);
    }
    let b0_inv = w.unit_inverse(&b0)?;
    // FF factors are evaluated at n = nu - order when the relation is
    // re-indexed so that nu is the top coefficient index.
    let shift = w.from_i64(-(order as i64));
    let ffs: Vec<UniPoly<PadicCtx>> =
        (0..=dmax).map(|k| falling_factorial(k, w).shift_argument(&shift, w)).collect();
    let mut top_row = Vec::with_capacity(rr);
    for i in 1..=rr {
        let mut b = UniPoly::zero();
        for (j, aj) in coeffs.iter().enumerate() {
            let k = i as i64 - order as i64 + j as i64;
            if k < 0 || k as usize > dmax {
                continue;
            }
            let a = aj.coeff(k as usize, w);
            if w.is_zero(&a) {
                continue;
            }
            b = b.add(&ffs[k as usize].scale(&a, w), w);
        }
        top_row.push(b.scale(&b0_inv, w).neg(w));
    }
    let companion = Mat::from_fn(rr, rr, |i, j| {
        if i == 0 {
            top_row[j].clone()
        } else if j == i - 1 {
            UniPoly::one(w)
        } else {
            UniPoly::zero()
        }
    });
    Ok(RecurrenceSystem { companion, order: rr })
}

// ---------------------------------------------------------------------------
// Matrix factorials (baby step / giant step)
// ---------------------------------------------------------------------------

fn isqrt_ceil(n: u64) -> u64 {
    if n <= 1 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r < n {
        r += 1;
    }
    while (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Evaluate a polynomial matrix at a scalar.
pub fn eval_poly_mat(
    m: &Mat<UniPoly<PadicCtx>>,
    x: &PadicElem,
    w: &PadicCtx,
) -> Mat<PadicElem> {
    Mat::from_fn(m.nrows, m.ncols, |i, j| m[[i, j]].eval(x, w))
}

fn shift_mat(m: &Mat<UniPoly<PadicCtx>>, by: i64, w: &PadicCtx) -> Mat<UniPoly<PadicCtx>> {
    let a = w.from_i64(by);
    Mat::from_fn(m.nrows, m.ncols, |i, j| m[[i, j]].shift_argument(&a, w))
}

/// The block polynomial `Pi(x) = M(x+beta) ··· M(x+1)`, built by a balanced
/// product tree; `counter` is bumped once per matrix product.
fn product_block(
    m: &Mat<UniPoly<PadicCtx>>,
    beta: i64,
    w: &PadicCtx,
    counter: &mut usize,
) -> Mat<UniPoly<PadicCtx>> {
    let pring = PolyRing::new(w.clone());
    let mut level: Vec<Mat<UniPoly<PadicCtx>>> =
        (1..=beta).rev().map(|i| shift_mat(m, i, w)).collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity((level.len() + 1) / 2);
        for ch in level.chunks(2) {
            if ch.len() == 2 {
                next.push(mat_mul(&ch[0], &ch[1], &pring));
                *counter += 1;
            } else {
                next.push(ch[0].clone());
            }
        }
        level = next;
    }
    level.pop().expect("nonempty product tree")
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FactorialMode {
    Naive,
    Bsgs,
}

/// The descending product `M(hi) M(hi-1) ··· M(lo)` of a polynomial matrix
/// over `W` (identity when `lo > hi`).  `counter` is bumped once per matrix
/// product performed, in either mode.
pub fn matrix_factorial(
    m: &Mat<UniPoly<PadicCtx>>,
    lo: i64,
    hi: i64,
    mode: FactorialMode,
    w: &PadicCtx,
    counter: &mut usize,
) -> Mat<PadicElem> {
    let ident = identity(m.nrows, w);
    if lo > hi {
        return ident;
    }
    match mode {
        FactorialMode::Naive => {
            let mut acc = eval_poly_mat(m, &w.from_i64(lo), w);
            for x in lo + 1..=hi {
                acc = mat_mul(&eval_poly_mat(m, &w.from_i64(x), w), &acc, w);
                *counter += 1;
            }
            acc
        }
        FactorialMode::Bsgs => {
            let len = (hi - lo + 1) as u64;
            let beta = isqrt_ceil(len) as i64;
            let block = product_block(m, beta, w, counter);
            let mut acc = ident;
            let mut pos = lo - 1;
            while pos + beta <= hi {
                acc = mat_mul(&eval_poly_mat(&block, &w.from_i64(pos), w), &acc, w);
                *counter += 1;
                pos += beta;
            }
            while pos < hi {
                pos += 1;
                acc = mat_mul(&eval_poly_mat(m, &w.from_i64(pos), w), &acc, w);
                *counter += 1;
            }
            acc
        }
    }
}

// ---------------------------------------------------------------------------
// Unrolling one digit's targets
// ---------------------------------------------------------------------------

fn max_entry_deg(m: &Mat<UniPoly<PadicCtx>>) -> usize {
    let mut deg = 0;
    for i in 0..m.nrows {
        for j in 0..m.ncols {
            deg = deg.max(m[[i, j]].deg0());
        }
    }
    deg
}

/// Steps a recurrence state vector forward, maintaining `pos! = p^v * u`
/// incrementally so coefficients can be denormalized on demand.
struct Unroller<'a> {
    w: &'a PadicCtx,
    rec: &'a RecurrenceSystem,
    beta: i64,
    use_bsgs: bool,
    block: Option<Mat<UniPoly<PadicCtx>>>,
    vec: Vec<PadicElem>,
    pos: i64,
    p: u64,
    fact_v: u64,
    fact_u: PadicElem,
}

impl<'a> Unroller<'a> {
    /// Seed the state vector from the series itself: `g~_i = i! * g_i` for
    /// `i < order`.
    fn new(
        rec: &'a RecurrenceSystem,
        w: &'a PadicCtx,
        beta: i64,
        series: &TruncSeries<PadicCtx>,
        p: u64,
    ) -> Self {
        let rr = rec.order;
        let mut tilde = Vec::with_capacity(rr);
        let mut full = w.one();
        for i in 0..rr {
            if i > 0 {
                full = w.mul(&full, &w.from_i64(i as i64));
            }
            tilde.push(w.mul(&full, &series.coeff(i, w)));
        }
        tilde.reverse();
        let mut fact_v = 0u64;
        let mut fact_u = w.one();
        for i in 1..rr as u64 {
            let mut u = i;
            while u % p == 0 {
                u /= p;
                fact_v += 1;
            }
            fact_u = w.mul(&fact_u, &w.from_i64(u as i64));
        }
        let use_bsgs =
            beta >= BSGS_MIN_BETA && rr * (max_entry_deg(&rec.companion) + 1) <= BSGS_MAX_POLY_AREA;
        Unroller {
            w,
            rec,
            beta,
            use_bsgs,
            block: None,
            vec: tilde,
            pos: rr as i64 - 1,
            p,
            fact_v,
            fact_u,
        }
    }

    fn push_factorials(&mut self, upto: i64) {
        for i in self.pos + 1..=upto {
            let mut u = i as u64;
            while u % self.p == 0 {
                u /= self.p;
                self.fact_v += 1;
            }
            self.fact_u = self.w.mul(&self.fact_u, &self.w.from_i64(u as i64));
        }
    }

    fn advance_to(&mut self, target: i64, counter: &mut usize) {
        while self.pos < target {
            if self.use_bsgs && target - self.pos >= self.beta {
                if self.block.is_none() {
                    self.block =
                        Some(product_block(&self.rec.companion, self.beta, self.w, counter));
                }
                let step = eval_poly_mat(
                    self.block.as_ref().expect("just built"),
                    &self.w.from_i64(self.pos),
                    self.w,
                );
                self.vec = mat_vec(&step, &self.vec, self.w);
                self.push_factorials(self.pos + self.beta);
                self.pos += self.beta;
            } else {
                let step =
                    eval_poly_mat(&self.rec.companion, &self.w.from_i64(self.pos + 1), self.w);
                self.vec = mat_vec(&step, &self.vec, self.w);
                self.push_factorials(self.pos + 1);
                self.pos += 1;
            }
        }
    }

    /// `g_pos mod p`, denormalizing `g~_pos` by the stored factorial.
    fn read(&self) -> Result<FieldElem> {
        let u_inv = self.w.unit_inverse(&self.fact_u)?;
        let scaled = self.w.mul(&self.vec[0], &u_inv);
        let (low, q) = self.w.divide_exact_p_power(&scaled, self.fact_v as u32)?;
        Ok(low.reduce_mod_p(&q))
    }
}

/// Coefficients `g_n mod p` of a series whose factorial normalization obeys
/// `rec`, for an ascending list of target indices.  Indices below the
/// recurrence order are read straight off the seed series.
fn unroll_targets(
    series: &TruncSeries<PadicCtx>,
    rec: &RecurrenceSystem,
    w: &PadicCtx,
    p: u64,
    targets: &[i64],
    beta: i64,
    counter: &mut usize,
) -> Result<Vec<FieldElem>> {
    let mut unroller = Unroller::new(rec, w, beta, series, p);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if (t as usize) < rec.order {
            out.push(w.reduce_mod_p(&series.coeff(t as usize, w)));
        } else {
            unroller.advance_to(t, counter);
            out.push(unroller.read()?);
        }
    }
    Ok(out)
}

fn series_pow(
    base: &TruncSeries<PadicCtx>,
    mut e: u64,
    w: &PadicCtx,
) -> TruncSeries<PadicCtx> {
    let mut acc = TruncSeries::one(base.prec(), w);
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&b, w);
        }
        b = b.mul(&b, w);
        e >>= 1;
    }
    acc
}

fn engine_beta(inst: &AlgebraicInstance) -> i64 {
    let p = inst.field.p;
    isqrt_ceil(2 * (inst.d as u64) * (inst.h as u64) * p).min(p) as i64
}

/// Raw digit-`r` section data `g_{r+pj} mod p` for `j < count`, read through
/// the recurrence at the origin.  The caller takes p-th roots.
fn section_coeffs_ordinary(
    inst: &AlgebraicInstance,
    lifted: &LiftedInstance,
    ode: &OdeSystem,
    state: &BiPoly<FieldCtx>,
    digit: u64,
    beta: i64,
    count: usize,
    counter: &mut usize,
) -> Result<Vec<FieldElem>> {
    let w = &lifted.w;
    let p = inst.field.p;
    let coeffs_w: Vec<UniPoly<PadicCtx>> =
        (0..=ode.order).map(|j| ode.reduced_coeff(j, w)).collect();
    let rec = ode_to_recurrence(&coeffs_w, w)?;
    let prec = rec.order.max(1);
    let fhat = lifted.f_hat(inst, prec)?;
    let p_w = state.map_coeffs(w, |c| w.canonical_lift(c).expect("state coefficient"));
    let num = eval_bipoly_at_series(&p_w, &fhat, prec, w);
    let den = eval_bipoly_at_series(&lifted.e_w.deriv_y(w), &fhat, prec, w);
    let g = num.mul(&den.inverse(w)?, w);
    let targets: Vec<i64> = (0..count).map(|j| (digit + p * j as u64) as i64).collect();
    unroll_targets(&g, &rec, w, p, &targets, beta, counter)
}

/// Public probe used by tests and validation: the section data of one digit
/// computed through the recurrence, for a state whose recurrence is usable
/// at the origin.
pub fn ordinary_section_coeffs(
    inst: &AlgebraicInstance,
    state: &BiPoly<FieldCtx>,
    digit: u64,
) -> Result<Vec<FieldElem>> {
    section_prefix(inst, state, digit, 2 * inst.d * inst.h)
}

/// The first `count` digit-`r` section data values `g_{r+pj} mod p`,
/// `0 <= j < count`, unrolled through the recurrence with the p-adic
/// precision required by the largest target index.
pub fn section_prefix(
    inst: &AlgebraicInstance,
    state: &BiPoly<FieldCtx>,
    digit: u64,
    count: usize,
) -> Result<Vec<FieldElem>> {
    let p = inst.field.p;
    let top = digit + p * count.saturating_sub(1) as u64;
    let m = (factorial_valuation(top, p) + 1) as u32;
    let lifted = lift_instance(inst, m)?;
    let ode = derive_ode(&lifted, state)?;
    if !ode.is_ordinary(&inst.field) {
        return Err(Error::NotAUnit);
    }
    let mut counter = 0usize;
    section_coeffs_ordinary(
        inst,
        &lifted,
        &ode,
        state,
        digit,
        engine_beta(inst),
        count,
        &mut counter,
    )
}

// ---------------------------------------------------------------------------
// Goodness splitting
// ---------------------------------------------------------------------------

fn random_state(inst: &AlgebraicInstance, rng: &mut impl Rng) -> BiPoly<FieldCtx> {
    let ctx = &inst.field;
    BiPoly::from_rows(
        (0..inst.d)
            .map(|_| {
                UniPoly::from_coeffs(
                    (0..=inst.h).map(|_| ctx.sample_uniform(rng)).collect(),
                    ctx,
                )
            })
            .collect(),
    )
}

/// The state together with its derived ODE, for each summand the digit step
/// will process.  Zero states need no work; states with a usable leading
/// coefficient go through whole; the rest are split into two usable parts.
fn good_parts(
    inst: &AlgebraicInstance,
    lifted: &LiftedInstance,
    state: &BiPoly<FieldCtx>,
    rng: &mut impl Rng,
) -> Result<Vec<(BiPoly<FieldCtx>, OdeSystem)>> {
    if state.is_zero() {
        return Ok(vec![]);
    }
    let ctx = &inst.field;
    let ode = derive_ode(lifted, state)?;
    if ode.leading_good(ctx) {
        return Ok(vec![(state.clone(), ode)]);
    }
    for _ in 0..SPLIT_RETRIES {
        let p1 = random_state(inst, rng);
        let p2 = state.sub(&p1, ctx);
        if p1.is_zero() || p2.is_zero() {
            continue;
        }
        let o1 = match derive_ode(lifted, &p1) {
            Ok(o) => o,
            Err(Error::SingularDerivation) => continue,
            Err(e) => return Err(e),
        };
        if !o1.leading_good(ctx) {
            continue;
        }
        let o2 = match derive_ode(lifted, &p2) {
            Ok(o) => o,
            Err(Error::SingularDerivation) => continue,
            Err(e) => return Err(e),
        };
        if !o2.leading_good(ctx) {
            continue;
        }
        return Ok(vec![(p1, o1), (p2, o2)]);
    }
    Err(Error::SplitFailed)
}

/// Decompose a state for the digit step: `(state, 0)` when its own
/// recurrence is usable, `(0, 0)` for the zero state, and a random split
/// into two usable summands otherwise.
pub fn goodness_split(
    inst: &AlgebraicInstance,
    state: &BiPoly<FieldCtx>,
    rng: &mut impl Rng,
) -> Result<(BiPoly<FieldCtx>, BiPoly<FieldCtx>)> {
    let m = derive_precision(inst, inst.field.p - 1);
    let lifted = lift_unchecked(inst, m);
    let parts = good_parts(inst, &lifted, state, rng)?;
    match parts.len() {
        0 => Ok((BiPoly::zero(), BiPoly::zero())),
        1 => Ok((parts[0].0.clone(), BiPoly::zero())),
        _ => Ok((parts[0].0.clone(), parts[1].0.clone())),
    }
}

// ---------------------------------------------------------------------------
// Change of origin
// ---------------------------------------------------------------------------

/// A translated origin `t = alpha` over an extension `ell` of the base
/// field, together with the translated instance whose series root is the
/// branch at the new origin.
pub struct ShiftContext {
    pub alpha: FieldElem,
    pub ext: FieldCtx,
    pub embed: Embedding,
    pub shifted_inst: AlgebraicInstance,
}

pub enum Origin {
    /// `t = 0` works: `L`, `R` and the leading ODE coefficient are all
    /// nonzero there.
    Zero,
    Shifted(ShiftContext),
}

fn build_shift_context(
    inst: &AlgebraicInstance,
    alpha: &FieldElem,
    rng: &mut impl Rng,
) -> Result<ShiftContext> {
    let k = &inst.field;
    let fiber = inst.e.eval_t(alpha, k);
    for edeg in 1..=inst.d {
        let ext = if edeg == 1 {
            k.clone()
        } else {
            let coeffs = random_irreducible_coeffs(k.p, k.s * edeg, rng);
            FieldCtx::extension(k.p, &coeffs)?
        };
        let embed = Embedding::new(k, &ext, rng)?;
        let fiber_l = fiber.map_coeffs(&ext, |c| embed.map(c));
        let roots = roots_in_field(&fiber_l, &ext, rng);
        if let Some(root) = roots.into_iter().next() {
            let e_l = inst.e.map_coeffs(&ext, |c| embed.map(c));
            let alpha_l = embed.map(alpha);
            let e_shifted = e_l.shift_t(&alpha_l, &ext);
            let shifted_inst = AlgebraicInstance::new(ext.clone(), e_shifted, 0, vec![root])?;
            return Ok(ShiftContext { alpha: alpha.clone(), ext, embed, shifted_inst });
        }
    }
    Err(Error::InvariantViolation(
        "translated fiber has no root in extensions up to the full degree".into(),
    ))
}

/// Select an origin for one digit step of a state with the given ODE: the
/// first field element `alpha` (in enumeration order) with
/// `L(alpha) R(alpha) a_order(alpha) != 0`.  `alpha = 0` short-circuits to
/// the untranslated fast path.
pub fn change_origin(
    inst: &AlgebraicInstance,
    ode: &OdeSystem,
    rng: &mut impl Rng,
) -> Result<Origin> {
    let k = &inst.field;
    let lead_bar = ode.leading_mod_p(k);
    let cap = k.order().map(|o| o.min(ALPHA_SEARCH_CAP)).unwrap_or(ALPHA_SEARCH_CAP);
    for idx in 0..cap {
        let alpha = k.elem_from_index(idx);
        if k.is_zero(&inst.lead().eval(&alpha, k))
            || k.is_zero(&inst.res().eval(&alpha, k))
            || k.is_zero(&lead_bar.eval(&alpha, k))
        {
            continue;
        }
        if idx == 0 {
            return Ok(Origin::Zero);
        }
        return build_shift_context(inst, &alpha, rng).map(Origin::Shifted);
    }
    Err(Error::NoAdmissibleAlpha)
}

// ---------------------------------------------------------------------------
// Digit step at a translated origin
// ---------------------------------------------------------------------------

/// Carries `W(k)` elements into `W(ell)` along an embedding of residue
/// fields, by Newton-lifting the image of the defining root.
struct PadicEmbed {
    root_powers: Vec<PadicElem>,
}

impl PadicEmbed {
    fn new(embed: &Embedding, wl: &PadicCtx) -> Result<Self> {
        let s_from = embed.from.s;
        let pi: UniPoly<PadicCtx> = UniPoly::from_coeffs(
            embed.from.modulus().coeffs().iter().map(|&c| wl.from_i64(c as i64)).collect(),
            wl,
        );
        let dpi = pi.derivative(wl);
        let mut x = wl.canonical_lift(&embed.root)?;
        let mut gain = 1u64;
        while gain < wl.m as u64 {
            let fx = pi.eval(&x, wl);
            let dfx = dpi.eval(&x, wl);
            let step = wl.mul(&fx, &wl.unit_inverse(&dfx)?);
            x = wl.sub(&x, &step);
            gain *= 2;
        }
        if !wl.is_zero(&pi.eval(&x, wl)) {
            return Err(Error::InvariantViolation(
                "embedded defining root did not lift exactly".into(),
            ));
        }
        let mut root_powers = vec![wl.one()];
        for _ in 1..s_from {
            let next = wl.mul(root_powers.last().expect("nonempty"), &x);
            root_powers.push(next);
        }
        Ok(PadicEmbed { root_powers })
    }

    fn map(&self, a: &PadicElem, wl: &PadicCtx) -> PadicElem {
        let s_to = self.root_powers.first().map(|r| r.coords().len()).unwrap_or(1);
        let mut acc = wl.zero();
        for (i, c) in a.coords().iter().enumerate() {
            let mut coords = vec![BigUint::from(0u32); s_to];
            coords[0] = c.clone();
            let scalar = wl.elem_from_biguints(&coords).expect("scalar coordinates");
            acc = wl.add(&acc, &wl.mul(&scalar, &self.root_powers[i]));
        }
        acc
    }

    fn map_poly(&self, a: &UniPoly<PadicCtx>, wl: &PadicCtx) -> UniPoly<PadicCtx> {
        a.map_coeffs(wl, |c| self.map(c, wl))
    }

    fn map_bipoly(&self, a: &BiPoly<PadicCtx>, wl: &PadicCtx) -> BiPoly<PadicCtx> {
        a.map_coeffs(wl, |c| self.map(c, wl))
    }
}

/// Recentre ODE coefficients at `u = t - alpha` and twist by `(u+alpha)^rp`
/// (for digit `r`, `rp = p-1-r`): if `g` satisfies `sum a_j g^(j) = 0` then
/// `G = (u+alpha)^rp g(u+alpha)` satisfies `sum b_m G^(m) = 0` with
/// `b_m(u) = sum_i a_{m+i}(u+alpha) C(m+i,i) (-1)^i (rp)^(i,rising)
///           (u+alpha)^(order-i)`.
fn shifted_ode_coeffs(
    a: &[UniPoly<PadicCtx>],
    rp: u64,
    alpha_hat: &PadicElem,
    w: &PadicCtx,
) -> Result<Vec<UniPoly<PadicCtx>>> {
    let order = a.len() - 1;
    let z = UniPoly::from_coeffs(vec![alpha_hat.clone(), w.one()], w);
    let mut zpow = vec![UniPoly::one(w)];
    for _ in 1..=order {
        let next = zpow.last().expect("nonempty").mul(&z, w);
        zpow.push(next);
    }
    let shifted: Vec<UniPoly<PadicCtx>> =
        a.iter().map(|aj| aj.shift_argument(alpha_hat, w)).collect();
    let mut out = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let mut bm = UniPoly::zero();
        let mut comb = w.one();
        let mut rise = w.one();
        for i in 0..=order - m {
            if i > 0 {
                let num = w.from_i64((m + i) as i64);
                let den_inv = w.unit_inverse(&w.from_i64(i as i64))?;
                comb = w.mul(&comb, &w.mul(&num, &den_inv));
                rise = w.mul(&rise, &w.from_i64((rp + i as u64 - 1) as i64));
            }
            let mut scale = w.mul(&comb, &rise);
            if i % 2 == 1 {
                scale = w.neg(&scale);
            }
            let term = shifted[m + i].mul(&zpow[order - i], w).scale(&scale, w);
            bm = bm.add(&term, w);
        }
        out.push(bm);
    }
    Ok(out)
}

/// One digit step of a state at a translated origin: unroll the recentred,
/// twisted recurrence over `W(ell)`, reconstruct the section state against
/// the translated instance, pull it back to `t`-coordinates, and coerce the
/// result into the base field.
fn shifted_digit_state(
    inst: &AlgebraicInstance,
    lifted: &LiftedInstance,
    sc: &ShiftContext,
    ode: &OdeSystem,
    state: &BiPoly<FieldCtx>,
    digit: u64,
    beta: i64,
    counter: &mut usize,
) -> Result<BiPoly<FieldCtx>> {
    let k = &inst.field;
    let ell = &sc.ext;
    let p = k.p;
    let wl = PadicCtx::new(ell, lifted.w.m);
    let pe = PadicEmbed::new(&sc.embed, &wl)?;
    let alpha_hat = pe.map(&lifted.w.canonical_lift(&sc.alpha)?, &wl);
    let rp = p - 1 - digit;
    let a_l: Vec<UniPoly<PadicCtx>> =
        (0..=ode.order).map(|j| pe.map_poly(&ode.reduced_coeff(j, &lifted.w), &wl)).collect();
    let b = shifted_ode_coeffs(&a_l, rp, &alpha_hat, &wl)?;
    let rec = ode_to_recurrence(&b, &wl)?;
    let prec = rec.order.max(1);
    // Branch of the translated curve at its origin, lifted to W(ell).
    let base = sc.shifted_inst.hensel_lift(prec)?;
    let start =
        base.map::<PadicCtx>(|c| wl.canonical_lift(c).expect("series over the extension"));
    let e_tau = pe.map_bipoly(&lifted.e_w, &wl).shift_t(&alpha_hat, &wl);
    let f_alpha = padic_root_refine(&e_tau, &start, &wl)?;
    // G = (u+alpha)^rp * P_tau(f_alpha) / E_tau_y(f_alpha).
    let p_wk = state.map_coeffs(&lifted.w, |c| {
        lifted.w.canonical_lift(c).expect("state coefficient")
    });
    let p_tau = pe.map_bipoly(&p_wk, &wl).shift_t(&alpha_hat, &wl);
    let num = eval_bipoly_at_series(&p_tau, &f_alpha, prec, &wl);
    let den = eval_bipoly_at_series(&e_tau.deriv_y(&wl), &f_alpha, prec, &wl);
    let mut g = num.mul(&den.inverse(&wl)?, &wl);
    if rp > 0 {
        let z = TruncSeries::from_poly(
            &UniPoly::from_coeffs(vec![alpha_hat.clone(), wl.one()], &wl),
            prec,
            &wl,
        );
        g = g.mul(&series_pow(&z, rp, &wl), &wl);
    }
    let hp = build_hp_system(&sc.shifted_inst)?;
    let targets: Vec<i64> =
        (0..hp.data_len()).map(|j| (p - 1 + p * j as u64) as i64).collect();
    let raw = unroll_targets(&g, &rec, &wl, p, &targets, beta, counter)?;
    let c: Vec<FieldElem> = raw.iter().map(|a| ell.pth_root(a)).collect();
    let section = hp.reconstruct(&c, &sc.shifted_inst)?;
    let alpha_l = sc.embed.map(&sc.alpha);
    let pulled = section.shift_t(&ell.neg(&alpha_l), ell);
    let rows: Result<Vec<UniPoly<FieldCtx>>> = pulled
        .rows()
        .iter()
        .map(|row| {
            let coeffs: Result<Vec<FieldElem>> = row
                .coeffs()
                .iter()
                .map(|c| {
                    sc.embed.preimage(c).map_err(|_| {
                        Error::InvariantViolation(
                            "translated digit step left the base field".into(),
                        )
                    })
                })
                .collect();
            Ok(UniPoly::from_coeffs(coeffs?, k))
        })
        .collect();
    Ok(BiPoly::from_rows(rows?))
}

// ---------------------------------------------------------------------------
// Full walk
// ---------------------------------------------------------------------------

struct WalkCtx<'a> {
    inst: &'a AlgebraicInstance,
    lifted: LiftedInstance,
    hp: Option<HpSystem>,
    beta: i64,
    block_mults: usize,
    shifted_digits: usize,
}

fn digit_step(
    wc: &mut WalkCtx<'_>,
    state: &BiPoly<FieldCtx>,
    digit: u64,
    rng: &mut impl Rng,
) -> Result<BiPoly<FieldCtx>> {
    let ctx = &wc.inst.field;
    let parts = good_parts(wc.inst, &wc.lifted, state, rng)?;
    let mut acc = BiPoly::zero();
    let mut used_shift = false;
    for (part, ode) in &parts {
        let piece = match change_origin(wc.inst, ode, rng)? {
            Origin::Zero => {
                debug_assert_eq!(wc.inst.val_ey, 0);
                if wc.hp.is_none() {
                    wc.hp = Some(build_hp_system(wc.inst)?);
                }
                let hp = wc.hp.as_ref().expect("just built");
                let raw = section_coeffs_ordinary(
                    wc.inst,
                    &wc.lifted,
                    ode,
                    part,
                    digit,
                    wc.beta,
                    hp.data_len(),
                    &mut wc.block_mults,
                )?;
                let c: Vec<FieldElem> = raw.iter().map(|a| ctx.pth_root(a)).collect();
                hp.reconstruct(&c, wc.inst)?
            }
            Origin::Shifted(sc) => {
                used_shift = true;
                shifted_digit_state(
                    wc.inst,
                    &wc.lifted,
                    &sc,
                    ode,
                    part,
                    digit,
                    wc.beta,
                    &mut wc.block_mults,
                )?
            }
        };
        acc = acc.add(&piece, ctx);
    }
    if used_shift {
        wc.shifted_digits += 1;
    }
    Ok(acc)
}

/// One digit step of the full engine on an explicit state, exposed for
/// cross-validation against the direct polynomial section.
pub fn recurrence_digit_image(
    inst: &AlgebraicInstance,
    state: &BiPoly<FieldCtx>,
    digit: u64,
    rng: &mut impl Rng,
) -> Result<BiPoly<FieldCtx>> {
    let m = derive_precision(inst, inst.field.p - 1);
    let mut wc = WalkCtx {
        inst,
        lifted: lift_unchecked(inst, m),
        hp: None,
        beta: engine_beta(inst),
        block_mults: 0,
        shifted_digits: 0,
    };
    digit_step(&mut wc, state, digit, rng)
}

fn run_walk(
    inst: &AlgebraicInstance,
    n: &BigUint,
    rng: &mut impl Rng,
) -> Result<(FieldElem, usize, usize)> {
    let ctx = &inst.field;
    let m = derive_precision(inst, ctx.p - 1);
    let mut wc = WalkCtx {
        inst,
        lifted: lift_unchecked(inst, m),
        hp: None,
        beta: engine_beta(inst),
        block_mults: 0,
        shifted_digits: 0,
    };
    let digits = digits_base_p(n, ctx.p);
    let mut state = represent_y(inst);
    for &r in &digits {
        state = digit_step(&mut wc, &state, r, rng)?;
    }
    let value = inst.eval_state(&state)?;
    let value = ctx.frobenius_iter(&value, digits.len() as u64);
    Ok((value, wc.block_mults, wc.shifted_digits))
}

/// Outcome of the recurrence engine, with enough bookkeeping to audit how
/// the answer was produced.
#[derive(Debug)]
pub struct RecurrenceOutcome {
    pub value: FieldElem,
    /// Polynomial-matrix products spent building giant-step blocks.
    pub block_mults: usize,
    /// Digits processed at a translated origin.
    pub shifted_digits: usize,
    /// The instance was handed to the structured-solver walk because `p` is
    /// too small for the recurrence to pay off.
    pub delegated: bool,
    /// Set when the walk hit a dead end (no usable origin or split) and the
    /// whole computation was redone by the structured-solver walk.
    pub downgrade: Option<Error>,
}

/// Coefficient `f_N` via the recurrence-driven digit walk.
///
/// Instances with `p <= 2(dh)^2` are delegated to the structured-solver walk
/// (the recurrence only pays off past that point).  Unrecoverable
/// degeneracies fall back the same way, recording the reason.
pub fn nth_coeff_recurrence_with_stats(
    inst: &AlgebraicInstance,
    n: &BigUint,
    rng: &mut impl Rng,
) -> Result<RecurrenceOutcome> {
    let ctx = &inst.field;
    let dh = (inst.d * inst.h) as u128;
    if (ctx.p as u128) <= 2 * dh * dh {
        let value = nth_coeff_hp(inst, n)?;
        return Ok(RecurrenceOutcome {
            value,
            block_mults: 0,
            shifted_digits: 0,
            delegated: true,
            downgrade: None,
        });
    }
    if *n <= BigUint::from(2 * inst.rho as u64) {
        let idx = n.to_usize().expect("tiny index");
        return Ok(RecurrenceOutcome {
            value: inst.init[idx].clone(),
            block_mults: 0,
            shifted_digits: 0,
            delegated: false,
            downgrade: None,
        });
    }
    match run_walk(inst, n, rng) {
        Ok((value, block_mults, shifted_digits)) => Ok(RecurrenceOutcome {
            value,
            block_mults,
            shifted_digits,
            delegated: false,
            downgrade: None,
        }),
        Err(e) if matches!(e, Error::NoAdmissibleAlpha | Error::SplitFailed) => {
            let value = nth_coeff_hp(inst, n)?;
            Ok(RecurrenceOutcome {
                value,
                block_mults: 0,
                shifted_digits: 0,
                delegated: false,
                downgrade: Some(e),
            })
        }
        Err(e) => Err(e),
    }
}

/// Coefficient `f_N` via the recurrence-driven digit walk.
pub fn nth_coeff_recurrence(
    inst: &AlgebraicInstance,
    n: &BigUint,
    rng: &mut impl Rng,
) -> Result<FieldElem> {
    Ok(nth_coeff_recurrence_with_stats(inst, n, rng)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christol::{bivariate_section, stable_section};
    use crate::testutil::{bipoly, f5_instance, f9_instance, rational_instance, rho1_instance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prime_instance(p: u64, rows: &[&[i64]], rho: usize, init: &[i64]) -> AlgebraicInstance {
        let f = FieldCtx::prime_field(p).unwrap();
        let e = bipoly(&f, rows);
        let init = init.iter().map(|&c| f.from_i64(c)).collect();
        AlgebraicInstance::new(f, e, rho, init).unwrap()
    }

    /// y^2 - y - t: the square-root-like series with Catalan-style
    /// coefficients, regular at the origin for every odd p.
    fn catalan(p: u64) -> AlgebraicInstance {
        prime_instance(p, &[&[0, -1], &[-1], &[1]], 0, &[0])
    }

    /// (1+t)y^2 + ty - c t^2 over F_37: R(t) is divisible by t^2, so the
    /// origin is singular and every digit must be translated.
    fn f37_shifted(c: i64, init: &[i64]) -> AlgebraicInstance {
        prime_instance(37, &[&[0, 0, -c], &[0, 1], &[1, 1]], 1, init)
    }

    /// (1-t)y - x over F_9 = F_3[x]/(x^2+1): a d = h = 1 instance where the
    /// engine is active already at p = 3.
    fn f9_geometric() -> AlgebraicInstance {
        let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
        let x = f9.elem_from_coords(&[0, 1]).unwrap();
        let row0 = UniPoly::from_coeffs(vec![f9.neg(&x)], &f9);
        let row1 = UniPoly::from_coeffs(vec![f9.one(), f9.from_i64(-1)], &f9);
        let e = BiPoly::from_rows(vec![row0, row1]);
        AlgebraicInstance::new(f9.clone(), e, 0, vec![x]).unwrap()
    }

    #[test]
    fn precision_from_largest_visited_index() {
        // d = h = 2 over F_101, digit 3: top index 3 + 12*101 = 1215,
        // val(1215!) = 12.
        let inst = prime_instance(101, &[&[0, -1, -7], &[-1], &[1]], 0, &[0]);
        assert_eq!(derive_precision(&inst, 3), 13);
        // Large p relative to dh: the valuation collapses to 2d(h+1).
        let f4001 = prime_instance(4001, &[&[-1], &[1, -1]], 0, &[1]);
        assert_eq!(derive_precision(&f4001, 4000), 5);
        // p = 2 rational: top index 9, val(9!) = 7.
        let f2 = prime_instance(2, &[&[0, 1], &[1, 1]], 0, &[0]);
        assert_eq!(derive_precision(&f2, 1), 8);
    }

    #[test]
    fn lift_requires_regularity_at_zero() {
        let inst = rho1_instance();
        assert!(matches!(lift_instance(&inst, 3), Err(Error::H1Violated)));
        let lifted = lift_unchecked(&inst, 3);
        assert!(matches!(lifted.f_hat(&inst, 5), Err(Error::H1Violated)));
        // A regular instance lifts, and the lifted root reduces to the
        // mod-p root.
        let cat = catalan(101);
        let lifted = lift_instance(&cat, 4).unwrap();
        let fw = lifted.f_hat(&cat, 20).unwrap();
        let fk = cat.hensel_lift(20).unwrap();
        let reduced = fw.map::<FieldCtx>(|c| lifted.w.reduce_mod_p(c));
        assert_eq!(reduced, fk);
    }

    #[test]
    fn ode_of_rational_state_is_first_order() {
        // For E = c(t) y - b(t) the derived state denotes a scalar multiple
        // of 1/c(t), so the ODE must be (a multiple of) c g' + c' g = 0:
        // first order, ordinary at 0, with a_1 c' = a_0 c exactly.
        for inst in [rational_instance(), f9_geometric()] {
            let lifted = lift_instance(&inst, 3).unwrap();
            let ode = derive_ode(&lifted, &represent_y(&inst)).unwrap();
            assert_eq!(ode.order, 1);
            let zq = &lifted.zq;
            let c_poly = lifted.e_exact.rows().last().unwrap().clone();
            let c_prime = c_poly.derivative(zq);
            assert!(!c_prime.is_zero());
            let lhs = ode.coeffs[1].mul(&c_prime, zq);
            let rhs = ode.coeffs[0].mul(&c_poly, zq);
            assert_eq!(lhs, rhs);
            assert!(ode.is_ordinary(&inst.field));
        }
    }

    #[test]
    fn ode_annihilates_state_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let insts = [
            f5_instance(),
            rational_instance(),
            f9_instance(),
            catalan(101),
            prime_instance(101, &[&[0, -1, -7], &[-1], &[1]], 0, &[0]),
        ];
        for inst in &insts {
            let lifted = lift_instance(inst, 4).unwrap();
            let w = lifted.w.clone();
            for state in [represent_y(inst), random_state(inst, &mut rng)] {
                if state.is_zero() {
                    continue;
                }
                let ode = derive_ode(&lifted, &state).unwrap();
                let check = 40usize;
                let f = lifted.f_hat(inst, check + ode.order).unwrap();
                let fp = f.prec();
                let p_w = state.map_coeffs(&w, |c| w.canonical_lift(c).unwrap());
                let num = eval_bipoly_at_series(&p_w, &f, fp, &w);
                let den = eval_bipoly_at_series(&lifted.e_w.deriv_y(&w), &f, fp, &w);
                let mut g = num.mul(&den.inverse(&w).unwrap(), &w);
                let mut acc = TruncSeries::zero(check, &w);
                for j in 0..=ode.order {
                    let aj = ode.reduced_coeff(j, &w);
                    acc = acc.add(&g.truncate(check).mul_poly(&aj, &w).truncate(check), &w);
                    // d/dt for the next round.
                    g = TruncSeries::from_coeffs(
                        g.coeffs()
                            .iter()
                            .skip(1)
                            .enumerate()
                            .map(|(i, c)| w.mul(c, &w.from_i64(i as i64 + 1)))
                            .collect(),
                    );
                }
                assert!(acc.is_zero(&w), "nonzero ODE residual");
            }
        }
    }

    #[test]
    fn recurrence_walks_the_series() {
        // Unroll the companion recurrence far past p and compare against the
        // plain mod-p expansion.
        let inst = catalan(101);
        let lifted = lift_instance(&inst, 6).unwrap();
        let w = &lifted.w;
        let state = represent_y(&inst);
        let ode = derive_ode(&lifted, &state).unwrap();
        let coeffs_w: Vec<UniPoly<PadicCtx>> =
            (0..=ode.order).map(|j| ode.reduced_coeff(j, w)).collect();
        let rec = ode_to_recurrence(&coeffs_w, w).unwrap();
        let fhat = lifted.f_hat(&inst, rec.order.max(1)).unwrap();
        let fp = fhat.prec();
        let p_w = state.map_coeffs(w, |c| w.canonical_lift(c).unwrap());
        let num = eval_bipoly_at_series(&p_w, &fhat, fp, w);
        let den = eval_bipoly_at_series(&lifted.e_w.deriv_y(w), &fhat, fp, w);
        let g = num.mul(&den.inverse(w).unwrap(), w);
        let targets: Vec<i64> = (0..=300).collect();
        let mut counter = 0usize;
        let got = unroll_targets(&g, &rec, w, 101, &targets, engine_beta(&inst), &mut counter)
            .unwrap();
        // Reference: k-level series of the same state.
        let ctx = &inst.field;
        let fk = inst.hensel_lift(301).unwrap();
        let numk = eval_bipoly_at_series(&state, &fk, 301, ctx);
        let denk = eval_bipoly_at_series(&inst.e_y(), &fk, 301, ctx);
        let gk = numk.mul(&denk.inverse(ctx).unwrap(), ctx);
        for (n, value) in got.iter().enumerate() {
            assert_eq!(value, &gk.coeff(n, ctx), "coefficient {n}");
        }
    }

    #[test]
    fn matrix_factorial_modes_agree() {
        let f5 = FieldCtx::prime_field(5).unwrap();
        let w = PadicCtx::new(&f5, 3);
        // M(x) = [[x, 1], [0, 1]]: the product over x = 1..4 accumulates
        // 4! = 24 and 1 + 1! + 2! + 3! = 10 -> 41 after the final step.
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => UniPoly::from_coeffs(vec![w.zero(), w.one()], &w),
            (0, 1) | (1, 1) => UniPoly::one(&w),
            _ => UniPoly::zero(),
        });
        let mut c1 = 0usize;
        let naive = matrix_factorial(&m, 1, 4, FactorialMode::Naive, &w, &mut c1);
        assert_eq!(naive[[0, 0]], w.from_i64(24));
        assert_eq!(naive[[0, 1]], w.from_i64(41));
        assert_eq!(naive[[1, 0]], w.zero());
        assert_eq!(naive[[1, 1]], w.one());
        assert_eq!(c1, 3);
        let mut c2 = 0usize;
        let fast = matrix_factorial(&m, 1, 4, FactorialMode::Bsgs, &w, &mut c2);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(naive[[i, j]], fast[[i, j]]);
            }
        }
        // Random 3x3 polynomial matrices over W(F_5, 3), random ranges.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let mat = Mat::from_fn(3, 3, |_, _| {
                UniPoly::from_coeffs(
                    (0..3).map(|_| w.from_i64(rng.gen_range(-50..50))).collect(),
                    &w,
                )
            });
            let lo = rng.gen_range(-20..1000);
            let hi = lo + rng.gen_range(-1..40);
            let mut cn = 0usize;
            let a = matrix_factorial(&mat, lo, hi, FactorialMode::Naive, &w, &mut cn);
            let mut cb = 0usize;
            let b = matrix_factorial(&mat, lo, hi, FactorialMode::Bsgs, &w, &mut cb);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(a[[i, j]], b[[i, j]], "range {lo}..={hi}");
                }
            }
            if hi > lo {
                assert_eq!(cn as i64, hi - lo);
            }
        }
        // On a long range the block decomposition does far fewer products.
        let mat = Mat::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                UniPoly::from_coeffs(vec![w.one(), w.one()], &w)
            } else if i == j {
                UniPoly::one(&w)
            } else {
                UniPoly::zero()
            }
        });
        let mut cn = 0usize;
        let mut cb = 0usize;
        let a = matrix_factorial(&mat, 1, 900, FactorialMode::Naive, &w, &mut cn);
        let b = matrix_factorial(&mat, 1, 900, FactorialMode::Bsgs, &w, &mut cb);
        assert_eq!(a[[0, 0]], b[[0, 0]]);
        assert_eq!(cn, 899);
        assert!(cb < 100, "bsgs used {cb} products");
    }

    #[test]
    fn section_data_matches_plain_expansion() {
        let inst = catalan(101);
        let ctx = &inst.field;
        let state = represent_y(&inst);
        // Plain expansion of the state's series, far enough for every target.
        let prec = 101 * 8 + 101;
        let fk = inst.hensel_lift(prec).unwrap();
        let numk = eval_bipoly_at_series(&state, &fk, prec, ctx);
        let denk = eval_bipoly_at_series(&inst.e_y(), &fk, prec, ctx);
        let gk = numk.mul(&denk.inverse(ctx).unwrap(), ctx);
        for digit in [0u64, 3, 100] {
            let got = ordinary_section_coeffs(&inst, &state, digit).unwrap();
            assert_eq!(got.len(), 2 * inst.d * inst.h);
            for (j, value) in got.iter().enumerate() {
                let idx = digit as usize + 101 * j;
                assert_eq!(value, &gk.coeff(idx, ctx), "digit {digit}, offset {j}");
            }
        }
    }

    #[test]
    fn split_contract_and_additivity() {
        let inst = catalan(101);
        let ctx = &inst.field;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        // A state with a usable recurrence passes through unchanged.
        let state = represent_y(&inst);
        let (a, b) = goodness_split(&inst, &state, &mut rng).unwrap();
        assert_eq!(a, state);
        assert!(b.is_zero());
        // The zero state splits into nothing.
        let (a, b) = goodness_split(&inst, &BiPoly::zero(), &mut rng).unwrap();
        assert!(a.is_zero() && b.is_zero());
        // Processing parts separately and summing agrees with the direct
        // polynomial section of the sum.
        let m = derive_precision(&inst, 100);
        let lifted = lift_instance(&inst, m).unwrap();
        for digit in [0u64, 7] {
            let p1 = random_state(&inst, &mut rng);
            let p2 = state.sub(&p1, ctx);
            if p1.is_zero() || p2.is_zero() {
                continue;
            }
            let mut images = Vec::new();
            let hp = build_hp_system(&inst).unwrap();
            for part in [&p1, &p2] {
                let ode = derive_ode(&lifted, part).unwrap();
                if !ode.is_ordinary(ctx) {
                    continue;
                }
                let raw = section_coeffs_ordinary(
                    &inst,
                    &lifted,
                    &ode,
                    part,
                    digit,
                    engine_beta(&inst),
                    hp.data_len(),
                    &mut 0,
                )
                .unwrap();
                let c: Vec<FieldElem> = raw.iter().map(|v| ctx.pth_root(v)).collect();
                images.push(hp.reconstruct(&c, &inst).unwrap());
            }
            if images.len() < 2 {
                continue;
            }
            let summed = images[0].add(&images[1], ctx);
            let direct = stable_section(&inst, &state, digit).unwrap();
            assert_eq!(summed, direct);
        }
    }

    #[test]
    fn digit_image_agrees_with_polynomial_section() {
        // The full per-digit machinery (ordinary and translated alike) must
        // reproduce the direct polynomial section on explicit states.
        let mut rng = ChaCha8Rng::seed_from_u64(333);
        let cases = [
            (catalan(101), vec![0u64, 1, 57, 100]),
            (f37_shifted(2, &[0, 1, 12]), vec![0u64, 5, 36]),
        ];
        for (inst, digits) in &cases {
            for &r in digits {
                for state in [represent_y(inst), random_state(inst, &mut rng)] {
                    let got = recurrence_digit_image(inst, &state, r, &mut rng).unwrap();
                    let want = stable_section(inst, &state, r).unwrap();
                    assert_eq!(got, want, "digit {r}");
                }
            }
        }
    }

    #[test]
    fn section_commutes_with_translation() {
        // Polynomial identity underpinning the translated path:
        // S_r(Q) = tau_{-alpha}( S_{p-1}( tau_alpha(t^{p-1-r} Q E^{p-1}) ) ).
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for inst in [f5_instance(), f9_instance(), rational_instance(), rho1_instance()] {
            let ctx = &inst.field;
            let p = ctx.p;
            let e_pm1 = inst.e_pow_pm1();
            for _ in 0..8 {
                let q = random_state(&inst, &mut rng);
                let alpha = ctx.sample_uniform(&mut rng);
                let r = rng.gen_range(0..p);
                let lhs = stable_section(&inst, &q, r).unwrap();
                let tpow = UniPoly::monomial(ctx.one(), (p - 1 - r) as usize, ctx);
                let moved = q
                    .scale_t(&tpow, ctx)
                    .mul(&e_pm1, ctx)
                    .shift_t(&alpha, ctx);
                let sect = bivariate_section(&moved, p - 1, p - 1, ctx).unwrap();
                let rhs = sect.shift_t(&ctx.neg(&alpha), ctx);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn engine_matches_oracle_at_regular_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cases: Vec<(AlgebraicInstance, Vec<u64>)> = vec![
            (catalan(101), vec![70, 10_007]),
            (catalan(211), vec![500]),
            (f9_geometric(), vec![10, 26]),
        ];
        for (inst, ns) in &cases {
            for &n in ns {
                let want = inst.oracle_nth_coeff(n).unwrap();
                let out =
                    nth_coeff_recurrence_with_stats(inst, &BigUint::from(n), &mut rng).unwrap();
                assert_eq!(out.value, want, "p = {}, N = {n}", inst.field.p);
                assert!(!out.delegated);
                assert!(out.downgrade.is_none());
                assert_eq!(out.shifted_digits, 0);
            }
        }
    }

    #[test]
    fn engine_matches_oracle_at_singular_origin() {
        // R(0) = 0 for these, so every digit goes through a translated
        // origin (possibly over a quadratic extension).
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cases: Vec<(AlgebraicInstance, Vec<u64>)> = vec![
            (f37_shifted(2, &[0, 1, 12]), vec![5, 40]),
            (f37_shifted(5, &[0, 6, 20]), vec![40]),
        ];
        for (inst, ns) in &cases {
            assert!(matches!(lift_instance(inst, 3), Err(Error::H1Violated)));
            for &n in ns {
                let want = inst.oracle_nth_coeff(n).unwrap();
                let out =
                    nth_coeff_recurrence_with_stats(inst, &BigUint::from(n), &mut rng).unwrap();
                assert_eq!(out.value, want, "c-instance, N = {n}");
                assert!(!out.delegated);
                assert!(out.downgrade.is_none());
                assert!(out.shifted_digits > 0);
            }
        }
    }

    #[test]
    fn block_products_scale_with_sqrt_p() {
        // Same instance shape at p = 101 and p = 401, one-digit N: the
        // number of block products is beta - 1 = ceil(sqrt(4p)) - 1.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let out101 =
            nth_coeff_recurrence_with_stats(&catalan(101), &BigUint::from(70u32), &mut rng)
                .unwrap();
        let out401 =
            nth_coeff_recurrence_with_stats(&catalan(401), &BigUint::from(70u32), &mut rng)
                .unwrap();
        assert_eq!(out101.value, catalan(101).oracle_nth_coeff(70).unwrap());
        assert_eq!(out401.value, catalan(401).oracle_nth_coeff(70).unwrap());
        assert_eq!(out101.block_mults, 20);
        assert_eq!(out401.block_mults, 40);
        let ratio = out401.block_mults as f64 / out101.block_mults as f64;
        assert!((1.5..=2.5).contains(&ratio));
    }

    #[test]
    fn small_p_delegates_to_structured_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f5 = f5_instance();
        let out = nth_coeff_recurrence_with_stats(&f5, &BigUint::from(70u32), &mut rng).unwrap();
        assert!(out.delegated);
        assert_eq!(out.block_mults, 0);
        assert_eq!(out.value, f5.field.from_i64(2));
        assert_eq!(out.value, f5.oracle_nth_coeff(70).unwrap());
        let rho1 = rho1_instance();
        let out = nth_coeff_recurrence_with_stats(&rho1, &BigUint::from(9u32), &mut rng).unwrap();
        assert!(out.delegated);
        assert_eq!(out.value, rho1.oracle_nth_coeff(9).unwrap());
    }
}
