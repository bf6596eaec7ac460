//! Truncated power series and algebraic-series instances.
//!
//! `TruncSeries` is a dense truncated series; its length *is* its guaranteed
//! precision.  `AlgebraicInstance` bundles a defining bivariate polynomial
//! `E(t, y)` over `F_{p^s}` with enough initial coefficients to single out a
//! unique power series root `f`, provides Newton (Hensel) lifting of `f` to
//! any precision, and derived data shared by the coefficient engines.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::resultant_y;
use crate::poly::{BiPoly, UniPoly};
use crate::ring::Ring;
use std::sync::Mutex;

#[derive(Clone)]
pub struct TruncSeries<R: Ring> {
    c: Vec<R::Elem>,
}

impl<R: Ring> PartialEq for TruncSeries<R> {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c
    }
}

impl<R: Ring> std::fmt::Debug for TruncSeries<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("TruncSeries").field(&self.c).finish()
    }
}

impl<R: Ring> TruncSeries<R> {
    pub fn zero(prec: usize, ring: &R) -> Self {
        TruncSeries { c: vec![ring.zero(); prec] }
    }

    pub fn one(prec: usize, ring: &R) -> Self {
        let mut s = Self::zero(prec, ring);
        if prec > 0 {
            s.c[0] = ring.one();
        }
        s
    }

    /// Precision equals the length of the coefficient vector.
    pub fn from_coeffs(c: Vec<R::Elem>) -> Self {
        TruncSeries { c }
    }

    pub fn from_poly(p: &UniPoly<R>, prec: usize, ring: &R) -> Self {
        let mut c: Vec<R::Elem> = p.coeffs().iter().take(prec).cloned().collect();
        c.resize(prec, ring.zero());
        TruncSeries { c }
    }

    pub fn prec(&self) -> usize {
        self.c.len()
    }

    pub fn coeff(&self, i: usize, ring: &R) -> R::Elem {
        debug_assert!(i < self.c.len(), "coefficient index beyond guaranteed precision");
        self.c.get(i).cloned().unwrap_or_else(|| ring.zero())
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.c
    }

    pub fn truncate(&self, prec: usize) -> Self {
        assert!(prec <= self.c.len(), "cannot extend precision by truncation");
        TruncSeries { c: self.c[..prec].to_vec() }
    }

    pub fn is_zero(&self, ring: &R) -> bool {
        self.c.iter().all(|a| ring.is_zero(a))
    }

    /// Valuation, or `None` if zero to the stored precision.
    pub fn valuation(&self, ring: &R) -> Option<usize> {
        self.c.iter().position(|a| !ring.is_zero(a))
    }

    pub fn add(&self, other: &Self, ring: &R) -> Self {
        let n = self.prec().min(other.prec());
        TruncSeries {
            c: (0..n).map(|i| ring.add(&self.c[i], &other.c[i])).collect(),
        }
    }

    pub fn sub(&self, other: &Self, ring: &R) -> Self {
        let n = self.prec().min(other.prec());
        TruncSeries {
            c: (0..n).map(|i| ring.sub(&self.c[i], &other.c[i])).collect(),
        }
    }

    pub fn neg(&self, ring: &R) -> Self {
        TruncSeries { c: self.c.iter().map(|a| ring.neg(a)).collect() }
    }

    pub fn scale(&self, a: &R::Elem, ring: &R) -> Self {
        TruncSeries { c: self.c.iter().map(|x| ring.mul(x, a)).collect() }
    }

    pub fn mul(&self, other: &Self, ring: &R) -> Self {
        let n = self.prec().min(other.prec());
        let pa = UniPoly::from_coeffs(self.c[..n].to_vec(), ring);
        let pb = UniPoly::from_coeffs(other.c[..n].to_vec(), ring);
        let prod = pa.mul_trunc(&pb, n, ring);
        Self::from_poly(&prod, n, ring)
    }

    /// Multiply by a polynomial, keeping this series' precision.
    pub fn mul_poly(&self, p: &UniPoly<R>, ring: &R) -> Self {
        let pa = UniPoly::from_coeffs(self.c.clone(), ring);
        let prod = pa.mul_trunc(p, self.prec(), ring);
        Self::from_poly(&prod, self.prec(), ring)
    }

    /// Multiply by `t^k` (gains `k` known coefficients).
    pub fn shift_up(&self, k: usize, ring: &R) -> Self {
        let mut c = vec![ring.zero(); k];
        c.extend(self.c.iter().cloned());
        TruncSeries { c }
    }

    /// Divide by `t^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize, ring: &R) -> Result<Self> {
        if self.c.len() < k || self.c[..k].iter().any(|a| !ring.is_zero(a)) {
            return Err(Error::NotASeries);
        }
        Ok(TruncSeries { c: self.c[k..].to_vec() })
    }

    pub fn pow(&self, e: usize, ring: &R) -> Self {
        let mut acc = Self::one(self.prec(), ring);
        for _ in 0..e {
            acc = acc.mul(self, ring);
        }
        acc
    }

    /// Newton inverse; the constant term must be a unit.
    pub fn inverse(&self, ring: &R) -> Result<Self> {
        if self.prec() == 0 {
            return Ok(self.clone());
        }
        let c0_inv = ring.invert(&self.c[0]).ok_or(Error::NotAUnit)?;
        let mut x = TruncSeries { c: vec![c0_inv] };
        while x.prec() < self.prec() {
            let target = (2 * x.prec()).min(self.prec());
            let a = self.truncate(target);
            // x <- x(2 - a x), computed at the target precision
            let mut xt = x.clone();
            xt.c.resize(target, ring.zero());
            let ax = a.mul(&xt, ring);
            let two_minus = Self::one(target, ring).scale(&ring.from_i64(2), ring).sub(&ax, ring);
            x = xt.mul(&two_minus, ring);
        }
        Ok(x)
    }

    /// `self / other` with valuation handling: the divisor's valuation must
    /// not exceed the dividend's.  The result loses `val(other)` digits of
    /// precision.
    pub fn div(&self, other: &Self, ring: &R) -> Result<Self> {
        let n = self.prec().min(other.prec());
        let num = self.truncate(n);
        let den = other.truncate(n);
        let w = match den.valuation(ring) {
            None => return Err(Error::ZeroDivisor),
            Some(w) => w,
        };
        if let Some(vn) = num.valuation(ring) {
            if vn < w {
                return Err(Error::NotASeries);
            }
        }
        let num = num.shift_down(w.min(num.prec()), ring).unwrap_or(TruncSeries { c: vec![] });
        let den = den.shift_down(w, ring).expect("valuation computed above");
        let inv = den.inverse(ring)?;
        Ok(num.mul(&inv, ring))
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R::Elem) -> S::Elem) -> TruncSeries<S> {
        TruncSeries { c: self.c.iter().map(f).collect() }
    }
}

impl TruncSeries<FieldCtx> {
    /// Section operator at digit `r`: `sum g_{pn+r}^(1/p) t^n`.
    pub fn local_section(&self, r: u64, ctx: &FieldCtx) -> Result<Self> {
        if r >= ctx.p {
            return Err(Error::DigitOutOfRange { digit: r, p: ctx.p });
        }
        let p = ctx.p as usize;
        let r = r as usize;
        let mut c = Vec::new();
        let mut idx = r;
        while idx < self.prec() {
            c.push(ctx.pth_root(&self.c[idx]));
            idx += p;
        }
        Ok(TruncSeries { c })
    }

    /// Frobenius twist `Phi`: coefficients to the `p`-th power, `t -> t^p`.
    pub fn frobenius_interleave(&self, ctx: &FieldCtx) -> Self {
        let p = ctx.p as usize;
        if self.prec() == 0 {
            return self.clone();
        }
        let mut c = vec![ctx.zero(); (self.prec() - 1) * p + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[i * p] = ctx.frobenius(a);
        }
        TruncSeries { c }
    }
}

/// Evaluate a bivariate polynomial at `y = g` for a truncated series `g`,
/// by Horner's rule in `y`.
pub fn eval_bipoly_at_series<R: Ring>(
    e: &BiPoly<R>,
    g: &TruncSeries<R>,
    prec: usize,
    ring: &R,
) -> TruncSeries<R> {
    let mut acc = TruncSeries::zero(prec, ring);
    for row in e.rows().iter().rev() {
        acc = acc.mul(&g.truncate(prec.min(g.prec())), ring);
        acc = acc.add(&TruncSeries::from_poly(row, prec, ring), ring);
    }
    acc
}

/// An algebraic power series, described by its defining polynomial and an
/// initial segment singling out one root.
pub struct AlgebraicInstance {
    pub field: FieldCtx,
    pub e: BiPoly<FieldCtx>,
    /// Degree in `y`.
    pub d: usize,
    /// Height: degree in `t` (at least 1).
    pub h: usize,
    /// Declared bound on the valuation of `E_y(t, f)`.
    pub rho: usize,
    /// The first `2*rho + 1` coefficients of `f`.
    pub init: Vec<FieldElem>,
    /// Exact valuation of `E_y(t, f)` (at most `rho`).
    pub val_ey: usize,
    lead: UniPoly<FieldCtx>,
    res: UniPoly<FieldCtx>,
    cache: Mutex<InstanceCache>,
}

#[derive(Default)]
struct InstanceCache {
    f: Option<TruncSeries<FieldCtx>>,
    e_pm1: Option<std::sync::Arc<BiPoly<FieldCtx>>>,
}

impl AlgebraicInstance {
    pub fn new(
        field: FieldCtx,
        e: BiPoly<FieldCtx>,
        rho: usize,
        init: Vec<FieldElem>,
    ) -> Result<Self> {
        let d = match e.deg_y() {
            Some(d) if d >= 1 => d,
            _ => {
                return Err(Error::InvariantViolation(
                    "defining polynomial must have positive degree in y".into(),
                ))
            }
        };
        let h = e.deg_t0().max(1);
        let lead = e.row(d);
        let ey = e.deriv_y(&field);
        if ey.is_zero() {
            return Err(Error::InvariantViolation(
                "defining polynomial is not separable (E_y = 0)".into(),
            ));
        }
        let res = resultant_y(&e, &ey, &field);
        if res.is_zero() {
            return Err(Error::InvariantViolation(
                "defining polynomial is not separable (Res(E, E_y) = 0)".into(),
            ));
        }
        if rho > (2 * d - 1) * h {
            return Err(Error::InvariantViolation(format!(
                "rho = {rho} exceeds the resultant degree bound {}",
                (2 * d - 1) * h
            )));
        }
        if init.len() != 2 * rho + 1 {
            return Err(Error::BadInitialSegment);
        }
        // E(t, fbar) = 0 mod t^(2 rho + 1) and E_y(t, fbar) != 0 mod t^(rho + 1)
        let fbar = TruncSeries::from_coeffs(init.clone());
        let at = eval_bipoly_at_series(&e, &fbar, 2 * rho + 1, &field);
        if !at.is_zero(&field) {
            return Err(Error::BadInitialSegment);
        }
        let ey_at = eval_bipoly_at_series(&ey, &fbar, rho + 1, &field);
        let val_ey = match ey_at.valuation(&field) {
            Some(v) => v,
            None => return Err(Error::BadInitialSegment),
        };
        let inst = AlgebraicInstance {
            field,
            e,
            d,
            h,
            rho,
            init,
            val_ey,
            lead,
            res,
            cache: Mutex::new(InstanceCache::default()),
        };
        // the initial segment must be a genuine truncation of the root
        let f = inst.hensel_lift(2 * rho + 2)?;
        for (i, want) in inst.init.iter().enumerate() {
            if &f.coeff(i, &inst.field) != want {
                return Err(Error::BadInitialSegment);
            }
        }
        Ok(inst)
    }

    /// Leading coefficient `L = e_d(t)`.
    pub fn lead(&self) -> &UniPoly<FieldCtx> {
        &self.lead
    }

    /// Resultant `R(t) = Res_y(E, E_y)`.
    pub fn res(&self) -> &UniPoly<FieldCtx> {
        &self.res
    }

    pub fn e_y(&self) -> BiPoly<FieldCtx> {
        self.e.deriv_y(&self.field)
    }

    /// `E^(p-1)`, computed as the Frobenius twist of `E` divided exactly by
    /// `E` (cached).
    pub fn e_pow_pm1(&self) -> std::sync::Arc<BiPoly<FieldCtx>> {
        let mut cache = self.cache.lock().unwrap();
        if let Some(ref v) = cache.e_pm1 {
            return v.clone();
        }
        let v = std::sync::Arc::new(bipoly_pow_pm1(&self.e, &self.field));
        cache.e_pm1 = Some(v.clone());
        v
    }

    /// Newton-lift the root to the requested precision.  The result is
    /// verified to satisfy `E(t, f) = 0 mod t^prec` exactly.
    pub fn hensel_lift(&self, prec: usize) -> Result<TruncSeries<FieldCtx>> {
        let mut cache = self.cache.lock().unwrap();
        if let Some(ref f) = cache.f {
            if f.prec() >= prec {
                return Ok(f.truncate(prec));
            }
        }
        let field = &self.field;
        let rho = self.rho;
        let ey = self.e.deriv_y(field);
        let (mut x, mut known) = match cache.f {
            Some(ref f) => (f.clone(), f.prec()),
            None => (TruncSeries::from_coeffs(self.init.clone()), rho + 1),
        };
        while known < prec {
            let next = prec.min((2 * known).saturating_sub(rho)).max(known + 1);
            let work = next + rho;
            let mut xe = x.clone();
            xe.c.resize(work, field.zero());
            let num = eval_bipoly_at_series(&self.e, &xe, work, field);
            if num.is_zero(field) {
                x = xe.truncate(next);
                known = next;
                continue;
            }
            let den = eval_bipoly_at_series(&ey, &xe, work, field);
            let delta = num.div(&den, field)?;
            let mut delta_c = delta.c;
            delta_c.resize(next, field.zero());
            let mut nx = xe.truncate(next);
            for i in 0..next {
                nx.c[i] = field.sub(&nx.c[i], &delta_c[i]);
            }
            x = nx;
            known = next;
        }
        let x = x.truncate(prec);
        // exact verification of the lift
        let check = eval_bipoly_at_series(&self.e, &x, prec, field);
        if !check.is_zero(field) {
            return Err(Error::BadInitialSegment);
        }
        if cache.f.as_ref().map(|f| f.prec()).unwrap_or(0) < prec {
            cache.f = Some(x.clone());
        }
        Ok(x)
    }

    /// The shifted basis family `sigma_j = t^v f^j / E_y(t, f)` for
    /// `0 <= j <= j_max`, each a power series given at the requested
    /// precision, together with the shift `v = val(E_y(t, f))`.  (For
    /// `v = 0` these are exactly the series `f^j / E_y(t, f)`.)
    pub fn basis_series(
        &self,
        j_max: usize,
        prec: usize,
    ) -> Result<(usize, Vec<TruncSeries<FieldCtx>>)> {
        let field = &self.field;
        let v = self.val_ey;
        let work = prec + self.rho;
        let f = self.hensel_lift(work)?;
        let ey_at = eval_bipoly_at_series(&self.e.deriv_y(field), &f, work, field);
        debug_assert_eq!(ey_at.valuation(field), Some(v));
        let unit = ey_at.shift_down(v, field)?;
        let unit_inv = unit.inverse(field)?; // precision work - v >= prec
        let mut out = Vec::with_capacity(j_max + 1);
        let mut fj = TruncSeries::one(prec, field);
        for j in 0..=j_max {
            if j > 0 {
                fj = fj.mul(&f.truncate(prec), field);
            }
            out.push(fj.mul(&unit_inv.truncate(prec), field));
        }
        Ok((v, out))
    }

    /// Direct series expansion: the coefficient of `t^N` in `f`.
    pub fn oracle_nth_coeff(&self, n: u64) -> Result<FieldElem> {
        let prec = (n as usize) + 1;
        let f = self.hensel_lift(prec)?;
        Ok(f.coeff(n as usize, &self.field))
    }

    /// Evaluate a state polynomial: the constant term of
    /// `Q(t, f)/E_y(t, f)`, which needs `f` only modulo `t^(v+1)`.
    pub fn eval_state(&self, q: &BiPoly<FieldCtx>) -> Result<FieldElem> {
        let field = &self.field;
        let v = self.val_ey;
        let f = self.hensel_lift(v + 1)?;
        let num = eval_bipoly_at_series(q, &f, v + 1, field);
        let den = eval_bipoly_at_series(&self.e.deriv_y(field), &f, v + 1, field);
        let dv = den.coeff(v, field);
        let inv = field.invert(&dv).ok_or(Error::NotAUnit)?;
        Ok(field.mul(&num.coeff(v, field), &inv))
    }
}

/// `E^(p-1)` over a field of characteristic `p`, via `E^p / E` with the
/// Frobenius power computed coefficient-wise.
pub fn bipoly_pow_pm1(e: &BiPoly<FieldCtx>, field: &FieldCtx) -> BiPoly<FieldCtx> {
    let p = field.p as usize;
    let mut rows = Vec::with_capacity(e.deg_y0() * p + 1);
    for (j, row) in e.rows().iter().enumerate() {
        while rows.len() < j * p {
            rows.push(UniPoly::zero());
        }
        let mut c = vec![field.zero(); row.deg0() * p + 1];
        for (i, a) in row.coeffs().iter().enumerate() {
            if !field.is_zero(a) {
                c[i * p] = field.frobenius(a);
            }
        }
        rows.push(UniPoly::from_coeffs(c, field));
    }
    let ep = BiPoly::from_rows(rows);
    ep.exact_div(e, field).expect("E^p is exactly divisible by E")
}
