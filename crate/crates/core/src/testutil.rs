//! Shared fixtures for unit tests.

use crate::field::FieldCtx;
use crate::poly::{BiPoly, UniPoly};
use crate::ring::Ring;
use crate::series::{eval_bipoly_at_series, AlgebraicInstance};
use rand::Rng;

pub fn poly(field: &FieldCtx, c: &[i64]) -> UniPoly<FieldCtx> {
    UniPoly::from_coeffs(c.iter().map(|&x| field.from_i64(x)).collect(), field)
}

pub fn bipoly(field: &FieldCtx, rows: &[&[i64]]) -> BiPoly<FieldCtx> {
    BiPoly::from_rows(rows.iter().map(|r| poly(field, r)).collect())
}

/// Degree-4 instance over F_5 with h = 4:
/// `E = (t^4 + t + 1) y^4 + y^2 + y - t^4`, root `f = t^4 - t^8 + ...`.
pub fn f5_instance() -> AlgebraicInstance {
    let f5 = FieldCtx::prime_field(5).unwrap();
    let e = bipoly(&f5, &[&[0, 0, 0, 0, -1], &[1], &[1], &[], &[1, 1, 0, 0, 1]]);
    AlgebraicInstance::new(f5.clone(), e, 0, vec![f5.zero()]).unwrap()
}

/// Same curve as `f5_instance` but with the valuation bound over-declared
/// (`rho = 1` even though `E_y(t,f)` is a unit), to exercise slack paths.
pub fn f5_overdeclared() -> AlgebraicInstance {
    let f5 = FieldCtx::prime_field(5).unwrap();
    let e = bipoly(&f5, &[&[0, 0, 0, 0, -1], &[1], &[1], &[], &[1, 1, 0, 0, 1]]);
    AlgebraicInstance::new(f5.clone(), e, 1, vec![f5.zero(); 3]).unwrap()
}

/// `E = y^2 - t^2 - t^3` over F_5: the root `f = t sqrt(1+t)` has
/// `val E_y(t, f) = 1`, a genuinely ramified evaluation point.
pub fn rho1_instance() -> AlgebraicInstance {
    let f5 = FieldCtx::prime_field(5).unwrap();
    let e = bipoly(&f5, &[&[0, 0, -1, -1], &[], &[1]]);
    let init = vec![f5.zero(), f5.one(), f5.from_i64(3)];
    AlgebraicInstance::new(f5.clone(), e, 1, init).unwrap()
}

/// Random state whose series `P(t,f)/E_y(t,f)` is a genuine power series
/// (automatic when `val E_y(t,f) = 0`, rejection sampling otherwise); such
/// states are exactly the ones the digit walk can visit.
pub fn sample_series_state(
    inst: &AlgebraicInstance,
    rng: &mut impl Rng,
    dt_len: usize,
) -> BiPoly<FieldCtx> {
    let ctx = &inst.field;
    let v = inst.val_ey;
    loop {
        let rows: Vec<UniPoly<FieldCtx>> = (0..inst.d)
            .map(|_| {
                UniPoly::from_coeffs((0..dt_len).map(|_| ctx.sample_uniform(rng)).collect(), ctx)
            })
            .collect();
        let state = BiPoly::from_rows(rows);
        if state.is_zero() {
            continue;
        }
        if v == 0 {
            return state;
        }
        let f = inst.hensel_lift(v).unwrap();
        if eval_bipoly_at_series(&state, &f, v, ctx).is_zero(ctx) {
            return state;
        }
    }
}

/// Rational series 1/(1-t) as the root of `(1-t)y - 1`.
pub fn rational_instance() -> AlgebraicInstance {
    let f5 = FieldCtx::prime_field(5).unwrap();
    let e = bipoly(&f5, &[&[-1], &[1, -1]]);
    AlgebraicInstance::new(f5.clone(), e, 0, vec![f5.one()]).unwrap()
}

/// An extension-field instance over F_9 = F_3[x]/(x^2+1):
/// `E = y^2 + y + x*t` (Artin-Schreier-like, separable, f(0) = 0).
pub fn f9_instance() -> AlgebraicInstance {
    let f9 = FieldCtx::extension(3, &[1, 0, 1]).unwrap();
    let x = f9.gen_x();
    let row0 = UniPoly::from_coeffs(vec![f9.zero(), x], &f9);
    let e = BiPoly::from_rows(vec![row0, poly(&f9, &[1]), poly(&f9, &[1])]);
    AlgebraicInstance::new(f9.clone(), e, 0, vec![f9.zero()]).unwrap()
}
