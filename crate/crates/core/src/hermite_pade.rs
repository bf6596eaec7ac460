//! Digit walk driven by truncated linear algebra instead of bivariate
//! polynomial products.
//!
//! A state `Q` (with `deg_y Q < d`, `deg_t Q <= h`) is determined by the
//! initial coefficients of the series `t^v Q(t,f)/E_y(t,f)`, where
//! `v = val E_y(t,f)`.  This engine therefore precomputes the basis family
//! `sigma_j = t^v f^j / E_y(t,f)` once at high precision and realizes each
//! digit step numerically: expand the current combination, extract the
//! digit's arithmetic subsequence with `p`-th roots, and recover the new
//! state by solving a structured (Hermite-Padé-style) linear system whose
//! matrix is factored a single time.
//!
//! The primary system restricts states to `deg_t < h`, which is where the
//! walk lives after its first nonzero digit; states reached while leading
//! zero digits are processed can have `deg_t = h` exactly, so an augmented
//! system with one extra `t^h`-column per `y`-power is factored alongside it
//! and solved when the strict system reports the data inconsistent.  Both
//! systems are rank-checked up front: every factor of a reducible `E` fits
//! inside the closed box `deg_y < d`, `deg_t <= h` (degrees are additive on
//! products), so a defining polynomial whose reducibility would later make a
//! reconstruction ambiguous is rejected at build time instead.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::{rref_with_transform, Mat, Rref};
use crate::poly::{BiPoly, UniPoly};
use crate::ring::Ring;
use crate::series::{AlgebraicInstance, TruncSeries};
use num_bigint::BigUint;

pub struct HpSystem {
    /// Valuation shift `v = val E_y(t, f)`.
    pub v: usize,
    /// `sigma_j = t^v f^j / E_y(t,f)` for `j < d`, at precision `2d(h+1)p + v`.
    pub sigma: Vec<TruncSeries<FieldCtx>>,
    /// `(2d(h+1) + v) x dh` coefficient matrix: row `n`, column `(j, m)`
    /// holds `(sigma_j)_{n-m}` for `m < h`.
    pub h_mat: Mat<FieldElem>,
    rref_strict: Rref<FieldCtx>,
    augmented: (Mat<FieldElem>, Rref<FieldCtx>),
}

fn coeff_at(sigma: &TruncSeries<FieldCtx>, idx: isize, ctx: &FieldCtx) -> FieldElem {
    if idx < 0 {
        ctx.zero()
    } else {
        sigma.coeff(idx as usize, ctx)
    }
}

fn system_matrix(
    sigma: &[TruncSeries<FieldCtx>],
    rows: usize,
    t_cols: usize,
    ctx: &FieldCtx,
) -> Mat<FieldElem> {
    let d = sigma.len();
    Mat::from_fn(rows, d * t_cols, |n, col| {
        let j = col / t_cols;
        let m = col % t_cols;
        coeff_at(&sigma[j], n as isize - m as isize, ctx)
    })
}

/// Build and factor the reconstruction systems for an instance.
///
/// Both systems must have full column rank (`dh` strict, `d(h+1)` augmented).
/// A rank drop means some nonzero `Q` in the box annihilates the basis to
/// precision `2d(h+1) + v`; the resultant of `Q` and `E` has `t`-degree at
/// most `(2d-1)h`, so it vanishes, which forces `E` to be reducible.
pub fn build_hp_system(inst: &AlgebraicInstance) -> Result<HpSystem> {
    let ctx = &inst.field;
    let (d, h, p) = (inst.d, inst.h, ctx.p as usize);
    let sigma_prec = 2 * d * (h + 1) * p + inst.val_ey;
    let (v, sigma) = inst.basis_series(d - 1, sigma_prec)?;
    let rows = 2 * d * (h + 1) + v;
    let h_mat = system_matrix(&sigma, rows, h, ctx);
    let rref_strict = rref_with_transform(&h_mat, ctx);
    if rref_strict.rank < d * h {
        return Err(Error::InstanceNotIrreducible);
    }
    let aug = system_matrix(&sigma, rows, h + 1, ctx);
    let rref_aug = rref_with_transform(&aug, ctx);
    if rref_aug.rank < d * (h + 1) {
        return Err(Error::InstanceNotIrreducible);
    }
    Ok(HpSystem { v, sigma, h_mat, rref_strict, augmented: (aug, rref_aug) })
}

impl HpSystem {
    /// Expand `t^v Q(t,f)/E_y(t,f)` at the full stored precision for a state
    /// with `deg_y < d` and `deg_t <= h`.
    pub fn expand(&self, q: &BiPoly<FieldCtx>, ctx: &FieldCtx) -> TruncSeries<FieldCtx> {
        let prec = self.sigma[0].prec();
        let mut acc = TruncSeries::zero(prec, ctx);
        for (j, row) in q.rows().iter().enumerate() {
            if row.is_zero() {
                continue;
            }
            acc = acc.add(&self.sigma[j].mul_poly(row, ctx), ctx);
        }
        acc
    }

    /// Number of coefficients a reconstruction consumes (one per matrix row).
    pub fn data_len(&self) -> usize {
        self.h_mat.nrows
    }

    /// Digit-`r` data for the next state: the first `data_len()` coefficients
    /// of `t^v Λ_r(g)`, read (with `p`-th roots) out of the expansion of
    /// `t^v g`.
    pub fn section_data(
        &self,
        cur: &TruncSeries<FieldCtx>,
        r: u64,
        ctx: &FieldCtx,
    ) -> Vec<FieldElem> {
        let rows = self.h_mat.nrows;
        let p = ctx.p as usize;
        (0..rows)
            .map(|n| {
                if n < self.v {
                    ctx.zero()
                } else {
                    let src = self.v + p * (n - self.v) + r as usize;
                    ctx.pth_root(&cur.coeff(src, ctx))
                }
            })
            .collect()
    }

    fn solve_strict(&self, c: &[FieldElem], ctx: &FieldCtx) -> Result<Vec<FieldElem>> {
        self.rref_strict.solve(c, ctx)
    }

    /// Recover the unique state matching the given coefficient data,
    /// preferring the strict system and falling back to the augmented one.
    pub fn reconstruct(
        &self,
        c: &[FieldElem],
        inst: &AlgebraicInstance,
    ) -> Result<BiPoly<FieldCtx>> {
        let ctx = &inst.field;
        let (d, h) = (inst.d, inst.h);
        let (coeffs, t_cols) = match self.solve_strict(c, ctx) {
            Ok(a) => (a, h),
            Err(Error::Inconsistent) => (self.augmented.1.solve(c, ctx)?, h + 1),
            Err(e) => return Err(e),
        };
        let rows = (0..d)
            .map(|j| {
                UniPoly::from_coeffs(coeffs[j * t_cols..(j + 1) * t_cols].to_vec(), ctx)
            })
            .collect();
        let q = BiPoly::from_rows(rows);
        debug_assert!({
            let expanded = self.expand(&q, ctx);
            c.iter()
                .enumerate()
                .all(|(n, want)| &expanded.coeff(n, ctx) == want)
        });
        Ok(q)
    }
}

/// Walk outcome with the number of linear-system reconstructions performed
/// (one per digit).
pub struct HpOutcome {
    pub value: FieldElem,
    pub reconstructions: usize,
}

pub fn nth_coeff_hp_with_stats(inst: &AlgebraicInstance, n: &BigUint) -> Result<HpOutcome> {
    use crate::christol::{digits_base_p, represent_y};
    use num_traits::ToPrimitive;
    let ctx = &inst.field;
    if *n <= BigUint::from(2 * inst.rho) {
        let idx = n.to_usize().expect("small index");
        return Ok(HpOutcome { value: inst.init[idx].clone(), reconstructions: 0 });
    }
    let system = build_hp_system(inst)?;
    let digits = digits_base_p(n, ctx.p);
    let mut state = represent_y(inst);
    let mut reconstructions = 0;
    for &r in &digits {
        let cur = system.expand(&state, ctx);
        let c = system.section_data(&cur, r, ctx);
        state = system.reconstruct(&c, inst)?;
        reconstructions += 1;
    }
    let value = inst.eval_state(&state)?;
    Ok(HpOutcome {
        value: ctx.frobenius_iter(&value, digits.len() as u64),
        reconstructions,
    })
}

/// Hermite-Padé engine: the digit walk of `nth_coeff_bivariate`, realized
/// through series expansions and solves against the prefactored system.
pub fn nth_coeff_hp(inst: &AlgebraicInstance, n: &BigUint) -> Result<FieldElem> {
    Ok(nth_coeff_hp_with_stats(inst, n)?.value)
}
