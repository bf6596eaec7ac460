//! Seeded generation of random valid instances, plus the fixed demonstration
//! instances shared by the test suites and the self-test.
//!
//! Random instances are produced by rejection sampling: draw a defining
//! polynomial with the requested degrees, pick a simple root of its `t = 0`
//! fiber as the series start, and keep the result only if it passes full
//! instance validation and the reconstruction-system rank check (which all
//! engines rely on).  Everything is driven by a caller-supplied RNG, so a
//! fixed seed reproduces the same instances.

use crate::christol::build_section_matrices;
use crate::error::{Error, Result};
use crate::factor::{random_irreducible_coeffs, roots_in_field};
use crate::field::FieldCtx;
use crate::hermite_pade::build_hp_system;
use crate::poly::{BiPoly, UniPoly};
use crate::ring::Ring;
use crate::series::AlgebraicInstance;
use rand::Rng;

/// Size parameters for one random instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceParams {
    pub p: u64,
    pub s: usize,
    pub d: usize,
    pub h: usize,
}

/// The small-prime parameter pool used by the randomized cross-engine
/// validation suite.
pub fn draw_small_params(rng: &mut impl Rng) -> InstanceParams {
    let p = [2u64, 3, 5, 7, 13][rng.gen_range(0..5)];
    InstanceParams {
        p,
        s: rng.gen_range(1..=2),
        d: rng.gen_range(1..=4),
        h: rng.gen_range(1..=3),
    }
}

/// A field of order `p^s` with a random modulus when `s > 1`.
pub fn random_field(p: u64, s: usize, rng: &mut impl Rng) -> Result<FieldCtx> {
    if s == 1 {
        FieldCtx::prime_field(p)
    } else {
        let pi = random_irreducible_coeffs(p, s, rng);
        FieldCtx::extension(p, &pi)
    }
}

fn random_poly(ctx: &FieldCtx, deg: usize, rng: &mut impl Rng) -> UniPoly<FieldCtx> {
    UniPoly::from_coeffs((0..=deg).map(|_| ctx.sample_uniform(rng)).collect(), ctx)
}

/// One attempt at an instance with the given degrees over `field`: a random
/// defining polynomial of exact degrees `(d, h)` together with a simple root
/// of its fiber at the origin.  `None` when the draw fails any filter.
fn attempt(field: &FieldCtx, d: usize, h: usize, rng: &mut impl Rng) -> Option<AlgebraicInstance> {
    let ctx = field;
    let mut rows: Vec<UniPoly<FieldCtx>> = (0..=d).map(|_| random_poly(ctx, h, rng)).collect();
    while rows[d].is_zero() {
        rows[d] = random_poly(ctx, h, rng);
    }
    // Make the t-degree exact somewhere.
    let j = rng.gen_range(0..=d);
    let mut top = rows[j].coeffs().to_vec();
    top.resize(h + 1, ctx.zero());
    loop {
        top[h] = ctx.sample_uniform(rng);
        if !ctx.is_zero(&top[h]) {
            break;
        }
    }
    rows[j] = UniPoly::from_coeffs(top, ctx);
    let e = BiPoly::from_rows(rows);
    // A simple root of E(0, y) seeds the series with rho = 0.
    let fiber = e.eval_t(&ctx.zero(), ctx);
    if fiber.deg0() == 0 {
        return None;
    }
    let fiber_d = fiber.derivative(ctx);
    let root = roots_in_field(&fiber, ctx, rng)
        .into_iter()
        .find(|r| !ctx.is_zero(&fiber_d.eval(r, ctx)))?;
    let inst = AlgebraicInstance::new(ctx.clone(), e, 0, vec![root]).ok()?;
    // Keep only instances every engine can process: the reconstruction
    // system must have full rank and a section-matrix modulus must exist.
    build_hp_system(&inst).ok()?;
    build_section_matrices(&inst, rng).ok()?;
    Some(inst)
}

const GEN_RETRIES: usize = 500;

/// A random valid instance with the given parameters (rejection sampling,
/// bounded retries).
pub fn random_instance(params: &InstanceParams, rng: &mut impl Rng) -> Result<AlgebraicInstance> {
    let field = random_field(params.p, params.s, rng)?;
    for _ in 0..GEN_RETRIES {
        if let Some(inst) = attempt(&field, params.d, params.h, rng) {
            return Ok(inst);
        }
    }
    Err(Error::InvariantViolation(format!(
        "no valid instance found for p={} s={} d={} h={} after {GEN_RETRIES} draws",
        params.p, params.s, params.d, params.h
    )))
}

fn fixed_instance(
    p: u64,
    rows: &[&[i64]],
    rho: usize,
    init: &[i64],
) -> AlgebraicInstance {
    let f = FieldCtx::prime_field(p).expect("prime");
    let e = BiPoly::from_rows(
        rows.iter()
            .map(|r| UniPoly::from_coeffs(r.iter().map(|&c| f.from_i64(c)).collect(), &f))
            .collect(),
    );
    let init = init.iter().map(|&c| f.from_i64(c)).collect();
    AlgebraicInstance::new(f, e, rho, init).expect("fixed instance")
}

/// `(t^4 + t + 1) y^4 + y^2 + y - t^4` over `F_5`, series root with
/// `f(0) = 0`: the standard quartic demonstration instance (d = h = 4).
pub fn quartic_f5() -> AlgebraicInstance {
    fixed_instance(
        5,
        &[&[0, 0, 0, 0, -1], &[1], &[1], &[], &[1, 1, 0, 0, 1]],
        0,
        &[0],
    )
}

/// `(1 - t) y - 1` over `F_p`: the geometric series, the smallest rational
/// instance (d = 1).
pub fn rational_geometric(p: u64) -> AlgebraicInstance {
    fixed_instance(p, &[&[-1], &[1, -1]], 0, &[1])
}

/// `(1 - t) y - x` over `F_9 = F_3[x]/(x^2+1)`: a rational instance with a
/// proper extension as coefficient field.
pub fn f9_line() -> AlgebraicInstance {
    let f9 = FieldCtx::extension(3, &[1, 0, 1]).expect("irreducible modulus");
    let x = f9.elem_from_coords(&[0, 1]).expect("generator");
    let row0 = UniPoly::from_coeffs(vec![f9.neg(&x)], &f9);
    let row1 = UniPoly::from_coeffs(vec![f9.one(), f9.from_i64(-1)], &f9);
    let e = BiPoly::from_rows(vec![row0, row1]);
    AlgebraicInstance::new(f9.clone(), e, 0, vec![x]).expect("fixed instance")
}

/// `y^2 - t^2 - t^3` over `F_5`: ramified at the origin (`E_y(t, f)` has
/// valuation 1), so a nontrivial initial segment is required (rho = 1).
pub fn ramified_quadratic_f5() -> AlgebraicInstance {
    fixed_instance(5, &[&[0, 0, -1, -1], &[], &[1]], 1, &[0, 1, 3])
}

/// `y^2 - y - t` over `F_p`: central binomial coefficients, regular at the
/// origin for every odd `p`; the smallest instance exercising second-order
/// recurrences.
pub fn central_quadratic(p: u64) -> AlgebraicInstance {
    fixed_instance(p, &[&[0, -1], &[-1], &[1]], 0, &[0])
}

/// `(1 + t) y^2 + t y - c t^2` over `F_37`: the resultant is divisible by
/// `t^2`, so the recurrence engine must translate the origin on every digit.
/// Valid for `c` with `1 + 4c` a nonzero square mod 37 (the two series
/// branches then stay in `F_37`); shipped with `c = 2` and `c = 5`.
pub fn singular_origin_f37(c: u64) -> AlgebraicInstance {
    let init: &[i64] = match c {
        2 => &[0, 1, 12],
        5 => &[0, 6, 20],
        _ => panic!("unsupported branch data"),
    };
    fixed_instance(37, &[&[0, 0, -(c as i64)], &[0, 1], &[1, 1]], 1, init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christol::nth_coeff_bivariate;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_is_deterministic() {
        let params = InstanceParams { p: 5, s: 2, d: 3, h: 2 };
        let a = random_instance(&params, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_instance(&params, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.e, b.e);
        assert_eq!(a.init, b.init);
        let c = random_instance(&params, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!(a.e != c.e || a.init != c.init);
    }

    #[test]
    fn generated_instances_have_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let params = draw_small_params(&mut rng);
            let inst = random_instance(&params, &mut rng).unwrap();
            assert_eq!(inst.field.p, params.p);
            assert_eq!(inst.field.s, params.s);
            assert_eq!(inst.d, params.d);
            assert_eq!(inst.h, params.h);
            assert_eq!(inst.rho, 0);
            assert_eq!(inst.val_ey, 0);
        }
    }

    #[test]
    fn generated_instances_compute() {
        // Light smoke check; the full cross-engine validation lives in the
        // acceptance suite.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let params = draw_small_params(&mut rng);
            let inst = random_instance(&params, &mut rng).unwrap();
            for n in [0u64, 7, 31] {
                let want = inst.oracle_nth_coeff(n).unwrap();
                let got = nth_coeff_bivariate(&inst, &BigUint::from(n), false).unwrap();
                assert_eq!(got, want, "p={} n={n}", params.p);
            }
        }
    }

    #[test]
    fn fixed_instances_validate() {
        assert_eq!(quartic_f5().d, 4);
        assert_eq!(quartic_f5().h, 4);
        assert_eq!(rational_geometric(5).d, 1);
        assert_eq!(f9_line().field.s, 2);
        assert_eq!(ramified_quadratic_f5().val_ey, 1);
        assert_eq!(central_quadratic(101).d, 2);
        assert_eq!(singular_origin_f37(2).rho, 1);
        assert_eq!(singular_origin_f37(5).rho, 1);
    }
}
