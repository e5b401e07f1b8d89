//! Seeded random generation of matrices, base pairs and substitutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::BasePair;
use crate::field::{FieldCtx, FieldElem};
use crate::matrix::Mat;
use crate::pair::QuadCoeffs;

/// Deterministic generator used everywhere a seed is accepted.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_elem<R: Rng>(rng: &mut R, ctx: FieldCtx) -> FieldElem {
    ctx.elem(rng.gen_range(0..ctx.order()))
}

pub fn random_nonzero<R: Rng>(rng: &mut R, ctx: FieldCtx) -> FieldElem {
    ctx.elem(rng.gen_range(1..ctx.order()))
}

pub fn random_matrix<R: Rng>(rng: &mut R, ctx: FieldCtx, rows: usize, cols: usize) -> Mat {
    let entries = (0..rows * cols).map(|_| rng.gen_range(0..ctx.order())).collect();
    Mat::from_vec(ctx, rows, cols, entries).expect("entry count matches")
}

/// Rejection-samples an invertible matrix.
pub fn random_invertible<R: Rng>(rng: &mut R, ctx: FieldCtx, n: usize) -> Mat {
    loop {
        let m = random_matrix(rng, ctx, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// A random upper unitriangular matrix conjugated by a random invertible one.
pub fn random_unipotent<R: Rng>(rng: &mut R, ctx: FieldCtx, n: usize) -> Mat {
    let mut u = Mat::identity(ctx, n);
    for i in 0..n {
        for j in i + 1..n {
            u.set(i, j, random_elem(rng, ctx));
        }
    }
    let x = random_invertible(rng, ctx, n);
    u.conjugate_by(&x, &x.inverse().expect("invertible")).expect("square")
}

/// A base pair with both members unipotent.
pub fn random_e1_base<R: Rng>(rng: &mut R, ctx: FieldCtx, n: usize) -> BasePair {
    BasePair::new(random_unipotent(rng, ctx, n), random_unipotent(rng, ctx, n)).expect("n >= 1")
}

/// Arbitrary coefficients with `alpha` and `beta` nonzero.
pub fn random_quad<R: Rng>(rng: &mut R, ctx: FieldCtx) -> QuadCoeffs {
    let a = random_nonzero(rng, ctx).value() as u64;
    let [a1, a2, g] = [0; 3].map(|_: u8| random_elem(rng, ctx).value() as u64);
    let b = random_nonzero(rng, ctx).value() as u64;
    let [b1, b2] = [0; 2].map(|_: u8| random_elem(rng, ctx).value() as u64);
    QuadCoeffs::new(ctx, a, a1, a2, g, b, b1, b2).expect("alpha, beta nonzero")
}
