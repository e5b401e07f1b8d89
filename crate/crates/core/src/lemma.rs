//! Normalisation of a quadratically substituted constructed pair.
//!
//! For `q = (alpha, alpha1, alpha2, gamma, beta, beta1, beta2)` the pair
//! `(f(A0, B0), g(A0, B0))` is conjugated first by `D = diag(U, I, I)` (large
//! stripes `6n, n, 6n`) and then by
//! `Z = diag(beta I, I, I, beta I, beta I, I, I)`. The result has first member
//! `A0` again and a second member whose specified blocks are
//!
//! | block | value |
//! |-------|-------|
//! | (1,3) | `I` |
//! | (2,5) | `beta^2/alpha I` |
//! | (3,6) | `beta/alpha T` |
//! | (4,6) | `W` |
//! | (5,7) | `I` |
//!
//! with blocks (1,5), (1,6), (1,7), (2,6), (2,7), (3,7) unconstrained and
//! every other block zero.

use serde::Serialize;
use thiserror::Error;

use crate::construction::{build_p0, build_t, build_w, p0_layout, BasePair, ConstructionError};
use crate::field::{FieldCtx, FieldElem};
use crate::matrix::{assemble_blocks, extract_block, BlockLayout, BlockMap, Mat, MatError};
use crate::pair::{eval_poly_pair, quad_to_polys, MatPair, PairError, QuadCoeffs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaError {
    #[error("polynomial evaluation and block assembly disagree")]
    PathsDisagree,
    #[error("coefficient {0} must be nonzero")]
    ZeroCoefficient(&'static str),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// Blocks of the normalised second member left unconstrained.
pub const FREE_BLOCKS: [(usize, usize); 6] = [(1, 5), (1, 6), (1, 7), (2, 6), (2, 7), (3, 7)];

fn ratio(num: FieldElem, den: FieldElem) -> Result<FieldElem, LemmaError> {
    Ok(num.try_div(den).map_err(MatError::from)?)
}

/// `(A0f, B0g)` assembled block by block from the coefficients.
pub fn assemble_a0f_b0g(base: &BasePair, q: &QuadCoeffs) -> Result<MatPair, LemmaError> {
    q.validate()?;
    let (ctx, n) = (base.ctx(), base.size());
    let layout = p0_layout(n);
    let id = Mat::identity(ctx, 2 * n);
    let t = build_t(base);
    let w = build_w(ctx, n)?;
    let s = |c: FieldElem, m: &Mat| m.scale(c);

    let mut a: BlockMap = BlockMap::new();
    a.insert((1, 5), s(q.alpha(), &id));
    a.insert((1, 6), s(q.alpha1(), &t));
    a.insert((1, 7), s(q.alpha2(), &id));
    a.insert((2, 6), s(q.alpha(), &id));
    a.insert((2, 7), s(q.alpha1(), &id));
    a.insert((3, 7), s(q.alpha(), &id));

    let mut b: BlockMap = BlockMap::new();
    b.insert((1, 3), s(q.beta(), &id));
    b.insert((1, 5), s(q.gamma(), &id));
    b.insert((1, 6), s(q.beta1(), &t));
    b.insert((1, 7), s(q.beta2(), &id));
    b.insert((2, 5), s(q.beta(), &id));
    b.insert((2, 6), s(q.gamma(), &id));
    b.insert((2, 7), s(q.beta1(), &id));
    b.insert((3, 6), s(q.beta(), &t));
    b.insert((3, 7), s(q.gamma(), &id));
    b.insert((4, 6), s(q.beta(), &w));
    b.insert((5, 7), s(q.beta(), &id));

    Ok(MatPair::new(
        assemble_blocks(ctx, &layout, &a)?,
        assemble_blocks(ctx, &layout, &b)?,
    )?)
}

/// `(f(A0, B0), g(A0, B0))` by polynomial evaluation.
pub fn evaluate_a0f_b0g(base: &BasePair, q: &QuadCoeffs) -> Result<MatPair, LemmaError> {
    let p0 = build_p0(base)?;
    let (f, g) = quad_to_polys(q)?;
    Ok(MatPair::new(
        eval_poly_pair(&f, &p0.pair)?,
        eval_poly_pair(&g, &p0.pair)?,
    )?)
}

/// The substituted pair, computed along both routes; they must agree.
pub fn build_a0f_b0g(base: &BasePair, q: &QuadCoeffs) -> Result<MatPair, LemmaError> {
    let assembled = assemble_a0f_b0g(base, q)?;
    if assembled != evaluate_a0f_b0g(base, q)? {
        return Err(LemmaError::PathsDisagree);
    }
    Ok(assembled)
}

/// `U = [[alpha I, alpha1 T, alpha2 I], [0, alpha I, alpha1 I], [0, 0, alpha I]]`.
pub fn build_u(q: &QuadCoeffs, t: &Mat) -> Result<Mat, LemmaError> {
    if q.alpha == 0 {
        return Err(LemmaError::ZeroCoefficient("alpha"));
    }
    let ctx = t.ctx();
    let d = t.rows();
    let id = Mat::identity(ctx, d);
    let mut blocks = BlockMap::new();
    blocks.insert((1, 1), id.scale(q.alpha()));
    blocks.insert((1, 2), t.scale(q.alpha1()));
    blocks.insert((1, 3), id.scale(q.alpha2()));
    blocks.insert((2, 2), id.scale(q.alpha()));
    blocks.insert((2, 3), id.scale(q.alpha1()));
    blocks.insert((3, 3), id.scale(q.alpha()));
    Ok(assemble_blocks(ctx, &BlockLayout::square(vec![d; 3]), &blocks)?)
}

/// Closed-form inverse of [`build_u`]:
///
/// ```text
/// [[ 1/a I, -a1/a^2 T, a1^2/a^3 T - a2/a^2 I ],
///  [ 0,      1/a I,    -a1/a^2 I            ],
///  [ 0,      0,         1/a I               ]]
/// ```
pub fn build_u_inv(q: &QuadCoeffs, t: &Mat) -> Result<Mat, LemmaError> {
    if q.alpha == 0 {
        return Err(LemmaError::ZeroCoefficient("alpha"));
    }
    let ctx = t.ctx();
    let d = t.rows();
    let id = Mat::identity(ctx, d);
    let (a, a1, a2) = (q.alpha(), q.alpha1(), q.alpha2());
    let inv_a = ratio(ctx.one(), a)?;
    let a_sq = a * a;
    let c12 = -ratio(a1, a_sq)?;
    let corner = &t.scale(ratio(a1 * a1, a_sq * a)?) - &id.scale(ratio(a2, a_sq)?);
    let mut blocks = BlockMap::new();
    blocks.insert((1, 1), id.scale(inv_a));
    blocks.insert((1, 2), t.scale(c12));
    blocks.insert((1, 3), corner);
    blocks.insert((2, 2), id.scale(inv_a));
    blocks.insert((2, 3), id.scale(c12));
    blocks.insert((3, 3), id.scale(inv_a));
    Ok(assemble_blocks(ctx, &BlockLayout::square(vec![d; 3]), &blocks)?)
}

/// `D = diag(U, I_n, I_6n)`.
pub fn build_d(q: &QuadCoeffs, t: &Mat, n: usize) -> Result<Mat, LemmaError> {
    let ctx = t.ctx();
    Ok(Mat::block_diag(ctx, &[build_u(q, t)?, Mat::identity(ctx, 7 * n)]))
}

/// `D^{-1}` from the closed-form `U^{-1}`.
pub fn build_d_inv(q: &QuadCoeffs, t: &Mat, n: usize) -> Result<Mat, LemmaError> {
    let ctx = t.ctx();
    Ok(Mat::block_diag(ctx, &[build_u_inv(q, t)?, Mat::identity(ctx, 7 * n)]))
}

fn z_scalars(ctx: FieldCtx, beta: FieldElem) -> [FieldElem; 7] {
    let one = ctx.one();
    [beta, one, one, beta, beta, one, one]
}

/// `Z = diag(beta I, I, I, beta I, beta I, I, I)` on the seven stripes.
pub fn build_z(beta: FieldElem, layout: &BlockLayout) -> Result<Mat, LemmaError> {
    if beta.is_zero() {
        return Err(LemmaError::ZeroCoefficient("beta"));
    }
    let ctx = beta.ctx();
    let blocks: Vec<Mat> = z_scalars(ctx, beta)
        .iter()
        .zip(&layout.row_stripes)
        .map(|(&c, &size)| Mat::scalar(ctx, size, c))
        .collect();
    Ok(Mat::block_diag(ctx, &blocks))
}

fn build_z_inv(beta: FieldElem, layout: &BlockLayout) -> Result<Mat, LemmaError> {
    build_z(beta.inv().map_err(MatError::from)?, layout)
}

/// `C = D Z` and `C^{-1}`: conjugating by `C` normalises the substituted pair.
pub fn normaliser(base: &BasePair, q: &QuadCoeffs) -> Result<(Mat, Mat), LemmaError> {
    let n = base.size();
    let layout = p0_layout(n);
    let t = build_t(base);
    let c = &build_d(q, &t, n)? * &build_z(q.beta(), &layout)?;
    let c_inv = &build_z_inv(q.beta(), &layout)? * &build_d_inv(q, &t, n)?;
    Ok((c, c_inv))
}

/// One structural expectation on a block and whether it held.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockCheck {
    pub stage: &'static str,
    pub block: (usize, usize),
    pub expectation: &'static str,
    pub holds: bool,
}

/// Every intermediate of the chain.
#[derive(Debug, Clone)]
pub struct Lemma1Trace {
    pub a0f: Mat,
    pub b0g: Mat,
    pub u: Mat,
    pub u_inv: Mat,
    pub d: Mat,
    pub z: Mat,
    /// `(D^{-1} A0f D, D^{-1} B0g D)`.
    pub after_d: MatPair,
    /// `(Z^{-1} D^{-1} A0f D Z, Z^{-1} D^{-1} B0g D Z)`.
    pub normalised: MatPair,
    pub checks: Vec<BlockCheck>,
}

impl Lemma1Trace {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BlockCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Expected value of a specified block of the second member.
struct Expected {
    block: (usize, usize),
    value: Mat,
    label: &'static str,
}

fn check_b_pattern(
    stage: &'static str,
    b: &Mat,
    layout: &BlockLayout,
    expected: &[Expected],
    checks: &mut Vec<BlockCheck>,
) -> Result<(), LemmaError> {
    for i in 1..=7 {
        for j in 1..=7 {
            if FREE_BLOCKS.contains(&(i, j)) {
                continue;
            }
            let got = extract_block(b, layout, i, j)?;
            match expected.iter().find(|e| e.block == (i, j)) {
                Some(e) => checks.push(BlockCheck {
                    stage,
                    block: (i, j),
                    expectation: e.label,
                    holds: got == e.value,
                }),
                None => checks.push(BlockCheck {
                    stage,
                    block: (i, j),
                    expectation: "zero",
                    holds: got.is_zero(),
                }),
            }
        }
    }
    Ok(())
}

/// Runs the chain `D` then `Z` on the substituted pair and checks every
/// specified block at both stages.
pub fn verify_lemma1(base: &BasePair, q: &QuadCoeffs) -> Result<Lemma1Trace, LemmaError> {
    q.validate()?;
    let (ctx, n) = (base.ctx(), base.size());
    let layout = p0_layout(n);
    let sub = build_a0f_b0g(base, q)?;
    let a0 = build_p0(base)?.pair.a().clone();
    let t = build_t(base);
    let w = build_w(ctx, n)?;
    let id2 = Mat::identity(ctx, 2 * n);

    let u = build_u(q, &t)?;
    let u_inv = build_u_inv(q, &t)?;
    let d = build_d(q, &t, n)?;
    let d_inv = build_d_inv(q, &t, n)?;
    let z = build_z(q.beta(), &layout)?;
    let z_inv = build_z_inv(q.beta(), &layout)?;

    let mut checks = Vec::new();
    let uu = &u * &u_inv;
    checks.push(BlockCheck {
        stage: "U",
        block: (0, 0),
        expectation: "U U^-1 = I",
        holds: uu.is_identity(),
    });
    checks.push(BlockCheck {
        stage: "U",
        block: (0, 0),
        expectation: "U^-1 U = I",
        holds: (&u_inv * &u).is_identity(),
    });

    let after_d = MatPair::new(sub.a().conjugate_by(&d, &d_inv)?, sub.b().conjugate_by(&d, &d_inv)?)?;
    checks.push(BlockCheck {
        stage: "D",
        block: (0, 0),
        expectation: "first member = A0",
        holds: *after_d.a() == a0,
    });
    let (alpha, beta) = (q.alpha(), q.beta());
    let b_over_a = ratio(beta, alpha)?;
    check_b_pattern(
        "D",
        after_d.b(),
        &layout,
        &[
            Expected {
                block: (1, 3),
                value: id2.scale(beta),
                label: "beta I",
            },
            Expected {
                block: (2, 5),
                value: id2.scale(b_over_a),
                label: "beta/alpha I",
            },
            Expected {
                block: (3, 6),
                value: t.scale(b_over_a),
                label: "beta/alpha T",
            },
            Expected {
                block: (4, 6),
                value: w.scale(beta),
                label: "beta W",
            },
            Expected {
                block: (5, 7),
                value: id2.scale(beta),
                label: "beta I",
            },
        ],
        &mut checks,
    )?;

    let normalised = MatPair::new(
        after_d.a().conjugate_by(&z, &z_inv)?,
        after_d.b().conjugate_by(&z, &z_inv)?,
    )?;
    checks.push(BlockCheck {
        stage: "Z",
        block: (0, 0),
        expectation: "first member = A0",
        holds: *normalised.a() == a0,
    });
    check_b_pattern(
        "Z",
        normalised.b(),
        &layout,
        &[
            Expected {
                block: (1, 3),
                value: id2.clone(),
                label: "I",
            },
            Expected {
                block: (2, 5),
                value: id2.scale(ratio(beta * beta, alpha)?),
                label: "beta^2/alpha I",
            },
            Expected {
                block: (3, 6),
                value: t.scale(b_over_a),
                label: "beta/alpha T",
            },
            Expected {
                block: (4, 6),
                value: w.clone(),
                label: "W",
            },
            Expected {
                block: (5, 7),
                value: id2.clone(),
                label: "I",
            },
        ],
        &mut checks,
    )?;

    Ok(Lemma1Trace {
        a0f: sub.a().clone(),
        b0g: sub.b().clone(),
        u,
        u_inv,
        d,
        z,
        after_d,
        normalised,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FieldCtx {
        FieldCtx::new(p).unwrap()
    }

    fn unit_base(ctx: FieldCtx) -> BasePair {
        BasePair::new(Mat::from_rows(ctx, &[[1]]), Mat::from_rows(ctx, &[[1]])).unwrap()
    }

    #[test]
    fn identity_substitution_is_the_constructed_pair() {
        let ctx = f(5);
        let base = unit_base(ctx);
        let sub = build_a0f_b0g(&base, &QuadCoeffs::identity(ctx)).unwrap();
        assert_eq!(sub, build_p0(&base).unwrap().pair);
        let trace = verify_lemma1(&base, &QuadCoeffs::identity(ctx)).unwrap();
        assert!(trace.passed());
        assert!(trace.d.is_identity());
        assert!(trace.z.is_identity());
    }

    #[test]
    fn substituted_blocks() {
        let ctx = f(7);
        let base = BasePair::new(
            Mat::from_rows(ctx, &[[1, 3], [0, 1]]),
            Mat::from_rows(ctx, &[[1, 0], [5, 1]]),
        )
        .unwrap();
        let q = QuadCoeffs::new(ctx, 3, 2, 5, 1, 4, 6, 2).unwrap();
        let sub = build_a0f_b0g(&base, &q).unwrap();
        let layout = p0_layout(2);
        assert_eq!(
            extract_block(sub.a(), &layout, 1, 5).unwrap(),
            Mat::scalar(ctx, 4, ctx.elem(3))
        );
        assert_eq!(
            extract_block(sub.b(), &layout, 4, 6).unwrap(),
            build_w(ctx, 2).unwrap().scale(ctx.elem(4))
        );
    }

    #[test]
    fn u_inverse_example() {
        let ctx = f(5);
        let t = Mat::from_rows(ctx, &[[0, 1], [1, 1]]);
        let q = QuadCoeffs::new(ctx, 2, 1, 0, 0, 1, 0, 0).unwrap();
        let u_inv = build_u_inv(&q, &t).unwrap();
        assert_eq!(u_inv.submatrix(0, 0, 2, 2), Mat::scalar(ctx, 2, ctx.elem(3)));
        assert!((&build_u(&q, &t).unwrap() * &u_inv).is_identity());
        assert!(build_u(&QuadCoeffs::identity(ctx), &t).unwrap().is_identity());
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let ctx = f(5);
        let t = Mat::identity(ctx, 2);
        let mut q = QuadCoeffs::identity(ctx);
        q.alpha = 0;
        assert_eq!(build_u(&q, &t), Err(LemmaError::ZeroCoefficient("alpha")));
        assert_eq!(build_u_inv(&q, &t), Err(LemmaError::ZeroCoefficient("alpha")));
        assert_eq!(
            build_z(ctx.zero(), &p0_layout(1)),
            Err(LemmaError::ZeroCoefficient("beta"))
        );
    }

    #[test]
    fn z_fixes_a0() {
        let ctx = f(7);
        let layout = p0_layout(2);
        let z = build_z(ctx.elem(3), &layout).unwrap();
        let a0 = crate::construction::build_a0(ctx, 2).unwrap();
        assert_eq!(a0.conjugate_by(&z, &z.inverse().unwrap()).unwrap(), a0);
        assert!(build_z(ctx.one(), &layout).unwrap().is_identity());
    }

    #[test]
    fn normalised_block_example() {
        // beta^2/alpha = 9 * inv(2) = 4 * 3 = 2 in GF(5).
        let ctx = f(5);
        let q = QuadCoeffs::new(ctx, 2, 0, 0, 0, 3, 0, 0).unwrap();
        let trace = verify_lemma1(&unit_base(ctx), &q).unwrap();
        assert!(trace.passed(), "{:?}", trace.failures().collect::<Vec<_>>());
        let layout = p0_layout(1);
        assert_eq!(
            extract_block(trace.normalised.b(), &layout, 2, 5).unwrap(),
            Mat::scalar(ctx, 2, ctx.elem(2))
        );
        // After D alone the same block is beta/alpha = 3 * 3 = 4.
        assert_eq!(
            extract_block(trace.after_d.b(), &layout, 2, 5).unwrap(),
            Mat::scalar(ctx, 2, ctx.elem(4))
        );
        assert_eq!(
            extract_block(trace.normalised.b(), &layout, 4, 6).unwrap(),
            build_w(ctx, 1).unwrap()
        );
    }

    #[test]
    fn normaliser_matches_chain() {
        let ctx = f(7);
        let base = BasePair::new(
            Mat::from_rows(ctx, &[[1, 3], [0, 1]]),
            Mat::from_rows(ctx, &[[1, 0], [5, 1]]),
        )
        .unwrap();
        let q = QuadCoeffs::new(ctx, 3, 2, 5, 1, 4, 6, 2).unwrap();
        let trace = verify_lemma1(&base, &q).unwrap();
        let (c, c_inv) = normaliser(&base, &q).unwrap();
        assert!((&c * &c_inv).is_identity());
        assert_eq!(trace.b0g.conjugate_by(&c, &c_inv).unwrap(), *trace.normalised.b());
    }
}
