//! Explicit constructions parametrised by a base pair `(M, N)`.
//!
//! [`build_p0`] produces the 13n x 13n pair `(A0, B0)` with seven stripes of
//! sizes `[2n, 2n, 2n, n, 2n, 2n, 2n]`; [`build_e1_pair`] produces the
//! unitriangular 3n x 3n pair `(P, Q)`.

use crate::field::FieldCtx;
use crate::matrix::{assemble_blocks, extract_block, BlockLayout, BlockMap, Mat, MatError};
use crate::pair::{check_n23, MatPair, PairError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("base pair members must be square of equal size, got {0:?} and {1:?}")]
    BaseShape((usize, usize), (usize, usize)),
    #[error("base size must be at least 1")]
    EmptyBase,
    #[error("lifted matrix fails to conjugate the constructed pairs")]
    LiftCheckFailed,
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// Instantiation target `(M, N)`: two n x n matrices over one field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasePair {
    pub m: Mat,
    pub n: Mat,
}

impl BasePair {
    pub fn new(m: Mat, n: Mat) -> Result<Self, ConstructionError> {
        if !m.is_square() || m.shape() != n.shape() || m.ctx() != n.ctx() {
            return Err(ConstructionError::BaseShape(m.shape(), n.shape()));
        }
        if m.rows() == 0 {
            return Err(ConstructionError::EmptyBase);
        }
        Ok(Self { m, n })
    }

    pub fn size(&self) -> usize {
        self.m.rows()
    }

    pub fn ctx(&self) -> FieldCtx {
        self.m.ctx()
    }

    pub fn as_pair(&self) -> MatPair {
        MatPair::new(self.m.clone(), self.n.clone()).expect("base pair shapes checked")
    }

    /// `(X^{-1} M X, X^{-1} N X)`.
    pub fn conjugate(&self, x: &Mat) -> Result<BasePair, MatError> {
        let x_inv = x.inverse()?;
        Ok(BasePair {
            m: self.m.conjugate_by(x, &x_inv)?,
            n: self.n.conjugate_by(x, &x_inv)?,
        })
    }
}

/// Stripe sizes `[2n, 2n, 2n, n, 2n, 2n, 2n]`.
pub fn p0_layout(n: usize) -> BlockLayout {
    let d = 2 * n;
    BlockLayout::square(vec![d, d, d, n, d, d, d])
}

/// `T = [[0, M], [I, N]]` (2n x 2n).
pub fn build_t(base: &BasePair) -> Mat {
    let (ctx, n) = (base.ctx(), base.size());
    let mut t = Mat::zeros(ctx, 2 * n, 2 * n);
    t.set_submatrix(0, n, &base.m);
    t.set_submatrix(n, 0, &Mat::identity(ctx, n));
    t.set_submatrix(n, n, &base.n);
    t
}

/// `W = [0 | I]` (n x 2n).
pub fn build_w(ctx: FieldCtx, n: usize) -> Result<Mat, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::EmptyBase);
    }
    let mut w = Mat::zeros(ctx, n, 2 * n);
    w.set_submatrix(0, n, &Mat::identity(ctx, n));
    Ok(w)
}

/// The constructed pair together with its stripe layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P0Pair {
    pub pair: MatPair,
    pub layout: BlockLayout,
    pub n: usize,
}

impl P0Pair {
    pub fn a0(&self) -> &Mat {
        self.pair.a()
    }

    pub fn b0(&self) -> &Mat {
        self.pair.b()
    }

    pub fn block_of_a(&self, i: usize, j: usize) -> Result<Mat, MatError> {
        extract_block(self.pair.a(), &self.layout, i, j)
    }

    pub fn block_of_b(&self, i: usize, j: usize) -> Result<Mat, MatError> {
        extract_block(self.pair.b(), &self.layout, i, j)
    }
}

/// `A0`: identities at stripes (1,5), (2,6), (3,7).
pub fn build_a0(ctx: FieldCtx, n: usize) -> Result<Mat, MatError> {
    let layout = p0_layout(n);
    let id = Mat::identity(ctx, 2 * n);
    let blocks: BlockMap = [(1, 5), (2, 6), (3, 7)].into_iter().map(|k| (k, id.clone())).collect();
    assemble_blocks(ctx, &layout, &blocks)
}

/// `(A0, B0)` instantiated at `(M, N)`.
pub fn build_p0(base: &BasePair) -> Result<P0Pair, ConstructionError> {
    let (ctx, n) = (base.ctx(), base.size());
    let layout = p0_layout(n);
    let id = Mat::identity(ctx, 2 * n);
    let mut b_blocks: BlockMap = [(1, 3), (2, 5), (5, 7)].into_iter().map(|k| (k, id.clone())).collect();
    b_blocks.insert((3, 6), build_t(base));
    b_blocks.insert((4, 6), build_w(ctx, n)?);
    let a0 = build_a0(ctx, n)?;
    let b0 = assemble_blocks(ctx, &layout, &b_blocks)?;
    let pair = MatPair::new(a0, b0)?;
    debug_assert!(check_n23(&pair));
    Ok(P0Pair { pair, layout, n })
}

/// `P = [[I, I, 0], [0, I, I], [0, 0, I]]`, `Q = [[I, M, 0], [0, I, N], [0, 0, I]]`.
pub fn build_e1_pair(base: &BasePair) -> MatPair {
    let (ctx, n) = (base.ctx(), base.size());
    let id = Mat::identity(ctx, n);
    let mut p = Mat::identity(ctx, 3 * n);
    p.set_submatrix(0, n, &id);
    p.set_submatrix(n, 2 * n, &id);
    let mut q = Mat::identity(ctx, 3 * n);
    q.set_submatrix(0, n, &base.m);
    q.set_submatrix(n, 2 * n, &base.n);
    MatPair::new(p, q).expect("square blocks of equal size")
}

/// Both members unipotent: `(M - I)^n = 0` and `(N - I)^n = 0`.
pub fn is_in_e1(base: &BasePair) -> bool {
    let (ctx, n) = (base.ctx(), base.size());
    let id = Mat::identity(ctx, n);
    let unipotent = |m: &Mat| (m - &id).pow(n as u32).expect("square").is_zero();
    unipotent(&base.m) && unipotent(&base.n)
}

/// Given `X` with `X^{-1} M1 X = M2`, `X^{-1} N1 X = N2`, returns
/// `S = diag(X2, X2, X2, X, X2, X2, X2)` with `X2 = diag(X, X)`, checked to
/// satisfy `S^{-1} A0 S = A0` and `S^{-1} B0(M1, N1) S = B0(M2, N2)`.
pub fn lift_similarity(x: &Mat, base1: &BasePair, base2: &BasePair) -> Result<Mat, ConstructionError> {
    let n = base1.size();
    if x.shape() != (n, n) || base2.size() != n {
        return Err(MatError::Dimension {
            op: "lift",
            lhs: x.shape(),
            rhs: (n, n),
        }
        .into());
    }
    let ctx = base1.ctx();
    let x2 = Mat::block_diag(ctx, &[x.clone(), x.clone()]);
    let s = Mat::block_diag(
        ctx,
        &[
            x2.clone(),
            x2.clone(),
            x2.clone(),
            x.clone(),
            x2.clone(),
            x2.clone(),
            x2,
        ],
    );
    let s_inv = s.inverse().map_err(|_| ConstructionError::LiftCheckFailed)?;
    let p1 = build_p0(base1)?;
    let p2 = build_p0(base2)?;
    let a_ok = p1.a0().conjugate_by(&s, &s_inv)? == *p2.a0();
    let b_ok = p1.b0().conjugate_by(&s, &s_inv)? == *p2.b0();
    if a_ok && b_ok {
        Ok(s)
    } else {
        Err(ConstructionError::LiftCheckFailed)
    }
}
