//! Invariant flags and the graded projection of an intertwiner space.
//!
//! Kernels and images of words in `(A, B)`, and sums and intersections of
//! those, are carried into each other by every intertwiner. Refining the
//! trivial chain `0 < K^n` by a fixed list of such subspaces gives a flag
//! `F_1 < ... < F_k` computed the same way for both pairs. In adapted bases
//! every intertwiner is block upper triangular, so it is invertible iff its
//! diagonal blocks are, and the flag dimensions must agree whenever the
//! pairs are similar.

use crate::field::FieldCtx;
use crate::matrix::{eliminate, Mat};
use crate::pair::MatPair;

use super::search::{is_invertible, walk_span};
use super::IntertwinerSpace;

/// A subspace of `K^n`, stored as a reduced row-echelon basis (one basis
/// vector per row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: Mat,
}

impl Subspace {
    pub fn zero(ctx: FieldCtx, n: usize) -> Self {
        Self {
            n,
            basis: Mat::zeros(ctx, 0, n),
        }
    }

    pub fn full(ctx: FieldCtx, n: usize) -> Self {
        Self {
            n,
            basis: Mat::identity(ctx, n),
        }
    }

    /// Row space of `rows`.
    pub fn row_space(rows: &Mat) -> Self {
        let n = rows.cols();
        let r = rows.rref();
        let basis = r.matrix.submatrix(0, 0, r.rank(), n);
        Self { n, basis }
    }

    /// Column space of `m`.
    pub fn image(m: &Mat) -> Self {
        Self::row_space(&m.transpose())
    }

    /// `{v : m v = 0}`.
    pub fn kernel(m: &Mat) -> Self {
        let ctx = m.ctx();
        let vecs = m.kernel_basis();
        let mut rows = Mat::zeros(ctx, vecs.len(), m.cols());
        for (i, v) in vecs.iter().enumerate() {
            rows.set_submatrix(i, 0, &v.transpose());
        }
        Self::row_space(&rows)
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Self::row_space(&self.basis.vcat(&other.basis).expect("same ambient space"))
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let ctx = self.basis.ctx();
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(ctx, self.n);
        }
        // (a, b) with a U + b W = 0 gives a U in the intersection.
        let stacked = self.basis.vcat(&other.basis).expect("same ambient space");
        let relations = stacked.transpose().kernel_basis();
        let mut rows = Mat::zeros(ctx, relations.len(), self.n);
        for (i, rel) in relations.iter().enumerate() {
            let a = rel.submatrix(0, 0, self.dim(), 1).transpose();
            rows.set_submatrix(i, 0, &(&a * &self.basis));
        }
        Self::row_space(&rows)
    }
}

/// Subspaces defined from a pair by a fixed recipe.
fn characteristic_subspaces(pair: &MatPair) -> Vec<Subspace> {
    let ctx = pair.ctx();
    let n = pair.size();
    let (a, b) = (pair.a(), pair.b());
    let mut out = Vec::new();

    // Words of length 1..=3, in a fixed order.
    let mut layers: Vec<Vec<Mat>> = vec![vec![a.clone(), b.clone()]];
    for _ in 1..3 {
        let last = layers.last().unwrap();
        let next = last.iter().flat_map(|w| [a * w, b * w]).collect();
        layers.push(next);
    }
    for words in &layers {
        let radical = words
            .iter()
            .fold(Subspace::zero(ctx, n), |acc, w| acc.sum(&Subspace::image(w)));
        let socle = words
            .iter()
            .fold(Subspace::full(ctx, n), |acc, w| acc.intersect(&Subspace::kernel(w)));
        out.push(radical);
        out.push(socle);
    }

    let singles = [
        a.clone(),
        b.clone(),
        a + b,
        a - b,
        a * b,
        b * a,
        a * &(b * b),
        &(b * b) * a,
    ];
    for w in &singles {
        out.push(Subspace::kernel(w));
        out.push(Subspace::image(w));
    }
    // Generalised eigenspaces for small fields.
    if ctx.order() <= 7 {
        for lambda in ctx.elements() {
            let shift = Mat::scalar(ctx, n, lambda);
            for m in [a, b] {
                let g = (m - &shift).pow(n as u32).expect("square");
                out.push(Subspace::kernel(&g));
            }
        }
    }
    out
}

/// A flag of nested subspaces, smallest first, ending at `K^n`.
#[derive(Debug, Clone)]
pub struct Flag {
    pub chain: Vec<Subspace>,
}

impl Flag {
    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(Subspace::dim).collect()
    }

    /// Columns form a basis adapted to the flag.
    pub fn adapted_basis(&self) -> Mat {
        let first = &self.chain[0];
        let ctx = first.basis.ctx();
        let n = first.n;
        let mut rows = Mat::zeros(ctx, 0, n);
        for sub in &self.chain {
            for i in 0..sub.dim() {
                let v = sub.basis.submatrix(i, 0, 1, n);
                let candidate = rows.vcat(&v).expect("same width");
                if candidate.rank() > rows.rows() {
                    rows = candidate;
                }
            }
        }
        rows.transpose()
    }

    /// Sizes of the graded pieces `F_i / F_{i-1}`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.chain
            .iter()
            .map(|s| {
                let d = s.dim() - prev;
                prev = s.dim();
                d
            })
            .filter(|&d| d > 0)
            .collect()
    }
}

/// Refines the two trivial chains with the same subspace recipe. Returns the
/// index of the first refinement step at which the dimensions disagree.
pub fn compare_flags(from: &MatPair, to: &MatPair) -> Result<(Flag, Flag), usize> {
    let ctx = from.ctx();
    let n = from.size();
    let mut chain_from = vec![Subspace::zero(ctx, n), Subspace::full(ctx, n)];
    let mut chain_to = chain_from.clone();
    let xs_from = characteristic_subspaces(from);
    let xs_to = characteristic_subspaces(to);
    for (step, (x_from, x_to)) in xs_from.iter().zip(&xs_to).enumerate() {
        if x_from.dim() != x_to.dim() {
            return Err(step);
        }
        chain_from = refine(&chain_from, x_from);
        chain_to = refine(&chain_to, x_to);
        let dims_from: Vec<_> = chain_from.iter().map(Subspace::dim).collect();
        let dims_to: Vec<_> = chain_to.iter().map(Subspace::dim).collect();
        if dims_from != dims_to {
            return Err(step);
        }
    }
    chain_from.remove(0);
    chain_to.remove(0);
    Ok((Flag { chain: chain_from }, Flag { chain: chain_to }))
}

fn refine(chain: &[Subspace], x: &Subspace) -> Vec<Subspace> {
    let mut out = vec![chain[0].clone()];
    for pair in chain.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let mid = lo.sum(&hi.intersect(x));
        if mid.dim() > lo.dim() && mid.dim() < hi.dim() {
            out.push(mid);
        }
        out.push(hi.clone());
    }
    out
}

/// Adapted bases for source and target flags of an intertwiner space.
#[derive(Debug, Clone)]
pub struct FlagPair {
    /// Adapted basis of the source pair's flag (columns).
    pub source_basis: Mat,
    /// Inverse of the adapted basis of the target pair's flag.
    pub target_basis_inv: Mat,
    pub blocks: Vec<usize>,
}

impl FlagPair {
    pub fn new(from: &MatPair, to: &MatPair) -> Result<Self, usize> {
        let (f_from, f_to) = compare_flags(from, to)?;
        let source_basis = f_from.adapted_basis();
        let target_basis_inv = f_to.adapted_basis().inverse().expect("adapted basis is a basis");
        Ok(Self {
            source_basis,
            target_basis_inv,
            blocks: f_from.block_sizes(),
        })
    }

    /// `Q'^{-1} S Q`: block upper triangular for every intertwiner `S`.
    pub fn to_adapted(&self, s: &Mat) -> Mat {
        &(&self.target_basis_inv * s) * &self.source_basis
    }

    /// Block-diagonal part of `Q'^{-1} S Q`.
    pub fn diagonal_part(&self, s: &Mat) -> Mat {
        let t = self.to_adapted(s);
        let mut out = Mat::zeros(t.ctx(), t.rows(), t.cols());
        let mut at = 0;
        for &b in &self.blocks {
            out.set_submatrix(at, at, &t.submatrix(at, at, b, b));
            at += b;
        }
        out
    }

    /// True iff `Q'^{-1} S Q` has no entries below the diagonal blocks.
    pub fn is_block_upper_triangular(&self, s: &Mat) -> bool {
        let t = self.to_adapted(s);
        let mut row_start = 0;
        for &b in &self.blocks {
            for i in row_start..row_start + b {
                if (0..row_start).any(|j| t.raw(i, j) != 0) {
                    return false;
                }
            }
            row_start += b;
        }
        true
    }
}

/// Projection of an intertwiner space onto its diagonal blocks.
pub struct GradedProjection<'a> {
    space: &'a IntertwinerSpace,
    /// Indices of basis elements whose projections span the image.
    selected: Vec<usize>,
    projections: Vec<Mat>,
}

impl<'a> GradedProjection<'a> {
    pub fn new(space: &'a IntertwinerSpace, flags: &FlagPair) -> Self {
        let ctx = space.ctx;
        let all: Vec<Mat> = space.basis.iter().map(|s| flags.diagonal_part(s)).collect();
        // Pick a maximal independent subset of the projections: pivot
        // columns of the matrix whose columns are the flattened projections.
        let len = space.n * space.n;
        let d = all.len();
        let mut cols = vec![0u32; len * d];
        for (j, m) in all.iter().enumerate() {
            for (k, &v) in m.as_slice().iter().enumerate() {
                cols[k * d + j] = v;
            }
        }
        let pivots = eliminate(ctx, &mut cols, len, d, false);
        let projections = pivots.iter().map(|&j| all[j].clone()).collect();
        Self {
            space,
            selected: pivots,
            projections,
        }
    }

    pub fn image_dim(&self) -> usize {
        self.selected.len()
    }

    /// Walks the image; on success lifts the combination back to the space.
    pub fn find_invertible(&self) -> (Option<Mat>, u64) {
        let ctx = self.space.ctx;
        let n = self.space.n;
        let (hit, visited) = walk_span(&self.projections, Mat::zeros(ctx, n, n), ctx.order(), is_invertible);
        let lifted = hit.map(|(digits, _)| {
            let mut s = Mat::zeros(ctx, n, n);
            for (&c, &idx) in digits.iter().zip(&self.selected) {
                s.add_scaled(ctx.elem(c as u64), &self.space.basis[idx])
                    .expect("basis shapes agree");
            }
            debug_assert!(is_invertible(&s));
            s
        });
        (lifted, visited)
    }
}
