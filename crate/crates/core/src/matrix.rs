//! Dense matrices over GF(p) with exact elimination.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::field::{FieldCtx, FieldElem, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("dimension mismatch: {op} of {lhs:?} and {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("modulus mismatch: {0} vs {1}")]
    Modulus(u32, u32),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("block ({row}, {col}) should be {expected:?}, got {got:?}")]
    BlockShape {
        row: usize,
        col: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("block index ({0}, {1}) outside the layout")]
    BlockIndex(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Dense row-major matrix over GF(p).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    ctx: FieldCtx,
    data: Vec<u32>,
}

impl Mat {
    pub fn zeros(ctx: FieldCtx, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            ctx,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ctx: FieldCtx, n: usize) -> Self {
        Self::scalar(ctx, n, ctx.one())
    }

    /// `c * I_n`.
    pub fn scalar(ctx: FieldCtx, n: usize, c: FieldElem) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.value();
        }
        m
    }

    /// Builds a matrix from row-major integers, reducing each modulo p.
    pub fn from_vec(ctx: FieldCtx, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self, MatError> {
        if entries.len() != rows * cols {
            return Err(MatError::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        let p = ctx.modulus() as u64;
        let data = entries.into_iter().map(|v| (v % p) as u32).collect();
        Ok(Self { rows, cols, ctx, data })
    }

    /// Convenience constructor from nested rows; panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(ctx: FieldCtx, rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut m = Self::zeros(ctx, r, c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = ctx.from_i64(v).value();
            }
        }
        m
    }

    /// Column vector from integers.
    pub fn column(ctx: FieldCtx, entries: &[i64]) -> Self {
        let rows: Vec<[i64; 1]> = entries.iter().map(|&v| [v]).collect();
        Self::from_rows(ctx, &rows)
    }

    /// Square matrix `E_ij` (zero-based) of size n.
    pub fn unit(ctx: FieldCtx, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        m.data[i * n + j] = 1 % ctx.modulus();
        m
    }

    /// Upper-triangular nilpotent Jordan cell with ones on the superdiagonal.
    pub fn jordan_nilpotent(ctx: FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n.saturating_sub(1) {
            m.data[i * n + i + 1] = 1 % ctx.modulus();
        }
        m
    }

    /// Jordan cell `J_n(lambda)`.
    pub fn jordan(ctx: FieldCtx, n: usize, lambda: FieldElem) -> Self {
        &Self::jordan_nilpotent(ctx, n) + &Self::scalar(ctx, n, lambda)
    }

    pub(crate) fn from_raw(ctx: FieldCtx, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, ctx, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.ctx.elem(self.data[i * self.cols + j] as u64)
    }

    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        debug_assert_eq!(v.modulus(), self.ctx.modulus());
        self.data[i * self.cols + j] = v.value();
    }

    /// Row-major residues.
    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..self.cols).all(|j| self.raw(i, j) == u32::from(i == j)))
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    fn check_field(&self, other: &Mat) -> Result<(), MatError> {
        if self.ctx != other.ctx {
            return Err(MatError::Modulus(self.ctx.modulus(), other.ctx.modulus()));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(MatError::Dimension {
                op: "product",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let p = self.ctx.modulus() as u64;
        let (n, m) = (self.rows, other.cols);
        let mut acc = vec![0u64; m];
        let mut out = Vec::with_capacity(n * m);
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let row = &other.data[k * m..(k + 1) * m];
                for (slot, &b) in acc.iter_mut().zip(row) {
                    *slot = (*slot + a * b as u64) % p;
                }
            }
            out.extend(acc.iter().map(|&v| v as u32));
        }
        Ok(Mat::from_raw(self.ctx, n, m, out))
    }

    fn zip_with(&self, other: &Mat, op: &'static str, f: impl Fn(u32, u32) -> u32) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(MatError::Dimension {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Mat::from_raw(self.ctx, self.rows, self.cols, data))
    }

    pub fn try_add(&self, other: &Mat) -> Result<Mat, MatError> {
        let ctx = self.ctx;
        self.zip_with(other, "sum", |a, b| ctx.add_raw(a, b))
    }

    pub fn try_sub(&self, other: &Mat) -> Result<Mat, MatError> {
        let ctx = self.ctx;
        self.zip_with(other, "difference", |a, b| ctx.sub_raw(a, b))
    }

    pub fn scale(&self, c: FieldElem) -> Mat {
        debug_assert_eq!(c.modulus(), self.ctx.modulus());
        let ctx = self.ctx;
        let data = self.data.iter().map(|&a| ctx.mul_raw(a, c.value())).collect();
        Mat::from_raw(ctx, self.rows, self.cols, data)
    }

    /// Adds `c * other` into `self` in place.
    pub fn add_scaled(&mut self, c: FieldElem, other: &Mat) -> Result<(), MatError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(MatError::Dimension {
                op: "sum",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        if c.is_zero() {
            return Ok(());
        }
        let ctx = self.ctx;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = ctx.add_raw(*a, ctx.mul_raw(c.value(), b));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Result<Mat, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare(self.rows, self.cols));
        }
        let mut acc = Mat::identity(self.ctx, self.rows);
        for _ in 0..k {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// True iff `self^k = 0`.
    pub fn is_nilpotent_with_index(&self, k: u32) -> Result<bool, MatError> {
        Ok(self.pow(k)?.is_zero())
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> Rref {
        let mut work = self.data.clone();
        let pivots = eliminate(self.ctx, &mut work, self.rows, self.cols, true);
        Rref {
            matrix: Mat::from_raw(self.ctx, self.rows, self.cols, work),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(self.ctx, &mut work, self.rows, self.cols, false).len()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn det(&self) -> Result<FieldElem, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare(self.rows, self.cols));
        }
        let ctx = self.ctx;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1 % ctx.modulus();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| a[r * n + c] != 0) else {
                return Ok(ctx.zero());
            };
            if piv != c {
                for k in 0..n {
                    a.swap(piv * n + k, c * n + k);
                }
                det = ctx.neg_raw(det);
            }
            let pv = a[c * n + c];
            det = ctx.mul_raw(det, pv);
            let inv = ctx.inv_raw(pv)?;
            for r in c + 1..n {
                let f = a[r * n + c];
                if f == 0 {
                    continue;
                }
                let f = ctx.mul_raw(f, inv);
                for k in c..n {
                    let sub = ctx.mul_raw(f, a[c * n + k]);
                    a[r * n + k] = ctx.sub_raw(a[r * n + k], sub);
                }
            }
        }
        Ok(ctx.elem(det as u64))
    }

    /// Basis of the right null space `{v : A v = 0}` as column vectors.
    pub fn kernel_basis(&self) -> Vec<Mat> {
        let rref = self.rref();
        let ctx = self.ctx;
        let mut pivot_row = vec![None; self.cols];
        for (r, &c) in rref.pivots.iter().enumerate() {
            pivot_row[c] = Some(r);
        }
        let mut basis = Vec::with_capacity(self.cols - rref.rank());
        for free in (0..self.cols).filter(|&c| pivot_row[c].is_none()) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1 % ctx.modulus();
            for (r, &c) in rref.pivots.iter().enumerate() {
                v[c] = ctx.neg_raw(rref.matrix.raw(r, free));
            }
            basis.push(Mat::from_raw(ctx, self.cols, 1, v));
        }
        basis
    }

    pub fn inverse(&self) -> Result<Mat, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let w = 2 * n;
        let mut aug = vec![0u32; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(self.row(i));
            aug[i * w + n + i] = 1 % self.ctx.modulus();
        }
        let pivots = eliminate(self.ctx, &mut aug, n, w, true);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(MatError::Singular);
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.extend_from_slice(&aug[i * w + n..(i + 1) * w]);
        }
        Ok(Mat::from_raw(self.ctx, n, n, out))
    }

    /// Copies the `rows x cols` window starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "window out of range");
        let mut data = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            data.extend_from_slice(&self.data[i * self.cols + c0..i * self.cols + c0 + cols]);
        }
        Mat::from_raw(self.ctx, rows, cols, data)
    }

    /// Overwrites the window at `(r0, c0)` with `block`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Mat) {
        assert!(
            r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
            "window out of range"
        );
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    /// Block-diagonal matrix from square or rectangular diagonal pieces.
    pub fn block_diag(ctx: FieldCtx, blocks: &[Mat]) -> Mat {
        let rows = blocks.iter().map(Mat::rows).sum();
        let cols = blocks.iter().map(Mat::cols).sum();
        let mut out = Mat::zeros(ctx, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_submatrix(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// `[A | B]`.
    pub fn hcat(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(MatError::Dimension {
                op: "hcat",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Mat::zeros(self.ctx, self.rows, self.cols + other.cols);
        out.set_submatrix(0, 0, self);
        out.set_submatrix(0, self.cols, other);
        Ok(out)
    }

    /// Stacks `self` over `other`.
    pub fn vcat(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(MatError::Dimension {
                op: "vcat",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat::from_raw(self.ctx, self.rows + other.rows, self.cols, data))
    }

    /// Conjugate `s^{-1} self s`.
    pub fn conjugate_by(&self, s: &Mat, s_inv: &Mat) -> Result<Mat, MatError> {
        s_inv.try_mul(self)?.try_mul(s)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {}", self.rows, self.cols, self.ctx)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

// Operator forms panic on shape or modulus mismatch; they are meant for
// code whose shapes are fixed by construction.

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        let ctx = self.ctx;
        let data = self.data.iter().map(|&a| ctx.neg_raw(a)).collect();
        Mat::from_raw(ctx, self.rows, self.cols, data)
    }
}

/// Result of [`Mat::rref`].
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: Mat,
    /// Pivot column of each nonzero row, in row order.
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss(-Jordan) elimination in place on a row-major buffer.
///
/// Pivots are the first nonzero entry in the column. With `reduce` the
/// result is fully reduced (pivots normalised to 1, zeros above); without it
/// only forward elimination is done. Returns the pivot columns.
pub(crate) fn eliminate(ctx: FieldCtx, a: &mut [u32], rows: usize, cols: usize, reduce: bool) -> Vec<usize> {
    let p = ctx.modulus() as u64;
    let mut pivots = Vec::new();
    let mut support = Vec::with_capacity(cols);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if piv != r {
            for k in c..cols {
                a.swap(piv * cols + k, r * cols + k);
            }
        }
        let inv = ctx.inv_raw(a[r * cols + c]).expect("nonzero pivot");
        if inv != 1 {
            for k in c..cols {
                let v = &mut a[r * cols + k];
                *v = ((*v as u64 * inv as u64) % p) as u32;
            }
        }
        // Pivot rows of structured systems are sparse; only touch their support.
        support.clear();
        support.extend((c..cols).filter(|&k| a[r * cols + k] != 0));
        let start = if reduce { 0 } else { r + 1 };
        for i in start..rows {
            if i == r {
                continue;
            }
            let f = a[i * cols + c];
            if f == 0 {
                continue;
            }
            let nf = p - f as u64;
            for &k in &support {
                let pk = a[r * cols + k] as u64;
                let v = &mut a[i * cols + k];
                *v = ((*v as u64 + nf * pk) % p) as u32;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Stripe sizes of a block partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub row_stripes: Vec<usize>,
    pub col_stripes: Vec<usize>,
}

/// Blocks addressed by 1-based `(row stripe, column stripe)`.
pub type BlockMap = BTreeMap<(usize, usize), Mat>;

impl BlockLayout {
    pub fn new(row_stripes: Vec<usize>, col_stripes: Vec<usize>) -> Self {
        Self {
            row_stripes,
            col_stripes,
        }
    }

    /// Same stripes for rows and columns.
    pub fn square(stripes: Vec<usize>) -> Self {
        Self {
            col_stripes: stripes.clone(),
            row_stripes: stripes,
        }
    }

    pub fn rows(&self) -> usize {
        self.row_stripes.iter().sum()
    }

    pub fn cols(&self) -> usize {
        self.col_stripes.iter().sum()
    }

    fn offset(stripes: &[usize], idx: usize) -> usize {
        stripes[..idx - 1].iter().sum()
    }

    /// Offset and size of block `(i, j)` (1-based).
    pub fn window(&self, i: usize, j: usize) -> Result<(usize, usize, usize, usize), MatError> {
        if i == 0 || j == 0 || i > self.row_stripes.len() || j > self.col_stripes.len() {
            return Err(MatError::BlockIndex(i, j));
        }
        Ok((
            Self::offset(&self.row_stripes, i),
            Self::offset(&self.col_stripes, j),
            self.row_stripes[i - 1],
            self.col_stripes[j - 1],
        ))
    }

    /// Merges consecutive stripes: `groups` lists how many stripes go into
    /// each coarse stripe.
    pub fn coarsen(&self, groups: &[usize]) -> BlockLayout {
        fn merge(stripes: &[usize], groups: &[usize]) -> Vec<usize> {
            let mut out = Vec::with_capacity(groups.len());
            let mut at = 0;
            for &g in groups {
                out.push(stripes[at..at + g].iter().sum());
                at += g;
            }
            assert_eq!(at, stripes.len(), "groups must cover all stripes");
            out
        }
        BlockLayout {
            row_stripes: merge(&self.row_stripes, groups),
            col_stripes: merge(&self.col_stripes, groups),
        }
    }
}

/// Assembles a matrix from blocks; blocks not present are zero.
pub fn assemble_blocks(ctx: FieldCtx, layout: &BlockLayout, blocks: &BlockMap) -> Result<Mat, MatError> {
    let mut out = Mat::zeros(ctx, layout.rows(), layout.cols());
    for (&(i, j), block) in blocks {
        let (r0, c0, h, w) = layout.window(i, j)?;
        if block.shape() != (h, w) {
            return Err(MatError::BlockShape {
                row: i,
                col: j,
                expected: (h, w),
                got: block.shape(),
            });
        }
        if block.ctx() != ctx {
            return Err(MatError::Modulus(ctx.modulus(), block.ctx().modulus()));
        }
        out.set_submatrix(r0, c0, block);
    }
    Ok(out)
}

/// Reads block `(i, j)` (1-based) of `a` under `layout`.
pub fn extract_block(a: &Mat, layout: &BlockLayout, i: usize, j: usize) -> Result<Mat, MatError> {
    if a.shape() != (layout.rows(), layout.cols()) {
        return Err(MatError::Dimension {
            op: "block extraction",
            lhs: a.shape(),
            rhs: (layout.rows(), layout.cols()),
        });
    }
    let (r0, c0, h, w) = layout.window(i, j)?;
    Ok(a.submatrix(r0, c0, h, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> FieldCtx {
        FieldCtx::new(p).unwrap()
    }

    fn random_mat(rng: &mut impl Rng, ctx: FieldCtx, r: usize, c: usize) -> Mat {
        let v = (0..r * c).map(|_| rng.gen_range(0..ctx.order())).collect();
        Mat::from_vec(ctx, r, c, v).unwrap()
    }

    #[test]
    fn products_sums_scaling() {
        let j2 = Mat::jordan_nilpotent(f(2), 2);
        assert!((&j2 * &j2).is_zero());
        let a = Mat::from_rows(f(5), &[[1, 2], [3, 4]]);
        assert_eq!(&Mat::identity(f(5), 2) * &a, a);
        assert_eq!(
            Mat::identity(f(3), 2).scale(f(3).elem(2)),
            Mat::from_rows(f(3), &[[2, 0], [0, 2]])
        );
        assert_eq!(&a + &(-&a), Mat::zeros(f(5), 2, 2));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = Mat::zeros(f(5), 2, 3);
        assert!(matches!(a.try_mul(&a), Err(MatError::Dimension { .. })));
        assert!(matches!(
            a.try_add(&Mat::zeros(f(5), 3, 2)),
            Err(MatError::Dimension { .. })
        ));
        assert_eq!(a.try_add(&Mat::zeros(f(7), 2, 3)), Err(MatError::Modulus(5, 7)));
    }

    #[test]
    fn rref_examples() {
        let r = Mat::from_rows(f(5), &[[1, 2], [2, 4]]).rref();
        assert_eq!(r.matrix, Mat::from_rows(f(5), &[[1, 2], [0, 0]]));
        assert_eq!(r.rank(), 1);
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(Mat::zeros(f(3), 3, 4).rref().rank(), 0);
        assert_eq!(Mat::identity(f(2), 3).rref().rank(), 3);
    }

    #[test]
    fn kernel_examples() {
        let k = Mat::from_rows(f(5), &[[1, 2]]).kernel_basis();
        assert_eq!(k, vec![Mat::column(f(5), &[3, 1])]);
        assert!(Mat::from_rows(f(7), &[[1, 2], [3, 4]]).kernel_basis().is_empty());
        assert_eq!(Mat::zeros(f(5), 2, 2).kernel_basis().len(), 2);
    }

    #[test]
    fn inverse_examples() {
        let two = Mat::identity(f(7), 2).scale(f(7).elem(2));
        assert_eq!(two.inverse().unwrap(), Mat::identity(f(7), 2).scale(f(7).elem(4)));
        let u = Mat::from_rows(f(2), &[[1, 1], [0, 1]]);
        assert_eq!(u.inverse().unwrap(), u);
        assert_eq!(
            Mat::from_rows(f(5), &[[1, 2], [2, 4]]).inverse(),
            Err(MatError::Singular)
        );
        assert_eq!(Mat::zeros(f(5), 2, 3).inverse(), Err(MatError::NotSquare(2, 3)));
    }

    #[test]
    fn determinant_matches_invertibility() {
        let a = Mat::from_rows(f(7), &[[1, 2], [3, 4]]);
        assert_eq!(a.det().unwrap(), f(7).from_i64(-2));
        assert_eq!(Mat::from_rows(f(5), &[[1, 2], [2, 4]]).det().unwrap(), f(5).zero());
    }

    #[test]
    fn block_examples() {
        let ctx = f(5);
        let layout = BlockLayout::square(vec![1, 1]);
        let mut blocks = BlockMap::new();
        blocks.insert((1, 2), Mat::from_rows(ctx, &[[1]]));
        let a = assemble_blocks(ctx, &layout, &blocks).unwrap();
        assert_eq!(a, Mat::from_rows(ctx, &[[0, 1], [0, 0]]));
        assert_eq!(extract_block(&a, &layout, 1, 2).unwrap(), Mat::from_rows(ctx, &[[1]]));
        assert_eq!(extract_block(&a, &layout, 3, 1), Err(MatError::BlockIndex(3, 1)));
        blocks.insert((2, 2), Mat::zeros(ctx, 2, 2));
        assert!(matches!(
            assemble_blocks(ctx, &layout, &blocks),
            Err(MatError::BlockShape { .. })
        ));
    }

    #[test]
    fn zero_sized_stripes_are_allowed() {
        let ctx = f(3);
        let layout = BlockLayout::new(vec![0, 2], vec![1, 0, 1]);
        let mut blocks = BlockMap::new();
        blocks.insert((2, 3), Mat::column(ctx, &[1, 2]));
        let a = assemble_blocks(ctx, &layout, &blocks).unwrap();
        assert_eq!(a, Mat::from_rows(ctx, &[[0, 1], [0, 2]]));
        assert_eq!(extract_block(&a, &layout, 1, 1).unwrap().shape(), (0, 1));
    }

    #[test]
    fn nilpotency_index() {
        let j3 = Mat::jordan_nilpotent(f(5), 3);
        assert!(j3.is_nilpotent_with_index(3).unwrap());
        assert!(!j3.is_nilpotent_with_index(2).unwrap());
        assert!(Mat::zeros(f(5), 3, 3).is_nilpotent_with_index(1).unwrap());
    }

    #[test]
    fn inverse_of_random_invertible_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 200 {
            let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
            let n = rng.gen_range(1..=8);
            let a = random_mat(&mut rng, f(p), n, n);
            match a.inverse() {
                Ok(inv) => {
                    assert!((&a * &inv).is_identity());
                    assert!((&inv * &a).is_identity());
                    assert!(!a.det().unwrap().is_zero());
                    checked += 1;
                }
                Err(MatError::Singular) => assert!(a.det().unwrap().is_zero()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    proptest! {
        #[test]
        fn rank_nullity(seed in any::<u64>(), r in 0usize..7, c in 0usize..7, pi in 0usize..4) {
            let ctx = f([2u64, 3, 5, 7][pi]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_mat(&mut rng, ctx, r, c);
            let kernel = a.kernel_basis();
            prop_assert_eq!(a.rank() + kernel.len(), c);
            for v in &kernel {
                prop_assert!((&a * v).is_zero());
            }
            prop_assert_eq!(a.rref().rank(), a.rank());
        }

        #[test]
        fn block_round_trip(seed in any::<u64>(), stripes in prop::collection::vec(0usize..4, 1..5)) {
            let ctx = f(7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layout = BlockLayout::square(stripes.clone());
            let mut blocks = BlockMap::new();
            for i in 1..=stripes.len() {
                for j in 1..=stripes.len() {
                    if rng.gen_bool(0.5) {
                        blocks.insert((i, j), random_mat(&mut rng, ctx, stripes[i - 1], stripes[j - 1]));
                    }
                }
            }
            let a = assemble_blocks(ctx, &layout, &blocks).unwrap();
            for i in 1..=stripes.len() {
                for j in 1..=stripes.len() {
                    let got = extract_block(&a, &layout, i, j).unwrap();
                    match blocks.get(&(i, j)) {
                        Some(b) => prop_assert_eq!(&got, b),
                        None => prop_assert!(got.is_zero()),
                    }
                }
            }
        }
    }
}
