//! Matrix pairs, bivariate polynomials evaluated on commuting pairs, and
//! the quadratic substitutions that realise polynomial equivalence on
//! pairs with `A^2 = 0, B^3 = 0, AB^2 = 0`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::matrix::{Mat, MatError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("pair members must be square matrices of equal size, got {0:?} and {1:?}")]
    Shape((usize, usize), (usize, usize)),
    #[error("pair members live over different fields")]
    Modulus,
    #[error("polynomial evaluation needs a commuting pair")]
    NotCommuting,
    #[error("pair does not satisfy A^2 = 0, B^3 = 0, AB^2 = 0 with AB = BA")]
    NotN23,
    #[error("coefficient {0} must be nonzero")]
    ZeroCoefficient(&'static str),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// An ordered pair `(A, B)` of square matrices of the same size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatPair {
    a: Mat,
    b: Mat,
}

impl MatPair {
    pub fn new(a: Mat, b: Mat) -> Result<Self, PairError> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(PairError::Shape(a.shape(), b.shape()));
        }
        if a.ctx() != b.ctx() {
            return Err(PairError::Modulus);
        }
        Ok(Self { a, b })
    }

    pub fn zero(ctx: FieldCtx, n: usize) -> Self {
        Self {
            a: Mat::zeros(ctx, n, n),
            b: Mat::zeros(ctx, n, n),
        }
    }

    #[inline]
    pub fn a(&self) -> &Mat {
        &self.a
    }

    #[inline]
    pub fn b(&self) -> &Mat {
        &self.b
    }

    /// Matrix size n (both members are n x n).
    #[inline]
    pub fn size(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn ctx(&self) -> FieldCtx {
        self.a.ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn into_parts(self) -> (Mat, Mat) {
        (self.a, self.b)
    }
}

/// `AB = BA`.
pub fn check_commuting(pair: &MatPair) -> bool {
    &pair.a * &pair.b == &pair.b * &pair.a
}

/// Membership in the class of commuting pairs with
/// `A^2 = 0`, `B^3 = 0` and `AB^2 = 0`.
pub fn check_n23(pair: &MatPair) -> bool {
    let (a, b) = (&pair.a, &pair.b);
    let b2 = b * b;
    check_commuting(pair) && (a * a).is_zero() && (&b2 * b).is_zero() && (a * &b2).is_zero()
}

/// Polynomial in commuting variables `x`, `y` with finite support.
///
/// Monomial `x^i y^j` is keyed by `(i, j)`; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarPoly {
    ctx: FieldCtx,
    terms: BTreeMap<(u32, u32), FieldElem>,
}

impl BivarPoly {
    pub fn zero(ctx: FieldCtx) -> Self {
        Self {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    /// Builds from `(coeff, i, j)` triples; repeated monomials accumulate.
    pub fn from_terms(ctx: FieldCtx, terms: impl IntoIterator<Item = (FieldElem, u32, u32)>) -> Self {
        let mut poly = Self::zero(ctx);
        for (c, i, j) in terms {
            poly.add_term(c, i, j);
        }
        poly
    }

    pub fn x(ctx: FieldCtx) -> Self {
        Self::from_terms(ctx, [(ctx.one(), 1, 0)])
    }

    pub fn y(ctx: FieldCtx) -> Self {
        Self::from_terms(ctx, [(ctx.one(), 0, 1)])
    }

    pub fn add_term(&mut self, c: FieldElem, i: u32, j: u32) {
        debug_assert_eq!(c.modulus(), self.ctx.modulus());
        let entry = self.terms.entry((i, j)).or_insert_with(|| self.ctx.zero());
        *entry = *entry + c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn coeff(&self, i: u32, j: u32) -> FieldElem {
        self.terms.get(&(i, j)).copied().unwrap_or_else(|| self.ctx.zero())
    }

    /// Nonzero terms as `((i, j), coeff)` in lexicographic monomial order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), FieldElem)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let mut s = c.to_string();
                match i {
                    0 => {}
                    1 => s.push_str("*x"),
                    _ => s.push_str(&format!("*x^{i}")),
                }
                match j {
                    0 => {}
                    1 => s.push_str("*y"),
                    _ => s.push_str(&format!("*y^{j}")),
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Evaluates `f(A, B) = sum c_ij A^i B^j` on a commuting pair.
///
/// Powers of `A` and `B` are computed once up to the largest exponent that
/// occurs.
pub fn eval_poly_pair(f: &BivarPoly, pair: &MatPair) -> Result<Mat, PairError> {
    if f.ctx != pair.ctx() {
        return Err(PairError::Modulus);
    }
    if !check_commuting(pair) {
        return Err(PairError::NotCommuting);
    }
    let n = pair.size();
    let ctx = pair.ctx();
    let max_i = f.terms.keys().map(|k| k.0).max().unwrap_or(0);
    let max_j = f.terms.keys().map(|k| k.1).max().unwrap_or(0);
    let powers = |m: &Mat, k: u32| {
        let mut out = vec![Mat::identity(ctx, n)];
        for e in 1..=k as usize {
            let next = &out[e - 1] * m;
            out.push(next);
        }
        out
    };
    let a_pow = powers(&pair.a, max_i);
    let b_pow = powers(&pair.b, max_j);
    let mut acc = Mat::zeros(ctx, n, n);
    for (&(i, j), &c) in &f.terms {
        let mono = &a_pow[i as usize] * &b_pow[j as usize];
        acc.add_scaled(c, &mono)?;
    }
    Ok(acc)
}

/// Zero constant terms and a nonsingular Jacobian at the origin.
pub fn check_admissible(f: &BivarPoly, g: &BivarPoly) -> bool {
    if !f.coeff(0, 0).is_zero() || !g.coeff(0, 0).is_zero() {
        return false;
    }
    let det = f.coeff(1, 0) * g.coeff(0, 1) - f.coeff(0, 1) * g.coeff(1, 0);
    !det.is_zero()
}

/// Coefficients of the quadratic substitution
///
/// ```text
/// f(x, y) = alpha x + alpha1 y^2 + alpha2 xy
/// g(x, y) = gamma x + beta y + beta1 y^2 + beta2 xy
/// ```
///
/// with `alpha, beta != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadCoeffs {
    pub alpha: u32,
    pub alpha1: u32,
    pub alpha2: u32,
    pub gamma: u32,
    pub beta: u32,
    pub beta1: u32,
    pub beta2: u32,
    pub p: u32,
}

impl QuadCoeffs {
    /// Validating constructor; arguments in the order
    /// `(alpha, alpha1, alpha2, gamma, beta, beta1, beta2)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ctx: FieldCtx,
        alpha: u64,
        alpha1: u64,
        alpha2: u64,
        gamma: u64,
        beta: u64,
        beta1: u64,
        beta2: u64,
    ) -> Result<Self, PairError> {
        let e = |v: u64| ctx.elem(v).value();
        let q = Self {
            alpha: e(alpha),
            alpha1: e(alpha1),
            alpha2: e(alpha2),
            gamma: e(gamma),
            beta: e(beta),
            beta1: e(beta1),
            beta2: e(beta2),
            p: ctx.modulus(),
        };
        q.validate()?;
        Ok(q)
    }

    /// `f = x`, `g = y`.
    pub fn identity(ctx: FieldCtx) -> Self {
        Self::new(ctx, 1, 0, 0, 0, 1, 0, 0).expect("identity coefficients")
    }

    pub fn validate(&self) -> Result<(), PairError> {
        if self.alpha == 0 {
            return Err(PairError::ZeroCoefficient("alpha"));
        }
        if self.beta == 0 {
            return Err(PairError::ZeroCoefficient("beta"));
        }
        Ok(())
    }

    pub fn ctx(&self) -> FieldCtx {
        FieldCtx::new(self.p as u64).expect("coefficients carry a prime modulus")
    }

    fn e(&self, v: u32) -> FieldElem {
        self.ctx().elem(v as u64)
    }

    pub fn alpha(&self) -> FieldElem {
        self.e(self.alpha)
    }
    pub fn alpha1(&self) -> FieldElem {
        self.e(self.alpha1)
    }
    pub fn alpha2(&self) -> FieldElem {
        self.e(self.alpha2)
    }
    pub fn gamma(&self) -> FieldElem {
        self.e(self.gamma)
    }
    pub fn beta(&self) -> FieldElem {
        self.e(self.beta)
    }
    pub fn beta1(&self) -> FieldElem {
        self.e(self.beta1)
    }
    pub fn beta2(&self) -> FieldElem {
        self.e(self.beta2)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.ctx())
    }

    /// `beta^3 = alpha^2` in the field.
    pub fn satisfies_scalar_law(&self) -> bool {
        self.beta().pow(3) == self.alpha().pow(2)
    }

    /// Coefficients in enumeration order `(alpha, beta, gamma, alpha1, alpha2, beta1, beta2)`.
    pub fn enumeration_key(&self) -> [u32; 7] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.alpha1,
            self.alpha2,
            self.beta1,
            self.beta2,
        ]
    }
}

impl fmt::Display for QuadCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} alpha1={} alpha2={} gamma={} beta={} beta1={} beta2={}",
            self.alpha, self.alpha1, self.alpha2, self.gamma, self.beta, self.beta1, self.beta2
        )
    }
}

/// The polynomials `(f, g)` described by `q`.
pub fn quad_to_polys(q: &QuadCoeffs) -> Result<(BivarPoly, BivarPoly), PairError> {
    q.validate()?;
    let ctx = q.ctx();
    let f = BivarPoly::from_terms(ctx, [(q.alpha(), 1, 0), (q.alpha1(), 0, 2), (q.alpha2(), 1, 1)]);
    let g = BivarPoly::from_terms(
        ctx,
        [
            (q.gamma(), 1, 0),
            (q.beta(), 0, 1),
            (q.beta1(), 0, 2),
            (q.beta2(), 1, 1),
        ],
    );
    Ok((f, g))
}

/// `(f(A, B), g(A, B))` for the quadratic substitution `q`.
pub fn apply_equivalence(pair: &MatPair, q: &QuadCoeffs) -> Result<MatPair, PairError> {
    if !check_n23(pair) {
        return Err(PairError::NotN23);
    }
    if q.p != pair.ctx().modulus() {
        return Err(PairError::Modulus);
    }
    let (f, g) = quad_to_polys(q)?;
    MatPair::new(eval_poly_pair(&f, pair)?, eval_poly_pair(&g, pair)?)
}

/// Number of coefficient tuples: `(p - 1)^2 p^5`.
pub fn quad_coeff_count(ctx: FieldCtx) -> u64 {
    let p = ctx.order();
    (p - 1) * (p - 1) * p.pow(5)
}

/// The `index`-th tuple in lexicographic order on
/// `(alpha, beta, gamma, alpha1, alpha2, beta1, beta2)`, with `alpha` and
/// `beta` ranging over `1..p` and the rest over `0..p`.
pub fn quad_coeffs_at(ctx: FieldCtx, index: u64) -> Option<QuadCoeffs> {
    if index >= quad_coeff_count(ctx) {
        return None;
    }
    let p = ctx.order();
    let mut rest = index;
    let mut digits = [0u64; 7];
    // Least significant position last.
    for pos in (0..7).rev() {
        let radix = if pos < 2 { p - 1 } else { p };
        digits[pos] = rest % radix;
        rest /= radix;
    }
    let [alpha, beta, gamma, alpha1, alpha2, beta1, beta2] = digits;
    QuadCoeffs::new(ctx, alpha + 1, alpha1, alpha2, gamma, beta + 1, beta1, beta2).ok()
}

/// All admissible quadratic substitutions in the documented order.
pub fn enumerate_quad_coeffs(ctx: FieldCtx) -> impl Iterator<Item = QuadCoeffs> {
    (0..quad_coeff_count(ctx)).map(move |i| quad_coeffs_at(ctx, i).expect("index in range"))
}
