//! Prime field arithmetic.
//!
//! A [`FieldCtx`] holds a validated prime modulus; [`FieldElem`] is a
//! canonical residue tagged with the modulus it belongs to. Matrices store
//! raw `u32` residues and borrow the context for arithmetic, so the element
//! type is mostly used at API boundaries (scalars, coefficients).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest modulus accepted. Products of two residues must fit in `u64`
/// and sums of two residues in `u32`.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_MODULUS}")]
    ModulusTooLarge(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
}

/// The ambient prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldCtx {
    p: u32,
}

impl FieldCtx {
    /// Validates `p` by trial division.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Number of field elements, as `u64`.
    #[inline]
    pub fn order(&self) -> u64 {
        self.p as u64
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem {
            value: (v % self.p as u64) as u32,
            p: self.p,
        }
    }

    /// Embeds a signed integer (`-1` maps to `p - 1`).
    pub fn from_i64(&self, v: i64) -> FieldElem {
        let r = v.rem_euclid(self.p as i64);
        FieldElem {
            value: r as u32,
            p: self.p,
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// All elements in increasing residue order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.p).map(move |v| FieldElem { value: v, p: self.p })
    }

    // Raw residue arithmetic used by the matrix kernels.

    #[inline(always)]
    pub fn add_raw(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub_raw(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn mul_raw(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline(always)]
    pub fn neg_raw(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv_raw(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero(self.p));
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(self.p as i64) as u32)
    }

    pub fn pow_raw(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A residue in `[0, p)` together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    value: u32,
    p: u32,
}

impl FieldElem {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn ctx(self) -> FieldCtx {
        FieldCtx { p: self.p }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<FieldCtx, FieldError> {
        if self.p == other.p {
            Ok(FieldCtx { p: self.p })
        } else {
            Err(FieldError::ModulusMismatch(self.p, other.p))
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self, FieldError> {
        let ctx = self.same_field(rhs)?;
        Ok(FieldElem {
            value: ctx.add_raw(self.value, rhs.value),
            p: self.p,
        })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self, FieldError> {
        let ctx = self.same_field(rhs)?;
        Ok(FieldElem {
            value: ctx.sub_raw(self.value, rhs.value),
            p: self.p,
        })
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self, FieldError> {
        let ctx = self.same_field(rhs)?;
        Ok(FieldElem {
            value: ctx.mul_raw(self.value, rhs.value),
            p: self.p,
        })
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        let value = self.ctx().inv_raw(self.value)?;
        Ok(FieldElem { value, p: self.p })
    }

    pub fn pow(self, exp: u64) -> Self {
        FieldElem {
            value: self.ctx().pow_raw(self.value, exp),
            p: self.p,
        }
    }

    pub fn try_div(self, rhs: Self) -> Result<Self, FieldError> {
        self.try_mul(rhs.inv()?)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms: a modulus mismatch is a programming error, so these
// assert in debug builds. Use the `try_*` forms for untrusted input.

impl Add for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FieldElem {
            value: FieldCtx { p: self.p }.add_raw(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FieldElem {
            value: FieldCtx { p: self.p }.sub_raw(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FieldElem {
            value: FieldCtx { p: self.p }.mul_raw(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn neg(self) -> Self {
        FieldElem {
            value: FieldCtx { p: self.p }.neg_raw(self.value),
            p: self.p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldCtx {
        FieldCtx::new(p).unwrap()
    }

    #[test]
    fn addition_examples() {
        assert_eq!(f(5).elem(3).try_add(f(5).elem(4)).unwrap().value(), 2);
        assert_eq!((f(2).elem(1) + f(2).elem(1)).value(), 0);
        assert_eq!((f(7).elem(0) + f(7).elem(6)).value(), 6);
    }

    #[test]
    fn multiplication_and_negation() {
        assert_eq!((f(5).elem(2) * f(5).elem(3)).value(), 1);
        assert_eq!((-f(3).elem(1)).value(), 2);
        assert_eq!((f(101).elem(100) * f(101).elem(100)).value(), 1);
    }

    #[test]
    fn inverses() {
        assert_eq!(f(5).elem(2).inv().unwrap().value(), 3);
        assert_eq!(f(7).elem(3).inv().unwrap().value(), 5);
        assert_eq!(f(2).elem(1).inv().unwrap().value(), 1);
        assert_eq!(f(7).zero().inv(), Err(FieldError::DivisionByZero(7)));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(FieldCtx::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(FieldCtx::new(9), Err(FieldError::NotPrime(9)));
        assert!(matches!(FieldCtx::new(1 << 40), Err(FieldError::ModulusTooLarge(_))));
        assert!(FieldCtx::new(2_147_483_647).is_ok());
    }

    #[test]
    fn mismatch_is_reported() {
        let a = f(5).elem(1);
        let b = f(7).elem(1);
        assert_eq!(a.try_add(b), Err(FieldError::ModulusMismatch(5, 7)));
        assert_eq!(a.try_mul(b), Err(FieldError::ModulusMismatch(5, 7)));
    }

    #[test]
    fn every_nonzero_element_is_invertible() {
        for p in [2u64, 3, 5, 7, 101] {
            let ctx = f(p);
            for a in ctx.elements().skip(1) {
                assert_eq!((a * a.inv().unwrap()).value(), 1);
            }
        }
    }

    fn prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![2u64, 3, 5, 7, 101])
    }

    proptest! {
        #[test]
        fn field_axioms(p in prime(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
            let ctx = f(p);
            let (a, b, c) = (ctx.elem(a), ctx.elem(b), ctx.elem(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a + (-a), ctx.zero());
            prop_assert_eq!(a - b, a + (-b));
            if !a.is_zero() {
                prop_assert_eq!(a * a.inv().unwrap(), ctx.one());
                prop_assert_eq!(a.pow(p - 1), ctx.one());
            }
        }
    }
}
