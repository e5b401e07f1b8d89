//! End-to-end checks relating base pairs to their constructed pairs.
//!
//! Two base pairs `b1`, `b2` are simultaneously similar iff `P0(b1)` and
//! `P0(b2)` are polynomially similar (for unipotent bases), and iff the
//! unitriangular 3n x 3n pairs built from them are similar. The checks
//! here never assume either statement: they run the decision procedures on
//! both sides, and on every positive polynomial-similarity answer they
//! replay the structural argument on the concrete witness and extract a
//! base similarity from it.
//!
//! Orientation: a witness `(q, S')` satisfies `S'^{-1} P0(b1)_q S' = P0(b2)`.
//! After normalising with `C = D Z` (see [`crate::lemma`]),
//! `S = C^{-1} S'` satisfies `A0 S = S A0` and `B0hat(b1) S = S B0(b2)`.

use serde::Serialize;
use thiserror::Error;

use crate::construction::ConstructionError;
use crate::construction::{build_e1_pair, build_p0, build_t, build_w, lift_similarity, p0_layout, BasePair};
use crate::field::FieldCtx;
use crate::lemma::{assemble_a0f_b0g, normaliser, LemmaError};
use crate::matrix::{extract_block, BlockLayout, Mat, MatError};
use crate::pair::QuadCoeffs;
use crate::similarity::{Engine, PolySimilarity, SimilarityError, SimilarityVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("scalar law fails: beta^3 = {beta_cubed} but alpha^2 = {alpha_squared}")]
    ScalarLaw { beta_cubed: u32, alpha_squared: u32 },
    #[error("recovered block is singular")]
    SingularRecovery,
    #[error("recovered matrix does not conjugate the base pairs")]
    RecoveryRejected,
    #[error("structural equation fails on the witness: {0}")]
    ProofEquation(&'static str),
    #[error("implication violated: {0}")]
    ImplicationViolated(String),
    #[error("witness has wrong size: expected {expected}, got {got:?}")]
    WitnessShape { expected: usize, got: (usize, usize) },
    #[error("bases differ in size or field")]
    Incompatible,
    #[error(transparent)]
    Lemma(#[from] LemmaError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Two base pairs of equal size over one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremInstance {
    pub base1: BasePair,
    pub base2: BasePair,
}

impl TheoremInstance {
    pub fn new(base1: BasePair, base2: BasePair) -> Result<Self, TheoremError> {
        if base1.size() != base2.size() || base1.ctx() != base2.ctx() {
            return Err(TheoremError::Incompatible);
        }
        Ok(Self { base1, base2 })
    }

    pub fn size(&self) -> usize {
        self.base1.size()
    }

    pub fn ctx(&self) -> FieldCtx {
        self.base1.ctx()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofCheck {
    pub name: &'static str,
    pub holds: bool,
}

/// The normalised witness and every structural equation evaluated on it.
#[derive(Debug, Clone)]
pub struct ProofTrace {
    pub q: QuadCoeffs,
    pub normalised: Mat,
    pub checks: Vec<ProofCheck>,
    /// `X` with `X^{-1} M1 X = M2`, `X^{-1} N1 X = N2`.
    pub recovered: Mat,
}

impl ProofTrace {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// `S = (D Z)^{-1} S'` for a witness `(q, S')` of `P0(base1)_q ~ P0(base2)`.
pub fn normalize_witness(base1: &BasePair, q: &QuadCoeffs, s_prime: &Mat) -> Result<Mat, TheoremError> {
    let dim = 13 * base1.size();
    if s_prime.shape() != (dim, dim) {
        return Err(TheoremError::WitnessShape {
            expected: dim,
            got: s_prime.shape(),
        });
    }
    let (_, c_inv) = normaliser(base1, q)?;
    Ok(&c_inv * s_prime)
}

fn coarse_layout(n: usize) -> BlockLayout {
    p0_layout(n).coarsen(&[3, 1, 3])
}

/// Evaluates the structural equations on a normalised witness `S` with
/// `A0 S = S A0` and `B0hat(hat) S = S B0(plain)`.
///
/// Checked, with `Y` the blocks of `S` on the seven stripes:
///
/// * the defining equations themselves;
/// * coarse shape on stripes `6n, n, 6n`: `S21 = S31 = S32 = 0`, `S33 = S11`;
/// * `S11 = [[Y11, Y12, Y13], [0, Y22, Y23], [0, 0, Y11]]`;
/// * `W Y22 = Y44 W`;
/// * `beta^3 T(hat) Y22 = alpha^2 Y22 T(plain)`;
/// * `Y22 = [[Z11, Z12], [Z21, Z22]]` with `Z12 = Z21 = 0`;
/// * `beta^2/alpha Y11 = Y22` and `Y34 = 0`.
pub fn check_proof_equations(
    s: &Mat,
    hat: &BasePair,
    plain: &BasePair,
    q: &QuadCoeffs,
) -> Result<Vec<ProofCheck>, TheoremError> {
    let n = hat.size();
    let ctx = hat.ctx();
    let layout = p0_layout(n);
    if s.shape() != (13 * n, 13 * n) {
        return Err(TheoremError::WitnessShape {
            expected: 13 * n,
            got: s.shape(),
        });
    }
    let sub = assemble_a0f_b0g(hat, q)?;
    let (c, c_inv) = normaliser(hat, q)?;
    let a0 = sub.a().conjugate_by(&c, &c_inv)?;
    let b_hat = sub.b().conjugate_by(&c, &c_inv)?;
    let b_plain = build_p0(plain)?.pair.b().clone();

    let mut checks = Vec::new();
    let mut push = |name: &'static str, holds: bool| checks.push(ProofCheck { name, holds });
    push("A0 S = S A0", &a0 * s == s * &a0);
    push("B0hat S = S B0", &b_hat * s == s * &b_plain);

    let coarse = coarse_layout(n);
    let cb = |i, j| extract_block(s, &coarse, i, j);
    push("S21 = 0", cb(2, 1)?.is_zero());
    push("S31 = 0", cb(3, 1)?.is_zero());
    push("S32 = 0", cb(3, 2)?.is_zero());
    push("S33 = S11", cb(3, 3)? == cb(1, 1)?);

    let y = |i, j| extract_block(s, &layout, i, j);
    push("Y21 = 0", y(2, 1)?.is_zero());
    push("Y31 = 0", y(3, 1)?.is_zero());
    push("Y32 = 0", y(3, 2)?.is_zero());
    push("Y33 = Y11", y(3, 3)? == y(1, 1)?);

    let y11 = y(1, 1)?;
    let y22 = y(2, 2)?;
    let y44 = y(4, 4)?;
    let w = build_w(ctx, n)?;
    push("W Y22 = Y44 W", &w * &y22 == &y44 * &w);

    let (alpha, beta) = (q.alpha(), q.beta());
    let lhs = (&build_t(hat) * &y22).scale(beta.pow(3));
    let rhs = (&y22 * &build_t(plain)).scale(alpha * alpha);
    push("beta^3 T(hat) Y22 = alpha^2 Y22 T(plain)", lhs == rhs);

    push("Z12 = 0", y22.submatrix(0, n, n, n).is_zero());
    push("Z21 = 0", y22.submatrix(n, 0, n, n).is_zero());
    let ratio = (beta * beta).try_div(alpha).map_err(MatError::from)?;
    push("beta^2/alpha Y11 = Y22", y11.scale(ratio) == y22);
    push("Y34 = 0", y(3, 4)?.is_zero());
    Ok(checks)
}

/// Extracts `X = Z22` from a normalised witness and checks
/// `X^{-1} M(hat) X = M(plain)`, `X^{-1} N(hat) X = N(plain)`.
pub fn recover_base_similarity(s: &Mat, q: &QuadCoeffs, hat: &BasePair, plain: &BasePair) -> Result<Mat, TheoremError> {
    let n = hat.size();
    if s.shape() != (13 * n, 13 * n) {
        return Err(TheoremError::WitnessShape {
            expected: 13 * n,
            got: s.shape(),
        });
    }
    if !q.satisfies_scalar_law() {
        let (a, b) = (q.alpha(), q.beta());
        return Err(TheoremError::ScalarLaw {
            beta_cubed: b.pow(3).value(),
            alpha_squared: (a * a).value(),
        });
    }
    let y22 = extract_block(s, &p0_layout(n), 2, 2)?;
    let x = y22.submatrix(n, n, n, n);
    let x_inv = x.inverse().map_err(|_| TheoremError::SingularRecovery)?;
    if plain.m != hat.m.conjugate_by(&x, &x_inv)? || plain.n != hat.n.conjugate_by(&x, &x_inv)? {
        return Err(TheoremError::RecoveryRejected);
    }
    Ok(x)
}

/// Normalises a polynomial-similarity witness, checks every structural
/// equation and recovers the base similarity.
pub fn replay_witness(instance: &TheoremInstance, q: &QuadCoeffs, s_prime: &Mat) -> Result<ProofTrace, TheoremError> {
    let normalised = normalize_witness(&instance.base1, q, s_prime)?;
    let checks = check_proof_equations(&normalised, &instance.base1, &instance.base2, q)?;
    if let Some(bad) = checks.iter().find(|c| !c.holds) {
        return Err(TheoremError::ProofEquation(bad.name));
    }
    let recovered = recover_base_similarity(&normalised, q, &instance.base1, &instance.base2)?;
    Ok(ProofTrace {
        q: *q,
        normalised,
        checks,
        recovered,
    })
}

/// Lifts `X` (with `X^{-1} M1 X = M2`, `X^{-1} N1 X = N2`) to the
/// constructed pairs and replays the lift through the structural checks
/// with the identity substitution.
pub fn lift_check(instance: &TheoremInstance, x: &Mat) -> Result<(Mat, ProofTrace), TheoremError> {
    let lifted = lift_similarity(x, &instance.base1, &instance.base2)?;
    let trace = replay_witness(instance, &QuadCoeffs::identity(instance.ctx()), &lifted)?;
    Ok((lifted, trace))
}

/// Outcome of the forward direction on one instance.
#[derive(Debug, Clone)]
pub struct ForwardReport {
    /// `diag(X2, X2, X2, X, X2, X2, X2)`, verified to conjugate the
    /// constructed pairs.
    pub lifted: Mat,
    /// The structural replay of the lifted witness with `q = identity`.
    pub trace: ProofTrace,
    pub poly: PolySimilarity,
}

/// Given `X` with `X^{-1} M1 X = M2`, `X^{-1} N1 X = N2`: lifts `X`, replays
/// the lift through the structural checks and confirms the decision
/// procedure reports polynomial similarity.
pub fn verify_forward(instance: &TheoremInstance, x: &Mat, engine: &Engine) -> Result<ForwardReport, TheoremError> {
    let (lifted, trace) = lift_check(instance, x)?;
    let p1 = build_p0(&instance.base1)?.pair;
    let p2 = build_p0(&instance.base2)?.pair;
    let poly = engine.are_poly_similar(&p1, &p2)?;
    if !poly.similar {
        return Err(TheoremError::ImplicationViolated(
            "similar bases but constructed pairs reported not polynomially similar".into(),
        ));
    }
    if let Some((q, s)) = &poly.witness {
        replay_witness(instance, q, s)?;
    }
    Ok(ForwardReport { lifted, trace, poly })
}

/// Outcome of running both decision procedures on one instance.
#[derive(Debug, Clone)]
pub struct ConverseReport {
    pub base: SimilarityVerdict,
    pub poly: PolySimilarity,
    /// Present exactly when `poly.similar`.
    pub trace: Option<ProofTrace>,
}

impl ConverseReport {
    /// Both sides decided with certainty.
    pub fn certified(&self) -> bool {
        self.base.is_certified() && self.poly.certified
    }

    pub fn consistent(&self) -> bool {
        !self.certified() || self.base.is_similar() == self.poly.similar
    }
}

/// Decides base similarity and polynomial similarity of the constructed
/// pairs, replays any polynomial witness, and fails hard on a certified
/// disagreement.
pub fn verify_converse(instance: &TheoremInstance, engine: &Engine) -> Result<ConverseReport, TheoremError> {
    let base = engine.are_similar_pairs(&instance.base1.as_pair(), &instance.base2.as_pair())?;
    let p1 = build_p0(&instance.base1)?.pair;
    let p2 = build_p0(&instance.base2)?.pair;
    let poly = engine.are_poly_similar(&p1, &p2)?;
    let trace = match &poly.witness {
        Some((q, s)) => Some(replay_witness(instance, q, s)?),
        None => None,
    };
    if trace.is_some() && matches!(base, SimilarityVerdict::NotSimilarCertified(_)) {
        return Err(TheoremError::ImplicationViolated(
            "constructed pairs polynomially similar but bases certified not similar".into(),
        ));
    }
    if base.is_similar() && !poly.similar && poly.certified {
        return Err(TheoremError::ImplicationViolated(
            "similar bases but constructed pairs certified not polynomially similar".into(),
        ));
    }
    Ok(ConverseReport { base, poly, trace })
}

/// Outcome of comparing base similarity with similarity of the 3n x 3n
/// unitriangular pairs.
#[derive(Debug, Clone)]
pub struct E1Report {
    pub base: SimilarityVerdict,
    pub lifted: SimilarityVerdict,
    /// For similar bases, `diag(X, X, X)` checked against the 3n x 3n pairs.
    pub block_witness_ok: Option<bool>,
}

impl E1Report {
    pub fn certified(&self) -> bool {
        self.base.is_certified() && self.lifted.is_certified()
    }
}

/// Checks `b1 ~ b2` iff `(P, Q)(b1) ~ (P, Q)(b2)`; a certified
/// disagreement is an error.
pub fn verify_e1_wildness(b1: &BasePair, b2: &BasePair, engine: &Engine) -> Result<E1Report, TheoremError> {
    if b1.size() != b2.size() || b1.ctx() != b2.ctx() {
        return Err(TheoremError::Incompatible);
    }
    let base = engine.are_similar_pairs(&b1.as_pair(), &b2.as_pair())?;
    let lifted = engine.are_similar_pairs(&build_e1_pair(b1), &build_e1_pair(b2))?;
    if base.is_certified() && lifted.is_certified() && base.is_similar() != lifted.is_similar() {
        return Err(TheoremError::ImplicationViolated(format!(
            "bases {} but 3n x 3n pairs {}",
            base.label(),
            lifted.label()
        )));
    }
    let block_witness_ok = match base.witness() {
        Some(x) => {
            let ctx = b1.ctx();
            let big = Mat::block_diag(ctx, &[x.clone(), x.clone(), x.clone()]);
            let big_inv = big.inverse()?;
            let (e1, e2) = (build_e1_pair(b1), build_e1_pair(b2));
            Some(e1.a().conjugate_by(&big, &big_inv)? == *e2.a() && e1.b().conjugate_by(&big, &big_inv)? == *e2.b())
        }
        None => None,
    };
    if block_witness_ok == Some(false) {
        return Err(TheoremError::ImplicationViolated(
            "block-diagonal lift of the base witness fails".into(),
        ));
    }
    Ok(E1Report {
        base,
        lifted,
        block_witness_ok,
    })
}
