//! Simultaneous similarity and polynomial similarity of matrix pairs.
//!
//! Similarity of `P1` and `P2` is decided by computing the linear space of
//! intertwiners and looking for an invertible element in it. Two sound
//! certificates can reject before any search: the rank profile of a fixed
//! word list, and dimension mismatches among invariant subspaces and
//! intertwiner spaces.

mod flag;
pub mod search;

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldCtx;
use crate::matrix::{Mat, MatError};
use crate::pair::{apply_equivalence, check_n23, quad_coeff_count, quad_coeffs_at, MatPair, PairError, QuadCoeffs};

pub use flag::{compare_flags, Flag, FlagPair, GradedProjection, Subspace};
pub use search::{InvertibleSearch, SearchConfig, SearchOutcome, StrategyRegistry, DEFAULT_EXHAUSTIVE_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("pairs have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("pairs live over different fields")]
    FieldMismatch,
    #[error("unknown search strategy {0:?}")]
    UnknownStrategy(String),
    #[error("witness failed re-verification")]
    WitnessRejected,
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// Basis of `{S : A2 S = S A1, B2 S = S B1}` for pairs `P1`, `P2`.
#[derive(Debug, Clone)]
pub struct IntertwinerSpace {
    pub n: usize,
    pub ctx: FieldCtx,
    pub basis: Vec<Mat>,
    /// Adapted flag bases when the invariant flags of both pairs agree.
    pub flags: Option<FlagPair>,
}

impl IntertwinerSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, s: &Mat, p1: &MatPair, p2: &MatPair) -> bool {
        intertwines(s, p1, p2)
    }
}

/// `A2 S = S A1` and `B2 S = S B1`.
pub fn intertwines(s: &Mat, p1: &MatPair, p2: &MatPair) -> bool {
    s.shape() == (p1.size(), p2.size()) && p2.a() * s == s * p1.a() && p2.b() * s == s * p1.b()
}

fn check_compatible(p1: &MatPair, p2: &MatPair) -> Result<(), SimilarityError> {
    if p1.size() != p2.size() {
        return Err(SimilarityError::SizeMismatch(p1.size(), p2.size()));
    }
    if p1.ctx() != p2.ctx() {
        return Err(SimilarityError::FieldMismatch);
    }
    Ok(())
}

/// Solves the `2n^2 x n^2` linear system for the intertwiners from `P1`
/// to `P2`. Unknown `S[i][j]` has index `i n + j`.
pub fn intertwiner_space(p1: &MatPair, p2: &MatPair) -> Result<IntertwinerSpace, SimilarityError> {
    check_compatible(p1, p2)?;
    let ctx = p1.ctx();
    let n = p1.size();
    let nn = n * n;
    let mut system = vec![0u32; 2 * nn * nn];
    for (block, (x1, x2)) in [(p1.a(), p2.a()), (p1.b(), p2.b())].into_iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = (block * nn + i * n + j) * nn;
                // (X2 S)_ij = sum_k X2[i][k] S[k][j]
                for k in 0..n {
                    let c = x2.raw(i, k);
                    if c != 0 {
                        let at = row + k * n + j;
                        system[at] = ctx.add_raw(system[at], c);
                    }
                }
                // (S X1)_ij = sum_k S[i][k] X1[k][j]
                for k in 0..n {
                    let c = x1.raw(k, j);
                    if c != 0 {
                        let at = row + i * n + k;
                        system[at] = ctx.sub_raw(system[at], c);
                    }
                }
            }
        }
    }
    let equations = Mat::from_raw(ctx, 2 * nn, nn, system);
    let basis = equations
        .kernel_basis()
        .into_iter()
        .map(|v| Mat::from_raw(ctx, n, n, v.as_slice().to_vec()))
        .collect();
    let flags = FlagPair::new(p1, p2).ok();
    Ok(IntertwinerSpace { n, ctx, basis, flags })
}

/// `(S^{-1} A S, S^{-1} B S)`.
pub fn conjugate_pair(pair: &MatPair, s: &Mat) -> Result<MatPair, SimilarityError> {
    let s_inv = s.inverse()?;
    Ok(MatPair::new(
        pair.a().conjugate_by(s, &s_inv)?,
        pair.b().conjugate_by(s, &s_inv)?,
    )?)
}

/// Reason a non-similarity verdict is certain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// The rank of some word differs.
    RankProfile { word: usize },
    /// Invariant subspaces of different dimension.
    InvariantFlag { step: usize },
    /// `dim Hom(P2, P1)` differs from `dim End(P1)` or `dim End(P2)`.
    IntertwinerDimension { hom: usize, end1: usize, end2: usize },
    /// The intertwiner space was searched completely.
    Search { method: String, checked: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimilarityVerdict {
    /// `S^{-1} A1 S = A2` and `S^{-1} B1 S = B2`.
    Similar {
        witness: Mat,
    },
    NotSimilarCertified(Certificate),
    /// Sampling missed; `failure_bound` bounds the probability of missing
    /// an existing invertible intertwiner.
    NotSimilarProbabilistic {
        trials: u64,
        failure_bound: f64,
    },
    /// Neither a witness nor a certificate was obtained.
    Inconclusive {
        reason: String,
    },
}

impl SimilarityVerdict {
    pub fn is_similar(&self) -> bool {
        matches!(self, SimilarityVerdict::Similar { .. })
    }

    pub fn is_certified(&self) -> bool {
        matches!(
            self,
            SimilarityVerdict::Similar { .. } | SimilarityVerdict::NotSimilarCertified(_)
        )
    }

    pub fn witness(&self) -> Option<&Mat> {
        match self {
            SimilarityVerdict::Similar { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SimilarityVerdict::Similar { .. } => "similar",
            SimilarityVerdict::NotSimilarCertified(_) => "not-similar-certified",
            SimilarityVerdict::NotSimilarProbabilistic { .. } => "not-similar-probabilistic",
            SimilarityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Number of words in [`pair_rank_profile`].
pub const PROFILE_WORDS: usize = 16;

/// Ranks of, in order:
/// `A, B, A^2, B^2, AB, BA, AB^2, B^2A, B^3, A+B, (A+B)^2, A-B, A+B^2,
/// AB-BA, [A; B], [A | B]` where the last two are the vertical and
/// horizontal concatenations. All are invariant under simultaneous
/// conjugation, so a mismatch rules out similarity.
pub fn pair_rank_profile(pair: &MatPair) -> Vec<usize> {
    let (a, b) = (pair.a(), pair.b());
    let a2 = a * a;
    let b2 = b * b;
    let ab = a * b;
    let ba = b * a;
    let s = a + b;
    let words = [
        a.clone(),
        b.clone(),
        a2,
        b2.clone(),
        ab.clone(),
        ba.clone(),
        a * &b2,
        &b2 * a,
        &b2 * b,
        s.clone(),
        &s * &s,
        a - b,
        a + &b2,
        &ab - &ba,
        a.vcat(b).expect("same width"),
        a.hcat(b).expect("same height"),
    ];
    words.iter().map(Mat::rank).collect()
}

/// Search knobs shared by the decision procedures.
#[derive(Clone, Debug)]
pub struct Engine {
    pub strategy: String,
    pub registry: StrategyRegistry,
    pub config: SearchConfig,
    /// Apply the intertwiner dimension certificate (three solves instead
    /// of one).
    pub dimension_certificate: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            strategy: "auto".to_string(),
            registry: StrategyRegistry::default(),
            config: SearchConfig::default(),
            dimension_certificate: true,
        }
    }
}

impl Engine {
    pub fn with_strategy(mut self, name: &str) -> Self {
        self.strategy = name.to_string();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.config.budget = budget;
        self
    }

    fn strategy(&self) -> Result<std::sync::Arc<dyn InvertibleSearch>, SimilarityError> {
        self.registry
            .get(&self.strategy)
            .ok_or_else(|| SimilarityError::UnknownStrategy(self.strategy.clone()))
    }

    /// Decides whether `P1` and `P2` are simultaneously similar.
    pub fn are_similar_pairs(&self, p1: &MatPair, p2: &MatPair) -> Result<SimilarityVerdict, SimilarityError> {
        check_compatible(p1, p2)?;
        let strategy = self.strategy()?;
        let prof1 = pair_rank_profile(p1);
        let prof2 = pair_rank_profile(p2);
        if let Some(word) = prof1.iter().zip(&prof2).position(|(x, y)| x != y) {
            return Ok(SimilarityVerdict::NotSimilarCertified(Certificate::RankProfile {
                word,
            }));
        }
        if let Err(step) = compare_flags(p2, p1) {
            return Ok(SimilarityVerdict::NotSimilarCertified(Certificate::InvariantFlag {
                step,
            }));
        }
        // Witnesses satisfy A1 S = S A2: intertwiners from P2 to P1.
        let space = intertwiner_space(p2, p1)?;
        if space.dim() == 0 {
            return Ok(SimilarityVerdict::NotSimilarCertified(Certificate::Search {
                method: "empty-span".into(),
                checked: 1,
            }));
        }
        if self.dimension_certificate {
            let end1 = intertwiner_space(p1, p1)?.dim();
            let end2 = intertwiner_space(p2, p2)?.dim();
            if end1 != space.dim() || end2 != space.dim() {
                return Ok(SimilarityVerdict::NotSimilarCertified(
                    Certificate::IntertwinerDimension {
                        hom: space.dim(),
                        end1,
                        end2,
                    },
                ));
            }
        }
        let verdict = match strategy.search(&space, &self.config) {
            SearchOutcome::Found(s) => {
                let s_inv = s.inverse().map_err(|_| SimilarityError::WitnessRejected)?;
                let ok = p1.a().conjugate_by(&s, &s_inv)? == *p2.a() && p1.b().conjugate_by(&s, &s_inv)? == *p2.b();
                if !ok {
                    return Err(SimilarityError::WitnessRejected);
                }
                SimilarityVerdict::Similar { witness: s }
            }
            SearchOutcome::Absent { method, checked } => SimilarityVerdict::NotSimilarCertified(Certificate::Search {
                method: method.into(),
                checked,
            }),
            SearchOutcome::Missed {
                trials,
                failure_bound: Some(b),
            } => SimilarityVerdict::NotSimilarProbabilistic {
                trials,
                failure_bound: b,
            },
            SearchOutcome::Missed {
                trials,
                failure_bound: None,
            } => SimilarityVerdict::Inconclusive {
                reason: format!("{trials} random trials missed and n >= p makes the sampling bound vacuous"),
            },
            SearchOutcome::Declined { reason } => SimilarityVerdict::Inconclusive { reason },
        };
        Ok(verdict)
    }

    /// Decides polynomial similarity of two pairs satisfying
    /// `A^2 = 0, B^3 = 0, AB^2 = 0`: is some quadratic substitution of
    /// `P1` similar to `P2`?
    ///
    /// Substitutions are tried in enumeration order, possibly in parallel;
    /// the witness with the lowest index is reported regardless of
    /// scheduling. Each substitution's search is seeded from
    /// `(seed, index)`.
    pub fn are_poly_similar(&self, p1: &MatPair, p2: &MatPair) -> Result<PolySimilarity, SimilarityError> {
        check_compatible(p1, p2)?;
        if !check_n23(p1) || !check_n23(p2) {
            return Err(PairError::NotN23.into());
        }
        self.strategy()?;
        let ctx = p1.ctx();
        if p1.is_zero() || p2.is_zero() {
            // f(0, 0) = 0 sends the zero pair to itself.
            let similar = p1.is_zero() && p2.is_zero();
            return Ok(PolySimilarity {
                similar,
                certified: true,
                witness: similar.then(|| (QuadCoeffs::identity(ctx), Mat::identity(ctx, p1.size()))),
                tried: 1,
                uncertified: 0,
            });
        }
        let count = quad_coeff_count(ctx);
        let target_profile = pair_rank_profile(p2);
        let uncertified = AtomicBool::new(false);
        let uncertified_count = std::sync::atomic::AtomicU64::new(0);
        let failure: std::sync::Mutex<Option<SimilarityError>> = std::sync::Mutex::new(None);
        let hit = (0..count).into_par_iter().find_map_first(|index| {
            let q = quad_coeffs_at(ctx, index).expect("index in range");
            let image = match apply_equivalence(p1, &q) {
                Ok(img) => img,
                Err(e) => {
                    *failure.lock().unwrap() = Some(e.into());
                    return None;
                }
            };
            if pair_rank_profile(&image) != target_profile {
                return None;
            }
            let mut engine = self.clone();
            engine.config.seed = self.config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index);
            match engine.are_similar_pairs(&image, p2) {
                Ok(SimilarityVerdict::Similar { witness }) => Some((index, q, witness)),
                Ok(v) => {
                    if !v.is_certified() {
                        uncertified.store(true, Ordering::Relaxed);
                        uncertified_count.fetch_add(1, Ordering::Relaxed);
                    }
                    None
                }
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    None
                }
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok(match hit {
            Some((index, q, s)) => PolySimilarity {
                similar: true,
                certified: true,
                witness: Some((q, s)),
                tried: index + 1,
                uncertified: 0,
            },
            None => PolySimilarity {
                similar: false,
                certified: !uncertified.load(Ordering::Relaxed),
                witness: None,
                tried: count,
                uncertified: uncertified_count.load(Ordering::Relaxed),
            },
        })
    }
}

/// Outcome of [`Engine::are_poly_similar`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolySimilarity {
    pub similar: bool,
    /// False when some substitution got only a probabilistic or
    /// inconclusive answer.
    pub certified: bool,
    /// `(q, S)` with `S^{-1} P1_q S = P2`.
    pub witness: Option<(QuadCoeffs, Mat)>,
    /// Substitutions up to and including the witness (or all of them).
    pub tried: u64,
    /// Substitutions without a certified answer.
    pub uncertified: u64,
}

/// [`Engine::are_similar_pairs`] with default settings.
pub fn are_similar_pairs(
    p1: &MatPair,
    p2: &MatPair,
    budget: u64,
    seed: u64,
) -> Result<SimilarityVerdict, SimilarityError> {
    Engine::default()
        .with_budget(budget)
        .with_seed(seed)
        .are_similar_pairs(p1, p2)
}

/// [`Engine::are_poly_similar`] with default settings.
pub fn are_poly_similar(p1: &MatPair, p2: &MatPair, budget: u64, seed: u64) -> Result<PolySimilarity, SimilarityError> {
    Engine::default()
        .with_budget(budget)
        .with_seed(seed)
        .are_poly_similar(p1, p2)
}

/// Looks for an invertible element with the default `auto` strategy.
pub fn find_invertible(space: &IntertwinerSpace, budget: u64, seed: u64) -> SearchOutcome {
    let cfg = SearchConfig {
        budget,
        seed,
        ..SearchConfig::default()
    };
    search::Auto.search(space, &cfg)
}
