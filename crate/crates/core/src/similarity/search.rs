//! Strategies for finding an invertible element in a span of matrices.
//!
//! Each strategy implements [`InvertibleSearch`] and is looked up by name in
//! a [`StrategyRegistry`]. The built-in set is:
//!
//! * `exhaustive`: walks every linear combination when `p^dim` is within
//!   the limit; a miss is a certified absence.
//! * `random`: uniform random combinations. If an invertible element
//!   exists, the determinant restricted to the span is a nonzero polynomial
//!   of degree `n`, so each sample misses with probability at most `n/p`.
//! * `graded`: projects the span onto the diagonal blocks of an invariant
//!   flag and walks the (usually much smaller) image exhaustively.
//! * `auto`: exhaustive if small, otherwise random sampling followed by the
//!   graded walk.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flag::GradedProjection;
use super::IntertwinerSpace;
use crate::matrix::Mat;

/// Default bound on `p^dim` for exhaustive walks.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Random trials.
    pub budget: u64,
    pub seed: u64,
    /// Largest number of combinations an exhaustive walk may visit.
    pub exhaustive_limit: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 64,
            seed: 0,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

/// What a search established.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(Mat),
    /// Every element was examined (possibly through a projection that
    /// preserves invertibility); none is invertible.
    Absent {
        method: &'static str,
        checked: u64,
    },
    /// Sampling missed `trials` times; if an invertible element existed this
    /// would happen with probability at most `failure_bound` (when known).
    Missed {
        trials: u64,
        failure_bound: Option<f64>,
    },
    /// The strategy declined (space too large for it).
    Declined {
        reason: String,
    },
}

pub trait InvertibleSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn search(&self, space: &IntertwinerSpace, cfg: &SearchConfig) -> SearchOutcome;
}

/// Name-indexed set of strategies.
#[derive(Clone)]
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, Arc<dyn InvertibleSearch>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, strategy: Arc<dyn InvertibleSearch>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn InvertibleSearch>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Exhaustive));
        r.register(Arc::new(RandomSampling));
        r.register(Arc::new(Graded));
        r.register(Arc::new(Auto));
        r
    }
}

impl fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

/// Number of combinations `p^dim`, saturating.
pub fn span_size(p: u64, dim: usize) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..dim {
        acc = acc.saturating_mul(p);
    }
    acc
}

/// Invertibility test with a bit-packed path for GF(2).
pub fn is_invertible(m: &Mat) -> bool {
    if m.ctx().modulus() == 2 && m.is_square() && m.rows() <= 64 {
        gf2_invertible(m)
    } else {
        m.is_invertible()
    }
}

fn gf2_invertible(m: &Mat) -> bool {
    let n = m.rows();
    let mut rows: Vec<u64> = (0..n)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &v)| acc | ((v as u64 & 1) << j))
        })
        .collect();
    for c in 0..n {
        let bit = 1u64 << c;
        let Some(piv) = (c..n).find(|&r| rows[r] & bit != 0) else {
            return false;
        };
        rows.swap(c, piv);
        let pivot = rows[c];
        for r in rows.iter_mut().skip(c + 1) {
            if *r & bit != 0 {
                *r ^= pivot;
            }
        }
    }
    true
}

/// Walks every combination of `basis` in increasing order of
/// `sum c_i p^i` and returns the first one accepted by `accept`, together
/// with the number of combinations visited (the zero combination counts).
///
/// Incrementing one coefficient by 1 (including the wrap `p - 1 -> 0`)
/// always adds that basis element once, so each step is a single addition
/// per touched digit.
pub(crate) fn walk_span(
    basis: &[Mat],
    zero: Mat,
    p: u64,
    mut accept: impl FnMut(&Mat) -> bool,
) -> (Option<(Vec<u32>, Mat)>, u64) {
    let mut current = zero;
    let mut digits = vec![0u32; basis.len()];
    let mut visited = 1u64;
    if accept(&current) {
        return (Some((digits, current)), visited);
    }
    let one = current.ctx().one();
    loop {
        let mut k = 0;
        loop {
            if k == basis.len() {
                return (None, visited);
            }
            current.add_scaled(one, &basis[k]).expect("basis shapes agree");
            digits[k] += 1;
            if digits[k] as u64 == p {
                digits[k] = 0;
                k += 1;
            } else {
                break;
            }
        }
        visited += 1;
        if accept(&current) {
            return (Some((digits, current)), visited);
        }
    }
}

pub struct Exhaustive;

impl InvertibleSearch for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn search(&self, space: &IntertwinerSpace, cfg: &SearchConfig) -> SearchOutcome {
        let p = space.ctx.order();
        let total = span_size(p, space.dim());
        if total > cfg.exhaustive_limit {
            return SearchOutcome::Declined {
                reason: format!(
                    "{p}^{} combinations exceed the exhaustive limit {}",
                    space.dim(),
                    cfg.exhaustive_limit
                ),
            };
        }
        let zero = Mat::zeros(space.ctx, space.n, space.n);
        match walk_span(&space.basis, zero, p, is_invertible) {
            (Some((_, s)), _) => SearchOutcome::Found(s),
            (None, visited) => SearchOutcome::Absent {
                method: "exhaustive",
                checked: visited,
            },
        }
    }
}

pub struct RandomSampling;

impl RandomSampling {
    /// `(n/p)^t` when `n < p`; vacuous otherwise.
    pub fn failure_bound(n: usize, p: u64, trials: u64) -> Option<f64> {
        if (n as u64) < p {
            Some((n as f64 / p as f64).powf(trials as f64))
        } else {
            None
        }
    }
}

impl InvertibleSearch for RandomSampling {
    fn name(&self) -> &'static str {
        "random"
    }

    fn search(&self, space: &IntertwinerSpace, cfg: &SearchConfig) -> SearchOutcome {
        let p = space.ctx.order();
        if space.basis.is_empty() {
            return SearchOutcome::Absent {
                method: "empty-span",
                checked: 1,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.budget {
            let mut s = Mat::zeros(space.ctx, space.n, space.n);
            for b in &space.basis {
                let c = space.ctx.elem(rng.gen_range(0..p));
                s.add_scaled(c, b).expect("basis shapes agree");
            }
            if is_invertible(&s) {
                return SearchOutcome::Found(s);
            }
        }
        SearchOutcome::Missed {
            trials: cfg.budget,
            failure_bound: Self::failure_bound(space.n, p, cfg.budget),
        }
    }
}

pub struct Graded;

impl InvertibleSearch for Graded {
    fn name(&self) -> &'static str {
        "graded"
    }

    fn search(&self, space: &IntertwinerSpace, cfg: &SearchConfig) -> SearchOutcome {
        let Some(flags) = space.flags.as_ref() else {
            return SearchOutcome::Declined {
                reason: "space carries no invariant flags".into(),
            };
        };
        let projection = GradedProjection::new(space, flags);
        let p = space.ctx.order();
        let total = span_size(p, projection.image_dim());
        if total > cfg.exhaustive_limit {
            return SearchOutcome::Declined {
                reason: format!(
                    "{p}^{} graded combinations exceed the exhaustive limit {}",
                    projection.image_dim(),
                    cfg.exhaustive_limit
                ),
            };
        }
        match projection.find_invertible() {
            (Some(s), _) => SearchOutcome::Found(s),
            (None, visited) => SearchOutcome::Absent {
                method: "graded",
                checked: visited,
            },
        }
    }
}

pub struct Auto;

impl InvertibleSearch for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn search(&self, space: &IntertwinerSpace, cfg: &SearchConfig) -> SearchOutcome {
        let exhaustive = Exhaustive.search(space, cfg);
        if !matches!(exhaustive, SearchOutcome::Declined { .. }) {
            return exhaustive;
        }
        let sampled = RandomSampling.search(space, cfg);
        if matches!(sampled, SearchOutcome::Found(_)) {
            return sampled;
        }
        match Graded.search(space, cfg) {
            SearchOutcome::Declined { .. } => sampled,
            other => other,
        }
    }
}
