//! Exact GF(p) tools for simultaneous similarity and polynomial similarity
//! of pairs of commuting nilpotent matrices.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`]: prime field arithmetic.
//! * [`matrix`]: dense exact linear algebra and block layouts.
//! * [`pair`]: matrix pairs, polynomial evaluation, quadratic substitutions.
//! * [`similarity`]: intertwiner spaces and the similarity decision
//!   procedures, with pluggable search strategies.
//! * [`construction`]: the parametrised 13n x 13n and 3n x 3n pairs.
//! * [`lemma`]: the explicit conjugation chain normalising substituted pairs.
//! * [`theorem`]: end-to-end checks relating base pairs to constructed pairs.
//! * [`sample`]: seeded random matrices, unipotent bases and substitutions.
//! * [`io`] and [`cli`]: text formats and the command-line driver.

pub mod cli;
pub mod construction;
pub mod field;
pub mod io;
pub mod lemma;
pub mod matrix;
pub mod pair;
pub mod sample;
pub mod similarity;
pub mod theorem;

pub use construction::{build_e1_pair, build_p0, build_t, build_w, is_in_e1, lift_similarity, BasePair, P0Pair};
pub use field::{FieldCtx, FieldElem, FieldError};
pub use lemma::{verify_lemma1, Lemma1Trace};
pub use matrix::{assemble_blocks, extract_block, BlockLayout, BlockMap, Mat, MatError};
pub use pair::{
    apply_equivalence, check_admissible, check_commuting, check_n23, enumerate_quad_coeffs, eval_poly_pair,
    quad_to_polys, BivarPoly, MatPair, PairError, QuadCoeffs,
};
pub use similarity::{
    are_poly_similar, are_similar_pairs, conjugate_pair, find_invertible, intertwiner_space, pair_rank_profile, Engine,
    IntertwinerSpace, PolySimilarity, SimilarityError, SimilarityVerdict,
};
pub use theorem::{
    recover_base_similarity, verify_converse, verify_e1_wildness, verify_forward, TheoremError, TheoremInstance,
};
