use pairlab::io::{parse_matrix, parse_pair, parse_poly, write_matrix, write_pair, write_poly};
use pairlab::sample::{random_e1_base, random_invertible, random_matrix, rng_from_seed};
use pairlab::similarity::Certificate;
use pairlab::theorem::{verify_e1_wildness, TheoremInstance};
use pairlab::*;
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 101, 65521, 2147483647])
}

fn matrix() -> impl Strategy<Value = Mat> {
    (prime(), 0usize..6, 0usize..6).prop_flat_map(|(p, r, c)| {
        prop::collection::vec(0..p, r * c).prop_map(move |v| Mat::from_vec(FieldCtx::new(p).unwrap(), r, c, v).unwrap())
    })
}

proptest! {
    #[test]
    fn matrix_text_round_trip(m in matrix()) {
        let text = write_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(write_matrix(&back), text);
    }

    #[test]
    fn poly_text_round_trip(terms in prop::collection::vec((0u64..7, 0u32..5, 0u32..5), 0..10)) {
        let ctx = FieldCtx::new(7).unwrap();
        let f = BivarPoly::from_terms(ctx, terms.iter().map(|&(c, i, j)| (ctx.elem(c), i, j)));
        prop_assert_eq!(parse_poly(ctx, &write_poly(&f)).unwrap(), f);
    }

    #[test]
    fn constructed_pairs_lie_in_n23(seed in any::<u64>(), n in 1usize..5, p in prop::sample::select(vec![2u64, 3, 5, 7, 101])) {
        let ctx = FieldCtx::new(p).unwrap();
        let mut rng = rng_from_seed(seed);
        let base = BasePair::new(random_matrix(&mut rng, ctx, n, n), random_matrix(&mut rng, ctx, n, n)).unwrap();
        let p0 = build_p0(&base).unwrap();
        prop_assert!(check_n23(&p0.pair));
        prop_assert_eq!(parse_pair(&write_pair(&p0.pair)).unwrap(), p0.pair);
    }

    #[test]
    fn lift_conjugates(seed in any::<u64>(), n in 1usize..4) {
        let ctx = FieldCtx::new(5).unwrap();
        let mut rng = rng_from_seed(seed);
        let b1 = BasePair::new(random_matrix(&mut rng, ctx, n, n), random_matrix(&mut rng, ctx, n, n)).unwrap();
        let x = random_invertible(&mut rng, ctx, n);
        let b2 = b1.conjugate(&x).unwrap();
        let s = lift_similarity(&x, &b1, &b2).unwrap();
        prop_assert_eq!(conjugate_pair(&build_p0(&b1).unwrap().pair, &s).unwrap(), build_p0(&b2).unwrap().pair);
        let e1 = build_e1_pair(&b1);
        let big = Mat::block_diag(ctx, &[x.clone(), x.clone(), x]);
        prop_assert_eq!(conjugate_pair(&e1, &big).unwrap(), build_e1_pair(&b2));
    }

    #[test]
    fn lift_rejects_non_conjugators(seed in any::<u64>()) {
        let ctx = FieldCtx::new(3).unwrap();
        let mut rng = rng_from_seed(seed);
        let b1 = BasePair::new(random_matrix(&mut rng, ctx, 2, 2), random_matrix(&mut rng, ctx, 2, 2)).unwrap();
        let x = random_invertible(&mut rng, ctx, 2);
        let b2 = b1.conjugate(&x).unwrap();
        let y = random_invertible(&mut rng, ctx, 2);
        if b1.conjugate(&y).unwrap() != b2 {
            prop_assert!(lift_similarity(&y, &b1, &b2).is_err());
        }
    }
}

/// Similarity verdicts are symmetric and agree with rank profiles.
#[test]
fn verdicts_symmetric_and_profile_consistent() {
    let mut rng = rng_from_seed(21);
    for p in [2u64, 3, 5] {
        let ctx = FieldCtx::new(p).unwrap();
        for trial in 0..30 {
            let n = 2 + trial % 3;
            let p1 = MatPair::new(random_matrix(&mut rng, ctx, n, n), random_matrix(&mut rng, ctx, n, n)).unwrap();
            let p2 = if trial % 2 == 0 {
                conjugate_pair(&p1, &random_invertible(&mut rng, ctx, n)).unwrap()
            } else {
                MatPair::new(random_matrix(&mut rng, ctx, n, n), random_matrix(&mut rng, ctx, n, n)).unwrap()
            };
            let fwd = are_similar_pairs(&p1, &p2, 64, 1).unwrap();
            let back = are_similar_pairs(&p2, &p1, 64, 1).unwrap();
            assert_eq!(fwd.is_similar(), back.is_similar());
            if let Some(s) = fwd.witness() {
                assert_eq!(conjugate_pair(&p1, s).unwrap(), p2);
            }
            if pair_rank_profile(&p1) != pair_rank_profile(&p2) {
                assert!(matches!(
                    fwd,
                    SimilarityVerdict::NotSimilarCertified(Certificate::RankProfile { .. })
                ));
            }
            if trial % 2 == 0 {
                assert!(fwd.is_similar());
            }
        }
    }
}

/// Random-sampling mode never reports a false positive and bounds misses.
#[test]
fn random_strategy_is_sound() {
    let ctx = FieldCtx::new(101).unwrap();
    let mut rng = rng_from_seed(4);
    let engine = Engine::default().with_strategy("random").with_budget(16);
    for _ in 0..10 {
        let p1 = MatPair::new(random_matrix(&mut rng, ctx, 3, 3), random_matrix(&mut rng, ctx, 3, 3)).unwrap();
        let p2 = conjugate_pair(&p1, &random_invertible(&mut rng, ctx, 3)).unwrap();
        assert!(engine.are_similar_pairs(&p1, &p2).unwrap().is_similar());
    }
    let j = Mat::jordan_nilpotent(ctx, 3);
    let z = Mat::zeros(ctx, 3, 3);
    let a = MatPair::new(j.clone(), z.clone()).unwrap();
    let b = MatPair::new(z, j).unwrap();
    assert!(!engine.are_similar_pairs(&a, &b).unwrap().is_similar());
}

/// Base similarity iff similarity of the unitriangular 3n x 3n pairs.
#[test]
fn e1_iff_on_random_unipotent_bases() {
    let engine = Engine::default();
    let mut rng = rng_from_seed(8);
    for p in [2u64, 3] {
        let ctx = FieldCtx::new(p).unwrap();
        for trial in 0..12 {
            let b1 = random_e1_base(&mut rng, ctx, 2);
            let b2 = if trial % 2 == 0 {
                b1.conjugate(&random_invertible(&mut rng, ctx, 2)).unwrap()
            } else {
                random_e1_base(&mut rng, ctx, 2)
            };
            let r = verify_e1_wildness(&b1, &b2, &engine).unwrap();
            assert!(r.certified());
            assert_eq!(r.base.is_similar(), r.lifted.is_similar());
        }
    }
}

#[test]
fn mismatched_instances_are_rejected() {
    let k2 = FieldCtx::new(2).unwrap();
    let k3 = FieldCtx::new(3).unwrap();
    let b = |ctx, n| BasePair::new(Mat::identity(ctx, n), Mat::identity(ctx, n)).unwrap();
    assert!(TheoremInstance::new(b(k2, 1), b(k2, 2)).is_err());
    assert!(TheoremInstance::new(b(k2, 1), b(k3, 1)).is_err());
    let p = |ctx| build_p0(&b(ctx, 1)).unwrap().pair;
    assert!(are_similar_pairs(&p(k2), &p(k3), 8, 0).is_err());
}
