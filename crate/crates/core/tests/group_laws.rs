use nibe_core::bilinear::{Bls12Pairing, Counting, PairingGroup, ToyPairing};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn toy() -> ToyPairing {
    ToyPairing::default()
}

proptest! {
    #[test]
    fn toy_exponent_laws(a in 0u64..1009, b in 0u64..1009, x in 0u64..1009) {
        let g = toy();
        let base = g.source(x);
        let (sa, sb) = (g.scalar(a), g.scalar(b));
        prop_assert_eq!(
            g.exp(&base, &g.scalar_add(&sa, &sb)),
            g.mul(&g.exp(&base, &sa), &g.exp(&base, &sb))
        );
        prop_assert_eq!(g.exp(&g.exp(&base, &sa), &sb), g.exp(&base, &g.scalar_mul(&sa, &sb)));
        prop_assert_eq!(g.mul(&base, &g.inv(&base)), g.identity());
    }

    #[test]
    fn toy_bilinearity(a in 0u64..1009, b in 0u64..1009) {
        let g = toy();
        let gen = g.generator();
        let (sa, sb) = (g.scalar(a), g.scalar(b));
        let lhs = g.pair(&g.exp(&gen, &sa), &g.exp(&gen, &sb));
        let rhs = g.exp_target(&g.pair(&gen, &gen), &g.scalar_mul(&sa, &sb));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn toy_multi_exp_matches_naive(bases in prop::collection::vec(0u64..1009, 1..6), seed in any::<u64>()) {
        let g = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let exps: Vec<u64> = bases.iter().map(|_| rand::Rng::gen_range(&mut rng, 0..1u64 << 40)).collect();
        let bases: Vec<_> = bases.into_iter().map(|b| g.source(b)).collect();
        let naive = bases
            .iter()
            .zip(&exps)
            .fold(g.identity(), |acc, (b, &e)| g.mul(&acc, &g.exp(b, &g.scalar_from_u64(e))));
        prop_assert_eq!(g.multi_exp(&bases, &exps), naive);
    }

    #[test]
    fn toy_pair_product_matches_naive(xs in prop::collection::vec((0u64..1009, 0u64..1009), 1..5)) {
        let g = toy();
        let pts: Vec<_> = xs.iter().map(|&(a, b)| (g.source(a), g.source(b))).collect();
        let refs: Vec<_> = pts.iter().map(|(a, b)| (a, b)).collect();
        let naive = pts.iter().fold(g.target_identity(), |acc, (a, b)| g.mul_target(&acc, &g.pair(a, b)));
        prop_assert_eq!(g.pair_product(&refs), naive);
    }

    #[test]
    fn toy_serialization_round_trips(v in 0u64..1009) {
        let g = toy();
        prop_assert_eq!(g.deserialize_scalar(&g.serialize_scalar(&g.scalar(v))).unwrap(), g.scalar(v));
        prop_assert_eq!(g.deserialize_source(&g.serialize_source(&g.source(v))).unwrap(), g.source(v));
        prop_assert_eq!(g.deserialize_target(&g.serialize_target(&g.target(v))).unwrap(), g.target(v));
    }

    #[test]
    fn toy_rejects_out_of_range(v in 1009u64..) {
        let g = toy();
        prop_assert!(g.deserialize_source(&v.to_be_bytes()).is_err());
        prop_assert!(g.deserialize_target(&v.to_be_bytes()).is_err());
        prop_assert!(g.deserialize_scalar(&v.to_be_bytes()).is_err());
    }

    #[test]
    fn signed_scalars_reduce_correctly(v in -1_000_000i128..1_000_000) {
        let g = toy();
        let expected = g.scalar(v.rem_euclid(1009) as u64);
        prop_assert_eq!(g.scalar_from_i128(v), expected);
        prop_assert_eq!(g.scalar_add(&g.scalar_from_i128(v), &g.scalar_from_i128(-v)), g.scalar(0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn curve_laws_and_round_trips(seed in any::<u64>()) {
        let g = Bls12Pairing::new();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = (g.random_scalar(&mut rng), g.random_scalar(&mut rng));
        let x = g.random_source(&mut rng);
        prop_assert_eq!(g.exp(&x, &g.scalar_add(&a, &b)), g.mul(&g.exp(&x, &a), &g.exp(&x, &b)));

        let bytes = g.serialize_source(&x);
        prop_assert_eq!(bytes.len(), 144);
        prop_assert_eq!(g.deserialize_source(&bytes).unwrap(), x.clone());

        let t = g.pair(&x, &g.generator());
        let tb = g.serialize_target(&t);
        prop_assert_eq!(tb.len(), 576);
        prop_assert_eq!(g.deserialize_target(&tb).unwrap(), t);

        let sb = g.serialize_scalar(&a);
        prop_assert_eq!(sb.len(), 32);
        prop_assert_eq!(g.deserialize_scalar(&sb).unwrap(), a);
    }
}

#[test]
fn toy_scalars_are_uniform() {
    // 0.999 quantile of chi-square with 1008 degrees of freedom is about 1153.
    let g = toy();
    let mut rng = ChaCha20Rng::seed_from_u64(80);
    let draws = 100_000;
    let mut hist = vec![0u64; 1009];
    for _ in 0..draws {
        hist[g.random_scalar(&mut rng).value() as usize] += 1;
    }
    let expected = draws as f64 / 1009.0;
    let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 1153.0, "chi2 = {chi2}");
}

#[test]
fn counting_wrapper_is_transparent() {
    let inner = toy();
    let g = Counting::new(inner.clone());
    let x = inner.source(5);
    let y = g.exp(&x, &inner.scalar(7));
    assert_eq!(y, inner.exp(&inner.source(5), &inner.scalar(7)));
    assert_eq!(g.counts().exp, 1);
    g.reset();
    assert_eq!(g.counts().exp, 0);
}
