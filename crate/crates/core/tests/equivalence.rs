use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rxtx_core::bench::normal_matrix;
use rxtx_core::{
    naive_gram, naive_multiply, rxtx_gram, strassen_xxt_gram, DenseMatrix, ExactInt, GemmBackend, GramOptions,
    PlanKind,
};

fn backends() -> Vec<GemmBackend> {
    vec![GemmBackend::naive(), GemmBackend::strassen_winograd(2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_grams_match_naive(
        n in 1usize..=32,
        m in 1usize..=32,
        cutoff in prop::sample::select(vec![1usize, 2, 4]),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::<ExactInt>::random_int(n, m, -9, 9, &mut rng);
        let want = naive_gram(&x).unwrap();
        prop_assert_eq!(&want, &naive_multiply(&x, &x.transpose()).unwrap());
        for be in backends() {
            for kind in [PlanKind::Direct, PlanKind::Optimized] {
                let got = rxtx_gram(&x, GramOptions::cutoff(cutoff), &be, kind).unwrap();
                prop_assert!(got.is_symmetric());
                prop_assert_eq!(&got, &want);
            }
            let s = strassen_xxt_gram(&x, GramOptions::cutoff(cutoff), &be).unwrap();
            prop_assert_eq!(&s, &want);
        }
    }
}

#[test]
fn float_accuracy_full_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [64usize, 256] {
        let x = normal_matrix(n, &mut rng);
        let want = naive_gram(&x).unwrap();
        let got = rxtx_gram(&x, GramOptions::cutoff(1), &GemmBackend::naive(), PlanKind::Optimized).unwrap();
        let err = got.relative_frobenius_error(&want);
        assert!(err <= 1e-10, "n={n}: {err}");
        assert!(got.is_symmetric());
    }
}

#[cfg(feature = "external")]
#[test]
fn external_backend_depth_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = normal_matrix(96, &mut rng);
    let want = naive_gram(&x).unwrap();
    let got = rxtx_gram(&x, GramOptions::depth(1), &GemmBackend::external(), PlanKind::Optimized).unwrap();
    assert!(got.relative_frobenius_error(&want) <= 1e-12);
}
