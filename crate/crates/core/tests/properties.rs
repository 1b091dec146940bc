use proptest::prelude::*;

use persistence_lab::estimate::persistence_ladder_mc;
use persistence_lab::harness::ExperimentConfig;
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};
use persistence_lab::simulate::Sampler;

fn kernel() -> impl Strategy<Value = CorrelationKernel> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|rate| CorrelationKernel::Exponential { rate }),
        (1.01f64..4.0).prop_map(|beta| CorrelationKernel::PolySummable { beta }),
        (0.51f64..0.99).prop_map(|hurst| CorrelationKernel::Fgn { hurst }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_values_lie_in_unit_interval(k in kernel(), lag in 0usize..10_000) {
        let r = k.at(lag);

        prop_assert!(r >= 0.0 && r <= 1.0, "rho({lag}) = {r}");
        if lag == 0 {
            prop_assert_eq!(r, 1.0);
        }
    }

    #[test]
    fn inverse_scale_undoes_scale(p in -0.45f64..2.0, t in 0.0f64..500.0) {
        let w = WeightSequence::Polynomial { p };
        let u = w.s_of(t).unwrap();
        let back = w.w_of(u).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t), "w(s({t})) = {back}");
    }

    #[test]
    fn persistence_shrinks_along_nested_prefixes(k in kernel(), seed in 0u64..1000) {
        let ladder = [1, 2, 4, 8, 16, 32];
        let sampler = Sampler::for_kernel(&k, 32, seed).unwrap();
        let est = persistence_ladder_mc(&sampler, &WeightSequence::ONES, &ladder, 2000, 0.0).unwrap();
        for pair in est.windows(2) {
            prop_assert!(pair[1].p() <= pair[0].p());
        }
    }

    #[test]
    fn persistence_grows_with_the_level(k in kernel(), seed in 0u64..1000) {
        let sampler = Sampler::for_kernel(&k, 16, seed).unwrap();
        let at = |level: f64| persistence_ladder_mc(&sampler, &WeightSequence::ONES, &[16], 2000, level).unwrap()[0].p();
        let (low, mid, high) = (at(-1.0), at(0.0), at(1.0));
        prop_assert!(low <= mid && mid <= high, "{low} {mid} {high}");
    }

    #[test]
    fn config_hash_ignores_formatting(seed in 0u64..1_000_000, level in -2.0f64..2.0) {
        let compact = format!(
            r#"{{"experiment_id":"x","kernel":"exp:lambda=1","level":{level},"n_ladder":[2,4],"seed":{seed},"method":"mc"}}"#
        );
        let spaced = compact.replace(',', ",\n    ").replace("\":", "\": ");
        let a = ExperimentConfig::from_json(&compact).unwrap();
        let b = ExperimentConfig::from_json(&spaced).unwrap();
        prop_assert_eq!(a.hash(), b.hash());
    }
}
