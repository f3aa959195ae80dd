use proptest::prelude::*;

use cornerlab::compressions::build_orthant;
use cornerlab::invariants::{chiral_index, Thresholds};
use cornerlab::model::ModelSpec;
use cornerlab::models;
use cornerlab::spectra::window_spectrum;

fn stack(a: &ModelSpec, b: &ModelSpec) -> ModelSpec {
    ModelSpec::new("stack", a.model.direct_sum(&b.model).unwrap(), a.symmetries.direct_sum(&b.symmetries).unwrap())
}

fn half_line_index(s: &ModelSpec, l: i64) -> i64 {
    let op = build_orthant(&s.model, 1, &[], l).unwrap();
    chiral_index(&op, s.symmetries.pi.as_ref().unwrap(), &Thresholds::for_window(l, 0.2)).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn particle_hole_pairs_spectrum(mu in -3.0f64..3.0, t in 0.2f64..1.5, delta in 0.1f64..1.5, l in 4i64..20) {
        let s = models::kitaev(mu, t, delta).unwrap();
        let e = window_spectrum(&build_orthant(&s.model, 1, &[], l).unwrap()).unwrap().eigenvalues;
        let n = e.len();
        for i in 0..n {
            prop_assert!((e[i] + e[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn chiral_index_adds_under_stacking(v1 in 0.1f64..0.6, v2 in 0.1f64..0.6, flip in any::<bool>()) {
        let a = models::ssh(v1, 1.0).unwrap();
        let b = if flip { models::ssh(1.0, v2).unwrap() } else { models::ssh(v2, 1.0).unwrap() };
        let sum = half_line_index(&a, 40) + half_line_index(&b, 40);
        prop_assert_eq!(half_line_index(&stack(&a, &b), 40), sum);
    }
}
