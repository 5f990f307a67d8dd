use num_complex::Complex64;
use proptest::prelude::*;

use interp_lab::discrete::{opnorm_interpolation_check, sw_equality_check, weighted_l1_opnorm, DiscreteCouple};
use interp_lab::fields::make_bump;
use interp_lab::norms::w1p_norm;
use interp_lab::quadrature::QuadratureSpec;
use interp_lab::weights::parse_weight;

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-3.0f64..3.0).prop_map(f64::exp), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_part_is_homogeneous(lambda in 0.1f64..10.0, p in 1.0f64..4.0) {
        let phi = make_bump(&[0.0], 1.0, 1.0).unwrap();
        let w = parse_weight("gauss:a=1", 1).unwrap();
        let spec = QuadratureSpec::default_for(1);
        let a = w1p_norm(&phi, &w, p, &spec).unwrap().value;
        let b = w1p_norm(&phi.scaled(lambda), &w, p, &spec).unwrap().value;
        prop_assert!((b - lambda * a).abs() <= 1e-9 * lambda * a);
    }

    #[test]
    fn discrete_family_attains_equality(
        (w0, w1, re, im) in (2usize..10).prop_flat_map(|n| (
            weights(n), weights(n),
            prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n),
        )),
        p in 1.0f64..4.0,
        theta in 0.05f64..0.95,
    ) {
        let phi: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        prop_assume!(phi.iter().any(|c| c.norm() > 1e-3));
        let couple = DiscreteCouple::new(w0, w1, p, p).unwrap();
        let r = sw_equality_check(&couple, theta, &phi).unwrap();
        prop_assert!(r.rel_error() <= 1e-10);
    }

    #[test]
    fn weighted_opnorm_interpolates(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        w0 in weights(4), w1 in weights(4),
        theta in 0.0f64..1.0,
    ) {
        let t = nalgebra::DMatrix::from_vec(4, 4, entries);
        let couple = DiscreteCouple::new(w0.clone(), w1, 1.0, 1.0).unwrap();
        let c = opnorm_interpolation_check(&t, &couple, theta).unwrap();
        prop_assert!(c.holds);
        // ‖Tx‖ ≤ ‖T‖‖x‖ on basis vectors scaled by 1/w
        let norm = weighted_l1_opnorm(&t, &w0).unwrap();
        for j in 0..4 {
            let image: f64 = (0..4).map(|i| (t[(i, j)] / w0[j]).abs() * w0[i]).sum();
            prop_assert!(image <= norm * (1.0 + 1e-12));
        }
    }
}
