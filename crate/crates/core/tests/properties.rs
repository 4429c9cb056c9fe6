//! Randomised invariants of the projection and the constitutive kernels.

mod common;

use common::*;
use fft_homog::constitutive::{simo_point, ElasticParams};
use fft_homog::projection::{NyquistMode, ProjectionOperator};
use fft_homog::tensor_field::{field_mean, GridShape, Tensor2, Tensor4};
use proptest::prelude::*;

fn odd_grid() -> impl Strategy<Value = GridShape> {
    prop_oneof![
        (1usize..4, 1usize..4).prop_map(|(a, b)| GridShape::new(&[2 * a + 1, 2 * b + 1], &[1.0, 1.5]).unwrap()),
        (1usize..3, 1usize..3, 1usize..3)
            .prop_map(|(a, b, c)| GridShape::new(&[2 * a + 1, 2 * b + 1, 2 * c + 1], &[0.7, 1.0, 1.3]).unwrap()),
    ]
}

fn deviatoric_norm(t: &Tensor2) -> f64 {
    (1.5f64).sqrt() * t.deviator().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_an_orthogonal_projector(shape in odd_grid(), seed in any::<u64>()) {
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let mut r = rng(seed);
        let a = random_field(&shape, &mut r);
        let b = random_field(&shape, &mut r);
        let ga = g.apply(&a).unwrap();
        let gb = g.apply(&b).unwrap();
        let gga = g.apply(&ga).unwrap();
        prop_assert!(max_abs_diff(gga.data(), ga.data()) <= 1e-10);
        prop_assert!(field_mean(&ga).norm() <= 1e-12);
        let lhs = a.inner(&gb);
        let rhs = ga.inner(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gradients_survive_projection(shape in odd_grid(), seed in any::<u64>()) {
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let a = Potential::random(&shape, 3, &mut rng(seed)).gradient(&shape);
        let ga = g.apply(&a).unwrap();
        prop_assert!(max_abs_diff(ga.data(), a.data()) <= 1e-10 * (1.0 + max_abs(a.data())));
    }

    #[test]
    fn symmetric_identity_symmetrises(vals in prop::array::uniform9(-2.0f64..2.0)) {
        let a = Tensor2::from_row_major(3, &vals);
        let s = Tensor4::identity_sym(3).ddot2(&a);
        let expected = (a + a.transpose()) * 0.5;
        prop_assert!((s - expected).norm() <= 1e-14);
    }

    #[test]
    fn return_mapping_lands_on_the_yield_surface(
        seed in any::<u64>(),
        scale in 0.005f64..0.2,
        hardening in 0.0f64..0.05,
    ) {
        let e = ElasticParams::new(1.0, 0.3).unwrap();
        let (lambda, mu) = (e.lame_lambda(), e.lame_mu());
        let i3 = Tensor2::identity(3);
        let f = random_deformation(3, scale, &mut rng(seed));
        let tau_y0 = 0.003;
        let pt = simo_point(&f, &i3, &i3, 0.0, lambda, mu, tau_y0, hardening).unwrap();
        let tau_y = tau_y0 + hardening * pt.eps_p;
        if pt.plastic {
            prop_assert!(pt.eps_p >= 0.0);
            prop_assert!((deviatoric_norm(&pt.tau) - tau_y).abs() <= 1e-10 * (1.0 + tau_y));
        } else {
            prop_assert_eq!(pt.eps_p, 0.0);
            prop_assert!(deviatoric_norm(&pt.tau) <= tau_y * (1.0 + 1e-10));
        }
        prop_assert!((pt.be - pt.be.transpose()).norm() <= 1e-12);
        prop_assert!(pt.be.det() > 0.0);
    }

    #[test]
    fn plastic_strain_never_decreases(seed in any::<u64>(), steps in 2usize..6) {
        let e = ElasticParams::new(1.0, 0.3).unwrap();
        let (lambda, mu) = (e.lame_lambda(), e.lame_mu());
        let mut r = rng(seed);
        let mut f_old = Tensor2::identity(3);
        let mut be = Tensor2::identity(3);
        let mut eps_p = 0.0;
        for _ in 0..steps {
            let f = random_deformation(3, 0.02, &mut r).dot(&f_old);
            let pt = simo_point(&f, &f_old, &be, eps_p, lambda, mu, 0.003, 0.01).unwrap();
            prop_assert!(pt.eps_p >= eps_p);
            f_old = f;
            be = pt.be;
            eps_p = pt.eps_p;
        }
    }
}
