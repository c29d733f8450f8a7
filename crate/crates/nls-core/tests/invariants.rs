//! Property tests for the continuum identities that must survive
//! discretization: dilation scaling laws, the fibering trichotomy, and
//! the power-mean inequalities.

use std::sync::Arc;

use proptest::prelude::*;

use nls_core::conditions::power_mean_checks;
use nls_core::functional::{
    fiber_coefficients, fiber_maximizer, nehari_pohozaev, State, SystemParams,
};
use nls_core::grid::{self, GridKind, RadialField, RadialGrid};

fn test_grid() -> Arc<RadialGrid> {
    grid::make_grid(2048, 24.0, GridKind::Uniform).unwrap()
}

fn gaussian(grid: &Arc<RadialGrid>, amp: f64, sigma: f64) -> RadialField {
    RadialField::from_fn(grid.clone(), move |r| amp * (-0.5 * (r / sigma).powi(2)).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dilation_preserves_mass_and_scales_gradient(
        s in 0.3f64..3.0,
        amp in 0.2f64..2.0,
        sigma in 0.6f64..1.6,
    ) {
        let g = test_grid();
        let f = gaussian(&g, amp, sigma);
        let mass = grid::integrate(&f.map(|v| v * v));
        let grad = grid::grad_norm_sq(&f);
        let fs = grid::dilate(&f, s).unwrap();
        let mass_s = grid::integrate(&fs.map(|v| v * v));
        let grad_s = grid::grad_norm_sq(&fs);
        prop_assert!((mass_s - mass).abs() <= 1e-5 * mass);
        prop_assert!((grad_s - s * s * grad).abs() <= 1e-4 * s * s * grad);
    }

    #[test]
    fn fibering_trichotomy_sign_pattern(
        a1 in 0.3f64..1.5,
        a2 in 0.3f64..1.5,
        s1 in 0.7f64..1.8,
        s2 in 0.7f64..1.8,
        probe in 0.2f64..0.9,
    ) {
        let params = SystemParams::new(
            4.0,
            vec![vec![1.0, 0.8], vec![0.8, 1.0]],
            vec![1.0, 1.0],
        ).unwrap();
        let g = test_grid();
        let u = State::new(vec![gaussian(&g, a1, s1), gaussian(&g, a2, s2)]).unwrap();
        let coeffs = fiber_coefficients(&u, &params).unwrap();
        let s_u = fiber_maximizer(&coeffs, &params).unwrap();
        // M(s★u) > 0 below the maximizer, < 0 above
        let below = nehari_pohozaev(&u.dilate(probe * s_u).unwrap(), &params).unwrap();
        let above = nehari_pohozaev(&u.dilate(s_u / probe).unwrap(), &params).unwrap();
        prop_assert!(below > 0.0, "M at {probe} s_u = {below}");
        prop_assert!(above < 0.0, "M at s_u/{probe} = {above}");
    }

    #[test]
    fn power_mean_inequalities_always_hold(
        a in proptest::collection::vec(1e-4f64..1e4, 2..7),
        alpha in 2.0f64..9.0,
        q in 1.0f64..7.0,
    ) {
        prop_assert!(power_mean_checks(&a, alpha, q).unwrap());
    }
}
