use fastrfb::analysis::{self, delta_interval, lambda_window, s_interval, LyapunovParams};
use fastrfb::bench;
use fastrfb::operators::{project_cone, prox_l1};
use fastrfb::splitters::{default_c, run_solver, InitialPoint, TraceOptions};
use fastrfb::{ConeKind, Form, MonotoneOp, Oracle, SolverConfig, StoppingRule};
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn cone_strategy() -> impl Strategy<Value = ConeKind> {
    prop_oneof![
        Just(ConeKind::NonnegOrthant),
        Just(ConeKind::ZeroCone),
        Just(ConeKind::FullSpace)
    ]
}

fn op_strategy() -> impl Strategy<Value = MonotoneOp> {
    prop_oneof![
        Just(MonotoneOp::Zero),
        (0.0..3.0f64).prop_map(|w| MonotoneOp::l1(w).unwrap()),
        cone_strategy().prop_map(MonotoneOp::NormalCone),
    ]
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_threshold_certificate_is_a_subgradient(x in vec_strategy(12), gamma in 0.01..5.0f64) {
        let p = prox_l1(&x, gamma);
        let xi: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| (a - b) / gamma).collect();
        let viol = MonotoneOp::l1(1.0).unwrap().membership_violation(&p, &xi);
        prop_assert!(viol <= 1e-12, "{viol}");
    }

    #[test]
    fn cone_projection_is_idempotent_with_normal_residual(x in vec_strategy(9), cone in cone_strategy()) {
        let p = project_cone(&x, cone);
        prop_assert!(cone.contains(&p));
        prop_assert_eq!(project_cone(&p, cone), p.clone());
        let r: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
        prop_assert_eq!(MonotoneOp::NormalCone(cone).membership_violation(&p, &r), 0.0);
    }

    #[test]
    fn resolvents_are_firmly_nonexpansive(
        ops in prop::collection::vec(op_strategy(), 1..4),
        x in vec_strategy(12),
        y in vec_strategy(12),
        gamma in 0.01..3.0f64,
    ) {
        let len = 12 / ops.len();
        let blocks: Vec<(MonotoneOp, usize)> = ops.iter().cloned().enumerate()
            .map(|(i, op)| (op, if i + 1 == ops.len() { 12 - len * i } else { len }))
            .collect();
        let m = MonotoneOp::product(blocks);
        let jx = m.resolvent(gamma, &x).unwrap();
        let jy = m.resolvent(gamma, &y).unwrap();
        let d: Vec<f64> = jx.iter().zip(jy.iter()).map(|(a, b)| a - b).collect();
        let e: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&d, &d) <= dot(&d, &e) + 1e-9);
    }

    #[test]
    fn tangent_residual_bounds_fixed_point_residual(y in vec_strategy(16), gamma in 0.01..0.5f64) {
        // monotone affine problem: packed chain QP with an l1 block
        let p = bench::build_qp_problem(8, ConeKind::NonnegOrthant).unwrap().packed();
        let gamma = gamma.min(0.99 * 0.5 / p.lipschitz());
        let pt = p.m.resolvent(gamma, &y).unwrap();
        let xi: Vec<f64> = y.iter().zip(pt.iter()).map(|(a, b)| (a - b) / gamma).collect();
        let mut f = vec![0.0; 16];
        p.forward_into(&pt, &mut f);
        let tan = xi.iter().zip(&f).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        let mut fix: Vec<f64> = pt.iter().zip(&f).map(|(a, b)| a - gamma * b).collect();
        p.resolvent_in_place(gamma, &mut fix);
        let r_fix = pt.iter().zip(&fix).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(r_fix <= tan + 1e-12);
        prop_assert!(r_fix <= gamma * tan * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn forward_operator_respects_its_lipschitz_bound(
        n in 2usize..12,
        seed in any::<u64>(),
        cone in cone_strategy(),
    ) {
        let p = bench::build_qp_problem(n, cone).unwrap().packed();
        let a = InitialPoint::gaussian(2 * n, seed);
        let (z1, z2) = (a.z0.as_slice(), a.y0());
        let (mut f1, mut f2) = (vec![0.0; 2 * n], vec![0.0; 2 * n]);
        p.forward_into(z1, &mut f1);
        p.forward_into(z2, &mut f2);
        let df = f1.iter().zip(&f2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dz = z1.iter().zip(z2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(df <= p.lipschitz() * dz * (1.0 + 1e-8));
        // monotone: ⟨F(z1) − F(z2), z1 − z2⟩ ≥ 0
        let inner: f64 = (0..2 * n).map(|i| (f1[i] - f2[i]) * (z1[i] - z2[i])).sum();
        prop_assert!(inner >= -1e-10 * dz * dz);
    }

    #[test]
    fn energy_identity_holds_for_admissible_parameters(
        alpha in 2.2..25.0f64,
        c_pos in 0.02..0.98f64,
        lam_pos in 0.0..=1.0f64,
        s in 1.001..1.999f64,
        seed in 0u64..1000,
    ) {
        let c = alpha / 2.0 + c_pos * (alpha / 2.0 - 1.0);
        let p = bench::build_known_solution_problem([2.0, -0.5, 0.0, 1.5, -4.0].into());
        let cfg = SolverConfig::fast_rfb(alpha, p.lipschitz()).with_c(c).with_max_iter(60);
        let params = LyapunovParams::new(lam_pos * (alpha - 1.0), s, alpha, c, cfg.gamma, p.lipschitz()).unwrap();
        let opts = TraceOptions { reference: p.solution.clone(), lyapunov: Some(params) };
        let t = run_solver(&p, &cfg, &InitialPoint::gaussian(5, seed), &StoppingRule::None, &opts).unwrap();
        let worst = t.records.iter().filter_map(|r| r.identity_residual).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn both_forms_agree(alpha in 2.5..30.0f64, seed in 0u64..1000) {
        let p = bench::build_known_solution_problem([1.0, -3.0, 0.2, 0.0].into());
        let cfg = SolverConfig::fast_rfb(alpha, p.lipschitz()).with_max_iter(200).with_form(Form::Both);
        let t = run_solver(&p, &cfg, &InitialPoint::gaussian(4, seed), &StoppingRule::None, &TraceOptions::default()).unwrap();
        prop_assert!(t.form_deviation.unwrap() <= 1e-10);
    }

    #[test]
    fn certificates_stay_in_the_subdifferential(alpha in 2.5..30.0f64, seed in 0u64..1000) {
        let p = bench::build_qp_problem(6, ConeKind::NonnegOrthant).unwrap().packed();
        let cfg = SolverConfig::fast_rfb(alpha, p.lipschitz()).with_max_iter(300);
        let mut worst: f64 = 0.0;
        fastrfb::splitters::run_with_observer(
            &p, &cfg, &InitialPoint::gaussian(12, seed), &StoppingRule::None, &TraceOptions::default(),
            &mut |snap, _| {
                let (pt, xi) = snap.stepper.certificate();
                worst = worst.max(p.m.membership_violation(pt, xi));
            },
        ).unwrap();
        prop_assert!(worst <= 1e-8);
    }

    #[test]
    fn lambda_window_is_nonempty_inside_the_parameter_ranges(
        alpha in 2.1..40.0f64,
        c_pos in 0.01..0.99f64,
        s_pos in 0.01..0.99f64,
        d_pos in 0.01..0.99f64,
    ) {
        let c = alpha / 2.0 + c_pos * (alpha / 2.0 - 1.0);
        let (s_lo, s_hi) = s_interval(alpha, c);
        prop_assume!(s_lo < s_hi);
        let s = s_lo + s_pos * (s_hi - s_lo);
        let (d_lo, d_hi) = delta_interval(alpha, c, s).unwrap();
        prop_assume!(d_lo < d_hi);
        let delta = d_lo + d_pos * (d_hi - d_lo);
        let (lo, hi) = lambda_window(alpha, c, s, delta).unwrap();
        prop_assert!(0.0 <= lo && lo < hi, "[{lo}, {hi}]");
        prop_assert!(hi <= s * alpha / 4.0 * (1.0 + 1e-12));
    }

    #[test]
    fn omega_signs_at_default_parameters(alpha in 2.1..40.0f64, c_pos in 0.05..0.95f64) {
        let c = alpha / 2.0 + c_pos * (alpha / 2.0 - 1.0);
        let p = LyapunovParams::inequality_default(alpha, c, 0.1, 1.0).unwrap();
        let w = analysis::omega_constants(&p).unwrap();
        prop_assert!(w.sign_pattern_holds(), "{w:?}");
    }
}

#[test]
fn default_c_sits_inside_its_interval() {
    for alpha in [2.5, 3.0, 5.0, 10.0, 20.0, 100.0] {
        let c = default_c(alpha);
        assert!(alpha / 2.0 < c && c < alpha - 1.0, "{alpha}: {c}");
    }
}

#[test]
fn population_statistics() {
    let (m, s) = bench::mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
    assert_eq!((m, s), (5.0, 2.0));
    assert!(bench::mean_std(&[]).0.is_nan());
}
