use fastrfb::bench::{self, build_chain_matrix, chain_b, chain_h};
use fastrfb::primal_dual::{block_config, run_blocks, DualBlock, PdState, SaddleProblem};
use fastrfb::splitters::{make_stepper, InitialPoint};
use fastrfb::{ConeKind, MonotoneOp, Oracle};

fn chain_problem(n: usize, dual: DualBlock) -> SaddleProblem {
    let a = build_chain_matrix(n).unwrap();
    let h_mat = a.gram().scaled(2.0);
    SaddleProblem::new(MonotoneOp::l1(1.0).unwrap(), h_mat, chain_h(n), a, chain_b(n), dual).unwrap()
}

fn variants() -> Vec<(&'static str, DualBlock)> {
    vec![
        ("saddle", DualBlock::Saddle(MonotoneOp::l1(0.05).unwrap())),
        ("composite", DualBlock::Composite(MonotoneOp::NormalCone(ConeKind::NonnegOrthant))),
        ("cone", DualBlock::Cone(ConeKind::NonnegOrthant)),
    ]
}

#[test]
fn block_form_matches_the_generic_iteration() {
    for (name, dual) in variants() {
        let p = chain_problem(200, dual);
        let packed = p.packed();
        let cfg = block_config(10.0, &p);
        let init = InitialPoint::gaussian(packed.dim(), 5);
        let mut stepper = make_stepper(&packed, &cfg, &init).unwrap();
        let mut state = PdState::new(&p, &init).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            stepper.step(&packed);
            fastrfb::primal_dual::step(&mut state, &cfg, &p).unwrap();
            let z = state.point();
            for (a, b) in z.iter().zip(stepper.current()) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        assert!(worst <= 1e-12, "{name}: {worst:e}");
    }
}

#[test]
fn zero_cone_equals_composite_with_shift() {
    let n = 30;
    let cone = chain_problem(n, DualBlock::Cone(ConeKind::ZeroCone));
    let comp = chain_problem(n, DualBlock::Composite(MonotoneOp::Zero));
    let cfg = block_config(5.0, &cone);
    let init = InitialPoint::gaussian(2 * n, 1);
    let (sc, _) = run_blocks(&cone, &cfg, &init, 500, None).unwrap();
    let (sp, _) = run_blocks(&comp, &cfg, &init, 500, None).unwrap();
    assert_eq!(sc.x, sp.x);
    assert_eq!(sc.lam, sp.lam);
    let b = chain_b(n);
    for i in 0..n {
        assert!((sp.v[i] - (sc.v[i] + b[i])).abs() <= 1e-12 * (1.0 + b[i].abs()));
    }
}

#[test]
fn cone_multipliers_and_certificates_have_the_right_signs() {
    let p = chain_problem(40, DualBlock::Cone(ConeKind::NonnegOrthant));
    let cfg = block_config(10.0, &p);
    let mut state = PdState::new(&p, &InitialPoint::gaussian(80, 2)).unwrap();
    for _ in 0..3000 {
        fastrfb::primal_dual::cone_step(&mut state, &cfg, &p).unwrap();
        for (l, v) in state.lam.iter().zip(&state.v) {
            assert!(*l >= 0.0);
            assert!(*v <= 1e-12);
            assert!((l * v).abs() <= 1e-12 * (1.0 + l.abs() * v.abs()));
        }
        let viol = MonotoneOp::l1(1.0).unwrap().membership_violation(&state.x, &state.u);
        assert!(viol <= 1e-8, "{viol}");
    }
}

#[test]
fn equality_residuals_decay_faster_than_one_over_k() {
    let p = chain_problem(200, DualBlock::Cone(ConeKind::ZeroCone));
    let cfg = block_config(10.0, &p);
    let (_, recs) = run_blocks(&p, &cfg, &InitialPoint::zeros(400), 60_000, None).unwrap();
    let scaled = |lo: usize, hi: usize| {
        (lo..=hi)
            .map(|k| k as f64 * (recs[k - 1].stationarity + recs[k - 1].feasibility))
            .fold(0.0, f64::max)
    };
    let (mid, late) = (scaled(5000, 10_000), scaled(50_000, 60_000));
    assert!(late < 0.01 * mid, "{late} vs {mid}");
}

#[test]
fn inequality_residuals_decay_faster_than_one_over_k() {
    let p = chain_problem(40, DualBlock::Cone(ConeKind::NonnegOrthant));
    let cfg = block_config(10.0, &p);
    let (_, recs) = run_blocks(&p, &cfg, &InitialPoint::zeros(80), 40_000, None).unwrap();
    let scaled = |lo: usize, hi: usize| {
        (lo..=hi)
            .map(|k| k as f64 * (recs[k - 1].stationarity + recs[k - 1].feasibility + recs[k - 1].complementarity_bound))
            .fold(0.0, f64::max)
    };
    let (early, late) = (scaled(1000, 2000), scaled(30_000, 40_000));
    assert!(late < 0.01 * early, "{late} vs {early}");
}

#[test]
fn analytic_equality_reference_is_a_kkt_point_of_the_packed_problem() {
    let n = 50;
    let p = bench::build_qp_problem(n, ConeKind::ZeroCone).unwrap();
    let r = bench::chain_equality_solution(n).unwrap();
    let packed = p.packed();
    let z: Vec<f64> = r.x.iter().chain(r.lam.iter()).copied().collect();
    let mut fz = vec![0.0; 2 * n];
    packed.forward_into(&z, &mut fz);
    // -F(z*) must be a certificate in M(z*)
    let xi: Vec<f64> = fz.iter().map(|v| -v).collect();
    assert!(packed.m.membership_violation(&z, &xi) <= 1e-10);
}

#[test]
fn mismatched_start_is_rejected() {
    let p = chain_problem(5, DualBlock::Cone(ConeKind::ZeroCone));
    assert!(PdState::new(&p, &InitialPoint::zeros(9)).is_err());
}
