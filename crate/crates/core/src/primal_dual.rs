//! Fast RFB on saddle problems `min_x max_λ f(x) + h(x) + ⟨λ, Ax − b⟩ − g(λ)`
//! with `h(x) = ½⟨x, Hx⟩ − ⟨h, x⟩`, written block by block.
//!
//! Products are packed as `(x, λ)` everywhere.

use thiserror::Error;

use crate::analysis::LyapunovParams;
use crate::numkit::{kernels, NumError, SparseMatrix, Vector};
use crate::operators::{ConeKind, ForwardOp, MonotoneOp, OpError};
use crate::problem::{Oracle, ProblemInstance};
use crate::splitters::{
    make_stepper, run_with_observer, validate_params, Form, InitialPoint, IterateRecord, IterateTrace, ParamError,
    SolverConfig, StoppingRule, TraceOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{op} expects the {expected} variant")]
    Variant { op: &'static str, expected: &'static str },
    #[error("initial point has length {found}, expected {expected}")]
    InitDimension { expected: usize, found: usize },
}

/// How the multiplier block is updated.
#[derive(Debug, Clone, PartialEq)]
pub enum DualBlock {
    /// `λ⁺ = prox_{γg}(y₂ + γ(Aw₁ − b))`
    Saddle(MonotoneOp),
    /// `λ⁺ = prox_{γg*}(y₂ + γAw₁ − γb)`; `b` is the linear part of the conjugate.
    Composite(MonotoneOp),
    /// `λ⁺ = P_{K*}(y₂ + γ(Aw₁ − b))` for the constraint `Ax − b ∈ −K`.
    Cone(ConeKind),
}

impl DualBlock {
    fn name(&self) -> &'static str {
        match self {
            DualBlock::Saddle(_) => "saddle",
            DualBlock::Composite(_) => "composite",
            DualBlock::Cone(_) => "cone",
        }
    }

    /// The operator acting on `λ` in the packed inclusion.
    pub fn operator(&self) -> MonotoneOp {
        match self {
            DualBlock::Saddle(g) | DualBlock::Composite(g) => g.clone(),
            DualBlock::Cone(k) => MonotoneOp::NormalCone(k.dual()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleProblem {
    pub f: MonotoneOp,
    pub dual: DualBlock,
    /// Packed forward operator `(Hx − h + Aᵀλ, b − Ax)`.
    forward: ForwardOp,
    nx: usize,
    ny: usize,
}

impl SaddleProblem {
    pub fn new(
        f: MonotoneOp,
        h_mat: SparseMatrix,
        h: Vector,
        a: SparseMatrix,
        b: Vector,
        dual: DualBlock,
    ) -> Result<Self, PdError> {
        let (nx, ny) = (h.len(), b.len());
        let forward = ForwardOp::pd_qp(h_mat, h, a, b)?;
        Ok(SaddleProblem { f, dual, forward, nx, ny })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// `√((‖H‖ + ‖A‖)² + ‖A‖²)`
    pub fn lipschitz(&self) -> f64 {
        self.forward.lipschitz()
    }

    pub fn forward(&self) -> &ForwardOp {
        &self.forward
    }

    fn parts(&self) -> (&SparseMatrix, &[f64], &SparseMatrix, &[f64]) {
        match self.forward.kind() {
            crate::operators::ForwardKind::PdQp { h_mat, h, a, b } => (h_mat, h, a, b),
            _ => unreachable!("saddle problems always carry a pd_qp forward operator"),
        }
    }

    pub fn h_mat(&self) -> &SparseMatrix {
        self.parts().0
    }

    pub fn h(&self) -> &[f64] {
        self.parts().1
    }

    pub fn a(&self) -> &SparseMatrix {
        self.parts().2
    }

    pub fn b(&self) -> &[f64] {
        self.parts().3
    }

    /// `0 ∈ (∂f × dual operator)(z) + F(z)` on the packed space.
    pub fn packed(&self) -> ProblemInstance {
        let m = MonotoneOp::product(vec![(self.f.clone(), self.nx), (self.dual.operator(), self.ny)]);
        ProblemInstance::new(m, self.forward.clone()).expect("block lengths match by construction")
    }

    /// `½⟨x, Hx⟩ − ⟨h, x⟩`
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        let (h_mat, h, _, _) = self.parts();
        let mut hx = vec![0.0; x.len()];
        h_mat.mul_into(x, &mut hx);
        0.5 * kernels::dot(x, &hx) - kernels::dot(h, x)
    }

    /// `(f + h)(x)`
    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        self.f.value(x) + self.smooth_value(x)
    }

    /// `Ax − b`
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (_, _, a, b) = self.parts();
        let mut out = vec![0.0; self.ny];
        a.mul_into(x, &mut out);
        for (o, bi) in out.iter_mut().zip(b) {
            *o -= bi;
        }
        out
    }

    /// `f(x) + h(x) + ⟨λ, Ax − b⟩ − g(λ)`; the cone indicator is left out.
    pub fn lagrangian(&self, x: &[f64], lam: &[f64]) -> f64 {
        let dual = match &self.dual {
            DualBlock::Saddle(g) | DualBlock::Composite(g) => g.value(lam),
            DualBlock::Cone(_) => 0.0,
        };
        self.primal_objective(x) + kernels::dot(lam, &self.residual(x)) - dual
    }

    /// `Hx − h + Aᵀλ`
    pub fn grad_x(&self, x: &[f64], lam: &[f64], out: &mut [f64]) {
        let (h_mat, h, a, _) = self.parts();
        h_mat.mul_into(x, out);
        kernels::axpy_in_place(-1.0, h, out);
        a.mul_transpose_add(lam, out);
    }

    fn dual_resolvent(&self, gamma: f64, y: &mut [f64]) {
        match &self.dual {
            DualBlock::Saddle(g) | DualBlock::Composite(g) => g.resolvent_in_place(gamma, y),
            DualBlock::Cone(k) => k.dual().project_in_place(y),
        }
    }

    /// The part of `b` the dual certificate subtracts (all of it except in the composite case).
    fn certificate_shift(&self) -> &[f64] {
        match self.dual {
            DualBlock::Composite(_) => &[],
            _ => self.b(),
        }
    }

    fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        z.split_at(self.nx)
    }
}

/// Iterates of the block-form recursion.
#[derive(Debug, Clone)]
pub struct PdState {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub lam: Vec<f64>,
    pub lam_prev: Vec<f64>,
    y1_prev: Vec<f64>,
    y2_prev: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    /// `u_k ∈ ∂f(x_k)`
    pub u: Vec<f64>,
    /// The dual certificate of the latest step.
    pub v: Vec<f64>,
}

impl PdState {
    /// Splits a packed initial point into its blocks.
    pub fn new(problem: &SaddleProblem, init: &InitialPoint) -> Result<Self, PdError> {
        let dim = problem.nx + problem.ny;
        for len in [init.z0.len(), init.y0().len(), init.w0().len()] {
            if len != dim {
                return Err(PdError::InitDimension { expected: dim, found: len });
            }
        }
        let (x0, l0) = problem.split(&init.z0);
        let (y1, y2) = problem.split(init.y0());
        let (w1, w2) = problem.split(init.w0());
        Ok(PdState {
            k: 0,
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            lam: l0.to_vec(),
            lam_prev: l0.to_vec(),
            y1_prev: y1.to_vec(),
            y2_prev: y2.to_vec(),
            w1: w1.to_vec(),
            w2: w2.to_vec(),
            u: vec![0.0; problem.nx],
            v: vec![0.0; problem.ny],
        })
    }

    /// `(x_k, λ_k)` packed.
    pub fn point(&self) -> Vector {
        Vector::concat(&[&self.x, &self.lam])
    }
}

fn momentum(k: usize, alpha: f64, c: f64, z: &[f64], z_prev: &[f64], y_prev: &[f64]) -> Vec<f64> {
    let kf = k as f64;
    let a = 1.0 - alpha / (kf + alpha);
    let b = 1.0 - c / (kf + alpha);
    (0..z.len())
        .map(|i| z[i] + a * (z[i] - z_prev[i]) + b * (y_prev[i] - z[i]))
        .collect()
}

fn pd_step(state: &mut PdState, config: &SolverConfig, problem: &SaddleProblem) {
    let g = config.gamma;
    let (y1, y2) = if state.k == 0 {
        (state.y1_prev.clone(), state.y2_prev.clone())
    } else {
        let y1 = momentum(state.k, config.alpha, config.c, &state.x, &state.x_prev, &state.y1_prev);
        let y2 = momentum(state.k, config.alpha, config.c, &state.lam, &state.lam_prev, &state.y2_prev);
        for i in 0..y1.len() {
            state.w1[i] = state.x[i] + (y1[i] - state.y1_prev[i]);
        }
        for i in 0..y2.len() {
            state.w2[i] = state.lam[i] + (y2[i] - state.y2_prev[i]);
        }
        (y1, y2)
    };

    let mut gx = vec![0.0; problem.nx];
    problem.grad_x(&state.w1, &state.w2, &mut gx);
    let mut aw = vec![0.0; problem.ny];
    problem.a().mul_into(&state.w1, &mut aw);
    let b = problem.b();

    let mut x_next: Vec<f64> = y1.iter().zip(&gx).map(|(y, d)| y - g * d).collect();
    problem.f.resolvent_in_place(g, &mut x_next);
    // y₂ − γ(b − Aw₁), the same expression the packed forward operator produces
    let mut lam_next: Vec<f64> = (0..problem.ny).map(|i| y2[i] - g * (b[i] - aw[i])).collect();
    problem.dual_resolvent(g, &mut lam_next);

    for i in 0..problem.nx {
        state.u[i] = (y1[i] - x_next[i]) / g - gx[i];
    }
    let shift = problem.certificate_shift();
    for i in 0..problem.ny {
        state.v[i] = (y2[i] - lam_next[i]) / g + aw[i] - shift.get(i).copied().unwrap_or(0.0);
    }

    state.x_prev = std::mem::replace(&mut state.x, x_next);
    state.lam_prev = std::mem::replace(&mut state.lam, lam_next);
    state.y1_prev = y1;
    state.y2_prev = y2;
    state.k += 1;
}

fn checked_step(
    op: &'static str,
    expected: &'static str,
    state: &mut PdState,
    config: &SolverConfig,
    problem: &SaddleProblem,
) -> Result<(), PdError> {
    if problem.dual.name() != expected {
        return Err(PdError::Variant { op, expected });
    }
    validate_params(config, problem.lipschitz())?;
    pd_step(state, config, problem);
    Ok(())
}

/// One step of the saddle-point recursion with `prox_{γf}` and `prox_{γg}`.
pub fn saddle_step(state: &mut PdState, config: &SolverConfig, problem: &SaddleProblem) -> Result<(), PdError> {
    checked_step("saddle_step", "saddle", state, config, problem)
}

/// One step of the composite recursion with `prox_{γg*}`.
pub fn composite_step(state: &mut PdState, config: &SolverConfig, problem: &SaddleProblem) -> Result<(), PdError> {
    checked_step("composite_step", "composite", state, config, problem)
}

/// One step of the cone-constrained recursion with `P_{K*}`.
pub fn cone_step(state: &mut PdState, config: &SolverConfig, problem: &SaddleProblem) -> Result<(), PdError> {
    checked_step("cone_step", "cone", state, config, problem)
}

/// Dispatches on the problem's variant.
pub fn step(state: &mut PdState, config: &SolverConfig, problem: &SaddleProblem) -> Result<(), PdError> {
    validate_params(config, problem.lipschitz())?;
    pd_step(state, config, problem);
    Ok(())
}

/// `u_k ∈ ∂f(x_k)` and the dual certificate:
/// `∂g(λ_k)` (saddle), `∂g*(λ_k) + b` (composite) or `N_{K*}(λ_k)` (cone).
#[derive(Debug, Clone, PartialEq)]
pub struct PdCertificates {
    pub u: Vector,
    pub v: Vector,
}

pub fn pd_certificates(state: &PdState) -> PdCertificates {
    PdCertificates {
        u: state.u.as_slice().into(),
        v: state.v.as_slice().into(),
    }
}

/// Recovers the certificates from a packed `ξ` of the generic iteration.
pub fn certificates_from_packed(problem: &SaddleProblem, xi: &[f64]) -> PdCertificates {
    let (u, v) = problem.split(xi);
    let mut v = v.to_vec();
    if let DualBlock::Composite(_) = problem.dual {
        kernels::axpy_in_place(1.0, problem.b(), &mut v);
    }
    PdCertificates { u: u.into(), v: v.into() }
}

/// A primal-dual solution `(x*, λ*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdReference {
    pub x: Vector,
    pub lam: Vector,
    /// Residual `‖ξ + F(z)‖` reached by the reference solve.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PdRecord {
    /// `‖u_k + Hx_k − h + Aᵀλ_k‖`
    pub stationarity: f64,
    /// `‖v_k − (Ax_k − b)‖`, or `‖v_k − Ax_k‖` for the composite variant.
    pub feasibility: f64,
    /// `|⟨λ_k, Ax_k − b⟩|`
    pub complementarity: f64,
    /// `‖λ_k‖·‖Ax_k − b − v_k‖`, which bounds the complementarity on the cone variant.
    pub complementarity_bound: f64,
    /// `L(x_k, λ*) − L(x*, λ_k)`
    pub lagrangian_gap: Option<f64>,
    /// `|(f+h)(x_k) − (f+h)(x*)|`
    pub objective_gap: Option<f64>,
}

pub fn pd_diagnostics(
    problem: &SaddleProblem,
    x: &[f64],
    lam: &[f64],
    certs: &PdCertificates,
    reference: Option<&PdReference>,
) -> PdRecord {
    let mut grad = vec![0.0; problem.nx];
    problem.grad_x(x, lam, &mut grad);
    let stationarity = kernels::norm_sum(&certs.u, &grad);

    let ax_b = problem.residual(x);
    let mut target = ax_b.clone();
    if let DualBlock::Composite(_) = problem.dual {
        kernels::axpy_in_place(1.0, problem.b(), &mut target);
    }
    let feasibility = kernels::dist(&certs.v, &target);
    let complementarity = kernels::dot(lam, &ax_b).abs();
    let complementarity_bound = kernels::norm(lam) * kernels::dist(&ax_b, &certs.v);

    let (lagrangian_gap, objective_gap) = match reference {
        Some(r) => (
            Some(problem.lagrangian(x, &r.lam) - problem.lagrangian(&r.x, lam)),
            Some((problem.primal_objective(x) - problem.primal_objective(&r.x)).abs()),
        ),
        None => (None, None),
    };
    PdRecord {
        stationarity,
        feasibility,
        complementarity,
        complementarity_bound,
        lagrangian_gap,
        objective_gap,
    }
}

/// Runs the generic iteration (α = 10, zero start) on the packed problem until
/// `‖ξ + F(z)‖ ≤ tol` or `max_iter` steps.
pub fn compute_reference(problem: &SaddleProblem, tol: f64, max_iter: usize) -> Result<PdReference, PdError> {
    let packed = problem.packed();
    let config = SolverConfig::fast_rfb(10.0, packed.lipschitz()).with_max_iter(max_iter);
    let mut stepper = make_stepper(&packed, &config, &InitialPoint::zeros(packed.dim()))?;
    let mut f_point = vec![0.0; packed.dim()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter && residual > tol {
        stepper.step(&packed);
        iterations += 1;
        let (point, xi) = stepper.certificate();
        packed.forward_into(point, &mut f_point);
        residual = kernels::norm_sum(xi, &f_point);
    }
    let (x, lam) = problem.split(stepper.certificate().0);
    Ok(PdReference {
        x: x.into(),
        lam: lam.into(),
        residual,
        iterations,
    })
}

/// Trace of the generic iteration on the packed problem with the primal-dual
/// columns filled in.
pub fn run_packed(
    problem: &SaddleProblem,
    config: &SolverConfig,
    init: &InitialPoint,
    stop: &StoppingRule,
    reference: Option<&PdReference>,
    lyapunov: Option<LyapunovParams>,
) -> Result<IterateTrace, PdError> {
    let packed = problem.packed();
    let opts = TraceOptions {
        reference: reference.map(|r| Vector::concat(&[&r.x, &r.lam])),
        lyapunov,
    };
    let trace = run_with_observer(&packed, config, init, stop, &opts, &mut |snap, rec: &mut IterateRecord| {
        let (point, xi) = snap.stepper.certificate();
        let (x, lam) = problem.split(point);
        let certs = certificates_from_packed(problem, xi);
        let d = pd_diagnostics(problem, x, lam, &certs, reference);
        rec.pd_gap = d.lagrangian_gap;
        rec.obj_gap = d.objective_gap;
        rec.feasibility = Some(d.feasibility);
        rec.complementarity = Some(d.complementarity);
    })?;
    Ok(trace)
}

/// Block-form run returning the final state and one diagnostics record per step.
pub fn run_blocks(
    problem: &SaddleProblem,
    config: &SolverConfig,
    init: &InitialPoint,
    steps: usize,
    reference: Option<&PdReference>,
) -> Result<(PdState, Vec<PdRecord>), PdError> {
    validate_params(config, problem.lipschitz())?;
    let mut state = PdState::new(problem, init)?;
    let mut records = Vec::with_capacity(steps);
    for _ in 0..steps {
        pd_step(&mut state, config, problem);
        let certs = pd_certificates(&state);
        records.push(pd_diagnostics(problem, &state.x, &state.lam, &certs, reference));
    }
    Ok((state, records))
}

/// Fast RFB configuration in primal form, matching the block recursion.
pub fn block_config(alpha: f64, problem: &SaddleProblem) -> SolverConfig {
    SolverConfig::fast_rfb(alpha, problem.lipschitz()).with_form(Form::Primal)
}

impl From<NumError> for PdError {
    fn from(e: NumError) -> Self {
        PdError::Op(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dual: DualBlock) -> SaddleProblem {
        let h_mat = SparseMatrix::from_diagonal(&[2.0, 1.0]);
        let a = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        SaddleProblem::new(MonotoneOp::l1(0.1).unwrap(), h_mat, [1.0, 0.5].into(), a, [1.0].into(), dual).unwrap()
    }

    #[test]
    fn variant_gate() {
        let p = tiny(DualBlock::Cone(ConeKind::ZeroCone));
        let cfg = block_config(10.0, &p);
        let mut st = PdState::new(&p, &InitialPoint::zeros(3)).unwrap();
        assert!(matches!(saddle_step(&mut st, &cfg, &p), Err(PdError::Variant { .. })));
        assert!(cone_step(&mut st, &cfg, &p).is_ok());
        let bad = cfg.with_gamma(1.0 / p.lipschitz());
        assert!(matches!(cone_step(&mut st, &bad, &p), Err(PdError::Param(_))));
    }

    #[test]
    fn diagnostics_vanish_at_a_kkt_point() {
        // min 0.1‖x‖₁ + x₁² + ½x₂² − x₁ − ½x₂ s.t. x₁ + x₂ = 1
        let p = tiny(DualBlock::Cone(ConeKind::ZeroCone));
        let reference = compute_reference(&p, 1e-12, 1_000_000).unwrap();
        assert!(reference.residual <= 1e-12);
        let (x, lam) = (&reference.x, &reference.lam);
        // stationarity by hand: 2x₁ − 1 + λ + 0.1 = 0 and x₂ − 0.5 + λ + 0.1 = 0 with both positive
        assert!((2.0 * x[0] - 1.0 + lam[0] + 0.1).abs() < 1e-10);
        assert!((x[1] - 0.5 + lam[0] + 0.1).abs() < 1e-10);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-10);
        let u = Vector::from([0.1, 0.1]);
        let certs = PdCertificates { u, v: Vector::from([0.0]) };
        let d = pd_diagnostics(&p, x, lam, &certs, Some(&reference));
        assert!(d.stationarity < 1e-10 && d.feasibility < 1e-10 && d.complementarity < 1e-10);
        assert_eq!(d.lagrangian_gap, Some(0.0));
        assert_eq!(d.objective_gap, Some(0.0));
    }

    #[test]
    fn packed_problem_layout() {
        let p = tiny(DualBlock::Cone(ConeKind::NonnegOrthant));
        let packed = p.packed();
        assert_eq!(packed.dim(), 3);
        let mut out = vec![0.0; 3];
        packed.forward_into(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, vec![2.0 - 1.0 + 3.0, 2.0 - 0.5 + 3.0, 1.0 - 3.0]);
    }
}
