use std::time::Instant;

use super::{make_stepper, InitialPoint, Method, ParamError, SolverConfig, Stepper};
use crate::analysis::{self, EnergyState, LyapunovParams};
use crate::numkit::{kernels, Vector};
use crate::problem::Oracle;

/// When a run counts as successful.
#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    None,
    /// `‖ξ + F(p)‖ ≤ ε` at the certificate point `p`. On the equality-constrained
    /// benchmark problems this is the norm of the KKT residual.
    KktNorm(f64),
    /// `‖z_k − target‖ ≤ ε`
    Distance { target: Vector, eps: f64 },
}

impl StoppingRule {
    fn fires(&self, tan: f64, z: &[f64]) -> bool {
        match self {
            StoppingRule::None => false,
            StoppingRule::KktNorm(eps) => tan <= *eps,
            StoppingRule::Distance { target, eps } => kernels::dist(z, target) <= *eps,
        }
    }
}

/// Optional per-iteration diagnostics.
#[derive(Debug, Clone, Default)]
pub struct TraceOptions {
    /// A zero of `M + F`; enables the distance column.
    pub reference: Option<Vector>,
    /// Lyapunov parameters; with a reference this enables the energy columns
    /// on fast RFB runs.
    pub lyapunov: Option<LyapunovParams>,
}

/// Convenience bundle of a reference zero with Lyapunov parameters.
#[derive(Debug, Clone)]
pub struct EnergySpec {
    pub params: LyapunovParams,
    pub z_star: Vector,
}

impl From<EnergySpec> for TraceOptions {
    fn from(spec: EnergySpec) -> Self {
        TraceOptions {
            reference: Some(spec.z_star),
            lyapunov: Some(spec.params),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    /// `‖z_k − z_{k−1}‖`
    pub velocity: f64,
    /// `‖ξ + F(p)‖` at the certificate point.
    pub tan_residual_upper: f64,
    /// `‖p − J_{γM}(p − γF(p))‖`
    pub fix_residual: f64,
    pub v_norm: Option<f64>,
    /// `‖ξ_k + F(z_k) − v_k‖` and `½‖v_k − v_{k−1}‖` (fast RFB only).
    pub lip_gap: Option<(f64, f64)>,
    pub distance: Option<f64>,
    pub energy_e: Option<f64>,
    pub energy_g: Option<f64>,
    pub identity_residual: Option<f64>,
    pub lower_bound_gap: Option<f64>,
    pub pd_gap: Option<f64>,
    pub obj_gap: Option<f64>,
    pub feasibility: Option<f64>,
    pub complementarity: Option<f64>,
    pub time_s: f64,
}

#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub method: Method,
    pub records: Vec<IterateRecord>,
    pub success: bool,
    pub iterations: usize,
    pub elapsed_s: f64,
    pub final_z: Vector,
    pub final_point: Vector,
    pub final_xi: Vector,
    pub form_deviation: Option<f64>,
}

/// What an observer sees after each step.
pub struct Snapshot<'a> {
    pub stepper: &'a dyn Stepper,
    /// `F` at the certificate point.
    pub f_point: &'a [f64],
}

/// Runs `config` from `init` until `stop` fires or `config.max_iter` steps.
pub fn run_solver(
    oracle: &dyn Oracle,
    config: &SolverConfig,
    init: &InitialPoint,
    stop: &StoppingRule,
    opts: &TraceOptions,
) -> Result<IterateTrace, ParamError> {
    run_with_observer(oracle, config, init, stop, opts, &mut |_, _| {})
}

/// [`run_solver`] with a hook that may fill extra record fields.
pub fn run_with_observer(
    oracle: &dyn Oracle,
    config: &SolverConfig,
    init: &InitialPoint,
    stop: &StoppingRule,
    opts: &TraceOptions,
    observer: &mut dyn FnMut(&Snapshot, &mut IterateRecord),
) -> Result<IterateTrace, ParamError> {
    let mut stepper = make_stepper(oracle, config, init)?;
    let n = oracle.dim();
    let gamma = config.gamma;
    let mut f_point = vec![0.0; n];
    let mut fix = vec![0.0; n];
    let mut records = Vec::with_capacity(config.max_iter.min(1 << 20));
    let energy = match (&opts.reference, &opts.lyapunov) {
        (Some(z), Some(p)) if config.method == Method::FastRfb => Some((z.as_slice(), p)),
        _ => None,
    };
    let mut previous: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;

    let start = Instant::now();
    let mut success = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        stepper.step(oracle);
        iterations += 1;

        let (point, xi) = stepper.certificate();
        oracle.forward_into(point, &mut f_point);
        let tan = kernels::norm_sum(xi, &f_point);
        for i in 0..n {
            fix[i] = point[i] - gamma * f_point[i];
        }
        oracle.resolvent_in_place(gamma, &mut fix);
        let z = stepper.current();
        let mut rec = IterateRecord {
            k: stepper.k(),
            velocity: kernels::dist(z, stepper.previous()),
            tan_residual_upper: tan,
            fix_residual: kernels::dist(point, &fix),
            distance: opts.reference.as_ref().map(|r| kernels::dist(z, r)),
            ..Default::default()
        };

        if let Some(view) = stepper.fast_view() {
            rec.v_norm = Some(kernels::norm(view.v));
            let mut gap: f64 = 0.0;
            for i in 0..n {
                let d = xi[i] + f_point[i] - view.v[i];
                gap += d * d;
            }
            if stepper.k() >= 2 {
                rec.lip_gap = Some((gap.sqrt(), 0.5 * kernels::dist(view.v, view.v_prev)));
            }

            if let Some((z_star, params)) = energy {
                let k = stepper.k();
                let state = EnergyState {
                    k,
                    z,
                    z_prev: stepper.previous(),
                    v: view.v,
                };
                rec.energy_e = Some(analysis::lyapunov_e(&state, z_star, params));
                if k >= 2 {
                    let g_state = analysis::GState {
                        e: state,
                        v_prev: view.v_prev,
                        f_z: &f_point,
                        f_w_prev: view.f_w_prev,
                    };
                    rec.energy_g = Some(analysis::lyapunov_g(&g_state, z_star, params));
                    rec.lower_bound_gap = Some(analysis::g_lower_bound_gap(&g_state, z_star, params));
                }
                if let Some((pz, pz_prev, pv)) = &previous {
                    let before = EnergyState {
                        k: k - 1,
                        z: pz,
                        z_prev: pz_prev,
                        v: pv,
                    };
                    rec.identity_residual =
                        Some(analysis::energy_identity_residual(&before, &state, z_star, params));
                }
                match &mut previous {
                    Some((pz, pz_prev, pv)) => {
                        pz.copy_from_slice(z);
                        pz_prev.copy_from_slice(stepper.previous());
                        pv.copy_from_slice(view.v);
                    }
                    None => previous = Some((z.to_vec(), stepper.previous().to_vec(), view.v.to_vec())),
                }
            }
        }

        observer(
            &Snapshot {
                stepper: stepper.as_ref(),
                f_point: &f_point,
            },
            &mut rec,
        );
        rec.time_s = start.elapsed().as_secs_f64();
        records.push(rec);

        if stop.fires(tan, stepper.current()) {
            success = true;
            break;
        }
    }

    let (point, xi) = stepper.certificate();
    Ok(IterateTrace {
        method: config.method,
        records,
        success,
        iterations,
        elapsed_s: start.elapsed().as_secs_f64(),
        final_z: stepper.current().into(),
        final_point: point.into(),
        final_xi: xi.into(),
        form_deviation: stepper.form_deviation(),
    })
}

/// First iteration (and elapsed seconds) at which the residual dropped below each threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdHits {
    pub thresholds: Vec<f64>,
    pub iterations: Vec<Option<usize>>,
    pub times: Vec<Option<f64>>,
    pub total_iterations: usize,
}

/// Lean loop for table runs: steps until every threshold is met by
/// `residual(p, ξ, F(p))` or `config.max_iter` steps have run.
pub fn run_to_thresholds(
    oracle: &dyn Oracle,
    config: &SolverConfig,
    init: &InitialPoint,
    thresholds: &[f64],
    residual: &dyn Fn(&[f64], &[f64], &[f64]) -> f64,
) -> Result<ThresholdHits, ParamError> {
    let mut stepper = make_stepper(oracle, config, init)?;
    let mut f_point = vec![0.0; oracle.dim()];
    let mut hits = ThresholdHits {
        thresholds: thresholds.to_vec(),
        iterations: vec![None; thresholds.len()],
        times: vec![None; thresholds.len()],
        total_iterations: 0,
    };
    let mut open = thresholds.len();
    let start = Instant::now();
    while open > 0 && hits.total_iterations < config.max_iter {
        stepper.step(oracle);
        hits.total_iterations += 1;
        let (point, xi) = stepper.certificate();
        oracle.forward_into(point, &mut f_point);
        let r = residual(point, xi, &f_point);
        for (j, &eps) in thresholds.iter().enumerate() {
            if hits.iterations[j].is_none() && r <= eps {
                hits.iterations[j] = Some(hits.total_iterations);
                hits.times[j] = Some(start.elapsed().as_secs_f64());
                open -= 1;
            }
        }
    }
    Ok(hits)
}

/// `‖ξ + F(p)‖`, the default residual for [`run_to_thresholds`].
pub fn tangent_residual(_point: &[f64], xi: &[f64], f_point: &[f64]) -> f64 {
    kernels::norm_sum(xi, f_point)
}
