//! Benchmark problems and the experiment drivers behind the iteration tables
//! and the figure data.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::numkit::{kernels, NumError, SparseMatrix, Vector};
use crate::operators::{prox_l1, ConeKind, ForwardOp, MonotoneOp, OpError};
use crate::primal_dual::{compute_reference, DualBlock, PdError, PdReference, SaddleProblem};
use crate::problem::{Oracle, ProblemInstance};
use crate::splitters::{
    make_stepper, run_to_thresholds, InitialPoint, Method, ParamError, SolverConfig, ThresholdHits,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("problem size must be at least 2, got {0}")]
    Size(usize),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pd(#[from] PdError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("no methods given")]
    NoMethods,
    #[error("unknown figure {0}; known figures are 1, 2, 3, 4, 5 and 7")]
    UnknownFigure(u32),
    #[error("relative position {0} of c must lie in (0, 1)")]
    CPosition(f64),
}

/// Iteration cap of the table runs.
pub const TABLE_MAX_ITER: usize = 1_000_000;
/// Iteration cap of the parameter studies.
pub const STUDY_MAX_ITER: usize = 10_000;
/// Relative positions of `c` inside `(α/2, α−1)` used by the parameter studies.
pub const C_POSITIONS: [f64; 5] = [0.05, 0.275, 0.5, 0.725, 0.95];
/// Accuracy of the cached reference solutions.
pub const REFERENCE_TOL: f64 = 1e-12;
pub const REFERENCE_MAX_ITER: usize = 10_000_000;

/// The `n × n` anti-diagonal chain matrix scaled by `1/4`: row `i < n` holds
/// `−1/4` at column `n−i` and `+1/4` at column `n−i+1` (1-based), row `n` holds `+1/4` at column 1.
pub fn build_chain_matrix(n: usize) -> Result<SparseMatrix, BenchError> {
    if n < 2 {
        return Err(BenchError::Size(n));
    }
    let mut t = Vec::with_capacity(2 * n - 1);
    for r in 0..n - 1 {
        t.push((r, n - r - 2, -0.25));
        t.push((r, n - r - 1, 0.25));
    }
    t.push((n - 1, 0, 0.25));
    Ok(SparseMatrix::from_triplets(n, n, t)?)
}

/// `b = ¼(1, …, 1, −4)`
pub fn chain_b(n: usize) -> Vector {
    let mut b = Vector::from_elem(n, 0.25);
    b[n - 1] = -1.0;
    b
}

/// `h = ¼(0, …, 0, 1)`
pub fn chain_h(n: usize) -> Vector {
    let mut h = Vector::zeros(n);
    h[n - 1] = 0.25;
    h
}

/// `min ‖x‖₁ + ½⟨x, Hx⟩ − ⟨h, x⟩` subject to `Ax − b ∈ −K`, with `H = 2AᵀA` and the chain matrix `A`.
pub fn build_qp_problem(n: usize, cone: ConeKind) -> Result<SaddleProblem, BenchError> {
    let a = build_chain_matrix(n)?;
    let h_mat = a.gram().scaled(2.0);
    Ok(SaddleProblem::new(
        MonotoneOp::l1(1.0)?,
        h_mat,
        chain_h(n),
        a,
        chain_b(n),
        DualBlock::Cone(cone),
    )?)
}

/// `0 ∈ ∂‖z‖₁ + z − a`, whose zero is the soft threshold of `a` at 1.
pub fn build_known_solution_problem(a: Vector) -> ProblemInstance {
    let z_star = prox_l1(&a, 1.0);
    ProblemInstance::new(MonotoneOp::L1 { weight: 1.0 }, ForwardOp::shift_identity(a))
        .and_then(|p| p.with_solution(z_star))
        .expect("shift problems are always consistent")
}

/// `V(x, λ) = (u + Hx − h + Aᵀλ, b − Ax)`
pub fn kkt_residual(x: &[f64], lam: &[f64], u: &[f64], problem: &SaddleProblem) -> Result<Vector, BenchError> {
    let (nx, ny) = (problem.nx(), problem.ny());
    for (len, want) in [(x.len(), nx), (u.len(), nx), (lam.len(), ny)] {
        if len != want {
            return Err(NumError::Dimension { expected: want, found: len }.into());
        }
    }
    let mut out = vec![0.0; nx + ny];
    let (top, bottom) = out.split_at_mut(nx);
    problem.grad_x(x, lam, top);
    kernels::axpy_in_place(1.0, u, top);
    for (o, r) in bottom.iter_mut().zip(problem.residual(x)) {
        *o = -r;
    }
    Ok(out.into())
}

/// `‖V‖` from a packed certificate point, its `ξ` and `F(p)`; the multiplier block of `ξ` is ignored.
pub fn kkt_norm(nx: usize) -> impl Fn(&[f64], &[f64], &[f64]) -> f64 + Sync {
    move |_point, xi, f_point| {
        let mut s = 0.0;
        for i in 0..f_point.len() {
            let d = if i < nx { xi[i] + f_point[i] } else { f_point[i] };
            s += d * d;
        }
        s.sqrt()
    }
}

/// Exact KKT point of the equality-constrained chain QP.
///
/// The chain matrix is invertible, so `Ax = b` pins `x* = (−4, −3, …, n−5)`.
/// Any `u ∈ ∂‖x*‖₁` then gives a multiplier through `Aᵀλ = h − Hx* − u`; the zero
/// entry of `x*` takes `u = 0`.
pub fn chain_equality_solution(n: usize) -> Result<PdReference, BenchError> {
    let problem = build_qp_problem(n, ConeKind::ZeroCone)?;
    let x: Vector = (1..=n).map(|j| j as f64 - 5.0).collect();
    let mut r = vec![0.0; n];
    problem.h_mat().mul_into(&x, &mut r);
    for i in 0..n {
        let u = if x[i] == 0.0 { 0.0 } else { x[i].signum() };
        r[i] = problem.h()[i] - r[i] - u;
    }
    // column c of A holds −¼ in row n−c and +¼ in row n−c+1 (1-based), so Aᵀλ = r
    // unrolls to λ₁ = 4r_n and λ_j = λ_{j−1} + 4r_{n−j+1}
    let mut lam = Vector::zeros(n);
    lam[0] = 4.0 * r[n - 1];
    for j in 1..n {
        lam[j] = lam[j - 1] + 4.0 * r[n - 1 - j];
    }
    let packed = problem.packed();
    let z = Vector::concat(&[&x, &lam]);
    let mut fz = vec![0.0; 2 * n];
    packed.forward_into(&z, &mut fz);
    let xi: Vec<f64> = (0..2 * n).map(|i| if i < n { -fz[i] } else { 0.0 }).collect();
    let residual = kkt_norm(n)(&z, &xi, &fz);
    Ok(PdReference {
        x,
        lam,
        residual,
        iterations: 0,
    })
}

/// High-accuracy solution of the chain QP, computed once per `(n, cone)`: exact for the
/// equality constraint, a long fast RFB run otherwise.
pub fn reference_solution(n: usize, cone: ConeKind) -> Result<Arc<PdReference>, BenchError> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, ConeKind), Arc<PdReference>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().expect("reference cache poisoned").get(&(n, cone)) {
        return Ok(r.clone());
    }
    let r = Arc::new(match cone {
        ConeKind::ZeroCone => chain_equality_solution(n)?,
        _ => compute_reference(&build_qp_problem(n, cone)?, REFERENCE_TOL, REFERENCE_MAX_ITER)?,
    });
    cache
        .lock()
        .expect("reference cache poisoned")
        .entry((n, cone))
        .or_insert_with(|| r.clone());
    Ok(r)
}

/// How the experiment matrix is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Runs on the rayon pool; identical to `Sequential` without the `parallel` feature.
    #[default]
    Parallel,
}

fn fan_out<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// A table row: a method with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMethod {
    pub label: String,
    pub method: Method,
    pub alpha: f64,
}

impl TableMethod {
    pub fn new(method: Method) -> Self {
        TableMethod {
            label: method.name().to_string(),
            method,
            alpha: 10.0,
        }
    }

    pub fn fast_rfb(alpha: f64) -> Self {
        TableMethod {
            label: format!("fast_rfb_alpha_{alpha}"),
            method: Method::FastRfb,
            alpha,
        }
    }

    /// Default parameters: `γ = 0.99 × cap`, `η = 1`, `c = (α + 0.1(α−2))/2`.
    pub fn config(&self, lipschitz: f64, max_iter: usize) -> SolverConfig {
        SolverConfig::new(self.method, lipschitz)
            .with_alpha(self.alpha)
            .with_max_iter(max_iter)
    }
}

/// EG, OGDA, FRB, RFB, ARG and fast RFB with `α = 5` and `α = 10`.
pub fn table_methods() -> Vec<TableMethod> {
    let mut m: Vec<TableMethod> = [Method::Eg, Method::Ogda, Method::Frb, Method::Rfb, Method::Arg]
        .into_iter()
        .map(TableMethod::new)
        .collect();
    m.push(TableMethod::fast_rfb(5.0));
    m.push(TableMethod::fast_rfb(10.0));
    m
}

pub fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// One (method, seed) run of the table experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRun {
    pub label: String,
    pub seed: u64,
    pub hits: ThresholdHits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub success_rate: f64,
    /// Statistics over successful runs; `NaN` when none succeeded.
    pub mean_iters: f64,
    pub std_iters: f64,
    pub mean_time_s: f64,
    pub std_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub epsilon: f64,
    pub n: usize,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Population mean and standard deviation; `NaN` for an empty sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

/// Runs every method from every seed once, recording the first crossing of each threshold.
pub fn run_table_runs(
    methods: &[TableMethod],
    thresholds: &[f64],
    n: usize,
    seeds: &[u64],
    max_iter: usize,
    exec: Execution,
) -> Result<Vec<TableRun>, BenchError> {
    if methods.is_empty() {
        return Err(BenchError::NoMethods);
    }
    let problem = build_qp_problem(n, ConeKind::ZeroCone)?;
    let packed = problem.packed();
    let l = packed.lipschitz();
    let residual = kkt_norm(n);
    let jobs: Vec<(&TableMethod, u64)> = methods
        .iter()
        .flat_map(|m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    fan_out(&jobs, exec, |(m, seed)| {
        let init = InitialPoint::gaussian(packed.dim(), *seed);
        let hits = run_to_thresholds(&packed, &m.config(l, max_iter), &init, thresholds, &residual)?;
        Ok(TableRun {
            label: m.label.clone(),
            seed: *seed,
            hits,
        })
    })
    .into_iter()
    .collect()
}

/// Aggregates runs into one report per threshold.
pub fn reports_from_runs(methods: &[TableMethod], runs: &[TableRun], thresholds: &[f64], n: usize) -> Vec<ExperimentReport> {
    thresholds
        .iter()
        .enumerate()
        .map(|(j, &epsilon)| {
            let rows = methods
                .iter()
                .map(|m| {
                    let mine: Vec<&TableRun> = runs.iter().filter(|r| r.label == m.label).collect();
                    let iters: Vec<f64> = mine.iter().filter_map(|r| r.hits.iterations[j]).map(|k| k as f64).collect();
                    let times: Vec<f64> = mine.iter().filter_map(|r| r.hits.times[j]).collect();
                    let (mean_iters, std_iters) = mean_std(&iters);
                    let (mean_time_s, std_time_s) = mean_std(&times);
                    ReportRow {
                        label: m.label.clone(),
                        success_rate: if mine.is_empty() { 0.0 } else { iters.len() as f64 / mine.len() as f64 },
                        mean_iters,
                        std_iters,
                        mean_time_s,
                        std_time_s,
                    }
                })
                .collect();
            ExperimentReport { epsilon, n, rows }
        })
        .collect()
}

/// Table experiment on the equality-constrained chain QP at one accuracy.
pub fn run_table_experiment(
    methods: &[TableMethod],
    epsilon: f64,
    n: usize,
    seeds: &[u64],
    exec: Execution,
) -> Result<ExperimentReport, BenchError> {
    let runs = run_table_runs(methods, &[epsilon], n, seeds, TABLE_MAX_ITER, exec)?;
    Ok(reports_from_runs(methods, &runs, &[epsilon], n).remove(0))
}

/// Diagnostics of a primal-dual run at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub k: usize,
    pub velocity: f64,
    pub x_velocity: f64,
    pub lam_velocity: f64,
    /// `‖ξ + F(p)‖` at the certificate point; `‖V‖` on the equality problem.
    pub residual: f64,
    /// `‖v − Ax + b‖`
    pub feasibility: f64,
    /// `L(x_k, λ*) − L(x*, λ_k)`
    pub gap: f64,
    /// `|(f+h)(x_k) − (f+h)(x*)|`
    pub objective_gap: f64,
}

/// `max(1, iters / 5000)`
pub fn sample_stride(iters: usize) -> usize {
    (iters / 5000).max(1)
}

/// Runs `config` for `iters` steps, sampling every `stride`-th iterate and the last one.
pub fn sample_run(
    problem: &SaddleProblem,
    config: &SolverConfig,
    init: &InitialPoint,
    iters: usize,
    stride: usize,
    reference: &PdReference,
) -> Result<Vec<Sample>, BenchError> {
    let packed = problem.packed();
    let mut stepper = make_stepper(&packed, config, init)?;
    let nx = problem.nx();
    let mut f_point = vec![0.0; packed.dim()];
    let mut out = Vec::with_capacity(iters / stride + 1);
    for it in 1..=iters {
        stepper.step(&packed);
        if it % stride != 0 && it != iters {
            continue;
        }
        let (point, xi) = stepper.certificate();
        packed.forward_into(point, &mut f_point);
        let (z, zp) = (stepper.current(), stepper.previous());
        let (x, lam) = point.split_at(nx);
        let feas: f64 = (nx..point.len())
            .map(|i| (xi[i] + f_point[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        out.push(Sample {
            k: stepper.k(),
            velocity: kernels::dist(z, zp),
            x_velocity: kernels::dist(&z[..nx], &zp[..nx]),
            lam_velocity: kernels::dist(&z[nx..], &zp[nx..]),
            residual: kernels::norm_sum(xi, &f_point),
            feasibility: feas,
            gap: problem.lagrangian(x, &reference.lam) - problem.lagrangian(&reference.x, lam),
            objective_gap: (problem.primal_objective(x) - problem.primal_objective(&reference.x)).abs(),
        });
    }
    Ok(out)
}

/// One configuration of a parameter study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRun {
    pub alpha: f64,
    pub c: f64,
    pub samples: Vec<Sample>,
}

/// `c = α/2 + t(α/2 − 1)` for relative position `t ∈ (0, 1)`.
pub fn c_at(alpha: f64, t: f64) -> Result<f64, BenchError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(BenchError::CPosition(t));
    }
    Ok(alpha / 2.0 + t * (alpha / 2.0 - 1.0))
}

/// Fast RFB from zero on the inequality-constrained chain QP for every `(α, c)` pair.
pub fn run_parameter_study(
    alphas: &[f64],
    c_positions: &[f64],
    n: usize,
    iters: usize,
    exec: Execution,
) -> Result<Vec<StudyRun>, BenchError> {
    let problem = build_qp_problem(n, ConeKind::NonnegOrthant)?;
    let reference = reference_solution(n, ConeKind::NonnegOrthant)?;
    let l = problem.lipschitz();
    let mut jobs = Vec::new();
    for &alpha in alphas {
        for &t in c_positions {
            let config = SolverConfig::fast_rfb(alpha, l).with_c(c_at(alpha, t)?).with_max_iter(iters);
            crate::splitters::validate_params(&config, l)?;
            jobs.push(config);
        }
    }
    let stride = sample_stride(iters);
    let init = InitialPoint::zeros(2 * n);
    fan_out(&jobs, exec, |config| {
        Ok(StudyRun {
            alpha: config.alpha,
            c: config.c,
            samples: sample_run(&problem, config, &init, iters, stride, &reference)?,
        })
    })
    .into_iter()
    .collect()
}

/// A CSV-ready table: a `k` column, the `1/k` reference, and one column per series.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePanel {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn panel(name: &str, labels: &[String], runs: &[Vec<Sample>], field: fn(&Sample) -> f64) -> FigurePanel {
    let mut columns = vec!["k".to_string(), "reference".to_string()];
    columns.extend(labels.iter().cloned());
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    let rows = (0..len)
        .map(|i| {
            let k = runs[0][i].k as f64;
            let mut row = vec![k, 1.0 / k];
            row.extend(runs.iter().map(|r| field(&r[i])));
            row
        })
        .collect();
    FigurePanel {
        name: name.to_string(),
        columns,
        rows,
    }
}

/// Sizes and iteration counts for figure data; the defaults follow the published setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    /// Problem size for figures 1–5; figure 7 always sweeps `{200, 500, 800, 1000}` unless `sizes_override` is set.
    pub n: usize,
    pub iters: usize,
    pub sizes_override: Option<usize>,
}

impl FigureOptions {
    pub fn published(id: u32) -> Self {
        FigureOptions {
            n: 1000,
            iters: if id <= 4 { STUDY_MAX_ITER } else { 500_000 },
            sizes_override: None,
        }
    }
}

/// Methods compared in figures 5 and 7.
pub fn comparison_methods() -> Vec<TableMethod> {
    table_methods()
}

fn comparison_runs(n: usize, iters: usize, exec: Execution) -> Result<(Vec<String>, Vec<Vec<Sample>>), BenchError> {
    let problem = build_qp_problem(n, ConeKind::ZeroCone)?;
    let reference = reference_solution(n, ConeKind::ZeroCone)?;
    let l = problem.lipschitz();
    let methods = comparison_methods();
    let stride = sample_stride(iters);
    let init = InitialPoint::zeros(2 * n);
    let runs: Result<Vec<Vec<Sample>>, BenchError> = fan_out(&methods, exec, |m| {
        sample_run(&problem, &m.config(l, iters), &init, iters, stride, &reference)
    })
    .into_iter()
    .collect();
    Ok((methods.into_iter().map(|m| m.label).collect(), runs?))
}

/// Panels for figure `id`: 1–4 are parameter studies at `α = 3, 5, 10, 20`;
/// 5 compares methods on the equality problem; 7 compares `‖V‖` across sizes.
pub fn figure_data(id: u32, opts: FigureOptions, exec: Execution) -> Result<Vec<FigurePanel>, BenchError> {
    let quantities: [(&str, fn(&Sample) -> f64); 4] = [
        ("velocity", |s| s.velocity),
        ("tangent_residual", |s| s.residual),
        ("pd_gap", |s| s.gap),
        ("objective_gap", |s| s.objective_gap),
    ];
    match id {
        1..=4 => {
            let alpha = [3.0, 5.0, 10.0, 20.0][id as usize - 1];
            let study = run_parameter_study(&[alpha], &C_POSITIONS, opts.n, opts.iters, exec)?;
            let labels: Vec<String> = study.iter().map(|r| format!("c={}", r.c)).collect();
            let runs: Vec<Vec<Sample>> = study.into_iter().map(|r| r.samples).collect();
            Ok(quantities
                .iter()
                .map(|(name, f)| panel(&format!("figure{id}_{name}"), &labels, &runs, *f))
                .collect())
        }
        5 => {
            let (labels, runs) = comparison_runs(opts.n, opts.iters, exec)?;
            let mut fields: Vec<(&str, fn(&Sample) -> f64)> = vec![
                ("primal_velocity", |s| s.x_velocity),
                ("dual_velocity", |s| s.lam_velocity),
                ("feasibility", |s| s.feasibility),
            ];
            fields.extend(quantities.iter().skip(1).copied());
            Ok(fields
                .iter()
                .map(|(name, f)| panel(&format!("figure5_{name}"), &labels, &runs, *f))
                .collect())
        }
        7 => {
            let sizes = match opts.sizes_override {
                Some(n) => vec![n],
                None => vec![200, 500, 800, 1000],
            };
            sizes
                .into_iter()
                .map(|n| {
                    let (labels, runs) = comparison_runs(n, opts.iters, exec)?;
                    Ok(panel(&format!("figure7_n{n}"), &labels, &runs, |s| s.residual))
                })
                .collect()
        }
        other => Err(BenchError::UnknownFigure(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_matrix_small() {
        let a = build_chain_matrix(3).unwrap().to_dense();
        let expect = [[0.0, -1.0, 1.0], [-1.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[i][j], 0.25 * expect[i][j]);
            }
        }
        assert!(matches!(build_chain_matrix(1), Err(BenchError::Size(1))));
        assert_eq!(build_chain_matrix(50).unwrap().nnz(), 99);
    }

    #[test]
    fn qp_vectors() {
        assert_eq!(chain_b(5).as_slice(), &[0.25, 0.25, 0.25, 0.25, -1.0]);
        assert_eq!(chain_h(5).as_slice(), &[0.0, 0.0, 0.0, 0.0, 0.25]);
    }

    #[test]
    fn known_solution() {
        let p = build_known_solution_problem([2.0, -0.5].into());
        assert_eq!(p.solution.as_deref(), Some(&[1.0, 0.0][..]));
        let p = build_known_solution_problem([0.0, 0.0].into());
        assert_eq!(p.solution.as_deref(), Some(&[0.0, 0.0][..]));
    }

    #[test]
    fn kkt_at_origin() {
        let p = build_qp_problem(4, ConeKind::ZeroCone).unwrap();
        let z = [0.0; 4];
        let v = kkt_residual(&z, &z, &z, &p).unwrap();
        let mut expect: Vec<f64> = chain_h(4).iter().map(|h| -h).collect();
        expect.extend(chain_b(4).iter());
        assert_eq!(v.as_slice(), &expect[..]);
        assert!(kkt_residual(&z[..3], &z, &z, &p).is_err());
    }

    #[test]
    fn equality_solution_is_a_kkt_point() {
        for n in [3, 7, 200] {
            let r = chain_equality_solution(n).unwrap();
            let p = build_qp_problem(n, ConeKind::ZeroCone).unwrap();
            assert!(kernels::norm(&p.residual(&r.x)) < 1e-12);
            let mut g = vec![0.0; n];
            p.grad_x(&r.x, &r.lam, &mut g);
            let u: Vec<f64> = g.iter().map(|v| -v).collect();
            assert!(MonotoneOp::L1 { weight: 1.0 }.membership_violation(&r.x, &u) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn stats_convention() {
        let (m, s) = mean_std(&[]);
        assert!(m.is_nan() && s.is_nan());
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }

    #[test]
    fn c_grid() {
        assert_eq!(c_at(10.0, 0.5).unwrap(), 7.0);
        assert!(c_at(10.0, 1.0).is_err());
    }
}
