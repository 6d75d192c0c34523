use std::io::Write;
use std::path::{Path, PathBuf};

use fastrfb::analysis::{self, LyapunovParams};
use fastrfb::bench::{self, Execution, FigureOptions, TableMethod};
use fastrfb::primal_dual::{run_packed, PdReference, SaddleProblem};
use fastrfb::splitters::{
    run_with_observer, validate_params, Form, InitialPoint, IterateTrace, Method, SolverConfig, StoppingRule,
    TraceOptions,
};
use fastrfb::{ConeKind, Oracle, ProblemInstance, Vector};

use crate::csv::{num, opt, write_atomic, Table};
use crate::spec::{config_error, merge, parse_list_f64, parse_seeds, Check, CommonArgs, ProblemKind};
use crate::Failure;

enum Problem {
    Known(ProblemInstance),
    Chain { pd: SaddleProblem, cone: ConeKind, n: usize },
}

impl Problem {
    fn build(kind: ProblemKind, n: usize) -> Result<Self, Failure> {
        Ok(match kind {
            ProblemKind::Known => {
                if n == 0 {
                    return Err(Failure::Config("n must be positive".into()));
                }
                let mut a = Vector::zeros(n);
                a[0] = 2.0;
                if n > 1 {
                    a[1] = -0.5;
                }
                Problem::Known(bench::build_known_solution_problem(a))
            }
            ProblemKind::ChainEq | ProblemKind::ChainIneq => {
                let cone = if kind == ProblemKind::ChainEq {
                    ConeKind::ZeroCone
                } else {
                    ConeKind::NonnegOrthant
                };
                let pd = bench::build_qp_problem(n, cone).map_err(|e| Failure::Config(e.to_string()))?;
                Problem::Chain { pd, cone, n }
            }
        })
    }

    fn oracle(&self) -> ProblemInstance {
        match self {
            Problem::Known(p) => p.clone(),
            Problem::Chain { pd, .. } => pd.packed(),
        }
    }

    fn pd_reference(&self) -> Result<Option<std::sync::Arc<PdReference>>, Failure> {
        match self {
            Problem::Known(_) => Ok(None),
            Problem::Chain { cone, n, .. } => bench::reference_solution(*n, *cone)
                .map(Some)
                .map_err(|e| Failure::Numeric(e.to_string())),
        }
    }

    fn z_star(&self) -> Result<Option<Vector>, Failure> {
        Ok(match self {
            Problem::Known(p) => p.solution.clone(),
            Problem::Chain { .. } => self.pd_reference()?.map(|r| Vector::concat(&[&r.x, &r.lam])),
        })
    }
}

fn default_n(kind: ProblemKind, known_default: usize) -> usize {
    if kind == ProblemKind::Known {
        known_default
    } else {
        200
    }
}

fn solver_config(args: &CommonArgs, method: Method, lipschitz: f64, default_max_iter: usize) -> Result<SolverConfig, Failure> {
    let mut config = SolverConfig::new(method, lipschitz).with_max_iter(args.max_iter.unwrap_or(default_max_iter));
    if let Some(a) = args.alpha {
        config = config.with_alpha(a);
    }
    if let Some(c) = args.c {
        config = config.with_c(c);
    }
    if let Some(g) = args.gamma {
        config = config.with_gamma(g);
    }
    validate_params(&config, lipschitz).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(config)
}

fn single_epsilon(args: &CommonArgs) -> Result<Option<f64>, Failure> {
    match &args.epsilon {
        None => Ok(None),
        Some(s) => {
            let v = parse_list_f64("epsilon", s)?;
            if v.len() != 1 || !(v[0] > 0.0) {
                return Err(Failure::Config("epsilon must be a single positive number".into()));
            }
            Ok(Some(v[0]))
        }
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, contents).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

const TRACE_COLUMNS: [&str; 13] = [
    "k",
    "velocity",
    "tan_residual_upper",
    "fix_residual",
    "v_norm",
    "pd_gap",
    "obj_gap",
    "feasibility",
    "complementarity",
    "energy_E",
    "energy_G",
    "identity_residual",
    "time_s",
];

fn trace_csv(trace: &IterateTrace) -> String {
    let mut t = Table::new(&TRACE_COLUMNS);
    for r in &trace.records {
        t.push(&[
            r.k.to_string(),
            num(r.velocity),
            num(r.tan_residual_upper),
            num(r.fix_residual),
            opt(r.v_norm),
            opt(r.pd_gap),
            opt(r.obj_gap),
            opt(r.feasibility),
            opt(r.complementarity),
            opt(r.energy_e),
            opt(r.energy_g),
            opt(r.identity_residual),
            num(r.time_s),
        ]);
    }
    t.render()
}

fn initial_point(args: &CommonArgs, dim: usize) -> Result<InitialPoint, Failure> {
    Ok(match &args.seeds {
        Some(s) => InitialPoint::gaussian(dim, parse_seeds(s)?[0]),
        None => InitialPoint::zeros(dim),
    })
}

pub fn run(args: CommonArgs) -> Result<(), Failure> {
    let args = merge(args)?;
    let kind = args.problem.unwrap_or(ProblemKind::ChainEq);
    let problem = Problem::build(kind, args.n.unwrap_or(default_n(kind, 2)))?;
    let oracle = problem.oracle();
    let method: Method = args.method.as_deref().unwrap_or("fast_rfb").parse().map_err(|e: fastrfb::splitters::ParamError| Failure::Config(e.to_string()))?;
    let config = solver_config(&args, method, oracle.lipschitz(), 10_000)?;
    let stop = match single_epsilon(&args)? {
        Some(eps) => StoppingRule::KktNorm(eps),
        None => StoppingRule::None,
    };
    let init = initial_point(&args, oracle.dim())?;
    let lyapunov = (method == Method::FastRfb)
        .then(|| LyapunovParams::identity_default(config.alpha, config.c, config.gamma, oracle.lipschitz()).ok())
        .flatten();

    let trace = match &problem {
        Problem::Known(p) => {
            let opts = TraceOptions {
                reference: p.solution.clone(),
                lyapunov,
            };
            run_with_observer(p, &config, &init, &stop, &opts, &mut |_, _| {})
                .map_err(|e| Failure::Config(e.to_string()))?
        }
        Problem::Chain { pd, .. } => {
            let reference = problem.pd_reference()?;
            run_packed(pd, &config, &init, &stop, reference.as_deref(), lyapunov)
                .map_err(|e| Failure::Config(e.to_string()))?
        }
    };
    emit(args.out.as_deref(), &trace_csv(&trace))?;
    if !trace.final_z.is_finite() || trace.records.iter().any(|r| !r.tan_residual_upper.is_finite()) {
        return Err(Failure::Numeric("non-finite iterate".into()));
    }
    Ok(())
}

fn parse_methods(list: &str, alpha: Option<f64>) -> Result<Vec<TableMethod>, Failure> {
    let mut out = Vec::new();
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (name, a) = match token.split_once(':') {
            Some((name, a)) => (name, Some(a.parse::<f64>().map_err(|_| config_error(format!("bad alpha in {token:?}")))?)),
            None => (token, None),
        };
        let method: Method = name.parse().map_err(|e: fastrfb::splitters::ParamError| Failure::Config(e.to_string()))?;
        out.push(match method {
            Method::FastRfb => TableMethod::fast_rfb(a.or(alpha).unwrap_or(10.0)),
            m => TableMethod::new(m),
        });
    }
    if out.is_empty() {
        return Err(Failure::Config("empty method list".into()));
    }
    Ok(out)
}

pub fn table(args: CommonArgs) -> Result<(), Failure> {
    let args = merge(args)?;
    if args.problem.is_some_and(|p| p != ProblemKind::ChainEq) {
        return Err(Failure::Config("tables are defined on the chain-eq problem".into()));
    }
    let methods = match &args.method {
        Some(list) => parse_methods(list, args.alpha)?,
        None => bench::table_methods(),
    };
    let eps = parse_list_f64("epsilon", args.epsilon.as_deref().unwrap_or("1e-1"))?;
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Failure::Config("epsilon must be positive".into()));
    }
    let seeds = parse_seeds(args.seeds.as_deref().unwrap_or("0-9"))?;
    let n = args.n.unwrap_or(200);
    let max_iter = args.max_iter.unwrap_or(bench::TABLE_MAX_ITER);
    let runs = bench::run_table_runs(&methods, &eps, n, &seeds, max_iter, Execution::Parallel)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let reports = bench::reports_from_runs(&methods, &runs, &eps, n);

    for report in &reports {
        let mut t = Table::new(&["method", "success_rate", "avg_iters", "std_iters", "avg_time_s", "std_time_s"]);
        for r in &report.rows {
            t.push(&[
                r.label.clone(),
                num(r.success_rate),
                num(r.mean_iters),
                num(r.std_iters),
                num(r.mean_time_s),
                num(r.std_time_s),
            ]);
            eprintln!(
                "eps={:e} {:<20} success {:.1} iters {:.1} ± {:.3}",
                report.epsilon, r.label, r.success_rate, r.mean_iters, r.std_iters
            );
        }
        let out = match (&args.out, reports.len()) {
            (Some(p), 1) => Some(p.clone()),
            (Some(p), _) => Some(suffixed(p, &format!("eps{:e}", report.epsilon))),
            (None, _) => None,
        };
        emit(out.as_deref(), &t.render())?;
    }
    Ok(())
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{tag}{ext}"))
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn verify(args: CommonArgs, check: Check, lambda: Option<f64>, s: Option<f64>) -> Result<(), Failure> {
    let args = merge(args)?;
    let kind = args.problem.unwrap_or(ProblemKind::Known);
    let problem = Problem::build(kind, args.n.unwrap_or(default_n(kind, 50)))?;
    let oracle = problem.oracle();
    let l = oracle.lipschitz();
    let config = solver_config(&args, Method::FastRfb, l, 1000)?.with_form(Form::Both);
    if args.method.as_deref().is_some_and(|m| m.parse::<Method>().ok() != Some(Method::FastRfb)) {
        return Err(Failure::Config("verify runs the fast_rfb method only".into()));
    }
    let identity_params = {
        let base = LyapunovParams::identity_default(config.alpha, config.c, config.gamma, l)
            .map_err(|e| Failure::Config(e.to_string()))?;
        LyapunovParams::new(lambda.unwrap_or(base.lambda), s.unwrap_or(base.s), config.alpha, config.c, config.gamma, l)
            .map_err(|e| Failure::Config(e.to_string()))?
    };
    let wants = |c: Check| check == Check::All || check == c;
    let mut outcomes = Vec::new();

    if [Check::Formulation, Check::Identity, Check::Membership, Check::Ordering]
        .into_iter()
        .any(wants)
    {
        let z_star = problem.z_star()?;
        let opts = TraceOptions {
            reference: z_star,
            lyapunov: Some(identity_params),
        };
        let mut membership: f64 = 0.0;
        let trace = run_with_observer(
            &oracle,
            &config,
            &InitialPoint::zeros(oracle.dim()),
            &StoppingRule::None,
            &opts,
            &mut |snap, _| {
                let (p, xi) = snap.stepper.certificate();
                membership = membership.max(oracle.m.membership_violation(p, xi));
            },
        )
        .map_err(|e| Failure::Config(e.to_string()))?;

        if wants(Check::Formulation) {
            let dev = trace.form_deviation.unwrap_or(f64::INFINITY);
            outcomes.push(Outcome {
                name: "formulation",
                pass: dev <= 1e-10,
                detail: format!("max relative deviation {dev:e} (tol 1e-10)"),
            });
        }
        if wants(Check::Identity) {
            let worst = trace
                .records
                .iter()
                .filter_map(|r| r.identity_residual)
                .fold(0.0, f64::max);
            let seen = trace.records.iter().filter(|r| r.identity_residual.is_some()).count();
            outcomes.push(Outcome {
                name: "identity",
                pass: seen > 0 && worst <= 1e-8,
                detail: format!(
                    "max relative residual {worst:e} over {seen} steps (tol 1e-8, lambda {}, s {})",
                    identity_params.lambda, identity_params.s
                ),
            });
        }
        if wants(Check::Membership) {
            outcomes.push(Outcome {
                name: "membership",
                pass: membership <= 1e-8,
                detail: format!("max violation {membership:e} (tol 1e-8)"),
            });
        }
        if wants(Check::Ordering) {
            let order = trace
                .records
                .iter()
                .map(|r| r.fix_residual - r.tan_residual_upper)
                .fold(f64::NEG_INFINITY, f64::max);
            let half = trace
                .records
                .iter()
                .filter_map(|r| r.lip_gap.map(|(a, b)| a - b))
                .fold(f64::NEG_INFINITY, f64::max);
            outcomes.push(Outcome {
                name: "ordering",
                pass: order <= 1e-12 && half <= 1e-12,
                detail: format!("max fix - tan {order:e}, max lip gap excess {half:e} (slack 1e-12)"),
            });
        }
    }

    if [Check::Omega, Check::Window, Check::Mu].into_iter().any(wants) {
        match LyapunovParams::inequality_default(config.alpha, config.c, config.gamma, l) {
            Err(e) => {
                for (c, name) in [(Check::Omega, "omega"), (Check::Window, "window"), (Check::Mu, "mu")] {
                    if wants(c) {
                        outcomes.push(Outcome {
                            name,
                            pass: false,
                            detail: e.to_string(),
                        });
                    }
                }
            }
            Ok(p) => {
                let omega = analysis::omega_constants(&p);
                if wants(Check::Omega) {
                    outcomes.push(Outcome {
                        name: "omega",
                        pass: omega.as_ref().is_ok_and(|w| w.sign_pattern_holds()),
                        detail: format!("{omega:?}"),
                    });
                }
                if wants(Check::Window) {
                    let w = analysis::lambda_window(p.alpha, p.c, p.s, p.delta);
                    let pass = w.as_ref().is_ok_and(|&(lo, hi)| 0.0 <= lo && lo < hi && hi <= p.s * p.alpha / 4.0);
                    outcomes.push(Outcome {
                        name: "window",
                        pass,
                        detail: format!("s {} delta {} window {w:?}", p.s, p.delta),
                    });
                }
                if wants(Check::Mu) {
                    let k = omega.map_err(|e| e.to_string()).and_then(|w| {
                        analysis::first_nonneg_k(&w, &p).map_err(|e| e.to_string())
                    });
                    outcomes.push(Outcome {
                        name: "mu",
                        pass: k.is_ok(),
                        detail: format!("first nonnegative index {k:?}"),
                    });
                }
            }
        }
    }

    let mut all = true;
    for o in &outcomes {
        all &= o.pass;
        println!("{} {:<12} {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Numeric("verification failed".into()))
    }
}

pub fn figure_data(args: CommonArgs, figure: u32) -> Result<(), Failure> {
    let args = merge(args)?;
    if !matches!(figure, 1..=5 | 7) {
        return Err(Failure::Config(bench::BenchError::UnknownFigure(figure).to_string()));
    }
    let mut opts = FigureOptions::published(figure);
    if let Some(n) = args.n {
        opts.n = n;
        opts.sizes_override = Some(n);
    }
    if let Some(it) = args.max_iter {
        opts.iters = it;
    }
    let panels = bench::figure_data(figure, opts, Execution::Parallel).map_err(|e| Failure::Config(e.to_string()))?;
    let dir = args.out.unwrap_or_else(|| PathBuf::from("figures"));
    let mut non_finite = false;
    for p in &panels {
        let mut t = Table::new(&p.columns);
        for row in &p.rows {
            non_finite |= row.iter().any(|v| !v.is_finite());
            let mut fields = vec![format!("{}", row[0] as usize)];
            fields.extend(row[1..].iter().map(|&v| num(v)));
            t.push(&fields);
        }
        let path = dir.join(format!("{}.csv", p.name));
        write_atomic(&path, &t.render()).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let _ = writeln!(std::io::stdout(), "{}", path.display());
    }
    if non_finite {
        return Err(Failure::Numeric("non-finite value in figure data".into()));
    }
    Ok(())
}

pub fn params(args: CommonArgs) -> Result<(), Failure> {
    let args = merge(args)?;
    let kind = args.problem.unwrap_or(ProblemKind::ChainEq);
    let problem = Problem::build(kind, args.n.unwrap_or(default_n(kind, 2)))?;
    let l = problem.oracle().lipschitz();
    let method: Method = args.method.as_deref().unwrap_or("fast_rfb").parse().map_err(|e: fastrfb::splitters::ParamError| Failure::Config(e.to_string()))?;
    let config = solver_config(&args, method, l, 10_000)?;
    println!("method = {method}");
    println!("lipschitz = {}", num(l));
    println!("gamma = {}", num(config.gamma));
    let (cap, inclusive) = method.step_cap(l);
    println!("gamma_cap = {} ({})", num(cap), if inclusive { "inclusive" } else { "strict" });
    if method != Method::FastRfb {
        return Ok(());
    }
    println!("alpha = {}", num(config.alpha));
    println!("c = {}", num(config.c));
    match LyapunovParams::inequality_default(config.alpha, config.c, config.gamma, l) {
        Err(e) => println!("lyapunov = unavailable ({e})"),
        Ok(p) => {
            println!("s = {}", num(p.s));
            println!("delta = {}", num(p.delta));
            if let Ok((lo, hi)) = analysis::lambda_window(p.alpha, p.c, p.s, p.delta) {
                println!("lambda_window = [{}, {}]", num(lo), num(hi));
            }
            println!("lambda = {}", num(p.lambda));
            if let Ok(w) = analysis::omega_constants(&p) {
                let all = [w.omega_0, w.omega_1, w.omega_2, w.omega_3, w.omega_4, w.omega_5, w.omega_6, w.omega_7];
                for (i, v) in all.iter().enumerate() {
                    println!("omega_{i} = {}", num(*v));
                }
                match analysis::first_nonneg_k(&w, &p) {
                    Ok(k) => println!("first_nonneg_k = {k}"),
                    Err(e) => println!("first_nonneg_k = unavailable ({e})"),
                }
            }
        }
    }
    Ok(())
}
