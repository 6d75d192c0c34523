//! The fast reflected forward-backward iteration and the splitting baselines
//! behind one stepping interface.

mod baselines;
mod fast_rfb;
mod run;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::numkit::Vector;
use crate::problem::Oracle;

pub use baselines::{Aeg, Apeg, Arg, Eg, Fbf, Frb, Ogda, Pfbf, Rfb};
pub use fast_rfb::FastRfb;
pub use run::{
    run_solver, run_to_thresholds, run_with_observer, EnergySpec, IterateRecord, IterateTrace,
    tangent_residual, Snapshot, StoppingRule, ThresholdHits, TraceOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    FastRfb,
    Eg,
    Ogda,
    Fbf,
    Pfbf,
    Frb,
    Rfb,
    Arg,
    Aeg,
    Apeg,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::FastRfb,
        Method::Eg,
        Method::Ogda,
        Method::Fbf,
        Method::Pfbf,
        Method::Frb,
        Method::Rfb,
        Method::Arg,
        Method::Aeg,
        Method::Apeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FastRfb => "fast_rfb",
            Method::Eg => "eg",
            Method::Ogda => "ogda",
            Method::Fbf => "fbf",
            Method::Pfbf => "pfbf",
            Method::Frb => "frb",
            Method::Rfb => "rfb",
            Method::Arg => "arg",
            Method::Aeg => "aeg",
            Method::Apeg => "apeg",
        }
    }

    /// Largest admissible step for Lipschitz constant `l`, and whether the cap itself is allowed.
    pub fn step_cap(self, l: f64) -> (f64, bool) {
        match self {
            Method::FastRfb | Method::Ogda | Method::Pfbf | Method::Frb => (0.5 / l, false),
            Method::Eg | Method::Fbf | Method::Aeg => (1.0 / l, false),
            Method::Rfb => ((2f64.sqrt() - 1.0) / l, false),
            Method::Arg => (1.0 / (2.0 * 6f64.sqrt() * l), true),
            Method::Apeg => (3.0 / (2.0 * 29f64.sqrt() * l), true),
        }
    }

    fn cap_rule(self) -> &'static str {
        match self {
            Method::FastRfb | Method::Ogda | Method::Pfbf | Method::Frb => "gamma < 1/(2L)",
            Method::Eg | Method::Fbf | Method::Aeg => "gamma < 1/L",
            Method::Rfb => "gamma < (sqrt(2)-1)/L",
            Method::Arg => "gamma <= 1/(2 sqrt(6) L)",
            Method::Apeg => "gamma <= 3/(2 sqrt(29) L)",
        }
    }

    /// Forward evaluations per steady-state step.
    pub fn forward_evals_per_step(self) -> usize {
        match self {
            Method::Eg | Method::Fbf | Method::Aeg => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key || (key == "fastrfb" && *m == Method::FastRfb))
            .ok_or_else(|| ParamError::UnknownMethod(s.to_string()))
    }
}

/// Which of the two equivalent fast RFB recursions to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// Updates `y_k`, `w_k`, `z_{k+1}` directly.
    Primal,
    /// Carries the certificate `ξ_k ∈ M(z_k)` instead of `y_k`.
    Certificate,
    /// Runs both side by side and tracks their largest deviation.
    Both,
}

impl FromStr for Form {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "primal" => Ok(Form::Primal),
            "certificate" | "cert" => Ok(Form::Certificate),
            "both" => Ok(Form::Both),
            _ => Err(ParamError::UnknownForm(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("unknown form '{0}' (expected primal, certificate or both)")]
    UnknownForm(String),
    #[error("Lipschitz constant must be positive and finite, got {0}")]
    Lipschitz(f64),
    #[error("alpha > 2 violated: alpha = {0}")]
    Alpha(f64),
    #[error("alpha/2 < c < alpha - 1 violated: c = {c}, required {lo} < c < {hi}")]
    C { c: f64, lo: f64, hi: f64 },
    #[error("{rule} violated for {method}: gamma = {gamma}, bound = {bound}")]
    Gamma {
        method: Method,
        rule: &'static str,
        gamma: f64,
        bound: f64,
    },
    #[error("eta must be positive and finite, got {0}")]
    Eta(f64),
    #[error("safety factor must lie in (0, 1), got {0}")]
    Safety(f64),
    #[error("initial point has length {found}, problem dimension is {expected}")]
    InitDimension { expected: usize, found: usize },
}

/// `c = (α + 0.1(α − 2))/2`, a point just above the lower end of `(α/2, α − 1)`.
pub fn default_c(alpha: f64) -> f64 {
    (alpha + 0.1 * (alpha - 2.0)) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
    pub eta: f64,
    pub safety: f64,
    pub max_iter: usize,
    pub form: Form,
}

impl SolverConfig {
    pub const DEFAULT_SAFETY: f64 = 0.99;
    pub const DEFAULT_ALPHA: f64 = 10.0;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    /// Default parameters: `γ = 0.99 × cap`, `η = 1`, `α = 10`, `c = default_c(α)`.
    pub fn new(method: Method, lipschitz: f64) -> Self {
        let alpha = Self::DEFAULT_ALPHA;
        SolverConfig {
            method,
            alpha,
            c: default_c(alpha),
            gamma: Self::DEFAULT_SAFETY * method.step_cap(lipschitz).0,
            eta: 1.0,
            safety: Self::DEFAULT_SAFETY,
            max_iter: Self::DEFAULT_MAX_ITER,
            form: Form::Certificate,
        }
    }

    pub fn fast_rfb(alpha: f64, lipschitz: f64) -> Self {
        Self::new(Method::FastRfb, lipschitz).with_alpha(alpha)
    }

    /// Sets `α` and moves `c` to `default_c(α)`.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.c = default_c(alpha);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Sets the safety factor and rescales `γ` to `safety × cap`.
    pub fn with_safety(mut self, safety: f64, lipschitz: f64) -> Self {
        self.safety = safety;
        self.gamma = safety * self.method.step_cap(lipschitz).0;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }
}

/// Checks the published parameter constraints of `config.method` against `l`.
pub fn validate_params(config: &SolverConfig, l: f64) -> Result<(), ParamError> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(ParamError::Lipschitz(l));
    }
    if !(config.safety > 0.0 && config.safety < 1.0) {
        return Err(ParamError::Safety(config.safety));
    }
    if config.method == Method::FastRfb {
        if !(config.alpha > 2.0) || !config.alpha.is_finite() {
            return Err(ParamError::Alpha(config.alpha));
        }
        let (lo, hi) = (config.alpha / 2.0, config.alpha - 1.0);
        if !(config.c > lo && config.c < hi) {
            return Err(ParamError::C {
                c: config.c,
                lo,
                hi,
            });
        }
    }
    if matches!(config.method, Method::Eg | Method::Ogda) && !(config.eta > 0.0 && config.eta.is_finite()) {
        return Err(ParamError::Eta(config.eta));
    }
    let (bound, inclusive) = config.method.step_cap(l);
    let ok = config.gamma > 0.0 && if inclusive { config.gamma <= bound } else { config.gamma < bound };
    if !ok {
        return Err(ParamError::Gamma {
            method: config.method,
            rule: config.method.cap_rule(),
            gamma: config.gamma,
            bound,
        });
    }
    Ok(())
}

/// Starting vectors. Only the fast RFB iteration reads `y0` and `w0`; they
/// default to `z0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoint {
    pub z0: Vector,
    pub y0: Option<Vector>,
    pub w0: Option<Vector>,
}

impl InitialPoint {
    pub fn zeros(dim: usize) -> Self {
        Self::from_z0(Vector::zeros(dim))
    }

    pub fn from_z0(z0: Vector) -> Self {
        InitialPoint {
            z0,
            y0: None,
            w0: None,
        }
    }

    /// Standard normal `z0`, `y0`, `w0`, drawn in that order from a ChaCha8 stream seeded with `seed`.
    pub fn gaussian(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vector { (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let z0 = draw();
        let y0 = draw();
        let w0 = draw();
        InitialPoint {
            z0,
            y0: Some(y0),
            w0: Some(w0),
        }
    }

    pub fn dim(&self) -> usize {
        self.z0.len()
    }

    pub fn y0(&self) -> &[f64] {
        self.y0.as_deref().unwrap_or(&self.z0)
    }

    pub fn w0(&self) -> &[f64] {
        self.w0.as_deref().unwrap_or(&self.z0)
    }

    fn check(&self, dim: usize) -> Result<(), ParamError> {
        for len in [self.z0.len(), self.y0().len(), self.w0().len()] {
            if len != dim {
                return Err(ParamError::InitDimension {
                    expected: dim,
                    found: len,
                });
            }
        }
        Ok(())
    }
}

/// The fast RFB quantities the Lyapunov energies are built from.
#[derive(Debug, Clone, Copy)]
pub struct FastView<'a> {
    /// `v_k = F(w_{k−1}) + ξ_k`
    pub v: &'a [f64],
    pub v_prev: &'a [f64],
    /// `F(w_{k−1})`
    pub f_w_prev: &'a [f64],
}

/// One iteration of a splitting method. Each call to [`Stepper::step`]
/// advances the iterate index by one.
pub trait Stepper: Send {
    fn method(&self) -> Method;
    fn gamma(&self) -> f64;
    fn step(&mut self, oracle: &dyn Oracle);
    /// Index of the current iterate `z_k`.
    fn k(&self) -> usize;
    fn current(&self) -> &[f64];
    fn previous(&self) -> &[f64];
    /// A resolvent output `p` with `ξ ∈ M(p)` from the latest step.
    fn certificate(&self) -> (&[f64], &[f64]);
    fn fast_view(&self) -> Option<FastView<'_>> {
        None
    }
    /// Largest relative deviation between the two fast RFB forms so far.
    fn form_deviation(&self) -> Option<f64> {
        None
    }
}

/// Validates `config` and builds the stepper positioned at the initial point.
pub fn make_stepper(
    oracle: &dyn Oracle,
    config: &SolverConfig,
    init: &InitialPoint,
) -> Result<Box<dyn Stepper>, ParamError> {
    validate_params(config, oracle.lipschitz())?;
    init.check(oracle.dim())?;
    let g = config.gamma;
    let z0 = init.z0.as_slice();
    Ok(match config.method {
        Method::FastRfb => Box::new(FastRfb::new(config, init)),
        Method::Eg => Box::new(Eg::new(g, config.eta, z0)),
        Method::Ogda => Box::new(Ogda::new(g, config.eta, z0)),
        Method::Fbf => Box::new(Fbf::new(g, z0)),
        Method::Pfbf => Box::new(Pfbf::new(g, z0)),
        Method::Frb => Box::new(Frb::new(g, z0)),
        Method::Rfb => Box::new(Rfb::new(g, z0)),
        Method::Arg => Box::new(Arg::new(g, z0)),
        Method::Aeg => Box::new(Aeg::new(g, z0)),
        Method::Apeg => Box::new(Apeg::new(g, z0)),
    })
}
