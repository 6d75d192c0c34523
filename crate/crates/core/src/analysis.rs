//! Residuals, rate fits and the Lyapunov energies of the fast RFB iteration.
//!
//! With `v_k = F(w_{k−1}) + ξ_k`, `ω(k) = (2−s)k + 2(α−c)` and a zero `z*`:
//!
//! ```text
//! u_k = 2λ(z_k − z*) + 2k(z_k − z_{k−1}) + sγk v_k
//! E_k = ½‖u_k‖² + 2λ(α−1−λ)‖z_k − z*‖² + 2λγ ω(k) ⟨z_k − z*, v_k⟩ + ½γ² ω(k)(sk + 2c)‖v_k‖²
//! G_k = E_k − 2γ ω(k) k ⟨z_k − z_{k−1}, F(z_k) − F(w_{k−1})⟩
//!           + γ³L ω(k)(k + α − c + cγL √ω(k)) ‖v_k − v_{k−1}‖²
//! ```

use thiserror::Error;

use crate::numkit::kernels;
use crate::problem::Oracle;
use crate::splitters::{IterateRecord, IterateTrace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{name} = {value} outside the admissible range {range}")]
    Range {
        name: &'static str,
        value: f64,
        range: String,
    },
    #[error("lambda window is empty: lower {lower}, upper {upper}")]
    EmptyWindow { lower: f64, upper: f64 },
    #[error("lambda window discriminant is not positive: {0}")]
    Discriminant(f64),
    #[error("mu_k stays negative somewhere below k = {0}")]
    NoNonnegativeTail(usize),
    #[error("rate fit needs two positive samples, found {0}")]
    TooFewSamples(usize),
}

fn out_of_range(name: &'static str, value: f64, range: String) -> AnalysisError {
    AnalysisError::Range { name, value, range }
}

/// `‖ξ + F(z)‖`, an upper bound on `dist(0, M(z) + F(z))` whenever `ξ ∈ M(z)`.
pub fn tangent_residual_upper(xi: &[f64], fz: &[f64]) -> f64 {
    kernels::norm_sum(xi, fz)
}

/// `‖z − J_{γM}(z − γF(z))‖`
pub fn fixed_point_residual(z: &[f64], gamma: f64, oracle: &dyn Oracle) -> f64 {
    let mut t = vec![0.0; z.len()];
    oracle.forward_into(z, &mut t);
    for (ti, zi) in t.iter_mut().zip(z) {
        *ti = zi - gamma * *ti;
    }
    oracle.resolvent_in_place(gamma, &mut t);
    kernels::dist(z, &t)
}

/// Energy parameters together with the run parameters they are evaluated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub lambda: f64,
    pub s: f64,
    /// Only read by the λ-window; `NaN` when unset.
    pub delta: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
    pub lipschitz: f64,
}

impl LyapunovParams {
    /// Requires `0 ≤ λ ≤ α − 1` and `1 < s < 2`.
    pub fn new(lambda: f64, s: f64, alpha: f64, c: f64, gamma: f64, lipschitz: f64) -> Result<Self, AnalysisError> {
        if !(alpha > 2.0) {
            return Err(out_of_range("alpha", alpha, "(2, inf)".into()));
        }
        if !(c > alpha / 2.0 && c < alpha - 1.0) {
            return Err(out_of_range("c", c, format!("({}, {})", alpha / 2.0, alpha - 1.0)));
        }
        if !(0.0..=alpha - 1.0).contains(&lambda) {
            return Err(out_of_range("lambda", lambda, format!("[0, {}]", alpha - 1.0)));
        }
        if !(s > 1.0 && s < 2.0) {
            return Err(out_of_range("s", s, "(1, 2)".into()));
        }
        if !(gamma > 0.0) || !(lipschitz > 0.0) {
            return Err(out_of_range("gamma*L", gamma * lipschitz, "(0, inf)".into()));
        }
        Ok(LyapunovParams {
            lambda,
            s,
            delta: f64::NAN,
            alpha,
            c,
            gamma,
            lipschitz,
        })
    }

    /// `λ = (α−1)/2`, `s = 1.5`: admissible for the energy identity at every `(α, c)`.
    pub fn identity_default(alpha: f64, c: f64, gamma: f64, lipschitz: f64) -> Result<Self, AnalysisError> {
        Self::new((alpha - 1.0) / 2.0, 1.5, alpha, c, gamma, lipschitz)
    }

    /// Midpoints of the `s` interval, then the `δ` interval, then the λ-window.
    pub fn inequality_default(alpha: f64, c: f64, gamma: f64, lipschitz: f64) -> Result<Self, AnalysisError> {
        let (s_lo, s_hi) = s_interval(alpha, c);
        let s = 0.5 * (s_lo + s_hi);
        let (d_lo, d_hi) = delta_interval(alpha, c, s)?;
        let delta = 0.5 * (d_lo + d_hi);
        let (l_lo, l_hi) = lambda_window(alpha, c, s, delta)?;
        let mut p = Self::new(0.5 * (l_lo + l_hi), s, alpha, c, gamma, lipschitz)?;
        p.delta = delta;
        Ok(p)
    }

    fn omega_k(&self, k: f64) -> f64 {
        (2.0 - self.s) * k + 2.0 * (self.alpha - self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaConstants {
    pub omega_0: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_3: f64,
    pub omega_4: f64,
    pub omega_5: f64,
    pub omega_6: f64,
    pub omega_7: f64,
}

impl OmegaConstants {
    /// `ω₀ > 0, ω₃ ≤ 0, ω₄ < 0, ω₅ > 0, ω₆ > 0, ω₇ > 0`
    pub fn sign_pattern_holds(&self) -> bool {
        self.omega_0 > 0.0
            && self.omega_3 <= 0.0
            && self.omega_4 < 0.0
            && self.omega_5 > 0.0
            && self.omega_6 > 0.0
            && self.omega_7 > 0.0
    }
}

pub fn omega_constants(p: &LyapunovParams) -> Result<OmegaConstants, AnalysisError> {
    let checked = LyapunovParams::new(p.lambda, p.s, p.alpha, p.c, p.gamma, p.lipschitz)?;
    let LyapunovParams { lambda, s, alpha, c, .. } = checked;
    let omega_0 = 2.0 - s;
    let omega_6 = alpha - c;
    Ok(OmegaConstants {
        omega_0,
        omega_1: omega_0 * lambda + s * (lambda + 1.0 - alpha) + s - 2.0 * c,
        omega_2: 2.0 * lambda * alpha + s - 2.0 * alpha * c,
        omega_3: 2.0 * (lambda + 1.0 - alpha),
        omega_4: 2.0 * s * (1.0 - c),
        omega_5: (alpha - 2.0) * omega_0,
        omega_6,
        omega_7: (alpha - 1.0) * (2.0 * omega_6 - omega_0),
    })
}

fn pow_three_halves(x: f64) -> f64 {
    x * x.sqrt()
}

/// The coefficient `μ_k` of `γ²‖v_{k+1} − v_k‖²` in the `G` decrease estimate.
pub fn mu_k(k: usize, w: &OmegaConstants, p: &LyapunovParams) -> f64 {
    let k = k as f64;
    let gl = p.gamma * p.lipschitz;
    let (o0, o5, o6, o7) = (w.omega_0, w.omega_5, w.omega_6, w.omega_7);
    o0 * (1.0 - 2.0 * gl) * k * k + (2.0 * o6 + o0 * p.alpha) * k + 2.0 * o6 * p.alpha
        - 2.0 * gl * ((2.0 * (o0 + 2.0 * o6) - p.s * o6) * k + (o0 + 2.0 * o6) * (p.alpha + 1.0 - p.c))
        - pow_three_halves(k + 1.0)
        - pow_three_halves(o5 * (k + 1.0) + o7)
        - gl * gl * p.c * pow_three_halves(o0 * (k + 1.0) + 2.0 * o6)
}

pub const MU_LOOKAHEAD: usize = 1_000;
pub const MU_SCAN_LIMIT: usize = 10_000_000;

/// First `k ≥ 2` from which `μ_j ≥ 0` for the next [`MU_LOOKAHEAD`] indices.
pub fn first_nonneg_k(w: &OmegaConstants, p: &LyapunovParams) -> Result<usize, AnalysisError> {
    let mut candidate = 2;
    for k in 2..=MU_SCAN_LIMIT {
        if mu_k(k, w, p) < 0.0 {
            candidate = k + 1;
        } else if k - candidate >= MU_LOOKAHEAD {
            return Ok(candidate);
        }
    }
    Err(AnalysisError::NoNonnegativeTail(MU_SCAN_LIMIT))
}

/// `(k, z_k, z_{k−1}, v_k)`
#[derive(Debug, Clone, Copy)]
pub struct EnergyState<'a> {
    pub k: usize,
    pub z: &'a [f64],
    pub z_prev: &'a [f64],
    pub v: &'a [f64],
}

/// An [`EnergyState`] plus the quantities `G_k` adds.
#[derive(Debug, Clone, Copy)]
pub struct GState<'a> {
    pub e: EnergyState<'a>,
    pub v_prev: &'a [f64],
    pub f_z: &'a [f64],
    pub f_w_prev: &'a [f64],
}

pub fn lyapunov_e(st: &EnergyState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    let k = st.k as f64;
    let (lam, s, g) = (p.lambda, p.s, p.gamma);
    let om = p.omega_k(k);
    let (mut uu, mut dd, mut dv, mut vv) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..st.z.len() {
        let d = st.z[i] - z_star[i];
        let u = 2.0 * lam * d + 2.0 * k * (st.z[i] - st.z_prev[i]) + s * g * k * st.v[i];
        uu += u * u;
        dd += d * d;
        dv += d * st.v[i];
        vv += st.v[i] * st.v[i];
    }
    0.5 * uu
        + 2.0 * lam * (p.alpha - 1.0 - lam) * dd
        + 2.0 * lam * g * om * dv
        + 0.5 * g * g * om * (s * k + 2.0 * p.c) * vv
}

pub fn lyapunov_g(st: &GState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    let e = &st.e;
    let k = e.k as f64;
    let g = p.gamma;
    let om = p.omega_k(k);
    let (mut cross, mut dv) = (0.0, 0.0);
    for i in 0..e.z.len() {
        cross += (e.z[i] - e.z_prev[i]) * (st.f_z[i] - st.f_w_prev[i]);
        let d = e.v[i] - st.v_prev[i];
        dv += d * d;
    }
    let gl = g * p.lipschitz;
    lyapunov_e(e, z_star, p) - 2.0 * g * om * k * cross
        + g * g * gl * om * (k + p.alpha - p.c + p.c * gl * om.sqrt()) * dv
}

/// Right-hand side of the exact expression for `E_{k+1} − E_k`.
pub fn energy_identity_rhs(before: &EnergyState, after: &EnergyState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    let k = before.k as f64;
    let (lam, s, g, a, c) = (p.lambda, p.s, p.gamma, p.alpha, p.c);
    let om = p.omega_k(k);
    let (mut zv, mut dd, mut dv1, mut ddv, mut dvdv, mut v1v1) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..after.z.len() {
        let d = after.z[i] - before.z[i];
        let v1 = after.v[i];
        let dvi = v1 - before.v[i];
        zv += (after.z[i] - z_star[i]) * v1;
        dd += d * d;
        dv1 += d * v1;
        ddv += d * dvi;
        dvdv += dvi * dvi;
        v1v1 += v1 * v1;
    }
    let w1 = (2.0 - s) * lam + s * (lam + 1.0 - a) + s - 2.0 * c;
    -4.0 * (c - 1.0) * lam * g * zv + 2.0 * (lam + 1.0 - a) * (2.0 * k + a + 1.0) * dd
        + 2.0 * g * (w1 * k + 2.0 * lam * a + s - 2.0 * a * c) * dv1
        - 2.0 * g * (k + a) * om * ddv
        - g * g * (k + a) * om * dvdv
        + g * g * ((1.0 - c) * (2.0 * s * k + 2.0 * c + s) + s * (a - c)) * v1v1
}

/// `|(E_{k+1} − E_k) − rhs| / (1 + |E_{k+1} − E_k|)`
pub fn energy_identity_residual(before: &EnergyState, after: &EnergyState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    let delta = lyapunov_e(after, z_star, p) - lyapunov_e(before, z_star, p);
    let rhs = energy_identity_rhs(before, after, z_star, p);
    (delta - rhs).abs() / (1.0 + delta.abs())
}

/// The three-term quadratic lower bound on `G_k`.
pub fn g_lower_bound(st: &GState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    let e = &st.e;
    let k = e.k as f64;
    let (lam, s, g, a) = (p.lambda, p.s, p.gamma, p.alpha);
    let w0 = 2.0 - s;
    let (mut qq, mut vel, mut dd) = (0.0, 0.0, 0.0);
    for i in 0..e.z.len() {
        let d = e.z[i] - z_star[i];
        let step = e.z[i] - e.z_prev[i];
        let q = 4.0 * lam * d + 2.0 * k * step + 2.0 * s * g * k * e.v[i];
        qq += q * q;
        vel += step * step;
        dd += d * d;
    }
    w0 / (4.0 * s) * qq + w0 * w0 / (4.0 * s) * k * k * vel
        + 2.0 * lam * (a - 1.0 - 4.0 * (a - 1.0) * lam / (s * a)) * dd
}

/// `G_k` minus its lower bound.
pub fn g_lower_bound_gap(st: &GState, z_star: &[f64], p: &LyapunovParams) -> f64 {
    lyapunov_g(st, z_star, p) - g_lower_bound(st, z_star, p)
}

/// `1 + α/(4c − α) < s < 2`
pub fn s_interval(alpha: f64, c: f64) -> (f64, f64) {
    (1.0 + alpha / (4.0 * c - alpha), 2.0)
}

/// The open interval of admissible `δ` for the given `s`.
pub fn delta_interval(alpha: f64, c: f64, s: f64) -> Result<(f64, f64), AnalysisError> {
    let (s_lo, s_hi) = s_interval(alpha, c);
    if !(s > s_lo && s < s_hi) {
        return Err(out_of_range("s", s, format!("({s_lo}, {s_hi})")));
    }
    let first = (s * (alpha - 2.0) + 2.0 * (2.0 * c - s)) / (4.0 * s * (c - 1.0));
    let second = (-(2.0 - s) * (alpha - 1.0) - s + 2.0 * c) / (s * (c - 1.0));
    let lo = first.max(0.0).sqrt().max(second.max(0.0).sqrt());
    if !(lo < 1.0) {
        return Err(out_of_range("delta lower bound", lo, "[0, 1)".into()));
    }
    Ok((lo, 1.0))
}

/// `(λ_under, λ_over)` with `λ_under = max{0, α−1+ξ₁}` and `λ_over = min{sα/4, α−1+ξ₂}`,
/// `ξ₁,₂` the roots of `4ξ² + 4Bξ + C² = 0`.
pub fn lambda_window(alpha: f64, c: f64, s: f64, delta: f64) -> Result<(f64, f64), AnalysisError> {
    let (d_lo, d_hi) = delta_interval(alpha, c, s)?;
    if !(delta > d_lo && delta < d_hi) {
        return Err(out_of_range("delta", delta, format!("({d_lo}, {d_hi})")));
    }
    let base = (2.0 - s) * (alpha - 1.0) + s - 2.0 * c;
    let b = base + 2.0 * s * (c - 1.0) * delta * delta;
    let disc = 16.0 * b * b - 16.0 * base * base;
    if !(disc > 0.0) {
        return Err(AnalysisError::Discriminant(disc));
    }
    let root = disc.sqrt();
    let xi_1 = (-4.0 * b - root) / 8.0;
    let xi_2 = (-4.0 * b + root) / 8.0;
    let lower = (alpha - 1.0 + xi_1).max(0.0);
    let upper = (s * alpha / 4.0).min(alpha - 1.0 + xi_2);
    if !(lower < upper) {
        return Err(AnalysisError::EmptyWindow { lower, upper });
    }
    Ok((lower, upper))
}

/// Least-squares fit of `log q` against `log k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub used: usize,
    /// Samples dropped for being nonpositive or non-finite.
    pub filtered: usize,
}

pub fn rate_slope(ks: &[f64], values: &[f64]) -> Result<SlopeFit, AnalysisError> {
    assert_eq!(ks.len(), values.len());
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(values)
        .filter(|(k, q)| **k > 0.0 && **q > 0.0 && q.is_finite())
        .map(|(k, q)| (k.ln(), q.ln()))
        .collect();
    let filtered = ks.len() - pts.len();
    if pts.len() < 2 {
        return Err(AnalysisError::TooFewSamples(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(AnalysisError::TooFewSamples(1));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        used: pts.len(),
        filtered,
    })
}

/// Trace columns a rate can be fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceField {
    Velocity,
    TanResidual,
    FixResidual,
    VNorm,
    PdGap,
    ObjGap,
}

impl TraceField {
    pub fn value(self, r: &IterateRecord) -> Option<f64> {
        match self {
            TraceField::Velocity => Some(r.velocity),
            TraceField::TanResidual => Some(r.tan_residual_upper),
            TraceField::FixResidual => Some(r.fix_residual),
            TraceField::VNorm => r.v_norm,
            TraceField::PdGap => r.pd_gap,
            TraceField::ObjGap => r.obj_gap,
        }
    }
}

/// [`rate_slope`] of `field` over records with `k_lo ≤ k ≤ k_hi`.
pub fn trace_slope(trace: &IterateTrace, field: TraceField, k_lo: usize, k_hi: usize) -> Result<SlopeFit, AnalysisError> {
    let (ks, qs): (Vec<f64>, Vec<f64>) = trace
        .records
        .iter()
        .filter(|r| r.k >= k_lo && r.k <= k_hi)
        .filter_map(|r| field.value(r).map(|q| (r.k as f64, q)))
        .unzip();
    rate_slope(&ks, &qs)
}
