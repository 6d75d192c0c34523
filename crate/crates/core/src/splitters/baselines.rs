//! Baseline splitting methods. Each records the certificate
//! `ξ = (a − J_{γM}(a))/γ ∈ M(J_{γM}(a))` of the resolvent it evaluates last.

use std::mem::swap;

use super::{Method, Stepper};
use crate::problem::Oracle;

/// Iterate bookkeeping shared by the baselines.
#[derive(Debug, Clone)]
struct Track {
    gamma: f64,
    k: usize,
    z: Vec<f64>,
    z_prev: Vec<f64>,
    next: Vec<f64>,
    point: Vec<f64>,
    xi: Vec<f64>,
}

impl Track {
    fn new(gamma: f64, k: usize, z0: &[f64]) -> Self {
        let n = z0.len();
        Track {
            gamma,
            k,
            z: z0.to_vec(),
            z_prev: z0.to_vec(),
            next: vec![0.0; n],
            point: z0.to_vec(),
            xi: vec![0.0; n],
        }
    }

    /// `point = J_{γM}(arg)` and its certificate.
    fn certify(&mut self, oracle: &dyn Oracle, arg: &[f64]) {
        let g = self.gamma;
        self.point.copy_from_slice(arg);
        oracle.resolvent_in_place(g, &mut self.point);
        for ((x, a), p) in self.xi.iter_mut().zip(arg).zip(&self.point) {
            *x = (a - p) / g;
        }
    }

    /// `z_{k+1} = J_{γM}(arg)`; the certificate then lives at `z_{k+1}`.
    fn resolve_and_advance(&mut self, oracle: &dyn Oracle, arg: &[f64]) {
        self.certify(oracle, arg);
        self.next.copy_from_slice(&self.point);
        self.advance();
    }

    /// Shifts `z_{k+1}` (held in `next`) into place.
    fn advance(&mut self) {
        swap(&mut self.z_prev, &mut self.z);
        swap(&mut self.z, &mut self.next);
        self.k += 1;
    }
}

macro_rules! stepper_accessors {
    ($method:expr) => {
        fn method(&self) -> Method {
            $method
        }

        fn gamma(&self) -> f64 {
            self.t.gamma
        }

        fn k(&self) -> usize {
            self.t.k
        }

        fn current(&self) -> &[f64] {
            &self.t.z
        }

        fn previous(&self) -> &[f64] {
            &self.t.z_prev
        }

        fn certificate(&self) -> (&[f64], &[f64]) {
            (&self.t.point, &self.t.xi)
        }
    };
}

/// Extragradient with scaling `η`:
/// `w_k = J_{(γ/η)M}(z_k − (γ/η)F(z_k))`, `z_{k+1} = J_{γM}(z_k − γF(w_k))`.
#[derive(Debug, Clone)]
pub struct Eg {
    t: Track,
    eta: f64,
    fz: Vec<f64>,
    w: Vec<f64>,
    fw: Vec<f64>,
    arg: Vec<f64>,
}

impl Eg {
    pub fn new(gamma: f64, eta: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Eg {
            t: Track::new(gamma, 0, z0),
            eta,
            fz: vec![0.0; n],
            w: vec![0.0; n],
            fw: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Eg {
    stepper_accessors!(Method::Eg);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        let ge = g / self.eta;
        oracle.forward_into(&self.t.z, &mut self.fz);
        for ((w, z), f) in self.w.iter_mut().zip(&self.t.z).zip(&self.fz) {
            *w = z - ge * f;
        }
        oracle.resolvent_in_place(ge, &mut self.w);
        oracle.forward_into(&self.w, &mut self.fw);
        for ((a, z), f) in self.arg.iter_mut().zip(&self.t.z).zip(&self.fw) {
            *a = z - g * f;
        }
        self.t.resolve_and_advance(oracle, &self.arg);
    }
}

/// Optimistic gradient: EG with `F(w_{k−1})` in the first block; `w_0 = z_0`.
#[derive(Debug, Clone)]
pub struct Ogda {
    t: Track,
    eta: f64,
    started: bool,
    fw_prev: Vec<f64>,
    w: Vec<f64>,
    fw: Vec<f64>,
    arg: Vec<f64>,
}

impl Ogda {
    pub fn new(gamma: f64, eta: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Ogda {
            t: Track::new(gamma, 1, z0),
            eta,
            started: false,
            fw_prev: vec![0.0; n],
            w: vec![0.0; n],
            fw: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Ogda {
    stepper_accessors!(Method::Ogda);

    fn step(&mut self, oracle: &dyn Oracle) {
        if !self.started {
            oracle.forward_into(&self.t.z, &mut self.fw_prev);
            self.started = true;
        }
        let g = self.t.gamma;
        let ge = g / self.eta;
        for ((w, z), f) in self.w.iter_mut().zip(&self.t.z).zip(&self.fw_prev) {
            *w = z - ge * f;
        }
        oracle.resolvent_in_place(ge, &mut self.w);
        oracle.forward_into(&self.w, &mut self.fw);
        for ((a, z), f) in self.arg.iter_mut().zip(&self.t.z).zip(&self.fw) {
            *a = z - g * f;
        }
        self.t.resolve_and_advance(oracle, &self.arg);
        swap(&mut self.fw_prev, &mut self.fw);
    }
}

/// Forward-backward-forward: `w_k = J_{γM}(z_k − γF(z_k))`, `z_{k+1} = w_k − γF(w_k) + γF(z_k)`.
/// The certificate lives at `w_k`.
#[derive(Debug, Clone)]
pub struct Fbf {
    t: Track,
    fz: Vec<f64>,
    fw: Vec<f64>,
    arg: Vec<f64>,
}

impl Fbf {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Fbf {
            t: Track::new(gamma, 0, z0),
            fz: vec![0.0; n],
            fw: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Fbf {
    stepper_accessors!(Method::Fbf);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        oracle.forward_into(&self.t.z, &mut self.fz);
        for ((a, z), f) in self.arg.iter_mut().zip(&self.t.z).zip(&self.fz) {
            *a = z - g * f;
        }
        self.t.certify(oracle, &self.arg);
        oracle.forward_into(&self.t.point, &mut self.fw);
        for i in 0..self.fz.len() {
            self.t.next[i] = self.t.point[i] - g * self.fw[i] + g * self.fz[i];
        }
        self.t.advance();
    }
}

/// Past FBF: FBF with `F(w_{k−1})` replacing `F(z_k)`; `w_0 = z_0`.
#[derive(Debug, Clone)]
pub struct Pfbf {
    t: Track,
    started: bool,
    fw_prev: Vec<f64>,
    fw: Vec<f64>,
    arg: Vec<f64>,
}

impl Pfbf {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Pfbf {
            t: Track::new(gamma, 1, z0),
            started: false,
            fw_prev: vec![0.0; n],
            fw: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Pfbf {
    stepper_accessors!(Method::Pfbf);

    fn step(&mut self, oracle: &dyn Oracle) {
        if !self.started {
            oracle.forward_into(&self.t.z, &mut self.fw_prev);
            self.started = true;
        }
        let g = self.t.gamma;
        for ((a, z), f) in self.arg.iter_mut().zip(&self.t.z).zip(&self.fw_prev) {
            *a = z - g * f;
        }
        self.t.certify(oracle, &self.arg);
        oracle.forward_into(&self.t.point, &mut self.fw);
        for i in 0..self.fw.len() {
            self.t.next[i] = self.t.point[i] - g * self.fw[i] + g * self.fw_prev[i];
        }
        self.t.advance();
        swap(&mut self.fw_prev, &mut self.fw);
    }
}

/// Forward-reflected-backward: `z_{k+1} = J_{γM}(z_k − 2γF(z_k) + γF(z_{k−1}))`; `z_1 = z_0`.
#[derive(Debug, Clone)]
pub struct Frb {
    t: Track,
    started: bool,
    fz: Vec<f64>,
    fz_prev: Vec<f64>,
    arg: Vec<f64>,
}

impl Frb {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Frb {
            t: Track::new(gamma, 1, z0),
            started: false,
            fz: vec![0.0; n],
            fz_prev: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Frb {
    stepper_accessors!(Method::Frb);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        oracle.forward_into(&self.t.z, &mut self.fz);
        if !self.started {
            self.fz_prev.copy_from_slice(&self.fz);
            self.started = true;
        }
        for i in 0..self.fz.len() {
            self.arg[i] = self.t.z[i] - 2.0 * g * self.fz[i] + g * self.fz_prev[i];
        }
        self.t.resolve_and_advance(oracle, &self.arg);
        swap(&mut self.fz_prev, &mut self.fz);
    }
}

/// Reflected forward-backward: `z_{k+1} = J_{γM}(z_k − γF(2z_k − z_{k−1}))`; `z_1 = z_0`.
#[derive(Debug, Clone)]
pub struct Rfb {
    t: Track,
    x: Vec<f64>,
    fx: Vec<f64>,
    arg: Vec<f64>,
}

impl Rfb {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Rfb {
            t: Track::new(gamma, 1, z0),
            x: vec![0.0; n],
            fx: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Rfb {
    stepper_accessors!(Method::Rfb);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        for ((x, z), zp) in self.x.iter_mut().zip(&self.t.z).zip(&self.t.z_prev) {
            *x = 2.0 * z - zp;
        }
        oracle.forward_into(&self.x, &mut self.fx);
        for ((a, z), f) in self.arg.iter_mut().zip(&self.t.z).zip(&self.fx) {
            *a = z - g * f;
        }
        self.t.resolve_and_advance(oracle, &self.arg);
    }
}

/// Anchored reflected gradient with anchor `z_0 = z_1`:
///
/// ```text
/// x_k     = 2z_k − z_{k−1} + (z_0 − z_k)/(k+1) − (z_0 − z_{k−1})/k
/// z_{k+1} = J_{γM}(z_k − γF(x_k) + (z_0 − z_k)/(k+1))
/// ```
#[derive(Debug, Clone)]
pub struct Arg {
    t: Track,
    anchor: Vec<f64>,
    x: Vec<f64>,
    fx: Vec<f64>,
    arg: Vec<f64>,
}

impl Arg {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        let n = z0.len();
        Arg {
            t: Track::new(gamma, 1, z0),
            anchor: z0.to_vec(),
            x: vec![0.0; n],
            fx: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }
}

impl Stepper for Arg {
    stepper_accessors!(Method::Arg);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        let k = self.t.k as f64;
        for i in 0..self.x.len() {
            let (z, zp, a) = (self.t.z[i], self.t.z_prev[i], self.anchor[i]);
            self.x[i] = 2.0 * z - zp + (a - z) / (k + 1.0) - (a - zp) / k;
        }
        oracle.forward_into(&self.x, &mut self.fx);
        for i in 0..self.x.len() {
            let z = self.t.z[i];
            self.arg[i] = z - g * self.fx[i] + (self.anchor[i] - z) / (k + 1.0);
        }
        self.t.resolve_and_advance(oracle, &self.arg);
    }
}

/// Auxiliary sequences of the accelerated extragradient family; `x_0 = z_1 = z_0`, `w_0 = 0`.
#[derive(Debug, Clone)]
struct AccelAux {
    x_prev: Vec<f64>,
    w_prev: Vec<f64>,
    fz: Vec<f64>,
    fx: Vec<f64>,
    arg: Vec<f64>,
}

impl AccelAux {
    fn new(z0: &[f64]) -> Self {
        let n = z0.len();
        AccelAux {
            x_prev: z0.to_vec(),
            w_prev: vec![0.0; n],
            fz: vec![0.0; n],
            fx: vec![0.0; n],
            arg: vec![0.0; n],
        }
    }

    /// `x_k = J_{γM}(z_k − γF(z_k) + ((k+1)/(k+2))γw_{k−1})`, certified at `x_k`.
    fn extrapolate(&mut self, t: &mut Track, oracle: &dyn Oracle) {
        let g = t.gamma;
        let k = t.k as f64;
        let r = (k + 1.0) / (k + 2.0) * g;
        oracle.forward_into(&t.z, &mut self.fz);
        for i in 0..self.fz.len() {
            self.arg[i] = t.z[i] - g * self.fz[i] + r * self.w_prev[i];
        }
        t.certify(oracle, &self.arg);
    }
}

/// Accelerated extragradient:
///
/// ```text
/// x_k     = J_{γM}(z_k − γF(z_k) + ((k+1)/(k+2))γw_{k−1})
/// w_k     = (z_k − x_k + ((k+1)/(k+2))γw_{k−1})/γ + F(x_k) − F(z_k)
/// z_{k+1} = x_k + ((k+1)/(k+3))(x_k − x_{k−1}) − ((k+2)/(k+3))γ(F(x_k) − F(z_k))
/// ```
#[derive(Debug, Clone)]
pub struct Aeg {
    t: Track,
    aux: AccelAux,
}

impl Aeg {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        Aeg {
            t: Track::new(gamma, 1, z0),
            aux: AccelAux::new(z0),
        }
    }
}

impl Stepper for Aeg {
    stepper_accessors!(Method::Aeg);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        let k = self.t.k as f64;
        self.aux.extrapolate(&mut self.t, oracle);
        let aux = &mut self.aux;
        let t = &mut self.t;
        oracle.forward_into(&t.point, &mut aux.fx);
        let m = (k + 1.0) / (k + 3.0);
        let d = (k + 2.0) / (k + 3.0) * g;
        for i in 0..aux.fx.len() {
            let x = t.point[i];
            let df = aux.fx[i] - aux.fz[i];
            // (z_k − x_k + rγw_{k−1})/γ is the certificate ξ_k
            aux.w_prev[i] = t.xi[i] + aux.fx[i];
            t.next[i] = x + m * (x - aux.x_prev[i]) - d * df;
            aux.x_prev[i] = x;
        }
        t.advance();
    }
}

/// Accelerated past extragradient:
///
/// ```text
/// x_k     = J_{γM}(z_k − γF(z_k) + ((k+1)/(k+2))γw_{k−1})
/// w_k     = (z_k − x_k + ((k+1)/(k+2))γw_{k−1})/γ
/// z_{k+1} = x_k + ((k+1)/(k+3))(x_k − x_{k−1}) + (5(k+2)/(6(k+3)))γw_k − (5(k+1)/(6(k+3)))γw_{k−1}
/// ```
#[derive(Debug, Clone)]
pub struct Apeg {
    t: Track,
    aux: AccelAux,
}

impl Apeg {
    pub fn new(gamma: f64, z0: &[f64]) -> Self {
        Apeg {
            t: Track::new(gamma, 1, z0),
            aux: AccelAux::new(z0),
        }
    }
}

impl Stepper for Apeg {
    stepper_accessors!(Method::Apeg);

    fn step(&mut self, oracle: &dyn Oracle) {
        let g = self.t.gamma;
        let k = self.t.k as f64;
        self.aux.extrapolate(&mut self.t, oracle);
        let aux = &mut self.aux;
        let t = &mut self.t;
        let m = (k + 1.0) / (k + 3.0);
        let p = 5.0 * (k + 2.0) / (6.0 * (k + 3.0)) * g;
        let q = 5.0 * (k + 1.0) / (6.0 * (k + 3.0)) * g;
        for i in 0..aux.fz.len() {
            let x = t.point[i];
            let w = t.xi[i] + aux.fz[i];
            t.next[i] = x + m * (x - aux.x_prev[i]) + p * w - q * aux.w_prev[i];
            aux.w_prev[i] = w;
            aux.x_prev[i] = x;
        }
        t.advance();
    }
}
