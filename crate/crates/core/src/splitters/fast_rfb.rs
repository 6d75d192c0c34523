use std::mem::swap;

use super::{FastView, Form, InitialPoint, Method, SolverConfig, Stepper};
use crate::numkit::kernels;
use crate::problem::Oracle;

/// Rolling state shared by both recursions.
#[derive(Debug, Clone)]
struct Core {
    alpha: f64,
    c: f64,
    gamma: f64,
    k: usize,
    z: Vec<f64>,
    z_prev: Vec<f64>,
    /// `y_{k−1}`; only the primal recursion advances it.
    y_prev: Vec<f64>,
    /// `ξ_k ∈ M(z_k)`
    xi: Vec<f64>,
    v: Vec<f64>,
    v_prev: Vec<f64>,
    /// `F(w_{k−1})`
    fw_prev: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    fw: Vec<f64>,
    next: Vec<f64>,
}

impl Core {
    fn new(config: &SolverConfig, init: &InitialPoint) -> Self {
        let n = init.dim();
        Core {
            alpha: config.alpha,
            c: config.c,
            gamma: config.gamma,
            k: 0,
            z: init.z0.to_vec(),
            z_prev: init.z0.to_vec(),
            y_prev: init.y0().to_vec(),
            xi: vec![0.0; n],
            v: vec![0.0; n],
            v_prev: vec![0.0; n],
            fw_prev: vec![0.0; n],
            y: vec![0.0; n],
            w: init.w0().to_vec(),
            fw: vec![0.0; n],
            next: vec![0.0; n],
        }
    }

    /// `z_1 = J(y_0 − γF(w_0))`, `ξ_1 = (y_0 − z_1)/γ − F(w_0)`.
    fn init(&mut self, oracle: &dyn Oracle) {
        let g = self.gamma;
        oracle.forward_into(&self.w, &mut self.fw_prev);
        for ((n, y), f) in self.next.iter_mut().zip(&self.y_prev).zip(&self.fw_prev) {
            *n = y - g * f;
        }
        oracle.resolvent_in_place(g, &mut self.next);
        for i in 0..self.z.len() {
            self.v[i] = (self.y_prev[i] - self.next[i]) / g;
            self.xi[i] = self.v[i] - self.fw_prev[i];
        }
        self.v_prev.copy_from_slice(&self.v);
        swap(&mut self.z, &mut self.next);
        self.k = 1;
    }

    fn step_primal(&mut self, oracle: &dyn Oracle) {
        if self.k == 0 {
            return self.init(oracle);
        }
        let g = self.gamma;
        let kf = self.k as f64;
        let a = 1.0 - self.alpha / (kf + self.alpha);
        let b = 1.0 - self.c / (kf + self.alpha);
        for i in 0..self.z.len() {
            let z = self.z[i];
            self.y[i] = z + a * (z - self.z_prev[i]) + b * (self.y_prev[i] - z);
            self.w[i] = z + (self.y[i] - self.y_prev[i]);
        }
        oracle.forward_into(&self.w, &mut self.fw);
        for ((n, y), f) in self.next.iter_mut().zip(&self.y).zip(&self.fw) {
            *n = y - g * f;
        }
        oracle.resolvent_in_place(g, &mut self.next);
        swap(&mut self.v_prev, &mut self.v);
        for i in 0..self.z.len() {
            self.v[i] = (self.y[i] - self.next[i]) / g;
            self.xi[i] = self.v[i] - self.fw[i];
        }
        self.advance();
        swap(&mut self.y_prev, &mut self.y);
    }

    fn step_certificate(&mut self, oracle: &dyn Oracle) {
        if self.k == 0 {
            return self.init(oracle);
        }
        let g = self.gamma;
        let kf = self.k as f64;
        let a = kf / (kf + self.alpha);
        let b = self.c / (kf + self.alpha) * g;
        for i in 0..self.z.len() {
            let z = self.z[i];
            let v = self.xi[i] + self.fw_prev[i];
            self.w[i] = z + a * (z - self.z_prev[i]) - b * v;
        }
        oracle.forward_into(&self.w, &mut self.fw);
        for i in 0..self.z.len() {
            let v = self.xi[i] + self.fw_prev[i];
            self.next[i] = self.w[i] - g * self.fw[i] + g * v;
        }
        oracle.resolvent_in_place(g, &mut self.next);
        swap(&mut self.v_prev, &mut self.v);
        for i in 0..self.z.len() {
            let v = self.xi[i] + self.fw_prev[i];
            self.xi[i] = (self.w[i] - self.next[i]) / g - self.fw[i] + v;
            self.v[i] = self.xi[i] + self.fw[i];
        }
        self.advance();
    }

    fn advance(&mut self) {
        // z_{k−1} ← z_k ← z_{k+1}; F(w_{k−1}) ← F(w_k)
        swap(&mut self.z_prev, &mut self.z);
        swap(&mut self.z, &mut self.next);
        swap(&mut self.fw_prev, &mut self.fw);
        self.k += 1;
    }
}

/// Fast reflected forward-backward iteration for `0 ∈ M(z) + F(z)`:
///
/// ```text
/// y_k     = z_k + (1 − α/(k+α))(z_k − z_{k−1}) + (1 − c/(k+α))(y_{k−1} − z_k)
/// w_k     = z_k + (y_k − y_{k−1})
/// z_{k+1} = J_{γM}(y_k − γF(w_k))
/// ```
///
/// The first step computes `z_1 = J_{γM}(y_0 − γF(w_0))`.
#[derive(Debug, Clone)]
pub struct FastRfb {
    form: Form,
    main: Core,
    shadow: Option<Core>,
    deviation: f64,
}

impl FastRfb {
    pub fn new(config: &SolverConfig, init: &InitialPoint) -> Self {
        let main = Core::new(config, init);
        let shadow = (config.form == Form::Both).then(|| main.clone());
        FastRfb {
            form: config.form,
            main,
            shadow,
            deviation: 0.0,
        }
    }

    pub fn form(&self) -> Form {
        self.form
    }
}

impl Stepper for FastRfb {
    fn method(&self) -> Method {
        Method::FastRfb
    }

    fn gamma(&self) -> f64 {
        self.main.gamma
    }

    fn step(&mut self, oracle: &dyn Oracle) {
        match self.form {
            Form::Primal => self.main.step_primal(oracle),
            Form::Certificate => self.main.step_certificate(oracle),
            Form::Both => {
                self.main.step_certificate(oracle);
                let shadow = self.shadow.as_mut().expect("both forms keep a shadow");
                shadow.step_primal(oracle);
                let dev = kernels::dist(&self.main.z, &shadow.z) / (1.0 + kernels::norm(&self.main.z));
                self.deviation = self.deviation.max(dev);
            }
        }
    }

    fn k(&self) -> usize {
        self.main.k
    }

    fn current(&self) -> &[f64] {
        &self.main.z
    }

    fn previous(&self) -> &[f64] {
        &self.main.z_prev
    }

    fn certificate(&self) -> (&[f64], &[f64]) {
        (&self.main.z, &self.main.xi)
    }

    fn fast_view(&self) -> Option<FastView<'_>> {
        Some(FastView {
            v: &self.main.v,
            v_prev: &self.main.v_prev,
            f_w_prev: &self.main.fw_prev,
        })
    }

    fn form_deviation(&self) -> Option<f64> {
        self.shadow.as_ref().map(|_| self.deviation)
    }
}
