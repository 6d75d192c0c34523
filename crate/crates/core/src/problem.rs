//! Oracle access to a monotone inclusion.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::numkit::{NumError, Vector};
use crate::operators::{ForwardOp, MonotoneOp, OpError};

/// What an iteration may ask of a problem: forward evaluations and resolvents.
pub trait Oracle {
    fn dim(&self) -> usize;
    fn lipschitz(&self) -> f64;
    /// `out = F(z)`
    fn forward_into(&self, z: &[f64], out: &mut [f64]);
    /// `y ← J_{γM}(y)`
    fn resolvent_in_place(&self, gamma: f64, y: &mut [f64]);
}

/// `0 ∈ M(z) + F(z)` with an optional known zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub m: MonotoneOp,
    pub f: ForwardOp,
    pub solution: Option<Vector>,
}

impl ProblemInstance {
    pub fn new(m: MonotoneOp, f: ForwardOp) -> Result<Self, OpError> {
        if let Some(blocks) = m.block_len() {
            if blocks != f.dim() {
                return Err(OpError::BlockMismatch {
                    blocks,
                    input: f.dim(),
                });
            }
        }
        Ok(ProblemInstance {
            m,
            f,
            solution: None,
        })
    }

    pub fn with_solution(mut self, z_star: Vector) -> Result<Self, OpError> {
        if z_star.len() != self.f.dim() {
            return Err(NumError::Dimension {
                expected: self.f.dim(),
                found: z_star.len(),
            }
            .into());
        }
        self.solution = Some(z_star);
        Ok(self)
    }
}

impl Oracle for ProblemInstance {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn lipschitz(&self) -> f64 {
        self.f.lipschitz()
    }

    fn forward_into(&self, z: &[f64], out: &mut [f64]) {
        self.f.eval_into(z, out);
    }

    fn resolvent_in_place(&self, gamma: f64, y: &mut [f64]) {
        self.m.resolvent_in_place(gamma, y);
    }
}

/// Wraps an oracle and counts calls.
pub struct CountingOracle<'a, O: ?Sized> {
    inner: &'a O,
    forward: AtomicUsize,
    resolvent: AtomicUsize,
}

impl<'a, O: Oracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOracle {
            inner,
            forward: AtomicUsize::new(0),
            resolvent: AtomicUsize::new(0),
        }
    }

    pub fn forward_calls(&self) -> usize {
        self.forward.load(Ordering::Relaxed)
    }

    pub fn resolvent_calls(&self) -> usize {
        self.resolvent.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.forward.store(0, Ordering::Relaxed);
        self.resolvent.store(0, Ordering::Relaxed);
    }
}

impl<O: Oracle + ?Sized> Oracle for CountingOracle<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }

    fn forward_into(&self, z: &[f64], out: &mut [f64]) {
        self.forward.fetch_add(1, Ordering::Relaxed);
        self.inner.forward_into(z, out);
    }

    fn resolvent_in_place(&self, gamma: f64, y: &mut [f64]) {
        self.resolvent.fetch_add(1, Ordering::Relaxed);
        self.inner.resolvent_in_place(gamma, y);
    }
}
