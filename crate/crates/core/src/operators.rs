//! Resolvent oracles for the set-valued part `M` and forward oracles for the
//! single-valued part `F` of `0 ∈ M(z) + F(z)`.

use thiserror::Error;

use crate::numkit::{kernels, operator_norm, NumError, SparseMatrix, Vector, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("step parameter must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("l1 weight must be finite and nonnegative, got {0}")]
    InvalidWeight(f64),
    #[error("product blocks cover {blocks} coordinates but the input has {input}")]
    BlockMismatch { blocks: usize, input: usize },
}

/// Closed convex cones used for constraints `Ax - b ∈ -K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConeKind {
    NonnegOrthant,
    ZeroCone,
    FullSpace,
}

impl ConeKind {
    /// `K* = {λ : ⟨λ, ζ⟩ ≥ 0 ∀ζ ∈ K}`
    pub fn dual(self) -> ConeKind {
        match self {
            ConeKind::NonnegOrthant => ConeKind::NonnegOrthant,
            ConeKind::ZeroCone => ConeKind::FullSpace,
            ConeKind::FullSpace => ConeKind::ZeroCone,
        }
    }

    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            ConeKind::NonnegOrthant => x.iter().all(|&v| v >= 0.0),
            ConeKind::ZeroCone => x.iter().all(|&v| v == 0.0),
            ConeKind::FullSpace => true,
        }
    }

    pub(crate) fn project_in_place(self, x: &mut [f64]) {
        match self {
            ConeKind::NonnegOrthant => x.iter_mut().for_each(|v| *v = v.max(0.0)),
            ConeKind::ZeroCone => x.iter_mut().for_each(|v| *v = 0.0),
            ConeKind::FullSpace => {}
        }
    }
}

/// Componentwise soft threshold `sign(x_i)·max(|x_i| − γ, 0)` with `sign(0) = 0`.
pub fn prox_l1(x: &[f64], gamma: f64) -> Vector {
    let mut out = x.to_vec();
    soft_threshold_in_place(&mut out, gamma);
    out.into()
}

#[inline]
fn soft_threshold_in_place(x: &mut [f64], gamma: f64) {
    for v in x.iter_mut() {
        let shrunk = v.abs() - gamma;
        *v = if shrunk > 0.0 { shrunk.copysign(*v) } else { 0.0 };
    }
}

/// Euclidean projection onto `cone`.
pub fn project_cone(x: &[f64], cone: ConeKind) -> Vector {
    let mut out = x.to_vec();
    cone.project_in_place(&mut out);
    out.into()
}

/// Maximally monotone operators with closed-form resolvents.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneOp {
    Zero,
    /// `∂(w‖·‖₁)`
    L1 { weight: f64 },
    /// `N_K`, whose resolvent is the projection onto `K`.
    NormalCone(ConeKind),
    /// Blockwise operator; each entry carries its block length.
    Product(Vec<(MonotoneOp, usize)>),
}

impl MonotoneOp {
    pub fn l1(weight: f64) -> Result<Self, OpError> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(OpError::InvalidWeight(weight));
        }
        Ok(MonotoneOp::L1 { weight })
    }

    pub fn product(blocks: Vec<(MonotoneOp, usize)>) -> Self {
        MonotoneOp::Product(blocks)
    }

    /// Total length for a product; `None` for dimension-agnostic kinds.
    pub fn block_len(&self) -> Option<usize> {
        match self {
            MonotoneOp::Product(blocks) => Some(blocks.iter().map(|(_, n)| n).sum()),
            _ => None,
        }
    }

    fn check_len(&self, len: usize) -> Result<(), OpError> {
        match self.block_len() {
            Some(blocks) if blocks != len => Err(OpError::BlockMismatch { blocks, input: len }),
            _ => Ok(()),
        }
    }

    /// `J_{γM}(y) = (Id + γM)⁻¹ y`
    pub fn resolvent(&self, gamma: f64, y: &[f64]) -> Result<Vector, OpError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(OpError::InvalidGamma(gamma));
        }
        self.check_len(y.len())?;
        let mut out = y.to_vec();
        self.resolvent_in_place(gamma, &mut out);
        Ok(out.into())
    }

    /// In-place resolvent for the iteration loops. Block lengths must already be valid.
    pub fn resolvent_in_place(&self, gamma: f64, y: &mut [f64]) {
        match self {
            MonotoneOp::Zero => {}
            MonotoneOp::L1 { weight } => soft_threshold_in_place(y, gamma * weight),
            MonotoneOp::NormalCone(cone) => cone.project_in_place(y),
            MonotoneOp::Product(blocks) => {
                let mut start = 0;
                for (op, len) in blocks {
                    op.resolvent_in_place(gamma, &mut y[start..start + len]);
                    start += len;
                }
            }
        }
    }

    /// Value of the function whose subdifferential this is (indicators are 0 or +∞).
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            MonotoneOp::Zero => 0.0,
            MonotoneOp::L1 { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            MonotoneOp::NormalCone(cone) => {
                if cone.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            MonotoneOp::Product(blocks) => {
                let mut start = 0;
                let mut total = 0.0;
                for (op, len) in blocks {
                    total += op.value(&x[start..start + len]);
                    start += len;
                }
                total
            }
        }
    }

    /// Largest violation of `ξ ∈ M(z)`; zero means the certificate is exact.
    pub fn membership_violation(&self, z: &[f64], xi: &[f64]) -> f64 {
        assert_eq!(z.len(), xi.len());
        match self {
            MonotoneOp::Zero => xi.iter().fold(0.0, |m, v| m.max(v.abs())),
            MonotoneOp::L1 { weight } => z.iter().zip(xi).fold(0.0, |m, (&zi, &xi)| {
                let viol = if zi != 0.0 {
                    (xi - weight.copysign(zi)).abs()
                } else {
                    (xi.abs() - weight).max(0.0)
                };
                m.max(viol)
            }),
            MonotoneOp::NormalCone(cone) => match cone {
                ConeKind::FullSpace => xi.iter().fold(0.0, |m, v| m.max(v.abs())),
                ConeKind::ZeroCone => z.iter().fold(0.0, |m, v| m.max(v.abs())),
                ConeKind::NonnegOrthant => z.iter().zip(xi).fold(0.0, |m, (&zi, &xi)| {
                    let outside = (-zi).max(0.0);
                    let sign = xi.max(0.0);
                    let slack = if zi > 0.0 { xi.abs() } else { 0.0 };
                    m.max(outside).max(sign).max(slack)
                }),
            },
            MonotoneOp::Product(blocks) => {
                let mut start = 0;
                let mut worst: f64 = 0.0;
                for (op, len) in blocks {
                    let span = start..start + len;
                    worst = worst.max(op.membership_violation(&z[span.clone()], &xi[span]));
                    start += len;
                }
                worst
            }
        }
    }
}

/// `J_{γM}(y)`
pub fn resolvent(m: &MonotoneOp, gamma: f64, y: &[f64]) -> Result<Vector, OpError> {
    m.resolvent(gamma, y)
}

/// Forward operators of the affine and bilinear-plus-quadratic family.
#[derive(Debug, Clone, PartialEq)]
pub enum ForwardKind {
    Zero { dim: usize },
    /// `F(z) = P z + q`
    Affine { p: SparseMatrix, q: Vector },
    /// `F(x, λ) = (Hx − h + Aᵀλ, b − Ax)` with `z = (x, λ)`.
    PdQp {
        h_mat: SparseMatrix,
        h: Vector,
        a: SparseMatrix,
        b: Vector,
    },
    /// `F(z) = z − a`
    ShiftIdentity { a: Vector },
}

/// A monotone Lipschitz forward operator together with the Lipschitz bound the
/// step-size rules are stated against.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOp {
    kind: ForwardKind,
    lipschitz: f64,
}

const LIPSCHITZ_FLOOR: f64 = 1e-300;

/// Closed-form Lipschitz bound: `‖P‖` for affine maps, `1` for the shifted
/// identity and `√((‖H‖+‖A‖)² + ‖A‖²)` for the primal-dual quadratic operator.
pub fn lipschitz_bound(kind: &ForwardKind) -> Result<f64, OpError> {
    let norm = |m: &SparseMatrix| operator_norm(m, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let bound = match kind {
        ForwardKind::Zero { .. } => LIPSCHITZ_FLOOR,
        ForwardKind::Affine { p, .. } => norm(p)?,
        ForwardKind::ShiftIdentity { .. } => 1.0,
        ForwardKind::PdQp { h_mat, a, .. } => {
            let nh = norm(h_mat)?;
            let na = norm(a)?;
            ((nh + na).powi(2) + na * na).sqrt()
        }
    };
    Ok(bound.max(LIPSCHITZ_FLOOR))
}

impl ForwardOp {
    pub fn new(kind: ForwardKind) -> Result<Self, OpError> {
        validate_kind(&kind)?;
        let lipschitz = lipschitz_bound(&kind)?;
        Ok(ForwardOp { kind, lipschitz })
    }

    pub fn zero(dim: usize) -> Self {
        ForwardOp {
            kind: ForwardKind::Zero { dim },
            lipschitz: LIPSCHITZ_FLOOR,
        }
    }

    pub fn shift_identity(a: Vector) -> Self {
        ForwardOp {
            kind: ForwardKind::ShiftIdentity { a },
            lipschitz: 1.0,
        }
    }

    pub fn affine(p: SparseMatrix, q: Vector) -> Result<Self, OpError> {
        Self::new(ForwardKind::Affine { p, q })
    }

    pub fn pd_qp(h_mat: SparseMatrix, h: Vector, a: SparseMatrix, b: Vector) -> Result<Self, OpError> {
        Self::new(ForwardKind::PdQp { h_mat, h, a, b })
    }

    pub fn kind(&self) -> &ForwardKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ForwardKind::Zero { dim } => *dim,
            ForwardKind::Affine { q, .. } => q.len(),
            ForwardKind::PdQp { h, b, .. } => h.len() + b.len(),
            ForwardKind::ShiftIdentity { a } => a.len(),
        }
    }

    pub fn eval(&self, z: &[f64]) -> Result<Vector, OpError> {
        if z.len() != self.dim() {
            return Err(NumError::Dimension {
                expected: self.dim(),
                found: z.len(),
            }
            .into());
        }
        let mut out = Vector::zeros(z.len());
        self.eval_into(z, &mut out);
        Ok(out)
    }

    /// `out = F(z)`. Panics on a length mismatch.
    pub fn eval_into(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), out.len());
        match &self.kind {
            ForwardKind::Zero { .. } => out.iter_mut().for_each(|o| *o = 0.0),
            ForwardKind::Affine { p, q } => {
                p.mul_into(z, out);
                kernels::axpy_in_place(1.0, q, out);
            }
            ForwardKind::ShiftIdentity { a } => kernels::sub_into(z, a, out),
            ForwardKind::PdQp { h_mat, h, a, b } => {
                let n = h.len();
                let (x, lam) = z.split_at(n);
                let (fx, flam) = out.split_at_mut(n);
                h_mat.mul_into(x, fx);
                kernels::axpy_in_place(-1.0, h, fx);
                a.mul_transpose_add(lam, fx);
                a.mul_into(x, flam);
                for (f, bi) in flam.iter_mut().zip(b.iter()) {
                    *f = bi - *f;
                }
            }
        }
    }
}

fn validate_kind(kind: &ForwardKind) -> Result<(), OpError> {
    let mismatch = |expected: usize, found: usize| -> Result<(), OpError> {
        if expected == found {
            Ok(())
        } else {
            Err(NumError::Dimension { expected, found }.into())
        }
    };
    match kind {
        ForwardKind::Zero { .. } | ForwardKind::ShiftIdentity { .. } => Ok(()),
        ForwardKind::Affine { p, q } => {
            mismatch(p.nrows(), p.ncols())?;
            mismatch(p.nrows(), q.len())
        }
        ForwardKind::PdQp { h_mat, h, a, b } => {
            mismatch(h_mat.nrows(), h_mat.ncols())?;
            mismatch(h_mat.nrows(), h.len())?;
            mismatch(a.ncols(), h.len())?;
            mismatch(a.nrows(), b.len())
        }
    }
}

/// `F(z)`
pub fn forward_eval(f: &ForwardOp, z: &[f64]) -> Result<Vector, OpError> {
    f.eval(z)
}
