//! Annealing schedules for the double-loop samplers.
//!
//! The prescribed sequences decay geometrically in the outer index: step
//! sizes shrink by `e^{-2}` (unconstrained) or `e^{-4}` (constrained) per
//! outer iteration while inner-loop lengths grow by `e^{3}` resp.
//! `e^{5}`. The raw constants are astronomically conservative, so
//! [`ScheduleScale`] exposes desk-scale knobs that touch only the
//! multipliers, never the decay bases.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::target::{second_moment_bound, TailParams};

/// Scaling knobs: a multiplier on the inner-loop counts, a multiplier on
/// the step sizes, and a hard cap per outer loop. Inner counts are floored
/// at 1 after scaling.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScheduleScale {
    pub n_mult: f64,
    pub gamma_mult: f64,
    pub n_cap: Option<u64>,
}

impl ScheduleScale {
    pub fn unit() -> Self {
        ScheduleScale {
            n_mult: 1.0,
            gamma_mult: 1.0,
            n_cap: None,
        }
    }

    pub fn new(n_mult: f64, gamma_mult: f64, n_cap: Option<u64>) -> Result<Self> {
        if !(n_mult > 0.0 && n_mult <= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "n_mult must lie in (0, 1], got {n_mult}"
            )));
        }
        if !(gamma_mult > 0.0) || !gamma_mult.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "gamma_mult must be positive, got {gamma_mult}"
            )));
        }
        if n_cap == Some(0) {
            return Err(LabError::InvalidParameter("n_cap must be >= 1".into()));
        }
        Ok(ScheduleScale {
            n_mult,
            gamma_mult,
            n_cap,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
enum DoubleLoopKind {
    /// Unconstrained: `n_k = L M^2 d k^2 e^{3k}`, `gamma_k = e^{-2k}/(L d)`,
    /// `tau_k = M k` with `M^2` the second-moment bound.
    Ula { l: f64, d: usize, m: f64 },
    /// Constrained: `lambda_k = 1/(8 d^2/r^2 + d e^{2k})`,
    /// `n_k = L d k^2 e^{5k}`, `gamma_k = e^{-4k}/(L d)`, `tau_k = 2 D k`
    /// (the clip threshold uses the diameter bound `2D` of the body).
    Myula {
        l: f64,
        d: usize,
        inner_radius: f64,
        outer_radius: f64,
    },
}

/// The per-outer-iteration sequences `(gamma_k, n_k, tau_k, lambda_k)`.
/// Immutable; every accessor is a pure function of `k` (1-based).
#[derive(Clone, Debug, Serialize)]
pub struct DoubleLoopSchedule {
    kind: DoubleLoopKind,
    scale: ScheduleScale,
    /// Extra multipliers from the pushforward rescale transform.
    gamma_rescale: f64,
    tau_rescale: f64,
    /// Set when the scaled first step size violates `gamma_1 * L_eff * d <= 1`.
    pub step_warning: bool,
}

/// Schedule for the unconstrained double-loop sampler.
pub fn dl_ula_schedule(
    l: f64,
    d: usize,
    tail: TailParams,
    scale: ScheduleScale,
) -> Result<DoubleLoopSchedule> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "smoothness constant must be positive, got {l}"
        )));
    }
    if d == 0 {
        return Err(LabError::InvalidParameter("dimension must be >= 1".into()));
    }
    let m = second_moment_bound(tail, d).sqrt();
    let kind = DoubleLoopKind::Ula { l, d, m };
    let gamma1 = scale.gamma_mult * (-2.0f64).exp() / (l * d as f64);
    Ok(DoubleLoopSchedule {
        kind,
        scale,
        gamma_rescale: 1.0,
        tau_rescale: 1.0,
        step_warning: gamma1 * l * d as f64 > 1.0,
    })
}

/// Schedule for the constrained double-loop sampler. A zero smoothness
/// constant (uniform target) falls back to 1 in the step-size and
/// inner-count formulas, which would otherwise degenerate.
pub fn dl_myula_schedule(
    l: f64,
    d: usize,
    inner_radius: f64,
    outer_radius: f64,
    scale: ScheduleScale,
) -> Result<DoubleLoopSchedule> {
    if !(l >= 0.0) || !l.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "smoothness constant must be nonnegative, got {l}"
        )));
    }
    if d == 0 {
        return Err(LabError::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(inner_radius > 0.0) || outer_radius < inner_radius {
        return Err(LabError::InvalidParameter(
            "radii must satisfy 0 < r <= D".into(),
        ));
    }
    let l_base = if l > 0.0 { l } else { 1.0 };
    let kind = DoubleLoopKind::Myula {
        l: l_base,
        d,
        inner_radius,
        outer_radius,
    };
    let lambda1 = 1.0 / (8.0 * (d * d) as f64 / (inner_radius * inner_radius)
        + d as f64 * 2.0f64.exp());
    let l_eff = l_base + 1.0 / lambda1;
    let gamma1 = scale.gamma_mult * (-4.0f64).exp() / (l_base * d as f64);
    Ok(DoubleLoopSchedule {
        kind,
        scale,
        gamma_rescale: 1.0,
        tau_rescale: 1.0,
        step_warning: gamma1 * l_eff * d as f64 > 1.0,
    })
}

impl DoubleLoopSchedule {
    /// Step size at outer iteration `k >= 1`.
    pub fn gamma(&self, k: u32) -> f64 {
        debug_assert!(k >= 1);
        let base = match self.kind {
            DoubleLoopKind::Ula { l, d, .. } => (-2.0 * k as f64).exp() / (l * d as f64),
            DoubleLoopKind::Myula { l, d, .. } => (-4.0 * k as f64).exp() / (l * d as f64),
        };
        self.scale.gamma_mult * self.gamma_rescale * base
    }

    /// Inner-loop length at outer iteration `k >= 1` (scaled, floored at
    /// 1, capped).
    pub fn inner_count(&self, k: u32) -> Result<u64> {
        debug_assert!(k >= 1);
        let kf = k as f64;
        let raw = match self.kind {
            DoubleLoopKind::Ula { l, d, m } => l * m * m * d as f64 * kf * kf * (3.0 * kf).exp(),
            DoubleLoopKind::Myula { l, d, .. } => l * d as f64 * kf * kf * (5.0 * kf).exp(),
        };
        let scaled = (self.scale.n_mult * raw).ceil();
        if !scaled.is_finite() || scaled > i64::MAX as f64 {
            if let Some(cap) = self.scale.n_cap {
                return Ok(cap);
            }
            return Err(LabError::IterationOverflow);
        }
        let mut n = (scaled as u64).max(1);
        if let Some(cap) = self.scale.n_cap {
            n = n.min(cap);
        }
        Ok(n)
    }

    /// Clip radius at outer iteration `k >= 1`.
    pub fn clip_radius(&self, k: u32) -> f64 {
        debug_assert!(k >= 1);
        let base = match self.kind {
            DoubleLoopKind::Ula { m, .. } => m * k as f64,
            DoubleLoopKind::Myula { outer_radius, .. } => 2.0 * outer_radius * k as f64,
        };
        self.tau_rescale * base
    }

    /// Penalty parameter at outer iteration `k >= 1`; present only for the
    /// constrained schedule. Always satisfies `lambda_k < r^2/(8 d^2)`.
    pub fn penalty(&self, k: u32) -> Option<f64> {
        debug_assert!(k >= 1);
        match self.kind {
            DoubleLoopKind::Ula { .. } => None,
            DoubleLoopKind::Myula {
                d, inner_radius, ..
            } => Some(
                1.0 / (8.0 * (d * d) as f64 / (inner_radius * inner_radius)
                    + d as f64 * (2.0 * k as f64).exp()),
            ),
        }
    }

    /// Gradient Lipschitz constant seen by the inner loop at stage `k`:
    /// the base constant plus `1/lambda_k` when a penalty is active.
    pub fn effective_lipschitz(&self, k: u32) -> f64 {
        match self.kind {
            DoubleLoopKind::Ula { l, .. } => l,
            DoubleLoopKind::Myula { l, .. } => l + 1.0 / self.penalty(k).unwrap(),
        }
    }

    pub fn has_penalty(&self) -> bool {
        matches!(self.kind, DoubleLoopKind::Myula { .. })
    }

    pub fn scale(&self) -> ScheduleScale {
        self.scale
    }

    /// Pushforward transform: running on a target dilated by `m` is
    /// equivalent to multiplying the step sizes by `m^2` and the clip
    /// radii by `m` while keeping the inner counts.
    pub fn rescaled(&self, m: f64) -> DoubleLoopSchedule {
        let mut s = self.clone();
        s.gamma_rescale *= m * m;
        s.tau_rescale *= m;
        s
    }
}

/// Single-loop polynomial step-size sequence `gamma_k = gamma0 * k^{-alpha}`
/// for the plain averaged sampler (`alpha = 0` gives constant steps,
/// `alpha = 1/2` the classical decay).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepSizeSequence {
    gamma0: f64,
    alpha: f64,
}

pub fn polynomial_schedule(gamma0: f64, alpha: f64) -> Result<StepSizeSequence> {
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "gamma0 must be positive, got {gamma0}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LabError::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(StepSizeSequence { gamma0, alpha })
}

impl StepSizeSequence {
    /// Step size for step `k >= 1`.
    pub fn gamma(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        if self.alpha == 0.0 {
            self.gamma0
        } else {
            self.gamma0 * (k as f64).powf(-self.alpha)
        }
    }
}

/// Total inner iterations over the first `k_outer` outer loops.
pub fn total_iterations(schedule: &DoubleLoopSchedule, k_outer: u32) -> Result<u64> {
    let mut total: u64 = 0;
    for k in 1..=k_outer {
        let n = schedule.inner_count(k)?;
        total = total
            .checked_add(n)
            .filter(|t| *t <= i64::MAX as u64)
            .ok_or(LabError::IterationOverflow)?;
    }
    Ok(total)
}
