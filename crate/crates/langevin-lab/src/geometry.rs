//! Convex constraint sets with exact Euclidean projections and the
//! Moreau–Yosida penalized potential used by the constrained sampler.

use crate::error::{LabError, Result};
use crate::target::Potential;
use crate::vecmath::{dot, norm, norm_sq};

/// Membership tolerance used by `contains`: a point violating a
/// constraint by less than this counts as feasible.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Default Dykstra settings for polytope projections.
pub const DYKSTRA_TOL: f64 = 1e-8;
pub const DYKSTRA_MAX_ITER: usize = 10_000;

/// Half-space `{ x : a . x <= b }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Borrowed structural description of a [`ConvexBody`].
#[derive(Clone, Copy, Debug)]
pub enum BodyShape<'a> {
    Ball { radius: f64 },
    Box { lo: &'a [f64], hi: &'a [f64] },
    Simplex,
    Polytope { halfspaces: &'a [Halfspace] },
}

#[derive(Clone, Debug)]
enum BodyKind {
    Ball { radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex,
    Polytope { halfspaces: Vec<Halfspace> },
}

/// A convex constraint set with the radii and potential-gap parameter of
/// the constrained-sampling assumption: `B(0, r) ⊆ Ω ⊆ B(0, D)` and
/// `delta1 ∈ (0, 1]`.
///
/// For the uniform target (`f ≡ 0`) the gap parameter is exactly 1, which
/// is the constructors' default; callers with a nontrivial potential can
/// override it via [`ConvexBody::with_delta1`].
#[derive(Clone, Debug)]
pub struct ConvexBody {
    dim: usize,
    kind: BodyKind,
    inner_radius: f64,
    outer_radius: f64,
    delta1: f64,
}

impl ConvexBody {
    /// Euclidean ball of the given radius centered at the origin.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexBody {
            dim,
            kind: BodyKind::Ball { radius },
            inner_radius: radius,
            outer_radius: radius,
            delta1: 1.0,
        })
    }

    /// Axis-aligned box `[lo, hi]`. The box must contain the origin in its
    /// interior for the inner radius to be positive; otherwise the inner
    /// radius is clamped to a tiny positive value and only the projection
    /// machinery remains meaningful.
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(LabError::InvalidParameter(
                "box bounds must be nonempty and of equal length".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(LabError::InvalidParameter(
                "box bounds must satisfy lo <= hi componentwise".into(),
            ));
        }
        let dim = lo.len();
        let inner = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| f64::min(-l, *h))
            .fold(f64::MAX, f64::min)
            .max(f64::MIN_POSITIVE);
        let outer = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| f64::max(l.abs(), h.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(ConvexBody {
            dim,
            kind: BodyKind::Box { lo, hi },
            inner_radius: inner,
            outer_radius: outer,
            delta1: 1.0,
        })
    }

    /// Probability simplex `{ x >= 0, sum x_i = 1 }`. A projection
    /// test-bed: the simplex has empty interior in the ambient space, so
    /// the inner-ball part of the constrained-sampling assumption does not
    /// apply (the nominal inner radius is `1/d`).
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidParameter("simplex needs dim >= 1".into()));
        }
        Ok(ConvexBody {
            dim,
            kind: BodyKind::Simplex,
            inner_radius: 1.0 / dim as f64,
            outer_radius: 1.0,
            delta1: 1.0,
        })
    }

    /// Intersection of half-spaces. The caller certifies nonemptiness and
    /// supplies the assumption radii.
    pub fn polytope(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        inner_radius: f64,
        outer_radius: f64,
    ) -> Result<Self> {
        if halfspaces.is_empty() {
            return Err(LabError::InvalidParameter(
                "polytope needs at least one half-space".into(),
            ));
        }
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(LabError::DimensionMismatch {
                    expected: dim,
                    got: h.normal.len(),
                });
            }
            if norm_sq(&h.normal) == 0.0 {
                return Err(LabError::InvalidParameter(
                    "half-space normal must be nonzero".into(),
                ));
            }
        }
        if !(inner_radius > 0.0) || outer_radius < inner_radius {
            return Err(LabError::InvalidParameter(
                "polytope radii must satisfy 0 < r <= D".into(),
            ));
        }
        Ok(ConvexBody {
            dim,
            kind: BodyKind::Polytope { halfspaces },
            inner_radius,
            outer_radius,
            delta1: 1.0,
        })
    }

    pub fn with_delta1(mut self, delta1: f64) -> Result<Self> {
        if !(delta1 > 0.0 && delta1 <= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "delta1 must lie in (0, 1], got {delta1}"
            )));
        }
        self.delta1 = delta1;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Structural view for callers that need shape-specific handling
    /// (exact samplers, analytic references).
    pub fn shape(&self) -> BodyShape<'_> {
        match &self.kind {
            BodyKind::Ball { radius } => BodyShape::Ball { radius: *radius },
            BodyKind::Box { lo, hi } => BodyShape::Box { lo, hi },
            BodyKind::Simplex => BodyShape::Simplex,
            BodyKind::Polytope { halfspaces } => BodyShape::Polytope { halfspaces },
        }
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    /// Membership test with tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            BodyKind::Ball { radius } => norm(x) <= radius + MEMBERSHIP_TOL,
            BodyKind::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - MEMBERSHIP_TOL && *v <= h + MEMBERSHIP_TOL),
            BodyKind::Simplex => {
                x.iter().all(|v| *v >= -MEMBERSHIP_TOL)
                    && (x.iter().sum::<f64>() - 1.0).abs() <= MEMBERSHIP_TOL
            }
            // a polytope's boundary is only resolved to the Dykstra
            // tolerance, so membership uses the same scale
            BodyKind::Polytope { halfspaces } => halfspaces
                .iter()
                .all(|h| dot(&h.normal, x) <= h.offset + DYKSTRA_TOL),
        }
    }

    /// Euclidean projection onto the body. Exact for balls, boxes and the
    /// simplex; Dykstra's alternating scheme for polytopes.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(x.len(), self.dim);
        Ok(match &self.kind {
            BodyKind::Ball { radius } => project_ball(&vec![0.0; self.dim], *radius, x),
            BodyKind::Box { lo, hi } => project_box(lo, hi, x)?,
            BodyKind::Simplex => project_simplex(x),
            BodyKind::Polytope { halfspaces } => {
                project_polytope(halfspaces, x, DYKSTRA_TOL, DYKSTRA_MAX_ITER)?
            }
        })
    }

    /// Projection into a caller-provided buffer; alloc-free for the exact
    /// bodies, which keeps the penalized chain drivers cheap.
    pub(crate) fn project_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            BodyKind::Ball { radius } => {
                let n = norm(x);
                if n <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let scale = radius / n;
                    for (o, v) in out.iter_mut().zip(x) {
                        *o = v * scale;
                    }
                }
            }
            BodyKind::Box { lo, hi } => {
                for i in 0..x.len() {
                    out[i] = x[i].clamp(lo[i], hi[i]);
                }
            }
            BodyKind::Simplex => out.copy_from_slice(&project_simplex(x)),
            BodyKind::Polytope { halfspaces } => {
                out.copy_from_slice(&project_polytope(halfspaces, x, DYKSTRA_TOL, DYKSTRA_MAX_ITER)?)
            }
        }
        Ok(())
    }
}

/// Projection onto the ball `B(center, radius)`: identity inside, radial
/// rescale outside.
pub fn project_ball(center: &[f64], radius: f64, x: &[f64]) -> Vec<f64> {
    debug_assert!(radius > 0.0);
    let dist: f64 = x
        .iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if dist <= radius {
        x.to_vec()
    } else {
        let scale = radius / dist;
        x.iter()
            .zip(center)
            .map(|(a, b)| b + scale * (a - b))
            .collect()
    }
}

/// Euclidean projection onto the probability simplex via sort and
/// threshold.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j as f64 + 1.0);
        if *u > candidate {
            theta = candidate;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(lo: &[f64], hi: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if lo.len() != x.len() || hi.len() != x.len() {
        return Err(LabError::DimensionMismatch {
            expected: x.len(),
            got: lo.len().min(hi.len()),
        });
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(LabError::InvalidParameter(
            "box bounds must satisfy lo <= hi componentwise".into(),
        ));
    }
    Ok(x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| v.clamp(*l, *h))
        .collect())
}

fn project_halfspace(h: &Halfspace, x: &mut [f64]) {
    let violation = dot(&h.normal, x) - h.offset;
    if violation > 0.0 {
        let scale = violation / norm_sq(&h.normal);
        for (xi, a) in x.iter_mut().zip(&h.normal) {
            *xi -= scale * a;
        }
    }
}

/// Dykstra's alternating projections onto an intersection of half-spaces.
/// Terminates once all constraints are violated by at most `tol`; a
/// convergence failure carries the last iterate.
pub fn project_polytope(
    halfspaces: &[Halfspace],
    x: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(LabError::InvalidParameter("tol must be positive".into()));
    }
    let mut y = x.to_vec();
    let mut corrections = vec![vec![0.0; x.len()]; halfspaces.len()];
    let mut max_violation = 0.0;
    for _sweep in 0..max_iter {
        for (h, corr) in halfspaces.iter().zip(&mut corrections) {
            // z = y + correction, project, store the new correction
            for (yi, c) in y.iter_mut().zip(corr.iter()) {
                *yi += c;
            }
            let z = y.clone();
            project_halfspace(h, &mut y);
            for ((c, zi), yi) in corr.iter_mut().zip(&z).zip(&y) {
                *c = zi - yi;
            }
        }
        max_violation = halfspaces
            .iter()
            .map(|h| dot(&h.normal, &y) - h.offset)
            .fold(0.0, f64::max);
        if max_violation <= tol {
            return Ok(y);
        }
    }
    Err(LabError::ProjectionDidNotConverge {
        iterations: max_iter,
        violation: max_violation,
        last: y,
    })
}

/// Lipschitz constant of the penalized gradient: `L + 1/lambda`.
pub fn my_lipschitz(l: f64, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    l + 1.0 / lambda
}

/// Squared-Wasserstein bias bound of the penalized target against the
/// constrained one: `C_Omega^2 * d * sqrt(lambda)`, valid for
/// `lambda < r^2 / (8 d^2)`.
pub fn my_bias_bound(c_omega: f64, d: usize, lambda: f64, r: f64) -> Result<f64> {
    let limit = r * r / (8.0 * (d * d) as f64);
    if !(lambda > 0.0) || lambda >= limit {
        return Err(LabError::PenaltyOutOfRange { lambda, limit });
    }
    Ok(c_omega * c_omega * d as f64 * lambda.sqrt())
}

/// Sub-exponential tail bound for the penalized distribution:
/// `sigma * exp(-R / D)` with `D` the diameter scale of the body.
pub fn constrained_tail_bound(sigma: f64, d_scale: f64, r: f64) -> f64 {
    debug_assert!(sigma > 0.0 && d_scale > 0.0 && r >= 0.0);
    sigma * (-r / d_scale).exp()
}

/// Moreau–Yosida penalized potential
/// `f_lambda(x) = f(x) + |x - proj(x)|^2 / (2 lambda)`.
///
/// Its gradient is `∇f(x) + (x - proj(x)) / lambda`, which agrees with the
/// base gradient on the body, and its gradient Lipschitz constant is
/// `L + 1/lambda`.
#[derive(Clone, Debug)]
pub struct MoreauYosidaPotential {
    base: Potential,
    body: ConvexBody,
    lambda: f64,
}

impl MoreauYosidaPotential {
    pub fn new(base: Potential, body: ConvexBody, lambda: f64) -> Result<Self> {
        if base.dim() != body.dim() {
            return Err(LabError::DimensionMismatch {
                expected: base.dim(),
                got: body.dim(),
            });
        }
        if !(lambda > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "penalty lambda must be positive, got {lambda}"
            )));
        }
        Ok(MoreauYosidaPotential { base, body, lambda })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn base(&self) -> &Potential {
        &self.base
    }

    pub fn lipschitz(&self) -> f64 {
        my_lipschitz(self.base.lipschitz(), self.lambda)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let proj = self.body.project(x)?;
        let dist2: f64 = x.iter().zip(&proj).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(self.base.value(x)? + dist2 / (2.0 * self.lambda))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        let mut proj = vec![0.0; x.len()];
        self.gradient_into(x, &mut out, &mut proj)?;
        Ok(out)
    }

    /// Buffer-based gradient for the chain drivers: `proj_buf` receives the
    /// projection so the caller can reuse it.
    #[inline]
    pub(crate) fn gradient_into(
        &self,
        x: &[f64],
        out: &mut [f64],
        proj_buf: &mut [f64],
    ) -> Result<()> {
        self.base.gradient_into(x, out);
        self.body.project_into(x, proj_buf)?;
        let inv_lambda = 1.0 / self.lambda;
        for (o, (xi, pi)) in out.iter_mut().zip(x.iter().zip(proj_buf.iter())) {
            *o += (xi - pi) * inv_lambda;
        }
        Ok(())
    }
}

/// Free-function form of the penalized gradient.
pub fn my_gradient(p: &MoreauYosidaPotential, x: &[f64]) -> Result<Vec<f64>> {
    p.gradient(x)
}
