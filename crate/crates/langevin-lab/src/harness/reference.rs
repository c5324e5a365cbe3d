//! Exact i.i.d. reference samplers: ground-truth clouds for the metric
//! estimators.

use crate::error::{LabError, Result};
use crate::geometry::{BodyShape, ConvexBody};
use crate::metrics::EmpiricalMeasure;
use crate::rng::CounterRng;
use crate::target::GaussianOracle;
use crate::vecmath::norm;

/// What to draw from.
#[derive(Clone, Copy, Debug)]
pub enum ReferenceKind<'a> {
    Gaussian(&'a GaussianOracle),
    UniformBody(&'a ConvexBody),
}

/// `n` exact independent draws, deterministic in `seed`. Balls, boxes and
/// the simplex have direct constructions; polytopes fall back to
/// rejection from the bounding box `[-D, D]^d` and fail loudly when the
/// acceptance rate drops below `1e-4`.
pub fn exact_reference_sampler(kind: ReferenceKind, n: u64, seed: u64) -> Result<EmpiricalMeasure> {
    if n < 1 {
        return Err(LabError::InvalidParameter(
            "reference sampler needs n >= 1".into(),
        ));
    }
    let rng = CounterRng::new(seed);
    match kind {
        ReferenceKind::Gaussian(oracle) => {
            let lane = rng.reference_lane(1);
            let d = oracle.dim();
            let sd: Vec<f64> = oracle.variances().iter().map(|v| v.sqrt()).collect();
            let mut points = Vec::with_capacity(n as usize);
            let mut g = vec![0.0; d];
            for i in 0..n {
                lane.fill_gaussians(i, &mut g);
                points.push(
                    (0..d)
                        .map(|j| oracle.mean()[j] + sd[j] * g[j])
                        .collect::<Vec<f64>>(),
                );
            }
            EmpiricalMeasure::equal_weight(points)
        }
        ReferenceKind::UniformBody(body) => uniform_body_cloud(body, n, &rng),
    }
}

fn uniform_body_cloud(body: &ConvexBody, n: u64, rng: &CounterRng) -> Result<EmpiricalMeasure> {
    let d = body.dim();
    let lane = rng.reference_lane(2);
    let mut points = Vec::with_capacity(n as usize);

    match body.shape() {
        BodyShape::Ball { radius } => {
            let mut g = vec![0.0; d];
            for i in 0..n {
                lane.fill_gaussians(i, &mut g);
                let len = norm(&g);
                let u = lane.uniform(i, 0);
                let r = radius * u.powf(1.0 / d as f64);
                points.push(g.iter().map(|v| v / len * r).collect());
            }
            EmpiricalMeasure::equal_weight(points)
        }
        BodyShape::Box { lo, hi } => {
            for i in 0..n {
                points.push(
                    (0..d)
                        .map(|j| lo[j] + (hi[j] - lo[j]) * lane.uniform(i, j as u64))
                        .collect(),
                );
            }
            EmpiricalMeasure::equal_weight(points)
        }
        BodyShape::Simplex => {
            // normalized exponential spacings are uniform on the simplex
            for i in 0..n {
                let e: Vec<f64> = (0..d).map(|j| -lane.uniform(i, j as u64).ln()).collect();
                let total: f64 = e.iter().sum();
                points.push(e.iter().map(|v| v / total).collect());
            }
            EmpiricalMeasure::equal_weight(points)
        }
        BodyShape::Polytope { .. } => {
            // rejection from the bounding box of the outer ball
            let half_width = body.outer_radius();
            let max_attempts = (n.saturating_mul(10_000)).max(1_000_000);
            let mut attempts: u64 = 0;
            let mut counter: u64 = 0;
            let mut candidate = vec![0.0; d];
            while (points.len() as u64) < n {
                if attempts >= max_attempts {
                    return Err(LabError::RejectionRateTooLow {
                        rate: points.len() as f64 / attempts as f64,
                    });
                }
                for (j, c) in candidate.iter_mut().enumerate() {
                    *c = -half_width + 2.0 * half_width * lane.uniform(counter, j as u64);
                }
                attempts += 1;
                counter += 1;
                if body.contains(&candidate) {
                    points.push(candidate.clone());
                }
            }
            EmpiricalMeasure::equal_weight(points)
        }
    }
}
