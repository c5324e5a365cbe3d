//! Chain drivers: the plain Langevin kernel, the double-loop annealed
//! drivers (unconstrained and penalized), the averaged baseline sampler,
//! and the pushforward rescale.
//!
//! Every driver is a pure function of `(seed, chain_id, configuration)`.
//! Noise comes from counter-keyed streams, so replicated chains produce
//! identical output whether they run serially or in parallel.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{project_ball, ConvexBody, MoreauYosidaPotential};
use crate::rng::{CounterRng, NoiseLane};
use crate::schedule::{total_iterations, DoubleLoopSchedule, StepSizeSequence};
use crate::target::Potential;
use crate::vecmath::{all_finite, norm_sq};

/// Iterates whose norm exceeds this abort the run with a blow-up error.
pub const BLOWUP_NORM: f64 = 1e12;

/// Position of one chain in the keyed noise space: `(chain, outer, inner)`
/// identifies the next Gaussian vector.
#[derive(Clone, Copy, Debug)]
pub struct RngState {
    pub rng: CounterRng,
    pub chain: u64,
    pub outer: u64,
    pub inner: u64,
}

impl RngState {
    pub fn new(seed: u64, chain: u64) -> Self {
        RngState {
            rng: CounterRng::new(seed),
            chain,
            outer: 0,
            inner: 1,
        }
    }
}

/// One outer-iteration snapshot of a double-loop run: the uniformly
/// selected inner iterate before the clip, the same point after the
/// clip, and the stage parameters.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OuterSnapshot {
    pub outer_k: u64,
    pub pre_clip: Vec<f64>,
    pub post_clip: Vec<f64>,
    pub gamma: f64,
    pub inner_count: u64,
    pub clip_radius: Option<f64>,
    pub penalty: Option<f64>,
}

/// Reproducible trace of a sampler run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_digest: String,
    pub seed: u64,
    pub chain_id: u64,
    pub snapshots: Vec<OuterSnapshot>,
    pub total_iterations: u64,
    /// Wall-clock per outer loop. Excluded from serialized records so that
    /// persisted output stays byte-deterministic.
    #[serde(skip)]
    pub stage_millis: Vec<f64>,
}

enum GradSource<'a> {
    Plain(&'a Potential),
    Penalized(&'a MoreauYosidaPotential),
    Staged {
        base: &'a Potential,
        body: &'a ConvexBody,
        inv_lambda: f64,
    },
}

impl GradSource<'_> {
    fn dim(&self) -> usize {
        match self {
            GradSource::Plain(p) => p.dim(),
            GradSource::Penalized(p) => p.dim(),
            GradSource::Staged { base, .. } => base.dim(),
        }
    }

    #[inline]
    fn gradient_into(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        match self {
            GradSource::Plain(p) => {
                p.gradient_into(x, out);
                Ok(())
            }
            GradSource::Penalized(p) => p.gradient_into(x, out, scratch),
            GradSource::Staged {
                base,
                body,
                inv_lambda,
            } => {
                base.gradient_into(x, out);
                body.project_into(x, scratch)?;
                for (o, (xi, pi)) in out.iter_mut().zip(x.iter().zip(scratch.iter())) {
                    *o += (xi - pi) * inv_lambda;
                }
                Ok(())
            }
        }
    }
}

/// The deterministic part of one Langevin step:
/// `x - gamma * grad + sqrt(2 gamma) * noise`.
pub fn ula_update(x: &[f64], gamma: f64, grad: &[f64], noise: &[f64]) -> Vec<f64> {
    let diff = (2.0 * gamma).sqrt();
    x.iter()
        .zip(grad.iter().zip(noise))
        .map(|(xi, (g, n))| xi - gamma * g + diff * n)
        .collect()
}

/// One Langevin step on `target`, drawing fresh Gaussian noise from the
/// counter stream at `state` and advancing the inner counter.
pub fn ula_step(x: &[f64], gamma: f64, target: &Potential, state: &mut RngState) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "step size must be positive, got {gamma}"
        )));
    }
    if x.len() != target.dim() {
        return Err(LabError::DimensionMismatch {
            expected: target.dim(),
            got: x.len(),
        });
    }
    let grad = target.gradient(x)?;
    if !all_finite(&grad) {
        return Err(LabError::NonFiniteGradient {
            outer_k: state.outer,
            inner_n: state.inner,
        });
    }
    let lane = state.rng.noise_lane(state.chain, state.outer);
    let mut noise = vec![0.0; x.len()];
    lane.fill_gaussians(state.inner, &mut noise);
    state.inner += 1;
    Ok(ula_update(x, gamma, &grad, &noise))
}

/// Inner loop engine: runs `n` steps in place, captures the iterate at
/// `snap_index` (1-based). The norm guard doubles as a NaN detector.
#[allow(clippy::too_many_arguments)]
fn inner_loop(
    x: &mut [f64],
    gamma: f64,
    n: u64,
    source: &GradSource,
    lane: &NoiseLane,
    snap_index: u64,
    snapshot: &mut [f64],
    bufs: &mut Buffers,
    outer_k: u64,
) -> Result<()> {
    let diff = (2.0 * gamma).sqrt();
    for i in 1..=n {
        source.gradient_into(x, &mut bufs.grad, &mut bufs.scratch)?;
        lane.fill_gaussians(i, &mut bufs.noise);
        let mut nsq = 0.0;
        for (xj, (gj, nj)) in x.iter_mut().zip(bufs.grad.iter().zip(&bufs.noise)) {
            let v = *xj - gamma * gj + diff * nj;
            *xj = v;
            nsq += v * v;
        }
        // also catches NaN
        if !(nsq < BLOWUP_NORM * BLOWUP_NORM) {
            if !all_finite(&bufs.grad) {
                return Err(LabError::NonFiniteGradient {
                    outer_k,
                    inner_n: i,
                });
            }
            return Err(LabError::NumericBlowup {
                outer_k,
                inner_n: i,
                norm: nsq.sqrt(),
            });
        }
        if i == snap_index {
            snapshot.copy_from_slice(x);
        }
    }
    Ok(())
}

struct Buffers {
    grad: Vec<f64>,
    noise: Vec<f64>,
    scratch: Vec<f64>,
}

impl Buffers {
    fn new(dim: usize) -> Self {
        Buffers {
            grad: vec![0.0; dim],
            noise: vec![0.0; dim],
            scratch: vec![0.0; dim],
        }
    }
}

/// Runs `n` Langevin steps at constant step size and returns the
/// uniformly selected post-step iterate together with the final iterate.
pub fn run_inner_loop(
    x0: &[f64],
    gamma: f64,
    n: u64,
    target: &Potential,
    rng: &CounterRng,
    chain: u64,
    outer: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(LabError::InvalidParameter("inner count must be >= 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "step size must be positive, got {gamma}"
        )));
    }
    let mut x = x0.to_vec();
    let mut snapshot = vec![0.0; x0.len()];
    let mut bufs = Buffers::new(x0.len());
    let snap_index = rng.snapshot_index(chain, outer, n);
    let lane = rng.noise_lane(chain, outer);
    inner_loop(
        &mut x,
        gamma,
        n,
        &GradSource::Plain(target),
        &lane,
        snap_index,
        &mut snapshot,
        &mut bufs,
        outer,
    )?;
    Ok((snapshot, x))
}

#[allow(clippy::too_many_arguments)]
fn run_double_loop(
    target: &Potential,
    body: Option<&ConvexBody>,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    config_digest: &str,
) -> Result<RunRecord> {
    if k_outer < 1 {
        return Err(LabError::InvalidParameter(
            "need at least one outer iteration".into(),
        ));
    }
    if x0.len() != target.dim() {
        return Err(LabError::DimensionMismatch {
            expected: target.dim(),
            got: x0.len(),
        });
    }
    if let Some(b) = body {
        if b.dim() != target.dim() {
            return Err(LabError::DimensionMismatch {
                expected: target.dim(),
                got: b.dim(),
            });
        }
        if norm_sq(x0).sqrt() > b.outer_radius() + 1e-9 {
            return Err(LabError::InvalidParameter(
                "initial point must lie in the outer ball of the body".into(),
            ));
        }
        if !schedule.has_penalty() {
            return Err(LabError::InvalidParameter(
                "constrained runs need a schedule with a penalty sequence".into(),
            ));
        }
    } else if schedule.has_penalty() {
        return Err(LabError::InvalidParameter(
            "penalized schedule supplied without a constraint body".into(),
        ));
    }

    let dim = target.dim();
    let rng = CounterRng::new(seed);
    let mut x = x0.to_vec();
    let mut snapshot = vec![0.0; dim];
    let mut bufs = Buffers::new(dim);
    let mut snapshots = Vec::with_capacity(k_outer as usize);
    let mut stage_millis = Vec::with_capacity(k_outer as usize);

    for k in 1..=k_outer {
        let stage_start = Instant::now();
        let gamma = schedule.gamma(k);
        let n = schedule.inner_count(k)?;
        let tau = schedule.clip_radius(k);
        let lambda = schedule.penalty(k);
        let source = match (body, lambda) {
            (Some(b), Some(lam)) => GradSource::Staged {
                base: target,
                body: b,
                inv_lambda: 1.0 / lam,
            },
            _ => GradSource::Plain(target),
        };
        let snap_index = rng.snapshot_index(chain_id, k as u64, n);
        let lane = rng.noise_lane(chain_id, k as u64);
        inner_loop(
            &mut x,
            gamma,
            n,
            &source,
            &lane,
            snap_index,
            &mut snapshot,
            &mut bufs,
            k as u64,
        )?;
        let pre_clip = snapshot.clone();
        let post_clip = project_ball(&vec![0.0; dim], tau, &pre_clip);
        // the clipped snapshot warm-starts the next outer iteration
        x.copy_from_slice(&post_clip);
        snapshots.push(OuterSnapshot {
            outer_k: k as u64,
            pre_clip,
            post_clip,
            gamma,
            inner_count: n,
            clip_radius: Some(tau),
            penalty: lambda,
        });
        stage_millis.push(stage_start.elapsed().as_secs_f64() * 1e3);
    }

    Ok(RunRecord {
        config_digest: config_digest.to_string(),
        seed,
        chain_id,
        snapshots,
        total_iterations: total_iterations(schedule, k_outer)?,
        stage_millis,
    })
}

#[derive(Serialize)]
struct StandaloneDigest<'a> {
    algorithm: &'a str,
    dim: usize,
    lipschitz: f64,
    schedule: &'a DoubleLoopSchedule,
    k_outer: u32,
    x0: &'a [f64],
    seed: u64,
}

fn standalone_digest(
    algorithm: &str,
    target: &Potential,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
) -> String {
    crate::digest::digest_json(&StandaloneDigest {
        algorithm,
        dim: target.dim(),
        lipschitz: target.lipschitz(),
        schedule,
        k_outer,
        x0,
        seed,
    })
}

/// Double-loop annealed sampler for an unconstrained target: each outer
/// iteration runs an inner Langevin loop at constant `gamma_k`, selects a
/// uniform post-step iterate, clips it into `B(0, tau_k)` by radial
/// rescale, and warm-starts the next outer iteration from the clipped
/// point.
pub fn run_dl_ula(
    target: &Potential,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
) -> Result<RunRecord> {
    let digest = standalone_digest("dl-ula", target, schedule, k_outer, x0, seed);
    run_dl_ula_chain(target, schedule, k_outer, x0, seed, 0, &digest)
}

/// Chain-indexed variant used by [`replicate_chains`].
pub fn run_dl_ula_chain(
    target: &Potential,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    config_digest: &str,
) -> Result<RunRecord> {
    run_double_loop(
        target,
        None,
        schedule,
        k_outer,
        x0,
        seed,
        chain_id,
        config_digest,
    )
}

/// Double-loop sampler for a target constrained to `body`: the same
/// driver with the gradient replaced by the Moreau–Yosida penalized
/// gradient at the stage penalty `lambda_k`.
pub fn run_dl_myula(
    target: &Potential,
    body: &ConvexBody,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
) -> Result<RunRecord> {
    let digest = standalone_digest("dl-myula", target, schedule, k_outer, x0, seed);
    run_dl_myula_chain(target, body, schedule, k_outer, x0, seed, 0, &digest)
}

/// Chain-indexed variant used by [`replicate_chains`].
#[allow(clippy::too_many_arguments)]
pub fn run_dl_myula_chain(
    target: &Potential,
    body: &ConvexBody,
    schedule: &DoubleLoopSchedule,
    k_outer: u32,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    config_digest: &str,
) -> Result<RunRecord> {
    run_double_loop(
        target,
        Some(body),
        schedule,
        k_outer,
        x0,
        seed,
        chain_id,
        config_digest,
    )
}

fn run_baseline_on(
    source: &GradSource,
    gammas: &StepSizeSequence,
    n_steps: u64,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    snapshot_every: u64,
    config_digest: &str,
) -> Result<RunRecord> {
    if n_steps < 1 {
        return Err(LabError::InvalidParameter("need at least one step".into()));
    }
    if snapshot_every < 1 {
        return Err(LabError::InvalidParameter(
            "snapshot_every must be >= 1".into(),
        ));
    }
    let dim = source.dim();
    if x0.len() != dim {
        return Err(LabError::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    let rng = CounterRng::new(seed);
    let lane = rng.noise_lane(chain_id, 0);
    let mut x = x0.to_vec();
    let mut bufs = Buffers::new(dim);
    let mut snapshots = Vec::new();
    let start = Instant::now();
    for i in 1..=n_steps {
        let gamma = gammas.gamma(i);
        let diff = (2.0 * gamma).sqrt();
        source.gradient_into(&x, &mut bufs.grad, &mut bufs.scratch)?;
        lane.fill_gaussians(i, &mut bufs.noise);
        let mut nsq = 0.0;
        for (xj, (gj, nj)) in x.iter_mut().zip(bufs.grad.iter().zip(&bufs.noise)) {
            let v = *xj - gamma * gj + diff * nj;
            *xj = v;
            nsq += v * v;
        }
        if !(nsq < BLOWUP_NORM * BLOWUP_NORM) {
            if !all_finite(&bufs.grad) {
                return Err(LabError::NonFiniteGradient {
                    outer_k: 0,
                    inner_n: i,
                });
            }
            return Err(LabError::NumericBlowup {
                outer_k: 0,
                inner_n: i,
                norm: nsq.sqrt(),
            });
        }
        if i % snapshot_every == 0 {
            snapshots.push(OuterSnapshot {
                outer_k: i,
                pre_clip: x.clone(),
                post_clip: x.clone(),
                gamma,
                inner_count: snapshot_every,
                clip_radius: None,
                penalty: match source {
                    GradSource::Staged { inv_lambda, .. } => Some(1.0 / inv_lambda),
                    GradSource::Penalized(p) => Some(p.lambda()),
                    GradSource::Plain(_) => None,
                },
            });
        }
    }
    Ok(RunRecord {
        config_digest: config_digest.to_string(),
        seed,
        chain_id,
        snapshots,
        total_iterations: n_steps,
        stage_millis: vec![start.elapsed().as_secs_f64() * 1e3],
    })
}

/// Flat-loop averaged sampler: `n_steps` Langevin steps with the given
/// per-step sequence, storing every `snapshot_every`-th iterate so the
/// averaged measure can be resampled by a uniform index over the stored
/// iterates.
pub fn run_ula_baseline(
    target: &Potential,
    gammas: &StepSizeSequence,
    n_steps: u64,
    x0: &[f64],
    seed: u64,
    snapshot_every: u64,
) -> Result<RunRecord> {
    run_ula_baseline_chain(target, gammas, n_steps, x0, seed, 0, snapshot_every)
}

/// Chain-indexed baseline on a plain potential.
pub fn run_ula_baseline_chain(
    target: &Potential,
    gammas: &StepSizeSequence,
    n_steps: u64,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    snapshot_every: u64,
) -> Result<RunRecord> {
    let digest = crate::digest::digest_json(&("baseline", target.dim(), n_steps, seed));
    run_baseline_on(
        &GradSource::Plain(target),
        gammas,
        n_steps,
        x0,
        seed,
        chain_id,
        snapshot_every,
        &digest,
    )
}

/// Chain-indexed baseline on a Moreau–Yosida penalized potential; used to
/// sample the penalized distribution at a fixed penalty.
pub fn run_ula_baseline_penalized(
    penalized: &MoreauYosidaPotential,
    gammas: &StepSizeSequence,
    n_steps: u64,
    x0: &[f64],
    seed: u64,
    chain_id: u64,
    snapshot_every: u64,
) -> Result<RunRecord> {
    let digest =
        crate::digest::digest_json(&("baseline-penalized", penalized.dim(), n_steps, seed));
    run_baseline_on(
        &GradSource::Penalized(penalized),
        gammas,
        n_steps,
        x0,
        seed,
        chain_id,
        snapshot_every,
        &digest,
    )
}

/// Dilates every point by `m` (the pushforward under `x -> m x`).
pub fn rescale_samples(points: &[Vec<f64>], m: f64) -> Vec<Vec<f64>> {
    debug_assert!(m > 0.0);
    points
        .iter()
        .map(|p| p.iter().map(|v| v * m).collect())
        .collect()
}

/// Runs `n_chains` independent chains of `run` and collects the records
/// in chain order. Chains are keyed by their index, so the result is
/// identical no matter how the iteration is scheduled.
pub fn replicate_chains<F>(run: F, n_chains: u64) -> Result<Vec<RunRecord>>
where
    F: Fn(u64) -> Result<RunRecord> + Sync + Send,
{
    if n_chains < 1 {
        return Err(LabError::InvalidParameter("need at least one chain".into()));
    }
    let results: Vec<Result<RunRecord>> = (0..n_chains).into_par_iter().map(run).collect();
    // surface the lowest-index error for determinism
    results.into_iter().collect()
}
