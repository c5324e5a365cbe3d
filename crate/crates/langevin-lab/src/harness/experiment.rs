//! Experiment orchestration: replicated chains, per-outer-iteration
//! metric series, and deterministic persistence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::ConvexBody;
use crate::metrics::{
    sliced_w2, tv_histogram, tv_histogram_vs_gaussian, w2_1d, EmpiricalMeasure, HistogramSpec,
};
use crate::sampler::{
    replicate_chains, run_dl_myula_chain, run_dl_ula_chain, run_ula_baseline_chain,
    run_ula_baseline_penalized, RunRecord,
};
use crate::schedule::{
    dl_myula_schedule, dl_ula_schedule, polynomial_schedule, total_iterations, DoubleLoopSchedule,
    ScheduleScale,
};
use crate::target::GaussianOracle;

use super::config::{ExperimentConfig, MetricKind, ScheduleKind, TargetSpec};
use super::reference::{exact_reference_sampler, ReferenceKind};

/// One row of the per-outer-iteration metric series.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub outer_k: u64,
    pub total_iters: u64,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub tv: Option<f64>,
    pub w2: Option<f64>,
    pub mean_norm_sq: f64,
    pub frac_outside: Option<f64>,
    /// Summed wall-clock of this stage across chains; volatile, persisted
    /// separately from the deterministic series.
    pub wallclock_ms: f64,
}

#[derive(Clone, Debug, Default)]
pub struct MetricSeries {
    pub rows: Vec<MetricRow>,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub digest: String,
    pub records: Vec<RunRecord>,
    pub series: MetricSeries,
}

/// Runs the configured experiment: replicates chains, forms the
/// per-outer-iteration empirical measures from the post-clip snapshots,
/// evaluates the configured metrics against the analytic target oracle
/// (Gaussian targets) or an exact reference cloud (uniform-on-body
/// targets), and persists series/records when an output directory is
/// configured. Deterministic in the config digest and seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let digest = cfg.digest();
    let target = cfg.build_target()?;
    let dim = target.dim();
    let x0 = cfg
        .initial_point
        .clone()
        .unwrap_or_else(|| vec![0.0; dim]);
    let seed = cfg.seed;

    let body = match cfg.schedule.kind {
        ScheduleKind::DlMyula => Some(cfg.build_body()?),
        _ if cfg.body.is_some() && cfg.schedule.lambda.is_some() => Some(cfg.build_body()?),
        _ => None,
    };

    let (records, schedule) = match cfg.schedule.kind {
        ScheduleKind::DlUla => {
            let schedule = dl_ula_schedule(
                target.lipschitz(),
                dim,
                target.tail(),
                scale_of(cfg)?,
            )?;
            let k_outer = cfg.outer_iterations.unwrap_or(1);
            let run = |chain: u64| {
                run_dl_ula_chain(&target, &schedule, k_outer, &x0, seed, chain, &digest)
            };
            (replicate_chains(run, cfg.n_chains)?, Some(schedule))
        }
        ScheduleKind::DlMyula => {
            let b = body.as_ref().expect("body built above");
            let schedule = dl_myula_schedule(
                target.lipschitz(),
                dim,
                b.inner_radius(),
                b.outer_radius(),
                scale_of(cfg)?,
            )?;
            let k_outer = cfg.outer_iterations.unwrap_or(1);
            let run = |chain: u64| {
                run_dl_myula_chain(&target, b, &schedule, k_outer, &x0, seed, chain, &digest)
            };
            (replicate_chains(run, cfg.n_chains)?, Some(schedule))
        }
        ScheduleKind::Polynomial | ScheduleKind::Constant => {
            let gamma0 = cfg.schedule.gamma0.expect("validated");
            let alpha = match cfg.schedule.kind {
                ScheduleKind::Polynomial => cfg.schedule.alpha.expect("validated"),
                _ => 0.0,
            };
            let gammas = polynomial_schedule(gamma0, alpha)?;
            let steps = cfg.schedule.steps.expect("validated");
            let every = cfg.schedule.snapshot_every.unwrap_or(steps);
            let records = match (&body, cfg.schedule.lambda) {
                (Some(b), Some(lambda)) => {
                    let penalized = crate::geometry::MoreauYosidaPotential::new(
                        target.clone(),
                        b.clone(),
                        lambda,
                    )?;
                    let run = |chain: u64| {
                        run_ula_baseline_penalized(
                            &penalized, &gammas, steps, &x0, seed, chain, every,
                        )
                    };
                    replicate_chains(run, cfg.n_chains)?
                }
                _ => {
                    let run = |chain: u64| {
                        run_ula_baseline_chain(&target, &gammas, steps, &x0, seed, chain, every)
                    };
                    replicate_chains(run, cfg.n_chains)?
                }
            };
            (records, None)
        }
    };

    let mut rows = Vec::new();
    let result = build_series(cfg, &records, schedule.as_ref(), body.as_ref(), &mut rows);
    let series = MetricSeries { rows };
    if let Err(err) = result {
        // flush whatever part of the series exists before aborting
        if let Some(dir) = &cfg.output {
            let _ = fs::create_dir_all(dir);
            let _ = fs::write(dir.join("series.csv"), series_to_csv(&series));
        }
        return Err(err);
    }

    if let Some(dir) = &cfg.output {
        persist(cfg, &digest, &records, &series, dir)?;
    }

    Ok(ExperimentOutput {
        digest,
        records,
        series,
    })
}

fn scale_of(cfg: &ExperimentConfig) -> Result<ScheduleScale> {
    ScheduleScale::new(
        cfg.schedule.scale.n_mult,
        cfg.schedule.scale.gamma_mult,
        cfg.schedule.scale.n_cap,
    )
}

fn gaussian_oracle_of(cfg: &ExperimentConfig) -> Option<GaussianOracle> {
    match &cfg.target {
        TargetSpec::Gaussian { mean, variances } => {
            GaussianOracle::new(mean.clone(), variances.clone()).ok()
        }
        TargetSpec::Uniform { .. } => None,
    }
}

fn build_series(
    cfg: &ExperimentConfig,
    records: &[RunRecord],
    schedule: Option<&DoubleLoopSchedule>,
    body: Option<&ConvexBody>,
    rows: &mut Vec<MetricRow>,
) -> Result<()> {
    let n_rows = records
        .first()
        .map(|r| r.snapshots.len())
        .unwrap_or(0);
    if records.iter().any(|r| r.snapshots.len() != n_rows) {
        return Err(LabError::InvalidParameter(
            "chains produced unequal snapshot counts".into(),
        ));
    }
    let dim = cfg.dim();
    let oracle = gaussian_oracle_of(cfg);

    let want_tv = cfg.metrics.contains(&MetricKind::Tv);
    let want_tv_radial = cfg.metrics.contains(&MetricKind::TvRadial);
    let want_w2 = cfg.metrics.contains(&MetricKind::W2Sliced);
    let want_w2_1d = cfg.metrics.contains(&MetricKind::W21d);

    // the largest clip radius fixes the default histogram extent
    let max_tau = records
        .first()
        .and_then(|r| {
            r.snapshots
                .iter()
                .filter_map(|s| s.clip_radius)
                .fold(None, |acc: Option<f64>, t| {
                    Some(acc.map_or(t, |a| a.max(t)))
                })
        })
        .unwrap_or(0.0);

    let hist_spec = match (&cfg.histogram, want_tv) {
        (Some(h), _) => Some(HistogramSpec::new(h.lo.clone(), h.hi.clone(), h.bins_per_dim)?),
        (None, true) => {
            if max_tau > 0.0 {
                Some(HistogramSpec::symmetric(dim, max_tau, 64)?)
            } else {
                return Err(LabError::InvalidParameter(
                    "tv metric on a single-loop run needs an explicit histogram".into(),
                ));
            }
        }
        (None, false) => None,
    };

    // reference cloud: needed for sliced W2 always, and for TV on
    // uniform-body targets
    let need_reference = want_w2
        || want_w2_1d
        || want_tv_radial
        || (want_tv && oracle.is_none());
    let reference = if need_reference {
        let kind = match (&oracle, body) {
            (Some(g), None) => ReferenceKind::Gaussian(g),
            (_, Some(b)) => ReferenceKind::UniformBody(b),
            (None, None) => {
                return Err(LabError::InvalidParameter(
                    "uniform target without a body has no reference distribution".into(),
                ))
            }
        };
        Some(exact_reference_sampler(
            kind,
            cfg.reference_samples,
            derive_seed(cfg.seed, 0x5ef5),
        )?)
    } else {
        None
    };
    let reference_radii = if want_tv_radial {
        reference.as_ref().map(|r| r.norms_measure())
    } else {
        None
    };

    let radial_spec = if want_tv_radial {
        let rmax = if max_tau > 0.0 {
            max_tau
        } else {
            2.0 * body.map(|b| b.outer_radius()).unwrap_or(1.0)
        };
        let bins = cfg.histogram.as_ref().map(|h| h.bins_per_dim).unwrap_or(64);
        Some(HistogramSpec::new(vec![0.0], vec![rmax], bins)?)
    } else {
        None
    };

    rows.reserve(n_rows);
    for j in 0..n_rows {
        let first = &records[0].snapshots[j];
        let outer_k = first.outer_k;
        let points: Vec<Vec<f64>> = records
            .iter()
            .map(|r| r.snapshots[j].post_clip.clone())
            .collect();
        let cloud = EmpiricalMeasure::equal_weight(points)?;

        let tv = if want_tv {
            let spec = hist_spec.as_ref().expect("built above");
            Some(match (&oracle, &reference) {
                (Some(g), _) => tv_histogram_vs_gaussian(&cloud, g, spec)?,
                (None, Some(r)) => tv_histogram(&cloud, r, spec)?,
                (None, None) => unreachable!("reference built when needed"),
            })
        } else if want_tv_radial {
            let spec = radial_spec.as_ref().expect("built above");
            let reference_radii = reference_radii.as_ref().expect("built above");
            Some(tv_histogram(&cloud.norms_measure(), reference_radii, spec)?)
        } else {
            None
        };

        let w2 = if want_w2 {
            let r = reference.as_ref().expect("built above");
            Some(sliced_w2(
                &cloud,
                r,
                cfg.n_proj,
                derive_seed(cfg.seed, 0x51ce),
            )?)
        } else if want_w2_1d {
            let r = reference.as_ref().expect("built above");
            Some(w2_1d(&cloud, r)?)
        } else {
            None
        };

        let frac_outside = body.map(|b| {
            let outside = cloud
                .points()
                .filter(|p| !b.contains(p))
                .count();
            outside as f64 / cloud.len() as f64
        });

        let total_iters = match schedule {
            Some(s) => total_iterations(s, outer_k as u32)?,
            None => outer_k,
        };

        rows.push(MetricRow {
            outer_k,
            total_iters,
            gamma: first.gamma,
            lambda: first.penalty,
            tv,
            w2,
            mean_norm_sq: cloud.mean_norm_sq(),
            frac_outside,
            wallclock_ms: records
                .iter()
                .map(|r| r.stage_millis.get(j).copied().unwrap_or(0.0))
                .sum(),
        });
    }
    Ok(())
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub const SERIES_HEADER: &str =
    "outer_k,total_iters,gamma,lambda,tv,w2,mean_norm_sq,frac_outside";

/// Renders the deterministic part of the series as CSV.
pub fn series_to_csv(series: &MetricSeries) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for row in &series.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.outer_k,
            row.total_iters,
            fmt_float(row.gamma),
            fmt_opt(row.lambda),
            fmt_opt(row.tv),
            fmt_opt(row.w2),
            fmt_float(row.mean_norm_sq),
            fmt_opt(row.frac_outside),
        ));
    }
    out
}

#[derive(Serialize)]
struct RecordsHeader<'a> {
    config_digest: &'a str,
    seed: u64,
    n_chains: u64,
}

#[derive(Serialize)]
struct SnapshotLine<'a> {
    chain_id: u64,
    outer_k: u64,
    pre_clip: &'a [f64],
    post_clip: &'a [f64],
    gamma: f64,
    inner_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

/// Serializes run records as JSON lines: a header record first, then one
/// outer-iteration snapshot per line.
pub fn records_to_jsonl(digest: &str, seed: u64, records: &[RunRecord]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&RecordsHeader {
        config_digest: digest,
        seed,
        n_chains: records.len() as u64,
    })?);
    out.push('\n');
    for record in records {
        for snap in &record.snapshots {
            out.push_str(&serde_json::to_string(&SnapshotLine {
                chain_id: record.chain_id,
                outer_k: snap.outer_k,
                pre_clip: &snap.pre_clip,
                post_clip: &snap.post_clip,
                gamma: snap.gamma,
                inner_count: snap.inner_count,
                tau: snap.clip_radius,
                lambda: snap.penalty,
            })?);
            out.push('\n');
        }
    }
    Ok(out)
}

fn persist(
    cfg: &ExperimentConfig,
    digest: &str,
    records: &[RunRecord],
    series: &MetricSeries,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("series.csv"), series_to_csv(series))?;
    if cfg.emit_records {
        fs::write(
            dir.join("records.jsonl"),
            records_to_jsonl(digest, cfg.seed, records)?,
        )?;
    }
    // volatile timings live in their own file so the outputs above stay
    // byte-deterministic
    let mut timings = String::from("outer_k,wallclock_ms\n");
    for row in &series.rows {
        timings.push_str(&format!("{},{:.3}\n", row.outer_k, row.wallclock_ms));
    }
    fs::write(dir.join("timings.csv"), timings)?;
    emit_plot_data(series, digest, dir)?;
    Ok(())
}

/// Writes two whitespace-delimited plot files: `(k, ln tv)` and
/// `(ln total_iters, ln w2)`. Rows with nonpositive or missing values are
/// skipped with a comment marker, and each file starts with a header
/// comment carrying the config digest.
pub fn emit_plot_data(
    series: &MetricSeries,
    digest: &str,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let tv_path = dir.join("tv_vs_k.dat");
    let w2_path = dir.join("w2_vs_total.dat");

    let mut tv_file = String::new();
    let mut w2_file = String::new();
    let header = format!("# config {digest}\n");
    tv_file.push_str(&header);
    w2_file.push_str(&header);
    for row in &series.rows {
        match row.tv {
            Some(tv) if tv > 0.0 => {
                tv_file.push_str(&format!("{} {}\n", row.outer_k, fmt_float(tv.ln())));
            }
            _ => {
                tv_file.push_str(&format!("# skipped outer_k={} (nonpositive tv)\n", row.outer_k));
            }
        }
        match row.w2 {
            Some(w2) if w2 > 0.0 && row.total_iters > 0 => {
                w2_file.push_str(&format!(
                    "{} {}\n",
                    fmt_float((row.total_iters as f64).ln()),
                    fmt_float(w2.ln())
                ));
            }
            _ => {
                w2_file.push_str(&format!("# skipped outer_k={} (nonpositive w2)\n", row.outer_k));
            }
        }
    }
    let mut f = fs::File::create(&tv_path)?;
    f.write_all(tv_file.as_bytes())?;
    let mut f = fs::File::create(&w2_path)?;
    f.write_all(w2_file.as_bytes())?;
    Ok((tv_path, w2_path))
}
