//! # langevin-lab
//!
//! A laboratory for annealed Langevin Monte Carlo on log-concave targets.
//!
//! The crate bundles:
//!
//! - the plain Langevin kernel and two double-loop annealed drivers
//!   (unconstrained, and constrained through a Moreau–Yosida penalty),
//!   all driven by counter-keyed noise for bit-reproducible runs;
//! - geometrically decaying step-size/inner-loop schedules with
//!   desk-scale rescaling knobs;
//! - convex constraint bodies with exact Euclidean projections;
//! - transport and divergence estimators (exact 1-D Wasserstein, sliced
//!   Wasserstein, histogram total variation, Gaussian closed forms);
//! - executable checkers for the moment/tail inequalities, the descent
//!   inequality, the distance-vs-total-variation bounds, and the
//!   penalty-bias scaling law;
//! - an experiment harness with a JSON config format, replicated-chain
//!   orchestration, CSV/JSON-lines persistence and plot-data emission.
//!
//! ```no_run
//! use langevin_lab::prelude::*;
//!
//! let target = Potential::gaussian(&GaussianOracle::standard(2));
//! let schedule = dl_ula_schedule(
//!     1.0,
//!     2,
//!     TailParams::new(1.0, 0.0).unwrap(),
//!     ScheduleScale::new(0.01, 1.0, Some(1000)).unwrap(),
//! )
//! .unwrap();
//! let record = run_dl_ula(&target, &schedule, 3, &[0.0, 0.0], 42).unwrap();
//! assert_eq!(record.snapshots.len(), 3);
//! ```

#![forbid(unsafe_code)]

pub mod bounds;
pub mod digest;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod target;
pub mod vecmath;

pub mod prelude {
    pub use crate::bounds::{
        check_descent_grid, check_descent_lemma_gaussian, check_my_bias_scaling, check_my_tail,
        check_tail_mc, check_w2_tv_gaussian_pair, descent_rhs, fit_decay_rate,
        seeded_gaussian_pairs, w2_subexp_rhs, w2_truncation_rhs, w2_tv_exact_rhs, BiasPoint,
        BoundReport, TailMoment,
    };
    pub use crate::error::{LabError, Result};
    pub use crate::geometry::{
        constrained_tail_bound, my_bias_bound, my_gradient, my_lipschitz, project_ball,
        project_box, project_polytope, project_simplex, ConvexBody, Halfspace,
        MoreauYosidaPotential,
    };
    pub use crate::harness::{
        exact_reference_sampler, parse_config, run_experiment, ExperimentConfig, MetricSeries,
        ReferenceKind,
    };
    pub use crate::metrics::{
        gaussian_bin_masses, kl_gaussian, pinsker_tv_bound, sliced_w2, sliced_w2_with_se,
        tv_gaussian_1d, tv_histogram, tv_histogram_vs_gaussian, ula_gaussian_law, w2_1d,
        w2_gaussian, EmpiricalMeasure, HistogramSpec,
    };
    pub use crate::rng::CounterRng;
    pub use crate::sampler::{
        replicate_chains, rescale_samples, run_dl_myula, run_dl_myula_chain, run_dl_ula,
        run_dl_ula_chain, run_inner_loop, run_ula_baseline, run_ula_baseline_chain,
        run_ula_baseline_penalized, ula_step, ula_update, OuterSnapshot, RngState, RunRecord,
    };
    pub use crate::schedule::{
        dl_myula_schedule, dl_ula_schedule, polynomial_schedule, total_iterations,
        DoubleLoopSchedule, ScheduleScale, StepSizeSequence,
    };
    pub use crate::target::{
        light_tail_bound, second_moment_bound, tail_probability_bound, GaussianOracle, Potential,
        TailParams,
    };
}
