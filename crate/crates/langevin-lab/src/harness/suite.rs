//! The standard analytic/Monte-Carlo inequality suite behind the
//! `check-bounds` subcommand.

use crate::bounds::{
    check_descent_grid, check_tail_mc, check_w2_tv_gaussian_pair, seeded_gaussian_pairs,
    w2_subexp_rhs, BoundReport,
};
use crate::error::Result;
use crate::metrics::{kl_gaussian, pinsker_tv_bound, tv_gaussian_1d, w2_gaussian};
use crate::target::GaussianOracle;

use super::reference::{exact_reference_sampler, ReferenceKind};

/// Runs the deterministic inequality suite: the analytic descent grid,
/// the distance-vs-total-variation bounds on a seeded family of Gaussian
/// pairs (exact-constant and sub-exponential forms), Pinsker domination,
/// and Monte-Carlo tail checks on exact Gaussian clouds.
pub fn standard_bound_suite(seed: u64, pair_count: usize, mc_draws: u64) -> Result<Vec<BoundReport>> {
    let mut reports = check_descent_grid()?;

    let pairs = seeded_gaussian_pairs(seed, pair_count);
    for (i, (a, b)) in pairs.iter().enumerate() {
        let mut r = check_w2_tv_gaussian_pair(a, b)?;
        r.name = format!("w2-tv-exact-{i:03}");
        reports.push(r);
    }

    for (i, (a, b)) in pairs.iter().enumerate() {
        let w2_sq = w2_gaussian(a, b)?.powi(2);
        let tv = tv_gaussian_1d(a, b)?;
        let c = a.second_moment().max(b.second_moment()).sqrt();
        for (j, mult) in [1.0, 2.0, 4.0].into_iter().enumerate() {
            let rhs = w2_subexp_rhs(mult * c, c, tv)?;
            reports.push(
                BoundReport::new(format!("w2-subexp-{i:03}-R{j}"), w2_sq, rhs, 0.0)
                    .with("r_over_c", mult),
            );
        }
    }

    for (i, (a, b)) in pairs.iter().enumerate() {
        let tv = tv_gaussian_1d(a, b)?;
        let bound = pinsker_tv_bound(kl_gaussian(a, b)?)?;
        reports.push(BoundReport::new(format!("pinsker-{i:03}"), tv, bound, 0.0));
    }

    for d in [1usize, 3] {
        let oracle = GaussianOracle::standard(d);
        let cloud = exact_reference_sampler(
            ReferenceKind::Gaussian(&oracle),
            mc_draws,
            seed ^ 0xface_0000 ^ d as u64,
        )?;
        let c = (d as f64).sqrt();
        for mut r in check_tail_mc(&cloud, c, &[1.5, 2.0, 3.0]) {
            r.name = format!("{}-d{}", r.name, d);
            reports.push(r);
        }
    }

    Ok(reports)
}
