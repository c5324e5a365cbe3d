//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line with its runtime. Every tolerance is pinned in code.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use langevin_lab::prelude::*;

fn verdict(name: &str, ok: bool, elapsed: f64, budget: f64, detail: &str) {
    println!(
        "{name} {} ({elapsed:.2} s, budget {budget:.0} s): {detail}",
        if ok && elapsed < budget { "PASS" } else { "FAIL" }
    );
}

/// AC-1: the exact Gaussian law of the kernel. 10^4 chains on N(0,1),
/// gamma = 0.1, started at the origin; the empirical mean and variance at
/// step 50 match the analytic recursion within three standard errors.
#[test]
fn ac01_gaussian_law_oracle() {
    let t0 = Instant::now();
    let budget = 10.0;
    let n_chains = 10_000u64;
    let gamma = 0.1;
    let steps = 50u64;

    let target = Potential::gaussian(&GaussianOracle::standard(1));
    let gammas = polynomial_schedule(gamma, 0.0).unwrap();
    let records = replicate_chains(
        |chain| run_ula_baseline_chain(&target, &gammas, steps, &[0.0], 101, chain, steps),
        n_chains,
    )
    .unwrap();
    let values: Vec<f64> = records.iter().map(|r| r.snapshots[0].post_clip[0]).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);

    let (law_mean, law_var) = ula_gaussian_law(0.0, 0.0, gamma, steps).unwrap();
    assert!((law_var - 1.05260).abs() < 1e-4);

    let mean_band = 3.0 * (law_var / n).sqrt();
    let var_band = 3.0 * law_var * (2.0 / (n - 1.0)).sqrt();
    let mean_ok = (mean - law_mean).abs() < mean_band;
    let var_ok = (var - law_var).abs() < var_band;

    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-1",
        mean_ok && var_ok,
        elapsed,
        budget,
        &format!(
            "mean {mean:.5} (law {law_mean:.5} +/- {mean_band:.5}), var {var:.5} (law {law_var:.5} +/- {var_band:.5})"
        ),
    );
    assert!(mean_ok && var_ok);
    assert!(elapsed < budget, "runtime {elapsed:.2} s");
}

/// AC-2: the descent inequality holds analytically with zero tolerance on
/// the full gamma x n grid.
#[test]
fn ac02_descent_lemma_grid() {
    let t0 = Instant::now();
    let budget = 1.0;
    let reports = check_descent_grid().unwrap();
    assert_eq!(reports.len(), 12);
    let all = reports.iter().all(|r| r.holds && r.lhs <= r.rhs);
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-2",
        all,
        elapsed,
        budget,
        &format!("{}/12 grid points hold at zero tolerance", reports.iter().filter(|r| r.holds).count()),
    );
    assert!(all);
    assert!(elapsed < budget);
}

/// AC-3: the exact-constant distance-vs-total-variation bound holds with
/// zero tolerance on 100 seeded Gaussian pairs.
#[test]
fn ac03_w2_tv_exact_bound() {
    let t0 = Instant::now();
    let budget = 1.0;
    let pairs = seeded_gaussian_pairs(271828, 100);
    let mut held = 0;
    for (a, b) in &pairs {
        if check_w2_tv_gaussian_pair(a, b).unwrap().holds {
            held += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict("AC-3", held == 100, elapsed, budget, &format!("{held}/100 pairs hold"));
    assert_eq!(held, 100);
    assert!(elapsed < budget);
}

/// AC-4: the sub-exponential truncation bound at R in {C, 2C, 4C} for the
/// same 100 pairs, zero tolerance.
#[test]
fn ac04_subexp_bound() {
    let t0 = Instant::now();
    let budget = 1.0;
    let pairs = seeded_gaussian_pairs(271828, 100);
    let mut held = 0;
    let mut total = 0;
    for (a, b) in &pairs {
        let w2_sq = w2_gaussian(a, b).unwrap().powi(2);
        let tv = tv_gaussian_1d(a, b).unwrap();
        let c = a.second_moment().max(b.second_moment()).sqrt();
        for mult in [1.0, 2.0, 4.0] {
            total += 1;
            if w2_sq <= w2_subexp_rhs(mult * c, c, tv).unwrap() {
                held += 1;
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict("AC-4", held == total, elapsed, budget, &format!("{held}/{total} bounds hold"));
    assert_eq!(held, total);
    assert!(elapsed < budget);
}

/// AC-5: geometric decay of the annealed double-loop sampler on the 2-D
/// standard Gaussian: total variation to the analytic target decays in
/// the outer index with slope at most -0.4, and the final TV drops below
/// a third of the first.
#[test]
fn ac05_dl_ula_geometric_decay() {
    let t0 = Instant::now();
    let budget = 180.0;
    let cfg = parse_config(
        r#"{
        "target": {"kind": "gaussian", "mean": [0.0, 0.0], "variances": [1.0, 1.0]},
        "tail": {"eta": 1.0, "m_eta": 0.0},
        "schedule": {"kind": "dl-ula",
                     "scale": {"n_mult": 1.2e-4, "gamma_mult": 1.0, "n_cap": 20000}},
        "outer_iterations": 5,
        "n_chains": 100000,
        "seed": 20260105,
        "metrics": ["tv", "moments"],
        "emit_records": false
    }"#,
    )
    .unwrap();
    let target = cfg.build_target().unwrap();
    let schedule = dl_ula_schedule(
        target.lipschitz(),
        2,
        target.tail(),
        ScheduleScale::new(1.2e-4, 1.0, Some(20_000)).unwrap(),
    )
    .unwrap();
    // the criterion's step constraint: gamma_1 * L * d <= 0.2 with the
    // decay bases unscaled
    assert!(schedule.gamma(1) * target.lipschitz() * 2.0 <= 0.2);
    assert!((schedule.gamma(2) / schedule.gamma(1) - (-2.0f64).exp()).abs() < 1e-12);

    let out = run_experiment(&cfg).unwrap();
    let tvs: Vec<(u32, f64)> = out
        .series
        .rows
        .iter()
        .map(|r| (r.outer_k as u32, r.tv.expect("tv requested")))
        .collect();
    assert_eq!(tvs.len(), 5);
    let slope = fit_decay_rate(&tvs).unwrap();
    let slope_ok = slope <= -0.4;
    let drop_ok = tvs[4].1 < tvs[0].1 / 3.0;
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-5",
        slope_ok && drop_ok,
        elapsed,
        budget,
        &format!(
            "tv = [{}], slope {slope:.3} (<= -0.4), tv5/tv1 = {:.3} (< 1/3)",
            tvs.iter().map(|(_, v)| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
            tvs[4].1 / tvs[0].1
        ),
    );
    assert!(slope_ok, "slope {slope}");
    assert!(drop_ok, "tv(5) {} vs tv(1)/3 {}", tvs[4].1, tvs[0].1 / 3.0);
    assert!(elapsed < budget, "runtime {elapsed:.1} s");
}

/// AC-6: Pinsker dominates the exact total variation on the seeded pairs,
/// and the Monte-Carlo tail bound holds on a million exact Gaussian draws
/// in dimensions 1 and 3.
#[test]
fn ac06_pinsker_and_tails() {
    let t0 = Instant::now();
    let budget = 10.0;
    let pairs = seeded_gaussian_pairs(271828, 100);
    let pinsker_ok = pairs.iter().all(|(a, b)| {
        let tv = tv_gaussian_1d(a, b).unwrap();
        let bound = pinsker_tv_bound(kl_gaussian(a, b).unwrap()).unwrap();
        tv <= bound
    });

    let mut tail_ok = true;
    let mut detail = String::new();
    for d in [1usize, 3] {
        let oracle = GaussianOracle::standard(d);
        let cloud = exact_reference_sampler(ReferenceKind::Gaussian(&oracle), 1_000_000, 602 + d as u64)
            .unwrap();
        for r in check_tail_mc(&cloud, (d as f64).sqrt(), &[1.5, 2.0, 3.0]) {
            tail_ok &= r.holds;
            detail.push_str(&format!(" d{d}R{:.1}:{:.4}<={:.4}", r.context["r"], r.lhs, r.rhs));
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-6",
        pinsker_ok && tail_ok,
        elapsed,
        budget,
        &format!("pinsker 100/100,{detail}"),
    );
    assert!(pinsker_ok && tail_ok);
    assert!(elapsed < budget);
}

/// AC-7: the penalty-bias scaling law. The penalized uniform-ball target
/// is sampled at four penalties; the sliced distance to the exact uniform
/// law decreases as the penalty shrinks with a log-log slope in
/// [0.1, 0.6].
#[test]
fn ac07_moreau_yosida_bias_scaling() {
    let t0 = Instant::now();
    let budget = 300.0;
    let body = ConvexBody::ball(2, 1.0).unwrap();
    let target = Potential::uniform(2, TailParams::new(1.0, 2.0).unwrap());
    let reference =
        exact_reference_sampler(ReferenceKind::UniformBody(&body), 100_000, 707).unwrap();

    let lambdas = [0.1, 0.03, 0.01, 0.003];
    let mut series = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let penalized = MoreauYosidaPotential::new(target.clone(), body.clone(), lambda).unwrap();
        let gamma = 0.2 * lambda; // gamma * L_eff = 0.2
        let gammas = polynomial_schedule(gamma, 0.0).unwrap();
        let records = replicate_chains(
            |chain| {
                run_ula_baseline_penalized(
                    &penalized,
                    &gammas,
                    100_000,
                    &[0.0, 0.0],
                    900 + i as u64,
                    chain,
                    100,
                )
            },
            200,
        )
        .unwrap();
        let points: Vec<Vec<f64>> = records
            .iter()
            .flat_map(|r| r.snapshots.iter().map(|s| s.post_clip.clone()))
            .collect();
        let cloud = EmpiricalMeasure::equal_weight(points).unwrap();
        let (w2, se) = sliced_w2_with_se(&cloud, &reference, 128, 7100 + i as u64).unwrap();
        series.push(BiasPoint {
            lambda,
            w2,
            std_err: se,
        });
    }
    let report = check_my_bias_scaling(&series).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-7",
        report.holds,
        elapsed,
        budget,
        &format!(
            "w2 = [{}], slope {:.3} in [0.1, 0.6], monotone {}",
            series.iter().map(|p| format!("{:.4}", p.w2)).collect::<Vec<_>>().join(", "),
            report.lhs,
            report.context["monotone"] == 1.0
        ),
    );
    assert!(report.holds, "{report:?}");
    assert!(elapsed < budget, "runtime {elapsed:.1} s");
}

/// AC-8: the constrained double-loop sampler converges to the uniform law
/// on the disc: the outside fraction is nonincreasing (within two
/// standard errors) and at most 0.05 at the last stage, and the radial
/// total variation decays with slope at most -0.3.
#[test]
fn ac08_dl_myula_convergence() {
    let t0 = Instant::now();
    let budget = 300.0;
    let cfg = parse_config(
        r#"{
        "target": {"kind": "uniform", "dim": 2},
        "body": {"kind": "ball", "radius": 1.0},
        "tail": {"eta": 1.0, "m_eta": 2.0},
        "schedule": {"kind": "dl-myula",
                     "scale": {"n_mult": 1.0, "gamma_mult": 3.0, "n_cap": 40000}},
        "outer_iterations": 4,
        "n_chains": 10000,
        "seed": 20260108,
        "metrics": ["tv-radial", "moments"],
        "emit_records": false
    }"#,
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    let rows = &out.series.rows;
    assert_eq!(rows.len(), 4);
    let n = cfg.n_chains as f64;

    let fracs: Vec<f64> = rows.iter().map(|r| r.frac_outside.unwrap()).collect();
    let mut monotone = true;
    for w in fracs.windows(2) {
        let se0 = (w[0] * (1.0 - w[0]) / n).sqrt();
        let se1 = (w[1] * (1.0 - w[1]) / n).sqrt();
        if w[1] > w[0] + 2.0 * (se0 * se0 + se1 * se1).sqrt() {
            monotone = false;
        }
    }
    let final_ok = fracs[3] <= 0.05;

    let tvs: Vec<(u32, f64)> = rows
        .iter()
        .map(|r| (r.outer_k as u32, r.tv.expect("tv-radial requested")))
        .collect();
    let slope = fit_decay_rate(&tvs).unwrap();
    let slope_ok = slope <= -0.3;

    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-8",
        monotone && final_ok && slope_ok,
        elapsed,
        budget,
        &format!(
            "frac_out = [{}], tv = [{}], slope {slope:.3}",
            fracs.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>().join(", "),
            tvs.iter().map(|(_, v)| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
        ),
    );
    assert!(monotone, "outside fraction increased: {fracs:?}");
    assert!(final_ok, "frac_outside at last stage {} > 0.05", fracs[3]);
    assert!(slope_ok, "radial tv slope {slope}");
    assert!(elapsed < budget, "runtime {elapsed:.1} s");
}

/// AC-9: pushforward equivalence. Running the double-loop sampler on the
/// contracted Gaussian and dilating the samples by M matches running on
/// the original target with (n_k, M^2 gamma_k, M tau_k), in first and
/// second moments, within three standard errors over 10^4 chains.
#[test]
fn ac09_pushforward_equivalence() {
    let t0 = Instant::now();
    let budget = 60.0;
    let m = 3.0;
    let k_outer = 4u32;
    let n_chains = 10_000u64;

    // contracted target N(0, 1/M^2): L = M^2
    let contracted = GaussianOracle::scalar(0.0, 1.0 / (m * m)).unwrap();
    let target_a = Potential::gaussian(&contracted);
    let schedule_a = dl_ula_schedule(
        target_a.lipschitz(),
        1,
        target_a.tail(),
        ScheduleScale::new(0.05, 1.0, Some(3000)).unwrap(),
    )
    .unwrap();

    // original target N(0, 1) with the transformed parameters
    let target_b = Potential::gaussian(&GaussianOracle::standard(1));
    let schedule_b = schedule_a.rescaled(m);

    let digest_a = "pushforward-a";
    let digest_b = "pushforward-b";
    let records_a = replicate_chains(
        |chain| run_dl_ula_chain(&target_a, &schedule_a, k_outer, &[0.0], 1001, chain, digest_a),
        n_chains,
    )
    .unwrap();
    let records_b = replicate_chains(
        |chain| run_dl_ula_chain(&target_b, &schedule_b, k_outer, &[0.0], 2002, chain, digest_b),
        n_chains,
    )
    .unwrap();

    let mut all_ok = true;
    let mut detail = String::new();
    for k in 0..k_outer as usize {
        let a_points: Vec<Vec<f64>> = records_a
            .iter()
            .map(|r| r.snapshots[k].post_clip.clone())
            .collect();
        let scaled = rescale_samples(&a_points, m);
        let xa: Vec<f64> = scaled.iter().map(|p| p[0]).collect();
        let xb: Vec<f64> = records_b
            .iter()
            .map(|r| r.snapshots[k].post_clip[0])
            .collect();
        let moment_ok = |va: &[f64], vb: &[f64], power: u32| -> (bool, f64, f64) {
            let n = va.len() as f64;
            let map = |v: &f64| v.powi(power as i32);
            let ma = va.iter().map(map).sum::<f64>() / n;
            let mb = vb.iter().map(map).sum::<f64>() / n;
            let var_a = va.iter().map(|v| (map(v) - ma).powi(2)).sum::<f64>() / (n - 1.0);
            let var_b = vb.iter().map(|v| (map(v) - mb).powi(2)).sum::<f64>() / (n - 1.0);
            let se = ((var_a + var_b) / n).sqrt();
            ((ma - mb).abs() <= 3.0 * se, ma - mb, se)
        };
        let (ok1, d1, se1) = moment_ok(&xa, &xb, 1);
        let (ok2, d2, se2) = moment_ok(&xa, &xb, 2);
        all_ok &= ok1 && ok2;
        detail.push_str(&format!(
            " k{}: dm1 {:.4}({:.4}) dm2 {:.4}({:.4})",
            k + 1,
            d1,
            se1,
            d2,
            se2
        ));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict("AC-9", all_ok, elapsed, budget, detail.trim());
    assert!(all_ok, "{detail}");
    assert!(elapsed < budget, "runtime {elapsed:.1} s");
}

/// AC-10: determinism and schema. Re-running an experiment with the same
/// seed yields byte-identical persisted outputs; a different seed does
/// not. The report over the full inequality suite exits clean.
#[test]
fn ac10_determinism_and_report() {
    let t0 = Instant::now();
    let budget = 120.0;
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let dir_c = tempfile::tempdir().unwrap();

    let config_for = |out: &std::path::Path, seed: u64| {
        format!(
            r#"{{
            "target": {{"kind": "gaussian", "mean": [0.0, 0.0], "variances": [1.0, 1.0]}},
            "tail": {{"eta": 1.0, "m_eta": 0.0}},
            "schedule": {{"kind": "dl-ula",
                         "scale": {{"n_mult": 0.001, "gamma_mult": 1.0, "n_cap": 400}}}},
            "outer_iterations": 3,
            "n_chains": 500,
            "seed": {seed},
            "metrics": ["tv", "w2-sliced", "moments"],
            "reference_samples": 20000,
            "output": "{}"
        }}"#,
            out.display()
        )
    };

    let cfg_a = parse_config(&config_for(dir_a.path(), 31)).unwrap();
    let cfg_b = parse_config(&config_for(dir_b.path(), 31)).unwrap();
    let cfg_c = parse_config(&config_for(dir_c.path(), 32)).unwrap();
    run_experiment(&cfg_a).unwrap();
    run_experiment(&cfg_b).unwrap();
    run_experiment(&cfg_c).unwrap();

    let mut identical = true;
    for file in ["series.csv", "records.jsonl", "tv_vs_k.dat", "w2_vs_total.dat"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        identical &= a == b;
    }
    let differs = std::fs::read(dir_a.path().join("records.jsonl")).unwrap()
        != std::fs::read(dir_c.path().join("records.jsonl")).unwrap();

    // the report command over the full suite exits clean
    let suite = langevin_lab::harness::standard_bound_suite(20260103, 100, 1_000_000).unwrap();
    std::fs::write(
        dir_a.path().join("bounds.json"),
        serde_json::to_string(&suite).unwrap(),
    )
    .unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_langevin-lab"))
        .args(["report", "--out"])
        .arg(dir_a.path())
        .status()
        .unwrap();
    let report_ok = status.code() == Some(0);

    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "AC-10",
        identical && differs && report_ok,
        elapsed,
        budget,
        &format!(
            "byte-identical rerun: {identical}, seed change differs: {differs}, report exit 0: {report_ok}"
        ),
    );
    assert!(identical);
    assert!(differs);
    assert!(report_ok);
    assert!(elapsed < budget, "runtime {elapsed:.1} s");
}
