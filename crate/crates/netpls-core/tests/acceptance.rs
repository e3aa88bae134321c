//! Acceptance suite: every criterion below prints one PASS/FAIL line with
//! the measured quantities (run with `--nocapture` to see them on success).
//!
//! The Monte Carlo criteria use a reduced start grid (5 equispaced
//! initializations) and a 60-iteration cap per start; both are free
//! configuration and keep the suite inside its time budget without touching
//! any tested tolerance.

mod common;

use common::{brute_force_rank_d, frob_dist, ols_normal_equations, random_symmetric, seeded};
use ndarray::{Array1, Array2};
use rand::Rng;

use netpls_core::bootstrap::{
    bootstrap_gamma, bootstrap_latent, confidence_interval, draw_weights, run_bootstrap,
    BootstrapConfig, CiMethod, WeightScheme,
};
use netpls_core::clustering::{fit_fixed_k, select_k, CovarianceModel, GmmOptions};
use netpls_core::estimator::{fit, gamma_update, FitConfig};
use netpls_core::metrics::{adjusted_rand_index, normalized_mutual_information, Partition};
use netpls_core::model::{latent_kernel_matrix, EdgeCovariates, Signature};
use netpls_core::simulate::{
    simulate_type1, simulate_type2, Type1Setting, Type2Setting,
};

fn mc_fit_config() -> FitConfig {
    FitConfig { num_inits: 5, max_iter: 60, ..FitConfig::default() }
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_ols_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = seeded(1001);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let n = 4 + (trial % 5); // up to 8 nodes
        let p = 1 + (trial % 3); // up to 3 covariates
        let mats: Vec<Array2<f64>> = (0..p)
            .map(|_| {
                let mut m = random_symmetric(n, &mut rng);
                for i in 0..n {
                    m[[i, i]] = 0.0;
                }
                m
            })
            .collect();
        let x = EdgeCovariates::new(n, mats).unwrap();
        let a = random_symmetric(n, &mut rng);
        let r = random_symmetric(n, &mut rng);
        let got = gamma_update(&a, &x, &r).unwrap();

        let rows = n * n - n;
        let mut design = Array2::<f64>::zeros((rows, p));
        let mut y = Array1::<f64>::zeros(rows);
        let mut row = 0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for l in 0..p {
                    design[[row, l]] = x.matrices()[l][[i, j]];
                }
                y[row] = a[[i, j]] - r[[i, j]];
                row += 1;
            }
        }
        let want = ols_normal_equations(&design, &y);
        for l in 0..p {
            worst = worst.max((got[l] - want[l]).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        "1 (OLS oracle equivalence)",
        worst < 1e-10 && elapsed.as_secs_f64() < 5.0,
        &format!("max |diff| = {worst:.2e} over 200 instances in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_rank_filter_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = seeded(1002);
    let mut worst = 0.0f64;
    let mut worst_idem = 0.0f64;
    for trial in 0..500 {
        let n = 3 + (trial % 4); // up to 6 nodes
        let d = 1 + (trial % n.min(3));
        let b = random_symmetric(n, &mut rng);
        let out = netpls_core::spectral::rank_d_filter(&b, d).unwrap();
        let oracle = brute_force_rank_d(&b, d);
        worst = worst.max(frob_dist(&out.filtered, &oracle));
        let again = netpls_core::spectral::rank_d_filter(&out.filtered, d).unwrap();
        worst_idem = worst_idem.max(frob_dist(&out.filtered, &again.filtered));
    }
    let elapsed = start.elapsed();
    report(
        "2 (rank-d filter oracle equivalence)",
        worst < 1e-8 && worst_idem < 1e-10 && elapsed.as_secs_f64() < 10.0,
        &format!(
            "max Frobenius gap = {worst:.2e}, max idempotence gap = {worst_idem:.2e}, \
             500 instances in {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_3_noiseless_recovery() {
    let start = std::time::Instant::now();
    let (_, truth) = simulate_type1(200, Type1Setting::A, 33).unwrap();
    let config = FitConfig { tol: Some(1e-12), ..FitConfig::default() };
    let fr = fit(&truth.p, &truth.x, &config).unwrap();
    let gamma_err = (fr.params.gamma[0] - 0.4).abs();

    let gmm = select_k(fr.params.lambda.view(), 9, &CovarianceModel::ALL, 1).unwrap();
    let blocks = netpls_core::bootstrap::relabel_monotone(
        &netpls_core::clustering::residual_blocks(&gmm, fr.params.signature).unwrap(),
    );
    // After monotone relabeling block 1 is the high-intensity cluster.
    let t11 = blocks.theta[[0, 0]];
    let t22 = blocks.theta[[1, 1]];
    let t12 = blocks.theta[[0, 1]];
    let theta_err = (t11 - 0.446224)
        .abs()
        .max((t22 - 0.09).abs())
        .max((t12 - 0.2004).abs());
    let elapsed = start.elapsed();
    report(
        "3 (noiseless recovery)",
        gamma_err < 1e-6 && gmm.k == 2 && theta_err < 1e-4 && elapsed.as_secs_f64() < 30.0,
        &format!(
            "|gamma - 0.4| = {gamma_err:.2e}, K = {}, max theta error = {theta_err:.2e}, \
             in {elapsed:.2?}",
            gmm.k
        ),
    );
}

struct McOutcome {
    mse: Vec<f64>,
    mean_ari_auto: f64,
    mean_ari_k2: f64,
}

fn type1_mc(setting: Type1Setting, n: usize, reps: usize, seed0: u64) -> McOutcome {
    let p = match setting {
        Type1Setting::C => 2,
        _ => 1,
    };
    let mut sq_err = vec![0.0f64; p];
    let mut ari_auto = 0.0;
    let mut ari_k2 = 0.0;
    let truth_gamma = match setting {
        Type1Setting::C => vec![0.4, 0.1],
        _ => vec![0.4],
    };
    for r in 0..reps {
        let seed = seed0 + r as u64;
        let (a, truth) = simulate_type1(n, setting, seed).unwrap();
        let fr = fit(a.matrix(), &truth.x, &mc_fit_config()).unwrap();
        for l in 0..p {
            sq_err[l] += (fr.params.gamma[l] - truth_gamma[l]).powi(2);
        }
        let auto = select_k(fr.params.lambda.view(), 9, &CovarianceModel::ALL, seed).unwrap();
        let truth_part = Partition::new(truth.z.iter().copied());
        ari_auto += adjusted_rand_index(
            &Partition::new(auto.assignments.iter().copied()),
            &truth_part,
        )
        .unwrap();
        let forced = fit_fixed_k(
            fr.params.lambda.view(),
            2,
            &CovarianceModel::ALL,
            seed,
            &GmmOptions::default(),
        )
        .unwrap();
        ari_k2 += adjusted_rand_index(
            &Partition::new(forced.assignments.iter().copied()),
            &truth_part,
        )
        .unwrap();
    }
    McOutcome {
        mse: sq_err.iter().map(|s| s / reps as f64).collect(),
        mean_ari_auto: ari_auto / reps as f64,
        mean_ari_k2: ari_k2 / reps as f64,
    }
}

#[test]
fn criterion_4_type1_monte_carlo() {
    let reps = 50;
    let mut pass = true;
    let mut detail = String::new();
    for (tag, setting, ari_auto_floor, ari_k2_floor) in [
        ("a", Type1Setting::A, 0.95, 0.0),
        ("b", Type1Setting::B, 0.90, 0.99),
        ("c", Type1Setting::C, 0.95, 0.0),
    ] {
        let o100 = type1_mc(setting, 100, reps, 10_000);
        let o200 = type1_mc(setting, 200, reps, 20_000);
        let o300 = type1_mc(setting, 300, reps, 30_000);
        for l in 0..o100.mse.len() {
            let monotone = o100.mse[l] > o200.mse[l] && o200.mse[l] > o300.mse[l];
            pass &= monotone;
            detail.push_str(&format!(
                "[{tag}] MSE(g{}) {:.2e} > {:.2e} > {:.2e}; ",
                l + 1,
                o100.mse[l],
                o200.mse[l],
                o300.mse[l]
            ));
        }
        pass &= o300.mean_ari_auto >= ari_auto_floor;
        detail.push_str(&format!(
            "[{tag}] ARI(auto, n=300) = {:.4} (floor {ari_auto_floor})",
            o300.mean_ari_auto
        ));
        if ari_k2_floor > 0.0 {
            pass &= o300.mean_ari_k2 >= ari_k2_floor;
            detail.push_str(&format!(
                ", ARI(K=2, n=300) = {:.4} (floor {ari_k2_floor})",
                o300.mean_ari_k2
            ));
        }
        detail.push_str("; ");
    }
    report("4 (type I Monte Carlo)", pass, &detail);
}

#[test]
fn criterion_5_type2_monte_carlo() {
    let reps = 50;
    // The indefinite residual's weaker eigenvalue makes the iteration
    // basin-sensitive; a denser start grid and a higher iteration cap keep
    // every replicate on the valley floor.
    let config = FitConfig { num_inits: 10, max_iter: 150, ..FitConfig::default() };
    let mut pass = true;
    let mut detail = String::new();
    for (tag, setting) in [("b", Type2Setting::B), ("c", Type2Setting::C)] {
        let truth_gamma: Vec<f64> = match setting {
            Type2Setting::B => vec![0.7],
            Type2Setting::C => vec![0.3, 0.7],
        };
        let mut per_n = Vec::new();
        for (n, seed0) in [(150usize, 50_000u64), (300, 60_000)] {
            let p = truth_gamma.len();
            let mut sq = vec![0.0f64; p];
            let mut ari = 0.0;
            for r in 0..reps {
                let seed = seed0 + r as u64;
                let (a, truth) = simulate_type2(n, setting, seed).unwrap();
                let fr = fit(a.matrix(), &truth.x, &config).unwrap();
                for l in 0..p {
                    sq[l] += (fr.params.gamma[l] - truth_gamma[l]).powi(2);
                }
                let gmm =
                    select_k(fr.params.lambda.view(), 9, &CovarianceModel::ALL, seed).unwrap();
                ari += adjusted_rand_index(
                    &Partition::new(gmm.assignments.iter().copied()),
                    &Partition::new(truth.z.iter().copied()),
                )
                .unwrap();
            }
            let mse: Vec<f64> = sq.iter().map(|s| s / reps as f64).collect();
            per_n.push((n, mse, ari / reps as f64));
        }
        let (_, mse150, ari150) = &per_n[0];
        let (_, mse300, ari300) = &per_n[1];
        let worst300 = mse300.iter().cloned().fold(0.0f64, f64::max);
        pass &= worst300 < 1e-3;
        pass &= ari300 > ari150;
        let fmt = |v: &Vec<f64>| {
            v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join("/")
        };
        detail.push_str(&format!(
            "[{tag}] MSE(n=150) = {}, MSE(n=300) = {} (< 1e-3), ARI {ari150:.4} -> {ari300:.4}; ",
            fmt(mse150),
            fmt(mse300)
        ));
    }
    report("5 (type II Monte Carlo)", pass, &detail);
}

fn coverage_run(datasets: usize, b: usize, seed0: u64) -> (Vec<f64>, std::time::Duration) {
    let start = std::time::Instant::now();
    let n = 200;
    // Coverage counters: gamma, theta11, theta22, theta12, p11, p22, p12.
    let mut hits = [0usize; 7];
    let mut totals = [0usize; 7];
    for ds in 0..datasets {
        let seed = seed0 + ds as u64;
        let (a, truth) = simulate_type1(n, Type1Setting::A, seed).unwrap();
        let fr = fit(a.matrix(), &truth.x, &mc_fit_config()).unwrap();
        let gmm = fit_fixed_k(
            fr.params.lambda.view(),
            2,
            &CovarianceModel::ALL,
            seed,
            &GmmOptions::default(),
        )
        .unwrap();
        let blocks = netpls_core::bootstrap::relabel_monotone(
            &netpls_core::clustering::residual_blocks(&gmm, fr.params.signature).unwrap(),
        );

        // One tracked pair per fitted block combination.
        let mut tracked = Vec::new();
        for pair_class in [(0usize, 0usize), (1, 1), (0, 1)] {
            'outer: for i in 0..n {
                for j in (i + 1)..n {
                    let (zi, zj) = (blocks.assignments[i], blocks.assignments[j]);
                    if (zi.min(zj), zi.max(zj)) == pair_class {
                        tracked.push((i, j));
                        break 'outer;
                    }
                }
            }
        }
        if tracked.len() != 3 {
            continue;
        }
        let mut config = BootstrapConfig::new(
            b,
            WeightScheme::Bayesian { alpha: (n as f64).powf(-0.5) },
            seed ^ 0xabcdef,
        );
        config.tracked_pairs = tracked.clone();
        let Ok(ens) = run_bootstrap(&fr.params, &blocks, a.matrix(), &truth.x, &config) else {
            continue;
        };

        // Truth targets: gamma, relabeled theta entries, tracked pair
        // probabilities.
        let truth_vals = [
            0.4,
            0.446224,
            0.09,
            0.2004,
            truth.p[[tracked[0].0, tracked[0].1]],
            truth.p[[tracked[1].0, tracked[1].1]],
            truth.p[[tracked[2].0, tracked[2].1]],
        ];
        let sample_sets: Vec<Vec<f64>> = vec![
            ens.gamma_samples(0),
            ens.theta_samples(0, 0),
            ens.theta_samples(1, 1),
            ens.theta_samples(0, 1),
            ens.prob_samples(0),
            ens.prob_samples(1),
            ens.prob_samples(2),
        ];
        let points = [
            fr.params.gamma[0],
            blocks.theta[[0, 0]],
            blocks.theta[[1, 1]],
            blocks.theta[[0, 1]],
            0.0,
            0.0,
            0.0, // percentile intervals ignore the point
        ];
        for (idx, samples) in sample_sets.iter().enumerate() {
            if samples.len() < 2 {
                continue;
            }
            let (lo, hi) =
                confidence_interval(samples, points[idx], 0.95, CiMethod::Percentile).unwrap();
            totals[idx] += 1;
            if truth_vals[idx] >= lo && truth_vals[idx] <= hi {
                hits[idx] += 1;
            }
        }
    }
    let rates = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| if t == 0 { 0.0 } else { h as f64 / t as f64 })
        .collect();
    (rates, start.elapsed())
}

#[test]
fn criterion_6_bootstrap_coverage_smoke() {
    let (rates, elapsed) = coverage_run(20, 100, 600);
    let pass = rates.iter().all(|&r| (0.88..=1.0).contains(&r))
        && elapsed.as_secs_f64() < 300.0;
    report(
        "6a (bootstrap coverage, 20 datasets x B=100 smoke)",
        pass,
        &format!(
            "coverage rates {} in {elapsed:.1?} (budget 5 min)",
            rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/")
        ),
    );
}

#[test]
fn criterion_6_bootstrap_coverage_full() {
    let (rates, elapsed) = coverage_run(100, 200, 700);
    let pass = rates.iter().all(|&r| (0.88..=1.0).contains(&r));
    report(
        "6b (bootstrap coverage, 100 datasets x B=200)",
        pass,
        &format!(
            "coverage rates {} in {elapsed:.1?}",
            rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/")
        ),
    );
}

#[test]
fn criterion_7_deweighting_reproduction() {
    let n = 200;
    let (a, truth) = simulate_type1(n, Type1Setting::A, 77).unwrap();
    let fr = fit(a.matrix(), &truth.x, &mc_fit_config()).unwrap();
    let w = draw_weights(
        WeightScheme::Bayesian { alpha: (n as f64).powf(-0.5) },
        n,
        9173,
    )
    .unwrap();
    let gamma_star = bootstrap_gamma(
        a.matrix(),
        &truth.x,
        &fr.params.lambda,
        fr.params.signature,
        &w,
    )
    .unwrap();
    let latent = bootstrap_latent(a.matrix(), &truth.x, &gamma_star, &w, 1).unwrap();
    let gmm = fit_fixed_k(
        latent.lambda_star.view(),
        2,
        &CovarianceModel::ALL,
        5,
        &GmmOptions::default(),
    )
    .unwrap();
    let mut means: Vec<f64> = gmm.means.column(0).to_vec();
    means.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Global sign of the embedding is arbitrary.
    let (m1, m2) = if means[1] > 0.0 {
        (means[0], means[1])
    } else {
        (-means[1], -means[0])
    };
    let err = (m1 - 0.3).abs().max((m2 - 0.668).abs());
    report(
        "7 (de-weighted latent positions align with the block means)",
        err < 0.05,
        &format!("cluster means ({m1:.4}, {m2:.4}) vs (0.3, 0.668), max error {err:.4}"),
    );
}

#[test]
fn criterion_8_reparameterization_identity() {
    // On exact probabilities the model with covariate x and the
    // complement-covariate form are the same model under beta = -gamma,
    // B = gamma + theta; both fits must land on that pair exactly.
    let n = 200;
    let (_, truth) = simulate_type1(n, Type1Setting::A, 91).unwrap();
    let config = FitConfig { tol: Some(1e-12), ..FitConfig::default() };
    let ours = fit(&truth.p, &truth.x, &config).unwrap();
    let gmm = fit_fixed_k(
        ours.params.lambda.view(),
        2,
        &CovarianceModel::ALL,
        3,
        &GmmOptions::default(),
    )
    .unwrap();
    let blocks = netpls_core::bootstrap::relabel_monotone(
        &netpls_core::clustering::residual_blocks(&gmm, ours.params.signature).unwrap(),
    );

    // Complement covariate: the equality indicator 1 - x off-diagonal.
    let x = &truth.x.matrices()[0];
    let comp = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            1.0 - x[[i, j]]
        }
    });
    let x_comp = EdgeCovariates::new(n, vec![comp]).unwrap();
    // The complement form's block kernel is positive semidefinite of rank
    // two, so that fit runs at fixed dimension 2.
    let config2 = FitConfig { d: Some(2), tol: Some(1e-12), ..FitConfig::default() };
    let mu_form = fit(&truth.p, &x_comp, &config2).unwrap();
    let gmm2 = fit_fixed_k(
        mu_form.params.lambda.view(),
        2,
        &CovarianceModel::ALL,
        3,
        &GmmOptions::default(),
    )
    .unwrap();
    let blocks2 = netpls_core::bootstrap::relabel_monotone(
        &netpls_core::clustering::residual_blocks(&gmm2, mu_form.params.signature).unwrap(),
    );

    let beta = mu_form.params.gamma[0];
    let gamma = ours.params.gamma[0];
    let beta_err = (beta + gamma).abs();
    let mut b_err = 0.0f64;
    for a_ in 0..2 {
        for b_ in 0..2 {
            b_err = b_err
                .max(((gamma + blocks.theta[[a_, b_]]) - blocks2.theta[[a_, b_]]).abs());
        }
    }
    // Entrywise identity of the two model parameterizations at the fitted
    // values: -gamma * (1 - x) + (gamma + theta) = gamma * x + theta.
    let mut entry_err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ours_p = gamma * x[[i, j]]
                + blocks.theta[[blocks.assignments[i], blocks.assignments[j]]];
            let mu_p = -gamma * (1.0 - x[[i, j]])
                + (gamma + blocks.theta[[blocks.assignments[i], blocks.assignments[j]]]);
            entry_err = entry_err.max((ours_p - mu_p).abs());
        }
    }
    report(
        "8 (reparameterization identity)",
        beta_err < 1e-6 && b_err < 1e-6 && entry_err < 1e-12,
        &format!(
            "|beta + gamma| = {beta_err:.2e}, max |B - (gamma + theta)| = {b_err:.2e}, \
             entrywise identity {entry_err:.2e}"
        ),
    );
}

#[test]
fn criterion_9_property_suites() {
    let trials = 1000;
    let mut rng = seeded(4242);

    // Unit-weight bootstrap identity.
    for _ in 0..trials {
        let n = 4 + rng.random_range(0..5);
        let mut m = random_symmetric(n, &mut rng);
        for i in 0..n {
            m[[i, i]] = 0.0;
        }
        let x = EdgeCovariates::new(n, vec![m]).unwrap();
        let a = random_symmetric(n, &mut rng);
        let lambda = Array2::from_shape_fn((n, 1), |_| rng.random::<f64>() - 0.5);
        let sig = Signature::new(1, 0);
        let w = Array1::ones(n);
        let boot = bootstrap_gamma(&a, &x, &lambda, sig, &w).unwrap();
        let plain = gamma_update(&a, &x, &latent_kernel_matrix(lambda.view(), sig)).unwrap();
        assert!((boot[0] - plain[0]).abs() < 1e-12);
    }
    println!("  criterion 9: unit-weight identity ok ({trials} trials)");

    // EM monotonicity.
    for t in 0..trials {
        let n = 30;
        let pts = Array2::from_shape_fn((n, 1), |(i, _)| {
            let c = if i % 2 == 0 { -0.5 } else { 0.5 };
            c + rng.random::<f64>() * 0.4
        });
        let k = 1 + (t % 3);
        let opts = GmmOptions { restarts: 1, max_iter: 60, rel_tol: 1e-8 };
        let gmm = netpls_core::clustering::fit_gmm_with(
            pts.view(),
            k,
            CovarianceModel::Spherical,
            t as u64,
            &opts,
        )
        .unwrap();
        for w in gmm.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "EM log-likelihood decreased");
        }
    }
    println!("  criterion 9: EM monotonicity ok ({trials} trials)");

    // ARI/NMI label permutation invariance.
    for _ in 0..trials {
        let n = 6 + rng.random_range(0..20);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let sigma = [3usize, 1, 0, 2];
        let a_perm: Vec<usize> = a.iter().map(|&l| sigma[l]).collect();
        let (pa, pap, pb) = (
            Partition::new(a.iter().copied()),
            Partition::new(a_perm.iter().copied()),
            Partition::new(b.iter().copied()),
        );
        let d_ari = (adjusted_rand_index(&pa, &pb).unwrap()
            - adjusted_rand_index(&pap, &pb).unwrap())
        .abs();
        let d_nmi = (normalized_mutual_information(&pa, &pb).unwrap()
            - normalized_mutual_information(&pap, &pb).unwrap())
        .abs();
        assert!(d_ari < 1e-12 && d_nmi < 1e-12);
    }
    println!("  criterion 9: ARI/NMI permutation invariance ok ({trials} trials)");

    // CSV round trips.
    for _ in 0..trials {
        let rows = 1 + rng.random_range(0..6);
        let cols = 1 + rng.random_range(0..6);
        let m = Array2::from_shape_fn((rows, cols), |_| {
            let v: f64 = rng.random::<f64>() * 2e3 - 1e3;
            v * 10f64.powi(rng.random_range(-12..12))
        });
        let back =
            netpls_core::io::matrix_from_csv(&netpls_core::io::matrix_to_csv(&m)).unwrap();
        assert_eq!(m, back, "CSV round trip must be exact");
    }
    println!("  criterion 9: CSV round trips ok ({trials} trials)");

    // Seed determinism of the random components.
    for t in 0..trials {
        let seed = t as u64;
        let n = 5 + (t % 20);
        for scheme in [
            WeightScheme::Bayesian { alpha: 1.0 },
            WeightScheme::Naive,
            WeightScheme::Moon { m: 1 + (t % n) },
        ] {
            let w1 = draw_weights(scheme, n, seed).unwrap();
            let w2 = draw_weights(scheme, n, seed).unwrap();
            assert_eq!(w1, w2);
        }
        if t % 50 == 0 {
            let (a1, t1) = simulate_type1(16, Type1Setting::C, seed).unwrap();
            let (a2, t2) = simulate_type1(16, Type1Setting::C, seed).unwrap();
            assert_eq!(a1.matrix(), a2.matrix());
            assert_eq!(t1.p, t2.p);
        }
    }
    println!("  criterion 9: seed determinism ok ({trials} trials)");

    report(
        "9 (property suites)",
        true,
        "unit-weight identity, EM monotonicity, ARI/NMI invariance, CSV round trips, \
         seed determinism: 1000 trials each",
    );
}
