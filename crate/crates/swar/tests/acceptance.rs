//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Every tolerance is pinned here. Run with
//! `cargo test -p swar --test acceptance -- --nocapture` to see the lines.
//!
//! Two assertions are knowingly red and kept faithful rather than loosened:
//! the contaminated-OLS collapse in criterion 2 and the rank-correlation
//! dominance in criterion 11 do not reproduce under the documented
//! generator and recipes; the suite reports the measured values.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use swar::*;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn cell_mean(result: &StudyResult, method: Method, h: usize) -> f64 {
    let cells: Vec<&StudyCell> = result
        .cells
        .iter()
        .filter(|c| c.method == method && c.h == h)
        .collect();
    assert!(!cells.is_empty(), "no study cell for {method} h={h}");
    cells.iter().map(|c| c.mean.expect("feasible cell")).sum::<f64>() / cells.len() as f64
}

#[test]
fn criterion_01_uncontaminated_model1_table() {
    let started = Instant::now();
    let config = SimConfig {
        model: ModelId::Model1,
        n: 200,
        p: 10,
        h: vec![2, 5],
        k: 1,
        methods: vec![
            Method::Ols,
            Method::Sir,
            Method::Swar,
            Method::SwarW,
            Method::SwarT,
        ],
        repetitions: 200,
        seed: 20240801,
        contamination: None,
    };
    let result = run_study(&config).unwrap();
    let targets = [
        (Method::Ols, 1usize, 0.969),
        (Method::Sir, 5, 0.992),
        (Method::Swar, 2, 0.982),
        (Method::SwarW, 5, 0.994),
        (Method::SwarT, 5, 0.987),
    ];
    let elapsed = started.elapsed().as_secs_f64();
    let mut all = true;
    let mut detail = String::new();
    for (method, h, target) in targets {
        let mean = cell_mean(&result, method, h);
        let ok = (mean - target).abs() <= 0.015;
        all &= ok;
        detail.push_str(&format!("{method}(H={h}) {mean:.4} vs {target} | "));
    }
    let runtime_ok = elapsed < 300.0;
    detail.push_str(&format!("runtime {elapsed:.1}s < 300s"));
    report("criterion 1 (uncontaminated means +-0.015)", all && runtime_ok, &detail);
    assert!(all && runtime_ok, "{detail}");
}

#[test]
fn criterion_02_contaminated_model1_table() {
    let config = SimConfig {
        model: ModelId::Model1,
        n: 500,
        p: 5,
        h: vec![2, 5],
        k: 1,
        methods: vec![Method::Ols, Method::SwarW, Method::SwarT],
        repetitions: 200,
        seed: 20240802,
        contamination: Some(Contamination::new(0.02)),
    };
    let result = run_study(&config).unwrap();
    let ols = cell_mean(&result, Method::Ols, 1);
    let swar_t = cell_mean(&result, Method::SwarT, 2);
    let swar_w = cell_mean(&result, Method::SwarW, 5);

    let ols_ok = ols <= 0.45;
    let t_ok = swar_t >= 0.98;
    let w_ok = swar_w >= 0.97;
    let detail = format!(
        "ols {ols:.4} (<= 0.45: {ols_ok}), swar_t(H=2) {swar_t:.4} (>= 0.98: {t_ok}), \
         swar_w(H=5) {swar_w:.4} (>= 0.97: {w_ok})"
    );
    report("criterion 2 (contaminated means)", ols_ok && t_ok && w_ok, &detail);
    assert!(t_ok && w_ok, "{detail}");
    // Known red: replacing the largest 2% of responses with N(150, 30^2)
    // and shifting their predictors by -5 does not collapse the OLS
    // direction for this generator; the measured mean stays near 0.91
    // under every placement and scoring reading tried.
    assert!(ols_ok, "contaminated OLS does not collapse: {detail}");
}

#[test]
fn criterion_03_model2_table() {
    let config = SimConfig {
        model: ModelId::Model2,
        n: 500,
        p: 10,
        h: vec![2, 5],
        k: 2,
        methods: vec![Method::Sir, Method::Swar, Method::SwarW],
        repetitions: 200,
        seed: 20240803,
        contamination: None,
    };
    let result = run_study(&config).unwrap();
    let swar = cell_mean(&result, Method::Swar, 5);
    let swar_w = cell_mean(&result, Method::SwarW, 5);
    let sir2 = cell_mean(&result, Method::Sir, 2);
    let ok = swar >= 0.97 && swar_w >= 0.98 && (0.47..=0.57).contains(&sir2);
    let detail = format!(
        "swar(H=5) {swar:.4} >= 0.97, swar_w(H=5) {swar_w:.4} >= 0.98, \
         sir(H=2) {sir2:.4} in [0.47, 0.57] (rank-1 failure)"
    );
    report("criterion 3 (two-index model means)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_04_selection_pattern() {
    let mut k1 = 0usize;
    let mut h_counts = std::collections::HashMap::new();
    for rep in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(20240804, rep));
        let (data, _) = gen_model1(500, 5, &mut rng).unwrap();
        let sel = select_h_k(&data, &[2, 5, 10], &[1, 2]).unwrap();
        if sel.k == 1 {
            k1 += 1;
        }
        *h_counts.entry(sel.h).or_insert(0usize) += 1;
    }
    let h2 = *h_counts.get(&2).unwrap_or(&0);
    let plurality = h_counts.values().all(|&c| c <= h2);
    let ok = k1 >= 99 && plurality;
    let detail = format!("K=1 chosen {k1}/100 (>= 99), H counts {h_counts:?} (H=2 plurality)");
    report("criterion 4 (H/K selection)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_05_k1_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240805);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = rng.random_range(2..6usize);
        let beta = Vector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        if beta.norm() < 1e-2 {
            continue;
        }
        let pop = gaussian_linear_population(
            &beta,
            0.2 + 1.5 * rng.random::<f64>(),
            rng.random_range(1..9),
        )
        .unwrap();
        let w0 = ContaminantPoint {
            y: 4.0 * rng.sample::<f64, _>(StandardNormal),
            x: Vector::from_fn(p, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal)),
        };
        let rho = subspace_influence(&pop, &w0).unwrap();
        let dir = direction_influence(&pop, &w0).unwrap();
        worst = worst.max((rho + dir.norm()).abs());
    }
    let ok = worst <= 1e-10;
    let detail = format!("max |IF_rho + ||IF_dir|| | = {worst:.2e} over 1000 random pairs");
    report("criterion 5 (K=1 identity)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_06_zero_influence_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240806);
    let mut worst = [0.0f64; 3];
    let mut checked = [0usize; 3];
    while checked.iter().any(|&c| c < 100) {
        let p = rng.random_range(2..6usize);
        let beta = Vector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        if beta.norm() < 1e-2 {
            continue;
        }
        let h = rng.random_range(1..9usize);
        let pop =
            gaussian_linear_population(&beta, 0.3 + rng.random::<f64>(), h).unwrap();

        // case 1: contaminant at the predictor mean
        if checked[0] < 100 {
            let w0 = ContaminantPoint {
                y: 3.0 * rng.sample::<f64, _>(StandardNormal),
                x: pop.mean.clone(),
            };
            worst[0] = worst[0]
                .max(direction_influence(&pop, &w0).unwrap().norm())
                .max(subspace_influence(&pop, &w0).unwrap().abs());
            checked[0] += 1;
        }

        // case 2: standardized deviation inside the estimated subspace
        if checked[1] < 100 {
            let c = 3.0 * rng.sample::<f64, _>(StandardNormal);
            let x = &pop.mean + &pop.cov * pop.basis.column(0) * c;
            let w0 = ContaminantPoint {
                y: 2.0 * rng.sample::<f64, _>(StandardNormal),
                x,
            };
            worst[1] = worst[1]
                .max(direction_influence(&pop, &w0).unwrap().norm())
                .max(subspace_influence(&pop, &w0).unwrap().abs());
            checked[1] += 1;
        }

        // case 4: zero within-slice residual
        if checked[2] < 100 {
            let slice = rng.random_range(0..h);
            let x = &pop.slice_mean_x[slice]
                + Vector::from_fn(p, |_, _| 0.05 * rng.sample::<f64, _>(StandardNormal));
            let y = pop.slice_mean_y[slice]
                + pop.slopes[slice].dot(&(&x - &pop.slice_mean_x[slice]));
            if pop.slice_of(y).unwrap() == slice {
                let w0 = ContaminantPoint { y, x };
                worst[2] = worst[2]
                    .max(direction_influence(&pop, &w0).unwrap().norm())
                    .max(subspace_influence(&pop, &w0).unwrap().abs());
                checked[2] += 1;
            }
        }
    }
    let ok = worst.iter().all(|&w| w <= 1e-12);
    let detail = format!(
        "max |IF|: mean contaminant {:.2e}, in-subspace {:.2e}, zero residual {:.2e} (each <= 1e-12, 100 configs)",
        worst[0], worst[1], worst[2]
    );
    report("criterion 6 (zero-influence cases)", ok, &detail);
    assert!(ok, "{detail}");
}

/// Population SWAR direction under an eps point-mass mixture with fixed
/// slice boundaries and fixed slice weights: the independent oracle for the
/// direction influence formula.
fn mixture_direction(pop: &PopulationSpec, w0: &ContaminantPoint, eps: f64) -> Vector {
    let p = pop.p();
    let slice0 = pop.slice_of(w0.y).unwrap();
    let mut r = Matrix::zeros(p, p);
    for s in 0..pop.h() {
        let w = pop.weights[s];
        let ind = if s == slice0 { 1.0 } else { 0.0 };
        let denom = (1.0 - eps) * w + eps * ind;
        let exx_clean = &pop.slice_cov[s] + &pop.slice_mean_x[s] * pop.slice_mean_x[s].transpose();
        let sxy_clean = &pop.slice_cov[s] * &pop.slopes[s];
        let exy_clean = &sxy_clean + &pop.slice_mean_x[s] * pop.slice_mean_y[s];
        let mean_x = (&pop.slice_mean_x[s] * ((1.0 - eps) * w) + &w0.x * (eps * ind)) / denom;
        let mean_y = (pop.slice_mean_y[s] * (1.0 - eps) * w + w0.y * eps * ind) / denom;
        let exx = (exx_clean * ((1.0 - eps) * w) + &w0.x * w0.x.transpose() * (eps * ind)) / denom;
        let exy = (exy_clean * ((1.0 - eps) * w) + &w0.x * (w0.y * eps * ind)) / denom;
        let cov = exx - &mean_x * mean_x.transpose();
        let sxy = exy - &mean_x * mean_y;
        let slope = cov.cholesky().expect("mixture slice covariance").solve(&sxy);
        r += &slope * slope.transpose() * w;
    }
    sym_eigen(&r).unwrap().vectors.column(0).clone_owned()
}

fn fd_direction_influence(pop: &PopulationSpec, w0: &ContaminantPoint, eps: f64) -> Vector {
    let gamma = pop.basis.column(0);
    let mut plus = mixture_direction(pop, w0, eps);
    let mut minus = mixture_direction(pop, w0, -eps);
    if plus.dot(&gamma) < 0.0 {
        plus = -plus;
    }
    if minus.dot(&gamma) < 0.0 {
        minus = -minus;
    }
    (plus - minus) / (2.0 * eps)
}

#[test]
fn criterion_07_direction_influence_matches_finite_differences() {
    let beta = Vector::from_vec(vec![1.0, -1.0]);
    let pop = gaussian_linear_population(&beta, 0.5, 5).unwrap();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for x1 in [-3.0f64, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0] {
        for y0 in [-4.0f64, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 4.0] {
            let w0 = ContaminantPoint {
                y: y0,
                x: Vector::from_vec(vec![x1, 0.0]),
            };
            let formula = direction_influence(&pop, &w0).unwrap();
            if formula.norm() < 1e-3 {
                continue; // relative error needs a nonzero reference
            }
            let fd = fd_direction_influence(&pop, &w0, 1e-5);
            worst = worst.max((&formula - fd).norm() / formula.norm());
            checked += 1;
        }
    }
    let ok = worst <= 1e-3 && checked >= 30;
    let detail =
        format!("worst relative error {worst:.2e} <= 1e-3 over {checked} grid points");
    report("criterion 7 (finite-difference oracle)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_08_asymptotic_variance_matches_sampling() {
    let beta = Vector::from_vec(vec![1.0, -1.0, 0.0, 0.0, 0.0]);
    let pop = gaussian_linear_population(&beta, 0.5, 5).unwrap();
    let asv = asymptotic_variance(&pop).unwrap();
    let gamma = pop.basis.column(0).clone_owned();
    let n = 2000usize;
    let reps = 1000usize;
    let mut sum = Vector::zeros(5);
    let mut sum_outer = Matrix::zeros(5, 5);
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(20240808, rep as u64));
        let (data, _) = gen_linear10(n, 5, &mut rng).unwrap();
        let fitted = swar(&data, 5, 1, None).unwrap();
        let mut g = fitted.basis.column(0).clone_owned();
        if g.dot(&gamma) < 0.0 {
            g = -g;
        }
        let d = (g - &gamma) * (n as f64).sqrt();
        sum += &d;
        sum_outer += &d * d.transpose();
    }
    let mean = sum / reps as f64;
    let empirical = sum_outer / reps as f64 - &mean * mean.transpose();
    let scale = asv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // elementwise: 15% relative on structural entries; entries the formula
    // sends to zero must stay below 15% of the matrix scale
    let mut worst_rel = 0.0f64;
    let mut worst_zero = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let a = asv[(i, j)];
            let e = empirical[(i, j)];
            if a.abs() > 0.01 * scale {
                worst_rel = worst_rel.max((e - a).abs() / a.abs());
            } else {
                worst_zero = worst_zero.max(e.abs() / scale);
            }
        }
    }
    let ok = worst_rel <= 0.15 && worst_zero <= 0.15;
    let detail = format!(
        "worst relative {worst_rel:.3} <= 0.15 on structural entries, \
         worst |empirical|/scale {worst_zero:.3} <= 0.15 on zero entries (n=2000, 1000 reps)"
    );
    report("criterion 8 (asymptotic variance)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_09_eif_approximates_sif() {
    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for i in 0..a.len() {
            num += (a[i] - ma) * (b[i] - mb);
            da += (a[i] - ma).powi(2);
            db += (b[i] - mb).powi(2);
        }
        num / (da * db).sqrt()
    }
    fn top3(v: &[f64]) -> std::collections::HashSet<usize> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).reverse());
        idx[..3].iter().copied().collect()
    }

    let config = EstimatorConfig {
        method: Method::Swar,
        h: 2,
        k: 1,
    };
    let mut corrs = Vec::new();
    let mut agree = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(20240809, seed));
        let (data, _) = gen_linear10(200, 5, &mut rng).unwrap();
        let sif = sif_subspace(&data, &config).unwrap();
        let fitted = fit(&data, &config).unwrap();
        let eif = eif_subspace(&data, &fitted).unwrap();
        corrs.push(pearson(&sif.values, &eif.values));
        // the three most influential observations agree when the two
        // rankings share a majority of them
        if top3(&sif.values).intersection(&top3(&eif.values)).count() >= 2 {
            agree += 1;
        }
    }
    let mean_corr = corrs.iter().sum::<f64>() / corrs.len() as f64;
    let min_corr = corrs.iter().fold(1.0f64, |m, &c| m.min(c));
    let ok = mean_corr >= 0.9 && agree >= 40;
    let detail = format!(
        "mean corr {mean_corr:.3} >= 0.9 (min {min_corr:.3}), top-3 majority agreement {agree}/50 >= 40"
    );
    report("criterion 9 (EIF tracks SIF)", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_10_structural_invariants() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(20240810);

    for case in 0..100 {
        let p = rng.random_range(3..7usize);
        let h = rng.random_range(1..5usize);
        let n = h.max(2) * (p + 4) + rng.random_range(10..40);
        let x = Matrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = Vector::from_fn(n, |i, _| {
            x[(i, 0)] + 0.4 * x[(i, 1)].powi(2) + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let data = Dataset::new(x, y).unwrap();

        // full-spectrum SWAR fit
        let full = swar(&data, h, p, None).unwrap();

        // span property: eigenvectors with non-negligible eigenvalues lie
        // in the span of the slice slopes
        let slopes = Matrix::from_columns(&full.slopes);
        let qr = slopes.qr();
        let q = qr.q();
        let lead = full.eigenvalues[0];
        for j in 0..p {
            if full.eigenvalues[j] > 1e-8 * lead {
                let v = full.basis.column(j).clone_owned();
                let resid = &v - &q * (q.transpose() * &v);
                if resid.norm() > 1e-6 {
                    failures.push(format!(
                        "case {case}: eigenvector {j} leaves the slope span by {:.2e}",
                        resid.norm()
                    ));
                }
            }
        }

        // rank(R) <= H
        if p > h && full.eigenvalues[h] > 1e-8 * lead {
            failures.push(format!(
                "case {case}: SWAR eigenvalue {} = {:.2e} exceeds the rank bound",
                h, full.eigenvalues[h]
            ));
        }

        // SIR rank <= H - 1 (only observable when the bound bites below p)
        if h >= 2 && h - 1 < p {
            let s = sir(&data, h, p).unwrap();
            if s.eigenvalues[h - 1] > 1e-8 * s.eigenvalues[0] {
                failures.push(format!(
                    "case {case}: SIR eigenvalue {} = {:.2e} exceeds the rank bound",
                    h - 1,
                    s.eigenvalues[h - 1]
                ));
            }
        }

        // H=1 SWAR is the OLS direction
        let one = swar(&data, 1, 1, None).unwrap();
        let ols = ols_direction(&data).unwrap();
        for j in 0..p {
            if (one.basis[(j, 0)] - ols.basis[(j, 0)]).abs() > 1e-8 {
                failures.push(format!("case {case}: H=1 SWAR differs from OLS at {j}"));
                break;
            }
        }

        // H=K: the span ignores the weights
        if h >= 2 && h <= p {
            let weights: Vec<f64> = (0..h).map(|_| 0.1 + rng.random::<f64>()).collect();
            let a = swar(&data, h, h, None).unwrap();
            let b = swar(&data, h, h, Some(&weights)).unwrap();
            let ccs = squared_canonical_correlations(&a.basis, &b.basis, data.x()).unwrap();
            for c in ccs {
                if (c - 1.0).abs() > 1e-6 {
                    failures.push(format!(
                        "case {case}: H=K span moved under reweighting (cc {c})"
                    ));
                    break;
                }
            }
        }
    }
    let ok = failures.is_empty();
    let detail = if ok {
        "span property, rank bounds, H=1 = OLS, H=K weight invariance: 100 randomized cases, zero failures".to_string()
    } else {
        failures.join("; ")
    };
    report("criterion 10 (structural invariants)", ok, &detail);
    assert!(ok, "{detail}");
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma).powi(2);
        db += (rb[i] - mb).powi(2);
    }
    num / (da * db).sqrt()
}

#[test]
fn criterion_11_bigmac_end_to_end() {
    let bigmac = format!("{}/../../data/bigmac.csv", env!("CARGO_MANIFEST_DIR"));
    let mut essp_swar = std::env::temp_dir();
    essp_swar.push(format!("swar-acc-{}-swar.csv", std::process::id()));
    let mut essp_ols = std::env::temp_dir();
    essp_ols.push(format!("swar-acc-{}-ols.csv", std::process::id()));

    let run = |method: &str, h: &str, essp: &std::path::Path| {
        std::process::Command::new(env!("CARGO_BIN_EXE_swar"))
            .args([
                "fit",
                "--data",
                &bigmac,
                "--response",
                "BigMac",
                "--method",
                method,
                "--h",
                h,
                "--k",
                "1",
                "--out",
                "/dev/null",
                "--essp",
                essp.to_str().unwrap(),
            ])
            .output()
            .expect("spawn swar")
    };
    let out = run("swar", "2", &essp_swar);
    let exit_ok = out.status.code() == Some(0);
    let out2 = run("ols", "1", &essp_ols);
    let exit2_ok = out2.status.code() == Some(0);

    let parse_scores = |path: &std::path::Path| -> (Vec<f64>, Vec<f64>) {
        let text = std::fs::read_to_string(path).unwrap();
        let mut ys = Vec::new();
        let mut scores = Vec::new();
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            ys.push(fields[1].parse().unwrap());
            scores.push(fields[2].parse().unwrap());
        }
        (ys, scores)
    };
    let (y_swar, s_swar) = parse_scores(&essp_swar);
    let (_, s_ols) = parse_scores(&essp_ols);
    assert_eq!(y_swar.len(), 45);
    let rho_swar = spearman(&s_swar, &y_swar).abs();
    let rho_ols = spearman(&s_ols, &y_swar).abs();
    std::fs::remove_file(&essp_swar).ok();
    std::fs::remove_file(&essp_ols).ok();

    let dominance = rho_swar >= rho_ols;
    let detail = format!(
        "swar fit exits 0: {exit_ok}; |spearman| swar {rho_swar:.4} vs ols {rho_ols:.4} (dominance: {dominance})"
    );
    report("criterion 11 (BigMac end to end)", exit_ok && exit2_ok && dominance, &detail);
    assert!(exit_ok && exit2_ok, "{detail}");
    // Known red: on the 45x9 dataset the two-slice SWAR regressions are
    // nearly saturated (n_h about 2.5p) and the plain SWAR summary plot does
    // not beat the OLS one by rank correlation under any nearby slicing
    // convention; the reweighted variants do.
    assert!(dominance, "rank-correlation dominance does not hold: {detail}");
}
