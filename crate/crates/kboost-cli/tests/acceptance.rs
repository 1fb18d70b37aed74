//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N: PASS/SKIP` line with its runtime (visible under
//! `--nocapture`; the harness itself reports pass/fail per criterion).
//!
//! Reference statistics come from the published simulation study this
//! implementation reproduces; tolerance bands are three reference standard
//! deviations unless stated otherwise.

use std::path::PathBuf;
use std::time::Instant;

use kboost_cli::experiments::{
    self, Method, MethodKind, RealOptions, StudyOptions,
};
use kboost_core::{
    approximation_error, boosting_operator, build_nw_smoother, build_projection_smoother,
    eigendecompose, l2_boost, nonsymmetric_spectrum, robust_boost, robust_scale, simulate,
    CounterRng, Dataset, ErrorLaw, KernelKind, KernelSpec, PolyOrder, RobustSpec,
    SimulationModel, Smoother,
};

fn sim_design(n: usize, seed: u64) -> Dataset {
    let mut rng = CounterRng::new(seed);
    simulate(SimulationModel::M1, ErrorLaw::Normal, n, &mut rng).data
}

fn report(criterion: u32, what: &str, started: Instant) {
    println!(
        "criterion {criterion}: PASS ({:.1}s) - {what}",
        started.elapsed().as_secs_f64()
    );
}

/// 1. Smoother invariant suite: row/column sums, exact symmetry and the
/// unit-interval spectrum across n, h, kernel and order.
#[test]
fn criterion_01_smoother_invariants() {
    let started = Instant::now();
    for &n in &[20usize, 50, 100] {
        let data = sim_design(n, 7000 + n as u64);
        let grid = data.grid(200).unwrap();
        for kernel in [KernelKind::Epanechnikov, KernelKind::Gaussian] {
            for &h in &[0.1, 0.2, 0.4, 0.6, 0.8, 1.0] {
                for order in [PolyOrder::Constant, PolyOrder::Linear] {
                    let spec = KernelSpec::new(kernel, h).unwrap();
                    let s = build_projection_smoother(&data, &spec, order, &grid).unwrap();
                    let w = s.weights();
                    let label = format!("n={n} {kernel} h={h} {order:?}");
                    assert_eq!(w.max_asymmetry(), 0.0, "{label}: asymmetric");
                    for i in 0..n {
                        let rs: f64 = w.row(i).iter().sum();
                        assert!((rs - 1.0).abs() < 1e-8, "{label}: row {i} sums to {rs}");
                        let cs: f64 = (0..n).map(|r| w.at(r, i)).sum();
                        assert!((cs - 1.0).abs() < 1e-8, "{label}: col {i} sums to {cs}");
                    }
                    let dec = eigendecompose(&s).unwrap();
                    let max = dec.eigenvalues()[0];
                    let min = *dec.eigenvalues().last().unwrap();
                    assert!(
                        (-1e-8..=1.0 + 1e-8).contains(&min) && max <= 1.0 + 1e-8,
                        "{label}: spectrum [{min}, {max}]"
                    );
                }
            }
        }
    }
    report(1, "smoother invariants over 72 configurations", started);
}

/// 2. Eigenvalue contrast on the n = 20 design: NW/Epanechnikov goes
/// negative for some bandwidth; NW/Gaussian and both projection smoothers
/// stay in the unit interval.
#[test]
fn criterion_02_figure1_contrast() {
    let started = Instant::now();
    let data = sim_design(20, 2024);
    let grid = data.grid(200).unwrap();
    let bandwidths = [0.2, 0.4, 0.6, 0.8, 1.0];

    let mut saw_negative = false;
    for &h in &bandwidths {
        let spec = KernelSpec::new(KernelKind::Epanechnikov, h).unwrap();
        let s = build_nw_smoother(&data, &spec).unwrap();
        if nonsymmetric_spectrum(&s)
            .unwrap()
            .iter()
            .any(|v| v.re < -1e-8)
        {
            saw_negative = true;
        }
    }
    assert!(saw_negative, "NW/Epanechnikov never produced a negative eigenvalue");

    for &h in &bandwidths {
        let spec = KernelSpec::new(KernelKind::Gaussian, h).unwrap();
        let s = build_nw_smoother(&data, &spec).unwrap();
        for v in nonsymmetric_spectrum(&s).unwrap() {
            assert!(
                v.re >= -1e-8 && v.re <= 1.0 + 1e-8,
                "NW/Gaussian h={h}: eigenvalue {v:?}"
            );
        }
        for kernel in [KernelKind::Epanechnikov, KernelKind::Gaussian] {
            for order in [PolyOrder::Constant, PolyOrder::Linear] {
                let kspec = KernelSpec::new(kernel, h).unwrap();
                let s = build_projection_smoother(&data, &kspec, order, &grid).unwrap();
                let dec = eigendecompose(&s).unwrap();
                assert!(dec.eigenvalues()[0] <= 1.0 + 1e-8);
                assert!(*dec.eigenvalues().last().unwrap() >= -1e-8);
            }
        }
    }
    report(2, "NW spectrum contrast vs projection smoothers", started);
}

/// 3. Iterative boosting equals the spectral closed form within 1e-9 over
/// 20 seeded responses.
#[test]
fn criterion_03_boosting_operator_equivalence() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for &n in &[20usize, 50] {
        let data = sim_design(n, 300 + n as u64);
        let grid = data.grid(200).unwrap();
        let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.4).unwrap();
        let s = build_projection_smoother(&data, &spec, PolyOrder::Constant, &grid).unwrap();
        let dec = eigendecompose(&s).unwrap();
        let mut rng = CounterRng::new(31337);
        for _ in 0..10 {
            let y: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let trajectory = l2_boost(&s, &y, 25).unwrap();
            for &b in &[1usize, 5, 25] {
                let closed = boosting_operator(&dec, b, n).unwrap().smooth(&y);
                for (a, c) in closed.iter().zip(trajectory.fit_at(b).unwrap()) {
                    worst = worst.max((a - c).abs());
                }
            }
        }
    }
    assert!(worst < 1e-9, "max |iterative - spectral| = {worst}");
    report(
        3,
        &format!("iterative vs closed form, max diff {worst:.2e}"),
        started,
    );
}

/// 4. Low-rank diagnostics: approximation error monotone in d, zero at
/// d = n, matching a dense Frobenius oracle within 1e-9; eigenvalue tail
/// below 0.05 past k = 3 ceil(1/h).
#[test]
fn criterion_04_theorem1_properties() {
    let started = Instant::now();
    let data = sim_design(40, 404);
    let grid = data.grid(200).unwrap();
    let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.3).unwrap();
    let s = build_projection_smoother(&data, &spec, PolyOrder::Constant, &grid).unwrap();
    let dec = eigendecompose(&s).unwrap();
    let n = 40;
    for &b in &[0usize, 3, 11] {
        let full = boosting_operator(&dec, b, n).unwrap().to_dense();
        let mut prev = f64::INFINITY;
        for d in 0..=n {
            let got = approximation_error(&dec, b, d).unwrap();
            assert!(got <= prev + 1e-12, "b={b}: not monotone at d={d}");
            prev = got;
            let dense = if d == 0 {
                full.frobenius_norm_sq()
            } else {
                let trunc = boosting_operator(&dec, b, d).unwrap().to_dense();
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let diff = full.at(i, j) - trunc.at(i, j);
                        acc += diff * diff;
                    }
                }
                acc
            };
            assert!(
                (got - dense).abs() < 1e-9,
                "b={b} d={d}: spectral {got} vs dense {dense}"
            );
        }
        assert_eq!(approximation_error(&dec, b, n).unwrap(), 0.0);
    }

    // eigenvalue tail on the n = 100 uniform design at h = 0.1
    let m = 100;
    let x: Vec<f64> = (0..m).map(|i| -0.5 + (i as f64 + 0.5) / m as f64).collect();
    let tail_data = Dataset::with_support(x, vec![0.0; m], -0.5, 0.5).unwrap();
    let tail_grid = tail_data.grid(200).unwrap();
    let tail_spec = KernelSpec::new(KernelKind::Epanechnikov, 0.1).unwrap();
    let ts = build_projection_smoother(&tail_data, &tail_spec, PolyOrder::Constant, &tail_grid)
        .unwrap();
    let tdec = eigendecompose(&ts).unwrap();
    let cutoff = 3 * (1.0_f64 / 0.1).ceil() as usize;
    for (k, &l) in tdec.eigenvalues().iter().enumerate().skip(cutoff) {
        assert!(l < 0.05, "eigenvalue {k} = {l} above tail bound");
    }
    report(4, "approximation error + eigenvalue tail", started);
}

/// 5. Desk-scale reproduction of the out-of-sample benchmark: M1,
/// local-constant projection smoother with the Epanechnikov kernel,
/// 100 replicates x 3 repeats, means inside the reference +-3 sd bands
/// (0.1117 +- 0.135 at n = 100; 0.0691 +- 0.069 at n = 200).
#[test]
fn criterion_05_benchmark_reproduction() {
    let started = Instant::now();
    let opts = StudyOptions::desk(17);
    let methods = [Method::new(MethodKind::Lc, KernelKind::Epanechnikov)];
    let rep = experiments::run_benchmark(
        SimulationModel::M1,
        ErrorLaw::Normal,
        &methods,
        &[100, 200],
        &opts,
    )
    .unwrap();
    let bands = [(100usize, 0.1117, 0.135), (200usize, 0.0691, 0.069)];
    for (n, center, half_width) in bands {
        let cell = rep.cells.iter().find(|c| c.n == n).unwrap();
        assert!(
            (cell.mean - center).abs() <= half_width,
            "n={n}: mean {} outside {center} +- {half_width}",
            cell.mean
        );
        println!("  n={n}: mean MSE(T) = {:.4} (reference {center})", cell.mean);
    }
    report(5, "benchmark means inside reference bands", started);
}

fn lowrank_cell(rep: &experiments::BenchmarkReport, n: usize, rank: Option<usize>) -> f64 {
    rep.cells
        .iter()
        .find(|c| c.n == n && c.rank == rank)
        .unwrap_or_else(|| panic!("missing cell n={n} rank={rank:?}"))
        .mean
}

/// 6a. Low-rank study, n = 100: the rank-10 truncation matches the
/// full-rank smoother within 0.01.
#[test]
fn criterion_06a_lowrank_rank10_matches_full_rank() {
    let started = Instant::now();
    let opts = StudyOptions::desk(17);
    let rep = experiments::run_lowrank_study(
        SimulationModel::M1,
        ErrorLaw::Normal,
        KernelKind::Epanechnikov,
        &[(100, 100)],
        &[2, 5, 10, 15],
        &opts,
    )
    .unwrap();
    let d10 = lowrank_cell(&rep, 100, Some(10));
    let full = lowrank_cell(&rep, 100, None);
    println!("  n=100: |d=10 - d=n| = {:.2e}", (d10 - full).abs());
    assert!(
        (d10 - full).abs() < 0.01,
        "n=100: |rank-10 mean {d10} - full-rank mean {full}| >= 0.01"
    );
    report(6, "rank-10 matches full rank at n = 100", started);
}

/// 6b. Low-rank study, n = 500 (50 replicates): the reference reports the
/// rank-2 smoother beating full rank; asserted here exactly as stated.
///
/// This assertion does not reproduce and fails by design rather than being
/// weakened. The top-2 eigenpairs of the local-constant smoother span a
/// constant plus one smooth odd mode, whose best approximation of
/// m(x) = 0.8x + sin(6x) leaves a squared bias of about 0.04-0.09 under
/// every tuning we measured, while tuned full-rank boosting reaches about
/// 0.02 -- so a rank-2 mean below the full-rank mean sits under a
/// projection-dimension lower bound. The companion table for the second
/// simulation model in the same reference shows rank 2 losing to full rank
/// in this position, consistent with what this implementation measures.
#[test]
fn criterion_06b_lowrank_rank2_beats_full_rank_at_n500() {
    let started = Instant::now();
    let opts = StudyOptions::desk(17);
    let rep = experiments::run_lowrank_study(
        SimulationModel::M1,
        ErrorLaw::Normal,
        KernelKind::Epanechnikov,
        &[(500, 50)],
        &[2, 5, 10, 15],
        &opts,
    )
    .unwrap();
    let d2 = lowrank_cell(&rep, 500, Some(2));
    let full = lowrank_cell(&rep, 500, None);
    println!("  n=500: d=2 mean = {d2:.4}, full-rank mean = {full:.4}");
    assert!(
        d2 < full,
        "n=500: rank-2 mean {d2} not below full-rank mean {full} \
         (known non-reproducible reference claim; see test doc comment)"
    );
    report(6, "rank-2 beats full rank at n = 500", started);
}

/// 7. Robustness ordering under t(3) errors at c = 1: the robust mean beats
/// the non-robust mean on paired seeds at both sample sizes, and robust
/// means stay inside the reference bands (0.1028 +- 0.243; 0.0428 +- 0.072).
#[test]
fn criterion_07_robustness_ordering() {
    let started = Instant::now();
    let opts = StudyOptions::desk(17);
    let methods = [Method::new(MethodKind::Lc, KernelKind::Epanechnikov)];
    let rep =
        experiments::run_robust_study(SimulationModel::M1, &methods, &[100, 200], &[1.0], &opts)
            .unwrap();
    let bands = [(100usize, 0.1028, 0.243), (200usize, 0.0428, 0.072)];
    for (n, center, half_width) in bands {
        let robust = rep
            .cells
            .iter()
            .find(|c| c.n == n && c.c == Some(1.0))
            .unwrap();
        let plain = rep.cells.iter().find(|c| c.n == n && c.c.is_none()).unwrap();
        println!(
            "  n={n}: robust {:.4} vs non-robust {:.4} (reference {center})",
            robust.mean, plain.mean
        );
        assert!(
            robust.mean < plain.mean,
            "n={n}: robust {} not below non-robust {}",
            robust.mean,
            plain.mean
        );
        assert!(
            (robust.mean - center).abs() <= half_width,
            "n={n}: robust mean {} outside {center} +- {half_width}",
            robust.mean
        );
    }
    report(7, "robust beats non-robust inside reference bands", started);
}

/// 8. Robust degeneracy: a cutoff of 1e6 makes robustified boosting match
/// plain L2 boosting within 1e-8 across 10 seeded datasets.
#[test]
fn criterion_08_robust_degeneracy() {
    let started = Instant::now();
    let spec = RobustSpec::new(1e6).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let data = sim_design(50, 880 + seed);
        let grid = data.grid(200).unwrap();
        let kspec = KernelSpec::new(KernelKind::Epanechnikov, 0.4).unwrap();
        let s = build_projection_smoother(&data, &kspec, PolyOrder::Constant, &grid).unwrap();
        let robust = robust_boost(&s, data.y(), &spec, 20).unwrap();
        let plain = l2_boost(&s, data.y(), 20).unwrap();
        for b in 0..=20 {
            for (a, c) in robust
                .fit_at(b)
                .unwrap()
                .iter()
                .zip(plain.fit_at(b).unwrap())
            {
                worst = worst.max((a - c).abs());
            }
        }
    }
    assert!(worst < 1e-8, "max robust/L2 gap {worst}");
    report(
        8,
        &format!("c = 1e6 degeneracy, max gap {worst:.2e}"),
        started,
    );
}

fn cps71_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("KBOOST_CPS71_DATA") {
        let path = PathBuf::from(p);
        if path.exists() {
            return Some(path);
        }
    }
    let workspace = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cps71.csv");
    if workspace.exists() {
        return Some(workspace);
    }
    None
}

/// 9. Real-data spot check (needs a user-supplied `age,logwage` CSV at
/// `data/cps71.csv` or `$KBOOST_CPS71_DATA`): the robust NW fit at
/// (h = 5.76, b = 19, c = 0.8638) has full-data MSE within 0.2662 +- 0.01
/// and the pilot scale is within 0.64 +- 0.05.
#[test]
fn criterion_09_real_data_spot_check() {
    let started = Instant::now();
    let Some(path) = cps71_path() else {
        println!(
            "criterion 9: SKIP - wage dataset not present (set KBOOST_CPS71_DATA or add data/cps71.csv)"
        );
        return;
    };
    let data = kboost_cli::io::load_dataset(&path, Some(("age", "logwage")), None).unwrap();

    let ropts = RealOptions::desk(17);
    let (sigma, _pilot_h) = experiments::pilot_scale(&data, &ropts).unwrap();
    println!("  pilot sigma_hat = {sigma:.4} (reference 0.64)");
    assert!(
        (sigma - 0.64).abs() <= 0.05,
        "pilot scale {sigma} outside 0.64 +- 0.05"
    );

    let (_fit, mse) = experiments::fit_real_at(
        &data,
        MethodKind::Nw,
        KernelKind::Epanechnikov,
        5.76,
        19,
        Some(0.8638),
        200,
    )
    .unwrap();
    println!("  robust NW MSE at fixed parameters = {mse:.4} (reference 0.2662)");
    assert!(
        (mse - 0.2662).abs() <= 0.01,
        "robust NW MSE {mse} outside 0.2662 +- 0.01"
    );

    let (_fit, mse_ll) = experiments::fit_real_at(
        &data,
        MethodKind::Ll,
        KernelKind::Epanechnikov,
        15.0,
        79,
        None,
        200,
    )
    .unwrap();
    println!("  plain LL MSE at fixed parameters = {mse_ll:.4} (reference 0.3028)");
    assert!(
        (mse_ll - 0.3028).abs() <= 0.01,
        "local-linear MSE {mse_ll} outside 0.3028 +- 0.01"
    );
    report(9, "real-data spot check", started);
}

/// 10. Determinism: the robust study produces byte-identical files across
/// reruns and across worker counts.
#[test]
fn criterion_10_determinism() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_kboost");
    let base = std::env::temp_dir().join("kboost_acceptance_determinism");
    let _ = std::fs::remove_dir_all(&base);
    let run = |out: &str, jobs: &str| {
        let out_dir = base.join(out);
        let status = std::process::Command::new(bin)
            .args([
                "bench",
                "--study",
                "robust",
                "--seed",
                "7",
                "--n-list",
                "100",
                "--replicates",
                "20",
                "--repeats",
                "2",
                "--c-list",
                "1.0",
                "--jobs",
                jobs,
                "--out-dir",
            ])
            .arg(&out_dir)
            .status()
            .expect("bench run");
        assert!(status.success(), "bench exited with {status}");
        out_dir
    };
    let a = run("a", "1");
    let b = run("b", "2");
    for file in ["table5.csv", "metadata.json"] {
        let bytes_a = std::fs::read(a.join(file)).unwrap();
        let bytes_b = std::fs::read(b.join(file)).unwrap();
        assert_eq!(
            bytes_a, bytes_b,
            "{file} differs between jobs=1 and jobs=2 runs"
        );
    }
    let _ = std::fs::remove_dir_all(&base);
    report(10, "byte-identical reports across worker counts", started);
}
