//! Adversarial eigensolver checks against constructions with known spectra.
//!
//! Matrices are built as `P T P^T` where `P` is a product of Householder
//! reflectors (exactly orthogonal up to rounding) and `T` is block upper
//! triangular with prescribed real eigenvalues and complex-pair blocks, so
//! the expected spectrum is known in advance.

use kboost_core::eigen::{general_eigenvalues, symmetric_eigen};
use kboost_core::{CounterRng, Mat};

/// Product of `k` random Householder reflectors.
fn random_orthogonal(n: usize, k: usize, rng: &mut CounterRng) -> Mat {
    let mut p = Mat::identity(n);
    for _ in 0..k {
        let v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        // p <- p (I - 2 v v^T / ||v||^2)
        let mut next = p.clone();
        for i in 0..n {
            let row = p.row(i);
            let dot: f64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            let scale = 2.0 * dot / norm_sq;
            let out = next.row_mut(i);
            for j in 0..n {
                out[j] = row[j] - scale * v[j];
            }
        }
        p = next;
    }
    p
}

fn conjugate(t: &Mat, p: &Mat) -> Mat {
    p.matmul(t).matmul(&p.transpose())
}

#[test]
fn symmetric_solver_handles_clustered_spectra() {
    let mut rng = CounterRng::new(51);
    // heavy multiplicities and near-degenerate pairs
    let spectra: Vec<Vec<f64>> = vec![
        vec![1.0; 12],
        vec![0.5, 0.5, 0.5, 0.5, 0.5 + 1e-13, 0.25, 0.0, 0.0, 0.0, -0.75],
        (0..30).map(|k| 1.0 - k as f64 * 1e-9).collect(),
        vec![1e8, 1.0, 1e-8, 0.0, -1e-8, -1.0, -1e8],
    ];
    for eigs in spectra {
        let n = eigs.len();
        let p = random_orthogonal(n, 4, &mut rng);
        let mut t = Mat::zeros(n, n);
        for (i, &l) in eigs.iter().enumerate() {
            t.set(i, i, l);
        }
        let mut a = conjugate(&t, &p);
        a.symmetrize();
        let (got, vectors) = symmetric_eigen(a.clone()).unwrap();
        let mut want = eigs.clone();
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let scale = want[0].abs().max(want[n - 1].abs()).max(1.0);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-9 * scale, "{g} vs {w}");
        }
        // eigenvectors stay orthonormal even with repeated eigenvalues
        let vtv = vectors.transpose().matmul(&vectors);
        assert!(vtv.max_abs_diff(&Mat::identity(n)) < 1e-9);
    }
}

#[test]
fn symmetric_solver_scales_to_moderate_n() {
    let mut rng = CounterRng::new(52);
    let n = 200;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.uniform(-1.0, 1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let (values, vectors) = symmetric_eigen(a.clone()).unwrap();
    // reconstruction
    let mut scaled = vectors.clone();
    for i in 0..n {
        for k in 0..n {
            let v = scaled.at(i, k) * values[k];
            scaled.set(i, k, v);
        }
    }
    let rebuilt = scaled.matmul(&vectors.transpose());
    assert!(rebuilt.max_abs_diff(&a) < 1e-9);
}

#[test]
fn general_solver_recovers_prescribed_complex_pairs() {
    let mut rng = CounterRng::new(53);
    // real Schur-form blocks: real eigenvalues and (re, im) rotation blocks
    let reals = [1.5, 0.25, -0.75];
    let pairs = [(0.5, 0.8), (-0.25, 0.1)];
    let n = reals.len() + 2 * pairs.len();
    let mut t = Mat::zeros(n, n);
    for (i, &r) in reals.iter().enumerate() {
        t.set(i, i, r);
    }
    for (k, &(re, im)) in pairs.iter().enumerate() {
        let i = reals.len() + 2 * k;
        t.set(i, i, re);
        t.set(i, i + 1, im);
        t.set(i + 1, i, -im);
        t.set(i + 1, i + 1, re);
    }
    // some upper-triangular coupling above the blocks
    t.set(0, 4, 0.3);
    t.set(1, 5, -0.2);
    t.set(2, 6, 0.15);

    let p = random_orthogonal(n, 3, &mut rng);
    let a = conjugate(&t, &p);
    let got = general_eigenvalues(a).unwrap();

    let mut want: Vec<(f64, f64)> = reals.iter().map(|&r| (r, 0.0)).collect();
    for &(re, im) in &pairs {
        want.push((re, im));
        want.push((re, -im));
    }
    want.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(b.1.partial_cmp(&a.1).unwrap())
    });
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want.iter()) {
        assert!(
            (g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10,
            "got {g:?}, want {w:?}"
        );
    }
}

#[test]
fn general_solver_handles_defective_jordan_block() {
    // J(0.5) of size 4: eigenvalue 0.5 with algebraic multiplicity 4 and a
    // single Jordan chain. Accuracy degrades like eps^(1/4) for defective
    // eigenvalues, so only cluster-level agreement is expected.
    let n = 4;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a.set(i, i, 0.5);
        if i + 1 < n {
            a.set(i, i + 1, 1.0);
        }
    }
    let got = general_eigenvalues(a).unwrap();
    for v in &got {
        let dist = ((v.0 - 0.5).powi(2) + v.1.powi(2)).sqrt();
        assert!(dist < 1e-3, "eigenvalue {v:?} too far from the Jordan value");
    }
    // the cluster mean is far more accurate than the individuals
    let mean_re = got.iter().map(|v| v.0).sum::<f64>() / n as f64;
    let mean_im = got.iter().map(|v| v.1).sum::<f64>() / n as f64;
    assert!((mean_re - 0.5).abs() < 1e-12);
    assert!(mean_im.abs() < 1e-12);
}

#[test]
fn general_solver_tiny_sizes() {
    // 1x1 and 2x2 paths
    let mut a1 = Mat::zeros(1, 1);
    a1.set(0, 0, -3.25);
    assert_eq!(general_eigenvalues(a1).unwrap(), vec![(-3.25, 0.0)]);

    let mut a2 = Mat::zeros(2, 2);
    a2.set(0, 0, 0.0);
    a2.set(0, 1, 1.0);
    a2.set(1, 0, -1.0);
    a2.set(1, 1, 0.0);
    let got = general_eigenvalues(a2).unwrap();
    assert!((got[0].0).abs() < 1e-14 && (got[0].1 - 1.0).abs() < 1e-14);
    assert!((got[1].0).abs() < 1e-14 && (got[1].1 + 1.0).abs() < 1e-14);
}

#[test]
fn stochastic_matrix_spectrum_lies_in_unit_disc() {
    // row-stochastic random matrices: top eigenvalue exactly 1, the rest
    // strictly inside the unit disc
    let mut rng = CounterRng::new(54);
    for n in [5usize, 17, 40] {
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let v = rng.next_f64() + 0.05;
                a.set(i, j, v);
                s += v;
            }
            for j in 0..n {
                let v = a.at(i, j) / s;
                a.set(i, j, v);
            }
        }
        let got = general_eigenvalues(a).unwrap();
        assert!((got[0].0 - 1.0).abs() < 1e-10, "Perron root {:?}", got[0]);
        for v in &got {
            let modulus = (v.0 * v.0 + v.1 * v.1).sqrt();
            assert!(modulus <= 1.0 + 1e-10);
        }
    }
}
