//! Dense eigensolvers.
//!
//! Two routines cover everything the crate needs:
//!
//! * [`symmetric_eigen`] -- Householder tridiagonalization (`tred2`) followed
//!   by implicit-shift QL (`tql2`), with accumulated eigenvectors. This is the
//!   workhorse for the symmetric projection and spline smoothers.
//! * [`general_eigenvalues`] -- balancing, elimination to Hessenberg form and
//!   a Francis double-shift QR sweep returning (possibly complex) eigenvalues
//!   without eigenvectors. Only used for the Nadaraya-Watson spectrum
//!   diagnostic.
//!
//! Both are ports of the classic JAMA/EISPACK routines.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::matrix::Mat;

/// Eigensolver failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EigenError {
    /// The QL/QR iteration did not converge within its sweep budget.
    NoConvergence,
}

impl fmt::Display for EigenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenError::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for EigenError {}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// matrix. Column `k` of the returned matrix pairs with eigenvalue `k`.
/// The input is taken by value; only its lower/upper symmetric content is
/// meaningful.
pub fn symmetric_eigen(a: Mat) -> Result<(Vec<f64>, Mat), EigenError> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    if n == 0 {
        return Ok((Vec::new(), a));
    }
    let mut v = a;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    // Sort descending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(core::cmp::Ordering::Equal));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| v.at(i, order[j]));
    Ok((values, vectors))
}

/// Eigenvalues of a general real square matrix as `(re, im)` pairs, sorted by
/// real part descending (then imaginary part descending).
pub fn general_eigenvalues(a: Mat) -> Result<Vec<(f64, f64)>, EigenError> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "general_eigenvalues needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![(a.at(0, 0), 0.0)]);
    }
    let mut h = a;
    balance(&mut h);
    hessenberg(&mut h);
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    hqr(&mut h, &mut re, &mut im)?;
    let mut out: Vec<(f64, f64)> = re.into_iter().zip(im).collect();
    out.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal))
    });
    Ok(out)
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulated transformations (JAMA `tred2`).
fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows();
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += fmath::abs(*item);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = fmath::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in (j + 1)..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = v.at(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, upd);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v.set(n - 1, i, v.at(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for (k, item) in d.iter_mut().enumerate().take(i + 1) {
                *item = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for (k, item) in d.iter().enumerate().take(i + 1) {
                    let upd = v.at(k, j) - g * item;
                    v.set(k, j, upd);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// eigenvector accumulation (JAMA `tql2`).
fn tql2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), EigenError> {
    let n = v.rows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(fmath::abs(d[l]) + fmath::abs(e[l]));
        let mut m = l;
        while m < n {
            if fmath::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(EigenError::NoConvergence);
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = fmath::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = fmath::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v.at(k, i + 1);
                        v.set(k, i + 1, s * v.at(k, i) + c * h);
                        v.set(k, i, c * v.at(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if fmath::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Balance a general matrix to improve eigenvalue accuracy (EISPACK `balanc`).
fn balance(a: &mut Mat) {
    let radix = 2.0_f64;
    let sqrdx = radix * radix;
    let n = a.rows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += fmath::abs(a.at(j, i));
                    r += fmath::abs(a.at(i, j));
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                let mut c_acc = c;
                while c_acc < g {
                    f *= radix;
                    c_acc *= sqrdx;
                }
                g = r * radix;
                while c_acc > g {
                    f /= radix;
                    c_acc /= sqrdx;
                }
                if (c_acc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        let upd = a.at(i, j) * ginv;
                        a.set(i, j, upd);
                    }
                    for j in 0..n {
                        let upd = a.at(j, i) * f;
                        a.set(j, i, upd);
                    }
                }
            }
        }
    }
}

/// Reduce to upper Hessenberg form by elimination with pivoting
/// (EISPACK `elmhes`). Transformations are not accumulated.
fn hessenberg(a: &mut Mat) {
    let n = a.rows();
    for m in 1..(n - 1) {
        let mut x = 0.0;
        let mut i = m;
        for j in m..n {
            if fmath::abs(a.at(j, m - 1)) > fmath::abs(x) {
                x = a.at(j, m - 1);
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..n {
                let tmp = a.at(i, j);
                a.set(i, j, a.at(m, j));
                a.set(m, j, tmp);
            }
            for j in 0..n {
                let tmp = a.at(j, i);
                a.set(j, i, a.at(j, m));
                a.set(j, m, tmp);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a.at(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    a.set(i, m - 1, y);
                    for j in m..n {
                        let upd = a.at(i, j) - y * a.at(m, j);
                        a.set(i, j, upd);
                    }
                    for j in 0..n {
                        let upd = a.at(j, m) + y * a.at(j, i);
                        a.set(j, m, upd);
                    }
                }
            }
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only
/// (JAMA `hqr2` without the eigenvector phases).
fn hqr(a: &mut Mat, re: &mut [f64], im: &mut [f64]) -> Result<(), EigenError> {
    let n = a.rows();
    let eps = f64::EPSILON;

    let mut anorm = 0.0;
    for i in 0..n {
        let j0 = i.saturating_sub(1);
        for j in j0..n {
            anorm += fmath::abs(a.at(i, j));
        }
    }
    if anorm == 0.0 {
        for i in 0..n {
            re[i] = 0.0;
            im[i] = 0.0;
        }
        return Ok(());
    }

    let mut nn = n - 1;
    let mut t = 0.0;
    let mut total_sweeps = 0usize;
    let sweep_budget = 40 * n;

    'outer: loop {
        let mut its = 0;
        'hunt: loop {
            // Look for a single small subdiagonal element.
            let mut l = nn;
            while l > 0 {
                let mut s = fmath::abs(a.at(l - 1, l - 1)) + fmath::abs(a.at(l, l));
                if s == 0.0 {
                    s = anorm;
                }
                if fmath::abs(a.at(l, l - 1)) <= eps * s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }

            let mut x = a.at(nn, nn);
            if l == nn {
                // One real root found.
                re[nn] = x + t;
                im[nn] = 0.0;
                if nn == 0 {
                    break 'outer;
                }
                nn -= 1;
                break 'hunt;
            } else {
                let mut y = a.at(nn - 1, nn - 1);
                let mut w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
                if l == nn - 1 {
                    // A 2x2 block splits off: two real or a complex pair.
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = fmath::sqrt(fmath::abs(q));
                    x += t;
                    if q >= 0.0 {
                        let z = p + fmath::copysign(z, p);
                        re[nn - 1] = x + z;
                        re[nn] = re[nn - 1];
                        if z != 0.0 {
                            re[nn] = x - w / z;
                        }
                        im[nn - 1] = 0.0;
                        im[nn] = 0.0;
                    } else {
                        re[nn - 1] = x + p;
                        re[nn] = x + p;
                        im[nn - 1] = z;
                        im[nn] = -z;
                    }
                    if nn <= 1 {
                        break 'outer;
                    }
                    nn -= 2;
                    break 'hunt;
                } else {
                    // No root yet; run one double-shift sweep.
                    total_sweeps += 1;
                    if total_sweeps > sweep_budget {
                        return Err(EigenError::NoConvergence);
                    }
                    if its == 30 {
                        return Err(EigenError::NoConvergence);
                    }
                    if its == 10 || its == 20 {
                        // Exceptional shift.
                        t += x;
                        for i in 0..=nn {
                            let upd = a.at(i, i) - x;
                            a.set(i, i, upd);
                        }
                        let s = fmath::abs(a.at(nn, nn - 1)) + fmath::abs(a.at(nn - 1, nn - 2));
                        y = 0.75 * s;
                        x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    its += 1;

                    let mut p;
                    let mut q;
                    let mut r;
                    let mut m = nn - 2;
                    loop {
                        let z = a.at(m, m);
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / a.at(m + 1, m) + a.at(m, m + 1);
                        q = a.at(m + 1, m + 1) - z - rr - ss;
                        r = a.at(m + 2, m + 1);
                        let s = fmath::abs(p) + fmath::abs(q) + fmath::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = fmath::abs(a.at(m, m - 1)) * (fmath::abs(q) + fmath::abs(r));
                        let v = fmath::abs(p)
                            * (fmath::abs(a.at(m - 1, m - 1))
                                + fmath::abs(z)
                                + fmath::abs(a.at(m + 1, m + 1)));
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a.set(i, i - 2, 0.0);
                        if i > m + 2 {
                            a.set(i, i - 3, 0.0);
                        }
                    }
                    for k in m..nn {
                        if k != m {
                            p = a.at(k, k - 1);
                            q = a.at(k + 1, k - 1);
                            r = 0.0;
                            if k + 1 != nn {
                                r = a.at(k + 2, k - 1);
                            }
                            x = fmath::abs(p) + fmath::abs(q) + fmath::abs(r);
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = fmath::copysign(fmath::sqrt(p * p + q * q + r * r), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a.set(k, k - 1, -a.at(k, k - 1));
                                }
                            } else {
                                a.set(k, k - 1, -s * x);
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            let z = r / s;
                            q /= p;
                            r /= p;
                            // Row modification.
                            for j in k..n {
                                p = a.at(k, j) + q * a.at(k + 1, j);
                                if k + 1 != nn {
                                    p += r * a.at(k + 2, j);
                                    let upd = a.at(k + 2, j) - p * z;
                                    a.set(k + 2, j, upd);
                                }
                                let upd1 = a.at(k + 1, j) - p * y;
                                a.set(k + 1, j, upd1);
                                let upd0 = a.at(k, j) - p * x;
                                a.set(k, j, upd0);
                            }
                            // Column modification.
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in 0..=mmin {
                                p = x * a.at(i, k) + y * a.at(i, k + 1);
                                if k + 1 != nn {
                                    p += z * a.at(i, k + 2);
                                    let upd = a.at(i, k + 2) - p * r;
                                    a.set(i, k + 2, upd);
                                }
                                let upd1 = a.at(i, k + 1) - p * q;
                                a.set(i, k + 1, upd1);
                                let upd0 = a.at(i, k) - p;
                                a.set(i, k, upd0);
                            }
                        }
                    }
                    // Sweep done; hunt again for a small subdiagonal element.
                }
            }
        }
    }
    Ok(())
}
