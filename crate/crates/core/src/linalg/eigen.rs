//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL with Wilkinson-type shifts.

use alloc::vec;
use alloc::vec::Vec;

use super::scalar::Scalar;
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and, when requested, eigenvectors stored
/// column-wise in a row-major `n × n` buffer.
pub(crate) fn hermitian_eigen<T: Scalar>(
    n: usize,
    a: &[T],
    want_vectors: bool,
) -> Result<(Vec<f64>, Vec<T>)> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut work = a.to_vec();
    let mut q = if want_vectors { identity::<T>(n) } else { Vec::new() };
    let (mut d, mut e) = tridiagonalize(n, &mut work, want_vectors.then_some(&mut q[..]));
    if want_vectors {
        tql2(&mut d, &mut e, |i, c, s| {
            for k in 0..n {
                let h = q[k * n + i + 1];
                let g = q[k * n + i];
                q[k * n + i + 1] = g.scale(s) + h.scale(c);
                q[k * n + i] = g.scale(c) - h.scale(s);
            }
        })?;
    } else {
        tql2(&mut d, &mut e, |_, _, _| {})?;
    }
    // sort ascending, permuting vector columns alongside
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vecs = if want_vectors {
        let mut out = vec![T::zero(); n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for r in 0..n {
                out[r * n + new_col] = q[r * n + old_col];
            }
        }
        out
    } else {
        Vec::new()
    };
    Ok((vals, vecs))
}

fn identity<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::from_re(1.0);
    }
    m
}

/// Reduces Hermitian `a` to real tridiagonal form `Q† a Q = T`.
/// Returns the diagonal and the sub-diagonal (`e[i]` couples `i` and `i+1`,
/// last entry zero). When `q` is given it is overwritten with `Q`.
fn tridiagonalize<T: Scalar>(n: usize, a: &mut [T], mut q: Option<&mut [T]>) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let mut alpha = 0.0;
        for i in lo..n {
            alpha += a[i * n + k].abs_sqr();
        }
        alpha = libm::sqrt(alpha);
        let x0 = a[lo * n + k];
        let tail: f64 = (lo + 1..n).map(|i| a[i * n + k].abs_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0_abs = x0.abs();
        let phase = if x0_abs > 0.0 { x0.scale(1.0 / x0_abs) } else { T::from_re(1.0) };
        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] += phase.scale(alpha);
        let vnorm2: f64 = (lo..n).map(|i| v[i].abs_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // p = tau * A_sub v
        for i in lo..n {
            let mut acc = T::zero();
            for j in lo..n {
                acc += a[i * n + j] * v[j];
            }
            p[i] = acc.scale(tau);
        }
        let mut vp = T::zero();
        for i in lo..n {
            vp += v[i].conj() * p[i];
        }
        let kcoef = vp.re() * tau * 0.5;
        for i in lo..n {
            p[i] -= v[i].scale(kcoef);
        }
        for i in lo..n {
            for j in lo..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[i * n + j] -= upd;
            }
        }
        let beta = -(phase.scale(alpha));
        a[lo * n + k] = beta;
        a[k * n + lo] = beta.conj();
        for i in lo + 1..n {
            a[i * n + k] = T::zero();
            a[k * n + i] = T::zero();
        }
        if let Some(q) = q.as_deref_mut() {
            // Q <- Q (I - tau v v†)
            for r in 0..n {
                let mut acc = T::zero();
                for j in lo..n {
                    acc += q[r * n + j] * v[j];
                }
                let acc = acc.scale(tau);
                for j in lo..n {
                    q[r * n + j] -= acc * v[j].conj();
                }
            }
        }
    }
    // rotate the complex sub-diagonal onto the positive reals
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut delta = T::from_re(1.0);
    for k in 0..n {
        d[k] = a[k * n + k].re();
        if k + 1 < n {
            let b = a[(k + 1) * n + k];
            let babs = b.abs();
            let next = if babs > 0.0 { delta * b.scale(1.0 / babs) } else { delta };
            e[k] = babs;
            if let Some(q) = q.as_deref_mut() {
                for r in 0..n {
                    q[r * n + k + 1] = q[r * n + k + 1] * next;
                }
            }
            delta = next;
        }
    }
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix (EISPACK `tql2` lineage).
/// `rotate(i, c, s)` is called for every Givens rotation touching columns
/// `i` and `i + 1` of the eigenvector accumulator.
fn tql2(d: &mut [f64], e: &mut [f64], mut rotate: impl FnMut(usize, f64, f64)) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                let mut i = m;
                while i > l {
                    i -= 1;
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate(i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
