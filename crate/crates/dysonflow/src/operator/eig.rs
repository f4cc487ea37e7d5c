//! Eigenvalue solvers.
//!
//! Two paths, chosen by the caller:
//!
//! * Hermitian: unitary Householder reduction to a real symmetric tridiagonal
//!   matrix, then implicit QL with Wilkinson shifts. Returns real
//!   eigenvalues, ascending.
//! * General complex: Householder reduction to upper Hessenberg form, then
//!   explicit single-shift QR with Givens rotations and deflation. Returns
//!   unordered complex eigenvalues.
//!
//! Both are classic dense algorithms (EISPACK lineage), kept dependency-free
//! so results are reproducible bit-for-bit across platforms.

use num_complex::Complex64;

use super::OperatorMatrix;
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 50;
const MAX_QR_ITERS_PER_EIGENVALUE: usize = 40;

/// Eigenvalues of a Hermitian matrix, ascending. The caller is responsible
/// for passing an (at least numerically) Hermitian matrix; feed it through
/// `hermitian_part` first when in doubt.
pub(crate) fn hermitian_eigenvalues(a: &OperatorMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut m = a.entries().to_vec();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];

    // Householder tridiagonalization. After step k, column k holds
    // (d_k, alpha, 0, ...) with |alpha| recorded in e[k]; a diagonal unitary
    // similarity making the off-diagonals real is implicit (it does not move
    // eigenvalues).
    for k in 0..n.saturating_sub(2) {
        let tail = k + 1;
        let norm_sq: f64 = (tail..n).map(|i| m[i * n + k].norm_sqr()).sum();
        if norm_sq == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let norm_x = norm_sq.sqrt();
        let x0 = m[tail * n + k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;

        // v = (x - alpha e1) / ‖·‖; the sign choice above makes the leading
        // entry |x0| + ‖x‖, so no cancellation.
        let mut v = vec![Complex64::new(0.0, 0.0); n - tail];
        v[0] = x0 - alpha;
        for i in (tail + 1)..n {
            v[i - tail] = m[i * n + k];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vnorm;
        }

        // Hermitian update of the trailing block B <- B - v w† - w v† with
        // p = B v, beta = v† p (real), w = 2 (p - beta v).
        let sub = n - tail;
        let mut p = vec![Complex64::new(0.0, 0.0); sub];
        for i in 0..sub {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..sub {
                acc += m[(tail + i) * n + (tail + j)] * v[j];
            }
            p[i] = acc;
        }
        let beta: f64 = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * pi).re).sum();
        let w: Vec<Complex64> = p
            .iter()
            .zip(&v)
            .map(|(pi, vi)| 2.0 * (pi - beta * vi))
            .collect();
        for i in 0..sub {
            for j in 0..sub {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                m[(tail + i) * n + (tail + j)] -= delta;
            }
        }

        // Record the transformed column k.
        m[tail * n + k] = alpha;
        for i in (tail + 1)..n {
            m[i * n + k] = Complex64::new(0.0, 0.0);
        }
        e[k] = norm_x;
    }
    if n >= 2 {
        e[n - 2] = m[(n - 1) * n + (n - 2)].norm();
    }
    for i in 0..n {
        d[i] = m[i * n + i].re;
    }

    tridiagonal_eigenvalues(&mut d, &mut e)?;
    Ok(d)
}

/// Implicit QL with shifts on a real symmetric tridiagonal matrix.
/// `e[i]` couples rows `i` and `i+1`; `e[n-1]` is scratch.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut sweeps = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence {
                    iterations: MAX_QL_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(())
}

/// Eigenvalues of a general complex matrix, unordered.
pub(crate) fn general_eigenvalues(a: &OperatorMatrix) -> Result<Vec<Complex64>> {
    if !a.all_finite() {
        return Err(Error::NonFinite {
            context: "eigensolver input",
        });
    }
    let n = a.dim();
    let mut m = a.entries().to_vec();
    hessenberg(&mut m, n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut eigenvalues = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iters_here = 0usize;

    loop {
        // Hunt for a negligible subdiagonal entry above `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = m[lo * n + (lo - 1)].norm();
            let mut local = m[(lo - 1) * n + (lo - 1)].norm() + m[lo * n + lo].norm();
            if local == 0.0 {
                local = scale;
            }
            if sub <= f64::EPSILON * local {
                m[lo * n + (lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            eigenvalues[hi] = m[hi * n + hi];
            if hi == 0 {
                break;
            }
            hi -= 1;
            iters_here = 0;
            continue;
        }
        if lo == hi - 1 {
            let (l1, l2) = eig2x2(
                m[lo * n + lo],
                m[lo * n + hi],
                m[hi * n + lo],
                m[hi * n + hi],
            );
            eigenvalues[lo] = l1;
            eigenvalues[hi] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iters_here = 0;
            continue;
        }

        iters_here += 1;
        if iters_here > MAX_QR_ITERS_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                iterations: MAX_QR_ITERS_PER_EIGENVALUE,
            });
        }

        // Wilkinson shift from the trailing 2x2 block, with an occasional
        // exceptional shift to break symmetry-induced stalls.
        let shift = if iters_here.is_multiple_of(10) {
            let mut s = m[hi * n + (hi - 1)].norm();
            if hi >= 2 {
                s += m[(hi - 1) * n + (hi - 2)].norm();
            }
            Complex64::new(s, 0.0)
        } else {
            let (l1, l2) = eig2x2(
                m[(hi - 1) * n + (hi - 1)],
                m[(hi - 1) * n + hi],
                m[hi * n + (hi - 1)],
                m[hi * n + hi],
            );
            let target = m[hi * n + hi];
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        qr_sweep(&mut m, n, lo, hi, shift);
    }

    Ok(eigenvalues)
}

/// One explicit shifted QR step on the active Hessenberg window `lo..=hi`.
fn qr_sweep(m: &mut [Complex64], n: usize, lo: usize, hi: usize, shift: Complex64) {
    for k in lo..=hi {
        m[k * n + k] -= shift;
    }

    // Left Givens sweep: rows (k, k+1), columns k..=hi. G has rows
    // (ga, gb) and (-conj(gb), conj(ga)) with ga = conj(a)/r, gb = conj(b)/r.
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = m[k * n + k];
        let b = m[(k + 1) * n + k];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (ga, gb) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (a.conj() / r, b.conj() / r)
        };
        for j in k..=hi {
            let t1 = m[k * n + j];
            let t2 = m[(k + 1) * n + j];
            m[k * n + j] = ga * t1 + gb * t2;
            m[(k + 1) * n + j] = -gb.conj() * t1 + ga.conj() * t2;
        }
        rotations.push((ga, gb));
    }

    // Right sweep: multiply by each G† on columns (k, k+1), restoring
    // Hessenberg form.
    for (offset, &(ga, gb)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last_row = (k + 2).min(hi);
        for row in lo..=last_row {
            let t1 = m[row * n + k];
            let t2 = m[row * n + (k + 1)];
            m[row * n + k] = t1 * ga.conj() + t2 * gb.conj();
            m[row * n + (k + 1)] = -t1 * gb + t2 * ga;
        }
    }

    for k in lo..=hi {
        m[k * n + k] += shift;
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(m: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let tail = k + 1;
        let norm_sq: f64 = (tail..n).map(|i| m[i * n + k].norm_sqr()).sum();
        if norm_sq == 0.0 {
            continue;
        }
        let norm_x = norm_sq.sqrt();
        let x0 = m[tail * n + k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;

        let mut v = vec![Complex64::new(0.0, 0.0); n - tail];
        v[0] = x0 - alpha;
        for i in (tail + 1)..n {
            v[i - tail] = m[i * n + k];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vnorm;
        }

        // Rows tail..n, columns k+1..n: M <- (I - 2vv†) M.
        for j in tail..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..(n - tail) {
                s += v[i].conj() * m[(tail + i) * n + j];
            }
            let s2 = 2.0 * s;
            for i in 0..(n - tail) {
                m[(tail + i) * n + j] -= s2 * v[i];
            }
        }
        // All rows, columns tail..n: M <- M (I - 2vv†).
        for row in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..(n - tail) {
                s += m[row * n + (tail + j)] * v[j];
            }
            let s2 = 2.0 * s;
            for j in 0..(n - tail) {
                m[row * n + (tail + j)] -= s2 * v[j].conj();
            }
        }
        // Column k now reduces to (…, alpha, 0, …) exactly.
        m[tail * n + k] = alpha;
        for i in (tail + 1)..n {
            m[i * n + k] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Eigenvalues of a complex 2x2 matrix [[a, b], [c, d]].
fn eig2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    // Pick the sign that avoids cancellation in tr ± disc.
    let s = if (tr.conj() * disc).re >= 0.0 {
        disc
    } else {
        -disc
    };
    let l1 = 0.5 * (tr + s);
    let l2 = if l1.norm() > 0.0 {
        det / l1
    } else {
        0.5 * (tr - s)
    };
    (l1, l2)
}
