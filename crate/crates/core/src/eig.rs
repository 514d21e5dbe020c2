//! Dense real nonsymmetric eigensolver.
//!
//! Householder reduction to upper Hessenberg form followed by Francis
//! double-shift QR iteration, after the Algol procedures `orthes`/`hqr` of
//! Martin and Wilkinson (Handbook for Automatic Computation, vol. II) and
//! their EISPACK/JAMA descendants. Only eigenvalues are computed; the ad hoc
//! exceptional shifts at 10 and 30 stalled iterations make the iteration
//! robust on the tightly clustered spectra produced by one-step maps of
//! weakly coupled patches.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// The QR iteration exceeded the per-eigenvalue iteration budget.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("QR iteration failed to converge while isolating eigenvalue {index}")]
pub struct NonConvergence {
    pub index: usize,
}

const MAX_ITER_PER_EIGENVALUE: usize = 100;

/// All eigenvalues of a square real matrix, in no particular order.
/// Complex eigenvalues appear in conjugate pairs.
///
/// One-step maps of translation-invariant patch arrays carry exact block
/// symmetries that can cycle the Francis iteration (the shift polynomial
/// annihilates identical leading and trailing blocks). If the direct
/// iteration gives up, the matrix is retried under a fixed seeded orthogonal
/// similarity, which scrambles the structure while preserving the spectrum
/// and determinism.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>, NonConvergence> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    reduce_to_hessenberg(&mut h);
    match hessenberg_eigenvalues(&mut h) {
        Ok(eigs) => Ok(eigs),
        Err(_) => {
            let q = seeded_orthogonal(n);
            let mut rotated = q.transpose() * a * &q;
            reduce_to_hessenberg(&mut rotated);
            hessenberg_eigenvalues(&mut rotated)
        }
    }
}

/// Deterministic "random" orthogonal matrix (QR factor of a seeded xorshift
/// matrix).
fn seeded_orthogonal(n: usize) -> DMatrix<f64> {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    DMatrix::from_fn(n, n, |_, _| next()).qr().q()
}

/// Orthogonal similarity reduction to upper Hessenberg form (`orthes`).
/// Entries below the first subdiagonal are zeroed on exit.
fn reduce_to_hessenberg(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // similarity transform H ← (I - uuᵀ/hh) H (I - uuᵀ/hh)
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
    }
    // discard the Householder vectors parked below the subdiagonal
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (`hqr`),
/// eigenvalues only.
fn hessenberg_eigenvalues(h: &mut DMatrix<f64>) -> Result<Vec<Complex64>, NonConvergence> {
    let nn = h.nrows();
    let eps = f64::EPSILON;
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); nn]);
    }

    let mut exshift = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = nn as isize - 1;
    let mut iter = 0usize;

    while n >= 0 {
        // look for a single small subdiagonal element
        let mut l = n;
        while l > 0 {
            let lu = l as usize;
            let mut s = h[(lu - 1, lu - 1)].abs() + h[(lu, lu)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(lu, lu - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one real root
            let nu = n as usize;
            d[nu] = h[(nu, nu)] + exshift;
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // a 2×2 block: two real roots or a conjugate pair
            let nu = n as usize;
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            let ph = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            let qh = ph * ph + w;
            let mut z = qh.abs().sqrt();
            let x = h[(nu, nu)] + exshift;
            if qh >= 0.0 {
                z = if ph >= 0.0 { ph + z } else { ph - z };
                d[nu - 1] = x + z;
                d[nu] = if z != 0.0 { x - w / z } else { d[nu - 1] };
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
            } else {
                d[nu - 1] = x + ph;
                d[nu] = x + ph;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet: perform a double QR sweep
            let nu = n as usize;
            let mut x = h[(nu, nu)];
            let mut y = h[(nu - 1, nu - 1)];
            let mut w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            // exceptional shifts fire periodically, not just twice: a kick
            // only at 10 and 30 lets structurally symmetric matrices cycle
            // forever afterwards
            if iter > 0 && iter.is_multiple_of(10) && !iter.is_multiple_of(30) {
                // Wilkinson's original ad hoc shift; every not-yet-deflated
                // diagonal entry moves so exshift stays globally consistent
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                let s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter > 0 && iter.is_multiple_of(30) {
                // MATLAB's ad hoc shift
                let mut s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(NonConvergence { index: nu });
            }

            // look for two consecutive small subdiagonal elements
            let mut m = n - 2;
            while m >= l {
                let mu = m as usize;
                let z = h[(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(mu + 1, mu)] + h[(mu, mu + 1)];
                q = h[(mu + 1, mu + 1)] - z - rr - ss;
                r = h[(mu + 2, mu + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(mu, mu - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(mu - 1, mu - 1)].abs() + z.abs() + h[(mu + 1, mu + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                let iu = i as usize;
                h[(iu, iu - 2)] = 0.0;
                if i > m + 2 {
                    h[(iu, iu - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            for k in m..n {
                let ku = k as usize;
                let notlast = k != n - 1;
                if k != m {
                    p = h[(ku, ku - 1)];
                    q = h[(ku + 1, ku - 1)];
                    r = if notlast { h[(ku + 2, ku - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let mut s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(ku, ku - 1)] = -s * x;
                    } else if l != m {
                        h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;

                    // row modification
                    for j in ku..nn {
                        let mut f = h[(ku, j)] + q * h[(ku + 1, j)];
                        if notlast {
                            f += r * h[(ku + 2, j)];
                            h[(ku + 2, j)] -= f * z;
                        }
                        h[(ku, j)] -= f * x;
                        h[(ku + 1, j)] -= f * y;
                    }

                    // column modification
                    let imax = (n.min(k + 3)) as usize;
                    for i in 0..=imax {
                        let mut f = x * h[(i, ku)] + y * h[(i, ku + 1)];
                        if notlast {
                            f += z * h[(i, ku + 2)];
                            h[(i, ku + 2)] -= f * r;
                        }
                        h[(i, ku)] -= f;
                        h[(i, ku + 1)] -= f * q;
                    }
                }
            }
        }
    }

    Ok(d.into_iter().zip(e).map(|(re, im)| Complex64::new(re, im)).collect())
}
