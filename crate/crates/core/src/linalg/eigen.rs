//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! Balancing (diagonal similarity by powers of two), Householder reduction to
//! upper Hessenberg form, then implicitly shifted Francis double-shift QR
//! sweeps with deflation on small sub-diagonal entries.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Deflate when `|h[i+1][i]| ≤ tol · (|h[i][i]| + |h[i+1][i+1]|)`.
    pub tol: f64,
    /// Give up after `max_iter_factor · n` QR sweeps in total.
    pub max_iter_factor: usize,
    /// Largest accepted dimension.
    pub max_dim: usize,
    pub balance: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-12,
            max_iter_factor: 100,
            max_dim: 1024,
            balance: true,
        }
    }
}

/// All eigenvalues of `a`, sorted by imaginary part then real part.
pub fn dense_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    dense_eigenvalues_with(a, &EigenOptions::default())
}

pub fn dense_eigenvalues_with(a: &DMatrix<f64>, opts: &EigenOptions) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.ncols(),
        });
    }
    if n > opts.max_dim {
        return Err(Error::invalid(
            "matrix",
            format!("dimension {n} exceeds the eigensolver cap {}", opts.max_dim),
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut h = RowMajor::from(a);
    if opts.balance {
        balance(&mut h);
    }
    hessenberg(&mut h);
    let mut values = hqr(&mut h, opts)?;
    sort_eigenvalues(&mut values);
    Ok(values)
}

/// Ascending by imaginary part, ties broken by real part.
pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

struct RowMajor {
    n: usize,
    data: Vec<f64>,
}

impl RowMajor {
    fn from(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = a[(i, j)];
            }
        }
        RowMajor { n, data }
    }
}

impl std::ops::Index<(usize, usize)> for RowMajor {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RowMajor {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn balance(a: &mut RowMajor) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

fn hessenberg(a: &mut RowMajor) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let scale: f64 = (k + 1..n).map(|i| a[(i, k)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in k + 1..n {
            v[i] = a[(i, k)] / scale;
            h += v[i] * v[i];
        }
        let g = -v[k + 1].signum() * h.sqrt();
        h -= v[k + 1] * g;
        v[k + 1] -= g;

        // A ← (I − v vᵀ/h) A
        for j in k..n {
            let f: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() / h;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // A ← A (I − v vᵀ/h)
        for i in 0..n {
            let f: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() / h;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        a[(k + 1, k)] = scale * g;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
fn hqr(a: &mut RowMajor, opts: &EigenOptions) -> Result<Vec<Complex64>> {
    let n = a.n;
    let max_iter = opts.max_iter_factor * n;
    let mut found: Vec<Complex64> = Vec::with_capacity(n);

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut total_iter = 0usize;
    // Active window is rows/cols l..=nn.
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nnu = nn as usize;
            // Look for a negligible sub-diagonal element.
            let mut l = nnu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= opts.tol * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[(nnu, nnu)];
            if l == nnu {
                found.push(Complex64::new(x + t, 0.0));
                nn -= 1;
                break;
            }
            let mut y = a[(nnu - 1, nnu - 1)];
            let mut w = a[(nnu, nnu - 1)] * a[(nnu - 1, nnu)];
            if l == nnu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let lo = x + z;
                    let hi = if z != 0.0 { x - w / z } else { lo };
                    found.push(Complex64::new(lo, 0.0));
                    found.push(Complex64::new(hi, 0.0));
                } else {
                    found.push(Complex64::new(x + p, z));
                    found.push(Complex64::new(x + p, -z));
                }
                nn -= 2;
                break;
            }

            if total_iter >= max_iter {
                return Err(Error::NotConverged {
                    iterations: total_iter,
                    converged: found.len(),
                    dim: n,
                    partial: found,
                });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for i in 0..=nnu {
                    a[(i, i)] -= x;
                }
                let s = a[(nnu, nnu - 1)].abs() + a[(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_iter += 1;

            // Two consecutive small sub-diagonal elements.
            let mut m = nnu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nnu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            // Double-shift QR step on rows l..=nn, columns m..=nn.
            for k in m..nnu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nnu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nnu {
                    let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                    if k != nnu - 1 {
                        pp += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pp * z;
                    }
                    a[(k + 1, j)] -= pp * y;
                    a[(k, j)] -= pp * x;
                }
                let mmin = nnu.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != nnu - 1 {
                        pp += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= pp * r;
                    }
                    a[(i, k + 1)] -= pp * q;
                    a[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn close(actual: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).norm() <= tol, "{a} vs {e}");
        }
    }

    #[test]
    fn rotation_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -4.0, 0.0]);
        let ev = dense_eigenvalues(&a).unwrap();
        close(&ev, &[Complex64::new(0.0, -2.0), Complex64::new(0.0, 2.0)], 1e-14);
    }

    #[test]
    fn diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let mut ev = dense_eigenvalues(&a).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        close(&ev, &[1.0.into(), 2.0.into(), 3.0.into()], 1e-14);
    }

    #[test]
    fn companion_polynomial_roots() {
        // λ³ − 6λ² + 11λ − 6 = (λ−1)(λ−2)(λ−3)
        let a = DMatrix::from_row_slice(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let mut ev = dense_eigenvalues(&a).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        close(&ev, &[1.0.into(), 2.0.into(), 3.0.into()], 1e-10);
    }

    #[test]
    fn symmetric_gives_real_spectrum() {
        let mut rng = SplitMix64::seed_from_u64(7);
        let n = 30;
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &b + b.transpose();
        let ev = dense_eigenvalues(&a).unwrap();
        let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(ev.iter().all(|z| z.im.abs() <= 1e-10 * radius));
        let mut reference: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let mut ours: Vec<f64> = ev.iter().map(|z| z.re).collect();
        ours.sort_by(f64::total_cmp);
        for (o, r) in ours.iter().zip(&reference) {
            assert_abs_diff_eq!(o, r, epsilon = 1e-10 * radius);
        }
    }

    #[test]
    fn random_nonsymmetric_matches_trace_and_reference() {
        let mut rng = SplitMix64::seed_from_u64(11);
        for n in [1, 2, 5, 17, 40] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let ev = dense_eigenvalues(&a).unwrap();
            assert_eq!(ev.len(), n);
            let sum: Complex64 = ev.iter().sum();
            assert!((sum.re - a.trace()).abs() <= 1e-10 * (1.0 + a.norm()));
            assert!(sum.im.abs() <= 1e-10 * (1.0 + a.norm()));
            let mut reference: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
            sort_eigenvalues(&mut reference);
            close(&ev, &reference, 1e-8);
        }
    }

    #[test]
    fn badly_scaled_similarity() {
        // D⁻¹ A D with entries spanning many orders of magnitude.
        let a = DMatrix::from_row_slice(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let d = nalgebra::DVector::from_vec(vec![1.0, 1e6, 1e-6]);
        let scaled = DMatrix::from_fn(3, 3, |i, j| a[(i, j)] * d[j] / d[i]);
        let mut ev = dense_eigenvalues(&scaled).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        close(&ev, &[1.0.into(), 2.0.into(), 3.0.into()], 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::from_element(2, 2, f64::NAN);
        assert!(dense_eigenvalues(&a).is_err());
        let opts = EigenOptions {
            max_dim: 4,
            ..Default::default()
        };
        assert!(dense_eigenvalues_with(&DMatrix::identity(5, 5), &opts).is_err());
    }

    #[test]
    fn iteration_cap_reports_partial() {
        let mut rng = SplitMix64::seed_from_u64(3);
        let a = DMatrix::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
        let opts = EigenOptions {
            max_iter_factor: 0,
            ..Default::default()
        };
        match dense_eigenvalues_with(&a, &opts) {
            Err(Error::NotConverged { dim, partial, .. }) => {
                assert_eq!(dim, 20);
                assert!(partial.len() < 20);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
