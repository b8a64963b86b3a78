//! Closed-form eigenpairs of `A_h` and `M`, and spectra of assembled schemes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::{OperatorBundle, Scheme};
use crate::error::Result;
use crate::grid::Grid;
use crate::linalg::dense_eigenvalues;
use crate::linalg::eigen::sort_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Iterative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPairSet {
    pub values: Vec<Complex64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub provenance: Provenance,
}

impl EigenPairSet {
    fn analytic(mut pairs: Vec<(f64, Vec<f64>)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, vectors): (Vec<_>, Vec<_>) = pairs.into_iter().map(|(v, x)| (Complex64::new(v, 0.0), x)).unzip();
        EigenPairSet {
            values,
            vectors: Some(vectors),
            provenance: Provenance::Analytic,
        }
    }
}

/// Eigenpairs of `A_h`, `M` and `M⁻¹A_h`, which share eigenvectors.
#[derive(Debug, Clone)]
pub struct AnalyticEigenpairs {
    pub ah: EigenPairSet,
    pub m: EigenPairSet,
    pub m_inv_ah: EigenPairSet,
}

fn sin_sq(grid: &Grid, k: usize) -> f64 {
    let n = grid.n() as f64;
    ((2 * k - 1) as f64 * PI / (4.0 * n + 2.0)).sin().powi(2)
}

/// `λ_k = (4/h²) sin²((2k-1)π/(4N+2))`, `k = 1..=N`.
pub fn ah_eigenvalue(grid: &Grid, k: usize) -> f64 {
    4.0 / (grid.h() * grid.h()) * sin_sq(grid, k)
}

/// `λ̃_k = 1 - sin²((2k-1)π/(4N+2))`.
pub fn m_eigenvalue(grid: &Grid, k: usize) -> f64 {
    1.0 - sin_sq(grid, k)
}

/// `μ_k = λ_k / λ̃_k`.
pub fn m_inv_ah_eigenvalue(grid: &Grid, k: usize) -> f64 {
    let s = sin_sq(grid, k);
    let h2 = grid.h() * grid.h();
    4.0 * s / (h2 - h2 * s)
}

/// Component `j = 1..=N` of the `k`-th eigenvector: `sin((2k-1)jπ/(2N+1))`.
pub fn shared_eigenvector(grid: &Grid, k: usize) -> Vec<f64> {
    let n = grid.n() as i64;
    let period = 2 * (2 * n + 1);
    (1..=n)
        .map(|j| {
            // Reduce the phase exactly so `sin` sees an argument in [-π, π].
            let mut p = ((2 * k as i64 - 1) * j) % period;
            if p > 2 * n + 1 {
                p -= period;
            }
            (p as f64 * PI / (2 * n + 1) as f64).sin()
        })
        .collect()
}

pub fn analytic_eigenpairs(grid: &Grid) -> AnalyticEigenpairs {
    let n = grid.n();
    let build = |f: fn(&Grid, usize) -> f64| {
        EigenPairSet::analytic((1..=n).map(|k| (f(grid, k), shared_eigenvector(grid, k))).collect())
    };
    AnalyticEigenpairs {
        ah: build(ah_eigenvalue),
        m: build(m_eigenvalue),
        m_inv_ah: build(m_inv_ah_eigenvalue),
    }
}

/// Spectrum of the first-order operator of one bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub scheme: Scheme,
    pub xi: f64,
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    /// Smallest gap between consecutive imaginary parts on the positive branch.
    pub min_gap: f64,
    /// Gap between the two largest imaginary parts on the positive branch.
    pub top_gap: f64,
    pub max_real: f64,
    pub spectral_radius: f64,
}

/// Imaginary parts above this fraction of the spectral radius count as
/// positive frequencies.
const ZERO_FREQUENCY: f64 = 1e-9;

pub fn spectrum_report(bundle: &OperatorBundle) -> Result<SpectrumReport> {
    let a = bundle.to_first_order()?.materialize()?;
    let mut eigenvalues = dense_eigenvalues(&a)?;
    sort_eigenvalues(&mut eigenvalues);
    Ok(report_from(
        bundle.scheme(),
        bundle.xi(),
        bundle.grid().n(),
        eigenvalues,
    ))
}

pub fn report_from(scheme: Scheme, xi: f64, n: usize, eigenvalues: Vec<Complex64>) -> SpectrumReport {
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_real = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let freqs: Vec<f64> = eigenvalues
        .iter()
        .map(|z| z.im)
        .filter(|&im| im > ZERO_FREQUENCY * radius)
        .collect();
    let gaps: Vec<f64> = freqs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    SpectrumReport {
        scheme,
        xi,
        n,
        min_gap: gaps.iter().copied().reduce(f64::min).unwrap_or(0.0),
        top_gap: gaps.last().copied().unwrap_or(0.0),
        max_real,
        spectral_radius: radius,
        eigenvalues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamCoefficients;
    use crate::discretization::{assemble_ah, assemble_m};
    use crate::linalg::norm;

    #[test]
    fn single_node_matches_assembly() {
        let g = Grid::new_unchecked(1);
        assert!((ah_eigenvalue(&g, 1) - 4.0).abs() < 1e-14);
        assert_eq!(assemble_ah(&g).diag[0], 4.0);
    }

    #[test]
    fn shared_identity_on_eigenvalues() {
        let g = Grid::new(17).unwrap();
        let h2 = g.h() * g.h();
        for k in 1..=17 {
            assert!((m_eigenvalue(&g, k) + h2 / 4.0 * ah_eigenvalue(&g, k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn residuals_against_assembled_matrices() {
        for n in [1, 2, 10, 50] {
            let g = Grid::new_unchecked(n);
            let pairs = analytic_eigenpairs(&g);
            let a = assemble_ah(&g);
            let m = assemble_m(&g);
            for (set, apply) in [
                (
                    &pairs.ah,
                    Box::new(|v: &[f64]| a.mul_vec(v)) as Box<dyn Fn(&[f64]) -> Vec<f64>>,
                ),
                (&pairs.m, Box::new(|v: &[f64]| m.mul_vec(v))),
            ] {
                assert_eq!(set.provenance, Provenance::Analytic);
                for (lam, v) in set.values.iter().zip(set.vectors.as_ref().unwrap()) {
                    let av = apply(v);
                    let r: Vec<f64> = av.iter().zip(v).map(|(x, y)| x - lam.re * y).collect();
                    assert!(norm(&r) <= 1e-10 * norm(v) * lam.re.abs().max(1.0));
                }
            }
            // M⁻¹A_h v = μ v  ⇔  A_h v = μ M v
            for (mu, v) in pairs
                .m_inv_ah
                .values
                .iter()
                .zip(pairs.m_inv_ah.vectors.as_ref().unwrap())
            {
                let lhs = a.mul_vec(v);
                let rhs = m.mul_vec(v);
                let r: Vec<f64> = lhs.iter().zip(&rhs).map(|(x, y)| x - mu.re * y).collect();
                assert!(norm(&r) <= 1e-10 * norm(&lhs).max(1.0));
            }
        }
    }

    #[test]
    fn ah_eigenvalues_increase() {
        let g = Grid::new(30).unwrap();
        let vals = &analytic_eigenpairs(&g).ah.values;
        assert!(vals[0].re > 0.0);
        assert!(vals.windows(2).all(|w| w[1].re > w[0].re));
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(v.re, ah_eigenvalue(&g, i + 1));
        }
    }

    #[test]
    fn orfd_open_loop_is_conservative() {
        let c = BeamCoefficients::new(0.5, 1.0, 2.0).unwrap();
        let b = OperatorBundle::assemble_orfd(&c, &Grid::new(10).unwrap(), 0.0).unwrap();
        let r = spectrum_report(&b).unwrap();
        assert_eq!(r.eigenvalues.len(), 22);
        let max_im = r.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(r.eigenvalues.iter().all(|z| z.re.abs() <= 1e-8 * max_im));
        assert!(r.min_gap > 0.0);
        // Conjugate symmetry.
        let k = r.eigenvalues.len();
        for i in 0..k {
            let a = r.eigenvalues[i];
            let b = r.eigenvalues[k - 1 - i];
            assert!((a.im + b.im).abs() <= 1e-8 * max_im);
        }
    }

    #[test]
    fn gap_statistics() {
        let ev = vec![
            Complex64::new(0.0, -3.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.1, 1.0),
            Complex64::new(0.0, 2.5),
            Complex64::new(0.0, 3.0),
        ];
        let r = report_from(Scheme::Fd, 0.0, 3, ev);
        assert_eq!(r.min_gap, 0.5);
        assert_eq!(r.top_gap, 0.5);
        assert_eq!(r.max_real, 0.0);
        let r = report_from(Scheme::Fd, 0.0, 3, vec![Complex64::new(-1.0, 0.0)]);
        assert_eq!(r.min_gap, 0.0);
    }
}
