//! Dense treatment of one fixed-`K` block.
//!
//! Basis ordering: index 0 is the excited qubit `|K⟩`, index `1 + n` is the
//! photon state `|p_n⟩_K` on the momentum grid. The matrix is an arrowhead:
//! diagonal energies plus a uniform border `Ω/√L` in row and column 0.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Result, WqedError};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    pub k: f64,
    /// `E_{K,Δ}` followed by `ω̃_{K,p_n}`.
    pub diagonal: Vec<f64>,
    /// Border element `Ω/√L`.
    pub coupling: f64,
}

impl BlockHamiltonian {
    pub fn new(params: &ModelParams, k_total: f64) -> Self {
        let mut diagonal = Vec::with_capacity(params.l + 1);
        diagonal.push(params.effective_gap(k_total));
        diagonal.extend(
            params
                .grid()
                .values()
                .into_iter()
                .map(|p| params.effective_band(k_total, p)),
        );
        Self {
            k: k_total,
            diagonal,
            coupling: params.omega / (params.l as f64).sqrt(),
        }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let c = self.coupling;
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                self.diagonal[i]
            } else if i == 0 || j == 0 {
                c
            } else {
                0.0
            }
        })
    }

    /// `H v` without forming the matrix.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let c = self.coupling;
        let border: Complex64 = v[1..].iter().sum();
        out[0] = self.diagonal[0] * v[0] + c * border;
        for i in 1..v.len() {
            out[i] = self.diagonal[i] * v[i] + c * v[0];
        }
    }

    /// Interval guaranteed to contain the spectrum: the border has norm `Ω`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let r = self.coupling * ((self.dim() - 1) as f64).sqrt();
        let lo = self.diagonal.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo - r, hi + r)
    }
}

fn check_budget(dim: usize, budget: usize) -> Result<()> {
    if dim > budget {
        Err(WqedError::SizeError { dim, budget })
    } else {
        Ok(())
    }
}

/// Full eigendecomposition `H = V diag(λ) Vᵀ` of one block.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub k: f64,
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Mat<f64>,
}

pub fn diagonalize(params: &ModelParams, k_total: f64, budget: usize) -> Result<BlockEigen> {
    let h = BlockHamiltonian::new(params, k_total);
    check_budget(h.dim(), budget)?;
    let eig = h
        .to_dense()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| WqedError::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;
    let values = eig.S().column_vector().iter().copied().collect();
    Ok(BlockEigen {
        k: k_total,
        values,
        vectors: eig.U().to_owned(),
    })
}

pub fn eigenvalues(params: &ModelParams, k_total: f64, budget: usize) -> Result<Vec<f64>> {
    let h = BlockHamiltonian::new(params, k_total);
    check_budget(h.dim(), budget)?;
    h.to_dense()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| WqedError::NumericalFailure(format!("eigenvalue solve failed: {e:?}")))
}

impl BlockEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `|⟨K|v_n⟩|²` for every eigenvector.
    pub fn excited_weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.vectors[(0, n)].powi(2)).collect()
    }

    /// Eigenbasis coefficients `Vᵀ ψ`.
    pub fn project(&self, state: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|n| {
                state
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| a * self.vectors[(i, n)])
                    .sum()
            })
            .collect()
    }

    /// Coefficients of `amplitude · |K⟩`.
    pub fn project_excited(&self, amplitude: Complex64) -> Vec<Complex64> {
        (0..self.dim()).map(|n| amplitude * self.vectors[(0, n)]).collect()
    }

    /// Excited amplitude `⟨K|e^{-iHt}|ψ⟩` at each time, from eigenbasis coefficients.
    pub fn excited_amplitudes(&self, coeffs: &[Complex64], times: &[f64]) -> Vec<Complex64> {
        let row: Vec<Complex64> = (0..self.dim())
            .map(|n| self.vectors[(0, n)] * coeffs[n])
            .collect();
        times
            .iter()
            .map(|&t| {
                row.iter()
                    .zip(&self.values)
                    .map(|(&a, &e)| a * Complex64::from_polar(1.0, -e * t))
                    .sum()
            })
            .collect()
    }

    /// Full states `e^{-iHt}|ψ⟩` at each time, computed as two real products
    /// `V · Re(C)` and `V · Im(C)` with `C[n, j] = e^{-iλ_n t_j} c_n`.
    pub fn evolve(&self, coeffs: &[Complex64], times: &[f64]) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let phased = |n: usize, j: usize| coeffs[n] * Complex64::from_polar(1.0, -self.values[n] * times[j]);
        let c_re = Mat::from_fn(n, times.len(), |i, j| phased(i, j).re);
        let c_im = Mat::from_fn(n, times.len(), |i, j| phased(i, j).im);
        let re = &self.vectors * &c_re;
        let im = &self.vectors * &c_im;
        (0..times.len())
            .map(|j| (0..n).map(|i| Complex64::new(re[(i, j)], im[(i, j)])).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_SIZE_BUDGET;

    fn params(jp: f64, delta: f64, omega: f64, l: usize) -> ModelParams {
        ModelParams::new(1.0, jp, delta, omega, l).unwrap()
    }

    #[test]
    fn decoupled_spectrum_is_the_diagonal() {
        let p = params(0.5, 0.3, 0.0, 40);
        let h = BlockHamiltonian::new(&p, 0.7);
        let mut expected = h.diagonal.clone();
        expected.sort_by(f64::total_cmp);
        let values = eigenvalues(&p, 0.7, DEFAULT_SIZE_BUDGET).unwrap();
        for (a, b) in values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvectors_diagonalize_and_are_complete() {
        let p = params(0.5, 0.0, 0.6, 60);
        let eig = diagonalize(&p, 1.1, DEFAULT_SIZE_BUDGET).unwrap();
        let h = BlockHamiltonian::new(&p, 1.1);
        let total: f64 = eig.excited_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut out = vec![Complex64::default(); eig.dim()];
        for n in [0, 17, 60] {
            let v: Vec<Complex64> = (0..eig.dim()).map(|i| eig.vectors[(i, n)].into()).collect();
            h.apply(&v, &mut out);
            for i in 0..eig.dim() {
                assert!((out[i] - eig.values[n] * v[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = params(0.5, 0.0, 0.6, 60);
        assert_eq!(
            diagonalize(&p, 0.0, 60).unwrap_err(),
            WqedError::SizeError { dim: 61, budget: 60 }
        );
    }

    #[test]
    fn evolution_is_unitary_and_consistent() {
        let p = params(0.3, 0.5, 0.4, 80);
        let eig = diagonalize(&p, -0.4, DEFAULT_SIZE_BUDGET).unwrap();
        let c = eig.project_excited(Complex64::new(1.0, 0.0));
        let times = [0.0, 1.5, 20.0, 300.0];
        let states = eig.evolve(&c, &times);
        let psi_e = eig.excited_amplitudes(&c, &times);
        assert!((states[0][0] - 1.0).norm() < 1e-12);
        for (state, amp) in states.iter().zip(&psi_e) {
            let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((state[0] - amp).norm() < 1e-12);
        }
        // compare with a fine Taylor-stepped propagation
        let h = BlockHamiltonian::new(&p, -0.4);
        let mut psi = vec![Complex64::default(); h.dim()];
        psi[0] = Complex64::new(1.0, 0.0);
        let dt = 1.5 / 300.0;
        let mut term = vec![Complex64::default(); h.dim()];
        let mut tmp = vec![Complex64::default(); h.dim()];
        for _ in 0..300 {
            let mut acc = psi.clone();
            term.copy_from_slice(&psi);
            for order in 1..12 {
                h.apply(&term, &mut tmp);
                let f = Complex64::new(0.0, -dt / order as f64);
                for i in 0..term.len() {
                    term[i] = tmp[i] * f;
                    acc[i] += term[i];
                }
            }
            psi = acc;
        }
        for i in 0..h.dim() {
            assert!((psi[i] - states[1][i]).norm() < 1e-10);
        }
    }

    #[test]
    fn spectral_bounds_contain_spectrum() {
        let p = params(0.9, -1.0, 1.3, 50);
        let h = BlockHamiltonian::new(&p, 2.0);
        let (lo, hi) = h.spectral_bounds();
        let values = eigenvalues(&p, 2.0, DEFAULT_SIZE_BUDGET).unwrap();
        assert!(lo <= values[0] && values[values.len() - 1] <= hi);
    }
}
