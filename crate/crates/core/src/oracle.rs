//! Brute-force verifiers for the closed-form results.
//!
//! Dense diagonalization checks bound-state energies, weights and
//! completeness. Gaussian wavepacket propagation checks the scattering
//! amplitudes and the inelastic momentum without using either formula.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::block::{diagonalize, eigenvalues, BlockHamiltonian};
use crate::error::{Result, WqedError};
use crate::model::{wrap_angle, ModelParams, Momentum};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub k: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `|⟨K|v_n⟩|²` for each eigenvalue.
    pub weights: Vec<f64>,
}

impl BlockSpectrum {
    /// Eigenvalues outside `[-2|z| - margin, 2|z| + margin]`.
    pub fn out_of_band(&self, params: &ModelParams, margin: f64) -> Vec<usize> {
        let edge = params.band_halfwidth(self.k) + margin;
        (0..self.eigenvalues.len())
            .filter(|&n| self.eigenvalues[n].abs() > edge)
            .collect()
    }
}

pub fn dense_block_diagonalize(params: &ModelParams, k_total: Momentum, budget: usize) -> Result<BlockSpectrum> {
    let eig = diagonalize(params, k_total.value(), budget)?;
    Ok(BlockSpectrum {
        k: k_total.value(),
        weights: eig.excited_weights(),
        eigenvalues: eig.values,
    })
}

/// Eigenvalues only; several times cheaper for large blocks.
pub fn dense_block_eigenvalues(params: &ModelParams, k_total: Momentum, budget: usize) -> Result<Vec<f64>> {
    eigenvalues(params, k_total.value(), budget)
}

/// `J_0(x) .. J_n(x)` for `x > 0` by Miller's backward recurrence, normalized
/// with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        return out;
    }
    let start = n.max(x.ceil() as usize) + 40 + (x.cbrt() * 10.0) as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(n + 1);
    vals.iter_mut().for_each(|v| *v /= norm);
    vals
}

/// `e^{-iHt} v` by a Chebyshev expansion, accurate to about machine precision.
pub fn chebyshev_propagate(h: &BlockHamiltonian, v: &[Complex64], t: f64) -> Vec<Complex64> {
    let (lo, hi) = h.spectral_bounds();
    let centre = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo) * 1.01 + 1e-12;
    let x = half * t;
    let terms = (x + 10.0 * x.cbrt() + 40.0) as usize;
    let coeffs = bessel_j_sequence(x, terms);

    let dim = v.len();
    let scaled_apply = |src: &[Complex64], dst: &mut [Complex64]| {
        h.apply(src, dst);
        for (d, s) in dst.iter_mut().zip(src) {
            *d = (*d - centre * *s) / half;
        }
    };
    let mut prev = v.to_vec();
    let mut cur = vec![Complex64::default(); dim];
    scaled_apply(&prev, &mut cur);
    let mut acc: Vec<Complex64> = prev.iter().map(|a| a * coeffs[0]).collect();
    let mut phase = Complex64::new(0.0, -1.0);
    for a in acc.iter_mut().zip(&cur) {
        *a.0 += 2.0 * coeffs[1] * phase * a.1;
    }
    let mut next = vec![Complex64::default(); dim];
    for &c in coeffs.iter().skip(2) {
        scaled_apply(&cur, &mut next);
        for i in 0..dim {
            next[i] = 2.0 * next[i] - prev[i];
        }
        phase *= Complex64::new(0.0, -1.0);
        let w = 2.0 * c * phase;
        for (a, n) in acc.iter_mut().zip(&next) {
            *a += w * n;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let global = Complex64::from_polar(1.0, -centre * t);
    acc.iter_mut().for_each(|a| *a *= global);
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavepacketResult {
    pub transmission: f64,
    pub reflection: f64,
    /// Momentum of the largest photon population near `p0`.
    pub p_transmitted_peak: f64,
    /// Momentum of the largest photon population in the reflected branch.
    pub p_reflected_peak: f64,
    /// Reflection partner of `p0` used to split the momentum circle.
    pub p_reflected_reference: f64,
    /// Excited population left at `t_final`.
    pub excited_left: f64,
    pub t_final: f64,
    pub separation: i64,
    pub blocks: usize,
    /// Total photon momentum distribution at `t_final`.
    pub n_p: Vec<f64>,
}

/// Relative velocity of photon and qubit packets.
fn relative_velocity(params: &ModelParams, k0: f64, p0: f64) -> f64 {
    params.photon_velocity(p0) - params.qubit_velocity(k0)
}

/// Default separation and final time. The packets start eight combined
/// position widths apart, `8 √2 / (2σ)` sites, so they do not overlap
/// initially, and are read out once the reflected part has moved as far away
/// again.
pub fn default_schedule(params: &ModelParams, k0: f64, p0: f64, sigma_p: f64) -> (i64, f64) {
    let d = (8.0 * std::f64::consts::SQRT_2 / (2.0 * sigma_p)).ceil() as i64;
    let v = relative_velocity(params, k0, p0).abs().max(1e-3);
    (d, 2.5 * d as f64 / v)
}

/// Partitions the circle into the arc around `a` and the arc around `b`,
/// cut at the two midpoints.
fn nearer_to_first(p: f64, a: f64, b: f64) -> bool {
    wrap_angle(p - a).abs() <= wrap_angle(p - b).abs()
}

/// Collides a ground-state qubit packet (centre `k0`) with a photon packet
/// (centre `p0`), both Gaussian with momentum width `sigma_p`, and measures
/// the photon momentum distribution after the collision.
pub fn wavepacket_scattering_oracle(
    params: &ModelParams,
    k0: f64,
    p0: f64,
    sigma_p: f64,
    t_final: Option<f64>,
) -> Result<WavepacketResult> {
    if !(sigma_p > 0.0) {
        return Err(WqedError::InvalidParams("sigma_p must be positive".into()));
    }
    let (d, default_t) = default_schedule(params, k0, p0, sigma_p);
    let t_final = t_final.unwrap_or(default_t);
    let grid = params.grid();
    let l = grid.len();

    // packets must not stall or reverse across their momentum spread
    let v0 = relative_velocity(params, k0, p0);
    for dp in [-3.0, 0.0, 3.0] {
        for dk in [-3.0, 0.0, 3.0] {
            let v = relative_velocity(params, k0 + dk * sigma_p, p0 + dp * sigma_p);
            if v * v0 <= 0.0 {
                return Err(WqedError::OracleInvalid(
                    "packet spread reaches a point of vanishing relative velocity".into(),
                ));
            }
        }
    }
    let p_ref = wrap_angle(-p0 - 2.0 * params.z(k0 + p0).arg());
    let travel = params
        .photon_velocity(p0)
        .abs()
        .max(params.photon_velocity(p_ref).abs())
        .max(params.qubit_velocity(k0).abs())
        * t_final;
    if travel >= l as f64 / 2.0 - d as f64 {
        return Err(WqedError::OracleInvalid(format!(
            "packets travel {travel:.0} sites, too far for a ring of {l}"
        )));
    }

    // photon starts on the side it approaches from
    let s = v0.signum();
    let x_ph = -(s as i64) * d / 2;
    let x_qb = (s as i64) * d / 2;
    let gauss = |q: f64, c: f64, x: i64| {
        let dq = wrap_angle(q - c);
        Complex64::from_polar((-dq * dq / (4.0 * sigma_p * sigma_p)).exp(), -q * x as f64)
    };
    let photon: Vec<Complex64> = grid.values().iter().map(|&p| gauss(p, p0, x_ph)).collect();
    let qubit: Vec<Complex64> = grid.values().iter().map(|&k| gauss(k, k0, x_qb)).collect();
    let norm = (photon.iter().map(|a| a.norm_sqr()).sum::<f64>()
        * qubit.iter().map(|a| a.norm_sqr()).sum::<f64>())
    .sqrt();

    // block K holds φ(p) χ(K - p) on its photon states
    let blocks: Vec<Vec<Complex64>> = (0..l)
        .map(|kn| {
            let mut v = vec![Complex64::default(); l + 1];
            for m in 0..l {
                v[m + 1] = photon[m] * qubit[grid.difference_index(kn, m)] / norm;
            }
            v
        })
        .collect();
    let active: Vec<usize> = (0..l)
        .filter(|&kn| blocks[kn].iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-16)
        .collect();

    let evolved: Vec<Vec<Complex64>> = active
        .par_iter()
        .map(|&kn| {
            let h = BlockHamiltonian::new(params, grid.value(kn));
            chebyshev_propagate(&h, &blocks[kn], t_final)
        })
        .collect();

    let mut n_p = vec![0.0; l];
    let mut excited_left = 0.0;
    for v in &evolved {
        excited_left += v[0].norm_sqr();
        for m in 0..l {
            n_p[m] += v[m + 1].norm_sqr();
        }
    }

    let p = grid.values();
    let (mut t_pop, mut r_pop) = (0.0, 0.0);
    let (mut t_peak, mut r_peak) = ((0.0, f64::NEG_INFINITY), (0.0, f64::NEG_INFINITY));
    for m in 0..l {
        if nearer_to_first(p[m], p0, p_ref) {
            t_pop += n_p[m];
            if n_p[m] > t_peak.1 {
                t_peak = (p[m], n_p[m]);
            }
        } else {
            r_pop += n_p[m];
            if n_p[m] > r_peak.1 {
                r_peak = (p[m], n_p[m]);
            }
        }
    }
    let photons = t_pop + r_pop;
    Ok(WavepacketResult {
        transmission: t_pop / photons,
        reflection: r_pop / photons,
        p_transmitted_peak: t_peak.0,
        p_reflected_peak: r_peak.0,
        p_reflected_reference: p_ref,
        excited_left,
        t_final,
        separation: d,
        blocks: active.len(),
        n_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::boundstates::{solve_bound_state, Branch};
    use crate::model::DEFAULT_SIZE_BUDGET;
    use crate::scattering::scatter;

    fn params(jp: f64, delta: f64, omega: f64, l: usize) -> ModelParams {
        ModelParams::new(1.0, jp, delta, omega, l).unwrap()
    }

    #[test]
    fn decoupled_spectrum_is_exact() {
        let p = params(0.5, 0.2, 0.0, 30);
        let s = dense_block_diagonalize(&p, Momentum::new(0.4), DEFAULT_SIZE_BUDGET).unwrap();
        let mut expected: Vec<f64> = BlockHamiltonian::new(&p, 0.4).diagonal;
        expected.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn static_extremal_eigenvalues() {
        let p = params(0.0, 0.0, 1.0, 2000);
        let v = dense_block_eigenvalues(&p, Momentum::new(0.0), DEFAULT_SIZE_BUDGET).unwrap();
        let e = (2.0 + 5f64.sqrt()).sqrt();
        assert!((v[v.len() - 1] - e).abs() < 1e-3);
        assert!((v[0] + e).abs() < 1e-3);
    }

    #[test]
    fn completeness_and_two_bound_states() {
        let p = params(0.3, 0.0, 1.5, 300);
        for k in [0.0, 1.3, PI] {
            let s = dense_block_diagonalize(&p, Momentum::new(k), DEFAULT_SIZE_BUDGET).unwrap();
            assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let out = s.out_of_band(&p, 10.0 / p.l as f64);
            assert_eq!(out.len(), 2);
            for (&n, branch) in out.iter().zip([Branch::Lower, Branch::Upper]) {
                let b = solve_bound_state(&p, Momentum::new(k), branch).unwrap();
                assert!((s.eigenvalues[n] - b.energy).abs() < 1e-6);
                assert!((s.weights[n] - b.u * b.u).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_sequence(500.0, 700);
        // J_0(500) and J_1(500) from the large-argument expansion
        let x: f64 = 500.0;
        let a0 = (2.0 / (PI * x)).sqrt() * ((x - PI / 4.0).cos() + (x - PI / 4.0).sin() / (8.0 * x));
        assert!((j[0] - a0).abs() < 1e-6);
        assert!(j[700].abs() < 1e-20);
        for n in 1..699 {
            assert!((j[n - 1] + j[n + 1] - 2.0 * n as f64 / x * j[n]).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_matches_eigen_evolution() {
        let p = params(0.3, 0.1, 0.7, 60);
        let h = BlockHamiltonian::new(&p, 0.8);
        let eig = diagonalize(&p, 0.8, DEFAULT_SIZE_BUDGET).unwrap();
        let v: Vec<Complex64> = (0..61).map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
        let nrm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<Complex64> = v.iter().map(|a| a / nrm).collect();
        for t in [0.0, 3.0, 150.0] {
            let a = chebyshev_propagate(&h, &v, t);
            let b = &eig.evolve(&eig.project(&v), &[t])[0];
            let err = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-11, "t={t}: {err}");
        }
    }

    #[test]
    fn rejects_stalled_packets() {
        let p = params(0.0, 0.0, 0.5, 400);
        assert!(matches!(
            wavepacket_scattering_oracle(&p, 0.0, 0.02, 0.03, None),
            Err(WqedError::OracleInvalid(_))
        ));
    }

    #[test]
    fn static_resonance_reflects_packet() {
        let p = params(0.0, 0.0, 1.0, 1200);
        let r = wavepacket_scattering_oracle(&p, 0.0, PI / 2.0, 0.05, None).unwrap();
        assert!(r.transmission < 0.06, "{}", r.transmission);
        assert!((r.p_reflected_peak + PI / 2.0).abs() < 0.06);
        assert!(r.excited_left < 1e-6);
    }

    #[test]
    fn packet_matches_momentum_averaged_closed_form() {
        // asymptotically each plane-wave pair scatters on its own, so the
        // measured T is |t(k, p)|² averaged over the two Gaussian densities
        let p = params(0.2, 0.5, 0.6, 2400);
        let (k0, p0, sigma) = (-0.7, 1.9, 0.02);
        let r = wavepacket_scattering_oracle(&p, k0, p0, sigma, None).unwrap();
        let g = p.grid().values();
        let w = |q: f64, c: f64| (-wrap_angle(q - c).powi(2) / (2.0 * sigma * sigma)).exp();
        let (mut num, mut den) = (0.0, 0.0);
        for &k in &g {
            for &q in &g {
                let weight = w(k, k0) * w(q, p0);
                if weight > 1e-14 {
                    num += weight * scatter(&p, Momentum::new(k), Momentum::new(q)).transmission();
                    den += weight;
                }
            }
        }
        let averaged = num / den;
        assert!((r.transmission - averaged).abs() < 5e-3, "{} vs {averaged}", r.transmission);
        assert!((r.transmission + r.reflection - 1.0).abs() < 1e-12);
        assert!(r.excited_left < 1e-8);
    }
}
