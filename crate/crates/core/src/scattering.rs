//! Exact single-photon scattering off the moving emitter.
//!
//! An incoming photon `p_i` hitting a ground-state qubit with momentum `k_i`
//! leaves either unchanged (amplitude `t`) or in the second solution of
//! energy and momentum conservation, `(p_f2, k_f2)` (amplitude `r`).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use crate::model::{wrap_angle, ModelParams, Momentum};

/// Velocity mismatch below which a point counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Energy residual accepted for the inelastic branch before trying the
/// other arccos root.
pub const BRANCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterOutcome {
    pub t: Complex64,
    pub r: Complex64,
    pub p_f2: Momentum,
    pub k_f2: Momentum,
    /// `Δ_i = ω̃_{K_i,p_i} - E_{K_i,Δ}`.
    pub detuning: f64,
    /// Signed width `Γ_i = Ω² / (2[J sin p_i - J' sin k_i])`; infinite when degenerate.
    pub gamma: f64,
    /// Photon and qubit group velocities coincide; `t = 0`, `r = -1` by the
    /// `Γ_i → ∞` limit.
    pub degenerate: bool,
    /// The signed arccos root violated energy conservation and the other
    /// root was taken instead.
    pub branch_corrected: bool,
}

impl ScatterOutcome {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

/// Half the relative group velocity, `J sin p - J' sin k`.
#[inline]
fn velocity_mismatch(params: &ModelParams, k: f64, p: f64) -> f64 {
    params.j * p.sin() - params.jp * k.sin()
}

/// Inelastic final photon momentum from the arccos closed form with its sign
/// prefactor, verified against energy conservation.
fn inelastic_momentum(params: &ModelParams, k: f64, p: f64, degenerate: bool) -> (f64, bool) {
    let kt = k + p;
    let z = params.z(kt);
    let z2 = z.norm_sqr();
    let dv = params.qubit_velocity(k) - params.photon_velocity(p);
    let energy = params.effective_band(kt, p);

    if z2 == 0.0 {
        // flat band: every momentum is on shell, keep the static reflection
        return (wrap_angle(-p), false);
    }
    let cos_part = z2 * p.cos() - params.jp * kt.sin() * dv;
    // arccos(cos_part / |z|²) evaluated through atan2 with the matching sine,
    // which stays accurate where the cosine is close to ±1
    let zz = z * z;
    let sin_part = p.sin() * zz.re + p.cos() * zz.im;
    let magnitude = sin_part.abs().atan2(cos_part);
    let prefactor = z2 * p.sin() + dv * z.re;
    let sign = if prefactor < 0.0 { -1.0 } else { 1.0 };

    let conserves = |q: f64| (params.effective_band(kt, q) - energy).abs() <= BRANCH_TOL;
    let is_trivial = |q: f64| wrap_angle(q - p).abs() <= 1e-9;
    let primary = sign * magnitude;
    let secondary = -primary;

    let ok = |q: f64| conserves(q) && (degenerate || !is_trivial(q) || is_trivial(-q));
    if ok(primary) {
        (wrap_angle(primary), false)
    } else if ok(secondary) {
        (wrap_angle(secondary), true)
    } else {
        // Should not happen; keep whichever root has the smaller residual.
        let r1 = (params.effective_band(kt, primary) - energy).abs();
        let r2 = (params.effective_band(kt, secondary) - energy).abs();
        if r2 < r1 {
            (wrap_angle(secondary), true)
        } else {
            (wrap_angle(primary), false)
        }
    }
}

/// Scattering amplitudes and the inelastic final momenta for an incoming
/// photon `p_i` and ground-state qubit `k_i`.
pub fn scatter(params: &ModelParams, k_i: Momentum, p_i: Momentum) -> ScatterOutcome {
    let (k, p) = (k_i.value(), p_i.value());
    let kt = k + p;
    let detuning = params.effective_band(kt, p) - params.effective_gap(kt);
    let mismatch = velocity_mismatch(params, k, p);
    let degenerate = mismatch.abs() <= DEGENERACY_TOL * params.j;
    let om2 = params.omega * params.omega;

    let (t, r, gamma) = if om2 == 0.0 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0)
    } else if degenerate {
        (Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0), f64::INFINITY)
    } else {
        let gamma = om2 / (2.0 * mismatch);
        let denom = Complex64::new(detuning, gamma);
        (
            Complex64::new(detuning, 0.0) / denom,
            Complex64::new(0.0, -gamma) / denom,
            gamma,
        )
    };

    let (p_f2, branch_corrected) = if degenerate {
        (wrap_angle(p), false)
    } else {
        inelastic_momentum(params, k, p, degenerate)
    };
    ScatterOutcome {
        t,
        r,
        p_f2: Momentum::new(p_f2),
        k_f2: Momentum::new(kt - p_f2),
        detuning,
        gamma,
        degenerate,
        branch_corrected,
    }
}

/// One row of a scattering map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRow {
    pub k_i: f64,
    pub p_i: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
    pub p_f2: f64,
    pub k_f2: f64,
    /// Change of qubit motional energy in the inelastic channel.
    pub de_qb: f64,
    pub degenerate: bool,
}

/// Evenly spaced points on `[-π, π]`, both ends included.
pub fn closed_axis(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64)
        .collect()
}

/// Scattering over an `n_k × n_p` grid covering `[-π, π]²`, row-major in
/// `k_i`. Degenerate points are kept and flagged.
pub fn sweep_scattering(params: &ModelParams, n_k: usize, n_p: usize) -> Vec<ScatterRow> {
    let ks = closed_axis(n_k);
    let ps = closed_axis(n_p);
    ks.par_iter()
        .flat_map_iter(|&k| {
            ps.iter().map(move |&p| {
                let out = scatter(params, Momentum::new(k), Momentum::new(p));
                ScatterRow {
                    k_i: k,
                    p_i: p,
                    t: out.t,
                    r: out.r,
                    transmission: out.transmission(),
                    reflection: out.reflection(),
                    p_f2: out.p_f2.value(),
                    k_f2: out.k_f2.value(),
                    de_qb: params.qubit_energy(out.k_f2.value()) - params.qubit_energy(k),
                    degenerate: out.degenerate,
                }
            })
        })
        .collect()
}
