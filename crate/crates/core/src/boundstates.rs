//! Photon-emitter bound states below and above the effective band.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WqedError};
use crate::model::{self_energy, ModelParams, Momentum};
use crate::roots::bracketed_root;
use crate::scattering::closed_axis;

/// Initial offset of the inner bracket end from the band edge.
const EDGE_OFFSET: f64 = 1e-8;

/// Relative residual accepted for `F(E) = 0`.
pub const ROOT_TOL: f64 = 1e-12;

/// Half-width of the flatness fit window around `K = π`.
pub const FLATNESS_WINDOW: f64 = 0.5;
pub const FLATNESS_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// Below the band, `E < -2|z|`.
    Lower,
    /// Above the band, `E > 2|z|`.
    Upper,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub branch: Branch,
    pub k: Momentum,
    pub energy: f64,
    /// Excited-state amplitude, chosen real and positive.
    pub u: f64,
    /// Decaying pole `y_<` at the bound-state energy.
    pub y_in: Complex64,
    /// `-1 / ln|y_<|` in lattice sites; zero for a fully localized cloud.
    pub loc_length: f64,
    /// `|E| - 2|z(K)|`, kept separately because `energy` cannot resolve it
    /// for states very close to the band edge.
    pub edge_offset: f64,
    /// `√(E² - 4|z(K)|²)` evaluated from the edge offset.
    pub root_gap: f64,
    /// `F` at the accepted root.
    pub residual: f64,
}

/// `F(E) = E - E_{K,Δ} - Σ_K(E)` for `E` outside the band.
pub fn pole_function(params: &ModelParams, k_total: Momentum, e: f64) -> Result<f64> {
    let se = self_energy(params, k_total, e)?;
    if !se.is_outside_band() {
        return Err(WqedError::NotApplicable(format!(
            "F(E) is real only outside the band; |{e}| < {}",
            se.band_halfwidth
        )));
    }
    Ok(e - params.effective_gap(k_total.value()) - se.sigma.re)
}

/// Solves `F(E) = 0` on the requested side of the band.
///
/// The root is searched in the distance `δ = |E| - 2|z|` from the band edge so
/// that states hugging the edge keep full relative precision in `E² - 4|z|²`.
pub fn solve_bound_state(params: &ModelParams, k_total: Momentum, branch: Branch) -> Result<BoundState> {
    let kt = k_total.value();
    let edge = params.band_halfwidth(kt);
    let gap = params.effective_gap(kt);
    let s = branch.sign();
    let om2 = params.omega * params.omega;

    // s·F as a function of δ; increasing on (0, ∞)
    let g = |d: f64| (edge + d) - s * gap - om2 / (d * (2.0 * edge + d)).sqrt();

    let offset = if params.omega == 0.0 {
        if s * gap > edge {
            s * gap - edge
        } else {
            return Err(WqedError::NoBoundState(branch.as_str()));
        }
    } else {
        let mut inner = EDGE_OFFSET * edge.max(1.0);
        while !(g(inner) < 0.0) {
            inner *= 0.01;
            if inner == 0.0 {
                return Err(WqedError::NumericalFailure(format!(
                    "could not bracket the {branch} bound state next to the band edge {edge}"
                )));
            }
        }
        let mut outer = (params.omega + (s * gap - edge).max(0.0)).max(2.0 * inner);
        let mut grow = 0;
        while !(g(outer) > 0.0) {
            outer *= 2.0;
            grow += 1;
            if grow > 200 || !outer.is_finite() {
                return Err(WqedError::NumericalFailure(
                    "bound-state bracket failed to grow".into(),
                ));
            }
        }
        let tol = |d: f64| ROOT_TOL * (edge + d).max(1.0);
        bracketed_root(g, inner, outer, tol)?.x
    };

    let magnitude = edge + offset;
    let root_gap = (offset * (2.0 * edge + offset)).sqrt();
    let dsigma = -om2 * magnitude / root_gap.powi(3);
    let u = (1.0 / (1.0 - dsigma)).sqrt();
    // larger-modulus root of z y² + E y + z* is -(E + sign(E)√(E²-4|z|²)) / 2z
    let z = params.z(kt);
    let y_in = -s * 2.0 * z.conj() / (magnitude + root_gap);
    let modulus = y_in.norm();
    let loc_length = if modulus == 0.0 { 0.0 } else { -1.0 / modulus.ln() };
    Ok(BoundState {
        branch,
        k: k_total,
        energy: s * magnitude,
        u,
        y_in,
        loc_length,
        edge_offset: offset,
        root_gap,
        residual: s * g(offset),
    })
}

/// Position-space photon amplitudes around the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionField {
    /// Photon position minus qubit position.
    pub x: Vec<i64>,
    pub amp: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundWavefunctions {
    /// `f_K(p)` on the momentum grid (real for real `u`).
    pub f_p: Vec<f64>,
    pub field: WavefunctionField,
    /// Mean photon number per site, `(1 - u²) / L`, identical at every site.
    pub photon_density: f64,
    /// Photon weight strictly on one side of the qubit, `Σ_{x≥1} |f̃(x)|²`.
    pub one_sided_weight: f64,
    /// Closed-form total cloud weight `Σ_x |f̃(x)|²`; equals `1 - u²`.
    pub cloud_weight: f64,
}

/// Closed-form relative amplitude `f̃(x) = L^{-1/2} Σ_p e^{ipx} f_K(p)` in the
/// infinite-lattice limit.
pub fn closed_form_amplitude(params: &ModelParams, bound: &BoundState, x: i64) -> Complex64 {
    let prefactor = params.omega * bound.u / (bound.branch.sign() * bound.root_gap);
    let amp = bound.y_in.powi(x.unsigned_abs() as i32) * prefactor;
    if x < 0 {
        amp.conj()
    } else {
        amp
    }
}

pub fn bound_wavefunctions(params: &ModelParams, bound: &BoundState, x_max: usize) -> BoundWavefunctions {
    let kt = bound.k.value();
    let grid = params.grid();
    let scale = params.omega * bound.u / (params.l as f64).sqrt();
    let f_p = grid
        .values()
        .into_iter()
        .map(|p| scale / (bound.energy - params.effective_band(kt, p)))
        .collect();

    let xm = x_max as i64;
    let x: Vec<i64> = (-xm..=xm).collect();
    let amp = x.iter().map(|&x| closed_form_amplitude(params, bound, x)).collect();

    let q = bound.y_in.norm_sqr();
    let base = (params.omega * bound.u / bound.root_gap).powi(2);
    let cloud_weight = base * (1.0 + q) / (1.0 - q);
    BoundWavefunctions {
        f_p,
        field: WavefunctionField { x, amp },
        photon_density: cloud_weight / params.l as f64,
        one_sided_weight: base * q / (1.0 - q),
        cloud_weight,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandScanRow {
    pub k: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub band_min: f64,
    pub band_max: f64,
}

/// Least-squares fit `E_{K,+} - E_{π,+} ≈ c2 (K-π)² + c4 (K-π)⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessFit {
    pub c2: f64,
    pub c4: f64,
    pub window: f64,
    pub points: usize,
}

impl FlatnessFit {
    /// True when the quadratic term is negligible across the window:
    /// `|c2| ≤ 0.1 |c4| w²`.
    pub fn is_quartic(&self) -> bool {
        self.c2.abs() <= 0.1 * self.c4.abs() * self.window * self.window
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandScan {
    pub rows: Vec<BandScanRow>,
    pub flatness: FlatnessFit,
}

fn both_branches(params: &ModelParams, k: f64) -> Result<BandScanRow> {
    let km = Momentum::new(k);
    let lower = solve_bound_state(params, km, Branch::Lower)?;
    let upper = solve_bound_state(params, km, Branch::Upper)?;
    let edge = params.band_halfwidth(k);
    Ok(BandScanRow {
        k,
        e_minus: lower.energy,
        e_plus: upper.energy,
        band_min: -edge,
        band_max: edge,
    })
}

pub fn flatness_fit(params: &ModelParams, window: f64, points: usize) -> Result<FlatnessFit> {
    use std::f64::consts::PI;
    let reference = solve_bound_state(params, Momentum::new(PI), Branch::Upper)?.energy;
    // Normal equations for the two-column design [d², d⁴].
    let (mut a22, mut a24, mut a44, mut b2, mut b4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..points {
        let d = -window + 2.0 * window * i as f64 / (points - 1) as f64;
        let e = solve_bound_state(params, Momentum::new(PI + d), Branch::Upper)?.energy;
        let (d2, d4) = (d * d, d * d * d * d);
        let y = e - reference;
        a22 += d2 * d2;
        a24 += d2 * d4;
        a44 += d4 * d4;
        b2 += d2 * y;
        b4 += d4 * y;
    }
    let det = a22 * a44 - a24 * a24;
    Ok(FlatnessFit {
        c2: (b2 * a44 - b4 * a24) / det,
        c4: (a22 * b4 - a24 * b2) / det,
        window,
        points,
    })
}

/// Both bound-state branches over `n_k` points of `[-π, π]` plus the flatness
/// fit of the upper branch around `K = π`.
pub fn band_scan(params: &ModelParams, n_k: usize) -> Result<BandScan> {
    if n_k < 8 {
        return Err(WqedError::InvalidParams(format!("band scan needs n_K >= 8, got {n_k}")));
    }
    let rows = closed_axis(n_k)
        .into_par_iter()
        .map(|k| both_branches(params, k))
        .collect::<Result<Vec<_>>>()?;
    let flatness = flatness_fit(params, FLATNESS_WINDOW, FLATNESS_POINTS)?;
    Ok(BandScan { rows, flatness })
}
