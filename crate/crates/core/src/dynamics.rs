//! Spontaneous emission in the single-excitation sector.
//!
//! Every total momentum block evolves independently through one dense
//! eigendecomposition, so the propagator is exact at any time.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::block::{diagonalize, BlockEigen};
use crate::error::{Result, WqedError};
use crate::model::{wrap_angle, ModelParams, Momentum, MomentumGrid};
use crate::roots::bracketed_root;

/// Per-block quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct KBlockState {
    pub k: Momentum,
    pub psi_e: Complex64,
    /// Photon amplitudes `φ_K(p_n)` on the momentum grid.
    pub phi: Vec<Complex64>,
}

impl KBlockState {
    pub fn norm_sqr(&self) -> f64 {
        self.psi_e.norm_sqr() + self.phi.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KBlockTrajectory {
    pub k: Momentum,
    pub times: Vec<f64>,
    pub states: Vec<KBlockState>,
}

impl KBlockTrajectory {
    pub fn excited_population(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.psi_e.norm_sqr()).collect()
    }

    /// Index of the sample at time `t`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        find_time(&self.times, t)
    }
}

fn find_time(times: &[f64], t: f64) -> Result<usize> {
    times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
        .ok_or_else(|| WqedError::NotApplicable(format!("time {t} was not sampled")))
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(WqedError::InvalidParams("no sample times given".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(WqedError::InvalidParams("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(WqedError::InvalidParams("times must be sorted".into()));
    }
    Ok(())
}

fn split_state(k: f64, v: Vec<Complex64>) -> KBlockState {
    let mut v = v;
    let phi = v.split_off(1);
    KBlockState {
        k: Momentum::new(k),
        psi_e: v[0],
        phi,
    }
}

/// Evolves an arbitrary block state (ordering: excited, then photons).
pub fn evolve_block_state(
    params: &ModelParams,
    k_total: Momentum,
    initial: &[Complex64],
    times: &[f64],
    budget: usize,
) -> Result<KBlockTrajectory> {
    validate_times(times)?;
    if initial.len() != params.l + 1 {
        return Err(WqedError::InvalidParams(format!(
            "initial block state has {} entries, expected {}",
            initial.len(),
            params.l + 1
        )));
    }
    let eig = diagonalize(params, k_total.value(), budget)?;
    let coeffs = eig.project(initial);
    let states = eig
        .evolve(&coeffs, times)
        .into_iter()
        .map(|v| split_state(k_total.value(), v))
        .collect();
    Ok(KBlockTrajectory {
        k: k_total,
        times: times.to_vec(),
        states,
    })
}

/// Evolves the bare excited state `|K⟩`.
pub fn evolve_fixed_k(
    params: &ModelParams,
    k_total: Momentum,
    times: &[f64],
    budget: usize,
) -> Result<KBlockTrajectory> {
    let mut initial = vec![Complex64::default(); params.l + 1];
    initial[0] = Complex64::new(1.0, 0.0);
    evolve_block_state(params, k_total, &initial, times, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonSpectrum {
    pub p: Vec<f64>,
    pub n_p: Vec<f64>,
    /// `(N_{p>0} - N_{p<0}) / (N_{p>0} + N_{p<0})`; the modes `p = 0` and
    /// `p = -π` are their own mirror images and are left out.
    pub directionality: f64,
}

pub fn photon_spectrum_and_directionality(traj: &KBlockTrajectory, t: f64) -> Result<PhotonSpectrum> {
    let idx = traj.time_index(t)?;
    let phi = &traj.states[idx].phi;
    let grid = MomentumGrid::new(phi.len());
    let p = grid.values();
    let n_p: Vec<f64> = phi.iter().map(|a| a.norm_sqr()).collect();
    let half = phi.len() / 2;
    // p_n and p_{L-n} are mirror images; n = 0 (p = -π) and n = L/2 (p = 0) are not paired
    let (mut right, mut left) = (0.0, 0.0);
    for n in 1..half {
        left += n_p[n];
        right += n_p[phi.len() - n];
    }
    let total = right + left;
    if total == 0.0 {
        return Err(WqedError::NotApplicable(
            "no emitted photons, directionality undefined".into(),
        ));
    }
    Ok(PhotonSpectrum {
        p,
        n_p,
        directionality: (right - left) / total,
    })
}

/// Whether the effective qubit level lies inside the effective band.
pub fn is_embedded(params: &ModelParams, k_total: f64) -> bool {
    params.effective_gap(k_total).abs() <= params.band_halfwidth(k_total)
}

/// The two photon momenta on shell with the effective qubit level, labelled
/// `(p_+, p_-)`.
///
/// Both roots come from `-2|z| cos(p + arg z) = E_{K,Δ}`. The `p_+` label goes
/// to the root whose tangent matches
/// `(-2 Im z² + E √(4|z|² - E²)) / (E² - 4J'² sin² K)`.
pub fn asymptotic_momenta(params: &ModelParams, k_total: Momentum) -> Result<(f64, f64)> {
    let kt = k_total.value();
    let z = params.z(kt);
    let e = params.effective_gap(kt);
    let edge = 2.0 * z.norm();
    if !(e.abs() <= edge) || edge == 0.0 {
        return Err(WqedError::NotEmbedded { energy: e, edge });
    }
    let theta = z.arg();
    let a = (-e / edge).clamp(-1.0, 1.0).acos();
    let roots = [wrap_angle(a - theta), wrap_angle(-a - theta)];

    let width = ((edge - e.abs()) * (edge + e.abs())).sqrt();
    let num = -2.0 * (z * z).im + e * width;
    let den = e * e - 4.0 * (params.jp * kt.sin()).powi(2);
    let alpha = num.atan2(den);
    // distance modulo π
    let dist = |p: f64| wrap_angle(2.0 * (p - alpha)).abs();
    if dist(roots[0]) <= dist(roots[1]) {
        Ok((roots[0], roots[1]))
    } else {
        Ok((roots[1], roots[0]))
    }
}

/// Golden-rule decay rate `2Ω² / √(4|z|² - E²_{K,Δ})`.
pub fn markov_rate(params: &ModelParams, k_total: Momentum) -> Result<f64> {
    let kt = k_total.value();
    let e = params.effective_gap(kt);
    let edge = params.band_halfwidth(kt);
    if e.abs() > edge {
        return Err(WqedError::NotEmbedded { energy: e, edge });
    }
    if e.abs() == edge {
        return Err(WqedError::BandEdgeSingularity { energy: e, edge });
    }
    let width = ((edge - e.abs()) * (edge + e.abs())).sqrt();
    Ok(2.0 * params.omega * params.omega / width)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Every `K` decays.
    AllEmit,
    /// No `K` decays.
    NoEmission,
    /// Only a window of momenta decays.
    KSelective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionWindows {
    pub delta: f64,
    pub jp: f64,
    pub regime: Regime,
    /// Connected components `[K_a, K_b]` of the embedded set; a component
    /// through `K = π` is reported with `K_b > π`.
    pub windows: Vec<(f64, f64)>,
    /// Embedded length within `K ∈ [0, π]` where `E_{K,Δ} < 0`.
    pub w_minus: f64,
    /// Embedded length within `K ∈ [0, π]` where `E_{K,Δ} ≥ 0`.
    pub w_plus: f64,
    /// Embedded fraction of `[0, π]`.
    pub embedded_fraction: f64,
    /// Exact threshold `J'` for `Δ ≤ -2J`, from the first touching of level and band.
    pub jc_minus: Option<f64>,
    /// Exact threshold `J'` for `Δ ≥ 2J`.
    pub jc_plus: Option<f64>,
    /// Second-order estimate `√(-ΔJ - 2J²)`.
    pub jc_minus_perturbative: Option<f64>,
    /// `Δ/4 - J/2`.
    pub jc_plus_perturbative: Option<f64>,
}

/// Scan resolution for locating window endpoints before refinement.
const WINDOW_SCAN: usize = 4096;

/// `2|z| - |E|`, nonnegative exactly on the embedded set.
fn embedding_margin(params: &ModelParams, k: f64) -> f64 {
    params.band_halfwidth(k) - params.effective_gap(k).abs()
}

fn refine_crossing(params: &ModelParams, a: f64, b: f64) -> f64 {
    let f = |k: f64| embedding_margin(params, k);
    match bracketed_root(f, a, b, |_| 0.0) {
        Ok(r) => r.x,
        Err(_) => 0.5 * (a + b),
    }
}

/// Sign changes of the margin on `[lo, hi]`, refined to full precision.
fn margin_crossings(params: &ModelParams, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut prev_k = lo;
    let mut prev = embedding_margin(params, lo) >= 0.0;
    for i in 1..=n {
        let k = lo + step * i as f64;
        let cur = embedding_margin(params, k) >= 0.0;
        if cur != prev {
            out.push(refine_crossing(params, prev_k, k));
        }
        prev = cur;
        prev_k = k;
    }
    out
}

/// Largest embedding margin over `K`, in closed form: with `c = cos K`,
/// `4|z|² - E² = 4(J² + J'²) - Δ² + 4J'(2J + Δ)c - 4J'²c²` is a concave
/// quadratic in `c ∈ [-1, 1]`.
fn max_margin_sq(j: f64, jp: f64, delta: f64) -> f64 {
    let h = |c: f64| 4.0 * (j * j + jp * jp) - delta * delta + 4.0 * jp * (2.0 * j + delta) * c
        - 4.0 * jp * jp * c * c;
    if jp == 0.0 {
        return h(0.0);
    }
    let vertex = ((2.0 * j + delta) / (2.0 * jp)).clamp(-1.0, 1.0);
    h(vertex).max(h(-1.0)).max(h(1.0))
}

/// Smallest `J'` at which some `K` becomes embedded, for a level outside the
/// static band.
fn critical_coupling(j: f64, delta: f64) -> Option<f64> {
    if delta.abs() < 2.0 * j {
        return None;
    }
    if max_margin_sq(j, 0.0, delta) >= 0.0 {
        return Some(0.0);
    }
    let mut hi = delta.abs().max(j);
    while max_margin_sq(j, hi, delta) < 0.0 {
        hi *= 2.0;
    }
    let root = bracketed_root(|jp| max_margin_sq(j, jp, delta), 0.0, hi, |_| 0.0).ok()?;
    Some(root.x)
}

pub fn classify_regime_and_windows(params: &ModelParams) -> EmissionWindows {
    let (j, jp, delta) = (params.j, params.jp, params.delta);

    // components on the circle, scanning from -π
    let crossings = margin_crossings(params, -PI, PI, 2 * WINDOW_SCAN);
    let start_in = embedding_margin(params, -PI) >= 0.0;
    let mut windows = Vec::new();
    if crossings.is_empty() {
        if start_in {
            windows.push((-PI, PI));
        }
    } else {
        // pair entry/exit points; a component open at -π wraps around
        let mut points = crossings.clone();
        if start_in {
            let first_exit = points.remove(0);
            points.push(first_exit + 2.0 * PI);
        }
        for pair in points.chunks(2) {
            if let [a, b] = pair {
                windows.push((*a, *b));
            }
        }
    }

    // lengths over [0, π], split by the sign of E_{K,Δ}
    let mut breaks = vec![0.0, PI];
    breaks.extend(margin_crossings(params, 0.0, PI, WINDOW_SCAN));
    if jp > 0.0 && (delta / (2.0 * jp)).abs() <= 1.0 {
        breaks.push((delta / (2.0 * jp)).acos());
    }
    breaks.sort_by(f64::total_cmp);
    let (mut w_minus, mut w_plus) = (0.0, 0.0);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        if embedding_margin(params, mid) >= 0.0 {
            if params.effective_gap(mid) >= 0.0 {
                w_plus += b - a;
            } else {
                w_minus += b - a;
            }
        }
    }
    let embedded_fraction = (w_minus + w_plus) / PI;
    let regime = if windows.is_empty() {
        Regime::NoEmission
    } else if windows.len() == 1 && windows[0].1 - windows[0].0 >= 2.0 * PI - 1e-12 {
        Regime::AllEmit
    } else {
        Regime::KSelective
    };

    EmissionWindows {
        delta,
        jp,
        regime,
        windows,
        w_minus,
        w_plus,
        embedded_fraction,
        jc_minus: if delta <= -2.0 * j { critical_coupling(j, delta) } else { None },
        jc_plus: if delta >= 2.0 * j { critical_coupling(j, delta) } else { None },
        jc_minus_perturbative: (delta <= -2.0 * j).then(|| (-delta * j - 2.0 * j * j).sqrt()),
        jc_plus_perturbative: (delta >= 2.0 * j).then(|| delta / 4.0 - j / 2.0),
    }
}

/// All blocks of an initially localized excited qubit.
#[derive(Debug, Clone)]
pub struct LocalizedRun {
    pub params: ModelParams,
    pub x0: i64,
    /// Initial momentum amplitudes on the grid.
    pub c_k: Vec<Complex64>,
    pub times: Vec<f64>,
    /// `c_K ψ_{eK}(t)` indexed `[K][t]`.
    pub psi_e: Vec<Vec<Complex64>>,
    pub snapshot_times: Vec<f64>,
    /// Full block states indexed `[snapshot][K]`, amplitudes including `c_K`.
    pub snapshots: Vec<Vec<KBlockState>>,
}

impl LocalizedRun {
    /// `Σ_K |c_K ψ_{eK}(t)|²` at every sample time.
    pub fn excited_population(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|i| self.psi_e.iter().map(|row| row[i].norm_sqr()).sum())
            .collect()
    }
}

/// Amplitudes of a qubit localized at site `x0`: `c_K = e^{-iK x0} / √L`, so
/// that the position amplitude `L^{-1/2} Σ_K e^{iKx} c_K` is `δ_{x,x0}`.
pub fn localized_amplitudes(grid: &MomentumGrid, x0: i64) -> Vec<Complex64> {
    let norm = 1.0 / (grid.len() as f64).sqrt();
    grid.values()
        .into_iter()
        .map(|k| Complex64::from_polar(norm, -k * x0 as f64))
        .collect()
}

/// Evolves every block of `Σ_K c_K |K⟩`. Excited amplitudes are kept at all
/// `times`; full photon states only at `snapshot_times`.
pub fn evolve_localized(
    params: &ModelParams,
    x0: i64,
    times: &[f64],
    snapshot_times: &[f64],
    budget: usize,
) -> Result<LocalizedRun> {
    validate_times(times)?;
    if !snapshot_times.is_empty() {
        validate_times(snapshot_times)?;
    }
    let grid = params.grid();
    let c_k = localized_amplitudes(&grid, x0);
    let blocks: Vec<(Vec<Complex64>, Vec<KBlockState>)> = (0..grid.len())
        .into_par_iter()
        .map(|n| -> Result<_> {
            let k = grid.value(n);
            let eig: BlockEigen = diagonalize(params, k, budget)?;
            let coeffs = eig.project_excited(c_k[n]);
            let psi_e = eig.excited_amplitudes(&coeffs, times);
            let snaps = if snapshot_times.is_empty() {
                Vec::new()
            } else {
                eig.evolve(&coeffs, snapshot_times)
                    .into_iter()
                    .map(|v| split_state(k, v))
                    .collect()
            };
            Ok((psi_e, snaps))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut psi_e = Vec::with_capacity(blocks.len());
    let mut snapshots: Vec<Vec<KBlockState>> = (0..snapshot_times.len())
        .map(|_| Vec::with_capacity(grid.len()))
        .collect();
    for (amps, snaps) in blocks {
        psi_e.push(amps);
        for (slot, s) in snapshots.iter_mut().zip(snaps) {
            slot.push(s);
        }
    }
    Ok(LocalizedRun {
        params: *params,
        x0,
        c_k,
        times: times.to_vec(),
        psi_e,
        snapshot_times: snapshot_times.to_vec(),
        snapshots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionObservables {
    /// Sites `-L/2 .. L/2 - 1`.
    pub x: Vec<i64>,
    /// Photon occupation `N(x)`.
    pub n: Vec<f64>,
    /// Ground-state qubit position distribution.
    pub p_g: Vec<f64>,
    /// Excited-state qubit position distribution.
    pub p_e: Vec<f64>,
    pub p_e_total: f64,
}

/// `|Σ_m e^{i p_m x} a_m|²` for every site `x = -L/2 .. L/2-1`, where
/// `p_m = -π + 2πm/L`. The `e^{-iπx}` factor drops out of the modulus.
struct SiteTransform {
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    l: usize,
}

impl SiteTransform {
    fn new(l: usize) -> Self {
        Self {
            fft: FftPlanner::new().plan_fft_inverse(l),
            l,
        }
    }

    /// Accumulates `|transform|²` into `acc`, ordered by site from `-L/2`.
    fn accumulate(&self, buf: &mut [Complex64], acc: &mut [f64]) {
        self.fft.process(buf);
        let half = self.l / 2;
        for (i, a) in acc.iter_mut().enumerate() {
            // site x = i - L/2 sits at FFT bin x mod L
            *a += buf[(i + half) % self.l].norm_sqr();
        }
    }
}

/// `N(x)`, `P_g(x)` and `P_e(x)` at a snapshot time of the run.
pub fn position_observables(run: &LocalizedRun, t: f64) -> Result<PositionObservables> {
    let s = find_time(&run.snapshot_times, t)?;
    let ti = find_time(&run.times, t)?;
    let grid = run.params.grid();
    let l = grid.len();
    let blocks = &run.snapshots[s];
    let tf = SiteTransform::new(l);
    let inv_l = 1.0 / l as f64;

    // B(k_g, p) = φ_{k_g + p}(p)
    let joint = |a: usize, m: usize| blocks[grid.sum_index(a, m)].phi[m];

    let mut n = vec![0.0; l];
    let mut p_g = vec![0.0; l];
    let mut buf = vec![Complex64::default(); l];
    for a in 0..l {
        for (m, slot) in buf.iter_mut().enumerate() {
            *slot = joint(a, m);
        }
        tf.accumulate(&mut buf, &mut n);
    }
    for m in 0..l {
        for (a, slot) in buf.iter_mut().enumerate() {
            *slot = joint(a, m);
        }
        tf.accumulate(&mut buf, &mut p_g);
    }
    let mut p_e = vec![0.0; l];
    for (slot, row) in buf.iter_mut().zip(&run.psi_e) {
        *slot = row[ti];
    }
    tf.accumulate(&mut buf, &mut p_e);

    for v in n.iter_mut().chain(p_g.iter_mut()).chain(p_e.iter_mut()) {
        *v *= inv_l;
    }
    let half = (l / 2) as i64;
    Ok(PositionObservables {
        x: (-half..half).collect(),
        p_e_total: p_e.iter().sum(),
        n,
        p_g,
        p_e,
    })
}

/// Decay rate from a least-squares line through `ln P(t)` on `[t_lo, t_hi]`.
pub fn fit_decay_rate(times: &[f64], population: &[f64], t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(population)
        .filter(|(&t, &p)| t >= t_lo && t <= t_hi && p > 0.0)
        .map(|(&t, &p)| (t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(WqedError::NotApplicable("too few samples for a decay fit".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Indices of strict local maxima on a periodic sequence, largest first.
pub fn periodic_peaks(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] > prev && values[i] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    peaks
}

/// Sum of `values` over `center ± half_width` with periodic wrap.
pub fn window_sum(values: &[f64], center: usize, half_width: usize) -> f64 {
    let n = values.len();
    (0..=2 * half_width)
        .map(|o| values[(center + n + o - half_width) % n])
        .sum()
}

/// Default lobe-relative level that marks a front.
///
/// Near a light cone the profile has Airy form. For a δ-like start (`Ai²`) the
/// cone sits at 0.44 of the leading lobe; for a continuously fed front
/// (`(∫Ai)²`) at 0.069. Their geometric mean, 0.17, biases both cases by the
/// same ≈ 0.4 Airy units in opposite directions.
pub const FRONT_LEVEL: f64 = 0.17;

/// Minimum height of the leading lobe relative to the side maximum.
pub const FRONT_LOBE_FRACTION: f64 = 0.1;

/// Position of the outer edge of a profile on one side of the origin.
///
/// The outermost local maximum reaching `lobe_fraction` of the side's global
/// maximum marks the leading lobe; the front is where that lobe falls to
/// `level` times its height, linearly interpolated.
pub fn wavefront(
    x: &[i64],
    profile: &[f64],
    positive_side: bool,
    lobe_fraction: f64,
    level: f64,
) -> Option<f64> {
    let side: Vec<(f64, f64)> = {
        let mut v: Vec<(f64, f64)> = x
            .iter()
            .zip(profile)
            .filter(|(&x, _)| if positive_side { x > 0 } else { x < 0 })
            .map(|(&x, &y)| ((x as f64).abs(), y))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    if side.len() < 3 {
        return None;
    }
    let peak = side.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let lobe = (1..side.len() - 1)
        .rev()
        .find(|&i| side[i].1 >= lobe_fraction * peak && side[i].1 >= side[i - 1].1 && side[i].1 >= side[i + 1].1)?;
    let cut = level * side[lobe].1;
    for i in lobe..side.len() - 1 {
        let (x0, y0) = side[i];
        let (x1, y1) = side[i + 1];
        if y1 <= cut {
            let frac = if y0 == y1 { 0.0 } else { (y0 - cut) / (y0 - y1) };
            return Some(x0 + frac * (x1 - x0));
        }
    }
    None
}
