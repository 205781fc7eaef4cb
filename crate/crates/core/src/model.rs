//! Physical parameters, cosine dispersions, the effective band at fixed total
//! momentum, and the analytic self-energy with its pole structure.
//!
//! All energies are in units of the photon hopping `J`, momenta are
//! dimensionless (inverse lattice spacing) and positions are integer sites.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WqedError};

/// Default number of lattice sites / momentum modes.
pub const DEFAULT_L: usize = 400;

/// Largest block dimension (`L + 1`) the dense routines accept by default.
pub const DEFAULT_SIZE_BUDGET: usize = 8193;

/// The physical parameters of the model plus the lattice size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Photon hopping.
    #[serde(rename = "J")]
    pub j: f64,
    /// Qubit hopping J'.
    #[serde(rename = "Jp")]
    pub jp: f64,
    /// Qubit level splitting.
    #[serde(rename = "Delta")]
    pub delta: f64,
    /// Photon-qubit coupling.
    #[serde(rename = "Omega")]
    pub omega: f64,
    /// Number of sites (and momentum modes); even and at least 4.
    #[serde(rename = "L")]
    pub l: usize,
}

impl ModelParams {
    pub fn new(j: f64, jp: f64, delta: f64, omega: f64, l: usize) -> Result<Self> {
        let params = Self { j, jp, delta, omega, l };
        params.validate()?;
        Ok(params)
    }

    /// Parameters in units of `J` with the default lattice size.
    pub fn with_defaults(jp: f64, delta: f64, omega: f64) -> Result<Self> {
        Self::new(1.0, jp, delta, omega, DEFAULT_L)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.j, self.jp, self.delta, self.omega]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(WqedError::InvalidParams(
                "J, Jp, Delta and Omega must be finite".into(),
            ));
        }
        if self.j <= 0.0 {
            return Err(WqedError::InvalidParams(format!("J must be > 0 (got {})", self.j)));
        }
        if self.jp < 0.0 {
            return Err(WqedError::InvalidParams(format!("Jp must be >= 0 (got {})", self.jp)));
        }
        if self.omega < 0.0 {
            return Err(WqedError::InvalidParams(format!(
                "Omega must be >= 0 (got {})",
                self.omega
            )));
        }
        if self.l < 4 || self.l % 2 != 0 {
            return Err(WqedError::InvalidParams(format!(
                "L must be even and >= 4 (got {})",
                self.l
            )));
        }
        Ok(())
    }

    pub fn with_l(self, l: usize) -> Result<Self> {
        Self::new(self.j, self.jp, self.delta, self.omega, l)
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.j, self.jp, self.delta, omega, self.l)
    }

    /// Photon dispersion `-2J cos p`.
    #[inline]
    pub fn photon_energy(&self, p: f64) -> f64 {
        -2.0 * self.j * p.cos()
    }

    /// Qubit motional dispersion `-2J' cos k`.
    #[inline]
    pub fn qubit_energy(&self, k: f64) -> f64 {
        -2.0 * self.jp * k.cos()
    }

    #[inline]
    pub fn photon_velocity(&self, p: f64) -> f64 {
        2.0 * self.j * p.sin()
    }

    #[inline]
    pub fn qubit_velocity(&self, k: f64) -> f64 {
        2.0 * self.jp * k.sin()
    }

    /// Effective band of the hybrid photon + ground-state-qubit continuum at
    /// total momentum `k_total`.
    #[inline]
    pub fn effective_band(&self, k_total: f64, p: f64) -> f64 {
        self.photon_energy(p) + self.qubit_energy(k_total - p)
    }

    /// Effective excited level at total momentum `k_total`.
    #[inline]
    pub fn effective_gap(&self, k_total: f64) -> f64 {
        self.delta + self.qubit_energy(k_total)
    }

    /// `z(K) = J + J' e^{-iK}`; the effective band is `-2 Re[z e^{ip}]`.
    #[inline]
    pub fn z(&self, k_total: f64) -> Complex64 {
        Complex64::new(self.j, 0.0) + Complex64::from_polar(self.jp, -k_total)
    }

    /// Half-width `2|z(K)|` of the effective band.
    #[inline]
    pub fn band_halfwidth(&self, k_total: f64) -> f64 {
        2.0 * self.z(k_total).norm()
    }

    pub fn grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.l)
    }
}

/// A dimensionless wavenumber wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Momentum(f64);

impl Momentum {
    pub fn new(value: f64) -> Self {
        Momentum(wrap_angle(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for Momentum {
    fn from(value: f64) -> Self {
        Momentum::new(value)
    }
}

impl Add for Momentum {
    type Output = Momentum;
    fn add(self, rhs: Momentum) -> Momentum {
        Momentum::new(self.0 + rhs.0)
    }
}

impl Sub for Momentum {
    type Output = Momentum;
    fn sub(self, rhs: Momentum) -> Momentum {
        Momentum::new(self.0 - rhs.0)
    }
}

impl Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum::new(-self.0)
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(v: f64) -> f64 {
    let r = v.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// The uniform momentum grid `p_n = -π + 2πn/L`, `n = 0..L`.
///
/// With `L` even the grid is closed under subtraction modulo 2π, so the
/// qubit momentum `K - p` of every block basis state is again a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentumGrid {
    l: usize,
}

impl MomentumGrid {
    pub fn new(l: usize) -> Self {
        assert!(l >= 2 && l % 2 == 0, "momentum grid needs an even size");
        Self { l }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.l as f64
    }

    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        -PI + self.spacing() * n as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.l).map(|n| self.value(n)).collect()
    }

    /// Grid index of `p_a + p_b`.
    #[inline]
    pub fn sum_index(&self, a: usize, b: usize) -> usize {
        (a + b + self.l / 2) % self.l
    }

    /// Grid index of `p_a - p_b`.
    #[inline]
    pub fn difference_index(&self, a: usize, b: usize) -> usize {
        (a + self.l + self.l / 2 - b) % self.l
    }

    /// Index of the grid point closest to `p` on the circle.
    pub fn nearest_index(&self, p: f64) -> usize {
        let shifted = (p + PI).rem_euclid(2.0 * PI);
        ((shifted / self.spacing()).round() as usize) % self.l
    }
}

/// All band quantities at one `(K, p)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    pub omega_p: f64,
    /// Qubit energy at `K - p`.
    pub xi_k: f64,
    pub omega_tilde: f64,
    /// Effective excited level `Δ + ξ_K`.
    pub gap: f64,
    pub v_ph: f64,
    /// Qubit velocity at `K - p`.
    pub v_qb: f64,
}

pub fn evaluate_bands(params: &ModelParams, k_total: Momentum, p: Momentum) -> BandPoint {
    let (kt, p) = (k_total.value(), p.value());
    let k = kt - p;
    let omega_p = params.photon_energy(p);
    let xi_k = params.qubit_energy(k);
    BandPoint {
        omega_p,
        xi_k,
        omega_tilde: omega_p + xi_k,
        gap: params.effective_gap(kt),
        v_ph: params.photon_velocity(p),
        v_qb: params.qubit_velocity(k),
    }
}

pub fn z_of_k(params: &ModelParams, k_total: Momentum) -> Complex64 {
    params.z(k_total.value())
}

/// Edges of the effective band and the momenta where they are reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandExtrema {
    pub e_min: f64,
    pub e_max: f64,
    pub p_min: Momentum,
    pub p_max: Momentum,
}

/// Band edges from `ω̃ = -2|z| cos(p + arg z)`.
pub fn band_extrema(params: &ModelParams, k_total: Momentum) -> BandExtrema {
    let z = z_of_k(params, k_total);
    let theta = z.arg();
    BandExtrema {
        e_min: -2.0 * z.norm(),
        e_max: 2.0 * z.norm(),
        p_min: Momentum::new(-theta),
        p_max: Momentum::new(PI - theta),
    }
}

/// Self-energy `Σ_K(E)` together with its derivative and poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyEval {
    pub sigma: Complex64,
    /// `dΣ/dE`; only defined outside the band.
    pub dsigma_de: Option<f64>,
    /// Root of `z y² + E y + z*` inside the unit circle (for `E + i0⁺` in the band).
    pub y_in: Complex64,
    /// The other root; infinite when `z(K) = 0`.
    pub y_out: Complex64,
    pub band_halfwidth: f64,
}

impl SelfEnergyEval {
    pub fn is_outside_band(&self) -> bool {
        self.dsigma_de.is_some()
    }
}

/// Roots of `z y² + E y + z* = 0` as `(small, large)` by modulus, computed
/// without cancellation. Requires `z != 0`.
fn quadratic_poles(z: Complex64, e: Complex64) -> (Complex64, Complex64) {
    let disc = (e * e - 4.0 * z.norm_sqr()).sqrt();
    let (qa, qb) = (-e - disc, -e + disc);
    let q = if qa.norm() >= qb.norm() { qa } else { qb };
    (2.0 * z.conj() / q, q / (2.0 * z))
}

/// Evaluates the retarded self-energy of the block at total momentum `k_total`.
///
/// Outside the band `Σ = sign(E) Ω² / √(E² - 4|z|²)` is real. Inside the band
/// the value is `Σ(E + i0⁺) = -iΩ² / √(4|z|² - E²)`.
pub fn self_energy(params: &ModelParams, k_total: Momentum, e: f64) -> Result<SelfEnergyEval> {
    let z = z_of_k(params, k_total);
    let edge = 2.0 * z.norm();
    let abs_e = e.abs();
    if abs_e == edge {
        return Err(WqedError::BandEdgeSingularity { energy: e, edge });
    }
    let om2 = params.omega * params.omega;
    // (|E| - 2|z|)(|E| + 2|z|) keeps precision next to the edges.
    let gap2 = (abs_e - edge) * (abs_e + edge);

    if abs_e > edge {
        let root = gap2.sqrt();
        let sigma = e.signum() * om2 / root;
        let dsigma = -om2 * abs_e / (gap2 * root);
        let (y_in, y_out) = if z.norm() == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(f64::INFINITY, 0.0))
        } else {
            quadratic_poles(z, Complex64::new(e, 0.0))
        };
        Ok(SelfEnergyEval {
            sigma: Complex64::new(sigma, 0.0),
            dsigma_de: Some(dsigma),
            y_in,
            y_out,
            band_halfwidth: edge,
        })
    } else {
        let sigma = Complex64::new(0.0, -om2 / (-gap2).sqrt());
        // Both roots lie on the unit circle; the retarded prescription decides
        // which one moves inside.
        let (a, b) = quadratic_poles(z, Complex64::new(e, 0.0));
        let eta = 1e-7 * edge.max(1.0);
        let (inside, _) = quadratic_poles(z, Complex64::new(e, eta));
        let (y_in, y_out) = if (a - inside).norm() <= (b - inside).norm() {
            (a, b)
        } else {
            (b, a)
        };
        Ok(SelfEnergyEval {
            sigma,
            dsigma_de: None,
            y_in,
            y_out,
            band_halfwidth: edge,
        })
    }
}
