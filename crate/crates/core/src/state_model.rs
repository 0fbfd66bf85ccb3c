//! The imperfect-modulator signal model.
//!
//! A finite extinction ratio r lets the three blocked paths leak power
//! 1/r relative to the open one. On the single-photon subspace the emitted
//! state becomes a mixture of the intended BB84 state and isotropic noise,
//!
//! ```text
//! ρ_signal = (r−1)/(r+3) · ρ_ideal + 4/(r+3) · ½Î
//! ```
//!
//! which is equivalent to an optical switch sending the ideal state with
//! probability 1 − 2p and the noise state with probability 2p, where
//! p = 2/(r+3). The noise contributes an error floor of p to the QBER.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::qmath::{mix, PolarizationDensityMatrix, Probability};

/// Largest linear extinction ratio represented; stands in for a perfect modulator.
pub const MAX_EXTINCTION_RATIO: f64 = 1e12;

/// Extinction ratio of the intensity modulators and the mixing weights it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionModel {
    r: f64,
    r_db: f64,
    p: f64,
    w_ideal: f64,
    w_noise: f64,
}

impl ExtinctionModel {
    /// From a power ratio in dB (r = 10^(dB/10)).
    pub fn from_db(r_db: f64) -> Result<Self> {
        if !(r_db > 0.0) || r_db.is_nan() {
            return Err(Error::Domain(format!(
                "extinction ratio {r_db} dB must be positive (r > 1)"
            )));
        }
        Self::build(10f64.powf(r_db / 10.0))
    }

    /// From the linear power ratio I_on/I_off.
    pub fn from_linear(r: f64) -> Result<Self> {
        if !(r > 1.0) || r.is_nan() {
            return Err(Error::Domain(format!("extinction ratio r = {r} must exceed 1")));
        }
        Self::build(r)
    }

    /// The capped perfect-modulator limit.
    pub fn perfect() -> Self {
        Self::build(MAX_EXTINCTION_RATIO).expect("cap is a valid ratio")
    }

    fn build(r: f64) -> Result<Self> {
        let r = r.min(MAX_EXTINCTION_RATIO);
        Ok(ExtinctionModel {
            r,
            r_db: 10.0 * r.log10(),
            p: 2.0 / (r + 3.0),
            w_ideal: (r - 1.0) / (r + 3.0),
            w_noise: 4.0 / (r + 3.0),
        })
    }

    /// Linear extinction ratio.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_db(&self) -> f64 {
        self.r_db
    }

    /// Noise floor p = 2/(r+3).
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Weight (r−1)/(r+3) of the intended state.
    pub fn w_ideal(&self) -> f64 {
        self.w_ideal
    }

    /// Weight 4/(r+3) of ½Î.
    pub fn w_noise(&self) -> f64 {
        self.w_noise
    }

    /// Relative power transmitted by an "on" modulator. Fixed at 1.
    pub fn p_on(&self) -> f64 {
        1.0
    }

    /// Relative power leaked by an "off" modulator, 1/r.
    pub fn p_off(&self) -> f64 {
        1.0 / self.r
    }
}

/// Amplitudes of the four pulses entering the coupler.
///
/// `alpha` is the amplitude on the open path, √P_on·μ/2, and `beta` the
/// leaked amplitude √P_off·μ/2 on each of the three blocked paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    mu: f64,
    alpha: f64,
    beta: f64,
}

impl PulseParams {
    /// Splits a source amplitude `mu` into four paths behind modulators
    /// with extinction model `em`.
    pub fn new(mu: f64, em: &ExtinctionModel) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("pulse amplitude mu = {mu} must be positive")));
        }
        let alpha = em.p_on().sqrt() * mu / 2.0;
        let beta = em.p_off().sqrt() * mu / 2.0;
        Ok(PulseParams { mu, alpha, beta })
    }

    /// Direct amplitudes; requires alpha > 0 and alpha ≥ beta ≥ 0.
    /// `beta = 0` is a perfect modulator, `alpha = beta` an all-leaking one.
    pub fn from_amplitudes(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta >= 0.0) || beta > alpha || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "pulse amplitudes need alpha > 0 and alpha >= beta >= 0 (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(PulseParams { mu: 2.0 * alpha, alpha, beta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// α²/β², infinite when nothing leaks.
    pub fn extinction_ratio(&self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            (self.alpha / self.beta).powi(2)
        }
    }
}

/// The four BB84 states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bb84State {
    H,
    V,
    Plus,
    Minus,
}

impl Bb84State {
    pub const ALL: [Bb84State; 4] = [Bb84State::H, Bb84State::V, Bb84State::Plus, Bb84State::Minus];

    /// Ket amplitudes on (|H⟩, |V⟩).
    pub fn ket(self) -> (Complex64, Complex64) {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Bb84State::H => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Bb84State::V => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            Bb84State::Plus => (s, s),
            Bb84State::Minus => (s, -s),
        }
    }

    pub fn density(self) -> PolarizationDensityMatrix {
        let (h, v) = self.ket();
        PolarizationDensityMatrix::pure(h, v).expect("BB84 kets are normalized")
    }
}

/// Single-photon part of the emitted signal: w_ideal·ideal + w_noise·½Î.
pub fn signal_state(
    ideal: &PolarizationDensityMatrix,
    em: &ExtinctionModel,
) -> Result<PolarizationDensityMatrix> {
    let purity = ideal.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "ideal signal must be pure, tr(rho^2) = {purity}"
        )));
    }
    let w = Probability::new(em.w_ideal())?;
    Ok(mix(ideal, &PolarizationDensityMatrix::maximally_mixed(), w))
}

/// Observed QBER e′ = (1−2p)·e₁ + p for an intrinsic error e₁ ≤ ½.
pub fn modified_qber(e1: Probability, em: &ExtinctionModel) -> Result<Probability> {
    let e1 = e1.value();
    if e1 > 0.5 {
        return Err(Error::Domain(format!("QBER {e1} exceeds 1/2")));
    }
    let p = em.p();
    Probability::new((1.0 - 2.0 * p) * e1 + p)
}

/// Inverse of [`modified_qber`]: e₁ = (e′−p)/(1−2p).
pub fn invert_qber(e1_prime: Probability, em: &ExtinctionModel) -> Result<Probability> {
    let e = e1_prime.value();
    let p = em.p();
    if e < p {
        return Err(Error::NoiseFloor { what: "observed QBER", value: e, floor: p });
    }
    if e > 0.5 {
        return Err(Error::Domain(format!("QBER {e} exceeds 1/2")));
    }
    // clamp guards the last ulp at e = 1/2
    Probability::new(((e - p) / (1.0 - 2.0 * p)).min(0.5))
}
