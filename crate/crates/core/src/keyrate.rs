//! Secret key rates for BB84 with and without the extinction-ratio
//! correction, plus the fiber/detector model used to evaluate the decoy
//! state rates against distance.
//!
//! The leaked isotropic noise ½Î is invariant under every unitary, so an
//! eavesdropper learns nothing from it. Only the fraction 1 − 2p of the
//! single-photon errors needs privacy amplification; error correction still
//! pays for the full observed QBER.

use crate::error::{Error, Result};
use crate::qmath::entropy;
use crate::state_model::ExtinctionModel;

/// Error-correction inefficiency f(E_μ).
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorCorrection {
    Constant(f64),
    /// Piecewise-linear in E_μ over (qber, f) knots sorted by qber; flat
    /// beyond the first and last knot.
    Table(Vec<(f64, f64)>),
}

impl Default for ErrorCorrection {
    fn default() -> Self {
        ErrorCorrection::Constant(DEFAULT_F_EC)
    }
}

pub const DEFAULT_F_EC: f64 = 1.22;

impl ErrorCorrection {
    pub fn efficiency(&self, qber: f64) -> f64 {
        match self {
            ErrorCorrection::Constant(f) => *f,
            ErrorCorrection::Table(knots) => {
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if qber <= first.0 {
                    return first.1;
                }
                if qber >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|k| k.0 <= qber);
                let (lo, hi) = (knots[i - 1], knots[i]);
                lo.1 + (hi.1 - lo.1) * (qber - lo.0) / (hi.0 - lo.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ErrorCorrection::Constant(f) if *f >= 1.0 => Ok(()),
            ErrorCorrection::Constant(f) => Err(Error::Domain(format!("f_ec = {f} must be at least 1"))),
            ErrorCorrection::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::Domain("f_ec table is empty".into()));
                }
                if knots.iter().any(|&(q, f)| !(0.0..=1.0).contains(&q) || !(f >= 1.0)) {
                    return Err(Error::Domain("f_ec table needs qber in [0,1] and f >= 1".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Domain("f_ec table qber keys must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }
}

/// Fiber link and detector parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    /// Background yield Y₀ per pulse.
    pub y0: f64,
    /// Receiver-side detection efficiency.
    pub eta_bob: f64,
    /// Fiber loss in dB/km.
    pub alpha_fiber: f64,
    /// Systematic error probability of the optics, including modulator leakage.
    pub e_detect: f64,
    /// Error rate of background counts.
    pub e0: f64,
    /// Mean photon number of signal pulses.
    pub mu: f64,
    /// Sifting efficiency.
    pub q: f64,
    pub f_ec: ErrorCorrection,
}

impl ChannelProfile {
    /// Stand-in long-haul profile used by the examples and tests:
    /// Y₀ = 1.7e-6, η_Bob = 4.5%, 0.21 dB/km, e_detect = 3.3%, μ = 0.48.
    pub fn example() -> Self {
        ChannelProfile {
            y0: 1.7e-6,
            eta_bob: 0.045,
            alpha_fiber: 0.21,
            e_detect: 0.033,
            e0: 0.5,
            mu: 0.48,
            q: 0.5,
            f_ec: ErrorCorrection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, x: f64| {
            if x.is_finite() && (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {x} must lie in [0, 1]")))
            }
        };
        prob("y0", self.y0)?;
        prob("eta_bob", self.eta_bob)?;
        prob("e_detect", self.e_detect)?;
        prob("e0", self.e0)?;
        prob("q", self.q)?;
        if !(self.alpha_fiber >= 0.0) || !self.alpha_fiber.is_finite() {
            return Err(Error::Domain(format!("fiber loss {} dB/km must be non-negative", self.alpha_fiber)));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Domain(format!("mu = {} must be positive", self.mu)));
        }
        self.f_ec.validate()
    }
}

/// Quantities entering the decoy-state rates at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyObservables {
    /// Overall transmittance η including the receiver.
    pub eta: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    pub y1: f64,
    pub q1: f64,
    /// Upper bound on the single-photon QBER.
    pub e1_upper: f64,
    /// The same bound with the modulator noise removed from e_detect.
    pub e1_mod: f64,
}

/// GLLP rate 1 − 2H(e₁) for ideal single photons.
pub fn gllp_rate(e1: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&e1) {
        return Err(Error::Domain(format!("QBER {e1} outside [0, 1/2]")));
    }
    Ok(1.0 - 2.0 * entropy(e1)?)
}

/// 1 − H(e′) − (1−2p)·H((e′−p)/(1−2p)) at observed QBER e′.
pub fn modified_single_photon_rate(e1_prime: f64, em: &ExtinctionModel) -> Result<f64> {
    let p = em.p();
    if e1_prime < p {
        return Err(Error::NoiseFloor { what: "observed QBER", value: e1_prime, floor: p });
    }
    if e1_prime > 0.5 {
        return Err(Error::Domain(format!("QBER {e1_prime} exceeds 1/2")));
    }
    let intrinsic = ((e1_prime - p) / (1.0 - 2.0 * p)).min(0.5);
    Ok(1.0 - entropy(e1_prime)? - (1.0 - 2.0 * p) * entropy(intrinsic)?)
}

/// η_Bob · 10^(−α·L/10).
pub fn eta_of_distance(profile: &ChannelProfile, distance_km: f64) -> Result<f64> {
    if !(distance_km >= 0.0) {
        return Err(Error::Domain(format!("distance {distance_km} km must be non-negative")));
    }
    Ok(profile.eta_bob * 10f64.powf(-profile.alpha_fiber * distance_km / 10.0))
}

fn check_floor(profile: &ChannelProfile, em: &ExtinctionModel) -> Result<()> {
    if profile.e_detect < em.p() {
        return Err(Error::NoiseFloor { what: "e_detect", value: profile.e_detect, floor: em.p() });
    }
    Ok(())
}

/// Closed-form gains, error rates and single-photon bounds under the yield
/// model Yᵢ = Y₀ + 1 − (1−η)ⁱ.
pub fn decoy_observables(profile: &ChannelProfile, em: &ExtinctionModel, distance_km: f64) -> Result<DecoyObservables> {
    profile.validate()?;
    check_floor(profile, em)?;
    let eta = eta_of_distance(profile, distance_km)?;
    let (y0, mu, ed, e0) = (profile.y0, profile.mu, profile.e_detect, profile.e0);
    let p = em.p();

    let signal_clicks = -(-eta * mu).exp_m1();
    let q_mu = y0 + signal_clicks;
    let e_mu = if q_mu > 0.0 { (e0 * y0 + ed * signal_clicks) / q_mu } else { 0.0 };
    let y1 = y0 + eta;
    let q1 = y1 * mu * (-mu).exp();
    let (e1_upper, e1_mod) = if y1 > 0.0 {
        (
            (e0 * y0 + ed * eta) / y1,
            (y0 / 2.0 + (ed - p) / (1.0 - 2.0 * p) * eta) / y1,
        )
    } else {
        (0.0, 0.0)
    };

    Ok(DecoyObservables { eta, q_mu, e_mu, y1, q1, e1_upper, e1_mod })
}

/// Evaluates Q_μ = Σ Yᵢ e^{−μ}μⁱ/i! and E_μ = Σ Qᵢeᵢ / Q_μ term by term up to
/// `i_max`, with eᵢYᵢ = e₀Y₀ + e_detect(1 − (1−η)ⁱ).
pub fn truncated_gain_check(profile: &ChannelProfile, distance_km: f64, i_max: usize) -> Result<(f64, f64)> {
    profile.validate()?;
    if i_max < 10 {
        return Err(Error::Domain(format!("i_max = {i_max} must be at least 10")));
    }
    let eta = eta_of_distance(profile, distance_km)?;
    let (y0, mu) = (profile.y0, profile.mu);
    let mut poisson = (-mu).exp();
    let mut q_sum = 0.0;
    let mut qe_sum = 0.0;
    for i in 0..=i_max {
        if i > 0 {
            poisson *= mu / i as f64;
        }
        let detect = 1.0 - (1.0 - eta).powi(i as i32);
        let yi = y0 + detect;
        q_sum += yi * poisson;
        qe_sum += (profile.e0 * y0 + profile.e_detect * detect) * poisson;
    }
    let e_mu = if q_sum > 0.0 { qe_sum / q_sum } else { 0.0 };
    Ok((q_sum, e_mu))
}

/// R_d = q·{−Q_μ·f(E_μ)·H(E_μ) + Q₁·[1 − H(e₁ᵁ)]}.
pub fn decoy_rate(obs: &DecoyObservables, profile: &ChannelProfile) -> Result<f64> {
    let ec = obs.q_mu * profile.f_ec.efficiency(obs.e_mu) * entropy(obs.e_mu)?;
    let pa = obs.q1 * (1.0 - entropy(obs.e1_upper.min(0.5))?);
    Ok(profile.q * (pa - ec))
}

/// R_d′ = q·{−Q_μ·f(E_μ)·H(E_μ) + Q₁·[1 − ((Y₀+(1−2p)η)/(Y₀+η))·H(e₁ᵈ)]}.
pub fn decoy_rate_modified(obs: &DecoyObservables, profile: &ChannelProfile, em: &ExtinctionModel) -> Result<f64> {
    check_floor(profile, em)?;
    let p = em.p();
    let ec = obs.q_mu * profile.f_ec.efficiency(obs.e_mu) * entropy(obs.e_mu)?;
    let fraction = if obs.y1 > 0.0 { (profile.y0 + (1.0 - 2.0 * p) * obs.eta) / obs.y1 } else { 1.0 };
    let pa = obs.q1 * (1.0 - fraction * entropy(obs.e1_mod.clamp(0.0, 0.5))?);
    Ok(profile.q * (pa - ec))
}

/// Baseline and modified decoy rates at one distance.
pub fn decoy_rates(profile: &ChannelProfile, em: &ExtinctionModel, distance_km: f64) -> Result<(f64, f64)> {
    let obs = decoy_observables(profile, em, distance_km)?;
    Ok((decoy_rate(&obs, profile)?, decoy_rate_modified(&obs, profile, em)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn r500() -> ExtinctionModel {
        ExtinctionModel::from_linear(500.0).unwrap()
    }

    #[test]
    fn gllp_examples() {
        assert_eq!(gllp_rate(0.0).unwrap(), 1.0);
        assert_eq!(gllp_rate(0.5).unwrap(), -1.0);
        // 50-digit: 1.68083670944008719e-4
        assert_abs_diff_eq!(gllp_rate(0.11).unwrap(), 1.680_836_709_440_087e-4, epsilon = 1e-13);
        assert!(gllp_rate(0.51).is_err());
        assert!(gllp_rate(-0.01).is_err());
    }

    #[test]
    fn modified_rate_examples() {
        let em = r500();
        // 50-digit: 1 − H(2/503) = 0.962567643575783865...
        assert_abs_diff_eq!(modified_single_photon_rate(em.p(), &em).unwrap(), 0.962_567_643_575_783_9, epsilon = 1e-13);
        // 50-digit: −0.00871978829706215470...
        assert_abs_diff_eq!(modified_single_photon_rate(0.1137, &em).unwrap(), -0.008_719_788_297_062_155, epsilon = 1e-13);
        let perfect = ExtinctionModel::perfect();
        for e in [0.01, 0.05, 0.11, 0.3] {
            assert_abs_diff_eq!(modified_single_photon_rate(e, &perfect).unwrap(), gllp_rate(e).unwrap(), epsilon = 1e-9);
        }
        assert!(matches!(modified_single_photon_rate(0.001, &em), Err(Error::NoiseFloor { .. })));
    }

    #[test]
    fn eta_examples() {
        let mut prof = ChannelProfile::example();
        prof.eta_bob = 0.045;
        prof.alpha_fiber = 0.2;
        assert_eq!(eta_of_distance(&prof, 0.0).unwrap(), 0.045);
        assert_relative_eq!(eta_of_distance(&prof, 50.0).unwrap(), 0.0045, max_relative = 1e-14);
        prof.eta_bob = 1.0;
        prof.alpha_fiber = 0.0;
        assert_eq!(eta_of_distance(&prof, 1000.0).unwrap(), 1.0);
        assert!(eta_of_distance(&prof, -1.0).is_err());
    }

    #[test]
    fn observables_noiseless_limit() {
        let prof = ChannelProfile { y0: 0.0, e_detect: 0.0, ..ChannelProfile::example() };
        let obs = decoy_observables(&prof, &ExtinctionModel::perfect(), 10.0);
        // e_detect = 0 sits below the capped floor 2e-12
        assert!(matches!(obs, Err(Error::NoiseFloor { .. })));
        let prof = ChannelProfile { e_detect: 2.0 / (1e12 + 3.0), ..prof };
        let obs = decoy_observables(&prof, &ExtinctionModel::perfect(), 10.0).unwrap();
        assert!(obs.e_mu < 1e-11 && obs.e1_upper < 1e-11 && obs.e1_mod.abs() < 1e-11);
        assert_relative_eq!(obs.q_mu, 1.0 - (-obs.eta * prof.mu).exp(), max_relative = 1e-12);
    }

    #[test]
    fn observables_hand_example() {
        // Y₀ = 1e-5, η = 1e-3, e_detect = 0.033, r = 500
        let prof = ChannelProfile {
            y0: 1e-5,
            eta_bob: 1e-3,
            alpha_fiber: 0.0,
            e_detect: 0.033,
            ..ChannelProfile::example()
        };
        let obs = decoy_observables(&prof, &r500(), 0.0).unwrap();
        // 50-digit: 0.0376237623762376..., 0.0339173396297545586...
        assert_abs_diff_eq!(obs.e1_upper, 0.037_623_762_376_237_62, epsilon = 1e-15);
        assert_abs_diff_eq!(obs.e1_mod, 0.033_917_339_629_754_56, epsilon = 1e-15);
        assert!(obs.e1_mod <= obs.e1_upper);
        assert!(obs.q1 <= obs.q_mu);

        let perfect = ExtinctionModel::perfect();
        let obs = decoy_observables(&prof, &perfect, 0.0).unwrap();
        // the capped ratio leaves p = 2e-12, and the gap is O(p)
        assert_abs_diff_eq!(obs.e1_mod, obs.e1_upper, epsilon = 2.0 * perfect.p());
    }

    #[test]
    fn observables_floor_error() {
        let prof = ChannelProfile { e_detect: 0.003, ..ChannelProfile::example() };
        assert!(matches!(decoy_observables(&prof, &r500(), 0.0), Err(Error::NoiseFloor { .. })));
    }

    #[test]
    fn truncated_sum_examples() {
        let prof = ChannelProfile { mu: 0.5, ..ChannelProfile::example() };
        let obs = decoy_observables(&prof, &r500(), 20.0).unwrap();
        let (q, e) = truncated_gain_check(&prof, 20.0, 30).unwrap();
        assert_abs_diff_eq!(q, obs.q_mu, epsilon = 1e-12);
        assert_abs_diff_eq!(e, obs.e_mu, epsilon = 1e-12);

        let dark = ChannelProfile { eta_bob: 0.0, ..ChannelProfile::example() };
        let (q, _) = truncated_gain_check(&dark, 0.0, 20).unwrap();
        assert_abs_diff_eq!(q, dark.y0, epsilon = 1e-18);

        let ideal = ChannelProfile { y0: 0.0, eta_bob: 1.0, alpha_fiber: 0.0, ..ChannelProfile::example() };
        let (q, _) = truncated_gain_check(&ideal, 0.0, 30).unwrap();
        assert_abs_diff_eq!(q, 1.0 - (-ideal.mu).exp(), epsilon = 1e-12);

        assert!(truncated_gain_check(&prof, 0.0, 9).is_err());
    }

    /// Straight re-evaluation of the rate formula from the profile values,
    /// written independently of `decoy_observables`.
    fn spreadsheet_rate(y0: f64, eta: f64, ed: f64, mu: f64) -> f64 {
        let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        let q_mu = y0 + 1.0 - (-eta * mu).exp();
        let e_mu = (0.5 * y0 + ed * (1.0 - (-eta * mu).exp())) / q_mu;
        let q1 = (y0 + eta) * mu * (-mu).exp();
        let e1 = (0.5 * y0 + ed * eta) / (y0 + eta);
        0.5 * (-q_mu * 1.22 * h(e_mu) + q1 * (1.0 - h(e1)))
    }

    #[test]
    fn decoy_rate_examples() {
        let prof = ChannelProfile::example();
        let obs = decoy_observables(&prof, &r500(), 0.0).unwrap();
        let rd = decoy_rate(&obs, &prof).unwrap();
        assert!(rd > 0.0);
        assert_relative_eq!(rd, spreadsheet_rate(1.7e-6, 0.045, 0.033, 0.48), max_relative = 1e-12);
        // 40-digit oracle: 0.002554588081531385...
        assert_relative_eq!(rd, 0.002_554_588_081_531_385, max_relative = 1e-12);

        let zero = DecoyObservables { q1: 0.0, q_mu: 0.0, ..obs };
        assert_eq!(decoy_rate(&zero, &prof).unwrap(), 0.0);

        let clean = DecoyObservables { e_mu: 0.0, e1_upper: 0.0, ..obs };
        assert_relative_eq!(decoy_rate(&clean, &prof).unwrap(), prof.q * obs.q1, max_relative = 1e-15);
    }

    #[test]
    fn modified_decoy_rate_examples() {
        let prof = ChannelProfile::example();
        let em = r500();
        let obs = decoy_observables(&prof, &em, 0.0).unwrap();
        // 40-digit oracle: 0.002688810815945397...
        assert_relative_eq!(decoy_rate_modified(&obs, &prof, &em).unwrap(), 0.002_688_810_815_945_397, max_relative = 1e-12);

        let perfect = ExtinctionModel::perfect();
        let obs_p = decoy_observables(&prof, &perfect, 30.0).unwrap();
        assert_abs_diff_eq!(
            decoy_rate_modified(&obs_p, &prof, &perfect).unwrap(),
            decoy_rate(&obs_p, &prof).unwrap(),
            epsilon = 1e-12
        );

        // Y₀ = 0: the privacy-amplification fraction is exactly 1 − 2p
        let dark_free = ChannelProfile { y0: 0.0, ..prof.clone() };
        let obs = decoy_observables(&dark_free, &em, 10.0).unwrap();
        let ec = obs.q_mu * 1.22 * entropy(obs.e_mu).unwrap();
        let expected = 0.5 * (obs.q1 * (1.0 - (1.0 - 2.0 * em.p()) * entropy(obs.e1_mod).unwrap()) - ec);
        assert_relative_eq!(decoy_rate_modified(&obs, &dark_free, &em).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn error_correction_table() {
        let table = ErrorCorrection::Table(vec![(0.01, 1.16), (0.05, 1.22), (0.1, 1.35)]);
        table.validate().unwrap();
        assert_eq!(table.efficiency(0.0), 1.16);
        assert_abs_diff_eq!(table.efficiency(0.03), 1.19, epsilon = 1e-15);
        assert_abs_diff_eq!(table.efficiency(0.075), 1.285, epsilon = 1e-15);
        assert_eq!(table.efficiency(0.4), 1.35);
        assert!(ErrorCorrection::Table(vec![(0.05, 1.2), (0.01, 1.3)]).validate().is_err());
        assert!(ErrorCorrection::Constant(0.9).validate().is_err());
    }

    #[test]
    fn rate_grows_as_extinction_worsens_at_fixed_observed_qber() {
        // ∂R/∂p > 0 at fixed e′, checked by central differences in p
        for e in [0.03, 0.06, 0.1, 0.11] {
            let mut prev = f64::NEG_INFINITY;
            for r in [1e6, 1e4, 1000.0, 500.0, 200.0, 100.0] {
                let rate = modified_single_photon_rate(e, &ExtinctionModel::from_linear(r).unwrap()).unwrap();
                assert!(rate > prev, "e={e} r={r}");
                prev = rate;
            }
        }
    }

    proptest! {
        #[test]
        fn single_photon_uplift(e in 0.004..0.5f64, r in 2.0..1e6f64) {
            let em = ExtinctionModel::from_linear(r).unwrap();
            prop_assume!(e >= em.p());
            let modified = modified_single_photon_rate(e, &em).unwrap();
            prop_assert!(modified >= gllp_rate(e).unwrap() - 1e-12);
        }

        #[test]
        fn decoy_uplift(ed in 0.004..0.5f64, y0 in 0.0..1e-4f64, eta_bob in 1e-3..1.0f64, dist in 0.0..200.0f64, r in 500.0..1e5f64) {
            let em = ExtinctionModel::from_linear(r).unwrap();
            let prof = ChannelProfile { y0, eta_bob, e_detect: ed, ..ChannelProfile::example() };
            let (rd, rm) = decoy_rates(&prof, &em, dist).unwrap();
            prop_assert!(rm >= rd - 1e-12);
        }

        #[test]
        fn gain_truncation_bound(mu in 0.05..1.0f64, dist in 0.0..150.0f64, i_max in prop::sample::select(vec![10usize, 20, 30])) {
            let prof = ChannelProfile { mu, ..ChannelProfile::example() };
            let obs = decoy_observables(&prof, &r500(), dist).unwrap();
            let (q, e) = truncated_gain_check(&prof, dist, i_max).unwrap();
            let mut bound = (-mu).exp();
            for k in 1..=i_max { bound *= mu / k as f64; }
            prop_assert!((q - obs.q_mu).abs() <= bound + 1e-12);
            prop_assert!((e - obs.e_mu).abs() <= bound + 1e-12);
        }
    }
}
