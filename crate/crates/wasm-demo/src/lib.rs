//! Browser bindings for the `imqkd` curves.
//!
//! Each export returns a flat `Float64Array`. Curves come as a two-value
//! header (baseline limit, modified limit) followed by `(x, baseline,
//! modified)` triples. The plain-Rust `*_impl` functions back the exports so
//! the logic can be tested off the browser.

use imqkd::analysis::{max_distance, max_tolerable_qber, sweep, SweepSpec, SweepVariable};
use imqkd::coupler_oracle::{compare_to_closed_form, CouplerScenario, PhaseConvention};
use imqkd::keyrate::ChannelProfile;
use imqkd::state_model::{ExtinctionModel, PulseParams};
use wasm_bindgen::prelude::*;

fn flatten(limits: (f64, f64), points: &[imqkd::analysis::RatePoint]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 + 3 * points.len());
    out.extend([limits.0, limits.1]);
    for pt in points {
        out.extend([pt.x, pt.rate_baseline.max(0.0), pt.rate_modified.max(0.0)]);
    }
    out
}

pub fn qber_curve_impl(r_db: f64, stop: f64, step: f64) -> imqkd::Result<Vec<f64>> {
    let em = ExtinctionModel::from_db(r_db)?;
    let thr = max_tolerable_qber(&em)?;
    let spec = SweepSpec { variable: SweepVariable::Qber, start: em.p(), stop, step, em };
    Ok(flatten((thr.baseline, thr.modified), &sweep(&spec)?))
}

#[allow(clippy::too_many_arguments)]
pub fn distance_curve_impl(
    r_db: f64,
    y0: f64,
    eta_bob: f64,
    alpha_db_per_km: f64,
    e_detect: f64,
    mu: f64,
    stop_km: f64,
    step_km: f64,
) -> imqkd::Result<Vec<f64>> {
    let em = ExtinctionModel::from_db(r_db)?;
    let profile = ChannelProfile { y0, eta_bob, alpha_fiber: alpha_db_per_km, e_detect, mu, ..ChannelProfile::example() };
    profile.validate()?;
    let lim = max_distance(&profile, &em)?;
    let spec = SweepSpec { variable: SweepVariable::Distance(profile), start: 0.0, stop: stop_km, step: step_km, em };
    Ok(flatten((lim.baseline_km, lim.modified_km), &sweep(&spec)?))
}

/// `[ideal fit, ideal closed form, noise fit, noise closed form, trace distance,
/// ρ_HH, ρ_VV, single-photon weight]`
pub fn coupler_report_impl(r_db: f64, mu: f64, strict: bool, grid: usize) -> imqkd::Result<Vec<f64>> {
    let em = ExtinctionModel::from_db(r_db)?;
    let convention = if strict { PhaseConvention::Strict } else { PhaseConvention::UnitPhase };
    let sc = CouplerScenario::new(PulseParams::new(mu, &em)?, convention).with_grid(grid)?;
    let rep = compare_to_closed_form(&sc)?;
    let avg = imqkd::coupler_oracle::phase_averaged_state(&sc)?;
    Ok(vec![
        rep.ideal_weight_fit,
        rep.ideal_weight_closed_form,
        rep.noise_weight_fit,
        rep.noise_weight_closed_form,
        rep.trace_distance,
        avg.state.entry(0, 0).re,
        avg.state.entry(1, 1).re,
        rep.single_photon_weight,
    ])
}

fn js<T>(r: imqkd::Result<T>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Asymptotic rate against QBER, from the noise floor up to `stop`.
#[wasm_bindgen]
pub fn qber_curve(r_db: f64, stop: f64, step: f64) -> Result<Vec<f64>, JsValue> {
    js(qber_curve_impl(r_db, stop, step))
}

/// Decoy-state rate against distance for a channel.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn distance_curve(
    r_db: f64,
    y0: f64,
    eta_bob: f64,
    alpha_db_per_km: f64,
    e_detect: f64,
    mu: f64,
    stop_km: f64,
    step_km: f64,
) -> Result<Vec<f64>, JsValue> {
    js(distance_curve_impl(r_db, y0, eta_bob, alpha_db_per_km, e_detect, mu, stop_km, step_km))
}

/// Phase-averaged coupler output against the closed-form mixture.
#[wasm_bindgen]
pub fn coupler_report(r_db: f64, mu: f64, strict: bool, grid: usize) -> Result<Vec<f64>, JsValue> {
    js(coupler_report_impl(r_db, mu, strict, grid))
}
