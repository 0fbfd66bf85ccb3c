//! Sweeps, thresholds and channel comparisons, with their CSV output.

use std::io::Write;

use crate::error::{Error, Result};
use crate::keyrate::{decoy_rates, gllp_rate, modified_single_photon_rate, ChannelProfile};
use crate::state_model::ExtinctionModel;

/// Scan step used to bracket QBER roots.
pub const QBER_SCAN_STEP: f64 = 1e-3;
/// Final bracket width of QBER roots.
pub const QBER_TOL: f64 = 1e-8;
/// Scan step used to bracket distance roots, km.
pub const DISTANCE_SCAN_STEP: f64 = 1.0;
/// Final bracket width of distance roots, km.
pub const DISTANCE_TOL: f64 = 1e-4;
/// Distances beyond this are not scanned, km.
pub const MAX_SCAN_DISTANCE: f64 = 2000.0;

/// Significant digits written to CSV.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    /// Single-photon rates against the observed QBER.
    Qber,
    /// Decoy-state rates against fiber length in km.
    Distance(ChannelProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub em: ExtinctionModel,
}

impl SweepSpec {
    /// Grid points start, start+step, … up to stop. A final partial step
    /// ending exactly at `stop` is appended when the range is not a whole
    /// number of steps.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let (start, stop, step) = (self.start, self.stop, self.step);
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(Error::Domain(format!("sweep needs start < stop (got {start}, {stop})")));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Domain(format!("sweep step {step} must be positive")));
        }
        let span = (stop - start) / step;
        if span > 1e7 {
            return Err(Error::Domain(format!("sweep of {span:.0} points is too large")));
        }
        let whole = (span + 1e-9).floor() as usize;
        let mut xs: Vec<f64> = (0..=whole).map(|k| start + k as f64 * step).collect();
        let last = *xs.last().expect("grid is non-empty");
        if stop - last > 1e-9 * step {
            xs.push(stop);
        } else if let Some(x) = xs.last_mut() {
            *x = x.min(stop);
        }
        Ok(xs)
    }
}

/// One sweep sample. Rates are raw and may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub x: f64,
    pub rate_baseline: f64,
    pub rate_modified: f64,
}

/// Evaluates baseline and modified rates at every grid point, in order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<RatePoint>> {
    let xs = spec.grid()?;
    let em = &spec.em;
    match &spec.variable {
        SweepVariable::Qber => {
            if spec.start < em.p() {
                return Err(Error::NoiseFloor { what: "sweep start", value: spec.start, floor: em.p() });
            }
            if spec.stop > 0.5 {
                return Err(Error::Domain(format!("QBER sweep stop {} exceeds 1/2", spec.stop)));
            }
            xs.into_iter()
                .map(|x| {
                    Ok(RatePoint {
                        x,
                        rate_baseline: gllp_rate(x)?,
                        rate_modified: modified_single_photon_rate(x, em)?,
                    })
                })
                .collect()
        }
        SweepVariable::Distance(profile) => {
            if spec.start < 0.0 {
                return Err(Error::Domain(format!("distance sweep start {} is negative", spec.start)));
            }
            xs.into_iter()
                .map(|x| {
                    let (rate_baseline, rate_modified) = decoy_rates(profile, em, x)?;
                    Ok(RatePoint { x, rate_baseline, rate_modified })
                })
                .collect()
        }
    }
}

/// Bisection on a sign-changing bracket until its width is at most `tol`.
/// Returns the midpoint of the final bracket.
pub fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]")));
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First positive-to-non-positive crossing of `f` on [start, end], found by
/// scanning with `step` and refining with bisection.
pub fn first_crossing<F>(start: f64, end: f64, step: f64, tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(start)?;
    if !(f0 > 0.0) {
        return Err(Error::NoRoot(format!("rate {f0:e} is not positive at {start}")));
    }
    let mut lo = start;
    loop {
        let hi = (lo + step).min(end);
        if f(hi)? <= 0.0 {
            return bisect(lo, hi, tol, &mut f);
        }
        if hi >= end {
            return Err(Error::NoRoot(format!("rate stays positive up to {end}")));
        }
        lo = hi;
    }
}

/// Largest observed QBER with a positive key rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberThresholds {
    pub modified: f64,
    pub baseline: f64,
}

/// Roots of the GLLP rate on (0, ½) and of the modified rate on (p, ½).
pub fn max_tolerable_qber(em: &ExtinctionModel) -> Result<QberThresholds> {
    max_tolerable_qber_with_step(em, QBER_SCAN_STEP)
}

pub fn max_tolerable_qber_with_step(em: &ExtinctionModel, scan_step: f64) -> Result<QberThresholds> {
    let baseline = first_crossing(0.0, 0.5, scan_step, QBER_TOL, gllp_rate)?;
    let p = em.p();
    let at_floor = modified_single_photon_rate(p, em)?;
    if !(at_floor > 1e-12) {
        return Err(Error::NoRoot(format!(
            "modified rate {at_floor:e} is not positive at the noise floor p = {p}"
        )));
    }
    let modified = first_crossing(p, 0.5, scan_step, QBER_TOL, |e| modified_single_photon_rate(e, em))?;
    Ok(QberThresholds { modified, baseline })
}

/// Distances in km where the decoy rates reach zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceLimits {
    pub modified_km: f64,
    pub baseline_km: f64,
}

impl DistanceLimits {
    pub fn gap_km(&self) -> f64 {
        self.modified_km - self.baseline_km
    }
}

pub fn max_distance(profile: &ChannelProfile, em: &ExtinctionModel) -> Result<DistanceLimits> {
    max_distance_with_step(profile, em, DISTANCE_SCAN_STEP)
}

pub fn max_distance_with_step(profile: &ChannelProfile, em: &ExtinctionModel, scan_step: f64) -> Result<DistanceLimits> {
    let (baseline, modified) = decoy_rates(profile, em, 0.0)?;
    if !(baseline > 0.0 && modified > 0.0) {
        return Err(Error::NotPositiveAtOrigin { baseline, modified });
    }
    let baseline_km = first_crossing(0.0, MAX_SCAN_DISTANCE, scan_step, DISTANCE_TOL, |l| {
        decoy_rates(profile, em, l).map(|r| r.0)
    })?;
    let modified_km = first_crossing(0.0, MAX_SCAN_DISTANCE, scan_step, DISTANCE_TOL, |l| {
        decoy_rates(profile, em, l).map(|r| r.1)
    })?;
    Ok(DistanceLimits { modified_km, baseline_km })
}

/// A named link evaluated at a fixed fiber length.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub profile: ChannelProfile,
    pub distance_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRates {
    pub baseline: f64,
    pub modified: f64,
    /// modified/baseline − 1; NaN when the baseline rate is not positive.
    pub uplift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub channel: String,
    pub outcome: Result<ChannelRates>,
}

pub fn compare_channel(channel: &Channel, em: &ExtinctionModel) -> ComparisonRow {
    let outcome = decoy_rates(&channel.profile, em, channel.distance_km).map(|(baseline, modified)| ChannelRates {
        baseline,
        modified,
        uplift: if baseline > 0.0 { modified / baseline - 1.0 } else { f64::NAN },
    });
    ComparisonRow { channel: channel.name.clone(), outcome }
}

/// Baseline versus modified rate for each channel. Failures stay in their row.
pub fn channel_comparison(channels: &[Channel], em: &ExtinctionModel) -> Vec<ComparisonRow> {
    channels.iter().map(|c| compare_channel(c, em)).collect()
}

/// Formats like C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    format_sig_digits(x, CSV_DIGITS)
}

pub fn format_sig_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// `x,rate_baseline,rate_modified`. Negative rates are written as 0.
pub fn write_sweep_csv<W: Write>(out: W, points: &[RatePoint]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["x", "rate_baseline", "rate_modified"])?;
    for pt in points {
        w.write_record([
            format_sig(pt.x),
            format_sig(pt.rate_baseline.max(0.0)),
            format_sig(pt.rate_modified.max(0.0)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `channel,rate_baseline,rate_modified,uplift`. A failed channel leaves the
/// rate fields empty and carries the error text in the uplift column.
pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["channel", "rate_baseline", "rate_modified", "uplift"])?;
    for row in rows {
        match &row.outcome {
            Ok(r) => w.write_record([
                row.channel.clone(),
                format_sig(r.baseline.max(0.0)),
                format_sig(r.modified.max(0.0)),
                format_sig(r.uplift),
            ])?,
            Err(e) => w.write_record([row.channel.clone(), String::new(), String::new(), format!("error: {e}")])?,
        }
    }
    w.flush()?;
    Ok(())
}
