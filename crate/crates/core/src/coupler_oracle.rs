//! Brute-force model of the 4×1 polarization coupler.
//!
//! Four phase-randomized coherent pulses enter the coupler: the open path
//! carries amplitude α and the three blocked paths leak β each. Two PBSs
//! combine them into path A (H/V pair) and path B (+/− pair), and a 50/50
//! beam splitter maps A† → (C† + D†)/√2, B† → (C† − D†)/√2. The emitted
//! state is the single-photon part of output path C after tracing out D.
//!
//! Two independent routes compute that state for a fixed phase tuple:
//!
//! * [`propagate_coherent`] + [`single_photon_component`] use the fact that
//!   linear optics maps coherent states to coherent states.
//! * [`fock_brute_force`] expands both input paths in a truncated Fock basis
//!   and applies the beam splitter term by term.
//!
//! [`phase_averaged_state`] then integrates over the random phases on a
//! uniform grid and [`compare_to_closed_form`] fits the result against the
//! mixture `(r−1)/(r+3)·ρ_ideal + 4/(r+3)·½Î`.
//!
//! The B-path amplitudes after its PBS are ambiguous in the derivation being
//! checked, so both readings are available as a [`PhaseConvention`].

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qmath::{outer, trace_distance, PolarizationDensityMatrix};
use crate::state_model::{Bb84State, PulseParams};

pub const DEFAULT_GRID_POINTS: usize = 8;
pub const DEFAULT_FOCK_CUTOFF: usize = 8;
/// Largest Poisson weight the Fock truncation may discard.
pub const FOCK_TAIL_LIMIT: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the two off-basis leaked pulses are expressed in the native basis
/// of the path they join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseConvention {
    /// Amplitudes β(e^{iθc} ± e^{iθd})/2, taken literally. Their squared
    /// moduli average to ½ each.
    Strict,
    /// Amplitudes β·e^{iθc′}, β·e^{iθd′} with θc′, θd′ independent uniform
    /// phases of unit modulus.
    UnitPhase,
}

impl PhaseConvention {
    pub const ALL: [PhaseConvention; 2] = [PhaseConvention::Strict, PhaseConvention::UnitPhase];

    /// Name used on the command line and in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseConvention::Strict => "strict",
            PhaseConvention::UnitPhase => "paper",
        }
    }
}

impl fmt::Display for PhaseConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(PhaseConvention::Strict),
            "paper" => Ok(PhaseConvention::UnitPhase),
            other => Err(Error::Domain(format!("unknown phase convention '{other}'"))),
        }
    }
}

/// Everything needed to run the coupler oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerScenario {
    pub pulse: PulseParams,
    pub phase_grid_points: usize,
    pub fock_cutoff: usize,
    pub convention: PhaseConvention,
    pub encoded_state: Bb84State,
}

impl CouplerScenario {
    /// Scenario with default grid and cutoff, encoding |H⟩.
    pub fn new(pulse: PulseParams, convention: PhaseConvention) -> Self {
        CouplerScenario {
            pulse,
            phase_grid_points: DEFAULT_GRID_POINTS,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            convention,
            encoded_state: Bb84State::H,
        }
    }

    pub fn with_grid(mut self, points: usize) -> Result<Self> {
        if points < 4 {
            return Err(Error::Domain(format!("phase grid needs at least 4 points, got {points}")));
        }
        self.phase_grid_points = points;
        Ok(self)
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        if cutoff < 4 {
            return Err(Error::CutoffTooSmall {
                cutoff,
                tail: poisson_tail(self.mean_photon_number(), cutoff),
                limit: FOCK_TAIL_LIMIT,
            });
        }
        self.fock_cutoff = cutoff;
        Ok(self)
    }

    pub fn with_encoded_state(mut self, state: Bb84State) -> Self {
        self.encoded_state = state;
        self
    }

    /// α² + 3β², the total mean photon number entering the coupler.
    pub fn mean_photon_number(&self) -> f64 {
        let (a, b) = (self.pulse.alpha(), self.pulse.beta());
        a * a + 3.0 * b * b
    }
}

/// Coherent amplitudes on a pair of orthogonal polarization modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeAmplitude {
    pub h: Complex64,
    pub v: Complex64,
}

impl TwoModeAmplitude {
    pub fn new(h: Complex64, v: Complex64) -> Self {
        TwoModeAmplitude { h, v }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }
}

/// Polarization basis a pair of amplitudes is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    /// Matrix taking coefficients in this basis to (H, V) coefficients.
    fn to_rectilinear(self) -> [[Complex64; 2]; 2] {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Basis::Rectilinear => [[one, ZERO], [ZERO, one]],
            Basis::Diagonal => {
                let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
                [[s, s], [s, -s]]
            }
        }
    }

    fn apply(self, amp: TwoModeAmplitude) -> TwoModeAmplitude {
        let u = self.to_rectilinear();
        TwoModeAmplitude {
            h: u[0][0] * amp.h + u[0][1] * amp.v,
            v: u[1][0] * amp.h + u[1][1] * amp.v,
        }
    }
}

/// Input amplitudes of paths A and B, both written in the basis native to
/// the encoded state. Phases are ordered (θa, θb, θc, θd); the pair that is
/// re-expressed in the foreign basis takes its phases from the convention.
fn path_amplitudes(sc: &CouplerScenario, phases: [f64; 4]) -> (TwoModeAmplitude, TwoModeAmplitude, Basis) {
    let (alpha, beta) = (sc.pulse.alpha(), sc.pulse.beta());
    let e = phases.map(|t| Complex64::from_polar(1.0, t));

    let converted = |first: Complex64, second: Complex64| match sc.convention {
        PhaseConvention::Strict => TwoModeAmplitude::new(beta * (first + second) / 2.0, beta * (first - second) / 2.0),
        PhaseConvention::UnitPhase => TwoModeAmplitude::new(beta * first, beta * second),
    };

    match sc.encoded_state {
        Bb84State::H => (TwoModeAmplitude::new(alpha * e[0], beta * e[1]), converted(e[2], e[3]), Basis::Rectilinear),
        Bb84State::V => (TwoModeAmplitude::new(beta * e[0], alpha * e[1]), converted(e[2], e[3]), Basis::Rectilinear),
        Bb84State::Plus => (converted(e[0], e[1]), TwoModeAmplitude::new(alpha * e[2], beta * e[3]), Basis::Diagonal),
        Bb84State::Minus => (converted(e[0], e[1]), TwoModeAmplitude::new(beta * e[2], alpha * e[3]), Basis::Diagonal),
    }
}

/// Coherent amplitude (in H/V) leaving on output path C for one phase tuple.
pub fn propagate_coherent(sc: &CouplerScenario, phases: [f64; 4]) -> TwoModeAmplitude {
    let (a, b, basis) = path_amplitudes(sc, phases);
    let c = TwoModeAmplitude::new((a.h + b.h) * FRAC_1_SQRT_2, (a.v + b.v) * FRAC_1_SQRT_2);
    basis.apply(c)
}

/// Weight and normalized state of a single-photon projection. `state` is
/// `None` when the weight vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhoton {
    pub weight: f64,
    pub state: Option<PolarizationDensityMatrix>,
}

/// Single-photon part of the two-mode coherent state |h⟩|v⟩: weight
/// e^{−s}·s with s = |h|²+|v|², state (h, v)(h, v)†/s.
pub fn single_photon_component(amp: TwoModeAmplitude) -> SinglePhoton {
    let s = amp.mean_photon_number();
    if s == 0.0 {
        return SinglePhoton { weight: 0.0, state: None };
    }
    let state = PolarizationDensityMatrix::from_unnormalized(outer(amp.h, amp.v)).ok();
    SinglePhoton { weight: (-s).exp() * s, state }
}

/// Two-mode Fock state with n₁ + n₂ ≤ cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFockState {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl TruncatedFockState {
    /// Expansion of the coherent state |h⟩|v⟩.
    pub fn coherent(amp: TwoModeAmplitude, cutoff: usize) -> Self {
        let dim = cutoff + 1;
        let mut coeffs = vec![ZERO; dim * dim];
        let h = single_mode_coherent(amp.h, cutoff);
        let v = single_mode_coherent(amp.v, cutoff);
        for n1 in 0..=cutoff {
            for n2 in 0..=(cutoff - n1) {
                coeffs[n1 * dim + n2] = h[n1] * v[n2];
            }
        }
        TruncatedFockState { cutoff, coeffs }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Amplitude of |n₁, n₂⟩; zero outside the truncation.
    pub fn coefficient(&self, n1: usize, n2: usize) -> Complex64 {
        if n1 + n2 > self.cutoff {
            ZERO
        } else {
            self.coeffs[n1 * (self.cutoff + 1) + n2]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn single_mode_coherent(gamma: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut term = Complex64::new((-gamma.norm_sqr() / 2.0).exp(), 0.0);
    out.push(term);
    for n in 1..=cutoff {
        term = term * gamma / (n as f64).sqrt();
        out.push(term);
    }
    out
}

/// Discarded Poisson weight above `cutoff` for mean `s`, bounded below by
/// the single term e^{−s}s^N/N!.
pub fn poisson_tail(s: f64, cutoff: usize) -> f64 {
    let mut term = (-s).exp();
    for k in 1..=cutoff {
        term *= s / k as f64;
    }
    let at_cutoff = term;
    let mut tail = 0.0;
    let mut k = cutoff + 1;
    loop {
        term *= s / k as f64;
        tail += term;
        if (k as f64 > s && term < tail * 1e-17) || term == 0.0 || k > cutoff + 10_000 {
            break;
        }
        k += 1;
    }
    at_cutoff.max(tail)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ⟨c, d| U_BS |n, m⟩ for one polarization mode, with d = n + m − c,
/// obtained by expanding (C†+D†)ⁿ(C†−D†)ᵐ / √(2^{n+m} n! m!).
fn beam_splitter_amplitude(n: usize, m: usize, c: usize) -> f64 {
    if c > n + m {
        return 0.0;
    }
    let d = n + m - c;
    let mut sum = 0.0;
    for r in 0..=n.min(c) {
        let s = c - r;
        if s > m {
            continue;
        }
        let sign = if (m - s) % 2 == 0 { 1.0 } else { -1.0 };
        sum += binomial(n, r) * binomial(m, s) * sign;
    }
    sum * (factorial(c) * factorial(d) / (2f64.powi((n + m) as i32) * factorial(n) * factorial(m))).sqrt()
}

/// Single-photon projection of output path C computed by expanding the
/// input paths in the Fock basis and applying the beam splitter term by
/// term, then tracing out path D.
pub fn fock_brute_force(sc: &CouplerScenario, phases: [f64; 4]) -> Result<SinglePhoton> {
    let cutoff = sc.fock_cutoff;
    let tail = poisson_tail(sc.mean_photon_number(), cutoff);
    if tail >= FOCK_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff, tail, limit: FOCK_TAIL_LIMIT });
    }

    let (a, b, basis) = path_amplitudes(sc, phases);
    let fa = TruncatedFockState::coherent(a, cutoff);
    let fb = TruncatedFockState::coherent(b, cutoff);

    // psi[k][d1][d2]: C holds one photon in native mode k, D holds (d1, d2)
    let ddim = 2 * cutoff + 1;
    let mut psi = [vec![ZERO; ddim * ddim], vec![ZERO; ddim * ddim]];

    for a1 in 0..=cutoff {
        for a2 in 0..=(cutoff - a1) {
            let ca = fa.coefficient(a1, a2);
            for b1 in 0..=cutoff {
                for b2 in 0..=(cutoff - b1) {
                    let amp = ca * fb.coefficient(b1, b2);
                    if amp == ZERO {
                        continue;
                    }
                    // photon in C mode 1
                    if a1 + b1 >= 1 {
                        let t = beam_splitter_amplitude(a1, b1, 1) * beam_splitter_amplitude(a2, b2, 0);
                        let (d1, d2) = (a1 + b1 - 1, a2 + b2);
                        psi[0][d1 * ddim + d2] += amp * t;
                    }
                    // photon in C mode 2
                    if a2 + b2 >= 1 {
                        let t = beam_splitter_amplitude(a1, b1, 0) * beam_splitter_amplitude(a2, b2, 1);
                        let (d1, d2) = (a1 + b1, a2 + b2 - 1);
                        psi[1][d1 * ddim + d2] += amp * t;
                    }
                }
            }
        }
    }

    let mut rho = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            rho[i][j] = psi[i].iter().zip(&psi[j]).map(|(x, y)| x * y.conj()).sum();
        }
    }
    let weight = (rho[0][0] + rho[1][1]).re;
    if weight <= 0.0 {
        return Ok(SinglePhoton { weight: 0.0, state: None });
    }
    let native = PolarizationDensityMatrix::from_unnormalized(rho)?;
    Ok(SinglePhoton { weight, state: Some(native.transform(&basis.to_rectilinear())) })
}

/// Phase-averaged single-photon output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAverage {
    pub state: PolarizationDensityMatrix,
    /// Mean single-photon probability over the grid.
    pub weight: f64,
}

/// Averages the single-photon output over all four phases on a uniform grid,
/// weighting each tuple by its single-photon probability.
pub fn phase_averaged_state(sc: &CouplerScenario) -> Result<PhaseAverage> {
    let n = sc.phase_grid_points;
    let grid: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let mut acc = [[ZERO; 2]; 2];
    let mut weight = 0.0;
    for &t0 in &grid {
        for &t1 in &grid {
            for &t2 in &grid {
                for &t3 in &grid {
                    let amp = propagate_coherent(sc, [t0, t1, t2, t3]);
                    let s = amp.mean_photon_number();
                    let damp = (-s).exp();
                    let op = outer(amp.h, amp.v);
                    for i in 0..2 {
                        for j in 0..2 {
                            acc[i][j] += op[i][j] * damp;
                        }
                    }
                    weight += damp * s;
                }
            }
        }
    }
    let count = (n as f64).powi(4);
    let state = PolarizationDensityMatrix::from_unnormalized(acc)?;
    Ok(PhaseAverage { state, weight: weight / count })
}

/// Phase-averaged oracle output fitted against the closed-form mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyReport {
    pub convention: PhaseConvention,
    pub encoded_state: Bb84State,
    pub r: f64,
    pub mu: f64,
    pub cutoff: usize,
    pub grid: usize,
    pub ideal_weight_fit: f64,
    pub ideal_weight_closed_form: f64,
    pub noise_weight_fit: f64,
    pub noise_weight_closed_form: f64,
    pub trace_distance: f64,
    /// Largest |ρ_HV| of the averaged state.
    pub max_off_diagonal: f64,
    pub single_photon_weight: f64,
}

/// Fits ρ = w·ρ_ideal + (1−w)·½Î to the phase-averaged state and compares
/// with w = (α²−β²)/(α²+3β²) = (r−1)/(r+3).
pub fn compare_to_closed_form(sc: &CouplerScenario) -> Result<DiscrepancyReport> {
    let avg = phase_averaged_state(sc)?;
    let (kh, kv) = sc.encoded_state.ket();
    let overlap = avg.state.expectation(kh, kv);
    let noise_fit = 2.0 * (1.0 - overlap);

    let (a2, b2) = (sc.pulse.alpha().powi(2), sc.pulse.beta().powi(2));
    let ideal_cf = (a2 - b2) / (a2 + 3.0 * b2);
    let noise_cf = 4.0 * b2 / (a2 + 3.0 * b2);

    let ideal = sc.encoded_state.density();
    let mut closed = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let noise = if i == j { 0.5 * noise_cf } else { 0.0 };
            closed[i][j] = ideal.entry(i, j) * ideal_cf + noise;
        }
    }
    let closed = PolarizationDensityMatrix::new(closed)?;

    // coherences measured in the basis native to the encoded state
    let native = match sc.encoded_state {
        Bb84State::H | Bb84State::V => avg.state,
        Bb84State::Plus | Bb84State::Minus => avg.state.transform(&Basis::Diagonal.to_rectilinear()),
    };

    Ok(DiscrepancyReport {
        convention: sc.convention,
        encoded_state: sc.encoded_state,
        r: sc.pulse.extinction_ratio(),
        mu: sc.pulse.mu(),
        cutoff: sc.fock_cutoff,
        grid: sc.phase_grid_points,
        ideal_weight_fit: 1.0 - noise_fit,
        ideal_weight_closed_form: ideal_cf,
        noise_weight_fit: noise_fit,
        noise_weight_closed_form: noise_cf,
        trace_distance: trace_distance(&avg.state, &closed),
        max_off_diagonal: native.entry(0, 1).norm(),
        single_photon_weight: avg.weight,
    })
}

pub const REPORT_HEADER: [&str; 10] = [
    "convention",
    "r",
    "mu",
    "cutoff",
    "grid",
    "ideal_weight_fit",
    "ideal_weight_paper",
    "noise_weight_fit",
    "noise_weight_paper",
    "trace_distance",
];

/// Writes reports as CSV with [`REPORT_HEADER`] columns.
pub fn write_reports_csv<W: Write>(out: W, reports: &[DiscrepancyReport]) -> Result<()> {
    let mut w = crate::analysis::csv_writer(out);
    w.write_record(REPORT_HEADER)?;
    for rep in reports {
        let fmt = crate::analysis::format_sig;
        w.write_record([
            rep.convention.as_str().to_string(),
            fmt(rep.r),
            fmt(rep.mu),
            rep.cutoff.to_string(),
            rep.grid.to_string(),
            fmt(rep.ideal_weight_fit),
            fmt(rep.ideal_weight_closed_form),
            fmt(rep.noise_weight_fit),
            fmt(rep.noise_weight_closed_form),
            fmt(rep.trace_distance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_model::ExtinctionModel;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scenario(alpha: f64, beta: f64, conv: PhaseConvention) -> CouplerScenario {
        CouplerScenario::new(PulseParams::from_amplitudes(alpha, beta).unwrap(), conv)
    }

    #[test]
    fn shortcut_without_leakage() {
        let sc = scenario(0.1, 0.0, PhaseConvention::Strict);
        let amp = propagate_coherent(&sc, [0.0, 0.4, 1.0, 2.0]);
        assert!((amp.h - c(0.1 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert_eq!(amp.v, ZERO);
    }

    #[test]
    fn shortcut_zero_phases_strict() {
        let sc = scenario(0.1, 0.02, PhaseConvention::Strict);
        let amp = propagate_coherent(&sc, [0.0; 4]);
        assert!((amp.h - c(0.12 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((amp.v - c(0.02 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);

        let sc = scenario(0.05, 0.05, PhaseConvention::Strict);
        let amp = propagate_coherent(&sc, [0.0; 4]);
        assert!((amp.h - c(0.1 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((amp.v - c(0.05 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn single_photon_examples() {
        let a = 0.3;
        let out = single_photon_component(TwoModeAmplitude::new(c(a * FRAC_1_SQRT_2, 0.0), ZERO));
        assert_abs_diff_eq!(out.weight, (-a * a / 2.0).exp() * a * a / 2.0, epsilon = 1e-16);
        assert_eq!(out.state.unwrap(), PolarizationDensityMatrix::horizontal());

        let out = single_photon_component(TwoModeAmplitude::new(c(0.2, 0.1), c(0.2, 0.1)));
        assert!(trace_distance(&out.state.unwrap(), &Bb84State::Plus.density()) < 1e-15);

        let rho = single_photon_component(TwoModeAmplitude::new(c(1.0, 0.0), c(0.1, 0.0))).state.unwrap();
        assert_abs_diff_eq!(rho.entry(0, 0).re, 1.0 / 1.01, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.entry(1, 1).re, 0.01 / 1.01, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.entry(0, 1).re, 0.1 / 1.01, epsilon = 1e-15);

        let none = single_photon_component(TwoModeAmplitude::new(ZERO, ZERO));
        assert_eq!(none.weight, 0.0);
        assert!(none.state.is_none());
    }

    #[test]
    fn beam_splitter_amplitudes_are_unitary() {
        // columns of the two-mode BS restricted to n+m = N are orthonormal
        for total in 0..6usize {
            for n in 0..=total {
                let norm: f64 = (0..=total).map(|cc| beam_splitter_amplitude(n, total - n, cc).powi(2)).sum();
                assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(beam_splitter_amplitude(1, 0, 1), FRAC_1_SQRT_2, epsilon = 1e-16);
        assert_abs_diff_eq!(beam_splitter_amplitude(0, 1, 1), FRAC_1_SQRT_2, epsilon = 1e-16);
        assert_abs_diff_eq!(beam_splitter_amplitude(0, 1, 0), -FRAC_1_SQRT_2, epsilon = 1e-16);
        // Hong–Ou–Mandel: |1,1⟩ never leaves one photon per port
        assert_abs_diff_eq!(beam_splitter_amplitude(1, 1, 1), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn fock_state_norm_never_exceeds_one() {
        let st = TruncatedFockState::coherent(TwoModeAmplitude::new(c(0.8, 0.3), c(-0.5, 0.1)), 6);
        assert!(st.norm_sqr() <= 1.0 + 1e-9);
        assert!(st.norm_sqr() > 0.99);
        assert_eq!(st.coefficient(5, 3), ZERO);
    }

    #[test]
    fn fock_matches_shortcut_without_leakage() {
        let sc = scenario(0.1, 0.0, PhaseConvention::UnitPhase);
        let phases = [0.3, 1.1, 2.0, 4.0];
        let fock = fock_brute_force(&sc, phases).unwrap();
        let short = single_photon_component(propagate_coherent(&sc, phases));
        assert!((fock.weight - short.weight).abs() <= 1e-12 * short.weight);
        assert!(trace_distance(&fock.state.unwrap(), &short.state.unwrap()) <= 1e-12);
    }

    #[test]
    fn fock_rejects_small_cutoff() {
        let em = ExtinctionModel::from_linear(500.0).unwrap();
        let pulse = PulseParams::new(0.2, &em).unwrap();
        let sc = CouplerScenario::new(pulse, PhaseConvention::UnitPhase);
        assert!(matches!(sc.with_cutoff(1), Err(Error::CutoffTooSmall { .. })));
        // cutoff 4 passes validation but not the tail bound at μ = 0.2
        let sc4 = sc.with_cutoff(4).unwrap();
        assert!(matches!(fock_brute_force(&sc4, [0.0; 4]), Err(Error::CutoffTooSmall { .. })));
        // large amplitudes need far more than 8 levels
        let big = CouplerScenario::new(PulseParams::new(20.0, &em).unwrap(), PhaseConvention::UnitPhase);
        assert!(matches!(fock_brute_force(&big, [0.0; 4]), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn grid_must_have_four_points() {
        let sc = scenario(0.1, 0.01, PhaseConvention::Strict);
        assert!(sc.with_grid(3).is_err());
        assert!(sc.with_grid(4).is_ok());
    }

    #[test]
    fn poisson_tail_bounds() {
        let s: f64 = 0.01;
        let single = (-s).exp() * s.powi(8) / 40320.0;
        assert!(poisson_tail(s, 8) >= single);
        assert!(poisson_tail(s, 8) < 1e-12);
        assert!(poisson_tail(100.0, 8) > 0.99);
    }

    #[test]
    fn convention_names() {
        assert_eq!("paper".parse::<PhaseConvention>().unwrap(), PhaseConvention::UnitPhase);
        assert_eq!("STRICT".parse::<PhaseConvention>().unwrap(), PhaseConvention::Strict);
        assert!("other".parse::<PhaseConvention>().is_err());
    }
}
