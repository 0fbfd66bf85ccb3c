//! Numeric core: probabilities, binary entropy and 2×2 polarization density
//! matrices in the {|H⟩, |V⟩} basis.

use num_complex::Complex64;
use std::fmt;

use crate::error::{Error, Result};

/// Default absolute tolerance for comparing derived reals.
pub const ABS_TOL: f64 = 1e-9;

/// Tolerance used when validating density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A real number in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Shannon binary entropy H(x) = −x·log₂x − (1−x)·log₂(1−x), with
/// H(0) = H(1) = 0.
pub fn binary_entropy(x: Probability) -> f64 {
    let x = x.value();
    xlog2x(x) + xlog2x(1.0 - x)
}

/// Convenience wrapper validating a raw real before taking its entropy.
pub fn entropy(x: f64) -> Result<f64> {
    Probability::new(x).map(binary_entropy)
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    // x·log x → 0 as x → 0
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// A state on the polarization qubit: Hermitian, unit trace, positive
/// semidefinite. Entries are indexed `[row][col]` with 0 = H, 1 = V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationDensityMatrix {
    m: [[Complex64; 2]; 2],
}

impl PolarizationDensityMatrix {
    /// Validates and wraps a 2×2 complex matrix.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let rho = PolarizationDensityMatrix { m };
        rho.validate()?;
        Ok(rho)
    }

    /// Builds a matrix from real diagonal weights (H, V).
    pub fn diagonal(h: f64, v: f64) -> Result<Self> {
        Self::new([
            [Complex64::new(h, 0.0), ZERO],
            [ZERO, Complex64::new(v, 0.0)],
        ])
    }

    /// |ψ⟩⟨ψ| for a normalized ket ψ = h|H⟩ + v|V⟩.
    pub fn pure(h: Complex64, v: Complex64) -> Result<Self> {
        let norm = h.norm_sqr() + v.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("ket norm² is {norm}, expected 1")));
        }
        Self::new(outer(h, v))
    }

    /// Normalizes an arbitrary non-negative operator with positive trace.
    pub fn from_unnormalized(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let tr = (m[0][0] + m[1][1]).re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        let scaled = m.map(|row| row.map(|z| z / tr));
        Self::new(scaled)
    }

    pub fn horizontal() -> Self {
        PolarizationDensityMatrix { m: [[ONE, ZERO], [ZERO, ZERO]] }
    }

    pub fn vertical() -> Self {
        PolarizationDensityMatrix { m: [[ZERO, ZERO], [ZERO, ONE]] }
    }

    /// ½Î, the isotropic noise state.
    pub fn maximally_mixed() -> Self {
        let half = Complex64::new(0.5, 0.0);
        PolarizationDensityMatrix { m: [[half, ZERO], [ZERO, half]] }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1]).re
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += (self.m[i][j] * self.m[j][i]).re;
            }
        }
        s
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.m)
    }

    /// ⟨ψ|ρ|ψ⟩ for a ket (h, v).
    pub fn expectation(&self, h: Complex64, v: Complex64) -> f64 {
        let k = [h, v];
        let mut s = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                s += k[i].conj() * self.m[i][j] * k[j];
            }
        }
        s.re
    }

    /// U ρ U† for a 2×2 unitary U.
    pub fn transform(&self, u: &[[Complex64; 2]; 2]) -> Self {
        let mut tmp = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                tmp[i][j] = u[i][0] * self.m[0][j] + u[i][1] * self.m[1][j];
            }
        }
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = tmp[i][0] * u[j][0].conj() + tmp[i][1] * u[j][1].conj();
            }
        }
        PolarizationDensityMatrix { m: out }
    }

    fn validate(&self) -> Result<()> {
        let m = &self.m;
        if m.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        for i in 0..2 {
            for j in 0..2 {
                if (m[i][j] - m[j][i].conj()).norm() > STATE_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let [lo, _] = self.eigenvalues();
        if lo < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo}")));
        }
        Ok(())
    }
}

/// The unnormalized projector |ψ⟩⟨ψ| for ψ = h|H⟩ + v|V⟩.
pub fn outer(h: Complex64, v: Complex64) -> [[Complex64; 2]; 2] {
    [[h * h.conj(), h * v.conj()], [v * h.conj(), v * v.conj()]]
}

fn hermitian_eigenvalues(m: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + m[0][1].norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &PolarizationDensityMatrix, b: &PolarizationDensityMatrix) -> f64 {
    let mut diff = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            diff[i][j] = a.m[i][j] - b.m[i][j];
        }
    }
    let [l0, l1] = hermitian_eigenvalues(&diff);
    0.5 * (l0.abs() + l1.abs())
}

/// w·a + (1−w)·b.
pub fn mix(
    a: &PolarizationDensityMatrix,
    b: &PolarizationDensityMatrix,
    w: Probability,
) -> PolarizationDensityMatrix {
    let w = w.value();
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a.m[i][j] * w + b.m[i][j] * (1.0 - w);
        }
    }
    PolarizationDensityMatrix { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    #[test]
    fn entropy_reference_values() {
        assert_eq!(binary_entropy(p(0.5)), 1.0);
        assert_eq!(binary_entropy(p(0.0)), 0.0);
        assert_eq!(binary_entropy(p(1.0)), 0.0);
        // 50-digit evaluation: 0.499915958164527995640...
        assert_abs_diff_eq!(binary_entropy(p(0.11)), 0.499_915_958_164_528, epsilon = 1e-14);
    }

    #[test]
    fn probability_rejects_out_of_range() {
        assert!(Probability::new(-1e-3).is_err());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert!(entropy(1.5).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let h = PolarizationDensityMatrix::horizontal();
        let v = PolarizationDensityMatrix::vertical();
        let mixed = PolarizationDensityMatrix::maximally_mixed();
        assert_eq!(trace_distance(&h, &h), 0.0);
        assert_abs_diff_eq!(trace_distance(&h, &v), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_distance(&h, &mixed), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn mix_examples() {
        let h = PolarizationDensityMatrix::horizontal();
        let mixed = PolarizationDensityMatrix::maximally_mixed();
        assert_eq!(mix(&h, &mixed, p(1.0)), h);
        assert_eq!(mix(&h, &mixed, p(0.0)), mixed);
        let out = mix(&h, &mixed, p(499.0 / 503.0));
        assert_abs_diff_eq!(out.entry(0, 0).re, 501.0 / 503.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entry(1, 1).re, 2.0 / 503.0, epsilon = 1e-15);
        assert_eq!(out.entry(0, 1), ZERO);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        // not Hermitian
        assert!(PolarizationDensityMatrix::new([[c(0.5, 0.0), c(0.1, 0.1)], [c(0.1, 0.1), c(0.5, 0.0)]]).is_err());
        // trace 2
        assert!(PolarizationDensityMatrix::diagonal(1.0, 1.0).is_err());
        // negative eigenvalue
        assert!(PolarizationDensityMatrix::diagonal(1.2, -0.2).is_err());
        assert!(PolarizationDensityMatrix::pure(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(PolarizationDensityMatrix::from_unnormalized([[ZERO; 2]; 2]).is_err());
    }

    #[test]
    fn transform_by_swap_exchanges_h_and_v() {
        let swap = [[ZERO, ONE], [ONE, ZERO]];
        let v = PolarizationDensityMatrix::horizontal().transform(&swap);
        assert_eq!(v, PolarizationDensityMatrix::vertical());
    }

    fn arb_state() -> impl Strategy<Value = PolarizationDensityMatrix> {
        // Bloch ball parametrization
        (0.0..=1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(
            |(radius, theta, phi)| {
                let (x, y, z) = (
                    radius * theta.sin() * phi.cos(),
                    radius * theta.sin() * phi.sin(),
                    radius * theta.cos(),
                );
                PolarizationDensityMatrix::new([
                    [Complex64::new(0.5 * (1.0 + z), 0.0), Complex64::new(0.5 * x, -0.5 * y)],
                    [Complex64::new(0.5 * x, 0.5 * y), Complex64::new(0.5 * (1.0 - z), 0.0)],
                ])
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn entropy_is_concave(x in 0.0..=1.0f64, y in 0.0..=1.0f64, l in 0.0..=1.0f64) {
            let lhs = binary_entropy(p(l * x + (1.0 - l) * y));
            let rhs = l * binary_entropy(p(x)) + (1.0 - l) * binary_entropy(p(y));
            prop_assert!(lhs >= rhs - 1e-12);
        }

        #[test]
        fn entropy_is_symmetric(x in 0.0..=1.0f64) {
            prop_assert!((binary_entropy(p(x)) - binary_entropy(p(1.0 - x))).abs() < 1e-12);
        }

        #[test]
        fn mix_stays_valid(a in arb_state(), b in arb_state(), w in 0.0..=1.0f64) {
            let out = mix(&a, &b, p(w));
            prop_assert!(PolarizationDensityMatrix::new(out.entries()).is_ok());
        }

        #[test]
        fn trace_distance_triangle(a in arb_state(), b in arb_state(), c in arb_state()) {
            let ab = trace_distance(&a, &b);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            prop_assert!(ab <= trace_distance(&a, &c) + trace_distance(&c, &b) + 1e-10);
        }
    }
}
