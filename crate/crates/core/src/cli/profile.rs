//! Channel profile files.
//!
//! A profile is a `key = value` text file (TOML syntax):
//!
//! ```text
//! y0 = 1.7e-6             # background yield per pulse
//! eta_bob = 0.045         # receiver efficiency
//! alpha_db_per_km = 0.21  # fiber loss
//! e_detect = 0.033        # optical error probability
//! mu = 0.48               # signal mean photon number
//! e0 = 0.5                # optional, default 0.5
//! q = 0.5                 # optional, default 0.5
//! f_ec = 1.22             # optional; a number or [[qber, f], ...] knots
//! r_db = 27               # optional extinction ratio in dB
//! distance_km = 50        # optional link length used by `compare`
//! ```
//!
//! Unknown keys are rejected, and so are missing required keys.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::keyrate::{ChannelProfile, ErrorCorrection};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum FecSpec {
    Constant(f64),
    Table(Vec<(f64, f64)>),
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    y0: f64,
    eta_bob: f64,
    alpha_db_per_km: f64,
    e_detect: f64,
    #[serde(default = "half")]
    e0: f64,
    mu: f64,
    #[serde(default = "half")]
    q: f64,
    #[serde(default)]
    f_ec: Option<FecSpec>,
    #[serde(default)]
    pub r_db: Option<f64>,
    #[serde(default)]
    pub distance_km: Option<f64>,
}

impl ProfileFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Profile(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Profile(msg) => Error::Profile(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The validated channel model.
    pub fn channel_profile(&self) -> Result<ChannelProfile> {
        let f_ec = match &self.f_ec {
            None => ErrorCorrection::default(),
            Some(FecSpec::Constant(f)) => ErrorCorrection::Constant(*f),
            Some(FecSpec::Table(knots)) => ErrorCorrection::Table(knots.clone()),
        };
        let profile = ChannelProfile {
            y0: self.y0,
            eta_bob: self.eta_bob,
            alpha_fiber: self.alpha_db_per_km,
            e_detect: self.e_detect,
            e0: self.e0,
            mu: self.mu,
            q: self.q,
            f_ec,
        };
        profile.validate()?;
        Ok(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "y0 = 1.7e-6\neta_bob = 0.045\nalpha_db_per_km = 0.21\ne_detect = 0.033\nmu = 0.48\n";

    #[test]
    fn minimal_profile_uses_defaults() {
        let file = ProfileFile::parse(MINIMAL).unwrap();
        assert_eq!(file.channel_profile().unwrap(), ChannelProfile::example());
        assert_eq!(file.r_db, None);
    }

    #[test]
    fn integer_values_and_tables() {
        let text = format!("{MINIMAL}r_db = 27\nf_ec = [[0.01, 1.16], [0.05, 1.22]]\n");
        let file = ProfileFile::parse(&text).unwrap();
        assert_eq!(file.r_db, Some(27.0));
        let prof = file.channel_profile().unwrap();
        assert_eq!(prof.f_ec, ErrorCorrection::Table(vec![(0.01, 1.16), (0.05, 1.22)]));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ProfileFile::parse(&format!("{MINIMAL}dark_count = 1\n")).unwrap_err();
        assert!(err.to_string().contains("dark_count"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let err = ProfileFile::parse("y0 = 1e-6\neta_bob = 0.1\nalpha_db_per_km = 0.2\nmu = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("e_detect"), "{err}");
    }

    #[test]
    fn invalid_values_are_domain_errors() {
        let file = ProfileFile::parse(&MINIMAL.replace("mu = 0.48", "mu = -1")).unwrap();
        assert!(matches!(file.channel_profile(), Err(Error::Domain(_))));
    }
}
