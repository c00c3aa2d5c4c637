//! Scenario configuration: scalar parameters of the link, solver knobs, and
//! the flat key-value config file format.
//!
//! All internal math runs in linear units (watts, radians). Power-like keys
//! in config files accept either a plain number (watts) or a `dBm` suffix;
//! angles accept plain radians or rational multiples of pi such as
//! `29/60 pi`. Conversion happens once at parse time.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// All scalars describing one scenario plus solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of transmit antennas at Alice.
    pub n_tx_antennas: usize,
    /// Number of IRS reflecting elements (0 = no IRS).
    pub n_irs_elements: usize,
    /// Total transmit power in watts.
    pub tx_power: f64,
    /// Power-allocation fraction for the confidential message.
    pub pa_cm: f64,
    /// Power-allocation fraction for artificial noise.
    pub pa_an: f64,
    /// Noise variance at Bob, watts.
    pub noise_bob: f64,
    /// Noise variance at Eve, watts.
    pub noise_eve: f64,
    /// Element spacing over wavelength (d/lambda) for every ULA.
    pub spacing_ratio: f64,
    /// Alice-to-IRS distance, meters.
    pub d_ai: f64,
    /// Alice-to-Bob distance, meters.
    pub d_ab: f64,
    /// Alice-to-Eve distance, meters.
    pub d_ae: f64,
    /// Departure angle from Alice toward the IRS, radians.
    pub theta_ai: f64,
    /// Departure angle from Alice toward Bob, radians.
    pub theta_ab: f64,
    /// Departure angle from Alice toward Eve, radians.
    pub theta_ae: f64,
    /// Path-loss exponent alpha.
    pub path_loss_exponent: f64,
    /// Reference path gain at 1 m.
    pub path_loss_ref_gain: f64,
    /// Outer-loop convergence threshold on the secrecy-rate increment,
    /// bits/s/Hz.
    pub convergence_threshold: f64,
    /// Cap on outer alternation iterations.
    pub max_outer_iterations: usize,
    /// Number of random phase initializations for the alternating SR solver.
    pub multistart_count: usize,
    /// Number of draws averaged by the random-phase baseline.
    pub random_phase_draws: usize,
    /// Base RNG seed used when the caller does not supply one.
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    /// The benchmark scenario: 16 transmit antennas, 30 dBm transmit power,
    /// -40 dBm noise, Bob broadside at 40 m, IRS at 87 degrees / 20 m, Eve
    /// at 115 degrees / 50 m.
    fn default() -> Self {
        SystemConfig {
            n_tx_antennas: 16,
            n_irs_elements: 128,
            tx_power: 1.0,
            pa_cm: 0.5,
            pa_an: 0.5,
            noise_bob: 1e-7,
            noise_eve: 1e-7,
            spacing_ratio: 0.5,
            d_ai: 20.0,
            d_ab: 40.0,
            d_ae: 50.0,
            theta_ai: 29.0 * PI / 60.0,
            theta_ab: PI / 2.0,
            theta_ae: 23.0 * PI / 36.0,
            path_loss_exponent: 2.0,
            path_loss_ref_gain: 4e-4,
            convergence_threshold: 1e-3,
            max_outer_iterations: 50,
            multistart_count: 10,
            random_phase_draws: 50,
            rng_seed: 0,
        }
    }
}

/// Watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// Parse a power-like value: plain watts or `<x> dBm`.
fn parse_power(s: &str) -> Option<f64> {
    let t = s.trim();
    if let Some(raw) = t
        .strip_suffix("dBm")
        .or_else(|| t.strip_suffix("dbm"))
        .or_else(|| t.strip_suffix("DBM"))
    {
        return parse_number(raw).map(dbm_to_watts);
    }
    parse_number(t)
}

/// Parse an angle: plain radians, `pi`, `<a> pi`, or `<a>/<b> pi`.
fn parse_angle(s: &str) -> Option<f64> {
    let t = s.trim();
    if let Some(raw) = t.strip_suffix("pi").or_else(|| t.strip_suffix("PI")) {
        let raw = raw.trim();
        if raw.is_empty() {
            return Some(PI);
        }
        if let Some((num, den)) = raw.split_once('/') {
            let num = parse_number(num)?;
            let den = parse_number(den)?;
            if den == 0.0 {
                return None;
            }
            return Some(num / den * PI);
        }
        return parse_number(raw).map(|a| a * PI);
    }
    parse_number(t)
}

impl SystemConfig {
    /// Set a single field from its config-file key and value text.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad value for {key}: {what}"));
        let num = |v: &str| parse_number(v).ok_or_else(|| bad("expected a number"));
        let int = |v: &str| -> Result<usize> {
            v.trim()
                .parse::<usize>()
                .map_err(|_| bad("expected a non-negative integer"))
        };
        match key {
            "n_tx_antennas" => self.n_tx_antennas = int(value)?,
            "n_irs_elements" => self.n_irs_elements = int(value)?,
            "tx_power" => self.tx_power = parse_power(value).ok_or_else(|| bad("expected watts or dBm"))?,
            "pa_cm" => self.pa_cm = num(value)?,
            "pa_an" => self.pa_an = num(value)?,
            "noise_bob" => self.noise_bob = parse_power(value).ok_or_else(|| bad("expected watts or dBm"))?,
            "noise_eve" => self.noise_eve = parse_power(value).ok_or_else(|| bad("expected watts or dBm"))?,
            "spacing_ratio" => self.spacing_ratio = num(value)?,
            "d_ai" => self.d_ai = num(value)?,
            "d_ab" => self.d_ab = num(value)?,
            "d_ae" => self.d_ae = num(value)?,
            "theta_ai" => self.theta_ai = parse_angle(value).ok_or_else(|| bad("expected radians or 'a/b pi'"))?,
            "theta_ab" => self.theta_ab = parse_angle(value).ok_or_else(|| bad("expected radians or 'a/b pi'"))?,
            "theta_ae" => self.theta_ae = parse_angle(value).ok_or_else(|| bad("expected radians or 'a/b pi'"))?,
            "path_loss_exponent" => self.path_loss_exponent = num(value)?,
            "path_loss_ref_gain" => self.path_loss_ref_gain = num(value)?,
            "convergence_threshold" => self.convergence_threshold = num(value)?,
            "max_outer_iterations" => self.max_outer_iterations = int(value)?,
            "multistart_count" => self.multistart_count = int(value)?,
            "random_phase_draws" => self.random_phase_draws = int(value)?,
            "rng_seed" => {
                self.rng_seed = value
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| bad("expected a u64 seed"))?
            }
            _ => return Err(Error::InvalidConfig(format!("unknown key: {key}"))),
        }
        Ok(())
    }

    /// Parse a flat key-value config text. Lines are `key = value`; `#`
    /// starts a comment; blank lines are ignored. Unknown keys are errors.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = SystemConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::ConfigParse {
                line: idx + 1,
                message: "expected 'key = value'".into(),
            })?;
            cfg.set_key(key.trim(), value.trim())
                .map_err(|e| Error::ConfigParse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_str(&text)
    }

    /// Check the structural invariants. Every constructor path runs this;
    /// hand-built configs should call it too.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_tx_antennas < 1 {
            return fail("n_tx_antennas must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.pa_cm) || !(0.0..=1.0).contains(&self.pa_an) {
            return fail("pa_cm and pa_an must lie in [0, 1]".into());
        }
        if (self.pa_cm + self.pa_an - 1.0).abs() > 1e-9 {
            return fail(format!(
                "pa_cm + pa_an must equal 1 (got {})",
                self.pa_cm + self.pa_an
            ));
        }
        for (name, v) in [
            ("tx_power", self.tx_power),
            ("noise_bob", self.noise_bob),
            ("noise_eve", self.noise_eve),
            ("spacing_ratio", self.spacing_ratio),
            ("d_ai", self.d_ai),
            ("d_ab", self.d_ab),
            ("d_ae", self.d_ae),
            ("path_loss_ref_gain", self.path_loss_ref_gain),
            ("convergence_threshold", self.convergence_threshold),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be strictly positive (got {v})"));
            }
        }
        if self.path_loss_exponent < 0.0 || !self.path_loss_exponent.is_finite() {
            return fail("path_loss_exponent must be non-negative".into());
        }
        for (name, v) in [
            ("theta_ai", self.theta_ai),
            ("theta_ab", self.theta_ab),
            ("theta_ae", self.theta_ae),
        ] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        if self.max_outer_iterations < 1 {
            return fail("max_outer_iterations must be >= 1".into());
        }
        if self.multistart_count < 1 {
            return fail("multistart_count must be >= 1".into());
        }
        if self.random_phase_draws < 1 {
            return fail("random_phase_draws must be >= 1".into());
        }
        Ok(())
    }

    /// Canonical text form: every key on one line, full float precision,
    /// fixed order. Identical configs produce identical strings.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_tx_antennas = {}", self.n_tx_antennas);
        let _ = writeln!(s, "n_irs_elements = {}", self.n_irs_elements);
        let _ = writeln!(s, "tx_power = {}", self.tx_power);
        let _ = writeln!(s, "pa_cm = {}", self.pa_cm);
        let _ = writeln!(s, "pa_an = {}", self.pa_an);
        let _ = writeln!(s, "noise_bob = {}", self.noise_bob);
        let _ = writeln!(s, "noise_eve = {}", self.noise_eve);
        let _ = writeln!(s, "spacing_ratio = {}", self.spacing_ratio);
        let _ = writeln!(s, "d_ai = {}", self.d_ai);
        let _ = writeln!(s, "d_ab = {}", self.d_ab);
        let _ = writeln!(s, "d_ae = {}", self.d_ae);
        let _ = writeln!(s, "theta_ai = {}", self.theta_ai);
        let _ = writeln!(s, "theta_ab = {}", self.theta_ab);
        let _ = writeln!(s, "theta_ae = {}", self.theta_ae);
        let _ = writeln!(s, "path_loss_exponent = {}", self.path_loss_exponent);
        let _ = writeln!(s, "path_loss_ref_gain = {}", self.path_loss_ref_gain);
        let _ = writeln!(s, "convergence_threshold = {}", self.convergence_threshold);
        let _ = writeln!(s, "max_outer_iterations = {}", self.max_outer_iterations);
        let _ = writeln!(s, "multistart_count = {}", self.multistart_count);
        let _ = writeln!(s, "random_phase_draws = {}", self.random_phase_draws);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        s
    }

    /// SHA-256 of the canonical form, hex encoded. Used in output manifests.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_passes_validation() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-40.0) - 1e-7).abs() < 1e-19);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn parses_units_and_pi_fractions() {
        let cfg = SystemConfig::parse_str(
            "tx_power = 30 dBm\n\
             noise_bob = -40 dBm   # comment\n\
             noise_eve = 1e-7\n\
             theta_ai = 29/60 pi\n\
             theta_ab = 1/2 pi\n\
             theta_ae = 2.0071286397934787\n",
        )
        .unwrap();
        assert!((cfg.tx_power - 1.0).abs() < 1e-12);
        assert!((cfg.noise_bob - 1e-7).abs() < 1e-19);
        assert!((cfg.noise_eve - 1e-7).abs() < 1e-19);
        assert!((cfg.theta_ai - 29.0 * PI / 60.0).abs() < 1e-12);
        assert!((cfg.theta_ab - PI / 2.0).abs() < 1e-12);
        assert!((cfg.theta_ae - 23.0 * PI / 36.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = SystemConfig::parse_str("frobnicate = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn rejects_broken_invariants() {
        assert!(SystemConfig::parse_str("pa_cm = 0.7\n").is_err()); // 0.7 + 0.5 != 1
        assert!(SystemConfig::parse_str("n_tx_antennas = 0\n").is_err());
        assert!(SystemConfig::parse_str("d_ab = -1\n").is_err());
        assert!(SystemConfig::parse_str("convergence_threshold = 0\n").is_err());
        // pa pair that sums to 1 is fine
        let cfg = SystemConfig::parse_str("pa_cm = 0.7\npa_an = 0.3\n").unwrap();
        assert!((cfg.pa_cm - 0.7).abs() < 1e-15);
    }

    #[test]
    fn hash_tracks_content() {
        let a = SystemConfig::default();
        let mut b = SystemConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.n_irs_elements = 32;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
