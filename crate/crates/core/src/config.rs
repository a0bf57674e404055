//! Plain-text `key=value` configuration files.
//!
//! One pair per line, `#` starts a comment. Keys are the lower_snake field
//! names of [`NetworkParams`] and [`HardwareParams`]; `snr_db`, `snr_p_db` and
//! `upsilon_db` take decibels (`upsilon_db` is the loss at 1 km, so 130 maps
//! to Υ = 1e-13). Unspecified keys keep their defaults.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{HardwareParams, NetworkParams};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<(NetworkParams, HardwareParams)> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parses configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<(NetworkParams, HardwareParams)> {
    let mut net = NetworkParams::default();
    let mut hw = HardwareParams::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                line: idx + 1,
                reason: format!("expected key=value, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let v: f64 = parse_number(value).ok_or_else(|| Error::Config {
            line: idx + 1,
            reason: format!("`{key}`: cannot parse `{value}` as a number"),
        })?;
        match key {
            "lambda" => net.lambda = v,
            "alpha" => net.alpha = v,
            "upsilon" => net.upsilon = v,
            "upsilon_db" => net.upsilon = db_to_linear(-v),
            "tau_c" => net.tau_c = v,
            "bandwidth" => net.bandwidth = v,
            "snr" => net.snr = v,
            "snr_db" => net.snr = db_to_linear(v),
            "snr_p" => net.snr_p = v,
            "snr_p_db" => net.snr_p = db_to_linear(v),
            "gamma" => net.gamma = v,
            "sigma2" => net.sigma2 = v,
            "mu" => net.mu = v,
            "p_fix" => hw.p_fix = v,
            "p_lo" => hw.p_lo = v,
            "p_bs" => hw.p_bs = v,
            "p_ue" => hw.p_ue = v,
            "p_cod" => hw.p_cod = v,
            "p_dec" => hw.p_dec = v,
            "p_bt" => hw.p_bt = v,
            "l_bs" => hw.l_bs = v,
            "l_ue" => hw.l_ue = v,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
    }
    net.validate()?;
    hw.validate()?;
    Ok((net, hw))
}

fn parse_number(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
        other => other.parse().ok(),
    }
}

/// Serializes parameters in linear units. `parse_config` on the result
/// reproduces the inputs exactly.
pub fn to_config_string(net: &NetworkParams, hw: &HardwareParams) -> String {
    let pairs = [
        ("lambda", net.lambda),
        ("alpha", net.alpha),
        ("upsilon", net.upsilon),
        ("tau_c", net.tau_c),
        ("bandwidth", net.bandwidth),
        ("snr", net.snr),
        ("snr_p", net.snr_p),
        ("gamma", net.gamma),
        ("sigma2", net.sigma2),
        ("mu", net.mu),
        ("p_fix", hw.p_fix),
        ("p_lo", hw.p_lo),
        ("p_bs", hw.p_bs),
        ("p_ue", hw.p_ue),
        ("p_cod", hw.p_cod),
        ("p_dec", hw.p_dec),
        ("p_bt", hw.p_bt),
        ("l_bs", hw.l_bs),
        ("l_ue", hw.l_ue),
    ];
    let mut out = String::new();
    for (k, v) in pairs {
        // `{}` on f64 prints the shortest string that round-trips.
        let _ = writeln!(out, "{k}={v}");
    }
    out
}
