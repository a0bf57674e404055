//! Shared domain types: system constants, hardware figures, the per-BS power
//! polynomial and the optimization tuple.

use crate::error::{Error, Result};
use crate::special::gamma_function;
use std::f64::consts::PI;

/// Receive combining scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combiner {
    /// Zero-forcing, V = Ĥ(ĤᴴĤ)⁻¹.
    Zf,
    /// Maximum ratio, V = Ĥ.
    Mr,
}

impl Combiner {
    pub const ALL: [Combiner; 2] = [Combiner::Zf, Combiner::Mr];

    pub fn as_str(self) -> &'static str {
        match self {
            Combiner::Zf => "ZF",
            Combiner::Mr => "MR",
        }
    }
}

impl std::fmt::Display for Combiner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(Combiner::Zf),
            "mr" => Ok(Combiner::Mr),
            _ => Err(Error::param("combiner", format!("expected zf or mr, got `{s}`"))),
        }
    }
}

/// Physical and system constants of the network.
///
/// All SNR-type quantities are linear. `snr_p` may be `f64::INFINITY`
/// (noiseless pilots).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// BS density [BS/km²].
    pub lambda: f64,
    /// Pathloss exponent.
    pub alpha: f64,
    /// Pathloss at 1 km (linear gain, e.g. 1e-13 for 130 dB).
    pub upsilon: f64,
    /// Coherence block length [samples].
    pub tau_c: f64,
    /// Bandwidth B_w [Hz].
    pub bandwidth: f64,
    /// Uplink data SNR P0/σ².
    pub snr: f64,
    /// Effective pilot SNR P_p/σ².
    pub snr_p: f64,
    /// Average SINR target γ.
    pub gamma: f64,
    /// Noise power σ² [W].
    pub sigma2: f64,
    /// Power-amplifier efficiency μ.
    pub mu: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            lambda: 100.0,
            alpha: 3.76,
            upsilon: 1e-13,
            tau_c: 400.0,
            bandwidth: 20e6,
            snr: 1.0,
            snr_p: 10f64.powf(0.5),
            gamma: 3.0,
            sigma2: 1e-13,
            mu: 0.39,
        }
    }
}

impl NetworkParams {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Uplink data power P0 = SNR·σ² [W].
    pub fn p0(&self) -> f64 {
        self.snr * self.sigma2
    }

    /// Checks every invariant; the error names the field and its bound.
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite and > 0, got {v}")))
            }
        };
        finite_pos("lambda", self.lambda)?;
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", format!("alpha > 2 required, got {}", self.alpha)));
        }
        finite_pos("upsilon", self.upsilon)?;
        if !(self.tau_c >= 1.0) || !self.tau_c.is_finite() {
            return Err(Error::param("tau_c", format!("tau_c >= 1 required, got {}", self.tau_c)));
        }
        finite_pos("bandwidth", self.bandwidth)?;
        if !(self.snr > 0.0) {
            return Err(Error::param("snr", format!("snr > 0 required, got {}", self.snr)));
        }
        if !(self.snr_p > 0.0) {
            return Err(Error::param("snr_p", format!("snr_p > 0 required, got {}", self.snr_p)));
        }
        finite_pos("gamma", self.gamma)?;
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return Err(Error::param("sigma2", format!("sigma2 >= 0 required, got {}", self.sigma2)));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::param("mu", format!("mu in (0, 1] required, got {}", self.mu)));
        }
        Ok(())
    }
}

/// Hardware power figures (Table-I style).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareParams {
    /// Fixed power per BS [W].
    pub p_fix: f64,
    /// Local oscillator power [W].
    pub p_lo: f64,
    /// Power per BS antenna chain [W].
    pub p_bs: f64,
    /// Power per UE [W].
    pub p_ue: f64,
    /// Coding power [W/(Gbit/s)].
    pub p_cod: f64,
    /// Decoding power [W/(Gbit/s)].
    pub p_dec: f64,
    /// Backhaul power [W/(Gbit/s)].
    pub p_bt: f64,
    /// BS computational efficiency [flops/W].
    pub l_bs: f64,
    /// UE computational efficiency [flops/W]. Carried, not used by the model.
    pub l_ue: f64,
}

impl Default for HardwareParams {
    fn default() -> Self {
        HardwareParams {
            p_fix: 10.0,
            p_lo: 0.2,
            p_bs: 0.4,
            p_ue: 0.2,
            p_cod: 0.1,
            p_dec: 0.8,
            p_bt: 0.25,
            l_bs: 75e9,
            l_ue: 3e9,
        }
    }
}

impl HardwareParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_fix", self.p_fix),
            ("p_lo", self.p_lo),
            ("p_bs", self.p_bs),
            ("p_ue", self.p_ue),
            ("p_cod", self.p_cod),
            ("p_dec", self.p_dec),
            ("p_bt", self.p_bt),
        ];
        for (field, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        // L_BS appears in denominators.
        for (field, v) in [("l_bs", self.l_bs), ("l_ue", self.l_ue)] {
            if !(v > 0.0) {
                return Err(Error::param(field, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Coefficients of the per-BS power polynomial
/// `C0 + C1·K − C2·K²ζ + C3·K³ + D0·M + D1·MK + D2·MK²` plus the rate-proportional
/// coefficient A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub c0: f64,
    pub c1: f64,
    pub c1_bar: f64,
    pub c2: f64,
    pub c3: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    /// A [W/(bit/s)], already converted from W/(Gbit/s).
    pub a_coeff: f64,
    /// Transmit-power term U [W].
    pub u: f64,
}

/// Watts per (bit/s) for one W/(Gbit/s).
const PER_GBIT: f64 = 1e-9;

impl PowerModel {
    /// Applies the coefficient formulas. `P_SYN` is taken to be `p_lo`.
    pub fn build(net: &NetworkParams, hw: &HardwareParams) -> Result<Self> {
        net.validate()?;
        hw.validate()?;
        let u = transmit_power_term(net)?;
        let bw_per_flop = net.bandwidth / (net.tau_c * hw.l_bs);
        let c1_bar = hw.p_ue + 5.0 * bw_per_flop;
        Ok(PowerModel {
            c0: hw.p_fix + hw.p_lo,
            c1: c1_bar + u * (1.0 + 1.0 / net.tau_c),
            c1_bar,
            c2: u / net.tau_c,
            c3: bw_per_flop,
            d0: hw.p_bs,
            d1: 3.0 * bw_per_flop * (2.5 + net.tau_c),
            d2: 9.0 * net.bandwidth / (2.0 * net.tau_c * hw.l_bs),
            a_coeff: (hw.p_cod + hw.p_dec + hw.p_bt) * PER_GBIT,
            u,
        })
    }

    /// Returns a copy with C2 = C3 = D1 = D2 = 0 (negligible processing power
    /// and dense-network limit).
    pub fn without_processing_terms(mut self) -> Self {
        self.c2 = 0.0;
        self.c3 = 0.0;
        self.d1 = 0.0;
        self.d2 = 0.0;
        self
    }

    /// Per-BS power consumption [W] at (ζ, K, M).
    pub fn per_bs(&self, zeta: f64, k: f64, m: f64) -> f64 {
        self.c0 + self.c1 * k - self.c2 * k * k * zeta
            + self.c3 * k * k * k
            + self.d0 * m
            + self.d1 * m * k
            + self.d2 * m * k * k
    }
}

/// U = (1/μ)(P0/Υ)Γ(α/2 + 1)/(πλ)^{α/2}.
fn transmit_power_term(net: &NetworkParams) -> Result<f64> {
    if !(net.alpha > 2.0) {
        return Err(Error::param("alpha", "alpha > 2 required"));
    }
    if !(net.mu > 0.0) {
        return Err(Error::param("mu", "mu > 0 required"));
    }
    let g = gamma_function(net.alpha / 2.0 + 1.0)?;
    Ok(net.p0() / (net.mu * net.upsilon) * g / (PI * net.lambda).powf(net.alpha / 2.0))
}

/// The optimization tuple θ = (ζ, K, M). K and M are real in relaxed mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub zeta: f64,
    pub k: f64,
    pub m: f64,
}

impl DesignPoint {
    pub fn new(zeta: f64, k: f64, m: f64) -> Self {
        DesignPoint { zeta, k, m }
    }

    /// Antennas per UE, c̄ = M/K.
    pub fn cbar(&self) -> f64 {
        self.m / self.k
    }

    /// Fraction of the coherence block spent on pilots, Kζ/τ_c.
    pub fn pilot_fraction(&self, net: &NetworkParams) -> f64 {
        self.k * self.zeta / net.tau_c
    }
}

/// Closed-form performance of one design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeBreakdown {
    pub sinr: f64,
    /// Interference-plus-noise term of the SINR denominator.
    pub interference_noise_term: f64,
    /// Pilot-contamination term of the SINR denominator.
    pub pilot_contamination_term: f64,
    /// Spectral efficiency per UE [bit/s/Hz].
    pub se: f64,
    /// Area spectral efficiency [bit/s/Hz/km²].
    pub ase: f64,
    /// Area power consumption [W/km²].
    pub apc: f64,
    /// Per-BS circuit power [W].
    pub apc_bar: f64,
    /// Energy efficiency [bit/Joule].
    pub ee: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PowerModel {
        PowerModel::build(&NetworkParams::default(), &HardwareParams::default()).unwrap()
    }

    #[test]
    fn table_one_coefficients() {
        let pm = table();
        assert!((pm.c3 - 20e6 / (400.0 * 75e9)).abs() < 1e-18);
        assert!((pm.c3 - 6.666_666_666_7e-7).abs() < 1e-15);
        assert!((pm.d2 - 3.0e-6).abs() < 1e-18);
        assert!((pm.c0 - 10.2).abs() < 1e-12);
        assert!((pm.d0 - 0.4).abs() < 1e-15);
        assert!((pm.a_coeff - 1.15e-9).abs() < 1e-21);
        assert!((pm.d1 - 3.0 * 20e6 / (400.0 * 75e9) * 402.5).abs() < 1e-15);
    }

    #[test]
    fn coefficient_identities() {
        let net = NetworkParams::default();
        let pm = table();
        assert_eq!(pm.c2, pm.u / net.tau_c);
        assert_eq!(pm.c1, pm.c1_bar + pm.u * (1.0 + 1.0 / net.tau_c));
        // U is tiny at λ = 100 compared with C0.
        assert!(pm.u > 0.0 && pm.u < 1e-3 * pm.c0);
    }

    #[test]
    fn zero_transmit_power_limit() {
        let net = NetworkParams {
            sigma2: 0.0,
            mu: 1.0,
            ..NetworkParams::default()
        };
        let pm = PowerModel::build(&net, &HardwareParams::default()).unwrap();
        assert_eq!(pm.u, 0.0);
        assert_eq!(pm.c2, 0.0);
        assert_eq!(pm.c1, pm.c1_bar);
    }

    #[test]
    fn rejects_bad_alpha_and_mu() {
        let hw = HardwareParams::default();
        let net = NetworkParams {
            alpha: 2.0,
            ..NetworkParams::default()
        };
        assert!(matches!(
            PowerModel::build(&net, &hw),
            Err(Error::InvalidParam { field: "alpha", .. })
        ));
        let net = NetworkParams {
            mu: 0.0,
            ..NetworkParams::default()
        };
        assert!(matches!(
            PowerModel::build(&net, &hw),
            Err(Error::InvalidParam { field: "mu", .. })
        ));
    }

    #[test]
    fn transmit_power_contribution_nonnegative() {
        let net = NetworkParams::default();
        let pm = table();
        for k in 1..=40 {
            let k = k as f64;
            let zeta_max = net.tau_c / k;
            for zeta in [1.0, zeta_max / 2.0, zeta_max] {
                let contrib = pm.u * k * (1.0 + 1.0 / net.tau_c) - pm.c2 * k * k * zeta;
                assert!(contrib >= pm.u * k / net.tau_c * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn combiner_parse() {
        assert_eq!("zf".parse::<Combiner>().unwrap(), Combiner::Zf);
        assert_eq!("MR".parse::<Combiner>().unwrap(), Combiner::Mr);
        assert!("mmse".parse::<Combiner>().is_err());
    }
}
