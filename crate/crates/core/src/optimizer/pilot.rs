//! Minimum pilot reuse factor meeting the SINR target, and feasibility.

use crate::error::{Infeasibility, Result};
use crate::params::{Combiner, NetworkParams};

/// Coefficients `(B1, B2)` of the pilot-reuse bound for `(M, K)`.
pub fn reuse_coefficients(net: &NetworkParams, m: f64, k: f64) -> (f64, f64) {
    let a = net.alpha;
    let inv_snr = 1.0 / net.snr;
    let inv_snr_p = 1.0 / net.snr_p;
    let b1 = 4.0 * k / ((a - 2.0) * (a - 2.0)) + m / (a - 1.0) + 2.0 * (k + inv_snr) / (a - 2.0)
        - k / (a - 1.0);
    let b2 = (inv_snr + 2.0 * k / (a - 2.0)) * (1.0 + inv_snr_p) + k * inv_snr_p;
    (b1, b2)
}

/// Numerator and denominator of the unclamped bound ζ ≥ num/den.
fn bound_parts(net: &NetworkParams, m: f64, k: f64, combiner: Combiner) -> (f64, f64) {
    let (b1, b2) = reuse_coefficients(net, m, k);
    let g = net.gamma;
    match combiner {
        Combiner::Zf => (b1 * g, m - k - b2 * g),
        Combiner::Mr => (b1 * g + 2.0 * k * g / (net.alpha - 1.0), m - k * g - b2 * g),
    }
}

/// Structured feasibility verdict for `(M, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: Option<Infeasibility>,
}

impl Feasibility {
    fn ok() -> Self {
        Feasibility {
            feasible: true,
            reason: None,
        }
    }

    fn fail(r: Infeasibility) -> Self {
        Feasibility {
            feasible: false,
            reason: Some(r),
        }
    }

    pub fn into_result(self) -> Result<()> {
        match self.reason {
            None => Ok(()),
            Some(r) => Err(r.into()),
        }
    }
}

/// γ < τ_c(α − 1) is necessary for any deployment.
pub fn target_reachable(net: &NetworkParams) -> bool {
    net.gamma < net.tau_c * (net.alpha - 1.0)
}

pub fn feasibility(net: &NetworkParams, m: f64, k: f64, combiner: Combiner) -> Feasibility {
    if !target_reachable(net) {
        return Feasibility::fail(Infeasibility::SinrTargetUnreachable);
    }
    if !(k > 0.0) {
        return Feasibility::fail(Infeasibility::EmptyFeasibleSet);
    }
    if combiner == Combiner::Zf && !(m > k) {
        return Feasibility::fail(Infeasibility::ZfNeedsMoreAntennas);
    }
    let (num, den) = bound_parts(net, m, k, combiner);
    if !(den > 0.0) {
        return Feasibility::fail(Infeasibility::NotEnoughAntennas);
    }
    let zeta = (num / den).max(1.0);
    if k * zeta > net.tau_c {
        return Feasibility::fail(Infeasibility::PilotOverhead);
    }
    Feasibility::ok()
}

/// The raw (unclamped) lower bound on ζ; may be below 1.
pub fn zeta_bound(net: &NetworkParams, m: f64, k: f64, combiner: Combiner) -> Result<f64> {
    if !target_reachable(net) {
        return Err(Infeasibility::SinrTargetUnreachable.into());
    }
    if combiner == Combiner::Zf && !(m > k) {
        return Err(Infeasibility::ZfNeedsMoreAntennas.into());
    }
    let (num, den) = bound_parts(net, m, k, combiner);
    if !(den > 0.0) {
        return Err(Infeasibility::NotEnoughAntennas.into());
    }
    Ok(num / den)
}

/// Smallest feasible pilot reuse factor, max(1, bound), checked against τ_c/K.
pub fn zeta_star_for(net: &NetworkParams, m: f64, k: f64, combiner: Combiner) -> Result<f64> {
    let zeta = zeta_bound(net, m, k, combiner)?.max(1.0);
    if k * zeta > net.tau_c {
        return Err(Infeasibility::PilotOverhead.into());
    }
    Ok(zeta)
}

/// ZF pilot reuse factor ζ* = max(1, B1γ/(M − K − B2γ)).
pub fn zeta_star(net: &NetworkParams, m: f64, k: f64) -> Result<f64> {
    zeta_star_for(net, m, k, Combiner::Zf)
}

/// MR pilot reuse factor ζ* = max(1, (B1γ + 2Kγ/(α−1))/(M − Kγ − B2γ)).
pub fn zeta_star_mr(net: &NetworkParams, m: f64, k: f64) -> Result<f64> {
    zeta_star_for(net, m, k, Combiner::Mr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sinr_mr, sinr_zf};
    use crate::params::DesignPoint;

    #[test]
    fn hand_values() {
        let net = NetworkParams {
            alpha: 4.0,
            snr: 1.0,
            snr_p: f64::INFINITY,
            gamma: 1.0,
            ..NetworkParams::default()
        };
        let (b1, b2) = reuse_coefficients(&net, 12.0, 2.0);
        assert!((b1 - 25.0 / 3.0).abs() < 1e-12);
        assert!((b2 - 3.0).abs() < 1e-12);
        let z = zeta_star(&net, 12.0, 2.0).unwrap();
        assert!((z - 25.0 / 21.0).abs() < 1e-12, "{z}");
    }

    #[test]
    fn clamps_to_one() {
        let net = NetworkParams::default().with_gamma(0.05);
        assert!(zeta_bound(&net, 200.0, 2.0, Combiner::Zf).unwrap() < 1.0);
        assert_eq!(zeta_star(&net, 200.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn unreachable_target() {
        let net = NetworkParams::default();
        let net = net.with_gamma(net.tau_c * (net.alpha - 1.0));
        let v = feasibility(&net, 100.0, 1.0, Combiner::Zf);
        assert!(!v.feasible);
        assert_eq!(v.reason, Some(Infeasibility::SinrTargetUnreachable));
        assert!(v.into_result().unwrap_err().to_string().contains("SINR target unreachable"));
    }

    #[test]
    fn equal_m_k_infeasible() {
        let v = feasibility(&NetworkParams::default(), 10.0, 10.0, Combiner::Zf);
        assert_eq!(v.reason, Some(Infeasibility::ZfNeedsMoreAntennas));
    }

    #[test]
    fn reference_zf_gamma3_feasible() {
        let net = NetworkParams::default();
        assert!(feasibility(&net, 91.0, 10.0, Combiner::Zf).feasible);
        let z = zeta_star(&net, 91.0, 10.0).unwrap();
        assert!((z - 7.3).abs() <= 0.1, "{z}");
    }

    #[test]
    fn reference_mr_designs() {
        let net = NetworkParams::default();
        let z3 = zeta_star_mr(&net, 104.0, 9.0).unwrap();
        assert!((z3 - 7.9).abs() <= 0.1, "{z3}");
        let z7 = zeta_star_mr(&net.with_gamma(7.0), 139.0, 5.0).unwrap();
        assert!((z7 - 14.7).abs() <= 0.15, "{z7}");
    }

    #[test]
    fn mr_at_unit_target_matches_zf_structure() {
        let net = NetworkParams::default().with_gamma(1.0);
        let (m, k) = (60.0, 8.0);
        let (b1, b2) = reuse_coefficients(&net, m, k);
        let zf = zeta_bound(&net, m, k, Combiner::Zf).unwrap();
        let mr = zeta_bound(&net, m, k, Combiner::Mr).unwrap();
        assert!((zf - b1 / (m - k - b2)).abs() < 1e-12);
        assert!((mr - (b1 + 2.0 * k / (net.alpha - 1.0)) / (m - k - b2)).abs() < 1e-12);
    }

    #[test]
    fn overhead_infeasible() {
        let net = NetworkParams::default().with_gamma(7.0);
        // Just above the denominator root ζ* explodes.
        let err = zeta_star(&net, 40.0, 10.0).unwrap_err();
        assert!(err.infeasibility().is_some());
        let err = zeta_star(&net, 10.0, 2.0).unwrap_err();
        assert!(err.infeasibility().is_some());
    }

    #[test]
    fn closure_both_combiners() {
        let net = NetworkParams::default();
        for &(m, k, g) in &[(91.0, 10.0, 3.0), (78.0, 20.0, 1.0), (122.0, 6.0, 7.0)] {
            let net = net.with_gamma(g);
            let z = zeta_bound(&net, m, k, Combiner::Zf).unwrap();
            let s = sinr_zf(&net, &DesignPoint::new(z, k, m)).unwrap().sinr;
            assert!(((s - g) / g).abs() < 1e-12);
            let z = zeta_bound(&net, m + 20.0, k, Combiner::Mr).unwrap();
            let s = sinr_mr(&net, &DesignPoint::new(z, k, m + 20.0)).unwrap().sinr;
            assert!(((s - g) / g).abs() < 1e-12);
        }
    }

    #[test]
    fn decreasing_in_m_snr_alpha() {
        let net = NetworkParams::default();
        let (m, k) = (91.0, 10.0);
        let z0 = zeta_bound(&net, m, k, Combiner::Zf).unwrap();
        assert!(zeta_bound(&net, m + 1.0, k, Combiner::Zf).unwrap() < z0);
        let louder = NetworkParams { snr: 2.0, ..net };
        assert!(zeta_bound(&louder, m, k, Combiner::Zf).unwrap() < z0);
        let pilots = NetworkParams { snr_p: 10.0, ..net };
        assert!(zeta_bound(&pilots, m, k, Combiner::Zf).unwrap() < z0);
        let steeper = NetworkParams { alpha: 4.0, ..net };
        assert!(zeta_bound(&steeper, m, k, Combiner::Zf).unwrap() < z0);
    }
}
