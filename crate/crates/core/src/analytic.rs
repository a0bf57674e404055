//! Closed-form SINR lower bounds, spectral efficiency, area power consumption
//! and energy efficiency for a design point.

use crate::error::{Error, Infeasibility, Result};
use crate::params::{Combiner, DesignPoint, EeBreakdown, NetworkParams, PowerModel};

/// Relative slack when checking Kζ ≤ τ_c, so that ζ = τ_c/K computed in
/// floating point is not rejected.
const OVERHEAD_SLACK: f64 = 1e-12;

/// Decomposition of an SINR bound: `sinr = numerator / (in_term + pc_term)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrTerms {
    pub in_term: f64,
    pub pc_term: f64,
    pub sinr: f64,
}

/// Interference-plus-noise term IN of the ZF bound.
pub fn interference_noise(net: &NetworkParams, zeta: f64, k: f64) -> f64 {
    let a = net.alpha;
    let inv_snr = 1.0 / net.snr;
    let inv_snr_p = 1.0 / net.snr_p;
    (k + inv_snr) * (1.0 + 2.0 / (zeta * (a - 2.0)) + inv_snr_p)
        + 2.0 * k / (a - 2.0) * (1.0 + inv_snr_p)
        + k / zeta * (4.0 / ((a - 2.0) * (a - 2.0)) + 1.0 / (a - 1.0))
        - k * (1.0 + 1.0 / (zeta * (a - 1.0)))
}

/// ZF bound `(M − K)/(IN + PC)` with `PC = (M − K)/(ζ(α − 1))`.
pub fn sinr_zf(net: &NetworkParams, dp: &DesignPoint) -> Result<SinrTerms> {
    if dp.m < dp.k {
        return Err(Infeasibility::ZfNeedsMoreAntennas.into());
    }
    let dof = dp.m - dp.k;
    let in_term = interference_noise(net, dp.zeta, dp.k);
    let pc_term = dof / (dp.zeta * (net.alpha - 1.0));
    let sinr = if dof == 0.0 { 0.0 } else { dof / (in_term + pc_term) };
    Ok(SinrTerms {
        in_term,
        pc_term,
        sinr,
    })
}

/// MR bound: full array gain M in the numerator, ZF's IN without its final
/// negative term, and pilot contamination scaling with M.
pub fn sinr_mr(net: &NetworkParams, dp: &DesignPoint) -> Result<SinrTerms> {
    if !(dp.m >= 1.0) {
        return Err(Error::param("m", format!("MR needs M >= 1, got {}", dp.m)));
    }
    let a1 = net.alpha - 1.0;
    let in_term = interference_noise(net, dp.zeta, dp.k) + dp.k * (1.0 + 1.0 / (dp.zeta * a1));
    let pc_term = dp.m / (dp.zeta * a1);
    Ok(SinrTerms {
        in_term,
        pc_term,
        sinr: dp.m / (in_term + pc_term),
    })
}

pub fn sinr(net: &NetworkParams, dp: &DesignPoint, combiner: Combiner) -> Result<SinrTerms> {
    match combiner {
        Combiner::Zf => sinr_zf(net, dp),
        Combiner::Mr => sinr_mr(net, dp),
    }
}

/// Pre-log factor 1 − Kζ/τ_c, rejecting overheads beyond the coherence block.
pub fn prelog(net: &NetworkParams, dp: &DesignPoint) -> Result<f64> {
    let frac = dp.pilot_fraction(net);
    if frac > 1.0 + OVERHEAD_SLACK {
        return Err(Infeasibility::PilotOverhead.into());
    }
    Ok((1.0 - frac).max(0.0))
}

/// SE per UE [bit/s/Hz]: (1 − Kζ/τ_c)·log₂(1 + SINR).
pub fn se_per_ue(net: &NetworkParams, dp: &DesignPoint, sinr: f64) -> Result<f64> {
    Ok(prelog(net, dp)? * (1.0 + sinr).log2())
}

/// Per-BS spectral efficiency K·SE [bit/s/Hz/BS].
pub fn ase_per_bs(net: &NetworkParams, dp: &DesignPoint, sinr: f64) -> Result<f64> {
    Ok(dp.k * se_per_ue(net, dp, sinr)?)
}

/// Area spectral efficiency λ·K·SE [bit/s/Hz/km²].
pub fn ase(net: &NetworkParams, dp: &DesignPoint, sinr: f64) -> Result<f64> {
    Ok(net.lambda * ase_per_bs(net, dp, sinr)?)
}

/// Returns `(apc_bar [W/BS], apc [W/km²])` for a given ASE [bit/s/Hz/km²].
pub fn apc(net: &NetworkParams, pm: &PowerModel, dp: &DesignPoint, ase_value: f64) -> (f64, f64) {
    let apc_bar = pm.per_bs(dp.zeta, dp.k, dp.m);
    // B_w·ASE is bit/s/km²; A is W/(bit/s).
    (apc_bar, net.lambda * apc_bar + net.bandwidth * pm.a_coeff * ase_value)
}

/// EE = B_w·ASE/APC at the design point, with the SINR bound of `combiner`.
pub fn energy_efficiency(
    net: &NetworkParams,
    pm: &PowerModel,
    dp: &DesignPoint,
    combiner: Combiner,
) -> Result<EeBreakdown> {
    let terms = sinr(net, dp, combiner)?;
    let se = se_per_ue(net, dp, terms.sinr)?;
    let ase = net.lambda * dp.k * se;
    let (apc_bar, apc) = apc(net, pm, dp, ase);
    if !(apc > 0.0) {
        return Err(Error::Numerical(format!("non-positive area power {apc}")));
    }
    Ok(EeBreakdown {
        sinr: terms.sinr,
        interference_noise_term: terms.in_term,
        pilot_contamination_term: terms.pc_term,
        se,
        ase,
        apc,
        apc_bar,
        ee: net.bandwidth * ase / apc,
    })
}

/// Per-BS form of the EE with the SINR pinned to the target γ:
/// `B_w·S / (A·B_w·S + APC̄)` with `S = K(1 − Kζ/τ_c)log₂(1 + γ)`.
pub fn ee_at_target(net: &NetworkParams, pm: &PowerModel, dp: &DesignPoint) -> Result<f64> {
    let s = dp.k * prelog(net, dp)? * (1.0 + net.gamma).log2();
    let apc_bar = pm.per_bs(dp.zeta, dp.k, dp.m);
    let denom = pm.a_coeff * net.bandwidth * s + apc_bar;
    if !(denom > 0.0) {
        return Err(Error::Numerical(format!("non-positive per-BS power {denom}")));
    }
    Ok(net.bandwidth * s / denom)
}
