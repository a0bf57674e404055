//! Monte Carlo estimation of the SE bounds and validation of the moment and
//! channel-level identities behind the closed forms.
//!
//! Every drop or channel draw gets its own ChaCha stream keyed by
//! `(seed, index)`; samples are collected in index order and reduced with
//! compensated summation, so results do not depend on the thread count.

pub mod channel;
pub mod report;

use rayon::prelude::*;

use crate::analytic::{apc, prelog};
use crate::error::{Error, Result};
use crate::geometry::{
    product_sums, rayleigh_cdf, sample_drop_with, theta_sums, typical_ue_sums, BsCount,
    DropRealization, ThetaSums, TorusRegion,
};
use crate::params::{DesignPoint, NetworkParams, PowerModel};
use crate::stats::{ks_critical_1pct, ks_statistic, McEstimate, NeumaierSum};

pub use channel::{
    channel_level_draw, validate_channel_identities, validate_uatf_sinr, ChannelDraw, ChannelScenario,
};
pub use report::{CheckLine, Report};

/// Which UEs of a drop stand in for the typical UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TypicalMode {
    /// The first UE accepted by rejection sampling (a uniform point).
    #[default]
    FirstAccepted,
    /// Average over every UE of the drop. Cheaper in drops but weights
    /// cells equally, which is not the typical-UE distribution.
    AllUes,
}

/// Geometry options shared by the Monte Carlo routines.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McConfig {
    pub region: TorusRegion,
    pub bs_count: BsCount,
    pub typical: TypicalMode,
}

/// Maps `f` over `0..n` in parallel, keeping index order.
pub(crate) fn par_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

fn check_design(dp: &DesignPoint) -> Result<usize> {
    if !(dp.m > dp.k) {
        return Err(crate::error::Infeasibility::ZfNeedsMoreAntennas.into());
    }
    if dp.k < 1.0 || dp.k.fract() != 0.0 {
        return Err(Error::param("k", format!("integer k ≥ 1 required, got {}", dp.k)));
    }
    if !(dp.zeta >= 1.0) {
        return Err(Error::param("zeta", format!("zeta ≥ 1 required, got {}", dp.zeta)));
    }
    Ok(dp.k as usize)
}

/// SINR of a UE given its interference sums.
pub fn sinr_from_theta(net: &NetworkParams, dp: &DesignPoint, t: &ThetaSums) -> Result<f64> {
    let (m, k, z) = (dp.m, dp.k, dp.zeta);
    let den = (k + 1.0 / net.snr + t.theta1_sum) * (1.0 + 1.0 / net.snr_p + t.theta1_k / z)
        + (m - k) / z * t.theta2_k
        - (k + t.theta2_sum / z);
    if !(den > 0.0) {
        return Err(Error::Numerical(format!("non-positive SINR denominator {den}")));
    }
    Ok((m - k) / den)
}

/// SINR of UE `k` in cell `j` of a drop.
pub fn geometry_sinr_at(
    drop: &DropRealization,
    net: &NetworkParams,
    dp: &DesignPoint,
    j: usize,
    k: usize,
) -> Result<f64> {
    sinr_from_theta(net, dp, &theta_sums(drop, net, j, k))
}

/// SINR of the drop's typical UE.
pub fn geometry_sinr(drop: &DropRealization, net: &NetworkParams, dp: &DesignPoint) -> Result<f64> {
    let (j, k) = drop.typical;
    geometry_sinr_at(drop, net, dp, j, k)
}

/// Expectations entering the mean inverse SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaMoments {
    pub theta1_k: f64,
    pub theta2_k: f64,
    pub theta1_sum: f64,
    pub theta2_sum: f64,
    /// E{(Σ_i ϑ_ji^(1))·ϑ_jk^(1)}.
    pub cross: f64,
}

/// Moments implied by the PPP identities `2/(κα−2)`, `4/(α−2)²` and
/// `1/(α−1)` (the last one taken with equality).
pub fn analytic_theta_moments(net: &NetworkParams, k: f64) -> ThetaMoments {
    let a = net.alpha;
    ThetaMoments {
        theta1_k: 2.0 / (a - 2.0),
        theta2_k: 2.0 / (2.0 * a - 2.0),
        theta1_sum: k * 2.0 / (a - 2.0),
        theta2_sum: k * 2.0 / (2.0 * a - 2.0),
        cross: k * (4.0 / ((a - 2.0) * (a - 2.0)) + 1.0 / (a - 1.0)),
    }
}

/// Mean inverse SINR as a linear function of the interference moments.
pub fn inverse_sinr_expansion(net: &NetworkParams, dp: &DesignPoint, mo: &ThetaMoments) -> f64 {
    let (m, k, z) = (dp.m, dp.k, dp.zeta);
    let load = k + 1.0 / net.snr;
    let est = 1.0 + 1.0 / net.snr_p;
    (load * est + load * mo.theta1_k / z + est * mo.theta1_sum + mo.cross / z
        + (m - k) / z * mo.theta2_k
        - k
        - mo.theta2_sum / z)
        / (m - k)
}

fn drop_for(
    net: &NetworkParams,
    k: usize,
    seed: u64,
    i: u64,
    cfg: &McConfig,
) -> Result<DropRealization> {
    sample_drop_with(net, &cfg.region, k, seed, i, cfg.bs_count)
}

/// Per-drop samples of `f(theta)` under the configured typical-UE mode.
fn per_drop<T: Send>(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
    cfg: &McConfig,
    f: impl Fn(&ThetaSums) -> Result<T> + Sync + Send,
    reduce: impl Fn(Vec<T>) -> T + Sync + Send,
) -> Result<Vec<T>> {
    let k = check_design(dp)?;
    par_indexed(n_drops, |i| {
        let drop = drop_for(net, k, seed, i, cfg)?;
        match cfg.typical {
            TypicalMode::FirstAccepted => {
                let (j, kk) = drop.typical;
                f(&theta_sums(&drop, net, j, kk))
            }
            TypicalMode::AllUes => {
                let mut vals = Vec::with_capacity(drop.n_cells() * k);
                for j in 0..drop.n_cells() {
                    for kk in 0..k {
                        vals.push(f(&theta_sums(&drop, net, j, kk))?);
                    }
                }
                Ok(reduce(vals))
            }
        }
    })
}

fn mean_of(v: Vec<f64>) -> f64 {
    let n = v.len() as f64;
    v.into_iter().collect::<NeumaierSum>().value() / n
}

/// Average SE per UE, `(1 − Kζ/τ_c)·E{log₂(1 + SINR)}`, over `n_drops` drops.
pub fn mc_average_se(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_average_se_with(net, dp, n_drops, seed, &McConfig::default())
}

pub fn mc_average_se_with(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let pre = prelog(net, dp)?;
    if n_drops < 2 {
        return Err(Error::param("n", "n ≥ 2 required for std error"));
    }
    let rates = per_drop(
        net,
        dp,
        n_drops,
        seed,
        cfg,
        |t| Ok((1.0 + sinr_from_theta(net, dp, t)?).log2()),
        mean_of,
    )?;
    Ok(McEstimate::from_samples(&rates, seed)?.scaled(pre, 0.0))
}

/// EE with the Monte Carlo SE in place of the bound; the APC model is the
/// analytic one. The standard error is propagated to first order.
pub fn mc_energy_efficiency(
    net: &NetworkParams,
    pm: &PowerModel,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_energy_efficiency_with(net, pm, dp, n_drops, seed, &McConfig::default())
}

pub fn mc_energy_efficiency_with(
    net: &NetworkParams,
    pm: &PowerModel,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let se = mc_average_se_with(net, dp, n_drops, seed, cfg)?;
    Ok(ee_from_se(net, pm, dp, &se))
}

/// EE estimate from an SE estimate.
pub fn ee_from_se(net: &NetworkParams, pm: &PowerModel, dp: &DesignPoint, se: &McEstimate) -> McEstimate {
    let ase = net.lambda * dp.k * se.mean;
    let (apc_bar, apc_total) = apc(net, pm, dp, ase);
    let ee = if ase == 0.0 { 0.0 } else { net.bandwidth * ase / apc_total };
    let d_ee = net.bandwidth * net.lambda * apc_bar / (apc_total * apc_total) * net.lambda * dp.k;
    McEstimate {
        mean: ee,
        std_error: d_ee * se.std_error,
        ..*se
    }
}

/// Empirical interference moments and inverse SINR over drops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSinrCheck {
    pub inverse_sinr: McEstimate,
    pub moments: ThetaMoments,
    /// The expansion evaluated at `moments`.
    pub expansion: f64,
}

impl InverseSinrCheck {
    pub fn relative_error(&self) -> f64 {
        (self.inverse_sinr.mean - self.expansion).abs() / self.expansion.abs()
    }
}

pub fn inverse_sinr_check(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_drops: usize,
    seed: u64,
    cfg: &McConfig,
) -> Result<InverseSinrCheck> {
    let rows = per_drop(
        net,
        dp,
        n_drops,
        seed,
        cfg,
        |t| {
            let inv = 1.0 / sinr_from_theta(net, dp, t)?;
            Ok([inv, t.theta1_k, t.theta2_k, t.theta1_sum, t.theta2_sum, t.theta1_sum * t.theta1_k])
        },
        |v| {
            let n = v.len() as f64;
            let mut acc = [NeumaierSum::new(); 6];
            for r in &v {
                for (a, x) in acc.iter_mut().zip(r) {
                    a.add(*x);
                }
            }
            acc.map(|a| a.value() / n)
        },
    )?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let m = |c: usize| mean_of(col(c));
    let moments = ThetaMoments {
        theta1_k: m(1),
        theta2_k: m(2),
        theta1_sum: m(3),
        theta2_sum: m(4),
        cross: m(5),
    };
    Ok(InverseSinrCheck {
        inverse_sinr: McEstimate::from_samples(&col(0), seed)?,
        moments,
        expansion: inverse_sinr_expansion(net, dp, &moments),
    })
}

/// Empirical interference moments of the typical UE and its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMoments {
    /// UE-side sum `Σ_l (d_own/d_l)^α` for the typical UE.
    pub theta1: McEstimate,
    /// Same with exponent 2α.
    pub theta2: McEstimate,
    /// Cross-cell double sum at the typical UE's BS.
    pub cross_cell: McEstimate,
    /// Same-cell product sum at the typical UE's BS.
    pub same_cell: McEstimate,
    pub bs_count: McEstimate,
    pub serving_distances: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_critical: f64,
}

/// Estimates the interference moments over `n_drops` drops with `k ≥ 2`
/// UEs per cell.
pub fn geometry_moments(
    net: &NetworkParams,
    k: usize,
    n_drops: usize,
    seed: u64,
    cfg: &McConfig,
) -> Result<GeometryMoments> {
    if k < 2 {
        return Err(Error::param("k", "k ≥ 2 required for the product sums"));
    }
    let rows = par_indexed(n_drops, |i| {
        let drop = drop_for(net, k, seed, i, cfg)?;
        let (j, kk) = drop.typical;
        let (s1, s2) = typical_ue_sums(&drop, net);
        let (cross, same) = product_sums(&drop, net, j, kk, (kk + 1) % k);
        Ok([
            s1,
            s2,
            cross,
            same,
            drop.n_cells() as f64,
            drop.serving_distance(j, kk),
        ])
    })?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let est = |c: usize| McEstimate::from_samples(&col(c), seed);
    let serving = col(5);
    Ok(GeometryMoments {
        theta1: est(0)?,
        theta2: est(1)?,
        cross_cell: est(2)?,
        same_cell: est(3)?,
        bs_count: est(4)?,
        ks_statistic: ks_statistic(&serving, |r| rayleigh_cdf(net.lambda, r)),
        ks_critical: ks_critical_1pct(serving.len()),
        serving_distances: serving,
    })
}

/// Checks the empirical interference moments against their closed forms:
/// `2/(κα−2)` for κ = 1, 2, the cross-cell product `4/(α−2)²`, the
/// same-cell product (one-sided, `≤ 1/(α−1)`) and a KS test of the serving
/// distance against Rayleigh(√(1/(2πλ))).
pub fn geometry_report(net: &NetworkParams, n_drops: usize, seed: u64, cfg: &McConfig) -> Result<Report> {
    let g = geometry_moments(net, 2, n_drops, seed, cfg)?;
    let a = net.alpha;
    let mut r = Report::default();
    for (name, target, e) in [
        ("theta1_mean", 2.0 / (a - 2.0), &g.theta1),
        ("theta2_mean", 2.0 / (2.0 * a - 2.0), &g.theta2),
        ("cross_cell_product", 4.0 / ((a - 2.0) * (a - 2.0)), &g.cross_cell),
    ] {
        r.push(CheckLine::within_se(name, target, e.mean, e.std_error, 3.0));
    }
    r.push(CheckLine::at_most(
        "same_cell_product",
        1.0 / (a - 1.0),
        g.same_cell.mean,
        g.same_cell.std_error,
        3.0,
    ));
    r.push(CheckLine::at_most("serving_distance_ks", g.ks_critical, g.ks_statistic, 0.0, 0.0));
    Ok(r)
}
