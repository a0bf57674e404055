//! Alternating optimization over (ζ, M, K) with integer extraction.

use std::collections::HashSet;

use crate::analytic::energy_efficiency;
use crate::error::{Error, Infeasibility, Result};
use crate::params::{Combiner, DesignPoint, EeBreakdown, NetworkParams, PowerModel};

use super::lemma::{cbar_star_for, ee_along_ray, k_star_approx, k_star_numeric};
use super::pilot::zeta_star_for;

pub const MAX_ITERATIONS: usize = 100;
pub const EE_REL_TOL: f64 = 1e-9;

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub zeta: f64,
    pub m: f64,
    pub k: f64,
    pub ee: f64,
    /// EE of the relaxed (real-valued) point before integer extraction.
    pub relaxed_ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub design: DesignPoint,
    pub breakdown: EeBreakdown,
    pub combiner: Combiner,
    pub iterations: usize,
    pub trajectory: Vec<IterationRecord>,
    pub converged: bool,
}

/// Evaluates an integer candidate with ζ recomputed; `None` if infeasible.
fn evaluate(
    net: &NetworkParams,
    pm: &PowerModel,
    m: i64,
    k: i64,
    combiner: Combiner,
) -> Option<(DesignPoint, EeBreakdown)> {
    if k < 1 || m <= k {
        return None;
    }
    let (mf, kf) = (m as f64, k as f64);
    let zeta = zeta_star_for(net, mf, kf, combiner).ok()?;
    let dp = DesignPoint::new(zeta, kf, mf);
    energy_efficiency(net, pm, &dp, combiner)
        .ok()
        .map(|b| (dp, b))
}

/// Best feasible candidate; ties go to smaller K, then smaller M.
fn best_of(
    net: &NetworkParams,
    pm: &PowerModel,
    candidates: impl IntoIterator<Item = (i64, i64)>,
    combiner: Combiner,
) -> Option<(DesignPoint, EeBreakdown)> {
    let mut pts: Vec<(i64, i64)> = candidates.into_iter().collect();
    pts.sort_unstable_by_key(|&(m, k)| (k, m));
    pts.dedup();
    let mut best: Option<(DesignPoint, EeBreakdown)> = None;
    for (m, k) in pts {
        if let Some((dp, b)) = evaluate(net, pm, m, k, combiner) {
            if best.as_ref().is_none_or(|(_, bb)| b.ee > bb.ee) {
                best = Some((dp, b));
            }
        }
    }
    best
}

fn neighborhood(m: f64, k: f64, radius: i64) -> Vec<(i64, i64)> {
    let (m0, k0) = (m.floor() as i64, k.floor() as i64);
    let mut out = Vec::new();
    for dk in (1 - radius)..=radius {
        for dm in (1 - radius)..=radius {
            out.push((m0 + dm, k0 + dk));
        }
    }
    out
}

/// Integer (M, K) maximizing EE over the floor/ceil neighborhood of the
/// relaxed point, widening to ±2 if no neighbor is feasible.
pub fn integerize(
    net: &NetworkParams,
    pm: &PowerModel,
    m: f64,
    k: f64,
    combiner: Combiner,
) -> Result<(DesignPoint, EeBreakdown)> {
    if !(m.is_finite() && k.is_finite()) {
        return Err(Error::param("m", "relaxed point must be finite"));
    }
    best_of(net, pm, neighborhood(m, k, 1), combiner)
        .or_else(|| best_of(net, pm, neighborhood(m, k, 2), combiner))
        .ok_or_else(|| Infeasibility::EmptyFeasibleSet.into())
}

/// Relaxed step from the current K: returns (c̄*, K_relaxed).
fn relaxed_step(
    net: &NetworkParams,
    pm: &PowerModel,
    k: f64,
    combiner: Combiner,
) -> Result<(f64, f64)> {
    let cbar = cbar_star_for(net, pm, k, combiner)?.value;
    let k_next = match k_star_numeric(net, pm, cbar, combiner) {
        Ok(v) => v,
        Err(_) => k_star_approx(net, pm, cbar)?,
    };
    Ok((cbar, k_next))
}

/// Searches K = 1, 2, ... for a feasible integer starting point.
fn feasible_start(
    net: &NetworkParams,
    pm: &PowerModel,
    combiner: Combiner,
) -> Result<(DesignPoint, EeBreakdown)> {
    let k_max = net.tau_c.floor() as i64;
    for k in 1..=k_max {
        let Ok(c) = cbar_star_for(net, pm, k as f64, combiner) else {
            continue;
        };
        if let Ok(found) = integerize(net, pm, c.value * k as f64, k as f64, combiner) {
            return Ok(found);
        }
    }
    Err(Infeasibility::EmptyFeasibleSet.into())
}

/// Alternates ζ, M and K updates until the design repeats or the EE stops
/// improving. An infeasible `start` triggers a search for a feasible one.
pub fn alternating_optimize(
    net: &NetworkParams,
    pm: &PowerModel,
    start: DesignPoint,
    combiner: Combiner,
) -> Result<OptimResult> {
    net.validate()?;
    if !super::pilot::target_reachable(net) {
        return Err(Infeasibility::SinrTargetUnreachable.into());
    }
    let (mut current, mut current_b) = match integerize(net, pm, start.m, start.k, combiner) {
        Ok(p) => p,
        Err(_) => feasible_start(net, pm, combiner)?,
    };
    let mut best = (current, current_b);
    let mut seen = HashSet::new();
    seen.insert((current.m as i64, current.k as i64));
    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (cbar, k_relaxed) = relaxed_step(net, pm, current.k, combiner)?;
        let relaxed_ee = ee_along_ray(net, pm, cbar, k_relaxed, combiner).unwrap_or(f64::NAN);

        // Rounding neighborhood of the relaxed point, plus the best M for
        // each rounded K so the antenna step is not lost to rounding.
        let mut cands = neighborhood(cbar * k_relaxed, k_relaxed, 1);
        for k in [k_relaxed.floor(), k_relaxed.ceil()] {
            if k < 1.0 {
                continue;
            }
            if let Ok(c) = cbar_star_for(net, pm, k, combiner) {
                let m = c.value * k;
                if m.is_finite() {
                    cands.push((m.floor() as i64, k as i64));
                    cands.push((m.ceil() as i64, k as i64));
                }
            }
        }
        let Some((next, next_b)) = best_of(net, pm, cands, combiner) else {
            break;
        };
        trajectory.push(IterationRecord {
            zeta: next.zeta,
            m: next.m,
            k: next.k,
            ee: next_b.ee,
            relaxed_ee,
        });
        if next_b.ee > best.1.ee {
            best = (next, next_b);
        }
        let rel = (next_b.ee - current_b.ee).abs() / current_b.ee.abs().max(f64::MIN_POSITIVE);
        let repeat = !seen.insert((next.m as i64, next.k as i64));
        current = next;
        current_b = next_b;
        if repeat || rel < EE_REL_TOL {
            converged = true;
            break;
        }
    }

    Ok(OptimResult {
        design: best.0,
        breakdown: best.1,
        combiner,
        iterations,
        trajectory,
        converged,
    })
}

/// Exhaustive integer search, used as a reference.
pub fn brute_force(
    net: &NetworkParams,
    pm: &PowerModel,
    m_max: i64,
    k_max: i64,
    combiner: Combiner,
) -> Option<(DesignPoint, EeBreakdown)> {
    let cands = (1..=k_max).flat_map(|k| ((k + 1)..=m_max).map(move |m| (m, k)));
    best_of(net, pm, cands, combiner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HardwareParams;

    fn setup(gamma: f64) -> (NetworkParams, PowerModel) {
        let net = NetworkParams::default().with_gamma(gamma);
        let pm = PowerModel::build(&net, &HardwareParams::default()).unwrap();
        (net, pm)
    }

    #[test]
    fn integerize_keeps_exact_integers() {
        let (net, pm) = setup(3.0);
        let (dp, _) = integerize(&net, &pm, 91.0, 10.0, Combiner::Zf).unwrap();
        assert_eq!((dp.m, dp.k), (91.0, 10.0));
    }

    #[test]
    fn integerize_picks_neighborhood_argmax() {
        let (net, pm) = setup(3.0);
        let (dp, b) = integerize(&net, &pm, 90.5, 10.4, Combiner::Zf).unwrap();
        let mut best = f64::MIN;
        for m in [90, 91] {
            for k in [10, 11] {
                if let Some((_, e)) = evaluate(&net, &pm, m, k, Combiner::Zf) {
                    best = best.max(e.ee);
                }
            }
        }
        assert_eq!(b.ee, best);
        assert!([90.0, 91.0].contains(&dp.m) && [10.0, 11.0].contains(&dp.k));
    }

    #[test]
    fn integerize_excludes_m_equal_k() {
        let (net, pm) = setup(0.01);
        let (dp, _) = integerize(&net, &pm, 2.2, 1.9, Combiner::Zf).unwrap();
        assert!(dp.m > dp.k);
    }

    #[test]
    fn zf_gamma3_from_default_start() {
        let (net, pm) = setup(3.0);
        let r =
            alternating_optimize(&net, &pm, DesignPoint::new(2.0, 8.0, 64.0), Combiner::Zf).unwrap();
        assert!(r.converged);
        assert_eq!((r.design.m, r.design.k), (91.0, 10.0));
        assert!((r.design.zeta - 7.3).abs() < 0.3);
        assert!((r.breakdown.ee / 1e6 - 6.6).abs() < 0.66);
    }

    #[test]
    fn start_at_optimum_is_fixed_point() {
        let (net, pm) = setup(3.0);
        let z = zeta_star_for(&net, 91.0, 10.0, Combiner::Zf).unwrap();
        let r = alternating_optimize(&net, &pm, DesignPoint::new(z, 10.0, 91.0), Combiner::Zf)
            .unwrap();
        assert!(r.iterations <= 2);
        assert_eq!((r.design.m, r.design.k), (91.0, 10.0));
    }

    #[test]
    fn mr_gamma1() {
        let (net, pm) = setup(1.0);
        let r =
            alternating_optimize(&net, &pm, DesignPoint::new(2.0, 8.0, 64.0), Combiner::Mr).unwrap();
        assert!((r.design.m - 76.0).abs() <= 2.0 && (r.design.k - 19.0).abs() <= 1.0);
        assert!((r.design.zeta - 3.8).abs() < 0.3);
    }

    #[test]
    fn infeasible_start_is_repaired() {
        let (net, pm) = setup(3.0);
        let r =
            alternating_optimize(&net, &pm, DesignPoint::new(1.0, 50.0, 51.0), Combiner::Zf).unwrap();
        assert_eq!((r.design.m, r.design.k), (91.0, 10.0));
    }

    #[test]
    fn unreachable_target_rejected() {
        let net = NetworkParams::default();
        let net = net.with_gamma(net.tau_c * (net.alpha - 1.0));
        let pm = PowerModel::build(&net, &HardwareParams::default()).unwrap();
        let err = alternating_optimize(&net, &pm, DesignPoint::new(2.0, 8.0, 64.0), Combiner::Zf)
            .unwrap_err();
        assert_eq!(err.infeasibility(), Some(Infeasibility::SinrTargetUnreachable));
    }

    #[test]
    fn result_meets_target() {
        for g in [1.0, 3.0, 7.0] {
            let (net, pm) = setup(g);
            for c in Combiner::ALL {
                let r = alternating_optimize(&net, &pm, DesignPoint::new(2.0, 8.0, 64.0), c)
                    .unwrap();
                assert!(r.breakdown.sinr >= g * (1.0 - 1e-9));
                assert!(r.design.k * r.design.zeta <= net.tau_c);
            }
        }
    }
}
