//! Antennas-per-UE and UEs-per-BS steps of the relaxed problem.
//!
//! With ζ set to its minimum, the pilot fraction becomes a Möbius function of
//! c̄ = M/K, `Kζ*/τ_c = (a0·c̄ + a1)/(a2·c̄ − a3)`, and the EE in c̄ reduces to
//! `(1 − x)/(a4·c̄ + a5 − a6·x)` up to a positive monotone transform.

use crate::analytic::energy_efficiency;
use crate::error::{Error, Infeasibility, Result};
use crate::params::{Combiner, DesignPoint, NetworkParams, PowerModel};

use super::pilot::zeta_star_for;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCoefficients {
    pub combiner: Combiner,
    pub k: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub r0: f64,
    pub r1: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// c̄ at which the pilot fraction reaches 1 (lower end of the box).
    pub cbar1: f64,
    /// Upper end as printed: solves x = τ_c/K.
    pub cbar2: f64,
    /// Approximate-K* b1 = (γ/τ_c)(2/(α − 2))(1/SNR).
    pub b1_c2: f64,
}

/// Coefficients for the ZF combiner.
pub fn lemma_coefficients(net: &NetworkParams, pm: &PowerModel, k: f64) -> LemmaCoefficients {
    lemma_coefficients_for(net, pm, k, Combiner::Zf)
}

/// Coefficients for either combiner. For MR, a1 gains 2γK²/(τ_c(α−1)) and
/// a3 uses Kγ in place of K, mirroring the MR pilot-reuse bound.
pub fn lemma_coefficients_for(
    net: &NetworkParams,
    pm: &PowerModel,
    k: f64,
    combiner: Combiner,
) -> LemmaCoefficients {
    let (a, g, tau) = (net.alpha, net.gamma, net.tau_c);
    let inv_snr = 1.0 / net.snr;
    let inv_snr_p = 1.0 / net.snr_p;
    let a0 = k * k / (a - 1.0) * g / tau;
    let mut a1 = g * k * k / tau
        * (4.0 / ((a - 2.0) * (a - 2.0)) + 2.0 / (a - 2.0) - 1.0 / (a - 1.0))
        + 2.0 * g * k * inv_snr / (tau * (a - 2.0));
    let a2 = k;
    let mut a3 =
        k + g * k * inv_snr_p + (2.0 * g * k / (a - 2.0) + g * inv_snr) * (1.0 + inv_snr_p);
    if combiner == Combiner::Mr {
        a1 += 2.0 * g * k * k / (tau * (a - 1.0));
        a3 += k * (g - 1.0);
    }
    let a4 = pm.d0 * k + pm.d1 * k * k + pm.d2 * k * k * k;
    let a5 = pm.c0 + pm.c1 * k + pm.c3 * k * k * k;
    let a6 = tau * pm.c2 * k;
    let r0 = a2 - a0;
    let r1 = a1 + a3;
    let kt = k / tau;
    LemmaCoefficients {
        combiner,
        k,
        a0,
        a1,
        a2,
        a3,
        a4,
        a5,
        a6,
        r0,
        r1,
        q0: a1 * a6 + a3 * a5,
        q1: a3 * a4 + a0 * a6 - a2 * a5,
        q2: a2 * a4,
        cbar1: r1 / r0,
        cbar2: (kt * a1 + a3) / (a2 - kt * a0),
        b1_c2: g / tau * 2.0 / (a - 2.0) * inv_snr,
    }
}

impl LemmaCoefficients {
    /// Pilot fraction Kζ*/τ_c at c̄ (before clamping ζ to 1).
    pub fn pilot_fraction(&self, cbar: f64) -> f64 {
        (self.a0 * cbar + self.a1) / (self.a2 * cbar - self.a3)
    }

    /// Upper end of the c̄ box from the primal constraint ζ* ≥ 1, i.e. the
    /// c̄ where the pilot fraction falls to K/τ_c. Infinite when the pilot
    /// fraction never gets that low.
    pub fn cbar_high(&self, tau_c: f64) -> f64 {
        let kt = self.k / tau_c;
        let den = kt * self.a2 - self.a0;
        if den > 0.0 {
            (self.a1 + kt * self.a3) / den
        } else {
            f64::INFINITY
        }
    }

    /// Unconstrained stationary point of the reduced objective.
    pub fn stationary_cbar(&self) -> Result<f64> {
        if !(self.r0 > 0.0) {
            return Err(Infeasibility::SinrTargetUnreachable.into());
        }
        let ratio = self.r1 / self.r0;
        let disc = -self.q0 / self.q2 - self.q1 / self.q2 * ratio + ratio * ratio;
        if !(disc >= 0.0) || !(self.q2 > 0.0) {
            return Err(Infeasibility::NoStationaryPoint.into());
        }
        Ok(ratio + disc.sqrt())
    }
}

/// Reduced objective `(1 − x)/(a4·c̄ + a5 − a6·x)` with x the pilot fraction.
pub fn reduced_objective(coeffs: &LemmaCoefficients, cbar: f64) -> Result<f64> {
    let den_x = coeffs.a2 * cbar - coeffs.a3;
    if !(den_x > 0.0) {
        return Err(Infeasibility::NotEnoughAntennas.into());
    }
    let x = (coeffs.a0 * cbar + coeffs.a1) / den_x;
    let den = coeffs.a4 * cbar + coeffs.a5 - coeffs.a6 * x;
    if !(den > 0.0) {
        return Err(Error::Numerical(format!("non-positive power term {den}")));
    }
    Ok((1.0 - x) / den)
}

/// Which constraint (if any) decided c̄*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbarBound {
    Interior,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbarStar {
    pub value: f64,
    pub stationary: f64,
    pub low: f64,
    /// Primal upper end (ζ* = 1).
    pub high: f64,
    /// The upper end as printed; reported when it disagrees with `high`.
    pub printed_high: f64,
    pub bound: CbarBound,
}

impl CbarStar {
    /// True when clamping with the printed upper end would give a different c̄*.
    pub fn bounds_disagree(&self) -> bool {
        let alt = self.stationary.max(self.low).min(self.printed_high);
        (alt - self.value).abs() > 1e-9 * self.value.abs().max(1.0)
    }
}

/// EE-maximizing antennas per UE at fixed K (ZF).
pub fn cbar_star(net: &NetworkParams, pm: &PowerModel, k: f64) -> Result<CbarStar> {
    cbar_star_for(net, pm, k, Combiner::Zf)
}

pub fn cbar_star_for(
    net: &NetworkParams,
    pm: &PowerModel,
    k: f64,
    combiner: Combiner,
) -> Result<CbarStar> {
    if !(k > 0.0) {
        return Err(Error::param("k", format!("k > 0 required, got {k}")));
    }
    let c = lemma_coefficients_for(net, pm, k, combiner);
    let stationary = c.stationary_cbar()?;
    let low = c.cbar1;
    let high = c.cbar_high(net.tau_c);
    if low > high {
        return Err(Infeasibility::EmptyFeasibleSet.into());
    }
    let (value, bound) = if stationary < low {
        (low, CbarBound::Low)
    } else if stationary > high {
        (high, CbarBound::High)
    } else {
        (stationary, CbarBound::Interior)
    };
    Ok(CbarStar {
        value,
        stationary,
        low,
        high,
        printed_high: c.cbar2,
        bound,
    })
}

/// Relaxed EE along the ray M = c̄·K, with ζ at its minimum.
pub fn ee_along_ray(
    net: &NetworkParams,
    pm: &PowerModel,
    cbar: f64,
    k: f64,
    combiner: Combiner,
) -> Option<f64> {
    let m = cbar * k;
    let zeta = zeta_star_for(net, m, k, combiner).ok()?;
    energy_efficiency(net, pm, &DesignPoint::new(zeta, k, m), combiner)
        .ok()
        .map(|b| b.ee)
}

const K_GRID: usize = 4000;
const K_TOL: f64 = 1e-6;

/// EE-maximizing (real) K at fixed c̄, by a feasibility scan, derivative-sign
/// bracketing and bisection. Interval endpoints are kept as candidates.
pub fn k_star_numeric(
    net: &NetworkParams,
    pm: &PowerModel,
    cbar: f64,
    combiner: Combiner,
) -> Result<f64> {
    let f = |k: f64| ee_along_ray(net, pm, cbar, k, combiner);
    let k_hi = net.tau_c;
    let step = (k_hi - 1.0) / K_GRID as f64;
    let grid: Vec<f64> = (0..=K_GRID).map(|i| 1.0 + i as f64 * step).collect();
    let vals: Vec<Option<f64>> = grid.iter().map(|&k| f(k)).collect();

    let mut candidates = Vec::new();
    // Edges of feasible runs, refined by bisection on feasibility.
    for i in 0..grid.len() {
        let here = vals[i].is_some();
        if !here {
            continue;
        }
        let prev = i > 0 && vals[i - 1].is_some();
        let next = i + 1 < grid.len() && vals[i + 1].is_some();
        if !prev {
            candidates.push(if i == 0 {
                grid[0]
            } else {
                bisect(grid[i - 1], grid[i], |k| f(k).is_some())
            });
        }
        if !next {
            candidates.push(if i + 1 == grid.len() {
                grid[i]
            } else {
                bisect(grid[i + 1], grid[i], |k| f(k).is_some())
            });
        }
    }
    if candidates.is_empty() {
        return Err(Infeasibility::EmptyFeasibleSet.into());
    }

    let h = 1e-5;
    let slope = |k: f64| match (f(k + h), f(k - h)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    for w in grid.windows(2) {
        let (Some(s0), Some(s1)) = (slope(w[0]), slope(w[1])) else {
            continue;
        };
        if s0 > 0.0 && s1 <= 0.0 {
            candidates.push(bisect(w[1], w[0], |k| slope(k).is_some_and(|s| s > 0.0)));
        }
    }

    candidates
        .into_iter()
        .filter_map(|k| f(k).map(|v| (k, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Infeasibility::EmptyFeasibleSet.into())
}

/// Bisection between `bad` and `good` where `pred(good)` holds; returns the
/// last point known to satisfy `pred`.
fn bisect(mut bad: f64, mut good: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while (good - bad).abs() > K_TOL {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Coefficients of the approximate K* `(b0, b1, b2)` at c̄.
pub fn k_star_coefficients(net: &NetworkParams, cbar: f64) -> (f64, f64, f64) {
    let (a, g, tau) = (net.alpha, net.gamma, net.tau_c);
    let inv_snr_p = 1.0 / net.snr_p;
    let b0 = g / tau
        * (4.0 / ((a - 2.0) * (a - 2.0)) + 2.0 / (a - 2.0) - 1.0 / (a - 1.0) + cbar / (a - 1.0));
    let b1 = g / tau * 2.0 / (a - 2.0) / net.snr;
    let b2 = cbar - 1.0 - 2.0 * g / (a - 2.0) * (1.0 + inv_snr_p) - g * inv_snr_p;
    (b0, b1, b2)
}

/// Closed-form K* valid when processing power is negligible, the network is
/// dense and SNR ≫ γ.
pub fn k_star_approx(net: &NetworkParams, pm: &PowerModel, cbar: f64) -> Result<f64> {
    let (b0, b1, b2) = k_star_coefficients(net, cbar);
    if !(b2 > b1) {
        return Err(Infeasibility::EmptyFeasibleSet.into());
    }
    let lin = pm.c1 + pm.d0 * cbar;
    let ratio = pm.c0 / lin;
    Ok(ratio * ((1.0 + (b2 - b1) / b0 / ratio).sqrt() - 1.0))
}
