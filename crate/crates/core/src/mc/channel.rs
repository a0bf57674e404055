//! Channel-level Monte Carlo on a fixed small geometry: Rayleigh channels,
//! random pilot collisions, MMSE estimation and ZF combining.
//!
//! Channels are stored as seen at the BS of the cell of interest `j`. Pilot
//! observations are normalized by the pilot power so that each UE's own
//! channel contributes with unit variance per entry after power control.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{sample_drop_with, BsCount, DropRealization, ThetaSums, TorusRegion};
use crate::params::{DesignPoint, NetworkParams};
use crate::stats::{sum, McEstimate, NeumaierSum};

use super::report::{CheckLine, Report};
use super::{par_indexed, sinr_from_theta};

type C64 = Complex<f64>;

pub const MAX_ANTENNAS: usize = 32;
pub const MAX_CELLS: usize = 30;
/// Condition-number guard on the ZF Gram matrix.
pub const COND_LIMIT: f64 = 1e12;
const MAX_RESAMPLES: u32 = 100;
const BATCHES: usize = 20;

/// Large-scale geometry of a small network as seen from cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub m: usize,
    pub k: usize,
    pub n_cells: usize,
    pub j: usize,
    pub tagged: usize,
    pub zeta: f64,
    pub snr: f64,
    pub snr_p: f64,
    /// β_li^l, indexed `l·K + i`.
    pub beta_own: Vec<f64>,
    /// β_li^j, indexed `l·K + i`.
    pub beta_at_j: Vec<f64>,
}

impl ChannelScenario {
    /// Scenario for UE `tagged` of cell `j` in `drop`.
    pub fn from_drop(
        drop: &DropRealization,
        net: &NetworkParams,
        dp: &DesignPoint,
        j: usize,
        tagged: usize,
    ) -> Result<Self> {
        let (m, k) = (dp.m as usize, drop.k);
        if dp.m.fract() != 0.0 || dp.k != k as f64 {
            return Err(Error::param("k", "design point must be integer and match the drop"));
        }
        if m <= k {
            return Err(crate::error::Infeasibility::ZfNeedsMoreAntennas.into());
        }
        if m > MAX_ANTENNAS || drop.n_cells() > MAX_CELLS {
            return Err(Error::param(
                "m",
                format!("channel-level runs need M ≤ {MAX_ANTENNAS} and ≤ {MAX_CELLS} cells"),
            ));
        }
        if !(dp.zeta >= 1.0) {
            return Err(Error::param("zeta", "zeta ≥ 1 required"));
        }
        let beta = |d: f64| net.upsilon * d.powf(-net.alpha);
        let n = drop.n_cells();
        let mut beta_own = Vec::with_capacity(n * k);
        let mut beta_at_j = Vec::with_capacity(n * k);
        for l in 0..n {
            for i in 0..k {
                beta_own.push(beta(drop.serving_distance(l, i)));
                beta_at_j.push(beta(drop.cross_distance(l, i, j)));
            }
        }
        Ok(ChannelScenario {
            m,
            k,
            n_cells: n,
            j,
            tagged,
            zeta: dp.zeta,
            snr: net.snr,
            snr_p: net.snr_p,
            beta_own,
            beta_at_j,
        })
    }

    /// A small network at the density of `net`: `cells` BSs on a torus of
    /// matching area, tagged UE is the drop's typical UE.
    pub fn small(net: &NetworkParams, dp: &DesignPoint, cells: usize, seed: u64) -> Result<Self> {
        let side = (cells as f64 / net.lambda).sqrt();
        let region = TorusRegion::new(side)?;
        if dp.k < 1.0 || dp.k.fract() != 0.0 {
            return Err(Error::param("k", "integer k ≥ 1 required"));
        }
        let drop = sample_drop_with(net, &region, dp.k as usize, seed, 0, BsCount::Fixed(cells))?;
        let (j, t) = drop.typical;
        Self::from_drop(&drop, net, dp, j, t)
    }

    fn idx(&self, l: usize, i: usize) -> usize {
        l * self.k + i
    }

    /// `β_li^j / β_li^l = (d_li^l / d_li^j)^α`.
    pub fn ratio(&self, l: usize, i: usize) -> f64 {
        let n = self.idx(l, i);
        self.beta_at_j[n] / self.beta_own[n]
    }

    /// `β_ji^j · E{1/γ_ji}` over the pilot collisions.
    pub fn a_factor(&self, i: usize) -> f64 {
        let contam: f64 = (0..self.n_cells)
            .filter(|&l| l != self.j)
            .map(|l| self.ratio(l, i))
            .sum();
        1.0 + contam / self.zeta + 1.0 / self.snr_p
    }

    /// Interference sums of the tagged UE for this geometry.
    pub fn theta(&self) -> ThetaSums {
        let mut t = ThetaSums::default();
        for l in (0..self.n_cells).filter(|&l| l != self.j) {
            for i in 0..self.k {
                let r = self.ratio(l, i);
                t.theta1_sum += r;
                t.theta2_sum += r * r;
                if i == self.tagged {
                    t.theta1_k += r;
                    t.theta2_k += r * r;
                }
            }
        }
        t
    }
}

/// One realization of channels, pilots, estimates and the ZF combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// h_li^j, indexed `l·K + i`.
    pub h: Vec<DVector<C64>>,
    /// BS-j estimate of h_li^j (zero when UE (l, i) does not hit a pilot of cell j).
    pub h_hat: Vec<DVector<C64>>,
    /// h − ĥ.
    pub h_err: Vec<DVector<C64>>,
    /// Whether UE (l, i) shares the pilot of UE i in cell j (always true in cell j).
    pub collisions: Vec<bool>,
    /// Normalized pilot-observation variance per pilot.
    pub psi: Vec<f64>,
    /// Estimation quality γ_ji^j.
    pub gamma: Vec<f64>,
    /// Ĥ_j, M × K.
    pub h_hat_own: DMatrix<C64>,
    /// ZF combiner, M × K.
    pub v: DMatrix<C64>,
    /// Noise resamples triggered by the conditioning guard.
    pub resamples: u32,
}

fn channel_rng(seed: u64, index: u64) -> ChaCha8Rng {
    // Keyed apart from the drop streams of the same seed.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_616e_6e65_6c73);
    rng.set_stream(index);
    rng
}

fn cn(rng: &mut impl Rng, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn cn_vec(rng: &mut impl Rng, m: usize, var: f64) -> DVector<C64> {
    DVector::from_fn(m, |_, _| cn(rng, var))
}

/// Draws one realization for `scn`, deterministically from `(seed, index)`.
pub fn draw(scn: &ChannelScenario, seed: u64, index: u64) -> Result<ChannelDraw> {
    let mut rng = channel_rng(seed, index);
    let (m, k, n) = (scn.m, scn.k, scn.n_cells);
    let p_hit = 1.0 / scn.zeta;
    let collisions: Vec<bool> = (0..n * k)
        .map(|q| q / k == scn.j || rng.random::<f64>() < p_hit)
        .collect();
    let h: Vec<DVector<C64>> = scn.beta_at_j.iter().map(|&b| cn_vec(&mut rng, m, b)).collect();

    let psi: Vec<f64> = (0..k)
        .map(|i| {
            let hits: f64 = (0..n)
                .filter(|&l| collisions[scn.idx(l, i)])
                .map(|l| scn.ratio(l, i))
                .sum();
            hits + 1.0 / scn.snr_p
        })
        .collect();
    let gamma: Vec<f64> = (0..k).map(|i| scn.beta_at_j[scn.idx(scn.j, i)] / psi[i]).collect();

    let mut resamples = 0;
    loop {
        let noise_var = 1.0 / scn.snr_p;
        let z: Vec<DVector<C64>> = (0..k)
            .map(|i| {
                let mut zi = if noise_var > 0.0 {
                    cn_vec(&mut rng, m, noise_var)
                } else {
                    DVector::zeros(m)
                };
                for l in (0..n).filter(|&l| collisions[scn.idx(l, i)]) {
                    let q = scn.idx(l, i);
                    zi += &h[q] * C64::from(1.0 / scn.beta_own[q].sqrt());
                }
                zi
            })
            .collect();
        let h_hat: Vec<DVector<C64>> = (0..n * k)
            .map(|q| {
                let i = q % k;
                if collisions[q] {
                    let w = scn.beta_at_j[q] / scn.beta_own[q].sqrt() / psi[i];
                    &z[i] * C64::from(w)
                } else {
                    DVector::zeros(m)
                }
            })
            .collect();
        let own = DMatrix::from_columns(
            &(0..k).map(|i| h_hat[scn.idx(scn.j, i)].clone()).collect::<Vec<_>>(),
        );
        let gram = own.adjoint() * &own;
        let inv = nalgebra::Cholesky::new(gram).and_then(|c| {
            let d = c.l_dirty().diagonal();
            let (lo, hi) = d
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.re), hi.max(x.re)));
            ((hi / lo).powi(2) <= COND_LIMIT).then(|| c.inverse())
        });
        match inv {
            Some(inv) => {
                let v = &own * inv;
                let h_err = h.iter().zip(&h_hat).map(|(a, b)| a - b).collect();
                return Ok(ChannelDraw {
                    h,
                    h_hat,
                    h_err,
                    collisions,
                    psi,
                    gamma,
                    h_hat_own: own,
                    v,
                    resamples,
                });
            }
            None if resamples < MAX_RESAMPLES => resamples += 1,
            None => {
                return Err(Error::Numerical(
                    "ZF Gram matrix stayed ill-conditioned after resampling".into(),
                ))
            }
        }
    }
}

/// Draw for the typical UE of `drop` under design `dp`.
pub fn channel_level_draw(
    net: &NetworkParams,
    drop: &DropRealization,
    dp: &DesignPoint,
    seed: u64,
) -> Result<ChannelDraw> {
    let (j, t) = drop.typical;
    draw(&ChannelScenario::from_drop(drop, net, dp, j, t)?, seed, 0)
}

/// Per-draw statistics used by the identity checks.
#[derive(Debug, Clone, Copy, Default)]
struct DrawStats {
    zf_err: f64,
    parallel_err: f64,
    norm_ratio: f64,
    hat_var: f64,
    orth: f64,
    tagged: f64,
    others: f64,
    own_diff: f64,
    uncontam_meas: f64,
    uncontam_ref: f64,
    contam_hat_err: f64,
    contam_err_meas: f64,
    contam_err_ref: f64,
    // Use-and-then-forget terms (scaled by β_jk).
    useful_re: f64,
    useful_im: f64,
    rx_power: f64,
    norm: f64,
}

fn draw_stats(scn: &ChannelScenario, d: &ChannelDraw) -> DrawStats {
    let (m, k, kk, j) = (scn.m, scn.k, scn.tagged, scn.j);
    let mk = (m - k) as f64;
    let q_tag = scn.idx(j, kk);
    let beta_k = scn.beta_at_j[q_tag];
    let v = d.v.column(kk).into_owned();
    let norm = v.norm_squared();
    let mut s = DrawStats::default();

    let eye_err = (d.v.adjoint() * &d.h_hat_own - DMatrix::<C64>::identity(k, k))
        .iter()
        .fold(0.0f64, |a, x| a.max(x.norm()));
    s.zf_err = eye_err;

    s.norm_ratio = norm * mk * d.gamma[kk];
    let hh = &d.h_hat[q_tag];
    s.hat_var = hh.norm_squared() / (m as f64 * d.gamma[kk]);
    s.orth = hh.dotc(&d.h_err[q_tag]).re / (m as f64 * beta_k);

    for l in 0..scn.n_cells {
        for i in 0..k {
            let q = scn.idx(l, i);
            let b = scn.beta_at_j[q];
            let y = v.dotc(&d.h[q]).norm_sqr();
            s.rx_power += beta_k / scn.beta_own[q] * y;
            if l == j {
                let delta = if i == kk { 1.0 } else { 0.0 };
                if i == kk {
                    s.tagged = y;
                } else {
                    s.others += y;
                }
                s.own_diff += y - delta - (b - d.gamma[i]) * norm;
                continue;
            }
            if !d.collisions[q] {
                s.uncontam_meas += y;
                s.uncontam_ref += b * norm;
                continue;
            }
            // Contaminating estimate is a scaled copy of the own-cell one.
            let coef = b / (scn.beta_own[q] * scn.beta_at_j[scn.idx(j, i)]).sqrt();
            let want = &d.h_hat[scn.idx(j, i)] * C64::from(coef);
            let scale = want.norm().max(f64::MIN_POSITIVE);
            s.parallel_err = s.parallel_err.max((&d.h_hat[q] - want).norm() / scale);
            let proj = v.dotc(&d.h_hat[q]).norm_sqr();
            let pred = if i == kk { b * b / (scn.beta_own[q] * beta_k) } else { 0.0 };
            let unit = b * b / (scn.beta_own[q] * beta_k);
            s.contam_hat_err = s.contam_hat_err.max((proj - pred).abs() / unit);
            if i == kk {
                s.contam_err_meas += v.dotc(&d.h_err[q]).norm_sqr();
                s.contam_err_ref += b * norm - b * b / (scn.beta_own[q] * beta_k * mk);
            }
        }
    }
    let u = v.dotc(&d.h[q_tag]);
    s.useful_re = u.re;
    s.useful_im = u.im;
    s.norm = beta_k * norm;
    s
}

fn collect_stats(scn: &ChannelScenario, n_draws: usize, seed: u64) -> Result<Vec<DrawStats>> {
    if n_draws < 2 {
        return Err(Error::param("n", "n ≥ 2 required for std error"));
    }
    par_indexed(n_draws, |i| draw(scn, seed, i).map(|d| draw_stats(scn, &d)))
}

fn est(rows: &[DrawStats], seed: u64, f: impl Fn(&DrawStats) -> f64) -> Result<McEstimate> {
    McEstimate::from_samples(&rows.iter().map(f).collect::<Vec<_>>(), seed)
}

fn max_of(rows: &[DrawStats], f: impl Fn(&DrawStats) -> f64) -> f64 {
    rows.iter().map(f).fold(0.0, f64::max)
}

/// Checks the channel-level identities used to assemble the SINR bound, on
/// the small network built by [`ChannelScenario::small`] with 9 cells.
pub fn validate_channel_identities(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_draws: usize,
    seed: u64,
) -> Result<Report> {
    let scn = ChannelScenario::small(net, dp, 9, seed)?;
    validate_channel_identities_on(&scn, n_draws, seed)
}

pub fn validate_channel_identities_on(scn: &ChannelScenario, n_draws: usize, seed: u64) -> Result<Report> {
    let rows = collect_stats(scn, n_draws, seed)?;
    let mk = (scn.m - scn.k) as f64;
    let kk = scn.tagged;
    let a_k = scn.a_factor(kk);
    let beta = |i: usize| scn.beta_at_j[scn.idx(scn.j, i)];
    let mut r = Report::default();

    let zf = max_of(&rows, |s| s.zf_err);
    r.push(CheckLine::at_most("zf_identity", 1e-10, zf, 0.0, 0.0));
    let par = max_of(&rows, |s| s.parallel_err);
    r.push(CheckLine::at_most("estimate_parallelism", 1e-10, par, 0.0, 0.0));

    let e = est(&rows, seed, |s| s.hat_var)?;
    r.push(CheckLine::relative("estimate_variance", 1.0, e.mean, e.std_error, 0.02));
    let e = est(&rows, seed, |s| s.orth)?;
    r.push(CheckLine::within_se("estimate_error_orthogonality", 0.0, e.mean, e.std_error, 3.0));
    let e = est(&rows, seed, |s| s.norm_ratio)?;
    r.push(CheckLine::relative("combiner_norm", 1.0, e.mean, e.std_error, 0.02));

    let e = est(&rows, seed, |s| s.tagged)?;
    r.push(CheckLine::within_se("own_cell_tagged", 1.0 + (a_k - 1.0) / mk, e.mean, e.std_error, 3.0));
    if scn.k > 1 {
        // Closed-form expectation as stated; it ignores that the other UEs'
        // estimates share the projection with the tagged one.
        let target: f64 = (0..scn.k)
            .filter(|&i| i != kk)
            .map(|i| beta(i) / beta(kk) * (a_k - 1.0) / mk)
            .sum();
        let e = est(&rows, seed, |s| s.others)?;
        r.push(CheckLine::within_se("own_cell_others", target, e.mean, e.std_error, 3.0));
    }
    let e = est(&rows, seed, |s| s.own_diff)?;
    r.push(CheckLine::within_se("own_cell_conditional", 0.0, e.mean, e.std_error, 3.0));

    let e = est(&rows, seed, |s| s.uncontam_meas - s.uncontam_ref)?;
    let target = sum(&rows.iter().map(|s| s.uncontam_ref).collect::<Vec<_>>()) / rows.len() as f64;
    r.push(CheckLine::within_se(
        "uncontaminated_interferers",
        target,
        target + e.mean,
        e.std_error,
        3.0,
    ));

    let hat = max_of(&rows, |s| s.contam_hat_err);
    r.push(CheckLine::at_most("contaminated_estimate_part", 1e-10, hat, 0.0, 0.0));
    let e = est(&rows, seed, |s| s.contam_err_meas - s.contam_err_ref)?;
    let target = sum(&rows.iter().map(|s| s.contam_err_ref).collect::<Vec<_>>()) / rows.len() as f64;
    r.push(CheckLine::within_se(
        "contaminated_error_part",
        target,
        target + e.mean,
        e.std_error,
        3.0,
    ));
    Ok(r)
}

/// SINR from empirical use-and-then-forget expectations.
fn uatf_sinr(rows: &[DrawStats], snr: f64) -> f64 {
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&DrawStats) -> f64| rows.iter().map(f).collect::<NeumaierSum>().value() / n;
    let u = C64::new(mean(&|s| s.useful_re), mean(&|s| s.useful_im)).norm_sqr();
    let p = mean(&|s| s.rx_power);
    let nv = mean(&|s| s.norm);
    u / (p - u + nv / snr)
}

/// Result of assembling the use-and-then-forget SINR from draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UatfComparison {
    pub empirical: McEstimate,
    pub geometry: f64,
}

pub fn uatf_comparison(scn: &ChannelScenario, n_draws: usize, seed: u64) -> Result<UatfComparison> {
    let rows = collect_stats(scn, n_draws, seed)?;
    let n_b = BATCHES.min(rows.len() / 2).max(2);
    let size = rows.len() / n_b;
    let batches: Vec<f64> = (0..n_b)
        .map(|b| uatf_sinr(&rows[b * size..(b + 1) * size], scn.snr))
        .collect();
    let batch_se = McEstimate::from_samples(&batches, seed)?.std_error;
    let dp = DesignPoint::new(scn.zeta, scn.k as f64, scn.m as f64);
    let net = NetworkParams {
        snr: scn.snr,
        snr_p: scn.snr_p,
        ..NetworkParams::default()
    };
    Ok(UatfComparison {
        empirical: McEstimate {
            mean: uatf_sinr(&rows, scn.snr),
            std_error: batch_se,
            n_samples: rows.len(),
            seed,
        },
        geometry: sinr_from_theta(&net, &dp, &scn.theta())?,
    })
}

/// Compares the use-and-then-forget SINR assembled from draws with the
/// geometry-level SINR of the same positions (5% relative tolerance).
pub fn validate_uatf_sinr(
    net: &NetworkParams,
    dp: &DesignPoint,
    n_draws: usize,
    seed: u64,
) -> Result<Report> {
    let scn = ChannelScenario::small(net, dp, 9, seed)?;
    validate_uatf_sinr_on(&scn, n_draws, seed)
}

pub fn validate_uatf_sinr_on(scn: &ChannelScenario, n_draws: usize, seed: u64) -> Result<Report> {
    let c = uatf_comparison(scn, n_draws, seed)?;
    let mut r = Report::default();
    r.push(CheckLine::relative(
        "uatf_vs_geometry",
        c.geometry,
        c.empirical.mean,
        c.empirical.std_error,
        0.05,
    ));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> NetworkParams {
        NetworkParams::default()
    }

    fn isolated(m: f64, k: f64, snr_p: f64) -> ChannelScenario {
        let net = NetworkParams { snr_p, ..net() };
        let dp = DesignPoint::new(2.0, k, m);
        ChannelScenario::small(&net, &dp, 1, 3).unwrap()
    }

    #[test]
    fn noiseless_isolated_estimate_is_exact() {
        let scn = isolated(6.0, 2.0, f64::INFINITY);
        let d = draw(&scn, 1, 0).unwrap();
        for q in 0..2 {
            assert!((&d.h[q] - &d.h_hat[q]).norm() <= 1e-12 * d.h[q].norm());
        }
    }

    #[test]
    fn zf_inverts_estimates() {
        let scn = ChannelScenario::small(&net(), &DesignPoint::new(2.0, 3.0, 8.0), 9, 5).unwrap();
        let d = draw(&scn, 5, 7).unwrap();
        let eye = d.v.adjoint() * &d.h_hat_own;
        assert!((eye - DMatrix::<C64>::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn draws_are_deterministic() {
        let scn = ChannelScenario::small(&net(), &DesignPoint::new(2.0, 2.0, 4.0), 9, 5).unwrap();
        assert_eq!(draw(&scn, 2, 3).unwrap(), draw(&scn, 2, 3).unwrap());
        assert_ne!(draw(&scn, 2, 3).unwrap().h, draw(&scn, 2, 4).unwrap().h);
    }

    #[test]
    fn isolated_uatf_matches_geometry_exactly_in_expectation() {
        let scn = isolated(8.0, 3.0, net().snr_p);
        let c = uatf_comparison(&scn, 20_000, 4).unwrap();
        let closed = (8.0 - 3.0) / (3.0 / net().snr_p + (1.0 + 1.0 / net().snr_p) / net().snr);
        assert!((c.geometry - closed).abs() < 1e-12 * closed);
        assert!((c.empirical.mean / closed - 1.0).abs() < 0.03, "{c:?}");
    }

    #[test]
    fn isolated_cell_suite() {
        let scn = isolated(8.0, 3.0, net().snr_p);
        let r = validate_channel_identities_on(&scn, 20_000, 8).unwrap();
        assert!(r.all_pass(), "{}", r.to_text());
    }

    #[test]
    fn size_limits() {
        let dp = DesignPoint::new(2.0, 2.0, 40.0);
        assert!(ChannelScenario::small(&net(), &dp, 9, 0).is_err());
        let dp = DesignPoint::new(2.0, 2.0, 8.0);
        assert!(ChannelScenario::small(&net(), &dp, 31, 0).is_err());
    }
}
