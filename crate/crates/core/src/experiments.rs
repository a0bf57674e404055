//! Parameter sweeps behind the figures and tables: EE versus density,
//! the EE surface over (M, K), and EE versus ASE at fixed K.
//!
//! Points are evaluated in parallel and returned in grid order. CSV output
//! uses `f64`'s shortest round-trip formatting, so it is byte-stable.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::energy_efficiency;
use crate::error::{Error, Result};
use crate::mc::{mc_energy_efficiency_with, McConfig};
use crate::optimizer::{alternating_optimize, zeta_star_for, OptimResult};
use crate::params::{Combiner, DesignPoint, HardwareParams, NetworkParams, PowerModel};

/// Start used when none is given; any feasible point works.
pub const DEFAULT_START: DesignPoint = DesignPoint {
    zeta: 2.0,
    k: 8.0,
    m: 64.0,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Explicit(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        points: usize,
        scale: GridScale,
    },
}

impl Grid {
    /// Grid values; must be non-empty and strictly increasing.
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::Explicit(v) => v.clone(),
            Grid::Range {
                min,
                max,
                points,
                scale,
            } => {
                if *points == 0 {
                    return Err(Error::param("grid", "at least one point required"));
                }
                if *points == 1 {
                    vec![*min]
                } else {
                    let t = |i: usize| i as f64 / (*points - 1) as f64;
                    match scale {
                        GridScale::Linear => (0..*points).map(|i| min + (max - min) * t(i)).collect(),
                        GridScale::Log => {
                            if !(*min > 0.0) {
                                return Err(Error::param("grid", "log grid needs min > 0"));
                            }
                            let (a, b) = (min.log10(), max.log10());
                            let mut v: Vec<f64> = (0..*points).map(|i| 10f64.powf(a + (b - a) * t(i))).collect();
                            // Keep the endpoints exact.
                            v[0] = *min;
                            v[*points - 1] = *max;
                            v
                        }
                    }
                }
            }
        };
        if v.is_empty() {
            return Err(Error::param("grid", "grid is empty"));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("grid", "grid must be finite and strictly increasing"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Lambda,
    M,
    K,
    Ase,
}

/// Monte Carlo settings for a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    pub n_drops: usize,
    pub seed: u64,
    pub config: McConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub fixed: NetworkParams,
    pub combiners: Vec<Combiner>,
    pub mc: Option<McSpec>,
}

/// Optimizes one scenario from the default start.
pub fn optimize(
    net: &NetworkParams,
    hw: &HardwareParams,
    combiner: Combiner,
    start: Option<DesignPoint>,
) -> Result<OptimResult> {
    net.validate()?;
    let pm = PowerModel::build(net, hw)?;
    alternating_optimize(net, &pm, start.unwrap_or(DEFAULT_START), combiner)
}

/// The columns of the design table for one optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub ee_mbit_per_joule: f64,
    pub ase_kbit: f64,
    pub apc_kw: f64,
    pub m: f64,
    pub k: f64,
    pub zeta: f64,
    pub reuse_percent: f64,
}

impl From<&OptimResult> for TableRow {
    fn from(r: &OptimResult) -> Self {
        TableRow {
            ee_mbit_per_joule: r.breakdown.ee / 1e6,
            ase_kbit: r.breakdown.ase / 1e3,
            apc_kw: r.breakdown.apc / 1e3,
            m: r.design.m,
            k: r.design.k,
            zeta: r.design.zeta,
            reuse_percent: 100.0 / r.design.zeta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Bound,
    Mc,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Bound => "bound",
            Source::Mc => "mc",
        }
    }
}

/// One row of the EE-versus-density sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub gamma: f64,
    pub lambda: f64,
    pub combiner: Combiner,
    pub source: Source,
    pub ee: Option<f64>,
    pub design: Option<DesignPoint>,
    pub std_error: Option<f64>,
    pub reason: Option<String>,
}

pub const LAMBDA_CSV_HEADER: &str =
    "gamma,lambda,combiner,source,ee_bit_per_joule,m,k,zeta,std_error,reason";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl LambdaRow {
    fn failed(gamma: f64, lambda: f64, combiner: Combiner, source: Source, e: &Error) -> Self {
        LambdaRow {
            gamma,
            lambda,
            combiner,
            source,
            ee: None,
            design: None,
            std_error: None,
            reason: Some(e.to_string()),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.gamma,
            self.lambda,
            self.combiner,
            self.source.as_str(),
            opt(self.ee),
            opt(self.design.map(|d| d.m)),
            opt(self.design.map(|d| d.k)),
            opt(self.design.map(|d| d.zeta)),
            opt(self.std_error),
            self.reason.as_deref().unwrap_or("").replace(',', ";"),
        )
    }
}

/// How the design is chosen at each density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignChoice {
    /// Re-optimize (M, K, ζ) at every λ.
    Optimize,
    /// Keep (M, K) everywhere with ζ = ζ*(M, K) at each point.
    Fixed(DesignPoint),
    /// Evaluate exactly this design, ζ included.
    Exact(DesignPoint),
}

/// One point of a density sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaJob {
    pub gamma: f64,
    pub lambda: f64,
    pub combiner: Combiner,
    pub design: DesignChoice,
}

/// EE versus λ for each target and combiner. Monte Carlo rows are added for
/// ZF when `mc` is set.
pub fn sweep_lambda(
    net: &NetworkParams,
    hw: &HardwareParams,
    gammas: &[f64],
    lambdas: &[f64],
    combiners: &[Combiner],
    design: DesignChoice,
    mc: Option<McSpec>,
) -> Vec<LambdaRow> {
    let mut jobs = Vec::new();
    for &gamma in gammas {
        for &lambda in lambdas {
            for &combiner in combiners {
                jobs.push(LambdaJob {
                    gamma,
                    lambda,
                    combiner,
                    design,
                });
            }
        }
    }
    sweep_jobs(net, hw, &jobs, mc)
}

/// Evaluates arbitrary sweep points, keeping their order.
pub fn sweep_jobs(net: &NetworkParams, hw: &HardwareParams, jobs: &[LambdaJob], mc: Option<McSpec>) -> Vec<LambdaRow> {
    jobs.par_iter()
        .map(|j| lambda_point(net, hw, j.gamma, j.lambda, j.combiner, j.design, mc))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn lambda_point(
    net: &NetworkParams,
    hw: &HardwareParams,
    gamma: f64,
    lambda: f64,
    combiner: Combiner,
    design: DesignChoice,
    mc: Option<McSpec>,
) -> Vec<LambdaRow> {
    let net = net.with_gamma(gamma).with_lambda(lambda);
    let bound = (|| -> Result<(DesignPoint, f64, PowerModel)> {
        net.validate()?;
        let pm = PowerModel::build(&net, hw)?;
        let dp = match design {
            DesignChoice::Optimize => alternating_optimize(&net, &pm, DEFAULT_START, combiner)?.design,
            DesignChoice::Fixed(d) => {
                let zeta = zeta_star_for(&net, d.m, d.k, combiner)?;
                DesignPoint::new(zeta, d.k, d.m)
            }
            DesignChoice::Exact(d) => d,
        };
        let ee = energy_efficiency(&net, &pm, &dp, combiner)?.ee;
        Ok((dp, ee, pm))
    })();
    let mut rows = Vec::new();
    match bound {
        Err(e) => rows.push(LambdaRow::failed(gamma, lambda, combiner, Source::Bound, &e)),
        Ok((dp, ee, pm)) => {
            rows.push(LambdaRow {
                gamma,
                lambda,
                combiner,
                source: Source::Bound,
                ee: Some(ee),
                design: Some(dp),
                std_error: None,
                reason: None,
            });
            if let (Some(spec), Combiner::Zf) = (mc, combiner) {
                rows.push(
                    match mc_energy_efficiency_with(&net, &pm, &dp, spec.n_drops, spec.seed, &spec.config) {
                        Ok(e) => LambdaRow {
                            gamma,
                            lambda,
                            combiner,
                            source: Source::Mc,
                            ee: Some(e.mean),
                            design: Some(dp),
                            std_error: Some(e.std_error),
                            reason: None,
                        },
                        Err(e) => LambdaRow::failed(gamma, lambda, combiner, Source::Mc, &e),
                    },
                );
            }
        }
    }
    rows
}

pub fn lambda_csv(rows: &[LambdaRow]) -> String {
    let mut out = String::from(LAMBDA_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Parses a sweep CSV back into jobs, one per bound row. Rows with a design
/// replay it exactly; rows without one are re-optimized.
pub fn parse_lambda_csv(text: &str) -> Result<Vec<LambdaJob>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == LAMBDA_CSV_HEADER => {}
        _ => {
            return Err(Error::Config {
                line: 1,
                reason: "unexpected CSV header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |reason: &str| Error::Config {
            line: n + 1,
            reason: reason.to_string(),
        };
        if cols.len() != 10 {
            return Err(bad("expected 10 columns"));
        }
        if cols[3] != "bound" {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let design = if cols[5].is_empty() {
            DesignChoice::Optimize
        } else {
            DesignChoice::Exact(DesignPoint::new(num(cols[7])?, num(cols[6])?, num(cols[5])?))
        };
        out.push(LambdaJob {
            gamma: num(cols[0])?,
            lambda: num(cols[1])?,
            combiner: cols[2].parse().map_err(|_| bad("bad combiner"))?,
            design,
        });
    }
    Ok(out)
}

/// EE over an (M, K) grid with ζ at its minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub m_values: Vec<i64>,
    pub k_values: Vec<i64>,
    /// Row-major over K then M; `None` where infeasible.
    pub cells: Vec<Option<(f64, f64)>>,
}

pub const SURFACE_CSV_HEADER: &str = "m,k,zeta,ee_bit_per_joule";

impl Surface {
    pub fn get(&self, ki: usize, mi: usize) -> Option<(f64, f64)> {
        self.cells[ki * self.m_values.len() + mi]
    }

    /// (M, K, ζ, EE) at the largest EE; ties go to smaller K, then smaller M.
    pub fn argmax(&self) -> Option<(i64, i64, f64, f64)> {
        let mut best: Option<(i64, i64, f64, f64)> = None;
        for (ki, &k) in self.k_values.iter().enumerate() {
            for (mi, &m) in self.m_values.iter().enumerate() {
                if let Some((z, ee)) = self.get(ki, mi) {
                    if best.is_none_or(|b| ee > b.3) {
                        best = Some((m, k, z, ee));
                    }
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SURFACE_CSV_HEADER);
        out.push('\n');
        for (ki, &k) in self.k_values.iter().enumerate() {
            for (mi, &m) in self.m_values.iter().enumerate() {
                let (z, e) = match self.get(ki, mi) {
                    Some((z, e)) => (z.to_string(), e.to_string()),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(out, "{m},{k},{z},{e}");
            }
        }
        out
    }

    /// Feasible EE values along each K row and each M column.
    pub fn slices(&self) -> Vec<Vec<f64>> {
        let (nm, nk) = (self.m_values.len(), self.k_values.len());
        let mut out = Vec::new();
        for ki in 0..nk {
            out.push((0..nm).filter_map(|mi| self.get(ki, mi).map(|c| c.1)).collect());
        }
        for mi in 0..nm {
            out.push((0..nk).filter_map(|ki| self.get(ki, mi).map(|c| c.1)).collect());
        }
        out
    }
}

pub fn surface(
    net: &NetworkParams,
    hw: &HardwareParams,
    m_values: &[i64],
    k_values: &[i64],
    combiner: Combiner,
) -> Result<Surface> {
    net.validate()?;
    let pm = PowerModel::build(net, hw)?;
    let cells = k_values
        .par_iter()
        .flat_map_iter(|&k| {
            let pm = &pm;
            m_values.iter().map(move |&m| {
                if m <= k || k < 1 {
                    return None;
                }
                let (mf, kf) = (m as f64, k as f64);
                let z = zeta_star_for(net, mf, kf, combiner).ok()?;
                energy_efficiency(net, pm, &DesignPoint::new(z, kf, mf), combiner)
                    .ok()
                    .map(|b| (z, b.ee))
            })
        })
        .collect();
    Ok(Surface {
        m_values: m_values.to_vec(),
        k_values: k_values.to_vec(),
        cells,
    })
}

/// One point of an EE-versus-ASE curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub combiner: Combiner,
    pub k: i64,
    pub m: i64,
    pub zeta: f64,
    pub ase: f64,
    pub ee: f64,
}

pub const TRADEOFF_CSV_HEADER: &str = "combiner,k,m,zeta,ase_bit_per_hz_km2,ee_bit_per_joule";

/// EE versus ASE traced by M at each fixed K; infeasible M are skipped.
pub fn tradeoff(
    net: &NetworkParams,
    hw: &HardwareParams,
    k_values: &[i64],
    m_values: &[i64],
    combiners: &[Combiner],
) -> Result<Vec<TradeoffPoint>> {
    net.validate()?;
    let pm = PowerModel::build(net, hw)?;
    let mut jobs = Vec::new();
    for &c in combiners {
        for &k in k_values {
            for &m in m_values {
                jobs.push((c, k, m));
            }
        }
    }
    Ok(jobs
        .par_iter()
        .map(|&(c, k, m)| {
            if m <= k || k < 1 {
                return None;
            }
            let (mf, kf) = (m as f64, k as f64);
            let z = zeta_star_for(net, mf, kf, c).ok()?;
            let b = energy_efficiency(net, &pm, &DesignPoint::new(z, kf, mf), c).ok()?;
            Some(TradeoffPoint {
                combiner: c,
                k,
                m,
                zeta: z,
                ase: b.ase,
                ee: b.ee,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from(TRADEOFF_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{},{},{}", p.combiner, p.k, p.m, p.zeta, p.ase, p.ee);
    }
    out
}

/// True if the sequence rises (weakly) and then falls (weakly): no
/// decrease is ever followed by an increase.
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d < 0.0 {
            falling = true;
        } else if d > 0.0 && falling {
            return false;
        }
    }
    true
}

/// Inclusive integer range helper for grids.
pub fn int_range(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let g = Grid::Range {
            min: 10.0,
            max: 1000.0,
            points: 3,
            scale: GridScale::Log,
        };
        let v = g.values().unwrap();
        assert_eq!((v[0], v[2]), (10.0, 1000.0));
        assert!((v[1] - 100.0).abs() < 1e-9);
        assert!(Grid::Explicit(vec![]).values().is_err());
        assert!(Grid::Explicit(vec![1.0, 1.0]).values().is_err());
        assert!(Grid::Explicit(vec![2.0, 1.0]).values().is_err());
        let lin = Grid::Range {
            min: 0.0,
            max: 1.0,
            points: 5,
            scale: GridScale::Linear,
        };
        assert_eq!(lin.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&[1.0, 2.0, 3.0, 2.0, 1.0]));
        assert!(is_unimodal(&[3.0, 2.0, 1.0]));
        assert!(is_unimodal(&[1.0, 2.0, 2.0, 3.0]));
        assert!(!is_unimodal(&[1.0, 0.5, 2.0]));
    }

    #[test]
    fn surface_blanks_and_argmax() {
        let net = NetworkParams::default();
        let s = surface(&net, &HardwareParams::default(), &int_range(1, 120), &int_range(1, 15), Combiner::Zf)
            .unwrap();
        assert!(s.get(4, 2).is_none()); // M = 3 ≤ K = 5
        let (m, k, _, ee) = s.argmax().unwrap();
        assert_eq!((m, k), (91, 10));
        assert!((ee / 1e6 - 6.6).abs() < 0.1);
        let csv = s.to_csv();
        assert!(csv.lines().any(|l| l == "3,5,,"));
    }

    #[test]
    fn lambda_rows_round_trip() {
        let net = NetworkParams::default();
        let hw = HardwareParams::default();
        let rows = sweep_lambda(&net, &hw, &[3.0], &[30.0, 100.0], &Combiner::ALL, DesignChoice::Optimize, None);
        assert_eq!(rows.len(), 4);
        let csv = lambda_csv(&rows);
        let jobs = parse_lambda_csv(&csv).unwrap();
        assert_eq!(jobs.len(), 4);
        assert_eq!(lambda_csv(&sweep_jobs(&net, &hw, &jobs, None)), csv);
    }

    #[test]
    fn infeasible_point_keeps_sweep_going() {
        let net = NetworkParams::default();
        let hw = HardwareParams::default();
        let bad = net.tau_c * (net.alpha - 1.0);
        let rows = sweep_lambda(&net, &hw, &[bad, 3.0], &[100.0], &[Combiner::Zf], DesignChoice::Optimize, None);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].ee.is_none() && rows[0].reason.is_some());
        assert!(rows[1].ee.is_some());
        assert!(rows[0].csv_line().ends_with("(SINR target unreachable)"));
    }

    #[test]
    fn tradeoff_curves() {
        let net = NetworkParams::default();
        let pts = tradeoff(&net, &HardwareParams::default(), &[5, 10], &int_range(2, 300), &Combiner::ALL)
            .unwrap();
        for c in Combiner::ALL {
            for k in [5, 10] {
                let mut curve: Vec<(f64, f64)> = pts
                    .iter()
                    .filter(|p| p.combiner == c && p.k == k)
                    .map(|p| (p.ase, p.ee))
                    .collect();
                curve.sort_by(|a, b| a.0.total_cmp(&b.0));
                let ees: Vec<f64> = curve.iter().map(|p| p.1).collect();
                assert!(is_unimodal(&ees), "{c} K={k}");
            }
        }
    }
}
