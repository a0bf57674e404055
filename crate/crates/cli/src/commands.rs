//! Subcommand bodies.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{Context, Result};
use eedesign::experiments::{
    self, int_range, lambda_csv, parse_lambda_csv, sweep_jobs, sweep_lambda, DesignChoice, Grid, GridScale,
    McSpec, TableRow, DEFAULT_START,
};
use eedesign::geometry::{sample_drop_with, BsCount, DROP_CSV_HEADER};
use eedesign::mc::{geometry_report, validate_channel_identities, validate_uatf_sinr, Report, TypicalMode};
use eedesign::plot::{Heatmap, LinePlot, Series};
use eedesign::{load_config, Combiner, DesignPoint, HardwareParams, McConfig, NetworkParams, TorusRegion};
use rayon::prelude::*;

use crate::output::Sink;
use crate::{Cli, Command, Suite, TypicalOpts, UsageError, ValidationFailed};

/// Channel-suite sizes (M, K) checked by default.
const CHANNEL_SIZES: [(f64, f64); 3] = [(4.0, 2.0), (8.0, 3.0), (16.0, 8.0)];
const CHANNEL_ZETA: f64 = 3.0;
const GEOMETRY_DROPS: usize = 10_000;
const CHANNEL_DRAWS: usize = 100_000;

struct Ctx {
    net: NetworkParams,
    hw: HardwareParams,
    seed: u64,
    verbose: bool,
    sink: Sink,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn net_at(&self, gamma: Option<f64>, lambda: Option<f64>) -> NetworkParams {
        let mut net = self.net;
        if let Some(g) = gamma {
            net.gamma = g;
        }
        if let Some(l) = lambda {
            net.lambda = l;
        }
        net
    }

    /// Prints a summary where it will not mix with CSV on stdout.
    fn summary(&self, text: &str) {
        if self.sink.to_file() {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
    }
}

/// Plot series key: (γ, combiner, source).
type SeriesKey<'a> = (String, Combiner, &'a str);

pub fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(UsageError("--threads must be ≥ 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let (net, hw) = match &g.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => (NetworkParams::default(), HardwareParams::default()),
    };
    let ctx = Ctx {
        net,
        hw,
        seed: g.seed,
        verbose: g.verbose,
        sink: Sink::new(g.out, g.svg)?,
    };
    let started = Instant::now();
    let res = match cli.command {
        Command::Optimize {
            gamma,
            lambda,
            combiner,
            start,
        } => optimize(&ctx, gamma, lambda, combiner.into(), start),
        Command::SweepLambda {
            gamma,
            lambda,
            lambda_min,
            lambda_max,
            lambda_points,
            linear,
            combiners,
            mc_drops,
            fixed_design,
            from_csv,
            typical,
        } => {
            let grid = match lambda {
                Some(v) => Grid::Explicit(v),
                None => Grid::Range {
                    min: lambda_min,
                    max: lambda_max,
                    points: lambda_points,
                    scale: if linear { GridScale::Linear } else { GridScale::Log },
                },
            };
            let combiners: Vec<Combiner> = combiners.into_iter().map(Into::into).collect();
            let mc = match mc_drops {
                Some(n) => Some(McSpec {
                    n_drops: check_n(n)?,
                    seed: ctx.seed,
                    config: mc_config(typical),
                }),
                None => None,
            };
            let jobs = match from_csv {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    Some(parse_lambda_csv(&text)?)
                }
                None => None,
            };
            sweep(&ctx, &gamma, grid, &combiners, fixed_design, jobs, mc)
        }
        Command::Surface {
            gamma,
            lambda,
            m_max,
            k_max,
            combiner,
        } => surface(&ctx, gamma, lambda, m_max, k_max, combiner.into()),
        Command::Tradeoff {
            gamma,
            lambda,
            k,
            m_max,
        } => tradeoff(&ctx, gamma, lambda, &k, m_max),
        Command::Validate { suite, n, size, typical } => validate(&ctx, suite, n, size, typical),
        Command::SimulateDrop {
            lambda,
            k,
            drops,
            side,
            fixed_bs_count,
        } => simulate_drop(&ctx, lambda, k, drops, side, fixed_bs_count),
    };
    ctx.log(format!("elapsed {:.2} s", started.elapsed().as_secs_f64()));
    res
}

fn check_n(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(UsageError("n ≥ 2 required for std error".into()).into());
    }
    Ok(n)
}

fn mc_config(t: TypicalOpts) -> McConfig {
    McConfig {
        typical: if t.all_ues {
            TypicalMode::AllUes
        } else {
            TypicalMode::FirstAccepted
        },
        bs_count: t.fixed_bs_count.map_or(BsCount::Poisson, BsCount::Fixed),
        ..McConfig::default()
    }
}

fn optimize(
    ctx: &Ctx,
    gamma: Option<f64>,
    lambda: Option<f64>,
    combiner: Combiner,
    start: Option<(f64, f64)>,
) -> Result<()> {
    let net = ctx.net_at(gamma, lambda);
    let start = start.map(|(m, k)| DesignPoint::new(DEFAULT_START.zeta, k, m));
    let r = experiments::optimize(&net, &ctx.hw, combiner, start)?;
    let row = TableRow::from(&r);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<8} {:>12} {:>20} {:>13} {:>5} {:>4} {:>7} {:>10}",
        "combiner", "EE[Mbit/J]", "ASE[kbit/s/Hz/km2]", "APC[kW/km2]", "M", "K", "zeta", "1/zeta[%]"
    );
    let _ = writeln!(
        text,
        "{:<8} {:>12.2} {:>20.2} {:>13.2} {:>5} {:>4} {:>7.2} {:>10.1}",
        combiner, row.ee_mbit_per_joule, row.ase_kbit, row.apc_kw, row.m, row.k, row.zeta, row.reuse_percent
    );
    if ctx.verbose {
        let _ = writeln!(text, "iterations={} converged={}", r.iterations, r.converged);
        for (i, it) in r.trajectory.iter().enumerate() {
            let _ = writeln!(
                text,
                "iter {i}: zeta={:.4} m={} k={} ee={:.6e} relaxed_ee={:.6e}",
                it.zeta, it.m, it.k, it.ee, it.relaxed_ee
            );
        }
    }
    print!("{text}");
    let csv = format!(
        "combiner,gamma,lambda,ee_bit_per_joule,ase_bit_per_hz_km2,apc_w_per_km2,m,k,zeta\n{},{},{},{},{},{},{},{},{}\n",
        combiner,
        net.gamma,
        net.lambda,
        r.breakdown.ee,
        r.breakdown.ase,
        r.breakdown.apc,
        r.design.m,
        r.design.k,
        r.design.zeta
    );
    ctx.sink.csv_if_file(&csv)
}

fn sweep(
    ctx: &Ctx,
    gammas: &[f64],
    grid: Grid,
    combiners: &[Combiner],
    fixed: Option<(f64, f64)>,
    jobs: Option<Vec<experiments::LambdaJob>>,
    mc: Option<McSpec>,
) -> Result<()> {
    let rows = match jobs {
        Some(jobs) => sweep_jobs(&ctx.net, &ctx.hw, &jobs, mc),
        None => {
            let lambdas = grid.values()?;
            let design = match fixed {
                Some((m, k)) => DesignChoice::Fixed(DesignPoint::new(1.0, k, m)),
                None => DesignChoice::Optimize,
            };
            sweep_lambda(&ctx.net, &ctx.hw, gammas, &lambdas, combiners, design, mc)
        }
    };
    for r in rows.iter().filter(|r| r.reason.is_some()) {
        ctx.log(format!(
            "gamma={} lambda={} {} {}: {}",
            r.gamma,
            r.lambda,
            r.combiner,
            r.source.as_str(),
            r.reason.as_deref().unwrap_or("")
        ));
    }
    ctx.sink.csv(&lambda_csv(&rows))?;
    ctx.sink.svg(|| {
        let mut series: BTreeMap<SeriesKey, Vec<(f64, f64)>> = BTreeMap::new();
        for r in &rows {
            if let Some(ee) = r.ee {
                series
                    .entry((r.gamma.to_string(), r.combiner, r.source.as_str()))
                    .or_default()
                    .push((r.lambda, ee / 1e6));
            }
        }
        LinePlot {
            title: "Energy efficiency versus BS density".into(),
            x_label: "λ [BS/km²]".into(),
            y_label: "EE [Mbit/J]".into(),
            log_x: true,
            series: series
                .into_iter()
                .map(|((g, c, src), points)| Series {
                    label: format!("{c} γ={g} {src}"),
                    dashed: c == Combiner::Mr,
                    points,
                })
                .collect(),
        }
        .to_svg()
    })
}

fn surface(ctx: &Ctx, gamma: Option<f64>, lambda: Option<f64>, m_max: i64, k_max: i64, combiner: Combiner) -> Result<()> {
    if m_max < 2 || k_max < 1 {
        return Err(UsageError("need --m-max ≥ 2 and --k-max ≥ 1".into()).into());
    }
    let net = ctx.net_at(gamma, lambda);
    let s = experiments::surface(&net, &ctx.hw, &int_range(1, m_max), &int_range(1, k_max), combiner)?;
    ctx.sink.csv(&s.to_csv())?;
    match s.argmax() {
        Some((m, k, z, ee)) => ctx.summary(&format!(
            "argmax M={m} K={k} zeta={z:.2} EE={:.2} Mbit/J\n",
            ee / 1e6
        )),
        None => return Err(eedesign::Error::Infeasible(eedesign::Infeasibility::EmptyFeasibleSet).into()),
    }
    ctx.sink.svg(|| {
        Heatmap {
            title: format!("{combiner} energy efficiency [Mbit/J]"),
            x_label: "M".into(),
            y_label: "K".into(),
            x_values: s.m_values.iter().map(|&m| m as f64).collect(),
            y_values: s.k_values.iter().map(|&k| k as f64).collect(),
            values: (0..s.k_values.len())
                .map(|ki| (0..s.m_values.len()).map(|mi| s.get(ki, mi).map(|c| c.1 / 1e6)).collect())
                .collect(),
        }
        .to_svg()
    })
}

fn tradeoff(ctx: &Ctx, gamma: Option<f64>, lambda: Option<f64>, ks: &[i64], m_max: i64) -> Result<()> {
    let net = ctx.net_at(gamma, lambda);
    let pts = experiments::tradeoff(&net, &ctx.hw, ks, &int_range(2, m_max), &Combiner::ALL)?;
    ctx.sink.csv(&experiments::tradeoff_csv(&pts))?;
    ctx.sink.svg(|| {
        let mut series = Vec::new();
        for c in Combiner::ALL {
            for &k in ks {
                let mut points: Vec<(f64, f64)> = pts
                    .iter()
                    .filter(|p| p.combiner == c && p.k == k)
                    .map(|p| (p.ase / 1e3, p.ee / 1e6))
                    .collect();
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                series.push(Series {
                    label: format!("{c} K={k}"),
                    points,
                    dashed: c == Combiner::Mr,
                });
            }
        }
        LinePlot {
            title: "Energy efficiency versus area spectral efficiency".into(),
            x_label: "ASE [kbit/s/Hz/km²]".into(),
            y_label: "EE [Mbit/J]".into(),
            log_x: false,
            series,
        }
        .to_svg()
    })
}

fn validate(ctx: &Ctx, suite: Suite, n: Option<usize>, size: Option<(f64, f64)>, typical: TypicalOpts) -> Result<()> {
    if let Some(n) = n {
        check_n(n)?;
    }
    let sizes: Vec<(f64, f64)> = size.map_or(CHANNEL_SIZES.to_vec(), |s| vec![s]);
    let mut report = Report::default();
    if matches!(suite, Suite::Geometry | Suite::All) {
        let n = n.unwrap_or(GEOMETRY_DROPS);
        ctx.log(format!("geometry: {n} drops"));
        report.extend(geometry_report(&ctx.net, n, ctx.seed, &mc_config(typical))?.prefixed("geometry"));
    }
    for &(m, k) in &sizes {
        let dp = DesignPoint::new(CHANNEL_ZETA, k, m);
        let tag = format!("m{m}_k{k}");
        let n = n.unwrap_or(CHANNEL_DRAWS);
        if matches!(suite, Suite::Channel | Suite::All) {
            ctx.log(format!("channel identities {tag}: {n} draws"));
            report.extend(validate_channel_identities(&ctx.net, &dp, n, ctx.seed)?.prefixed(&tag));
        }
        if matches!(suite, Suite::Uatf | Suite::All) {
            ctx.log(format!("uatf {tag}: {n} draws"));
            report.extend(validate_uatf_sinr(&ctx.net, &dp, n, ctx.seed)?.prefixed(&tag));
        }
    }
    print!("{}", report.to_text());
    ctx.sink.csv_if_file(&report.to_csv())?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(ValidationFailed(report.failures().map(|l| l.name.clone()).collect()).into())
    }
}

fn simulate_drop(
    ctx: &Ctx,
    lambda: Option<f64>,
    k: usize,
    drops: usize,
    side: f64,
    fixed: Option<usize>,
) -> Result<()> {
    let net = ctx.net_at(None, lambda);
    net.validate()?;
    let region = TorusRegion::new(side)?;
    let count = fixed.map_or(BsCount::Poisson, BsCount::Fixed);
    let chunks = (0..drops as u64)
        .into_par_iter()
        .map(|i| {
            let d = sample_drop_with(&net, &region, k, ctx.seed, i, count)?;
            let mut buf = Vec::new();
            d.write_csv_rows(&mut buf)?;
            Ok(buf)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::from(DROP_CSV_HEADER);
    text.push('\n');
    for c in chunks {
        text.push_str(&String::from_utf8(c)?);
    }
    ctx.sink.csv(&text)?;
    ctx.sink.svg(|| drop_svg(&text, side))
}

/// Scatter of the first drop: BSs as squares, UEs as dots.
fn drop_svg(csv: &str, side: f64) -> String {
    let scale = 400.0 / side;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="440" height="440" viewBox="0 0 440 440">"#
    );
    let _ = writeln!(out, r#"<rect width="440" height="440" fill="white"/>"#);
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] != "0" {
            break;
        }
        let (x, y) = (f[3].parse::<f64>().unwrap_or(0.0), f[4].parse::<f64>().unwrap_or(0.0));
        let (px, py) = (20.0 + x * scale, 420.0 - y * scale);
        if f[1] == "bs" {
            let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="black"/>"#, px - 2.5, py - 2.5);
        } else {
            let _ = writeln!(out, r##"<circle cx="{px:.2}" cy="{py:.2}" r="1.5" fill="#1f77b4"/>"##);
        }
    }
    out.push_str("</svg>\n");
    out
}
