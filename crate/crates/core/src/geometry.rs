//! Poisson networks on a wraparound torus.
//!
//! BSs form a homogeneous PPP over a square torus; each BS serves exactly K
//! UEs placed uniformly in its Voronoi cell. UEs come from uniform draws over
//! the torus, then from discs certified to cover the cells still short of
//! UEs. The first UE placed is a uniform point on the torus and serves as
//! the typical UE: its serving distance is Rayleigh distributed.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::params::NetworkParams;

/// Rejection draws allowed per cell before giving up.
pub const MAX_REJECTION_DRAWS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }
}

/// Square torus `[0, side)²` with the minimum-image metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusRegion {
    pub side: f64,
}

impl Default for TorusRegion {
    /// 3 km × 3 km, i.e. nine 1 km² macro cells.
    fn default() -> Self {
        TorusRegion { side: 3.0 }
    }
}

impl TorusRegion {
    pub fn new(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::param("side", format!("side > 0 required, got {side}")));
        }
        Ok(TorusRegion { side })
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    fn wrap_delta(&self, d: f64) -> f64 {
        let d = d.abs() % self.side;
        d.min(self.side - d)
    }

    /// Distance between `p` and the nearest image of `q`.
    pub fn distance(&self, p: Point2, q: Point2) -> f64 {
        self.wrap_delta(p.x - q.x).hypot(self.wrap_delta(p.y - q.y))
    }

    fn uniform_point(&self, rng: &mut impl Rng) -> Point2 {
        Point2::new(rng.random::<f64>() * self.side, rng.random::<f64>() * self.side)
    }
}

/// How many BSs a drop contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BsCount {
    /// Poisson(λ·area) conditioned on at least two BSs.
    #[default]
    Poisson,
    /// Exactly this many BSs.
    Fixed(usize),
}

/// Bucket grid for nearest-BS queries on the torus. Points are stored
/// bucket by bucket so a ring scan touches contiguous memory.
#[derive(Debug, Clone)]
struct BucketGrid {
    side: f64,
    n: usize,
    cell: f64,
    starts: Vec<usize>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    ids: Vec<usize>,
    /// Points of each bucket's 3×3 neighborhood, laid out like the buckets.
    near_starts: Vec<usize>,
    near: Vec<(f64, f64, usize)>,
}

impl BucketGrid {
    fn new(region: &TorusRegion, points: &[Point2]) -> Self {
        // About one point per bucket.
        let n = ((points.len() as f64).sqrt().floor() as usize).max(1);
        let cell = region.side / n as f64;
        let bucket_of: Vec<usize> = points
            .iter()
            .map(|p| {
                let (bx, by) = Self::coords(p, cell, n);
                by * n + bx
            })
            .collect();
        let mut starts = vec![0usize; n * n + 1];
        for &b in &bucket_of {
            starts[b + 1] += 1;
        }
        for b in 0..n * n {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut ids = vec![0; points.len()];
        for (i, &b) in bucket_of.iter().enumerate() {
            ids[fill[b]] = i;
            fill[b] += 1;
        }
        let mut near_starts = Vec::with_capacity(n * n + 1);
        let mut near = Vec::new();
        near_starts.push(0);
        if n >= 3 {
            for by in 0..n {
                for bx in 0..n {
                    for dy in [n - 1, 0, 1] {
                        for dx in [n - 1, 0, 1] {
                            let b = ((by + dy) % n) * n + (bx + dx) % n;
                            near.extend(
                                ids[starts[b]..starts[b + 1]]
                                    .iter()
                                    .map(|&i| (points[i].x, points[i].y, i)),
                            );
                        }
                    }
                    near_starts.push(near.len());
                }
            }
        }
        BucketGrid {
            side: region.side,
            n,
            cell,
            starts,
            xs: ids.iter().map(|&i| points[i].x).collect(),
            ys: ids.iter().map(|&i| points[i].y).collect(),
            ids,
            near_starts,
            near,
        }
    }

    #[inline]
    fn wrapped_d2(&self, q: Point2, x: f64, y: f64) -> f64 {
        let half = 0.5 * self.side;
        let mut dx = (q.x - x).abs();
        if dx > half {
            dx = self.side - dx;
        }
        let mut dy = (q.y - y).abs();
        if dy > half {
            dy = self.side - dy;
        }
        dx * dx + dy * dy
    }

    fn coords(p: &Point2, cell: f64, n: usize) -> (usize, usize) {
        let bx = ((p.x / cell) as usize).min(n - 1);
        let by = ((p.y / cell) as usize).min(n - 1);
        (bx, by)
    }

    /// Scans bucket `b`, updating the best (squared distance, id).
    #[inline]
    fn scan(&self, b: usize, q: Point2, best: &mut (f64, usize)) {
        for s in self.starts[b]..self.starts[b + 1] {
            let d2 = self.wrapped_d2(q, self.xs[s], self.ys[s]);
            let id = self.ids[s];
            if d2 < best.0 || (d2 == best.0 && id < best.1) {
                *best = (d2, id);
            }
        }
    }

    fn nearest(&self, q: Point2) -> usize {
        let n = self.n as isize;
        let (bx, by) = Self::coords(&q, self.cell, self.n);
        let mut best = (f64::INFINITY, usize::MAX);
        if self.n < 3 {
            self.scan_all(q, &mut best);
            return best.1;
        }
        // Fast path: the 3×3 block around the query.
        let b = by * self.n + bx;
        for &(x, y, id) in &self.near[self.near_starts[b]..self.near_starts[b + 1]] {
            let d2 = self.wrapped_d2(q, x, y);
            if d2 < best.0 || (d2 == best.0 && id < best.1) {
                best = (d2, id);
            }
        }
        if best.0 <= self.cell * self.cell {
            return best.1;
        }
        let mut r: isize = 2;
        loop {
            if 2 * r + 1 >= n {
                // The ring wraps onto itself; finish with a full scan.
                self.scan_all(q, &mut best);
                return best.1;
            }
            for dy in -r..=r {
                let cy = (by as isize + dy).rem_euclid(n) as usize;
                let edge = dy.abs() == r;
                let step = if edge { 1 } else { 2 * r.max(1) };
                let mut dx = -r;
                while dx <= r {
                    let cx = (bx as isize + dx).rem_euclid(n) as usize;
                    self.scan(cy * self.n + cx, q, &mut best);
                    dx += step;
                }
            }
            // Anything outside ring r is at least r·cell away.
            let reach = r as f64 * self.cell;
            if best.0 <= reach * reach {
                return best.1;
            }
            r += 1;
        }
    }

    /// Min-image offsets from `q` to every point within `radius`, except `skip`.
    fn offsets_within(&self, q: Point2, radius: f64, skip: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        let (side, half, r2) = (self.side, 0.5 * self.side, radius * radius);
        let mut visit = |b: usize| {
            for s in self.starts[b]..self.starts[b + 1] {
                let mut dx = self.xs[s] - q.x;
                let mut dy = self.ys[s] - q.y;
                if dx > half {
                    dx -= side;
                } else if dx < -half {
                    dx += side;
                }
                if dy > half {
                    dy -= side;
                } else if dy < -half {
                    dy += side;
                }
                if dx * dx + dy * dy < r2 && self.ids[s] != skip {
                    out.push((dx, dy));
                }
            }
        };
        // A point within `radius` is at most ceil(radius/cell) buckets away.
        let r = (radius / self.cell).ceil() as usize;
        let n = self.n;
        if 2 * r + 1 >= n {
            (0..n * n).for_each(visit);
            return;
        }
        let (bx, by) = Self::coords(&q, self.cell, n);
        for dy in 0..=2 * r {
            let row = ((by + n - r + dy) % n) * n;
            for dx in 0..=2 * r {
                visit(row + (bx + n - r + dx) % n);
            }
        }
    }

    fn scan_all(&self, q: Point2, best: &mut (f64, usize)) {
        for b in 0..self.n * self.n {
            self.scan(b, q, best);
        }
    }
}

/// True if the half-planes of the neighbors at `offsets` exclude every
/// point at distance `r` from the BS. The cell is convex and contains the BS,
/// so it then lies inside the disc of radius `r`.
fn circle_excluded(offsets: &[(f64, f64)], r: f64, arcs: &mut Vec<(f64, f64)>) -> bool {
    use std::f64::consts::TAU;
    // Neighbor d excludes directions within acos(|d|/2r) of its bearing.
    arcs.clear();
    for &(dx, dy) in offsets {
        let d = dx.hypot(dy);
        if d >= 2.0 * r {
            continue;
        }
        let w = (d / (2.0 * r)).acos();
        let start = (dy.atan2(dx) - w).rem_euclid(TAU);
        arcs.push((start, start + 2.0 * w));
        arcs.push((start - TAU, start - TAU + 2.0 * w));
    }
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = 0.0;
    for &(s, e) in arcs.iter() {
        if s > reach {
            return false;
        }
        reach = f64::max(reach, e);
        if reach >= TAU {
            return true;
        }
    }
    false
}

/// Scratch space for [`covering_radius`]: neighbor offsets and arcs.
type CoverBuffers = (Vec<(f64, f64)>, Vec<(f64, f64)>);

/// Radius of a disc around BS `l` that covers its cell, or `None` when no
/// disc smaller than half the torus side does.
fn covering_radius(grid: &BucketGrid, points: &[Point2], l: usize, buf: &mut CoverBuffers) -> Option<f64> {
    let limit = 0.5 * grid.side;
    let mut r = grid.cell;
    while r < limit {
        grid.offsets_within(points[l], 2.0 * r, l, &mut buf.0);
        if circle_excluded(&buf.0, r, &mut buf.1) {
            return Some(r);
        }
        r *= 1.5;
    }
    None
}

/// One sampled network.
#[derive(Debug, Clone, PartialEq)]
pub struct DropRealization {
    pub region: TorusRegion,
    pub bs_points: Vec<Point2>,
    /// UE `k` of cell `l` is at index `l·K + k`.
    pub ue_positions: Vec<Point2>,
    pub k: usize,
    /// Serving distance of every UE, same indexing as `ue_positions`.
    pub serving_distances: Vec<f64>,
    /// Cell and in-cell index of the typical UE (the first one placed).
    pub typical: (usize, usize),
    pub seed: u64,
    pub drop_index: u64,
    /// Uniform draws spent by rejection sampling.
    pub draws: u64,
}

impl DropRealization {
    pub fn n_cells(&self) -> usize {
        self.bs_points.len()
    }

    pub fn ue(&self, cell: usize, idx: usize) -> Point2 {
        self.ue_positions[cell * self.k + idx]
    }

    pub fn serving_distance(&self, cell: usize, idx: usize) -> f64 {
        self.serving_distances[cell * self.k + idx]
    }

    /// Distance from UE `idx` of cell `cell` to BS `bs`.
    pub fn cross_distance(&self, cell: usize, idx: usize, bs: usize) -> f64 {
        self.region.distance(self.ue(cell, idx), self.bs_points[bs])
    }

    /// Distance ratio `(d_li^l / d_li^j)^α` for UE `i` of cell `l` seen at BS `j`.
    pub fn ratio(&self, l: usize, i: usize, j: usize, alpha: f64) -> f64 {
        (self.serving_distance(l, i) / self.cross_distance(l, i, j)).powf(alpha)
    }

    /// Writes `drop,entity_type,cell_index,x_km,y_km` rows (no header).
    pub fn write_csv_rows(&self, out: &mut impl Write) -> std::io::Result<()> {
        for (l, p) in self.bs_points.iter().enumerate() {
            writeln!(out, "{},bs,{},{},{}", self.drop_index, l, p.x, p.y)?;
        }
        for (n, p) in self.ue_positions.iter().enumerate() {
            writeln!(out, "{},ue,{},{},{}", self.drop_index, n / self.k, p.x, p.y)?;
        }
        Ok(())
    }
}

pub const DROP_CSV_HEADER: &str = "drop,entity_type,cell_index,x_km,y_km";

/// RNG for drop `drop_index` of a run seeded with `seed`.
pub fn drop_rng(seed: u64, drop_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop_index);
    rng
}

/// Samples drop 0 of `seed` with a Poisson BS count.
pub fn sample_drop(
    net: &NetworkParams,
    region: &TorusRegion,
    k: usize,
    seed: u64,
) -> Result<DropRealization> {
    sample_drop_with(net, region, k, seed, 0, BsCount::Poisson)
}

pub fn sample_drop_with(
    net: &NetworkParams,
    region: &TorusRegion,
    k: usize,
    seed: u64,
    drop_index: u64,
    count: BsCount,
) -> Result<DropRealization> {
    if k < 1 {
        return Err(Error::param("k", "k ≥ 1 required"));
    }
    let mean = net.lambda * region.area();
    let mut rng = drop_rng(seed, drop_index);
    let n_bs = match count {
        BsCount::Fixed(n) if n >= 1 => n,
        BsCount::Fixed(_) => return Err(Error::param("bs_count", "at least one BS required")),
        BsCount::Poisson => {
            if !(mean >= 2.0) {
                return Err(Error::param(
                    "lambda",
                    format!("λ·area ≥ 2 expected BSs required, got {mean}"),
                ));
            }
            let pois = Poisson::new(mean).map_err(|e| Error::Sampling(e.to_string()))?;
            loop {
                let n = pois.sample(&mut rng) as usize;
                if n >= 2 {
                    break n;
                }
            }
        }
    };
    let bs_points: Vec<Point2> = (0..n_bs).map(|_| region.uniform_point(&mut rng)).collect();
    let grid = BucketGrid::new(region, &bs_points);

    let mut ue_positions = vec![Point2::new(f64::NAN, f64::NAN); n_bs * k];
    let mut serving_distances = vec![f64::NAN; n_bs * k];
    let mut filled = vec![0usize; n_bs];
    let mut place = |l: usize, p: Point2, filled: &mut [usize]| {
        let idx = l * k + filled[l];
        ue_positions[idx] = p;
        serving_distances[idx] = region.distance(p, bs_points[l]);
        filled[l] += 1;
    };

    // Phase 1: uniform draws over the torus, kept if their cell has room.
    // The first one is always kept and is the typical UE. Accepted points
    // are uniform in their cells, and the fixed budget does not depend on
    // positions, so the phases can be mixed freely.
    let budget = 2 * (n_bs * k) as u64;
    let mut draws = 0u64;
    let mut remaining = n_bs * k;
    let mut typical = None;
    while draws < budget && remaining > 0 {
        draws += 1;
        let p = region.uniform_point(&mut rng);
        let l = grid.nearest(p);
        if filled[l] < k {
            typical.get_or_insert((l, filled[l]));
            place(l, p, &mut filled);
            remaining -= 1;
        }
    }

    // Phase 2: fill the remaining slots from discs covering each open cell.
    let mut buf = CoverBuffers::default();
    for l in 0..n_bs {
        if filled[l] == k {
            continue;
        }
        let radius = covering_radius(&grid, &bs_points, l, &mut buf);
        let b = bs_points[l];
        let mut cell_draws = 0u64;
        while filled[l] < k {
            if cell_draws >= MAX_REJECTION_DRAWS {
                return Err(Error::Sampling(format!(
                    "rejection sampling exceeded {MAX_REJECTION_DRAWS} draws in cell {l}"
                )));
            }
            cell_draws += 1;
            let p = match radius {
                Some(r) => {
                    let rho = r * rng.random::<f64>().sqrt();
                    let phi = std::f64::consts::TAU * rng.random::<f64>();
                    let s = region.side;
                    Point2::new(
                        (b.x + rho * phi.cos()).rem_euclid(s).min(s.next_down()),
                        (b.y + rho * phi.sin()).rem_euclid(s).min(s.next_down()),
                    )
                }
                None => region.uniform_point(&mut rng),
            };
            if grid.nearest(p) == l {
                place(l, p, &mut filled);
            }
        }
        draws += cell_draws;
    }

    Ok(DropRealization {
        region: *region,
        bs_points,
        ue_positions,
        k,
        serving_distances,
        typical: typical.expect("the first draw is always kept"),
        seed,
        drop_index,
        draws,
    })
}

/// Interference sums seen at BS `j` for its UEs `k` (the tagged one) and
/// `0..K`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaSums {
    pub theta1_k: f64,
    pub theta2_k: f64,
    pub theta1_sum: f64,
    pub theta2_sum: f64,
}

/// Sums over all cells `l ≠ j` of `(d_li^l / d_li^j)^{κα}`, κ ∈ {1, 2}.
pub fn theta_sums(
    drop: &DropRealization,
    net: &NetworkParams,
    typical_cell: usize,
    typical_ue: usize,
) -> ThetaSums {
    let (j, kk) = (typical_cell, typical_ue);
    let mut s = ThetaSums::default();
    for l in (0..drop.n_cells()).filter(|&l| l != j) {
        for i in 0..drop.k {
            let r = drop.ratio(l, i, j, net.alpha);
            s.theta1_sum += r;
            s.theta2_sum += r * r;
            if i == kk {
                s.theta1_k += r;
                s.theta2_k += r * r;
            }
        }
    }
    s
}

/// Sums for the typical UE over the BSs it does not connect to,
/// `Σ_{l ≠ own} (d_own / d_l)^{κα}` for κ = 1, 2.
pub fn typical_ue_sums(drop: &DropRealization, net: &NetworkParams) -> (f64, f64) {
    let (own, idx) = drop.typical;
    let p = drop.ue(own, idx);
    let d0 = drop.serving_distance(own, idx);
    let (mut s1, mut s2) = (0.0, 0.0);
    for (l, b) in drop.bs_points.iter().enumerate() {
        if l == own {
            continue;
        }
        let r = (d0 / drop.region.distance(p, *b)).powf(net.alpha);
        s1 += r;
        s2 += r * r;
    }
    (s1, s2)
}

/// Same-cell product sums at BS `j` for UEs `k ≠ i`:
/// the cross-cell double sum `Σ_n Σ_{l≠n} X_nk X_li` and the same-cell sum
/// `Σ_n X_nk X_ni`, where `X_li = (d_li^l / d_li^j)^α`.
pub fn product_sums(
    drop: &DropRealization,
    net: &NetworkParams,
    j: usize,
    k: usize,
    i: usize,
) -> (f64, f64) {
    let (mut sk, mut si, mut same) = (0.0, 0.0, 0.0);
    for n in (0..drop.n_cells()).filter(|&n| n != j) {
        let xk = drop.ratio(n, k, j, net.alpha);
        let xi = drop.ratio(n, i, j, net.alpha);
        sk += xk;
        si += xi;
        same += xk * xi;
    }
    (sk * si - same, same)
}

/// CDF of the typical serving distance, Rayleigh with scale sqrt(1/(2πλ)).
pub fn rayleigh_cdf(lambda: f64, r: f64) -> f64 {
    1.0 - (-std::f64::consts::PI * lambda * r * r).exp()
}
