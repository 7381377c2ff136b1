//! Independent oracles and the analytic cost model.
//!
//! `exact_wasserstein` solves the transport problem exactly on small
//! instances: an O(n³) assignment solver for uniform equal-size measures,
//! a transportation simplex for general weights. `maxsw_grid_2d` brute
//! forces the max sliced distance over a dense angle grid in the plane.
//! `cost_model` counts multiply-accumulate-proportional work and stored
//! projection entries for the two Monte Carlo estimators, and `bench`
//! pairs those counts with measured wall-clock times.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::rng::from_seed;
use crate::sliced::{hsw, sw, EstimatorConfig};
use crate::util::{abs_pow, pth_root};
use crate::wasserstein1d::wpp_general;

/// Largest n·m accepted by the exact solver.
const EXACT_INSTANCE_LIMIT: usize = 1_000_000;

/// Which estimator a cost report or bench row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMethod {
    Sw,
    Hsw,
}

impl CostMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CostMethod::Sw => "sw",
            CostMethod::Hsw => "hsw",
        }
    }
}

/// FLOP-proportional compute and stored-projection counts for one
/// estimator configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub method: CostMethod,
    pub d: u64,
    pub n: u64,
    pub l: u64,
    /// Bottleneck count; None for SW.
    pub k: Option<u64>,
    /// Head count; None for SW.
    pub h: Option<u64>,
    pub compute_units: u64,
    pub projection_units: u64,
}

fn log2_exact(n: u64) -> f64 {
    if n.is_power_of_two() {
        n.trailing_zeros() as f64
    } else {
        (n as f64).log2()
    }
}

/// Analytic cost model.
///
/// SW: compute = L·d·n + L·n·log₂n, projection = L·d.
/// HSW: compute = H·k·d·n + H·L·k·n + H·L·n·log₂n, projection = H·d·k + k·L.
///
/// log₂n is exact for powers of two; otherwise the real-valued formula is
/// rounded to the nearest unit.
pub fn cost_model(
    method: CostMethod,
    d: u64,
    n: u64,
    l: u64,
    k: Option<u64>,
    h: Option<u64>,
) -> Result<CostReport> {
    if d == 0 || n == 0 || l == 0 {
        return Err(Error::invalid("d, n and L must be ≥ 1"));
    }
    match method {
        CostMethod::Sw => {
            let sort = l as f64 * n as f64 * log2_exact(n);
            Ok(CostReport {
                method,
                d,
                n,
                l,
                k: None,
                h: None,
                compute_units: l * d * n + sort.round() as u64,
                projection_units: l * d,
            })
        }
        CostMethod::Hsw => {
            let k = k.ok_or_else(|| Error::invalid("HSW cost model requires k"))?;
            let h = h.unwrap_or(1);
            if k == 0 || h == 0 {
                return Err(Error::invalid("k and H must be ≥ 1"));
            }
            let sort = h as f64 * l as f64 * n as f64 * log2_exact(n);
            Ok(CostReport {
                method,
                d,
                n,
                l,
                k: Some(k),
                h: Some(h),
                compute_units: h * k * d * n + h * l * k * n + sort.round() as u64,
                projection_units: h * d * k + k * l,
            })
        }
    }
}

/// Exact Wasserstein distance of order p between two small discrete
/// measures. Uniform equal-size inputs go through an optimal-assignment
/// solver; general weights through a transportation simplex.
pub fn exact_wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if p < 1.0 || !p.is_finite() {
        return Err(Error::invalid(format!("p must be ≥ 1, got {p}")));
    }
    let (n, m) = (mu.len(), nu.len());
    if n * m > EXACT_INSTANCE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "instance {n}×{m} exceeds the exact-solver guard of {EXACT_INSTANCE_LIMIT}"
        )));
    }
    let cost = cost_matrix(mu, nu, p);
    let total = if n == m && mu.is_uniform() && nu.is_uniform() {
        let assignment = hungarian_min(&cost);
        let mut acc = 0.0;
        for (i, j) in assignment.into_iter().enumerate() {
            acc += cost[[i, j]];
        }
        acc / n as f64
    } else {
        transport_simplex(mu.weights(), nu.weights(), &cost)?
    };
    Ok(pth_root(total.max(0.0), p))
}

/// Ground cost ‖xᵢ − yⱼ‖₂^p.
fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Array2<f64> {
    let (n, m) = (mu.len(), nu.len());
    let d = mu.dim();
    let xa = mu.supports();
    let xb = nu.supports();
    let mut cost = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let mut sq = 0.0;
            for t in 0..d {
                let diff = xa[[i, t]] - xb[[j, t]];
                sq += diff * diff;
            }
            cost[[i, j]] = abs_pow(sq.sqrt(), p);
        }
    }
    cost
}

/// O(n³) Hungarian algorithm with potentials; returns the column matched
/// to each row of the square cost matrix.
fn hungarian_min(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    debug_assert_eq!(n, cost.ncols());
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[col] = row (1-based), 0 = free
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[matched[j] - 1] = j - 1;
    }
    row_to_col
}

/// Transportation simplex (MODI) for min Σ πᵢⱼ·costᵢⱼ subject to the
/// marginal constraints. Exact up to float arithmetic; small instances
/// only.
fn transport_simplex(supply: &[f64], demand: &[f64], cost: &Array2<f64>) -> Result<f64> {
    let n = supply.len();
    let m = demand.len();
    // Basis cells as a spanning tree over rows ∪ cols, seeded by the
    // northwest-corner rule (degenerate zero cells keep the tree intact).
    let mut flow: Vec<(usize, usize, f64)> = Vec::with_capacity(n + m - 1);
    {
        let mut rem_a: Vec<f64> = supply.to_vec();
        let mut rem_b: Vec<f64> = demand.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let x = rem_a[i].min(rem_b[j]);
            flow.push((i, j, x));
            rem_a[i] -= x;
            rem_b[j] -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if rem_a[i] <= rem_b[j] && i < n - 1 {
                rem_a[i] = 0.0;
                i += 1;
            } else {
                rem_b[j] = 0.0;
                j += 1;
            }
        }
    }

    let scale = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let tol = 1e-12 * scale;
    let max_pivots = 1000 * (n + m);

    for _ in 0..max_pivots {
        // Duals from the basis tree: u[i] + v[j] = c[i][j] on basis cells.
        let mut u = vec![f64::NAN; n];
        let mut v = vec![f64::NAN; m];
        u[0] = 0.0;
        let mut settled = 1;
        while settled < n + m {
            let before = settled;
            for &(i, j, _) in &flow {
                if u[i].is_nan() && !v[j].is_nan() {
                    u[i] = cost[[i, j]] - v[j];
                    settled += 1;
                } else if !u[i].is_nan() && v[j].is_nan() {
                    v[j] = cost[[i, j]] - u[i];
                    settled += 1;
                }
            }
            if settled == before {
                return Err(Error::NumericalDomain(
                    "transportation basis lost connectivity".to_string(),
                ));
            }
        }

        // Entering cell: most negative reduced cost.
        let mut best = -tol;
        let mut enter: Option<(usize, usize)> = None;
        for i in 0..n {
            for j in 0..m {
                let reduced = cost[[i, j]] - u[i] - v[j];
                if reduced < best {
                    best = reduced;
                    enter = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = enter else {
            break;
        };

        // Cycle: unique tree path from row ei to col ej, alternating
        // row/col nodes, plus the entering edge. The first path cell
        // shares the entering cell's row, so even positions (0-based)
        // lose flow when the entering cell gains it.
        let path = tree_path(&flow, n, m, ei, ej)?;
        let mut delta = f64::INFINITY;
        let mut leave_idx = usize::MAX;
        for (pos, &cell) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let f = flow[cell].2;
                if f < delta {
                    delta = f;
                    leave_idx = cell;
                }
            }
        }
        for (pos, &cell) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[cell].2 -= delta;
            } else {
                flow[cell].2 += delta;
            }
        }
        // Replace the leaving cell with the entering one, keeping the
        // basis size at n + m − 1.
        flow[leave_idx] = (ei, ej, delta);
    }

    let mut total = 0.0;
    for &(i, j, f) in &flow {
        total += f * cost[[i, j]];
    }
    Ok(total)
}

/// Basis cells touched on the alternating tree path row(ei) → col(ej),
/// in order. Node ids: rows 0..n, cols n..n+m.
fn tree_path(
    flow: &[(usize, usize, f64)],
    n: usize,
    m: usize,
    ei: usize,
    ej: usize,
) -> Result<Vec<usize>> {
    let nodes = n + m;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes]; // (neighbor, cell index)
    for (c, &(i, j, _)) in flow.iter().enumerate() {
        adj[i].push((n + j, c));
        adj[n + j].push((i, c));
    }
    let start = ei;
    let goal = n + ej;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut visited = vec![false; nodes];
    let mut queue = std::collections::VecDeque::new();
    visited[start] = true;
    queue.push_back(start);
    while let Some(x) = queue.pop_front() {
        if x == goal {
            break;
        }
        for &(y, c) in &adj[x] {
            if !visited[y] {
                visited[y] = true;
                prev[y] = Some((x, c));
                queue.push_back(y);
            }
        }
    }
    if !visited[goal] {
        return Err(Error::NumericalDomain(
            "transportation basis lost connectivity".to_string(),
        ));
    }
    let mut cells = Vec::new();
    let mut cur = goal;
    while let Some((parent, cell)) = prev[cur] {
        cells.push(cell);
        cur = parent;
    }
    cells.reverse();
    Ok(cells)
}

/// Brute-force Max-SW oracle in the plane: maximizes the projected 1D
/// distance over θ(φ) = (cos φ, sin φ) for φ on a uniform grid of
/// [0, π). Returns (max value, argmax angle).
pub fn maxsw_grid_2d(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    grid_points: usize,
) -> Result<(f64, f64)> {
    if mu.dim() != 2 || nu.dim() != 2 {
        return Err(Error::UnsupportedConfiguration(
            "grid oracle is 2D only".to_string(),
        ));
    }
    if grid_points < 16 {
        return Err(Error::invalid("grid must have at least 16 points"));
    }
    if p < 1.0 || !p.is_finite() {
        return Err(Error::invalid(format!("p must be ≥ 1, got {p}")));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    let (n, m) = (mu.len(), nu.len());
    let mut va = vec![0.0; n];
    let mut vb = vec![0.0; m];
    for g in 0..grid_points {
        let phi = g as f64 * std::f64::consts::PI / grid_points as f64;
        let (s, c) = phi.sin_cos();
        for (v, row) in va.iter_mut().zip(mu.supports().rows()) {
            *v = c * row[0] + s * row[1];
        }
        for (v, row) in vb.iter_mut().zip(nu.supports().rows()) {
            *v = c * row[0] + s * row[1];
        }
        let wpp = wpp_general(&va, mu.weights(), &vb, nu.weights(), p);
        let w = pth_root(wpp, p);
        if w > best.0 {
            best = (w, phi);
        }
    }
    Ok(best)
}

/// One benchmark request: a method plus its projection counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchConfig {
    Sw { l: u64 },
    Hsw { k: u64, l: u64, h: u64 },
}

/// Measured timing paired with the modeled cost.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub report: CostReport,
    pub median_seconds: f64,
}

impl BenchRow {
    pub fn csv_header() -> &'static str {
        "method,d,n,L,k,H,compute_units,projection_units,median_seconds"
    }

    pub fn to_csv_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{:.6e}",
            r.method.name(),
            r.d,
            r.n,
            r.l,
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.h.map(|h| h.to_string()).unwrap_or_default(),
            r.compute_units,
            r.projection_units,
            self.median_seconds
        )
    }
}

/// Supports drawn i.i.d. standard normal; cheap synthetic data for the
/// benchmark harness.
pub fn standard_gaussian_measure(n: usize, d: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = from_seed(seed);
    let supports = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
    DiscreteMeasure::uniform(supports).expect("finite gaussian supports")
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Times the full estimator (direction sampling included) on synthetic
/// Gaussian measures. One warmup run per config is excluded; the reported
/// time is the median over `repeats`. Configs are timed in an
/// interleaved round-robin so ambient load biases them equally.
pub fn bench(
    configs: &[BenchConfig],
    d: usize,
    n: usize,
    repeats: usize,
    p: f64,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::invalid("repeats must be ≥ 1"));
    }
    let mu = standard_gaussian_measure(n, d, seed);
    let nu = standard_gaussian_measure(n, d, seed ^ 0x5bf0_3635);

    let run = |cfg: &BenchConfig, est_seed: u64| -> Result<f64> {
        let started = Instant::now();
        match *cfg {
            BenchConfig::Sw { l } => {
                sw(&mu, &nu, &EstimatorConfig::sw(p, l as usize, est_seed))?;
            }
            BenchConfig::Hsw { k, l, h } => {
                hsw(
                    &mu,
                    &nu,
                    &EstimatorConfig::hsw(p, k as usize, l as usize, est_seed)
                        .with_heads(h as usize),
                )?;
            }
        }
        Ok(started.elapsed().as_secs_f64())
    };

    // Warmup, excluded from the medians.
    for cfg in configs {
        run(cfg, seed)?;
    }
    let mut times: Vec<Vec<f64>> = vec![Vec::with_capacity(repeats); configs.len()];
    for rep in 0..repeats {
        for (ci, cfg) in configs.iter().enumerate() {
            times[ci].push(run(cfg, seed.wrapping_add(rep as u64 + 1))?);
        }
    }

    configs
        .iter()
        .zip(times)
        .map(|(cfg, ts)| {
            let report = match *cfg {
                BenchConfig::Sw { l } => {
                    cost_model(CostMethod::Sw, d as u64, n as u64, l, None, None)?
                }
                BenchConfig::Hsw { k, l, h } => {
                    cost_model(CostMethod::Hsw, d as u64, n as u64, l, Some(k), Some(h))?
                }
            };
            Ok(BenchRow {
                report,
                median_seconds: median(ts),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::array;
    use rand::Rng;

    fn random_measure(n: usize, d: usize, seed: u64) -> DiscreteMeasure {
        let mut r = rng::from_seed(seed);
        let supports = Array2::from_shape_fn((n, d), |_| r.gen_range(-2.0..2.0));
        DiscreteMeasure::uniform(supports).unwrap()
    }

    #[test]
    fn cost_model_table_rows_from_the_formulas() {
        let sw100 = cost_model(CostMethod::Sw, 8192, 128, 100, None, None).unwrap();
        assert_eq!(sw100.compute_units, 104_947_200);
        assert_eq!(sw100.projection_units, 819_200);
        let hsw = cost_model(CostMethod::Hsw, 8192, 128, 2000, Some(70), Some(1)).unwrap();
        assert_eq!(hsw.compute_units, 93_112_320);
        assert_eq!(hsw.projection_units, 713_440);
        let unit = cost_model(CostMethod::Hsw, 1, 2, 1, Some(1), Some(1)).unwrap();
        assert_eq!(unit.compute_units, 6);
        assert_eq!(unit.projection_units, 2);
    }

    #[test]
    fn exact_identity_and_point_pair() {
        let m = random_measure(6, 3, 1);
        assert!(exact_wasserstein(&m, &m, 2.0).unwrap() < 1e-12);
        let a = DiscreteMeasure::uniform(array![[0.0, 0.0]]).unwrap();
        let b = DiscreteMeasure::uniform(array![[3.0, 4.0]]).unwrap();
        for &p in &[1.0, 2.0, 3.0] {
            assert!((exact_wasserstein(&a, &b, p).unwrap() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_two_point_swap() {
        let a = DiscreteMeasure::uniform(array![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let b = DiscreteMeasure::uniform(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        // Both matchings cost (1 + 1)/2 = 1.
        assert!((exact_wasserstein(&a, &b, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut r = rng::from_seed(17);
        for _ in 0..20 {
            let n = r.gen_range(2..6usize);
            let cost = Array2::from_shape_fn((n, n), |_| r.gen_range(0.0..10.0f64));
            let assignment = hungarian_min(&cost);
            let got: f64 = assignment
                .iter()
                .enumerate()
                .map(|(i, &j)| cost[[i, j]])
                .sum();
            let best = brute_force_assignment(&cost);
            assert!((got - best).abs() < 1e-9, "{got} vs {best}");
        }
    }

    fn brute_force_assignment(cost: &Array2<f64>) -> f64 {
        fn rec(cost: &Array2<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
            let n = cost.nrows();
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[[row, j]] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.ncols()])
    }

    #[test]
    fn simplex_agrees_with_hungarian_on_uniform_instances() {
        for seed in 0..10u64 {
            let a = random_measure(7, 3, 100 + seed);
            let b = random_measure(7, 3, 200 + seed);
            let via_assignment = exact_wasserstein(&a, &b, 2.0).unwrap();
            let cost = cost_matrix(&a, &b, 2.0);
            let via_simplex = transport_simplex(a.weights(), b.weights(), &cost)
                .unwrap()
                .sqrt();
            assert!(
                (via_assignment - via_simplex).abs() < 1e-9,
                "{via_assignment} vs {via_simplex}"
            );
        }
    }

    #[test]
    fn exact_equals_w1d_in_one_dimension() {
        use crate::transforms::Projected1D;
        use crate::wasserstein1d::w1d;
        let mut r = rng::from_seed(33);
        for _ in 0..10 {
            let n = r.gen_range(2..8usize);
            let m = r.gen_range(2..8usize);
            let av: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
            let bv: Vec<f64> = (0..m).map(|_| r.gen_range(-3.0..3.0)).collect();
            let mut aw: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..1.0)).collect();
            let mut bw: Vec<f64> = (0..m).map(|_| r.gen_range(0.1..1.0)).collect();
            let asum: f64 = aw.iter().sum();
            let bsum: f64 = bw.iter().sum();
            aw.iter_mut().for_each(|w| *w /= asum);
            bw.iter_mut().for_each(|w| *w /= bsum);
            let ma = DiscreteMeasure::new(
                Array2::from_shape_vec((n, 1), av.clone()).unwrap(),
                aw.clone(),
            )
            .unwrap();
            let mb = DiscreteMeasure::new(
                Array2::from_shape_vec((m, 1), bv.clone()).unwrap(),
                bw.clone(),
            )
            .unwrap();
            let lp = exact_wasserstein(&ma, &mb, 2.0).unwrap();
            let qf = w1d(
                &Projected1D::new(av, aw).unwrap(),
                &Projected1D::new(bv, bw).unwrap(),
                2.0,
            )
            .unwrap();
            assert!((lp - qf).abs() < 1e-9, "{lp} vs {qf}");
        }
    }

    #[test]
    fn general_weights_half_mass_move() {
        let a = DiscreteMeasure::new(array![[0.0], [1.0]], vec![0.5, 0.5]).unwrap();
        let b = DiscreteMeasure::new(array![[0.0]], vec![1.0]).unwrap();
        assert!((exact_wasserstein(&a, &b, 1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_rejects_oversized_instances() {
        let a = random_measure(1001, 1, 1);
        let b = random_measure(1001, 1, 2);
        assert!(matches!(
            exact_wasserstein(&a, &b, 2.0),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn grid_oracle_identity_and_point_pair() {
        let m = random_measure(5, 2, 3);
        let (v, _) = maxsw_grid_2d(&m, &m, 2.0, 64).unwrap();
        assert_eq!(v, 0.0);
        let a = DiscreteMeasure::uniform(array![[0.0, 0.0]]).unwrap();
        let b = DiscreteMeasure::uniform(array![[1.0, 0.0]]).unwrap();
        let (v, phi) = maxsw_grid_2d(&a, &b, 2.0, 4096).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
        assert!(phi < 1e-3 || (std::f64::consts::PI - phi) < 1e-3);
    }

    #[test]
    fn grid_oracle_rejects_bad_inputs() {
        let m = random_measure(5, 3, 4);
        assert!(maxsw_grid_2d(&m, &m, 2.0, 64).is_err());
        let m2 = random_measure(5, 2, 5);
        assert!(maxsw_grid_2d(&m2, &m2, 2.0, 8).is_err());
    }

    #[test]
    fn grid_oracle_sandwiched_by_ascent_and_exact() {
        use crate::sliced::{max_sw, MaxConfig};
        for seed in 0..5u64 {
            let a = random_measure(8, 2, 300 + seed);
            let b = random_measure(8, 2, 400 + seed);
            let (grid, _) = maxsw_grid_2d(&a, &b, 2.0, 4096).unwrap();
            let cfg = MaxConfig {
                eta: 0.1,
                iterations: 200,
                tolerance: 1e-12,
                restarts: 3,
                seed,
            };
            let ascent = max_sw(&a, &b, 2.0, &cfg).unwrap().value;
            let exact = exact_wasserstein(&a, &b, 2.0).unwrap();
            assert!(grid >= ascent - 1e-3, "grid {grid} < ascent {ascent}");
            assert!(grid <= exact + 1e-9, "grid {grid} > exact {exact}");
        }
    }

    #[test]
    fn bench_cost_reports_are_deterministic() {
        let configs = [
            BenchConfig::Sw { l: 4 },
            BenchConfig::Hsw { k: 2, l: 8, h: 1 },
        ];
        let a = bench(&configs, 16, 8, 2, 2.0, 9).unwrap();
        let b = bench(&configs, 16, 8, 2, 2.0, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.report, y.report);
        }
        assert!(a[0].median_seconds > 0.0);
        let row = a[1].to_csv_row();
        assert!(row.starts_with("hsw,16,8,8,2,1,"), "{row}");
    }
}
