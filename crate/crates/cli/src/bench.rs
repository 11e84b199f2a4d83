//! Benchmark scenarios: random storage pairs against the exact oracle, and
//! TCL populations across discretization choices.

use log::{info, warn};
use polyagg::aggregation::{
    aggregate_general, aggregate_with, exact_minkowski_oracle, outer_with_rows, AggregateOptions,
};
use polyagg::hull::convex_hull;
use polyagg::linalg::Matrix;
use polyagg::loads::{
    build_storage_net, build_tcl, decay_matrix, generate_storage_population, generate_tcl_physical,
    Heterogeneity, TclParams,
};
use polyagg::volume::{exact_volume, mc_volume, DEFAULT_SAMPLES};
use polyagg::{Error, HPolytope};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Deterministic per-case seed.
pub fn case_seed(base: u64, dim: usize, case: usize) -> u64 {
    let mut z = base ^ ((dim as u64) << 40) ^ case as u64;
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StorageBenchConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub pairs: usize,
    /// Dimensions compared against the exact oracle.
    pub oracle_dims: Vec<usize>,
    /// Dimensions for which only the Monte-Carlo OM volume is computed.
    pub mc_dims: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    /// Drop redundant rows of each load before aggregating.
    pub remove_redundancy: bool,
}

impl Default for StorageBenchConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            pairs: 50,
            oracle_dims: vec![2, 3, 4],
            mc_dims: (5..=20).collect(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            remove_redundancy: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageRow {
    #[serde(rename = "D")]
    pub d: usize,
    pub pair_id: usize,
    pub v_exact: Option<f64>,
    pub v_om: Option<f64>,
    pub v_om_mc: Option<f64>,
    pub ci_mc: Option<f64>,
    pub ratio: Option<f64>,
    pub percent_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimSummary {
    #[serde(rename = "D")]
    pub d: usize,
    pub cases: usize,
    pub discards: usize,
    pub mean_percent_error: Option<f64>,
    pub p50_percent_error: Option<f64>,
    pub p90_percent_error: Option<f64>,
    pub max_percent_error: Option<f64>,
    /// Mean of `ln V_OM` over the pairs with a positive Monte-Carlo volume.
    pub mean_log_v_om: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageBenchReport {
    pub rows: Vec<StorageRow>,
    pub summaries: Vec<DimSummary>,
    /// Fit of mean `ln V_OM` against `D`.
    pub growth_fit: Option<LogLinearFit>,
}

/// Least-squares line through `(x, y)` with its coefficient of determination.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LogLinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogLinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// The two storage loads of one benchmark case.
pub fn storage_pair(
    d: usize,
    pair: usize,
    seed: u64,
) -> polyagg::Result<(HPolytope<f64>, HPolytope<f64>)> {
    let params = generate_storage_population(2, d, case_seed(seed, d, pair));
    Ok((
        build_storage_net(&params[0])?,
        build_storage_net(&params[1])?,
    ))
}

fn storage_case(
    d: usize,
    pair: usize,
    cfg: &StorageBenchConfig,
    with_oracle: bool,
) -> polyagg::Result<StorageRow> {
    let (p1, p2) = storage_pair(d, pair, cfg.seed)?;
    let opts = AggregateOptions {
        remove_redundancy: cfg.remove_redundancy,
    };
    let om = aggregate_with(&[p1.clone(), p2.clone()], opts)?.polytope;
    let mut row = StorageRow {
        d,
        pair_id: pair,
        v_exact: None,
        v_om: None,
        v_om_mc: None,
        ci_mc: None,
        ratio: None,
        percent_error: None,
    };
    if cfg.samples > 0 {
        let mc = mc_volume(&om, cfg.samples, case_seed(cfg.seed ^ 0x5A5A, d, pair))?;
        row.v_om_mc = Some(mc.volume);
        row.ci_mc = Some(mc.ci_halfwidth_95);
    }
    if with_oracle {
        let oracle = exact_minkowski_oracle(&p1, &p2)?;
        let v_exact = convex_hull(oracle.vertices())?.volume();
        let v_om = exact_volume(&om)?.volume;
        if v_exact <= 0.0 {
            return Err(Error::LowerDimensional);
        }
        let ratio = v_om / v_exact;
        row.v_exact = Some(v_exact);
        row.v_om = Some(v_om);
        row.ratio = Some(ratio);
        row.percent_error = Some((ratio - 1.0) * 100.0);
    }
    Ok(row)
}

fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    Some(sorted[idx])
}

pub fn run_storage_bench(cfg: &StorageBenchConfig) -> StorageBenchReport {
    let mut dims: Vec<(usize, bool)> = cfg.oracle_dims.iter().map(|&d| (d, true)).collect();
    dims.extend(
        cfg.mc_dims
            .iter()
            .filter(|d| !cfg.oracle_dims.contains(d))
            .map(|&d| (d, false)),
    );
    dims.sort();

    let cases: Vec<(usize, bool, usize)> = dims
        .iter()
        .flat_map(|&(d, oracle)| (0..cfg.pairs).map(move |p| (d, oracle, p)))
        .collect();
    let results: Vec<polyagg::Result<StorageRow>> = cases
        .par_iter()
        .map(|&(d, oracle, p)| storage_case(d, p, cfg, oracle))
        .collect();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &(d, _) in &dims {
        let mut discards = 0;
        let mut errors = Vec::new();
        let mut logs = Vec::new();
        for ((cd, _, p), r) in cases.iter().zip(&results) {
            if *cd != d {
                continue;
            }
            match r {
                Ok(row) => {
                    errors.extend(row.percent_error);
                    logs.extend(row.v_om_mc.filter(|v| *v > 0.0).map(f64::ln));
                    rows.push(row.clone());
                }
                Err(e) => {
                    warn!("D = {d}, pair {p}: discarded ({e})");
                    discards += 1;
                }
            }
        }
        let mut sorted = errors.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        summaries.push(DimSummary {
            d,
            cases: cfg.pairs - discards,
            discards,
            mean_percent_error: mean(&errors),
            p50_percent_error: percentile(&sorted, 0.5),
            p90_percent_error: percentile(&sorted, 0.9),
            max_percent_error: sorted.last().copied(),
            mean_log_v_om: mean(&logs),
        });
        info!(
            "storage bench D = {d}: {} cases, {discards} discarded",
            cfg.pairs - discards
        );
    }
    let growth: Vec<(f64, f64)> = summaries
        .iter()
        .filter_map(|s| s.mean_log_v_om.map(|l| (s.d as f64, l)))
        .collect();
    StorageBenchReport {
        rows,
        growth_fit: linear_fit(&growth),
        summaries,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TclBenchConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub loads: usize,
    pub slots: Vec<usize>,
    pub heterogeneity: Vec<Heterogeneity>,
    pub ambient: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for TclBenchConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            loads: 100,
            slots: vec![1, 2, 3, 4],
            heterogeneity: vec![Heterogeneity::Low, Heterogeneity::High],
            ambient: polyagg::loads::DEFAULT_AMBIENT,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TclRow {
    pub slots: usize,
    pub heterogeneity: Heterogeneity,
    pub loads: usize,
    pub regenerated: usize,
    pub unique_rows: usize,
    pub v_om: f64,
    pub ci: f64,
    pub v_exact: Option<f64>,
    pub ratio: Option<f64>,
}

/// A feasible TCL population. Loads whose deadband cannot be held are
/// redrawn from a derived seed; the second value counts redraws.
pub fn tcl_population(
    count: usize,
    heterogeneity: Heterogeneity,
    slots: usize,
    ambient: f64,
    seed: u64,
) -> polyagg::Result<(Vec<TclParams>, Vec<HPolytope<f64>>, usize)> {
    const MAX_REDRAWS: usize = 1000;
    let amb = vec![ambient; slots];
    let mut params = Vec::with_capacity(count);
    let mut polys = Vec::with_capacity(count);
    let mut redraws = 0;
    for (k, phys) in generate_tcl_physical(count, heterogeneity, seed)
        .into_iter()
        .enumerate()
    {
        let mut candidate = phys;
        loop {
            let p = candidate.discretize(slots, &amb)?;
            match build_tcl::<f64>(&p, slots) {
                Ok(poly) => {
                    params.push(p);
                    polys.push(poly);
                    break;
                }
                Err(Error::EmptyPolytope) if redraws < MAX_REDRAWS => {
                    redraws += 1;
                    candidate =
                        generate_tcl_physical(1, heterogeneity, case_seed(seed, k, redraws))
                            .remove(0);
                }
                Err(e) => return Err(Error::for_load(k, e)),
            }
        }
    }
    if redraws > 0 {
        info!("redrew {redraws} TCLs with unreachable deadbands");
    }
    Ok((params, polys, redraws))
}

/// Rows of a TCL polytope whose dissipation is `a`: `±I` and `±Γ(1 - a)`.
pub fn tcl_rows(a: f64, d: usize) -> Matrix<f64> {
    let gamma = decay_matrix(&(1.0 - a), d);
    let mut m = Matrix::zeros(0, 0);
    for sign in [1.0, -1.0] {
        for i in 0..d {
            let mut r = vec![0.0; d];
            r[i] = sign;
            m.push_row(&r);
        }
    }
    for sign in [1.0, -1.0] {
        for g in &gamma {
            let r: Vec<f64> = g.iter().map(|v| sign * v).collect();
            m.push_row(&r);
        }
    }
    m
}

/// Replaces every load by its outer approximation over the rows of a TCL
/// with the population-mean dissipation.
pub fn homogenize(
    params: &[TclParams],
    polys: &[HPolytope<f64>],
) -> polyagg::Result<Vec<HPolytope<f64>>> {
    let d = polys.first().map_or(0, HPolytope::dimension);
    let mean_a = params.iter().map(|p| p.a).sum::<f64>() / params.len() as f64;
    let rows = tcl_rows(mean_a, d);
    polys
        .par_iter()
        .enumerate()
        .map(|(k, p)| outer_with_rows(p, &rows).map_err(|e| Error::for_load(k, e)))
        .collect()
}

/// Largest population for which the exact oracle is attempted.
pub const TCL_ORACLE_MAX_LOADS: usize = 2;

pub fn tcl_case(cfg: &TclBenchConfig, slots: usize, het: Heterogeneity) -> polyagg::Result<TclRow> {
    let seed = case_seed(cfg.seed, slots, 0);
    let (params, polys, regenerated) = tcl_population(cfg.loads, het, slots, cfg.ambient, seed)?;
    let homogeneous = homogenize(&params, &polys)?;
    let om = aggregate_general(&homogeneous)?;
    let mc = mc_volume(
        &om,
        cfg.samples.max(1),
        case_seed(cfg.seed ^ 0xA5A5, slots, 1),
    )?;
    let v_exact = if cfg.loads <= TCL_ORACLE_MAX_LOADS && slots <= 4 {
        let sum = polyagg::aggregation::exact_minkowski_sum(&polys)?;
        Some(if sum.affine_dimension() < slots {
            0.0
        } else {
            convex_hull(sum.vertices())?.volume()
        })
    } else {
        None
    };
    Ok(TclRow {
        slots,
        heterogeneity: het,
        loads: cfg.loads,
        regenerated,
        unique_rows: om.num_rows(),
        v_om: mc.volume,
        ci: mc.ci_halfwidth_95,
        ratio: v_exact.filter(|v| *v > 0.0).map(|v| mc.volume / v),
        v_exact,
    })
}

pub fn run_tcl_bench(cfg: &TclBenchConfig) -> polyagg::Result<Vec<TclRow>> {
    let cases: Vec<(usize, Heterogeneity)> = cfg
        .slots
        .iter()
        .flat_map(|&s| cfg.heterogeneity.iter().map(move |&h| (s, h)))
        .collect();
    cases
        .par_iter()
        .map(|&(s, h)| tcl_case(cfg, s, h))
        .collect()
}
