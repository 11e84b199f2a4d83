use std::time::Instant;

use log::{info, warn};
use polyagg::aggregation::{aggregate_with, AggregateOptions};
use polyagg::dispatch::{solve_dispatch, DispatchCase};
use polyagg::loads::{
    build_population, generate_storage_population, generate_tcl_population, LoadModel, LoadSpec,
};
use polyagg::volume::{exact_volume, mc_volume, VolumeRecord, DEFAULT_SAMPLES};
use polyagg::{HPolytope, PolytopeFile};

use crate::bench::{
    run_storage_bench, run_tcl_bench, StorageBenchConfig, TclBenchConfig, SCHEMA_VERSION,
};
use crate::error::CliError;
use crate::files::{
    check_schema, read_json, read_population, sibling, to_csv, to_json, write_output,
    AggregateMeta, PopulationFile,
};
use crate::{
    AggregateArgs, BenchStorageArgs, BenchTclArgs, DispatchArgs, GenerateArgs, GenerateKind,
    GlobalOpts, Method, VolumeArgs,
};

pub const STORAGE_HEADER: [&str; 8] = [
    "D",
    "pair_id",
    "v_exact",
    "v_om",
    "v_om_mc",
    "ci_mc",
    "ratio",
    "percent_error",
];
pub const TCL_HEADER: [&str; 9] = [
    "slots",
    "heterogeneity",
    "loads",
    "regenerated",
    "unique_rows",
    "v_om",
    "ci",
    "v_exact",
    "ratio",
];
pub const VOLUME_HEADER: [&str; 8] = [
    "case_id", "D", "method", "volume", "ci", "samples", "seed", "wall_ms",
];

pub fn aggregate(g: &GlobalOpts, args: &AggregateArgs) -> Result<(), CliError> {
    let specs = read_population(&args.input)?;
    let start = Instant::now();
    let polys = build_population::<f64>(&specs)?;
    let agg = aggregate_with(
        &polys,
        AggregateOptions {
            remove_redundancy: args.remove_redundancy,
        },
    )?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let meta = AggregateMeta {
        schema_version: SCHEMA_VERSION,
        loads: polys.len(),
        dimension: agg.polytope.dimension(),
        unique_rows: agg.unique_rows,
        lp_count: agg.lp_count,
        wall_ms,
    };
    info!(
        "aggregated {} loads: {} unique rows, {} LPs, {:.1} ms",
        meta.loads, meta.unique_rows, meta.lp_count, wall_ms
    );
    write_output(
        g.output.as_deref(),
        &to_json(&PolytopeFile::from_polytope(&agg.polytope)),
    )?;
    let meta_path = args
        .meta
        .clone()
        .or_else(|| g.output.as_deref().map(|p| sibling(p, "meta.json")));
    if let Some(p) = meta_path {
        write_output(Some(&p), &to_json(&meta))?;
    }
    Ok(())
}

pub fn volume(g: &GlobalOpts, args: &VolumeArgs) -> Result<(), CliError> {
    let file: PolytopeFile = read_json(&args.input)?;
    let p: HPolytope<f64> = file.to_polytope()?;
    let seed = g.seed.unwrap_or(0);
    let samples = g.samples.unwrap_or(DEFAULT_SAMPLES);
    let start = Instant::now();
    let record = match args.method {
        Method::Exact => {
            let v = exact_volume(&p)?;
            if v.lower_dimensional {
                warn!("polytope is lower dimensional; volume reported as 0");
            }
            VolumeRecord {
                case_id: args.case_id.clone(),
                d: p.dimension(),
                method: "exact".into(),
                volume: v.volume,
                ci: 0.0,
                samples: 0,
                seed,
                wall_ms: None,
            }
        }
        Method::Mc => {
            let v = mc_volume(&p, samples, seed)?;
            VolumeRecord {
                case_id: args.case_id.clone(),
                d: p.dimension(),
                method: if v.closed_form {
                    "box".into()
                } else {
                    "mc".into()
                },
                volume: v.volume,
                ci: v.ci_halfwidth_95,
                samples: v.samples,
                seed,
                wall_ms: None,
            }
        }
    };
    let record = VolumeRecord {
        wall_ms: g.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
        ..record
    };
    write_output(g.output.as_deref(), &to_csv(&VOLUME_HEADER, &[record])?)
}

pub fn bench_storage(g: &GlobalOpts, args: &BenchStorageArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg: StorageBenchConfig = read_json(path)?;
            check_schema(path, cfg.schema_version)?;
            cfg
        }
        None => StorageBenchConfig::default(),
    };
    if let Some(p) = args.pairs {
        cfg.pairs = p;
    }
    if let Some(d) = &args.oracle_dims {
        cfg.oracle_dims = d.clone();
    }
    if let Some(d) = &args.mc_dims {
        cfg.mc_dims = d.clone();
    }
    if let Some(s) = g.samples {
        cfg.samples = s;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if cfg
        .oracle_dims
        .iter()
        .any(|&d| d == 0 || d > polyagg::polytope::ORACLE_MAX_DIM)
    {
        return Err(CliError::Model(polyagg::Error::OracleScale(format!(
            "oracle dimensions must lie in 1..={}",
            polyagg::polytope::ORACLE_MAX_DIM
        ))));
    }
    if cfg.mc_dims.contains(&0) {
        return Err(CliError::Config("dimensions must be at least 1".into()));
    }
    let report = run_storage_bench(&cfg);
    write_output(g.output.as_deref(), &to_csv(&STORAGE_HEADER, &report.rows)?)?;
    if let Some(fit) = &report.growth_fit {
        info!(
            "ln V_OM ~ {:.4} D + {:.4} (R^2 = {:.5})",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
    if let Some(path) = &args.summary {
        write_output(Some(path), &to_json(&report.summaries))?;
        write_output(Some(&sibling(path, "dat")), &gnuplot_table(&report))?;
    }
    Ok(())
}

/// Whitespace-separated per-dimension table for plotting; `NaN` marks gaps.
fn gnuplot_table(report: &crate::bench::StorageBenchReport) -> String {
    let mut out = String::from("# D mean_percent_error p90_percent_error mean_log_v_om discards\n");
    let f = |v: Option<f64>| v.map_or("NaN".to_string(), |x| x.to_string());
    for s in &report.summaries {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            s.d,
            f(s.mean_percent_error),
            f(s.p90_percent_error),
            f(s.mean_log_v_om),
            s.discards
        ));
    }
    out
}

pub fn bench_tcl(g: &GlobalOpts, args: &BenchTclArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg: TclBenchConfig = read_json(path)?;
            check_schema(path, cfg.schema_version)?;
            cfg
        }
        None => TclBenchConfig::default(),
    };
    if let Some(n) = args.loads {
        cfg.loads = n;
    }
    if let Some(s) = &args.slots {
        cfg.slots = s.clone();
    }
    if let Some(s) = g.samples {
        cfg.samples = s;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if cfg.loads == 0 || cfg.slots.contains(&0) {
        return Err(CliError::Config(
            "population size and slot counts must be at least 1".into(),
        ));
    }
    let rows = run_tcl_bench(&cfg)?;
    write_output(g.output.as_deref(), &to_csv(&TCL_HEADER, &rows)?)
}

pub fn dispatch(g: &GlobalOpts, args: &DispatchArgs) -> Result<(), CliError> {
    let case: DispatchCase = read_json(&args.input)?;
    let result = solve_dispatch(&case)?;
    info!("dispatch objective {}", result.objective);
    write_output(g.output.as_deref(), &to_json(&result))?;
    if let Some(path) = &args.csv {
        write_output(Some(path), &result.to_csv())?;
    }
    Ok(())
}

pub fn generate(g: &GlobalOpts, args: &GenerateArgs) -> Result<(), CliError> {
    if args.periods == 0 {
        return Err(CliError::Config("periods must be at least 1".into()));
    }
    let seed = g.seed.unwrap_or(0);
    let loads: Vec<LoadSpec> = match args.kind {
        GenerateKind::Tcl => {
            generate_tcl_population(args.count, args.heterogeneity.into(), args.periods, seed)
                .into_iter()
                .map(|p| LoadSpec::new(LoadModel::Tcl(p)))
                .collect()
        }
        GenerateKind::Storage => generate_storage_population(args.count, args.periods, seed)
            .into_iter()
            .map(|p| LoadSpec::new(LoadModel::Storage(p)))
            .collect(),
    };
    let file = PopulationFile {
        schema_version: SCHEMA_VERSION,
        loads,
    };
    write_output(g.output.as_deref(), &to_json(&file))
}
