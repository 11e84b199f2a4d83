//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use polyagg::dispatch::{solve_dispatch, AggregateSite, Bus, Cost, DispatchCase, Generator};
use polyagg::loads::{
    build_deferrable, build_hypercube, random_load, DeferrableParams, Family, Heterogeneity,
    HypercubeParams,
};
use polyagg::volume::{exact_volume, mc_volume};
use polyagg::{
    aggregate_general, align, exact_minkowski_oracle, HPolytope, PolytopeFile, VPolytope,
};
use polyagg_cli::bench::{run_storage_bench, tcl_case, StorageBenchConfig, TclBenchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn triangles() -> (HPolytope<f64>, HPolytope<f64>) {
    let rows = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
    (
        HPolytope::from_f64_rows(&rows, &[-1.0, -1.0, 3.0]).unwrap(),
        HPolytope::from_f64_rows(&rows, &[-2.0, -1.0, 5.0]).unwrap(),
    )
}

fn worked_example() -> Outcome {
    let (p1, p2) = triangles();
    let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
    let rows = [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]];
    let b4 = [-3.0, -2.0, 8.0];
    let mut gap: f64 = 0.0;
    if om.num_rows() != 3 {
        return outcome(false, format!("{} rows, expected 3", om.num_rows()));
    }
    for (r, b) in rows.iter().zip(b4) {
        let n = norm(r);
        let unit: Vec<f64> = r.iter().map(|v| v / n).collect();
        let Some(i) = (0..om.num_rows()).find(|&i| {
            om.row(i)
                .iter()
                .zip(&unit)
                .all(|(x, y)| (x - y).abs() < 1e-9)
        }) else {
            return outcome(false, format!("row {r:?} missing"));
        };
        gap = gap.max((om.offset(i) - b / n).abs());
    }
    let expected =
        VPolytope::from_points(vec![vec![3.0, 2.0], vec![6.0, 2.0], vec![3.0, 5.0]]).unwrap();
    let oracle = exact_minkowski_oracle(&p1, &p2).unwrap();
    let om_vertices = om.enumerate_vertices().unwrap();
    let same =
        oracle.same_vertices(&expected, &1e-9) && om_vertices.same_vertices(&expected, &1e-9);
    outcome(
        gap <= 1e-9 && same,
        format!("max offset gap {gap:.1e}, vertex sets match: {same}"),
    )
}

fn containment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    let families = Family::ALL;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for case in 0..200 {
        let d = 2 + case % 3;
        let f1 = families[case % 4];
        let f2 = families[(case / 4) % 4];
        let p1: HPolytope<f64> = random_load(f1, d, &mut rng).build().unwrap();
        let p2: HPolytope<f64> = random_load(f2, d, &mut rng).build().unwrap();
        let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
        let v1 = p1.enumerate_vertices().unwrap();
        let v2 = p2.enumerate_vertices().unwrap();
        for _ in 0..10_000 {
            let z = add(&v1.random_member(&mut rng), &v2.random_member(&mut rng));
            worst = worst.max(om.max_violation(&z));
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-8,
        format!("{checked} member sums, worst violation {worst:.1e}"),
    )
}

fn hypercube_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCBE);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let d = 2 + case % 9;
        let mut cube = || {
            let lo: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.1..5.0)).collect();
            HypercubeParams {
                p_low: lo,
                p_high: hi,
            }
        };
        let (c1, c2) = (cube(), cube());
        let exact = build_hypercube::<f64>(&HypercubeParams {
            p_low: add(&c1.p_low, &c2.p_low),
            p_high: add(&c1.p_high, &c2.p_high),
        })
        .unwrap();
        let om = aggregate_general(&[build_hypercube(&c1).unwrap(), build_hypercube(&c2).unwrap()])
            .unwrap();
        worst = worst.max(om.set_distance(&exact).unwrap());
    }
    outcome(
        worst <= 1e-8,
        format!("100 pairs, max offset gap {worst:.1e}"),
    )
}

fn deferrable_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDEF);
    let mut failures = 0;
    for case in 0..100 {
        let d = 2 + case % 5;
        let t_arrive = rng.random_range(1..d);
        let t_depart = rng.random_range(t_arrive + 1..=d + 1);
        let mut load = || {
            let energy = rng.random_range(0.5..10.0);
            // The cap never binds, as the exactness result assumes.
            let cap = energy * rng.random_range(1.0..2.0);
            DeferrableParams {
                p_max: vec![cap; d],
                energy,
                t_arrive,
                t_depart,
            }
        };
        let (l1, l2) = (load(), load());
        let p1 = build_deferrable::<f64>(&l1).unwrap();
        let p2 = build_deferrable::<f64>(&l2).unwrap();
        let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
        let oracle = exact_minkowski_oracle(&p1, &p2).unwrap();
        if !om
            .enumerate_vertices()
            .unwrap()
            .same_vertices(&oracle, &1e-7)
        {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("100 pairs, {failures} vertex-set mismatches"),
    )
}

fn row_count_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x20C);
    let mut failures = 0;
    for case in 0..100 {
        let d = 2 + case % 4;
        let unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = norm(&v);
            v.into_iter().map(|x| x / n).collect()
        };
        let shared = rng.random_range(0..4);
        let own1 = rng.random_range(0..4);
        let own2 = rng.random_range(0..4);
        let extra: Vec<Vec<f64>> = (0..shared + own1 + own2).map(|_| unit(&mut rng)).collect();
        let lo = vec![-1.0; d];
        let hi = vec![1.0; d];
        let build = |rows: &[Vec<f64>]| {
            let mut p = HPolytope::from_box(&lo, &hi).unwrap();
            for r in rows {
                p = p.with_row(r, 0.5).unwrap();
            }
            p
        };
        let p1 = build(&extra[..shared + own1]);
        let mut rows2 = extra[..shared].to_vec();
        rows2.extend_from_slice(&extra[shared + own1..]);
        let p2 = build(&rows2);
        let (m1, m2, c) = (p1.num_rows(), p2.num_rows(), 2 * d + shared);
        let family = align(&[p1.clone(), p2.clone()]).unwrap();
        let om = aggregate_general(&[p1, p2]).unwrap();
        if om.num_rows() != m1 + m2 - c || family.lp_count() != own1 + own2 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("100 cases, {failures} violations of m1 + m2 - c"),
    )
}

fn storage_error() -> Outcome {
    let cfg = StorageBenchConfig {
        pairs: 50,
        oracle_dims: vec![2, 3, 4],
        mc_dims: vec![2, 3, 4],
        samples: 1_000_000,
        ..StorageBenchConfig::default()
    };
    let report = run_storage_bench(&cfg);
    let mut detail = Vec::new();
    let mut pass = true;
    for s in &report.summaries {
        let mean = s.mean_percent_error.unwrap_or(f64::NAN);
        pass &= s.cases == 50 && mean <= 1.0;
        detail.push(format!("D={} mean {mean:.3}%", s.d));
    }
    // Directionally outer: the sampled OM volume never falls below the exact
    // volume by more than three half-widths.
    let mut below = 0;
    for r in &report.rows {
        if let (Some(exact), Some(mc), Some(ci)) = (r.v_exact, r.v_om_mc, r.ci_mc) {
            if mc - exact < -3.0 * ci {
                below += 1;
            }
        }
    }
    pass &= below == 0;
    detail.push(format!("{below} cases below -3 CI"));
    outcome(pass, detail.join(", "))
}

fn volume_growth() -> Outcome {
    let cfg = StorageBenchConfig {
        pairs: 20,
        oracle_dims: vec![],
        mc_dims: (2..=12).collect(),
        samples: 200_000,
        ..StorageBenchConfig::default()
    };
    let report = run_storage_bench(&cfg);
    match report.growth_fit {
        Some(fit) => outcome(
            fit.r_squared >= 0.99,
            format!(
                "ln V = {:.3} D + {:.3}, R^2 = {:.5}",
                fit.slope, fit.intercept, fit.r_squared
            ),
        ),
        None => outcome(false, "no fit"),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn fixtures() -> Vec<(String, HPolytope<f64>, f64)> {
    let mut out = Vec::new();
    for d in 1..=4 {
        let lo: Vec<f64> = (0..d).map(|i| -(i as f64) * 0.5).collect();
        let hi: Vec<f64> = (0..d).map(|i| 1.0 + i as f64).collect();
        let v: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        out.push((format!("box{d}"), HPolytope::from_box(&lo, &hi).unwrap(), v));
    }
    for side in [1.0, 3.0] {
        let h = side / 2.0_f64.sqrt();
        let rows = vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ];
        let p = HPolytope::from_f64_rows(&rows, &[h, h, h, h]).unwrap();
        out.push((format!("diamond{side}"), p, side * side));
    }
    for d in 2..=6 {
        let len = 2.0;
        let mut rows: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut r = vec![0.0; d];
                r[i] = -1.0;
                r
            })
            .collect();
        rows.push(vec![1.0; d]);
        let mut b = vec![0.0; d];
        b.push(len);
        let p = HPolytope::from_f64_rows(&rows, &b).unwrap();
        out.push((format!("simplex{d}"), p, len.powi(d as i32) / factorial(d)));
    }
    let (p1, p2) = triangles();
    let sum = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
    out.push(("triangle_p1".into(), p1, 0.5));
    out.push(("triangle_p2".into(), p2, 2.0));
    out.push(("triangle_sum".into(), sum, 4.5));
    for d in 2..=4 {
        let rows: Vec<Vec<f64>> = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        let p = HPolytope::from_f64_rows(&rows, &vec![1.0; rows.len()]).unwrap();
        out.push((format!("cross{d}"), p, 2f64.powi(d as i32) / factorial(d)));
    }
    let hex_rows: Vec<Vec<f64>> = (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    out.push((
        "hexagon".into(),
        HPolytope::from_f64_rows(&hex_rows, &[1.0; 6]).unwrap(),
        2.0 * 3.0_f64.sqrt(),
    ));
    let shear = HPolytope::from_f64_rows(
        &[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![-1.0, 1.0],
            vec![1.0, -1.0],
        ],
        &[1.0, 0.0, 1.0, 0.0],
    )
    .unwrap();
    out.push(("parallelogram".into(), shear, 1.0));
    let cut = HPolytope::from_box(&[0.0; 3], &[1.0; 3])
        .unwrap()
        .with_row(&[1.0, 1.0, 1.0], 2.5)
        .unwrap();
    out.push(("truncated_cube".into(), cut, 1.0 - 0.125 / 6.0));
    out
}

fn volume_calibration() -> Outcome {
    let cases = fixtures();
    let mut mc_bad = Vec::new();
    let mut exact_worst: f64 = 0.0;
    for (k, (name, p, truth)) in cases.iter().enumerate() {
        let est = mc_volume(p, 1_000_000, 17 + k as u64).unwrap();
        if (est.volume - truth).abs() > 3.0 * est.ci_halfwidth_95 + 1e-12 * truth {
            mc_bad.push(name.clone());
        }
        let exact = exact_volume(p).unwrap().volume;
        exact_worst = exact_worst.max((exact - truth).abs() / truth.max(1.0));
    }
    outcome(
        cases.len() == 20 && mc_bad.is_empty() && exact_worst <= 1e-9,
        format!(
            "{} fixtures, mc outside 3 CI: {mc_bad:?}, exact worst error {exact_worst:.1e}",
            cases.len()
        ),
    )
}

fn tcl_heterogeneity() -> Outcome {
    let cfg = TclBenchConfig {
        samples: 1_000_000,
        ..TclBenchConfig::default()
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for slots in 1..=4 {
        let low = tcl_case(&cfg, slots, Heterogeneity::Low).unwrap();
        let high = tcl_case(&cfg, slots, Heterogeneity::High).unwrap();
        pass &= high.v_om >= low.v_om;
        detail.push(format!("k={slots} high/low {:.4}", high.v_om / low.v_om));
    }
    outcome(pass, detail.join(", "))
}

fn single_bus(horizon: usize, prices: Vec<f64>, polytope: &HPolytope<f64>) -> DispatchCase {
    DispatchCase {
        horizon,
        buses: vec![Bus {
            demand: vec![500.0; horizon],
            generators: vec![Generator {
                p_min: vec![0.0; horizon],
                p_max: vec![10_000.0; horizon],
                cost: Cost::Linear(prices),
            }],
        }],
        lines: vec![],
        aggregates: vec![AggregateSite {
            bus: 0,
            polytope: PolytopeFile::from_polytope(polytope),
        }],
    }
}

fn dispatch_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD15);
    let families = [Family::Storage, Family::Tcl, Family::Hypercube];
    let mut violations = 0;
    let mut cases = 0;
    while cases < 50 {
        let d = 2 + cases % 3;
        let f1 = families[cases % 3];
        let f2 = families[(cases / 3) % 3];
        let p1: HPolytope<f64> = random_load(f1, d, &mut rng).build().unwrap();
        let p2: HPolytope<f64> = random_load(f2, d, &mut rng).build().unwrap();
        let oracle = exact_minkowski_oracle(&p1, &p2).unwrap();
        if oracle.affine_dimension() < d {
            continue;
        }
        let exact = oracle.hull_to_h().unwrap();
        let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
        let v1 = p1.enumerate_vertices().unwrap();
        let v2 = p2.enumerate_vertices().unwrap();
        let z = add(&v1.random_member(&mut rng), &v2.random_member(&mut rng));
        let fixed = HPolytope::from_box(&z, &z).unwrap();
        let prices: Vec<f64> = (0..d).map(|_| rng.random_range(10.0..60.0)).collect();
        let cost = |p: &HPolytope<f64>| {
            solve_dispatch(&single_bus(d, prices.clone(), p))
                .unwrap()
                .objective
        };
        let (c_om, c_exact, c_fixed) = (cost(&om), cost(&exact), cost(&fixed));
        let scale = 1.0 + c_exact.abs();
        if c_om > c_exact + 1e-7 * scale || c_exact > c_fixed + 1e-7 * scale {
            violations += 1;
        }
        cases += 1;
    }
    outcome(
        violations == 0,
        format!("{cases} cases, {violations} ordering violations"),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_polyagg"))
        .args(args)
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

fn determinism_in(dir: &Path) -> Result<usize, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let (p1, p2) = triangles();
    let dispatch = single_bus(2, vec![20.0, 30.0], &aggregate_general(&[p1, p2]).unwrap());
    std::fs::write(p("case.json"), serde_json::to_string(&dispatch).unwrap())
        .map_err(|e| e.to_string())?;

    let runs: Vec<(Vec<String>, Vec<&str>)> = vec![
        (
            vec![
                "generate".into(),
                "storage".into(),
                "--count".into(),
                "5".into(),
                "--periods".into(),
                "3".into(),
            ],
            vec!["out"],
        ),
        (
            vec![
                "generate".into(),
                "tcl".into(),
                "--count".into(),
                "5".into(),
                "--periods".into(),
                "2".into(),
            ],
            vec!["out"],
        ),
        (vec!["aggregate".into(), p("pop.json")], vec!["out"]),
        (
            vec![
                "volume".into(),
                p("agg.json"),
                "--method".into(),
                "mc".into(),
                "--samples".into(),
                "50000".into(),
            ],
            vec!["out"],
        ),
        (
            vec![
                "volume".into(),
                p("agg.json"),
                "--method".into(),
                "exact".into(),
            ],
            vec!["out"],
        ),
        (
            vec![
                "bench-storage".into(),
                "--pairs".into(),
                "3".into(),
                "--oracle-dims".into(),
                "2,3".into(),
                "--mc-dims".into(),
                "4,5".into(),
                "--samples".into(),
                "20000".into(),
                "--summary".into(),
                "{dir}/summary.json".into(),
            ],
            vec!["out", "summary.json", "summary.json.dat"],
        ),
        (
            vec![
                "bench-tcl".into(),
                "--loads".into(),
                "10".into(),
                "--slots".into(),
                "1,2".into(),
                "--samples".into(),
                "20000".into(),
            ],
            vec!["out"],
        ),
        (
            vec![
                "dispatch".into(),
                p("case.json"),
                "--csv".into(),
                "{dir}/trajectory.csv".into(),
            ],
            vec!["out", "trajectory.csv"],
        ),
    ];
    let mut compared = 0;
    for (i, (args, files)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in ["0", "1"].iter().enumerate() {
            let sub = dir.join(format!("run{i}_{rep}"));
            std::fs::create_dir_all(&sub).map_err(|e| e.to_string())?;
            let sub_s = sub.to_string_lossy().into_owned();
            let mut full: Vec<String> = args.iter().map(|a| a.replace("{dir}", &sub_s)).collect();
            full.extend([
                "--seed".into(),
                "7".into(),
                "-o".into(),
                format!("{sub_s}/out"),
            ]);
            if *threads == "1" {
                full.extend(["--threads".into(), "1".into()]);
            }
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            run_cli(&refs)?;
            let mut bytes = Vec::new();
            for f in files {
                bytes.push(std::fs::read(sub.join(f)).map_err(|e| format!("{f}: {e}"))?);
            }
            outputs.push(bytes);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{} differs between runs", args[0]));
        }
        compared += 1;
        // Chain outputs: the storage population feeds aggregation, whose
        // result feeds the volume commands.
        let first = dir.join(format!("run{i}_0/out"));
        match i {
            0 => std::fs::copy(&first, dir.join("pop.json")).map(|_| ()),
            2 => std::fs::copy(&first, dir.join("agg.json")).map(|_| ()),
            _ => Ok(()),
        }
        .map_err(|e| e.to_string())?;
    }
    Ok(compared)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    match determinism_in(dir.path()) {
        Ok(n) => outcome(
            true,
            format!("{n} commands byte-identical across reruns and thread counts"),
        ),
        Err(e) => outcome(false, e),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("worked example exactness", worked_example),
        ("member sums contained", containment),
        ("hypercube exactness", hypercube_exactness),
        ("deferrable exactness", deferrable_exactness),
        ("row-count law", row_count_law),
        ("storage error benchmark", storage_error),
        ("exponential volume growth", volume_growth),
        ("volume estimator calibration", volume_calibration),
        ("tcl heterogeneity direction", tcl_heterogeneity),
        ("dispatch monotonicity", dispatch_monotonicity),
        ("cli determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {:>2} {name}: {} ({:.1}s)",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!result.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
