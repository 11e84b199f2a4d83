use num_traits::{One, Zero};
use polyagg::aggregation::{aggregate_with, minkowski_contains, AggregateOptions};
use polyagg::loads::{
    build_deferrable, build_hypercube, build_storage, build_storage_net, random_load,
    DeferrableParams, Family, HypercubeParams, StorageParams, StorageSpace,
};
use polyagg::volume::{exact_volume, mc_volume};
use polyagg::{aggregate_general, align, exact_minkowski_oracle, BigRational, HPolytope, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Storage),
        Just(Family::Tcl),
        Just(Family::Deferrable),
        Just(Family::Hypercube)
    ]
}

fn sum(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn member_sums_lie_in_the_outer_approximation(f1 in family(), f2 in family(), d in 2usize..=4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1: HPolytope<f64> = random_load(f1, d, &mut rng).build().unwrap();
        let p2: HPolytope<f64> = random_load(f2, d, &mut rng).build().unwrap();
        let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
        let v1 = p1.enumerate_vertices().unwrap();
        let v2 = p2.enumerate_vertices().unwrap();
        for _ in 0..300 {
            let z = sum(&v1.random_member(&mut rng), &v2.random_member(&mut rng));
            prop_assert!(om.max_violation(&z) <= 1e-8);
        }
        for x in v1.vertices() {
            for y in v2.vertices() {
                prop_assert!(om.max_violation(&sum(x, y)) <= 1e-8);
            }
        }
    }

    #[test]
    fn hypercube_sums_are_exact(d in 2usize..=6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cube = || {
            let lo: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.1..4.0)).collect();
            HypercubeParams { p_low: lo, p_high: hi }
        };
        let (c1, c2) = (cube(), cube());
        let direct = build_hypercube::<f64>(&HypercubeParams {
            p_low: sum(&c1.p_low, &c2.p_low),
            p_high: sum(&c1.p_high, &c2.p_high),
        })
        .unwrap();
        let om = aggregate_general(&[build_hypercube(&c1).unwrap(), build_hypercube(&c2).unwrap()]).unwrap();
        prop_assert!(om.set_distance(&direct).unwrap() <= 1e-8);
    }

    #[test]
    fn deferrable_sums_are_exact(d in 2usize..=4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut load = || {
            let energy = rng.random_range(0.5..5.0);
            DeferrableParams { p_max: vec![energy; d], energy, t_arrive: 1, t_depart: d + 1 }
        };
        let (l1, l2) = (load(), load());
        let p1 = build_deferrable::<f64>(&l1).unwrap();
        let p2 = build_deferrable::<f64>(&l2).unwrap();
        let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
        let oracle = exact_minkowski_oracle(&p1, &p2).unwrap();
        prop_assert!(om.enumerate_vertices().unwrap().same_vertices(&oracle, &1e-7));
    }

    #[test]
    fn aggregation_is_order_independent(f1 in family(), f2 in family(), f3 in family(), d in 2usize..=4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps: Vec<HPolytope<f64>> = [f1, f2, f3]
            .iter()
            .map(|&f| random_load(f, d, &mut rng).build().unwrap())
            .collect();
        let forward = aggregate_general(&ps).unwrap();
        let backward = aggregate_general(&[ps[2].clone(), ps[1].clone(), ps[0].clone()]).unwrap();
        let nested = aggregate_general(&[aggregate_general(&ps[..2]).unwrap(), ps[2].clone()]).unwrap();
        let scale = 1.0 + forward.b().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(forward.set_distance(&backward).unwrap() <= 1e-7 * scale);
        // Tangent offsets of an aggregate bound the sum of the parts' offsets from above.
        prop_assert!(nested.containment_gap(&forward).unwrap() <= 1e-7 * scale);
    }

    #[test]
    fn row_count_law(d in 2usize..=5, shared in 0usize..=6, extra1 in 0usize..=4, extra2 in 0usize..=4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random_row = || -> Vec<f64> { (0..d).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let common: Vec<Vec<f64>> = (0..shared).map(|_| random_row()).collect();
        let own1: Vec<Vec<f64>> = (0..extra1).map(|_| random_row()).collect();
        let own2: Vec<Vec<f64>> = (0..extra2).map(|_| random_row()).collect();
        let boxed = |extra: &[Vec<f64>], half: f64| {
            let mut p = HPolytope::<f64>::from_box(&vec![-half; d], &vec![half; d]).unwrap();
            for r in common.iter().chain(extra) {
                p = p.with_row(r, 0.5 * half).unwrap();
            }
            p
        };
        let p1 = boxed(&own1, 1.0);
        let p2 = boxed(&own2, 2.0);
        let c = 2 * d + shared;
        let agg = aggregate_with(&[p1.clone(), p2.clone()], AggregateOptions::default()).unwrap();
        prop_assert_eq!(agg.polytope.num_rows(), p1.num_rows() + p2.num_rows() - c);
        prop_assert_eq!(agg.lp_count, extra1 + extra2);
    }

    #[test]
    fn adding_a_load_keeps_earlier_member_sums(d in 2usize..=3, seed: u64) {
        // The outer approximation of a subset is not itself kept: rows new
        // with the added load are offset by exact support values.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps: Vec<HPolytope<f64>> = [Family::Storage, Family::Hypercube, Family::Tcl]
            .iter()
            .map(|&f| random_load(f, d, &mut rng).build().unwrap())
            .collect();
        let all = aggregate_general(&ps).unwrap();
        let pair = exact_minkowski_oracle(&ps[0], &ps[1]).unwrap();
        let v3 = ps[2].enumerate_vertices().unwrap();
        for x in pair.vertices() {
            let z = sum(x, &v3.random_member(&mut rng));
            prop_assert!(all.max_violation(&z) <= 1e-7);
        }
    }

    #[test]
    fn exact_volume_scales_with_dimension_power(d in 2usize..=3, num in 1i64..5, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo: Vec<BigRational> = (0..d).map(|_| BigRational::from_integer(rng.random_range(-3i64..3).into())).collect();
        let hi: Vec<BigRational> = lo.iter().map(|l| l + BigRational::from_integer(rng.random_range(1i64..4).into())).collect();
        // Cut one corner off the box so the shape is not a product of intervals.
        let corner = hi.iter().cloned().fold(BigRational::zero(), |a, b| a + b) - BigRational::new(1.into(), 2.into());
        let tri = HPolytope::from_box(&lo, &hi).unwrap().with_row(&vec![BigRational::one(); d], corner).unwrap();
        let lambda = BigRational::new(num.into(), 2.into());
        let v = exact_volume(&tri).unwrap().volume;
        let vs = exact_volume(&tri.scale(&lambda).unwrap()).unwrap().volume;
        let mut factor = BigRational::one();
        for _ in 0..d {
            factor *= lambda.clone();
        }
        prop_assert_eq!(vs, v * factor);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_on_storage_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 2..=3 {
        let p1: HPolytope<f64> = random_load(Family::Storage, d, &mut rng).build().unwrap();
        let p2: HPolytope<f64> = random_load(Family::Storage, d, &mut rng).build().unwrap();
        let om = aggregate_general(&[p1, p2]).unwrap();
        let exact = exact_volume(&om).unwrap().volume;
        let mc = mc_volume(&om, 400_000, 7).unwrap();
        assert!(
            (mc.volume - exact).abs() <= 3.0 * mc.ci_halfwidth_95,
            "D={d}: {} vs {exact}",
            mc.volume
        );
    }
}

#[test]
fn exact_oracle_points_are_members_of_the_exact_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p1: HPolytope<f64> = random_load(Family::Storage, 3, &mut rng).build().unwrap();
    let p2: HPolytope<f64> = random_load(Family::Tcl, 3, &mut rng).build().unwrap();
    let oracle = exact_minkowski_oracle(&p1, &p2).unwrap();
    for v in oracle.vertices() {
        assert!(minkowski_contains(&p1, &p2, v).unwrap());
    }
    let om = aggregate_general(&[p1.clone(), p2.clone()]).unwrap();
    let v_om = exact_volume(&om).unwrap().volume;
    let v_exact = exact_volume(&oracle.hull_to_h().unwrap()).unwrap().volume;
    assert!(v_om >= v_exact * (1.0 - 1e-9));
}

fn storage(d: usize, eta: f64, rng: &mut ChaCha8Rng) -> StorageParams {
    let capacity = rng.random_range(5.0..15.0);
    StorageParams {
        p_max: (0..d).map(|_| rng.random_range(1.0..5.0)).collect(),
        p_min: (0..d).map(|_| -rng.random_range(1.0..5.0)).collect(),
        capacity,
        initial: rng.random_range(0.0..capacity),
        dissipation: rng.random_range(0.8..=1.0),
        eta_in: eta,
        eta_out: eta,
        space: StorageSpace::Stacked,
    }
}

#[test]
fn net_storage_is_the_projection_of_stacked_storage() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let d = rng.random_range(1..=3);
        let params = storage(d, rng.random_range(0.8..=1.0), &mut rng);
        let stacked = build_storage::<f64>(&params).unwrap();
        let net = build_storage_net::<f64>(&params).unwrap();
        // Every stacked member projects into the net polytope.
        let sv = stacked.enumerate_vertices().unwrap();
        for _ in 0..200 {
            let x = sv.random_member(&mut rng);
            let proj: Vec<f64> = (0..d).map(|t| x[t] + x[d + t]).collect();
            assert!(net.max_violation(&proj) <= 1e-9);
        }
        // Every net member splits into a stacked member.
        let nv = net.enumerate_vertices().unwrap();
        for _ in 0..200 {
            let x = nv.random_member(&mut rng);
            let mut split: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
            split.extend(x.iter().map(|v| v.min(0.0)));
            assert!(stacked.max_violation(&split) <= 1e-9);
        }
    }
}

#[test]
fn stacked_storage_aggregates_in_its_own_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p1 = build_storage::<f64>(&storage(2, 0.9, &mut rng)).unwrap();
    let p2 = build_storage::<f64>(&storage(2, 0.9, &mut rng)).unwrap();
    let fam = align(&[p1.clone(), p2.clone()]).unwrap();
    let om = fam.sum().unwrap();
    assert_eq!(om.space(), polyagg::Space::StackedStorage);
    let (v1, v2) = (
        p1.enumerate_vertices().unwrap(),
        p2.enumerate_vertices().unwrap(),
    );
    for _ in 0..500 {
        let z = sum(&v1.random_member(&mut rng), &v2.random_member(&mut rng));
        assert!(om.max_violation(&z) <= 1e-8);
    }
}

#[test]
fn single_precision_path_matches_double() {
    let a = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
    let p1 = HPolytope::<f32>::from_f64_rows(&a, &[-1.0, -1.0, 3.0]).unwrap();
    let p2 = HPolytope::<f32>::from_f64_rows(&a, &[-2.0, -1.0, 5.0]).unwrap();
    let om = aggregate_general(&[p1, p2]).unwrap();
    let want = [-3.0, -2.0, 8.0 / 2f64.sqrt()];
    for (b, w) in om.b().iter().zip(want) {
        assert!((b.to_f64() - w).abs() < 1e-5);
    }
}

#[test]
fn redundancy_removal_changes_row_count_not_the_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p1 = HPolytope::<f64>::from_box(&[0.0, 0.0], &[1.0, 1.0])
        .unwrap()
        .with_row(&[1.0, 1.0], 5.0)
        .unwrap();
    let p2: HPolytope<f64> = random_load(Family::Hypercube, 2, &mut rng).build().unwrap();
    let plain = aggregate_with(&[p1.clone(), p2.clone()], AggregateOptions::default()).unwrap();
    let pruned = aggregate_with(
        &[p1, p2],
        AggregateOptions {
            remove_redundancy: true,
        },
    )
    .unwrap();
    assert_eq!(plain.unique_rows, 5);
    assert_eq!(pruned.unique_rows, 4);
    assert!(plain.polytope.set_distance(&pruned.polytope).unwrap() <= 1e-9);
}
