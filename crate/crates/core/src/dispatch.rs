//! Multi-period economic dispatch with aggregate flexibility polytopes.
//!
//! Every aggregate contributes one consumption variable per period. Without
//! lines all buses form a single balance node; with lines, nodal balances
//! follow the DC power-flow equations with bus 0 as the angle reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lp::{self, LpOutcome, LpProblem};
use crate::polytope::{HPolytope, PolytopeFile, Space};
use crate::scalar::Scalar;

/// Convex generation cost per period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cost {
    /// `Σ_t price(t) p(t)`.
    Linear(Vec<f64>),
    /// `Σ_t max_k (slope_k p(t) + intercept_k)`.
    Piecewise(Vec<Segment>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Fixed demand per period.
    #[serde(default)]
    pub demand: Vec<f64>,
    #[serde(default)]
    pub generators: Vec<Generator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub susceptance: f64,
    /// Optional flow limit in either direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateSite {
    pub bus: usize,
    pub polytope: PolytopeFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispatchCase {
    pub horizon: usize,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub aggregates: Vec<AggregateSite>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorOutput {
    pub bus: usize,
    pub index: usize,
    pub output: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub objective: f64,
    pub generators: Vec<GeneratorOutput>,
    /// Net injection per bus and period.
    pub injections: Vec<Vec<f64>>,
    /// Voltage angles per bus and period; absent in single-bus mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<Vec<f64>>>,
    /// Point in each aggregate's own coordinate space.
    pub aggregate_points: Vec<Vec<f64>>,
    /// Net consumption per aggregate and period.
    pub aggregate_consumption: Vec<Vec<f64>>,
}

impl DispatchResult {
    /// One row per period: injections, generator outputs, aggregate consumption.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period");
        for i in 0..self.injections.len() {
            out.push_str(&format!(",injection_{i}"));
        }
        for g in &self.generators {
            out.push_str(&format!(",gen_{}_{}", g.bus, g.index));
        }
        for k in 0..self.aggregate_consumption.len() {
            out.push_str(&format!(",aggregate_{k}"));
        }
        out.push('\n');
        let horizon = self.injections.first().map_or(0, Vec::len);
        for t in 0..horizon {
            out.push_str(&(t + 1).to_string());
            let cols = self
                .injections
                .iter()
                .map(|v| v[t])
                .chain(self.generators.iter().map(|g| g.output[t]))
                .chain(self.aggregate_consumption.iter().map(|v| v[t]));
            for v in cols {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Largest `|p_i(t) - Σ_j b_ij (θ_i(t) - θ_j(t))|` over buses and periods.
    pub fn flow_residual(&self, case: &DispatchCase) -> f64 {
        let Some(theta) = &self.angles else {
            return (0..case.horizon)
                .map(|t| self.injections.iter().map(|v| v[t]).sum::<f64>().abs())
                .fold(0.0, f64::max);
        };
        let mut worst: f64 = 0.0;
        for t in 0..case.horizon {
            let mut flow = vec![0.0; case.buses.len()];
            for l in &case.lines {
                let f = l.susceptance * (theta[l.from][t] - theta[l.to][t]);
                flow[l.from] += f;
                flow[l.to] -= f;
            }
            for (i, f) in flow.iter().enumerate() {
                worst = worst.max((self.injections[i][t] - f).abs());
            }
        }
        worst
    }
}

/// Lossless storage over injections `u`: with `e(t) = e0 + Σ_{i<=t} u(i)`,
/// requires `0 <= e(t) <= S(t)`.
pub fn storage_constraints<T: Scalar>(capacity: &[f64], e0: f64) -> Result<HPolytope<T>> {
    let d = capacity.len();
    if d == 0 {
        return Err(Error::invalid("storage capacity needs at least one period"));
    }
    if capacity.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::invalid("storage capacity must be non-negative"));
    }
    if !(0.0 <= e0 && e0 <= capacity[0]) {
        return Err(Error::invalid("initial charge must lie in [0, S(1)]"));
    }
    let mut a = Matrix::zeros(2 * d, d);
    let mut b = Vec::with_capacity(2 * d);
    for t in 0..d {
        for i in 0..=t {
            a[(t, i)] = T::one();
            a[(d + t, i)] = -T::one();
        }
        b.push(T::from_f64(capacity[t] - e0));
    }
    b.extend((0..d).map(|_| T::from_f64(e0)));
    HPolytope::new(a, b)
}

struct Layout {
    gen_start: Vec<usize>,
    epi_start: Vec<Option<usize>>,
    agg_start: Vec<usize>,
    theta_start: usize,
    slack_start: usize,
    total: usize,
}

struct Builder<T> {
    rows: Matrix<T>,
    rhs: Vec<T>,
    width: usize,
}

impl<T: Scalar> Builder<T> {
    fn le(&mut self, coeffs: &[(usize, T)], rhs: T) {
        let mut row = vec![T::zero(); self.width];
        for (j, v) in coeffs {
            row[*j] = row[*j].clone() + v.clone();
        }
        self.rows.push_row(&row);
        self.rhs.push(rhs);
    }

    fn eq(&mut self, coeffs: &[(usize, T)], rhs: T) {
        self.le(coeffs, rhs.clone());
        let neg: Vec<(usize, T)> = coeffs.iter().map(|(j, v)| (*j, -v.clone())).collect();
        self.le(&neg, -rhs);
    }
}

fn validate(case: &DispatchCase) -> Result<Vec<HPolytope<f64>>> {
    let d = case.horizon;
    if d == 0 || case.buses.is_empty() {
        return Err(Error::invalid(
            "dispatch needs a positive horizon and at least one bus",
        ));
    }
    let nb = case.buses.len();
    for (i, bus) in case.buses.iter().enumerate() {
        if !bus.demand.is_empty() && bus.demand.len() != d {
            return Err(Error::invalid(format!(
                "bus {i}: demand length differs from the horizon"
            )));
        }
        for (g, gen) in bus.generators.iter().enumerate() {
            if gen.p_min.len() != d || gen.p_max.len() != d {
                return Err(Error::invalid(format!(
                    "bus {i} generator {g}: bounds length differs from the horizon"
                )));
            }
            if gen.p_min.iter().zip(&gen.p_max).any(|(l, u)| !(l <= u)) {
                return Err(Error::invalid(format!(
                    "bus {i} generator {g}: p_min exceeds p_max"
                )));
            }
            match &gen.cost {
                Cost::Linear(c) if c.len() != d => {
                    return Err(Error::invalid(format!(
                        "bus {i} generator {g}: price length differs from the horizon"
                    )))
                }
                Cost::Piecewise(s) if s.is_empty() => {
                    return Err(Error::invalid(format!(
                        "bus {i} generator {g}: empty piecewise cost"
                    )))
                }
                _ => {}
            }
        }
    }
    for (k, l) in case.lines.iter().enumerate() {
        if l.from >= nb || l.to >= nb || l.from == l.to {
            return Err(Error::invalid(format!("line {k}: invalid endpoints")));
        }
    }
    case.aggregates
        .iter()
        .enumerate()
        .map(|(k, site)| {
            if site.bus >= nb {
                return Err(Error::for_load(
                    k,
                    Error::invalid("aggregate bus out of range"),
                ));
            }
            let p: HPolytope<f64> = site
                .polytope
                .to_polytope()
                .map_err(|e| Error::for_load(k, e))?;
            let want = match p.space() {
                Space::Power => d,
                Space::StackedStorage => 2 * d,
            };
            if p.dimension() != want {
                return Err(Error::for_load(
                    k,
                    Error::DimensionMismatch {
                        expected: want,
                        found: p.dimension(),
                    },
                ));
            }
            p.bounding_box().map_err(|e| Error::for_load(k, e))?;
            Ok(p)
        })
        .collect()
}

fn layout(case: &DispatchCase, polys: &[HPolytope<f64>], with_slack: bool) -> Layout {
    let d = case.horizon;
    let mut next = 0;
    let mut gen_start = Vec::new();
    let mut epi_start = Vec::new();
    for bus in &case.buses {
        for gen in &bus.generators {
            gen_start.push(next);
            next += d;
            if matches!(gen.cost, Cost::Piecewise(_)) {
                epi_start.push(Some(next));
                next += d;
            } else {
                epi_start.push(None);
            }
        }
    }
    let mut agg_start = Vec::new();
    for p in polys {
        agg_start.push(next);
        next += p.dimension();
    }
    let theta_start = next;
    if !case.lines.is_empty() {
        next += (case.buses.len() - 1) * d;
    }
    let slack_start = next;
    if with_slack {
        next += 2 * balance_nodes(case) * d;
    }
    Layout {
        gen_start,
        epi_start,
        agg_start,
        theta_start,
        slack_start,
        total: next,
    }
}

fn balance_nodes(case: &DispatchCase) -> usize {
    if case.lines.is_empty() {
        1
    } else {
        case.buses.len()
    }
}

/// Builds the LP. With `with_slack`, balance equalities get non-negative
/// slacks and the objective becomes their total.
fn build<T: Scalar>(
    case: &DispatchCase,
    polys: &[HPolytope<f64>],
    with_slack: bool,
) -> (LpProblem<T>, Layout) {
    let d = case.horizon;
    let lay = layout(case, polys, with_slack);
    let mut bld = Builder {
        rows: Matrix::zeros(0, 0),
        rhs: Vec::new(),
        width: lay.total,
    };
    let mut objective = vec![T::zero(); lay.total];
    let f = T::from_f64;

    let gens: Vec<(usize, &Generator)> = case
        .buses
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.generators.iter().map(move |g| (i, g)))
        .collect();
    for (g, (_, gen)) in gens.iter().enumerate() {
        let s = lay.gen_start[g];
        for t in 0..d {
            bld.le(&[(s + t, T::one())], f(gen.p_max[t]));
            bld.le(&[(s + t, -T::one())], f(-gen.p_min[t]));
        }
        match (&gen.cost, lay.epi_start[g]) {
            (Cost::Linear(prices), _) => {
                if !with_slack {
                    for t in 0..d {
                        objective[s + t] = f(-prices[t]);
                    }
                }
            }
            (Cost::Piecewise(segments), Some(e)) => {
                for t in 0..d {
                    for seg in segments {
                        // slope p - z <= -intercept
                        bld.le(
                            &[(s + t, f(seg.slope)), (e + t, -T::one())],
                            f(-seg.intercept),
                        );
                    }
                    if !with_slack {
                        objective[e + t] = -T::one();
                    } else {
                        // Keep the epigraph bounded when it is not minimized.
                        let cap = segments
                            .iter()
                            .map(|sg| {
                                (sg.slope * gen.p_max[t]).max(sg.slope * gen.p_min[t])
                                    + sg.intercept
                            })
                            .fold(f64::NEG_INFINITY, f64::max);
                        bld.le(&[(e + t, T::one())], f(cap));
                    }
                }
            }
            (Cost::Piecewise(_), None) => {
                unreachable!("piecewise cost always has epigraph columns")
            }
        }
    }

    for (k, p) in polys.iter().enumerate() {
        let s = lay.agg_start[k];
        for i in 0..p.num_rows() {
            let coeffs: Vec<(usize, T)> = p
                .row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| (s + j, f(*v)))
                .collect();
            bld.le(&coeffs, f(*p.offset(i)));
        }
    }

    let consumption = |k: usize, t: usize| -> Vec<usize> {
        let s = lay.agg_start[k];
        match polys[k].space() {
            Space::Power => vec![s + t],
            Space::StackedStorage => vec![s + t, s + d + t],
        }
    };
    let nodes = balance_nodes(case);
    let node_of = |bus: usize| if case.lines.is_empty() { 0 } else { bus };
    let theta = |bus: usize, t: usize| -> Option<usize> {
        (bus > 0).then(|| lay.theta_start + (bus - 1) * d + t)
    };
    for t in 0..d {
        for node in 0..nodes {
            // Σ gen - Σ agg - flow_out = demand
            let mut coeffs: Vec<(usize, T)> = Vec::new();
            let mut demand = 0.0;
            for (i, bus) in case.buses.iter().enumerate() {
                if node_of(i) != node {
                    continue;
                }
                demand += bus.demand.get(t).copied().unwrap_or(0.0);
            }
            for (g, (bus, _)) in gens.iter().enumerate() {
                if node_of(*bus) == node {
                    coeffs.push((lay.gen_start[g] + t, T::one()));
                }
            }
            for (k, site) in case.aggregates.iter().enumerate() {
                if node_of(site.bus) == node {
                    coeffs.extend(consumption(k, t).into_iter().map(|j| (j, -T::one())));
                }
            }
            for l in &case.lines {
                let b = f(l.susceptance);
                let sign = if l.from == node {
                    T::one()
                } else if l.to == node {
                    -T::one()
                } else {
                    continue;
                };
                if let Some(j) = theta(l.from, t) {
                    coeffs.push((j, -(sign.clone() * b.clone())));
                }
                if let Some(j) = theta(l.to, t) {
                    coeffs.push((j, sign * b));
                }
            }
            if with_slack {
                let s = lay.slack_start + 2 * (t * nodes + node);
                coeffs.push((s, T::one()));
                coeffs.push((s + 1, -T::one()));
                bld.le(&[(s, -T::one())], T::zero());
                bld.le(&[(s + 1, -T::one())], T::zero());
                objective[s] = -T::one();
                objective[s + 1] = -T::one();
            }
            bld.eq(&coeffs, f(demand));
        }
        for l in &case.lines {
            if let Some(limit) = l.limit {
                let b = f(l.susceptance);
                let mut coeffs = Vec::new();
                if let Some(j) = theta(l.from, t) {
                    coeffs.push((j, b.clone()));
                }
                if let Some(j) = theta(l.to, t) {
                    coeffs.push((j, -b));
                }
                if !coeffs.is_empty() {
                    bld.le(&coeffs, f(limit));
                    let neg: Vec<(usize, T)> = coeffs.into_iter().map(|(j, v)| (j, -v)).collect();
                    bld.le(&neg, f(limit));
                }
            }
        }
    }
    let problem = LpProblem::new(objective, bld.rows, bld.rhs)
        .expect("dispatch LP dimensions are consistent");
    (problem, lay)
}

/// Solves the dispatch in `f64`.
pub fn solve_dispatch(case: &DispatchCase) -> Result<DispatchResult> {
    solve_dispatch_as::<f64>(case)
}

/// Solves the dispatch with LP arithmetic in `T`.
pub fn solve_dispatch_as<T: Scalar>(case: &DispatchCase) -> Result<DispatchResult> {
    let polys = validate(case)?;
    let (problem, lay) = build::<T>(case, &polys, false);
    let (value, v) = match lp::solve(&problem)? {
        LpOutcome::Optimal { value, optimizer } => (value, optimizer),
        LpOutcome::Unbounded => return Err(Error::Unbounded),
        LpOutcome::Infeasible => return Err(locate_infeasibility::<T>(case, &polys)),
    };
    let v: Vec<f64> = v.iter().map(Scalar::to_f64).collect();
    let d = case.horizon;

    let mut generators = Vec::new();
    let mut g = 0;
    let mut injections = vec![vec![0.0; d]; case.buses.len()];
    for (i, bus) in case.buses.iter().enumerate() {
        for t in 0..d {
            injections[i][t] -= bus.demand.get(t).copied().unwrap_or(0.0);
        }
        for index in 0..bus.generators.len() {
            let s = lay.gen_start[g];
            let output = v[s..s + d].to_vec();
            for t in 0..d {
                injections[i][t] += output[t];
            }
            generators.push(GeneratorOutput {
                bus: i,
                index,
                output,
            });
            g += 1;
        }
    }
    let mut aggregate_points = Vec::new();
    let mut aggregate_consumption = Vec::new();
    for (k, p) in polys.iter().enumerate() {
        let s = lay.agg_start[k];
        let point = v[s..s + p.dimension()].to_vec();
        let cons: Vec<f64> = match p.space() {
            Space::Power => point.clone(),
            Space::StackedStorage => (0..d).map(|t| point[t] + point[d + t]).collect(),
        };
        for t in 0..d {
            injections[case.aggregates[k].bus][t] -= cons[t];
        }
        aggregate_points.push(point);
        aggregate_consumption.push(cons);
    }
    let angles = (!case.lines.is_empty()).then(|| {
        let mut th = vec![vec![0.0; d]];
        for i in 1..case.buses.len() {
            let s = lay.theta_start + (i - 1) * d;
            th.push(v[s..s + d].to_vec());
        }
        th
    });
    Ok(DispatchResult {
        objective: -value.to_f64(),
        generators,
        injections,
        angles,
        aggregate_points,
        aggregate_consumption,
    })
}

/// Period (1-based) with the largest balance shortfall under the
/// minimum-slack relaxation.
fn locate_infeasibility<T: Scalar>(case: &DispatchCase, polys: &[HPolytope<f64>]) -> Error {
    let (problem, lay) = build::<T>(case, polys, true);
    let Ok(LpOutcome::Optimal { optimizer, .. }) = lp::solve(&problem) else {
        return Error::InfeasibleDispatch { period: 1 };
    };
    let nodes = balance_nodes(case);
    let mut worst = (0, f64::NEG_INFINITY);
    for t in 0..case.horizon {
        let total: f64 = (0..2 * nodes)
            .map(|j| optimizer[lay.slack_start + 2 * t * nodes + j].to_f64())
            .sum();
        if total > worst.1 {
            worst = (t, total);
        }
    }
    Error::InfeasibleDispatch {
        period: worst.0 + 1,
    }
}
