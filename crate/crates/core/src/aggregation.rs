//! Outer approximation of Minkowski sums of H-polytopes.
//!
//! Inputs are rewritten over one shared constraint matrix: every distinct
//! normalized row of every input is kept once, and each load receives, for
//! rows it does not already have, the tangent offset obtained by maximizing
//! that row over the load. Summing the offsets then bounds the Minkowski sum
//! from outside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polytope::{HPolytope, Space, VPolytope, ORACLE_MAX_POINTS};
use crate::scalar::{lex_cmp, squared_distance, Scalar};

/// Rows closer than this (Euclidean, unit normals) but not merged get a warning.
const NEAR_PARALLEL_ANGLE: f64 = 1e-6;

/// `{z | a z <= Σ_k b_k}`.
pub fn sum_same_shape<T: Scalar>(a: &Matrix<T>, b_list: &[Vec<T>]) -> Result<HPolytope<T>> {
    if b_list.is_empty() {
        return Err(Error::invalid("at least one offset vector is required"));
    }
    let m = a.nrows();
    let mut total = vec![T::zero(); m];
    for b in b_list {
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        for (t, v) in total.iter_mut().zip(b) {
            *t = t.clone() + v.clone();
        }
    }
    HPolytope::new(a.clone(), total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrigin {
    /// Present in the load's own representation.
    Original,
    /// Added by a tangent-offset LP.
    Tangent,
}

/// Several polytopes rewritten over one shared constraint matrix.
#[derive(Clone, Debug)]
pub struct AlignedFamily<T> {
    shared_a: Matrix<T>,
    offsets: Vec<Vec<T>>,
    provenance: Vec<Vec<RowOrigin>>,
    lp_count: usize,
    space: Space,
}

impl<T: Scalar> AlignedFamily<T> {
    pub fn shared_a(&self) -> &Matrix<T> {
        &self.shared_a
    }

    /// One offset vector per load, aligned with [`Self::shared_a`].
    pub fn offsets(&self) -> &[Vec<T>] {
        &self.offsets
    }

    /// `provenance()[k][i]` tells how row `i` was obtained for load `k`.
    pub fn provenance(&self) -> &[Vec<RowOrigin>] {
        &self.provenance
    }

    pub fn unique_rows(&self) -> usize {
        self.shared_a.nrows()
    }

    pub fn num_loads(&self) -> usize {
        self.offsets.len()
    }

    /// Number of tangent-offset LPs solved.
    pub fn lp_count(&self) -> usize {
        self.lp_count
    }

    /// Load `k` in the shared representation.
    pub fn load(&self, k: usize) -> Result<HPolytope<T>> {
        Ok(HPolytope::new(self.shared_a.clone(), self.offsets[k].clone())?.with_space(self.space))
    }

    pub fn sum(&self) -> Result<HPolytope<T>> {
        Ok(sum_same_shape(&self.shared_a, &self.offsets)?.with_space(self.space))
    }
}

fn check_family<T: Scalar>(polytopes: &[HPolytope<T>]) -> Result<(usize, Space)> {
    let first = polytopes
        .first()
        .ok_or_else(|| Error::invalid("at least one polytope is required"))?;
    let (d, space) = (first.dimension(), first.space());
    for (k, p) in polytopes.iter().enumerate() {
        if p.dimension() != d {
            return Err(Error::for_load(
                k,
                Error::DimensionMismatch {
                    expected: d,
                    found: p.dimension(),
                },
            ));
        }
        if p.space() != space {
            return Err(Error::for_load(
                k,
                Error::invalid("all polytopes must live in the same coordinate space"),
            ));
        }
    }
    Ok((d, space))
}

/// Verifies every input is nonempty and bounded, naming the first offender.
fn check_bounded<T: Scalar>(polytopes: &[HPolytope<T>]) -> Result<()> {
    let checks: Vec<Result<()>> = polytopes
        .par_iter()
        .map(|p| p.bounding_box().map(|_| ()))
        .collect();
    for (k, c) in checks.into_iter().enumerate() {
        c.map_err(|e| Error::for_load(k, e))?;
    }
    Ok(())
}

/// Groups equal rows. Returns, in first-appearance order, one representative
/// `(load, row)` per group and, for every input row, its group index.
fn unique_rows<T: Scalar>(polytopes: &[HPolytope<T>]) -> (Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let all: Vec<(usize, usize)> = polytopes
        .iter()
        .enumerate()
        .flat_map(|(k, p)| (0..p.num_rows()).map(move |i| (k, i)))
        .collect();
    let row = |&(k, i): &(usize, usize)| polytopes[k].row(i);

    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&x, &y| lex_cmp(row(&all[x]), row(&all[y])).then(x.cmp(&y)));

    let tol = T::row_eq_tol();
    let tol2 = tol.clone() * tol.clone();
    let warn_tol = if T::EXACT {
        T::zero()
    } else {
        T::from_f64(NEAR_PARALLEL_ANGLE)
    };
    let window = if warn_tol > tol {
        warn_tol.clone()
    } else {
        tol.clone()
    };
    let warn2 = warn_tol.clone() * warn_tol;

    // Group leader (position in `all`) for every entry, assigned in sorted order.
    let mut group_of = vec![usize::MAX; all.len()];
    let mut leaders: Vec<usize> = Vec::new();
    for (pos, &idx) in order.iter().enumerate() {
        let r = row(&all[idx]);
        let mut found = None;
        for &prev in order[..pos].iter().rev() {
            let q = row(&all[prev]);
            if q[0] < r[0].clone() - window.clone() {
                break;
            }
            let dist2 = squared_distance(q, r);
            if dist2 <= tol2 {
                found = Some(group_of[prev]);
                break;
            }
            if dist2 <= warn2 {
                log::warn!(
                    "rows {:?} and {:?} are nearly parallel but not merged",
                    all[prev],
                    all[idx]
                );
            }
        }
        group_of[idx] = match found {
            Some(g) => g,
            None => {
                leaders.push(idx);
                leaders.len() - 1
            }
        };
    }

    // Renumber groups by first appearance; the first-appearing row represents its group.
    let mut rank = vec![usize::MAX; leaders.len()];
    let mut reps = Vec::with_capacity(leaders.len());
    for (idx, &g) in group_of.iter().enumerate() {
        if rank[g] == usize::MAX {
            rank[g] = reps.len();
            reps.push(all[idx]);
        }
    }
    let mut membership: Vec<Vec<usize>> = polytopes.iter().map(|p| vec![0; p.num_rows()]).collect();
    for (idx, &(k, i)) in all.iter().enumerate() {
        membership[k][i] = rank[group_of[idx]];
    }
    (reps, membership)
}

/// Rewrites all inputs over the union of their distinct rows.
pub fn align<T: Scalar>(polytopes: &[HPolytope<T>]) -> Result<AlignedFamily<T>> {
    let (_, space) = check_family(polytopes)?;
    check_bounded(polytopes)?;

    let (reps, membership) = unique_rows(polytopes);
    let c = reps.len();
    let mut shared_a = Matrix::zeros(0, 0);
    for &(k, i) in &reps {
        shared_a.push_row(polytopes[k].row(i));
    }

    let mut offsets: Vec<Vec<Option<T>>> = polytopes.iter().map(|_| vec![None; c]).collect();
    for (k, groups) in membership.iter().enumerate() {
        for (i, &g) in groups.iter().enumerate() {
            let b = polytopes[k].offset(i).clone();
            // A load listing the same row twice keeps the tighter offset.
            let slot = &mut offsets[k][g];
            *slot = Some(match slot.take() {
                Some(cur) if cur <= b => cur,
                _ => b,
            });
        }
    }

    let missing: Vec<(usize, usize)> = offsets
        .iter()
        .enumerate()
        .flat_map(|(k, o)| {
            o.iter()
                .enumerate()
                .filter(|(_, v)| v.is_none())
                .map(move |(g, _)| (k, g))
        })
        .collect();
    let solved: Vec<Result<T>> = missing
        .par_iter()
        .map(|&(k, g)| polytopes[k].tangent_offset(shared_a.row(g)))
        .collect();

    let mut provenance: Vec<Vec<RowOrigin>> = offsets
        .iter()
        .map(|o| {
            o.iter()
                .map(|v| {
                    if v.is_some() {
                        RowOrigin::Original
                    } else {
                        RowOrigin::Tangent
                    }
                })
                .collect()
        })
        .collect();
    for (&(k, g), value) in missing.iter().zip(solved) {
        offsets[k][g] = Some(value.map_err(|e| Error::for_load(k, e))?);
        provenance[k][g] = RowOrigin::Tangent;
    }
    let offsets = offsets
        .into_iter()
        .map(|o| {
            o.into_iter()
                .map(|v| v.expect("every offset assigned"))
                .collect()
        })
        .collect();
    Ok(AlignedFamily {
        shared_a,
        offsets,
        provenance,
        lp_count: missing.len(),
        space,
    })
}

/// Outer approximation of `p` using exactly the rows of `rows`: rows present
/// in `p` keep their offsets, the others get tangent offsets.
pub fn outer_with_rows<T: Scalar>(p: &HPolytope<T>, rows: &Matrix<T>) -> Result<HPolytope<T>> {
    if rows.ncols() != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            found: rows.ncols(),
        });
    }
    let target = HPolytope::new(rows.clone(), vec![T::zero(); rows.nrows()])?;
    let tol2 = T::row_eq_tol() * T::row_eq_tol();
    let offsets = (0..target.num_rows())
        .into_par_iter()
        .map(|g| {
            let r = target.row(g);
            let own = (0..p.num_rows())
                .filter(|&i| squared_distance(p.row(i), r) <= tol2)
                .map(|i| p.offset(i).clone())
                .fold(None, |m: Option<T>, v| match m {
                    Some(cur) if cur <= v => Some(cur),
                    _ => Some(v),
                });
            match own {
                Some(b) => Ok(b),
                None => p.tangent_offset(r),
            }
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(HPolytope::new(target.a().clone(), offsets)?.with_space(p.space()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AggregateOptions {
    /// Drop redundant rows of every input before aligning.
    pub remove_redundancy: bool,
}

#[derive(Clone, Debug)]
pub struct Aggregate<T> {
    pub polytope: HPolytope<T>,
    /// Number of distinct rows, equal to the aggregate's row count.
    pub unique_rows: usize,
    pub lp_count: usize,
}

/// Outer approximation of the Minkowski sum of all inputs.
pub fn aggregate_general<T: Scalar>(polytopes: &[HPolytope<T>]) -> Result<HPolytope<T>> {
    aggregate_with(polytopes, AggregateOptions::default()).map(|a| a.polytope)
}

pub fn aggregate_with<T: Scalar>(
    polytopes: &[HPolytope<T>],
    options: AggregateOptions,
) -> Result<Aggregate<T>> {
    let reduced;
    let inputs = if options.remove_redundancy {
        reduced = polytopes
            .par_iter()
            .enumerate()
            .map(|(k, p)| p.remove_redundancy().map_err(|e| Error::for_load(k, e)))
            .collect::<Result<Vec<_>>>()?;
        &reduced[..]
    } else {
        polytopes
    };
    let family = align(inputs)?;
    Ok(Aggregate {
        polytope: family.sum()?,
        unique_rows: family.unique_rows(),
        lp_count: family.lp_count(),
    })
}

/// Exact Minkowski sum of two polytopes as the extreme points of all
/// pairwise vertex sums.
pub fn exact_minkowski_oracle<T: Scalar>(
    p1: &HPolytope<T>,
    p2: &HPolytope<T>,
) -> Result<VPolytope<T>> {
    let v1 = p1.enumerate_vertices().map_err(|e| Error::for_load(0, e))?;
    let v2 = p2.enumerate_vertices().map_err(|e| Error::for_load(1, e))?;
    minkowski_vertices(&v1, &v2)
}

/// Exact Minkowski sum of V-polytopes.
pub fn minkowski_vertices<T: Scalar>(v1: &VPolytope<T>, v2: &VPolytope<T>) -> Result<VPolytope<T>> {
    if v1.dimension() != v2.dimension() {
        return Err(Error::DimensionMismatch {
            expected: v1.dimension(),
            found: v2.dimension(),
        });
    }
    if v1.is_empty() || v2.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let pairs = v1.len() * v2.len();
    if pairs > ORACLE_MAX_POINTS {
        return Err(Error::OracleScale(format!(
            "{pairs} vertex pairs exceed the limit of {ORACLE_MAX_POINTS}"
        )));
    }
    let sums: Vec<Vec<T>> = v1
        .vertices()
        .iter()
        .flat_map(|x| {
            v2.vertices().iter().map(move |y| {
                x.iter()
                    .zip(y)
                    .map(|(a, b)| a.clone() + b.clone())
                    .collect()
            })
        })
        .collect();
    VPolytope::from_points(sums)
}

/// Exact Minkowski sum of any number of polytopes, folded pairwise.
pub fn exact_minkowski_sum<T: Scalar>(polytopes: &[HPolytope<T>]) -> Result<VPolytope<T>> {
    check_family(polytopes)?;
    let mut acc = polytopes[0]
        .enumerate_vertices()
        .map_err(|e| Error::for_load(0, e))?;
    if acc.is_empty() {
        return Err(Error::for_load(0, Error::EmptyPolytope));
    }
    for (k, p) in polytopes.iter().enumerate().skip(1) {
        let v = p.enumerate_vertices().map_err(|e| Error::for_load(k, e))?;
        if v.is_empty() {
            return Err(Error::for_load(k, Error::EmptyPolytope));
        }
        acc = minkowski_vertices(&acc, &v)?;
    }
    Ok(acc)
}

/// Whether `z ∈ p1 + p2`, i.e. whether `p1 ∩ (z - p2)` is nonempty.
pub fn minkowski_contains<T: Scalar>(
    p1: &HPolytope<T>,
    p2: &HPolytope<T>,
    z: &[T],
) -> Result<bool> {
    let d = p1.dimension();
    if p2.dimension() != d || z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if p2.dimension() != d {
                p2.dimension()
            } else {
                z.len()
            },
        });
    }
    let mut a = p1.a().clone();
    let mut b = p1.b().to_vec();
    for i in 0..p2.num_rows() {
        let r = p2.row(i);
        let neg: Vec<T> = r.iter().map(|v| -v.clone()).collect();
        a.push_row(&neg);
        b.push(p2.offset(i).clone() - crate::scalar::dot(r, z));
    }
    Ok(crate::lp::feasible_point(&a, &b)?.is_some())
}
