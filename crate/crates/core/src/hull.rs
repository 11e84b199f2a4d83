//! Incremental (beneath-beyond) convex hull for small dimensions.
//!
//! Facets are kept simplicial. A new point replaces every facet it sees
//! strictly and is coned to the horizon ridges, i.e. the ridges that belong
//! to exactly one visible facet. With exact scalars visibility is decided
//! exactly, so coplanar input never produces degenerate cones. With floats a
//! scale-relative distance tolerance plays the same role.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{determinant, factorial, hyperplane_normal, pivot_columns, rank_of};
use crate::scalar::{dot, lex_cmp, max_abs, squared_distance, Scalar};

#[derive(Clone, Debug)]
pub struct Facet<T> {
    /// Indices into the hull's point list, sorted.
    pub vertices: Vec<usize>,
    /// Outward normal, normalized with [`Scalar::row_norm`].
    pub normal: Vec<T>,
    pub offset: T,
}

#[derive(Clone, Debug)]
pub struct Hull<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    facets: Vec<Facet<T>>,
    eps: T,
}

/// Distance tolerance for a point cloud whose coordinates reach `scale`.
fn distance_eps<T: Scalar>(scale: &T) -> T {
    let one = T::one();
    let s = if *scale > one { scale.clone() } else { one };
    T::feasibility_tol() * T::from_f64(1e-2) * s
}

fn cloud_scale<T: Scalar>(points: &[Vec<T>]) -> T {
    points
        .iter()
        .map(|p| max_abs(p))
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

/// Builds the full-dimensional hull of `points`.
///
/// Fails with [`Error::LowerDimensional`] if the points lie in a hyperplane.
pub fn convex_hull<T: Scalar>(points: &[Vec<T>]) -> Result<Hull<T>> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or(Error::LowerDimensional)?;
    if dim == 0 {
        return Err(Error::invalid("points must have at least one coordinate"));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let eps = distance_eps(&cloud_scale(points));
    let simplex = initial_simplex(points, &eps).ok_or(Error::LowerDimensional)?;

    let inv = T::one() / T::from_usize(dim + 1);
    let interior: Vec<T> = (0..dim)
        .map(|k| {
            simplex
                .iter()
                .fold(T::zero(), |acc, &i| acc + points[i][k].clone())
                * inv.clone()
        })
        .collect();

    let mut hull = Hull {
        dim,
        points: points.to_vec(),
        facets: Vec::new(),
        eps,
    };
    for skip in 0..=dim {
        let mut verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &i)| i)
            .collect();
        verts.sort_unstable();
        let f = hull.make_facet(verts, &interior);
        hull.facets.push(f);
    }

    // Far points first: they tend to be extreme and make later points interior.
    let mut order: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    let dist: Vec<T> = points
        .iter()
        .map(|p| squared_distance(p, &interior))
        .collect();
    order.sort_by(|&a, &b| {
        dist[b]
            .partial_cmp(&dist[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    for q in order {
        hull.insert(q, &interior);
    }
    Ok(hull)
}

/// Greedy choice of `dim + 1` affinely independent points, each maximizing
/// its residual against the span of the previous choices.
fn initial_simplex<T: Scalar>(points: &[Vec<T>], eps: &T) -> Option<Vec<usize>> {
    let dim = points[0].len();
    let first = (0..points.len()).min_by(|&a, &b| lex_cmp(&points[a], &points[b]))?;
    let mut chosen = vec![first];
    let mut basis: Vec<Vec<T>> = Vec::new();
    let origin = &points[first];
    for _ in 0..dim {
        let mut best: Option<(usize, T, Vec<T>)> = None;
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r: Vec<T> = p
                .iter()
                .zip(origin)
                .map(|(a, b)| a.clone() - b.clone())
                .collect();
            for u in &basis {
                let coef = dot(&r, u) / dot(u, u);
                for (rk, uk) in r.iter_mut().zip(u) {
                    *rk = rk.clone() - coef.clone() * uk.clone();
                }
            }
            let norm2 = dot(&r, &r);
            if best.as_ref().is_none_or(|b| norm2 > b.1) {
                best = Some((i, norm2, r));
            }
        }
        let (i, norm2, r) = best?;
        if norm2.is_zero() || norm2 <= eps.clone() * eps.clone() {
            return None;
        }
        chosen.push(i);
        basis.push(r);
    }
    Some(chosen)
}

impl<T: Scalar> Hull<T> {
    fn make_facet(&self, vertices: Vec<usize>, interior: &[T]) -> Facet<T> {
        let pts: Vec<&[T]> = vertices
            .iter()
            .map(|&i| self.points[i].as_slice())
            .collect();
        let mut normal = hyperplane_normal(&pts);
        let norm = T::row_norm(&normal);
        if norm.is_zero() {
            // Affinely dependent cone: keeps the ridge structure closed but is
            // never visible and contributes no volume.
            return Facet {
                vertices,
                normal,
                offset: T::zero(),
            };
        }
        for v in normal.iter_mut() {
            *v = v.clone() / norm.clone();
        }
        let mut offset = dot(&normal, pts[0]);
        if dot(&normal, interior) > offset {
            for v in normal.iter_mut() {
                *v = -v.clone();
            }
            offset = -offset;
        }
        Facet {
            vertices,
            normal,
            offset,
        }
    }

    fn insert(&mut self, q: usize, interior: &[T]) {
        let p = &self.points[q];
        let visible: Vec<bool> = self
            .facets
            .iter()
            .map(|f| dot(&f.normal, p) - f.offset.clone() > self.eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            return;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, _) in self.facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..f.vertices.len() {
                let ridge: Vec<usize> = f
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &i)| i)
                    .collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, count)| *count == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort_unstable();

        let mut keep = visible.iter().map(|v| !v);
        self.facets.retain(|_| keep.next().unwrap_or(true));
        for mut ridge in horizon {
            ridge.push(q);
            ridge.sort_unstable();
            let f = self.make_facet(ridge, interior);
            self.facets.push(f);
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn facets(&self) -> &[Facet<T>] {
        &self.facets
    }

    /// Distinct supporting hyperplanes, sorted lexicographically by normal.
    pub fn halfspaces(&self) -> Vec<(Vec<T>, T)> {
        let mut planes: Vec<(Vec<T>, T)> = self
            .facets
            .iter()
            .filter(|f| !T::row_norm(&f.normal).is_zero())
            .map(|f| (f.normal.clone(), f.offset.clone()))
            .collect();
        planes.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let tol = T::row_eq_tol() * T::from_f64(100.0);
        let mut merged: Vec<(Vec<T>, T)> = Vec::new();
        for (n, o) in planes {
            let dup = merged
                .iter()
                .rev()
                .take_while(|m| m.0[0].clone() >= n[0].clone() - tol.clone())
                .any(|m| {
                    m.0.iter()
                        .zip(&n)
                        .all(|(a, b)| (a.clone() - b.clone()).abs() <= tol)
                        && (m.1.clone() - o.clone()).abs() <= self.eps.clone() * T::from_f64(10.0)
                });
            if !dup {
                merged.push((n, o));
            }
        }
        merged
    }

    /// Indices of the extreme points: hull vertices at which the incident
    /// supporting hyperplanes pin down a single point.
    pub fn extreme_indices(&self) -> Vec<usize> {
        let planes = self.halfspaces();
        let mut candidates: Vec<usize> = self
            .facets
            .iter()
            .flat_map(|f| f.vertices.iter().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let slack = self.eps.clone() * T::from_f64(10.0);
        candidates
            .into_iter()
            .filter(|&i| {
                let p = &self.points[i];
                let tight: Vec<Vec<T>> = planes
                    .iter()
                    .filter(|(n, o)| (dot(n, p) - o.clone()).abs() <= slack)
                    .map(|(n, _)| n.clone())
                    .collect();
                rank_of(&tight, &(T::pivot_tol() * T::from_f64(1e3))) == self.dim
            })
            .collect()
    }

    /// Extreme points, sorted lexicographically.
    pub fn extreme_points(&self) -> Vec<Vec<T>> {
        let mut pts: Vec<Vec<T>> = self
            .extreme_indices()
            .into_iter()
            .map(|i| self.points[i].clone())
            .collect();
        pts.sort_by(|a, b| lex_cmp(a, b));
        pts
    }

    /// Volume by fanning simplices from the centroid of the extreme points.
    pub fn volume(&self) -> T {
        let ext = self.extreme_indices();
        let inv = T::one() / T::from_usize(ext.len().max(1));
        let center: Vec<T> = (0..self.dim)
            .map(|k| {
                ext.iter()
                    .fold(T::zero(), |acc, &i| acc + self.points[i][k].clone())
                    * inv.clone()
            })
            .collect();
        let total = self.facets.iter().fold(T::zero(), |acc, f| {
            let m: Vec<Vec<T>> = f
                .vertices
                .iter()
                .map(|&i| {
                    self.points[i]
                        .iter()
                        .zip(&center)
                        .map(|(a, c)| a.clone() - c.clone())
                        .collect()
                })
                .collect();
            acc + determinant(&m).abs()
        });
        total / factorial::<T>(self.dim)
    }
}

/// Extreme points of an arbitrary finite point set, including sets whose
/// affine hull is lower dimensional. Returns `(extreme points, affine dimension)`.
///
/// Lower-dimensional sets are projected onto a set of pivot coordinates on
/// which the projection is injective over their affine hull, so extremality
/// is preserved.
pub fn extreme_points<T: Scalar>(points: &[Vec<T>]) -> Result<(Vec<Vec<T>>, usize)> {
    match points.len() {
        0 => return Ok((Vec::new(), 0)),
        1 => return Ok((points.to_vec(), 0)),
        _ => {}
    }
    let origin = &points[0];
    let diffs: Vec<Vec<T>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(origin)
                .map(|(a, b)| a.clone() - b.clone())
                .collect()
        })
        .collect();
    let eps = distance_eps(&cloud_scale(points));
    let cols = pivot_columns(&diffs, &eps);
    let k = cols.len();
    if k == 0 {
        return Ok((vec![origin.clone()], 0));
    }
    let projected: Vec<Vec<T>> = points
        .iter()
        .map(|p| cols.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let hull = convex_hull(&projected)?;
    let mut ext: Vec<Vec<T>> = hull
        .extreme_indices()
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    ext.sort_by(|a, b| lex_cmp(a, b));
    Ok((ext, k))
}
