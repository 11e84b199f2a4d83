//! H- and V-representations of polytopes and the LP-backed operations on them.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull;
use crate::linalg::{solve, Matrix};
use crate::lp::{self, LpOutcome, LpProblem};
use crate::scalar::{dot, lex_cmp, max_abs, squared_distance, Scalar};

/// Largest dimension accepted by the exact (enumeration based) oracle.
pub const ORACLE_MAX_DIM: usize = 6;
/// Largest row count accepted by vertex enumeration.
pub const ORACLE_MAX_ROWS: usize = 40;
/// Largest point count accepted by hull construction.
pub const ORACLE_MAX_POINTS: usize = 250_000;

/// Coordinate space a polytope lives in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// One coordinate per period: the net power trajectory.
    #[default]
    Power,
    /// Charging block stacked over discharging block, `[x_in; x_out]`.
    StackedStorage,
}

/// `{x | A x <= b}` with every row of `A` normalized by [`Scalar::row_norm`].
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope<T> {
    a: Matrix<T>,
    b: Vec<T>,
    space: Space,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn volume(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::one(), |acc, (l, u)| acc * (u.clone() - l.clone()))
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }
}

/// Candidate constraint `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceQuery<T> {
    normal: Vec<T>,
    offset: T,
}

impl<T: Scalar> HalfspaceQuery<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        if normal.iter().all(Zero::is_zero) {
            return Err(Error::ZeroRow(0));
        }
        Ok(Self { normal, offset })
    }

    /// The tightest redundant constraint with this normal for `p`.
    pub fn tangent_to(p: &HPolytope<T>, normal: Vec<T>) -> Result<Self> {
        let offset = p.tangent_offset(&normal)?;
        Self::new(normal, offset)
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> &T {
        &self.offset
    }

    /// Whether `p` lies inside the half-space, i.e. the row is redundant for it.
    pub fn contains_polytope(&self, p: &HPolytope<T>) -> Result<bool> {
        let best = p.tangent_offset(&self.normal)?;
        Ok(best <= self.offset.clone() + T::feasibility_tol())
    }
}

impl<T: Scalar> HPolytope<T> {
    /// Builds a polytope, normalizing every row.
    pub fn new(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        if a.ncols() == 0 {
            return Err(Error::invalid("polytope dimension must be at least 1"));
        }
        if a.nrows() == 0 {
            return Err(Error::invalid("polytope needs at least one constraint"));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        let mut a = a;
        let mut b = b;
        for i in 0..a.nrows() {
            let norm = T::row_norm(a.row(i));
            if norm.is_zero() {
                return Err(Error::ZeroRow(i));
            }
            for v in a.row_mut(i) {
                *v = v.clone() / norm.clone();
            }
            b[i] = b[i].clone() / norm;
        }
        Ok(Self {
            a,
            b,
            space: Space::Power,
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>, b: Vec<T>) -> Result<Self> {
        let a =
            Matrix::from_rows(rows).ok_or_else(|| Error::invalid("ragged constraint matrix"))?;
        Self::new(a, b)
    }

    pub fn from_f64_rows(rows: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let a = Matrix::from_f64_rows(rows)
            .ok_or_else(|| Error::invalid("ragged constraint matrix"))?;
        Self::new(a, b.iter().map(|&v| T::from_f64(v)).collect())
    }

    /// Axis-aligned box `lower <= x <= upper`.
    pub fn from_box(lower: &[T], upper: &[T]) -> Result<Self> {
        let d = lower.len();
        if upper.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: upper.len(),
            });
        }
        let mut a = Matrix::zeros(2 * d, d);
        let mut b = Vec::with_capacity(2 * d);
        for i in 0..d {
            a[(i, i)] = T::one();
            b.push(upper[i].clone());
        }
        for i in 0..d {
            a[(d + i, i)] = -T::one();
            b.push(-lower[i].clone());
        }
        Self::new(a, b)
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dimension(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.a.row(i)
    }

    pub fn offset(&self, i: usize) -> &T {
        &self.b[i]
    }

    /// Appends `normal · x <= offset` (normalized).
    pub fn with_row(&self, normal: &[T], offset: T) -> Result<Self> {
        if normal.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: normal.len(),
            });
        }
        let norm = T::row_norm(normal);
        if norm.is_zero() {
            return Err(Error::ZeroRow(self.num_rows()));
        }
        let mut out = self.clone();
        let row: Vec<T> = normal.iter().map(|v| v.clone() / norm.clone()).collect();
        out.a.push_row(&row);
        out.b.push(offset / norm);
        Ok(out)
    }

    pub fn without_row(&self, i: usize) -> Self {
        let keep: Vec<usize> = (0..self.num_rows()).filter(|&k| k != i).collect();
        self.select_rows(&keep)
    }

    pub(crate) fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            a: self.a.select_rows(idx),
            b: idx.iter().map(|&i| self.b[i].clone()).collect(),
            space: self.space,
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.dimension() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: len,
            })
        }
    }

    /// Largest constraint violation `max_i (a_i · x - b_i)`, or zero.
    pub fn max_violation(&self, x: &[T]) -> T {
        self.a
            .rows()
            .zip(&self.b)
            .map(|(r, b)| dot(r, x) - b.clone())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn contains(&self, x: &[T]) -> Result<bool> {
        self.check_dim(x.len())?;
        let tol = T::feasibility_tol();
        Ok(self
            .a
            .rows()
            .zip(&self.b)
            .all(|(r, b)| dot(r, x) <= b.clone() + tol.clone()))
    }

    /// `maximize objective · x` over the polytope.
    pub fn maximize(&self, objective: &[T]) -> Result<LpOutcome<T>> {
        self.check_dim(objective.len())?;
        let problem = LpProblem::new(objective.to_vec(), self.a.clone(), self.b.clone())?;
        lp::solve(&problem)
    }

    /// Support point: the maximizing value and point in direction `normal`.
    pub fn support(&self, normal: &[T]) -> Result<(T, Vec<T>)> {
        match self.maximize(normal)? {
            LpOutcome::Optimal { value, optimizer } => Ok((value, optimizer)),
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Smallest `b*` with `P ⊆ {x | normal · x <= b*}`.
    pub fn tangent_offset(&self, normal: &[T]) -> Result<T> {
        self.support(normal).map(|(v, _)| v)
    }

    pub fn feasible_point(&self) -> Result<Option<Vec<T>>> {
        lp::feasible_point(&self.a, &self.b)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_point()?.is_none())
    }

    /// Whether dropping row `i` leaves the solution set unchanged.
    ///
    /// Rows of an empty polytope, and rows whose removal empties nothing but
    /// makes the remainder unbounded in that direction, are non-redundant.
    pub fn is_redundant(&self, i: usize) -> Result<bool> {
        if i >= self.num_rows() {
            return Err(Error::invalid(format!(
                "row index {i} out of range for {} rows",
                self.num_rows()
            )));
        }
        if self.num_rows() == 1 {
            return Ok(false);
        }
        let rest = self.without_row(i);
        match rest.maximize(self.row(i))? {
            LpOutcome::Optimal { value, .. } => {
                Ok(value <= self.b[i].clone() + T::feasibility_tol())
            }
            LpOutcome::Infeasible | LpOutcome::Unbounded => Ok(false),
        }
    }

    /// Same set with every redundant row removed. Idempotent.
    pub fn remove_redundancy(&self) -> Result<Self> {
        if self.is_empty()? {
            return Err(Error::EmptyPolytope);
        }
        let mut current = self.clone();
        let mut i = 0;
        while i < current.num_rows() {
            if current.is_redundant(i)? {
                current = current.without_row(i);
            } else {
                i += 1;
            }
        }
        Ok(current)
    }

    pub fn bounding_box(&self) -> Result<BoundingBox<T>> {
        let d = self.dimension();
        let mut lower = Vec::with_capacity(d);
        let mut upper = Vec::with_capacity(d);
        for k in 0..d {
            let mut e = vec![T::zero(); d];
            e[k] = T::one();
            upper.push(self.tangent_offset(&e)?);
            e[k] = -T::one();
            lower.push(-self.tangent_offset(&e)?);
        }
        Ok(BoundingBox { lower, upper })
    }

    pub fn is_bounded(&self) -> Result<bool> {
        match self.bounding_box() {
            Ok(_) => Ok(true),
            Err(Error::Unbounded) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// All vertices, by solving every `D`-row subsystem and keeping the
    /// feasible solutions. Output is deduplicated and sorted lexicographically.
    pub fn enumerate_vertices(&self) -> Result<VPolytope<T>> {
        let d = self.dimension();
        let n = self.num_rows();
        if d > ORACLE_MAX_DIM || n > ORACLE_MAX_ROWS {
            return Err(Error::OracleScale(format!(
                "vertex enumeration limited to D <= {ORACLE_MAX_DIM} and N <= {ORACLE_MAX_ROWS}, got D = {d}, N = {n}"
            )));
        }
        if n < d {
            return Ok(VPolytope::empty(d));
        }
        let singular = T::pivot_tol() * T::from_f64(10.0);
        let scale = max_abs(&self.b);
        let slack = T::feasibility_tol() * (T::one() + scale);
        let candidates: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut found = Vec::new();
                let mut rest: Vec<usize> = Vec::with_capacity(d);
                rest.push(first);
                self.subsets_from(first + 1, d, &mut rest, &singular, &slack, &mut found);
                found
            })
            .collect();
        Ok(VPolytope::from_candidates(d, candidates))
    }

    fn subsets_from(
        &self,
        start: usize,
        d: usize,
        chosen: &mut Vec<usize>,
        singular: &T,
        slack: &T,
        found: &mut Vec<Vec<T>>,
    ) {
        if chosen.len() == d {
            let m: Vec<Vec<T>> = chosen.iter().map(|&i| self.row(i).to_vec()).collect();
            let rhs: Vec<T> = chosen.iter().map(|&i| self.b[i].clone()).collect();
            if let Some(x) = solve(&m, &rhs, singular) {
                if self.max_violation(&x) <= *slack {
                    found.push(x);
                }
            }
            return;
        }
        let need = d - chosen.len();
        for i in start..=(self.num_rows() - need) {
            chosen.push(i);
            self.subsets_from(i + 1, d, chosen, singular, slack, found);
            chosen.pop();
        }
    }

    /// Re-expresses the polytope over another scalar type, re-normalizing rows.
    pub fn cast<U: Scalar>(&self) -> HPolytope<U> {
        let a = self.a.map(|v| U::from_f64(v.to_f64()));
        let b = self.b.iter().map(|v| U::from_f64(v.to_f64())).collect();
        HPolytope::new(a, b)
            .expect("normalized rows stay nonzero under conversion")
            .with_space(self.space)
    }

    /// `{x + shift | x in P}`.
    pub fn translate(&self, shift: &[T]) -> Result<Self> {
        self.check_dim(shift.len())?;
        let mut out = self.clone();
        for (i, b) in out.b.iter_mut().enumerate() {
            *b = b.clone() + dot(self.a.row(i), shift);
        }
        Ok(out)
    }

    /// `{factor * x | x in P}` for `factor > 0`.
    pub fn scale(&self, factor: &T) -> Result<Self> {
        if *factor <= T::zero() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let mut out = self.clone();
        for b in out.b.iter_mut() {
            *b = b.clone() * factor.clone();
        }
        Ok(out)
    }

    /// Whether `other ⊆ self`, via tangent offsets of every row of `self`.
    pub fn contains_polytope(&self, other: &HPolytope<T>) -> Result<bool> {
        Ok(self.containment_gap(other)? <= T::feasibility_tol())
    }

    /// `max_i (h_other(a_i) - b_i)` over the rows of `self`: positive when
    /// `other` pokes out of `self`.
    pub fn containment_gap(&self, other: &HPolytope<T>) -> Result<T> {
        self.check_dim(other.dimension())?;
        let mut gap: Option<T> = None;
        for (r, b) in self.a.rows().zip(&self.b) {
            let g = other.tangent_offset(r)? - b.clone();
            gap = Some(match gap {
                Some(m) if m >= g => m,
                _ => g,
            });
        }
        Ok(gap.unwrap_or_else(T::zero))
    }

    /// Mutual containment check; returns the larger of the two gaps.
    pub fn set_distance(&self, other: &HPolytope<T>) -> Result<T> {
        let g1 = self.containment_gap(other)?;
        let g2 = other.containment_gap(self)?;
        Ok(if g1 > g2 { g1 } else { g2 })
    }
}

/// Finite vertex list whose convex hull is the polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope<T> {
    dim: usize,
    vertices: Vec<Vec<T>>,
}

impl<T: Scalar> VPolytope<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vertices: Vec::new(),
        }
    }

    /// Deduplicates and sorts `points` without removing non-extreme ones.
    fn from_candidates(dim: usize, points: Vec<Vec<T>>) -> Self {
        Self {
            dim,
            vertices: dedup_points(points, &T::merge_tol()),
        }
    }

    /// Convex hull of `points`, reduced to its extreme points.
    pub fn from_points(points: Vec<Vec<T>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("empty point set"))?;
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        if points.len() > ORACLE_MAX_POINTS {
            return Err(Error::OracleScale(format!(
                "hull construction limited to {ORACLE_MAX_POINTS} points, got {}",
                points.len()
            )));
        }
        let unique = dedup_points(points, &T::merge_tol());
        let (vertices, _) = hull::extreme_points(&unique)?;
        Ok(Self { dim, vertices })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Dimension of the affine hull of the vertices.
    pub fn affine_dimension(&self) -> usize {
        if self.vertices.len() < 2 {
            return 0;
        }
        let origin = &self.vertices[0];
        let diffs: Vec<Vec<T>> = self.vertices[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(origin)
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect()
            })
            .collect();
        let scale = self
            .vertices
            .iter()
            .map(|v| max_abs(v))
            .fold(T::one(), |m, v| if v > m { v } else { m });
        crate::linalg::rank_of(&diffs, &(T::feasibility_tol() * T::from_f64(1e-2) * scale))
    }

    /// Minimal H-representation of the hull. Requires a full-dimensional set.
    pub fn hull_to_h(&self) -> Result<HPolytope<T>> {
        if self.dim > ORACLE_MAX_DIM || self.vertices.len() > ORACLE_MAX_POINTS {
            return Err(Error::OracleScale(format!(
                "facet enumeration limited to D <= {ORACLE_MAX_DIM} and {ORACLE_MAX_POINTS} points, got D = {}, {} points",
                self.dim,
                self.vertices.len()
            )));
        }
        let hull = hull::convex_hull(&self.vertices)?;
        let (rows, offsets): (Vec<Vec<T>>, Vec<T>) = hull.halfspaces().into_iter().unzip();
        HPolytope::from_rows(rows, offsets)
    }

    /// Random convex combination of the vertices, with weights uniform on
    /// the probability simplex.
    pub fn random_member<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        assert!(
            !self.vertices.is_empty(),
            "cannot sample an empty vertex set"
        );
        let w: Vec<f64> = self
            .vertices
            .iter()
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = w.iter().sum();
        let mut x = vec![T::zero(); self.dim];
        for (v, wi) in self.vertices.iter().zip(&w) {
            let wi = T::from_f64(wi / total);
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi = xi.clone() + wi.clone() * vi.clone();
            }
        }
        x
    }

    /// Whether every vertex matches one of `other`'s within `tol` and vice versa.
    pub fn same_vertices(&self, other: &VPolytope<T>, tol: &T) -> bool {
        let tol2 = tol.clone() * tol.clone();
        let covered = |a: &[Vec<T>], b: &[Vec<T>]| {
            a.iter()
                .all(|p| b.iter().any(|q| squared_distance(p, q) <= tol2))
        };
        self.dim == other.dim
            && covered(&self.vertices, &other.vertices)
            && covered(&other.vertices, &self.vertices)
    }
}

/// Sorts points lexicographically and merges those within `tol` (Euclidean).
pub fn dedup_points<T: Scalar>(mut points: Vec<Vec<T>>, tol: &T) -> Vec<Vec<T>> {
    points.sort_by(|a, b| lex_cmp(a, b));
    let tol2 = tol.clone() * tol.clone();
    let mut kept: Vec<Vec<T>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = kept
            .iter()
            .rev()
            .take_while(|k| k[0].clone() >= p[0].clone() - tol.clone())
            .any(|k| squared_distance(k, &p) <= tol2);
        if !dup {
            kept.push(p);
        }
    }
    kept
}

/// On-disk polytope layout.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolytopeFile {
    pub dimension: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_power_space")]
    pub space: Space,
}

fn is_power_space(s: &Space) -> bool {
    *s == Space::Power
}

impl PolytopeFile {
    /// Writer form: normalized rows sorted lexicographically.
    pub fn from_polytope<T: Scalar>(p: &HPolytope<T>) -> Self {
        let mut rows: Vec<(Vec<f64>, f64)> =
            p.a.rows()
                .zip(&p.b)
                .map(|(r, b)| {
                    let r64: Vec<f64> = r.iter().map(Scalar::to_f64).collect();
                    let n = f64::row_norm(&r64);
                    (r64.iter().map(|v| v / n).collect(), b.to_f64() / n)
                })
                .collect();
        rows.sort_by(|x, y| lex_cmp(&x.0, &y.0).then(x.1.total_cmp(&y.1)));
        let (a, b) = rows.into_iter().unzip();
        Self {
            dimension: p.dimension(),
            a,
            b,
            space: p.space,
        }
    }

    pub fn to_polytope<T: Scalar>(&self) -> Result<HPolytope<T>> {
        if let Some(bad) = self.a.iter().find(|r| r.len() != self.dimension) {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: bad.len(),
            });
        }
        Ok(HPolytope::<T>::from_f64_rows(&self.a, &self.b)?.with_space(self.space))
    }
}

impl HPolytope<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PolytopeFile::from_polytope(self))
            .expect("polytope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolytopeFile = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("polytope JSON: {e}")))?;
        file.to_polytope()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn triangle() -> HPolytope<f64> {
        HPolytope::<f64>::from_f64_rows(
            &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            &[0.0, 0.0, 1.0],
        )
        .unwrap()
    }

    fn unit_square() -> HPolytope<f64> {
        HPolytope::<f64>::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    /// Right triangle with vertices (1,1), (2,1), (1,2).
    fn small_triangle() -> HPolytope<f64> {
        HPolytope::<f64>::from_f64_rows(
            &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            &[-1.0, -1.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn membership() {
        let t = triangle();
        assert!(t.contains(&[0.25, 0.25]).unwrap());
        assert!(!t.contains(&[1.0, 1.0]).unwrap());
        assert!(t.contains(&[1.0, 0.0]).unwrap());
        assert!(matches!(
            t.contains(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rows_are_unit_norm() {
        let t = triangle();
        let r = t.row(2);
        assert!((r[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.offset(2) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn zero_row_rejected() {
        let err = HPolytope::<f64>::from_f64_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]], &[1.0, 1.0])
            .unwrap_err();
        assert_eq!(err, Error::ZeroRow(1));
    }

    #[test]
    fn tangent_offsets() {
        assert!((small_triangle().tangent_offset(&[1.0, 1.0]).unwrap() - 3.0).abs() < 1e-12);
        assert!((unit_square().tangent_offset(&[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        let p2 = HPolytope::<f64>::from_f64_rows(
            &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            &[-2.0, -1.0, 5.0],
        )
        .unwrap();
        assert!((p2.tangent_offset(&[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_offset_errors() {
        let empty =
            HPolytope::<f64>::from_f64_rows(&[vec![1.0], vec![-1.0]], &[0.0, -1.0]).unwrap();
        assert_eq!(
            empty.tangent_offset(&[1.0]).unwrap_err(),
            Error::EmptyPolytope
        );
        let half = HPolytope::<f64>::from_f64_rows(&[vec![-1.0]], &[0.0]).unwrap();
        assert_eq!(half.tangent_offset(&[1.0]).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn redundancy() {
        let sq = unit_square().with_row(&[1.0, 0.0], 5.0).unwrap();
        assert!(sq.is_redundant(4).unwrap());
        assert!(!sq.is_redundant(0).unwrap());
        let dup = small_triangle().with_row(&[1.0, 1.0], 3.0).unwrap();
        assert!(dup.is_redundant(3).unwrap());
    }

    #[test]
    fn redundancy_of_empty_polytope_is_false() {
        let empty =
            HPolytope::<f64>::from_f64_rows(&[vec![1.0], vec![-1.0], vec![1.0]], &[0.0, -1.0, 3.0])
                .unwrap();
        assert!(!empty.is_redundant(2).unwrap());
        assert_eq!(empty.remove_redundancy().unwrap_err(), Error::EmptyPolytope);
    }

    #[test]
    fn doubled_square_prunes_to_four_rows() {
        let sq = unit_square();
        let mut rows = sq.a().to_rows();
        rows.extend(sq.a().to_rows());
        let mut b = sq.b().to_vec();
        b.extend_from_slice(sq.b());
        let doubled = HPolytope::<f64>::from_rows(rows, b).unwrap();
        let pruned = doubled.remove_redundancy().unwrap();
        assert_eq!(pruned.num_rows(), 4);
        assert_eq!(pruned.remove_redundancy().unwrap(), pruned);
        assert_eq!(triangle().remove_redundancy().unwrap(), triangle());
    }

    #[test]
    fn bounding_boxes() {
        let bb = small_triangle().bounding_box().unwrap();
        assert!((bb.lower[0] - 1.0).abs() < 1e-12 && (bb.lower[1] - 1.0).abs() < 1e-12);
        assert!((bb.upper[0] - 2.0).abs() < 1e-12 && (bb.upper[1] - 2.0).abs() < 1e-12);
        let sq = unit_square().bounding_box().unwrap();
        assert_eq!(sq.lower, vec![0.0, 0.0]);
        assert_eq!(sq.upper, vec![1.0, 1.0]);
    }

    #[test]
    fn boundedness() {
        assert!(unit_square().is_bounded().unwrap());
        let half = HPolytope::<f64>::from_f64_rows(&[vec![-1.0]], &[0.0]).unwrap();
        assert!(!half.is_bounded().unwrap());
    }

    #[test]
    fn triangle_vertices() {
        let v = triangle().enumerate_vertices().unwrap();
        assert_eq!(v.vertices().len(), 3);
        let expected = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        for (got, want) in v.vertices().iter().zip(expected) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_has_eight_vertices() {
        let cube = HPolytope::<f64>::from_box(&[0.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(cube.enumerate_vertices().unwrap().len(), 8);
    }

    #[test]
    fn enumeration_guard() {
        let big = HPolytope::<f64>::from_box(&[0.0; 7], &[1.0; 7]).unwrap();
        assert!(matches!(
            big.enumerate_vertices(),
            Err(Error::OracleScale(_))
        ));
    }

    #[test]
    fn hull_of_triangle_vertices() {
        let v = VPolytope::<f64>::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        let h = v.hull_to_h().unwrap();
        assert_eq!(h.num_rows(), 3);
        assert!(h.set_distance(&triangle()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hull_of_square_corners() {
        let v = VPolytope::<f64>::from_points(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(v.hull_to_h().unwrap().num_rows(), 4);
    }

    #[test]
    fn flat_hull_rejected() {
        let v = VPolytope::<f64>::from_points(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(v.hull_to_h().unwrap_err(), Error::LowerDimensional);
        assert_eq!(v.affine_dimension(), 1);
    }

    #[test]
    fn exact_vertices_of_offset_triangle() {
        let p2: HPolytope<BigRational> = HPolytope::from_f64_rows(
            &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            &[-2.0, -1.0, 5.0],
        )
        .unwrap();
        let v = p2.enumerate_vertices().unwrap();
        let want: Vec<Vec<BigRational>> = [[2.0, 1.0], [2.0, 3.0], [4.0, 1.0]]
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_f64(x)).collect())
            .collect();
        assert_eq!(v.vertices(), want.as_slice());
    }

    #[test]
    fn json_round_trip_sorts_rows() {
        let t = triangle();
        let back = HPolytope::from_json(&t.to_json()).unwrap();
        assert_eq!(back.num_rows(), 3);
        assert!(back.set_distance(&t).unwrap().abs() < 1e-12);
        let file = PolytopeFile::from_polytope(&t);
        assert_eq!(file.a[0], vec![-1.0, 0.0]);
    }

    #[test]
    fn halfspace_inclusion() {
        let q = HalfspaceQuery::new(vec![1.0, 1.0], 3.0).unwrap();
        assert!(q.contains_polytope(&small_triangle()).unwrap());
        let tight = HalfspaceQuery::tangent_to(&small_triangle(), vec![1.0, 0.0]).unwrap();
        assert!((tight.offset() - 2.0).abs() < 1e-12);
        assert!(HalfspaceQuery::new(vec![0.0, 0.0], 1.0).is_err());
    }
}
