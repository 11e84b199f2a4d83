//! Dense simplex solver for `maximize c·x subject to A x <= b` with free `x`.
//!
//! Free variables are split as `x = x⁺ - x⁻`, one slack is added per row and
//! infeasible starts are repaired with a single auxiliary column that enters
//! on the most violated row. Pivoting follows Bland's rule throughout, so the
//! method terminates on degenerate problems; a pivot budget of `50 (N + D)`
//! turns numerical stalls into an error instead of a wrong answer.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};

#[derive(Clone, Debug)]
pub struct LpProblem<T> {
    objective: Vec<T>,
    constraints: Matrix<T>,
    rhs: Vec<T>,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(objective: Vec<T>, constraints: Matrix<T>, rhs: Vec<T>) -> Result<Self> {
        if objective.len() != constraints.ncols() {
            return Err(Error::DimensionMismatch {
                expected: constraints.ncols(),
                found: objective.len(),
            });
        }
        if rhs.len() != constraints.nrows() {
            return Err(Error::DimensionMismatch {
                expected: constraints.nrows(),
                found: rhs.len(),
            });
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
        })
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &Matrix<T> {
        &self.constraints
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn dimension(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> Result<LpOutcome<T>> {
        solve(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { value: T, optimizer: Vec<T> },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimal_value(&self) -> Option<&T> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn optimizer(&self) -> Option<&[T]> {
        match self {
            LpOutcome::Optimal { optimizer, .. } => Some(optimizer),
            _ => None,
        }
    }
}

/// Pivot budget for a problem with `rows` constraints in `dim` variables.
pub fn iteration_cap(rows: usize, dim: usize) -> usize {
    50 * (rows + dim)
}

pub fn solve<T: Scalar>(problem: &LpProblem<T>) -> Result<LpOutcome<T>> {
    let mut tableau = Tableau::new(problem);
    if !tableau.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    if !tableau.phase_two(&problem.objective)? {
        return Ok(LpOutcome::Unbounded);
    }
    let optimizer = tableau.primal_point();
    let value = dot(&problem.objective, &optimizer);
    Ok(LpOutcome::Optimal { value, optimizer })
}

/// Finds any point of `{x | A x <= b}`, or `None` when the set is empty.
pub fn feasible_point<T: Scalar>(constraints: &Matrix<T>, rhs: &[T]) -> Result<Option<Vec<T>>> {
    let problem = LpProblem::new(
        vec![T::zero(); constraints.ncols()],
        constraints.clone(),
        rhs.to_vec(),
    )?;
    match solve(&problem)? {
        LpOutcome::Optimal { optimizer, .. } => Ok(Some(optimizer)),
        LpOutcome::Infeasible => Ok(None),
        // A zero objective cannot be unbounded.
        LpOutcome::Unbounded => unreachable!("zero objective reported unbounded"),
    }
}

struct Tableau<T> {
    dim: usize,
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Column of the auxiliary variable, if phase one was needed.
    aux: Option<usize>,
    ncols: usize,
    pivots: usize,
    cap: usize,
    reduced: Vec<T>,
}

impl<T: Scalar> Tableau<T> {
    fn new(problem: &LpProblem<T>) -> Self {
        let n = problem.constraints.nrows();
        let d = problem.dimension();
        let needs_aux = problem.rhs.iter().any(|b| *b < T::zero());
        let ncols = 2 * d + n + usize::from(needs_aux);
        let rows = (0..n)
            .map(|i| {
                let mut row = Vec::with_capacity(ncols + 1);
                let a = problem.constraints.row(i);
                row.extend(a.iter().cloned());
                row.extend(a.iter().map(|v| -v.clone()));
                row.extend((0..n).map(|k| if k == i { T::one() } else { T::zero() }));
                if needs_aux {
                    row.push(-T::one());
                }
                row.push(problem.rhs[i].clone());
                row
            })
            .collect();
        Self {
            dim: d,
            rows,
            basis: (0..n).map(|i| 2 * d + i).collect(),
            aux: needs_aux.then_some(ncols - 1),
            ncols,
            pivots: 0,
            cap: iteration_cap(n, d),
            reduced: vec![T::zero(); ncols],
        }
    }

    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.ncols]
    }

    fn optimality_tol() -> T {
        T::pivot_tol() * T::from_f64(100.0)
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.cap {
            return Err(Error::IterationLimit(self.cap));
        }
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            if !T::EXACT {
                r[col] = T::zero();
                let last = r.len() - 1;
                if r[last] < T::zero() && r[last] > -T::feasibility_tol() * T::from_f64(1e-3) {
                    r[last] = T::zero();
                }
            }
        }
        let f = self.reduced[col].clone();
        if !f.is_zero() {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            if !T::EXACT {
                self.reduced[col] = T::zero();
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    fn set_costs(&mut self, cost: &[T]) {
        let mut reduced = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, r) in reduced.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *r = r.clone() - cb.clone() * a.clone();
                }
            }
        }
        self.reduced = reduced;
    }

    /// Runs Bland-rule iterations on the current costs. Returns `false` when
    /// the objective is unbounded.
    fn iterate(&mut self, forbidden: Option<usize>) -> Result<bool> {
        let opt_tol = Self::optimality_tol();
        let piv_tol = T::pivot_tol();
        loop {
            let entering =
                (0..self.ncols).find(|&j| Some(j) != forbidden && self.reduced[j] > opt_tol);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if *a <= piv_tol {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        let tie_tol = piv_tol.clone() * (T::one() + best_ratio.abs());
                        let diff = ratio.clone() - best_ratio.clone();
                        let wins = diff < -tie_tol.clone()
                            || (diff.abs() <= tie_tol && self.basis[i] < self.basis[best]);
                        if wins {
                            Some((i, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            match leaving {
                None => return Ok(false),
                Some((row, _)) => self.pivot(row, col)?,
            }
        }
    }

    /// Drives the auxiliary variable to zero. Returns `false` if impossible.
    fn phase_one(&mut self) -> Result<bool> {
        let Some(aux) = self.aux else {
            return Ok(true);
        };
        // Enter the auxiliary column on the most negative right-hand side.
        let mut start = 0;
        for i in 1..self.rows.len() {
            if *self.rhs(i) < *self.rhs(start) {
                start = i;
            }
        }
        self.pivot(start, aux)?;
        let mut cost = vec![T::zero(); self.ncols];
        cost[aux] = -T::one();
        self.set_costs(&cost);
        self.iterate(None)?;

        let aux_value = self
            .basis
            .iter()
            .position(|&b| b == aux)
            .map_or(T::zero(), |i| self.rhs(i).clone());
        if aux_value > T::feasibility_tol() {
            return Ok(false);
        }
        if let Some(row) = self.basis.iter().position(|&b| b == aux) {
            let candidate = (0..self.ncols)
                .filter(|&j| j != aux)
                .map(|j| (j, self.rows[row][j].abs()))
                .filter(|(_, v)| *v > T::pivot_tol())
                .fold(None::<(usize, T)>, |best, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                });
            if let Some((col, _)) = candidate {
                self.pivot(row, col)?;
            }
        }
        Ok(true)
    }

    fn phase_two(&mut self, objective: &[T]) -> Result<bool> {
        let mut cost = vec![T::zero(); self.ncols];
        for (k, c) in objective.iter().enumerate() {
            cost[k] = c.clone();
            cost[self.dim + k] = -c.clone();
        }
        self.set_costs(&cost);
        self.iterate(self.aux)
    }

    fn primal_point(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.dim {
                x[b] = x[b].clone() + self.rhs(i).clone();
            } else if b < 2 * self.dim {
                let k = b - self.dim;
                x[k] = x[k].clone() - self.rhs(i).clone();
            }
        }
        x
    }
}
