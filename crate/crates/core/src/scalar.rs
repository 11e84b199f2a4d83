//! Scalar abstraction shared by the LP engine, polytope routines and hull code.
//!
//! Floating types carry absolute/relative tolerances; the exact rational type
//! uses zero tolerances so every predicate is decided exactly.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic is exact and all tolerances are zero.
    const EXACT: bool;

    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Absolute slack allowed on constraint residuals.
    fn feasibility_tol() -> Self;

    /// Relative tolerance for comparing objective values.
    fn value_tol() -> Self;

    /// Entries at or below this magnitude are never used as pivots.
    fn pivot_tol() -> Self;

    /// Euclidean distance under which two vertices are merged.
    fn merge_tol() -> Self;

    /// Per-component tolerance for treating two normalized rows as equal.
    fn row_eq_tol() -> Self;

    /// Norm used to normalize constraint rows.
    ///
    /// Euclidean for floating types. The exact type has no square root, so it
    /// uses the max-abs norm, which keeps integer rows integral.
    fn row_norm(row: &[Self]) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

macro_rules! impl_float_scalar {
    ($t:ty, $feas:expr, $val:expr, $piv:expr, $merge:expr, $roweq:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_f64(x: f64) -> Self {
                x as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn feasibility_tol() -> Self {
                $feas
            }

            fn value_tol() -> Self {
                $val
            }

            fn pivot_tol() -> Self {
                $piv
            }

            fn merge_tol() -> Self {
                $merge
            }

            fn row_eq_tol() -> Self {
                $roweq
            }

            fn row_norm(row: &[Self]) -> Self {
                row.iter().map(|v| v * v).sum::<$t>().sqrt()
            }
        }
    };
}

impl_float_scalar!(f64, 1e-8, 1e-7, 1e-11, 1e-7, 1e-9);
impl_float_scalar!(f32, 1e-3, 1e-3, 1e-6, 1e-3, 1e-5);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value required for exact conversion")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Huge numerators/denominators: fall back to a ratio of floats.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn feasibility_tol() -> Self {
        Self::zero()
    }

    fn value_tol() -> Self {
        Self::zero()
    }

    fn pivot_tol() -> Self {
        Self::zero()
    }

    fn merge_tol() -> Self {
        Self::zero()
    }

    fn row_eq_tol() -> Self {
        Self::zero()
    }

    fn row_norm(row: &[Self]) -> Self {
        row.iter()
            .map(|v| v.abs())
            .fold(Self::zero(), |m, v| if v > m { v } else { m })
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values
        .iter()
        .map(|v| v.abs())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

/// `|a - b| <= value_tol * max(1, |a|, |b|)`.
pub fn values_close<T: Scalar>(a: &T, b: &T) -> bool {
    let scale = [T::one(), a.abs(), b.abs()]
        .into_iter()
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    (a.clone() - b.clone()).abs() <= T::value_tol() * scale
}

pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let d = x.clone() - y.clone();
        acc + d.clone() * d
    })
}

/// Lexicographic comparison; incomparable pairs (NaN) sort as equal.
pub fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

pub fn from_f64_vec<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::from_f64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_norm_is_max_abs() {
        let row: Vec<BigRational> = from_f64_vec(&[1.0, -3.0, 2.0]);
        assert_eq!(BigRational::row_norm(&row), BigRational::from_f64(3.0));
    }

    #[test]
    fn float_norm_is_euclidean() {
        assert!((f64::row_norm(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn exact_round_trip_of_dyadic_values() {
        let x = 0.1_f64;
        let r = BigRational::from_f64(x);
        assert_eq!(Scalar::to_f64(&r), x);
    }

    #[test]
    fn close_values_use_relative_scale() {
        assert!(values_close(&1e9, &(1e9 + 1.0)));
        assert!(!values_close(&1.0, &1.001));
    }
}
