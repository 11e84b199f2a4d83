//! Physical load parameters and their polytope constructions.
//!
//! Every constructor returns an [`HPolytope`] over power trajectories, one
//! coordinate per period (storage can also be expressed over the stacked
//! charge/discharge space). Period indices in parameters are 1-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polytope::{HPolytope, Space};
use crate::scalar::Scalar;

fn one() -> f64 {
    1.0
}

/// Which coordinates a storage polytope is written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageSpace {
    /// `[x_in; x_out]` in `R^{2D}`.
    #[default]
    Stacked,
    /// Net power `x_in + x_out` in `R^D`; requires `eta_in == eta_out`.
    Net,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageParams {
    /// Charging limit per period, kW.
    pub p_max: Vec<f64>,
    /// Discharging limit per period, kW (non-positive).
    pub p_min: Vec<f64>,
    /// Energy capacity `S`, kWh.
    pub capacity: f64,
    /// Initial energy `S_0`, kWh.
    pub initial: f64,
    /// Fraction of stored energy retained per period.
    #[serde(default = "one")]
    pub dissipation: f64,
    #[serde(default = "one")]
    pub eta_in: f64,
    #[serde(default = "one")]
    pub eta_out: f64,
    #[serde(default)]
    pub space: StorageSpace,
}

impl StorageParams {
    pub fn horizon(&self) -> usize {
        self.p_max.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.horizon();
        if d == 0 {
            return Err(Error::invalid(
                "storage horizon must be at least one period",
            ));
        }
        if self.p_min.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.p_min.len(),
            });
        }
        if self.p_max.iter().any(|&p| !(p >= 0.0)) || self.p_min.iter().any(|&p| !(p <= 0.0)) {
            return Err(Error::invalid(
                "storage power limits need p_min <= 0 <= p_max",
            ));
        }
        if !(0.0 <= self.initial && self.initial <= self.capacity) {
            return Err(Error::invalid("storage needs 0 <= initial <= capacity"));
        }
        if !(self.dissipation > 0.0 && self.dissipation <= 1.0) {
            return Err(Error::invalid("storage dissipation must lie in (0, 1]"));
        }
        for eta in [self.eta_in, self.eta_out] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid("storage efficiencies must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    /// Energy trajectory `e(j)` for a stacked trajectory, starting from `S_0`.
    pub fn simulate(&self, x_in: &[f64], x_out: &[f64]) -> Vec<f64> {
        let mut e = self.initial;
        x_in.iter()
            .zip(x_out)
            .map(|(i, o)| {
                e = self.dissipation * e + self.eta_in * i + self.eta_out * o;
                e
            })
            .collect()
    }
}

/// Lower-triangular `Γ` with `Γ[j][i] = factor^(j-i)` for `i <= j`.
pub fn decay_matrix<T: Scalar>(factor: &T, d: usize) -> Vec<Vec<T>> {
    let mut powers = vec![T::one()];
    for k in 1..d {
        let next = powers[k - 1].clone() * factor.clone();
        powers.push(next);
    }
    (0..d)
        .map(|j| {
            (0..d)
                .map(|i| {
                    if i <= j {
                        powers[j - i].clone()
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Storage polytope over the stacked space `[x_in; x_out]`.
pub fn build_storage<T: Scalar>(p: &StorageParams) -> Result<HPolytope<T>> {
    p.validate()?;
    let d = p.horizon();
    let alpha = T::from_f64(p.dissipation);
    let gamma = decay_matrix(&alpha, d);
    let eta_in = T::from_f64(p.eta_in);
    let eta_out = T::from_f64(p.eta_out);

    let mut a = Matrix::zeros(6 * d, 2 * d);
    let mut b = Vec::with_capacity(6 * d);
    for i in 0..d {
        a[(i, i)] = T::one();
        b.push(T::from_f64(p.p_max[i]));
    }
    for i in 0..d {
        a[(d + i, i)] = -T::one();
        b.push(T::zero());
    }
    for i in 0..d {
        a[(2 * d + i, d + i)] = T::one();
        b.push(T::zero());
    }
    for i in 0..d {
        a[(3 * d + i, d + i)] = -T::one();
        b.push(-T::from_f64(p.p_min[i]));
    }
    let (upper, lower) = energy_offsets(p, &alpha);
    for j in 0..d {
        for i in 0..d {
            a[(4 * d + j, i)] = eta_in.clone() * gamma[j][i].clone();
            a[(4 * d + j, d + i)] = eta_out.clone() * gamma[j][i].clone();
            a[(5 * d + j, i)] = -(eta_in.clone() * gamma[j][i].clone());
            a[(5 * d + j, d + i)] = -(eta_out.clone() * gamma[j][i].clone());
        }
    }
    b.extend(upper);
    b.extend(lower);
    Ok(HPolytope::new(a, b)?.with_space(Space::StackedStorage))
}

/// `(S - α^j S_0, α^j S_0)` for `j = 1..D`.
fn energy_offsets<T: Scalar>(p: &StorageParams, alpha: &T) -> (Vec<T>, Vec<T>) {
    let cap = T::from_f64(p.capacity);
    let mut carried = T::from_f64(p.initial);
    let mut upper = Vec::with_capacity(p.horizon());
    let mut lower = Vec::with_capacity(p.horizon());
    for _ in 0..p.horizon() {
        carried = carried * alpha.clone();
        upper.push(cap.clone() - carried.clone());
        lower.push(carried.clone());
    }
    (upper, lower)
}

/// Storage polytope over net power `x = x_in + x_out`.
///
/// With equal efficiencies the energy rows depend on `x_in + x_out` only and
/// any `P_min <= x <= P_max` splits into admissible charge and discharge
/// parts, so this is the exact projection of [`build_storage`].
pub fn build_storage_net<T: Scalar>(p: &StorageParams) -> Result<HPolytope<T>> {
    p.validate()?;
    if p.eta_in != p.eta_out {
        return Err(Error::invalid(
            "net-power storage needs eta_in == eta_out; use the stacked space",
        ));
    }
    let d = p.horizon();
    let alpha = T::from_f64(p.dissipation);
    let gamma = decay_matrix(&alpha, d);
    let eta = T::from_f64(p.eta_in);
    let mut a = Matrix::zeros(4 * d, d);
    let mut b = Vec::with_capacity(4 * d);
    for i in 0..d {
        a[(i, i)] = T::one();
        b.push(T::from_f64(p.p_max[i]));
    }
    for i in 0..d {
        a[(d + i, i)] = -T::one();
        b.push(-T::from_f64(p.p_min[i]));
    }
    for j in 0..d {
        for i in 0..=j {
            a[(2 * d + j, i)] = eta.clone() * gamma[j][i].clone();
            a[(3 * d + j, i)] = -(eta.clone() * gamma[j][i].clone());
        }
    }
    let (upper, lower) = energy_offsets(p, &alpha);
    b.extend(upper);
    b.extend(lower);
    HPolytope::new(a, b)
}

/// Thermostatically controlled load, per-period discrete model
/// `θ(t+1) = (1 - a) θ(t) + a θ_a(t) - b x(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TclParams {
    /// Per-period thermal coupling, `1 / (R C)` for a one-hour period.
    pub a: f64,
    /// Temperature change per kWh of electrical energy, `η / C`.
    pub b: f64,
    /// Ambient temperature per period, °C.
    pub theta_a: Vec<f64>,
    /// Set-point, °C.
    pub theta_r: f64,
    /// Deadband half-width, °C.
    pub delta: f64,
    /// Rated electrical power, kW.
    pub p_m: f64,
    /// Initial temperature, °C.
    pub theta_0: f64,
}

impl TclParams {
    pub fn horizon(&self) -> usize {
        self.theta_a.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::invalid("TCL coupling a must lie in (0, 1)"));
        }
        if !(self.b > 0.0) || !(self.p_m > 0.0) || !(self.delta >= 0.0) {
            return Err(Error::invalid("TCL needs b > 0, p_m > 0 and delta >= 0"));
        }
        if (self.theta_0 - self.theta_r).abs() > self.delta + 1e-12 {
            return Err(Error::invalid(
                "TCL initial temperature lies outside the deadband",
            ));
        }
        Ok(())
    }

    /// Temperature trajectory `θ(1..=D)` under no consumption.
    pub fn free_response<T: Scalar>(&self) -> Vec<T> {
        let keep = T::one() - T::from_f64(self.a);
        let a = T::from_f64(self.a);
        let mut theta = T::from_f64(self.theta_0);
        self.theta_a
            .iter()
            .map(|&amb| {
                theta = keep.clone() * theta.clone() + a.clone() * T::from_f64(amb);
                theta.clone()
            })
            .collect()
    }

    /// Temperature trajectory under consumption `x`.
    pub fn simulate(&self, x: &[f64]) -> Vec<f64> {
        let mut theta = self.theta_0;
        self.theta_a
            .iter()
            .zip(x)
            .map(|(amb, p)| {
                theta = (1.0 - self.a) * theta + self.a * amb - self.b * p;
                theta
            })
            .collect()
    }
}

/// TCL polytope in `R^D`: `0 <= x <= P_m` and the deadband on every period.
pub fn build_tcl<T: Scalar>(p: &TclParams, periods: usize) -> Result<HPolytope<T>> {
    p.validate()?;
    if periods == 0 || p.horizon() != periods {
        return Err(Error::DimensionMismatch {
            expected: periods,
            found: p.horizon(),
        });
    }
    let d = periods;
    let keep = T::one() - T::from_f64(p.a);
    let gamma = decay_matrix(&keep, d);
    let free = p.free_response::<T>();
    let b_coef = T::from_f64(p.b);
    let hi = T::from_f64(p.theta_r + p.delta);
    let lo = T::from_f64(p.theta_r - p.delta);

    let mut a = Matrix::zeros(4 * d, d);
    let mut b = Vec::with_capacity(4 * d);
    for i in 0..d {
        a[(i, i)] = T::one();
        b.push(T::from_f64(p.p_m));
    }
    for i in 0..d {
        a[(d + i, i)] = -T::one();
        b.push(T::zero());
    }
    // θ_j - b Σ Γ x <= θ_r + Δ  and  θ_j - b Σ Γ x >= θ_r - Δ.
    for j in 0..d {
        for i in 0..=j {
            a[(2 * d + j, i)] = gamma[j][i].clone();
            a[(3 * d + j, i)] = -gamma[j][i].clone();
        }
    }
    for th in &free {
        b.push((th.clone() - lo.clone()) / b_coef.clone());
    }
    for th in &free {
        b.push((hi.clone() - th.clone()) / b_coef.clone());
    }
    let poly = HPolytope::new(a, b)?;
    if poly.is_empty()? {
        return Err(Error::EmptyPolytope);
    }
    Ok(poly)
}

/// Load that must draw `energy` within `[t_arrive, t_depart)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeferrableParams {
    pub p_max: Vec<f64>,
    pub energy: f64,
    /// First period (1-based) in which the load may draw power.
    pub t_arrive: usize,
    /// First period (1-based) after the load has left.
    pub t_depart: usize,
}

impl DeferrableParams {
    pub fn horizon(&self) -> usize {
        self.p_max.len()
    }

    /// Power limits with periods outside the window forced to zero.
    pub fn windowed_limits(&self) -> Vec<f64> {
        self.p_max
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let period = i + 1;
                if period < self.t_arrive || period >= self.t_depart {
                    0.0
                } else {
                    p
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.horizon();
        if d == 0 {
            return Err(Error::invalid(
                "deferrable horizon must be at least one period",
            ));
        }
        if self.p_max.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid(
                "deferrable power limits must be non-negative",
            ));
        }
        if !(self.energy > 0.0) {
            return Err(Error::invalid("deferrable energy must be positive"));
        }
        if self.t_arrive < 1 || self.t_arrive >= self.t_depart || self.t_depart > d + 1 {
            return Err(Error::invalid(format!(
                "deferrable window [{}, {}) is not inside periods 1..={d}",
                self.t_arrive, self.t_depart
            )));
        }
        Ok(())
    }
}

pub fn build_deferrable<T: Scalar>(p: &DeferrableParams) -> Result<HPolytope<T>> {
    p.validate()?;
    let d = p.horizon();
    let limits = p.windowed_limits();
    let mut a = Matrix::zeros(2 * d + 2, d);
    let mut b = Vec::with_capacity(2 * d + 2);
    for (i, lim) in limits.iter().enumerate() {
        a[(i, i)] = T::one();
        b.push(T::from_f64(*lim));
    }
    for i in 0..d {
        a[(d + i, i)] = -T::one();
        b.push(T::zero());
    }
    for i in 0..d {
        a[(2 * d, i)] = T::one();
        a[(2 * d + 1, i)] = -T::one();
    }
    b.push(T::from_f64(p.energy));
    b.push(-T::from_f64(p.energy));
    let poly = HPolytope::new(a, b)?;
    if poly.is_empty()? {
        return Err(Error::EmptyPolytope);
    }
    Ok(poly)
}

/// Load constrained only by per-period power limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypercubeParams {
    pub p_low: Vec<f64>,
    pub p_high: Vec<f64>,
}

pub fn build_hypercube<T: Scalar>(p: &HypercubeParams) -> Result<HPolytope<T>> {
    if p.p_low.is_empty() {
        return Err(Error::invalid("hypercube needs at least one period"));
    }
    if p.p_low.len() != p.p_high.len() {
        return Err(Error::DimensionMismatch {
            expected: p.p_low.len(),
            found: p.p_high.len(),
        });
    }
    if p.p_low.iter().zip(&p.p_high).any(|(l, h)| !(l <= h)) {
        return Err(Error::invalid("hypercube needs p_low <= p_high"));
    }
    let lo: Vec<T> = p.p_low.iter().map(|&v| T::from_f64(v)).collect();
    let hi: Vec<T> = p.p_high.iter().map(|&v| T::from_f64(v)).collect();
    HPolytope::from_box(&lo, &hi)
}

/// Ramp limit `|x(i+1) - x(i)| <= delta_ramp`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffConstraint {
    pub delta_ramp: f64,
}

/// Appends the `2 (D - 1)` ramp rows to a power-space polytope.
pub fn add_diff_constraints<T: Scalar>(
    p: &HPolytope<T>,
    c: DiffConstraint,
) -> Result<HPolytope<T>> {
    if p.space() != Space::Power {
        return Err(Error::UnsupportedSpace);
    }
    if !(c.delta_ramp >= 0.0) {
        return Err(Error::invalid("ramp limit must be non-negative"));
    }
    let d = p.dimension();
    let delta = T::from_f64(c.delta_ramp);
    let mut out = p.clone();
    for i in 0..d.saturating_sub(1) {
        let mut up = vec![T::zero(); d];
        up[i + 1] = T::one();
        up[i] = -T::one();
        let down: Vec<T> = up.iter().map(|v| -v.clone()).collect();
        out = out.with_row(&up, delta.clone())?;
        out = out.with_row(&down, delta.clone())?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum LoadModel {
    Storage(StorageParams),
    Tcl(TclParams),
    Deferrable(DeferrableParams),
    Hypercube(HypercubeParams),
}

/// One entry of a population file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    #[serde(flatten)]
    pub model: LoadModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff_ramp: Option<f64>,
}

impl LoadSpec {
    pub fn new(model: LoadModel) -> Self {
        Self {
            model,
            diff_ramp: None,
        }
    }

    pub fn with_ramp(mut self, delta: f64) -> Self {
        self.diff_ramp = Some(delta);
        self
    }

    pub fn build<T: Scalar>(&self) -> Result<HPolytope<T>> {
        let base = match &self.model {
            LoadModel::Storage(p) => match p.space {
                StorageSpace::Stacked => build_storage(p)?,
                StorageSpace::Net => build_storage_net(p)?,
            },
            LoadModel::Tcl(p) => build_tcl(p, p.horizon())?,
            LoadModel::Deferrable(p) => build_deferrable(p)?,
            LoadModel::Hypercube(p) => build_hypercube(p)?,
        };
        match self.diff_ramp {
            Some(delta_ramp) => {
                let ramped = add_diff_constraints(&base, DiffConstraint { delta_ramp })?;
                if ramped.is_empty()? {
                    return Err(Error::EmptyPolytope);
                }
                Ok(ramped)
            }
            None => Ok(base),
        }
    }
}

/// Builds every load of a population, tagging failures with the load index.
pub fn build_population<T: Scalar>(specs: &[LoadSpec]) -> Result<Vec<HPolytope<T>>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.build().map_err(|e| Error::for_load(i, e)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heterogeneity {
    Low,
    High,
}

impl Heterogeneity {
    /// Half-width of the uniform draw around each mean, as a fraction.
    pub fn spread(self) -> f64 {
        match self {
            Heterogeneity::Low => 0.1,
            Heterogeneity::High => 0.2,
        }
    }
}

/// Physical TCL description before discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TclPhysical {
    /// Thermal capacitance, kWh/°C.
    pub capacitance: f64,
    /// Thermal resistance, °C/kW.
    pub resistance: f64,
    /// Rated electrical power, kW.
    pub p_m: f64,
    /// Coefficient of performance.
    pub cop: f64,
    pub theta_r: f64,
    pub delta: f64,
    pub theta_0: f64,
}

/// Population means for the TCL study.
pub const TCL_MEAN_CAPACITANCE: f64 = 2.0;
pub const TCL_MEAN_RESISTANCE: f64 = 2.0;
pub const TCL_MEAN_POWER: f64 = 5.6;
pub const TCL_MEAN_COP: f64 = 2.5;
pub const TCL_MEAN_SETPOINT: f64 = 22.5;
pub const TCL_MEAN_DEADBAND: f64 = 0.3;
/// Ambient temperature used when none is configured, °C.
pub const DEFAULT_AMBIENT: f64 = 32.0;

impl TclPhysical {
    /// Discretizes one hour into `slots` equal periods.
    ///
    /// The hourly coupling `a = 1/(RC)` becomes `1 - (1 - a)^(1/k)` per slot;
    /// `b` is scaled by the same factor so the steady-state temperature for a
    /// constant power draw is unchanged.
    pub fn discretize(&self, slots: usize, ambient: &[f64]) -> Result<TclParams> {
        if slots == 0 || ambient.len() != slots {
            return Err(Error::DimensionMismatch {
                expected: slots,
                found: ambient.len(),
            });
        }
        let a_hour = 1.0 / (self.resistance * self.capacitance);
        if !(a_hour > 0.0 && a_hour < 1.0) {
            return Err(Error::invalid("1/(RC) must lie in (0, 1) per hour"));
        }
        let a_slot = 1.0 - (1.0 - a_hour).powf(1.0 / slots as f64);
        let b_hour = self.cop / self.capacitance;
        Ok(TclParams {
            a: a_slot,
            b: b_hour * a_slot / a_hour,
            theta_a: ambient.to_vec(),
            theta_r: self.theta_r,
            delta: self.delta,
            p_m: self.p_m,
            theta_0: self.theta_0,
        })
    }
}

/// Draws physical TCL parameters. Per load the draw order is capacitance,
/// resistance, power, COP, set-point, deadband, then the initial temperature
/// uniformly over the deadband.
pub fn generate_tcl_physical(
    count: usize,
    heterogeneity: Heterogeneity,
    seed: u64,
) -> Vec<TclPhysical> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = heterogeneity.spread();
    let draw =
        |mean: f64, rng: &mut ChaCha8Rng| rng.random_range((1.0 - s) * mean..=(1.0 + s) * mean);
    (0..count)
        .map(|_| {
            let capacitance = draw(TCL_MEAN_CAPACITANCE, &mut rng);
            let resistance = draw(TCL_MEAN_RESISTANCE, &mut rng);
            let p_m = draw(TCL_MEAN_POWER, &mut rng);
            let cop = draw(TCL_MEAN_COP, &mut rng);
            let theta_r = draw(TCL_MEAN_SETPOINT, &mut rng);
            let delta = draw(TCL_MEAN_DEADBAND, &mut rng);
            let theta_0 = rng.random_range(theta_r - delta..=theta_r + delta);
            TclPhysical {
                capacitance,
                resistance,
                p_m,
                cop,
                theta_r,
                delta,
                theta_0,
            }
        })
        .collect()
}

pub fn generate_tcl_population(
    count: usize,
    heterogeneity: Heterogeneity,
    periods: usize,
    seed: u64,
) -> Vec<TclParams> {
    generate_tcl_population_with_ambient(count, heterogeneity, periods, seed, DEFAULT_AMBIENT)
}

pub fn generate_tcl_population_with_ambient(
    count: usize,
    heterogeneity: Heterogeneity,
    periods: usize,
    seed: u64,
    ambient: f64,
) -> Vec<TclParams> {
    let amb = vec![ambient; periods];
    generate_tcl_physical(count, heterogeneity, seed)
        .iter()
        .map(|p| {
            p.discretize(periods, &amb)
                .expect("population means keep 1/(RC) in (0, 1)")
        })
        .collect()
}

/// Non-dissipative, unit-efficiency storage in net-power form. Per load the
/// draw order is power limit, capacity, initial charge; the power limit is
/// constant over the horizon and symmetric for charging and discharging.
pub fn generate_storage_population(count: usize, periods: usize, seed: u64) -> Vec<StorageParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = rng.random_range(30.0..=70.0);
            let capacity = rng.random_range(120.0..=280.0);
            let initial = rng.random_range(0.0..=capacity);
            StorageParams {
                p_max: vec![p; periods],
                p_min: vec![-p; periods],
                capacity,
                initial,
                dissipation: 1.0,
                eta_in: 1.0,
                eta_out: 1.0,
                space: StorageSpace::Net,
            }
        })
        .collect()
}

/// Load families available to [`random_load`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Storage,
    Tcl,
    Deferrable,
    Hypercube,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Storage,
        Family::Tcl,
        Family::Deferrable,
        Family::Hypercube,
    ];
}

/// A random, feasible load of the given family over `periods` periods.
pub fn random_load<R: Rng + ?Sized>(family: Family, periods: usize, rng: &mut R) -> LoadSpec {
    let d = periods;
    match family {
        Family::Storage => {
            let p = rng.random_range(30.0..=70.0);
            let capacity = rng.random_range(120.0..=280.0);
            let initial = rng.random_range(0.0..=capacity);
            LoadSpec::new(LoadModel::Storage(StorageParams {
                p_max: (0..d).map(|_| rng.random_range(0.5..=1.0) * p).collect(),
                p_min: (0..d).map(|_| -rng.random_range(0.5..=1.0) * p).collect(),
                capacity,
                initial,
                dissipation: rng.random_range(0.9..=1.0),
                eta_in: 1.0,
                eta_out: 1.0,
                space: StorageSpace::Net,
            }))
        }
        Family::Tcl => {
            let het = if rng.random_bool(0.5) {
                Heterogeneity::Low
            } else {
                Heterogeneity::High
            };
            let seed = rng.random();
            let phys = generate_tcl_physical(1, het, seed).remove(0);
            let amb = vec![DEFAULT_AMBIENT; d];
            LoadSpec::new(LoadModel::Tcl(
                phys.discretize(d, &amb)
                    .expect("population means keep 1/(RC) in (0, 1)"),
            ))
        }
        Family::Deferrable => {
            let t_arrive = rng.random_range(1..=d);
            let t_depart = rng.random_range(t_arrive + 1..=d + 1);
            let p_max: Vec<f64> = (0..d).map(|_| rng.random_range(2.0..=7.0)).collect();
            let reachable: f64 = p_max[t_arrive - 1..t_depart - 1].iter().sum();
            let energy = rng.random_range(0.1..=0.9) * reachable;
            LoadSpec::new(LoadModel::Deferrable(DeferrableParams {
                p_max,
                energy,
                t_arrive,
                t_depart,
            }))
        }
        Family::Hypercube => {
            let p_low: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..=5.0)).collect();
            let p_high = p_low
                .iter()
                .map(|l| l + rng.random_range(0.5..=10.0))
                .collect();
            LoadSpec::new(LoadModel::Hypercube(HypercubeParams { p_low, p_high }))
        }
    }
}
