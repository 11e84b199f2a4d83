//! Volume of H-polytopes: Monte-Carlo estimates and exact small-dimension
//! values, plus approximation-error ratios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::polytope::{BoundingBox, HPolytope};
use crate::scalar::{dot, Scalar};

/// Samples per counter-based substream. Fixed so results do not depend on
/// how chunks are scheduled across threads.
pub const CHUNK: u64 = 1 << 15;
/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub samples: u64,
    pub hits: u64,
    pub ci_halfwidth_95: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// True when the volume came from the box closed form, not sampling.
    pub closed_form: bool,
}

impl VolumeEstimate {
    pub fn box_volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }
}

/// Volume of `p` when every row is axis-aligned, `None` otherwise.
pub fn axis_box_volume<T: Scalar>(p: &HPolytope<T>) -> Result<Option<T>> {
    let axis_aligned =
        (0..p.num_rows()).all(|i| p.row(i).iter().filter(|v| !v.is_zero()).count() == 1);
    if !axis_aligned {
        return Ok(None);
    }
    let bbox = p.bounding_box()?;
    Ok(Some(bbox.volume()))
}

/// Per-chunk random stream: same seed, stream number = chunk index.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Counts, for each polytope, how many of `samples` uniform box points it
/// contains, together with the number of points inside all of them.
fn count_hits(
    polys: &[&HPolytope<f64>],
    lower: &[f64],
    upper: &[f64],
    samples: u64,
    seed: u64,
) -> (Vec<u64>, u64) {
    let chunks = samples.div_ceil(CHUNK);
    let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let tol = f64::feasibility_tol();
    let k = polys.len();
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0; lower.len()];
            let mut hits = vec![0u64; k];
            let mut all = 0u64;
            for _ in 0..n {
                for (xi, (l, w)) in x.iter_mut().zip(lower.iter().zip(&width)) {
                    *xi = l + w * rng.random::<f64>();
                }
                let mut inside_all = true;
                for (h, p) in hits.iter_mut().zip(polys) {
                    let inside = (0..p.num_rows()).all(|i| dot(p.row(i), &x) <= p.offset(i) + tol);
                    if inside {
                        *h += 1;
                    } else {
                        inside_all = false;
                    }
                }
                all += u64::from(inside_all);
            }
            (hits, all)
        })
        .reduce(
            || (vec![0; k], 0),
            |(mut a, x), (b, y)| {
                for (ai, bi) in a.iter_mut().zip(b) {
                    *ai += bi;
                }
                (a, x + y)
            },
        )
}

fn binomial_halfwidth(box_volume: f64, hits: u64, samples: u64) -> f64 {
    let n = samples as f64;
    let p = hits as f64 / n;
    box_volume * Z95 * (p * (1.0 - p) / n).sqrt()
}

/// Uniform-sampling estimate inside the bounding box of `p`. Axis-aligned
/// boxes are returned in closed form.
pub fn mc_volume<T: Scalar>(p: &HPolytope<T>, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let p = p.cast::<f64>();
    let bbox = p.bounding_box()?;
    if let Some(v) = axis_box_volume(&p)? {
        return Ok(VolumeEstimate {
            volume: v,
            samples: 0,
            hits: 0,
            ci_halfwidth_95: 0.0,
            lower: bbox.lower,
            upper: bbox.upper,
            closed_form: true,
        });
    }
    mc_volume_in_box(&p, &bbox, samples, seed)
}

/// Uniform-sampling estimate inside a caller-chosen box, which must contain
/// `p`. Polytopes sharing box and seed see the same sample stream.
pub fn mc_volume_in_box<T: Scalar>(
    p: &HPolytope<T>,
    bbox: &BoundingBox<f64>,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    if bbox.dimension() != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            found: bbox.dimension(),
        });
    }
    let p = p.cast::<f64>();
    let (hits, _) = count_hits(&[&p], &bbox.lower, &bbox.upper, samples, seed);
    let box_volume = bbox.volume();
    Ok(VolumeEstimate {
        volume: box_volume * hits[0] as f64 / samples as f64,
        samples,
        hits: hits[0],
        ci_halfwidth_95: binomial_halfwidth(box_volume, hits[0], samples),
        lower: bbox.lower.clone(),
        upper: bbox.upper.clone(),
        closed_form: false,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactVolume<T> {
    pub volume: T,
    /// The polytope is flat; its volume is reported as zero.
    pub lower_dimensional: bool,
}

/// Exact volume through vertex enumeration and a simplicial fan over the
/// hull facets. Limited to the vertex-enumeration guard.
pub fn exact_volume<T: Scalar>(p: &HPolytope<T>) -> Result<ExactVolume<T>> {
    let v = p.enumerate_vertices()?;
    if v.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    if v.affine_dimension() < p.dimension() {
        return Ok(ExactVolume {
            volume: T::zero(),
            lower_dimensional: true,
        });
    }
    match convex_hull(v.vertices()) {
        Ok(h) => Ok(ExactVolume {
            volume: h.volume(),
            lower_dimensional: false,
        }),
        Err(Error::LowerDimensional) => Ok(ExactVolume {
            volume: T::zero(),
            lower_dimensional: true,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatio {
    /// `V_approx / V_reference`.
    pub ratio: f64,
    pub percent_error: f64,
    /// 95% half-width of `ratio`; zero for exact volumes.
    pub ci_halfwidth_95: f64,
    /// Set when the caller asserted `reference ⊆ approx` and the ratio is
    /// below one by more than the interval allows.
    pub violation: bool,
}

impl ErrorRatio {
    fn new(ratio: f64, ci: f64, reference_inside: bool) -> Self {
        Self {
            ratio,
            percent_error: (ratio - 1.0) * 100.0,
            ci_halfwidth_95: ci,
            violation: reference_inside && ratio < 1.0 - ci - 1e-9,
        }
    }
}

/// Ratio `V(approx) / V(reference)`.
///
/// The Monte-Carlo variant samples one stream in a box covering both sets,
/// so the counting noise largely cancels in the ratio; its interval comes
/// from the multinomial covariance of the two hit counts.
pub fn compare_volumes<T: Scalar>(
    approx: &HPolytope<T>,
    reference: &HPolytope<T>,
    method: VolumeMethod,
    reference_inside: bool,
) -> Result<ErrorRatio> {
    if approx.dimension() != reference.dimension() {
        return Err(Error::DimensionMismatch {
            expected: approx.dimension(),
            found: reference.dimension(),
        });
    }
    match method {
        VolumeMethod::Exact => {
            let va = exact_volume(approx)?.volume.to_f64();
            let vr = exact_volume(reference)?.volume.to_f64();
            if vr <= 0.0 {
                return Err(Error::LowerDimensional);
            }
            Ok(ErrorRatio::new(va / vr, 0.0, reference_inside))
        }
        VolumeMethod::MonteCarlo { samples, seed } => {
            let a = approx.cast::<f64>();
            let r = reference.cast::<f64>();
            let ba = a.bounding_box()?;
            let br = r.bounding_box()?;
            let lower: Vec<f64> = ba
                .lower
                .iter()
                .zip(&br.lower)
                .map(|(x, y)| x.min(*y))
                .collect();
            let upper: Vec<f64> = ba
                .upper
                .iter()
                .zip(&br.upper)
                .map(|(x, y)| x.max(*y))
                .collect();
            let (hits, both) = count_hits(&[&a, &r], &lower, &upper, samples, seed);
            let (ha, hr) = (hits[0] as f64, hits[1] as f64);
            if hr == 0.0 {
                return Err(Error::invalid("no sample landed in the reference polytope"));
            }
            let n = samples as f64;
            let (pa, pr, pb) = (ha / n, hr / n, both as f64 / n);
            let ratio = ha / hr;
            let rel_var = (pa * (1.0 - pa) / (pa * pa) + pr * (1.0 - pr) / (pr * pr)
                - 2.0 * (pb - pa * pr) / (pa * pr))
                / n;
            let ci = Z95 * ratio * rel_var.max(0.0).sqrt();
            Ok(ErrorRatio::new(ratio, ci, reference_inside))
        }
    }
}

/// One line of a volume report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRecord {
    pub case_id: String,
    #[serde(rename = "D")]
    pub d: usize,
    pub method: String,
    pub volume: f64,
    pub ci: f64,
    pub samples: u64,
    pub seed: u64,
    /// Left empty unless timings are requested, keeping reruns byte-identical.
    pub wall_ms: Option<f64>,
}
