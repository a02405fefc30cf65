//! Closed-form security bounds, the check-policy weighting, the fair
//! protocol family and its optimum, and the figure data grids.

use serde::Serialize;
use thiserror::Error;

use crate::attacks::{bob_mutual_information, bob_pass_probability};

/// Inputs closer than this to `alpha = 1/2` are rejected by the fair-protocol formulas.
pub const FAIR_ALPHA_MARGIN: f64 = 1e-6;
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("fair-protocol formula is singular at alpha = {alpha}")]
    SingularDenominator { alpha: f64 },
}

fn unit(name: &'static str, value: f64) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(BoundsError::OutOfRange { name, value });
    }
    Ok(value)
}

/// Probability `zeta` that Bob's action is the one checked at unveil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CheckPolicy(f64);

impl CheckPolicy {
    pub fn new(zeta: f64) -> Result<Self, BoundsError> {
        unit("zeta", zeta).map(Self)
    }

    pub fn zeta(self) -> f64 {
        self.0
    }
}

/// Lower bound on Alice's cheating probability given trace distance `d`.
pub fn pa_lower(d: f64) -> Result<f64, BoundsError> {
    Ok(1.0 - unit("d", d)? / 2.0)
}

/// Lower bound on Bob's cheating probability given trace distance `d`.
pub fn pb_lower(d: f64) -> Result<f64, BoundsError> {
    let d = unit("d", d)?;
    Ok((1.0 + d * d) / 2.0)
}

/// Cheating probabilities once the unchecked party is counted as succeeding.
pub fn effective_probabilities(
    pa: f64,
    pb: f64,
    policy: CheckPolicy,
) -> Result<(f64, f64), BoundsError> {
    let pa = unit("pa", pa)?;
    let pb = unit("pb", pb)?;
    let z = policy.zeta();
    Ok((z + (1.0 - z) * pa, (1.0 - z) + z * pb))
}

/// Lower bound on `P_A* + P_B*` as a function of trace distance and `zeta`.
pub fn combined_lower(d: f64, zeta: f64) -> Result<f64, BoundsError> {
    let d = unit("d", d)?;
    let z = unit("zeta", zeta)?;
    Ok(2.0 - (z + d) / 2.0 + z * d * (1.0 + d) / 2.0)
}

fn fair_domain(alpha: f64) -> Result<(f64, f64), BoundsError> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(BoundsError::OutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    if alpha - 0.5 < FAIR_ALPHA_MARGIN {
        return Err(BoundsError::SingularDenominator { alpha });
    }
    let f = 2.0 * (alpha * (1.0 - alpha)).sqrt();
    let bias = 2.0 * alpha - 1.0;
    let den = bias * bias + f - 2.0;
    if den.abs() <= SINGULAR_TOL {
        return Err(BoundsError::SingularDenominator { alpha });
    }
    Ok((f, den))
}

/// Check probability that equalizes both parties' effective cheating
/// probabilities in the diagonal model with parameter `alpha`.
pub fn fair_zeta(alpha: f64) -> Result<f64, BoundsError> {
    let (f, den) = fair_domain(alpha)?;
    Ok(((f - 1.0) / den).clamp(0.0, 1.0))
}

/// Common effective cheating probability of the fair diagonal-model protocol.
pub fn fair_p_star(alpha: f64) -> Result<f64, BoundsError> {
    let (f, den) = fair_domain(alpha)?;
    let num = (f + 1.0) * (2.0 * alpha * alpha - 2.0 * alpha + 1.0) - 2.0;
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairOptimum {
    pub alpha_star: f64,
    pub zeta_star: f64,
    pub p_star: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..500 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Minimizes [`fair_p_star`] over `(1/2, 1)`.
///
/// A `1e-3` grid localizes the bracket, then golden-section search narrows
/// it to `tolerance`. Non-positive tolerances fall back to `1e-6`.
pub fn fair_optimize(tolerance: f64) -> FairOptimum {
    let tol = if tolerance > 0.0 && tolerance.is_finite() {
        tolerance
    } else {
        1e-6
    };
    let lo = 0.5 + FAIR_ALPHA_MARGIN;
    let hi = 1.0 - FAIR_ALPHA_MARGIN;
    let objective = |a: f64| fair_p_star(a.clamp(lo, hi)).unwrap_or(f64::INFINITY);

    let steps = ((hi - lo) / 1e-3).ceil() as usize;
    let grid = |i: usize| (lo + i as f64 * 1e-3).min(hi);
    let best = (0..=steps)
        .min_by(|&i, &j| objective(grid(i)).total_cmp(&objective(grid(j))))
        .unwrap_or(0);
    let left = grid(best.saturating_sub(1));
    let right = grid((best + 1).min(steps));

    let alpha_star = golden_section_min(objective, left, right, tol);
    FairOptimum {
        alpha_star,
        zeta_star: fair_zeta(alpha_star).unwrap_or(f64::NAN),
        p_star: objective(alpha_star),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub alpha: f64,
    pub p_b: f64,
    pub i_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure2Row {
    pub d: f64,
    pub zeta: f64,
    pub bound: f64,
}

fn grid_points(step: f64) -> Result<Vec<f64>, BoundsError> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(BoundsError::OutOfRange {
            name: "step",
            value: step,
        });
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| (i as f64 * step).min(1.0)).collect())
}

/// Bob's pass probability and information gain over `alpha ∈ [0, 1]`.
pub fn figure1_scan(step: f64) -> Result<Vec<Figure1Row>, BoundsError> {
    grid_points(step)?
        .into_iter()
        .map(|alpha| {
            let p_b = bob_pass_probability(alpha).expect("grid stays in [0, 1]");
            let i_m = bob_mutual_information(alpha).expect("grid stays in [0, 1]");
            Ok(Figure1Row { alpha, p_b, i_m })
        })
        .collect()
}

/// [`combined_lower`] on the unit square, `d`-major.
pub fn figure2_scan(step: f64) -> Result<Vec<Figure2Row>, BoundsError> {
    let points = grid_points(step)?;
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &d in &points {
        for &zeta in &points {
            rows.push(Figure2Row {
                d,
                zeta,
                bound: combined_lower(d, zeta)?,
            });
        }
    }
    Ok(rows)
}
