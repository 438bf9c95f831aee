//! Blow-ups of a curve at a point and multi-scale flatness diagnostics.
//!
//! Rescaling a curve around one of its points by the group dilations probes
//! its infinitesimal shape: if the rescalings converge to a one-parameter
//! subgroup, the curve has a tangent line there. The profile below measures,
//! across a ladder of scales, how far the controls deviate from their mean
//! direction; a genuine corner keeps the deviation bounded away from zero at
//! every scale, while a smooth point sends it to zero.

use serde::Serialize;

use crate::algebra::StratifiedAlgebra;
use crate::curve::HorizontalPath;
use crate::error::Result;
use crate::excess;
use crate::linalg;
use crate::scalar::Scalar;

/// The curve rescaled around gamma(t): tau -> delta_{1/lambda} of
/// gamma(t)^{-1} gamma(t + lambda tau). Controls are unchanged, the domain
/// maps to ((a-t)/lambda, (b-t)/lambda), and the base point moves to the
/// identity at time zero.
pub fn blow_up<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    t: S,
    lambda: S,
) -> HorizontalPath<S> {
    assert!(lambda > S::zero(), "blow-up scale must be positive");
    let g_inv = path.eval(alg, t).inverse();
    path.translate_time(-t)
        .left_translate(alg, &g_inv)
        .dilated_reparam(alg, S::one() / lambda)
}

/// Flatness data of one window [t - scale, t + scale].
#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow<S> {
    pub scale: S,
    pub window: (S, S),
    pub excess: S,
    /// Normalized mean control over the window; zero when the mean vanishes.
    pub mean_direction: Vec<S>,
    /// Root mean square distance of the control from the mean direction.
    pub rms_residual: S,
    /// excess / sqrt(scale / first scale): flags whether the excess decays
    /// at the rate a square-integrable flatness defect would force.
    pub ratio: S,
}

/// Multi-scale flatness profile around one time.
#[derive(Clone, Debug, Serialize)]
pub struct ExcessProfile<S> {
    pub base_time: S,
    pub rows: Vec<ScaleRow<S>>,
}

fn window_row<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    t: S,
    scale: S,
    reference_scale: S,
) -> Result<ScaleRow<S>> {
    let (lo, hi) = (t - scale, t + scale);
    let rep = excess::excess(alg, path, lo, hi)?;
    let (lo, hi) = rep.window;
    let moment = excess::control_moment(alg, path, lo, hi)?;
    let second: S = (0..moment.len()).fold(S::zero(), |acc, i| acc + moment[i][i]);
    let mut mean = path.horizontal_increment(lo, hi);
    let inv = S::one() / (hi - lo);
    for m in mean.iter_mut() {
        *m = *m * inv;
    }
    let mean_len = linalg::norm(&mean);
    let (mean_direction, rms_sq) = if mean_len > S::zero() {
        let dir: Vec<S> = mean.iter().map(|&m| m / mean_len).collect();
        // avg |h - v|^2 = avg |h|^2 - 2 v . avg h + 1 with |v| = 1.
        (dir, second - S::of(2.0) * mean_len + S::one())
    } else {
        (vec![S::zero(); mean.len()], second)
    };
    Ok(ScaleRow {
        scale,
        window: (lo, hi),
        excess: rep.value,
        mean_direction,
        rms_residual: rms_sq.max(S::zero()).sqrt(),
        ratio: rep.value / (scale / reference_scale).sqrt(),
    })
}

/// Profiles the curve around t at the given scales; the first scale is the
/// reference for the decay ratio. Every window [t - scale, t + scale] must
/// fit inside the domain.
pub fn excess_profile<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    t: S,
    scales: &[S],
) -> Result<ExcessProfile<S>> {
    assert!(!scales.is_empty(), "need at least one scale");
    let reference = scales[0];
    let rows = scales
        .iter()
        .map(|&s| window_row(alg, path, t, s, reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExcessProfile { base_time: t, rows })
}

/// Best line candidate across scales: the one-parameter subgroup through
/// gamma(t) in the normalized mean control direction of the smallest window,
/// declared detected when that window's residual falls under the threshold.
#[derive(Clone, Debug, Serialize)]
pub struct TangentLineEstimate<S> {
    pub base_time: S,
    pub threshold: S,
    pub rows: Vec<ScaleRow<S>>,
    /// Mean control direction at the smallest scale.
    pub direction: Vec<S>,
    /// Residual at the smallest scale.
    pub rms_residual: S,
    pub detected: bool,
}

pub fn tangent_line_estimate<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    t: S,
    scales: &[S],
    threshold: S,
) -> Result<TangentLineEstimate<S>> {
    assert!(threshold > S::zero(), "detection threshold must be positive");
    let profile = excess_profile(alg, path, t, scales)?;
    let finest = profile
        .rows
        .iter()
        .min_by(|a, b| a.scale.partial_cmp(&b.scale).expect("scales are finite"))
        .expect("at least one scale")
        .clone();
    Ok(TangentLineEstimate {
        base_time: t,
        threshold,
        rows: profile.rows,
        direction: finest.mean_direction,
        rms_residual: finest.rms_residual,
        detected: finest.rms_residual < threshold,
    })
}
