//! Curve surgery: chord cuts, connectors, and device insertion.
//!
//! A cut replaces a stretch of the curve by the straight segment with the
//! same horizontal displacement; it shortens the curve but perturbs the
//! endpoint in the higher layers. A connector is an explicit horizontal
//! path from the identity to a prescribed group element, built from nested
//! commutator moves; inserting a connector and its reverse around a stretch
//! of the curve ("device") leaves the horizontal projection of the endpoint
//! alone while pushing a controlled displacement into higher layers. The
//! shortening pipeline trades the two against each other.

use serde::Serialize;

use crate::algebra::{AlgebraVector, StratifiedAlgebra};
use crate::curve::HorizontalPath;
use crate::error::{Error, Result};
use crate::excess;
use crate::group::GroupElement;
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol;

/// Outcome of one chord cut.
#[derive(Clone, Debug, Serialize)]
pub struct CutReport<S> {
    pub window: (S, S),
    /// Horizontal displacement across the window.
    pub chord: Vec<S>,
    pub chord_length: S,
    /// Length of the stretch that was removed.
    pub removed_length: S,
    /// removed_length - chord_length.
    pub gain: S,
    /// Lower bound for the gain implied by the excess of the window; only
    /// meaningful for curves parametrized by arclength.
    pub guaranteed_gain: S,
}

/// Replaces the stretch of the curve on [s, sp] by the straight segment with
/// the same horizontal displacement. When the chord is exactly zero the
/// stretch is dropped outright. The endpoint of the result generally differs
/// from the original endpoint in layers above the first.
pub fn cut<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    s: S,
    sp: S,
) -> Result<(HorizontalPath<S>, CutReport<S>)> {
    let rep = excess::excess(alg, path, s, sp)?;
    let (s, sp) = rep.window;
    let (a, b) = path.domain();
    let mid = path.restrict(alg, s, sp);
    let chord = path.horizontal_increment(s, sp);
    let chord_length = linalg::norm(&chord);
    let removed_length = mid.length();

    let front = path.restrict(alg, a, s);
    let back = path.restrict(alg, sp, b);
    let replaced = if chord_length == S::zero() {
        front.concat(&back)
    } else {
        let dir: Vec<S> = chord.iter().map(|&c| c / chord_length).collect();
        let seg = HorizontalPath::lift(
            alg,
            front.endpoint(alg),
            s,
            vec![(chord_length, dir)],
        )?;
        front.concat(&seg).concat(&back)
    };

    let gain = removed_length - chord_length;
    let guaranteed_gain = (sp - s) / S::of(2.0) * rep.value * rep.value;
    Ok((
        replaced,
        CutReport { window: (s, sp), chord, chord_length, removed_length, gain, guaranteed_gain },
    ))
}

/// Cut over the window [-eta, eta]; the curve must be parametrized on a
/// domain containing it.
pub fn cut_symmetric<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    eta: S,
) -> Result<(HorizontalPath<S>, CutReport<S>)> {
    cut(alg, path, -eta, eta)
}

/// A horizontal path from the identity to a prescribed endpoint.
#[derive(Clone, Debug, Serialize)]
pub struct Connector<S> {
    /// Logarithm of the endpoint the connector realizes.
    pub target: AlgebraVector<S>,
    /// Arclength path from the identity, starting at time zero.
    pub path: HorizontalPath<S>,
}

impl<S: Scalar> Connector<S> {
    pub fn length(&self) -> S {
        self.path.length()
    }

    pub fn duration(&self) -> S {
        self.path.duration()
    }
}

/// Matrix of w -> [X_m, w] from layer j-1 to layer j, rows indexed by the
/// layer-j coordinates.
fn arm_bracket_matrix<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    m: usize,
    j: usize,
) -> Vec<Vec<S>> {
    let dom = alg.layer_range(j - 1);
    let cod = alg.layer_range(j);
    let mut cols = Vec::with_capacity(dom.len());
    let xm = alg.basis_vector(m);
    for c in dom {
        let img = alg.bracket(&xm, &alg.basis_vector(c));
        cols.push(img.coords()[cod.clone()].to_vec());
    }
    let rows = cod_len(&cols);
    (0..rows)
        .map(|r| cols.iter().map(|col| col[r]).collect())
        .collect()
}

fn cod_len<S>(cols: &[Vec<S>]) -> usize {
    cols.first().map_or(0, |c| c.len())
}

/// One commutator device: flow the horizontal field X_m, realize w, flow
/// back, unwind w.
struct Device<S> {
    arm: usize,
    w: Vec<S>,
}

/// Writes a layer-j target as a sum of brackets [X_m, w] with w in layer
/// j-1. Prefers a single device with the smallest inner factor; falls back
/// to a joint minimum-norm solve across all horizontal fields.
fn layer_devices<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    j: usize,
    target: &[S],
) -> Result<Vec<Device<S>>> {
    let r = alg.rank();
    let scale = S::one().max(linalg::norm(target));
    let fits = |mat: &[Vec<S>], w: &[S]| {
        let mut worst = S::zero();
        for (row, &t) in mat.iter().zip(target) {
            worst = worst.max((linalg::dot(row, w) - t).abs());
        }
        worst <= S::of(tol::CONNECTOR_RESIDUAL) * scale
    };

    let mut best: Option<(S, usize, Vec<S>)> = None;
    for m in 0..r {
        let mat = arm_bracket_matrix(alg, m, j);
        if let Some(w) = linalg::min_norm_solution(&mat, target) {
            if fits(&mat, &w) {
                let n = linalg::norm(&w);
                let better = match &best {
                    None => true,
                    Some((bn, _, _)) => n < *bn,
                };
                if better {
                    best = Some((n, m, w));
                }
            }
        }
    }
    if let Some((_, m, w)) = best {
        return Ok(vec![Device { arm: m, w }]);
    }

    let dim_lower = alg.layer_range(j - 1).len();
    let mats: Vec<Vec<Vec<S>>> = (0..r).map(|m| arm_bracket_matrix(alg, m, j)).collect();
    let dim_target = alg.layer_range(j).len();
    let mut joint = vec![vec![S::zero(); r * dim_lower]; dim_target];
    for (m, mat) in mats.iter().enumerate() {
        for (row, jrow) in mat.iter().zip(&mut joint) {
            jrow[m * dim_lower..(m + 1) * dim_lower].copy_from_slice(row);
        }
    }
    let Some(stacked) = linalg::min_norm_solution(&joint, target) else {
        return Err(Error::BracketMapNotSurjective { lower: j - 1, target: j });
    };
    let mut out = Vec::new();
    for m in 0..r {
        let w = stacked[m * dim_lower..(m + 1) * dim_lower].to_vec();
        if linalg::norm(&w) > S::of(1e-14) * scale {
            out.push(Device { arm: m, w });
        }
    }
    if out.is_empty() {
        return Err(Error::BracketMapNotSurjective { lower: j - 1, target: j });
    }
    Ok(out)
}

fn vector_in_layer<S: Scalar>(alg: &StratifiedAlgebra<S>, j: usize, local: &[S]) -> AlgebraVector<S> {
    let mut coords = vec![S::zero(); alg.n()];
    coords[alg.layer_range(j)].copy_from_slice(local);
    AlgebraVector::new(coords)
}

/// Path from the identity ending at exp(v + junk) with the junk confined to
/// layers above `up_to`. Straightens the horizontal part, then fixes each
/// layer in turn with commutator devices. A device for layer j only needs
/// its inner factor exact through layer j-1: anything higher is pushed above
/// layer j by the commutator and cleaned up by a later pass of the caller,
/// which is what keeps the recursion finite.
fn realize_through<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    v: &AlgebraVector<S>,
    up_to: usize,
) -> Result<HorizontalPath<S>> {
    let mut path = HorizontalPath::point(alg.identity(), S::zero());
    let goal = alg.exp(v.clone());

    let h1: Vec<S> = v.coords()[..alg.rank()].to_vec();
    let h1_len = linalg::norm(&h1);
    if h1_len > S::zero() {
        let dir: Vec<S> = h1.iter().map(|&c| c / h1_len).collect();
        let seg = HorizontalPath::lift(alg, alg.identity(), S::zero(), vec![(h1_len, dir)])?;
        path = path.concat(&seg);
    }

    for j in 2..=up_to.min(alg.step()) {
        let end = path.endpoint(alg);
        let residual = alg.product(&end.inverse(), &goal);
        let local = residual.log().coords()[alg.layer_range(j)].to_vec();
        let size = linalg::norm(&local);
        if size <= S::of(tol::CONNECTOR_RESIDUAL) * S::one().max(v.norm()) {
            continue;
        }
        for dev in layer_devices(alg, j, &local)? {
            path = path.concat(&device_path(alg, j, &dev)?);
        }
    }
    Ok(path)
}

/// Path from the identity realizing exp(v) exactly.
fn realize<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    v: &AlgebraVector<S>,
) -> Result<HorizontalPath<S>> {
    let path = realize_through(alg, v, alg.step())?;
    let end = path.endpoint(alg);
    let residual = alg.product(&end.inverse(), &alg.exp(v.clone()));
    let miss = residual.log().max_abs();
    if miss > S::of(tol::ENDPOINT_RESIDUAL) * S::one().max(v.max_abs()) {
        let layer = alg
            .lowest_nonzero_layer(residual.log(), S::zero())
            .unwrap_or(alg.step());
        return Err(Error::UnexpectedDefect { layer, residual: miss.as_f64() });
    }
    Ok(path)
}

/// The commutator move for one device targeting layer j: flow t X_m, run the
/// inner path for w/t, flow back, run the inner path reversed. The arm time
/// balances the two contributions so the move stays short.
fn device_path<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    j: usize,
    dev: &Device<S>,
) -> Result<HorizontalPath<S>> {
    let w_len = linalg::norm(&dev.w);
    let t = w_len.powf(S::one() / S::of_usize(j));
    let scaled: Vec<S> = dev.w.iter().map(|&x| x / t).collect();
    let inner_target = vector_in_layer(alg, j - 1, &scaled);
    let inner = realize_through(alg, &inner_target, j - 1)?;
    let e_m: Vec<S> = (0..alg.rank())
        .map(|i| if i == dev.arm { S::one() } else { S::zero() })
        .collect();
    let minus_e_m: Vec<S> = e_m.iter().map(|&c| -c).collect();
    let arm = HorizontalPath::lift(alg, alg.identity(), S::zero(), vec![(t, e_m)])?;
    let arm_back = HorizontalPath::lift(alg, alg.identity(), S::zero(), vec![(t, minus_e_m)])?;
    Ok(arm.concat(&inner).concat(&arm_back).concat(&inner.reverse(alg)))
}

/// Builds an arclength connector from the identity to exp(target). The
/// target is first normalized to unit homogeneous norm, realized there, and
/// the result dilated back, so the connector length scales exactly like the
/// homogeneous norm under dilation of the target.
pub fn connect<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    target: &AlgebraVector<S>,
) -> Result<Connector<S>> {
    assert_eq!(target.len(), alg.n(), "dimension mismatch");
    let c = alg.homogeneous_norm_of_log(target);
    if c == S::zero() {
        return Ok(Connector {
            target: target.clone(),
            path: HorizontalPath::point(alg.identity(), S::zero()),
        });
    }
    let unit = alg.dilate(S::one() / c, target);
    let unit_path = realize(alg, &unit)?;
    Ok(Connector { target: target.clone(), path: unit_path.dilated_reparam(alg, c) })
}

/// One inserted device in a modified curve.
#[derive(Clone, Debug, Serialize)]
pub struct DeviceRecord<S> {
    /// Window of the original curve the device wraps, in the time
    /// coordinates the device was applied at.
    pub window: (S, S),
    pub connector_length: S,
    pub duration_added: S,
}

/// Inserts the connector at time s and its reverse at time sp: the result
/// follows the curve to s, runs the connector, follows the curve to sp, runs
/// the connector backwards, and continues. Duration grows by twice the
/// connector duration; the horizontal projection of the endpoint is
/// unchanged.
pub fn insert_device<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    s: S,
    sp: S,
    conn: &Connector<S>,
) -> HorizontalPath<S> {
    let (a, b) = path.domain();
    let front = path.restrict(alg, a, s);
    let mid = path.restrict(alg, s, sp);
    let back = path.restrict(alg, sp, b);
    front
        .concat(&conn.path)
        .concat(&mid)
        .concat(&conn.path.reverse(alg))
        .concat(&back)
}

/// Endpoint displacement caused by a modification: original_end^{-1} new_end.
pub fn displacement<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    original: &HorizontalPath<S>,
    modified: &HorizontalPath<S>,
) -> GroupElement<S> {
    alg.product(
        &original.endpoint(alg).inverse(),
        &modified.endpoint(alg),
    )
}

/// The displacement of a single device, computed without building the
/// modified curve: conjugate the commutator of the wrapped stretch with the
/// connector endpoint by the remaining tail of the curve.
pub fn displacement_via_commutator<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    s: S,
    sp: S,
    conn: &Connector<S>,
) -> GroupElement<S> {
    let (_, b) = path.domain();
    let u = conn.path.increment(alg, conn.path.t_start(), conn.path.t_end());
    let v = path.increment(alg, s, sp);
    let g = path.increment(alg, sp, b);
    let core = alg.commutator(&v.inverse(), &u);
    alg.conjugate(&g.inverse(), &core)
}

/// Inserts several devices, windows given in the time coordinates of the
/// original curve, ordered and disjoint. Each insertion lengthens the curve,
/// so window k is applied with an offset of twice the total connector
/// duration inserted before it.
pub fn insert_devices<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    devices: &[((S, S), Connector<S>)],
) -> (HorizontalPath<S>, Vec<DeviceRecord<S>>) {
    check_windows(devices);
    let mut cur = path.clone();
    let mut records = Vec::with_capacity(devices.len());
    let mut shift = S::zero();
    for ((s, sp), conn) in devices {
        let ell = conn.duration();
        let window = (*s + shift, *sp + shift);
        cur = insert_device(alg, &cur, window.0, window.1, conn);
        records.push(DeviceRecord {
            window,
            connector_length: conn.length(),
            duration_added: ell + ell,
        });
        shift = shift + ell + ell;
    }
    (cur, records)
}

/// Symmetric variant: after each insertion the curve is recentered by minus
/// the connector duration, which restores a symmetric domain and keeps every
/// time left of the window fixed. Later windows therefore shift by the total
/// connector duration inserted before them, not twice it.
pub fn insert_devices_symmetric<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    devices: &[((S, S), Connector<S>)],
) -> (HorizontalPath<S>, Vec<DeviceRecord<S>>) {
    check_windows(devices);
    let mut cur = path.clone();
    let mut records = Vec::with_capacity(devices.len());
    let mut shift = S::zero();
    for ((s, sp), conn) in devices {
        let ell = conn.duration();
        let window = (*s + shift, *sp + shift);
        cur = insert_device(alg, &cur, window.0, window.1, conn).translate_time(-ell);
        records.push(DeviceRecord {
            window,
            connector_length: conn.length(),
            duration_added: ell + ell,
        });
        shift = shift + ell;
    }
    (cur, records)
}

fn check_windows<S: Scalar>(devices: &[((S, S), Connector<S>)]) {
    let mut prev: Option<S> = None;
    for ((s, sp), _) in devices {
        assert!(s < sp, "device window is empty");
        if let Some(p) = prev {
            assert!(*s >= p, "device windows must be ordered and disjoint");
        }
        prev = Some(*sp);
    }
}
