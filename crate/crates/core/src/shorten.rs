//! The shortening pipeline: cut a window, then repair the endpoint defect
//! layer by layer with commutator devices.
//!
//! Cutting a stretch with positive excess strictly shortens the curve but
//! moves its endpoint inside the subgroup generated by the higher layers.
//! Each stage picks subintervals of a widening window whose horizontal
//! displacements form a basis, solves for the device targets that cancel
//! the defect in the next layer exactly, and inserts the devices. After the
//! last stage the endpoint matches again; the ledger records whether the
//! cut gained more length than the devices spent.

use serde::Serialize;

use crate::algebra::{AlgebraVector, StratifiedAlgebra};
use crate::curve::HorizontalPath;
use crate::error::{Error, Result};
use crate::excess::{self, IntervalSelection};
use crate::linalg;
use crate::scalar::Scalar;
use crate::surgery::{self, Connector, CutReport};
use crate::tol;

/// Parameters of one shortening run.
#[derive(Clone, Debug, Serialize)]
pub struct ShortenParams<S> {
    /// Half-width (symmetric) or width (one-sided) of the cut window.
    pub eta: S,
    /// Spare margin in the window exponents.
    pub beta: S,
    /// Window exponents, one per repaired layer: stage fixing layer j
    /// selects its intervals inside a window of size eta^exponents[j-2].
    pub exponents: Vec<S>,
    /// Excess below which the run reports no gain without cutting.
    pub excess_threshold: S,
    /// Dyadic depth for the interval search.
    pub depth: usize,
}

/// Derives a feasible exponent ladder from the margin and the exponent of
/// the deepest window. Working from the top layer down, each layer needs a
/// window large enough that its devices stay cheap relative to the cut, and
/// the ladder is feasible only if the layer-2 exponent still leaves the
/// margin below one; the free room is then split evenly.
pub fn choose_params<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    eta: S,
    beta: S,
    rho_last: S,
    excess_threshold: S,
) -> Result<ShortenParams<S>> {
    if !(eta > S::zero()) {
        return Err(Error::InfeasibleParams("cut window must be positive".into()));
    }
    if !(beta >= S::zero()) {
        return Err(Error::InfeasibleParams("margin must be nonnegative".into()));
    }
    if !(rho_last > S::zero() && rho_last < S::one()) {
        return Err(Error::InfeasibleParams(
            "deepest window exponent must lie in (0, 1)".into(),
        ));
    }
    let s = alg.step();
    if s == 1 {
        return Ok(ShortenParams {
            eta,
            beta,
            exponents: Vec::new(),
            excess_threshold,
            depth: excess::default_depth(alg.rank()),
        });
    }
    let mut m = vec![S::zero(); s + 1];
    m[s] = rho_last;
    for k in (2..s).rev() {
        let kf = S::of_usize(k);
        let k1 = S::of_usize(k + 1);
        m[k] = (m[k + 1] + kf) / k1 + kf * beta / k1;
    }
    let bound = S::one() - beta;
    if !(m[2] < bound) {
        return Err(Error::InfeasibleParams(format!(
            "layer-2 window exponent {} reaches the cap {}; lower the margin or the deepest exponent",
            m[2], bound
        )));
    }
    let slack = (bound - m[2]) / S::of(2.0);
    let mut exponents: Vec<S> = (2..s).map(|k| m[k] + slack).collect();
    exponents.push(rho_last);
    Ok(ShortenParams {
        eta,
        beta,
        exponents,
        excess_threshold,
        depth: excess::default_depth(alg.rank()),
    })
}

/// Endpoint defect of `current` against `reference`: the log of
/// reference_end^{-1} current_end.
pub fn defect<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    reference: &HorizontalPath<S>,
    current: &HorizontalPath<S>,
) -> AlgebraVector<S> {
    alg.product(&reference.endpoint(alg).inverse(), &current.endpoint(alg))
        .into_log()
}

/// Solves sum_i [Y_i, e_i] = target with Y_i in the given layer and e_i the
/// horizontal basis fields, by a joint minimum-norm solve. The target is
/// given in the local coordinates of the next layer.
pub fn bracket_decompose<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    layer: usize,
    target: &[S],
) -> Result<Vec<AlgebraVector<S>>> {
    let r = alg.rank();
    let dom = alg.layer_range(layer);
    let cod = alg.layer_range(layer + 1);
    assert_eq!(target.len(), cod.len(), "target length mismatch");
    let dim = dom.len();
    let mut mat = vec![vec![S::zero(); r * dim]; cod.len()];
    for i in 0..r {
        let ei = alg.basis_vector(i);
        for (c_idx, c) in dom.clone().enumerate() {
            let img = alg.bracket(&alg.basis_vector(c), &ei);
            for (row, coord) in mat.iter_mut().zip(cod.clone()) {
                row[i * dim + c_idx] = img.coords()[coord];
            }
        }
    }
    let Some(stacked) = linalg::min_norm_solution(&mat, target) else {
        return Err(Error::BracketMapNotSurjective { lower: layer, target: layer + 1 });
    };
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let mut coords = vec![S::zero(); alg.n()];
        coords[dom.clone()].copy_from_slice(&stacked[i * dim..(i + 1) * dim]);
        out.push(AlgebraVector::new(coords));
    }
    Ok(out)
}

/// Inverts the matrix of selected displacements: returns C with
/// `e_i = sum_j C[i][j] Delta_j`.
pub fn coefficients_solve<S: Scalar>(increments: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    linalg::invert(increments).ok_or(Error::SingularIncrements)
}

/// One repaired layer in the ledger.
#[derive(Clone, Debug, Serialize)]
pub struct StageRecord<S> {
    pub layer: usize,
    /// Norm of the defect component the stage had to cancel.
    pub defect_norm: S,
    /// Windows the devices wrap, in the curve times at selection.
    pub windows: Vec<(S, S)>,
    pub determinant: S,
    pub devices: usize,
    /// Total length the stage inserted.
    pub added_length: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortenStatus {
    Shortened,
    NoNetGain,
}

/// Full account of one shortening run.
#[derive(Clone, Debug, Serialize)]
pub struct SurgeryLedger<S> {
    pub original_length: S,
    pub cut: Option<CutReport<S>>,
    pub stages: Vec<StageRecord<S>>,
    pub final_length: S,
    /// original_length - final_length; positive means the run shortened.
    pub net_gain: S,
    pub endpoint_residual: S,
    pub status: ShortenStatus,
}

/// Result of a shortening run: the modified curve and its ledger.
#[derive(Clone, Debug, Serialize)]
pub struct ShortenOutcome<S> {
    pub curve: HorizontalPath<S>,
    pub ledger: SurgeryLedger<S>,
}

/// Shortens around the start of the domain: cuts [a, a+eta] and repairs.
pub fn shorten_one_sided<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    params: &ShortenParams<S>,
) -> Result<ShortenOutcome<S>> {
    run(alg, path, params, false)
}

/// Shortens around time zero of a symmetrically parametrized curve: cuts
/// [-eta, eta] and repairs, recentering after every insertion so the domain
/// stays symmetric.
pub fn shorten_symmetric<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    params: &ShortenParams<S>,
) -> Result<ShortenOutcome<S>> {
    run(alg, path, params, true)
}

fn run<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    params: &ShortenParams<S>,
    symmetric: bool,
) -> Result<ShortenOutcome<S>> {
    let s = alg.step();
    if params.exponents.len() + 1 != s && !(s == 1 && params.exponents.is_empty()) {
        return Err(Error::InfeasibleParams(format!(
            "expected {} window exponents for step {s}, got {}",
            s - 1,
            params.exponents.len()
        )));
    }
    let eta = params.eta;
    if !(eta > S::zero()) {
        return Err(Error::InfeasibleParams("cut window must be positive".into()));
    }
    let (a, b) = path.domain();
    let cut_window = if symmetric {
        let slack = S::of(1e-9) * (S::one() + (b - a).abs());
        if (a + b).abs() > slack {
            return Err(Error::InvalidCurve(
                "symmetric shortening needs a domain symmetric about zero".into(),
            ));
        }
        (-eta, eta)
    } else {
        (a, a + eta)
    };

    let original_length = path.length();
    let probe = excess::excess(alg, path, cut_window.0, cut_window.1)?;
    if probe.value < params.excess_threshold {
        return Ok(ShortenOutcome {
            curve: path.clone(),
            ledger: SurgeryLedger {
                original_length,
                cut: None,
                stages: Vec::new(),
                final_length: original_length,
                net_gain: S::zero(),
                endpoint_residual: S::zero(),
                status: ShortenStatus::NoNetGain,
            },
        });
    }

    let (mut cur, cut_report) = surgery::cut(alg, path, cut_window.0, cut_window.1)?;
    if symmetric {
        // The cut shortened the domain on the right; shift half the removed
        // duration back to keep it symmetric.
        let removed = path.duration() - cur.duration();
        cur = cur.translate_time(removed / S::of(2.0));
    }

    let goal_scale = S::one() + path.endpoint(alg).log().max_abs();
    let mut stages = Vec::new();
    for layer in 2..=s {
        let e_vec = defect(alg, path, &cur);
        for lower in 1..layer {
            let leak = alg.layer_norm(lower, &e_vec);
            if leak > S::of(tol::PIPELINE_LAYER_RESIDUAL) * goal_scale {
                return Err(Error::UnexpectedDefect { layer: lower, residual: leak.as_f64() });
            }
        }
        let local = e_vec.coords()[alg.layer_range(layer)].to_vec();
        let defect_norm = linalg::norm(&local);
        if defect_norm <= S::of(tol::PIPELINE_LAYER_RESIDUAL) * goal_scale {
            stages.push(StageRecord {
                layer,
                defect_norm,
                windows: Vec::new(),
                determinant: S::zero(),
                devices: 0,
                added_length: S::zero(),
            });
            continue;
        }

        let rho = params.exponents[layer - 2];
        let w = eta.powf(rho);
        let (ca, cb) = cur.domain();
        let window = if symmetric {
            ((-w).max(ca), w.min(cb))
        } else {
            (ca, (ca + w).min(cb))
        };
        let (sel, coeff) = select_with_retry(alg, &cur, window, params.depth)?;

        let ys = bracket_decompose(alg, layer - 1, &local)?;
        let r = alg.rank();
        let mut devices: Vec<((S, S), Connector<S>)> = Vec::new();
        let mut added = S::zero();
        for j in 0..r {
            let mut z = alg.zero_vector();
            for (i, y) in ys.iter().enumerate() {
                z = z.add(&y.scale(coeff[i][j]));
            }
            if z.norm() <= S::of(1e-15) * (S::one() + defect_norm) {
                continue;
            }
            let conn = surgery::connect(alg, &z.neg())?;
            added = added + conn.length() + conn.length();
            devices.push((sel.intervals[j], conn));
        }
        let (next, _records) = if symmetric {
            surgery::insert_devices_symmetric(alg, &cur, &devices)
        } else {
            surgery::insert_devices(alg, &cur, &devices)
        };
        cur = next;
        stages.push(StageRecord {
            layer,
            defect_norm,
            windows: sel.intervals.clone(),
            determinant: sel.det,
            devices: devices.len(),
            added_length: added,
        });
    }

    let residual = defect(alg, path, &cur);
    let endpoint_residual = residual.max_abs();
    if endpoint_residual > S::of(tol::ENDPOINT_RESIDUAL) * goal_scale {
        let layer = alg
            .lowest_nonzero_layer(&residual, S::zero())
            .unwrap_or(s);
        return Err(Error::UnexpectedDefect {
            layer,
            residual: endpoint_residual.as_f64(),
        });
    }

    let final_length = cur.length();
    let net_gain = original_length - final_length;
    let status = if net_gain > S::zero() {
        ShortenStatus::Shortened
    } else {
        ShortenStatus::NoNetGain
    };
    Ok(ShortenOutcome {
        curve: cur,
        ledger: SurgeryLedger {
            original_length,
            cut: Some(cut_report),
            stages,
            final_length,
            net_gain,
            endpoint_residual,
            status,
        },
    })
}

/// Interval selection plus inversion of its displacement matrix, with one
/// retry at a finer grid when the directions come out degenerate.
fn select_with_retry<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    cur: &HorizontalPath<S>,
    window: (S, S),
    depth: usize,
) -> Result<(IntervalSelection<S>, Vec<Vec<S>>)> {
    let mut last_err = None;
    for d in [depth, depth + 1] {
        match excess::select_intervals(alg, cur, window.0, window.1, d) {
            Ok(sel) => match coefficients_solve(&sel.increments) {
                Ok(coeff) => return Ok((sel, coeff)),
                Err(e) => last_err = Some(e),
            },
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("retry loop ran"))
}

/// One entry of a window sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint<S> {
    pub eta: S,
    pub ledger: SurgeryLedger<S>,
}

/// Runs the pipeline over several window sizes with the same exponents.
pub fn sweep<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    params: &ShortenParams<S>,
    etas: &[S],
    symmetric: bool,
) -> Result<Vec<SweepPoint<S>>> {
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let p = ShortenParams { eta, ..params.clone() };
        let outcome = run(alg, path, &p, symmetric)?;
        out.push(SweepPoint { eta, ledger: outcome.ledger });
    }
    Ok(out)
}

/// Least-squares slope of log(inserted length) against log(eta) over the
/// sweep points that actually inserted something. The repair cost of a
/// genuine corner grows faster than linearly in the window, which is what
/// makes the net gain positive for small windows.
pub fn cost_exponent<S: Scalar>(points: &[SweepPoint<S>]) -> Option<S> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let cost: S = p
            .ledger
            .stages
            .iter()
            .fold(S::zero(), |acc, st| acc + st.added_length);
        if cost > S::zero() && p.eta > S::zero() {
            xs.push(p.eta.ln());
            ys.push(cost.ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let n = S::of_usize(xs.len());
    let mx = xs.iter().fold(S::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(S::zero(), |a, &y| a + y) / n;
    let mut num = S::zero();
    let mut den = S::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        num = num + (x - mx) * (y - my);
        den = den + (x - mx) * (x - mx);
    }
    if den == S::zero() {
        return None;
    }
    Some(num / den)
}
