//! Flatness defect of a horizontal curve, and selection of subintervals
//! whose displacements span the horizontal layer.
//!
//! The excess of a curve over a window J is the smallest singular value of
//! its averaged control moment: with G = (1/|J|) int_J h h^T dt, the excess
//! is sqrt(lambda_min(G)) and the minimizing unit vector is the direction
//! the curve moves least along. A straight segment has excess zero; large
//! excess certifies that some surgery can shorten the curve.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::StratifiedAlgebra;
use crate::curve::HorizontalPath;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol;

/// Excess of a curve over one window.
#[derive(Clone, Debug, Serialize)]
pub struct ExcessReport<S> {
    pub window: (S, S),
    /// Averaged control moment, row-major r x r.
    pub gram: Vec<Vec<S>>,
    /// sqrt of the smallest eigenvalue of the moment.
    pub value: S,
    /// Unit eigenvector attaining it.
    pub minimizer: Vec<S>,
}

/// Disjoint subintervals with independent horizontal displacements.
#[derive(Clone, Debug, Serialize)]
pub struct IntervalSelection<S> {
    /// Ordered, pairwise disjoint subwindows.
    pub intervals: Vec<(S, S)>,
    /// Horizontal displacement across each subwindow, one row per interval.
    pub increments: Vec<Vec<S>>,
    /// Signed determinant of the displacement rows.
    pub det: S,
}

fn checked_window<S: Scalar>(path: &HorizontalPath<S>, lo: S, hi: S) -> Result<(S, S)> {
    if !(lo < hi) {
        return Err(Error::EmptyWindow);
    }
    let (a, b) = path.domain();
    let slack = S::of(1e-9) * (S::one() + (b - a).abs());
    if lo < a - slack || hi > b + slack {
        return Err(Error::WindowOutOfDomain {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    Ok((lo.max(a), hi.min(b)))
}

/// Averaged control moment of the curve over [lo, hi], row-major r x r.
pub fn control_moment<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    lo: S,
    hi: S,
) -> Result<Vec<Vec<S>>> {
    let (lo, hi) = checked_window(path, lo, hi)?;
    let r = alg.rank();
    let mut gram = vec![vec![S::zero(); r]; r];
    let mut cum = path.t_start();
    for piece in path.pieces() {
        let a = cum.max(lo);
        let b = (cum + piece.dt).min(hi);
        if b > a {
            let w = b - a;
            for i in 0..r {
                for j in 0..r {
                    gram[i][j] = gram[i][j] + w * piece.control[i] * piece.control[j];
                }
            }
        }
        cum = cum + piece.dt;
        if cum >= hi {
            break;
        }
    }
    let inv = S::one() / (hi - lo);
    for row in &mut gram {
        for x in row.iter_mut() {
            *x = *x * inv;
        }
    }
    Ok(gram)
}

/// Excess of the curve over the window [lo, hi].
pub fn excess<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    lo: S,
    hi: S,
) -> Result<ExcessReport<S>> {
    let (lo, hi) = checked_window(path, lo, hi)?;
    let gram = control_moment(alg, path, lo, hi)?;
    let (lambda, minimizer) = linalg::smallest_eigenpair(&gram, S::of(tol::JACOBI_EIGEN));
    let value = lambda.max(S::zero()).sqrt();
    Ok(ExcessReport { window: (lo, hi), gram, value, minimizer })
}

/// Depth of the dyadic search grid that keeps the interval enumeration
/// affordable for the given horizontal rank.
pub fn default_depth(rank: usize) -> usize {
    match rank {
        0..=2 => 6,
        3 => 5,
        4 => 4,
        _ => 3,
    }
}

/// One candidate interval in fine-grid units, half-open [lo, hi).
type Cell = (u32, u32);

fn candidate_cells(depth: usize) -> Vec<Cell> {
    let fine = 1u32 << depth;
    let mut out = Vec::new();
    for level in 1..=depth {
        let width = fine >> level;
        for j in 0..(1u32 << level) {
            out.push((j * width, (j + 1) * width));
        }
    }
    out.sort();
    out.dedup();
    out
}

struct SelectContext<S> {
    cells: Vec<Cell>,
    /// Horizontal displacement across each candidate cell.
    deltas: Vec<Vec<S>>,
    rank: usize,
}

impl<S: Scalar> SelectContext<S> {
    /// Best extension of `chosen` (indices into cells, increasing, disjoint)
    /// by cells starting at or after `from`. Returns (|det|, tuple).
    fn extend(&self, chosen: &mut Vec<usize>, from: u32) -> Option<(S, Vec<usize>)> {
        if chosen.len() == self.rank {
            let rows: Vec<Vec<S>> = chosen.iter().map(|&i| self.deltas[i].clone()).collect();
            let d = linalg::det(&rows).abs();
            return Some((d, chosen.clone()));
        }
        let mut best: Option<(S, Vec<usize>)> = None;
        for (idx, cell) in self.cells.iter().enumerate() {
            if cell.0 < from {
                continue;
            }
            chosen.push(idx);
            if let Some(cand) = self.extend(chosen, cell.1) {
                best = Some(match best {
                    None => cand,
                    Some(cur) => pick(cur, cand),
                });
            }
            chosen.pop();
        }
        best
    }
}

/// Total order used to reduce candidates deterministically: larger |det|
/// wins, ties go to the lexicographically smaller tuple.
fn pick<S: Scalar>(a: (S, Vec<usize>), b: (S, Vec<usize>)) -> (S, Vec<usize>) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Picks `rank` disjoint subintervals of [lo, hi], ordered left to right,
/// whose horizontal displacements maximize |det| over a dyadic grid of the
/// given depth, then improves the endpoints by coordinate ascent on the fine
/// grid. Fails when the curve does not move in enough independent directions
/// over the window.
pub fn select_intervals<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    lo: S,
    hi: S,
    depth: usize,
) -> Result<IntervalSelection<S>> {
    let (lo, hi) = checked_window(path, lo, hi)?;
    let r = alg.rank();
    let depth = depth.max(1);
    let fine = 1u32 << depth;
    assert!(
        (fine as usize) >= r,
        "grid too coarse for the horizontal rank"
    );
    let span = hi - lo;
    let step = span / S::of_usize(fine as usize);
    let time_of = |u: u32| {
        if u == fine {
            hi
        } else {
            lo + S::of_usize(u as usize) * step
        }
    };
    let delta_of = |cell: Cell| path.horizontal_increment(time_of(cell.0), time_of(cell.1));

    let cells = candidate_cells(depth);
    let deltas: Vec<Vec<S>> = cells.iter().map(|&c| delta_of(c)).collect();
    let ctx = SelectContext { cells, deltas, rank: r };

    let seeds: Vec<usize> = (0..ctx.cells.len()).collect();
    let best = seeds
        .par_iter()
        .filter_map(|&first| {
            let mut chosen = vec![first];
            ctx.extend(&mut chosen, ctx.cells[first].1)
        })
        .reduce_with(pick);

    let Some((_, tuple)) = best else {
        return Err(Error::DegenerateDirections { det: 0.0, threshold: 0.0 });
    };
    let mut picked: Vec<Cell> = tuple.iter().map(|&i| ctx.cells[i]).collect();

    // Coordinate ascent: re-optimize each interval's endpoints on the fine
    // grid between its neighbors, holding the other rows fixed.
    let mut rows: Vec<Vec<S>> = picked.iter().map(|&c| delta_of(c)).collect();
    let mut det = linalg::det(&rows);
    for _ in 0..8 {
        let mut improved = false;
        for i in 0..picked.len() {
            let floor = if i == 0 { 0 } else { picked[i - 1].1 };
            let ceil = if i + 1 == picked.len() { fine } else { picked[i + 1].0 };
            let mut best_cell = picked[i];
            let mut best_abs = det.abs();
            for a in floor..ceil {
                for b in (a + 1)..=ceil {
                    rows[i] = delta_of((a, b));
                    let d = linalg::det(&rows).abs();
                    if d > best_abs {
                        best_abs = d;
                        best_cell = (a, b);
                    }
                }
            }
            if best_cell != picked[i] {
                picked[i] = best_cell;
                improved = true;
            }
            rows[i] = delta_of(picked[i]);
        }
        det = linalg::det(&rows);
        if !improved {
            break;
        }
    }

    let threshold = S::of(tol::DEGENERATE_DET) * span.powi(r as i32);
    if !(det.abs() > threshold) {
        return Err(Error::DegenerateDirections {
            det: det.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    Ok(IntervalSelection {
        intervals: picked.iter().map(|&(a, b)| (time_of(a), time_of(b))).collect(),
        increments: rows,
        det,
    })
}

/// Verifies the selection against the curve it came from: intervals ordered
/// and disjoint, increments matching the curve, determinant consistent.
pub fn verify_selection<S: Scalar>(
    path: &HorizontalPath<S>,
    sel: &IntervalSelection<S>,
) -> bool {
    let mut prev_hi = None;
    for (&(a, b), row) in sel.intervals.iter().zip(&sel.increments) {
        if !(a < b) {
            return false;
        }
        if let Some(p) = prev_hi {
            if a < p {
                return false;
            }
        }
        prev_hi = Some(b);
        let fresh = path.horizontal_increment(a, b);
        let diff = fresh
            .iter()
            .zip(row)
            .fold(S::zero(), |m, (&x, &y)| m.max((x - y).abs()));
        if diff > S::of(1e-12) {
            return false;
        }
    }
    (linalg::det(&sel.increments) - sel.det).abs() <= S::of(1e-12) * (S::one() + sel.det.abs())
}

/// Projection of the endpoint displacement onto the horizontal layer:
/// convenience used when reporting how a window contributes to the chord.
pub fn chord<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    path: &HorizontalPath<S>,
    lo: S,
    hi: S,
) -> (GroupElement<S>, S) {
    let g = path.increment(alg, lo, hi);
    let h = alg.horizontal_projection(&g);
    (g, linalg::norm(&h))
}
