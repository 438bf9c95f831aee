//! Horizontal curves with piecewise-constant controls.
//!
//! A path stores a start point, a start time, and an ordered list of pieces
//! (duration, control in the horizontal layer). The lifted curve follows
//! gamma(t) = gamma(t_k) * exp((t - t_k) h_k) on each piece, so evaluation at
//! piece boundaries is an exact fold of group products. General measurable
//! controls are approximated from outside by refining the piece list.

use serde::Serialize;

use crate::algebra::StratifiedAlgebra;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg;
use crate::scalar::Scalar;

/// One constant-control piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Piece<S> {
    pub dt: S,
    pub control: Vec<S>,
}

/// A horizontal path with piecewise-constant controls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorizontalPath<S> {
    start: GroupElement<S>,
    t0: S,
    pieces: Vec<Piece<S>>,
}

/// Sampled evaluation of a path on a grid of times.
#[derive(Clone, Debug, Serialize)]
pub struct EvalGrid<S> {
    pub times: Vec<S>,
    pub points: Vec<GroupElement<S>>,
}

fn exp_piece<S: Scalar>(alg: &StratifiedAlgebra<S>, dt: S, control: &[S]) -> GroupElement<S> {
    let scaled: Vec<S> = control.iter().map(|&c| c * dt).collect();
    alg.exp(alg.horizontal(&scaled))
}

impl<S: Scalar> HorizontalPath<S> {
    /// Lifts piecewise-constant controls from a start point. Every control
    /// must have the horizontal dimension and every duration must be
    /// positive and finite.
    pub fn lift(
        alg: &StratifiedAlgebra<S>,
        start: GroupElement<S>,
        t0: S,
        pieces: Vec<(S, Vec<S>)>,
    ) -> Result<Self> {
        assert_eq!(start.log().len(), alg.n(), "dimension mismatch");
        if !t0.is_finite() {
            return Err(Error::InvalidCurve("start time is not finite".into()));
        }
        let mut out = Vec::with_capacity(pieces.len());
        for (idx, (dt, control)) in pieces.into_iter().enumerate() {
            if !(dt > S::zero()) || !dt.is_finite() {
                return Err(Error::InvalidCurve(format!("piece {idx} has nonpositive duration")));
            }
            if control.len() != alg.rank() {
                return Err(Error::InvalidCurve(format!(
                    "piece {idx} control has length {}, expected the horizontal rank {}",
                    control.len(),
                    alg.rank()
                )));
            }
            if control.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCurve(format!("piece {idx} control is not finite")));
            }
            out.push(Piece { dt, control });
        }
        Ok(Self { start, t0, pieces: out })
    }

    /// A zero-duration path sitting at one point.
    pub fn point(start: GroupElement<S>, t0: S) -> Self {
        Self { start, t0, pieces: Vec::new() }
    }

    pub fn start(&self) -> &GroupElement<S> {
        &self.start
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    pub fn t_start(&self) -> S {
        self.t0
    }

    /// End of the domain; accumulated exactly like `eval` accumulates time,
    /// so boundary comparisons are bitwise consistent.
    pub fn t_end(&self) -> S {
        self.pieces.iter().fold(self.t0, |acc, p| acc + p.dt)
    }

    pub fn domain(&self) -> (S, S) {
        (self.t0, self.t_end())
    }

    pub fn duration(&self) -> S {
        self.t_end() - self.t0
    }

    /// Length of the horizontal lift: sum of dt * |control|.
    pub fn length(&self) -> S {
        self.pieces
            .iter()
            .fold(S::zero(), |acc, p| acc + p.dt * linalg::norm(&p.control))
    }

    /// True when every control has unit Euclidean norm (within the pinned
    /// arclength slack).
    pub fn is_arclength(&self) -> bool {
        let tol = S::of(crate::tol::ARCLENGTH);
        self.pieces
            .iter()
            .all(|p| (linalg::norm(&p.control) - S::one()).abs() <= tol)
    }

    fn assert_inside(&self, t: S) -> S {
        let (a, b) = self.domain();
        let tol = S::of(1e-9) * (S::one() + (b - a).abs());
        assert!(
            t >= a - tol && t <= b + tol,
            "time outside the curve domain"
        );
        t.max(a).min(b)
    }

    /// Point of the lifted curve at time t. Panics when t lies outside the
    /// domain (beyond a small clamping slack).
    pub fn eval(&self, alg: &StratifiedAlgebra<S>, t: S) -> GroupElement<S> {
        let t = self.assert_inside(t);
        let mut acc = self.start.clone();
        let mut cum = self.t0;
        for piece in &self.pieces {
            if cum + piece.dt <= t {
                acc = alg.product(&acc, &exp_piece(alg, piece.dt, &piece.control));
                cum = cum + piece.dt;
            } else {
                let rem = t - cum;
                if rem > S::zero() {
                    acc = alg.product(&acc, &exp_piece(alg, rem, &piece.control));
                }
                return acc;
            }
        }
        acc
    }

    /// Endpoint by a single fold of products; bitwise equal to `eval` at the
    /// end of the domain.
    pub fn endpoint(&self, alg: &StratifiedAlgebra<S>) -> GroupElement<S> {
        self.pieces.iter().fold(self.start.clone(), |acc, p| {
            alg.product(&acc, &exp_piece(alg, p.dt, &p.control))
        })
    }

    /// Left-invariant increment gamma(s)^{-1} gamma(t); computed directly
    /// from the controls between s and t, so it never touches the start
    /// point. Panics when the times are out of order or out of domain.
    pub fn increment(&self, alg: &StratifiedAlgebra<S>, s: S, t: S) -> GroupElement<S> {
        let s = self.assert_inside(s);
        let t = self.assert_inside(t);
        assert!(s <= t, "increment needs s <= t");
        let mut acc = alg.identity();
        let mut cum = self.t0;
        for piece in &self.pieces {
            let lo = cum.max(s);
            let hi = (cum + piece.dt).min(t);
            if hi > lo {
                acc = alg.product(&acc, &exp_piece(alg, hi - lo, &piece.control));
            }
            cum = cum + piece.dt;
            if cum >= t {
                break;
            }
        }
        acc
    }

    /// Horizontal projection of the curve at time t (length r). Projection
    /// is additive along products, so this is the start projection plus the
    /// time integral of the control.
    pub fn projection_at(&self, alg: &StratifiedAlgebra<S>, t: S) -> Vec<S> {
        let t = self.assert_inside(t);
        let mut out = alg.horizontal_projection(&self.start);
        let mut cum = self.t0;
        for piece in &self.pieces {
            let hi = (cum + piece.dt).min(t);
            if hi > cum {
                let w = hi - cum;
                for (o, &c) in out.iter_mut().zip(&piece.control) {
                    *o = *o + w * c;
                }
            }
            cum = cum + piece.dt;
            if cum >= t {
                break;
            }
        }
        out
    }

    /// Integral of the control over [s, t] (length r): the horizontal part
    /// of the increment.
    pub fn horizontal_increment(&self, s: S, t: S) -> Vec<S> {
        let s = self.assert_inside(s);
        let t = self.assert_inside(t);
        assert!(s <= t, "increment needs s <= t");
        let r = self.pieces.first().map_or(0, |p| p.control.len());
        let mut out = vec![S::zero(); r];
        let mut cum = self.t0;
        for piece in &self.pieces {
            let lo = cum.max(s);
            let hi = (cum + piece.dt).min(t);
            if hi > lo {
                let w = hi - lo;
                for (o, &c) in out.iter_mut().zip(&piece.control) {
                    *o = *o + w * c;
                }
            }
            cum = cum + piece.dt;
            if cum >= t {
                break;
            }
        }
        out
    }

    /// The restriction to [s, t], starting at gamma(s).
    pub fn restrict(&self, alg: &StratifiedAlgebra<S>, s: S, t: S) -> Self {
        let s = self.assert_inside(s);
        let t = self.assert_inside(t);
        assert!(s <= t, "restrict needs s <= t");
        let start = self.eval(alg, s);
        let mut pieces = Vec::new();
        let mut cum = self.t0;
        for piece in &self.pieces {
            let lo = cum.max(s);
            let hi = (cum + piece.dt).min(t);
            if hi > lo {
                pieces.push(Piece { dt: hi - lo, control: piece.control.clone() });
            }
            cum = cum + piece.dt;
            if cum >= t {
                break;
            }
        }
        Self { start, t0: s, pieces }
    }

    /// Concatenation: runs self, then other left-translated to continue from
    /// self's endpoint. Piece lists concatenate, so the operation is
    /// associative on the nose; other's start point is discarded.
    pub fn concat(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self { start: self.start.clone(), t0: self.t0, pieces }
    }

    /// Time reversal: runs from the endpoint back to the start.
    pub fn reverse(&self, alg: &StratifiedAlgebra<S>) -> Self {
        let start = self.endpoint(alg);
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece { dt: p.dt, control: p.control.iter().map(|&c| -c).collect() })
            .collect();
        Self { start, t0: self.t0, pieces }
    }

    /// Same trace, domain shifted by delta.
    pub fn translate_time(&self, delta: S) -> Self {
        Self { start: self.start.clone(), t0: self.t0 + delta, pieces: self.pieces.clone() }
    }

    /// Same trace, domain shifted so the midpoint is exactly zero.
    pub fn recentered(&self) -> Self {
        let half = self.duration() / S::of(2.0);
        Self { start: self.start.clone(), t0: -half, pieces: self.pieces.clone() }
    }

    /// Left translation by g.
    pub fn left_translate(&self, alg: &StratifiedAlgebra<S>, g: &GroupElement<S>) -> Self {
        Self {
            start: alg.product(g, &self.start),
            t0: self.t0,
            pieces: self.pieces.clone(),
        }
    }

    /// Spatial dilation delta_lambda composed with the curve: controls scale
    /// by lambda, durations stay. Generally not arclength afterwards.
    pub fn dilated_space(&self, alg: &StratifiedAlgebra<S>, lambda: S) -> Self {
        assert!(lambda > S::zero(), "dilation factor must be positive");
        Self {
            start: alg.exp(alg.dilate(lambda, self.start.log())),
            t0: self.t0,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { dt: p.dt, control: p.control.iter().map(|&c| c * lambda).collect() })
                .collect(),
        }
    }

    /// Dilation with matching time rescale, t -> delta_lambda(gamma(t/lambda)):
    /// controls unchanged, durations and start time scale by lambda. Preserves
    /// arclength and multiplies length by lambda.
    pub fn dilated_reparam(&self, alg: &StratifiedAlgebra<S>, lambda: S) -> Self {
        assert!(lambda > S::zero(), "dilation factor must be positive");
        Self {
            start: alg.exp(alg.dilate(lambda, self.start.log())),
            t0: self.t0 * lambda,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { dt: p.dt * lambda, control: p.control.clone() })
                .collect(),
        }
    }

    /// Evaluates the path on a grid of times.
    pub fn sample(&self, alg: &StratifiedAlgebra<S>, times: &[S]) -> EvalGrid<S> {
        EvalGrid {
            times: times.to_vec(),
            points: times.iter().map(|&t| self.eval(alg, t)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Alg = StratifiedAlgebra<f64>;

    fn h1() -> Alg {
        Alg::heisenberg(1).unwrap()
    }

    /// Unit-speed corner: east for one unit, then north for one unit.
    fn corner(alg: &Alg) -> HorizontalPath<f64> {
        HorizontalPath::lift(
            alg,
            alg.identity(),
            0.0,
            vec![(1.0, vec![1.0, 0.0]), (1.0, vec![0.0, 1.0])],
        )
        .unwrap()
    }

    #[test]
    fn corner_endpoint_is_the_known_point() {
        let h = h1();
        let p = corner(&h);
        assert_eq!(p.endpoint(&h).log().coords(), &[1.0, 1.0, 0.5]);
        assert_eq!(p.length(), 2.0);
        assert!(p.is_arclength());
    }

    #[test]
    fn straight_segment_lifts_to_a_one_parameter_subgroup() {
        let h = h1();
        let v = [0.6, 0.8];
        let p = HorizontalPath::lift(&h, h.identity(), 0.0, vec![(2.0, v.to_vec())]).unwrap();
        for k in 0..=10 {
            let t = 0.2 * k as f64;
            let got = p.eval(&h, t);
            assert!((got.log().coords()[0] - t * v[0]).abs() < 1e-15);
            assert!((got.log().coords()[1] - t * v[1]).abs() < 1e-15);
            assert!(got.log().coords()[2].abs() < 1e-15);
        }
    }

    #[test]
    fn eval_at_the_domain_end_is_bitwise_the_endpoint_fold() {
        let h = h1();
        let p = HorizontalPath::lift(
            &h,
            h.exp(h.vector(vec![0.1, -0.2, 0.3])),
            -0.7,
            vec![
                (0.3, vec![1.0, 0.0]),
                (0.41, vec![0.0, 1.0]),
                (0.29, vec![-0.6, 0.8]),
            ],
        )
        .unwrap();
        let (_, b) = p.domain();
        assert_eq!(p.eval(&h, b), p.endpoint(&h));
    }

    #[test]
    fn projection_is_additive_along_the_curve() {
        let h = h1();
        let p = corner(&h);
        for k in 0..=20 {
            let t = 0.1 * k as f64;
            let via_group = h.horizontal_projection(&p.eval(&h, t));
            let via_integral = p.projection_at(&h, t);
            for (a, b) in via_group.iter().zip(&via_integral) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn increment_is_left_invariant() {
        let h = h1();
        let p = HorizontalPath::lift(
            &h,
            h.exp(h.vector(vec![0.4, 0.2, -0.1])),
            0.0,
            vec![(0.8, vec![1.0, 0.0]), (0.7, vec![0.0, -1.0]), (0.5, vec![0.8, 0.6])],
        )
        .unwrap();
        for (s, t) in [(0.0, 2.0), (0.1, 0.75), (0.85, 1.9), (1.5, 1.5)] {
            let inc = p.increment(&h, s, t);
            let check = h.product(&p.eval(&h, s).inverse(), &p.eval(&h, t));
            assert!(inc.log().sub(check.log()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn restrict_then_concat_recovers_the_curve() {
        let h = h1();
        let p = corner(&h);
        let front = p.restrict(&h, 0.0, 0.7);
        let back = p.restrict(&h, 0.7, 2.0);
        let glued = front.concat(&back);
        assert_eq!(glued.domain(), (0.0, 2.0));
        assert!(glued.endpoint(&h).log().sub(p.endpoint(&h).log()).max_abs() < 1e-15);
        assert_eq!(glued.length(), p.length());
    }

    #[test]
    fn concat_is_associative_on_piece_lists() {
        let h = h1();
        let p = corner(&h);
        let (a, b, c) = (
            p.restrict(&h, 0.0, 0.5),
            p.restrict(&h, 0.5, 1.25),
            p.restrict(&h, 1.25, 2.0),
        );
        let left = a.concat(&b).concat(&c);
        let right = a.concat(&b.concat(&c));
        assert_eq!(left.pieces(), right.pieces());
        assert_eq!(left.start(), right.start());
    }

    #[test]
    fn reverse_runs_the_trace_backwards() {
        let h = h1();
        let p = corner(&h);
        let r = p.reverse(&h);
        assert_eq!(r.start(), &p.endpoint(&h));
        let back = r.reverse(&h);
        assert_eq!(back.pieces(), p.pieces());
        assert!(back.start().log().sub(p.start().log()).max_abs() < 1e-15);
        // Running the curve and then its reverse comes home.
        let loop_end = p.concat(&r).endpoint(&h);
        assert!(loop_end.log().sub(p.start().log()).max_abs() < 1e-15);
    }

    #[test]
    fn reparam_dilation_scales_length_and_keeps_controls() {
        let h = h1();
        let p = corner(&h);
        let q = p.dilated_reparam(&h, 2.5);
        assert!((q.length() - 2.5 * p.length()).abs() < 1e-15);
        assert!(q.is_arclength());
        let qe = q.endpoint(&h);
        let expect = h.dilate(2.5, p.endpoint(&h).log());
        assert!(qe.log().sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn lift_rejects_bad_pieces() {
        let h = h1();
        assert!(matches!(
            HorizontalPath::lift(&h, h.identity(), 0.0, vec![(0.0, vec![1.0, 0.0])]),
            Err(Error::InvalidCurve(_))
        ));
        assert!(matches!(
            HorizontalPath::lift(&h, h.identity(), 0.0, vec![(1.0, vec![1.0, 0.0, 0.0])]),
            Err(Error::InvalidCurve(_))
        ));
    }
}
