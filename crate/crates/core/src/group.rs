//! The Carnot group attached to a stratified algebra, in exponential
//! coordinates of the first kind: a point is the log of a group element,
//! products go through the truncated BCH series, and inverses are exact
//! sign flips.

use serde::Serialize;

use crate::algebra::{AlgebraVector, StratifiedAlgebra};
use crate::bch::Letter;
use crate::scalar::Scalar;

/// A group element, stored as its logarithm.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GroupElement<S> {
    log: AlgebraVector<S>,
}

impl<S: Scalar> GroupElement<S> {
    pub fn identity(n: usize) -> Self {
        Self { log: AlgebraVector::zero(n) }
    }

    pub fn from_log(log: AlgebraVector<S>) -> Self {
        Self { log }
    }

    pub fn log(&self) -> &AlgebraVector<S> {
        &self.log
    }

    pub fn into_log(self) -> AlgebraVector<S> {
        self.log
    }

    /// exp(X)^{-1} = exp(-X), exactly.
    pub fn inverse(&self) -> Self {
        Self { log: self.log.neg() }
    }
}

impl<S: Scalar> StratifiedAlgebra<S> {
    pub fn exp(&self, v: AlgebraVector<S>) -> GroupElement<S> {
        assert_eq!(v.len(), self.n(), "dimension mismatch");
        GroupElement::from_log(v)
    }

    pub fn identity(&self) -> GroupElement<S> {
        GroupElement::identity(self.n())
    }

    /// Group product via the precomputed BCH word table.
    /// Panics on dimension mismatch.
    pub fn product(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        let x = g.log();
        let y = h.log();
        assert_eq!(x.len(), self.n(), "dimension mismatch");
        assert_eq!(y.len(), self.n(), "dimension mismatch");
        let mut acc = self.zero_vector();
        for term in &self.bch {
            let last = match *term.word.last().expect("nonempty word") {
                Letter::X => x,
                Letter::Y => y,
            };
            if term.word.len() == 1 {
                acc.add_assign_scaled(term.coeff, last);
                continue;
            }
            let mut w = last.clone();
            for letter in term.word[..term.word.len() - 1].iter().rev() {
                let operand = match letter {
                    Letter::X => x,
                    Letter::Y => y,
                };
                w = self.bracket(operand, &w);
                if w.max_abs() == S::zero() {
                    break;
                }
            }
            acc.add_assign_scaled(term.coeff, &w);
        }
        GroupElement::from_log(acc)
    }

    /// Product of several factors, left to right.
    pub fn product_all<'a>(&self, factors: impl IntoIterator<Item = &'a GroupElement<S>>) -> GroupElement<S>
    where
        S: 'a,
    {
        factors
            .into_iter()
            .fold(self.identity(), |acc, g| self.product(&acc, g))
    }

    /// g h g^{-1} by group products.
    pub fn conjugate(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        self.product(&self.product(g, h), &g.inverse())
    }

    /// g h g^{-1} through the adjoint series exp(ad_X) applied to log h;
    /// an independent evaluation route used to cross-check `conjugate`.
    pub fn conjugate_via_adjoint(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        self.exp(self.adjoint(g.log(), h.log()))
    }

    /// exp(ad_x) y = sum over k of ad_x^k y / k!, truncated by nilpotency.
    pub fn adjoint(&self, x: &AlgebraVector<S>, y: &AlgebraVector<S>) -> AlgebraVector<S> {
        let mut acc = y.clone();
        let mut term = y.clone();
        let mut factorial = S::one();
        for k in 1..self.step() {
            term = self.bracket(x, &term);
            if term.max_abs() == S::zero() {
                break;
            }
            factorial = factorial * S::of_usize(k);
            acc.add_assign_scaled(S::one() / factorial, &term);
        }
        acc
    }

    /// The group commutator g h g^{-1} h^{-1}.
    pub fn commutator(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        self.product(&self.conjugate(g, h), &h.inverse())
    }

    /// Projection of log(g) onto layer j, zero-padded.
    pub fn pi_layer(&self, j: usize, g: &GroupElement<S>) -> AlgebraVector<S> {
        self.layer_component(j, g.log())
    }

    /// Horizontal projection: the first-layer coordinates of log(g).
    pub fn horizontal_projection(&self, g: &GroupElement<S>) -> Vec<S> {
        g.log().coords()[..self.rank()].to_vec()
    }

    /// Homogeneous norm of g.
    pub fn homogeneous_norm(&self, g: &GroupElement<S>) -> S {
        self.homogeneous_norm_of_log(g.log())
    }
}
