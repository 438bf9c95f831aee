//! Truncated Baker-Campbell-Hausdorff series, precomputed once per step.
//!
//! The series for log(exp X exp Y) is a rational combination of right-nested
//! brackets indexed by alternating power blocks (k_1, l_1, ..., k_p, l_p)
//! with k_i + l_i >= 1:
//!
//!   sum over p of (-1)^(p+1)/p *
//!   sum over blocks of [X^k1 Y^l1 ... X^kp Y^lp] / (k_1! l_1! ... * total)
//!
//! where [.] is the right-nested bracket (ad of every letter but the last,
//! applied to the last) and `total` is the sum of all powers. In a step-s
//! algebra every term of total degree above s vanishes, so the sum is finite.
//!
//! Enumerating blocks per product would be wasteful: many compositions share
//! the same letter word, so the table aggregates exact rational coefficients
//! per word. Words whose last two letters coincide evaluate to a bracket of
//! an element with itself and are dropped; so are compositions whose final
//! block has trailing power l_p >= 2, or l_p = 0 with k_p != 1, since their
//! innermost bracket vanishes identically.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Letter {
    X,
    Y,
}

#[derive(Clone, Debug)]
pub(crate) struct BchTerm<S> {
    pub word: Vec<Letter>,
    pub coeff: S,
}

fn factorial(n: u32) -> i64 {
    (1..=i64::from(n)).product::<i64>().max(1)
}

/// All compositions into blocks (k_i, l_i), k_i + l_i >= 1, of total weight
/// <= step, paired with their exact coefficient. Visits each composition once.
fn visit_compositions(
    step: u32,
    blocks: &mut Vec<(u32, u32)>,
    weight: u32,
    out: &mut BTreeMap<Vec<Letter>, Ratio<i64>>,
) {
    if !blocks.is_empty() {
        let (k_last, l_last) = *blocks.last().expect("nonempty");
        let trailing_ok = l_last == 1 || (l_last == 0 && k_last == 1);
        if trailing_ok {
            let p = blocks.len() as i64;
            let sign = if p % 2 == 1 { 1 } else { -1 };
            let mut denom = p * i64::from(weight);
            let mut word = Vec::with_capacity(weight as usize);
            for &(k, l) in blocks.iter() {
                denom *= factorial(k) * factorial(l);
                word.extend(std::iter::repeat(Letter::X).take(k as usize));
                word.extend(std::iter::repeat(Letter::Y).take(l as usize));
            }
            if word.len() < 2 || word[word.len() - 1] != word[word.len() - 2] {
                *out.entry(word).or_insert_with(|| Ratio::new(0, 1)) += Ratio::new(sign, denom);
            }
        }
    }
    for size in 1..=(step - weight) {
        for k in 0..=size {
            blocks.push((k, size - k));
            visit_compositions(step, blocks, weight + size, out);
            blocks.pop();
        }
    }
}

/// The aggregated word table for a step-`step` algebra, in a deterministic
/// order (by word length, then lexicographically).
pub(crate) fn bch_terms<S: Scalar>(step: usize) -> Vec<BchTerm<S>> {
    let mut by_word = BTreeMap::new();
    visit_compositions(step as u32, &mut Vec::new(), 0, &mut by_word);
    let mut terms: Vec<(Vec<Letter>, Ratio<i64>)> = by_word
        .into_iter()
        .filter(|(_, c)| *c != Ratio::new(0, 1))
        .collect();
    terms.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
    terms
        .into_iter()
        .map(|(word, c)| BchTerm {
            word,
            coeff: S::of(*c.numer() as f64) / S::of(*c.denom() as f64),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Letter::{X, Y};

    fn coeff(terms: &[BchTerm<f64>], word: &[Letter]) -> f64 {
        terms
            .iter()
            .find(|t| t.word == word)
            .map(|t| t.coeff)
            .unwrap_or(0.0)
    }

    #[test]
    fn step_two_table_is_the_closed_form() {
        let terms = bch_terms::<f64>(2);
        assert_eq!(terms.len(), 4);
        assert_eq!(coeff(&terms, &[X]), 1.0);
        assert_eq!(coeff(&terms, &[Y]), 1.0);
        // 1/4 [X,Y] - 1/4 [Y,X] = 1/2 [X,Y].
        assert_eq!(coeff(&terms, &[X, Y]), 0.25);
        assert_eq!(coeff(&terms, &[Y, X]), -0.25);
    }

    #[test]
    fn degree_three_words_reproduce_the_twelfth_coefficients() {
        // After antisymmetry the degree-3 part must equal
        // 1/12 [X,[X,Y]] + 1/12 [Y,[Y,X]]:
        //   coeff(XXY) + coeff(XYX) * (-1) = 1/12,
        //   coeff(YYX) + coeff(YXY) * (-1) = 1/12.
        let terms = bch_terms::<f64>(3);
        let one_twelfth = 1.0 / 12.0;
        assert!((coeff(&terms, &[X, X, Y]) - coeff(&terms, &[X, Y, X]) - one_twelfth).abs() < 1e-15);
        assert!((coeff(&terms, &[Y, Y, X]) - coeff(&terms, &[Y, X, Y]) - one_twelfth).abs() < 1e-15);
    }

    #[test]
    fn words_never_end_in_a_repeated_letter() {
        for t in bch_terms::<f64>(5) {
            let n = t.word.len();
            assert!(n < 2 || t.word[n - 1] != t.word[n - 2]);
        }
    }
}
