//! Hall basis for the free nilpotent Lie algebra on r generators of step s.
//!
//! A Hall set is built over binary bracket trees ordered by degree first,
//! then recursively (leaves by generator index, composites lexicographically
//! by their children). A tree t = (u, v) of degree >= 2 belongs to the set
//! iff u and v do, u > v, and u is either a leaf or u = (u1, u2) with
//! u2 <= v. Degree-d members form a basis of the d-th layer, so the layer
//! dimensions follow the Witt formula.
//!
//! Structure constants come from rewriting an arbitrary bracket of two Hall
//! elements into the basis with antisymmetry and the Jacobi identity
//! [[a,b],c] = [a,[b,c]] - [b,[a,c]]; all coefficients stay integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Tree {
    Leaf { generator: usize },
    Node { left: usize, right: usize },
}

struct Arena {
    trees: Vec<Tree>,
    degree: Vec<usize>,
}

impl Arena {
    fn cmp(&self, a: usize, b: usize) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        match self.degree[a].cmp(&self.degree[b]) {
            Ordering::Equal => {}
            other => return other,
        }
        match (self.trees[a], self.trees[b]) {
            (Tree::Leaf { generator: ga }, Tree::Leaf { generator: gb }) => ga.cmp(&gb),
            (Tree::Node { left: la, right: ra }, Tree::Node { left: lb, right: rb }) => {
                self.cmp(la, lb).then_with(|| self.cmp(ra, rb))
            }
            // Equal degree >= 2 never mixes leaves and nodes.
            (Tree::Leaf { .. }, Tree::Node { .. }) => Ordering::Less,
            (Tree::Node { .. }, Tree::Leaf { .. }) => Ordering::Greater,
        }
    }

    /// Is the bracket (left, right) of two Hall elements itself in the set?
    fn is_standard_pair(&self, left: usize, right: usize) -> bool {
        if self.cmp(left, right) != Ordering::Greater {
            return false;
        }
        match self.trees[left] {
            Tree::Leaf { .. } => true,
            Tree::Node { right: lr, .. } => self.cmp(lr, right) != Ordering::Greater,
        }
    }
}

/// Integer linear combination of Hall basis elements, keyed by arena id.
type Combo = BTreeMap<usize, i64>;

fn combo_add(acc: &mut Combo, other: &Combo, scale: i64) {
    for (&id, &c) in other {
        let entry = acc.entry(id).or_insert(0);
        *entry += scale * c;
        if *entry == 0 {
            acc.remove(&id);
        }
    }
}

struct Rewriter<'a> {
    arena: &'a Arena,
    step: usize,
    node_id: &'a HashMap<(usize, usize), usize>,
    memo: HashMap<(usize, usize), Combo>,
}

impl Rewriter<'_> {
    /// [u, v] expanded over the Hall basis, for Hall elements u, v.
    fn expand(&mut self, u: usize, v: usize) -> Combo {
        if u == v || self.arena.degree[u] + self.arena.degree[v] > self.step {
            return Combo::new();
        }
        if let Some(hit) = self.memo.get(&(u, v)) {
            return hit.clone();
        }
        let result = if self.arena.cmp(u, v) == Ordering::Less {
            let mut neg = Combo::new();
            let flipped = self.expand(v, u);
            combo_add(&mut neg, &flipped, -1);
            neg
        } else if self.arena.is_standard_pair(u, v) {
            let mut one = Combo::new();
            one.insert(*self.node_id.get(&(u, v)).expect("standard pair registered"), 1);
            one
        } else {
            // u = (u1, u2) with u2 > v: Jacobi.
            let (u1, u2) = match self.arena.trees[u] {
                Tree::Node { left, right } => (left, right),
                Tree::Leaf { .. } => unreachable!("a leaf > v is always a standard pair"),
            };
            let mut acc = Combo::new();
            let inner = self.expand(u2, v);
            for (&w, &c) in &inner {
                let outer = self.expand(u1, w);
                combo_add(&mut acc, &outer, c);
            }
            let inner = self.expand(u1, v);
            for (&w, &c) in &inner {
                let outer = self.expand(u2, w);
                combo_add(&mut acc, &outer, -c);
            }
            acc
        };
        self.memo.insert((u, v), result.clone());
        result
    }
}

pub(crate) struct FreeNilpotentTable {
    pub layer_dims: Vec<usize>,
    /// `brackets[i][j]` for basis indices i < j: sparse expansion of
    /// [X_i, X_j], entries (k, integer coefficient).
    pub brackets: Vec<Vec<Vec<(usize, i64)>>>,
}

/// Hall-basis structure table for the free nilpotent Lie algebra.
pub(crate) fn free_nilpotent(rank: usize, step: usize) -> FreeNilpotentTable {
    assert!(rank >= 2 && step >= 1);

    let mut arena = Arena { trees: Vec::new(), degree: Vec::new() };
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); step + 1];
    for g in 0..rank {
        arena.trees.push(Tree::Leaf { generator: g });
        arena.degree.push(1);
        by_degree[1].push(g);
    }
    let mut node_id = HashMap::new();
    for d in 2..=step {
        let mut members = Vec::new();
        for d_left in 1..d {
            let d_right = d - d_left;
            for li in 0..by_degree[d_left].len() {
                for ri in 0..by_degree[d_right].len() {
                    let (left, right) = (by_degree[d_left][li], by_degree[d_right][ri]);
                    if arena.is_standard_pair(left, right) {
                        arena.trees.push(Tree::Node { left, right });
                        arena.degree.push(d);
                        members.push(arena.trees.len() - 1);
                        node_id.insert((left, right), arena.trees.len() - 1);
                    }
                }
            }
        }
        members.sort_by(|&a, &b| arena.cmp(a, b));
        by_degree[d] = members;
    }

    // Basis order: by degree, then Hall order within each degree.
    let mut basis: Vec<usize> = Vec::new();
    for d in 1..=step {
        basis.extend(&by_degree[d]);
    }
    let index_of: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let layer_dims: Vec<usize> = (1..=step).map(|d| by_degree[d].len()).collect();
    let n = basis.len();

    let mut rewriter = Rewriter { arena: &arena, step, node_id: &node_id, memo: HashMap::new() };
    let mut brackets = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if arena.degree[basis[i]] + arena.degree[basis[j]] > step {
                continue;
            }
            let combo = rewriter.expand(basis[i], basis[j]);
            brackets[i][j] = combo
                .iter()
                .map(|(&id, &c)| (*index_of.get(&id).expect("basis member"), c))
                .collect();
        }
    }

    FreeNilpotentTable { layer_dims, brackets }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Witt's formula via the Moebius function: an oracle independent of the
    /// Hall construction.
    fn witt(rank: usize, degree: usize) -> usize {
        fn moebius(mut n: usize) -> i64 {
            let mut m = 1i64;
            let mut p = 2;
            while p * p <= n {
                if n % p == 0 {
                    n /= p;
                    if n % p == 0 {
                        return 0;
                    }
                    m = -m;
                }
                p += 1;
            }
            if n > 1 {
                m = -m;
            }
            m
        }
        let mut total = 0i64;
        for e in 1..=degree {
            if degree % e == 0 {
                total += moebius(e) * (rank as i64).pow((degree / e) as u32);
            }
        }
        (total / degree as i64) as usize
    }

    #[test]
    fn layer_dimensions_match_the_witt_formula() {
        for (rank, step) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2)] {
            let table = free_nilpotent(rank, step);
            let expected: Vec<usize> = (1..=step).map(|d| witt(rank, d)).collect();
            assert_eq!(table.layer_dims, expected, "rank {rank}, step {step}");
        }
    }

    #[test]
    fn known_small_dimensions() {
        assert_eq!(free_nilpotent(2, 2).layer_dims, vec![2, 1]);
        assert_eq!(free_nilpotent(2, 3).layer_dims, vec![2, 1, 2]);
        assert_eq!(free_nilpotent(3, 2).layer_dims, vec![3, 3]);
    }

    #[test]
    fn rank_two_step_three_table_by_hand() {
        // Basis: X1, X2, [X2,X1], [[X2,X1],X1], [[X2,X1],X2] (Hall order).
        let t = free_nilpotent(2, 3);
        assert_eq!(t.brackets[0][1], vec![(2, -1)]); // [X1,X2] = -[X2,X1]
        assert_eq!(t.brackets[0][2], vec![(3, -1)]); // [X1,[X2,X1]] = -[[X2,X1],X1]
        assert_eq!(t.brackets[1][2], vec![(4, -1)]); // [X2,[X2,X1]] = -[[X2,X1],X2]
    }
}
