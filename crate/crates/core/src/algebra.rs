//! Stratified nilpotent Lie algebras in an adapted basis.
//!
//! An algebra of step s splits as g = g_1 + ... + g_s with
//! [g_1, g_j] = g_{j+1}. Basis vectors are numbered layer by layer, so a
//! coordinate vector carries its layer decomposition implicitly. The bracket
//! is stored as a dense table of structure constants (every target here has
//! n well below 40), and the truncated BCH word table for the step is built
//! once at construction.

use serde::Serialize;

use crate::bch::{bch_terms, BchTerm};
use crate::error::{Error, Result};
use crate::hall::free_nilpotent;
use crate::linalg;
use crate::scalar::Scalar;

/// Element of the algebra, as coordinates over the adapted basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AlgebraVector<S> {
    coords: Vec<S>,
}

impl<S: Scalar> AlgebraVector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![S::zero(); n] }
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Euclidean norm of the raw coordinates.
    pub fn norm(&self) -> S {
        linalg::norm(&self.coords)
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn dot(&self, other: &Self) -> S {
        linalg::dot(&self.coords, &other.coords)
    }

    pub fn scale(&self, c: S) -> Self {
        Self { coords: self.coords.iter().map(|&x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Self { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Self { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { coords: self.coords.iter().map(|&x| -x).collect() }
    }

    pub(crate) fn add_assign_scaled(&mut self, c: S, other: &Self) {
        linalg::axpy(&mut self.coords, c, &other.coords);
    }
}

/// A stratified nilpotent Lie algebra with adapted basis and dense
/// structure constants.
#[derive(Clone, Debug)]
pub struct StratifiedAlgebra<S> {
    label: String,
    layer_dims: Vec<usize>,
    /// 1-based layer of each basis index.
    layer_of: Vec<usize>,
    /// Basis offset of each layer: layer j occupies
    /// `layer_offset[j-1] .. layer_offset[j-1] + layer_dims[j-1]`.
    layer_offset: Vec<usize>,
    /// Dense structure constants, `constants[(i * n + j) * n + k]` is the
    /// X_k-coefficient of [X_i, X_j].
    constants: Vec<S>,
    pub(crate) bch: Vec<BchTerm<S>>,
}

/// One sparse bracket entry for building an algebra: the expansion of
/// [X_i, X_j] for i < j as (k, coefficient) pairs. Indices are 0-based here;
/// the JSON file format is 1-based and converts on load.
pub type BracketEntry<S> = (usize, usize, Vec<(usize, S)>);

impl<S: Scalar> StratifiedAlgebra<S> {
    /// Builds and validates an algebra from layer dimensions and the i < j
    /// half of the bracket table; antisymmetry fills in the rest.
    pub fn from_parts(label: &str, layer_dims: &[usize], entries: &[BracketEntry<S>]) -> Result<Self> {
        if layer_dims.is_empty() {
            return Err(Error::InvalidAlgebra("no layers".into()));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidAlgebra(
                "every layer of a stratified algebra must be nonzero".into(),
            ));
        }
        let n: usize = layer_dims.iter().sum();
        if n > 40 {
            return Err(Error::InvalidAlgebra(format!("total dimension {n} too large (max 40)")));
        }
        let step = layer_dims.len();
        let mut layer_of = Vec::with_capacity(n);
        let mut layer_offset = Vec::with_capacity(step);
        let mut offset = 0;
        for (j, &dim) in layer_dims.iter().enumerate() {
            layer_offset.push(offset);
            layer_of.extend(std::iter::repeat(j + 1).take(dim));
            offset += dim;
        }

        let mut constants = vec![S::zero(); n * n * n];
        for &(i, j, ref coeffs) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidAlgebra(format!("bracket index ({i}, {j}) out of range")));
            }
            if i >= j {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket entries must have i < j, got ({i}, {j})"
                )));
            }
            let target_layer = layer_of[i] + layer_of[j];
            for &(k, c) in coeffs {
                if c == S::zero() {
                    continue;
                }
                if target_layer > step {
                    return Err(Error::InvalidAlgebra(format!(
                        "[X_{i}, X_{j}] lies above the top layer but has a nonzero entry"
                    )));
                }
                if k >= n {
                    return Err(Error::InvalidAlgebra(format!("bracket target {k} out of range")));
                }
                if layer_of[k] != target_layer {
                    return Err(Error::InvalidAlgebra(format!(
                        "[X_{i}, X_{j}] maps layers {} + {} but writes into layer {}",
                        layer_of[i], layer_of[j], layer_of[k]
                    )));
                }
                constants[(i * n + j) * n + k] = c;
                constants[(j * n + i) * n + k] = -c;
            }
        }

        let algebra = Self {
            label: label.to_string(),
            layer_dims: layer_dims.to_vec(),
            layer_of,
            layer_offset,
            constants,
            bch: bch_terms(step),
        };
        algebra.validate()?;
        Ok(algebra)
    }

    /// Builtin and named algebras: `heisenberg(n)`, `engel`, `free(r,s)`.
    pub fn builtin(name: &str) -> Result<Self> {
        let t = name.trim().to_ascii_lowercase();
        if t == "engel" {
            return Self::engel();
        }
        if t == "heisenberg" {
            return Self::heisenberg(1);
        }
        if let Some(args) = t.strip_prefix("heisenberg(").and_then(|r| r.strip_suffix(')')) {
            let m: usize = args
                .trim()
                .parse()
                .map_err(|_| Error::UnknownAlgebra(name.to_string()))?;
            if m == 0 || m > 15 {
                return Err(Error::InvalidAlgebra("heisenberg(m) needs 1 <= m <= 15".into()));
            }
            return Self::heisenberg(m);
        }
        if let Some(args) = t.strip_prefix("free(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            let parsed: Option<(usize, usize)> = match parts.as_slice() {
                [r, s] => r.parse().ok().zip(s.parse().ok()),
                _ => None,
            };
            let (r, s) = parsed.ok_or_else(|| Error::UnknownAlgebra(name.to_string()))?;
            return Self::free(r, s);
        }
        Err(Error::UnknownAlgebra(name.to_string()))
    }

    /// Heisenberg group H^m: generators X_1..X_m, Y_1..Y_m and center Z with
    /// [X_i, Y_i] = Z.
    pub fn heisenberg(m: usize) -> Result<Self> {
        let entries: Vec<BracketEntry<S>> =
            (0..m).map(|i| (i, m + i, vec![(2 * m, S::one())])).collect();
        Self::from_parts(&format!("heisenberg({m})"), &[2 * m, 1], &entries)
    }

    /// The Engel group: rank 2, step 3, layers (2, 1, 1), with
    /// [X_1, X_2] = X_3, [X_1, X_3] = X_4 and [X_2, X_3] = 0.
    pub fn engel() -> Result<Self> {
        Self::from_parts(
            "engel",
            &[2, 1, 1],
            &[(0, 1, vec![(2, S::one())]), (0, 2, vec![(3, S::one())])],
        )
    }

    /// Free nilpotent algebra of the given rank and step over a Hall basis.
    pub fn free(rank: usize, step: usize) -> Result<Self> {
        if rank < 2 || step < 1 {
            return Err(Error::InvalidAlgebra("free(r,s) needs r >= 2 and s >= 1".into()));
        }
        let table = free_nilpotent(rank, step);
        let n: usize = table.layer_dims.iter().sum();
        if n > 40 {
            return Err(Error::InvalidAlgebra(format!(
                "free({rank},{step}) has dimension {n}, too large (max 40)"
            )));
        }
        let mut entries = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let combo = &table.brackets[i][j];
                if !combo.is_empty() {
                    entries.push((
                        i,
                        j,
                        combo.iter().map(|&(k, c)| (k, S::of(c as f64))).collect(),
                    ));
                }
            }
        }
        Self::from_parts(&format!("free({rank},{step})"), &table.layer_dims, &entries)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total dimension.
    pub fn n(&self) -> usize {
        self.layer_of.len()
    }

    /// Dimension of the horizontal layer g_1.
    pub fn rank(&self) -> usize {
        self.layer_dims[0]
    }

    /// Nilpotency step (number of layers).
    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// 1-based layer of a basis index.
    pub fn layer_of(&self, index: usize) -> usize {
        self.layer_of[index]
    }

    /// Basis index range of layer j (1-based).
    pub fn layer_range(&self, j: usize) -> std::ops::Range<usize> {
        assert!(j >= 1 && j <= self.step(), "layer {j} out of range 1..={}", self.step());
        let start = self.layer_offset[j - 1];
        start..start + self.layer_dims[j - 1]
    }

    pub fn zero_vector(&self) -> AlgebraVector<S> {
        AlgebraVector::zero(self.n())
    }

    pub fn basis_vector(&self, index: usize) -> AlgebraVector<S> {
        assert!(index < self.n(), "basis index out of range");
        let mut v = self.zero_vector();
        v.coords[index] = S::one();
        v
    }

    /// Wraps raw coordinates. Panics when the length is not n.
    pub fn vector(&self, coords: Vec<S>) -> AlgebraVector<S> {
        assert_eq!(coords.len(), self.n(), "coordinate length mismatch");
        AlgebraVector::new(coords)
    }

    /// Embeds horizontal coordinates (length r) as a full algebra vector.
    pub fn horizontal(&self, first_layer: &[S]) -> AlgebraVector<S> {
        assert_eq!(first_layer.len(), self.rank(), "horizontal coordinate length mismatch");
        let mut v = self.zero_vector();
        v.coords[..self.rank()].copy_from_slice(first_layer);
        v
    }

    /// The Lie bracket [a, b]. Panics on dimension mismatch.
    pub fn bracket(&self, a: &AlgebraVector<S>, b: &AlgebraVector<S>) -> AlgebraVector<S> {
        let n = self.n();
        assert_eq!(a.len(), n, "dimension mismatch");
        assert_eq!(b.len(), n, "dimension mismatch");
        let step = self.step();
        let mut out = self.zero_vector();
        for i in 0..n {
            let ai = a.coords[i];
            if ai == S::zero() {
                continue;
            }
            for j in 0..n {
                let bj = b.coords[j];
                if bj == S::zero() || self.layer_of[i] + self.layer_of[j] > step {
                    continue;
                }
                let row = &self.constants[(i * n + j) * n..(i * n + j + 1) * n];
                let target = self.layer_range(self.layer_of[i] + self.layer_of[j]);
                let f = ai * bj;
                for k in target {
                    out.coords[k] = out.coords[k] + f * row[k];
                }
            }
        }
        out
    }

    /// The dilation delta_lambda, scaling layer j by lambda^j.
    /// Panics when lambda <= 0.
    pub fn dilate(&self, lambda: S, v: &AlgebraVector<S>) -> AlgebraVector<S> {
        assert!(lambda > S::zero(), "dilation factor must be positive");
        assert_eq!(v.len(), self.n(), "dimension mismatch");
        let mut out = v.clone();
        for j in 1..=self.step() {
            let f = lambda.powi(j as i32);
            for k in self.layer_range(j) {
                out.coords[k] = out.coords[k] * f;
            }
        }
        out
    }

    /// Component of v in layer j, zero-padded to a full vector.
    pub fn layer_component(&self, j: usize, v: &AlgebraVector<S>) -> AlgebraVector<S> {
        assert_eq!(v.len(), self.n(), "dimension mismatch");
        let mut out = self.zero_vector();
        for k in self.layer_range(j) {
            out.coords[k] = v.coords[k];
        }
        out
    }

    /// Euclidean norm of the layer-j block of v.
    pub fn layer_norm(&self, j: usize, v: &AlgebraVector<S>) -> S {
        assert_eq!(v.len(), self.n(), "dimension mismatch");
        linalg::norm(&v.coords[self.layer_range(j)])
    }

    /// Homogeneous norm of exp(v): sum over layers of |v_j|^(1/j).
    /// One-homogeneous under dilations.
    pub fn homogeneous_norm_of_log(&self, v: &AlgebraVector<S>) -> S {
        let mut acc = S::zero();
        for j in 1..=self.step() {
            let nj = self.layer_norm(j, v);
            if nj > S::zero() {
                acc = acc + nj.powf(S::one() / S::of_usize(j));
            }
        }
        acc
    }

    /// Lowest layer with a nonzero block, ignoring blocks of norm <= tol.
    /// `None` when every layer is below tol.
    pub fn lowest_nonzero_layer(&self, v: &AlgebraVector<S>, tol: S) -> Option<usize> {
        (1..=self.step()).find(|&j| self.layer_norm(j, v) > tol)
    }

    /// Structural validation: bracket indices respect the grading (enforced
    /// at construction), the Jacobi identity holds, and each layer j >= 2 is
    /// spanned by brackets of layer 1 with layer j-1.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let scale = self
            .constants
            .iter()
            .fold(S::zero(), |acc, &c| acc.max(c.abs()))
            .max(S::one());
        let tol = S::of(crate::tol::ALGEBRA_VALIDATION) * scale * scale;

        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let (ei, ej, ek) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let mut acc = self.bracket(&self.bracket(&ei, &ej), &ek);
                    acc = acc.add(&self.bracket(&self.bracket(&ej, &ek), &ei));
                    acc = acc.add(&self.bracket(&self.bracket(&ek, &ei), &ej));
                    if acc.max_abs() > tol {
                        return Err(Error::InvalidAlgebra(format!(
                            "Jacobi identity fails on basis triple ({i}, {j}, {k}) by {:e}",
                            acc.max_abs().to_f64().unwrap_or(f64::NAN)
                        )));
                    }
                }
            }
        }

        for j in 2..=self.step() {
            let target = self.layer_range(j);
            let dim = target.len();
            let mut rows: Vec<Vec<S>> = Vec::new();
            for a in self.layer_range(1) {
                for b in self.layer_range(j - 1) {
                    let w = self.bracket(&self.basis_vector(a), &self.basis_vector(b));
                    rows.push(w.coords[target.clone()].to_vec());
                }
            }
            if rank_of(&mut rows, S::of(crate::tol::GENERATION_RANK)) < dim {
                return Err(Error::InvalidAlgebra(format!(
                    "layer {j} is not generated by brackets of layer 1 with layer {}",
                    j - 1
                )));
            }
        }
        Ok(())
    }
}

/// Row rank by Gaussian elimination with a relative pivot tolerance.
fn rank_of<S: Scalar>(rows: &mut [Vec<S>], tol: S) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(S::zero(), |acc, &x| acc.max(x.abs()))
        .max(S::one());
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows.len())
            .max_by(|&i, &j| rows[i][col].abs().partial_cmp(&rows[j][col].abs()).expect("finite"));
        let Some(pivot) = pivot else { break };
        if rows[pivot][col].abs() <= tol * scale {
            continue;
        }
        rows.swap(rank, pivot);
        for i in (rank + 1)..rows.len() {
            let f = rows[i][col] / rows[rank][col];
            for k in col..cols {
                let v = rows[rank][k];
                rows[i][k] = rows[i][k] - f * v;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
