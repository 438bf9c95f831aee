//! JSON descriptions of algebras and curves.
//!
//! Algebras are either named builtins ({"name": "heisenberg(2)"}) or inline
//! tables listing layer dimensions and the nonzero brackets of basis
//! elements. Basis indices in files are 1-based; the bracket entry
//! {"left": 1, "right": 2, "result": [[3, 1.0]]} declares
//! [e1, e2] = 1.0 e3 and implies the antisymmetric counterpart.
//! Curves carry their algebra (by name or inline), a start point in
//! exponential coordinates, a start time, and the control pieces.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{BracketEntry, StratifiedAlgebra};
use crate::curve::HorizontalPath;
use crate::error::{Error, Result};

/// Inline algebra table as stored on disk. Indices are 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    #[serde(default)]
    pub label: Option<String>,
    pub layers: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<BracketFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketFile {
    pub left: usize,
    pub right: usize,
    pub result: Vec<(usize, f64)>,
}

/// An algebra reference: a builtin name or an inline table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Named { name: String },
    Inline(AlgebraFile),
}

/// Curve description: its algebra, start data, and control pieces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub algebra: AlgebraSpec,
    /// Exponential coordinates of the start point; defaults to the identity.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    /// Start time; defaults to zero.
    #[serde(default)]
    pub t0: f64,
    pub pieces: Vec<PieceFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceFile {
    pub dt: f64,
    pub control: Vec<f64>,
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<StratifiedAlgebra<f64>> {
        match self {
            AlgebraSpec::Named { name } => StratifiedAlgebra::builtin(name),
            AlgebraSpec::Inline(file) => file.build(),
        }
    }
}

impl AlgebraFile {
    pub fn build(&self) -> Result<StratifiedAlgebra<f64>> {
        let n: usize = self.layers.iter().sum();
        let mut entries: Vec<BracketEntry<f64>> = Vec::with_capacity(self.brackets.len());
        for b in &self.brackets {
            if b.left == 0 || b.right == 0 || b.left > n || b.right > n {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket indices [{}, {}] out of the 1-based range 1..={n}",
                    b.left, b.right
                )));
            }
            let mut result = Vec::with_capacity(b.result.len());
            for &(idx, coeff) in &b.result {
                if idx == 0 || idx > n {
                    return Err(Error::InvalidAlgebra(format!(
                        "bracket result index {idx} out of the 1-based range 1..={n}"
                    )));
                }
                result.push((idx - 1, coeff));
            }
            entries.push((b.left - 1, b.right - 1, result));
        }
        let label = self.label.clone().unwrap_or_else(|| "custom".to_string());
        StratifiedAlgebra::from_parts(&label, &self.layers, &entries)
    }
}

/// Serializes an algebra back to its file form (1-based indices, entries
/// with left < right only).
pub fn algebra_to_file(alg: &StratifiedAlgebra<f64>) -> AlgebraFile {
    let n = alg.n();
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = alg.bracket(&alg.basis_vector(i), &alg.basis_vector(j));
            let result: Vec<(usize, f64)> = v
                .coords()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| (k + 1, c))
                .collect();
            if !result.is_empty() {
                brackets.push(BracketFile { left: i + 1, right: j + 1, result });
            }
        }
    }
    AlgebraFile {
        label: Some(alg.label().to_string()),
        layers: alg.layer_dims().to_vec(),
        brackets,
    }
}

pub fn curve_to_file(alg: &StratifiedAlgebra<f64>, path: &HorizontalPath<f64>) -> CurveFile {
    CurveFile {
        algebra: AlgebraSpec::Named { name: alg.label().to_string() },
        start: Some(path.start().log().coords().to_vec()),
        t0: path.t_start(),
        pieces: path
            .pieces()
            .iter()
            .map(|p| PieceFile { dt: p.dt, control: p.control.clone() })
            .collect(),
    }
}

pub fn parse_algebra(text: &str) -> Result<StratifiedAlgebra<f64>> {
    let spec: AlgebraSpec = serde_json::from_str(text)?;
    spec.build()
}

pub fn load_algebra(path: impl AsRef<Path>) -> Result<StratifiedAlgebra<f64>> {
    parse_algebra(&fs::read_to_string(path)?)
}

pub fn parse_curve(text: &str) -> Result<(StratifiedAlgebra<f64>, HorizontalPath<f64>)> {
    let file: CurveFile = serde_json::from_str(text)?;
    build_curve(&file)
}

pub fn build_curve(file: &CurveFile) -> Result<(StratifiedAlgebra<f64>, HorizontalPath<f64>)> {
    let alg = file.algebra.build()?;
    let start_log = match &file.start {
        None => alg.zero_vector(),
        Some(coords) => {
            if coords.len() != alg.n() {
                return Err(Error::InvalidCurve(format!(
                    "start point has {} coordinates, the algebra has dimension {}",
                    coords.len(),
                    alg.n()
                )));
            }
            alg.vector(coords.clone())
        }
    };
    let pieces = file
        .pieces
        .iter()
        .map(|p| (p.dt, p.control.clone()))
        .collect();
    let path = HorizontalPath::lift(&alg, alg.exp(start_log), file.t0, pieces)?;
    Ok((alg, path))
}

pub fn load_curve(path: impl AsRef<Path>) -> Result<(StratifiedAlgebra<f64>, HorizontalPath<f64>)> {
    parse_curve(&fs::read_to_string(path)?)
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn save_curve(
    path: impl AsRef<Path>,
    alg: &StratifiedAlgebra<f64>,
    curve: &HorizontalPath<f64>,
) -> Result<()> {
    fs::write(path, to_canonical_json(&curve_to_file(alg, curve))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_algebra_round_trip() {
        let alg = parse_algebra(r#"{ "name": "heisenberg(1)" }"#).unwrap();
        assert_eq!(alg.n(), 3);
        assert_eq!(alg.label(), "heisenberg(1)");
    }

    #[test]
    fn inline_algebra_uses_one_based_indices() {
        let text = r#"{
            "label": "h1",
            "layers": [2, 1],
            "brackets": [ { "left": 1, "right": 2, "result": [[3, 1.0]] } ]
        }"#;
        let alg = parse_algebra(text).unwrap();
        let z = alg.bracket(&alg.basis_vector(0), &alg.basis_vector(1));
        assert_eq!(z.coords(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn inline_algebra_rejects_zero_index() {
        let text = r#"{
            "layers": [2, 1],
            "brackets": [ { "left": 0, "right": 2, "result": [[3, 1.0]] } ]
        }"#;
        assert!(matches!(parse_algebra(text), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn curve_parses_with_named_algebra_and_defaults() {
        let text = r#"{
            "algebra": { "name": "heisenberg(1)" },
            "t0": -1.0,
            "pieces": [
                { "dt": 1.0, "control": [1.0, 0.0] },
                { "dt": 1.0, "control": [0.0, 1.0] }
            ]
        }"#;
        let (alg, path) = parse_curve(text).unwrap();
        assert_eq!(path.domain(), (-1.0, 1.0));
        assert_eq!(path.start().log().coords(), &[0.0, 0.0, 0.0]);
        assert_eq!(path.endpoint(&alg).log().coords(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn curve_file_round_trip_preserves_everything() {
        let text = r#"{
            "algebra": { "name": "engel" },
            "start": [0.1, -0.2, 0.0, 0.3],
            "t0": 0.5,
            "pieces": [ { "dt": 0.7, "control": [0.6, 0.8] } ]
        }"#;
        let (alg, path) = parse_curve(text).unwrap();
        let json = to_canonical_json(&curve_to_file(&alg, &path)).unwrap();
        let (alg2, path2) = parse_curve(&json).unwrap();
        assert_eq!(alg2.label(), alg.label());
        assert_eq!(path2.pieces(), path.pieces());
        assert_eq!(path2.t_start(), path.t_start());
        assert_eq!(path2.start(), path.start());
    }

    #[test]
    fn inline_algebra_round_trip_via_file_form() {
        let eng = StratifiedAlgebra::<f64>::engel().unwrap();
        let file = algebra_to_file(&eng);
        let rebuilt = AlgebraSpec::Inline(file).build().unwrap();
        for i in 0..eng.n() {
            for j in 0..eng.n() {
                let a = eng.bracket(&eng.basis_vector(i), &eng.basis_vector(j));
                let b = rebuilt.bracket(&rebuilt.basis_vector(i), &rebuilt.basis_vector(j));
                assert!(a.sub(&b).max_abs() == 0.0);
            }
        }
    }
}
