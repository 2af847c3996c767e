//! The chain-level cellular umkehr map of a transverse triangulation: from a
//! triangulated pair (a complex for the ambient manifold, one for the
//! submanifold, and a table of signed intersection cells per simplex) build
//! the degree-lowering chain map and its induced map on homology.
//!
//! Transversality itself is the data provider's problem; the engine
//! validates the combinatorics. The chain-map identity `s∂ = ∂s` is the
//! consistency gate: a violation means the intersection table is
//! inconsistent on shared faces.

use std::collections::HashMap;
use std::path::Path;

use num_bigint::BigInt;
use serde::Deserialize;
use thiserror::Error;

use crate::groups::FinAbGroup;
use crate::linalg::{homology_solver, IntMatrix, LinalgError, Subquotient};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GysinError {
    #[error("invalid fixture: {0}")]
    Invalid(String),
    #[error("boundary of boundary is nonzero in complex {complex} at dimension {dim}")]
    BoundarySquare { complex: String, dim: usize },
    #[error("unknown cell {0:?}")]
    UnknownCell(String),
    #[error(
        "intersection cell {cell:?} of simplex {simplex:?} has dimension {got}, expected {expected}"
    )]
    DimensionMismatch { simplex: String, cell: String, got: usize, expected: i64 },
    #[error("chain map identity s∂ = ∂s fails at simplex {simplex:?} (dimension {dim})")]
    ChainMapViolation { simplex: String, dim: usize },
    #[error("linear algebra error: {0}")]
    Linalg(#[from] LinalgError),
}

/// A finite chain complex of named cells with signed boundary matrices.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    /// Cell names per dimension.
    cells: Vec<Vec<String>>,
    index: Vec<HashMap<String, usize>>,
    /// `boundaries[p - 1]` maps `C_p -> C_{p-1}`.
    boundaries: Vec<IntMatrix>,
}

impl ChainComplex {
    pub fn dimension(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn cells(&self, dim: usize) -> &[String] {
        self.cells.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cell_count(&self, dim: usize) -> usize {
        self.cells(dim).len()
    }

    pub fn cell_index(&self, dim: usize, name: &str) -> Option<usize> {
        self.index.get(dim)?.get(name).copied()
    }

    /// Which dimension a cell name lives in.
    pub fn find_cell(&self, name: &str) -> Option<(usize, usize)> {
        for (dim, idx) in self.index.iter().enumerate() {
            if let Some(&i) = idx.get(name) {
                return Some((dim, i));
            }
        }
        None
    }

    /// Boundary matrix `C_p -> C_{p-1}`; zero-shaped when out of range.
    pub fn boundary(&self, p: usize) -> IntMatrix {
        if p == 0 {
            return IntMatrix::zeros(0, self.cell_count(0));
        }
        if p > self.dimension() {
            return IntMatrix::zeros(self.cell_count(p - 1), 0);
        }
        self.boundaries[p - 1].clone()
    }

    /// Homology at one degree, with the subquotient solver retained so
    /// cycles can be projected onto the chosen basis.
    pub fn homology(&self, p: usize) -> Result<Subquotient, GysinError> {
        let d_out = self.boundary(p);
        let d_in = self.boundary(p + 1);
        Ok(homology_solver(&d_in, &d_out)?)
    }

    fn validate(&self, name: &str) -> Result<(), GysinError> {
        for p in 2..=self.dimension() {
            let square = self.boundary(p - 1).mul(&self.boundary(p));
            if !square.is_zero() {
                return Err(GysinError::BoundarySquare { complex: name.to_string(), dim: p });
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct CellRef {
    cell: String,
    sign: i64,
}

#[derive(Deserialize)]
struct ComplexData {
    simplices: HashMap<String, Vec<String>>,
    #[serde(default)]
    boundary: HashMap<String, HashMap<String, Vec<CellRef>>>,
}

#[derive(Deserialize)]
struct FixtureData {
    #[serde(rename = "B")]
    b: ComplexData,
    #[serde(rename = "A")]
    a: ComplexData,
    codim: usize,
    intersections: HashMap<String, Vec<CellRef>>,
}

fn build_complex(data: &ComplexData, name: &str) -> Result<ChainComplex, GysinError> {
    let mut dims: Vec<usize> = data
        .simplices
        .keys()
        .map(|k| {
            k.parse::<usize>()
                .map_err(|_| GysinError::Invalid(format!("bad dimension key {k:?} in {name}")))
        })
        .collect::<Result<_, _>>()?;
    dims.sort_unstable();
    let top = dims.last().copied().unwrap_or(0);
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); top + 1];
    for (k, names) in &data.simplices {
        let dim: usize = k.parse().unwrap();
        cells[dim] = names.clone();
    }
    let index: Vec<HashMap<String, usize>> = cells
        .iter()
        .map(|names| names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect())
        .collect();
    for (dim, names) in cells.iter().enumerate() {
        if index[dim].len() != names.len() {
            return Err(GysinError::Invalid(format!("duplicate cell name in {name}, dim {dim}")));
        }
    }

    let mut boundaries = Vec::new();
    for p in 1..=top {
        let mut m = IntMatrix::zeros(cells[p - 1].len(), cells[p].len());
        let empty = HashMap::new();
        let layer = data.boundary.get(&p.to_string()).unwrap_or(&empty);
        for (cell_name, refs) in layer {
            let col = *index[p]
                .get(cell_name)
                .ok_or_else(|| GysinError::UnknownCell(cell_name.clone()))?;
            for r in refs {
                let row = *index[p - 1]
                    .get(&r.cell)
                    .ok_or_else(|| GysinError::UnknownCell(r.cell.clone()))?;
                let cur = m.at(row, col) + BigInt::from(r.sign);
                m.set(row, col, cur);
            }
        }
        boundaries.push(m);
    }
    let complex = ChainComplex { cells, index, boundaries };
    complex.validate(name)?;
    Ok(complex)
}

/// A triangulated pair with per-simplex transverse intersection cells.
#[derive(Debug)]
pub struct GysinData {
    pub b: ChainComplex,
    pub a: ChainComplex,
    pub codim: usize,
    /// Signed intersection cells per simplex of the ambient complex.
    table: HashMap<String, Vec<(String, i64)>>,
}

impl GysinData {
    pub fn from_json_str(text: &str) -> Result<GysinData, GysinError> {
        let data: FixtureData =
            serde_json::from_str(text).map_err(|e| GysinError::Invalid(e.to_string()))?;
        let b = build_complex(&data.b, "B")?;
        let a = build_complex(&data.a, "A")?;
        let mut table = HashMap::new();
        for (simplex, refs) in &data.intersections {
            let (dim, _) =
                b.find_cell(simplex).ok_or_else(|| GysinError::UnknownCell(simplex.clone()))?;
            let expected = dim as i64 - data.codim as i64;
            for r in refs {
                let (adim, _) = a
                    .find_cell(&r.cell)
                    .ok_or_else(|| GysinError::UnknownCell(r.cell.clone()))?;
                if adim as i64 != expected {
                    return Err(GysinError::DimensionMismatch {
                        simplex: simplex.clone(),
                        cell: r.cell.clone(),
                        got: adim,
                        expected,
                    });
                }
            }
            if !refs.is_empty() {
                table.insert(
                    simplex.clone(),
                    refs.iter().map(|r| (r.cell.clone(), r.sign)).collect(),
                );
            }
        }
        Ok(GysinData { b, a, codim: data.codim, table })
    }

    pub fn from_file(path: &Path) -> Result<GysinData, GysinError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GysinError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// The assembled chain map, one matrix `C_p(B) -> C_{p-d}(A)` per degree.
#[derive(Debug)]
pub struct GysinChainMap {
    pub codim: usize,
    maps: Vec<IntMatrix>,
}

impl GysinChainMap {
    pub fn map(&self, p: usize) -> Option<&IntMatrix> {
        self.maps.get(p)
    }

    /// Applies the degree-p component to a chain in cell coordinates.
    pub fn apply(&self, p: usize, chain: &[BigInt]) -> Vec<BigInt> {
        match self.maps.get(p) {
            Some(m) if m.cols() == chain.len() => m.mul_vec(chain),
            _ => Vec::new(),
        }
    }
}

/// Assembles the chain map sending each simplex to the signed sum of its
/// intersection cells, and verifies `s∂ = ∂s` in every degree before
/// returning. A violation names the offending simplex: the intersection
/// table is inconsistent on shared faces.
pub fn gysin_chain_map(data: &GysinData) -> Result<GysinChainMap, GysinError> {
    let d = data.codim;
    let top = data.b.dimension();
    let mut maps = Vec::new();
    for p in 0..=top {
        let rows = if p >= d { data.a.cell_count(p - d) } else { 0 };
        let mut m = IntMatrix::zeros(rows, data.b.cell_count(p));
        if p >= d {
            for (col, name) in data.b.cells(p).iter().enumerate() {
                if let Some(refs) = data.table.get(name) {
                    for (cell, sign) in refs {
                        let row = data.a.cell_index(p - d, cell).expect("validated on load");
                        let cur = m.at(row, col) + BigInt::from(*sign);
                        m.set(row, col, cur);
                    }
                }
            }
        }
        maps.push(m);
    }

    // s∂ = ∂s, checked column by column so failures name a simplex
    for p in 1..=top {
        if p <= d {
            // below the codimension s vanishes; at p = d the target of s∂
            // lives in negative degree and ∂ on degree zero is trivial
            continue;
        }
        let db = data.b.boundary(p);
        let lhs = maps[p - 1].mul(&db);
        let rhs = data.a.boundary(p - d).mul(&maps[p]);
        for (col, name) in data.b.cells(p).iter().enumerate() {
            for row in 0..lhs.rows() {
                if lhs.at(row, col) != rhs.at(row, col) {
                    return Err(GysinError::ChainMapViolation { simplex: name.clone(), dim: p });
                }
            }
        }
    }
    Ok(GysinChainMap { codim: d, maps })
}

/// The induced map in one homology degree, expressed on the normal-form
/// bases chosen by the Smith decomposition.
pub struct InducedDegree {
    pub degree: usize,
    pub source: FinAbGroup,
    pub target: FinAbGroup,
    /// Images of the source generators in target coordinates.
    pub matrix: IntMatrix,
}

/// The maps `H_p(B) -> H_{p-d}(A)` induced by a verified chain map.
pub fn induced_homology_map(
    s: &GysinChainMap,
    data: &GysinData,
) -> Result<Vec<InducedDegree>, GysinError> {
    let d = s.codim;
    let mut out = Vec::new();
    for p in d..=data.b.dimension() {
        let hb = data.b.homology(p)?;
        let ha = data.a.homology(p - d)?;
        if hb.group().is_trivial() && ha.group().is_trivial() {
            continue;
        }
        let mut cols = Vec::new();
        for c in 0..hb.basis().cols() {
            let cycle = hb.basis().column(c);
            let image = s.apply(p, &cycle);
            let image = if image.is_empty() {
                vec![BigInt::from(0); data.a.cell_count(p - d)]
            } else {
                image
            };
            let coords = ha.project(&image).ok_or_else(|| {
                GysinError::Invalid(format!("image of a cycle is not a cycle in degree {p}"))
            })?;
            cols.push(coords);
        }
        out.push(InducedDegree {
            degree: p,
            source: hb.group().clone(),
            target: ha.group().clone(),
            matrix: IntMatrix::from_columns(ha.group().dim(), &cols),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One filled triangle, submanifold disjoint from everything.
    const DISJOINT: &str = r#"{
        "B": {
            "simplices": {"0": ["p", "q", "r"], "1": ["pq", "qr", "pr"], "2": ["t"]},
            "boundary": {
                "1": {
                    "pq": [{"cell": "q", "sign": 1}, {"cell": "p", "sign": -1}],
                    "qr": [{"cell": "r", "sign": 1}, {"cell": "q", "sign": -1}],
                    "pr": [{"cell": "r", "sign": 1}, {"cell": "p", "sign": -1}]
                },
                "2": {
                    "t": [{"cell": "qr", "sign": 1}, {"cell": "pr", "sign": -1}, {"cell": "pq", "sign": 1}]
                }
            }
        },
        "A": {
            "simplices": {"0": ["z"], "1": []},
            "boundary": {}
        },
        "codim": 1,
        "intersections": {}
    }"#;

    #[test]
    fn empty_intersection_zero_map() {
        let data = GysinData::from_json_str(DISJOINT).unwrap();
        let s = gysin_chain_map(&data).unwrap();
        for p in 0..=2 {
            if let Some(m) = s.map(p) {
                assert!(m.is_zero());
            }
        }
        let induced = induced_homology_map(&s, &data).unwrap();
        for deg in &induced {
            assert!(deg.matrix.is_zero());
        }
    }

    #[test]
    fn boundary_square_validated() {
        let bad = DISJOINT.replace(
            r#""t": [{"cell": "qr", "sign": 1}, {"cell": "pr", "sign": -1}, {"cell": "pq", "sign": 1}]"#,
            r#""t": [{"cell": "qr", "sign": 1}, {"cell": "pr", "sign": 1}, {"cell": "pq", "sign": 1}]"#,
        );
        let err = GysinData::from_json_str(&bad).unwrap_err();
        assert!(matches!(err, GysinError::BoundarySquare { .. }));
    }

    #[test]
    fn dimension_mismatch_detected() {
        let bad = DISJOINT.replace(
            r#""intersections": {}"#,
            r#""intersections": {"t": [{"cell": "z", "sign": 1}]}"#,
        );
        let err = GysinData::from_json_str(&bad).unwrap_err();
        assert!(matches!(err, GysinError::DimensionMismatch { .. }));
    }

    #[test]
    fn chain_map_violation_located() {
        // codim 0: one vertex of a circle mapped to a point, edges to
        // nothing: s∂(pq) = s(q) - s(p) = -z while ∂s(pq) = 0
        let fixture = r#"{
            "B": {
                "simplices": {"0": ["p", "q", "r"], "1": ["pq", "qr", "rp"]},
                "boundary": {
                    "1": {
                        "pq": [{"cell": "q", "sign": 1}, {"cell": "p", "sign": -1}],
                        "qr": [{"cell": "r", "sign": 1}, {"cell": "q", "sign": -1}],
                        "rp": [{"cell": "p", "sign": 1}, {"cell": "r", "sign": -1}]
                    }
                }
            },
            "A": {
                "simplices": {"0": ["z"], "1": []},
                "boundary": {}
            },
            "codim": 0,
            "intersections": {"p": [{"cell": "z", "sign": 1}]}
        }"#;
        let data = GysinData::from_json_str(fixture).unwrap();
        let err = gysin_chain_map(&data).unwrap_err();
        match err {
            GysinError::ChainMapViolation { simplex, dim } => {
                assert_eq!(dim, 1);
                assert!(simplex == "pq" || simplex == "rp", "{simplex}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn homology_of_filled_triangle() {
        let data = GysinData::from_json_str(DISJOINT).unwrap();
        assert_eq!(data.b.homology(0).unwrap().group(), &FinAbGroup::free(1));
        assert!(data.b.homology(1).unwrap().group().is_trivial());
        assert!(data.b.homology(2).unwrap().group().is_trivial());
    }
}
