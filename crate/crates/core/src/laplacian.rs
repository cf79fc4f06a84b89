//! Symmetrically normalized graph Laplacians and the category-to-class table.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::formats::Reference;
use crate::matrix::{make_square, Class, SparseMatrix};

pub type DegreeVector = Vec<Reference>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaplacianError {
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("vertex {0} has negative degree")]
    NegativeDegree(usize),
}

/// `(A + A^T) / 2`, exactly symmetric.
pub fn symmetrize(a: &SparseMatrix) -> Result<SparseMatrix, LaplacianError> {
    if !a.is_square() {
        return Err(LaplacianError::NotSquare(a.n_rows(), a.n_cols()));
    }
    let sum = SparseMatrix::from_triplets(
        a.n_rows(),
        a.n_cols(),
        a.entries()
            .iter()
            .flat_map(|e| [(e.row, e.col, e.value), (e.col, e.row, e.value)]),
    );
    Ok(SparseMatrix::from_triplets(
        a.n_rows(),
        a.n_cols(),
        sum.entries().iter().map(|e| (e.row, e.col, e.value.scale2(-1))),
    ))
}

/// Read an edge list as an undirected graph: every off-diagonal entry whose
/// transpose is absent gets a mirror with the same value.
pub fn undirected(a: &SparseMatrix) -> SparseMatrix {
    let mirrors: Vec<(usize, usize, Reference)> = a
        .entries()
        .iter()
        .filter(|e| e.row != e.col && e.col < a.n_rows() && e.row < a.n_cols() && a.get(e.col, e.row).is_zero())
        .map(|e| (e.col, e.row, e.value))
        .collect();
    SparseMatrix::from_triplets(
        a.n_rows(),
        a.n_cols(),
        a.entries().iter().map(|e| (e.row, e.col, e.value)).chain(mirrors),
    )
}

/// Row sums, self-loops included.
pub fn degrees(a: &SparseMatrix) -> DegreeVector {
    let mut deg = vec![Reference::ZERO; a.n_rows()];
    for e in a.entries() {
        deg[e.row] = deg[e.row] + e.value;
    }
    deg
}

/// `L = I - D^{-1/2} A D^{-1/2}` restricted to vertices of positive degree;
/// isolated vertices get an all-zero row and column.
pub fn normalized_laplacian(a: &SparseMatrix) -> Result<SparseMatrix, LaplacianError> {
    if !a.is_square() {
        return Err(LaplacianError::NotSquare(a.n_rows(), a.n_cols()));
    }
    if !a.is_symmetric() {
        return Err(LaplacianError::NotSymmetric);
    }
    let deg = degrees(a);
    if let Some(i) = deg.iter().position(|d| d.is_sign_negative() && !d.is_zero()) {
        return Err(LaplacianError::NegativeDegree(i));
    }
    let positive = |i: usize| !deg[i].is_zero();
    let diag = (0..a.n_rows()).filter(|&i| positive(i)).map(|i| (i, i, Reference::ONE));
    let off = a
        .entries()
        .iter()
        .filter(|e| e.row != e.col && !e.value.is_zero() && positive(e.row) && positive(e.col))
        .map(|e| (e.row, e.col, -(Reference::ONE / (deg[e.row] * deg[e.col]).sqrt())));
    Ok(SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), diag.chain(off)))
}

/// Square repair, average symmetrization and normalization of a raw graph.
pub fn prepare_graph(a: SparseMatrix) -> Result<SparseMatrix, LaplacianError> {
    normalized_laplacian(&symmetrize(&make_square(a))?)
}

const BUILTIN: [(&str, Class); 31] = [
    ("bio", Class::Biological),
    ("eco", Class::Biological),
    ("protein", Class::Biological),
    ("bn", Class::Biological),
    ("inf", Class::Infrastructure),
    ("massive", Class::Infrastructure),
    ("power", Class::Infrastructure),
    ("road", Class::Infrastructure),
    ("tech", Class::Infrastructure),
    ("web", Class::Infrastructure),
    ("ca", Class::Social),
    ("cit", Class::Social),
    ("dynamic", Class::Social),
    ("econ", Class::Social),
    ("email", Class::Social),
    ("ia", Class::Social),
    ("proximity", Class::Social),
    ("rec", Class::Social),
    ("retweet_graphs", Class::Social),
    ("rt", Class::Social),
    ("soc", Class::Social),
    ("socfb", Class::Social),
    ("tscc", Class::Social),
    ("dimacs", Class::Miscellaneous),
    ("dimacs10", Class::Miscellaneous),
    ("graph500", Class::Miscellaneous),
    ("heter", Class::Miscellaneous),
    ("labeled", Class::Miscellaneous),
    ("misc", Class::Miscellaneous),
    ("rand", Class::Miscellaneous),
    ("sc", Class::Miscellaneous),
];

/// Category of the general (non-graph) collection.
pub const SUITESPARSE_CATEGORY: &str = "suitesparse";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassMapError {
    #[error("unknown graph category `{0}`")]
    UnknownCategory(String),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

/// Category to class mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMap {
    map: BTreeMap<String, Class>,
}

impl Default for ClassMap {
    fn default() -> Self {
        ClassMap {
            map: BUILTIN.iter().map(|(c, k)| (c.to_string(), *k)).collect(),
        }
    }
}

impl ClassMap {
    /// The built-in table overridden by `category class` lines; `#` starts a
    /// comment.
    pub fn with_overrides(text: &str) -> Result<ClassMap, ClassMapError> {
        let mut m = ClassMap::default();
        for (i, raw) in text.lines().enumerate() {
            let l = raw.split('#').next().unwrap().trim();
            if l.is_empty() {
                continue;
            }
            let err = |message: String| ClassMapError::Config { line: i + 1, message };
            let toks: Vec<&str> = l.split_whitespace().collect();
            let [cat, class] = toks[..] else {
                return Err(err("expected `category class`".into()));
            };
            let class: Class = class.parse().map_err(|e: crate::matrix::UnknownClass| err(e.to_string()))?;
            m.map.insert(cat.to_string(), class);
        }
        Ok(m)
    }

    pub fn class_of(&self, category: &str) -> Result<Class, ClassMapError> {
        if category == SUITESPARSE_CATEGORY {
            return Ok(Class::General);
        }
        self.map
            .get(category)
            .copied()
            .ok_or_else(|| ClassMapError::UnknownCategory(category.to_string()))
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, Class)> {
        self.map.iter().map(|(c, k)| (c.as_str(), *k))
    }
}

/// Class of a repository category under the built-in table.
pub fn category_to_class(category: &str) -> Result<Class, ClassMapError> {
    ClassMap::default().class_of(category)
}
