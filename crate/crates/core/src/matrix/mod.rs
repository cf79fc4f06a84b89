//! Sparse matrices with exact reference entries, test-set metadata and the
//! on-disk formats.

mod archive;
mod market;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formats::{Reference, Scalar};

pub use archive::{archive_read, archive_write, ArchiveError, ARCHIVE_VERSION};
pub(crate) use archive::{payload, sha256_hex};
pub use market::{parse_edge_list, parse_matrix_market, read_matrix_file, ParseError, ReadError};

/// Largest nonzero count kept from the general collection.
pub const SUITESPARSE_MAX_NNZ: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: Reference,
}

/// Coordinate matrix. Entries are sorted by `(row, col)` without duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Entry>,
}

impl SparseMatrix {
    /// Build from unsorted triplets; duplicate coordinates are summed.
    ///
    /// Panics if an index is out of bounds.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Reference)>,
    ) -> SparseMatrix {
        let mut entries: Vec<Entry> = triplets
            .into_iter()
            .map(|(row, col, value)| {
                assert!(row < n_rows && col < n_cols, "entry ({row}, {col}) out of bounds");
                Entry { row, col, value }
            })
            .collect();
        // stable, so duplicates are summed in input order
        entries.sort_by_key(|e| (e.row, e.col));
        let mut merged: Vec<Entry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.row == e.row && last.col == e.col => last.value = last.value + e.value,
                _ => merged.push(e),
            }
        }
        SparseMatrix {
            n_rows,
            n_cols,
            entries: merged,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> SparseMatrix {
        SparseMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, Reference::ONE)))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> Reference {
        match self.entries.binary_search_by_key(&(row, col), |e| (e.row, e.col)) {
            Ok(i) => self.entries[i].value,
            Err(_) => Reference::ZERO,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.n_cols,
            self.n_rows,
            self.entries.iter().map(|e| (e.col, e.row, e.value)),
        )
    }

    /// Exact symmetry: the transpose has identical entries.
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.transpose().entries == self.entries
    }

    /// Frobenius norm in reference arithmetic.
    pub fn frobenius_norm(&self) -> Reference {
        self.entries
            .iter()
            .fold(Reference::ZERO, |acc, e| acc + e.value * e.value)
            .sqrt()
    }

    /// Round every entry once into `T`.
    pub fn to_csr<T: Scalar>(&self) -> CsrMatrix<T> {
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        for e in &self.entries {
            row_ptr[e.row + 1] += 1;
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx: self.entries.iter().map(|e| e.col).collect(),
            values: self.entries.iter().map(|e| T::from_reference(&e.value)).collect(),
        }
    }
}

/// Compressed sparse rows in a target scalar, used for matrix-vector products.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `y = A x`, accumulating each row left to right in `T`.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }
}

/// Analysis class of a test matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Biological,
    Infrastructure,
    Social,
    Miscellaneous,
    General,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown matrix class `{0}`")]
pub struct UnknownClass(pub String);

impl Class {
    pub const ALL: [Class; 5] = [
        Class::Biological,
        Class::Infrastructure,
        Class::Social,
        Class::Miscellaneous,
        Class::General,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Class::Biological => "biological",
            Class::Infrastructure => "infrastructure",
            Class::Social => "social",
            Class::Miscellaneous => "miscellaneous",
            Class::General => "general",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = UnknownClass;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Class::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// A named matrix of the test set.
#[derive(Clone, Debug, PartialEq)]
pub struct TestMatrix {
    pub name: String,
    pub category: String,
    pub class: Class,
    pub matrix: SparseMatrix,
    pub nnz: usize,
    pub symmetric: bool,
}

impl TestMatrix {
    pub fn new(name: impl Into<String>, category: impl Into<String>, class: Class, matrix: SparseMatrix) -> TestMatrix {
        TestMatrix {
            name: name.into(),
            category: category.into(),
            class,
            nnz: matrix.nnz(),
            symmetric: matrix.is_symmetric(),
            matrix,
        }
    }
}

/// Make a matrix square: drop an all-zero trailing block if there is one,
/// otherwise pad with zero rows or columns.
pub fn make_square(m: SparseMatrix) -> SparseMatrix {
    let (r, c) = (m.n_rows, m.n_cols);
    if r == c {
        return m;
    }
    let small = r.min(c);
    let fits = m.entries.iter().all(|e| e.row < small && e.col < small);
    let n = if fits { small } else { r.max(c) };
    SparseMatrix {
        n_rows: n,
        n_cols: n,
        entries: m.entries,
    }
}

/// Keep the symmetric matrices with at most [`SUITESPARSE_MAX_NNZ`] entries.
pub fn filter_suitesparse(set: Vec<TestMatrix>) -> Vec<TestMatrix> {
    set.into_iter()
        .filter(|m| m.symmetric && m.nnz <= SUITESPARSE_MAX_NNZ)
        .collect()
}
