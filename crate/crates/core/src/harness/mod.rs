//! The experiment protocol: reference solves, conversion into each format,
//! target-format solves, alignment, failure classification and reports.

mod prepare;
mod reference;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::{debug, info};
use rayon::prelude::*;
use thiserror::Error;

use crate::align::align;
use crate::arnoldi::{partial_schur, SolverConfig};
use crate::formats::{Format, Reference, Scalar};
use crate::matrix::{Class, CsrMatrix, SparseMatrix, TestMatrix};
use crate::with_scalar;

pub use prepare::{prepare_general, prepare_graphs, InputFile, PrepareReport};
pub use reference::{load_reference, matrix_checksum, run_reference, ReferenceEntry, ReferenceError, ReferenceStore};
pub use report::{emit_reports, read_outcomes, write_outcomes, OUTCOMES_FILE};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Archive(#[from] crate::matrix::ArchiveError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Invalid(String),
}

/// Relative convergence tolerance per bit width.
#[derive(Clone, Debug, PartialEq)]
pub struct ToleranceSchedule {
    pub bits8: Reference,
    pub bits16: Reference,
    pub bits32: Reference,
    pub bits64: Reference,
    pub reference: Reference,
}

impl Default for ToleranceSchedule {
    fn default() -> Self {
        let p = |s: &str| Reference::parse_decimal(s).unwrap();
        ToleranceSchedule {
            bits8: p("1e-2"),
            bits16: p("1e-4"),
            bits32: p("1e-8"),
            bits64: p("1e-12"),
            reference: p("1e-20"),
        }
    }
}

impl ToleranceSchedule {
    pub fn for_bits(&self, bits: Option<u32>) -> Reference {
        match bits {
            Some(8) => self.bits8,
            Some(16) => self.bits16,
            Some(32) => self.bits32,
            Some(64) => self.bits64,
            None => self.reference,
            Some(b) => panic!("no tolerance for {b} bits"),
        }
    }

    pub fn for_format(&self, fmt: Format) -> Reference {
        self.for_bits(fmt.total_bits())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub eigenvalue_count: usize,
    pub eigenvalue_buffer_count: usize,
    pub formats: Vec<Format>,
    pub classes: Vec<Class>,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub tolerances: ToleranceSchedule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eigenvalue_count: 10,
            eigenvalue_buffer_count: 2,
            formats: Format::evaluated().collect(),
            classes: Class::ALL.to_vec(),
            seed: 0,
            out: PathBuf::from("out"),
            workers: 1,
            tolerances: ToleranceSchedule::default(),
        }
    }
}

impl RunConfig {
    /// Number of pairs each solve computes.
    pub fn want(&self) -> usize {
        self.eigenvalue_count + self.eigenvalue_buffer_count
    }

    pub fn matrices_dir(&self) -> PathBuf {
        self.out.join("matrices")
    }

    pub fn reference_dir(&self) -> PathBuf {
        self.out.join("reference")
    }

    /// Solver settings for an operator of dimension `n` in `fmt`.
    pub fn solver_config(&self, fmt: Format, n: usize) -> SolverConfig {
        SolverConfig::new(self.want(), self.tolerances.for_format(fmt), n).with_seed(self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// The target-format solve failed or did not converge.
    NonConvergence,
    /// A matrix entry left the format's dynamic range.
    DynamicRange,
    /// The matrix could not be prepared or has no reference solution.
    PrepError,
}

impl Status {
    pub fn token(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NonConvergence => "inf_omega",
            Status::DynamicRange => "inf_sigma",
            Status::PrepError => "prep_error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Status::Ok, Status::NonConvergence, Status::DynamicRange, Status::PrepError]
            .into_iter()
            .find(|st| st.token() == s)
            .ok_or_else(|| format!("unknown status `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMetrics {
    pub eigenvalue_rel_error: Reference,
    pub eigenvalue_abs_error: Reference,
    pub eigenvector_rel_error: Reference,
    pub eigenvector_abs_error: Reference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub matrix: String,
    pub class: Class,
    pub format: Format,
    pub status: Status,
    /// Present iff `status` is [`Status::Ok`].
    pub errors: Option<ErrorMetrics>,
    pub matvecs: usize,
    pub restarts: usize,
}

impl ExperimentOutcome {
    fn failed(m: &TestMatrix, format: Format, status: Status) -> ExperimentOutcome {
        ExperimentOutcome {
            matrix: m.name.clone(),
            class: m.class,
            format,
            status,
            errors: None,
            matvecs: 0,
            restarts: 0,
        }
    }
}

/// Position of a stored nonzero that `T` maps to zero, infinity or a
/// non-real code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DynamicRangeExceeded {
    pub row: usize,
    pub col: usize,
}

/// Round every entry once into `T`, rejecting the matrix if any nonzero
/// entry does not survive.
pub fn convert_matrix<T: Scalar>(m: &SparseMatrix) -> Result<CsrMatrix<T>, DynamicRangeExceeded> {
    let csr = m.to_csr::<T>();
    for (e, x) in m.entries().iter().zip(csr.values()) {
        if !e.value.is_zero() && (x.is_zero() || !x.is_finite()) {
            return Err(DynamicRangeExceeded { row: e.row, col: e.col });
        }
    }
    Ok(csr)
}

fn run_typed<T: Scalar>(m: &TestMatrix, fmt: Format, reference: &ReferenceEntry, cfg: &RunConfig) -> ExperimentOutcome {
    let a = match convert_matrix::<T>(&m.matrix) {
        Ok(a) => a,
        Err(e) => {
            debug!("{} in {fmt}: entry ({}, {}) out of range", m.name, e.row, e.col);
            return ExperimentOutcome::failed(m, fmt, Status::DynamicRange);
        }
    };
    let n = m.matrix.n_rows();
    let scfg = cfg.solver_config(fmt, n);
    let res = match partial_schur(|x: &[T], y: &mut [T]| a.matvec(x, y), n, &scfg) {
        Ok(r) => r,
        Err(e) => {
            debug!("{} in {fmt}: {e}", m.name);
            return ExperimentOutcome::failed(m, fmt, Status::NonConvergence);
        }
    };
    let mut out = ExperimentOutcome::failed(m, fmt, Status::NonConvergence);
    out.matvecs = res.matvecs_used;
    out.restarts = res.restarts_used;
    if !res.converged {
        return out;
    }
    let values: Vec<Reference> = res.eigenvalues().iter().map(|v| v.to_reference()).collect();
    let vectors: Vec<Vec<Reference>> = res
        .q
        .iter()
        .map(|c| c.iter().map(|v| v.to_reference()).collect())
        .collect();
    match align(
        &reference.values,
        &reference.vectors,
        &reference.anchors,
        &values,
        &vectors,
        cfg.eigenvalue_count,
    ) {
        Ok(rep) => {
            out.status = Status::Ok;
            out.errors = Some(ErrorMetrics {
                eigenvalue_rel_error: rep.eigenvalue_rel_error,
                eigenvalue_abs_error: rep.eigenvalue_abs_error,
                eigenvector_rel_error: rep.eigenvector_rel_error,
                eigenvector_abs_error: rep.eigenvector_abs_error,
            });
        }
        Err(e) => debug!("{} in {fmt}: alignment failed: {e}", m.name),
    }
    out
}

/// One (matrix, format) experiment against a prepared reference.
pub fn run_experiment(m: &TestMatrix, fmt: Format, reference: &ReferenceEntry, cfg: &RunConfig) -> ExperimentOutcome {
    if reference.values.len() != cfg.want() || !m.symmetric {
        return ExperimentOutcome::failed(m, fmt, Status::PrepError);
    }
    with_scalar!(fmt, T => run_typed::<T>(m, fmt, reference, cfg))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?)
}

/// Reference solutions for every selected matrix, reusing cached ones whose
/// checksum still matches. Failures are kept per matrix.
pub fn build_references(set: &[TestMatrix], cfg: &RunConfig) -> Result<ReferenceStore, HarnessError> {
    let dir = cfg.reference_dir();
    std::fs::create_dir_all(&dir)?;
    let selected: Vec<&TestMatrix> = set.iter().filter(|m| cfg.classes.contains(&m.class)).collect();
    let entries = pool(cfg.workers)?.install(|| {
        selected
            .par_iter()
            .map(|m| {
                let sum = matrix_checksum(&m.matrix);
                if let Some(hit) = load_reference(&dir, &m.name, &sum, cfg) {
                    debug!("reference cache hit for {}", m.name);
                    return Ok((m.name.clone(), Ok(hit)));
                }
                info!("reference solve for {} (n = {})", m.name, m.matrix.n_rows());
                let r = run_reference(m, cfg);
                if let Ok(entry) = &r {
                    entry.save(&dir.join(&m.name))?;
                }
                Ok((m.name.clone(), r))
            })
            .collect::<Result<Vec<_>, std::io::Error>>()
    })?;
    Ok(ReferenceStore {
        entries: entries.into_iter().collect(),
    })
}

/// Every selected (matrix, format) experiment, sorted by matrix name and
/// then format name regardless of scheduling.
pub fn run_sweep(set: &[TestMatrix], refs: &ReferenceStore, cfg: &RunConfig) -> Result<Vec<ExperimentOutcome>, HarnessError> {
    let tasks: Vec<(&TestMatrix, Format)> = set
        .iter()
        .filter(|m| cfg.classes.contains(&m.class))
        .flat_map(|m| cfg.formats.iter().map(move |&f| (m, f)))
        .collect();
    let mut outcomes: Vec<ExperimentOutcome> = pool(cfg.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(m, f)| match refs.entries.get(&m.name) {
                Some(Ok(r)) => run_experiment(m, f, r, cfg),
                _ => ExperimentOutcome::failed(m, f, Status::PrepError),
            })
            .collect()
    });
    outcomes.sort_by(|a, b| (&a.matrix, a.format.name()).cmp(&(&b.matrix, b.format.name())));
    Ok(outcomes)
}
