//! Raw outcome table and the sorted per-class error distributions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{ErrorMetrics, ExperimentOutcome, HarnessError, Status};
use crate::formats::{Format, Reference};
use crate::matrix::Class;

pub const OUTCOMES_FILE: &str = "outcomes.csv";

const OUTCOME_HEADER: [&str; 10] = [
    "matrix",
    "class",
    "format",
    "status",
    "eigenvalue_rel_error",
    "eigenvalue_abs_error",
    "eigenvector_rel_error",
    "eigenvector_abs_error",
    "matvecs",
    "restarts",
];

fn num(x: Reference) -> String {
    format!("{:e}", x.to_f64())
}

pub fn write_outcomes(outcomes: &[ExperimentOutcome], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(OUTCOME_HEADER)?;
    for o in outcomes {
        let errs = match &o.errors {
            Some(e) => [
                e.eigenvalue_rel_error,
                e.eigenvalue_abs_error,
                e.eigenvector_rel_error,
                e.eigenvector_abs_error,
            ]
            .map(num),
            None => Default::default(),
        };
        let mut rec = vec![
            o.matrix.clone(),
            o.class.to_string(),
            o.format.name().to_owned(),
            o.status.token().to_owned(),
        ];
        rec.extend(errs);
        rec.push(o.matvecs.to_string());
        rec.push(o.restarts.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_outcomes(path: &Path) -> Result<Vec<ExperimentOutcome>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(OUTCOME_HEADER) {
        return Err(HarnessError::Invalid(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| HarnessError::Invalid(format!("{}: record {}: bad {what}", path.display(), i + 1));
        let class: Class = rec[1].parse().map_err(|_| bad("class"))?;
        let format: Format = rec[2].parse().map_err(|_| bad("format"))?;
        let status: Status = rec[3].parse().map_err(|_| bad("status"))?;
        let field = |k: usize| -> Result<Reference, HarnessError> {
            let v: f64 = rec[k].parse().map_err(|_| bad(OUTCOME_HEADER[k]))?;
            Ok(Reference::from_f64(v))
        };
        let errors = if status == Status::Ok {
            Some(ErrorMetrics {
                eigenvalue_rel_error: field(4)?,
                eigenvalue_abs_error: field(5)?,
                eigenvector_rel_error: field(6)?,
                eigenvector_abs_error: field(7)?,
            })
        } else {
            None
        };
        out.push(ExperimentOutcome {
            matrix: rec[0].to_owned(),
            class,
            format,
            status,
            errors,
            matvecs: rec[8].parse().map_err(|_| bad("matvecs"))?,
            restarts: rec[9].parse().map_err(|_| bad("restarts"))?,
        });
    }
    Ok(out)
}

/// A cell of a sorted distribution column.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Cell {
    Value(f64),
    InfOmega,
    InfSigma,
}

impl Cell {
    fn rank(&self) -> u8 {
        match self {
            Cell::Value(_) => 0,
            Cell::InfOmega => 1,
            Cell::InfSigma => 2,
        }
    }

    fn cmp(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Value(a), Cell::Value(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Value(v) => format!("{v:e}"),
            Cell::InfOmega => Status::NonConvergence.token().to_owned(),
            Cell::InfSigma => Status::DynamicRange.token().to_owned(),
        }
    }
}

fn cell(o: &ExperimentOutcome, pick: fn(&ErrorMetrics) -> Reference) -> Option<Cell> {
    match o.status {
        Status::Ok => o.errors.as_ref().map(|e| Cell::Value(pick(e).to_f64())),
        Status::NonConvergence => Some(Cell::InfOmega),
        Status::DynamicRange => Some(Cell::InfSigma),
        Status::PrepError => None,
    }
}

fn write_distribution(
    path: &Path,
    columns: &BTreeMap<Format, Vec<&ExperimentOutcome>>,
    pick: fn(&ErrorMetrics) -> Reference,
) -> Result<(), HarnessError> {
    let sorted: Vec<Vec<Cell>> = columns
        .values()
        .map(|os| {
            let mut c: Vec<Cell> = os.iter().filter_map(|o| cell(o, pick)).collect();
            c.sort_by(Cell::cmp);
            c
        })
        .collect();
    let rows = sorted.iter().map(Vec::len).max().unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["percent"];
    header.extend(columns.keys().map(|f| f.name()));
    w.write_record(&header)?;
    for i in 0..rows {
        let mut rec = vec![format!("{:e}", (i + 1) as f64 / rows as f64)];
        rec.extend(sorted.iter().map(|c| c.get(i).map(Cell::text).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `outcomes.csv` and one `eigen_<class>_<bits>` directory per class
/// and bit width present in `outcomes`, all under `out`.
///
/// Each format column is sorted on its own; `percent` is `i/N` with `N` the
/// number of outcomes that are not preparation errors. Reference-format
/// outcomes appear only in the raw table.
pub fn emit_reports(outcomes: &[ExperimentOutcome], out: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out)?;
    write_outcomes(outcomes, &out.join(OUTCOMES_FILE))?;
    let mut groups: BTreeMap<(Class, u32), BTreeMap<Format, Vec<&ExperimentOutcome>>> = BTreeMap::new();
    for o in outcomes {
        if let Some(bits) = o.format.total_bits() {
            groups
                .entry((o.class, bits))
                .or_default()
                .entry(o.format)
                .or_default()
                .push(o);
        }
    }
    for ((class, bits), columns) in &groups {
        let dir = out.join(format!("eigen_{}_{bits}", class.name()));
        fs::create_dir_all(&dir)?;
        write_distribution(
            &dir.join("eigenvalues_relative_error.sorted.csv"),
            columns,
            |e| e.eigenvalue_rel_error,
        )?;
        write_distribution(
            &dir.join("eigenvectors_relative_error.sorted.csv"),
            columns,
            |e| e.eigenvector_rel_error,
        )?;
    }
    Ok(())
}
