//! CSV and JSON exchange formats. Numbers are written with 12 significant
//! digits so outputs are byte-stable across platforms.

use std::io::{Read, Write};

use serde::Serialize;

use crate::bench::SweepGrid;
use crate::dynamics::EvolutionResult;
use crate::error::{Error, Result};
use crate::passage::Waveform;
use crate::qstate::C64;

pub const WAVEFORM_COLUMNS: [&str; 7] = ["t_ns", "reP", "imP", "reS", "imS", "reA", "imA"];
pub const EVOLUTION_COLUMNS: [&str; 6] = ["t_ns", "p0", "p1", "p2", "p3", "trace_defect"];
pub const EFFICIENCY_COLUMN: &str = "efficiency";

/// Largest rows accepted by the readers, to bound memory on hostile input.
pub const MAX_ROWS: usize = 10_000_000;

/// 12 significant digits in scientific notation; −0 is written as 0.
pub fn fmt_number(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_number(x))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric CSV body with its header.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a header row and a rectangular body of finite numbers.
pub fn read_numeric_csv<R: Read>(input: R) -> Result<NumericTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::Parse { line: 1, message: "missing header row".into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if rows.len() == MAX_ROWS {
            return Err(Error::Parse { line, message: format!("more than {MAX_ROWS} rows") });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(k, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse { line, message: format!("column {}: not a finite number: {field:?}", k + 1) }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

fn expect_header(table: &NumericTable, expected: &[&str]) -> Result<()> {
    if table.header.len() != expected.len() || table.header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}, found {}", expected.join(","), table.header.join(",")),
        });
    }
    Ok(())
}

pub fn write_waveform_csv<W: Write>(w: &Waveform, out: W) -> Result<()> {
    let zero = C64::new(0.0, 0.0);
    let rows = (0..w.len()).map(|k| {
        let s = w.sample(k);
        let a = w.auxiliary().map_or(zero, |aux| aux[k]);
        vec![w.time(k), s.pump.re, s.pump.im, s.stokes.re, s.stokes.im, a.re, a.im]
    });
    write_rows(out, &WAVEFORM_COLUMNS, rows)
}

/// Parses a waveform CSV. Times must start at 0 and be uniformly spaced; an
/// all-zero auxiliary column means no auxiliary drive. Detunings are not part
/// of the format and come back as zero.
pub fn read_waveform_csv<R: Read>(input: R) -> Result<Waveform> {
    let table = read_numeric_csv(input)?;
    expect_header(&table, &WAVEFORM_COLUMNS)?;
    let times: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let dt = uniform_spacing(&times)?;
    let column = |re: usize| table.rows.iter().map(|r| C64::new(r[re], r[re + 1])).collect::<Vec<_>>();
    let w = Waveform::new(dt, column(1), column(3))?;
    let aux = column(5);
    if aux.iter().any(|a| a.norm_sqr() > 0.0) {
        w.with_auxiliary(aux)
    } else {
        Ok(w)
    }
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 2 {
        return Err(Error::Parse { line: 2, message: format!("need at least 2 samples, got {n}") });
    }
    if times[0] != 0.0 {
        return Err(Error::Parse { line: 2, message: format!("first time must be 0, got {}", times[0]) });
    }
    let dt = times[n - 1] / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Parse { line: n + 1, message: "times must increase".into() });
    }
    for (k, &t) in times.iter().enumerate() {
        // Written values carry 12 significant digits.
        if (t - k as f64 * dt).abs() > 1e-9 * dt.max(t.abs()) + 1e-12 {
            return Err(Error::Parse { line: k + 2, message: format!("time {t} breaks the uniform spacing {dt}") });
        }
    }
    Ok(dt)
}

pub fn write_evolution_csv<W: Write>(result: &EvolutionResult, out: W) -> Result<()> {
    let rows = result.times.iter().zip(&result.populations).zip(&result.trace_defects).map(|((&t, p), &d)| {
        let level = |k: usize| p.get(k).copied().unwrap_or(0.0);
        vec![t, level(0), level(1), level(2), level(3), d]
    });
    write_rows(out, &EVOLUTION_COLUMNS, rows)
}

/// Rows of an evolution CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTable {
    pub times: Vec<f64>,
    pub populations: Vec<[f64; 4]>,
    pub trace_defects: Vec<f64>,
}

pub fn read_evolution_csv<R: Read>(input: R) -> Result<EvolutionTable> {
    let table = read_numeric_csv(input)?;
    expect_header(&table, &EVOLUTION_COLUMNS)?;
    if table.rows.is_empty() {
        return Err(Error::Parse { line: 2, message: "no samples".into() });
    }
    for (k, pair) in table.rows.windows(2).enumerate() {
        if pair[1][0] <= pair[0][0] {
            return Err(Error::Parse { line: k + 3, message: "times must increase".into() });
        }
    }
    Ok(EvolutionTable {
        times: table.rows.iter().map(|r| r[0]).collect(),
        populations: table.rows.iter().map(|r| [r[1], r[2], r[3], r[4]]).collect(),
        trace_defects: table.rows.iter().map(|r| r[5]).collect(),
    })
}

/// Long format: one row per cell, axis values then efficiency, first axis
/// varying slowest.
pub fn write_sweep_csv<W: Write>(grid: &SweepGrid, out: W) -> Result<()> {
    let mut header: Vec<&str> = grid.axes.iter().map(|a| a.name.as_str()).collect();
    header.push(EFFICIENCY_COLUMN);
    let values: Vec<Vec<f64>> = grid.axes.iter().map(|a| a.values()).collect();
    let rows = grid.efficiency.iter().enumerate().map(|(cell, &e)| {
        let mut rest = cell;
        let mut row = vec![0.0; values.len() + 1];
        for (k, axis) in values.iter().enumerate().rev() {
            row[k] = axis[rest % axis.len()];
            rest /= axis.len();
        }
        row[values.len()] = e;
        row
    });
    write_rows(out, &header, rows)
}

/// A long-format sweep read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis_names: Vec<String>,
    /// Distinct values of each axis in file order.
    pub axis_values: Vec<Vec<f64>>,
    /// Row-major, first axis slowest.
    pub efficiency: Vec<f64>,
}

impl SweepTable {
    pub fn shape(&self) -> Vec<usize> {
        self.axis_values.iter().map(Vec::len).collect()
    }
}

/// Parses a one- or two-axis long-format sweep. Rows must enumerate the full
/// grid in row-major order and efficiencies must lie in [0, 1].
pub fn read_sweep_csv<R: Read>(input: R) -> Result<SweepTable> {
    let table = read_numeric_csv(input)?;
    let dims = table.header.len().saturating_sub(1);
    if !(1..=2).contains(&dims) || table.header[dims] != EFFICIENCY_COLUMN {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected 1 or 2 axis columns then {EFFICIENCY_COLUMN}, found {}", table.header.join(",")),
        });
    }
    if table.rows.is_empty() {
        return Err(Error::Parse { line: 2, message: "no cells".into() });
    }
    let inner = if dims == 2 {
        table.rows.iter().position(|r| r[0] != table.rows[0][0]).unwrap_or(table.rows.len())
    } else {
        1
    };
    if table.rows.len() % inner != 0 {
        return Err(Error::Parse { line: table.rows.len() + 1, message: "grid is not rectangular".into() });
    }
    let outer = table.rows.len() / inner;
    let first: Vec<f64> = (0..outer).map(|i| table.rows[i * inner][0]).collect();
    let second: Vec<f64> = table.rows[..inner].iter().map(|r| r[dims - 1]).collect();
    for (k, row) in table.rows.iter().enumerate() {
        let line = k + 2;
        let (i, j) = (k / inner, k % inner);
        if row[0] != first[i] || (dims == 2 && row[1] != second[j]) {
            return Err(Error::Parse { line, message: "cells are not in row-major grid order".into() });
        }
        if !(0.0..=1.0).contains(&row[dims]) {
            return Err(Error::Parse { line, message: format!("efficiency {} outside [0, 1]", row[dims]) });
        }
    }
    for (name, axis) in table.header.iter().zip([&first, &second]).take(dims) {
        if axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse { line: 2, message: format!("axis {name} must increase") });
        }
    }
    let axis_values = if dims == 2 { vec![first, second] } else { vec![first] };
    Ok(SweepTable {
        axis_names: table.header[..dims].to_vec(),
        axis_values,
        efficiency: table.rows.iter().map(|r| r[dims]).collect(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
