//! Delimited numeric text with a missing-value token.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use kmmeans::MaskedDataset;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Cells equal to this (after trimming) are missing. Empty cells always are.
    pub missing_token: String,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            missing_token: "NA".into(),
            has_header: true,
        }
    }
}

/// A dataset plus its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub data: MaskedDataset,
}

fn reader_builder(opts: &CsvOptions) -> csv::ReaderBuilder {
    let mut b = csv::ReaderBuilder::new();
    b.delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All);
    b
}

pub fn read_csv(path: &Path, opts: &CsvOptions) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv_from(file, opts)
}

/// Rows and columns in errors are 1-based data positions (header excluded).
pub fn read_csv_from<R: Read>(reader: R, opts: &CsvOptions) -> Result<Table, CliError> {
    let mut rdr = reader_builder(opts).from_reader(reader);
    let mut names: Option<Vec<String>> = if opts.has_header {
        let h = rdr.headers().map_err(CliError::csv)?;
        if h.is_empty() {
            None
        } else {
            Some(h.iter().map(str::to_string).collect())
        }
    } else {
        None
    };
    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut p: Option<usize> = names.as_ref().map(Vec::len);
    let mut n = 0;
    for record in rdr.records() {
        let record = record.map_err(CliError::csv)?;
        let width = *p.get_or_insert(record.len());
        if record.len() != width {
            return Err(CliError::Data(format!(
                "row {}: expected {width} fields, found {}",
                n + 1,
                record.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            if field.is_empty() || field == opts.missing_token {
                values.push(0.0);
                mask.push(false);
            } else {
                let x: f64 = field.parse().map_err(|_| {
                    CliError::Data(format!("row {}, column {}: cannot parse {field:?} as a number", n + 1, j + 1))
                })?;
                if !x.is_finite() {
                    return Err(CliError::Data(format!("row {}, column {}: non-finite value", n + 1, j + 1)));
                }
                values.push(x);
                mask.push(true);
            }
        }
        n += 1;
    }
    let p = match p {
        Some(p) if n > 0 => p,
        _ => return Err(CliError::Data("input has no data rows".into())),
    };
    let data = MaskedDataset::from_parts(n, p, values, mask).map_err(|e| match e {
        kmmeans::Error::RowAllMissing(i) => CliError::Data(format!("row {} has no observed values", i + 1)),
        other => CliError::Core(other),
    })?;
    let names = names.take().unwrap_or_else(|| (1..=p).map(|j| format!("V{j}")).collect());
    Ok(Table { names, data })
}

pub fn write_csv<W: Write>(writer: W, table: &Table, opts: &CsvOptions) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().delimiter(opts.delimiter).from_writer(writer);
    if opts.has_header {
        w.write_record(&table.names).map_err(CliError::csv)?;
    }
    for row in table.data.rows() {
        let fields: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| opts.missing_token.clone(), |x| x.to_string()))
            .collect();
        w.write_record(&fields).map_err(CliError::csv)?;
    }
    w.flush().map_err(CliError::write)?;
    Ok(())
}

/// Reads a label column: the last field of each row. A first row whose last
/// field does not look like a label is taken as a header and skipped when
/// `header` is `None`.
pub fn read_labels(path: &Path, delimiter: u8, header: Option<bool>) -> Result<Vec<String>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(CliError::csv)?;
        let Some(last) = record.iter().next_back() else { continue };
        if last.is_empty() && record.len() == 1 {
            continue;
        }
        if idx == 0 {
            let skip = header.unwrap_or_else(|| last.parse::<i64>().is_err());
            if skip {
                continue;
            }
        }
        out.push(last.to_string());
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no labels", path.display())));
    }
    Ok(out)
}
