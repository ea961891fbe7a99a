//! Text and CSV formats for graphs, data, score tables, traces and counts.
//!
//! Node labels in every file are zero-based column indices of the data.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use dagmc_core::oracle::PosteriorTable;
use dagmc_core::{ChainTrace, Dag, DataSet, LabelledPartition, NodeSet, ScoreTable};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid data: {0}")]
    Data(#[from] dagmc_core::ScoreError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

/// `n=<int>` followed by one row of space-separated 0/1 per node; row `i` lists the parents of `i`.
pub fn format_dag(dag: &Dag) -> String {
    let mut out = format!("n={}\n", dag.n());
    for row in dag.adjacency() {
        let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Parses every DAG block in `text`; blocks may be separated by blank lines.
/// `first_line` is the line number of the first line of `text`.
fn parse_dag_blocks(text: &str, first_line: usize) -> Result<Vec<Dag>, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + first_line, l.trim())).peekable();
    let mut dags = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let n: usize = line
            .strip_prefix("n=")
            .ok_or_else(|| parse_err(line_no, "expected a header of the form n=<int>"))?
            .parse()
            .map_err(|_| parse_err(line_no, "node count is not an integer"))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (row_no, row) = lines.next().ok_or_else(|| parse_err(line_no, "missing adjacency rows"))?;
            let cells = row
                .split_whitespace()
                .map(|c| match c {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(parse_err(row_no, format!("expected 0 or 1, found {other:?}"))),
                })
                .collect::<Result<Vec<bool>, IoError>>()?;
            if cells.len() != n {
                return Err(parse_err(row_no, format!("expected {n} entries, found {}", cells.len())));
            }
            rows.push(cells);
        }
        dags.push(Dag::from_adjacency(&rows).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    Ok(dags)
}

pub fn parse_dag(text: &str) -> Result<Dag, IoError> {
    let mut dags = parse_dag_blocks(text, 1)?;
    match dags.len() {
        1 => Ok(dags.remove(0)),
        0 => Err(parse_err(1, "no graph found")),
        _ => Err(parse_err(1, "more than one graph found")),
    }
}

pub fn parse_dags(text: &str) -> Result<Vec<Dag>, IoError> {
    parse_dag_blocks(text, 1)
}

pub fn read_dag(path: &Path) -> Result<Dag, IoError> {
    parse_dag(&fs::read_to_string(path)?)
}

pub fn write_dag(path: &Path, dag: &Dag) -> Result<(), IoError> {
    fs::write(path, format_dag(dag))?;
    Ok(())
}

/// Reads a data CSV with a header of variable names.
pub fn read_data<R: Read>(reader: R) -> Result<DataSet, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if names.is_empty() || names.iter().all(|n| n.is_empty()) {
        return Err(parse_err(1, "missing header row"));
    }
    let mut values = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx + 2, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", names.len(), record.len())));
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("column {:?}: {cell:?} is not a finite number", names[col])))?;
            values.push(v);
        }
    }
    Ok(DataSet::new(names.len(), values, names)?)
}

pub fn load_csv(path: &Path) -> Result<DataSet, IoError> {
    read_data(fs::File::open(path)?)
}

/// Writes data with 17 significant digits, enough to round-trip every `f64`.
pub fn write_data<W: Write>(writer: W, data: &DataSet) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.names())?;
    for r in 0..data.n_obs() {
        w.write_record(data.row(r).iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Score table rows `node,parent_mask,log_score`.
pub fn write_score_table<W: Write>(writer: W, table: &ScoreTable) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node", "parent_mask", "log_score"])?;
    for node in 0..table.n() {
        for (mask, score) in table.entries(node) {
            w.write_record([node.to_string(), mask.bits().to_string(), format!("{score:.16e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Trace rows `step,state_log_score,dag_log_score` for every recorded step.
pub fn write_trace<W: Write>(writer: W, trace: &ChainTrace) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "state_log_score", "dag_log_score"])?;
    for s in &trace.samples {
        w.write_record([s.step.to_string(), format!("{:.16e}", s.state_log_score), format!("{:.16e}", s.dag_log_score)])?;
    }
    w.flush()?;
    Ok(())
}

/// The sampled DAGs of a trace as consecutive blocks in the graph text format.
pub fn format_trace_dags(trace: &ChainTrace) -> String {
    let mut out = String::new();
    for s in &trace.samples {
        out.push_str(&format_dag(&s.dag));
        out.push('\n');
    }
    out
}

/// `k1,k2,..|e1;e2;..` with each element a comma-separated node list.
pub fn format_partition(part: &LabelledPartition) -> String {
    let sizes: Vec<String> = part.lambda().iter().map(|k| k.to_string()).collect();
    let elements: Vec<String> = part
        .elements()
        .iter()
        .map(|e| e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!("{}|{}", sizes.join(","), elements.join(";"))
}

pub fn parse_partition(line: &str) -> Result<LabelledPartition, IoError> {
    let (sizes, elements) = line.trim().split_once('|').ok_or_else(|| parse_err(1, "expected sizes|elements"))?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| parse_err(1, format!("bad size {s:?}"))))
        .collect::<Result<_, _>>()?;
    let mut sets = Vec::new();
    for el in elements.split(';') {
        let mut set = NodeSet::EMPTY;
        for v in el.split(',') {
            let v: usize = v.trim().parse().map_err(|_| parse_err(1, format!("bad node {v:?}")))?;
            if v >= dagmc_core::nodeset::MAX_NODES {
                return Err(parse_err(1, format!("node {v} out of range")));
            }
            set.insert(v);
        }
        sets.push(set);
    }
    if sets.iter().map(|s| s.len()).ne(sizes.iter().copied()) {
        return Err(parse_err(1, "sizes do not match the elements"));
    }
    LabelledPartition::new(sizes.iter().sum(), sets).map_err(|e| parse_err(1, e.to_string()))
}

/// Edge posterior matrix; entry `[i][j]` is the probability of `j -> i`.
pub fn write_edge_posterior<W: Write>(writer: W, names: &[String], matrix: &[Vec<f64>]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (i, row) in matrix.iter().enumerate() {
        let mut rec = vec![names[i].clone()];
        rec.extend(row.iter().map(|p| format!("{p:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_posterior_table<W: Write>(mut writer: W, post: &PosteriorTable) -> Result<(), IoError> {
    let mut out = String::new();
    for (dag, p) in &post.entries {
        let _ = writeln!(out, "p={p:.16e}");
        out.push_str(&format_dag(dag));
    }
    writer.write_all(out.as_bytes())?;
    Ok(())
}
