//! Input files and report tables.
//!
//! Channel: `{"kind": "kraus" | "choi", "dim_in": n, "dim_out": m, "data": ...}`
//! where `data` is a list of `m×n` Kraus matrices or one `nm×nm` Choi matrix.
//! State: `{"dims": [d₁, …], "matrix": ...}`. Matrices are row-major lists of
//! rows, each entry an `[re, im]` pair.

use std::io::{Read, Write};
use std::path::Path;

use rainskit_core::{BipartiteState, Channel, ComplexMatrix, DimSpec, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// First line of every CSV report.
pub const CSV_VERSION: &str = "# rainskit-csv v1";

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ChannelKind {
    Kraus,
    Choi,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    kind: ChannelKind,
    dim_in: usize,
    dim_out: usize,
    data: serde_json::Value,
}

/// Kraus data: a list of operators, or a single operator.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum KrausData {
    Many(Vec<Rows>),
    One(Rows),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: Vec<usize>,
    matrix: Rows,
}

pub fn read_input(path: &Path) -> CliResult<String> {
    let mut text = String::new();
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(io)?;
    } else {
        std::fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(io)?;
    }
    Ok(text)
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str, origin: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        CliError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    })
}

fn data<T: serde::de::DeserializeOwned>(v: serde_json::Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|_| {
        CliError::Input(format!("{what} must be a nested list of [re, im] pairs"))
    })
}

fn matrix(rows: &Rows, what: &str) -> CliResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Input(format!("{what}: rows must be non-empty and of equal length")));
    }
    let data = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    Ok(ComplexMatrix::from_vec(r, c, data)?)
}

fn shape(name: &str, m: &ComplexMatrix, rows: usize, cols: usize) -> CliResult<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(CliError::Input(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn parse_channel(text: &str, origin: &str) -> CliResult<Channel> {
    let file: ChannelFile = parse(text, origin)?;
    let (n, m) = (file.dim_in, file.dim_out);
    if n == 0 || m == 0 {
        return Err(CliError::Input("dim_in and dim_out must be positive".into()));
    }
    match file.kind {
        ChannelKind::Kraus => {
            let ops = match data::<KrausData>(file.data, "Kraus data")? {
                KrausData::Many(ops) => ops,
                KrausData::One(op) => vec![op],
            };
            if ops.is_empty() {
                return Err(CliError::Input("no Kraus operators".into()));
            }
            let kraus = ops
                .iter()
                .enumerate()
                .map(|(k, rows)| {
                    let name = format!("Kraus operator {k}");
                    let op = matrix(rows, &name)?;
                    shape(&name, &op, m, n)?;
                    Ok(op)
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(Channel::from_kraus(kraus)?)
        }
        ChannelKind::Choi => {
            let rows: Rows = data(file.data, "Choi data")?;
            let choi = matrix(&rows, "Choi matrix")?;
            shape("Choi matrix", &choi, n * m, n * m)?;
            Ok(Channel::from_choi(n, m, choi)?)
        }
    }
}

pub fn parse_state(text: &str, origin: &str) -> CliResult<BipartiteState> {
    let file: StateFile = parse(text, origin)?;
    let dims = DimSpec::new(file.dims)?;
    let m = matrix(&file.matrix, "state matrix")?;
    Ok(BipartiteState::new(m, dims)?)
}

pub fn load_channel(path: &Path) -> CliResult<Channel> {
    parse_channel(&read_input(path)?, &path.display().to_string())
}

pub fn load_state(path: &Path) -> CliResult<BipartiteState> {
    parse_state(&read_input(path)?, &path.display().to_string())
}

/// `x` with 12 significant digits, plain notation for moderate exponents.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Real(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Real(x) => sig12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_VERSION}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(2.0f64.log2() + 1e-13), "1");
        assert_eq!(sig12(123456.7890123456), "123456.789012");
        assert_eq!(sig12(-1e-9), "-1e-9");
        assert_eq!(sig12(6.02214076e23), "6.02214076e23");
        assert_eq!(sig12(-1e-16), "-1e-16");
    }

    #[test]
    fn channel_roundtrip_identity() {
        let text = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"data":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let n = parse_channel(text, "inline").unwrap();
        assert!(n.choi_distance(&Channel::identity(2).unwrap()) < 1e-12);
    }

    #[test]
    fn choi_input() {
        let text = r#"{"kind":"choi","dim_in":1,"dim_out":2,"data":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        let n = parse_channel(text, "inline").unwrap();
        assert_eq!((n.dim_in(), n.dim_out()), (1, 2));
    }

    #[test]
    fn truncated_input_reports_position() {
        let err = parse_channel("{\"kind\":\"kraus\",\n\"dim_in\":2,", "f.json").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_kraus_shape_is_rejected() {
        let text = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"data":[[[[1,0]]]]}"#;
        assert!(matches!(parse_channel(text, "x"), Err(CliError::Input(_))));
    }

    #[test]
    fn state_must_be_a_density_matrix() {
        let text = r#"{"dims":[1,2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(parse_state(text, "x"), Err(CliError::Input(_))));
    }

    #[test]
    fn csv_has_version_and_header() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Cell::Text("x".into()), Cell::Real(0.1)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# rainskit-csv v1\na,b\nx,0.1\n");
    }
}
