//! Result tables: canonical row order and reproducible float text.

use std::cmp::Ordering;

use sha2::{Digest, Sha256};

/// Renders `v` with 12 significant digits in the shortest of fixed or
/// scientific notation, trailing zeros removed (like C's `%.12g`).
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `v` rounded to the value its 12-digit text denotes.
pub fn round12(v: f64) -> f64 {
    fmt_float(v).parse().unwrap_or(v)
}

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Short hash binding a witness map to the host it lives in.
pub fn witness_hash(host_digest: &str, witness: &[usize]) -> String {
    let text = format!("{host_digest}|{}", join_indices(witness));
    sha256_hex(text.as_bytes())[..16].to_string()
}

/// Indices separated by single spaces.
pub fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Cell::Empty => 0,
            Cell::Bool(_) => 1,
            Cell::Int(_) | Cell::Float(_) => 2,
            Cell::Text(_) => 3,
        }
    }

    /// Total order: numbers numerically, text lexicographically.
    fn cmp_canonical(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (Cell::Bool(a), Cell::Bool(b)) => a.cmp(b),
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Int(a), Cell::Float(b)) => (*a as f64).total_cmp(b),
            (Cell::Float(a), Cell::Int(b)) => a.total_cmp(&(*b as f64)),
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A CSV table whose rows are written in a canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
    /// Columns compared, in order, to sort the rows.
    key: Vec<usize>,
}

impl Table {
    /// `key` names the columns that sort the rows; the remaining columns
    /// break ties left to right.
    pub fn new(header: &[&str], key: &[&str]) -> Self {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let mut key: Vec<usize> = key
            .iter()
            .map(|k| {
                header
                    .iter()
                    .position(|h| h == k)
                    .unwrap_or_else(|| panic!("sort key {k} is not a column"))
            })
            .collect();
        for i in 0..header.len() {
            if !key.contains(&i) {
                key.push(i);
            }
        }
        Self {
            header,
            rows: Vec::new(),
            key,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in canonical order.
    pub fn sorted_rows(&self) -> Vec<&Vec<Cell>> {
        let mut rows: Vec<&Vec<Cell>> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            self.key
                .iter()
                .map(|&k| a[k].cmp_canonical(&b[k]))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
        rows
    }

    pub fn sort(&mut self) {
        let rows = self.sorted_rows().into_iter().cloned().collect();
        self.rows = rows;
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<Cell>] {
        &mut self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in self.sorted_rows() {
            w.write_record(row.iter().map(Cell::render)).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(0.125), "0.125");
        assert_eq!(fmt_float(5.0), "5");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(2f64.sqrt()), "1.41421356237");
        assert_eq!(fmt_float(123456789012.4), "123456789012");
        assert_eq!(fmt_float(1.5e12), "1.5e12");
        assert_eq!(fmt_float(2.5e-7), "2.5e-7");
        assert_eq!(fmt_float(0.0001), "0.0001");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn rows_sorted_by_key_then_columns() {
        let mut t = Table::new(&["name", "n", "value"], &["n"]);
        t.push(vec!["b".into(), 10u32.into(), 1.0.into()]);
        t.push(vec!["a".into(), 2u32.into(), 0.5.into()]);
        t.push(vec!["a".into(), 10u32.into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "name,n,value\na,2,0.5\na,10,\nb,10,1\n");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["x", "y"], &[]);
        assert_eq!(t.to_csv(), "x,y\n");
    }

    #[test]
    fn text_with_commas_is_quoted() {
        let mut t = Table::new(&["status"], &[]);
        t.push(vec!["bad input: a, b".into()]);
        assert_eq!(t.to_csv(), "status\n\"bad input: a, b\"\n");
    }
}
