//! Comma-separated output with `#` comment headers and 12 significant digits.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Integer(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Integer(x)
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

/// `x` with 12 significant digits, fixed notation for moderate exponents.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Number(x) => format_number(*x),
        Cell::Integer(i) => i.to_string(),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { comments: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row arity must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.923), "0.923");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0 * 1e6), "666666.666667");
        assert_eq!(format_number(-1.0), "-1");
        assert_eq!(format_number(1.23456789012345e-9), "1.23456789012e-9");
        assert_eq!(format_number(9.9999999999999e11), "1e12");
        assert_eq!(format_number(123456789012.4), "123456789012");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn round_trip_within_twelve_digits() {
        for &x in &[core::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, 7.77e-5] {
            let y: f64 = format_number(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 5e-12, "{x} -> {y}");
        }
    }

    #[test]
    fn render_with_header_and_quoting() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("first\nsecond");
        t.push(vec![1.5.into(), "x,y".into()]);
        t.push(vec![Cell::Integer(-1), "z".into()]);
        assert_eq!(t.render(), "# first\n# second\na,b\n1.5,\"x,y\"\n-1,z\n");
    }

    #[test]
    #[should_panic]
    fn arity_mismatch_panics() {
        Table::new(&["a", "b"]).push(vec![1.0.into()]);
    }
}
