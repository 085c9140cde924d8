//! CSV emission with a locale-independent number format.

use std::io::Write;

pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 12 significant digits and prints the shortest form that reads
/// back to the rounded value; exponent notation outside `[1e-5, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    if (1e-5..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Rows sharing one header. The trailing `schema_version` and `wall_time_s`
/// columns are appended on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W, wall_time_s: f64) -> std::io::Result<()> {
        writeln!(w, "{},schema_version,wall_time_s", self.header.join(","))?;
        let wall = format!("{wall_time_s:.3}");
        for row in &self.rows {
            writeln!(w, "{},{},{}", row.join(","), SCHEMA_VERSION, wall)?;
        }
        Ok(())
    }
}
