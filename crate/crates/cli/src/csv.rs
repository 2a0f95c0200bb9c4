//! CSV tables: one header row naming units, numbers with 17 significant digits.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `x` with 17 significant digits, round-trippable.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// Columns are named `name [unit]`.
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len(), "row width");
        self.rows.push(
            cells
                .into_iter()
                .map(|c| match c {
                    Cell::Num(x) => num(x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s,
                    Cell::Empty => String::new(),
                })
                .collect(),
        );
    }

    pub fn render(&self) -> String {
        let mut w = ::csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, self.render())
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::csv::Cell::from($x)),*]
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 5.0 / 6.0, 1e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn rows_follow_the_header() {
        let mut t = Table::new(&["a [-]", "b [time]"]);
        t.row(cells![1usize, "x,y"]);
        t.row(cells![Option::<f64>::None, 0.25]);
        assert_eq!(
            t.render(),
            "a [-],b [time]\n1,\"x,y\"\n,2.5000000000000000e-1\n"
        );
    }
}
