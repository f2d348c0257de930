use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde_json::{json, Value};

/// A file the command produces.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub primary: Artifact,
    pub extra: Vec<Artifact>,
}

impl Outcome {
    pub fn single(primary: Artifact) -> Self {
        Self { primary, extra: Vec::new() }
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Artifact> {
        std::iter::once(&self.primary).chain(&self.extra)
    }
}

/// Seventeen significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Columns as `name [unit]`.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        let header: Vec<String> = columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        Self { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let cells: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        Artifact { name: name.to_string(), contents: self.text }
    }
}

pub enum Cell {
    F(f64),
    I(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => float(*x),
            Cell::I(n) => n.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn json_artifact(name: &str, v: &Value) -> Artifact {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    Artifact { name: name.to_string(), contents: s }
}

pub fn matrix(m: &Matrix2<f64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn cmatrix(m: &Matrix2<Complex64>) -> Value {
    json!([
        [complex(m[(0, 0)]), complex(m[(0, 1)])],
        [complex(m[(1, 0)]), complex(m[(1, 1)])]
    ])
}

/// Script plotting the given columns of a CSV file.
pub fn gnuplot(csv: &Artifact, title: &str, x_col: usize, y_cols: &[usize]) -> Artifact {
    let header = csv.contents.lines().next().unwrap_or_default();
    let names: Vec<&str> = header.split(',').collect();
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{}'", names.get(x_col - 1).unwrap_or(&""));
    let plots: Vec<String> = y_cols
        .iter()
        .map(|c| format!("'{}' using {x_col}:{c} with linespoints", csv.name))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    let stem = csv.name.trim_end_matches(".csv");
    Artifact { name: format!("{stem}.gp"), contents: s }
}

pub fn write_all(dir: &Path, outcome: &Outcome) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in outcome.artifacts() {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents)?;
        written.push(path);
    }
    Ok(written)
}
