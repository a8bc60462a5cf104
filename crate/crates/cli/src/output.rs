//! CSV and JSON writers with the configuration header.
//!
//! CSV files are comma separated with LF line endings; reals use
//! `{:.16e}` (17 significant digits) so reruns compare byte for byte.

use crate::config::Command;
use rhb::spectral::FourierCoeffs;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub enum Cell {
    Int(usize),
    Real(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Real(v) => write!(out, "{v:.16e}"),
            Cell::Text(s) => write!(out, "{s}"),
            Cell::Flag(b) => write!(out, "{b}"),
        }
        .expect("writing to a String");
    }
}

/// `# rhb <command>` followed by the configuration, one `# `-prefixed line
/// per line.
pub fn header(command: Command, config: &str) -> String {
    let mut h = format!("# rhb {}\n", command.name());
    for line in config.lines() {
        if line.is_empty() {
            h.push_str("#\n");
        } else {
            h.push_str("# ");
            h.push_str(line);
            h.push('\n');
        }
    }
    h
}

/// Recovers the configuration text from a file written by [`write_csv`].
pub fn config_from_header(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines().skip(1) {
        if line == "#" {
            out.push('\n');
        } else if let Some(rest) = line.strip_prefix("# ") {
            out.push_str(rest);
            out.push('\n');
        } else {
            break;
        }
    }
    out
}

pub fn write_csv(
    path: &Path,
    command: Command,
    config: &str,
    columns: &[String],
    rows: &[Vec<Cell>],
) -> std::io::Result<PathBuf> {
    let mut text = header(command, config);
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            c.render(&mut text);
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with `command` and the configuration text as leading fields.
pub fn write_json<T: Serialize>(
    path: &Path,
    command: Command,
    config: &str,
    body: &T,
) -> std::io::Result<PathBuf> {
    let env = Envelope {
        command: command.name(),
        config,
        body,
    };
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &env)?;
    writeln!(f)?;
    Ok(path.to_path_buf())
}

/// Names `const, cos1, sin1, …` of the coefficients of one component.
pub fn term_names(order: usize) -> Vec<String> {
    let mut v = vec!["const".to_string()];
    for n in 1..=order {
        v.push(format!("cos{n}"));
        v.push(format!("sin{n}"));
    }
    v
}

/// `<component>_<term>` for every stored coefficient, component-major.
pub fn coefficient_columns(names: &[String], order: usize) -> Vec<String> {
    let terms = term_names(order);
    names
        .iter()
        .flat_map(|c| terms.iter().map(move |t| format!("{c}_{t}")))
        .collect()
}

pub fn coefficient_cells(c: &FourierCoeffs) -> Vec<Cell> {
    c.as_slice().iter().map(|&v| Cell::Real(v)).collect()
}
