//! CSV tables and plot scripts.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Fixed decimal notation with nine significant digits; non-finite values print as `NA`.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let decimals = |v: f64| (8 - v.abs().log10().floor() as i32).clamp(0, 40) as usize;
    let d = decimals(x);
    let s = format!("{x:.d$}");
    // Rounding can carry into a new leading digit, as in 9.999999999 -> 10.00000000.
    let rounded: f64 = s.parse().expect("formatted float");
    let d2 = decimals(rounded);
    if d2 < d {
        format!("{x:.d2$}")
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// A number that may be missing.
    Opt(Option<f64>),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Opt(Some(x)) => fmt_num(*x),
            Cell::Opt(None) => "NA".into(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.replace([',', '\n'], " "),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// How a panel should be drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    /// Line plot of column `y` against column `x` (1-based).
    Line { x: usize, y: usize, xlabel: String, ylabel: String },
    /// Heat map of column `z` over columns `x`, `y`.
    Map { x: usize, y: usize, z: usize, xlabel: String, ylabel: String, zlabel: String },
}

/// A gnuplot script that renders `csv` (a sibling file) to `<stem>.png`.
pub fn plot_script(csv: &str, title: &str, plot: &Plot) -> String {
    let stem = csv.trim_end_matches(".csv");
    let mut s = format!(
        "# Render with: gnuplot {stem}.gp\n\
         set datafile separator ','\n\
         set datafile missing 'NA'\n\
         set terminal pngcairo size 800,600\n\
         set output '{stem}.png'\n\
         set title '{title}'\n"
    );
    match plot {
        Plot::Line { x, y, xlabel, ylabel } => {
            s.push_str(&format!(
                "set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n\
                 plot '{csv}' skip 1 using {x}:{y} with linespoints notitle\n"
            ));
        }
        Plot::Map { x, y, z, xlabel, ylabel, zlabel } => {
            s.push_str(&format!(
                "set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset cblabel '{zlabel}'\n\
                 set view map\n\
                 splot '{csv}' skip 1 using {x}:{y}:{z} with points pointtype 5 pointsize 1 palette notitle\n"
            ));
        }
    }
    s
}

/// Writes a panel's CSV and plot script into `dir`; returns both paths.
pub fn write_panel(dir: &Path, name: &str, title: &str, table: &Table, plot: &Plot) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_name = format!("{name}.csv");
    let csv = dir.join(&csv_name);
    let gp = dir.join(format!("{name}.gp"));
    fs::write(&csv, table.to_csv())?;
    fs::write(&gp, plot_script(&csv_name, title, plot))?;
    Ok(vec![csv, gp])
}
