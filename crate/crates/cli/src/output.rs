//! Text artifacts: CSV tables and gnuplot-friendly field files.
//!
//! Field file layout:
//!
//! ```text
//! # field <tag>
//! # points <NP>
//! x y value        (NP lines, one per P2 node)
//!
//!
//! # cells <NC>
//! i0 i1 i2 i3 i4 i5   (NC lines: vertex nodes, then edge midpoints)
//! ```
//!
//! The two blank lines make the cell block gnuplot's `index 1`.

use std::fmt::Write;

use nvfem_core::analysis::ConvergenceTable;
use nvfem_core::fmt::sci17;
use nvfem_core::FeFunction;

pub const CONVERGENCE_HEADER: &str = "level,h,ndof,err_l2,eoc_l2,err_h1,eoc_h1,err_h2,eoc_h2,newton_iters";
pub const LINEAR_HEADER: &str = "level,h,ndof,err_l2,eoc_l2,err_h1,eoc_h1,err_h2,eoc_h2";
pub const SWEEP_HEADER: &str = "K,converged,iterations,min_u,min_eig_H";

fn table_rows(table: &ConvergenceTable, with_iters: bool) -> String {
    let mut out = String::new();
    let rates = table.rates();
    for (i, r) in table.records.iter().enumerate() {
        let (l2, h1, h2) = match i.checked_sub(1).map(|j| rates[j]) {
            Some(q) => (sci17(q.l2), sci17(q.h1), sci17(q.h2)),
            None => (String::new(), String::new(), String::new()),
        };
        let _ = write!(
            out,
            "{},{},{},{},{l2},{},{h1},{},{h2}",
            r.level,
            sci17(r.h),
            r.ndof,
            sci17(r.err_l2),
            sci17(r.err_h1),
            sci17(r.err_h2)
        );
        if with_iters {
            let _ = write!(out, ",{}", r.newton_iters);
        }
        out.push('\n');
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    format!("{CONVERGENCE_HEADER}\n{}", table_rows(table, true))
}

pub fn linear_csv(table: &ConvergenceTable) -> String {
    format!("{LINEAR_HEADER}\n{}", table_rows(table, false))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Unavailable when the run failed before producing an iterate.
    pub min_u: Option<f64>,
    pub min_eig_h: Option<f64>,
    /// Solver message for a failed run; not part of the CSV.
    pub failure: Option<String>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    let opt = |v: Option<f64>| v.map(sci17).unwrap_or_default();
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", sci17(r.k), r.converged, r.iterations, opt(r.min_u), opt(r.min_eig_h));
    }
    out
}

/// Splits a CSV body into rows of cells, skipping the header.
pub fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

pub fn field_text(u: &FeFunction, tag: &str) -> String {
    let dm = u.dofmap();
    let mut out = String::new();
    let _ = writeln!(out, "# field {tag}");
    let _ = writeln!(out, "# points {}", dm.num_dofs());
    for (x, v) in dm.coords().iter().zip(u.coeffs()) {
        let _ = writeln!(out, "{} {} {}", sci17(x[0]), sci17(x[1]), sci17(*v));
    }
    let _ = writeln!(out, "\n\n# cells {}", dm.num_cells());
    for c in 0..dm.num_cells() {
        let d = dm.cell_dofs(c);
        let _ = writeln!(out, "{} {} {} {} {} {}", d[0], d[1], d[2], d[3], d[4], d[5]);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    pub tag: String,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub cells: Vec<[usize; 6]>,
}

pub fn parse_field(text: &str) -> Result<FieldData, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| lines.next().map(|(i, l)| (i + 1, l)).ok_or_else(|| format!("missing {what}"));
    fn header<'a>((i, l): (usize, &'a str), prefix: &str) -> Result<&'a str, String> {
        l.strip_prefix(prefix).map(str::trim).ok_or_else(|| format!("line {i}: expected '{prefix}'"))
    }
    fn count(line: (usize, &str), prefix: &str) -> Result<usize, String> {
        header(line, prefix)?.parse().map_err(|_| format!("line {}: bad count", line.0))
    }
    let tag = header(next("field header")?, "# field")?.to_string();
    let np = count(next("point header")?, "# points")?;
    let mut points = Vec::with_capacity(np);
    let mut values = Vec::with_capacity(np);
    for _ in 0..np {
        let (i, l) = next("point row")?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {i}: bad number"))?;
        let [x, y, value]: [f64; 3] = v.try_into().map_err(|_| format!("line {i}: expected 3 columns"))?;
        points.push([x, y]);
        values.push(value);
    }
    let nc = count(next("cell header")?, "# cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (i, l) = next("cell row")?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {i}: bad index"))?;
        let cell: [usize; 6] = v.try_into().map_err(|_| format!("line {i}: expected 6 indices"))?;
        if cell.iter().any(|&d| d >= np) {
            return Err(format!("line {i}: index out of range"));
        }
        cells.push(cell);
    }
    Ok(FieldData { tag, points, values, cells })
}
