//! Field CSV (`i,j,x,y,u`), singular-set CSV, and gnuplot tables.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use maxarea_core::structure::SingularSet;
use maxarea_core::{GridDomain, ScalarField};

pub const FIELD_HEADER: &str = "i,j,x,y,u";
pub const SINGULAR_HEADER: &str = "x1,y1,x2,y2,sign,residual";

/// One row per active node in node order, 17 significant digits.
pub fn field_csv(field: &ScalarField) -> String {
    let d = field.domain();
    let mut out = String::with_capacity(64 * d.len());
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for id in 0..d.len() {
        let [i, j] = d.lattice(id);
        let x = d.point(id);
        writeln!(out, "{i},{j},{:.16e},{:.16e},{:.16e}", x[0], x[1], field.value(id)).unwrap();
    }
    out
}

/// Reads a field CSV onto `domain`, matching rows by lattice index.
///
/// Every active node must appear exactly once and the coordinates must agree
/// with the domain to 1e-9 h.
pub fn parse_field_csv(text: &str, domain: Arc<GridDomain>) -> Result<ScalarField> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == FIELD_HEADER => {}
        _ => bail!("field CSV must start with the header {FIELD_HEADER:?}"),
    }
    let mut values = vec![f64::NAN; domain.len()];
    let mut seen = vec![false; domain.len()];
    let tol = 1e-9 * domain.h();
    for (n, line) in lines {
        let row = n + 1;
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            bail!("line {row}: expected 5 columns, found {}", cols.len());
        }
        let i: i32 = cols[0].parse().with_context(|| format!("line {row}: bad i"))?;
        let j: i32 = cols[1].parse().with_context(|| format!("line {row}: bad j"))?;
        let mut num = [0.0; 3];
        for (k, c) in cols[2..].iter().enumerate() {
            num[k] = c.parse().with_context(|| format!("line {row}: bad number {c:?}"))?;
        }
        let Some(id) = domain.node_at([i, j]) else { bail!("line {row}: node ({i}, {j}) is not active in the domain") };
        let p = domain.point(id);
        if (p[0] - num[0]).abs() > tol || (p[1] - num[1]).abs() > tol {
            bail!("line {row}: node ({i}, {j}) is at {p:?}, not ({}, {})", num[0], num[1]);
        }
        if seen[id] {
            bail!("line {row}: node ({i}, {j}) appears twice");
        }
        seen[id] = true;
        values[id] = num[2];
    }
    if let Some(id) = seen.iter().position(|s| !s) {
        bail!("node {:?} is missing from the CSV", domain.lattice(id));
    }
    Ok(ScalarField::new(domain, values)?)
}

pub fn singular_csv(set: &SingularSet) -> String {
    let mut out = String::from(SINGULAR_HEADER);
    out.push('\n');
    for s in &set.segments {
        let r = s.residual.map(|r| format!("{r:.16e}")).unwrap_or_default();
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{},{r}", s.x[0], s.x[1], s.y[0], s.y[1], s.sign).unwrap();
    }
    out
}

/// `x y u` rows, one block per lattice column with a blank line between, for `splot`.
pub fn gnuplot_table(field: &ScalarField) -> String {
    let d = field.domain();
    let mut ids: Vec<usize> = (0..d.len()).collect();
    ids.sort_by_key(|&id| d.lattice(id));
    let mut out = String::from("# x y u\n");
    let mut column = None;
    for id in ids {
        let l = d.lattice(id);
        if column.is_some_and(|c| c != l[0]) {
            out.push('\n');
        }
        column = Some(l[0]);
        let x = d.point(id);
        writeln!(out, "{:.16e} {:.16e} {:.16e}", x[0], x[1], field.value(id)).unwrap();
    }
    out
}
