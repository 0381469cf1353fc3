//! Writers for solution fields, meshes, and convergence tables.
//!
//! Solution CSV: first row is the node coordinates, then one row per
//! time level (history included) holding t followed by the values.
//! Binary dump: magic "SPDD", a format version byte, little-endian
//! dimensions, then coordinates and level-major values as f64.
//! Table CSV/Markdown mirror the study layout with %.3e entries; JSON
//! keeps full precision for regression comparisons.

use std::io::{self, Write};

use spdd_core::analysis::ConvergenceTable;
use spdd_core::mesh::SpatialMesh;
use spdd_core::solver::GridField;

pub const BINARY_MAGIC: &[u8; 4] = b"SPDD";
pub const BINARY_VERSION: u8 = 1;

/// C-style `%.3e`: three fractional digits, signed two-digit exponent.
/// Rust's `{:.3e}` leaves the exponent unpadded and unsigned.
pub fn sci(x: f64) -> String {
    let plain = format!("{x:.3e}");
    match plain.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(rest) => ('-', rest),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => plain,
    }
}

fn levels(field: &impl GridField) -> (i64, i64) {
    let grid = field.time_grid();
    (-(grid.delay_steps as i64), grid.steps as i64)
}

pub fn solution_csv(field: &impl GridField, out: &mut impl Write) -> io::Result<()> {
    let mesh = field.mesh();
    let grid = field.time_grid();
    write!(out, "t\\x")?;
    for &x in &mesh.nodes {
        write!(out, ",{x}")?;
    }
    writeln!(out)?;
    let (first, last) = levels(field);
    for n in first..=last {
        write!(out, "{}", grid.time(n))?;
        for i in 0..=mesh.n {
            write!(out, ",{}", field.value(n, i))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn solution_binary(field: &impl GridField, out: &mut impl Write) -> io::Result<()> {
    let mesh = field.mesh();
    let grid = field.time_grid();
    let (first, last) = levels(field);
    let rows = (last - first + 1) as u64;
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&[BINARY_VERSION])?;
    out.write_all(&rows.to_le_bytes())?;
    out.write_all(&((mesh.n + 1) as u64).to_le_bytes())?;
    out.write_all(&first.to_le_bytes())?;
    out.write_all(&grid.dt.to_le_bytes())?;
    for &x in &mesh.nodes {
        out.write_all(&x.to_le_bytes())?;
    }
    for n in first..=last {
        for i in 0..=mesh.n {
            out.write_all(&field.value(n, i).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn mesh_csv(mesh: &SpatialMesh, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "i,x,h")?;
    for (i, &x) in mesh.nodes.iter().enumerate() {
        if i == 0 {
            writeln!(out, "0,{x},")?;
        } else {
            writeln!(out, "{i},{x},{}", mesh.step(i))?;
        }
    }
    Ok(())
}

fn table_header(table: &ConvergenceTable) -> String {
    format!(
        "{} scheme, {}",
        scheme_name(table),
        if table.extrapolated {
            "extrapolated"
        } else {
            "un-extrapolated"
        }
    )
}

fn scheme_name(table: &ConvergenceTable) -> &'static str {
    use spdd_core::scheme::SchemeKind;
    match table.scheme {
        SchemeKind::Hybrid => "hybrid",
        SchemeKind::UpwindShishkin => "upwind-shishkin",
        SchemeKind::UpwindUniform => "upwind-uniform",
    }
}

pub fn table_csv(table: &ConvergenceTable, out: &mut impl Write) -> io::Result<()> {
    write!(out, "epsilon")?;
    for &n in &table.n_list {
        write!(out, ",E(N={n}),q(N={n})")?;
    }
    writeln!(out)?;
    for (ei, &eps) in table.eps_list.iter().enumerate() {
        write!(out, "{}", sci(eps))?;
        for ni in 0..table.n_list.len() {
            let cell = table.cell(ei, ni);
            write!(out, ",{}", sci(cell.error))?;
            match cell.q {
                Some(q) => write!(out, ",{}", sci(q))?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    write!(out, "uniform")?;
    for ni in 0..table.n_list.len() {
        write!(out, ",{}", sci(table.footer_error(ni)))?;
        match table.footer_order(ni) {
            Some(q) => write!(out, ",{}", sci(q))?,
            None => write!(out, ",")?,
        }
    }
    writeln!(out)?;
    Ok(())
}

pub fn table_markdown(table: &ConvergenceTable, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "# {}", table_header(table))?;
    writeln!(out)?;
    write!(out, "| epsilon |")?;
    for &n in &table.n_list {
        write!(out, " N={n} |")?;
    }
    writeln!(out)?;
    write!(out, "| --- |")?;
    for _ in &table.n_list {
        write!(out, " --- |")?;
    }
    writeln!(out)?;
    for (ei, &eps) in table.eps_list.iter().enumerate() {
        write!(out, "| {} |", sci(eps))?;
        for ni in 0..table.n_list.len() {
            let cell = table.cell(ei, ni);
            match cell.q {
                Some(q) => write!(out, " {}<br>{} |", sci(cell.error), sci(q))?,
                None => write!(out, " {} |", sci(cell.error))?,
            }
        }
        writeln!(out)?;
    }
    write!(out, "| E^N (q^N) |")?;
    for ni in 0..table.n_list.len() {
        match table.footer_order(ni) {
            Some(q) => write!(out, " {}<br>{} |", sci(table.footer_error(ni)), sci(q))?,
            None => write!(out, " {} |", sci(table.footer_error(ni)))?,
        }
    }
    writeln!(out)?;
    Ok(())
}

/// Stacked comparison: same sweep under several schemes, one block per
/// scheme with a leading scheme column.
pub fn compare_csv(tables: &[ConvergenceTable], out: &mut impl Write) -> io::Result<()> {
    let first = &tables[0];
    write!(out, "scheme,epsilon")?;
    for &n in &first.n_list {
        write!(out, ",E(N={n}),q(N={n})")?;
    }
    writeln!(out)?;
    for table in tables {
        let name = scheme_name(table);
        for (ei, &eps) in table.eps_list.iter().enumerate() {
            write!(out, "{name},{}", sci(eps))?;
            for ni in 0..table.n_list.len() {
                let cell = table.cell(ei, ni);
                write!(out, ",{}", sci(cell.error))?;
                match cell.q {
                    Some(q) => write!(out, ",{}", sci(q))?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        write!(out, "{name},uniform")?;
        for ni in 0..table.n_list.len() {
            write!(out, ",{}", sci(table.footer_error(ni)))?;
            match table.footer_order(ni) {
                Some(q) => write!(out, ",{}", sci(q))?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn compare_markdown(tables: &[ConvergenceTable], out: &mut impl Write) -> io::Result<()> {
    for (i, table) in tables.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        table_markdown(table, out)?;
    }
    Ok(())
}

pub fn compare_json(tables: &[ConvergenceTable]) -> serde_json::Value {
    serde_json::Value::Array(tables.iter().map(table_json).collect())
}

pub fn table_json(table: &ConvergenceTable) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = table
        .eps_list
        .iter()
        .enumerate()
        .map(|(ei, &eps)| {
            let cells: Vec<serde_json::Value> = (0..table.n_list.len())
                .map(|ni| {
                    let cell = table.cell(ei, ni);
                    serde_json::json!({
                        "n": cell.n,
                        "m": cell.m,
                        "error": cell.error,
                        "q": cell.q,
                        "solves": cell.solves,
                        "sign_violations": cell.sign_violations,
                        "stability_slack": cell.stability_slack,
                    })
                })
                .collect();
            serde_json::json!({ "epsilon": eps, "cells": cells })
        })
        .collect();
    let footer: Vec<serde_json::Value> = (0..table.n_list.len())
        .map(|ni| {
            serde_json::json!({
                "n": table.n_list[ni],
                "error": table.footer_error(ni),
                "q": table.footer_order(ni),
            })
        })
        .collect();
    serde_json::json!({
        "scheme": scheme_name(table),
        "extrapolated": table.extrapolated,
        "n_list": table.n_list,
        "eps_list": table.eps_list,
        "rows": rows,
        "footer": footer,
    })
}
