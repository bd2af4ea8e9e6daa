//! Power-law fits of one results column against another.

use tfim_core::{fit_power_law, FitPoint, ScalingFit};

use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

/// Collects (x, y, σ) from a table, skipping rows with empty or non-numeric cells.
pub fn fit_points(table: &Table, x: &str, y: &str, err: Option<&str>) -> Result<Vec<FitPoint>> {
    let col = |name: &str| table.values(name).ok_or_else(|| CliError::Config(format!("--x/--y/--err: no column named {name:?}")));
    let xs = col(x)?;
    let ys = col(y)?;
    let es = match err {
        Some(e) => col(e)?,
        None => vec![Some(0.0); xs.len()],
    };
    Ok(xs
        .iter()
        .zip(&ys)
        .zip(&es)
        .filter_map(|((x, y), e)| Some(FitPoint::new((*x)?, (*y)?, (*e)?)))
        .collect())
}

pub fn fit_table(table: &Table, x: &str, y: &str, err: Option<&str>) -> Result<(ScalingFit, Table)> {
    let points = fit_points(table, x, y, err)?;
    let f = fit_power_law(&points).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = Table::new(
        ["x", "y", "points", "amplitude", "exponent", "exponent_error", "residual", "spans_decade"].map(String::from).to_vec(),
    );
    out.push(vec![
        Cell::text(x),
        Cell::text(y),
        Cell::Int(points.len() as i64),
        Cell::Num(f.amplitude),
        Cell::Num(f.exponent),
        Cell::Num(f.exponent_error),
        Cell::Num(f.residual),
        Cell::Bool(f.spans_decade),
    ]);
    Ok((f, out))
}
