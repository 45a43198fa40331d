//! Whitespace-separated grid files: a `# u v name…` header, then one node per
//! line with u as the outer index. Values carry 17 significant digits so they
//! read back bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use pnmc_core::pde::GridField;
use pnmc_core::surface::ParamDomain;

use crate::error::CliError;

/// Columns of values on a grid, one `Vec` per column, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub domain: ParamDomain,
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl GridTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|k| self.data[k].as_slice())
    }

    pub fn field(&self, name: &str) -> Result<GridField, CliError> {
        let values = self
            .column(name)
            .ok_or_else(|| CliError::Validation(format!("missing column '{name}'")))?
            .to_vec();
        let d = &self.domain;
        Ok(GridField::new(values, d.n_u, d.n_v, (d.h_u(), d.h_v()), (d.u_min, d.v_min))?)
    }
}

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_grid(domain: &ParamDomain, columns: &[&str], data: &[Vec<f64>]) -> String {
    let n = domain.n_u * domain.n_v;
    assert!(data.len() == columns.len() && data.iter().all(|c| c.len() == n), "grid columns out of shape");
    let mut s = String::with_capacity(n * 24 * (columns.len() + 2) + 64);
    s.push_str("# u v");
    for c in columns {
        s.push(' ');
        s.push_str(c);
    }
    s.push('\n');
    for (k, (_, _, u, v)) in domain.nodes().into_iter().enumerate() {
        s.push_str(&format_value(u));
        s.push(' ');
        s.push_str(&format_value(v));
        for col in data {
            s.push(' ');
            s.push_str(&format_value(col[k]));
        }
        s.push('\n');
    }
    s
}

fn bad(what: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("grid file: {what}"))
}

pub fn parse_grid(text: &str) -> Result<GridTable, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let names: Vec<&str> = header.strip_prefix('#').ok_or_else(|| bad("missing '#' header"))?.split_whitespace().collect();
    if names.len() < 3 || names[0] != "u" || names[1] != "v" {
        return Err(bad("header must read '# u v name…'"));
    }
    let width = names.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", k + 1)))?;
        if row.len() != width {
            return Err(bad(format!("row {} has {} values, expected {width}", k + 1, row.len())));
        }
        rows.push(row);
    }
    let first_u = rows.first().ok_or_else(|| bad("no data rows"))?[0];
    let n_v = rows.iter().take_while(|r| r[0] == first_u).count();
    if n_v == 0 || rows.len() % n_v != 0 {
        return Err(bad("rows do not form a rectangular grid"));
    }
    let n_u = rows.len() / n_v;
    let us: Vec<f64> = (0..n_u).map(|i| rows[i * n_v][0]).collect();
    let vs: Vec<f64> = rows[..n_v].iter().map(|r| r[1]).collect();
    let domain = ParamDomain::new(us[0], us[n_u - 1], vs[0], vs[n_v - 1], n_u, n_v).map_err(bad)?;
    let tol = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = (k / n_v, k % n_v);
        if r[0] != us[i] || r[1] != vs[j] || !tol(r[0], domain.u_at(i)) || !tol(r[1], domain.v_at(j)) {
            return Err(bad(format!("node {k} is off the uniform grid (u outer, v inner)")));
        }
    }
    let data = (2..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    Ok(GridTable { domain, columns: names[2..].iter().map(|s| s.to_string()).collect(), data })
}

pub fn read_grid(path: &Path) -> Result<GridTable, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_grid(&text)
}

/// Renders a JSON value with a trailing newline.
pub fn json_text(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    let _ = writeln!(s);
    s
}
