use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Name and version stamped into every artifact.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Shortest round-trip decimal form, so equal values always print equally.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Writes a CSV file whose first line is a `#` comment holding the version
/// and the write time. Everything below it depends only on `rows`.
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("# {VERSION}, written at unix time {secs}\n");
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Config(format!("csv row has {} cells, header has {}", row.len(), header.len())));
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

/// One row per lattice node: index, coordinates, interior flag and the value
/// of each column.
pub fn write_grid_csv(path: &Path, columns: &[(&str, &GridFunction)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Config("no columns to write".into()));
    };
    for (_, f) in &columns[1..] {
        first.same_lattice(f)?;
    }
    let lat = first.lattice().clone();
    let mut header = vec!["node".to_string()];
    header.extend((0..lat.n()).map(|k| format!("x{k}")));
    header.push("interior".into());
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    let rows = (0..lat.len()).map(|i| {
        let mut row = vec![i.to_string()];
        row.extend(lat.coords(i).into_iter().map(num));
        row.push(if lat.is_interior(i) { "1" } else { "0" }.into());
        row.extend(columns.iter().map(|(_, f)| num(f.values()[i])));
        row
    });
    write_csv(path, &header, rows)
}

/// Reads a file written by [`write_csv`], skipping comment rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines.next().map(|l| l.split(',').map(str::to_string).collect()).unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Ok((header, rows))
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    version: &'static str,
    experiment: &'a str,
    config: &'a C,
    result: &'a R,
}

/// Pretty JSON report embedding the resolved config and the version string.
pub fn write_report<C: Serialize, R: Serialize>(path: &Path, experiment: &str, config: &C, result: &R) -> Result<()> {
    let report = Report { version: VERSION, experiment, config, result };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;
    use std::sync::Arc;

    #[test]
    fn csv_body_is_stable() {
        let dir = std::env::temp_dir().join(format!("wolfflab-io-{}", std::process::id()));
        let lat = Arc::new(Lattice::build(&[0.0, 0.0], &[1.0, 1.0], 0.25, 2).unwrap());
        let f = GridFunction::from_fn(lat, |x| x[0] - 0.1 * x[1], 0.0);
        let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
        write_grid_csv(&a, &[("u", &f)]).unwrap();
        write_grid_csv(&b, &[("u", &f)]).unwrap();
        let body = |p: &Path| fs::read_to_string(p).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(body(&a), body(&b));
        let (header, rows) = read_csv(&a).unwrap();
        assert_eq!(header, ["node", "x0", "x1", "interior", "u"]);
        assert_eq!(rows.len(), f.values().len());
        let v: f64 = rows[7][4].parse().unwrap();
        assert_eq!(v, f.values()[7]);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let p = std::env::temp_dir().join("wolfflab-ragged.csv");
        assert!(write_csv(&p, &["a".into(), "b".into()], vec![vec!["1".into()]]).is_err());
    }
}
