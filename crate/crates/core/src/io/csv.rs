//! Dataset and truth CSV files.
//!
//! Dataset: header `k,u1..u{nu},[p1..p{np},]y1..y{ny}`, one row per sample,
//! values printed with 17 significant digits. Sampling period and counts
//! live in a `key=value` sidecar named `<file>.meta`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::fs::{read_text, sidecar, write_atomic};
use super::Dataset;
use crate::benchmarks::Truth;
use crate::error::{Error, Result};
use crate::metrics::Psd;

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn schema(path: &Path, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let (nu, ny, np) = (ds.nu(), ds.ny(), ds.np());
    let mut out = String::from("k");
    for i in 1..=nu {
        let _ = write!(out, ",u{i}");
    }
    for i in 1..=np {
        let _ = write!(out, ",p{i}");
    }
    for i in 1..=ny {
        let _ = write!(out, ",y{i}");
    }
    out.push('\n');
    for k in 0..ds.len() {
        let _ = write!(out, "{k}");
        let p = ds.p.as_ref().map_or(&[][..], |p| &p[k][..]);
        for &v in ds.u[k].iter().chain(p).chain(&ds.y[k]) {
            out.push(',');
            num(&mut out, v);
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())?;
    let mut meta = String::new();
    let _ = writeln!(meta, "ts={:.16e}", ds.ts);
    let _ = writeln!(meta, "n={}", ds.len());
    let _ = writeln!(meta, "nu={nu}\nny={ny}\nnp={np}");
    if let Some(s) = ds.seed {
        let _ = writeln!(meta, "seed={s}");
    }
    write_atomic(&sidecar(path, ".meta"), meta.as_bytes())
}

fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_text(path)?;
    let mut m = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| parse_err(path, i + 1, "expected key=value"))?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

/// Column indices grouped by prefix (`u`, `p`, `y`), checked to be `1..=n` in order.
fn columns(path: &Path, header: &str) -> Result<[Vec<usize>; 3]> {
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.first() != Some(&"k") {
        return Err(schema(path, "first column must be `k`"));
    }
    let mut cols: [Vec<usize>; 3] = Default::default();
    for (c, name) in names.iter().enumerate().skip(1) {
        let (slot, idx) = match name.split_at(1) {
            ("u", i) => (0, i),
            ("p", i) => (1, i),
            ("y", i) => (2, i),
            _ => return Err(schema(path, format!("unknown column `{name}`"))),
        };
        let i: usize = idx.parse().map_err(|_| schema(path, format!("bad column name `{name}`")))?;
        if i != cols[slot].len() + 1 {
            return Err(schema(path, format!("column `{name}` out of order")));
        }
        cols[slot].push(c);
    }
    if cols[2].is_empty() {
        return Err(schema(path, "no output (`y`) column"));
    }
    Ok(cols)
}

fn parse_rows(path: &Path, text: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(parse_err(path, i + 1, format!("expected {width} fields, found {}", fields.len())));
        }
        let k: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad sample index `{}`", fields[0])))?;
        if k != rows.len() {
            return Err(parse_err(path, i + 1, format!("sample index {k}, expected {}", rows.len())));
        }
        let mut row = Vec::with_capacity(width - 1);
        for f in &fields[1..] {
            let v: f64 = f.trim().parse().map_err(|_| parse_err(path, i + 1, format!("bad number `{f}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, i + 1, "non-finite value"));
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    let header = text.lines().next().ok_or_else(|| schema(path, "empty file"))?;
    let [cu, cp, cy] = columns(path, header)?;
    let width = 1 + cu.len() + cp.len() + cy.len();
    let rows = parse_rows(path, &text, width)?;

    let meta_path = sidecar(path, ".meta");
    let meta = read_meta(&meta_path)?;
    let ts: f64 = meta
        .get("ts")
        .ok_or_else(|| schema(&meta_path, "missing `ts`"))?
        .parse()
        .map_err(|_| schema(&meta_path, "bad `ts`"))?;
    for (key, want) in [("n", rows.len()), ("nu", cu.len()), ("ny", cy.len()), ("np", cp.len())] {
        if let Some(v) = meta.get(key) {
            if v.parse::<usize>().ok() != Some(want) {
                return Err(schema(&meta_path, format!("`{key}={v}` disagrees with the data ({want})")));
            }
        }
    }
    let pick = |cols: &[usize]| -> Vec<Vec<f64>> { rows.iter().map(|r| cols.iter().map(|&c| r[c - 1]).collect()).collect() };
    let p = (!cp.is_empty()).then(|| pick(&cp));
    let mut ds = Dataset::new(ts, pick(&cu), pick(&cy), p)?;
    if let Some(s) = meta.get("seed") {
        ds.seed = Some(s.parse().map_err(|_| schema(&meta_path, "bad `seed`"))?);
    }
    Ok(ds)
}

/// Header `k,y0,v,e`.
pub fn write_truth(truth: &Truth, path: &Path) -> Result<()> {
    let mut out = String::from("k,y0,v,e\n");
    for k in 0..truth.y0.len() {
        let _ = write!(out, "{k}");
        for v in [truth.y0[k], truth.v[k], truth.e[k]] {
            out.push(',');
            num(&mut out, v);
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let text = read_text(path)?;
    let header = text.lines().next().unwrap_or("");
    if header.trim() != "k,y0,v,e" {
        return Err(schema(path, "truth header must be `k,y0,v,e`"));
    }
    let rows = parse_rows(path, &text, 4)?;
    Ok(Truth {
        y0: rows.iter().map(|r| r[0]).collect(),
        v: rows.iter().map(|r| r[1]).collect(),
        e: rows.iter().map(|r| r[2]).collect(),
    })
}

/// Header `freq_hz,psd`.
pub fn write_psd(psd: &Psd, path: &Path) -> Result<()> {
    let mut out = String::from("freq_hz,psd\n");
    for (f, d) in psd.freq.iter().zip(&psd.density) {
        num(&mut out, *f);
        out.push(',');
        num(&mut out, *d);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}
