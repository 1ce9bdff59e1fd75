//! File emission: region vertex CSVs (round-trippable), simulation
//! tables and JSON summaries. Floats print in Rust's shortest
//! round-trip form, so re-parsing reproduces bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use stabreg::region::{RegionVertexSet, VertexLabel};

/// `mu_1..mu_n, policy, alpha` with the fraction vector `;`-joined.
pub fn region_to_csv(region: &RegionVertexSet) -> String {
    let mut out = String::new();
    let cols: Vec<String> = (1..=region.dim).map(|i| format!("mu_{i}")).collect();
    let _ = writeln!(out, "{},policy,alpha", cols.join(","));
    for (point, label) in &region.vertices {
        let coords: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        let alpha: Vec<String> = label.alpha.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(
            out,
            "{},{},{}",
            coords.join(","),
            label.policy,
            alpha.join(";")
        );
    }
    out
}

/// Inverse of [`region_to_csv`].
pub fn region_from_csv(text: &str) -> anyhow::Result<RegionVertexSet> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("empty region file"))?;
    let dim = header.split(',').filter(|c| c.starts_with("mu_")).count();
    anyhow::ensure!(dim >= 1, "region header carries no mu_<i> columns");
    let mut region = RegionVertexSet::new(dim);
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(
            fields.len() == dim + 2,
            "line {}: expected {} fields, got {}",
            lineno + 2,
            dim + 2,
            fields.len()
        );
        let point: Vec<f64> = fields[..dim]
            .iter()
            .map(|f| f.parse())
            .collect::<Result<_, _>>()?;
        let alpha: Vec<f64> = if fields[dim + 1].is_empty() {
            Vec::new()
        } else {
            fields[dim + 1]
                .split(';')
                .map(|f| f.parse())
                .collect::<Result<_, _>>()?
        };
        region.push(
            point,
            VertexLabel {
                policy: fields[dim].to_string(),
                alpha,
            },
        );
    }
    Ok(region)
}

pub fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write(path, &format!("{}\n", serde_json::to_string_pretty(value)?))
}
