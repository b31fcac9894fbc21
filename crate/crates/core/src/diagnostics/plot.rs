//! CSV and JSON output for external plotting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::intrinsic_correlation;
use crate::datasets::PointCloud;
use crate::embed::{EmbedConfig, Embedding, Method};
use crate::error::{Error, Result};

/// Contents of the JSON file written next to the plot CSV.
#[derive(Debug, Clone, Serialize)]
pub struct PlotSummary {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub eigenvalues: Vec<f64>,
    pub redundancy_scores: Vec<f64>,
    /// Rows are projections, columns intrinsic coordinates.
    pub intrinsic_correlation: Option<Vec<Vec<f64>>>,
    pub config: EmbedConfig,
    pub notices: Vec<String>,
}

/// Writes `x*, i*, f*` columns (and `label` when present) to `csv_path`
/// and a [`PlotSummary`] to the same path with a `.json` extension.
/// Returns the JSON path.
pub fn emit_plot_data(emb: &Embedding, cloud: &PointCloud, csv_path: &Path) -> Result<PathBuf> {
    let n = cloud.len();
    if emb.projections.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: emb.projections.nrows(),
        });
    }
    let intr = cloud.intrinsic.as_ref();
    let mut header: Vec<String> = (0..cloud.dim()).map(|j| format!("x{j}")).collect();
    header.extend((0..cloud.intrinsic_dim()).map(|j| format!("i{j}")));
    header.extend((0..emb.d()).map(|j| format!("f{j}")));
    if cloud.labels.is_some() {
        header.push("label".into());
    }

    let mut out = BufWriter::new(File::create(csv_path)?);
    writeln!(out, "{}", header.join(","))?;
    for r in 0..n {
        let mut row: Vec<String> = cloud.points.row(r).iter().map(|v| format!("{v:?}")).collect();
        if let Some(m) = intr {
            row.extend(m.row(r).iter().map(|v| format!("{v:?}")));
        }
        row.extend(emb.projections.row(r).iter().map(|v| format!("{v:?}")));
        if let Some(labels) = &cloud.labels {
            row.push(labels[r].to_string());
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;

    let corr = intr
        .map(|_| intrinsic_correlation(emb, cloud))
        .transpose()?
        .map(|m| m.outer_iter().map(|r| r.to_vec()).collect());
    let summary = PlotSummary {
        method: emb.method,
        n,
        d: emb.d(),
        eigenvalues: emb.eigenvalues.clone(),
        redundancy_scores: emb.redundancy_scores.clone(),
        intrinsic_correlation: corr,
        config: emb.config,
        notices: emb.notices.clone(),
    };
    let json_path = csv_path.with_extension("json");
    let file = BufWriter::new(File::create(&json_path)?);
    serde_json::to_writer_pretty(file, &summary)?;
    Ok(json_path)
}
