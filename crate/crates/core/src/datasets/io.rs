//! CSV persistence. Header is `x0,..,x{D-1}` followed by optional intrinsic
//! columns `i0,..` and an optional `label` column. Columns named `f<k>`
//! hold embedding projections written by plot-data export; [`load_csv`]
//! skips them and [`load_embedding_csv`] returns them.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    Point(usize),
    Intrinsic(usize),
    Label,
    Projection(usize),
}

fn parse_header(name: &str) -> Option<Column> {
    if name == "label" {
        return Some(Column::Label);
    }
    let (prefix, rest) = name.split_at(name.char_indices().nth(1)?.0);
    let idx: usize = rest.parse().ok()?;
    match prefix {
        "x" => Some(Column::Point(idx)),
        "i" => Some(Column::Intrinsic(idx)),
        "f" => Some(Column::Projection(idx)),
        _ => None,
    }
}

pub fn save_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut header: Vec<String> = (0..cloud.dim()).map(|k| format!("x{k}")).collect();
    header.extend((0..cloud.intrinsic_dim()).map(|k| format!("i{k}")));
    if cloud.labels.is_some() {
        header.push("label".into());
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    let mut fields = Vec::with_capacity(header.len());
    for i in 0..cloud.len() {
        fields.clear();
        fields.extend(cloud.points.row(i).iter().map(|v| format!("{v:?}")));
        if let Some(intr) = &cloud.intrinsic {
            fields.extend(intr.row(i).iter().map(|v| format!("{v:?}")));
        }
        if let Some(labels) = &cloud.labels {
            fields.push(labels[i].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    Ok(read_table(path.as_ref())?.0)
}

/// Point cloud plus the `N × d` matrix of `f<k>` columns (`d` may be 0).
pub fn load_embedding_csv(path: impl AsRef<Path>) -> Result<(PointCloud, Array2<f64>)> {
    read_table(path.as_ref())
}

fn read_table(path: &Path) -> Result<(PointCloud, Array2<f64>)> {
    let fmt = |line: u64, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => fmt(1, format!("{other:?}")),
        })?;

    let header = reader
        .headers()
        .map_err(|e| fmt(1, e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(fmt(1, "empty file".into()));
    }
    let columns = header
        .iter()
        .map(|h| parse_header(h).ok_or_else(|| fmt(1, format!("unrecognized column `{h}`"))))
        .collect::<Result<Vec<_>>>()?;
    let count = |pred: fn(&Column) -> bool| columns.iter().filter(|c| pred(c)).count();
    let d = count(|c| matches!(c, Column::Point(_)));
    let m = count(|c| matches!(c, Column::Intrinsic(_)));
    let p = count(|c| matches!(c, Column::Projection(_)));
    let has_label = count(|c| matches!(c, Column::Label)) > 0;
    if d == 0 {
        return Err(fmt(1, "no point columns (x0, x1, ...)".into()));
    }
    for (k, col) in columns.iter().enumerate() {
        let bad = match *col {
            Column::Point(i) => i >= d,
            Column::Intrinsic(i) => i >= m,
            Column::Projection(i) => i >= p,
            Column::Label => false,
        };
        if bad {
            return Err(fmt(1, format!("column `{}` is out of sequence", &header[k])));
        }
    }

    let mut points = Vec::new();
    let mut intrinsic = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    let mut row_pts = vec![0.0; d];
    let mut row_intr = vec![0.0; m];
    let mut projections = Vec::new();
    let mut row_proj = vec![0.0; p];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            fmt(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns.len() {
            return Err(fmt(
                line,
                format!("expected {} columns, found {}", columns.len(), record.len()),
            ));
        }
        for (field, col) in record.iter().zip(&columns) {
            match *col {
                Column::Point(i) | Column::Intrinsic(i) | Column::Projection(i) => {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| fmt(line, format!("non-numeric value `{field}`")))?;
                    if !v.is_finite() {
                        return Err(fmt(line, format!("non-finite value `{field}`")));
                    }
                    match col {
                        Column::Point(_) => row_pts[i] = v,
                        Column::Intrinsic(_) => row_intr[i] = v,
                        _ => row_proj[i] = v,
                    }
                }
                Column::Label => labels.push(
                    field
                        .parse::<i64>()
                        .map_err(|_| fmt(line, format!("non-integer label `{field}`")))?,
                ),
            }
        }
        points.extend_from_slice(&row_pts);
        projections.extend_from_slice(&row_proj);
        intrinsic.extend_from_slice(&row_intr);
        n += 1;
    }
    if n < 2 {
        return Err(fmt(n as u64 + 2, format!("expected at least 2 data rows, found {n}")));
    }
    let points = Array2::from_shape_vec((n, d), points).expect("shape");
    let intrinsic = (m > 0).then(|| Array2::from_shape_vec((n, m), intrinsic).expect("shape"));
    let projections = Array2::from_shape_vec((n, p), projections).expect("shape");
    let cloud = PointCloud::new(points, intrinsic, 0)?;
    let cloud = if has_label { cloud.with_labels(labels)? } else { cloud };
    Ok((cloud, projections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_ring, gen_strip};

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cloud = gen_strip(100, 1.0, 1.0, 0).unwrap();
        let p = dir.path().join("strip.csv");
        save_csv(&cloud, &p).unwrap();
        let back = load_csv(&p).unwrap();
        let diff = (&back.points - &cloud.points).mapv(f64::abs);
        assert!(diff.iter().all(|&v| v < 1e-12));
        assert_eq!(back.intrinsic, cloud.intrinsic);
        assert_eq!(back.seed, 0);

        let ring = gen_ring(20, 5.0, 1.0, 1).unwrap().with_labels((0..20).collect()).unwrap();
        save_csv(&ring, &p).unwrap();
        let back = load_csv(&p).unwrap();
        assert_eq!(back.points, ring.points);
        assert_eq!(back.labels, ring.labels);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("x0,x1,x2,i0,i1,label\n"));
    }

    #[test]
    fn empty_file_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "empty.csv", "");
        assert!(matches!(load_csv(&p), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn missing_column_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.csv", "x0,x1\n1,2\n3,4\n5\n");
        match load_csv(&p) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("expected 2 columns"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = write(&dir, "nan.csv", "x0,x1\n1,2\n3,abc\n");
        assert!(matches!(load_csv(&p), Err(Error::Format { line: 3, .. })));
        let p = write(&dir, "hdr.csv", "x0,y1\n1,2\n3,4\n");
        assert!(matches!(load_csv(&p), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn projection_columns_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "plot.csv", "x0,i0,f0\n1,2,9\n3,4,9\n");
        let c = load_csv(&p).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(c.intrinsic_dim(), 1);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_csv("/nonexistent/nope.csv"), Err(Error::Io(_))));
    }
}
