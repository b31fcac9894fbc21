use nrdr_core::datasets::{gen_ring, gen_strip, load_csv, load_embedding_csv};
use nrdr_core::diagnostics::{emit_plot_data, intrinsic_correlation, strip_oracle};
use nrdr_core::embed::{spectral_embed, EmbedConfig};
use nrdr_core::kernels::{kernel_lem, knn_graph, Metric};

fn baseline(l1: f64, n: usize, d: usize) -> (nrdr_core::PointCloud, nrdr_core::Embedding) {
    let cloud = gen_strip(n, l1, 1.0, 21).unwrap();
    let k = kernel_lem(&knn_graph(&cloud, 10, Metric::Euclidean).unwrap(), None).unwrap();
    let emb = spectral_embed(&k, &EmbedConfig { d, ..Default::default() }).unwrap();
    (cloud, emb)
}

#[test]
fn strip_oracle_on_long_strip() {
    let (cloud, emb) = baseline(2.5, 3000, 3);
    let report = strip_oracle(&emb, &cloud, 2.5, 1.0).unwrap();
    let modes: Vec<(usize, usize)> = report.matches.iter().map(|m| (m.k1, m.k2)).collect();
    assert_eq!(modes, vec![(1, 0), (2, 0), (0, 1)]);
    assert!(report.matches.iter().all(|m| m.confident));
    assert_eq!(report.expected_x1_modes, 2);
    assert!(report.leading_x1_modes_ok);
    assert!(report.quadratic_identity_residual.unwrap() < 0.15);

    let mut flipped = emb.clone();
    flipped.projections.mapv_inplace(|v| -v);
    assert_eq!(strip_oracle(&flipped, &cloud, 2.5, 1.0).unwrap().matches, report.matches);
}

#[test]
fn strip_oracle_on_short_strip() {
    let (cloud, emb) = baseline(1.5, 2000, 2);
    let report = strip_oracle(&emb, &cloud, 1.5, 1.0).unwrap();
    assert_eq!(report.expected_x1_modes, 1);
    assert!(report.leading_x1_modes_ok);
    assert_eq!((report.matches[1].k1, report.matches[1].k2), (0, 1));
    assert!(report.quadratic_identity_residual.is_none());
}

#[test]
fn strip_oracle_needs_planar_coordinates() {
    let ring = gen_ring(100, 5.0, 1.0, 0).unwrap();
    let solid = nrdr_core::PointCloud::new(ring.points.clone(), None, 0).unwrap();
    let (_, emb) = baseline(2.5, 100, 2);
    assert!(strip_oracle(&emb, &solid, 2.5, 1.0).is_err());
    assert!(strip_oracle(&emb, &ring, 0.0, 1.0).is_err());
}

#[test]
fn plot_data_round_trips() {
    let (cloud, emb) = baseline(2.5, 300, 3);
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("plot.csv");
    let json = emit_plot_data(&emb, &cloud, &csv).unwrap();

    let text = std::fs::read_to_string(&csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), cloud.dim() + cloud.intrinsic_dim() + emb.d());
    assert_eq!(text.lines().count(), 301);

    let back = load_csv(&csv).unwrap();
    assert_eq!(back.points, cloud.points);
    assert_eq!(back.intrinsic, cloud.intrinsic);
    let (_, projections) = load_embedding_csv(&csv).unwrap();
    assert_eq!(projections, emb.projections);

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let scores: Vec<f64> = serde_json::from_value(summary["redundancy_scores"].clone()).unwrap();
    let eigenvalues: Vec<f64> = serde_json::from_value(summary["eigenvalues"].clone()).unwrap();
    assert_eq!(scores, emb.redundancy_scores);
    assert_eq!(eigenvalues, emb.eigenvalues);
    let corr = intrinsic_correlation(&emb, &cloud).unwrap();
    assert_eq!(summary["intrinsic_correlation"][1][0].as_f64().unwrap(), corr[[1, 0]]);
}
