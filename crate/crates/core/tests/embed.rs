use ndarray::{s, Array1, Array2};
use nrdr_core::datasets::{gen_ring, gen_strip, PointCloud};
use nrdr_core::diagnostics::{intrinsic_correlation, pearson, redundancy_scores, spearman};
use nrdr_core::eigensolve::{deflated_operator, top_eigenpair, EigenConfig};
use nrdr_core::embed::{
    dsilva_select, nonredundant_embed, regression_residual, sequential_regression_embed,
    spectral_embed, EmbedConfig, Embedding, Method,
};
use nrdr_core::kernels::{kernel_lem, knn_graph, Metric};
use nrdr_core::smoother::{bandwidth, build_nw_smoother};
use nrdr_core::{Error, KernelMatrix};
use rand::{Rng, SeedableRng};

fn strip_kernel(n: usize) -> (PointCloud, KernelMatrix) {
    let cloud = gen_strip(n, 2.5, 1.0, 11).unwrap();
    let g = knn_graph(&cloud, 10, Metric::Euclidean).unwrap();
    (cloud.clone(), kernel_lem(&g, None).unwrap())
}

fn cfg(d: usize) -> EmbedConfig {
    EmbedConfig {
        d,
        ..EmbedConfig::default()
    }
}

/// Normalized residual of the least-squares fit `y ≈ a x² + b x + c`.
fn quadratic_fit_residual(x: &Array1<f64>, y: &Array1<f64>) -> f64 {
    let design = nalgebra::DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let rhs = nalgebra::DVector::from_iterator(y.len(), y.iter().copied());
    let coef = design.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
    let fit = design * coef;
    let mean = y.mean().unwrap();
    let err: f64 = y.iter().zip(fit.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let var: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    (err / var).sqrt()
}

fn assert_contract(emb: &Embedding) {
    let n = emb.projections.nrows() as f64;
    for f in emb.projections.columns() {
        assert!(f.sum().abs() <= 1e-6 * n.sqrt());
        assert!((f.dot(&f).sqrt() - 1.0).abs() <= 1e-8);
    }
    assert!(emb.redundancy_scores.iter().all(|s| (0.0..=1.0).contains(s)));
}

#[test]
fn strip_baseline_repeats_the_long_direction() {
    let (cloud, k) = strip_kernel(3000);
    let emb = spectral_embed(&k, &cfg(3)).unwrap();
    assert_contract(&emb);
    assert!(emb.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    let f1 = emb.projections.column(0).to_owned();
    let f2 = emb.projections.column(1).to_owned();
    assert!(quadratic_fit_residual(&f1, &f2) < 0.1);

    let intr = cloud.intrinsic.unwrap();
    for (k1, f) in [(1.0, &f1), (2.0, &f2)] {
        let mode = intr.column(0).mapv(|x| (k1 * std::f64::consts::PI * x / 2.5).cos());
        assert!(pearson(f.view(), intr.column(1)).abs() < 0.15);
        assert!(pearson(f.view(), mode.view()).abs() > 0.9);
    }
    assert!(spearman(f1.view(), intr.column(0)).abs() > 0.9);
}

#[test]
fn strip_nonredundant_captures_the_short_direction() {
    let (cloud, k) = strip_kernel(3000);
    let emb = nonredundant_embed(&k, &cfg(2)).unwrap();
    assert_contract(&emb);
    assert_eq!(emb.method, Method::Nonredundant);
    let corr = intrinsic_correlation(&emb, &cloud).unwrap();
    assert!(corr[[1, 1]] > 0.8, "{corr}");
    assert!(emb.redundancy_scores[1] >= 0.9);
    let step = &emb.steps[0];
    assert!(step.truncated_residual <= 1e-6);
    assert!(step.rank >= 1 && step.frobenius_capture > 0.0 && step.frobenius_capture <= 1.0 + 1e-12);

    let base = spectral_embed(&k, &cfg(2)).unwrap();
    let lowest = emb.redundancy_scores[1..].iter().fold(1.0f64, |a, &b| a.min(b));
    let highest = base.redundancy_scores[1..].iter().fold(0.0f64, |a, &b| a.max(b));
    assert!(lowest > highest);
}

#[test]
fn ring_third_projection() {
    let cloud = gen_ring(2000, 5.0, 1.0, 3).unwrap();
    let k = kernel_lem(&knn_graph(&cloud, 10, Metric::Euclidean).unwrap(), None).unwrap();
    let base = spectral_embed(&k, &cfg(3)).unwrap();
    assert!(base.redundancy_scores[2] < 0.5);
    let emb = nonredundant_embed(&k, &cfg(3)).unwrap();
    assert_contract(&emb);
    assert!(emb.redundancy_scores[2] >= 0.9);
    let corr = intrinsic_correlation(&emb, &cloud).unwrap();
    assert!(corr[[2, 1]] > corr[[2, 0]], "{corr}");
    for s in &emb.steps {
        assert!(s.truncated_residual <= 1e-6);
    }
}

#[test]
fn single_projection_methods_agree() {
    let (cloud, k) = strip_kernel(400);
    let a = spectral_embed(&k, &cfg(1)).unwrap();
    let b = nonredundant_embed(&k, &cfg(1)).unwrap();
    assert_eq!(a.projections, b.projections);
    assert_eq!(a.eigenvalues, b.eigenvalues);

    let op = deflated_operator(&k, None, true).unwrap();
    let pair = top_eigenpair(&op, &EigenConfig::default()).unwrap();
    assert_eq!(pair.vector, a.projections.column(0));

    let build = |c: &PointCloud| kernel_lem(&knn_graph(c, 10, Metric::Euclidean)?, None);
    let sr = sequential_regression_embed(&cloud, &build, &cfg(2)).unwrap();
    assert_eq!(sr.projections.column(0), a.projections.column(0));
    assert_contract(&sr);
}

#[test]
fn regression_residual_is_nearly_unpredictable() {
    let (cloud, k) = strip_kernel(1500);
    let f1 = spectral_embed(&k, &cfg(1)).unwrap().projections;
    let resid = regression_residual(f1.view(), cloud.points.view(), 0.3, 1500).unwrap();
    let h = bandwidth(f1.view(), 0.3).unwrap();
    let p = build_nw_smoother(f1.view(), h, 1500).unwrap();
    let predictable = |x: &Array2<f64>| {
        let mut num = 0.0;
        let mut out = Array1::zeros(x.nrows());
        for c in x.columns() {
            p.matrix.mul_vec(c, out.view_mut());
            num += out.dot(&out);
        }
        (num / x.iter().map(|v| v * v).sum::<f64>()).sqrt()
    };
    let centered = &cloud.points - &cloud.points.mean_axis(ndarray::Axis(0)).unwrap();
    let after = predictable(&resid);
    let before = predictable(&centered);
    assert!(after < 0.2 && after < 0.25 * before, "{after} vs {before}");
}

fn unit_centered(v: Array1<f64>) -> Array1<f64> {
    let v = &v - v.mean().unwrap();
    let n = v.dot(&v).sqrt();
    v / n
}

fn synthetic(cols: Vec<Array1<f64>>) -> Embedding {
    let n = cols[0].len();
    let mut projections = Array2::zeros((n, cols.len()));
    for (i, c) in cols.iter().enumerate() {
        projections.column_mut(i).assign(c);
    }
    let config = EmbedConfig::default();
    let scores = redundancy_scores(projections.view(), &config.score).unwrap();
    Embedding {
        eigenvalues: vec![1.0; cols.len()],
        projections,
        redundancy_scores: scores,
        method: Method::Baseline,
        config,
        steps: Vec::new(),
        notices: Vec::new(),
    }
}

#[test]
fn dsilva_discards_constructed_redundancy() {
    let n = 1500;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let u: Array1<f64> = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
    let v: Array1<f64> = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
    let f1 = unit_centered(u.clone());
    let f2 = unit_centered(v);
    let f3 = unit_centered(u.mapv(|x| 2.0 * x * x - 1.0));
    let emb = synthetic(vec![f1, f2, f3]);
    let sel = dsilva_select(&emb, 3, 0.5).unwrap();
    assert_eq!(sel.d(), 2);
    assert_eq!(sel.projections.column(1), emb.projections.column(1));
    assert_eq!(sel.method, Method::Dsilva);
    assert_eq!(sel.notices.len(), 1);

    let w: Array1<f64> = Array1::from_shape_fn(n, |_| rng.random::<f64>());
    let indep = synthetic(vec![
        emb.projections.column(0).to_owned(),
        emb.projections.column(1).to_owned(),
        unit_centered(w),
    ]);
    assert_eq!(dsilva_select(&indep, 3, 0.5).unwrap().d(), 3);
    assert!(dsilva_select(&indep, 4, 0.5).is_err());
}

#[test]
fn dsilva_on_strip_keeps_the_short_direction() {
    let (cloud, k) = strip_kernel(3000);
    let base = spectral_embed(&k, &cfg(4)).unwrap();
    let sel = dsilva_select(&base, 2, 0.5).unwrap();
    assert_eq!(sel.d(), 2);
    let corr = intrinsic_correlation(&sel, &cloud).unwrap();
    assert!(corr[[0, 0]] > 0.9 && corr[[1, 1]] > 0.8, "{corr}");
}

#[test]
fn exhausted_kernel_truncates_with_notice() {
    // A one-neighbor smoother is the identity, whose row space is everything.
    let (_, k) = strip_kernel(40);
    let emb = nonredundant_embed(&k, &EmbedConfig { neighbor_cap: Some(1), ..cfg(3) }).unwrap();
    assert_eq!(emb.d(), 1);
    assert_eq!(emb.notices.len(), 1);
}

#[test]
fn parameter_and_convergence_errors() {
    let (_, k) = strip_kernel(200);
    assert!(matches!(spectral_embed(&k, &cfg(200)), Err(Error::Parameter(_))));
    assert!(matches!(spectral_embed(&k, &cfg(0)), Err(Error::Parameter(_))));
    let bad_alpha = EmbedConfig { alpha: 1.5, ..cfg(2) };
    assert!(matches!(nonredundant_embed(&k, &bad_alpha), Err(Error::Parameter(_))));

    let mut starved = cfg(2);
    starved.eigen.max_iter = 3;
    starved.eigen.krylov_dim = Some(3);
    match nonredundant_embed(&k, &starved) {
        Err(Error::Convergence { step, .. }) => assert_eq!(step, Some(1)),
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn embedding_serializes() {
    let (_, k) = strip_kernel(300);
    let emb = nonredundant_embed(&k, &cfg(2)).unwrap();
    let json = serde_json::to_string(&emb).unwrap();
    let back: Embedding = serde_json::from_str(&json).unwrap();
    assert_eq!(back, emb);
    assert_eq!(back.projections.slice(s![.., 0]), emb.projections.column(0));
}
