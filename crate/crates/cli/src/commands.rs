use std::path::{Path, PathBuf};

use ndarray::Array2;
use nrdr_core::datasets::{
    extract_patches, gen_ring, gen_sprites, gen_strip, gen_swiss_roll, load_csv, load_embedding_csv,
    save_csv, SpriteParams,
};
use nrdr_core::diagnostics::{
    emit_plot_data, projection_correlation, projection_pearson, redundancy_scores, strip_report,
    ScoreConfig, StripReport,
};
use nrdr_core::eigensolve::EigenConfig;
use nrdr_core::embed::{
    dsilva_select, nonredundant_embed, sequential_regression_embed, spectral_embed, EmbedConfig,
};
use nrdr_core::kernels::{kernel_isomap, kernel_lem, kernel_lle, knn_graph, Metric, DEFAULT_LLE_REG};
use nrdr_core::smoother::DEFAULT_SV_THRESHOLD;
use nrdr_core::{Embedding, KernelMatrix, PointCloud};
use serde::{Deserialize, Serialize};

use crate::args::{ClassifyArgs, DiagnoseArgs, EmbedArgs, GenerateArgs, KernelArg, Manifold, MethodArg};
use crate::classify::{classify, ClassifyOptions, ClassifyRow};
use crate::config::merge;
use crate::error::CliError;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_SCORE_ALPHA: f64 = 0.2;
/// Version of the `diagnose` JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required flag --{flag}")))
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn with_path<T>(path: &Path, r: nrdr_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        nrdr_core::Error::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other.into(),
    })
}

pub fn build_kernel(
    cloud: &PointCloud,
    kernel: KernelArg,
    k: usize,
    sigma: Option<f64>,
    lle_reg: Option<f64>,
) -> nrdr_core::Result<KernelMatrix> {
    let graph = knn_graph(cloud, k, Metric::Euclidean)?;
    match kernel {
        KernelArg::Lem => kernel_lem(&graph, sigma),
        KernelArg::Lle => kernel_lle(&graph, cloud, lle_reg.unwrap_or(DEFAULT_LLE_REG)),
        KernelArg::Isomap => kernel_isomap(&graph),
    }
}

/// Headerless CSV of pixel rows.
fn read_image(path: &Path) -> Result<Array2<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut pixels = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(CliError::Runtime(format!(
                "{}: line {}: ragged image row",
                path.display(),
                rows + 1
            )));
        }
        for field in record.iter() {
            pixels.push(field.parse::<f64>().map_err(|_| {
                CliError::Runtime(format!("{}: line {}: non-numeric pixel `{field}`", path.display(), rows + 1))
            })?);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| CliError::Runtime(format!("{}: empty image", path.display())))?;
    Ok(Array2::from_shape_vec((rows, width), pixels).expect("shape"))
}

pub fn generate(args: &GenerateArgs) -> Result<PointCloud, CliError> {
    let a = merge(args, args.config.as_deref())?;
    let n = a.n.unwrap_or(2000);
    let seed = a.seed.unwrap_or(0);
    let cloud = match required(a.manifold, "manifold")? {
        Manifold::Strip => gen_strip(n, a.l1.unwrap_or(2.5), a.l2.unwrap_or(1.0), seed)?,
        Manifold::Swissroll => gen_swiss_roll(n, a.turns.unwrap_or(1.5), a.height.unwrap_or(10.0), seed)?,
        Manifold::Ring => gen_ring(n, a.big_r.unwrap_or(5.0), a.small_r.unwrap_or(1.0), seed)?,
        Manifold::Patches => {
            let image = read_image(&required(a.image, "image")?)?;
            extract_patches(image.view(), a.patch.unwrap_or(7), a.stride.unwrap_or(4))?
        }
        Manifold::Sprites => {
            let defaults = SpriteParams::default();
            let params = SpriteParams {
                side: a.side.unwrap_or(defaults.side),
                noise: a.noise.unwrap_or(defaults.noise),
                ..defaults
            };
            gen_sprites(n, &params, seed)?
        }
    };
    Ok(cloud)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<PathBuf, CliError> {
    let a = merge(args, args.config.as_deref())?;
    let out = required(a.out.clone(), "out")?;
    let cloud = generate(&a)?;
    with_path(&out, save_csv(&cloud, &out))?;
    Ok(out)
}

/// Resolved embedding settings; also what `embed` records next to its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedPlan {
    pub method: MethodArg,
    pub kernel: KernelArg,
    pub k: usize,
    pub sigma: Option<f64>,
    pub lle_reg: Option<f64>,
    pub d_large: Option<usize>,
    pub score_threshold: f64,
    pub config: EmbedConfig,
}

pub fn plan(args: &EmbedArgs) -> Result<EmbedPlan, CliError> {
    let a = merge(args, args.config.as_deref())?;
    let defaults = EmbedConfig::default();
    let config = EmbedConfig {
        d: a.d.unwrap_or(defaults.d),
        alpha: a.alpha.unwrap_or(defaults.alpha),
        sv_threshold: a.sv_threshold.unwrap_or(DEFAULT_SV_THRESHOLD),
        neighbor_cap: a.smoother_cap,
        remove_constant: true,
        eigen: EigenConfig {
            tol: a.tol.unwrap_or(defaults.eigen.tol),
            max_iter: a.max_iter.unwrap_or(defaults.eigen.max_iter),
            seed: a.seed.unwrap_or(0),
            krylov_dim: None,
        },
        score: ScoreConfig {
            alpha: a.score_alpha.unwrap_or(DEFAULT_SCORE_ALPHA),
            neighbor_cap: a.smoother_cap,
        },
    };
    Ok(EmbedPlan {
        method: a.method.unwrap_or(MethodArg::Nonredundant),
        kernel: a.kernel.unwrap_or(KernelArg::Lem),
        k: a.k.unwrap_or(DEFAULT_K),
        sigma: a.sigma,
        lle_reg: a.lle_reg,
        d_large: a.d_large,
        score_threshold: a.score_threshold.unwrap_or(0.5),
        config,
    })
}

pub fn run_plan(cloud: &PointCloud, p: &EmbedPlan) -> Result<Embedding, CliError> {
    let build = |c: &PointCloud| build_kernel(c, p.kernel, p.k, p.sigma, p.lle_reg);
    let emb = match p.method {
        MethodArg::Baseline => spectral_embed(&build(cloud)?, &p.config)?,
        MethodArg::Nonredundant => nonredundant_embed(&build(cloud)?, &p.config)?,
        MethodArg::Seqreg => sequential_regression_embed(cloud, &build, &p.config)?,
        MethodArg::Dsilva => {
            let d_large = p.d_large.unwrap_or(3 * p.config.d).min(cloud.len() - 1);
            let wide = spectral_embed(&build(cloud)?, &EmbedConfig { d: d_large, ..p.config })?;
            dsilva_select(&wide, p.config.d, p.score_threshold)?
        }
    };
    Ok(emb)
}

/// Runs `embed` and writes the projection CSV plus its JSON summary.
pub fn cmd_embed(args: &EmbedArgs) -> Result<Embedding, CliError> {
    let p = plan(args)?;
    let a = merge(args, args.config.as_deref())?;
    let input = required(a.input, "in")?;
    let out = required(a.out, "out")?;
    let cloud = with_path(&input, load_csv(&input))?;
    let emb = run_plan(&cloud, &p)?;
    with_path(&out, emit_plot_data(&emb, &cloud, &out))?;
    for note in &emb.notices {
        eprintln!("note: {note}");
    }
    Ok(emb)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseReport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub score_alpha: f64,
    pub redundancy_scores: Vec<f64>,
    /// `|Spearman|`, rows are projections.
    pub intrinsic_spearman: Option<Vec<Vec<f64>>>,
    pub intrinsic_pearson: Option<Vec<Vec<f64>>>,
    pub strip: Option<StripReport>,
}

fn rows(m: Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<DiagnoseReport, CliError> {
    let a = merge(args, args.config.as_deref())?;
    let input = required(a.input, "in")?;
    let (mut cloud, projections) = with_path(&input, load_embedding_csv(&input))?;
    if projections.ncols() == 0 {
        return Err(CliError::usage(format!(
            "{}: no projection columns (f0, f1, ...)",
            input.display()
        )));
    }
    if let Some(angular) = a.angular {
        let m = cloud.intrinsic_dim();
        if let Some(&bad) = angular.iter().find(|&&j| j >= m) {
            return Err(CliError::usage(format!("--angular column {bad} out of range (m = {m})")));
        }
        cloud = cloud.with_angular((0..m).map(|j| angular.contains(&j)).collect());
    }
    let score = ScoreConfig {
        alpha: a.score_alpha.unwrap_or(DEFAULT_SCORE_ALPHA),
        neighbor_cap: a.smoother_cap,
    };
    let has_intrinsic = cloud.intrinsic.is_some();
    let strip = match a.strip.as_deref() {
        Some(&[l1, l2]) => Some(strip_report(projections.view(), &cloud, l1, l2)?),
        Some(_) => return Err(CliError::usage("--strip takes two values L1,L2")),
        None => None,
    };
    Ok(DiagnoseReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n: projections.nrows(),
        d: projections.ncols(),
        score_alpha: score.alpha,
        redundancy_scores: redundancy_scores(projections.view(), &score)?,
        intrinsic_spearman: has_intrinsic
            .then(|| projection_correlation(projections.view(), &cloud).map(rows))
            .transpose()?,
        intrinsic_pearson: has_intrinsic
            .then(|| projection_pearson(projections.view(), &cloud).map(rows))
            .transpose()?,
        strip,
    })
}

pub fn render_report(r: &DiagnoseReport) -> String {
    let mut out = format!("n = {}, d = {}\n", r.n, r.d);
    for (i, s) in r.redundancy_scores.iter().enumerate() {
        out.push_str(&format!("projection {:>2}: score {s:.4}", i + 1));
        if let Some(c) = &r.intrinsic_spearman {
            let cells: Vec<String> = c[i].iter().map(|v| format!("{v:.3}")).collect();
            out.push_str(&format!("  |rank corr| [{}]", cells.join(", ")));
        }
        if let Some(m) = r.strip.as_ref().and_then(|s| s.matches.get(i)) {
            out.push_str(&format!("  mode ({},{}) r={:.3}", m.k1, m.k2, m.correlation));
            if !m.confident {
                out.push_str(" (no confident match)");
            }
        }
        out.push('\n');
    }
    if let Some(s) = &r.strip {
        out.push_str(&format!(
            "leading {} projection(s) along x1: {}\n",
            s.expected_x1_modes,
            if s.leading_x1_modes_ok { "yes" } else { "no" }
        ));
        if let Some(q) = s.quadratic_identity_residual {
            out.push_str(&format!("quadratic identity residual: {q:.4}\n"));
        }
    }
    out
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<DiagnoseReport, CliError> {
    let report = diagnose(args)?;
    let json = serde_json::to_string_pretty(&report)?;
    let out = merge(args, args.config.as_deref())?.out;
    if let Some(path) = &out {
        std::fs::write(path, &json).map_err(io_error(path))?;
    }
    if args.json {
        println!("{json}");
    } else {
        print!("{}", render_report(&report));
    }
    Ok(report)
}

pub fn classify_options(args: &ClassifyArgs) -> Result<(PathBuf, Option<PathBuf>, ClassifyOptions), CliError> {
    let a = merge(args, args.config.as_deref())?;
    let input = required(a.input, "in")?;
    let opts = ClassifyOptions {
        kernel: a.kernel.unwrap_or(KernelArg::Lem),
        k: a.k.unwrap_or(DEFAULT_K),
        methods: a.methods.unwrap_or_else(|| vec![MethodArg::Baseline, MethodArg::Nonredundant]),
        d_list: a.d_list.unwrap_or_else(|| vec![1, 2, 3, 4, 5]),
        alpha_grid: a.alpha_grid.unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.45, 0.6]),
        seed: a.seed.unwrap_or(0),
    };
    Ok((input, a.out, opts))
}

pub fn render_table(rows: &[ClassifyRow]) -> String {
    let mut out = String::from("method        d  alpha  tune err  test err\n");
    for r in rows {
        let alpha = r.alpha.map_or_else(|| "-".to_string(), |a| format!("{a:.2}"));
        out.push_str(&format!(
            "{:<12} {:>2}  {alpha:>5}  {:>7.2}%  {:>7.2}%\n",
            format!("{:?}", r.method).to_lowercase(),
            r.d,
            100.0 * r.tune_error,
            100.0 * r.test_error
        ));
    }
    out
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<Vec<ClassifyRow>, CliError> {
    let (input, out, opts) = classify_options(args)?;
    let cloud = with_path(&input, load_csv(&input))?;
    let rows = classify(&cloud, &opts)?;
    print!("{}", render_table(&rows));
    if let Some(path) = &out {
        let json = serde_json::to_string_pretty(&rows)?;
        std::fs::write(path, json).map_err(io_error(path))?;
    }
    Ok(rows)
}
