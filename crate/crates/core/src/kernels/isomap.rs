use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::{KernelMatrix, NeighborhoodGraph, Orientation};
use crate::error::Result;

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((Dist(nd), w)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path distances over the graph edges.
pub fn geodesic_distances(graph: &NeighborhoodGraph) -> Result<Array2<f64>> {
    graph.ensure_connected()?;
    let adj = graph.adjacency();
    let rows: Vec<Vec<f64>> = (0..graph.n)
        .into_par_iter()
        .map(|s| dijkstra(&adj, s))
        .collect();
    let mut g = Array2::zeros((graph.n, graph.n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, d) in row.into_iter().enumerate() {
            g[[i, j]] = d;
        }
    }
    // Dijkstra from i and from j may disagree in the last bit.
    for i in 0..graph.n {
        for j in 0..i {
            let m = g[[i, j]].min(g[[j, i]]);
            g[[i, j]] = m;
            g[[j, i]] = m;
        }
    }
    Ok(g)
}

/// Isomap kernel `−½ H (G∘G) H` from graph geodesics, stored densely.
pub fn kernel_isomap(graph: &NeighborhoodGraph) -> Result<KernelMatrix> {
    let g = geodesic_distances(graph)?;
    let n = graph.n as f64;
    let sq = g.mapv(|d| d * d);
    let row_means = sq.sum_axis(Axis(1)) / n;
    let grand = row_means.sum() / n;
    let k = Array2::from_shape_fn(sq.dim(), |(i, j)| {
        -0.5 * (sq[[i, j]] - (row_means[i] + row_means[j]) + grand)
    });
    Ok(KernelMatrix::dense(k, Orientation::Maximize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_strip, PointCloud};
    use crate::kernels::{knn_graph, Metric};
    use ndarray::Array1;

    #[test]
    fn line_geodesics_are_euclidean_and_reproduce_mds() {
        let xs: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).powf(1.3)).collect();
        let pts = Array2::from_shape_fn((12, 1), |(i, _)| xs[i]);
        let cloud = PointCloud::new(pts, None, 0).unwrap();
        let g = knn_graph(&cloud, 2, Metric::Euclidean).unwrap();
        let geo = geodesic_distances(&g).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!((geo[[i, j]] - (xs[i] - xs[j]).abs()).abs() < 1e-12);
            }
        }
        // Classical MDS Gram: centered inner products of the coordinates.
        let mean = xs.iter().sum::<f64>() / 12.0;
        let k = kernel_isomap(&g).unwrap();
        let dense = k.to_dense();
        for i in 0..12 {
            for j in 0..12 {
                let gram = (xs[i] - mean) * (xs[j] - mean);
                assert!((dense[[i, j]] - gram).abs() < 1e-9);
            }
        }
        let ones = Array1::from_elem(12, 1.0);
        assert!(k.mul(ones.view()).iter().all(|v| v.abs() < 1e-8));
        assert_eq!(k.asymmetry(), 0.0);
    }

    #[test]
    fn geodesics_obey_triangle_inequality() {
        let cloud = gen_strip(150, 2.5, 1.0, 5).unwrap();
        let g = knn_graph(&cloud, 6, Metric::Euclidean).unwrap();
        let geo = geodesic_distances(&g).unwrap();
        for i in 0..150 {
            for j in 0..150 {
                for k in (0..150).step_by(7) {
                    assert!(geo[[i, j]] <= geo[[i, k]] + geo[[k, j]] + 1e-12);
                }
            }
        }
    }
}
