use std::cmp::Ordering;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::datasets::PointCloud;
use crate::error::{Error, Result};

/// Symmetrized k-nearest-neighbor graph. An edge `(i, j)` with `i < j` is
/// present when either endpoint is among the other's k nearest neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    pub n: usize,
    pub k: usize,
    pub edges: Vec<(usize, usize, f64)>,
    /// Directed neighbor lists `(j, distance)`, nearest first.
    pub knn: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The `k` nearest rows of `data` to row `i` (excluding `i`), ties broken
/// toward the lower index.
pub(crate) fn nearest_rows(data: ArrayView2<f64>, i: usize, k: usize) -> Vec<(usize, f64)> {
    let xi = data.row(i);
    let mut cand: Vec<(usize, f64)> = data
        .outer_iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, xj)| {
            let d2: f64 = xi.iter().zip(xj.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            (j, d2)
        })
        .collect();
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_distance_then_index);
        cand.truncate(k);
    }
    cand.sort_by(by_distance_then_index);
    cand.into_iter().map(|(j, d2)| (j, d2.sqrt())).collect()
}

pub fn knn_graph(cloud: &PointCloud, k: usize, metric: Metric) -> Result<NeighborhoodGraph> {
    let Metric::Euclidean = metric;
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("need 1 <= k < N, got k={k}, N={n}")));
    }
    let data = cloud.points.view();
    let knn: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| nearest_rows(data, i, k))
        .collect();

    let mut edges: Vec<(usize, usize, f64)> = knn
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.iter().map(move |&(j, d)| (i.min(j), i.max(j), d)))
        .collect();
    edges.sort_by_key(|e| (e.0, e.1));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    Ok(NeighborhoodGraph { n, k, edges, knn })
}

impl NeighborhoodGraph {
    /// Undirected adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, d) in &self.edges {
            adj[i].push((j, d));
            adj[j].push((i, d));
        }
        adj
    }

    /// Connected component sizes, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn ensure_connected(&self) -> Result<()> {
        let sizes = self.component_sizes();
        if sizes.len() > 1 {
            return Err(Error::Disconnected { sizes });
        }
        Ok(())
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(|e| e.2).sum::<f64>() / self.edges.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn cloud(points: Array2<f64>) -> PointCloud {
        PointCloud::new(points, None, 0).unwrap()
    }

    #[test]
    fn collinear_nearest_neighbors() {
        let g = knn_graph(&cloud(array![[0.0], [1.0], [3.0]]), 1, Metric::Euclidean).unwrap();
        let pairs: Vec<_> = g.edges.iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert_eq!(g.edges[1].2, 2.0);
    }

    #[test]
    fn full_k_gives_complete_graph() {
        let c = cloud(Array2::from_shape_fn((6, 2), |(i, j)| (i * i + 3 * j) as f64));
        let g = knn_graph(&c, 5, Metric::Euclidean).unwrap();
        assert_eq!(g.edges.len(), 15);
        assert!(g.edges.iter().all(|&(i, j, d)| i < j && d >= 0.0));
    }

    #[test]
    fn duplicates_give_zero_length_edges() {
        let g = knn_graph(&cloud(array![[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]]), 1, Metric::Euclidean)
            .unwrap();
        assert!(g.edges.contains(&(0, 1, 0.0)));
    }

    #[test]
    fn ties_prefer_lower_index() {
        // Point 1 is equidistant from 0 and 2.
        let g = knn_graph(&cloud(array![[0.0], [1.0], [2.0]]), 1, Metric::Euclidean).unwrap();
        assert_eq!(g.knn[1], vec![(0, 1.0)]);
    }

    #[test]
    fn components_are_reported() {
        let c = cloud(array![[0.0], [0.1], [10.0], [10.1], [10.2]]);
        let g = knn_graph(&c, 1, Metric::Euclidean).unwrap();
        assert_eq!(g.component_sizes(), vec![3, 2]);
        assert!(matches!(g.ensure_connected(), Err(Error::Disconnected { .. })));
        assert!(knn_graph(&c, 0, Metric::Euclidean).is_err());
        assert!(knn_graph(&c, 5, Metric::Euclidean).is_err());
    }
}
