//! Isolation Forest with depth-limited random partition trees.

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng as _;

use crate::rng::Rng;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Average unsuccessful-search path length in a BST of `size` nodes.
pub fn average_path_length(size: usize) -> f64 {
    match size {
        0 | 1 => 0.0,
        2 => 1.0,
        s => {
            let s = s as f64;
            2.0 * ((s - 1.0).ln() + EULER_GAMMA) - 2.0 * (s - 1.0) / s
        }
    }
}

/// `2^(-mean_path / c(psi))`.
pub fn anomaly_score(mean_path: f64, subsample: usize) -> f64 {
    2f64.powf(-mean_path / average_path_length(subsample))
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        size: usize,
    },
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn grow(data: ArrayView2<f64>, rows: Vec<usize>, max_depth: usize, r: &mut Rng) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.build(data, rows, 0, max_depth, r);
        tree
    }

    fn build(
        &mut self,
        data: ArrayView2<f64>,
        rows: Vec<usize>,
        depth: usize,
        max_depth: usize,
        r: &mut Rng,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { size: rows.len() });
        if depth >= max_depth || rows.len() <= 1 {
            return id;
        }
        // only features with spread can separate anything
        let ranges: Vec<(usize, f64, f64)> = (0..data.ncols())
            .filter_map(|f| {
                let (lo, hi) = rows
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(data[[i, f]]), hi.max(data[[i, f]]))
                    });
                (hi > lo).then_some((f, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return id;
        }
        let (feature, lo, hi) = ranges[r.random_range(0..ranges.len())];
        let value = r.random_range(lo..hi);
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| data[[i, feature]] < value);
        let left = self.build(data, left_rows, depth + 1, max_depth, r);
        let right = self.build(data, right_rows, depth + 1, max_depth, r);
        self.nodes[id] = Node::Split {
            feature,
            value,
            left,
            right,
        };
        id
    }

    fn path_length(&self, x: ArrayView1<f64>) -> f64 {
        let mut node = 0;
        let mut depth = 0.0;
        loop {
            match self.nodes[node] {
                Node::Leaf { size } => return depth + average_path_length(size),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    node = if x[feature] < value { left } else { right };
                    depth += 1.0;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct IsolationForest {
    trees: Vec<Tree>,
    subsample: usize,
}

impl IsolationForest {
    /// Requires at least two rows and `1 <= n_trees`.
    pub(crate) fn fit(
        train: ArrayView2<f64>,
        n_trees: usize,
        subsample: usize,
        r: &mut Rng,
    ) -> Self {
        let n = train.nrows();
        let psi = subsample.clamp(2, n);
        let max_depth = (psi as f64).log2().ceil() as usize;
        let trees = (0..n_trees)
            .map(|_| {
                let rows = rand::seq::index::sample(r, n, psi).into_vec();
                Tree::grow(train, rows, max_depth, r)
            })
            .collect();
        Self {
            trees,
            subsample: psi,
        }
    }

    pub fn subsample(&self) -> usize {
        self.subsample
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn mean_path_length(&self, x: ArrayView1<f64>) -> f64 {
        self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        anomaly_score(self.mean_path_length(x), self.subsample)
    }
}
