use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Matrix;

/// A tree node. Rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// Axis-aligned regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Number of split nodes using each feature.
    pub fn split_counts(&self, n_features: usize) -> Vec<usize> {
        let mut counts = vec![0; n_features];
        for n in &self.nodes {
            if let Node::Split { feature, .. } = n {
                counts[*feature] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Per-feature row orders, sorted by value then row index. Constant
/// columns are omitted since they can never split.
pub(crate) struct SortedColumns {
    features: Vec<usize>,
    orders: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub(crate) fn new(x: &Matrix) -> SortedColumns {
        let mut features = Vec::new();
        let mut orders = Vec::new();
        for j in 0..x.cols() {
            let first = if x.rows() > 0 { x.get(0, j) } else { 0.0 };
            if (0..x.rows()).all(|i| x.get(i, j) == first) {
                continue;
            }
            let mut order: Vec<u32> = (0..x.rows() as u32).collect();
            order.sort_by(|&a, &b| x.get(a as usize, j).total_cmp(&x.get(b as usize, j)).then(a.cmp(&b)));
            features.push(j);
            orders.push(order);
        }
        SortedColumns { features, orders }
    }
}

const NO_NODE: u32 = u32::MAX;

/// Running left-side state of one open node while scanning a feature.
#[derive(Clone, Copy)]
struct Scan {
    sum: f64,
    count: usize,
    last: f64,
    best: Option<Candidate>,
}

struct Open {
    node: usize,
    sum: f64,
    sum_sq: f64,
    count: usize,
}

fn best_for_feature(
    x: &Matrix,
    feature: usize,
    order: &[u32],
    node_of: &[u32],
    open: &[Open],
    residuals: &[f64],
) -> Vec<Option<Candidate>> {
    let mut scans = vec![Scan { sum: 0.0, count: 0, last: f64::NAN, best: None }; open.len()];
    for &r in order {
        let slot = node_of[r as usize];
        if slot == NO_NODE {
            continue;
        }
        let slot = slot as usize;
        let value = x.get(r as usize, feature);
        let s = &mut scans[slot];
        let o = &open[slot];
        if s.count > 0 && value > s.last {
            let right_n = o.count - s.count;
            let right_sum = o.sum - s.sum;
            let gain = s.sum * s.sum / s.count as f64 + right_sum * right_sum / right_n as f64
                - o.sum * o.sum / o.count as f64;
            let floor = 1e-12 * o.sum_sq;
            if gain > 0.0 && gain > floor && s.best.is_none_or(|b| gain > b.gain) {
                let mut threshold = 0.5 * (s.last + value);
                if threshold <= s.last {
                    threshold = value;
                }
                s.best = Some(Candidate { gain, feature, threshold });
            }
        }
        s.sum += residuals[r as usize];
        s.count += 1;
        s.last = value;
    }
    scans.into_iter().map(|s| s.best).collect()
}

#[cfg(feature = "parallel")]
fn search(
    x: &Matrix,
    cols: &SortedColumns,
    node_of: &[u32],
    open: &[Open],
    residuals: &[f64],
) -> Vec<Vec<Option<Candidate>>> {
    use rayon::prelude::*;
    cols.features
        .par_iter()
        .zip(cols.orders.par_iter())
        .map(|(&f, order)| best_for_feature(x, f, order, node_of, open, residuals))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn search(
    x: &Matrix,
    cols: &SortedColumns,
    node_of: &[u32],
    open: &[Open],
    residuals: &[f64],
) -> Vec<Vec<Option<Candidate>>> {
    cols.features
        .iter()
        .zip(cols.orders.iter())
        .map(|(&f, order)| best_for_feature(x, f, order, node_of, open, residuals))
        .collect()
}

/// Grows a tree level by level on the rows in `sample`, choosing exact
/// greedy squared-error splits. Leaf values are the mean residual of every
/// training row routed to the leaf.
pub(crate) fn grow(
    x: &Matrix,
    cols: &SortedColumns,
    residuals: &[f64],
    sample: &[usize],
    max_depth: usize,
    min_samples_split: usize,
) -> Tree {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // node_of maps a sampled row to its slot among the currently open nodes
    let mut node_of = vec![NO_NODE; x.rows()];
    let mut members: Vec<Vec<usize>> = vec![sample.to_vec()];
    let mut open_ids = vec![0usize];

    for _depth in 0..max_depth {
        let open: Vec<Open> = open_ids
            .iter()
            .zip(&members)
            .map(|(&node, rows)| Open {
                node,
                sum: rows.iter().map(|&r| residuals[r]).sum(),
                sum_sq: rows.iter().map(|&r| residuals[r] * residuals[r]).sum(),
                count: rows.len(),
            })
            .collect();
        node_of.iter_mut().for_each(|n| *n = NO_NODE);
        let mut any = false;
        for (slot, rows) in members.iter().enumerate() {
            if rows.len() >= min_samples_split.max(2) {
                any = true;
                for &r in rows {
                    node_of[r] = slot as u32;
                }
            }
        }
        if !any {
            break;
        }

        let per_feature = search(x, cols, &node_of, &open, residuals);
        let mut next_ids = Vec::new();
        let mut next_members = Vec::new();
        for (slot, o) in open.iter().enumerate() {
            let mut best: Option<Candidate> = None;
            for cands in &per_feature {
                if let Some(c) = cands[slot] {
                    if best.is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            let Some(best) = best else { continue };
            let (l, r): (Vec<usize>, Vec<usize>) =
                members[slot].iter().partition(|&&row| x.get(row, best.feature) < best.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[o.node] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right: left + 1,
            };
            next_ids.push(left);
            next_members.push(l);
            next_ids.push(left + 1);
            next_members.push(r);
        }
        if next_ids.is_empty() {
            break;
        }
        open_ids = next_ids;
        members = next_members;
    }

    let mut tree = Tree { nodes };
    let mut sums = vec![0.0; tree.nodes.len()];
    let mut counts = vec![0usize; tree.nodes.len()];
    for (i, r) in residuals.iter().enumerate() {
        let leaf = tree.leaf_index(x.row(i));
        sums[leaf] += r;
        counts[leaf] += 1;
    }
    for (i, node) in tree.nodes.iter_mut().enumerate() {
        if let Node::Leaf { value } = node {
            *value = if counts[i] > 0 { sums[i] / counts[i] as f64 } else { 0.0 };
        }
    }
    tree
}
