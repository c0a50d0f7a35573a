//! C4.5-style decision tree over continuous features.
//!
//! Every internal node is a binary threshold test `x[feature] <= threshold`.
//! Candidate thresholds are midpoints between consecutive distinct values
//! observed at the node; the split with the largest gain ratio
//! (information gain / split information, entropies in bits) wins. Ties go
//! to the lower feature index, then the lower threshold.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, SparseVector};
use crate::scalar::Scalar;

/// Gains at or below this are treated as zero.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 1,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<F> {
    Leaf {
        category: usize,
        histogram: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: F,
        left: Box<TreeNode<F>>,
        right: Box<TreeNode<F>>,
    },
}

impl<F: Scalar> TreeNode<F> {
    pub fn leaf(histogram: Vec<usize>) -> Self {
        TreeNode::Leaf {
            category: majority(&histogram),
            histogram,
        }
    }

    /// Category and class histogram of the leaf `x` lands in.
    pub fn leaf_for(&self, x: &SparseVector<F>) -> (usize, &[usize]) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { category, histogram } => return (*category, histogram),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x.get(*feature) <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }
}

pub fn tree_predict<F: Scalar>(tree: &TreeNode<F>, x: &SparseVector<F>) -> usize {
    tree.leaf_for(x).0
}

fn majority(histogram: &[usize]) -> usize {
    let mut best = 0;
    for (i, &n) in histogram.iter().enumerate() {
        if n > histogram[best] {
            best = i;
        }
    }
    best
}

fn entropy(histogram: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice<F> {
    pub feature: usize,
    pub threshold: F,
    pub gain: f64,
    pub gain_ratio: f64,
}

/// Rows sharing one feature value.
struct Group<F> {
    value: F,
    histogram: Vec<usize>,
}

fn midpoint<F: Scalar>(a: F, b: F) -> F {
    let mid = a + (b - a) / F::of(2.0);
    if a < mid && mid < b {
        mid
    } else {
        a
    }
}

/// Best threshold over value groups sorted ascending.
fn scan_groups<F: Scalar>(groups: &[Group<F>], total: &[usize], n: usize, min_leaf: usize) -> Option<(F, f64, f64)> {
    let parent = entropy(total, n);
    let nf = n as f64;
    let mut left = vec![0usize; total.len()];
    let mut right = vec![0usize; total.len()];
    let mut n_left = 0;
    let mut best: Option<(F, f64, f64)> = None;
    for pair in groups.windows(2) {
        for (l, g) in left.iter_mut().zip(&pair[0].histogram) {
            *l += g;
        }
        n_left += pair[0].histogram.iter().sum::<usize>();
        let n_right = n - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        for ((r, t), l) in right.iter_mut().zip(total).zip(&left) {
            *r = t - l;
        }
        let (pl, pr) = (n_left as f64 / nf, n_right as f64 / nf);
        let gain = parent - pl * entropy(&left, n_left) - pr * entropy(&right, n_right);
        if gain <= MIN_GAIN {
            continue;
        }
        let split_info = -pl * pl.log2() - pr * pr.log2();
        let ratio = gain / split_info;
        if best.is_none_or(|(_, r, _)| ratio > r) {
            best = Some((midpoint(pair[0].value, pair[1].value), ratio, gain));
        }
    }
    best
}

/// Groups `(value, label)` pairs, with `zeros` implicit zero-valued rows
/// whose class histogram is `zero_hist`.
fn group_values<F: Scalar>(mut values: Vec<(F, usize)>, zero_hist: Option<Vec<usize>>, m: usize) -> Vec<Group<F>> {
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<Group<F>> = Vec::new();
    let mut zero = zero_hist.filter(|h| h.iter().any(|&c| c > 0));
    for (v, label) in values {
        if let Some(h) = zero.as_ref() {
            if v > F::zero() {
                groups.push(Group {
                    value: F::zero(),
                    histogram: h.clone(),
                });
                zero = None;
            }
        }
        match groups.last_mut() {
            Some(g) if g.value == v => g.histogram[label] += 1,
            _ => {
                let mut histogram = vec![0; m];
                histogram[label] += 1;
                groups.push(Group { value: v, histogram });
            }
        }
    }
    if let Some(h) = zero {
        groups.push(Group {
            value: F::zero(),
            histogram: h,
        });
    }
    groups
}

fn histogram_of<F>(data: &Dataset<F>, rows: &[usize]) -> Vec<usize> {
    let mut h = vec![0; data.num_categories];
    for &r in rows {
        h[data.labels[r]] += 1;
    }
    h
}

/// Best threshold on one feature for the given rows (`min_leaf` = 1).
pub fn best_split<F: Scalar>(data: &Dataset<F>, rows: &[usize], feature: usize) -> Option<SplitChoice<F>> {
    let values = rows.iter().map(|&r| (data.vectors[r].get(feature), data.labels[r])).collect();
    let total = histogram_of(data, rows);
    let groups = group_values(values, None, data.num_categories);
    scan_groups(&groups, &total, rows.len(), 1).map(|(threshold, gain_ratio, gain)| SplitChoice {
        feature,
        threshold,
        gain,
        gain_ratio,
    })
}

/// Best split over every feature that is nonzero somewhere in `rows`.
fn best_split_any<F: Scalar>(data: &Dataset<F>, rows: &[usize], total: &[usize], min_leaf: usize) -> Option<SplitChoice<F>> {
    let m = data.num_categories;
    let mut columns: HashMap<usize, Vec<(F, usize)>> = HashMap::new();
    for &r in rows {
        for &(f, v) in data.vectors[r].entries() {
            columns.entry(f).or_default().push((v, data.labels[r]));
        }
    }
    let mut features: Vec<usize> = columns.keys().copied().collect();
    features.sort_unstable();

    let mut best: Option<SplitChoice<F>> = None;
    for feature in features {
        let values = columns.remove(&feature).expect("collected above");
        let mut zero_hist = total.to_vec();
        for &(_, l) in &values {
            zero_hist[l] -= 1;
        }
        let groups = group_values(values, Some(zero_hist), m);
        if let Some((threshold, gain_ratio, gain)) = scan_groups(&groups, total, rows.len(), min_leaf) {
            if best.is_none_or(|b| gain_ratio > b.gain_ratio) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                    gain_ratio,
                });
            }
        }
    }
    best
}

pub fn train_c45<F: Scalar>(data: &Dataset<F>, params: &TreeParams) -> TreeNode<F> {
    let rows: Vec<usize> = (0..data.len()).collect();
    grow(data, rows, 0, params)
}

fn grow<F: Scalar>(data: &Dataset<F>, rows: Vec<usize>, depth: usize, params: &TreeParams) -> TreeNode<F> {
    let hist = histogram_of(data, &rows);
    let min_leaf = params.min_leaf.max(1);
    let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_capped || rows.len() < 2 * min_leaf {
        return TreeNode::leaf(hist);
    }
    let Some(split) = best_split_any(data, &rows, &hist, min_leaf) else {
        return TreeNode::leaf(hist);
    };
    let (left, right): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&r| data.vectors[r].get(split.feature) <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(data, left, depth + 1, params)),
        right: Box::new(grow(data, right, depth + 1, params)),
    }
}

/// Pre-order node list used for serialization, so that deep trees do not
/// hit serializer recursion limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
enum FlatNode<F> {
    Leaf {
        category: usize,
        histogram: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
}

fn flatten<F: Scalar>(root: &TreeNode<F>) -> Vec<FlatNode<F>> {
    let mut out = Vec::new();
    let mut stack = vec![(root, None::<(usize, bool)>)];
    while let Some((node, parent)) = stack.pop() {
        let idx = out.len();
        if let Some((p, is_left)) = parent {
            if let FlatNode::Split { left, right, .. } = &mut out[p] {
                *(if is_left { left } else { right }) = idx;
            }
        }
        match node {
            TreeNode::Leaf { category, histogram } => out.push(FlatNode::Leaf {
                category: *category,
                histogram: histogram.clone(),
            }),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push(FlatNode::Split {
                    feature: *feature,
                    threshold: *threshold,
                    left: 0,
                    right: 0,
                });
                stack.push((right, Some((idx, false))));
                stack.push((left, Some((idx, true))));
            }
        }
    }
    out
}

fn unflatten<F: Scalar>(nodes: Vec<FlatNode<F>>) -> Result<TreeNode<F>> {
    let mut used = vec![false; nodes.len()];
    let mut built: Vec<Option<TreeNode<F>>> = (0..nodes.len()).map(|_| None).collect();
    // children always follow their parent, so build back to front
    for idx in (0..nodes.len()).rev() {
        let node = match &nodes[idx] {
            FlatNode::Leaf { category, histogram } => {
                if histogram.iter().all(|&c| c == 0) || *category >= histogram.len() {
                    return Err(Error::Format(format!("tree node {idx}: bad leaf")));
                }
                TreeNode::Leaf {
                    category: *category,
                    histogram: histogram.clone(),
                }
            }
            &FlatNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let mut take = |child: usize| -> Result<TreeNode<F>> {
                    if child <= idx || child >= nodes.len() || used[child] {
                        return Err(Error::Format(format!("tree node {idx}: bad child index {child}")));
                    }
                    used[child] = true;
                    built[child].take().ok_or_else(|| Error::Format(format!("tree node {child} missing")))
                };
                let l = take(left)?;
                let r = take(right)?;
                if !threshold.is_finite() {
                    return Err(Error::Format(format!("tree node {idx}: non-finite threshold")));
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left: Box::new(l),
                    right: Box::new(r),
                }
            }
        };
        built[idx] = Some(node);
    }
    if used.iter().skip(1).any(|u| !u) {
        return Err(Error::Format("tree has unreachable nodes".into()));
    }
    built
        .first_mut()
        .and_then(Option::take)
        .ok_or_else(|| Error::Format("empty tree".into()))
}

impl<F: Scalar> Serialize for TreeNode<F> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        flatten(self).serialize(s)
    }
}

impl<'de, F: Scalar> Deserialize<'de> for TreeNode<F> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let nodes = Vec::<FlatNode<F>>::deserialize(d)?;
        unflatten(nodes).map_err(serde::de::Error::custom)
    }
}
