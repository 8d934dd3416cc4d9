//! Weighted least-squares regression trees (exact greedy CART).

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree stored as an arena; node 0 is the root. A row
/// goes left iff `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Largest feature index used by any split, if any.
    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Preorder tokens: `S <feature> <threshold>` or `L <value>`.
    pub fn to_preorder(&self) -> String {
        fn walk(nodes: &[Node], at: usize, out: &mut String) {
            if !out.is_empty() {
                out.push(' ');
            }
            match nodes[at] {
                Node::Leaf { value } => {
                    let _ = write!(out, "L {value:?}");
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = write!(out, "S {feature} {threshold:?}");
                    walk(nodes, left, out);
                    walk(nodes, right, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.nodes, 0, &mut out);
        out
    }

    pub fn from_preorder(text: &str) -> std::result::Result<Self, String> {
        fn read(
            tokens: &mut std::str::SplitWhitespace<'_>,
            nodes: &mut Vec<Node>,
        ) -> std::result::Result<usize, String> {
            let mut next = |what: &str| tokens.next().ok_or_else(|| format!("missing {what}"));
            let at = nodes.len();
            match next("node kind")? {
                "L" => {
                    let value = next("leaf value")?;
                    let value = value.parse().map_err(|_| format!("bad leaf value {value:?}"))?;
                    nodes.push(Node::Leaf { value });
                }
                "S" => {
                    let feature = next("feature")?;
                    let feature = feature.parse().map_err(|_| format!("bad feature {feature:?}"))?;
                    let threshold = next("threshold")?;
                    let threshold = threshold.parse().map_err(|_| format!("bad threshold {threshold:?}"))?;
                    nodes.push(Node::Leaf { value: 0.0 });
                    let left = read(tokens, nodes)?;
                    let right = read(tokens, nodes)?;
                    nodes[at] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                }
                other => return Err(format!("unknown node kind {other:?}")),
            }
            Ok(at)
        }
        let mut tokens = text.split_whitespace();
        let mut nodes = Vec::new();
        read(&mut tokens, &mut nodes)?;
        if let Some(extra) = tokens.next() {
            return Err(format!("trailing token {extra:?}"));
        }
        Ok(Self { nodes })
    }
}

/// Fits a tree to `targets` minimizing `sum w (g - h(x))^2`.
///
/// `features` is row-major with `n_features` columns. Split candidates are
/// midpoints between consecutive distinct values; leaf values are weighted
/// means. Rows with zero weight are ignored during fitting, including the
/// `min_samples_leaf` count. Ties go to the lowest feature index, then the
/// lowest threshold.
pub fn fit_tree_weighted(
    features: &[f64],
    n_features: usize,
    targets: &[f64],
    weights: &[f64],
    params: TreeParams,
) -> Result<RegressionTree> {
    let n = targets.len();
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: weights.len(),
        });
    }
    if n_features == 0 || features.len() != n * n_features {
        return Err(Error::LengthMismatch {
            expected: n * n_features,
            actual: features.len(),
        });
    }
    if params.max_depth == 0 || params.min_samples_leaf == 0 {
        return Err(Error::InvalidArgument(
            "max_depth and min_samples_leaf must be >= 1".into(),
        ));
    }
    if let Some(&bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weight {bad} is not a finite nonnegative number"
        )));
    }
    if let Some(&bad) = targets.iter().find(|g| !g.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let active: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::ZeroWeights);
    }
    let column = |f: usize, i: usize| features[i * n_features + f];
    let sorted: Vec<Vec<usize>> = (0..n_features)
        .map(|f| {
            let mut idx = active.clone();
            idx.sort_by(|&a, &b| column(f, a).total_cmp(&column(f, b)).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut builder = Builder {
        features,
        n_features,
        targets,
        weights,
        params,
        nodes: Vec::new(),
        goes_left: vec![false; n],
    };
    builder.grow(active, sorted, 0);
    Ok(RegressionTree { nodes: builder.nodes })
}

struct Builder<'a> {
    features: &'a [f64],
    n_features: usize,
    targets: &'a [f64],
    weights: &'a [f64],
    params: TreeParams,
    nodes: Vec<Node>,
    goes_left: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn x(&self, i: usize, f: usize) -> f64 {
        self.features[i * self.n_features + f]
    }

    /// `rows` ascending; `sorted[f]` holds the same rows ordered by feature `f`.
    fn grow(&mut self, rows: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let (mut weight, mut sum) = (0.0, 0.0);
        for &i in &rows {
            weight += self.weights[i];
            sum += self.weights[i] * self.targets[i];
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: sum / weight });

        let first = self.targets[rows[0]];
        let constant = rows.iter().all(|&i| self.targets[i] == first);
        if depth >= self.params.max_depth || constant || rows.len() < 2 * self.params.min_samples_leaf {
            return at;
        }
        let best = match self.best_split(&sorted, weight, sum) {
            Some(c) if c.score > sum * sum / weight => c,
            _ => return at,
        };

        for &i in &rows {
            self.goes_left[i] = self.x(i, best.feature) <= best.threshold;
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.goes_left[i]);
        let (mut left_sorted, mut right_sorted) =
            (Vec::with_capacity(self.n_features), Vec::with_capacity(self.n_features));
        for column in sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = column.into_iter().partition(|&i| self.goes_left[i]);
            left_sorted.push(l);
            right_sorted.push(r);
        }
        let left = self.grow(left_rows, left_sorted, depth + 1);
        let right = self.grow(right_rows, right_sorted, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }

    /// Best split maximizing `S_L^2 / W_L + S_R^2 / W_R`, which is the same
    /// as minimizing the children's weighted SSE.
    fn best_split(&self, sorted: &[Vec<usize>], weight: f64, sum: f64) -> Option<Candidate> {
        let per_feature: Vec<Option<Candidate>> = sorted
            .par_iter()
            .enumerate()
            .map(|(f, order)| self.best_for_feature(f, order, weight, sum))
            .collect();
        let mut best: Option<Candidate> = None;
        for c in per_feature.into_iter().flatten() {
            if best.is_none_or(|b| c.score > b.score) {
                best = Some(c);
            }
        }
        best
    }

    fn best_for_feature(&self, f: usize, order: &[usize], weight: f64, sum: f64) -> Option<Candidate> {
        let min_leaf = self.params.min_samples_leaf;
        let n = order.len();
        let (mut w_left, mut s_left) = (0.0, 0.0);
        let mut best: Option<Candidate> = None;
        for p in 0..n - 1 {
            let i = order[p];
            w_left += self.weights[i];
            s_left += self.weights[i] * self.targets[i];
            let (lo, hi) = (self.x(i, f), self.x(order[p + 1], f));
            if lo == hi || p + 1 < min_leaf || n - p - 1 < min_leaf {
                continue;
            }
            let w_right = weight - w_left;
            let s_right = sum - s_left;
            if w_left <= 0.0 || w_right <= 0.0 {
                continue;
            }
            let score = s_left * s_left / w_left + s_right * s_right / w_right;
            if best.is_none_or(|b| score > b.score) {
                best = Some(Candidate {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    score,
                });
            }
        }
        best
    }
}

/// Midpoint of `lo < hi` that still sends `lo` left and `hi` right.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const STUMP: TreeParams = TreeParams {
        max_depth: 1,
        min_samples_leaf: 1,
    };

    #[test]
    fn separable_step() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let g = [-1.0, -1.0, 1.0, 1.0];
        let tree = fit_tree_weighted(&x, 1, &g, &[1.0; 4], STUMP).unwrap();
        assert_eq!(tree.to_preorder(), "S 0 1.5 L -1.0 L 1.0");
        assert_eq!(tree.predict(&[1.5]), -1.0);
        assert_eq!(tree.predict(&[1.6]), 1.0);
    }

    #[test]
    fn leaf_is_weighted_mean() {
        let tree = fit_tree_weighted(&[0.0, 0.0], 1, &[1.0, 4.0], &[3.0, 1.0], STUMP).unwrap();
        assert_eq!(tree.nodes(), &[Node::Leaf { value: 7.0 / 4.0 }]);
    }

    #[test]
    fn constant_targets_stop() {
        let tree = fit_tree_weighted(&[0.0, 1.0, 2.0], 1, &[2.0; 3], &[1.0; 3], STUMP).unwrap();
        assert_eq!(tree.n_leaves(), 1);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let g = [5.0, -1.0, -1.0, -1.0, -1.0];
        let params = TreeParams {
            max_depth: 1,
            min_samples_leaf: 2,
        };
        let tree = fit_tree_weighted(&x, 1, &g, &[1.0; 5], params).unwrap();
        assert_eq!(tree.to_preorder(), "S 0 1.5 L 2.0 L -1.0");
    }

    #[test]
    fn tie_breaks_to_lowest_feature() {
        // both columns separate the targets identically
        let x = [0.0, 0.0, 1.0, 1.0];
        let tree = fit_tree_weighted(&x, 2, &[-1.0, 1.0], &[1.0, 1.0], STUMP).unwrap();
        assert_eq!(tree.to_preorder(), "S 0 0.5 L -1.0 L 1.0");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_tree_weighted(&[0.0, 1.0], 1, &[1.0, 2.0], &[0.0, 0.0], STUMP),
            Err(Error::ZeroWeights)
        ));
        assert!(fit_tree_weighted(&[0.0], 1, &[1.0], &[1.0, 1.0], STUMP).is_err());
        assert!(fit_tree_weighted(&[0.0], 1, &[1.0], &[-1.0], STUMP).is_err());
    }

    #[test]
    fn preorder_round_trip() {
        let x = [0.0, 5.0, 1.0, 4.0, 2.0, 3.0, 3.0, 2.0, 4.0, 1.0];
        let g = [0.3, -1.2, 2.5, 0.1, -0.7];
        let params = TreeParams {
            max_depth: 3,
            min_samples_leaf: 1,
        };
        let tree = fit_tree_weighted(&x, 2, &g, &[1.0, 0.5, 2.0, 1.0, 0.25], params).unwrap();
        let back = RegressionTree::from_preorder(&tree.to_preorder()).unwrap();
        assert_eq!(back, tree);
        assert!(RegressionTree::from_preorder("S 0 1.0 L 1.0").is_err());
        assert!(RegressionTree::from_preorder("L 1.0 L 2.0").is_err());
    }

    #[test]
    fn midpoint_stays_between() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo <= m && m < hi);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, usize)> {
        (2usize..16, 1usize..4).prop_flat_map(|(n, d)| {
            (
                prop::collection::vec(-3i32..4, n * d).prop_map(|v| v.into_iter().map(f64::from).collect()),
                prop::collection::vec(-2.0f64..2.0, n),
                prop::collection::vec(0.1f64..3.0, n),
                Just(d),
            )
        })
    }

    proptest! {
        #[test]
        fn zero_weight_rows_change_nothing(
            (x, g, w, d) in instance(),
            extra in prop::collection::vec((-5.0f64..5.0, -9.0f64..9.0), 1..5),
        ) {
            let params = TreeParams { max_depth: 3, min_samples_leaf: 1 };
            let base = fit_tree_weighted(&x, d, &g, &w, params).unwrap();
            let (mut x2, mut g2, mut w2) = (x.clone(), g.clone(), w.clone());
            for (xv, gv) in extra {
                x2.extend(std::iter::repeat_n(xv, d));
                g2.push(gv);
                w2.push(0.0);
            }
            let padded = fit_tree_weighted(&x2, d, &g2, &w2, params).unwrap();
            prop_assert_eq!(base, padded);
        }

        #[test]
        fn depth_and_leaf_bounds((x, g, w, d) in instance(), depth in 1usize..4) {
            let params = TreeParams { max_depth: depth, min_samples_leaf: 1 };
            let tree = fit_tree_weighted(&x, d, &g, &w, params).unwrap();
            prop_assert!(tree.depth() <= depth);
            prop_assert!(tree.n_leaves() <= 1 << depth);
        }

        #[test]
        fn fit_never_worse_than_root_mean((x, g, w, d) in instance()) {
            let params = TreeParams { max_depth: 2, min_samples_leaf: 1 };
            let tree = fit_tree_weighted(&x, d, &g, &w, params).unwrap();
            let sse = |h: &dyn Fn(usize) -> f64| -> f64 {
                (0..g.len()).map(|i| w[i] * (g[i] - h(i)).powi(2)).sum()
            };
            let mean = g.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
            let fitted = sse(&|i| tree.predict(&x[i * d..(i + 1) * d]));
            prop_assert!(fitted <= sse(&|_| mean) + 1e-9);
            prop_assert!(fitted <= sse(&|_| 0.0) + 1e-9);
        }
    }
}
