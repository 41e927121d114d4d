//! CART classification trees (Gini criterion) and random forests.
//!
//! Splits are searched exhaustively over the candidate features and every
//! midpoint between consecutive distinct values. Equal-impurity candidates
//! resolve to the lowest feature index, then the lowest threshold; leaf ties
//! resolve to the lowest class index. Rows with `x[feature] <= threshold` go left.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{majority, Classify};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::{self, Stream};
use crate::spectrum::QualityClass;

/// `1 − Σ pᵢ²` for three class counts.
pub fn gini_impurity(counts: &[usize; 3]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("gini impurity of an empty node"));
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        class: QualityClass,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let idx: Vec<usize> = (0..train.n_rows()).collect();
        Ok(TreeBuilder::new(train, None, None).build(idx))
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

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

impl Classify for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// A split scored by `Σ_L c²/n_L + Σ_R c²/n_R` (larger means purer), kept as an
/// exact fraction so that equal scores compare equal.
#[derive(Clone, Copy)]
struct Candidate {
    num: u128,
    den: u128,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                let (a, b) = (self.num * o.den, o.num * self.den);
                a > b || (a == b && (self.feature, self.threshold) < (o.feature, o.threshold))
            }
        }
    }
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: Vec<usize>,
    max_features: Option<usize>,
    rng: Option<Stream>,
    nodes: Vec<Node>,
    pairs: Vec<(f64, usize)>,
    feature_order: Vec<usize>,
}

impl<'a> TreeBuilder<'a> {
    fn new(x: &'a FeatureMatrix, max_features: Option<usize>, rng: Option<Stream>) -> Self {
        Self {
            x,
            y: x.labels().iter().map(|c| c.index()).collect(),
            max_features,
            rng,
            nodes: Vec::new(),
            pairs: Vec::new(),
            feature_order: (0..x.n_cols()).collect(),
        }
    }

    fn build(mut self, idx: Vec<usize>) -> DecisionTree {
        self.grow(idx);
        DecisionTree {
            n_features: self.x.n_cols(),
            nodes: self.nodes,
        }
    }

    fn counts(&self, idx: &[usize]) -> [usize; 3] {
        let mut c = [0; 3];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let at = self.nodes.len();
        let counts = self.counts(&idx);
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        if counts.iter().filter(|&&c| c > 0).count() <= 1 {
            return at;
        }
        let Some(best) = self.best_split(&idx, &counts) else {
            return at;
        };
        let x = self.x;
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| x.row(i)[best.feature] <= best.threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&mut self, idx: &[usize], counts: &[usize; 3]) -> Option<Candidate> {
        let d = self.x.n_cols();
        let mut best: Option<Candidate> = None;
        let mut rng = self.rng.take();
        match (self.max_features, rng.as_mut()) {
            (Some(m), Some(rng)) if m < d => {
                // Draw features without replacement until `m` non-constant ones were examined.
                let mut informative = 0;
                for drawn in 0..d {
                    let j = rng.random_range(drawn..d);
                    self.feature_order.swap(drawn, j);
                    let f = self.feature_order[drawn];
                    match self.scan_feature(f, idx, counts) {
                        FeatureScan::Constant => {}
                        FeatureScan::Best(c) => {
                            informative += 1;
                            if c.beats(&best) {
                                best = Some(c);
                            }
                        }
                    }
                    if informative >= m {
                        break;
                    }
                }
            }
            _ => {
                for f in 0..d {
                    if let FeatureScan::Best(c) = self.scan_feature(f, idx, counts) {
                        if c.beats(&best) {
                            best = Some(c);
                        }
                    }
                }
            }
        }
        self.rng = rng;
        best
    }

    fn scan_feature(&mut self, f: usize, idx: &[usize], counts: &[usize; 3]) -> FeatureScan {
        self.pairs.clear();
        self.pairs
            .extend(idx.iter().map(|&i| (self.x.row(i)[f], self.y[i])));
        self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.pairs.len();
        if self.pairs[0].0 == self.pairs[n - 1].0 {
            return FeatureScan::Constant;
        }
        let mut left = [0usize; 3];
        let mut best: Option<Candidate> = None;
        for k in 0..n - 1 {
            left[self.pairs[k].1] += 1;
            let (a, b) = (self.pairs[k].0, self.pairs[k + 1].0);
            if a == b {
                continue;
            }
            let nl = (k + 1) as u128;
            let nr = (n - k - 1) as u128;
            let mut sl = 0u128;
            let mut sr = 0u128;
            for c in 0..3 {
                let l = left[c] as u128;
                let r = (counts[c] - left[c]) as u128;
                sl += l * l;
                sr += r * r;
            }
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b || !threshold.is_finite() {
                threshold = a;
            }
            let cand = Candidate {
                num: sl * nr + sr * nl,
                den: nl * nr,
                feature: f,
                threshold,
            };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
        best.map_or(FeatureScan::Constant, FeatureScan::Best)
    }
}

enum FeatureScan {
    Constant,
    Best(Candidate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub max_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Bootstrap (n draws with replacement) per tree, `max_features` (default ⌊√d⌋)
    /// candidate features per split. Tree `t` uses the stream derived from `(seed, t)`.
    pub fn fit(
        train: &FeatureMatrix,
        n_trees: usize,
        max_features: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if n_trees == 0 {
            return Err(Error::invalid("random forest needs at least one tree"));
        }
        let d = train.n_cols();
        let m = max_features
            .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1))
            .min(d);
        let n = train.n_rows();
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::derived_stream(seed, &[t as u64]);
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                TreeBuilder::new(train, Some(m), Some(rng)).build(idx)
            })
            .collect();
        Ok(Self {
            n_features: d,
            max_features: m,
            trees,
        })
    }

    pub fn from_trees(trees: Vec<DecisionTree>) -> Result<Self> {
        let n_features = trees
            .first()
            .ok_or_else(|| Error::invalid("forest needs at least one tree"))?
            .n_features;
        Ok(Self {
            n_features,
            max_features: n_features,
            trees,
        })
    }
}

impl Classify for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let mut votes = [0usize; 3];
        for t in &self.trees {
            votes[t.decide(x).index()] += 1;
        }
        majority(&votes)
    }
}
