//! Random-forest regression: bagged variance-reduction CART trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seed::derive_seed;

use super::RegressError;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, features: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// A trained forest. Predictions are means of leaf values, so they never
/// leave the training-label range.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
    n_features: usize,
}

/// Fits `n_trees` CART regression trees on bootstrap resamples of the data
/// (plain bagging; every split searches all features). `max_depth == 0`
/// degenerates to the training-label mean: bootstrapping a constant predictor
/// is pointless, so depth-0 trees skip it and all agree exactly.
pub fn fit_random_forest(
    features: &[Vec<f64>],
    labels: &[f64],
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<RandomForest, RegressError> {
    if features.is_empty() {
        return Err(RegressError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(RegressError::LengthMismatch {
            a: features.len(),
            b: labels.len(),
        });
    }
    if n_trees == 0 {
        return Err(RegressError::InvalidConfig("n_trees must be positive".into()));
    }
    let n_features = features[0].len();
    for f in features {
        if f.len() != n_features {
            return Err(RegressError::LengthMismatch {
                a: f.len(),
                b: n_features,
            });
        }
    }

    let n = features.len();
    let trees: Vec<Tree> = (0..n_trees)
        .map(|t| {
            let mut nodes = Vec::new();
            if max_depth == 0 {
                let mean = labels.iter().sum::<f64>() / n as f64;
                nodes.push(Node::Leaf { value: mean });
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                build_node(&mut nodes, features, labels, indices, max_depth);
            }
            Tree { nodes }
        })
        .collect();
    Ok(RandomForest { trees, n_features })
}

/// Recursively grows a node over `indices`; returns the node's slot.
fn build_node(
    nodes: &mut Vec<Node>,
    features: &[Vec<f64>],
    labels: &[f64],
    indices: Vec<usize>,
    depth_left: usize,
) -> u32 {
    let slot = nodes.len() as u32;
    let n = indices.len();
    let sum: f64 = indices.iter().map(|&i| labels[i]).sum();
    let mean = sum / n as f64;
    nodes.push(Node::Leaf { value: mean });

    if depth_left == 0 || n < 2 {
        return slot;
    }
    let Some((feature, threshold)) = best_split(features, labels, &indices) else {
        return slot;
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| features[i][feature] <= threshold);
    let left = build_node(nodes, features, labels, left_idx, depth_left - 1);
    let right = build_node(nodes, features, labels, right_idx, depth_left - 1);
    nodes[slot as usize] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    slot
}

/// Exhaustive best split by sum-of-squared-error reduction; `None` when no
/// feature separates the samples.
fn best_split(features: &[Vec<f64>], labels: &[f64], indices: &[usize]) -> Option<(usize, f64)> {
    let n = indices.len();
    let n_features = features[indices[0]].len();
    let total_sum: f64 = indices.iter().map(|&i| labels[i]).sum();
    let total_sq: f64 = indices.iter().map(|&i| labels[i] * labels[i]).sum();
    let parent_sse = total_sq - total_sum * total_sum / n as f64;
    if parent_sse <= 0.0 {
        return None;
    }

    let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, sse)
    let mut order: Vec<usize> = indices.to_vec();
    for f in 0..n_features {
        order.sort_by(|&a, &b| {
            features[a][f]
                .partial_cmp(&features[b][f])
                .expect("finite features")
        });
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for split in 1..n {
            let prev = order[split - 1];
            let y = labels[prev];
            left_sum += y;
            left_sq += y * y;
            let a = features[prev][f];
            let b = features[order[split]][f];
            if a == b {
                continue;
            }
            let nl = split as f64;
            let nr = (n - split) as f64;
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
            if best.as_ref().is_none_or(|&(_, _, s)| sse < s) {
                best = Some((f, 0.5 * (a + b), sse));
            }
        }
    }
    best.filter(|&(_, _, sse)| sse < parent_sse)
        .map(|(f, t, _)| (f, t))
}

/// Mean over trees, one prediction per feature row.
pub fn predict_forest(forest: &RandomForest, features: &[Vec<f64>]) -> Vec<f64> {
    let inv = 1.0 / forest.trees.len() as f64;
    features
        .iter()
        .map(|f| {
            assert_eq!(f.len(), forest.n_features, "feature dimension mismatch");
            forest.trees.iter().map(|t| t.predict(f)).sum::<f64>() * inv
        })
        .collect()
}
