use serde::{Deserialize, Serialize};

use super::tfidf::SparseVector;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub stored_vectors: Vec<SparseVector>,
    pub stored_labels: Vec<bool>,
}

impl KnnModel {
    pub fn fit(vectors: Vec<SparseVector>, labels: Vec<bool>, k: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if k == 0 || k > vectors.len() {
            return Err(Error::Config(format!(
                "k = {k} must be in 1..={}",
                vectors.len()
            )));
        }
        Ok(KnnModel {
            k,
            stored_vectors: vectors,
            stored_labels: labels,
        })
    }
}

/// Indices of the `k` nearest vectors by cosine distance, nearest first.
/// Distance ties go to the lower index.
pub fn knn_neighbors(vectors: &[SparseVector], x: &SparseVector, k: usize) -> Vec<usize> {
    let k = k.min(vectors.len());
    if k == 0 {
        return Vec::new();
    }
    let qn = x.norm();
    let dim = vectors
        .iter()
        .filter_map(|v| v.iter().last().map(|(i, _)| i + 1))
        .chain(x.iter().last().map(|(i, _)| i + 1))
        .max()
        .unwrap_or(0);
    let mut dense = vec![0.0; dim];
    for (i, v) in x.iter() {
        dense[i] = v;
    }
    let mut scored: Vec<(f64, usize)> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let vn = v.norm();
            let cos = if vn == 0.0 || qn == 0.0 {
                0.0
            } else {
                v.dot_dense(&dense) / (vn * qn)
            };
            (1.0 - cos, i)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    scored.into_iter().map(|(_, i)| i).collect()
}

/// Strict majority of the neighbours' labels; a tie is negative.
pub fn knn_vote(neighbors: &[usize], labels: &[bool]) -> bool {
    let yes = neighbors.iter().filter(|&&i| labels[i]).count();
    yes * 2 > neighbors.len()
}

/// Majority label of the `k` nearest stored vectors.
pub fn knn_predict(model: &KnnModel, x: &SparseVector) -> bool {
    let nn = knn_neighbors(&model.stored_vectors, x, model.k);
    !nn.is_empty() && knn_vote(&nn, &model.stored_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sv(pairs: &[(usize, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.to_vec())
    }

    #[test]
    fn k1_returns_exact_match_label() {
        let vs = vec![sv(&[(0, 1.0)]), sv(&[(1, 1.0)]), sv(&[(2, 1.0)])];
        let m = KnnModel::fit(vs.clone(), vec![false, true, false], 1).unwrap();
        assert!(knn_predict(&m, &vs[1]));
        assert!(!knn_predict(&m, &vs[2]));
    }

    #[test]
    fn k3_majority() {
        let vs = vec![
            sv(&[(0, 1.0)]),
            sv(&[(0, 1.0), (1, 0.1)]),
            sv(&[(0, 1.0), (1, 0.2)]),
            sv(&[(5, 1.0)]),
        ];
        let m = KnnModel::fit(vs, vec![true, true, false, false], 3).unwrap();
        assert!(knn_predict(&m, &sv(&[(0, 2.0)])));
    }

    #[test]
    fn vote_tie_is_negative() {
        let vs = vec![sv(&[(0, 1.0)]), sv(&[(0, 1.0)])];
        let m = KnnModel::fit(vs, vec![true, false], 2).unwrap();
        assert!(!knn_predict(&m, &sv(&[(0, 1.0)])));
    }

    #[test]
    fn invalid_k_rejected() {
        assert!(KnnModel::fit(vec![sv(&[(0, 1.0)])], vec![true], 2).is_err());
        assert!(KnnModel::fit(vec![sv(&[(0, 1.0)])], vec![true], 0).is_err());
    }

    #[test]
    fn neighbors_agree_with_sparse_cosine() {
        let vs = vec![sv(&[(0, 1.0), (3, 2.0)]), sv(&[(1, 1.0)]), sv(&[(0, 2.0), (3, 4.0)]), sv(&[])];
        let q = sv(&[(0, 1.0), (3, 2.0)]);
        assert_eq!(knn_neighbors(&vs, &q, 4), vec![0, 2, 1, 3]);
        let d = 1.0 - super::super::tfidf::sparse_cosine(&vs[2], &q);
        assert!(d.abs() < 1e-15);
    }

    // Exhaustive scan with a full stable sort, written independently.
    fn oracle(vs: &[SparseVector], labels: &[bool], k: usize, q: &SparseVector) -> bool {
        let dense = |v: &SparseVector| (0..8).map(|i| v.get(i)).collect::<Vec<f64>>();
        let qd = dense(q);
        let qn = qd.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut d: Vec<(f64, usize)> = vs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let vd = dense(v);
                let vn = vd.iter().map(|x| x * x).sum::<f64>().sqrt();
                let dot: f64 = vd.iter().zip(&qd).map(|(a, b)| a * b).sum();
                let cos = if vn == 0.0 || qn == 0.0 { 0.0 } else { dot / (vn * qn) };
                (1.0 - cos, i)
            })
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let yes = d[..k].iter().filter(|(_, i)| labels[*i]).count();
        yes > k - yes
    }

    #[test]
    fn matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mk = |rng: &mut ChaCha8Rng| {
            // small integer grid so exact distance ties occur
            SparseVector::from_pairs(
                (0..8)
                    .filter_map(|i| rng.gen_bool(0.4).then(|| (i, rng.gen_range(1..4) as f64)))
                    .collect(),
            )
        };
        let vs: Vec<_> = (0..60).map(|_| mk(&mut rng)).collect();
        let labels: Vec<bool> = (0..60).map(|_| rng.gen_bool(0.3)).collect();
        for k in [1, 2, 5] {
            let m = KnnModel::fit(vs.clone(), labels.clone(), k).unwrap();
            for _ in 0..100 {
                let q = mk(&mut rng);
                assert_eq!(knn_predict(&m, &q), oracle(&vs, &labels, k, &q));
            }
        }
    }
}
