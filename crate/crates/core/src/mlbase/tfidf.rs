use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut v = SparseVector::default();
        for (i, x) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * dense[i]).sum()
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn l2_normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|x| x / n).collect(),
        }
    }
}

/// Cosine similarity of sparse real vectors; 0 if either is zero.
pub fn sparse_cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VectorizerRepr", into = "VectorizerRepr")]
pub struct TfidfVectorizer {
    terms: Vec<String>,
    doc_freq: Vec<u64>,
    n_docs: u64,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VectorizerRepr {
    n_docs: u64,
    terms: Vec<String>,
    doc_freq: Vec<u64>,
}

impl From<VectorizerRepr> for TfidfVectorizer {
    fn from(r: VectorizerRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TfidfVectorizer {
            terms: r.terms,
            doc_freq: r.doc_freq,
            n_docs: r.n_docs,
            index,
        }
    }
}

impl From<TfidfVectorizer> for VectorizerRepr {
    fn from(v: TfidfVectorizer) -> Self {
        VectorizerRepr {
            n_docs: v.n_docs,
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl TfidfVectorizer {
    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<u64> {
        self.column(term).map(|i| self.doc_freq[i])
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self, column: usize) -> f64 {
        (self.n_docs as f64 / self.doc_freq[column] as f64).ln()
    }

    /// `tf(t) * ln(n_docs / df(t))` per known term; unseen terms are ignored
    /// and zero components are not stored.
    pub fn transform<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut tf: BTreeMap<usize, u64> = BTreeMap::new();
        for t in tokens {
            if let Some(&i) = self.index.get(t.as_ref()) {
                *tf.entry(i).or_default() += 1;
            }
        }
        let pairs = tf
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.idf(i)))
            .filter(|(_, x)| *x != 0.0)
            .collect();
        SparseVector::from_pairs(pairs)
    }
}

/// Vocabulary sorted lexicographically; document frequencies per term.
pub fn fit_vectorizer<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<TfidfVectorizer> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for d in docs {
        let uniq: BTreeSet<&str> = d.iter().map(AsRef::as_ref).collect();
        for t in uniq {
            *df.entry(t.to_string()).or_default() += 1;
        }
    }
    let (terms, doc_freq): (Vec<_>, Vec<_>) = df.into_iter().unzip();
    Ok(VectorizerRepr {
        n_docs: docs.len() as u64,
        terms,
        doc_freq,
    }
    .into())
}
