//! Okapi BM25 over pre-tokenized documents.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// How negative inverse document frequencies are handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "epsilon")]
pub enum IdfFloor {
    /// Negative IDF values become zero.
    Zero,
    /// Negative IDF values become `epsilon` times the mean IDF of the vocabulary.
    MeanFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    pub idf_floor: IdfFloor,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params {
            k1: 1.5,
            b: 0.75,
            idf_floor: IdfFloor::Zero,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bm25 {
    params: Bm25Params,
    term_freqs: Vec<HashMap<String, usize>>,
    doc_len: Vec<usize>,
    avg_len: f64,
    idf: HashMap<String, f64>,
}

impl Bm25 {
    pub fn new(docs: &[Vec<String>], params: Bm25Params) -> Self {
        let mut term_freqs = Vec::with_capacity(docs.len());
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let mut tf: HashMap<String, usize> = HashMap::new();
            for t in doc {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for t in tf.keys() {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
            term_freqs.push(tf);
        }
        let doc_len: Vec<usize> = docs.iter().map(Vec::len).collect();
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            doc_len.iter().sum::<usize>() as f64 / docs.len() as f64
        };
        let n = docs.len() as f64;
        let mut idf: HashMap<String, f64> = doc_freq
            .into_iter()
            .map(|(t, df)| (t, ((n - df as f64 + 0.5) / (df as f64 + 0.5)).ln()))
            .collect();
        let floor = match params.idf_floor {
            IdfFloor::Zero => 0.0,
            IdfFloor::MeanFraction(eps) if !idf.is_empty() => {
                eps * idf.values().sum::<f64>() / idf.len() as f64
            }
            IdfFloor::MeanFraction(_) => 0.0,
        };
        for v in idf.values_mut() {
            if *v < 0.0 {
                *v = floor;
            }
        }
        Bm25 {
            params,
            term_freqs,
            doc_len,
            avg_len,
            idf,
        }
    }

    pub fn len(&self) -> usize {
        self.doc_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_len.is_empty()
    }

    pub fn idf(&self, term: &str) -> f64 {
        self.idf.get(term).copied().unwrap_or(0.0)
    }

    /// Score of every document for the query; repeated query terms count repeatedly.
    pub fn scores(&self, query: &[String]) -> Vec<f64> {
        let Bm25Params { k1, b, .. } = self.params;
        (0..self.len())
            .map(|d| {
                let norm = k1
                    * (1.0 - b + b * self.doc_len[d] as f64 / self.avg_len.max(f64::MIN_POSITIVE));
                query
                    .iter()
                    .map(|q| {
                        let tf = self.term_freqs[d].get(q).copied().unwrap_or(0) as f64;
                        self.idf(q) * tf * (k1 + 1.0) / (tf + norm)
                    })
                    .sum()
            })
            .collect()
    }

    /// Document indices by descending score, ties by ascending index.
    pub fn rank(&self, query: &[String]) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.scores(query).into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.split_whitespace().map(String::from).collect())
            .collect()
    }

    #[test]
    fn no_shared_terms_gives_zero_and_index_order() {
        let idx = Bm25::new(&docs(&["a b", "c", "d e f"]), Bm25Params::default());
        let ranked = idx.rank(&["zzz".to_string()]);
        assert_eq!(ranked.iter().map(|r| r.0).collect::<Vec<_>>(), [0, 1, 2]);
        assert!(ranked.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn common_terms_are_floored() {
        let d = docs(&["a x", "a y", "a z", "w"]);
        let zero = Bm25::new(&d, Bm25Params::default());
        assert_eq!(zero.idf("a"), 0.0);
        let eps = Bm25::new(
            &d,
            Bm25Params {
                idf_floor: IdfFloor::MeanFraction(0.25),
                ..Bm25Params::default()
            },
        );
        assert!(eps.idf("a") > 0.0);
    }
}
