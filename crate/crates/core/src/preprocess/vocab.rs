use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of terms with a term-to-index map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        Vocabulary::from_terms(terms)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

impl Vocabulary {
    /// Keeps the first occurrence of each term, preserving order.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for t in terms {
            let t = t.into();
            if !vocab.index.contains_key(&t) {
                vocab.index.insert(t.clone(), vocab.terms.len());
                vocab.terms.push(t);
            }
        }
        vocab
    }

    /// Sorted vocabulary of every token in `docs`, independent of document order.
    pub fn build<'a, D>(docs: D) -> Self
    where
        D: IntoIterator<Item = &'a [String]>,
    {
        let set: BTreeSet<&str> = docs.into_iter().flatten().map(String::as_str).collect();
        Vocabulary::from_terms(set)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn index_of(&self, term: &str) -> Result<usize> {
        self.get(term).ok_or_else(|| Error::UnknownTerm(term.to_string()))
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Binary presence vector of `tokens`; out-of-vocabulary tokens are ignored.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> BinaryVector {
        BinaryVector::from_indices(tokens.iter().filter_map(|t| self.get(t.as_ref())))
    }
}

/// Sparse 0/1 vector stored as sorted, distinct indices of the ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryVector(Vec<usize>);

impl BinaryVector {
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        BinaryVector(v)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    /// Largest index plus one, i.e. the smallest dimension this vector fits.
    pub fn min_dim(&self) -> usize {
        self.0.last().map_or(0, |i| i + 1)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u8> {
        let mut out = vec![0; dim];
        for &i in &self.0 {
            out[i] = 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab(terms: &[&str]) -> Vocabulary {
        Vocabulary::from_terms(terms.iter().copied())
    }

    #[test]
    fn presence_not_count() {
        let v = vocab(&["a", "b", "c"]);
        assert_eq!(v.vectorize(&["a", "a", "b"]).to_dense(3), [1, 1, 0]);
        assert_eq!(v.vectorize::<&str>(&[]).to_dense(3), [0, 0, 0]);
        assert_eq!(v.vectorize(&["x", "y"]).nnz(), 0);
    }

    #[test]
    fn build_is_sorted_and_unique() {
        let docs = [vec!["b".to_string(), "a".into()], vec!["a".into(), "c".into()]];
        let v = Vocabulary::build(docs.iter().map(Vec::as_slice));
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.get("c"), Some(2));
        assert!(matches!(v.index_of("zz"), Err(Error::UnknownTerm(_))));
    }

    #[test]
    fn serde_as_term_list() {
        let v = vocab(&["x", "y"]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"["x","y"]"#);
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #[test]
        fn vectorize_ignores_duplicates(tokens in prop::collection::vec("[a-e]", 0..20)) {
            let v = vocab(&["a", "b", "c", "d"]);
            let mut dedup = tokens.clone();
            dedup.sort();
            dedup.dedup();
            prop_assert_eq!(v.vectorize(&tokens), v.vectorize(&dedup));
        }
    }
}
