//! Identifier tokenization and TF-IDF textual cohesion.

use std::collections::BTreeMap;

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "null", "package", "private", "protected", "public", "return",
    "short", "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "var", "void", "volatile", "while", "record", "yield",
];

/// Split one identifier on `_`, non-alphanumerics and camelCase
/// boundaries (`parseHTTPRequest` → `parse`, `HTTP`, `Request`).
pub fn split_identifier(ident: &str) -> Vec<String> {
    let mut words = Vec::new();
    for chunk in ident.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let prev = chars[i - 1];
            let cur = chars[i];
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (cur.is_uppercase() && (prev.is_lowercase() || prev.is_ascii_digit()))
                || (cur.is_uppercase() && prev.is_uppercase() && next_lower);
            if boundary {
                words.push(chars[start..i].iter().collect());
                start = i;
            }
        }
        if start < chars.len() {
            words.push(chars[start..].iter().collect());
        }
    }
    words
}

/// Terms of an identifier sequence: split, lowercased, with Java keywords
/// and one-character tokens removed. No stemming.
pub fn identifier_terms<S: AsRef<str>>(identifiers: &[S]) -> Vec<String> {
    identifiers
        .iter()
        .flat_map(|i| split_identifier(i.as_ref()))
        .map(|w| w.to_lowercase())
        .filter(|w| w.chars().count() > 1 && !JAVA_KEYWORDS.contains(&w.as_str()))
        .collect()
}

/// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
pub fn smoothed_idf(documents: usize, df: usize) -> f64 {
    ((1.0 + documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

fn tfidf_vector<'a>(terms: &'a [String], idf: &dyn Fn(&str) -> f64) -> BTreeMap<&'a str, f64> {
    let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
    for t in terms {
        *tf.entry(t.as_str()).or_insert(0.0) += 1.0;
    }
    for (t, w) in tf.iter_mut() {
        *w *= idf(t);
    }
    tf
}

pub fn cosine(a: &BTreeMap<&str, f64>, b: &BTreeMap<&str, f64>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(t, x)| b.get(t).map(|y| x * y))
        .sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

/// Mean pairwise cosine similarity between TF-IDF vectors of the given
/// term documents. `None` with fewer than two documents.
pub fn textual_cohesion(documents: &[Vec<String>], idf: &dyn Fn(&str) -> f64) -> Option<f64> {
    if documents.len() < 2 {
        return None;
    }
    let vectors: Vec<_> = documents.iter().map(|d| tfidf_vector(d, idf)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            sum += cosine(&vectors[i], &vectors[j]);
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_camel_snake_and_acronyms() {
        assert_eq!(split_identifier("parseHTTPRequest"), vec!["parse", "HTTP", "Request"]);
        assert_eq!(split_identifier("MAX_VALUE"), vec!["MAX", "VALUE"]);
        assert_eq!(split_identifier("getX"), vec!["get", "X"]);
        assert_eq!(split_identifier("utf8Decoder"), vec!["utf8", "Decoder"]);
    }

    #[test]
    fn terms_drop_keywords_and_short_tokens() {
        assert_eq!(
            identifier_terms(&["isNew", "getX", "totalAmount", "a"]),
            vec!["is", "get", "total", "amount"]
        );
    }

    fn idf(_: &str) -> f64 {
        1.0
    }

    #[test]
    fn identical_documents_are_fully_cohesive() {
        let d = vec!["total".to_string(), "amount".to_string()];
        let c = textual_cohesion(&[d.clone(), d], &idf).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_documents_have_zero_cohesion() {
        let a = vec!["total".to_string()];
        let b = vec!["socket".to_string()];
        assert_eq!(textual_cohesion(&[a, b], &idf), Some(0.0));
    }

    #[test]
    fn singleton_has_no_cohesion() {
        assert_eq!(textual_cohesion(&[vec!["x".into()]], &idf), None);
    }

    proptest! {
        // Cosine depends only on co-occurrence structure: relabelling terms
        // through a bijection (with df carried along) changes nothing.
        #[test]
        fn cohesion_invariant_under_term_bijection(
            docs in prop::collection::vec(prop::collection::vec(0u8..6, 0..8), 2..5),
            shift in 1u8..50,
        ) {
            let vocab = |d: &Vec<u8>, s: u8| d.iter().map(|t| format!("t{}", t.wrapping_add(s))).collect::<Vec<_>>();
            let base: Vec<_> = docs.iter().map(|d| vocab(d, 0)).collect();
            let renamed: Vec<_> = docs.iter().map(|d| vocab(d, shift)).collect();
            let df = |docs: &Vec<Vec<String>>, t: &str| docs.iter().filter(|d| d.iter().any(|x| x == t)).count();
            let idf_a = |t: &str| smoothed_idf(base.len(), df(&base, t));
            let idf_b = |t: &str| smoothed_idf(renamed.len(), df(&renamed, t));
            let a = textual_cohesion(&base, &idf_a).unwrap();
            let b = textual_cohesion(&renamed, &idf_b).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
