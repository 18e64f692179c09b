use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{ProductionIndex, TestCase};

/// Items (production method signatures, lines, ...) covered by each test.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMap {
    items: BTreeMap<String, BTreeSet<String>>,
}

impl CoverageMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, test: impl Into<String>, item: impl Into<String>) {
        self.items.entry(test.into()).or_default().insert(item.into());
    }

    /// Register a test with no covered items.
    pub fn insert_test(&mut self, test: impl Into<String>) {
        self.items.entry(test.into()).or_default();
    }

    pub fn get(&self, test: &str) -> Result<&BTreeSet<String>> {
        self.items
            .get(test)
            .ok_or_else(|| Error::CoverageMissing(test.to_string()))
    }

    pub fn contains(&self, test: &str) -> bool {
        self.items.contains_key(test)
    }

    pub fn tests(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Tab-separated `test_id<TAB>item_id` lines, UTF-8, no header.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut map = CoverageMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [test, item] if !test.is_empty() && !item.is_empty() => map.insert(*test, *item),
                _ => {
                    return Err(Error::CoverageFormat {
                        line: i + 1,
                        message: "expected `test_id<TAB>item_id`".into(),
                    })
                }
            }
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CoverageMap::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (t, items) in &self.items {
            for i in items {
                out.push_str(t);
                out.push('\t');
                out.push_str(i);
                out.push('\n');
            }
        }
        out
    }
}

fn nonempty<'a>(cov: &'a CoverageMap, test: &str) -> Result<&'a BTreeSet<String>> {
    let c = cov.get(test)?;
    if c.is_empty() {
        return Err(Error::CoverageUndefined(test.to_string()));
    }
    Ok(c)
}

/// `|C(t1) ∩ C(t2)| / |C(t1)|`.
pub fn pair_redundancy(t1: &str, t2: &str, cov: &CoverageMap) -> Result<f64> {
    let a = nonempty(cov, t1)?;
    let b = cov.get(t2)?;
    Ok(a.intersection(b).count() as f64 / a.len() as f64)
}

/// `|C(t) ∩ ⋃_{u≠t} C(u)| / |C(t)|` over the given suite. Suite members
/// without coverage entries contribute nothing.
pub fn suite_redundancy<S: AsRef<str>>(t: &str, suite: &[S], cov: &CoverageMap) -> Result<f64> {
    let own = nonempty(cov, t)?;
    let mut others: BTreeSet<&str> = BTreeSet::new();
    for u in suite.iter().map(AsRef::as_ref).filter(|u| *u != t) {
        if let Ok(items) = cov.get(u) {
            others.extend(items.iter().map(String::as_str));
        }
    }
    let shared = own.iter().filter(|i| others.contains(i.as_str())).count();
    Ok(shared as f64 / own.len() as f64)
}

/// Production methods reachable from each test's production calls within
/// `depth` hops (1 = directly called methods only).
pub fn static_coverage(tests: &[TestCase], index: &ProductionIndex, depth: usize) -> CoverageMap {
    let depth = depth.max(1);
    let mut map = CoverageMap::new();
    for t in tests {
        map.insert_test(&t.id);
        let mut covered: BTreeSet<String> = t
            .invocations
            .iter()
            .filter_map(|inv| {
                let ty = inv.receiver_type.as_deref()?;
                index.call_signature(ty, &inv.callee_name, inv.arg_count)
            })
            .collect();
        let mut frontier: Vec<String> = covered.iter().cloned().collect();
        for _ in 1..depth {
            let mut next = Vec::new();
            for sig in &frontier {
                for callee in index.callees(sig) {
                    if covered.insert(callee.clone()) {
                        next.push(callee);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        for item in covered {
            map.insert(&t.id, item);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::java::parse_java;
    use proptest::prelude::*;

    fn cov(entries: &[(&str, &[&str])]) -> CoverageMap {
        let mut m = CoverageMap::new();
        for (t, items) in entries {
            m.insert_test(*t);
            for i in *items {
                m.insert(*t, *i);
            }
        }
        m
    }

    #[test]
    fn pair_redundancy_examples() {
        let m = cov(&[("t1", &["a", "b"]), ("t2", &["a", "b", "c"]), ("t3", &["x"])]);
        assert_eq!(pair_redundancy("t1", "t2", &m).unwrap(), 1.0);
        assert!((pair_redundancy("t2", "t1", &m).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pair_redundancy("t1", "t3", &m).unwrap(), 0.0);
        assert!(matches!(pair_redundancy("t1", "zz", &m), Err(Error::CoverageMissing(_))));
    }

    #[test]
    fn empty_coverage_is_undefined() {
        let m = cov(&[("t1", &[]), ("t2", &["a"])]);
        assert!(matches!(pair_redundancy("t1", "t2", &m), Err(Error::CoverageUndefined(_))));
        assert!(matches!(suite_redundancy("t1", &["t2"], &m), Err(Error::CoverageUndefined(_))));
    }

    #[test]
    fn suite_redundancy_examples() {
        let m = cov(&[("t", &["a", "b"]), ("u", &["b"]), ("v", &["c"])]);
        assert_eq!(suite_redundancy("t", &["t", "u", "v"], &m).unwrap(), 0.5);
        let m2 = cov(&[("t", &["a", "b"]), ("u", &["a", "b", "c"])]);
        assert_eq!(suite_redundancy("t", &["t", "u"], &m2).unwrap(), 1.0);
        assert_eq!(suite_redundancy("t", &["t"], &m2).unwrap(), 0.0);
    }

    #[test]
    fn tsv_round_trip_and_errors() {
        let m = CoverageMap::parse_tsv("t1\ta\nt1\tb\n\nt2\ta\n").unwrap();
        assert_eq!(m.get("t1").unwrap().len(), 2);
        assert_eq!(CoverageMap::parse_tsv(&m.to_tsv()).unwrap(), m);
        let err = CoverageMap::parse_tsv("t1\ta\nbroken\n").unwrap_err();
        assert!(matches!(err, Error::CoverageFormat { line: 2, .. }));
    }

    fn chain_index() -> (Vec<TestCase>, ProductionIndex) {
        let prod = parse_java(
            "P.java".into(),
            "class P { void m1(){ m2(); } void m2(){ m1(); m3(); } void m3(){} }",
        );
        let test_src = "class PTest { @Test void t(){ P p = new P(); p.m1(); } }";
        let tf = parse_java("PTest.java".into(), test_src);
        let index = ProductionIndex::from_files(&[prod], &[tf]);
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("PTest.java"), test_src).unwrap();
        let mut tests = crate::facts::parse_test_sources(&[dir.path()]).unwrap().tests;
        index.annotate(&mut tests);
        (tests, index)
    }

    #[test]
    fn static_coverage_follows_calls_and_terminates_on_cycles() {
        let (tests, index) = chain_index();
        let id = tests[0].id.clone();
        let d1 = static_coverage(&tests, &index, 1);
        assert_eq!(d1.get(&id).unwrap().iter().collect::<Vec<_>>(), vec!["P.m1/0"]);
        let d2 = static_coverage(&tests, &index, 2);
        assert_eq!(d2.get(&id).unwrap().len(), 2);
        let d10 = static_coverage(&tests, &index, 10);
        assert_eq!(d10.get(&id).unwrap().len(), 3);
        for k in 1..5 {
            let a = static_coverage(&tests, &index, k);
            let b = static_coverage(&tests, &index, k + 1);
            assert!(a.get(&id).unwrap().is_subset(b.get(&id).unwrap()));
        }
    }

    proptest! {
        #[test]
        fn self_pair_redundancy_is_one(items in prop::collection::btree_set("[a-e]", 1..5)) {
            let mut m = CoverageMap::new();
            for i in &items { m.insert("t", i.clone()); }
            prop_assert_eq!(pair_redundancy("t", "t", &m).unwrap(), 1.0);
        }

        #[test]
        fn suite_redundancy_grows_with_suite(
            own in prop::collection::btree_set(0u8..8, 1..5),
            others in prop::collection::vec(prop::collection::btree_set(0u8..8, 0..5), 0..5),
        ) {
            let mut m = CoverageMap::new();
            for i in &own { m.insert("t", i.to_string()); }
            let mut suite = vec!["t".to_string()];
            let mut last = suite_redundancy("t", &suite, &m).unwrap();
            for (k, o) in others.iter().enumerate() {
                let id = format!("u{k}");
                m.insert_test(&id);
                for i in o { m.insert(&id, i.to_string()); }
                suite.push(id);
                let now = suite_redundancy("t", &suite, &m).unwrap();
                prop_assert!(now >= last);
                last = now;
            }
        }
    }
}
