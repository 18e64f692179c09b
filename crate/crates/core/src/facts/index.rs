use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::java::{self, JavaFile, Receiver};
use super::{collect_java_files, method_signature, read_sources, FileError, TestCase};
use crate::metrics::text::identifier_terms;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductionMethod {
    pub class: String,
    pub name: String,
    pub arity: usize,
    pub return_type: Option<String>,
    /// Identifier bag: method name, parameters and body identifiers.
    pub tokens: Vec<String>,
    /// Calls made by the body, with lexically resolved receivers.
    pub calls: Vec<(Receiver, String, usize)>,
}

impl ProductionMethod {
    pub fn signature(&self) -> String {
        method_signature(&self.class, &self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductionClass {
    pub name: String,
    pub qualified: String,
    pub path: PathBuf,
    pub superclass: Option<String>,
    pub methods: Vec<ProductionMethod>,
}

/// Production classes keyed by simple name, plus the test-class →
/// class-under-test mapping. Lookups on unknown names return empty results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductionIndex {
    classes: BTreeMap<String, ProductionClass>,
    candidates: BTreeMap<String, BTreeSet<String>>,
    signatures: BTreeMap<String, (String, usize)>,
    document_frequency: BTreeMap<String, usize>,
    documents: usize,
    skipped: Vec<FileError>,
}

static EMPTY_SET: BTreeSet<String> = BTreeSet::new();

pub fn build_production_index<P: AsRef<Path>, Q: AsRef<Path>>(
    test_paths: &[P],
    production_paths: &[Q],
) -> ProductionIndex {
    let mut skipped = Vec::new();
    let prod_files = parse_all(&collect_java_files(production_paths), &mut skipped);
    let test_files = parse_all(&collect_java_files(test_paths), &mut skipped);
    let mut index = ProductionIndex::from_files(&prod_files, &test_files);
    index.skipped = skipped;
    index
}

fn parse_all(files: &[PathBuf], skipped: &mut Vec<FileError>) -> Vec<JavaFile> {
    let parsed: Vec<_> = read_sources(files)
        .into_par_iter()
        .map(|(path, read)| match read {
            Ok(src) => Ok(java::parse_java(path, &src)),
            Err(e) => Err(FileError {
                path,
                message: e.to_string(),
            }),
        })
        .collect();
    let mut out = Vec::new();
    for p in parsed {
        match p {
            Ok(f) => out.push(f),
            Err(e) => {
                log::warn!("{}: {}", e.path.display(), e.message);
                skipped.push(e);
            }
        }
    }
    out
}

impl ProductionIndex {
    pub fn from_files(production: &[JavaFile], tests: &[JavaFile]) -> Self {
        let mut classes = BTreeMap::new();
        for file in production {
            for class in &file.classes {
                if classes.contains_key(&class.name) {
                    log::warn!(
                        "duplicate production class name `{}` in {}; keeping the first",
                        class.name,
                        file.path.display()
                    );
                    continue;
                }
                let methods = class
                    .methods
                    .iter()
                    .map(|m| {
                        let mut tokens = vec![m.name.clone()];
                        tokens.extend(m.signature_tokens.iter().cloned());
                        let mut calls = Vec::new();
                        if let Some(body) = &m.body {
                            tokens.extend(body.tokens.iter().cloned());
                            calls = body
                                .calls
                                .iter()
                                .map(|c| (c.receiver.clone(), c.callee.clone(), c.arg_count))
                                .collect();
                        }
                        ProductionMethod {
                            class: class.name.clone(),
                            name: m.name.clone(),
                            arity: m.arity(),
                            return_type: m.return_type.clone(),
                            tokens,
                            calls,
                        }
                    })
                    .collect();
                classes.insert(
                    class.name.clone(),
                    ProductionClass {
                        name: class.name.clone(),
                        qualified: class.qualified.clone(),
                        path: file.path.clone(),
                        superclass: class.superclass.clone(),
                        methods,
                    },
                );
            }
        }

        let mut index = ProductionIndex {
            classes,
            ..ProductionIndex::default()
        };

        for file in tests {
            let imported = file.imported_types();
            for class in file.classes.iter().filter(|c| c.is_class) {
                let mut set = BTreeSet::new();
                for under_test in naming_candidates(&class.name) {
                    if index.classes.contains_key(&under_test) {
                        set.insert(under_test);
                    }
                }
                for ty in &class.instantiated {
                    let visible = imported.contains(ty) || index.same_package(ty, file);
                    if visible && index.classes.contains_key(ty) {
                        set.insert(ty.clone());
                    }
                }
                index
                    .candidates
                    .entry(class.name.clone())
                    .or_default()
                    .extend(set);
            }
        }

        for class in index.classes.values() {
            for m in &class.methods {
                index
                    .signatures
                    .insert(m.signature(), (class.name.clone(), index.documents));
                index.documents += 1;
                let terms: BTreeSet<String> = identifier_terms(&m.tokens).into_iter().collect();
                for t in terms {
                    *index.document_frequency.entry(t).or_insert(0) += 1;
                }
            }
        }
        index
    }

    fn same_package(&self, ty: &str, file: &JavaFile) -> bool {
        let Some(class) = self.classes.get(ty) else {
            return false;
        };
        let pkg = class
            .qualified
            .rsplit_once('.')
            .map(|(p, _)| p.to_string());
        pkg.is_none() && file.package.is_none() || pkg.as_deref() == file.package.as_deref()
    }

    pub fn classes(&self) -> impl Iterator<Item = &ProductionClass> {
        self.classes.values()
    }

    pub fn class(&self, name: &str) -> Option<&ProductionClass> {
        self.classes.get(name)
    }

    pub fn is_production_type(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    /// Candidate classes under test for a test class (simple name).
    pub fn candidates(&self, test_class: &str) -> &BTreeSet<String> {
        self.candidates.get(test_class).unwrap_or(&EMPTY_SET)
    }

    pub fn skipped_files(&self) -> &[FileError] {
        &self.skipped
    }

    /// Look a method up on a class and its production superclasses,
    /// preferring an exact arity match.
    pub fn resolve_method(&self, class: &str, name: &str, arity: usize) -> Option<&ProductionMethod> {
        let mut seen = BTreeSet::new();
        let mut fallback = None;
        let mut current = Some(class);
        while let Some(c) = current {
            if !seen.insert(c) {
                break;
            }
            let Some(pc) = self.classes.get(c) else { break };
            if let Some(m) = pc.methods.iter().find(|m| m.name == name && m.arity == arity) {
                return Some(m);
            }
            if fallback.is_none() {
                fallback = pc.methods.iter().find(|m| m.name == name);
            }
            current = pc.superclass.as_deref();
        }
        fallback
    }

    /// Identifier bag of a production method signature; empty when unknown.
    pub fn method_tokens(&self, signature: &str) -> &[String] {
        self.signatures
            .get(signature)
            .and_then(|(class, _)| self.classes.get(class))
            .and_then(|c| c.methods.iter().find(|m| m.signature() == signature))
            .map(|m| m.tokens.as_slice())
            .unwrap_or(&[])
    }

    /// Number of production methods, the document count for IDF.
    pub fn document_count(&self) -> usize {
        self.documents
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.document_frequency.get(term).copied().unwrap_or(0)
    }

    /// Resolve a receiver to a type name. `context` is the class whose code
    /// makes the call; implicit receivers resolve to it.
    pub fn resolve_receiver(&self, receiver: &Receiver, context: Option<&str>) -> Option<String> {
        match receiver {
            Receiver::Static(t) | Receiver::Typed(t) => Some(t.clone()),
            Receiver::Implicit => context.map(str::to_string),
            Receiver::Call { on, method, arity } => {
                let owner = self.resolve_receiver(on, context)?;
                let m = self.resolve_method(&owner, method, *arity)?;
                m.return_type
                    .clone()
                    .filter(|t| t != "void")
            }
            Receiver::Unknown => None,
        }
    }

    /// Canonical signature for a call on a production type: the declaring
    /// method's signature when found, else `Type.name/arity`.
    pub fn call_signature(&self, class: &str, method: &str, arity: usize) -> Option<String> {
        if !self.is_production_type(class) {
            return None;
        }
        Some(
            self.resolve_method(class, method, arity)
                .map(ProductionMethod::signature)
                .unwrap_or_else(|| method_signature(class, method, arity)),
        )
    }

    /// Production signatures called directly by a production method.
    pub fn callees(&self, signature: &str) -> Vec<String> {
        let Some((class, _)) = self.signatures.get(signature) else {
            return Vec::new();
        };
        let Some(m) = self.classes[class]
            .methods
            .iter()
            .find(|m| m.signature() == signature)
        else {
            return Vec::new();
        };
        let mut out: Vec<String> = m
            .calls
            .iter()
            .filter_map(|(recv, name, arity)| {
                let owner = self.resolve_receiver(recv, Some(class))?;
                self.call_signature(&owner, name, *arity)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Resolve chained receivers and mark production invocations.
    pub fn annotate(&self, tests: &mut [TestCase]) {
        for t in tests {
            for inv in &mut t.invocations {
                inv.receiver_type = match &inv.receiver {
                    // Unqualified calls in a test class target the test itself.
                    Receiver::Implicit => None,
                    r => self.resolve_receiver(r, None),
                };
                inv.is_production = inv
                    .receiver_type
                    .as_deref()
                    .is_some_and(|ty| self.is_production_type(ty));
                if inv.is_production {
                    let ty = inv.receiver_type.clone().unwrap_or_default();
                    if let Some(m) = self.resolve_method(&ty, &inv.callee_name, inv.arg_count) {
                        // Report the declaring class for inherited methods.
                        inv.receiver_type = Some(m.class.clone());
                    }
                }
            }
        }
    }
}

fn naming_candidates(test_class: &str) -> Vec<String> {
    let mut out = Vec::new();
    for suffix in ["Tests", "Test", "TestCase", "IT"] {
        if let Some(base) = test_class.strip_suffix(suffix) {
            if !base.is_empty() {
                out.push(base.to_string());
            }
        }
    }
    if let Some(base) = test_class.strip_prefix("Test") {
        if !base.is_empty() {
            out.push(base.to_string());
        }
    }
    out
}
