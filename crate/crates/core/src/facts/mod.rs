//! Fact extraction from Java test and production sources.
//!
//! Parsing is purely lexical: receiver types come from local declarations,
//! parameters, fields, `new` expressions and static imports. Calls on the
//! result of other calls are resolved afterwards through the return types
//! recorded in the [`ProductionIndex`].

mod index;
pub mod java;
mod keywords;
mod resources;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};

pub use index::{build_production_index, ProductionClass, ProductionIndex, ProductionMethod};
pub use java::{BodyFacts, Receiver};
pub use keywords::Keywords;
pub use resources::classify_resource_refs;

/// Annotations marking a JUnit 4/5 test method.
const TEST_ANNOTATIONS: [&str; 3] = ["Test", "ParameterizedTest", "RepeatedTest"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResourceKind {
    File,
    Database,
    Network,
    OtherExternal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRef {
    pub kind: ResourceKind,
    pub expression: String,
    /// A state check on the same resource precedes its first use.
    pub state_checked: bool,
    /// Variable or field through which the resource is used, if any.
    pub handle: Option<String>,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invocation {
    pub callee_name: String,
    pub receiver_type: Option<String>,
    pub is_production: bool,
    pub arg_count: usize,
    pub receiver: Receiver,
}

impl Invocation {
    /// `Class.method/arity` for production invocations.
    pub fn production_signature(&self) -> Option<String> {
        if !self.is_production {
            return None;
        }
        let class = self.receiver_type.as_deref()?;
        Some(method_signature(class, &self.callee_name, self.arg_count))
    }
}

pub fn method_signature(class: &str, method: &str, arity: usize) -> String {
    format!("{class}.{method}/{arity}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    /// `project/class/method`, with a `#n` suffix on repeated declarations.
    pub id: String,
    pub project: String,
    pub class_name: String,
    /// Simple name of the declaring class (last segment of `class_name`).
    pub simple_class: String,
    pub method_name: String,
    pub path: PathBuf,
    pub line: usize,
    pub body_tokens: Vec<String>,
    pub invocations: Vec<Invocation>,
    pub resource_refs: Vec<ResourceRef>,
    pub assertion_count: usize,
    pub is_test: bool,
    pub facts: BodyFacts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub tests: Vec<TestCase>,
    /// Files that could not be read; parsing continued without them.
    pub errors: Vec<FileError>,
    /// Files that parsed with syntax errors; their valid parts were used.
    pub warnings: Vec<FileError>,
}

/// Expand files and directories into a sorted, de-duplicated list of
/// `.java` files.
pub fn collect_java_files<P: AsRef<Path>>(paths: &[P]) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            for entry in WalkDir::new(p).sort_by_file_name().into_iter().flatten() {
                if entry.file_type().is_file()
                    && entry.path().extension().is_some_and(|e| e == "java")
                {
                    out.push(entry.into_path());
                }
            }
        } else {
            out.push(p.to_path_buf());
        }
    }
    out.sort();
    out.dedup();
    out
}

pub(crate) fn read_sources(files: &[PathBuf]) -> Vec<(PathBuf, std::io::Result<String>)> {
    files
        .par_iter()
        .map(|p| (p.clone(), std::fs::read_to_string(p)))
        .collect()
}

/// Test-method extraction with a configurable project name and resource
/// keyword set.
#[derive(Debug, Clone)]
pub struct FactExtractor {
    pub project: String,
    pub keywords: Keywords,
}

impl Default for FactExtractor {
    fn default() -> Self {
        FactExtractor {
            project: "default".into(),
            keywords: Keywords::default(),
        }
    }
}

impl FactExtractor {
    pub fn new(project: impl Into<String>, keywords: Keywords) -> Self {
        FactExtractor {
            project: project.into(),
            keywords,
        }
    }

    pub fn parse_test_sources<P: AsRef<Path>>(&self, paths: &[P]) -> Result<ParseOutcome> {
        let files = collect_java_files(paths);
        let sources = read_sources(&files);

        let per_file: Vec<_> = sources
            .into_par_iter()
            .map(|(path, read)| match read {
                Ok(src) => {
                    let file = java::parse_java(path, &src);
                    Ok((self.tests_in(&file), file.has_syntax_errors, file.path))
                }
                Err(e) => Err(FileError {
                    path,
                    message: e.to_string(),
                }),
            })
            .collect();

        let mut outcome = ParseOutcome::default();
        let mut parsed = 0usize;
        for item in per_file {
            match item {
                Ok((tests, syntax_errors, path)) => {
                    parsed += 1;
                    if syntax_errors {
                        log::warn!("{}: syntax errors, using recoverable parts", path.display());
                        outcome.warnings.push(FileError {
                            path,
                            message: "syntax errors".into(),
                        });
                    }
                    outcome.tests.extend(tests);
                }
                Err(e) => {
                    log::warn!("{}: {}", e.path.display(), e.message);
                    outcome.errors.push(e);
                }
            }
        }
        if parsed == 0 {
            return Err(Error::CorpusEmpty);
        }
        dedup_ids(&mut outcome.tests);
        Ok(outcome)
    }

    fn tests_in(&self, file: &java::JavaFile) -> Vec<TestCase> {
        let mut out = Vec::new();
        for class in file.classes.iter().filter(|c| c.is_class) {
            for m in &class.methods {
                let Some(body) = &m.body else { continue };
                if !is_test_method(m) {
                    continue;
                }
                let class_name = match &file.package {
                    Some(p) => format!("{p}.{}", class.display_name),
                    None => class.display_name.clone(),
                };
                let invocations: Vec<Invocation> = body
                    .calls
                    .iter()
                    .map(|c| Invocation {
                        callee_name: c.callee.clone(),
                        receiver_type: match &c.receiver {
                            Receiver::Static(t) | Receiver::Typed(t) => Some(t.clone()),
                            _ => None,
                        },
                        is_production: false,
                        arg_count: c.arg_count,
                        receiver: c.receiver.clone(),
                    })
                    .collect();
                let assertion_count = invocations
                    .iter()
                    .filter(|i| is_assertion(&i.callee_name))
                    .count();
                let mut body_tokens = vec![m.name.clone()];
                body_tokens.extend(body.tokens.iter().cloned());
                let mut test = TestCase {
                    id: format!("{}/{}/{}", self.project, class_name, m.name),
                    project: self.project.clone(),
                    class_name,
                    simple_class: class.name.clone(),
                    method_name: m.name.clone(),
                    path: file.path.clone(),
                    line: m.line,
                    body_tokens,
                    invocations,
                    resource_refs: Vec::new(),
                    assertion_count,
                    is_test: true,
                    facts: body.clone(),
                };
                test.resource_refs = classify_resource_refs(&test, &self.keywords);
                out.push(test);
            }
        }
        out
    }
}

/// Parse with the default keyword set under the project name `default`.
pub fn parse_test_sources<P: AsRef<Path>>(paths: &[P]) -> Result<ParseOutcome> {
    FactExtractor::default().parse_test_sources(paths)
}

pub(crate) fn is_test_method(m: &java::MethodDecl) -> bool {
    if m.annotations
        .iter()
        .any(|a| TEST_ANNOTATIONS.contains(&a.as_str()))
    {
        return true;
    }
    // JUnit 3: public void testXxx() with no parameters.
    m.name.starts_with("test") && m.is_public && !m.is_static && m.is_void() && m.params.is_empty()
}

fn is_assertion(callee: &str) -> bool {
    callee.starts_with("assert") || callee == "fail"
}

fn dedup_ids(tests: &mut [TestCase]) {
    let mut seen = std::collections::HashMap::<String, usize>::new();
    for t in tests.iter_mut() {
        let n = seen.entry(t.id.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            t.id = format!("{}#{}", t.id, n);
        }
    }
}

/// Everything `extract`-style commands need: annotated tests plus the index.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub tests: Vec<TestCase>,
    pub index: ProductionIndex,
    pub errors: Vec<FileError>,
    pub warnings: Vec<FileError>,
}

/// Parse tests, build the production index and resolve production calls.
pub fn extract<P: AsRef<Path>, Q: AsRef<Path>>(
    extractor: &FactExtractor,
    test_paths: &[P],
    production_paths: &[Q],
) -> Result<Extraction> {
    let outcome = extractor.parse_test_sources(test_paths)?;
    let index = build_production_index(test_paths, production_paths);
    let mut tests = outcome.tests;
    index.annotate(&mut tests);
    let mut errors = outcome.errors;
    errors.extend(index.skipped_files().iter().cloned());
    Ok(Extraction {
        tests,
        index,
        errors,
        warnings: outcome.warnings,
    })
}
