use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ResourceKind;

const DEFAULT_KEYWORDS: &str = include_str!("../../resources/keywords.txt");

/// Type and method names used to recognise external resources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keywords {
    pub file: BTreeSet<String>,
    pub database: BTreeSet<String>,
    pub network: BTreeSet<String>,
    pub other: BTreeSet<String>,
    pub file_guard: BTreeSet<String>,
    pub external_guard: BTreeSet<String>,
}

impl Default for Keywords {
    fn default() -> Self {
        Keywords::parse(DEFAULT_KEYWORDS).expect("shipped keyword file is valid")
    }
}

impl Keywords {
    /// The shipped default configuration as text, for `--print-keywords`
    /// style dumps and as a starting point for edits.
    pub fn default_text() -> &'static str {
        DEFAULT_KEYWORDS
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Keywords::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kw = Keywords {
            file: BTreeSet::new(),
            database: BTreeSet::new(),
            network: BTreeSet::new(),
            other: BTreeSet::new(),
            file_guard: BTreeSet::new(),
            external_guard: BTreeSet::new(),
        };
        let mut section: Option<&mut BTreeSet<String>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(match name.trim() {
                    "file" => &mut kw.file,
                    "database" => &mut kw.database,
                    "network" => &mut kw.network,
                    "other" => &mut kw.other,
                    "file_guard" => &mut kw.file_guard,
                    "external_guard" => &mut kw.external_guard,
                    other => {
                        return Err(Error::Keywords {
                            line: i + 1,
                            message: format!("unknown section [{other}]"),
                        })
                    }
                });
                continue;
            }
            if !line.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$') {
                return Err(Error::Keywords {
                    line: i + 1,
                    message: format!("`{line}` is not a Java identifier"),
                });
            }
            match section.as_deref_mut() {
                Some(set) => {
                    set.insert(line.to_string());
                }
                None => {
                    return Err(Error::Keywords {
                        line: i + 1,
                        message: "keyword before any section heading".into(),
                    })
                }
            }
        }
        Ok(kw)
    }

    /// Resource kind of a type name, if it is a resource type at all.
    /// File takes precedence when a name is listed in several sections.
    pub fn kind_of(&self, type_name: &str) -> Option<ResourceKind> {
        if self.file.contains(type_name) {
            Some(ResourceKind::File)
        } else if self.database.contains(type_name) {
            Some(ResourceKind::Database)
        } else if self.network.contains(type_name) {
            Some(ResourceKind::Network)
        } else if self.other.contains(type_name) {
            Some(ResourceKind::OtherExternal)
        } else {
            None
        }
    }

    pub fn is_guard(&self, kind: ResourceKind, method: &str) -> bool {
        match kind {
            ResourceKind::File => self.file_guard.contains(method),
            _ => self.external_guard.contains(method),
        }
    }

    pub fn is_any_guard(&self, method: &str) -> bool {
        self.file_guard.contains(method) || self.external_guard.contains(method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_documented_families() {
        let kw = Keywords::default();
        assert_eq!(kw.kind_of("FileReader"), Some(ResourceKind::File));
        assert_eq!(kw.kind_of("DriverManager"), Some(ResourceKind::Database));
        assert_eq!(kw.kind_of("Socket"), Some(ResourceKind::Network));
        assert_eq!(kw.kind_of("String"), None);
        assert!(kw.is_guard(ResourceKind::File, "exists"));
        assert!(kw.is_guard(ResourceKind::File, "notExists"));
        assert!(kw.is_guard(ResourceKind::Database, "isClosed"));
        assert!(!kw.is_guard(ResourceKind::Database, "exists"));
    }

    #[test]
    fn rejects_unknown_section_and_orphan_keyword() {
        let err = Keywords::parse("[files]\nFile\n").unwrap_err();
        assert!(matches!(err, Error::Keywords { line: 1, .. }));
        let err = Keywords::parse("File\n").unwrap_err();
        assert!(matches!(err, Error::Keywords { line: 1, .. }));
        let err = Keywords::parse("[file]\nnew File\n").unwrap_err();
        assert!(matches!(err, Error::Keywords { line: 2, .. }));
    }

    #[test]
    fn custom_sections_extend_recognition() {
        let kw = Keywords::parse("[other]\nJedis\n[external_guard]\nping\n").unwrap();
        assert_eq!(kw.kind_of("Jedis"), Some(ResourceKind::OtherExternal));
        assert!(kw.is_guard(ResourceKind::OtherExternal, "ping"));
        assert!(kw.file.is_empty());
    }
}
