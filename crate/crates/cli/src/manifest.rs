use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use smellml_core::facts::collect_java_files;
use smellml_core::seed::sha256_hex;

/// Record of one CLI run, written whether the run succeeded or not.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub subcommand: String,
    /// Effective options after config-file merging.
    pub config: Value,
    pub config_hash: String,
    pub corpus_hash: Option<String>,
    pub master_seed: Option<u64>,
    pub jobs: Option<usize>,
    pub outputs: Vec<PathBuf>,
    pub started_at: String,
    pub finished_at: String,
    pub exit_code: i32,
    pub error: Option<String>,
    /// Configuration that failed, for pipeline errors.
    pub failing_config: Option<Value>,
    pub results: Option<Value>,
    pub warnings: Vec<String>,
}

/// SHA-256 over canonical JSON; serde_json maps keep keys sorted.
pub fn config_hash(config: &Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

/// Hash of the input corpus. Java roots contribute every `.java` file
/// (path relative to its root, `/`-separated, then contents) in sorted
/// order; other inputs contribute their contents. Unreadable inputs
/// contribute their path only, so the hash never fails.
pub fn corpus_hash(roots: &[&Path], files: &[&Path]) -> String {
    let mut buf = Vec::new();
    for root in roots {
        buf.extend_from_slice(b"root\0");
        for file in collect_java_files(&[root]) {
            let rel = file.strip_prefix(root).unwrap_or(&file);
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            buf.extend_from_slice(rel.join("/").as_bytes());
            buf.push(0);
            buf.extend_from_slice(&fs::read(&file).unwrap_or_default());
            buf.push(0);
        }
    }
    for file in files {
        buf.extend_from_slice(b"file\0");
        match fs::read(file) {
            Ok(bytes) => buf.extend_from_slice(&bytes),
            Err(_) => buf.extend_from_slice(file.to_string_lossy().as_bytes()),
        }
        buf.push(0);
    }
    sha256_hex(&buf)
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
