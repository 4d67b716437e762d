//! Run manifest: every output file is listed with a checksum, alongside the
//! effective configuration and its hash, so a run is reproducible and
//! verifiable from the manifest alone. No timestamps: identical inputs must
//! produce byte-identical outputs.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;

/// FNV-1a, 64 bit: an integrity fingerprint for regression diffs (not a
/// cryptographic hash).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Debug, Serialize)]
struct FileEntry {
    bytes: usize,
    fnv1a64: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    config_fnv1a64: String,
    seed: u64,
    files: BTreeMap<String, FileEntry>,
}

/// Write all output files plus `manifest.json` into `out_dir`.
pub fn write_run(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    files: &[(String, Vec<u8>)],
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut entries = BTreeMap::new();
    for (name, contents) in files {
        fs::write(out_dir.join(name), contents)?;
        entries.insert(
            name.clone(),
            FileEntry {
                bytes: contents.len(),
                fnv1a64: format!("{:016x}", fnv1a64(contents)),
            },
        );
    }
    let config_text = serde_json::to_string(config).expect("config serializes");
    let manifest = Manifest {
        tool: "wickheat",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        config_fnv1a64: format!("{:016x}", fnv1a64(config_text.as_bytes())),
        seed: config.seed,
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(out_dir.join("manifest.json"), text)
}
