//! Reading and writing the JSON and CSV artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use twoquery::{read_instance, write_instance, Instance, OrdinalProfile};

use crate::failure::{CliResult, Failure};

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

pub fn load_instance(path: &Path) -> CliResult<Instance> {
    read_instance(&read_bytes(path)?).map_err(|e| Failure::param(format!("{}: {e}", path.display())))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_slice(&read_bytes(path)?).map_err(|e| Failure::param(format!("{}: {e}", path.display())))
}

/// Ordinal JSON (`{"rankings": ...}`); lower-bound layouts carry the same key.
pub fn load_ordinal(path: &Path) -> CliResult<OrdinalProfile> {
    #[derive(serde::Deserialize)]
    struct Doc {
        rankings: Vec<Vec<usize>>,
    }
    let doc: Doc = load_json(path)?;
    let alternatives = doc.rankings.iter().flatten().map(|&j| j + 1).max().unwrap_or(0);
    Ok(OrdinalProfile::new(doc.rankings, alternatives)?)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact types serialize");
    bytes.push(b'\n');
    bytes
}

pub fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write(path, &json_bytes(value))
}

pub fn write_instance_file(path: &Path, inst: &Instance) -> CliResult<()> {
    write(path, &write_instance(inst))
}

/// Writes to `out` or prints to stdout.
pub fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", String::from_utf8(json_bytes(value)).expect("JSON is UTF-8"));
            Ok(())
        }
    }
}

/// Suffixes of the side files written next to instances.
const SIDE_SUFFIXES: [&str; 3] = [".ordinal.json", ".layout.json", ".run.json"];

/// Instance files named directly or found (sorted) in named directories.
pub fn expand_instances(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Failure::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.ends_with(".json") && !SIDE_SUFFIXES.iter().any(|s| name.ends_with(s))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    if out.is_empty() {
        return Err(Failure::param("no instance files given"));
    }
    Ok(out)
}

/// `dir/stem.suffix` for an instance path.
pub fn sibling(dir: &Path, instance: &Path, suffix: &str) -> PathBuf {
    let stem = instance.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    dir.join(format!("{stem}{suffix}"))
}
