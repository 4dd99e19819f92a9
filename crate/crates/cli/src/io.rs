use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use pathpair_core::graph::{Graph, GraphDoc};
use pathpair_core::pairing::{Pairing, PathSystem};
use serde::de::DeserializeOwned;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: malformed JSON at line {line}, column {column}: {detail}")]
    Malformed {
        path: String,
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("{path}: {detail}")]
    Invalid { path: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(2)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Malformed { .. } => "malformed_json",
            CliError::Invalid { .. } => "invalid_input",
            CliError::Io { .. } => "io",
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Process-wide switch for the stderr log.
pub static QUIET: std::sync::atomic::AtomicBool = std::sync::atomic::AtomicBool::new(false);

/// One JSON object per line on stderr.
pub fn log(level: &str, event: &str, fields: serde_json::Value) {
    if QUIET.load(std::sync::atomic::Ordering::Relaxed) && level != "error" {
        return;
    }
    let mut obj = serde_json::Map::new();
    obj.insert("level".into(), level.into());
    obj.insert("event".into(), event.into());
    if let serde_json::Value::Object(extra) = fields {
        obj.extend(extra);
    }
    eprintln!("{}", serde_json::Value::Object(obj));
}

/// Reads a file, inflating it first if it starts with the gzip magic bytes.
pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let raw = std::fs::read(path).map_err(io)?;
    if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn utf8(path: &Path, bytes: &[u8]) -> Result<String, CliError> {
    String::from_utf8(bytes.to_vec()).map_err(|e| CliError::Invalid {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn malformed(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Malformed {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    }
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| malformed(path, e))
}

/// A graph file, as loaded: the graph plus its raw bytes for manifests.
pub struct Loaded<T> {
    pub value: T,
    pub bytes: Vec<u8>,
}

/// JSON graph document or, if the text does not start with `{`, an edge list.
pub fn read_graph(path: &Path) -> Result<Loaded<Graph>, CliError> {
    let bytes = read_bytes(path)?;
    let text = utf8(path, &bytes)?;
    let invalid = |detail: String| CliError::Invalid {
        path: path.display().to_string(),
        detail,
    };
    let graph = if text.trim_start().starts_with('{') {
        let doc: GraphDoc = parse_json(path, &text)?;
        Graph::try_from(doc).map_err(|e| invalid(e.to_string()))?
    } else {
        Graph::from_edge_list(&text).map_err(|e| invalid(e.to_string()))?
    };
    Ok(Loaded { value: graph, bytes })
}

/// `{"pairs": [...]}`, or a generated instance carrying a `pairing` field.
pub fn read_pairing(path: &Path) -> Result<Loaded<Pairing>, CliError> {
    let bytes = read_bytes(path)?;
    let text = utf8(path, &bytes)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    let inner = match value.get("pairing") {
        Some(p) if value.get("pairs").is_none() => p.clone(),
        _ => value,
    };
    let pairing = serde_json::from_value(inner).map_err(|e| CliError::Invalid {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    Ok(Loaded { value: pairing, bytes })
}

pub fn read_paths(path: &Path) -> Result<Loaded<PathSystem>, CliError> {
    let bytes = read_bytes(path)?;
    let text = utf8(path, &bytes)?;
    let system = PathSystem::from_json(&text).map_err(|e| malformed(path, e))?;
    Ok(Loaded { value: system, bytes })
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn gzip(bytes: &[u8]) -> Vec<u8> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(bytes).expect("in-memory write");
    enc.finish().expect("in-memory write")
}

pub fn with_newline(mut text: String) -> Vec<u8> {
    text.push('\n');
    text.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gzip_is_detected_on_read() {
        let dir = std::env::temp_dir().join(format!("pathpair-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let plain = dir.join("plain.json");
        let packed = dir.join("packed.json.gz");
        std::fs::write(&plain, b"{\"routes\":[[0,1]]}").unwrap();
        std::fs::write(&packed, gzip(b"{\"routes\":[[0,1]]}")).unwrap();
        assert_eq!(read_bytes(&plain).unwrap(), read_bytes(&packed).unwrap());
    }

    #[test]
    fn edge_lists_are_accepted_as_graphs() {
        let dir = std::env::temp_dir().join(format!("pathpair-io-el-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.txt");
        std::fs::write(&path, "# n=4\n0 1\n1 2\n").unwrap();
        let g = read_graph(&path).unwrap().value;
        assert_eq!((g.n(), g.edge_count()), (4, 2));
    }
}
