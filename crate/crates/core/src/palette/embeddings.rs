use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 512;

/// Category names with their sentence embeddings, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    names: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::InvalidPalette("embedding table has no entries".into()));
        };
        let dim = first.1.len();
        if dim == 0 {
            return Err(Error::InvalidPalette("embedding dimension is zero".into()));
        }
        let mut seen = HashSet::new();
        let mut names = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        for (name, v) in entries {
            if v.len() != dim {
                return Err(Error::InvalidPalette(format!(
                    "{name}: expected {dim} values, found {}",
                    v.len()
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidPalette(format!("duplicate name {name:?}")));
            }
            names.push(name);
            vectors.push(v);
        }
        Ok(EmbeddingTable { dim, names, vectors })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }
}

/// Reads a `name,e0,e1,...` CSV. Row numbers in errors count the header as row 1.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let parse_err = |row: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        msg,
    };

    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(parse_err(1, e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::NoEntries(path.to_path_buf()));
    }
    if &headers[0] != "name" {
        return Err(parse_err(
            1,
            format!("first column must be `name`, found {:?}", &headers[0]),
        ));
    }
    let dim = headers.len() - 1;
    for (k, h) in headers.iter().skip(1).enumerate() {
        if h != format!("e{k}") {
            return Err(parse_err(1, format!("expected column e{k}, found {h:?}")));
        }
    }

    let mut seen = HashSet::new();
    let mut names = Vec::new();
    let mut vectors = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { len, .. } => Error::Dimension {
                path: path.to_path_buf(),
                row,
                expected: dim,
                found: (*len as usize).saturating_sub(1),
            },
            _ => parse_err(row, e.to_string()),
        })?;
        let name = record[0].trim().to_string();
        if name.is_empty() {
            return Err(parse_err(row, "empty name".into()));
        }
        let values = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(k, s)| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(row, format!("e{k}: not a finite number: {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::Dimension {
                path: path.to_path_buf(),
                row,
                expected: dim,
                found: values.len(),
            });
        }
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateName {
                path: path.to_path_buf(),
                row,
                name,
            });
        }
        names.push(name);
        vectors.push(values);
    }
    if names.is_empty() {
        return Err(Error::NoEntries(path.to_path_buf()));
    }
    Ok(EmbeddingTable { dim, names, vectors })
}
