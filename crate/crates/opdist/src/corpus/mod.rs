//! Opinion corpora: loading, tokenization, sentence splitting, and ingestion
//! of pre-parsed dependency trees.
//!
//! All values are immutable after load and safe to share read-only across
//! parallel workers.

mod conllu;
mod tokenize;

pub use conllu::{load_conllu, save_conllu, ParsedSentence, ParsedToken};
pub use tokenize::tokenize;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate opinion id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("conllu: {0}")]
    Conllu(String),
}

/// One token of an opinion text.
///
/// `char_span` is a byte-offset range into the owning opinion's `text`; the
/// surface is exactly `text[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Lowercased surface; lookups (lexicon, gazetteer, shifters) use this.
    pub normalized: String,
    pub char_span: (usize, usize),
}

/// One sentence: a contiguous, ordered run of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
}

/// One opinion text with optional gold label and its tokenized sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opinion {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
    pub sentences: Vec<Sentence>,
}

impl Opinion {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<String>) -> Self {
        let text = text.into();
        Opinion {
            id: id.into(),
            sentences: tokenize(&text),
            text,
            label,
        }
    }
}

/// An ordered opinion collection with the set of distinct gold labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub opinions: Vec<Opinion>,
    pub label_set: BTreeSet<String>,
}

impl Dataset {
    pub fn from_opinions(name: impl Into<String>, opinions: Vec<Opinion>) -> Self {
        let label_set = opinions
            .iter()
            .filter_map(|o| o.label.clone())
            .collect::<BTreeSet<_>>();
        Dataset {
            name: name.into(),
            opinions,
            label_set,
        }
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    /// Gold labels as dense integer ids in label_set order; `None` when any
    /// opinion is unlabeled.
    pub fn gold_labels(&self) -> Option<Vec<usize>> {
        let index: Vec<&String> = self.label_set.iter().collect();
        self.opinions
            .iter()
            .map(|o| {
                o.label
                    .as_ref()
                    .and_then(|l| index.iter().position(|k| *k == l))
            })
            .collect()
    }
}

/// On-disk record shape shared by JSONL and the serializer.
#[derive(Debug, Serialize, Deserialize)]
struct OpinionRecord {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

/// Input format for [`load_opinions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

/// Load a corpus file; one opinion per record, order preserved, tokenization
/// and sentence splitting applied.
pub fn load_opinions(path: &Path, format: CorpusFormat) -> Result<Dataset, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let records = match format {
        CorpusFormat::Jsonl => parse_jsonl(&raw)?,
        CorpusFormat::Tsv => parse_tsv(&raw)?,
    };
    let mut seen = BTreeSet::new();
    let mut opinions = Vec::with_capacity(records.len());
    for (line, rec) in records {
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: rec.id });
        }
        opinions.push(Opinion::new(rec.id, rec.text, rec.label));
    }
    Ok(Dataset::from_opinions(name, opinions))
}

/// Serialize a dataset back to JSONL; `load_opinions` on the output
/// reconstructs an equal dataset.
pub fn save_opinions(dataset: &Dataset, path: &Path) -> Result<(), CorpusError> {
    let mut out = String::new();
    for o in &dataset.opinions {
        let rec = OpinionRecord {
            id: o.id.clone(),
            text: o.text.clone(),
            label: o.label.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_jsonl(raw: &str) -> Result<Vec<(usize, OpinionRecord)>, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: OpinionRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                line: lineno,
                message: e.to_string(),
            })?;
        records.push((lineno, rec));
    }
    Ok(records)
}

fn parse_tsv(raw: &str) -> Result<Vec<(usize, OpinionRecord)>, CorpusError> {
    let mut lines = raw.lines().enumerate();
    let header = lines.next().ok_or(CorpusError::Malformed {
        line: 1,
        message: "missing header row (expected id\\tlabel\\ttext)".into(),
    })?;
    let cols: Vec<&str> = header.1.split('\t').collect();
    if cols != ["id", "label", "text"] {
        return Err(CorpusError::Malformed {
            line: 1,
            message: format!("expected header id\\tlabel\\ttext, got {:?}", header.1),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let id = parts.next().unwrap_or_default();
        let label = parts.next().ok_or(CorpusError::Malformed {
            line: lineno,
            message: "missing label column".into(),
        })?;
        let text = parts.next().ok_or(CorpusError::Malformed {
            line: lineno,
            message: "missing text column".into(),
        })?;
        if id.is_empty() {
            return Err(CorpusError::Malformed {
                line: lineno,
                message: "empty id".into(),
            });
        }
        records.push((
            lineno,
            OpinionRecord {
                id: id.to_string(),
                text: text.to_string(),
                label: if label.is_empty() {
                    None
                } else {
                    Some(label.to_string())
                },
            },
        ));
    }
    Ok(records)
}
