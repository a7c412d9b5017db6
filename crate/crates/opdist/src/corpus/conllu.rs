//! CoNLL-U ingestion for pre-parsed dependency trees.
//!
//! Opinion boundaries are marked with `# opinion_id = <id>` comment lines;
//! every sentence after such a marker belongs to that opinion. Head indices
//! must form a single tree (exactly one root, no cycles). POS and deprel
//! strings are preserved verbatim; an NER tag is read from a `NER=...` entry
//! in the MISC column when present.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::CorpusError;

/// One node of a parsed sentence. `head` is 1-based; 0 means root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedToken {
    pub form: String,
    pub normalized: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub head: usize,
    pub deprel: String,
    pub ner: Option<String>,
}

impl ParsedToken {
    /// Tag used by pattern matching: XPOS when present, else UPOS.
    pub fn tag(&self) -> &str {
        if self.xpos.is_empty() || self.xpos == "_" {
            &self.upos
        } else {
            &self.xpos
        }
    }
}

/// A dependency tree over one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub tokens: Vec<ParsedToken>,
}

impl ParsedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Children of 0-based node `idx`, in token order.
    pub fn children(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == idx + 1)
            .map(|(i, _)| i)
    }

    /// 0-based parent of node `idx`, `None` for the root.
    pub fn parent(&self, idx: usize) -> Option<usize> {
        match self.tokens[idx].head {
            0 => None,
            h => Some(h - 1),
        }
    }

    fn validate(&self, context: &str) -> Result<(), CorpusError> {
        let n = self.tokens.len();
        let mut roots = 0usize;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.head > n {
                return Err(CorpusError::Conllu(format!(
                    "{context}: token {} head {} out of range (n={n})",
                    i + 1,
                    t.head
                )));
            }
            if t.head == i + 1 {
                return Err(CorpusError::Conllu(format!(
                    "{context}: token {} is its own head",
                    i + 1
                )));
            }
            if t.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(CorpusError::Conllu(format!(
                "{context}: expected exactly one root, found {roots}"
            )));
        }
        // walk to root from every node; a cycle never reaches it within n steps
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = self.parent(cur) {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(CorpusError::Conllu(format!(
                        "{context}: cyclic heads involving token {}",
                        start + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn ner_from_misc(misc: &str) -> Option<String> {
    for part in misc.split('|') {
        if let Some(v) = part.strip_prefix("NER=") {
            if v != "O" && v != "_" && !v.is_empty() {
                return Some(v.to_string());
            }
            return None;
        }
    }
    None
}

/// Parse a CoNLL-U file into per-opinion parsed sentences.
pub fn load_conllu(path: &Path) -> Result<BTreeMap<String, Vec<ParsedSentence>>, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_conllu(&raw)
}

pub(crate) fn parse_conllu(
    raw: &str,
) -> Result<BTreeMap<String, Vec<ParsedSentence>>, CorpusError> {
    let mut by_opinion: BTreeMap<String, Vec<ParsedSentence>> = BTreeMap::new();
    let mut current_id: Option<String> = None;
    let mut tokens: Vec<ParsedToken> = Vec::new();

    let mut flush = |current_id: &Option<String>,
                     tokens: &mut Vec<ParsedToken>,
                     by_opinion: &mut BTreeMap<String, Vec<ParsedSentence>>|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let id = current_id.clone().ok_or_else(|| {
            CorpusError::Conllu("sentence before any '# opinion_id =' marker".into())
        })?;
        let sent = ParsedSentence {
            tokens: std::mem::take(tokens),
        };
        sent.validate(&format!("opinion {id}"))?;
        by_opinion.entry(id).or_default().push(sent);
        Ok(())
    };

    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            flush(&current_id, &mut tokens, &mut by_opinion)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("opinion_id") {
                let id = rest.trim_start_matches([' ', '=']).trim();
                if id.is_empty() {
                    return Err(CorpusError::Malformed {
                        line: lineno,
                        message: "empty opinion_id".into(),
                    });
                }
                flush(&current_id, &mut tokens, &mut by_opinion)?;
                current_id = Some(id.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(CorpusError::Malformed {
                line: lineno,
                message: format!("expected 10 tab-separated columns, got {}", cols.len()),
            });
        }
        // skip multiword-token ranges (1-2) and empty nodes (1.1)
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let head: usize = cols[6].parse().map_err(|_| CorpusError::Malformed {
            line: lineno,
            message: format!("bad HEAD column {:?}", cols[6]),
        })?;
        tokens.push(ParsedToken {
            form: cols[1].to_string(),
            normalized: cols[1].to_lowercase(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            head,
            deprel: cols[7].to_string(),
            ner: ner_from_misc(cols[9]),
        });
    }
    flush(&current_id, &mut tokens, &mut by_opinion)?;
    Ok(by_opinion)
}

/// Serialize parsed sentences back to CoNLL-U; `load_conllu` accepts the
/// output and reconstructs equal trees.
pub fn save_conllu(
    parses: &BTreeMap<String, Vec<ParsedSentence>>,
    path: &Path,
) -> Result<(), CorpusError> {
    let mut out = String::new();
    for (id, sentences) in parses {
        out.push_str(&format!("# opinion_id = {id}\n"));
        for sent in sentences {
            for (i, t) in sent.tokens.iter().enumerate() {
                let misc = match &t.ner {
                    Some(tag) => format!("NER={tag}"),
                    None => "_".to_string(),
                };
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t_\t{}\t{}\t_\t{}\n",
                    i + 1,
                    t.form,
                    if t.lemma.is_empty() { "_" } else { &t.lemma },
                    if t.upos.is_empty() { "_" } else { &t.upos },
                    if t.xpos.is_empty() { "_" } else { &t.xpos },
                    t.head,
                    t.deprel,
                    misc
                ));
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = "\
# opinion_id = o1
1\tVideo\tvideo\tNOUN\tNN\t_\t2\tcompound\t_\t_
2\tgame\tgame\tNOUN\tNN\t_\t3\tnsubj\t_\t_
3\tincreases\tincrease\tVERB\tVBZ\t_\t0\troot\t_\t_
4\ttendencies\ttendency\tNOUN\tNNS\t_\t3\tdobj\t_\t_
5\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_
";

    #[test]
    fn valid_sentence_parses() {
        let parses = parse_conllu(VALID).unwrap();
        assert_eq!(parses.len(), 1);
        let sents = &parses["o1"];
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].len(), 5);
        assert_eq!(sents[0].tokens[2].tag(), "VBZ");
        assert_eq!(sents[0].parent(0), Some(1));
    }

    #[test]
    fn cycle_rejected() {
        let cyclic = "\
# opinion_id = o1
1\ta\t_\t_\tNN\t_\t2\tdep\t_\t_
2\tb\t_\t_\tNN\t_\t1\tdep\t_\t_
3\tc\t_\t_\tVB\t_\t0\troot\t_\t_
";
        let err = parse_conllu(cyclic).unwrap_err();
        assert!(err.to_string().contains("cycl"), "{err}");
    }

    #[test]
    fn two_opinion_blocks_grouped() {
        let two = format!(
            "{VALID}\n# opinion_id = o2\n1\tFine\t_\t_\tJJ\t_\t0\troot\t_\t_\n"
        );
        let parses = parse_conllu(&two).unwrap();
        assert_eq!(parses.len(), 2);
        assert_eq!(parses["o2"][0].len(), 1);
    }

    #[test]
    fn sentence_without_marker_rejected() {
        let raw = "1\ta\t_\t_\tNN\t_\t0\troot\t_\t_\n";
        assert!(parse_conllu(raw).is_err());
    }

    #[test]
    fn ner_extracted_from_misc() {
        let raw = "\
# opinion_id = o1
1\tHillary\t_\t_\tNNP\t_\t0\troot\t_\tNER=PERSON|SpaceAfter=No
";
        let parses = parse_conllu(raw).unwrap();
        assert_eq!(parses["o1"][0].tokens[0].ner.as_deref(), Some("PERSON"));
    }

    #[test]
    fn save_load_round_trip_and_mutation_rejected() {
        let parses = parse_conllu(VALID).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.conllu");
        save_conllu(&parses, &path).unwrap();
        let back = load_conllu(&path).unwrap();
        assert_eq!(back, parses);

        // mutate a head to introduce a 1<->2 cycle: must be rejected
        let raw = fs::read_to_string(&path).unwrap();
        let mutated = raw.replace("NN\t_\t3\tnsubj", "NN\t_\t1\tnsubj");
        assert_ne!(raw, mutated);
        assert!(parse_conllu(&mutated).is_err());
    }
}
