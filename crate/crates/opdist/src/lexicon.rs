//! Word-level sentiment scores and the polarity-shifter set.
//!
//! The lexicon is a plain TSV (`word\tscore`, scores in [-1, 1]) so any
//! third-party lexicon can be dropped in; a small open default ships with the
//! crate for tests and demos. Shifters are one phrase (1-2 tokens) per line;
//! the bundled default set has the 27 stock phrases.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{Sentence, Token};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: score {score} outside [-1, 1]")]
    ScoreRange { line: usize, score: Scalar },
}

/// Map from normalized (lowercased) word to a sentiment score in [-1, 1].
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    scores: HashMap<String, Scalar>,
    /// Number of entries that overrode an earlier duplicate during load.
    pub override_count: usize,
}

impl SentimentLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Scalar)>) -> Self {
        let mut lex = SentimentLexicon::default();
        for (word, score) in entries {
            debug_assert!((-1.0..=1.0).contains(&score));
            if lex.scores.insert(word.to_lowercase(), score).is_some() {
                lex.override_count += 1;
            }
        }
        lex
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, normalized: &str) -> Option<Scalar> {
        self.scores.get(normalized).copied()
    }
}

/// The bundled default lexicon.
pub fn default_lexicon() -> SentimentLexicon {
    parse_lexicon(include_str!("../resources/lexicon.tsv")).expect("bundled lexicon is valid")
}

/// Load a `word\tscore` TSV. Later duplicates override earlier ones; the
/// override count is kept on the result.
pub fn load_sentiment_lexicon(path: &Path) -> Result<SentimentLexicon, LexiconError> {
    let raw = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon(&raw)
}

fn parse_lexicon(raw: &str) -> Result<SentimentLexicon, LexiconError> {
    let mut lex = SentimentLexicon::default();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (word, score_str) = line.split_once('\t').ok_or(LexiconError::Malformed {
            line: lineno,
            message: "expected word\\tscore".into(),
        })?;
        let score: Scalar = score_str
            .trim()
            .parse()
            .map_err(|_| LexiconError::Malformed {
                line: lineno,
                message: format!("bad score {score_str:?}"),
            })?;
        if !(-1.0..=1.0).contains(&score) {
            return Err(LexiconError::ScoreRange {
                line: lineno,
                score,
            });
        }
        if lex.scores.insert(word.to_lowercase(), score).is_some() {
            lex.override_count += 1;
        }
    }
    Ok(lex)
}

/// Sentiment score of a token, if it is a lexicon word.
pub fn word_polarity(lex: &SentimentLexicon, token: &Token) -> Option<Scalar> {
    lex.score(&token.normalized)
}

/// Set of polarity-shifter phrases (1-2 tokens, lowercased).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShifterSet {
    phrases: BTreeSet<Vec<String>>,
    max_len: usize,
}

impl ShifterSet {
    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        let mut max_len = 0;
        for p in phrases {
            let toks: Vec<String> = p
                .as_ref()
                .to_lowercase()
                .split_whitespace()
                .map(|t| t.to_string())
                .collect();
            if toks.is_empty() {
                continue;
            }
            max_len = max_len.max(toks.len());
            set.insert(toks);
        }
        ShifterSet {
            phrases: set,
            max_len,
        }
    }

    pub fn empty() -> Self {
        ShifterSet::default()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains_phrase(&self, tokens: &[String]) -> bool {
        self.phrases.contains(tokens)
    }

    pub fn iter(&self) -> impl Iterator<Item = String> + '_ {
        self.phrases.iter().map(|p| p.join(" "))
    }
}

/// The bundled default shifter set (27 phrases).
pub fn default_shifters() -> ShifterSet {
    ShifterSet::from_phrases(include_str!("../resources/shifters.txt").lines())
}

/// Load shifters, one phrase per line; blank lines ignored.
pub fn load_shifters(path: &Path) -> Result<ShifterSet, LexiconError> {
    let raw = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ShifterSet::from_phrases(raw.lines()))
}

/// Token positions where a shifter phrase starts, ascending. At each position
/// the longest phrase wins and the scan resumes past it, so a bigram like
/// "higher than" is never shadowed by a unigram inside it.
pub fn shifter_hits(shifters: &ShifterSet, sentence: &Sentence) -> Vec<usize> {
    let norm: Vec<&String> = sentence.tokens.iter().map(|t| &t.normalized).collect();
    let mut hits = Vec::new();
    let mut i = 0;
    while i < norm.len() {
        let mut matched = 0;
        let upper = shifters.max_len.min(norm.len() - i);
        for len in (1..=upper).rev() {
            let window: Vec<String> = norm[i..i + len].iter().map(|s| (*s).clone()).collect();
            if shifters.contains_phrase(&window) {
                matched = len;
                break;
            }
        }
        if matched > 0 {
            hits.push(i);
            i += matched;
        } else {
            i += 1;
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use std::io::Write;

    fn sentence(text: &str) -> Sentence {
        tokenize(text).remove(0)
    }

    #[test]
    fn default_shifters_has_27_phrases() {
        let set = default_shifters();
        assert_eq!(set.len(), 27);
        for p in ["no", "n't", "outweigh", "higher than", "re-housed"] {
            let toks: Vec<String> = p.split_whitespace().map(str::to_string).collect();
            assert!(set.contains_phrase(&toks), "missing {p}");
        }
    }

    #[test]
    fn lexicon_parse_and_lookup() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"good\t1.0\n").unwrap();
        let lex = load_sentiment_lexicon(f.path()).unwrap();
        assert_eq!(lex.score("good"), Some(1.0));
        assert_eq!(lex.override_count, 0);
    }

    #[test]
    fn duplicate_overrides_with_warning_count() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"bad\t-1.0\nBad\t-0.5\n").unwrap();
        let lex = load_sentiment_lexicon(f.path()).unwrap();
        assert_eq!(lex.score("bad"), Some(-0.5));
        assert_eq!(lex.override_count, 1);
    }

    #[test]
    fn out_of_range_score_names_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"ok\t0.5\nx\t2.0\n").unwrap();
        assert!(matches!(
            load_sentiment_lexicon(f.path()).unwrap_err(),
            LexiconError::ScoreRange { line: 2, .. }
        ));
    }

    #[test]
    fn word_polarity_normalizes() {
        let lex = SentimentLexicon::from_entries([
            ("good".to_string(), 1.0),
            ("awful".to_string(), -0.9),
        ]);
        let s = sentence("Good tables are awful");
        assert_eq!(word_polarity(&lex, &s.tokens[0]), Some(1.0));
        assert_eq!(word_polarity(&lex, &s.tokens[1]), None);
        assert_eq!(word_polarity(&lex, &s.tokens[3]), Some(-0.9));
    }

    #[test]
    fn shifter_hits_contraction() {
        let set = default_shifters();
        let s = sentence("it isn't good");
        assert_eq!(shifter_hits(&set, &s), vec![2]);
    }

    #[test]
    fn shifter_hits_bigram_longest_first() {
        let set = ShifterSet::from_phrases(["higher than", "higher"]);
        let s = sentence("higher than x");
        assert_eq!(shifter_hits(&set, &s), vec![0]);
    }

    #[test]
    fn no_shifters_no_hits() {
        let set = default_shifters();
        let s = sentence("all fine here");
        assert!(shifter_hits(&set, &s).is_empty());
    }

    #[test]
    fn duplicate_phrases_collapse_and_empty_file_disables() {
        let set = ShifterSet::from_phrases(["not", "not"]);
        assert_eq!(set.len(), 1);
        let empty = ShifterSet::from_phrases(Vec::<&str>::new());
        assert!(empty.is_empty());
    }

    #[test]
    fn hit_positions_increasing_and_verbatim() {
        let set = default_shifters();
        let s = sentence("no means no unless stated");
        let hits = shifter_hits(&set, &s);
        assert!(hits.windows(2).all(|w| w[0] < w[1]));
        for &h in &hits {
            let uni = vec![s.tokens[h].normalized.clone()];
            let bi: Vec<String> = s.tokens[h..(h + 2).min(s.tokens.len())]
                .iter()
                .map(|t| t.normalized.clone())
                .collect();
            assert!(set.contains_phrase(&uni) || set.contains_phrase(&bi));
        }
    }
}
