//! Opinion-subject extraction by concept spotting.
//!
//! The default spotter is a local gazetteer (surface phrase -> candidate
//! concepts with link probabilities), matched greedily longest-first over each
//! sentence. Spans are chosen independently of the link-probability threshold;
//! the threshold then filters the chosen mentions, which keeps the subject
//! count monotone in the threshold. An optional TagMe REST client with a disk
//! cache lives in [`tagme`].

pub mod tagme;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::Opinion;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SpotterError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("tagme request to {endpoint} failed with status {status} after {attempts} attempts")]
    TagmeStatus {
        endpoint: String,
        status: u16,
        attempts: u32,
    },
    #[error("tagme request to {endpoint} failed: {message}")]
    TagmeTransport { endpoint: String, message: String },
    #[error("tagme response malformed: {0}")]
    TagmeMalformed(String),
}

/// A candidate concept for a surface phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub concept_id: String,
    pub link_probability: Scalar,
}

/// Surface phrase (lowercased, 1-6 tokens) to candidate concepts, each list
/// sorted by descending link probability (ties by concept id).
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<Vec<String>, Vec<Candidate>>,
    max_len: usize,
}

/// Longest phrase a gazetteer surface may span, in tokens.
pub const MAX_SURFACE_TOKENS: usize = 6;

impl Gazetteer {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SpotterError>
    where
        I: IntoIterator<Item = (S, String, Scalar)>,
        S: AsRef<str>,
    {
        let mut gaz = Gazetteer::default();
        for (line, (surface, concept_id, lp)) in entries.into_iter().enumerate() {
            gaz.insert(surface.as_ref(), concept_id, lp, line + 1)?;
        }
        Ok(gaz)
    }

    fn insert(
        &mut self,
        surface: &str,
        concept_id: String,
        link_probability: Scalar,
        line: usize,
    ) -> Result<(), SpotterError> {
        if !(0.0..=1.0).contains(&link_probability) {
            return Err(SpotterError::Malformed {
                line,
                message: format!("link probability {link_probability} outside [0, 1]"),
            });
        }
        let tokens: Vec<String> = surface
            .to_lowercase()
            .split_whitespace()
            .map(str::to_string)
            .collect();
        if tokens.is_empty() || tokens.len() > MAX_SURFACE_TOKENS {
            return Err(SpotterError::Malformed {
                line,
                message: format!(
                    "surface {surface:?} must span 1..={MAX_SURFACE_TOKENS} tokens"
                ),
            });
        }
        self.max_len = self.max_len.max(tokens.len());
        let list = self.entries.entry(tokens).or_default();
        list.push(Candidate {
            concept_id,
            link_probability,
        });
        list.sort_by(|a, b| {
            b.link_probability
                .partial_cmp(&a.link_probability)
                .expect("finite link probabilities")
                .then_with(|| a.concept_id.cmp(&b.concept_id))
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Best candidate for a normalized token window, if the surface is known.
    pub fn best_candidate(&self, tokens: &[String]) -> Option<&Candidate> {
        self.entries.get(tokens).and_then(|c| c.first())
    }
}

/// Load a gazetteer TSV: `surface\tconcept_id\tlink_probability`.
pub fn load_gazetteer(path: &Path) -> Result<Gazetteer, SpotterError> {
    let raw = fs::read_to_string(path).map_err(|source| SpotterError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut gaz = Gazetteer::default();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(SpotterError::Malformed {
                line: lineno,
                message: "expected surface\\tconcept_id\\tlink_probability".into(),
            });
        }
        let lp: Scalar = cols[2].trim().parse().map_err(|_| SpotterError::Malformed {
            line: lineno,
            message: format!("bad link probability {:?}", cols[2]),
        })?;
        gaz.insert(cols[0], cols[1].to_string(), lp, lineno)?;
    }
    Ok(gaz)
}

/// One spotted occurrence of a concept in an opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectMention {
    pub opinion_id: String,
    pub sentence: usize,
    /// Token span, end-exclusive, within the sentence.
    pub span: (usize, usize),
    pub surface: String,
    pub concept_id: String,
    pub link_probability: Scalar,
}

/// All mentions of one concept within one opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionSubject {
    pub concept_id: String,
    pub mentions: Vec<SubjectMention>,
}

/// Spot opinion subjects: greedy longest-match, left-to-right,
/// non-overlapping; per surface the top-link-probability candidate is chosen
/// (ties by concept id); chosen mentions below `lp_threshold` are dropped;
/// mentions of the same concept merge into one subject.
pub fn spot(gaz: &Gazetteer, opinion: &Opinion, lp_threshold: Scalar) -> Vec<OpinionSubject> {
    let mentions = spot_mentions(gaz, opinion, lp_threshold);
    merge_mentions(mentions)
}

fn spot_mentions(gaz: &Gazetteer, opinion: &Opinion, lp_threshold: Scalar) -> Vec<SubjectMention> {
    let mut mentions = Vec::new();
    for sentence in &opinion.sentences {
        let norm: Vec<String> = sentence
            .tokens
            .iter()
            .map(|t| t.normalized.clone())
            .collect();
        let mut i = 0;
        while i < norm.len() {
            let upper = gaz.max_len.min(norm.len() - i);
            let mut advanced = false;
            for len in (1..=upper).rev() {
                if let Some(best) = gaz.best_candidate(&norm[i..i + len]) {
                    if best.link_probability >= lp_threshold {
                        mentions.push(SubjectMention {
                            opinion_id: opinion.id.clone(),
                            sentence: sentence.index,
                            span: (i, i + len),
                            surface: sentence.tokens[i..i + len]
                                .iter()
                                .map(|t| t.surface.as_str())
                                .collect::<Vec<_>>()
                                .join(" "),
                            concept_id: best.concept_id.clone(),
                            link_probability: best.link_probability,
                        });
                    }
                    // span consumed whether or not the candidate survived the
                    // threshold: matching is threshold-independent
                    i += len;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                i += 1;
            }
        }
    }
    mentions
}

/// Group mentions by concept, preserving first-occurrence order.
pub fn merge_mentions(mentions: Vec<SubjectMention>) -> Vec<OpinionSubject> {
    let mut order: Vec<String> = Vec::new();
    let mut by_concept: BTreeMap<String, Vec<SubjectMention>> = BTreeMap::new();
    for m in mentions {
        if !by_concept.contains_key(&m.concept_id) {
            order.push(m.concept_id.clone());
        }
        by_concept.entry(m.concept_id.clone()).or_default().push(m);
    }
    order
        .into_iter()
        .map(|concept_id| OpinionSubject {
            mentions: by_concept.remove(&concept_id).unwrap(),
            concept_id,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Opinion;
    use proptest::prelude::*;

    fn gaz(entries: &[(&str, &str, Scalar)]) -> Gazetteer {
        Gazetteer::from_entries(
            entries
                .iter()
                .map(|(s, c, p)| (*s, c.to_string(), *p))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn distinct_concepts_preserved() {
        let g = gaz(&[("video game", "VG", 0.5), ("computer game", "PCG", 0.4)]);
        let o = Opinion::new("o", "video game and computer game", None);
        let subjects = spot(&g, &o, 0.03);
        let ids: Vec<&str> = subjects.iter().map(|s| s.concept_id.as_str()).collect();
        assert_eq!(ids, vec!["VG", "PCG"]);
    }

    #[test]
    fn same_concept_merges_mentions() {
        let g = gaz(&[("electronic game", "VG", 0.5), ("video game", "VG", 0.5)]);
        let o = Opinion::new("o", "the electronic game beats any video game", None);
        let subjects = spot(&g, &o, 0.03);
        assert_eq!(subjects.len(), 1);
        assert_eq!(subjects[0].concept_id, "VG");
        assert_eq!(subjects[0].mentions.len(), 2);
    }

    #[test]
    fn below_threshold_dropped() {
        let g = gaz(&[("thing", "T", 0.01)]);
        let o = Opinion::new("o", "a thing here", None);
        assert!(spot(&g, &o, 0.03).is_empty());
    }

    #[test]
    fn tie_broken_lexicographically() {
        let g = gaz(&[("x", "Beta", 0.5), ("x", "Alpha", 0.5)]);
        let o = Opinion::new("o", "x marks", None);
        let subjects = spot(&g, &o, 0.03);
        assert_eq!(subjects[0].concept_id, "Alpha");
    }

    #[test]
    fn longest_match_wins() {
        let g = gaz(&[("video", "V", 0.9), ("video game", "VG", 0.2)]);
        let o = Opinion::new("o", "video game", None);
        let subjects = spot(&g, &o, 0.03);
        assert_eq!(subjects.len(), 1);
        assert_eq!(subjects[0].concept_id, "VG");
    }

    #[test]
    fn surface_over_six_tokens_rejected() {
        let err = Gazetteer::from_entries([("a b c d e f g", "X".to_string(), 0.5)]).unwrap_err();
        assert!(err.to_string().contains("tokens"));
    }

    #[test]
    fn link_probability_range_enforced() {
        assert!(Gazetteer::from_entries([("a", "X".to_string(), 1.5)]).is_err());
    }

    /// Reference span selection: enumerate every matching span brute-force,
    /// then repeatedly take the longest span starting at the leftmost
    /// uncovered position.
    fn oracle_spans(gaz: &Gazetteer, norm: &[String]) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = Vec::new();
        for start in 0..norm.len() {
            for end in start + 1..=norm.len() {
                if gaz.best_candidate(&norm[start..end]).is_some() {
                    all.push((start, end));
                }
            }
        }
        let mut chosen = Vec::new();
        let mut pos = 0;
        while pos < norm.len() {
            let best = all
                .iter()
                .filter(|(s, _)| *s == pos)
                .max_by_key(|(s, e)| e - s)
                .copied();
            match best {
                Some(span) => {
                    chosen.push(span);
                    pos = span.1;
                }
                None => pos += 1,
            }
        }
        chosen
    }

    proptest! {
        #[test]
        fn spans_match_bruteforce_and_never_overlap(
            words in proptest::collection::vec("[ab]", 1..8),
            surfaces in proptest::collection::vec(("[ab]( [ab]){0,2}", 0.0f64..=1.0), 1..5),
        ) {
            let g = Gazetteer::from_entries(
                surfaces.iter().enumerate().map(|(i, (s, p))| (s.as_str(), format!("C{i}"), *p)),
            ).unwrap();
            let text = words.join(" ");
            let o = Opinion::new("o", text, None);
            let norm: Vec<String> = o.sentences[0].tokens.iter().map(|t| t.normalized.clone()).collect();
            let got: Vec<(usize, usize)> = spot_mentions(&g, &o, 0.0)
                .into_iter().map(|m| m.span).collect();
            prop_assert_eq!(&got, &oracle_spans(&g, &norm));
            for w in got.windows(2) {
                prop_assert!(w[0].1 <= w[1].0);
            }
        }

        #[test]
        fn raising_threshold_never_adds_subjects(
            t1 in 0.0f64..=1.0,
            t2 in 0.0f64..=1.0,
            lps in proptest::collection::vec(0.0f64..=1.0, 3),
        ) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let g = gaz(&[("alpha", "A", lps[0]), ("beta", "B", lps[1]), ("alpha beta", "AB", lps[2])]);
            let o = Opinion::new("o", "alpha beta then alpha", None);
            let n_lo = spot(&g, &o, lo).len();
            let n_hi = spot(&g, &o, hi).len();
            prop_assert!(n_hi <= n_lo);
        }
    }
}
