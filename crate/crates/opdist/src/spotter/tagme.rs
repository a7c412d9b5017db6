//! Optional TagMe REST client with a content-addressed disk cache.
//!
//! Responses are cached as JSON keyed by the SHA-256 of the annotated text, so
//! reruns are fully offline. Batch annotation fans requests out over a bounded
//! worker pool; cache writes go through a temp file + rename so concurrent
//! writers of identical content are last-write-wins safe.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{SpotterError, SubjectMention};
use crate::corpus::Opinion;
use crate::Scalar;

/// TagMe client configuration.
#[derive(Debug, Clone)]
pub struct TagmeConfig {
    /// Tag endpoint, e.g. `https://tagme.d4science.org/tagme/tag`.
    pub endpoint: String,
    pub token: String,
    pub lang: String,
    pub cache_dir: PathBuf,
    /// Maximum concurrent requests for batch annotation.
    pub max_in_flight: usize,
    pub timeout: Duration,
    /// Base delay for exponential backoff between retry attempts.
    pub backoff_base: Duration,
}

impl TagmeConfig {
    pub fn new(endpoint: impl Into<String>, token: impl Into<String>, cache_dir: PathBuf) -> Self {
        TagmeConfig {
            endpoint: endpoint.into(),
            token: token.into(),
            lang: "en".into(),
            cache_dir,
            max_in_flight: 4,
            timeout: Duration::from_secs(20),
            backoff_base: Duration::from_millis(100),
        }
    }
}

#[derive(Debug, Deserialize)]
struct TagmeResponse {
    #[serde(default)]
    annotations: Vec<TagmeAnnotation>,
}

#[derive(Debug, Deserialize)]
struct TagmeAnnotation {
    spot: String,
    title: Option<String>,
    link_probability: Scalar,
    #[serde(default)]
    start: Option<usize>,
    #[serde(default)]
    end: Option<usize>,
}

fn cache_key(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

fn cache_path(cfg: &TagmeConfig, text: &str) -> PathBuf {
    cfg.cache_dir.join(format!("{}.json", cache_key(text)))
}

fn write_cache(path: &Path, body: &str) -> Result<(), SpotterError> {
    let io_err = |source: std::io::Error| SpotterError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, body).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

/// Map a raw TagMe response body onto subject mentions for `opinion`.
///
/// Annotation character offsets (when present) locate the sentence and token
/// span; otherwise the first occurrence of the spot phrase is used.
/// Annotations that cannot be aligned to the tokenization are skipped.
pub fn mentions_from_response(
    opinion: &Opinion,
    body: &str,
) -> Result<Vec<SubjectMention>, SpotterError> {
    let resp: TagmeResponse =
        serde_json::from_str(body).map_err(|e| SpotterError::TagmeMalformed(e.to_string()))?;
    let mut mentions = Vec::new();
    for ann in resp.annotations {
        let Some(title) = ann.title else { continue };
        let char_range = match (ann.start, ann.end) {
            (Some(s), Some(e)) if s < e => Some((s, e)),
            _ => find_phrase_chars(&opinion.text, &ann.spot),
        };
        let Some((cs, ce)) = char_range else { continue };
        if let Some((sentence, span)) = align_span(opinion, cs, ce) {
            mentions.push(SubjectMention {
                opinion_id: opinion.id.clone(),
                sentence,
                span,
                surface: ann.spot,
                concept_id: title,
                link_probability: ann.link_probability,
            });
        }
    }
    mentions.sort_by_key(|m| (m.sentence, m.span));
    Ok(mentions)
}

fn find_phrase_chars(text: &str, phrase: &str) -> Option<(usize, usize)> {
    let lower = text.to_lowercase();
    let needle = phrase.to_lowercase();
    lower.find(&needle).map(|s| (s, s + needle.len()))
}

/// Smallest token span overlapping the byte range, within one sentence.
fn align_span(opinion: &Opinion, cs: usize, ce: usize) -> Option<(usize, (usize, usize))> {
    for sentence in &opinion.sentences {
        let overlapping: Vec<usize> = sentence
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.char_span.0 < ce && cs < t.char_span.1)
            .map(|(i, _)| i)
            .collect();
        if let (Some(&first), Some(&last)) = (overlapping.first(), overlapping.last()) {
            return Some((sentence.index, (first, last + 1)));
        }
    }
    None
}

/// Annotate one opinion, serving from the disk cache when possible.
pub fn tagme_annotate(
    cfg: &TagmeConfig,
    opinion: &Opinion,
) -> Result<Vec<SubjectMention>, SpotterError> {
    let path = cache_path(cfg, &opinion.text);
    if let Ok(body) = fs::read_to_string(&path) {
        return mentions_from_response(opinion, &body);
    }
    let body = fetch_with_retry(cfg, &opinion.text)?;
    let mentions = mentions_from_response(opinion, &body)?;
    write_cache(&path, &body)?;
    Ok(mentions)
}

fn fetch_with_retry(cfg: &TagmeConfig, text: &str) -> Result<String, SpotterError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(cfg.timeout)
        .build()
        .map_err(|e| SpotterError::TagmeTransport {
            endpoint: cfg.endpoint.clone(),
            message: e.to_string(),
        })?;
    const ATTEMPTS: u32 = 3;
    let mut last_status = 0u16;
    let mut last_message = String::new();
    for attempt in 0..ATTEMPTS {
        if attempt > 0 {
            std::thread::sleep(cfg.backoff_base * 2u32.pow(attempt - 1));
        }
        let result = client
            .get(&cfg.endpoint)
            .query(&[
                ("gcube-token", cfg.token.as_str()),
                ("lang", cfg.lang.as_str()),
                ("text", text),
            ])
            .send();
        match result {
            Ok(resp) if resp.status().is_success() => {
                return resp.text().map_err(|e| SpotterError::TagmeTransport {
                    endpoint: cfg.endpoint.clone(),
                    message: e.to_string(),
                });
            }
            Ok(resp) => last_status = resp.status().as_u16(),
            Err(e) => last_message = e.to_string(),
        }
    }
    if last_status != 0 {
        Err(SpotterError::TagmeStatus {
            endpoint: cfg.endpoint.clone(),
            status: last_status,
            attempts: ATTEMPTS,
        })
    } else {
        Err(SpotterError::TagmeTransport {
            endpoint: cfg.endpoint.clone(),
            message: last_message,
        })
    }
}

/// Annotate opinions concurrently with at most `max_in_flight` requests in
/// flight. Results come back in input order.
pub fn tagme_annotate_batch(
    cfg: &TagmeConfig,
    opinions: &[Opinion],
) -> Vec<Result<Vec<SubjectMention>, SpotterError>> {
    let workers = cfg.max_in_flight.max(1).min(opinions.len().max(1));
    let queue: Arc<Mutex<Vec<usize>>> = Arc::new(Mutex::new((0..opinions.len()).rev().collect()));
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let queue = Arc::clone(&queue);
            let tx = tx.clone();
            scope.spawn(move || loop {
                let next = queue.lock().expect("queue lock").pop();
                let Some(idx) = next else { break };
                let result = tagme_annotate(cfg, &opinions[idx]);
                if tx.send((idx, result)).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut results: Vec<Option<Result<Vec<SubjectMention>, SpotterError>>> =
        (0..opinions.len()).map(|_| None).collect();
    for (idx, res) in rx {
        results[idx] = Some(res);
    }
    results.into_iter().map(|r| r.expect("worker result")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    const FIXTURE: &str = r#"{"annotations":[
        {"spot":"video game","title":"Video game","link_probability":0.5,"start":10,"end":20},
        {"spot":"nothing","title":null,"link_probability":0.9}
    ],"time":4,"lang":"en"}"#;

    #[test]
    fn recorded_response_maps_to_mentions() {
        let o = Opinion::new("o1", "I think a video game helps", None);
        let mentions = mentions_from_response(&o, FIXTURE).unwrap();
        assert_eq!(mentions.len(), 1);
        assert_eq!(mentions[0].concept_id, "Video game");
        assert_eq!(mentions[0].span, (3, 5));
        assert_eq!(mentions[0].link_probability, 0.5);
    }

    #[test]
    fn malformed_json_is_error() {
        let o = Opinion::new("o1", "text", None);
        assert!(matches!(
            mentions_from_response(&o, "{not json"),
            Err(SpotterError::TagmeMalformed(_))
        ));
    }

    #[test]
    fn cache_hit_needs_no_network() {
        let dir = tempfile::tempdir().unwrap();
        // unroutable endpoint: any network attempt would error, a cache hit won't
        let cfg = TagmeConfig::new("http://127.0.0.1:1/tag", "tok", dir.path().to_path_buf());
        let o = Opinion::new("o1", "I think a video game helps", None);
        write_cache(&cache_path(&cfg, &o.text), FIXTURE).unwrap();
        let mentions = tagme_annotate(&cfg, &o).unwrap();
        assert_eq!(mentions.len(), 1);
    }

    fn serve_500_n_times(listener: TcpListener, n: usize) -> std::thread::JoinHandle<usize> {
        std::thread::spawn(move || {
            let mut served = 0;
            for stream in listener.incoming().take(n) {
                let mut stream = stream.unwrap();
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let _ = stream.write_all(
                    b"HTTP/1.1 500 Internal Server Error\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
                );
                served += 1;
            }
            served
        })
    }

    #[test]
    fn http_500_thrice_surfaces_endpoint_and_status() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}/tag", listener.local_addr().unwrap());
        let handle = serve_500_n_times(listener, 3);
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = TagmeConfig::new(endpoint.clone(), "tok", dir.path().to_path_buf());
        cfg.backoff_base = Duration::from_millis(5);
        let o = Opinion::new("o1", "some text", None);
        let err = tagme_annotate(&cfg, &o).unwrap_err();
        match err {
            SpotterError::TagmeStatus {
                endpoint: ep,
                status,
                attempts,
            } => {
                assert_eq!(ep, endpoint);
                assert_eq!(status, 500);
                assert_eq!(attempts, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert_eq!(handle.join().unwrap(), 3);
    }

    #[test]
    fn batch_preserves_input_order() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TagmeConfig::new("http://127.0.0.1:1/tag", "tok", dir.path().to_path_buf());
        let opinions = vec![
            Opinion::new("a", "first video game text", None),
            Opinion::new("b", "second text", None),
        ];
        for o in &opinions {
            write_cache(&cache_path(&cfg, &o.text), r#"{"annotations":[]}"#).unwrap();
        }
        let results = tagme_annotate_batch(&cfg, &opinions);
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| r.as_ref().unwrap().is_empty()));
    }
}
