mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use common::{unreachable_url, MockService};
use paratag::markup::AnchorSpan;
use paratag::taggers::{
    auto_tag, ner_anchors, tag_concurrently, PassThroughAutoTagger, ServiceBackend, TagRequest,
    TagResponse, TaggerError, TokenTagger, ANCHOR_LABEL, OUTSIDE_LABEL,
};
use paratag::textcore::{tokenize, LanguageProfile, TokenizedSentence};

fn capitalized(_: usize, body: &str) -> (u16, String) {
    let req: TagRequest = serde_json::from_str(body).unwrap();
    let labels = req
        .tokens
        .iter()
        .map(|t| {
            if t.starts_with(char::is_uppercase) {
                ANCHOR_LABEL
            } else {
                OUTSIDE_LABEL
            }
            .to_owned()
        })
        .collect();
    (200, serde_json::to_string(&TagResponse { labels }).unwrap())
}

fn fast(url: &str) -> ServiceBackend {
    ServiceBackend::new(url).with_backoff(Duration::from_millis(5))
}

#[test]
fn echo_service_round_trip() {
    let svc = MockService::start(|_, body| {
        let req: TagRequest = serde_json::from_str(body).unwrap();
        assert_eq!(req.lang, "en");
        // Echo: every token is an anchor.
        let labels = vec![ANCHOR_LABEL.to_owned(); req.tokens.len()];
        (200, serde_json::to_string(&TagResponse { labels }).unwrap())
    });
    let en = LanguageProfile::english();
    let s = tokenize("Visit Paris now", &en);
    let anchors = ner_anchors(&s, "en", &fast(&svc.url)).unwrap();
    assert_eq!(anchors.len(), 1);
    assert_eq!(anchors[0].tokens, ["visit", "paris", "now"]);
}

#[test]
fn request_carries_surface_tokens() {
    let svc = MockService::start(|_, body| {
        let req: TagRequest = serde_json::from_str(body).unwrap();
        assert_eq!(req.tokens, ["Flights", "to", "New", "York", "?"]);
        capitalized(0, body)
    });
    let en = LanguageProfile::english();
    let s = tokenize("Flights to New York?", &en);
    let anchors = auto_tag(&s, "en", &fast(&svc.url)).unwrap();
    let found: Vec<String> = anchors.iter().map(|a| a.tokens.join(" ")).collect();
    assert_eq!(found, ["flights", "new york"]);
}

#[test]
fn malformed_reply_is_a_protocol_error() {
    let en = LanguageProfile::english();
    let s = tokenize("a b c", &en);
    for reply in [
        "not json".to_owned(),
        r#"{"labels":["O","O"]}"#.to_owned(),
        r#"{"labels":["O","B-LOC","O"]}"#.to_owned(),
        r#"{"tags":[]}"#.to_owned(),
    ] {
        let svc = MockService::start(move |_, _| (200, reply.clone()));
        let err = ner_anchors(&s, "en", &fast(&svc.url)).unwrap_err();
        assert!(matches!(err, TaggerError::Protocol(_)), "{err:?}");
        assert_eq!(svc.requests(), 1, "protocol errors are not retried");
    }
}

#[test]
fn client_errors_are_not_retried() {
    let svc = MockService::start(|_, _| (400, "{}".into()));
    let en = LanguageProfile::english();
    let err = ner_anchors(&tokenize("a", &en), "en", &fast(&svc.url)).unwrap_err();
    assert!(matches!(err, TaggerError::Protocol(_)));
    assert_eq!(svc.requests(), 1);
}

#[test]
fn server_errors_are_retried() {
    let svc = MockService::start(|n, body| {
        if n < 2 {
            (503, String::new())
        } else {
            capitalized(n, body)
        }
    });
    let en = LanguageProfile::english();
    let anchors = ner_anchors(&tokenize("in Oslo", &en), "en", &fast(&svc.url)).unwrap();
    assert_eq!(anchors[0].tokens, ["oslo"]);
    assert_eq!(svc.requests(), 3);
}

#[test]
fn persistent_failure_gives_up_after_three_attempts() {
    let svc = MockService::start(|_, _| (500, String::new()));
    let en = LanguageProfile::english();
    let err = ner_anchors(&tokenize("a", &en), "en", &fast(&svc.url)).unwrap_err();
    assert!(
        matches!(err, TaggerError::BackendUnavailable { attempts: 3, .. }),
        "{err:?}"
    );
    assert_eq!(svc.requests(), 3);
}

#[test]
fn unreachable_service_is_backend_unavailable() {
    let en = LanguageProfile::english();
    let start = Instant::now();
    let backend = ServiceBackend::new(unreachable_url()).with_backoff(Duration::from_millis(20));
    let err = ner_anchors(&tokenize("a", &en), "en", &backend).unwrap_err();
    assert!(
        matches!(err, TaggerError::BackendUnavailable { attempts: 3, .. }),
        "{err:?}"
    );
    // Two backoff sleeps: 20 ms then 40 ms.
    assert!(start.elapsed() >= Duration::from_millis(60));
}

struct Counting {
    inner: ServiceBackend,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

impl TokenTagger for Counting {
    fn tag_spans(&self, s: &TokenizedSentence, lang: &str) -> Result<Vec<AnchorSpan>, TaggerError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        let r = self.inner.tag_spans(s, lang);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        r
    }
}

#[test]
fn concurrent_calls_respect_in_flight_bound() {
    let svc = MockService::start_with_delay(Duration::from_millis(20), capitalized);
    let en = LanguageProfile::english();
    let inputs: Vec<_> = (0..40)
        .map(|i| (tokenize(&format!("ping Host{i}"), &en), "en".to_owned()))
        .collect();
    let backend = Counting {
        inner: fast(&svc.url),
        in_flight: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
    };
    let out = tag_concurrently(&backend, &inputs, 4);
    for (i, r) in out.iter().enumerate() {
        let spans = r.as_ref().unwrap();
        assert_eq!(spans.len(), 1, "input {i}");
        assert_eq!((spans[0].start, spans[0].end), (1, 2));
    }
    let peak = backend.peak.load(Ordering::SeqCst);
    assert!((2..=4).contains(&peak), "peak in flight {peak}");
    assert_eq!(svc.requests(), 40);
}

#[test]
fn pass_through_stub_returns_nothing() {
    let en = LanguageProfile::english();
    let s = tokenize("Anything At All", &en);
    assert!(PassThroughAutoTagger
        .tag_spans(&s, "en")
        .unwrap()
        .is_empty());
    assert!(auto_tag(&s, "en", &PassThroughAutoTagger)
        .unwrap()
        .is_empty());
}
