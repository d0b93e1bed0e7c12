mod common;

use std::num::NonZeroUsize;

use chrono::{Duration, TimeZone, Utc};
use common::fixture;
use hav_profiler::corpus::{
    fetch_all, load_corpus, merge_corpora, Corpus, CorpusError, FetchError, MockFetcher,
    PagedSourceDescriptor, ParseMode, Post, Source,
};
use proptest::prelude::*;

fn post(id: usize, minutes: i64) -> Post {
    Post {
        id: format!("p{id}"),
        source: Source::Twitter,
        author: "s".into(),
        timestamp: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + Duration::minutes(minutes),
        text: format!("text {id}"),
    }
}

fn sorted_ids(posts: &[Post]) -> Vec<String> {
    let mut ids: Vec<String> = posts.iter().map(|p| p.id.clone()).collect();
    ids.sort();
    ids
}

proptest! {
    #[test]
    fn paging_yields_every_post_once(n in 0usize..60, page in 1usize..17, failures in 0usize..3) {
        let posts: Vec<Post> = (0..n).map(|i| post(i, i as i64)).collect();
        let fetcher = MockFetcher::new(posts.clone()).with_transient_failures(failures);
        let desc = PagedSourceDescriptor::new("mock", NonZeroUsize::new(page).unwrap());
        let got = fetch_all(&desc, &fetcher, 3).unwrap();
        prop_assert_eq!(sorted_ids(&got), sorted_ids(&posts));
    }

    #[test]
    fn merge_is_idempotent_and_commutative(
        a in prop::collection::vec((0usize..30, 0i64..100), 0..30),
        b in prop::collection::vec((0usize..30, 0i64..100), 0..30),
    ) {
        let (ca, _) = Corpus::new("s", a.iter().map(|&(i, t)| post(i, t)).collect());
        let (cb, _) = Corpus::new("s", b.iter().map(|&(i, t)| post(i, t)).collect());
        let (self_merged, dropped) = merge_corpora(&ca, &ca).unwrap();
        prop_assert_eq!(&self_merged, &ca);
        prop_assert_eq!(dropped, ca.len());
        let (ab, _) = merge_corpora(&ca, &cb).unwrap();
        let (ba, _) = merge_corpora(&cb, &ca).unwrap();
        prop_assert_eq!(sorted_ids(ab.posts()), sorted_ids(ba.posts()));
        prop_assert!(ab.posts().windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }
}

#[test]
fn retries_are_bounded() {
    let fetcher = MockFetcher::new(vec![post(0, 0)]).with_transient_failures(5);
    let desc = PagedSourceDescriptor::new("mock", NonZeroUsize::new(1).unwrap());
    assert!(matches!(
        fetch_all(&desc, &fetcher, 2),
        Err(FetchError::Transport(_))
    ));
}

#[test]
fn bad_cursor_is_not_retried() {
    let fetcher = MockFetcher::new(vec![post(0, 0), post(1, 1)]);
    let mut desc = PagedSourceDescriptor::new("mock", NonZeroUsize::new(1).unwrap());
    desc.cursor = "bogus".into();
    assert!(matches!(
        fetch_all(&desc, &fetcher, 5),
        Err(FetchError::InvalidCursor(_))
    ));
}

#[test]
fn fixture_corpus_loads_leniently() {
    let loaded = load_corpus(fixture("corpus.jsonl"), "jdoe", ParseMode::Lenient).unwrap();
    assert_eq!(loaded.corpus.len(), 6);
    assert_eq!(loaded.skipped.len(), 1);
    assert_eq!(loaded.skipped[0].0, 5);
    assert_eq!(loaded.duplicates_dropped, 1);
    // The earlier of the two p2 posts survives.
    let p2 = loaded.corpus.posts().iter().find(|p| p.id == "p2").unwrap();
    assert!(p2.text.starts_with("Best pizza"));
    let ts: Vec<_> = loaded.corpus.posts().iter().map(|p| p.timestamp).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn strict_mode_reports_the_line() {
    let err = load_corpus(fixture("corpus.jsonl"), "jdoe", ParseMode::Strict).unwrap_err();
    assert!(matches!(err, CorpusError::Malformed { line: 5, .. }));
}

#[test]
fn mock_fetcher_serves_a_jsonl_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let (c, _) = Corpus::new("s", (0..7).map(|i| post(i, i as i64)).collect());
    c.write_jsonl(std::fs::File::create(&path).unwrap())
        .unwrap();
    let fetcher = MockFetcher::from_jsonl(&path).unwrap();
    let desc = PagedSourceDescriptor::new("file", NonZeroUsize::new(3).unwrap());
    assert_eq!(fetch_all(&desc, &fetcher, 0).unwrap(), c.posts());
}
