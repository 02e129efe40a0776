//! File interfaces shared with external embedding providers and NER
//! trainers.

use std::fs;
use std::path::Path;

use embkit::analogy::{serve_request, EmbeddingProvider, HashMockProvider, RecordFileProvider, SubprocessProvider};
use embkit::embstore::{Layer, RecordReader};
use embkit::ner::{parse_ner, save_ner, LabelMap, NerLabel, NerSentence};
use embkit::Error;

const BIN: &str = env!("CARGO_BIN_EXE_embkit");

fn sentences() -> Vec<Vec<String>> {
    ["the cat sat", "on the mat .", "cat"]
        .iter()
        .map(|s| s.split(' ').map(String::from).collect())
        .collect()
}

#[test]
fn served_records_follow_the_record_format() {
    let dir = tempfile::tempdir().unwrap();
    let req = dir.path().join("req.txt");
    let resp = dir.path().join("resp.tsv");
    fs::write(&req, "the cat sat\n\non the mat .\n").unwrap();
    let n = serve_request(&mut HashMockProvider::new(4, 1), &req, &resp).unwrap();
    assert_eq!(n, 7 * 3);

    let records: Vec<_> = RecordReader::open(&resp).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(records.len(), 21);
    // Sentence ids are request line indices, so the blank line is skipped.
    let ids: Vec<&str> = records.iter().map(|r| r.sentence_id.as_str()).collect();
    assert!(ids.iter().all(|&i| i == "0" || i == "2"), "{ids:?}");
    let first = &records[0];
    assert_eq!((first.position, first.token.as_str(), first.vector.len()), (0, "the", 4));

    for line in fs::read_to_string(&resp).unwrap().lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 5, "{line}");
        assert!(["CNN", "LSTM1", "LSTM2"].contains(&fields[3]));
        assert_eq!(fields[4].split(' ').count(), 4);
    }
}

#[test]
fn subprocess_provider_round_trip() {
    let args = ["emb", "mock-provide", "--dim", "6", "--seed", "9"].map(String::from).to_vec();
    let mut external = SubprocessProvider::new(BIN, args);
    let mut local = HashMockProvider::new(6, 9);
    for layer in Layer::ALL {
        let a = external.embed(&sentences(), layer).unwrap();
        let b = local.embed(&sentences(), layer).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn subprocess_provider_reports_failure() {
    let mut p = SubprocessProvider::new(BIN, vec!["emb".into(), "mock-provide".into(), "--dim".into(), "0".into()]);
    match p.embed(&sentences(), Layer::Cnn) {
        Err(Error::Provider(msg)) => assert!(msg.contains("dim"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let mut missing = SubprocessProvider::new("/nonexistent/provider", Vec::new());
    assert!(missing.embed(&sentences(), Layer::Cnn).is_err());
}

#[test]
fn record_file_provider_replays_served_records() {
    let dir = tempfile::tempdir().unwrap();
    let req = dir.path().join("req.txt");
    let resp = dir.path().join("resp.tsv");
    let text: String = sentences().iter().map(|s| s.join(" ") + "\n").collect();
    fs::write(&req, text).unwrap();
    let mut mock = HashMockProvider::new(5, 2);
    serve_request(&mut mock, &req, &resp).unwrap();

    let mut replay = RecordFileProvider::open(&resp, Layer::Lstm2).unwrap();
    let got = replay.embed(&sentences()[1..], Layer::Lstm2).unwrap();
    assert_eq!(got, mock.embed(&sentences()[1..], Layer::Lstm2).unwrap());

    let unknown = vec![vec!["never".to_owned(), "seen".to_owned()]];
    assert!(replay.embed(&unknown, Layer::Lstm2).is_err());
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn ner_files_round_trip_through_the_label_map() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.txt");
    write(&src, "Ivan B-PER\nje O\niz O\nNovog B-LOC\nSada I-LOC\n\nMISC B-MISC\ntu O\n\n\n");
    let data = parse_ner(&src, &LabelMap::default()).unwrap();
    assert_eq!(data.sentences.len(), 2);
    assert_eq!(data.unmapped, 1);
    assert_eq!(
        data.sentences[0].labels(),
        [NerLabel::Per, NerLabel::O, NerLabel::O, NerLabel::Loc, NerLabel::Loc]
    );

    let out = dir.path().join("out.txt");
    save_ner(&data.sentences, &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("Ivan\tPER\nje\tO\n"), "{text}");
    let again = parse_ner(&out, &LabelMap::default()).unwrap();
    assert_eq!(again.sentences, data.sentences);
    assert_eq!(again.unmapped, 0);
}

#[test]
fn ner_custom_map_and_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let map_path = dir.path().join("map.txt");
    write(&map_path, "# corpus-specific tags\nPERSON PER\nGPE LOC\nMISC O\n");
    let map = LabelMap::from_file(&map_path).unwrap();
    let src = dir.path().join("in.txt");
    write(&src, "Ana\tB-PERSON\nParis\tGPE\nx\tMISC\n");
    let data = parse_ner(&src, &map).unwrap();
    assert_eq!(data.sentences[0].labels(), [NerLabel::Per, NerLabel::Loc, NerLabel::O]);
    assert_eq!(data.unmapped, 0);

    write(&src, "Ana B-PER\nbroken line here\n");
    match parse_ner(&src, &map) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ner_sentence_requires_matching_lengths() {
    assert!(NerSentence::new(vec!["a".into()], vec![]).is_err());
    assert!(NerSentence::new(vec![], vec![]).is_err());
}
