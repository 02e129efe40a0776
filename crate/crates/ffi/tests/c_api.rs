use std::ffi::{CStr, CString};
use std::fs;
use std::ptr;

use embkit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = embkit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn tokenizer_round_trip() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(embkit_tokenizer_new(c("en").as_ptr(), &mut t), EmbkitStatus::Ok);
        let mut out = ptr::null_mut();
        let text = c("Hello, world. It works!");
        assert_eq!(embkit_tokenize(t, text.as_ptr(), &mut out), EmbkitStatus::Ok);
        let s = CStr::from_ptr(out).to_str().unwrap().to_owned();
        embkit_string_free(out);
        embkit_tokenizer_free(t);
        assert_eq!(s, "Hello , world .\nIt works !");
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(embkit_tokenize(ptr::null(), c("x").as_ptr(), &mut out), EmbkitStatus::NullPointer);
        assert!(last_error().contains("tokenizer"));
        assert_eq!(embkit_tokenizer_new(c("en").as_ptr(), ptr::null_mut()), EmbkitStatus::NullPointer);
        embkit_tokenizer_free(ptr::null_mut());
        embkit_dedup_free(ptr::null_mut());
        embkit_embeddings_free(ptr::null_mut());
        embkit_string_free(ptr::null_mut());
        assert_eq!(embkit_embeddings_len(ptr::null()), 0);
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    unsafe {
        let mut t = ptr::null_mut();
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(embkit_tokenizer_new(bad.as_ptr().cast(), &mut t), EmbkitStatus::InvalidUtf8);
    }
}

#[test]
fn error_is_cleared_on_success() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(embkit_relative_difference(1.0, 0.0, &mut v), EmbkitStatus::InvalidArgument);
        assert!(!embkit_last_error().is_null());
        assert_eq!(embkit_relative_difference(0.6, 0.5, &mut v), EmbkitStatus::Ok);
    }
    assert!(embkit_last_error().is_null());
    assert!((v - 0.2).abs() < 1e-12);
}

#[test]
fn dedup_drops_repeats() {
    let unit = (0..30).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(embkit_dedup_new(9, 0.9, &mut d), EmbkitStatus::Ok);
        let mut keep = 9u8;
        assert_eq!(embkit_dedup_offer(d, c(&unit).as_ptr(), &mut keep), EmbkitStatus::Ok);
        assert_eq!(keep, 1);
        assert_eq!(embkit_dedup_offer(d, c(&unit).as_ptr(), &mut keep), EmbkitStatus::Ok);
        assert_eq!(keep, 0);
        let mut stats = EmbkitDedupStats::default();
        assert_eq!(embkit_dedup_stats(d, &mut stats), EmbkitStatus::Ok);
        embkit_dedup_free(d);
        assert_eq!(stats.units_in, 2);
        assert_eq!(stats.units_kept, 1);
        assert_eq!(stats.tokens_in, 60);
        assert_eq!(stats.tokens_kept, 30);
        assert_eq!(stats.distinct_shingles, 22);
    }
}

#[test]
fn dedup_rejects_bad_config() {
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(embkit_dedup_new(0, 0.9, &mut d), EmbkitStatus::InvalidArgument);
        assert_eq!(embkit_dedup_new(9, 1.5, &mut d), EmbkitStatus::InvalidArgument);
    }
    assert!(d.is_null());
}

#[test]
fn embeddings_lookup_and_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    fs::write(&path, "3 2\nking 1 0\nqueen 1 1\nnull 0 0\n").unwrap();
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(embkit_embeddings_load(c(path.to_str().unwrap()).as_ptr(), &mut e), EmbkitStatus::Ok);
        assert_eq!(embkit_embeddings_len(e), 3);
        assert_eq!(embkit_embeddings_dim(e), 2);

        let mut buf = [0f32; 2];
        assert_eq!(embkit_embeddings_get(e, c("queen").as_ptr(), buf.as_mut_ptr(), 2), EmbkitStatus::Ok);
        assert_eq!(buf, [1.0, 1.0]);
        assert_eq!(embkit_embeddings_get(e, c("queen").as_ptr(), buf.as_mut_ptr(), 1), EmbkitStatus::DimensionMismatch);
        assert_eq!(embkit_embeddings_get(e, c("jack").as_ptr(), buf.as_mut_ptr(), 2), EmbkitStatus::NotFound);
        assert!(last_error().contains("jack"));

        let mut sim = 0.0;
        assert_eq!(embkit_embeddings_similarity(e, c("king").as_ptr(), c("queen").as_ptr(), &mut sim), EmbkitStatus::Ok);
        assert!((sim - 0.5f64.sqrt()).abs() < 1e-7);
        assert_eq!(embkit_embeddings_similarity(e, c("king").as_ptr(), c("null").as_ptr(), &mut sim), EmbkitStatus::ZeroVector);
        embkit_embeddings_free(e);

        assert_eq!(embkit_embeddings_load(c("/nonexistent/v.txt").as_ptr(), &mut e), EmbkitStatus::Io);
    }
}

#[test]
fn cosine_of_raw_vectors() {
    let u = [1f32, 2.0, 3.0];
    let v = [2f32, 4.0, 6.0];
    let mut out = 0.0;
    unsafe {
        assert_eq!(embkit_cosine(u.as_ptr(), v.as_ptr(), 3, &mut out), EmbkitStatus::Ok);
        assert!((out - 1.0).abs() < 1e-9);
        assert_eq!(embkit_cosine(u.as_ptr(), ptr::null(), 3, &mut out), EmbkitStatus::NullPointer);
    }
}

#[test]
fn label_density_values() {
    let mut d = 0.0;
    unsafe {
        assert_eq!(embkit_label_density(10, 20, 30, 600, &mut d), EmbkitStatus::Ok);
        assert!((d - 0.1).abs() < 1e-12);
        assert_eq!(embkit_label_density(10, 20, 30, 50, &mut d), EmbkitStatus::InvalidArgument);
    }
}

#[test]
fn macro_f1_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.txt");
    let pred = dir.path().join("pred.txt");
    fs::write(&gold, "Ana B-PER\nlives O\nin O\nLjubljana B-LOC\nat O\nNLB B-ORG\n").unwrap();
    fs::write(&pred, "Ana B-PER\nlives O\nin O\nLjubljana B-ORG\nat O\nNLB B-ORG\n").unwrap();
    let mut s = EmbkitScores::default();
    unsafe {
        assert_eq!(embkit_macro_f1(c(gold.to_str().unwrap()).as_ptr(), c(gold.to_str().unwrap()).as_ptr(), &mut s), EmbkitStatus::Ok);
        assert_eq!(s.macro_f1, 1.0);
        assert_eq!(embkit_macro_f1(c(gold.to_str().unwrap()).as_ptr(), c(pred.to_str().unwrap()).as_ptr(), &mut s), EmbkitStatus::Ok);
    }
    assert_eq!(s.per, 1.0);
    assert_eq!(s.loc, 0.0);
    assert!((s.org - 2.0 / 3.0).abs() < 1e-12);
    assert!((s.macro_f1 - 5.0 / 9.0).abs() < 1e-12);

    fs::write(&pred, "Ana B-PER\n").unwrap();
    unsafe {
        assert_eq!(embkit_macro_f1(c(gold.to_str().unwrap()).as_ptr(), c(pred.to_str().unwrap()).as_ptr(), &mut s), EmbkitStatus::Alignment);
    }
}

#[test]
fn header_declares_every_export() {
    let header = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/embkit.h")).unwrap();
    let src = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 19, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("EMBKIT_STATUS_PANIC"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    fs::write(
        &src,
        "#include \"embkit.h\"\nint main(void) { double d; return embkit_relative_difference(1.0, 2.0, &d) == EMBKIT_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
