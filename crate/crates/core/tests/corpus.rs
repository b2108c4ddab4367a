use finv::corpus::{run_corpus, ENTRIES};
use finv::{ComputeOptions, NumericMode};

#[test]
fn corpus_agrees_in_auto_mode() {
    let out = run_corpus(&ComputeOptions::default(), NumericMode::Auto);
    let text = out.render();
    assert!(out.ok(), "{text}");
    assert_eq!(out.entries.len(), ENTRIES.len());
}

#[test]
fn corpus_agrees_in_float_mode() {
    let out = run_corpus(&ComputeOptions::default(), NumericMode::Float);
    assert!(out.ok(), "{}", out.render());
}
