//! Normalization and segmentation for a space-delimited and a per-character language.

use std::error::Error;

use paratag::textcore::{is_content, ngrams, normalize, tokenize, LanguageProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let en = LanguageProfile::english();
    let s = tokenize("What are cheap lodging options in Beijing?", &en);
    let norms = s.norms();
    println!("{norms:?}");
    assert_eq!(norms.last(), Some(&"?"));
    assert_eq!(normalize("ＢＥＩＪＩＮＧ"), "beijing");

    let bigrams: Vec<String> = ngrams(&s.tokens, 2).iter().map(|g| g.join(" ")).collect();
    println!("{} bigrams, first {:?}", bigrams.len(), bigrams[0]);

    assert!(!is_content(&["in", "the"], &en));
    assert!(is_content(&["in", "beijing"], &en));

    let zh = LanguageProfile::chinese();
    let s = tokenize("北京的iPhone价格", &zh);
    println!("{:?} -> {}", s.norms(), s.joined());
    assert_eq!(s.norms(), ["北", "京", "的", "iphone", "价", "格"]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
