//! Entity anchors from a gazetteer, longest match first.

use std::error::Error;

use paratag::taggers::{ner_anchors, spans_to_labels, Gazetteer};
use paratag::textcore::{tokenize, LanguageProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let en = LanguageProfile::english();
    let gazetteer = Gazetteer::new(["New York", "New York City", "York", "Instagram"], &en);

    let s = tokenize(
        "How do I get deleted Instagram messages in New York City?",
        &en,
    );
    let anchors = ner_anchors(&s, "en", &gazetteer)?;
    let found: Vec<String> = anchors.iter().map(|a| a.tokens.join(" ")).collect();
    println!("{found:?}");
    assert_eq!(found, ["instagram", "new york city"]);

    let spans: Vec<_> = anchors.iter().filter_map(|a| a.span).collect();
    println!("{:?}", spans_to_labels(&spans, s.len()));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
