//! Parsing, rendering and inserting `<tag> ... </tag>` anchors.

use std::error::Error;

use paratag::markup::{
    anchor_tokens, insert_anchors, parse_tagged, render_tagged, Markers, MarkupError,
};
use paratag::textcore::{tokenize, LanguageProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let en = LanguageProfile::english();

    let ts = parse_tagged("I'm looking for cheap hotels in <tag>Beijing</tag>?", &en)?;
    println!("anchors: {:?}", ts.anchor_strings());
    println!("rendered: {}", render_tagged(&ts));
    assert_eq!(ts.anchor_strings(), ["beijing"]);

    // The rendered form parses back to the same sentence.
    let again = parse_tagged(&render_tagged(&ts), &en)?;
    assert_eq!(again, ts);

    assert!(matches!(
        parse_tagged("<tag> a <tag> b </tag> </tag>", &en),
        Err(MarkupError::UnbalancedTags { .. })
    ));
    assert!(matches!(
        parse_tagged("a <tag></tag> b", &en),
        Err(MarkupError::EmptyAnchor { .. })
    ));

    let sentence = tokenize("the red bicycle parked near the red door", &en);
    let anchors = vec![anchor_tokens("red bicycle", &en), anchor_tokens("red", &en)];
    let (tagged, report) = insert_anchors(sentence, &anchors, "en");
    println!("{} (absent: {:?})", render_tagged(&tagged), report.absent);
    assert_eq!(tagged.anchors().len(), 2);

    let brackets = Markers::new("[[", "]]")?;
    let ts = brackets.parse("see [[ new york ]] today", &en)?;
    assert_eq!(ts.anchor_strings(), ["new york"]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
