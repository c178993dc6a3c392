//! Templated paraphrase clusters with slot-filled entities.
//!
//! Each cluster instantiates one intent with a single entity; every sentence
//! of the cluster mentions the entity, so the Oracle Tagger should find it.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::{derived_rng, ParaphraseCluster};

const INTENTS: &[&[&str]] = &[
    &[
        "what are cheap hotels in {}",
        "where can i find affordable lodging in {}",
        "i am looking for budget accommodation in {}",
        "any recommendations for inexpensive places to stay in {}",
        "how do i book a low cost room in {}",
    ],
    &[
        "how do i get to {} by train",
        "which train goes to {}",
        "what is the best rail route to {}",
        "can i take a train to {}",
    ],
    &[
        "what is the weather like in {} in spring",
        "how warm is {} during spring",
        "should i pack a coat for {} in spring",
        "is spring a good season to visit {}",
    ],
    &[
        "how do i recover deleted {} messages",
        "can deleted {} messages be restored",
        "is there a way to get back lost {} messages",
        "where do removed {} messages go",
    ],
    &[
        "who founded {}",
        "who started the company {}",
        "which person created {}",
    ],
];

const CITIES: &[&str] = &[
    "beijing", "paris", "lagos", "lima", "oslo", "cairo", "hanoi", "quito", "dublin", "kyoto",
    "nairobi", "porto",
];

const APPS: &[&str] = &[
    "instagram",
    "whatsapp",
    "telegram",
    "signal",
    "snapchat",
    "viber",
];

const COMPANIES: &[&str] = &["tesla", "nintendo", "ikea", "spotify", "airbnb", "lego"];

fn fillers(intent: usize) -> &'static [&'static str] {
    match intent {
        3 => APPS,
        4 => COMPANIES,
        _ => CITIES,
    }
}

/// `count` clusters with ids `syn-00000`, `syn-00001`, ...; identical for identical seeds.
pub fn synthetic_clusters(seed: u64, count: usize) -> Vec<ParaphraseCluster> {
    (0..count)
        .map(|i| {
            let id = format!("syn-{i:05}");
            let mut rng = derived_rng("synthetic", seed, &id);
            let intent = rng.random_range(0..INTENTS.len());
            let entity = *fillers(intent)
                .choose(&mut rng)
                .expect("non-empty filler list");
            let templates = INTENTS[intent];
            let size = rng.random_range(3..=templates.len());
            let sentences = templates
                .choose_multiple(&mut rng, size)
                .map(|t| t.replace("{}", entity))
                .collect();
            ParaphraseCluster {
                id,
                lang: "en".into(),
                sentences,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let a = synthetic_clusters(13, 50);
        assert_eq!(a, synthetic_clusters(13, 50));
        assert_ne!(a, synthetic_clusters(14, 50));
        for c in &a {
            assert!(c.sentences.len() >= 3);
        }
    }
}
