//! Workload builders shared by the benchmark targets.
//!
//! Every builder takes an explicit seed and is deterministic for it, so a
//! timing regression is always a code change, never a workload change.
//! The vocabulary is deliberately collision-rich (near-identical words,
//! joinable fragments) to keep the aligner and the operation extractor on
//! their slow paths rather than trivial equality exits.

use bteval_core::{Corpus, NluOutcome, NormalizationPolicy, Sample};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 28] = [
    "play", "plays", "the", "next", "track", "turn", "on", "off", "of", "light", "lights",
    "mail", "male", "email", "check", "my", "now", "a", "to", "too", "whether", "weather",
    "for", "noon", "run", "in", "today", "uh",
];

const INTENTS: [&str; 8] = [
    "music_play", "alarm_set", "iot_on", "email_check", "weather_query", "datetime_query",
    "call_contact", "general_quirky",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS[rng.random_range(0..WORDS.len())]
}

fn sentence(rng: &mut ChaCha8Rng, min_words: usize, max_words: usize) -> String {
    let n = rng.random_range(min_words..=max_words);
    (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

/// Corrupts up to three tokens: drop, duplicate, swap-in another word, or
/// re-spell; roughly the damage a lossy recognition pass inflicts.
fn corrupt(rng: &mut ChaCha8Rng, reference: &str) -> String {
    let mut tokens: Vec<String> = reference.split_whitespace().map(str::to_string).collect();
    for _ in 0..rng.random_range(0..=3) {
        if tokens.is_empty() {
            break;
        }
        let i = rng.random_range(0..tokens.len());
        match rng.random_range(0..4u8) {
            0 => {
                tokens.remove(i);
            }
            1 => {
                let t = tokens[i].clone();
                tokens.insert(i, t);
            }
            2 => tokens[i] = word(rng).to_string(),
            _ => {
                let mut chars: Vec<char> = tokens[i].chars().collect();
                if !chars.is_empty() {
                    let j = rng.random_range(0..chars.len());
                    chars[j] = rng.random_range(b'a'..=b'z') as char;
                }
                tokens[i] = chars.into_iter().collect();
            }
        }
    }
    tokens.join(" ")
}

/// `(reference, hypothesis)` sentence pairs for alignment and extraction.
pub fn sentence_pairs(count: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let reference = sentence(&mut rng, 2, 12);
            let hypothesis = corrupt(&mut rng, &reference);
            (reference, hypothesis)
        })
        .collect()
}

/// Pre-tokenized sequences for the edit-distance benchmarks.
pub fn token_pairs(count: usize, max_len: usize, seed: u64) -> Vec<(Vec<String>, Vec<String>)> {
    let mut rng = rng(seed);
    let draw = |rng: &mut ChaCha8Rng, lo: usize| -> Vec<String> {
        (0..rng.random_range(lo..=max_len)).map(|_| word(rng).to_string()).collect()
    };
    (0..count)
        .map(|_| {
            let r = draw(&mut rng, 1);
            let h = draw(&mut rng, 0);
            (r, h)
        })
        .collect()
}

/// A fully evaluated corpus: about 70% of samples carry changed text, and
/// outcomes drift with planted probabilities so every change category and
/// both damage classes occur.
pub fn evaluated_corpus(count: usize, seed: u64) -> Corpus {
    let mut rng = rng(seed);
    let samples = (0..count)
        .map(|i| {
            let reference = sentence(&mut rng, 2, 12);
            let expected = INTENTS[rng.random_range(0..INTENTS.len())];
            let mut s = Sample::new(format!("s{i:06}"), &reference, NluOutcome::intent(expected));

            s.hypothesis = Some(if rng.random_bool(0.7) {
                let corrupted = corrupt(&mut rng, &reference);
                if corrupted == reference {
                    format!("{reference} uh")
                } else {
                    corrupted
                }
            } else {
                reference.clone()
            });

            let before = if rng.random_bool(0.7) {
                expected
            } else {
                INTENTS[rng.random_range(0..INTENTS.len())]
            };
            let after = if rng.random_bool(0.6) {
                before
            } else {
                INTENTS[rng.random_range(0..INTENTS.len())]
            };
            s.before = Some(NluOutcome::intent(before));
            s.after = Some(NluOutcome::intent(after));
            s
        })
        .collect();
    Corpus::from_samples(samples, &NormalizationPolicy::none()).expect("generated ids are unique")
}
