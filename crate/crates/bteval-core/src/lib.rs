//! Measuring how natural-language-understanding systems survive speech
//! recognition errors.
//!
//! The toolkit round-trips a text corpus through speech: each utterance is
//! synthesized (TTS), re-recognized (ASR), and both the original and the
//! re-recognized text are run through the NLU system under test. Comparing
//! the two NLU outcomes per sample — did a correct prediction break, did a
//! wrong one change, did it accidentally heal — yields robustness metrics
//! that isolate the damage done by recognition errors from the model's
//! baseline accuracy.
//!
//! The crates are organized around that loop:
//!
//! * [`corpus`] — samples, NLU outcomes, normalization, JSONL persistence,
//!   and the MASSIVE dataset importer.
//! * [`btpipe`] — the TTS→ASR→NLU pipeline: adapter traits, HTTP and
//!   file-backed mock adapters, an on-disk cache, parallel execution, and
//!   word error rate.
//! * [`robustness`] — change categories, the six robustness metrics, their
//!   per-label precision/recall consequences, and report rendering.
//! * [`align`] — token alignment between hypothesis and reference, and the
//!   typed edit operations (`mail[add_prefix_e]`, `run-in[split_on_first_-]`,
//!   …) that describe each recognition error.
//! * [`errmodel`] — featurizes samples by their edit operations and ranks
//!   operations by how reliably they damage NLU output, via frequency or
//!   logistic regression.
//! * [`audit`] — blind listening sheets for judging whether synthesized
//!   audio still says the original prompt.
//!
//! Everything is deterministic: fixed inputs, seeds, and configuration
//! reproduce results byte for byte.

pub mod align;
pub mod audit;
pub mod btpipe;
pub mod corpus;
pub mod errmodel;
pub mod error;
pub mod robustness;

pub use corpus::{Corpus, NluOutcome, NormalizationPolicy, Sample, SlotPair, Task};
pub use error::{Error, Result};
