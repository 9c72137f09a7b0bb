//! Seed lexicons from annotated sentences.

mod labeled;
mod lexicon;
mod seed;

pub use labeled::{read_labeled_sentences, LabeledSentence};
pub use lexicon::{
    lexicon_to_tsv, parse_lexicon, read_lexicon, write_lexicon, write_theme_lists, Lexicon, LexiconEntry, Origin,
};
pub use seed::{
    fleiss_kappa_per_theme, partition_all, partition_by_theme, seed_lexicon, sentence_tf, threshold_grid_report,
    word_stats, GridEntry, InductionTable, InductionThresholds, ThemePartition, ThresholdGrid, WordStat,
};
