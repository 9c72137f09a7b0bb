//! Category adoption, term-frequency gain and the social score.

mod adoption;
mod gain;
mod social;

pub use adoption::{
    aggregate_adoption, log_tf, profiles, review_adoption, review_adoptions, set_adoption, AdoptionValue,
    ReviewProfile, MIN_RELIABLE_SAMPLE,
};
pub use gain::{
    gain_report, normalised_tf, set_term_frequencies, set_tf, tf_gain, word_counts, AnnotatedGain, DensityBin,
    GainEntry, GainReport, GainStatus, DEFAULT_MIN_TOTAL_TF, DENSITY_BINS,
};
pub use social::{level1_adoptions, social_score, social_scores};
