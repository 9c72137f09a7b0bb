//! Skip-gram word vectors and cosine-based lexicon expansion.

mod expand;
mod model;
mod sgns;

pub use expand::{expand_lexicon, ExpansionConfig, ExpansionReport};
pub use model::EmbeddingModel;
pub use sgns::{train_embeddings, TrainConfig};
