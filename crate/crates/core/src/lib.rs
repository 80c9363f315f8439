//! Matching college students with STEM role models from offline social-profile
//! records: weak labeling, a college-student classifier, role-model
//! identification, attribute resolution, similarity ranking, evaluation and
//! page generation.

pub mod attributes;
pub mod bipartite;
pub mod classifier;
pub mod delivery;
pub mod error;
pub mod jsonl;
pub mod labeler;
pub mod matcher;
pub mod profiles;
pub mod rolemodel;
pub mod similarity;

pub use error::{Error, Result};
