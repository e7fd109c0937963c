//! Noun sense disambiguation by Conceptual Density over a WordNet-style
//! noun taxonomy, plus the baselines and scoring harness used to evaluate
//! it against sense-tagged text.

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod density;
pub mod disambiguator;
pub mod evaluation;
pub mod taxonomy;

pub use density::{conceptual_density, score_candidates, DensityParams, DensityScore, MarkCounting, NhypMode};
pub use disambiguator::{
    build_window, disambiguate_document, disambiguate_window, Assignment, DisambiguationOptions, Fallback, Lattice,
    Method, NounOccurrence, Outcome, Window,
};
pub use taxonomy::{load_taxonomy, RelationMode, SenseKey, SubhierarchyMetrics, SynsetIdx, Taxonomy};
