//! Memetic evolution of semantic networks.
//!
//! Individuals are semantic networks whose every relation is backed by a
//! commonsense knowledge base. Variation operators only ever add, remove or
//! rewrite relations in ways the knowledge base supports, and fitness is the
//! structure-mapping similarity of an individual to a given base network.

pub mod concept;
pub mod evolution;
pub mod kb;
pub mod semnet;
pub mod sme;

pub use concept::{normalize, Concept, Position, Relation, RelationLabel};
pub use evolution::{run, EvolutionConfig, EvolutionError, Individual, RunOutcome, RunStats};
pub use kb::{load_kb, KbError, KnowledgeBase, ScoredAssertion};
pub use semnet::{
    extract_crossover_subgraph, grow_random, NetworkError, SemanticNetwork, Subgraph,
};
pub use sme::{best_gmap, fitness, GMap, MappingReport, MappingResult, ScoreWeights, SearchLimits};
