//! Parallel rewriting of term-labelled graphs.

pub mod aut;
pub mod graph;
pub mod join;
pub mod life;
pub mod perm;
pub mod rewrite;
pub mod rules;
pub mod symmetry;
pub mod terms;

pub use aut::{aut_graph, aut_relative, AutError};
pub use graph::{
    compose, find_isomorphism, generated_subgraph, image, is_sigma_subgraph, is_subgraph,
    isomorphic, remove, remove_arrows, remove_labels, remove_vertices, Arrow, Graph, GraphError,
    Id, Item, LabellingFn, Labels, Morphism, MorphismError, MorphismKind,
};
pub use join::{are_joinable, join, join_family, meet, JoinError};
pub use perm::{Carrier, GroupError, Perm, PermGroup};
pub use rewrite::{
    build_rhs_image, deletion_spec, find_conflict, full_step, is_regular, normalize_fresh,
    preserves, rewrite, rewrite_max, rewrite_min, sequential_step, DeletionSpec, Mode,
    RewriteError, RhsImage,
};
pub use rules::{
    enumerate_all, enumerate_matchings, Rule, RuleError, RuleMatch, RuleSet, RuleViolation,
};
pub use symmetry::{
    aut_rule, classes, compose_match, select_representatives, select_representatives_seeded,
    select_representatives_with, step_modulo_aut, step_modulo_aut_seeded, step_modulo_aut_with,
    MatchClass, RuleAut, RuleAuts, SymmetryError,
};
pub use terms::{match_term, Name, Signature, Substitution, Term, TermError, Var, DEFAULT_SORT};
