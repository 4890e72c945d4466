//! Unordered XML schemas with multiplicities: disjunctive multiplicity
//! expressions and schemas, streaming validation, schema containment, and
//! twig-query satisfiability, implication and containment under a schema.

pub mod dtd;
pub mod error;
pub mod exact;
pub mod expr;
pub mod graph;
pub mod model;
pub mod ms;
pub mod oracle;
pub mod query;
pub mod schema;
mod syntax;
pub mod validator;

pub use dtd::{DfDtd, DfRegex};
pub use error::{Error, Result};
pub use expr::{CharTriple, DisjunctiveExpression, NormalizedExpression};
pub use graph::RootedGraph;
pub use model::{events_to_tree, Alphabet, Multiplicity, NodeId, Symbol, TreeEvent, UnorderedTree, UnorderedWord};
pub use ms::{prune, CharGraph, Containment, DependencyGraph, MsAnalysis};
pub use query::{Axis, QueryLabel, TwigQuery};
pub use schema::{Schema, SchemaKind};
pub use validator::{validate_stream, Reason, RuleEncoding, Validator, Verdict};
