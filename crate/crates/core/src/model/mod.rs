//! Model levels shared by the whole pipeline: conceptual (MCD), logical
//! (MLD) and physical (MPD), plus diagnostics and migration plans.
//!
//! All values are plain immutable data once built; equality is structural.

pub mod closure;
pub mod conceptual;
pub mod diagnostic;
pub mod logical;
pub mod migration;
pub mod physical;
pub mod types;

pub use closure::{identifier_closure, ClosureError, IdentifierPart};
pub use conceptual::{
    Association, AssociationEnd, Attribute, Cardinality, ConceptualModel, Entity, InitExpr, MaxCard, MinCard,
};
pub use diagnostic::{Diagnostic, RuleId, Severity, SourceSpan};
pub use logical::{
    Column, ColumnOrigin, ConceptId, DeleteRule, ForeignKey, LogicalId, LogicalModel, Table, UniqueConstraint,
};
pub use migration::{ChangeItem, ChangeKind, Classification, Constraint, MigrationPlan, Snapshot};
pub use physical::{
    ErrorMessage, PhysicalModel, ProcedureKind, ProcedureSpec, TableApi, TriggerEvent, TriggerSpec, TriggerTiming,
};
pub use types::{BaseType, NeutralType, Refinement, W3CType};
