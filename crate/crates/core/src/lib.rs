//! Core of the knowledge work support platform.
//!
//! Task types are declared as definitions (an activity graph, an
//! informational element type graph, a vocabulary and correspondences
//! between the two graphs). Work happens in sessions that move through the
//! activity graph, and everything a worker articulates is archived as a
//! small typed element linked to the definition nodes it was produced under.
//! The archived context is what search, argument verification and
//! recommendations work from.
//!
//! [`Platform`] is the entry point; it owns one [`Archive`] and derives
//! session state from it.

pub mod archive;
pub mod argumentation;
pub mod contextualization;
pub mod definitions;
pub mod error;
pub mod exploration;
pub mod fixtures;
pub mod ids;
pub mod model;
pub mod platform;
pub mod recommendation;
pub mod workspace;

pub use archive::{Archive, ArchiveEntry, ArchiveRecord, Direction, SurrogateFilter};
pub use argumentation::{ArgumentNode, ArgumentNodeKind, Stance, VerificationReport};
pub use contextualization::{segment_document, ArticulationRequest, Articulated, TranscriptionJob};
pub use definitions::{load_definition, validate_definition, TaskTypeDefinition};
pub use error::{Error, ErrorCode, Result};
pub use exploration::{precision, recall, RankedResult, SearchRequest};
pub use ids::{RecordId, Timestamp};
pub use model::{ElementKind, InformationalElement, Link, LinkType, Provenance, Surrogate};
pub use platform::Platform;
pub use recommendation::{Recommendation, RecommendationKind};
pub use workspace::{SessionStatus, SituationalContext, WorkspaceSession};
