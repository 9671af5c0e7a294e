use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ids::RecordId;
use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the platform operations can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("content and surrogate title must not be empty")]
    EmptyContent,
    #[error("`{0}` is not an element kind")]
    InvalidKind(String),
    #[error("provenance must name a session or a source document")]
    MissingProvenance,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("definition is invalid: {}", summarize(.0))]
    Validation(Vec<Violation>),
    #[error("record rejected: {}", summarize(.0))]
    ValidationFailed(Vec<Violation>),
    #[error("link endpoint `{0}` does not exist")]
    DanglingEndpoint(RecordId),
    #[error("storage failure: {0}")]
    Storage(String),
    #[error("no record `{0}`")]
    UnknownRecord(RecordId),
    #[error("import target archive is not empty")]
    NonEmptyTarget,
    #[error("definition `{id}` version {offered} is not newer than registered version {registered}")]
    StaleVersion {
        id: String,
        offered: u32,
        registered: u32,
    },
    #[error("no definition node `{0}`")]
    UnknownNode(String),
    #[error("task type `{0}` is not registered")]
    UnknownTaskType(String),
    #[error("task instance `{0}` already has an open session")]
    InstanceBusy(String),
    #[error("no session `{0}`")]
    UnknownSession(RecordId),
    #[error("session `{0}` is not open")]
    SessionClosed(RecordId),
    #[error("activity `{0}` is not part of the pinned definition")]
    UnknownActivity(String),
    #[error("session has no current activity")]
    NoCurrentActivity,
    #[error("activity `{activity}` corresponds to {candidates:?}; name the informational element type")]
    AmbiguousIeType {
        activity: String,
        candidates: Vec<String>,
    },
    #[error("supporting element `{0}` does not exist")]
    DanglingSupport(RecordId),
    #[error("segment {index} overlaps or precedes the previous segment")]
    OverlappingSegments { index: usize },
    #[error("segment {index} is not a valid span of the source: {reason}")]
    InvalidSegment { index: usize, reason: String },
    #[error("demand-satisfaction links would form a cycle")]
    DsCycle,
    #[error("limit must be at least 1")]
    InvalidLimit,
    #[error("ratio undefined for an empty set")]
    EmptyDenominator,
    #[error("parent node `{0}` does not exist or has the wrong kind")]
    UnknownParent(RecordId),
    #[error("evidence element `{0}` does not exist")]
    DanglingEvidence(RecordId),
    #[error("text must not be empty")]
    EmptyText,
    #[error("position `{0}` is not grounded in evidence")]
    NotGrounded(RecordId),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("{}({})", v.code, v.field))
        .collect::<Vec<_>>()
        .join(", ")
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Storage(err.to_string())
    }
}

impl Error {
    pub fn code(&self) -> ErrorCode {
        use ErrorCode as C;
        match self {
            Error::EmptyContent => C::EmptyContent,
            Error::InvalidKind(_) => C::InvalidKind,
            Error::MissingProvenance => C::MissingProvenance,
            Error::Parse(_) => C::ParseError,
            Error::Validation(_) => C::ValidationError,
            Error::ValidationFailed(_) => C::ValidationFailed,
            Error::DanglingEndpoint(_) => C::DanglingEndpoint,
            Error::Storage(_) => C::StorageFailure,
            Error::UnknownRecord(_) => C::UnknownRecord,
            Error::NonEmptyTarget => C::NonEmptyTarget,
            Error::StaleVersion { .. } => C::StaleVersion,
            Error::UnknownNode(_) => C::UnknownNode,
            Error::UnknownTaskType(_) => C::UnknownTaskType,
            Error::InstanceBusy(_) => C::InstanceBusy,
            Error::UnknownSession(_) => C::UnknownSession,
            Error::SessionClosed(_) => C::SessionClosed,
            Error::UnknownActivity(_) => C::UnknownActivity,
            Error::NoCurrentActivity => C::NoCurrentActivity,
            Error::AmbiguousIeType { .. } => C::AmbiguousIeType,
            Error::DanglingSupport(_) => C::DanglingSupport,
            Error::OverlappingSegments { .. } => C::OverlappingSegments,
            Error::InvalidSegment { .. } => C::InvalidSegment,
            Error::DsCycle => C::DsCycle,
            Error::InvalidLimit => C::InvalidLimit,
            Error::EmptyDenominator => C::EmptyDenominator,
            Error::UnknownParent(_) => C::UnknownParent,
            Error::DanglingEvidence(_) => C::DanglingEvidence,
            Error::EmptyText => C::EmptyText,
            Error::NotGrounded(_) => C::NotGrounded,
        }
    }

    /// Violations carried by validation failures, empty otherwise.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::Validation(v) | Error::ValidationFailed(v) => v,
            _ => &[],
        }
    }

    /// True when the error is a rejected record whose violations include `code`.
    pub fn has_violation(&self, code: crate::model::ViolationCode) -> bool {
        self.violations().iter().any(|v| v.code == code)
    }
}

/// Stable machine-readable error names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ErrorCode {
    EmptyContent,
    InvalidKind,
    MissingProvenance,
    ParseError,
    ValidationError,
    ValidationFailed,
    DanglingEndpoint,
    StorageFailure,
    UnknownRecord,
    NonEmptyTarget,
    StaleVersion,
    UnknownNode,
    UnknownTaskType,
    InstanceBusy,
    UnknownSession,
    SessionClosed,
    UnknownActivity,
    NoCurrentActivity,
    AmbiguousIeType,
    DanglingSupport,
    OverlappingSegments,
    InvalidSegment,
    DsCycle,
    InvalidLimit,
    EmptyDenominator,
    UnknownParent,
    DanglingEvidence,
    EmptyText,
    NotGrounded,
}

impl ErrorCode {
    pub const ALL: &'static [ErrorCode] = &[
        ErrorCode::EmptyContent,
        ErrorCode::InvalidKind,
        ErrorCode::MissingProvenance,
        ErrorCode::ParseError,
        ErrorCode::ValidationError,
        ErrorCode::ValidationFailed,
        ErrorCode::DanglingEndpoint,
        ErrorCode::StorageFailure,
        ErrorCode::UnknownRecord,
        ErrorCode::NonEmptyTarget,
        ErrorCode::StaleVersion,
        ErrorCode::UnknownNode,
        ErrorCode::UnknownTaskType,
        ErrorCode::InstanceBusy,
        ErrorCode::UnknownSession,
        ErrorCode::SessionClosed,
        ErrorCode::UnknownActivity,
        ErrorCode::NoCurrentActivity,
        ErrorCode::AmbiguousIeType,
        ErrorCode::DanglingSupport,
        ErrorCode::OverlappingSegments,
        ErrorCode::InvalidSegment,
        ErrorCode::DsCycle,
        ErrorCode::InvalidLimit,
        ErrorCode::EmptyDenominator,
        ErrorCode::UnknownParent,
        ErrorCode::DanglingEvidence,
        ErrorCode::EmptyText,
        ErrorCode::NotGrounded,
    ];

    pub fn as_str(self) -> &'static str {
        use ErrorCode::*;
        match self {
            EmptyContent => "EmptyContent",
            InvalidKind => "InvalidKind",
            MissingProvenance => "MissingProvenance",
            ParseError => "ParseError",
            ValidationError => "ValidationError",
            ValidationFailed => "ValidationFailed",
            DanglingEndpoint => "DanglingEndpoint",
            StorageFailure => "StorageFailure",
            UnknownRecord => "UnknownRecord",
            NonEmptyTarget => "NonEmptyTarget",
            StaleVersion => "StaleVersion",
            UnknownNode => "UnknownNode",
            UnknownTaskType => "UnknownTaskType",
            InstanceBusy => "InstanceBusy",
            UnknownSession => "UnknownSession",
            SessionClosed => "SessionClosed",
            UnknownActivity => "UnknownActivity",
            NoCurrentActivity => "NoCurrentActivity",
            AmbiguousIeType => "AmbiguousIeType",
            DanglingSupport => "DanglingSupport",
            OverlappingSegments => "OverlappingSegments",
            InvalidSegment => "InvalidSegment",
            DsCycle => "DsCycle",
            InvalidLimit => "InvalidLimit",
            EmptyDenominator => "EmptyDenominator",
            UnknownParent => "UnknownParent",
            DanglingEvidence => "DanglingEvidence",
            EmptyText => "EmptyText",
            NotGrounded => "NotGrounded",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
