//! Record identifiers and timestamps.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

static GENERATOR: Mutex<Option<ulid::Generator>> = Mutex::new(None);

/// Separates the task type from the node id in a definition node reference.
pub const NODE_REF_SEPARATOR: char = '#';

/// Identifier of any archive record.
///
/// Freshly minted identifiers are ULIDs (26 characters, lexicographically
/// sortable by creation time). Definition nodes are addressed as
/// `task_type#node`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(String);

impl RecordId {
    /// Mints a new identifier, strictly greater than every identifier minted
    /// before it in this process.
    pub fn fresh() -> Self {
        let mut guard = GENERATOR.lock().unwrap_or_else(|p| p.into_inner());
        let generator = guard.get_or_insert_with(ulid::Generator::new);
        let ulid = generator.generate().unwrap_or_else(|_| ulid::Ulid::new());
        RecordId(ulid.to_string())
    }

    pub fn new(raw: impl Into<String>) -> Self {
        RecordId(raw.into())
    }

    /// Reference to a node of a task type definition.
    pub fn node(task_type: &str, node: &str) -> Self {
        RecordId(format!("{task_type}{NODE_REF_SEPARATOR}{node}"))
    }

    /// Splits a definition node reference into `(task_type, node)`.
    pub fn as_node_ref(&self) -> Option<(&str, &str)> {
        self.0.split_once(NODE_REF_SEPARATOR)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RecordId {
    fn from(s: &str) -> Self {
        RecordId(s.to_owned())
    }
}

impl From<String> for RecordId {
    fn from(s: String) -> Self {
        RecordId(s)
    }
}

/// UTC instant with millisecond precision, rendered as ISO-8601 (`...T12:00:00.000Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn now() -> Self {
        Self::from_millis(Utc::now().timestamp_millis())
    }

    pub fn from_millis(millis: i64) -> Self {
        Timestamp(Utc.timestamp_millis_opt(millis).single().unwrap_or_default())
    }

    pub fn millis(&self) -> i64 {
        self.0.timestamp_millis()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

impl FromStr for Timestamp {
    type Err = chrono::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = DateTime::parse_from_rfc3339(s)?;
        Ok(Self::from_millis(parsed.timestamp_millis()))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
