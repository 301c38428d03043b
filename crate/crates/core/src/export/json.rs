use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Wraps a payload with a top-level `"schema_version"` field.
#[derive(Debug, Serialize)]
pub struct Versioned<'a, T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: &'a T,
}

impl<'a, T: Serialize> Versioned<'a, T> {
    pub fn new(body: &'a T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(&Versioned::new(value))?)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Versioned::new(value))?)
}
