//! Versioned JSON envelope shared by serialized models.
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a, M> {
    kind: &'a str,
    format_version: u32,
    scalar: &'a str,
    model: &'a M,
}

#[derive(Deserialize)]
struct Header {
    kind: String,
    format_version: u32,
    scalar: String,
}

#[derive(Deserialize)]
struct EnvelopeIn<M> {
    model: M,
}

pub fn to_string<M: Serialize>(kind: &str, scalar: &str, model: &M) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&EnvelopeOut {
        kind,
        format_version: FORMAT_VERSION,
        scalar,
        model,
    })?;
    text.push('\n');
    Ok(text)
}

pub fn from_str<M: DeserializeOwned>(kind: &str, scalar: &str, text: &str) -> Result<M> {
    let header: Header =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("not a model file: {e}")))?;
    if header.format_version > FORMAT_VERSION {
        return Err(Error::Format(format!(
            "format version {} is newer than supported version {FORMAT_VERSION}",
            header.format_version
        )));
    }
    if header.kind != kind {
        return Err(Error::Format(format!(
            "expected a {kind} model, found {}",
            header.kind
        )));
    }
    if header.scalar != scalar {
        return Err(Error::Format(format!(
            "model stores {} parameters, loader expects {scalar}",
            header.scalar
        )));
    }
    let env: EnvelopeIn<M> = serde_json::from_str(text)?;
    Ok(env.model)
}
