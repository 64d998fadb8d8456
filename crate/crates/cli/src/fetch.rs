//! Checksum-verified downloads.
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use sha2::{Digest, Sha256};

use crate::{Failure, EXIT_RESOURCE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub url: String,
    pub sha256: String,
}

/// Parses `sha256  url` lines; `#` starts a comment.
pub fn parse_list(text: &str) -> Result<Vec<Source>, Failure> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(sha256), Some(url), None) => out.push(Source {
                url: url.to_string(),
                sha256: normalize_hash(sha256)?,
            }),
            _ => {
                return Err(Failure::config(format!(
                    "fetch list line {}: expected `sha256 url`",
                    n + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn normalize_hash(h: &str) -> Result<String, Failure> {
    let h = h.trim().to_ascii_lowercase();
    if h.len() != 64 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Failure::config(format!("{h:?} is not a SHA-256 hex digest")));
    }
    Ok(h)
}

/// Last path segment of the URL.
pub fn file_name(url: &str) -> Result<String, Failure> {
    let parsed = url::Url::parse(url).map_err(|e| Failure::config(format!("{url}: {e}")))?;
    parsed
        .path_segments()
        .and_then(|mut s| s.next_back())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .ok_or_else(|| Failure::config(format!("{url}: no file name in URL")))
}

fn hash_file(path: &Path) -> anyhow::Result<String> {
    let mut file = File::open(path).with_context(|| path.display().to_string())?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

fn mismatch(path: &Path, expected: &str, found: &str) -> Failure {
    Failure {
        code: EXIT_RESOURCE,
        error: anyhow!(
            "{}: checksum mismatch, expected {expected}, found {found}; file removed",
            path.display()
        ),
    }
}

/// Downloads `source` into `dest` unless a file with the right hash is already
/// there. Returns the path and its checksum line.
pub fn fetch(source: &Source, dest: &Path) -> Result<(PathBuf, String), Failure> {
    let target = dest.join(file_name(&source.url)?);
    if target.exists() {
        let found = hash_file(&target)?;
        if found == source.sha256 {
            log::info!("{} already present", target.display());
            return Ok((target.clone(), format!("{found}  {}", target.display())));
        }
        log::warn!("{} has hash {found}; downloading again", target.display());
    }
    std::fs::create_dir_all(dest).with_context(|| dest.display().to_string())?;
    let partial = target.with_extension("part");
    let response = ureq::get(&source.url)
        .call()
        .map_err(|e| anyhow!("{}: {e}", source.url))?;
    let mut reader = response.into_reader();
    let mut hasher = Sha256::new();
    {
        let file = File::create(&partial).with_context(|| partial.display().to_string())?;
        let mut out = BufWriter::new(file);
        let mut buf = vec![0u8; 1 << 16];
        loop {
            let n = reader.read(&mut buf).with_context(|| source.url.clone())?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            out.write_all(&buf[..n])
                .with_context(|| partial.display().to_string())?;
        }
        out.flush().with_context(|| partial.display().to_string())?;
    }
    let found = hex::encode(hasher.finalize());
    if found != source.sha256 {
        let _ = std::fs::remove_file(&partial);
        let _ = std::fs::remove_file(&target);
        return Err(mismatch(&target, &source.sha256, &found));
    }
    std::fs::rename(&partial, &target).with_context(|| target.display().to_string())?;
    Ok((target.clone(), format!("{found}  {}", target.display())))
}
