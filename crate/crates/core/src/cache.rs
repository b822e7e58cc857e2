//! File-backed cache of shortest chain lengths.
//!
//! One record per line: `n \t length \t witness-terms \t checksum`, where the
//! checksum is the first 16 hex digits of SHA-256 over the first three
//! fields joined by tabs. Lines are appended with a single write each; a
//! corrupt line is skipped on load and the rest of the file is still served.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chain::AdditionChain;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt cache line {line}: {reason}")]
    CorruptCache { line: usize, reason: String },
    #[error("entry does not describe a chain for n={0} of the stated length")]
    Inconsistent(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub length: u32,
    pub witness: AdditionChain,
}

#[derive(Debug)]
pub struct LengthCache {
    path: PathBuf,
    entries: RwLock<BTreeMap<u64, CacheEntry>>,
    writer: Mutex<()>,
    skipped: Vec<CacheError>,
}

fn checksum(body: &str) -> String {
    let digest = Sha256::digest(body.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Render one cache line, without the trailing newline.
pub fn format_line(n: u64, entry: &CacheEntry) -> String {
    let body = format!("{}\t{}\t{}", n, entry.length, entry.witness.terms_csv());
    let sum = checksum(&body);
    format!("{body}\t{sum}")
}

/// Parse and verify one cache line. `line_no` is only used in errors.
pub fn parse_line(line: &str, line_no: usize) -> Result<(u64, CacheEntry), CacheError> {
    let corrupt = |reason: &str| CacheError::CorruptCache {
        line: line_no,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split('\t').collect();
    let [n, length, terms, sum] = fields[..] else {
        return Err(corrupt("expected 4 tab-separated fields"));
    };
    let body = format!("{n}\t{length}\t{terms}");
    if checksum(&body) != sum {
        return Err(corrupt("checksum mismatch"));
    }
    let n: u64 = n.parse().map_err(|_| corrupt("bad target"))?;
    let length: u32 = length.parse().map_err(|_| corrupt("bad length"))?;
    let witness: AdditionChain = terms.parse().map_err(|_| corrupt("bad witness"))?;
    if witness.target() != n || witness.length() != length as usize {
        return Err(corrupt("witness does not match target and length"));
    }
    Ok((n, CacheEntry { length, witness }))
}

impl LengthCache {
    /// Load the cache at `path`, creating nothing until the first write.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        let mut skipped = Vec::new();
        match File::open(&path) {
            Ok(f) => {
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    match parse_line(&line, i + 1) {
                        Ok((n, e)) => {
                            entries.insert(n, e);
                        }
                        Err(e) => skipped.push(e),
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(LengthCache {
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
            skipped,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, n: u64) -> Option<CacheEntry> {
        self.entries.read().expect("cache lock").get(&n).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lines discarded while loading.
    pub fn skipped(&self) -> &[CacheError] {
        &self.skipped
    }

    /// Write-through insert. The witness must end at `n` and have `length` steps.
    pub fn put(&self, n: u64, length: u32, witness: &AdditionChain) -> Result<(), CacheError> {
        if witness.target() != n || witness.length() != length as usize {
            return Err(CacheError::Inconsistent(n));
        }
        let entry = CacheEntry {
            length,
            witness: witness.clone(),
        };
        let mut line = format_line(n, &entry);
        line.push('\n');
        let _guard = self.writer.lock().expect("cache writer");
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        self.entries.write().expect("cache lock").insert(n, entry);
        Ok(())
    }
}
