use std::io::Write;

use serde::{Deserialize, Serialize};

use super::transmission::{BasisMode, KeyRecord};
use crate::device::{ChannelParams, DeviceChainParams};
use crate::error::Result;

pub const KEY_RECORD_COLUMNS: [&str; 6] = ["index", "alice_basis", "bob_basis", "alpha", "beta", "matched"];

/// Writes the record as CSV. `comments` are emitted first, one per line,
/// prefixed with `# `.
pub fn write_key_record_csv<W: Write>(record: &KeyRecord, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", KEY_RECORD_COLUMNS.join(","))?;
    for e in &record.entries {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{}",
            e.index,
            e.alice_basis,
            e.bob_basis,
            e.alpha,
            e.beta,
            u8::from(e.matched)
        )?;
    }
    Ok(())
}

/// Parameters needed to regenerate a key record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub chain: DeviceChainParams,
    pub channel: ChannelParams,
    pub symbols: usize,
    pub codebook_variance: f64,
    pub codebook_seed: u64,
    pub transmission_seed: u64,
    pub mode: BasisMode,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
