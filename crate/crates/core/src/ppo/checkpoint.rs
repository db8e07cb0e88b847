//! Portable checkpoint files.
//!
//! ```text
//! MESHPPO 1\n
//! {json header}\n
//! f32 little-endian tensors, in order:
//!   policy w0 b0 w1 b1 ... | log_std | value w0 b0 w1 b1 ...
//! ```
//!
//! Weights are `out × in`, row-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::policy::{policy_sizes, value_sizes, ActorCritic, GaussianPolicy, ValueNet};
use super::trainer::TrainConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};

pub const MAGIC: &str = "MESHPPO";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub policy_sizes: Vec<usize>,
    pub value_sizes: Vec<usize>,
    pub step: u64,
    pub train: TrainConfig,
    pub env: EnvConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub model: ActorCritic<f32>,
}

impl Checkpoint {
    pub fn new(model: ActorCritic<f32>, step: u64, train: TrainConfig, env: EnvConfig) -> Self {
        let header = CheckpointHeader {
            format_version: FORMAT_VERSION,
            policy_sizes: model.policy.mean.sizes(),
            value_sizes: model.value.net.sizes(),
            step,
            train,
            env,
        };
        Self { header, model }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let json = serde_json::to_string(&self.header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
        writeln!(w, "{json}")?;
        let mut bytes = Vec::with_capacity(4 * self.model.num_parameters());
        for t in self.model.tensors() {
            for v in t {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&bytes)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Checkpoint("missing format version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        line.clear();
        r.read_line(&mut line)?;
        let header: CheckpointHeader =
            serde_json::from_str(line.trim_end()).map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
        let ps = &header.policy_sizes;
        let vs = &header.value_sizes;
        if ps.len() < 2 || vs.len() != ps.len() || ps.iter().chain(vs).any(|&s| s == 0) {
            return Err(Error::Checkpoint("bad layer sizes".into()));
        }
        let hidden = &ps[1..ps.len() - 1];
        if *vs != value_sizes(ps[0], hidden) {
            return Err(Error::Checkpoint("value network shape does not match policy".into()));
        }
        let mut model = ActorCritic {
            policy: GaussianPolicy::zeros(&policy_sizes(ps[0], hidden, ps[ps.len() - 1])),
            value: ValueNet { net: Mlp::zeros(vs) },
        };
        let mut buf = [0u8; 4];
        for t in model.tensors_mut() {
            for v in t.iter_mut() {
                r.read_exact(&mut buf)
                    .map_err(|_| Error::Checkpoint("truncated tensor data".into()))?;
                *v = f32::from_le_bytes(buf);
            }
        }
        if r.read(&mut buf)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after tensors".into()));
        }
        if !model.is_finite() {
            return Err(Error::Checkpoint("non-finite parameters".into()));
        }
        Ok(Self { header, model })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}
