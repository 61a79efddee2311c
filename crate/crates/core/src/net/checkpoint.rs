use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, WrappedGaussian};
use crate::motion::{RepresentationConfig, Skeleton};

use super::mlp::{NetworkSpec, ParamEntry, VectorFieldParams};
use super::train::{TrainConfig, TrainOutput};

const MAGIC: &[u8; 8] = b"RMGCKPT1";

/// Position of the training random stream when the checkpoint was written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
    /// ChaCha word position, decimal (it is a 128-bit counter).
    pub word_pos: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub network: NetworkSpec,
    pub train: TrainConfig,
    pub step: usize,
    pub rng: RngState,
    pub manifold: ManifoldSpec,
    pub prior: WrappedGaussian,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepresentationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<Skeleton>,
    pub param_count: usize,
    pub param_layout: Vec<ParamEntry>,
}

/// Network weights plus EMA shadow and the metadata needed to sample.
///
/// On disk: the 8 magic bytes `RMGCKPT1`, the header length as a
/// little-endian u64, the JSON header, then `param_count` little-endian
/// f64 parameters followed by `param_count` f64 EMA values.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: Vec<f64>,
    pub ema: Vec<f64>,
}

impl Checkpoint {
    pub fn from_training(
        out: &TrainOutput,
        train: TrainConfig,
        manifold: ManifoldSpec,
        prior: WrappedGaussian,
        representation: Option<RepresentationConfig>,
        skeleton: Option<Skeleton>,
    ) -> Self {
        let network = out.params.spec;
        Checkpoint {
            header: CheckpointHeader {
                network,
                train,
                step: out.history.len(),
                rng: out.rng.clone(),
                manifold,
                prior,
                representation,
                skeleton,
                param_count: out.params.len(),
                param_layout: network.layout(),
            },
            params: out.params.flat.clone(),
            ema: out.ema.shadow.clone(),
        }
    }

    pub fn network(&self, use_ema: bool) -> Result<VectorFieldParams> {
        let flat = if use_ema { &self.ema } else { &self.params };
        VectorFieldParams::from_flat(self.header.network, flat.clone())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = serde_json::to_vec(&self.header).map_err(std::io::Error::other)?;
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        for v in self.params.iter().chain(&self.ema) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(format!("checkpoint: {e}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Format("checkpoint: bad magic bytes".into()));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len).map_err(io)?;
        let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut header).map_err(io)?;
        let header: CheckpointHeader = serde_json::from_slice(&header)?;
        header.network.validate()?;
        if header.param_count != header.network.param_count() || header.param_layout != header.network.layout() {
            return Err(Error::Format("checkpoint: parameter layout does not match network".into()));
        }
        let mut read_blob = |n: usize| -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; n * 8];
            r.read_exact(&mut bytes).map_err(io)?;
            Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
        };
        let params = read_blob(header.param_count)?;
        let ema = read_blob(header.param_count)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(io)?;
        if !rest.is_empty() {
            return Err(Error::Format("checkpoint: trailing bytes".into()));
        }
        Ok(Checkpoint { header, params, ema })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}
