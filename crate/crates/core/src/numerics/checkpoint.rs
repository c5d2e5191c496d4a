//! Versioned JSON container for named parameter blocks and optimizer state.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::tensor::ParamTensor;
use crate::error::{CageError, Result};

pub const CHECKPOINT_FORMAT: &str = "cage-ckpt-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub tool_version: String,
    /// Free-form metadata written by the owner of the parameters.
    pub header: serde_json::Value,
    pub blocks: Vec<ParamTensor>,
    pub optimizer: Option<AdamState>,
}

impl Checkpoint {
    pub fn new(header: serde_json::Value, blocks: Vec<ParamTensor>, optimizer: Option<AdamState>) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            tool_version: crate::data::TOOL_VERSION.to_string(),
            header,
            blocks,
            optimizer,
        }
    }

    pub fn block(&self, name: &str) -> Result<&ParamTensor> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| CageError::Checkpoint(format!("missing block `{name}`")))
    }

    pub fn to_json(&self) -> Result<String> {
        if let Some(bad) = self.blocks.iter().find(|b| !b.is_finite()) {
            return Err(CageError::Checkpoint(format!("block `{}` has non-finite values", bad.name)));
        }
        let mut text = serde_json::to_string(self).map_err(|e| CageError::Checkpoint(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| CageError::Checkpoint(e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(CageError::Checkpoint(format!("unsupported format `{}`", ckpt.format)));
        }
        for b in &mut ckpt.blocks {
            if b.values.len() != b.rows * b.cols {
                return Err(CageError::Checkpoint(format!("block `{}` does not match its shape", b.name)));
            }
            b.ensure_grad();
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| CageError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CageError::io(path, e))?;
        Self::from_json(&text)
    }
}
