use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CageError, Result};
use crate::features::CrossConfig;
use crate::numerics::AdamConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub hidden_sizes: Vec<usize>,
    /// Output width of the part propagation layer (the object embedding size).
    pub propagation_dim: usize,
    pub enable_wide: bool,
    pub enable_deep: bool,
    pub mask_states: bool,
    pub mask_tasks: bool,
    pub crosses: CrossConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Width of the optional dense passthrough appended to the deep input.
    pub dense_dim: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embedding_dim: 8,
            hidden_sizes: vec![64, 32],
            propagation_dim: 16,
            enable_wide: true,
            enable_deep: true,
            mask_states: false,
            mask_tasks: false,
            crosses: CrossConfig::default(),
            epochs: 150,
            batch_size: 32,
            dense_dim: 0,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.enable_wide && !self.enable_deep {
            return Err(CageError::Config("at least one of the wide and deep components must be enabled".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(CageError::Config("hidden sizes must be non-empty and positive".into()));
        }
        if self.embedding_dim == 0 || self.propagation_dim == 0 {
            return Err(CageError::Config("embedding and propagation sizes must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(CageError::Config("batch size must be positive".into()));
        }
        Ok(())
    }

    /// Width of the deep input: four feature embeddings, the object embedding and the dense passthrough.
    pub fn deep_input_dim(&self) -> usize {
        4 * self.embedding_dim + self.propagation_dim + self.dense_dim
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        match ablation {
            Ablation::Full => {}
            Ablation::WithoutDeep => self.enable_deep = false,
            Ablation::WithoutWide => self.enable_wide = false,
            Ablation::WithoutStates => self.mask_states = true,
            Ablation::WithoutTasks => self.mask_tasks = true,
        }
        self
    }

    pub fn ablation(&self) -> Option<Ablation> {
        Ablation::ALL.into_iter().find(|a| Self { seed: self.seed, ..Self::default() }.with_ablation(*a).flags() == self.flags())
    }

    fn flags(&self) -> (bool, bool, bool, bool) {
        (self.enable_wide, self.enable_deep, self.mask_states, self.mask_tasks)
    }
}

/// Model variants compared in the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Full,
    WithoutDeep,
    WithoutWide,
    WithoutStates,
    WithoutTasks,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::Full,
        Ablation::WithoutDeep,
        Ablation::WithoutWide,
        Ablation::WithoutStates,
        Ablation::WithoutTasks,
    ];

    /// Row name used in ablation tables.
    pub fn row_name(self) -> &'static str {
        match self {
            Ablation::Full => "Wide and Deep",
            Ablation::WithoutDeep => "Without Deep",
            Ablation::WithoutWide => "Without Wide",
            Ablation::WithoutStates => "Without States",
            Ablation::WithoutTasks => "Without Tasks",
        }
    }

    pub fn flag(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::WithoutDeep => "without-deep",
            Ablation::WithoutWide => "without-wide",
            Ablation::WithoutStates => "without-states",
            Ablation::WithoutTasks => "without-tasks",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for Ablation {
    type Err = CageError;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.flag() == s)
            .ok_or_else(|| CageError::Config(format!("unknown ablation `{s}`")))
    }
}
