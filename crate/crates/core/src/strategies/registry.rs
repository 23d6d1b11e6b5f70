use std::collections::BTreeMap;

use chrono::{Months, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::TrainedModel;

/// Models older than this many months are pruned.
pub const DEFAULT_RETENTION_MONTHS: u32 = 36;

pub type ModelId = u64;

/// Trained models keyed by id, and the model each window maps to.
///
/// Windows that reuse a model alias its id instead of copying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRegistry {
    by_window: BTreeMap<usize, ModelId>,
    models: BTreeMap<ModelId, TrainedModel>,
    retention_months: u32,
    next_id: ModelId,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::with_retention(DEFAULT_RETENTION_MONTHS)
    }
}

impl ModelRegistry {
    pub fn with_retention(months: u32) -> Self {
        Self {
            by_window: BTreeMap::new(),
            models: BTreeMap::new(),
            retention_months: months,
            next_id: 0,
        }
    }

    pub fn retention_months(&self) -> u32 {
        self.retention_months
    }

    /// Stores a new model under `window` and returns its id.
    pub fn insert(&mut self, window: usize, model: TrainedModel) -> ModelId {
        let id = self.next_id;
        self.next_id += 1;
        self.models.insert(id, model);
        self.by_window.insert(window, id);
        id
    }

    /// Points `window` at the model already stored for `source`.
    pub fn alias(&mut self, window: usize, source: usize) -> Result<ModelId> {
        let id = *self.by_window.get(&source).ok_or(Error::RegistryMiss(source))?;
        self.by_window.insert(window, id);
        Ok(id)
    }

    pub fn model_for(&self, window: usize) -> Result<&TrainedModel> {
        let id = self.by_window.get(&window).ok_or(Error::RegistryMiss(window))?;
        self.models.get(id).ok_or(Error::RegistryMiss(window))
    }

    pub fn id_for(&self, window: usize) -> Option<ModelId> {
        self.by_window.get(&window).copied()
    }

    pub fn model(&self, id: ModelId) -> Option<&TrainedModel> {
        self.models.get(&id)
    }

    pub fn windows(&self) -> impl Iterator<Item = (usize, ModelId)> + '_ {
        self.by_window.iter().map(|(w, id)| (*w, *id))
    }

    /// Number of stored (distinct) models.
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Removes models trained before `now` minus the retention period, along
/// with every window entry pointing at them. Returns how many models went.
pub fn prune_registry(registry: &mut ModelRegistry, now: NaiveDateTime) -> usize {
    let cutoff = now
        .checked_sub_months(Months::new(registry.retention_months))
        .unwrap_or(NaiveDateTime::MIN);
    let stale: Vec<ModelId> = registry
        .models
        .iter()
        .filter(|(_, m)| m.trained_at < cutoff)
        .map(|(id, _)| *id)
        .collect();
    for id in &stale {
        registry.models.remove(id);
    }
    registry.by_window.retain(|_, id| !stale.contains(id));
    stale.len()
}
