//! Instance files: a kind-tagged envelope around the per-module payload
//! schemas, with load-time validation.

use anyhow::{Context, Result};
use equistat_core::corr::FiniteCorrespondence;
use equistat_core::flow::FlowProblem;
use equistat_core::markets::{HedonicMarket, ItuMarket, NtuMarket};
use equistat_core::producer::{DiscreteProducer, LogitModel, ObjectiveTable};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Correspondence(FiniteCorrespondence),
    Producer(DiscreteProducer),
    Network(FlowProblem),
    Itu(ItuMarket),
    Ntu(NtuMarket),
    Hedonic(HedonicMarket),
    ObjectiveTable(ObjectiveTable),
    Logit(LogitModel),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Correspondence(_) => "correspondence",
            Payload::Producer(_) => "producer",
            Payload::Network(_) => "network",
            Payload::Itu(_) => "itu",
            Payload::Ntu(_) => "ntu",
            Payload::Hedonic(_) => "hedonic",
            Payload::ObjectiveTable(_) => "objective_table",
            Payload::Logit(_) => "logit",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub payload: Payload,
}

impl InstanceFile {
    pub fn new(payload: Payload) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            payload,
        }
    }

    /// Validates the invariants that the serde layer cannot enforce.
    pub fn validate(&self) -> Result<()> {
        match &self.payload {
            Payload::Ntu(m) => m.validate().context("ntu market invalid")?,
            Payload::Itu(m) => m.validate().context("itu market invalid")?,
            Payload::Hedonic(m) => m.validate().context("hedonic market invalid")?,
            _ => {}
        }
        Ok(())
    }
}

pub fn load(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("failed to read {}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .with_context(|| format!("failed to parse {}", path.display()))?;
    file.validate()?;
    Ok(file)
}

pub fn save(file: &InstanceFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file)?;
    fs::write(path, text).with_context(|| format!("failed to write {}", path.display()))?;
    Ok(())
}
