//! Dual feedback sample scheduling.
//!
//! Each domain remembers the small-object appearance loss and the global
//! reconstruction loss of its previous iteration. When the former is strictly
//! larger, the next sample is drawn from the small-object pool; otherwise from
//! the whole dataset.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::categories::CategoryConfig;
use crate::error::{Error, Result};
use crate::imagecore::{connected_components, LabelMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    A,
    B,
}

impl Domain {
    fn index(self) -> usize {
        match self {
            Domain::A => 0,
            Domain::B => 1,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::A => "A",
            Domain::B => "B",
        })
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Domain::A),
            "B" | "b" => Ok(Domain::B),
            other => Err(format!("unknown domain `{other}` (expected A or B)")),
        }
    }
}

/// Which pool a draw came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    Soc,
    All,
}

/// One dataset entry with its small-object statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleIndex {
    pub id: String,
    #[serde(default)]
    pub label_path: Option<PathBuf>,
    #[serde(default)]
    pub image_path: Option<PathBuf>,
    #[serde(default)]
    pub has_soc: bool,
    /// Area of the largest small-object region.
    #[serde(default)]
    pub soc_area: usize,
}

/// Area of the largest connected small-object region in a label map.
pub fn largest_soc_area(labels: &LabelMap, cfg: &CategoryConfig) -> usize {
    cfg.soc_set.iter().flat_map(|&c| connected_components(&labels.mask_of(c), c)).map(|r| r.area).max().unwrap_or(0)
}

impl SampleIndex {
    pub fn from_labels(id: impl Into<String>, labels: &LabelMap, cfg: &CategoryConfig) -> Self {
        let soc_area = largest_soc_area(labels, cfg);
        SampleIndex {
            id: id.into(),
            label_path: None,
            image_path: None,
            has_soc: soc_area > cfg.area_threshold.for_frame(labels.dims()),
            soc_area,
        }
    }
}

/// Splits an index into (small-object ids, all ids), preserving index order.
pub fn build_soc_sets(index: &[SampleIndex]) -> Result<(Vec<String>, Vec<String>)> {
    if index.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let all: Vec<String> = index.iter().map(|s| s.id.clone()).collect();
    let soc = index.iter().filter(|s| s.has_soc).map(|s| s.id.clone()).collect();
    Ok((soc, all))
}

#[derive(Debug, Clone)]
struct DomainState<Id> {
    z_soc_prev: Option<f64>,
    z_global_prev: Option<f64>,
    soc_ids: Vec<Id>,
    all_ids: Vec<Id>,
    rng: ChaCha8Rng,
}

impl<Id: Clone> DomainState<Id> {
    fn pool(&self) -> Pool {
        match (self.z_soc_prev, self.z_global_prev) {
            (Some(s), Some(g)) if s > g && !self.soc_ids.is_empty() => Pool::Soc,
            _ => Pool::All,
        }
    }
}

/// Per-domain feedback state. Single writer: callers serialize access.
#[derive(Debug, Clone)]
pub struct SchedulerState<Id = String> {
    domains: [DomainState<Id>; 2],
    seed: u64,
    iteration: u64,
}

impl<Id: Clone + Ord> SchedulerState<Id> {
    /// `pools` holds (soc_ids, all_ids) for domains A and B. Duplicate ids
    /// are dropped (first occurrence kept); every soc id must be in all_ids.
    pub fn new(pools: [(Vec<Id>, Vec<Id>); 2], seed: u64) -> Result<Self> {
        let mut domains = Vec::with_capacity(2);
        for (k, (soc, all)) in pools.into_iter().enumerate() {
            let all = dedup(all);
            if all.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let members: BTreeSet<&Id> = all.iter().collect();
            let soc = dedup(soc);
            if soc.iter().any(|id| !members.contains(id)) {
                return Err(Error::InvalidParameter("soc_ids must be a subset of all_ids".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            domains.push(DomainState { z_soc_prev: None, z_global_prev: None, soc_ids: soc, all_ids: all, rng });
        }
        let domains: [DomainState<Id>; 2] = domains.try_into().map_err(|_| Error::EmptyDataset)?;
        Ok(SchedulerState { domains, seed, iteration: 0 })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of `update_state` calls so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn soc_ids(&self, domain: Domain) -> &[Id] {
        &self.domains[domain.index()].soc_ids
    }

    pub fn all_ids(&self, domain: Domain) -> &[Id] {
        &self.domains[domain.index()].all_ids
    }

    /// Previous (z_soc, z_global) for the domain, if any.
    pub fn signals(&self, domain: Domain) -> Option<(f64, f64)> {
        let d = &self.domains[domain.index()];
        d.z_soc_prev.zip(d.z_global_prev)
    }

    /// Pool the next draw for `domain` will use.
    pub fn pool(&self, domain: Domain) -> Pool {
        self.domains[domain.index()].pool()
    }

    /// Draws the next sample id for `domain` and advances its RNG.
    pub fn next_sample(&mut self, domain: Domain) -> Result<(Id, Pool)> {
        let d = &mut self.domains[domain.index()];
        let pool = d.pool();
        let ids = match pool {
            Pool::Soc => &d.soc_ids,
            Pool::All => &d.all_ids,
        };
        if ids.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let k = d.rng.gen_range(0..ids.len());
        Ok((ids[k].clone(), pool))
    }

    /// Stores this iteration's losses as the signals for the next draw.
    pub fn update_state(&mut self, domain: Domain, z_soc: f64, z_global: f64) -> Result<()> {
        for z in [z_soc, z_global] {
            if !z.is_finite() || z < 0.0 {
                return Err(Error::NegativeLoss(z));
            }
        }
        let d = &mut self.domains[domain.index()];
        d.z_soc_prev = Some(z_soc);
        d.z_global_prev = Some(z_global);
        self.iteration += 1;
        Ok(())
    }
}

fn dedup<Id: Clone + Ord>(ids: Vec<Id>) -> Vec<Id> {
    let mut seen = BTreeSet::new();
    ids.into_iter().filter(|id| seen.insert(id.clone())).collect()
}
