//! On-controller share cache.
//!
//! Holds shares that are detached from physical memory: shares fetched with
//! an access and not yet written back, and freshly generated shares. Occupancy
//! is accounted at 16 bytes per share.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use rand::Rng;
use thiserror::Error;

use crate::codec::{Share, SHARE_BYTES};
use crate::layout::Owner;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StashError {
    #[error("stash overflow: {requested} bytes requested, capacity {capacity}")]
    Overflow { requested: usize, capacity: usize },
    #[error("invalid stash configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StashConfig {
    pub capacity_bytes: usize,
    pub high_watermark: f64,
    pub low_watermark: f64,
}

impl Default for StashConfig {
    fn default() -> Self {
        StashConfig {
            capacity_bytes: 32 * 1024,
            high_watermark: 0.75,
            low_watermark: 0.5,
        }
    }
}

impl StashConfig {
    pub fn validate(&self) -> Result<(), StashError> {
        let (lo, hi) = (self.low_watermark, self.high_watermark);
        if !(0.0 < lo && lo < hi && hi <= 1.0) {
            return Err(StashError::InvalidConfig(format!(
                "need 0 < low < high <= 1, got low={lo} high={hi}"
            )));
        }
        if self.capacity_bytes < SHARE_BYTES {
            return Err(StashError::InvalidConfig("capacity below one share".into()));
        }
        Ok(())
    }

    pub fn capacity_shares(&self) -> usize {
        self.capacity_bytes / SHARE_BYTES
    }

    /// Shares retained after a drain.
    pub fn low_shares(&self) -> usize {
        (self.low_watermark * self.capacity_bytes as f64) as usize / SHARE_BYTES
    }
}

/// True once occupancy reaches the high watermark.
pub fn needs_shuffle(cfg: &StashConfig, occupancy_bytes: usize) -> bool {
    occupancy_bytes as f64 >= cfg.high_watermark * cfg.capacity_bytes as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StashEntry {
    pub owner: Owner,
    pub share: Share,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StashStats {
    pub hits: u64,
    pub misses: u64,
    pub peak_bytes: usize,
}

#[derive(Debug, Clone)]
pub struct Stash {
    cfg: StashConfig,
    entries: Vec<StashEntry>,
    index: HashMap<Owner, usize>,
    stats: StashStats,
}

impl Stash {
    pub fn new(cfg: StashConfig) -> Result<Self, StashError> {
        cfg.validate()?;
        Ok(Stash {
            cfg,
            entries: Vec::new(),
            index: HashMap::default(),
            stats: StashStats::default(),
        })
    }

    pub fn config(&self) -> &StashConfig {
        &self.cfg
    }

    pub fn stats(&self) -> StashStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn occupancy_bytes(&self) -> usize {
        self.entries.len() * SHARE_BYTES
    }

    /// Adds or overwrites entries keyed by owner. All-or-nothing: fails
    /// without changes if the result would exceed capacity.
    pub fn insert(&mut self, entries: &[StashEntry]) -> Result<(), StashError> {
        let mut fresh = 0;
        let mut seen = HashSet::default();
        for e in entries {
            if !self.index.contains_key(&e.owner) && seen.insert(e.owner) {
                fresh += 1;
            }
        }
        let requested = (self.entries.len() + fresh) * SHARE_BYTES;
        if requested > self.cfg.capacity_bytes {
            return Err(StashError::Overflow {
                requested,
                capacity: self.cfg.capacity_bytes,
            });
        }
        for e in entries {
            match self.index.get(&e.owner) {
                Some(&i) => self.entries[i].share = e.share,
                None => {
                    self.index.insert(e.owner, self.entries.len());
                    self.entries.push(*e);
                }
            }
        }
        self.stats.peak_bytes = self.stats.peak_bytes.max(self.occupancy_bytes());
        Ok(())
    }

    /// Looks up a share, counting the hit or miss.
    pub fn lookup(&mut self, owner: Owner) -> Option<Share> {
        let found = self.peek(owner);
        if found.is_some() {
            self.stats.hits += 1;
        } else {
            self.stats.misses += 1;
        }
        found
    }

    /// Looks up a share without touching statistics.
    pub fn peek(&self, owner: Owner) -> Option<Share> {
        self.index.get(&owner).map(|&i| self.entries[i].share)
    }

    pub fn contains(&self, owner: Owner) -> bool {
        self.index.contains_key(&owner)
    }

    pub fn remove(&mut self, owner: Owner) -> Option<StashEntry> {
        let i = self.index.remove(&owner)?;
        let entry = self.entries.swap_remove(i);
        if i < self.entries.len() {
            self.index.insert(self.entries[i].owner, i);
        }
        Some(entry)
    }

    pub fn entries(&self) -> &[StashEntry] {
        &self.entries
    }

    /// Removes and returns a uniformly random subset covering at least
    /// `target_bytes` (capped at the whole stash).
    pub fn select_evictions<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        target_bytes: usize,
    ) -> Vec<StashEntry> {
        let count = target_bytes.div_ceil(SHARE_BYTES).min(self.entries.len());
        let n = self.entries.len();
        // partial Fisher-Yates moves the chosen entries to the tail
        for i in 0..count {
            let j = rng.gen_range(0..n - i);
            self.entries.swap(j, n - 1 - i);
        }
        let evicted = self.entries.split_off(n - count);
        for e in &evicted {
            self.index.remove(&e.owner);
        }
        for (i, e) in self.entries.iter().enumerate() {
            self.index.insert(e.owner, i);
        }
        evicted
    }
}
