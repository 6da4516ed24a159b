//! Path ORAM over a binary tree of buckets.
//!
//! A tree of height `L` has `L` bucket levels (root at level 0) and
//! `2^(L-1)` leaves. Buckets are stored sparsely by heap index (root = 1),
//! so a height-27 tree only costs memory for the buckets that hold blocks.
//! Physical block address of bucket `node`, slot `s` is `(node - 1) * Z + s`.
//!
//! Besides the one-shot [`PathOram::access`], an access can be split into
//! [`PathOram::read_path_for`] and [`PathOram::write_back_for`]. Between the
//! two the block is pinned in the stash; several blocks may be pending at once.

use rustc_hash::FxHashMap as HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::codec::BLOCK_BYTES;
use crate::Op;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OramError {
    #[error("invalid ORAM configuration: {0}")]
    InvalidConfig(String),
    #[error("{requested} blocks exceed ORAM capacity {capacity}")]
    OverCapacity { requested: u64, capacity: u64 },
    #[error("block {0} is not mapped")]
    UnknownBlock(u64),
    #[error("block {0} already has a pending path")]
    AlreadyPending(u64),
    #[error("block {0} has no pending path")]
    NotPending(u64),
    #[error("ORAM stash overflow: {blocks} blocks, capacity {capacity}")]
    StashOverflow { blocks: usize, capacity: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OramConfig {
    pub levels: u32,
    pub z: usize,
    pub stash_bytes: usize,
    pub utilization: f64,
}

impl Default for OramConfig {
    fn default() -> Self {
        OramConfig {
            levels: 27,
            z: 4,
            stash_bytes: 32 * 1024,
            utilization: 0.5,
        }
    }
}

impl OramConfig {
    pub fn validate(&self) -> Result<(), OramError> {
        if !(1..=48).contains(&self.levels) {
            return Err(OramError::InvalidConfig(format!("levels {} not in 1..=48", self.levels)));
        }
        if self.z == 0 {
            return Err(OramError::InvalidConfig("bucket size must be positive".into()));
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(OramError::InvalidConfig(format!(
                "utilization {} not in (0, 1]",
                self.utilization
            )));
        }
        if self.stash_blocks() == 0 {
            return Err(OramError::InvalidConfig("stash holds no blocks".into()));
        }
        Ok(())
    }

    pub fn leaves(&self) -> u64 {
        1u64 << (self.levels - 1)
    }

    pub fn buckets(&self) -> u64 {
        (1u64 << self.levels) - 1
    }

    pub fn capacity_blocks(&self) -> u64 {
        (self.utilization * (self.z as u64 * self.buckets()) as f64) as u64
    }

    pub fn stash_blocks(&self) -> usize {
        self.stash_bytes / BLOCK_BYTES
    }

    /// Blocks transferred in one direction per path.
    pub fn path_blocks(&self) -> usize {
        self.levels as usize * self.z
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OramStats {
    pub accesses: u64,
    pub block_reads: u64,
    pub block_writes: u64,
    pub peak_stash: usize,
}

#[derive(Debug, Clone)]
struct Slot<T> {
    id: u64,
    data: T,
}

#[derive(Debug, Clone)]
pub struct PathOram<T> {
    cfg: OramConfig,
    position: Vec<u64>,
    buckets: HashMap<u64, Vec<Slot<T>>>,
    stash: Vec<Slot<T>>,
    // pinned block -> leaf of the path read for it
    pending: HashMap<u64, u64>,
    // leaves written back since the last eviction
    written: Vec<u64>,
    rng: ChaCha12Rng,
    stats: OramStats,
}

impl<T: Clone> PathOram<T> {
    /// Builds a tree holding blocks `0..blocks`, each initialised by `init`
    /// and mapped to a uniformly random leaf.
    pub fn new(
        cfg: OramConfig,
        blocks: u64,
        mut init: impl FnMut(u64) -> T,
        seed: u64,
    ) -> Result<Self, OramError> {
        cfg.validate()?;
        if blocks > cfg.capacity_blocks() {
            return Err(OramError::OverCapacity {
                requested: blocks,
                capacity: cfg.capacity_blocks(),
            });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let leaves = cfg.leaves();
        let position: Vec<u64> = (0..blocks).map(|_| rng.gen_range(0..leaves)).collect();
        let mut oram = PathOram {
            cfg,
            position,
            buckets: HashMap::default(),
            stash: Vec::new(),
            pending: HashMap::default(),
            written: Vec::new(),
            rng,
            stats: OramStats::default(),
        };
        for id in 0..blocks {
            let leaf = oram.position[id as usize];
            let data = init(id);
            let node = (0..cfg.levels)
                .rev()
                .map(|level| oram.node_at(leaf, level))
                .find(|node| oram.buckets.get(node).map_or(0, Vec::len) < cfg.z);
            match node {
                Some(node) => oram.buckets.entry(node).or_default().push(Slot { id, data }),
                None => oram.stash.push(Slot { id, data }),
            }
        }
        oram.check_stash()?;
        Ok(oram)
    }

    pub fn config(&self) -> &OramConfig {
        &self.cfg
    }

    pub fn stats(&self) -> OramStats {
        self.stats
    }

    pub fn blocks(&self) -> u64 {
        self.position.len() as u64
    }

    pub fn stash_len(&self) -> usize {
        self.stash.len()
    }

    pub fn leaf_of(&self, block: u64) -> Option<u64> {
        self.position.get(block as usize).copied()
    }

    /// Heap index of the bucket at `level` on the path to `leaf`.
    pub fn node_at(&self, leaf: u64, level: u32) -> u64 {
        let top = self.cfg.levels - 1;
        ((1u64 << top) + leaf) >> (top - level)
    }

    /// Physical block addresses of a path, root first.
    pub fn path_addresses(&self, leaf: u64) -> Vec<u64> {
        let z = self.cfg.z as u64;
        (0..self.cfg.levels)
            .flat_map(|level| {
                let base = (self.node_at(leaf, level) - 1) * z;
                base..base + z
            })
            .collect()
    }

    /// Reads the path holding `block` into the stash, remaps the block to a
    /// fresh leaf and pins it. Returns the addresses read.
    pub fn read_path_for(&mut self, block: u64) -> Result<Vec<u64>, OramError> {
        let old_leaf = self.leaf_of(block).ok_or(OramError::UnknownBlock(block))?;
        if self.pending.contains_key(&block) {
            return Err(OramError::AlreadyPending(block));
        }
        for level in 0..self.cfg.levels {
            let node = self.node_at(old_leaf, level);
            if let Some(bucket) = self.buckets.remove(&node) {
                self.stash.extend(bucket);
            }
        }
        self.position[block as usize] = self.rng.gen_range(0..self.cfg.leaves());
        self.pending.insert(block, old_leaf);
        self.stats.block_reads += self.cfg.path_blocks() as u64;
        self.stats.peak_stash = self.stats.peak_stash.max(self.stash.len());
        Ok(self.path_addresses(old_leaf))
    }

    /// Current value of any block, without an access.
    pub fn peek(&self, block: u64) -> Option<&T> {
        let leaf = self.leaf_of(block)?;
        if let Some(s) = self.stash.iter().find(|s| s.id == block) {
            return Some(&s.data);
        }
        (0..self.cfg.levels).find_map(|level| {
            self.buckets
                .get(&self.node_at(leaf, level))?
                .iter()
                .find(|s| s.id == block)
                .map(|s| &s.data)
        })
    }

    /// Value of a pinned block.
    pub fn pending_value(&self, block: u64) -> Option<&T> {
        if !self.pending.contains_key(&block) {
            return None;
        }
        self.stash.iter().find(|s| s.id == block).map(|s| &s.data)
    }

    /// Unpins `block`, optionally replacing its value, and schedules the
    /// path it was read from for write-back. Returns the addresses written.
    ///
    /// Placement happens once no path is pending: stash blocks are evicted
    /// greedily, deepest first, into the union of the paths written since
    /// the last eviction. With one access in flight this is the usual
    /// per-path eviction.
    pub fn write_back_for(&mut self, block: u64, data: Option<T>) -> Result<Vec<u64>, OramError> {
        let leaf = self.pending.remove(&block).ok_or(OramError::NotPending(block))?;
        if let Some(data) = data {
            match self.stash.iter_mut().find(|s| s.id == block) {
                Some(slot) => slot.data = data,
                None => return Err(OramError::UnknownBlock(block)),
            }
        }
        self.written.push(leaf);
        self.stats.block_writes += self.cfg.path_blocks() as u64;
        self.stats.accesses += 1;
        if self.pending.is_empty() {
            self.evict();
            self.check_stash()?;
        }
        Ok(self.path_addresses(leaf))
    }

    fn evict(&mut self) {
        let top = self.cfg.levels - 1;
        let leaves = std::mem::take(&mut self.written);
        // deepest level each stash block shares with any written path
        let mut cand: Vec<(u32, usize)> = self
            .stash
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let pos = self.position[s.id as usize];
                let depth = leaves
                    .iter()
                    .map(|&leaf| top - (u64::BITS - (pos ^ leaf).leading_zeros()))
                    .max()
                    .expect("at least one path written");
                (depth, i)
            })
            .collect();
        cand.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut free: HashMap<u64, usize> = HashMap::default();
        let mut placed: Vec<(usize, u64)> = Vec::new();
        for (depth, i) in cand {
            let leaf = self.position[self.stash[i].id as usize];
            for level in (0..=depth).rev() {
                let node = self.node_at(leaf, level);
                let room = free
                    .entry(node)
                    .or_insert_with(|| self.cfg.z - self.buckets.get(&node).map_or(0, Vec::len));
                if *room > 0 {
                    *room -= 1;
                    placed.push((i, node));
                    break;
                }
            }
        }
        placed.sort_unstable_by_key(|p| std::cmp::Reverse(p.0));
        for (i, node) in placed {
            let slot = self.stash.swap_remove(i);
            self.buckets.entry(node).or_default().push(slot);
        }
    }

    /// One complete access. Returns the block's value before the access and
    /// the physical transactions (path reads then path writes).
    pub fn access(
        &mut self,
        op: Op,
        block: u64,
        data: Option<T>,
    ) -> Result<(T, Vec<(Op, u64)>), OramError> {
        let reads = self.read_path_for(block)?;
        let old = self
            .pending_value(block)
            .cloned()
            .ok_or(OramError::UnknownBlock(block))?;
        let new = if op == Op::Write { data } else { None };
        let writes = self.write_back_for(block, new)?;
        let tx = reads
            .into_iter()
            .map(|a| (Op::Read, a))
            .chain(writes.into_iter().map(|a| (Op::Write, a)))
            .collect();
        Ok((old, tx))
    }

    fn check_stash(&self) -> Result<(), OramError> {
        if self.stash.len() > self.cfg.stash_blocks() {
            return Err(OramError::StashOverflow {
                blocks: self.stash.len(),
                capacity: self.cfg.stash_blocks(),
            });
        }
        Ok(())
    }

    /// Every block appears exactly once, either in the stash or in a bucket
    /// on the path to its mapped leaf; no bucket exceeds `Z`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![false; self.position.len()];
        let mut mark = |id: u64| -> Result<(), String> {
            let flag = seen
                .get_mut(id as usize)
                .ok_or_else(|| format!("unknown block {id} in tree"))?;
            if *flag {
                return Err(format!("block {id} stored twice"));
            }
            *flag = true;
            Ok(())
        };
        for s in &self.stash {
            mark(s.id)?;
        }
        for (&node, bucket) in &self.buckets {
            if bucket.len() > self.cfg.z {
                return Err(format!("bucket {node} holds {} blocks", bucket.len()));
            }
            if node == 0 || node > self.cfg.buckets() {
                return Err(format!("bucket index {node} outside the tree"));
            }
            let level = 63 - node.leading_zeros();
            for s in bucket {
                mark(s.id)?;
                let leaf = self.position[s.id as usize];
                if self.node_at(leaf, level) != node {
                    return Err(format!("block {} in bucket {node} is off the path to leaf {leaf}", s.id));
                }
            }
        }
        match seen.iter().position(|&f| !f) {
            Some(id) => Err(format!("block {id} is missing")),
            None => Ok(()),
        }
    }
}
