//! The SSM memory controller.
//!
//! Every logical block is stored as `K` shares. A share is either placed in a
//! physical slot (recorded in the map) or detached and held in the stash, so
//! placed slots plus stash entries always equal `L * K`.
//!
//! One access fetches exactly `t + d` physical block frames and writes the
//! same frames back:
//!
//! 1. Up to `t` target shares are taken from the stash; the rest come from
//!    uniformly chosen placed shares, whose frames are fetched. Dummy frames
//!    fill the fetch up to `t + d`.
//! 2. Every live share in a fetched frame moves into the stash and its slot
//!    becomes free.
//! 3. The block is reconstructed from the targets (reads) or regenerated
//!    under a new write counter (writes).
//! 4. Stash shares are evicted into the free frame slots until the stash is
//!    back at its low watermark. The assignment is uniformly random subject
//!    to the rule that two shares of one block never share a frame. Leftover
//!    slots receive random junk.
//!
//! A write fetches frames holding old shares of the block just like a read,
//! so both produce the same shape. Old slots are released lazily: they are
//! marked free and overwritten only when reused.
//!
//! With `op_type_protection` every access is a read followed by a rewrite of
//! all `K` shares. With `oram_backend` each frame fetch and write-back is a
//! Path ORAM access over the frame space.

use rustc_hash::FxHashSet as HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::codec::{
    reconstruct, segment_block, CodecError, CodecParams, DataBlock, Integrity, Reconstruction,
    SeedContext, Share,
};
use crate::layout::{init_layout, GeometryConfig, LayoutError, Move, Owner, ShareLocation, SsmMap};
use crate::pathoram::{OramConfig, OramError, PathOram};
use crate::stash::{needs_shuffle, Stash, StashConfig, StashEntry, StashError};
use crate::Op;

/// Fresh plans tried before an access gives up with a capacity error.
pub const MAX_PLAN_ATTEMPTS: usize = 8;

#[derive(Debug, Error)]
pub enum SsmError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Stash(#[from] StashError),
    #[error(transparent)]
    Oram(#[from] OramError),
    #[error("invalid controller configuration: {0}")]
    Config(String),
    #[error("no feasible placement for block {addr} after {attempts} attempts")]
    Capacity { addr: u64, attempts: usize },
    #[error("write to block {0} without data")]
    MissingData(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsmConfig {
    pub codec: CodecParams,
    pub geom: GeometryConfig,
    pub stash: StashConfig,
    pub d: usize,
    pub op_type_protection: bool,
    pub oram_backend: bool,
    pub oram: OramConfig,
    pub seed: u64,
    pub seed_key: u128,
}

pub const DEFAULT_LOGICAL_BLOCKS: u32 = 16_384;
pub const DEFAULT_SEED_KEY: u128 = 0x53_534d_5f6b_6579_0000_0000_0000_0001;

impl Default for SsmConfig {
    fn default() -> Self {
        let codec = CodecParams::default();
        SsmConfig {
            codec,
            geom: GeometryConfig::for_params(DEFAULT_LOGICAL_BLOCKS, &codec),
            stash: StashConfig::default(),
            d: 16,
            op_type_protection: false,
            oram_backend: false,
            oram: OramConfig::default(),
            seed: 0,
            seed_key: DEFAULT_SEED_KEY,
        }
    }
}

impl SsmConfig {
    /// Defaults over `logical_blocks` blocks.
    pub fn with_logical_blocks(logical_blocks: u32) -> Self {
        let codec = CodecParams::default();
        SsmConfig {
            geom: GeometryConfig::for_params(logical_blocks, &codec),
            ..SsmConfig::default()
        }
    }

    pub fn frames_per_access(&self) -> usize {
        self.codec.t + self.d
    }

    pub fn validate(&self) -> Result<(), SsmError> {
        self.codec.validate()?;
        self.geom.validate(&self.codec)?;
        self.stash.validate()?;
        if self.frames_per_access() > self.geom.physical_blocks as usize {
            return Err(SsmError::Config(format!(
                "t + d = {} exceeds {} physical blocks",
                self.frames_per_access(),
                self.geom.physical_blocks
            )));
        }
        if self.oram_backend {
            self.oram.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CodecOps {
    pub segmentations: u32,
    pub reconstructions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TamperAlarm {
    pub addr: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessResult {
    pub op: Op,
    pub addr: u64,
    /// Reconstructed block (reads and op-type-protected accesses).
    pub data: Option<DataBlock>,
    pub integrity: Integrity,
    pub transactions: Vec<(Op, u64)>,
    pub codec_ops: CodecOps,
    /// Target shares served from the stash.
    pub stash_hits: u32,
    /// Ordinals of the `t` shares used for reconstruction.
    pub selected_ordinals: Vec<u16>,
    /// Fetched frames, in fetch order.
    pub frames: Vec<u32>,
    pub alarm: Option<TamperAlarm>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SsmStats {
    pub reads: u64,
    pub writes: u64,
    pub block_reads: u64,
    pub block_writes: u64,
    pub stash_hits: u64,
    pub shuffles: u64,
    pub evicted_shares: u64,
    pub tamper_alarms: u64,
    pub plan_retries: u64,
    pub segmentations: u64,
    pub reconstructions: u64,
}

#[derive(Debug, Clone)]
enum FrameStore {
    Direct(Vec<Share>),
    Oram(Box<PathOram<Vec<Share>>>),
}

/// Randomly assigns `pool` shares to the slots of `frames` such that no frame
/// receives two shares of one logical block. Returns the moves and the
/// shares that found no slot.
pub fn shuffle_round<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &[Owner],
    frames: &[u32],
    shares_per_block: u16,
) -> (Vec<Move>, Vec<Owner>) {
    let mut slots: Vec<ShareLocation> = frames
        .iter()
        .flat_map(|&b| (0..shares_per_block).map(move |s| ShareLocation::new(b, s)))
        .collect();
    slots.shuffle(rng);
    let mut order: Vec<Owner> = pool.to_vec();
    order.shuffle(rng);

    let mut taken = vec![false; slots.len()];
    let mut used: HashSet<(u32, u32)> = HashSet::with_capacity_and_hasher(pool.len(), Default::default());
    let mut moves = Vec::with_capacity(pool.len().min(slots.len()));
    let mut left = Vec::new();
    let mut cursor = 0;
    for owner in order {
        while cursor < slots.len() && taken[cursor] {
            cursor += 1;
        }
        let found = (cursor..slots.len())
            .find(|&i| !taken[i] && !used.contains(&(slots[i].block, owner.logical)));
        match found {
            Some(i) => {
                taken[i] = true;
                used.insert((slots[i].block, owner.logical));
                moves.push(Move { owner, to: slots[i] });
            }
            None => left.push(owner),
        }
    }
    (moves, left)
}

struct Plan {
    targets: Vec<u16>,
    hits: Vec<u16>,
    frames: Vec<u32>,
    moves: Vec<Move>,
}

#[derive(Debug, Clone)]
pub struct SsmController {
    cfg: SsmConfig,
    map: SsmMap,
    stash: Stash,
    counters: Vec<u64>,
    frames: FrameStore,
    rng: ChaCha12Rng,
    stats: SsmStats,
}

fn junk<R: RngCore + ?Sized>(rng: &mut R) -> Share {
    Share::new(rng.next_u64(), rng.next_u64())
}

impl SsmController {
    /// Builds memory with every block holding zeros under write counter 0.
    pub fn new(cfg: SsmConfig) -> Result<Self, SsmError> {
        cfg.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let map = init_layout(cfg.geom, &cfg.codec, &mut rng)?;
        let s = cfg.geom.shares_per_block as usize;
        let mut memory: Vec<Share> = (0..cfg.geom.total_slots()).map(|_| junk(&mut rng)).collect();
        let zero = DataBlock::zeroed();
        for logical in 0..cfg.geom.logical_blocks {
            let ctx = SeedContext {
                seed_key: cfg.seed_key,
                logical_addr: logical as u64,
                write_counter: 0,
            };
            let shares = segment_block(&zero, &cfg.codec, &ctx, &mut rng);
            for (ordinal, share) in shares.into_iter().enumerate() {
                let loc = map
                    .location_of(Owner::new(logical, ordinal as u16))
                    .expect("initial layout places every share");
                memory[loc.block as usize * s + loc.slot as usize] = share;
            }
        }
        let frames = if cfg.oram_backend {
            let oram_seed = rng.next_u64();
            let oram = PathOram::new(
                cfg.oram,
                cfg.geom.physical_blocks as u64,
                |b| memory[b as usize * s..(b as usize + 1) * s].to_vec(),
                oram_seed,
            )?;
            FrameStore::Oram(Box::new(oram))
        } else {
            FrameStore::Direct(memory)
        };
        Ok(SsmController {
            cfg,
            map,
            stash: Stash::new(cfg.stash)?,
            counters: vec![0; cfg.geom.logical_blocks as usize],
            frames,
            rng,
            stats: SsmStats::default(),
        })
    }

    pub fn config(&self) -> &SsmConfig {
        &self.cfg
    }

    pub fn stats(&self) -> SsmStats {
        self.stats
    }

    pub fn map(&self) -> &SsmMap {
        &self.map
    }

    pub fn stash(&self) -> &Stash {
        &self.stash
    }

    pub fn write_counter(&self, addr: u64) -> Option<u64> {
        self.counters.get(addr as usize).copied()
    }

    pub fn oram(&self) -> Option<&PathOram<Vec<Share>>> {
        match &self.frames {
            FrameStore::Oram(o) => Some(o),
            FrameStore::Direct(_) => None,
        }
    }

    fn ctx(&self, addr: u64, counter: u64) -> SeedContext {
        SeedContext {
            seed_key: self.cfg.seed_key,
            logical_addr: addr,
            write_counter: counter,
        }
    }

    fn check_addr(&self, addr: u64) -> Result<(), SsmError> {
        if addr >= self.cfg.geom.logical_blocks as u64 {
            return Err(LayoutError::UnknownLogical(addr).into());
        }
        Ok(())
    }

    /// Raw slot contents of a frame, without an access. Test and debug aid.
    pub fn frame(&self, block: u32) -> Vec<Share> {
        let s = self.cfg.geom.shares_per_block as usize;
        match &self.frames {
            FrameStore::Direct(mem) => mem[block as usize * s..(block as usize + 1) * s].to_vec(),
            FrameStore::Oram(o) => o.peek(block as u64).cloned().unwrap_or_default(),
        }
    }

    /// Overwrites raw slot contents, as an attacker with bus access would.
    /// Only supported without the ORAM backend.
    pub fn tamper_slot(&mut self, loc: ShareLocation, share: Share) -> bool {
        let s = self.cfg.geom.shares_per_block as usize;
        match &mut self.frames {
            FrameStore::Direct(mem) => {
                mem[loc.block as usize * s + loc.slot as usize] = share;
                true
            }
            FrameStore::Oram(_) => false,
        }
    }

    /// Current value of a share, wherever it lives.
    pub fn share_of(&self, owner: Owner) -> Option<Share> {
        if let Some(share) = self.stash.peek(owner) {
            return Some(share);
        }
        let loc = self.map.location_of(owner)?;
        self.frame(loc.block).get(loc.slot as usize).copied()
    }

    /// Reconstructs a block from its current shares without performing an
    /// access.
    pub fn peek_block(&self, addr: u64) -> Result<Reconstruction, SsmError> {
        self.check_addr(addr)?;
        let shares: Vec<Share> = (0..self.cfg.codec.k as u16)
            .filter_map(|o| self.share_of(Owner::new(addr as u32, o)))
            .take(self.cfg.codec.t)
            .collect();
        let ctx = self.ctx(addr, self.counters[addr as usize]);
        Ok(reconstruct(&shares, &self.cfg.codec, &ctx)?)
    }

    /// Placed shares plus stash entries; equals `L * K` at rest.
    pub fn share_population(&self) -> u64 {
        self.map.occupied_slots() + self.stash.len() as u64
    }

    /// Map/stash consistency: every share is placed or stashed, never both.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.map.check_invariants()?;
        let k = self.cfg.codec.k as u16;
        for logical in 0..self.cfg.geom.logical_blocks {
            for o in 0..k {
                let owner = Owner::new(logical, o);
                let placed = self.map.location_of(owner).is_some();
                let stashed = self.stash.contains(owner);
                if placed == stashed {
                    return Err(format!("{owner:?}: placed={placed} stashed={stashed}"));
                }
            }
        }
        let expected = self.cfg.geom.logical_blocks as u64 * k as u64;
        if self.share_population() != expected {
            return Err(format!("{} shares, expected {expected}", self.share_population()));
        }
        Ok(())
    }

    pub fn ssm_read(&mut self, addr: u64) -> Result<AccessResult, SsmError> {
        self.access_inner(Op::Read, addr, None, false)
    }

    pub fn ssm_write(&mut self, addr: u64, data: &DataBlock) -> Result<AccessResult, SsmError> {
        self.access_inner(Op::Write, addr, Some(data), false)
    }

    /// Op-type-protected access: reconstruct, then regenerate all shares.
    pub fn ssm_access_plus(
        &mut self,
        op: Op,
        addr: u64,
        data: Option<&DataBlock>,
    ) -> Result<AccessResult, SsmError> {
        self.access_inner(op, addr, data, true)
    }

    /// Dispatches according to the configured protection mode.
    pub fn access(
        &mut self,
        op: Op,
        addr: u64,
        data: Option<&DataBlock>,
    ) -> Result<AccessResult, SsmError> {
        match (self.cfg.op_type_protection, op) {
            (true, _) => self.ssm_access_plus(op, addr, data),
            (false, Op::Read) => self.ssm_read(addr),
            (false, Op::Write) => {
                let data = data.ok_or(SsmError::MissingData(addr))?;
                self.ssm_write(addr, data)
            }
        }
    }

    /// Chooses targets, frames and the eviction assignment without touching
    /// state. `regenerate` means the block's shares are replaced by `K` new
    /// ones in the stash.
    fn plan(&mut self, addr: u64, regenerate: bool) -> Option<Plan> {
        let cfg = self.cfg;
        let (t, k) = (cfg.codec.t, cfg.codec.k);
        let logical = addr as u32;
        let mut hits = Vec::new();
        let mut placed = Vec::new();
        for o in 0..k as u16 {
            if self.stash.contains(Owner::new(logical, o)) {
                hits.push(o);
            } else {
                placed.push(o);
            }
        }

        let mut targets: Vec<u16>;
        let mut real_frames = Vec::new();
        if hits.len() >= t {
            targets = sample(&mut self.rng, hits.len(), t).iter().map(|i| hits[i]).collect();
        } else {
            targets = hits.clone();
            let r = t - hits.len();
            for i in sample(&mut self.rng, placed.len(), r).iter() {
                let o = placed[i];
                targets.push(o);
                let loc = self.map.location_of(Owner::new(logical, o))?;
                real_frames.push(loc.block);
            }
        }
        targets.sort_unstable();

        let total = cfg.frames_per_access();
        let mut chosen: HashSet<u32> = real_frames.iter().copied().collect();
        let mut frames = real_frames;
        if regenerate {
            // reclaim the stale shares' slots in this access where the frame
            // budget allows
            let mut stale: Vec<u32> = placed
                .iter()
                .filter(|o| !targets.contains(o))
                .filter_map(|&o| self.map.location_of(Owner::new(logical, o)))
                .map(|loc| loc.block)
                .collect();
            stale.shuffle(&mut self.rng);
            for b in stale {
                if frames.len() >= total {
                    break;
                }
                if chosen.insert(b) {
                    frames.push(b);
                }
            }
        }
        while frames.len() < total {
            let b = self.rng.gen_range(0..cfg.geom.physical_blocks);
            if chosen.insert(b) {
                frames.push(b);
            }
        }
        frames.shuffle(&mut self.rng);

        // pool after the fetch, before eviction
        let mut pool: Vec<Owner> = self
            .stash
            .entries()
            .iter()
            .map(|e| e.owner)
            .filter(|o| !(regenerate && o.logical == logical))
            .collect();
        for &b in &frames {
            for o in self.map.block_owners(b).iter().flatten() {
                if !(regenerate && o.logical == logical) {
                    pool.push(*o);
                }
            }
        }
        if regenerate {
            pool.extend((0..k as u16).map(|o| Owner::new(logical, o)));
        }

        let capacity = cfg.stash.capacity_shares();
        if pool.len() > capacity {
            return None;
        }
        let low = cfg.stash.low_shares();
        let slots = total * cfg.geom.shares_per_block as usize;
        let evict = pool.len().saturating_sub(low).min(slots);
        let chosen: Vec<Owner> = sample(&mut self.rng, pool.len(), evict)
            .iter()
            .map(|i| pool[i])
            .collect();
        let (moves, _) = shuffle_round(&mut self.rng, &chosen, &frames, cfg.geom.shares_per_block);
        let after = (pool.len() - moves.len()) * crate::codec::SHARE_BYTES;
        if needs_shuffle(&cfg.stash, after) {
            return None;
        }
        Some(Plan {
            targets,
            hits,
            frames,
            moves,
        })
    }

    fn fetch(&mut self, frames: &[u32], tx: &mut Vec<(Op, u64)>) -> Result<Vec<Vec<Share>>, SsmError> {
        let s = self.cfg.geom.shares_per_block as usize;
        let mut out = Vec::with_capacity(frames.len());
        match &mut self.frames {
            FrameStore::Direct(mem) => {
                for &b in frames {
                    tx.push((Op::Read, b as u64));
                    out.push(mem[b as usize * s..(b as usize + 1) * s].to_vec());
                }
            }
            FrameStore::Oram(oram) => {
                for &b in frames {
                    let addrs = oram.read_path_for(b as u64)?;
                    tx.extend(addrs.into_iter().map(|a| (Op::Read, a)));
                    let value = oram.pending_value(b as u64).cloned();
                    out.push(value.ok_or(OramError::UnknownBlock(b as u64))?);
                }
            }
        }
        Ok(out)
    }

    fn store(&mut self, frames: &[u32], contents: Vec<Vec<Share>>, tx: &mut Vec<(Op, u64)>) -> Result<(), SsmError> {
        let s = self.cfg.geom.shares_per_block as usize;
        match &mut self.frames {
            FrameStore::Direct(mem) => {
                for (&b, shares) in frames.iter().zip(contents) {
                    tx.push((Op::Write, b as u64));
                    mem[b as usize * s..(b as usize + 1) * s].copy_from_slice(&shares);
                }
            }
            FrameStore::Oram(oram) => {
                for (&b, shares) in frames.iter().zip(contents) {
                    let addrs = oram.write_back_for(b as u64, Some(shares))?;
                    tx.extend(addrs.into_iter().map(|a| (Op::Write, a)));
                }
            }
        }
        Ok(())
    }

    fn access_inner(
        &mut self,
        op: Op,
        addr: u64,
        data: Option<&DataBlock>,
        plus: bool,
    ) -> Result<AccessResult, SsmError> {
        self.check_addr(addr)?;
        if op == Op::Write && data.is_none() {
            return Err(SsmError::MissingData(addr));
        }
        let regenerate = plus || op == Op::Write;
        let mut plan = None;
        for attempt in 0..MAX_PLAN_ATTEMPTS {
            if attempt > 0 {
                self.stats.plan_retries += 1;
            }
            plan = self.plan(addr, regenerate);
            if plan.is_some() {
                break;
            }
        }
        let plan = plan.ok_or(SsmError::Capacity {
            addr,
            attempts: MAX_PLAN_ATTEMPTS,
        })?;

        let logical = addr as u32;
        let s = self.cfg.geom.shares_per_block as usize;
        let mut tx = Vec::with_capacity(2 * plan.frames.len());
        let mut codec_ops = CodecOps::default();

        // 1. fetch and detach
        let fetched = self.fetch(&plan.frames, &mut tx)?;
        let mut target_shares: Vec<Share> = Vec::with_capacity(self.cfg.codec.t);
        for &o in &plan.targets {
            if let Some(share) = self.stash.lookup(Owner::new(logical, o)) {
                target_shares.push(share);
            }
        }
        let mut incoming = Vec::new();
        for (&b, contents) in plan.frames.iter().zip(&fetched) {
            for (slot, owner) in self.map.block_owners(b).iter().enumerate() {
                if let Some(owner) = owner {
                    incoming.push(StashEntry {
                        owner: *owner,
                        share: contents[slot],
                    });
                }
            }
        }
        for e in &incoming {
            if e.owner.logical == logical && plan.targets.contains(&e.owner.ordinal) && !plan.hits.contains(&e.owner.ordinal) {
                target_shares.push(e.share);
            }
        }
        let owners: Vec<Owner> = incoming.iter().map(|e| e.owner).collect();
        self.map.detach(&owners)?;

        // 2. reconstruct
        let counter = self.counters[addr as usize];
        let mut integrity = Integrity::Pass;
        let mut value = None;
        if op == Op::Read || plus {
            codec_ops.reconstructions += 1;
            let ctx = self.ctx(addr, counter);
            match reconstruct(&target_shares, &self.cfg.codec, &ctx) {
                Ok(rec) => {
                    integrity = rec.integrity;
                    value = Some(rec.block);
                }
                Err(CodecError::DuplicateX(_)) | Err(CodecError::NodeCollision(_)) => {
                    integrity = Integrity::Fail;
                    value = Some(DataBlock::zeroed());
                }
                Err(e) => return Err(e.into()),
            }
        }

        // 3. regenerate, unless a tampered block would be laundered
        let regenerate = regenerate && integrity.passed();
        if regenerate {
            self.stash.insert(
                &incoming
                    .iter()
                    .filter(|e| e.owner.logical != logical)
                    .copied()
                    .collect::<Vec<_>>(),
            )?;
            let k = self.cfg.codec.k as u16;
            let all: Vec<Owner> = (0..k).map(|o| Owner::new(logical, o)).collect();
            for &o in &all {
                self.stash.remove(o);
            }
            self.map.detach(&all)?;
            let new_data = match op {
                Op::Write => *data.expect("checked above"),
                Op::Read => value.expect("reconstructed above"),
            };
            let new_counter = counter + 1;
            self.counters[addr as usize] = new_counter;
            let ctx = self.ctx(addr, new_counter);
            let shares = segment_block(&new_data, &self.cfg.codec, &ctx, &mut self.rng);
            codec_ops.segmentations += 1;
            let fresh: Vec<StashEntry> = shares
                .into_iter()
                .enumerate()
                .map(|(o, share)| StashEntry {
                    owner: Owner::new(logical, o as u16),
                    share,
                })
                .collect();
            self.stash.insert(&fresh)?;
        } else {
            self.stash.insert(&incoming)?;
        }

        // 4. evict into the fetched frames
        let mut contents: Vec<Vec<Share>> = Vec::with_capacity(plan.frames.len());
        for _ in &plan.frames {
            contents.push((0..s).map(|_| junk(&mut self.rng)).collect());
        }
        let frame_index = |b: u32| plan.frames.iter().position(|&f| f == b).expect("planned frame");
        let mut moves = Vec::with_capacity(plan.moves.len());
        for m in &plan.moves {
            if let Some(e) = self.stash.remove(m.owner) {
                contents[frame_index(m.to.block)][m.to.slot as usize] = e.share;
                moves.push(*m);
            }
        }
        self.map.remap(&moves)?;
        if !moves.is_empty() {
            self.stats.shuffles += 1;
            self.stats.evicted_shares += moves.len() as u64;
        }

        // 5. write back
        self.store(&plan.frames, contents, &mut tx)?;

        let hits = plan.targets.iter().filter(|o| plan.hits.contains(o)).count() as u32;
        let alarm = (!integrity.passed()).then_some(TamperAlarm { addr });
        self.stats.stash_hits += hits as u64;
        self.stats.segmentations += codec_ops.segmentations as u64;
        self.stats.reconstructions += codec_ops.reconstructions as u64;
        for (o, _) in &tx {
            match o {
                Op::Read => self.stats.block_reads += 1,
                Op::Write => self.stats.block_writes += 1,
            }
        }
        match op {
            Op::Read => self.stats.reads += 1,
            Op::Write => self.stats.writes += 1,
        }
        if alarm.is_some() {
            self.stats.tamper_alarms += 1;
        }
        Ok(AccessResult {
            op,
            addr,
            data: value,
            integrity,
            transactions: tx,
            codec_ops,
            stash_hits: hits,
            selected_ordinals: plan.targets,
            frames: plan.frames,
            alarm,
        })
    }
}
