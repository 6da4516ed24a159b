//! The 1-to-K share map and slot allocation over physical share blocks.
//!
//! Physical memory is `physical_blocks` blocks of `S` share slots each. Every
//! logical block owns `K` shares, identified by `(logical, ordinal)`. A share
//! is either placed in a slot or detached (held on-controller in the stash).
//! The placed shares of one logical block always sit in distinct physical
//! blocks, so fetching `t` blocks yields exactly `t` of its shares.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::io::{self, Read, Write};

use rand::Rng;
use thiserror::Error;

use crate::codec::CodecParams;

pub const DEFAULT_SLACK: f64 = 1.1;
pub const DEFAULT_SHARES_PER_BLOCK: u16 = 4;

const DUMP_MAGIC: &[u8; 8] = b"SSMMAP\0\x01";
const DETACHED: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("insufficient capacity: need {needed} slots, have {available}")]
    InsufficientCapacity { needed: u64, available: u64 },
    #[error("{physical} physical blocks cannot hold {k} shares in distinct blocks")]
    TooFewBlocks { physical: u32, k: usize },
    #[error("unknown logical block {0}")]
    UnknownLogical(u64),
    #[error("unknown share ordinal {ordinal} for logical block {logical}")]
    UnknownOrdinal { logical: u32, ordinal: u16 },
    #[error("location ({block}, {slot}) is outside the geometry")]
    InvalidLocation { block: u32, slot: u16 },
    #[error("slot ({block}, {slot}) is occupied or targeted twice")]
    SlotConflict { block: u32, slot: u16 },
    #[error("logical block {logical} would hold two shares in physical block {block}")]
    DistinctBlockViolation { logical: u32, block: u32 },
    #[error("share ({logical}, {ordinal}) moved twice in one batch")]
    DuplicateMove { logical: u32, ordinal: u16 },
    #[error("malformed map dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShareLocation {
    pub block: u32,
    pub slot: u16,
}

impl ShareLocation {
    pub fn new(block: u32, slot: u16) -> Self {
        ShareLocation { block, slot }
    }
}

/// Identity of one share: which logical block and which of its `K` ordinals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Owner {
    pub logical: u32,
    pub ordinal: u16,
}

impl Owner {
    pub fn new(logical: u32, ordinal: u16) -> Self {
        Owner { logical, ordinal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub owner: Owner,
    pub to: ShareLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometryConfig {
    pub logical_blocks: u32,
    /// `S`: share slots per 64-byte physical block.
    pub shares_per_block: u16,
    pub physical_blocks: u32,
}

impl GeometryConfig {
    /// Sizes physical memory at `slack` times the `logical * K / S` minimum.
    pub fn with_slack(logical_blocks: u32, k: usize, shares_per_block: u16, slack: f64) -> Self {
        let min = logical_blocks as f64 * k as f64 / shares_per_block as f64;
        // tolerate float noise such as 8000 * 1.1 = 8800.000000000001
        let physical = ((min * slack - 1e-9).ceil() as u32).max(k as u32);
        GeometryConfig {
            logical_blocks,
            shares_per_block,
            physical_blocks: physical,
        }
    }

    pub fn for_params(logical_blocks: u32, params: &CodecParams) -> Self {
        Self::with_slack(logical_blocks, params.k, DEFAULT_SHARES_PER_BLOCK, DEFAULT_SLACK)
    }

    pub fn total_slots(&self) -> u64 {
        self.physical_blocks as u64 * self.shares_per_block as u64
    }

    pub fn validate(&self, params: &CodecParams) -> Result<(), LayoutError> {
        let needed = self.logical_blocks as u64 * params.k as u64;
        if needed > self.total_slots() {
            return Err(LayoutError::InsufficientCapacity {
                needed,
                available: self.total_slots(),
            });
        }
        if (self.physical_blocks as usize) < params.k || self.shares_per_block == 0 {
            return Err(LayoutError::TooFewBlocks {
                physical: self.physical_blocks,
                k: params.k,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsmMap {
    geom: GeometryConfig,
    params: CodecParams,
    forward: Vec<Option<ShareLocation>>,
    reverse: Vec<Option<Owner>>,
    placed: u64,
}

/// Places every logical block's `K` shares in `K` distinct random physical
/// blocks, each in a random free slot of that block.
pub fn init_layout<R: Rng + ?Sized>(
    geom: GeometryConfig,
    params: &CodecParams,
    rng: &mut R,
) -> Result<SsmMap, LayoutError> {
    geom.validate(params)?;
    let mut map = SsmMap::empty(geom, *params);
    let s = geom.shares_per_block as usize;
    let k = params.k;

    let mut open: Vec<u32> = (0..geom.physical_blocks).collect();
    let mut free_in_block = vec![s as u16; geom.physical_blocks as usize];
    let mut free_slots: Vec<u16> = Vec::with_capacity(s);

    for logical in 0..geom.logical_blocks {
        if open.len() < k {
            return Err(LayoutError::InsufficientCapacity {
                needed: k as u64,
                available: open.len() as u64,
            });
        }
        // partial Fisher-Yates: open[0..k] become the chosen blocks
        for i in 0..k {
            let j = rng.gen_range(i..open.len());
            open.swap(i, j);
        }
        for (ordinal, &block) in open[..k].iter().enumerate() {
            free_slots.clear();
            free_slots.extend((0..s as u16).filter(|&slot| {
                map.reverse[map.slot_index(ShareLocation::new(block, slot))].is_none()
            }));
            let slot = free_slots[rng.gen_range(0..free_slots.len())];
            let loc = ShareLocation::new(block, slot);
            let idx = map.slot_index(loc);
            let owner = Owner::new(logical, ordinal as u16);
            map.reverse[idx] = Some(owner);
            let fidx = map.forward_index(owner);
            map.forward[fidx] = Some(loc);
            free_in_block[block as usize] -= 1;
        }
        map.placed += k as u64;
        for i in (0..k).rev() {
            if free_in_block[open[i] as usize] == 0 {
                open.swap_remove(i);
            }
        }
    }
    Ok(map)
}

impl SsmMap {
    fn empty(geom: GeometryConfig, params: CodecParams) -> Self {
        SsmMap {
            geom,
            params,
            forward: vec![None; geom.logical_blocks as usize * params.k],
            reverse: vec![None; geom.total_slots() as usize],
            placed: 0,
        }
    }

    pub fn geometry(&self) -> &GeometryConfig {
        &self.geom
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    fn slot_index(&self, loc: ShareLocation) -> usize {
        loc.block as usize * self.geom.shares_per_block as usize + loc.slot as usize
    }

    fn forward_index(&self, owner: Owner) -> usize {
        owner.logical as usize * self.params.k + owner.ordinal as usize
    }

    fn check_owner(&self, owner: Owner) -> Result<(), LayoutError> {
        if owner.logical >= self.geom.logical_blocks {
            return Err(LayoutError::UnknownLogical(owner.logical as u64));
        }
        if owner.ordinal as usize >= self.params.k {
            return Err(LayoutError::UnknownOrdinal {
                logical: owner.logical,
                ordinal: owner.ordinal,
            });
        }
        Ok(())
    }

    fn check_location(&self, loc: ShareLocation) -> Result<(), LayoutError> {
        if loc.block >= self.geom.physical_blocks || loc.slot >= self.geom.shares_per_block {
            return Err(LayoutError::InvalidLocation {
                block: loc.block,
                slot: loc.slot,
            });
        }
        Ok(())
    }

    /// The `K` placements of `logical`; `None` marks a detached share.
    pub fn lookup(&self, logical: u64) -> Result<&[Option<ShareLocation>], LayoutError> {
        if logical >= self.geom.logical_blocks as u64 {
            return Err(LayoutError::UnknownLogical(logical));
        }
        let base = logical as usize * self.params.k;
        Ok(&self.forward[base..base + self.params.k])
    }

    pub fn location_of(&self, owner: Owner) -> Option<ShareLocation> {
        self.forward.get(self.forward_index(owner)).copied().flatten()
    }

    pub fn owner_at(&self, loc: ShareLocation) -> Option<Owner> {
        self.reverse.get(self.slot_index(loc)).copied().flatten()
    }

    /// Owners of each slot of `block`, slot order.
    pub fn block_owners(&self, block: u32) -> &[Option<Owner>] {
        let s = self.geom.shares_per_block as usize;
        let base = block as usize * s;
        &self.reverse[base..base + s]
    }

    pub fn occupied_slots(&self) -> u64 {
        self.placed
    }

    pub fn detached_shares(&self) -> u64 {
        self.forward.len() as u64 - self.placed
    }

    /// Size of the forward table as dumped (6 bytes per entry).
    pub fn map_bytes(&self) -> u64 {
        self.forward.len() as u64 * 6
    }

    pub fn free_slots_in(&self, blocks: &[u32]) -> Vec<ShareLocation> {
        let mut out = Vec::new();
        for &block in blocks {
            if block >= self.geom.physical_blocks {
                continue;
            }
            for slot in 0..self.geom.shares_per_block {
                let loc = ShareLocation::new(block, slot);
                if self.reverse[self.slot_index(loc)].is_none() {
                    out.push(loc);
                }
            }
        }
        out
    }

    /// Frees the slots of `owners`; the shares become detached.
    pub fn detach(&mut self, owners: &[Owner]) -> Result<(), LayoutError> {
        for &o in owners {
            self.check_owner(o)?;
        }
        for &o in owners {
            let fidx = self.forward_index(o);
            if let Some(loc) = self.forward[fidx].take() {
                let idx = self.slot_index(loc);
                self.reverse[idx] = None;
                self.placed -= 1;
            }
        }
        Ok(())
    }

    /// Applies a batch of moves atomically. A target slot must be free or
    /// vacated by another move in the same batch. On error the map is
    /// unchanged.
    pub fn remap(&mut self, moves: &[Move]) -> Result<(), LayoutError> {
        if moves.is_empty() {
            return Ok(());
        }
        let mut dest: HashMap<Owner, ShareLocation> = HashMap::with_capacity_and_hasher(moves.len(), Default::default());
        let mut targets: HashSet<usize> = HashSet::with_capacity_and_hasher(moves.len(), Default::default());
        for m in moves {
            self.check_owner(m.owner)?;
            self.check_location(m.to)?;
            if dest.insert(m.owner, m.to).is_some() {
                return Err(LayoutError::DuplicateMove {
                    logical: m.owner.logical,
                    ordinal: m.owner.ordinal,
                });
            }
            if !targets.insert(self.slot_index(m.to)) {
                return Err(LayoutError::SlotConflict {
                    block: m.to.block,
                    slot: m.to.slot,
                });
            }
        }
        for m in moves {
            if let Some(occupant) = self.owner_at(m.to) {
                if !dest.contains_key(&occupant) {
                    return Err(LayoutError::SlotConflict {
                        block: m.to.block,
                        slot: m.to.slot,
                    });
                }
            }
        }
        let mut checked = HashSet::default();
        let mut blocks = Vec::with_capacity(self.params.k);
        for m in moves {
            let logical = m.owner.logical;
            if !checked.insert(logical) {
                continue;
            }
            blocks.clear();
            for ordinal in 0..self.params.k as u16 {
                let o = Owner::new(logical, ordinal);
                let loc = dest.get(&o).copied().or_else(|| self.location_of(o));
                if let Some(loc) = loc {
                    blocks.push(loc.block);
                }
            }
            blocks.sort_unstable();
            if let Some(w) = blocks.windows(2).find(|w| w[0] == w[1]) {
                return Err(LayoutError::DistinctBlockViolation {
                    logical,
                    block: w[0],
                });
            }
        }

        for m in moves {
            let fidx = self.forward_index(m.owner);
            if let Some(old) = self.forward[fidx] {
                let idx = self.slot_index(old);
                if self.reverse[idx] == Some(m.owner) {
                    self.reverse[idx] = None;
                }
                self.placed -= 1;
            }
        }
        for m in moves {
            let idx = self.slot_index(m.to);
            self.reverse[idx] = Some(m.owner);
            let fidx = self.forward_index(m.owner);
            self.forward[fidx] = Some(m.to);
            self.placed += 1;
        }
        Ok(())
    }

    /// Verifies forward/reverse consistency, the distinct-block rule and the
    /// placed-share count.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut placed = 0u64;
        for logical in 0..self.geom.logical_blocks {
            let mut blocks = Vec::new();
            for ordinal in 0..self.params.k as u16 {
                let o = Owner::new(logical, ordinal);
                if let Some(loc) = self.location_of(o) {
                    placed += 1;
                    if self.owner_at(loc) != Some(o) {
                        return Err(format!("{o:?} -> {loc:?} not mirrored in reverse index"));
                    }
                    blocks.push(loc.block);
                }
            }
            blocks.sort_unstable();
            if blocks.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("logical {logical} has two shares in one block"));
            }
        }
        let reverse_count = self.reverse.iter().filter(|r| r.is_some()).count() as u64;
        if reverse_count != placed || placed != self.placed {
            return Err(format!(
                "placed count mismatch: forward {placed}, reverse {reverse_count}, tracked {}",
                self.placed
            ));
        }
        for (idx, owner) in self.reverse.iter().enumerate() {
            if let Some(o) = owner {
                let s = self.geom.shares_per_block as usize;
                let loc = ShareLocation::new((idx / s) as u32, (idx % s) as u16);
                if self.location_of(*o) != Some(loc) {
                    return Err(format!("slot {loc:?} claims {o:?} but forward disagrees"));
                }
            }
        }
        Ok(())
    }

    /// Deterministic binary dump: magic, geometry, codec params, then the
    /// forward table as little-endian `(u32 block, u16 slot)` entries, block
    /// `u32::MAX` marking a detached share.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), LayoutError> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.geom.logical_blocks.to_le_bytes())?;
        w.write_all(&self.geom.shares_per_block.to_le_bytes())?;
        w.write_all(&self.geom.physical_blocks.to_le_bytes())?;
        for v in [self.params.k, self.params.t, self.params.w, self.params.n_seed] {
            w.write_all(&(v as u16).to_le_bytes())?;
        }
        for entry in &self.forward {
            let (block, slot) = match entry {
                Some(loc) => (loc.block, loc.slot),
                None => (DETACHED, 0),
            };
            w.write_all(&block.to_le_bytes())?;
            w.write_all(&slot.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<SsmMap, LayoutError> {
        fn u16_at<R: Read>(r: &mut R) -> Result<u16, LayoutError> {
            let mut b = [0u8; 2];
            r.read_exact(&mut b)?;
            Ok(u16::from_le_bytes(b))
        }
        fn u32_at<R: Read>(r: &mut R) -> Result<u32, LayoutError> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b))
        }
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(LayoutError::Format("bad magic".into()));
        }
        let logical_blocks = u32_at(&mut r)?;
        let shares_per_block = u16_at(&mut r)?;
        let physical_blocks = u32_at(&mut r)?;
        let (k, t, w, n_seed) = (
            u16_at(&mut r)? as usize,
            u16_at(&mut r)? as usize,
            u16_at(&mut r)? as usize,
            u16_at(&mut r)? as usize,
        );
        let params =
            CodecParams::new(k, t, w, n_seed).map_err(|e| LayoutError::Format(e.to_string()))?;
        let geom = GeometryConfig {
            logical_blocks,
            shares_per_block,
            physical_blocks,
        };
        geom.validate(&params)?;
        let mut map = SsmMap::empty(geom, params);
        let mut moves = Vec::new();
        for logical in 0..logical_blocks {
            for ordinal in 0..k as u16 {
                let block = u32_at(&mut r)?;
                let slot = u16_at(&mut r)?;
                if block != DETACHED {
                    moves.push(Move {
                        owner: Owner::new(logical, ordinal),
                        to: ShareLocation::new(block, slot),
                    });
                }
            }
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(LayoutError::Format("trailing bytes".into()));
        }
        map.remap(&moves)?;
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_map(logical: u32, physical: u32, seed: u64) -> SsmMap {
        let geom = GeometryConfig {
            logical_blocks: logical,
            shares_per_block: 4,
            physical_blocks: physical,
        };
        init_layout(geom, &CodecParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn single_logical_block_counts() {
        let map = small_map(1, 64, 1);
        assert_eq!(map.occupied_slots(), 32);
        let all: Vec<u32> = (0..64).collect();
        assert_eq!(map.free_slots_in(&all).len(), 224);
        let mut blocks: Vec<u32> = map.lookup(0).unwrap().iter().map(|l| l.unwrap().block).collect();
        blocks.sort_unstable();
        blocks.dedup();
        assert_eq!(blocks.len(), 32);
        map.check_invariants().unwrap();
    }

    #[test]
    fn capacity_errors() {
        let geom = GeometryConfig {
            logical_blocks: 9,
            shares_per_block: 4,
            physical_blocks: 64,
        };
        let err = init_layout(geom, &CodecParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(LayoutError::InsufficientCapacity { .. })));
        let geom = GeometryConfig {
            logical_blocks: 1,
            shares_per_block: 4,
            physical_blocks: 31,
        };
        let err = init_layout(geom, &CodecParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(LayoutError::TooFewBlocks { .. })));
    }

    #[test]
    fn slack_geometry_and_full_init() {
        let geom = GeometryConfig::for_params(1000, &CodecParams::default());
        assert_eq!(geom.physical_blocks, 8800);
        let map = init_layout(geom, &CodecParams::default(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(map.occupied_slots(), 32_000);
        map.check_invariants().unwrap();
    }

    #[test]
    fn init_is_deterministic() {
        assert_eq!(small_map(20, 200, 9), small_map(20, 200, 9));
        assert_ne!(small_map(20, 200, 9), small_map(20, 200, 10));
    }

    #[test]
    fn lookup_errors_and_purity() {
        let map = small_map(2, 64, 2);
        assert!(matches!(map.lookup(2), Err(LayoutError::UnknownLogical(2))));
        assert_eq!(map.lookup(1).unwrap(), map.lookup(1).unwrap());
    }

    #[test]
    fn point_remap_updates_one_ordinal() {
        let mut map = small_map(1, 64, 4);
        let before = map.lookup(0).unwrap().to_vec();
        let used: HashSet<u32> = before.iter().map(|l| l.unwrap().block).collect();
        let target_block = (0..64).find(|b| !used.contains(b)).unwrap();
        let to = ShareLocation::new(target_block, 2);
        map.remap(&[Move { owner: Owner::new(0, 5), to }]).unwrap();
        let after = map.lookup(0).unwrap();
        for (j, loc) in after.iter().enumerate() {
            if j == 5 {
                assert_eq!(*loc, Some(to));
            } else {
                assert_eq!(*loc, before[j]);
            }
        }
        assert_eq!(map.free_slots_in(&[before[5].unwrap().block]).len(), 4);
        map.check_invariants().unwrap();
    }

    #[test]
    fn swap_between_logical_blocks() {
        let mut map = small_map(4, 64, 5);
        // find two shares of different logical blocks whose swap keeps the rule
        'outer: for ord_a in 0..32u16 {
            for ord_b in 0..32u16 {
                let a = Owner::new(0, ord_a);
                let b = Owner::new(1, ord_b);
                let (la, lb) = (map.location_of(a).unwrap(), map.location_of(b).unwrap());
                let moves = [Move { owner: a, to: lb }, Move { owner: b, to: la }];
                if map.clone().remap(&moves).is_ok() {
                    let occupied = map.occupied_slots();
                    map.remap(&moves).unwrap();
                    assert_eq!(map.location_of(a), Some(lb));
                    assert_eq!(map.location_of(b), Some(la));
                    assert_eq!(map.occupied_slots(), occupied);
                    map.check_invariants().unwrap();
                    break 'outer;
                }
            }
        }
    }

    #[test]
    fn rejected_batches_leave_map_unchanged() {
        let mut map = small_map(2, 64, 6);
        let snapshot = map.clone();
        // move ordinal 0 into the block already holding ordinal 1
        let other = map.location_of(Owner::new(0, 1)).unwrap();
        let free = map.free_slots_in(&[other.block]);
        let to = free.first().copied().unwrap_or(other);
        let err = map.remap(&[Move { owner: Owner::new(0, 0), to }]);
        assert!(err.is_err());
        assert_eq!(map, snapshot);

        // occupied target not vacated in the batch
        let occupied = map.location_of(Owner::new(1, 0)).unwrap();
        let err = map.remap(&[Move { owner: Owner::new(0, 0), to: occupied }]);
        assert!(matches!(err, Err(LayoutError::SlotConflict { .. }) | Err(LayoutError::DistinctBlockViolation { .. })));
        assert_eq!(map, snapshot);

        map.remap(&[]).unwrap();
        assert_eq!(map, snapshot);
    }

    #[test]
    fn free_slot_queries() {
        let mut map = small_map(1, 64, 7);
        let loc = map.location_of(Owner::new(0, 0)).unwrap();
        assert_eq!(map.free_slots_in(&[loc.block]).len(), 3);
        map.detach(&[Owner::new(0, 0)]).unwrap();
        assert!(map.free_slots_in(&[loc.block]).contains(&loc));
        assert_eq!(map.detached_shares(), 1);

        let geom = GeometryConfig {
            logical_blocks: 4,
            shares_per_block: 4,
            physical_blocks: 32,
        };
        let full = init_layout(geom, &CodecParams::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(full.free_slots_in(&[0, 1, 2]).is_empty());
    }

    #[test]
    fn random_valid_batches_preserve_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut map = small_map(24, 240, 8);
        let total = map.occupied_slots();
        let mut applied = 0;
        for _ in 0..10_000 {
            let n = rng.gen_range(1..6);
            let mut moves = Vec::new();
            for _ in 0..n {
                let owner = Owner::new(rng.gen_range(0..24), rng.gen_range(0..32));
                let to = if rng.gen_bool(0.5) {
                    // a free slot somewhere
                    let blocks: Vec<u32> = (0..8).map(|_| rng.gen_range(0..240)).collect();
                    match map.free_slots_in(&blocks).first() {
                        Some(&loc) => loc,
                        None => continue,
                    }
                } else {
                    // swap target: the slot of another moving share
                    let other = Owner::new(rng.gen_range(0..24), rng.gen_range(0..32));
                    let Some(loc) = map.location_of(other) else { continue };
                    if let Some(here) = map.location_of(owner) {
                        moves.push(Move { owner: other, to: here });
                    }
                    loc
                };
                moves.push(Move { owner, to });
            }
            if map.remap(&moves).is_ok() {
                applied += 1;
            }
            assert_eq!(map.occupied_slots(), total);
            map.check_invariants().unwrap();
        }
        assert!(applied > 1000, "only {applied} batches applied");
        map.check_invariants().unwrap();
    }

    #[test]
    fn dump_load_roundtrip() {
        let mut map = small_map(8, 100, 11);
        map.detach(&[Owner::new(3, 7)]).unwrap();
        let mut bytes = Vec::new();
        map.dump(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 2 + 4 + 8 + 8 * 32 * 6);
        let loaded = SsmMap::load(&bytes[..]).unwrap();
        assert_eq!(loaded, map);
        assert!(SsmMap::load(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(SsmMap::load(&bad[..]), Err(LayoutError::Format(_))));
    }
}
