//! Counter-mode memory protection cost model with per-block version numbers,
//! MACs and an 8-ary hash tree over the version-number blocks.
//!
//! Physical layout, in 64-byte block addresses:
//! `[data | MAC blocks | VN blocks | tree level 1 | tree level 2 | ...]`.
//! A MAC block holds eight 56-bit MACs and a VN block eight 56-bit VNs. Each
//! tree node holds the tags of its eight children. The root node lives on
//! chip and is never part of simulated memory.
//!
//! VN blocks and tree nodes share one metadata cache; MAC blocks have their
//! own. Cached metadata is trusted, so verification walks up only to the
//! first cached node. Updates are write-through.
//!
//! The keyed mixer stands in for AES and the tree hash. A charge-only
//! instance keeps no contents and only models caches, transactions and
//! cipher work; it backs the composition with Path ORAM.

use rustc_hash::FxHashMap as HashMap;

use thiserror::Error;

use crate::cache::SetAssocCache;
use crate::codec::{DataBlock, BLOCK_BYTES};
use crate::mix::{keyed_mix, Mixer};
use crate::Op;

const ARITY: u64 = 8;
const KEYSTREAM_DOMAIN: u64 = 0x6b73;
const MAC_DOMAIN: u64 = 0x006d_6163;
const TAG_DOMAIN: u64 = 0x0074_6167;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtrError {
    #[error("address {addr} outside {blocks} protected blocks")]
    OutOfRange { addr: u64, blocks: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("operation needs a functional (content-carrying) instance")]
    ChargeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtrConfig {
    pub vn_bits: u32,
    pub mac_bits: u32,
    pub metadata_cache_bytes: usize,
    pub cache_ways: usize,
    pub aes_latency_cycles: u32,
    pub clock_ghz: f64,
    pub key: u128,
}

impl Default for CtrConfig {
    fn default() -> Self {
        CtrConfig {
            vn_bits: 56,
            mac_bits: 56,
            metadata_cache_bytes: 32 * 1024,
            cache_ways: 4,
            aes_latency_cycles: 40,
            clock_ghz: 3.0,
            key: 0x5eed_0fc0_ffee,
        }
    }
}

impl CtrConfig {
    pub fn validate(&self) -> Result<(), CtrError> {
        if !(1..=63).contains(&self.vn_bits) || !(1..=64).contains(&self.mac_bits) {
            return Err(CtrError::InvalidConfig("VN/MAC widths out of range".into()));
        }
        if self.cache_ways == 0 || self.metadata_cache_bytes < BLOCK_BYTES * self.cache_ways {
            return Err(CtrError::InvalidConfig("metadata cache smaller than one set".into()));
        }
        if self.clock_ghz <= 0.0 {
            return Err(CtrError::InvalidConfig("clock must be positive".into()));
        }
        Ok(())
    }

    pub fn aes_ns(&self) -> f64 {
        self.aes_latency_cycles as f64 / self.clock_ghz
    }

    fn mac_mask(&self) -> u64 {
        if self.mac_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.mac_bits) - 1
        }
    }
}

/// Region bases and sizes for a protected range of `data_blocks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtrLayout {
    pub data_blocks: u64,
    pub mac_base: u64,
    pub vn_base: u64,
    /// Node count per metadata level; level 0 is the VN blocks. The root
    /// holds the tags of the last level.
    pub level_sizes: Vec<u64>,
    pub level_bases: Vec<u64>,
}

impl CtrLayout {
    pub fn new(data_blocks: u64) -> Self {
        let groups = data_blocks.div_ceil(ARITY);
        let mac_base = data_blocks;
        let vn_base = mac_base + groups;
        let mut level_sizes = vec![groups];
        while *level_sizes.last().unwrap() > ARITY {
            let next = level_sizes.last().unwrap().div_ceil(ARITY);
            level_sizes.push(next);
        }
        let mut level_bases = Vec::with_capacity(level_sizes.len());
        let mut base = vn_base;
        for &n in &level_sizes {
            level_bases.push(base);
            base += n;
        }
        CtrLayout {
            data_blocks,
            mac_base,
            vn_base,
            level_sizes,
            level_bases,
        }
    }

    /// In-memory tree levels above the VN blocks.
    pub fn tree_levels(&self) -> usize {
        self.level_sizes.len() - 1
    }

    pub fn total_blocks(&self) -> u64 {
        self.level_bases.last().unwrap() + self.level_sizes.last().unwrap()
    }

    fn meta_addr(&self, level: usize, idx: u64) -> u64 {
        self.level_bases[level] + idx
    }
}

pub type Transactions = Vec<(Op, u64)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtrOutcome {
    pub data: Option<DataBlock>,
    pub transactions: Transactions,
    pub aes_ops: u32,
    pub alarm: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CtrStats {
    pub reads: u64,
    pub writes: u64,
    pub block_reads: u64,
    pub block_writes: u64,
    pub aes_ops: u64,
    pub tamper_alarms: u64,
    pub rekeys: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptTarget {
    Data,
    Mac,
    Vn,
}

/// Off-chip state of one data block, captured for replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtrSnapshot {
    addr: u64,
    ciphertext: [u8; BLOCK_BYTES],
    mac: u64,
    vn_block: [u64; 8],
}

#[derive(Debug, Clone, Default)]
struct Contents {
    data: HashMap<u64, [u8; BLOCK_BYTES]>,
    macs: HashMap<u64, u64>,
    meta: HashMap<u64, [u64; 8]>,
}

#[derive(Debug, Clone)]
pub struct CtrEngine {
    cfg: CtrConfig,
    layout: CtrLayout,
    meta_cache: SetAssocCache<[u64; 8]>,
    mac_cache: SetAssocCache<[u64; 8]>,
    contents: Option<Contents>,
    default_tags: Vec<u64>,
    root: [u64; 8],
    stats: CtrStats,
}

impl CtrEngine {
    /// Functional engine over `data_blocks` blocks, all initially holding
    /// the encryption of zeros at VN 0.
    pub fn new(cfg: CtrConfig, data_blocks: u64) -> Result<Self, CtrError> {
        Self::build(cfg, data_blocks, true)
    }

    /// Engine that models costs only.
    pub fn charge_only(cfg: CtrConfig, data_blocks: u64) -> Result<Self, CtrError> {
        Self::build(cfg, data_blocks, false)
    }

    fn build(cfg: CtrConfig, data_blocks: u64, functional: bool) -> Result<Self, CtrError> {
        cfg.validate()?;
        if data_blocks == 0 {
            return Err(CtrError::InvalidConfig("no protected blocks".into()));
        }
        let layout = CtrLayout::new(data_blocks);
        let mut engine = CtrEngine {
            cfg,
            meta_cache: SetAssocCache::new(cfg.metadata_cache_bytes, BLOCK_BYTES, cfg.cache_ways),
            mac_cache: SetAssocCache::new(cfg.metadata_cache_bytes, BLOCK_BYTES, cfg.cache_ways),
            contents: functional.then(Contents::default),
            default_tags: Vec::new(),
            root: [0; 8],
            stats: CtrStats::default(),
            layout,
        };
        let mut content = [0u64; 8];
        for level in 0..engine.layout.level_sizes.len() {
            let tag = engine.tag(level, &content);
            engine.default_tags.push(tag);
            content = [tag; 8];
        }
        engine.root = content;
        Ok(engine)
    }

    pub fn config(&self) -> &CtrConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &CtrLayout {
        &self.layout
    }

    pub fn stats(&self) -> CtrStats {
        self.stats
    }

    pub fn is_functional(&self) -> bool {
        self.contents.is_some()
    }

    pub fn flush_caches(&mut self) {
        self.meta_cache.clear();
        self.mac_cache.clear();
    }

    fn check_addr(&self, addr: u64) -> Result<(), CtrError> {
        if addr >= self.layout.data_blocks {
            return Err(CtrError::OutOfRange {
                addr,
                blocks: self.layout.data_blocks,
            });
        }
        Ok(())
    }

    fn tag(&self, level: usize, content: &[u64; 8]) -> u64 {
        let mut words = [0u64; 10];
        words[0] = TAG_DOMAIN;
        words[1] = level as u64;
        words[2..].copy_from_slice(content);
        keyed_mix(self.cfg.key, &words) & self.cfg.mac_mask()
    }

    fn keystream(&self, addr: u64, vn: u64) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        for (i, chunk) in out.chunks_mut(8).enumerate() {
            let w = keyed_mix(self.cfg.key, &[KEYSTREAM_DOMAIN, addr, vn, i as u64]);
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    fn mac(&self, ciphertext: &[u8; BLOCK_BYTES], addr: u64, vn: u64) -> u64 {
        Mixer::new(self.cfg.key)
            .absorb(MAC_DOMAIN)
            .absorb(addr)
            .absorb(vn)
            .absorb_bytes(ciphertext)
            .finish()
            & self.cfg.mac_mask()
    }

    fn encrypt(&self, plain: &[u8; BLOCK_BYTES], addr: u64, vn: u64) -> [u8; BLOCK_BYTES] {
        let ks = self.keystream(addr, vn);
        std::array::from_fn(|i| plain[i] ^ ks[i])
    }

    fn stored_ciphertext(&self, addr: u64) -> [u8; BLOCK_BYTES] {
        let c = self.contents.as_ref().expect("functional");
        match c.data.get(&addr) {
            Some(ct) => *ct,
            None => self.encrypt(&[0; BLOCK_BYTES], addr, 0),
        }
    }

    fn stored_mac(&self, addr: u64) -> u64 {
        let c = self.contents.as_ref().expect("functional");
        match c.macs.get(&addr) {
            Some(&m) => m,
            None => self.mac(&self.encrypt(&[0; BLOCK_BYTES], addr, 0), addr, 0),
        }
    }

    fn stored_meta(&self, level: usize, idx: u64) -> [u64; 8] {
        let addr = self.layout.meta_addr(level, idx);
        match self.contents.as_ref().and_then(|c| c.meta.get(&addr)) {
            Some(m) => *m,
            None if level == 0 => [0; 8],
            None => [self.default_tags[level - 1]; 8],
        }
    }

    fn mac_block_from_memory(&self, group: u64) -> [u64; 8] {
        if self.contents.is_none() {
            return [0; 8];
        }
        std::array::from_fn(|i| {
            let a = group * ARITY + i as u64;
            if a < self.layout.data_blocks {
                self.stored_mac(a)
            } else {
                0
            }
        })
    }

    /// Trusted contents of a metadata node: from the cache, or fetched and
    /// verified against its (recursively trusted) parent.
    fn trusted_meta(
        &mut self,
        level: usize,
        idx: u64,
        tx: &mut Transactions,
        aes: &mut u32,
        alarm: &mut bool,
    ) -> [u64; 8] {
        let addr = self.layout.meta_addr(level, idx);
        if let Some(v) = self.meta_cache.get(addr) {
            return *v;
        }
        tx.push((Op::Read, addr));
        let content = self.stored_meta(level, idx);
        let expected = if level + 1 == self.layout.level_sizes.len() {
            self.root[(idx % ARITY) as usize]
        } else {
            self.trusted_meta(level + 1, idx / ARITY, tx, aes, alarm)[(idx % ARITY) as usize]
        };
        *aes += 1;
        if self.is_functional() && self.tag(level, &content) != expected {
            *alarm = true;
            return content;
        }
        self.meta_cache.insert(addr, content);
        content
    }

    fn mac_block(&mut self, addr: u64, tx: &mut Transactions) -> [u64; 8] {
        let group = addr / ARITY;
        let mac_addr = self.layout.mac_base + group;
        if let Some(v) = self.mac_cache.get(mac_addr) {
            return *v;
        }
        tx.push((Op::Read, mac_addr));
        let block = self.mac_block_from_memory(group);
        self.mac_cache.insert(mac_addr, block);
        block
    }

    fn finish(&mut self, out: &CtrOutcome) {
        for (op, _) in &out.transactions {
            match op {
                Op::Read => self.stats.block_reads += 1,
                Op::Write => self.stats.block_writes += 1,
            }
        }
        self.stats.aes_ops += out.aes_ops as u64;
        if out.alarm {
            self.stats.tamper_alarms += 1;
        }
    }

    pub fn ctr_read(&mut self, addr: u64) -> Result<CtrOutcome, CtrError> {
        self.check_addr(addr)?;
        self.stats.reads += 1;
        let mut tx = vec![(Op::Read, addr)];
        // keystream and MAC
        let mut aes = 2;
        let mut alarm = false;
        let macs = self.mac_block(addr, &mut tx);
        let vns = self.trusted_meta(0, addr / ARITY, &mut tx, &mut aes, &mut alarm);
        let slot = (addr % ARITY) as usize;
        let data = if self.is_functional() {
            let ct = self.stored_ciphertext(addr);
            let vn = vns[slot];
            if self.mac(&ct, addr, vn) != macs[slot] {
                alarm = true;
            }
            Some(DataBlock(self.encrypt(&ct, addr, vn)))
        } else {
            None
        };
        let out = CtrOutcome {
            data,
            transactions: tx,
            aes_ops: aes,
            alarm,
        };
        self.finish(&out);
        Ok(out)
    }

    /// Writes `data` (ignored by charge-only instances).
    pub fn ctr_write(&mut self, addr: u64, data: &DataBlock) -> Result<CtrOutcome, CtrError> {
        self.check_addr(addr)?;
        self.stats.writes += 1;
        let mut tx = Vec::new();
        let mut aes = 2;
        let mut alarm = false;
        let levels = self.layout.level_sizes.len();
        let mut macs = self.mac_block(addr, &mut tx);
        let mut chain: Vec<[u64; 8]> = Vec::with_capacity(levels);
        let mut idx = addr / ARITY;
        for level in 0..levels {
            chain.push(self.trusted_meta(level, idx, &mut tx, &mut aes, &mut alarm));
            idx /= ARITY;
        }

        let slot = (addr % ARITY) as usize;
        let mut vn = chain[0][slot] + 1;
        if vn >= 1u64 << self.cfg.vn_bits {
            self.stats.rekeys += 1;
            vn = 0;
        }
        chain[0][slot] = vn;

        tx.push((Op::Write, addr));
        let mac_addr = self.layout.mac_base + addr / ARITY;
        tx.push((Op::Write, mac_addr));
        if self.is_functional() {
            let ct = self.encrypt(&data.0, addr, vn);
            let mac = self.mac(&ct, addr, vn);
            macs[slot] = mac;
            let c = self.contents.as_mut().expect("functional");
            c.data.insert(addr, ct);
            c.macs.insert(addr, mac);
        }
        if let Some(cached) = self.mac_cache.peek_mut(mac_addr) {
            *cached = macs;
        }

        let mut idx = addr / ARITY;
        for level in 0..levels {
            if level > 0 {
                let child_tag = self.tag(level - 1, &chain[level - 1]);
                chain[level][(idx % ARITY) as usize] = child_tag;
                idx /= ARITY;
            }
            let meta_addr = self.layout.meta_addr(level, idx);
            tx.push((Op::Write, meta_addr));
            if let Some(c) = self.contents.as_mut() {
                c.meta.insert(meta_addr, chain[level]);
            }
            if let Some(cached) = self.meta_cache.peek_mut(meta_addr) {
                *cached = chain[level];
            }
        }
        self.root[(idx % ARITY) as usize] = self.tag(levels - 1, &chain[levels - 1]);
        aes += levels as u32;

        let out = CtrOutcome {
            data: None,
            transactions: tx,
            aes_ops: aes,
            alarm,
        };
        self.finish(&out);
        Ok(out)
    }

    pub fn access(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<CtrOutcome, CtrError> {
        match op {
            Op::Read => self.ctr_read(addr),
            Op::Write => self.ctr_write(addr, data.unwrap_or(&DataBlock::zeroed())),
        }
    }

    /// Current VN of a data block, as stored in memory.
    pub fn vn_of(&self, addr: u64) -> u64 {
        self.stored_meta(0, addr / ARITY)[(addr % ARITY) as usize]
    }

    /// Sets a block's VN and re-authenticates it and the tree above it, as if
    /// the block had been written that many times.
    pub fn set_vn(&mut self, addr: u64, vn: u64) -> Result<(), CtrError> {
        self.check_addr(addr)?;
        if !self.is_functional() {
            return Err(CtrError::ChargeOnly);
        }
        let plain = self.peek_plaintext(addr)?;
        let mut idx = addr / ARITY;
        let mut content = self.stored_meta(0, idx);
        content[(addr % ARITY) as usize] = vn;
        let ct = self.encrypt(&plain.0, addr, vn);
        let mac = self.mac(&ct, addr, vn);
        {
            let c = self.contents.as_mut().expect("functional");
            c.data.insert(addr, ct);
            c.macs.insert(addr, mac);
        }
        let levels = self.layout.level_sizes.len();
        for level in 0..levels {
            let a = self.layout.meta_addr(level, idx);
            self.contents.as_mut().expect("functional").meta.insert(a, content);
            let tag = self.tag(level, &content);
            let slot = (idx % ARITY) as usize;
            idx /= ARITY;
            if level + 1 == levels {
                self.root[slot] = tag;
            } else {
                content = self.stored_meta(level + 1, idx);
                content[slot] = tag;
            }
        }
        self.flush_caches();
        Ok(())
    }

    /// Decrypts a block from memory without verification or charges.
    pub fn peek_plaintext(&self, addr: u64) -> Result<DataBlock, CtrError> {
        self.check_addr(addr)?;
        if !self.is_functional() {
            return Err(CtrError::ChargeOnly);
        }
        let ct = self.stored_ciphertext(addr);
        Ok(DataBlock(self.encrypt(&ct, addr, self.vn_of(addr))))
    }

    pub fn snapshot(&self, addr: u64) -> Result<CtrSnapshot, CtrError> {
        self.check_addr(addr)?;
        if !self.is_functional() {
            return Err(CtrError::ChargeOnly);
        }
        Ok(CtrSnapshot {
            addr,
            ciphertext: self.stored_ciphertext(addr),
            mac: self.stored_mac(addr),
            vn_block: self.stored_meta(0, addr / ARITY),
        })
    }

    /// Puts an old (ciphertext, MAC, VN block) triple back into memory.
    pub fn replay(&mut self, snap: &CtrSnapshot) {
        let vn_addr = self.layout.meta_addr(0, snap.addr / ARITY);
        if let Some(c) = self.contents.as_mut() {
            c.data.insert(snap.addr, snap.ciphertext);
            c.macs.insert(snap.addr, snap.mac);
            c.meta.insert(vn_addr, snap.vn_block);
        }
    }

    /// Flips one bit of the stored ciphertext, MAC or VN of `addr`. `bit` is
    /// taken modulo the width of the target.
    pub fn corrupt(&mut self, target: CorruptTarget, addr: u64, bit: u32) -> Result<(), CtrError> {
        self.check_addr(addr)?;
        if !self.is_functional() {
            return Err(CtrError::ChargeOnly);
        }
        match target {
            CorruptTarget::Data => {
                let mut ct = self.stored_ciphertext(addr);
                let b = bit as usize % (BLOCK_BYTES * 8);
                ct[b / 8] ^= 1 << (b % 8);
                self.contents.as_mut().expect("functional").data.insert(addr, ct);
            }
            CorruptTarget::Mac => {
                let m = self.stored_mac(addr) ^ (1u64 << (bit % self.cfg.mac_bits));
                self.contents.as_mut().expect("functional").macs.insert(addr, m);
            }
            CorruptTarget::Vn => {
                let mut block = self.stored_meta(0, addr / ARITY);
                block[(addr % ARITY) as usize] ^= 1u64 << (bit % self.cfg.vn_bits);
                let a = self.layout.meta_addr(0, addr / ARITY);
                self.contents.as_mut().expect("functional").meta.insert(a, block);
            }
        }
        Ok(())
    }
}

/// Unprotected access: one transaction.
pub fn np_access(op: Op, addr: u64) -> Transactions {
    vec![(op, addr)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block(fill: u8) -> DataBlock {
        DataBlock([fill; BLOCK_BYTES])
    }

    fn count(tx: &Transactions, op: Op) -> usize {
        tx.iter().filter(|(o, _)| *o == op).count()
    }

    #[test]
    fn layout_levels() {
        let l = CtrLayout::new(32_768);
        assert_eq!(l.level_sizes, vec![4096, 512, 64, 8]);
        assert_eq!(l.tree_levels(), 3);
        assert_eq!(l.mac_base, 32_768);
        assert_eq!(l.vn_base, 32_768 + 4096);
        assert_eq!(l.total_blocks(), 32_768 + 4096 + 4096 + 512 + 64 + 8);
        assert_eq!(CtrLayout::new(8).tree_levels(), 0);
        assert_eq!(CtrLayout::new(65).level_sizes, vec![9, 2]);
    }

    #[test]
    fn cold_and_warm_reads() {
        let mut e = CtrEngine::new(CtrConfig::default(), 32_768).unwrap();
        let cold = e.ctr_read(100).unwrap();
        assert_eq!(cold.transactions.len(), 1 + 1 + 1 + 3);
        assert_eq!(count(&cold.transactions, Op::Read), 6);
        assert!(!cold.alarm);
        assert_eq!(cold.data, Some(DataBlock::zeroed()));
        let warm = e.ctr_read(100).unwrap();
        assert_eq!(warm.transactions, vec![(Op::Read, 100)]);
        // neighbour under the same metadata blocks
        assert_eq!(e.ctr_read(101).unwrap().transactions.len(), 1);
    }

    #[test]
    fn walk_stops_at_cached_node() {
        let mut e = CtrEngine::new(CtrConfig::default(), 32_768).unwrap();
        e.ctr_read(0).unwrap();
        // next VN block, same level-1 parent: data + MAC + VN
        assert_eq!(e.ctr_read(8).unwrap().transactions.len(), 3);
        // level-1 sibling under a cached level-2 node: one more
        assert_eq!(e.ctr_read(64).unwrap().transactions.len(), 4);
    }

    #[test]
    fn cold_write_shape() {
        let mut e = CtrEngine::new(CtrConfig::default(), 32_768).unwrap();
        let out = e.ctr_write(5, &block(7)).unwrap();
        assert_eq!(count(&out.transactions, Op::Write), 3 + 3);
        assert_eq!(count(&out.transactions, Op::Read), 1 + 1 + 3);
        assert_eq!(e.ctr_read(5).unwrap().data, Some(block(7)));
    }

    #[test]
    fn vn_is_monotone() {
        let mut e = CtrEngine::new(CtrConfig::default(), 1024).unwrap();
        e.ctr_write(9, &block(1)).unwrap();
        let first = e.vn_of(9);
        e.ctr_write(9, &block(2)).unwrap();
        assert_eq!(e.vn_of(9), first + 1);
        assert_eq!(e.vn_of(10), 0);
    }

    #[test]
    fn saturation_rekeys() {
        let mut e = CtrEngine::new(CtrConfig::default(), 1024).unwrap();
        e.ctr_write(3, &block(4)).unwrap();
        e.set_vn(3, (1u64 << 56) - 1).unwrap();
        assert_eq!(e.ctr_read(3).unwrap().data, Some(block(4)));
        let out = e.ctr_write(3, &block(5)).unwrap();
        assert!(!out.alarm);
        assert_eq!(e.stats().rekeys, 1);
        assert_eq!(e.vn_of(3), 0);
        let back = e.ctr_read(3).unwrap();
        assert!(!back.alarm);
        assert_eq!(back.data, Some(block(5)));
    }

    #[test]
    fn replay_is_detected() {
        for flush in [true, false] {
            let mut e = CtrEngine::new(CtrConfig::default(), 4096).unwrap();
            e.ctr_write(77, &block(1)).unwrap();
            let old = e.snapshot(77).unwrap();
            e.ctr_write(77, &block(2)).unwrap();
            e.replay(&old);
            if flush {
                e.flush_caches();
            }
            let out = e.ctr_read(77).unwrap();
            assert!(out.alarm, "flush={flush}");
        }
    }

    #[test]
    fn bit_flips_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut e = CtrEngine::new(CtrConfig::default(), 4096).unwrap();
        for a in 0..64 {
            e.ctr_write(a, &block(a as u8)).unwrap();
        }
        let targets = [CorruptTarget::Data, CorruptTarget::Mac, CorruptTarget::Vn];
        for i in 0..10_000 {
            let addr = rng.gen_range(0..64);
            let target = targets[i % 3];
            let before = e.snapshot(addr).unwrap();
            e.corrupt(target, addr, rng.gen()).unwrap();
            e.flush_caches();
            assert!(e.ctr_read(addr).unwrap().alarm, "{target:?} at {addr}");
            e.replay(&before);
            e.flush_caches();
        }
        assert!(!e.ctr_read(0).unwrap().alarm);
    }

    #[test]
    fn decrypt_inverts_encrypt() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut e = CtrEngine::new(CtrConfig::default(), 2048).unwrap();
        let mut shadow = HashMap::default();
        for _ in 0..2000 {
            let addr = rng.gen_range(0..2048);
            if rng.gen_bool(0.5) {
                let mut b = [0u8; BLOCK_BYTES];
                rng.fill(&mut b[..]);
                e.ctr_write(addr, &DataBlock(b)).unwrap();
                shadow.insert(addr, b);
            } else {
                let out = e.ctr_read(addr).unwrap();
                assert!(!out.alarm);
                let want = shadow.get(&addr).copied().unwrap_or([0; BLOCK_BYTES]);
                assert_eq!(out.data.unwrap().0, want);
            }
        }
        assert_eq!(e.stats().tamper_alarms, 0);
    }

    #[test]
    fn ciphertext_differs_from_plaintext_and_across_versions() {
        let mut e = CtrEngine::new(CtrConfig::default(), 64).unwrap();
        e.ctr_write(1, &block(0)).unwrap();
        let c1 = e.snapshot(1).unwrap().ciphertext;
        e.ctr_write(1, &block(0)).unwrap();
        let c2 = e.snapshot(1).unwrap().ciphertext;
        assert_ne!(c1, [0; BLOCK_BYTES]);
        assert_ne!(c1, c2);
    }

    #[test]
    fn charge_only_matches_functional_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut f = CtrEngine::new(CtrConfig::default(), 50_000).unwrap();
        let mut c = CtrEngine::charge_only(CtrConfig::default(), 50_000).unwrap();
        for _ in 0..5000 {
            let addr = rng.gen_range(0..50_000);
            let op = if rng.gen_bool(0.5) { Op::Read } else { Op::Write };
            let a = f.access(op, addr, Some(&block(3))).unwrap();
            let b = c.access(op, addr, None).unwrap();
            assert_eq!(a.transactions, b.transactions);
            assert_eq!(a.aes_ops, b.aes_ops);
            assert!(b.data.is_none());
        }
        assert_eq!(f.stats(), c.stats());
        assert_eq!(c.set_vn(0, 1), Err(CtrError::ChargeOnly));
    }

    #[test]
    fn np_is_one_transaction() {
        assert_eq!(np_access(Op::Read, 4), vec![(Op::Read, 4)]);
        assert_eq!(np_access(Op::Write, 9), vec![(Op::Write, 9)]);
    }

    #[test]
    fn out_of_range() {
        let mut e = CtrEngine::new(CtrConfig::default(), 16).unwrap();
        assert!(matches!(e.ctr_read(16), Err(CtrError::OutOfRange { .. })));
    }
}
