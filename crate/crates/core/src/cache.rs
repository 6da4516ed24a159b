//! Set-associative cache with LRU replacement, keyed by block address.
//! Each line carries a value so it can hold trusted on-chip copies.

#[derive(Debug, Clone)]
struct Line<V> {
    addr: u64,
    last_used: u64,
    value: V,
}

#[derive(Debug, Clone)]
pub struct SetAssocCache<V> {
    sets: Vec<Vec<Line<V>>>,
    ways: usize,
    clock: u64,
    hits: u64,
    misses: u64,
}

impl<V> SetAssocCache<V> {
    /// `size_bytes / line_bytes` lines split into sets of `ways`.
    pub fn new(size_bytes: usize, line_bytes: usize, ways: usize) -> Self {
        assert!(ways > 0 && line_bytes > 0, "cache geometry must be positive");
        let lines = size_bytes / line_bytes;
        let n_sets = (lines / ways).max(1);
        SetAssocCache {
            sets: (0..n_sets).map(|_| Vec::with_capacity(ways)).collect(),
            ways,
            clock: 0,
            hits: 0,
            misses: 0,
        }
    }

    pub fn sets(&self) -> usize {
        self.sets.len()
    }

    pub fn ways(&self) -> usize {
        self.ways
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    fn set_of(&self, addr: u64) -> usize {
        (addr % self.sets.len() as u64) as usize
    }

    /// Looks up `addr`, refreshing its LRU position and counting hit or miss.
    pub fn get(&mut self, addr: u64) -> Option<&mut V> {
        self.clock += 1;
        let clock = self.clock;
        let s = self.set_of(addr);
        match self.sets[s].iter_mut().find(|l| l.addr == addr) {
            Some(line) => {
                self.hits += 1;
                line.last_used = clock;
                Some(&mut line.value)
            }
            None => {
                self.misses += 1;
                None
            }
        }
    }

    /// Presence check without side effects.
    pub fn contains(&self, addr: u64) -> bool {
        self.sets[self.set_of(addr)].iter().any(|l| l.addr == addr)
    }

    /// Mutable access without touching LRU state or counters.
    pub fn peek_mut(&mut self, addr: u64) -> Option<&mut V> {
        let s = self.set_of(addr);
        self.sets[s].iter_mut().find(|l| l.addr == addr).map(|l| &mut l.value)
    }

    /// Inserts or replaces `addr` as most recently used. Returns the evicted
    /// line, if any.
    pub fn insert(&mut self, addr: u64, value: V) -> Option<(u64, V)> {
        self.clock += 1;
        let clock = self.clock;
        let ways = self.ways;
        let s = self.set_of(addr);
        let set = &mut self.sets[s];
        if let Some(line) = set.iter_mut().find(|l| l.addr == addr) {
            line.value = value;
            line.last_used = clock;
            return None;
        }
        let line = Line {
            addr,
            last_used: clock,
            value,
        };
        if set.len() < ways {
            set.push(line);
            return None;
        }
        let victim = set
            .iter()
            .enumerate()
            .min_by_key(|(_, l)| l.last_used)
            .map(|(i, _)| i)
            .expect("full set is nonempty");
        let old = std::mem::replace(&mut set[victim], line);
        Some((old.addr, old.value))
    }

    pub fn clear(&mut self) {
        for set in &mut self.sets {
            set.clear();
        }
    }
}
