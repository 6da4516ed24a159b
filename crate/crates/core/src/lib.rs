pub mod analysis;
pub mod cache;
pub mod engine;
pub mod codec;
pub mod controller;
pub mod ctr;
pub mod field;
pub mod layout;
pub mod mix;
pub mod pathoram;
pub mod stash;
pub mod workloads;

/// Direction of a memory transaction or a logical request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Read,
    Write,
}

impl std::fmt::Display for Op {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Op::Read => "R",
            Op::Write => "W",
        })
    }
}
