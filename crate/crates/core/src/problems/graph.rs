//! Undirected simple graphs and the edge-list text format.
//!
//! The first non-comment line is `n m_edges`; each further line is an edge
//! `i j` or `e i j` with 1-based vertices. Lines starting with `#` or `c`
//! are comments.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// 1-based pairs with `i < j`, sorted and unique.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Normalizes edge orientation and removes duplicates; rejects self
    /// loops and out-of-range vertices.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::with_duplicates(n, edges).map(|(g, _)| g)
    }

    fn with_duplicates(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<(Self, usize)> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        let mut dups = 0;
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self loop at vertex {a}")));
            }
            let (i, j) = (a.min(b), a.max(b));
            if i < 1 || j > n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range 1..={n}")));
            }
            if !set.insert((i, j)) {
                dups += 1;
            }
        }
        Ok((
            Graph {
                n,
                edges: set.into_iter().collect(),
            },
            dups,
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument("a cycle needs at least 3 vertices".into()));
        }
        Self::new(n, (1..=n).map(|i| (i, i % n + 1)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))))
    }

    /// The `d`-dimensional hypercube on `2^d` vertices.
    pub fn hypercube(d: u32) -> Result<Self> {
        if d == 0 || d > 20 {
            return Err(Error::InvalidArgument(format!("hypercube dimension {d} out of range 1..=20")));
        }
        let n = 1usize << d;
        let edges = (0..n).flat_map(|v| (0..d).map(move |k| (v, v ^ (1 << k)))).filter(|(a, b)| a < b);
        Self::new(n, edges.map(|(a, b)| (a + 1, b + 1)))
    }

    /// Outer 5-cycle, inner pentagram and five spokes.
    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (i + 5, (i + 2) % 5 + 5));
        Self::new(10, outer.chain(spokes).chain(inner).map(|(a, b)| (a + 1, b + 1))).expect("valid by construction")
    }

    /// Erdős–Rényi `G(n, p)`: each pair is an edge independently with
    /// probability `p`.
    pub fn random(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Parses the edge-list format; duplicate edges are merged with a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('c') {
                continue;
            }
            let mut toks: Vec<&str> = line.split_whitespace().collect();
            if toks.first() == Some(&"e") {
                toks.remove(0);
            }
            let nums: Vec<usize> = toks
                .iter()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("expected an unsigned integer, found {t:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected two integers, found {}", nums.len()),
                });
            }
            match header {
                None => header = Some((nums[0], nums[1])),
                Some((n, _)) => {
                    let (a, b) = (nums[0], nums[1]);
                    if a == b || a == 0 || b == 0 || a > n || b > n {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("invalid edge ({a}, {b}) for {n} vertices"),
                        });
                    }
                    edges.push((a, b));
                }
            }
        }
        let (n, m_declared) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing \"n m\" header".into(),
        })?;
        let (g, dups) = Self::with_duplicates(n, edges).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        if dups > 0 {
            log::warn!("{dups} duplicate edge(s) merged");
        }
        if g.edges.len() + dups != m_declared {
            log::warn!("header declares {m_declared} edges, found {}", g.edges.len() + dups);
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (i, j) in &self.edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Graph::parse(&text)
}
