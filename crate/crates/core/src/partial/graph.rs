use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// Directed cross-learning graph over contexts. An edge `c -> c'` means that
/// pulling the arm in context `c` also reveals its reward in `c'`. Every
/// vertex carries a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClGraph {
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl ClGraph {
    /// Builds a graph from out-neighbour lists, which must contain the
    /// self-loop of each vertex.
    pub fn new(out: Vec<Vec<usize>>) -> Result<Self> {
        let contexts = out.len();
        if contexts == 0 {
            return Err(Error::Graph("graph has no vertices".into()));
        }
        let mut out = out;
        let mut inn = vec![Vec::new(); contexts];
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&v) = list.iter().find(|&&v| v >= contexts) {
                return Err(Error::Graph(format!("edge {u} -> {v} leaves the vertex range 0..{contexts}")));
            }
            for &v in list.iter() {
                inn[v].push(u);
            }
        }
        let graph = Self { out, inn };
        graph.validate()?;
        Ok(graph)
    }

    /// Builds a graph from an edge list and adds every self-loop.
    pub fn from_edges(contexts: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out: Vec<Vec<usize>> = (0..contexts).map(|v| vec![v]).collect();
        for &(u, v) in edges {
            if u >= contexts || v >= contexts {
                return Err(Error::Graph(format!("edge {u} -> {v} leaves the vertex range 0..{contexts}")));
            }
            out[u].push(v);
        }
        Self::new(out)
    }

    /// Checks self-loops and that in- and out-lists describe the same edges.
    pub fn validate(&self) -> Result<()> {
        for v in 0..self.contexts() {
            if !self.has_edge(v, v) {
                return Err(Error::MissingSelfLoop { vertex: v });
            }
            for &u in &self.inn[v] {
                if !self.has_edge(u, v) {
                    return Err(Error::Graph(format!("in-list of {v} names {u} without edge {u} -> {v}")));
                }
            }
        }
        let total_out: usize = self.out.iter().map(Vec::len).sum();
        let total_in: usize = self.inn.iter().map(Vec::len).sum();
        if total_out != total_in {
            return Err(Error::Graph("in- and out-lists disagree".into()));
        }
        Ok(())
    }

    /// Every context sees every other.
    pub fn complete(contexts: usize) -> Result<Self> {
        Self::new(vec![(0..contexts).collect(); contexts])
    }

    /// Only self-loops.
    pub fn singletons(contexts: usize) -> Result<Self> {
        Self::new((0..contexts).map(|v| vec![v]).collect())
    }

    /// Edge `c -> c'` iff `|c - c'| <= 1`.
    pub fn line(contexts: usize) -> Result<Self> {
        Self::new(
            (0..contexts)
                .map(|v| (v.saturating_sub(1)..(v + 2).min(contexts)).collect())
                .collect(),
        )
    }

    /// Disjoint union of complete graphs with the given sizes, laid out
    /// consecutively.
    pub fn clique_union(sizes: &[usize]) -> Result<Self> {
        let mut out = Vec::new();
        let mut start = 0;
        for &s in sizes {
            if s == 0 {
                return Err(Error::Graph("clique of size zero".into()));
            }
            for _ in 0..s {
                out.push((start..start + s).collect());
            }
            start += s;
        }
        Self::new(out)
    }

    pub fn contexts(&self) -> usize {
        self.out.len()
    }

    /// `O(v)`, sorted.
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// `I(v)`, sorted.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        self.out.iter().all(|list| list.len() == self.contexts())
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Reads the text format: the vertex count on the first line, then one
    /// `u v` edge per line. Blank lines and `#` comments are skipped and
    /// self-loops are implied.
    pub fn parse(reader: impl Read) -> Result<Self> {
        let mut contexts = None;
        let mut edges = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Data {
                line: lineno,
                msg: e.to_string(),
            })?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Data {
                    line: lineno,
                    msg: format!("`{s}` is not a vertex index"),
                })
            };
            match (contexts, fields.as_slice()) {
                (None, [c]) => contexts = Some(num(c)?),
                (None, _) => {
                    return Err(Error::Data {
                        line: lineno,
                        msg: "expected the vertex count".into(),
                    })
                }
                (Some(c), [u, v]) => {
                    let (u, v) = (num(u)?, num(v)?);
                    if u >= c || v >= c {
                        return Err(Error::Data {
                            line: lineno,
                            msg: format!("edge {u} {v} outside 0..{c}"),
                        });
                    }
                    edges.push((u, v));
                }
                (Some(_), _) => {
                    return Err(Error::Data {
                        line: lineno,
                        msg: "expected `u v`".into(),
                    })
                }
            }
        }
        let contexts = contexts.ok_or(Error::Data {
            line: 0,
            msg: "empty graph file".into(),
        })?;
        Self::from_edges(contexts, &edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(file)
    }

    /// Writes the text format read by [`parse`](Self::parse), omitting self-loops.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.contexts());
        for (u, list) in self.out.iter().enumerate() {
            for &v in list {
                if u != v {
                    s.push_str(&format!("{u} {v}\n"));
                }
            }
        }
        s
    }
}
