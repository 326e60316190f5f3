//! Undirected simple graphs as symmetric boolean adjacency matrices, with
//! Hamming distance and edge-list / DOT text formats.

use std::fmt::Write as _;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

/// Symmetric, loop-free adjacency over `p` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Adjacency {
    p: usize,
    // row-major p×p, kept symmetric
    cells: Vec<bool>,
}

impl Adjacency {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            cells: vec![false; p * p],
        }
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Self::empty(p);
        for i in 0..p {
            for j in (i + 1)..p {
                g.insert_unchecked(i, j);
            }
        }
        g
    }

    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn nodes(&self) -> usize {
        self.p
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.p && j < self.p && self.cells[i * self.p + j]
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop on node {i}")));
        }
        if i >= self.p || j >= self.p {
            return Err(Error::InvalidInput(format!(
                "edge ({i}, {j}) out of range for {} nodes",
                self.p
            )));
        }
        self.insert_unchecked(i, j);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, i: usize, j: usize) {
        self.cells[i * self.p + j] = true;
        self.cells[j * self.p + i] = true;
    }

    pub fn edge_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in ascending lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.cells[i * self.p + j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.p).filter(|&j| self.has_edge(i, j)).count()
    }

    /// Unordered pairs on which the two graphs disagree, ascending.
    pub fn disagreements(&self, other: &Adjacency) -> Result<Vec<(usize, usize)>> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: other.p,
            });
        }
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.has_edge(i, j) != other.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }

    /// Is every edge of `self` also an edge of `other`?
    pub fn is_subgraph_of(&self, other: &Adjacency) -> bool {
        self.p == other.p && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    /// Edge list text: `#` header lines, then one `i j` line per edge.
    /// The `# nodes: p` header lets readers recover isolated trailing nodes.
    pub fn to_edge_list(&self, extra_header: &[String]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nodes: {}", self.p);
        for h in extra_header {
            let _ = writeln!(s, "# {h}");
        }
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    /// Undirected DOT graph; node labels come from `labels` when given.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        let mut s = String::from("graph G {\n");
        for i in 0..self.p {
            let label = labels
                .and_then(|l| l.get(i))
                .cloned()
                .unwrap_or_else(|| i.to_string());
            let _ = writeln!(s, "  {i} [label=\"{}\"];", escape_dot(&label));
        }
        for (i, j) in self.edges() {
            let _ = writeln!(s, "  {i} -- {j};");
        }
        s.push_str("}\n");
        s
    }
}

pub fn hamming_distance(a: &Adjacency, b: &Adjacency) -> Result<usize> {
    Ok(a.disagreements(b)?.len())
}

/// A parsed edge-list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    /// Node count from the `# nodes:` header, if present.
    pub nodes: Option<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeList {
    /// Build the adjacency, using `nodes_override`, then the header, then
    /// `max index + 1` to fix the node count.
    pub fn to_adjacency(&self, nodes_override: Option<usize>) -> Result<Adjacency> {
        let inferred = self
            .edges
            .iter()
            .map(|&(i, j)| i.max(j) + 1)
            .max()
            .unwrap_or(0);
        let p = nodes_override.or(self.nodes).unwrap_or(inferred);
        Adjacency::from_edges(p, &self.edges)
    }
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut nodes = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let row = lineno as u64 + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("nodes:") {
                let p = v.trim().parse::<usize>().map_err(|e| Error::Parse {
                    row,
                    column: 1,
                    message: format!("bad node count: {e}"),
                })?;
                nodes = Some(p);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                row,
                column: 1,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let parse = |col: usize| {
            fields[col].parse::<usize>().map_err(|e| Error::Parse {
                row,
                column: col + 1,
                message: format!("bad node index {:?}: {e}", fields[col]),
            })
        };
        let (i, j) = (parse(0)?, parse(1)?);
        edges.push((i.min(j), i.max(j)));
    }
    Ok(EdgeList { nodes, edges })
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl Serialize for Adjacency {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Adjacency", 2)?;
        st.serialize_field("nodes", &self.p)?;
        st.serialize_field("edges", &self.edges())?;
        st.end()
    }
}
