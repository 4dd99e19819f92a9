use super::{Graph, GraphError, Label};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// JSON graph document: `{"n": int, "edges": [[u,v],...], "labels": optional}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
}

impl From<&Graph> for GraphDoc {
    fn from(g: &Graph) -> Self {
        GraphDoc {
            n: g.n(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            labels: g.labels().map(<[Label]>::to_vec),
        }
    }
}

impl TryFrom<GraphDoc> for Graph {
    type Error = GraphError;

    fn try_from(doc: GraphDoc) -> Result<Self, GraphError> {
        let g = Graph::from_edges(doc.n, doc.edges.iter().map(|e| (e[0], e[1])))?;
        match doc.labels {
            Some(labels) => g.with_labels(labels),
            None => Ok(g),
        }
    }
}

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: expected two vertex indices")]
    Malformed { line: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphDoc::from(self)).expect("graph serializes")
    }

    /// Graphviz rendering; product vertices are named by their coordinates.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in 0..self.n() {
            match self.label(v) {
                Some(Label::Product { g, h }) => {
                    let _ = writeln!(out, "  {v} [label=\"({g},{h})\"];");
                }
                Some(Label::Class { class, index }) => {
                    let _ = writeln!(out, "  {v} [label=\"{class}:{index}\"];");
                }
                None => {}
            }
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }

    /// One `u v` per line, preceded by a `# n=<count>` header so isolated
    /// vertices survive a round trip.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={}\n", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format. Without a header, `n` is one more than the
    /// largest index seen.
    pub fn from_edge_list(text: &str) -> Result<Graph, EdgeListError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(count) = rest.trim().strip_prefix("n=") {
                    n = Some(
                        count
                            .trim()
                            .parse()
                            .map_err(|_| EdgeListError::Malformed { line: i + 1 })?,
                    );
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(EdgeListError::Malformed { line: i + 1 }),
            }
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Ok(Graph::from_edges(n, edges)?)
    }
}
