//! DIMACS-like text format for flow networks, used for debugging dumps and
//! oracle cross-checks.
//!
//! ```text
//! c comment
//! p min <nodes> <edges>
//! n <id> <supply>                  (1-based, nonzero supplies only)
//! a <from> <to> <lower> <upper> <cost>
//! ```

use super::{FlowError, FlowNetwork};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Network {
        line: usize,
        #[source]
        source: FlowError,
    },
    #[error("missing problem line `p min <nodes> <edges>`")]
    MissingProblemLine,
    #[error("expected {expected} arc lines, found {found}")]
    ArcCountMismatch { expected: usize, found: usize },
}

pub fn network_to_string(n: &FlowNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p min {} {}", n.node_count(), n.edges().len());
    for (node, &supply) in n.supplies().iter().enumerate() {
        if supply != 0 {
            let _ = writeln!(out, "n {} {}", node + 1, supply);
        }
    }
    for e in n.edges() {
        let _ = writeln!(
            out,
            "a {} {} {} {} {}",
            e.from + 1,
            e.to + 1,
            e.lower,
            e.upper,
            e.cost
        );
    }
    out
}

pub fn network_from_str(text: &str) -> Result<FlowNetwork, DimacsError> {
    let mut network: Option<FlowNetwork> = None;
    let mut declared_edges = 0usize;
    let mut seen_edges = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let parse = |line_no: usize, message: String| DimacsError::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "p" => {
                if network.is_some() {
                    return Err(parse(line_no, "duplicate problem line".into()));
                }
                if fields.len() != 4 || fields[1] != "min" {
                    return Err(parse(line_no, "expected `p min <nodes> <edges>`".into()));
                }
                let nodes: usize = field(&fields, 2, line_no)?;
                declared_edges = field(&fields, 3, line_no)?;
                network = Some(FlowNetwork::new(nodes));
            }
            "n" => {
                let net = network.as_mut().ok_or(DimacsError::MissingProblemLine)?;
                if fields.len() != 3 {
                    return Err(parse(line_no, "expected `n <id> <supply>`".into()));
                }
                let id: usize = field(&fields, 1, line_no)?;
                let supply: i64 = field(&fields, 2, line_no)?;
                if id == 0 || id > net.node_count() {
                    return Err(parse(line_no, format!("node id {id} out of range")));
                }
                net.set_supply(id - 1, supply);
            }
            "a" => {
                let net = network.as_mut().ok_or(DimacsError::MissingProblemLine)?;
                if fields.len() != 6 {
                    return Err(parse(
                        line_no,
                        "expected `a <from> <to> <lower> <upper> <cost>`".into(),
                    ));
                }
                let from: usize = field(&fields, 1, line_no)?;
                let to: usize = field(&fields, 2, line_no)?;
                if from == 0 || to == 0 {
                    return Err(parse(line_no, "node ids are 1-based".into()));
                }
                net.add_edge(
                    from - 1,
                    to - 1,
                    field(&fields, 3, line_no)?,
                    field(&fields, 4, line_no)?,
                    field(&fields, 5, line_no)?,
                )
                .map_err(|source| DimacsError::Network {
                    line: line_no,
                    source,
                })?;
                seen_edges += 1;
            }
            other => {
                return Err(parse(line_no, format!("unknown line type `{other}`")));
            }
        }
    }

    let network = network.ok_or(DimacsError::MissingProblemLine)?;
    if seen_edges != declared_edges {
        return Err(DimacsError::ArcCountMismatch {
            expected: declared_edges,
            found: seen_edges,
        });
    }
    Ok(network)
}

fn field<T: std::str::FromStr>(
    fields: &[&str],
    index: usize,
    line_no: usize,
) -> Result<T, DimacsError> {
    fields[index].parse().map_err(|_| DimacsError::Parse {
        line: line_no,
        message: format!("bad numeric field `{}`", fields[index]),
    })
}
