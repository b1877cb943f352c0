//! Line-oriented ASCII mesh format.
//!
//! ```text
//! # comment
//! *NODES 4
//! 1 0 0 0
//! 2 1 0 0
//! 3 0 1 0
//! 4 0 0 1
//! *TETS 1
//! 1 1 2 3 4
//! *NSET base 3
//! 1 2 3
//! ```
//!
//! Ids are 1-based. `*HEXES m` replaces `*TETS m` for trilinear hexahedra.
//! Node-set members may be spread over any number of lines.

use std::fmt::Write;

use super::{HexMesh, Mesh, NodeSets, Point3, TetMesh};
use crate::error::MeshError;

enum Section {
    None,
    Nodes { expected: usize },
    Elements { per: usize, expected: usize },
    NodeSet { name: String, expected: usize },
}

fn malformed(line: usize, reason: impl Into<String>) -> MeshError {
    MeshError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, MeshError> {
    tok.parse()
        .map_err(|_| malformed(line, format!("expected a non-negative integer, got '{tok}'")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeshError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(malformed(line, format!("expected a finite number, got '{tok}'"))),
    }
}

/// Parses and validates a mesh file.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut nodes: Vec<Option<Point3>> = Vec::new();
    let mut node_header_line = 0;
    let mut elements: Vec<Vec<usize>> = Vec::new();
    let mut element_lines: Vec<usize> = Vec::new();
    let mut element_per: Option<usize> = None;
    let mut node_sets = NodeSets::new();
    let mut section = Section::None;
    let mut section_line = 0;
    let mut section_count = 0;

    let close = |section: &Section, count: usize, header: usize| -> Result<(), MeshError> {
        let expected = match section {
            Section::None => return Ok(()),
            Section::Nodes { expected } | Section::Elements { expected, .. } | Section::NodeSet { expected, .. } => {
                *expected
            }
        };
        if count != expected {
            return Err(malformed(
                header,
                format!("section declares {expected} entries but contains {count}"),
            ));
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if let Some(keyword) = tokens[0].strip_prefix('*') {
            close(&section, section_count, section_line)?;
            section_line = line;
            section_count = 0;
            let keyword = keyword.to_ascii_uppercase();
            section = match keyword.as_str() {
                "NODES" | "TETS" | "HEXES" => {
                    if tokens.len() != 2 {
                        return Err(malformed(line, format!("*{keyword} takes exactly one count")));
                    }
                    let count = parse_usize(tokens[1], line)?;
                    match keyword.as_str() {
                        "NODES" => {
                            if !nodes.is_empty() {
                                return Err(malformed(line, "repeated *NODES section"));
                            }
                            nodes = vec![None; count];
                            node_header_line = line;
                            Section::Nodes { expected: count }
                        }
                        kind => {
                            let per = if kind == "TETS" { 4 } else { 8 };
                            if element_per.is_some() {
                                return Err(malformed(line, "only one element section is allowed"));
                            }
                            if nodes.is_empty() {
                                return Err(malformed(line, "element section before *NODES"));
                            }
                            element_per = Some(per);
                            Section::Elements { per, expected: count }
                        }
                    }
                }
                "NSET" => {
                    if tokens.len() != 3 {
                        return Err(malformed(line, "*NSET takes a name and a count"));
                    }
                    let count = parse_usize(tokens[2], line)?;
                    let name = tokens[1].to_string();
                    if node_sets.contains_key(&name) {
                        return Err(malformed(line, format!("repeated node set '{name}'")));
                    }
                    node_sets.insert(name.clone(), Vec::with_capacity(count));
                    Section::NodeSet { name, expected: count }
                }
                other => return Err(malformed(line, format!("unknown section *{other}"))),
            };
            continue;
        }
        match &section {
            Section::None => return Err(malformed(line, "data outside of a section")),
            Section::Nodes { expected } => {
                if tokens.len() != 4 {
                    return Err(malformed(line, "node lines are 'id x y z'"));
                }
                let id = parse_usize(tokens[0], line)?;
                if id == 0 || id > *expected {
                    return Err(MeshError::OutOfRange {
                        line,
                        id,
                        count: *expected,
                    });
                }
                if nodes[id - 1].is_some() {
                    return Err(MeshError::DuplicateNode { line, id });
                }
                let x = parse_f64(tokens[1], line)?;
                let y = parse_f64(tokens[2], line)?;
                let z = parse_f64(tokens[3], line)?;
                nodes[id - 1] = Some(Point3::new(x, y, z));
                section_count += 1;
            }
            Section::Elements { per, .. } => {
                if tokens.len() != per + 1 {
                    return Err(malformed(line, format!("element lines are 'id' followed by {per} node ids")));
                }
                parse_usize(tokens[0], line)?;
                let mut conn = Vec::with_capacity(*per);
                for tok in &tokens[1..] {
                    let id = parse_usize(tok, line)?;
                    if id == 0 || id > nodes.len() {
                        return Err(MeshError::OutOfRange {
                            line,
                            id,
                            count: nodes.len(),
                        });
                    }
                    conn.push(id - 1);
                }
                elements.push(conn);
                element_lines.push(line);
                section_count += 1;
            }
            Section::NodeSet { name, .. } => {
                let set = node_sets.get_mut(name).expect("set registered at header");
                for tok in &tokens {
                    let id = parse_usize(tok, line)?;
                    if id == 0 || id > nodes.len() {
                        return Err(MeshError::OutOfRange {
                            line,
                            id,
                            count: nodes.len(),
                        });
                    }
                    set.push(id - 1);
                    section_count += 1;
                }
            }
        }
    }
    close(&section, section_count, section_line)?;

    let nodes: Vec<Point3> = nodes
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or(MeshError::MissingNode {
                line: node_header_line,
                id: i + 1,
            })
        })
        .collect::<Result<_, _>>()?;

    match element_per {
        Some(4) => {
            let tets = elements.iter().map(|c| [c[0], c[1], c[2], c[3]]).collect();
            Ok(Mesh::Tet(TetMesh::build(nodes, tets, node_sets, Some(&element_lines))?))
        }
        Some(_) => {
            let hexes = elements
                .iter()
                .map(|c| [c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]])
                .collect();
            Ok(Mesh::Hex(HexMesh::build(nodes, hexes, node_sets, Some(&element_lines))?))
        }
        None => Err(MeshError::Empty),
    }
}

/// Writes a mesh in the format accepted by [`parse_mesh`].
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let nodes = mesh.nodes();
    writeln!(out, "*NODES {}", nodes.len()).unwrap();
    for (i, p) in nodes.iter().enumerate() {
        writeln!(out, "{} {} {} {}", i + 1, p.x, p.y, p.z).unwrap();
    }
    let write_elems = |out: &mut String, header: &str, elems: &mut dyn Iterator<Item = Vec<usize>>, count: usize| {
        writeln!(out, "*{header} {count}").unwrap();
        for (e, conn) in elems.enumerate() {
            write!(out, "{}", e + 1).unwrap();
            for n in conn {
                write!(out, " {}", n + 1).unwrap();
            }
            out.push('\n');
        }
    };
    match mesh {
        Mesh::Tet(m) => write_elems(&mut out, "TETS", &mut m.tets().iter().map(|t| t.to_vec()), m.num_elements()),
        Mesh::Hex(m) => write_elems(&mut out, "HEXES", &mut m.hexes().iter().map(|h| h.to_vec()), m.num_elements()),
    }
    for (name, ids) in mesh.node_sets() {
        writeln!(out, "*NSET {name} {}", ids.len()).unwrap();
        for chunk in ids.chunks(16) {
            let line: Vec<String> = chunk.iter().map(|i| (i + 1).to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
    }
    out
}
