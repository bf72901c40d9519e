//! Line-oriented graph description documents.
//!
//! ```text
//! # comment
//! [vertices]
//! a
//! b
//! [edges]
//! e0 a b 2.0
//! [potential]
//! e0 constant 25.0
//! ```
//!
//! Potential kinds: `constant c`, `cosine a b omega phi`
//! (`a + b cos(omega s + phi)`), `quadratic c0 c1 c2`, `sampled v0 v1 ...`.
//! Edges without a potential line get zero. Numbers are decimal floats,
//! text is UTF-8, `#` starts a comment.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, GraphConfig, MetricGraph};
use crate::potential::{EdgePotential, PotentialField};

pub fn parse(text: &str) -> Result<(MetricGraph, PotentialField)> {
    parse_with_config(text, GraphConfig::default())
}

pub fn parse_with_config(
    text: &str,
    config: GraphConfig,
) -> Result<(MetricGraph, PotentialField)> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Vertices,
        Edges,
        Potential,
    }
    let mut section = Section::None;
    let mut builder = GraphBuilder::with_config(config);
    let mut vertex_ids = BTreeMap::new();
    let mut edge_ids = BTreeMap::new();
    let mut edge_order = Vec::new();
    let mut potentials: BTreeMap<String, EdgePotential> = BTreeMap::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = ln + 1;
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        match line {
            "[vertices]" => {
                section = Section::Vertices;
                continue;
            }
            "[edges]" => {
                section = Section::Edges;
                continue;
            }
            "[potential]" => {
                section = Section::Potential;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => {
                return Err(err(format!("content before any section: {line:?}")));
            }
            Section::Vertices => {
                let name = line.to_string();
                if vertex_ids.contains_key(&name) {
                    return Err(err(format!("duplicate vertex {name:?}")));
                }
                let id = builder.add_vertex(&name);
                vertex_ids.insert(name, id);
            }
            Section::Edges => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(err("expected: <edge> <u> <v> <length>".into()));
                }
                let name = parts[0].to_string();
                if edge_ids.contains_key(&name) {
                    return Err(err(format!("duplicate edge {name:?}")));
                }
                let u = *vertex_ids
                    .get(parts[1])
                    .ok_or_else(|| err(format!("unknown vertex {:?}", parts[1])))?;
                let v = *vertex_ids
                    .get(parts[2])
                    .ok_or_else(|| err(format!("unknown vertex {:?}", parts[2])))?;
                let length: f64 = parts[3]
                    .parse()
                    .map_err(|_| err(format!("bad length {:?}", parts[3])))?;
                if !(length > 0.0) {
                    return Err(err(format!("length must be positive, got {length}")));
                }
                let id = builder.add_edge_labeled(u, v, length, &name);
                edge_ids.insert(name.clone(), id);
                edge_order.push(name);
            }
            Section::Potential => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() < 2 {
                    return Err(err("expected: <edge> <kind> <params...>".into()));
                }
                let name = parts[0].to_string();
                if !edge_ids.contains_key(&name) {
                    return Err(err(format!("unknown edge {name:?}")));
                }
                let nums: Vec<f64> = parts[2..]
                    .iter()
                    .map(|p| p.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("bad numeric parameter".into()))?;
                let pot = match parts[1] {
                    "constant" if nums.len() == 1 => EdgePotential::Constant(nums[0]),
                    "cosine" if nums.len() == 4 => EdgePotential::Cosine {
                        a: nums[0],
                        b: nums[1],
                        omega: nums[2],
                        phi: nums[3],
                    },
                    "quadratic" if nums.len() == 3 => EdgePotential::Quadratic {
                        c0: nums[0],
                        c1: nums[1],
                        c2: nums[2],
                    },
                    "sampled" if nums.len() >= 2 => EdgePotential::Sampled(nums),
                    kind => {
                        return Err(err(format!(
                            "unknown potential kind or wrong arity: {kind:?} with {} params",
                            nums.len()
                        )));
                    }
                };
                potentials.insert(name, pot);
            }
        }
    }
    let graph = builder.build()?;
    let per_edge: Vec<EdgePotential> = graph
        .edges()
        .iter()
        .map(|e| {
            potentials
                .get(&e.label)
                .cloned()
                .unwrap_or(EdgePotential::Constant(0.0))
        })
        .collect();
    let field = PotentialField::new(&graph, per_edge)?;
    Ok((graph, field))
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Serialize back to the document format; `parse(serialize(g, v))`
/// reproduces the same graph and potential.
pub fn serialize(g: &MetricGraph, potential: &PotentialField) -> String {
    let mut out = String::new();
    out.push_str("[vertices]\n");
    for v in g.vertices() {
        out.push_str(g.vertex_label(v));
        out.push('\n');
    }
    out.push_str("[edges]\n");
    for e in g.edges() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            e.label,
            g.vertex_label(e.ends.0),
            g.vertex_label(e.ends.1),
            fmt_num(e.length)
        ));
    }
    out.push_str("[potential]\n");
    for e in g.edges() {
        let line = match potential.descriptor(e.id) {
            EdgePotential::Constant(c) => format!("{} constant {}", e.label, fmt_num(*c)),
            EdgePotential::Cosine { a, b, omega, phi } => format!(
                "{} cosine {} {} {} {}",
                e.label,
                fmt_num(*a),
                fmt_num(*b),
                fmt_num(*omega),
                fmt_num(*phi)
            ),
            EdgePotential::Quadratic { c0, c1, c2 } => format!(
                "{} quadratic {} {} {}",
                e.label,
                fmt_num(*c0),
                fmt_num(*c1),
                fmt_num(*c2)
            ),
            EdgePotential::Sampled(vals) => {
                let nums: Vec<String> = vals.iter().map(|v| fmt_num(*v)).collect();
                format!("{} sampled {}", e.label, nums.join(" "))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "\
# a two-edge graph
[vertices]
a
b
[edges]
left a b 2.0
right b a 3.0
[potential]
left constant 1.5
right cosine 2.0 1.0 3.0 0.25
";

    #[test]
    fn parse_and_roundtrip() {
        let (g, v) = parse(DOC).unwrap();
        assert_eq!(g.n_vertices(), 2);
        assert_eq!(g.n_edges(), 2);
        let text = serialize(&g, &v);
        let (g2, v2) = parse(&text).unwrap();
        assert_eq!(serialize(&g2, &v2), text);
        assert!((g2.total_length() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "[edges]\ne0 a b 1.0\n";
        match parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad2 = "[vertices]\na\n[edges]\ne0 a a twopi\n";
        match parse(bad2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_potential_refused() {
        let bad = "\
[vertices]
a
[edges]
e0 a a 6.0
[potential]
e0 constant -1.0
";
        assert!(matches!(
            parse(bad),
            Err(Error::NegativePotential { .. })
        ));
    }
}
