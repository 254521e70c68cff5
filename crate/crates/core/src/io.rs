//! Parsers for the two supported input formats.
//!
//! Both produce the raw directed record multiset exactly as read; all
//! cleaning happens later in [`crate::graph::preprocess`].

use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeRecord;

/// Supported input file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One link per line: `u v [w]`, whitespace separated. Lines starting
    /// with `#` or `%` are comments. Weight defaults to 1.0.
    EdgeList,
    /// Pajek-style `.net`: a `*Vertices n` section followed by `*Edges` /
    /// `*Arcs` sections of `u v [w]` triples with 1-based vertex ids.
    Pajek,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edgelist" => Ok(InputFormat::EdgeList),
            "pajek" => Ok(InputFormat::Pajek),
            other => Err(Error::domain(format!(
                "unknown input format '{other}' (expected 'edgelist' or 'pajek')"
            ))),
        }
    }
}

/// Reads the raw weighted records from `source`.
///
/// No cleaning is applied: duplicates, antiparallel records and self-loops
/// are returned verbatim. Malformed records are reported with their line
/// number; an input with no records at all is an error.
pub fn load_edge_list(source: impl BufRead, format: InputFormat) -> Result<Vec<EdgeRecord>> {
    let records = match format {
        InputFormat::EdgeList => parse_edge_list(source)?,
        InputFormat::Pajek => parse_pajek(source)?,
    };
    if records.is_empty() {
        return Err(Error::EmptyGraph("input contains no link records".into()));
    }
    Ok(records)
}

fn read_line(lines: &mut impl Iterator<Item = std::io::Result<String>>, lineno: usize) -> Result<Option<String>> {
    match lines.next() {
        None => Ok(None),
        Some(Ok(l)) => Ok(Some(l)),
        Some(Err(e)) => Err(Error::parse(lineno, format!("unreadable line: {e}"))),
    }
}

fn parse_weight(token: Option<&str>, line: usize) -> Result<f64> {
    let Some(token) = token else {
        return Ok(1.0);
    };
    let w: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("non-numeric weight '{token}'")))?;
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::parse(line, format!("weight must be positive, got {token}")));
    }
    Ok(w)
}

fn parse_edge_list(source: impl BufRead) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::new();
    let mut lines = source.lines();
    let mut lineno = 0usize;
    while let Some(line) = read_line(&mut lines, lineno + 1)? {
        lineno += 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 'u v [w]', got {} tokens", tokens.len()),
            ));
        }
        records.push(EdgeRecord {
            source: tokens[0].to_string(),
            target: tokens[1].to_string(),
            weight: parse_weight(tokens.get(2).copied(), lineno)?,
            line: lineno,
        });
    }
    Ok(records)
}

#[derive(PartialEq)]
enum PajekSection {
    Preamble,
    Vertices,
    Links,
}

fn parse_pajek(source: impl BufRead) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::new();
    let mut lines = source.lines();
    let mut lineno = 0usize;
    let mut section = PajekSection::Preamble;
    let mut vertex_count: usize = 0;
    let mut vertex_labels: Vec<Option<String>> = Vec::new();

    while let Some(line) = read_line(&mut lines, lineno + 1)? {
        lineno += 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('*') {
            let mut parts = rest.split_whitespace();
            let keyword = parts.next().unwrap_or("").to_ascii_lowercase();
            match keyword.as_str() {
                "network" => continue,
                "vertices" => {
                    let n = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(lineno, "*Vertices requires a count"))?;
                    vertex_count = n;
                    vertex_labels = vec![None; n];
                    section = PajekSection::Vertices;
                }
                "edges" | "arcs" => {
                    if section == PajekSection::Preamble {
                        return Err(Error::parse(lineno, "*Edges/*Arcs before *Vertices"));
                    }
                    section = PajekSection::Links;
                }
                other => {
                    return Err(Error::parse(lineno, format!("unsupported section '*{other}'")));
                }
            }
            continue;
        }
        match section {
            PajekSection::Preamble => {
                return Err(Error::parse(lineno, "expected *Vertices header"));
            }
            PajekSection::Vertices => {
                let (id, label) = parse_pajek_vertex(line, lineno)?;
                if id == 0 || id > vertex_count {
                    return Err(Error::parse(
                        lineno,
                        format!("vertex id {id} outside 1..={vertex_count}"),
                    ));
                }
                vertex_labels[id - 1] = label;
            }
            PajekSection::Links => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() < 2 || tokens.len() > 3 {
                    return Err(Error::parse(
                        lineno,
                        format!("expected 'u v [w]', got {} tokens", tokens.len()),
                    ));
                }
                let mut vertex = |tok: &str| -> Result<String> {
                    let id: usize = tok
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("non-integer vertex id '{tok}'")))?;
                    if id == 0 || id > vertex_count {
                        return Err(Error::parse(
                            lineno,
                            format!("vertex id {id} outside 1..={vertex_count}"),
                        ));
                    }
                    Ok(vertex_labels[id - 1]
                        .clone()
                        .unwrap_or_else(|| id.to_string()))
                };
                records.push(EdgeRecord {
                    source: vertex(tokens[0])?,
                    target: vertex(tokens[1])?,
                    weight: parse_weight(tokens.get(2).copied(), lineno)?,
                    line: lineno,
                });
            }
        }
    }
    Ok(records)
}

/// Parses a Pajek vertex line: `id ["label" | label] [coordinates...]`.
/// Coordinates and shape parameters after the label are ignored.
fn parse_pajek_vertex(line: &str, lineno: usize) -> Result<(usize, Option<String>)> {
    let line = line.trim();
    let (id_tok, rest) = match line.split_once(char::is_whitespace) {
        Some((a, b)) => (a, b.trim_start()),
        None => (line, ""),
    };
    let id: usize = id_tok
        .parse()
        .map_err(|_| Error::parse(lineno, format!("non-integer vertex id '{id_tok}'")))?;
    if rest.is_empty() {
        return Ok((id, None));
    }
    let label = if let Some(rest) = rest.strip_prefix('"') {
        let end = rest
            .find('"')
            .ok_or_else(|| Error::parse(lineno, "unterminated quoted label"))?;
        rest[..end].to_string()
    } else {
        rest.split_whitespace().next().unwrap_or("").to_string()
    };
    Ok((id, Some(label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{preprocess, MergeRule, PreprocessOptions};

    fn edgelist(text: &str) -> Result<Vec<EdgeRecord>> {
        load_edge_list(text.as_bytes(), InputFormat::EdgeList)
    }

    #[test]
    fn reads_records_verbatim() {
        let recs = edgelist("1 2 1.0\n2 3 2.0\n1 3 3.0\n").unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].source, "2");
        assert_eq!(recs[1].target, "3");
        assert_eq!(recs[1].weight, 2.0);
        assert_eq!(recs[1].line, 2);
    }

    #[test]
    fn missing_weight_defaults_to_one() {
        let recs = edgelist("1 2\n").unwrap();
        assert_eq!(recs[0].weight, 1.0);
    }

    #[test]
    fn negative_weight_is_a_parse_error() {
        let err = edgelist("1 2 -3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn zero_weight_rejected() {
        assert!(matches!(edgelist("1 2 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_token_count_names_line() {
        let err = edgelist("1 2 3.0\na b c d\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let recs = edgelist("# heading\n% konect style\n\n1 2 1.5\n").unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn empty_input_is_empty_graph_error() {
        assert!(matches!(edgelist("# nothing\n"), Err(Error::EmptyGraph(_))));
    }

    #[test]
    fn pajek_with_labels_and_coordinates() {
        let text = "*Vertices 3\n1 \"Anchorage Intl\" 0.1 0.2\n2 \"Kodiak\"\n3\n*Edges\n1 2 4.5\n2 3\n";
        let recs = load_edge_list(text.as_bytes(), InputFormat::Pajek).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].source, "Anchorage Intl");
        assert_eq!(recs[0].target, "Kodiak");
        assert_eq!(recs[0].weight, 4.5);
        assert_eq!(recs[1].source, "Kodiak");
        assert_eq!(recs[1].target, "3");
        assert_eq!(recs[1].weight, 1.0);
    }

    #[test]
    fn pajek_arcs_section_and_case_insensitive_headers() {
        let text = "*network trophic\n*vertices 2\n*arcs\n1 2 0.25\n2 1 0.5\n";
        let recs = load_edge_list(text.as_bytes(), InputFormat::Pajek).unwrap();
        assert_eq!(recs.len(), 2);
        // Antiparallel arcs merge by sum by default.
        let g = preprocess(&recs, &PreprocessOptions::default()).unwrap();
        assert_eq!(g.link_count(), 1);
        assert_eq!(g.link_weight(0, 1), Some(0.75));
    }

    #[test]
    fn pajek_out_of_range_vertex_is_error() {
        let text = "*Vertices 2\n*Edges\n1 5 1.0\n";
        let err = load_edge_list(text.as_bytes(), InputFormat::Pajek).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn pajek_unknown_section_is_error() {
        let text = "*Vertices 2\n*Matrix\n0 1\n1 0\n";
        assert!(matches!(
            load_edge_list(text.as_bytes(), InputFormat::Pajek),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn merge_max_collapses_antiparallel_records() {
        let recs = edgelist("1 2 1\n2 1 1\n").unwrap();
        let opts = PreprocessOptions {
            merge: MergeRule::Max,
            ..Default::default()
        };
        let g = preprocess(&recs, &opts).unwrap();
        assert_eq!(g.link_count(), 1);
        assert_eq!(g.link_weight(0, 1), Some(1.0));
    }
}
