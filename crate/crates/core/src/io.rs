//! Reading join specifications (JSON plus CSV relation files) and edge lists.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiGraph, Labels, UGraph};
use crate::model::{AttrSet, DegreeConstraint, JoinQuery, QueryBuilder};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationSpec {
    pub name: String,
    pub schema: Vec<String>,
    pub file: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintSpec {
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "N")]
    pub n: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JoinSpec {
    pub relations: Vec<RelationSpec>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
}

/// Loads a spec file; relation files are resolved against its directory.
pub fn load_join_spec(path: &Path) -> Result<(JoinQuery, Vec<DegreeConstraint>)> {
    let text = std::fs::read_to_string(path)?;
    let spec: JoinSpec = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    build_join(&spec, base)
}

pub fn build_join(spec: &JoinSpec, base: &Path) -> Result<(JoinQuery, Vec<DegreeConstraint>)> {
    let mut b = QueryBuilder::new();
    for r in &spec.relations {
        let file = base.join(&r.file);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&file)
            .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        // Column of each schema attribute within the file.
        let cols =
            r.schema
                .iter()
                .map(|a| {
                    header.iter().position(|h| h == a).ok_or_else(|| {
                        Error::Parse(format!("{}: no column named {a} (header {header:?})", file.display()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
            rows.push(cols.iter().map(|&c| rec.get(c).unwrap_or("").to_string()).collect::<Vec<_>>());
        }
        let schema: Vec<&str> = r.schema.iter().map(String::as_str).collect();
        b.relation(&r.name, &schema, rows)?;
    }
    let q = b.build()?;
    let set = |names: &[String]| -> Result<AttrSet> {
        names
            .iter()
            .map(|n| q.attr_id(n).ok_or_else(|| Error::Schema(format!("unknown attribute {n} in constraint"))))
            .collect::<Result<Vec<_>>>()
            .map(AttrSet::from_ids)
    };
    let constraints = spec
        .constraints
        .iter()
        .map(|c| DegreeConstraint::new(set(&c.x)?, set(&c.y)?, c.n))
        .collect::<Result<Vec<_>>>()?;
    Ok((q, constraints))
}

/// Parses `u v` lines; blank lines and lines starting with `#` are skipped.
fn read_pairs(r: impl BufRead) -> Result<(Labels, Vec<(u32, u32)>)> {
    let mut labels = Labels::default();
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut parts = t.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), None) => {
                let (u, v) = (labels.intern(u), labels.intern(v));
                edges.push((u, v));
            }
            _ => return Err(Error::Parse(format!("line {}: expected `u v`, got {t:?}", i + 1))),
        }
    }
    Ok((labels, edges))
}

pub fn read_digraph(r: impl BufRead) -> Result<DiGraph> {
    let (labels, edges) = read_pairs(r)?;
    DiGraph::with_labels(labels, edges)
}

pub fn read_ugraph(r: impl BufRead) -> Result<UGraph> {
    let (labels, edges) = read_pairs(r)?;
    UGraph::with_labels(labels, edges)
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    Ok(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn load_digraph(path: &Path) -> Result<DiGraph> {
    read_digraph(open(path)?)
}

pub fn load_ugraph(path: &Path) -> Result<UGraph> {
    read_ugraph(open(path)?)
}

pub fn write_edge_list(labels: &Labels, edges: &[(u32, u32)], mut w: impl Write) -> Result<()> {
    for &(u, v) in edges {
        writeln!(w, "{} {}", labels.names[u as usize], labels.names[v as usize])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_lists_round_trip() {
        let g = read_ugraph("# triangle\na b\nb c\n\nc a\na b\n".as_bytes()).unwrap();
        assert_eq!(g.edges.len(), 3);
        let mut out = Vec::new();
        write_edge_list(&g.labels, &g.edges, &mut out).unwrap();
        let again = read_ugraph(out.as_slice()).unwrap();
        assert_eq!(again.edges, g.edges);
        assert!(read_digraph("a b c\n".as_bytes()).is_err());
        assert!(read_digraph("a a\n".as_bytes()).is_err());
    }

    #[test]
    fn join_spec_from_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("r.csv"), "B,A\n1,x\n2,x\n2,y\n").unwrap();
        std::fs::write(dir.path().join("s.csv"), "B,C\n1,p\n2,q\n").unwrap();
        let spec = r#"{"relations":[{"name":"R","schema":["A","B"],"file":"r.csv"},
                                    {"name":"S","schema":["B","C"],"file":"s.csv"}],
                       "constraints":[{"X":["A"],"Y":["A","B"],"N":2}]}"#;
        let path = dir.path().join("spec.json");
        std::fs::write(&path, spec).unwrap();
        let (q, dc) = load_join_spec(&path).unwrap();
        assert_eq!(q.attributes, vec!["A", "B", "C"]);
        assert_eq!(q.relations[0].rows.len(), 3);
        assert_eq!(dc.len(), 1);
        std::fs::write(&path, "{").unwrap();
        assert!(matches!(load_join_spec(&path), Err(Error::Parse(_))));
    }
}
