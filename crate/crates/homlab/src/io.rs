//! On-disk formats: structure files (JSON or plain-graph text), cover files,
//! and the comonad carrier with its sidecar decoding table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comonad::{ComonadKind, ComonadStructure, Play};
use crate::cover::{ForestCover, PebbleForestCover};
use crate::error::{Error, Result};
use crate::structure::{PointedStructure, RelStructure, RelSymbol, Signature};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureFile {
    pub signature: Vec<RelSymbol>,
    pub size: usize,
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

impl StructureFile {
    pub fn from_structure(st: &RelStructure, point: Option<usize>) -> Self {
        StructureFile {
            signature: st.signature().symbols().to_vec(),
            size: st.size(),
            relations: st
                .relations()
                .map(|(name, ts)| (name.to_string(), ts.iter().cloned().collect()))
                .collect(),
            point,
        }
    }

    pub fn into_structure(self) -> Result<(RelStructure, Option<usize>)> {
        let sig = Signature::new(
            self.signature.into_iter().map(|s| (s.name, s.arity)).collect::<Vec<_>>(),
        )?;
        let mut st = RelStructure::discrete(sig, self.size);
        for (name, tuples) in self.relations {
            for t in tuples {
                st.insert_tuple(&name, t)?;
            }
        }
        if let Some(p) = self.point {
            if p >= st.size() {
                return Err(Error::MalformedInput(format!("point {p} out of range")));
            }
        }
        Ok((st, self.point))
    }
}

/// Parse the plain-graph shorthand: a line `n <size>` followed by `e u v`
/// lines, each expanded to a symmetric pair of `E`-tuples. `#` starts a
/// comment.
pub fn parse_graph_text(text: &str) -> Result<RelStructure> {
    let mut size: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("n") => {
                let s = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: n needs a size", lineno + 1)))?;
                size = Some(
                    s.parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad size", lineno + 1)))?,
                );
            }
            Some("e") => {
                let u = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad edge", lineno + 1)))?;
                let v = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad edge", lineno + 1)))?;
                edges.push((u, v));
            }
            Some(other) => {
                return Err(Error::Parse(format!("line {}: unknown directive {other}", lineno + 1)))
            }
            None => {}
        }
    }
    let size = size.ok_or_else(|| Error::Parse("missing size line `n <size>`".to_string()))?;
    let mut g = RelStructure::discrete(Signature::graph(), size);
    for (u, v) in edges {
        g.insert_tuple("E", vec![u, v])?;
        g.insert_tuple("E", vec![v, u])?;
    }
    Ok(g)
}

/// Load a structure from a file: JSON when the content starts with `{`,
/// otherwise the plain-graph text format.
pub fn load_structure(path: &Path) -> Result<(RelStructure, Option<usize>)> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let file: StructureFile = serde_json::from_str(&text)?;
        file.into_structure()
    } else {
        Ok((parse_graph_text(&text)?, None))
    }
}

pub fn load_pointed(path: &Path) -> Result<PointedStructure> {
    let (st, point) = load_structure(path)?;
    let p = point.ok_or_else(|| {
        Error::MalformedInput(format!("{} carries no point", path.display()))
    })?;
    PointedStructure::new(st, p)
}

pub fn save_structure(path: &Path, st: &RelStructure, point: Option<usize>) -> Result<()> {
    let file = StructureFile::from_structure(st, point);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFile {
    /// parent index per element, -1 for roots
    pub parent: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pebbles: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl CoverFile {
    pub fn from_forest(cover: &ForestCover) -> Self {
        CoverFile {
            parent: cover.parents().iter().map(|p| p.map_or(-1, |x| x as i64)).collect(),
            pebbles: None,
            k: None,
        }
    }

    pub fn from_pebble(cover: &PebbleForestCover) -> Self {
        CoverFile {
            parent: cover.cover.parents().iter().map(|p| p.map_or(-1, |x| x as i64)).collect(),
            pebbles: Some(cover.pebbles.clone()),
            k: Some(cover.k),
        }
    }

    pub fn into_forest(&self) -> Result<ForestCover> {
        let parent: Result<Vec<Option<usize>>> = self
            .parent
            .iter()
            .map(|&p| {
                if p < -1 {
                    Err(Error::MalformedInput(format!("bad parent {p}")))
                } else if p == -1 {
                    Ok(None)
                } else {
                    Ok(Some(p as usize))
                }
            })
            .collect();
        ForestCover::new(parent?)
    }

    pub fn into_pebble(&self) -> Result<PebbleForestCover> {
        let forest = self.into_forest()?;
        let pebbles = self
            .pebbles
            .clone()
            .ok_or_else(|| Error::MalformedInput("cover file has no pebbles".to_string()))?;
        let k = self
            .k
            .unwrap_or_else(|| pebbles.iter().copied().max().unwrap_or(1));
        PebbleForestCover::new(forest, pebbles, k)
    }
}

pub fn load_cover(path: &Path) -> Result<CoverFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_cover(path: &Path, cover: &CoverFile) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(cover)?)?;
    Ok(())
}

/// The sidecar decoding table emitted alongside a comonad carrier: the play
/// behind every carrier element and the counit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaysFile {
    pub kind: String,
    pub plays: Vec<PlayEntry>,
    pub counit: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlayEntry {
    /// EF plays: element sequences
    Elements(Vec<usize>),
    /// pebble moves or modal steps: (index, element) pairs
    Moves(Vec<(usize, usize)>),
}

impl PlaysFile {
    pub fn from_comonad(cs: &ComonadStructure) -> Self {
        let kind = match cs.kind {
            ComonadKind::Ef { n } => format!("ef({n})"),
            ComonadKind::Pebble { k, n } => format!("pebble({k},{n})"),
            ComonadKind::Modal { k } => format!("modal({k})"),
        };
        let plays = cs
            .plays
            .iter()
            .map(|p| match p {
                Play::Ef(s) => PlayEntry::Elements(s.clone()),
                Play::Pebble(m) => PlayEntry::Moves(m.clone()),
                Play::Modal(m) => PlayEntry::Moves(m.clone()),
            })
            .collect();
        PlaysFile { kind, plays, counit: cs.counit.clone(), point: cs.point }
    }
}
