//! Simplicial meshes in one and two dimensions.
//!
//! Text format (0-based indices, `#` starts a comment):
//!
//! ```text
//! dimension 2
//! nodes 4
//! 0.0 0.0
//! 1.0 0.0
//! 1.0 1.0
//! 0.0 1.0
//! elements 2
//! 0 1 2
//! 0 2 3
//! boundary 4
//! scatterer 0 1
//! outer 1 2
//! outer 2 3
//! outer 3 0
//! ```
//!
//! One-dimensional meshes list one coordinate per node, two nodes per
//! element and one node per boundary facet.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    /// Perfect electric conductor: Dirichlet data from the incident field.
    Scatterer,
    /// Artificial truncation carrying the absorbing term.
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFacet {
    pub nodes: Vec<usize>,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    dimension: usize,
    nodes: Vec<[f64; 2]>,
    elements: Vec<Vec<usize>>,
    boundary: Vec<BoundaryFacet>,
}

fn merr(msg: impl Into<String>) -> Error {
    Error::Mesh(msg.into())
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl Mesh {
    /// Builds and validates a mesh.
    pub fn new(
        dimension: usize,
        nodes: Vec<[f64; 2]>,
        elements: Vec<Vec<usize>>,
        boundary: Vec<BoundaryFacet>,
    ) -> Result<Self> {
        let m = Mesh {
            dimension,
            nodes,
            elements,
            boundary,
        };
        m.validate()?;
        Ok(m)
    }

    /// Uniform 1-D mesh of `[0, length]` with `n_nodes` nodes; scatterer at 0.
    pub fn slab(length: f64, n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 || !(length > 0.0) {
            return Err(merr("slab needs at least two nodes and positive length"));
        }
        let h = length / (n_nodes - 1) as f64;
        let nodes = (0..n_nodes).map(|i| [i as f64 * h, 0.0]).collect();
        let elements = (0..n_nodes - 1).map(|i| vec![i, i + 1]).collect();
        let boundary = vec![
            BoundaryFacet {
                nodes: vec![0],
                tag: BoundaryTag::Scatterer,
            },
            BoundaryFacet {
                nodes: vec![n_nodes - 1],
                tag: BoundaryTag::Outer,
            },
        ];
        Mesh::new(1, nodes, elements, boundary)
    }

    /// Annulus `a <= r <= outer` split into `rings` radial layers and
    /// `sectors` angular cells, each quadrilateral cut into two triangles.
    ///
    /// Nodes are numbered ring by ring, giving bandwidth `sectors + 1`.
    pub fn annulus(a: f64, outer: f64, rings: usize, sectors: usize) -> Result<Self> {
        if !(a > 0.0 && outer > a) || rings == 0 || sectors < 3 {
            return Err(merr(
                "annulus needs 0 < a < outer, rings >= 1, sectors >= 3",
            ));
        }
        let id = |i: usize, s: usize| i * sectors + s % sectors;
        let mut nodes = Vec::with_capacity((rings + 1) * sectors);
        for i in 0..=rings {
            let r = a + (outer - a) * i as f64 / rings as f64;
            for s in 0..sectors {
                let th = 2.0 * PI * s as f64 / sectors as f64;
                nodes.push([r * th.cos(), r * th.sin()]);
            }
        }
        let mut elements = Vec::with_capacity(2 * rings * sectors);
        for i in 0..rings {
            for s in 0..sectors {
                let (p, q, r, t) = (id(i, s), id(i, s + 1), id(i + 1, s), id(i + 1, s + 1));
                elements.push(vec![p, t, q]);
                elements.push(vec![p, r, t]);
            }
        }
        let mut boundary = Vec::with_capacity(2 * sectors);
        for s in 0..sectors {
            boundary.push(BoundaryFacet {
                nodes: vec![id(0, s), id(0, s + 1)],
                tag: BoundaryTag::Scatterer,
            });
            boundary.push(BoundaryFacet {
                nodes: vec![id(rings, s), id(rings, s + 1)],
                tag: BoundaryTag::Outer,
            });
        }
        Mesh::new(2, nodes, elements, boundary)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn boundary(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn facets(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryFacet> {
        self.boundary.iter().filter(move |f| f.tag == tag)
    }

    /// `node -> true` for nodes on a facet with `tag`.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<bool> {
        let mut m = vec![false; self.n_nodes()];
        for f in self.facets(tag) {
            for &n in &f.nodes {
                m[n] = true;
            }
        }
        m
    }

    /// Signed length (1-D) or area (2-D) of element `e`.
    pub fn measure(&self, e: usize) -> f64 {
        let el = &self.elements[e];
        let p = |i: usize| self.nodes[el[i]];
        match self.dimension {
            1 => p(1)[0] - p(0)[0],
            _ => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    /// Element facets: the nodes (1-D) or edges (2-D) of element `el`.
    fn element_facets(&self, el: &[usize]) -> Vec<Vec<usize>> {
        match self.dimension {
            1 => vec![vec![el[0]], vec![el[1]]],
            _ => vec![vec![el[0], el[1]], vec![el[1], el[2]], vec![el[2], el[0]]],
        }
    }

    /// Maps each boundary facet (sorted node list) to its single owning element.
    pub fn facet_owners(&self) -> HashMap<Vec<usize>, usize> {
        let mut owners: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for f in self.element_facets(el) {
                owners.entry(sorted(f)).or_default().push(e);
            }
        }
        owners
            .into_iter()
            .filter(|(_, v)| v.len() == 1)
            .map(|(k, v)| (k, v[0]))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let per = match self.dimension {
            1 => 2,
            2 => 3,
            d => return Err(merr(format!("dimension must be 1 or 2, got {d}"))),
        };
        let n = self.nodes.len();
        if n == 0 || self.elements.is_empty() {
            return Err(merr("mesh has no nodes or no elements"));
        }
        if self
            .nodes
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(merr("non-finite node coordinate"));
        }
        let mut used = vec![false; n];
        for (e, el) in self.elements.iter().enumerate() {
            if el.len() != per {
                return Err(merr(format!(
                    "element {e} has {} nodes, expected {per}",
                    el.len()
                )));
            }
            if let Some(&bad) = el.iter().find(|&&i| i >= n) {
                return Err(merr(format!("element {e} references node {bad} of {n}")));
            }
            let m = self.measure(e);
            if !(m > 0.0) {
                return Err(merr(format!("element {e} has non-positive measure {m}")));
            }
            for &i in el {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(merr(format!("node {i} belongs to no element")));
        }
        // Conformity: each facet is shared by at most two elements, with
        // opposite orientation when shared (2-D).
        let mut count: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
        for el in &self.elements {
            for f in self.element_facets(el) {
                count.entry(sorted(f.clone())).or_default().push(f);
            }
        }
        for (k, v) in &count {
            if v.len() > 2 {
                return Err(merr(format!("facet {k:?} shared by {} elements", v.len())));
            }
            if self.dimension == 2 && v.len() == 2 && v[0] == v[1] {
                return Err(merr(format!("inconsistent orientation across edge {k:?}")));
            }
        }
        let exterior: Vec<&Vec<usize>> = count
            .iter()
            .filter(|(_, v)| v.len() == 1)
            .map(|(k, _)| k)
            .collect();
        let mut tagged: HashMap<Vec<usize>, BoundaryTag> = HashMap::new();
        for f in &self.boundary {
            let key = sorted(f.nodes.clone());
            if key.len() != per - 1 {
                return Err(merr(format!(
                    "boundary facet {:?} has wrong arity",
                    f.nodes
                )));
            }
            match count.get(&key) {
                Some(v) if v.len() == 1 => {}
                _ => {
                    return Err(merr(format!(
                        "boundary facet {:?} is not an exterior facet",
                        f.nodes
                    )))
                }
            }
            if tagged.insert(key, f.tag).is_some() {
                return Err(merr(format!("boundary facet {:?} tagged twice", f.nodes)));
            }
        }
        if let Some(f) = exterior.iter().find(|f| !tagged.contains_key(**f)) {
            return Err(merr(format!(
                "exterior facet {f:?} carries no boundary tag"
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                (
                    i + 1,
                    l.split('#')
                        .next()
                        .unwrap_or("")
                        .split_whitespace()
                        .collect::<Vec<_>>(),
                )
            })
            .filter(|(_, t)| !t.is_empty())
            .collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut cur = 0usize;
        let mut next = || -> Result<(usize, Vec<&str>)> {
            let l = lines
                .get(cur)
                .cloned()
                .ok_or_else(|| perr(0, "unexpected end of file".into()))?;
            cur += 1;
            Ok(l)
        };
        let u = |ln: usize, s: &str| {
            s.parse::<usize>()
                .map_err(|e| perr(ln, format!("'{s}': {e}")))
        };
        let f = |ln: usize, s: &str| {
            s.parse::<f64>()
                .map_err(|e| perr(ln, format!("'{s}': {e}")))
        };
        let header = |(ln, t): (usize, Vec<&str>), name: &str| -> Result<usize> {
            if t.len() != 2 || t[0] != name {
                return Err(perr(ln, format!("expected '{name} <count>'")));
            }
            u(ln, t[1])
        };
        let dimension = header(next()?, "dimension")?;
        if !(1..=2).contains(&dimension) {
            return Err(merr(format!("dimension must be 1 or 2, got {dimension}")));
        }
        let n_nodes = header(next()?, "nodes")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (ln, t) = next()?;
            if t.len() != dimension {
                return Err(perr(ln, format!("expected {dimension} coordinates")));
            }
            nodes.push([
                f(ln, t[0])?,
                if dimension == 2 { f(ln, t[1])? } else { 0.0 },
            ]);
        }
        let n_el = header(next()?, "elements")?;
        let mut elements = Vec::with_capacity(n_el);
        for _ in 0..n_el {
            let (ln, t) = next()?;
            elements.push(t.iter().map(|s| u(ln, s)).collect::<Result<Vec<_>>>()?);
        }
        let n_b = header(next()?, "boundary")?;
        let mut boundary = Vec::with_capacity(n_b);
        for _ in 0..n_b {
            let (ln, t) = next()?;
            let tag = match t[0] {
                "scatterer" => BoundaryTag::Scatterer,
                "outer" => BoundaryTag::Outer,
                other => return Err(perr(ln, format!("unknown boundary tag '{other}'"))),
            };
            boundary.push(BoundaryFacet {
                nodes: t[1..].iter().map(|s| u(ln, s)).collect::<Result<_>>()?,
                tag,
            });
        }
        if let Ok((ln, _)) = next() {
            return Err(perr(ln, "trailing content after boundary section".into()));
        }
        Mesh::new(dimension, nodes, elements, boundary)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Mesh::parse(&std::fs::read_to_string(path)?)
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dimension {}", self.dimension);
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            if self.dimension == 1 {
                let _ = writeln!(s, "{:e}", p[0]);
            } else {
                let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
            }
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for el in &self.elements {
            let _ = writeln!(
                s,
                "{}",
                el.iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for f in &self.boundary {
            let tag = match f.tag {
                BoundaryTag::Scatterer => "scatterer",
                BoundaryTag::Outer => "outer",
            };
            let _ = writeln!(
                s,
                "{tag} {}",
                f.nodes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "dimension 2\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelements 2\n0 1 2\n0 2 3\nboundary 4\nscatterer 0 1\nouter 1 2\nouter 2 3\nouter 3 0\n";

    #[test]
    fn parses_and_round_trips() {
        let m = Mesh::parse(SQUARE).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert!((m.measure(0) - 0.5).abs() < 1e-15);
        assert_eq!(Mesh::parse(&m.format()).unwrap(), m);
        let a = Mesh::annulus(1.0, 2.0, 2, 8).unwrap();
        assert_eq!(Mesh::parse(&a.format()).unwrap(), a);
        let s = Mesh::slab(1.0, 5).unwrap();
        assert_eq!(Mesh::parse(&s.format()).unwrap(), s);
    }

    #[test]
    fn rejects_untagged_and_double_tagged() {
        let missing = SQUARE
            .replace("boundary 4", "boundary 3")
            .replace("outer 3 0\n", "");
        assert!(matches!(Mesh::parse(&missing), Err(Error::Mesh(_))));
        let twice = SQUARE.replace("boundary 4", "boundary 5") + "outer 0 3\n";
        assert!(matches!(Mesh::parse(&twice), Err(Error::Mesh(_))));
        let interior = SQUARE.replace("outer 3 0", "outer 0 2");
        assert!(Mesh::parse(&interior).is_err());
    }

    #[test]
    fn rejects_degenerate_and_inverted() {
        let flat = SQUARE.replace("1 1\n0 1", "2 0\n0 1");
        assert!(Mesh::parse(&flat).is_err());
        let inverted = SQUARE.replace("0 2 3", "0 3 2");
        assert!(Mesh::parse(&inverted).is_err());
    }

    #[test]
    fn annulus_structure() {
        let m = Mesh::annulus(1.0, 3.0, 4, 16).unwrap();
        assert_eq!(m.n_nodes(), 5 * 16);
        assert_eq!(m.elements().len(), 2 * 4 * 16);
        let area: f64 = (0..m.elements().len()).map(|e| m.measure(e)).sum();
        // inscribed polygons: (n/2) sin(2 pi / n) (R^2 - a^2)
        let want = 8.0 * (2.0 * PI / 16.0).sin() * 8.0;
        assert!((area - want).abs() < 1e-12);
        assert_eq!(m.facets(BoundaryTag::Scatterer).count(), 16);
    }
}
