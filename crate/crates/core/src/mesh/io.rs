//! Plain-text mesh exchange format.
//!
//! ```text
//! nodes N elements M
//! x y                      (N lines)
//! id role v n1 n2 ... nk   (M lines)
//! boundary K
//! ax ay bx by excluded     (K lines)
//! domain P
//! x y                      (P lines)
//! meta kind h extension
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading back a
//! written mesh reproduces it bit for bit.

use std::io::{BufRead, Write};

use super::{DomainKind, Element, ElementRole, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, BoundarySegment, Point2};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "nodes {} elements {}", mesh.nodes.len(), mesh.elements.len())?;
    for p in &mesh.nodes {
        writeln!(out, "{:?} {:?}", p.x, p.y)?;
    }
    for el in &mesh.elements {
        write!(out, "{} {} {:?}", el.id, el.role.as_str(), el.area)?;
        for n in &el.node_ids {
            write!(out, " {n}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "boundary {}", mesh.boundary.len())?;
    for s in &mesh.boundary {
        writeln!(out, "{:?} {:?} {:?} {:?} {}", s.a.x, s.a.y, s.b.x, s.b.y, u8::from(s.pad_excluded))?;
    }
    writeln!(out, "domain {}", mesh.domain.len())?;
    for p in &mesh.domain {
        writeln!(out, "{:?} {:?}", p.x, p.y)?;
    }
    let kind = match mesh.domain_kind {
        DomainKind::Regular => "regular",
        DomainKind::Irregular => "irregular",
    };
    let ext = mesh.extension.map_or("none".to_string(), |t| format!("{t:?}"));
    writeln!(out, "meta {kind} {:?} {ext}", mesh.element_size)?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_tokens(&mut self) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let l = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse { line: self.line, msg: "unexpected end of file".into() })??;
            let toks: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != key {
            return Err(self.err(format!("expected `{key} <count>`")));
        }
        self.num(&t[1])
    }

    fn point(&mut self) -> Result<Point2> {
        let t = self.next_tokens()?;
        if t.len() != 2 {
            return Err(self.err("expected `x y`"));
        }
        Ok(Point2::new(self.num(&t[0])?, self.num(&t[1])?))
    }
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = Lines { inner: input.lines(), line: 0 };
    let head = lines.next_tokens()?;
    if head.len() != 4 || head[0] != "nodes" || head[2] != "elements" {
        return Err(lines.err("expected `nodes N elements M`"));
    }
    let n_nodes: usize = lines.num(&head[1])?;
    let n_elems: usize = lines.num(&head[3])?;
    let nodes = (0..n_nodes).map(|_| lines.point()).collect::<Result<Vec<_>>>()?;

    let mut elements = Vec::with_capacity(n_elems);
    for k in 0..n_elems {
        let t = lines.next_tokens()?;
        if t.len() < 6 {
            return Err(lines.err("element needs id, role, area and at least 3 nodes"));
        }
        let id: usize = lines.num(&t[0])?;
        if id != k {
            return Err(lines.err(format!("element ids must be consecutive, got {id}")));
        }
        let role = ElementRole::parse(&t[1]).ok_or_else(|| lines.err(format!("unknown role `{}`", t[1])))?;
        let area: f64 = lines.num(&t[2])?;
        let node_ids = t[3..].iter().map(|s| lines.num(s)).collect::<Result<Vec<usize>>>()?;
        if let Some(&bad) = node_ids.iter().find(|&&n| n >= n_nodes) {
            return Err(lines.err(format!("node index {bad} out of range")));
        }
        let poly: Vec<Point2> = node_ids.iter().map(|&n| nodes[n]).collect();
        elements.push(Element { id, centroid: polygon_centroid(&poly), area, node_ids, role });
    }

    let n_seg = lines.header("boundary")?;
    let mut boundary = Vec::with_capacity(n_seg);
    for _ in 0..n_seg {
        let t = lines.next_tokens()?;
        if t.len() != 5 {
            return Err(lines.err("expected `ax ay bx by excluded`"));
        }
        let a = Point2::new(lines.num(&t[0])?, lines.num(&t[1])?);
        let b = Point2::new(lines.num(&t[2])?, lines.num(&t[3])?);
        let excluded: u8 = lines.num(&t[4])?;
        boundary.push(BoundarySegment::new(a, b)?.excluded(excluded != 0));
    }
    let n_dom = lines.header("domain")?;
    let domain = (0..n_dom).map(|_| lines.point()).collect::<Result<Vec<_>>>()?;

    let t = lines.next_tokens()?;
    if t.len() != 4 || t[0] != "meta" {
        return Err(lines.err("expected `meta kind h extension`"));
    }
    let kind = match t[1].as_str() {
        "regular" => DomainKind::Regular,
        "irregular" => DomainKind::Irregular,
        other => return Err(lines.err(format!("unknown mesh kind `{other}`"))),
    };
    let h: f64 = lines.num(&t[2])?;
    let extension = if t[3] == "none" { None } else { Some(lines.num(&t[3])?) };
    Ok(Mesh::from_parts(elements, nodes, boundary, kind, h, domain, extension))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_irregular, build_regular, ExtensionSpec, PassiveRegion, Region};

    fn round_trip(m: &Mesh) {
        let mut buf = Vec::new();
        write_mesh(m, &mut buf).unwrap();
        let back = read_mesh(&buf[..]).unwrap();
        assert_eq!(&back, m);
        let mut again = Vec::new();
        write_mesh(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn regular_round_trip() {
        let mut m = build_regular(7, 3, 0.7, 0.3).unwrap();
        m.apply_passive_regions(&[PassiveRegion {
            region: Region::new(Point2::new(0.0, 0.0), Point2::new(0.2, 0.2)),
            solid: true,
        }]);
        m.boundary[3].pad_excluded = true;
        round_trip(&m);
        round_trip(&m.extend(&ExtensionSpec::for_filter_radius(0.3)).unwrap());
    }

    #[test]
    fn irregular_round_trip() {
        let dom = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
        round_trip(&build_irregular(20, &dom, 3).unwrap());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_mesh("nodes 1 elements 0\n".as_bytes()).is_err());
        assert!(read_mesh("vertices 1\n".as_bytes()).is_err());
        let bad_node = "nodes 3 elements 1\n0 0\n1 0\n0 1\n0 design 0.5 0 1 7\nboundary 0\ndomain 0\nmeta regular 1 none\n";
        assert!(matches!(read_mesh(bad_node.as_bytes()), Err(Error::Parse { line: 5, .. })));
    }
}
