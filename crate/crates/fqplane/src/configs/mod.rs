//! Configuration counting over point sets E ⊆ GF(q)².
//!
//! A configuration graph G on k+1 vertices turns a tuple (x⁰, …, x^k) into
//! the vector of its edge distances ‖xⁱ − xʲ‖, edges listed in dictionary
//! order on (i, j). The counting function ν_G(t) is the number of ordered
//! tuples from E (repetitions allowed) realizing the distance vector t, and
//! Δ_G(E) is its support. Degenerate tuples are counted too; that is why the
//! comparison bounds downstream are inequalities rather than identities.
//!
//! The kernels come in pairs: a brute-force path that enumerates tuples, and
//! a factorized path exploiting graph structure (cut vertices, group
//! actions). The factorized paths are the fast ones; the brute paths are
//! their oracles on small instances.
//!
//! Built-in graphs: `edge` (one edge), `path2` (the 3-vertex tree), and
//! `triangle`, plus two 5-vertex graphs: `bowtie` (two triangles sharing one
//! vertex) and `kite` (two triangles sharing an edge, with one more edge
//! hanging off a vertex not on the shared edge).

mod count;
mod tables;

pub use count::{delta, nu, nu_table, nu_squared_sum};
pub use tables::{
    alpha_hat_check, averaging_bound_check, averaging_bound_exact, cubic_lambda_sum,
    kite_decomposition, kite_totals_by_radius, lambda_hat_check, psi, psi31_radius_split,
    triangle_chain_check, weight_counts, weight_function, AlphaTable, KiteParts, LambdaTable,
};

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::geometry::{Plane, Point};
use crate::spectral::WeightedFunction;

/// Upper bound on support masks: q^edges may not exceed 2³⁵ bits (4 GiB).
pub const MASK_CAP_BITS: u64 = 1 << 35;

/// Upper bound on brute-force tuple enumerations.
pub const BRUTE_CAP_TUPLES: u64 = 100_000_000;

/// A connected graph on k+1 vertices with its edges in dictionary order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    name: String,
}

impl ConfigGraph {
    pub fn new(name: &str, vertices: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices < 2 {
            return Err(Error::BadGraph("need at least two vertices".into()));
        }
        if edges.is_empty() {
            return Err(Error::BadGraph("need at least one edge".into()));
        }
        for &(i, j) in &edges {
            if i >= j {
                return Err(Error::BadGraph(format!(
                    "edge ({i},{j}) must have i < j"
                )));
            }
            if j >= vertices {
                return Err(Error::BadGraph(format!(
                    "edge ({i},{j}) references a vertex >= {vertices}"
                )));
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadGraph("duplicate edge".into()));
        }
        // Connectivity by union-find.
        let mut root: Vec<usize> = (0..vertices).collect();
        fn find(root: &mut [usize], mut v: usize) -> usize {
            while root[v] != v {
                root[v] = root[root[v]];
                v = root[v];
            }
            v
        }
        for &(i, j) in &edges {
            let (ri, rj) = (find(&mut root, i), find(&mut root, j));
            root[ri] = rj;
        }
        let r0 = find(&mut root, 0);
        if (0..vertices).any(|v| find(&mut root, v) != r0) {
            return Err(Error::BadGraph("graph is not connected".into()));
        }
        Ok(ConfigGraph {
            vertices,
            edges,
            name: name.to_string(),
        })
    }

    pub fn edge() -> Self {
        Self::new("edge", 2, vec![(0, 1)]).unwrap()
    }

    /// The 3-vertex tree x⁰ - x¹ - x².
    pub fn path2() -> Self {
        Self::new("path2", 3, vec![(0, 1), (1, 2)]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::new("triangle", 3, vec![(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    /// Triangles {0,1,2} and {0,3,4} sharing the vertex 0.
    pub fn bowtie() -> Self {
        Self::new(
            "bowtie",
            5,
            vec![(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)],
        )
        .unwrap()
    }

    /// Triangles {0,1,3} and {1,3,4} sharing the edge (1,3), plus the
    /// pendant edge (0,2).
    pub fn kite() -> Self {
        Self::new(
            "kite",
            5,
            vec![(0, 1), (0, 2), (0, 3), (1, 3), (1, 4), (3, 4)],
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "edge" => Ok(Self::edge()),
            "path2" => Ok(Self::path2()),
            "triangle" => Ok(Self::triangle()),
            "bowtie" => Ok(Self::bowtie()),
            "kite" => Ok(Self::kite()),
            other => Err(Error::BadGraph(format!(
                "unknown graph '{other}' (built-ins: edge, path2, triangle, bowtie, kite)"
            ))),
        }
    }

    /// Parses the graph file format: a "vertices N" line, then one "i j"
    /// edge per line, 0-based with i < j. Blank lines and '#' comments are
    /// skipped.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let mut vertices: Option<usize> = None;
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if vertices.is_none() {
                let rest = line
                    .strip_prefix("vertices")
                    .ok_or_else(|| Error::BadGraph("first line must be 'vertices N'".into()))?;
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::BadGraph(format!("bad vertex count '{rest}'")))?;
                vertices = Some(n);
                continue;
            }
            let mut it = line.split_whitespace();
            let (i, j) = (it.next(), it.next());
            if it.next().is_some() {
                return Err(Error::BadGraph(format!("bad edge line '{line}'")));
            }
            let parse = |s: Option<&str>| -> Result<usize> {
                s.and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::BadGraph(format!("bad edge line '{line}'")))
            };
            edges.push((parse(i)?, parse(j)?));
        }
        let vertices = vertices.ok_or_else(|| Error::BadGraph("missing 'vertices N' line".into()))?;
        Self::new(name, vertices, edges)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::from_text(&name, &std::fs::read_to_string(path)?)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn is_edge(&self) -> bool {
        self.vertices == 2 && self.edges == [(0, 1)]
    }

    pub(crate) fn is_path2(&self) -> bool {
        self.vertices == 3 && self.edges == [(0, 1), (1, 2)]
    }

    pub(crate) fn is_triangle(&self) -> bool {
        self.vertices == 3 && self.edges == [(0, 1), (0, 2), (1, 2)]
    }

    pub(crate) fn is_bowtie(&self) -> bool {
        self.vertices == 5 && self.edges == [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)]
    }
}

/// A subset of the plane, kept both as a sorted index list and as a bit
/// mask so kernels can pick whichever access pattern they need.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    q: u32,
    members: Vec<u32>,
    bits: Vec<u64>,
}

impl PointSet {
    /// Builds a set from point indices; duplicates collapse.
    pub fn from_indices(plane: &Plane, mut indices: Vec<u32>) -> Result<Self> {
        let n = plane.point_count();
        for &i in &indices {
            if i >= n {
                return Err(Error::CodeOutOfRange {
                    code: i as u64,
                    q: n,
                });
            }
        }
        indices.sort_unstable();
        indices.dedup();
        let mut bits = vec![0u64; n.div_ceil(64) as usize];
        for &i in &indices {
            bits[(i / 64) as usize] |= 1 << (i % 64);
        }
        Ok(PointSet {
            q: plane.q(),
            members: indices,
            bits,
        })
    }

    pub fn from_points(plane: &Plane, points: &[Point]) -> Result<Self> {
        Self::from_indices(plane, points.iter().map(|&p| plane.index(p)).collect())
    }

    pub fn empty(plane: &Plane) -> Self {
        Self::from_indices(plane, Vec::new()).unwrap()
    }

    pub fn full(plane: &Plane) -> Self {
        Self::from_indices(plane, (0..plane.point_count()).collect()).unwrap()
    }

    /// Parses the point file format: one "c1,c2" pair of integer codes per
    /// line; blank lines and '#' comments are skipped.
    pub fn from_text(plane: &Plane, text: &str) -> Result<Self> {
        let mut indices = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::BadPointFile {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let (a, b) = line.split_once(',').ok_or_else(|| err("expected 'c1,c2'"))?;
            let c1: u32 = a.trim().parse().map_err(|_| err("bad first code"))?;
            let c2: u32 = b.trim().parse().map_err(|_| err("bad second code"))?;
            if c1 >= plane.q() || c2 >= plane.q() {
                return Err(err(&format!("code out of range for GF({})", plane.q())));
            }
            indices.push(c1 * plane.q() + c2);
        }
        Self::from_indices(plane, indices)
    }

    pub fn from_path(plane: &Plane, path: &Path) -> Result<Self> {
        Self::from_text(plane, &std::fs::read_to_string(path)?)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sorted point indices.
    #[inline]
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, index: u32) -> bool {
        self.bits
            .get((index / 64) as usize)
            .is_some_and(|w| w >> (index % 64) & 1 == 1)
    }

    /// The indicator as a dense weighted function.
    pub fn weighted(&self, plane: &Plane) -> WeightedFunction {
        WeightedFunction::indicator(plane.point_count() as usize, &self.members)
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }

    /// The image θ·E + s, same cardinality.
    pub fn transformed(&self, plane: &Plane, theta: usize, shift: u32) -> PointSet {
        let moved = self
            .members
            .iter()
            .map(|&i| plane.sum_idx(plane.apply_idx(theta, i), shift))
            .collect();
        PointSet::from_indices(plane, moved).unwrap()
    }
}

/// A distance vector t, one scalar per graph edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceVector {
    entries: Vec<Scalar>,
}

impl DistanceVector {
    pub fn new(entries: Vec<Scalar>) -> Self {
        DistanceVector { entries }
    }

    pub fn from_codes(field: &Field, codes: &[u32]) -> Result<Self> {
        Ok(DistanceVector {
            entries: codes
                .iter()
                .map(|&c| field.scalar(c))
                .collect::<Result<_>>()?,
        })
    }

    #[inline]
    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dictionary linear index: the first entry is the most significant
    /// base-q digit.
    pub fn index(&self, q: u32) -> u128 {
        self.entries
            .iter()
            .fold(0u128, |acc, s| acc * q as u128 + s.code() as u128)
    }

    pub fn from_index(field: &Field, len: usize, mut index: u128) -> Result<Self> {
        let q = field.q() as u128;
        let mut codes = vec![0u32; len];
        for slot in codes.iter_mut().rev() {
            *slot = (index % q) as u32;
            index /= q;
        }
        if index != 0 {
            return Err(Error::CodeOutOfRange {
                code: u64::MAX,
                q: field.q(),
            });
        }
        Self::from_codes(field, &codes)
    }
}

impl std::fmt::Display for DistanceVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let codes: Vec<String> = self.entries.iter().map(|s| s.code().to_string()).collect();
        write!(f, "({})", codes.join(","))
    }
}

/// The support Δ_G(E) as a q^edges-bit mask with its cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaSet {
    q: u32,
    edge_count: usize,
    bits: Vec<u64>,
    count: u64,
}

impl DeltaSet {
    pub(crate) fn empty(q: u32, edge_count: usize) -> Result<Self> {
        let capacity = (q as u128).pow(edge_count as u32);
        if capacity > MASK_CAP_BITS as u128 {
            return Err(Error::SizeOverflow {
                bits: capacity,
                cap: MASK_CAP_BITS,
            });
        }
        let words = (capacity as u64).div_ceil(64) as usize;
        Ok(DeltaSet {
            q,
            edge_count,
            bits: vec![0u64; words],
            count: 0,
        })
    }

    #[inline]
    pub(crate) fn insert(&mut self, index: u128) {
        let word = &mut self.bits[(index / 64) as usize];
        let mask = 1u64 << (index % 64);
        if *word & mask == 0 {
            *word |= mask;
            self.count += 1;
        }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Total index space q^edges.
    pub fn capacity(&self) -> u128 {
        (self.q as u128).pow(self.edge_count as u32)
    }

    pub fn contains(&self, t: &DistanceVector) -> bool {
        self.contains_index(t.index(self.q))
    }

    #[inline]
    pub fn contains_index(&self, index: u128) -> bool {
        self.bits[(index / 64) as usize] >> (index % 64) & 1 == 1
    }

    pub fn is_subset_of(&self, other: &DeltaSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }

    /// Realized indices, ascending. Only sensible for small capacities.
    pub fn indices(&self) -> Vec<u128> {
        let mut out = Vec::with_capacity(self.count as usize);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros();
                out.push(w as u128 * 64 + b as u128);
                word &= word - 1;
            }
        }
        out
    }

    /// The realized distance vectors as a sorted set, for small capacities.
    pub fn vectors(&self, field: &Field) -> Result<BTreeSet<Vec<u32>>> {
        let mut out = BTreeSet::new();
        for i in self.indices() {
            let t = DistanceVector::from_index(field, self.edge_count, i)?;
            out.insert(t.entries().iter().map(|s| s.code()).collect());
        }
        Ok(out)
    }

    /// Raw mask words, little-endian bit order (bit i of the set lives at
    /// word i/64, bit position i%64).
    pub fn mask_words(&self) -> &[u64] {
        &self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(p: u64, n: u32) -> Plane {
        Plane::new(Field::new(p, n).unwrap()).unwrap()
    }

    #[test]
    fn builtin_graphs_are_well_formed() {
        for g in [
            ConfigGraph::edge(),
            ConfigGraph::path2(),
            ConfigGraph::triangle(),
            ConfigGraph::bowtie(),
            ConfigGraph::kite(),
        ] {
            assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(ConfigGraph::by_name(g.name()).unwrap(), g);
        }
        assert_eq!(ConfigGraph::bowtie().edge_count(), 6);
        assert_eq!(ConfigGraph::kite().edge_count(), 6);
        assert!(ConfigGraph::by_name("hexagon").is_err());
        assert!(ConfigGraph::triangle().is_triangle());
        assert!(!ConfigGraph::kite().is_bowtie());
    }

    #[test]
    fn graph_parser_accepts_the_documented_format() {
        let text = "# a 4-cycle\nvertices 4\n0 1\n1 2\n2 3\n\n0 3\n";
        let g = ConfigGraph::from_text("cycle4", text).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(g.name(), "cycle4");
    }

    #[test]
    fn graph_parser_rejects_malformed_input() {
        let cases = [
            ("0 1\n", "missing header"),
            ("vertices 3\n1 0\n", "i >= j"),
            ("vertices 3\n0 1\n0 1\n", "duplicate"),
            ("vertices 3\n0 5\n", "out of range"),
            ("vertices 4\n0 1\n2 3\n", "disconnected"),
            ("vertices 2\n0 1 2\n", "extra field"),
            ("vertices x\n0 1\n", "bad count"),
            ("vertices 3\n", "no edges"),
            ("vertices 1\n", "too few vertices"),
        ];
        for (text, why) in cases {
            assert!(
                matches!(ConfigGraph::from_text("bad", text), Err(Error::BadGraph(_))),
                "{why}"
            );
        }
    }

    #[test]
    fn point_set_basics() {
        let pl = plane(3, 1);
        let e = PointSet::from_indices(&pl, vec![3, 0, 1, 3]).unwrap();
        assert_eq!(e.members(), &[0, 1, 3]);
        assert_eq!(e.len(), 3);
        assert!(e.contains(3) && !e.contains(2));
        assert!(e.is_subset_of(&PointSet::full(&pl)));
        assert!(!PointSet::full(&pl).is_subset_of(&e));
        assert!(PointSet::empty(&pl).is_empty());
        assert!(PointSet::from_indices(&pl, vec![9]).is_err());
        let w = e.weighted(&pl);
        assert_eq!(w.sum().re, 3.0);
    }

    #[test]
    fn point_parser_accepts_the_documented_format() {
        let pl = plane(3, 1);
        let text = "# three points\n0,0\n 1 , 0 \n\n0,1\n";
        let e = PointSet::from_text(&pl, text).unwrap();
        assert_eq!(e.members(), &[0, 1, 3]);
    }

    #[test]
    fn point_parser_reports_line_numbers() {
        let pl = plane(3, 1);
        for (text, line) in [
            ("0,0\n1;0\n", 2),
            ("0,0\n\n9,0\n", 3),
            ("x,0\n", 1),
            ("0,x\n", 1),
        ] {
            match PointSet::from_text(&pl, text) {
                Err(Error::BadPointFile { line: l, .. }) => assert_eq!(l, line),
                other => panic!("expected BadPointFile, got {other:?}"),
            }
        }
    }

    #[test]
    fn distance_vector_indexing_round_trips() {
        let f = Field::new(7, 1).unwrap();
        let t = DistanceVector::from_codes(&f, &[1, 0, 6]).unwrap();
        assert_eq!(t.index(7), ((1 * 7) + 0) as u128 * 7 + 6);
        let back = DistanceVector::from_index(&f, 3, t.index(7)).unwrap();
        assert_eq!(back, t);
        assert_eq!(format!("{t}"), "(1,0,6)");
        assert!(DistanceVector::from_index(&f, 2, 49).is_err());
    }

    #[test]
    fn delta_set_mask_semantics() {
        let mut d = DeltaSet::empty(3, 2).unwrap();
        assert_eq!(d.capacity(), 9);
        d.insert(0);
        d.insert(8);
        d.insert(8);
        assert_eq!(d.len(), 2);
        assert!(d.contains_index(8) && !d.contains_index(4));
        assert_eq!(d.indices(), vec![0, 8]);
        let f = Field::new(3, 1).unwrap();
        let vecs = d.vectors(&f).unwrap();
        assert!(vecs.contains(&vec![0, 0]) && vecs.contains(&vec![2, 2]));
        // 27^8 bits is past the 2^35 cap.
        assert!(matches!(
            DeltaSet::empty(27, 8),
            Err(Error::SizeOverflow { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn any_vector_survives_the_index_round_trip(
                codes in proptest::collection::vec(0u32..7, 1..6)
            ) {
                let f = Field::new(7, 1).unwrap();
                let t = DistanceVector::from_codes(&f, &codes).unwrap();
                let back = DistanceVector::from_index(&f, codes.len(), t.index(7)).unwrap();
                prop_assert_eq!(back, t);
            }

            #[test]
            fn set_construction_sorts_and_dedups(
                mut indices in proptest::collection::vec(0u32..49, 0..40)
            ) {
                let plane = Plane::new(Field::new(7, 1).unwrap()).unwrap();
                let set = PointSet::from_indices(&plane, indices.clone()).unwrap();
                indices.sort_unstable();
                indices.dedup();
                prop_assert_eq!(set.members(), &indices[..]);
                prop_assert!(indices.iter().all(|&i| set.contains(i)));
                prop_assert_eq!(set.weighted(&plane).sum().re, indices.len() as f64);
            }
        }
    }
}
