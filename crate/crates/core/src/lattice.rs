//! Discrete tori `(Z/L_1) x ... x (Z/L_d)` with nearest-neighbour edges.
//!
//! Vertices are indexed row-major with axis 1 fastest, so the vertex with
//! coordinates `(c_1, ..., c_d)` has index `c_1 + L_1 (c_2 + L_2 (c_3 + ...))`
//! and the origin is index 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Even or odd sublattice, by parity of the coordinate sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Serializable lattice description embedded in every result file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    pub sides: Vec<usize>,
}

/// An edge stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            Edge { lo: a, hi: b }
        } else {
            Edge { lo: b, hi: a }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusLattice {
    sides: Vec<usize>,
    strides: Vec<usize>,
    vertex_count: usize,
    /// `neighbors[v][2i]` is `v + e_{i+1}`, `neighbors[v][2i+1]` is `v - e_{i+1}`.
    neighbors: Vec<Vec<usize>>,
    /// Distinct neighbours in ascending index order (simple graph).
    adjacency: Vec<Vec<usize>>,
    degenerate: bool,
}

impl TorusLattice {
    /// Builds the torus with the given side lengths. Every side must be even
    /// and at least 2.
    pub fn new(sides: &[usize]) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        for &s in sides {
            if s < 2 {
                return Err(Error::InvalidLattice(format!("side length {s} is below 2")));
            }
            if s % 2 != 0 {
                return Err(Error::InvalidLattice(format!(
                    "side length {s} is odd; the torus would not be bipartite"
                )));
            }
        }
        let d = sides.len();
        let mut strides = Vec::with_capacity(d);
        let mut acc = 1usize;
        for &s in sides {
            strides.push(acc);
            acc = acc
                .checked_mul(s)
                .ok_or_else(|| Error::InvalidLattice("vertex count overflows".into()))?;
        }
        let vertex_count = acc;
        let mut lat = TorusLattice {
            sides: sides.to_vec(),
            strides,
            vertex_count,
            neighbors: Vec::new(),
            adjacency: Vec::new(),
            degenerate: sides.iter().any(|&s| s == 2),
        };
        let mut neighbors = Vec::with_capacity(vertex_count);
        let mut adjacency = Vec::with_capacity(vertex_count);
        for v in 0..vertex_count {
            let mut nb = Vec::with_capacity(2 * d);
            for axis in 0..d {
                nb.push(lat.shift(v, axis, 1));
                nb.push(lat.shift(v, axis, -1));
            }
            let mut adj = nb.clone();
            adj.sort_unstable();
            adj.dedup();
            neighbors.push(nb);
            adjacency.push(adj);
        }
        lat.neighbors = neighbors;
        lat.adjacency = adjacency;
        Ok(lat)
    }

    /// Cubic torus `T_L` in `d` dimensions.
    pub fn cubic(d: usize, side: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        Self::new(&vec![side; d])
    }

    pub fn from_spec(spec: &LatticeSpec) -> Result<Self> {
        if spec.sides.len() != spec.d {
            return Err(Error::InvalidLattice(format!(
                "d = {} but {} side lengths given",
                spec.d,
                spec.sides.len()
            )));
        }
        Self::new(&spec.sides)
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec {
            d: self.dim(),
            sides: self.sides.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> usize {
        self.sides[axis]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// True when some side equals 2, so that `+e_i` and `-e_i` coincide.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_cubic(&self) -> bool {
        self.sides.windows(2).all(|w| w[0] == w[1])
    }

    pub fn origin(&self) -> usize {
        0
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        self.sides
            .iter()
            .zip(&self.strides)
            .map(|(&s, &st)| (v / st) % s)
            .collect()
    }

    pub fn coord(&self, v: usize, axis: usize) -> usize {
        (v / self.strides[axis]) % self.sides[axis]
    }

    /// Index of the vertex with the given coordinates, each reduced mod its side.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        assert_eq!(coords.len(), self.dim(), "coordinate arity mismatch");
        coords
            .iter()
            .zip(self.sides.iter().zip(&self.strides))
            .map(|(&c, (&s, &st))| (c.rem_euclid(s as i64) as usize) * st)
            .sum()
    }

    /// `v + step * e_{axis+1}` with periodic wraparound.
    pub fn shift(&self, v: usize, axis: usize, step: i64) -> usize {
        let s = self.sides[axis] as i64;
        let c = self.coord(v, axis) as i64;
        let nc = (c + step).rem_euclid(s) as usize;
        v - (c as usize) * self.strides[axis] + nc * self.strides[axis]
    }

    /// Neighbours indexed by signed direction: slot `2i` is `+e_{i+1}`, `2i+1`
    /// is `-e_{i+1}`. For a side of length 2 both slots hold the same vertex.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Distinct neighbours of `v` in ascending order.
    pub fn adjacent(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.vertex_count {
            for &u in &self.adjacency[v] {
                if v < u {
                    out.push(Edge::new(v, u));
                }
            }
        }
        out
    }

    pub fn parity(&self, v: usize) -> Parity {
        let sum: usize = self.coords(v).iter().sum();
        if sum % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// `V^e` or `V^o` in ascending index order.
    pub fn sublattice(&self, parity: Parity) -> Vec<usize> {
        (0..self.vertex_count)
            .filter(|&v| self.parity(v) == parity)
            .collect()
    }

    /// The vertex `n e_i` for the 1-based axis `i`.
    pub fn axis_point(&self, n: i64, axis: usize) -> Result<usize> {
        if axis == 0 || axis > self.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} outside 1..={}",
                self.dim()
            )));
        }
        Ok(self.shift(0, axis - 1, n))
    }

    /// Torus l1 distance between two vertices.
    pub fn l1_distance(&self, a: usize, b: usize) -> usize {
        (0..self.dim())
            .map(|axis| {
                let s = self.sides[axis];
                let da = self.coord(a, axis);
                let db = self.coord(b, axis);
                let diff = da.abs_diff(db);
                diff.min(s - diff)
            })
            .sum()
    }

    pub fn l1_norm(&self, v: usize) -> usize {
        self.l1_distance(0, v)
    }

    /// `a + b` as lattice vectors.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut v = 0;
        for axis in 0..self.dim() {
            let s = self.sides[axis];
            v += ((self.coord(a, axis) + self.coord(b, axis)) % s) * self.strides[axis];
        }
        v
    }

    /// `a - b` as lattice vectors.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        let mut v = 0;
        for axis in 0..self.dim() {
            let s = self.sides[axis];
            v += ((self.coord(a, axis) + s - self.coord(b, axis)) % s) * self.strides[axis];
        }
        v
    }

    /// `-v` as a lattice vector.
    pub fn negate(&self, v: usize) -> usize {
        self.sub(0, v)
    }

    /// The torus symmetries fixing the origin: signed axis permutations that
    /// map the side lengths onto themselves.
    pub fn point_group(&self) -> Vec<PointSymmetry> {
        let d = self.dim();
        let mut perms = Vec::new();
        permutations(d, &mut Vec::new(), &mut vec![false; d], &mut perms);
        let mut out = Vec::new();
        for perm in perms {
            if (0..d).any(|i| self.sides[perm[i]] != self.sides[i]) {
                continue;
            }
            for signs in 0..(1u32 << d) {
                let flips: Vec<bool> = (0..d).map(|i| signs & (1 << i) != 0).collect();
                out.push(PointSymmetry {
                    perm: perm.clone(),
                    flips,
                });
            }
        }
        out
    }

    /// Image of `v` under a point symmetry.
    pub fn apply_point(&self, g: &PointSymmetry, v: usize) -> usize {
        let c = self.coords(v);
        let mut out = 0;
        for i in 0..self.dim() {
            // new coordinate on axis i comes from old axis perm[i]
            let s = self.sides[i];
            let mut x = c[g.perm[i]] % s;
            if g.flips[i] {
                x = (s - x) % s;
            }
            out += x * self.strides[i];
        }
        out
    }

    /// Breadth-first graph distances from `source`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Parses `"1,0;0,1"` style coordinate lists into vertex indices.
    pub fn parse_vertices(&self, text: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for chunk in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            out.push(self.parse_vertex(chunk)?);
        }
        Ok(out)
    }

    pub fn parse_vertex(&self, text: &str) -> Result<usize> {
        let coords: std::result::Result<Vec<i64>, _> =
            text.split(',').map(|c| c.trim().parse::<i64>()).collect();
        let coords =
            coords.map_err(|e| Error::InvalidArgument(format!("bad vertex {text:?}: {e}")))?;
        if coords.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "vertex {text:?} has {} coordinates, lattice has dimension {}",
                coords.len(),
                self.dim()
            )));
        }
        Ok(self.index_of(&coords))
    }

    pub fn format_vertex(&self, v: usize) -> String {
        self.coords(v)
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A signed permutation of the axes: new axis `i` takes the old axis
/// `perm[i]`, negated when `flips[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSymmetry {
    pub perm: Vec<usize>,
    pub flips: Vec<bool>,
}

fn permutations(d: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if cur.len() == d {
        out.push(cur.clone());
        return;
    }
    for i in 0..d {
        if !used[i] {
            used[i] = true;
            cur.push(i);
            permutations(d, cur, used, out);
            cur.pop();
            used[i] = false;
        }
    }
}
