//! Collocated finite-difference grids on unions of axis-aligned boxes.
//!
//! The domain is rasterized into lattice cells of side `h`; nodes are the
//! corners of in-domain cells. Fields are stored node-major: a matrix field
//! occupies `9·node + 3·i + j`, a vector field `3·node + i`.
//!
//! First derivatives use the centered difference where the lattice edges on
//! both sides lie in the domain and the one-sided second-order formula
//! `(-3 f₀ + 4 f₁ - f₂) / 2h` otherwise. Both differentiate quadratics
//! exactly, so the affine kernel fields are annihilated to roundoff.
//!
//! Should the collocated stencil ever produce spurious near-kernel modes
//! (detected by the spectral gap test in [`crate::korn`]), the fallback is a
//! staggered (edge/face) placement of the nine components; none was observed
//! on the preset domains.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::Aabb;
use crate::poly_fields::PolyMat3;
use crate::scalar::{Field, Rational};
use crate::sparse::SparseOp;
use crate::tensor::Mat3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("spacing must be positive")]
    NonPositiveSpacing,
    #[error("no boxes given")]
    Empty,
    #[error("box corner {0} is not an integer multiple of h")]
    NotAligned(String),
    #[error("the union of boxes is not connected")]
    Disconnected,
    #[error("unknown face '{0}' (expected x-, x+, y-, y+, z-, z+)")]
    UnknownFace(String),
    #[error("unknown domain preset '{0}' (expected cube, lshape, slab)")]
    UnknownPreset(String),
}

/// A boundary face direction `±e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub axis: usize,
    pub outward_positive: bool,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: 0, outward_positive: false },
        Face { axis: 0, outward_positive: true },
        Face { axis: 1, outward_positive: false },
        Face { axis: 1, outward_positive: true },
        Face { axis: 2, outward_positive: false },
        Face { axis: 2, outward_positive: true },
    ];

    pub fn normal(&self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis] = if self.outward_positive { 1.0 } else { -1.0 };
        n
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", ["x", "y", "z"][self.axis], if self.outward_positive { '+' } else { '-' })
    }
}

impl FromStr for Face {
    type Err = GridError;
    fn from_str(s: &str) -> Result<Self, GridError> {
        let t = s.trim();
        Face::ALL.into_iter().find(|f| f.to_string() == t).ok_or_else(|| GridError::UnknownFace(t.to_string()))
    }
}

/// Which boundary faces carry the tangential condition `P × ν = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaSpec {
    None,
    All,
    /// All boundary faces whose outward normal is one of the listed directions.
    Faces(Vec<Face>),
}

impl GammaSpec {
    fn selects(&self, face: Face) -> bool {
        match self {
            GammaSpec::None => false,
            GammaSpec::All => true,
            GammaSpec::Faces(list) => list.contains(&face),
        }
    }
}

/// Named domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `[0,1]³`.
    Cube,
    /// `[0,2]×[0,1]×[0,1] ∪ [0,1]×[1,2]×[0,1]`, with one reentrant edge.
    LShape,
    /// `[0,2]×[0,1]×[0,1]`.
    Slab,
}

impl Preset {
    pub fn boxes(self) -> Vec<Aabb> {
        match self {
            Preset::Cube => vec![Aabb::unit_cube()],
            Preset::LShape => vec![Aabb::from_ints([0, 0, 0], [2, 1, 1]), Aabb::from_ints([0, 1, 0], [1, 2, 1])],
            Preset::Slab => vec![Aabb::from_ints([0, 0, 0], [2, 1, 1])],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Cube => "cube",
            Preset::LShape => "lshape",
            Preset::Slab => "slab",
        }
    }
}

impl FromStr for Preset {
    type Err = GridError;
    fn from_str(s: &str) -> Result<Self, GridError> {
        match s.trim() {
            "cube" => Ok(Preset::Cube),
            "lshape" => Ok(Preset::LShape),
            "slab" => Ok(Preset::Slab),
            other => Err(GridError::UnknownPreset(other.to_string())),
        }
    }
}

/// One-dimensional difference stencil at a node: `(offset, weight·h)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stencil {
    Centered,
    Forward,
    Backward,
    /// Only one lattice edge is available (a box one cell thick).
    ForwardFirstOrder,
    BackwardFirstOrder,
}

impl Stencil {
    fn taps(self) -> [(i64, f64); 3] {
        match self {
            Stencil::Centered => [(-1, -0.5), (0, 0.0), (1, 0.5)],
            Stencil::Forward => [(0, -1.5), (1, 2.0), (2, -0.5)],
            Stencil::Backward => [(0, 1.5), (-1, -2.0), (-2, 0.5)],
            Stencil::ForwardFirstOrder => [(0, -1.0), (1, 1.0), (0, 0.0)],
            Stencil::BackwardFirstOrder => [(0, 1.0), (-1, -1.0), (0, 0.0)],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    boxes: Vec<Aabb>,
    h: Rational,
    hf: f64,
    /// Lattice index of the lowest corner of the bounding box.
    origin: [i64; 3],
    /// Cells of the bounding box per axis.
    cells: [usize; 3],
    cell_in: Vec<bool>,
    nodes: Vec<[i64; 3]>,
    index: HashMap<[i64; 3], usize>,
    faces: Vec<Vec<Face>>,
    gamma: Vec<Vec<Face>>,
    stencils: Vec<[Stencil; 3]>,
}

impl Grid {
    pub fn build(boxes: &[Aabb], h: &Rational, gamma: &GammaSpec) -> Result<Self, GridError> {
        if !(h > &Rational::zero()) {
            return Err(GridError::NonPositiveSpacing);
        }
        if boxes.is_empty() {
            return Err(GridError::Empty);
        }
        let lattice = |x: &Rational| -> Result<i64, GridError> {
            let q = x / h;
            if q.is_integer() {
                q.to_integer().to_i64().ok_or_else(|| GridError::NotAligned(x.to_string()))
            } else {
                Err(GridError::NotAligned(x.to_string()))
            }
        };
        let mut lat_boxes = Vec::with_capacity(boxes.len());
        for b in boxes {
            let lo: [i64; 3] = [lattice(&b.lo[0])?, lattice(&b.lo[1])?, lattice(&b.lo[2])?];
            let hi: [i64; 3] = [lattice(&b.hi[0])?, lattice(&b.hi[1])?, lattice(&b.hi[2])?];
            lat_boxes.push((lo, hi));
        }
        let origin: [i64; 3] = std::array::from_fn(|k| lat_boxes.iter().map(|b| b.0[k]).min().unwrap());
        let top: [i64; 3] = std::array::from_fn(|k| lat_boxes.iter().map(|b| b.1[k]).max().unwrap());
        let cells: [usize; 3] = std::array::from_fn(|k| (top[k] - origin[k]) as usize);

        let mut cell_in = vec![false; cells[0] * cells[1] * cells[2]];
        for (lo, hi) in &lat_boxes {
            for i in lo[0]..hi[0] {
                for j in lo[1]..hi[1] {
                    for k in lo[2]..hi[2] {
                        let c = [i - origin[0], j - origin[1], k - origin[2]];
                        cell_in[((c[0] as usize) * cells[1] + c[1] as usize) * cells[2] + c[2] as usize] = true;
                    }
                }
            }
        }

        let mut grid = Grid {
            boxes: boxes.to_vec(),
            h: h.clone(),
            hf: Field::to_f64(h),
            origin,
            cells,
            cell_in,
            nodes: Vec::new(),
            index: HashMap::new(),
            faces: Vec::new(),
            gamma: Vec::new(),
            stencils: Vec::new(),
        };
        if !grid.cells_connected() {
            return Err(GridError::Disconnected);
        }
        grid.enumerate_nodes();
        grid.classify(gamma);
        grid.choose_stencils();
        Ok(grid)
    }

    pub fn preset(p: Preset, h: &Rational, gamma: &GammaSpec) -> Result<Self, GridError> {
        Self::build(&p.boxes(), h, gamma)
    }

    fn cell(&self, c: [i64; 3]) -> bool {
        let mut idx = 0usize;
        for k in 0..3 {
            let r = c[k] - self.origin[k];
            if r < 0 || r >= self.cells[k] as i64 {
                return false;
            }
            idx = idx * self.cells[k] + r as usize;
        }
        self.cell_in[idx]
    }

    fn cells_connected(&self) -> bool {
        let all: Vec<[i64; 3]> = (0..self.cells[0] as i64)
            .flat_map(|i| (0..self.cells[1] as i64).flat_map(move |j| (0..self.cells[2] as i64).map(move |k| [i, j, k])))
            .map(|c| [c[0] + self.origin[0], c[1] + self.origin[1], c[2] + self.origin[2]])
            .filter(|&c| self.cell(c))
            .collect();
        let Some(&start) = all.first() else { return false };
        let mut seen = std::collections::HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for k in 0..3 {
                for d in [-1, 1] {
                    let mut n = c;
                    n[k] += d;
                    if self.cell(n) && seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        seen.len() == all.len()
    }

    /// The 8 cells touching lattice point `p`.
    fn cells_around(&self, p: [i64; 3]) -> impl Iterator<Item = bool> + '_ {
        (0..8).map(move |m| self.cell([p[0] - 1 + (m & 1), p[1] - 1 + ((m >> 1) & 1), p[2] - 1 + ((m >> 2) & 1)]))
    }

    fn enumerate_nodes(&mut self) {
        for i in 0..=self.cells[0] as i64 {
            for j in 0..=self.cells[1] as i64 {
                for k in 0..=self.cells[2] as i64 {
                    let p = [i + self.origin[0], j + self.origin[1], k + self.origin[2]];
                    if self.cells_around(p).any(|b| b) {
                        self.index.insert(p, self.nodes.len());
                        self.nodes.push(p);
                    }
                }
            }
        }
    }

    fn classify(&mut self, gamma: &GammaSpec) {
        let mut faces = Vec::with_capacity(self.nodes.len());
        for &p in &self.nodes {
            let mut here = Vec::new();
            for face in Face::ALL {
                let k = face.axis;
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                // the four cell faces in the plane x_k = p_k that touch p
                let found = (0..4).any(|m| {
                    let mut inner = p;
                    inner[a] -= 1 - (m & 1);
                    inner[b] -= 1 - ((m >> 1) & 1);
                    let mut outer = inner;
                    if face.outward_positive {
                        inner[k] -= 1;
                    } else {
                        outer[k] -= 1;
                    }
                    self.cell(inner) && !self.cell(outer)
                });
                if found {
                    here.push(face);
                }
            }
            faces.push(here);
        }
        self.gamma = faces.iter().map(|f| f.iter().copied().filter(|&x| gamma.selects(x)).collect()).collect();
        self.faces = faces;
    }

    /// Whether the lattice edge from `p` to `p + e_k` lies in the closed domain.
    fn edge(&self, p: [i64; 3], k: usize) -> bool {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        (0..4).any(|m| {
            let mut c = p;
            c[a] -= 1 - (m & 1);
            c[b] -= 1 - ((m >> 1) & 1);
            self.cell(c)
        })
    }

    fn choose_stencils(&mut self) {
        let mut stencils = Vec::with_capacity(self.nodes.len());
        for &p in &self.nodes {
            let mut s = [Stencil::Centered; 3];
            for (k, sk) in s.iter_mut().enumerate() {
                let step = |q: [i64; 3], d: i64| {
                    let mut r = q;
                    r[k] += d;
                    r
                };
                let fwd = self.edge(p, k);
                let bwd = self.edge(step(p, -1), k);
                *sk = if fwd && bwd {
                    Stencil::Centered
                } else if fwd && self.edge(step(p, 1), k) {
                    Stencil::Forward
                } else if bwd && self.edge(step(p, -2), k) {
                    Stencil::Backward
                } else if fwd {
                    Stencil::ForwardFirstOrder
                } else {
                    Stencil::BackwardFirstOrder
                };
            }
            stencils.push(s);
        }
        self.stencils = stencils;
    }

    /// Whether every node has a second-order stencil on every axis, i.e. the
    /// domain is at least two cells thick everywhere.
    pub fn second_order(&self) -> bool {
        self.stencils
            .iter()
            .flatten()
            .all(|s| !matches!(s, Stencil::ForwardFirstOrder | Stencil::BackwardFirstOrder))
    }

    pub fn boxes(&self) -> &[Aabb] {
        &self.boxes
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    pub fn h_f64(&self) -> f64 {
        self.hf
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Integer lattice coordinates; the position is `h` times these.
    pub fn lattice_point(&self, n: usize) -> [i64; 3] {
        self.nodes[n]
    }

    pub fn node_at(&self, p: [i64; 3]) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn position(&self, n: usize) -> [Rational; 3] {
        self.nodes[n].map(|c| Rational::from_integer(c.into()) * &self.h)
    }

    pub fn position_f64(&self, n: usize) -> [f64; 3] {
        self.nodes[n].map(|c| c as f64 * self.hf)
    }

    /// Outward boundary normals at node `n` (empty for interior nodes).
    pub fn boundary_faces(&self, n: usize) -> &[Face] {
        &self.faces[n]
    }

    /// Boundary normals at `n` on which the tangential condition is imposed.
    pub fn gamma_faces(&self, n: usize) -> &[Face] {
        &self.gamma[n]
    }

    pub fn is_boundary(&self, n: usize) -> bool {
        !self.faces[n].is_empty()
    }

    /// Number of in-domain cells among the 8 touching node `n`.
    pub fn cell_count(&self, n: usize) -> usize {
        self.cells_around(self.nodes[n]).filter(|&b| b).count()
    }

    pub fn has_gamma(&self) -> bool {
        self.gamma.iter().any(|g| !g.is_empty())
    }

    /// `∂_k` as an `N × N` operator on nodal scalars.
    pub fn derivative_op(&self, k: usize) -> SparseOp {
        let inv_h = 1.0 / self.hf;
        let mut trips = Vec::with_capacity(3 * self.nodes.len());
        for (n, &p) in self.nodes.iter().enumerate() {
            for (off, w) in self.stencils[n][k].taps() {
                if w != 0.0 {
                    let mut q = p;
                    q[k] += off;
                    trips.push((n, self.index[&q], w * inv_h));
                }
            }
        }
        SparseOp::from_triplets(self.nodes.len(), self.nodes.len(), &trips).expect("stencil nodes exist")
    }

    fn derivative_taps(&self) -> [SparseOp; 3] {
        std::array::from_fn(|k| self.derivative_op(k))
    }

    /// `(D u)_ij = ∂_j u_i`, from vector fields (`3N`) to matrix fields (`9N`).
    pub fn gradient_op(&self) -> SparseOp {
        let d = self.derivative_taps();
        let mut trips = Vec::new();
        for (j, dj) in d.iter().enumerate() {
            for (n, m, v) in dj.triplets() {
                for i in 0..3 {
                    trips.push((9 * n + 3 * i + j, 3 * m + i, v));
                }
            }
        }
        SparseOp::from_triplets(9 * self.num_nodes(), 3 * self.num_nodes(), &trips).expect("in bounds")
    }

    /// Row-wise matrix Curl, `(Curl P)_ij = ε_jlk ∂_l P_ik`, on `9N`.
    pub fn curl_op(&self) -> SparseOp {
        let d = self.derivative_taps();
        let mut trips = Vec::new();
        for j in 0..3 {
            let (l1, k1) = ((j + 1) % 3, (j + 2) % 3);
            // ε_{j l1 k1} = +1, ε_{j k1 l1} = -1
            for (l, k, sign) in [(l1, k1, 1.0), (k1, l1, -1.0)] {
                for (n, m, v) in d[l].triplets() {
                    for i in 0..3 {
                        trips.push((9 * n + 3 * i + j, 9 * m + 3 * i + k, sign * v));
                    }
                }
            }
        }
        SparseOp::from_triplets(9 * self.num_nodes(), 9 * self.num_nodes(), &trips).expect("in bounds")
    }

    /// Block-diagonal application of a pointwise linear map on `Mat3`.
    pub fn pointwise_op(&self, kind: Pointwise) -> SparseOp {
        let block = kind.block();
        let mut trips = Vec::new();
        for n in 0..self.num_nodes() {
            for (r, row) in block.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        trips.push((9 * n + r, 9 * n + c, v));
                    }
                }
            }
        }
        SparseOp::from_triplets(9 * self.num_nodes(), 9 * self.num_nodes(), &trips).expect("in bounds")
    }

    /// Flat indices of matrix entries left free by the tangential condition.
    ///
    /// `P × e_k = P·Anti(e_k)` has columns `P e_{k+2}`, `-P e_{k+1}` (cyclic)
    /// and zero in column `k`, so `P × e_k = 0` exactly zeroes the two
    /// tangential columns of `P`. Constraints from several faces accumulate.
    pub fn active_dofs(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(9 * self.num_nodes());
        for n in 0..self.num_nodes() {
            let mut col_free = [true; 3];
            for f in &self.gamma[n] {
                for (j, free) in col_free.iter_mut().enumerate() {
                    if j != f.axis {
                        *free = false;
                    }
                }
            }
            for i in 0..3 {
                for (j, &free) in col_free.iter().enumerate() {
                    if free {
                        out.push(9 * n + 3 * i + j);
                    }
                }
            }
        }
        out
    }

    /// Diagonal 0/1 projector onto [`Grid::active_dofs`].
    pub fn bc_mask(&self) -> SparseOp {
        let mut d = vec![0.0; 9 * self.num_nodes()];
        for i in self.active_dofs() {
            d[i] = 1.0;
        }
        SparseOp::diag(&d)
    }

    /// Trapezoid weights `h³ · (in-domain cells at the node) / 8`.
    pub fn node_weights(&self) -> Vec<f64> {
        let h3 = self.hf * self.hf * self.hf;
        (0..self.num_nodes()).map(|n| h3 * self.cell_count(n) as f64 / 8.0).collect()
    }

    /// Mass matrix on `block·N` dofs (block = 1, 3 or 9 components per node).
    pub fn mass(&self, block: usize) -> SparseOp {
        let w = self.node_weights();
        SparseOp::diag(&w.iter().flat_map(|&x| std::iter::repeat_n(x, block)).collect::<Vec<_>>())
    }

    /// Exact evaluation at the nodes, rounded once to `f64`.
    pub fn sample(&self, f: &PolyMat3) -> FieldMat3 {
        let mut values = Vec::with_capacity(9 * self.num_nodes());
        for n in 0..self.num_nodes() {
            let x = self.position(n);
            for i in 0..3 {
                for j in 0..3 {
                    values.push(Field::to_f64(&f[(i, j)].eval(&x)));
                }
            }
        }
        FieldMat3 { values }
    }

    /// Short descriptor such as `cube` or `boxes[2]`.
    pub fn describe(&self) -> String {
        for p in [Preset::Cube, Preset::LShape, Preset::Slab] {
            if p.boxes() == self.boxes {
                return p.name().to_string();
            }
        }
        format!("boxes[{}]", self.boxes.len())
    }
}

/// Pointwise projections of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pointwise {
    Dev,
    Sym,
    Skew,
    DevSym,
    /// `skew P + ⅓ tr P · id`, the complement of `dev sym`.
    SkewPlusThirdTrace,
    /// `⅓ tr P · id`.
    Spherical,
}

impl Pointwise {
    /// The map as a 9×9 matrix on row-major entries.
    pub fn block(self) -> [[f64; 9]; 9] {
        let mut b = [[0.0; 9]; 9];
        for c in 0..9 {
            let mut e = Mat3::<f64>::zero();
            e[(c / 3, c % 3)] = 1.0;
            let img = self.apply(&e);
            for r in 0..9 {
                b[r][c] = img[(r / 3, r % 3)];
            }
        }
        b
    }

    pub fn apply(self, m: &Mat3<f64>) -> Mat3<f64> {
        use crate::tensor::{dev, skew, sym};
        let sph = Mat3::identity().scale(&(m.trace() / 3.0));
        match self {
            Pointwise::Dev => dev(m),
            Pointwise::Sym => sym(m),
            Pointwise::Skew => skew(m),
            Pointwise::DevSym => dev(&sym(m)),
            Pointwise::SkewPlusThirdTrace => skew(m) + sph,
            Pointwise::Spherical => sph,
        }
    }
}

/// Nodal samples of a matrix field, `9·node + 3·i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMat3 {
    pub values: Vec<f64>,
}

impl FieldMat3 {
    pub fn zeros(nodes: usize) -> Self {
        FieldMat3 { values: vec![0.0; 9 * nodes] }
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len() / 9
    }

    pub fn flat_index(node: usize, i: usize, j: usize) -> usize {
        9 * node + 3 * i + j
    }

    /// Inverse of [`FieldMat3::flat_index`].
    pub fn unflatten(k: usize) -> (usize, usize, usize) {
        (k / 9, (k % 9) / 3, k % 3)
    }

    pub fn at(&self, node: usize) -> Mat3<f64> {
        Mat3::from_fn(|i, j| self.values[Self::flat_index(node, i, j)])
    }

    pub fn set(&mut self, node: usize, m: &Mat3<f64>) {
        for i in 0..3 {
            for j in 0..3 {
                self.values[Self::flat_index(node, i, j)] = m[(i, j)];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// CSV with header `node_index,x,y,z,P11,...,P33`.
    pub fn write_csv<W: Write>(&self, grid: &Grid, mut w: W) -> io::Result<()> {
        write!(w, "node_index,x,y,z")?;
        for i in 1..=3 {
            for j in 1..=3 {
                write!(w, ",P{i}{j}")?;
            }
        }
        writeln!(w)?;
        for n in 0..self.num_nodes() {
            let x = grid.position_f64(n);
            write!(w, "{n},{},{},{}", x[0], x[1], x[2])?;
            for v in &self.values[9 * n..9 * n + 9] {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::poly_fields::{anti_field, curl_mat, position, scalar_id};
    use crate::scalar::rat;

    fn cube(h: Rational) -> Grid {
        Grid::preset(Preset::Cube, &h, &GammaSpec::All).unwrap()
    }

    #[test]
    fn cube_counts() {
        let g = cube(rat(1, 2));
        assert_eq!(g.num_nodes(), 27);
        assert_eq!((0..27).filter(|&n| g.is_boundary(n)).count(), 26);
        let g = cube(rat(1, 1));
        assert_eq!(g.num_nodes(), 8);
        assert!((0..8).all(|n| g.boundary_faces(n).len() == 3));
    }

    #[test]
    fn thin_grids_fall_back_to_first_order() {
        assert!(!cube(rat(1, 1)).second_order());
        assert!(cube(rat(1, 2)).second_order());
    }

    #[test]
    fn rejects_bad_input() {
        let b = [Aabb::unit_cube()];
        assert_eq!(Grid::build(&b, &rat(1, 3), &GammaSpec::All).unwrap().num_nodes(), 64);
        assert!(matches!(Grid::build(&b, &rat(2, 5), &GammaSpec::All), Err(GridError::NotAligned(_))));
        assert_eq!(Grid::build(&b, &rat(0, 1), &GammaSpec::All).unwrap_err(), GridError::NonPositiveSpacing);
        assert_eq!(Grid::build(&[], &rat(1, 2), &GammaSpec::All).unwrap_err(), GridError::Empty);
        let apart = [Aabb::unit_cube(), Aabb::from_ints([2, 0, 0], [3, 1, 1])];
        assert_eq!(Grid::build(&apart, &rat(1, 2), &GammaSpec::All).unwrap_err(), GridError::Disconnected);
        // touching along an edge only is not face-connected
        let edge = [Aabb::unit_cube(), Aabb::from_ints([1, 1, 0], [2, 2, 1])];
        assert_eq!(Grid::build(&edge, &rat(1, 2), &GammaSpec::All).unwrap_err(), GridError::Disconnected);
        assert!("w+".parse::<Face>().is_err());
        assert_eq!("z-".parse::<Face>().unwrap(), Face { axis: 2, outward_positive: false });
    }

    #[test]
    fn reentrant_edge_normals() {
        let g = Grid::preset(Preset::LShape, &rat(1, 2), &GammaSpec::All).unwrap();
        // reentrant edge at x = 1, y = 1
        let n = g.node_at([2, 2, 1]).unwrap();
        let mut f = g.boundary_faces(n).to_vec();
        f.sort();
        assert_eq!(f, vec!["x+".parse().unwrap(), "y+".parse().unwrap()]);
        assert_eq!(g.cell_count(n), 6);
    }

    #[test]
    fn mass_integrates_constants_and_linears() {
        for h in [rat(1, 2), rat(1, 4)] {
            let g = cube(h);
            let w = g.node_weights();
            assert!(w.iter().all(|&x| x > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let ix: f64 = (0..g.num_nodes()).map(|n| w[n] * g.position_f64(n)[0]).sum();
            assert!((ix - 0.5).abs() < 1e-12);
        }
        let l = Grid::preset(Preset::LShape, &rat(1, 4), &GammaSpec::None).unwrap();
        assert!((l.node_weights().iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn curl_of_anti_x_is_two_id() {
        let g = cube(rat(1, 4));
        let p = g.sample(&anti_field(&position()));
        let c = FieldMat3 { values: g.curl_op().matvec(&p.values) };
        for n in 0..g.num_nodes() {
            let m = c.at(n);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((m[(i, j)] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn curl_is_exact_on_quadratics() {
        let g = Grid::preset(Preset::LShape, &rat(1, 4), &GammaSpec::None).unwrap();
        let x = |k| Poly::var(k);
        let p = Mat3::from_fn(|i, j| x(i) * x(j) + x((i + 1) % 3) * x(2) - x(j));
        let got = g.curl_op().matvec(&g.sample(&p).values);
        let want = g.sample(&curl_mat(&p)).values;
        let err = got.iter().zip(&want).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        assert!(err < 1e-11, "{err}");
        let z = scalar_id(&(x(2) * x(2)));
        let got = g.curl_op().matvec(&g.sample(&z).values);
        let want = g.sample(&curl_mat(&z)).values;
        assert!(got.iter().zip(&want).all(|(u, v)| (u - v).abs() < 1e-11));
    }

    #[test]
    fn pointwise_projections() {
        let g = cube(rat(1, 2));
        let ds = g.pointwise_op(Pointwise::DevSym);
        let comp = g.pointwise_op(Pointwise::SkewPlusThirdTrace);
        let sum = ds.add(&comp).unwrap();
        assert_eq!(sum, SparseOp::identity(9 * g.num_nodes()));
        for kind in [Pointwise::Dev, Pointwise::Sym, Pointwise::Skew, Pointwise::DevSym] {
            let op = g.pointwise_op(kind);
            let sq = op.compose(&op).unwrap();
            let diff = sq.add(&op.scale(-1.0)).unwrap();
            assert!(diff.triplets().all(|(_, _, v)| v.abs() < 1e-15));
        }
        let id = g.sample(&PolyMat3::identity());
        assert!(g.pointwise_op(Pointwise::Dev).matvec(&id.values).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn bc_mask_columns() {
        let g = Grid::build(&[Aabb::unit_cube()], &rat(1, 2), &GammaSpec::Faces(vec!["z-".parse().unwrap()]))
            .unwrap();
        let n = g.node_at([1, 1, 0]).unwrap();
        let active: Vec<usize> = g.active_dofs().into_iter().filter(|&k| k / 9 == n).map(|k| k % 9).collect();
        // only the normal column P e3 survives
        assert_eq!(active, vec![2, 5, 8]);
        let full = cube(rat(1, 2));
        let corner = full.node_at([0, 0, 0]).unwrap();
        assert!(full.active_dofs().iter().all(|&k| k / 9 != corner));
        let mask = full.bc_mask();
        assert_eq!(mask.compose(&mask).unwrap(), mask);
        let none = Grid::preset(Preset::Cube, &rat(1, 2), &GammaSpec::None).unwrap();
        assert_eq!(none.bc_mask(), SparseOp::identity(9 * 27));
    }

    #[test]
    fn csv_dump_has_header() {
        let g = cube(rat(1, 2));
        let mut buf = Vec::new();
        g.sample(&PolyMat3::identity()).write_csv(&g, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("node_index,x,y,z,P11,P12,P13,P21,P22,P23,P31,P32,P33\n"));
        assert_eq!(s.lines().count(), 28);
    }
}
