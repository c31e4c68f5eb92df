//! Two-level uniform grid on the unit square.
//!
//! The domain is split into `N x N` square coarse blocks, each carrying an
//! `n x n` block of square fine cells, so the fine grid has `N_f = N * n`
//! cells per side. Everything is indexed arithmetically:
//!
//! * fine cells are row-major, `cell = j * N_f + i` with `i` the column;
//! * fine edges list horizontal edges first (`y`-line `j`, column `i`,
//!   `id = j * N_f + i`), then vertical edges (`x`-line `i`, row `j`);
//! * interior coarse edges list horizontal edges first (row-major over
//!   `J = 1..N`, `I = 0..N`), then vertical edges (`J = 0..N`, `I = 1..N`);
//! * fine-mortar DOFs live only on interior coarse edges and are numbered
//!   `edge * n + k`, with `k` increasing along `x` or `y`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Edge parallel to the x axis (normal along y).
    Horizontal,
    /// Edge parallel to the y axis (normal along x).
    Vertical,
}

/// A single fine edge, addressed by the grid line it lies on and its
/// position along that line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FineEdge {
    pub orientation: Orientation,
    /// `y`-line index for horizontal edges, `x`-line index for vertical ones.
    pub line: usize,
    /// Column (horizontal) or row (vertical) of the edge along its line.
    pub pos: usize,
}

/// Axis-aligned rectangle of fine cells, `[x0, x0 + nx) x [y0, y0 + ny)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellRect {
    pub x0: usize,
    pub y0: usize,
    pub nx: usize,
    pub ny: usize,
}

impl CellRect {
    pub fn new(x0: usize, y0: usize, nx: usize, ny: usize) -> Self {
        Self { x0, y0, nx, ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.nx == 0 || self.ny == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.x0 && i < self.x0 + self.nx && j >= self.y0 && j < self.y0 + self.ny
    }

    pub fn contains_rect(&self, other: &CellRect) -> bool {
        other.is_empty()
            || (other.x0 >= self.x0
                && other.y0 >= self.y0
                && other.x0 + other.nx <= self.x0 + self.nx
                && other.y0 + other.ny <= self.y0 + self.ny)
    }

    /// Global `(i, j)` coordinates of the cells, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y0 + self.ny).flat_map(move |j| (self.x0..self.x0 + self.nx).map(move |i| (i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoarseEdge {
    pub orientation: Orientation,
    /// Adjacent blocks: below/left first, above/right second.
    pub blocks: [usize; 2],
    /// Fine grid line the edge lies on.
    pub line: usize,
    /// First fine cell coordinate covered along the edge.
    pub start: usize,
}

#[derive(Debug, Clone)]
pub struct GridGeometry {
    coarse: usize,
    fine: usize,
    coarse_edges: Vec<CoarseEdge>,
}

impl GridGeometry {
    /// Builds the `N x N` coarse by `n x n` fine grid.
    pub fn new(coarse: usize, fine: usize) -> Result<Self> {
        if coarse < 2 || fine < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs N >= 2 and n >= 2, got N={coarse}, n={fine}"
            )));
        }
        let nc = coarse;
        let mut coarse_edges = Vec::with_capacity(2 * nc * (nc - 1));
        for bj in 1..nc {
            for bi in 0..nc {
                coarse_edges.push(CoarseEdge {
                    orientation: Orientation::Horizontal,
                    blocks: [(bj - 1) * nc + bi, bj * nc + bi],
                    line: bj * fine,
                    start: bi * fine,
                });
            }
        }
        for bj in 0..nc {
            for bi in 1..nc {
                coarse_edges.push(CoarseEdge {
                    orientation: Orientation::Vertical,
                    blocks: [bj * nc + bi - 1, bj * nc + bi],
                    line: bi * fine,
                    start: bj * fine,
                });
            }
        }
        Ok(Self {
            coarse,
            fine,
            coarse_edges,
        })
    }

    /// Coarse blocks per side (`N`).
    pub fn coarse_per_side(&self) -> usize {
        self.coarse
    }

    /// Fine cells per block side (`n`).
    pub fn fine_per_block(&self) -> usize {
        self.fine
    }

    /// Fine cells per domain side (`N_f = N n`).
    pub fn fine_per_side(&self) -> usize {
        self.coarse * self.fine
    }

    pub fn coarse_size(&self) -> f64 {
        1.0 / self.coarse as f64
    }

    pub fn fine_size(&self) -> f64 {
        1.0 / self.fine_per_side() as f64
    }

    pub fn num_cells(&self) -> usize {
        let nf = self.fine_per_side();
        nf * nf
    }

    pub fn num_blocks(&self) -> usize {
        self.coarse * self.coarse
    }

    pub fn num_coarse_edges(&self) -> usize {
        self.coarse_edges.len()
    }

    pub fn coarse_edges(&self) -> &[CoarseEdge] {
        &self.coarse_edges
    }

    pub fn coarse_edge(&self, edge: usize) -> &CoarseEdge {
        &self.coarse_edges[edge]
    }

    /// Total number of fine edges (boundary included).
    pub fn num_fine_edges(&self) -> usize {
        let nf = self.fine_per_side();
        2 * nf * (nf + 1)
    }

    pub fn num_interior_fine_edges(&self) -> usize {
        let nf = self.fine_per_side();
        2 * nf * (nf - 1)
    }

    /// Unknown count of the fine hybridized solver: four normal fluxes and one
    /// pressure per cell plus one multiplier per interior fine edge.
    pub fn fine_dof_count(&self) -> usize {
        5 * self.num_cells() + self.num_interior_fine_edges()
    }

    /// Unknown count of the coarse mortar problem with `nb` modes per edge.
    pub fn multiscale_dof_count(&self, nb: usize) -> usize {
        nb * self.num_coarse_edges()
    }

    /// Dimension of the fine mortar space on the interior skeleton.
    pub fn num_mortar_dofs(&self) -> usize {
        self.num_coarse_edges() * self.fine
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.fine_per_side() + i
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        let nf = self.fine_per_side();
        (cell % nf, cell / nf)
    }

    pub fn cell_center(&self, cell: usize) -> (f64, f64) {
        let (i, j) = self.cell_coords(cell);
        let h = self.fine_size();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    pub fn domain_rect(&self) -> CellRect {
        let nf = self.fine_per_side();
        CellRect::new(0, 0, nf, nf)
    }

    pub fn block_rect(&self, block: usize) -> CellRect {
        let n = self.fine;
        let (bi, bj) = (block % self.coarse, block / self.coarse);
        CellRect::new(bi * n, bj * n, n, n)
    }

    pub fn block_of_cell(&self, i: usize, j: usize) -> usize {
        (j / self.fine) * self.coarse + i / self.fine
    }

    /// Union of the two blocks sharing `edge`.
    pub fn neighborhood(&self, edge: usize) -> CellRect {
        let e = &self.coarse_edges[edge];
        let a = self.block_rect(e.blocks[0]);
        match e.orientation {
            Orientation::Horizontal => CellRect::new(a.x0, a.y0, a.nx, 2 * a.ny),
            Orientation::Vertical => CellRect::new(a.x0, a.y0, 2 * a.nx, a.ny),
        }
    }

    pub fn mortar_dof(&self, edge: usize, k: usize) -> usize {
        debug_assert!(k < self.fine);
        edge * self.fine + k
    }

    /// Coarse edge and position along it of a fine-mortar DOF.
    pub fn dof_location(&self, dof: usize) -> (usize, usize) {
        (dof / self.fine, dof % self.fine)
    }

    pub fn edge_dofs(&self, edge: usize) -> std::ops::Range<usize> {
        edge * self.fine..(edge + 1) * self.fine
    }

    pub fn dof_fine_edge(&self, dof: usize) -> FineEdge {
        let (edge, k) = self.dof_location(dof);
        let e = &self.coarse_edges[edge];
        FineEdge {
            orientation: e.orientation,
            line: e.line,
            pos: e.start + k,
        }
    }

    /// Inverse of [`Self::dof_fine_edge`]; `None` for fine edges off the
    /// interior coarse skeleton.
    pub fn fine_edge_dof(&self, fe: FineEdge) -> Option<usize> {
        let (n, nc, nf) = (self.fine, self.coarse, self.fine_per_side());
        if fe.line == 0 || fe.line >= nf || !fe.line.is_multiple_of(n) || fe.pos >= nf {
            return None;
        }
        let across = fe.line / n;
        let along = fe.pos / n;
        let edge = match fe.orientation {
            Orientation::Horizontal => (across - 1) * nc + along,
            Orientation::Vertical => nc * (nc - 1) + along * (nc - 1) + across - 1,
        };
        Some(edge * n + fe.pos % n)
    }

    /// The two fine cells separated by an interior fine edge, below/left first.
    pub fn fine_edge_cells(&self, fe: FineEdge) -> [(usize, usize); 2] {
        match fe.orientation {
            Orientation::Horizontal => [(fe.pos, fe.line - 1), (fe.pos, fe.line)],
            Orientation::Vertical => [(fe.line - 1, fe.pos), (fe.line, fe.pos)],
        }
    }

    pub fn fine_edge_id(&self, fe: FineEdge) -> usize {
        let nf = self.fine_per_side();
        match fe.orientation {
            Orientation::Horizontal => fe.line * nf + fe.pos,
            Orientation::Vertical => nf * (nf + 1) + fe.pos * (nf + 1) + fe.line,
        }
    }

    pub fn fine_edge_from_id(&self, id: usize) -> FineEdge {
        let nf = self.fine_per_side();
        let nh = nf * (nf + 1);
        if id < nh {
            FineEdge {
                orientation: Orientation::Horizontal,
                line: id / nf,
                pos: id % nf,
            }
        } else {
            let v = id - nh;
            FineEdge {
                orientation: Orientation::Vertical,
                line: v % (nf + 1),
                pos: v / (nf + 1),
            }
        }
    }

    /// Oversampled region of `edge` clipped to the domain.
    ///
    /// For a vertical edge `d11` is the half-width across the edge and `d12`
    /// the padding beyond each endpoint; for a horizontal edge `d21` pads past
    /// the endpoints and `d22` is the half-width across. The half-width is at
    /// least one cell so the region always contains the cells touching the
    /// edge.
    pub fn oversample_region(&self, edge: usize, spec: &OversampleSpec) -> CellRect {
        let e = &self.coarse_edges[edge];
        let nf = self.fine_per_side() as isize;
        let n = self.fine as isize;
        let (line, start) = (e.line as isize, e.start as isize);
        let (normal, tangential) = match e.orientation {
            Orientation::Vertical => (spec.d11.max(1) as isize, spec.d12 as isize),
            Orientation::Horizontal => (spec.d22.max(1) as isize, spec.d21 as isize),
        };
        let across = ((line - normal).max(0), (line + normal).min(nf));
        let along = ((start - tangential).max(0), (start + n + tangential).min(nf));
        let (x, y) = match e.orientation {
            Orientation::Vertical => (across, along),
            Orientation::Horizontal => (along, across),
        };
        CellRect::new(x.0 as usize, y.0 as usize, (x.1 - x.0) as usize, (y.1 - y.0) as usize)
    }

    /// Fine-mortar DOFs whose two adjacent cells both lie in `region`, ascending.
    pub fn edge_skeleton_dofs(&self, region: &CellRect) -> Vec<usize> {
        (0..self.num_mortar_dofs())
            .filter(|&dof| {
                self.fine_edge_cells(self.dof_fine_edge(dof))
                    .iter()
                    .all(|&(i, j)| region.contains(i, j))
            })
            .collect()
    }
}

/// Extension counts `(d11, d12; d21, d22)` describing an oversampled region;
/// see [`GridGeometry::oversample_region`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct OversampleSpec {
    pub d11: usize,
    pub d12: usize,
    pub d21: usize,
    pub d22: usize,
}

impl OversampleSpec {
    pub fn new(d11: usize, d12: usize, d21: usize, d22: usize) -> Self {
        Self { d11, d12, d21, d22 }
    }

    /// The four standard local domains for block size `n`:
    /// 1 = `(n,0;0,n)`, 2 = `(n,1;1,n)`, 3 = `(n/2,1;1,n/2)`, 4 = `(2,1;1,2)`.
    pub fn domain(kind: usize, n: usize) -> Result<Self> {
        match kind {
            1 => Ok(Self::new(n, 0, 0, n)),
            2 => Ok(Self::new(n, 1, 1, n)),
            3 => Ok(Self::new(n / 2, 1, 1, n / 2)),
            4 => Ok(Self::new(2, 1, 1, 2)),
            _ => Err(Error::InvalidArgument(format!("local domain must be 1..=4, got {kind}"))),
        }
    }

    pub fn dominates(&self, other: &OversampleSpec) -> bool {
        self.d11 >= other.d11 && self.d12 >= other.d12 && self.d21 >= other.d21 && self.d22 >= other.d22
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_tiny_grids() {
        assert!(GridGeometry::new(1, 4).is_err());
        assert!(GridGeometry::new(4, 1).is_err());
    }

    #[test]
    fn reported_dof_counts() {
        let g = GridGeometry::new(5, 20).unwrap();
        assert_eq!(g.fine_per_side(), 100);
        assert_eq!(g.fine_dof_count(), 69800);
        assert_eq!(g.multiscale_dof_count(5), 200);
    }

    #[test]
    fn smallest_grid_counts() {
        let g = GridGeometry::new(2, 2).unwrap();
        assert_eq!(g.num_coarse_edges(), 4);
        assert_eq!(g.num_cells(), 16);
        assert_eq!(g.num_mortar_dofs(), 8);
    }

    #[test]
    fn domain_one_is_the_neighborhood() {
        let g = GridGeometry::new(4, 6).unwrap();
        let spec = OversampleSpec::domain(1, 6).unwrap();
        for e in 0..g.num_coarse_edges() {
            assert_eq!(g.oversample_region(e, &spec), g.neighborhood(e));
        }
    }

    #[test]
    fn domain_two_interior_vertical_edge() {
        let g = GridGeometry::new(5, 20).unwrap();
        let spec = OversampleSpec::domain(2, 20).unwrap();
        // vertical edge between blocks (1,2) and (2,2): fully interior
        let edge = g
            .coarse_edges()
            .iter()
            .position(|e| e.orientation == Orientation::Vertical && e.blocks == [11, 12])
            .unwrap();
        let r = g.oversample_region(edge, &spec);
        assert_eq!((r.nx, r.ny), (40, 22));
        assert_eq!((r.x0, r.y0), (20, 39));
    }

    #[test]
    fn clipping_at_the_boundary() {
        let g = GridGeometry::new(3, 4).unwrap();
        let spec = OversampleSpec::new(4, 1, 1, 4);
        // first vertical edge sits on the bottom row of blocks
        let edge = g.num_coarse_edges() / 2;
        let e = g.coarse_edge(edge);
        assert_eq!(e.start, 0);
        let r = g.oversample_region(edge, &spec);
        assert_eq!((r.y0, r.ny), (0, 5));
        assert_eq!((r.x0, r.nx), (0, 8));
    }

    #[test]
    fn neighborhood_has_only_its_own_edge() {
        let g = GridGeometry::new(3, 4).unwrap();
        for e in 0..g.num_coarse_edges() {
            let dofs = g.edge_skeleton_dofs(&g.neighborhood(e));
            assert_eq!(dofs, g.edge_dofs(e).collect::<Vec<_>>());
        }
        let all = g.edge_skeleton_dofs(&g.domain_rect());
        assert_eq!(all.len(), g.num_mortar_dofs());
    }

    #[test]
    fn domain_two_skeleton_matches_brute_force() {
        let g = GridGeometry::new(5, 20).unwrap();
        let spec = OversampleSpec::domain(2, 20).unwrap();
        let edge = g
            .coarse_edges()
            .iter()
            .position(|e| e.orientation == Orientation::Vertical && e.blocks == [11, 12])
            .unwrap();
        let region = g.oversample_region(edge, &spec);
        // brute force: walk every fine edge id, keep interior-skeleton ones with both cells inside
        let mut expected = Vec::new();
        for id in 0..g.num_fine_edges() {
            let fe = g.fine_edge_from_id(id);
            let nf = g.fine_per_side();
            if fe.line == 0 || fe.line == nf {
                continue;
            }
            let [(ia, ja), (ib, jb)] = g.fine_edge_cells(fe);
            let skeleton = fe.line.is_multiple_of(20);
            if skeleton && region.contains(ia, ja) && region.contains(ib, jb) {
                expected.push(g.fine_edge_dof(fe).unwrap());
            }
        }
        expected.sort_unstable();
        let got = g.edge_skeleton_dofs(&region);
        assert_eq!(got, expected);
        // E_i, one fine edge from each collinear neighbor, and the four abutting horizontal edges
        assert_eq!(got.len(), 20 + 2 + 4 * 20);
    }

    proptest! {
        #[test]
        fn counting_identities(nc in 2usize..=8, n in 2usize..=16) {
            let g = GridGeometry::new(nc, n).unwrap();
            let nf = nc * n;
            prop_assert_eq!(g.num_coarse_edges(), 2 * nc * (nc - 1));
            prop_assert_eq!(g.num_cells(), nf * nf);
            prop_assert_eq!(g.num_interior_fine_edges(), 2 * nf * (nf - 1));
            prop_assert_eq!(g.fine_dof_count(), 5 * nf * nf + 2 * nf * (nf - 1));
            let mut seen = std::collections::HashSet::new();
            for e in 0..g.num_coarse_edges() {
                let ce = g.coarse_edge(e);
                prop_assert_ne!(ce.blocks[0], ce.blocks[1]);
                let hood = g.neighborhood(e);
                prop_assert!(hood.contains_rect(&g.block_rect(ce.blocks[0])));
                prop_assert!(hood.contains_rect(&g.block_rect(ce.blocks[1])));
                prop_assert_eq!(hood.len(), 2 * n * n);
                for dof in g.edge_dofs(e) {
                    prop_assert!(seen.insert(g.fine_edge_id(g.dof_fine_edge(dof))));
                }
            }
            prop_assert_eq!(seen.len(), g.num_mortar_dofs());
        }

        #[test]
        fn index_maps_are_bijections(nc in 2usize..=6, n in 2usize..=8) {
            let g = GridGeometry::new(nc, n).unwrap();
            for dof in 0..g.num_mortar_dofs() {
                prop_assert_eq!(g.fine_edge_dof(g.dof_fine_edge(dof)), Some(dof));
            }
            for id in 0..g.num_fine_edges() {
                prop_assert_eq!(g.fine_edge_id(g.fine_edge_from_id(id)), id);
            }
            for c in 0..g.num_cells() {
                let (i, j) = g.cell_coords(c);
                prop_assert_eq!(g.cell_index(i, j), c);
            }
        }

        #[test]
        fn oversampling_is_monotone(
            a in (0usize..6, 0usize..4, 0usize..4, 0usize..6),
            b in (0usize..3, 0usize..3, 0usize..3, 0usize..3),
            edge_pick in 0usize..100,
        ) {
            let g = GridGeometry::new(4, 5).unwrap();
            let small = OversampleSpec::new(a.0, a.1, a.2, a.3);
            let big = OversampleSpec::new(a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3);
            prop_assert!(big.dominates(&small));
            let edge = edge_pick % g.num_coarse_edges();
            let rs = g.oversample_region(edge, &small);
            let rb = g.oversample_region(edge, &big);
            prop_assert!(rb.contains_rect(&rs));
            for dof in g.edge_dofs(edge) {
                for (i, j) in g.fine_edge_cells(g.dof_fine_edge(dof)) {
                    prop_assert!(rs.contains(i, j));
                }
            }
        }
    }
}
