//! Hybridized lowest-order Raviart-Thomas discretization on rectangles of
//! fine cells.
//!
//! Each square cell of side `h` carries four outward normal fluxes (faces in
//! the order W, E, S, N), one constant pressure and shares one multiplier per
//! face. With the cell permeability `kappa` the exact velocity mass matrix is
//! `(h^2 / kappa) * diag(B, B)` with `B = [[1/3, -1/6], [-1/6, 1/3]]`, the
//! divergence couples every face with weight `h` and every face pairs with its
//! multiplier with weight `h`.
//!
//! Fluxes and pressure are eliminated cell by cell. The multiplier system
//! left over is symmetric positive definite once boundary multipliers are
//! prescribed, with the cell contribution given by [`cell_condensed`]. That
//! system is factored once per region with an envelope Cholesky, so every
//! further right-hand side costs two triangular sweeps.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::field::{PermeabilityField, SourceField};
use crate::geometry::{CellRect, FineEdge, GridGeometry, Orientation};
use crate::interface::GlobalSolution;
use crate::linalg::SkylineCholesky;

pub const FACE_W: usize = 0;
pub const FACE_E: usize = 1;
pub const FACE_S: usize = 2;
pub const FACE_N: usize = 3;

/// Outward unit normal of each face.
pub const FACE_NORMALS: [[f64; 2]; 4] = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];

/// Inverse of the one-direction reference mass block `[[1/3, -1/6], [-1/6, 1/3]]`.
const MASS_INV: [[f64; 2]; 2] = [[4.0, 2.0], [2.0, 4.0]];

/// Velocity mass matrix `(kappa^-1 phi_a, phi_b)_T` on a square cell of side `h`.
pub fn cell_mass(h: f64, kappa: f64) -> [[f64; 4]; 4] {
    let d = h * h / (3.0 * kappa);
    let o = -h * h / (6.0 * kappa);
    [[d, o, 0.0, 0.0], [o, d, 0.0, 0.0], [0.0, 0.0, d, o], [0.0, 0.0, o, d]]
}

fn mass_inv_ref(a: usize, b: usize) -> f64 {
    if a / 2 == b / 2 {
        MASS_INV[a % 2][b % 2]
    } else {
        0.0
    }
}

/// Condensed multiplier matrix of one cell, independent of `h` in 2D.
///
/// Integrated outflow through face `a` is
/// `-(K lambda)_a + h^2 f / 4` where `K = kappa * (Minv_ref - 1.5 * 1 1^T)`.
pub fn cell_condensed(kappa: f64) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    for (a, row) in k.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = kappa * (mass_inv_ref(a, b) - 1.5);
        }
    }
    k
}

/// Pressure and normal fluxes of one cell from its four face multipliers.
pub fn cell_recover(h: f64, kappa: f64, source: f64, lambda: &[f64; 4]) -> (f64, [f64; 4]) {
    let u = h * h * source / (24.0 * kappa) + 0.25 * lambda.iter().sum::<f64>();
    // rows of the condensed matrix sum to zero, so work with multiplier
    // differences; rounding then scales with the flux, not with kappa * lambda
    let delta = lambda.map(|l| l - lambda[0]);
    let mut q = [0.0; 4];
    for (a, qa) in q.iter_mut().enumerate() {
        let s: f64 = (0..4).map(|b| (mass_inv_ref(a, b) - 1.5) * delta[b]).sum();
        *qa = (h * h * source / 4.0 - kappa * s) / h;
    }
    (u, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FaceRef {
    Interior(u32),
    Boundary(u32),
}

/// Factored hybridized system on a rectangle of fine cells with Dirichlet
/// multiplier data on its perimeter.
#[derive(Debug, Clone)]
pub struct RegionSolver {
    rect: CellRect,
    h: f64,
    global_side: usize,
    kappa: Vec<f64>,
    faces: Vec<[FaceRef; 4]>,
    interior: Vec<FineEdge>,
    perimeter: Vec<FineEdge>,
    /// Cell and face touching each perimeter edge.
    perimeter_cell: Vec<(usize, usize)>,
    chol: SkylineCholesky,
}

/// Fields of a region solve, in region-local cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSolution {
    /// Outward normal flux per cell face (W, E, S, N), per unit length.
    pub flux: Vec<[f64; 4]>,
    pub pressure: Vec<f64>,
    /// Multipliers on the region's interior edges.
    pub multipliers: Vec<f64>,
    /// Outward normal flux `q . n` on each perimeter edge, per unit length.
    pub boundary_flux: Vec<f64>,
}

impl RegionSolver {
    pub fn new(geom: &GridGeometry, kappa: &PermeabilityField, rect: CellRect) -> Result<Self> {
        let nf = geom.fine_per_side();
        assert!(rect.x0 + rect.nx <= nf && rect.y0 + rect.ny <= nf, "region outside the grid");
        let (nx, ny) = (rect.nx, rect.ny);
        // local edge tables: horizontal (line b, pos a) and vertical (line a, pos b)
        let mut hface = vec![None; (ny + 1) * nx];
        let mut vface = vec![None; (nx + 1) * ny];
        let mut interior = Vec::with_capacity(nx * (ny - 1) + ny * (nx - 1));
        let push = |slot: &mut Option<FaceRef>, fe: FineEdge, interior: &mut Vec<FineEdge>| {
            *slot = Some(FaceRef::Interior(interior.len() as u32));
            interior.push(fe);
        };
        let hedge = |b: usize, a: usize| FineEdge {
            orientation: Orientation::Horizontal,
            line: rect.y0 + b,
            pos: rect.x0 + a,
        };
        let vedge = |a: usize, b: usize| FineEdge {
            orientation: Orientation::Vertical,
            line: rect.x0 + a,
            pos: rect.y0 + b,
        };
        // sweep along the longer side so the envelope stays ~2 * shorter side
        if nx >= ny {
            for a in 0..nx {
                for b in 1..ny {
                    push(&mut hface[b * nx + a], hedge(b, a), &mut interior);
                }
                if a + 1 < nx {
                    for b in 0..ny {
                        push(&mut vface[b * (nx + 1) + a + 1], vedge(a + 1, b), &mut interior);
                    }
                }
            }
        } else {
            for b in 0..ny {
                for a in 1..nx {
                    push(&mut vface[b * (nx + 1) + a], vedge(a, b), &mut interior);
                }
                if b + 1 < ny {
                    for a in 0..nx {
                        push(&mut hface[(b + 1) * nx + a], hedge(b + 1, a), &mut interior);
                    }
                }
            }
        }
        let mut perimeter = Vec::with_capacity(2 * (nx + ny));
        for b in [0, ny] {
            for a in 0..nx {
                hface[b * nx + a] = Some(FaceRef::Boundary(perimeter.len() as u32));
                perimeter.push(hedge(b, a));
            }
        }
        for a in [0, nx] {
            for b in 0..ny {
                vface[b * (nx + 1) + a] = Some(FaceRef::Boundary(perimeter.len() as u32));
                perimeter.push(vedge(a, b));
            }
        }

        let mut faces = Vec::with_capacity(nx * ny);
        let mut local_kappa = Vec::with_capacity(nx * ny);
        let mut perimeter_cell = vec![(0, 0); perimeter.len()];
        for b in 0..ny {
            for a in 0..nx {
                let cell = faces.len();
                let f = [
                    vface[b * (nx + 1) + a].unwrap(),
                    vface[b * (nx + 1) + a + 1].unwrap(),
                    hface[b * nx + a].unwrap(),
                    hface[(b + 1) * nx + a].unwrap(),
                ];
                for (side, r) in f.iter().enumerate() {
                    if let FaceRef::Boundary(p) = r {
                        perimeter_cell[*p as usize] = (cell, side);
                    }
                }
                faces.push(f);
                local_kappa.push(kappa.get((rect.y0 + b) * nf + rect.x0 + a));
            }
        }

        let mut entries = Vec::with_capacity(16 * nx * ny);
        for (f, &k) in faces.iter().zip(&local_kappa) {
            let kt = cell_condensed(k);
            for (a, ra) in f.iter().enumerate() {
                let FaceRef::Interior(ia) = ra else { continue };
                for (b, rb) in f.iter().enumerate() {
                    if let FaceRef::Interior(ib) = rb {
                        if ib <= ia {
                            entries.push((*ia as usize, *ib as usize, kt[a][b]));
                        }
                    }
                }
            }
        }
        let chol = SkylineCholesky::factor(interior.len(), &entries, "region multiplier system")?;
        Ok(Self {
            rect,
            h: geom.fine_size(),
            global_side: nf,
            kappa: local_kappa,
            faces,
            interior,
            perimeter,
            perimeter_cell,
            chol,
        })
    }

    pub fn rect(&self) -> CellRect {
        self.rect
    }

    pub fn num_cells(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    /// Interior edges in solver order.
    pub fn interior_edges(&self) -> &[FineEdge] {
        &self.interior
    }

    /// Perimeter edges: bottom, top, left, right, each in increasing order.
    pub fn perimeter(&self) -> &[FineEdge] {
        &self.perimeter
    }

    /// Local index of an interior edge given in global coordinates.
    pub fn interior_index(&self, fe: FineEdge) -> Option<usize> {
        let r = self.rect;
        let (a, b, horizontal) = match fe.orientation {
            Orientation::Horizontal => (fe.pos.checked_sub(r.x0)?, fe.line.checked_sub(r.y0)?, true),
            Orientation::Vertical => (fe.line.checked_sub(r.x0)?, fe.pos.checked_sub(r.y0)?, false),
        };
        if a >= r.nx || b >= r.ny {
            return None;
        }
        let face = if horizontal { FACE_S } else { FACE_W };
        match self.faces[b * r.nx + a][face] {
            FaceRef::Interior(i) => Some(i as usize),
            FaceRef::Boundary(_) => None,
        }
    }

    /// Global cell index of a region-local cell.
    pub fn global_cell(&self, local: usize) -> usize {
        let (a, b) = (local % self.rect.nx, local / self.rect.nx);
        (self.rect.y0 + b) * self.global_side + self.rect.x0 + a
    }

    fn source_at(&self, source: Option<&SourceField>, local: usize) -> f64 {
        source.map_or(0.0, |f| f.get(self.global_cell(local)))
    }

    fn cell_lambda(&self, cell: usize, interior: &[f64], boundary: &[f64]) -> [f64; 4] {
        let mut l = [0.0; 4];
        for (v, r) in l.iter_mut().zip(&self.faces[cell]) {
            *v = match r {
                FaceRef::Interior(i) => interior[*i as usize],
                FaceRef::Boundary(p) => boundary[*p as usize],
            };
        }
        l
    }

    /// Interior multipliers for source `f` and perimeter data `boundary`.
    pub fn solve_multipliers(&self, source: Option<&SourceField>, boundary: &[f64]) -> Vec<f64> {
        assert_eq!(boundary.len(), self.perimeter.len());
        let h2 = self.h * self.h;
        let mut rhs = vec![0.0; self.interior.len()];
        for (cell, f) in self.faces.iter().enumerate() {
            let src = self.source_at(source, cell);
            let touches_boundary = f.iter().any(|r| matches!(r, FaceRef::Boundary(p) if boundary[*p as usize] != 0.0));
            if src == 0.0 && !touches_boundary {
                continue;
            }
            let kt = cell_condensed(self.kappa[cell]);
            for (a, ra) in f.iter().enumerate() {
                let FaceRef::Interior(ia) = ra else { continue };
                let mut v = 0.25 * h2 * src;
                for (b, rb) in f.iter().enumerate() {
                    if let FaceRef::Boundary(p) = rb {
                        v -= kt[a][b] * boundary[*p as usize];
                    }
                }
                rhs[*ia as usize] += v;
            }
        }
        self.chol.solve_in_place(&mut rhs);
        rhs
    }

    /// Full solve: fluxes, pressures, interior multipliers and boundary fluxes.
    pub fn solve(&self, source: Option<&SourceField>, boundary: &[f64]) -> RegionSolution {
        let multipliers = self.solve_multipliers(source, boundary);
        let mut flux = Vec::with_capacity(self.faces.len());
        let mut pressure = Vec::with_capacity(self.faces.len());
        for cell in 0..self.faces.len() {
            let lambda = self.cell_lambda(cell, &multipliers, boundary);
            let (u, q) = cell_recover(self.h, self.kappa[cell], self.source_at(source, cell), &lambda);
            pressure.push(u);
            flux.push(q);
        }
        let boundary_flux = self.perimeter_cell.iter().map(|&(c, side)| flux[c][side]).collect();
        RegionSolution {
            flux,
            pressure,
            multipliers,
            boundary_flux,
        }
    }

    /// Integrated outward flux `h q . n` on every perimeter edge.
    pub fn boundary_outflow(&self, source: Option<&SourceField>, boundary: &[f64]) -> Vec<f64> {
        let multipliers = self.solve_multipliers(source, boundary);
        self.perimeter_cell
            .iter()
            .map(|&(cell, side)| {
                let lambda = self.cell_lambda(cell, &multipliers, boundary);
                let (_, q) = cell_recover(self.h, self.kappa[cell], self.source_at(source, cell), &lambda);
                self.h * q[side]
            })
            .collect()
    }

    /// The uncondensed symmetric saddle-point matrix over (fluxes, pressures,
    /// interior multipliers) with perimeter multipliers eliminated:
    ///
    /// ```text
    /// [  M   -B   C ]
    /// [ -B^T  0   0 ]
    /// [  C^T  0   0 ]
    /// ```
    ///
    /// Fluxes are numbered four per cell, then one pressure per cell, then
    /// the interior multipliers in solver order.
    pub fn saddle_matrix(&self) -> DMatrix<f64> {
        let nc = self.faces.len();
        let (nq, nu) = (4 * nc, nc);
        let n = nq + nu + self.interior.len();
        let mut m = DMatrix::zeros(n, n);
        for (cell, f) in self.faces.iter().enumerate() {
            let mass = cell_mass(self.h, self.kappa[cell]);
            for a in 0..4 {
                for b in 0..4 {
                    m[(4 * cell + a, 4 * cell + b)] = mass[a][b];
                }
                m[(4 * cell + a, nq + cell)] = -self.h;
                m[(nq + cell, 4 * cell + a)] = -self.h;
                if let FaceRef::Interior(i) = f[a] {
                    m[(4 * cell + a, nq + nu + i as usize)] = self.h;
                    m[(nq + nu + i as usize, 4 * cell + a)] = self.h;
                }
            }
        }
        m
    }
}

/// Output of a block solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub flux: Vec<[f64; 4]>,
    pub pressure: Vec<f64>,
    pub interior_multipliers: Vec<f64>,
    /// `q . n` per perimeter fine edge, signed with the block's outward normal.
    pub boundary_flux: Vec<f64>,
}

impl From<RegionSolution> for LocalSolution {
    fn from(s: RegionSolution) -> Self {
        Self {
            flux: s.flux,
            pressure: s.pressure,
            interior_multipliers: s.multipliers,
            boundary_flux: s.boundary_flux,
        }
    }
}

/// Factored subdomain problem for one coarse block.
#[derive(Debug, Clone)]
pub struct LocalBlockSolver {
    block: usize,
    region: RegionSolver,
    /// Fine-mortar DOF of each perimeter edge, `None` on the outer boundary.
    perimeter_dofs: Vec<Option<usize>>,
}

pub fn assemble_block(geom: &GridGeometry, kappa: &PermeabilityField, block: usize) -> Result<LocalBlockSolver> {
    let region = RegionSolver::new(geom, kappa, geom.block_rect(block))?;
    let perimeter_dofs = region.perimeter().iter().map(|&fe| geom.fine_edge_dof(fe)).collect();
    Ok(LocalBlockSolver {
        block,
        region,
        perimeter_dofs,
    })
}

impl LocalBlockSolver {
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn region(&self) -> &RegionSolver {
        &self.region
    }

    pub fn perimeter_dofs(&self) -> &[Option<usize>] {
        &self.perimeter_dofs
    }

    /// Number of unknowns of the block problem: 5 per cell plus interior multipliers.
    pub fn local_dof_count(&self) -> usize {
        5 * self.region.num_cells() + self.region.num_interior()
    }

    /// Perimeter values of a fine-mortar vector; zero on the outer boundary.
    pub fn gather(&self, mortar: &[f64]) -> Vec<f64> {
        self.perimeter_dofs.iter().map(|d| d.map_or(0.0, |d| mortar[d])).collect()
    }

    pub fn solve(&self, source: Option<&SourceField>, trace: &[f64]) -> LocalSolution {
        self.region.solve(source, trace).into()
    }

    /// Solution driven by the source with zero multipliers on the block boundary.
    pub fn solve_source_part(&self, source: &SourceField) -> LocalSolution {
        let zero = vec![0.0; self.perimeter_dofs.len()];
        self.solve(Some(source), &zero)
    }

    /// Solution driven by the perimeter trace with zero source.
    pub fn solve_mortar_part(&self, trace: &[f64]) -> LocalSolution {
        self.solve(None, trace)
    }

    /// Integrated outward flux per perimeter edge.
    pub fn boundary_outflow(&self, source: Option<&SourceField>, trace: &[f64]) -> Vec<f64> {
        self.region.boundary_outflow(source, trace)
    }
}

/// Direct solve of the full fine hybridized system with homogeneous
/// Dirichlet data; the reference solution for the mortar methods.
pub fn monolithic_fine_solve(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    source: &SourceField,
) -> Result<GlobalSolution> {
    let region = RegionSolver::new(geom, kappa, geom.domain_rect())?;
    let zero = vec![0.0; region.perimeter().len()];
    let sol = region.solve(Some(source), &zero);
    let mortar = (0..geom.num_mortar_dofs())
        .map(|dof| {
            let i = region
                .interior_index(geom.dof_fine_edge(dof))
                .expect("skeleton edges are interior to the domain");
            sol.multipliers[i]
        })
        .collect();
    Ok(GlobalSolution {
        flux: sol.flux,
        pressure: sol.pressure,
        mortar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{realize_source, SourceKind};

    fn checkerboard(geom: &GridGeometry, eta: f64) -> PermeabilityField {
        let v = (0..geom.num_cells())
            .map(|c| {
                let (i, j) = geom.cell_coords(c);
                if (i + j) % 2 == 0 {
                    eta
                } else {
                    1.0
                }
            })
            .collect();
        PermeabilityField::from_values(v).unwrap()
    }

    #[test]
    fn single_cell_saddle_system() {
        let g = GridGeometry::new(2, 2).unwrap();
        let k = PermeabilityField::uniform(&g, 1.0).unwrap();
        let r = RegionSolver::new(&g, &k, CellRect::new(1, 1, 1, 1)).unwrap();
        let m = r.saddle_matrix();
        assert_eq!(m.shape(), (5, 5));
        let h = g.fine_size();
        // reference cell: diagonal h^2/3, paired faces -h^2/6, divergence row -h
        assert!((m[(0, 0)] - h * h / 3.0).abs() < 1e-15);
        assert!((m[(0, 1)] + h * h / 6.0).abs() < 1e-15);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(4, 0)], -h);
        assert_eq!(m[(4, 4)], 0.0);
    }

    #[test]
    fn saddle_matrix_structure_and_scaling() {
        let g = GridGeometry::new(2, 3).unwrap();
        let k1 = PermeabilityField::uniform(&g, 1.0).unwrap();
        let kc = PermeabilityField::uniform(&g, 7.0).unwrap();
        let b1 = assemble_block(&g, &k1, 1).unwrap();
        let bc = assemble_block(&g, &kc, 1).unwrap();
        assert_eq!(b1.local_dof_count(), 5 * 9 + 2 * 3 * 2);
        let m1 = b1.region().saddle_matrix();
        let mc = bc.region().saddle_matrix();
        assert_eq!(m1, m1.transpose());
        let nq = 4 * 9;
        let n = m1.nrows();
        for r in nq..n {
            for c in nq..n {
                assert_eq!(m1[(r, c)], 0.0);
            }
        }
        for r in 0..n {
            for c in 0..n {
                let expect = if r < nq && c < nq { m1[(r, c)] / 7.0 } else { m1[(r, c)] };
                assert!((mc[(r, c)] - expect).abs() <= 1e-15 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = GridGeometry::new(2, 4).unwrap();
        let k = checkerboard(&g, 100.0);
        let b = assemble_block(&g, &k, 2).unwrap();
        let zero_f = realize_source(SourceKind::Constant(0.0), &g).unwrap();
        let s = b.solve_source_part(&zero_f);
        assert!(s.flux.iter().flatten().all(|&v| v == 0.0));
        assert!(s.pressure.iter().all(|&v| v == 0.0));
        let s = b.solve_mortar_part(&[0.0; 16]);
        assert!(s.boundary_flux.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_source_outflow_equals_block_area() {
        let g = GridGeometry::new(3, 4).unwrap();
        let k = PermeabilityField::uniform(&g, 1.0).unwrap();
        let one = realize_source(SourceKind::Constant(1.0), &g).unwrap();
        for block in 0..g.num_blocks() {
            let b = assemble_block(&g, &k, block).unwrap();
            let s = b.solve_source_part(&one);
            let h = g.fine_size();
            let total: f64 = s.boundary_flux.iter().map(|q| q * h).sum();
            let area = g.coarse_size().powi(2);
            assert!((total - area).abs() < 1e-10 * area);
        }
    }

    #[test]
    fn constant_trace_is_a_no_flow_state() {
        let g = GridGeometry::new(2, 5).unwrap();
        let k = checkerboard(&g, 1e6);
        let b = assemble_block(&g, &k, 3).unwrap();
        let s = b.solve_mortar_part(&[2.5; 20]);
        for q in s.flux.iter().flatten() {
            assert!(q.abs() < 1e-10 * 1e6);
        }
        for u in &s.pressure {
            assert!((u - 2.5).abs() < 1e-9, "{u}");
        }
    }

    #[test]
    fn cell_conservation_holds() {
        let g = GridGeometry::new(2, 4).unwrap();
        let k = checkerboard(&g, 1e4);
        let f = SourceField::sample(&g, |x, y| (3.0 * x).sin() + y * y - 0.3).unwrap();
        let b = assemble_block(&g, &k, 0).unwrap();
        let trace: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).cos()).collect();
        let s = b.solve(Some(&f), &trace);
        let h = g.fine_size();
        for (c, q) in s.flux.iter().enumerate() {
            let div: f64 = q.iter().sum::<f64>() * h;
            let src = f.get(b.region().global_cell(c)) * h * h;
            let scale = q.iter().map(|v| v.abs() * h).sum::<f64>().max(src.abs());
            assert!((div - src).abs() <= 1e-10 * scale.max(1e-300));
        }
    }

    #[test]
    fn superposition_of_source_and_trace() {
        let g = GridGeometry::new(2, 4).unwrap();
        let k = checkerboard(&g, 1e3);
        let f = SourceField::sample(&g, |x, y| 1.0 + x - 2.0 * y).unwrap();
        let b = assemble_block(&g, &k, 1).unwrap();
        let trace: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let both = b.solve(Some(&f), &trace);
        let sf = b.solve_source_part(&f);
        let st = b.solve_mortar_part(&trace);
        let close = |a: f64, b: f64, c: f64| (a - (b + c)).abs() <= 1e-12 * (a.abs() + b.abs() + c.abs()).max(1e-14);
        for ((a, b), c) in both.pressure.iter().zip(&sf.pressure).zip(&st.pressure) {
            assert!(close(*a, *b, *c));
        }
        for ((a, b), c) in both.boundary_flux.iter().zip(&sf.boundary_flux).zip(&st.boundary_flux) {
            assert!(close(*a, *b, *c));
        }
    }

    #[test]
    fn local_steklov_poincare_symmetry() {
        let g = GridGeometry::new(2, 3).unwrap();
        let k = checkerboard(&g, 1e5);
        let b = assemble_block(&g, &k, 0).unwrap();
        let np = 12;
        let responses: Vec<Vec<f64>> = (0..np)
            .map(|p| {
                let mut e = vec![0.0; np];
                e[p] = 1.0;
                b.boundary_outflow(None, &e)
            })
            .collect();
        for (a, row) in responses.iter().enumerate() {
            for (c, col) in responses.iter().enumerate() {
                let (x, y) = (row[c], col[a]);
                assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-12), "{a} {c}");
            }
        }
    }

    #[test]
    fn interior_index_lookup() {
        let g = GridGeometry::new(3, 3).unwrap();
        let k = PermeabilityField::uniform(&g, 1.0).unwrap();
        let r = RegionSolver::new(&g, &k, CellRect::new(2, 1, 5, 3)).unwrap();
        for (i, &fe) in r.interior_edges().iter().enumerate() {
            assert_eq!(r.interior_index(fe), Some(i));
        }
        for &fe in r.perimeter() {
            assert_eq!(r.interior_index(fe), None);
        }
        assert_eq!(r.perimeter().len(), 16);
        assert_eq!(r.num_interior(), 5 * 2 + 3 * 4);
    }
}
