//! Dense reference implementations used by the integration tests. Nothing
//! here calls the solver code under test; only grid indexing helpers from
//! the library are shared.
#![allow(dead_code)]

use std::collections::HashMap;

use msmortar::geometry::{FineEdge, Orientation};
use msmortar::{CellRect, GridGeometry, PermeabilityField};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A fine face: `(vertical, line, pos)` with the same meaning as [`FineEdge`].
pub type FaceKey = (bool, usize, usize);

pub fn face_key(fe: FineEdge) -> FaceKey {
    (fe.orientation == Orientation::Vertical, fe.line, fe.pos)
}

/// Faces of cell `(i, j)` in the order W, E, S, N.
fn cell_faces(i: usize, j: usize) -> [FaceKey; 4] {
    [(true, i, j), (true, i + 1, j), (false, j, i), (false, j + 1, i)]
}

/// Hybridized lowest-order RT saddle system on a rectangle of cells, with
/// unknowns ordered as cell fluxes `(4 per cell)`, cell pressures, then one
/// multiplier per interior face. Perimeter multipliers are data.
pub struct Saddle {
    pub rect: CellRect,
    pub h: f64,
    pub matrix: DMatrix<f64>,
    /// Interior faces in unknown order.
    pub interior: Vec<FaceKey>,
    pub interior_index: HashMap<FaceKey, usize>,
    /// Perimeter faces: bottom, top, left, right, each increasing.
    pub perimeter: Vec<FaceKey>,
    perimeter_index: HashMap<FaceKey, usize>,
    kappa: Vec<f64>,
}

pub struct SaddleSolution {
    /// Outward flux per unit length, per cell in rectangle order.
    pub flux: Vec<[f64; 4]>,
    pub pressure: Vec<f64>,
    pub multipliers: HashMap<FaceKey, f64>,
}

impl Saddle {
    pub fn new(geom: &GridGeometry, kappa: &PermeabilityField, rect: CellRect) -> Self {
        let h = geom.fine_size();
        let nc = rect.nx * rect.ny;
        let mut perimeter = Vec::new();
        for i in rect.x0..rect.x0 + rect.nx {
            perimeter.push((false, rect.y0, i));
        }
        for i in rect.x0..rect.x0 + rect.nx {
            perimeter.push((false, rect.y0 + rect.ny, i));
        }
        for j in rect.y0..rect.y0 + rect.ny {
            perimeter.push((true, rect.x0, j));
        }
        for j in rect.y0..rect.y0 + rect.ny {
            perimeter.push((true, rect.x0 + rect.nx, j));
        }
        let perimeter_index: HashMap<FaceKey, usize> = perimeter.iter().enumerate().map(|(k, f)| (*f, k)).collect();
        let mut interior = Vec::new();
        let mut interior_index = HashMap::new();
        let cells: Vec<(usize, usize)> = (0..rect.ny)
            .flat_map(|b| (0..rect.nx).map(move |a| (rect.x0 + a, rect.y0 + b)))
            .collect();
        for &(i, j) in &cells {
            for f in cell_faces(i, j) {
                if !perimeter_index.contains_key(&f) && !interior_index.contains_key(&f) {
                    interior_index.insert(f, interior.len());
                    interior.push(f);
                }
            }
        }
        let kv: Vec<f64> = cells.iter().map(|&(i, j)| kappa.get(geom.cell_index(i, j))).collect();
        let n = 5 * nc + interior.len();
        let mut m = DMatrix::zeros(n, n);
        for (c, &(i, j)) in cells.iter().enumerate() {
            let k = kv[c];
            // reference RT0 shape functions with unit outward flux: the two
            // faces of one direction overlap with weight -1/6, self 1/3
            for a in 0..4 {
                for b in 0..4 {
                    let v = if a == b {
                        h * h / (3.0 * k)
                    } else if a / 2 == b / 2 {
                        -h * h / (6.0 * k)
                    } else {
                        0.0
                    };
                    m[(4 * c + a, 4 * c + b)] = v;
                }
                // -(u, div v) and -(div q, w)
                m[(4 * c + a, 4 * nc + c)] = -h;
                m[(4 * nc + c, 4 * c + a)] = -h;
                if let Some(&l) = interior_index.get(&cell_faces(i, j)[a]) {
                    m[(4 * c + a, 5 * nc + l)] = h;
                    m[(5 * nc + l, 4 * c + a)] = h;
                }
            }
        }
        Self {
            rect,
            h,
            matrix: m,
            interior,
            interior_index,
            perimeter,
            perimeter_index,
            kappa: kv,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.rect.nx * self.rect.ny
    }

    fn rhs(&self, source: Option<&dyn Fn(usize, usize) -> f64>, boundary: &[f64]) -> DVector<f64> {
        let nc = self.num_cells();
        let mut r = DVector::zeros(self.matrix.nrows());
        for c in 0..nc {
            let (i, j) = (self.rect.x0 + c % self.rect.nx, self.rect.y0 + c / self.rect.nx);
            if let Some(f) = source {
                r[4 * nc + c] = -self.h * self.h * f(i, j);
            }
            for (a, face) in cell_faces(i, j).iter().enumerate() {
                if let Some(&p) = self.perimeter_index.get(face) {
                    r[4 * c + a] = -self.h * boundary[p];
                }
            }
        }
        r
    }

    /// Solves with source `f(i, j)` (global cell coordinates) and perimeter
    /// multipliers `boundary`.
    pub fn solve(&self, source: Option<&dyn Fn(usize, usize) -> f64>, boundary: &[f64]) -> SaddleSolution {
        assert_eq!(boundary.len(), self.perimeter.len());
        let nc = self.num_cells();
        let x = self.matrix.clone().lu().solve(&self.rhs(source, boundary)).expect("saddle system is invertible");
        let flux = (0..nc).map(|c| [x[4 * c], x[4 * c + 1], x[4 * c + 2], x[4 * c + 3]]).collect();
        let pressure = (0..nc).map(|c| x[4 * nc + c]).collect();
        let mut multipliers: HashMap<FaceKey, f64> = self.interior.iter().enumerate().map(|(l, f)| (*f, x[5 * nc + l])).collect();
        for (p, f) in self.perimeter.iter().enumerate() {
            multipliers.insert(*f, boundary[p]);
        }
        SaddleSolution {
            flux,
            pressure,
            multipliers,
        }
    }

    /// Schur complement onto the listed interior multipliers.
    pub fn schur_complement(&self, keep: &[FaceKey]) -> DMatrix<f64> {
        let nc = self.num_cells();
        let keep_idx: Vec<usize> = keep.iter().map(|f| 5 * nc + self.interior_index[f]).collect();
        let set: std::collections::HashSet<usize> = keep_idx.iter().copied().collect();
        let rest: Vec<usize> = (0..self.matrix.nrows()).filter(|i| !set.contains(i)).collect();
        let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.matrix[(rows[r], cols[c])]);
        let x = pick(&rest, &rest);
        let y = pick(&rest, &keep_idx);
        let z = pick(&keep_idx, &keep_idx);
        let sol = x.lu().solve(&y).expect("eliminated block is invertible");
        z - y.transpose() * sol
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }
}

/// Reference fine solve on the whole domain with homogeneous Dirichlet data.
pub fn reference_solve(geom: &GridGeometry, kappa: &PermeabilityField, f: &dyn Fn(usize, usize) -> f64) -> SaddleSolution {
    let s = Saddle::new(geom, kappa, geom.domain_rect());
    let zero = vec![0.0; s.perimeter.len()];
    s.solve(Some(f), &zero)
}

/// Skeleton faces in fine-mortar DOF order.
pub fn skeleton_faces(geom: &GridGeometry) -> Vec<FaceKey> {
    (0..geom.num_mortar_dofs()).map(|d| face_key(geom.dof_fine_edge(d))).collect()
}

/// Permeability `10^U(0, log10 eta)` per cell.
pub fn log_uniform_field(geom: &GridGeometry, eta: f64, seed: u64) -> PermeabilityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = eta.log10();
    let v = (0..geom.num_cells()).map(|_| 10f64.powf(rng.random_range(0.0..=top))).collect();
    PermeabilityField::from_values(v).unwrap()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn relative_matrix_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max()
}

/// Dense `R` with one column per coarse basis vector.
pub fn prolongation_matrix(basis: &msmortar::MortarBasis) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..basis.coarse_dim()).map(|c| DVector::from_vec(basis.column(c))).collect();
    DMatrix::from_columns(&cols)
}
