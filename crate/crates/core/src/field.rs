//! Permeability and source fields on the fine grid.
//!
//! A [`FieldSpec`] is declarative: a background value plus axis-aligned
//! rectangles and polyline channels in unit-square coordinates. A cell takes
//! a feature's value when its center lies inside the feature; later features
//! win over earlier ones, and a raster overrides everything.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    /// `[x0, x1] x [y0, y1]` with permeability `contrast * background`.
    Rect {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        contrast: f64,
    },
    /// Cells whose center is within `width / 2` of the polyline.
    Channel {
        points: Vec<[f64; 2]>,
        width: f64,
        contrast: f64,
    },
}

impl Feature {
    fn contrast(&self) -> f64 {
        match self {
            Feature::Rect { contrast, .. } | Feature::Channel { contrast, .. } => *contrast,
        }
    }

    fn covers(&self, x: f64, y: f64) -> bool {
        match self {
            Feature::Rect { x0, x1, y0, y1, .. } => x >= *x0 && x <= *x1 && y >= *y0 && y <= *y1,
            Feature::Channel { points, width, .. } => {
                let r = 0.5 * width;
                points.windows(2).any(|s| segment_distance([x, y], s[0], s[1]) <= r)
            }
        }
    }

    fn with_contrast(&self, eta: f64) -> Feature {
        let mut f = self.clone();
        match &mut f {
            Feature::Rect { contrast, .. } | Feature::Channel { contrast, .. } => *contrast = eta,
        }
        f
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    (cx * cx + cy * cy).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub background: f64,
    #[serde(default)]
    pub features: Vec<Feature>,
    #[serde(default)]
    pub raster: Option<PathBuf>,
}

impl FieldSpec {
    pub fn uniform(value: f64) -> Self {
        Self {
            background: value,
            features: Vec::new(),
            raster: None,
        }
    }

    /// Same geometry with every feature contrast replaced by `eta`.
    pub fn with_contrast(&self, eta: f64) -> Self {
        Self {
            background: self.background,
            features: self.features.iter().map(|f| f.with_contrast(eta)).collect(),
            raster: self.raster.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.background > 0.0 && self.background.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "background permeability must be positive, got {}",
                self.background
            )));
        }
        for f in &self.features {
            let eta = f.contrast();
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidArgument(format!("feature contrast must be positive, got {eta}")));
            }
        }
        Ok(())
    }
}

/// Built-in synthetic media with high-conductivity features of contrast `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPreset {
    /// Isolated inclusions and short channels scattered over the domain.
    Inclusions,
    /// Long thin channels, most of them crossing several coarse edges.
    Channels,
}

impl FieldPreset {
    pub fn spec(self, eta: f64) -> FieldSpec {
        let features = match self {
            FieldPreset::Inclusions => inclusions(),
            FieldPreset::Channels => channels(),
        };
        FieldSpec {
            background: 1.0,
            features,
            raster: None,
        }
        .with_contrast(eta)
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldPreset::Inclusions => "inclusions",
            FieldPreset::Channels => "channels",
        }
    }
}

fn rect(x0: f64, y0: f64, w: f64, h: f64) -> Feature {
    Feature::Rect {
        x0,
        x1: x0 + w,
        y0,
        y1: y0 + h,
        contrast: 1.0,
    }
}

fn channel(points: &[[f64; 2]], width: f64) -> Feature {
    Feature::Channel {
        points: points.to_vec(),
        width,
        contrast: 1.0,
    }
}

// Channels cross the coarse lines of both 5x5 and 10x10 block grids
// (multiples of 0.1) transversally and never run along them.
const WIDTH: f64 = 0.022;

fn inclusions() -> Vec<Feature> {
    vec![
        rect(0.04, 0.04, 0.05, 0.04),
        rect(0.23, 0.07, 0.05, 0.05),
        rect(0.46, 0.03, 0.08, 0.04),
        rect(0.64, 0.12, 0.04, 0.05),
        rect(0.83, 0.05, 0.06, 0.05),
        rect(0.07, 0.33, 0.05, 0.04),
        rect(0.43, 0.44, 0.05, 0.05),
        rect(0.65, 0.33, 0.05, 0.04),
        rect(0.86, 0.43, 0.04, 0.06),
        rect(0.13, 0.63, 0.04, 0.05),
        rect(0.34, 0.84, 0.05, 0.04),
        rect(0.55, 0.64, 0.05, 0.05),
        rect(0.74, 0.85, 0.04, 0.05),
        rect(0.93, 0.66, 0.04, 0.05),
        rect(0.05, 0.88, 0.05, 0.05),
        // short channels, each crossing one coarse line
        channel(&[[0.15, 0.25], [0.26, 0.25]], WIDTH),
        channel(&[[0.35, 0.14], [0.35, 0.26]], WIDTH),
        channel(&[[0.55, 0.25], [0.66, 0.25]], WIDTH),
        channel(&[[0.75, 0.35], [0.75, 0.46]], WIDTH),
        channel(&[[0.25, 0.45], [0.25, 0.56]], WIDTH),
        channel(&[[0.35, 0.65], [0.46, 0.65]], WIDTH),
        channel(&[[0.85, 0.54], [0.85, 0.65]], WIDTH),
        channel(&[[0.15, 0.75], [0.26, 0.75]], WIDTH),
        channel(&[[0.55, 0.86], [0.66, 0.86]], WIDTH),
        channel(&[[0.95, 0.25], [0.95, 0.16]], WIDTH),
    ]
}

fn channels() -> Vec<Feature> {
    vec![
        channel(&[[0.02, 0.13], [0.25, 0.17], [0.5, 0.12], [0.75, 0.17], [0.98, 0.13]], WIDTH),
        channel(&[[0.02, 0.47], [0.25, 0.43], [0.5, 0.47], [0.75, 0.43], [0.98, 0.47]], WIDTH),
        channel(&[[0.02, 0.73], [0.25, 0.77], [0.5, 0.73], [0.75, 0.77], [0.98, 0.73]], WIDTH),
        channel(&[[0.65, 0.02], [0.63, 0.25], [0.66, 0.5], [0.64, 0.75], [0.66, 0.98]], WIDTH),
        rect(0.43, 0.33, 0.05, 0.04),
        rect(0.86, 0.64, 0.04, 0.05),
        rect(0.23, 0.93, 0.05, 0.04),
    ]
}

/// Per-cell positive permeability, indexed like [`GridGeometry`] cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PermeabilityField {
    values: Vec<f64>,
}

impl PermeabilityField {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for (cell, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveValue { cell, value });
            }
        }
        Ok(Self { values })
    }

    pub fn uniform(geom: &GridGeometry, value: f64) -> Result<Self> {
        Self::from_values(vec![value; geom.num_cells()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_values(self.values.iter().map(|v| v * c).collect())
    }
}

pub fn realize_field(spec: &FieldSpec, geom: &GridGeometry) -> Result<PermeabilityField> {
    spec.validate()?;
    if let Some(path) = &spec.raster {
        let values = read_raster(path, geom.fine_per_side())?;
        return PermeabilityField::from_values(values);
    }
    let values = (0..geom.num_cells())
        .map(|cell| {
            let (x, y) = geom.cell_center(cell);
            spec.features
                .iter()
                .rev()
                .find(|f| f.covers(x, y))
                .map_or(spec.background, |f| f.contrast() * spec.background)
        })
        .collect();
    PermeabilityField::from_values(values)
}

/// Reads a plain-text grid: a header line `N_f N_f`, then `N_f` rows of
/// `N_f` whitespace-separated values, starting from the bottom row.
pub fn read_raster(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_raster(&text, expected)
}

pub fn parse_raster(text: &str, expected: usize) -> Result<Vec<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty raster".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::InvalidArgument(format!("bad raster header `{header}`"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!("bad raster header `{header}`")));
    }
    if dims[0] != expected || dims[1] != expected {
        return Err(Error::RasterShape {
            expected,
            rows: dims[0],
            cols: dims[1],
        });
    }
    let mut values = Vec::with_capacity(expected * expected);
    let mut rows = 0;
    for line in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::InvalidArgument(format!("bad raster value `{t}`"))))
            .collect::<Result<_>>()?;
        if row.len() != expected {
            return Err(Error::RasterShape {
                expected,
                rows: rows + 1,
                cols: row.len(),
            });
        }
        values.extend(row);
        rows += 1;
    }
    if rows != expected {
        return Err(Error::RasterShape {
            expected,
            rows,
            cols: expected,
        });
    }
    Ok(values)
}

/// Writes per-cell values in the raster layout read by [`parse_raster`].
pub fn format_raster(values: &[f64], side: usize) -> String {
    let mut out = format!("{side} {side}\n");
    for row in values.chunks(side) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Constant(f64),
    PerCell(Vec<f64>),
}

/// Per-cell source density `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField {
    values: Vec<f64>,
}

impl SourceField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Samples `f(x, y)` at cell centers.
    pub fn sample(geom: &GridGeometry, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..geom.num_cells())
            .map(|c| {
                let (x, y) = geom.cell_center(c);
                f(x, y)
            })
            .collect();
        realize_source(SourceKind::PerCell(values), geom)
    }
}

pub fn realize_source(kind: SourceKind, geom: &GridGeometry) -> Result<SourceField> {
    let values = match kind {
        SourceKind::Constant(c) => vec![c; geom.num_cells()],
        SourceKind::PerCell(v) => {
            if v.len() != geom.num_cells() {
                return Err(Error::ShapeMismatch {
                    expected: geom.num_cells(),
                    found: v.len(),
                });
            }
            v
        }
    };
    if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("source is not finite at cell {cell}")));
    }
    Ok(SourceField { values })
}
