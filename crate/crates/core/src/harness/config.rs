use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{realize_field, realize_source, FieldPreset, FieldSpec, PermeabilityField, SourceField, SourceKind};
use crate::geometry::GridGeometry;
use crate::mortar_basis::BasisKind;
use crate::solvers::{Composition, KrylovOptions};

use super::study::{PrecondCase, SolverKind};

/// Declarative description of one experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub field: FieldConfig,
    #[serde(default)]
    pub source: SourceConfig,
    /// Contrast values; each one rescales every feature of the field.
    #[serde(default = "default_contrasts")]
    pub contrasts: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub errors: Option<ErrorStudyConfig>,
    #[serde(default)]
    pub precond: Option<PrecondStudyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Coarse blocks per side.
    pub coarse: usize,
    /// Fine cells per block side.
    pub fine: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub preset: Option<FieldPreset>,
    #[serde(default)]
    pub spec: Option<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub value: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorStudyConfig {
    pub bases: Vec<BasisKind>,
    pub nb: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridForm {
    #[default]
    Standard,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecondStudyConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(default)]
    pub hybrid_form: HybridForm,
    pub cases: Vec<CaseConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub coarse: BasisKind,
    pub nb: usize,
    pub domain: usize,
    pub composition: Composition,
    pub solver: SolverKind,
}

fn default_contrasts() -> Vec<f64> {
    vec![1e4]
}

fn default_tol() -> f64 {
    1e-7
}

fn default_max_iter() -> usize {
    1000
}

fn default_restart() -> usize {
    2
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative raster path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(raster) = cfg.field.spec.as_mut().and_then(|s| s.raster.as_mut()) {
            if raster.is_relative() {
                *raster = path.parent().unwrap_or(Path::new(".")).join(&*raster);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        GridGeometry::new(self.geometry.coarse, self.geometry.fine)?;
        match (&self.field.preset, &self.field.spec) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("[field] needs exactly one of `preset` or `spec`".into())),
        }
        if self.contrasts.is_empty() {
            return Err(Error::Config("`contrasts` is empty".into()));
        }
        if let Some(c) = self.contrasts.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::Config(format!("contrast must be positive, got {c}")));
        }
        if self.raster().is_some() && self.contrasts.len() > 1 {
            return Err(Error::Config("a raster field takes a single contrast entry".into()));
        }
        if !self.source.value.is_finite() {
            return Err(Error::Config("source value is not finite".into()));
        }
        let n = self.geometry.fine;
        if let Some(e) = &self.errors {
            if e.bases.is_empty() || e.nb.is_empty() {
                return Err(Error::Config("[errors] needs non-empty `bases` and `nb`".into()));
            }
            if let Some(&nb) = e.nb.iter().find(|&&nb| nb == 0 || nb > n) {
                return Err(Error::Config(format!("Nb = {nb} outside 1..={n}")));
            }
        }
        if let Some(p) = &self.precond {
            if !(p.tol > 0.0) || p.max_iter == 0 || p.restart == 0 {
                return Err(Error::Config("[precond] needs tol > 0, max_iter >= 1, restart >= 1".into()));
            }
            for c in &p.cases {
                if c.nb == 0 || c.nb > n {
                    return Err(Error::Config(format!("Nb = {} outside 1..={n}", c.nb)));
                }
                if !(1..=4).contains(&c.domain) {
                    return Err(Error::Config(format!("local domain {} outside 1..=4", c.domain)));
                }
                if c.solver == SolverKind::Pcg && c.domain > 1 {
                    return Err(Error::NonSymmetricPcg { domain: c.domain });
                }
            }
        }
        Ok(())
    }

    fn raster(&self) -> Option<&PathBuf> {
        self.field.spec.as_ref().and_then(|s| s.raster.as_ref())
    }

    pub fn geometry(&self) -> Result<GridGeometry> {
        GridGeometry::new(self.geometry.coarse, self.geometry.fine)
    }

    /// Permeability at contrast `eta`.
    pub fn permeability(&self, geom: &GridGeometry, eta: f64) -> Result<PermeabilityField> {
        let spec = match (&self.field.preset, &self.field.spec) {
            (Some(p), _) => p.spec(eta),
            (None, Some(s)) if s.raster.is_some() => s.clone(),
            (None, Some(s)) => s.with_contrast(eta),
            (None, None) => return Err(Error::Config("no field given".into())),
        };
        realize_field(&spec, geom)
    }

    pub fn source(&self, geom: &GridGeometry) -> Result<SourceField> {
        realize_source(SourceKind::Constant(self.source.value), geom)
    }

    pub fn krylov_options(&self) -> KrylovOptions {
        match &self.precond {
            Some(p) => KrylovOptions {
                tol: p.tol,
                max_iter: p.max_iter,
                restart: p.restart,
            },
            None => KrylovOptions::default(),
        }
    }

    pub fn precond_cases(&self) -> Vec<PrecondCase> {
        let Some(p) = &self.precond else { return Vec::new() };
        p.cases
            .iter()
            .map(|c| PrecondCase {
                coarse: c.coarse,
                nb: c.nb,
                domain: c.domain,
                composition: match (c.composition, p.hybrid_form) {
                    (Composition::Hybrid, HybridForm::Literal) => Composition::HybridLiteral,
                    (comp, _) => comp,
                },
                solver: c.solver,
            })
            .collect()
    }

    /// Sorted `key = value` lines; every value is a TOML literal, so the
    /// echo parses back to the same config.
    pub fn canonical_echo(&self) -> Result<String> {
        let value = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut lines = BTreeMap::new();
        flatten("", &value, &mut lines);
        Ok(lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect())
    }

    pub fn config_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical_echo()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut BTreeMap<String, String>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf.to_string());
        }
    }
}
