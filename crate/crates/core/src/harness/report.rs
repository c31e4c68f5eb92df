use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::format_raster;
use crate::geometry::GridGeometry;
use crate::interface::GlobalSolution;
use crate::local_mixed::monolithic_fine_solve;
use crate::mortar_basis::{basis_candidates, build_mortar_basis, BasisKind};

use super::config::ExperimentConfig;
use super::study::{error_rows, iteration_rows, ErrorRow, IterationRow, SolverKind};
use crate::solvers::Composition;

/// Rows of a run together with what is needed to reproduce them.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub errors: Vec<ErrorRow>,
    pub iterations: Vec<IterationRow>,
    pub echo: String,
    pub config_hash: String,
    pub seed: u64,
    /// Fine solution dumped as `u_field.txt` and `flux_field.txt`.
    pub solution: Option<(GridGeometry, GlobalSolution)>,
}

impl RunReport {
    fn for_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            echo: cfg.canonical_echo()?,
            config_hash: cfg.config_hash()?,
            seed: cfg.seed,
            ..Self::default()
        })
    }
}

pub fn run_error_study(cfg: &ExperimentConfig) -> Result<RunReport> {
    let study = cfg.errors.as_ref().ok_or_else(|| Error::Config("missing [errors] section".into()))?;
    let geom = cfg.geometry()?;
    let source = cfg.source(&geom)?;
    let mut report = RunReport::for_config(cfg)?;
    for &eta in &cfg.contrasts {
        let kappa = cfg.permeability(&geom, eta)?;
        let rows = error_rows(&geom, &kappa, &source, eta, &study.bases, &study.nb, cfg.seed)
            .map_err(|e| e.context(format!("error study at contrast {eta:e}")))?;
        report.errors.extend(rows);
    }
    Ok(report)
}

pub fn run_precond_study(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.precond.is_none() {
        return Err(Error::Config("missing [precond] section".into()));
    }
    let geom = cfg.geometry()?;
    let source = cfg.source(&geom)?;
    let cases = cfg.precond_cases();
    let opts = cfg.krylov_options();
    let mut report = RunReport::for_config(cfg)?;
    for &eta in &cfg.contrasts {
        let kappa = cfg.permeability(&geom, eta)?;
        let (rows, _) = iteration_rows(&geom, &kappa, &source, eta, &cases, &opts, cfg.seed)
            .map_err(|e| e.context(format!("preconditioner study at contrast {eta:e}")))?;
        report.iterations.extend(rows);
    }
    Ok(report)
}

/// Monolithic fine solve at the first contrast.
pub fn run_fine_solve(cfg: &ExperimentConfig) -> Result<RunReport> {
    let geom = cfg.geometry()?;
    let source = cfg.source(&geom)?;
    let kappa = cfg.permeability(&geom, cfg.contrasts[0])?;
    let sol = monolithic_fine_solve(&geom, &kappa, &source)?;
    let mut report = RunReport::for_config(cfg)?;
    report.solution = Some((geom, sol));
    Ok(report)
}

pub const ERRORS_HEADER: &str = "contrast,basis,nb,e_u,e_q";
pub const ITERATIONS_HEADER: &str = "contrast,coarse,nb,domain,composition,solver,iterations,converged";

pub fn errors_csv(rows: &[ErrorRow]) -> String {
    let mut out = format!("{ERRORS_HEADER}\n");
    for r in rows {
        writeln!(out, "{:.5e},{},{},{:.5e},{:.5e}", r.contrast, r.basis.name(), r.nb, r.e_u, r.e_q).unwrap();
    }
    out
}

pub fn iterations_csv(rows: &[IterationRow]) -> String {
    let mut out = format!("{ITERATIONS_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{:.5e},{},{},{},{},{},{},{}",
            r.contrast,
            r.coarse.name(),
            r.nb,
            r.domain,
            r.composition.name(),
            r.solver.name(),
            r.iterations,
            r.converged
        )
        .unwrap();
    }
    out
}

/// Parses `errors.csv` back into rows; conservation is not stored and reads as NaN.
pub fn parse_errors_csv(text: &str) -> Result<Vec<ErrorRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(ERRORS_HEADER) {
        return Err(Error::Config("errors.csv: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Config(format!("errors.csv line {}: `{line}`", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(ErrorRow {
                contrast: num(f[0])?,
                basis: f[1].parse::<BasisKind>().map_err(|_| bad())?,
                nb: f[2].parse().map_err(|_| bad())?,
                e_u: num(f[3])?,
                e_q: num(f[4])?,
                conservation: f64::NAN,
            })
        })
        .collect()
}

pub fn parse_iterations_csv(text: &str) -> Result<Vec<IterationRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(ITERATIONS_HEADER) {
        return Err(Error::Config("iterations.csv: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Config(format!("iterations.csv line {}: `{line}`", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad());
            }
            let composition = match f[4] {
                "additive" => Composition::Additive,
                "hybrid" => Composition::Hybrid,
                "hybrid_literal" => Composition::HybridLiteral,
                _ => return Err(bad()),
            };
            let solver = match f[5] {
                "pcg" => SolverKind::Pcg,
                "gmres" => SolverKind::Gmres,
                _ => return Err(bad()),
            };
            Ok(IterationRow {
                contrast: f[0].parse().map_err(|_| bad())?,
                coarse: f[1].parse().map_err(|_| bad())?,
                nb: f[2].parse().map_err(|_| bad())?,
                domain: f[3].parse().map_err(|_| bad())?,
                composition,
                solver,
                iterations: f[6].parse().map_err(|_| bad())?,
                converged: f[7].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Cell-centered pressure in the raster layout, bottom row first.
pub fn pressure_grid(geom: &GridGeometry, sol: &GlobalSolution) -> String {
    format_raster(&sol.pressure, geom.fine_per_side())
}

/// One line `x y qx qy` per cell, with the velocity averaged from face fluxes.
pub fn flux_table(geom: &GridGeometry, sol: &GlobalSolution) -> String {
    let mut out = String::from("x y qx qy\n");
    for (c, q) in sol.flux.iter().enumerate() {
        let (x, y) = geom.cell_center(c);
        writeln!(out, "{x:.6} {y:.6} {:.5e} {:.5e}", 0.5 * (q[1] - q[0]), 0.5 * (q[3] - q[2])).unwrap();
    }
    out
}

/// Writes the CSV tables, the config echo and, when present, the field dumps.
pub fn emit_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let write = |name: &str, text: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
    };
    write("errors.csv", &errors_csv(&report.errors))?;
    write("iterations.csv", &iterations_csv(&report.iterations))?;
    write("config.echo", &format!("{}config_hash = \"{}\"\n", report.echo, report.config_hash))?;
    if let Some((geom, sol)) = &report.solution {
        write("u_field.txt", &pressure_grid(geom, sol))?;
        write("flux_field.txt", &flux_table(geom, sol))?;
    }
    Ok(())
}

/// Writes one `basis_<kind>.txt` per basis of the error study, at its
/// largest Nb and first contrast. Each line is `edge mode v_0 v_1 ...`.
pub fn export_bases(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<String>> {
    let study = cfg.errors.as_ref().ok_or_else(|| Error::Config("missing [errors] section".into()))?;
    let nb = study.nb.iter().copied().max().unwrap_or(1);
    let geom = cfg.geometry()?;
    let kappa = cfg.permeability(&geom, cfg.contrasts[0])?;
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for &kind in &study.bases {
        let cands = basis_candidates(&geom, &kappa, kind, cfg.seed)?;
        let basis = build_mortar_basis(&geom, &cands, nb)?;
        let mut out = String::new();
        for e in 0..basis.num_edges() {
            for (m, mode) in basis.modes(e).iter().enumerate() {
                write!(out, "{e} {m}").unwrap();
                for v in mode {
                    write!(out, " {v:.9e}").unwrap();
                }
                out.push('\n');
            }
        }
        let name = format!("basis_{}.txt", kind.name());
        std::fs::write(dir.join(&name), out)?;
        names.push(name);
    }
    std::fs::write(dir.join("config.echo"), format!("{}config_hash = \"{}\"\n", cfg.canonical_echo()?, cfg.config_hash()?))?;
    Ok(names)
}
