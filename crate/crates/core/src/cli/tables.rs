//! Accuracy tables: quantum (mixed and pure register) and RBF classifiers on
//! the moons and circles families at three noise levels, side by side with
//! the published scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetKind, ExperimentConfig, RegisterKind};
use crate::datasets::{make_circles, make_moons, split, Dataset, PhaseScaler};
use crate::error::Result;
use crate::kernel::{quantum_gram, rbf_gram};
use crate::svm::{
    cross_validate, cross_validate_gram, default_rbf_grid, score, train_smo, Label, SmoParams,
    QUANTUM_C_SCAN,
};
use crate::util::{format_sig12, mix_seed};

const PUBLISHED: &str = include_str!("../../fixtures/published_tables.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMethod {
    Mixed,
    Pure,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub method: TableMethod,
    pub label: String,
    pub tolerance: f64,
    /// `[train, test]` per noise level.
    pub scores: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedTable {
    pub family: DatasetKind,
    pub zetas: Vec<f64>,
    pub rows: Vec<PublishedRow>,
}

pub fn published_tables() -> Vec<PublishedTable> {
    serde_json::from_str(PUBLISHED).expect("bundled table fixture parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub family: DatasetKind,
    pub method: TableMethod,
    pub zeta: f64,
    pub train_score: f64,
    pub test_score: f64,
    pub published: [f64; 2],
    pub tolerance: f64,
    pub c: f64,
    pub gamma: Option<f64>,
    pub cv_score: f64,
    pub n_support: usize,
    pub converged: bool,
    pub clamped_denominators: u64,
}

impl Cell {
    pub fn diffs(&self) -> [f64; 2] {
        [
            self.train_score - self.published[0],
            self.test_score - self.published[1],
        ]
    }

    pub fn within_tolerance(&self) -> bool {
        // Scores that land exactly on the edge count as inside.
        self.diffs().iter().all(|d| d.abs() <= self.tolerance + 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablesOutput {
    pub cells: Vec<Cell>,
    /// Output file name to contents.
    pub files: BTreeMap<String, String>,
}

impl TablesOutput {
    pub fn cell(&self, family: DatasetKind, method: TableMethod, zeta: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.family == family && c.method == method && c.zeta == zeta)
    }
}

struct Prepared {
    raw_train: Vec<[f64; 2]>,
    raw_test: Vec<[f64; 2]>,
    phase_train: Vec<[f64; 2]>,
    phase_test: Vec<[f64; 2]>,
    y_train: Vec<Label>,
    y_test: Vec<Label>,
}

pub(crate) fn generate(cfg: &ExperimentConfig, family: DatasetKind, zeta: f64, seed: u64) -> Result<Dataset> {
    match family {
        DatasetKind::Moons => make_moons(cfg.n, zeta, seed),
        DatasetKind::Circles => make_circles(cfg.n, zeta, cfg.factor, seed),
    }
}

fn prepare(cfg: &ExperimentConfig, family: DatasetKind, zeta: f64, data_seed: u64) -> Result<Prepared> {
    let ds = generate(cfg, family, zeta, data_seed)?;
    let (train, test) = split(&ds, cfg.train_fraction, mix_seed(data_seed, 1, 0))?;
    let scaler = PhaseScaler::fit_with_interval(&train, cfg.phase_interval)?;
    Ok(Prepared {
        phase_train: scaler.apply(&train).points,
        phase_test: scaler.apply(&test).points,
        raw_train: train.points,
        raw_test: test.points,
        y_train: train.labels,
        y_test: test.labels,
    })
}

fn smo_params(cfg: &ExperimentConfig, c: f64) -> SmoParams {
    SmoParams {
        c,
        tol: cfg.tol,
        max_passes: cfg.max_passes,
        seed: cfg.seed,
    }
}

fn quantum_cell(cfg: &ExperimentConfig, p: &Prepared, register: RegisterKind) -> Result<(f64, f64, f64, f64, usize, bool, u64)> {
    let prep = register.prep();
    let mode = cfg.gram_mode()?;
    let g_train = quantum_gram(&p.phase_train, &p.phase_train, cfg.r, &prep, mode)?;
    let g_test = quantum_gram(&p.phase_test, &p.phase_train, cfg.r, &prep, mode)?;
    let cs = match &cfg.svm_c {
        super::config::CSetting::Scan(cs) => cs.clone(),
        super::config::CSetting::Single(_) => QUANTUM_C_SCAN.to_vec(),
    };
    let cv = cross_validate_gram(&g_train, &p.y_train, cfg.folds, &cs, smo_params(cfg, 1.0))?;
    let model = train_smo(&g_train, &p.y_train, smo_params(cfg, cv.best_c))?;
    Ok((
        score(&model, &g_train, &p.y_train)?,
        score(&model, &g_test, &p.y_test)?,
        cv.best_c,
        cv.best_mean_score,
        model.support_indices.len(),
        model.solver.converged,
        model.solver.clamped_denominators,
    ))
}

fn rbf_cell(cfg: &ExperimentConfig, p: &Prepared) -> Result<(f64, f64, f64, f64, f64, usize, bool)> {
    let cv = cross_validate(&p.raw_train, &p.y_train, cfg.folds, &default_rbf_grid(), cfg.seed)?;
    let (c, gamma) = cv.best;
    let g_train = rbf_gram(&p.raw_train, &p.raw_train, gamma)?;
    let g_test = rbf_gram(&p.raw_test, &p.raw_train, gamma)?;
    let model = train_smo(&g_train, &p.y_train, smo_params(cfg, c))?;
    Ok((
        score(&model, &g_train, &p.y_train)?,
        score(&model, &g_test, &p.y_test)?,
        c,
        gamma,
        cv.best_mean_score,
        model.support_indices.len(),
        model.solver.converged,
    ))
}

/// Runs every cell of both tables. The dataset for each (family, ζ) is
/// generated from a seed derived from `cfg.seed`.
pub fn reproduce_tables(cfg: &ExperimentConfig) -> Result<TablesOutput> {
    cfg.validate()?;
    let tables = published_tables();
    let jobs: Vec<(usize, usize)> = tables
        .iter()
        .enumerate()
        .flat_map(|(t, tab)| (0..tab.zetas.len()).map(move |z| (t, z)))
        .collect();
    let per_job: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|&(t, z)| -> Result<Vec<Cell>> {
            let tab = &tables[t];
            let zeta = tab.zetas[z];
            let prepared = prepare(cfg, tab.family, zeta, mix_seed(cfg.seed, t as u64, z as u64))?;
            let mut cells = Vec::new();
            for row in &tab.rows {
                let base = Cell {
                    family: tab.family,
                    method: row.method,
                    zeta,
                    train_score: 0.0,
                    test_score: 0.0,
                    published: row.scores[z],
                    tolerance: row.tolerance,
                    c: 0.0,
                    gamma: None,
                    cv_score: 0.0,
                    n_support: 0,
                    converged: true,
                    clamped_denominators: 0,
                };
                let cell = match row.method {
                    TableMethod::Mixed | TableMethod::Pure => {
                        let reg = if row.method == TableMethod::Mixed {
                            RegisterKind::Mixed
                        } else {
                            RegisterKind::Pure
                        };
                        let (tr, te, c, cv, ns, conv, cl) = quantum_cell(cfg, &prepared, reg)?;
                        Cell {
                            train_score: tr,
                            test_score: te,
                            c,
                            cv_score: cv,
                            n_support: ns,
                            converged: conv,
                            clamped_denominators: cl,
                            ..base
                        }
                    }
                    TableMethod::Rbf => {
                        let (tr, te, c, g, cv, ns, conv) = rbf_cell(cfg, &prepared)?;
                        Cell {
                            train_score: tr,
                            test_score: te,
                            c,
                            gamma: Some(g),
                            cv_score: cv,
                            n_support: ns,
                            converged: conv,
                            ..base
                        }
                    }
                };
                cells.push(cell);
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;
    let cells: Vec<Cell> = per_job.into_iter().flatten().collect();

    let mut files = BTreeMap::new();
    for tab in &tables {
        let name = family_name(tab.family);
        files.insert(format!("{name}.csv"), wide_csv(tab, &cells));
        files.insert(format!("{name}.txt"), aligned_text(tab, &cells));
    }
    files.insert("cells.csv".to_string(), long_csv(&cells));
    Ok(TablesOutput { cells, files })
}

pub fn family_name(f: DatasetKind) -> &'static str {
    match f {
        DatasetKind::Moons => "moons",
        DatasetKind::Circles => "circles",
    }
}

fn row_cells<'a>(tab: &PublishedTable, row: &PublishedRow, cells: &'a [Cell]) -> Vec<&'a Cell> {
    tab.zetas
        .iter()
        .filter_map(|&z| {
            cells
                .iter()
                .find(|c| c.family == tab.family && c.method == row.method && c.zeta == z)
        })
        .collect()
}

fn max_abs_diff(cells: &[&Cell]) -> f64 {
    cells
        .iter()
        .flat_map(|c| c.diffs())
        .fold(0.0, |m, d| m.max(d.abs()))
}

/// One row per method, train/test columns per noise level, as in the
/// published layout; `published` rows follow, then the largest deviation.
fn wide_csv(tab: &PublishedTable, cells: &[Cell]) -> String {
    let mut s = String::from("row");
    for z in &tab.zetas {
        let z = format_sig12(*z);
        write!(s, ",zeta={z} train,zeta={z} test").unwrap();
    }
    s.push_str(",max_abs_diff\n");
    for row in &tab.rows {
        let rc = row_cells(tab, row, cells);
        s.push_str(&row.label);
        for c in &rc {
            write!(s, ",{},{}", format_sig12(c.train_score), format_sig12(c.test_score)).unwrap();
        }
        writeln!(s, ",{}", format_sig12(max_abs_diff(&rc))).unwrap();
    }
    for row in &tab.rows {
        write!(s, "{} (published)", row.label).unwrap();
        for p in &row.scores {
            write!(s, ",{},{}", format_sig12(p[0]), format_sig12(p[1])).unwrap();
        }
        s.push_str(",\n");
    }
    s
}

fn aligned_text(tab: &PublishedTable, cells: &[Cell]) -> String {
    let mut s = String::new();
    write!(s, "{:<22}", family_name(tab.family)).unwrap();
    for z in &tab.zetas {
        write!(s, "{:<18}", format!("zeta={}", format_sig12(*z))).unwrap();
    }
    s.push('\n');
    write!(s, "{:<22}", "").unwrap();
    for _ in &tab.zetas {
        write!(s, "{:<9}{:<9}", "train", "test").unwrap();
    }
    s.push_str("max|diff|\n");
    for row in &tab.rows {
        let rc = row_cells(tab, row, cells);
        write!(s, "{:<22}", row.label).unwrap();
        for c in &rc {
            write!(s, "{:<9.4}{:<9.4}", c.train_score, c.test_score).unwrap();
        }
        writeln!(s, "{:.4}", max_abs_diff(&rc)).unwrap();
        write!(s, "{:<22}", "  published").unwrap();
        for p in &row.scores {
            write!(s, "{:<9.2}{:<9.2}", p[0], p[1]).unwrap();
        }
        s.push('\n');
    }
    s
}

fn long_csv(cells: &[Cell]) -> String {
    let mut s = String::from(
        "family,method,zeta,train,test,published_train,published_test,diff_train,diff_test,tolerance,within_tolerance,c,gamma,cv_score,n_support,converged\n",
    );
    for c in cells {
        let d = c.diffs();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            family_name(c.family),
            match c.method {
                TableMethod::Mixed => "mixed",
                TableMethod::Pure => "pure",
                TableMethod::Rbf => "rbf",
            },
            format_sig12(c.zeta),
            format_sig12(c.train_score),
            format_sig12(c.test_score),
            format_sig12(c.published[0]),
            format_sig12(c.published[1]),
            format_sig12(d[0]),
            format_sig12(d[1]),
            format_sig12(c.tolerance),
            c.within_tolerance(),
            format_sig12(c.c),
            c.gamma.map(format_sig12).unwrap_or_default(),
            format_sig12(c.cv_score),
            c.n_support,
            c.converged,
        )
        .unwrap();
    }
    s
}
