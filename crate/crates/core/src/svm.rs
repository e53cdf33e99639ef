//! Soft-margin kernel SVM on precomputed Gram matrices.
//!
//! The dual
//!
//! ```text
//! max  Σαᵢ − ½ Σᵢⱼ αᵢαⱼ yᵢyⱼ Kᵢⱼ    s.t. 0 ≤ αᵢ ≤ C,  Σ αᵢyᵢ = 0
//! ```
//!
//! is solved by sequential minimal optimization with second-order
//! working-set selection. Indefinite Grams are accepted: a non-positive
//! curvature along the chosen pair is replaced by a tiny positive constant
//! and counted in the solver metadata.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{rbf_gram, GramMatrix};

/// Class label, `+1` or `-1`.
pub type Label = i8;

/// Curvature floor for non-positive pair denominators.
pub const TAU: f64 = 1e-12;
/// `αᵢ` above this counts as a support vector.
pub const SUPPORT_TOL: f64 = 1e-8;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 10;
/// Absolute bound on solver sweeps, whatever the progress.
const MAX_TOTAL_PASSES: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    /// Sweeps (of `n` pair updates each) allowed with neither the KKT gap
    /// nor the dual objective improving.
    pub max_passes: usize,
    /// Orders the index scan, which only matters for ties.
    pub seed: u64,
}

impl SmoParams {
    pub fn new(c: f64) -> Self {
        SmoParams {
            c,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub iterations: u64,
    pub passes: u64,
    pub converged: bool,
    /// Final maximal KKT violation `m(α) − M(α)`.
    pub kkt_gap: f64,
    pub clamped_denominators: u64,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    pub labels: Vec<Label>,
    pub hyper_c: f64,
    pub solver: SolverInfo,
}

pub fn validate_labels(labels: &[Label]) -> Result<()> {
    if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::invalid(format!("labels must be +1 or -1, got {bad}")));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::invalid("training labels must contain both classes"));
    }
    Ok(())
}

/// `Σαᵢ − ½ Σᵢⱼ αᵢαⱼ yᵢyⱼ Kᵢⱼ`.
pub fn dual_objective(gram: &GramMatrix, labels: &[Label], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let row = gram.row(i);
        let yi = labels[i] as f64;
        let mut s = 0.0;
        for j in 0..n {
            s += alphas[j] * labels[j] as f64 * row[j];
        }
        quad += alphas[i] * yi * s;
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

struct Smo<'a> {
    k: &'a GramMatrix,
    y: Vec<f64>,
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    order: Vec<usize>,
}

impl Smo<'_> {
    fn in_up(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] < self.c) || (self.y[t] < 0.0 && self.alpha[t] > 0.0)
    }

    fn in_low(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] > 0.0) || (self.y[t] < 0.0 && self.alpha[t] < self.c)
    }

    /// Second-order working-set selection; `None` once the gap is below `tol`.
    /// Also returns the current gap.
    fn select(&self, tol: f64) -> (Option<(usize, usize)>, f64) {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for &t in &self.order {
            if self.in_up(t) {
                let v = -self.y[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            return (None, 0.0);
        };
        let kii = self.k.get(i, i);
        let row_i = self.k.row(i);
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for &t in &self.order {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.y[t] * self.grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let mut a = kii + self.k.get(t, t) - 2.0 * row_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let score = -(b * b) / a;
                if score < best {
                    best = score;
                    j_sel = Some(t);
                }
            }
        }
        let gap = gmax - gmin;
        if gap < tol {
            return (None, gap);
        }
        (j_sel.map(|j| (i, j)), gap)
    }

    /// Analytic two-variable update. Returns whether the curvature was clamped.
    fn update(&mut self, i: usize, j: usize) -> bool {
        let (yi, yj) = (self.y[i], self.y[j]);
        let kij = self.k.get(i, j);
        let (kii, kjj) = (self.k.get(i, i), self.k.get(j, j));
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let mut clamped = false;
        if yi != yj {
            let mut quad = kii + kjj - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
                clamped = true;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = old_i - old_j;
            let (mut ai, mut aj) = (old_i + delta, old_j + delta);
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
            self.alpha[i] = ai;
            self.alpha[j] = aj;
        } else {
            let mut quad = kii + kjj - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
                clamped = true;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = old_i + old_j;
            let (mut ai, mut aj) = (old_i - delta, old_j + delta);
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
            self.alpha[i] = ai;
            self.alpha[j] = aj;
        }

        let di = (self.alpha[i] - old_i) * yi;
        let dj = (self.alpha[j] - old_j) * yj;
        let (row_i, row_j) = (self.k.row(i), self.k.row(j));
        for t in 0..self.grad.len() {
            self.grad[t] += self.y[t] * (row_i[t] * di + row_j[t] * dj);
        }
        clamped
    }

    /// Dual objective from the maintained gradient, `−½ Σ αᵢ(Gᵢ − 1)`.
    fn objective(&self) -> f64 {
        -0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }

    /// Offset from free support vectors, or the midpoint of the KKT bounds.
    fn bias(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut free = 0usize;
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            if self.alpha[t] >= self.c {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.alpha[t] <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        let rho = if free > 0 {
            free_sum / free as f64
        } else {
            0.5 * (ub + lb)
        };
        -rho
    }
}

/// Trains on a square Gram matrix.
pub fn train_smo(gram: &GramMatrix, labels: &[Label], params: SmoParams) -> Result<SvmModel> {
    if !gram.is_square() {
        return Err(Error::dims(
            "train_smo",
            format!("Gram must be square, got {}x{}", gram.rows(), gram.cols()),
        ));
    }
    if labels.len() != gram.rows() {
        return Err(Error::dims(
            "train_smo",
            format!("{} labels for a {}-sample Gram", labels.len(), gram.rows()),
        ));
    }
    validate_labels(labels)?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) || params.max_passes == 0 {
        return Err(Error::invalid("tol must be positive and max_passes at least 1"));
    }

    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let mut smo = Smo {
        k: gram,
        y: labels.iter().map(|&l| l as f64).collect(),
        c: params.c,
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
        order,
    };

    let mut iterations = 0u64;
    let mut clamped = 0u64;
    let mut best_gap = f64::INFINITY;
    let mut best_objective = 0.0f64;
    let mut stale_passes = 0usize;
    let mut passes = 0u64;
    let mut converged = false;
    let mut gap;
    loop {
        let (pair, g) = smo.select(params.tol);
        gap = g;
        let Some((i, j)) = pair else {
            converged = gap < params.tol;
            break;
        };
        if smo.update(i, j) {
            clamped += 1;
        }
        iterations += 1;
        if iterations % n as u64 == 0 {
            passes += 1;
            let objective = smo.objective();
            let gap_progress = gap < best_gap * (1.0 - 1e-9);
            let objective_progress = objective > best_objective + 1e-12 * best_objective.abs().max(1.0);
            best_gap = best_gap.min(gap);
            best_objective = best_objective.max(objective);
            if gap_progress || objective_progress {
                stale_passes = 0;
            } else {
                stale_passes += 1;
            }
            if stale_passes >= params.max_passes || passes as usize >= MAX_TOTAL_PASSES {
                break;
            }
        }
    }

    let bias = smo.bias();
    let alphas = smo.alpha;
    let support_indices = (0..n).filter(|&t| alphas[t] > SUPPORT_TOL).collect();
    let dual = dual_objective(gram, labels, &alphas);
    Ok(SvmModel {
        alphas,
        bias,
        support_indices,
        labels: labels.to_vec(),
        hyper_c: params.c,
        solver: SolverInfo {
            iterations,
            passes,
            converged,
            kkt_gap: gap,
            clamped_denominators: clamped,
            tol: params.tol,
            max_passes: params.max_passes,
            seed: params.seed,
            dual_objective: dual,
        },
    })
}

impl SvmModel {
    pub fn training_size(&self) -> usize {
        self.alphas.len()
    }

    /// `Σᵢ αᵢyᵢkᵢ + b` for a row of kernel values against the training set.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alphas.len() {
            return Err(Error::dims(
                "predict",
                format!(
                    "kernel row has {} entries, model has {} training samples",
                    kernel_row.len(),
                    self.alphas.len()
                ),
            ));
        }
        let s: f64 = self
            .alphas
            .iter()
            .zip(&self.labels)
            .zip(kernel_row)
            .map(|((a, &y), k)| a * y as f64 * k)
            .sum();
        Ok(s + self.bias)
    }

    /// Same sum restricted to the support set.
    pub fn decision_value_sparse(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alphas.len() {
            return Err(Error::dims("predict", "kernel row length mismatch"));
        }
        let s: f64 = self
            .support_indices
            .iter()
            .map(|&i| self.alphas[i] * self.labels[i] as f64 * kernel_row[i])
            .sum();
        Ok(s + self.bias)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        let boxed = self
            .alphas
            .iter()
            .all(|&a| a >= 0.0 && a <= self.hyper_c);
        let eq: f64 = self
            .alphas
            .iter()
            .zip(&self.labels)
            .map(|(a, &y)| a * y as f64)
            .sum();
        boxed && eq.abs() <= tol
    }
}

/// `sign(decision)`, with `sign(0) = +1`.
pub fn predict(model: &SvmModel, kernel_row: &[f64]) -> Result<Label> {
    let d = model.decision_value(kernel_row)?;
    Ok(if d >= 0.0 { 1 } else { -1 })
}

/// Accuracy over the rows of a (test × train) Gram matrix.
pub fn score(model: &SvmModel, gram_cross: &GramMatrix, labels: &[Label]) -> Result<f64> {
    if gram_cross.rows() != labels.len() {
        return Err(Error::dims(
            "score",
            format!("{} Gram rows vs {} labels", gram_cross.rows(), labels.len()),
        ));
    }
    if gram_cross.cols() != model.training_size() {
        return Err(Error::dims(
            "score",
            format!(
                "{} Gram columns vs {} training samples",
                gram_cross.cols(),
                model.training_size()
            ),
        ));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cannot score an empty set"));
    }
    let mut hits = 0usize;
    for (i, &y) in labels.iter().enumerate() {
        if predict(model, gram_cross.row(i))? == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// `(C, γ)` grid points in evaluation order.
    pub grid: Vec<(f64, f64)>,
    /// `fold_scores[g][f]`: validation accuracy of grid point `g` on fold `f`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub best: (f64, f64),
    pub best_index: usize,
    pub best_mean_score: f64,
}

/// Stratified fold assignment: each class is shuffled with the seed and
/// dealt round-robin across folds.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Result<Vec<usize>> {
    validate_labels(labels)?;
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0usize; labels.len()];
    for class in [1, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::invalid(format!(
                "{folds} folds exceed the {} samples of class {class:+}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assign[i] = pos % folds;
        }
    }
    Ok(assign)
}

/// k-fold cross-validation of an RBF-kernel SVM over a `(C, γ)` grid.
///
/// Ties on the mean score go to the earliest grid point.
pub fn cross_validate(
    features: &[[f64; 2]],
    labels: &[Label],
    folds: usize,
    grid: &[(f64, f64)],
    seed: u64,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::invalid("cross-validation grid is empty"));
    }
    if features.len() != labels.len() {
        return Err(Error::dims(
            "cross_validate",
            format!("{} features vs {} labels", features.len(), labels.len()),
        ));
    }
    let assign = stratified_folds(labels, folds, seed)?;

    // One Gram per (fold, γ); every C for that γ reuses it.
    let mut gammas: Vec<f64> = Vec::new();
    for &(_, g) in grid {
        if !gammas.iter().any(|&x| x == g) {
            gammas.push(g);
        }
    }
    let jobs: Vec<(usize, usize)> = (0..folds)
        .flat_map(|f| (0..gammas.len()).map(move |g| (f, g)))
        .collect();
    let results: Vec<Vec<(usize, f64)>> = jobs
        .par_iter()
        .map(|&(f, gi)| -> Result<Vec<(usize, f64)>> {
            let gamma = gammas[gi];
            let train_idx: Vec<usize> = (0..labels.len()).filter(|&i| assign[i] != f).collect();
            let val_idx: Vec<usize> = (0..labels.len()).filter(|&i| assign[i] == f).collect();
            let xtr: Vec<[f64; 2]> = train_idx.iter().map(|&i| features[i]).collect();
            let xva: Vec<[f64; 2]> = val_idx.iter().map(|&i| features[i]).collect();
            let ytr: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
            let yva: Vec<Label> = val_idx.iter().map(|&i| labels[i]).collect();
            let g_train = rbf_gram(&xtr, &xtr, gamma)?;
            let g_val = rbf_gram(&xva, &xtr, gamma)?;
            let mut out = Vec::new();
            for (k, &(c, g)) in grid.iter().enumerate() {
                if g != gamma {
                    continue;
                }
                let mut p = SmoParams::new(c);
                p.seed = seed;
                let model = train_smo(&g_train, &ytr, p)?;
                out.push((k, score(&model, &g_val, &yva)?));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut fold_scores = vec![vec![0.0; folds]; grid.len()];
    for (&(f, _), res) in jobs.iter().zip(results) {
        for (k, s) in res {
            fold_scores[k][f] = s;
        }
    }
    let mean_scores: Vec<f64> = fold_scores
        .iter()
        .map(|s| s.iter().sum::<f64>() / folds as f64)
        .collect();
    let mut best_index = 0;
    for (k, &m) in mean_scores.iter().enumerate() {
        if m > mean_scores[best_index] {
            best_index = k;
        }
    }
    Ok(CvReport {
        grid: grid.to_vec(),
        fold_scores,
        best: grid[best_index],
        best_index,
        best_mean_score: mean_scores[best_index],
        mean_scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CScanReport {
    pub cs: Vec<f64>,
    /// `fold_scores[k][f]`: validation accuracy of `cs[k]` on fold `f`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub best_c: f64,
    pub best_index: usize,
    pub best_mean_score: f64,
}

/// k-fold cross-validation over C on a precomputed square Gram matrix.
///
/// Ties on the mean score go to the earliest C in the list.
pub fn cross_validate_gram(
    gram: &GramMatrix,
    labels: &[Label],
    folds: usize,
    cs: &[f64],
    params: SmoParams,
) -> Result<CScanReport> {
    if cs.is_empty() {
        return Err(Error::invalid("C scan is empty"));
    }
    if !gram.is_square() || gram.rows() != labels.len() {
        return Err(Error::dims(
            "cross_validate_gram",
            format!("{}x{} Gram for {} labels", gram.rows(), gram.cols(), labels.len()),
        ));
    }
    let assign = stratified_folds(labels, folds, params.seed)?;
    let parts: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let tr = (0..labels.len()).filter(|&i| assign[i] != f).collect();
            let va = (0..labels.len()).filter(|&i| assign[i] == f).collect();
            (tr, va)
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cs.len())
        .flat_map(|k| (0..folds).map(move |f| (k, f)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, f)| -> Result<f64> {
            let (tr, va) = &parts[f];
            let ytr: Vec<Label> = tr.iter().map(|&i| labels[i]).collect();
            let yva: Vec<Label> = va.iter().map(|&i| labels[i]).collect();
            let model = train_smo(&gram.select(tr, tr), &ytr, SmoParams { c: cs[k], ..params })?;
            score(&model, &gram.select(va, tr), &yva)
        })
        .collect::<Result<_>>()?;
    let fold_scores: Vec<Vec<f64>> = scores.chunks(folds).map(|c| c.to_vec()).collect();
    let mean_scores: Vec<f64> = fold_scores
        .iter()
        .map(|s| s.iter().sum::<f64>() / folds as f64)
        .collect();
    let mut best_index = 0;
    for (k, &m) in mean_scores.iter().enumerate() {
        if m > mean_scores[best_index] {
            best_index = k;
        }
    }
    Ok(CScanReport {
        cs: cs.to_vec(),
        fold_scores,
        best_c: cs[best_index],
        best_index,
        best_mean_score: mean_scores[best_index],
        mean_scores,
    })
}

/// `C ∈ {0.1, 1, 10, 100} × γ ∈ {0.1, 0.5, 1, 2, 5, 10}`.
pub fn default_rbf_grid() -> Vec<(f64, f64)> {
    let cs = [0.1, 1.0, 10.0, 100.0];
    let gammas = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    cs.iter()
        .flat_map(|&c| gammas.iter().map(move |&g| (c, g)))
        .collect()
}

/// C values scanned for the quantum kernels.
pub const QUANTUM_C_SCAN: [f64; 5] = [0.1, 1.0, 10.0, 100.0, 1000.0];
