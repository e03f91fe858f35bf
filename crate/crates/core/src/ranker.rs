//! Pairwise ranker: ℓ2-regularized logistic regression on pair-difference
//! vectors, cross-validated over a fixed grid of regularization strengths,
//! plus held-out evaluation by prominence slice and by debate type.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DebateType;
use crate::error::{Error, Result};

const MODEL_FORMAT: &str = "debate-highlights-model";
const MODEL_VERSION: u32 = 1;

/// Above this many parameters the Hessian gets expensive; use L-BFGS.
const NEWTON_MAX_DIM: usize = 300;

/// 2^x for x = −8 + 9i/19, i = 0..19.
pub fn l2_grid() -> Vec<f64> {
    (0..20).map(|i| 2f64.powf(-8.0 + 9.0 * i as f64 / 19.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Convergence when the gradient max-norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_grid: l2_grid(),
            folds: 5,
            seed: 0,
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2_grid.is_empty() || !self.l2_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("l2 grid must be non-empty and strictly increasing".into()));
        }
        if self.l2_grid.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput("l2 values must be finite and nonnegative".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput("need at least 2 folds".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Fail on the first NaN or infinity, naming feature and row.
pub fn check_finite(x: &[Vec<f64>], names: &[String]) -> Result<()> {
    for (row, r) in x.iter().enumerate() {
        if r.len() != names.len() {
            return Err(Error::InvalidInput(format!("row {row} has {} values, expected {}", r.len(), names.len())));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { feature: names[j].clone(), row });
        }
    }
    Ok(())
}

/// Z-scoring with training-set statistics. Constant features are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub kept: Vec<usize>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub dropped: Vec<String>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>], names: &[String]) -> Scaler {
        let n = x.len().max(1) as f64;
        let mut s = Scaler { kept: vec![], mean: vec![], sd: vec![], dropped: vec![] };
        for (j, name) in names.iter().enumerate() {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd > 1e-12 * mean.abs().max(1.0) {
                s.kept.push(j);
                s.mean.push(mean);
                s.sd.push(sd);
            } else {
                s.dropped.push(name.clone());
            }
        }
        s
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&j, (m, s))| (row[j] - m) / s)
            .collect()
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform(r)).collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean logistic loss plus λ‖w‖²/2 over parameters `[w..., b]`; the
/// intercept is not penalized.
pub struct Objective<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [bool],
    pub l2: f64,
}

impl Objective<'_> {
    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len) + 1
    }

    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let d = theta.len() - 1;
        self.x
            .iter()
            .map(|r| r.iter().zip(&theta[..d]).map(|(a, b)| a * b).sum::<f64>() + theta[d])
            .collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = theta.len() - 1;
        let n = self.x.len() as f64;
        let loss: f64 = self
            .margins(theta)
            .iter()
            .zip(self.y)
            .map(|(&z, &y)| softplus(z) - if y { z } else { 0.0 })
            .sum::<f64>()
            / n;
        loss + 0.5 * self.l2 * theta[..d].iter().map(|w| w * w).sum::<f64>()
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = theta.len() - 1;
        let n = self.x.len() as f64;
        let mut g = vec![0.0; d + 1];
        for (r, (z, &y)) in self.x.iter().zip(self.margins(theta).iter().zip(self.y)) {
            let e = sigmoid(*z) - if y { 1.0 } else { 0.0 };
            for (gj, xj) in g.iter_mut().zip(r) {
                *gj += e * xj;
            }
            g[d] += e;
        }
        for (j, gj) in g.iter_mut().enumerate() {
            *gj /= n;
            if j < d {
                *gj += self.l2 * theta[j];
            }
        }
        g
    }

    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let d = theta.len() - 1;
        let n = self.x.len() as f64;
        let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
        let mut xt = vec![0.0; d + 1];
        for (r, z) in self.x.iter().zip(self.margins(theta)) {
            let p = sigmoid(z);
            let s = p * (1.0 - p) / n;
            xt[..d].copy_from_slice(r);
            xt[d] = 1.0;
            for a in 0..=d {
                let sa = s * xt[a];
                if sa == 0.0 {
                    continue;
                }
                for b in a..=d {
                    h[(a, b)] += sa * xt[b];
                }
            }
        }
        for a in 0..=d {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
            if a < d {
                h[(a, a)] += self.l2;
            }
        }
        h
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Armijo backtracking along `dir`; returns the accepted step and value.
fn backtrack(obj: &Objective, theta: &[f64], f0: f64, g: &[f64], dir: &[f64]) -> Option<(Vec<f64>, f64)> {
    let slope = dot(g, dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut step = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t + step * d).collect();
        let f = obj.value(&cand);
        if f <= f0 + 1e-4 * step * slope {
            return Some((cand, f));
        }
        step *= 0.5;
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_max: f64,
}

fn newton(obj: &Objective, tol: f64, max_iter: usize) -> (Vec<f64>, usize, f64) {
    let dim = obj.dim();
    let mut theta = vec![0.0; dim];
    let mut f = obj.value(&theta);
    for it in 0..max_iter {
        let g = obj.gradient(&theta);
        let gm = max_abs(&g);
        if gm <= tol {
            return (theta, it, gm);
        }
        let h = obj.hessian(&theta);
        let rhs = DVector::from_vec(g.iter().map(|v| -v).collect());
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&rhs),
            None => {
                let ridge = h + DMatrix::identity(dim, dim) * 1e-10;
                match ridge.cholesky() {
                    Some(c) => c.solve(&rhs),
                    None => rhs.clone(),
                }
            }
        };
        let dir: Vec<f64> = step.iter().copied().collect();
        match backtrack(obj, &theta, f, &g, &dir).or_else(|| backtrack(obj, &theta, f, &g, &rhs.iter().copied().collect::<Vec<_>>())) {
            Some((t, fv)) => {
                theta = t;
                f = fv;
            }
            None => return (theta.clone(), it, gm),
        }
    }
    let gm = max_abs(&obj.gradient(&theta));
    (theta, max_iter, gm)
}

fn lbfgs(obj: &Objective, tol: f64, max_iter: usize) -> (Vec<f64>, usize, f64) {
    const MEMORY: usize = 10;
    let dim = obj.dim();
    let mut theta = vec![0.0; dim];
    let mut f = obj.value(&theta);
    let mut g = obj.gradient(&theta);
    let mut hist: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    for it in 0..max_iter {
        let gm = max_abs(&g);
        if gm <= tol {
            return (theta, it, gm);
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = hist.back().map_or(1.0 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0), |(s, y, _)| {
            dot(s, y) / dot(y, y)
        });
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let (next, fv) = match backtrack(obj, &theta, f, &g, &dir) {
            Some(r) => r,
            None => {
                hist.clear();
                dir = g.iter().map(|v| -v).collect();
                match backtrack(obj, &theta, f, &g, &dir) {
                    Some(r) => r,
                    None => return (theta, it, gm),
                }
            }
        };
        let g_next = obj.gradient(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-20 {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        theta = next;
        f = fv;
        g = g_next;
    }
    let gm = max_abs(&g);
    (theta, max_iter, gm)
}

/// Minimize the regularized loss on already standardized rows.
pub fn fit(x: &[Vec<f64>], y: &[bool], l2: f64, tol: f64, max_iter: usize) -> Result<Fit> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if !(l2 >= 0.0) {
        return Err(Error::InvalidInput(format!("l2 = {l2} must be nonnegative")));
    }
    for (row, r) in x.iter().enumerate() {
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { feature: format!("column {j}"), row });
        }
    }
    let obj = Objective { x, y, l2 };
    let (theta, iterations, grad_max) = if obj.dim() <= NEWTON_MAX_DIM {
        newton(&obj, tol, max_iter)
    } else {
        lbfgs(&obj, tol, max_iter.max(2000))
    };
    let d = theta.len() - 1;
    let converged = grad_max <= tol;
    if !converged {
        log::warn!("optimizer stopped after {iterations} iterations with gradient max-norm {grad_max:.3e}");
    }
    Ok(Fit {
        weights: theta[..d].to_vec(),
        intercept: theta[d],
        iterations,
        converged,
        grad_max,
    })
}

fn fingerprint(x: &[Vec<f64>], y: &[bool]) -> String {
    let mut h = Sha256::new();
    for (r, &l) in x.iter().zip(y) {
        for v in r {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([l as u8]);
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub l2: f64,
    pub mean_accuracy: f64,
    pub fold_accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format: String,
    pub version: u32,
    pub schema_id: String,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    /// One weight per kept feature, in standardized units.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    pub training_fingerprint: String,
    pub cv: Vec<CvRow>,
}

impl Model {
    pub fn margin(&self, row: &[f64]) -> f64 {
        dot(&self.scaler.transform(row), &self.weights) + self.intercept
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    /// Label 1 (first member is the highlight) iff σ ≥ 0.5.
    pub fn predict(&self, row: &[f64]) -> bool {
        self.probability(row) >= 0.5
    }

    /// Weight per original feature; dropped features get 0.
    pub fn full_weights(&self) -> Vec<(String, f64)> {
        let mut w = vec![0.0; self.feature_names.len()];
        for (&j, v) in self.scaler.kept.iter().zip(&self.weights) {
            w[j] = *v;
        }
        self.feature_names.iter().cloned().zip(w).collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Model> {
        let m: Model = serde_json::from_str(s).map_err(|e| Error::parse("model", 1, e.to_string()))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!("unsupported model format {} v{}", m.format, m.version)));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Model> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&s)
    }
}

/// Scale with the training rows, then fit at a fixed λ.
pub fn train_fixed(x: &[Vec<f64>], y: &[bool], names: &[String], schema_id: &str, l2: f64, cfg: &TrainConfig) -> Result<Model> {
    check_finite(x, names)?;
    let scaler = Scaler::fit(x, names);
    if !scaler.dropped.is_empty() {
        log::info!("dropped {} constant features: {}", scaler.dropped.len(), scaler.dropped.join(", "));
    }
    let xs = scaler.transform_all(x);
    let f = fit(&xs, y, l2, cfg.tol, cfg.max_iter)?;
    Ok(Model {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        schema_id: schema_id.into(),
        feature_names: names.to_vec(),
        scaler,
        weights: f.weights,
        intercept: f.intercept,
        l2,
        training_fingerprint: fingerprint(x, y),
        cv: vec![],
    })
}

fn accuracy(model: &Model, x: &[Vec<f64>], y: &[bool]) -> f64 {
    let correct = x.iter().zip(y).filter(|(r, &l)| model.predict(r) == l).count();
    correct as f64 / x.len() as f64
}

/// Seeded fold id per row: shuffle, then deal round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

/// K-fold CV accuracy for every grid value; the best λ maximizes mean
/// accuracy, ties going to the larger λ.
pub fn grid_search_cv(x: &[Vec<f64>], y: &[bool], names: &[String], cfg: &TrainConfig) -> Result<(f64, Vec<CvRow>)> {
    cfg.validate()?;
    if x.len() < cfg.folds {
        return Err(Error::InvalidInput(format!("{} training pairs is fewer than {} folds", x.len(), cfg.folds)));
    }
    check_finite(x, names)?;
    let fold = fold_assignment(x.len(), cfg.folds, cfg.seed);
    let jobs: Vec<(usize, usize)> = (0..cfg.l2_grid.len()).flat_map(|g| (0..cfg.folds).map(move |k| (g, k))).collect();
    let accs: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let (mut tx, mut ty, mut vx, mut vy) = (vec![], vec![], vec![], vec![]);
            for (i, (r, &l)) in x.iter().zip(y).enumerate() {
                if fold[i] == k {
                    vx.push(r.clone());
                    vy.push(l);
                } else {
                    tx.push(r.clone());
                    ty.push(l);
                }
            }
            let m = train_fixed(&tx, &ty, names, "", cfg.l2_grid[g], cfg)?;
            Ok(accuracy(&m, &vx, &vy))
        })
        .collect::<Result<_>>()?;
    let table: Vec<CvRow> = cfg
        .l2_grid
        .iter()
        .enumerate()
        .map(|(g, &l2)| {
            let fold_accuracy = accs[g * cfg.folds..(g + 1) * cfg.folds].to_vec();
            let mean_accuracy = fold_accuracy.iter().sum::<f64>() / cfg.folds as f64;
            CvRow { l2, mean_accuracy, fold_accuracy }
        })
        .collect();
    let best = table
        .iter()
        .fold(&table[0], |b, r| if r.mean_accuracy >= b.mean_accuracy { r } else { b });
    Ok((best.l2, table))
}

/// Grid search, then refit on all training rows at the chosen λ.
pub fn train(x: &[Vec<f64>], y: &[bool], names: &[String], schema_id: &str, cfg: &TrainConfig) -> Result<Model> {
    let (l2, table) = grid_search_cv(x, y, names, cfg)?;
    let mut m = train_fixed(x, y, names, schema_id, l2, cfg)?;
    m.cv = table;
    Ok(m)
}

/// A held-out pair ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub x: Vec<f64>,
    pub label: bool,
    pub percentile: u32,
    pub debate_type: DebateType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceAccuracy {
    pub slice: String,
    pub n: usize,
    pub correct: usize,
    /// Absent for an empty slice.
    pub accuracy: Option<f64>,
}

impl SliceAccuracy {
    fn of<'a>(slice: String, items: impl Iterator<Item = (&'a EvalItem, bool)>) -> Self {
        let (mut n, mut correct) = (0, 0);
        for (it, pred) in items {
            n += 1;
            correct += usize::from(pred == it.label);
        }
        SliceAccuracy {
            slice,
            n,
            correct,
            accuracy: (n > 0).then(|| correct as f64 / n as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_id: String,
    pub overall: SliceAccuracy,
    /// Top-x% prominence slices, x = 1..10.
    pub prominence: Vec<SliceAccuracy>,
    pub debate_type: Vec<SliceAccuracy>,
}

pub fn evaluate(model: &Model, items: &[EvalItem], schema_id: &str) -> Result<EvalReport> {
    if schema_id != model.schema_id {
        return Err(Error::SchemaMismatch { expected: model.schema_id.clone(), found: schema_id.into() });
    }
    check_finite(&items.iter().map(|i| i.x.clone()).collect::<Vec<_>>(), &model.feature_names)?;
    let preds: Vec<bool> = items.iter().map(|i| model.predict(&i.x)).collect();
    let both = || items.iter().zip(preds.iter().copied());
    Ok(EvalReport {
        schema_id: schema_id.into(),
        overall: SliceAccuracy::of("all".into(), both()),
        prominence: (1..=10)
            .map(|x| SliceAccuracy::of(format!("top{x}"), both().filter(|(i, _)| i.percentile <= x)))
            .collect(),
        debate_type: DebateType::ALL
            .iter()
            .map(|t| SliceAccuracy::of(t.as_str().into(), both().filter(|(i, _)| i.debate_type == *t)))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCell {
    pub train_type: String,
    pub test_type: String,
    pub n_train: usize,
    pub n_test: usize,
    pub l2: f64,
    pub accuracy: Option<f64>,
}

/// Train on each debate type (and on all types pooled), test on each type.
/// With `subsample`, every per-type training set is cut to the size of the
/// smallest one so that in-domain and cross-domain cells are comparable.
pub fn cross_type_matrix(
    train_items: &[EvalItem],
    test_items: &[EvalItem],
    names: &[String],
    cfg: &TrainConfig,
    subsample: bool,
) -> Result<Vec<CrossCell>> {
    let mut groups: BTreeMap<String, Vec<&EvalItem>> = BTreeMap::new();
    for t in DebateType::ALL {
        let g: Vec<&EvalItem> = train_items.iter().filter(|i| i.debate_type == t).collect();
        if g.len() >= cfg.folds {
            groups.insert(t.as_str().to_string(), g);
        }
    }
    if subsample {
        if let Some(min) = groups.values().map(Vec::len).min() {
            for (name, g) in groups.iter_mut() {
                let mut rng = crate::pairs::debate_rng(cfg.seed, name);
                g.shuffle(&mut rng);
                g.truncate(min);
            }
        }
    }
    let mut order: Vec<(String, Vec<&EvalItem>)> = groups.into_iter().collect();
    order.push(("all".into(), train_items.iter().collect()));
    let mut out = Vec::new();
    for (train_type, g) in order {
        let x: Vec<Vec<f64>> = g.iter().map(|i| i.x.clone()).collect();
        let y: Vec<bool> = g.iter().map(|i| i.label).collect();
        let model = train(&x, &y, names, "", cfg)?;
        for t in DebateType::ALL {
            let test: Vec<&EvalItem> = test_items.iter().filter(|i| i.debate_type == t).collect();
            let correct = test.iter().filter(|i| model.predict(&i.x) == i.label).count();
            out.push(CrossCell {
                train_type: train_type.clone(),
                test_type: t.as_str().into(),
                n_train: g.len(),
                n_test: test.len(),
                l2: model.l2,
                accuracy: (!test.is_empty()).then(|| correct as f64 / test.len() as f64),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn grid_endpoints() {
        let g = l2_grid();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 2f64.powi(-8));
        assert_abs_diff_eq!(g[19], 2.0, epsilon = 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn separable_points_stay_finite() {
        let x = vec![vec![1.0], vec![-1.0]];
        let y = vec![true, false];
        let f = fit(&x, &y, 1.0, 1e-6, 100).unwrap();
        assert!(f.converged && f.weights[0].is_finite());
        let g = Objective { x: &x, y: &y, l2: 1.0 }.gradient(&[f.weights[0], f.intercept]);
        assert!(max_abs(&g) <= 1e-6);
    }

    #[test]
    fn symmetric_one_feature_matches_scalar_search() {
        // ±1 data, 3 of 4 labels agree with the sign of x. By symmetry b = 0
        // and w solves 0.5·σ(w)·... ; find it by a fine scalar grid.
        let x = vec![vec![1.0], vec![1.0], vec![-1.0], vec![-1.0], vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]];
        let y = vec![true, true, false, false, false, true, true, false];
        let l2 = 0.5;
        let f = fit(&x, &y, l2, 1e-10, 100).unwrap();
        let obj = Objective { x: &x, y: &y, l2 };
        let best = (0..=400_000)
            .map(|i| -2.0 + i as f64 * 1e-5)
            .min_by(|a, b| obj.value(&[*a, 0.0]).total_cmp(&obj.value(&[*b, 0.0])))
            .unwrap();
        assert_abs_diff_eq!(f.intercept, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.weights[0], best, epsilon = 2e-5);
    }

    #[test]
    fn non_finite_feature_is_named() {
        let x = vec![vec![1.0, 2.0], vec![0.0, f64::NAN]];
        let err = train_fixed(&x, &[true, false], &["a".into(), "b".into()], "s", 1.0, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { ref feature, row: 1 } if feature == "b"));
    }

    #[test]
    fn lbfgs_agrees_with_newton() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..8).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let y: Vec<bool> = x.iter().map(|r| r[0] + 0.5 * r[1] + rng.gen::<f64>() - 0.5 > 0.0).collect();
        let obj = Objective { x: &x, y: &y, l2: 0.1 };
        let (a, _, ga) = newton(&obj, 1e-9, 100);
        let (b, _, gb) = lbfgs(&obj, 1e-9, 5000);
        assert!(ga <= 1e-9 && gb <= 1e-9);
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-6);
        }
    }

    #[test]
    fn identical_pairs_pick_largest_l2() {
        let x = vec![vec![1.0, 2.0]; 20];
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let (l2, table) = grid_search_cv(&x, &y, &names(2), &TrainConfig::default()).unwrap();
        assert_eq!(l2, *l2_grid().last().unwrap());
        assert!(table.windows(2).all(|w| w[0].mean_accuracy == w[1].mean_accuracy));
    }

    #[test]
    fn too_few_pairs_for_folds() {
        let x = vec![vec![1.0]; 3];
        assert!(grid_search_cv(&x, &[true, false, true], &names(1), &TrainConfig::default()).is_err());
    }

    fn zero_model(d: usize) -> Model {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64; d]).collect();
        let mut m = train_fixed(&x, &[true, false, true, false], &names(d), "s", 1.0, &TrainConfig::default()).unwrap();
        m.weights.iter_mut().for_each(|w| *w = 0.0);
        m.intercept = 0.0;
        m
    }

    #[test]
    fn empty_slices_are_absent_and_ties_predict_one() {
        let m = zero_model(1);
        let items = vec![
            EvalItem { x: vec![0.3], label: true, percentile: 1, debate_type: DebateType::General },
            EvalItem { x: vec![-0.3], label: false, percentile: 4, debate_type: DebateType::General },
        ];
        let r = evaluate(&m, &items, "s").unwrap();
        assert_eq!(r.overall.accuracy, Some(0.5));
        assert_eq!(r.prominence[0].n, 1);
        assert_eq!(r.prominence[2].n, 1);
        assert_eq!(r.prominence[3].n, 2);
        let vice = r.debate_type.iter().find(|s| s.slice == "vice").unwrap();
        assert_eq!(vice.accuracy, None);
        assert!(evaluate(&m, &items, "other").is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = zero_model(2);
        assert_eq!(Model::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
