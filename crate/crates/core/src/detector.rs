//! Standardization, L2-regularized logistic regression and validation-set grid search.
//!
//! The objective is `Σ_i [softplus(z_i) − y_i z_i] + ‖w‖² / (2C)` with `z = w·x + b`; the bias
//! is not penalized, larger `C` means weaker regularization. It is minimized with full-batch
//! L-BFGS and an Armijo backtracking line search from a zero start, so fits are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Label;
use crate::schema::Schema;

/// Inverse regularization strengths searched by default.
pub const DEFAULT_GRID_C: [f64; 9] = [1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0];
/// Iteration budgets searched by default.
pub const DEFAULT_GRID_ITER: [usize; 6] = [1, 2, 3, 5, 10, 100];
/// Iteration budget of a single fit outside the grid.
pub const DEFAULT_MAX_ITER: usize = 250;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

const LBFGS_MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Samples × features, row-major, with the schema naming each column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: Schema,
    pub sample_ids: Vec<String>,
    pub labels: Vec<Option<Label>>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(schema: Schema, sample_ids: Vec<String>, labels: Vec<Option<Label>>, values: Vec<f64>) -> Result<Self> {
        let rows = sample_ids.len();
        if labels.len() != rows {
            return Err(Error::Format(format!("{} labels for {rows} rows", labels.len())));
        }
        if values.len() != rows * schema.width() {
            return Err(Error::Format(format!(
                "{} values for {rows} rows of width {}",
                values.len(),
                schema.width()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let w = schema.width();
            return Err(Error::Validation(format!(
                "non-finite value at row {}, column {}",
                pos / w,
                pos % w
            )));
        }
        Ok(FeatureMatrix {
            schema,
            sample_ids,
            labels,
            values,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        FeatureMatrix {
            schema,
            sample_ids: Vec::new(),
            labels: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn width(&self) -> usize {
        self.schema.width()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row(i)[j]).collect()
    }

    /// Column subset, keeping row metadata.
    pub fn select(&self, columns: &[usize]) -> FeatureMatrix {
        let slots = columns.iter().map(|&j| self.schema.slots[j].clone()).collect();
        let mut values = Vec::with_capacity(self.rows() * columns.len());
        for i in 0..self.rows() {
            let row = self.row(i);
            values.extend(columns.iter().map(|&j| row[j]));
        }
        FeatureMatrix {
            schema: Schema::new(slots),
            sample_ids: self.sample_ids.clone(),
            labels: self.labels.clone(),
            values,
        }
    }

    /// Labels of every row; fails if any row is unlabeled.
    pub fn targets(&self) -> Result<Vec<f64>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.map(Label::as_target)
                    .ok_or_else(|| Error::Validation(format!("row {i} ({}) has no label", self.sample_ids[i])))
            })
            .collect()
    }
}

/// Per-column mean and standard deviation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Population statistics. Constant columns get mean 0 and std 1, i.e. pass through.
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let rows = train.rows();
        if rows < 2 {
            return Err(Error::DegenerateInput(format!(
                "scaler needs at least 2 rows, got {rows}"
            )));
        }
        let w = train.width();
        let mut mean = vec![0.0; w];
        for i in 0..rows {
            for (m, x) in mean.iter_mut().zip(train.row(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= rows as f64);
        let mut var = vec![0.0; w];
        for i in 0..rows {
            for ((v, x), m) in var.iter_mut().zip(train.row(i)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let mut std: Vec<f64> = var.iter().map(|v| (v / rows as f64).sqrt()).collect();
        for j in 0..w {
            let first = train.row(0)[j];
            if (0..rows).all(|i| train.row(i)[j] == first) {
                mean[j] = 0.0;
                std[j] = 1.0;
            }
        }
        Ok(Scaler { mean, std })
    }

    pub fn transform_row(&self, row: &[f64], out: &mut Vec<f64>) {
        out.extend(row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s));
    }

    pub fn apply(&self, m: &FeatureMatrix) -> FeatureMatrix {
        let mut values = Vec::with_capacity(m.values.len());
        for i in 0..m.rows() {
            self.transform_row(m.row(i), &mut values);
        }
        FeatureMatrix {
            schema: m.schema.clone(),
            sample_ids: m.sample_ids.clone(),
            labels: m.labels.clone(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaler: Scaler,
    pub c: f64,
    pub max_iter: usize,
    pub schema_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub probability: f64,
}

impl DetectorModel {
    fn check_schema(&self, features: &FeatureMatrix) -> Result<()> {
        let hash = features.schema.hash();
        if hash != self.schema_hash {
            return Err(Error::Schema(format!(
                "model expects schema {}, features have {}",
                &self.schema_hash[..12.min(self.schema_hash.len())],
                &hash[..12]
            )));
        }
        Ok(())
    }

    fn probability(&self, row: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        self.scaler.transform_row(row, scratch);
        let z = dot(&self.weights, scratch) + self.bias;
        sigmoid(z)
    }

    /// Probability of `Machine`; label is `Machine` iff the probability is at least 0.5.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<Prediction>> {
        self.check_schema(features)?;
        let mut scratch = Vec::with_capacity(features.width());
        Ok((0..features.rows())
            .map(|i| {
                let probability = self.probability(features.row(i), &mut scratch);
                let label = if probability >= 0.5 {
                    Label::Machine
                } else {
                    Label::Human
                };
                Prediction { label, probability }
            })
            .collect())
    }

    pub fn evaluate(&self, features: &FeatureMatrix) -> Result<EvalReport> {
        let predictions = self.predict(features)?;
        let targets = features.targets()?;
        Ok(EvalReport::from_predictions(&predictions, &targets))
    }

    pub fn accuracy(&self, features: &FeatureMatrix) -> Result<f64> {
        Ok(self.evaluate(features)?.accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub accuracy: f64,
    /// Precision and recall of the `Machine` class; reported, never used for selection.
    pub precision: f64,
    pub recall: f64,
}

impl EvalReport {
    fn from_predictions(predictions: &[Prediction], targets: &[f64]) -> Self {
        let (mut correct, mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize, 0usize);
        for (p, &y) in predictions.iter().zip(targets) {
            let predicted = p.label == Label::Machine;
            let actual = y == 1.0;
            if predicted == actual {
                correct += 1;
            }
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        EvalReport {
            samples: targets.len(),
            accuracy: ratio(correct, targets.len()),
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fneg),
        }
    }
}

/// Regularized logistic loss on standardized rows; parameters are `[w.., b]`.
pub struct LogisticObjective<'a> {
    x: &'a [f64],
    y: &'a [f64],
    width: usize,
    c: f64,
}

impl<'a> LogisticObjective<'a> {
    /// `x` is row-major `y.len() × width`.
    pub fn new(x: &'a [f64], y: &'a [f64], width: usize, c: f64) -> Self {
        assert_eq!(x.len(), y.len() * width);
        assert!(c > 0.0, "C must be positive");
        LogisticObjective { x, y, width, c }
    }

    pub fn dim(&self) -> usize {
        self.width + 1
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        let (w, b) = theta.split_at(self.width);
        let mut loss = dot(w, w) / (2.0 * self.c);
        for (row, &y) in self.x.chunks_exact(self.width).zip(self.y) {
            let z = dot(w, row) + b[0];
            loss += softplus(z) - y * z;
        }
        loss
    }

    /// Loss and gradient in one pass.
    pub fn loss_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let (w, b) = theta.split_at(self.width);
        let (gw, gb) = grad.split_at_mut(self.width);
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = wi / self.c;
        }
        gb[0] = 0.0;
        let mut loss = dot(w, w) / (2.0 * self.c);
        for (row, &y) in self.x.chunks_exact(self.width).zip(self.y) {
            let z = dot(w, row) + b[0];
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            for (g, xi) in gw.iter_mut().zip(row) {
                *g += r * xi;
            }
            gb[0] += r;
        }
        loss
    }
}

/// Optimizer record of one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    /// Loss at the start and after every accepted step.
    pub losses: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub fn train_logreg(train: &FeatureMatrix, c: f64, max_iter: usize) -> Result<DetectorModel> {
    train_logreg_traced(train, c, max_iter).map(|(m, _)| m)
}

pub fn train_logreg_traced(train: &FeatureMatrix, c: f64, max_iter: usize) -> Result<(DetectorModel, FitTrace)> {
    let targets = check_training_labels(train)?;
    let scaler = Scaler::fit(train)?;
    let scaled = scaler.apply(train);
    Ok(fit_scaled(&scaled, &targets, scaler, c, max_iter))
}

fn check_training_labels(train: &FeatureMatrix) -> Result<Vec<f64>> {
    if train.rows() < 2 {
        return Err(Error::DegenerateInput("training needs at least 2 rows".into()));
    }
    let targets = train.targets()?;
    if targets.iter().all(|&y| y == targets[0]) {
        return Err(Error::SingleClass);
    }
    Ok(targets)
}

fn fit_scaled(
    scaled: &FeatureMatrix,
    targets: &[f64],
    scaler: Scaler,
    c: f64,
    max_iter: usize,
) -> (DetectorModel, FitTrace) {
    let width = scaled.width();
    let objective = LogisticObjective::new(&scaled.values, targets, width, c);
    let (theta, trace) = minimize_lbfgs(&objective, max_iter);
    let model = DetectorModel {
        weights: theta[..width].to_vec(),
        bias: theta[width],
        scaler,
        c,
        max_iter,
        schema_hash: scaled.schema.hash(),
    };
    (model, trace)
}

fn minimize_lbfgs(obj: &LogisticObjective<'_>, max_iter: usize) -> (Vec<f64>, FitTrace) {
    let dim = obj.dim();
    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut loss = obj.loss_grad(&theta, &mut grad);
    let mut losses = vec![loss];
    let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(LBFGS_MEMORY);
    let mut iterations = 0;

    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];
    while iterations < max_iter && norm(&grad) > GRADIENT_TOLERANCE {
        let mut dir = two_loop(&grad, &memory);
        let mut slope = dot(&dir, &grad);
        if slope >= 0.0 {
            memory.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }
        let mut step = if memory.is_empty() {
            (1.0 / norm(&grad)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, th), d) in trial.iter_mut().zip(&theta).zip(&dir) {
                *t = th + step * d;
            }
            let trial_loss = obj.loss_grad(&trial, &mut trial_grad);
            if trial_loss <= loss + ARMIJO * step * slope {
                accepted = Some(trial_loss);
                break;
            }
            step *= 0.5;
        }
        let Some(new_loss) = accepted else {
            break;
        };

        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if memory.len() == LBFGS_MEMORY {
                memory.remove(0);
            }
            memory.push((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        loss = new_loss;
        losses.push(loss);
        iterations += 1;
    }
    let grad_norm = norm(&grad);
    (
        theta,
        FitTrace {
            losses,
            iterations,
            grad_norm,
        },
    )
}

/// `−H g` from the stored curvature pairs.
fn two_loop(grad: &[f64], memory: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = vec![0.0; memory.len()];
    for (k, (s, y, rho)) in memory.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[k] = a;
        axpy(-a, y, &mut q);
    }
    if let Some((s, y, _)) = memory.last() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (k, (s, y, rho)) in memory.iter().enumerate() {
        let b = rho * dot(y, &q);
        axpy(alphas[k] - b, s, &mut q);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub c: f64,
    pub max_iter: usize,
    pub valid: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub best: usize,
}

impl GridReport {
    /// CSV with one line per grid point, in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,max_iter,valid_accuracy,valid_precision,valid_recall,selected\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.c,
                r.max_iter,
                r.valid.accuracy,
                r.valid.precision,
                r.valid.recall,
                u8::from(i == self.best)
            ));
        }
        out
    }
}

/// Fits every `(C, max_iter)` pair on `train` and keeps the best validation accuracy.
///
/// Ties go to the smaller `C` (stronger regularization), then the smaller `max_iter`.
pub fn grid_search(
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
    grid_c: &[f64],
    grid_iter: &[usize],
) -> Result<(DetectorModel, GridReport)> {
    if grid_c.is_empty() || grid_iter.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    if let Some(c) = grid_c.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::Config(format!("C = {c} is not a positive number")));
    }
    if train.schema != valid.schema {
        return Err(Error::Schema("train and validation schemas differ".into()));
    }
    let targets = check_training_labels(train)?;
    valid.targets()?;
    let scaler = Scaler::fit(train)?;
    let scaled = scaler.apply(train);

    let points: Vec<(f64, usize)> = grid_c
        .iter()
        .flat_map(|&c| grid_iter.iter().map(move |&it| (c, it)))
        .collect();
    let fit = |&(c, it): &(f64, usize)| -> Result<(DetectorModel, EvalReport)> {
        let (model, _) = fit_scaled(&scaled, &targets, scaler.clone(), c, it);
        let report = model.evaluate(valid)?;
        Ok((model, report))
    };
    #[cfg(feature = "parallel")]
    let fits: Vec<Result<(DetectorModel, EvalReport)>> = {
        use rayon::prelude::*;
        points.par_iter().map(fit).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<Result<(DetectorModel, EvalReport)>> = points.iter().map(fit).collect();

    let mut models = Vec::with_capacity(fits.len());
    let mut rows = Vec::with_capacity(fits.len());
    for ((c, it), fit) in points.iter().zip(fits) {
        let (model, valid) = fit?;
        rows.push(GridRow {
            c: *c,
            max_iter: *it,
            valid,
        });
        models.push(model);
    }
    let best = select_best(&rows);
    let model = models.swap_remove(best);
    Ok((model, GridReport { rows, best }))
}

fn select_best(rows: &[GridRow]) -> usize {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate().skip(1) {
        let b = &rows[best];
        let better = r.valid.accuracy > b.valid.accuracy
            || (r.valid.accuracy == b.valid.accuracy && (r.c < b.c || (r.c == b.c && r.max_iter < b.max_iter)));
        if better {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
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

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Family, Slot};

    pub(crate) fn schema(width: usize) -> Schema {
        Schema::new(
            (0..width)
                .map(|j| Slot::new(Family::Topo, 0, 0, "x", format!("f{j}")))
                .collect(),
        )
    }

    fn matrix(rows: &[(&[f64], Label)]) -> FeatureMatrix {
        let width = rows[0].0.len();
        FeatureMatrix::new(
            schema(width),
            (0..rows.len()).map(|i| format!("s{i}")).collect(),
            rows.iter().map(|r| Some(r.1)).collect(),
            rows.iter().flat_map(|r| r.0.iter().copied()).collect(),
        )
        .unwrap()
    }

    fn separable() -> FeatureMatrix {
        use Label::*;
        matrix(&[
            (&[-2.0, 0.3], Human),
            (&[-1.0, -0.4], Human),
            (&[-0.5, 1.0], Human),
            (&[-3.0, 0.0], Human),
            (&[0.5, 0.2], Machine),
            (&[1.5, -1.0], Machine),
            (&[2.0, 0.7], Machine),
            (&[0.8, 0.1], Machine),
        ])
    }

    #[test]
    fn scaler_examples() {
        use Label::*;
        let m = matrix(&[(&[1.0, 5.0], Human), (&[3.0, 5.0], Machine)]);
        let s = Scaler::fit(&m).unwrap();
        assert_eq!(s.mean, vec![2.0, 0.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        let t = s.apply(&m);
        assert_eq!(t.column(0), vec![-1.0, 1.0]);
        assert_eq!(t.column(1), vec![5.0, 5.0]);

        let test = matrix(&[(&[5.0, 7.0], Human)]);
        assert_eq!(s.apply(&test).row(0), &[3.0, 7.0]);
        assert!(Scaler::fit(&test).is_err());
    }

    #[test]
    fn separable_fit_is_perfect() {
        let m = separable();
        let model = train_logreg(&m, 1.0, 250).unwrap();
        assert_eq!(model.accuracy(&m).unwrap(), 1.0);
    }

    #[test]
    fn single_class_is_rejected() {
        use Label::*;
        let m = matrix(&[(&[1.0], Human), (&[2.0], Human)]);
        assert!(matches!(train_logreg(&m, 1.0, 10), Err(Error::SingleClass)));
    }

    #[test]
    fn symmetric_data_gives_zero_bias() {
        use Label::*;
        let m = matrix(&[(&[-1.0], Human), (&[1.0], Machine)]);
        let (model, trace) = train_logreg_traced(&m, 1.0, 250).unwrap();
        assert!(model.bias.abs() < 1e-6, "bias {}", model.bias);
        assert!(model.weights[0] > 0.0);
        assert!(trace.grad_norm <= GRADIENT_TOLERANCE);
    }

    #[test]
    fn zero_model_predicts_machine() {
        use Label::*;
        let m = matrix(&[(&[-1.0], Human), (&[1.0], Machine)]);
        let model = DetectorModel {
            weights: vec![0.0],
            bias: 0.0,
            scaler: Scaler {
                mean: vec![0.0],
                std: vec![1.0],
            },
            c: 1.0,
            max_iter: 1,
            schema_hash: m.schema.hash(),
        };
        let p = model.predict(&m).unwrap();
        assert!(p.iter().all(|p| p.probability == 0.5 && p.label == Machine));
    }

    #[test]
    fn schema_mismatch() {
        let m = separable();
        let model = train_logreg(&m, 1.0, 50).unwrap();
        let other = m.select(&[1, 0]);
        assert!(matches!(model.predict(&other), Err(Error::Schema(_))));
    }

    #[test]
    fn losses_do_not_increase() {
        let m = separable();
        let (_, trace) = train_logreg_traced(&m, 0.5, 100).unwrap();
        assert!(trace.losses.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(trace.iterations <= 100);
    }

    #[test]
    fn max_iter_bounds_steps() {
        let m = separable();
        let (_, trace) = train_logreg_traced(&m, 1.0, 1).unwrap();
        assert_eq!(trace.iterations, 1);
        assert_eq!(trace.losses.len(), 2);
    }

    #[test]
    fn grid_shape_and_single_point() {
        let m = separable();
        let (_, report) = grid_search(&m, &m, &DEFAULT_GRID_C, &DEFAULT_GRID_ITER).unwrap();
        assert_eq!(report.rows.len(), 54);
        assert_eq!(report.to_csv().lines().count(), 55);

        let (model, report) = grid_search(&m, &m, &[0.5], &[7]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(model, train_logreg(&m, 0.5, 7).unwrap());
    }

    #[test]
    fn tie_break_prefers_small_c_then_few_iterations() {
        let row = |c, it, acc| GridRow {
            c,
            max_iter: it,
            valid: EvalReport {
                samples: 1,
                accuracy: acc,
                precision: 0.0,
                recall: 0.0,
            },
        };
        let rows = vec![row(1.0, 5, 0.9), row(0.1, 10, 0.9), row(0.1, 3, 0.9), row(1.0, 1, 0.8)];
        assert_eq!(select_best(&rows), 2);
        let rows = vec![row(1.0, 5, 0.9), row(0.1, 10, 0.95)];
        assert_eq!(select_best(&rows), 1);
    }

    #[test]
    fn matrix_rejects_nan_and_width_mismatch() {
        assert!(FeatureMatrix::new(schema(2), vec!["a".into()], vec![None], vec![1.0]).is_err());
        assert!(FeatureMatrix::new(schema(1), vec!["a".into()], vec![None], vec![f64::NAN]).is_err());
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
