//! Linear SVM, shrinkage LDA and Gaussian naive Bayes.
//!
//! All three produce a real decision score per row; a score above zero
//! means [`MiClass::Right`], anything else (ties included) [`MiClass::Left`].
//! Training is deterministic for a given row order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataio::MiClass;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::selection::ClassStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Lda,
    Nb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] =
        [ClassifierKind::Svm, ClassifierKind::Lda, ClassifierKind::Nb];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Nb => "nb",
        }
    }
}

pub fn label_for(score: f64) -> MiClass {
    if score > 0.0 {
        MiClass::Right
    } else {
        MiClass::Left
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub labels: Vec<MiClass>,
    pub scores: Vec<f64>,
}

pub trait Classifier {
    fn n_features(&self) -> usize;

    /// Signed score of one row.
    fn decision(&self, row: &[f64]) -> f64;

    fn predict(&self, m: &FeatureMatrix) -> Result<Prediction> {
        if m.n_cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: m.n_cols(),
            });
        }
        let scores: Vec<f64> = m.rows.iter().map(|r| self.decision(r)).collect();
        Ok(Prediction {
            labels: scores.iter().map(|&s| label_for(s)).collect(),
            scores,
        })
    }
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[MiClass], truth: &[MiClass]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("accuracy of zero rows".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn class_priors(stats: &ClassStats) -> [f64; 2] {
    let n = (stats.counts[0] + stats.counts[1]) as f64;
    [stats.counts[0] as f64 / n, stats.counts[1] as f64 / n]
}

// ── LDA ─────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    /// Ridge added as `lambda * trace / d` to the pooled covariance diagonal.
    pub lambda: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { lambda: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub priors: [f64; 2],
    pub lambda: f64,
}

impl Classifier for LdaModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }
}

pub fn train_lda(train: &FeatureMatrix, params: &LdaParams) -> Result<LdaModel> {
    let stats = ClassStats::compute(train, 2)?;
    let d = train.n_cols();
    let n = train.n_rows();

    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = DVector::<f64>::zeros(d);
    for (row, label) in train.rows.iter().zip(&train.labels) {
        let mu = &stats.means[label.index()];
        for j in 0..d {
            centered[j] = row[j] - mu[j];
        }
        cov.syger(1.0, &centered, &centered, 1.0);
    }
    cov /= (n - 2) as f64;
    let ridge = params.lambda * (cov.trace() / d as f64).max(1e-12);
    for j in 0..d {
        cov[(j, j)] += ridge;
    }
    cov.fill_upper_triangle_with_lower_triangle();

    let diff = DVector::from_iterator(
        d,
        stats.means[1]
            .iter()
            .zip(&stats.means[0])
            .map(|(r, l)| r - l),
    );
    let chol = cov.cholesky().ok_or_else(|| {
        Error::InvalidArgument("regularized pooled covariance is not positive definite".into())
    })?;
    let w = chol.solve(&diff);
    let weights: Vec<f64> = w.iter().copied().collect();
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let priors = class_priors(&stats);
    let midpoint: Vec<f64> = stats.means[0]
        .iter()
        .zip(&stats.means[1])
        .map(|(l, r)| 0.5 * (l + r))
        .collect();
    let bias = -dot(&weights, &midpoint) + (priors[1] / priors[0]).ln();
    Ok(LdaModel {
        weights,
        bias,
        priors,
        lambda: params.lambda,
    })
}

// ── Gaussian naive Bayes ────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Variance floor relative to each feature's variance over all rows.
    pub var_floor: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub priors: [f64; 2],
}

impl GnbModel {
    /// `ln p(class) + sum_f ln N(x_f; mu, var)` for left and right.
    pub fn log_joint(&self, row: &[f64]) -> [f64; 2] {
        [0, 1].map(|c| {
            let mut acc = self.priors[c].ln();
            for ((x, mu), var) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                acc -=
                    0.5 * (2.0 * std::f64::consts::PI * var).ln() + (x - mu).powi(2) / (2.0 * var);
            }
            acc
        })
    }

    /// Normalized class posteriors `[p(left | x), p(right | x)]`.
    pub fn posterior(&self, row: &[f64]) -> [f64; 2] {
        let lj = self.log_joint(row);
        let m = lj[0].max(lj[1]);
        let e = [(lj[0] - m).exp(), (lj[1] - m).exp()];
        let z = e[0] + e[1];
        [e[0] / z, e[1] / z]
    }
}

impl Classifier for GnbModel {
    fn n_features(&self) -> usize {
        self.means[0].len()
    }

    fn decision(&self, row: &[f64]) -> f64 {
        let lj = self.log_joint(row);
        lj[1] - lj[0]
    }
}

pub fn train_gnb(train: &FeatureMatrix, params: &GnbParams) -> Result<GnbModel> {
    let stats = ClassStats::compute(train, 2)?;
    let n = train.n_rows() as f64;
    let floors: Vec<f64> = (0..train.n_cols())
        .map(|j| {
            let col = train.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let floor = params.var_floor * var;
            // constant feature: fall back to an absolute floor
            if floor > 0.0 {
                floor
            } else {
                params.var_floor
            }
        })
        .collect();
    let variances = stats
        .variances
        .clone()
        .map(|v| v.iter().zip(&floors).map(|(v, f)| v.max(*f)).collect());
    Ok(GnbModel {
        priors: class_priors(&stats),
        means: stats.means,
        variances,
    })
}

// ── Linear SVM ──────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Stop once the maximal KKT violation falls to this value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub n_support: usize,
}

impl Classifier for SvmModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }
}

/// Soft-margin SVM primal objective `0.5 |w|^2 + C sum hinge`.
pub fn svm_primal_objective(train: &FeatureMatrix, weights: &[f64], bias: f64, c: f64) -> f64 {
    let hinge: f64 = train
        .rows
        .iter()
        .zip(&train.labels)
        .map(|(r, l)| (1.0 - l.sign() * (dot(weights, r) + bias)).max(0.0))
        .sum();
    0.5 * dot(weights, weights) + c * hinge
}

const TAU: f64 = 1e-12;

/// Linear soft-margin SVM with an unregularized bias, solved in the dual
///
/// ```text
/// max  sum(a) - 0.5 a' Q a   s.t.  0 <= a <= C,  y' a = 0,   Q_ij = y_i y_j <x_i, x_j>
/// ```
///
/// by two-coordinate ascent: each step picks the maximal violating pair with
/// second-order working-set selection and solves the pair subproblem
/// exactly. The equality constraint is why single coordinates cannot move
/// on their own.
pub fn train_svm(train: &FeatureMatrix, params: &SvmParams) -> Result<SvmModel> {
    ClassStats::compute(train, 1)?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "SVM C = {} must be positive",
            params.c
        )));
    }
    let n = train.n_rows();
    let d = train.n_cols();
    let c = params.c;
    let y: Vec<f64> = train.labels.iter().map(|l| l.sign()).collect();

    // Gram matrix, row-major
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(&train.rows[i], &train.rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kd: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();

    let mut alpha = vec![0.0; n];
    // gradient of the minimization form 0.5 a'Qa - sum(a)
    let mut grad = vec![-1.0; n];
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut violation;
    let mut converged = false;
    loop {
        // i: maximal -y_t G_t over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !is_upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        let mut j_sel = usize::MAX;
        if i_sel != usize::MAX {
            let i = i_sel;
            let mut best = f64::INFINITY;
            for t in 0..n {
                let qit = y[i] * y[t] * k[i * n + t];
                if y[t] > 0.0 {
                    if !is_lower(alpha[t]) {
                        let grad_diff = gmax + grad[t];
                        gmax2 = gmax2.max(grad[t]);
                        if grad_diff > 0.0 {
                            let quad = kd[i] + kd[t] - 2.0 * y[i] * qit;
                            let obj =
                                -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= best {
                                best = obj;
                                j_sel = t;
                            }
                        }
                    }
                } else if !is_upper(alpha[t]) {
                    let grad_diff = gmax - grad[t];
                    gmax2 = gmax2.max(-grad[t]);
                    if grad_diff > 0.0 {
                        let quad = kd[i] + kd[t] + 2.0 * y[i] * qit;
                        let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= best {
                            best = obj;
                            j_sel = t;
                        }
                    }
                }
            }
        }
        violation = (gmax + gmax2).max(0.0);
        if j_sel == usize::MAX || gmax + gmax2 < params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let qij = y[i] * y[j] * k[i * n + j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (kd[i] + kd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (kd[i] + kd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[i * n + t] * di + y[j] * k[j * n + t] * dj);
        }
    }

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    };

    let mut weights = vec![0.0; d];
    for t in 0..n {
        if alpha[t] != 0.0 {
            for (w, x) in weights.iter_mut().zip(&train.rows[t]) {
                *w += alpha[t] * y[t] * x;
            }
        }
    }
    let bias = -rho;
    let primal = svm_primal_objective(train, &weights, bias, c);
    let dual = alpha.iter().sum::<f64>() - 0.5 * dot(&weights, &weights);
    Ok(SvmModel {
        n_support: alpha.iter().filter(|a| **a > 0.0).count(),
        weights,
        bias,
        c,
        iterations,
        converged,
        kkt_violation: violation,
        primal_objective: primal,
        dual_objective: dual,
        duality_gap: primal - dual,
    })
}

// ── shared model wrapper ────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub svm: SvmParams,
    pub lda: LdaParams,
    pub nb: GnbParams,
}

/// Any trained model; serializes to JSON with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Svm(SvmModel),
    Lda(LdaModel),
    Nb(GnbModel),
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Svm(_) => ClassifierKind::Svm,
            Model::Lda(_) => ClassifierKind::Lda,
            Model::Nb(_) => ClassifierKind::Nb,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Model> {
        serde_json::from_str(text).map_err(|e| Error::json("<model>", e))
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Svm(m) => m,
            Model::Lda(m) => m,
            Model::Nb(m) => m,
        }
    }
}

impl Classifier for Model {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn decision(&self, row: &[f64]) -> f64 {
        self.inner().decision(row)
    }
}

pub fn train(kind: ClassifierKind, m: &FeatureMatrix, params: &ClassifierParams) -> Result<Model> {
    Ok(match kind {
        ClassifierKind::Svm => Model::Svm(train_svm(m, &params.svm)?),
        ClassifierKind::Lda => Model::Lda(train_lda(m, &params.lda)?),
        ClassifierKind::Nb => Model::Nb(train_gnb(m, &params.nb)?),
    })
}
