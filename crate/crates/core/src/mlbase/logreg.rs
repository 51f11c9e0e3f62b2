use serde::{Deserialize, Serialize};

use super::tfidf::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub threshold: f64,
}

impl Default for LogisticHyperparams {
    fn default() -> Self {
        LogisticHyperparams {
            learning_rate: 0.1,
            epochs: 500,
            l2_lambda: 1e-4,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: LogisticHyperparams,
    /// Objective value before each epoch's update, then after the last one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// ln(1 + e^z) without overflow
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log loss plus `lambda/2 * |w|^2` (bias unregularized).
pub fn logistic_loss(weights: &[f64], bias: f64, x: &[SparseVector], y: &[bool], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let z = xi.dot_dense(weights) + bias;
            softplus(z) - if yi { z } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    data + reg
}

/// Analytic gradient of [`logistic_loss`]: `(weights gradient, bias gradient)`.
pub fn logistic_gradient(
    weights: &[f64],
    bias: f64,
    x: &[SparseVector],
    y: &[bool],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut gb = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let p = sigmoid(xi.dot_dense(weights) + bias);
        let r = (p - if yi { 1.0 } else { 0.0 }) / n;
        for (j, v) in xi.iter() {
            gw[j] += r * v;
        }
        gb += r;
    }
    (gw, gb)
}

/// Full-batch gradient descent from zero weights.
///
/// Degenerate inputs still produce a model: single-class labels attach a
/// warning, as does any epoch whose objective rises by more than 1e-9.
pub fn train_logreg(
    x: &[SparseVector],
    y: &[bool],
    dim: usize,
    hp: LogisticHyperparams,
) -> LogisticModel {
    assert_eq!(x.len(), y.len(), "feature and label counts differ");
    let mut model = LogisticModel {
        weights: vec![0.0; dim],
        bias: 0.0,
        hyperparams: hp,
        loss_history: Vec::with_capacity(hp.epochs + 1),
        warnings: Vec::new(),
    };
    if x.is_empty() {
        model.warnings.push("no training data".into());
        return model;
    }
    let positives = y.iter().filter(|&&b| b).count();
    if positives == 0 || positives == y.len() {
        model.warnings.push(format!(
            "single-class training data ({} positive of {})",
            positives,
            y.len()
        ));
    }

    let mut rising_epochs = 0usize;
    let mut prev = logistic_loss(&model.weights, model.bias, x, y, hp.l2_lambda);
    model.loss_history.push(prev);
    for _ in 0..hp.epochs {
        let (gw, gb) = logistic_gradient(&model.weights, model.bias, x, y, hp.l2_lambda);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= hp.learning_rate * g;
        }
        model.bias -= hp.learning_rate * gb;
        let loss = logistic_loss(&model.weights, model.bias, x, y, hp.l2_lambda);
        if loss > prev + 1e-9 {
            rising_epochs += 1;
        }
        model.loss_history.push(loss);
        prev = loss;
    }
    if rising_epochs > 0 {
        model.warnings.push(format!(
            "objective increased in {rising_epochs} epochs; learning rate {} may be too large",
            hp.learning_rate
        ));
    }
    model
}

/// `(probability, label)` for one input.
pub fn predict_logreg(model: &LogisticModel, x: &SparseVector) -> (f64, bool) {
    let p = sigmoid(x.dot_dense(&model.weights) + model.bias);
    (p, p >= model.hyperparams.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sv(pairs: &[(usize, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.to_vec())
    }

    #[test]
    fn separable_points() {
        let x = vec![sv(&[(0, 1.0)]), sv(&[(1, 1.0)])];
        let y = vec![true, false];
        let m = train_logreg(&x, &y, 2, LogisticHyperparams::default());
        assert!(predict_logreg(&m, &x[0]).1);
        assert!(!predict_logreg(&m, &x[1]).1);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn single_class_warns_and_predicts_negative() {
        let x = vec![sv(&[(0, 1.0)]), sv(&[(1, 1.0)]), sv(&[(0, 0.5), (1, 0.5)])];
        let y = vec![false; 3];
        let m = train_logreg(&x, &y, 2, LogisticHyperparams::default());
        assert_eq!(m.warnings.len(), 1);
        assert!(x.iter().all(|xi| !predict_logreg(&m, xi).1));
    }

    #[test]
    fn zero_model_gives_half() {
        let m = LogisticModel {
            weights: vec![0.0; 3],
            bias: 0.0,
            hyperparams: LogisticHyperparams::default(),
            loss_history: vec![],
            warnings: vec![],
        };
        let (p, label) = predict_logreg(&m, &sv(&[(1, 7.0)]));
        assert_eq!(p, 0.5);
        assert!(label);
    }

    #[test]
    fn sigmoid_limits() {
        assert!((sigmoid(800.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-300);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn prediction_matches_independent_sigmoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let dim = 12;
            let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let bias = rng.gen_range(-2.0..2.0);
            let x = SparseVector::from_pairs(
                (0..dim).filter_map(|i| rng.gen_bool(0.5).then(|| (i, rng.gen_range(-2.0..2.0)))).collect(),
            );
            let m = LogisticModel {
                weights: weights.clone(),
                bias,
                hyperparams: LogisticHyperparams::default(),
                loss_history: vec![],
                warnings: vec![],
            };
            let z: f64 = (0..dim).map(|i| weights[i] * x.get(i)).sum::<f64>() + bias;
            let oracle = 1.0 / (1.0 + (-z).exp());
            assert!((predict_logreg(&m, &x).0 - oracle).abs() < 1e-12);
        }
    }

    fn random_batch(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<SparseVector>, Vec<bool>) {
        let x = (0..n)
            .map(|_| {
                SparseVector::from_pairs(
                    (0..dim)
                        .filter_map(|i| rng.gen_bool(0.6).then(|| (i, rng.gen_range(-1.5..1.5))))
                        .collect(),
                )
            })
            .collect();
        let y = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        (x, y)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let dim = 10;
            let (x, y) = random_batch(&mut rng, 16, dim);
            let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = rng.gen_range(-0.5..0.5);
            let lambda = 0.01;
            let (gw, gb) = logistic_gradient(&w, b, &x, &y, lambda);
            let h = 1e-6;
            let mut max_rel: f64 = 0.0;
            for j in 0..dim {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let fd = (logistic_loss(&wp, b, &x, &y, lambda) - logistic_loss(&wm, b, &x, &y, lambda)) / (2.0 * h);
                max_rel = max_rel.max((fd - gw[j]).abs() / fd.abs().max(gw[j].abs()).max(1e-8));
            }
            let fd_b = (logistic_loss(&w, b + h, &x, &y, lambda) - logistic_loss(&w, b - h, &x, &y, lambda)) / (2.0 * h);
            max_rel = max_rel.max((fd_b - gb).abs() / fd_b.abs().max(gb.abs()).max(1e-8));
            assert!(max_rel < 1e-5, "max relative error {max_rel}");
        }
    }

    #[test]
    fn loss_non_increasing_with_unit_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let (x, y) = random_batch(&mut rng, 40, 15);
            let x: Vec<_> = x.iter().map(SparseVector::l2_normalized).collect();
            let m = train_logreg(&x, &y, 15, LogisticHyperparams { epochs: 200, ..Default::default() });
            for w in m.loss_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
            assert!(m.warnings.iter().all(|w| !w.contains("objective")));
        }
    }

    #[test]
    fn divergent_step_is_reported() {
        let x = vec![sv(&[(0, 30.0)]), sv(&[(0, -30.0)]), sv(&[(0, 25.0)])];
        let y = vec![true, false, false];
        let hp = LogisticHyperparams {
            learning_rate: 50.0,
            epochs: 30,
            ..Default::default()
        };
        let m = train_logreg(&x, &y, 1, hp);
        assert!(m.warnings.iter().any(|w| w.contains("objective increased")));
    }
}
