//! Gradient-descent driver and the per-epoch training record shared by the
//! Hamiltonian, state and qutrit learners.

use serde::{Deserialize, Serialize};

use crate::dataset::fmt_sig;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Optimizer {
    /// Plain fixed-step gradient descent.
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the cost drops below this value.
    pub cost_threshold: f64,
    /// Multiplies the learning rate after every epoch when set.
    pub lr_decay: Option<f64>,
    pub optimizer: Optimizer,
    /// Parameter snapshot cadence in the trace (the final epoch is always kept).
    pub snapshot_every: usize,
    /// Diagnostics cadence; diagnostics can be expensive.
    pub diagnostics_every: usize,
    /// Abort when the cost exceeds this multiple of the initial cost.
    pub divergence_factor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_epochs: 2000,
            cost_threshold: 1e-14,
            lr_decay: None,
            optimizer: Optimizer::Sgd,
            snapshot_every: 10,
            diagnostics_every: 1,
            divergence_factor: 1e6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.snapshot_every == 0 || self.diagnostics_every == 0 {
            return Err(Error::InvalidArgument("cadences must be at least 1".into()));
        }
        if let Some(d) = self.lr_decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidArgument("lr_decay must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub cost: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_error: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<T>>,
}

/// Held-out error for one observable after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HeldOutError<T> {
    pub observable: String,
    pub error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrainingTrace<T> {
    pub epochs: Vec<EpochRecord<T>>,
    pub final_params: Vec<T>,
    pub final_cost: T,
    pub converged: bool,
    #[serde(default)]
    pub validation: Vec<HeldOutError<T>>,
}

impl<T: Real> TrainingTrace<T> {
    pub fn final_trace_distance(&self) -> Option<T> {
        self.epochs.iter().rev().find_map(|e| e.trace_distance)
    }

    pub fn final_validation_error(&self) -> Option<T> {
        self.epochs.iter().rev().find_map(|e| e.validation_error)
    }

    /// `epoch,cost,trace_distance,validation_error`; missing values are empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<T>| v.map(|v| fmt_sig(v.to_f64_lossy())).unwrap_or_default();
        let mut out = String::from("epoch,cost,trace_distance,validation_error\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch,
                fmt_sig(e.cost.to_f64_lossy()),
                opt(e.trace_distance),
                opt(e.validation_error)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Per-epoch diagnostics: `(trace_distance, validation_error)`.
pub type Diagnostics<T> = (Option<T>, Option<T>);

/// Minimizes `objective` from `init`, recording the cost before every update
/// and once more at the final parameters.
pub fn minimize<T: Real>(
    cfg: &OptimizerConfig,
    init: Vec<T>,
    mut objective: impl FnMut(&[T]) -> Result<(T, Vec<T>)>,
    mut diagnostics: impl FnMut(&[T]) -> Result<Diagnostics<T>>,
) -> Result<TrainingTrace<T>> {
    cfg.validate()?;
    let mut params = init;
    let mut epochs = Vec::new();
    let mut lr = cfg.learning_rate;
    let mut m = vec![0.0f64; params.len()];
    let mut v = vec![0.0f64; params.len()];
    let mut initial_cost: Option<f64> = None;
    let mut epoch = 0;
    loop {
        let (cost, grad) = objective(&params)?;
        let cost_f = cost.to_f64_lossy();
        let limit = initial_cost.unwrap_or(cost_f).abs() * cfg.divergence_factor;
        if !cost_f.is_finite() || (initial_cost.is_some() && cost_f > limit) {
            return Err(Error::Divergence {
                epoch,
                cost: cost_f,
                limit,
            });
        }
        initial_cost.get_or_insert(cost_f);
        let converged = cost_f < cfg.cost_threshold;
        let last = converged || epoch >= cfg.max_epochs;
        let (trace_distance, validation_error) = if last || epoch % cfg.diagnostics_every == 0 {
            diagnostics(&params)?
        } else {
            (None, None)
        };
        epochs.push(EpochRecord {
            epoch,
            cost,
            trace_distance,
            validation_error,
            params: (last || epoch % cfg.snapshot_every == 0).then(|| params.clone()),
        });
        if last {
            return Ok(TrainingTrace {
                epochs,
                final_params: params,
                final_cost: cost,
                converged,
                validation: Vec::new(),
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        match cfg.optimizer {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p = *p - T::lit(lr) * *g;
                }
            }
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let t = (epoch + 1) as i32;
                for ((p, g), (mi, vi)) in params.iter_mut().zip(&grad).zip(m.iter_mut().zip(v.iter_mut())) {
                    let g = g.to_f64_lossy();
                    *mi = beta1 * *mi + (1.0 - beta1) * g;
                    *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                    let mh = *mi / (1.0 - beta1.powi(t));
                    let vh = *vi / (1.0 - beta2.powi(t));
                    *p = *p - T::lit(lr * mh / (vh.sqrt() + epsilon));
                }
            }
        }
        if let Some(d) = cfg.lr_decay {
            lr *= d;
        }
        epoch += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let c = (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 0.5).powi(2);
        Ok((c, vec![2.0 * (p[0] - 1.0), 6.0 * (p[1] + 0.5)]))
    }

    #[test]
    fn sgd_converges_on_a_quadratic() {
        let cfg = OptimizerConfig {
            learning_rate: 0.1,
            max_epochs: 500,
            cost_threshold: 1e-20,
            ..Default::default()
        };
        let t = minimize(&cfg, vec![0.0, 0.0], quadratic, |_| Ok((None, None))).unwrap();
        assert!((t.final_params[0] - 1.0).abs() < 1e-8);
        assert!((t.final_params[1] + 0.5).abs() < 1e-8);
        assert!(t.epochs.windows(2).all(|w| w[1].cost <= w[0].cost + 1e-12));
    }

    #[test]
    fn adam_converges_on_a_quadratic() {
        let cfg = OptimizerConfig {
            learning_rate: 0.05,
            max_epochs: 3000,
            cost_threshold: 1e-12,
            optimizer: Optimizer::adam(),
            ..Default::default()
        };
        let t = minimize(&cfg, vec![0.0, 0.0], quadratic, |_| Ok((None, None))).unwrap();
        assert!(t.converged);
    }

    #[test]
    fn divergence_guard_trips() {
        let cfg = OptimizerConfig {
            learning_rate: 10.0,
            max_epochs: 100,
            ..Default::default()
        };
        let r = minimize(&cfg, vec![0.0, 0.0], quadratic, |_| Ok((None, None)));
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    #[test]
    fn snapshots_and_csv() {
        let cfg = OptimizerConfig {
            learning_rate: 0.1,
            max_epochs: 25,
            cost_threshold: 0.0,
            ..Default::default()
        };
        let t = minimize(&cfg, vec![0.0, 0.0], quadratic, |_| Ok((Some(0.5), None))).unwrap();
        assert_eq!(t.epochs.len(), 26);
        let snaps: Vec<usize> = t.epochs.iter().filter(|e| e.params.is_some()).map(|e| e.epoch).collect();
        assert_eq!(snaps, vec![0, 10, 20, 25]);
        let csv = t.to_csv();
        assert!(csv.lines().nth(1).unwrap().ends_with(",5.000000000e-1,"));
        assert!(cfg.validate().is_ok());
        let bad = OptimizerConfig { learning_rate: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
