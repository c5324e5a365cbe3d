//! Target distributions `mu ∝ exp(-f)` with gradients, smoothness and
//! tail parameters, plus analytic Gaussian oracles.
//!
//! Only differentiable potentials are admitted as sampling targets;
//! constraints enter through the Moreau–Yosida penalty instead of
//! nonsmooth indicator terms. Built-in constructors normalize potentials
//! so that `f(x*) = 0` at the minimizer.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::vecmath::norm_sq;

/// Light-tail parameters: `f(x) - f(x*) >= eta * |x - x*|` whenever
/// `|x - x*| >= m_eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailParams {
    pub eta: f64,
    pub m_eta: f64,
}

impl TailParams {
    pub fn new(eta: f64, m_eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "tail parameter eta must be positive, got {eta}"
            )));
        }
        if !(m_eta >= 0.0) || !m_eta.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "tail parameter m_eta must be nonnegative, got {m_eta}"
            )));
        }
        Ok(TailParams { eta, m_eta })
    }
}

/// Upper bound on `E|X|^2` for a log-concave distribution with tail
/// parameters `t` in dimension `d`: `2 d (d + 1) / eta^2 + m_eta^2`.
pub fn second_moment_bound(t: TailParams, d: usize) -> f64 {
    let d = d as f64;
    2.0 * d * (d + 1.0) / (t.eta * t.eta) + t.m_eta * t.m_eta
}

/// Upper bound on `Pr(|X| > R C)` when `E|X|^2 <= C^2` and the law is
/// log-concave: `exp(-R + 1)` for `R > 1`, clamped to the vacuous 1
/// otherwise.
pub fn tail_probability_bound(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else {
        (-r + 1.0).exp()
    }
}

/// Sub-exponential tail radius/probability pair: combining the moment
/// bound with the tail bound gives
/// `Pr(|X| > R * sqrt(second_moment_bound)) < exp(-R + 1)`.
pub fn light_tail_bound(t: TailParams, d: usize, r: f64) -> (f64, f64) {
    (
        r * second_moment_bound(t, d).sqrt(),
        tail_probability_bound(r),
    )
}

/// Diagonal-covariance Gaussian, the analytic oracle family.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianOracle {
    mean: Vec<f64>,
    variances: Vec<f64>,
}

impl GaussianOracle {
    pub fn new(mean: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(LabError::DimensionMismatch {
                expected: mean.len(),
                got: variances.len(),
            });
        }
        if mean.is_empty() {
            return Err(LabError::InvalidParameter("empty mean vector".into()));
        }
        if variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(LabError::InvalidParameter(
                "variances must be strictly positive".into(),
            ));
        }
        Ok(GaussianOracle { mean, variances })
    }

    /// Standard normal in dimension `d`.
    pub fn standard(d: usize) -> Self {
        GaussianOracle {
            mean: vec![0.0; d],
            variances: vec![1.0; d],
        }
    }

    /// 1-D Gaussian with the given mean and *variance*.
    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean], vec![variance])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `E|X|^2 = sum(variances) + |mean|^2`.
    pub fn second_moment(&self) -> f64 {
        self.variances.iter().sum::<f64>() + norm_sq(&self.mean)
    }

    /// Tail parameters valid for this Gaussian: with `s = max sigma_i`,
    /// `f(x) >= |x - m|^2 / (2 s^2) >= eta |x - m|` holds for
    /// `|x - m| >= 2 eta s^2`, so `eta = 1/s`, `m_eta = 2 s` works.
    pub fn tail_params(&self) -> TailParams {
        let s = self
            .variances
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max)
            .sqrt();
        TailParams {
            eta: 1.0 / s,
            m_eta: 2.0 * s,
        }
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum PotentialKind {
    /// `f(x) = sum (x_i - m_i)^2 / (2 sigma_i^2)`.
    Gaussian {
        mean: Vec<f64>,
        inv_variances: Vec<f64>,
    },
    /// `f ≡ 0`, the uniform potential (meaningful only under a constraint).
    Uniform,
    Custom { value: ValueFn, gradient: GradFn },
}

/// A target log-density descriptor: dimension, `f`, its gradient, the
/// gradient Lipschitz constant and tail parameters.
///
/// Values and gradients are pure and the struct is immutable, so a
/// `Potential` can be shared freely across concurrent chains.
#[derive(Clone)]
pub struct Potential {
    dim: usize,
    kind: PotentialKind,
    lipschitz: f64,
    tail: TailParams,
    minimizer: Vec<f64>,
}

impl Potential {
    /// Gaussian potential from an oracle; `L = 1 / min sigma_i^2` and the
    /// minimizer sits at the mean with `f(mean) = 0`.
    pub fn gaussian(oracle: &GaussianOracle) -> Self {
        let min_var = oracle.variances.iter().cloned().fold(f64::MAX, f64::min);
        Potential {
            dim: oracle.dim(),
            kind: PotentialKind::Gaussian {
                mean: oracle.mean.clone(),
                inv_variances: oracle.variances.iter().map(|v| 1.0 / v).collect(),
            },
            lipschitz: 1.0 / min_var,
            tail: oracle.tail_params(),
            minimizer: oracle.mean.clone(),
        }
    }

    /// The zero potential (`f ≡ 0`, `L = 0`). Tail parameters must be
    /// supplied by the caller: unconstrained `f ≡ 0` has no tail, but the
    /// constrained uniform target satisfies the light-tail assumption with
    /// arbitrary `eta` and `m_eta` equal to the constraint diameter.
    pub fn uniform(dim: usize, tail: TailParams) -> Self {
        Potential {
            dim,
            kind: PotentialKind::Uniform,
            lipschitz: 0.0,
            tail,
            minimizer: vec![0.0; dim],
        }
    }

    /// Arbitrary differentiable potential. The caller certifies convexity,
    /// the Lipschitz constant and the tail parameters; the invariant tests
    /// in this module can spot-check all three.
    pub fn custom<V, G>(
        dim: usize,
        value: V,
        gradient: G,
        lipschitz: f64,
        tail: TailParams,
    ) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Potential {
            dim,
            kind: PotentialKind::Custom {
                value: Arc::new(value),
                gradient: Arc::new(gradient),
            },
            lipschitz,
            tail,
            minimizer: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn tail(&self) -> TailParams {
        self.tail
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluates `f(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match &self.kind {
            PotentialKind::Gaussian {
                mean,
                inv_variances,
            } => {
                let mut acc = 0.0;
                for i in 0..x.len() {
                    let d = x[i] - mean[i];
                    acc += 0.5 * d * d * inv_variances[i];
                }
                acc
            }
            PotentialKind::Uniform => 0.0,
            PotentialKind::Custom { value, .. } => value(x),
        })
    }

    /// Evaluates `∇f(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.dim];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    /// Gradient into a caller-provided buffer; the hot path of the chain
    /// drivers. Dimensions are checked once at run start, not here.
    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            PotentialKind::Gaussian {
                mean,
                inv_variances,
            } => {
                for i in 0..x.len() {
                    out[i] = (x[i] - mean[i]) * inv_variances[i];
                }
            }
            PotentialKind::Uniform => out.fill(0.0),
            PotentialKind::Custom { gradient, .. } => {
                out.copy_from_slice(&gradient(x));
            }
        }
    }

    /// Same potential with the tail parameters replaced (tighter
    /// caller-certified parameters than the built-in conservative ones).
    pub fn with_tail(mut self, tail: TailParams) -> Potential {
        self.tail = tail;
        self
    }

    /// Same potential recentered so the minimizer is the origin:
    /// `g(y) = f(y + x*) - f(x*)`.
    pub fn shifted_to_origin(&self) -> Potential {
        let shift = self.minimizer.clone();
        if shift.iter().all(|v| *v == 0.0) {
            return self.clone();
        }
        match &self.kind {
            PotentialKind::Gaussian { inv_variances, .. } => Potential {
                dim: self.dim,
                kind: PotentialKind::Gaussian {
                    mean: vec![0.0; self.dim],
                    inv_variances: inv_variances.clone(),
                },
                lipschitz: self.lipschitz,
                tail: self.tail,
                minimizer: vec![0.0; self.dim],
            },
            PotentialKind::Uniform => self.clone(),
            PotentialKind::Custom { value, gradient } => {
                let v = value.clone();
                let g = gradient.clone();
                let s1 = shift.clone();
                let s2 = shift.clone();
                let offset = v(&shift);
                Potential {
                    dim: self.dim,
                    kind: PotentialKind::Custom {
                        value: Arc::new(move |y: &[f64]| {
                            let x: Vec<f64> = y.iter().zip(&s1).map(|(a, b)| a + b).collect();
                            v(&x) - offset
                        }),
                        gradient: Arc::new(move |y: &[f64]| {
                            let x: Vec<f64> = y.iter().zip(&s2).map(|(a, b)| a + b).collect();
                            g(&x)
                        }),
                    },
                    lipschitz: self.lipschitz,
                    tail: self.tail,
                    minimizer: vec![0.0; self.dim],
                }
            }
        }
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            PotentialKind::Gaussian { .. } => "gaussian",
            PotentialKind::Uniform => "uniform",
            PotentialKind::Custom { .. } => "custom",
        };
        f.debug_struct("Potential")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("lipschitz", &self.lipschitz)
            .field("tail", &self.tail)
            .finish()
    }
}
