//! Belief processes and their quadratic-variation rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Brownian signal with noise `sigma`: `dp = (2/sigma) p (1-p) dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub sigma: f64,
}

/// Conclusive good-news Poisson signal with arrival rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    pub lambda: f64,
}

/// Tabulated quadratic-variation rate, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomQvSpec {
    beliefs: Vec<f64>,
    qv: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProcessSpec {
    Diffusion(DiffusionSpec),
    Poisson(PoissonSpec),
    Custom(CustomQvSpec),
}

impl DiffusionSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn qv(&self, p: f64) -> f64 {
        let s = p * (1.0 - p);
        4.0 * s * s / (self.sigma * self.sigma)
    }

    /// Diffusion coefficient of the belief SDE.
    pub fn volatility(&self, p: f64) -> f64 {
        2.0 / self.sigma * p * (1.0 - p)
    }
}

impl PoissonSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    /// No-news drift of the belief.
    pub fn drift(&self, p: f64) -> f64 {
        -self.lambda * p * (1.0 - p)
    }
}

impl CustomQvSpec {
    pub fn new(beliefs: Vec<f64>, qv: Vec<f64>) -> Result<Self> {
        if beliefs.is_empty() || beliefs.len() != qv.len() {
            return Err(Error::InvalidParameter("qv table needs equally long, non-empty columns".into()));
        }
        if beliefs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("qv table beliefs must be strictly increasing".into()));
        }
        if let Some((b, v)) = beliefs.iter().zip(&qv).find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveQv { belief: *b, value: *v });
        }
        Ok(Self { beliefs, qv })
    }

    pub fn qv(&self, p: f64) -> f64 {
        let b = &self.beliefs;
        if p <= b[0] {
            return self.qv[0];
        }
        if p >= b[b.len() - 1] {
            return self.qv[b.len() - 1];
        }
        let k = b.partition_point(|&x| x <= p) - 1;
        self.qv[k] + (self.qv[k + 1] - self.qv[k]) * (p - b[k]) / (b[k + 1] - b[k])
    }
}

impl ProcessSpec {
    pub fn diffusion(sigma: f64) -> Result<Self> {
        DiffusionSpec::new(sigma).map(Self::Diffusion)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        PoissonSpec::new(lambda).map(Self::Poisson)
    }

    /// Re-run constructor validation, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Diffusion(d) => DiffusionSpec::new(d.sigma).map(|_| ()),
            Self::Poisson(p) => PoissonSpec::new(p.lambda).map(|_| ()),
            Self::Custom(c) => CustomQvSpec::new(c.beliefs.clone(), c.qv.clone()).map(|_| ()),
        }
    }
}

/// Quadratic-variation rate of the belief at `p`.
pub fn qv_at(spec: &ProcessSpec, p: f64) -> Result<f64> {
    let v = match spec {
        ProcessSpec::Diffusion(d) => d.qv(p),
        ProcessSpec::Custom(c) => c.qv(p),
        ProcessSpec::Poisson(_) => {
            return Err(Error::UnsupportedProcess(
                "the Poisson process has no quadratic-variation rate; use the Poisson cost transform".into(),
            ))
        }
    };
    if !(v > 0.0) {
        return Err(Error::NonPositiveQv { belief: p, value: v });
    }
    Ok(v)
}
