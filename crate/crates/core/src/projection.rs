//! Smoothed Heaviside projection and the eroded / intermediate / dilated
//! triple used by the robust formulation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavisideParams {
    pub beta: f64,
    pub eta: f64,
}

impl HeavisideParams {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
        }
        Ok(Self { beta, eta })
    }
}

pub fn heaviside(x: f64, p: HeavisideParams) -> f64 {
    let (b, e) = (p.beta, p.eta);
    ((b * e).tanh() + (b * (x - e)).tanh()) / ((b * e).tanh() + (b * (1.0 - e)).tanh())
}

pub fn heaviside_derivative(x: f64, p: HeavisideParams) -> f64 {
    let (b, e) = (p.beta, p.eta);
    let sech = 1.0 / (b * (x - e)).cosh();
    b * sech * sech / ((b * e).tanh() + (b * (1.0 - e)).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustThresholds {
    pub eroded: f64,
    pub intermediate: f64,
    pub dilated: f64,
}

impl Default for RobustThresholds {
    fn default() -> Self {
        Self { eroded: 0.75, intermediate: 0.5, dilated: 0.25 }
    }
}

impl RobustThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.dilated
            && self.dilated < self.intermediate
            && self.intermediate < self.eroded
            && self.eroded < 1.0;
        if !ok {
            return Err(Error::InvalidArgument("thresholds must satisfy 0 < dil < int < ero < 1".into()));
        }
        Ok(())
    }
}

/// Beta grows by `factor` every `interval` iterations, capped at `beta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSchedule {
    pub beta_init: f64,
    pub beta_max: f64,
    pub factor: f64,
    pub interval: usize,
}

impl ContinuationSchedule {
    pub fn new(beta_init: f64, beta_max: f64) -> Result<Self> {
        let s = Self { beta_init, beta_max, factor: 1.5, interval: 40 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_init > 0.0 && self.beta_max >= self.beta_init && self.beta_max.is_finite()) {
            return Err(Error::InvalidArgument("need 0 < beta_init <= beta_max".into()));
        }
        if !(self.factor >= 1.0) || self.interval == 0 {
            return Err(Error::InvalidArgument("continuation factor must be >= 1 and interval > 0".into()));
        }
        Ok(())
    }

    pub fn beta_at(&self, iter: usize) -> f64 {
        let steps = (iter / self.interval) as i32;
        (self.beta_init * self.factor.powi(steps)).min(self.beta_max)
    }

    pub fn saturated_at(&self, iter: usize) -> bool {
        self.beta_at(iter) >= self.beta_max
    }
}

/// Projected fields and their pointwise derivatives for one filtered field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectedTriple {
    pub eroded: Vec<f64>,
    pub intermediate: Vec<f64>,
    pub dilated: Vec<f64>,
    pub d_eroded: Vec<f64>,
    pub d_intermediate: Vec<f64>,
    pub d_dilated: Vec<f64>,
}

pub fn project_triple(filtered: &[f64], beta: f64, t: &RobustThresholds) -> Result<ProjectedTriple> {
    t.validate()?;
    let pe = HeavisideParams::new(beta, t.eroded)?;
    let pi = HeavisideParams::new(beta, t.intermediate)?;
    let pd = HeavisideParams::new(beta, t.dilated)?;
    let map = |p: HeavisideParams, f: fn(f64, HeavisideParams) -> f64| filtered.iter().map(|&x| f(x, p)).collect();
    Ok(ProjectedTriple {
        eroded: map(pe, heaviside),
        intermediate: map(pi, heaviside),
        dilated: map(pd, heaviside),
        d_eroded: map(pe, heaviside_derivative),
        d_intermediate: map(pi, heaviside_derivative),
        d_dilated: map(pd, heaviside_derivative),
    })
}
