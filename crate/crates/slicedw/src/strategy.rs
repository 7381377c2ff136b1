//! Runtime-selectable distance methods.
//!
//! Every estimator sits behind the [`DistanceMethod`] trait and is
//! registered by name in a [`MethodRegistry`], so callers (the CLI in
//! particular) can dispatch on a string without knowing the concrete
//! algorithm. The free functions in [`crate::sliced`] and
//! [`crate::verification`] remain the primary API; these are thin
//! adapters.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::sliced::{self, EstimatorConfig, MaxConfig};
use crate::verification;

/// Union of the knobs any method may need; each method reads the subset
/// it understands and ignores the rest.
#[derive(Debug, Clone)]
pub struct DistanceRequest {
    pub p: f64,
    /// L, the projection / mixing-direction count.
    pub projections: usize,
    /// k, the bottleneck count (hierarchical methods).
    pub bottleneck: usize,
    /// H, the head count (hierarchical Monte Carlo only).
    pub heads: usize,
    pub seed: u64,
    /// Ascent learning rate (max methods).
    pub eta: f64,
    /// Ascent iteration cap (max methods).
    pub iterations: usize,
    /// Ascent movement tolerance (max methods).
    pub tolerance: f64,
    /// Ascent restarts (max methods).
    pub restarts: usize,
}

impl Default for DistanceRequest {
    fn default() -> Self {
        Self {
            p: 2.0,
            projections: 100,
            bottleneck: 1,
            heads: 1,
            seed: 0,
            eta: 0.1,
            iterations: 100,
            tolerance: 1e-8,
            restarts: 1,
        }
    }
}

impl DistanceRequest {
    fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            p: self.p,
            projections: self.projections,
            bottleneck: self.bottleneck,
            heads: self.heads,
            seed: self.seed,
        }
    }

    fn max_config(&self) -> MaxConfig {
        MaxConfig {
            eta: self.eta,
            iterations: self.iterations,
            tolerance: self.tolerance,
            restarts: self.restarts,
            seed: self.seed,
        }
    }
}

/// What a method run produced: the value, optional per-projection terms,
/// and method-specific extras as printable key/value pairs.
#[derive(Debug, Clone)]
pub struct MethodReport {
    pub value: f64,
    pub per_projection: Vec<f64>,
    pub details: Vec<(String, String)>,
}

pub trait DistanceMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport>;
}

struct SwMethod;

impl DistanceMethod for SwMethod {
    fn name(&self) -> &'static str {
        "sw"
    }

    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport> {
        let est = sliced::sw(mu, nu, &req.estimator_config())?;
        Ok(MethodReport {
            value: est.value,
            per_projection: est.per_projection,
            details: Vec::new(),
        })
    }
}

struct HswMethod;

impl DistanceMethod for HswMethod {
    fn name(&self) -> &'static str {
        "hsw"
    }

    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport> {
        let est = sliced::hsw(mu, nu, &req.estimator_config())?;
        Ok(MethodReport {
            value: est.value,
            per_projection: est.per_projection,
            details: Vec::new(),
        })
    }
}

struct MaxSwMethod;

impl DistanceMethod for MaxSwMethod {
    fn name(&self) -> &'static str {
        "max-sw"
    }

    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport> {
        let out = sliced::max_sw(mu, nu, req.p, &req.max_config())?;
        let direction = out
            .direction
            .iter()
            .map(|x| format!("{x:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        Ok(MethodReport {
            value: out.value,
            per_projection: out.trajectory,
            details: vec![("direction".to_string(), direction)],
        })
    }
}

struct MaxHswMethod;

impl DistanceMethod for MaxHswMethod {
    fn name(&self) -> &'static str {
        "max-hsw"
    }

    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport> {
        let out = sliced::max_hsw(mu, nu, req.p, req.bottleneck, &req.max_config())?;
        let mixing = out
            .mixing
            .iter()
            .map(|x| format!("{x:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        Ok(MethodReport {
            value: out.value,
            per_projection: out.trajectory,
            details: vec![("mixing".to_string(), mixing)],
        })
    }
}

struct ExactMethod;

impl DistanceMethod for ExactMethod {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn compute(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        req: &DistanceRequest,
    ) -> Result<MethodReport> {
        let value = verification::exact_wasserstein(mu, nu, req.p)?;
        Ok(MethodReport {
            value,
            per_projection: Vec::new(),
            details: Vec::new(),
        })
    }
}

/// Name → method table. [`MethodRegistry::default`] registers the five
/// built-in methods: sw, hsw, max-sw, max-hsw, exact.
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Box<dyn DistanceMethod>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut reg = Self {
            methods: BTreeMap::new(),
        };
        reg.register(Box::new(SwMethod));
        reg.register(Box::new(HswMethod));
        reg.register(Box::new(MaxSwMethod));
        reg.register(Box::new(MaxHswMethod));
        reg.register(Box::new(ExactMethod));
        reg
    }
}

impl MethodRegistry {
    pub fn register(&mut self, method: Box<dyn DistanceMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn DistanceMethod> {
        self.methods.get(name).map(|m| m.as_ref()).ok_or_else(|| {
            Error::invalid(format!(
                "unknown method `{name}`; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }
}
