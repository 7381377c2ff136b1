//! Particle gradient flow: descend a sliced distance from a seeded
//! Gaussian particle cloud toward a target measure.
//!
//! Each step draws fresh projections (stochastic-gradient style, the way
//! sliced losses drive training loops) and moves the particles along the
//! negative gradient of the estimator's p-th power. The recorded loss is
//! that p-th power.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::rng::{step_seed, substream, STREAM_FLOW_INIT};
use crate::sliced::{grad_hsw_pow, grad_sw_pow, EstimatorConfig};

/// Which estimator drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    Sw,
    Hsw,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub method: FlowMethod,
    pub p: f64,
    pub projections: usize,
    pub bottleneck: usize,
    pub heads: usize,
    pub particles: usize,
    pub steps: usize,
    pub step_size: f64,
    /// Particle snapshots are recorded every this many steps (0 disables
    /// intermediate snapshots; the final state is always recorded).
    pub snapshot_every: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct FlowRecord {
    /// (step, loss) pairs; entry 0 is the loss before any update and the
    /// last entry is evaluated after the final update.
    pub losses: Vec<(usize, f64)>,
    /// (step, particles) snapshots, ending with the final state.
    pub snapshots: Vec<(usize, Array2<f64>)>,
    pub final_particles: DiscreteMeasure,
}

/// The seeded standard-Gaussian particle cloud the flow starts from.
pub fn initial_particles(count: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = substream(seed, STREAM_FLOW_INIT);
    Array2::from_shape_fn((count, dim), |_| rng.sample::<f64, _>(StandardNormal))
}

pub fn run(target: &DiscreteMeasure, cfg: &FlowConfig) -> Result<FlowRecord> {
    if cfg.steps == 0 || cfg.particles == 0 {
        return Err(Error::invalid("steps and particles must be ≥ 1"));
    }
    if cfg.step_size <= 0.0 || !cfg.step_size.is_finite() {
        return Err(Error::invalid("step size must be > 0"));
    }
    if target.len() != cfg.particles {
        return Err(Error::UnsupportedConfiguration(format!(
            "flow gradients require the target size ({}) to equal the particle count ({})",
            target.len(),
            cfg.particles
        )));
    }
    let dim = target.dim();
    let mut particles = initial_particles(cfg.particles, dim, cfg.seed);
    let mut losses = Vec::with_capacity(cfg.steps + 1);
    let mut snapshots = Vec::new();

    for step in 0..cfg.steps {
        let est = EstimatorConfig {
            p: cfg.p,
            projections: cfg.projections,
            bottleneck: cfg.bottleneck,
            heads: cfg.heads,
            seed: step_seed(cfg.seed, step as u64),
        };
        let cloud = DiscreteMeasure::uniform(particles.clone())?;
        let (loss, grad) = match cfg.method {
            FlowMethod::Sw => grad_sw_pow(&cloud, target, &est)?,
            FlowMethod::Hsw => grad_hsw_pow(&cloud, target, &est)?,
        };
        losses.push((step, loss));
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            snapshots.push((step, particles.clone()));
        }
        particles = particles - cfg.step_size * &grad;
    }

    // Closing evaluation after the last update.
    let est = EstimatorConfig {
        p: cfg.p,
        projections: cfg.projections,
        bottleneck: cfg.bottleneck,
        heads: cfg.heads,
        seed: step_seed(cfg.seed, cfg.steps as u64),
    };
    let cloud = DiscreteMeasure::uniform(particles.clone())?;
    let (loss, _) = match cfg.method {
        FlowMethod::Sw => grad_sw_pow(&cloud, target, &est)?,
        FlowMethod::Hsw => grad_hsw_pow(&cloud, target, &est)?,
    };
    losses.push((cfg.steps, loss));
    snapshots.push((cfg.steps, particles.clone()));

    Ok(FlowRecord {
        losses,
        snapshots,
        final_particles: cloud,
    })
}

/// Means of `window`-sized chunks of the loss sequence, for smoothing
/// stochastic-gradient noise when judging descent.
pub fn windowed_means(losses: &[(usize, f64)], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    losses
        .chunks(window)
        .filter(|c| c.len() == window)
        .map(|c| c.iter().map(|(_, l)| l).sum::<f64>() / window as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_from_its_own_target_stays_put() {
        let init = initial_particles(16, 2, 7);
        let target = DiscreteMeasure::uniform(init.clone()).unwrap();
        let cfg = FlowConfig {
            method: FlowMethod::Sw,
            p: 2.0,
            projections: 8,
            bottleneck: 1,
            heads: 1,
            particles: 16,
            steps: 3,
            step_size: 0.1,
            snapshot_every: 0,
            seed: 7,
        };
        let rec = run(&target, &cfg).unwrap();
        assert_eq!(rec.losses[0].1, 0.0);
        assert_eq!(rec.final_particles.supports(), &init);
    }

    #[test]
    fn flow_descends_toward_a_shifted_cloud() {
        let target_pts = initial_particles(32, 2, 100).mapv(|x| x + 3.0);
        let target = DiscreteMeasure::uniform(target_pts).unwrap();
        let cfg = FlowConfig {
            method: FlowMethod::Hsw,
            p: 2.0,
            projections: 16,
            bottleneck: 2,
            heads: 1,
            particles: 32,
            steps: 200,
            step_size: 0.5,
            snapshot_every: 50,
            seed: 3,
        };
        let rec = run(&target, &cfg).unwrap();
        let first = rec.losses.first().unwrap().1;
        let last = rec.losses.last().unwrap().1;
        assert!(last < 0.1 * first, "loss {first} -> {last}");
        assert_eq!(rec.losses.len(), 201);
        assert!(rec.snapshots.len() >= 4);
    }

    #[test]
    fn flow_rejects_mismatched_target_size() {
        let target = DiscreteMeasure::uniform(initial_particles(8, 2, 1)).unwrap();
        let cfg = FlowConfig {
            method: FlowMethod::Sw,
            p: 2.0,
            projections: 4,
            bottleneck: 1,
            heads: 1,
            particles: 16,
            steps: 2,
            step_size: 0.1,
            snapshot_every: 0,
            seed: 0,
        };
        assert!(matches!(
            run(&target, &cfg),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn windowed_means_chunks() {
        let losses: Vec<(usize, f64)> = (0..10).map(|i| (i, i as f64)).collect();
        let means = windowed_means(&losses, 4);
        assert_eq!(means, vec![1.5, 5.5]);
    }
}
