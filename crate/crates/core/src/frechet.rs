//! Weighted Fréchet means.
//!
//! Both algorithms walk from the current estimate towards one data tree at a
//! time along the connecting geodesic, with shrinking step proportions. The
//! stochastic variant picks the data tree at random (by weight); the cyclic
//! variant visits the trees in order and folds the weights into the step.

use std::collections::VecDeque;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{distance, step_toward};
use crate::rng;
use crate::tree::{PendantMode, PhyloTree};

/// Trees with normalized nonnegative weights.
#[derive(Clone, Debug)]
pub struct WeightedSample {
    trees: Vec<PhyloTree>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(trees: Vec<PhyloTree>, weights: Vec<f64>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::EmptySample);
        }
        if trees.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} trees but {} weights",
                trees.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        if trees.iter().any(|t| !t.same_leaves(&trees[0])) {
            return Err(Error::LeafSetMismatch);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(WeightedSample { trees, weights })
    }

    pub fn uniform(trees: Vec<PhyloTree>) -> Result<Self> {
        let n = trees.len();
        Self::new(trees, vec![1.0; n])
    }

    pub fn trees(&self) -> &[PhyloTree] {
        &self.trees
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Entries with positive weight, renormalized.
    fn active(&self) -> (Vec<&PhyloTree>, Vec<f64>) {
        self.trees
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(t, &w)| (t, w))
            .unzip()
    }
}

/// Σ wᵢ d(y, zᵢ)².
pub fn frechet_objective(y: &PhyloTree, sample: &WeightedSample, mode: PendantMode) -> Result<f64> {
    let mut total = 0.0;
    for (z, &w) in sample.trees.iter().zip(&sample.weights) {
        if w > 0.0 {
            total += w * distance(y, z, mode)?.powi(2);
        }
    }
    Ok(total)
}

/// How Sturm's algorithm picks the data tree at each step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SturmSampling {
    /// Independent draws by weight.
    Iid,
    /// A randomly shifted golden-ratio sequence mapped through the weight CDF.
    /// Each draw still picks tree j with probability wⱼ, but the running
    /// frequencies match the weights to O(log i / i) instead of O(1/√i).
    #[default]
    LowDiscrepancy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MeanMethod {
    Cyclic,
    Sturm { seed: u64, sampling: SturmSampling },
}

impl Default for MeanMethod {
    fn default() -> Self {
        MeanMethod::Cyclic
    }
}

/// Stopping rule and metric for mean computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanConfig {
    /// Convergence radius; `None` means 1e-4 times the mean pairwise distance of the sample.
    pub eps: Option<f64>,
    /// Number of trailing iterates that must lie pairwise within `eps`.
    pub window: usize,
    pub max_iter: usize,
    pub pendant_mode: PendantMode,
}

impl Default for MeanConfig {
    fn default() -> Self {
        MeanConfig {
            eps: None,
            window: 10,
            max_iter: 100_000,
            pendant_mode: PendantMode::Ignore,
        }
    }
}

impl MeanConfig {
    pub fn with_eps(eps: f64) -> Self {
        MeanConfig {
            eps: Some(eps),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeanResult {
    pub mean: PhyloTree,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Relative default for convergence radii.
const DEFAULT_REL_EPS: f64 = 1e-4;

/// Mean distance over pairs of `trees`. Large samples use a fixed subset of
/// about `2n` pairs instead of all of them.
pub(crate) fn mean_pairwise_distance(trees: &[&PhyloTree], mode: PendantMode) -> Result<f64> {
    let n = trees.len();
    if n < 2 {
        return Ok(0.0);
    }
    let mut pairs = Vec::new();
    if n <= 64 {
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
    } else {
        for i in 0..n {
            pairs.push((i, (i + 1) % n));
            pairs.push((i, (i + n / 2) % n));
        }
    }
    let mut total = 0.0;
    for &(i, j) in &pairs {
        total += distance(trees[i], trees[j], mode)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Tracks the last `window` iterates and decides when they lie pairwise
/// within `eps`, using known step lengths to skip most exact checks.
pub(crate) struct Monitor {
    window: usize,
    eps: f64,
    mode: PendantMode,
    iterates: VecDeque<PhyloTree>,
    /// `steps[k]` is the distance from `iterates[k]` to `iterates[k + 1]`.
    steps: VecDeque<f64>,
}

impl Monitor {
    pub fn new(window: usize, eps: f64, mode: PendantMode, start: PhyloTree) -> Self {
        let mut iterates = VecDeque::with_capacity(window + 1);
        iterates.push_back(start);
        Monitor {
            window: window.max(1),
            eps,
            mode,
            iterates,
            steps: VecDeque::with_capacity(window),
        }
    }

    pub fn current(&self) -> &PhyloTree {
        self.iterates.back().expect("monitor always holds an iterate")
    }

    pub fn into_current(mut self) -> PhyloTree {
        self.iterates.pop_back().expect("monitor always holds an iterate")
    }

    /// Records the next iterate, `step` away from the previous one, and reports convergence.
    pub fn push(&mut self, next: PhyloTree, step: f64) -> bool {
        self.iterates.push_back(next);
        self.steps.push_back(step);
        if self.iterates.len() > self.window {
            self.iterates.pop_front();
            self.steps.pop_front();
        }
        self.converged()
    }

    fn converged(&self) -> bool {
        if self.iterates.len() < self.window {
            return false;
        }
        if self.steps.iter().any(|&s| s >= self.eps) {
            return false;
        }
        if self.steps.iter().sum::<f64>() < self.eps {
            return true;
        }
        // Exact check, widest separation first since it is the likeliest to fail.
        let w = self.iterates.len();
        for gap in (2..w).rev() {
            for i in 0..w - gap {
                let bound: f64 = self.steps.range(i..i + gap).sum();
                if bound < self.eps {
                    continue;
                }
                match distance(&self.iterates[i], &self.iterates[i + gap], self.mode) {
                    Ok(d) if d < self.eps => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

fn resolve_eps(cfg: &MeanConfig, trees: &[&PhyloTree]) -> Result<f64> {
    match cfg.eps {
        Some(e) if e > 0.0 => Ok(e),
        Some(e) => Err(Error::ParameterOutOfRange(format!("eps must be positive, got {e}"))),
        None => Ok(DEFAULT_REL_EPS * mean_pairwise_distance(trees, cfg.pendant_mode)?),
    }
}

fn finish(sample: &WeightedSample, mean: PhyloTree, iterations: usize, converged: bool, mode: PendantMode) -> Result<MeanResult> {
    let objective = frechet_objective(&mean, sample, mode)?;
    Ok(MeanResult {
        mean,
        objective,
        iterations,
        converged,
    })
}

/// Deterministic cyclic mean: step `i` moves a proportion
/// `min(1, n·wⱼ/(⌊i/n⌋ + 2))` towards tree `j = i mod n`.
pub fn cyclic_mean(sample: &WeightedSample, cfg: &MeanConfig) -> Result<MeanResult> {
    let (trees, weights) = sample.active();
    let mode = cfg.pendant_mode;
    if trees.len() == 1 {
        return finish(sample, trees[0].clone(), 0, true, mode);
    }
    let eps = resolve_eps(cfg, &trees)?;
    if eps == 0.0 {
        return finish(sample, trees[0].clone(), 0, true, mode);
    }
    let n = trees.len();
    let mut monitor = Monitor::new(cfg.window, eps, mode, trees[0].clone());
    for i in 0..cfg.max_iter {
        let j = i % n;
        let cycle = (i / n) as f64;
        let t = (n as f64 * weights[j] / (cycle + 2.0)).min(1.0);
        let (next, len) = step_toward(monitor.current(), trees[j], t, mode)?;
        if monitor.push(next, t * len) {
            return finish(sample, monitor.into_current(), i + 1, true, mode);
        }
    }
    finish(sample, monitor.into_current(), cfg.max_iter, false, mode)
}

/// Sturm's stochastic mean: step `i` moves a proportion `1/(i+2)` towards a
/// tree drawn by weight.
pub fn sturm_mean(sample: &WeightedSample, seed: u64, cfg: &MeanConfig) -> Result<MeanResult> {
    sturm_mean_with(sample, seed, SturmSampling::default(), cfg)
}

pub fn sturm_mean_with(sample: &WeightedSample, seed: u64, sampling: SturmSampling, cfg: &MeanConfig) -> Result<MeanResult> {
    let (trees, weights) = sample.active();
    let mode = cfg.pendant_mode;
    let mut rng = rng::stream(seed, &[]);
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    let pick = |u: f64| cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
    let start = pick(rng.random::<f64>() * acc);
    if trees.len() == 1 {
        return finish(sample, trees[0].clone(), 0, true, mode);
    }
    let eps = resolve_eps(cfg, &trees)?;
    if eps == 0.0 {
        return finish(sample, trees[start].clone(), 0, true, mode);
    }
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let shift: f64 = rng.random();
    let mut monitor = Monitor::new(cfg.window, eps, mode, trees[start].clone());
    for i in 0..cfg.max_iter {
        let u = match sampling {
            SturmSampling::Iid => rng.random::<f64>(),
            SturmSampling::LowDiscrepancy => (shift + (i as f64 + 1.0) * GOLDEN).fract(),
        };
        let j = pick(u * acc);
        let t = 1.0 / (i as f64 + 2.0);
        let (next, len) = step_toward(monitor.current(), trees[j], t, mode)?;
        if monitor.push(next, t * len) {
            return finish(sample, monitor.into_current(), i + 1, true, mode);
        }
    }
    finish(sample, monitor.into_current(), cfg.max_iter, false, mode)
}

pub fn frechet_mean(sample: &WeightedSample, method: MeanMethod, cfg: &MeanConfig) -> Result<MeanResult> {
    match method {
        MeanMethod::Cyclic => cyclic_mean(sample, cfg),
        MeanMethod::Sturm { seed, sampling } => sturm_mean_with(sample, seed, sampling, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::LeafSet;
    use std::sync::Arc;

    fn spider() -> Vec<PhyloTree> {
        // Three pairwise incompatible cherries on four non-root leaves.
        let l = Arc::new(LeafSet::numbered(4).unwrap());
        [[1, 2], [2, 3], [1, 3]]
            .iter()
            .map(|s| PhyloTree::new(l.clone(), vec![(l.split_from_indices(s).unwrap(), 1.0)]).unwrap())
            .collect()
    }

    #[test]
    fn weights_are_normalized() {
        let s = WeightedSample::new(spider(), vec![2.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.25, 0.5]);
        assert!(WeightedSample::new(spider(), vec![0.0; 3]).is_err());
        assert!(WeightedSample::new(spider(), vec![1.0, -1.0, 1.0]).is_err());
        assert!(matches!(WeightedSample::new(vec![], vec![]), Err(Error::EmptySample)));
    }

    #[test]
    fn sticky_spider_mean_is_star() {
        let s = WeightedSample::uniform(spider()).unwrap();
        let r = cyclic_mean(&s, &MeanConfig::with_eps(1e-4)).unwrap();
        assert!(r.converged);
        assert!(r.mean.norm(PendantMode::Ignore) < 1e-3, "{:?}", r.mean);
        let r = sturm_mean(&s, 3, &MeanConfig::with_eps(1e-4)).unwrap();
        assert!(r.converged);
        assert!(r.mean.norm(PendantMode::Ignore) < 1e-3, "{:?}", r.mean);
    }

    #[test]
    fn basis_weight_returns_vertex() {
        let trees = spider();
        let s = WeightedSample::new(trees.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(cyclic_mean(&s, &MeanConfig::default()).unwrap().mean, trees[1]);
        assert_eq!(sturm_mean(&s, 1, &MeanConfig::default()).unwrap().mean, trees[1]);
    }

    #[test]
    fn monitor_detects_stationary_sequence() {
        let t = spider().remove(0);
        let mut m = Monitor::new(3, 1e-3, PendantMode::Ignore, t.clone());
        assert!(!m.push(t.clone(), 0.0));
        assert!(m.push(t, 0.0));
    }
}
