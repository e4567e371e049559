mod common;

use common::{random_tree, relength, Fixture};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treespace::frechet::{cyclic_mean, frechet_objective, sturm_mean, sturm_mean_with, MeanConfig, SturmSampling, WeightedSample};
use treespace::geodesic::distance;
use treespace::simulate::{constrained_gene_tree, kingman_tree};
use treespace::tree::{PendantMode, PhyloTree};

const IGNORE: PendantMode = PendantMode::Ignore;

fn d(a: &PhyloTree, b: &PhyloTree) -> f64 {
    distance(a, b, IGNORE).unwrap()
}

/// Three resolved trees in one orthant and the Euclidean weighted mean of their lengths.
fn same_orthant(seed: u64, w: [f64; 3]) -> (WeightedSample, PhyloTree) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_tree(&mut rng, &common::leaves(7), 1.0, 0.5, 2.0, false);
    let trees: Vec<PhyloTree> = (0..3).map(|_| relength(&mut rng, &base, 0.5, 2.0)).collect();
    let edges = base.edges().iter().map(|&(s, _)| (s, (0..3).map(|i| w[i] * trees[i].length(s)).sum::<f64>()));
    let mean = PhyloTree::new(base.leaves().clone(), edges).unwrap();
    (WeightedSample::new(trees, w.to_vec()).unwrap(), mean)
}

#[test]
fn objective_examples() {
    let f = Fixture::new();
    let v = f.vertices();
    let single = WeightedSample::uniform(vec![v[1].clone()]).unwrap();
    assert_eq!(frechet_objective(&v[1], &single, IGNORE).unwrap(), 0.0);

    let cone = f.tree([0.0, 0.0, 1.0]);
    let sample = WeightedSample::uniform(v.clone()).unwrap();
    // Distances through the cone point: sqrt(1 + 1 + 1), sqrt(4 + 1 + 0), sqrt(1 + 4 + 0).
    let want = (3.0 + 5.0 + 5.0) / 3.0;
    assert!((frechet_objective(&cone, &sample, IGNORE).unwrap() - want).abs() < 1e-12);

    let doubled = WeightedSample::new(v.clone(), vec![2.0, 2.0, 2.0]).unwrap();
    assert_eq!(
        frechet_objective(&cone, &doubled, IGNORE).unwrap(),
        frechet_objective(&cone, &sample, IGNORE).unwrap()
    );
    let other = PhyloTree::star(common::leaves(4));
    assert!(frechet_objective(&other, &sample, IGNORE).is_err());
}

#[test]
fn single_tree_means() {
    let f = Fixture::new();
    let v = f.vertices();
    let s = WeightedSample::uniform(vec![v[2].clone()]).unwrap();
    assert_eq!(cyclic_mean(&s, &MeanConfig::default()).unwrap().mean, v[2]);
    assert_eq!(sturm_mean(&s, 1, &MeanConfig::default()).unwrap().mean, v[2]);
}

#[test]
fn same_orthant_means_are_euclidean() {
    for seed in 0..5 {
        let (sample, want) = same_orthant(seed, [0.2, 0.3, 0.5]);
        let cfg = MeanConfig::default();
        let c = cyclic_mean(&sample, &cfg).unwrap();
        let s = sturm_mean(&sample, seed, &cfg).unwrap();
        let scale = d(&sample.trees()[0], &sample.trees()[1]);
        for m in [&c, &s] {
            assert!(m.converged);
            assert!(d(&m.mean, &want) < 1e-3 * scale, "{}", d(&m.mean, &want));
        }
    }
}

#[test]
fn iid_sturm_sampling_also_converges() {
    let (sample, want) = same_orthant(3, [0.2, 0.3, 0.5]);
    let cfg = MeanConfig {
        eps: Some(1e-3),
        max_iter: 1_000_000,
        ..Default::default()
    };
    let m = sturm_mean_with(&sample, 4, SturmSampling::Iid, &cfg).unwrap();
    assert!(d(&m.mean, &want) < 0.05, "{}", d(&m.mean, &want));
}

#[test]
fn mean_dominates_sample_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let trees: Vec<PhyloTree> = (0..6)
            .map(|_| random_tree(&mut rng, &common::leaves(6), 0.8, 0.1, 1.0, false))
            .collect();
        let sample = WeightedSample::uniform(trees.clone()).unwrap();
        let m = cyclic_mean(&sample, &MeanConfig::default()).unwrap();
        assert!(m.objective >= 0.0);
        for t in &trees {
            assert!(m.objective <= frechet_objective(t, &sample, IGNORE).unwrap() + 1e-8);
        }
    }
}

fn coalescent_sample(seed: u64) -> (WeightedSample, f64) {
    let species = kingman_tree(6, seed).unwrap();
    let trees: Vec<PhyloTree> = (0..5).map(|i| constrained_gene_tree(&species, 1.0, 1000 * seed + i).unwrap()).collect();
    let sample = WeightedSample::uniform(trees).unwrap();
    let refs: Vec<f64> = sample.trees().iter().skip(1).map(|t| d(&sample.trees()[0], t)).collect();
    let eps = 1e-4 * refs.iter().sum::<f64>() / refs.len() as f64;
    (sample, eps)
}

fn tight(eps: f64) -> MeanConfig {
    MeanConfig {
        eps: Some(eps),
        max_iter: 100_000_000,
        ..Default::default()
    }
}

#[test]
fn cyclic_and_sturm_agree_on_coalescent_samples() {
    // The window rule bounds the spread of the last iterates, not the error of
    // the stochastic iterate, so a minority of Sturm runs stop 2 to 5 eps away.
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (sample, eps) = coalescent_sample(seed);
        let c = cyclic_mean(&sample, &tight(eps)).unwrap();
        let s = sturm_mean(&sample, seed, &tight(eps)).unwrap();
        assert!(c.converged && s.converged);
        let ratio = d(&c.mean, &s.mean) / eps;
        within += (ratio <= 2.0) as usize;
        worst = worst.max(ratio);
    }
    assert!(within >= 80, "{within} of 100 within 2 eps");
    assert!(worst < 6.0, "worst {worst} eps");
}

#[test]
fn cyclic_mean_is_within_eps_of_a_tighter_run() {
    for seed in [1, 7, 16, 64] {
        let (sample, eps) = coalescent_sample(seed);
        let c = cyclic_mean(&sample, &tight(eps)).unwrap();
        let r = cyclic_mean(&sample, &tight(eps / 10.0)).unwrap();
        assert!(d(&c.mean, &r.mean) < eps, "seed {seed}: {}", d(&c.mean, &r.mean) / eps);
    }
}

#[test]
fn permutations_move_the_cyclic_mean_by_at_most_two_eps() {
    let (sample, want) = same_orthant(7, [0.2, 0.3, 0.5]);
    let eps = 1e-4;
    let cfg = MeanConfig::with_eps(eps);
    let base = cyclic_mean(&sample, &cfg).unwrap().mean;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut idx: Vec<usize> = (0..3).collect();
    for _ in 0..5 {
        idx.shuffle(&mut rng);
        let trees = idx.iter().map(|&i| sample.trees()[i].clone()).collect();
        let weights = idx.iter().map(|&i| sample.weights()[i]).collect();
        let shuffled = WeightedSample::new(trees, weights).unwrap();
        let m = cyclic_mean(&shuffled, &cfg).unwrap().mean;
        assert!(d(&m, &base) < 2.0 * eps);
        let s = sturm_mean(&shuffled, 3, &cfg).unwrap().mean;
        assert!(d(&s, &want) < 2.0 * eps);
    }
}

#[test]
fn basis_weights_return_the_vertex() {
    let f = Fixture::new();
    let v = f.vertices();
    for i in 0..3 {
        let mut w = vec![0.0; 3];
        w[i] = 1.0;
        let s = WeightedSample::new(v.clone(), w).unwrap();
        assert_eq!(cyclic_mean(&s, &MeanConfig::default()).unwrap().mean, v[i]);
        assert_eq!(sturm_mean(&s, 2, &MeanConfig::default()).unwrap().mean, v[i]);
    }
}
