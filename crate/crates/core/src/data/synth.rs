//! The three 2D synthetic problem generators.
//!
//! Synth1 is the plain pair of isotropic Gaussians. Synth2 and Synth3 are
//! Gaussian mixtures whose exact constants live in the component tables
//! below; the tables are the single tuning point for these layouts and are
//! echoed into every run manifest.

use super::{Dataset, Provenance};
use rand::Rng;
use rand_distr::StandardNormal;

/// One isotropic Gaussian component of a class-conditional mixture.
///
/// `weight` is relative within the component's class and sums to 1 per class.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GaussComponent {
    pub label: i8,
    pub weight: f64,
    pub mean: [f64; 2],
    pub std: f64,
}

/// Synth2: two large clusters face each other across the origin while each
/// class also owns a small corner cluster (upper left for the positives,
/// lower right for the negatives). All four clusters are linearly separable
/// through the origin, but a boundary fitted to the two middle clusters
/// alone splits along their displacement axis and leaves both corners
/// confidently on the wrong side. Uncertainty sampling started from two
/// middle points therefore keeps refining a wrong boundary whose most
/// uncertain instances are other middle points, and never visits the
/// corners; selectors that explore large-norm or unrepresented regions
/// recover the corners within a few queries.
///
/// These constants are deliberately tunable; changing them changes the
/// difficulty of the trap. They are recorded in every run manifest.
pub const SYNTH2_COMPONENTS: [GaussComponent; 4] = [
    GaussComponent { label: 1, weight: 0.72, mean: [0.9, 0.28], std: 0.22 },
    GaussComponent { label: 1, weight: 0.28, mean: [-2.2, 1.35], std: 0.25 },
    GaussComponent { label: -1, weight: 0.72, mean: [-0.9, -0.28], std: 0.22 },
    GaussComponent { label: -1, weight: 0.28, mean: [2.2, -1.35], std: 0.25 },
];

/// Synth3 before tilting: three arms of a ⊔ shape, each arm two Gaussians.
/// The left and right arms are positive, the bottom arm negative, so adjacent
/// arms alternate class.
pub const SYNTH3_COMPONENTS: [GaussComponent; 6] = [
    GaussComponent { label: 1, weight: 0.25, mean: [-1.0, 0.5], std: 0.3 },
    GaussComponent { label: 1, weight: 0.25, mean: [-1.0, 1.5], std: 0.3 },
    GaussComponent { label: 1, weight: 0.25, mean: [1.0, 0.5], std: 0.3 },
    GaussComponent { label: 1, weight: 0.25, mean: [1.0, 1.5], std: 0.3 },
    GaussComponent { label: -1, weight: 0.5, mean: [-0.5, 0.0], std: 0.3 },
    GaussComponent { label: -1, weight: 0.5, mean: [0.5, 0.0], std: 0.3 },
];

/// Synth3's tilt angle (30°).
pub const SYNTH3_TILT_RADIANS: f64 = std::f64::consts::FRAC_PI_6;

const SYNTH1_COMPONENTS: [GaussComponent; 2] = [
    GaussComponent { label: 1, weight: 1.0, mean: [1.0, 1.0], std: 1.0 },
    GaussComponent { label: -1, weight: 1.0, mean: [-1.0, -1.0], std: 1.0 },
];

/// Two isotropic unit-variance Gaussians at (1,1) and (−1,−1).
pub fn gen_synth1<R: Rng>(n_per_class: usize, rng: &mut R) -> Dataset {
    gen_mixture("synth1", &SYNTH1_COMPONENTS, 0.0, n_per_class, rng)
}

/// Cluster-structured problem; see [`SYNTH2_COMPONENTS`].
pub fn gen_synth2<R: Rng>(n_per_class: usize, rng: &mut R) -> Dataset {
    gen_mixture("synth2", &SYNTH2_COMPONENTS, 0.0, n_per_class, rng)
}

/// Tilted-⊔ problem; see [`SYNTH3_COMPONENTS`].
pub fn gen_synth3<R: Rng>(n_per_class: usize, rng: &mut R) -> Dataset {
    gen_mixture("synth3", &SYNTH3_COMPONENTS, SYNTH3_TILT_RADIANS, n_per_class, rng)
}

/// Samples `n_per_class` points per class, all positives first, each point
/// drawn from its class mixture by a categorical component draw followed by
/// an isotropic Gaussian, then rotated by `tilt`.
fn gen_mixture<R: Rng>(
    name: &str,
    components: &[GaussComponent],
    tilt: f64,
    n_per_class: usize,
    rng: &mut R,
) -> Dataset {
    assert!(n_per_class >= 1, "need at least one sample per class");
    let (sin_t, cos_t) = tilt.sin_cos();
    let n = 2 * n_per_class;
    let mut x = nalgebra::DMatrix::zeros(n, 2);
    let mut y = Vec::with_capacity(n);
    let mut row = 0;
    for &label in &[1i8, -1] {
        let class: Vec<&GaussComponent> =
            components.iter().filter(|c| c.label == label).collect();
        debug_assert!(
            (class.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-12,
            "class weights must sum to 1"
        );
        for _ in 0..n_per_class {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut comp = *class.last().expect("class has components");
            for c in &class {
                acc += c.weight;
                if u < acc {
                    comp = c;
                    break;
                }
            }
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let px = comp.mean[0] + comp.std * z0;
            let py = comp.mean[1] + comp.std * z1;
            x[(row, 0)] = cos_t * px - sin_t * py;
            x[(row, 1)] = sin_t * px + cos_t * py;
            y.push(label);
            row += 1;
        }
    }
    Dataset::new(name, x, y, Provenance::Synthetic)
        .expect("generated data is finite and two-class")
}

/// Class-conditional mixture density of Synth1 at a point, marginalized over
/// both classes with equal priors. Used by the preference-map sanity check.
pub fn synth1_mixture_density(px: f64, py: f64) -> f64 {
    let gauss = |mx: f64, my: f64| {
        let dx = px - mx;
        let dy = py - my;
        (-(dx * dx + dy * dy) / 2.0).exp() / (2.0 * std::f64::consts::PI)
    };
    0.5 * gauss(1.0, 1.0) + 0.5 * gauss(-1.0, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synth1_empirical_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let ds = gen_synth1(n, &mut rng);
        assert_eq!(ds.d(), 2);
        for (label, want) in [(1i8, 1.0), (-1i8, -1.0)] {
            for j in 0..2 {
                let (sum, cnt) = (0..ds.n())
                    .filter(|&i| ds.y[i] == label)
                    .fold((0.0, 0usize), |(s, c), i| (s + ds.x[(i, j)], c + 1));
                assert_eq!(cnt, n);
                let mean = sum / cnt as f64;
                assert!(
                    (mean - want).abs() < 0.02,
                    "class {label} col {j}: mean {mean}"
                );
            }
        }
    }

    #[test]
    fn generators_deterministic_and_balanced() {
        for gen in [gen_synth1, gen_synth2, gen_synth3] {
            let a = gen(50, &mut ChaCha8Rng::seed_from_u64(3));
            let b = gen(50, &mut ChaCha8Rng::seed_from_u64(3));
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
            assert_eq!(a.d(), 2);
            assert_eq!(a.y.iter().filter(|&&l| l == 1).count(), 50);
            assert_eq!(a.y.iter().filter(|&&l| l == -1).count(), 50);
            assert!(a.x.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn synth2_component_counts_match_weights() {
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ds = gen_synth2(n, &mut rng);
        // Clusters are far apart relative to their stds, so nearest-mean
        // recovers the sampled component essentially always.
        for &label in &[1i8, -1] {
            let comps: Vec<&GaussComponent> = SYNTH2_COMPONENTS
                .iter()
                .filter(|c| c.label == label)
                .collect();
            let mut counts = vec![0usize; comps.len()];
            for i in 0..ds.n() {
                if ds.y[i] != label {
                    continue;
                }
                let nearest = comps
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        let da = (ds.x[(i, 0)] - a.mean[0]).powi(2)
                            + (ds.x[(i, 1)] - a.mean[1]).powi(2);
                        let db = (ds.x[(i, 0)] - b.mean[0]).powi(2)
                            + (ds.x[(i, 1)] - b.mean[1]).powi(2);
                        da.partial_cmp(&db).unwrap()
                    })
                    .map(|(k, _)| k)
                    .unwrap();
                counts[nearest] += 1;
            }
            for (k, comp) in comps.iter().enumerate() {
                let expect = comp.weight * n as f64;
                let sigma = (n as f64 * comp.weight * (1.0 - comp.weight)).sqrt();
                let dev = (counts[k] as f64 - expect).abs();
                assert!(
                    dev < 5.0 * sigma,
                    "label {label} component {k}: count {} vs expected {expect}",
                    counts[k]
                );
            }
        }
    }

    #[test]
    fn synth1_density_integrates_to_one() {
        // Riemann sum over a wide box.
        let (lo, hi, steps) = (-8.0, 8.0, 400);
        let h = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let px = lo + (i as f64 + 0.5) * h;
                let py = lo + (j as f64 + 0.5) * h;
                total += synth1_mixture_density(px, py) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }
}
