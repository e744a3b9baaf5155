//! Dataset representation, preprocessing, splitting, and pool bookkeeping.

mod io;
mod synth;

pub use io::{load_csv, load_libsvm, write_csv, write_libsvm, LabelColumn};
pub use synth::{
    gen_synth1, gen_synth2, gen_synth3, synth1_mixture_density, GaussComponent,
    SYNTH2_COMPONENTS, SYNTH3_COMPONENTS, SYNTH3_TILT_RADIANS,
};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

/// How the feature matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Raw,
    Standardized,
    RangeScaled { lo: f64, hi: f64 },
    Synthetic,
}

/// A fixed binary-labeled dataset: n rows of d features with labels in {+1, −1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// n×d feature matrix.
    pub x: DMatrix<f64>,
    /// Labels, one per row, each exactly +1 or −1.
    pub y: Vec<i8>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset, validating labels, class presence, and finiteness.
    pub fn new(
        name: impl Into<String>,
        x: DMatrix<f64>,
        y: Vec<i8>,
        provenance: Provenance,
    ) -> Result<Self> {
        let name = name.into();
        assert_eq!(x.nrows(), y.len(), "feature rows and labels must align");
        if x.ncols() == 0 {
            return Err(Error::NoFeatureColumns);
        }
        for (i, &label) in y.iter().enumerate() {
            assert!(label == 1 || label == -1, "label at row {i} is not ±1");
        }
        if !(y.contains(&1) && y.contains(&-1)) {
            return Err(Error::SingleClass(name));
        }
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                if !x[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Dataset {
            name,
            x,
            y,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    /// Dot product of row `i` with `w` without allocating.
    pub fn row_dot(&self, i: usize, w: &nalgebra::DVector<f64>) -> f64 {
        debug_assert_eq!(w.len(), self.d());
        let mut s = 0.0;
        for j in 0..self.d() {
            s += self.x[(i, j)] * w[j];
        }
        s
    }

    /// Euclidean norm of row `i`.
    pub fn row_norm(&self, i: usize) -> f64 {
        let mut s = 0.0;
        for j in 0..self.d() {
            s += self.x[(i, j)] * self.x[(i, j)];
        }
        s.sqrt()
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn row_dist_sq(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..self.d() {
            let diff = self.x[(i, k)] - self.x[(j, k)];
            s += diff * diff;
        }
        s
    }

    /// Copies a subset of rows (in the given order) into a new dataset.
    fn take_rows(&self, rows: &[usize], name: &str, provenance: Provenance) -> Result<Self> {
        let mut x = DMatrix::zeros(rows.len(), self.d());
        let mut y = Vec::with_capacity(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            for j in 0..self.d() {
                x[(out, j)] = self.x[(r, j)];
            }
            y.push(self.y[r]);
        }
        Dataset::new(name, x, y, provenance)
    }
}

/// Column-wise standardization to zero mean and unit standard deviation.
///
/// The standard deviation uses the population (n) denominator so the
/// transform is bit-reproducible and documented. Constant columns become
/// all-zero. Applying the result to its own output is a no-op within 1e-9.
pub fn standardize(ds: &Dataset) -> Dataset {
    let n = ds.n();
    let d = ds.d();
    let mut x = ds.x.clone();
    for j in 0..d {
        let mean = (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x[(i, j)] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for i in 0..n {
            x[(i, j)] = if std == 0.0 {
                0.0
            } else {
                (x[(i, j)] - mean) / std
            };
        }
    }
    Dataset {
        name: ds.name.clone(),
        x,
        y: ds.y.clone(),
        provenance: Provenance::Standardized,
    }
}

/// Column-wise affine map of [min, max] onto [lo, hi]; constant columns map to lo.
pub fn scale_range(ds: &Dataset, lo: f64, hi: f64) -> Dataset {
    assert!(lo < hi, "scale_range needs lo < hi");
    let n = ds.n();
    let d = ds.d();
    let mut x = ds.x.clone();
    for j in 0..d {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for i in 0..n {
            mn = mn.min(x[(i, j)]);
            mx = mx.max(x[(i, j)]);
        }
        for i in 0..n {
            x[(i, j)] = if mx == mn {
                lo
            } else {
                lo + (x[(i, j)] - mn) * (hi - lo) / (mx - mn)
            };
        }
    }
    Dataset {
        name: ds.name.clone(),
        x,
        y: ds.y.clone(),
        provenance: Provenance::RangeScaled { lo, hi },
    }
}

const SPLIT_RETRY_BOUND: usize = 10_000;

/// Splits into ⌈n/2⌉ training and ⌊n/2⌋ test rows by a uniformly random
/// permutation, resampling (bounded) until both halves contain both classes.
pub fn split_half<R: Rng>(ds: &Dataset, rng: &mut R) -> Result<(Dataset, Dataset)> {
    let n = ds.n();
    assert!(n >= 4, "split_half needs at least 4 rows");
    let n_train = n.div_ceil(2);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..SPLIT_RETRY_BOUND {
        perm.shuffle(rng);
        let (tr, te) = perm.split_at(n_train);
        let both = |part: &[usize]| {
            part.iter().any(|&i| ds.y[i] == 1) && part.iter().any(|&i| ds.y[i] == -1)
        };
        if both(tr) && both(te) {
            let train = ds.take_rows(tr, &ds.name, ds.provenance)?;
            let test = ds.take_rows(te, &ds.name, ds.provenance)?;
            return Ok((train, test));
        }
    }
    Err(Error::SplitRetriesExhausted(ds.name.clone()))
}

/// Labeled/unlabeled bookkeeping over a training dataset.
///
/// Indices refer to rows of the parent dataset. The unlabeled pool is kept in
/// ascending order so that "lowest pool index" tie-breaking is a plain scan.
#[derive(Debug, Clone)]
pub struct PoolState<'a> {
    pub parent: &'a Dataset,
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
}

impl<'a> PoolState<'a> {
    /// Starts a pool with the given rows labeled; everything else is the pool.
    pub fn new(parent: &'a Dataset, labeled: Vec<usize>) -> Self {
        let mut labeled = labeled;
        labeled.sort_unstable();
        let unlabeled: Vec<usize> = (0..parent.n()).filter(|i| !labeled.contains(i)).collect();
        let state = PoolState {
            parent,
            labeled,
            unlabeled,
        };
        state.assert_invariants();
        state
    }

    fn assert_invariants(&self) {
        debug_assert!(
            self.labeled.iter().any(|&i| self.parent.y[i] == 1)
                && self.labeled.iter().any(|&i| self.parent.y[i] == -1),
            "labeled set must contain both classes"
        );
        debug_assert_eq!(
            self.labeled.len() + self.unlabeled.len(),
            self.parent.n(),
            "labeled and unlabeled sets must partition the training rows"
        );
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    /// Pool indices in ascending order.
    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    /// Label of a labeled row (its ground-truth label in the parent).
    pub fn label(&self, idx: usize) -> i8 {
        self.parent.y[idx]
    }

    /// Moves `idx` from the pool to the labeled set, revealing its true label.
    pub fn query(&mut self, idx: usize) {
        let pos = self
            .unlabeled
            .iter()
            .position(|&i| i == idx)
            .expect("queried index must be in the pool");
        self.unlabeled.remove(pos);
        let ins = self.labeled.partition_point(|&i| i < idx);
        self.labeled.insert(ins, idx);
    }
}

/// Picks one uniformly random starting label per class.
pub fn seed_initial_labels<'a, R: Rng>(train: &'a Dataset, rng: &mut R) -> PoolState<'a> {
    let pos: Vec<usize> = (0..train.n()).filter(|&i| train.y[i] == 1).collect();
    let neg: Vec<usize> = (0..train.n()).filter(|&i| train.y[i] == -1).collect();
    assert!(
        !pos.is_empty() && !neg.is_empty(),
        "seed_initial_labels needs both classes"
    );
    let p = pos[rng.random_range(0..pos.len())];
    let n = neg[rng.random_range(0..neg.len())];
    PoolState::new(train, vec![p, n])
}
