//! First-principles oracles for the acceptance suite.
//!
//! Everything here recomputes results the slow, explicit way: cold-start
//! retrains for every candidate/label pair, Gauss-Jordan matrix inverses
//! instead of factorizations, dense grid searches instead of Newton steps,
//! and direct quadrature instead of closed-form special functions. The
//! acceptance tests compare the library's fast paths against these.

use albench_core::classifier::{objective, train, Instances, Model};
use albench_core::data::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Score gaps at or below this never displace the incumbent; mirrors the
/// library's tie-break contract.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ascending scan under the tie-break contract: the incumbent is replaced
/// only when the challenger improves by more than the tolerance.
pub fn oracle_scan(scores: &[f64], minimize: bool) -> usize {
    assert!(!scores.is_empty());
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        let improves = if minimize {
            s < scores[best] - TIE_TOLERANCE
        } else {
            s > scores[best] + TIE_TOLERANCE
        };
        if improves {
            best = i;
        }
    }
    best
}

fn sigma(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }
}

fn margin(ds: &Dataset, w: &DVector<f64>, row: usize) -> f64 {
    let mut z = 0.0;
    for c in 0..ds.d() {
        z += w[c] * ds.x[(row, c)];
    }
    z
}

/// A small labeled/pool split over a random dataset, the shared shape of
/// the strategy-oracle suites.
pub struct SmallInstance {
    pub data: Dataset,
    pub labeled: Vec<usize>,
    pub pool: Vec<usize>,
}

/// Draws a dataset with `l` labeled rows (both classes guaranteed) and `u`
/// pool rows, Gaussian features, random labels elsewhere.
pub fn random_instance<R: Rng>(rng: &mut R, d: usize, l: usize, u: usize) -> SmallInstance {
    assert!(l >= 2 && u >= 1);
    let n = l + u;
    let mut x = DMatrix::zeros(n, d);
    for r in 0..n {
        for c in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            x[(r, c)] = 1.5 * z;
        }
    }
    let mut rows: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        rows.swap(i, j);
    }
    let labeled: Vec<usize> = {
        let mut v = rows[..l].to_vec();
        v.sort_unstable();
        v
    };
    let pool: Vec<usize> = {
        let mut v = rows[l..].to_vec();
        v.sort_unstable();
        v
    };
    let mut y = vec![0i8; n];
    for &r in rows.iter() {
        y[r] = if rng.random_range(0..2) == 0 { 1 } else { -1 };
    }
    y[labeled[0]] = 1;
    y[labeled[1]] = -1;
    let data = Dataset::new(
        "oracle-instance",
        x,
        y,
        albench_core::data::Provenance::Synthetic,
    )
    .expect("generated instance is valid");
    SmallInstance {
        data,
        labeled,
        pool,
    }
}

/// Cold-start training on an explicit row/label list.
pub fn cold_train(ds: &Dataset, rows: &[usize], labels: &[i8], lambda: f64) -> Model {
    let set = Instances::new(ds, rows, labels);
    train(&set, lambda, None).expect("oracle retrain converges")
}

/// Trains on the labeled rows of an instance, cold-started. This is the
/// "current model" both the library and the oracles score against.
pub fn instance_model(inst: &SmallInstance, lambda: f64) -> Model {
    let labels: Vec<i8> = inst.labeled.iter().map(|&r| inst.data.y[r]).collect();
    cold_train(&inst.data, &inst.labeled, &labels, lambda)
}

/// Retrains cold on labeled ∪ {(candidate, y)} and returns the weights.
fn plus_weights(inst: &SmallInstance, candidate: usize, y: i8, lambda: f64) -> DVector<f64> {
    let mut rows = inst.labeled.clone();
    let mut labels: Vec<i8> = inst.labeled.iter().map(|&r| inst.data.y[r]).collect();
    rows.push(candidate);
    labels.push(y);
    cold_train(&inst.data, &rows, &labels, lambda).w
}

/// Retrained pool entropy Σ_{i ∈ pool} H(σ(wᵀxᵢ)), optionally skipping one
/// row; the expected/best-case criteria keep the candidate in the sum.
fn pool_entropy_at(inst: &SmallInstance, w: &DVector<f64>, exclude: Option<usize>) -> f64 {
    let mut total = 0.0;
    for &i in &inst.pool {
        if exclude == Some(i) {
            continue;
        }
        total += entropy(sigma(margin(&inst.data, w, i)));
    }
    total
}

/// H⁺(x, +1) and H⁺(x, −1) for every pool candidate, cold retrains.
fn h_plus_table(inst: &SmallInstance, lambda: f64) -> Vec<[f64; 2]> {
    inst.pool
        .iter()
        .map(|&x| {
            let mut h = [0.0; 2];
            for (slot, &y) in [1i8, -1].iter().enumerate() {
                let w = plus_weights(inst, x, y, lambda);
                h[slot] = pool_entropy_at(inst, &w, None);
            }
            h
        })
        .collect()
}

/// Expected error reduction by brute force; returns the chosen dataset row.
pub fn oracle_eer(inst: &SmallInstance, model: &Model, lambda: f64) -> usize {
    let table = h_plus_table(inst, lambda);
    let scores: Vec<f64> = inst
        .pool
        .iter()
        .zip(&table)
        .map(|(&x, h)| {
            let p = sigma(margin(&inst.data, &model.w, x));
            p * h[0] + (1.0 - p) * h[1]
        })
        .collect();
    inst.pool[oracle_scan(&scores, true)]
}

/// Best-case error reduction by brute force.
pub fn oracle_maxer(inst: &SmallInstance, lambda: f64) -> usize {
    let table = h_plus_table(inst, lambda);
    let scores: Vec<f64> = table.iter().map(|h| h[0].min(h[1])).collect();
    inst.pool[oracle_scan(&scores, true)]
}

/// Combined error reduction by brute force: labeled NLL over 𝓛⁺ plus α
/// times the pool entropy with the candidate left out, minimized over the
/// hypothesized label.
pub fn oracle_ceer(inst: &SmallInstance, lambda: f64, alpha: f64) -> usize {
    let scores: Vec<f64> = inst
        .pool
        .iter()
        .map(|&x| {
            let mut best = f64::INFINITY;
            for &y in &[1i8, -1] {
                let w = plus_weights(inst, x, y, lambda);
                let mut nll = 0.0;
                for &r in &inst.labeled {
                    let z = f64::from(inst.data.y[r]) * margin(&inst.data, &w, r);
                    nll -= sigma(z).ln();
                }
                let z = f64::from(y) * margin(&inst.data, &w, x);
                nll -= sigma(z).ln();
                best = best.min(nll + alpha * pool_entropy_at(inst, &w, Some(x)));
            }
            best
        })
        .collect();
    inst.pool[oracle_scan(&scores, true)]
}

/// Gauss-Jordan inverse with partial pivoting; panics on a singular input.
/// The point is to avoid every factorization shortcut the library uses.
pub fn gauss_jordan_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut inv = DMatrix::identity(n, n);
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if m[(r, col)].abs() > m[(pivot, col)].abs() {
                pivot = r;
            }
        }
        assert!(m[(pivot, col)].abs() > 1e-300, "singular matrix");
        if pivot != col {
            m.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
        }
        let scale = 1.0 / m[(col, col)];
        for c in 0..n {
            m[(col, c)] *= scale;
            inv[(col, c)] *= scale;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                m[(r, c)] -= factor * m[(col, c)];
                inv[(r, c)] -= factor * inv[(col, c)];
            }
        }
    }
    inv
}

/// Expected variance reduction by brute force: retrain cold per label, build
/// the labeled-set Fisher matrix explicitly, invert it with Gauss-Jordan,
/// and accumulate g = 2 Σ_{i ∈ pool} cᵢᵀ F⁻¹ cᵢ with cᵢ = σᵢ(1−σᵢ)xᵢ.
pub fn oracle_evr(inst: &SmallInstance, model: &Model, lambda: f64) -> usize {
    let d = inst.data.d();
    let l_plus = inst.labeled.len() + 1;
    let scores: Vec<f64> = inst
        .pool
        .iter()
        .map(|&x| {
            let p = sigma(margin(&inst.data, &model.w, x));
            let mut expected = 0.0;
            for &y in &[1i8, -1] {
                let w = plus_weights(inst, x, y, lambda);
                let mut f = DMatrix::zeros(d, d);
                for r in inst.labeled.iter().copied().chain(std::iter::once(x)) {
                    let s = sigma(margin(&inst.data, &w, r));
                    let coeff = s * (1.0 - s);
                    for a in 0..d {
                        for b in 0..d {
                            f[(a, b)] += coeff * inst.data.x[(r, a)] * inst.data.x[(r, b)];
                        }
                    }
                }
                f /= l_plus as f64;
                for a in 0..d {
                    f[(a, a)] += lambda;
                }
                let f_inv = gauss_jordan_inverse(&f);
                let mut g = 0.0;
                for &i in &inst.pool {
                    let s = sigma(margin(&inst.data, &w, i));
                    let coeff = s * (1.0 - s);
                    let mut c = DVector::zeros(d);
                    for a in 0..d {
                        c[a] = coeff * inst.data.x[(i, a)];
                    }
                    g += 2.0 * (c.transpose() * &f_inv * &c)[(0, 0)];
                }
                let weight = if y == 1 { p } else { 1.0 - p };
                expected += weight * g;
            }
            expected
        })
        .collect();
    inst.pool[oracle_scan(&scores, true)]
}

/// Regularized objective recomputed from first principles at `w`.
fn objective_at(
    ds: &Dataset,
    rows: &[usize],
    labels: &[i8],
    w: &DVector<f64>,
    lambda: f64,
) -> f64 {
    let mut total = 0.5 * lambda * w.dot(w);
    for (&r, &y) in rows.iter().zip(labels) {
        let z = f64::from(y) * margin(ds, w, r);
        total += z.max(0.0) - z + (-z.abs()).exp().ln_1p();
    }
    total
}

/// Minimum loss increase by brute force: the worse retrained objective over
/// the two hypothesized labels, minimized over candidates.
pub fn oracle_mli(inst: &SmallInstance, lambda: f64) -> usize {
    let scores: Vec<f64> = inst
        .pool
        .iter()
        .map(|&x| {
            let mut rows = inst.labeled.clone();
            let mut labels: Vec<i8> = inst.labeled.iter().map(|&r| inst.data.y[r]).collect();
            rows.push(x);
            labels.push(0);
            let mut worst = f64::NEG_INFINITY;
            for &y in &[1i8, -1] {
                *labels.last_mut().unwrap() = y;
                let w = plus_weights(inst, x, y, lambda);
                worst = worst.max(objective_at(&inst.data, &rows, &labels, &w, lambda));
            }
            worst
        })
        .collect();
    inst.pool[oracle_scan(&scores, true)]
}

/// The adaptive strategy by brute force: entropy uncertainty, log-ratio
/// kernel density with an explicit Gauss-Jordan kernel inverse, the β sweep
/// with deduplicated winners, and the expected-error-reduction tie-break.
pub fn oracle_aal(
    inst: &SmallInstance,
    model: &Model,
    lambda: f64,
    beta_grid: &[f64],
    noise: f64,
) -> usize {
    let m = inst.pool.len();
    assert!(m >= 2);
    let dist = |a: usize, b: usize| {
        let mut acc = 0.0;
        for c in 0..inst.data.d() {
            let diff = inst.data.x[(a, c)] - inst.data.x[(b, c)];
            acc += diff * diff;
        }
        acc
    };
    let mut pairwise = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            pairwise.push(dist(inst.pool[a], inst.pool[b]).sqrt());
        }
    }
    pairwise.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = pairwise.len() / 2;
    let med = if pairwise.len() % 2 == 1 {
        pairwise[mid]
    } else {
        0.5 * (pairwise[mid - 1] + pairwise[mid])
    };
    let h = if med > 0.0 { med } else { 1.0 };

    let mut k = DMatrix::zeros(m, m);
    for a in 0..m {
        k[(a, a)] = 1.0 + noise;
        for b in (a + 1)..m {
            let v = (-dist(inst.pool[a], inst.pool[b]) / (2.0 * h * h)).exp();
            k[(a, b)] = v;
            k[(b, a)] = v;
        }
    }
    let k_inv = gauss_jordan_inverse(&k);
    let density: Vec<f64> = (0..m)
        .map(|i| (0.5 * ((1.0 + noise) * k_inv[(i, i)]).ln()).max(0.0))
        .collect();
    let uncertainty: Vec<f64> = inst
        .pool
        .iter()
        .map(|&i| entropy(sigma(margin(&inst.data, &model.w, i))))
        .collect();

    let mut candidates: Vec<usize> = beta_grid
        .iter()
        .map(|&beta| {
            let blended: Vec<f64> = uncertainty
                .iter()
                .zip(&density)
                .map(|(&u, &d)| {
                    if u == 0.0 {
                        0.0
                    } else {
                        u.powf(beta) * d.powf(1.0 - beta)
                    }
                })
                .collect();
            inst.pool[oracle_scan(&blended, false)]
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let scores: Vec<f64> = candidates
        .iter()
        .map(|&x| {
            let p = sigma(margin(&inst.data, &model.w, x));
            let mut value = 0.0;
            for &y in &[1i8, -1] {
                let w = plus_weights(inst, x, y, lambda);
                let weight = if y == 1 { p } else { 1.0 - p };
                value += weight * pool_entropy_at(inst, &w, None);
            }
            value
        })
        .collect();
    candidates[oracle_scan(&scores, true)]
}

/// Least-margin scan: argmin |wᵀx| over the pool, strict improvement.
pub fn oracle_min_margin(ds: &Dataset, pool: &[usize], w: &DVector<f64>) -> usize {
    let mut best = pool[0];
    let mut best_abs = margin(ds, w, pool[0]).abs();
    for &i in &pool[1..] {
        let a = margin(ds, w, i).abs();
        if a < best_abs {
            best_abs = a;
            best = i;
        }
    }
    best
}

/// Central-difference gradient of the training objective.
pub fn fd_gradient(set: &Instances, lambda: f64, w: &DVector<f64>, step: f64) -> DVector<f64> {
    let d = w.len();
    let mut g = DVector::zeros(d);
    for c in 0..d {
        let mut hi = w.clone();
        let mut lo = w.clone();
        hi[c] += step;
        lo[c] -= step;
        g[c] = (objective(&hi, set, lambda) - objective(&lo, set, lambda)) / (2.0 * step);
    }
    g
}

/// Dense grid search over [−bound, bound]^d followed by box-shrinking local
/// refinement; returns the best objective value found. Only d ∈ {1, 2}.
pub fn grid_refine_objective(set: &Instances, lambda: f64, d: usize, bound: f64) -> f64 {
    assert!(d == 1 || d == 2);
    let eval = |coords: &[f64]| {
        let w = DVector::from_row_slice(coords);
        objective(&w, set, lambda)
    };
    let coarse = if d == 1 { 801 } else { 121 };
    let step = 2.0 * bound / (coarse - 1) as f64;
    let mut best = vec![0.0; d];
    let mut best_obj = f64::INFINITY;
    if d == 1 {
        for i in 0..coarse {
            let w0 = -bound + step * i as f64;
            let obj = eval(&[w0]);
            if obj < best_obj {
                best_obj = obj;
                best = vec![w0];
            }
        }
    } else {
        for i in 0..coarse {
            for j in 0..coarse {
                let w0 = -bound + step * i as f64;
                let w1 = -bound + step * j as f64;
                let obj = eval(&[w0, w1]);
                if obj < best_obj {
                    best_obj = obj;
                    best = vec![w0, w1];
                }
            }
        }
    }
    let mut window = 2.0 * step;
    let per_axis = 11usize;
    for _ in 0..45 {
        let fine = window / (per_axis - 1) as f64;
        let center = best.clone();
        if d == 1 {
            for i in 0..per_axis {
                let w0 = center[0] - window / 2.0 + fine * i as f64;
                let obj = eval(&[w0]);
                if obj < best_obj {
                    best_obj = obj;
                    best = vec![w0];
                }
            }
        } else {
            for i in 0..per_axis {
                for j in 0..per_axis {
                    let w0 = center[0] - window / 2.0 + fine * i as f64;
                    let w1 = center[1] - window / 2.0 + fine * j as f64;
                    let obj = eval(&[w0, w1]);
                    if obj < best_obj {
                        best_obj = obj;
                        best = vec![w0, w1];
                    }
                }
            }
        }
        window *= 0.5;
    }
    best_obj
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let c = 0.5 * (a + b);
    let h = b - a;
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    simpson_step(f, a, b, c, fa, fb, fc, h * (fa + 4.0 * fc + fb) / 6.0, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    c: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let lm = 0.5 * (a + c);
    let rm = 0.5 * (c + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (c - a) * (fa + 4.0 * flm + fc) / 6.0;
    let right = (b - c) * (fc + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, c, lm, fa, fc, flm, left, tol * 0.5, depth - 1)
            + simpson_step(f, c, b, rm, fc, fb, frm, right, tol * 0.5, depth - 1)
    }
}

/// Two-sided Student-t p-value by direct quadrature of the regularized
/// incomplete beta integral I_x(ν/2, 1/2) with x = ν/(ν+t²). The variable
/// change u = sin²θ removes both endpoint singularities, leaving the smooth
/// integrand 2·sin^{ν−1}θ.
pub fn quad_t_two_sided_p(t: f64, dof: f64) -> f64 {
    assert!(dof >= 1.0);
    if !t.is_finite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    let integrand = move |theta: f64| 2.0 * theta.sin().powf(dof - 1.0);
    let upper = x.sqrt().min(1.0).asin();
    let partial = adaptive_simpson(&integrand, 0.0, upper, 1e-13, 60);
    let full = adaptive_simpson(
        &integrand,
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-13,
        60,
    );
    (partial / full).clamp(0.0, 1.0)
}

/// Sample Pearson correlation, recomputed directly.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}
