//! The derivative cocycle and its singular-value potentials.
//!
//! For an n-step derivative A = Df^n(x) with singular values
//! a_1 >= ... >= a_d and s = m + t in [0, d] (m integer, t in [0,1)):
//!
//! * phi^s(A) = log(a_{d-m+1} ... a_d) + t log a_{d-m}, built from the
//!   smallest singular values; phi is supermultiplicative, so {-phi^s} is
//!   subadditive.
//! * psi^s(A) = log(a_1 ... a_m) + t log a_{m+1}, built from the largest;
//!   psi is submultiplicative, so {-psi^s} is superadditive.
//!
//! At s = d both collapse to log |det A|. On expanding maps phi <= psi
//! pointwise.

use crate::error::{input, Error, Result};
use crate::map_models::{Model, Point};
use crate::mat::Mat;
use crate::symbolic::MarkovMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// phi^s, smallest singular values; potentials -phi^s are subadditive.
    Sub,
    /// psi^s, largest singular values; potentials -psi^s are superadditive.
    Super,
}

/// Singular-value weight of a matrix with the given singular values (sorted
/// descending), at parameter s in [0, d].
pub fn sv_weight(svals: &[f64], s: f64, flavor: Flavor) -> Result<f64> {
    let d = svals.len();
    if !(0.0..=d as f64 + 1e-12).contains(&s) {
        return input(format!("s = {s} outside [0, {d}]"));
    }
    let s = s.min(d as f64);
    if svals.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("singular values must be positive and finite".into()));
    }
    let m = s.floor() as usize;
    let t = s - m as f64;
    if m == d {
        return Ok(svals.iter().map(|v| v.ln()).sum());
    }
    let mut w = 0.0;
    match flavor {
        Flavor::Sub => {
            for v in &svals[d - m..] {
                w += v.ln();
            }
            if t > 0.0 {
                w += t * svals[d - m - 1].ln();
            }
        }
        Flavor::Super => {
            for v in &svals[..m] {
                w += v.ln();
            }
            if t > 0.0 {
                w += t * svals[m].ln();
            }
        }
    }
    Ok(w)
}

/// Df^n from the one-step Jacobians along an orbit: jacs[k] = Df(x_k), and
/// the chain rule stacks them last on the left.
pub fn cocycle_product(jacs: &[Mat]) -> Result<Mat> {
    let Some(first) = jacs.first() else {
        return input("cocycle product needs at least one factor");
    };
    let mut prod = Mat::identity(first.d);
    for j in jacs {
        prod = j.mul(&prod);
    }
    Ok(prod)
}

/// Orbit points of the canonical representative of `word`: x_k follows the
/// itinerary word[k..]. Each point is assembled backward through inverse
/// branches, which is stable under expansion; forward iteration is not.
pub fn orbit_of_word(model: &Model, word: &[u16]) -> Result<Vec<Point>> {
    (0..word.len()).map(|k| model.cylinder_rep(&word[k..])).collect()
}

/// One-step Jacobians along the cylinder `word`.
pub fn word_jacobians(model: &Model, word: &[u16]) -> Result<Vec<Mat>> {
    if word.is_empty() {
        return input("cylinder word must be nonempty");
    }
    if model.is_locally_constant() {
        word.iter()
            .map(|&s| {
                model
                    .branch_jacobian(s as usize)?
                    .ok_or_else(|| Error::InternalConsistency("missing cell Jacobian".into()))
            })
            .collect()
    } else {
        let orbit = orbit_of_word(model, word)?;
        orbit.iter().map(|x| model.jacobian(x)).collect()
    }
}

/// phi^s or psi^s of the n-step cocycle over the cylinder `word`, evaluated
/// at its canonical representative.
pub fn word_potential(model: &Model, word: &[u16], s: f64, flavor: Flavor) -> Result<f64> {
    let jacs = word_jacobians(model, word)?;
    let prod = cocycle_product(&jacs)?;
    sv_weight(&prod.singular_values()?, s, flavor)
}

/// Potential along the forward orbit of an explicit point. Expansion
/// amplifies rounding along the orbit, so this is meant for modest n.
pub fn point_potential(model: &Model, x: &[f64], n: usize, s: f64, flavor: Flavor) -> Result<f64> {
    if n == 0 {
        return input("potential needs at least one step");
    }
    let mut jacs = Vec::with_capacity(n);
    let mut y = x.to_vec();
    for _ in 0..n {
        jacs.push(model.jacobian(&y)?);
        y = model.evaluate(&y)?;
    }
    let prod = cocycle_product(&jacs)?;
    sv_weight(&prod.singular_values()?, s, flavor)
}

/// Moduli of the eigenvalues of a real matrix, sorted descending. These are
/// the one-step Lyapunov multipliers of a constant cocycle.
pub fn eigen_moduli(m: &Mat) -> Vec<f64> {
    let d = m.d;
    let mut out = match d {
        1 => vec![m.get(0, 0).abs()],
        2 => {
            let tr = m.get(0, 0) + m.get(1, 1);
            let det = m.det();
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let r = disc.sqrt();
                vec![(0.5 * (tr + r)).abs(), (0.5 * (tr - r)).abs()]
            } else {
                let modulus = det.abs().sqrt();
                vec![modulus, modulus]
            }
        }
        _ => {
            // characteristic polynomial x^3 - c2 x^2 + c1 x - c0
            let c2 = m.get(0, 0) + m.get(1, 1) + m.get(2, 2);
            let minor = |i: usize, j: usize| {
                m.get(i, i) * m.get(j, j) - m.get(i, j) * m.get(j, i)
            };
            let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
            let c0 = m.det();
            // depress: x = y + c2/3 turns the cubic into y^3 + p y + q0
            let shift = c2 / 3.0;
            let p = c1 - c2 * c2 / 3.0;
            let q0 = {
                let x = shift;
                x * x * x - c2 * x * x + c1 * x - c0
            };
            let disc = -4.0 * p * p * p - 27.0 * q0 * q0;
            if disc >= 0.0 {
                // three real roots, trigonometric form
                let a = (-p / 3.0).sqrt();
                if a == 0.0 {
                    vec![shift.abs(); 3]
                } else {
                    let arg = (3.0 * q0 / (2.0 * p * a)).clamp(-1.0, 1.0);
                    let theta = arg.acos() / 3.0;
                    (0..3)
                        .map(|k| {
                            let y = 2.0 * a
                                * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                            (y + shift).abs()
                        })
                        .collect()
                }
            } else {
                // one real root by Cardano, complex pair from the product
                let half_q = q0 / 2.0;
                let rad = (half_q * half_q + p * p * p / 27.0).sqrt();
                let u = (-half_q + rad).cbrt();
                let v = (-half_q - rad).cbrt();
                let real = u + v + shift;
                let pair_modulus = (c0 / real).abs().sqrt();
                vec![real.abs(), pair_modulus, pair_modulus]
            }
        }
    };
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// Lyapunov exponents of the base system with respect to a Markov measure on
/// its coding. Exact: our Markov models carry per-cell constant diagonal
/// Jacobians, so each coordinate exponent is a plain expectation.
pub fn markov_exponents(model: &Model, mu: &MarkovMeasure) -> Result<Vec<f64>> {
    if let Some(j) = model.constant_jacobian() {
        return Ok(eigen_moduli(&j).iter().map(|v| v.ln()).collect());
    }
    if !model.is_locally_constant() {
        return Err(Error::Domain(
            "Markov-measure exponents need per-cell constant derivatives".into(),
        ));
    }
    let d = model.dim();
    let mut per_coord = vec![0.0; d];
    for c in 0..d {
        per_coord[c] = mu.expectation(|label| {
            let cell = label[0] as usize;
            let j = model
                .branch_jacobian(cell)
                .expect("validated symbol")
                .expect("locally constant model");
            j.get(c, c).abs().ln()
        });
    }
    per_coord.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(per_coord)
}

/// Exponents of a Markov measure when the derivative is only sampled: the
/// per-coordinate expectation of the one-step log derivative at deep
/// cylinder representatives. Agrees with `markov_exponents` in the locally
/// constant diagonal case; otherwise the bias is O(cylinder width).
pub fn sampled_exponents(model: &Model, mu: &MarkovMeasure) -> Result<Vec<f64>> {
    let d = model.dim();
    let mut vals: Vec<Vec<f64>> = Vec::with_capacity(mu.n_states());
    for state in 0..mu.n_states() {
        let x = model.cylinder_rep(mu.label(state))?;
        let j = model.jacobian(&x)?;
        vals.push((0..d).map(|c| j.get(c, c).abs().ln()).collect());
    }
    let index: std::collections::HashMap<&[u16], usize> =
        (0..mu.n_states()).map(|i| (mu.label(i), i)).collect();
    let mut out: Vec<f64> = (0..d)
        .map(|c| mu.expectation(|label| vals[index[label]][c]))
        .collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct VolumeOptions {
    pub samples: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        VolumeOptions { samples: 4000, horizon: 400, burn_in: 50, seed: 0 }
    }
}

/// Lyapunov exponents with respect to the natural volume-equivalent measure:
/// Birkhoff averages of log derivative data from uniformly sampled starts.
/// Exact for constant Jacobians; Monte Carlo otherwise. Deterministic for a
/// fixed seed regardless of thread count (one counter-seeded stream per
/// sample, summed in index order).
pub fn volume_exponents(model: &Model, opts: &VolumeOptions) -> Result<Vec<f64>> {
    if let Some(j) = model.constant_jacobian() {
        return Ok(eigen_moduli(&j).iter().map(|v| v.ln()).collect());
    }
    if !model.is_torus() {
        return Err(Error::Domain(
            "volume exponents need a volume-preserving-class model; use a Markov measure".into(),
        ));
    }
    if opts.samples == 0 || opts.horizon == 0 {
        return input("volume exponents need samples >= 1 and horizon >= 1");
    }
    let d = model.dim();
    use rayon::prelude::*;
    let per_sample: Vec<Result<f64>> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64 + 1);
            let mut x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            for _ in 0..opts.burn_in {
                x = model.evaluate(&x)?;
            }
            let mut acc = 0.0;
            for _ in 0..opts.horizon {
                let j = model.jacobian(&x)?;
                acc += j.det().abs().ln();
                x = model.evaluate(&x)?;
            }
            Ok(acc / opts.horizon as f64)
        })
        .collect();
    // d = 1 is the only non-constant case today, so the determinant log is
    // the single exponent.
    debug_assert_eq!(d, 1);
    let mut total = 0.0;
    for v in per_sample {
        total += v?;
    }
    Ok(vec![total / opts.samples as f64])
}

#[derive(Debug, Clone)]
pub struct SubadditivityReport {
    pub trials: usize,
    /// max over trials of phi(head) + phi(tail) - phi(total); <= 0 up to
    /// roundoff when phi is supermultiplicative.
    pub max_phi_violation: f64,
    /// max over trials of psi(total) - psi(head) - psi(tail).
    pub max_psi_violation: f64,
    /// max over trials of phi(total) - psi(total); <= 0 on expanding maps.
    pub max_order_violation: f64,
}

impl SubadditivityReport {
    pub fn passes(&self) -> bool {
        self.max_phi_violation <= 1e-9
            && self.max_psi_violation <= 1e-9
            && self.max_order_violation <= 1e-9
    }
}

/// Empirical check of the cocycle inequalities on random orbit segments and
/// random s. Head and tail use the same Jacobian list as the total, so the
/// inequalities are tested as matrix facts, not as resampled estimates.
pub fn check_subadditivity(
    model: &Model,
    trials: usize,
    max_n: usize,
    seed: u64,
) -> Result<SubadditivityReport> {
    if trials == 0 || max_n < 2 {
        return input("subadditivity check needs trials >= 1 and max_n >= 2");
    }
    let d = model.dim();
    let coded = model.transitions_dense().is_ok();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SubadditivityReport {
        trials,
        max_phi_violation: f64::NEG_INFINITY,
        max_psi_violation: f64::NEG_INFINITY,
        max_order_violation: f64::NEG_INFINITY,
    };
    let transitions = if coded { model.transitions_dense().ok() } else { None };
    for _ in 0..trials {
        let n = rng.gen_range(2..=max_n);
        let split = rng.gen_range(1..n);
        let s = rng.gen_range(0.0..=d as f64);
        let jacs: Vec<Mat> = if let Some(t) = &transitions {
            // random admissible word
            let k = t.len();
            let mut word = Vec::with_capacity(n);
            let mut sym = rng.gen_range(0..k);
            word.push(sym as u16);
            for _ in 1..n {
                let succ: Vec<usize> =
                    (0..k).filter(|&j| t[sym][j] == 1).collect();
                sym = succ[rng.gen_range(0..succ.len())];
                word.push(sym as u16);
            }
            word_jacobians(model, &word)?
        } else {
            let mut x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let mut jacs = Vec::with_capacity(n);
            for _ in 0..n {
                jacs.push(model.jacobian(&x)?);
                x = model.evaluate(&x)?;
            }
            jacs
        };
        let total = cocycle_product(&jacs)?.singular_values()?;
        let head = cocycle_product(&jacs[..split])?.singular_values()?;
        let tail = cocycle_product(&jacs[split..])?.singular_values()?;
        let phi_t = sv_weight(&total, s, Flavor::Sub)?;
        let phi_h = sv_weight(&head, s, Flavor::Sub)?;
        let phi_l = sv_weight(&tail, s, Flavor::Sub)?;
        let psi_t = sv_weight(&total, s, Flavor::Super)?;
        let psi_h = sv_weight(&head, s, Flavor::Super)?;
        let psi_l = sv_weight(&tail, s, Flavor::Super)?;
        report.max_phi_violation = report.max_phi_violation.max(phi_h + phi_l - phi_t);
        report.max_psi_violation = report.max_psi_violation.max(psi_t - psi_h - psi_l);
        report.max_order_violation = report.max_order_violation.max(phi_t - psi_t);
    }
    Ok(report)
}
