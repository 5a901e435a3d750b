//! Dimension machinery: Bowen-equation roots for both potential families,
//! the Caratheodory singular-dimension crossing, anisotropic box counting,
//! and the Bedford-McMullen analytic oracle for self-affine carpets.

use crate::cocycle::{sv_weight, Flavor};
use crate::error::{input, Error, Result};
use crate::map_models::Model;
use crate::pressure::pressure_limit;
use crate::symbolic::Sft;
use std::collections::HashMap;

/// Certified root of P(s) = 0 on [0, d].
#[derive(Debug, Clone)]
pub struct BowenRoot {
    pub root: f64,
    pub flavor: Flavor,
    /// Final bisection bracket; pressure is positive on the left edge and
    /// nonpositive on the right, except in the flagged endpoint cases.
    pub bracket: (f64, f64),
    pub tolerance: f64,
    pub iterations: usize,
    pub pressure_at_root: f64,
    /// Set when the subshift carries no entropy and the equation collapses.
    pub degenerate: bool,
}

/// Crossing of the depth-N singular partition function.
#[derive(Debug, Clone)]
pub struct CaratheodoryEstimate {
    pub alpha: f64,
    pub r: f64,
    pub n: usize,
    /// Sampled (alpha, (1/N) log Z_N(alpha)) pairs along [0, d].
    pub curve: Vec<(f64, f64)>,
    pub degenerate: bool,
}

/// Least-squares box-counting slope over a ladder of grid scales.
#[derive(Debug, Clone)]
pub struct BoxDimEstimate {
    pub dimension: f64,
    /// (box side, boxes hit) per scale, coarsest first.
    pub scales: Vec<(f64, u128)>,
    pub residual: f64,
}

/// Solve P(s) = 0 by bisection on [0, d], using the depth-swept spectral
/// pressure. Strict decrease of s -> P(s) (slope at most -log of the least
/// expansion rate) makes the root unique; the returned bracket certifies it.
pub fn bowen_root(model: &Model, sft: &Sft, flavor: Flavor, tolerance: f64) -> Result<BowenRoot> {
    if !tolerance.is_finite() || tolerance < 1e-12 {
        return input("bowen_root tolerance must be at least 1e-12");
    }
    let d = model.dim() as f64;
    let m_max = (sft.window_len() + 7).min(12);
    let h_top = sft.topological_entropy()?;
    // Constant diagonal Jacobians make the pressure an affine function of
    // the entropy; solving with the entropy hoisted out keeps large
    // avoid-subshifts from re-running the eigenproblem per bisection step.
    let fast_svals = model
        .constant_jacobian()
        .filter(|j| j.is_diagonal())
        .map(|j| j.singular_values())
        .transpose()?;
    let press = |s: f64| -> Result<f64> {
        match &fast_svals {
            Some(sv) => Ok(h_top - sv_weight(sv, s, flavor)?),
            None => Ok(pressure_limit(model, sft, flavor, s, m_max)?.value),
        }
    };
    if h_top.abs() <= 1e-12 {
        return Ok(BowenRoot {
            root: 0.0,
            flavor,
            bracket: (0.0, 0.0),
            tolerance,
            iterations: 0,
            pressure_at_root: h_top,
            degenerate: true,
        });
    }
    let p_hi = press(d)?;
    if p_hi >= 0.0 {
        // Pressure never crosses zero below the ambient dimension.
        return Ok(BowenRoot {
            root: d,
            flavor,
            bracket: (d, d),
            tolerance,
            iterations: 0,
            pressure_at_root: p_hi,
            degenerate: false,
        });
    }
    let mut lo = 0.0f64;
    let mut hi = d;
    let mut iterations = 0usize;
    while hi - lo > tolerance && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if press(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let root = 0.5 * (lo + hi);
    Ok(BowenRoot {
        root,
        flavor,
        bracket: (lo, hi),
        tolerance,
        iterations,
        pressure_at_root: press(root)?,
        degenerate: false,
    })
}

/// Caratheodory singular dimension of the sub-repeller carried by `z`: the
/// alpha where the depth-N singular partition function changes sign. With r
/// below the cell gap, Bowen balls and cylinders coincide, so the partition
/// function is the weighted cylinder sum; it is evaluated through the
/// spectral radius of the depth-N recode so that the crossing is exact for
/// locally constant data at every N.
pub fn caratheodory_dim(
    model: &Model,
    z: &Sft,
    r: f64,
    n_max: usize,
) -> Result<CaratheodoryEstimate> {
    let gap = model.cell_gap()?;
    if !r.is_finite() || r <= 0.0 || r >= gap {
        return input(format!(
            "r = {r} must sit in (0, {gap}) so Bowen balls match cylinders"
        ));
    }
    if n_max < 4 {
        return input("caratheodory_dim needs N_max >= 4");
    }
    let d = model.dim() as f64;
    let graph: Option<(Sft, Vec<Vec<f64>>)> = if model
        .constant_jacobian()
        .map(|j| j.is_diagonal())
        .unwrap_or(false)
    {
        None
    } else {
        // Depth-N sliding recode with per-state one-step weights, evaluated
        // at the deep cylinder representative.
        let recoded = if z.window_len() == 1 {
            z.recode_window(n_max)?
        } else if model.is_locally_constant() {
            z.clone()
        } else {
            return Err(Error::Domain(
                "sampled models need a base coding (window 1) for the depth-N recode".into(),
            ));
        };
        let mut svals = Vec::with_capacity(recoded.n_states());
        for state in 0..recoded.n_states() {
            let label = recoded.label(state);
            let jac = match model.branch_jacobian(label[0] as usize)? {
                Some(j) => j,
                None => model.jacobian(&model.cylinder_rep(label)?)?,
            };
            svals.push(jac.singular_values()?);
        }
        Some((recoded, svals))
    };
    let h_top = match &graph {
        None => z.topological_entropy()?,
        Some((g, _)) => g.topological_entropy()?,
    };
    let g_of = |alpha: f64| -> Result<f64> {
        match &graph {
            None => {
                let j = model.constant_jacobian().unwrap();
                Ok(h_top - sv_weight(&j.singular_values()?, alpha, Flavor::Sub)?)
            }
            Some((g, svals)) => {
                let mut w = Vec::with_capacity(svals.len());
                for sv in svals {
                    w.push((-sv_weight(sv, alpha, Flavor::Sub)?).exp());
                }
                let rho = g.weighted_by_source(&w)?.spectral_radius();
                if rho <= 0.0 {
                    return Err(Error::InternalConsistency(
                        "weighted recode lost all cycles".into(),
                    ));
                }
                Ok(rho.ln())
            }
        }
    };
    let mut curve = Vec::with_capacity(9);
    for k in 0..9 {
        let alpha = d * k as f64 / 8.0;
        curve.push((alpha, g_of(alpha)?));
    }
    if h_top.abs() <= 1e-12 {
        return Ok(CaratheodoryEstimate { alpha: 0.0, r, n: n_max, curve, degenerate: true });
    }
    if g_of(d)? >= 0.0 {
        return Ok(CaratheodoryEstimate { alpha: d, r, n: n_max, curve, degenerate: false });
    }
    let mut lo = 0.0f64;
    let mut hi = d;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g_of(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CaratheodoryEstimate {
        alpha: 0.5 * (lo + hi),
        r,
        n: n_max,
        curve,
        degenerate: false,
    })
}

/// Box-counting dimension through anisotropic approximate squares: at stage
/// j every coordinate is subdivided to depth k_c with base_c^{-k_c} closest
/// to the common scale max_base^{-j}, and distinct digit prefixes are
/// counted by a deterministic subset construction over the shift graph.
pub fn box_dimension(model: &Model, z: &Sft, max_depth: usize) -> Result<BoxDimEstimate> {
    if model.kind_name() == "perturbed_doubling" {
        return Err(Error::Domain(
            "box counting needs grid-aligned affine geometry".into(),
        ));
    }
    if z.window_len() != 1 {
        return Err(Error::Domain("box counting works on a base coding (window 1)".into()));
    }
    if max_depth < 4 {
        return input("box_dimension needs max_depth >= 4 for three scales");
    }
    let ns = z.n_states();
    if ns > 64 {
        return Err(Error::Budget(format!(
            "box counting supports up to 64 symbols, got {ns}"
        )));
    }
    let bases = model.coordinate_bases()?;
    let d = model.dim();
    let n_max = *bases.iter().max().unwrap() as f64;
    // Per-state digit tuples and successor bitmasks.
    let mut digits = Vec::with_capacity(ns);
    let mut succ = vec![0u64; ns];
    for state in 0..ns {
        digits.push(model.symbol_digits(z.label(state)[0] as usize)?);
        for &t in z.successors(state) {
            succ[state] |= 1u64 << t;
        }
    }
    let full: u64 = if ns == 64 { u64::MAX } else { (1u64 << ns) - 1 };
    let mut scales = Vec::new();
    for j in 2..=max_depth {
        let depths: Vec<usize> = bases
            .iter()
            .map(|&b| {
                let k = (j as f64 * n_max.ln() / (b as f64).ln()).round() as usize;
                k.max(1)
            })
            .collect();
        let horizon = *depths.iter().max().unwrap();
        let count = count_digit_prefixes(&digits, &succ, full, &depths, horizon, d)?;
        scales.push((n_max.powi(-(j as i32)), count));
    }
    let xs: Vec<f64> = (2..=max_depth).map(|j| j as f64 * n_max.ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(BoxDimEstimate {
        dimension: slope.clamp(0.0, d as f64),
        scales,
        residual,
    })
}

/// Number of distinct truncated digit tuples spelled by admissible words:
/// coordinate c only contributes its first depths[c] digits. Memoized on
/// (position, reachable-state set); merging equal sets is sound because the
/// remaining count depends only on where the walk can still go.
fn count_digit_prefixes(
    digits: &[Vec<u32>],
    succ: &[u64],
    full: u64,
    depths: &[usize],
    horizon: usize,
    d: usize,
) -> Result<u128> {
    let mut memo: HashMap<(u32, u64), u128> = HashMap::new();
    fn rec(
        pos: usize,
        set: u64,
        digits: &[Vec<u32>],
        succ: &[u64],
        depths: &[usize],
        horizon: usize,
        d: usize,
        memo: &mut HashMap<(u32, u64), u128>,
    ) -> Result<u128> {
        if pos == horizon {
            return Ok(1);
        }
        if let Some(&c) = memo.get(&(pos as u32, set)) {
            return Ok(c);
        }
        if memo.len() >= 1 << 20 {
            return Err(Error::Budget(
                "box-count subset construction exceeded its memo budget".into(),
            ));
        }
        // Group the currently reachable states by their visible digits.
        let mut groups: HashMap<u64, u64> = HashMap::new();
        for s in 0..succ.len() {
            if set >> s & 1 == 0 {
                continue;
            }
            let mut key = 0u64;
            for c in 0..d {
                if pos < depths[c] {
                    key = key << 13 | (digits[s][c] as u64 + 1);
                }
            }
            *groups.entry(key).or_insert(0) |= succ[s];
        }
        let mut total: u128 = 0;
        for (_, next) in groups {
            total += rec(pos + 1, next, digits, succ, depths, horizon, d, memo)?;
        }
        memo.insert((pos as u32, set), total);
        Ok(total)
    }
    rec(0, full, digits, succ, depths, horizon, d, &mut memo)
}

/// Bedford-McMullen dimension of the carpet over an rows x cols grid with
/// the given (col, row) digits: log_cols of the sum over columns of
/// t_col^(log_rows cols).
pub fn mcmullen_dim(rows: u32, cols: u32, digits: &[(u32, u32)]) -> Result<f64> {
    if cols < 2 || rows <= cols {
        return input("mcmullen_dim needs rows > cols >= 2");
    }
    if digits.is_empty() {
        return input("mcmullen_dim needs at least one digit");
    }
    let mut t = vec![0u32; cols as usize];
    let mut seen = std::collections::BTreeSet::new();
    for &(c, r) in digits {
        if c >= cols || r >= rows {
            return input(format!("digit ({c},{r}) outside the {rows}x{cols} grid"));
        }
        if seen.insert((c, r)) {
            t[c as usize] += 1;
        }
    }
    let gamma = (cols as f64).ln() / (rows as f64).ln();
    let sum: f64 = t
        .iter()
        .filter(|&&tc| tc > 0)
        .map(|&tc| (tc as f64).powf(gamma))
        .sum();
    Ok(sum.ln() / (cols as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_models::{BranchConfig, ModelConfig};
    use crate::symbolic::coding;

    const LN_PHI: f64 = 0.481_211_825_059_603_47;

    fn golden_two_slope() -> Model {
        Model::new(ModelConfig::SftAffine {
            alphabet: 2,
            transitions: vec![vec![0, 1], vec![1, 1]],
            branches: vec![
                BranchConfig { linear: vec![vec![1.0 / 3.0]], offset: vec![0.0] },
                BranchConfig { linear: vec![vec![0.5]], offset: vec![0.5] },
            ],
        })
        .unwrap()
    }

    /// Root of log rho(s) = 0 for the weighted golden-mean graph with edge
    /// weights 3^-s (from 0) and 2^-s (from 1), solved independently.
    fn golden_two_slope_oracle() -> f64 {
        let rho = |s: f64| {
            let b = 2f64.powf(-s);
            let c = 6f64.powf(-s);
            (b + (b * b + 4.0 * c).sqrt()) / 2.0
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if rho(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn doubling_root_is_one_for_both_families() {
        let model = Model::doubling();
        let sft = coding(&model).unwrap();
        for flavor in [Flavor::Sub, Flavor::Super] {
            let r = bowen_root(&model, &sft, flavor, 1e-10).unwrap();
            assert!((r.root - 1.0).abs() < 1e-9, "{flavor:?}: {}", r.root);
            assert!(!r.degenerate);
            assert!(r.bracket.1 - r.bracket.0 <= 1e-10);
            assert!(r.pressure_at_root.abs() < 1e-9);
        }
    }

    #[test]
    fn full_six_shift_roots_hit_the_ambient_dimension() {
        let model = Model::diagonal_toral(&[2, 3]).unwrap();
        let sft = coding(&model).unwrap();
        let alpha0 = bowen_root(&model, &sft, Flavor::Sub, 1e-10).unwrap();
        let s_star = bowen_root(&model, &sft, Flavor::Super, 1e-10).unwrap();
        assert!((alpha0.root - 2.0).abs() < 1e-9);
        assert!((s_star.root - 2.0).abs() < 1e-9);
        assert!(alpha0.root >= s_star.root - 1e-9);
    }

    #[test]
    fn golden_mean_root_matches_the_conformal_value() {
        let model = Model::golden_mean_affine();
        let sft = coding(&model).unwrap();
        let truth = LN_PHI / 2f64.ln();
        for flavor in [Flavor::Sub, Flavor::Super] {
            let r = bowen_root(&model, &sft, flavor, 1e-10).unwrap();
            assert!((r.root - truth).abs() < 1e-9);
        }
    }

    #[test]
    fn markov_two_slope_root_matches_independent_solve() {
        let model = golden_two_slope();
        let sft = coding(&model).unwrap();
        let oracle = golden_two_slope_oracle();
        let r = bowen_root(&model, &sft, Flavor::Sub, 1e-10).unwrap();
        assert!((r.root - oracle).abs() < 1e-8, "{} vs {oracle}", r.root);
        for n in [4, 6, 8] {
            let c = caratheodory_dim(&model, &sft, 0.05, n).unwrap();
            assert!((c.alpha - oracle).abs() < 1e-6, "N {n}: {} vs {oracle}", c.alpha);
        }
    }

    #[test]
    fn caratheodory_crossing_matches_bowen_examples() {
        let six = Model::diagonal_toral(&[2, 3]).unwrap();
        let c = caratheodory_dim(&six, &coding(&six).unwrap(), 0.1, 8).unwrap();
        assert!((c.alpha - 2.0).abs() < 1e-6);
        assert!(!c.degenerate);
        let golden = Model::golden_mean_affine();
        let c = caratheodory_dim(&golden, &coding(&golden).unwrap(), 0.2, 12).unwrap();
        assert!((c.alpha - LN_PHI / 2f64.ln()).abs() < 1e-6);
        // curve is strictly decreasing in alpha
        for pair in c.curve.windows(2) {
            assert!(pair[1].1 < pair[0].1);
        }
        assert!(matches!(
            caratheodory_dim(&golden, &coding(&golden).unwrap(), 0.3, 8),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn carpet_roots_sandwich_the_mcmullen_value() {
        let digits = [(0u32, 0u32), (1, 1)];
        let model = Model::carpet(3, 2, &digits).unwrap();
        let sft = coding(&model).unwrap();
        let phi_root = bowen_root(&model, &sft, Flavor::Sub, 1e-10).unwrap().root;
        let psi_root = bowen_root(&model, &sft, Flavor::Super, 1e-10).unwrap().root;
        let mc = mcmullen_dim(3, 2, &digits).unwrap();
        assert!((phi_root - 1.0).abs() < 1e-9);
        assert!((psi_root - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
        assert!((mc - 1.0).abs() < 1e-12);
        assert!(psi_root <= mc + 1e-9 && mc <= phi_root + 1e-9);
    }

    #[test]
    fn mcmullen_formula_reference_points() {
        let all: Vec<(u32, u32)> = (0..2).flat_map(|c| (0..3).map(move |r| (c, r))).collect();
        assert!((mcmullen_dim(3, 2, &all).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(mcmullen_dim(3, 2, &[(1, 2)]).unwrap(), 0.0);
        assert!((mcmullen_dim(3, 2, &[(0, 0), (1, 2)]).unwrap() - 1.0).abs() < 1e-12);
        let four = [(0, 0), (0, 1), (1, 0), (1, 2)];
        assert!((mcmullen_dim(3, 2, &four).unwrap() - 1.630_929_753_571_457_5).abs() < 1e-12);
        assert!(mcmullen_dim(2, 3, &[(0, 0)]).is_err());
        assert!(mcmullen_dim(3, 2, &[]).is_err());
        assert!(mcmullen_dim(3, 2, &[(2, 0)]).is_err());
    }

    #[test]
    fn box_dimension_reference_values() {
        let six = Model::diagonal_toral(&[2, 3]).unwrap();
        let b = box_dimension(&six, &coding(&six).unwrap(), 10).unwrap();
        assert!((b.dimension - 2.0).abs() < 0.05, "{}", b.dimension);
        let cantor = Model::cantor_third();
        let b = box_dimension(&cantor, &coding(&cantor).unwrap(), 10).unwrap();
        assert!((b.dimension - 2f64.ln() / 3f64.ln()).abs() < 0.02, "{}", b.dimension);
        let doubling = Model::doubling();
        let golden = coding(&doubling).unwrap().forbid_words(&[vec![0, 0]]).unwrap();
        let b = box_dimension(&doubling, &golden, 10).unwrap();
        assert!((b.dimension - 0.6942419).abs() < 0.02, "{}", b.dimension);
        let four = [(0, 0), (0, 1), (1, 0), (1, 2)];
        let carpet = Model::carpet(3, 2, &four).unwrap();
        let b = box_dimension(&carpet, &coding(&carpet).unwrap(), 10).unwrap();
        assert!((b.dimension - 1.630_929_753_571_457_5).abs() < 0.02, "{}", b.dimension);
        assert!(b.scales.len() == 9 && b.residual < 0.2);
    }

    #[test]
    fn box_dimension_guards() {
        let six = Model::diagonal_toral(&[2, 3]).unwrap();
        assert!(matches!(
            box_dimension(&six, &coding(&six).unwrap(), 3),
            Err(Error::Input(_))
        ));
        let perturbed = Model::perturbed_doubling(0.05).unwrap();
        assert!(matches!(
            box_dimension(&perturbed, &coding(&perturbed).unwrap(), 10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimensions_are_monotone_under_inclusion() {
        let doubling = Model::doubling();
        let full = coding(&doubling).unwrap();
        let golden = full.forbid_words(&[vec![0, 0]]).unwrap();
        let b_sub = box_dimension(&doubling, &golden, 10).unwrap().dimension;
        let b_full = box_dimension(&doubling, &full, 10).unwrap().dimension;
        assert!(b_sub <= b_full + 1e-9);
        let r_sub = bowen_root(&doubling, &golden, Flavor::Sub, 1e-10).unwrap().root;
        let r_full = bowen_root(&doubling, &full, Flavor::Sub, 1e-10).unwrap().root;
        assert!(r_sub <= r_full + 1e-9);
    }

    #[test]
    fn entropy_free_subshifts_degenerate_cleanly() {
        let doubling = Model::doubling();
        let single = coding(&doubling).unwrap().forbid_words(&[vec![1]]).unwrap();
        let r = bowen_root(&doubling, &single, Flavor::Sub, 1e-9).unwrap();
        assert!(r.degenerate && r.root == 0.0);
        let c = caratheodory_dim(&doubling, &single, 0.2, 6).unwrap();
        assert!(c.degenerate && c.alpha == 0.0);
    }
}
