//! The three families of expanding models on the torus/cube in dimension
//! d <= 3, together with everything the symbolic layer needs from them:
//! Markov cells, inverse branches, cylinder geometry, and canonical
//! representative points.
//!
//! Kinds:
//! * `linear_toral` — x -> Ax mod 1 for an integer matrix A with |det A| >= 2
//!   and all singular values > 1. Symbolic coding (cells, branches) is wired
//!   for diagonal A; non-diagonal matrices still support evaluation and
//!   derivative-cocycle work.
//! * `sft_affine` — a Markov repeller described by inverse branches
//!   x -> Lx + b with diagonal contracting L, one branch per symbol, plus a
//!   0/1 transition matrix. Cells are the branch images of the unit cube.
//! * `perturbed_doubling` — x -> 2x + eps sin(2 pi x) mod 1, the one
//!   genuinely non-locally-constant model.
//!
//! Boundary convention: a point on a shared cell boundary belongs to the
//! lowest-index cell that contains it.

use crate::error::{input, Error, Result};
use crate::mat::Mat;
use serde::{Deserialize, Serialize};

pub type Point = Vec<f64>;

/// On-disk model description. See `models/` in the repository root for
/// ready-made files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    LinearToral {
        matrix: Vec<Vec<i64>>,
    },
    SftAffine {
        alphabet: usize,
        transitions: Vec<Vec<u8>>,
        branches: Vec<BranchConfig>,
    },
    PerturbedDoubling {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub linear: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub linear: Mat,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    LinearToral {
        a: Mat,
        det_abs: usize,
        /// Diagonal entries when A is diagonal with positive entries >= 2;
        /// this is what unlocks the product coding.
        bases: Option<Vec<u32>>,
    },
    SftAffine {
        transitions: Vec<Vec<u8>>,
        branches: Vec<Branch>,
        /// Derived cells: branch image of the unit cube, as (lo, hi).
        cells: Vec<(Vec<f64>, Vec<f64>)>,
    },
    PerturbedDoubling {
        eps: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Model {
    d: usize,
    kind: Kind,
}

/// Outcome of expansion validation: the certified minimum of the smallest
/// singular value of Df over the sample set, with the witnessing point.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub min_singular_value: f64,
    pub expansion_constant: f64,
    pub witness: Point,
    pub samples: usize,
}

impl ExpansionReport {
    pub fn passes(&self) -> bool {
        self.expansion_constant > 1.0 + 1e-6
    }
}

const EXPANSION_SAMPLES: usize = 10_000;

impl Model {
    /// Structural construction: shape and payload invariants are enforced,
    /// but the expansion certificate is left to `validate_expanding` so that
    /// a rejected model can still be inspected.
    pub fn new(cfg: ModelConfig) -> Result<Model> {
        match cfg {
            ModelConfig::LinearToral { matrix } => {
                let d = matrix.len();
                if d == 0 || d > 3 {
                    return input(format!("linear_toral dimension must be 1..=3, got {d}"));
                }
                let rows: Vec<Vec<f64>> = matrix
                    .iter()
                    .map(|r| r.iter().map(|&v| v as f64).collect())
                    .collect();
                let a = Mat::from_rows(&rows)?;
                let det = a.det();
                let det_abs = det.abs().round() as usize;
                if det_abs < 2 {
                    return input(format!(
                        "linear_toral needs |det A| >= 2 branches, got |det| = {det_abs}"
                    ));
                }
                if det_abs > 4096 {
                    return Err(Error::Budget(format!(
                        "linear_toral alphabet |det A| = {det_abs} exceeds 4096"
                    )));
                }
                let diag_ok = a.is_diagonal()
                    && (0..d).all(|i| {
                        let v = a.get(i, i);
                        v >= 2.0 && v.fract() == 0.0
                    });
                let bases = if diag_ok {
                    Some((0..d).map(|i| a.get(i, i) as u32).collect())
                } else {
                    None
                };
                Ok(Model { d, kind: Kind::LinearToral { a, det_abs, bases } })
            }
            ModelConfig::SftAffine { alphabet, transitions, branches } => {
                if alphabet == 0 || alphabet > 4096 {
                    return input(format!("sft_affine alphabet must be 1..=4096, got {alphabet}"));
                }
                if transitions.len() != alphabet
                    || transitions.iter().any(|r| r.len() != alphabet)
                {
                    return input("sft_affine transitions must be an alphabet x alphabet 0/1 matrix");
                }
                if transitions.iter().flatten().any(|&v| v > 1) {
                    return input("sft_affine transitions entries must be 0 or 1");
                }
                for (i, row) in transitions.iter().enumerate() {
                    if row.iter().all(|&v| v == 0) {
                        return input(format!("sft_affine symbol {i} has no successor"));
                    }
                    if transitions.iter().all(|r| r[i] == 0) {
                        return input(format!("sft_affine symbol {i} has no predecessor"));
                    }
                }
                if branches.len() != alphabet {
                    return input(format!(
                        "sft_affine has {} branches for alphabet {alphabet}",
                        branches.len()
                    ));
                }
                let d = branches[0].offset.len();
                if d == 0 || d > 3 {
                    return input(format!("sft_affine dimension must be 1..=3, got {d}"));
                }
                let mut built = Vec::with_capacity(alphabet);
                let mut cells = Vec::with_capacity(alphabet);
                for (i, b) in branches.iter().enumerate() {
                    if b.offset.len() != d {
                        return input(format!("branch {i} offset has wrong dimension"));
                    }
                    let linear = Mat::from_rows(&b.linear)?;
                    if linear.d != d {
                        return input(format!("branch {i} linear part has wrong dimension"));
                    }
                    if !linear.is_diagonal() || (0..d).any(|c| linear.get(c, c) <= 0.0) {
                        return input(format!(
                            "branch {i}: linear part must be diagonal with positive entries \
                             (axis-aligned cells)"
                        ));
                    }
                    let sv = linear.singular_values()?;
                    if sv[0] >= 1.0 {
                        return input(format!(
                            "branch {i} is not a contraction (largest singular value {})",
                            sv[0]
                        ));
                    }
                    let lo: Vec<f64> = b.offset.clone();
                    let hi: Vec<f64> = (0..d).map(|c| b.offset[c] + linear.get(c, c)).collect();
                    for c in 0..d {
                        if lo[c] < -1e-12 || hi[c] > 1.0 + 1e-12 {
                            return input(format!("branch {i} cell leaves the unit cube"));
                        }
                    }
                    built.push(Branch { linear, offset: b.offset.clone() });
                    cells.push((lo, hi));
                }
                let model = Model {
                    d,
                    kind: Kind::SftAffine { transitions, branches: built, cells },
                };
                model.check_markov()?;
                Ok(model)
            }
            ModelConfig::PerturbedDoubling { epsilon } => {
                if !epsilon.is_finite() {
                    return input("perturbed_doubling epsilon must be finite");
                }
                Ok(Model { d: 1, kind: Kind::PerturbedDoubling { eps: epsilon } })
            }
        }
    }

    /// Parse, validate payload invariants, and certify expansion. This is the
    /// entry point used by the CLI.
    pub fn load(cfg: ModelConfig) -> Result<Model> {
        let model = Model::new(cfg)?;
        let report = model.validate_expanding(EXPANSION_SAMPLES);
        if !report.passes() {
            return Err(Error::ModelRejected(format!(
                "map is not uniformly expanding: min singular value {} at x = {:?}",
                report.min_singular_value, report.witness
            )));
        }
        Ok(model)
    }

    pub fn load_str(json: &str) -> Result<Model> {
        let cfg: ModelConfig = serde_json::from_str(json)?;
        Model::load(cfg)
    }

    pub fn load_file(path: &std::path::Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        Model::load_str(&text)
    }

    // Cylinder nesting: every permitted transition i -> j must map cell j
    // into cell i under the inverse branch of i. Corners suffice for affine
    // branches on boxes.
    fn check_markov(&self) -> Result<()> {
        let Kind::SftAffine { transitions, branches, cells } = &self.kind else {
            return Ok(());
        };
        let k = branches.len();
        for i in 0..k {
            for j in 0..k {
                if transitions[i][j] == 0 {
                    continue;
                }
                let (lo_j, hi_j) = &cells[j];
                let (lo_i, hi_i) = &cells[i];
                for corner in 0..(1usize << self.d) {
                    let pt: Vec<f64> = (0..self.d)
                        .map(|c| if corner >> c & 1 == 0 { lo_j[c] } else { hi_j[c] })
                        .collect();
                    let img = branches[i].apply(&pt);
                    for c in 0..self.d {
                        if img[c] < lo_i[c] - 1e-9 || img[c] > hi_i[c] + 1e-9 {
                            return input(format!(
                                "Markov check failed: branch {i} does not carry cell {j} into cell {i}"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::LinearToral { .. } => "linear_toral",
            Kind::SftAffine { .. } => "sft_affine",
            Kind::PerturbedDoubling { .. } => "perturbed_doubling",
        }
    }

    /// Points of toral models live on R^d/Z^d; SftAffine repellers sit in the
    /// unit cube without boundary identification. Distances respect this.
    pub fn is_torus(&self) -> bool {
        !matches!(self.kind, Kind::SftAffine { .. })
    }

    pub fn alphabet(&self) -> usize {
        match &self.kind {
            Kind::LinearToral { det_abs, .. } => *det_abs,
            Kind::SftAffine { branches, .. } => branches.len(),
            Kind::PerturbedDoubling { .. } => 2,
        }
    }

    /// Dense 0/1 transition matrix of the base coding.
    pub fn transitions_dense(&self) -> Result<Vec<Vec<u8>>> {
        let k = self.alphabet();
        match &self.kind {
            Kind::SftAffine { transitions, .. } => Ok(transitions.clone()),
            Kind::LinearToral { bases, .. } => {
                if bases.is_none() {
                    return Err(Error::Domain(
                        "symbolic coding for linear_toral is only wired for diagonal matrices"
                            .into(),
                    ));
                }
                Ok(vec![vec![1; k]; k])
            }
            Kind::PerturbedDoubling { .. } => Ok(vec![vec![1; k]; k]),
        }
    }

    /// Per-coordinate subdivision counts of the Markov grid, when the model
    /// is grid-aligned (needed for box counting and digit extraction).
    pub fn coordinate_bases(&self) -> Result<Vec<u32>> {
        match &self.kind {
            Kind::LinearToral { bases, .. } => bases.clone().ok_or_else(|| {
                Error::Domain("coordinate bases require a diagonal linear_toral matrix".into())
            }),
            Kind::PerturbedDoubling { .. } => Ok(vec![2]),
            Kind::SftAffine { branches, .. } => {
                let d = self.d;
                let mut bases = vec![0u32; d];
                for c in 0..d {
                    let ratio = branches[0].linear.get(c, c);
                    let n = (1.0 / ratio).round();
                    if n < 2.0 || (1.0 / ratio - n).abs() > 1e-9 {
                        return Err(Error::Domain(
                            "box counting requires branch contractions of the form 1/n".into(),
                        ));
                    }
                    bases[c] = n as u32;
                }
                for (i, b) in branches.iter().enumerate() {
                    for c in 0..d {
                        let n = bases[c] as f64;
                        if (b.linear.get(c, c) - 1.0 / n).abs() > 1e-9 {
                            return Err(Error::Domain(format!(
                                "branch {i} does not share the grid contraction in coordinate {c}"
                            )));
                        }
                        let digit = (b.offset[c] * n).round();
                        if (b.offset[c] * n - digit).abs() > 1e-9 {
                            return Err(Error::Domain(format!(
                                "branch {i} offset is not grid-aligned in coordinate {c}"
                            )));
                        }
                    }
                }
                Ok(bases)
            }
        }
    }

    /// Per-coordinate digits of a symbol on the Markov grid.
    pub fn symbol_digits(&self, sym: usize) -> Result<Vec<u32>> {
        let bases = self.coordinate_bases()?;
        match &self.kind {
            Kind::SftAffine { branches, .. } => Ok((0..self.d)
                .map(|c| (branches[sym].offset[c] * bases[c] as f64).round() as u32)
                .collect()),
            _ => {
                // mixed radix, coordinate 0 most significant
                let mut rem = sym as u32;
                let mut digits = vec![0u32; self.d];
                for c in (0..self.d).rev() {
                    digits[c] = rem % bases[c];
                    rem /= bases[c];
                }
                Ok(digits)
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Point> {
        self.check_point(x)?;
        match &self.kind {
            Kind::LinearToral { a, .. } => {
                Ok(a.apply(x).into_iter().map(frac).collect())
            }
            Kind::PerturbedDoubling { eps } => {
                let t = 2.0 * x[0] + eps * (2.0 * std::f64::consts::PI * x[0]).sin();
                Ok(vec![frac(t)])
            }
            Kind::SftAffine { branches, .. } => {
                let i = self.cell_of_point(x)?;
                let b = &branches[i];
                let mut y = vec![0.0; self.d];
                for c in 0..self.d {
                    y[c] = (x[c] - b.offset[c]) / b.linear.get(c, c);
                }
                Ok(y)
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        self.check_point(x)?;
        match &self.kind {
            Kind::LinearToral { a, .. } => Ok(*a),
            Kind::PerturbedDoubling { eps } => {
                let der = 2.0
                    + 2.0 * std::f64::consts::PI * eps
                        * (2.0 * std::f64::consts::PI * x[0]).cos();
                Ok(Mat::diagonal(&[der]))
            }
            Kind::SftAffine { branches, .. } => {
                let i = self.cell_of_point(x)?;
                branches[i].linear.inverse()
            }
        }
    }

    /// Jacobian of f on the cell of `sym`, when it is constant there.
    pub fn branch_jacobian(&self, sym: usize) -> Result<Option<Mat>> {
        match &self.kind {
            Kind::LinearToral { a, .. } => Ok(Some(*a)),
            Kind::SftAffine { branches, .. } => {
                let b = branches.get(sym).ok_or_else(|| {
                    Error::Input(format!("symbol {sym} out of range"))
                })?;
                Ok(Some(b.linear.inverse()?))
            }
            Kind::PerturbedDoubling { eps } => {
                if *eps == 0.0 {
                    Ok(Some(Mat::diagonal(&[2.0])))
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// The one-step Jacobian when it does not depend on x at all.
    pub fn constant_jacobian(&self) -> Option<Mat> {
        match &self.kind {
            Kind::LinearToral { a, .. } => Some(*a),
            Kind::PerturbedDoubling { eps } => {
                if *eps == 0.0 {
                    Some(Mat::diagonal(&[2.0]))
                } else {
                    None
                }
            }
            Kind::SftAffine { branches, .. } => {
                let first = branches[0].linear;
                for b in &branches[1..] {
                    for c in 0..self.d {
                        if (b.linear.get(c, c) - first.get(c, c)).abs() > 0.0 {
                            return None;
                        }
                    }
                }
                first.inverse().ok()
            }
        }
    }

    /// True when the one-step Jacobian is constant on each Markov cell, so
    /// singular-value potentials are constant on cylinders.
    pub fn is_locally_constant(&self) -> bool {
        !matches!(self.kind, Kind::PerturbedDoubling { eps } if eps != 0.0)
    }

    /// Index of the Markov cell containing x; shared boundaries go to the
    /// lowest index.
    pub fn cell_of_point(&self, x: &[f64]) -> Result<usize> {
        self.check_point(x)?;
        match &self.kind {
            Kind::LinearToral { bases, det_abs, .. } => {
                let bases = bases.as_ref().ok_or_else(|| {
                    Error::Domain("cell lookup requires a diagonal linear_toral matrix".into())
                })?;
                let mut sym = 0usize;
                for c in 0..self.d {
                    let n = bases[c] as f64;
                    let digit = (frac(x[c]) * n).floor().min(n - 1.0) as usize;
                    sym = sym * bases[c] as usize + digit;
                }
                debug_assert!(sym < *det_abs);
                Ok(sym)
            }
            Kind::PerturbedDoubling { .. } => {
                Ok(if frac(x[0]) < 0.5 { 0 } else { 1 })
            }
            Kind::SftAffine { cells, .. } => {
                // half-open first, then closed with the lowest-index rule
                for (i, (lo, hi)) in cells.iter().enumerate() {
                    if (0..self.d).all(|c| x[c] >= lo[c] && x[c] < hi[c]) {
                        return Ok(i);
                    }
                }
                for (i, (lo, hi)) in cells.iter().enumerate() {
                    if (0..self.d).all(|c| x[c] >= lo[c] && x[c] <= hi[c]) {
                        return Ok(i);
                    }
                }
                Err(Error::Domain(format!("point {x:?} lies outside every cell")))
            }
        }
    }

    /// Inverse branch of symbol `sym` applied to y.
    pub fn branch_apply(&self, sym: usize, y: &[f64]) -> Result<Point> {
        if sym >= self.alphabet() {
            return input(format!("symbol {sym} out of range"));
        }
        self.check_point(y)?;
        match &self.kind {
            Kind::LinearToral { bases, .. } => {
                let bases = bases.as_ref().ok_or_else(|| {
                    Error::Domain("inverse branches require a diagonal linear_toral matrix".into())
                })?;
                let digits = self.symbol_digits(sym)?;
                Ok((0..self.d)
                    .map(|c| (y[c] + digits[c] as f64) / bases[c] as f64)
                    .collect())
            }
            Kind::SftAffine { branches, .. } => Ok(branches[sym].apply(y)),
            Kind::PerturbedDoubling { eps } => {
                Ok(vec![invert_doubling(*eps, sym, y[0])])
            }
        }
    }

    /// Smallest symbol admissible after `sym` in the base coding.
    pub fn smallest_successor(&self, sym: usize) -> Result<usize> {
        match &self.kind {
            Kind::SftAffine { transitions, .. } => transitions[sym]
                .iter()
                .position(|&v| v == 1)
                .ok_or_else(|| Error::Domain(format!("symbol {sym} has no successor"))),
            _ => Ok(0),
        }
    }

    /// Canonical representative of the cylinder `word`: extend the word by a
    /// greedy tail (always the smallest admissible symbol) and pull the
    /// center of the final cell back through the branches. The tail is long
    /// enough that the seed choice is far below double precision.
    pub fn cylinder_rep(&self, word: &[u16]) -> Result<Point> {
        if word.is_empty() {
            return input("cylinder word must be nonempty");
        }
        const TAIL: usize = 64;
        let mut full: Vec<usize> = word.iter().map(|&s| s as usize).collect();
        for &s in &full {
            if s >= self.alphabet() {
                return input(format!("symbol {s} out of range"));
            }
        }
        for _ in 0..TAIL {
            let last = *full.last().unwrap();
            full.push(self.smallest_successor(last)?);
        }
        let mut x = self.cell_center(*full.last().unwrap())?;
        for &s in full.iter().rev() {
            x = self.branch_apply(s, &x)?;
        }
        Ok(x)
    }

    fn cell_center(&self, sym: usize) -> Result<Point> {
        let (lo, hi) = self.cell_box(sym)?;
        Ok((0..self.d).map(|c| 0.5 * (lo[c] + hi[c])).collect())
    }

    /// Geometric cell of a symbol as (lo, hi).
    pub fn cell_box(&self, sym: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if sym >= self.alphabet() {
            return input(format!("symbol {sym} out of range"));
        }
        match &self.kind {
            Kind::SftAffine { cells, .. } => Ok(cells[sym].clone()),
            Kind::LinearToral { bases, .. } => {
                let bases = bases.as_ref().ok_or_else(|| {
                    Error::Domain("cells require a diagonal linear_toral matrix".into())
                })?;
                let digits = self.symbol_digits(sym)?;
                let lo: Vec<f64> =
                    (0..self.d).map(|c| digits[c] as f64 / bases[c] as f64).collect();
                let hi: Vec<f64> =
                    (0..self.d).map(|c| (digits[c] + 1) as f64 / bases[c] as f64).collect();
                Ok((lo, hi))
            }
            Kind::PerturbedDoubling { .. } => {
                if sym == 0 {
                    Ok((vec![0.0], vec![0.5]))
                } else {
                    Ok((vec![0.5], vec![1.0]))
                }
            }
        }
    }

    /// Geometric box of a depth-n cylinder: branches applied backward to the
    /// unit cube.
    pub fn cylinder_box(&self, word: &[u16]) -> Result<(Vec<f64>, Vec<f64>)> {
        if word.is_empty() {
            return input("cylinder word must be nonempty");
        }
        let mut lo = vec![0.0; self.d];
        let mut hi = vec![1.0; self.d];
        for &s in word.iter().rev() {
            let a = self.branch_apply(s as usize, &lo)?;
            let b = self.branch_apply(s as usize, &hi)?;
            for c in 0..self.d {
                lo[c] = a[c].min(b[c]);
                hi[c] = a[c].max(b[c]);
            }
        }
        Ok((lo, hi))
    }

    /// Itinerary of a point through the Markov cells.
    pub fn itinerary(&self, x: &[f64], n: usize) -> Result<Vec<u16>> {
        let mut word = Vec::with_capacity(n);
        let mut y = x.to_vec();
        if self.is_torus() {
            for v in &mut y {
                *v = frac(*v);
            }
        }
        for _ in 0..n {
            word.push(self.cell_of_point(&y)? as u16);
            y = self.evaluate(&y)?;
        }
        Ok(word)
    }

    /// Half the smallest cell extent: below this radius, dynamical balls and
    /// cylinders carry the same combinatorics.
    pub fn cell_gap(&self) -> Result<f64> {
        let mut gap = f64::INFINITY;
        for sym in 0..self.alphabet() {
            let (lo, hi) = self.cell_box(sym)?;
            for c in 0..self.d {
                gap = gap.min(0.5 * (hi[c] - lo[c]));
            }
        }
        Ok(gap)
    }

    /// Distance adapted to the model: sup over coordinates, with circle
    /// wraparound on toral models.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let torus = self.is_torus();
        let mut dist: f64 = 0.0;
        for c in 0..self.d {
            let mut dc = (x[c] - y[c]).abs();
            if torus {
                dc = dc.min(1.0 - dc).max(0.0);
            }
            dist = dist.max(dc);
        }
        dist
    }

    /// Certify uniform expansion by minimizing the smallest singular value of
    /// Df over a deterministic sample set. Models with constant or per-cell
    /// constant derivatives are evaluated exactly.
    pub fn validate_expanding(&self, samples: usize) -> ExpansionReport {
        match &self.kind {
            Kind::LinearToral { a, .. } => {
                let sv = a.singular_values().expect("finite integer matrix");
                ExpansionReport {
                    min_singular_value: sv[self.d - 1],
                    expansion_constant: sv[self.d - 1],
                    witness: vec![0.0; self.d],
                    samples: 1,
                }
            }
            Kind::SftAffine { branches, cells, .. } => {
                let mut min = f64::INFINITY;
                let mut witness = vec![0.0; self.d];
                for (i, b) in branches.iter().enumerate() {
                    let sv = b.linear.singular_values().expect("validated branch");
                    // Df = L^{-1} on the cell, so sigma_min(Df) = 1/sigma_max(L).
                    let expansion = 1.0 / sv[0];
                    if expansion < min {
                        min = expansion;
                        witness = cells[i].0.clone();
                    }
                }
                ExpansionReport {
                    min_singular_value: min,
                    expansion_constant: min,
                    witness,
                    samples: branches.len(),
                }
            }
            Kind::PerturbedDoubling { eps } => {
                // Grid plus the analytic minimizer x = 1/2 (cos = -1).
                let n = samples.max(2);
                let mut min = f64::INFINITY;
                let mut witness = 0.0;
                let mut probe = |x: f64| {
                    let der = (2.0
                        + 2.0 * std::f64::consts::PI * eps
                            * (2.0 * std::f64::consts::PI * x).cos())
                    .abs();
                    if der < min {
                        min = der;
                        witness = x;
                    }
                };
                for i in 0..n {
                    probe(i as f64 / n as f64);
                }
                probe(0.5);
                ExpansionReport {
                    min_singular_value: min,
                    expansion_constant: min,
                    witness: vec![witness],
                    samples: n + 1,
                }
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return input(format!(
                "point has dimension {}, model has dimension {}",
                x.len(),
                self.d
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    // Ready-made models used across tests, the book, and the self-test suite.

    pub fn doubling() -> Model {
        Model::new(ModelConfig::LinearToral { matrix: vec![vec![2]] }).unwrap()
    }

    pub fn diagonal_toral(entries: &[i64]) -> Result<Model> {
        let d = entries.len();
        let matrix: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { entries[i] } else { 0 }).collect())
            .collect();
        Model::new(ModelConfig::LinearToral { matrix })
    }

    pub fn perturbed_doubling(eps: f64) -> Result<Model> {
        Model::new(ModelConfig::PerturbedDoubling { epsilon: eps })
    }

    /// Full-branch golden-mean repeller: two affine branches of derivative 2
    /// with transitions forbidding the word 0.0.
    pub fn golden_mean_affine() -> Model {
        Model::new(ModelConfig::SftAffine {
            alphabet: 2,
            transitions: vec![vec![0, 1], vec![1, 1]],
            branches: vec![
                BranchConfig { linear: vec![vec![0.5]], offset: vec![0.0] },
                BranchConfig { linear: vec![vec![0.5]], offset: vec![0.5] },
            ],
        })
        .unwrap()
    }

    /// Two branches of ratio 1/3 at offsets 0 and 2/3: the middle-third
    /// Cantor repeller.
    pub fn cantor_third() -> Model {
        Model::new(ModelConfig::SftAffine {
            alphabet: 2,
            transitions: vec![vec![1, 1], vec![1, 1]],
            branches: vec![
                BranchConfig { linear: vec![vec![1.0 / 3.0]], offset: vec![0.0] },
                BranchConfig { linear: vec![vec![1.0 / 3.0]], offset: vec![2.0 / 3.0] },
            ],
        })
        .unwrap()
    }

    /// Bedford–McMullen style carpet on an `rows x cols` grid (rows > cols):
    /// the map expands by cols horizontally and rows vertically, keeping the
    /// selected (col, row) digit cells.
    pub fn carpet(rows: u32, cols: u32, digits: &[(u32, u32)]) -> Result<Model> {
        if cols < 2 || rows <= cols {
            return input("carpet needs rows > cols >= 2");
        }
        if digits.is_empty() {
            return input("carpet needs at least one digit");
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut branches = Vec::new();
        for &(c, r) in digits {
            if c >= cols || r >= rows {
                return input(format!("digit ({c},{r}) outside the {rows}x{cols} grid"));
            }
            if !seen.insert((c, r)) {
                continue;
            }
            branches.push(BranchConfig {
                linear: vec![
                    vec![1.0 / cols as f64, 0.0],
                    vec![0.0, 1.0 / rows as f64],
                ],
                offset: vec![c as f64 / cols as f64, r as f64 / rows as f64],
            });
        }
        let k = branches.len();
        Model::new(ModelConfig::SftAffine {
            alphabet: k,
            transitions: vec![vec![1; k]; k],
            branches,
        })
    }
}

impl Branch {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.offset.len();
        let lx = self.linear.apply(x);
        (0..d).map(|c| lx[c] + self.offset[c]).collect()
    }
}

#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Solve 2x + eps sin(2 pi x) = y + sym on the branch domain by Newton
/// iteration; the map is strictly increasing there.
fn invert_doubling(eps: f64, sym: usize, y: f64) -> f64 {
    let target = y + sym as f64;
    let mut x = target / 2.0;
    for _ in 0..60 {
        let g = 2.0 * x + eps * (2.0 * std::f64::consts::PI * x).sin() - target;
        let gp = 2.0 + 2.0 * std::f64::consts::PI * eps * (2.0 * std::f64::consts::PI * x).cos();
        let step = g / gp;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x.clamp(0.5 * sym as f64, 0.5 * (sym as f64 + 1.0))
}
