//! Corner invariants from finite-window compressions.
//!
//! A finite window always has index zero, so every count here is restricted
//! to near-zero modes localized at the physical corner.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{strong_group_lookup, AzClass};
use crate::compressions::{build_orthant, build_quarter, fredholm_criterion, wedge_fredholm, Slope, TruncatedOperator};
use crate::error::{Error, Result};
use crate::linalg::{conj, eigh, max_abs_diff, near_zero_eigenpairs, CMat, SparseMatrix, C};
use crate::model::{symmetric_perturbation, verify_symmetry_relations, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Z2")]
    Z2,
    #[serde(rename = "2Z")]
    TwoZ,
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupTag::Z => "Z",
            GroupTag::Z2 => "Z2",
            GroupTag::TwoZ => "2Z",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantValue {
    pub group: GroupTag,
    pub value: i64,
    pub name: String,
}

impl InvariantValue {
    /// `Z2` values are reduced mod 2; `2Z` values must be even.
    pub fn new(group: GroupTag, value: i64, name: impl Into<String>) -> Result<Self> {
        let value = match group {
            GroupTag::Z2 => value.rem_euclid(2),
            GroupTag::TwoZ if value % 2 != 0 => {
                return Err(Error::Inconsistent(format!("odd value {value} for an even-index invariant")))
            }
            _ => value,
        };
        Ok(InvariantValue { group, value, name: name.into() })
    }
}

/// Weights in this band are neither corner nor far-wall modes.
const AMBIGUOUS: (f64, f64) = (0.3, 0.7);

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    pub zero_eps: f64,
    pub loc_lambda: f64,
    /// L1 radius of the corner neighbourhood.
    pub radius: f64,
}

impl Thresholds {
    pub fn for_window(l: i64, gap: f64) -> Self {
        Thresholds { zero_eps: default_zero_eps(gap), loc_lambda: 0.8, radius: l as f64 / 4.0 }
    }
}

pub fn default_zero_eps(gap: f64) -> f64 {
    1e-6_f64.min(gap / 20.0)
}

/// Near-zero modes split into a corner part and the rest.
#[derive(Clone, Debug)]
pub struct LocalizedModes {
    /// Orthonormal columns spanning the corner subspace.
    pub corner: CMat,
    /// Ritz values of the corner columns.
    pub corner_values: Vec<f64>,
    /// Corner weight of every rotated mode.
    pub weights: Vec<f64>,
    pub near_zero: usize,
}

impl LocalizedModes {
    pub fn count(&self) -> usize {
        self.corner.ncols()
    }
}

/// Rotates clusters of near-degenerate eigenvectors so they diagonalize the
/// corner mask and keeps columns with weight at least `lambda`. Ambiguous
/// weights are an error for modes with `|E| <= relevant`, dropped otherwise.
pub fn localize(values: &[f64], vectors: &CMat, mask: &[bool], lambda: f64, cluster_tol: f64, relevant: f64) -> Result<LocalizedModes> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut cols = Vec::new();
    let mut ritz = Vec::new();
    let mut weights = Vec::new();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && values[order[end]] - values[order[end - 1]] <= cluster_tol {
            end += 1;
        }
        let idx = &order[start..end];
        let v = CMat::from_fn(vectors.nrows(), idx.len(), |i, k| vectors[(i, idx[k])]);
        let mv = CMat::from_fn(v.nrows(), v.ncols(), |i, k| if mask[i] { v[(i, k)] } else { C::new(0.0, 0.0) });
        let w = v.adjoint() * mv;
        let (wv, q) = eigh(&crate::linalg::hermitize(&w))?;
        let rotated = &v * &q;
        for k in 0..idx.len() {
            let e: f64 = idx.iter().enumerate().map(|(j, &o)| q[(j, k)].norm_sqr() * values[o]).sum();
            let weight = wv[k];
            weights.push(weight);
            if (AMBIGUOUS.0..=AMBIGUOUS.1).contains(&weight) {
                if e.abs() <= relevant {
                    return Err(Error::Resolution(format!(
                        "near-zero mode at E = {e:.3e} has corner weight {weight:.3}; enlarge L"
                    )));
                }
                continue;
            }
            if weight >= lambda {
                cols.push(rotated.column(k).into_owned());
                ritz.push(e);
            }
        }
        start = end;
    }
    let corner = if cols.is_empty() { CMat::zeros(vectors.nrows(), 0) } else { CMat::from_columns(&cols) };
    Ok(LocalizedModes { corner, corner_values: ritz, weights, near_zero: m })
}

/// Corner-localized modes with `|E| < eps` of a Hermitian window.
pub fn corner_modes(op: &TruncatedOperator, th: &Thresholds) -> Result<LocalizedModes> {
    if op.matrix.hermiticity_defect() > 1e-10 {
        return Err(Error::Model("corner modes of a non-Hermitian operator; use the Fredholm index".into()));
    }
    let nz = near_zero_eigenpairs(&op.matrix, th.zero_eps)?;
    localize(&nz.values, &nz.vectors, &op.corner_mask(th.radius), th.loc_lambda, f64::INFINITY, f64::INFINITY)
}

pub fn localized_kernel_count(op: &TruncatedOperator, th: &Thresholds) -> Result<usize> {
    Ok(corner_modes(op, th)?.count())
}

fn graded_trace(modes: &LocalizedModes, grading: &SparseMatrix) -> Result<i64> {
    let gv = grading.mul_dense(&modes.corner);
    let tr: f64 = (0..modes.count()).map(|k| modes.corner.column(k).dotc(&gv.column(k)).re).sum();
    let r = tr.round();
    if (tr - r).abs() > 1e-6 {
        return Err(Error::Resolution(format!("graded trace {tr} is not an integer; corner subspace not graded")));
    }
    Ok(r as i64)
}

/// `Tr(Π P)` over the corner-localized kernel, with `Π` lifted to the window.
pub fn chiral_index(op: &TruncatedOperator, pi: &CMat, th: &Thresholds) -> Result<InvariantValue> {
    let modes = corner_modes(op, th)?;
    InvariantValue::new(GroupTag::Z, graded_trace(&modes, &op.lift(pi))?, "chiral index")
}

/// Corner kernel dimension mod 2.
pub fn mod2_index_d(op: &TruncatedOperator, th: &Thresholds) -> Result<InvariantValue> {
    InvariantValue::new(GroupTag::Z2, localized_kernel_count(op, th)? as i64, "mod-2 index")
}

/// Half the corner kernel dimension mod 2; the kernel is Kramers-paired.
pub fn mod2_index_diii(op: &TruncatedOperator, th: &Thresholds) -> Result<InvariantValue> {
    let n = localized_kernel_count(op, th)?;
    if n % 2 != 0 {
        return Err(Error::Resolution(format!("odd corner kernel dimension {n} in a Kramers-paired class")));
    }
    InvariantValue::new(GroupTag::Z2, (n / 2) as i64, "Kramers mod-2 index")
}

/// `dim ker − dim coker` over corner-localized singular vectors, read off the
/// graded Hermitian dilation.
pub fn localized_fredholm_index(op: &TruncatedOperator, th: &Thresholds) -> Result<InvariantValue> {
    let (d, grading) = op.dilation()?;
    let modes = corner_modes(&d, th)?;
    let g = SparseMatrix::from_triplets(grading.len(), grading.len(), grading.iter().enumerate().map(|(i, &x)| (i, i, C::new(x, 0.0))).collect());
    InvariantValue::new(GroupTag::Z, graded_trace(&modes, &g)?, "Fredholm index")
}

/// One point of a path of Hermitian operators.
#[derive(Clone, Debug)]
pub struct FamilySample {
    /// Eigenvalues entering the count.
    pub levels: Vec<f64>,
    pub matrix: SparseMatrix,
}

pub trait PathFamily: Sync {
    fn sample(&self, s: f64) -> Result<FamilySample>;

    /// Largest admissible window `c`.
    fn level_cap(&self) -> f64 {
        f64::INFINITY
    }
}

/// Finite-matrix family; all eigenvalues count.
pub struct MatrixFamily<F>(pub F);

impl<F: Fn(f64) -> CMat + Sync> PathFamily for MatrixFamily<F> {
    fn sample(&self, s: f64) -> Result<FamilySample> {
        let m = (self.0)(s);
        let levels = crate::linalg::eigvalsh(&m)?;
        Ok(FamilySample { levels, matrix: SparseMatrix::from_dense(&m) })
    }
}

/// Lattice family `s -> H^c(s)`; only corner-localized levels below `window`
/// count, so far-wall branches drop out.
pub struct LocalizedFamily<F> {
    pub build: F,
    pub window: f64,
    pub loc_lambda: f64,
    pub radius: f64,
    /// Levels closer than this are rotated together before localizing;
    /// near- and far-wall modes hybridize at this scale.
    pub cluster_tol: f64,
}

impl<F: Fn(f64) -> Result<TruncatedOperator> + Sync> LocalizedFamily<F> {
    fn modes(&self, s: f64) -> Result<(TruncatedOperator, LocalizedModes)> {
        let op = (self.build)(s)?;
        let nz = near_zero_eigenpairs(&op.matrix, self.window)?;
        let tol = self.cluster_tol.max(1e-9 * op.matrix.norm_bound().max(1.0));
        let modes = localize(&nz.values, &nz.vectors, &op.corner_mask(self.radius), self.loc_lambda, tol, self.level_cap())?;
        Ok((op, modes))
    }
}

impl<F: Fn(f64) -> Result<TruncatedOperator> + Sync> PathFamily for LocalizedFamily<F> {
    fn sample(&self, s: f64) -> Result<FamilySample> {
        let (op, modes) = self.modes(s)?;
        Ok(FamilySample { levels: modes.corner_values, matrix: op.matrix })
    }

    fn level_cap(&self) -> f64 {
        self.window / 2.0
    }
}

const MAX_SEGMENTS: usize = 1 << 12;

fn rank(levels: &[f64], c: f64, zeta: f64) -> i64 {
    levels.iter().filter(|&&x| x >= -zeta && x <= c).count() as i64
}

/// Smallest admissible window `c` whose distance to every `|λ|` exceeds
/// `margin`, with `c >= floor`.
fn choose_window(levels: &[&FamilySample], margin: f64, floor: f64, cap: f64) -> Option<f64> {
    let mut pts: Vec<f64> = levels.iter().flat_map(|s| s.levels.iter().map(|x| x.abs())).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = f64::NEG_INFINITY;
    for next in pts.iter().copied().chain([f64::INFINITY]) {
        let lo = (prev + margin).max(floor);
        let hi = (next - margin).min(cap);
        if lo < hi {
            return Some(if hi.is_finite() { 0.5 * (lo + hi) } else { lo + margin });
        }
        if next.is_finite() {
            prev = next;
        }
    }
    None
}

fn diff_norm(a: &SparseMatrix, b: &SparseMatrix) -> f64 {
    a.add(&b.scale(C::new(-1.0, 0.0))).norm_bound()
}

struct Partition<'a> {
    family: &'a dyn PathFamily,
    segments: usize,
    z2: bool,
}

impl Partition<'_> {
    fn segment(&mut self, sa: f64, a: &FamilySample, sb: f64, b: &FamilySample) -> Result<i64> {
        let sm = 0.5 * (sa + sb);
        let m = self.family.sample(sm)?;
        let delta = diff_norm(&a.matrix, &m.matrix).max(diff_norm(&m.matrix, &b.matrix)).max(diff_norm(&a.matrix, &b.matrix));
        let scale = a.matrix.norm_bound().max(b.matrix.norm_bound()).max(1e-300);
        let zeta = 1e-12 * scale;
        let margin = delta + 1e-9 * scale;
        if let Some(c) = choose_window(&[a, &m, b], margin, (2.0 * delta).max(margin), self.family.level_cap()) {
            let (ra, rb) = (rank(&a.levels, c, zeta), rank(&b.levels, c, zeta));
            return Ok(if self.z2 { ra + rb } else { rb - ra });
        }
        self.segments += 1;
        if self.segments > MAX_SEGMENTS {
            return Err(Error::Resolution(format!("spectral flow partition exceeds {MAX_SEGMENTS} segments")));
        }
        Ok(self.segment(sa, a, sm, &m)? + self.segment(sm, &m, sb, b)?)
    }
}

fn partition_sum(family: &dyn PathFamily, a: f64, b: f64, samples: usize, z2: bool) -> Result<i64> {
    if !(a < b) {
        return Err(Error::Input(format!("empty parameter interval [{a}, {b}]")));
    }
    let n = samples.max(1);
    let pts: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect();
    let found: Vec<Result<FamilySample>> = pts.par_iter().map(|&s| family.sample(s)).collect();
    let found: Vec<FamilySample> = found.into_iter().collect::<Result<_>>()?;
    let mut part = Partition { family, segments: n, z2 };
    let mut total = 0;
    for i in 0..n {
        total += part.segment(pts[i], &found[i], pts[i + 1], &found[i + 1])?;
    }
    Ok(total)
}

/// Phillips spectral flow on `[a, b]` starting from `samples` uniform segments.
pub fn spectral_flow(family: &dyn PathFamily, a: f64, b: f64, samples: usize) -> Result<i64> {
    partition_sum(family, a, b, samples, false)
}

/// Checks `U conj(F(-s)) U* = F(s)` at the given points.
pub fn check_equivariance(family: &dyn PathFamily, u: &CMat, points: &[f64], tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &s in points {
        let f = family.sample(s)?.matrix.to_dense();
        let g = family.sample(-s)?.matrix.to_dense();
        worst = worst.max(max_abs_diff(&(u * conj(&g) * u.adjoint()), &f));
    }
    if worst > tol {
        return Err(Error::Symmetry(format!("family equivariance fails by {worst:e}")));
    }
    Ok(worst)
}

/// Mod-2 spectral flow `Σ (rank_i(s_i) + rank_i(s_{i-1}))` on `[0, end]` of a
/// family equivariant under a quaternionic antiunitary `U K`.
pub fn z2_spectral_flow(family: &dyn PathFamily, end: f64, samples: usize, u: &CMat) -> Result<InvariantValue> {
    if max_abs_diff(&(u * conj(u)), &(-CMat::identity(u.nrows(), u.nrows()))) > 1e-10 {
        return Err(Error::Symmetry("z2 spectral flow needs U conj(U) = -1".into()));
    }
    let pts: Vec<f64> = (0..=4).map(|i| end * i as f64 / 4.0).collect();
    check_equivariance(family, u, &pts, 1e-9)?;
    InvariantValue::new(GroupTag::Z2, partition_sum(family, 0.0, end, samples, true)?, "z2 spectral flow")
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakInvariants {
    pub w_plus: i64,
    pub w_minus: i64,
    pub qsf: i64,
    /// `w+ != w-` forces a nonzero strong invariant.
    pub strong_nonzero: bool,
}

fn corner_geometry(spec: &ModelSpec, k: usize) -> Result<usize> {
    let n = spec.model.dim();
    if k == 0 || k > n {
        return Err(Error::Input(format!("codimension {k} for a {n}-dimensional model")));
    }
    Ok(n - k)
}

/// Window gap, thresholds and localized family for a `d = 1` corner.
fn edge_family<'a>(spec: &'a ModelSpec, k: usize, l: i64, th: &Thresholds, window: f64) -> LocalizedFamily<impl Fn(f64) -> Result<TruncatedOperator> + Sync + 'a> {
    LocalizedFamily { build: move |s: f64| build_orthant(&spec.model, k, &[s], l), window, loc_lambda: th.loc_lambda, radius: th.radius, cluster_tol: th.zero_eps }
}

/// DIII family data: `w±` at the fixed angles `0, π` and `qsf` on the half loop.
pub fn weak_invariants_diii(spec: &ModelSpec, k: usize, l: i64, grid: usize, samples: usize) -> Result<WeakInvariants> {
    if corner_geometry(spec, k)? != 1 {
        return Err(Error::Input("weak invariants need a one-dimensional corner".into()));
    }
    let syms = &spec.symmetries;
    let theta = syms.theta.as_ref().filter(|t| t.square < 0).ok_or_else(|| Error::Symmetry("DIII family needs Θ² = -1".into()))?;
    let gap = fredholm_criterion(&spec.model, k, grid, l.min(24), 1e-3)?.into_result()?.min_gap();
    let th = Thresholds::for_window(l, gap);
    let fam = edge_family(spec, k, l, &th, 0.5 * gap);
    let at = |s: f64| -> Result<i64> { Ok(mod2_index_diii(&build_orthant(&spec.model, k, &[s], l)?, &th)?.value) };
    let op0 = build_orthant(&spec.model, k, &[0.0], l)?;
    let qsf = z2_spectral_flow(&fam, PI, samples, &op0.lift(&theta.matrix).to_dense())?.value;
    let (w_plus, w_minus) = (at(0.0)?, at(PI)?);
    Ok(WeakInvariants { w_plus, w_minus, qsf, strong_nonzero: w_plus != w_minus })
}

#[derive(Clone, Debug)]
pub enum Region {
    Orthant,
    Quarter { alpha: Slope, beta: Slope, convex: bool },
}

#[derive(Clone, Debug)]
pub struct CornerQuery {
    pub k: usize,
    pub l: i64,
    pub grid: usize,
    pub region: Region,
    pub zero_eps: Option<f64>,
    pub loc_lambda: f64,
    /// Gap below which the Fredholm criterion fails.
    pub gap_tol: f64,
    pub samples: usize,
}

impl CornerQuery {
    pub fn new(k: usize, l: i64) -> Self {
        CornerQuery { k, l, grid: 16, region: Region::Orthant, zero_eps: None, loc_lambda: 0.8, gap_tol: 1e-3, samples: 32 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerOutcome {
    pub value: InvariantValue,
    pub class: AzClass,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: i64,
    pub thresholds: Thresholds,
    pub face_gap: f64,
}

fn expected_tag(class: AzClass, n: usize, k: usize) -> Result<GroupTag> {
    let g = strong_group_lookup(class, n, k)?;
    match (g.free_rank, g.torsion.as_slice(), g.even_index) {
        (1, [], true) => Ok(GroupTag::TwoZ),
        (1, [], false) => Ok(GroupTag::Z),
        (0, [2], _) => Ok(GroupTag::Z2),
        _ => Err(Error::Unsupported(format!(
            "class {class} at n={n}, k={k}: invariant group is trivial or not numerically defined; see classification module"
        ))),
    }
}

/// Numerical corner invariant for corner dimension `n − k ∈ {0, 1}`.
pub fn corner_invariant(spec: &ModelSpec, q: &CornerQuery) -> Result<CornerOutcome> {
    let d = corner_geometry(spec, q.k)?;
    let n = spec.model.dim();
    let class = spec.class()?.class;
    verify_symmetry_relations(&spec.model, &spec.symmetries, 1e-9)?.into_result()?;
    let unsupported = || Error::Unsupported(format!(
        "class {class} with corner dimension {d}: invariant group is trivial or not numerically defined; see classification module"
    ));
    let supported = match d {
        0 => matches!(class, AzClass::BDI | AzClass::D | AzClass::DIII | AzClass::CII),
        1 => matches!(class, AzClass::D | AzClass::DIII | AzClass::AII | AzClass::C),
        _ => false,
    };
    if !supported {
        return Err(unsupported());
    }
    let tag = expected_tag(class, n, q.k)?;
    let face_l = if q.k >= 3 { q.l.min(10) } else { q.l };
    let report = match (&q.region, n) {
        (Region::Quarter { alpha, beta, .. }, 2) if q.k == 2 => wedge_fredholm(&spec.model, alpha, beta, q.grid, face_l, q.gap_tol)?,
        (Region::Quarter { .. }, _) => return Err(Error::Input("quarter-plane regions need n = k = 2".into())),
        _ => fredholm_criterion(&spec.model, q.k, q.grid, face_l, q.gap_tol)?,
    };
    let gap = report.into_result()?.min_gap();
    let mut th = Thresholds::for_window(q.l, gap);
    th.loc_lambda = q.loc_lambda;
    if let Some(e) = q.zero_eps {
        th.zero_eps = e;
    }
    let syms = &spec.symmetries;
    let value = if d == 0 {
        let op = match &q.region {
            Region::Orthant => build_orthant(&spec.model, q.k, &[], q.l)?,
            Region::Quarter { alpha, beta, convex } => build_quarter(&spec.model, alpha, beta, *convex, &[], q.l)?,
        };
        match class {
            AzClass::BDI => chiral_index(&op, syms.pi.as_ref().unwrap(), &th)?,
            AzClass::CII => {
                let v = chiral_index(&op, syms.pi.as_ref().unwrap(), &th)?;
                InvariantValue::new(GroupTag::TwoZ, v.value, "chiral index")?
            }
            AzClass::D => mod2_index_d(&op, &th)?,
            _ => mod2_index_diii(&op, &th)?,
        }
    } else {
        let fam = edge_family(spec, q.k, q.l, &th, 0.5 * gap);
        match class {
            AzClass::D | AzClass::C => {
                let sf = spectral_flow(&fam, -PI, PI, q.samples)?;
                let tag = if class == AzClass::C { GroupTag::TwoZ } else { GroupTag::Z };
                InvariantValue::new(tag, sf, "spectral flow")?
            }
            _ => {
                let theta = syms.theta.as_ref().ok_or_else(unsupported)?;
                let op0 = build_orthant(&spec.model, q.k, &[0.0], q.l)?;
                z2_spectral_flow(&fam, PI, q.samples, &op0.lift(&theta.matrix).to_dense())?
            }
        }
    };
    if value.group != tag {
        return Err(Error::Inconsistent(format!("computed {} invariant where the table lists {tag}", value.group)));
    }
    Ok(CornerOutcome { value, class, n, k: q.k, l: q.l, thresholds: th, face_gap: gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct Stability {
    pub doubled_l_agrees: bool,
    pub perturbation_agrees: bool,
    pub perturbations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub invariant_name: String,
    pub group_tag: GroupTag,
    pub value: i64,
    pub class: AzClass,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: i64,
    pub thresholds: Thresholds,
    pub face_gap: f64,
    pub stability: Option<Stability>,
}

impl From<CornerOutcome> for InvariantReport {
    fn from(o: CornerOutcome) -> Self {
        InvariantReport {
            invariant_name: o.value.name,
            group_tag: o.value.group,
            value: o.value.value,
            class: o.class,
            n: o.n,
            k: o.k,
            l: o.l,
            thresholds: o.thresholds,
            face_gap: o.face_gap,
            stability: None,
        }
    }
}

/// Recomputes the invariant at `2L` and under `count` seeded symmetric
/// perturbations of norm `gap / 5`.
pub fn stability_check(spec: &ModelSpec, q: &CornerQuery, base: &CornerOutcome, count: usize, seed: u64) -> Result<Stability> {
    let mut doubled = q.clone();
    doubled.l = 2 * q.l;
    let doubled_l_agrees = corner_invariant(spec, &doubled)?.value == base.value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed: Vec<ModelSpec> = (0..count)
        .map(|_| {
            let dh = symmetric_perturbation(&spec.model, &spec.symmetries, base.face_gap / 5.0, &mut rng)?;
            Ok(ModelSpec { model: spec.model.add(&dh)?, ..spec.clone() })
        })
        .collect::<Result<_>>()?;
    let mut perturbation_agrees = true;
    for p in &perturbed {
        perturbation_agrees &= corner_invariant(p, q)?.value.value == base.value.value;
    }
    Ok(Stability { doubled_l_agrees, perturbation_agrees, perturbations: count, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, I};
    use crate::models;

    fn scalar(s: f64) -> CMat {
        diag_real(&[s])
    }

    #[test]
    fn flow_of_scalar_and_cancelling_pair() {
        assert_eq!(spectral_flow(&MatrixFamily(scalar), -1.0, 1.0, 8).unwrap(), 1);
        assert_eq!(spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), -1.0, 1.0, 8).unwrap(), 0);
        assert_eq!(spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), -1.0, 1.0, 16).unwrap(), 0);
    }

    #[test]
    fn z2_flow_of_kramers_pair() {
        let j = crate::linalg::canonical_j(2);
        let b = |s: f64| diag_real(&[s, -s]);
        assert_eq!(z2_spectral_flow(&MatrixFamily(b), 1.0, 4, &j).unwrap().value, 1);
        let bb = |s: f64| diag_real(&[s, -s, s, -s]);
        let jj = crate::linalg::canonical_j(4);
        assert_eq!(z2_spectral_flow(&MatrixFamily(bb), 1.0, 4, &jj).unwrap().value, 0);
        let flat = |_: f64| diag_real(&[1.0, 1.0]);
        assert_eq!(z2_spectral_flow(&MatrixFamily(flat), 1.0, 4, &j).unwrap().value, 0);
        assert!(z2_spectral_flow(&MatrixFamily(b), 1.0, 4, &identity(2)).is_err());
    }

    #[test]
    fn class_d_flow_of_imaginary_path() {
        // B'(s) = i s is skew-adjoint; its flow is that of -i B'.
        let b = |s: f64| identity(1) * (I * s);
        let h = move |s: f64| b(s) * (-I);
        assert_eq!(spectral_flow(&MatrixFamily(h), -1.0, 1.0, 8).unwrap(), 1);
    }

    fn half_line(spec: &ModelSpec, l: i64) -> TruncatedOperator {
        build_orthant(&spec.model, 1, &[], l).unwrap()
    }

    #[test]
    fn first_order_edge_invariants() {
        let th = Thresholds::for_window(40, 0.5);
        let s = models::ssh(0.5, 1.0).unwrap();
        assert_eq!(chiral_index(&half_line(&s, 40), s.symmetries.pi.as_ref().unwrap(), &th).unwrap().value, 1);
        let k = models::kitaev(0.0, 0.5, 0.5).unwrap();
        assert_eq!(localized_kernel_count(&half_line(&k, 40), &th).unwrap(), 1);
        let c = models::cii_chain(0.3, 1.0, 0.4).unwrap();
        assert_eq!(chiral_index(&half_line(&c, 40), c.symmetries.pi.as_ref().unwrap(), &th).unwrap().value, 2);
        let trivial = models::ssh(1.0, 0.5).unwrap();
        assert_eq!(chiral_index(&half_line(&trivial, 40), trivial.symmetries.pi.as_ref().unwrap(), &th).unwrap().value, 0);
    }

    #[test]
    fn identity_has_index_zero() {
        let op = half_line(&models::ssh(0.5, 1.0).unwrap(), 10);
        let id = TruncatedOperator { matrix: SparseMatrix::identity(op.dim()), ..op };
        let th = Thresholds::for_window(10, 1.0);
        assert_eq!(localized_fredholm_index(&id, &th).unwrap().value, 0);
    }

    #[test]
    fn pwave_edge_flow() {
        let p = models::pwave(-2.0, 1.0, 1.0).unwrap();
        let r = corner_invariant(&p, &CornerQuery::new(1, 30)).unwrap();
        assert_eq!(r.value.value.abs(), 1);
        let mut q = CornerQuery::new(1, 30);
        q.samples = 64;
        assert_eq!(corner_invariant(&p, &q).unwrap().value, r.value);
    }

    #[test]
    fn unsupported_pair_is_an_error() {
        let s = models::ssh(0.5, 1.0).unwrap();
        let p = models::product_hamiltonian(&s, &s).unwrap().spec;
        assert!(matches!(corner_invariant(&p, &CornerQuery::new(1, 12)), Err(Error::Unsupported(_))));
    }
}
