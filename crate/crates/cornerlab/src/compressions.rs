//! Finite-window compressions of lattice models: bulk tori, half-spaces,
//! quarter-plane wedges, orthants and their faces.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Assumption, Error, Result};
use crate::linalg::{eigh, CMat, SparseMatrix, C};
use crate::model::{momentum_grid, HoppingModel};

/// Boundary slope. Rational slopes are reduced with `q > 0`; the two infinite
/// slopes are `p/q = -1/0` and `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slope {
    Rational { p: i64, q: i64 },
    MinusInfinity,
    PlusInfinity,
    Irrational,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1, 0);
    let (mut t0, mut t1) = (0, 1);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

impl Slope {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return match p.signum() {
                1 => Ok(Slope::PlusInfinity),
                -1 => Ok(Slope::MinusInfinity),
                _ => Err(Error::Input("slope 0/0".into())),
            };
        }
        let g = gcd(p, q);
        let s = q.signum();
        Ok(Slope::Rational { p: s * p / g, q: s * q / g })
    }

    pub fn is_irrational(&self) -> bool {
        matches!(self, Slope::Irrational)
    }

    /// Numerator and denominator, with the infinite slopes encoded as `∓1/0`.
    pub fn pq(&self) -> Option<(i64, i64)> {
        match *self {
            Slope::Rational { p, q } => Some((p, q)),
            Slope::MinusInfinity => Some((-1, 0)),
            Slope::PlusInfinity => Some((1, 0)),
            Slope::Irrational => None,
        }
    }

    fn require_pq(&self) -> Result<(i64, i64)> {
        self.pq().ok_or_else(|| Error::Unsupported("lattice windows need rational or infinite slopes".into()))
    }

    /// Strict order on the extended rationals.
    pub fn less_than(&self, other: &Slope) -> Option<bool> {
        Some(match (self, other) {
            (Slope::Irrational, _) | (_, Slope::Irrational) => return None,
            (Slope::MinusInfinity, b) => *b != Slope::MinusInfinity,
            (_, Slope::MinusInfinity) => false,
            (Slope::PlusInfinity, _) => false,
            (_, Slope::PlusInfinity) => true,
            (Slope::Rational { p: a, q: b }, Slope::Rational { p: c, q: d }) => a * d < c * b,
        })
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Rational { p, q } => write!(f, "{p}/{q}"),
            Slope::MinusInfinity => f.write_str("-inf"),
            Slope::PlusInfinity => f.write_str("+inf"),
            Slope::Irrational => f.write_str("irrational"),
        }
    }
}

impl FromStr for Slope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "-inf" | "-infinity" => return Ok(Slope::MinusInfinity),
            "inf" | "+inf" | "infinity" | "+infinity" => return Ok(Slope::PlusInfinity),
            "irrational" | "irr" => return Ok(Slope::Irrational),
            _ => {}
        }
        let bad = || Error::Input(format!("cannot parse slope '{s}' (use p/q, -inf, +inf or irrational)"));
        let (p, q) = match t.split_once('/') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => (t.parse().map_err(|_| bad())?, 1),
        };
        Slope::rational(p, q)
    }
}

/// Result of bringing `α` to zero by an `SL(2, Z)` change of lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlopeNormalization {
    /// `Γ = [[n, -m], [-p, q]]`.
    pub gamma: [[i64; 2]; 2],
    pub m: i64,
    pub n: i64,
    /// Numerator `t = -p s + q r` of the transformed slope `γ = t/u`.
    pub t: i64,
    pub u: i64,
}

impl SlopeNormalization {
    pub fn det(&self) -> i64 {
        let g = self.gamma;
        g[0][0] * g[1][1] - g[0][1] * g[1][0]
    }

    pub fn apply(&self, x: [i64; 2]) -> [i64; 2] {
        let g = self.gamma;
        [g[0][0] * x[0] + g[0][1] * x[1], g[1][0] * x[0] + g[1][1] * x[1]]
    }

    pub fn gamma_rows(&self) -> Vec<Vec<i64>> {
        self.gamma.iter().map(|r| r.to_vec()).collect()
    }
}

fn check_order(alpha: &Slope, beta: &Slope) -> Result<()> {
    match alpha.less_than(beta) {
        Some(true) => {}
        Some(false) => return Err(Error::Ordering(format!("need α < β, got α = {alpha}, β = {beta}"))),
        None => return Err(Error::Unsupported("irrational slope in a lattice computation".into())),
    }
    if *alpha == Slope::MinusInfinity && *beta == Slope::PlusInfinity {
        return Err(Error::Unsupported("α = -inf and β = +inf together do not bound a wedge".into()));
    }
    Ok(())
}

/// Solves `-p m + q n = 1` (smallest `m >= 0` modulo `q`) and returns `Γ`,
/// `t` and `u`.
pub fn slope_normalize(alpha: &Slope, beta: &Slope) -> Result<SlopeNormalization> {
    check_order(alpha, beta)?;
    let (p, q) = alpha.require_pq()?;
    let (r, s) = beta.require_pq()?;
    let (m, n) = if q == 0 {
        // p = -1 here, so the equation reads m = 1.
        (1, 0)
    } else {
        let (g, x, y) = ext_gcd(q, -p);
        debug_assert_eq!(g, 1);
        let (mut n, mut m) = (x, y);
        let k = m.div_euclid(q);
        m -= k * q;
        n -= k * p;
        (m, n)
    };
    debug_assert_eq!(-p * m + q * n, 1);
    Ok(SlopeNormalization { gamma: [[n, -m], [-p, q]], m, n, t: -p * s + q * r, u: n * s - m * r })
}

/// Unimodular matrix whose second row is the primitive vector `(a, b)`.
pub fn unimodular_with_row(a: i64, b: i64) -> Result<[[i64; 2]; 2]> {
    let (g, x, y) = ext_gcd(b, -a);
    if g != 1 {
        return Err(Error::Input(format!("normal ({a}, {b}) is not primitive")));
    }
    Ok([[x, y], [a, b]])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RegionKind {
    Bulk { k: usize },
    HalfSpace,
    Quarter { convex: bool },
    Orthant { k: usize },
    Face { axis: usize },
    Custom,
}

/// Sites of a window in a fixed order, with orbital-major flattening
/// `index = site * orbitals + orbital`.
#[derive(Clone, Debug)]
pub struct SiteIndexMap {
    sites: Vec<Vec<i64>>,
    orbitals: usize,
    lookup: HashMap<Vec<i64>, usize>,
}

impl SiteIndexMap {
    pub fn new(sites: Vec<Vec<i64>>, orbitals: usize) -> Self {
        let lookup = sites.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        SiteIndexMap { sites, orbitals, lookup }
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    pub fn len(&self) -> usize {
        self.sites.len() * self.orbitals
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site_index(&self, site: &[i64]) -> Option<usize> {
        self.lookup.get(site).copied()
    }

    pub fn site_of(&self, index: usize) -> &[i64] {
        &self.sites[index / self.orbitals]
    }

    /// Same sites with `factor` times as many slots per site.
    pub fn widened(&self, factor: usize) -> Self {
        SiteIndexMap { sites: self.sites.clone(), orbitals: self.orbitals * factor, lookup: self.lookup.clone() }
    }

    /// Per-index indicator of `|x - corner|_1 <= radius`.
    pub fn corner_mask(&self, corner: &[i64], radius: f64) -> Vec<bool> {
        let per_site: Vec<bool> = self
            .sites
            .iter()
            .map(|s| s.iter().zip(corner).map(|(a, b)| (a - b).abs()).sum::<i64>() as f64 <= radius)
            .collect();
        (0..self.len()).map(|i| per_site[i / self.orbitals]).collect()
    }
}

/// A model compressed to a finite window.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub matrix: SparseMatrix,
    pub sites: SiteIndexMap,
    pub kind: RegionKind,
    pub window: i64,
    pub corner: Vec<i64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn corner_mask(&self, radius: f64) -> Vec<bool> {
        self.sites.corner_mask(&self.corner, radius)
    }

    /// Site-diagonal lift of an orbital matrix to the window.
    pub fn lift(&self, u: &CMat) -> SparseMatrix {
        SparseMatrix::fiber_lift(u, self.sites.sites().len())
    }

    /// Block operator on the same window. Within each site the slots are
    /// ordered block-major: slot `r` of orbital `o` sits at `r * orbitals + o`.
    pub fn interleave(&self, blocks: &[Vec<Option<SparseMatrix>>]) -> Result<TruncatedOperator> {
        let b = blocks.len();
        let n = self.dim();
        let per = self.sites.orbitals();
        let pos = |i: usize, slot: usize| (i / per) * per * b + slot * per + i % per;
        let mut t = Vec::new();
        for (r, row) in blocks.iter().enumerate() {
            if row.len() != b {
                return Err(Error::Dimension("block layout must be square".into()));
            }
            for (c, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    if m.nrows() != n || m.ncols() != n {
                        return Err(Error::Dimension("block does not match the window".into()));
                    }
                    t.extend(m.triplets().into_iter().map(|(i, j, v)| (pos(i, r), pos(j, c), v)));
                }
            }
        }
        Ok(TruncatedOperator {
            matrix: SparseMatrix::from_triplets(n * b, n * b, t),
            sites: self.sites.widened(b),
            kind: self.kind.clone(),
            window: self.window,
            corner: self.corner.clone(),
        })
    }

    /// `[[0, A^*], [A, 0]]` on the same window, with grading `diag(1, -1)`
    /// per slot. The grading is returned as a diagonal.
    pub fn dilation(&self) -> Result<(TruncatedOperator, Vec<f64>)> {
        let a = self.matrix.clone();
        let d = self.interleave(&[vec![None, Some(a.adjoint())], vec![Some(a), None]])?;
        let grading = block_grading(&d.sites, 2);
        Ok((d, grading))
    }
}

/// `+1` on the first half of each site's slots and `-1` on the second half,
/// for a window produced by `interleave` with two blocks.
pub fn block_grading(sites: &SiteIndexMap, blocks: usize) -> Vec<f64> {
    let per = sites.orbitals() / blocks;
    (0..sites.len()).map(|i| if (i % sites.orbitals()) / per == 0 { 1.0 } else { -1.0 }).collect()
}

/// Assembles `<x|H|x+v> = h_v` on the given sites. `wrap[a]` makes axis `a`
/// periodic on `[lo, lo + period)`.
pub fn assemble(model: &HoppingModel, sites: Vec<Vec<i64>>, wrap: &[Option<(i64, i64)>]) -> Result<(SparseMatrix, SiteIndexMap)> {
    let d = model.dim();
    if wrap.len() != d {
        return Err(Error::Dimension("wrap specification does not match the model".into()));
    }
    let n = model.orbitals();
    let map = SiteIndexMap::new(sites, n);
    let hops: Vec<(&Vec<i64>, &CMat)> = model.hoppings().collect();
    let rows: Vec<Vec<(usize, usize, C)>> = map
        .sites()
        .par_iter()
        .enumerate()
        .map(|(xi, x)| {
            let mut out = Vec::new();
            let mut y = vec![0i64; d];
            for (v, h) in &hops {
                for a in 0..d {
                    y[a] = x[a] + v[a];
                    if let Some((lo, period)) = wrap[a] {
                        y[a] = lo + (y[a] - lo).rem_euclid(period);
                    }
                }
                if let Some(yi) = map.site_index(&y) {
                    for i in 0..n {
                        for j in 0..n {
                            let z = h[(i, j)];
                            if z != C::new(0.0, 0.0) {
                                out.push((xi * n + i, yi * n + j, z));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let len = map.len();
    Ok((SparseMatrix::from_triplets(len, len, rows.into_iter().flatten().collect()), map))
}

fn grid_sites(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

fn check_window(model: &HoppingModel, l: i64, need: i64) -> Result<()> {
    if l < need {
        return Err(Error::Window(format!("window size {l} below {need} for hopping range {}", model.range())));
    }
    Ok(())
}

fn reduced(model: &HoppingModel, k: usize, momentum: &[f64]) -> Result<HoppingModel> {
    if k > model.dim() {
        return Err(Error::Dimension(format!("codimension {k} exceeds dimension {}", model.dim())));
    }
    let keep: Vec<usize> = (0..k).collect();
    model.reduce(&keep, momentum)
}

/// Periodic `L^k` torus in the first `k` axes at fixed transverse momentum.
pub fn build_bulk(model: &HoppingModel, k: usize, momentum: &[f64], l: i64) -> Result<TruncatedOperator> {
    check_window(model, l, 2 * model.range().max(1))?;
    let m = reduced(model, k, momentum)?;
    let sites = grid_sites(&vec![(0, l - 1); k]);
    let (matrix, sites) = assemble(&m, sites, &vec![Some((0, l)); k])?;
    Ok(TruncatedOperator { matrix, sites, kind: RegionKind::Bulk { k }, window: l, corner: vec![0; k] })
}

/// Half-space `-α m + n >= 0` in the box `[-L, L]^2` (first two axes). A
/// one-dimensional model gives the half-line `[0, L]`.
pub fn build_half_space(model: &HoppingModel, alpha: &Slope, momentum: &[f64], l: i64) -> Result<TruncatedOperator> {
    check_window(model, l, model.range().max(1))?;
    if model.dim() == 1 {
        if !momentum.is_empty() {
            return Err(Error::Dimension("half-line takes no transverse momentum".into()));
        }
        let (matrix, sites) = assemble(model, grid_sites(&[(0, l)]), &[None])?;
        return Ok(TruncatedOperator { matrix, sites, kind: RegionKind::HalfSpace, window: l, corner: vec![0] });
    }
    let (p, q) = alpha.require_pq()?;
    let m = reduced(model, 2, momentum)?;
    let sites: Vec<Vec<i64>> = grid_sites(&[(-l, l), (-l, l)]).into_iter().filter(|x| -p * x[0] + q * x[1] >= 0).collect();
    let (matrix, sites) = assemble(&m, sites, &[None, None])?;
    Ok(TruncatedOperator { matrix, sites, kind: RegionKind::HalfSpace, window: l, corner: vec![0, 0] })
}

/// Membership in the convex wedge `{-α m + n >= 0} ∩ {-β m + n <= 0}` or the
/// concave region obtained with a union.
pub fn in_quarter(alpha: (i64, i64), beta: (i64, i64), convex: bool, x: &[i64]) -> bool {
    let a = -alpha.0 * x[0] + alpha.1 * x[1] >= 0;
    let b = -beta.0 * x[0] + beta.1 * x[1] <= 0;
    if convex {
        a && b
    } else {
        a || b
    }
}

pub fn quarter_sites(alpha: &Slope, beta: &Slope, convex: bool, l: i64) -> Result<Vec<Vec<i64>>> {
    check_order(alpha, beta)?;
    let a = alpha.require_pq()?;
    let b = beta.require_pq()?;
    Ok(grid_sites(&[(-l, l), (-l, l)]).into_iter().filter(|x| in_quarter(a, b, convex, x)).collect())
}

pub fn build_quarter(
    model: &HoppingModel,
    alpha: &Slope,
    beta: &Slope,
    convex: bool,
    momentum: &[f64],
    l: i64,
) -> Result<TruncatedOperator> {
    check_window(model, l, 2 * model.range().max(1))?;
    let sites = quarter_sites(alpha, beta, convex, l)?;
    let m = reduced(model, 2, momentum)?;
    let (matrix, sites) = assemble(&m, sites, &[None, None])?;
    Ok(TruncatedOperator { matrix, sites, kind: RegionKind::Quarter { convex }, window: l, corner: vec![0, 0] })
}

/// Orthant `[0, L]^k` in the first `k` axes.
pub fn build_orthant(model: &HoppingModel, k: usize, momentum: &[f64], l: i64) -> Result<TruncatedOperator> {
    check_window(model, l, 2 * model.range().max(1))?;
    let m = reduced(model, k, momentum)?;
    let (matrix, sites) = assemble(&m, grid_sites(&vec![(0, l); k]), &vec![None; k])?;
    Ok(TruncatedOperator { matrix, sites, kind: RegionKind::Orthant { k }, window: l, corner: vec![0; k] })
}

/// The `k` faces of the orthant: face `i` is periodic on `[-L, L)` in axis
/// `i` and a half-line `[0, L]` in the other orthant axes.
pub fn build_faces(model: &HoppingModel, k: usize, momentum: &[f64], l: i64) -> Result<Vec<TruncatedOperator>> {
    check_window(model, l, 2 * model.range().max(1))?;
    let m = reduced(model, k, momentum)?;
    (0..k)
        .map(|i| {
            let ranges: Vec<(i64, i64)> = (0..k).map(|a| if a == i { (-l, l - 1) } else { (0, l) }).collect();
            let wrap: Vec<Option<(i64, i64)>> = (0..k).map(|a| (a == i).then_some((-l, 2 * l))).collect();
            let (matrix, sites) = assemble(&m, grid_sites(&ranges), &wrap)?;
            let corner = (0..k).map(|_| 0).collect();
            Ok(TruncatedOperator { matrix, sites, kind: RegionKind::Face { axis: i }, window: l, corner })
        })
        .collect()
}

/// One-dimensional depth profile `[0, depth]` of the half-plane with inward
/// primitive normal `(a, b)` (first two axes), at momentum `theta` along the
/// boundary and transverse momenta for the remaining axes.
pub fn half_plane_face(model: &HoppingModel, normal: (i64, i64), theta: f64, transverse: &[f64], depth: i64) -> Result<TruncatedOperator> {
    let g = unimodular_with_row(normal.0, normal.1)?;
    let rows: Vec<Vec<i64>> = g.iter().map(|r| r.to_vec()).collect();
    let moved = model.transform_offsets(&rows)?;
    let mut momenta = vec![theta];
    momenta.extend_from_slice(transverse);
    let chain = moved.reduce(&[1], &momenta)?;
    let (matrix, sites) = assemble(&chain, grid_sites(&[(0, depth)]), &[None])?;
    Ok(TruncatedOperator { matrix, sites, kind: RegionKind::HalfSpace, window: depth, corner: vec![0] })
}

/// Smallest |E| on a face window, ignoring eigenvectors that live closer to
/// the artificial far walls (`x_a = L`) than to the physical ones (`x_a = 0`
/// for `a` in `walls`).
pub fn physical_gap(op: &TruncatedOperator, walls: &[usize], l: i64) -> Result<f64> {
    let (w, v) = eigh(&op.matrix.to_dense())?;
    let n = op.dim();
    let physical: Vec<bool> = (0..n)
        .map(|i| {
            let x = op.sites.site_of(i);
            let dp = walls.iter().map(|&a| x[a]).min().unwrap_or(i64::MAX);
            let da = walls.iter().map(|&a| l - x[a]).min().unwrap_or(i64::MAX);
            dp < da
        })
        .collect();
    let mut gap = f64::INFINITY;
    for k in 0..n {
        let weight: f64 = (0..n).filter(|&i| physical[i]).map(|i| v[(i, k)].norm_sqr()).sum();
        if weight > 0.5 {
            gap = gap.min(w[k].abs());
        }
    }
    Ok(gap)
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceGap {
    pub face: String,
    pub min_gap: f64,
    pub worst_momentum: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmReport {
    pub passed: bool,
    pub assumption: String,
    pub tolerance: f64,
    pub bulk_gap: f64,
    pub faces: Vec<FaceGap>,
}

impl FredholmReport {
    pub fn min_gap(&self) -> f64 {
        self.faces.iter().map(|f| f.min_gap).fold(self.bulk_gap, f64::min)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let assumption = if self.assumption == "sgc2" { Assumption::Sgc2 } else { Assumption::Sgc1 };
        let worst = self
            .faces
            .iter()
            .min_by(|a, b| a.min_gap.partial_cmp(&b.min_gap).unwrap())
            .map(|f| format!(", {} gap {:e} at {:?}", f.face, f.min_gap, f.worst_momentum))
            .unwrap_or_default();
        Err(Error::assumption(
            assumption,
            format!("bulk gap {:e}{} (tolerance {:e})", self.bulk_gap, worst, self.tolerance),
        ))
    }
}

fn min_over<F>(points: Vec<Vec<f64>>, f: F) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let vals: Vec<Result<f64>> = points.par_iter().map(|t| f(t)).collect();
    let mut best = (f64::INFINITY, Vec::new());
    for (t, v) in points.into_iter().zip(vals) {
        let v = v?;
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// Checks that the bulk and every orthant face `H_i` (constraint `i` dropped)
/// is gapped by more than `tol`, sampling `grid` momenta per periodic axis.
pub fn fredholm_criterion(model: &HoppingModel, k: usize, grid: usize, l: i64, tol: f64) -> Result<FredholmReport> {
    let n = model.dim();
    if k == 0 || k > n {
        return Err(Error::Input(format!("codimension {k} for a {n}-dimensional model")));
    }
    check_window(model, l, 2 * model.range().max(1))?;
    let bulk_gap = model.bulk_gap(grid)?;
    let mut faces = Vec::new();
    if k >= 2 {
        for i in 0..k {
            let keep: Vec<usize> = (0..k).filter(|&a| a != i).collect();
            let walls: Vec<usize> = (0..keep.len()).collect();
            let pts = momentum_grid(n - k + 1, grid);
            let (min_gap, worst) = min_over(pts, |t| {
                let m = model.reduce(&keep, t)?;
                let (matrix, sites) = assemble(&m, grid_sites(&vec![(0, l); keep.len()]), &vec![None; keep.len()])?;
                let op = TruncatedOperator { matrix, sites, kind: RegionKind::Face { axis: i }, window: l, corner: vec![0; keep.len()] };
                physical_gap(&op, &walls, l)
            })?;
            faces.push(FaceGap { face: format!("face {i}"), min_gap: min_gap.min(bulk_gap), worst_momentum: worst });
        }
    }
    let passed = bulk_gap > tol && faces.iter().all(|f| f.min_gap > tol);
    let assumption = if k <= 2 { "sgc1" } else { "sgc2" };
    Ok(FredholmReport { passed, assumption: assumption.into(), tolerance: tol, bulk_gap, faces })
}

/// Gap check for the two half-plane faces of the wedge between `α` and `β`.
pub fn wedge_fredholm(model: &HoppingModel, alpha: &Slope, beta: &Slope, grid: usize, l: i64, tol: f64) -> Result<FredholmReport> {
    check_order(alpha, beta)?;
    let (p, q) = alpha.require_pq()?;
    let (r, s) = beta.require_pq()?;
    let bulk_gap = model.bulk_gap(grid)?;
    let mut faces = Vec::new();
    for (name, normal) in [("alpha face", (-p, q)), ("beta face", (r, -s))] {
        let pts = momentum_grid(model.dim() - 1, grid);
        let (min_gap, worst) = min_over(pts, |t| {
            let op = half_plane_face(model, normal, t[0], &t[1..], l)?;
            physical_gap(&op, &[0], l)
        })?;
        faces.push(FaceGap { face: name.into(), min_gap: min_gap.min(bulk_gap), worst_momentum: worst });
    }
    let passed = bulk_gap > tol && faces.iter().all(|f| f.min_gap > tol);
    Ok(FredholmReport { passed, assumption: "sgc1".into(), tolerance: tol, bulk_gap, faces })
}

/// Laurent polynomial `Σ c_a z^a` in `dim` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol {
    pub dim: usize,
    pub terms: BTreeMap<Vec<i64>, C>,
}

impl LaurentSymbol {
    pub fn monomial(exponents: Vec<i64>) -> Self {
        let dim = exponents.len();
        LaurentSymbol { dim, terms: BTreeMap::from([(exponents, C::new(1.0, 0.0))]) }
    }

    /// Parses products like `z1^2*z3^-1` (or `1`) in `dim` variables.
    pub fn parse_monomial(s: &str, dim: usize) -> Result<Self> {
        let mut e = vec![0i64; dim];
        let t = s.trim();
        if t != "1" {
            for factor in t.split('*') {
                let f = factor.trim();
                let bad = || Error::Input(format!("cannot parse monomial factor '{f}'"));
                let rest = f.strip_prefix('z').ok_or_else(bad)?;
                let (var, pow) = match rest.split_once('^') {
                    Some((v, p)) => (v, p.parse::<i64>().map_err(|_| bad())?),
                    None => (rest, 1),
                };
                let var: usize = var.parse().map_err(|_| bad())?;
                if var == 0 || var > dim {
                    return Err(bad());
                }
                e[var - 1] += pow;
            }
        }
        Ok(Self::monomial(e))
    }

    fn range(&self) -> i64 {
        self.terms.keys().flat_map(|a| a.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<&Vec<i64>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).copied().unwrap_or_default();
            let b = other.terms.get(k).copied().unwrap_or_default();
            (a - b).norm() <= tol
        })
    }

    /// Multiplication operator `δ_x -> Σ c_a δ_{x+a}` on a window.
    fn operator(&self, sites: &SiteIndexMap, wrap: &[Option<(i64, i64)>]) -> SparseMatrix {
        let mut t = Vec::new();
        for (xi, x) in sites.sites().iter().enumerate() {
            for (a, c) in &self.terms {
                let y: Vec<i64> = (0..self.dim)
                    .map(|d| {
                        let v = x[d] + a[d];
                        match wrap[d] {
                            Some((lo, p)) => lo + (v - lo).rem_euclid(p),
                            None => v,
                        }
                    })
                    .collect();
                if let Some(yi) = sites.site_index(&y) {
                    t.push((yi, xi, *c));
                }
            }
        }
        SparseMatrix::from_triplets(sites.len(), sites.len(), t)
    }
}

#[derive(Clone, Debug)]
pub struct RhoPrime {
    /// `ρ'` on the orthant window `[0, L]^k`.
    pub matrix: SparseMatrix,
    pub sites: SiteIndexMap,
    /// Largest deviation between `ρ'` and each face operator on interior rows.
    pub interior_defect: f64,
}

/// Splitting map `ρ'(T) = Σ_{A ≠ ∅} (-1)^{|A|+1} ρ_A(T_A)` for face data given
/// by symbols, where `T_A` is the compression with the axes in `A` free.
pub fn splitting_rho_prime(face_symbols: &[LaurentSymbol], l: i64) -> Result<RhoPrime> {
    let k = face_symbols.len();
    if k == 0 || face_symbols.iter().any(|s| s.dim != k) {
        return Err(Error::Dimension("need one k-variable symbol per face".into()));
    }
    for i in 0..k {
        for j in i + 1..k {
            if !face_symbols[i].close_to(&face_symbols[j], 1e-12) {
                return Err(Error::Inconsistent(format!(
                    "faces {i} and {j} disagree on their common double compression"
                )));
            }
        }
    }
    let r = face_symbols.iter().map(|s| s.range()).max().unwrap_or(0);
    if l < 2 * r + 1 {
        return Err(Error::Window(format!("window {l} too small for symbol range {r}")));
    }
    let orthant = SiteIndexMap::new(grid_sites(&vec![(0, l); k]), 1);
    let mut acc: BTreeMap<(usize, usize), C> = BTreeMap::new();
    for mask in 1u32..(1 << k) {
        let set: Vec<usize> = (0..k).filter(|a| mask & (1 << a) != 0).collect();
        let sign = if set.len() % 2 == 1 { 1.0 } else { -1.0 };
        // T_A comes from any face in A; consistency makes the choice immaterial.
        let sym = &face_symbols[set[0]];
        let ranges: Vec<(i64, i64)> = (0..k).map(|a| if set.contains(&a) { (-l, l) } else { (0, l) }).collect();
        let wrap: Vec<Option<(i64, i64)>> = (0..k).map(|a| set.contains(&a).then_some((-l, 2 * l + 1))).collect();
        let win = SiteIndexMap::new(grid_sites(&ranges), 1);
        let op = sym.operator(&win, &wrap);
        for (i, j, v) in op.triplets() {
            if let (Some(a), Some(b)) = (orthant.site_index(win.site_of(i)), orthant.site_index(win.site_of(j))) {
                *acc.entry((a, b)).or_default() += v * sign;
            }
        }
    }
    let n = orthant.len();
    let matrix = SparseMatrix::from_triplets(n, n, acc.into_iter().map(|((a, b), v)| (a, b, v)).collect());
    let mut defect: f64 = 0.0;
    for (i, sym) in face_symbols.iter().enumerate() {
        let ranges: Vec<(i64, i64)> = (0..k).map(|a| if a == i { (-l, l) } else { (0, l) }).collect();
        let wrap: Vec<Option<(i64, i64)>> = (0..k).map(|a| (a == i).then_some((-l, 2 * l + 1))).collect();
        let win = SiteIndexMap::new(grid_sites(&ranges), 1);
        let face = sym.operator(&win, &wrap);
        for (xi, x) in orthant.sites().iter().enumerate() {
            if x[i] < r || x.iter().any(|&c| c > l - r) {
                continue;
            }
            let fi = win.site_index(x).unwrap();
            for (yi, y) in orthant.sites().iter().enumerate() {
                let fy = win.site_index(y).unwrap();
                defect = defect.max((matrix.get(xi, yi) - face.get(fi, fy)).norm());
            }
        }
    }
    Ok(RhoPrime { matrix, sites: orthant, interior_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn normalize_identity_case() {
        let n = slope_normalize(&s("0/1"), &s("+inf")).unwrap();
        assert_eq!(n.gamma, [[1, 0], [0, 1]]);
        assert_eq!((n.t, n.u), (1, 0));
    }

    #[test]
    fn normalize_half() {
        let n = slope_normalize(&s("1/2"), &s("1")).unwrap();
        assert_eq!(n.gamma, [[1, -1], [-1, 2]]);
        assert_eq!((n.t, n.u), (1, 0));
        let n = slope_normalize(&s("1/2"), &s("3")).unwrap();
        assert_eq!((n.t, n.u), (5, -2));
        assert_eq!(n.det(), 1);
        assert_eq!(n.apply([2, 1]), [1, 0]);
    }

    #[test]
    fn ordering_errors() {
        assert!(matches!(slope_normalize(&s("1"), &s("1/2")), Err(Error::Ordering(_))));
        assert!(matches!(slope_normalize(&s("+inf"), &s("1")), Err(Error::Ordering(_))));
    }

    #[test]
    fn minus_infinity_alpha() {
        let n = slope_normalize(&s("-inf"), &s("2")).unwrap();
        assert_eq!(n.det(), 1);
        assert_eq!(n.apply([0, -1]), [1, 0]);
        assert!(n.t > 0);
    }

    fn chain() -> HoppingModel {
        HoppingModel::new(1, 2)
            .with_pair(&[0], &from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]))
            .unwrap()
            .with_pair(&[1], &from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]))
            .unwrap()
    }

    #[test]
    fn window_sizes() {
        let m = chain().embed(2, 0, 2, |h| h.clone()).unwrap();
        let q = build_quarter(&m, &s("0"), &s("+inf"), true, &[], 10).unwrap();
        assert_eq!(q.sites.sites().len(), 121);
        let faces = build_faces(&m.embed(3, 0, 2, |h| h.clone()).unwrap(), 3, &[], 4).unwrap();
        assert_eq!(faces.len(), 3);
        assert!(matches!(build_bulk(&m, 2, &[], 1), Err(Error::Window(_))));
    }

    #[test]
    fn bulk_matches_bloch_spectrum() {
        let m = chain();
        let op = build_bulk(&m, 1, &[], 8).unwrap();
        let mut w = crate::linalg::eigvalsh(&op.matrix.to_dense()).unwrap();
        let mut want = Vec::new();
        for j in 0..8 {
            want.extend(crate::linalg::eigvalsh(&m.bloch(&[std::f64::consts::TAU * j as f64 / 8.0]).unwrap()).unwrap());
        }
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in w.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_prime_identity_and_shift() {
        let one = LaurentSymbol::parse_monomial("1", 3).unwrap();
        let r = splitting_rho_prime(&[one.clone(), one.clone(), one], 4).unwrap();
        let dense = r.matrix.to_dense();
        assert!(crate::linalg::max_abs_diff(&dense, &crate::linalg::identity(125)) < 1e-15);
        let z = LaurentSymbol::parse_monomial("z1*z2^-1", 2).unwrap();
        let r = splitting_rho_prime(&[z.clone(), z], 5).unwrap();
        assert!(r.interior_defect < 1e-15);
    }

    #[test]
    fn rho_prime_inconsistent() {
        let a = LaurentSymbol::parse_monomial("z1", 2).unwrap();
        let b = LaurentSymbol::parse_monomial("z2", 2).unwrap();
        assert!(matches!(splitting_rho_prime(&[a, b], 4), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn unimodular_row() {
        for (a, b) in [(-1, 2), (3, -5), (1, 0), (0, 1), (-1, 0)] {
            let g = unimodular_with_row(a, b).unwrap();
            assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
            assert_eq!(g[1], [a, b]);
        }
    }
}
