//! Translation-invariant tight-binding models and their symmetries.
//!
//! A model stores hopping matrices `h_v` with `<x|H|x+v> = h_v`, so the Bloch
//! Hamiltonian is `H(t) = Σ_v h_v e^{i v·t}`. Hermiticity is `h_{-v} = h_v^*`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classification::{AzClass, AzClassInfo};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, conj, identity, max_abs, max_abs_diff, CMat, C, ONE, ZERO};

#[derive(Clone, Debug)]
pub struct HoppingModel {
    dim: usize,
    orbitals: usize,
    hoppings: BTreeMap<Vec<i64>, CMat>,
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

/// Representative of the pair `{v, -v}`: first nonzero component positive.
fn is_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).map_or(true, |&x| x > 0)
}

impl HoppingModel {
    pub fn new(dim: usize, orbitals: usize) -> Self {
        HoppingModel { dim, orbitals, hoppings: BTreeMap::new() }
    }

    /// Sums the given terms offset by offset and checks Hermiticity.
    pub fn from_terms(dim: usize, orbitals: usize, terms: impl IntoIterator<Item = (Vec<i64>, CMat)>) -> Result<Self> {
        let mut m = Self::new(dim, orbitals);
        for (v, h) in terms {
            m.accumulate(v, h)?;
        }
        m.prune();
        m.validate(1e-10)?;
        Ok(m)
    }

    fn accumulate(&mut self, v: Vec<i64>, h: CMat) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("offset {v:?} in a {}-dimensional model", self.dim)));
        }
        if h.shape() != (self.orbitals, self.orbitals) {
            return Err(Error::Dimension(format!(
                "hopping at {v:?} is {}x{}, expected {n}x{n}",
                h.nrows(),
                h.ncols(),
                n = self.orbitals
            )));
        }
        let slot = self.hoppings.entry(v).or_insert_with(|| CMat::zeros(h.nrows(), h.ncols()));
        *slot += h;
        Ok(())
    }

    fn prune(&mut self) {
        self.hoppings.retain(|_, h| max_abs(h) > 0.0);
    }

    /// Adds `h` at `v` together with its Hermitian partner at `-v`.
    /// At `v = 0` the matrix must be Hermitian and is added once.
    pub fn add_pair(&mut self, v: &[i64], h: &CMat) -> Result<()> {
        if v.iter().all(|&x| x == 0) {
            if max_abs_diff(h, &h.adjoint()) > 1e-12 {
                return Err(Error::Model("on-site term is not Hermitian".into()));
            }
            return self.accumulate(v.to_vec(), h.clone());
        }
        self.accumulate(v.to_vec(), h.clone())?;
        self.accumulate(neg(v), h.adjoint())
    }

    pub fn with_pair(mut self, v: &[i64], h: &CMat) -> Result<Self> {
        self.add_pair(v, h)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    pub fn hoppings(&self) -> impl Iterator<Item = (&Vec<i64>, &CMat)> {
        self.hoppings.iter()
    }

    pub fn hopping(&self, v: &[i64]) -> Option<&CMat> {
        self.hoppings.get(v)
    }

    /// Largest |component| of any offset.
    pub fn range(&self) -> i64 {
        self.hoppings.keys().flat_map(|v| v.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (v, h) in &self.hoppings {
            let partner = self.hoppings.get(&neg(v));
            d = d.max(match partner {
                Some(p) => max_abs_diff(p, &h.adjoint()),
                None => max_abs(h),
            });
        }
        d
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.hermiticity_defect();
        if d > tol {
            return Err(Error::Model(format!("h(-v) != h(v)^* (defect {d:e})")));
        }
        Ok(())
    }

    pub fn bloch(&self, t: &[f64]) -> Result<CMat> {
        if t.len() != self.dim {
            return Err(Error::Dimension(format!("momentum of length {} for a {}-dimensional model", t.len(), self.dim)));
        }
        let mut h = CMat::zeros(self.orbitals, self.orbitals);
        for (v, m) in &self.hoppings {
            let phase: f64 = v.iter().zip(t).map(|(a, b)| *a as f64 * b).sum();
            h += m * C::from_polar(1.0, phase);
        }
        Ok(h)
    }

    /// Same offsets, matrices replaced by `f(h_v)`; `f` must map into
    /// `orbitals x orbitals` and respect adjoints.
    pub fn map_matrices(&self, orbitals: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let hoppings = self.hoppings.iter().map(|(v, h)| (v.clone(), f(h))).collect();
        let mut m = HoppingModel { dim: self.dim, orbitals, hoppings };
        m.prune();
        m
    }

    /// Keeps the listed axes and Fourier-transforms the rest at fixed momenta,
    /// given in increasing axis order.
    pub fn reduce(&self, keep: &[usize], momenta: &[f64]) -> Result<Self> {
        let drop: Vec<usize> = (0..self.dim).filter(|a| !keep.contains(a)).collect();
        if momenta.len() != drop.len() {
            return Err(Error::Dimension(format!("{} transverse momenta for {} reduced axes", momenta.len(), drop.len())));
        }
        if keep.iter().any(|&a| a >= self.dim) {
            return Err(Error::Dimension("kept axis out of range".into()));
        }
        let mut out = Self::new(keep.len(), self.orbitals);
        for (v, h) in &self.hoppings {
            let phase: f64 = drop.iter().zip(momenta).map(|(&a, t)| v[a] as f64 * t).sum();
            let w: Vec<i64> = keep.iter().map(|&a| v[a]).collect();
            out.accumulate(w, h * C::from_polar(1.0, phase))?;
        }
        out.prune();
        Ok(out)
    }

    /// Relabels lattice sites by an integer matrix acting on the first
    /// `g.len()` axes: `h'_{G v} = h_v`.
    pub fn transform_offsets(&self, g: &[Vec<i64>]) -> Result<Self> {
        let r = g.len();
        if r > self.dim || g.iter().any(|row| row.len() != r) {
            return Err(Error::Dimension("lattice map does not fit the model".into()));
        }
        let mut out = Self::new(self.dim, self.orbitals);
        for (v, h) in &self.hoppings {
            let mut w = v.clone();
            for (i, row) in g.iter().enumerate() {
                w[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
            }
            out.accumulate(w, h.clone())?;
        }
        Ok(out)
    }

    /// Multiplies `h_v` by `e^{i v_axis s}`, shifting momenta along `axis` by `s`.
    pub fn momentum_shift(&self, axis: usize, s: f64) -> Self {
        let hoppings = self.hoppings.iter().map(|(v, h)| (v.clone(), h * C::from_polar(1.0, v[axis] as f64 * s))).collect();
        HoppingModel { dim: self.dim, orbitals: self.orbitals, hoppings }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("direct sum of models of different dimension".into()));
        }
        let zero_a = CMat::zeros(self.orbitals, self.orbitals);
        let zero_b = CMat::zeros(other.orbitals, other.orbitals);
        let mut keys: Vec<&Vec<i64>> = self.hoppings.keys().chain(other.hoppings.keys()).collect();
        keys.sort();
        keys.dedup();
        let terms = keys.into_iter().map(|v| {
            let a = self.hoppings.get(v).unwrap_or(&zero_a);
            let b = other.hoppings.get(v).unwrap_or(&zero_b);
            (v.clone(), block_diag(&[a, b]))
        });
        Self::from_terms(self.dim, self.orbitals + other.orbitals, terms.collect::<Vec<_>>())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.orbitals != other.orbitals {
            return Err(Error::Dimension("sum of models with different shapes".into()));
        }
        let mut out = self.clone();
        for (v, h) in &other.hoppings {
            out.accumulate(v.clone(), h.clone())?;
        }
        out.prune();
        Ok(out)
    }

    /// Places the model on axes `first..first+dim` of a `total`-dimensional
    /// lattice, mapping each hopping matrix through `f`.
    pub fn embed(&self, total: usize, first: usize, orbitals: usize, f: impl Fn(&CMat) -> CMat) -> Result<Self> {
        if first + self.dim > total {
            return Err(Error::Dimension("embedding does not fit".into()));
        }
        let mut out = Self::new(total, orbitals);
        for (v, h) in &self.hoppings {
            let mut w = vec![0; total];
            w[first..first + self.dim].copy_from_slice(v);
            out.accumulate(w, f(h))?;
        }
        Ok(out)
    }

    /// Sum over offsets of the Frobenius norms; bounds the operator norm of
    /// every compression.
    pub fn norm_bound(&self) -> f64 {
        self.hoppings.values().map(|h| h.norm()).sum()
    }

    /// Sampled `min |E|` of the Bloch Hamiltonian on an `m^dim` grid that
    /// contains `0` and (for even `m`) `π` in every direction.
    pub fn bulk_gap(&self, m: usize) -> Result<f64> {
        let pts = momentum_grid(self.dim, m);
        let mut gap = f64::INFINITY;
        for t in pts {
            let w = crate::linalg::eigvalsh(&self.bloch(&t)?)?;
            gap = w.iter().fold(gap, |g, x| g.min(x.abs()));
        }
        Ok(gap)
    }
}

/// All points `2π j / m` in `[0, 2π)^dim`.
pub fn momentum_grid(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let m = m.max(1);
    let step = std::f64::consts::TAU / m as f64;
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |j| {
                    let mut q = p.clone();
                    q.push(j as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

/// Antiunitary `x -> U conj(x)`.
#[derive(Clone, Debug)]
pub struct AntiUnitary {
    pub matrix: CMat,
    /// Sign of the square, `U conj(U) = ±1`.
    pub square: i8,
}

impl AntiUnitary {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Symmetry("antiunitary with a non-square matrix".into()));
        }
        if max_abs_diff(&(matrix.adjoint() * &matrix), &identity(n)) > 1e-9 {
            return Err(Error::Symmetry("antiunitary matrix is not unitary".into()));
        }
        let sq = &matrix * conj(&matrix);
        let square = if max_abs_diff(&sq, &identity(n)) < 1e-9 {
            1
        } else if max_abs_diff(&sq, &(-identity(n))) < 1e-9 {
            -1
        } else {
            return Err(Error::Symmetry("U conj(U) is neither +1 nor -1".into()));
        };
        Ok(AntiUnitary { matrix, square })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `U conj(h) U^*`, the action on an operator.
    pub fn conjugate(&self, h: &CMat) -> CMat {
        &self.matrix * conj(h) * self.matrix.adjoint()
    }

    /// Unitary part of the composite `self ∘ other`.
    pub fn compose(&self, other: &AntiUnitary) -> CMat {
        &self.matrix * conj(&other.matrix)
    }

    pub fn kron(&self, other: &AntiUnitary) -> Result<AntiUnitary> {
        AntiUnitary::new(self.matrix.kronecker(&other.matrix))
    }
}

/// Time reversal Θ, particle-hole Ξ and chiral Π acting on the orbital fiber.
#[derive(Clone, Debug, Default)]
pub struct SymmetrySet {
    pub theta: Option<AntiUnitary>,
    pub xi: Option<AntiUnitary>,
    pub pi: Option<CMat>,
}

impl SymmetrySet {
    pub fn new(theta: Option<AntiUnitary>, xi: Option<AntiUnitary>, pi: Option<CMat>) -> Result<Self> {
        let s = SymmetrySet { theta, xi, pi };
        s.check_structure()?;
        Ok(s)
    }

    pub fn none() -> Self {
        SymmetrySet::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.theta
            .as_ref()
            .map(|a| a.dim())
            .or_else(|| self.xi.as_ref().map(|a| a.dim()))
            .or_else(|| self.pi.as_ref().map(|p| p.nrows()))
    }

    fn check_structure(&self) -> Result<()> {
        let dims: Vec<usize> = [
            self.theta.as_ref().map(|a| a.dim()),
            self.xi.as_ref().map(|a| a.dim()),
            self.pi.as_ref().map(|p| p.nrows()),
        ]
        .into_iter()
        .flatten()
        .collect();
        if dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Dimension("symmetry matrices of different sizes".into()));
        }
        if let Some(p) = &self.pi {
            let n = p.nrows();
            if max_abs_diff(p, &p.adjoint()) > 1e-9 || max_abs_diff(&(p * p), &identity(n)) > 1e-9 {
                return Err(Error::Symmetry("chiral operator must be a Hermitian unitary".into()));
            }
        }
        if let (Some(t), Some(x)) = (&self.theta, &self.xi) {
            if max_abs_diff(&t.compose(x), &x.compose(t)) > 1e-9 {
                return Err(Error::Symmetry("time reversal and particle-hole do not commute".into()));
            }
            match &self.pi {
                None => return Err(Error::Symmetry("Θ and Ξ given without the chiral operator Θ·Ξ".into())),
                Some(p) => {
                    let tx = t.compose(x);
                    let ok = max_abs_diff(p, &tx) < 1e-9 || max_abs_diff(p, &(&tx * crate::linalg::I)) < 1e-9;
                    if !ok {
                        return Err(Error::Symmetry("chiral operator is neither Θ·Ξ nor i·Θ·Ξ".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Chiral operator `c·U_Θ conj(U_Ξ)` with `c ∈ {1, i}` chosen so that it
    /// squares to one.
    pub fn chiral_from(theta: &AntiUnitary, xi: &AntiUnitary) -> CMat {
        let tx = theta.compose(xi);
        if theta.square * xi.square == 1 {
            tx
        } else {
            tx * crate::linalg::I
        }
    }

    pub fn with_all(theta: AntiUnitary, xi: AntiUnitary) -> Result<Self> {
        let pi = Self::chiral_from(&theta, &xi);
        Self::new(Some(theta), Some(xi), Some(pi))
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        fn anti(a: &Option<AntiUnitary>, b: &Option<AntiUnitary>) -> Result<Option<AntiUnitary>> {
            match (a, b) {
                (None, None) => Ok(None),
                (Some(a), Some(b)) if a.square == b.square => {
                    Ok(Some(AntiUnitary::new(block_diag(&[&a.matrix, &b.matrix]))?))
                }
                _ => Err(Error::Symmetry("direct sum of models with different symmetry types".into())),
            }
        }
        let pi = match (&self.pi, &other.pi) {
            (None, None) => None,
            (Some(a), Some(b)) => Some(block_diag(&[a, b])),
            _ => return Err(Error::Symmetry("direct sum of chiral and non-chiral models".into())),
        };
        Self::new(anti(&self.theta, &other.theta)?, anti(&self.xi, &other.xi)?, pi)
    }
}

/// Defects of the three relations, `None` where a symmetry is absent.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryCheck {
    pub time_reversal: Option<f64>,
    pub particle_hole: Option<f64>,
    pub chiral: Option<f64>,
    pub tolerance: f64,
}

impl SymmetryCheck {
    pub fn holds(defect: Option<f64>, tol: f64) -> Option<bool> {
        defect.map(|d| d <= tol)
    }

    pub fn time_reversal_ok(&self) -> Option<bool> {
        Self::holds(self.time_reversal, self.tolerance)
    }

    pub fn particle_hole_ok(&self) -> Option<bool> {
        Self::holds(self.particle_hole, self.tolerance)
    }

    pub fn chiral_ok(&self) -> Option<bool> {
        Self::holds(self.chiral, self.tolerance)
    }

    pub fn all_ok(&self) -> bool {
        [self.time_reversal_ok(), self.particle_hole_ok(), self.chiral_ok()].iter().all(|x| x.unwrap_or(true))
    }

    pub fn into_result(self) -> Result<Self> {
        if self.all_ok() {
            Ok(self)
        } else {
            Err(Error::Symmetry(format!(
                "relations fail: TRS {:?}, PHS {:?}, chiral {:?} (tol {:e})",
                self.time_reversal, self.particle_hole, self.chiral, self.tolerance
            )))
        }
    }
}

/// Hopping-wise check of `Θ h_v Θ^{-1} = h_v`, `Ξ h_v Ξ^{-1} = -h_v` and
/// `Π h_v Π = -h_v`. These hold for all real-space compressions at once.
pub fn verify_symmetry_relations(model: &HoppingModel, syms: &SymmetrySet, tol: f64) -> Result<SymmetryCheck> {
    if let Some(n) = syms.dim() {
        if n != model.orbitals() {
            return Err(Error::Dimension(format!("symmetries act on {n} orbitals, model has {}", model.orbitals())));
        }
    }
    let fold = |f: &dyn Fn(&CMat) -> CMat, sign: f64| -> f64 {
        model.hoppings().map(|(_, h)| max_abs_diff(&f(h), &(h * C::new(sign, 0.0)))).fold(0.0, f64::max)
    };
    let trs = syms.theta.as_ref().map(|t| fold(&|h| t.conjugate(h), 1.0));
    let phs = syms.xi.as_ref().map(|x| fold(&|h| x.conjugate(h), -1.0));
    let chi = syms.pi.as_ref().map(|p| fold(&|h| p * h * p, -1.0));
    Ok(SymmetryCheck { time_reversal: trs, particle_hole: phs, chiral: chi, tolerance: tol })
}

pub fn detect_az_class(syms: &SymmetrySet) -> Result<AzClassInfo> {
    let t = syms.theta.as_ref().map_or(0, |a| a.square);
    let x = syms.xi.as_ref().map_or(0, |a| a.square);
    let p = syms.pi.is_some();
    AzClass::from_pattern(t, x, p).map(|c| c.info()).ok_or_else(|| {
        Error::Classification(format!("symmetry pattern (Θ²={t}, Ξ²={x}, Π={p}) is not an AZ class"))
    })
}

/// Random hopping perturbation on the model's offsets that preserves every
/// symmetry in `syms`, scaled so its norm bound equals `strength`.
pub fn symmetric_perturbation(
    model: &HoppingModel,
    syms: &SymmetrySet,
    strength: f64,
    rng: &mut impl Rng,
) -> Result<HoppingModel> {
    let n = model.orbitals();
    let project = |mut x: CMat| {
        if let Some(t) = &syms.theta {
            x = (&x + t.conjugate(&x)) * C::new(0.5, 0.0);
        }
        if let Some(c) = &syms.xi {
            x = (&x - c.conjugate(&x)) * C::new(0.5, 0.0);
        }
        if let Some(p) = &syms.pi {
            x = (&x - p * &x * p) * C::new(0.5, 0.0);
        }
        x
    };
    let mut out = HoppingModel::new(model.dim(), n);
    let reps: Vec<Vec<i64>> = model.hoppings().map(|(v, _)| v.clone()).filter(|v| is_canonical(v)).collect();
    for v in reps {
        let x = CMat::from_fn(n, n, |_, _| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let mut x = project(x);
        if v.iter().all(|&c| c == 0) {
            x = crate::linalg::hermitize(&x);
        }
        out.add_pair(&v, &x)?;
    }
    let nb = out.norm_bound();
    if nb == 0.0 {
        return Ok(out);
    }
    Ok(out.map_matrices(n, |h| h * C::new(strength / nb, 0.0)))
}

/// Matrix entry as written in model files: a real number or `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

type MatrixDoc = Vec<Vec<Entry>>;

fn matrix_to_doc(m: &CMat) -> MatrixDoc {
    let entry = |z: C| if z.im == 0.0 { Entry::Real(z.re) } else { Entry::Complex([z.re, z.im]) };
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| entry(m[(i, j)])).collect()).collect()
}

fn matrix_from_doc(doc: &MatrixDoc, what: &str) -> Result<CMat> {
    let n = doc.len();
    let m = doc.first().map_or(0, |r| r.len());
    if doc.iter().any(|r| r.len() != m) {
        return Err(Error::Model(format!("{what}: ragged matrix")));
    }
    Ok(CMat::from_fn(n, m, |i, j| match doc[i][j] {
        Entry::Real(x) => C::new(x, 0.0),
        Entry::Complex([a, b]) => C::new(a, b),
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct HoppingDoc {
    offset: Vec<i64>,
    matrix: MatrixDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AntiDoc {
    matrix: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    square: Option<i8>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct SymDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<AntiDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<AntiDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pi: Option<MatrixDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dim: usize,
    orbitals: usize,
    hoppings: Vec<HoppingDoc>,
    #[serde(default)]
    symmetries: SymDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

/// A model together with its symmetry data, as stored in JSON files.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: Option<String>,
    pub model: HoppingModel,
    pub symmetries: SymmetrySet,
    pub provenance: Option<serde_json::Value>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, model: HoppingModel, symmetries: SymmetrySet) -> Self {
        ModelSpec { name: Some(name.into()), model, symmetries, provenance: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        let mut model = HoppingModel::new(doc.dim, doc.orbitals);
        let mut seen = std::collections::BTreeSet::new();
        for hd in &doc.hoppings {
            if !seen.insert(hd.offset.clone()) || (hd.offset.iter().any(|&x| x != 0) && seen.contains(&neg(&hd.offset))) {
                return Err(Error::Model(format!("offset {:?} listed twice (give one of each ± pair)", hd.offset)));
            }
            let h = matrix_from_doc(&hd.matrix, "hopping")?;
            model.add_pair(&hd.offset, &h)?;
        }
        model.prune();
        let anti = |a: &Option<AntiDoc>, what: &str| -> Result<Option<AntiUnitary>> {
            match a {
                None => Ok(None),
                Some(a) => {
                    let u = AntiUnitary::new(matrix_from_doc(&a.matrix, what)?)?;
                    if let Some(s) = a.square {
                        if s != u.square {
                            return Err(Error::Symmetry(format!("{what}: declared square {s}, computed {}", u.square)));
                        }
                    }
                    Ok(Some(u))
                }
            }
        };
        let theta = anti(&doc.symmetries.theta, "theta")?;
        let xi = anti(&doc.symmetries.xi, "xi")?;
        let pi = doc.symmetries.pi.as_ref().map(|p| matrix_from_doc(p, "pi")).transpose()?;
        let symmetries = SymmetrySet::new(theta, xi, pi)?;
        if let Some(n) = symmetries.dim() {
            if n != model.orbitals() {
                return Err(Error::Dimension("symmetry matrices do not match the orbital count".into()));
            }
        }
        Ok(ModelSpec { name: doc.name, model, symmetries, provenance: doc.provenance })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let hoppings = self
            .model
            .hoppings()
            .filter(|(v, _)| is_canonical(v))
            .map(|(v, h)| HoppingDoc { offset: v.clone(), matrix: matrix_to_doc(h) })
            .collect();
        let anti = |a: &Option<AntiUnitary>| {
            a.as_ref().map(|a| AntiDoc { matrix: matrix_to_doc(&a.matrix), square: Some(a.square) })
        };
        let doc = ModelDoc {
            name: self.name.clone(),
            dim: self.model.dim(),
            orbitals: self.model.orbitals(),
            hoppings,
            symmetries: SymDoc {
                theta: anti(&self.symmetries.theta),
                xi: anti(&self.symmetries.xi),
                pi: self.symmetries.pi.as_ref().map(matrix_to_doc),
            },
            provenance: self.provenance.clone(),
        };
        crate::json::to_string_pretty(&doc)
    }

    pub fn class(&self) -> Result<AzClassInfo> {
        detect_az_class(&self.symmetries)
    }
}

/// Real matrix helper used by the built-in models.
pub fn real(rows: &[&[f64]]) -> CMat {
    crate::linalg::from_real_rows(rows)
}

pub fn pauli() -> [CMat; 4] {
    let i = crate::linalg::I;
    [
        identity(2),
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ssh() -> (HoppingModel, SymmetrySet) {
        let m = HoppingModel::new(1, 2)
            .with_pair(&[0], &real(&[&[0.0, 0.5], &[0.5, 0.0]]))
            .unwrap()
            .with_pair(&[1], &real(&[&[0.0, 0.0], &[1.0, 0.0]]))
            .unwrap();
        let [_, _, _, z] = pauli();
        let s = SymmetrySet::with_all(AntiUnitary::new(identity(2)).unwrap(), AntiUnitary::new(z).unwrap()).unwrap();
        (m, s)
    }

    #[test]
    fn bloch_hermitian_and_gapped() {
        let (m, _) = ssh();
        let h = m.bloch(&[0.3]).unwrap();
        assert!(max_abs_diff(&h, &h.adjoint()) < 1e-15);
        assert!((m.bulk_gap(64).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ssh_symmetries_and_class() {
        let (m, s) = ssh();
        let chk = verify_symmetry_relations(&m, &s, 1e-12).unwrap();
        assert!(chk.all_ok());
        assert_eq!(detect_az_class(&s).unwrap().class, AzClass::BDI);
    }

    #[test]
    fn identity_is_not_chiral() {
        let (m, _) = ssh();
        let s = SymmetrySet::new(None, None, Some(identity(2))).unwrap();
        let chk = verify_symmetry_relations(&m, &s, 1e-12).unwrap();
        assert_eq!(chk.chiral_ok(), Some(false));
    }

    #[test]
    fn theta_and_xi_without_pi_rejected() {
        let t = AntiUnitary::new(identity(2)).unwrap();
        assert!(SymmetrySet::new(Some(t.clone()), Some(t), None).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let (m, s) = ssh();
        let spec = ModelSpec::new("ssh", m.clone(), s);
        let text = spec.to_json().unwrap();
        let back = ModelSpec::from_json(&text).unwrap();
        for (v, h) in m.hoppings() {
            assert!(max_abs_diff(h, back.model.hopping(v).unwrap()) < 1e-16);
        }
        assert_eq!(back.class().unwrap().class, AzClass::BDI);
    }

    #[test]
    fn perturbation_keeps_symmetry() {
        let (m, s) = ssh();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = symmetric_perturbation(&m, &s, 0.1, &mut rng).unwrap();
        let total = m.add(&p).unwrap();
        assert!(verify_symmetry_relations(&total, &s, 1e-12).unwrap().all_ok());
        assert!((p.norm_bound() - 0.1).abs() < 1e-12);
        total.validate(1e-12).unwrap();
    }

    #[test]
    fn reduce_matches_bloch() {
        let (m, _) = ssh();
        let e = m.embed(2, 0, 2, |h| h.clone()).unwrap();
        let r = e.reduce(&[1], &[0.7]).unwrap();
        assert_eq!(r.dim(), 1);
        let h1 = r.bloch(&[0.2]).unwrap();
        let h2 = e.bloch(&[0.7, 0.2]).unwrap();
        assert!(max_abs_diff(&h1, &h2) < 1e-14);
    }
}
