//! Spectra, gap checks and the symmetry-reduced unitaries of flattened
//! Hamiltonians.

use serde::Serialize;

use crate::classification::AzClass;
use crate::compressions::{build_bulk, TruncatedOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    canonical_j, conj, eigh, eigvalsh, max_abs, max_abs_diff, quaternionic_basis, real_structure_basis, sign_flatten,
    smallest_abs_eigenvalue, CMat, DENSE_LIMIT,
};
use crate::model::{momentum_grid, AntiUnitary, HoppingModel, ModelSpec, SymmetrySet};

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    /// Smallest `|E|`.
    pub gap: f64,
}

/// Full spectrum of a Hermitian window operator (dense).
pub fn window_spectrum(op: &TruncatedOperator) -> Result<Spectrum> {
    let n = op.dim();
    if n > 4 * DENSE_LIMIT {
        return Err(Error::Unsupported(format!("full spectrum of a {n}-dimensional window; use a smaller L")));
    }
    if op.matrix.hermiticity_defect() > 1e-10 {
        return Err(Error::Model("spectrum of a non-Hermitian operator".into()));
    }
    let eigenvalues = eigvalsh(&op.matrix.to_dense())?;
    let gap = eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    Ok(Spectrum { dimension: n, eigenvalues, gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct BandPoint {
    pub momentum: Vec<f64>,
    pub energies: Vec<f64>,
}

pub fn band_structure(model: &HoppingModel, grid: usize) -> Result<Vec<BandPoint>> {
    momentum_grid(model.dim(), grid)
        .into_iter()
        .map(|t| Ok(BandPoint { energies: eigvalsh(&model.bloch(&t)?)?, momentum: t }))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub gap: f64,
    pub floor: f64,
    pub gapped: bool,
}

impl GapReport {
    pub fn into_result(self) -> Result<Self> {
        if self.gapped {
            Ok(self)
        } else {
            Err(Error::Numerical(format!("spectral gap {:.3e} below floor {:.3e}", self.gap, self.floor)))
        }
    }
}

/// Distance from 0 to the spectrum of a Hermitian window.
pub fn gap_check(op: &TruncatedOperator, floor: f64) -> Result<GapReport> {
    let gap = smallest_abs_eigenvalue(&op.matrix)?;
    Ok(GapReport { gap, floor, gapped: gap > floor })
}

/// `sign(H)` of a window; refuses when `0` is within `floor` of the spectrum.
pub fn flatten(op: &TruncatedOperator, floor: f64) -> Result<CMat> {
    sign_flatten(&op.matrix.to_dense(), floor)
}

#[derive(Clone, Debug, Serialize)]
pub struct GappedUnitary {
    pub class: AzClass,
    #[serde(skip)]
    pub u: CMat,
    pub size: usize,
    pub relation: &'static str,
    pub unitarity_defect: f64,
    pub relation_defect: f64,
}

impl GappedUnitary {
    pub fn holds(&self, tol: f64) -> bool {
        self.unitarity_defect < tol && self.relation_defect < tol
    }
}

fn eigenspaces(pi: &CMat) -> Result<(CMat, CMat)> {
    let (w, v) = eigh(pi)?;
    let minus: Vec<usize> = (0..w.len()).filter(|&i| w[i] < 0.0).collect();
    let plus: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let pick = |idx: &[usize]| CMat::from_columns(&idx.iter().map(|&i| v.column(i).into_owned()).collect::<Vec<_>>());
    Ok((pick(&plus), pick(&minus)))
}

/// Basis of the range of `p` in which the restriction of `a` is `K` (real) or
/// `J K` (quaternionic).
fn adapted(p: &CMat, a: &AntiUnitary) -> Result<CMat> {
    let u0 = p.adjoint() * &a.matrix * conj(p);
    let r = if a.square > 0 { real_structure_basis(&u0)? } else { quaternionic_basis(&u0)? };
    Ok(p * r)
}

fn transpose_j(u: &CMat) -> CMat {
    let j = canonical_j(u.nrows());
    &j * u.transpose() * j.transpose()
}

/// Reduces a flattened `Ĥ = sign(H)` to the unitary classifying it and
/// reports how well the class relation holds.
pub fn gapped_unitary(flat: &CMat, syms: &SymmetrySet, class: AzClass) -> Result<GappedUnitary> {
    let need = |s: bool, what: &str| if s { Ok(()) } else { Err(Error::Symmetry(format!("class {class} needs {what}"))) };
    let (u, relation, rel): (CMat, &'static str, Box<dyn Fn(&CMat) -> f64>) = match class {
        AzClass::A => (flat.clone(), "u = u†", Box::new(|u: &CMat| max_abs_diff(u, &u.adjoint()))),
        AzClass::AI | AzClass::D | AzClass::AII | AzClass::C => {
            let a = if matches!(class, AzClass::AI | AzClass::AII) { syms.theta.as_ref() } else { syms.xi.as_ref() };
            need(a.is_some(), "its antiunitary")?;
            let a = a.unwrap();
            let b = if a.square > 0 { real_structure_basis(&a.matrix)? } else { quaternionic_basis(&a.matrix)? };
            let u = b.adjoint() * flat * &b;
            match class {
                AzClass::AI => (u, "u = u†, uᵀ = u", Box::new(|u: &CMat| max_abs_diff(u, &u.adjoint()).max(max_abs_diff(&u.transpose(), u)))),
                AzClass::D => (u, "u = u†, uᵀ = -u", Box::new(|u: &CMat| max_abs_diff(u, &u.adjoint()).max(max_abs_diff(&u.transpose(), &-u)))),
                AzClass::AII => (u, "u = u†, J uᵀ Jᵀ = u†", Box::new(|u: &CMat| max_abs_diff(u, &u.adjoint()).max(max_abs_diff(&transpose_j(u), &u.adjoint())))),
                _ => (u, "u = u†, J uᵀ Jᵀ = -u", Box::new(|u: &CMat| max_abs_diff(u, &u.adjoint()).max(max_abs_diff(&transpose_j(u), &-u)))),
            }
        }
        _ => {
            need(syms.pi.is_some(), "a chiral symmetry")?;
            let (p0, p1) = eigenspaces(syms.pi.as_ref().unwrap())?;
            match class {
                AzClass::AIII => {
                    let u = p0.adjoint() * flat * &p1;
                    (u, "u unitary", Box::new(|_: &CMat| 0.0))
                }
                AzClass::BDI | AzClass::CII => {
                    let t = syms.theta.as_ref().ok_or_else(|| Error::Symmetry(format!("class {class} needs Θ")))?;
                    let u = adapted(&p0, t)?.adjoint() * flat * adapted(&p1, t)?;
                    if class == AzClass::BDI {
                        (u, "uᵀ = u†", Box::new(|u: &CMat| max_abs_diff(&u.transpose(), &u.adjoint())))
                    } else {
                        (u, "J uᵀ Jᵀ = u†", Box::new(|u: &CMat| max_abs_diff(&transpose_j(u), &u.adjoint())))
                    }
                }
                _ => {
                    let t = syms.theta.as_ref().ok_or_else(|| Error::Symmetry(format!("class {class} needs Θ")))?;
                    let mut q1 = &t.matrix * conj(&p0);
                    if class == AzClass::DIII {
                        q1 = q1 * canonical_j(p0.ncols());
                    }
                    let u = p0.adjoint() * flat * q1;
                    if class == AzClass::CI {
                        (u, "uᵀ = u", Box::new(|u: &CMat| max_abs_diff(&u.transpose(), u)))
                    } else {
                        (u, "J uᵀ Jᵀ = u", Box::new(|u: &CMat| max_abs_diff(&transpose_j(u), u)))
                    }
                }
            }
        }
    };
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::Inconsistent(format!("chiral blocks of unequal size {} and {}", n, u.ncols())));
    }
    let unitarity_defect = max_abs(&(u.adjoint() * &u - CMat::identity(n, n)));
    let relation_defect = rel(&u);
    Ok(GappedUnitary { class, u, size: n, relation, unitarity_defect, relation_defect })
}

fn lift_antiunitary(op: &TruncatedOperator, a: &Option<AntiUnitary>) -> Result<Option<AntiUnitary>> {
    a.as_ref().map(|a| AntiUnitary::new(op.lift(&a.matrix).to_dense())).transpose()
}

/// Runs the reduction on a periodic window of the model, with the symmetries
/// lifted site by site.
pub fn window_unitary(spec: &ModelSpec, l: i64) -> Result<GappedUnitary> {
    let class = spec.class()?.class;
    let op = build_bulk(&spec.model, spec.model.dim(), &[], l)?;
    let gap = spec.model.bulk_gap(16)?;
    let flat = flatten(&op, 0.25 * gap)?;
    let syms = SymmetrySet {
        theta: lift_antiunitary(&op, &spec.symmetries.theta)?,
        xi: lift_antiunitary(&op, &spec.symmetries.xi)?,
        pi: spec.symmetries.pi.as_ref().map(|p| op.lift(p).to_dense()),
    };
    gapped_unitary(&flat, &syms, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn reduced_unitaries_satisfy_relations() {
        let specs = [
            models::ssh(0.4, 1.0).unwrap(),
            models::ssh(1.0, 0.4).unwrap(),
            models::kitaev(0.0, 0.5, 0.5).unwrap(),
            models::cii_chain(0.3, 1.0, 0.4).unwrap(),
            models::pwave(-2.0, 1.0, 1.0).unwrap(),
            models::helical_diii(-2.0, 1.0, 1.0).unwrap(),
            models::class_c(-2.0, 1.0, 1.0).unwrap(),
        ];
        for s in &specs {
            let r = window_unitary(s, 3).unwrap();
            assert!(r.holds(1e-10), "{} {:?}", r.class, (r.unitarity_defect, r.relation_defect));
        }
    }

    #[test]
    fn window_gap_matches_bulk() {
        let s = models::kitaev(0.0, 0.5, 0.5).unwrap();
        let op = build_bulk(&s.model, 1, &[], 6).unwrap();
        let w = window_spectrum(&op).unwrap();
        assert!((w.gap - 1.0).abs() < 1e-12);
        assert!(gap_check(&op, 0.5).unwrap().gapped);
    }
}
