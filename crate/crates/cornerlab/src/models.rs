//! Built-in lattice models, product constructions and the explicit corner
//! operators used as generators.

use serde::Serialize;
use serde_json::json;

use crate::classification::AzClass;
use crate::compressions::{quarter_sites, RegionKind, SiteIndexMap, Slope, TruncatedOperator};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMat, SparseMatrix, C, I, ONE};
use crate::model::{detect_az_class, pauli, real, verify_symmetry_relations, AntiUnitary, HoppingModel, ModelSpec, SymmetrySet};

fn zmat(re: &[&[f64]]) -> CMat {
    real(re)
}

/// SSH chain: intracell `v`, intercell `w`; topological for `|v| < |w|`.
pub fn ssh(v: f64, w: f64) -> Result<ModelSpec> {
    let m = HoppingModel::new(1, 2)
        .with_pair(&[0], &zmat(&[&[0.0, v], &[v, 0.0]]))?
        .with_pair(&[1], &zmat(&[&[0.0, 0.0], &[w, 0.0]]))?;
    let [_, _, _, z] = pauli();
    let s = SymmetrySet::with_all(AntiUnitary::new(identity(2))?, AntiUnitary::new(z)?)?;
    Ok(ModelSpec::new("ssh", m, s))
}

/// Kitaev chain `H = (-2t cos k - μ) τz + 2Δ sin k τy`, class D.
pub fn kitaev(mu: f64, t: f64, delta: f64) -> Result<ModelSpec> {
    let m = HoppingModel::new(1, 2)
        .with_pair(&[0], &zmat(&[&[-mu, 0.0], &[0.0, mu]]))?
        .with_pair(&[1], &zmat(&[&[-t, -delta], &[delta, t]]))?;
    let [_, x, _, _] = pauli();
    let s = SymmetrySet::new(None, Some(AntiUnitary::new(x)?), None)?;
    Ok(ModelSpec::new("kitaev", m, s))
}

fn pwave_model(mu: f64, t: f64, delta: f64) -> Result<HoppingModel> {
    let [_, x, y, z] = pauli();
    let h0 = &z * C::new(-mu, 0.0);
    let hx = &z * C::new(-t, 0.0) + &x * C::new(0.0, -delta / 2.0);
    let hy = &z * C::new(-t, 0.0) + &y * C::new(0.0, -delta / 2.0);
    HoppingModel::new(2, 2).with_pair(&[0, 0], &h0)?.with_pair(&[1, 0], &hx)?.with_pair(&[0, 1], &hy)
}

/// Spinless chiral p-wave superconductor
/// `ε(k) τz + Δ (sin kx τx + sin ky τy)`, `ε = -2t (cos kx + cos ky) - μ`.
pub fn pwave(mu: f64, t: f64, delta: f64) -> Result<ModelSpec> {
    let [_, x, _, _] = pauli();
    let s = SymmetrySet::new(None, Some(AntiUnitary::new(x)?), None)?;
    Ok(ModelSpec::new("pwave", pwave_model(mu, t, delta)?, s))
}

fn quaternion_j() -> CMat {
    zmat(&[&[0.0, 1.0], &[-1.0, 0.0]])
}

/// Spinful chiral chain in class CII with intercell block `w + c J`.
pub fn cii_chain(v: f64, w: f64, c: f64) -> Result<ModelSpec> {
    let j = quaternion_j();
    let h0 = kron(&zmat(&[&[0.0, v], &[v, 0.0]]), &identity(2));
    let h1 = kron(&zmat(&[&[0.0, 0.0], &[1.0, 0.0]]), &(identity(2) * C::new(w, 0.0) + &j * C::new(c, 0.0)));
    let m = HoppingModel::new(1, 4).with_pair(&[0], &h0)?.with_pair(&[1], &h1)?;
    let [_, _, _, z] = pauli();
    let pi = kron(&z, &identity(2));
    let ut = kron(&identity(2), &j);
    let ux = -(&pi * &ut);
    let s = SymmetrySet::new(Some(AntiUnitary::new(ut)?), Some(AntiUnitary::new(ux)?), Some(pi))?;
    Ok(ModelSpec::new("cii-chain", m, s))
}

/// Time-reversal pair `diag(H₊(k), conj(H₊(-k)))` of p-wave layers, class DIII.
pub fn helical_diii(mu: f64, t: f64, delta: f64) -> Result<ModelSpec> {
    let hp = pwave_model(mu, t, delta)?;
    let mut terms = Vec::new();
    for (v, h) in hp.hoppings() {
        let zero = CMat::zeros(2, 2);
        terms.push((v.clone(), crate::linalg::block_diag(&[h, &zero])));
        terms.push((v.clone(), crate::linalg::block_diag(&[&zero, &crate::linalg::conj(h)])));
    }
    let m = HoppingModel::from_terms(2, 4, terms)?;
    let [_, x, _, _] = pauli();
    let ut = kron(&quaternion_j().transpose(), &identity(2));
    let ux = kron(&identity(2), &x);
    let s = SymmetrySet::with_all(AntiUnitary::new(ut)?, AntiUnitary::new(ux)?)?;
    Ok(ModelSpec::new("helical-diii", m, s))
}

/// Two p-wave copies with the quaternionic particle-hole `(τx ⊗ J) K`, class C.
pub fn class_c(mu: f64, t: f64, delta: f64) -> Result<ModelSpec> {
    let hp = pwave_model(mu, t, delta)?;
    let m = hp.map_matrices(4, |h| kron(h, &identity(2)));
    let [_, x, _, _] = pauli();
    let s = SymmetrySet::new(None, Some(AntiUnitary::new(kron(&x, &quaternion_j()))?), None)?;
    Ok(ModelSpec::new("class-c", m, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductForm {
    /// `H1 ⊗ 1 + Π1 ⊗ H2`.
    Tensor,
    /// `H1 ⊗ Π2 + 1 ⊗ H2`.
    TensorRightChiral,
    /// `[[0, A - iB], [A + iB, 0]]` with `A = H1 ⊗ 1`, `B = 1 ⊗ H2`.
    Star,
    /// `[[0, -iA - B], [iA - B, 0]]`.
    Box,
}

impl ProductForm {
    pub fn name(self) -> &'static str {
        match self {
            ProductForm::Tensor => "tensor",
            ProductForm::TensorRightChiral => "tensor-right-chiral",
            ProductForm::Star => "star",
            ProductForm::Box => "box",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProductModel {
    pub spec: ModelSpec,
    pub form: ProductForm,
    pub class: AzClass,
    /// Other constructions that also carry a valid symmetry set.
    pub alternatives: Vec<(ProductForm, AzClass, String)>,
    pub symmetry_label: String,
}

fn stack(a: &HoppingModel, b: &HoppingModel, fa: impl Fn(&CMat) -> CMat, fb: impl Fn(&CMat) -> CMat, orbitals: usize) -> Result<HoppingModel> {
    let n = a.dim() + b.dim();
    let left = a.embed(n, 0, orbitals, fa)?;
    let right = b.embed(n, a.dim(), orbitals, fb)?;
    let out = left.add(&right)?;
    out.validate(1e-10)?;
    Ok(out)
}

fn classify_candidate(model: &HoppingModel, syms: &SymmetrySet) -> Option<AzClass> {
    let ok = verify_symmetry_relations(model, syms, 1e-10).ok()?.all_ok();
    if !ok {
        return None;
    }
    detect_az_class(syms).ok().map(|i| i.class)
}

fn richness(s: &SymmetrySet) -> usize {
    s.theta.is_some() as usize + s.xi.is_some() as usize + s.pi.is_some() as usize
}

/// Searches tensor-product antiunitaries `A1 ⊗ A2` and keeps the richest
/// valid symmetry sets.
fn tensor_symmetries(model: &HoppingModel, a: &SymmetrySet, b: &SymmetrySet, pi: Option<CMat>) -> Vec<(SymmetrySet, AzClass, String)> {
    let named = |s: &SymmetrySet, tag: &str| -> Vec<(String, AntiUnitary)> {
        let mut v = Vec::new();
        if let Some(t) = &s.theta {
            v.push((format!("Θ{tag}"), t.clone()));
        }
        if let Some(x) = &s.xi {
            v.push((format!("Ξ{tag}"), x.clone()));
        }
        v
    };
    let mut trs = Vec::new();
    let mut phs = Vec::new();
    for (na, ua) in named(a, "1") {
        for (nb, ub) in named(b, "2") {
            let Ok(u) = ua.kron(&ub) else { continue };
            let label = format!("{na}⊗{nb}");
            let plus = SymmetrySet { theta: Some(u.clone()), xi: None, pi: None };
            let minus = SymmetrySet { theta: None, xi: Some(u.clone()), pi: None };
            if verify_symmetry_relations(model, &plus, 1e-10).map(|c| c.all_ok()).unwrap_or(false) {
                trs.push((label.clone(), u.clone()));
            }
            if verify_symmetry_relations(model, &minus, 1e-10).map(|c| c.all_ok()).unwrap_or(false) {
                phs.push((label, u));
            }
        }
    }
    let mut out = Vec::new();
    for t in trs.iter().map(Some).chain([None]) {
        for x in phs.iter().map(Some).chain([None]) {
            let set = match (t, x) {
                (Some((_, t)), Some((_, x))) => SymmetrySet::with_all(t.clone(), x.clone()),
                (Some((_, t)), None) => SymmetrySet::new(Some(t.clone()), None, None),
                (None, Some((_, x))) => SymmetrySet::new(None, Some(x.clone()), None),
                (None, None) => SymmetrySet::new(None, None, pi.clone()),
            };
            let Ok(set) = set else { continue };
            let label = [t.map(|p| format!("Θ={}", p.0)), x.map(|p| format!("Ξ={}", p.0))]
                .into_iter()
                .flatten()
                .collect::<Vec<_>>()
                .join(", ");
            if let Some(class) = classify_candidate(model, &set) {
                out.push((set, class, if label.is_empty() { "Π only".into() } else { label }));
            }
        }
    }
    let best = out.iter().map(|(s, _, _)| richness(s)).max().unwrap_or(0);
    out.retain(|(s, _, _)| richness(s) == best);
    out
}

fn doubled(a: &HoppingModel, b: &HoppingModel, form: ProductForm) -> Result<HoppingModel> {
    let [_, x, y, _] = pauli();
    let (n1, n2) = (a.orbitals(), b.orbitals());
    let orb = 2 * n1 * n2;
    let (ca, cb) = match form {
        ProductForm::Star => ((x.clone(), ONE), (y.clone(), ONE)),
        ProductForm::Box => ((y.clone(), ONE), (x.clone(), -ONE)),
        _ => unreachable!(),
    };
    let (i1, i2) = (identity(n1), identity(n2));
    stack(a, b, |h| kron(&ca.0, &kron(h, &i2)) * ca.1, |h| kron(&cb.0, &kron(&i1, h)) * cb.1, orb)
}

/// Doubled-form time reversal candidates with their labels.
fn doubled_thetas(a: &SymmetrySet, b: &SymmetrySet) -> Vec<(String, CMat)> {
    let [_, x, _, _] = pauli();
    let jm = zmat(&[&[0.0, -1.0], &[1.0, 0.0]]);
    let mut out = Vec::new();
    let pair = |p: &Option<AntiUnitary>, q: &Option<AntiUnitary>| match (p, q) {
        (Some(p), Some(q)) => Some(kron(&p.matrix, &q.matrix)),
        _ => None,
    };
    if let Some(m) = pair(&a.theta, &b.xi) {
        out.push(("club".into(), kron(&identity(2), &m)));
    }
    if let Some(m) = pair(&a.xi, &b.theta) {
        out.push(("triangle".into(), kron(&identity(2), &m)));
    }
    if let Some(m) = pair(&a.xi, &b.xi) {
        out.push(("diamond".into(), kron(&jm, &m)));
    }
    if let Some(m) = pair(&a.theta, &b.theta) {
        out.push(("heart".into(), kron(&x, &m)));
    }
    out
}

fn doubled_symmetries(model: &HoppingModel, a: &SymmetrySet, b: &SymmetrySet) -> Vec<(SymmetrySet, AzClass, String)> {
    let n = model.orbitals();
    let [_, _, _, z] = pauli();
    let pi = kron(&z, &identity(n / 2));
    let mut out = Vec::new();
    for (label, ut) in doubled_thetas(a, b) {
        let Ok(theta) = AntiUnitary::new(ut) else { continue };
        for c in [ONE, I, -ONE, -I] {
            let Ok(xi) = AntiUnitary::new(&pi * &theta.matrix * c) else { continue };
            let Ok(set) = SymmetrySet::new(Some(theta.clone()), Some(xi), Some(pi.clone())) else { continue };
            if let Some(class) = classify_candidate(model, &set) {
                out.push((set, class, format!("Θ {label}")));
                break;
            }
        }
    }
    if out.is_empty() {
        let set = SymmetrySet { theta: None, xi: None, pi: Some(pi) };
        if let Some(class) = classify_candidate(model, &set) {
            out.push((set, class, "Π only".into()));
        }
    }
    out
}

/// Product Hamiltonian of two models on the lattice `Z^{n1 + n2}` with a
/// symmetry set found by search.
pub fn product_hamiltonian(a: &ModelSpec, b: &ModelSpec) -> Result<ProductModel> {
    let (m1, m2) = (&a.model, &b.model);
    let (s1, s2) = (&a.symmetries, &b.symmetries);
    let (n1, n2) = (m1.orbitals(), m2.orbitals());
    let mut found: Vec<(ProductForm, HoppingModel, SymmetrySet, AzClass, String)> = Vec::new();
    if let Some(p1) = &s1.pi {
        let i2 = identity(n2);
        let model = stack(m1, m2, |h| kron(h, &i2), |h| kron(p1, h), n1 * n2)?;
        let pi = s2.pi.as_ref().map(|p2| kron(p1, p2));
        for (set, class, label) in tensor_symmetries(&model, s1, s2, pi) {
            found.push((ProductForm::Tensor, model.clone(), set, class, label));
        }
    } else if let Some(p2) = &s2.pi {
        let i1 = identity(n1);
        let model = stack(m1, m2, |h| kron(h, p2), |h| kron(&i1, h), n1 * n2)?;
        for (set, class, label) in tensor_symmetries(&model, s1, s2, None) {
            found.push((ProductForm::TensorRightChiral, model.clone(), set, class, label));
        }
    } else {
        for form in [ProductForm::Star, ProductForm::Box] {
            let model = doubled(m1, m2, form)?;
            for (set, class, label) in doubled_symmetries(&model, s1, s2) {
                found.push((form, model.clone(), set, class, label));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::Classification("no symmetry set validates on the product".into()));
    }
    let (form, model, set, class, label) = found.remove(0);
    let alternatives: Vec<(ProductForm, AzClass, String)> = found.into_iter().map(|(f, _, _, c, l)| (f, c, l)).collect();
    let c1 = a.class().map(|i| i.class.to_string()).unwrap_or_else(|_| "?".into());
    let c2 = b.class().map(|i| i.class.to_string()).unwrap_or_else(|_| "?".into());
    let provenance = json!({
        "product_of": [a.name.clone().unwrap_or_default(), b.name.clone().unwrap_or_default()],
        "factor_classes": [c1, c2],
        "form": form.name(),
        "class": class.to_string(),
        "symmetries": label,
        "alternatives": alternatives.iter().map(|(f, c, l)| json!({"form": f.name(), "class": c.to_string(), "symmetries": l})).collect::<Vec<_>>(),
    });
    let name = format!("{}x{}", a.name.clone().unwrap_or_else(|| "a".into()), b.name.clone().unwrap_or_else(|| "b".into()));
    let mut spec = ModelSpec::new(name, model, set);
    spec.provenance = Some(provenance);
    Ok(ProductModel { spec, form, class, alternatives, symmetry_label: label })
}

fn check_normalized(alpha: &Slope, beta: &Slope) -> Result<()> {
    let half = Slope::Rational { p: 1, q: 2 };
    let one = Slope::Rational { p: 1, q: 1 };
    let zero = Slope::Rational { p: 0, q: 1 };
    let a_ok = zero.less_than(alpha) == Some(true) && half.less_than(alpha) == Some(false);
    let b_ok = beta.less_than(&one) == Some(false) && *beta != Slope::PlusInfinity;
    if !(a_ok && b_ok) {
        return Err(Error::Input(format!("need 0 < α <= 1/2 and 1 <= β < ∞, got α = {alpha}, β = {beta}")));
    }
    Ok(())
}

/// The operator `Â = P̂_{0,1} + M_{1,1}(1 - P̂_{-1,0}) + M_{1,0}(P̂_{-1,0} - P̂_{0,1})`
/// compressed to the convex wedge (or `Ǎ` on the concave region), with
/// `M_v δ_x = δ_{x+v}` and `P̂_v` the projection onto `{x : x - v ∈ R}`.
pub fn a_hat(alpha: &Slope, beta: &Slope, convex: bool, l: i64) -> Result<TruncatedOperator> {
    check_normalized(alpha, beta)?;
    let sites = quarter_sites(alpha, beta, convex, l)?;
    let map = SiteIndexMap::new(sites, 1);
    let inside = |x: &[i64]| map.site_index(x).is_some();
    let mut t = Vec::new();
    for (xi, x) in map.sites().iter().enumerate() {
        let below = inside(&[x[0], x[1] - 1]);
        let right = inside(&[x[0] + 1, x[1]]);
        let mut push = |y: [i64; 2], v: f64| {
            if v != 0.0 {
                if let Some(yi) = map.site_index(&y) {
                    t.push((yi, xi, C::new(v, 0.0)));
                }
            }
        };
        push([x[0], x[1]], below as i32 as f64);
        push([x[0] + 1, x[1] + 1], (!right) as i32 as f64);
        push([x[0] + 1, x[1]], right as i32 as f64 - below as i32 as f64);
    }
    let n = map.len();
    Ok(TruncatedOperator {
        matrix: SparseMatrix::from_triplets(n, n, t),
        sites: map,
        kind: RegionKind::Quarter { convex },
        window: l,
        corner: vec![0, 0],
    })
}

/// `G = T_z^* ⊗ q^{⊗(k-1)} + 1 - p ⊗ q^{⊗(k-1)}` on `[0, L]^k`, where `p`
/// projects onto `x ≥ 1` and `q` onto `x = 0`.
pub fn g_operator(k: usize, l: i64) -> Result<TruncatedOperator> {
    if k < 3 {
        return Err(Error::Input("G needs k >= 3".into()));
    }
    let mut sites = vec![Vec::new()];
    for _ in 0..k {
        sites = sites.into_iter().flat_map(|p: Vec<i64>| (0..=l).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    let map = SiteIndexMap::new(sites, 1);
    let mut t = Vec::new();
    for (xi, x) in map.sites().iter().enumerate() {
        if x[1..].iter().all(|&c| c == 0) && x[0] >= 1 {
            let mut y = x.clone();
            y[0] -= 1;
            t.push((map.site_index(&y).unwrap(), xi, ONE));
        } else {
            t.push((xi, xi, ONE));
        }
    }
    let n = map.len();
    Ok(TruncatedOperator {
        matrix: SparseMatrix::from_triplets(n, n, t),
        sites: map,
        kind: RegionKind::Orthant { k },
        window: l,
        corner: vec![0; k],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorInvariant {
    /// Fredholm index of a non-Hermitian corner operator.
    Index,
    /// Kernel dimension mod 2 of a Hermitian operator.
    KernelParity,
    /// Half the kernel dimension mod 2.
    KramersParity,
    /// Fredholm index, always even.
    EvenIndex,
}

#[derive(Clone, Debug)]
pub struct BoundaryGenerator {
    pub degree: i32,
    pub operator: TruncatedOperator,
    pub invariant: GeneratorInvariant,
    /// Value on the generator in group units.
    pub unit: i64,
}

/// Corner operator representing the generator of the boundary group in
/// degree `i ∈ {1, 2, 3, 5}`, built from `Â` on a normalized wedge.
pub fn boundary_generator(i: i32, alpha: &Slope, beta: &Slope, l: i64) -> Result<BoundaryGenerator> {
    let a = a_hat(alpha, beta, true, l)?;
    let am = a.matrix.clone();
    let (operator, invariant, unit) = match i {
        1 => (a, GeneratorInvariant::Index, 1),
        2 => (
            a.interleave(&[vec![None, Some(am.scale(I))], vec![Some(am.adjoint().scale(-I)), None]])?,
            GeneratorInvariant::KernelParity,
            1,
        ),
        3 => {
            let b = a.interleave(&[vec![Some(am.clone()), None], vec![None, Some(am.adjoint())]])?;
            (b.dilation()?.0, GeneratorInvariant::KramersParity, 1)
        }
        5 => (a.interleave(&[vec![Some(am.clone()), None], vec![None, Some(am)]])?, GeneratorInvariant::EvenIndex, 2),
        _ => return Err(Error::Unsupported(format!("boundary generator in degree {i}; supported: 1, 2, 3, 5"))),
    };
    Ok(BoundaryGenerator { degree: i, operator, invariant, unit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiiiSurrogate {
    /// Helical edge crossing at transverse momentum 0.
    D,
    /// Crossing moved to π.
    DPrime,
    /// Direct sum of the two.
    DDoublePrime,
    Trivial,
}

/// Two-dimensional DIII models whose edge families realize the three
/// building blocks of the weak-invariant relation.
pub fn diii_surrogate(kind: DiiiSurrogate) -> Result<ModelSpec> {
    let d = helical_diii(-2.0, 1.0, 1.0)?;
    let shifted = |s: &ModelSpec| ModelSpec::new("helical-diii-shifted", s.model.momentum_shift(1, std::f64::consts::PI), s.symmetries.clone());
    Ok(match kind {
        DiiiSurrogate::D => d,
        DiiiSurrogate::DPrime => shifted(&d),
        DiiiSurrogate::DDoublePrime => {
            let p = shifted(&d);
            ModelSpec::new("helical-diii-pair", d.model.direct_sum(&p.model)?, d.symmetries.direct_sum(&p.symmetries)?)
        }
        DiiiSurrogate::Trivial => helical_diii(-6.0, 1.0, 1.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_of(s: &ModelSpec) -> AzClass {
        verify_symmetry_relations(&s.model, &s.symmetries, 1e-12).unwrap().into_result().unwrap();
        s.class().unwrap().class
    }

    #[test]
    fn builtin_classes() {
        assert_eq!(class_of(&ssh(0.5, 1.0).unwrap()), AzClass::BDI);
        assert_eq!(class_of(&kitaev(0.0, 0.5, 0.5).unwrap()), AzClass::D);
        assert_eq!(class_of(&pwave(-2.0, 1.0, 1.0).unwrap()), AzClass::D);
        assert_eq!(class_of(&cii_chain(0.3, 1.0, 0.4).unwrap()), AzClass::CII);
        assert_eq!(class_of(&helical_diii(-2.0, 1.0, 1.0).unwrap()), AzClass::DIII);
        assert_eq!(class_of(&class_c(-2.0, 1.0, 1.0).unwrap()), AzClass::C);
        for k in [DiiiSurrogate::D, DiiiSurrogate::DPrime, DiiiSurrogate::DDoublePrime, DiiiSurrogate::Trivial] {
            assert_eq!(class_of(&diii_surrogate(k).unwrap()), AzClass::DIII);
        }
    }

    #[test]
    fn kitaev_sweet_spot_is_flat() {
        let k = kitaev(0.0, 0.5, 0.5).unwrap();
        for t in [0.0, 0.4, 1.3, 2.9] {
            let w = crate::linalg::eigvalsh(&k.model.bloch(&[t]).unwrap()).unwrap();
            assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn product_classes() {
        let s = ssh(0.5, 1.0).unwrap();
        let k = kitaev(0.0, 0.5, 0.5).unwrap();
        let c = cii_chain(0.3, 1.0, 0.4).unwrap();
        assert_eq!(product_hamiltonian(&s, &s).unwrap().class, AzClass::BDI);
        assert_eq!(product_hamiltonian(&s, &k).unwrap().class, AzClass::D);
        assert_eq!(product_hamiltonian(&c, &s).unwrap().class, AzClass::CII);
        assert_eq!(product_hamiltonian(&c, &c).unwrap().class, AzClass::BDI);
        let kk = product_hamiltonian(&k, &k).unwrap();
        assert_eq!(kk.class, AzClass::DIII);
        assert!(kk.alternatives.iter().any(|(f, c, _)| *f == ProductForm::Box && *c == AzClass::DIII));
    }

    #[test]
    fn product_squares_to_sum() {
        let s = ssh(0.5, 1.0).unwrap();
        let p = product_hamiltonian(&s, &s).unwrap();
        let t = [0.3, 1.1];
        let h = p.spec.model.bloch(&t).unwrap();
        let h1 = s.model.bloch(&t[..1]).unwrap();
        let h2 = s.model.bloch(&t[1..]).unwrap();
        let want = kron(&(&h1 * &h1), &identity(2)) + kron(&identity(2), &(&h2 * &h2));
        assert!(crate::linalg::max_abs_diff(&(&h * &h), &want) < 1e-12);
    }

    #[test]
    fn a_hat_rejects_unnormalized() {
        assert!(a_hat(&Slope::Rational { p: 0, q: 1 }, &Slope::Rational { p: 1, q: 1 }, true, 6).is_err());
    }

    #[test]
    fn g_has_corner_kernel() {
        let g = g_operator(3, 4).unwrap().matrix.to_dense();
        let n = g.nrows();
        let mut v = crate::linalg::CMat::zeros(n, 1);
        // Sites are ordered with axis 0 slowest: (1,0,0) sits at index 25.
        v[(0, 0)] = -ONE;
        v[(25, 0)] = ONE;
        assert!((&g * &v).norm() < 1e-15);
    }
}
