//! One PASS/FAIL line per acceptance criterion, written straight to stderr so
//! it shows without `--nocapture`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cornerlab::classification::{
    ko_s_alpha_beta, periodic_table_entry, product_invariant_predict, strong_group_lookup, verify_corner_table,
    AbelianGroup, AzClass, CodimCase,
};
use cornerlab::compressions::{
    build_orthant, fredholm_criterion, slope_normalize, splitting_rho_prime, LaurentSymbol, Slope,
};
use cornerlab::invariants::{
    corner_invariant, localized_fredholm_index, localized_kernel_count, spectral_flow, stability_check,
    weak_invariants_diii, z2_spectral_flow, CornerQuery, InvariantValue, MatrixFamily, Region, Thresholds,
};
use cornerlab::linalg::{canonical_j, diag_real, identity, C, I};
use cornerlab::model::{symmetric_perturbation, verify_symmetry_relations, ModelSpec};
use cornerlab::models::{self, DiiiSurrogate, GeneratorInvariant};
use cornerlab::spectra::window_unitary;
use cornerlab::Error;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn e(err: Error) -> String {
    err.to_string()
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    } else {
        Ok(t)
    }
}

fn slope(s: &str) -> Slope {
    s.parse().unwrap()
}

fn ssh() -> ModelSpec {
    models::ssh(0.4, 1.0).unwrap()
}

fn kitaev() -> ModelSpec {
    models::kitaev(0.0, 0.5, 0.5).unwrap()
}

fn cii() -> ModelSpec {
    models::cii_chain(0.3, 1.0, 0.4).unwrap()
}

/// The four product models of the desk-scale check.
fn core_products() -> Vec<(&'static str, ModelSpec, ModelSpec)> {
    vec![("SSHxSSH", ssh(), ssh()), ("KitaevxKitaev", kitaev(), kitaev()), ("SSHxKitaev", ssh(), kitaev()), ("CIIxSSH", cii(), ssh())]
}

fn operator_indices() -> Outcome {
    let start = Instant::now();
    let (half, one) = (slope("1/2"), slope("1"));
    let th = |l| Thresholds::for_window(l, 1.0);
    let hat = localized_fredholm_index(&models::a_hat(&half, &one, true, 20).map_err(e)?, &th(20)).map_err(e)?.value;
    let check = localized_fredholm_index(&models::a_hat(&half, &one, false, 20).map_err(e)?, &th(20)).map_err(e)?.value;
    let g = models::g_operator(3, 8).map_err(e)?;
    let gi = localized_fredholm_index(&g, &th(8)).map_err(e)?.value;
    ensure!(hat == -1 && check == 1 && gi == 1, "indices Â {hat}, Ǎ {check}, G {gi}");
    // δ_(1,0,0) − δ_(0,0,0) spans the corner kernel of G.
    let mut v = vec![C::new(0.0, 0.0); g.dim()];
    v[g.sites.site_index(&[0, 0, 0]).unwrap()] = C::new(-1.0, 0.0);
    v[g.sites.site_index(&[1, 0, 0]).unwrap()] = C::new(1.0, 0.0);
    let residual = g.matrix.matvec(&v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    ensure!(residual < 1e-12, "G kernel residual {residual:e}");
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("Â -1, Ǎ +1, G +1, residual {residual:.0e}, {t:.2?}"))
}

fn flow_examples() -> Outcome {
    let start = Instant::now();
    let scalar = spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s])), -1.0, 1.0, 8).map_err(e)?;
    let pair = spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), -1.0, 1.0, 8).map_err(e)?;
    let qsf = z2_spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), 1.0, 8, &canonical_j(2)).map_err(e)?.value;
    // csf of a skew-adjoint path B is the flow of the self-adjoint path −iB.
    let d = spectral_flow(&MatrixFamily(|s: f64| identity(1) * (I * s) * (-I)), -1.0, 1.0, 8).map_err(e)?;
    let c = spectral_flow(&MatrixFamily(|s: f64| identity(2) * (I * s) * (-I)), -1.0, 1.0, 8).map_err(e)?;
    let got = [scalar, pair, qsf, d, c];
    ensure!(got == [1, 0, 1, 1, 2], "flows {got:?}, want [1, 0, 1, 1, 2]");
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("{got:?} in {t:.2?}"))
}

fn half_line_invariant(spec: &ModelSpec) -> Result<(AzClass, InvariantValue), String> {
    let r = corner_invariant(spec, &CornerQuery::new(1, 24)).map_err(e)?;
    Ok((r.class, r.value))
}

fn products() -> Outcome {
    let start = Instant::now();
    let want = [("SSHxSSH", AzClass::BDI, 1), ("KitaevxKitaev", AzClass::DIII, 1), ("SSHxKitaev", AzClass::D, 1), ("CIIxSSH", AzClass::CII, 2)];
    let mut got = Vec::new();
    for ((name, a, b), (_, class, value)) in core_products().into_iter().zip(want) {
        let p = models::product_hamiltonian(&a, &b).map_err(e)?;
        ensure!(p.class == class, "{name}: class {}, want {class}", p.class);
        let r = corner_invariant(&p.spec, &CornerQuery::new(2, 24)).map_err(e)?;
        ensure!(r.value.value == value, "{name}: corner value {}, want {value}", r.value.value);
        let (ca, va) = half_line_invariant(&a)?;
        let (cb, vb) = half_line_invariant(&b)?;
        let (pc, pv) = product_invariant_predict(ca, &va, cb, &vb, CodimCase::KEqualsN).map_err(e)?;
        ensure!(pc == class && pv.group == r.value.group && pv.value == r.value.value, "{name}: predicted {pc} {}, computed {}", pv.value, r.value.value);
        got.push(format!("{name}={}", r.value.value));
    }
    let kk = models::product_hamiltonian(&kitaev(), &kitaev()).map_err(e)?;
    let gap = fredholm_criterion(&kk.spec.model, 2, 16, 24, 1e-3).map_err(e)?.into_result().map_err(e)?.min_gap();
    let kernel = localized_kernel_count(&build_orthant(&kk.spec.model, 2, &[], 24).map_err(e)?, &Thresholds::for_window(24, gap)).map_err(e)?;
    ensure!(kernel == 2, "Kitaev x Kitaev corner kernel {kernel}, want 2");
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("{}, Kitaev x Kitaev kernel 2, {t:.1?}", got.join(" ")))
}

fn sign_reversal() -> Outcome {
    let (half, one) = (slope("1/2"), slope("1"));
    let th = Thresholds::for_window(20, 1.0);
    let hat = localized_fredholm_index(&models::a_hat(&half, &one, true, 20).map_err(e)?, &th).map_err(e)?.value;
    let check = localized_fredholm_index(&models::a_hat(&half, &one, false, 20).map_err(e)?, &th).map_err(e)?.value;
    ensure!(hat == -check && hat != 0, "Â {hat}, Ǎ {check}");
    let p = models::product_hamiltonian(&ssh(), &ssh()).map_err(e)?;
    let quarter = |convex| -> Result<i64, String> {
        let mut q = CornerQuery::new(2, 24);
        q.region = Region::Quarter { alpha: slope("0/1"), beta: slope("+inf"), convex };
        Ok(corner_invariant(&p.spec, &q).map_err(e)?.value.value)
    };
    let (convex, concave) = (quarter(true)?, quarter(false)?);
    ensure!(convex == -concave && convex != 0, "SSH x SSH convex {convex}, concave {concave}");
    Ok(format!("Â/Ǎ {hat}/{check}, SSH x SSH convex/concave {convex}/{concave}"))
}

/// The corner table as printed, rows in the order A, AIII, AI, BDI, D, DIII,
/// AII, CII, C, CI and columns n − k = 0..7.
const TRANSCRIBED: [(&str, [&str; 8]); 10] = [
    ("A", ["0", "Z", "0", "Z", "0", "Z", "0", "Z"]),
    ("AIII", ["Z", "0", "Z", "0", "Z", "0", "Z", "0"]),
    ("AI", ["0", "0", "0", "2Z", "0", "Z2", "Z2", "Z"]),
    ("BDI", ["Z", "0", "0", "0", "2Z", "0", "Z2", "Z2"]),
    ("D", ["Z2", "Z", "0", "0", "0", "2Z", "0", "Z2"]),
    ("DIII", ["Z2", "Z2", "Z", "0", "0", "0", "2Z", "0"]),
    ("AII", ["0", "Z2", "Z2", "Z", "0", "0", "0", "2Z"]),
    ("CII", ["2Z", "0", "Z2", "Z2", "Z", "0", "0", "0"]),
    ("C", ["0", "2Z", "0", "Z2", "Z2", "Z", "0", "0"]),
    ("CI", ["0", "0", "2Z", "0", "Z2", "Z2", "Z", "0"]),
];

fn table_fidelity() -> Outcome {
    let mut entries = 0;
    for (name, row) in TRANSCRIBED {
        let class: AzClass = name.parse().map_err(e)?;
        for (d, want) in row.iter().enumerate() {
            for k in 1..=3 {
                let got = strong_group_lookup(class, d + k, k).map_err(e)?.to_string();
                ensure!(got == *want, "{class} n-k={d} k={k}: {got}, want {want}");
                let shifted = strong_group_lookup(class, d + k + 8, k).map_err(e)?.to_string();
                ensure!(shifted == got, "{class} n-k={d}: not 8-periodic");
            }
            entries += 1;
        }
        for d in 1..=8 {
            let kitaev_table = periodic_table_entry(class, d).to_string();
            ensure!(kitaev_table == row[d - 1], "{class} codim-one d={d}: {kitaev_table}");
        }
    }
    verify_corner_table().map_err(e)?;
    // (α, β, t)
    let pairs = [("0/1", "+inf", 1), ("0/1", "2/1", 2), ("0/1", "3/1", 3), ("1/2", "3/1", 5), ("-1/1", "3/1", 4)];
    for (a, b, t) in pairs {
        let (a, b) = (slope(a), slope(b));
        let got_t = slope_normalize(&a, &b).map_err(e)?.t;
        ensure!(got_t == t, "t({a}, {b}) = {got_t}, want {t}");
        let ko0 = ko_s_alpha_beta(0, &a, &b).map_err(e)?;
        ensure!(ko0 == AbelianGroup::z().plus_cyclic(t as u64), "KO_0 at t={t}: {ko0}");
        let ko2 = ko_s_alpha_beta(2, &a, &b).map_err(e)?;
        let want = AbelianGroup::z2_power(if t % 2 == 0 { 4 } else { 2 });
        ensure!(ko2 == want, "KO_2 at t={t}: {ko2}, want {want}");
    }
    Ok(format!("{entries} entries, codim-one and Bott checks, KO_0/KO_2 at t = 1, 2, 3, 4, 5"))
}

fn random_slope(rng: &mut ChaCha8Rng) -> Slope {
    Slope::rational(rng.gen_range(-20..=20), rng.gen_range(1..=20)).unwrap()
}

fn slope_normalization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    while done < 100 {
        let (a, b) = (random_slope(&mut rng), random_slope(&mut rng));
        if a.less_than(&b) != Some(true) {
            continue;
        }
        let n = slope_normalize(&a, &b).map_err(e)?;
        let (p, q) = a.pq().unwrap();
        let image = n.apply([q, p]);
        ensure!(n.det() == 1, "det Γ = {} for ({a}, {b})", n.det());
        ensure!(n.t > 0, "t = {} for ({a}, {b})", n.t);
        ensure!(image[0] > 0 && image[1] == 0, "Γ maps the α-direction of ({a}, {b}) to {image:?}");
        done += 1;
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("{done} pairs in {t:.2?}"))
}

fn splitting_identity() -> Outcome {
    for m in ["z1", "z2", "z3", "z1*z2*z3"] {
        let s = LaurentSymbol::parse_monomial(m, 3).map_err(e)?;
        let r = splitting_rho_prime(&[s.clone(), s.clone(), s], 8).map_err(e)?;
        ensure!(r.interior_defect == 0.0, "{m}: interior defect {:e}", r.interior_defect);
    }
    Ok("z1, z2, z3, z1 z2 z3 exact on interior rows".into())
}

fn stability() -> Outcome {
    let mut lines = Vec::new();
    for (name, a, b) in core_products() {
        let p = models::product_hamiltonian(&a, &b).map_err(e)?;
        let q = CornerQuery::new(2, 24);
        let base = corner_invariant(&p.spec, &q).map_err(e)?;
        let s = stability_check(&p.spec, &q, &base, 20, 7).map_err(e)?;
        ensure!(s.doubled_l_agrees && s.perturbation_agrees, "{name}: {s:?}");
        lines.push(name);
    }
    let critical = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/ssh_critical.json");
    let spec = ModelSpec::load(critical).map_err(e)?;
    let err = fredholm_criterion(&spec.model, 1, 16, 24, 1e-3).map_err(e)?.into_result().err();
    ensure!(
        err.as_ref().is_some_and(|x| x.to_string().contains("sgc1") && matches!(x, Error::Assumption { .. })),
        "critical SSH gap check gave {err:?}"
    );
    let code = cornerlab::cli::run(["cornerlab", "gap", "--model", critical]);
    ensure!(code == 1, "cornerlab gap on critical SSH exited {code}");
    Ok(format!("{} stable under 2L and 20 perturbations; critical SSH exits 1 with sgc1", lines.join(", ")))
}

fn boundary_generators() -> Outcome {
    let (half, one) = (slope("1/2"), slope("1"));
    let th = Thresholds::for_window(20, 1.0);
    let mut got = Vec::new();
    for i in [1, 2, 3, 5] {
        let g = models::boundary_generator(i, &half, &one, 20).map_err(e)?;
        let value = match g.invariant {
            GeneratorInvariant::Index | GeneratorInvariant::EvenIndex => localized_fredholm_index(&g.operator, &th).map_err(e)?.value,
            GeneratorInvariant::KernelParity => localized_kernel_count(&g.operator, &th).map_err(e)? as i64 % 2,
            GeneratorInvariant::KramersParity => (localized_kernel_count(&g.operator, &th).map_err(e)? as i64 / 2) % 2,
        };
        ensure!(value % g.unit == 0 && (value / g.unit).abs() == 1, "degree {i}: value {value} in units of {}", g.unit);
        got.push(format!("i={i}:{}", value / g.unit));
    }
    Ok(got.join(" "))
}

fn symmetry_algebra() -> Outcome {
    let helical = models::helical_diii(-2.0, 1.0, 1.0).map_err(e)?;
    let class_c = models::class_c(-2.0, 1.0, 1.0).map_err(e)?;
    let mut pairs: Vec<(&str, ModelSpec, ModelSpec)> = core_products();
    pairs.push(("CIIxCII", cii(), cii()));
    pairs.push(("HelicalxKitaev", helical.clone(), kitaev()));
    pairs.push(("KitaevxC", kitaev(), class_c.clone()));
    pairs.push(("HelicalxC", helical, class_c));
    for (name, a, b) in &pairs {
        let p = models::product_hamiltonian(a, b).map_err(e)?;
        let check = verify_symmetry_relations(&p.spec.model, &p.spec.symmetries, 1e-10).map_err(e)?;
        ensure!(check.all_ok(), "{name}: {check:?}");
        let u = window_unitary(&p.spec, 3).map_err(e)?;
        ensure!(u.holds(1e-10), "{name} ({}): unitarity {:e}, relation {:e}", u.class, u.unitarity_defect, u.relation_defect);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // (w+, w-, qsf) of the unperturbed surrogates.
    let kinds = [
        (DiiiSurrogate::D, (1, 0, 1)),
        (DiiiSurrogate::DPrime, (0, 1, 1)),
        (DiiiSurrogate::DDoublePrime, (1, 1, 0)),
        (DiiiSurrogate::Trivial, (0, 0, 0)),
    ];
    let mut families = 0;
    for round in 0..5 {
        for (kind, want) in kinds {
            let base = models::diii_surrogate(kind).map_err(e)?;
            let dh = symmetric_perturbation(&base.model, &base.symmetries, 0.05, &mut rng).map_err(e)?;
            let spec = ModelSpec { model: base.model.add(&dh).map_err(e)?, ..base };
            // At L = 20 the two walls still hybridize at the 1e-6 level.
            let w = weak_invariants_diii(&spec, 1, 40, 16, 32).map_err(e)?;
            ensure!(w.qsf == (w.w_plus + w.w_minus) % 2, "{kind:?} round {round}: {w:?}");
            ensure!((w.w_plus, w.w_minus, w.qsf) == want, "{kind:?} round {round}: {w:?}, unperturbed {want:?}");
            families += 1;
        }
    }
    Ok(format!("{} products at tol 1e-10, qsf = w+ + w- on {families} families", pairs.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("model-operator indices", operator_indices),
        ("spectral-flow examples", flow_examples),
        ("product construction", products),
        ("convex/concave sign reversal", sign_reversal),
        ("table fidelity", table_fidelity),
        ("slope normalization", slope_normalization),
        ("splitting identity", splitting_identity),
        ("stability", stability),
        ("boundary generators", boundary_generators),
        ("symmetry algebra", symmetry_algebra),
    ];
    let mut failed = Vec::new();
    let mut log = std::io::stderr();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let line = match out {
            Ok(detail) => format!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("criterion {:>2} {name}: FAIL ({why})", i + 1)
            }
        };
        let _ = writeln!(log, "{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
