//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use weilforge_core::estimates::measure_norms;
use weilforge_core::kahler::Series;
use weilforge_core::weil::{enumerate_piece, h_spectrum, parity_vanishing, verify_acyclicity, z, zb};
use weilforge_core::{
    brute_force_polarization, brute_force_solve, builtin_example, check_generating_bounds, d2_identity_residual,
    estimate, flatness_residual, hodge_connection_series, holomorphy_residual, kahler_form, levi_civita,
    linearity_residual, reduced_square, solve, solve_polarization, verify_kahlerian, ChristoffelJet,
    ConnectionSolution, Qc,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn solved(name: &str, dim: u8, order: u32) -> (weilforge_core::MetricJet<Qc>, ConnectionSolution<Qc>) {
    let g = builtin_example::<Qc>(name, dim, order).expect("builtin");
    let gamma = levi_civita(&g, 0.0).expect("levi-civita");
    let sol = solve(&gamma, order, 0.0).expect("solve");
    (g, sol)
}

fn flat_baseline() -> Outcome {
    for dim in [1, 2] {
        let (g, sol) = solved("flat", dim, 6);
        for k in 2..sol.levels.len() {
            ensure(sol.level(k).is_zero(), || format!("dim {dim}: D{k} ≠ 0"))?;
        }
        let pol = solve_polarization(&sol, &kahler_form(&g), 6, 0.0).map_err(|e| e.to_string())?;
        for (k, om) in pol.levels.iter().enumerate().skip(1) {
            ensure(om.is_zero(), || format!("dim {dim}: Ω{k} ≠ 0"))?;
        }
    }
    Ok("dim 1, 2 at N = 6: D_k = 0 (k ≥ 2), Ω_k = 0 (k ≥ 1)".into())
}

fn certificates() -> Outcome {
    for name in ["fubini-study", "poincare"] {
        let (g, sol) = solved(name, 1, 5);
        ensure(flatness_residual(&sol).unwrap().exact_zero, || format!("{name}: flatness residual"))?;
        ensure(linearity_residual(&sol).unwrap() == 0.0, || format!("{name}: linearity residual"))?;
        let pol = solve_polarization(&sol, &kahler_form(&g), 5, 0.0).map_err(|e| e.to_string())?;
        ensure(holomorphy_residual(&pol).unwrap().exact_zero, || format!("{name}: holomorphy residual"))?;
    }
    Ok("FS and Poincaré, dim 1, N = 5: all residuals exactly zero".into())
}

fn oracle() -> Outcome {
    for name in ["flat", "fubini-study", "poincare"] {
        let (g, sol) = solved(name, 1, 3);
        // brute force errors unless its solution space is a single point
        let brute = brute_force_solve(&sol.gamma, 3, 0.0).map_err(|e| format!("{name}: {e}"))?;
        for k in 0..=3 {
            ensure(sol.level(k) == brute.level(k), || format!("{name}: D{k} differs from oracle"))?;
        }
        let om = kahler_form(&g);
        let pol = solve_polarization(&sol, &om, 3, 0.0).map_err(|e| e.to_string())?;
        let bp = brute_force_polarization(&sol, &om, 3, 0.0).map_err(|e| format!("{name}: {e}"))?;
        ensure(pol.levels == bp, || format!("{name}: Ω differs from oracle"))?;
    }
    Ok("flat, FS, Poincaré at dim 1, N = 3 agree coefficientwise; oracle nullity 0".into())
}

fn d2_formula() -> Outcome {
    let mut cases = 0;
    for dim in [1, 2] {
        for name in weilforge_core::BUILTIN_NAMES {
            if name == "product" && dim < 2 {
                continue;
            }
            let (_, sol) = solved(name, dim, 4);
            let r = d2_identity_residual(&sol).unwrap();
            ensure(r == 0.0, || format!("{name} dim {dim}: residual {r:e}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} Kählerian inputs at N = 4: D₂ = ⅓σR exactly"))
}

fn h_spectrum_check() -> Outcome {
    let mut pieces = 0;
    for dim in [1, 2] {
        for k in 1..=6 {
            for n in [1, -1] {
                let e = h_spectrum::<Qc>(dim, k, n, 0.0).unwrap();
                ensure(e.pass, || format!("dim {dim} k {k} n {n}: multiplicities {:?}", e.multiplicities))?;
                pieces += 1;
            }
        }
    }
    Ok(format!("{pieces} pieces, exact spectra {{k}} / {{m, m−1}}"))
}

fn acyclicity() -> Outcome {
    for p in 1..=3 {
        for q in 1..=3 {
            let r = verify_acyclicity::<Qc>(1, p, q, 4, 0.0).unwrap();
            ensure(r.exact, || format!("(p, q) = ({p}, {q}) not exact"))?;
        }
    }
    Ok("1 ≤ p, q ≤ 3, total degree ≤ 4, dim 1".into())
}

fn potential_jet(dim: u8, extra: &[(u8, u8, u8, Series<Qc>)], mixed: &[(u8, u8, u8, Series<Qc>)], base: Option<&str>) -> ChristoffelJet<Qc> {
    let mut gamma = match base {
        Some(name) => levi_civita(&builtin_example::<Qc>(name, dim, 3).unwrap(), 0.0).unwrap(),
        None => ChristoffelJet::zero(dim, 3),
    };
    for (k, i, j, x) in extra {
        let cell = &mut gamma.hol[*k as usize][*i as usize][*j as usize];
        *cell = cell.add(x);
    }
    for (k, i, j, x) in mixed {
        let cell = &mut gamma.mixed[*k as usize][*i as usize][*j as usize];
        *cell = cell.add(x);
    }
    gamma
}

fn detector_corpus() -> Vec<(String, ChristoffelJet<Qc>)> {
    let one = Series::<Qc>::one;
    let gz = |i| Series::<Qc>::gen(z(i));
    let gzb = |i| Series::<Qc>::gen(zb(i));
    let mut out: Vec<(String, ChristoffelJet<Qc>)> = Vec::new();
    for (name, dim) in [
        ("flat", 1),
        ("flat", 2),
        ("fubini-study", 1),
        ("fubini-study", 2),
        ("poincare", 1),
        ("poincare", 2),
        ("product", 2),
    ] {
        out.push((format!("{name} dim {dim}"), potential_jet(dim, &[], &[], Some(name))));
    }
    // symmetric holomorphic perturbations of a flat connection stay Kählerian
    out.push(("flat + Γ¹₁₁ = z".into(), potential_jet(1, &[(0, 0, 0, gz(1))], &[], None)));
    out.push(("flat + Γ¹₁₁ = z̄".into(), potential_jet(1, &[(0, 0, 0, gzb(1))], &[], None)));
    out.push(("flat + Γ¹₁₁ = z̄₂".into(), potential_jet(2, &[(0, 0, 0, gzb(2))], &[], None)));
    // injected torsion
    out.push(("torsion Γ¹₁₂ = 1".into(), potential_jet(2, &[(0, 0, 1, one())], &[], None)));
    out.push(("torsion Γ²₁₂ = z₁".into(), potential_jet(2, &[(1, 0, 1, gz(1))], &[], None)));
    out.push(("FS + torsion Γ¹₂₁ = z̄₂".into(), potential_jet(2, &[(0, 1, 0, gzb(2))], &[], Some("fubini-study"))));
    out.push(("Poincaré + torsion Γ²₁₂ = 1".into(), potential_jet(2, &[(1, 0, 1, one())], &[], Some("poincare"))));
    // injected R^{2,0}; a constant symmetric Γ fails through Γ∧Γ
    out.push((
        "R²⁰ Γ¹₁₂ = Γ¹₂₁ = 1".into(),
        potential_jet(2, &[(0, 0, 1, one()), (0, 1, 0, one())], &[], None),
    ));
    out.push(("R²⁰ Γ¹₁₁ = z₂".into(), potential_jet(2, &[(0, 0, 0, gz(2))], &[], None)));
    out.push(("FS + R²⁰ Γ²₂₂ = z₁".into(), potential_jet(2, &[(1, 1, 1, gz(1))], &[], Some("fubini-study"))));
    // mixed (non-holomorphic) components
    out.push(("mixed Γ¹₁₁̄ = z̄".into(), potential_jet(1, &[], &[(0, 0, 0, gzb(1))], None)));
    out.push(("FS + mixed Γ¹₁₁̄ = 1".into(), potential_jet(1, &[], &[(0, 0, 0, one())], Some("fubini-study"))));
    out.push(("flat + mixed Γ²₁₂̄ = z₁".into(), potential_jet(2, &[], &[(1, 0, 1, gz(1))], None)));
    out
}

fn detector_equivalence() -> Outcome {
    let corpus = detector_corpus();
    let (mut kahlerian, mut rejected) = (0, 0);
    for (label, gamma) in &corpus {
        let reduced = reduced_square(gamma).unwrap().exact_zero;
        let verified = verify_kahlerian(gamma, 0.0).unwrap().pass;
        ensure(reduced == verified, || format!("{label}: reduced square zero = {reduced}, detector = {verified}"))?;
        if verified { kahlerian += 1 } else { rejected += 1 }
    }
    ensure(corpus.len() == 20, || format!("corpus has {} cases", corpus.len()))?;
    Ok(format!("{} cases ({kahlerian} Kählerian, {rejected} rejected) agree", corpus.len()))
}

fn combinatorics() -> Outcome {
    let r = check_generating_bounds(12, 12, 12);
    ensure(r.catalan_ok, || "Catalan recurrence".into())?;
    ensure(r.pass, || format!("{r:?}"))?;
    Ok("b, c, bᵐ for k, n, m ≤ 12: majorant and combinatorial bounds termwise".into())
}

fn norm_bounds() -> Outcome {
    let (g, sol) = solved("fubini-study", 1, 5);
    let pol = solve_polarization(&sol, &kahler_form(&g), 5, 0.0).map_err(|e| e.to_string())?;
    let series = hodge_connection_series(&sol).unwrap();
    let rep = estimate(&sol, &series, Some(&pol), 0.0).map_err(|e| e.to_string())?;
    ensure(rep.bounds.violations.is_empty(), || format!("{} violations, first {:?}", rep.bounds.violations.len(), rep.bounds.violations.first()))?;
    ensure(rep.estimated_radius > 0.0, || "radius not positive".into())?;
    ensure(rep.estimated_radius >= rep.theoretical_radius, || {
        format!("radius {} below theoretical {}", rep.estimated_radius, rep.theoretical_radius)
    })?;
    ensure(rep.pass, || "estimate report did not pass".into())?;
    Ok(format!(
        "{} bounds hold; C₀ = {:.4}, K = {:.4}, K₁ = {:.4}; radius {:.4} ≥ {:.6}",
        rep.bounds.checked, rep.constants.c0, rep.constants.k, rep.constants.k1, rep.estimated_radius, rep.theoretical_radius
    ))
}

fn parity_and_norms() -> Outcome {
    let mut pieces = 0;
    for dim in [1, 2] {
        let r = parity_vanishing(dim, 6).unwrap();
        ensure(r.violations.is_empty(), || format!("dim {dim}: {:?}", r.violations.first()))?;
        pieces += r.checked_pieces;
        ensure(!enumerate_piece(dim, 1, 6, None).is_empty(), || "empty enumeration".into())?;
    }
    let mut worst: f64 = 0.0;
    for (name, dim, order) in [("fubini-study", 1, 6), ("poincare", 1, 6), ("fubini-study", 2, 3), ("product", 2, 3)] {
        let (_, sol) = solved(name, dim, order);
        let t = measure_norms(&sol, None, 0.0).unwrap();
        ensure(t.total_ne_total_ok, || format!("{name} dim {dim}: defect {:e}", t.total_ne_total_defect))?;
        worst = worst.max(t.total_ne_total_defect);
    }
    Ok(format!("{pieces} parity pieces vanish; totalized and plain norms agree (max gap {worst:.1e})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("flat baseline", flat_baseline, Duration::from_secs(1)),
        ("flatness/linearity certificates", certificates, Duration::from_secs(30)),
        ("oracle equivalence", oracle, Duration::from_secs(60)),
        ("D2 formula", d2_formula, Duration::MAX),
        ("h spectrum", h_spectrum_check, Duration::MAX),
        ("acyclicity", acyclicity, Duration::MAX),
        ("Kählerian detector equivalence", detector_equivalence, Duration::MAX),
        ("combinatorics", combinatorics, Duration::from_secs(1)),
        ("norm bounds", norm_bounds, Duration::from_secs(60)),
        ("parity vanishing and norm equalities", parity_and_norms, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > *budget => Err(format!("took {elapsed:.2?}, budget {budget:.0?}")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {:>2} {tag} [{elapsed:>9.2?}] {name}: {detail}", i + 1);
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
