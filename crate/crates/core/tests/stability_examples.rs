use sol_geo::frame::Point;
use sol_geo::stability::*;
use sol_geo::CatalogSurface;

fn bump(c: f64, p: f64, r: f64) -> Bump {
    Bump::new(c, p, r).unwrap()
}

#[test]
fn report_json_has_documented_keys() {
    let patch = catalog_patch(&CatalogSurface::PlaneX { c: 0.0 }, 1.0).unwrap();
    let u = TestFunction { amplitude: 1.0, first: bump(0.0, 0.1, 0.5), second: bump(0.0, 0.1, 0.5) };
    let r = q_form(patch.as_ref(), &u, &QOptions::default()).unwrap();
    let v = serde_json::to_value(r).unwrap();
    for k in ["surface_integral", "boundary_integral_tau", "boundary_integral_S", "total", "error_estimate", "grid"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert_eq!(v["grid"].as_array().unwrap().len(), 2);
}

#[test]
fn plane_without_singular_set_has_no_boundary_terms() {
    let patch = catalog_patch(&CatalogSurface::PlaneAb { a: 1.0, b: 0.0, c: 0.0 }, 1.0).unwrap();
    assert_eq!(patch.singular_set(), SingularSet::Empty);
    let u = TestFunction { amplitude: 2.0, first: bump(0.2, 0.0, 0.6), second: bump(-0.1, 0.2, 0.5) };
    let r = q_form_simplified(SimplifiedKind::PlaneAb, patch.as_ref(), &u, &QOptions::default()).unwrap();
    assert_eq!(r.boundary_integral_tau, 0.0);
    assert_eq!(r.boundary_integral_s, 0.0);
    assert!(r.total > 0.0);
}

#[test]
fn plane_family_general_and_printed_forms_agree() {
    let patch = catalog_patch(&CatalogSurface::PlaneAb { a: 1.0, b: 1.0, c: 0.0 }, 1.0).unwrap();
    for u in battery(patch.as_ref(), 6, 3, None) {
        let g = q_form(patch.as_ref(), &u, &QOptions::default()).unwrap();
        let s = q_form_simplified(SimplifiedKind::PlaneAb, patch.as_ref(), &u, &QOptions::default()).unwrap();
        let c = compare_q(g, s);
        assert!(c.agree, "{c:?}");
        assert_eq!(g.boundary_integral_tau, 0.0);
    }
}

#[test]
fn saddle_curve_forms_differ_only_in_the_surface_term() {
    // general: |N_h|⁻¹Z(u)² + 2|N_h|u², printed: |N_h|⁻¹Z(u)² + 2|N_h|²u²
    let patch = catalog_patch(&CatalogSurface::SaddleCurve { p0: Point::ORIGIN }, 1.0).unwrap();
    let u = TestFunction { amplitude: 1.0, first: bump(0.1, 0.1, 0.6), second: bump(0.0, 0.25, 0.7) };
    let g = q_form(patch.as_ref(), &u, &QOptions::default()).unwrap();
    let s = q_form_simplified(SimplifiedKind::SaddleCurve, patch.as_ref(), &u, &QOptions::default()).unwrap();
    let c = compare_q(g, s);
    assert!(!c.agree);
    assert_eq!(c.mismatches.len(), 1);
    assert_eq!(c.mismatches[0].term, "surface_integral");
    assert!(c.mismatches[0].difference > 0.0);
    // Σ₀ is the unit-speed line x = y = 0 and u = φ(ε) on it: 4∫φ² by the trapezoid rule
    let n = 200_000;
    let h = 1.2 / n as f64;
    let line: f64 = (0..=n)
        .map(|k| {
            let e = -0.5 + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * u.first.eval(e).0.powi(2)
        })
        .sum::<f64>()
        * h
        * 4.0;
    assert!((g.boundary_integral_tau - line).abs() < 1e-8, "{} vs {line}", g.boundary_integral_tau);
    assert!((g.boundary_integral_tau - s.boundary_integral_tau).abs() < 1e-9);
    assert!((g.boundary_integral_tau + g.boundary_integral_tau_opposite).abs() < 1e-15);
}

#[test]
fn saddle_point_battery_is_nonnegative() {
    let patch = catalog_patch(&CatalogSurface::SaddlePoint { p0: Point::ORIGIN }, 1.0).unwrap();
    assert!(matches!(patch.singular_set(), SingularSet::Point { .. }));
    for u in battery(patch.as_ref(), 10, 11, None) {
        let r = q_form(patch.as_ref(), &u, &QOptions::default()).unwrap();
        assert_eq!(r.boundary_integral_tau, 0.0);
        assert!(r.total >= -r.error_estimate, "{r:?}");
    }
}

#[test]
fn tube_width_is_configurable() {
    // default tube: 10% of the smaller parameter range, here 0.2
    let patch = catalog_patch(&CatalogSurface::SaddleCurve { p0: Point::ORIGIN }, 1.0).unwrap();
    let u = TestFunction { amplitude: 1.0, first: bump(0.0, 0.1, 0.6), second: bump(0.0, 0.25, 0.6) };
    assert!(q_form(patch.as_ref(), &u, &QOptions::default()).is_ok());
    let wide = QOptions { tube: Some(0.3), ..Default::default() };
    assert!(matches!(q_form(patch.as_ref(), &u, &wide), Err(StabilityError::Inadmissible(_))));
}

#[test]
fn sufficient_condition_orientation() {
    let w = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]];
    let f = CatalogSurface::PlaneZ { c: 0.0 }.field();
    let r = sufficient_condition(&f, w, 5).unwrap();
    assert!(r.sufficient_condition_met && r.sup_nt.abs() < 1e-15);
    let r = sufficient_condition(&f.negated(), w, 5).unwrap();
    assert!(r.sufficient_condition_met, "⟨N,T⟩ ≡ 0 either way");
    let r = sufficient_condition(&CatalogSurface::PlaneY { c: 0.0 }.field().negated(), w, 5).unwrap();
    assert!(!r.sufficient_condition_met);
}

#[test]
fn jacobi_examples() {
    assert_eq!(jacobi_closed(1.0, [-1.0, 0.0, 0.0], 0.7)[0], -1.0);
    let q = 0.4;
    let v = |s: f64| jacobi_closed(1.0, [-1.0, -q, 0.0], s)[0];
    // a = 0, b = −q, c = −1: −q sinh s − 1 < 0 for s > 0, root for some s < 0
    assert!((v(1.3) - (-q * 1.3f64.sinh() - 1.0)).abs() < 1e-14);
    assert!(v(-3.0) > 0.0);
    let f = CatalogSurface::PlaneZ { c: 0.0 }.field();
    let prof = jacobi_profile(&f, &Point::new(0.2, 0.1, 0.0), [-1.0, 1.0], 4).unwrap();
    assert!(prof.zx_zero && prof.coefficients.is_none());
    for s in &prof.samples {
        assert_eq!(s.closed, -1.0);
    }
}

#[test]
fn area_compare_examples() {
    let b = TestFunction { amplitude: 1.0, first: bump(0.0, 0.0, 0.7), second: bump(0.0, 0.0, 0.7) };
    let w = [[-1.0, 1.0], [-1.0, 1.0]];
    for plane in [PlaneKind::X, PlaneKind::Y, PlaneKind::Z] {
        let zero = area_compare(plane, 0.0, &GraphPerturbation { eta: 0.0, bump: b }, w, 6).unwrap();
        assert_eq!(zero.difference, 0.0);
        let r = area_compare(plane, 0.0, &GraphPerturbation { eta: 0.3, bump: b }, w, 12).unwrap();
        assert!(r.base.value < r.competitor.value);
    }
}
