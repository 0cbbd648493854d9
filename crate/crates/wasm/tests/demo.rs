use sol_geo_wasm::{build_sweep, curve_fan_points, slice_values};

#[test]
fn fan_lies_on_the_isolated_point_surface() {
    let pts = curve_fan_points([0.0, 0.0, 0.0], 12, 2.0, 20).unwrap();
    assert_eq!(pts.len(), 12 * 21 * 3);
    for p in pts.chunks(3) {
        let u = p[2].exp() * p[1] + p[0];
        assert!(u.abs() < 1e-12 * (1.0 + p[0].abs()), "{p:?}");
    }
    assert!(curve_fan_points([0.0; 3], 0, 1.0, 5).is_err());
}

#[test]
fn sweep_mesh_has_one_singular_curve() {
    let m = build_sweep(0.7, [0.1, 0.0, -0.2], [1.0, 1.0], [9, 11], 0.0).unwrap();
    assert_eq!((m.rows(), m.cols()), (9, 11));
    assert_eq!(m.positions().len(), 9 * 11 * 3);
    assert!(m.orthogonality_defect() < 1e-10);
    assert_eq!(m.singular_loci(), 1);
    let vt = m.vt();
    for i in 0..9 {
        // the middle column is t = 0
        assert_eq!(vt[i * 11 + 5], 0.0);
    }
    let skewed = build_sweep(0.7, [0.0; 3], [1.0, 1.0], [9, 11], 1.2).unwrap();
    assert!(skewed.orthogonality_defect() > 0.5);
}

#[test]
fn slice_flags_non_minimal_level_sets() {
    let v = slice_values("x+y+z", 0.3, [-1.0, 1.0], [-1.0, 1.0], 8).unwrap();
    assert_eq!(v.len(), 8 * 8 * 3);
    assert!(v.chunks(3).any(|c| c[2].abs() > 1e-2));
    // x + y + z: |N_h| is the same on every level set
    let nh = v[1];
    assert!(v.chunks(3).all(|c| (c[1] - nh).abs() < 1e-12 * nh));
    let v = slice_values("exp(z)*y + x", 0.3, [-1.0, 1.0], [-1.0, 1.0], 8).unwrap();
    assert!(v.chunks(3).all(|c| c[2].is_nan() || c[2].abs() < 1e-9));
    assert!(slice_values("x +", 0.0, [-1.0, 1.0], [-1.0, 1.0], 4).is_err());
}
