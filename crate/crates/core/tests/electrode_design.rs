use std::f64::consts::PI;

use auricle_core::electrode_design::*;
use auricle_core::geometry::primitives::{bumpy_surface, icosphere, plane_grid};
use auricle_core::geometry::*;
use nalgebra::{Point3, Vector3};
use proptest::prelude::*;

fn tilted(theta_deg: f64) -> Vector3<f64> {
    let t = theta_deg.to_radians();
    Vector3::new(t.sin(), 0.0, t.cos())
}

/// Spherical cap cut by a cylinder of radius `r` along a radius of a sphere of radius `big_r`.
fn cap_area(big_r: f64, r: f64) -> f64 {
    2.0 * PI * big_r * (big_r - (big_r * big_r - r * r).sqrt())
}

#[test]
fn plane_area_matches_ellipse() {
    let d = 4.0;
    let mesh = plane_grid(20.0, 20.0, 60, 60);
    for theta in [0.0, 15.0, 30.0, 45.0] {
        let a = sensing_area(&mesh, &Point3::new(0.1, -0.2, 0.0), &tilted(theta), d).unwrap();
        let expected = PI * (d / 2.0).powi(2) / theta.to_radians().cos();
        assert!((a - expected).abs() / expected < 5e-3, "θ = {theta}: {a} vs {expected}");
    }
}

#[test]
fn sphere_cap_matches_closed_form() {
    let mesh = icosphere(10.0, 5);
    let top = mesh.closest_point(&Point3::new(0.0, 0.0, 20.0));
    let a = sensing_area(&mesh, &top.position, &Vector3::z(), 6.0).unwrap();
    assert!((a - cap_area(10.0, 3.0)).abs() / cap_area(10.0, 3.0) < 5e-3);
}

#[test]
fn solver_inverts_area_on_sphere() {
    let mesh = icosphere(10.0, 5);
    let top = mesh.closest_point(&Point3::new(0.0, 0.0, 20.0));
    let target = cap_area(10.0, 2.0);
    let s = solve_diameter(&mesh, &top.position, &Vector3::z(), target, 1e-3).unwrap();
    assert!((s.area - target).abs() / target <= 1e-3);
    // the faceted sphere has slightly less area than the smooth one
    assert!((s.diameter - 4.0).abs() < 0.05, "D = {}", s.diameter);
}

#[test]
fn equal_area_array_on_bumpy_surface() {
    let mesh = bumpy_surface(40.0, 48);
    let aps = place_aps(&mesh, &ApTemplate::default_13()).unwrap();
    let design = design_array(&mesh, &aps, DEFAULT_TARGET_AREA, &TiltPolicy::Normal, &DesignOptions::default()).unwrap();
    assert!(design.is_complete(), "{:?}", design.failed);
    assert_eq!(design.electrodes.len(), 13);
    assert!(design.area_spread() <= 1e-3);
    assert!(design.max_relative_deviation <= 1e-3);
    let fixed = fixed_diameter_areas(&mesh, &aps, 3.0, &TiltPolicy::Normal).unwrap();
    assert!(relative_spread(&fixed) > design.area_spread());
}

#[test]
fn electrode_spec_json_field_names() {
    let mesh = plane_grid(20.0, 20.0, 20, 20);
    let aps = place_aps(&mesh, &ApTemplate::default_10()).unwrap();
    let design = design_array(&mesh, &aps, DEFAULT_TARGET_AREA, &TiltPolicy::Uniform(15.0), &DesignOptions::default()).unwrap();
    let json = serde_json::to_value(&design.electrodes[0]).unwrap();
    for key in ["ap", "center", "axis", "diameter_mm", "tilt_deg", "area_mm2", "mean_curvature_per_mm"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn per_ap_tilt_count_checked() {
    let mesh = plane_grid(20.0, 20.0, 10, 10);
    let aps = place_aps(&mesh, &ApTemplate::default_10()).unwrap();
    let r = design_array(&mesh, &aps, DEFAULT_TARGET_AREA, &TiltPolicy::PerAp(vec![0.0; 3]), &DesignOptions::default());
    assert!(matches!(r, Err(DesignError::TiltCount { expected: 10, got: 3 })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn area_scales_with_square_of_size(s in 0.3..4.0f64, d in 2.0..4.0f64) {
        let mesh = bumpy_surface(30.0, 36);
        let p = mesh.closest_point(&Point3::new(3.0, -2.0, 10.0)).position;
        let n = mesh.closest_point(&p);
        let axis = mesh.interpolated_normal(n.face, n.barycentric);
        let a = sensing_area(&mesh, &p, &axis, d).unwrap();
        let big = mesh.scaled(s).unwrap();
        let b = sensing_area(&big, &Point3::from(p.coords * s), &axis, d * s).unwrap();
        prop_assert!((b / (s * s) - a).abs() / a < 2e-3, "{} vs {}", b / (s * s), a);
    }

    #[test]
    fn area_grows_with_tilt_on_plane(t1 in 0.0..60.0f64, dt in 2.0..20.0f64) {
        let mesh = plane_grid(30.0, 30.0, 40, 40);
        let c = Point3::new(0.3, 0.1, 0.0);
        let a1 = sensing_area(&mesh, &c, &tilted(t1), 3.0).unwrap();
        let a2 = sensing_area(&mesh, &c, &tilted(t1 + dt), 3.0).unwrap();
        prop_assert!(a2 > a1);
    }

    #[test]
    fn area_grows_with_diameter(d in 1.0..5.0f64, dd in 0.05..1.0f64) {
        let mesh = bumpy_surface(30.0, 36);
        let p = mesh.closest_point(&Point3::new(-4.0, 3.0, 10.0));
        let axis = mesh.interpolated_normal(p.face, p.barycentric);
        let a1 = sensing_area(&mesh, &p.position, &axis, d).unwrap();
        let a2 = sensing_area(&mesh, &p.position, &axis, d + dd).unwrap();
        prop_assert!(a2 > a1);
    }

    #[test]
    fn solver_round_trip_on_plane(target in 2.0..40.0f64, theta in 0.0..40.0f64) {
        let mesh = plane_grid(30.0, 30.0, 30, 30);
        let s = solve_diameter(&mesh, &Point3::origin(), &tilted(theta), target, 1e-3).unwrap();
        prop_assert!((s.area - target).abs() / target <= 1e-3);
        let expected_d = 2.0 * (target * theta.to_radians().cos() / PI).sqrt();
        prop_assert!((s.diameter - expected_d).abs() / expected_d < 3e-3);
    }
}
