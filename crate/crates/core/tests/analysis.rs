mod common;

use auricle_core::analysis::*;
use auricle_core::geometry::primitives::{icosphere, plane_grid};
use auricle_core::geometry::AuricularPointSet;
use nalgebra::{DMatrix, Point3, Vector2};
use proptest::prelude::*;

/// Single-pass textbook Pearson formula, kept separate from the library's centred sums.
fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn points_strategy() -> impl Strategy<Value = (DMatrix<f64>, Vec<usize>)> {
    (3usize..200, 1usize..6, 2usize..6).prop_flat_map(|(m, d, k)| {
        (
            proptest::collection::vec(-10.0..10.0f64, m * d),
            proptest::collection::vec(0..k, m),
            Just((m, d)),
        )
            .prop_map(|(vals, asg, (m, d))| (DMatrix::from_row_slice(m, d, &vals), asg))
    })
}

/// Relabel to 0..k in order of first appearance.
fn compact(asg: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = Vec::new();
    let out = asg
        .iter()
        .map(|a| match seen.iter().position(|s| s == a) {
            Some(i) => i,
            None => {
                seen.push(*a);
                seen.len() - 1
            }
        })
        .collect();
    (out, seen.len())
}

#[test]
fn elbow_examples() {
    assert_eq!(select_k_elbow(&[100.0, 20.0, 18.0, 17.0, 16.0]).unwrap().k, 2);
    assert_eq!(select_k_elbow(&[50.0, 40.0, 30.0, 20.0, 10.0]).unwrap().k, 2);
    let e = select_k_elbow(&[100.0, 20.0, 25.0, 17.0, 16.0]).unwrap();
    assert!(e.warning.is_some());
    assert!(select_k_elbow(&[1.0, 0.5]).is_err());
}

#[test]
fn pca_explains_rank_two_data() {
    let m = 30;
    let data = DMatrix::from_fn(m, 6, |i, j| {
        let (a, b) = ((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        1.0 + a * (j as f64 + 1.0) + b * (j as f64 - 2.5).powi(2)
    });
    let r = pca(&data, 3, false).unwrap();
    assert!((r.explained_variance_ratio[0] + r.explained_variance_ratio[1] - 1.0).abs() < 1e-10);
    assert!(r.explained_variance_ratio[2] < 1e-12);
}

#[test]
fn csv_round_trip_is_exact() {
    let values = DMatrix::from_fn(5, 4, |i, j| 1.0 / (1.0 + i as f64 + 3.0 * j as f64) + 1e-17 * j as f64);
    let labels: Vec<String> = (0..5).map(|i| format!("S{i:02}-L")).collect();
    let m = AESRMatrix::new(labels, values).unwrap();
    let mut buf = Vec::new();
    m.write_csv(&["seed 3".to_string()], &mut buf).unwrap();
    let back = AESRMatrix::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn csv_errors_name_the_row() {
    let text = "label,AP1,AP2\na,1.0,2.0\nb,1.0,-3.0\n";
    match AESRMatrix::read_csv(text.as_bytes()) {
        Err(AnalysisError::Csv { row, .. }) => assert_eq!(row, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn permutation_p_values_are_seed_deterministic() {
    let x: Vec<f64> = (0..51).map(|i| (i as f64 * 1.3).sin()).collect();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + 0.8 * (i as f64 * 2.1).cos()).collect();
    let a = correlation(&x, &y, DEFAULT_PERMUTATIONS, 42).unwrap();
    let b = correlation(&x, &y, DEFAULT_PERMUTATIONS, 42).unwrap();
    assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
    assert!(a.p_value < 0.05);
    let c = correlation(&x, &y, DEFAULT_PERMUTATIONS, 43).unwrap();
    assert_eq!(a.pcc, c.pcc);
}

#[test]
fn uncorrelated_flag_for_noise() {
    let x: Vec<f64> = (0..17).map(|i| ((i * 7919) % 17) as f64).collect();
    let y: Vec<f64> = (0..17).map(|i| ((i * 104_729 + 3) % 17) as f64).collect();
    let r = correlation(&x, &y, 2000, 1).unwrap();
    assert_eq!(r.uncorrelated, r.p_value > SIGNIFICANCE || r.pcc.abs() < MIN_EFFECT);
}

#[test]
fn contour_on_sphere_cap_stays_bounded() {
    let mesh = icosphere(10.0, 3);
    let picks: Vec<(String, Point3<f64>)> = mesh
        .vertices()
        .iter()
        .filter(|p| p.z > 4.0)
        .step_by(7)
        .enumerate()
        .map(|(i, p)| (format!("AP{}", i + 1), *p))
        .collect();
    let aps = AuricularPointSet::from_positions(&mesh, &picks);
    let values: Vec<f64> = (0..aps.len()).map(|i| 1.0 + (i as f64 * 0.9).sin()).collect();
    let field = interpolate_contour(&mesh, &aps, &values).unwrap();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(field.values.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
}

#[test]
fn coincident_aps_rejected() {
    let p = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 0.0)];
    assert!(matches!(ContourInterpolator::new(&p, &[1.0, 2.0, 3.0]), Err(AnalysisError::Degenerate(_))));
}

#[test]
fn collinear_aps_fall_back_to_idw() {
    let p: Vec<Point3<f64>> = (0..4).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
    let c = ContourInterpolator::new(&p, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(c.method(), ContourMethod::InverseDistance);
    assert!(!c.warnings().is_empty());
    assert_eq!(c.evaluate(&p[2]), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sse_matches_brute_force((points, asg) in points_strategy()) {
        let k = asg.iter().max().unwrap() + 1;
        let d = points.ncols();
        // centers as cluster means; empty clusters get an arbitrary row
        let centers = DMatrix::from_fn(k, d, |c, j| {
            let members: Vec<usize> = (0..points.nrows()).filter(|&i| asg[i] == c).collect();
            if members.is_empty() { 0.0 } else { members.iter().map(|&i| points[(i, j)]).sum::<f64>() / members.len() as f64 }
        });
        let lib = sse(&points, &asg, &centers);
        let brute = common::brute_sse(&points, &asg);
        prop_assert!((lib - brute).abs() <= 1e-9 * (1.0 + brute), "{lib} vs {brute}");
    }

    #[test]
    fn silhouette_matches_brute_force((points, asg) in points_strategy()) {
        let (asg, k) = compact(&asg);
        prop_assume!(k >= 2);
        let lib = silhouette(&points, &asg).unwrap();
        let brute = common::brute_silhouette(&points, &asg);
        for (a, b) in lib.values.iter().zip(&brute) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        prop_assert!((lib.mean - brute.iter().sum::<f64>() / brute.len() as f64).abs() <= 1e-12);
    }

    #[test]
    fn kmeans_result_is_consistent((points, _asg) in points_strategy(), k in 1usize..5, seed in 0u64..1000) {
        prop_assume!(points.nrows() >= k);
        let r = kmeans(&points, k, 3, seed).unwrap();
        prop_assert_eq!(r.assignments.len(), points.nrows());
        prop_assert!((r.sse - common::brute_sse(&points, &r.assignments)).abs() <= 1e-9 * (1.0 + r.sse));
        for w in r.sse_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let again = kmeans(&points, k, 3, seed).unwrap();
        prop_assert_eq!(r.assignments, again.assignments);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pca_components_orthonormal_and_error_monotone(
        vals in proptest::collection::vec(0.1..5.0f64, 12 * 7), scale in any::<bool>(),
    ) {
        let data = DMatrix::from_row_slice(12, 7, &vals);
        let full = pca(&data, 7, scale).unwrap();
        let gram = &full.components * full.components.transpose();
        prop_assert!((gram - DMatrix::identity(7, 7)).abs().max() < 1e-10);
        prop_assert!(full.explained_variance_ratio.windows(2).all(|w| w[0] >= w[1] - 1e-15));
        prop_assert!((full.total_explained() - 1.0).abs() < 1e-10);

        let mut centred = data.clone();
        for mut row in centred.row_iter_mut() {
            for j in 0..7 {
                row[j] = (row[j] - full.mean[j]) / full.scale[j];
            }
        }
        let mut last = f64::INFINITY;
        for k in 1..=7 {
            let r = pca(&data, k, scale).unwrap();
            let recon = &r.scores * &r.components;
            let err = (&centred - recon).norm_squared();
            prop_assert!(err <= last + 1e-9);
            last = err;
        }
        prop_assert!(last < 1e-9);
    }

    #[test]
    fn pcc_matches_direct_formula_and_is_affine_invariant(
        x in proptest::collection::vec(-100.0..100.0f64, 5..60),
        noise in proptest::collection::vec(-50.0..50.0f64, 60),
        a in 0.01..100.0f64, b in -1e3..1e3f64, flip in any::<bool>(),
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| 0.5 * v + e).collect();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((r - pearson_direct(&x, &y)).abs() <= 1e-12);
        let s = if flip { -a } else { a };
        let x2: Vec<f64> = x.iter().map(|v| s * v + b).collect();
        let r2 = pearson(&x2, &y).unwrap();
        prop_assert!((r2 - r.signum() * s.signum() * r.abs()).abs() < 1e-10);
    }

    #[test]
    fn elbow_is_invariant_to_affine_rescaling(
        drops in proptest::collection::vec(0.0..10.0f64, 4..10), a in 0.01..1e3f64, b in 0.0..1e3f64,
    ) {
        let mut sse = vec![b + drops.iter().sum::<f64>()];
        for d in &drops {
            sse.push(sse.last().unwrap() - d);
        }
        let scaled: Vec<f64> = sse.iter().map(|v| a * v).collect();
        let e1 = select_k_elbow(&sse).unwrap();
        let e2 = select_k_elbow(&scaled).unwrap();
        prop_assert_eq!(e1.k, e2.k);
        prop_assert!(e1.k >= 2 && e1.k < sse.len());
    }
}

fn planar_configuration(n: usize, seed_vals: &[f64]) -> Vec<Point3<f64>> {
    // corners first, so the AP hull covers the whole sheet
    let mut p = vec![
        Point3::new(-10.0, -10.0, 0.0),
        Point3::new(10.0, -10.0, 0.0),
        Point3::new(10.0, 10.0, 0.0),
        Point3::new(-10.0, 10.0, 0.0),
    ];
    for i in 0..n {
        p.push(Point3::new(seed_vals[2 * i], seed_vals[2 * i + 1], 0.0));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn contour_exact_bounded_and_linear(
        n in 3usize..12,
        coords in proptest::collection::vec(-9.0..9.0f64, 24),
        vals in proptest::collection::vec(0.2..3.0f64, 16),
        (a, bx, by) in (-2.0..2.0f64, -0.3..0.3f64, -0.3..0.3f64),
    ) {
        let sites = planar_configuration(n, &coords);
        let spread = 20.0;
        for i in 0..sites.len() {
            for j in 0..i {
                prop_assume!((sites[i] - sites[j]).norm() > 1e-3 * spread);
            }
        }
        let mesh = plane_grid(20.0, 20.0, 24, 24);
        let values = &vals[..sites.len()];

        let interp = ContourInterpolator::new(&sites, values).unwrap();
        prop_assert_eq!(interp.method(), ContourMethod::NaturalNeighbor);
        for (s, v) in sites.iter().zip(values) {
            prop_assert!((interp.evaluate(s) - v).abs() <= 1e-9);
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        for p in mesh.vertices() {
            let v = interp.evaluate(p);
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{v} outside [{lo}, {hi}]");
        }

        let linear = |p: &Point3<f64>| a + bx * p.x + by * p.y;
        let lin_values: Vec<f64> = sites.iter().map(linear).collect();
        let lin = ContourInterpolator::new(&sites, &lin_values).unwrap();
        for p in mesh.vertices() {
            prop_assert!((lin.evaluate(p) - linear(p)).abs() <= 1e-6, "at {p:?}");
        }
    }

    #[test]
    fn sibson_coordinates_are_convex_and_reproduce_position(
        coords in proptest::collection::vec(-1.0..1.0f64, 16), qx in -0.3..0.3f64, qy in -0.3..0.3f64,
    ) {
        let mut sites: Vec<Vector2<f64>> = vec![
            Vector2::new(-1.5, -1.5), Vector2::new(1.5, -1.5), Vector2::new(1.5, 1.5), Vector2::new(-1.5, 1.5),
        ];
        sites.extend(coords.chunks(2).map(|c| Vector2::new(c[0], c[1])));
        let q = Vector2::new(qx, qy);
        prop_assume!(sites.iter().all(|s| (s - q).norm() > 1e-6));
        let w = sibson_weights(&sites, q, 1e8).unwrap();
        prop_assert!(w.iter().all(|x| *x >= -1e-12));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let centroid: Vector2<f64> = w.iter().zip(&sites).map(|(w, s)| s * *w).sum();
        prop_assert!((centroid - q).norm() < 1e-9);
    }
}
