mod common;

use common::{basis_at, gauss, OracleCell};
use fadg::basis::BasisSpec;
use fadg::fields::iota_profile;
use fadg::geometry::{build_mesh, Alignment, FieldDirection, Mesh, MeshConfig};
use fadg::spectrum::{
    exact_spectrum, solve_case, Case, ErrorKind, FourierProjector, ModeIndex, MIN_ENERGY_SHARE,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn reference_b() -> FieldDirection {
    FieldDirection::new(1.165939761, 1.0).unwrap()
}

/// Cellwise L2 projection of `f` onto the Legendre basis.
fn project(mesh: &Mesh, basis: BasisSpec, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let (x, w) = gauss(16);
    let mut out = Vec::new();
    for cell in &mesh.cells {
        let oc = OracleCell::new(cell.vertices());
        let nloc = basis.local_dim();
        let mut num = vec![0.0; nloc];
        for (i, &xi) in x.iter().enumerate() {
            for (j, &eta) in x.iter().enumerate() {
                let [px, py] = oc.map(xi, eta);
                let (v, _) = basis_at(basis.p_xi, basis.p_eta, xi, eta);
                for k in 0..nloc {
                    num[k] += w[i] * w[j] * f(px, py) * v[k];
                }
            }
        }
        for (k, n) in num.iter().enumerate() {
            let (a, b) = basis.degrees(k);
            out.push(n / (2.0 / (2 * a + 1) as f64 * 2.0 / (2 * b + 1) as f64));
        }
    }
    out
}

#[test]
fn analytic_band_matches_enumeration() {
    // independent count over the full integer grid, both signs
    let b = reference_b();
    let mut count = 0;
    for m in -20i32..=20 {
        for n in -20i32..=20 {
            let w = (b.b1 * m as f64 + b.b2 * n as f64).powi(2);
            if w <= 0.2 {
                count += 1;
            }
        }
    }
    let s = exact_spectrum(b, 20, 20).unwrap();
    assert_eq!(s.band_count(0.2), count);
    assert_eq!(count, 29);
    let w = s.omega2(ModeIndex { m: 4, n: -5 });
    assert!((w - 0.11305798).abs() / 0.11305798 < 5e-9, "{w}");
}

#[test]
fn iota_midpoint() {
    let b = iota_profile(0.5).unwrap();
    assert!((b.b1 - 0.899515).abs() < 1e-12);
    assert_eq!(iota_profile(0.0).unwrap().b1, 0.85931);
    assert_eq!(iota_profile(1.0).unwrap().b1, 0.93972);
}

#[test]
fn projected_fourier_mode_is_recognized() {
    let mesh = build_mesh(MeshConfig::new(6, 6, Alignment::AlignedBottomTop, reference_b())).unwrap();
    let basis = BasisSpec::new(6, 6);
    let projector = FourierProjector::new(&mesh, basis, 8, 8).unwrap();
    for (m, n) in [(1, 0), (2, -3), (-3, 4), (0, 5)] {
        let coeffs = project(&mesh, basis, |x, y| (m as f64 * x + n as f64 * y + 0.3).cos());
        let t = projector.project(&coeffs).unwrap();
        let (mode, amp) = t.argmax().unwrap();
        assert_eq!(mode, ModeIndex::canonical(m, n));
        assert!((amp - 4.0 * PI * PI).abs() < 1e-4 * amp, "{amp}");
        assert!((t.share(mode) - 1.0).abs() < 1e-4);
    }
}

#[test]
fn parallel_gradient_bound() {
    // ||b . grad cos(m x + n y)||^2 = 2 pi^2 omega^2 <= 4 pi^2 omega^2
    let b = reference_b();
    // uniform rule: exact for trigonometric polynomials of degree < 64
    let k = 64;
    let h = 2.0 * PI / k as f64;
    for (m, n) in [(1, -1), (4, -5), (12, -14), (3, 7)] {
        let mut sum = 0.0;
        for i in 0..k {
            for j in 0..k {
                let (px, py) = (i as f64 * h, j as f64 * h);
                let g = -(m as f64 * px + n as f64 * py).sin() * (b.b1 * m as f64 + b.b2 * n as f64);
                sum += h * h * g * g;
            }
        }
        let omega2 = exact_spectrum(b, 20, 20).unwrap().omega2(ModeIndex::canonical(m, n));
        assert!(sum <= 4.0 * PI * PI * omega2 * (1.0 + 1e-12));
        assert!((sum - 2.0 * PI * PI * omega2).abs() < 1e-9 * (1.0 + sum));
    }
}

#[test]
fn small_solve_reports_zero_mode_and_errors() {
    let mut case = Case::new(
        MeshConfig::new(4, 4, Alignment::AlignedBottomTop, reference_b()),
        BasisSpec::new(3, 3),
    );
    case.omega_max_sq = 0.2;
    let r = solve_case(&case).unwrap();
    assert_eq!(r.solution.inertia_count, Some(r.solution.len()));
    let zero = &r.spectrum.rows[0];
    assert_eq!(zero.mode, Some(ModeIndex { m: 0, n: 0 }));
    assert_eq!(zero.error_kind, ErrorKind::Absolute);
    assert!(zero.error.unwrap() < 1e-10);
    for row in &r.spectrum.rows[1..] {
        if let Some(mode) = row.mode {
            assert!(!mode.is_zero());
            assert_eq!(row.error_kind, ErrorKind::Relative);
        }
    }
    let band = r.band.unwrap();
    assert!(band.rows.iter().any(|row| row.mode == ModeIndex { m: 1, n: -1 }));
    assert!(band.max_error.is_finite());
}

#[test]
fn variable_coefficients_have_no_exact_values() {
    let mut case = Case::new(
        MeshConfig::new(3, 3, Alignment::AlignedBottomTop, reference_b()),
        BasisSpec::new(2, 2),
    );
    case.alpha = case.alpha.clone().with_harmonic(1, 0, 0.1, 0.0);
    let r = solve_case(&case).unwrap();
    assert!(r.band.is_none());
    assert!(r.spectrum.rows.iter().all(|row| row.error_kind == ErrorKind::None && row.error.is_none()));
}

#[test]
fn band_errors_grow_with_mode_number() {
    let case = Case::new(
        MeshConfig::new(8, 8, Alignment::AlignedBottomTop, reference_b()),
        BasisSpec::new(7, 7),
    );
    let r = solve_case(&case).unwrap();
    let mut per_mode: Vec<(i32, f64)> = r
        .band
        .unwrap()
        .per_mode()
        .into_iter()
        .filter(|(m, _)| !m.is_zero())
        .map(|(m, e)| (m.order(), e))
        .collect();
    per_mode.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (mut pairs, mut inversions) = (0, 0);
    for i in 0..per_mode.len() {
        for j in i + 1..per_mode.len() {
            if per_mode[i].0 < per_mode[j].0 {
                pairs += 1;
                if per_mode[i].1 > per_mode[j].1 {
                    inversions += 1;
                }
            }
        }
    }
    assert!(pairs > 0);
    assert!(inversions as f64 <= 0.1 * pairs as f64, "{inversions}/{pairs}: {per_mode:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn association_ignores_sign_and_phase(m in -4i32..=4, n in -4i32..=4, phase in 0.0f64..6.0, scale in 0.1f64..10.0) {
        prop_assume!(m != 0 || n != 0);
        let mesh = build_mesh(MeshConfig::new(4, 4, Alignment::Cartesian, reference_b())).unwrap();
        let basis = BasisSpec::new(5, 5);
        let projector = FourierProjector::new(&mesh, basis, 6, 6).unwrap();
        let f = project(&mesh, basis, |x, y| scale * (m as f64 * x + n as f64 * y + phase).cos());
        let g: Vec<f64> = f.iter().map(|v| -v).collect();
        let (a, b) = (projector.project(&f).unwrap(), projector.project(&g).unwrap());
        prop_assert_eq!(a.argmax().unwrap().0, ModeIndex::canonical(m, n));
        prop_assert_eq!(a.argmax(), b.argmax());
        prop_assert!(a.share(ModeIndex::canonical(m, n)) >= MIN_ENERGY_SHARE);
    }
}
