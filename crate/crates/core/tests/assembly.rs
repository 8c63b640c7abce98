mod common;

use common::{oracle_operators, rel_diff, ORACLE_POINTS};
use fadg::assembly::{build_reduced, constant_mode, discretize, Assembler, DofMap};
use fadg::basis::BasisSpec;
use fadg::fields::{CoefficientField, MagneticField};
use fadg::geometry::{build_mesh, Alignment, FieldDirection, MeshConfig};
use proptest::prelude::*;

fn layouts() -> Vec<MeshConfig> {
    let b11 = FieldDirection::new(1.0, 1.0).unwrap();
    let b21 = FieldDirection::new(2.0, 1.0).unwrap();
    let bref = FieldDirection::new(1.165939761, 1.0).unwrap();
    vec![
        MeshConfig::new(2, 2, Alignment::Cartesian, FieldDirection::new(1.0, 2.0).unwrap()),
        MeshConfig::new(2, 2, Alignment::AlignedBottomTop, b11),
        MeshConfig::new(2, 2, Alignment::AlignedBottomTop, b21),
        MeshConfig::new(2, 2, Alignment::AlignedLeftRight, bref),
        MeshConfig::new(1, 4, Alignment::AlignedBottomTop, bref),
        MeshConfig::new(4, 1, Alignment::Cartesian, bref),
    ]
}

fn check(cfg: MeshConfig, p: (usize, usize), alpha: &CoefficientField, beta: &CoefficientField, points: Option<usize>) {
    let mesh = build_mesh(cfg).unwrap();
    let basis = BasisSpec::new(p.0, p.1);
    let asm = match points {
        Some(n) => Assembler::with_points(&mesh, basis, n).unwrap(),
        None => Assembler::new(&mesh, basis).unwrap(),
    };
    let field = MagneticField::new(cfg.b, beta.clone());
    let ops = asm.operators(alpha, &field, 6.0);
    let oracle = oracle_operators(&mesh, p, &|x, y| alpha.eval(x, y), &|x, y| beta.eval(x, y), 6.0);
    let label = format!("{} {}x{} p={p:?}", cfg.alignment, cfg.nx, cfg.ny);
    let pairs = [
        ("M_UV", ops.m_uv.to_dense(), &oracle.m_uv),
        ("M_PhiPsi", ops.m_phipsi.to_dense(), &oracle.m_phipsi),
        ("A_UPsi", ops.a_upsi.to_dense(), &oracle.a_upsi),
        ("B_UPsi", ops.b_upsi.to_dense(), &oracle.b_upsi),
        ("B_PhiPsi", ops.b_phipsi.to_dense(), &oracle.b_phipsi),
        ("A_PhiV", ops.a_phiv().to_dense(), &oracle.a_upsi.transpose()),
        ("B_PhiV", ops.b_phiv().to_dense(), &oracle.b_upsi.transpose()),
    ];
    let scale = oracle.scale();
    for (name, lib, reference) in pairs {
        let d = rel_diff(&lib, reference, scale);
        assert!(d <= 1e-12, "{label}: {name} differs by {d:e}");
    }
    let a = build_reduced(&ops).unwrap().a.to_dense();
    let reduced = oracle.reduced();
    let d = rel_diff(&a, &reduced, reduced.amax());
    assert!(d <= 1e-11, "{label}: reduced A differs by {d:e}");
}

#[test]
fn oracle_constant_coefficients() {
    let one = CoefficientField::constant(1.0);
    for cfg in layouts() {
        for p in [(0, 0), (1, 1), (2, 1), (2, 2)] {
            check(cfg, p, &one, &one, None);
        }
    }
}

#[test]
fn oracle_harmonic_coefficients() {
    let alpha = CoefficientField::constant(1.0).with_harmonic(1, 0, 0.3, 0.0);
    let beta = CoefficientField::constant(1.0).with_harmonic(0, 1, 0.1, 0.05);
    for cfg in layouts() {
        check(cfg, (1, 2), &alpha, &beta, Some(ORACLE_POINTS));
    }
}

#[test]
fn cartesian_p0_face_terms_by_hand() {
    // conforming 3x3, b = (1, 2), constants: a face couples owner and
    // neighbour by +-(b . n) |F| / 2
    let b = FieldDirection::new(1.0, 2.0).unwrap();
    let mesh = build_mesh(MeshConfig::new(3, 3, Alignment::Cartesian, b)).unwrap();
    let asm = Assembler::new(&mesh, BasisSpec::new(0, 0)).unwrap();
    let f = asm.face_terms(&MagneticField::uniform(b)).to_dense();
    let h = 2.0 * std::f64::consts::PI / 3.0;
    let expect = [
        ((0, 1), 0.5 * b.b1 * h),
        ((1, 0), -0.5 * b.b1 * h),
        ((0, 2), -0.5 * b.b1 * h),
        ((0, 3), 0.5 * b.b2 * h),
        ((3, 0), -0.5 * b.b2 * h),
        ((0, 6), -0.5 * b.b2 * h),
        ((0, 0), 0.0),
        ((0, 4), 0.0),
    ];
    for ((i, j), v) in expect {
        assert!((f[(i, j)] - v).abs() < 1e-14, "({i}, {j}): {} vs {v}", f[(i, j)]);
    }
}

#[test]
fn constant_mode_is_in_the_kernel() {
    let b = fadg::fields::iota_profile(0.5).unwrap();
    let alpha = CoefficientField::constant(1.0).with_harmonic(1, 1, 0.1, 0.0).with_harmonic(1, -1, 0.1, 0.0);
    let beta = CoefficientField::constant(1.0).with_harmonic(0, 1, 0.1, 0.0);
    for alignment in [Alignment::Cartesian, Alignment::AlignedBottomTop, Alignment::AlignedLeftRight] {
        let mesh = build_mesh(MeshConfig::new(3, 5, alignment, b)).unwrap();
        let basis = BasisSpec::new(2, 3);
        let sys = discretize(&mesh, basis, &alpha, &MagneticField::new(b, beta.clone()), 6.0).unwrap();
        let one = constant_mode(DofMap::new(&mesh, basis));
        let mut y = vec![0.0; one.len()];
        sys.a.mul_vec(&one, &mut y);
        let r = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r <= 1e-10 * sys.a.norm_inf(), "{alignment}: {r:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn penalty_is_psd_and_symmetric(
        nx in 1usize..4, ny in 1usize..4, b1 in 0.3f64..2.0, b2 in 0.3f64..2.0,
        layout in 0usize..3, seed in 0u64..1000,
    ) {
        let alignment = [Alignment::Cartesian, Alignment::AlignedBottomTop, Alignment::AlignedLeftRight][layout];
        let b = FieldDirection::new(b1, b2).unwrap();
        let mesh = build_mesh(MeshConfig::new(nx, ny, alignment, b)).unwrap();
        let basis = BasisSpec::new(1, 1);
        let asm = Assembler::new(&mesh, basis).unwrap();
        let pen = asm.penalty(&MagneticField::uniform(b), 6.0).to_dense();
        prop_assert_eq!(&pen, &pen.transpose());
        let n = pen.nrows();
        let x = nalgebra::DVector::from_fn(n, |i, _| (((i as u64 + 1) * (seed + 7)) % 13) as f64 - 6.0);
        prop_assert!(x.dot(&(&pen * &x)) >= -1e-10 * pen.amax() * x.norm_squared());

        let sys = discretize(&mesh, basis, &CoefficientField::constant(1.0), &MagneticField::uniform(b), 6.0).unwrap();
        let a = sys.a.to_dense();
        prop_assert_eq!(&a, &a.transpose());
        let min = a.clone().symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-10 * sys.a.norm_inf());
    }
}

