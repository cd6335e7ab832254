use nalgebra::DMatrix;
use proptest::prelude::*;

use polyharm::bscroll::KSpec;
use polyharm::catalog::{clifford_invariants, table_entry, Family};
use polyharm::ddouble::DD;
use polyharm::harmonicity::{
    classify, p3_eval, r_harmonic_residuals, tau_r_assembled, tau_r_closed, HarmonicityInput, Verdict,
};
use polyharm::immersion::{DerivPolicy, NormalOrientation, ReportOptions};
use polyharm::pgeom::{classify_operator, orthonormalize, JordanTag, Signature};

fn sign() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(-1.0)]
}

fn basis(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, n), n)
}

fn det(b: &[Vec<f64>]) -> f64 {
    let n = b.len();
    DMatrix::from_fn(n, n, |i, j| b[i][j]).determinant()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn orthonormalized_frames_keep_the_inertia(
        (n, t, b) in (2usize..6).prop_flat_map(|n| (Just(n), 0..=n, basis(n)))
    ) {
        prop_assume!(det(&b).abs() > 1e-2);
        let sig = Signature::new(n, t).unwrap();
        if let Ok(frame) = orthonormalize(&b, &sig, 1e-10) {
            prop_assert_eq!(frame.len(), n);
            prop_assert!(frame.orthonormality_defect(&sig) < 1e-8);
            // Sylvester: every orthonormal basis has t negative vectors.
            prop_assert_eq!(frame.negative_count(), t);
        }
    }

    #[test]
    fn jordan_type_is_similarity_invariant(
        p in prop::collection::vec(-1.0..1.0f64, 4),
        a in -2.0..2.0f64,
        b in 0.3..2.0f64,
        kind in 0usize..3,
    ) {
        let pm = DMatrix::from_row_slice(2, 2, &[1.0 + p[0], p[1], p[2], 1.0 + p[3]]);
        prop_assume!(pm.determinant().abs() > 0.3);
        let (base, tag) = match kind {
            0 => (DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, a + b]), JordanTag::I),
            1 => (DMatrix::from_row_slice(2, 2, &[a, 0.0, b, a]), JordanTag::II),
            _ => (DMatrix::from_row_slice(2, 2, &[a, b, -b, a]), JordanTag::IV),
        };
        let conj = pm.clone().try_inverse().unwrap() * base * pm;
        prop_assert_eq!(classify_operator(&conj, 1e-9).unwrap().tag, tag);
    }

    #[test]
    fn reversing_the_normal_flips_f_only(
        fam in prop_oneof![
            (1.2..6.0f64).prop_map(|c| Family::SmallSphere { m: 2, t: 1, c }),
            (0.1..0.9f64).prop_map(|c| Family::SpacelikeNormalSphere { m: 3, t: 2, c }),
            (0.2..1.5f64).prop_map(|a| Family::ComplexCircle { a, b: (1.0 + a * a).sqrt() }),
        ],
        w in prop::collection::vec(0.1..0.9f64, 3),
    ) {
        let s = table_entry(&fam).unwrap();
        let u: Vec<f64> = s.chart.domain().iter().zip(&w).map(|(&(lo, hi), t)| lo + t * (hi - lo)).collect();
        let u = &u[..];
        let canon = s.chart.shape_report(u).unwrap();
        let rev = s.chart.shape_report_with(u, &ReportOptions {
            orientation: NormalOrientation::Reversed,
            ..ReportOptions::default()
        }).unwrap();
        prop_assert_eq!(rev.epsilon, canon.epsilon);
        prop_assert!((rev.f + canon.f).abs() < 1e-12);
        prop_assert!((rev.tr_a2 - canon.tr_a2).abs() < 1e-12);
        for (x, y) in rev.normal.iter().zip(&canon.normal) {
            prop_assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn central_differences_converge_at_second_order(
        c in 1.5..5.0f64,
        u in prop::collection::vec(0.4..1.0f64, 2),
    ) {
        let s = table_entry(&Family::SmallSphere { m: 2, t: 1, c }).unwrap();
        let exact = s.chart.shape_report(&u).unwrap().a_coord;
        let err = |h: f64| {
            let rep = s.chart.with_policy(DerivPolicy::CentralDifference { h }).shape_report(&u).unwrap();
            (rep.a_coord - &exact).abs().max()
        };
        let ratio = err(2e-2) / err(1e-2);
        prop_assert!((3.5..=4.5).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn closed_and_assembled_tension_agree(
        m in 1usize..7,
        r in 2usize..9,
        eps in sign(),
        c in -2.0..2.0f64,
        alpha in -2.0..2.0f64,
        t in -4.0..4.0f64,
    ) {
        let input = HarmonicityInput::new(m, c, eps, alpha, t, r);
        let closed = tau_r_closed(&input);
        let assembled = tau_r_assembled(&input).unwrap();
        let scale = closed.abs().max(assembled.abs()).max(1e-300);
        prop_assert!((closed - assembled).abs() / scale <= 1e-9, "{} vs {}", closed, assembled);
    }

    #[test]
    fn metric_sign_duality(
        m in 1usize..7,
        r in 2usize..9,
        eps in sign(),
        c in -3.0..3.0f64,
        alpha in -2.0..2.0f64,
        t in -5.0..5.0f64,
    ) {
        let (_, a) = r_harmonic_residuals(&HarmonicityInput::new(m, c, eps, alpha, t, r));
        let (_, b) = r_harmonic_residuals(&HarmonicityInput::new(m, -c, -eps, alpha, t, r));
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn clifford_residual_factors_through_the_cubic(
        (m, k) in (2usize..8).prop_flat_map(|m| (Just(m), 1..m)),
        r in 3usize..9,
        c in 1.05..8.0f64,
    ) {
        let (t, a2) = clifford_invariants(m, k, c).unwrap();
        let (_, main) = r_harmonic_residuals(&HarmonicityInput::new(m, 1.0, 1.0, a2.sqrt(), t, r));
        let lhs = main * (c - 1.0).powi(2);
        let rhs = (c * k as f64 - m as f64) * p3_eval(c, m, k, r);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn rigidity_flags(
        m in 2usize..7,
        r in 3usize..9,
        c in prop_oneof![Just(0.0), Just(1.0)],
        alpha in prop_oneof![-3.0..-0.01f64, 0.01..3.0f64],
        t in 0.0..6.0f64,
    ) {
        let rep = classify(&HarmonicityInput::new(m, c, -1.0, alpha, t, r), 1e-9);
        prop_assert_eq!(rep.verdict, Verdict::NotRHarmonic);
        prop_assert!(rep.flags.space_like_rigid);
    }

    #[test]
    fn sign_obstruction_flag(
        m in 2usize..7,
        r in 2usize..9,
        eps in sign(),
        c in 0.05..3.0f64,
        alpha in -3.0..3.0f64,
        t in 1e-6..6.0f64,
    ) {
        let rep = classify(&HarmonicityInput::new(m, -eps * c, eps, alpha, t, r), 1e-9);
        prop_assert!(rep.flags.sign_obstruction);
        prop_assert!(rep.verdict != Verdict::ProperRHarmonic);
    }

    #[test]
    fn k_spec_round_trips(
        v in prop::collection::vec(-5.0..5.0f64, 1..5),
        s in -3.0..3.0f64,
    ) {
        let specs = [
            KSpec::Const(v[0]),
            KSpec::Poly(v.clone()),
            KSpec::Sin { amp: v[0], freq: 1.5, phase: -0.25 },
        ];
        for k in specs {
            let back: KSpec = k.to_string().parse().unwrap();
            prop_assert_eq!(back.eval(s), k.eval(s));
        }
    }

    #[test]
    fn double_double_sums_are_exact(a in -1e6..1e6f64, b in -1e-6..1e-6f64) {
        let s = DD::from_f64(a) + DD::from_f64(b);
        prop_assert_eq!((s - DD::from_f64(a)).to_f64(), b);
    }
}
