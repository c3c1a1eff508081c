use proptest::prelude::*;
use snrwall_core::bounds::{
    extremal_probes, h0_statistic_lower_bound, h1_statistic_upper_bound, nonrobustness_inequality,
    rayleigh_eigen_bounds, snr_wall_lower_bound, validity_condition,
};
use snrwall_core::detector::{hermitian_eigenvalues, mme_statistic};
use snrwall_core::model::Snr;
use snrwall_core::noise::CorrelationModel;
use snrwall_core::{CMatrix, Complex64, CovarianceKind, HermitianCovariance};

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    (
        prop::collection::vec(-3.0..3.0f64, n),
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n * n),
    )
        .prop_map(move |(diag, off)| {
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = Complex64::new(diag[i], 0.0);
                for j in i + 1..n {
                    let (re, im) = off[i * n + j];
                    m[(i, j)] = Complex64::new(re, im);
                    m[(j, i)] = Complex64::new(re, -im);
                }
            }
            m
        })
}

/// Real roots of the characteristic polynomial of a 2x2 Hermitian matrix,
/// descending.
fn roots_2x2(m: &CMatrix) -> [f64; 2] {
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let b = m[(0, 1)].norm_sqr();
    let disc = ((a - d) * (a - d) / 4.0 + b).sqrt();
    [(a + d) / 2.0 + disc, (a + d) / 2.0 - disc]
}

/// det(A - x I) for a 3x3 Hermitian matrix.
fn char_poly_3x3(m: &CMatrix, x: f64) -> f64 {
    let s = |i: usize, j: usize| {
        if i == j {
            m[(i, j)] - Complex64::new(x, 0.0)
        } else {
            m[(i, j)]
        }
    };
    let det = s(0, 0) * (s(1, 1) * s(2, 2) - s(1, 2) * s(2, 1))
        - s(0, 1) * (s(1, 0) * s(2, 2) - s(1, 2) * s(2, 0))
        + s(0, 2) * (s(1, 0) * s(2, 1) - s(1, 1) * s(2, 0));
    det.re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigenvalues_match_2x2_closed_form(m in hermitian(2)) {
        let ev = hermitian_eigenvalues(&m).unwrap();
        let want = roots_2x2(&m);
        for (a, b) in ev.values().iter().zip(want) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn eigenvalues_are_3x3_characteristic_roots(m in hermitian(3)) {
        let ev = hermitian_eigenvalues(&m).unwrap();
        let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for &l in ev.values() {
            prop_assert!(char_poly_3x3(&m, l).abs() < 1e-8 * scale.powi(3));
        }
        let sum: f64 = ev.values().iter().sum();
        let trace: f64 = (0..3).map(|i| m[(i, i)].re).sum();
        prop_assert!((sum - trace).abs() < 1e-10 * scale);
    }

    #[test]
    fn eigenvalues_descending_and_trace_preserving(m in (2usize..7).prop_flat_map(hermitian)) {
        let n = m.nrows();
        let ev = hermitian_eigenvalues(&m).unwrap();
        prop_assert!(ev.values().windows(2).all(|w| w[0] >= w[1]));
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        let sum: f64 = ev.values().iter().sum();
        prop_assert!((sum - trace).abs() < 1e-9 * (1.0 + trace.abs() + n as f64));
    }

    #[test]
    fn rayleigh_quotients_sandwich_the_spectrum(m in hermitian(4), phi in 0.0..std::f64::consts::TAU, i in 0usize..4, k in 0usize..4) {
        prop_assume!(i != k);
        let ev = hermitian_eigenvalues(&m).unwrap();
        let mut z1 = nalgebra::DVector::<Complex64>::zeros(4);
        let mut z2 = z1.clone();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = Complex64::from_polar(r, -phi);
        z1[i] = Complex64::new(r, 0.0);
        z1[k] = e;
        z2[i] = Complex64::new(r, 0.0);
        z2[k] = -e;
        let (q1, q2) = rayleigh_eigen_bounds(&m, &z1, &z2).unwrap();
        let tol = 1e-9 * (1.0 + ev.max().abs());
        for q in [q1, q2] {
            prop_assert!(q <= ev.max() + tol && q >= ev.min() - tol);
        }
    }

    #[test]
    fn extremal_probes_bound_the_spectrum(m in hermitian(5)) {
        let (z1, z2) = extremal_probes(&m).unwrap();
        let (q1, q2) = rayleigh_eigen_bounds(&m, &z1, &z2).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        let tol = 1e-9 * (1.0 + ev.max().abs());
        prop_assert!(q1.max(q2) <= ev.max() + tol);
        prop_assert!(q1.min(q2) >= ev.min() - tol);
    }

    #[test]
    fn statistic_is_scale_invariant(m in hermitian(4), c in 1e-3..1e3f64) {
        let psd = &m * m.adjoint() + CMatrix::identity(4, 4) * Complex64::new(0.1, 0.0);
        let cov = HermitianCovariance::new(psd, CovarianceKind::Statistical).unwrap();
        let a = mme_statistic(&cov, 1e-12);
        let b = mme_statistic(&cov.scaled(c).unwrap(), 1e-12);
        prop_assert!(a >= 1.0);
        prop_assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn wall_grows_with_alpha_and_shrinks_with_kappa(rho in 0.001..0.5f64, d in 0.001..0.3f64, kappa in 1.0..6.0f64, dk in 0.01..2.0f64) {
        let a = h0_statistic_lower_bound(rho).unwrap();
        let b = h0_statistic_lower_bound((rho + d).min(0.99)).unwrap();
        let w = snr_wall_lower_bound(a, kappa).unwrap().wall_linear;
        prop_assert!(snr_wall_lower_bound(b, kappa).unwrap().wall_linear > w);
        prop_assert!(snr_wall_lower_bound(a, kappa + dk).unwrap().wall_linear < w);
    }

    #[test]
    fn below_the_wall_the_inequality_holds(rho in 0.01..0.4f64, frac in 0.05..1.0f64) {
        // two fully correlated receivers, white H1 noise
        let signal = nalgebra::DMatrix::from_element(2, 2, 1.0);
        let noise_h0 = CMatrix::from_fn(2, 2, |i, j| Complex64::new(if i == j { 1.0 } else { rho }, 0.0));
        let model = CorrelationModel::with_white_h1(signal, noise_h0).unwrap();
        let report = snr_wall_lower_bound(h0_statistic_lower_bound(rho).unwrap(), model.kappa_max()).unwrap();
        let snr = Snr::from_linear(report.wall_linear * frac).unwrap();
        prop_assert!(validity_condition(&model, snr));
        prop_assert!(nonrobustness_inequality(&model, snr, rho).unwrap());
        let upper = h1_statistic_upper_bound(&model, snr).unwrap();
        prop_assert!((upper - (1.0 + 2.0 * snr.linear())).abs() < 1e-12);
    }
}
