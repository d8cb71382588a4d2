use antcluster::cluster::{
    cluster_efficiency, frequency_sweep, optimal_excitation, tarc, weighted_pattern, ExcitationVector,
};
use antcluster::ffpattern::{integrate_overlap, SphericalGrid};
use antcluster::linalg::{CMatrix, HermitianEigen};
use antcluster::radmatrix::{
    radiation_matrix_from_fields, radiation_matrix_from_s, ClusterDefinition, MatrixSource, RadiationMatrix, Scope,
};
use antcluster::synth::{
    hertzian_dipole_pattern, lossless_system_for, random_passive_network, DipoleSpec,
};
use antcluster::touchstone::Network;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn psd_from(k: usize, vals: &[f64]) -> RadiationMatrix {
    let g = CMatrix::from_fn(k, k, |r, c| Complex64::new(vals[2 * (r * k + c)], vals[2 * (r * k + c) + 1]));
    let mut d = &g * g.adjoint();
    let tr = d.trace().re.max(1e-300);
    d.unscale_mut(tr);
    let d = (&d + d.adjoint()).unscale(2.0);
    RadiationMatrix::new(1e9, d, MatrixSource::FarField).unwrap()
}

fn arb_psd() -> impl Strategy<Value = RadiationMatrix> {
    (1usize..=8).prop_flat_map(|k| prop::collection::vec(-1.0..1.0f64, 2 * k * k).prop_map(move |v| psd_from(k, &v)))
}

fn arb_weights(k: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), k)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-6))
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn eigen_weights_beat_any_excitation((d, w) in arb_psd().prop_flat_map(|d| { let k = d.dim(); (Just(d), arb_weights(k)) })) {
        let best = optimal_excitation(&d).unwrap();
        let other = ExcitationVector::new(w, 1e9).unwrap();
        prop_assert!(cluster_efficiency(&d, &other).unwrap() <= best.efficiency + 1e-12);
        prop_assert!((cluster_efficiency(&d, &best.excitation).unwrap() - best.efficiency).abs() < 1e-12);
    }

    #[test]
    fn excitation_convention_holds(d in arb_psd()) {
        let a = optimal_excitation(&d).unwrap().excitation;
        prop_assert!((a.weights().norm() - 1.0).abs() < 1e-12);
        let amps = a.amplitudes();
        let top = amps.iter().cloned().fold(0.0, f64::max);
        let pivot = amps.iter().position(|&m| m >= top - 1e-12).unwrap();
        prop_assert!(a.weights()[pivot].im.abs() < 1e-12 && a.weights()[pivot].re >= 0.0);
        for p in a.phases_deg() {
            prop_assert!(p > -180.0 && p <= 180.0);
        }
    }

    #[test]
    fn scaling_d_scales_efficiency(d in arb_psd(), c in 0.01..=1.0f64) {
        let scaled = RadiationMatrix::new(1e9, d.matrix().scale(c), MatrixSource::FarField).unwrap();
        let (p, q) = (optimal_excitation(&d).unwrap(), optimal_excitation(&scaled).unwrap());
        prop_assert!((q.efficiency - c * p.efficiency).abs() <= 1e-12);
        let eig = HermitianEigen::new(d.matrix());
        if eig.values.len() == 1 || eig.values[0] - eig.values[1] > 1e-6 {
            let diff = (p.excitation.weights() - q.excitation.weights()).norm();
            prop_assert!(diff < 1e-8, "weights moved by {}", diff);
        }
    }

    #[test]
    fn all_rows_never_beats_cluster_only(seed in any::<u64>(), n in 2usize..=6, sv in 0.0..=1.0f64) {
        let net = random_passive_network(n, sv, &[1e9], seed).unwrap();
        let k = 1 + (seed as usize) % (n - 1);
        let cl = ClusterDefinition::new("c", (1..=k).collect(), n).unwrap();
        let all = radiation_matrix_from_s(&net, &cl, 0, Scope::AllRows).unwrap();
        let own = radiation_matrix_from_s(&net, &cl, 0, Scope::ClusterOnly).unwrap();
        prop_assert!(all.eigen().max() <= own.eigen().max() + 1e-12);
        for d in [&all, &own] {
            let e = d.eigen();
            prop_assert!(e.min() >= -1e-9 && e.max() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn min_tarc_is_sqrt_one_minus_lambda(seed in any::<u64>(), n in 1usize..=6) {
        let net = random_passive_network(n, 0.9, &[1e9], seed).unwrap();
        let cl = ClusterDefinition::new("c", (1..=n).collect(), n).unwrap();
        let d = radiation_matrix_from_s(&net, &cl, 0, Scope::ClusterOnly).unwrap();
        let p = optimal_excitation(&d).unwrap();
        let t = tarc(&net, &cl, &p.excitation, 0, Scope::ClusterOnly).unwrap();
        prop_assert!((t - (1.0 - d.eigen().max()).sqrt()).abs() < 1e-9);
        prop_assert!((t - p.tarc).abs() < 1e-9);
    }
}

#[test]
fn fully_reflected_port_gets_zero_weight() {
    // Column 2 is a unit vector orthogonal to column 1: port 2 returns all of
    // its power, so driving it can only lose efficiency.
    let mut s = CMatrix::zeros(3, 3);
    s[(0, 0)] = Complex64::new(0.3, 0.1);
    s[(2, 0)] = Complex64::new(0.0, -0.2);
    s[(1, 1)] = Complex64::new(0.6, 0.0);
    s[(2, 1)] = Complex64::new(0.0, 0.8);
    s[(2, 2)] = Complex64::new(0.1, 0.0);
    s[(2, 0)] = Complex64::new(0.0, 0.0);
    let net = Network::new(vec![1e9], vec![s], 50.0).unwrap();
    let cl = ClusterDefinition::new("c", vec![1, 2], 3).unwrap();
    let d = radiation_matrix_from_s(&net, &cl, 0, Scope::AllRows).unwrap();
    let p = optimal_excitation(&d).unwrap();
    assert!(p.excitation.weights()[1].norm() < 1e-6);
    assert!((p.efficiency - (1.0 - 0.1)).abs() < 1e-12);
}

#[test]
fn sweep_solves_each_point_independently() {
    let s1 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.1f64.sqrt(), 0.0),
        Complex64::new(0.9f64.sqrt(), 0.0),
    ]));
    let s2 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.9f64.sqrt(), 0.0),
        Complex64::new(0.1f64.sqrt(), 0.0),
    ]));
    let net = Network::new(vec![1e9, 2e9], vec![s1, s2], 50.0).unwrap();
    let cl = ClusterDefinition::new("c", vec![1, 2], 2).unwrap();
    let pts = frequency_sweep(&net, None, &cl, MatrixSource::Scattering(Scope::ClusterOnly)).unwrap();
    assert_eq!(pts.len(), 2);
    assert!((pts[0].excitation.weights()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((pts[1].excitation.weights()[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((pts[0].efficiency - 0.9).abs() < 1e-12);
    assert!((pts[0].tarc - 0.1f64.sqrt()).abs() < 1e-12);
}

#[test]
fn far_field_sweep_matches_random_search() {
    let grid = SphericalGrid::with_steps(5.0, 5.0).unwrap();
    // 1e5 samples on the unit sphere of C^4 come within about 4% (in sin^2 of
    // the angle) of the top eigenvector, so the eigenvalue spread must stay
    // near 0.02 for a 1e-3 random-search gap: hence a well-matched network.
    let net = random_passive_network(6, 0.15, &[1e9, 2e9], 7).unwrap();
    let sys = lossless_system_for(net, &grid).unwrap();
    let cl = ClusterDefinition::new("c", vec![1, 3, 4, 6], 6).unwrap();
    let sets = sys.cluster_patterns(&cl);
    let pts = frequency_sweep(&sys.network, Some(&sets), &cl, MatrixSource::FarField).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (fi, p) in pts.iter().enumerate() {
        let f = sys.network.frequencies_hz()[fi];
        let pats: Vec<_> = sets.iter().map(|s| s.get(f).unwrap()).collect();
        let d = radiation_matrix_from_fields(&pats).unwrap();
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let w: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            best = best.max(cluster_efficiency(&d, &ExcitationVector::new(w, f).unwrap()).unwrap());
        }
        assert!(best <= p.efficiency + 1e-12, "random search {best} beat eigen {}", p.efficiency);
        assert!(best >= p.efficiency - 1e-3, "random search {best} too far below {}", p.efficiency);

        // The weighted pattern radiates exactly the quadratic form.
        let g = weighted_pattern(&pats, &p.excitation).unwrap();
        assert!((g.efficiency() - p.efficiency).abs() < 1e-12);
    }
}

#[test]
fn weighted_orthogonal_dipoles() {
    let grid = SphericalGrid::with_steps(2.0, 2.0).unwrap();
    let x = hertzian_dipole_pattern(&DipoleSpec::along(0), &grid, 1e9).unwrap();
    let y = hertzian_dipole_pattern(&DipoleSpec::along(1), &grid, 1e9).unwrap();
    assert!(integrate_overlap(&x, &y).unwrap().norm() < 1e-9);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a = ExcitationVector::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)], 1e9).unwrap();
    let g = weighted_pattern(&[&x, &y], &a).unwrap();
    assert!((g.efficiency() - 1.0).abs() < 1e-9);
    let unit = weighted_pattern(&[&x, &y], &ExcitationVector::unit(2, 0, 1e9)).unwrap();
    assert_eq!(unit, x);
}

#[test]
fn single_reflection_tarc() {
    let mut s = CMatrix::zeros(2, 2);
    s[(0, 0)] = Complex64::new(0.6, 0.0);
    let net = Network::new(vec![1e9], vec![s], 50.0).unwrap();
    let cl = ClusterDefinition::new("c", vec![1], 2).unwrap();
    let t = tarc(&net, &cl, &ExcitationVector::unit(1, 0, 1e9), 0, Scope::ClusterOnly).unwrap();
    assert!((t - 0.6).abs() < 1e-15);
}
