use antcluster::cluster::{optimal_excitation, ExcitationVector};
use antcluster::linalg::CMatrix;
use antcluster::mimoeval::{
    build_receive_matrix, ecc, ergodic_capacity, ideal_capacity, loss_decomposition, CapacityConfig, EvalError,
    ReceiveMatrix,
};
use antcluster::radmatrix::{radiation_matrix_from_fields, radiation_matrix_from_s, ClusterDefinition, MatrixSource, RadiationMatrix, Scope};
use antcluster::synth::{lossless_system_for, random_passive_network};
use antcluster::ffpattern::SphericalGrid;
use antcluster::touchstone::Network;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cfg(snr_db: f64, n_tx: usize, n_samples: usize) -> CapacityConfig {
    CapacityConfig {
        snr_db,
        n_tx,
        n_samples,
        seed: 11,
    }
}

#[test]
fn ecc_stays_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let m = rng.random_range(2..=6);
        let rank = rng.random_range(1..=m);
        let g = CMatrix::from_fn(m, rank, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let d = &g * g.adjoint();
        let d = (&d + d.adjoint()).unscale(2.0);
        let Ok(rho) = ecc(&RadiationMatrix::new(1e9, d, MatrixSource::FarField).unwrap()) else {
            continue;
        };
        for i in 0..m {
            assert!((rho.rho[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..m {
                let r = rho.rho[(i, j)];
                assert!((0.0..=1.0 + 1e-9).contains(&r), "rho = {r}");
                assert_eq!(r, rho.rho[(j, i)]);
            }
        }
    }
}

#[test]
fn ecc_hand_value_and_zero_efficiency() {
    let d = CMatrix::from_row_slice(2, 2, &[c(0.6), c(0.3), c(0.3), c(0.5)]);
    let rho = ecc(&RadiationMatrix::new(1e9, d, MatrixSource::FarField).unwrap()).unwrap();
    assert!((rho.rho[(0, 1)] - 0.3).abs() < 1e-15);
    assert!(rho.pairs_above(0.5).is_empty());

    let d = CMatrix::from_row_slice(2, 2, &[c(0.6), c(0.0), c(0.0), c(0.0)]);
    assert!(matches!(
        ecc(&RadiationMatrix::new(1e9, d, MatrixSource::FarField).unwrap()),
        Err(EvalError::UndefinedCorrelation { index: 1, .. })
    ));
}

#[test]
fn capacity_half_efficiency_is_a_3db_snr_shift() {
    let half = ReceiveMatrix::new(1e9, CMatrix::identity(2, 2).scale(0.5)).unwrap();
    let a = ergodic_capacity(&half, &cfg(20.0, 2, 20_000)).unwrap();
    let b = ideal_capacity(2, 20.0 - 10.0 * 2f64.log10(), 20_000, 11).unwrap();
    // Same seed and model: the channels are identical, only gamma moves.
    assert!((a.ergodic_capacity_bps_hz - b.ergodic_capacity_bps_hz).abs() < 1e-9);
}

#[test]
fn fully_correlated_pair_collapses_to_siso_with_double_gain() {
    let ones = CMatrix::from_element(2, 2, c(1.0));
    let r = build_receive_matrix(&RadiationMatrix::new(1e9, ones, MatrixSource::FarField).unwrap()).unwrap();
    let corr = ergodic_capacity(&r, &cfg(20.0, 1, 40_000)).unwrap();
    let siso = ergodic_capacity(
        &ReceiveMatrix::identity(1),
        &CapacityConfig {
            seed: 12,
            ..cfg(20.0 + 10.0 * 2f64.log10(), 1, 40_000)
        },
    )
    .unwrap();
    let se = (corr.sample_std_error.powi(2) + siso.sample_std_error.powi(2)).sqrt();
    assert!(
        (corr.ergodic_capacity_bps_hz - siso.ergodic_capacity_bps_hz).abs() < 4.0 * se,
        "{corr:?} vs {siso:?}"
    );
}

#[test]
fn identity_receive_matrix_is_the_ideal_system() {
    let d = RadiationMatrix::new(1e9, CMatrix::identity(3, 3), MatrixSource::FarField).unwrap();
    let a = ergodic_capacity(&build_receive_matrix(&d).unwrap(), &cfg(20.0, 3, 5_000)).unwrap();
    let b = ideal_capacity(3, 20.0, 5_000, 11).unwrap();
    assert_eq!(a.ergodic_capacity_bps_hz, b.ergodic_capacity_bps_hz);
}

#[test]
fn capacity_grows_with_snr_and_antennas() {
    let mut last = 0.0;
    for snr in [0.0, 5.0, 10.0, 20.0, 30.0] {
        let c = ideal_capacity(2, snr, 2_000, 3).unwrap().ergodic_capacity_bps_hz;
        assert!(c > last);
        last = c;
    }
    let mut last = 0.0;
    for m in [1, 2, 4, 7, 8] {
        let c = ideal_capacity(m, 20.0, 2_000, 3).unwrap().ergodic_capacity_bps_hz;
        assert!(c > last);
        last = c;
    }
}

#[test]
fn capacity_config_is_validated() {
    let r = ReceiveMatrix::identity(1);
    assert!(matches!(ergodic_capacity(&r, &cfg(20.0, 1, 0)), Err(EvalError::InvalidConfig(_))));
    assert!(matches!(ergodic_capacity(&r, &cfg(f64::NAN, 1, 10)), Err(EvalError::InvalidConfig(_))));
}

#[test]
fn losses_sum_to_one_with_field_data() {
    let grid = SphericalGrid::with_steps(5.0, 5.0).unwrap();
    for seed in 0..5 {
        let net = random_passive_network(6, 0.9, &[1e9], seed).unwrap();
        let sys = lossless_system_for(net, &grid).unwrap();
        let clusters = vec![
            ClusterDefinition::new("a", vec![1, 2, 3], 6).unwrap(),
            ClusterDefinition::new("b", vec![4, 5], 6).unwrap(),
            ClusterDefinition::new("c", vec![6], 6).unwrap(),
        ];
        let d_s = radiation_matrix_from_s(&sys.network, &clusters[0], 0, Scope::AllRows).unwrap();
        let a = optimal_excitation(&d_s).unwrap().excitation;
        let sets = sys.cluster_patterns(&clusters[0]);
        let pats: Vec<_> = sets.iter().map(|s| s.get(1e9).unwrap()).collect();
        let d_ff = radiation_matrix_from_fields(&pats).unwrap();
        let lb = loss_decomposition(&sys.network, &clusters, "a", &a, Some(&d_ff), 0).unwrap();
        assert!((lb.sum() - 1.0).abs() < 1e-6);
        assert!(lb.ohmic.unwrap().abs() < 1e-6);
        let lb = loss_decomposition(&sys.network, &clusters, "a", &a, None, 0).unwrap();
        assert!((lb.sum() - 1.0).abs() < 1e-12);
        assert!(lb.ohmic.is_none());
    }
}

#[test]
fn losses_need_a_partition() {
    let net = Network::new(vec![1e9], vec![CMatrix::zeros(3, 3)], 50.0).unwrap();
    let clusters = vec![
        ClusterDefinition::new("a", vec![1, 2], 3).unwrap(),
        ClusterDefinition::new("b", vec![2, 3], 3).unwrap(),
    ];
    let a = ExcitationVector::unit(2, 0, 1e9);
    assert!(matches!(
        loss_decomposition(&net, &clusters, "a", &a, None, 0),
        Err(EvalError::NotPartition(_))
    ));
    let clusters = &clusters[..1];
    assert!(matches!(
        loss_decomposition(&net, clusters, "a", &a, None, 0),
        Err(EvalError::NotPartition(_))
    ));
}

#[test]
fn total_reflection_and_perfect_match() {
    let clusters = vec![
        ClusterDefinition::new("a", vec![1], 2).unwrap(),
        ClusterDefinition::new("b", vec![2], 2).unwrap(),
    ];
    let a = ExcitationVector::unit(1, 0, 1e9);
    let eye = Network::new(vec![1e9], vec![CMatrix::identity(2, 2)], 50.0).unwrap();
    let lb = loss_decomposition(&eye, &clusters, "a", &a, None, 0).unwrap();
    assert_eq!((lb.mismatch, lb.coupling_by_cluster[0].1, lb.radiated), (1.0, 0.0, 0.0));
    let zero = Network::new(vec![1e9], vec![CMatrix::zeros(2, 2)], 50.0).unwrap();
    let lb = loss_decomposition(&zero, &clusters, "a", &a, None, 0).unwrap();
    assert_eq!((lb.mismatch, lb.coupling_by_cluster[0].1, lb.radiated), (0.0, 0.0, 1.0));
}
