use ripforge::dictionaries::cdf97_dictionary;
use ripforge::ensembles::{draw_ensemble, draw_row_selector, EnsembleKind};
use ripforge::factorize::{build_sensing, factorize, Construction};
use ripforge::harness::{run_phase_transition, run_phase_transition_with, Arm, DictSource, PhaseTransitionConfig, SparseSignalSpec};
use ripforge::linalg::matfile::{decode, encode_mat, MatFile};
use ripforge::recovery::{recover_benchmark, recover_synthesis, SparseRecoveryConfig};
use ripforge::{Mat, Seed};

#[test]
fn wavelet_dictionary_end_to_end() {
    let dict = cdf97_dictionary(64, 3, 256, Seed(1)).unwrap();
    let a = draw_ensemble(EnsembleKind::Gaussian, 64, 256, Seed(2));
    let fact = factorize(Construction::Range, &dict.d, &a).unwrap();
    assert!(fact.residual <= 1e-8);
    let sel = draw_row_selector(48, 64, Seed(3)).unwrap();
    let system = build_sensing(&fact, &dict.d, &sel).unwrap();
    assert!(system.composed.sub(&system.ensemble_side()).frobenius() <= 1e-8 * dict.d.frobenius());

    // A 3-sparse combination of atoms, measured through S = ℰG⁻¹.
    let x = SparseSignalSpec { n: 256, k: 3 }.draw(Seed(4));
    let signal = dict.d.matvec(&x);
    let z = system.s.matvec(&signal);
    let ours = recover_synthesis(&system, &z, &SparseRecoveryConfig::new(3)).unwrap();
    let err: f64 = ours.estimate.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
    assert!(err < 1e-6, "ℓ₁ error {err}");

    let zb = system.benchmark().matvec(&x);
    let theirs = recover_benchmark(&system, &zb, &SparseRecoveryConfig::new(3)).unwrap();
    let err: f64 = theirs.estimate.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
    assert!(err < 1e-6);
}

#[test]
fn factors_survive_the_matrix_format() {
    let d = draw_ensemble(EnsembleKind::Bernoulli, 16, 40, Seed(5));
    let a = draw_ensemble(EnsembleKind::Gaussian, 16, 40, Seed(6));
    let f = factorize(Construction::Spectral, &d, &a).unwrap();
    let back = |m: &Mat| match decode(&encode_mat(m)).unwrap() {
        MatFile::Real(m) => m,
        MatFile::Complex(_) => panic!("expected a real matrix"),
    };
    let (g, a2, h) = (back(&f.g), back(&f.a), back(&f.h));
    assert_eq!((&g, &a2, &h), (&f.g, &f.a, &f.h));
    assert!(g.matmul(&a2).matmul(&h).sub(&d).frobenius() <= 1e-8 * d.frobenius());
}

#[test]
fn fully_determined_point_recovers_almost_always() {
    // Square dictionary, m = n: both arms solve a determined system.
    let n = 32;
    let d = draw_ensemble(EnsembleKind::Gaussian, n, n, Seed(7));
    let cfg = PhaseTransitionConfig {
        n,
        l: n,
        dict_source: DictSource::File,
        sparsity_levels: vec![2],
        cs_ratios: vec![1.0],
        trials: 100,
        base_seed: Seed(8),
        ..PhaseTransitionConfig::desk()
    };
    let rec = run_phase_transition_with(&cfg, &d).unwrap();
    for arm in [Arm::Factored, Arm::Benchmark] {
        let p = rec.curve(2, arm)[0].1;
        assert!(p >= 0.99, "{arm:?}: {p}");
    }
}

#[test]
fn ksvd_dictionary_sweep_runs() {
    let cfg = PhaseTransitionConfig {
        n: 32,
        l: 16,
        dict_source: DictSource::Ksvd,
        ksvd_iters: 2,
        ksvd_sparsity: 3,
        sparsity_levels: vec![2],
        cs_ratios: vec![0.25, 0.5],
        trials: 10,
        base_seed: Seed(9),
        ..PhaseTransitionConfig::desk()
    };
    let d = cfg.dictionary().unwrap();
    assert_eq!(d.shape(), (16, 32));
    let rec = run_phase_transition(&cfg).unwrap();
    assert_eq!(rec.points.len(), 4);
    assert_eq!(rec.input_hash.len(), 64);
}
