//! The generic layers instantiated at `f32`, checked against `f64`.

use bme_core::bayes::{bayes_estimator, bayes_update, basis_povm, total_probability};
use bme_core::designs::{clifford_group_qubit, frame_potential};
use bme_core::fidelity::fidelity;
use bme_core::pgm::{identity_corpus, verify_identities};
use bme_core::sampling::{build_ensemble, haar_unitary, RngStream};
use bme_core::{bayes::Posterior, DensityMatrix32, Ensemble, Ensemble32, EnsembleKind, Unitary32};

#[test]
fn f32_pipeline_tracks_f64() {
    // Same stream: the f32 samplers draw the same normals, rounded.
    let e64: Ensemble = build_ensemble(EnsembleKind::Ginibre, 3, 12, &mut RngStream::new(1, 0)).unwrap();
    let e32: Ensemble32 = build_ensemble(EnsembleKind::Ginibre, 3, 12, &mut RngStream::new(1, 0)).unwrap();
    let u64_ = haar_unitary(3, &mut RngStream::new(2, 0)).unwrap();
    let u32_: Unitary32 = haar_unitary(3, &mut RngStream::new(2, 0)).unwrap();
    let (p64, p32) = (basis_povm(&u64_).unwrap(), basis_povm(&u32_).unwrap());

    let t64 = total_probability(&p64, &e64, &Posterior::prior(&e64)).unwrap();
    let t32 = total_probability(&p32, &e32, &Posterior::prior(&e32)).unwrap();
    for x in 0..3 {
        assert!((t64[x] - t32[x] as f64).abs() < 1e-5);
    }
    let post64 = bayes_update(&Posterior::prior(&e64), &e64, &p64, 1).unwrap();
    let post32 = bayes_update(&Posterior::prior(&e32), &e32, &p32, 1).unwrap();
    let est64 = bayes_estimator(&e64, &post64).unwrap();
    let est32: DensityMatrix32 = bayes_estimator(&e32, &post32).unwrap();
    for a in 0..e64.len() {
        let f64_ = fidelity(e64.state(a), &est64).unwrap();
        let f32_ = fidelity(e32.state(a), &est32).unwrap();
        assert!((f64_ - f32_ as f64).abs() < 1e-4, "{f64_} {f32_}");
    }
}

#[test]
fn f32_identities_and_designs() {
    let corpus: Vec<Ensemble32> = identity_corpus(5, 20).unwrap();
    let report = verify_identities(&corpus).unwrap();
    assert!(report.worst() < 1e-4, "{report:?}");
    let cliff = clifford_group_qubit::<f32>().unwrap();
    assert!((frame_potential(&cliff, 2) - 2.0).abs() < 1e-4);
}
