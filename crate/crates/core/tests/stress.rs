//! One-off stress sweep (ignored by default): wider seeds than the
//! acceptance campaigns, same assertions.

use prony2d::generators::{random_exppoly2d, random_rectilinear_polygon, rng_from_seed};
use prony2d::geometry::SlopeSet;
use prony2d::pipeline::{identify_polygon, sample_polygon};
use prony2d::recover2d::{recover_auto, recover_layered, MultiplicityMap};
use prony2d::sampling::{layered_grid, polygon_grid, FourierSampleSet};
use rand::Rng;

#[test]
#[ignore]
fn stress_layered_and_auto() {
    let mut failures = 0;
    for seed in 0..40u64 {
        let mut rng = rng_from_seed(seed.wrapping_mul(0x9E37_79B9));
        for _ in 0..25 {
            let n_bound = rng.random_range(1..=6);
            let d_bound = rng.random_range(1..=2);
            let truth = random_exppoly2d(&mut rng, n_bound, d_bound);
            let set = layered_grid(n_bound, d_bound).unwrap();
            let samples =
                FourierSampleSet::from_fn(&set, |(m, n)| truth.eval((m as f64, n as f64)));
            let mm = MultiplicityMap::from_exppoly(&truth, 1e-6);
            match recover_layered(&samples, n_bound, d_bound, &mm) {
                Ok(rep) if rep.result.approx_eq(&truth, 1e-6) => {}
                other => {
                    failures += 1;
                    eprintln!("layered seed {seed}: {other:?}");
                }
            }
            match recover_auto(&samples, n_bound, d_bound) {
                Ok(rep) => {
                    if !rep.result.approx_eq(&truth, 1e-6) {
                        failures += 1;
                        eprintln!("auto WRONG seed {seed}");
                    }
                }
                Err(e) => eprintln!("auto inconclusive seed {seed}: {e}"),
            }
        }
    }
    assert_eq!(failures, 0, "{failures} stress failures");
}

#[test]
#[ignore]
fn stress_identify() {
    let mut rng = rng_from_seed(777);
    for trial in 0..300 {
        let p = random_rectilinear_polygon(&mut rng, 12);
        let n = p.len();
        let set = polygon_grid(2, n).unwrap();
        let samples = sample_polygon(&p, &set);
        let got = identify_polygon(&samples, &SlopeSet::axis(), n)
            .unwrap_or_else(|e| panic!("trial {trial} ({n} vertices): {e}"));
        let m = got.len();
        assert_eq!(m, n, "trial {trial}");
        let best = (0..n)
            .map(|s| {
                (0..n)
                    .map(|i| (p.vertices()[i] - got.vertices()[(i + s) % n]).norm())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "trial {trial}: vertex error {best}");
    }
}
