use holoembed_core::basin::*;
use holoembed_core::maps::HoloMap;
use holoembed_core::{C2f64, Cx64, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Cx64 {
    Cx64::new(re, im)
}

#[test]
fn constant_halving_rate() {
    let seq = AutoSequence::constant(HoloMap::halving()).unwrap();
    let pts: Vec<C2f64> = unit_ball_samples(1000, 11).into_iter().map(|x| x * 5.0).collect();
    for m in basin_membership_all(&seq, &pts, &BasinQuery::default()) {
        let Membership::Converged { rate, .. } = m else { panic!("{m:?}") };
        assert!((0.45..=0.55).contains(&rate));
    }
}

/// `A ∘ twist(c_j)` with seeded `|c_j| <= 0.02`.
fn perturbed(n: usize, seed: u64) -> AutoSequence<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let maps = (0..n)
        .map(|_| {
            let t = HoloMap::quadratic_twist(c(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02)));
            t.then(HoloMap::halving())
        })
        .collect();
    AutoSequence::new(maps, Some(HoloMap::halving())).unwrap()
}

#[test]
fn perturbed_sequence_converges_on_ball() {
    let seq = perturbed(40, 3);
    let ball = unit_ball_samples(2000, 4);
    for f in seq.maps() {
        assert!(check_star(f, 0.05, &ball).pass);
    }
    for m in basin_membership_all(&seq, &ball, &BasinQuery::default()) {
        assert!(m.converged(), "{m:?}");
    }
}

#[test]
fn prefix_matches_stepwise_orbit() {
    let seq = perturbed(6, 8);
    let x = C2f64::new(c(0.3, -0.2), c(0.1, 0.4));
    let a = seq.prefix(6).eval(x).unwrap();
    let b = seq.orbit_point(x, 6).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn star_passing_sequences_converge(seed in 0u64..1000, scale in 0.0f64..1.0) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ball = unit_ball_samples(300, seed);
        let maps: Vec<HoloMap<f64>> = (0..30)
            .map(|_| HoloMap::quadratic_twist(c(scale * rng.gen_range(-0.1..0.1), 0.0)).then(HoloMap::halving()))
            .collect();
        prop_assume!(maps.iter().all(|f| check_star(f, 0.1, &ball).pass));
        let seq = AutoSequence::new(maps, Some(HoloMap::halving())).unwrap();
        for x in &ball {
            prop_assert!(basin_membership(&seq, *x, &BasinQuery::default()).converged());
        }
    }

    #[test]
    fn pusher_never_short(zc in 1.5f64..6.0, r in 2.0f64..50.0, eps in 1e-3f64..1e-1) {
        let v: Vec<C2f64> = (0..50).map(|k| C2f64::new(c(zc + k as f64 * 0.1, 0.0), c(0.0, k as f64))).collect();
        let req = PusherRequest { k: unit_ball_samples(200, 1), v, radius: r, eps, fixed: Some(C2f64::origin()) };
        match ModelPusher::default().push(&req) {
            Ok(res) => {
                let (d, e) = pusher_margins(&res.map, &req).unwrap();
                prop_assert!(d < eps && e >= r);
            }
            Err(e) => {
                let capped = matches!(e, Error::DegreeCap { .. });
                prop_assert!(capped, "{e:?}");
            }
        }
    }
}
