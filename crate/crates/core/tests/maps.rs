use holoembed_core::maps::HoloMap;
use holoembed_core::C2;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn rc(rng: &mut ChaCha8Rng, r: f64) -> C {
    C::from_polar(rng.gen_range(0.0..r), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Uniform point in the ball of radius `r` of C^2 = R^4.
fn ball_point(rng: &mut ChaCha8Rng, r: f64) -> C2<f64> {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-r..r));
        let x = C2::from_parts(v[0], v[1], v[2], v[3]);
        if x.norm() <= r {
            return x;
        }
    }
}

fn random_leaf(rng: &mut ChaCha8Rng) -> HoloMap<f64> {
    let one = C::new(1.0, 0.0);
    match rng.gen_range(0..7) {
        0 => HoloMap::contraction(
            C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.3)),
            C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.3)),
        )
        .unwrap(),
        1 => HoloMap::linear(rc(rng, 0.4), rc(rng, 0.4)).unwrap(),
        2 => HoloMap::matrix([[one + rc(rng, 0.3), rc(rng, 0.3)], [rc(rng, 0.3), one + rc(rng, 0.3)]]).unwrap(),
        3 => HoloMap::translation(C2::new(rc(rng, 0.5), rc(rng, 0.5))).unwrap(),
        4 => {
            let deg = rng.gen_range(0..4);
            HoloMap::shear(rng.gen_range(0..2), (0..=deg).map(|_| rc(rng, 0.3)).collect()).unwrap()
        }
        5 => HoloMap::twist(vec![rc(rng, 0.1), rc(rng, 0.05)]).unwrap(),
        _ => HoloMap::quadratic_twist(rc(rng, 0.2)),
    }
}

/// Three leaves, nested at random: `[a, b, c]`, `[[a, b], c]` or `[a, [b, c]]`.
fn random_tree(rng: &mut ChaCha8Rng) -> HoloMap<f64> {
    let (a, b, c) = (random_leaf(rng), random_leaf(rng), random_leaf(rng));
    match rng.gen_range(0..3) {
        0 => HoloMap::Compose(vec![a, b, c]),
        1 => HoloMap::Compose(vec![HoloMap::Compose(vec![a, b]), c]),
        _ => HoloMap::Compose(vec![a, HoloMap::Compose(vec![b, c])]),
    }
}

fn bits(x: C2<f64>) -> [u64; 4] {
    x.to_array().map(f64::to_bits)
}

#[test]
fn twist_preserves_product_on_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let t = HoloMap::twist(vec![rc(&mut rng, 1.0), rc(&mut rng, 0.5), rc(&mut rng, 0.2)]).unwrap();
        for _ in 0..1000 {
            let x = ball_point(&mut rng, 2.0);
            let y = t.eval(x).unwrap();
            let zw = x.z * x.w;
            assert!((y.z * y.w - zw).norm() <= 1e-12 * zw.norm().max(f64::MIN_POSITIVE), "{x:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng);
        let g = f.inverse().unwrap();
        for _ in 0..20 {
            let x = ball_point(&mut rng, 2.0);
            let back = g.eval(f.eval(x).unwrap()).unwrap();
            prop_assert!(back.dist(&x) <= 1e-10, "F^-1 F: {:e}", back.dist(&x));
            let fwd = f.eval(g.eval(x).unwrap()).unwrap();
            prop_assert!(fwd.dist(&x) <= 1e-10, "F F^-1: {:e}", fwd.dist(&x));
        }
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g, h) = (random_tree(&mut rng), random_tree(&mut rng), random_leaf(&mut rng));
        // (F ∘ G) ∘ H applies H, then G, then F
        let left = HoloMap::Compose(vec![h.clone(), HoloMap::Compose(vec![g.clone(), f.clone()])]);
        let right = HoloMap::Compose(vec![HoloMap::Compose(vec![h, g]), f]);
        for _ in 0..20 {
            let x = ball_point(&mut rng, 2.0);
            prop_assert_eq!(bits(left.eval(x).unwrap()), bits(right.eval(x).unwrap()));
        }
    }

    #[test]
    fn shears_leave_other_coordinate_untouched(seed in any::<u64>(), axis in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HoloMap::shear(axis, (0..5).map(|_| rc(&mut rng, 3.0)).collect()).unwrap();
        let r = HoloMap::RationalShear { poles: vec![rc(&mut rng, 1.0) + 5.0], coeffs: vec![rc(&mut rng, 1.0)] };
        for _ in 0..20 {
            let x = ball_point(&mut rng, 2.0);
            prop_assert_eq!(s.eval(x).unwrap().coord(1 - axis), x.coord(1 - axis));
            prop_assert_eq!(r.eval(x).unwrap().z, x.z);
        }
    }

    #[test]
    fn serde_round_trip_is_lossless(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng);
        let json = serde_json::to_string(&f).unwrap();
        let back: HoloMap<f64> = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &f);
        let x = ball_point(&mut rng, 2.0);
        prop_assert_eq!(bits(back.eval(x).unwrap()), bits(f.eval(x).unwrap()));
    }
}
