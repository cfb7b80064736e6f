use holoembed_core::embed::*;
use holoembed_core::geometry::{sample_torus_minus, Lattice, Removed};
use holoembed_core::maps::HoloMap;
use holoembed_core::{C2f64, Cx64, WeierstrassP64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Cx64 {
    Cx64::new(re, im)
}

fn two_discs() -> TorusSurface<f64> {
    let l = Lattice::square();
    let removed = vec![Removed::disc(c(-0.25, 0.0), 0.12, l).unwrap(), Removed::disc(c(0.25, 0.1), 0.12, l).unwrap()];
    TorusSurface::new(l, removed, 720).unwrap()
}

/// Pairwise oracle: bucket images on a grid in C^2 with cells no smaller
/// than the minimum distance and compare neighbouring cells only.
fn hashed_min_distance(pts: &[C2f64], cell: f64) -> f64 {
    use std::collections::HashMap;
    let key = |p: &C2f64| p.to_array().map(|v| (v / cell).floor() as i64);
    let mut buckets: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let k = key(p);
        for d in 0..81 {
            let off = [d % 3, (d / 3) % 3, (d / 9) % 3, d / 27].map(|o| o as i64 - 1);
            let kk = [k[0] + off[0], k[1] + off[1], k[2] + off[2], k[3] + off[3]];
            for &j in buckets.get(&kk).map(|v| v.as_slice()).unwrap_or(&[]) {
                if j != i {
                    best = best.min(p.dist(&pts[j]));
                }
            }
        }
    }
    best
}

#[test]
fn generic_injective_on_ten_thousand_points() {
    let l = Lattice::square();
    let (p, q) = (c(0.1, 0.1), c(0.6, 0.35));
    let removed = vec![Removed::point(p, l), Removed::point(q, l)];
    let grid = sample_torus_minus(&l, &removed, 0.0095, 0.02).unwrap();
    assert!(grid.len() >= 10_000, "{}", grid.len());
    let psi = EmbeddingMap::generic(WeierstrassP64::new(l), p, q).unwrap();
    let r = verify_injectivity(&psi, &grid, &InjectivityParams::default());
    assert!(r.all_pass(), "{r:?}");
    let imgs = psi.eval_all(grid.points()).unwrap();
    let (d, _, _) = closest_pair(&imgs).unwrap();
    // any pair distance bounds the minimum, so neighbouring cells suffice
    let oracle = hashed_min_distance(&imgs, imgs[0].dist(&imgs[1]).min(imgs[2].dist(&imgs[3])));
    assert_eq!(d, oracle);
}

#[test]
fn degenerate_injective_on_ten_thousand_points() {
    let l = Lattice::square();
    let p = c(0.1, 0.1);
    let q = p + l.omega1() * 0.5;
    let removed = vec![Removed::point(p, l), Removed::point(q, l)];
    let grid = sample_torus_minus(&l, &removed, 0.0095, 0.02).unwrap();
    assert!(grid.len() >= 10_000);
    let psi = EmbeddingMap::degenerate(WeierstrassP64::new(l), p, q).unwrap();
    let r = verify_injectivity(&psi, &grid, &InjectivityParams::default());
    assert!(r.all_pass(), "{r:?}");
}

#[test]
fn two_disc_flow_marks_both_boundaries() {
    let t = two_discs();
    let wp = WeierstrassP64::new(*t.lattice());
    let pq = choose_pq_for_discs(&t, &wp, &PqParams::default()).unwrap();
    let psi = build_embedding(&t, &wp, pq.p, pq.q).unwrap();
    let grid = t.grid(0.02, 0.005).unwrap();
    let surf = psi.eval_all(grid.points()).unwrap();
    let curves: Vec<Curve2<f64>> = (0..2)
        .map(|i| {
            let m = psi;
            map_curve(t.boundary(i).unwrap(), move |z| m.eval(z)).unwrap()
        })
        .collect();
    let np = NormalizeParams::default();
    let c1 = normalize_cord1(&curves, &np).unwrap();
    let apply = |m: &HoloMap<f64>, cs: &[Curve2<f64>], s: &[C2f64]| {
        (cs.iter().map(|c| map_curve2(c, m).unwrap()).collect::<Vec<_>>(), m.eval_all(s).unwrap())
    };
    let (curves, surf) = apply(&c1.map, &curves, &surf);
    let c2 = normalize_cord2(&surf, &curves, Some(0), &np).unwrap();
    let (curves, surf) = apply(&c2.map, &curves, &surf);
    let p1 = c2.marked[0];
    let shift = HoloMap::translation(C2f64::new(-p1.point.z, c(0.0, 0.0))).unwrap();
    let (curves, surf) = apply(&shift, &curves, &surf);
    let p1 = MarkedPoint { point: curves[0].points()[p1.index], ..p1 };
    let (_tw, res) = twist_to_second_boundary(&surf, [&curves[0], &curves[1]], &p1, &TwistParams::default(), &np).unwrap();
    assert!(res.report.all_pass(), "{:?}", res.report);
    let (curves, surf) = apply(&res.map, &curves, &surf);
    let m1 = MarkedPoint { point: curves[0].points()[p1.index], tangent: curves[0].tangents()[p1.index], ..p1 };
    let m2 = res.marked[0];
    let r = verify_theorem_main_hypotheses(&surf, &[m1, m2], &np);
    assert!(r.all_pass(), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dichotomy_total(px in -0.5f64..0.5, py in -0.5f64..0.5, qx in -0.5f64..0.5, qy in -0.5f64..0.5, half in 0usize..4) {
        let l = Lattice::square();
        let wp = WeierstrassP64::new(l);
        let p = c(px, py);
        // every fourth case lands on a half-period translate
        let q = if half < 3 { p + l.half_periods()[half] } else { c(qx, qy) };
        prop_assume!(l.torus_distance(p, q) > 1e-6);
        let g = EmbeddingMap::generic(wp, p, q);
        let d = EmbeddingMap::degenerate(wp, p, q);
        prop_assert!(g.is_ok() ^ d.is_ok());
        let m = g.or(d).unwrap();
        prop_assert!(m.ramification_margin() > 1e-9);
    }
}
