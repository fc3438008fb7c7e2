use cubex::boolfn::{degree, mobius_forward, mobius_inverse, omega_member, rm_distance, AnfCoeffs, BoolFn};
use cubex::cube::{Config, CubePoint, Face, Isometry};
use cubex::io::{measure_to_string, parse_measure};
use cubex::joinings::dbar_distance;
use cubex::measures::{cylinder_tv, ergodic_decompose, extreme_points, is_invariant, ExactMeasure};
use cubex::rational::rat;
use cubex::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn isometry(n: usize) -> impl Strategy<Value = Isometry> {
    (Just((1..=n).collect::<Vec<_>>()).prop_shuffle(), 0u32..1 << n)
        .prop_map(move |(perm, t)| Isometry::new(&perm, CubePoint::new(n, t).unwrap()).unwrap())
}

fn boolfn(n: usize) -> impl Strategy<Value = BoolFn> {
    any::<u64>().prop_map(move |seed| BoolFn::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
}

fn config(n: usize, k: u32) -> impl Strategy<Value = Config> {
    proptest::collection::vec(0..k as u16, 1 << n).prop_map(move |v| Config::new(n, k, v).unwrap())
}

/// A random mixture of the invariant extreme points at `n = 2`, `k = 2`.
fn invariant_measure() -> impl Strategy<Value = ExactMeasure> {
    proptest::collection::vec(0i64..4, 6).prop_filter_map("all weights zero", |w| {
        let total: i64 = w.iter().sum();
        if total == 0 {
            return None;
        }
        let ext = extreme_points(2, 2).unwrap();
        let parts: Vec<(BigRational, &ExactMeasure)> =
            w.iter().zip(&ext).filter(|(w, _)| **w > 0).map(|(w, m)| (rat(*w, total), m)).collect();
        Some(ExactMeasure::mixture(&parts).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_is_an_involution(n in 0usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = BoolFn::random(n, &mut rng).unwrap();
        prop_assert_eq!(mobius_forward(&mobius_inverse(&g)), g);
        let u = AnfCoeffs::random(n, &mut rng).unwrap();
        prop_assert_eq!(mobius_inverse(&mobius_forward(&u)), u);
    }

    #[test]
    fn hex_round_trip(g in boolfn(7)) {
        prop_assert_eq!(BoolFn::from_hex(7, &g.to_hex()).unwrap(), g);
    }

    #[test]
    fn degree_is_isometry_invariant(g in boolfn(6), h in isometry(6)) {
        prop_assert_eq!(degree(&g.act(&h).unwrap()), degree(&g));
    }

    #[test]
    fn degree_of_sum_is_bounded(a in boolfn(6), b in boolfn(6)) {
        prop_assert!(degree(&a.xor(&b).unwrap()) <= degree(&a).max(degree(&b)));
    }

    #[test]
    fn omega_is_monotone_in_r(g in boolfn(5)) {
        let members: Vec<bool> = (1..=5).map(|r| omega_member(&g, r).unwrap()).collect();
        prop_assert!(members.windows(2).all(|w| !w[0] || w[1]));
    }

    #[test]
    fn rm_distance_ignores_low_degree_shifts(g in boolfn(6), coeffs in any::<u8>()) {
        // shift by an affine function
        let shift = BoolFn::from_fn(6, |x| ((x & u32::from(coeffs >> 1)).count_ones() + u32::from(coeffs & 1)) % 2 == 1).unwrap();
        prop_assert_eq!(rm_distance(&g.xor(&shift).unwrap(), 1).unwrap(), rm_distance(&g, 1).unwrap());
    }

    #[test]
    fn isometry_group_laws(g in isometry(5), h in isometry(5), f in isometry(5), x in 0u32..32) {
        let p = CubePoint::new(5, x).unwrap();
        let gh = g.compose(&h).unwrap();
        prop_assert_eq!(gh.apply(p).unwrap(), g.apply(h.apply(p).unwrap()).unwrap());
        prop_assert_eq!(gh.compose(&f).unwrap(), g.compose(&h.compose(&f).unwrap()).unwrap());
        prop_assert!(g.compose(&g.inverse()).unwrap().is_identity());
        prop_assert!(g.inverse().compose(&g).unwrap().is_identity());
        prop_assert_eq!(g.apply(p).unwrap().hamming(&g.apply(CubePoint::origin(5).unwrap()).unwrap()), p.weight());
    }

    #[test]
    fn config_action_is_contravariant(c in config(3, 3), g in isometry(3), h in isometry(3)) {
        prop_assert_eq!(c.act(&g).unwrap().act(&h).unwrap(), c.act(&g.compose(&h).unwrap()).unwrap());
    }

    #[test]
    fn faces_map_to_faces(g in isometry(4), free in 0u32..16, base in 0u32..16) {
        let face = Face::from_masks(4, free, base & !free).unwrap();
        let image = face.image(&g).unwrap();
        prop_assert_eq!(image.dim(), face.dim());
        let mut mapped: Vec<u32> = face.points().map(|x| g.apply_index(x)).collect();
        let mut direct: Vec<u32> = image.points().collect();
        mapped.sort_unstable();
        direct.sort_unstable();
        prop_assert_eq!(mapped, direct);
    }

    #[test]
    fn measure_text_round_trip(mu in invariant_measure()) {
        let text = measure_to_string(&mu);
        let back = parse_measure(&text).unwrap();
        prop_assert_eq!(measure_to_string(&back), text);
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn decomposition_reconstructs(mu in invariant_measure()) {
        prop_assert!(is_invariant(&mu));
        let d = ergodic_decompose(&mu).unwrap();
        prop_assert_eq!(d.reconstruct().unwrap(), mu);
        prop_assert!(d.components().iter().map(|(_, w)| w.clone()).sum::<BigRational>().is_one());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dbar_is_a_bounded_symmetric_premetric(mu in invariant_measure(), nu in invariant_measure()) {
        let d = dbar_distance(&mu, &nu).unwrap();
        prop_assert_eq!(&d, &dbar_distance(&nu, &mu).unwrap());
        prop_assert!(d >= BigRational::zero() && d <= BigRational::one());
        prop_assert_eq!(d.is_zero(), mu == nu);
        let v = Face::vertex(CubePoint::origin(2).unwrap());
        prop_assert!(d >= cylinder_tv(&mu, &nu, &v).unwrap());
    }
}
