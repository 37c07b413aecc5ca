use std::sync::OnceLock;

use mvphi_core::coeff::{CoeffRing, Params};
use mvphi_core::embed::Embedding;
use mvphi_core::laurent::Laurent;
use mvphi_core::mvring::MvRing;
use mvphi_core::witt::{int_to_witt, witt_to_int, PrimeField, WittRing};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POINTS: [(u64, usize, usize); 4] = [(2, 1, 1), (3, 1, 1), (3, 2, 2), (5, 2, 2)];

fn ring(point: usize) -> &'static MvRing {
    static RINGS: OnceLock<Vec<MvRing>> = OnceLock::new();
    &RINGS.get_or_init(|| {
        POINTS
            .iter()
            .map(|&(p, f, h)| MvRing::new(&Params::new(p, f, h, 3, 12).unwrap()).unwrap())
            .collect()
    })[point]
}

fn embedding(point: usize) -> &'static Embedding {
    static EMBS: OnceLock<Vec<Embedding>> = OnceLock::new();
    &EMBS.get_or_init(|| (0..POINTS.len()).map(|i| Embedding::new(ring(i)).unwrap()).collect())[point]
}

fn sample(ring: &MvRing, seed: u64, nterms: usize) -> Laurent {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ring.random_element(&mut rng, nterms, (-2, 6), 1, &[12, 8, 4])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficient_ring_laws(pt in 0..4usize, a in prop::collection::vec(0u64..1000, 2), b in prop::collection::vec(0u64..1000, 2), c in prop::collection::vec(0u64..1000, 2)) {
        let (p, f, h) = POINTS[pt];
        let r = CoeffRing::new(&Params::new(p, f, h, 3, 12).unwrap());
        let (a, b, c) = (r.from_coords(&a[..h]), r.from_coords(&b[..h]), r.from_coords(&c[..h]));
        prop_assert_eq!(r.mul(&r.add(&a, &b), &c), r.add(&r.mul(&a, &c), &r.mul(&b, &c)));
        prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
        if let Some(inv) = r.inv(&a) {
            prop_assert_eq!(r.mul(&a, &inv), r.one());
        }
    }

    #[test]
    fn laurent_ring_laws(pt in 0..4usize, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let ring = ring(pt);
        let ctx = &ring.ctx;
        let (x, y, z) = (sample(ring, s1, 4), sample(ring, s2, 4), sample(ring, s3, 4));
        let xy = ctx.mul(&x, &y).unwrap();
        prop_assert!(ctx.agree(&xy, &ctx.mul(&y, &x).unwrap()));
        let lhs = ctx.mul(&xy, &z).unwrap();
        let rhs = ctx.mul(&x, &ctx.mul(&y, &z).unwrap()).unwrap();
        prop_assert!(ctx.agree(&lhs, &rhs));
        let dist = ctx.add(&ctx.mul(&x, &z).unwrap(), &ctx.mul(&y, &z).unwrap()).unwrap();
        prop_assert!(ctx.agree(&ctx.mul(&ctx.add(&x, &y).unwrap(), &z).unwrap(), &dist));
    }

    #[test]
    fn phi_is_multiplicative(pt in 0..4usize, s1 in any::<u64>(), s2 in any::<u64>()) {
        let ring = ring(pt);
        let ctx = &ring.ctx;
        let (x, y) = (sample(ring, s1, 3), sample(ring, s2, 3));
        let lhs = ring.apply_phi(&ctx.mul(&x, &y).unwrap()).unwrap();
        let rhs = ctx.mul(&ring.apply_phi(&x).unwrap(), &ring.apply_phi(&y).unwrap()).unwrap();
        prop_assert!(ctx.agree(&lhs, &rhs));
    }

    #[test]
    fn norms_are_multiplicative_when_certified(pt in 0..4usize, s1 in any::<u64>(), s2 in any::<u64>(), s in 1..4i64) {
        let ring = ring(pt);
        let (x, y) = (sample(ring, s1, 4), sample(ring, s2, 4));
        let xy = ring.ctx.mul(&x, &y).unwrap();
        let (a, b, c) = (ring.norm_s(&x, s), ring.norm_s(&y, s), ring.norm_s(&xy, s));
        if a.certified && b.certified && c.certified {
            let sum = a.value.zip(b.value).map(|(u, v)| u + v);
            prop_assert_eq!(c.value, sum);
        }
    }

    #[test]
    fn decomposition_roundtrips(pt in 0..4usize, seed in any::<u64>()) {
        let ring = ring(pt);
        let x = ring.fit_decomposable(&sample(ring, seed, 6)).unwrap();
        let d = ring.phi_decompose(&x).unwrap();
        prop_assert!(ring.ctx.agree(&ring.recompose(&d).unwrap(), &x));
    }

    #[test]
    fn element_json_roundtrips(pt in 0..4usize, seed in any::<u64>()) {
        let ring = ring(pt);
        let x = sample(ring, seed, 5);
        let text = serde_json::to_string(&ring.to_json(&x)).unwrap();
        let back = ring.from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn witt_integers_match(pi in 0..3usize, a in 0u64..125, b in 0u64..125) {
        let p = [2u64, 3, 5][pi];
        let m = p.pow(3);
        let (a, b) = (a % m, b % m);
        let wr = WittRing::new(PrimeField(p), 3).unwrap();
        let (u, v) = (int_to_witt(p, 3, a), int_to_witt(p, 3, b));
        prop_assert_eq!(witt_to_int(p, 3, &wr.mul(&u, &v)), a * b % m);
        prop_assert_eq!(witt_to_int(p, 3, &wr.add(&u, &v)), (a + b) % m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn iota_is_a_ring_map(pt in 0..4usize, s1 in any::<u64>(), s2 in any::<u64>()) {
        let ring = ring(pt);
        let emb = embedding(pt);
        let wctx = &emb.w.ctx;
        let (x, y) = (sample(ring, s1, 3), sample(ring, s2, 3));
        let (ix, iy) = (emb.iota(&x).unwrap(), emb.iota(&y).unwrap());
        let sum = emb.iota(&ring.ctx.add(&x, &y).unwrap()).unwrap();
        prop_assert!(wctx.agree(&sum, &wctx.add(&ix, &iy).unwrap()));
        let prod = emb.iota(&ring.ctx.mul(&x, &y).unwrap()).unwrap();
        prop_assert!(wctx.agree(&prod, &wctx.mul(&ix, &iy).unwrap()));
    }
}
