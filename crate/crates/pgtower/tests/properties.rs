//! Randomized invariants of the engine.

mod common;

use proptest::prelude::*;

use common::*;
use pgtower::artin::{tkt_canonical, tkt_equivalent, Tkt, TktSymbol, Transfer};
use pgtower::fields::{load_dataset_str, to_csv, FieldRecord, Format};
use pgtower::pcgroup::series::layer;
use pgtower::pcgroup::{AbelianType, Element, PcPresentation, Subgroup};
use pgtower::snf::Diagonalization;
use pgtower::tower::FieldContext;

fn corpus() -> &'static [(String, PcPresentation)] {
    static C: std::sync::OnceLock<Vec<(String, PcPresentation)>> = std::sync::OnceLock::new();
    C.get_or_init(small_corpus)
}

/// Coclass-2 groups of order 3^5 with their layer-1 subgroups.
fn transfer_cases() -> &'static [(PcPresentation, Vec<Subgroup>)] {
    static C: std::sync::OnceLock<Vec<(PcPresentation, Vec<Subgroup>)>> = std::sync::OnceLock::new();
    C.get_or_init(|| {
        bootstrap()
            .nodes
            .iter()
            .filter(|v| v.order_exponent >= 4)
            .map(|v| (v.presentation.clone(), layer(&v.presentation, 1).unwrap()))
            .collect()
    })
}

fn elem_of(g: &PcPresentation, seed: &[u32]) -> Element {
    Element(seed.iter().take(g.ngens()).map(|x| x % g.prime()).collect())
}

fn sub_elem(g: &PcPresentation, h: &Subgroup, seed: &[u32]) -> Element {
    let exps: Vec<u32> = seed.iter().take(h.order_exponent()).map(|x| x % g.prime()).collect();
    h.element(g, &exps).unwrap()
}

fn add_mod(a: &[u64], b: &[u64], t: &AbelianType) -> Vec<u64> {
    a.iter().zip(b).zip(&t.0).map(|((x, y), e)| (x + y) % 3u64.pow(*e)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn collection_is_associative(gi in 0usize..1000, a in prop::collection::vec(0u32..3, 8), b in prop::collection::vec(0u32..3, 8), c in prop::collection::vec(0u32..3, 8)) {
        let (_, g) = &corpus()[gi % corpus().len()];
        let (x, y, z) = (elem_of(g, &a), elem_of(g, &b), elem_of(g, &c));
        let left = g.mul(&g.mul(&x, &y).unwrap(), &z).unwrap();
        let right = g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let inv = g.inverse(&x).unwrap();
        prop_assert!(g.mul(&x, &inv).unwrap().is_identity());
        let ord = g.order(&x).unwrap();
        prop_assert!(g.pow(&x, ord).unwrap().is_identity());
        prop_assert!(3u64.pow(ord.ilog(3)) == ord);
    }

    #[test]
    fn commutator_identity(gi in 0usize..1000, a in prop::collection::vec(0u32..3, 8), b in prop::collection::vec(0u32..3, 8)) {
        // x y = y x [x, y]
        let (_, g) = &corpus()[gi % corpus().len()];
        let (x, y) = (elem_of(g, &a), elem_of(g, &b));
        let lhs = g.mul(&x, &y).unwrap();
        let rhs = g.mul(&g.mul(&y, &x).unwrap(), &g.comm(&x, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn transfer_is_a_homomorphism_independent_of_transversal(
        ci in 0usize..1000, hi in 0usize..16,
        a in prop::collection::vec(0u32..3, 8), b in prop::collection::vec(0u32..3, 8),
        shifts in prop::collection::vec(prop::collection::vec(0u32..3, 8), 3),
    ) {
        let cases = transfer_cases();
        let (g, subs) = &cases[ci % cases.len()];
        let h = &subs[hi % subs.len()];
        let t = Transfer::new(g, h).unwrap();
        let ty = t.target_type().clone();
        let (x, y) = (elem_of(g, &a), elem_of(g, &b));
        let vx = t.apply(&x).unwrap();
        let vy = t.apply(&y).unwrap();
        let vxy = t.apply(&g.mul(&x, &y).unwrap()).unwrap();
        prop_assert_eq!(&vxy, &add_mod(&vx, &vy, &ty));
        let us: Vec<Element> = shifts.iter().map(|s| sub_elem(g, h, s)).collect();
        let shifted = Transfer::new(g, h).unwrap().with_shifted_transversal(&us).unwrap();
        prop_assert_eq!(shifted.apply(&x).unwrap(), vx);
    }
}

fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i != j {
            let src = m[j].clone();
            for (x, y) in m[i].iter_mut().zip(src) {
                *x += c * y;
            }
        }
    }
    m
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = b[0].len();
    a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn smith_form_recovers_planted_invariants(
        exps in prop::collection::vec(0u32..4, 1..5),
        lops in prop::collection::vec((0usize..5, 0usize..5, -2i64..3), 0..6),
        rops in prop::collection::vec((0usize..5, 0usize..5, -2i64..3), 0..6),
    ) {
        let n = exps.len();
        let d: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 3i64.pow(exps[i]) } else { 0 }).collect()).collect();
        let m = matmul(&matmul(&unimodular(n, &lops), &d), &unimodular(n, &rops));
        let bound: usize = exps.iter().sum::<u32>() as usize;
        let snf = Diagonalization::new(3, &m, n, bound).unwrap();
        let mut want: Vec<u32> = exps.iter().copied().filter(|&e| e > 0).collect();
        want.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(snf.invariants(), want.clone());
        for row in &m {
            prop_assert!(snf.coordinates(row).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn tkt_canonical_is_a_relabeling_invariant(
        syms in prop::collection::vec(0usize..6, 4),
        perm in Just(()).prop_perturb(|_, mut rng| {
            let mut p: Vec<usize> = (0..4).collect();
            for i in (1..4).rev() { p.swap(i, rng.random_range(0..=i)); }
            p
        }),
    ) {
        let sym = |s: usize| match s { 0 => TktSymbol::Total, 5 => TktSymbol::Trivial, k => TktSymbol::Partial(k.min(4)) };
        let a = Tkt(syms.iter().map(|&s| sym(s)).collect());
        let mut inv = [0usize; 4];
        for (i, &x) in perm.iter().enumerate() { inv[x] = i; }
        let b = Tkt((0..4).map(|i| match a.0[perm[i]] { TktSymbol::Partial(j) => TktSymbol::Partial(inv[j - 1] + 1), o => o }).collect());
        prop_assert!(tkt_equivalent(&a, &b).unwrap());
        prop_assert_eq!(tkt_canonical(&a), tkt_canonical(&b));
        let c = tkt_canonical(&a);
        prop_assert_eq!(tkt_canonical(&c), c.clone());
        prop_assert_eq!(Tkt::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn abelian_type_text_round_trip(exps in prop::collection::vec(1u32..9, 0..5)) {
        let t = AbelianType::new(exps);
        prop_assert_eq!(AbelianType::parse(&t.digits()).unwrap(), t.clone());
        prop_assert_eq!(t.order_exponent(), t.0.iter().sum::<u32>());
    }
}

fn typ() -> impl Strategy<Value = AbelianType> {
    prop::collection::vec(1u32..7, 1..4).prop_map(AbelianType::new)
}

fn record() -> impl Strategy<Value = FieldRecord> {
    let d = prop_oneof![Just(534824i64), Just(540365), Just(1030117), Just(-3299), Just(-4027)];
    (d, prop::collection::vec(typ(), 4), prop::collection::vec(0usize..5, 4), any::<bool>(), 1u32..3).prop_flat_map(
        |(d, tau1, kap, with_tau2, item)| {
            let sizes: Vec<usize> = tau1.iter().map(|t| (3usize.pow(t.rank() as u32) - 1) / 2).collect();
            let lists: Vec<_> = sizes.iter().map(|&n| prop::collection::vec(typ(), n)).collect();
            (Just((d, tau1, kap, with_tau2, item)), lists)
        },
    )
    .prop_map(|((d, tau1, kap, with_tau2, item), lists)| FieldRecord {
        discriminant: Some(d),
        cl_p_type: AbelianType::new(vec![1, 1]),
        kappa1: Tkt(kap.iter().map(|&k| if k == 0 { TktSymbol::Total } else { TktSymbol::Partial(k) }).collect()),
        tau1,
        tau2: with_tau2.then(|| lists.into_iter().enumerate().map(|(i, l)| (i + 1, l)).collect()),
        ctx: if d > 0 { FieldContext::real_quadratic() } else { FieldContext::complex_quadratic() },
        batch: Some("generated".into()),
        item: Some(item),
        note: None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dataset_csv_round_trip(recs in prop::collection::vec(record(), 1..6)) {
        let text = to_csv(&recs).unwrap();
        let back = load_dataset_str(&text, Format::Csv, true).unwrap();
        prop_assert_eq!(back.records, recs);
    }
}
