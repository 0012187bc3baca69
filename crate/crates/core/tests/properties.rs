mod common;

use std::sync::OnceLock;

use burnside_lab::cocycle::{birkhoff_derivative_sum, full_word_log_stretch, psi, SymbolicWord};
use burnside_lab::diffeo::{Letter, Primitive};
use burnside_lab::pesin::{lipschitz_check_with, shell_sums, MetricField, Weighting};
use burnside_lab::recurrence::element_order;
use burnside_lab::sphere::{fibonacci_sphere, SpherePoint, TangentVector};
use burnside_lab::words::{enumerate_ball, GeneratorSet, NamedPrimitive, WordBall};
use common::*;
use proptest::prelude::*;

fn probe_ball() -> &'static (GeneratorSet, WordBall) {
    static BALL: OnceLock<(GeneratorSet, WordBall)> = OnceLock::new();
    BALL.get_or_init(|| {
        let set = free_rotations();
        let ball = enumerate_ball(&set, 1);
        (set, ball)
    })
}

fn letters(count: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..count, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(i, inv)| Letter::new(i, inv)).collect())
}

fn unit_point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SpherePoint::normalized([r * phi.cos(), r * phi.sin(), z]).unwrap()
    })
}

fn any_set() -> impl Strategy<Value = GeneratorSet> {
    (0..5usize).prop_map(|i| all_sets().swap_remove(i).1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fingerprints_agree_exactly_when_reduced_words_agree(
        u in letters(2, 5),
        v in letters(2, 5),
        pad in 0usize..4,
    ) {
        let (set, ball) = probe_ball();
        // Pad `v` with a cancelling pair so equal elements come from distinct words.
        let mut v = v;
        let l = Letter::new(pad % 2, pad >= 2);
        v.insert(v.len() / 2, l);
        v.insert(v.len() / 2 + 1, l.inverted());
        let fu = ball.fingerprint(&set.word(u.clone()).unwrap());
        let fv = ball.fingerprint(&set.word(v.clone()).unwrap());
        let same = freely_reduce(&u) == freely_reduce(&v);
        prop_assert_eq!(fu.matches(&fv, ball.config().cell_size), same);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn balls_grow_monotonically(set in any_set(), n in 1usize..5) {
        let small = enumerate_ball(&set, n);
        let big = enumerate_ball(&set, n + 1);
        prop_assert!(small.counts().windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(&big.counts()[..=n], small.counts());
        for i in 0..small.len() {
            let j = big.lookup(&small.word(i));
            prop_assert!(j.is_some());
            prop_assert_eq!(big.word_length(j.unwrap()), small.word_length(i));
        }
    }

    #[test]
    fn stepwise_cocycle_sum_matches_whole_word(
        set in any_set(),
        core in letters(2, 6),
        n in 1usize..50,
        x in unit_point(),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let core: Vec<Letter> = if core.is_empty() { vec![Letter::new(0, false)] } else { core };
        let core: Vec<Letter> = core.into_iter().map(|l| Letter::new(l.index % set.len(), l.inverse)).collect();
        let word = SymbolicWord::periodic(core).unwrap();
        let v = TangentVector::from_frame(x, [angle.cos(), angle.sin()]);
        let stepwise = birkhoff_derivative_sum(&set, &word, &v, n).unwrap();
        let whole = full_word_log_stretch(&set, &word, &v, n).unwrap();
        prop_assert!((stepwise - whole).abs() < 1e-9, "{} vs {}", stepwise, whole);
    }

    #[test]
    fn cocycle_ignores_vector_length(
        set in any_set(),
        index in 0usize..2,
        inverse in any::<bool>(),
        x in unit_point(),
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        k in -8i32..8,
        c in 0.01f64..100.0,
    ) {
        prop_assume!(a.hypot(b) > 1e-3);
        let l = Letter::new(index % set.len(), inverse);
        let base = psi(&set, l, &TangentVector::from_frame(x, [a, b])).unwrap();
        let s = 2f64.powi(k);
        prop_assert_eq!(base, psi(&set, l, &TangentVector::from_frame(x, [s * a, s * b])).unwrap());
        let scaled = psi(&set, l, &TangentVector::from_frame(x, [c * a, c * b])).unwrap();
        prop_assert!((base - scaled).abs() < 1e-14);
    }

    #[test]
    fn averaged_metrics_are_positive_definite(
        set in any_set(),
        eps in 0.1f64..2.0,
        n in 0usize..4,
        count in 20usize..120,
    ) {
        let ball = enumerate_ball(&set, n);
        let points = fibonacci_sphere(count);
        let shells = shell_sums(&ball, &points, n).unwrap();
        for w in [Weighting::Decaying, Weighting::Growing] {
            let field = MetricField::from_shells(&shells, eps, n, w, String::new());
            prop_assert!(field.is_spd());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn finite_sum_lipschitz_bounds_hold(
        which in 0usize..3,
        eps in 0.2f64..1.0,
        n in 1usize..6,
    ) {
        let set = [commuting_twists(), quarter_turns(), free_rotations()][which].clone();
        let n = if which == 2 { n.min(3) } else { n };
        let report = lipschitz_check_with(&set, eps, n, Weighting::Decaying, 60).unwrap();
        prop_assert!(report.upper_violation < 1e-9, "{:?}", report);
        prop_assert!(report.lower_violation < 1e-9, "{:?}", report);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_preserves_element_order(k in 2usize..9, conj in letters(2, 4)) {
        let set = GeneratorSet::new(
            vec![
                NamedPrimitive::new("r", Primitive::rotation([0.2, -0.3, 0.9], std::f64::consts::TAU / k as f64).unwrap()),
                NamedPrimitive::new("t", Primitive::twist([1.0, 0.0, 0.0], 0.7).unwrap()),
                NamedPrimitive::new("a", Primitive::rotation([0.0, 1.0, 0.0], FREE_ANGLE).unwrap()),
            ],
            true,
        ).unwrap();
        let g = set.word(conj.into_iter().map(|l| Letter::new(l.index + 1, l.inverse)).collect()).unwrap();
        let r = set.generator(0);
        let s = g.inverse().compose(&r).compose(&g);
        prop_assert_eq!(element_order(&r, 16), Some(k));
        prop_assert_eq!(element_order(&s, 16), Some(k));
    }
}
