use std::collections::HashSet;

use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

use dyadic_transport::geometry::{half_sum_deviation, rat, rat_int, within_radius, Rational, Rect};
use dyadic_transport::partition::{rectangle_partition, Construction};
use dyadic_transport::sequence::{DigitWord, DigitalSequence};

fn word(dim: usize, digits: Vec<u32>) -> DigitWord {
    let base = 1u32 << dim;
    DigitWord::new(dim, digits.into_iter().map(|x| x % base).collect()).unwrap()
}

fn ratio() -> impl Strategy<Value = Rational> {
    (0i64..1000, 1i64..1000).prop_map(|(p, q)| rat(p % q, q))
}

fn unit_rect(dim: usize) -> impl Strategy<Value = Rect> {
    proptest::collection::vec((ratio(), ratio()), dim).prop_filter_map("degenerate", |pairs| {
        let (lo, hi): (Vec<_>, Vec<_>) = pairs
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .unzip();
        Rect::new(lo, hi).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_count_matches_membership(
        dim in 2usize..=3,
        count in 1u64..4000,
        digits in proptest::collection::vec(0u32..8, 0..4),
    ) {
        let seq = DigitalSequence::new(dim).unwrap();
        let u = word(dim, digits);
        let cube = seq.cube_rect(&u).unwrap();
        let brute = (1..=count)
            .filter(|&n| cube.contains_point(&seq.point(n).unwrap().to_rationals()))
            .count() as u64;
        prop_assert_eq!(seq.count_in_cube(count, &u).unwrap(), brute);
    }

    #[test]
    fn points_lie_in_their_words(dim in 2usize..=4, n in 1u64..1_000_000, level in 0usize..5) {
        let seq = DigitalSequence::new(dim).unwrap();
        let cube = seq.cube_rect(&seq.word_of(n, level).unwrap()).unwrap();
        prop_assert!(cube.contains_point(&seq.point(n).unwrap().to_rationals()));
    }

    #[test]
    fn children_nest_in_parents(dim in 2usize..=3, extra in 1u64..3000) {
        let base = 1u64 << dim;
        let count = base * base + extra;
        let h = rectangle_partition(count, dim).unwrap();
        for pair in h.levels.windows(2) {
            let (parents, children) = (&pair[0], &pair[1]);
            let stride = parents.len();
            for (i, child) in children.iter().enumerate() {
                prop_assert!(parents[i % stride].contains(child));
            }
        }
    }

    #[test]
    fn cuts_are_exact(rect in unit_rect(3), axis in 0usize..3, frac in 1i64..99) {
        let volume = rect.volume();
        let target = &volume * rat(frac, 100);
        let cut = rect.cut(axis, &target).unwrap();
        prop_assert_eq!(cut.left.volume(), target.clone());
        prop_assert_eq!(&cut.left.volume() + &cut.right.volume(), volume.clone());
        let lhs = (&cut.position - rect.midpoint(axis)).abs() * rect.cross_section(axis);
        prop_assert_eq!(lhs, (&target - &volume / rat(2, 1)).abs());
    }

    #[test]
    fn half_sum_is_within_a_quarter(
        m in 0i64..100,
        bits in proptest::collection::vec(0i64..2, 1..9),
        seed in any::<u64>(),
    ) {
        let mut counts: Vec<i64> = bits.iter().map(|b| m + b).collect();
        if counts.len() % 2 == 1 {
            counts.push(m);
        }
        let big_b = counts.len();
        let mut idx: Vec<usize> = (0..big_b).collect();
        idx.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let dev = half_sum_deviation(&counts, &idx[..big_b / 2]).unwrap();
        prop_assert!(dev <= rat(big_b as i64, 4));
    }

    #[test]
    fn radius_decision_agrees_with_floats(
        rect in unit_rect(2),
        x in proptest::collection::vec(ratio(), 2),
        count in 1u64..10_000,
        c in 1i64..40,
    ) {
        let constant = rat(c, 10);
        let exact = within_radius(&rect, &x, &constant, count, 2);
        let far = rect.max_sq_dist(&x).to_f64().unwrap();
        let bound = (c as f64 / 10.0).powi(2) * 2.0 / count as f64;
        if (far - bound).abs() > 1e-9 * bound {
            prop_assert_eq!(exact, far <= bound);
        }
    }
}

#[test]
fn prefixes_of_full_blocks_are_distinct_grids() {
    for dim in 2..=4usize {
        let seq = DigitalSequence::new(dim).unwrap();
        for level in 0..=2usize {
            let count = 1u64 << (dim * level);
            let pts: HashSet<Vec<Rational>> = (1..=count)
                .map(|n| seq.point(n).unwrap().to_rationals())
                .collect();
            assert_eq!(pts.len() as u64, count);
            let side = rat_int(1u64 << level);
            for p in &pts {
                assert!(p.iter().all(|x| (x * &side).is_integer()));
            }
        }
    }
}

#[test]
fn construction_is_deterministic() {
    for (d, n) in [(2usize, 1000u64), (3, 777)] {
        let a = Construction::run(n, d).unwrap().partition;
        let b = Construction::run(n, d).unwrap().partition;
        assert_eq!(a, b);
    }
}
