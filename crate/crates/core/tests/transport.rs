use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dyadic_transport::geometry::{rat, Rational};
use dyadic_transport::partition::{build_partition, format, VerifyMode};
use dyadic_transport::transport::{
    theorem_bound, van_der_corput, volumetric_lower_winfty, w1_exact_1d, winfty_exact_1d,
    winfty_oracle_grid, winfty_upper, VerifiedPartition,
};

#[test]
fn grid_oracle_matches_exact_one_dimensional_bottleneck() {
    for n in 1..=8u64 {
        let pts: Vec<Rational> = (1..=n).map(|k| van_der_corput(k).to_rational()).collect();
        let exact = winfty_exact_1d(&pts).unwrap().to_f64().unwrap();
        let grid_pts: Vec<Vec<Rational>> = pts.iter().map(|x| vec![x.clone()]).collect();
        for g in [120usize, 240] {
            let o = winfty_oracle_grid(&grid_pts, g).unwrap();
            assert!(
                (o.value - exact).abs() <= o.error + 1e-12,
                "N={n} g={g}: {} vs {exact}",
                o.value
            );
        }
    }
}

#[test]
fn w1_never_exceeds_winfty() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let len = rng.gen_range(1..20);
        let pts: Vec<Rational> = (0..len)
            .map(|_| {
                let q = rng.gen_range(1..50i64);
                rat(rng.gen_range(0..q), q)
            })
            .collect();
        assert!(w1_exact_1d(&pts).unwrap() <= winfty_exact_1d(&pts).unwrap());
    }
}

#[test]
fn certificates_sit_between_lower_and_theorem_bounds() {
    for d in [2usize, 3] {
        for n in [1u64, 7, 64, 65, 300, 1025] {
            let p = build_partition(n, d).unwrap();
            let cert = winfty_upper(&VerifiedPartition::new(&p, VerifyMode::Tree).unwrap());
            assert!(cert.within_theorem_bound);
            assert!(volumetric_lower_winfty(n, d) <= cert.radius);
            assert!(cert.radius <= theorem_bound(n, d) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn partition_files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    for (d, n) in [(2usize, 17u64), (3, 600)] {
        let p = build_partition(n, d).unwrap();
        let path = dir.path().join("p.json");
        format::write_partition(std::fs::File::create(&path).unwrap(), &p).unwrap();
        let q = format::read_partition(std::fs::File::open(&path).unwrap()).unwrap();
        assert_eq!(p, q);
    }
}
