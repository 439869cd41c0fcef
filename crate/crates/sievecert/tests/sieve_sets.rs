use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sievecert::sieve_sets::{
    buchstab_identity_check, buchstab_sides, primes_between, psi, sifted_count, SievedInterval,
};

/// Trial-division oracle for ψ.
fn psi_naive(n: u64, z: f64) -> bool {
    (2..=n).filter(|q| (*q as f64) < z).all(|q| n % q != 0)
}

fn count_naive(lo: u64, hi: u64, d: u64, z: f64) -> u64 {
    (lo..=hi)
        .filter(|n| n % d == 0 && psi_naive(n / d, z))
        .count() as u64
}

fn small_primes_below(z: f64) -> Vec<u64> {
    (2u64..)
        .take_while(|&p| (p as f64) < z)
        .filter(|&p| (2..p).all(|q| p % q != 0))
        .collect()
}

/// Legendre sieve: Σ over squarefree products e of primes below z of
/// μ(e)·#{n ∈ [lo, hi] : d·e | n}.
fn legendre(lo: u64, hi: u64, d: u64, z: f64) -> i64 {
    fn walk(primes: &[u64], e: u64, sign: i64, lo: u64, hi: u64, d: u64) -> i64 {
        let m = d * e;
        let mut total = sign * ((hi / m) as i64 - ((lo - 1) / m) as i64);
        for (i, &p) in primes.iter().enumerate() {
            if d * e * p > hi {
                break;
            }
            total += walk(&primes[i + 1..], e * p, -sign, lo, hi, d);
        }
        total
    }
    walk(&small_primes_below(z), 1, 1, lo, hi, d)
}

fn iv(lo: u64, hi: u64) -> SievedInterval {
    SievedInterval::new(lo, hi).unwrap()
}

#[test]
fn psi_examples() {
    assert_eq!(psi(35, 5.0), 1);
    assert_eq!(psi(35, 6.0), 0);
    assert_eq!(psi(1, 100.0), 1);
    assert_eq!(psi(999_999_937, 1e9), 0);
    assert_eq!(psi(999_999_937, 999_999_937.0), 1);
}

#[test]
fn sifted_count_examples() {
    assert_eq!(count_naive(10, 20, 1, 4.0), 4);
    assert_eq!(count_naive(10, 20, 2, 3.0), 3);
    assert_eq!(sifted_count(iv(10, 20), 1, 4.0).unwrap(), 4);
    assert_eq!(sifted_count(iv(10, 20), 2, 3.0).unwrap(), 3);
    assert_eq!(sifted_count(iv(2, 2), 1, 2.0).unwrap(), 1);
    assert_eq!(sifted_count(iv(10, 20), 25, 2.0).unwrap(), 0);
    assert!(sifted_count(iv(10, 20), 0, 2.0).is_err());
}

#[test]
fn interval_validation() {
    assert!(SievedInterval::new(1, 10).is_err());
    assert!(SievedInterval::new(11, 10).is_err());
    assert!(SievedInterval::new(2, 1_000_000_001).is_err());
    assert!(SievedInterval::new(2, 1_000_000_000).is_ok());
}

#[test]
fn identity_examples() {
    assert!(buchstab_identity_check(iv(100, 200), 1, 5.0, 13.0).unwrap());
    assert!(buchstab_identity_check(iv(2, 10_000), 3, 2.0, 50.0).unwrap());
    assert!(buchstab_identity_check(iv(50, 60), 1, 7.0, 8.0).unwrap());
    assert_eq!(primes_between(7.0, 8.0, 60), vec![7]);
    assert!(buchstab_identity_check(iv(50, 60), 1, 8.0, 7.0).is_err());
    assert!(buchstab_identity_check(iv(50, 60), 1, 1.5, 7.0).is_err());
}

#[test]
fn identity_sides_match_enumeration() {
    let (left, right) = buchstab_sides(iv(50, 60), 1, 7.0, 8.0).unwrap();
    assert_eq!(left, count_naive(50, 60, 1, 8.0));
    assert_eq!(right, left as i64);
    assert_eq!(left, 2);
}

#[test]
fn identity_holds_on_randomized_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let lo = rng.gen_range(2..200_000u64);
        let hi = lo + rng.gen_range(0..5_000u64);
        let d = rng.gen_range(1..=30u64);
        let z1 = rng.gen_range(2.0..60.0f64);
        let z2 = z1 + rng.gen_range(0.5..400.0f64);
        let c = iv(lo, hi);
        assert!(
            buchstab_identity_check(c, d, z1, z2).unwrap(),
            "[{lo}, {hi}] d={d} z1={z1} z2={z2}"
        );
    }
}

#[test]
fn legendre_oracle_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let lo = rng.gen_range(2..1_000_000u64);
        let hi = lo + rng.gen_range(0..1_000u64);
        let d = rng.gen_range(1..=12u64);
        let z = rng.gen_range(2.0..30.0f64);
        let got = sifted_count(iv(lo, hi), d, z).unwrap() as i64;
        assert_eq!(got, legendre(lo, hi, d, z), "[{lo}, {hi}] d={d} z={z}");
    }
}

#[test]
fn large_interval_near_the_cap() {
    let c = iv(999_990_000, 1_000_000_000);
    let got = sifted_count(c, 1, 31_623.0).unwrap();
    assert_eq!(sifted_count(c, 1, 1e9).unwrap(), 0);
    let primes = (999_990_000..=1_000_000_000u64)
        .filter(|&n| psi(n, n as f64) == 1)
        .count();
    assert_eq!(got as usize, primes);
    assert!(buchstab_identity_check(c, 1, 2.0, 40_000.0).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_direct_enumeration(lo in 2u64..5_000, len in 0u64..500, d in 1u64..20, z in 1.0f64..80.0) {
        let got = sifted_count(iv(lo, lo + len), d, z).unwrap();
        prop_assert_eq!(got, count_naive(lo, lo + len, d, z));
    }

    #[test]
    fn non_increasing_in_z_and_bounded(lo in 2u64..100_000, len in 0u64..2_000, d in 1u64..50, z in 2.0f64..100.0, dz in 0.0f64..100.0) {
        let c = iv(lo, lo + len);
        let s1 = sifted_count(c, d, z).unwrap();
        let s2 = sifted_count(c, d, z + dz).unwrap();
        prop_assert!(s2 <= s1);
        let width = ((lo + len) / d + 1).saturating_sub(lo.div_ceil(d));
        prop_assert!(s1 <= width);
    }

    #[test]
    fn psi_matches_trial_division(n in 1u64..20_000, z in 1.0f64..200.0) {
        prop_assert_eq!(psi(n, z) == 1, psi_naive(n, z));
    }
}
