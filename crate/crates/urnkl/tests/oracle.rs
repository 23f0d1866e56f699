//! Cross-checks between the floating-point enumeration engine and the
//! exact-arithmetic verifier.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use urnkl::divergence::relative_entropy;
use urnkl::oracle::{certified_divergence, exact_pmfs};
use urnkl::urn::{hypergeometric_pmf, multinomial_pmf, support, UrnSpec};

fn spec(n: u64, k: u64, ell: &[u64]) -> UrnSpec {
    UrnSpec::new(n, k, ell.to_vec()).unwrap()
}

#[test]
fn float_divergence_lies_inside_certified_enclosures() {
    // A spread of shapes: balanced/lopsided binary, ternary, tiny and
    // moderately large populations, plus edge draws.
    let cases: Vec<UrnSpec> = vec![
        spec(4, 2, &[2, 2]),
        spec(10, 4, &[3, 7]),
        spec(20, 10, &[10, 10]),
        spec(20, 5, &[3, 17]),
        spec(36, 18, &[12, 24]),
        spec(50, 25, &[25, 25]),
        spec(100, 30, &[50, 50]),
        spec(100, 30, &[1, 99]),
        spec(100, 30, &[37, 63]),
        spec(60, 12, &[20, 20, 20]),
        spec(20, 8, &[5, 7, 8]),
        spec(12, 6, &[4, 4, 4]),
        spec(10, 3, &[2, 3, 5]),
        spec(30, 15, &[6, 10, 14]),
        spec(9, 9, &[3, 3, 3]),
        spec(17, 1, &[8, 9]),
    ];
    for s in &cases {
        let interval = certified_divergence(s, 128).unwrap();
        let d = relative_entropy(s).unwrap();
        assert!(
            interval.contains(d, 5e-11),
            "{s:?}: float D = {d} vs certified [{}, {}]",
            interval.lo,
            interval.hi
        );
        assert!(interval.width() <= 1e-13, "{s:?}: enclosure too wide");
        assert!(
            interval.lo >= -1e-15,
            "{s:?}: divergence enclosure dips negative"
        );
    }
}

#[test]
fn enclosures_tighten_as_precision_grows() {
    let s = spec(20, 8, &[5, 7, 8]);
    let coarse = certified_divergence(&s, 64).unwrap();
    let fine = certified_divergence(&s, 256).unwrap();
    assert!(fine.width() <= coarse.width());
    // Nested up to the outward f64 rounding of each endpoint.
    assert!(fine.lo >= coarse.lo - 1e-15 && fine.hi <= coarse.hi + 1e-15);
}

#[test]
fn exact_pmfs_agree_with_floating_evaluation() {
    for s in [
        spec(10, 4, &[3, 7]),
        spec(20, 8, &[5, 7, 8]),
        spec(15, 6, &[4, 5, 6]),
        spec(7, 7, &[3, 4]),
    ] {
        for cv in support(&s) {
            let (h, b) = exact_pmfs(&s, &cv).unwrap();
            let hf = hypergeometric_pmf(&s, &cv).unwrap();
            let bf = multinomial_pmf(&s, &cv).unwrap();
            assert!((h.to_f64() - hf).abs() <= 1e-13 * (1.0 + hf));
            assert!((b.to_f64() - bf).abs() <= 1e-13 * (1.0 + bf));
        }
    }
}

#[test]
fn exact_hypergeometric_masses_sum_to_one() {
    for s in [
        spec(10, 4, &[3, 7]),
        spec(14, 5, &[2, 5, 7]),
        spec(6, 6, &[2, 2, 2]),
    ] {
        let mut num_sum = BigInt::zero();
        let mut den = BigInt::one();
        for cv in support(&s) {
            let (h, _) = exact_pmfs(&s, &cv).unwrap();
            // Bring to the common denominator by cross-multiplying.
            num_sum = &num_sum * &h.denominator + &h.numerator * &den;
            den *= &h.denominator;
            let g = num_integer::Integer::gcd(&num_sum, &den);
            num_sum /= &g;
            den /= &g;
        }
        assert_eq!(num_sum, den, "{s:?}: hypergeometric masses do not sum to 1");
    }
}

#[test]
fn single_draw_certificate_pins_zero() {
    let s = spec(40, 1, &[13, 27]);
    let interval = certified_divergence(&s, 128).unwrap();
    assert!(interval.contains(0.0, 0.0));
    assert!(interval.lo.abs() <= 1e-15 && interval.hi.abs() <= 1e-15);
}
