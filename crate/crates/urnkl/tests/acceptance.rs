//! The release gate. One test per criterion, each printing a single
//! `acceptance <name>: pass/FAIL` line (visible with `--nocapture`).
//!
//! Every criterion carries a wall-clock budget that is asserted, so the
//! tests serialize themselves on a mutex to keep the timings honest.

use std::collections::BTreeSet;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urnkl::bounds::{
    crossover_s_star, hm_bounds, proof_step_diagnostics, prop12_upper, stam_bounds, thm1_upper,
};
use urnkl::definetti::{definetti_bounds, definetti_divergence, mixing_from_iid, MixingMeasure};
use urnkl::divergence::relative_entropy;
use urnkl::numerics::{
    digamma_envelope, digamma_family, log1p_topsoe, trigamma_envelope, u_sandwich, u_value,
};
use urnkl::oracle::certified_divergence;
use urnkl::urn::{central_moment, factorial_moment, marginal_hypergeometric, UrnSpec};

static GATE: Mutex<()> = Mutex::new(());

fn spec(n: u64, k: u64, ell: &[u64]) -> UrnSpec {
    UrnSpec::new(n, k, ell.to_vec()).unwrap()
}

fn run(name: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let _serial = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|()| {
        if elapsed <= budget {
            Ok(())
        } else {
            Err(format!("runtime {elapsed:.2?} over the {budget:?} budget"))
        }
    });
    match outcome {
        Ok(()) => println!("acceptance {name}: pass ({elapsed:.2?})"),
        Err(why) => {
            println!("acceptance {name}: FAIL — {why}");
            panic!("acceptance {name}: {why}");
        }
    }
}

#[test]
fn criterion_1_figure_reproduction() {
    run("figure reproduction", Duration::from_secs(1), || {
        let (n, k) = (100u64, 30u64);
        let (stam_u, _) = stam_bounds(n, k, 2).unwrap();
        let (hm_u, _) = hm_bounds(n, k, 2).unwrap();
        for ell in 1..=50u64 {
            let s = spec(n, k, &[ell, n - ell]);
            let d = relative_entropy(&s).unwrap();
            let certified = certified_divergence(&s, 64).unwrap();
            if certified.distance(d) > 1e-12 {
                return Err(format!(
                    "ℓ = {ell}: D = {d} sits {} away from the certified interval",
                    certified.distance(d)
                ));
            }
            if ell == 1 && (d - 0.04882251).abs() > 1e-8 {
                return Err(format!("ℓ = 1: D = {d}, expected 0.04882251 ± 1e-8"));
            }
            let thm1 = thm1_upper(&s).unwrap();
            let prop12 = prop12_upper(n, k, ell).unwrap();
            for (label, upper) in [
                ("stam", stam_u),
                ("hm", hm_u),
                ("thm1", thm1),
                ("prop12", prop12),
            ] {
                if d > upper + 1e-10 {
                    return Err(format!("ℓ = {ell}: {label} upper {upper} < D = {d}"));
                }
            }
            if thm1.min(prop12) > stam_u.min(hm_u) + 1e-10 {
                return Err(format!(
                    "ℓ = {ell}: refined bounds {} lose to classical {}",
                    thm1.min(prop12),
                    stam_u.min(hm_u)
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_2_crossover_location() {
    run("crossover location", Duration::from_millis(100), || {
        let s = crossover_s_star();
        if !(0.8833..=0.8835).contains(&s) {
            return Err(format!("s* = {s} outside [0.8833, 0.8835]"));
        }
        Ok(())
    });
}

#[test]
fn criterion_3_limit_law() {
    run("limit law", Duration::from_secs(5), || {
        let gaps: Vec<f64> = [100u64, 1000, 10000]
            .iter()
            .map(|&n| {
                let d = relative_entropy(&spec(n, 3 * n / 10, &[n / 2, n / 2])).unwrap();
                (d - 0.02833747).abs()
            })
            .collect();
        if gaps[2] > 1e-3 {
            return Err(format!("gap at n = 10000 is {}, above 1e-3", gaps[2]));
        }
        if !(gaps[0] > gaps[1] && gaps[1] > gaps[2]) {
            return Err(format!("gaps not strictly decreasing: {gaps:?}"));
        }
        Ok(())
    });
}

#[test]
fn criterion_4_sandwich_suites() {
    run("sandwich suites", Duration::from_secs(5), || {
        for a in 1u64..=500 {
            for b in 0..a {
                let (af, bf) = (a as f64, b as f64);
                let u = u_value(af, bf).unwrap();
                let (approx, eps) = u_sandwich(af, bf).unwrap();
                if u > approx + 1e-12 || u < approx - eps - 1e-12 {
                    return Err(format!(
                        "sandwich broken at (a, b) = ({a}, {b}): U = {u}, A = {approx}, ε = {eps}"
                    ));
                }
            }
        }
        for i in 0..200 {
            let y = 0.5 * 1.06_f64.powi(i);
            let psi = digamma_envelope(y).unwrap();
            if psi.distance(digamma_family(y, 0).unwrap()) > 1e-12 {
                return Err(format!("digamma envelope misses ψ at y = {y}"));
            }
            let tri = trigamma_envelope(y).unwrap();
            let deficit = 1.0 / y - digamma_family(y, 1).unwrap();
            if tri.distance(deficit) > 1e-12 {
                return Err(format!("trigamma envelope misses 1/x − ψ′ at x = {y}"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x70_05_0e);
        for _ in 0..500 {
            let x = rng.gen::<f64>() * 1e6;
            let (lo, hi) = log1p_topsoe(x).unwrap();
            let exact = x.ln_1p();
            if exact < lo - 1e-12 || exact > hi + 1e-12 {
                return Err(format!("log(1+x) bracket broken at x = {x}"));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_5_bracketing_grid() {
    run("bracketing grid", Duration::from_secs(60), || {
        let slack = 1e-10;
        // Two colours: the full grid, bounds and proof-step diagnostics.
        for n in 20u64..=200 {
            for k in 1..=n / 2 {
                let (stam_u, stam_l) = stam_bounds(n, k, 2).unwrap();
                let (hm_u, hm_l) = hm_bounds(n, k, 2).unwrap();
                for ell in 1..=n / 2 {
                    let s = spec(n, k, &[ell, n - ell]);
                    let d = relative_entropy(&s).unwrap();
                    let thm1 = thm1_upper(&s).unwrap();
                    let prop12 = prop12_upper(n, k, ell).unwrap();
                    if d < stam_l - slack
                        || d > stam_u + slack
                        || d < hm_l - slack
                        || d > hm_u + slack
                        || d > thm1 + slack
                        || d > prop12 + slack
                    {
                        return Err(format!(
                            "bracketing broken at (n, k, ℓ) = ({n}, {k}, {ell})"
                        ));
                    }
                    let diag = proof_step_diagnostics(&s).unwrap();
                    let mut pairs =
                        vec![("mean", diag.mean_term), ("fluct", diag.fluctuation_term)];
                    pairs.extend(diag.taylor_terms.into_iter().map(|p| ("taylor", p)));
                    pairs.extend(diag.newton_terms.into_iter().map(|p| ("newton", p)));
                    if let Some(split) = diag.split_terms {
                        pairs.extend(split.into_iter().map(|p| ("split", p)));
                    }
                    for (label, pair) in pairs {
                        if !pair.holds(slack) {
                            return Err(format!(
                                "{label} step inverted at ({n}, {k}, {ell}): \
                                 exact = {}, bound = {}",
                                pair.exact, pair.bound
                            ));
                        }
                    }
                }
            }
        }
        // Three colours: thinned to representative shapes.
        for &n in &[20u64, 33, 48, 66, 90, 120, 156, 200] {
            let ks: BTreeSet<u64> = [1, 2, 3, n / 6, n / 3, n / 2]
                .into_iter()
                .filter(|&k| k >= 1)
                .collect();
            let shapes: BTreeSet<Vec<u64>> = [
                vec![n / 3, n / 3, n - 2 * (n / 3)],
                vec![n / 2, n / 4, n - n / 2 - n / 4],
                vec![1, 1, n - 2],
                vec![1, n / 2, n - 1 - n / 2],
                vec![2, 3, n - 5],
                vec![n / 6, n / 3, n - n / 6 - n / 3],
            ]
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .filter(|v| v[0] >= 1)
            .collect();
            for &k in &ks {
                let (stam_u, stam_l) = stam_bounds(n, k, 3).unwrap();
                let (hm_u, hm_l) = hm_bounds(n, k, 3).unwrap();
                for shape in &shapes {
                    let s = spec(n, k, shape);
                    let d = relative_entropy(&s).unwrap();
                    let thm1 = thm1_upper(&s).unwrap();
                    if d < stam_l - slack
                        || d > stam_u + slack
                        || d < hm_l - slack
                        || d > hm_u + slack
                        || d > thm1 + slack
                    {
                        return Err(format!(
                            "bracketing broken at (n, k, ℓ) = ({n}, {k}, {shape:?})"
                        ));
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_6_moment_identities() {
    run("moment identities", Duration::from_secs(10), || {
        let falling = |x: f64, r: u32| (0..r).map(|i| x - i as f64).product::<f64>();
        for n in 2u64..=60 {
            let ks: BTreeSet<u64> = [1, 2, n / 3, n / 2, n]
                .into_iter()
                .filter(|&k| k >= 1)
                .collect();
            let ells: BTreeSet<u64> = [1, n / 4, n / 2, n - 1, n]
                .into_iter()
                .filter(|&l| l >= 1)
                .collect();
            for &k in &ks {
                for &ell in &ells {
                    let lo = k.saturating_sub(n - ell);
                    let hi = k.min(ell);
                    let mut raw = [0.0f64; 5]; // E[(S)_r] for r = 0..4
                    let mut central = [0.0f64; 4];
                    let mean = k as f64 * ell as f64 / n as f64;
                    for s in lo..=hi {
                        let p = marginal_hypergeometric(n, k, ell, s).unwrap();
                        for (r, slot) in raw.iter_mut().enumerate() {
                            *slot += p * falling(s as f64, r as u32);
                        }
                        for (o, slot) in central.iter_mut().enumerate() {
                            *slot += p * (s as f64 - mean).powi(o as i32);
                        }
                    }
                    for r in 1..=4u32 {
                        let closed = factorial_moment(n, k, ell, r);
                        let sum = raw[r as usize];
                        if (closed - sum).abs() > 1e-12 * (1.0 + closed.abs()) {
                            return Err(format!(
                                "order-{r} factorial moment at ({n}, {k}, {ell}): \
                                 closed {closed} vs enumerated {sum}"
                            ));
                        }
                    }
                    for order in [2u32, 3] {
                        if order == 3 && n == 2 {
                            continue; // the skewness closed form needs n > 2
                        }
                        let closed = central_moment(n, k, ell, order).unwrap();
                        let sum = central[order as usize];
                        if (closed - sum).abs() > 1e-12 * (1.0 + closed.abs()) {
                            return Err(format!(
                                "central moment M{order} at ({n}, {k}, {ell}): \
                                 closed {closed} vs enumerated {sum}"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_mixture_chain() {
    run("mixture chain", Duration::from_secs(30), || {
        let mu = mixing_from_iid(&[0.5, 0.5], 4).unwrap();
        let chain = definetti_divergence(&mu, 2).unwrap();
        for (label, got, want) in [
            ("d", chain.d, 0.03226926056878558),
            ("chain_mid", chain.chain_mid, 0.06371213879827405),
            ("chain_max", chain.chain_max, 0.08494951839769874),
        ] {
            if (got - want).abs() > 1e-10 {
                return Err(format!("worked example {label} = {got}, expected {want}"));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
        for case in 0..200 {
            let n = rng.gen_range(2..=20u64);
            let c = rng.gen_range(2..=3usize);
            let k = rng.gen_range(1..=n);
            let atoms = compositions(n, c);
            let scores: Vec<f64> = atoms
                .iter()
                .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                .collect();
            let total: f64 = scores.iter().sum();
            let weights = atoms
                .into_iter()
                .zip(scores)
                .map(|(a, w)| (a, w / total))
                .collect();
            let mu = MixingMeasure::new(n, c, weights).unwrap();

            let here = definetti_divergence(&mu, k).unwrap();
            let corollary = definetti_bounds(n, k, c).unwrap().corollary;
            if here.d > here.chain_mid + 1e-10 || here.chain_mid > here.chain_max + 1e-10 {
                return Err(format!(
                    "case {case}: chain inequality broken (n={n}, c={c}, k={k})"
                ));
            }
            if here.d > corollary + 1e-10 {
                return Err(format!(
                    "case {case}: d = {} above the closed form {corollary}",
                    here.d
                ));
            }
            if k < n {
                let next = definetti_divergence(&mu, k + 1).unwrap();
                if here.d > next.d + 1e-10 {
                    return Err(format!("case {case}: d not monotone from k = {k}"));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_8_certified_enclosures() {
    run("certified enclosures", Duration::from_secs(60), || {
        let cases: Vec<UrnSpec> = vec![
            spec(4, 2, &[2, 2]),
            spec(10, 4, &[3, 7]),
            spec(20, 10, &[10, 10]),
            spec(20, 5, &[3, 17]),
            spec(28, 14, &[6, 9, 13]),
            spec(36, 18, &[12, 24]),
            spec(45, 15, &[15, 15, 15]),
            spec(50, 25, &[25, 25]),
            spec(64, 21, &[9, 55]),
            spec(80, 40, &[40, 40]),
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
        assert_eq!(cases.len(), 20);
        for s in &cases {
            let certified = certified_divergence(s, 128).unwrap();
            let d = relative_entropy(s).unwrap();
            if certified.distance(d) > 5e-11 {
                return Err(format!(
                    "{s:?}: D = {d} outside certified [{}, {}]",
                    certified.lo, certified.hi
                ));
            }
        }
        Ok(())
    });
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}
