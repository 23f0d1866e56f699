//! The `verify` subcommand: every library invariant as a named suite with a
//! pass/fail line. `fast` runs reduced grids suitable for a pre-commit
//! check; `full` runs the complete grids plus the exact-arithmetic oracle
//! cross-check.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use urnkl::bounds::{
    crossover_s_star, exact_binary_divergence, hm_bounds, proof_step_diagnostics, prop12_upper,
    stam_bounds, thm1_upper,
};
use urnkl::definetti::{definetti_bounds, definetti_divergence, mixing_from_iid, MixingMeasure};
use urnkl::divergence::relative_entropy;
use urnkl::numerics::{
    digamma_envelope, digamma_family, log1p_topsoe, trigamma_envelope, u_sandwich, u_value,
};
use urnkl::oracle::certified_divergence;
use urnkl::urn::{central_moment, factorial_moment, marginal_hypergeometric, UrnSpec};

const SLACK: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

pub fn run(level: Level, precision_bits: u32) -> i32 {
    let full = level == Level::Full;
    let mut failures = 0usize;
    failures += report("crossover location", crossover);
    failures += report("limit law", || limit_law(full));
    failures += report("stirling sandwich", || {
        sandwich(if full { 500 } else { 200 })
    });
    failures += report("digamma/trigamma envelopes", || {
        envelopes(if full { 200 } else { 100 })
    });
    failures += report("log(1+x) bracket", || topsoe(500));
    failures += report("binary closed form", || {
        binary_closed_form(if full { 500 } else { 200 })
    });
    failures += report("figure-range domination", figure_domination);
    failures += report("bound bracketing", || bracketing(full));
    failures += report("moment identities", || moments(if full { 60 } else { 30 }));
    failures += report("mixture chain", || {
        mixtures(if full { 200 } else { 60 }, if full { 20 } else { 14 })
    });
    if full {
        failures += report("certified enclosures", || {
            oracle_containment(precision_bits)
        });
    }

    if failures == 0 {
        println!("all suites passed");
        0
    } else {
        println!("{failures} suite(s) failed");
        1
    }
}

fn report(name: &str, suite: impl FnOnce() -> Result<(), String>) -> usize {
    let start = Instant::now();
    let outcome = suite();
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) => {
            println!("{name:.<36} pass  ({elapsed:.2?})");
            0
        }
        Err(why) => {
            println!("{name:.<36} FAIL  {why}");
            1
        }
    }
}

fn crossover() -> Result<(), String> {
    let s = crossover_s_star();
    if (0.8833..=0.8835).contains(&s) {
        Ok(())
    } else {
        Err(format!("s* = {s} outside [0.8833, 0.8835]"))
    }
}

fn limit_law(full: bool) -> Result<(), String> {
    let ns: &[u64] = if full {
        &[100, 1000, 10000]
    } else {
        &[100, 1000]
    };
    let gaps: Vec<f64> = ns
        .iter()
        .map(|&n| {
            relative_entropy(&UrnSpec::new(n, 3 * n / 10, vec![n / 2, n / 2]).unwrap())
                .map(|d| (d - 0.02833747).abs())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for pair in gaps.windows(2) {
        if pair[1] >= pair[0] {
            return Err(format!("limit gaps not decreasing: {gaps:?}"));
        }
    }
    if *gaps.last().unwrap() > 1e-3 {
        return Err(format!("final gap {} above 1e-3", gaps.last().unwrap()));
    }
    Ok(())
}

fn sandwich(a_max: u64) -> Result<(), String> {
    for a in 1..=a_max {
        for b in 0..a {
            let u = u_value(a as f64, b as f64).map_err(|e| e.to_string())?;
            let (approx, eps) = u_sandwich(a as f64, b as f64).map_err(|e| e.to_string())?;
            if u > approx + 1e-12 || u < approx - eps - 1e-12 {
                return Err(format!("sandwich broken at (a, b) = ({a}, {b})"));
            }
        }
    }
    Ok(())
}

fn envelopes(points: i32) -> Result<(), String> {
    for i in 0..points {
        let v = 0.5 * 1.06_f64.powi(i);
        let psi = digamma_envelope(v).map_err(|e| e.to_string())?;
        if psi.distance(digamma_family(v, 0).map_err(|e| e.to_string())?) > 1e-12 {
            return Err(format!("digamma envelope misses ψ at {v}"));
        }
        let tri = trigamma_envelope(v).map_err(|e| e.to_string())?;
        let deficit = 1.0 / v - digamma_family(v, 1).map_err(|e| e.to_string())?;
        if tri.distance(deficit) > 1e-12 {
            return Err(format!("trigamma envelope misses 1/x − ψ′ at {v}"));
        }
    }
    Ok(())
}

fn topsoe(points: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0702_5035);
    for _ in 0..points {
        let x = rng.gen::<f64>() * 1e6;
        let (lo, hi) = log1p_topsoe(x).map_err(|e| e.to_string())?;
        let exact = x.ln_1p();
        if exact < lo - 1e-12 || exact > hi + 1e-12 {
            return Err(format!("log(1+x) bracket broken at x = {x}"));
        }
    }
    Ok(())
}

fn binary_closed_form(n_max: u64) -> Result<(), String> {
    for n in 2..=n_max {
        for k in 1..=n {
            let closed = exact_binary_divergence(n, k).map_err(|e| e.to_string())?;
            let d = relative_entropy(&UrnSpec::new(n, k, vec![1, n - 1]).unwrap())
                .map_err(|e| e.to_string())?;
            if (closed - d).abs() > 1e-12 {
                return Err(format!(
                    "closed form {closed} vs enumeration {d} at (n, k) = ({n}, {k})"
                ));
            }
        }
    }
    Ok(())
}

fn figure_domination() -> Result<(), String> {
    let (n, k) = (100u64, 30u64);
    let (stam_u, _) = stam_bounds(n, k, 2).map_err(|e| e.to_string())?;
    let (hm_u, _) = hm_bounds(n, k, 2).map_err(|e| e.to_string())?;
    for ell in 1..=50 {
        let s = UrnSpec::new(n, k, vec![ell, n - ell]).unwrap();
        let refined = thm1_upper(&s)
            .map_err(|e| e.to_string())?
            .min(prop12_upper(n, k, ell).map_err(|e| e.to_string())?);
        if refined > stam_u.min(hm_u) + SLACK {
            return Err(format!("refined bound loses at ℓ = {ell}"));
        }
    }
    Ok(())
}

/// The bracketing and proof-step ordering checks for one two-colour spec.
fn check_binary_spec(n: u64, k: u64, ell: u64) -> Result<(), String> {
    let (stam_u, stam_l) = stam_bounds(n, k, 2).map_err(|e| e.to_string())?;
    let (hm_u, hm_l) = hm_bounds(n, k, 2).map_err(|e| e.to_string())?;
    let s = UrnSpec::new(n, k, vec![ell, n - ell]).unwrap();
    let d = relative_entropy(&s).map_err(|e| e.to_string())?;
    let thm1 = thm1_upper(&s).map_err(|e| e.to_string())?;
    let prop12 = prop12_upper(n, k, ell).map_err(|e| e.to_string())?;
    if d < stam_l - SLACK
        || d > stam_u + SLACK
        || d < hm_l - SLACK
        || d > hm_u + SLACK
        || d > thm1 + SLACK
        || d > prop12 + SLACK
    {
        return Err(format!(
            "bracketing broken at (n, k, ℓ) = ({n}, {k}, {ell})"
        ));
    }
    let diag = proof_step_diagnostics(&s).map_err(|e| e.to_string())?;
    let mut pairs = vec![diag.mean_term, diag.fluctuation_term];
    pairs.extend(diag.taylor_terms);
    pairs.extend(diag.newton_terms);
    if let Some(split) = diag.split_terms {
        pairs.extend(split);
    }
    if pairs.iter().any(|p| !p.holds(SLACK)) {
        return Err(format!(
            "proof step inverted at (n, k, ℓ) = ({n}, {k}, {ell})"
        ));
    }
    Ok(())
}

fn bracketing(full: bool) -> Result<(), String> {
    if full {
        (20u64..=200)
            .into_par_iter()
            .try_for_each(|n| -> Result<(), String> {
                for k in 1..=n / 2 {
                    for ell in 1..=n / 2 {
                        check_binary_spec(n, k, ell)?;
                    }
                }
                Ok(())
            })?;
    } else {
        for &n in &[20u64, 45, 90, 150, 200] {
            let picks: BTreeSet<u64> = [1, 2, n / 8, n / 4, n / 2]
                .into_iter()
                .filter(|&v| v >= 1)
                .collect();
            for &k in &picks {
                for &ell in &picks {
                    check_binary_spec(n, k, ell)?;
                }
            }
        }
    }

    // Three colours, representative shapes at either level.
    for &n in &[20u64, 48, 90, 156, 200] {
        let ks: BTreeSet<u64> = [1, 2, 3, n / 6, n / 3, n / 2]
            .into_iter()
            .filter(|&v| v >= 1)
            .collect();
        let shapes: BTreeSet<Vec<u64>> = [
            vec![n / 3, n / 3, n - 2 * (n / 3)],
            vec![1, 1, n - 2],
            vec![1, n / 2, n - 1 - n / 2],
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
            let (stam_u, stam_l) = stam_bounds(n, k, 3).map_err(|e| e.to_string())?;
            let (hm_u, hm_l) = hm_bounds(n, k, 3).map_err(|e| e.to_string())?;
            for shape in &shapes {
                let s = UrnSpec::new(n, k, shape.clone()).unwrap();
                let d = relative_entropy(&s).map_err(|e| e.to_string())?;
                let thm1 = thm1_upper(&s).map_err(|e| e.to_string())?;
                if d < stam_l - SLACK
                    || d > stam_u + SLACK
                    || d < hm_l - SLACK
                    || d > hm_u + SLACK
                    || d > thm1 + SLACK
                {
                    return Err(format!(
                        "bracketing broken at (n, k, ℓ) = ({n}, {k}, {shape:?})"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn moments(n_max: u64) -> Result<(), String> {
    let falling = |x: f64, r: u32| (0..r).map(|i| x - i as f64).product::<f64>();
    for n in 2..=n_max {
        let ks: BTreeSet<u64> = [1, 2, n / 3, n / 2, n]
            .into_iter()
            .filter(|&v| v >= 1)
            .collect();
        let ells: BTreeSet<u64> = [1, n / 4, n / 2, n - 1, n]
            .into_iter()
            .filter(|&v| v >= 1)
            .collect();
        for &k in &ks {
            for &ell in &ells {
                let mean = k as f64 * ell as f64 / n as f64;
                let mut raw = [0.0f64; 5];
                let mut central = [0.0f64; 4];
                for s in k.saturating_sub(n - ell)..=k.min(ell) {
                    let p = marginal_hypergeometric(n, k, ell, s).map_err(|e| e.to_string())?;
                    for (r, slot) in raw.iter_mut().enumerate() {
                        *slot += p * falling(s as f64, r as u32);
                    }
                    for (o, slot) in central.iter_mut().enumerate() {
                        *slot += p * (s as f64 - mean).powi(o as i32);
                    }
                }
                for r in 1..=4u32 {
                    let closed = factorial_moment(n, k, ell, r);
                    if (closed - raw[r as usize]).abs() > 1e-12 * (1.0 + closed.abs()) {
                        return Err(format!(
                            "factorial moment order {r} off at (n, k, ℓ) = ({n}, {k}, {ell})"
                        ));
                    }
                }
                for order in [2u32, 3] {
                    if order == 3 && n == 2 {
                        continue; // skewness closed form needs n > 2
                    }
                    let closed = central_moment(n, k, ell, order).map_err(|e| e.to_string())?;
                    if (closed - central[order as usize]).abs() > 1e-12 * (1.0 + closed.abs()) {
                        return Err(format!(
                            "central moment order {order} off at (n, k, ℓ) = ({n}, {k}, {ell})"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn mixtures(cases: usize, n_max: u64) -> Result<(), String> {
    // Worked example first: iid fair coin on four exchangeable draws.
    let mu = mixing_from_iid(&[0.5, 0.5], 4).map_err(|e| e.to_string())?;
    let chain = definetti_divergence(&mu, 2).map_err(|e| e.to_string())?;
    if (chain.d - 0.03226926056878558).abs() > 1e-10 {
        return Err(format!("worked example d = {}", chain.d));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x0e21_f1ed);
    for case in 0..cases {
        let n = rng.gen_range(2..=n_max);
        let c = rng.gen_range(2..=3usize);
        let k = rng.gen_range(1..=n);
        let atoms = compositions(n, c);
        let scores: Vec<f64> = atoms
            .iter()
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let total: f64 = scores.iter().sum();
        let mu = MixingMeasure::new(
            n,
            c,
            atoms
                .into_iter()
                .zip(scores.iter().map(|w| w / total))
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let here = definetti_divergence(&mu, k).map_err(|e| e.to_string())?;
        let corollary = definetti_bounds(n, k, c)
            .map_err(|e| e.to_string())?
            .corollary;
        if here.d > here.chain_mid + SLACK || here.chain_mid > here.chain_max + SLACK {
            return Err(format!(
                "chain inequality broken (case {case}, n={n}, c={c}, k={k})"
            ));
        }
        if here.d > corollary + SLACK {
            return Err(format!(
                "closed form undercut (case {case}, n={n}, c={c}, k={k})"
            ));
        }
        if k < n {
            let next = definetti_divergence(&mu, k + 1).map_err(|e| e.to_string())?;
            if here.d > next.d + SLACK {
                return Err(format!(
                    "d not monotone in k (case {case}, n={n}, c={c}, k={k})"
                ));
            }
        }
    }
    Ok(())
}

fn oracle_containment(precision_bits: u32) -> Result<(), String> {
    let specs: [(u64, u64, &[u64]); 20] = [
        (4, 2, &[2, 2]),
        (10, 4, &[3, 7]),
        (20, 10, &[10, 10]),
        (20, 5, &[3, 17]),
        (28, 14, &[6, 9, 13]),
        (36, 18, &[12, 24]),
        (45, 15, &[15, 15, 15]),
        (50, 25, &[25, 25]),
        (64, 21, &[9, 55]),
        (80, 40, &[40, 40]),
        (100, 30, &[50, 50]),
        (100, 30, &[1, 99]),
        (100, 30, &[37, 63]),
        (60, 12, &[20, 20, 20]),
        (20, 8, &[5, 7, 8]),
        (12, 6, &[4, 4, 4]),
        (10, 3, &[2, 3, 5]),
        (30, 15, &[6, 10, 14]),
        (9, 9, &[3, 3, 3]),
        (17, 1, &[8, 9]),
    ];
    for (n, k, ell) in specs {
        let s = UrnSpec::new(n, k, ell.to_vec()).unwrap();
        let certified = certified_divergence(&s, precision_bits).map_err(|e| e.to_string())?;
        let d = relative_entropy(&s).map_err(|e| e.to_string())?;
        if certified.distance(d) > 5e-11 {
            return Err(format!(
                "divergence {d} escapes certified [{}, {}] at (n, k, ℓ) = ({n}, {k}, {ell:?})",
                certified.lo, certified.hi
            ));
        }
    }
    Ok(())
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
