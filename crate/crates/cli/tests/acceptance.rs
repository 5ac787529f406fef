//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use entasym_cli::commands::{compute_spectrum, eigenstate_asymmetries, ensemble_validate, theta_sweep, Spectrum};
use entasym_cli::config::{ConfigBuilder, ExperimentConfig};
use entasym_core::analytics::{
    avg_purity_u1, binomial, chi_exact, dos_fit, energy_charge_map, hyp2f1_terminating, predicted_asymmetry_haar,
    predicted_asymmetry_u1, trace_aa_exact,
};
use entasym_core::eig::{ORTHONORMALITY_TOL, RESIDUAL_TOL};
use entasym_core::ensemble::{
    mc_asymmetry_stats, sample_dirichlet, sample_u1_state, McStats, RandomSource, SectorDims,
};
use entasym_core::entanglement::{asymmetry2, reduce, Bipartition};
use entasym_core::spins::{ChainModel, ChargeSpec, PureState, SiteCount};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

const SEED: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Suite {
    failed: Vec<u32>,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        let in_budget = secs <= budget_s;
        let pass = o.pass && in_budget;
        if !pass {
            self.failed.push(id);
        }
        let budget = if in_budget { String::new() } else { format!(" over budget of {budget_s}s") };
        println!(
            "criterion {id:>2} {} {name}: {} [{secs:.1}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
}

fn config(pairs: &[&str]) -> ExperimentConfig {
    pairs
        .iter()
        .fold(ConfigBuilder::new(), |b, p| b.assignment(p).expect("key=value"))
        .build()
        .expect("valid configuration")
}

fn rel_diff(a: &BigRational, b: &BigRational) -> f64 {
    let d = (a - b).abs();
    if d.is_zero() {
        return 0.0;
    }
    let scale = a.abs().max(b.abs());
    (d / scale).to_f64().unwrap_or(f64::INFINITY)
}

fn criterion_1() -> Outcome {
    let mut traces: HashMap<(usize, usize, usize, usize), BigRational> = HashMap::new();
    let mut worst = 0.0f64;
    let mut cells = 0;
    for l in 0..=12usize {
        for ell in 0..=l {
            for m in 0..=l {
                let d_b: Vec<BigInt> = (0..=ell).map(|q| binomial((l - ell) as i64, m as i64 - q as i64)).collect();
                let mut oracle = BigRational::zero();
                for k in 0..=ell {
                    for j in 0..=ell {
                        for jp in 0..=ell {
                            let w = &d_b[j] * &d_b[jp];
                            if w.is_zero() {
                                continue;
                            }
                            let t = traces
                                .entry((ell, j, jp, k))
                                .or_insert_with(|| trace_aa_exact(ell, j, jp, k));
                            oracle += &*t * BigRational::from_integer(w);
                        }
                    }
                }
                let closed = match chi_exact(l, ell, m) {
                    Ok(c) => c,
                    Err(e) => return outcome(false, format!("closed form failed at L={l} ℓ={ell} M={m}: {e}")),
                };
                worst = worst.max(rel_diff(&closed, &oracle));
                cells += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{cells} cells, max relative deviation {worst:.2e} (tol 1e-10)"))
}

fn int_matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    for ell in 0..=4usize {
        let d = 1usize << ell;
        // Unnormalized Hadamard transform: H² = 2^ℓ.
        let had: Vec<Vec<i64>> = (0..d)
            .map(|a| (0..d).map(|b| if (a & b).count_ones() % 2 == 0 { 1 } else { -1 }).collect())
            .collect();
        let diag = |w: usize| -> Vec<Vec<i64>> {
            (0..d)
                .map(|a| (0..d).map(|b| i64::from(a == b && a.count_ones() as usize == w)).collect())
                .collect()
        };
        for k in 0..=ell {
            // 2^ℓ Π^x_k
            let px = int_matmul(&int_matmul(&had, &diag(k)), &had);
            for j in 0..=ell {
                for jp in 0..=ell {
                    let prod = int_matmul(&int_matmul(&int_matmul(&diag(j), &px), &diag(jp)), &px);
                    let tr: i64 = (0..d).map(|i| prod[i][i]).sum();
                    let want = BigRational::new(BigInt::from(tr), BigInt::from(1u64 << (2 * ell)));
                    let got = trace_aa_exact(ell, j, jp, k);
                    if got != want {
                        return outcome(false, format!("ℓ={ell} j={j} j′={jp} k={k}: {got} vs {want}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    outcome(true, format!("{checked} traces equal in exact arithmetic"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for m in 0..=8i64 {
        for l in 2 * m..=20 {
            for big_m in 0..=l {
                let norm = binomial(l - 2 * m, big_m);
                if norm.is_zero() {
                    continue;
                }
                let mut s = BigInt::zero();
                for n in 0..=2 * m {
                    let t = binomial(2 * m, n) * binomial(l - 2 * m, big_m - n);
                    if n % 2 == 0 {
                        s += t;
                    } else {
                        s -= t;
                    }
                }
                let want = BigRational::new(s, norm).to_f64().unwrap();
                let got = match hyp2f1_terminating(m as u32, big_m as u32, l) {
                    Ok(v) => v,
                    Err(e) => return outcome(false, format!("m={m} L={l} M={big_m}: {e}")),
                };
                let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    outcome(worst <= 1e-12, format!("{checked} cases, max relative deviation {worst:.2e} (tol 1e-12)"))
}

fn criterion_4() -> Outcome {
    let cfg = config(&["sizes=[10, 12]", "charge=\"x\"", "samples=200", &format!("seed={SEED}")]);
    let rows = match ensemble_validate(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [10usize, 12] {
        let cells: Vec<_> = rows.iter().filter(|r| r.sites == l).collect();
        let within = cells.iter().filter(|r| (r.mean - r.prediction).abs() <= 3.0 * r.std_err + 1e-12).count();
        let frac = within as f64 / cells.len() as f64;
        pass &= frac >= 0.95;
        parts.push(format!("L={l}: {within}/{} cells within 3 SE ({:.1}%)", cells.len(), 100.0 * frac));
    }
    outcome(pass, format!("{} (need ≥ 95% each)", parts.join(", ")))
}

fn criterion_5() -> Outcome {
    let samples = 10_000u64;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (cell, (m, ell)) in [2usize, 4].iter().flat_map(|&m| (0..=8usize).map(move |e| (m, e))).enumerate() {
        let dims = SectorDims::new(8, ell, m).unwrap();
        let part = Bipartition::new(SiteCount::new(8).unwrap(), ell).unwrap();
        let base = RandomSource::new(SEED ^ 5, cell as u64);
        let v: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| reduce(&sample_u1_state(&dims, &mut base.derive(i)).unwrap(), &part).unwrap().purity())
            .collect();
        let s = McStats::from_samples(&v).unwrap();
        let want = avg_purity_u1(8, ell, m).unwrap();
        let z = (s.mean - want).abs() / s.std_err.max(1e-300);
        if (s.mean - want).abs() > 3.0 * s.std_err + 1e-12 {
            bad.push(format!("(M={m}, ℓ={ell})"));
        }
        if s.std_err > 0.0 {
            worst = worst.max(z);
        }
    }
    outcome(bad.is_empty(), format!("18 cells, worst deviation {worst:.2} SE; outside 3 SE: [{}]", bad.join(" ")))
}

fn criterion_6() -> Outcome {
    let dims = SectorDims::new(6, 3, 3).unwrap();
    let d: Vec<f64> = dims.d().iter().map(|&x| x as f64).collect();
    let dm = dims.d_m() as f64;
    let n = d.len();
    let base = RandomSource::new(SEED ^ 6, 0);
    let draws: Vec<Vec<f64>> =
        (0..100_000u64).into_par_iter().map(|i| sample_dirichlet(&dims, &mut base.derive(i)).unwrap()).collect();
    let mut worst = 0.0f64;
    let mut pass = true;
    for j in 0..n {
        for jp in j..n {
            let v: Vec<f64> = draws.iter().map(|p| p[j] * p[jp]).collect();
            let s = McStats::from_samples(&v).unwrap();
            let want = (d[j] * d[jp] + if j == jp { d[j] } else { 0.0 }) / (dm * (dm + 1.0));
            let z = (s.mean - want).abs() / s.std_err;
            pass &= z <= 3.0;
            worst = worst.max(z);
        }
    }
    outcome(pass, format!("{} pairs, worst deviation {worst:.2} SE (tol 3)", n * (n + 1) / 2))
}

fn criterion_7() -> Outcome {
    let theta_star = 1.1f64.atan2(0.35);
    let cfg = config(&["sizes=[8, 10]", "theta_points=64"]);
    let (_, summaries) = match theta_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for s in &summaries {
        let l = s.sites;
        let dims = SectorDims::new(l, l, l / 2).unwrap();
        let mc = mc_asymmetry_stats(&dims, &ChargeSpec::x(), 200, &RandomSource::new(SEED ^ 7, l as u64)).unwrap();
        let sigma = mc.std_dev();
        let arg_ok = (s.argmin - theta_star).abs() <= 0.1;
        let max_ok = (s.max_mean - s.prediction).abs() <= 3.0 * sigma;
        pass &= arg_ok && max_ok;
        parts.push(format!(
            "L={l}: argmin {:.4} (target {theta_star:.4} ± 0.1), max {:.4} vs {:.4} ± {:.4}",
            s.argmin,
            s.max_mean,
            s.prediction,
            3.0 * sigma
        ));
    }
    outcome(pass, parts.join("; "))
}

struct Tracking {
    u1_mad: f64,
    haar_inside: f64,
    haar_outside: f64,
    windows: usize,
}

/// Windows of width 0.05 in ε/ε* tiling |ε/ε*| < 0.5.
fn tracking(s: &Spectrum, ell: usize) -> Tracking {
    let l = s.sites;
    let idx: Vec<usize> = (0..s.eps.len()).filter(|&k| s.eps[k].abs() < 0.5).collect();
    let ds = eigenstate_asymmetries(s, &idx, ell, &ChargeSpec::y()).unwrap();
    let haar = predicted_asymmetry_haar(l, ell).unwrap();
    let (mut u1, mut inside, mut outside) = (Vec::new(), Vec::new(), Vec::new());
    for w in 0..20 {
        let center = -0.475 + 0.05 * w as f64;
        let members: Vec<usize> =
            (0..idx.len()).filter(|&i| s.eps[idx[i]] >= center - 0.025 && s.eps[idx[i]] < center + 0.025).collect();
        if members.is_empty() {
            continue;
        }
        let n = members.len() as f64;
        let mean = members.iter().map(|&i| ds[i]).sum::<f64>() / n;
        let pred = members
            .iter()
            .map(|&i| predicted_asymmetry_u1(l, ell, energy_charge_map(s.eps[idx[i]], l)).unwrap())
            .sum::<f64>()
            / n;
        u1.push((mean - pred).abs());
        if center.abs() < 0.1 {
            inside.push((mean - haar).abs());
        } else {
            outside.push((mean - haar).abs());
        }
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Tracking { u1_mad: avg(&u1), haar_inside: avg(&inside), haar_outside: avg(&outside), windows: u1.len() }
}

fn spectrum_checks(cfg: &ExperimentConfig, model: ChainModel, s: &Spectrum) -> (bool, String) {
    let h = model.build(SiteCount::new(s.sites).unwrap(), &cfg.couplings()).unwrap();
    let res = s.spec.max_residual(&h);
    let orth = s.spec.orthonormality_error();
    (res <= RESIDUAL_TOL && orth <= ORTHONORMALITY_TOL, format!("residual {res:.1e}, orthonormality {orth:.1e}"))
}

fn criterion_8(cfg: &ExperimentConfig, s: &Spectrum) -> Outcome {
    let (ok, checks) = spectrum_checks(cfg, ChainModel::Mfim, s);
    let mut pass = ok;
    let mut haar_fails_outside = false;
    let mut parts = vec![checks];
    for ell in [3usize, 8] {
        let t = tracking(s, ell);
        pass &= t.u1_mad <= 0.2 && t.haar_inside <= 0.2;
        haar_fails_outside |= t.haar_outside > 0.2;
        parts.push(format!(
            "ℓ_A={ell}: U(1) MAD {:.3} over {} windows, flat baseline MAD {:.3} inside |ε|<0.1 and {:.3} outside",
            t.u1_mad, t.windows, t.haar_inside, t.haar_outside
        ));
    }
    pass &= haar_fails_outside;
    outcome(pass, format!("{} (tol 0.2; baseline must exceed it outside for some ℓ_A)", parts.join("; ")))
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (l, ell, m) in [(6usize, 3usize, 2usize), (8, 4, 4), (10, 5, 5), (10, 3, 7), (12, 6, 6)] {
        let dims = SectorDims::new(l, ell, m).unwrap();
        let part = Bipartition::new(SiteCount::new(l).unwrap(), ell).unwrap();
        let base = RandomSource::new(SEED ^ 9, l as u64 * 100 + m as u64);
        for i in 0..50 {
            let st = sample_u1_state(&dims, &mut base.derive(i)).unwrap();
            worst = worst.max(asymmetry2(&st, &part, &ChargeSpec::z()).unwrap());
            count += 1;
        }
    }
    let mut product_zero = true;
    for l in 1..=12usize {
        let sc = SiteCount::new(l).unwrap();
        let st = PureState::basis(sc, 0).unwrap();
        for ell in 0..=l {
            let part = Bipartition::new(sc, ell).unwrap();
            product_zero &= asymmetry2(&st, &part, &ChargeSpec::z()).unwrap() == 0.0;
        }
    }
    outcome(
        worst < 1e-10 && product_zero,
        format!("{count} U(1) states, max ΔS {worst:.1e}; |0…0⟩ exactly zero for all L ≤ 12, ℓ_A: {product_zero}"),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for model in [ChainModel::NnnIsing, ChainModel::XxzFields] {
        let cfg = config(&[&format!("model=\"{}\"", model.name()), "sites=12"]);
        let s = match compute_spectrum(&cfg, model, 12) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        let (ok, checks) = spectrum_checks(&cfg, model, &s);
        pass &= ok;
        let mut line = format!("{} ({checks})", model.name());
        for ell in [3usize, 8] {
            let t = tracking(&s, ell);
            pass &= t.u1_mad <= 0.25;
            line.push_str(&format!(
                " ℓ_A={ell}: U(1) MAD {:.3} (baseline {:.3}/{:.3})",
                t.u1_mad, t.haar_inside, t.haar_outside
            ));
        }
        parts.push(line);
    }
    outcome(pass, format!("{} (tol 0.25)", parts.join("; ")))
}

fn criterion_11(s: &Spectrum) -> Outcome {
    let eps = s.fit.eps_star;
    let range_ok = (1.3..=1.7).contains(&eps);
    let l = 10;
    let mut rng = RandomSource::new(SEED ^ 11, 0);
    let normal = Normal::new(3.0, 2.0 * (l as f64).sqrt()).unwrap();
    let sample: Vec<f64> = (0..20_000).map(|_| normal.sample(rng.rng())).collect();
    let (synth_ok, synth) = match dos_fit(&sample, l) {
        Ok(f) => (
            (f.e_p - 3.0).abs() < 0.15 && (f.eps_star - 2.0).abs() < 0.05 && f.rel_residual < 0.1,
            format!("synthetic E_p {:.3} (3), ε* {:.4} (2), residual {:.3}", f.e_p, f.eps_star, f.rel_residual),
        ),
        Err(e) => (false, e.to_string()),
    };
    outcome(
        range_ok && synth_ok,
        format!("MFIM L=12 ε* {eps:.4} (moment {:.4}) in [1.3, 1.7]: {range_ok}; {synth}", s.fit.eps_star_moment),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_entasym"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &["ensemble-validate", "--set", "sizes=[8]", "--set", "charges=[3,4]", "--ell-a", "2,4", "--samples", "60"],
        &["theta-sweep", "--set", "sizes=[8]", "--set", "theta_points=16"],
        &["phi-sweep", "--set", "sizes=[8]", "--set", "phi_points=9"],
        &["spectrum-scan", "--sites", "8", "--ell-a", "3,4"],
        &["window-average", "--sites", "8", "--set", "window_count=20"],
        &["dos-fit", "--sites", "8"],
    ];
    let mut identical = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut first = args.to_vec();
        first.extend(["--seed", "99", "--threads", "1"]);
        let mut second = args.to_vec();
        second.extend(["--seed", "99", "--threads", "4"]);
        let a = run_cli(&first, &dir.path().join(format!("{i}a")));
        let b = run_cli(&second, &dir.path().join(format!("{i}b")));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => identical += 1,
            (Ok(_), Ok(_)) => return outcome(false, format!("{} differs between runs", args[0])),
            (Err(e), _) | (_, Err(e)) => return outcome(false, e),
        }
    }
    outcome(true, format!("{identical}/{} commands byte-identical across reruns and thread counts", runs.len()))
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    suite.run(1, "closed-form χ vs triple-sum oracle", 120.0, criterion_1);
    suite.run(2, "trace_AA vs explicit projectors", 30.0, criterion_2);
    suite.run(3, "terminating hypergeometric identity", 10.0, criterion_3);
    suite.run(4, "U(1) Monte Carlo vs closed form", 1200.0, criterion_4);
    suite.run(5, "average purity", 300.0, criterion_5);
    suite.run(6, "Dirichlet second moment", 60.0, criterion_6);
    suite.run(7, "θ sweep minimum and maximum", 600.0, criterion_7);

    let t = Instant::now();
    let cfg = config(&["sites=12"]);
    let mfim = compute_spectrum(&cfg, ChainModel::Mfim, 12).expect("MFIM L=12 spectrum");
    let eig_s = t.elapsed().as_secs_f64();
    suite.run(8, "full-spectrum tracking, MFIM L=12", 900.0 - eig_s, || criterion_8(&cfg, &mfim));
    suite.run(9, "exact-symmetry zero", 60.0, criterion_9);
    suite.run(10, "universality, NNN and XXZ at L=12", 1800.0, criterion_10);
    suite.run(11, "DOS fit", 120.0 - eig_s, || criterion_11(&mfim));
    suite.run(12, "CLI determinism", 300.0, criterion_12);

    if suite.failed.is_empty() {
        println!("acceptance: all 12 criteria PASS");
    } else {
        println!("acceptance: FAIL {:?}", suite.failed);
        std::process::exit(1);
    }
}
