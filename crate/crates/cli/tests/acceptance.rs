//! Acceptance checks, one PASS/FAIL line each. Runs as its own binary so the
//! lines always reach the test log.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use pvsmooth::battery::{capacity_at, fit_kibam, propagate, BatteryState, DischargePoint, KibamConstants};
use pvsmooth::data::{synthesize_day, synthetic_year, Profile, SiteMeta, SyntheticYear};
use pvsmooth::empirical::{estimate_sboc, fit_regression, RegressionModel};
use pvsmooth::sizing::{
    coverage, feasible_per_kwp, hourly_year_sizing, optimize_day, prepare_days, sensitivity_sweep, size_year,
    PreparedDay, SearchBounds, SizingSetup, SweepAxis, MINUTE_HOURS,
};
use pvsmooth::smoothing::{rr_smooth, RampReference, Smoother};
use pvsmooth::solar::{clear_sky, sivi};

const MINUTE: f64 = 1.0 / 60.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn site() -> SiteMeta {
    SiteMeta::new("synthetic", "Synthetic arid inland site", -23.698, 133.88, 9.5).unwrap()
}

struct Fixture {
    year: SyntheticYear,
    days: Vec<PreparedDay>,
}

fn fixture() -> Fixture {
    let year = synthetic_year(&site(), 2017, 2017);
    let days = prepare_days(&year.site, &year.days, &year.temps, &SizingSetup::default().pv).unwrap();
    Fixture { year, days }
}

fn c1_worked_example() -> Outcome {
    let m = RegressionModel { alpha: 0.0046, beta: 0.0567, sigma: 0.0315, n_samples: 0 };
    let v = estimate_sboc(&m, 22.0);
    outcome((v - 0.1894).abs() <= 1e-6, format!("estimate {v:.8}"))
}

fn c2_sivi_identity() -> Outcome {
    let sites = [
        site(),
        SiteMeta::new("t", "tropical", -12.4, 130.8, 9.5).unwrap(),
        SiteMeta::new("n", "northern", 47.5, 8.5, 1.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for s in &sites {
        for month in 1..=12 {
            let date = NaiveDate::from_ymd_opt(2017, month, 10 + month).unwrap();
            let day = synthesize_day(Profile::Clear, 0, s, date);
            let v = sivi(&day, &clear_sky(s, date)).unwrap().sivi;
            worst = worst.max((v - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("36 clear days, max |sivi - 1| = {worst:.1e}"))
}

fn euler(s: &BatteryState, current: f64, k: f64, c: f64) -> BatteryState {
    let n = 1000;
    let h = MINUTE / n as f64;
    let (mut q1, mut q2) = (s.q1, s.q2);
    for _ in 0..n {
        let flow = k * (1.0 - c) * q1 - k * c * q2;
        q1 += h * (-current - flow);
        q2 += h * flow;
    }
    BatteryState { q1, q2 }
}

fn c3_kibam_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.gen_range(0.1..5.0);
        let c = rng.gen_range(0.1..0.9);
        let e_nom = rng.gen_range(0.1..10.0);
        let total = e_nom * rng.gen_range(0.3..1.0);
        let q1 = total * rng.gen_range(0.05..0.95);
        let state = BatteryState { q1, q2: total - q1 };
        let current = e_nom * rng.gen_range(-3.0..3.0);
        let constants = KibamConstants { k1: k, k2: c, q_max_ref: 1.0 };
        let exact = propagate(&state, current, MINUTE, &constants);
        let oracle = euler(&state, current, k, c);
        for (a, b) in [(exact.q1, oracle.q1), (exact.q2, oracle.q2)] {
            worst = worst.max((a - b).abs() / b.abs().max(1e-3 * e_nom));
        }
    }
    outcome(worst < 1e-3, format!("1000 cases, max relative error {worst:.2e}"))
}

fn c4_kibam_fit() -> Outcome {
    let table: Vec<DischargePoint> = [(1.0, 242.4), (3.0, 115.7), (5.0, 79.8), (8.0, 55.23), (10.0, 47.01)]
        .iter()
        .map(|&(hours, amps)| DischargePoint { hours, amps })
        .collect();
    let fit = fit_kibam(&table).unwrap();
    let worst_table = table
        .iter()
        .map(|p| (capacity_at(p.hours, &fit) / p.delivered_ah() - 1.0).abs())
        .fold(0.0, f64::max);

    let truth = KibamConstants { k1: 0.8, k2: 0.4, q_max_ref: 300.0 };
    let synthetic: Vec<DischargePoint> = [1.0, 2.0, 4.0, 6.0, 10.0, 20.0]
        .iter()
        .map(|&hours| DischargePoint { hours, amps: capacity_at(hours, &truth) / hours })
        .collect();
    let rec = fit_kibam(&synthetic).unwrap();
    let worst_rec = [rec.k1 / truth.k1, rec.k2 / truth.k2, rec.q_max_ref / truth.q_max_ref]
        .iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst_table <= 0.02 && worst_rec <= 0.01,
        format!("table max deviation {:.2}%, synthetic recovery max {:.3}%", 100.0 * worst_table, 100.0 * worst_rec),
    )
}

fn scan_days() -> Vec<PreparedDay> {
    let s = site();
    let mut irr = Vec::new();
    let mut temps = Vec::new();
    let year = synthetic_year(&s, 2018, 5);
    for i in 0..20u32 {
        let date = NaiveDate::from_ymd_opt(2018, 1 + i % 12, 3 + i).unwrap();
        let profile = if i % 2 == 0 { Profile::Mixed } else { Profile::SquareWave { period: 20 + 10 * (i % 5) } };
        irr.push(synthesize_day(profile, 1000 + i as u64, &s, date));
        let mut t = year.temps[0];
        t.date = date;
        temps.push(t);
    }
    let mut order: Vec<usize> = (0..irr.len()).collect();
    order.sort_by_key(|&i| irr[i].date);
    let irr: Vec<_> = order.iter().map(|&i| irr[i].clone()).collect();
    let temps: Vec<_> = order.iter().map(|&i| temps[i]).collect();
    prepare_days(&s, &irr, &temps, &SizingSetup::default().pv).unwrap()
}

fn c5_optimizer_oracle() -> Outcome {
    let setup = SizingSetup::default();
    let tol = setup.search.tol;
    let mut worst: f64 = 0.0;
    for d in &scan_days() {
        let got = optimize_day(d, &setup).sboc;
        let p_sb = setup.smoother.apply(&d.power, setup.pv.p_nom).p_sb;
        let mut k = 1u32;
        let oracle = loop {
            let c = k as f64 * tol;
            if feasible_per_kwp(&p_sb, &setup, c, MINUTE_HOURS) || c >= setup.search.upper {
                break c;
            }
            k += 1;
        };
        worst = worst.max((got - oracle).abs());
    }
    outcome(worst <= 2.0 * tol, format!("20 days, max |bisection - scan| = {worst:.2e} (limit {:.0e})", 2.0 * tol))
}

fn c6_monotone(fx: &Fixture) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mixed: Vec<&PreparedDay> = fx.days.iter().filter(|d| d.sivi > 2.0).collect();
    let mut violations = 0;
    let mut feasible_pairs = 0;
    for i in 0..200 {
        let day = mixed[rng.gen_range(0..mixed.len())];
        let smoother = if i % 2 == 0 { Smoother::moving_average(10) } else { Smoother::ramp_rate(0.05) };
        let setup = SizingSetup { smoother, ..SizingSetup::default() };
        let p_sb = smoother.apply(&day.power, setup.pv.p_nom).p_sb;
        let a = rng.gen_range(0.001..0.4);
        let b = a + rng.gen_range(1e-4..0.4);
        let fa = feasible_per_kwp(&p_sb, &setup, a, MINUTE_HOURS);
        let fb = feasible_per_kwp(&p_sb, &setup, b, MINUTE_HOURS);
        if fa {
            feasible_pairs += 1;
            if !fb {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("200 pairs ({feasible_pairs} with the smaller capacity feasible), {violations} violations"),
    )
}

fn c7_coverage(fx: &Fixture) -> Outcome {
    let setup = SizingSetup::default();
    let report = size_year(&fx.days, &setup, 0.95).unwrap();
    let cov = coverage(&fx.days, &setup, report.sboc);
    let n = (cov * fx.days.len() as f64).round() as usize;
    outcome(n >= 347, format!("P95 capacity {:.4} kWh/kWp covers {n}/{} days", report.sboc, fx.days.len()))
}

fn means(fx: &Fixture, base: &SizingSetup, axis: SweepAxis, values: &[f64]) -> Vec<f64> {
    sensitivity_sweep(&fx.days, base, axis, values, 0.95)
        .unwrap()
        .iter()
        .map(|r| r.mean_sboc)
        .collect()
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" < ")
}

fn c8_sensitivity(fx: &Fixture) -> Outcome {
    let ma = SizingSetup::default();
    let rr = SizingSetup { smoother: Smoother::ramp_rate(0.05), ..ma };
    let window = means(fx, &ma, SweepAxis::MaWindow, &[5.0, 10.0, 15.0, 20.0]);
    let limit = means(fx, &rr, SweepAxis::RrLimit, &[0.15, 0.10, 0.05, 0.01]);
    let dod = means(fx, &ma, SweepAxis::Dod, &[0.8, 0.7, 0.6, 0.5]);
    let soc = means(fx, &ma, SweepAxis::SocInit, &[0.9, 0.6]);
    let soc_change = (soc[1] - soc[0]).abs() / soc[0];
    let parts = [
        (increasing(&window), format!("MA 5->20: {}", fmt(&window))),
        (increasing(&limit), format!("RR 15%->1%: {}", fmt(&limit))),
        (increasing(&dod), format!("DoD 80%->50%: {}", fmt(&dod))),
        (
            soc_change < 0.20,
            format!("SoC_init 90%->60%: {:.4} -> {:.4} ({:+.1}%)", soc[0], soc[1], 100.0 * soc_change),
        ),
    ];
    let detail = parts
        .iter()
        .map(|(ok, s)| format!("[{}] {s}", if *ok { "ok" } else { "FAIL" }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(parts.iter().all(|p| p.0), detail)
}

fn c9_ramp_limit(fx: &Fixture) -> Outcome {
    let p_nom = SizingSetup::default().pv.p_nom;
    let mut extra = scan_days();
    extra.extend(fx.days.iter().cloned());
    let mut worst_excess = f64::NEG_INFINITY;
    let mut series = 0;
    for d in &extra {
        for k in [0.01, 0.05, 0.10, 0.15] {
            let out = rr_smooth(&d.power, k, p_nom, RampReference::PreviousSmoothed).p_target;
            series += 1;
            for w in out.windows(2) {
                worst_excess = worst_excess.max((w[1] - w[0]).abs() - k * p_nom);
            }
        }
    }
    outcome(worst_excess <= 1e-9, format!("{series} series, max excess over limit {worst_excess:.3e} W"))
}

fn c10_regression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let points: Vec<(f64, f64)> = (0..365)
        .map(|_| {
            let x = rng.gen_range(1.0..25.0);
            (x, 0.005 * x + 0.05 + noise.sample(&mut rng))
        })
        .collect();
    let m = fit_regression(&points).unwrap();
    let (mut s0, mut s1) = (0.0, 0.0);
    for &(x, y) in &points {
        let r = y - m.predict(x);
        s0 += r;
        s1 += r * x;
    }
    let ok = (m.alpha - 0.005).abs() <= 0.0005 && (m.beta - 0.05).abs() <= 0.01 && s0.abs() < 1e-9 && s1.abs() < 1e-9;
    outcome(
        ok,
        format!("alpha {:.5}, beta {:.4}, sum r {:.1e}, sum r*x {:.1e}", m.alpha, m.beta, s0, s1),
    )
}

fn c11_ordering(fx: &Fixture) -> Outcome {
    let setup = SizingSetup::default();
    let p100 = size_year(&fx.days, &setup, 1.0).unwrap().sboc;
    let hourly = SizingSetup { search: SearchBounds::HOURLY, ..setup };
    let h = hourly_year_sizing(&fx.days, &hourly).unwrap();
    outcome(
        h.feasible_at_cap && h.sboc >= p100,
        format!("hourly {:.4} >= per-day P100 {:.4} kWh/kWp", h.sboc, p100),
    )
}

fn hash_dir(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "txt")))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let digest = Sha256::digest(std::fs::read(p).unwrap());
            (p.file_name().unwrap().to_string_lossy().into_owned(), format!("{digest:x}"))
        })
        .collect()
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_pvsmooth")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c12_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let curve = root.join("curve.csv");
    std::fs::write(&curve, "hours,amps\n1,242.4\n3,115.7\n5,79.8\n8,55.23\n10,47.01\n").unwrap();

    let mut digests: Vec<Vec<(String, String)>> = Vec::new();
    for (i, jobs) in ["1", "8", "8"].iter().enumerate() {
        let data = root.join(format!("data{i}"));
        let out = root.join(format!("out{i}"));
        let d = data.to_str().unwrap();
        let o = out.to_str().unwrap();
        run(&["--jobs", jobs, "synth", "--days", "60", "--out", d]);
        run(&["--jobs", jobs, "sivi", "--data", d, "--out", o]);
        run(&["--jobs", jobs, "size", "--data", d, "--out", o]);
        run(&["--jobs", jobs, "compare", "--data", d, "--out", o]);
        run(&["--jobs", jobs, "sensitivity", "--data", d, "--axis", "dod", "--values", "0.8,0.5", "--out", o]);
        let k = out.join("kibam.txt");
        run(&["--jobs", jobs, "fit-battery", "--curve", curve.to_str().unwrap(), "--output", k.to_str().unwrap()]);
        let est = run(&["estimate", "--sivi", "12.5", "--coeffs", out.join("regression.txt").to_str().unwrap()]);
        std::fs::write(out.join("estimate.txt"), est).unwrap();
        let mut h = hash_dir(&data);
        h.extend(hash_dir(&out));
        digests.push(h);
    }
    let same = digests.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("{} files hashed across --jobs 1/8/8 runs", digests[0].len()))
}

fn main() {
    let started = Instant::now();
    let fx = fixture();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 worked estimate example", Box::new(c1_worked_example)),
        ("2 SIVI identity on clear days", Box::new(c2_sivi_identity)),
        ("3 KiBaM closed form vs Euler", Box::new(c3_kibam_oracle)),
        ("4 KiBaM fit", Box::new(c4_kibam_fit)),
        ("5 optimizer vs linear scan", Box::new(c5_optimizer_oracle)),
        ("6 monotone feasibility", Box::new(|| c6_monotone(&fx))),
        ("7 P95 coverage", Box::new(|| c7_coverage(&fx))),
        ("8 sensitivity directions", Box::new(|| c8_sensitivity(&fx))),
        ("9 ramp-rate guarantee", Box::new(|| c9_ramp_limit(&fx))),
        ("10 regression recovery", Box::new(c10_regression)),
        ("11 hourly >= per-day P100", Box::new(|| c11_ordering(&fx))),
        ("12 CLI determinism", Box::new(c12_determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed ({} days in fixture year, {:.1}s)",
        checks.len() - failed,
        fx.year.days.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
