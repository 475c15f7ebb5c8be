//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::collections::{HashMap, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Pareto};

use tailscope::binning::{PointConvention, Scale};
use tailscope::distfit::tail::{DEFAULT_TAIL_FRACTION, DEFAULT_THRESHOLD_M};
use tailscope::distfit::{
    compare_models, fit_censored, fit_power_law, heavy_tail_diagnostic, CensoredBins, Family,
    ModelKind, Verdict,
};
use tailscope::quantities::{dest_fanin, dest_packets, scalars, source_fanout, source_packets};
use tailscope::synth::{generate, SynthModel, SynthSpec};
use tailscope::{ccdf, ccdf_real, log_bin, CountVector, TrafficMatrix, TrafficRecord};
use tailscope_cli::json::{render, Section};
use tailscope_cli::report::{analyze, InputDescriptor, SchemaDescriptor};
use tailscope_cli::Settings;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn sizes<'a>(m: &HashMap<&'a str, HashSet<&'a str>>) -> HashMap<&'a str, u64> {
    m.iter().map(|(k, s)| (*k, s.len() as u64)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn density() -> PointConvention {
    PointConvention {
        scale: Scale::Density,
        ..Default::default()
    }
}

fn random_records(rng: &mut ChaCha8Rng, n: usize) -> Vec<TrafficRecord> {
    let sources = rng.random_range(1..200);
    let destinations = rng.random_range(1..200);
    (0..n)
        .map(|i| TrafficRecord {
            time: i as u64,
            source: format!("10.0.{}", rng.random_range(0..sources)),
            destination: format!("192.168.{}", rng.random_range(0..destinations)),
            packets: rng.random_range(1..=1500),
        })
        .collect()
}

fn matches(v: &CountVector, oracle: &HashMap<&str, u64>) -> bool {
    v.len() == oracle.len() && v.iter().all(|(label, x)| oracle.get(label) == Some(&x))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let n = rng.random_range(1..=2000);
        let records = random_records(&mut rng, n);
        let a = TrafficMatrix::from_records(&records).map_err(|e| e.to_string())?;

        let mut src_pkts: HashMap<&str, u64> = HashMap::new();
        let mut dst_pkts: HashMap<&str, u64> = HashMap::new();
        let mut src_peers: HashMap<&str, HashSet<&str>> = HashMap::new();
        let mut dst_peers: HashMap<&str, HashSet<&str>> = HashMap::new();
        let mut links: HashSet<(&str, &str)> = HashSet::new();
        let mut total = 0u128;
        for r in &records {
            *src_pkts.entry(&r.source).or_default() += r.packets;
            *dst_pkts.entry(&r.destination).or_default() += r.packets;
            src_peers
                .entry(&r.source)
                .or_default()
                .insert(&r.destination);
            dst_peers
                .entry(&r.destination)
                .or_default()
                .insert(&r.source);
            links.insert((&r.source, &r.destination));
            total += u128::from(r.packets);
        }

        let s = scalars(&a);
        ensure(matches(&source_packets(&a), &src_pkts), || {
            format!("case {case}: source packets")
        })?;
        ensure(matches(&dest_packets(&a), &dst_pkts), || {
            format!("case {case}: dest packets")
        })?;
        ensure(matches(&source_fanout(&a), &sizes(&src_peers)), || {
            format!("case {case}: fan-out")
        })?;
        ensure(matches(&dest_fanin(&a), &sizes(&dst_peers)), || {
            format!("case {case}: fan-in")
        })?;
        ensure(s.valid_packets == total, || {
            format!("case {case}: valid packets")
        })?;
        ensure(s.unique_links == links.len() as u64, || {
            format!("case {case}: unique links")
        })?;
        ensure(s.unique_sources == src_pkts.len() as u64, || {
            format!("case {case}: unique sources")
        })?;
        ensure(s.unique_destinations == dst_pkts.len() as u64, || {
            format!("case {case}: unique destinations")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:.2?}, limit 5 s")
    })?;
    Ok(format!("100 record lists, {elapsed:.2?}"))
}

fn algebraic_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let n = rng.random_range(0..300);
        let a =
            TrafficMatrix::from_records(&random_records(&mut rng, n)).map_err(|e| e.to_string())?;
        let t = a.transpose();
        let z = a.zero_norm();
        let nnz = a.nnz() as u128;
        ensure(
            source_packets(&a).sum() == a.total() && dest_packets(&a).sum() == a.total(),
            || format!("case {case}: packet conservation"),
        )?;
        ensure(
            source_fanout(&a).sum() == nnz && dest_fanin(&a).sum() == nnz,
            || format!("case {case}: fan-out/fan-in totals vs stored entries"),
        )?;
        ensure(z.zero_norm() == z && z.nnz() == a.nnz(), || {
            format!("case {case}: zero-norm idempotence")
        })?;
        ensure(t.transpose() == a, || {
            format!("case {case}: double transpose")
        })?;
        ensure(
            dest_fanin(&a) == source_fanout(&t) && dest_packets(&a) == source_packets(&t),
            || format!("case {case}: transpose duality"),
        )?;
    }
    Ok("1000 matrices".into())
}

fn binning_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values: Vec<u64> = (0..100_000)
        .map(|_| rng.random_range(1..=1_000_000))
        .collect();
    let h = log_bin(&values).map_err(|e| e.to_string())?;

    let mut oracle: HashMap<u32, u64> = HashMap::new();
    for &v in &values {
        let d = format!("{v:b}").len() as u32 - 1;
        let homes: Vec<_> = h.bins.iter().filter(|b| b.contains(v)).collect();
        ensure(homes.len() == 1, || {
            format!("{v} lies in {} bins", homes.len())
        })?;
        ensure(homes[0].exponent == d, || {
            format!(
                "{v} binned at 2^{}, bit length says 2^{d}",
                homes[0].exponent
            )
        })?;
        ensure(
            homes[0].lower() <= u128::from(v) && u128::from(v) < homes[0].upper(),
            || format!("{v} outside its bin bounds"),
        )?;
        *oracle.entry(d).or_default() += 1;
    }
    for b in &h.bins {
        ensure(
            oracle.get(&b.exponent).copied().unwrap_or(0) == b.count,
            || format!("bin 2^{} count {}", b.exponent, b.count),
        )?;
    }
    ensure(h.total == values.len() as u64, || "histogram total".into())?;

    let powers: Vec<u64> = (0..64).map(|k| 1u64 << k).collect();
    let p = log_bin(&powers).map_err(|e| e.to_string())?;
    for (k, &v) in powers.iter().enumerate() {
        let b = p
            .bins
            .iter()
            .find(|b| b.contains(v))
            .ok_or("power of two unbinned")?;
        ensure(b.exponent == k as u32 && b.lower() == u128::from(v), || {
            format!("2^{k} not in its own lower bin")
        })?;
    }
    Ok(format!(
        "10^5 values over {} bins, 64 powers of two",
        h.bins.len()
    ))
}

fn power_law_recovery() -> Outcome {
    let start = Instant::now();
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let spec = SynthSpec {
            seed,
            n_records: 100_000,
            n_sources: 100_000,
            n_destinations: 10_000,
            model: SynthModel::Zipf { alpha: 2.0 },
        };
        let records = generate(&spec).map_err(|e| e.to_string())?;
        let a = TrafficMatrix::from_records(&records).map_err(|e| e.to_string())?;
        let h = log_bin(dest_fanin(&a).values()).map_err(|e| e.to_string())?;
        let fit = fit_power_law(&h.representatives(density()), 1).map_err(|e| e.to_string())?;
        let err = (fit.slope_n + 2.0).abs();
        worst = worst.max(err);
        if err <= 0.15 {
            within += 1;
        }
    }

    let (n, log10k) = (-1.7, 3.25);
    let exact: Vec<(f64, f64)> = (0..12)
        .map(|d| {
            let x = 2f64.powi(d);
            (x, 10f64.powf(log10k) * x.powf(n))
        })
        .collect();
    let line = fit_power_law(&exact, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(within >= 95, || {
        format!("{within}/100 seeds within 0.15 of -2")
    })?;
    ensure(
        (line.slope_n - n).abs() <= 1e-12 && (line.intercept_log10k - log10k).abs() <= 1e-12,
        || {
            format!(
                "exact line gave n={} log10k={}",
                line.slope_n, line.intercept_log10k
            )
        },
    )?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:.2?}, limit 30 s")
    })?;
    Ok(format!(
        "{within}/100 seeds, worst |n+2| = {worst:.4}, {elapsed:.2?}"
    ))
}

fn censored_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let exp = Exp::new(1.0).unwrap();
    let samples: Vec<f64> = (0..100_000).map(|_| exp.sample(&mut rng)).collect();
    let bins = CensoredBins::from_pow2_samples(&samples).map_err(|e| e.to_string())?;
    let fit = fit_censored(&bins, Family::Exponential).map_err(|e| e.to_string())?;
    let lambda = fit.params[0];
    ensure((0.95..=1.05).contains(&lambda), || {
        format!("lambda = {lambda}")
    })?;

    let normal = Normal::new(20.0, 4.0).unwrap();
    let samples: Vec<f64> = (0..100_000)
        .map(|_| normal.sample(&mut rng))
        .filter(|x: &f64| *x > 0.0)
        .collect();
    let bins = CensoredBins::from_pow2_samples(&samples).map_err(|e| e.to_string())?;
    let fit = fit_censored(&bins, Family::Normal).map_err(|e| e.to_string())?;
    let (mu, sigma) = (fit.params[0], fit.params[1]);
    ensure(
        (mu / 20.0 - 1.0).abs() <= 0.05 && (sigma / 4.0 - 1.0).abs() <= 0.05,
        || format!("mu = {mu}, sigma = {sigma}"),
    )?;
    Ok(format!(
        "lambda = {lambda:.4}, mu = {mu:.3}, sigma = {sigma:.3}"
    ))
}

/// Ranking of every censored family and the power law on binned real samples.
fn rank(samples: &[f64]) -> Result<Vec<ModelKind>, String> {
    let bins = CensoredBins::from_pow2_samples(samples).map_err(|e| e.to_string())?;
    let conv = density();
    let points: Vec<(f64, f64)> = bins
        .intervals()
        .iter()
        .map(|iv| conv.point(iv.lower, iv.upper, iv.count as f64))
        .collect();
    let pl = fit_power_law(&points, 1).map_err(|e| e.to_string())?;
    let fits: Vec<_> = Family::ALL
        .iter()
        .filter_map(|&f| fit_censored(&bins, f).ok())
        .collect();
    ensure(fits.len() == Family::ALL.len(), || {
        "a light-tailed family failed to fit".into()
    })?;
    Ok(compare_models(&fits, Some(&pl), conv, &bins)
        .into_iter()
        .map(|s| s.model)
        .collect())
}

fn light_heavy_separation() -> Outcome {
    let pareto = Pareto::new(1.0, 1.5).unwrap();
    let exp = Exp::new(1.0).unwrap();
    let (mut heavy_ok, mut light_ok) = (0, 0);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let heavy: Vec<f64> = (0..10_000).map(|_| pareto.sample(&mut rng)).collect();
        if rank(&heavy)?[0] == ModelKind::PowerLaw {
            heavy_ok += 1;
        }
        let light: Vec<f64> = (0..10_000).map(|_| exp.sample(&mut rng)).collect();
        let order = rank(&light)?;
        let pos = |m: ModelKind| order.iter().position(|&x| x == m);
        if pos(ModelKind::Family(Family::Exponential)) < pos(ModelKind::PowerLaw) {
            light_ok += 1;
        }
    }
    ensure(heavy_ok >= 95 && light_ok >= 95, || {
        format!("power law first on {heavy_ok}/100 Pareto seeds, exponential above power law on {light_ok}/100")
    })?;
    Ok(format!("Pareto {heavy_ok}/100, exponential {light_ok}/100"))
}

fn tail_diagnostic() -> Outcome {
    let pareto = Pareto::new(1.0, 1.5).unwrap();
    let exp = Exp::new(1.0).unwrap();
    let verdict = |samples: &[f64]| -> Result<Verdict, String> {
        let c = ccdf_real(samples).map_err(|e| e.to_string())?;
        Ok(
            heavy_tail_diagnostic(&c, DEFAULT_TAIL_FRACTION, DEFAULT_THRESHOLD_M)
                .map_err(|e| e.to_string())?
                .verdict,
        )
    };
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let heavy: Vec<f64> = (0..10_000).map(|_| pareto.sample(&mut rng)).collect();
        let light: Vec<f64> = (0..10_000).map(|_| exp.sample(&mut rng)).collect();
        let small: Vec<f64> = (0..49).map(|_| pareto.sample(&mut rng)).collect();
        let got = (verdict(&heavy)?, verdict(&light)?, verdict(&small)?);
        ensure(
            got == (Verdict::Heavy, Verdict::Light, Verdict::Inconclusive),
            || {
                format!(
                    "seed {seed}: Pareto {:?}, exponential {:?}, 49 samples {:?}",
                    got.0, got.1, got.2
                )
            },
        )?;
    }
    Ok("20 seeds: heavy, light, inconclusive".into())
}

fn determinism() -> Outcome {
    let spec = SynthSpec {
        seed: 8,
        n_records: 60_000,
        n_sources: 20_000,
        n_destinations: 5_000,
        model: SynthModel::Zipf { alpha: 2.0 },
    };
    let records = generate(&spec).map_err(|e| e.to_string())?;
    let settings = Settings {
        window: std::num::NonZeroUsize::new(15_000),
        scale: Scale::Density,
        ..Settings::default()
    };
    let input = InputDescriptor {
        path: "synthetic".into(),
        rows: records.len(),
        skipped_rows: Vec::new(),
        schema: SchemaDescriptor::describe(&Default::default()),
    };
    let json = |threads: usize| -> Result<String, String> {
        let report =
            analyze(&records, input.clone(), &settings, threads).map_err(|e| e.to_string())?;
        render(&report, Section::Full).map_err(|e| e.to_string())
    };
    let first = json(1)?;
    ensure(first == json(1)?, || {
        "two single-threaded runs differ".into()
    })?;
    ensure(first == json(8)?, || "1 vs 8 threads differ".into())?;
    Ok(format!("{} bytes identical over 3 runs", first.len()))
}

fn ccdf_properties() -> Outcome {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let values: Vec<u64> = (0..1000).map(|_| rng.random_range(1..=300)).collect();
        let c = ccdf(&values).map_err(|e| e.to_string())?;
        let min = *values.iter().min().unwrap();
        ensure(
            c.points[0].x == min as f64 && c.probability(&c.points[0]) == 1.0,
            || format!("seed {seed}: ccdf at minimum is not 1"),
        )?;
        let mut distinct: Vec<u64> = values.clone();
        distinct.sort_unstable();
        distinct.dedup();
        ensure(distinct.len() == c.len(), || {
            format!("seed {seed}: point count")
        })?;
        for (p, &x) in c.points.iter().zip(&distinct) {
            let at_least = values.iter().filter(|&&v| v >= x).count() as u64;
            ensure(p.x == x as f64 && p.at_least == at_least, || {
                format!("seed {seed}: mismatch at {x}")
            })?;
        }
        ensure(
            c.iter()
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[1].1 <= w[0].1),
            || format!("seed {seed}: increasing step"),
        )?;
    }
    Ok("10 inputs of 10^3 samples".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("algebraic invariants", algebraic_invariants),
        ("binning correctness", binning_correctness),
        ("power-law recovery", power_law_recovery),
        ("censored MLE recovery", censored_recovery),
        ("light vs heavy separation", light_heavy_separation),
        ("heavy-tail diagnostic", tail_diagnostic),
        ("determinism", determinism),
        ("ccdf properties", ccdf_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
