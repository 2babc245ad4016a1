//! Acceptance criteria. Runs without the libtest harness and prints one
//! line per criterion; exits non-zero if any fails.
//!
//! Pass a substring (e.g. `c4`) to run a subset.

mod common;

use std::time::Instant;

use isolink::arrivals::ChannelParams;
use isolink::brownian::{
    calibrate_receiver_radius, estimate_hit_probability, hit_probability_pair, CalibrationTarget, Dimensions,
    GeometryParams, McConfig,
};
use isolink::energy::{exocytosis_cost, synthesis_cost};
use isolink::modulation::{
    build_matrix, mutarotation_fractions, AnomericForm, JointProbabilityMatrix, LinkSpec, Scheme, Thresholds,
};
use isolink::physics::{diffusion_coefficient, MediumParams, MessengerSpec};
use isolink::rate::{maximize_rate, mutual_information, search_upper_bound, sweep_rate_curve, SearchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{exhaustive_search, sample_icsk, sample_imosk, sample_irsk, Tally, SEED};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn hexose_link(n: f64, sigma: f64) -> LinkSpec {
    LinkSpec::new(ChannelParams::table_hexose(n, sigma)).with_messenger(MessengerSpec::hexose())
}

fn c1_diffusion() -> Outcome {
    let d = diffusion_coefficient(&MediumParams::new(310.0, 0.001).unwrap(), &MessengerSpec::hexose()).unwrap() * 1e12;
    let rel = (d / 597.25 - 1.0).abs();
    outcome(rel <= 1e-3, format!("D = {d:.3} um^2/s, relative error {rel:.2e} (tol 1e-3)"))
}

fn c2_energy() -> Outcome {
    let es = synthesis_cost(&MessengerSpec::hexose());
    let ee = exocytosis_cost();
    let rel = (es / 2.111e-18 - 1.0).abs();
    outcome(
        rel <= 1e-3 && ee == 8.30e-19,
        format!("E_S = {es:.4e} J (rel {rel:.2e}), E_E = {ee:e} J"),
    )
}

fn random_link(rng: &mut ChaCha8Rng, scheme: Scheme) -> (LinkSpec, Thresholds) {
    let p1 = rng.random_range(0.02..0.98);
    let p2 = rng.random_range(p1..1.0);
    let ch = ChannelParams {
        n: rng.random_range(0.0..5000.0),
        p1,
        p2,
        noise_std: rng.random_range(0.5..500.0),
        ts: rng.random_range(0.0..8000.0),
        distance: 16e-6,
    };
    let q1 = rng.random_range(0.02..0.98);
    let second = ChannelParams {
        p1: q1,
        p2: rng.random_range(q1..1.0),
        ..ch
    };
    let link = LinkSpec::new(ch)
        .with_second_channel(second)
        .with_messenger(MessengerSpec::hexose());
    let upper = search_upper_bound(scheme, &link, &SearchConfig::default());
    let mut tau: Vec<f64> = (0..scheme.threshold_count())
        .map(|_| rng.random_range(0.0..upper))
        .collect();
    tau.sort_by(f64::total_cmp);
    (link, Thresholds::new(tau).unwrap())
}

fn c3_mass() -> Outcome {
    let schemes = [
        Scheme::B_ICSK,
        Scheme::Q_ICSK,
        Scheme::B_IMOSK_AWGN,
        Scheme::BImoskMuta,
        Scheme::IMOSK_32,
        Scheme::QIrsk,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for scheme in schemes {
        for _ in 0..200 {
            let (link, tau) = random_link(&mut rng, scheme);
            let m = build_matrix(scheme, &link, &tau).unwrap();
            let row = 1.0 / m.order as f64;
            let dev = m
                .row_sums()
                .iter()
                .map(|s| (s - row).abs())
                .fold((m.total() - 1.0).abs(), f64::max);
            worst = worst.max(dev);
            if dev > 1e-9 || m.entries.iter().any(|p| *p < 0.0) {
                failures.push(format!("{scheme} at {:?} tau {:?}", link.channel, tau.values()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "6 schemes x 200 points, worst mass deviation {worst:.1e} (tol 1e-9){}",
            failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

/// Largest entrywise deviation in units of the standard error of a
/// frequency with the analytic probability.
fn z_score(m: &JointProbabilityMatrix, t: &Tally) -> f64 {
    let n = t.draws as f64;
    let mut worst = 0.0f64;
    for x in 0..m.order {
        for y in 0..m.order {
            let p = m.get(x, y);
            let f = t.frequency(x, y);
            let se = (p * (1.0 - p) / n).sqrt();
            let z = if se > 0.0 {
                (f - p).abs() / se
            } else if f == p {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    worst
}

fn c4_oracle() -> Outcome {
    const DRAWS: u64 = 1_000_000;
    let grid: [(f64, f64); 10] = [
        (40.0, 10.0),
        (100.0, 30.0),
        (200.0, 100.0),
        (300.0, 50.0),
        (500.0, 100.0),
        (800.0, 200.0),
        (1000.0, 100.0),
        (2000.0, 300.0),
        (4000.0, 500.0),
        (8000.0, 1000.0),
    ];
    let mut worst: Vec<(Scheme, f64)> = vec![];
    let mut pass = true;
    for (i, &(n, sigma)) in grid.iter().enumerate() {
        let ch = ChannelParams::table_hexose(n, sigma);
        let second = ChannelParams {
            p1: 0.45,
            p2: 0.6,
            ..ch
        };
        let np = n * ch.p1;
        let isi = n * (ch.p2 - ch.p1);
        let seed = SEED + i as u64 * 16;
        let cases: Vec<(Scheme, JointProbabilityMatrix, Tally)> = vec![
            {
                let tau = [0.5 * np + isi];
                let m = build_matrix(Scheme::B_ICSK, &LinkSpec::new(ch), &Thresholds::new(tau.to_vec()).unwrap()).unwrap();
                (Scheme::B_ICSK, m, sample_icsk(2, &ch, &tau, DRAWS, seed))
            },
            {
                let tau = [0.5 * np + isi, 1.5 * np + 2.0 * isi, 2.5 * np + 2.5 * isi];
                let m = build_matrix(Scheme::Q_ICSK, &LinkSpec::new(ch), &Thresholds::new(tau.to_vec()).unwrap()).unwrap();
                (Scheme::Q_ICSK, m, sample_icsk(4, &ch, &tau, DRAWS, seed + 1))
            },
            {
                let tau = 0.5 * np;
                let m = build_matrix(Scheme::B_IMOSK_AWGN, &LinkSpec::new(ch), &Thresholds::single(tau).unwrap()).unwrap();
                (Scheme::B_IMOSK_AWGN, m, sample_imosk(2, &ch, tau, DRAWS, seed + 2))
            },
            {
                let tau = [0.7 * np, 1.6 * np, 2.5 * np];
                let link = LinkSpec::new(ch).with_second_channel(second);
                let m = build_matrix(Scheme::QIrsk, &link, &Thresholds::new(tau.to_vec()).unwrap()).unwrap();
                (Scheme::QIrsk, m, sample_irsk(&ch, &second, &tau, DRAWS, seed + 3))
            },
        ];
        for (scheme, m, tally) in cases {
            let z = z_score(&m, &tally);
            pass &= z <= 3.0;
            match worst.iter_mut().find(|w| w.0 == scheme) {
                Some(w) => w.1 = w.1.max(z),
                None => worst.push((scheme, z)),
            }
        }
    }
    let summary: Vec<String> = worst.iter().map(|(s, z)| format!("{s} {z:.2}")).collect();
    outcome(
        pass,
        format!("max |freq - p| / se over 10 points, 1e6 draws: {} (tol 3)", summary.join(", ")),
    )
}

fn snr_grid(lo: i32, hi: i32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(f64::from).collect()
}

fn c5_saturation() -> Outcome {
    let grid = snr_grid(-10, 30, 5);
    let search = SearchConfig::default();
    let fixture = hexose_link(0.0, 100.0);
    let m32 = sweep_rate_curve(Scheme::IMOSK_32, &fixture, &grid, &search).unwrap();
    let b = sweep_rate_curve(Scheme::B_IMOSK_AWGN, &fixture, &grid, &search).unwrap();
    let top32 = m32.points.last().unwrap().rate;
    let top2 = b.points.last().unwrap().rate;
    outcome(
        (top32 - 5.0).abs() <= 1e-3 && (top2 - 1.0).abs() <= 1e-3,
        format!("at 30 dB: 32-IMoSK {top32:.6} bits, B-IMoSK {top2:.6} bits (tol 1e-3)"),
    )
}

/// Both binary rates equal 1 bit to machine precision once saturated.
const ROUNDOFF: f64 = 1e-12;

fn c6_ordering() -> Outcome {
    let grid = snr_grid(-10, 30, 2);
    let search = SearchConfig::default();
    let fixture = hexose_link(0.0, 100.0);
    let icsk = sweep_rate_curve(Scheme::B_ICSK, &fixture, &grid, &search).unwrap();
    let imosk = sweep_rate_curve(Scheme::B_IMOSK_AWGN, &fixture, &grid, &search).unwrap();
    let mut min_gain = f64::INFINITY;
    let mut at = 0.0;
    for (a, b) in icsk.points.iter().zip(&imosk.points) {
        if b.rate - a.rate < min_gain {
            min_gain = b.rate - a.rate;
            at = a.snr_db;
        }
    }
    let rate_at = |scheme: Scheme| {
        let n = isolink::energy::molecules_for_snr(10.0, fixture.channel.p1, fixture.channel.noise_std).unwrap();
        maximize_rate(scheme, &fixture.with_n(n), &search).unwrap().rate
    };
    let gap4 = rate_at(Scheme::ImoskAwgn { order: 4 }) - rate_at(Scheme::Q_ICSK);
    let gap32 = rate_at(Scheme::IMOSK_32) - rate_at(Scheme::Icsk { order: 32 });
    outcome(
        min_gain >= -ROUNDOFF && gap32 > gap4,
        format!(
            "min B-IMoSK - B-ICSK = {min_gain:.3e} bits at {at} dB; gap at 10 dB: order 4 {gap4:.4}, order 32 {gap32:.4}"
        ),
    )
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn c7_bsc() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for (p, expect) in [(0.0, 1.0), (0.11, 0.5), (0.5, 0.0)] {
        let m = JointProbabilityMatrix::new(
            Scheme::B_ICSK,
            vec![0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)],
        )
        .unwrap();
        let i = mutual_information(&m).unwrap();
        pass &= (i - expect).abs() <= 1e-3 && (i - (1.0 - binary_entropy(p))).abs() <= 1e-3;
        parts.push(format!("p={p}: {i:.4}"));
    }
    outcome(pass, parts.join(", "))
}

fn c8_mutarotation() -> Outcome {
    let hexose = MessengerSpec::hexose();
    let n = 1e5;
    let start = mutarotation_fractions(&hexose, AnomericForm::Alpha, 0.0, n).unwrap();
    let eq = mutarotation_fractions(&hexose, AnomericForm::Alpha, 3600.0 / 0.99, n).unwrap();
    let frac = eq.n_alpha / n;
    let mut same = true;
    for (n, sigma) in [(300.0, 100.0), (1000.0, 100.0), (5000.0, 50.0)] {
        let ch = ChannelParams {
            ts: 0.0,
            ..ChannelParams::table_hexose(n, sigma)
        };
        let link = LinkSpec::new(ch).with_messenger(hexose.clone());
        for k in 1..8 {
            let tau = Thresholds::single(k as f64 * n * 0.1).unwrap();
            let muta = build_matrix(Scheme::BImoskMuta, &link, &tau).unwrap();
            let awgn = build_matrix(Scheme::B_IMOSK_AWGN, &link, &tau).unwrap();
            same &= muta.entries == awgn.entries;
        }
    }
    outcome(
        start.n_alpha == n && (frac - 0.3636).abs() <= 1e-4 && same,
        format!(
            "n_alpha(0) = {}, alpha fraction at equilibrium {frac:.5}, Ts=0 matrix equals AWGN: {same}",
            start.n_alpha
        ),
    )
}

struct RegressionCase {
    scheme: Scheme,
    link: LinkSpec,
    coarse: usize,
}

fn regression_cases() -> Vec<RegressionCase> {
    let mut cases = vec![];
    let mut push = |scheme, link, coarse| cases.push(RegressionCase { scheme, link, coarse });
    for (n, s) in [(50.0, 10.0), (300.0, 100.0), (1000.0, 100.0), (5000.0, 300.0)] {
        push(Scheme::B_ICSK, hexose_link(n, s), 64);
        push(Scheme::B_IMOSK_AWGN, hexose_link(n, s), 64);
    }
    for (n, s, ts) in [(2000.0, 100.0, 5.9), (1000.0, 50.0, 3000.0), (500.0, 20.0, 6000.0)] {
        let mut link = hexose_link(n, s);
        link.channel.ts = ts;
        push(Scheme::BImoskMuta, link, 64);
    }
    for (n, s) in [(200.0, 30.0), (1000.0, 100.0), (4000.0, 200.0)] {
        push(Scheme::Q_ICSK, hexose_link(n, s), 16);
    }
    for (n, s, second) in [(200.0, 30.0, None), (1000.0, 100.0, Some((0.45, 0.6))), (3000.0, 150.0, None)] {
        let mut link = hexose_link(n, s);
        if let Some((p1, p2)) = second {
            let second = ChannelParams { p1, p2, ..link.channel };
            link = link.with_second_channel(second);
        }
        push(Scheme::QIrsk, link, 16);
    }
    for (n, s) in [(100.0, 100.0), (300.0, 100.0), (900.0, 60.0)] {
        push(Scheme::IMOSK_32, hexose_link(n, s), 64);
    }
    cases
}

fn c9_optimizer() -> Outcome {
    let cases = regression_cases();
    let mut worst_lattice = 0.0f64;
    let mut worst_default = f64::INFINITY;
    for case in &cases {
        let lattice = SearchConfig {
            coarse_intervals: case.coarse,
            refinements: vec![10],
            ..SearchConfig::default()
        };
        let upper = search_upper_bound(case.scheme, &case.link, &lattice);
        let (oracle, _) = exhaustive_search(case.scheme, &case.link, upper, 10 * case.coarse);
        let fitted = maximize_rate(case.scheme, &case.link, &lattice).unwrap().rate;
        let default = maximize_rate(case.scheme, &case.link, &SearchConfig::default()).unwrap().rate;
        worst_lattice = worst_lattice.max((fitted - oracle).abs());
        worst_default = worst_default.min(default - oracle);
    }
    outcome(
        cases.len() == 20 && worst_lattice <= 1e-6 && worst_default >= -1e-6,
        format!(
            "{} configs: max |search - exhaustive| on the same lattice {worst_lattice:.1e}, \
             min (default search - exhaustive) {worst_default:.1e} (tol 1e-6)",
            cases.len()
        ),
    )
}

fn c10_hitting() -> Outcome {
    let ts = 5.9;
    let target = CalibrationTarget {
        distance: 16e-6,
        diffusion: 597.25e-12,
        ts,
        dimensions: Dimensions::ThreeD,
        target_p1: 0.6097,
        reference_p2: Some(0.7208),
    };
    let report = calibrate_receiver_radius(&target, &McConfig::for_symbol(ts, 100_000, SEED)).unwrap();
    let rel = report.p2_relative_error.unwrap();

    let mut nested = report.held_out_p2.hits >= report.held_out_p1.hits;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..10 {
        let d = rng.random_range(5e-6..30e-6);
        let geom = GeometryParams {
            distance: d,
            receiver_radius: rng.random_range(0.1..0.9) * d,
            dimensions: if rng.random_bool(0.5) { Dimensions::OneD } else { Dimensions::ThreeD },
        };
        let cfg = McConfig::for_symbol(ts, 2000, rng.random());
        let (p1, p2) = hit_probability_pair(&geom, target.diffusion, ts, &cfg).unwrap();
        nested &= p2.p_hat >= p1.p_hat;
    }

    let geom = GeometryParams {
        distance: target.distance,
        receiver_radius: report.receiver_radius,
        dimensions: Dimensions::ThreeD,
    };
    let small = estimate_hit_probability(&geom, target.diffusion, &McConfig::for_symbol(ts, 10_000, SEED + 2)).unwrap();
    let large = estimate_hit_probability(&geom, target.diffusion, &McConfig::for_symbol(ts, 40_000, SEED + 3)).unwrap();
    let ratio = small.std_err / large.std_err;

    outcome(
        rel <= 0.05 && nested && (1.6..=2.4).contains(&ratio),
        format!(
            "radius {:.3} um, held-out p1 {:.4}, p2 {:.4} vs 0.7208 (rel {rel:.3}, tol 0.05); p2 >= p1: {nested}; \
             std_err ratio at 4x particles {ratio:.3} (want 2 +- 20%)",
            report.receiver_radius * 1e6,
            report.held_out_p1.p_hat,
            report.held_out_p2.p_hat,
        ),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("c1", "diffusion fixture", c1_diffusion),
        ("c2", "energy fixture", c2_energy),
        ("c3", "probability mass", c3_mass),
        ("c4", "Monte Carlo channel equivalence", c4_oracle),
        ("c5", "saturation", c5_saturation),
        ("c6", "scheme ordering", c6_ordering),
        ("c7", "BSC mutual information", c7_bsc),
        ("c8", "mutarotation", c8_mutarotation),
        ("c9", "optimizer vs exhaustive grid", c9_optimizer),
        ("c10", "Monte Carlo hitting probability", c10_hitting),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id == f || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        println!(
            "criterion {id:>3} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
